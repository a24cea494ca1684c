//! Time evolution of the rescaled moving-rectangle Schrödinger equation.
//!
//! States live on the unit square in the tensor sine basis
//! √2 sin(mπy₁)·√2 sin(nπy₂); the physical box enters through the
//! instantaneous side lengths and their first two derivatives. The rescaled
//! generator is
//!
//! H(t) = diag(π²m²/f₁² + π²n²/f₂²)
//!      + (f₁″f₁/4)·(M⊗I) + (f₂″f₂/4)·(I⊗M) + ε(t)·W,
//!
//! with M the quadratic moment matrix of y² and W an optional
//! symmetry-breaking potential. Propagation uses the implicit midpoint rule,
//! exactly norm-preserving up to the linear-solve tolerance.

pub mod basis;
pub mod breaker;
pub mod gauge;
pub mod hamiltonian;
pub mod propagate;
pub mod protocols;

use crate::error::{BoxError, Result};
use crate::spectrum::Mode;
use crate::C64;

/// A truncated wave function on the unit square: coefficient `coeffs[m·n2+n]`
/// multiplies the mode with quantum numbers (m+1, n+1).
#[derive(Debug, Clone)]
pub struct WaveState {
    pub n1: usize,
    pub n2: usize,
    pub coeffs: Vec<C64>,
}

impl WaveState {
    pub fn zero(n1: usize, n2: usize) -> Self {
        WaveState { n1, n2, coeffs: vec![C64::new(0.0, 0.0); n1 * n2] }
    }

    /// A pure basis mode, unit norm.
    pub fn from_mode(n1: usize, n2: usize, mode: Mode) -> Result<Self> {
        let mut state = WaveState::zero(n1, n2);
        let idx = state.index_of(mode)?;
        state.coeffs[idx] = C64::new(1.0, 0.0);
        Ok(state)
    }

    /// Tensor product of two per-axis coefficient vectors.
    pub fn product(axis1: &[C64], axis2: &[C64]) -> Self {
        let (n1, n2) = (axis1.len(), axis2.len());
        let mut coeffs = Vec::with_capacity(n1 * n2);
        for c1 in axis1 {
            for c2 in axis2 {
                coeffs.push(c1 * c2);
            }
        }
        WaveState { n1, n2, coeffs }
    }

    pub fn index_of(&self, mode: Mode) -> Result<usize> {
        let (m, n) = (mode.m as usize, mode.n as usize);
        if m > self.n1 || n > self.n2 {
            return Err(BoxError::InvalidParameter(format!(
                "mode ({m},{n}) outside the {}×{} truncation",
                self.n1, self.n2
            )));
        }
        Ok((m - 1) * self.n2 + (n - 1))
    }

    pub fn amplitude(&self, mode: Mode) -> C64 {
        self.index_of(mode).map(|i| self.coeffs[i]).unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn population(&self, mode: Mode) -> f64 {
        self.amplitude(mode).norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Population in the top 10% of mode indices along either axis.
    pub fn tail_population(&self) -> f64 {
        let m_cut = (0.9 * self.n1 as f64).floor() as usize; // quantum number > cut
        let n_cut = (0.9 * self.n2 as f64).floor() as usize;
        let mut sum = 0.0;
        for m in 0..self.n1 {
            for n in 0..self.n2 {
                if m + 1 > m_cut || n + 1 > n_cut {
                    sum += self.coeffs[m * self.n2 + n].norm_sqr();
                }
            }
        }
        sum
    }
}

pub use breaker::{AmplitudeLaw, BreakerDrive, SymmetryBreaker};
pub use gauge::{from_physical_mode, gauge_overlap_matrix, gauge_to_physical, physical_amplitude};
pub use hamiltonian::{assemble_hamiltonian, HamiltonianTerms};
pub use propagate::{propagate, PropagationReport};
pub use protocols::{
    find_split_speed, run_adiabatic_sweep, run_pumping, PumpReport, SplitReport, SweepReport,
};
