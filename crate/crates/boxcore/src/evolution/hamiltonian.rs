//! Assembly and fast application of the rescaled Hamiltonian
//! H(t) = diag(π²m²/f₁² + π²n²/f₂²) + (f₁″f₁/4)(M⊗I) + (f₂″f₂/4)(I⊗M) + ε(t)W.

use nalgebra::DMatrix;

use crate::evolution::basis::quadratic_moment_matrix;
use crate::evolution::breaker::BreakerDrive;
use crate::path::DeformationPath;
use crate::C64;

/// Precomputed pieces of H for one truncation; the time dependence enters
/// through the four scalars (1/f₁², 1/f₂², f₁″f₁/4, f₂″f₂/4) and ε(t).
pub struct HamiltonianTerms {
    pub n1: usize,
    pub n2: usize,
    /// π²m² for m = 1..n1 and π²n² for n = 1..n2.
    pm2_1: Vec<f64>,
    pm2_2: Vec<f64>,
    moment1: Vec<f64>,
    moment2: Vec<f64>,
}

/// The four path scalars of H at one instant.
#[derive(Debug, Clone, Copy)]
pub struct PathScalars {
    pub inv_f1_sq: f64,
    pub inv_f2_sq: f64,
    /// g1 = f₁″f₁/4.
    pub g1: f64,
    /// g2 = f₂″f₂/4.
    pub g2: f64,
}

impl PathScalars {
    pub fn at(path: &DeformationPath, t: f64) -> Self {
        let (f1, _, f1pp) = path.f1_full(t);
        let (f2, _, f2pp) = path.f2_full(t);
        PathScalars {
            inv_f1_sq: 1.0 / (f1 * f1),
            inv_f2_sq: 1.0 / (f2 * f2),
            g1: 0.25 * f1pp * f1,
            g2: 0.25 * f2pp * f2,
        }
    }
}

impl HamiltonianTerms {
    pub fn new(n1: usize, n2: usize) -> Self {
        let pi = std::f64::consts::PI;
        HamiltonianTerms {
            n1,
            n2,
            pm2_1: (1..=n1).map(|m| (pi * m as f64).powi(2)).collect(),
            pm2_2: (1..=n2).map(|n| (pi * n as f64).powi(2)).collect(),
            moment1: quadratic_moment_matrix(n1),
            moment2: quadratic_moment_matrix(n2),
        }
    }

    /// Kinetic diagonal λ_{m,n}(t) = π²m²/f₁² + π²n²/f₂², row-major.
    pub fn kinetic_diag(&self, sc: &PathScalars, out: &mut [f64]) {
        for m in 0..self.n1 {
            let a = self.pm2_1[m] * sc.inv_f1_sq;
            let row = &mut out[m * self.n2..(m + 1) * self.n2];
            for (n, slot) in row.iter_mut().enumerate() {
                *slot = a + self.pm2_2[n] * sc.inv_f2_sq;
            }
        }
    }

    /// Full diagonal of H including curvature and breaker contributions.
    pub fn full_diag(
        &self,
        sc: &PathScalars,
        drive: Option<(&BreakerDrive, f64)>,
        out: &mut [f64],
    ) {
        self.kinetic_diag(sc, out);
        for m in 0..self.n1 {
            let dm = self.moment1[m * self.n1 + m] * sc.g1;
            let row = &mut out[m * self.n2..(m + 1) * self.n2];
            for (n, slot) in row.iter_mut().enumerate() {
                *slot += dm + self.moment2[n * self.n2 + n] * sc.g2;
            }
        }
        if let Some((d, eps)) = drive {
            if eps != 0.0 {
                d.breaker.add_diag(eps, out);
            }
        }
    }

    /// out = H·w for the given scalars and breaker strength.
    pub fn apply(
        &self,
        sc: &PathScalars,
        drive: Option<(&BreakerDrive, f64)>,
        w: &[C64],
        out: &mut [C64],
    ) {
        let (n1, n2) = (self.n1, self.n2);
        debug_assert_eq!(w.len(), n1 * n2);
        // Kinetic diagonal.
        for m in 0..n1 {
            let a = self.pm2_1[m] * sc.inv_f1_sq;
            for n in 0..n2 {
                out[m * n2 + n] = (a + self.pm2_2[n] * sc.inv_f2_sq) * w[m * n2 + n];
            }
        }
        // Curvature along axis 1: g1·(M⊗I).
        if sc.g1 != 0.0 {
            for m in 0..n1 {
                let row_out = &mut out[m * n2..(m + 1) * n2];
                for mp in 0..n1 {
                    let c = sc.g1 * self.moment1[m * n1 + mp];
                    let row_in = &w[mp * n2..(mp + 1) * n2];
                    for (o, i) in row_out.iter_mut().zip(row_in) {
                        *o += c * i;
                    }
                }
            }
        }
        // Curvature along axis 2: g2·(I⊗M).
        if sc.g2 != 0.0 {
            for m in 0..n1 {
                let row_in = &w[m * n2..(m + 1) * n2];
                let row_out = &mut out[m * n2..(m + 1) * n2];
                for (n, o) in row_out.iter_mut().enumerate() {
                    let mrow = &self.moment2[n * n2..(n + 1) * n2];
                    let mut acc = C64::new(0.0, 0.0);
                    for (c, i) in mrow.iter().zip(row_in) {
                        acc += c * i;
                    }
                    *o += sc.g2 * acc;
                }
            }
        }
        if let Some((d, eps)) = drive {
            if eps != 0.0 {
                d.breaker.apply_add(w, eps, out);
            }
        }
    }
}

/// Dense Hermitian (real symmetric) matrix of H(t), for spectra/tests.
pub fn assemble_hamiltonian(
    path: &DeformationPath,
    t: f64,
    n1: usize,
    n2: usize,
    drive: Option<&BreakerDrive>,
) -> DMatrix<f64> {
    let terms = HamiltonianTerms::new(n1, n2);
    let sc = PathScalars::at(path, t);
    let dim = n1 * n2;
    let mut h = DMatrix::zeros(dim, dim);
    let mut diag = vec![0.0; dim];
    terms.kinetic_diag(&sc, &mut diag);
    for (i, d) in diag.iter().enumerate() {
        h[(i, i)] = *d;
    }
    for m in 0..n1 {
        for mp in 0..n1 {
            let c = sc.g1 * terms.moment1[m * n1 + mp];
            if c != 0.0 {
                for n in 0..n2 {
                    h[(m * n2 + n, mp * n2 + n)] += c;
                }
            }
        }
    }
    for n in 0..n2 {
        for np in 0..n2 {
            let c = sc.g2 * terms.moment2[n * n2 + np];
            if c != 0.0 {
                for m in 0..n1 {
                    h[(m * n2 + n, m * n2 + np)] += c;
                }
            }
        }
    }
    if let Some(d) = drive {
        let eps = d.strength_at(t);
        if eps != 0.0 {
            let w = d.breaker.assemble();
            for i in 0..dim {
                for j in 0..dim {
                    h[(i, j)] += eps * w[i * dim + j];
                }
            }
        }
    }
    h
}
