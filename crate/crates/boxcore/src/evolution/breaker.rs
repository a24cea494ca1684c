//! Deterministic symmetry-breaking potential on the unit square.
//!
//! W(y₁,y₂) = y₁²·y₂ + Σ_k α_k cos(p_k πy₁) cos(q_k πy₂), with six seeded
//! random low-order cosine terms (α ∈ ±0.1, p,q ∈ 0..=3), normalized to unit
//! operator norm on the chosen truncation. The y₁²y₂ term alone already
//! couples the mirror pair (2,1)/(1,2); the random terms guard against any
//! accidental selection rule for other tracked pairs, and the recorded seed
//! makes every run reproducible.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{BoxError, Result};
use crate::evolution::basis::{cos_coupling_entry, linear_moment_matrix, quadratic_moment_matrix};
use crate::spectrum::Mode;
use crate::C64;

const RANDOM_TERMS: usize = 6;
const TERM_AMPLITUDE: f64 = 0.1;
const MAX_COS_ORDER: usize = 3;

#[derive(Debug, Clone, Copy)]
struct CosTerm {
    p: usize,
    q: usize,
    amp: f64,
}

/// A fixed non-symmetric potential with unit operator norm.
pub struct SymmetryBreaker {
    n1: usize,
    n2: usize,
    /// Baseline coupling strength ε_sym multiplying the normalized potential.
    pub strength: f64,
    pub seed: u64,
    terms: Vec<CosTerm>,
    /// 1/‖W_raw‖ so that `norm_scale`·W_raw has unit operator norm.
    norm_scale: f64,
    moment1: Vec<f64>,
    linear2: Vec<f64>,
}

impl SymmetryBreaker {
    pub fn new(n1: usize, n2: usize, strength: f64, seed: u64) -> Result<Self> {
        if n1 < 2 || n2 < 2 {
            return Err(BoxError::InvalidParameter(
                "breaker needs at least a 2×2 truncation".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let terms: Vec<CosTerm> = (0..RANDOM_TERMS)
            .map(|_| CosTerm {
                p: rng.gen_range(0..=MAX_COS_ORDER),
                q: rng.gen_range(0..=MAX_COS_ORDER),
                amp: rng.gen_range(-TERM_AMPLITUDE..TERM_AMPLITUDE),
            })
            .collect();
        let mut breaker = SymmetryBreaker {
            n1,
            n2,
            strength,
            seed,
            terms,
            norm_scale: 1.0,
            moment1: quadratic_moment_matrix(n1),
            linear2: linear_moment_matrix(n2),
        };
        let norm = breaker.operator_norm(&mut rng)?;
        breaker.norm_scale = 1.0 / norm;
        Ok(breaker)
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    /// out += scale · W_normalized · w (row-major n1×n2 coefficient layout).
    pub fn apply_add(&self, w: &[C64], scale: f64, out: &mut [C64]) {
        let s = scale * self.norm_scale;
        let (n1, n2) = (self.n1, self.n2);
        debug_assert_eq!(w.len(), n1 * n2);
        // Main term (M ⊗ P): contract the quadratic moment along axis 1 into a
        // scratch buffer, then the linear moment along axis 2.
        let mut tmp = vec![C64::new(0.0, 0.0); n1 * n2];
        for m in 0..n1 {
            for mp in 0..n1 {
                let mv = self.moment1[m * n1 + mp];
                if mv == 0.0 {
                    continue;
                }
                let row_in = &w[mp * n2..(mp + 1) * n2];
                let row_out = &mut tmp[m * n2..(m + 1) * n2];
                for (o, i) in row_out.iter_mut().zip(row_in) {
                    *o += mv * i;
                }
            }
        }
        for m in 0..n1 {
            let row_in = &tmp[m * n2..(m + 1) * n2];
            for n in 0..n2 {
                let mut acc = C64::new(0.0, 0.0);
                for np in 0..n2 {
                    acc += self.linear2[n * n2 + np] * row_in[np];
                }
                out[m * n2 + n] += s * acc;
            }
        }
        // Cosine terms: at most a handful of couplings per index.
        for term in &self.terms {
            let ts = s * term.amp;
            for m in 0..n1 {
                let m_q = m + 1;
                // Partner quantum numbers coupled to m_q by cos(pπy).
                for m2_q in cos_partners(m_q, term.p, n1) {
                    let cm = cos_coupling_entry(m_q, m2_q, term.p);
                    if cm == 0.0 {
                        continue;
                    }
                    for n in 0..n2 {
                        let n_q = n + 1;
                        for n2_q in cos_partners(n_q, term.q, n2) {
                            let cn = cos_coupling_entry(n_q, n2_q, term.q);
                            if cn == 0.0 {
                                continue;
                            }
                            out[m * self.n2 + n] +=
                                ts * cm * cn * w[(m2_q - 1) * self.n2 + (n2_q - 1)];
                        }
                    }
                }
            }
        }
    }

    /// Add scale·diag(W_normalized) to a real diagonal accumulator.
    pub fn add_diag(&self, scale: f64, out: &mut [f64]) {
        let s = scale * self.norm_scale;
        for m in 0..self.n1 {
            for n in 0..self.n2 {
                let mut d = self.moment1[m * self.n1 + m] * self.linear2[n * self.n2 + n];
                for term in &self.terms {
                    d += term.amp
                        * cos_coupling_entry(m + 1, m + 1, term.p)
                        * cos_coupling_entry(n + 1, n + 1, term.q);
                }
                out[m * self.n2 + n] += s * d;
            }
        }
    }

    /// Normalized matrix element ⟨a|W|b⟩ in quantum numbers.
    pub fn element(&self, a: Mode, b: Mode) -> f64 {
        let (am, an) = (a.m as usize, a.n as usize);
        let (bm, bn) = (b.m as usize, b.n as usize);
        assert!(am <= self.n1 && bm <= self.n1 && an <= self.n2 && bn <= self.n2);
        let mut v = self.moment1[(am - 1) * self.n1 + (bm - 1)]
            * self.linear2[(an - 1) * self.n2 + (bn - 1)];
        for term in &self.terms {
            v += term.amp
                * cos_coupling_entry(am, bm, term.p)
                * cos_coupling_entry(an, bn, term.q);
        }
        v * self.norm_scale
    }

    /// Fail unless the breaker couples the tracked pair with at least
    /// `min_coupling` (normalized units).
    pub fn ensure_generic(&self, a: Mode, b: Mode, min_coupling: f64) -> Result<()> {
        let w = self.element(a, b);
        if w.abs() < min_coupling {
            return Err(BoxError::BreakerNotGeneric { pair: (a, b), element: w });
        }
        Ok(())
    }

    /// Dense normalized matrix, row-major (n1·n2)², for assembly and tests.
    pub fn assemble(&self) -> Vec<f64> {
        let dim = self.n1 * self.n2;
        let mut out = vec![0.0; dim * dim];
        let mut unit = vec![C64::new(0.0, 0.0); dim];
        let mut col = vec![C64::new(0.0, 0.0); dim];
        for j in 0..dim {
            unit[j] = C64::new(1.0, 0.0);
            col.iter_mut().for_each(|c| *c = C64::new(0.0, 0.0));
            self.apply_add(&unit, 1.0, &mut col);
            for i in 0..dim {
                out[i * dim + j] = col[i].re;
            }
            unit[j] = C64::new(0.0, 0.0);
        }
        out
    }

    /// Operator norm of the raw potential by power iteration (symmetric, so
    /// the dominant |eigenvalue| is the norm).
    fn operator_norm(&self, rng: &mut ChaCha8Rng) -> Result<f64> {
        let dim = self.n1 * self.n2;
        let mut v: Vec<C64> =
            (0..dim).map(|_| C64::new(rng.gen_range(-1.0..1.0), 0.0)).collect();
        normalize(&mut v);
        let mut wv = vec![C64::new(0.0, 0.0); dim];
        let mut lambda = 0.0f64;
        for _ in 0..500 {
            wv.iter_mut().for_each(|c| *c = C64::new(0.0, 0.0));
            // norm_scale is 1 while measuring the raw operator.
            self.apply_add(&v, 1.0, &mut wv);
            let rayleigh: f64 = v.iter().zip(&wv).map(|(a, b)| (a.conj() * b).re).sum();
            let wnorm = wv.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if wnorm == 0.0 {
                return Err(BoxError::InvalidParameter(
                    "breaker potential vanished on the truncation".into(),
                ));
            }
            v.clone_from(&wv);
            normalize(&mut v);
            if (wnorm - lambda.abs()).abs() <= 1e-12 * wnorm {
                return Ok(rayleigh.abs().max(wnorm * 1e-6));
            }
            lambda = wnorm;
        }
        Ok(lambda.abs())
    }
}

fn normalize(v: &mut [C64]) {
    let n = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|c| *c /= n);
    }
}

/// Quantum numbers k ≤ n_max coupled to m by cos(pπy): |m−k| = p or m+k = p.
fn cos_partners(m: usize, p: usize, n_max: usize) -> impl Iterator<Item = usize> {
    let candidates = [
        Some(m + p),
        m.checked_sub(p).filter(|&k| k >= 1),
        p.checked_sub(m).filter(|&k| k >= 1),
    ];
    let mut seen = [0usize; 3];
    let mut count = 0;
    for c in candidates.into_iter().flatten() {
        if c >= 1 && c <= n_max && !seen[..count].contains(&c) {
            seen[count] = c;
            count += 1;
        }
    }
    seen.into_iter().take(count)
}

/// Time envelope multiplying the breaker's baseline strength.
#[derive(Debug, Clone, Copy)]
pub enum AmplitudeLaw {
    Constant(f64),
    /// Smooth bump on [t0,t1]: exp(4 − 1/(x(1−x))) with x = (t−t0)/(t1−t0);
    /// peaks at 1 in the middle and vanishes with all derivatives at the ends.
    Bump { t0: f64, t1: f64 },
}

impl AmplitudeLaw {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            AmplitudeLaw::Constant(v) => v,
            AmplitudeLaw::Bump { t0, t1 } => {
                let x = (t - t0) / (t1 - t0);
                if x <= 0.0 || x >= 1.0 {
                    0.0
                } else {
                    (4.0 - 1.0 / (x * (1.0 - x))).exp()
                }
            }
        }
    }
}

/// A breaker with its time envelope: ε(t) = strength · envelope(t).
pub struct BreakerDrive {
    pub breaker: SymmetryBreaker,
    pub envelope: AmplitudeLaw,
}

impl BreakerDrive {
    pub fn constant(breaker: SymmetryBreaker) -> Self {
        BreakerDrive { breaker, envelope: AmplitudeLaw::Constant(1.0) }
    }

    pub fn strength_at(&self, t: f64) -> f64 {
        self.breaker.strength * self.envelope.value(t)
    }
}
