//! Time-parametrized wall motions.
//!
//! A [`DeformationPath`] carries the two side lengths f₁(t), f₂(t) of a box
//! together with their first and second derivatives; the propagator consumes
//! all three (f enters the kinetic term, f″f/4 the quadratic confinement, and
//! f′f/4 the phase map back to the physical frame). Paths are built from
//! [`AxisLaw`] primitives; the composite laws used by the protocols
//! (smootherstep ramps chained with holds) are C², which the finite-difference
//! validator [`DeformationPath::validate`] checks rather than trusts.

use crate::error::{BoxError, Result};
use std::sync::Arc;

/// Anything that can serve as one axis of a path: returns (f, f′, f″) at `t`
/// measured from the start of the law's own domain.
pub trait ShapeEval: Send + Sync {
    /// Value and first two derivatives at local time `t` ∈ [0, duration].
    fn eval(&self, t: f64) -> (f64, f64, f64);
    /// Length of the law's domain.
    fn duration(&self) -> f64;
}

/// One side length as a function of time, on a normalized local clock.
///
/// Except for `Piecewise` and `Custom`, laws are evaluated on x = t/T ∈ [0, 1]
/// where T is the duration of the slot the law occupies.
#[derive(Clone)]
pub enum AxisLaw {
    /// f ≡ value.
    Constant(f64),
    /// Straight line from `from` to `to`; f″ ≡ 0, f′ jumps at the ends when
    /// chained, so chain it only where that is acceptable.
    Linear { from: f64, to: f64 },
    /// Quintic smootherstep from `from` to `to`: s(x) = x³(10 − 15x + 6x²),
    /// with s′ = s″ = 0 at both ends, so chains of these are C².
    Smootherstep { from: f64, to: f64 },
    /// Segments laid end to end; each entry is (duration, law).
    Piecewise(Arc<Vec<(f64, AxisLaw)>>),
    /// An externally synthesized law (e.g. from the control module).
    Custom(Arc<dyn ShapeEval>),
}

impl AxisLaw {
    /// Evaluate (f, f′, f″) at local time `t` within a slot of length `dur`.
    fn eval(&self, t: f64, dur: f64) -> (f64, f64, f64) {
        match self {
            AxisLaw::Constant(v) => (*v, 0.0, 0.0),
            AxisLaw::Linear { from, to } => {
                let x = t / dur;
                (from + (to - from) * x, (to - from) / dur, 0.0)
            }
            AxisLaw::Smootherstep { from, to } => {
                let x = (t / dur).clamp(0.0, 1.0);
                let s = x * x * x * (10.0 - 15.0 * x + 6.0 * x * x);
                let sp = 30.0 * x * x * (1.0 - x) * (1.0 - x);
                let spp = 60.0 * x * (1.0 - x) * (1.0 - 2.0 * x);
                let d = to - from;
                (from + d * s, d * sp / dur, d * spp / (dur * dur))
            }
            AxisLaw::Piecewise(segments) => {
                let total: f64 = segments.iter().map(|(d, _)| d).sum();
                debug_assert!((total - dur).abs() <= 1e-9 * total.max(1.0));
                let mut offset = 0.0;
                for (i, (d, law)) in segments.iter().enumerate() {
                    let last = i + 1 == segments.len();
                    if t <= offset + d + 1e-12 * total || last {
                        return law.eval((t - offset).clamp(0.0, *d), *d);
                    }
                    offset += d;
                }
                unreachable!("piecewise law with no segments")
            }
            AxisLaw::Custom(shape) => shape.eval(t),
        }
    }

    /// Natural duration: piecewise laws and custom shapes know their own
    /// length; primitive laws adapt to whatever slot they are given.
    fn natural_duration(&self) -> Option<f64> {
        match self {
            AxisLaw::Piecewise(segments) => Some(segments.iter().map(|(d, _)| d).sum()),
            AxisLaw::Custom(shape) => Some(shape.duration()),
            _ => None,
        }
    }
}

/// The two side lengths of a moving box on a common time interval.
#[derive(Clone)]
pub struct DeformationPath {
    axis1: AxisLaw,
    axis2: AxisLaw,
    t_start: f64,
    t_end: f64,
}

impl DeformationPath {
    /// Build a path on [t_start, t_end]; rejects empty intervals, laws whose
    /// natural duration disagrees with the interval, and non-positive side
    /// lengths (checked on a sample grid).
    pub fn new(axis1: AxisLaw, axis2: AxisLaw, t_start: f64, t_end: f64) -> Result<Self> {
        if !(t_end > t_start) {
            return Err(BoxError::InvalidParameter(format!(
                "path needs t_end > t_start, got [{t_start}, {t_end}]"
            )));
        }
        let dur = t_end - t_start;
        for (name, law) in [("axis1", &axis1), ("axis2", &axis2)] {
            if let Some(nat) = law.natural_duration() {
                if (nat - dur).abs() > 1e-9 * dur.max(1.0) {
                    return Err(BoxError::InvalidParameter(format!(
                        "{name}: law spans {nat}, interval spans {dur}"
                    )));
                }
            }
        }
        let path = DeformationPath { axis1, axis2, t_start, t_end };
        for i in 0..=256 {
            let t = t_start + dur * i as f64 / 256.0;
            let (f1, _, _) = path.axis1.eval(t - t_start, dur);
            let (f2, _, _) = path.axis2.eval(t - t_start, dur);
            if f1 <= 0.0 || f2 <= 0.0 {
                return Err(BoxError::InvalidParameter(format!(
                    "side length not positive at t = {t}: f1 = {f1}, f2 = {f2}"
                )));
            }
        }
        Ok(path)
    }

    /// Fixed box (a, b) over [t_start, t_end].
    pub fn constant(a: f64, b: f64, t_start: f64, t_end: f64) -> Result<Self> {
        Self::new(AxisLaw::Constant(a), AxisLaw::Constant(b), t_start, t_end)
    }

    /// Horizontal side moves linearly a → a′ while b stays fixed.
    pub fn linear_sweep_a(a: f64, a_prime: f64, b: f64, t_start: f64, t_end: f64) -> Result<Self> {
        Self::new(
            AxisLaw::Linear { from: a, to: a_prime },
            AxisLaw::Constant(b),
            t_start,
            t_end,
        )
    }

    /// Horizontal side follows a smootherstep a → a′ while b stays fixed.
    pub fn smooth_sweep_a(a: f64, a_prime: f64, b: f64, t_start: f64, t_end: f64) -> Result<Self> {
        Self::new(
            AxisLaw::Smootherstep { from: a, to: a_prime },
            AxisLaw::Constant(b),
            t_start,
            t_end,
        )
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    /// (f₁, f₁′, f₁″) at absolute time `t`.
    pub fn f1_full(&self, t: f64) -> (f64, f64, f64) {
        self.axis1.eval(t - self.t_start, self.t_end - self.t_start)
    }

    /// (f₂, f₂′, f₂″) at absolute time `t`.
    pub fn f2_full(&self, t: f64) -> (f64, f64, f64) {
        self.axis2.eval(t - self.t_start, self.t_end - self.t_start)
    }

    pub fn f1(&self, t: f64) -> f64 {
        self.f1_full(t).0
    }

    pub fn f2(&self, t: f64) -> f64 {
        self.f2_full(t).0
    }

    /// True when both axes are exactly derivative-free in curvature (f″ ≡ 0)
    /// by construction, which lets the propagator take the diagonal fast path.
    pub fn curvature_free(&self) -> bool {
        fn flat(law: &AxisLaw) -> bool {
            match law {
                AxisLaw::Constant(_) | AxisLaw::Linear { .. } => true,
                AxisLaw::Piecewise(segments) => segments.iter().all(|(_, l)| flat(l)),
                _ => false,
            }
        }
        flat(&self.axis1) && flat(&self.axis2)
    }

    /// Check the supplied derivatives against finite differences of the
    /// values on `samples` interior points; returns the worst relative
    /// mismatch over both axes and both derivative orders.
    ///
    /// The documented contract is a relative 10⁻⁶ agreement for C² laws.
    /// Five-point fourth-order stencils keep the comparison itself well below
    /// that: they are exact for the polynomial laws, and for smooth custom
    /// shapes the h⁴ truncation at h ≈ T·10⁻⁴ is negligible against the
    /// rounding floor of the second difference (≈10⁻⁷ relative).
    pub fn validate(&self, samples: usize) -> f64 {
        let dur = self.t_end - self.t_start;
        let h = dur * 1e-4;
        let mut worst: f64 = 0.0;
        for axis in [&self.axis1, &self.axis2] {
            for i in 1..samples {
                let t = dur * i as f64 / samples as f64;
                // Stay clear of the domain ends where the stencil would leave
                // the law's domain.
                if t < 3.0 * h || t > dur - 3.0 * h {
                    continue;
                }
                let (f0, fp, fpp) = axis.eval(t, dur);
                let (fm2, _, _) = axis.eval(t - 2.0 * h, dur);
                let (fm1, _, _) = axis.eval(t - h, dur);
                let (fp1, _, _) = axis.eval(t + h, dur);
                let (fp2, _, _) = axis.eval(t + 2.0 * h, dur);
                let fd1 = (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h);
                let fd2 = (-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * fp1 - fp2) / (12.0 * h * h);
                let scale1 = fp.abs().max(f0.abs() / dur).max(1e-12);
                let scale2 = fpp.abs().max(f0.abs() / (dur * dur)).max(1e-12);
                worst = worst.max((fd1 - fp).abs() / scale1);
                worst = worst.max((fd2 - fpp).abs() / scale2);
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn linear_law_matches_expectation() {
        let p = DeformationPath::linear_sweep_a(1.2, 0.8, 1.0, 0.0, 2.0).unwrap();
        assert_abs_diff_eq!(p.f1(0.0), 1.2);
        assert_abs_diff_eq!(p.f1(1.0), 1.0);
        assert_abs_diff_eq!(p.f1(2.0), 0.8);
        let (_, fp, fpp) = p.f1_full(0.7);
        assert_abs_diff_eq!(fp, -0.2);
        assert_eq!(fpp, 0.0);
        assert!(p.curvature_free());
    }

    #[test]
    fn smootherstep_is_flat_at_ends() {
        let p = DeformationPath::smooth_sweep_a(0.8, 1.2, 1.0, 0.0, 5.0).unwrap();
        let (f0, fp0, fpp0) = p.f1_full(0.0);
        let (f1, fp1, fpp1) = p.f1_full(5.0);
        assert_abs_diff_eq!(f0, 0.8);
        assert_abs_diff_eq!(f1, 1.2);
        assert_eq!(fp0, 0.0);
        assert_eq!(fp1, 0.0);
        assert_eq!(fpp0, 0.0);
        assert_eq!(fpp1, 0.0);
        assert!(!p.curvature_free());
        // Midpoint slope of smootherstep is 15/8 of the mean slope.
        let (_, fp_mid, _) = p.f1_full(2.5);
        assert_abs_diff_eq!(fp_mid, 0.4 / 5.0 * 15.0 / 8.0, epsilon = 1e-14);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let p = DeformationPath::smooth_sweep_a(1.2, 0.8, 1.0, 0.0, 3.0).unwrap();
        assert!(p.validate(64) < 1e-6, "mismatch {}", p.validate(64));
        let q = DeformationPath::linear_sweep_a(1.5, 0.9, 1.0, 0.0, 1.0).unwrap();
        assert!(q.validate(64) < 1e-6);
    }

    #[test]
    fn piecewise_chains_and_evaluates_each_segment() {
        let law = AxisLaw::Piecewise(Arc::new(vec![
            (1.0, AxisLaw::Smootherstep { from: 1.2, to: 0.8 }),
            (0.5, AxisLaw::Constant(0.8)),
            (1.0, AxisLaw::Smootherstep { from: 0.8, to: 1.2 }),
        ]));
        let p = DeformationPath::new(law, AxisLaw::Constant(1.0), 0.0, 2.5).unwrap();
        assert_abs_diff_eq!(p.f1(0.0), 1.2);
        assert_abs_diff_eq!(p.f1(1.2), 0.8);
        assert_abs_diff_eq!(p.f1(2.5), 1.2);
        assert!(p.validate(128) < 1e-6, "mismatch {}", p.validate(128));
    }

    #[test]
    fn rejects_bad_intervals_and_nonpositive_sides() {
        assert!(DeformationPath::constant(1.0, 1.0, 1.0, 1.0).is_err());
        assert!(DeformationPath::linear_sweep_a(1.0, -0.2, 1.0, 0.0, 1.0).is_err());
        let law = AxisLaw::Piecewise(Arc::new(vec![(1.0, AxisLaw::Constant(1.0))]));
        assert!(DeformationPath::new(law, AxisLaw::Constant(1.0), 0.0, 2.0).is_err());
    }
}
