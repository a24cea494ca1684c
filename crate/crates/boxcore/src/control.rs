//! The one-dimensional control chain: from a bilinear control V(τ) build the
//! auxiliary profile U, the time reparametrization τ(t), and the side-length
//! law f(t); plus decoupled 1D propagation and phase alignment.
//!
//! The chain solves, in order,
//!
//! * U′(τ) = 4U(τ) + V(τ) with U(0) = U0 (U must stay positive),
//! * τ″(t) = −8 τ′(t)² U(τ(t)) with τ(0) = 0, τ′(0) = 1/a², stopped when
//!   τ reaches the horizon τ_f at some finite time T,
//!
//! and reads off f(t) = τ′(t)^{−1/2}. A box whose side follows f realizes,
//! after the change of time variable t ↦ τ, the 1D bilinear equation
//! i∂_τ w = −∂²_y w + Ṽ(τ) y² w with the realized potential
//! Ṽ = V + 4U − 4U².

use std::sync::Arc;

use crate::error::{BoxError, Result};
use crate::evolution::basis::quadratic_moment_matrix;
use crate::evolution::propagate::midpoint_step_dense;
use crate::ode::{self, OdeOptions};
use crate::path::{AxisLaw, ShapeEval};
use crate::C64;

/// A user-supplied bilinear control V on [0, τ_f] with the initial value U0
/// for the auxiliary profile U.
#[derive(Clone)]
pub struct ControlProfile {
    v: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    tau_f: f64,
    u0: f64,
}

impl ControlProfile {
    pub fn new<F>(v: F, tau_f: f64, u0: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(tau_f > 0.0) || !tau_f.is_finite() {
            return Err(BoxError::InvalidParameter(format!(
                "control horizon must be positive and finite, got {tau_f}"
            )));
        }
        if !u0.is_finite() {
            return Err(BoxError::InvalidParameter(format!("U0 must be finite, got {u0}")));
        }
        Ok(ControlProfile { v: Arc::new(v), tau_f, u0 })
    }

    pub fn v(&self, tau: f64) -> f64 {
        (self.v)(tau)
    }

    pub fn tau_f(&self) -> f64 {
        self.tau_f
    }

    pub fn u0(&self) -> f64 {
        self.u0
    }

    pub fn with_u0(&self, u0: f64) -> Self {
        ControlProfile { v: self.v.clone(), tau_f: self.tau_f, u0 }
    }
}

/// The integrated profile U on [0, τ_f], with dense evaluation.
pub struct USolution {
    sol: ode::OdeSolution,
    u_min: f64,
    u_max: f64,
}

impl USolution {
    pub fn u(&self, tau: f64) -> f64 {
        let mut out = [0.0];
        self.sol.eval_into(tau.clamp(self.sol.t_start(), self.sol.t_end()), &mut out);
        out[0]
    }

    /// Largest grid value of U (the escape-bound constant ‖U‖_∞).
    pub fn u_max(&self) -> f64 {
        self.u_max
    }

    pub fn u_min(&self) -> f64 {
        self.u_min
    }
}

/// Number of grid points used for the positivity scan after integrating U.
const POSITIVITY_GRID: usize = 2048;

/// Solve U′ = 4U + V on [0, τ_f] and verify positivity on a grid.
pub fn integrate_u(profile: &ControlProfile) -> Result<USolution> {
    let v = profile.v.clone();
    let rhs = move |tau: f64, y: &[f64], dy: &mut [f64]| {
        dy[0] = 4.0 * y[0] + v(tau);
    };
    let sol = ode::solve(rhs, 0.0, &[profile.u0], profile.tau_f, OdeOptions::default())?;

    let mut u_min = f64::INFINITY;
    let mut u_max = f64::NEG_INFINITY;
    let mut at_tau = 0.0;
    let mut out = [0.0];
    for i in 0..=POSITIVITY_GRID {
        let tau = profile.tau_f * i as f64 / POSITIVITY_GRID as f64;
        sol.eval_into(tau, &mut out);
        if out[0] < u_min {
            u_min = out[0];
            at_tau = tau;
        }
        u_max = u_max.max(out[0]);
    }
    if u_min <= 0.0 {
        return Err(BoxError::ProfileNotPositive { min_u: u_min, at_tau });
    }
    Ok(USolution { sol, u_min, u_max })
}

/// Pick a U0 that keeps U positive: solve the homogeneous case U0 = 0 once,
/// use U(τ) = U0·e^{4τ} + U_hom(τ) to bound the needed offset, and double on
/// the (numerically unlikely) chance the grid bound was optimistic.
pub fn suggest_u0(profile: &ControlProfile) -> Result<f64> {
    let hom = integrate_hom(profile)?;
    let mut need = 0.0f64;
    let mut out = [0.0];
    for i in 0..=POSITIVITY_GRID {
        let tau = profile.tau_f * i as f64 / POSITIVITY_GRID as f64;
        hom.eval_into(tau, &mut out);
        need = need.max(-out[0] * (-4.0 * tau).exp());
    }
    let mut u0 = 1.0 + need.max(0.0);
    for _ in 0..60 {
        if integrate_u(&profile.with_u0(u0)).is_ok() {
            return Ok(u0);
        }
        u0 *= 2.0;
    }
    Err(BoxError::InvalidParameter(
        "no positive U0 found within 60 doublings; V may be singular".into(),
    ))
}

fn integrate_hom(profile: &ControlProfile) -> Result<ode::OdeSolution> {
    let v = profile.v.clone();
    let rhs = move |tau: f64, y: &[f64], dy: &mut [f64]| {
        dy[0] = 4.0 * y[0] + v(tau);
    };
    ode::solve(rhs, 0.0, &[0.0], profile.tau_f, OdeOptions::default())
}

/// The realized τ-frame potential Ṽ(τ) = V(τ) + 4U(τ) − 4U(τ)²: a box whose
/// side follows the synthesized f(t) evolves, in the τ variable, under
/// i∂_τ w = −∂² w + Ṽ(τ) y² w.
pub fn realized_potential(profile: &ControlProfile, u: &USolution, tau: f64) -> f64 {
    let uu = u.u(tau);
    profile.v(tau) + 4.0 * uu - 4.0 * uu * uu
}

/// The synthesized side-length law: T, sampled τ/τ′/f, and a [`ShapeEval`]
/// for exact use inside a [`crate::path::DeformationPath`].
pub struct ShapeLaw {
    pub t_grid: Vec<f64>,
    pub tau: Vec<f64>,
    pub tau_prime: Vec<f64>,
    pub f: Vec<f64>,
    duration: f64,
    synth: Arc<SynthShape>,
}

impl ShapeLaw {
    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// Wrap the exact synthesized law (ODE right-hand sides, not finite
    /// differences) as a path axis.
    pub fn axis_law(&self) -> AxisLaw {
        AxisLaw::Custom(self.synth.clone())
    }

    pub fn shape(&self) -> Arc<SynthShape> {
        self.synth.clone()
    }
}

/// Exact evaluation of (f, f′, f″) from the integrated τ-trajectory:
/// f = τ′^{−1/2}, f′ = 4U√τ′, f″ = 4τ′^{3/2}(U′ − 4U²) with U′ = 4U + V.
pub struct SynthShape {
    tau_sol: ode::OdeSolution,
    u: USolution,
    v: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    tau_f: f64,
    duration: f64,
    a: f64,
}

impl SynthShape {
    pub fn tau_of_t(&self, t: f64) -> (f64, f64) {
        let mut st = [0.0; 2];
        self.tau_sol.eval_into(t.clamp(0.0, self.duration), &mut st);
        (st[0].clamp(0.0, self.tau_f), st[1])
    }
}

impl ShapeEval for SynthShape {
    fn eval(&self, t: f64) -> (f64, f64, f64) {
        let (tau, tp) = self.tau_of_t(t);
        let u = self.u.u(tau);
        let v = (self.v)(tau);
        let sq = tp.sqrt();
        let f = if t <= 0.0 { self.a } else { 1.0 / sq };
        let fp = 4.0 * u * sq;
        let fpp = 4.0 * tp * sq * (4.0 * u + v - 4.0 * u * u);
        (f, fp, fpp)
    }

    fn duration(&self) -> f64 {
        self.duration
    }
}

/// Integrate τ″ = −8(τ′)²U(τ) from τ(0)=0, τ′(0)=1/a² until τ = τ_f; check
/// the escape bound τ(t) ≥ (1/(8M))(ln(a² + 8Mt) − 2 ln a) with M = ‖U‖_∞
/// and the window τ′ ∈ (0, 1/a²] on the sample grid.
pub fn synthesize_shape(profile: &ControlProfile, a: f64, samples: usize) -> Result<ShapeLaw> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(BoxError::InvalidParameter(format!("side length must be positive, got {a}")));
    }
    if samples < 2 {
        return Err(BoxError::InvalidParameter("need at least 2 shape samples".into()));
    }
    let u = integrate_u(profile)?;
    let m = u.u_max();
    let tau_f = profile.tau_f;

    // Hitting-time guard: equality in the escape bound (U ≡ M) gives the
    // latest possible arrival; pad by 5%.
    let t_guard = 1.05 * a * a * ((8.0 * m * tau_f).exp() - 1.0) / (8.0 * m);
    if !t_guard.is_finite() {
        return Err(BoxError::InvalidParameter(format!(
            "escape-time bound overflows (‖U‖∞·τ_f = {}); shrink the horizon or the control",
            m * tau_f
        )));
    }

    let u_ref = &u;
    let rhs = move |_t: f64, y: &[f64], dy: &mut [f64]| {
        dy[0] = y[1];
        dy[1] = -8.0 * y[1] * y[1] * u_ref.u(y[0]);
    };
    let (tau_sol, t_hit) = ode::solve_until(
        rhs,
        0.0,
        &[0.0, 1.0 / (a * a)],
        |_t, y| y[0] - tau_f,
        t_guard,
        OdeOptions::default(),
    )?;

    let duration = t_hit;
    let synth = SynthShape {
        tau_sol,
        u,
        v: profile.v.clone(),
        tau_f,
        duration,
        a,
    };

    let mut t_grid = Vec::with_capacity(samples + 1);
    let mut tau = Vec::with_capacity(samples + 1);
    let mut tau_prime = Vec::with_capacity(samples + 1);
    let mut f = Vec::with_capacity(samples + 1);
    let tp_cap = (1.0 + 1e-9) / (a * a);
    let ln_a2 = 2.0 * a.ln();
    for i in 0..=samples {
        let t = duration * i as f64 / samples as f64;
        let mut st = [0.0; 2];
        synth.tau_sol.eval_into(t, &mut st);
        let (tv, tp) = (st[0], st[1]);
        if !(tp > 0.0) || tp > tp_cap {
            return Err(BoxError::OdeFailure(format!(
                "τ′ = {tp} left (0, 1/a²] at t = {t}; integrator fault"
            )));
        }
        let bound = ((a * a + 8.0 * m * t).ln() - ln_a2) / (8.0 * m);
        if tv < bound - 1e-8 * tau_f.max(1.0) {
            return Err(BoxError::OdeFailure(format!(
                "escape bound violated at t = {t}: τ = {tv} < {bound}; integrator fault"
            )));
        }
        t_grid.push(t);
        tau.push(tv);
        tau_prime.push(tp);
        f.push(if i == 0 { a } else { 1.0 / tp.sqrt() });
    }

    Ok(ShapeLaw { t_grid, tau, tau_prime, f, duration, synth: Arc::new(synth) })
}

/// Propagate i∂_τ w = −∂²_y w + V(τ) y² w in the sine basis of (0,1):
/// H(τ) = diag(π²m²) + V(τ)·M with M the quadratic moment matrix, implicit
/// midpoint with `n_steps` uniform steps over [tau0, tau1].
pub fn propagate_1d<F>(
    initial: &[C64],
    potential: F,
    tau0: f64,
    tau1: f64,
    n_steps: usize,
) -> Result<Vec<C64>>
where
    F: Fn(f64) -> f64,
{
    if initial.is_empty() {
        return Err(BoxError::InvalidParameter("empty initial state".into()));
    }
    if !(tau1 > tau0) || n_steps == 0 {
        return Err(BoxError::InvalidParameter(format!(
            "need tau1 > tau0 and steps > 0, got [{tau0}, {tau1}] with {n_steps}"
        )));
    }
    let n = initial.len();
    let moment = quadratic_moment_matrix(n);
    let diag: Vec<f64> = (1..=n)
        .map(|m| (std::f64::consts::PI * m as f64).powi(2))
        .collect();
    let dtau = (tau1 - tau0) / n_steps as f64;
    let mut w = initial.to_vec();
    let mut h = vec![0.0; n * n];
    for step in 0..n_steps {
        let tau_mid = tau0 + (step as f64 + 0.5) * dtau;
        let vmid = potential(tau_mid);
        for r in 0..n {
            for c in 0..n {
                h[r * n + c] = vmid * moment[r * n + c] + if r == c { diag[r] } else { 0.0 };
            }
        }
        midpoint_step_dense(&mut w, &h, n, dtau)?;
    }
    Ok(w)
}

/// Smallest scan time t ≤ t_max at which every phase e^{−iλ_j t + i·current_j}
/// is within `delta` of e^{i·target_j} (chordal distance). The scan step
/// π·delta/(2·max λ) cannot skip a target window. Energies should be pairwise
/// distinct (joint density on the torus); t = 0 is an admissible answer.
pub fn phase_wait_time(
    energies: &[f64],
    current: &[f64],
    target: &[f64],
    delta: f64,
    t_max: f64,
) -> Option<f64> {
    assert_eq!(energies.len(), current.len());
    assert_eq!(energies.len(), target.len());
    assert!(delta > 0.0 && t_max >= 0.0);
    let max_lambda = energies.iter().fold(0.0f64, |m, &l| m.max(l.abs()));
    if max_lambda == 0.0 {
        return None;
    }
    let step = std::f64::consts::PI * delta / (2.0 * max_lambda);
    let n_steps = (t_max / step).floor() as u64;
    for i in 0..=n_steps {
        let t = i as f64 * step;
        let ok = energies.iter().zip(current).zip(target).all(|((&l, &c), &g)| {
            let diff = -l * t + c - g;
            2.0 * (0.5 * diff).sin().abs() < delta
        });
        if ok {
            return Some(t);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use crate::quad::integrate_adaptive;

    fn constant_profile(u0: f64, tau_f: f64) -> ControlProfile {
        // V ≡ −4U0 keeps U at the equilibrium U ≡ U0.
        ControlProfile::new(move |_| -4.0 * u0, tau_f, u0).unwrap()
    }

    #[test]
    fn equilibrium_control_holds_u_constant() {
        let profile = constant_profile(0.7, 1.3);
        let u = integrate_u(&profile).unwrap();
        for tau in [0.0, 0.31, 0.9, 1.3] {
            assert_relative_eq!(u.u(tau), 0.7, max_relative = 1e-10);
        }
    }

    #[test]
    fn homogeneous_case_grows_exponentially() {
        let profile = ControlProfile::new(|_| 0.0, 1.0, 0.4).unwrap();
        let u = integrate_u(&profile).unwrap();
        for tau in [0.2, 0.5, 1.0] {
            assert_relative_eq!(u.u(tau), 0.4 * (4.0 * tau).exp(), max_relative = 1e-8);
        }
    }

    #[test]
    fn ode_residual_vanishes_for_oscillating_control() {
        let profile = ControlProfile::new(f64::sin, 0.8, 3.0).unwrap();
        let u = integrate_u(&profile).unwrap();
        // Five-point fourth-order first derivative on the dense output.
        let h = 1e-3;
        for &tau in &[0.1, 0.33, 0.5, 0.7] {
            let d = (-u.u(tau + 2.0 * h) + 8.0 * u.u(tau + h) - 8.0 * u.u(tau - h)
                + u.u(tau - 2.0 * h))
                / (12.0 * h);
            let residual = (d - 4.0 * u.u(tau) - tau.sin()).abs();
            assert!(
                residual / (1.0 + 4.0 * u.u(tau).abs()) < 1e-8,
                "residual {residual} at tau = {tau}"
            );
        }
    }

    #[test]
    fn negative_dip_is_reported_with_location() {
        // U(τ) = 2.5 − 1.5e^{4τ} crosses zero at τ = ln(5/3)/4 ≈ 0.1277.
        let profile = ControlProfile::new(|_| -10.0, 1.0, 1.0).unwrap();
        match integrate_u(&profile) {
            Err(BoxError::ProfileNotPositive { min_u, .. }) => assert!(min_u < 0.0),
            Err(other) => panic!("expected ProfileNotPositive, got {other:?}"),
            Ok(_) => panic!("expected ProfileNotPositive, integration succeeded"),
        }
    }

    #[test]
    fn suggested_u0_restores_positivity() {
        let profile = ControlProfile::new(|_| -10.0, 1.0, 1.0).unwrap();
        let u0 = suggest_u0(&profile).unwrap();
        // Analytic requirement: U0 > 2.5(1 − e^{−4τ_f}), plus the +1 margin.
        let analytic = 1.0 + 2.5 * (1.0 - (-4.0f64).exp());
        assert_abs_diff_eq!(u0, analytic, epsilon = 1e-3);
        assert!(integrate_u(&profile.with_u0(u0)).is_ok());
    }

    #[test]
    fn constant_u_synthesis_matches_closed_form() {
        // U ≡ U0 gives 1/τ′(t) = a² + 8U0·t, so f(t) = √(a² + 8U0·t).
        let u0 = 0.3;
        let a = 1.2;
        let profile = constant_profile(u0, 0.5);
        let law = synthesize_shape(&profile, a, 400).unwrap();
        let t_exact = a * a * ((8.0 * u0 * 0.5f64).exp() - 1.0) / (8.0 * u0);
        assert_relative_eq!(law.duration(), t_exact, max_relative = 1e-8);
        for (i, &t) in law.t_grid.iter().enumerate() {
            let expect = (a * a + 8.0 * u0 * t).sqrt();
            assert_relative_eq!(law.f[i], expect, max_relative = 1e-6);
        }
    }

    #[test]
    fn synthesized_law_satisfies_the_monotonicity_package() {
        let profile = ControlProfile::new(|tau: f64| 0.5 * tau.sin(), 0.4, 1.0).unwrap();
        let law = synthesize_shape(&profile, 1.0, 300).unwrap();
        assert_abs_diff_eq!(law.f[0], 1.0);
        for i in 1..law.tau.len() {
            assert!(law.tau[i] > law.tau[i - 1], "tau not increasing at {i}");
            assert!(law.tau_prime[i] <= law.tau_prime[i - 1] + 1e-12, "tau' rose at {i}");
            assert!(law.f[i] > law.f[i - 1], "f not increasing at {i} (U > 0)");
        }
        assert_relative_eq!(law.tau[law.tau.len() - 1], 0.4, max_relative = 1e-9);
    }

    #[test]
    fn tau_round_trip_through_the_emitted_shape() {
        let profile = ControlProfile::new(|tau: f64| 0.5 * tau.sin(), 0.4, 1.0).unwrap();
        let law = synthesize_shape(&profile, 1.0, 100).unwrap();
        let synth = law.shape();
        let recomputed = integrate_adaptive(
            &|s: f64| {
                let (f, _, _) = synth.eval(s);
                1.0 / (f * f)
            },
            0.0,
            law.duration(),
            1e-9,
        );
        assert_abs_diff_eq!(recomputed, 0.4, epsilon = 1e-6);
    }

    #[test]
    fn free_1d_propagation_accumulates_the_free_phase() {
        let n = 4;
        let tau_f = 0.3;
        for m in 1..=2usize {
            let mut init = vec![C64::new(0.0, 0.0); n];
            init[m - 1] = C64::new(1.0, 0.0);
            let out = propagate_1d(&init, |_| 0.0, 0.0, tau_f, 20_000).unwrap();
            let lambda = (std::f64::consts::PI * m as f64).powi(2);
            let expect = C64::from_polar(1.0, -lambda * tau_f);
            assert!((out[m - 1] - expect).norm() < 1e-6, "mode {m} phase off");
            let norm: f64 = out.iter().map(|c| c.norm_sqr()).sum();
            // Per-step LU rounding accumulates across the 20k steps.
            assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn driven_1d_propagation_conserves_the_norm() {
        let n = 8;
        let mut init = vec![C64::new(0.0, 0.0); n];
        init[0] = C64::new(0.6, 0.0);
        init[2] = C64::new(0.0, 0.8);
        let out = propagate_1d(&init, |tau: f64| 3.0 * (2.0 * tau).cos(), 0.0, 1.0, 2000).unwrap();
        let norm: f64 = out.iter().map(|c| c.norm_sqr()).sum();
        assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn single_phase_wait_lands_on_the_circle_answer() {
        let lambda = 2.0;
        let theta = 1.3;
        let delta = 0.01;
        let t = phase_wait_time(&[lambda], &[0.0], &[theta], delta, 10.0).unwrap();
        let analytic = (2.0 * std::f64::consts::PI - theta) / lambda;
        let step = std::f64::consts::PI * delta / (2.0 * lambda);
        assert!((t - analytic).abs() <= step + 1e-12, "t = {t} vs {analytic}");
    }

    #[test]
    fn already_aligned_phases_return_zero() {
        let t = phase_wait_time(&[1.0, 2.0], &[0.4, 1.1], &[0.4, 1.1], 0.05, 5.0).unwrap();
        assert_eq!(t, 0.0);
    }

    #[test]
    fn incommensurate_pair_is_self_verifying() {
        let energies = [1.0, std::f64::consts::SQRT_2];
        let current = [0.0, 0.0];
        let target = [2.0, 4.1];
        let delta = 0.05;
        let t = phase_wait_time(&energies, &current, &target, delta, 20_000.0).unwrap();
        for j in 0..2 {
            let diff = -energies[j] * t + current[j] - target[j];
            assert!(2.0 * (0.5 * diff).sin().abs() < delta, "component {j} off at t = {t}");
        }
    }
}
