//! Embedded Runge–Kutta 5(4) integration with continuous output.
//!
//! The Dormand–Prince pair with the standard quartic interpolant; small dense
//! systems only (the library integrates one- and two-dimensional ODEs).
//! Continuous output is stored per accepted step, so solutions can be
//! evaluated anywhere and events located by bisection on the interpolant.

use crate::error::{BoxError, Result};

/// Tolerances and budgets for an adaptive solve.
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; estimated from the first derivative when absent.
    pub h0: Option<f64>,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-10, atol: 1e-12, h0: None, max_steps: 1_000_000 }
    }
}

// Dormand–Prince coefficients.
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const A7: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
/// b − b̂ (5th-order weights minus the embedded 4th-order ones).
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
/// Weights of the quartic interpolant's fifth coefficient.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// Dense output for one accepted step, stored per component.
struct DenseSegment {
    t0: f64,
    h: f64,
    /// rcont[c] = 5 interpolation coefficients of component c.
    rcont: Vec<[f64; 5]>,
}

impl DenseSegment {
    fn eval_into(&self, t: f64, out: &mut [f64]) {
        let theta = ((t - self.t0) / self.h).clamp(0.0, 1.0);
        let th1 = 1.0 - theta;
        for (c, r) in self.rcont.iter().enumerate() {
            out[c] = r[0] + theta * (r[1] + th1 * (r[2] + theta * (r[3] + th1 * r[4])));
        }
    }
}

/// An integrated trajectory with continuous output on [t_start, t_end].
pub struct OdeSolution {
    segments: Vec<DenseSegment>,
    dim: usize,
    t_start: f64,
    t_end: f64,
    y_end: Vec<f64>,
}

impl OdeSolution {
    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn y_end(&self) -> &[f64] {
        &self.y_end
    }

    /// Evaluate the interpolated solution; clamps to the integration range.
    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim);
        let idx = self
            .segments
            .partition_point(|s| s.t0 + s.h < t)
            .min(self.segments.len() - 1);
        self.segments[idx].eval_into(t, out);
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(t, &mut out);
        out
    }

    /// Truncate the stored trajectory at `t` (used after event location).
    fn truncate_at(&mut self, t: f64) {
        let y = self.eval(t);
        while let Some(last) = self.segments.last() {
            if last.t0 >= t && self.segments.len() > 1 {
                self.segments.pop();
            } else {
                break;
            }
        }
        self.t_end = t;
        self.y_end = y;
    }
}

/// Integrate y′ = f(t, y) from `t0` to `t1` (t1 > t0).
pub fn solve<F>(f: F, t0: f64, y0: &[f64], t1: f64, opts: OdeOptions) -> Result<OdeSolution>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    solve_inner(f, t0, y0, t1, opts, |_, _| 1.0).map(|(sol, _)| sol)
}

/// Integrate until `event` changes sign, then locate the root on the dense
/// interpolant to relative 10⁻¹². Errors if `t_guard` arrives first.
pub fn solve_until<F, G>(
    f: F,
    t0: f64,
    y0: &[f64],
    event: G,
    t_guard: f64,
    opts: OdeOptions,
) -> Result<(OdeSolution, f64)>
where
    F: Fn(f64, &[f64], &mut [f64]),
    G: Fn(f64, &[f64]) -> f64,
{
    let (sol, hit) = solve_inner(f, t0, y0, t_guard, opts, &event)?;
    match hit {
        Some(t_event) => Ok((sol, t_event)),
        None => Err(BoxError::OdeFailure(format!(
            "event did not fire before the guard time {t_guard}"
        ))),
    }
}

fn solve_inner<F, G>(
    f: F,
    t0: f64,
    y0: &[f64],
    t1: f64,
    opts: OdeOptions,
    event: G,
) -> Result<(OdeSolution, Option<f64>)>
where
    F: Fn(f64, &[f64], &mut [f64]),
    G: Fn(f64, &[f64]) -> f64,
{
    if !(t1 > t0) {
        return Err(BoxError::InvalidParameter(format!(
            "integration needs t1 > t0, got [{t0}, {t1}]"
        )));
    }
    let dim = y0.len();
    let mut k = vec![vec![0.0; dim]; 7];
    let mut y = y0.to_vec();
    let mut y_stage = vec![0.0; dim];
    let mut y_next = vec![0.0; dim];
    let mut t = t0;
    f(t, &y, &mut k[0]);

    let mut h = opts.h0.unwrap_or_else(|| {
        let ynorm = norm(&y);
        let fnorm = norm(&k[0]);
        let scale = (ynorm + opts.atol) / (fnorm + 1e-300);
        (0.01 * scale).min(t1 - t0).max(1e-300)
    });

    let mut segments = Vec::new();
    let mut g_prev = event(t, &y);
    let mut steps = 0;

    while t < t1 {
        if steps >= opts.max_steps {
            return Err(BoxError::OdeFailure(format!(
                "step budget {} exhausted at t = {t}",
                opts.max_steps
            )));
        }
        steps += 1;
        h = h.min(t1 - t);
        // Underflow is judged against the current time, not the full span:
        // event-guarded solves may pass a vastly conservative t1.
        if h < f64::EPSILON * t.abs().max(1e-6) {
            return Err(BoxError::OdeFailure(format!("step size underflow at t = {t}")));
        }

        // Stages 2..=7 (stage 1 is the stored FSAL derivative).
        stage(&f, t, &y, h, &k, &A2, C[1], &mut y_stage);
        k[1].copy_from_slice(&y_stage);
        stage(&f, t, &y, h, &k, &A3, C[2], &mut y_stage);
        k[2].copy_from_slice(&y_stage);
        stage(&f, t, &y, h, &k, &A4, C[3], &mut y_stage);
        k[3].copy_from_slice(&y_stage);
        stage(&f, t, &y, h, &k, &A5, C[4], &mut y_stage);
        k[4].copy_from_slice(&y_stage);
        stage(&f, t, &y, h, &k, &A6, C[5], &mut y_stage);
        k[5].copy_from_slice(&y_stage);
        // y_next via the 5th-order weights (row A7), which is also stage 7.
        for c in 0..dim {
            let mut acc = 0.0;
            for (j, a) in A7.iter().enumerate() {
                acc += a * k[j][c];
            }
            y_next[c] = y[c] + h * acc;
        }
        f(t + h, &y_next, &mut y_stage);
        k[6].copy_from_slice(&y_stage);

        // Embedded error estimate.
        let mut err: f64 = 0.0;
        for c in 0..dim {
            let mut e = 0.0;
            for (j, w) in E.iter().enumerate() {
                e += w * k[j][c];
            }
            e *= h;
            let sc = opts.atol + opts.rtol * y[c].abs().max(y_next[c].abs());
            err += (e / sc) * (e / sc);
        }
        err = (err / dim as f64).sqrt();

        if err <= 1.0 {
            // Accept: store dense output.
            let mut rcont = Vec::with_capacity(dim);
            for c in 0..dim {
                let dy = y_next[c] - y[c];
                let bspl = h * k[0][c] - dy;
                let mut cont5 = 0.0;
                for (j, d) in D.iter().enumerate() {
                    cont5 += d * k[j][c];
                }
                rcont.push([y[c], dy, bspl, dy - h * k[6][c] - bspl, h * cont5]);
            }
            segments.push(DenseSegment { t0: t, h, rcont });

            let t_new = t + h;
            let g_new = event(t_new, &y_next);
            if g_prev != 0.0 && g_new.signum() != g_prev.signum() {
                // Root inside this step: bisect on the interpolant.
                let seg = segments.last().unwrap();
                let mut lo = t;
                let mut hi = t_new;
                let mut buf = vec![0.0; dim];
                let tol = 1e-12 * hi.abs().max(1.0);
                while hi - lo > tol {
                    let mid = 0.5 * (lo + hi);
                    seg.eval_into(mid, &mut buf);
                    let g_mid = event(mid, &buf);
                    if g_mid == 0.0 {
                        lo = mid;
                        hi = mid;
                    } else if g_mid.signum() == g_prev.signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let t_event = 0.5 * (lo + hi);
                let mut sol = OdeSolution {
                    segments,
                    dim,
                    t_start: t0,
                    t_end: t_new,
                    y_end: y_next.clone(),
                };
                sol.truncate_at(t_event);
                return Ok((sol, Some(t_event)));
            }
            g_prev = g_new;

            t = t_new;
            std::mem::swap(&mut y, &mut y_next);
            let (head, tail) = k.split_at_mut(6);
            head[0].copy_from_slice(&tail[0]); // FSAL
        }

        // PI-free standard controller.
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
    }

    let sol = OdeSolution { segments, dim, t_start: t0, t_end: t1, y_end: y };
    Ok((sol, None))
}

fn stage<F>(f: &F, t: f64, y: &[f64], h: f64, k: &[Vec<f64>], a_row: &[f64], c: f64, out: &mut [f64])
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let dim = y.len();
    let mut y_tmp = vec![0.0; dim];
    for comp in 0..dim {
        let mut acc = 0.0;
        for (j, a) in a_row.iter().enumerate() {
            acc += a * k[j][comp];
        }
        y_tmp[comp] = y[comp] + h * acc;
    }
    f(t + c * h, &y_tmp, out);
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exponential_growth_to_tolerance() {
        let sol = solve(|_, y, dy| dy[0] = y[0], 0.0, &[1.0], 2.0, OdeOptions::default()).unwrap();
        assert_abs_diff_eq!(sol.y_end()[0], 2f64.exp(), epsilon = 1e-8);
        // Dense output agrees in the interior too.
        for t in [0.1, 0.77, 1.5, 1.999] {
            assert_abs_diff_eq!(sol.eval(t)[0], t.exp(), epsilon = 1e-7);
        }
    }

    #[test]
    fn harmonic_oscillator_stays_on_circle() {
        let f = |_: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1];
            dy[1] = -y[0];
        };
        let sol = solve(f, 0.0, &[1.0, 0.0], 10.0, OdeOptions::default()).unwrap();
        assert_abs_diff_eq!(sol.y_end()[0], 10f64.cos(), epsilon = 1e-7);
        assert_abs_diff_eq!(sol.y_end()[1], -10f64.sin(), epsilon = 1e-7);
    }

    #[test]
    fn event_detection_finds_crossing() {
        // y = e^t crosses 5 at t = ln 5.
        let (sol, t_event) = solve_until(
            |_, y, dy| dy[0] = y[0],
            0.0,
            &[1.0],
            |_, y| y[0] - 5.0,
            10.0,
            OdeOptions::default(),
        )
        .unwrap();
        assert_abs_diff_eq!(t_event, 5f64.ln(), epsilon = 1e-9);
        assert_abs_diff_eq!(sol.y_end()[0], 5.0, epsilon = 1e-8);
        assert_abs_diff_eq!(sol.t_end(), t_event);
    }

    #[test]
    fn event_guard_errors_when_never_hit() {
        let out = solve_until(
            |_, y, dy| dy[0] = -y[0],
            0.0,
            &[1.0],
            |_, y| y[0] - 5.0,
            3.0,
            OdeOptions::default(),
        );
        assert!(out.is_err());
    }

    #[test]
    fn stiff_decay_is_just_slow_not_wrong() {
        let sol = solve(|_, y, dy| dy[0] = -50.0 * y[0], 0.0, &[1.0], 1.0, OdeOptions::default())
            .unwrap();
        assert_abs_diff_eq!(sol.y_end()[0], (-50f64).exp(), epsilon = 1e-12);
    }
}
