//! Conversion between the rescaled frame w and the physical frame u.
//!
//! The two frames differ by the pullback to the unit square and the quadratic
//! gauge phase ψ(x) = (1/4)(f₁′/f₁·x₁² + f₂′/f₂·x₂²):
//! u(x) = e^{iψ(x)}·(f₁f₂)^{−1/2}·w(x₁/f₁, x₂/f₂). In the sine basis the
//! whole conversion per axis is the overlap matrix
//! Γ(c)_{k,m} = ∫₀¹ 2 sin(kπy) sin(mπy) e^{icy²} dy with c = f′f/4.

use crate::error::Result;
use crate::evolution::WaveState;
use crate::quad::gauss_legendre;
use crate::spectrum::{Mode, Rect};
use crate::C64;

const GAUGE_QUAD_POINTS: usize = 256;

/// Γ(c), row-major n×n with index k ↔ quantum number k+1. Symmetric; Γ(0)=I.
pub fn gauge_overlap_matrix(n: usize, c: f64) -> Vec<C64> {
    let (nodes, weights) = gauss_legendre(GAUGE_QUAD_POINTS);
    // Tables of sin(kπy) and the phase at each node (y = (x+1)/2, weight/2).
    let ys: Vec<f64> = nodes.iter().map(|x| 0.5 * (x + 1.0)).collect();
    let mut sins = vec![0.0; n * GAUGE_QUAD_POINTS];
    for k in 0..n {
        for (q, y) in ys.iter().enumerate() {
            sins[k * GAUGE_QUAD_POINTS + q] = ((k + 1) as f64 * std::f64::consts::PI * y).sin();
        }
    }
    let phases: Vec<C64> = ys
        .iter()
        .zip(&weights)
        .map(|(y, w)| C64::from_polar(1.0, c * y * y) * (0.5 * w))
        .collect();
    let mut out = vec![C64::new(0.0, 0.0); n * n];
    for k in 0..n {
        for m in k..n {
            let mut acc = C64::new(0.0, 0.0);
            for q in 0..GAUGE_QUAD_POINTS {
                acc += phases[q]
                    * (2.0 * sins[k * GAUGE_QUAD_POINTS + q] * sins[m * GAUGE_QUAD_POINTS + q]);
            }
            out[k * n + m] = acc;
            out[m * n + k] = acc;
        }
    }
    out
}

/// w-frame coefficients of the physical eigenmode `mode` at gauge parameters
/// c₁ = f₁′f₁/4, c₂ = f₂′f₂/4: w = (Γ(c₁) ⊗ Γ(c₂))† e_mode.
pub fn from_physical_mode(n1: usize, n2: usize, mode: Mode, c1: f64, c2: f64) -> Result<WaveState> {
    let mut state = WaveState::zero(n1, n2);
    state.index_of(mode)?; // range check
    let g1 = gauge_overlap_matrix(n1, c1);
    let g2 = gauge_overlap_matrix(n2, c2);
    let k1 = mode.m as usize - 1;
    let k2 = mode.n as usize - 1;
    for m in 0..n1 {
        let a = g1[k1 * n1 + m].conj();
        for n in 0..n2 {
            state.coeffs[m * n2 + n] = a * g2[k2 * n2 + n].conj();
        }
    }
    Ok(state)
}

/// ⟨φ_mode(box)|u⟩ for the physical eigenmode of the instantaneous box:
/// Σ_{m,n} Γ(c₁)_{k₁,m} Γ(c₂)_{k₂,n} w_{m,n}.
pub fn physical_amplitude(state: &WaveState, mode: Mode, c1: f64, c2: f64) -> C64 {
    let (n1, n2) = (state.n1, state.n2);
    let g1 = gauge_overlap_matrix(n1, c1);
    let g2 = gauge_overlap_matrix(n2, c2);
    let k1 = mode.m as usize - 1;
    let k2 = mode.n as usize - 1;
    let mut acc = C64::new(0.0, 0.0);
    for m in 0..n1 {
        let a = g1[k1 * n1 + m];
        let mut row = C64::new(0.0, 0.0);
        for n in 0..n2 {
            row += g2[k2 * n2 + n] * state.coeffs[m * n2 + n];
        }
        acc += a * row;
    }
    acc
}

/// Sample the physical field u on a uniform `grid`×`grid` midpoint lattice of
/// (0,a)×(0,b): u(x) = e^{iψ(x)}·(ab)^{−1/2}·Σ c_{mn} 2 sin(mπx₁/a) sin(nπx₂/b),
/// with ψ = (1/4)(f1p/a·x₁² + f2p/b·x₂²). Row-major by x₁ index.
pub fn gauge_to_physical(
    state: &WaveState,
    rect: Rect,
    f1p: f64,
    f2p: f64,
    grid: usize,
) -> Vec<C64> {
    let (a, b) = (rect.a(), rect.b());
    let (n1, n2) = (state.n1, state.n2);
    let scale = 1.0 / (a * b).sqrt();
    let pi = std::f64::consts::PI;
    // sin tables on the midpoint grid.
    let s1: Vec<f64> = (0..grid)
        .flat_map(|i| {
            let y = (i as f64 + 0.5) / grid as f64;
            (1..=n1).map(move |m| (m as f64 * pi * y).sin())
        })
        .collect();
    let s2: Vec<f64> = (0..grid)
        .flat_map(|j| {
            let y = (j as f64 + 0.5) / grid as f64;
            (1..=n2).map(move |n| (n as f64 * pi * y).sin())
        })
        .collect();
    // mix[i·n2+n] = Σ_m s1[i,m]·c[m,n].
    let mut mix = vec![C64::new(0.0, 0.0); grid * n2];
    for i in 0..grid {
        for m in 0..n1 {
            let sm = s1[i * n1 + m];
            if sm == 0.0 {
                continue;
            }
            let row = &state.coeffs[m * n2..(m + 1) * n2];
            let out = &mut mix[i * n2..(i + 1) * n2];
            for (o, c) in out.iter_mut().zip(row) {
                *o += sm * c;
            }
        }
    }
    let mut field = vec![C64::new(0.0, 0.0); grid * grid];
    for i in 0..grid {
        let x1 = (i as f64 + 0.5) * a / grid as f64;
        for j in 0..grid {
            let x2 = (j as f64 + 0.5) * b / grid as f64;
            let mut acc = C64::new(0.0, 0.0);
            for n in 0..n2 {
                acc += mix[i * n2 + n] * s2[j * n2 + n];
            }
            let psi = 0.25 * (f1p / a * x1 * x1 + f2p / b * x2 * x2);
            field[i * grid + j] = C64::from_polar(2.0 * scale, psi) * acc;
        }
    }
    field
}

/// Grid L² norm of a sampled field on (0,a)×(0,b) (midpoint rule).
pub fn grid_norm(field: &[C64], rect: Rect, grid: usize) -> f64 {
    let cell = rect.a() * rect.b() / (grid * grid) as f64;
    (field.iter().map(|u| u.norm_sqr()).sum::<f64>() * cell).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_gauge_is_the_identity() {
        let n = 8;
        let g = gauge_overlap_matrix(n, 0.0);
        for k in 0..n {
            for m in 0..n {
                let expect = if k == m { 1.0 } else { 0.0 };
                assert!((g[k * n + m] - C64::new(expect, 0.0)).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn overlap_matrix_is_nearly_unitary_for_small_gauge() {
        let n = 16;
        let c = 0.3;
        let g = gauge_overlap_matrix(n, c);
        // Rows of the infinite matrix are orthonormal; truncation leaves
        // tails of size O(c/n²).
        for k in 0..4 {
            let mut norm = 0.0;
            for m in 0..n {
                norm += g[k * n + m].norm_sqr();
            }
            assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn physical_round_trip_recovers_the_mode() {
        let mode = Mode::new(2, 1).unwrap();
        let (c1, c2) = (-0.12, 0.07);
        let state = from_physical_mode(12, 12, mode, c1, c2).unwrap();
        let amp = physical_amplitude(&state, mode, c1, c2);
        // The defect is the Γ tail cut off by the truncation, a few 1e-8 at
        // this gauge strength and mode count.
        assert!((amp - C64::new(1.0, 0.0)).norm() < 1e-7, "round trip amp {amp}");
        // A different physical mode is orthogonal.
        let other = physical_amplitude(&state, Mode::new(1, 2).unwrap(), c1, c2);
        assert!(other.norm() < 1e-7);
    }

    #[test]
    fn static_pure_mode_sampled_field_matches_closed_form() {
        let rect = Rect::new(1.5, 0.8).unwrap();
        let mode = Mode::new(2, 3).unwrap();
        let state = WaveState::from_mode(5, 5, mode).unwrap();
        let grid = 32;
        let field = gauge_to_physical(&state, rect, 0.0, 0.0, grid);
        let pi = std::f64::consts::PI;
        for i in 0..grid {
            let x1 = (i as f64 + 0.5) * rect.a() / grid as f64;
            for j in 0..grid {
                let x2 = (j as f64 + 0.5) * rect.b() / grid as f64;
                let expect = (4.0 / (rect.a() * rect.b())).sqrt()
                    * (2.0 * pi * x1 / rect.a()).sin()
                    * (3.0 * pi * x2 / rect.b()).sin();
                assert!((field[i * grid + j] - C64::new(expect, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn sampled_norm_is_close_to_one() {
        let rect = Rect::new(1.2, 1.0).unwrap();
        let state = WaveState::from_mode(6, 6, Mode::new(1, 1).unwrap()).unwrap();
        let field = gauge_to_physical(&state, rect, 0.0, 0.0, 256);
        assert_abs_diff_eq!(grid_norm(&field, rect, 256), 1.0, epsilon = 1e-4);
    }

    #[test]
    fn modulus_ignores_the_gauge_velocity() {
        let rect = Rect::new(1.0, 1.0).unwrap();
        let mut state = WaveState::zero(4, 4);
        state.coeffs[0] = C64::new(0.8, 0.0);
        state.coeffs[5] = C64::new(0.0, 0.6);
        let still = gauge_to_physical(&state, rect, 0.0, 0.0, 16);
        let moving = gauge_to_physical(&state, rect, 0.7, -0.4, 16);
        for (u, v) in still.iter().zip(&moving) {
            assert_abs_diff_eq!(u.norm(), v.norm(), epsilon = 1e-13);
        }
    }
}
