//! Boundary functionals of wall deformations at a spectral degeneracy.
//!
//! At a resonance rectangle two eigenvalues collide, and which deformations
//! can steer the colliding pair is decided by the boundary functionals
//! I_g(k, l) = ∮ (∂φ_k/∂ν)(∂φ_l/∂ν)(g·ν) ds over a family of deformation
//! fields g. This module evaluates them both by quadrature and in closed
//! form, and checks that the family spans all three steering directions
//! (two level shifts and one coupling), i.e. that the 3×4 matrix over the
//! first four fields has full row rank.

use nalgebra::DMatrix;

use crate::error::{BoxError, Result};
use crate::quad::gauss_legendre;
use crate::spectrum::{mode_energy, resonance_length, Mode, Rect};

const EDGE_QUAD_POINTS: usize = 128;

/// One side of the rectangle, with the outer normal implied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    /// x₁ = 0, ν = (−1, 0); arclength parameter s = x₂ ∈ [0, b].
    Left,
    /// x₁ = a, ν = (1, 0); s = x₂.
    Right,
    /// x₂ = 0, ν = (0, −1); s = x₁ ∈ [0, a].
    Bottom,
    /// x₂ = b, ν = (0, 1); s = x₁.
    Top,
}

impl Edge {
    pub const ALL: [Edge; 4] = [Edge::Left, Edge::Right, Edge::Bottom, Edge::Top];

    /// Arclength of the edge.
    fn length(&self, rect: Rect) -> f64 {
        match self {
            Edge::Left | Edge::Right => rect.b(),
            Edge::Bottom | Edge::Top => rect.a(),
        }
    }

    /// Point on the edge at arclength coordinate `s`.
    fn point(&self, rect: Rect, s: f64) -> (f64, f64) {
        match self {
            Edge::Left => (0.0, s),
            Edge::Right => (rect.a(), s),
            Edge::Bottom => (s, 0.0),
            Edge::Top => (s, rect.b()),
        }
    }

    fn normal(&self) -> (f64, f64) {
        match self {
            Edge::Left => (-1.0, 0.0),
            Edge::Right => (1.0, 0.0),
            Edge::Bottom => (0.0, -1.0),
            Edge::Top => (0.0, 1.0),
        }
    }
}

/// Outward normal derivative of the L²-normalized eigenfunction
/// φ(x) = (2/√(ab)) sin(k₁πx₁/a) sin(k₂πx₂/b) on the given edge at
/// arclength coordinate `s`.
pub fn normal_derivative(mode: Mode, rect: Rect, edge: Edge, s: f64) -> f64 {
    let (a, b) = (rect.a(), rect.b());
    let pi = std::f64::consts::PI;
    let (k1, k2) = (mode.m as f64, mode.n as f64);
    let norm = 2.0 / (a * b).sqrt();
    let sign = |k: u32| if k % 2 == 0 { 1.0 } else { -1.0 };
    match edge {
        Edge::Left => -norm * (k1 * pi / a) * (k2 * pi * s / b).sin(),
        Edge::Right => norm * (k1 * pi / a) * sign(mode.m) * (k2 * pi * s / b).sin(),
        Edge::Bottom => -norm * (k2 * pi / b) * (k1 * pi * s / a).sin(),
        Edge::Top => norm * (k2 * pi / b) * sign(mode.n) * (k1 * pi * s / a).sin(),
    }
}

/// The five deformation fields, normalized to unit wall speed.
///
/// The first two are uniform stretches of one side; the last three reshape
/// the moving right wall with a linear, parabolic, and quadratic profile in
/// x₂. All five vanish on the left wall, and only the stretches move the
/// horizontal walls.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeformationField {
    /// g₁ = (x₁/a, 0): stretch the horizontal side.
    Stretch1,
    /// g₂ = (0, x₂/b): stretch the vertical side.
    Stretch2,
    /// g₃ = ((x₂/b − 1/2)·x₁/a, 0): tilt the right wall about its midpoint.
    Tilt,
    /// g₄ = ((x₂/b)(1 − x₂/b)·x₁/a, 0): bulge the right wall outward.
    Bulge,
    /// g₅ = ((x₂/b)²·x₁/a, 0): push the right wall with a squared profile.
    Square,
}

impl DeformationField {
    pub const ALL: [DeformationField; 5] = [
        DeformationField::Stretch1,
        DeformationField::Stretch2,
        DeformationField::Tilt,
        DeformationField::Bulge,
        DeformationField::Square,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            DeformationField::Stretch1 => "g1",
            DeformationField::Stretch2 => "g2",
            DeformationField::Tilt => "g3",
            DeformationField::Bulge => "g4",
            DeformationField::Square => "g5",
        }
    }

    /// Vector value at an interior or boundary point.
    pub fn value(&self, x1: f64, x2: f64, rect: Rect) -> (f64, f64) {
        let (a, b) = (rect.a(), rect.b());
        match self {
            DeformationField::Stretch1 => (x1 / a, 0.0),
            DeformationField::Stretch2 => (0.0, x2 / b),
            DeformationField::Tilt => ((x2 / b - 0.5) * x1 / a, 0.0),
            DeformationField::Bulge => ((x2 / b) * (1.0 - x2 / b) * x1 / a, 0.0),
            DeformationField::Square => ((x2 / b) * (x2 / b) * x1 / a, 0.0),
        }
    }
}

/// I_g(k, l) by Gauss–Legendre quadrature over all four edges.
pub fn boundary_functional(k: Mode, l: Mode, rect: Rect, field: DeformationField) -> f64 {
    boundary_functional_with_points(k, l, rect, field, EDGE_QUAD_POINTS)
}

/// Same, with an explicit node count per edge (for convergence checks).
pub fn boundary_functional_with_points(
    k: Mode,
    l: Mode,
    rect: Rect,
    field: DeformationField,
    points: usize,
) -> f64 {
    let (nodes, weights) = gauss_legendre(points);
    let mut total = 0.0;
    for edge in Edge::ALL {
        let len = edge.length(rect);
        let (nu1, nu2) = edge.normal();
        let mut acc = 0.0;
        for (x, w) in nodes.iter().zip(&weights) {
            let s = 0.5 * len * (x + 1.0);
            let (p1, p2) = edge.point(rect, s);
            let (g1, g2) = field.value(p1, p2, rect);
            let gnu = g1 * nu1 + g2 * nu2;
            if gnu == 0.0 {
                continue;
            }
            acc += w * normal_derivative(k, rect, edge, s) * normal_derivative(l, rect, edge, s) * gnu;
        }
        total += 0.5 * len * acc;
    }
    total
}

/// Exact value of I_g(k, l) for the five fields.
///
/// Only the stretched or reshaped wall contributes, and the x₂ integral
/// reduces to moments of sin(k₂πy)sin(l₂πy) against 1, y, and y², giving
/// parity selection rules: the tilt couples only opposite-parity k₂, l₂, the
/// bulge only equal-parity ones, and the squared profile all pairs.
pub fn closed_form(k: Mode, l: Mode, rect: Rect, field: DeformationField) -> f64 {
    let (a, b) = (rect.a(), rect.b());
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    let (k1, k2) = (k.m as f64, k.n as f64);
    let (l1, l2) = (l.m as f64, l.n as f64);
    let sign1 = if (k.m + l.m) % 2 == 0 { 1.0 } else { -1.0 };
    let sign2 = if (k.n + l.n) % 2 == 0 { 1.0 } else { -1.0 };
    // Cross moment 16k₁l₁k₂l₂/(a³(k₂²−l₂²)²), shared by the reshaping fields.
    let cross = if k.n != l.n {
        16.0 * k1 * l1 * k2 * l2 / (a.powi(3) * (k2 * k2 - l2 * l2).powi(2))
    } else {
        0.0
    };
    match field {
        DeformationField::Stretch1 => {
            if k.n == l.n {
                2.0 * pi2 * k1 * l1 * sign1 / a.powi(3)
            } else {
                0.0
            }
        }
        DeformationField::Stretch2 => {
            if k.m == l.m {
                2.0 * pi2 * k2 * l2 * sign2 / b.powi(3)
            } else {
                0.0
            }
        }
        DeformationField::Tilt => {
            if k.n == l.n || sign2 > 0.0 {
                0.0
            } else {
                -sign1 * cross
            }
        }
        DeformationField::Bulge => {
            if k.n == l.n {
                sign1 * k1 * l1 * (k2 * l2 * pi2 + 3.0) / (3.0 * a.powi(3) * k2 * l2)
            } else if sign2 > 0.0 {
                -sign1 * cross
            } else {
                0.0
            }
        }
        DeformationField::Square => {
            if k.n == l.n {
                sign1 * k1 * l1 * (2.0 * k2 * l2 * pi2 - 3.0) / (3.0 * a.powi(3) * k2 * l2)
            } else {
                sign1 * sign2 * cross
            }
        }
    }
}

/// The verified functional table at a resonance rectangle.
pub struct Sah2Report {
    pub rect: Rect,
    pub pair: (Mode, Mode),
    /// Rows (k,k), (l,l), (k,l); columns g₁…g₅; by quadrature.
    pub numeric: [[f64; 5]; 3],
    /// Same table in closed form.
    pub closed: [[f64; 5]; 3],
    /// max |numeric − closed| / (1 + |closed|) over the fifteen entries.
    pub max_mismatch: f64,
    /// Row rank of the 3×4 block over g₁…g₄.
    pub rank: usize,
    pub singular_values: Vec<f64>,
    /// k₁²l₂² ≠ l₁²k₂², the independence of the two stretch responses.
    pub stretch_independent: bool,
}

/// Build and verify the functional table for the pair (k, l) at their
/// resonance rectangle with vertical side `b`. Errors when the pair has no
/// resonance or when the two modes coincide.
pub fn verify_table(k: Mode, l: Mode, b: f64) -> Result<Sah2Report> {
    if k == l {
        return Err(BoxError::InvalidParameter(
            "the functional table needs two distinct modes".to_string(),
        ));
    }
    let a = resonance_length(k, l, b).ok_or_else(|| {
        BoxError::InvalidParameter(format!(
            "modes ({},{}) and ({},{}) have no resonance rectangle",
            k.m, k.n, l.m, l.n
        ))
    })?;
    let rect = Rect::new(a, b)?;
    debug_assert!(
        (mode_energy(rect, k) - mode_energy(rect, l)).abs()
            <= 1e-10 * mode_energy(rect, k).abs(),
        "resonance length does not degenerate the pair"
    );

    let pairs = [(k, k), (l, l), (k, l)];
    let mut numeric = [[0.0; 5]; 3];
    let mut closed = [[0.0; 5]; 3];
    let mut max_mismatch = 0.0f64;
    for (row, &(p, q)) in pairs.iter().enumerate() {
        for (col, field) in DeformationField::ALL.into_iter().enumerate() {
            let n = boundary_functional(p, q, rect, field);
            let c = closed_form(p, q, rect, field);
            numeric[row][col] = n;
            closed[row][col] = c;
            max_mismatch = max_mismatch.max((n - c).abs() / (1.0 + c.abs()));
        }
    }

    let block = DMatrix::from_fn(3, 4, |i, j| numeric[i][j]);
    let svd = block.svd(false, false);
    let mut singular_values: Vec<f64> = svd.singular_values.iter().copied().collect();
    singular_values.sort_by(|x, y| y.total_cmp(x));
    let threshold = 1e-8 * singular_values[0];
    let rank = singular_values.iter().filter(|&&s| s > threshold).count();

    let stretch_independent = k.m * k.m * l.n * l.n != l.m * l.m * k.n * k.n;

    Ok(Sah2Report {
        rect,
        pair: (k, l),
        numeric,
        closed,
        max_mismatch,
        rank,
        singular_values,
        stretch_independent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn normal_derivative_matches_a_one_sided_stencil() {
        let rect = Rect::new(1.7, 0.9).unwrap();
        let mode = Mode::new(3, 2).unwrap();
        let phi = |x1: f64, x2: f64| {
            let pi = std::f64::consts::PI;
            2.0 / (rect.a() * rect.b()).sqrt()
                * (3.0 * pi * x1 / rect.a()).sin()
                * (2.0 * pi * x2 / rect.b()).sin()
        };
        let h = 1e-5;
        for edge in Edge::ALL {
            for frac in [0.2, 0.55, 0.8] {
                let s = frac * edge.length(rect);
                let (x1, x2) = edge.point(rect, s);
                let (nu1, nu2) = edge.normal();
                // φ vanishes on the wall, so a second-order one-sided stencil
                // along −ν needs only two interior samples.
                let psi1 = phi(x1 - h * nu1, x2 - h * nu2);
                let psi2 = phi(x1 - 2.0 * h * nu1, x2 - 2.0 * h * nu2);
                let fd = (psi2 - 4.0 * psi1) / (2.0 * h);
                let exact = normal_derivative(mode, rect, edge, s);
                assert_abs_diff_eq!(fd, exact, epsilon = 1e-6 * exact.abs().max(1.0));
            }
        }
    }

    #[test]
    fn quadrature_matches_closed_forms_for_all_small_pairs() {
        let rect = Rect::new(1.37, 0.81).unwrap();
        for km in 1..=4u32 {
            for kn in 1..=4u32 {
                for lm in 1..=4u32 {
                    for ln in 1..=4u32 {
                        let k = Mode::new(km, kn).unwrap();
                        let l = Mode::new(lm, ln).unwrap();
                        for field in DeformationField::ALL {
                            let n = boundary_functional(k, l, rect, field);
                            let c = closed_form(k, l, rect, field);
                            assert!(
                                (n - c).abs() <= 1e-10 * (1.0 + c.abs()),
                                "{} at ({km},{kn}),({lm},{ln}): quad {n} closed {c}",
                                field.label()
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn doubling_the_nodes_does_not_move_the_functionals() {
        let k = Mode::new(3, 1).unwrap();
        let l = Mode::new(1, 2).unwrap();
        let rect = Rect::new((8.0f64 / 3.0).sqrt(), 1.0).unwrap();
        for field in DeformationField::ALL {
            for (p, q) in [(k, k), (l, l), (k, l)] {
                let coarse = boundary_functional_with_points(p, q, rect, field, 128);
                let fine = boundary_functional_with_points(p, q, rect, field, 256);
                assert!(
                    (coarse - fine).abs() < 1e-10,
                    "{} moved by {}",
                    field.label(),
                    (coarse - fine).abs()
                );
            }
        }
    }

    #[test]
    fn verified_table_at_the_reference_resonance() {
        let k = Mode::new(3, 1).unwrap();
        let l = Mode::new(1, 2).unwrap();
        let report = verify_table(k, l, 1.0).unwrap();
        assert_abs_diff_eq!(report.rect.a() * report.rect.a(), 8.0 / 3.0, epsilon = 1e-12);
        assert!(report.max_mismatch < 1e-8, "mismatch {}", report.max_mismatch);
        assert_eq!(report.rank, 3);
        assert!(report.stretch_independent);
        // The tilt column vanishes on the diagonal and couples the pair.
        assert_abs_diff_eq!(report.closed[0][2], 0.0);
        assert_abs_diff_eq!(report.closed[1][2], 0.0);
        assert!(report.closed[2][2].abs() > 1.0);
    }

    #[test]
    fn another_resonance_pair_also_has_full_rank() {
        let k = Mode::new(5, 1).unwrap();
        let l = Mode::new(2, 3).unwrap();
        let report = verify_table(k, l, 1.0).unwrap();
        assert_abs_diff_eq!(report.rect.a() * report.rect.a(), 21.0 / 8.0, epsilon = 1e-12);
        assert_eq!(report.rank, 3);
        assert!(report.max_mismatch < 1e-8);
    }

    #[test]
    fn pairs_without_a_resonance_are_rejected() {
        let k = Mode::new(1, 1).unwrap();
        let l = Mode::new(2, 2).unwrap();
        assert!(verify_table(k, l, 1.0).is_err());
        assert!(verify_table(k, k, 1.0).is_err());
    }
}
