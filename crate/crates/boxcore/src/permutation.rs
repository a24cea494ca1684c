//! The pump-cycle rank permutation and its statistics.
//!
//! One compression/expansion cycle between boxes (a,b) and (ã,b), quantum
//! numbers frozen on the way in and energy rank frozen on the way out, sends the
//! k-th state of the a-box to the state whose quantum numbers it kept, looked
//! up by rank in the ã-box: σ(k) = k̃(m(k), n(k)). Iterating σ drives states
//! up (or down) the spectrum; this module tabulates σ, follows orbits, finds
//! the periodic ones, and measures the mean log-rank production
//! δE(K) = (1/K) Σ_{k≤K} (ln σ(k) − ln k), which for large K approaches
//! (2/π)∫₀^{π/2} ln((a/ã)cos²θ + (ã/a)sin²θ) dθ = 2·ln((√r + 1/√r)/2), r = a/ã.

use crate::error::{BoxError, Result};
use crate::quad;
use crate::spectrum::{build_index, build_index_to_energy, mode_energy, Mode, Rect};
use std::f64::consts::{FRAC_PI_2, PI};

/// Tie tolerance used for the underlying spectral orderings.
const TIE_TOL: f64 = 1e-12;

/// σ tabulated on 1..=K with a certification bound.
///
/// `valid_to` is the largest argument with a certified image: both the domain
/// rank (in the a-box) and the image rank (in the ã-box) are backed by
/// complete enumerations. By construction the whole table is certified, so
/// `valid_to == len`, but consumers must still treat images above `valid_to`
/// as uncharted when composing σ with itself.
#[derive(Debug)]
pub struct SigmaTable {
    a: f64,
    a_tilde: f64,
    b: f64,
    /// sigma[k] for k in 1..=K; index 0 unused.
    sigma: Vec<u32>,
    /// Quantum numbers of rank k in the a-box, for reporting.
    modes: Vec<Mode>,
    valid_to: usize,
}

impl SigmaTable {
    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn a_tilde(&self) -> f64 {
        self.a_tilde
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Table size K.
    pub fn len(&self) -> usize {
        self.sigma.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Largest certified argument.
    pub fn valid_to(&self) -> usize {
        self.valid_to
    }

    /// σ(k); panics outside 1..=len.
    pub fn sigma(&self, k: usize) -> usize {
        assert!(k >= 1 && k <= self.len(), "rank {k} outside table");
        self.sigma[k] as usize
    }

    /// Quantum numbers of a-box rank k.
    pub fn mode(&self, k: usize) -> Mode {
        self.modes[k - 1]
    }

    /// Assemble a table directly from raw columns (used by the CLI to reload
    /// saved tables). `sigma[i]` is σ(i+1).
    pub fn from_raw(a: f64, a_tilde: f64, b: f64, modes: Vec<Mode>, sigma: Vec<u32>) -> Result<Self> {
        if modes.len() != sigma.len() || sigma.is_empty() {
            return Err(BoxError::InvalidParameter(
                "sigma table needs equal-length, non-empty mode and image columns".into(),
            ));
        }
        let valid_to = sigma.len();
        let mut col = Vec::with_capacity(sigma.len() + 1);
        col.push(0);
        col.extend_from_slice(&sigma);
        Ok(SigmaTable { a, a_tilde, b, sigma: col, modes, valid_to })
    }
}

/// Tabulate σ(k) for k ≤ K between boxes (a, 1) and (ã, 1).
///
/// Fails if either energy ordering has a tie (within relative 10⁻¹²) among
/// the ranks the table touches: a tied rank makes σ ill-defined there.
pub fn build_sigma(a: f64, a_tilde: f64, k_table: usize) -> Result<SigmaTable> {
    build_sigma_rect(a, a_tilde, 1.0, k_table)
}

/// Tabulate σ with an explicit common second side `b`.
pub fn build_sigma_rect(a: f64, a_tilde: f64, b: f64, k_table: usize) -> Result<SigmaTable> {
    if k_table < 1 {
        return Err(BoxError::InvalidParameter("table size must be ≥ 1".into()));
    }
    let rect_a = Rect::new(a, b)?;
    let rect_t = Rect::new(a_tilde, b)?;
    let index_a = build_index(rect_a, k_table, TIE_TOL);
    if let Some((r, s)) = index_a.has_tie_below(k_table) {
        return Err(BoxError::DegenerateRanks(r, s));
    }
    // The image box must be enumerated past the largest image energy.
    let mut e_image_max = 0.0f64;
    for (_, mode, _) in index_a.iter().take(k_table) {
        e_image_max = e_image_max.max(mode_energy(rect_t, mode));
    }
    let index_t = build_index_to_energy(rect_t, e_image_max * (1.0 + 1e-12) + 1.0, TIE_TOL);
    let mut sigma = Vec::with_capacity(k_table + 1);
    let mut modes = Vec::with_capacity(k_table);
    sigma.push(0u32);
    let mut image_max_rank = 0usize;
    for (_, mode, _) in index_a.iter().take(k_table) {
        let image = index_t
            .rank_of(mode)
            .expect("image enumeration covers every image energy by construction");
        image_max_rank = image_max_rank.max(image);
        sigma.push(image as u32);
        modes.push(mode);
    }
    if let Some((r, s)) = index_t.has_tie_below(image_max_rank) {
        return Err(BoxError::DegenerateRanks(r, s));
    }
    debug_assert_eq!(sigma[1], 1, "ground state must stay rank 1");
    Ok(SigmaTable { a, a_tilde, b, sigma, modes, valid_to: k_table })
}

/// How following an orbit ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrbitStatus {
    /// The next image exceeds the certified table; growth beyond bookkeeping.
    Escaped,
    /// The orbit returned to its start after `period` steps.
    Periodic { period: usize },
    /// The step budget ran out with the orbit still inside the table.
    Exhausted,
}

/// An orbit of σ started at a given rank.
#[derive(Debug, Clone)]
pub struct OrbitRecord {
    pub start: usize,
    /// Visited ranks, starting with `start`; for periodic orbits the closing
    /// repeat of `start` is not included.
    pub trajectory: Vec<usize>,
    pub status: OrbitStatus,
}

impl OrbitRecord {
    /// Least-squares slope of ln(rank) against step index, an empirical
    /// growth rate; meaningful mainly for escaped orbits.
    pub fn log_growth_rate(&self) -> f64 {
        let n = self.trajectory.len();
        if n < 2 {
            return 0.0;
        }
        let xs: Vec<f64> = (0..n).map(|j| j as f64).collect();
        let ys: Vec<f64> = self.trajectory.iter().map(|&r| (r as f64).ln()).collect();
        let xm = xs.iter().sum::<f64>() / n as f64;
        let ym = ys.iter().sum::<f64>() / n as f64;
        let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
        let den: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
        num / den
    }
}

/// Apply σ repeatedly from `start` until the orbit loops, escapes the
/// certified range, or spends `max_steps` applications.
pub fn iterate_orbit(table: &SigmaTable, start: usize, max_steps: usize) -> OrbitRecord {
    assert!(
        start >= 1 && start <= table.valid_to(),
        "orbit start {start} outside certified range 1..={}",
        table.valid_to()
    );
    let mut trajectory = vec![start];
    let mut current = start;
    for _ in 0..max_steps {
        let next = table.sigma(current);
        if next == start {
            let period = trajectory.len();
            return OrbitRecord { start, trajectory, status: OrbitStatus::Periodic { period } };
        }
        if next > table.valid_to() {
            trajectory.push(next);
            return OrbitRecord { start, trajectory, status: OrbitStatus::Escaped };
        }
        trajectory.push(next);
        current = next;
    }
    OrbitRecord { start, trajectory, status: OrbitStatus::Exhausted }
}

/// All distinct periodic orbits with start ≤ `start_max` and period ≤
/// `period_max`, each reported once, rotated so the smallest rank leads.
///
/// An orbit that climbs above the certified range within the period budget is
/// treated as not periodic at this table size.
pub fn find_periodic_orbits(
    table: &SigmaTable,
    start_max: usize,
    period_max: usize,
) -> Vec<Vec<usize>> {
    assert!(start_max <= table.valid_to(), "start_max exceeds certified range");
    let mut cycles: Vec<Vec<usize>> = Vec::new();
    let mut seen_min = std::collections::HashSet::new();
    for start in 1..=start_max {
        let rec = iterate_orbit(table, start, period_max);
        if let OrbitStatus::Periodic { .. } = rec.status {
            let min = *rec.trajectory.iter().min().unwrap();
            if seen_min.insert(min) {
                let pos = rec.trajectory.iter().position(|&r| r == min).unwrap();
                let mut cycle = rec.trajectory[pos..].to_vec();
                cycle.extend_from_slice(&rec.trajectory[..pos]);
                cycles.push(cycle);
            }
        }
    }
    cycles.sort_by_key(|c| c[0]);
    cycles
}

/// δE(K) = (1/K) Σ_{k=1}^{K} (ln σ(k) − ln k).
pub fn mean_entropy_increase(table: &SigmaTable, k_upper: usize) -> f64 {
    assert!(
        k_upper >= 1 && k_upper <= table.valid_to(),
        "K outside certified range"
    );
    let mut sum = 0.0;
    for k in 1..=k_upper {
        sum += (table.sigma(k) as f64).ln() - (k as f64).ln();
    }
    sum / k_upper as f64
}

/// The large-K limit of δE: quadrature value and closed form side by side.
#[derive(Debug, Clone, Copy)]
pub struct EntropyIntegral {
    /// (2/π) ∫₀^{π/2} ln((a/ã)cos²θ + (ã/a)sin²θ) dθ by adaptive quadrature.
    pub quadrature: f64,
    /// 2·ln((√r + 1/√r)/2) with r = a/ã.
    pub closed_form: f64,
}

/// Predicted mean entropy production per cycle for the box pair (a, ã).
///
/// Depends only on r = a/ã and is invariant under r → 1/r; strictly positive
/// for r ≠ 1 by strict concavity of the logarithm.
pub fn entropy_integral(a: f64, a_tilde: f64) -> EntropyIntegral {
    assert!(a > 0.0 && a_tilde > 0.0, "side lengths must be positive");
    let r = a / a_tilde;
    let f = move |theta: f64| {
        let c = theta.cos();
        let s = theta.sin();
        (r * c * c + s * s / r).ln()
    };
    let quadrature = 2.0 / PI * quad::integrate_adaptive(&f, 0.0, FRAC_PI_2, 1e-12);
    let closed_form = 2.0 * ((r.sqrt() + 1.0 / r.sqrt()) / 2.0).ln();
    EntropyIntegral { quadrature, closed_form }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_when_boxes_match() {
        let t = build_sigma(1.3, 1.3, 200).unwrap();
        for k in 1..=200 {
            assert_eq!(t.sigma(k), k);
        }
        assert_abs_diff_eq!(mean_entropy_increase(&t, 200), 0.0);
    }

    #[test]
    fn ground_state_is_fixed() {
        let t = build_sigma(FRAC_PI_2, FRAC_PI_2 / 3.0, 50).unwrap();
        assert_eq!(t.sigma(1), 1);
    }

    /// Independent brute-force oracle: enumerate both spectra wide, sort,
    /// compose the rank maps directly.
    fn brute_sigma(a: f64, a_tilde: f64, k_table: usize) -> Vec<usize> {
        let enumerate = |side: f64, count: usize| {
            let mut v: Vec<(f64, u32, u32)> = Vec::new();
            let bound = 40 * count; // generous overshoot, then sort and trim
            let m_max = (3.0 * (bound as f64).sqrt() * side).ceil() as u32 + 4;
            let n_max = (3.0 * (bound as f64).sqrt()).ceil() as u32 + 4;
            for m in 1..=m_max {
                for n in 1..=n_max {
                    let e = PI * PI * ((m * m) as f64 / (side * side) + (n * n) as f64);
                    v.push((e, m, n));
                }
            }
            v.sort_by(|x, y| x.partial_cmp(y).unwrap());
            v
        };
        let list_a = enumerate(a, k_table);
        let list_t = enumerate(a_tilde, k_table);
        let rank_t: std::collections::HashMap<(u32, u32), usize> = list_t
            .iter()
            .enumerate()
            .map(|(i, &(_, m, n))| ((m, n), i + 1))
            .collect();
        (0..k_table)
            .map(|i| rank_t[&(list_a[i].1, list_a[i].2)])
            .collect()
    }

    #[test]
    fn matches_brute_force_composition_for_small_k() {
        let (a, at) = (FRAC_PI_2, FRAC_PI_2 / 3.0);
        let table = build_sigma(a, at, 200).unwrap();
        let brute = brute_sigma(a, at, 200);
        for k in 1..=200 {
            assert_eq!(table.sigma(k), brute[k - 1], "σ({k})");
        }
    }

    #[test]
    fn first_images_of_the_standard_pair() {
        // Frozen from the brute-force oracle at a = π/2, ã = a/3:
        // σ(k) for k = 1..=12, and the hand-checkable σ(19) = 35
        // (rank 19 is (5,3); exactly 35 modes of the ã-box lie at or
        // below its ã-energy 100·9 + 9π²).
        let table = build_sigma(FRAC_PI_2, FRAC_PI_2 / 3.0, 40).unwrap();
        let expect = [1usize, 4, 2, 10, 5, 19, 11, 3, 20, 7, 30, 14];
        for (k, want) in expect.iter().enumerate() {
            assert_eq!(table.sigma(k + 1), *want, "σ({})", k + 1);
        }
        assert_eq!(table.mode(19), Mode::new(5, 3).unwrap());
        assert_eq!(table.sigma(19), 35);
    }

    #[test]
    fn composition_with_reverse_table_is_identity() {
        let fwd = build_sigma(FRAC_PI_2, FRAC_PI_2 / 3.0, 3000).unwrap();
        let rev = build_sigma(FRAC_PI_2 / 3.0, FRAC_PI_2, 3000).unwrap();
        for k in 1..=3000 {
            let img = fwd.sigma(k);
            if img <= rev.valid_to() {
                assert_eq!(rev.sigma(img), k, "σ̃(σ({k}))");
            }
        }
    }

    #[test]
    fn reciprocal_box_swaps_quantum_numbers() {
        // ã = 1/a with b = 1: energies swap roles, so σ maps rank(m,n) to
        // rank(n,m) and σ² = id.
        let a = FRAC_PI_2;
        let table = build_sigma(a, 1.0 / a, 4000).unwrap();
        let idx = build_index(Rect::new(a, 1.0).unwrap(), 5000, TIE_TOL);
        for k in 1..=4000usize {
            let swapped = table.mode(k).transposed();
            if let Some(r) = idx.rank_of(swapped) {
                assert_eq!(table.sigma(k), r, "σ at rank {k}");
            }
            let img = table.sigma(k);
            if img <= table.valid_to() {
                assert_eq!(table.sigma(img), k, "involution at rank {k}");
            }
        }
    }

    #[test]
    fn orbit_statuses() {
        let table = build_sigma(FRAC_PI_2, FRAC_PI_2 / 3.0, 5000).unwrap();
        let fixed = iterate_orbit(&table, 1, 10);
        assert_eq!(fixed.status, OrbitStatus::Periodic { period: 1 });
        // Rank 5 is a fixed point of this pair (frozen from the oracle).
        assert_eq!(iterate_orbit(&table, 5, 10).status, OrbitStatus::Periodic { period: 1 });
        // Ranks 43 and 136 swap (frozen from the oracle).
        let swap = iterate_orbit(&table, 43, 10);
        assert_eq!(swap.status, OrbitStatus::Periodic { period: 2 });
        assert_eq!(swap.trajectory, vec![43, 136]);
        // A budget of zero steps exhausts immediately.
        assert_eq!(iterate_orbit(&table, 2, 0).status, OrbitStatus::Exhausted);
        // Escape: σ(6) = 19 leaves a table truncated at K = 8.
        let tiny = build_sigma(FRAC_PI_2, FRAC_PI_2 / 3.0, 8).unwrap();
        let esc = iterate_orbit(&tiny, 6, 10);
        assert_eq!(esc.status, OrbitStatus::Escaped);
        assert_eq!(esc.trajectory, vec![6, 19]);
    }

    #[test]
    fn small_cycles_of_the_standard_pair() {
        // Frozen from the brute-force oracle: within start ≤ 300 and period
        // ≤ 30 at table size 10⁴, the cycles led by their smallest element.
        let table = build_sigma(FRAC_PI_2, FRAC_PI_2 / 3.0, 10_000).unwrap();
        let cycles = find_periodic_orbits(&table, 300, 30);
        assert!(cycles.contains(&vec![1]));
        assert!(cycles.contains(&vec![5]));
        assert!(cycles.contains(&vec![43, 136]));
        assert!(cycles
            .contains(&vec![215, 637, 236, 401, 1146, 381, 538, 1594, 856, 743, 252, 759, 1579, 806, 593, 522, 1045, 628]));
    }

    #[test]
    fn entropy_integral_matches_closed_form() {
        for r in [1.1, 2.0, 3.0, 10.0] {
            let e = entropy_integral(r, 1.0);
            assert_abs_diff_eq!(e.quadrature, e.closed_form, epsilon = 1e-10);
            // Invariant under r → 1/r.
            let inv = entropy_integral(1.0, r);
            assert_abs_diff_eq!(e.closed_form, inv.closed_form, epsilon = 1e-14);
            assert!(e.closed_form > 0.0);
        }
        let unit = entropy_integral(2.5, 2.5);
        assert_abs_diff_eq!(unit.quadrature, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(unit.closed_form, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn entropy_integral_value_at_ratio_three() {
        let e = entropy_integral(3.0, 1.0);
        assert_abs_diff_eq!(e.closed_form, 0.287682072451781, epsilon = 1e-12);
    }

    #[test]
    fn mean_entropy_statistics_of_the_standard_pair() {
        // Frozen from the oracle: δE(10³) for a = π/2, ã = a/3.
        let table = build_sigma(FRAC_PI_2, FRAC_PI_2 / 3.0, 1000).unwrap();
        let de = mean_entropy_increase(&table, 1000);
        assert_abs_diff_eq!(de, 0.294775, epsilon = 5e-6);
    }

    #[test]
    fn refuses_tied_orderings() {
        // The unit square is maximally degenerate.
        match build_sigma(1.0, 0.5, 100) {
            Err(BoxError::DegenerateRanks(_, _)) => {}
            other => panic!("expected tie refusal, got {other:?}"),
        }
    }
}
