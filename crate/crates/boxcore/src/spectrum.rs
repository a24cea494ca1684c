//! Exact Dirichlet spectra of rectangles.
//!
//! Eigenpairs of −Δ on (0,a)×(0,b) with zero boundary values are
//! φ(m,n) = √(4/ab)·sin(mπx₁/a)·sin(nπx₂/b) with
//! λ(m,n) = π²(m²/a² + n²/b²), m, n ≥ 1. This module enumerates them in
//! energy order, locates resonant side lengths where two eigenvalues collide,
//! and tracks crossings of eigenvalue curves along a wall motion.

use crate::error::{BoxError, Result};
use crate::path::DeformationPath;
use std::f64::consts::PI;

/// Side lengths of a box; both strictly positive (enforced at construction).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    a: f64,
    b: f64,
}

impl Rect {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0) || !(b > 0.0) || !a.is_finite() || !b.is_finite() {
            return Err(BoxError::InvalidParameter(format!(
                "rectangle sides must be positive and finite, got ({a}, {b})"
            )));
        }
        Ok(Rect { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn area(&self) -> f64 {
        self.a * self.b
    }
}

/// Quantum-number pair (m, n), both ≥ 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mode {
    pub m: u32,
    pub n: u32,
}

impl Mode {
    pub fn new(m: u32, n: u32) -> Result<Self> {
        if m < 1 || n < 1 {
            return Err(BoxError::InvalidParameter(format!(
                "quantum numbers must be ≥ 1, got ({m}, {n})"
            )));
        }
        Ok(Mode { m, n })
    }

    /// Swap the two quantum numbers.
    pub fn transposed(&self) -> Mode {
        Mode { m: self.n, n: self.m }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.m, self.n)
    }
}

/// λ(m,n) = π²(m²/a² + n²/b²).
pub fn mode_energy(rect: Rect, mode: Mode) -> f64 {
    let m = mode.m as f64;
    let n = mode.n as f64;
    PI * PI * (m * m / (rect.a * rect.a) + n * n / (rect.b * rect.b))
}

/// Energy-ascending enumeration of every mode below a cutoff.
///
/// Enumeration is exhaustive: every (m, n) with λ ≤ `cutoff_energy` appears
/// exactly once, so ranks are exact integers, not estimates. Ties within the
/// relative `tie_tol` are recorded; rank-sensitive consumers refuse them.
pub struct SpectrumIndex {
    rect: Rect,
    tie_tol: f64,
    cutoff_energy: f64,
    /// (mode, energy), ascending by (energy, m, n).
    entries: Vec<(Mode, f64)>,
    /// Adjacent 1-based rank pairs (r, r+1) closer than the tie tolerance.
    tie_report: Vec<(usize, usize)>,
}

/// Estimate the energy level below which at least `count` modes live, from
/// the ellipse-area counting law N(E) ≈ (ab/4π)E − ((a+b)/4π)√E.
fn energy_for_count(rect: Rect, count: usize) -> f64 {
    let area = rect.area();
    let per = rect.a + rect.b;
    let mut e = 4.0 * PI * (count.max(1) as f64) / area + 16.0;
    for _ in 0..8 {
        e = 4.0 * PI / area * (count as f64 + per / (4.0 * PI) * e.sqrt()) + 16.0;
    }
    e
}

/// Build an index holding at least `count_at_least` modes.
///
/// The enumeration bound starts 10% above the counting-law estimate and grows
/// until enough modes are found, so ranks near the requested count are always
/// backed by a complete enumeration.
pub fn build_index(rect: Rect, count_at_least: usize, tie_tol: f64) -> SpectrumIndex {
    assert!(count_at_least >= 1, "need at least one mode");
    let mut cutoff = 1.1 * energy_for_count(rect, count_at_least);
    loop {
        let entries = enumerate_below(rect, cutoff);
        if entries.len() >= count_at_least {
            return finish_index(rect, cutoff, entries, tie_tol);
        }
        cutoff *= 1.3;
    }
}

/// Build an index certified complete up to a given energy.
pub fn build_index_to_energy(rect: Rect, cutoff_energy: f64, tie_tol: f64) -> SpectrumIndex {
    let entries = enumerate_below(rect, cutoff_energy);
    finish_index(rect, cutoff_energy, entries, tie_tol)
}

fn enumerate_below(rect: Rect, cutoff: f64) -> Vec<(Mode, f64)> {
    let mut entries = Vec::new();
    let m_max = (rect.a * cutoff.max(0.0).sqrt() / PI).floor() as u32;
    for m in 1..=m_max.max(0) {
        let mf = m as f64;
        let rem = cutoff - PI * PI * mf * mf / (rect.a * rect.a);
        if rem < 0.0 {
            continue;
        }
        let n_max = (rect.b * rem.sqrt() / PI).floor() as u32;
        for n in 1..=n_max {
            let mode = Mode { m, n };
            let e = mode_energy(rect, mode);
            if e <= cutoff {
                entries.push((mode, e));
            }
        }
    }
    entries
}

fn finish_index(
    rect: Rect,
    cutoff_energy: f64,
    mut entries: Vec<(Mode, f64)>,
    tie_tol: f64,
) -> SpectrumIndex {
    entries.sort_unstable_by(|x, y| {
        x.1.partial_cmp(&y.1)
            .unwrap()
            .then(x.0.m.cmp(&y.0.m))
            .then(x.0.n.cmp(&y.0.n))
    });
    let mut tie_report = Vec::new();
    for i in 1..entries.len() {
        let (e0, e1) = (entries[i - 1].1, entries[i].1);
        if e1 - e0 <= tie_tol * e1.abs() {
            tie_report.push((i, i + 1));
        }
    }
    SpectrumIndex { rect, tie_tol, cutoff_energy, entries, tie_report }
}

impl SpectrumIndex {
    pub fn rect(&self) -> Rect {
        self.rect
    }

    /// Energy level up to which the enumeration is complete.
    pub fn cutoff_energy(&self) -> f64 {
        self.cutoff_energy
    }

    /// Number of enumerated modes (≥ the requested count).
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Mode at 1-based `rank`.
    pub fn mode_of(&self, rank: usize) -> Option<Mode> {
        self.entries.get(rank.checked_sub(1)?).map(|e| e.0)
    }

    /// Energy at 1-based `rank`.
    pub fn energy_of(&self, rank: usize) -> Option<f64> {
        self.entries.get(rank.checked_sub(1)?).map(|e| e.1)
    }

    /// 1-based rank of `mode`, if its energy lies below the cutoff.
    ///
    /// Binary search on the energy (recomputed by the same expression that
    /// built the table, so the value matches bit for bit), then a local scan
    /// for the matching quantum numbers among equal energies.
    pub fn rank_of(&self, mode: Mode) -> Option<usize> {
        let e = mode_energy(self.rect, mode);
        if e > self.cutoff_energy {
            return None;
        }
        let mut lo = self.entries.partition_point(|x| x.1 < e);
        while lo < self.entries.len() && self.entries[lo].1 == e {
            if self.entries[lo].0 == mode {
                return Some(lo + 1);
            }
            lo += 1;
        }
        None
    }

    /// Adjacent rank pairs closer than the tie tolerance.
    pub fn tie_report(&self) -> &[(usize, usize)] {
        &self.tie_report
    }

    /// Whether any tie touches ranks 1..=k.
    pub fn has_tie_below(&self, k: usize) -> Option<(usize, usize)> {
        self.tie_report.iter().copied().find(|&(r, _)| r <= k)
    }

    pub fn tie_tol(&self) -> f64 {
        self.tie_tol
    }

    /// Iterate (rank, mode, energy).
    pub fn iter(&self) -> impl Iterator<Item = (usize, Mode, f64)> + '_ {
        self.entries.iter().enumerate().map(|(i, &(m, e))| (i + 1, m, e))
    }

    /// Number of modes with energy ≤ `e` (e must be ≤ cutoff for exactness).
    pub fn count_below(&self, e: f64) -> usize {
        self.entries.partition_point(|x| x.1 <= e)
    }
}

/// Side length a at which modes `k` and `l` share one energy over (0,a)×(0,b):
/// a² = b²(k₁² − l₁²)/(l₂² − k₂²), when that ratio is positive.
///
/// `None` means the pair never collides under horizontal stretching: the
/// squared differences have matching signs (one mode dominates in both axes).
pub fn resonance_length(k: Mode, l: Mode, b: f64) -> Option<f64> {
    assert!(k != l, "resonance needs two distinct modes");
    let num = (k.m as f64).powi(2) - (l.m as f64).powi(2);
    let den = (l.n as f64).powi(2) - (k.n as f64).powi(2);
    if den == 0.0 || num == 0.0 {
        return None;
    }
    let a2 = b * b * num / den;
    (a2 > 0.0).then(|| a2.sqrt())
}

/// One detected eigenvalue collision along a path.
#[derive(Debug, Clone, Copy)]
pub struct Crossing {
    pub t: f64,
    pub first: Mode,
    pub second: Mode,
    /// Common energy at the crossing.
    pub energy: f64,
}

/// Result of a crossing scan: events plus any grid-resolution warnings.
#[derive(Debug, Default)]
pub struct CrossingScan {
    pub crossings: Vec<Crossing>,
    /// Cells suspected to contain two crossings (sign-preserving dips); refine
    /// the grid to resolve them.
    pub warnings: Vec<String>,
}

/// Scan [t0, t1] with the default 1024-point grid.
pub fn crossing_times(
    path: &DeformationPath,
    modes: &[Mode],
    t0: f64,
    t1: f64,
) -> CrossingScan {
    crossing_times_with_grid(path, modes, t0, t1, 1024)
}

/// Scan with an explicit grid resolution.
///
/// Every unordered mode pair is tracked through λ_i(t) − λ_j(t) sampled on a
/// uniform grid; sign changes are bisected to relative time tolerance 10⁻¹⁰.
/// A parabola through three consecutive samples that dips through zero
/// without a sign change at the nodes is reported as a warning (two crossings
/// may share a cell).
pub fn crossing_times_with_grid(
    path: &DeformationPath,
    modes: &[Mode],
    t0: f64,
    t1: f64,
    grid: usize,
) -> CrossingScan {
    assert!(t1 > t0, "need a forward time interval");
    assert!(grid >= 2, "need at least two grid cells");
    let mut scan = CrossingScan::default();
    let energy_at = |t: f64, mode: Mode| {
        let rect = Rect { a: path.f1(t), b: path.f2(t) };
        mode_energy(rect, mode)
    };
    let times: Vec<f64> = (0..=grid)
        .map(|i| t0 + (t1 - t0) * i as f64 / grid as f64)
        .collect();
    for i in 0..modes.len() {
        for j in (i + 1)..modes.len() {
            let gap = |t: f64| energy_at(t, modes[i]) - energy_at(t, modes[j]);
            let values: Vec<f64> = times.iter().map(|&t| gap(t)).collect();
            for c in 0..grid {
                let (g0, g1) = (values[c], values[c + 1]);
                if g0 == 0.0 {
                    // Exact hit on a grid node; report once (skip duplicate at
                    // the right end of the previous cell).
                    if c == 0 || values[c - 1] != 0.0 {
                        scan.crossings.push(Crossing {
                            t: times[c],
                            first: modes[i],
                            second: modes[j],
                            energy: energy_at(times[c], modes[i]),
                        });
                    }
                    continue;
                }
                if g0 * g1 < 0.0 {
                    let t = bisect(&gap, times[c], times[c + 1], g0);
                    scan.crossings.push(Crossing {
                        t,
                        first: modes[i],
                        second: modes[j],
                        energy: energy_at(t, modes[i]),
                    });
                } else if c + 2 <= grid {
                    check_hidden_pair(
                        &mut scan.warnings,
                        modes[i],
                        modes[j],
                        &times[c..=c + 2],
                        &values[c..=c + 2],
                    );
                }
            }
        }
    }
    scan.crossings
        .sort_by(|x, y| x.t.partial_cmp(&y.t).unwrap());
    scan
}

fn bisect<F: Fn(f64) -> f64>(gap: &F, mut lo: f64, mut hi: f64, g_lo: f64) -> f64 {
    let mut sign_lo = g_lo.signum();
    let tol = 1e-10 * hi.abs().max(lo.abs()).max(1.0);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let g = gap(mid);
        if g == 0.0 {
            return mid;
        }
        if g.signum() == sign_lo {
            lo = mid;
        } else {
            hi = mid;
        }
        sign_lo = gap(lo).signum();
    }
    0.5 * (lo + hi)
}

/// Fit g(t) over three consecutive samples with a parabola; if the parabola
/// attains an interior zero while the samples all share one sign, two roots
/// may hide between the nodes.
fn check_hidden_pair(
    warnings: &mut Vec<String>,
    mi: Mode,
    mj: Mode,
    ts: &[f64],
    gs: &[f64],
) {
    let sgn = gs[0].signum();
    if gs.iter().any(|g| g.signum() != sgn) {
        return; // a plain sign change handles this window
    }
    // Parabola through (t0,g0),(t1,g1),(t2,g2) in the local variable
    // u ∈ {-1, 0, 1}: g(u) = a·u² + b·u + c.
    let c = gs[1];
    let b2 = 0.5 * (gs[2] - gs[0]);
    let a2 = 0.5 * (gs[2] - 2.0 * gs[1] + gs[0]);
    if a2 == 0.0 {
        return;
    }
    let disc = b2 * b2 - 4.0 * a2 * c;
    if disc <= 0.0 {
        return;
    }
    let sq = disc.sqrt();
    let u1 = (-b2 - sq) / (2.0 * a2);
    let u2 = (-b2 + sq) / (2.0 * a2);
    if u1.abs() < 1.0 && u2.abs() < 1.0 {
        warnings.push(format!(
            "modes {mi} and {mj}: possible crossing pair between t = {} and t = {}; refine the grid",
            ts[0], ts[2]
        ));
    }
}
