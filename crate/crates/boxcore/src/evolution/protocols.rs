//! Deformation protocols built on the propagator: slow linear sweeps with an
//! adiabatic-defect report, the two-leg pump cycle that transfers population
//! across an eigenvalue crossing, and the blend search that splits a state
//! between the two branches of that crossing.

use nalgebra::SymmetricEigen;

use crate::error::{BoxError, Result};
use crate::evolution::breaker::{AmplitudeLaw, BreakerDrive, SymmetryBreaker};
use crate::evolution::gauge::{from_physical_mode, physical_amplitude};
use crate::evolution::hamiltonian::assemble_hamiltonian;
use crate::evolution::propagate::propagate;
use crate::evolution::WaveState;
use crate::path::DeformationPath;
use crate::quad::integrate_adaptive;
use crate::spectrum::{crossing_times, mode_energy, Mode, Rect};
use crate::C64;

/// Smallest normalized breaker element the pump accepts for its tracked pair.
const GENERIC_MIN: f64 = 1e-4;

/// Largest time step satisfying dt·λ_max ≤ 0.1 for the full truncation over
/// the whole path (sampled on a 64-point grid).
pub fn stable_dt(path: &DeformationPath, n1: usize, n2: usize) -> f64 {
    let pi = std::f64::consts::PI;
    let mut lambda_max = 0.0f64;
    for i in 0..=64 {
        let t = path.t_start() + (path.t_end() - path.t_start()) * i as f64 / 64.0;
        let (f1, f2) = (path.f1(t), path.f2(t));
        let lam = pi * pi * ((n1 * n1) as f64 / (f1 * f1) + (n2 * n2) as f64 / (f2 * f2));
        lambda_max = lambda_max.max(lam);
    }
    0.1 / lambda_max
}

/// Time step resolving the modes a pump run actually populates: the band up
/// to two quantum numbers above the tracked mode, with the same 0.1 phase
/// budget per step. Modes far above the band pick up large per-step phase
/// errors, but they stay empty (the tail monitor enforces that) and phase
/// errors on empty modes cannot leak back into the populated band because the
/// Cayley step is unitary.
pub fn band_dt(path: &DeformationPath, start: Mode) -> f64 {
    let pi = std::f64::consts::PI;
    let (bm, bn) = ((start.m + 2) as f64, (start.n + 2) as f64);
    let mut lambda_band = 0.0f64;
    for i in 0..=64 {
        let t = path.t_start() + (path.t_end() - path.t_start()) * i as f64 / 64.0;
        let (f1, f2) = (path.f1(t), path.f2(t));
        let lam = pi * pi * (bm * bm / (f1 * f1) + bn * bn / (f2 * f2));
        lambda_band = lambda_band.max(lam);
    }
    0.1 / lambda_band
}

/// Outcome of one adiabatic sweep at rate ε.
pub struct SweepReport {
    pub eps: f64,
    pub duration: f64,
    /// −∫λ(t)dt of the tracked instantaneous level.
    pub dynamical_phase: f64,
    pub initial_amplitude: C64,
    pub final_amplitude: C64,
    /// |A(T) − e^{iΦ_dyn}·A(0)|, the full complex adiabatic defect.
    pub defect: f64,
    /// |arg(A(T)) − arg(e^{iΦ_dyn}A(0))| folded to (−π, π].
    pub phase_defect: f64,
    pub modulus_defect: f64,
    pub norm_drift: f64,
    pub steps: usize,
}

/// Sweep the horizontal side linearly a0 → a1 over T = 1/eps with b fixed,
/// starting from the physical eigenstate `mode` of the initial box, and
/// measure how far the final state is from the adiabatic prediction
/// e^{iΦ_dyn}·(initial amplitude) on the final box's eigenstate.
pub fn run_adiabatic_sweep(
    a0: f64,
    a1: f64,
    b: f64,
    mode: Mode,
    eps: f64,
    n1: usize,
    n2: usize,
    dt: Option<f64>,
) -> Result<SweepReport> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(BoxError::InvalidParameter(format!("sweep rate must be positive, got {eps}")));
    }
    let duration = 1.0 / eps;
    let path = DeformationPath::linear_sweep_a(a0, a1, b, 0.0, duration)?;
    let dt = dt.unwrap_or_else(|| stable_dt(&path, n1, n2));

    let gauge_at = |t: f64| {
        let (f1, f1p, _) = path.f1_full(t);
        let (f2, f2p, _) = path.f2_full(t);
        (0.25 * f1p * f1, 0.25 * f2p * f2)
    };
    let (c1_0, c2_0) = gauge_at(0.0);
    let w0 = from_physical_mode(n1, n2, mode, c1_0, c2_0)?;
    let initial_amplitude = physical_amplitude(&w0, mode, c1_0, c2_0);

    let run = propagate(&w0, &path, dt, None)?;

    let (c1_t, c2_t) = gauge_at(duration);
    let final_amplitude = physical_amplitude(&run.state, mode, c1_t, c2_t);

    let level = |t: f64| {
        let rect = Rect::new(path.f1(t), path.f2(t)).expect("path keeps sides positive");
        mode_energy(rect, mode)
    };
    let dynamical_phase = -integrate_adaptive(&level, 0.0, duration, 1e-9);
    let reference = C64::from_polar(1.0, dynamical_phase) * initial_amplitude;
    let defect = (final_amplitude - reference).norm();
    let phase_defect = (final_amplitude / reference).arg().abs();
    let modulus_defect = (final_amplitude.norm() - initial_amplitude.norm()).abs();

    Ok(SweepReport {
        eps,
        duration,
        dynamical_phase,
        initial_amplitude,
        final_amplitude,
        defect,
        phase_defect,
        modulus_defect,
        norm_drift: run.norm_drift,
        steps: run.steps,
    })
}

/// Population of one end-of-run eigenstate, labeled by its dominant mode.
#[derive(Debug, Clone, Copy)]
pub struct ModePopulation {
    pub mode: Mode,
    pub energy: f64,
    pub population: f64,
}

/// Outcome of a pump cycle.
pub struct PumpReport {
    pub final_state: WaveState,
    /// Eigenstates of the end-of-run Hamiltonian, ascending in energy.
    pub populations: Vec<ModePopulation>,
    /// The mode that crosses the tracked one on the return leg, if any.
    pub partner: Option<Mode>,
    pub crossings: usize,
    pub warnings: Vec<String>,
    pub norm_drift: f64,
    pub max_solver_iters: usize,
    pub steps: usize,
    pub dt: f64,
}

impl PumpReport {
    /// Total population on eigenstates labeled `mode`.
    pub fn population_on(&self, mode: Mode) -> f64 {
        self.populations.iter().filter(|p| p.mode == mode).map(|p| p.population).sum()
    }
}

/// One pump cycle: a smooth sweep a → a′ with the breaker off, then the
/// return sweep a′ → a with the symmetry breaker ramped up and down by a
/// smooth bump. Eigenvalue crossings on the return leg become avoided, and
/// population transfers across each one the state reaches.
///
/// `speed` is the inverse duration of each leg; `breaker_strength` multiplies
/// the unit-norm breaker. The initial state is the `start` eigenstate of the
/// (a, b) box, exact in the rescaled frame because smooth sweeps start and
/// end with zero wall velocity and curvature.
#[allow(clippy::too_many_arguments)]
pub fn run_pumping(
    a: f64,
    a_prime: f64,
    b: f64,
    start: Mode,
    speed: f64,
    breaker_strength: f64,
    seed: u64,
    n1: usize,
    n2: usize,
    dt: Option<f64>,
) -> Result<PumpReport> {
    if !(speed > 0.0) || !speed.is_finite() {
        return Err(BoxError::InvalidParameter(format!("pump speed must be positive, got {speed}")));
    }
    let leg = 1.0 / speed;
    let path_out = DeformationPath::smooth_sweep_a(a, a_prime, b, 0.0, leg)?;
    let path_back = DeformationPath::smooth_sweep_a(a_prime, a, b, 0.0, leg)?;
    let dt = dt.unwrap_or_else(|| band_dt(&path_back, start));
    let mut warnings = Vec::new();

    // Level crossings on the return leg, scanned over the band around the
    // tracked mode.
    let band_m = (start.m + 2).min(n1 as u32);
    let band_n = (start.n + 2).min(n2 as u32);
    let mut band = Vec::new();
    for m in 1..=band_m {
        for n in 1..=band_n {
            band.push(Mode::new(m, n).expect("band indices start at 1"));
        }
    }
    let scan = crossing_times(&path_back, &band, 0.0, leg);
    warnings.extend(scan.warnings.iter().cloned());
    if scan.crossings.is_empty() {
        warnings.push(
            "no eigenvalue crossings on the return leg; the cycle permutes nothing".to_string(),
        );
    }
    let partner = scan
        .crossings
        .iter()
        .find(|c| c.first == start || c.second == start)
        .map(|c| if c.first == start { c.second } else { c.first });
    if partner.is_none() && !scan.crossings.is_empty() {
        warnings.push(format!(
            "none of the {} return-leg crossings involves the tracked mode",
            scan.crossings.len()
        ));
    }

    let breaker = SymmetryBreaker::new(n1, n2, breaker_strength, seed)?;
    if breaker_strength != 0.0 {
        if let Some(p) = partner {
            breaker.ensure_generic(start, p, GENERIC_MIN)?;
        }
    }

    let state0 = WaveState::from_mode(n1, n2, start)?;
    let run_out = propagate(&state0, &path_out, dt, None)?;
    let drive = BreakerDrive {
        breaker,
        envelope: AmplitudeLaw::Bump { t0: 0.0, t1: leg },
    };
    let run_back = propagate(&run_out.state, &path_back, dt, Some(&drive))?;

    // Populations in the eigenbasis of the end-of-run Hamiltonian (the bump
    // has died out there, so this is the clean final box).
    let h = assemble_hamiltonian(&path_back, leg, n1, n2, Some(&drive));
    let eig = SymmetricEigen::new(h);
    let dim = n1 * n2;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let w = &run_back.state.coeffs;
    let populations = order
        .iter()
        .map(|&j| {
            let v = eig.eigenvectors.column(j);
            let mut dot = C64::new(0.0, 0.0);
            let mut dominant = 0usize;
            let mut best = 0.0f64;
            for i in 0..dim {
                dot += v[i] * w[i];
                if v[i].abs() > best {
                    best = v[i].abs();
                    dominant = i;
                }
            }
            let mode = Mode::new((dominant / n2 + 1) as u32, (dominant % n2 + 1) as u32)
                .expect("indices start at 1");
            ModePopulation { mode, energy: eig.eigenvalues[j], population: dot.norm_sqr() }
        })
        .collect();

    Ok(PumpReport {
        final_state: run_back.state,
        populations,
        partner,
        crossings: scan.crossings.len(),
        warnings,
        norm_drift: run_out.norm_drift.max(run_back.norm_drift),
        max_solver_iters: run_out.max_solver_iters.max(run_back.max_solver_iters),
        steps: run_out.steps + run_back.steps,
        dt,
    })
}

/// Outcome of the splitting search.
pub struct SplitReport {
    /// Breaker blend s ∈ [0, 1] that achieves the target.
    pub blend: f64,
    /// Population actually reached on the partner mode.
    pub achieved_population: f64,
    /// Requested population α² on the partner mode.
    pub target_population: f64,
    pub partner: Mode,
    /// Every (blend, partner population) pair probed, in probe order.
    pub probes: Vec<(f64, f64)>,
    /// Full report of the accepted run.
    pub pump: PumpReport,
}

/// Find the breaker blend s ∈ [0, 1] whose pump cycle leaves population α²
/// on the crossing partner (and 1−α² on the start mode). s scales
/// `breaker_strength` linearly; s = 0 keeps all population on the start mode
/// and s = 1 is the full pump, so any target between the two endpoint
/// populations is reachable by bisection. α = 0 and α = 1 return the
/// endpoints directly.
#[allow(clippy::too_many_arguments)]
pub fn find_split_speed(
    a: f64,
    a_prime: f64,
    b: f64,
    start: Mode,
    target_alpha: f64,
    tol: f64,
    speed: f64,
    breaker_strength: f64,
    seed: u64,
    n1: usize,
    n2: usize,
    dt: Option<f64>,
) -> Result<SplitReport> {
    if !(0.0..=1.0).contains(&target_alpha) {
        return Err(BoxError::InvalidParameter(format!(
            "target amplitude must lie in [0, 1], got {target_alpha}"
        )));
    }
    if !(tol > 0.0) {
        return Err(BoxError::InvalidParameter(format!(
            "population tolerance must be positive, got {tol}"
        )));
    }
    if !(breaker_strength > 0.0) {
        return Err(BoxError::InvalidParameter(
            "splitting needs a positive breaker strength to blend".to_string(),
        ));
    }
    let target = target_alpha * target_alpha;
    let probe = |s: f64| -> Result<(PumpReport, Mode, f64)> {
        let rep = run_pumping(a, a_prime, b, start, speed, breaker_strength * s, seed, n1, n2, dt)?;
        let partner = rep.partner.ok_or_else(|| {
            BoxError::NoBracket(
                "no crossing involves the tracked mode, nothing to split against".to_string(),
            )
        })?;
        let pop = rep.population_on(partner);
        Ok((rep, partner, pop))
    };

    let mut probes = Vec::new();

    // Endpoint targets return the endpoint protocols without a search.
    if target_alpha == 1.0 {
        let (rep, partner, pop) = probe(1.0)?;
        probes.push((1.0, pop));
        return Ok(SplitReport {
            blend: 1.0,
            achieved_population: pop,
            target_population: target,
            partner,
            probes,
            pump: rep,
        });
    }
    if target_alpha == 0.0 {
        let (rep, partner, pop) = probe(0.0)?;
        probes.push((0.0, pop));
        return Ok(SplitReport {
            blend: 0.0,
            achieved_population: pop,
            target_population: target,
            partner,
            probes,
            pump: rep,
        });
    }

    let (rep_hi, partner, p_hi) = probe(1.0)?;
    probes.push((1.0, p_hi));
    if (p_hi - target).abs() <= tol {
        return Ok(SplitReport {
            blend: 1.0,
            achieved_population: p_hi,
            target_population: target,
            partner,
            probes,
            pump: rep_hi,
        });
    }
    let (rep_lo, _, p_lo) = probe(0.0)?;
    probes.push((0.0, p_lo));
    if (p_lo - target).abs() <= tol {
        return Ok(SplitReport {
            blend: 0.0,
            achieved_population: p_lo,
            target_population: target,
            partner,
            probes,
            pump: rep_lo,
        });
    }
    if target < p_lo || target > p_hi {
        return Err(BoxError::NoBracket(format!(
            "target population {target:.4} outside the reachable range [{p_lo:.4}, {p_hi:.4}]"
        )));
    }

    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..32 {
        let mid = 0.5 * (lo + hi);
        let (rep, _, p) = probe(mid)?;
        probes.push((mid, p));
        if (p - target).abs() <= tol {
            return Ok(SplitReport {
                blend: mid,
                achieved_population: p,
                target_population: target,
                partner,
                probes,
                pump: rep,
            });
        }
        if p < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(BoxError::NoBracket(format!(
        "bisection pinned the blend to [{lo:.6}, {hi:.6}] without reaching the population \
         tolerance {tol}; the transfer probability is too steep there"
    )))
}
