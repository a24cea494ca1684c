//! Slow diagnostics behind the acceptance constants. All ignored by default;
//! run with `cargo test -p boxcore --test protocol_probes -- --ignored --nocapture`
//! when re-tuning the pump protocol (they print, they do not assert tightly).

use std::time::Instant;

use boxcore::evolution::{run_adiabatic_sweep, run_pumping, SymmetryBreaker};
use boxcore::spectrum::Mode;

const SEED: u64 = 7;
const STRENGTH: f64 = 28.0;

fn mode(m: u32, n: u32) -> Mode {
    Mode::new(m, n).unwrap()
}

/// The tracked matrix element behind the strength choice: transfer scales as
/// the Landau-Zener exponent (strength * element)^2 * leg.
#[test]
#[ignore]
fn breaker_element_by_seed() {
    for seed in [SEED, 11, 17, 23] {
        let breaker = SymmetryBreaker::new(16, 16, 1.0, seed).unwrap();
        let w = breaker.element(mode(2, 1), mode(1, 2));
        println!("seed {seed}: element((2,1),(1,2)) = {w:.6}");
    }
}

/// Transfer population across leg durations; should climb monotonically and
/// follow 1 - exp(-c * leg) for a single avoided crossing.
#[test]
#[ignore]
fn pump_transfer_curve() {
    for leg in [15.0, 30.0, 60.0] {
        let t0 = Instant::now();
        let rep = run_pumping(
            1.2,
            0.8,
            1.0,
            mode(2, 1),
            1.0 / leg,
            STRENGTH,
            SEED,
            16,
            16,
            Some(1e-3),
        )
        .unwrap();
        println!(
            "leg {leg}: pop(1,2) = {:.6}, pop(2,1) = {:.6}, drift = {:.3e}, {:?}",
            rep.population_on(mode(1, 2)),
            rep.population_on(mode(2, 1)),
            rep.norm_drift,
            t0.elapsed()
        );
    }
}

/// Step-size robustness of the driven run: halving dt should move the final
/// population only in the fifth decimal.
#[test]
#[ignore]
fn pump_step_halving() {
    let mut previous = None;
    for dt in [1e-3, 5e-4] {
        let rep = run_pumping(
            1.2,
            0.8,
            1.0,
            mode(2, 1),
            1.0 / 15.0,
            STRENGTH,
            SEED,
            16,
            16,
            Some(dt),
        )
        .unwrap();
        let pop = rep.population_on(mode(1, 2));
        println!("dt {dt}: pop(1,2) = {pop:.8}, drift = {:.3e}", rep.norm_drift);
        if let Some(prev) = previous {
            let shift: f64 = pop - prev;
            println!("  halving shift = {:.2e}", shift.abs());
            assert!(shift.abs() < 1e-3, "dt = 1e-3 is not in the converged regime");
        }
        previous = Some(pop);
    }
}

/// Truncation sensitivity: the breaker is normalized per-truncation (unit
/// operator norm over the retained modes), so its effective coupling, and with
/// it the transfer, shifts when N changes. Protocol constants are N-specific;
/// this probe documents the size of that shift.
#[test]
#[ignore]
fn pump_truncation_doubling() {
    for n in [16usize, 24] {
        let rep = run_pumping(
            1.2,
            0.8,
            1.0,
            mode(2, 1),
            1.0 / 15.0,
            STRENGTH,
            SEED,
            n,
            n,
            Some(1e-3),
        )
        .unwrap();
        println!(
            "N {n}: pop(1,2) = {:.6}, drift = {:.3e}",
            rep.population_on(mode(1, 2)),
            rep.norm_drift
        );
    }
}

/// Raw defect ladder behind the adiabatic-order criterion, with the w-frame
/// and physical-frame pieces separated.
#[test]
#[ignore]
fn sweep_defect_ladder() {
    for eps in [0.1, 0.05, 0.025] {
        let t0 = Instant::now();
        let rep = run_adiabatic_sweep(
            std::f64::consts::FRAC_PI_2,
            1.2,
            1.0,
            mode(2, 1),
            eps,
            24,
            24,
            None,
        )
        .unwrap();
        let pop_defect =
            (rep.final_amplitude.norm_sqr() - rep.initial_amplitude.norm_sqr()).abs();
        println!(
            "eps {eps}: defect = {:.6e}, modulus defect = {:.6e}, population defect = {:.6e}, \
             phase defect = {:.6e}, drift = {:.3e}, steps = {}, {:?}",
            rep.defect,
            rep.modulus_defect,
            pop_defect,
            rep.phase_defect,
            rep.norm_drift,
            rep.steps,
            t0.elapsed()
        );
    }
}
