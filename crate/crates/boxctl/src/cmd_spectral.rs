//! Static-geometry commands: spectra, crossing scans, the rank permutation
//! and its orbits, entropy accumulation, and the boundary-functional table.

use boxcore::permutation::{
    build_sigma_rect, entropy_integral, iterate_orbit, OrbitStatus,
};
use boxcore::sah2::verify_table;
use boxcore::spectrum::{build_index, crossing_times};
use boxcore::{DeformationPath, Mode, Rect};
use serde_json::json;

use crate::args::{CrossingsArgs, EntropyArgs, OrbitArgs, Sah2Args, SigmaArgs, SpectrumArgs};
use crate::run::{csv_f64, CliError, RunContext};

pub fn spectrum(args: &SpectrumArgs) -> Result<(), CliError> {
    let mut ctx = RunContext::new("spectrum", args, &args.out_dir)?;
    if args.count < 1 {
        return Err(CliError::Usage("--count must be at least 1".into()));
    }
    let rect = Rect::new(args.a, args.b)?;
    let index = build_index(rect, args.count, args.tie_tol);
    let taken: Vec<_> = index.iter().take(args.count).collect();
    for &(r, s) in index.tie_report().iter().take(8) {
        ctx.warn(format!("ranks {r} and {s} are tied within tolerance {:e}", args.tie_tol));
    }
    let extra = index.tie_report().len().saturating_sub(8);
    if extra > 0 {
        ctx.warn(format!("{extra} further tied rank pairs omitted"));
    }
    ctx.write_csv(
        "spectrum.csv",
        "rank,m,n,energy",
        taken.iter().map(|(rank, mode, energy)| {
            format!("{rank},{},{},{}", mode.m, mode.n, csv_f64(*energy))
        }),
    )?;
    let results = json!({
        "count": taken.len(),
        "lowest_energy": taken.first().map(|(_, _, e)| *e),
        "highest_energy": taken.last().map(|(_, _, e)| *e),
        "tied_pairs": index.tie_report().len(),
    });
    println!(
        "spectrum: {} levels of the {} x {} box, {} tied pair(s)",
        taken.len(),
        args.a,
        args.b,
        index.tie_report().len()
    );
    ctx.finish(results)
}

pub fn crossings(args: &CrossingsArgs) -> Result<(), CliError> {
    let mut ctx = RunContext::new("crossings", args, &args.out_dir)?;
    if args.duration <= 0.0 {
        return Err(CliError::Usage("--duration must be positive".into()));
    }
    let path = DeformationPath::linear_sweep_a(args.a0, args.a1, args.b, 0.0, args.duration)?;
    let mut modes = Vec::new();
    for m in 1..=args.m_max {
        for n in 1..=args.n_max {
            modes.push(Mode::new(m, n)?);
        }
    }
    let scan = crossing_times(&path, &modes, 0.0, args.duration);
    for w in &scan.warnings {
        ctx.warn(w.clone());
    }
    ctx.write_csv(
        "crossings.csv",
        "t,m1,n1,m2,n2,energy",
        scan.crossings.iter().map(|c| {
            format!(
                "{},{},{},{},{},{}",
                csv_f64(c.t),
                c.first.m,
                c.first.n,
                c.second.m,
                c.second.n,
                csv_f64(c.energy)
            )
        }),
    )?;
    println!(
        "crossings: {} event(s) while a sweeps {} -> {} over {} modes",
        scan.crossings.len(),
        args.a0,
        args.a1,
        modes.len()
    );
    ctx.finish(json!({
        "crossings": scan.crossings.len(),
        "modes_tracked": modes.len(),
        "sweep_rate": (args.a1 - args.a0) / args.duration,
    }))
}

pub fn sigma(args: &SigmaArgs) -> Result<(), CliError> {
    let mut ctx = RunContext::new("sigma", args, &args.out_dir)?;
    let table = build_sigma_rect(args.a, args.atilde, args.b, args.k_table)?;
    let fixed = (1..=table.valid_to()).filter(|&k| table.sigma(k) == k).count();
    ctx.write_csv(
        "sigma.csv",
        "k,m,n,sigma",
        (1..=table.valid_to()).map(|k| {
            let mode = table.mode(k);
            format!("{k},{},{},{}", mode.m, mode.n, table.sigma(k))
        }),
    )?;
    println!(
        "sigma: tabulated {} ranks between a = {} and a~ = {}; {} fixed point(s)",
        table.valid_to(),
        args.a,
        args.atilde,
        fixed
    );
    ctx.finish(json!({
        "valid_to": table.valid_to(),
        "fixed_points": fixed,
    }))
}

pub fn orbit(args: &OrbitArgs) -> Result<(), CliError> {
    let mut ctx = RunContext::new("orbit", args, &args.out_dir)?;
    if args.start < 1 {
        return Err(CliError::Usage("--start must be at least 1".into()));
    }
    let table = build_sigma_rect(args.a, args.atilde, args.b, args.k_table)?;
    if args.start > table.valid_to() {
        return Err(CliError::Usage(format!(
            "--start {} exceeds the certified table (valid to {}); raise --k-table",
            args.start,
            table.valid_to()
        )));
    }
    let record = iterate_orbit(&table, args.start, args.max_steps);
    ctx.write_csv(
        "orbit.csv",
        "step,rank,m,n",
        record.trajectory.iter().enumerate().map(|(step, &rank)| {
            if rank <= table.valid_to() {
                let mode = table.mode(rank);
                format!("{step},{rank},{},{}", mode.m, mode.n)
            } else {
                format!("{step},{rank},,")
            }
        }),
    )?;
    let (status, period) = match record.status {
        OrbitStatus::Periodic { period } => ("periodic", Some(period)),
        OrbitStatus::Escaped => ("escaped", None),
        OrbitStatus::Exhausted => ("exhausted", None),
    };
    match record.status {
        OrbitStatus::Periodic { period } => {
            let cycle: Vec<String> =
                record.trajectory.iter().map(|r| r.to_string()).collect();
            println!("orbit: periodic with period {period}: ({})", cycle.join(" "));
        }
        OrbitStatus::Escaped => println!(
            "orbit: escaped the certified table after {} step(s), log-growth rate {:.4}",
            record.trajectory.len() - 1,
            record.log_growth_rate()
        ),
        OrbitStatus::Exhausted => println!(
            "orbit: still inside the table after {} step(s); raise --max-steps",
            args.max_steps
        ),
    }
    ctx.finish(json!({
        "status": status,
        "period": period,
        "steps": record.trajectory.len() - 1,
        "log_growth_rate": record.log_growth_rate(),
    }))
}

pub fn entropy(args: &EntropyArgs) -> Result<(), CliError> {
    let mut ctx = RunContext::new("entropy", args, &args.out_dir)?;
    if args.k < 1 {
        return Err(CliError::Usage("--K must be at least 1".into()));
    }
    let table = build_sigma_rect(args.a, args.atilde, args.b, args.k)?;
    let checkpoints = log_checkpoints(args.k, args.checkpoints);
    let mut rows = Vec::with_capacity(checkpoints.len());
    let mut sum = 0.0f64;
    let mut next = 0usize;
    let mut delta_e = 0.0f64;
    for k in 1..=args.k {
        sum += (table.sigma(k) as f64).ln() - (k as f64).ln();
        if next < checkpoints.len() && k == checkpoints[next] {
            delta_e = sum / k as f64;
            rows.push(format!("{k},{}", csv_f64(delta_e)));
            next += 1;
        }
    }
    ctx.write_csv("entropy.csv", "k,delta_e", rows)?;
    let integral = entropy_integral(args.a, args.atilde);
    println!(
        "deltaE({}) = {:.6}, predicted limit = {:.6}",
        args.k, delta_e, integral.closed_form
    );
    ctx.finish(json!({
        "delta_e": delta_e,
        "k_upper": args.k,
        "integral_quadrature": integral.quadrature,
        "integral_closed_form": integral.closed_form,
    }))
}

/// About `count` log-spaced checkpoints in [1, k], deduplicated, always
/// ending exactly at k.
fn log_checkpoints(k: usize, count: usize) -> Vec<usize> {
    let count = count.max(1);
    let lo = 10.0f64.min(k as f64);
    let hi = k as f64;
    let mut points = Vec::with_capacity(count);
    for i in 0..count {
        let frac = if count == 1 { 1.0 } else { i as f64 / (count - 1) as f64 };
        let value = (lo.ln() + frac * (hi.ln() - lo.ln())).exp();
        let rounded = (value.round() as usize).clamp(1, k);
        if points.last() != Some(&rounded) {
            points.push(rounded);
        }
    }
    if points.last() != Some(&k) {
        points.push(k);
    }
    points
}

pub fn sah2(args: &Sah2Args) -> Result<(), CliError> {
    let mut ctx = RunContext::new("sah2", args, &args.out_dir)?;
    let k = Mode::new(args.k1, args.k2)?;
    let l = Mode::new(args.l1, args.l2)?;
    let report = verify_table(k, l, args.b)?;
    let pair_names = ["kk", "ll", "kl"];
    let mut rows = Vec::with_capacity(15);
    for (row, name) in pair_names.iter().enumerate() {
        for col in 0..5 {
            let numeric = report.numeric[row][col];
            let closed = report.closed[row][col];
            let mismatch = (numeric - closed).abs() / (1.0 + closed.abs());
            rows.push(format!(
                "{name},g{},{},{},{}",
                col + 1,
                csv_f64(numeric),
                csv_f64(closed),
                csv_f64(mismatch)
            ));
        }
    }
    ctx.write_csv("sah2.csv", "pair,deformation,numeric,closed,mismatch", rows)?;
    println!(
        "sah2: resonance at a = {:.6}, rank {} over g1..g4, max mismatch {:.3e}",
        report.rect.a(),
        report.rank,
        report.max_mismatch
    );
    ctx.finish(json!({
        "a": report.rect.a(),
        "rank": report.rank,
        "singular_values": report.singular_values,
        "stretch_independent": report.stretch_independent,
        "max_mismatch": report.max_mismatch,
    }))
}
