//! Time-dependent commands: eigenmode transport along a wall motion, pump
//! cycles with the symmetry breaker, even-split tuning, and control-law
//! synthesis.

use std::fs;
use std::path::Path;

use boxcore::control::{
    integrate_u, realized_potential, suggest_u0, synthesize_shape, ControlProfile,
};
use boxcore::evolution::protocols::stable_dt;
use boxcore::evolution::{
    find_split_speed, from_physical_mode, physical_amplitude, propagate, run_pumping, PumpReport,
};
use boxcore::{AxisLaw, DeformationPath, Mode};
use serde_json::json;

use crate::args::{
    ControlSpec, EvolveArgs, PumpArgs, SplitArgs, SweepProfile, SynthesizeArgs, VSpec,
};
use crate::run::{csv_f64, CliError, RunContext};

impl VSpec {
    /// Check the invariants the closure below relies on.
    fn validate(&self) -> Result<(), CliError> {
        match self {
            VSpec::Constant { value } => {
                if !value.is_finite() {
                    return Err(CliError::Usage("control potential must be finite".into()));
                }
            }
            VSpec::Samples { tau, value } => {
                if tau.is_empty() || tau.len() != value.len() {
                    return Err(CliError::Usage(
                        "sampled control needs matching nonempty tau and value columns".into(),
                    ));
                }
                if tau.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(CliError::Usage(
                        "sampled control needs strictly increasing tau".into(),
                    ));
                }
                if tau.iter().chain(value).any(|x| !x.is_finite()) {
                    return Err(CliError::Usage("sampled control must be finite".into()));
                }
            }
        }
        Ok(())
    }

    fn closure(&self) -> Box<dyn Fn(f64) -> f64 + Send + Sync> {
        match self {
            VSpec::Constant { value } => {
                let value = *value;
                Box::new(move |_| value)
            }
            VSpec::Samples { tau, value } => {
                let tau = tau.clone();
                let value = value.clone();
                Box::new(move |x| interp_clamped(&tau, &value, x))
            }
        }
    }
}

/// Piecewise-linear interpolation, clamped to the end values outside the
/// sampled range. `xs` is nonempty and strictly increasing.
fn interp_clamped(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    let last = xs.len() - 1;
    if x >= xs[last] {
        return ys[last];
    }
    let j = xs.partition_point(|&t| t <= x);
    let w = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
    ys[j - 1] + (ys[j] - ys[j - 1]) * w
}

impl ControlSpec {
    fn profile(&self) -> Result<ControlProfile, CliError> {
        self.v.validate()?;
        Ok(ControlProfile::new(self.v.closure(), self.tau_f, self.u0)?)
    }
}

fn load_control_spec(file: &Path) -> Result<ControlSpec, CliError> {
    let raw = fs::read_to_string(file)?;
    serde_json::from_str(&raw)
        .map_err(|e| CliError::Usage(format!("bad control file {}: {e}", file.display())))
}

pub fn evolve(args: &EvolveArgs) -> Result<(), CliError> {
    let mut ctx = RunContext::new("evolve", args, &args.out_dir)?;
    let mode = Mode::new(args.m, args.n)?;
    let path = match &args.control {
        Some(file) => {
            let spec = load_control_spec(file)?;
            let law = synthesize_shape(&spec.profile()?, spec.a, spec.samples)?;
            DeformationPath::new(law.axis_law(), AxisLaw::Constant(args.b), 0.0, law.duration())?
        }
        None => {
            // clap guarantees these are present when --control is absent.
            let (a0, a1) = (args.a0.unwrap(), args.a1.unwrap());
            let duration = args.duration.unwrap();
            if !(duration > 0.0) {
                return Err(CliError::Usage("--duration must be positive".into()));
            }
            match args.profile {
                SweepProfile::Linear => {
                    DeformationPath::linear_sweep_a(a0, a1, args.b, 0.0, duration)?
                }
                SweepProfile::Smooth => {
                    DeformationPath::smooth_sweep_a(a0, a1, args.b, 0.0, duration)?
                }
            }
        }
    };
    let dt = args.dt.unwrap_or_else(|| stable_dt(&path, args.n1, args.n2));
    let gauge_c = |t: f64| {
        let (f1, f1p, _) = path.f1_full(t);
        let (f2, f2p, _) = path.f2_full(t);
        (f1p * f1 / 4.0, f2p * f2 / 4.0)
    };
    let (c1_start, c2_start) = gauge_c(path.t_start());
    let initial = from_physical_mode(args.n1, args.n2, mode, c1_start, c2_start)?;
    let report = propagate(&initial, &path, dt, None)?;
    let (c1_end, c2_end) = gauge_c(path.t_end());
    let state = &report.state;
    let mut rows = Vec::with_capacity(args.n1 * args.n2);
    let mut retention = 0.0;
    for m in 1..=args.n1 {
        for n in 1..=args.n2 {
            let here = Mode::new(m as u32, n as u32)?;
            let coeff = state.coeffs[(m - 1) * args.n2 + (n - 1)];
            let population = physical_amplitude(state, here, c1_end, c2_end).norm_sqr();
            if here == mode {
                retention = population;
            }
            rows.push(format!(
                "{m},{n},{},{},{}",
                csv_f64(coeff.re),
                csv_f64(coeff.im),
                csv_f64(population)
            ));
        }
    }
    ctx.write_csv("evolve.csv", "m,n,re_gauge,im_gauge,population", rows)?;
    println!(
        "evolve: population left on mode {mode} = {:.6}, norm drift {:.3e}",
        retention, report.norm_drift
    );
    ctx.finish(json!({
        "retention": retention,
        "norm_drift": report.norm_drift,
        "steps": report.steps,
        "dt": report.dt,
        "max_solver_iters": report.max_solver_iters,
        "max_tail_population": report.max_tail_population,
        "duration": path.t_end() - path.t_start(),
    }))
}

fn write_populations(ctx: &mut RunContext, report: &PumpReport) -> Result<(), CliError> {
    ctx.write_csv(
        "pump.csv",
        "m,n,energy,population",
        report.populations.iter().map(|p| {
            format!(
                "{},{},{},{}",
                p.mode.m,
                p.mode.n,
                csv_f64(p.energy),
                csv_f64(p.population)
            )
        }),
    )
}

fn mode_json(mode: Option<Mode>) -> serde_json::Value {
    match mode {
        Some(p) => json!({ "m": p.m, "n": p.n }),
        None => serde_json::Value::Null,
    }
}

pub fn pump(args: &PumpArgs) -> Result<(), CliError> {
    let mut ctx = RunContext::new("pump", args, &args.out_dir)?;
    ctx.seed = Some(args.seed);
    let start = Mode::new(args.m, args.n)?;
    let report = run_pumping(
        args.a,
        args.a_prime,
        args.b,
        start,
        args.speed,
        args.strength,
        args.seed,
        args.n1,
        args.n2,
        Some(args.dt),
    )?;
    for w in &report.warnings {
        ctx.warn(w.clone());
    }
    write_populations(&mut ctx, &report)?;
    let retention = report.population_on(start);
    let transfer = report.partner.map(|p| report.population_on(p));
    match report.partner {
        Some(p) => println!(
            "pump: partner {p}, transfer {:.6}, retention on {start} {:.6}, norm drift {:.3e}",
            transfer.unwrap_or(0.0),
            retention,
            report.norm_drift
        ),
        None => println!(
            "pump: no crossing partner; retention on {start} {:.6}, norm drift {:.3e}",
            retention, report.norm_drift
        ),
    }
    ctx.finish(json!({
        "partner": mode_json(report.partner),
        "transfer": transfer,
        "retention": retention,
        "crossings": report.crossings,
        "norm_drift": report.norm_drift,
        "max_solver_iters": report.max_solver_iters,
        "steps": report.steps,
        "dt": report.dt,
    }))
}

pub fn split(args: &SplitArgs) -> Result<(), CliError> {
    let mut ctx = RunContext::new("split", args, &args.pump.out_dir)?;
    ctx.seed = Some(args.pump.seed);
    let start = Mode::new(args.pump.m, args.pump.n)?;
    let report = find_split_speed(
        args.pump.a,
        args.pump.a_prime,
        args.pump.b,
        start,
        args.alpha,
        args.tol,
        args.pump.speed,
        args.pump.strength,
        args.pump.seed,
        args.pump.n1,
        args.pump.n2,
        Some(args.pump.dt),
    )?;
    for w in &report.pump.warnings {
        ctx.warn(w.clone());
    }
    ctx.write_csv(
        "split.csv",
        "probe,blend,population",
        report.probes.iter().enumerate().map(|(i, (blend, population))| {
            format!("{i},{},{}", csv_f64(*blend), csv_f64(*population))
        }),
    )?;
    write_populations(&mut ctx, &report.pump)?;
    println!(
        "split: blend {:.6} leaves {:.6} on partner {} (target {:.6}, tol {}) after {} probe(s)",
        report.blend,
        report.achieved_population,
        report.partner,
        report.target_population,
        args.tol,
        report.probes.len()
    );
    ctx.finish(json!({
        "blend": report.blend,
        "achieved_population": report.achieved_population,
        "target_population": report.target_population,
        "partner": mode_json(Some(report.partner)),
        "retention": report.pump.population_on(start),
        "probes": report.probes.len(),
        "norm_drift": report.pump.norm_drift,
    }))
}

pub fn synthesize(args: &SynthesizeArgs) -> Result<(), CliError> {
    let mut ctx = RunContext::new("synthesize", args, &args.out_dir)?;
    let v = match (args.v_const, &args.v_csv) {
        (Some(value), None) => VSpec::Constant { value },
        (None, Some(file)) => load_v_csv(file)?,
        _ => return Err(CliError::Usage("provide exactly one of --v-const or --v-csv".into())),
    };
    v.validate()?;
    let trial = ControlProfile::new(v.closure(), args.tau_f, 0.25)?;
    let u0 = match args.u0 {
        Some(u0) => u0,
        None => suggest_u0(&trial)?,
    };
    let profile = trial.with_u0(u0);
    let usol = integrate_u(&profile)?;
    let law = synthesize_shape(&profile, args.a, args.samples)?;
    let rows = (0..law.t_grid.len()).map(|i| {
        let tau = law.tau[i];
        format!(
            "{},{},{},{},{},{}",
            csv_f64(law.t_grid[i]),
            csv_f64(tau),
            csv_f64(law.tau_prime[i]),
            csv_f64(law.f[i]),
            csv_f64(usol.u(tau)),
            csv_f64(realized_potential(&profile, &usol, tau))
        )
    });
    ctx.write_csv("shape.csv", "t,tau,tau_prime,f,u,v_realized", rows)?;
    let spec =
        ControlSpec { a: args.a, tau_f: args.tau_f, u0, samples: args.samples, v };
    ctx.write_json("control.json", &spec)?;
    let f_final = *law.f.last().expect("synthesis grid is nonempty");
    println!(
        "synthesize: lab duration {:.6} realizes squeezed time {}, f {} -> {:.6}, U in [{:.6}, {:.6}]",
        law.duration(),
        args.tau_f,
        args.a,
        f_final,
        usol.u_min(),
        usol.u_max()
    );
    ctx.finish(json!({
        "duration": law.duration(),
        "u0": u0,
        "u_min": usol.u_min(),
        "u_max": usol.u_max(),
        "f_final": f_final,
    }))
}

/// Read a two-column CSV of (tau, v) samples; one header row is allowed.
fn load_v_csv(file: &Path) -> Result<VSpec, CliError> {
    let raw = fs::read_to_string(file)?;
    let mut tau = Vec::new();
    let mut value = Vec::new();
    for (idx, line) in raw.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let parsed = match (fields.next(), fields.next(), fields.next()) {
            (Some(x), Some(y), None) => {
                x.trim().parse::<f64>().ok().zip(y.trim().parse::<f64>().ok())
            }
            _ => None,
        };
        match parsed {
            Some((x, y)) => {
                tau.push(x);
                value.push(y);
            }
            None if idx == 0 => continue, // header row
            None => {
                return Err(CliError::Usage(format!(
                    "{}:{}: expected two comma-separated numbers",
                    file.display(),
                    idx + 1
                )));
            }
        }
    }
    if tau.is_empty() {
        return Err(CliError::Usage(format!("{}: no samples found", file.display())));
    }
    Ok(VSpec::Samples { tau, value })
}
