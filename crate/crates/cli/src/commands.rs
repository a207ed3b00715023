use std::fmt::Write as _;
use std::path::Path;

use emi_core::analytic::export::{export_mms, volume_rows, write_volume, ExportGrid};
use emi_core::analytic::presets::Preset;
use emi_core::analytic::residual::{random_samples, residual_check};
use emi_core::analytic::{ExactFields, MmsSolution, Subdomain};
use emi_core::cartesian::CartesianSolver;
use emi_core::model::Point;
use emi_core::split::{integrate_final, TimeGrid};
use emi_core::verify::{run_case, run_schedule, Case, CaseResult, ConvergenceReport, RefinementSchedule};

use crate::cli::{ConvergenceArgs, EvalArgs, ExportArgs, RunArgs, SolveArgs, ValidateArgs};
use crate::config::{parse_list, parse_schedule, FileConfig};
use crate::error::{CliError, CliResult};
use crate::output::{check_stamp, report_paths, timestamp_now, write_atomic};

/// Balance defect above which a run is reported as a numeric failure.
const BALANCE_LIMIT: f64 = 1e-9;

fn stamp(solve: &SolveArgs) -> CliResult<String> {
    match &solve.timestamp {
        Some(s) => check_stamp(s).map(|_| s.clone()),
        None => Ok(timestamp_now()),
    }
}

fn fmt_point(p: Point) -> String {
    format!("[{}, {}, {}]", p[0], p[1], p[2])
}

pub fn eval(args: &EvalArgs) -> CliResult<String> {
    let cfg = FileConfig::load(args.common.config.as_deref())?;
    let preset = cfg.preset(args.common.preset.as_deref(), Preset::Exp1)?;
    let s = cfg.solution(preset)?;
    let p = match args.r {
        Some(r) => [r, 0.0, 0.0],
        None => [args.x.unwrap_or(0.0), args.y.unwrap_or(0.0), args.z.unwrap_or(0.0)],
    };
    let t = args.t;
    if !t.is_finite() || p.iter().any(|x| !x.is_finite()) {
        return Err(CliError::Config("point and time must be finite".into()));
    }
    let Some(located) = s.locate(p) else {
        return Err(CliError::Config(format!(
            "domain error: point {} lies outside the {preset} domain",
            fmt_point(p)
        )));
    };
    let n = s.n_cells();
    let cells: Vec<usize> = match args.cell {
        Some(k) if (1..=n).contains(&k) => vec![k],
        Some(k) => return Err(CliError::Config(format!("cell {k} out of range 1..={n}"))),
        None => (1..=n).collect(),
    };
    let mut out = String::new();
    let mut line = |name: String, value: String| writeln!(out, "{name} = {value}").expect("write to string");
    line("preset".into(), preset.to_string());
    line("point".into(), fmt_point(p));
    line("t".into(), t.to_string());
    line(
        "subdomain".into(),
        match located {
            Subdomain::Extracellular => "extracellular".into(),
            Subdomain::Intracellular(k) => format!("intracellular {k}"),
        },
    );
    line("u_e".into(), s.u_e(p, t).to_string());
    line("f_e".into(), s.f_e(p, t).to_string());
    for &k in &cells {
        line(format!("u_i{k}"), s.u_i(k, p, t).to_string());
        line(format!("f_i{k}"), s.f_i(k, p, t).to_string());
        line(format!("v{k}"), s.v(k, p, t).to_string());
        line(format!("i_m{k}"), s.i_m(k, p, t).to_string());
        line(format!("g{k}"), s.g(k, p, t).to_string());
    }
    for pair in s.gaps() {
        if cells.contains(&pair.low()) || cells.contains(&pair.high()) {
            let tag = format!("{}_{}", pair.low(), pair.high());
            line(format!("w{tag}"), s.w(pair, p, t).to_string());
            line(format!("i_gap{tag}"), s.i_gap(pair, p, t).to_string());
            line(format!("g_gap{tag}"), s.g_gap(pair, p, t).to_string());
        }
    }
    Ok(out)
}

fn check_window(t0: f64, t_end: f64) -> CliResult<()> {
    if t0.is_finite() && t_end.is_finite() && t0 < t_end {
        Ok(())
    } else {
        Err(CliError::Config(format!("time window needs t0 < t_end, got [{t0}, {t_end}]")))
    }
}

fn check_balance(results: &[CaseResult]) -> CliResult<()> {
    match results.iter().find(|r| r.max_balance > BALANCE_LIMIT) {
        Some(r) => Err(CliError::Numeric(format!(
            "current balance {:e} exceeds {BALANCE_LIMIT:e} at c_l = {}, n_f = {}",
            r.max_balance, r.c_l, r.n_f
        ))),
        None => Ok(()),
    }
}

fn write_report(dir: &Path, stamp: &str, report: &ConvergenceReport) -> CliResult<String> {
    let (csv, md) = report_paths(dir, &report.preset, stamp);
    write_atomic(&csv, &report.to_csv())?;
    write_atomic(&md, &report.to_markdown())?;
    Ok(format!("wrote {}\nwrote {}\n", csv.display(), md.display()))
}

pub fn run(args: &RunArgs) -> CliResult<String> {
    let cfg = FileConfig::load(args.common.config.as_deref())?;
    let preset = cfg.preset(args.common.preset.as_deref(), Preset::Exp1)?;
    let (t0, t_end) = cfg.window(preset, args.solve.t0, args.solve.t_end);
    check_window(t0, t_end)?;
    let &(dc, dn) = RefinementSchedule::for_preset(preset).rows().last().expect("non-empty");
    let c_l = args.c_l.or(cfg.run.c_l).unwrap_or(dc);
    let n_f = args.n_f.or(cfg.run.n_f).unwrap_or(dn);
    if !(c_l > 0.0 && c_l.is_finite()) || n_f == 0 {
        return Err(CliError::Config(format!("need c_l > 0 and n_f >= 1, got {c_l} and {n_f}")));
    }
    let boundary = cfg.boundary(args.solve.boundary.as_deref())?;
    let tolerance = cfg.tolerance(args.solve.tolerance)?;
    let stamp = stamp(&args.solve)?;
    let dir = cfg.output_dir(args.solve.output_dir.as_deref());
    let snapshot = args.snapshot || cfg.run.snapshot.unwrap_or(false);
    let case = cfg.case(preset, boundary, tolerance);

    let mut out = String::new();
    let result = match (&case, snapshot) {
        (Case::Mms { family, .. }, true) => {
            let mut solver = CartesianSolver::new(MmsSolution::new(family.clone())?, c_l, boundary)?.with_tolerance(tolerance);
            let init = solver.initial_state(t0);
            let grid = TimeGrid::new(t0, t_end, n_f)?;
            let mut worst: f64 = 0.0;
            let state = integrate_final(&mut solver, init, &grid, |_, _, s| worst = worst.max(s.balance))?;
            let path = dir.join(format!("{preset}_{stamp}_snapshot.csv"));
            write_atomic(&path, &write_volume(&solver.snapshot(&state, t_end)))?;
            writeln!(out, "wrote {}", path.display()).expect("write to string");
            CaseResult {
                c_l,
                n_f,
                errors: solver.errors(&state, t_end),
                max_balance: worst,
            }
        }
        (_, true) => return Err(CliError::Config("snapshots are only available for exp3".into())),
        _ => run_case(&case, c_l, n_f, t0, t_end)?,
    };
    let mut report = ConvergenceReport::new(preset.name(), case.solver_name(), t0, t_end);
    report.push(&result);
    let mut summary = format!("{preset} c_l={c_l} n_f={n_f} t=[{t0}, {t_end}]\n");
    for (name, e) in &result.errors {
        writeln!(summary, "{name:<6} {e:.6e}").expect("write to string");
    }
    writeln!(summary, "max_balance {:.3e}", result.max_balance).expect("write to string");
    summary.push_str(&write_report(&dir, &stamp, &report)?);
    summary.push_str(&out);
    check_balance(std::slice::from_ref(&result))?;
    Ok(summary)
}

pub fn convergence(args: &ConvergenceArgs) -> CliResult<String> {
    let cfg = FileConfig::load(args.common.config.as_deref())?;
    let preset = cfg.preset(args.common.preset.as_deref(), Preset::Exp1)?;
    let (t0, t_end) = cfg.window(preset, args.solve.t0, args.solve.t_end);
    check_window(t0, t_end)?;
    let rows = match &args.schedule {
        Some(s) => Some(parse_schedule(s)?),
        None => cfg.schedule.rows.clone(),
    };
    let rows = rows.unwrap_or_else(|| RefinementSchedule::for_preset(preset).rows().to_vec());
    let schedule = RefinementSchedule::new(rows, t0, t_end)?;
    let boundary = cfg.boundary(args.solve.boundary.as_deref())?;
    let tolerance = cfg.tolerance(args.solve.tolerance)?;
    let stamp = stamp(&args.solve)?;
    let dir = cfg.output_dir(args.solve.output_dir.as_deref());
    let case = cfg.case(preset, boundary, tolerance);
    let start = std::time::Instant::now();
    let (report, results) = run_schedule(preset.name(), &case, &schedule, |r| {
        eprintln!("done c_l={} n_f={} elapsed={:.2}s", r.c_l, r.n_f, start.elapsed().as_secs_f64());
    })?;
    let mut out = report.to_markdown();
    out.push_str(&write_report(&dir, &stamp, &report)?);
    check_balance(&results)?;
    Ok(out)
}

pub fn export(args: &ExportArgs) -> CliResult<String> {
    let mut cfg = FileConfig::load(args.config.as_deref())?;
    if let Some(a) = &args.amplitudes {
        cfg.mms.amplitudes = Some(parse_list(a, "amplitude")?);
    }
    if let Some(b) = args.b {
        cfg.mms.b = Some(b);
    }
    let samples = match &args.samples {
        Some(s) => match parse_list::<usize>(s, "sample count")?.as_slice() {
            [n] => [*n; 3],
            [a, b, c] => [*a, *b, *c],
            _ => return Err(CliError::Config("--samples takes n or nx,ny,nz".into())),
        },
        None => cfg.export.samples_per_cell.unwrap_or([8; 3]),
    };
    let times = match &args.times {
        Some(t) => parse_list(t, "time")?,
        None => cfg.export.times.clone().unwrap_or_else(|| vec![0.0, 0.5, 1.0]),
    };
    let prefix = args
        .prefix
        .clone()
        .or_else(|| cfg.export.prefix.clone())
        .unwrap_or_else(|| "exp3_mms".into());
    check_stamp(&prefix).map_err(|_| CliError::Config(format!("invalid prefix '{prefix}'")))?;
    let dir = cfg.output_dir(args.output_dir.as_deref());
    let solution = MmsSolution::new(cfg.mms_family())?;
    let grid = ExportGrid {
        samples_per_cell: samples,
    };
    // Fails early on a misaligned lattice before anything is written.
    volume_rows(&solution, grid, &times[..times.len().min(1)])?;
    let export = export_mms(&solution, grid, &times)?;
    let mut out = String::new();
    for (suffix, body) in [
        ("metadata.toml", &export.metadata),
        ("volume.csv", &export.volume),
        ("interface.csv", &export.interface),
        ("boundary.csv", &export.boundary),
    ] {
        let path = dir.join(format!("{prefix}_{suffix}"));
        write_atomic(&path, body)?;
        writeln!(out, "wrote {}", path.display()).expect("write to string");
    }
    Ok(out)
}

pub fn validate(args: &ValidateArgs) -> CliResult<String> {
    let cfg = FileConfig::load(args.config.as_deref())?;
    let presets: Vec<Preset> = match args.preset.as_deref().or(cfg.preset.as_deref()) {
        Some(p) => vec![p.parse()?],
        None => Preset::ALL.to_vec(),
    };
    let samples = args.samples.or(cfg.residual.samples).unwrap_or(1000);
    let step = args.step.or(cfg.residual.step).unwrap_or(1e-4);
    let seed = args.seed.or(cfg.residual.seed).unwrap_or(1);
    let threshold = args.threshold.or(cfg.residual.threshold).unwrap_or(1e-6);
    if samples == 0 {
        return Err(CliError::Config("need at least one sample".into()));
    }
    let mut out = String::new();
    let mut failed = Vec::new();
    for preset in presets {
        let s = cfg.solution(preset)?;
        let (t0, t1) = preset.time_window();
        let report = residual_check(&s, &random_samples(&s.geometry(), samples, t0, t1, seed), step)?;
        let worst = report.overall();
        let verdict = if report.passes(threshold) { "ok" } else { "FAIL" };
        writeln!(out, "{preset}: {} samples, max residual {worst:.3e} {verdict}", report.samples).expect("write to string");
        for (kind, value) in &report.max {
            writeln!(out, "  {:<24} {value:.3e}", kind.name()).expect("write to string");
        }
        if !report.passes(threshold) {
            failed.push(preset.to_string());
        }
    }
    if failed.is_empty() {
        Ok(out)
    } else {
        print!("{out}");
        Err(CliError::Numeric(format!(
            "residuals above {threshold:e} for {}",
            failed.join(", ")
        )))
    }
}
