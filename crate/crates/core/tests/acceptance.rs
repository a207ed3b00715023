//! Acceptance suite: one `criterion N: PASS|FAIL: detail` line per criterion.
//!
//! Runs as a plain binary (`harness = false`) and exits non-zero if any
//! criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use emi_core::analytic::export::{export_mms, parse_boundary, parse_interface, parse_volume, ExportGrid};
use emi_core::analytic::presets::{self, Preset};
use emi_core::analytic::residual::{random_samples, residual_check};
use emi_core::analytic::{ExactFields, IntegralMethod, MmsSolution, SingleCellSolution, TwoCellSolution};
use emi_core::model::GapPair;
use emi_core::radial::{l2_norm, nodes_with_intervals, steady_profile, Shell};
use emi_core::split::{relaxation_substep, RcChannel};
use emi_core::verify::{is_monotone, run_case, run_schedule, Case, CaseResult, ConvergenceReport, RefinementSchedule};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

/// Final-row errors of the reference tables.
fn reference_final_row(preset: Preset) -> Vec<(&'static str, f64)> {
    match preset {
        Preset::Exp1 => vec![("u_e", 4.932e-2), ("u_i1", 1.960e-1), ("v1", 3.246e-1)],
        Preset::Exp2 => vec![
            ("u_e", 3.404e-2),
            ("u_i1", 4.701e-1),
            ("u_i2", 2.573e-1),
            ("v1", 4.182e-1),
            ("v2", 3.174e-1),
            ("w1_2", 1.399e-1),
        ],
        Preset::Exp3 => vec![
            ("u_e", 4.982e-2),
            ("u_i1", 1.295e-2),
            ("u_i2", 3.385e-2),
            ("u_i3", 1.660e-2),
            ("u_i4", 2.021e-2),
            ("v1", 2.021e-2),
            ("v2", 6.181e-2),
            ("v3", 2.338e-2),
            ("v4", 7.824e-2),
            ("w1_2", 5.800e-3),
            ("w1_3", 6.865e-3),
            ("w2_4", 8.464e-3),
            ("w3_4", 9.078e-3),
        ],
    }
}

/// Rendered report files of one ladder.
#[derive(PartialEq)]
struct Rendered {
    csv: String,
    markdown: String,
}

fn render(report: &ConvergenceReport) -> Rendered {
    Rendered {
        csv: report.to_csv(),
        markdown: report.to_markdown(),
    }
}

#[derive(Default)]
struct Ledger {
    balance: f64,
    runs: usize,
}

impl Ledger {
    fn record(&mut self, results: &[CaseResult]) {
        for r in results {
            self.balance = self.balance.max(r.max_balance);
            self.runs += 1;
        }
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut details = Vec::new();
    let mut pass = true;
    for (i, preset) in Preset::ALL.into_iter().enumerate() {
        let solution = preset.solution();
        let (t0, t1) = preset.time_window();
        let samples = random_samples(&solution.geometry(), 1200, t0, t1, 0xE41 + i as u64);
        match residual_check(&solution, &samples, 1e-4) {
            Ok(report) => {
                let worst = report.overall();
                pass &= report.samples >= 1000 && worst <= 1e-6;
                details.push(format!("{preset} {} samples max {worst:.2e}", report.samples));
            }
            Err(e) => {
                pass = false;
                details.push(format!("{preset} error {e}"));
            }
        }
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(10);
    Outcome::new(pass, format!("{}; {:.2} s", details.join(", "), elapsed.as_secs_f64()))
}

fn time_samples(n: usize) -> impl Iterator<Item = f64> {
    (0..=n).map(move |i| 0.25 + 6.75 * i as f64 / n as f64)
}

fn criterion_2() -> Outcome {
    let s = SingleCellSolution::new(presets::exp1_family()).expect("exp1 family");
    let mut worst: f64 = 0.0;
    for t in time_samples(5000) {
        let printed = 14.0 * (-t).exp() + t.cos() - t.sin() + 5.0;
        match s.membrane_potential(t) {
            Ok(v) => worst = worst.max((v - printed).abs()),
            Err(e) => return Outcome::new(false, format!("evaluation failed at t = {t}: {e}")),
        }
    }
    Outcome::new(worst <= 1e-12, format!("max |v - printed form| = {worst:.2e} over 5001 times"))
}

fn criterion_3() -> Outcome {
    let s = TwoCellSolution::new(presets::exp2_family()).expect("exp2 family");
    let v0 = presets::exp2_family().v0;
    let (mut worst_quad, mut worst_form, mut worst_w): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for t in time_samples(400) {
        for k in 1..=2 {
            let closed = 5.0
                + (-t).exp() * (181.0 * v0[k - 1] - 1085.0) / 181.0
                + 20.0 * (-t / 10.0).exp() * (9.0 * t.cos() + 10.0 * t.sin()) / 181.0;
            let quad = match s.membrane_potential_with(k, t, IntegralMethod::Quadrature) {
                Ok(v) => v,
                Err(e) => return Outcome::new(false, format!("quadrature failed at t = {t}: {e}")),
            };
            let auto = s.membrane_potential(k, t).expect("closed form");
            worst_quad = worst_quad.max((closed - quad).abs());
            worst_form = worst_form.max((closed - auto).abs());
        }
        worst_w = worst_w.max((s.gap_potential(t) - (-20.0 * (-t).exp())).abs());
    }
    let pass = worst_quad <= 1e-10 && worst_form <= 1e-10 && worst_w <= 1e-14;
    Outcome::new(
        pass,
        format!(
            "closed form vs quadrature {worst_quad:.2e}, vs evaluator {worst_form:.2e}, w vs -20e^-t {worst_w:.2e}"
        ),
    )
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let c: f64 = rng.gen_range(0.1..10.0);
        let r: f64 = rng.gen_range(0.1..10.0);
        let rest: f64 = rng.gen_range(-10.0..10.0);
        let g: f64 = rng.gen_range(-10.0..10.0);
        let dt: f64 = rng.gen_range(1e-4..2.0);
        let x0: Vec<f64> = (0..4).map(|_| rng.gen_range(-50.0..50.0)).collect();
        let mut x = x0.clone();
        relaxation_substep(&mut x, |_| RcChannel::new(c, r, rest), |_| g, dt);
        let target = rest + g * r;
        for (xn, x0) in x.iter().zip(&x0) {
            let exact = target + (x0 - target) * (-dt / (r * c)).exp();
            worst = worst.max((xn - exact).abs());
        }
    }
    Outcome::new(worst <= 1e-13, format!("max deviation {worst:.2e} over 100 draws"))
}

fn temporal_ladder() -> Result<(ConvergenceReport, Vec<CaseResult>), String> {
    let case = Case::preset(Preset::Exp1);
    let (t0, t1) = Preset::Exp1.time_window();
    let mut report = ConvergenceReport::new("exp1_temporal", case.solver_name(), t0, t1);
    let mut results = Vec::new();
    for n_f in [28, 56, 112, 224] {
        let r = run_case(&case, 0.05, n_f, t0, t1).map_err(|e| e.to_string())?;
        report.push(&r);
        results.push(r);
    }
    Ok((report, results))
}

fn criterion_5(ledger: &mut Ledger) -> (Outcome, Option<Rendered>) {
    let start = Instant::now();
    let (report, results) = match temporal_ladder() {
        Ok(x) => x,
        Err(e) => return (Outcome::new(false, format!("run failed: {e}")), None),
    };
    let elapsed = start.elapsed();
    ledger.record(&results);
    let orders: Vec<Option<f64>> = (1..report.rows.len()).map(|i| report.order(i, "u_e")).collect();
    let pass = orders.iter().all(|o| o.is_some_and(|o| (o - 1.0).abs() <= 0.15)) && elapsed < Duration::from_secs(60);
    let shown: Vec<String> = orders.iter().map(|o| o.map_or("-".into(), |o| format!("{o:.3}"))).collect();
    (
        Outcome::new(pass, format!("u_e orders [{}]; {:.1} s", shown.join(", "), elapsed.as_secs_f64())),
        Some(render(&report)),
    )
}

fn steady_ladder(shell: Shell) -> Result<ConvergenceReport, String> {
    let (a, b) = (3.0, 6.0);
    let exact = |r: f64| match shell {
        Shell::Circle | Shell::Ring => (r / a).ln() / (b / a).ln(),
        Shell::Sphere | Shell::Hemisphere => (1.0 / a - 1.0 / r) / (1.0 / a - 1.0 / b),
    };
    let name = match shell {
        Shell::Circle | Shell::Ring => "steady_log",
        Shell::Sphere | Shell::Hemisphere => "steady_inverse_radius",
    };
    let mut report = ConvergenceReport::new(name, "radial", 0.0, 0.0);
    for h in [0.2, 0.1, 0.05, 0.025] {
        let n = ((b - a) / h).round() as usize;
        let nodes = nodes_with_intervals(a, b, n);
        let u = steady_profile(&nodes, shell, 0.0, 1.0).map_err(|e| e.to_string())?;
        let err: Vec<f64> = nodes.iter().zip(&u).map(|(&r, &u)| u - exact(r)).collect();
        report.push(&CaseResult {
            c_l: h,
            n_f: n,
            errors: vec![("u".into(), l2_norm(&nodes, &err, shell, a, b))],
            max_balance: 0.0,
        });
    }
    Ok(report)
}

fn criterion_6() -> (Outcome, Vec<Rendered>) {
    let mut pass = true;
    let mut details = Vec::new();
    let mut rendered = Vec::new();
    for shell in [Shell::Circle, Shell::Sphere] {
        match steady_ladder(shell) {
            Ok(report) => {
                let orders: Vec<Option<f64>> = (1..report.rows.len()).map(|i| report.order(i, "u")).collect();
                pass &= orders.iter().all(|o| o.is_some_and(|o| (o - 2.0).abs() <= 0.2));
                let shown: Vec<String> = orders.iter().map(|o| o.map_or("-".into(), |o| format!("{o:.3}"))).collect();
                details.push(format!("{} [{}]", report.preset, shown.join(", ")));
                rendered.push(render(&report));
            }
            Err(e) => {
                pass = false;
                details.push(format!("{shell:?} failed: {e}"));
            }
        }
    }
    (Outcome::new(pass, details.join("; ")), rendered)
}

struct LadderCheck {
    failures: Vec<String>,
    rendered: Option<Rendered>,
    seconds: f64,
}

fn table_ladder(preset: Preset, ledger: &mut Ledger) -> LadderCheck {
    let start = Instant::now();
    let outcome = run_schedule(preset.name(), &Case::preset(preset), &RefinementSchedule::for_preset(preset), |_| {});
    let seconds = start.elapsed().as_secs_f64();
    let (report, results) = match outcome {
        Ok(x) => x,
        Err(e) => {
            return LadderCheck {
                failures: vec![format!("{preset} run failed: {e}")],
                rendered: None,
                seconds,
            }
        }
    };
    ledger.record(&results);
    let mut failures = Vec::new();
    for var in report.variables() {
        let col = report.column(&var);
        let rises = usize::from(var.starts_with('w'));
        if !is_monotone(&col, rises) {
            let shown: Vec<String> = col.iter().map(|e| format!("{e:.3e}")).collect();
            failures.push(format!("{preset} {var} not monotone [{}]", shown.join(" ")));
        }
    }
    let last = report.rows.last().expect("non-empty schedule");
    for (var, reference) in reference_final_row(preset) {
        let ours = last.errors.iter().find(|(n, _)| n == var).map(|(_, e)| *e);
        match ours {
            Some(e) if e > 0.0 && e / reference <= 5.0 && reference / e <= 5.0 => {}
            Some(e) => failures.push(format!("{preset} {var} final {e:.3e} vs {reference:.3e}")),
            None => failures.push(format!("{preset} {var} missing")),
        }
    }
    let limit = if preset == Preset::Exp3 { 900.0 } else { 120.0 };
    if seconds >= limit {
        failures.push(format!("{preset} took {seconds:.1} s"));
    }
    LadderCheck {
        failures,
        rendered: Some(render(&report)),
        seconds,
    }
}

fn criterion_7(ledger: &mut Ledger) -> (Outcome, Vec<Option<Rendered>>) {
    let mut failures = Vec::new();
    let mut times = Vec::new();
    let mut rendered = Vec::new();
    for preset in Preset::ALL {
        let check = table_ladder(preset, ledger);
        failures.extend(check.failures);
        times.push(format!("{preset} {:.1} s", check.seconds));
        rendered.push(check.rendered);
    }
    let detail = if failures.is_empty() {
        format!("all ladders monotone, final rows within 5x; {}", times.join(", "))
    } else {
        format!("{}; {}", failures.join("; "), times.join(", "))
    };
    (Outcome::new(failures.is_empty(), detail), rendered)
}

fn criterion_8(ledger: &Ledger) -> Outcome {
    Outcome::new(
        ledger.runs > 0 && ledger.balance <= 1e-9,
        format!("worst relative balance {:.2e} over {} runs", ledger.balance, ledger.runs),
    )
}

fn same(a: f64, b: f64) -> bool {
    a.to_bits() == b.to_bits()
}

fn criterion_9() -> Outcome {
    let s = MmsSolution::new(presets::exp3_family()).expect("exp3 family");
    let grid = ExportGrid { samples_per_cell: [8; 3] };
    let times = [0.0, 0.5, 1.0];
    let export = match export_mms(&s, grid, &times) {
        Ok(e) => e,
        Err(e) => return Outcome::new(false, format!("export failed: {e}")),
    };
    let (volume, interface, boundary) = match (
        parse_volume(&export.volume),
        parse_interface(&export.interface),
        parse_boundary(&export.boundary),
    ) {
        (Ok(v), Ok(i), Ok(b)) => (v, i, b),
        _ => return Outcome::new(false, "exported tables do not parse"),
    };
    let mut mismatches = 0usize;
    let mut origin = Vec::new();
    for r in &volume {
        let (p, t) = (r.point, r.t);
        let k = r.subdomain;
        let sd = s.locate(p).map_or(0, |d| d.id());
        let intra_ok = if k == 0 {
            r.u_i.is_none() && r.f_i.is_none()
        } else {
            r.u_i.is_some_and(|u| same(u, s.u_i(k, p, t))) && r.f_i.is_some_and(|f| same(f, s.f_i(k, p, t)))
        };
        let ok = sd == k
            && r.u_e.is_some_and(|u| same(u, s.u_e(p, t)))
            && r.f_e.is_some_and(|f| same(f, s.f_e(p, t)))
            && intra_ok;
        mismatches += usize::from(!ok);
        if p == [0.0; 3] {
            origin.push(r.f_e.unwrap_or(f64::NAN));
        }
    }
    for r in &interface {
        let (jump, g) = if r.l == 0 {
            (s.v(r.k, r.point, r.t), s.g(r.k, r.point, r.t))
        } else {
            let pair = GapPair::new(r.k, r.l);
            (s.w(pair, r.point, r.t), s.g_gap(pair, r.point, r.t))
        };
        mismatches += usize::from(!(same(r.jump, jump) && same(r.g, g)));
    }
    for r in &boundary {
        let ok = same(r.u_app, s.u_app(r.point, r.t)) && same(r.i_app, s.i_app(r.point, r.normal, r.t));
        mismatches += usize::from(!ok);
    }
    let target = 192.0 * PI * PI;
    let origin_err = origin.iter().map(|f| (f - target).abs()).fold(0.0, f64::max);
    let pass = mismatches == 0 && origin.len() == times.len() && origin_err <= 1e-10;
    Outcome::new(
        pass,
        format!(
            "{} rows, {mismatches} mismatches; f_e at origin off by {origin_err:.2e} at {} times",
            volume.len() + interface.len() + boundary.len(),
            origin.len()
        ),
    )
}

fn criterion_10(first5: Option<Rendered>, first6: Vec<Rendered>, first7: Vec<Option<Rendered>>, ledger: &mut Ledger) -> Outcome {
    let mut differing = Vec::new();
    match (first5, temporal_ladder()) {
        (Some(a), Ok((report, results))) => {
            ledger.record(&results);
            if a != render(&report) {
                differing.push("exp1_temporal".to_string());
            }
        }
        _ => differing.push("exp1_temporal (run failed)".to_string()),
    }
    for (a, shell) in first6.iter().zip([Shell::Circle, Shell::Sphere]) {
        match steady_ladder(shell) {
            Ok(r) if *a == render(&r) => {}
            _ => differing.push(format!("{shell:?} steady")),
        }
    }
    for (a, preset) in first7.into_iter().zip(Preset::ALL) {
        let again = table_ladder(preset, ledger).rendered;
        match (a, again) {
            (Some(a), Some(b)) if a == b => {}
            _ => differing.push(preset.to_string()),
        }
    }
    if differing.is_empty() {
        Outcome::new(true, "csv and markdown reports identical across two runs")
    } else {
        Outcome::new(false, format!("reports differ: {}", differing.join(", ")))
    }
}

fn main() -> ExitCode {
    let mut ledger = Ledger::default();
    let mut outcomes: Vec<(usize, Outcome)> = Vec::new();
    let mut emit = |n: usize, o: Outcome| outcomes.push((n, o));
    emit(1, criterion_1());
    emit(2, criterion_2());
    emit(3, criterion_3());
    emit(4, criterion_4());
    let (o5, r5) = criterion_5(&mut ledger);
    emit(5, o5);
    let (o6, r6) = criterion_6();
    emit(6, o6);
    let (o7, r7) = criterion_7(&mut ledger);
    emit(7, o7);
    emit(9, criterion_9());
    let o10 = criterion_10(r5, r6, r7, &mut ledger);
    emit(8, criterion_8(&ledger));
    emit(10, o10);
    outcomes.sort_by_key(|(n, _)| *n);
    for (n, o) in &outcomes {
        println!("criterion {n}: {}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    let failed: Vec<usize> = outcomes.iter().filter(|(_, o)| !o.pass).map(|(n, _)| *n).collect();
    if failed.is_empty() {
        println!("acceptance: all 10 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
