//! Refinement ladders, observed orders and report tables.

use std::fmt::Write as _;

use crate::analytic::presets::{self, Preset};
use crate::analytic::{MmsFamily, MmsSolution, SingleCellFamily, SingleCellSolution, TwoCellFamily, TwoCellSolution};
use crate::cartesian::{BoundaryData, CartesianSolver, DEFAULT_TOL};
use crate::error::{EmiError, Result};
use crate::radial::RadialSolver;
use crate::split::{integrate_final, SplitProblem, TimeGrid};

/// Version written into the report header.
pub const REPORT_SCHEMA: u32 = 1;
pub const CSV_HEADER: &str = "preset,c_l,n_f,variable,l2_error,observed_order";

/// A family to run, with the solver it implies.
#[derive(Debug, Clone, PartialEq)]
pub enum Case {
    SingleCell(SingleCellFamily),
    TwoCell(TwoCellFamily),
    Mms {
        family: MmsFamily,
        boundary: BoundaryData,
        /// Relative residual target of the CG solves.
        tolerance: f64,
    },
}

impl Case {
    pub fn preset(preset: Preset) -> Self {
        match preset {
            Preset::Exp1 => Case::SingleCell(presets::exp1_family()),
            Preset::Exp2 => Case::TwoCell(presets::exp2_family()),
            Preset::Exp3 => Case::Mms {
                family: presets::exp3_family(),
                boundary: BoundaryData::Zero,
                tolerance: DEFAULT_TOL,
            },
        }
    }

    pub fn solver_name(&self) -> &'static str {
        match self {
            Case::SingleCell(_) | Case::TwoCell(_) => "radial",
            Case::Mms { .. } => "cartesian",
        }
    }
}

/// Rows `(c_l, n_f)` over a time window.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinementSchedule {
    rows: Vec<(f64, usize)>,
    t0: f64,
    t_end: f64,
}

impl RefinementSchedule {
    /// Rows must refine strictly: `c_l` decreasing and `n_f` increasing.
    pub fn new(rows: Vec<(f64, usize)>, t0: f64, t_end: f64) -> Result<Self> {
        if !(t0.is_finite() && t_end.is_finite() && t0 < t_end) {
            return Err(EmiError::Config(format!("time window needs t0 < t_end, got [{t0}, {t_end}]")));
        }
        if let Some((c, n)) = rows.iter().find(|(c, n)| !(*c > 0.0 && c.is_finite()) || *n == 0) {
            return Err(EmiError::Config(format!("invalid schedule row ({c}, {n})")));
        }
        for w in rows.windows(2) {
            if !(w[1].0 < w[0].0 && w[1].1 > w[0].1) {
                return Err(EmiError::Config(format!(
                    "schedule rows must refine strictly: ({}, {}) then ({}, {})",
                    w[0].0, w[0].1, w[1].0, w[1].1
                )));
            }
        }
        Ok(Self { rows, t0, t_end })
    }

    /// The ladders of the reference tables; exp3 uses the admissible grid
    /// spacings 0.125, 0.0625, 0.03125 with `n_f` doubling.
    pub fn for_preset(preset: Preset) -> Self {
        let (t0, t_end) = preset.time_window();
        let rows = match preset {
            Preset::Exp1 => vec![(0.40, 7), (0.28, 14), (0.20, 28), (0.14, 56), (0.10, 112)],
            Preset::Exp2 => vec![(0.40, 10), (0.28, 20), (0.20, 40), (0.14, 80), (0.10, 160)],
            Preset::Exp3 => vec![(0.125, 10), (0.0625, 20), (0.03125, 40)],
        };
        Self::new(rows, t0, t_end).expect("preset schedules are valid")
    }

    pub fn rows(&self) -> &[(f64, usize)] {
        &self.rows
    }

    pub fn window(&self) -> (f64, f64) {
        (self.t0, self.t_end)
    }
}

/// Errors of one run at its final time.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseResult {
    pub c_l: f64,
    pub n_f: usize,
    pub errors: Vec<(String, f64)>,
    /// Largest current-balance defect over all steps.
    pub max_balance: f64,
}

fn drive<P: SplitProblem>(
    problem: &mut P,
    initial: P::State,
    t0: f64,
    t_end: f64,
    n_f: usize,
    balance: impl Fn(&P::State) -> f64,
) -> Result<(P::State, f64)> {
    if t_end == t0 {
        return Ok((initial, 0.0));
    }
    let grid = TimeGrid::new(t0, t_end, n_f)?;
    let mut worst: f64 = 0.0;
    let state = integrate_final(problem, initial, &grid, |_, _, s| worst = worst.max(balance(s)))?;
    Ok((state, worst))
}

/// Initialises from exact data at `t0`, integrates to `t_end` and measures
/// the L² errors there. `t_end == t0` skips integration.
pub fn run_case(case: &Case, c_l: f64, n_f: usize, t0: f64, t_end: f64) -> Result<CaseResult> {
    if !(t_end >= t0) {
        return Err(EmiError::Config(format!("time window needs t0 <= t_end, got [{t0}, {t_end}]")));
    }
    let (errors, max_balance) = match case {
        Case::SingleCell(family) => {
            let mut s = RadialSolver::single_cell(SingleCellSolution::new(family.clone())?, c_l)?;
            let init = s.initial_state(t0);
            let (state, bal) = drive(&mut s, init, t0, t_end, n_f, |s| s.balance)?;
            (s.errors(&state, t_end), bal)
        }
        Case::TwoCell(family) => {
            let mut s = RadialSolver::two_cell(TwoCellSolution::new(family.clone())?, c_l)?;
            let init = s.initial_state(t0);
            let (state, bal) = drive(&mut s, init, t0, t_end, n_f, |s| s.balance)?;
            (s.errors(&state, t_end), bal)
        }
        Case::Mms {
            family,
            boundary,
            tolerance,
        } => {
            let mut s = CartesianSolver::new(MmsSolution::new(family.clone())?, c_l, *boundary)?.with_tolerance(*tolerance);
            let init = s.initial_state(t0);
            let (state, bal) = drive(&mut s, init, t0, t_end, n_f, |s| s.balance)?;
            (s.errors(&state, t_end), bal)
        }
    };
    Ok(CaseResult {
        c_l,
        n_f,
        errors,
        max_balance,
    })
}

/// `log(e_coarse / e_fine) / log(ratio)`; `None` when undefined.
pub fn observed_order(e_coarse: f64, e_fine: f64, ratio: f64) -> Option<f64> {
    if e_coarse > 0.0 && e_fine > 0.0 && ratio > 0.0 && ratio != 1.0 && e_coarse.is_finite() && e_fine.is_finite() {
        Some((e_coarse / e_fine).ln() / ratio.ln())
    } else {
        None
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub c_l: f64,
    pub n_f: usize,
    pub errors: Vec<(String, f64)>,
}

/// Errors per refinement level. Orders use the step-count ratio between
/// consecutive rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub preset: String,
    pub solver: String,
    pub t0: f64,
    pub t_end: f64,
    pub rows: Vec<ReportRow>,
}

impl ConvergenceReport {
    pub fn new(preset: &str, solver: &str, t0: f64, t_end: f64) -> Self {
        Self {
            preset: preset.to_string(),
            solver: solver.to_string(),
            t0,
            t_end,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, result: &CaseResult) {
        self.rows.push(ReportRow {
            c_l: result.c_l,
            n_f: result.n_f,
            errors: result.errors.clone(),
        });
    }

    pub fn variables(&self) -> Vec<String> {
        self.rows
            .first()
            .map(|r| r.errors.iter().map(|(n, _)| n.clone()).collect())
            .unwrap_or_default()
    }

    /// Error of `variable` in every row.
    pub fn column(&self, variable: &str) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.errors.iter().find(|(n, _)| n == variable).map_or(f64::NAN, |(_, e)| *e))
            .collect()
    }

    /// Order of `variable` between row `i - 1` and row `i`.
    pub fn order(&self, i: usize, variable: &str) -> Option<f64> {
        if i == 0 || i >= self.rows.len() {
            return None;
        }
        let col = self.column(variable);
        let ratio = self.rows[i].n_f as f64 / self.rows[i - 1].n_f as f64;
        observed_order(col[i - 1], col[i], ratio)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# emi convergence report, schema {REPORT_SCHEMA}").unwrap();
        writeln!(
            s,
            "# preset={} solver={} t0={:e} t_end={:e}",
            self.preset, self.solver, self.t0, self.t_end
        )
        .unwrap();
        writeln!(s, "{CSV_HEADER}").unwrap();
        for (i, row) in self.rows.iter().enumerate() {
            for (name, e) in &row.errors {
                let order = self.order(i, name).map(|o| format!("{o:e}")).unwrap_or_default();
                writeln!(s, "{},{:e},{},{},{:e},{}", self.preset, row.c_l, row.n_f, name, e, order).unwrap();
            }
        }
        s
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let bad = |line: usize, msg: &str| EmiError::Config(format!("report line {line}: {msg}"));
        let mut lines = text.lines().enumerate();
        let mut report = ConvergenceReport::new("", "", 0.0, 0.0);
        let mut saw_schema = false;
        let mut preset: Option<String> = None;
        for (i, line) in lines.by_ref() {
            if let Some(comment) = line.strip_prefix('#') {
                let comment = comment.trim();
                if let Some(v) = comment.strip_prefix("emi convergence report, schema ") {
                    if v.parse::<u32>().ok() != Some(REPORT_SCHEMA) {
                        return Err(bad(i + 1, "unsupported schema"));
                    }
                    saw_schema = true;
                }
                for kv in comment.split_whitespace() {
                    match kv.split_once('=') {
                        Some(("preset", v)) => preset = Some(v.to_string()),
                        Some(("solver", v)) => report.solver = v.to_string(),
                        Some(("t0", v)) => report.t0 = v.parse().map_err(|_| bad(i + 1, "bad t0"))?,
                        Some(("t_end", v)) => report.t_end = v.parse().map_err(|_| bad(i + 1, "bad t_end"))?,
                        _ => {}
                    }
                }
                continue;
            }
            if line != CSV_HEADER {
                return Err(bad(i + 1, "missing header"));
            }
            break;
        }
        if !saw_schema {
            return Err(bad(1, "missing schema line"));
        }
        for (i, line) in lines {
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 6 {
                return Err(bad(i + 1, "expected 6 fields"));
            }
            match &preset {
                Some(p) if p != f[0] => return Err(bad(i + 1, "mixed presets")),
                _ => preset = Some(f[0].to_string()),
            }
            let c_l: f64 = f[1].parse().map_err(|_| bad(i + 1, "bad c_l"))?;
            let n_f: usize = f[2].parse().map_err(|_| bad(i + 1, "bad n_f"))?;
            let e: f64 = f[4].parse().map_err(|_| bad(i + 1, "bad l2_error"))?;
            let same_row = report.rows.last().is_some_and(|r| r.c_l == c_l && r.n_f == n_f);
            if !same_row {
                report.rows.push(ReportRow {
                    c_l,
                    n_f,
                    errors: Vec::new(),
                });
            }
            report.rows.last_mut().unwrap().errors.push((f[3].to_string(), e));
        }
        report.preset = preset.unwrap_or_default();
        Ok(report)
    }

    /// Rows are refinement levels, columns are variables; a second table
    /// holds the observed orders.
    pub fn to_markdown(&self) -> String {
        let vars = self.variables();
        let mut s = String::new();
        writeln!(s, "# {} ({} solver, t = {} to {})\n", self.preset, self.solver, self.t0, self.t_end).unwrap();
        let header = |s: &mut String| {
            write!(s, "| c_l | n_f |").unwrap();
            for v in &vars {
                write!(s, " {v} |").unwrap();
            }
            writeln!(s).unwrap();
            write!(s, "|---|---|").unwrap();
            for _ in &vars {
                write!(s, "---|").unwrap();
            }
            writeln!(s).unwrap();
        };
        writeln!(s, "L2 errors at t_end:\n").unwrap();
        header(&mut s);
        for row in &self.rows {
            write!(s, "| {} | {} |", row.c_l, row.n_f).unwrap();
            for v in &vars {
                let e = row.errors.iter().find(|(n, _)| n == v).map_or(f64::NAN, |(_, e)| *e);
                write!(s, " {e:.3e} |").unwrap();
            }
            writeln!(s).unwrap();
        }
        writeln!(s, "\nObserved orders (step-count ratio):\n").unwrap();
        header(&mut s);
        for (i, row) in self.rows.iter().enumerate().skip(1) {
            write!(s, "| {} | {} |", row.c_l, row.n_f).unwrap();
            for v in &vars {
                match self.order(i, v) {
                    Some(o) => write!(s, " {o:.2} |").unwrap(),
                    None => write!(s, " - |").unwrap(),
                }
            }
            writeln!(s).unwrap();
        }
        s
    }
}

/// Every row of `schedule`, in order; `progress` sees each finished row.
pub fn run_schedule(
    name: &str,
    case: &Case,
    schedule: &RefinementSchedule,
    mut progress: impl FnMut(&CaseResult),
) -> Result<(ConvergenceReport, Vec<CaseResult>)> {
    let (t0, t_end) = schedule.window();
    let mut report = ConvergenceReport::new(name, case.solver_name(), t0, t_end);
    let mut results = Vec::new();
    for &(c_l, n_f) in schedule.rows() {
        let r = run_case(case, c_l, n_f, t0, t_end)?;
        progress(&r);
        report.push(&r);
        results.push(r);
    }
    Ok((report, results))
}

/// True if `errors` never increases, allowing `allowed_rises` increases.
pub fn is_monotone(errors: &[f64], allowed_rises: usize) -> bool {
    errors.windows(2).filter(|w| !(w[1] < w[0])).count() <= allowed_rises
}
