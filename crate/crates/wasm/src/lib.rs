//! Browser bindings for the EMI toolkit. The `#[wasm_bindgen]` exports are
//! thin wrappers over plain functions so the latter can be tested natively.

use std::fmt::Write;

use emi_core::analytic::presets::Preset;
use emi_core::analytic::{ExactFields, Subdomain};
use emi_core::split::{rc_relax, RcChannel};
use emi_core::verify::{run_schedule, Case, RefinementSchedule};
use wasm_bindgen::prelude::*;

/// Exact fields of `preset` at `(x, y, z)` and time `t`, one `name = value` per line.
pub fn evaluate_fields(preset: &str, x: f64, y: f64, z: f64, t: f64) -> Result<String, String> {
    let preset: Preset = preset.parse().map_err(|e| format!("{e}"))?;
    let s = preset.solution();
    let p = [x, y, z];
    if !t.is_finite() || p.iter().any(|c| !c.is_finite()) {
        return Err("point and time must be finite".into());
    }
    let located = s
        .locate(p)
        .ok_or_else(|| format!("point [{x}, {y}, {z}] lies outside the {preset} domain"))?;
    let mut out = String::new();
    let where_ = match located {
        Subdomain::Extracellular => "extracellular".to_string(),
        Subdomain::Intracellular(k) => format!("intracellular {k}"),
    };
    writeln!(out, "subdomain = {where_}").unwrap();
    writeln!(out, "u_e = {}", s.u_e(p, t)).unwrap();
    writeln!(out, "f_e = {}", s.f_e(p, t)).unwrap();
    for k in 1..=s.n_cells() {
        writeln!(out, "u_i{k} = {}", s.u_i(k, p, t)).unwrap();
        writeln!(out, "v{k} = {}", s.v(k, p, t)).unwrap();
    }
    for pair in s.gaps() {
        writeln!(out, "w{}_{} = {}", pair.low(), pair.high(), s.w(pair, p, t)).unwrap();
    }
    Ok(out)
}

/// Runs a schedule given as `c_l:n_f` pairs and returns the Markdown report.
pub fn convergence_table(preset: &str, schedule: &str) -> Result<String, String> {
    let preset: Preset = preset.parse().map_err(|e| format!("{e}"))?;
    let rows = schedule
        .split(',')
        .map(|item| {
            let (c, n) = item
                .trim()
                .split_once(':')
                .ok_or_else(|| format!("schedule entry '{item}' is not c_l:n_f"))?;
            let c: f64 = c.trim().parse().map_err(|_| format!("bad c_l '{c}'"))?;
            let n: usize = n.trim().parse().map_err(|_| format!("bad n_f '{n}'"))?;
            Ok((c, n))
        })
        .collect::<Result<Vec<_>, String>>()?;
    let (t0, t_end) = preset.time_window();
    let schedule = RefinementSchedule::new(rows, t0, t_end).map_err(|e| e.to_string())?;
    let (report, _) =
        run_schedule(preset.name(), &Case::preset(preset), &schedule, |_| {}).map_err(|e| e.to_string())?;
    Ok(report.to_markdown())
}

/// Trajectory of `C x' = −(x − rest)/R + g` advanced `steps` times by `dt`,
/// starting value included.
pub fn relax_trajectory(x0: f64, c: f64, r: f64, rest: f64, g: f64, dt: f64, steps: usize) -> Result<Vec<f64>, String> {
    if !(c > 0.0 && r > 0.0 && dt > 0.0) {
        return Err("C, R and dt must be positive".into());
    }
    if steps > 100_000 {
        return Err("at most 100000 steps".into());
    }
    let ch = RcChannel::new(c, r, rest);
    let mut x = x0;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(x);
    for _ in 0..steps {
        x = rc_relax(x, &ch, g, dt);
        out.push(x);
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn evaluate(preset: &str, x: f64, y: f64, z: f64, t: f64) -> Result<String, JsError> {
    evaluate_fields(preset, x, y, z, t).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn convergence(preset: &str, schedule: &str) -> Result<String, JsError> {
    convergence_table(preset, schedule).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn relax(x0: f64, c: f64, r: f64, rest: f64, g: f64, dt: f64, steps: usize) -> Result<Vec<f64>, JsError> {
    relax_trajectory(x0, c, r, rest, g, dt, steps).map_err(|e| JsError::new(&e))
}
