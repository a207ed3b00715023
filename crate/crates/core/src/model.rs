//! Model parameters, geometry descriptors and the passive cell model.
//!
//! Cells are numbered from 1. Gap junctions are keyed by unordered cell
//! pairs stored canonically as `(min, max)`, so `(2, 1)` and `(1, 2)` name the
//! same junction.
//!
//! Orientation: the membrane current `I_m^k` is the conductive current density
//! measured along the outward normal of the extracellular domain. On the
//! membrane of cell `k` that normal points into the cell, so
//! `I_m = (σ_e ∇u_e)·n_e = −(σ_i ∇u_i)·n_i` is the current leaving the cell
//! interior. The gap current `I^{k,ℓ}` with `k < ℓ` is the current leaving
//! cell `k` through the junction, and `w^{k,ℓ} = u_i^k − u_i^ℓ`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{EmiError, Result};

/// A point in space. Two-dimensional geometries use `z = 0`.
pub type Point = [f64; 3];

/// Unordered pair of adjacent cells sharing a gap junction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "[usize; 2]", from = "[usize; 2]")]
pub struct GapPair {
    low: usize,
    high: usize,
}

impl GapPair {
    pub fn new(k: usize, l: usize) -> Self {
        Self {
            low: k.min(l),
            high: k.max(l),
        }
    }

    pub fn low(&self) -> usize {
        self.low
    }

    pub fn high(&self) -> usize {
        self.high
    }
}

impl From<[usize; 2]> for GapPair {
    fn from(p: [usize; 2]) -> Self {
        GapPair::new(p[0], p[1])
    }
}

impl From<GapPair> for [usize; 2] {
    fn from(p: GapPair) -> Self {
        [p.low, p.high]
    }
}

impl fmt::Display for GapPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.low, self.high)
    }
}

/// Passive-model parameters shared by every cell and junction of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub sigma_i: f64,
    pub sigma_e: f64,
    /// Membrane capacitance per unit area, indexed by `k - 1`.
    pub cm_membrane: Vec<f64>,
    /// Membrane resistance, indexed by `k - 1`.
    pub rm_membrane: Vec<f64>,
    pub cm_gap: BTreeMap<GapPair, f64>,
    pub rm_gap: BTreeMap<GapPair, f64>,
    pub v_rest: f64,
    pub w_rest: f64,
}

impl ModelParams {
    /// Identical cells and identical junctions.
    #[allow(clippy::too_many_arguments)]
    pub fn uniform(
        n_cells: usize,
        gaps: &[GapPair],
        sigma_i: f64,
        sigma_e: f64,
        cm: f64,
        rm: f64,
        cm_gap: f64,
        rm_gap: f64,
        v_rest: f64,
        w_rest: f64,
    ) -> Self {
        Self {
            sigma_i,
            sigma_e,
            cm_membrane: vec![cm; n_cells],
            rm_membrane: vec![rm; n_cells],
            cm_gap: gaps.iter().map(|&p| (p, cm_gap)).collect(),
            rm_gap: gaps.iter().map(|&p| (p, rm_gap)).collect(),
            v_rest,
            w_rest,
        }
    }

    pub fn n_cells(&self) -> usize {
        self.cm_membrane.len()
    }

    pub fn gaps(&self) -> impl Iterator<Item = GapPair> + '_ {
        self.cm_gap.keys().copied()
    }

    pub fn membrane_capacitance(&self, k: usize) -> f64 {
        self.cm_membrane[k - 1]
    }

    pub fn membrane_resistance(&self, k: usize) -> f64 {
        self.rm_membrane[k - 1]
    }

    pub fn gap_capacitance(&self, pair: GapPair) -> Result<f64> {
        self.cm_gap
            .get(&pair)
            .copied()
            .ok_or_else(|| EmiError::Config(format!("no gap junction {pair} in parameters")))
    }

    pub fn gap_resistance(&self, pair: GapPair) -> Result<f64> {
        self.rm_gap
            .get(&pair)
            .copied()
            .ok_or_else(|| EmiError::Config(format!("no gap junction {pair} in parameters")))
    }
}

/// Passive membrane ionic current `(v − v_rest) / R_m^k`.
pub fn ion_current_membrane(v: f64, params: &ModelParams, k: usize) -> f64 {
    (v - params.v_rest) / params.membrane_resistance(k)
}

/// Passive gap-junction ionic current `(w − w_rest) / R^{k,ℓ}`.
pub fn ion_current_gap(w: f64, params: &ModelParams, pair: GapPair) -> Result<f64> {
    Ok((w - params.w_rest) / params.gap_resistance(pair)?)
}

/// Two-dimensional single cell: disc of radius `r_membrane` with the core
/// `r < r_core` excluded, inside an extracellular ring out to `r_outer`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Annulus {
    pub r_core: f64,
    pub r_membrane: f64,
    pub r_outer: f64,
}

/// Two hemispherical cells (cell 1 in `z > 0`, cell 2 in `z < 0`) joined
/// along the equatorial disc, inside a spherical extracellular shell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HemispherePair {
    pub rho_core: f64,
    pub rho_membrane: f64,
    pub rho_outer: f64,
}

/// A sheet of `nx × ny` identical cuboid cells centred in a box.
///
/// The origin sits at the centre of cell 1; cell `k` at sheet position
/// `(ix, iy)` has `k = 1 + ix + nx·iy` and centre `(ix·α_c, iy·β_c, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellLattice {
    pub nx_cells: usize,
    pub ny_cells: usize,
    pub cell_dims: [f64; 3],
    pub box_dims: [f64; 3],
    pub mms_periods: [f64; 3],
}

impl CellLattice {
    pub fn n_cells(&self) -> usize {
        self.nx_cells * self.ny_cells
    }

    pub fn cell_id(&self, ix: usize, iy: usize) -> usize {
        1 + ix + self.nx_cells * iy
    }

    pub fn cell_position(&self, k: usize) -> (usize, usize) {
        ((k - 1) % self.nx_cells, (k - 1) / self.nx_cells)
    }

    /// Face-sharing neighbours, in canonical order.
    pub fn gaps(&self) -> Vec<GapPair> {
        let mut out = Vec::new();
        for iy in 0..self.ny_cells {
            for ix in 0..self.nx_cells {
                let k = self.cell_id(ix, iy);
                if ix + 1 < self.nx_cells {
                    out.push(GapPair::new(k, self.cell_id(ix + 1, iy)));
                }
                if iy + 1 < self.ny_cells {
                    out.push(GapPair::new(k, self.cell_id(ix, iy + 1)));
                }
            }
        }
        out.sort();
        out
    }

    pub fn sheet_dims(&self) -> [f64; 3] {
        [
            self.nx_cells as f64 * self.cell_dims[0],
            self.ny_cells as f64 * self.cell_dims[1],
            self.cell_dims[2],
        ]
    }

    /// Gap between the sheet and each box wall; equal on opposite sides.
    pub fn margins(&self) -> [f64; 3] {
        let sheet = self.sheet_dims();
        [0, 1, 2].map(|a| 0.5 * (self.box_dims[a] - sheet[a]))
    }

    /// Lower and upper corners of the extracellular box.
    pub fn box_bounds(&self) -> (Point, Point) {
        let (lo, hi) = self.sheet_bounds();
        let m = self.margins();
        ([0, 1, 2].map(|a| lo[a] - m[a]), [0, 1, 2].map(|a| hi[a] + m[a]))
    }

    pub fn sheet_bounds(&self) -> (Point, Point) {
        let d = self.cell_dims;
        let sheet = self.sheet_dims();
        let lo = [-0.5 * d[0], -0.5 * d[1], -0.5 * d[2]];
        (lo, [lo[0] + sheet[0], lo[1] + sheet[1], lo[2] + sheet[2]])
    }

    pub fn cell_bounds(&self, k: usize) -> (Point, Point) {
        let (ix, iy) = self.cell_position(k);
        let d = self.cell_dims;
        let c = [ix as f64 * d[0], iy as f64 * d[1], 0.0];
        (
            [c[0] - 0.5 * d[0], c[1] - 0.5 * d[1], c[2] - 0.5 * d[2]],
            [c[0] + 0.5 * d[0], c[1] + 0.5 * d[1], c[2] + 0.5 * d[2]],
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeometrySpec {
    Annulus2D(Annulus),
    HemispherePair3D(HemispherePair),
    CellLattice3D(CellLattice),
}

impl GeometrySpec {
    pub fn n_cells(&self) -> usize {
        match self {
            GeometrySpec::Annulus2D(_) => 1,
            GeometrySpec::HemispherePair3D(_) => 2,
            GeometrySpec::CellLattice3D(l) => l.n_cells(),
        }
    }

    pub fn gaps(&self) -> Vec<GapPair> {
        match self {
            GeometrySpec::Annulus2D(_) => Vec::new(),
            GeometrySpec::HemispherePair3D(_) => vec![GapPair::new(1, 2)],
            GeometrySpec::CellLattice3D(l) => l.gaps(),
        }
    }
}

/// One violated invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Relative tolerance used for divisibility and alignment checks.
pub(crate) const ALIGN_TOL: f64 = 1e-9;

/// True if `len / unit` is a positive integer up to `ALIGN_TOL`.
pub(crate) fn divides(unit: f64, len: f64) -> bool {
    if !(unit > 0.0 && len > 0.0) || !unit.is_finite() || !len.is_finite() {
        return false;
    }
    let q = len / unit;
    q.round() >= 1.0 && (q - q.round()).abs() <= ALIGN_TOL * q.max(1.0)
}

/// Checks every invariant of the parameters and the geometry.
///
/// Never panics; non-finite inputs are reported as violations.
pub fn validate(params: &ModelParams, geometry: &GeometrySpec) -> Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    let mut push = |field: &str, message: String| {
        out.push(Violation {
            field: field.to_string(),
            message,
        })
    };

    let positive = |x: f64| x.is_finite() && x > 0.0;
    if !positive(params.sigma_i) {
        push("sigma_i", format!("must be finite and > 0, got {}", params.sigma_i));
    }
    if !positive(params.sigma_e) {
        push("sigma_e", format!("must be finite and > 0, got {}", params.sigma_e));
    }
    for (name, vals) in [("cm_membrane", &params.cm_membrane), ("rm_membrane", &params.rm_membrane)] {
        for (i, &x) in vals.iter().enumerate() {
            if !positive(x) {
                push(name, format!("cell {} must be finite and > 0, got {}", i + 1, x));
            }
        }
    }
    for (name, vals) in [("cm_gap", &params.cm_gap), ("rm_gap", &params.rm_gap)] {
        for (pair, &x) in vals {
            if !positive(x) {
                push(name, format!("junction {pair} must be finite and > 0, got {x}"));
            }
        }
    }
    if !params.v_rest.is_finite() {
        push("v_rest", "must be finite".into());
    }
    if !params.w_rest.is_finite() {
        push("w_rest", "must be finite".into());
    }
    if params.rm_membrane.len() != params.cm_membrane.len() {
        push(
            "rm_membrane",
            format!(
                "has {} entries but cm_membrane has {}",
                params.rm_membrane.len(),
                params.cm_membrane.len()
            ),
        );
    }

    let n = geometry.n_cells();
    if params.n_cells() != n {
        push(
            "cm_membrane",
            format!("geometry has {n} cells but parameters describe {}", params.n_cells()),
        );
    }
    for pair in geometry.gaps() {
        if !params.cm_gap.contains_key(&pair) {
            push("cm_gap", format!("missing junction {pair}"));
        }
        if !params.rm_gap.contains_key(&pair) {
            push("rm_gap", format!("missing junction {pair}"));
        }
    }

    match geometry {
        GeometrySpec::Annulus2D(a) => {
            check_radii(&mut push, "annulus", a.r_core, a.r_membrane, a.r_outer);
        }
        GeometrySpec::HemispherePair3D(h) => {
            check_radii(&mut push, "hemisphere_pair", h.rho_core, h.rho_membrane, h.rho_outer);
        }
        GeometrySpec::CellLattice3D(l) => {
            if l.nx_cells == 0 || l.ny_cells == 0 {
                push("lattice", format!("cell counts must be >= 1, got {}x{}", l.nx_cells, l.ny_cells));
            }
            for (a, axis) in ["x", "y", "z"].into_iter().enumerate() {
                let (c, p, b) = (l.cell_dims[a], l.mms_periods[a], l.box_dims[a]);
                if !positive(c) {
                    push("cell_dims", format!("{} must be finite and > 0, got {c}", axis));
                }
                if !positive(p) {
                    push("mms_periods", format!("{} must be finite and > 0, got {p}", axis));
                } else if positive(c) && !divides(p, c) {
                    push(
                        "mms_periods",
                        format!("{} period {p} does not divide cell dimension {c}", axis),
                    );
                }
                if !positive(b) {
                    push("box_dims", format!("{axis} must be finite and > 0, got {b}"));
                }
            }
            let sheet = l.sheet_dims();
            for ((s, b), axis) in sheet.iter().zip(l.box_dims).zip(["x", "y", "z"]) {
                if !(*s < b) {
                    push(
                        "box_dims",
                        format!("cell sheet ({s}) must fit strictly inside the box ({b}) along {axis}"),
                    );
                }
            }
        }
    }

    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

/// [`validate`] folded into a single configuration error.
pub fn ensure_valid(params: &ModelParams, geometry: &GeometrySpec) -> Result<()> {
    validate(params, geometry).map_err(|v| {
        EmiError::Config(v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))
    })
}

fn check_radii(push: &mut impl FnMut(&str, String), field: &str, core: f64, membrane: f64, outer: f64) {
    if !(core.is_finite() && membrane.is_finite() && outer.is_finite()) {
        push(field, "radii must be finite".into());
        return;
    }
    if !(core > 0.0) {
        push(field, format!("core radius must be > 0, got {core}"));
    }
    if !(core < membrane) {
        push(field, format!("core < membrane required, got {core} >= {membrane}"));
    }
    if !(membrane < outer) {
        push(field, format!("membrane < outer required, got {membrane} >= {outer}"));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_params(rm: f64, v_rest: f64) -> ModelParams {
        ModelParams::uniform(1, &[], 1.0, 1.0, 1.0, rm, 1.0, 1.0, v_rest, 0.0)
    }

    #[test]
    fn membrane_current_examples() {
        let p = single_params(1.0, 5.0);
        assert_eq!(ion_current_membrane(5.0, &p, 1), 0.0);
        assert_eq!(ion_current_membrane(20.0, &p, 1), 15.0);
        let p = single_params(2.0, 0.0);
        assert_eq!(ion_current_membrane(3.0, &p, 1), 1.5);
    }

    #[test]
    fn gap_current_examples() {
        let pair = GapPair::new(1, 2);
        let mut p = ModelParams::uniform(2, &[pair], 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0);
        assert_eq!(ion_current_gap(0.0, &p, pair).unwrap(), 0.0);
        assert_eq!(ion_current_gap(-20.0, &p, GapPair::new(2, 1)).unwrap(), -20.0);
        p.rm_gap.insert(pair, 4.0);
        p.w_rest = 1.0;
        assert_eq!(ion_current_gap(1.0, &p, pair).unwrap(), 0.0);
        assert!(matches!(
            ion_current_gap(1.0, &p, GapPair::new(1, 3)),
            Err(EmiError::Config(_))
        ));
    }

    #[test]
    fn validate_annulus() {
        let p = single_params(1.0, 5.0);
        let ok = GeometrySpec::Annulus2D(Annulus { r_core: 3.0, r_membrane: 5.0, r_outer: 6.0 });
        assert!(validate(&p, &ok).is_ok());
        let bad = GeometrySpec::Annulus2D(Annulus { r_core: 5.0, r_membrane: 3.0, r_outer: 6.0 });
        let errs = validate(&p, &bad).unwrap_err();
        assert!(errs.iter().any(|v| v.message.contains("core < membrane required")));
    }

    fn exp3_lattice() -> CellLattice {
        CellLattice {
            nx_cells: 2,
            ny_cells: 2,
            cell_dims: [1.0; 3],
            box_dims: [4.75, 4.75, 1.75],
            mms_periods: [0.5; 3],
        }
    }

    #[test]
    fn validate_lattice_divisibility() {
        let mut l = exp3_lattice();
        let p = ModelParams::uniform(4, &l.gaps(), 1.0, 4.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0);
        assert!(validate(&p, &GeometrySpec::CellLattice3D(l)).is_ok());
        l.mms_periods[0] = 0.3;
        let errs = validate(&p, &GeometrySpec::CellLattice3D(l)).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert!(errs[0].message.contains("does not divide"));
    }

    #[test]
    fn validate_lattice_box_too_small() {
        let mut l = exp3_lattice();
        l.box_dims[2] = 1.0;
        let p = ModelParams::uniform(4, &l.gaps(), 1.0, 4.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0);
        let errs = validate(&p, &GeometrySpec::CellLattice3D(l)).unwrap_err();
        assert!(errs.iter().any(|v| v.message.contains("strictly inside")));
    }

    #[test]
    fn validate_missing_gap_and_count_mismatch() {
        let l = exp3_lattice();
        let p = ModelParams::uniform(3, &[GapPair::new(1, 2)], 1.0, 4.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0);
        let errs = validate(&p, &GeometrySpec::CellLattice3D(l)).unwrap_err();
        assert!(errs.iter().any(|v| v.message.contains("4 cells")));
        assert!(errs.iter().any(|v| v.message.contains("missing junction (1,3)")));
    }

    #[test]
    fn validate_reports_nonfinite() {
        let mut p = single_params(f64::NAN, 5.0);
        p.sigma_e = f64::INFINITY;
        let g = GeometrySpec::Annulus2D(Annulus { r_core: f64::NAN, r_membrane: 5.0, r_outer: 6.0 });
        let errs = validate(&p, &g).unwrap_err();
        assert!(errs.len() >= 3);
    }

    #[test]
    fn lattice_numbering_and_gaps() {
        let l = exp3_lattice();
        assert_eq!(l.cell_id(1, 0), 2);
        assert_eq!(l.cell_id(0, 1), 3);
        assert_eq!(
            l.gaps(),
            vec![GapPair::new(1, 2), GapPair::new(1, 3), GapPair::new(2, 4), GapPair::new(3, 4)]
        );
        assert_eq!(l.margins(), [1.375, 1.375, 0.375]);
        let (lo, hi) = l.box_bounds();
        assert_eq!(lo, [-1.875, -1.875, -0.875]);
        assert_eq!(hi, [2.875, 2.875, 0.875]);
    }

    #[test]
    fn gap_pair_is_unordered() {
        assert_eq!(GapPair::new(2, 1), GapPair::new(1, 2));
        assert_eq!(GapPair::new(2, 1).low(), 1);
    }
}
