//! Manufactured solution on a sheet of cuboid cells.
//!
//! `X = cos(2πx/α_g) cos(2πy/β_g) cos(2πz/γ_g)` has zero normal derivative on
//! every cell face, so `u_e = T_e X` and `u_i^k = T_i^k X` with
//! `T_e = B`, `T_i^k = A^k e^{−t/(C^k R^k)} + B` satisfy all interface
//! conditions with zero membrane and gap currents. The sources `f` and `g`
//! absorb the remaining residuals.

use std::f64::consts::TAU;

use super::{ExactFields, Subdomain};
use crate::error::{EmiError, Result};
use crate::model::{ensure_valid, CellLattice, GapPair, GeometrySpec, ModelParams, Point};

#[derive(Debug, Clone, PartialEq)]
pub struct MmsFamily {
    pub params: ModelParams,
    pub geometry: CellLattice,
    /// `A^k`, indexed by `k - 1`.
    pub amplitudes: Vec<f64>,
    pub b: f64,
}

#[derive(Debug, Clone)]
pub struct MmsSolution {
    family: MmsFamily,
    wavenumber_sq: f64,
}

/// `cos(2πs)`, exactly zero at quarter periods.
pub fn cos_tau(s: f64) -> f64 {
    let r = s - s.round();
    (TAU * (0.25 - r.abs())).sin()
}

/// `sin(2πs)`, exactly zero at half periods.
pub fn sin_tau(s: f64) -> f64 {
    let r = s - s.round();
    if r.abs() > 0.25 {
        (TAU * (0.5f64.copysign(r) - r)).sin()
    } else {
        (TAU * r).sin()
    }
}

impl MmsSolution {
    pub fn new(family: MmsFamily) -> Result<Self> {
        ensure_valid(&family.params, &GeometrySpec::CellLattice3D(family.geometry))?;
        let n = family.geometry.n_cells();
        if family.amplitudes.len() != n {
            return Err(EmiError::Config(format!(
                "{} amplitudes given for {n} cells",
                family.amplitudes.len()
            )));
        }
        if !family.b.is_finite() || family.amplitudes.iter().any(|a| !a.is_finite()) {
            return Err(EmiError::Config("amplitudes must be finite".into()));
        }
        let wavenumber_sq = family.geometry.mms_periods.iter().map(|p| (TAU / p).powi(2)).sum();
        Ok(Self { family, wavenumber_sq })
    }

    pub fn family(&self) -> &MmsFamily {
        &self.family
    }

    pub fn lattice(&self) -> &CellLattice {
        &self.family.geometry
    }

    /// `(2π/α_g)² + (2π/β_g)² + (2π/γ_g)²`.
    pub fn wavenumber_sq(&self) -> f64 {
        self.wavenumber_sq
    }

    pub fn x_profile(&self, p: Point) -> f64 {
        let per = self.family.geometry.mms_periods;
        cos_tau(p[0] / per[0]) * cos_tau(p[1] / per[1]) * cos_tau(p[2] / per[2])
    }

    pub fn grad_x_profile(&self, p: Point) -> [f64; 3] {
        let per = self.family.geometry.mms_periods;
        let s = [0, 1, 2].map(|a| p[a] / per[a]);
        let c = s.map(cos_tau);
        let sn = s.map(sin_tau);
        [
            -TAU / per[0] * sn[0] * c[1] * c[2],
            -TAU / per[1] * c[0] * sn[1] * c[2],
            -TAU / per[2] * c[0] * c[1] * sn[2],
        ]
    }

    fn tau(&self, k: usize) -> f64 {
        if !self.valid_cell(k) {
            return f64::NAN;
        }
        self.family.params.membrane_capacitance(k) * self.family.params.membrane_resistance(k)
    }

    fn amplitude(&self, k: usize) -> f64 {
        self.family.amplitudes.get(k.wrapping_sub(1)).copied().unwrap_or(f64::NAN)
    }

    /// `T_i^k(t) − T_e(t)`.
    fn excess(&self, k: usize, t: f64) -> f64 {
        self.amplitude(k) * (-t / self.tau(k)).exp()
    }

    fn excess_rate(&self, k: usize, t: f64) -> f64 {
        -self.excess(k, t) / self.tau(k)
    }

    pub fn t_e(&self, _t: f64) -> f64 {
        self.family.b
    }

    pub fn t_i(&self, k: usize, t: f64) -> f64 {
        self.excess(k, t) + self.family.b
    }

    fn valid_cell(&self, k: usize) -> bool {
        (1..=self.family.geometry.n_cells()).contains(&k)
    }

    /// Outward normal of cell `k` on the face of its box nearest to `p`.
    pub fn cell_normal(&self, k: usize, p: Point) -> [f64; 3] {
        let (lo, hi) = self.family.geometry.cell_bounds(k);
        let mut best = (f64::INFINITY, [0.0; 3]);
        for a in 0..3 {
            for (d, sign) in [((p[a] - lo[a]).abs(), -1.0), ((hi[a] - p[a]).abs(), 1.0)] {
                if d < best.0 {
                    let mut n = [0.0; 3];
                    n[a] = sign;
                    best = (d, n);
                }
            }
        }
        best.1
    }

    /// Unit normal of the shared face pointing from `pair.low()` to `pair.high()`.
    pub fn gap_normal(&self, pair: GapPair) -> Option<[f64; 3]> {
        let l = &self.family.geometry;
        let (a, b) = (pair.low(), pair.high());
        if !self.valid_cell(a) || !self.valid_cell(b) {
            return None;
        }
        let (ax, ay) = l.cell_position(a);
        let (bx, by) = l.cell_position(b);
        match (bx as isize - ax as isize, by as isize - ay as isize) {
            (1, 0) => Some([1.0, 0.0, 0.0]),
            (0, 1) => Some([0.0, 1.0, 0.0]),
            _ => None,
        }
    }
}

impl ExactFields for MmsSolution {
    fn params(&self) -> &ModelParams {
        &self.family.params
    }

    fn geometry(&self) -> GeometrySpec {
        GeometrySpec::CellLattice3D(self.family.geometry)
    }

    fn n_cells(&self) -> usize {
        self.family.geometry.n_cells()
    }

    fn gaps(&self) -> Vec<GapPair> {
        self.family.geometry.gaps()
    }

    fn locate(&self, p: Point) -> Option<Subdomain> {
        let l = &self.family.geometry;
        let (lo, hi) = l.box_bounds();
        if (0..3).any(|a| !(p[a] >= lo[a] && p[a] <= hi[a])) {
            return None;
        }
        for k in 1..=l.n_cells() {
            let (clo, chi) = l.cell_bounds(k);
            if (0..3).all(|a| p[a] >= clo[a] && p[a] <= chi[a]) {
                return Some(Subdomain::Intracellular(k));
            }
        }
        Some(Subdomain::Extracellular)
    }

    fn u_e(&self, p: Point, t: f64) -> f64 {
        self.t_e(t) * self.x_profile(p)
    }

    fn u_i(&self, k: usize, p: Point, t: f64) -> f64 {
        self.t_i(k, t) * self.x_profile(p)
    }

    fn grad_u_e(&self, p: Point, t: f64) -> [f64; 3] {
        self.grad_x_profile(p).map(|g| self.t_e(t) * g)
    }

    fn grad_u_i(&self, k: usize, p: Point, t: f64) -> [f64; 3] {
        self.grad_x_profile(p).map(|g| self.t_i(k, t) * g)
    }

    fn v(&self, k: usize, p: Point, t: f64) -> f64 {
        self.excess(k, t) * self.x_profile(p)
    }

    fn w(&self, pair: GapPair, p: Point, t: f64) -> f64 {
        (self.excess(pair.low(), t) - self.excess(pair.high(), t)) * self.x_profile(p)
    }

    fn i_m(&self, k: usize, p: Point, t: f64) -> f64 {
        if !self.valid_cell(k) {
            return f64::NAN;
        }
        let n_i = self.cell_normal(k, p);
        -self.family.params.sigma_e * super::dot(self.grad_u_e(p, t), n_i)
    }

    fn i_gap(&self, pair: GapPair, p: Point, t: f64) -> f64 {
        match self.gap_normal(pair) {
            Some(n) => -self.family.params.sigma_i * super::dot(self.grad_u_i(pair.low(), p, t), n),
            None => f64::NAN,
        }
    }

    fn f_e(&self, p: Point, t: f64) -> f64 {
        self.family.params.sigma_e * self.wavenumber_sq * self.u_e(p, t)
    }

    fn f_i(&self, k: usize, p: Point, t: f64) -> f64 {
        self.family.params.sigma_i * self.wavenumber_sq * self.u_i(k, p, t)
    }

    fn g(&self, k: usize, _p: Point, _t: f64) -> f64 {
        if !self.valid_cell(k) {
            return f64::NAN;
        }
        -self.family.params.v_rest / self.family.params.membrane_resistance(k)
    }

    /// `C^{kℓ} ∂w/∂t + (w − w_rest)/R^{kℓ}`, the source that balances the
    /// gap ODE given zero gap current.
    fn g_gap(&self, pair: GapPair, p: Point, t: f64) -> f64 {
        let prm = &self.family.params;
        let (Ok(c), Ok(r)) = (prm.gap_capacitance(pair), prm.gap_resistance(pair)) else {
            return f64::NAN;
        };
        let x = self.x_profile(p);
        let dw = (self.excess_rate(pair.low(), t) - self.excess_rate(pair.high(), t)) * x;
        c * dw + (self.w(pair, p, t) - prm.w_rest) / r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::presets;
    use std::f64::consts::PI;

    #[test]
    fn reduced_trig_is_exact_at_zeros() {
        for s in [0.25, 0.75, -0.25, 3.75, -3.75, 1e6 + 0.25] {
            assert_eq!(cos_tau(s), 0.0, "{s}");
        }
        for s in [0.0, 0.5, -0.5, 1.0, 7.5, -2.0] {
            assert_eq!(sin_tau(s), 0.0, "{s}");
        }
        for s in [0.1, 0.37, -0.61, 2.2, 0.3] {
            assert!((cos_tau(s) - (TAU * s).cos()).abs() < 1e-14);
            assert!((sin_tau(s) - (TAU * s).sin()).abs() < 1e-14);
        }
    }

    #[test]
    fn manufactured_preset_values() {
        let s = MmsSolution::new(presets::exp3_family()).unwrap();
        let o = [0.0; 3];
        assert_eq!(s.u_i(1, o, 0.0), 2.0);
        assert_eq!(s.v(1, o, 0.0), 1.0);
        assert!((s.f_e(o, 0.3) - 192.0 * PI * PI).abs() < 1e-10);
        let p = [0.1, -0.2, 0.3];
        let oracle = 192.0 * PI * PI * (4.0 * PI * 0.1).cos() * (4.0 * PI * 0.2).cos() * (4.0 * PI * 0.3).cos();
        assert!((s.f_e(p, 0.0) - oracle).abs() < 1e-9);
        for k in 1..=4 {
            assert_eq!(s.g(k, p, 0.5), 0.0);
        }
        for pair in s.gaps() {
            assert!(s.g_gap(pair, [0.5, 0.1, 0.2], 0.4).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_family_is_identically_zero() {
        let mut fam = presets::exp3_family();
        fam.b = 0.0;
        fam.amplitudes = vec![0.0; 4];
        let s = MmsSolution::new(fam).unwrap();
        let p = [0.3, 0.7, -0.1];
        assert_eq!(s.u_e(p, 0.2), 0.0);
        assert_eq!(s.u_i(3, p, 0.2), 0.0);
        assert_eq!(s.f_e(p, 0.2), 0.0);
        assert_eq!(s.f_i(2, p, 0.2), 0.0);
        assert_eq!(s.g_gap(GapPair::new(1, 2), p, 0.2), 0.0);
    }

    #[test]
    fn exact_gap_source_matches_textbook_form_for_identical_cells() {
        // With equal C^k R^k the B contributions cancel and the source reduces to
        // (1/R − C_g/(C R)) u_i^k − (1/R − C_g/(C R)) u_i^ℓ − w_rest/R.
        let mut fam = presets::exp3_family();
        fam.params.cm_gap.insert(GapPair::new(1, 2), 0.7);
        fam.params.rm_gap.insert(GapPair::new(1, 2), 2.5);
        fam.params.w_rest = 0.3;
        let s = MmsSolution::new(fam).unwrap();
        let pair = GapPair::new(1, 2);
        let (p, t) = ([0.5, 0.2, -0.1], 0.37);
        let coef = 1.0 / 2.5 - 0.7 / 1.0;
        let oracle = coef * s.u_i(1, p, t) - coef * s.u_i(2, p, t) - 0.3 / 2.5;
        assert!((s.g_gap(pair, p, t) - oracle).abs() < 1e-14);
    }

    #[test]
    fn boundary_trace_vanishes_on_preset_box() {
        let s = MmsSolution::new(presets::exp3_family()).unwrap();
        let (lo, hi) = s.lattice().box_bounds();
        for p in [[lo[0], 0.3, 0.1], [hi[0], -1.1, 0.4], [0.2, lo[1], 0.0], [0.7, 1.9, hi[2]]] {
            assert_eq!(s.u_app(p, 0.5), 0.0);
        }
    }

    #[test]
    fn normals_and_currents() {
        let s = MmsSolution::new(presets::exp3_family()).unwrap();
        assert_eq!(s.cell_normal(1, [0.5, 0.1, 0.1]), [1.0, 0.0, 0.0]);
        assert_eq!(s.cell_normal(4, [1.2, 1.1, -0.5]), [0.0, 0.0, -1.0]);
        assert_eq!(s.gap_normal(GapPair::new(1, 3)), Some([0.0, 1.0, 0.0]));
        assert_eq!(s.gap_normal(GapPair::new(1, 4)), None);
        assert_eq!(s.i_m(1, [-0.5, 0.13, 0.2], 0.3), 0.0);
        assert_eq!(s.i_gap(GapPair::new(1, 2), [0.5, 0.13, 0.2], 0.3), 0.0);
    }
}
