//! Radially symmetric solution for one 2-D cell with `σ_i = σ_e`.
//!
//! `u_e = A ln r / σ_e + A₂`, `u_i = A ln r / σ_i + v + A₂`, `I_m = −A / r₁`,
//! and `v` solves the membrane ODE driven by `I_m`.

use super::{conductivities_equal, membrane_integral, ExactFields, FreeCoefficient, IntegralMethod, Subdomain};
use crate::error::{EmiError, Result};
use crate::model::{ensure_valid, Annulus, GapPair, GeometrySpec, ModelParams, Point};

#[derive(Debug, Clone, PartialEq)]
pub struct SingleCellFamily {
    pub params: ModelParams,
    pub geometry: Annulus,
    pub a: FreeCoefficient,
    pub a2: FreeCoefficient,
    pub v0: f64,
}

#[derive(Debug, Clone)]
pub struct SingleCellSolution {
    family: SingleCellFamily,
}

impl SingleCellSolution {
    pub fn new(family: SingleCellFamily) -> Result<Self> {
        ensure_valid(&family.params, &GeometrySpec::Annulus2D(family.geometry))?;
        if !conductivities_equal(&family.params) {
            return Err(EmiError::FamilyViolation(format!(
                "single-cell family requires sigma_i == sigma_e, got {} and {}",
                family.params.sigma_i, family.params.sigma_e
            )));
        }
        if !family.v0.is_finite() {
            return Err(EmiError::Config(format!("v0 must be finite, got {}", family.v0)));
        }
        Ok(Self { family })
    }

    pub fn family(&self) -> &SingleCellFamily {
        &self.family
    }

    pub fn annulus(&self) -> Annulus {
        self.family.geometry
    }

    /// `v(t)` with the integration method made explicit.
    pub fn membrane_potential_with(&self, t: f64, method: IntegralMethod) -> Result<f64> {
        let p = &self.family.params;
        membrane_integral(
            p.membrane_capacitance(1),
            p.membrane_resistance(1),
            p.v_rest,
            self.family.v0,
            &self.family.a,
            -1.0 / self.family.geometry.r_membrane,
            t,
            method,
        )
    }

    pub fn membrane_potential(&self, t: f64) -> Result<f64> {
        self.membrane_potential_with(t, IntegralMethod::Auto)
    }

    fn radius(p: Point) -> f64 {
        p[0].hypot(p[1])
    }

    fn radial_gradient(&self, p: Point, t: f64, sigma: f64) -> [f64; 3] {
        let r2 = p[0] * p[0] + p[1] * p[1];
        let s = self.family.a.eval(t) / (sigma * r2);
        [s * p[0], s * p[1], 0.0]
    }
}

impl ExactFields for SingleCellSolution {
    fn params(&self) -> &ModelParams {
        &self.family.params
    }

    fn geometry(&self) -> GeometrySpec {
        GeometrySpec::Annulus2D(self.family.geometry)
    }

    fn n_cells(&self) -> usize {
        1
    }

    fn gaps(&self) -> Vec<GapPair> {
        Vec::new()
    }

    fn locate(&self, p: Point) -> Option<Subdomain> {
        let g = self.family.geometry;
        let r = Self::radius(p);
        if r < g.r_core || r > g.r_outer || !r.is_finite() {
            None
        } else if r <= g.r_membrane {
            Some(Subdomain::Intracellular(1))
        } else {
            Some(Subdomain::Extracellular)
        }
    }

    fn u_e(&self, p: Point, t: f64) -> f64 {
        self.family.a.eval(t) * Self::radius(p).ln() / self.family.params.sigma_e + self.family.a2.eval(t)
    }

    fn u_i(&self, _k: usize, p: Point, t: f64) -> f64 {
        self.family.a.eval(t) * Self::radius(p).ln() / self.family.params.sigma_i
            + self.v(1, p, t)
            + self.family.a2.eval(t)
    }

    fn grad_u_e(&self, p: Point, t: f64) -> [f64; 3] {
        self.radial_gradient(p, t, self.family.params.sigma_e)
    }

    fn grad_u_i(&self, _k: usize, p: Point, t: f64) -> [f64; 3] {
        self.radial_gradient(p, t, self.family.params.sigma_i)
    }

    /// Quadrature failure, only possible for signals without a closed form, yields NaN.
    fn v(&self, _k: usize, _p: Point, t: f64) -> f64 {
        self.membrane_potential(t).unwrap_or(f64::NAN)
    }

    fn w(&self, _pair: GapPair, _p: Point, _t: f64) -> f64 {
        f64::NAN
    }

    fn i_m(&self, _k: usize, _p: Point, t: f64) -> f64 {
        -self.family.a.eval(t) / self.family.geometry.r_membrane
    }

    fn i_gap(&self, _pair: GapPair, _p: Point, _t: f64) -> f64 {
        f64::NAN
    }

    fn f_e(&self, _p: Point, _t: f64) -> f64 {
        0.0
    }

    fn f_i(&self, _k: usize, _p: Point, _t: f64) -> f64 {
        0.0
    }

    fn g(&self, _k: usize, _p: Point, _t: f64) -> f64 {
        0.0
    }

    fn g_gap(&self, _pair: GapPair, _p: Point, _t: f64) -> f64 {
        0.0
    }
}
