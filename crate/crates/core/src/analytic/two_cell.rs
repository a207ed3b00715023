//! Two identical hemispherical cells joined along their equatorial disc.
//!
//! `u_e = −A/(σ_e ρ) + A₂`, `u_i^k = −A/(σ_i ρ) + v^k + A₂`, `I_m^k = −A/ρ₁²`,
//! no current through the junction, and `w = (v₀¹ − v₀²) e^{−t/CR}`.

use super::{conductivities_equal, membrane_integral, ExactFields, FreeCoefficient, IntegralMethod, Subdomain};
use crate::error::{EmiError, Result};
use crate::model::{ensure_valid, GapPair, GeometrySpec, HemispherePair, ModelParams, Point};

const REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct TwoCellFamily {
    pub params: ModelParams,
    pub geometry: HemispherePair,
    pub a: FreeCoefficient,
    pub a2: FreeCoefficient,
    pub v0: [f64; 2],
    pub w0: f64,
}

#[derive(Debug, Clone)]
pub struct TwoCellSolution {
    family: TwoCellFamily,
    gap: GapPair,
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL_TOL * a.abs().max(b.abs()).max(1.0)
}

impl TwoCellSolution {
    pub fn new(family: TwoCellFamily) -> Result<Self> {
        let gap = GapPair::new(1, 2);
        ensure_valid(&family.params, &GeometrySpec::HemispherePair3D(family.geometry))?;
        let p = &family.params;
        let violation = |msg: String| Err(EmiError::FamilyViolation(msg));
        if !conductivities_equal(p) {
            return violation(format!(
                "two-cell family requires sigma_i == sigma_e, got {} and {}",
                p.sigma_i, p.sigma_e
            ));
        }
        let (c1, c2) = (p.membrane_capacitance(1), p.membrane_capacitance(2));
        let (r1, r2) = (p.membrane_resistance(1), p.membrane_resistance(2));
        if !close(c1, c2) || !close(r1, r2) {
            return violation(format!(
                "cells must be identical, got C=({c1},{c2}) R=({r1},{r2})"
            ));
        }
        let [v01, v02] = family.v0;
        if !(v01.is_finite() && v02.is_finite() && family.w0.is_finite()) {
            return Err(EmiError::Config("initial potentials must be finite".into()));
        }
        if p.w_rest != 0.0 {
            return violation(format!("w_rest must be 0, got {}", p.w_rest));
        }
        if !close(family.w0, v01 - v02) {
            return violation(format!(
                "w0 = {} is inconsistent with v0 = ({v01}, {v02}); the jump definition forces w0 = v0_1 - v0_2",
                family.w0
            ));
        }
        if !close(v01, v02) {
            let gap_tau = p.gap_capacitance(gap)? * p.gap_resistance(gap)?;
            if !close(gap_tau, c1 * r1) {
                return violation(format!(
                    "unequal initial potentials need C12*R12 == C*R, got {gap_tau} and {}",
                    c1 * r1
                ));
            }
        }
        Ok(Self { family, gap })
    }

    pub fn family(&self) -> &TwoCellFamily {
        &self.family
    }

    pub fn hemispheres(&self) -> HemispherePair {
        self.family.geometry
    }

    pub fn membrane_potential_with(&self, k: usize, t: f64, method: IntegralMethod) -> Result<f64> {
        if !(k == 1 || k == 2) {
            return Err(EmiError::Domain(format!("two-cell family has no cell {k}")));
        }
        let p = &self.family.params;
        let rho1 = self.family.geometry.rho_membrane;
        membrane_integral(
            p.membrane_capacitance(k),
            p.membrane_resistance(k),
            p.v_rest,
            self.family.v0[k - 1],
            &self.family.a,
            -1.0 / (rho1 * rho1),
            t,
            method,
        )
    }

    pub fn membrane_potential(&self, k: usize, t: f64) -> Result<f64> {
        self.membrane_potential_with(k, t, IntegralMethod::Auto)
    }

    pub fn gap_potential(&self, t: f64) -> f64 {
        let p = &self.family.params;
        let tau = p.membrane_capacitance(1) * p.membrane_resistance(1);
        (self.family.v0[0] - self.family.v0[1]) * (-t / tau).exp()
    }

    fn radial_gradient(&self, p: Point, t: f64, sigma: f64) -> [f64; 3] {
        let rho2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
        let s = self.family.a.eval(t) / (sigma * rho2 * rho2.sqrt());
        [s * p[0], s * p[1], s * p[2]]
    }
}

impl ExactFields for TwoCellSolution {
    fn params(&self) -> &ModelParams {
        &self.family.params
    }

    fn geometry(&self) -> GeometrySpec {
        GeometrySpec::HemispherePair3D(self.family.geometry)
    }

    fn n_cells(&self) -> usize {
        2
    }

    fn gaps(&self) -> Vec<GapPair> {
        vec![self.gap]
    }

    fn locate(&self, p: Point) -> Option<Subdomain> {
        let g = self.family.geometry;
        let rho = super::norm(p);
        if rho < g.rho_core || rho > g.rho_outer || !rho.is_finite() {
            None
        } else if rho <= g.rho_membrane {
            Some(Subdomain::Intracellular(if p[2] >= 0.0 { 1 } else { 2 }))
        } else {
            Some(Subdomain::Extracellular)
        }
    }

    fn u_e(&self, p: Point, t: f64) -> f64 {
        -self.family.a.eval(t) / (self.family.params.sigma_e * super::norm(p)) + self.family.a2.eval(t)
    }

    fn u_i(&self, k: usize, p: Point, t: f64) -> f64 {
        -self.family.a.eval(t) / (self.family.params.sigma_i * super::norm(p)) + self.v(k, p, t) + self.family.a2.eval(t)
    }

    fn grad_u_e(&self, p: Point, t: f64) -> [f64; 3] {
        self.radial_gradient(p, t, self.family.params.sigma_e)
    }

    fn grad_u_i(&self, _k: usize, p: Point, t: f64) -> [f64; 3] {
        self.radial_gradient(p, t, self.family.params.sigma_i)
    }

    /// NaN for an unknown cell or failed quadrature.
    fn v(&self, k: usize, _p: Point, t: f64) -> f64 {
        self.membrane_potential(k, t).unwrap_or(f64::NAN)
    }

    fn w(&self, pair: GapPair, _p: Point, t: f64) -> f64 {
        if pair == self.gap {
            self.gap_potential(t)
        } else {
            f64::NAN
        }
    }

    fn i_m(&self, _k: usize, _p: Point, t: f64) -> f64 {
        let rho1 = self.family.geometry.rho_membrane;
        -self.family.a.eval(t) / (rho1 * rho1)
    }

    fn i_gap(&self, pair: GapPair, _p: Point, _t: f64) -> f64 {
        if pair == self.gap {
            0.0
        } else {
            f64::NAN
        }
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
