//! Exact solutions of the passive EMI model.
//!
//! Three families are provided: a single 2-D cell in polar coordinates, two
//! hemispherical cells joined by a gap junction, and a manufactured solution
//! for a sheet of cuboid cells. Every family is exposed through
//! [`ExactFields`], a set of pure evaluators of `(point, time)`.

pub mod export;
pub mod mms;
pub mod presets;
pub mod quadrature;
pub mod residual;
pub mod signal;
pub mod single_cell;
pub mod two_cell;

use std::fmt;

use crate::error::{EmiError, Result};
use crate::model::{GapPair, GeometrySpec, ModelParams, Point};

pub use mms::{MmsFamily, MmsSolution};
pub use quadrature::QuadratureOptions;
pub use signal::{FreeCoefficient, SignalTerm};
pub use single_cell::{SingleCellFamily, SingleCellSolution};
pub use two_cell::{TwoCellFamily, TwoCellSolution};

/// Which potential a point belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Subdomain {
    Extracellular,
    Intracellular(usize),
}

impl Subdomain {
    /// `0` for the extracellular space, `k` for cell `k`.
    pub fn id(&self) -> usize {
        match self {
            Subdomain::Extracellular => 0,
            Subdomain::Intracellular(k) => *k,
        }
    }
}

impl fmt::Display for Subdomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subdomain::Extracellular => write!(f, "extracellular"),
            Subdomain::Intracellular(k) => write!(f, "intracellular({k})"),
        }
    }
}

/// Space-time evaluators of an exact solution.
///
/// Potentials are evaluated from their closed forms at any point, including
/// points outside the subdomain they belong to; use [`ExactFields::locate`]
/// to classify points. Membrane and gap quantities expect a point on the
/// corresponding interface.
pub trait ExactFields {
    fn params(&self) -> &ModelParams;
    fn geometry(&self) -> GeometrySpec;
    fn n_cells(&self) -> usize;
    fn gaps(&self) -> Vec<GapPair>;
    /// The subdomain containing `p`, or `None` outside the computational domain.
    fn locate(&self, p: Point) -> Option<Subdomain>;

    fn u_e(&self, p: Point, t: f64) -> f64;
    fn u_i(&self, k: usize, p: Point, t: f64) -> f64;
    fn grad_u_e(&self, p: Point, t: f64) -> [f64; 3];
    fn grad_u_i(&self, k: usize, p: Point, t: f64) -> [f64; 3];
    fn v(&self, k: usize, p: Point, t: f64) -> f64;
    fn w(&self, pair: GapPair, p: Point, t: f64) -> f64;
    /// Membrane current of cell `k`, positive out of the cell.
    fn i_m(&self, k: usize, p: Point, t: f64) -> f64;
    /// Gap current, positive out of `pair.low()`.
    fn i_gap(&self, pair: GapPair, p: Point, t: f64) -> f64;
    /// Source in `−∇·(σ_e ∇u_e) = f_e`.
    fn f_e(&self, p: Point, t: f64) -> f64;
    fn f_i(&self, k: usize, p: Point, t: f64) -> f64;
    /// Extra source in `C ∂v/∂t = I_m − I_ion(v) + g`.
    fn g(&self, k: usize, p: Point, t: f64) -> f64;
    fn g_gap(&self, pair: GapPair, p: Point, t: f64) -> f64;
    /// Dirichlet data on the outer boundary.
    fn u_app(&self, p: Point, t: f64) -> f64 {
        self.u_e(p, t)
    }
    /// Neumann data `(σ_e ∇u_e)·n` on the outer boundary with outward normal `n`.
    fn i_app(&self, p: Point, normal: [f64; 3], t: f64) -> f64 {
        let g = self.grad_u_e(p, t);
        self.params().sigma_e * dot(g, normal)
    }
}

/// One of the three analytic families.
#[derive(Debug, Clone)]
pub enum AnalyticSolution {
    SingleCell(SingleCellSolution),
    TwoCell(TwoCellSolution),
    Mms(MmsSolution),
}

impl AnalyticSolution {
    fn inner(&self) -> &dyn ExactFields {
        match self {
            AnalyticSolution::SingleCell(s) => s,
            AnalyticSolution::TwoCell(s) => s,
            AnalyticSolution::Mms(s) => s,
        }
    }
}

macro_rules! forward {
    ($($name:ident($($arg:ident: $ty:ty),*) -> $ret:ty;)*) => {
        $(fn $name(&self, $($arg: $ty),*) -> $ret { self.inner().$name($($arg),*) })*
    };
}

impl ExactFields for AnalyticSolution {
    fn params(&self) -> &ModelParams {
        self.inner().params()
    }

    fn geometry(&self) -> GeometrySpec {
        self.inner().geometry()
    }

    forward! {
        n_cells() -> usize;
        gaps() -> Vec<GapPair>;
        locate(p: Point) -> Option<Subdomain>;
        u_e(p: Point, t: f64) -> f64;
        u_i(k: usize, p: Point, t: f64) -> f64;
        grad_u_e(p: Point, t: f64) -> [f64; 3];
        grad_u_i(k: usize, p: Point, t: f64) -> [f64; 3];
        v(k: usize, p: Point, t: f64) -> f64;
        w(pair: GapPair, p: Point, t: f64) -> f64;
        i_m(k: usize, p: Point, t: f64) -> f64;
        i_gap(pair: GapPair, p: Point, t: f64) -> f64;
        f_e(p: Point, t: f64) -> f64;
        f_i(k: usize, p: Point, t: f64) -> f64;
        g(k: usize, p: Point, t: f64) -> f64;
        g_gap(pair: GapPair, p: Point, t: f64) -> f64;
        u_app(p: Point, t: f64) -> f64;
        i_app(p: Point, normal: [f64; 3], t: f64) -> f64;
    }
}

/// Builds the single-cell polar family.
pub fn build_single_cell(family: SingleCellFamily) -> Result<AnalyticSolution> {
    SingleCellSolution::new(family).map(AnalyticSolution::SingleCell)
}

/// Builds the two-hemisphere family.
pub fn build_two_cell(family: TwoCellFamily) -> Result<AnalyticSolution> {
    TwoCellSolution::new(family).map(AnalyticSolution::TwoCell)
}

/// Builds the manufactured solution on a cell lattice.
pub fn build_mms(family: MmsFamily) -> Result<AnalyticSolution> {
    MmsSolution::new(family).map(AnalyticSolution::Mms)
}

/// How [`membrane_integral`] evaluates the relaxation integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IntegralMethod {
    /// Exact antiderivative when every term has one, quadrature otherwise.
    #[default]
    Auto,
    /// Always adaptive quadrature.
    Quadrature,
}

/// Solution of `C v' = scale·A(t) − (v − v_rest)/R`, `v(0) = v0`:
///
/// `v(t) = e^{−t/CR} (v0 + ∫₀ᵗ e^{τ/CR}/C · (v_rest/R + scale·A(τ)) dτ)`.
///
/// `scale·A(t)` is the membrane current driving the cell.
#[allow(clippy::too_many_arguments)]
pub fn membrane_integral(
    c: f64,
    r: f64,
    v_rest: f64,
    v0: f64,
    source: &FreeCoefficient,
    scale: f64,
    t: f64,
    method: IntegralMethod,
) -> Result<f64> {
    if !(c > 0.0 && r > 0.0) {
        return Err(EmiError::Config(format!("C and R must be > 0, got C={c}, R={r}")));
    }
    if !(t >= 0.0) {
        return Err(EmiError::Domain(format!("membrane integral needs t >= 0, got {t}")));
    }
    let kappa = c * r;
    let decay = (-t / kappa).exp();
    let integral = match method {
        IntegralMethod::Auto => match source.relaxation_integral_exact(kappa, t) {
            Some(j) => j,
            None => source.relaxation_integral_quadrature(kappa, t, QuadratureOptions::default())?,
        },
        IntegralMethod::Quadrature => {
            source.relaxation_integral_quadrature(kappa, t, QuadratureOptions::default())?
        }
    };
    Ok(v0 * decay - v_rest * (-t / kappa).exp_m1() + scale * integral / c)
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn conductivities_equal(params: &ModelParams) -> bool {
    (params.sigma_i - params.sigma_e).abs() <= 1e-12 * params.sigma_e.abs().max(params.sigma_i.abs())
}
