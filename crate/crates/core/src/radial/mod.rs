//! Radially reduced finite-volume solver for the single-cell and two-cell
//! families.
//!
//! Each subdomain carries a uniform vertex-centred mesh. The flux between
//! neighbouring nodes is `σ a(r_{j+½}) (u_{j+1} − u_j) / h`, where `a(r)` is
//! the measure of the shell at radius `r` (`2πr` in the plane, `2πρ²` per
//! hemisphere, `4πρ²` for a full sphere). The implicit step of the membrane
//! closure `C (v − v*) / Δt = I_m`, `v = u_i(r₁) − u_e(r₁)`, couples the two
//! membrane nodes through the conductance `|Γ| C / Δt`, so the step is the
//! minimiser of a convex quadratic and every system is symmetric positive
//! definite and tridiagonal.
//!
//! Two cells are solved through the mean `s = (u₁ + u₂)/2` and the
//! difference `d = u₁ − u₂`, which decouple exactly for identical cells: `s`
//! couples to the extracellular potential and `d` to the gap potentials on
//! the equatorial disc.

mod tridiag;

use std::f64::consts::PI;

pub use tridiag::Tridiagonal;

use crate::analytic::{ExactFields, SingleCellSolution, TwoCellSolution};
use crate::error::{EmiError, Result};
use crate::model::{GapPair, Point};
use crate::split::{rc_relax, RcChannel, SplitProblem};

/// Relative residual accepted from the tridiagonal solves.
pub const SOLVE_TOL: f64 = 1e-10;

/// Geometric measure of the shells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shell {
    /// Circle of radius `r`: `2πr`.
    Circle,
    /// Hemisphere: `2πρ²`.
    Hemisphere,
    /// Sphere: `4πρ²`.
    Sphere,
    /// Ring on the equatorial disc, per unit radial length: `2πρ`.
    Ring,
}

impl Shell {
    pub fn measure(&self, r: f64) -> f64 {
        match self {
            Shell::Circle | Shell::Ring => 2.0 * PI * r,
            Shell::Hemisphere => 2.0 * PI * r * r,
            Shell::Sphere => 4.0 * PI * r * r,
        }
    }
}

/// Uniform nodes on `[a, b]` with `n = max(2, ⌈(b − a)/c_l⌉)` intervals.
pub fn uniform_nodes(a: f64, b: f64, c_l: f64) -> Result<Vec<f64>> {
    if !(c_l > 0.0 && c_l.is_finite()) {
        return Err(EmiError::Config(format!("characteristic length must be > 0, got {c_l}")));
    }
    if !(a < b) {
        return Err(EmiError::Config(format!("empty interval [{a}, {b}]")));
    }
    let n = (((b - a) / c_l) - 1e-9).ceil().max(2.0) as usize;
    Ok(nodes_with_intervals(a, b, n))
}

pub fn nodes_with_intervals(a: f64, b: f64, n: usize) -> Vec<f64> {
    let h = (b - a) / n as f64;
    (0..=n).map(|j| if j == n { b } else { a + j as f64 * h }).collect()
}

/// Node arrays of the intracellular (`[core, membrane]`) and extracellular
/// (`[membrane, outer]`) meshes; they share the membrane radius.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialMesh {
    pub intra: Vec<f64>,
    pub extra: Vec<f64>,
}

impl RadialMesh {
    pub fn new(core: f64, membrane: f64, outer: f64, c_l: f64) -> Result<Self> {
        Ok(Self {
            intra: uniform_nodes(core, membrane, c_l)?,
            extra: uniform_nodes(membrane, outer, c_l)?,
        })
    }

    pub fn r_core(&self) -> f64 {
        self.intra[0]
    }

    pub fn r_membrane(&self) -> f64 {
        *self.intra.last().expect("mesh has nodes")
    }

    pub fn r_outer(&self) -> f64 {
        *self.extra.last().expect("mesh has nodes")
    }
}

/// Conductance of each mesh interval: `σ a(r_{j+½}) / h_j`.
fn interval_conductances(nodes: &[f64], sigma: f64, shell: Shell) -> Vec<f64> {
    nodes
        .windows(2)
        .map(|w| sigma * shell.measure(0.5 * (w[0] + w[1])) / (w[1] - w[0]))
        .collect()
}

/// Discrete steady solution of `(a(r) σ u')' = 0` with Dirichlet ends.
pub fn steady_profile(nodes: &[f64], shell: Shell, u_a: f64, u_b: f64) -> Result<Vec<f64>> {
    let n = nodes.len();
    if n < 3 {
        return Err(EmiError::Config("steady profile needs at least 3 nodes".into()));
    }
    let k = interval_conductances(nodes, 1.0, shell);
    let m = n - 2;
    let mut sys = Tridiagonal::zeros(m);
    for (j, &kj) in k.iter().enumerate() {
        // Interval j joins nodes j and j+1; unknown i is node i+1.
        match (j, j + 1) {
            (0, _) => {
                sys.diag[0] += kj;
                sys.rhs[0] += kj * u_a;
            }
            (_, b) if b == n - 1 => {
                sys.diag[m - 1] += kj;
                sys.rhs[m - 1] += kj * u_b;
            }
            (a, _) => sys.couple(a - 1, a, kj),
        }
    }
    let inner = sys.solve(SOLVE_TOL)?;
    let mut u = Vec::with_capacity(n);
    u.push(u_a);
    u.extend(inner);
    u.push(u_b);
    Ok(u)
}

/// `(∫_lo^hi e(r)² a(r) dr)^{1/2}` for the piecewise-linear interpolant of
/// nodal errors, with three-point Gauss quadrature on each interval.
pub fn l2_norm(nodes: &[f64], errors: &[f64], shell: Shell, lo: f64, hi: f64) -> f64 {
    const GX: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
    const GW: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
    let mut sum = 0.0;
    for j in 0..nodes.len() - 1 {
        let (r0, r1) = (nodes[j], nodes[j + 1]);
        let (a, b) = (r0.max(lo), r1.min(hi));
        if !(b > a) {
            continue;
        }
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        for q in 0..3 {
            let r = mid + half * GX[q];
            let s = (r - r0) / (r1 - r0);
            let e = errors[j] * (1.0 - s) + errors[j + 1] * s;
            sum += GW[q] * half * e * e * shell.measure(r);
        }
    }
    sum.sqrt()
}

/// Discrete potentials and interface unknowns.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialState {
    /// Extracellular nodal potentials.
    pub u_e: Vec<f64>,
    /// Intracellular nodal potentials per cell.
    pub u_i: Vec<Vec<f64>>,
    /// Membrane potential per cell.
    pub v: Vec<f64>,
    /// Gap potential at each intracellular node radius (two cells only).
    pub w: Vec<f64>,
    /// Membrane currents from the last implicit step.
    pub i_m: Vec<f64>,
    /// Gap currents from the last implicit step.
    pub i_g: Vec<f64>,
    /// Largest per-subdomain current-balance defect of the last step.
    pub balance: f64,
}

#[derive(Debug, Clone)]
enum Family {
    Single(SingleCellSolution),
    Two(TwoCellSolution),
}

/// Where each error norm is taken, as radial intervals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRegions {
    pub intracellular: (f64, f64),
    pub gap: (f64, f64),
}

/// Diffusion backend and relaxation data for a radial family.
#[derive(Debug, Clone)]
pub struct RadialSolver {
    family: Family,
    mesh: RadialMesh,
    regions: ErrorRegions,
}

fn point_on_axis(r: f64) -> Point {
    [r, 0.0, 0.0]
}

/// Cell `k` of the hemisphere pair, sampled on its pole axis.
fn hemisphere_point(k: usize, rho: f64) -> Point {
    [0.0, 0.0, if k == 1 { rho } else { -rho }]
}

impl RadialSolver {
    pub fn single_cell(solution: SingleCellSolution, c_l: f64) -> Result<Self> {
        let g = solution.annulus();
        let mesh = RadialMesh::new(g.r_core, g.r_membrane, g.r_outer, c_l)?;
        let regions = ErrorRegions {
            intracellular: (g.r_core, g.r_membrane),
            gap: (g.r_core, g.r_membrane),
        };
        Ok(Self {
            family: Family::Single(solution),
            mesh,
            regions,
        })
    }

    /// Intracellular and gap errors default to `ρ₁ − 1 ≤ ρ ≤ ρ₁` (clipped to the cell).
    pub fn two_cell(solution: TwoCellSolution, c_l: f64) -> Result<Self> {
        let g = solution.hemispheres();
        let mesh = RadialMesh::new(g.rho_core, g.rho_membrane, g.rho_outer, c_l)?;
        let lo = (g.rho_membrane - 1.0).max(g.rho_core);
        let regions = ErrorRegions {
            intracellular: (lo, g.rho_membrane),
            gap: (lo, g.rho_membrane),
        };
        Ok(Self {
            family: Family::Two(solution),
            mesh,
            regions,
        })
    }

    pub fn with_regions(mut self, regions: ErrorRegions) -> Self {
        self.regions = regions;
        self
    }

    pub fn mesh(&self) -> &RadialMesh {
        &self.mesh
    }

    fn exact(&self) -> &dyn ExactFields {
        match &self.family {
            Family::Single(s) => s,
            Family::Two(s) => s,
        }
    }

    fn n_cells(&self) -> usize {
        match self.family {
            Family::Single(_) => 1,
            Family::Two(_) => 2,
        }
    }

    fn intra_point(&self, k: usize, r: f64) -> Point {
        match self.family {
            Family::Single(_) => point_on_axis(r),
            Family::Two(_) => hemisphere_point(k, r),
        }
    }

    fn shells(&self) -> (Shell, Shell) {
        match self.family {
            Family::Single(_) => (Shell::Circle, Shell::Circle),
            Family::Two(_) => (Shell::Hemisphere, Shell::Sphere),
        }
    }

    fn membrane_measure(&self) -> f64 {
        self.shells().0.measure(self.mesh.r_membrane())
    }

    /// Ring weights of the gap nodes (`j ≥ 1`; node 0 lies on the core).
    fn gap_weights(&self) -> Vec<f64> {
        let x = &self.mesh.intra;
        let n = x.len() - 1;
        (0..=n)
            .map(|j| {
                if j == 0 {
                    0.0
                } else {
                    let left = 0.5 * (x[j] - x[j - 1]);
                    let right = if j < n { 0.5 * (x[j + 1] - x[j]) } else { 0.0 };
                    Shell::Ring.measure(x[j]) * (left + right)
                }
            })
            .collect()
    }

    fn gap_pair() -> GapPair {
        GapPair::new(1, 2)
    }

    /// Exact fields sampled on the mesh at time `t`.
    pub fn initial_state(&self, t: f64) -> RadialState {
        let ex = self.exact();
        let u_e = self.mesh.extra.iter().map(|&r| ex.u_e(point_on_axis(r), t)).collect();
        let u_i = (1..=self.n_cells())
            .map(|k| self.mesh.intra.iter().map(|&r| ex.u_i(k, self.intra_point(k, r), t)).collect())
            .collect();
        let r1 = self.mesh.r_membrane();
        let v = (1..=self.n_cells()).map(|k| ex.v(k, self.intra_point(k, r1), t)).collect();
        let w = match self.family {
            Family::Single(_) => Vec::new(),
            Family::Two(_) => self
                .mesh
                .intra
                .iter()
                .map(|&r| ex.w(Self::gap_pair(), point_on_axis(r), t))
                .collect(),
        };
        let n_w = if self.n_cells() == 2 { self.mesh.intra.len() } else { 0 };
        RadialState {
            u_e,
            u_i,
            v,
            w,
            i_m: vec![0.0; self.n_cells()],
            i_g: vec![0.0; n_w],
            balance: 0.0,
        }
    }

    /// Implicit system of the single-cell step to `t_new`.
    ///
    /// Unknowns: intracellular nodes `1..=n_i`, then extracellular nodes
    /// `0..n_e`; the core and outer nodes carry exact Dirichlet data.
    pub fn assemble_single_cell(&self, v_star: f64, t_new: f64, dt: f64) -> Tridiagonal {
        let ex = self.exact();
        let prm = ex.params();
        let (xi, xe) = (&self.mesh.intra, &self.mesh.extra);
        let ne = xe.len() - 1;
        let u_core = ex.u_i(1, point_on_axis(xi[0]), t_new);
        let u_outer = ex.u_app(point_on_axis(xe[ne]), t_new);
        let g = self.membrane_measure() * prm.membrane_capacitance(1) / dt;
        chain_system(
            &interval_conductances(xi, prm.sigma_i, Shell::Circle),
            &interval_conductances(xe, prm.sigma_e, Shell::Circle),
            u_core,
            u_outer,
            g,
            v_star,
        )
    }

    fn diffuse_single(&self, state: &mut RadialState, t_new: f64, dt: f64) -> Result<()> {
        let v_star = state.v[0];
        let sys = self.assemble_single_cell(v_star, t_new, dt);
        let x = sys.solve(SOLVE_TOL)?;
        let ni = self.mesh.intra.len() - 1;
        let ex = self.exact();
        state.u_i[0][0] = ex.u_i(1, point_on_axis(self.mesh.intra[0]), t_new);
        state.u_i[0][1..].copy_from_slice(&x[..ni]);
        let ne = self.mesh.extra.len() - 1;
        state.u_e[..ne].copy_from_slice(&x[ni..]);
        state.u_e[ne] = ex.u_app(point_on_axis(self.mesh.extra[ne]), t_new);
        let v = state.u_i[0][ni] - state.u_e[0];
        state.i_m[0] = ex.params().membrane_capacitance(1) * (v - v_star) / dt;
        state.v[0] = v;
        state.balance = chain_balance(&sys, &x, ni);
        Ok(())
    }

    fn diffuse_two(&self, state: &mut RadialState, t_new: f64, dt: f64) -> Result<()> {
        let ex = self.exact();
        let prm = ex.params();
        let (xi, xe) = (&self.mesh.intra, &self.mesh.extra);
        let (ni, ne) = (xi.len() - 1, xe.len() - 1);
        let pair = Self::gap_pair();
        let c = prm.membrane_capacitance(1);
        let c_gap = prm.gap_capacitance(pair)?;
        let g = self.membrane_measure() * c / dt;
        let k_i = interval_conductances(xi, prm.sigma_i, Shell::Hemisphere);
        let k_e = interval_conductances(xe, prm.sigma_e, Shell::Sphere);

        let core = [1, 2].map(|k| ex.u_i(k, hemisphere_point(k, xi[0]), t_new));
        let u_outer = ex.u_app(point_on_axis(xe[ne]), t_new);
        let (v1s, v2s) = (state.v[0], state.v[1]);
        let w_star = state.w.clone();

        // Mean potential: conductances double, and so does the membrane coupling.
        let k_s: Vec<f64> = k_i.iter().map(|k| 2.0 * k).collect();
        let sum_sys = chain_system(&k_s, &k_e, 0.5 * (core[0] + core[1]), u_outer, 2.0 * g, 0.5 * (v1s + v2s));
        let xs = sum_sys.solve(SOLVE_TOL)?;

        // Difference: halved conductances, membrane pull towards v1* − v2*,
        // and a gap pull towards w* at every node.
        let weights = self.gap_weights();
        let mut dsys = Tridiagonal::zeros(ni);
        let d_core = core[0] - core[1];
        for (j, &kj) in k_i.iter().enumerate() {
            let kj = 0.5 * kj;
            if j == 0 {
                dsys.diag[0] += kj;
                dsys.rhs[0] += kj * d_core;
            } else {
                dsys.couple(j - 1, j, kj);
            }
        }
        dsys.diag[ni - 1] += 0.5 * g;
        dsys.rhs[ni - 1] += 0.5 * g * (v1s - v2s);
        for j in 1..=ni {
            let gj = weights[j] * c_gap / dt;
            dsys.diag[j - 1] += gj;
            dsys.rhs[j - 1] += gj * w_star[j];
        }
        let xd = dsys.solve(SOLVE_TOL)?;

        let s_nodes: Vec<f64> = std::iter::once(0.5 * (core[0] + core[1])).chain(xs[..ni].iter().copied()).collect();
        let d_nodes: Vec<f64> = std::iter::once(d_core).chain(xd.iter().copied()).collect();
        for j in 0..=ni {
            state.u_i[0][j] = s_nodes[j] + 0.5 * d_nodes[j];
            state.u_i[1][j] = s_nodes[j] - 0.5 * d_nodes[j];
        }
        state.u_i[0][0] = core[0];
        state.u_i[1][0] = core[1];
        state.u_e[..ne].copy_from_slice(&xs[ni..]);
        state.u_e[ne] = u_outer;
        for k in 0..2 {
            let v = state.u_i[k][ni] - state.u_e[0];
            state.i_m[k] = c * (v - state.v[k]) / dt;
            state.v[k] = v;
        }
        for j in 0..=ni {
            let w = d_nodes[j];
            state.i_g[j] = if j == 0 { 0.0 } else { c_gap * (w - w_star[j]) / dt };
            state.w[j] = w;
        }
        state.balance = self.two_cell_balance(state, &k_i, &k_e, g, [v1s, v2s], &w_star, dt, c_gap);
        Ok(())
    }

    /// Current-balance defect of the full coupled two-cell system, per subdomain.
    #[allow(clippy::too_many_arguments)]
    fn two_cell_balance(
        &self,
        state: &RadialState,
        k_i: &[f64],
        k_e: &[f64],
        g: f64,
        v_star: [f64; 2],
        w_star: &[f64],
        dt: f64,
        c_gap: f64,
    ) -> f64 {
        let ni = k_i.len();
        let weights = self.gap_weights();
        let (u1, u2, ue) = (&state.u_i[0], &state.u_i[1], &state.u_e);
        let mut worst: f64 = 0.0;
        // Cell k: conduction in from the core, out through the membrane and the gap.
        for (k, (uk, ul)) in [(u1, u2), (u2, u1)].into_iter().enumerate() {
            let sign = if k == 0 { 1.0 } else { -1.0 };
            let core_in = k_i[0] * (uk[0] - uk[1]);
            let membrane_out = g * (uk[ni] - ue[0] - v_star[k]);
            let mut gap_out = 0.0;
            let mut scale = core_in.abs() + membrane_out.abs();
            for j in 1..=ni {
                let gj = weights[j] * c_gap / dt;
                let flow = sign * gj * (u1[j] - u2[j] - w_star[j]);
                gap_out += flow;
                scale += flow.abs();
            }
            let _ = ul;
            worst = worst.max((core_in - membrane_out - gap_out).abs() / scale.max(f64::MIN_POSITIVE));
        }
        let ne = k_e.len();
        let membrane_in: f64 = (0..2).map(|k| g * (state.u_i[k][ni] - ue[0] - v_star[k])).sum();
        let outer_out = k_e[ne - 1] * (ue[ne - 1] - ue[ne]);
        let scale = membrane_in.abs() + outer_out.abs();
        worst.max((membrane_in - outer_out).abs() / scale.max(f64::MIN_POSITIVE))
    }

    /// L² errors at time `t`, named `u_e`, `u_i{k}`, `v{k}` and `w1_2`.
    pub fn errors(&self, state: &RadialState, t: f64) -> Vec<(String, f64)> {
        let ex = self.exact();
        let (shell_i, shell_e) = self.shells();
        let (xi, xe) = (&self.mesh.intra, &self.mesh.extra);
        let mut out = Vec::new();
        let e_e: Vec<f64> = xe
            .iter()
            .zip(&state.u_e)
            .map(|(&r, &u)| u - ex.u_e(point_on_axis(r), t))
            .collect();
        out.push(("u_e".to_string(), l2_norm(xe, &e_e, shell_e, xe[0], xe[xe.len() - 1])));
        let (lo, hi) = self.regions.intracellular;
        for k in 1..=self.n_cells() {
            let e: Vec<f64> = xi
                .iter()
                .zip(&state.u_i[k - 1])
                .map(|(&r, &u)| u - ex.u_i(k, self.intra_point(k, r), t))
                .collect();
            out.push((format!("u_i{k}"), l2_norm(xi, &e, shell_i, lo, hi)));
        }
        let area = self.membrane_measure();
        let r1 = self.mesh.r_membrane();
        for k in 1..=self.n_cells() {
            let e = state.v[k - 1] - ex.v(k, self.intra_point(k, r1), t);
            out.push((format!("v{k}"), e.abs() * area.sqrt()));
        }
        if let Family::Two(_) = self.family {
            let e: Vec<f64> = xi
                .iter()
                .zip(&state.w)
                .map(|(&r, &w)| w - ex.w(Self::gap_pair(), point_on_axis(r), t))
                .collect();
            let (lo, hi) = self.regions.gap;
            out.push(("w1_2".to_string(), l2_norm(xi, &e, Shell::Ring, lo, hi)));
        }
        out
    }
}

/// Chain `[u_i nodes 1..=n_i | u_e nodes 0..n_e]` with Dirichlet ends and a
/// membrane conductance `g` pulling `u_i(r₁) − u_e(r₁)` towards `v_star`.
fn chain_system(k_i: &[f64], k_e: &[f64], u_core: f64, u_outer: f64, g: f64, v_star: f64) -> Tridiagonal {
    let (ni, ne) = (k_i.len(), k_e.len());
    let mut sys = Tridiagonal::zeros(ni + ne);
    for (j, &kj) in k_i.iter().enumerate() {
        if j == 0 {
            sys.diag[0] += kj;
            sys.rhs[0] += kj * u_core;
        } else {
            sys.couple(j - 1, j, kj);
        }
    }
    let (mi, me) = (ni - 1, ni);
    sys.couple(mi, me, g);
    sys.rhs[mi] += g * v_star;
    sys.rhs[me] -= g * v_star;
    for (j, &kj) in k_e.iter().enumerate() {
        if j + 1 == ne {
            sys.diag[ni + j] += kj;
            sys.rhs[ni + j] += kj * u_outer;
        } else {
            sys.couple(ni + j, ni + j + 1, kj);
        }
    }
    sys
}

/// Per-subdomain defect `|Σ (b − A x)| / Σ (|b| + |A||x|)` over the rows of
/// the intracellular block (`..ni`) and of the extracellular block.
fn chain_balance(sys: &Tridiagonal, x: &[f64], ni: usize) -> f64 {
    let n = sys.len();
    let mut out: f64 = 0.0;
    for range in [0..ni, ni..n] {
        let (mut sum, mut scale) = (0.0, 0.0);
        for i in range {
            let mut terms = vec![sys.diag[i] * x[i]];
            if i > 0 {
                terms.push(sys.lower[i] * x[i - 1]);
            }
            if i + 1 < n {
                terms.push(sys.upper[i] * x[i + 1]);
            }
            let ax: f64 = terms.iter().sum();
            sum += sys.rhs[i] - ax;
            scale += sys.rhs[i].abs() + terms.iter().map(|t| t.abs()).sum::<f64>();
        }
        if scale > 0.0 {
            out = out.max(sum.abs() / scale);
        }
    }
    out
}

impl SplitProblem for RadialSolver {
    type State = RadialState;

    fn relax(&self, state: &mut RadialState, t: f64, dt: f64) {
        let ex = self.exact();
        let prm = ex.params();
        let tm = t + 0.5 * dt;
        let r1 = self.mesh.r_membrane();
        for k in 1..=self.n_cells() {
            let ch = RcChannel::new(prm.membrane_capacitance(k), prm.membrane_resistance(k), prm.v_rest);
            let g = ex.g(k, self.intra_point(k, r1), tm);
            state.v[k - 1] = rc_relax(state.v[k - 1], &ch, g, dt);
        }
        if let Family::Two(_) = self.family {
            let pair = Self::gap_pair();
            let ch = RcChannel::new(
                prm.gap_capacitance(pair).expect("validated"),
                prm.gap_resistance(pair).expect("validated"),
                prm.w_rest,
            );
            for (j, w) in state.w.iter_mut().enumerate() {
                let g = ex.g_gap(pair, point_on_axis(self.mesh.intra[j]), tm);
                *w = rc_relax(*w, &ch, g, dt);
            }
        }
    }

    fn diffuse(&mut self, state: &mut RadialState, t: f64, dt: f64) -> Result<()> {
        match self.family {
            Family::Single(_) => self.diffuse_single(state, t + dt, dt),
            Family::Two(_) => self.diffuse_two(state, t + dt, dt),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_counts() {
        assert_eq!(uniform_nodes(3.0, 5.0, 0.4).unwrap().len(), 6);
        assert_eq!(uniform_nodes(5.0, 6.0, 0.4).unwrap().len(), 4);
        assert_eq!(uniform_nodes(5.0, 6.0, 2.0).unwrap().len(), 3);
        assert_eq!(uniform_nodes(3.0, 5.0, 0.1).unwrap().len(), 21);
        assert!(uniform_nodes(3.0, 5.0, 0.0).is_err());
    }

    #[test]
    fn l2_norm_of_constant_error() {
        let x = uniform_nodes(5.0, 6.0, 0.1).unwrap();
        let ones = vec![1.0; x.len()];
        assert!((l2_norm(&x, &ones, Shell::Circle, 5.0, 6.0) - (11.0 * PI).sqrt()).abs() < 1e-12);
        let shell = (4.0 * PI * (216.0 - 125.0) / 3.0f64).sqrt();
        assert!((l2_norm(&x, &ones, Shell::Sphere, 5.0, 6.0) - shell).abs() < 1e-9);
        assert!((shell - 19.5239).abs() < 1e-3);
        assert_eq!(l2_norm(&x, &vec![0.0; x.len()], Shell::Sphere, 5.0, 6.0), 0.0);
    }

    #[test]
    fn constant_state_is_preserved() {
        let x = uniform_nodes(3.0, 6.0, 0.25).unwrap();
        for shell in [Shell::Circle, Shell::Sphere] {
            let u = steady_profile(&x, shell, 2.5, 2.5).unwrap();
            assert!(u.iter().all(|&v| (v - 2.5).abs() < 1e-14));
        }
        let sys = chain_system(&[1.0, 2.0, 3.0], &[4.0, 5.0], 7.0, 7.0, 0.5, 0.0);
        let x = sys.solve(1e-12).unwrap();
        assert!(x.iter().all(|&v| (v - 7.0).abs() < 1e-13));
    }
}
