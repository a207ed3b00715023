//! Cell-centred finite volumes on the cuboid lattice.
//!
//! Every grid cell belongs to one subdomain. Face potentials on membrane and
//! gap faces are eliminated: a membrane face is two half-cells and a
//! capacitor in series, so after the implicit capacitive step its flux is
//! `c (u_I − u_E − v*)` with
//! `c = h² / (h/(2σ_i) + h/(2σ_e) + Δt/C)`; a gap face likewise gives
//! `c = h² / (h/σ_i + Δt/C_kl)` acting on `u_k − u_l − w*`. Box faces carry
//! Dirichlet data at the face centre. The resulting system is symmetric
//! positive definite and is solved by Jacobi-preconditioned CG.

pub mod grid;
pub mod sparse;

use std::collections::BTreeMap;

pub use grid::{build_grid, GridAudit, LatticeGrid};
pub use sparse::{pcg, CsrMatrix, SolveStats};

use crate::analytic::export::VolumeRow;
use crate::analytic::{ExactFields, MmsSolution};
use crate::error::{EmiError, Result};
use crate::model::{GapPair, Point};
use crate::split::{rc_relax, RcChannel, SplitProblem};

/// Relative residual target of the CG solves.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Dirichlet data on the box wall.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryData {
    /// `u_app = 0`.
    #[default]
    Zero,
    /// `u_app = T_e X`, the trace of the manufactured solution.
    Trace,
}

impl std::str::FromStr for BoundaryData {
    type Err = EmiError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(BoundaryData::Zero),
            "trace" => Ok(BoundaryData::Trace),
            other => Err(EmiError::Config(format!("unknown boundary data '{other}' (expected zero or trace)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CartesianState {
    /// Cell potentials in unknown order.
    pub u: Vec<f64>,
    /// One value per membrane face.
    pub v: Vec<f64>,
    /// One value per gap face.
    pub w: Vec<f64>,
    pub i_m: Vec<f64>,
    pub i_gap: Vec<f64>,
    /// Largest per-subdomain current-balance defect of the last step.
    pub balance: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
struct Operator {
    dt: f64,
    matrix: CsrMatrix,
    membrane_c: Vec<f64>,
    gap_c: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct CartesianSolver {
    solution: MmsSolution,
    grid: LatticeGrid,
    boundary: BoundaryData,
    tol: f64,
    max_iter: usize,
    operator: Option<Operator>,
}

impl CartesianSolver {
    pub fn new(solution: MmsSolution, h: f64, boundary: BoundaryData) -> Result<Self> {
        let grid = build_grid(solution.lattice(), h)?;
        Ok(Self {
            solution,
            grid,
            boundary,
            tol: DEFAULT_TOL,
            max_iter: 20_000,
            operator: None,
        })
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn grid(&self) -> &LatticeGrid {
        &self.grid
    }

    fn sigma(&self, owner: usize) -> f64 {
        let p = self.solution.params();
        if owner == 0 {
            p.sigma_e
        } else {
            p.sigma_i
        }
    }

    fn u_app(&self, p: Point, t: f64) -> f64 {
        match self.boundary {
            BoundaryData::Zero => 0.0,
            BoundaryData::Trace => self.solution.u_app(p, t),
        }
    }

    fn source(&self, u: usize, t: f64) -> f64 {
        let p = self.grid.center(u);
        match self.grid.owner_of_unknown(u) {
            0 => self.solution.f_e(p, t),
            k => self.solution.f_i(k, p, t),
        }
    }

    fn exact_u(&self, u: usize, t: f64) -> f64 {
        let p = self.grid.center(u);
        match self.grid.owner_of_unknown(u) {
            0 => self.solution.u_e(p, t),
            k => self.solution.u_i(k, p, t),
        }
    }

    /// Exact data sampled at cell and face centres.
    pub fn initial_state(&self, t: f64) -> CartesianState {
        let g = &self.grid;
        CartesianState {
            u: (0..g.n_unknowns()).map(|u| self.exact_u(u, t)).collect(),
            v: g.membrane.iter().map(|f| self.solution.v(f.cell, f.center, t)).collect(),
            w: g.gap.iter().map(|f| self.solution.w(f.pair, f.center, t)).collect(),
            i_m: vec![0.0; g.membrane.len()],
            i_gap: vec![0.0; g.gap.len()],
            balance: 0.0,
            iterations: 0,
        }
    }

    fn build_operator(&self, dt: f64) -> Result<Operator> {
        let g = &self.grid;
        let h = g.h();
        let p = self.solution.params();
        let mut rows: Vec<Vec<(usize, f64)>> = (0..g.n_unknowns()).map(|i| vec![(i, 0.0)]).collect();
        let couple = |rows: &mut Vec<Vec<(usize, f64)>>, a: usize, b: usize, c: f64| {
            rows[a][0].1 += c;
            rows[b][0].1 += c;
            rows[a].push((b, -c));
            rows[b].push((a, -c));
        };
        for f in &g.internal {
            couple(&mut rows, f.a, f.b, self.sigma(f.owner) * h);
        }
        let membrane_c: Vec<f64> = g
            .membrane
            .iter()
            .map(|f| h * h / (h / (2.0 * p.sigma_i) + h / (2.0 * p.sigma_e) + dt / p.membrane_capacitance(f.cell)))
            .collect();
        for (f, &c) in g.membrane.iter().zip(&membrane_c) {
            couple(&mut rows, f.inner, f.outer, c);
        }
        let mut gap_c = Vec::with_capacity(g.gap.len());
        for f in &g.gap {
            let c = h * h / (h / p.sigma_i + dt / p.gap_capacitance(f.pair)?);
            couple(&mut rows, f.low, f.high, c);
            gap_c.push(c);
        }
        for f in &g.boundary {
            rows[f.unknown][0].1 += 2.0 * p.sigma_e * h;
        }
        Ok(Operator {
            dt,
            matrix: CsrMatrix::from_rows(rows),
            membrane_c,
            gap_c,
        })
    }

    /// The implicit system for a step of length `dt` ending at `t_new`.
    pub fn assemble(&mut self, state: &CartesianState, t_new: f64, dt: f64) -> Result<(CsrMatrix, Vec<f64>)> {
        let rhs = self.rhs(state, t_new, dt)?;
        Ok((self.operator.as_ref().expect("built by rhs").matrix.clone(), rhs))
    }

    fn rhs(&mut self, state: &CartesianState, t_new: f64, dt: f64) -> Result<Vec<f64>> {
        if self.operator.as_ref().is_none_or(|op| op.dt != dt) {
            self.operator = Some(self.build_operator(dt)?);
        }
        let g = &self.grid;
        let h = g.h();
        let h3 = h * h * h;
        let mut b: Vec<f64> = (0..g.n_unknowns()).map(|u| self.source(u, t_new) * h3).collect();
        let sigma_e = self.solution.params().sigma_e;
        for f in &g.boundary {
            b[f.unknown] += 2.0 * sigma_e * h * self.u_app(f.center, t_new);
        }
        let op = self.operator.as_ref().expect("just built");
        for ((f, &c), &v) in g.membrane.iter().zip(&op.membrane_c).zip(&state.v) {
            b[f.inner] += c * v;
            b[f.outer] -= c * v;
        }
        for ((f, &c), &w) in g.gap.iter().zip(&op.gap_c).zip(&state.w) {
            b[f.low] += c * w;
            b[f.high] -= c * w;
        }
        Ok(b)
    }

    fn diffuse_to(&mut self, state: &mut CartesianState, t_new: f64, dt: f64) -> Result<()> {
        let b = self.rhs(state, t_new, dt)?;
        let op = self.operator.as_ref().expect("built by rhs");
        let stats = pcg(&op.matrix, &b, &mut state.u, self.tol, self.max_iter)?;
        state.iterations = stats.iterations;
        let g = &self.grid;
        let h2 = g.h() * g.h();
        let p = self.solution.params();
        for (i, (f, &c)) in g.membrane.iter().zip(&op.membrane_c).enumerate() {
            let j = c * (state.u[f.inner] - state.u[f.outer] - state.v[i]) / h2;
            state.i_m[i] = j;
            state.v[i] += dt * j / p.membrane_capacitance(f.cell);
        }
        for (i, (f, &c)) in g.gap.iter().zip(&op.gap_c).enumerate() {
            let j = c * (state.u[f.low] - state.u[f.high] - state.w[i]) / h2;
            state.i_gap[i] = j;
            state.w[i] += dt * j / p.gap_capacitance(f.pair)?;
        }
        state.balance = subdomain_balance(&op.matrix, &state.u, &b, g);
        Ok(())
    }

    /// Jumps `u_i,f − u_e,f` and `u_k,f − u_l,f` rebuilt from the cell
    /// potentials and the face currents by half-cell extrapolation.
    pub fn reconstructed_jumps(&self, state: &CartesianState) -> (Vec<f64>, Vec<f64>) {
        let g = &self.grid;
        let h = g.h();
        let p = self.solution.params();
        let v = g
            .membrane
            .iter()
            .zip(&state.i_m)
            .map(|(f, &j)| {
                let ui = state.u[f.inner] - j * h / (2.0 * p.sigma_i);
                let ue = state.u[f.outer] + j * h / (2.0 * p.sigma_e);
                ui - ue
            })
            .collect();
        let w = g
            .gap
            .iter()
            .zip(&state.i_gap)
            .map(|(f, &j)| {
                let ul = state.u[f.low] - j * h / (2.0 * p.sigma_i);
                let uh = state.u[f.high] + j * h / (2.0 * p.sigma_i);
                ul - uh
            })
            .collect();
        (v, w)
    }

    /// Variable names in report order.
    pub fn variables(&self) -> Vec<String> {
        let n = self.solution.lattice().n_cells();
        let mut out = vec!["u_e".to_string()];
        out.extend((1..=n).map(|k| format!("u_i{k}")));
        out.extend((1..=n).map(|k| format!("v{k}")));
        out.extend(self.solution.lattice().gaps().iter().map(|p| format!("w{}_{}", p.low(), p.high())));
        out
    }

    /// L² errors at `t`: midpoint rule on cells, face-area weights on interfaces.
    pub fn errors(&self, state: &CartesianState, t: f64) -> Vec<(String, f64)> {
        let g = &self.grid;
        let h = g.h();
        let (h2, h3) = (h * h, h * h * h);
        let n = self.solution.lattice().n_cells();
        let mut vol = vec![0.0; n + 1];
        for u in 0..g.n_unknowns() {
            let e = state.u[u] - self.exact_u(u, t);
            vol[g.owner_of_unknown(u)] += e * e * h3;
        }
        let mut mem = vec![0.0; n];
        for (f, &v) in g.membrane.iter().zip(&state.v) {
            let e = v - self.solution.v(f.cell, f.center, t);
            mem[f.cell - 1] += e * e * h2;
        }
        let mut gap: BTreeMap<GapPair, f64> = self.solution.lattice().gaps().into_iter().map(|p| (p, 0.0)).collect();
        for (f, &w) in g.gap.iter().zip(&state.w) {
            let e = w - self.solution.w(f.pair, f.center, t);
            *gap.get_mut(&f.pair).expect("lattice gap") += e * e * h2;
        }
        let mut out = vec![("u_e".to_string(), vol[0].sqrt())];
        out.extend((1..=n).map(|k| (format!("u_i{k}"), vol[k].sqrt())));
        out.extend((1..=n).map(|k| (format!("v{k}"), mem[k - 1].sqrt())));
        out.extend(gap.into_iter().map(|(p, s)| (format!("w{}_{}", p.low(), p.high()), s.sqrt())));
        out
    }

    /// Cell potentials and sources in the exporter's volume schema.
    pub fn snapshot(&self, state: &CartesianState, t: f64) -> Vec<VolumeRow> {
        (0..self.grid.n_unknowns())
            .map(|u| {
                let subdomain = self.grid.owner_of_unknown(u);
                let (e, i) = if subdomain == 0 {
                    ((Some(state.u[u]), Some(self.source(u, t))), (None, None))
                } else {
                    ((None, None), (Some(state.u[u]), Some(self.source(u, t))))
                };
                VolumeRow {
                    t,
                    point: self.grid.center(u),
                    subdomain,
                    u_e: e.0,
                    f_e: e.1,
                    u_i: i.0,
                    f_i: i.1,
                }
            })
            .collect()
    }
}

/// `max_s |Σ_{i∈s} (b − A x)_i| / Σ_{i∈s} (|b_i| + Σ_j |A_ij x_j|)`.
fn subdomain_balance(a: &CsrMatrix, x: &[f64], b: &[f64], grid: &LatticeGrid) -> f64 {
    let defects = a.row_defects(x, b);
    (0..grid.n_subdomains())
        .map(|s| {
            let (sum, scale) = defects[grid.subdomain_range(s)]
                .iter()
                .fold((0.0, 0.0), |(s, c), &(r, sc)| (s + r, c + sc));
            if scale > 0.0 {
                sum.abs() / scale
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max)
}

impl SplitProblem for CartesianSolver {
    type State = CartesianState;

    fn relax(&self, state: &mut CartesianState, t: f64, dt: f64) {
        let tm = t + 0.5 * dt;
        let p = self.solution.params();
        for (f, v) in self.grid.membrane.iter().zip(state.v.iter_mut()) {
            let ch = RcChannel::new(p.membrane_capacitance(f.cell), p.membrane_resistance(f.cell), p.v_rest);
            *v = rc_relax(*v, &ch, self.solution.g(f.cell, f.center, tm), dt);
        }
        for (f, w) in self.grid.gap.iter().zip(state.w.iter_mut()) {
            let ch = RcChannel::new(
                p.gap_capacitance(f.pair).expect("validated"),
                p.gap_resistance(f.pair).expect("validated"),
                p.w_rest,
            );
            *w = rc_relax(*w, &ch, self.solution.g_gap(f.pair, f.center, tm), dt);
        }
    }

    fn diffuse(&mut self, state: &mut CartesianState, t: f64, dt: f64) -> Result<()> {
        self.diffuse_to(state, t + dt, dt)
    }
}

/// Single-medium check: `−σ Δu = f` on the unit cube split into `n³` cells,
/// Dirichlet data `g` at face centres. Returns cell centres and values.
pub fn poisson_unit_cube(
    n: usize,
    sigma: f64,
    f: impl Fn(Point) -> f64,
    g: impl Fn(Point) -> f64,
) -> Result<(Vec<Point>, Vec<f64>)> {
    if n == 0 {
        return Err(EmiError::Config("need at least one cell per side".into()));
    }
    let h = 1.0 / n as f64;
    let lin = |i: usize, j: usize, k: usize| i + n * (j + n * k);
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n * n * n];
    let mut b = vec![0.0; n * n * n];
    let mut centers = vec![[0.0; 3]; n * n * n];
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                let c = lin(i, j, k);
                let idx = [i, j, k];
                let p = idx.map(|q| (q as f64 + 0.5) * h);
                centers[c] = p;
                b[c] += f(p) * h * h * h;
                let mut diag = 0.0;
                for a in 0..3 {
                    for s in [-1i64, 1] {
                        let q = idx[a] as i64 + s;
                        if q < 0 || q >= n as i64 {
                            let mut face = p;
                            face[a] += s as f64 * 0.5 * h;
                            diag += 2.0 * sigma * h;
                            b[c] += 2.0 * sigma * h * g(face);
                        } else {
                            let mut nb = idx;
                            nb[a] = q as usize;
                            diag += sigma * h;
                            rows[c].push((lin(nb[0], nb[1], nb[2]), -sigma * h));
                        }
                    }
                }
                rows[c].push((c, diag));
            }
        }
    }
    let a = CsrMatrix::from_rows(rows);
    let mut x = vec![0.0; n * n * n];
    pcg(&a, &b, &mut x, 1e-12, 100 * n * n)?;
    Ok((centers, x))
}
