//! Finite-difference residuals of the governing equations evaluated on an
//! exact solution.
//!
//! Derivatives use fourth-order central stencils. The divergence term of the
//! potential equations is differenced from the closed-form flux, and a
//! separate check compares the closed-form gradient against differences of
//! the potential, so the two together exercise `u` itself.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{dot, ExactFields, Subdomain};
use crate::error::{EmiError, Result};
use crate::model::{GapPair, GeometrySpec, Point};

/// Where a residual sample sits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SampleKind {
    Interior(Subdomain),
    /// On the membrane of cell `k`; `normal` is the outward normal of the cell.
    Membrane { k: usize, normal: [f64; 3] },
    /// On a gap junction; `normal` points from `pair.low()` to `pair.high()`.
    Gap { pair: GapPair, normal: [f64; 3] },
    /// On the outer boundary with outward `normal`.
    Boundary { normal: [f64; 3] },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub point: Point,
    pub t: f64,
    pub kind: SampleKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ResidualKind {
    /// `|σ Δu + f| / max(1, |f|)` in the extracellular space.
    PotentialExtracellular,
    PotentialIntracellular,
    /// Closed-form gradient against differenced potential.
    Gradient,
    /// `C ∂v/∂t − (I_m − (v − v_rest)/R + g)`.
    MembraneOde,
    GapOde,
    /// Differenced normal flux against `I_m`, from both sides.
    MembraneFlux,
    GapFlux,
    /// `v − (u_i − u_e)`.
    MembraneJump,
    /// `w − (u_i^k − u_i^ℓ)`.
    GapJump,
    /// `u_e − u_app` and `σ_e ∂u_e/∂n − I_app`.
    Boundary,
}

impl ResidualKind {
    pub fn name(&self) -> &'static str {
        match self {
            ResidualKind::PotentialExtracellular => "potential_extracellular",
            ResidualKind::PotentialIntracellular => "potential_intracellular",
            ResidualKind::Gradient => "gradient",
            ResidualKind::MembraneOde => "membrane_ode",
            ResidualKind::GapOde => "gap_ode",
            ResidualKind::MembraneFlux => "membrane_flux",
            ResidualKind::GapFlux => "gap_flux",
            ResidualKind::MembraneJump => "membrane_jump",
            ResidualKind::GapJump => "gap_jump",
            ResidualKind::Boundary => "boundary",
        }
    }
}

impl fmt::Display for ResidualKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Maximum residual per equation over all samples that exercise it.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResidualReport {
    pub max: BTreeMap<ResidualKind, f64>,
    pub samples: usize,
}

impl ResidualReport {
    fn record(&mut self, kind: ResidualKind, value: f64) {
        let e = self.max.entry(kind).or_insert(0.0);
        // NaN must not be swallowed by max().
        if value.is_nan() || value > *e {
            *e = if e.is_nan() { *e } else { value };
        }
    }

    /// Largest residual over every equation; NaN if any residual was NaN.
    pub fn overall(&self) -> f64 {
        self.max.values().fold(0.0, |acc: f64, &v| if v.is_nan() || acc.is_nan() { f64::NAN } else { acc.max(v) })
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.overall() <= tol
    }
}

fn d1(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

fn shifted(p: Point, axis: usize, s: f64) -> Point {
    let mut q = p;
    q[axis] += s;
    q
}

fn along(p: Point, n: [f64; 3], s: f64) -> Point {
    [p[0] + s * n[0], p[1] + s * n[1], p[2] + s * n[2]]
}

fn spatial_axes(geometry: &GeometrySpec) -> usize {
    match geometry {
        GeometrySpec::Annulus2D(_) => 2,
        _ => 3,
    }
}

type ScalarField<'a> = Box<dyn Fn(Point) -> f64 + 'a>;
type VectorField<'a> = Box<dyn Fn(Point) -> [f64; 3] + 'a>;

fn relative(residual: f64, scale: f64) -> f64 {
    residual.abs() / scale.abs().max(1.0)
}

/// Evaluates every residual that applies to each sample.
///
/// Interior samples must lie in their declared subdomain and interface or
/// boundary samples on their interface; stencils may reach a distance `2h`
/// beyond it, where the closed forms are evaluated as written.
pub fn residual_check<S: ExactFields + ?Sized>(solution: &S, samples: &[Sample], h: f64) -> Result<ResidualReport> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(EmiError::Config(format!("finite-difference step must be > 0, got {h}")));
    }
    let prm = solution.params();
    let dims = spatial_axes(&solution.geometry());
    let mut report = ResidualReport::default();
    for s in samples {
        let (p, t) = (s.point, s.t);
        match s.kind {
            SampleKind::Interior(sd) => {
                if solution.locate(p) != Some(sd) {
                    return Err(EmiError::Domain(format!(
                        "sample {p:?} is not in the {sd} subdomain"
                    )));
                }
                let (sigma, u, grad, f, kind): (f64, ScalarField, VectorField, f64, _) =
                    match sd {
                        Subdomain::Extracellular => (
                            prm.sigma_e,
                            Box::new(|q| solution.u_e(q, t)),
                            Box::new(|q| solution.grad_u_e(q, t)),
                            solution.f_e(p, t),
                            ResidualKind::PotentialExtracellular,
                        ),
                        Subdomain::Intracellular(k) => (
                            prm.sigma_i,
                            Box::new(move |q| solution.u_i(k, q, t)),
                            Box::new(move |q| solution.grad_u_i(k, q, t)),
                            solution.f_i(k, p, t),
                            ResidualKind::PotentialIntracellular,
                        ),
                    };
                let mut div = 0.0;
                let g0 = grad(p);
                let mut grad_res: f64 = 0.0;
                for a in 0..dims {
                    div += d1(|x| sigma * grad(shifted(p, a, x - p[a]))[a], p[a], h);
                    let fd = d1(|x| u(shifted(p, a, x - p[a])), p[a], h);
                    grad_res = grad_res.max(relative(fd - g0[a], g0[a]));
                }
                report.record(kind, relative(div + f, f));
                report.record(ResidualKind::Gradient, grad_res);
            }
            SampleKind::Membrane { k, normal } => {
                let v = solution.v(k, p, t);
                let c = prm.membrane_capacitance(k);
                let r = prm.membrane_resistance(k);
                let i_m = solution.i_m(k, p, t);
                let g = solution.g(k, p, t);
                let dv = d1(|tau| solution.v(k, p, tau), t, h);
                let rhs = i_m - (v - prm.v_rest) / r + g;
                let scale = (c * dv).abs().max(rhs.abs());
                report.record(ResidualKind::MembraneOde, relative(c * dv - rhs, scale));

                let jump = v - (solution.u_i(k, p, t) - solution.u_e(p, t));
                report.record(ResidualKind::MembraneJump, relative(jump, v));

                // I_m = (σ_e ∇u_e)·n_e = −(σ_i ∇u_i)·n_i with n_e = −n_i.
                let from_e = -prm.sigma_e * d1(|s| solution.u_e(along(p, normal, s), t), 0.0, h);
                let from_i = -prm.sigma_i * d1(|s| solution.u_i(k, along(p, normal, s), t), 0.0, h);
                report.record(ResidualKind::MembraneFlux, relative(from_e - i_m, i_m));
                report.record(ResidualKind::MembraneFlux, relative(from_i - i_m, i_m));
            }
            SampleKind::Gap { pair, normal } => {
                let (k, l) = (pair.low(), pair.high());
                let w = solution.w(pair, p, t);
                let c = prm.gap_capacitance(pair)?;
                let r = prm.gap_resistance(pair)?;
                let i_g = solution.i_gap(pair, p, t);
                let g = solution.g_gap(pair, p, t);
                let dw = d1(|tau| solution.w(pair, p, tau), t, h);
                let rhs = i_g - (w - prm.w_rest) / r + g;
                let scale = (c * dw).abs().max(rhs.abs());
                report.record(ResidualKind::GapOde, relative(c * dw - rhs, scale));

                let jump = w - (solution.u_i(k, p, t) - solution.u_i(l, p, t));
                report.record(ResidualKind::GapJump, relative(jump, w));

                let from_k = -prm.sigma_i * d1(|s| solution.u_i(k, along(p, normal, s), t), 0.0, h);
                let into_l = -prm.sigma_i * d1(|s| solution.u_i(l, along(p, normal, s), t), 0.0, h);
                report.record(ResidualKind::GapFlux, relative(from_k - i_g, i_g));
                report.record(ResidualKind::GapFlux, relative(into_l - i_g, i_g));
            }
            SampleKind::Boundary { normal } => {
                let u = solution.u_e(p, t);
                report.record(ResidualKind::Boundary, relative(u - solution.u_app(p, t), u));
                let i_app = solution.i_app(p, normal, t);
                let fd = prm.sigma_e * d1(|s| solution.u_e(along(p, normal, s), t), 0.0, h);
                report.record(ResidualKind::Boundary, relative(fd - i_app, i_app));
            }
        }
        report.samples += 1;
    }
    Ok(report)
}

/// Draws `n` samples cycling through interior, membrane, gap and boundary
/// points, with times uniform in `[t_lo, t_hi]`.
pub fn random_samples(geometry: &GeometrySpec, n: usize, t_lo: f64, t_hi: f64, seed: u64) -> Vec<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let has_gaps = !geometry.gaps().is_empty();
    for i in 0..n {
        let t = if t_hi > t_lo { rng.gen_range(t_lo..=t_hi) } else { t_lo };
        let slot = match i % 4 {
            2 if !has_gaps => 0,
            s => s,
        };
        let (point, kind) = match geometry {
            GeometrySpec::Annulus2D(a) => {
                let th: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                let dir = [th.cos(), th.sin(), 0.0];
                match slot {
                    0 => {
                        let inside = rng.gen_bool(0.5);
                        let (lo, hi, sd) = if inside {
                            (a.r_core, a.r_membrane, Subdomain::Intracellular(1))
                        } else {
                            (a.r_membrane, a.r_outer, Subdomain::Extracellular)
                        };
                        let r = interior(&mut rng, lo, hi);
                        (along([0.0; 3], dir, r), SampleKind::Interior(sd))
                    }
                    1 => (along([0.0; 3], dir, a.r_membrane), SampleKind::Membrane { k: 1, normal: dir }),
                    _ => (along([0.0; 3], dir, a.r_outer), SampleKind::Boundary { normal: dir }),
                }
            }
            GeometrySpec::HemispherePair3D(hp) => {
                let dir = unit_vector(&mut rng);
                let cell = if dir[2] >= 0.0 { 1 } else { 2 };
                match slot {
                    0 => {
                        let inside = rng.gen_bool(0.5);
                        let (lo, hi, sd) = if inside {
                            (hp.rho_core, hp.rho_membrane, Subdomain::Intracellular(cell))
                        } else {
                            (hp.rho_membrane, hp.rho_outer, Subdomain::Extracellular)
                        };
                        let rho = interior(&mut rng, lo, hi);
                        (along([0.0; 3], dir, rho), SampleKind::Interior(sd))
                    }
                    1 => (
                        along([0.0; 3], dir, hp.rho_membrane),
                        SampleKind::Membrane { k: cell, normal: dir },
                    ),
                    2 => {
                        let th: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                        let rho = interior(&mut rng, hp.rho_core, hp.rho_membrane);
                        (
                            [rho * th.cos(), rho * th.sin(), 0.0],
                            SampleKind::Gap {
                                pair: GapPair::new(1, 2),
                                normal: [0.0, 0.0, -1.0],
                            },
                        )
                    }
                    _ => (along([0.0; 3], dir, hp.rho_outer), SampleKind::Boundary { normal: dir }),
                }
            }
            GeometrySpec::CellLattice3D(l) => match slot {
                0 => {
                    let (lo, hi) = l.box_bounds();
                    let p = [0, 1, 2].map(|a| interior(&mut rng, lo[a], hi[a]));
                    let sd = classify_lattice(l, p);
                    (p, SampleKind::Interior(sd))
                }
                1 => {
                    // Pick a face of a random cell that is not shared with a neighbour.
                    loop {
                        let k = rng.gen_range(1..=l.n_cells());
                        let axis = rng.gen_range(0..3);
                        let upper = rng.gen_bool(0.5);
                        let (ix, iy) = l.cell_position(k);
                        let shared = match (axis, upper) {
                            (0, false) => ix > 0,
                            (0, true) => ix + 1 < l.nx_cells,
                            (1, false) => iy > 0,
                            (1, true) => iy + 1 < l.ny_cells,
                            _ => false,
                        };
                        if shared {
                            continue;
                        }
                        let (lo, hi) = l.cell_bounds(k);
                        let mut p = [0, 1, 2].map(|a| interior(&mut rng, lo[a], hi[a]));
                        p[axis] = if upper { hi[axis] } else { lo[axis] };
                        let mut normal = [0.0; 3];
                        normal[axis] = if upper { 1.0 } else { -1.0 };
                        break (p, SampleKind::Membrane { k, normal });
                    }
                }
                2 => {
                    let gaps = l.gaps();
                    let pair = gaps[rng.gen_range(0..gaps.len())];
                    let (lo, hi) = l.cell_bounds(pair.low());
                    let axis = if l.cell_position(pair.high()).0 != l.cell_position(pair.low()).0 { 0 } else { 1 };
                    let mut p = [0, 1, 2].map(|a| interior(&mut rng, lo[a], hi[a]));
                    p[axis] = hi[axis];
                    let mut normal = [0.0; 3];
                    normal[axis] = 1.0;
                    (p, SampleKind::Gap { pair, normal })
                }
                _ => {
                    let (lo, hi) = l.box_bounds();
                    let axis = rng.gen_range(0..3);
                    let upper = rng.gen_bool(0.5);
                    let mut p = [0, 1, 2].map(|a| interior(&mut rng, lo[a], hi[a]));
                    p[axis] = if upper { hi[axis] } else { lo[axis] };
                    let mut normal = [0.0; 3];
                    normal[axis] = if upper { 1.0 } else { -1.0 };
                    (p, SampleKind::Boundary { normal })
                }
            },
        };
        out.push(Sample { point, t, kind });
    }
    out
}

fn interior(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    // Keep clear of the end points so interior samples classify unambiguously.
    let pad = 1e-3 * (hi - lo);
    rng.gen_range(lo + pad..hi - pad)
}

fn unit_vector(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let v = [0; 3].map(|_| rng.gen_range(-1.0..1.0));
        let n = dot(v, v).sqrt();
        if n > 1e-3 && n <= 1.0 && v[2] != 0.0 {
            return v.map(|x| x / n);
        }
    }
}

fn classify_lattice(l: &crate::model::CellLattice, p: Point) -> Subdomain {
    for k in 1..=l.n_cells() {
        let (lo, hi) = l.cell_bounds(k);
        if (0..3).all(|a| p[a] >= lo[a] && p[a] <= hi[a]) {
            return Subdomain::Intracellular(k);
        }
    }
    Subdomain::Extracellular
}
