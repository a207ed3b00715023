//! CSV export of the manufactured solution on a structured sampling lattice.
//!
//! Three tables are produced, each with a `t` column so several times share
//! one file:
//!
//! * volume: `t,x,y,z,subdomain,u_e,f_e,u_i,f_i` at sampling-lattice
//!   vertices, box surface included. `subdomain` is `0` outside the cells.
//!   `u_e` and `f_e` are written at every vertex (the closed forms extend
//!   smoothly into the cells); `u_i`, `f_i` belong to the owning cell and are
//!   empty outside the cells;
//! * interface: `t,x,y,z,k,l,nx,ny,nz,jump,g` at sampling faces on membranes
//!   (`l = 0`, `jump = v^k`, normal out of cell `k`) and gap junctions
//!   (`jump = w^{kℓ}`, normal from `k` to `ℓ`);
//! * boundary: `t,x,y,z,nx,ny,nz,u_app,i_app` at sampling faces on the box.
//!
//! Floats are written in shortest round-trip exponent form, so parsing a
//! file reproduces the evaluated values bit for bit. A TOML metadata file
//! records the schema version, geometry, parameters and times.

use std::fmt::Write as _;

use super::{ExactFields, MmsSolution, Subdomain};
use crate::error::{EmiError, Result};
use crate::model::{divides, GapPair, Point};

pub const SCHEMA_VERSION: u32 = 2;
pub const VOLUME_HEADER: &str = "t,x,y,z,subdomain,u_e,f_e,u_i,f_i";
pub const INTERFACE_HEADER: &str = "t,x,y,z,k,l,nx,ny,nz,jump,g";
pub const BOUNDARY_HEADER: &str = "t,x,y,z,nx,ny,nz,u_app,i_app";

/// Sampling lattice: each lattice cell is split `n` times along each axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExportGrid {
    pub samples_per_cell: [usize; 3],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumeRow {
    pub t: f64,
    pub point: Point,
    pub subdomain: usize,
    pub u_e: Option<f64>,
    pub f_e: Option<f64>,
    pub u_i: Option<f64>,
    pub f_i: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceRow {
    pub t: f64,
    pub point: Point,
    pub k: usize,
    /// `0` for a membrane face.
    pub l: usize,
    pub normal: [f64; 3],
    pub jump: f64,
    pub g: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryRow {
    pub t: f64,
    pub point: Point,
    pub normal: [f64; 3],
    pub u_app: f64,
    pub i_app: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MmsExport {
    pub metadata: String,
    pub volume: String,
    pub interface: String,
    pub boundary: String,
}

struct Lattice {
    lo: Point,
    h: [f64; 3],
    n: [usize; 3],
}

impl Lattice {
    fn center(&self, i: [usize; 3]) -> Point {
        [0, 1, 2].map(|a| self.lo[a] + (i[a] as f64 + 0.5) * self.h[a])
    }

    fn vertex(&self, i: [usize; 3]) -> Point {
        [0, 1, 2].map(|a| self.lo[a] + i[a] as f64 * self.h[a])
    }
}

fn sampling_lattice(solution: &MmsSolution, grid: ExportGrid) -> Result<Lattice> {
    let l = solution.lattice();
    let (lo, _) = l.box_bounds();
    let mut h = [0.0; 3];
    let mut n = [0usize; 3];
    for a in 0..3 {
        let m = grid.samples_per_cell[a];
        if m == 0 {
            return Err(EmiError::Config("samples_per_cell must be >= 1".into()));
        }
        h[a] = l.cell_dims[a] / m as f64;
        if !divides(h[a], l.box_dims[a]) || !divides(h[a], l.margins()[a]) {
            return Err(EmiError::Config(format!(
                "sampling spacing {} does not align with the box along axis {a}",
                h[a]
            )));
        }
        n[a] = (l.box_dims[a] / h[a]).round() as usize;
    }
    Ok(Lattice { lo, h, n })
}

fn fmt_row(out: &mut String, values: &[Field]) {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        match v {
            Field::F(x) => write!(out, "{x:e}").expect("write to string"),
            Field::U(x) => write!(out, "{x}").expect("write to string"),
            Field::O(Some(x)) => write!(out, "{x:e}").expect("write to string"),
            Field::O(None) => {}
        }
    }
    out.push('\n');
}

enum Field {
    F(f64),
    U(usize),
    O(Option<f64>),
}

fn subdomain_id(sd: Option<Subdomain>) -> usize {
    sd.map(|s| s.id()).unwrap_or(0)
}

pub fn volume_rows(solution: &MmsSolution, grid: ExportGrid, times: &[f64]) -> Result<Vec<VolumeRow>> {
    let lat = sampling_lattice(solution, grid)?;
    let mut rows = Vec::with_capacity(lat.n.iter().map(|n| n + 1).product::<usize>() * times.len());
    for &t in times {
        for iz in 0..=lat.n[2] {
            for iy in 0..=lat.n[1] {
                for ix in 0..=lat.n[0] {
                    let p = lat.vertex([ix, iy, iz]);
                    let sd = subdomain_id(solution.locate(p));
                    let (u_i, f_i) = match sd {
                        0 => (None, None),
                        k => (Some(solution.u_i(k, p, t)), Some(solution.f_i(k, p, t))),
                    };
                    rows.push(VolumeRow {
                        t,
                        point: p,
                        subdomain: sd,
                        u_e: Some(solution.u_e(p, t)),
                        f_e: Some(solution.f_e(p, t)),
                        u_i,
                        f_i,
                    });
                }
            }
        }
    }
    Ok(rows)
}

pub fn interface_rows(solution: &MmsSolution, grid: ExportGrid, times: &[f64]) -> Result<Vec<InterfaceRow>> {
    let lat = sampling_lattice(solution, grid)?;
    let ids: Vec<usize> = {
        let mut v = Vec::with_capacity(lat.n.iter().product());
        for iz in 0..lat.n[2] {
            for iy in 0..lat.n[1] {
                for ix in 0..lat.n[0] {
                    v.push(subdomain_id(solution.locate(lat.center([ix, iy, iz]))));
                }
            }
        }
        v
    };
    let idx = |i: [usize; 3]| i[0] + lat.n[0] * (i[1] + lat.n[1] * i[2]);
    let mut faces: Vec<(Point, usize, usize, [f64; 3])> = Vec::new();
    for iz in 0..lat.n[2] {
        for iy in 0..lat.n[1] {
            for ix in 0..lat.n[0] {
                let i = [ix, iy, iz];
                for axis in 0..3 {
                    if i[axis] + 1 >= lat.n[axis] {
                        continue;
                    }
                    let mut j = i;
                    j[axis] += 1;
                    let (a, b) = (ids[idx(i)], ids[idx(j)]);
                    if a == b {
                        continue;
                    }
                    let mut p = lat.center(i);
                    p[axis] += 0.5 * lat.h[axis];
                    let mut n = [0.0; 3];
                    n[axis] = 1.0;
                    let face = match (a, b) {
                        (0, k) => (p, k, 0, n.map(|x| -x)),
                        (k, 0) => (p, k, 0, n),
                        (k, l) if k < l => (p, k, l, n),
                        (k, l) => (p, l, k, n.map(|x| -x)),
                    };
                    faces.push(face);
                }
            }
        }
    }
    let mut rows = Vec::with_capacity(faces.len() * times.len());
    for &t in times {
        for &(p, k, l, normal) in &faces {
            let (jump, g) = if l == 0 {
                (solution.v(k, p, t), solution.g(k, p, t))
            } else {
                let pair = GapPair::new(k, l);
                (solution.w(pair, p, t), solution.g_gap(pair, p, t))
            };
            rows.push(InterfaceRow { t, point: p, k, l, normal, jump, g });
        }
    }
    Ok(rows)
}

pub fn boundary_rows(solution: &MmsSolution, grid: ExportGrid, times: &[f64]) -> Result<Vec<BoundaryRow>> {
    let lat = sampling_lattice(solution, grid)?;
    let (_, hi) = solution.lattice().box_bounds();
    let mut faces: Vec<(Point, [f64; 3])> = Vec::new();
    for axis in 0..3 {
        let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
        for side in [false, true] {
            for j in 0..lat.n[v] {
                for i in 0..lat.n[u] {
                    let mut p = [0.0; 3];
                    p[u] = lat.lo[u] + (i as f64 + 0.5) * lat.h[u];
                    p[v] = lat.lo[v] + (j as f64 + 0.5) * lat.h[v];
                    p[axis] = if side { hi[axis] } else { lat.lo[axis] };
                    let mut n = [0.0; 3];
                    n[axis] = if side { 1.0 } else { -1.0 };
                    faces.push((p, n));
                }
            }
        }
    }
    let mut rows = Vec::with_capacity(faces.len() * times.len());
    for &t in times {
        for &(p, normal) in &faces {
            rows.push(BoundaryRow {
                t,
                point: p,
                normal,
                u_app: solution.u_app(p, t),
                i_app: solution.i_app(p, normal, t),
            });
        }
    }
    Ok(rows)
}

pub fn write_volume(rows: &[VolumeRow]) -> String {
    let mut s = String::with_capacity(64 * rows.len() + 32);
    s.push_str(VOLUME_HEADER);
    s.push('\n');
    for r in rows {
        use Field::*;
        fmt_row(
            &mut s,
            &[
                F(r.t),
                F(r.point[0]),
                F(r.point[1]),
                F(r.point[2]),
                U(r.subdomain),
                O(r.u_e),
                O(r.f_e),
                O(r.u_i),
                O(r.f_i),
            ],
        );
    }
    s
}

pub fn write_interface(rows: &[InterfaceRow]) -> String {
    let mut s = String::with_capacity(96 * rows.len() + 32);
    s.push_str(INTERFACE_HEADER);
    s.push('\n');
    for r in rows {
        use Field::*;
        fmt_row(
            &mut s,
            &[
                F(r.t),
                F(r.point[0]),
                F(r.point[1]),
                F(r.point[2]),
                U(r.k),
                U(r.l),
                F(r.normal[0]),
                F(r.normal[1]),
                F(r.normal[2]),
                F(r.jump),
                F(r.g),
            ],
        );
    }
    s
}

pub fn write_boundary(rows: &[BoundaryRow]) -> String {
    let mut s = String::with_capacity(96 * rows.len() + 32);
    s.push_str(BOUNDARY_HEADER);
    s.push('\n');
    for r in rows {
        use Field::*;
        fmt_row(
            &mut s,
            &[
                F(r.t),
                F(r.point[0]),
                F(r.point[1]),
                F(r.point[2]),
                F(r.normal[0]),
                F(r.normal[1]),
                F(r.normal[2]),
                F(r.u_app),
                F(r.i_app),
            ],
        );
    }
    s
}

fn parse_table(text: &str, header: &str) -> Result<Vec<Vec<String>>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == header => {}
        Some(h) => return Err(EmiError::Config(format!("expected header '{header}', found '{h}'"))),
        None => return Err(EmiError::Config("empty CSV".into())),
    }
    let width = header.split(',').count();
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let cols: Vec<String> = l.split(',').map(|c| c.trim().to_string()).collect();
            if cols.len() != width {
                return Err(EmiError::Config(format!(
                    "line {}: expected {width} columns, found {}",
                    i + 2,
                    cols.len()
                )));
            }
            Ok(cols)
        })
        .collect()
}

fn num(s: &str) -> Result<f64> {
    s.parse().map_err(|_| EmiError::Config(format!("not a number: '{s}'")))
}

fn opt(s: &str) -> Result<Option<f64>> {
    if s.is_empty() {
        Ok(None)
    } else {
        num(s).map(Some)
    }
}

fn int(s: &str) -> Result<usize> {
    s.parse().map_err(|_| EmiError::Config(format!("not an index: '{s}'")))
}

pub fn parse_volume(text: &str) -> Result<Vec<VolumeRow>> {
    parse_table(text, VOLUME_HEADER)?
        .iter()
        .map(|c| {
            Ok(VolumeRow {
                t: num(&c[0])?,
                point: [num(&c[1])?, num(&c[2])?, num(&c[3])?],
                subdomain: int(&c[4])?,
                u_e: opt(&c[5])?,
                f_e: opt(&c[6])?,
                u_i: opt(&c[7])?,
                f_i: opt(&c[8])?,
            })
        })
        .collect()
}

pub fn parse_interface(text: &str) -> Result<Vec<InterfaceRow>> {
    parse_table(text, INTERFACE_HEADER)?
        .iter()
        .map(|c| {
            Ok(InterfaceRow {
                t: num(&c[0])?,
                point: [num(&c[1])?, num(&c[2])?, num(&c[3])?],
                k: int(&c[4])?,
                l: int(&c[5])?,
                normal: [num(&c[6])?, num(&c[7])?, num(&c[8])?],
                jump: num(&c[9])?,
                g: num(&c[10])?,
            })
        })
        .collect()
}

pub fn parse_boundary(text: &str) -> Result<Vec<BoundaryRow>> {
    parse_table(text, BOUNDARY_HEADER)?
        .iter()
        .map(|c| {
            Ok(BoundaryRow {
                t: num(&c[0])?,
                point: [num(&c[1])?, num(&c[2])?, num(&c[3])?],
                normal: [num(&c[4])?, num(&c[5])?, num(&c[6])?],
                u_app: num(&c[7])?,
                i_app: num(&c[8])?,
            })
        })
        .collect()
}

fn toml_array(values: &[f64]) -> String {
    let items: Vec<String> = values.iter().map(|v| format!("{v:e}")).collect();
    format!("[{}]", items.join(", "))
}

/// TOML metadata describing an export.
pub fn metadata(solution: &MmsSolution, grid: ExportGrid, times: &[f64]) -> String {
    let l = solution.lattice();
    let p = solution.params();
    let fam = solution.family();
    let (lo, hi) = l.box_bounds();
    let mut s = String::new();
    let _ = writeln!(s, "schema = \"emi-mms-export\"");
    let _ = writeln!(s, "version = {SCHEMA_VERSION}");
    let _ = writeln!(s, "times = {}", toml_array(times));
    let _ = writeln!(s, "files = [\"volume\", \"interface\", \"boundary\"]");
    let _ = writeln!(s, "volume_columns = \"{VOLUME_HEADER}\"");
    let _ = writeln!(s, "interface_columns = \"{INTERFACE_HEADER}\"");
    let _ = writeln!(s, "boundary_columns = \"{BOUNDARY_HEADER}\"");
    let _ = writeln!(s);
    let _ = writeln!(s, "[geometry]");
    let _ = writeln!(s, "nx_cells = {}", l.nx_cells);
    let _ = writeln!(s, "ny_cells = {}", l.ny_cells);
    let _ = writeln!(s, "cell_dims = {}", toml_array(&l.cell_dims));
    let _ = writeln!(s, "box_dims = {}", toml_array(&l.box_dims));
    let _ = writeln!(s, "mms_periods = {}", toml_array(&l.mms_periods));
    let _ = writeln!(s, "box_lower = {}", toml_array(&lo));
    let _ = writeln!(s, "box_upper = {}", toml_array(&hi));
    let _ = writeln!(
        s,
        "samples_per_cell = [{}, {}, {}]",
        grid.samples_per_cell[0], grid.samples_per_cell[1], grid.samples_per_cell[2]
    );
    let _ = writeln!(s);
    let _ = writeln!(s, "[params]");
    let _ = writeln!(s, "sigma_i = {:e}", p.sigma_i);
    let _ = writeln!(s, "sigma_e = {:e}", p.sigma_e);
    let _ = writeln!(s, "cm_membrane = {}", toml_array(&p.cm_membrane));
    let _ = writeln!(s, "rm_membrane = {}", toml_array(&p.rm_membrane));
    let _ = writeln!(s, "v_rest = {:e}", p.v_rest);
    let _ = writeln!(s, "w_rest = {:e}", p.w_rest);
    for pair in p.gaps() {
        let _ = writeln!(s, "[[params.gap]]");
        let _ = writeln!(s, "pair = [{}, {}]", pair.low(), pair.high());
        let _ = writeln!(s, "cm = {:e}", p.cm_gap[&pair]);
        let _ = writeln!(s, "rm = {:e}", p.rm_gap[&pair]);
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "[solution]");
    let _ = writeln!(s, "amplitudes = {}", toml_array(&fam.amplitudes));
    let _ = writeln!(s, "b = {:e}", fam.b);
    s
}

pub fn export_mms(solution: &MmsSolution, grid: ExportGrid, times: &[f64]) -> Result<MmsExport> {
    if times.is_empty() || times.iter().any(|t| !t.is_finite()) {
        return Err(EmiError::Config("export needs at least one finite time".into()));
    }
    Ok(MmsExport {
        metadata: metadata(solution, grid, times),
        volume: write_volume(&volume_rows(solution, grid, times)?),
        interface: write_interface(&interface_rows(solution, grid, times)?),
        boundary: write_boundary(&boundary_rows(solution, grid, times)?),
    })
}
