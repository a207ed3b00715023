//! Uniform cell-centred grid over the lattice box with classified faces.

use std::collections::BTreeMap;

use crate::error::{EmiError, Result};
use crate::model::{divides, CellLattice, GapPair, Point};

/// Subdomain owning a grid cell: 0 is extracellular, `k ≥ 1` is cell `k`.
pub type Owner = usize;

/// Face between an intracellular grid cell and an extracellular one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MembraneFace {
    pub cell: usize,
    /// Unknown index on the intracellular side.
    pub inner: usize,
    /// Unknown index on the extracellular side.
    pub outer: usize,
    /// Outward normal of the cell.
    pub normal: [f64; 3],
    pub center: Point,
}

/// Face between grid cells of two different biological cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapFace {
    pub pair: GapPair,
    /// Unknown index inside `pair.low()`.
    pub low: usize,
    /// Unknown index inside `pair.high()`.
    pub high: usize,
    /// Unit normal pointing from the low cell into the high cell.
    pub normal: [f64; 3],
    pub center: Point,
}

/// Extracellular face on the box wall.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryFace {
    pub unknown: usize,
    /// Outward normal of the box.
    pub normal: [f64; 3],
    pub center: Point,
}

/// Face between two grid cells of the same subdomain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InternalFace {
    pub a: usize,
    pub b: usize,
    pub owner: Owner,
}

#[derive(Debug, Clone)]
pub struct LatticeGrid {
    lattice: CellLattice,
    h: f64,
    dims: [usize; 3],
    lo: Point,
    owner: Vec<Owner>,
    /// Grid-cell id of every unknown, subdomain-major.
    cell_of_unknown: Vec<usize>,
    /// First unknown of each subdomain, plus the total at the end.
    offsets: Vec<usize>,
    pub membrane: Vec<MembraneFace>,
    pub gap: Vec<GapFace>,
    pub boundary: Vec<BoundaryFace>,
    pub internal: Vec<InternalFace>,
}

const AXES: [&str; 3] = ["x", "y", "z"];

fn unit(axis: usize, sign: f64) -> [f64; 3] {
    let mut n = [0.0; 3];
    n[axis] = sign;
    n
}

/// Planes that must fall on grid lines, as `(description, length)`.
fn alignment_planes(lattice: &CellLattice) -> Vec<(String, f64)> {
    let m = lattice.margins();
    let mut out = Vec::new();
    for a in 0..3 {
        out.push((format!("cell dimension along {}", AXES[a]), lattice.cell_dims[a]));
        out.push((format!("margin along {}", AXES[a]), m[a]));
        out.push((format!("quarter mms period along {}", AXES[a]), 0.25 * lattice.mms_periods[a]));
    }
    out
}

/// Builds the grid with spacing `h`; every cell face, margin and quarter
/// period must be an integer multiple of `h`.
pub fn build_grid(lattice: &CellLattice, h: f64) -> Result<LatticeGrid> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(EmiError::Config(format!("grid spacing must be > 0, got {h}")));
    }
    let bad: Vec<String> = alignment_planes(lattice)
        .into_iter()
        .filter(|(_, len)| !divides(h, *len))
        .map(|(what, len)| format!("{what} = {len}"))
        .collect();
    if !bad.is_empty() {
        return Err(EmiError::Config(format!("h = {h} does not align with {}", bad.join(", "))));
    }
    let dims = [0, 1, 2].map(|a| (lattice.box_dims[a] / h).round() as usize);
    let (lo, _) = lattice.box_bounds();
    let cells_per = [0, 1, 2].map(|a| (lattice.cell_dims[a] / h).round() as usize);
    let margin = [0, 1, 2].map(|a| (lattice.margins()[a] / h).round() as usize);

    let n_total = dims[0] * dims[1] * dims[2];
    let mut owner = vec![0; n_total];
    for k in 0..dims[2] {
        for j in 0..dims[1] {
            for i in 0..dims[0] {
                let idx = [i, j, k];
                let inside = (0..3).all(|a| {
                    let span = if a == 0 {
                        lattice.nx_cells
                    } else if a == 1 {
                        lattice.ny_cells
                    } else {
                        1
                    } * cells_per[a];
                    idx[a] >= margin[a] && idx[a] < margin[a] + span
                });
                if inside {
                    let ix = (i - margin[0]) / cells_per[0];
                    let iy = (j - margin[1]) / cells_per[1];
                    owner[i + dims[0] * (j + dims[1] * k)] = lattice.cell_id(ix, iy);
                }
            }
        }
    }

    let n_sub = lattice.n_cells() + 1;
    let mut counts = vec![0usize; n_sub];
    for &o in &owner {
        counts[o] += 1;
    }
    let mut offsets = vec![0usize; n_sub + 1];
    for s in 0..n_sub {
        offsets[s + 1] = offsets[s] + counts[s];
    }
    let mut next = offsets.clone();
    let mut unknown_of_cell = vec![0usize; n_total];
    let mut cell_of_unknown = vec![0usize; n_total];
    for (c, &o) in owner.iter().enumerate() {
        unknown_of_cell[c] = next[o];
        cell_of_unknown[next[o]] = c;
        next[o] += 1;
    }

    let mut grid = LatticeGrid {
        lattice: *lattice,
        h,
        dims,
        lo,
        owner,
        cell_of_unknown,
        offsets,
        membrane: Vec::new(),
        gap: Vec::new(),
        boundary: Vec::new(),
        internal: Vec::new(),
    };

    let lin = |i: usize, j: usize, k: usize| i + dims[0] * (j + dims[1] * k);
    for k in 0..dims[2] {
        for j in 0..dims[1] {
            for i in 0..dims[0] {
                let c = lin(i, j, k);
                let idx = [i, j, k];
                for a in 0..3 {
                    for (at_wall, sign) in [(idx[a] == 0, -1.0), (idx[a] + 1 == dims[a], 1.0)] {
                        if at_wall {
                            let mut center = grid.center_of(c);
                            center[a] += sign * 0.5 * h;
                            grid.boundary.push(BoundaryFace {
                                unknown: unknown_of_cell[c],
                                normal: unit(a, sign),
                                center,
                            });
                        }
                    }
                    if idx[a] + 1 == dims[a] {
                        continue;
                    }
                    let mut nb = idx;
                    nb[a] += 1;
                    let d = lin(nb[0], nb[1], nb[2]);
                    let (oc, od) = (grid.owner[c], grid.owner[d]);
                    let (uc, ud) = (unknown_of_cell[c], unknown_of_cell[d]);
                    let mut center = grid.center_of(c);
                    center[a] += 0.5 * h;
                    if oc == od {
                        grid.internal.push(InternalFace { a: uc, b: ud, owner: oc });
                    } else if oc == 0 || od == 0 {
                        let (cell, inner, outer, sign) = if oc == 0 { (od, ud, uc, -1.0) } else { (oc, uc, ud, 1.0) };
                        grid.membrane.push(MembraneFace {
                            cell,
                            inner,
                            outer,
                            normal: unit(a, sign),
                            center,
                        });
                    } else {
                        let pair = GapPair::new(oc, od);
                        let (low, high, sign) = if oc < od { (uc, ud, 1.0) } else { (ud, uc, -1.0) };
                        grid.gap.push(GapFace {
                            pair,
                            low,
                            high,
                            normal: unit(a, sign),
                            center,
                        });
                    }
                }
            }
        }
    }
    // Boundary faces cannot touch a cell: the sheet sits strictly inside the box.
    debug_assert!(grid.boundary.iter().all(|f| grid.owner_of_unknown(f.unknown) == 0));
    Ok(grid)
}

/// Areas and volumes recovered from face and cell counts.
#[derive(Debug, Clone, PartialEq)]
pub struct GridAudit {
    pub membrane_area: Vec<f64>,
    pub gap_area: BTreeMap<GapPair, f64>,
    pub cell_volume: Vec<f64>,
    pub extracellular_volume: f64,
    pub boundary_area: f64,
}

impl LatticeGrid {
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn lattice(&self) -> &CellLattice {
        &self.lattice
    }

    pub fn n_unknowns(&self) -> usize {
        self.cell_of_unknown.len()
    }

    pub fn n_subdomains(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Unknown indices of subdomain `s` (0 extracellular, `k` cell `k`).
    pub fn subdomain_range(&self, s: Owner) -> std::ops::Range<usize> {
        self.offsets[s]..self.offsets[s + 1]
    }

    pub fn owner_of_unknown(&self, u: usize) -> Owner {
        self.owner[self.cell_of_unknown[u]]
    }

    fn center_of(&self, c: usize) -> Point {
        let i = c % self.dims[0];
        let j = (c / self.dims[0]) % self.dims[1];
        let k = c / (self.dims[0] * self.dims[1]);
        [
            self.lo[0] + (i as f64 + 0.5) * self.h,
            self.lo[1] + (j as f64 + 0.5) * self.h,
            self.lo[2] + (k as f64 + 0.5) * self.h,
        ]
    }

    /// Centre of the grid cell carrying unknown `u`.
    pub fn center(&self, u: usize) -> Point {
        self.center_of(self.cell_of_unknown[u])
    }

    pub fn audit(&self) -> GridAudit {
        let (h2, h3) = (self.h * self.h, self.h.powi(3));
        let n = self.lattice.n_cells();
        let mut membrane_area = vec![0.0; n];
        for f in &self.membrane {
            membrane_area[f.cell - 1] += h2;
        }
        let mut gap_area = BTreeMap::new();
        for f in &self.gap {
            *gap_area.entry(f.pair).or_insert(0.0) += h2;
        }
        let cell_volume = (1..=n).map(|k| self.subdomain_range(k).len() as f64 * h3).collect();
        GridAudit {
            membrane_area,
            gap_area,
            cell_volume,
            extracellular_volume: self.subdomain_range(0).len() as f64 * h3,
            boundary_area: self.boundary.len() as f64 * h2,
        }
    }
}
