//! The three reference configurations: a sinusoidal pulse in a single 2-D
//! cell, a damped cosine pulse in two coupled hemispheres, and the
//! manufactured solution on a 2×2 sheet of unit cubes.

use std::fmt;
use std::str::FromStr;

use super::{
    build_mms, build_single_cell, build_two_cell, AnalyticSolution, FreeCoefficient, MmsFamily,
    SingleCellFamily, TwoCellFamily,
};
use crate::error::{EmiError, Result};
use crate::model::{Annulus, CellLattice, GapPair, HemispherePair, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Preset {
    Exp1,
    Exp2,
    Exp3,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Exp1, Preset::Exp2, Preset::Exp3];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Exp1 => "exp1",
            Preset::Exp2 => "exp2",
            Preset::Exp3 => "exp3",
        }
    }

    pub fn solution(&self) -> AnalyticSolution {
        match self {
            Preset::Exp1 => exp1(),
            Preset::Exp2 => exp2(),
            Preset::Exp3 => exp3(),
        }
    }

    /// Default time window `(t0, t_end)`.
    pub fn time_window(&self) -> (f64, f64) {
        match self {
            Preset::Exp1 | Preset::Exp2 => (0.25, 7.0),
            Preset::Exp3 => (0.0, 1.0),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = EmiError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exp1" => Ok(Preset::Exp1),
            "exp2" => Ok(Preset::Exp2),
            "exp3" => Ok(Preset::Exp3),
            other => Err(EmiError::Config(format!(
                "unknown preset '{other}' (expected exp1, exp2 or exp3)"
            ))),
        }
    }
}

/// `A = 10 sin t`, `A₂ = 5`, `v₀ = 20`, `R = C = 1`, `v_rest = 5`, radii 3/5/6.
pub fn exp1_family() -> SingleCellFamily {
    SingleCellFamily {
        params: ModelParams::uniform(1, &[], 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 5.0, 0.0),
        geometry: Annulus {
            r_core: 3.0,
            r_membrane: 5.0,
            r_outer: 6.0,
        },
        a: FreeCoefficient::sine(10.0, 1.0),
        a2: FreeCoefficient::constant(5.0),
        v0: 20.0,
    }
}

/// `A = −50 e^{−t/10} cos t`, `A₂ = 0`, `v₀ = (10, 30)`, `R = C = 1`, `v_rest = 5`, radii 3/5/6.
pub fn exp2_family() -> TwoCellFamily {
    TwoCellFamily {
        params: ModelParams::uniform(2, &[GapPair::new(1, 2)], 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 5.0, 0.0),
        geometry: HemispherePair {
            rho_core: 3.0,
            rho_membrane: 5.0,
            rho_outer: 6.0,
        },
        a: FreeCoefficient::damped_cosine(-50.0, -0.1, 1.0),
        a2: FreeCoefficient::zero(),
        v0: [10.0, 30.0],
        w0: -20.0,
    }
}

/// 2×2 unit cubes in a 4.75×4.75×1.75 box, periods 0.5, `σ_i = 1`, `σ_e = 4`,
/// `A^k = k`, `B = 1`, `R = C = 1`, zero rest potentials.
pub fn exp3_family() -> MmsFamily {
    let geometry = CellLattice {
        nx_cells: 2,
        ny_cells: 2,
        cell_dims: [1.0; 3],
        box_dims: [4.75, 4.75, 1.75],
        mms_periods: [0.5; 3],
    };
    MmsFamily {
        params: ModelParams::uniform(4, &geometry.gaps(), 1.0, 4.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0),
        geometry,
        amplitudes: vec![1.0, 2.0, 3.0, 4.0],
        b: 1.0,
    }
}

pub fn exp1() -> AnalyticSolution {
    build_single_cell(exp1_family()).expect("preset is valid")
}

pub fn exp2() -> AnalyticSolution {
    build_two_cell(exp2_family()).expect("preset is valid")
}

pub fn exp3() -> AnalyticSolution {
    build_mms(exp3_family()).expect("preset is valid")
}
