//! TOML run configuration. Every key is optional; command-line flags take
//! precedence over the file, and the file over the preset defaults.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use emi_core::analytic::presets::{self, Preset};
use emi_core::analytic::{build_mms, build_single_cell, build_two_cell, AnalyticSolution, MmsFamily};
use emi_core::cartesian::{BoundaryData, DEFAULT_TOL};
use emi_core::model::ModelParams;
use emi_core::verify::Case;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub preset: Option<String>,
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub time: TimeSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub schedule: ScheduleSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub params: ParamsSection,
    #[serde(default)]
    pub mms: MmsSection,
    #[serde(default)]
    pub export: ExportSection,
    #[serde(default)]
    pub residual: ResidualSection,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub t0: Option<f64>,
    pub t_end: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub c_l: Option<f64>,
    pub n_f: Option<usize>,
    pub snapshot: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    /// `[[c_l, n_f], ...]`.
    pub rows: Option<Vec<(f64, usize)>>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub boundary: Option<String>,
    pub tolerance: Option<f64>,
}

/// Uniform overrides of the passive parameters of the preset family.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub sigma_i: Option<f64>,
    pub sigma_e: Option<f64>,
    pub cm: Option<f64>,
    pub rm: Option<f64>,
    pub cm_gap: Option<f64>,
    pub rm_gap: Option<f64>,
    pub v_rest: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MmsSection {
    pub amplitudes: Option<Vec<f64>>,
    pub b: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExportSection {
    pub samples_per_cell: Option<[usize; 3]>,
    pub times: Option<Vec<f64>>,
    pub prefix: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResidualSection {
    pub samples: Option<usize>,
    pub step: Option<f64>,
    pub seed: Option<u64>,
    pub threshold: Option<f64>,
}

impl FileConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("config: {}", e.message())))
    }

    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", p.display())))?;
                Self::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
            }
        }
    }

    /// Flag first, then file, then the built-in default.
    pub fn preset(&self, flag: Option<&str>, default: Preset) -> CliResult<Preset> {
        match flag.or(self.preset.as_deref()) {
            Some(s) => s.parse().map_err(CliError::from),
            None => Ok(default),
        }
    }

    pub fn boundary(&self, flag: Option<&str>) -> CliResult<BoundaryData> {
        match flag.or(self.solver.boundary.as_deref()) {
            Some(s) => s.parse().map_err(CliError::from),
            None => Ok(BoundaryData::default()),
        }
    }

    pub fn tolerance(&self, flag: Option<f64>) -> CliResult<f64> {
        let tol = flag.or(self.solver.tolerance).unwrap_or(DEFAULT_TOL);
        if tol > 0.0 && tol < 1.0 {
            Ok(tol)
        } else {
            Err(CliError::Config(format!("tolerance must lie in (0, 1), got {tol}")))
        }
    }

    pub fn output_dir(&self, flag: Option<&Path>) -> PathBuf {
        flag.map(Path::to_path_buf)
            .or_else(|| self.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from("."))
    }

    pub fn window(&self, preset: Preset, t0: Option<f64>, t_end: Option<f64>) -> (f64, f64) {
        let (d0, d1) = preset.time_window();
        (t0.or(self.time.t0).unwrap_or(d0), t_end.or(self.time.t_end).unwrap_or(d1))
    }

    fn apply_params(&self, p: &mut ModelParams) {
        let s = &self.params;
        if let Some(x) = s.sigma_i {
            p.sigma_i = x;
        }
        if let Some(x) = s.sigma_e {
            p.sigma_e = x;
        }
        if let Some(x) = s.cm {
            p.cm_membrane.iter_mut().for_each(|c| *c = x);
        }
        if let Some(x) = s.rm {
            p.rm_membrane.iter_mut().for_each(|r| *r = x);
        }
        if let Some(x) = s.cm_gap {
            p.cm_gap.values_mut().for_each(|c| *c = x);
        }
        if let Some(x) = s.rm_gap {
            p.rm_gap.values_mut().for_each(|r| *r = x);
        }
        if let Some(x) = s.v_rest {
            p.v_rest = x;
        }
    }

    pub fn mms_family(&self) -> MmsFamily {
        let mut f = presets::exp3_family();
        self.apply_params(&mut f.params);
        if let Some(a) = &self.mms.amplitudes {
            f.amplitudes = a.clone();
        }
        if let Some(b) = self.mms.b {
            f.b = b;
        }
        f
    }

    /// The preset family with the file's overrides applied.
    pub fn case(&self, preset: Preset, boundary: BoundaryData, tolerance: f64) -> Case {
        match preset {
            Preset::Exp1 => {
                let mut f = presets::exp1_family();
                self.apply_params(&mut f.params);
                Case::SingleCell(f)
            }
            Preset::Exp2 => {
                let mut f = presets::exp2_family();
                self.apply_params(&mut f.params);
                Case::TwoCell(f)
            }
            Preset::Exp3 => Case::Mms {
                family: self.mms_family(),
                boundary,
                tolerance,
            },
        }
    }

    pub fn solution(&self, preset: Preset) -> CliResult<AnalyticSolution> {
        let built = match self.case(preset, BoundaryData::default(), DEFAULT_TOL) {
            Case::SingleCell(f) => build_single_cell(f),
            Case::TwoCell(f) => build_two_cell(f),
            Case::Mms { family, .. } => build_mms(family),
        };
        built.map_err(CliError::from)
    }
}

/// Parses `a,b,c` into numbers.
pub fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> CliResult<Vec<T>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| CliError::Config(format!("invalid {what} entry '{}'", s.trim())))
        })
        .collect()
}

/// Parses `c_l:n_f,c_l:n_f,...`.
pub fn parse_schedule(text: &str) -> CliResult<Vec<(f64, usize)>> {
    text.split(',')
        .map(|item| {
            let bad = || CliError::Config(format!("invalid schedule row '{item}' (expected c_l:n_f)"));
            let (c, n) = item.trim().split_once(':').ok_or_else(bad)?;
            Ok((c.trim().parse().map_err(|_| bad())?, n.trim().parse().map_err(|_| bad())?))
        })
        .collect()
}
