//! Run configuration, read from TOML. Unknown keys are rejected.
//!
//! Every section is optional; missing sections take the defaults below.
//! `README.md` lists the full schema.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use threewave::groundstate::SolverOptions;
use threewave::propagator::EvolveConfig;
use threewave::{Grid64, SystemParams64};

use crate::error::{LabError, LabResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Groundstate,
    Evolve,
    Morawetz,
    Criterion,
    ThresholdSweep,
    Covariance,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Groundstate => "groundstate",
            Task::Evolve => "evolve",
            Task::Morawetz => "morawetz",
            Task::Criterion => "criterion",
            Task::ThresholdSweep => "threshold-sweep",
            Task::Covariance => "covariance",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridKindSpec {
    Box,
    Radial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub kind: GridKindSpec,
    /// Box dimension; ignored (always 5) for radial meshes.
    pub dim: usize,
    /// Box half-width or radial `r_max`.
    pub extent: f64,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            kind: GridKindSpec::Box,
            dim: 2,
            extent: 10.0,
            points: 64,
        }
    }
}

impl GridSpec {
    pub fn build(&self) -> LabResult<Grid64> {
        let g = match self.kind {
            GridKindSpec::Box => Grid64::periodic(self.dim, self.extent, self.points),
            GridKindSpec::Radial => Grid64::radial(self.extent, self.points),
        };
        Ok(g?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParamsSpec {
    pub kappa: [f64; 3],
}

impl Default for ParamsSpec {
    fn default() -> Self {
        Self {
            kappa: [1.0, 1.0, 0.5],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialKind {
    /// `(e, i e, (0.5 + 0.3i) e)` with `e = amplitude · exp(−|x|²/width)`.
    Gaussian,
    /// `(0, 0, amplitude · exp(−|x|²/width))`.
    Trivial,
    /// `scale · Q` for the ground state of the configured `κ`.
    GroundState,
    /// Seeded sum of complex Gaussian bumps.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialSpec {
    pub kind: InitialKind,
    pub amplitude: f64,
    pub width: f64,
    pub scale: f64,
    /// Apply the `M = E` rescaling before evolving.
    pub normalize: bool,
}

impl Default for InitialSpec {
    fn default() -> Self {
        Self {
            kind: InitialKind::Gaussian,
            amplitude: 0.5,
            width: 1.0,
            scale: 1.0,
            normalize: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveSpec {
    pub dt: f64,
    pub t_final: f64,
    pub record_every: usize,
}

impl Default for EvolveSpec {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_final: 1.0,
            record_every: 50,
        }
    }
}

impl EvolveSpec {
    pub fn config(&self) -> EvolveConfig<f64> {
        EvolveConfig::new(self.dt, self.t_final, self.record_every)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GroundStateSpec {
    pub tol: f64,
    pub max_iter: usize,
    pub relaxation: f64,
}

impl Default for GroundStateSpec {
    fn default() -> Self {
        let o = SolverOptions::<f64>::default();
        Self {
            tol: o.tol,
            max_iter: o.max_iter,
            relaxation: o.relaxation,
        }
    }
}

impl GroundStateSpec {
    pub fn options(&self) -> SolverOptions<f64> {
        SolverOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            relaxation: self.relaxation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MorawetzSpec {
    pub eps: f64,
    pub r0: f64,
    pub log_count_j: u32,
    /// Averaging window; `None` means `e^{log_count_j}`, clamped to the span.
    pub t0: Option<f64>,
    /// `s`-lattice stride as a fraction of `R`.
    pub s_stride: f64,
}

impl Default for MorawetzSpec {
    fn default() -> Self {
        Self {
            eps: 0.25,
            r0: 0.5,
            log_count_j: 1,
            t0: None,
            s_stride: threewave::morawetz::S_STRIDE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CriterionSpec {
    pub eps: f64,
    pub t0: f64,
}

impl Default for CriterionSpec {
    fn default() -> Self {
        Self { eps: 1e-3, t0: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSpec {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub count: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            lambda_min: 0.5,
            lambda_max: 1.5,
            count: 5,
        }
    }
}

impl SweepSpec {
    pub fn lambdas(&self) -> Vec<f64> {
        if self.count <= 1 {
            return vec![self.lambda_min];
        }
        let step = (self.lambda_max - self.lambda_min) / (self.count - 1) as f64;
        (0..self.count).map(|k| self.lambda_min + step * k as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CovarianceSpec {
    pub xi: Vec<f64>,
    pub t_final: f64,
    pub dts: Vec<f64>,
    pub kappas: Vec<[f64; 3]>,
}

impl Default for CovarianceSpec {
    fn default() -> Self {
        Self {
            xi: vec![0.5, 0.0],
            t_final: 1.0,
            dts: vec![1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0],
            kappas: vec![[2.0, 2.0, 1.0], [1.0, 1.0, 1.0]],
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub grid: GridSpec,
    pub params: ParamsSpec,
    pub initial: InitialSpec,
    pub evolve: EvolveSpec,
    pub groundstate: GroundStateSpec,
    pub morawetz: MorawetzSpec,
    pub criterion: CriterionSpec,
    pub sweep: SweepSpec,
    pub covariance: CovarianceSpec,
}

impl FromStr for RunConfig {
    type Err = LabError;

    fn from_str(s: &str) -> LabResult<Self> {
        toml::from_str(s).map_err(|e| LabError::Validation(format!("config: {e}")))
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> LabResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Validation(format!("cannot read {}: {e}", path.display())))?;
        text.parse()
    }

    pub fn params(&self) -> LabResult<SystemParams64> {
        Ok(SystemParams64::from_array(self.params.kappa)?)
    }

    /// Cross-field checks that must pass before any work starts.
    pub fn validate(&self, task: Task) -> LabResult<()> {
        let grid = self.grid.build()?;
        let p = self.params()?;
        let bad = |m: String| Err(LabError::Validation(m));
        let radial_data = self.initial.kind == InitialKind::GroundState;
        match task {
            Task::Groundstate | Task::ThresholdSweep if !grid.is_radial() => {
                return bad(format!("task {} needs a radial grid", task.name()));
            }
            Task::Morawetz if !(grid.is_box() && grid.dim() <= 2) => {
                return bad("task morawetz needs a box grid with d in {1, 2}".into());
            }
            Task::Covariance if !grid.is_box() => {
                return bad("task covariance needs a box grid".into());
            }
            _ => {}
        }
        if radial_data && grid.is_box() && task != Task::Groundstate {
            return bad("ground-state initial data needs a radial grid".into());
        }
        if matches!(task, Task::Evolve | Task::Morawetz | Task::Criterion | Task::ThresholdSweep) {
            self.evolve.config().validate(&grid, &p)?;
        }
        if !(self.initial.width > 0.0) {
            return bad(format!("initial.width = {} must be positive", self.initial.width));
        }
        match task {
            Task::Morawetz => {
                let m = &self.morawetz;
                if !(m.eps > 0.01 && m.eps < 0.5) {
                    return bad(format!("morawetz.eps = {} outside (0.01, 0.5)", m.eps));
                }
                if m.log_count_j == 0 || !(m.r0 > 0.0) || !(m.s_stride > 0.0) {
                    return bad("morawetz needs log_count_j >= 1, r0 > 0 and s_stride > 0".into());
                }
            }
            Task::Criterion => {
                let c = &self.criterion;
                if !(c.eps > 0.0 && c.eps < 1.0) || !(c.t0 > 0.0) {
                    return bad("criterion needs eps in (0, 1) and t0 > 0".into());
                }
            }
            Task::ThresholdSweep => {
                let s = &self.sweep;
                if s.count == 0 || !(s.lambda_min > 0.0) || s.lambda_max < s.lambda_min {
                    return bad("sweep needs count >= 1 and 0 < lambda_min <= lambda_max".into());
                }
            }
            Task::Covariance => {
                let c = &self.covariance;
                if c.xi.len() != grid.dim() {
                    return bad(format!(
                        "covariance.xi has {} components for a {}-dimensional box",
                        c.xi.len(),
                        grid.dim()
                    ));
                }
                if c.dts.is_empty() || c.kappas.is_empty() || !(c.t_final > 0.0) {
                    return bad("covariance needs t_final > 0 and nonempty dts and kappas".into());
                }
                for k in &c.kappas {
                    SystemParams64::from_array(*k)?;
                }
                for &dt in &c.dts {
                    EvolveConfig::new(dt, c.t_final, 1).steps()?;
                }
            }
            _ => {}
        }
        Ok(())
    }
}
