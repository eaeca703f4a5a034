//! JSON run configuration for the `flow` and `sweep` commands.
//!
//! ```json
//! {
//!   "problem": "gMA",
//!   "dimension": 2,
//!   "grid_N": 12,
//!   "backgrounds": { "chi": [[2, 0], [0, 2]], "omega": [[1, 0], [0, 1]] },
//!   "coefficients": { "c": [1.0], "c0": "forced" },
//!   "initial": { "kind": "trig", "terms": [{ "amplitude": 0.05, "wave": [1, 0, 0, 0] }] },
//!   "flow": { "t_max": 50, "residual_target": 1e-6 },
//!   "seed": 7,
//!   "outputs": { "csv": "run.csv", "summary": "run.json" }
//! }
//! ```
//!
//! Matrix entries are real numbers or `[re, im]` pairs. Relative output and
//! snapshot paths resolve against the directory holding the config file.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dhym::lagrangian_phase;
use crate::error::{Error, Result};
use crate::flows::{FlowConfig, FlowEquation, SweepConfig, SweepSchedule};
use crate::gma::{GmaCoefficients, C0};
use crate::sampling::sample_rng;
use crate::spectra::{relative_eigenvalues, HermitianMatrix};
use crate::torus::{intersection_numbers, random_trig_field, read_snapshot, PotentialField, Snapshot, TorusGrid};

/// Stream index reserved for drawing a random initial potential.
const INITIAL_STREAM: u64 = 0x1D17;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Problem {
    #[serde(rename = "gMA")]
    Gma,
    #[serde(rename = "dHYM")]
    Dhym,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

pub type MatrixSpec = Vec<Vec<Entry>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Backgrounds {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi: Option<MatrixSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<MatrixSpec>,
    pub omega: MatrixSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrigKind {
    #[default]
    Cos,
    Sin,
}

/// `amplitude · cos(2π Σ wave_i x_i)` (or `sin`) over the real coordinates
/// `(x1, y1, ..., xn, yn)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigTerm {
    pub amplitude: f64,
    pub wave: Vec<i64>,
    #[serde(default)]
    pub kind: TrigKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Keyword {
    Forced,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct C0Profile {
    /// Mean value; the forced value when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<f64>,
    pub terms: Vec<TrigTerm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum C0Spec {
    Value(f64),
    Keyword(Keyword),
    Profile(C0Profile),
}

impl Default for C0Spec {
    fn default() -> Self {
        C0Spec::Keyword(Keyword::Forced)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientsSection {
    /// `c_1, ..., c_{n-1}`.
    pub c: Vec<f64>,
    #[serde(default)]
    pub c0: C0Spec,
    #[serde(default)]
    pub c0_floor: f64,
    /// Selects the perturbed flow when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseKeyword {
    /// The Lagrangian phase of the background `α` against `ω`.
    Matched,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ThetaSpec {
    Value(f64),
    Keyword(PhaseKeyword),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhasesSection {
    pub theta: ThetaSpec,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialPotential {
    #[default]
    Zero,
    Trig {
        terms: Vec<TrigTerm>,
    },
    /// Random trigonometric polynomial drawn from the config seed.
    Random {
        modes: usize,
        max_mode: i64,
        amplitude: f64,
    },
    Snapshot {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_target: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_interval: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_pos: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_margin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub converge_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path_nodes: Option<usize>,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    pub s: Vec<f64>,
    #[serde(default)]
    pub t: Vec<f64>,
    #[serde(default)]
    pub u: Vec<f64>,
    #[serde(default)]
    pub c0_amplitude: f64,
    #[serde(default = "default_true")]
    pub warm_start: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    /// Flow time series. Sweeps write `index_<i>.csv` files under `dir`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<PathBuf>,
    /// Final potential in the binary snapshot layout.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    pub problem: Problem,
    pub dimension: usize,
    #[serde(rename = "grid_N")]
    pub grid_n: usize,
    pub backgrounds: Backgrounds,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<CoefficientsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phases: Option<PhasesSection>,
    #[serde(default)]
    pub initial: InitialPotential,
    #[serde(default)]
    pub flow: FlowParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleSection>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub outputs: Outputs,
    /// Directory that relative paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn config_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

pub fn matrix_from_spec(spec: &MatrixSpec, n: usize, name: &str) -> Result<HermitianMatrix> {
    if spec.len() != n || spec.iter().any(|row| row.len() != n) {
        return config_err(format!("{name} must be a {n}x{n} matrix"));
    }
    let entries = spec
        .iter()
        .flatten()
        .map(|e| match e {
            Entry::Real(v) => Complex64::new(*v, 0.0),
            Entry::Complex([re, im]) => Complex64::new(*re, *im),
        })
        .collect();
    HermitianMatrix::from_entries(n, entries).map_err(|e| Error::Config(format!("{name}: {e}")))
}

fn trig_value(terms: &[TrigTerm], x: &[f64]) -> f64 {
    terms
        .iter()
        .map(|term| {
            let arg: f64 = 2.0 * PI * term.wave.iter().zip(x).map(|(k, xi)| *k as f64 * xi).sum::<f64>();
            term.amplitude
                * match term.kind {
                    TrigKind::Cos => arg.cos(),
                    TrigKind::Sin => arg.sin(),
                }
        })
        .sum()
}

fn check_terms(terms: &[TrigTerm], axes: usize, name: &str) -> Result<()> {
    for (i, term) in terms.iter().enumerate() {
        if term.wave.len() != axes {
            return config_err(format!("{name} term {i}: wave needs {axes} integers"));
        }
        if !term.amplitude.is_finite() {
            return config_err(format!("{name} term {i}: amplitude must be finite"));
        }
    }
    Ok(())
}

impl RunConfigFile {
    /// Parses and validates; relative paths resolve against `base_dir`.
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: RunConfigFile = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_json(&text, &dir)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn grid(&self) -> Result<TorusGrid> {
        TorusGrid::new(self.dimension, self.grid_n).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn omega(&self) -> Result<HermitianMatrix> {
        matrix_from_spec(&self.backgrounds.omega, self.dimension, "omega")
    }

    pub fn background(&self) -> Result<HermitianMatrix> {
        let (spec, name) = match self.problem {
            Problem::Gma => (&self.backgrounds.chi, "chi"),
            Problem::Dhym => (&self.backgrounds.alpha, "alpha"),
        };
        match spec {
            Some(m) => matrix_from_spec(m, self.dimension, name),
            None => config_err(format!("backgrounds.{name} is required for this problem")),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dimension;
        let grid = self.grid()?;
        self.omega()?;
        self.background()?;
        match self.problem {
            Problem::Gma => {
                if self.backgrounds.alpha.is_some() || self.phases.is_some() {
                    return config_err("gMA runs take backgrounds.chi and coefficients, not alpha or phases");
                }
                let Some(coeffs) = &self.coefficients else {
                    return config_err("gMA runs need a coefficients section");
                };
                if coeffs.c.len() + 1 != n {
                    return config_err(format!("coefficients.c needs {} values c_1..c_{}", n - 1, n - 1));
                }
                if let C0Spec::Profile(p) = &coeffs.c0 {
                    check_terms(&p.terms, grid.axes(), "c0")?;
                }
                if let Some(eps) = coeffs.epsilon {
                    if !(eps.is_finite() && eps > 0.0) {
                        return config_err("coefficients.epsilon must be positive");
                    }
                }
            }
            Problem::Dhym => {
                if self.backgrounds.chi.is_some() || self.coefficients.is_some() {
                    return config_err("dHYM runs take backgrounds.alpha and phases, not chi or coefficients");
                }
                if self.phases.is_none() {
                    return config_err("dHYM runs need a phases section");
                }
                if self.schedule.is_some() {
                    return config_err("schedules apply to gMA runs only");
                }
            }
        }
        match &self.initial {
            InitialPotential::Trig { terms } => check_terms(terms, grid.axes(), "initial")?,
            InitialPotential::Random { modes, amplitude, .. }
                if (*modes == 0 || !amplitude.is_finite()) => {
                    return config_err("random initial data needs modes > 0 and a finite amplitude");
                }
            _ => {}
        }
        if let Some(s) = &self.schedule {
            if !s.c0_amplitude.is_finite() {
                return config_err("schedule.c0_amplitude must be finite");
            }
            if self.coefficients.as_ref().is_some_and(|c| c.c0 != C0Spec::default() || c.epsilon.is_some()) {
                return config_err("sweeps set c0 themselves; use \"c0\": \"forced\" and no epsilon");
            }
        }
        Ok(())
    }

    pub fn initial_potential(&self) -> Result<PotentialField> {
        let grid = self.grid()?;
        match &self.initial {
            InitialPotential::Zero => Ok(PotentialField::zeros(grid)),
            InitialPotential::Trig { terms } => Ok(PotentialField::from_fn(grid, |x| trig_value(terms, x))),
            InitialPotential::Random {
                modes,
                max_mode,
                amplitude,
            } => Ok(random_trig_field(
                grid,
                *modes,
                *max_mode,
                *amplitude,
                &mut sample_rng(self.seed, INITIAL_STREAM),
            )),
            InitialPotential::Snapshot { path } => match read_snapshot(&self.resolve(path))? {
                Snapshot::Scalar(phi) if phi.grid() == grid => Ok(phi),
                Snapshot::Scalar(phi) => Err(Error::GridMismatch(format!(
                    "snapshot grid n = {}, N = {} does not match the config",
                    phi.grid().n(),
                    phi.grid().size()
                ))),
                Snapshot::Form { .. } => config_err("initial snapshot must hold a scalar field"),
            },
        }
    }

    fn equation(&self, chi_or_alpha: &HermitianMatrix, omega: &HermitianMatrix) -> Result<FlowEquation> {
        let n = self.dimension;
        let grid = self.grid()?;
        match self.problem {
            Problem::Gma => {
                let sec = self.coefficients.as_ref().expect("validated");
                let forced = || intersection_numbers(chi_or_alpha, omega, &sec.c, true).map(|r| r.forced_c0);
                let c0 = match &sec.c0 {
                    C0Spec::Value(v) => C0::Constant(*v),
                    C0Spec::Keyword(Keyword::Forced) => C0::Constant(forced()?),
                    C0Spec::Profile(p) => {
                        let mean = match p.mean {
                            Some(m) => m,
                            None => forced()?,
                        };
                        let field = PotentialField::from_fn(grid, |x| mean + trig_value(&p.terms, x));
                        C0::Field(field.into_values())
                    }
                };
                let coeffs = GmaCoefficients::new(n, sec.c.clone(), c0, sec.c0_floor)?;
                Ok(match sec.epsilon {
                    Some(epsilon) => FlowEquation::PerturbedGma { coeffs, epsilon },
                    None => FlowEquation::Gma { coeffs },
                })
            }
            Problem::Dhym => {
                let theta = match &self.phases.as_ref().expect("validated").theta {
                    ThetaSpec::Value(t) => *t,
                    ThetaSpec::Keyword(PhaseKeyword::Matched) => {
                        lagrangian_phase(&relative_eigenvalues(chi_or_alpha, omega)?)
                    }
                };
                Ok(FlowEquation::Dhym { theta })
            }
        }
    }

    pub fn flow_config(&self) -> Result<FlowConfig> {
        let omega = self.omega()?;
        let background = self.background()?;
        let equation = self.equation(&background, &omega)?;
        self.assemble(equation, background, omega)
    }

    fn assemble(&self, equation: FlowEquation, background: HermitianMatrix, omega: HermitianMatrix) -> Result<FlowConfig> {
        let mut cfg = FlowConfig::new(equation, background, omega, self.initial_potential()?);
        let f = &self.flow;
        cfg.dt0 = f.dt0.unwrap_or(cfg.dt0);
        cfg.dt_min = f.dt_min.unwrap_or(cfg.dt_min);
        cfg.t_max = f.t_max.unwrap_or(cfg.t_max);
        cfg.residual_target = f.residual_target.unwrap_or(cfg.residual_target);
        cfg.sample_interval = f.sample_interval.unwrap_or(cfg.sample_interval);
        cfg.delta_pos = f.delta_pos.unwrap_or(cfg.delta_pos);
        cfg.phase_margin = f.phase_margin.unwrap_or(cfg.phase_margin);
        cfg.step_tol = f.step_tol.unwrap_or(cfg.step_tol);
        cfg.converge_samples = f.converge_samples.unwrap_or(cfg.converge_samples);
        cfg.path_nodes = f.path_nodes.unwrap_or(cfg.path_nodes);
        cfg.seed = self.seed;
        cfg.validate().map_err(|e| match e {
            Error::Config(_) => e,
            other => Error::Config(other.to_string()),
        })?;
        Ok(cfg)
    }

    pub fn sweep_config(&self) -> Result<SweepConfig> {
        let Some(s) = &self.schedule else {
            return config_err("sweeps need a schedule section");
        };
        let schedule = SweepSchedule {
            s: s.s.clone(),
            t: s.t.clone(),
            u: s.u.clone(),
        };
        schedule.validate()?;
        // The sweep sets c0 at every index; the base class only carries c.
        let sec = self.coefficients.as_ref().expect("validated");
        let coeffs = GmaCoefficients::unchecked(self.dimension, sec.c.clone(), C0::Constant(sec.c0_floor.max(0.0)), sec.c0_floor);
        let base = self.assemble(FlowEquation::Gma { coeffs }, self.background()?, self.omega()?)?;
        Ok(SweepConfig {
            base,
            schedule,
            c0_amplitude: s.c0_amplitude,
            warm_start: s.warm_start,
        })
    }
}
