//! Time integration of the mixed Hessian flow, its ε-perturbation and the
//! dHYM flow on the torus, plus the boundary sweep.
//!
//! Steps are classical RK4 with step-doubling error control. Samples are
//! taken on a uniform time grid so that second differences of the energies
//! along a run are meaningful.

use std::f64::consts::PI;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::dhym::{phase_of, slope_of};
use crate::error::{domain, Error, Result};
use crate::gma::{GmaCoefficients, C0};
use crate::spectra::{symmetric_functions, symmetric_into, HermitianMatrix, Pencil};
use crate::torus::{
    dhym_j_energy_of, intersection_numbers, l1_distance, ma_energy_of, ma_integrand, path_energies,
    positive_spectrum, PathRule, PotentialField, Spectral, TorusGrid,
};

pub const CSV_HEADER: &str = "t,res_l2,res_inf,sup_abs_phidot,energy_I,energy_J,min_eig,theta_min,theta_max,dt";

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FlowEquation {
    /// `φ̇ = 1 − Q_{c₀}(λ)`.
    Gma { coeffs: GmaCoefficients },
    /// `φ̇ = 1 + a_ε − Q_{c₀}(λ) − ε/S_n(λ)`.
    PerturbedGma { coeffs: GmaCoefficients, epsilon: f64 },
    /// `φ̇ = cot θ(λ) − cot θ*`.
    Dhym { theta: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowConfig {
    pub equation: FlowEquation,
    /// `χ` for the gMA flows, `α` for dHYM.
    pub background: HermitianMatrix,
    pub omega: HermitianMatrix,
    pub phi0: PotentialField,
    pub dt0: f64,
    pub dt_min: f64,
    pub t_max: f64,
    pub residual_target: f64,
    /// Time between recorded rows.
    pub sample_interval: f64,
    pub delta_pos: f64,
    pub phase_margin: f64,
    /// Sup-norm bound on the step-doubling error estimate.
    pub step_tol: f64,
    /// Consecutive samples below target needed to declare convergence.
    pub converge_samples: usize,
    pub path_nodes: usize,
    pub seed: u64,
}

impl FlowConfig {
    pub fn new(equation: FlowEquation, background: HermitianMatrix, omega: HermitianMatrix, phi0: PotentialField) -> Self {
        Self {
            equation,
            background,
            omega,
            phi0,
            dt0: 0.05,
            dt_min: 1e-10,
            t_max: 50.0,
            residual_target: 1e-6,
            sample_interval: 0.05,
            delta_pos: 1e-6,
            phase_margin: 1e-4,
            step_tol: 1e-9,
            converge_samples: 5,
            path_nodes: crate::torus::DEFAULT_PATH_NODES,
            seed: 0,
        }
    }

    pub fn grid(&self) -> TorusGrid {
        self.phi0.grid()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.grid().n();
        if self.background.dim() != n || self.omega.dim() != n {
            return Err(Error::Config(format!("background matrices must be {n}x{n}")));
        }
        let positive = |v: f64| v.is_finite() && v > 0.0;
        for (name, v) in [
            ("dt0", self.dt0),
            ("dt_min", self.dt_min),
            ("t_max", self.t_max),
            ("sample_interval", self.sample_interval),
            ("step_tol", self.step_tol),
        ] {
            if !positive(v) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.residual_target >= 0.0) || !(self.delta_pos >= 0.0) {
            return Err(Error::Config("residual_target and delta_pos must be nonnegative".into()));
        }
        if !(self.phase_margin >= 0.0 && self.phase_margin < PI / 2.0) {
            return Err(Error::Config("phase_margin must lie in [0, pi/2)".into()));
        }
        if self.converge_samples == 0 || self.path_nodes == 0 {
            return Err(Error::Config("converge_samples and path_nodes must be positive".into()));
        }
        match &self.equation {
            FlowEquation::Gma { coeffs } | FlowEquation::PerturbedGma { coeffs, .. } => {
                if coeffs.n() != n {
                    return Err(Error::Config("coefficient dimension differs from grid".into()));
                }
                coeffs.validate()?;
                if let C0::Field(f) = coeffs.c0() {
                    if f.len() != self.grid().points() {
                        return Err(Error::GridMismatch("c0 field length differs from grid".into()));
                    }
                }
                if let FlowEquation::PerturbedGma { epsilon, .. } = self.equation {
                    if !(epsilon >= 0.0 && epsilon.is_finite()) {
                        return Err(Error::Config("epsilon must be finite and nonnegative".into()));
                    }
                }
            }
            FlowEquation::Dhym { theta } => {
                if !(*theta > 0.0 && *theta < PI) {
                    return Err(Error::Config(format!("target phase {theta} outside (0, pi)")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Converged,
    TMaxReached,
    Diverged,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunRow {
    pub t: f64,
    pub res_l2: f64,
    pub res_inf: f64,
    pub sup_abs_phidot: f64,
    pub energy_i: f64,
    pub energy_j: f64,
    pub min_eig: f64,
    pub theta_min: f64,
    pub theta_max: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub rows: Vec<RunRow>,
    pub status: RunStatus,
    pub final_phi: PotentialField,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    /// Unperturbed gMA run whose mean `c₀` differs from the forced value;
    /// `I` is not conserved in that case.
    pub mass_mismatched: bool,
    pub forced_c0: Option<f64>,
    pub a_epsilon: Option<f64>,
    pub diverged_reason: Option<String>,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub status: RunStatus,
    pub t_final: f64,
    pub final_res_l2: f64,
    pub final_res_inf: f64,
    pub samples: usize,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub mass_mismatched: bool,
    pub forced_c0: Option<f64>,
    pub a_epsilon: Option<f64>,
    pub diverged_reason: Option<String>,
    pub wall_seconds: f64,
}

impl RunRecord {
    pub fn last(&self) -> &RunRow {
        self.rows.last().expect("a run always records its initial row")
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let cells = [
                r.t, r.res_l2, r.res_inf, r.sup_abs_phidot, r.energy_i, r.energy_j, r.min_eig, r.theta_min, r.theta_max, r.dt,
            ];
            let cells: Vec<String> = cells.iter().map(|v| format!("{v:e}")).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn summary(&self) -> RunSummary {
        let last = self.last();
        RunSummary {
            status: self.status,
            t_final: last.t,
            final_res_l2: last.res_l2,
            final_res_inf: last.res_inf,
            samples: self.rows.len(),
            accepted_steps: self.accepted_steps,
            rejected_steps: self.rejected_steps,
            mass_mismatched: self.mass_mismatched,
            forced_c0: self.forced_c0,
            a_epsilon: self.a_epsilon,
            diverged_reason: self.diverged_reason.clone(),
            wall_seconds: self.wall_seconds,
        }
    }
}

/// Pointwise guard failure inside a stage.
#[derive(Debug, Clone, PartialEq)]
pub struct GuardFailure {
    pub point: usize,
    /// Offending eigenvalue or phase.
    pub value: f64,
    pub reason: String,
}

impl From<GuardFailure> for Error {
    fn from(g: GuardFailure) -> Self {
        Error::DegenerateField {
            point: g.point,
            path_t: None,
            reason: g.reason,
        }
    }
}

/// Right-hand side with the pointwise diagnostics gathered while computing it.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub rhs: Vec<f64>,
    pub min_eig: f64,
    pub theta_min: f64,
    pub theta_max: f64,
}

impl Evaluation {
    pub fn res_l2(&self) -> f64 {
        (self.rhs.iter().map(|v| v * v).sum::<f64>() / self.rhs.len() as f64).sqrt()
    }

    pub fn res_inf(&self) -> f64 {
        self.rhs.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

enum Kernel {
    Gma { w: Vec<f64>, c0: C0, a_eps: f64, epsilon: f64 },
    Dhym { cot_target: f64 },
}

/// Evaluates a flow right-hand side on one grid.
pub struct Flow {
    config: FlowConfig,
    spectral: Spectral,
    pencil: Pencil,
    kernel: Kernel,
    rule: PathRule,
    forced_c0: Option<f64>,
    a_epsilon: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub t: f64,
    pub phi: PotentialField,
    /// Next proposed step size.
    pub dt: f64,
    pub eval: Evaluation,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StepOutcome {
    Accepted { rejected: usize },
    Diverged { reason: String },
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

fn axpy(y: &[f64], a: f64, k: &[f64]) -> Vec<f64> {
    y.iter().zip(k).map(|(y, k)| y + a * k).collect()
}

impl Flow {
    pub fn new(config: FlowConfig) -> Result<Self> {
        config.validate()?;
        let grid = config.grid();
        let n = grid.n();
        let pencil = Pencil::new(&config.omega)?;
        let bg = pencil.eigenvalues(&config.background)?;
        let bg_sym = symmetric_functions(bg.values());
        let (kernel, forced_c0, a_epsilon) = match &config.equation {
            FlowEquation::Gma { coeffs } | FlowEquation::PerturbedGma { coeffs, .. } => {
                let report = intersection_numbers(&config.background, &config.omega, coeffs.c(), true)?;
                let epsilon = match config.equation {
                    FlowEquation::PerturbedGma { epsilon, .. } => epsilon,
                    _ => 0.0,
                };
                // ∫ω^n / ∫χ^n for constant classes is 1/S_n of the background.
                let a_eps = epsilon / bg_sym[n];
                let kernel = Kernel::Gma {
                    w: coeffs.weights(),
                    c0: coeffs.c0().clone(),
                    a_eps,
                    epsilon,
                };
                let a = matches!(config.equation, FlowEquation::PerturbedGma { .. }).then_some(a_eps);
                (kernel, Some(report.forced_c0), a)
            }
            FlowEquation::Dhym { theta } => (
                Kernel::Dhym {
                    cot_target: theta.cos() / theta.sin(),
                },
                None,
                None,
            ),
        };
        let rule = PathRule::new(config.path_nodes);
        Ok(Self {
            spectral: Spectral::new(grid),
            pencil,
            kernel,
            rule,
            forced_c0,
            a_epsilon,
            config,
        })
    }

    pub fn config(&self) -> &FlowConfig {
        &self.config
    }

    pub fn forced_c0(&self) -> Option<f64> {
        self.forced_c0
    }

    pub fn a_epsilon(&self) -> Option<f64> {
        self.a_epsilon
    }

    /// Mean `c₀` differs from the forced value by more than rounding.
    pub fn mass_mismatched(&self) -> bool {
        match (&self.config.equation, self.forced_c0) {
            (FlowEquation::Gma { coeffs } | FlowEquation::PerturbedGma { coeffs, .. }, Some(f)) => {
                (coeffs.c0().mean() - f).abs() > 1e-10 * f.abs().max(1.0)
            }
            _ => false,
        }
    }

    /// Right-hand side at `phi`, failing at the first point where the
    /// positivity or phase guard is violated.
    pub fn evaluate(&self, phi: &[f64]) -> std::result::Result<Evaluation, GuardFailure> {
        let grid = self.config.grid();
        let n = grid.n();
        let field = self.spectral.form_field(&self.config.background, &PotentialField::from_raw(grid, phi.to_vec()));
        let field = field.expect("grid and background validated at construction");
        let spectra = field.spectra(&self.pencil);
        let delta = self.config.delta_pos;
        let margin = self.config.phase_margin;
        let pointwise = |(p, l): (usize, &[f64])| -> std::result::Result<(f64, f64), GuardFailure> {
            match &self.kernel {
                Kernel::Gma { w, c0, a_eps, epsilon } => {
                    if !(l[0] > delta) {
                        return Err(GuardFailure {
                            point: p,
                            value: l[0],
                            reason: format!("relative eigenvalue {} is not above {delta}", l[0]),
                        });
                    }
                    let mut s = [0.0; 8];
                    symmetric_into(l, &mut s);
                    let lower: f64 = (1..n).map(|k| w[k] * s[k]).sum::<f64>() + c0.at(p);
                    Ok((1.0 + a_eps - lower / s[n] - epsilon / s[n], phase_of(l)))
                }
                Kernel::Dhym { cot_target } => {
                    let th = phase_of(l);
                    if !(th > margin && th < PI - margin) {
                        return Err(GuardFailure {
                            point: p,
                            value: th,
                            reason: format!("Lagrangian phase {th} left ({margin}, pi - {margin})"),
                        });
                    }
                    let z = slope_of(l);
                    Ok((z.re / z.im - cot_target, th))
                }
            }
        };
        let values: Vec<(f64, f64)> = spectra
            .par_chunks(n)
            .enumerate()
            .map(pointwise)
            .collect::<std::result::Result<_, _>>()?;
        let min_eig = spectra.chunks(n).map(|l| l[0]).fold(f64::INFINITY, f64::min);
        let theta_min = values.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
        let theta_max = values.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max);
        Ok(Evaluation {
            rhs: values.into_iter().map(|v| v.0).collect(),
            min_eig,
            theta_min,
            theta_max,
        })
    }

    fn rk4(&self, y: &[f64], dt: f64, k1: &[f64]) -> std::result::Result<Vec<f64>, GuardFailure> {
        let k2 = self.evaluate(&axpy(y, 0.5 * dt, k1))?.rhs;
        let k3 = self.evaluate(&axpy(y, 0.5 * dt, &k2))?.rhs;
        let k4 = self.evaluate(&axpy(y, dt, &k3))?.rhs;
        Ok(y.iter()
            .enumerate()
            .map(|(i, y)| y + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect())
    }

    /// One full step against two half steps; returns the half-step result,
    /// its evaluation and the error estimate.
    fn try_step(&self, state: &FlowState, dt: f64) -> std::result::Result<(Vec<f64>, Evaluation, f64), GuardFailure> {
        let y = state.phi.values();
        let k1 = &state.eval.rhs;
        let full = self.rk4(y, dt, k1)?;
        let half = self.rk4(y, 0.5 * dt, k1)?;
        let kh = self.evaluate(&half)?.rhs;
        let two = self.rk4(&half, 0.5 * dt, &kh)?;
        let eval = self.evaluate(&two)?;
        let err = sup_diff(&full, &two);
        Ok((two, eval, err))
    }

    pub fn initial_state(&self) -> Result<FlowState> {
        let eval = self.evaluate(self.config.phi0.values())?;
        Ok(FlowState {
            t: 0.0,
            phi: self.config.phi0.clone(),
            dt: self.config.dt0,
            eval,
        })
    }

    /// Advances `state` by at most `limit` in time. Guard failures halve the
    /// step; so do error estimates above `step_tol`, scaled by the usual
    /// fifth-root controller.
    pub fn step(&self, state: &mut FlowState, limit: f64) -> StepOutcome {
        let cfg = &self.config;
        let mut rejected = 0;
        let mut proposed = state.dt.min(cfg.dt0);
        loop {
            if proposed < cfg.dt_min {
                return StepOutcome::Diverged {
                    reason: format!("step size {proposed:e} fell below dt_min = {:e}", cfg.dt_min),
                };
            }
            let dt = proposed.min(limit);
            match self.try_step(state, dt) {
                Err(_) => {
                    rejected += 1;
                    proposed *= 0.5;
                }
                Ok((_, _, err)) if err > cfg.step_tol => {
                    rejected += 1;
                    let factor = (0.9 * (cfg.step_tol / err).powf(0.2)).clamp(0.1, 0.5);
                    proposed = dt * factor;
                }
                Ok((phi, eval, err)) => {
                    let growth = if err == 0.0 {
                        2.0
                    } else {
                        (0.9 * (cfg.step_tol / err).powf(0.2)).clamp(1.0, 2.0)
                    };
                    // A step clipped to the sample grid says little about the
                    // admissible size, so keep the unclipped proposal then.
                    let base = if dt < proposed { proposed } else { dt * growth };
                    state.phi = PotentialField::from_raw(cfg.grid(), phi);
                    state.t += dt;
                    state.eval = eval;
                    state.dt = base.min(cfg.dt0);
                    return StepOutcome::Accepted { rejected };
                }
            }
        }
    }

    /// `(I, J)` at a state; `I` is NaN where the Monge-Ampère energy is
    /// undefined (a dHYM background that is not positive).
    pub fn energies(&self, phi: &PotentialField) -> (f64, f64) {
        let field = self
            .spectral
            .form_field(&self.config.background, phi)
            .expect("grid validated at construction");
        let (pencil, rule) = (&self.pencil, &self.rule);
        let gma_pair = |coeffs: &GmaCoefficients, epsilon: f64, a: f64| {
            let w = coeffs.weights();
            let n = coeffs.n();
            let j = move |p: usize, l: &[f64]| {
                let s = symmetric_functions(l);
                let lower: f64 = (1..n).map(|k| w[k] * s[k]).sum();
                lower + coeffs.c0().at(p) + epsilon - (1.0 + a) * s[n]
            };
            match path_energies(&field, pencil, phi.values(), rule, positive_spectrum, &[&ma_integrand, &j]) {
                Ok(v) => (v[0], v[1]),
                Err(_) => (f64::NAN, f64::NAN),
            }
        };
        match &self.config.equation {
            FlowEquation::Gma { coeffs } => gma_pair(coeffs, 0.0, 0.0),
            FlowEquation::PerturbedGma { coeffs, epsilon } => gma_pair(coeffs, *epsilon, self.a_epsilon.unwrap_or(0.0)),
            FlowEquation::Dhym { theta } => (
                ma_energy_of(&field, pencil, phi, rule).unwrap_or(f64::NAN),
                dhym_j_energy_of(&field, pencil, *theta, phi, rule).unwrap_or(f64::NAN),
            ),
        }
    }

    fn row(&self, state: &FlowState) -> RunRow {
        let (energy_i, energy_j) = self.energies(&state.phi);
        let e = &state.eval;
        RunRow {
            t: state.t,
            res_l2: e.res_l2(),
            res_inf: e.res_inf(),
            sup_abs_phidot: e.res_inf(),
            energy_i,
            energy_j,
            min_eig: e.min_eig,
            theta_min: e.theta_min,
            theta_max: e.theta_max,
            dt: state.dt,
        }
    }

    pub fn run(&self) -> Result<RunRecord> {
        let start = Instant::now();
        let cfg = &self.config;
        let mut state = self.initial_state()?;
        let mut rows = vec![self.row(&state)];
        let mut below = usize::from(rows[0].res_l2 <= cfg.residual_target);
        let mut accepted = 0;
        let mut rejected = 0;
        let mut reason = None;
        // Data already at rest counts as converged without any motion.
        let mut status = if below > 0 { Some(RunStatus::Converged) } else { None };
        let mut k = 0u64;
        while status.is_none() {
            k += 1;
            let target = (k as f64 * cfg.sample_interval).min(cfg.t_max);
            while state.t < target * (1.0 - 1e-14) {
                let remaining = target - state.t;
                match self.step(&mut state, remaining) {
                    StepOutcome::Accepted { rejected: r } => {
                        accepted += 1;
                        rejected += r;
                    }
                    StepOutcome::Diverged { reason: why } => {
                        reason = Some(why);
                        status = Some(RunStatus::Diverged);
                        break;
                    }
                }
            }
            if status.is_some() {
                break;
            }
            state.t = target;
            let row = self.row(&state);
            below = if row.res_l2 <= cfg.residual_target { below + 1 } else { 0 };
            rows.push(row);
            if below >= cfg.converge_samples {
                status = Some(RunStatus::Converged);
            } else if target >= cfg.t_max {
                status = Some(RunStatus::TMaxReached);
            }
        }
        Ok(RunRecord {
            rows,
            status: status.unwrap_or(RunStatus::TMaxReached),
            final_phi: state.phi,
            accepted_steps: accepted,
            rejected_steps: rejected,
            mass_mismatched: self.mass_mismatched(),
            forced_c0: self.forced_c0,
            a_epsilon: self.a_epsilon,
            diverged_reason: reason,
            wall_seconds: start.elapsed().as_secs_f64(),
        })
    }
}

pub fn run(config: FlowConfig) -> Result<RunRecord> {
    Flow::new(config)?.run()
}

fn rhs_with(config: FlowConfig) -> Result<PotentialField> {
    let grid = config.grid();
    let flow = Flow::new(config)?;
    let eval = flow.evaluate(flow.config.phi0.values())?;
    Ok(PotentialField::from_raw(grid, eval.rhs))
}

/// `1 − Q_{c₀}(λ)` pointwise at `χ + i∂∂̄φ`.
pub fn gma_rhs(phi: &PotentialField, background: &HermitianMatrix, omega: &HermitianMatrix, coeffs: &GmaCoefficients) -> Result<PotentialField> {
    let mut cfg = FlowConfig::new(FlowEquation::Gma { coeffs: coeffs.clone() }, background.clone(), omega.clone(), phi.clone());
    cfg.delta_pos = 0.0;
    rhs_with(cfg)
}

pub fn perturbed_gma_rhs(
    phi: &PotentialField,
    background: &HermitianMatrix,
    omega: &HermitianMatrix,
    coeffs: &GmaCoefficients,
    epsilon: f64,
) -> Result<PotentialField> {
    let eq = FlowEquation::PerturbedGma {
        coeffs: coeffs.clone(),
        epsilon,
    };
    let mut cfg = FlowConfig::new(eq, background.clone(), omega.clone(), phi.clone());
    cfg.delta_pos = 0.0;
    rhs_with(cfg)
}

/// `cot θ(λ) − cot θ*` pointwise at `α + i∂∂̄φ`.
pub fn dhym_rhs(phi: &PotentialField, alpha: &HermitianMatrix, omega: &HermitianMatrix, theta_star: f64) -> Result<PotentialField> {
    let mut cfg = FlowConfig::new(FlowEquation::Dhym { theta: theta_star }, alpha.clone(), omega.clone(), phi.clone());
    cfg.phase_margin = crate::dhym::PHASE_GUARD;
    let grid = cfg.grid();
    let flow = Flow::new(cfg)?;
    let eval = flow
        .evaluate(phi.values())
        .map_err(|g| Error::PhaseSingularity { phase: g.value })?;
    Ok(PotentialField::from_raw(grid, eval.rhs))
}

/// Monotone schedules for `χ_i = χ + s_i ω`, `c_{k,i} = c_k + t_i`,
/// `ω_i = (1 + u_i) ω`. Empty `t` or `u` mean all zeros.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSchedule {
    pub s: Vec<f64>,
    pub t: Vec<f64>,
    pub u: Vec<f64>,
}

impl SweepSchedule {
    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.s.is_empty() {
            return Err(Error::Config("schedule needs at least one index".into()));
        }
        for (name, v) in [("s", &self.s), ("t", &self.t), ("u", &self.u)] {
            if v.is_empty() && name != "s" {
                continue;
            }
            if v.len() != self.s.len() {
                return Err(Error::Config(format!("schedule {name} has {} entries, s has {}", v.len(), self.s.len())));
            }
            if v.iter().any(|x| !x.is_finite() || *x < 0.0) {
                return Err(Error::Config(format!("schedule {name} must be finite and nonnegative")));
            }
            if v.windows(2).any(|w| w[1] > w[0]) {
                return Err(Error::Config(format!("schedule {name} must be non-increasing")));
            }
        }
        Ok(())
    }

    fn at(v: &[f64], i: usize) -> f64 {
        v.get(i).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    /// Base flow; its equation must be unperturbed gMA. `c₀` is replaced at
    /// every index by the forced value plus the profile below.
    pub base: FlowConfig,
    pub schedule: SweepSchedule,
    /// Amplitude of the `cos(2πx₁)` part added to the forced `c₀`.
    pub c0_amplitude: f64,
    pub warm_start: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepEntry {
    /// 1-based.
    pub index: usize,
    pub s: f64,
    pub t: f64,
    pub u: f64,
    pub forced_c0: f64,
    pub min_margin: f64,
    pub status: RunStatus,
    pub final_res_l2: f64,
    pub min_eig: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub entries: Vec<SweepEntry>,
    /// `d_i = ‖ψ_{i+1} − ψ_i‖_{L¹}`.
    pub distances: Vec<f64>,
    pub limits: Vec<PotentialField>,
    pub records: Vec<RunRecord>,
}

impl SweepReport {
    pub fn distances_decreasing(&self) -> bool {
        self.distances.windows(2).all(|w| w[1] < w[0])
    }
}

struct SweepIndex {
    background: HermitianMatrix,
    omega: HermitianMatrix,
    coeffs: GmaCoefficients,
    entry: SweepEntry,
}

type IndexClasses = (HermitianMatrix, HermitianMatrix, Vec<f64>, crate::torus::IntersectionReport);

/// Classes at index `i` with their intersection report; fails with a
/// schedule error when a proper subtorus margin is not strictly positive.
fn sweep_margins(cfg: &SweepConfig, i: usize) -> Result<IndexClasses> {
    let base = &cfg.base;
    let coeffs = match &base.equation {
        FlowEquation::Gma { coeffs } => coeffs,
        _ => return Err(Error::Config("the boundary sweep runs the unperturbed gMA flow".into())),
    };
    let sch = &cfg.schedule;
    let (s, t, u) = (sch.s[i], SweepSchedule::at(&sch.t, i), SweepSchedule::at(&sch.u, i));
    let omega = base.omega.scale(1.0 + u);
    let background = base.background.add(&omega.scale(s));
    let c: Vec<f64> = coeffs.c().iter().map(|v| v + t).collect();
    let report = intersection_numbers(&background, &omega, &c, true)?;
    if let Some(weak) = report.weakest() {
        if !(weak.value > 0.0) {
            return Err(Error::Schedule {
                index: i + 1,
                p: weak.p,
                axes: weak.axes.clone(),
                margin: weak.value,
            });
        }
    }
    Ok((background, omega, c, report))
}

fn sweep_index(cfg: &SweepConfig, i: usize) -> Result<SweepIndex> {
    let (background, omega, c, report) = sweep_margins(cfg, i)?;
    let base = &cfg.base;
    let coeffs = match &base.equation {
        FlowEquation::Gma { coeffs } => coeffs,
        _ => unreachable!("checked in sweep_margins"),
    };
    let sch = &cfg.schedule;
    let (s, t, u) = (sch.s[i], SweepSchedule::at(&sch.t, i), SweepSchedule::at(&sch.u, i));
    let grid = base.grid();
    let forced = report.forced_c0;
    let amp = cfg.c0_amplitude;
    let c0 = if amp == 0.0 {
        C0::Constant(forced)
    } else {
        C0::Field((0..grid.points()).map(|p| forced + amp * (2.0 * PI * grid.coords(p)[0]).cos()).collect())
    };
    let coeffs = GmaCoefficients::new(coeffs.n(), c, c0, coeffs.c0_floor())?;
    Ok(SweepIndex {
        background,
        omega,
        coeffs,
        entry: SweepEntry {
            index: i + 1,
            s,
            t,
            u,
            forced_c0: forced,
            min_margin: report.weakest().map_or(f64::INFINITY, |m| m.value),
            status: RunStatus::Diverged,
            final_res_l2: f64::NAN,
            min_eig: f64::NAN,
        },
    })
}

fn sweep_run(cfg: &SweepConfig, idx: SweepIndex, start: Option<&PotentialField>) -> Result<(SweepEntry, RunRecord)> {
    let mut flow_cfg = cfg.base.clone();
    flow_cfg.equation = FlowEquation::Gma { coeffs: idx.coeffs };
    flow_cfg.background = idx.background;
    flow_cfg.omega = idx.omega;
    let flow = Flow::new(flow_cfg.clone())?;
    // Fall back to the base start when the warm start is not admissible.
    let flow = match start {
        Some(phi) if flow.evaluate(phi.values()).is_ok() => {
            flow_cfg.phi0 = phi.clone();
            Flow::new(flow_cfg)?
        }
        _ => flow,
    };
    let record = flow.run()?;
    let mut entry = idx.entry;
    entry.status = record.status;
    entry.final_res_l2 = record.last().res_l2;
    entry.min_eig = record.last().min_eig;
    Ok((entry, record))
}

/// Checks every index for strict positivity first, then runs the flows.
pub fn boundary_sweep(cfg: &SweepConfig) -> Result<SweepReport> {
    cfg.schedule.validate()?;
    cfg.base.validate()?;
    if !(cfg.c0_amplitude.is_finite()) {
        return domain("c0_amplitude must be finite");
    }
    for i in 0..cfg.schedule.len() {
        sweep_margins(cfg, i)?;
    }
    let indices: Vec<SweepIndex> = (0..cfg.schedule.len()).map(|i| sweep_index(cfg, i)).collect::<Result<_>>()?;
    let results: Vec<(SweepEntry, RunRecord)> = if cfg.warm_start {
        let mut out: Vec<(SweepEntry, RunRecord)> = Vec::new();
        for idx in indices {
            let prev = out.last().map(|(_, r)| r.final_phi.clone());
            out.push(sweep_run(cfg, idx, prev.as_ref())?);
        }
        out
    } else {
        indices
            .into_par_iter()
            .map(|idx| sweep_run(cfg, idx, None))
            .collect::<Result<_>>()?
    };
    let limits: Vec<PotentialField> = results.iter().map(|(_, r)| r.final_phi.normalize_sup()).collect();
    let distances = limits
        .windows(2)
        .map(|w| l1_distance(&w[1], &w[0]))
        .collect::<Result<_>>()?;
    let (entries, records) = results.into_iter().unzip();
    Ok(SweepReport {
        entries,
        distances,
        limits,
        records,
    })
}
