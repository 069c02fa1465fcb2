use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use super::{ProblemSpec, Schedule};
use crate::geometry::{DykstraSettings, NORM_INFLATION};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub gamma: f64,
    pub lambda: f64,
    pub alpha: Schedule,
    pub sigma: Schedule,
    /// Weights `λ_{n,i}` of the W-mapping, one schedule per `T_i`. Empty
    /// means `0.5` for every member of the family.
    pub w_weights: Vec<Schedule>,
    pub max_iter: usize,
    pub stop_tol: f64,
    pub dykstra: DykstraSettings,
    pub probe_seed: u64,
}

pub const DEFAULT_W_WEIGHT: f64 = 0.5;

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            gamma: 0.5,
            lambda: 0.5,
            alpha: Schedule::constant(0.5),
            sigma: Schedule::harmonic(1.0, 2.0),
            w_weights: Vec::new(),
            max_iter: 10_000,
            stop_tol: 1e-8,
            dykstra: DykstraSettings::default(),
            probe_seed: 0,
        }
    }
}

impl SolverConfig {
    /// W-mapping weights at step `n` for a family of `len` maps.
    pub fn w_weights_at(&self, n: usize, len: usize) -> Vec<f64> {
        if self.w_weights.is_empty() {
            vec![DEFAULT_W_WEIGHT; len]
        } else {
            self.w_weights.iter().map(|s| s.value(n)).collect()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    Problem,
    Gamma,
    Lambda,
    LambdaBinding,
    AlphaSchedule,
    SigmaSchedule,
    SigmaDecay,
    WeightSchedule,
    Tolerance,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigViolation {
    pub constraint: Constraint,
    pub message: String,
}

impl fmt::Display for ConfigViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigErrors(pub Vec<ConfigViolation>);

impl ConfigErrors {
    pub fn violations(&self) -> &[ConfigViolation] {
        &self.0
    }

    pub fn has(&self, constraint: Constraint) -> bool {
        self.0.iter().any(|v| v.constraint == constraint)
    }
}

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

/// A configuration that passed [`validate_config`] against a specific
/// problem, together with the quantities the check derived.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidatedConfig {
    config: SolverConfig,
    norm_estimate: f64,
    gamma_limit: f64,
    lambda_limit: f64,
}

impl ValidatedConfig {
    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn into_config(self) -> SolverConfig {
        self.config
    }

    /// Upper estimate of `‖A‖ = ‖A*‖`.
    pub fn norm_estimate(&self) -> f64 {
        self.norm_estimate
    }

    /// Conservative `γ` limit `1/(1.01‖A‖)²`.
    pub fn gamma_limit(&self) -> f64 {
        self.gamma_limit
    }

    pub fn lambda_limit(&self) -> f64 {
        self.lambda_limit
    }
}

impl Deref for ValidatedConfig {
    type Target = SolverConfig;

    fn deref(&self) -> &SolverConfig {
        &self.config
    }
}

/// Rounds to 10 significant digits for messages, so that an estimate like
/// `0.24999999999998` prints as `0.25`.
fn tidy(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    let scale = 10f64.powi(9 - x.abs().log10().floor() as i32);
    (x * scale).round() / scale
}

fn gamma_bounds(norm: f64) -> (f64, f64) {
    if norm == 0.0 {
        (f64::INFINITY, f64::INFINITY)
    } else {
        (1.0 / (norm * norm), 1.0 / (NORM_INFLATION * norm).powi(2))
    }
}

/// Checks `cfg` against `spec` and reports every violated constraint.
pub fn validate_config(spec: &ProblemSpec, cfg: &SolverConfig) -> Result<ValidatedConfig, ConfigErrors> {
    let mut errs = Vec::new();
    let mut push = |constraint, message: String| errs.push(ConfigViolation { constraint, message });

    if let Err(e) = spec.validate() {
        push(Constraint::Problem, format!("problem is malformed: {e}"));
    }

    let norm = spec.a.norm_estimate();
    let (nominal, conservative) = gamma_bounds(norm);
    if !(cfg.gamma > 0.0 && cfg.gamma < conservative) {
        push(
            Constraint::Gamma,
            format!(
                "γ must lie in (0, {}) with 1/‖A‖² for ‖A‖ ≈ {}; got γ = {} (limit used: {}, from ‖A‖ inflated by {NORM_INFLATION})",
                tidy(nominal),
                tidy(norm),
                cfg.gamma,
                tidy(conservative)
            ),
        );
    }

    let lambda_limit = spec.lambda_limit();
    if !(cfg.lambda > 0.0 && cfg.lambda < lambda_limit) {
        push(
            Constraint::Lambda,
            format!(
                "λ must lie in (0, {}) with 2·min(θ1, θ2) for θ1 = {}, θ2 = {}; got λ = {}",
                tidy(lambda_limit),
                tidy(spec.theta1()),
                tidy(spec.theta2()),
                cfg.lambda
            ),
        );
    }
    for (name, lam) in [("M1", spec.m1.lambda()), ("M2", spec.m2.lambda())] {
        if lam != cfg.lambda {
            push(
                Constraint::LambdaBinding,
                format!("resolvent of {name} is built with λ = {lam} but the config uses λ = {}", cfg.lambda),
            );
        }
    }

    if let Err(e) = cfg.alpha.check(false) {
        push(Constraint::AlphaSchedule, format!("α schedule: {e}"));
    }
    if let Err(e) = cfg.sigma.check(false) {
        push(Constraint::SigmaSchedule, format!("σ schedule: {e}"));
    }
    if !cfg.sigma.decays() {
        push(Constraint::SigmaDecay, format!("σ schedule `{}` does not tend to 0", cfg.sigma));
    }
    if !cfg.w_weights.is_empty() && cfg.w_weights.len() != spec.family.len() {
        push(
            Constraint::WeightSchedule,
            format!("{} W-mapping weight schedules for a family of {}", cfg.w_weights.len(), spec.family.len()),
        );
    }
    for (i, s) in cfg.w_weights.iter().enumerate() {
        if let Err(e) = s.check(true) {
            push(Constraint::WeightSchedule, format!("weight schedule {}: {e}", i + 1));
        }
    }

    if !(cfg.stop_tol.is_finite() && cfg.stop_tol > 0.0) {
        push(Constraint::Tolerance, format!("stop_tol must be positive, got {}", cfg.stop_tol));
    }
    if !(cfg.dykstra.tol.is_finite() && cfg.dykstra.tol > 0.0) || cfg.dykstra.max_iter == 0 {
        push(
            Constraint::Tolerance,
            format!("dykstra needs tol > 0 and max_iter ≥ 1, got tol = {}, max_iter = {}", cfg.dykstra.tol, cfg.dykstra.max_iter),
        );
    }

    if errs.is_empty() {
        Ok(ValidatedConfig { config: cfg.clone(), norm_estimate: norm, gamma_limit: conservative, lambda_limit })
    } else {
        Err(ConfigErrors(errs))
    }
}
