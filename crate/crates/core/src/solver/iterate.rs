use std::fmt;

use serde::{Deserialize, Serialize};

use super::{ProblemSpec, ValidatedConfig};
use crate::diagnostics::TraceRecord;
use crate::error::{check_dim, Error, Result};
use crate::geometry::{build_cn_halfspace, build_qn_halfspace, dykstra, project, ConvexSet, HalfSpace, Point};
use crate::operators::{apply_w_mapping, forward_backward_apply};

/// Everything one step of the iteration produces at index `n`.
///
/// `s_x` is `S x_n` and `x_next` is `x_{n+1} = P_{C ∩ C_n ∩ Q_n} x_0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterateState {
    pub n: usize,
    pub x: Point,
    pub s_x: Point,
    pub u: Point,
    pub z: Point,
    pub az: Point,
    pub w: Point,
    pub y: Point,
    pub cn: HalfSpace,
    pub qn: HalfSpace,
    pub x_next: Point,
    pub record: TraceRecord,
}

fn target_sets(c: &ConvexSet, cn: &HalfSpace, qn: &HalfSpace) -> Vec<ConvexSet> {
    let cuts = ConvexSet::Intersection(vec![ConvexSet::HalfSpace(cn.clone()), ConvexSet::HalfSpace(qn.clone())]);
    match c {
        ConvexSet::WholeSpace => vec![cuts],
        c => vec![c.clone(), cuts],
    }
}

/// One step of the hybrid iteration from `x_n`.
pub fn step(spec: &ProblemSpec, cfg: &ValidatedConfig, x0: &Point, xn: &Point, n: usize) -> Result<IterateState> {
    let d1 = spec.dim1();
    check_dim(d1, x0.dim())?;
    check_dim(d1, xn.dim())?;

    let alpha = cfg.alpha.value(n);
    let sigma = cfg.sigma.value(n);
    let gamma = cfg.gamma;
    let lambda = cfg.lambda;

    let s_x = spec.s.apply(xn)?;
    let weights = cfg.w_weights_at(n, spec.family.len());
    let w_x = apply_w_mapping(&spec.family, &weights, xn)?;
    let mixed = s_x.combine(sigma, &w_x, 1.0 - sigma);
    let u = xn.combine(1.0 - alpha, &project(&spec.c, &mixed)?, alpha);

    let z = forward_backward_apply(&spec.m1, &spec.f, lambda, &u)?;
    let az = spec.a.apply(&z)?;
    let w = forward_backward_apply(&spec.m2, &spec.g, lambda, &az)?;
    let split = &w - &az;
    let y = &z + &(gamma * &spec.a.apply_adjoint(&split)?);

    let cn = build_cn_halfspace(xn, &s_x, &y, alpha * sigma)?;
    let qn = build_qn_halfspace(x0, xn)?;
    let x_next = dykstra(&target_sets(&spec.c, &cn, &qn), x0, &cfg.dykstra)?.point;

    if !(u.is_finite() && y.is_finite() && x_next.is_finite()) {
        return Err(Error::NonFinite("iterate"));
    }

    let res_split = split.norm();
    let record = TraceRecord {
        n,
        res_split,
        res_yz: y.distance(&z),
        bound_yz: gamma * cfg.norm_estimate() * res_split,
        ratio_cond2: xn.distance(&u) / (alpha * sigma),
        dist_x0: xn.distance(x0),
        dist_p: None,
        sigma_n: sigma,
        alpha_n: alpha,
    };

    Ok(IterateState { n, x: xn.clone(), s_x, u, z, az, w, y, cn, qn, x_next, record })
}

#[derive(Clone, Debug, PartialEq)]
pub enum Termination {
    Converged { iterations: usize },
    BudgetExhausted { iterations: usize },
    Failed { n: usize, error: Error },
}

impl Termination {
    pub fn converged(&self) -> bool {
        matches!(self, Termination::Converged { .. })
    }
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Termination::Converged { iterations } => write!(
                f,
                "converged after {iterations} iterations: ‖x_(n+1) − x_n‖ and ‖w_n − Az_n‖ within stop_tol"
            ),
            Termination::BudgetExhausted { iterations } => {
                write!(f, "iteration budget exhausted after {iterations} iterations")
            }
            Termination::Failed { n, error } => write!(f, "step {n} failed: {error}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub trace: Vec<IterateState>,
    pub termination: Termination,
    /// The starting point actually used (after projection onto `C`).
    pub x0: Point,
    pub final_x: Point,
    pub warnings: Vec<String>,
}

impl RunOutcome {
    pub fn records(&self) -> Vec<TraceRecord> {
        self.trace.iter().map(|s| s.record.clone()).collect()
    }
}

const START_TOL: f64 = 1e-12;

/// Runs the iteration from `x0` until both residuals drop below
/// `stop_tol` or the budget runs out. A step error ends the run and keeps
/// the trace produced so far.
pub fn run(spec: &ProblemSpec, cfg: &ValidatedConfig, x0: &Point) -> Result<RunOutcome> {
    check_dim(spec.dim1(), x0.dim())?;
    let mut warnings = Vec::new();
    let x0 = if spec.c.contains(x0, START_TOL) {
        x0.clone()
    } else {
        let moved = project(&spec.c, x0)?;
        let msg = format!("x0 is outside C; projected onto C (moved by {:e})", moved.distance(x0));
        log::warn!("{msg}");
        warnings.push(msg);
        moved
    };

    let mut trace: Vec<IterateState> = Vec::new();
    let mut x = x0.clone();
    let mut termination = Termination::BudgetExhausted { iterations: cfg.max_iter };
    for n in 0..cfg.max_iter {
        let state = match step(spec, cfg, &x0, &x, n) {
            Ok(s) => s,
            Err(error) => {
                log::error!("step {n} failed: {error}");
                termination = Termination::Failed { n, error };
                break;
            }
        };
        let moved = state.x_next.distance(&state.x);
        let done = moved <= cfg.stop_tol && state.record.res_split <= cfg.stop_tol;
        x = state.x_next.clone();
        trace.push(state);
        if done {
            termination = Termination::Converged { iterations: n + 1 };
            break;
        }
    }
    log::debug!("run finished: {termination}");
    Ok(RunOutcome { trace, termination, x0, final_x: x, warnings })
}
