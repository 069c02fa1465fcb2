//! Runtime checks over iterate states and traces.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::Point;
use crate::operators::NonexpansiveMap;
use crate::rng::SeededRng;
use crate::solver::IterateState;

/// Slack used by every inequality check.
pub const CHECK_TOL: f64 = 1e-10;

/// Number of seeded random directions added to the canonical basis.
pub const RANDOM_PROBES: usize = 5;

pub const CONDITION_WINDOW: usize = 50;

/// One row of the trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub n: usize,
    /// `‖w_n − Az_n‖`
    pub res_split: f64,
    /// `‖y_n − z_n‖`
    pub res_yz: f64,
    /// `γ‖A*‖‖w_n − Az_n‖`
    pub bound_yz: f64,
    /// `‖x_n − u_n‖/(α_n σ_n)`
    pub ratio_cond2: f64,
    /// `‖x_n − x_0‖`
    pub dist_x0: f64,
    /// `‖x_n − p‖` when a reference point is attached.
    pub dist_p: Option<f64>,
    pub sigma_n: f64,
    pub alpha_n: f64,
}

impl TraceRecord {
    pub fn bound_holds(&self) -> bool {
        self.res_yz <= self.bound_yz + CHECK_TOL
    }

    pub fn is_well_formed(&self) -> bool {
        let vals = [self.res_split, self.res_yz, self.bound_yz, self.ratio_cond2, self.dist_x0, self.sigma_n, self.alpha_n];
        vals.iter().chain(self.dist_p.iter()).all(|v| v.is_finite() && *v >= 0.0)
    }
}

/// Fills `dist_p` on every record.
pub fn attach_reference(trace: &mut [IterateState], p: &Point) -> Result<()> {
    for s in trace.iter_mut() {
        check_dim(s.x.dim(), p.dim())?;
        s.record.dist_p = Some(s.x.distance(p));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
}

impl BoundCheck {
    fn new(lhs: f64, rhs: f64) -> Self {
        Self { lhs, rhs, margin: rhs - lhs, pass: lhs <= rhs + CHECK_TOL }
    }
}

/// `‖y_n − z_n‖ ≤ γ‖A*‖‖w_n − Az_n‖`, recomputed from the state's points.
pub fn check_simple_proof_bound(state: &IterateState, gamma: f64, adjoint_norm: f64) -> BoundCheck {
    let lhs = state.y.distance(&state.z);
    let rhs = gamma * adjoint_norm * state.w.distance(&state.az);
    BoundCheck::new(lhs, rhs)
}

/// Unit probe directions and the point `x*` they are measured against.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeSet {
    directions: Vec<Point>,
    reference: Point,
    /// Set when `reference` is the final iterate rather than a known solution.
    proxy: bool,
}

impl ProbeSet {
    pub fn new(directions: Vec<Point>, reference: Point, proxy: bool) -> Result<Self> {
        if directions.is_empty() {
            return Err(Error::InvalidParameter("probe set is empty".into()));
        }
        let directions = directions
            .into_iter()
            .map(|d| {
                check_dim(reference.dim(), d.dim())?;
                let norm = d.norm();
                if norm == 0.0 {
                    return Err(Error::InvalidParameter("zero probe direction".into()));
                }
                Ok(d * (1.0 / norm))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { directions, reference, proxy })
    }

    /// Canonical basis plus [`RANDOM_PROBES`] seeded random unit vectors.
    pub fn standard(reference: Point, seed: u64, proxy: bool) -> Self {
        let dim = reference.dim();
        let mut rng = SeededRng::new(seed);
        let mut directions: Vec<Point> = (0..dim).map(|i| Point::basis(dim, i)).collect();
        directions.extend((0..RANDOM_PROBES).map(|_| rng.unit_point(dim)));
        Self { directions, reference, proxy }
    }

    pub fn directions(&self) -> &[Point] {
        &self.directions
    }

    pub fn reference(&self) -> &Point {
        &self.reference
    }

    pub fn is_proxy(&self) -> bool {
        self.proxy
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeValue {
    /// `⟨d_n − x*, y⟩` with `d_n = (u_n − x_n)/α_n + x_n`
    pub value: f64,
    /// `(‖u_n − x_n‖/α_n)‖y‖`
    pub step_term: f64,
    /// `⟨x_n − x*, y⟩`
    pub drift: f64,
}

impl ProbeValue {
    pub fn bound(&self) -> f64 {
        self.step_term + self.drift.abs()
    }

    pub fn dominated(&self) -> bool {
        self.value.abs() <= self.bound() + CHECK_TOL
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub values: Vec<ProbeValue>,
    /// `‖x* − d_n‖`
    pub strong_residual: f64,
}

impl ProbeReport {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.value.abs()).fold(0.0, f64::max)
    }

    pub fn all_dominated(&self) -> bool {
        self.values.iter().all(ProbeValue::dominated)
    }
}

/// `d_n = (u_n − x_n)/α_n + x_n`
fn shifted_point(state: &IterateState) -> Result<Point> {
    let alpha = state.record.alpha_n;
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("α_n must be positive, got {alpha}")));
    }
    Ok(&((&state.u - &state.x) * (1.0 / alpha)) + &state.x)
}

/// Weak residuals `⟨d_n − x*, y⟩` over the probe set, alongside the
/// strong residual `‖x* − d_n‖`.
pub fn weak_probe(state: &IterateState, probes: &ProbeSet) -> Result<ProbeReport> {
    let x_star = probes.reference();
    check_dim(state.x.dim(), x_star.dim())?;
    let d = shifted_point(state)?;
    let step_len = state.u.distance(&state.x) / state.record.alpha_n;
    let offset = &d - x_star;
    let drift_vec = &state.x - x_star;
    let values = probes
        .directions()
        .iter()
        .map(|y| ProbeValue { value: offset.dot(y), step_term: step_len * y.norm(), drift: drift_vec.dot(y) })
        .collect();
    Ok(ProbeReport { values, strong_residual: offset.norm() })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// `|⟨Sx_n, x − d_n⟩ − ⟨Sx*, x − x*⟩| ≤ ‖Sx_n − Sx*‖‖x − d_n‖ + |⟨Sx*, x* − d_n⟩|`
pub fn check_remark5_chain(
    state: &IterateState,
    s_at_xn: &Point,
    s_at_xstar: &Point,
    probe_x: &Point,
    x_star: &Point,
) -> Result<ChainCheck> {
    let dim = state.x.dim();
    for p in [s_at_xn, s_at_xstar, probe_x, x_star] {
        check_dim(dim, p.dim())?;
    }
    let d = shifted_point(state)?;
    let lhs = (s_at_xn.dot(&(probe_x - &d)) - s_at_xstar.dot(&(probe_x - x_star))).abs();
    let rhs = s_at_xn.distance(s_at_xstar) * probe_x.distance(&d) + s_at_xstar.dot(&(x_star - &d)).abs();
    Ok(ChainCheck { lhs, rhs, pass: lhs <= rhs + CHECK_TOL })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuityReport {
    /// `‖x_n − x*‖` per iterate
    pub x_residuals: Vec<f64>,
    /// `‖Sx_n − Sx*‖` per iterate
    pub s_residuals: Vec<f64>,
    /// Largest `‖Sx_n − Sx*‖/‖x_n − x*‖` over iterates with `x_n ≠ x*`.
    pub max_ratio: f64,
    /// Set when the `x` residual decays by 10× while the `S` residual keeps
    /// more than half its initial size.
    pub flagged: bool,
}

pub fn continuity_monitor_s(trace: &[IterateState], s: &NonexpansiveMap, x_star: &Point) -> Result<ContinuityReport> {
    if trace.is_empty() {
        return Err(Error::InvalidParameter("continuity monitor needs a nonempty trace".into()));
    }
    let s_star = s.apply(x_star)?;
    let mut x_residuals = Vec::with_capacity(trace.len());
    let mut s_residuals = Vec::with_capacity(trace.len());
    let mut max_ratio: f64 = 0.0;
    for state in trace {
        check_dim(x_star.dim(), state.x.dim())?;
        let dx = state.x.distance(x_star);
        let ds = s.apply(&state.x)?.distance(&s_star);
        if dx > 0.0 {
            max_ratio = max_ratio.max(ds / dx);
        }
        x_residuals.push(dx);
        s_residuals.push(ds);
    }
    let (x_first, x_last) = (x_residuals[0], x_residuals[x_residuals.len() - 1]);
    let (s_first, s_last) = (s_residuals[0], s_residuals[s_residuals.len() - 1]);
    let flagged = x_first > 0.0 && x_last <= 0.1 * x_first && s_first > 0.0 && s_last > 0.5 * s_first;
    Ok(ContinuityReport { x_residuals, s_residuals, max_ratio, flagged })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub len: usize,
    pub last_sigma: f64,
    pub sigma_nonincreasing: bool,
    pub window: usize,
    pub ratio_window_start: f64,
    pub last_ratio: f64,
    /// Set when `ratio_cond2` did not decrease over the trailing window.
    pub cond2_flag: bool,
}

pub fn condition_report(records: &[TraceRecord]) -> Result<ConditionReport> {
    let len = records.len();
    if len < 2 {
        return Err(Error::InvalidParameter(format!("condition report needs at least 2 records, got {len}")));
    }
    let sigma_nonincreasing = records.windows(2).all(|w| w[1].sigma_n <= w[0].sigma_n);
    let window = CONDITION_WINDOW.min(len - 1);
    let ratio_window_start = records[len - 1 - window].ratio_cond2;
    let last_ratio = records[len - 1].ratio_cond2;
    Ok(ConditionReport {
        len,
        last_sigma: records[len - 1].sigma_n,
        sigma_nonincreasing,
        window,
        ratio_window_start,
        last_ratio,
        cond2_flag: last_ratio > 0.0 && last_ratio >= ratio_window_start,
    })
}

/// Pass/fail counts for one family of checks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Tally {
    pub checked: usize,
    pub violations: usize,
    pub first_violation: Option<usize>,
    /// Smallest `rhs − lhs` seen.
    pub worst_margin: Option<f64>,
}

impl Tally {
    pub fn record(&mut self, index: usize, lhs: f64, rhs: f64) -> bool {
        let pass = lhs <= rhs + CHECK_TOL;
        self.checked += 1;
        let margin = rhs - lhs;
        self.worst_margin = Some(self.worst_margin.map_or(margin, |m| m.min(margin)));
        if !pass {
            self.violations += 1;
            self.first_violation.get_or_insert(index);
        }
        pass
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Bound checks over trace records alone: the `‖y − z‖` bound per row and
/// `‖x_n − x_0‖` nondecreasing between rows.
pub fn check_records(records: &[TraceRecord]) -> (Tally, Tally) {
    let mut bound = Tally::default();
    let mut monotone = Tally::default();
    for (i, r) in records.iter().enumerate() {
        bound.record(i, r.res_yz, r.bound_yz);
        if i > 0 {
            monotone.record(i, records[i - 1].dist_x0, r.dist_x0);
        }
    }
    (bound, monotone)
}

/// Everything the solver run is checked against.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceVerification {
    pub iterations: usize,
    pub reference_is_proxy: bool,
    pub simple_proof_bound: Tally,
    pub chain: Tally,
    pub probes: Tally,
    pub monotone_distance: Tally,
    pub final_probe_max: Option<f64>,
    pub final_strong_residual: Option<f64>,
    pub condition: Option<ConditionReport>,
    pub continuity_max_ratio: Option<f64>,
    pub continuity_flag: bool,
}

impl TraceVerification {
    /// The bound and chain checks, which decide the run's pass/fail status.
    pub fn checks_passed(&self) -> bool {
        self.simple_proof_bound.passed() && self.chain.passed()
    }
}

/// Runs all diagnostics over a trace. `adjoint_norm` is the `‖A*‖` estimate
/// the run used; the chain check evaluates at one seeded random point per
/// iterate.
pub fn verify_trace(
    trace: &[IterateState],
    gamma: f64,
    adjoint_norm: f64,
    s: &NonexpansiveMap,
    probes: &ProbeSet,
    seed: u64,
) -> Result<TraceVerification> {
    let x_star = probes.reference();
    let s_star = s.apply(x_star)?;
    let mut rng = SeededRng::new(seed);
    let mut simple = Tally::default();
    let mut chain = Tally::default();
    let mut probe_tally = Tally::default();
    let mut final_probe = None;
    for (i, state) in trace.iter().enumerate() {
        let b = check_simple_proof_bound(state, gamma, adjoint_norm);
        simple.record(i, b.lhs, b.rhs);

        let scale = 1.0 + x_star.norm();
        let probe_x = x_star + &(scale * &rng.normal_point(x_star.dim()));
        let c = check_remark5_chain(state, &state.s_x, &s_star, &probe_x, x_star)?;
        chain.record(i, c.lhs, c.rhs);

        let report = weak_probe(state, probes)?;
        for v in &report.values {
            probe_tally.record(i, v.value.abs(), v.bound());
        }
        final_probe = Some(report);
    }
    let records: Vec<TraceRecord> = trace.iter().map(|s| s.record.clone()).collect();
    let (_, monotone) = check_records(&records);
    let continuity = if trace.is_empty() { None } else { Some(continuity_monitor_s(trace, s, x_star)?) };
    Ok(TraceVerification {
        iterations: trace.len(),
        reference_is_proxy: probes.is_proxy(),
        simple_proof_bound: simple,
        chain,
        probes: probe_tally,
        monotone_distance: monotone,
        final_probe_max: final_probe.as_ref().map(ProbeReport::max_abs),
        final_strong_residual: final_probe.as_ref().map(|r| r.strong_residual),
        condition: condition_report(&records).ok(),
        continuity_max_ratio: continuity.as_ref().map(|c| c.max_ratio),
        continuity_flag: continuity.is_some_and(|c| c.flagged),
    })
}
