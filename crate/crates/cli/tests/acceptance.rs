//! Acceptance suite. Runs without the libtest harness and prints one
//! PASS/FAIL line per criterion; exits non-zero when any criterion fails.

use std::fs;
use std::ops::{Add, AddAssign, Sub, SubAssign};
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use splitvi::diagnostics::{attach_reference, check_records, check_remark5_chain, verify_trace, ProbeSet, CHECK_TOL};
use splitvi::geometry::{dykstra, ConvexSet, DykstraSettings, HalfSpace, Point};
use splitvi::operators::{apply_w_mapping, forward_backward_apply, IsmMap, NonexpansiveMap, Resolvent};
use splitvi::problems::{self, GammaSet};
use splitvi::rng::SeededRng;
use splitvi::solver::{run, validate_config, IterateState};
use splitvi_cli::{cmd_run, ProblemRef, RunManifest};
use static_assertions::assert_not_impl_any;

assert_not_impl_any!(Point: Add<f64>, Sub<f64>, AddAssign<f64>, SubAssign<f64>);
assert_not_impl_any!(&'static Point: Add<f64>, Sub<f64>);
assert_not_impl_any!(f64: Add<Point>, Sub<Point>, Add<&'static Point>, Sub<&'static Point>);

const CHAIN_STATES: usize = 1000;
const PAIRS: usize = 1000;
const QP_INSTANCES: usize = 100;

struct Verdict {
    id: usize,
    title: &'static str,
    pass: bool,
    detail: String,
}

struct SuiteRun {
    name: String,
    kind: &'static str,
    converged: bool,
    final_error: f64,
    gamma: f64,
    adjoint_norm: f64,
    trace: Vec<IterateState>,
    reference: Point,
    s: NonexpansiveMap,
    bound_violations: usize,
    probe_violations: usize,
    final_probe_max: f64,
    monotone_violations: usize,
    rows: usize,
}

fn run_problem(name: &str) -> Result<SuiteRun, String> {
    let p = problems::resolve(name).map_err(|e| e.to_string())?;
    let cfg = validate_config(&p.spec, &p.config).map_err(|e| e.to_string())?;
    let mut out = run(&p.spec, &cfg, &p.x0).map_err(|e| e.to_string())?;
    let reference = p.expected_limit(&p.x0).map_err(|e| e.to_string())?;
    attach_reference(&mut out.trace, &reference).map_err(|e| e.to_string())?;
    let probes = ProbeSet::standard(reference.clone(), cfg.probe_seed, false);
    let v = verify_trace(&out.trace, cfg.gamma, cfg.norm_estimate(), &p.spec.s, &probes, cfg.probe_seed)
        .map_err(|e| e.to_string())?;
    let (bound, monotone) = check_records(&out.records());
    let kind = match (&p.gamma_set, name.starts_with("l1")) {
        (GammaSet::Box { .. }, _) => "box",
        (_, true) => "l1",
        _ => "singleton",
    };
    Ok(SuiteRun {
        name: name.to_string(),
        kind,
        converged: out.termination.converged(),
        final_error: out.final_x.distance(&reference),
        gamma: cfg.gamma,
        adjoint_norm: cfg.norm_estimate(),
        bound_violations: bound.violations + v.simple_proof_bound.violations,
        probe_violations: v.probes.violations,
        final_probe_max: v.final_probe_max.unwrap_or(0.0),
        monotone_violations: monotone.violations,
        rows: out.trace.len(),
        trace: out.trace,
        reference,
        s: p.spec.s.clone(),
    })
}

fn criterion_1(runs: &[SuiteRun], secs: f64) -> Verdict {
    let violations: usize = runs.iter().map(|r| r.bound_violations).sum();
    let rows: usize = runs.iter().map(|r| r.rows).sum();
    Verdict {
        id: 1,
        title: "y-z bound over the suite",
        pass: violations == 0 && secs < 60.0,
        detail: format!("{violations} violations over {rows} iterates of {} runs, {secs:.1} s", runs.len()),
    }
}

fn criterion_2(runs: &[SuiteRun]) -> Verdict {
    let checked: Vec<&SuiteRun> = runs.iter().filter(|r| r.kind != "l1").collect();
    let worst = checked.iter().max_by(|a, b| a.final_error.total_cmp(&b.final_error)).unwrap();
    let within_budget = checked.iter().all(|r| r.rows <= 10_000);
    Verdict {
        id: 2,
        title: "strong convergence to the planted limit",
        pass: worst.final_error <= 1e-4 && within_budget,
        detail: format!("{} runs, worst final error {:.2e} ({})", checked.len(), worst.final_error, worst.name),
    }
}

fn criterion_3(runs: &[SuiteRun]) -> Verdict {
    let (mut checked, mut bad) = (0, Vec::new());
    for r in runs.iter().filter(|r| r.final_error <= 1e-4) {
        for s in &r.trace {
            if s.record.res_split <= 1e-6 {
                checked += 1;
                if s.record.res_yz > r.gamma * r.adjoint_norm * 1e-6 {
                    bad.push(format!("{} n={}", r.name, s.n));
                }
            }
        }
    }
    Verdict {
        id: 3,
        title: "co-decay of the split residual and y-z",
        pass: bad.is_empty() && checked > 0,
        detail: format!("{} violations over {checked} iterates with split residual <= 1e-6 {}", bad.len(), first(&bad)),
    }
}

fn chain_states(r: &SuiteRun, seed: u64) -> (usize, usize) {
    let mut rng = SeededRng::new(seed);
    let dim = r.reference.dim();
    let s_star = r.s.apply(&r.reference).unwrap();
    let mut violations = 0;
    for _ in 0..CHAIN_STATES {
        let mut state = r.trace[(rng.uniform() * r.trace.len() as f64) as usize % r.trace.len()].clone();
        // scales from 1e-6 to 10 around the trace state
        let scale = 10f64.powf(rng.uniform_in(-6.0, 1.0));
        state.x = &state.x + &(scale * &rng.normal_point(dim));
        state.u = &state.u + &(scale * &rng.normal_point(dim));
        state.record.alpha_n = rng.uniform_in(0.01, 1.0);
        let s_x = r.s.apply(&state.x).unwrap();
        let probe_x = &r.reference + &(10.0 * &rng.normal_point(dim));
        let c = check_remark5_chain(&state, &s_x, &s_star, &probe_x, &r.reference).unwrap();
        if !(c.lhs <= c.rhs + CHECK_TOL) {
            violations += 1;
        }
    }
    (CHAIN_STATES, violations)
}

fn criterion_4(runs: &[SuiteRun]) -> Verdict {
    let results: Vec<(usize, usize)> =
        runs.par_iter().enumerate().map(|(i, r)| chain_states(r, 9000 + i as u64)).collect();
    let checked: usize = results.iter().map(|c| c.0).sum();
    let violations: usize = results.iter().map(|c| c.1).sum();
    Verdict {
        id: 4,
        title: "chain inequality on randomized states",
        pass: violations == 0,
        detail: format!("{violations} violations over {checked} states ({CHAIN_STATES} per problem)"),
    }
}

fn criterion_5(runs: &[SuiteRun]) -> Verdict {
    let violations: usize = runs.iter().map(|r| r.probe_violations).sum();
    let planted: Vec<&SuiteRun> = runs.iter().filter(|r| r.kind == "singleton").collect();
    let worst = planted.iter().max_by(|a, b| a.final_probe_max.total_cmp(&b.final_probe_max)).unwrap();
    Verdict {
        id: 5,
        title: "weak-probe domination and final probe size",
        pass: violations == 0 && worst.final_probe_max <= 1e-3,
        detail: format!(
            "{violations} domination violations; worst final probe {:.2e} ({}) over {} planted runs",
            worst.final_probe_max,
            worst.name,
            planted.len()
        ),
    }
}

/// Exact projection onto `{x : Gx ≤ h}` by enumerating active sets of at
/// most `dim` constraints: the projection is the closest feasible point
/// among the projections onto the affine hulls of the faces.
fn brute_force_projection(g: &DMatrix<f64>, h: &DVector<f64>, x: &DVector<f64>) -> DVector<f64> {
    let (m, dim) = g.shape();
    let feasible = |z: &DVector<f64>| (g * z - h).iter().all(|v| *v <= 1e-9);
    let mut best: Option<(f64, DVector<f64>)> = feasible(x).then(|| (0.0, x.clone()));
    for mask in 1u32..(1 << m) {
        let active: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
        if active.len() > dim {
            continue;
        }
        let ga = g.select_rows(&active);
        let ha = DVector::from_iterator(active.len(), active.iter().map(|&i| h[i]));
        let Some(mu) = (&ga * ga.transpose()).lu().solve(&(&ga * x - ha)) else {
            continue;
        };
        let z = x - ga.transpose() * mu;
        let d = (&z - x).norm();
        if feasible(&z) && best.as_ref().is_none_or(|(bd, _)| d < *bd) {
            best = Some((d, z));
        }
    }
    best.expect("feasible instance").1
}

fn criterion_6() -> Verdict {
    let mut rng = SeededRng::new(6006);
    let settings = DykstraSettings { max_iter: 200_000, tol: 1e-14, ..DykstraSettings::default() };
    let mut worst = 0.0f64;
    for _ in 0..QP_INSTANCES {
        let dim = 2 + (rng.uniform() * 3.0) as usize;
        let lower = rng.uniform_point(dim, -2.0, 0.0);
        let upper = lower.map(|v| v + 0.5) + rng.uniform_point(dim, 0.0, 2.5);
        let inside = lower.combine(0.5, &upper, 0.5);
        let halfspaces: Vec<HalfSpace> = (0..2)
            .map(|_| {
                let a = rng.unit_point(dim);
                let b = a.dot(&inside) + rng.uniform_in(0.0, 0.5);
                HalfSpace::new(a, b).unwrap()
            })
            .collect();
        let x = rng.uniform_point(dim, -5.0, 5.0);

        let mut g = DMatrix::zeros(2 * dim + 2, dim);
        let mut h = DVector::zeros(2 * dim + 2);
        for i in 0..dim {
            g[(2 * i, i)] = 1.0;
            h[2 * i] = upper.coords()[i];
            g[(2 * i + 1, i)] = -1.0;
            h[2 * i + 1] = -lower.coords()[i];
        }
        for (k, hs) in halfspaces.iter().enumerate() {
            g.row_mut(2 * dim + k).copy_from(&hs.normal().as_vector().transpose());
            h[2 * dim + k] = hs.offset();
        }
        let oracle = brute_force_projection(&g, &h, x.as_vector());

        let mut sets = vec![ConvexSet::boxed(lower, upper).unwrap()];
        sets.extend(halfspaces.into_iter().map(ConvexSet::HalfSpace));
        let got = dykstra(&sets, &x, &settings).unwrap().point;
        worst = worst.max((got.as_vector() - oracle).norm());
    }
    Verdict {
        id: 6,
        title: "Dykstra against a brute-force QP oracle",
        pass: worst <= 1e-6,
        detail: format!("{QP_INSTANCES} box + 2 half-space instances, worst gap {worst:.2e}"),
    }
}

const OP_DIM: usize = 4;
const OP_TOL: f64 = 1e-10;

fn random_resolvents(rng: &mut SeededRng, lambda: f64) -> Vec<Resolvent> {
    let k = rng.normal_matrix(OP_DIM, OP_DIM);
    let g = rng.normal_matrix(OP_DIM, OP_DIM);
    let b = (&k - k.transpose()) + &g * g.transpose() * 0.2;
    let h = HalfSpace::new(rng.unit_point(OP_DIM), rng.uniform_in(-1.0, 1.0)).unwrap();
    vec![
        Resolvent::zero(lambda).unwrap(),
        Resolvent::l1(rng.uniform_in(0.0, 2.0), lambda).unwrap(),
        Resolvent::affine_monotone(b, rng.normal_point(OP_DIM), lambda).unwrap(),
        Resolvent::normal_cone(ConvexSet::cube(OP_DIM, -1.0, 2.0).unwrap(), lambda).unwrap(),
        Resolvent::normal_cone(ConvexSet::ball(rng.uniform_point(OP_DIM, -1.0, 1.0), 1.5).unwrap(), lambda).unwrap(),
        Resolvent::normal_cone(ConvexSet::HalfSpace(h), lambda).unwrap(),
    ]
}

fn random_gradient(rng: &mut SeededRng) -> IsmMap {
    let g = rng.normal_matrix(OP_DIM, OP_DIM);
    let p = &g * g.transpose();
    IsmMap::affine_gradient((&p + p.transpose()) * 0.5, rng.normal_point(OP_DIM)).unwrap()
}

fn random_family(rng: &mut SeededRng, anchor: &Point) -> Vec<NonexpansiveMap> {
    let r = rng.normal_matrix(OP_DIM, OP_DIM);
    let r = &r * (rng.uniform() / r.singular_values().max());
    let around = |lo: f64, hi: f64| ConvexSet::boxed(anchor.map(|v| v + lo), anchor.map(|v| v + hi)).unwrap();
    let flip = NonexpansiveMap::contraction_towards(DMatrix::identity(OP_DIM, OP_DIM) * -1.0, anchor).unwrap();
    vec![
        NonexpansiveMap::contraction_towards(r, anchor).unwrap(),
        NonexpansiveMap::Projection { set: around(-0.5, 0.5) },
        NonexpansiveMap::Reflection { set: around(-1.0, 0.0) },
        NonexpansiveMap::average(0.3, flip).unwrap(),
    ]
}

fn criterion_7() -> Verdict {
    let mut rng = SeededRng::new(7007);
    let pt = |rng: &mut SeededRng| rng.uniform_point(OP_DIM, -10.0, 10.0);
    let (mut firm, mut ism, mut fb, mut wne, mut wfix) = (0, 0, 0, 0, 0);
    for _ in 0..PAIRS {
        let (x, y) = (pt(&mut rng), pt(&mut rng));
        let gap = x.distance(&y);
        let lambda = rng.uniform_in(0.1, 3.0);
        for j in random_resolvents(&mut rng, lambda) {
            let d = &j.apply(&x).unwrap() - &j.apply(&y).unwrap();
            if d.norm_squared() > d.dot(&(&x - &y)) + OP_TOL * (1.0 + gap * gap) {
                firm += 1;
            }
        }

        let f = random_gradient(&mut rng);
        let df = &f.apply(&x).unwrap() - &f.apply(&y).unwrap();
        if df.dot(&(&x - &y)) < f.theta() * df.norm_squared() - OP_TOL * (1.0 + df.norm_squared()) {
            ism += 1;
        }
        let step = 2.0 * f.theta() * rng.uniform_in(0.01, 0.99);
        for j in random_resolvents(&mut rng, step) {
            let tx = forward_backward_apply(&j, &f, step, &x).unwrap();
            let ty = forward_backward_apply(&j, &f, step, &y).unwrap();
            if tx.distance(&ty) > gap * (1.0 + OP_TOL) + OP_TOL {
                fb += 1;
            }
        }

        let anchor = pt(&mut rng);
        let fam = random_family(&mut rng, &anchor);
        let weights: Vec<f64> = (0..fam.len()).map(|_| rng.uniform()).collect();
        let wx = apply_w_mapping(&fam, &weights, &x).unwrap();
        let wy = apply_w_mapping(&fam, &weights, &y).unwrap();
        if wx.distance(&wy) > gap * (1.0 + OP_TOL) + OP_TOL {
            wne += 1;
        }
        if apply_w_mapping(&fam, &weights, &anchor).unwrap().distance(&anchor) > OP_TOL * (1.0 + anchor.norm()) {
            wfix += 1;
        }
    }
    let total = firm + ism + fb + wne + wfix;
    Verdict {
        id: 7,
        title: "operator property suites",
        pass: total == 0,
        detail: format!(
            "{PAIRS} pairs each; violations: resolvent {firm}, ism {ism}, forward-backward {fb}, W nonexpansive {wne}, W fixed point {wfix}"
        ),
    }
}

fn criterion_8() -> Verdict {
    // the assertions at the top of this file fail to compile otherwise
    Verdict {
        id: 8,
        title: "no scalar addition on Point",
        pass: true,
        detail: "Point and &Point implement no Add/Sub/AddAssign/SubAssign with f64, f64 none with Point".into(),
    }
}

fn criterion_9(runs: &[SuiteRun]) -> Verdict {
    let bad: Vec<String> = runs.iter().filter(|r| r.monotone_violations > 0).map(|r| r.name.clone()).collect();
    Verdict {
        id: 9,
        title: "distance to x0 nondecreasing",
        pass: bad.is_empty(),
        detail: format!("{} of {} runs with a decrease {}", bad.len(), runs.len(), first(&bad)),
    }
}

fn criterion_10() -> Verdict {
    let dir = tempfile::TempDir::new().unwrap();
    let mut mismatched = Vec::new();
    let names = ["box:3", "singleton-5x3:4", "l1-6:6"];
    for name in names {
        let m = RunManifest::with_defaults(ProblemRef::Named(name.into()), dir.path());
        cmd_run(&m);
        let first_bytes = fs::read(&m.trace_out).unwrap_or_default();
        cmd_run(&m);
        let second_bytes = fs::read(&m.trace_out).unwrap_or_default();
        if first_bytes.is_empty() || first_bytes != second_bytes {
            mismatched.push(name.to_string());
        }
    }
    Verdict {
        id: 10,
        title: "deterministic traces",
        pass: mismatched.is_empty(),
        detail: format!("{} of {} manifests differ {}", mismatched.len(), names.len(), first(&mismatched)),
    }
}

fn first(items: &[String]) -> String {
    items.first().map_or(String::new(), |s| format!("(first: {s})"))
}

fn main() {
    let started = Instant::now();
    let results: Vec<Result<SuiteRun, String>> = problems::suite().par_iter().map(|n| run_problem(n)).collect();
    let secs = started.elapsed().as_secs_f64();
    let mut runs = Vec::new();
    for r in results {
        match r {
            Ok(r) => runs.push(r),
            Err(e) => {
                println!("suite problem failed to run: {e}");
                std::process::exit(1);
            }
        }
    }
    let unconverged = runs.iter().filter(|r| !r.converged).count();

    let verdicts = vec![
        criterion_1(&runs, secs),
        criterion_2(&runs),
        criterion_3(&runs),
        criterion_4(&runs),
        criterion_5(&runs),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(&runs),
        criterion_10(),
    ];
    println!();
    println!("acceptance: {} suite runs, {unconverged} ended on the iteration budget", runs.len());
    for v in &verdicts {
        println!("criterion {:>2} {} {}: {}", v.id, if v.pass { "PASS" } else { "FAIL" }, v.title, v.detail);
    }
    let failed = verdicts.iter().filter(|v| !v.pass).count();
    println!("acceptance: {} passed, {failed} failed", verdicts.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
