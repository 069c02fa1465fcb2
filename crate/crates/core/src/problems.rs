//! Benchmark instances with planted, analytically known solution sets.
//!
//! Names used by [`resolve`]: `box[-DIM]:SEED`, `singleton[-D1xD2]:SEED`
//! and `l1[-DIM]:SEED`. Omitted dimensions take the defaults below.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{matrix, project, ConvexSet, LinearMap, Point};
use crate::operators::{apply_w_mapping, forward_backward_apply, IsmMap, NonexpansiveMap, Resolvent};
use crate::rng::SeededRng;
use crate::solver::{validate_config, ProblemSpec, Schedule, SolverConfig};

pub const DEFAULT_BOX_DIM: usize = 10;
pub const DEFAULT_SINGLETON_DIMS: (usize, usize) = (5, 3);
pub const DEFAULT_L1_DIM: usize = 8;
pub const DEFAULT_L1_WEIGHT: f64 = 0.5;

/// Residual tolerance for the fixed-point identities of a planted point.
pub const PLANT_TOL: f64 = 1e-10;

const RETRY_CAP: usize = 32;
const CONTRACTION_NORM: f64 = 0.5;
const START_OFFSET: f64 = 0.25;
/// Recommended `λ` as a fraction of the admissible limit `2·min(θ1, θ2)`.
const LAMBDA_FRACTION: f64 = 0.9;
/// Recommended `γ` as a fraction of the conservative limit `1/(1.01‖A‖)²`.
const GAMMA_FRACTION: f64 = 0.95;
const ALPHA: f64 = 0.9;

fn recommended_config(a: &LinearMap, lambda: f64, seed: u64) -> SolverConfig {
    SolverConfig {
        gamma: GAMMA_FRACTION / (a.inflated_norm() * a.inflated_norm()),
        lambda,
        alpha: Schedule::constant(ALPHA),
        probe_seed: seed,
        ..SolverConfig::default()
    }
}

/// Shape of the solution set `Γ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GammaSet {
    Singleton,
    Box { set: ConvexSet },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkProblem {
    pub name: String,
    pub spec: ProblemSpec,
    /// A point of `Γ`; for a singleton `Γ` this is the expected limit.
    pub planted: Point,
    pub gamma_set: GammaSet,
    pub config: SolverConfig,
    pub x0: Point,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantResiduals {
    /// `‖U(p) − p‖`
    pub u: f64,
    /// `‖V(Ap) − Ap‖`
    pub v: f64,
    /// `‖W(p) − p‖`
    pub w: f64,
    /// `‖S(p) − p‖`
    pub s: f64,
}

impl PlantResiduals {
    pub fn max(&self) -> f64 {
        self.u.max(self.v).max(self.w).max(self.s)
    }
}

impl BenchmarkProblem {
    /// `P_Γ x_0`, the limit the iteration should reach from `x_0`.
    pub fn expected_limit(&self, x0: &Point) -> Result<Point> {
        match &self.gamma_set {
            GammaSet::Singleton => Ok(self.planted.clone()),
            GammaSet::Box { set } => project(set, x0),
        }
    }

    pub fn plant_residuals(&self) -> Result<PlantResiduals> {
        let spec = &self.spec;
        let p = &self.planted;
        let lambda = self.config.lambda;
        let ap = spec.a.apply(p)?;
        let weights = self.config.w_weights_at(0, spec.family.len());
        Ok(PlantResiduals {
            u: forward_backward_apply(&spec.m1, &spec.f, lambda, p)?.distance(p),
            v: forward_backward_apply(&spec.m2, &spec.g, lambda, &ap)?.distance(&ap),
            w: apply_w_mapping(&spec.family, &weights, p)?.distance(p),
            s: spec.s.apply(p)?.distance(p),
        })
    }

    /// Checks that the planted point is a common fixed point of `U`,
    /// `V∘A`, `W` and `S`, and that the recommended config is admissible.
    pub fn verify_plant(&self) -> Result<PlantResiduals> {
        let r = self.plant_residuals()?;
        if r.max() > PLANT_TOL {
            return Err(Error::Construction(format!("planted point is not a fixed point: {r:?}")));
        }
        if !self.spec.c.contains(&self.planted, PLANT_TOL) {
            return Err(Error::Construction("planted point lies outside C".into()));
        }
        validate_config(&self.spec, &self.config).map_err(|e| Error::Construction(e.to_string()))?;
        Ok(r)
    }
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.contains(&0) {
        return Err(Error::InvalidParameter("dimensions must be at least 1".into()));
    }
    Ok(())
}

/// `C = [−1, 1]^dim`, `A = I`, `M1 = M2 = N_C`, `f = g = 0`, `S = T = I`.
/// `Γ = C`, so the limit from `x_0` is its componentwise clamp.
pub fn make_box_feasibility(dim: usize, seed: u64) -> Result<BenchmarkProblem> {
    check_dims(&[dim])?;
    let mut rng = SeededRng::new(seed);
    let cube = ConvexSet::cube(dim, -1.0, 1.0)?;
    let lambda = 1.0;
    let config = SolverConfig { gamma: 0.49, lambda, probe_seed: seed, ..SolverConfig::default() };
    let spec = ProblemSpec {
        c: cube.clone(),
        q: ConvexSet::WholeSpace,
        a: LinearMap::identity(dim),
        m1: Resolvent::normal_cone(cube.clone(), lambda)?,
        m2: Resolvent::normal_cone(cube.clone(), lambda)?,
        f: IsmMap::Zero,
        g: IsmMap::Zero,
        s: NonexpansiveMap::Identity,
        family: vec![NonexpansiveMap::Identity],
    };
    let x0 = rng.uniform_point(dim, -3.0, 3.0);
    let problem = BenchmarkProblem {
        name: format!("box-{dim}:{seed}"),
        planted: project(&cube, &x0)?,
        gamma_set: GammaSet::Box { set: cube },
        spec,
        config,
        x0,
    };
    problem.verify_plant()?;
    Ok(problem)
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// `GGᵀ/d + 0.1 I`
fn random_spd(rng: &mut SeededRng, d: usize) -> DMatrix<f64> {
    let g = rng.normal_matrix(d, d);
    symmetrize(&g * g.transpose() / d as f64) + DMatrix::identity(d, d) * 0.1
}

/// Skew part plus `0.5·GGᵀ/d`: monotone, not symmetric.
fn random_monotone(rng: &mut SeededRng, d: usize) -> DMatrix<f64> {
    let k = rng.normal_matrix(d, d) / (d as f64).sqrt();
    let g = rng.normal_matrix(d, d);
    (&k - k.transpose()) + symmetrize(&g * g.transpose() / d as f64) * 0.5
}

fn random_contraction(rng: &mut SeededRng, d: usize, norm: f64) -> Result<DMatrix<f64>> {
    let r = rng.normal_matrix(d, d);
    let s = matrix::spectral_norm(&r);
    if !(s > 1e-8) {
        return Err(Error::Construction("degenerate contraction draw".into()));
    }
    Ok(r * (norm / s))
}

fn planted_singleton_attempt(rng: &mut SeededRng, d1: usize, d2: usize) -> Result<(ProblemSpec, Point, Point, f64)> {
    let p = rng.uniform_point(d1, -1.0, 1.0);

    let a_mat = rng.normal_matrix(d2, d1) / (d1 as f64).sqrt();
    let sv = a_mat.singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    if !(smin > 1e-3 * smax) {
        return Err(Error::Construction(format!("A is nearly rank deficient (σ_min/σ_max = {:.2e})", smin / smax)));
    }
    let a = LinearMap::new(a_mat)?;
    let ap = a.apply(&p)?;

    let grad = |rng: &mut SeededRng, at: &Point| -> Result<IsmMap> {
        let pm = random_spd(rng, at.dim());
        let q = -&Point::from_vector(&pm * at.as_vector())?;
        IsmMap::affine_gradient(pm, q)
    };
    let f = grad(rng, &p)?;
    let g = grad(rng, &ap)?;
    let lambda = LAMBDA_FRACTION * 2.0 * f.theta().min(g.theta());

    let mono = |rng: &mut SeededRng, at: &Point| -> Result<Resolvent> {
        let b = random_monotone(rng, at.dim());
        let c = -&Point::from_vector(&b * at.as_vector())?;
        Resolvent::affine_monotone(b, c, lambda)
    };
    let m1 = mono(rng, &p)?;
    let m2 = mono(rng, &ap)?;

    let s = NonexpansiveMap::contraction_towards(random_contraction(rng, d1, CONTRACTION_NORM)?, &p)?;
    let family = (0..2)
        .map(|_| NonexpansiveMap::contraction_towards(random_contraction(rng, d1, CONTRACTION_NORM)?, &p))
        .collect::<Result<Vec<_>>>()?;

    let x0 = &p + &(START_OFFSET * &rng.unit_point(d1));
    let spec = ProblemSpec {
        c: ConvexSet::ball(p.clone(), 2.0)?,
        q: ConvexSet::WholeSpace,
        a,
        m1,
        m2,
        f,
        g,
        s,
        family,
    };
    Ok((spec, p, x0, lambda))
}

/// `Γ = {p}` for a random `p`: affine `f, g, M1, M2` vanishing at `p` and
/// `Ap`, and contractions towards `p` for `S` and the family.
pub fn make_planted_singleton(d1: usize, d2: usize, seed: u64) -> Result<BenchmarkProblem> {
    check_dims(&[d1, d2])?;
    let mut rng = SeededRng::new(seed);
    let mut last_err = None;
    for attempt in 0..RETRY_CAP {
        let built = planted_singleton_attempt(&mut rng, d1, d2).and_then(|(spec, planted, x0, lambda)| {
            let config = recommended_config(&spec.a, lambda, seed);
            let problem = BenchmarkProblem {
                name: format!("singleton-{d1}x{d2}:{seed}"),
                spec,
                planted,
                gamma_set: GammaSet::Singleton,
                config,
                x0,
            };
            problem.verify_plant()?;
            Ok(problem)
        });
        match built {
            Ok(problem) => return Ok(problem),
            Err(e) => {
                log::debug!("singleton draw {attempt} rejected: {e}");
                last_err = Some(e);
            }
        }
    }
    Err(Error::Construction(format!(
        "no admissible draw in {RETRY_CAP} attempts: {}",
        last_err.map_or_else(String::new, |e| e.to_string())
    )))
}

/// Soft thresholding of `b` at `weight`, the minimizer of
/// `½‖x − b‖² + weight·‖x‖₁`.
pub fn soft_threshold(b: &Point, weight: f64) -> Point {
    b.map(|v| v.signum() * (v.abs() - weight).max(0.0))
}

/// `M1 = weight·∂‖·‖₁`, `f(x) = x − b`, `A = I`, `M2 = g = 0`,
/// `S = T = I`, `C = [−3, 3]^dim`. `Γ = {soft(b, weight)}`.
pub fn make_l1_denoise(dim: usize, weight: f64, seed: u64) -> Result<BenchmarkProblem> {
    check_dims(&[dim])?;
    if !(weight.is_finite() && weight >= 0.0) {
        return Err(Error::InvalidParameter(format!("L1 weight {weight} must be >= 0")));
    }
    let mut rng = SeededRng::new(seed);
    let b = rng.uniform_point(dim, -2.0, 2.0);
    // f(x) = x − b has θ = 1
    let lambda = LAMBDA_FRACTION * 2.0;
    let spec = ProblemSpec {
        c: ConvexSet::cube(dim, -3.0, 3.0)?,
        q: ConvexSet::WholeSpace,
        a: LinearMap::identity(dim),
        m1: Resolvent::l1(weight, lambda)?,
        m2: Resolvent::zero(lambda)?,
        f: IsmMap::affine_gradient(DMatrix::identity(dim, dim), -&b)?,
        g: IsmMap::Zero,
        s: NonexpansiveMap::Identity,
        family: vec![NonexpansiveMap::Identity],
    };
    let config = recommended_config(&spec.a, lambda, seed);
    let problem = BenchmarkProblem {
        name: format!("l1-{dim}:{seed}"),
        planted: soft_threshold(&b, weight),
        gamma_set: GammaSet::Singleton,
        spec,
        config,
        x0: b,
    };
    problem.verify_plant()?;
    Ok(problem)
}

fn parse_dims(s: &str) -> Option<(usize, usize)> {
    let (a, b) = s.split_once('x')?;
    Some((a.parse().ok()?, b.parse().ok()?))
}

/// Builds a problem from its `name[-dims]:seed` address.
pub fn resolve(name: &str) -> Result<BenchmarkProblem> {
    let unknown = || Error::UnknownProblem(name.to_string());
    let (family, seed) = name.trim().split_once(':').ok_or_else(unknown)?;
    let seed: u64 = seed.parse().map_err(|_| unknown())?;
    let (kind, dims) = match family.split_once('-') {
        Some((k, d)) => (k, Some(d)),
        None => (family, None),
    };
    match kind {
        "box" => {
            let dim = dims.map_or(Some(DEFAULT_BOX_DIM), |d| d.parse().ok()).ok_or_else(unknown)?;
            make_box_feasibility(dim, seed)
        }
        "singleton" => {
            let (d1, d2) = dims.map_or(Some(DEFAULT_SINGLETON_DIMS), parse_dims).ok_or_else(unknown)?;
            make_planted_singleton(d1, d2, seed)
        }
        "l1" => {
            let dim = dims.map_or(Some(DEFAULT_L1_DIM), |d| d.parse().ok()).ok_or_else(unknown)?;
            make_l1_denoise(dim, DEFAULT_L1_WEIGHT, seed)
        }
        _ => Err(unknown()),
    }
}

/// The benchmark suite: box seeds 1–10, planted singletons of sizes
/// (2,2), (5,3), (20,10) with seeds 1–10, and L1 denoising in dims 2–20.
pub fn suite() -> Vec<String> {
    let mut names: Vec<String> = (1..=10).map(|s| format!("box-{DEFAULT_BOX_DIM}:{s}")).collect();
    for (d1, d2) in [(2, 2), (5, 3), (20, 10)] {
        names.extend((1..=10).map(|s| format!("singleton-{d1}x{d2}:{s}")));
    }
    names.extend((2..=20).map(|d| format!("l1-{d}:{d}")));
    names
}
