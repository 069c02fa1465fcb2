use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::matrix;
use super::point::Point;
use crate::error::{check_dim, Result};
use crate::rng::SeededRng;

/// Relative tolerance used for the cached norm estimate.
pub const NORM_TOL: f64 = 1e-10;
/// Inflation applied to the norm estimate before admissibility checks on γ.
pub const NORM_INFLATION: f64 = 1.01;

const POWER_SEED: u64 = 0x5eed_a11a;
const POWER_MAX_ITER: usize = 20_000;

/// A bounded linear map `A : H1 → H2` stored as a dense matrix with
/// `rows = dim H2`, `cols = dim H1`, together with a cached upper estimate
/// of its operator norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LinearMapRepr", into = "LinearMapRepr")]
pub struct LinearMap {
    matrix: DMatrix<f64>,
    norm_estimate: f64,
}

#[derive(Serialize, Deserialize)]
struct LinearMapRepr {
    #[serde(with = "matrix::rows")]
    rows: DMatrix<f64>,
}

impl TryFrom<LinearMapRepr> for LinearMap {
    type Error = crate::Error;
    fn try_from(r: LinearMapRepr) -> Result<Self> {
        LinearMap::new(r.rows)
    }
}

impl From<LinearMap> for LinearMapRepr {
    fn from(a: LinearMap) -> Self {
        LinearMapRepr { rows: a.matrix }
    }
}

impl LinearMap {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        matrix::check_finite(&matrix, "linear map")?;
        let norm_estimate = power_iteration_norm(&matrix, NORM_TOL);
        Ok(Self {
            matrix,
            norm_estimate,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(matrix::from_rows(rows)?)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: DMatrix::identity(dim, dim),
            norm_estimate: 1.0,
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn domain_dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn codomain_dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Cached upper estimate of `‖A‖ = ‖A*‖`.
    pub fn norm_estimate(&self) -> f64 {
        self.norm_estimate
    }

    /// The estimate inflated by [`NORM_INFLATION`], for conservative checks.
    pub fn inflated_norm(&self) -> f64 {
        NORM_INFLATION * self.norm_estimate
    }

    pub fn apply(&self, x: &Point) -> Result<Point> {
        check_dim(self.domain_dim(), x.dim())?;
        Ok(Point::from_raw(&self.matrix * x.as_vector()))
    }

    pub fn apply_adjoint(&self, y: &Point) -> Result<Point> {
        check_dim(self.codomain_dim(), y.dim())?;
        Ok(Point::from_raw(self.matrix.tr_mul(y.as_vector())))
    }
}

/// Power iteration on `AᵀA` from a fixed seed.
///
/// Stops once the eigen-residual `‖AᵀA v − ρ v‖` drops below `tol·ρ` and
/// returns `sqrt(ρ + residual)`, an upper estimate whenever the iteration
/// has locked onto the dominant eigenpair. The zero map gives 0.
pub fn estimate_operator_norm(a: &LinearMap, tol: f64) -> f64 {
    power_iteration_norm(&a.matrix, tol)
}

fn power_iteration_norm(m: &DMatrix<f64>, tol: f64) -> f64 {
    assert!(tol > 0.0, "tolerance must be positive");
    if m.iter().all(|v| *v == 0.0) {
        return 0.0;
    }
    let mut rng = SeededRng::new(POWER_SEED);
    let mut v = rng.unit_vector(m.ncols());
    let mut best = 0.0_f64;
    for _ in 0..POWER_MAX_ITER {
        let w: DVector<f64> = m.tr_mul(&(m * &v));
        let rho = v.dot(&w);
        let residual = (&w - &v * rho).norm();
        best = best.max(rho + residual);
        if residual <= tol * rho {
            return (rho + residual).sqrt();
        }
        let norm = w.norm();
        if norm == 0.0 {
            // landed in the null space; restart from a fresh direction
            v = rng.unit_vector(m.ncols());
            continue;
        }
        v = w / norm;
    }
    best.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::SymmetricEigen;

    fn p(c: &[f64]) -> Point {
        Point::from_slice(c).unwrap()
    }

    fn a22() -> LinearMap {
        LinearMap::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap()
    }

    #[test]
    fn apply_examples() {
        assert_eq!(LinearMap::identity(2).apply(&p(&[3.0, 4.0])).unwrap(), p(&[3.0, 4.0]));
        assert_eq!(a22().apply(&p(&[1.0, 0.0])).unwrap(), p(&[1.0, 3.0]));
    }

    #[test]
    fn adjoint_examples() {
        assert_eq!(LinearMap::identity(2).apply_adjoint(&p(&[1.0, 2.0])).unwrap(), p(&[1.0, 2.0]));
        assert_eq!(a22().apply_adjoint(&p(&[1.0, 0.0])).unwrap(), p(&[1.0, 2.0]));
    }

    #[test]
    fn dimension_errors() {
        let a = LinearMap::from_rows(&[vec![1.0, 2.0, 3.0]]).unwrap();
        assert!(a.apply(&p(&[1.0, 2.0])).is_err());
        assert!(a.apply_adjoint(&p(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn adjoint_identity_on_random_triples() {
        let mut rng = SeededRng::new(5);
        for _ in 0..100 {
            let rows = 1 + (rng.uniform() * 6.0) as usize;
            let cols = 1 + (rng.uniform() * 6.0) as usize;
            let a = LinearMap::new(rng.normal_matrix(rows, cols)).unwrap();
            let x = Point::from_vector(rng.normal_vector(cols)).unwrap();
            let y = Point::from_vector(rng.normal_vector(rows)).unwrap();
            let lhs = a.apply(&x).unwrap().dot(&y);
            let rhs = x.dot(&a.apply_adjoint(&y).unwrap());
            assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + x.norm() * y.norm()));
        }
    }

    fn singular_value_oracle(m: &DMatrix<f64>) -> f64 {
        let ata = m.transpose() * m;
        SymmetricEigen::new(ata).eigenvalues.max().max(0.0).sqrt()
    }

    #[test]
    fn norm_examples() {
        let tol = 1e-10;
        let id = estimate_operator_norm(&LinearMap::identity(2), tol);
        assert!((id - 1.0).abs() <= tol);
        let diag = LinearMap::from_rows(&[vec![3.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!((estimate_operator_norm(&diag, tol) - 3.0).abs() <= 3.0 * tol);
        let oracle = singular_value_oracle(a22().matrix());
        assert!((oracle - 5.4650).abs() < 1e-4);
        let est = estimate_operator_norm(&a22(), tol);
        assert!((est - oracle).abs() <= tol * oracle, "{est} vs {oracle}");
    }

    #[test]
    fn zero_map_has_zero_norm() {
        let z = LinearMap::new(DMatrix::zeros(3, 2)).unwrap();
        assert_eq!(z.norm_estimate(), 0.0);
    }

    #[test]
    fn cached_estimate_tracks_oracle_on_random_maps() {
        let mut rng = SeededRng::new(8);
        for _ in 0..50 {
            let rows = 1 + (rng.uniform() * 10.0) as usize;
            let cols = 1 + (rng.uniform() * 10.0) as usize;
            let a = LinearMap::new(rng.normal_matrix(rows, cols)).unwrap();
            let oracle = singular_value_oracle(a.matrix());
            assert!(a.norm_estimate() >= oracle - 1e-9 * oracle);
            assert!((a.norm_estimate() - oracle).abs() <= 1e-9 * oracle);
        }
    }

    #[test]
    fn serde_recomputes_norm() {
        let s = serde_json::to_string(&a22()).unwrap();
        assert_eq!(s, r#"{"rows":[[1.0,2.0],[3.0,4.0]]}"#);
        let back: LinearMap = serde_json::from_str(&s).unwrap();
        assert_eq!(back, a22());
    }
}
