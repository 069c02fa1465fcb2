use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::matrix::{self, rows};
use crate::geometry::Point;

/// θ-inverse strongly monotone maps:
/// `⟨f(x) − f(y), x − y⟩ ≥ θ‖f(x) − f(y)‖²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IsmMap {
    /// Inverse strongly monotone for every θ; [`IsmMap::theta`] reports `+∞`.
    Zero,
    /// Gradient `x ↦ Px + q` of a convex quadratic, `P` symmetric PSD,
    /// with `θ ≤ 1/λ_max(P)`.
    AffineGradient {
        #[serde(with = "rows")]
        p: DMatrix<f64>,
        q: Point,
        theta: f64,
    },
}

impl IsmMap {
    /// Affine gradient with the tight modulus `θ = 1/λ_max(P)`.
    pub fn affine_gradient(p: DMatrix<f64>, q: Point) -> Result<Self> {
        let lmax = *matrix::symmetric_eigenvalues(&p)
            .last()
            .ok_or_else(|| Error::InvalidOperator("empty matrix".into()))?;
        if !(lmax > 0.0) {
            return Err(Error::InvalidOperator("P = 0 has no finite modulus; use IsmMap::Zero".into()));
        }
        Self::affine_gradient_with_modulus(p, q, 1.0 / lmax)
    }

    pub fn affine_gradient_with_modulus(p: DMatrix<f64>, q: Point, theta: f64) -> Result<Self> {
        let f = IsmMap::AffineGradient { p, q, theta };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        let IsmMap::AffineGradient { p, q, theta } = self else {
            return Ok(());
        };
        matrix::check_finite(p, "gradient matrix")?;
        if !matrix::is_symmetric(p, 1e-12) {
            return Err(Error::InvalidOperator("gradient matrix P must be symmetric".into()));
        }
        check_dim(p.nrows(), q.dim())?;
        let ev = matrix::symmetric_eigenvalues(p);
        let (lmin, lmax) = (ev[0], ev[ev.len() - 1]);
        if lmin < -1e-9 * (1.0 + p.amax()) {
            return Err(Error::InvalidOperator(format!(
                "gradient matrix P is not positive semidefinite (λ_min = {lmin:.3e})"
            )));
        }
        if !(theta.is_finite() && *theta > 0.0) {
            return Err(Error::InvalidOperator(format!("modulus θ = {theta} must be positive")));
        }
        if lmax > 0.0 && *theta > (1.0 / lmax) * (1.0 + 1e-9) {
            return Err(Error::InvalidOperator(format!(
                "modulus θ = {theta} exceeds 1/λ_max(P) = {}",
                1.0 / lmax
            )));
        }
        Ok(())
    }

    pub fn theta(&self) -> f64 {
        match self {
            IsmMap::Zero => f64::INFINITY,
            IsmMap::AffineGradient { theta, .. } => *theta,
        }
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            IsmMap::Zero => None,
            IsmMap::AffineGradient { q, .. } => Some(q.dim()),
        }
    }

    pub fn apply(&self, x: &Point) -> Result<Point> {
        match self {
            IsmMap::Zero => Ok(Point::zeros(x.dim())),
            IsmMap::AffineGradient { p, q, .. } => {
                check_dim(q.dim(), x.dim())?;
                Ok(&Point::from_raw(p * x.as_vector()) + q)
            }
        }
    }
}

pub fn ism_apply(f: &IsmMap, x: &Point) -> Result<Point> {
    f.apply(x)
}
