use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::matrix::{self, rows};
use crate::geometry::{project, ConvexSet, Point};

/// 1-Lipschitz maps used for `S` and the family `T_1, …, T_N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NonexpansiveMap {
    Identity,
    Negation,
    /// `2P_C − I`
    Reflection { set: ConvexSet },
    /// `α·inner + (1 − α)·I`
    Average { alpha: f64, inner: Box<NonexpansiveMap> },
    Projection { set: ConvexSet },
    /// `x ↦ Rx + s` with `‖R‖ ≤ 1`
    AffineContraction {
        #[serde(with = "rows")]
        r: DMatrix<f64>,
        s: Point,
    },
}

impl NonexpansiveMap {
    pub fn average(alpha: f64, inner: NonexpansiveMap) -> Result<Self> {
        let m = NonexpansiveMap::Average {
            alpha,
            inner: Box::new(inner),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn affine_contraction(r: DMatrix<f64>, s: Point) -> Result<Self> {
        let m = NonexpansiveMap::AffineContraction { r, s };
        m.validate()?;
        Ok(m)
    }

    /// `x ↦ p + R(x − p)`, whose only fixed point is `p` when `‖R‖ < 1`.
    pub fn contraction_towards(r: DMatrix<f64>, p: &Point) -> Result<Self> {
        check_dim(r.ncols(), p.dim())?;
        let rp = Point::from_raw(&r * p.as_vector());
        Self::affine_contraction(r, p - &rp)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            NonexpansiveMap::Identity | NonexpansiveMap::Negation => Ok(()),
            NonexpansiveMap::Reflection { set } | NonexpansiveMap::Projection { set } => set.validate(),
            NonexpansiveMap::Average { alpha, inner } => {
                if !(0.0..=1.0).contains(alpha) {
                    return Err(Error::InvalidOperator(format!("averaging weight {alpha} outside [0, 1]")));
                }
                inner.validate()
            }
            NonexpansiveMap::AffineContraction { r, s } => {
                if !r.is_square() {
                    return Err(Error::InvalidOperator("affine contraction needs a square matrix".into()));
                }
                matrix::check_finite(r, "contraction matrix")?;
                check_dim(r.nrows(), s.dim())?;
                let norm = matrix::spectral_norm(r);
                if norm > 1.0 + 1e-12 {
                    return Err(Error::InvalidOperator(format!("‖R‖ = {norm} exceeds 1")));
                }
                Ok(())
            }
        }
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            NonexpansiveMap::Identity | NonexpansiveMap::Negation => None,
            NonexpansiveMap::Reflection { set } | NonexpansiveMap::Projection { set } => set.ambient_dim(),
            NonexpansiveMap::Average { inner, .. } => inner.dim(),
            NonexpansiveMap::AffineContraction { s, .. } => Some(s.dim()),
        }
    }

    pub fn apply(&self, x: &Point) -> Result<Point> {
        match self {
            NonexpansiveMap::Identity => Ok(x.clone()),
            NonexpansiveMap::Negation => Ok(-x),
            NonexpansiveMap::Reflection { set } => Ok(&(&project(set, x)? * 2.0) - x),
            NonexpansiveMap::Average { alpha, inner } => Ok(inner.apply(x)?.combine(*alpha, x, 1.0 - alpha)),
            NonexpansiveMap::Projection { set } => project(set, x),
            NonexpansiveMap::AffineContraction { r, s } => {
                check_dim(s.dim(), x.dim())?;
                Ok(&Point::from_raw(r * x.as_vector()) + s)
            }
        }
    }
}
