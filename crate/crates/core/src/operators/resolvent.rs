use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::matrix::{self, rows};
use crate::geometry::{project, ConvexSet, Point};

/// Maximal monotone operators with closed-form resolvents. The solver never
/// evaluates the (set-valued) operator itself, only `J_λ = (I + λM)⁻¹`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MonotoneOperator {
    /// Normal cone of a closed convex set; the resolvent is the projection.
    NormalCone { set: ConvexSet },
    /// `weight · ∂‖·‖₁`; the resolvent soft-thresholds at `λ·weight`.
    L1 { weight: f64 },
    /// `x ↦ Bx + c` with `B + Bᵀ` positive semidefinite.
    AffineMonotone {
        #[serde(with = "rows")]
        b: DMatrix<f64>,
        c: Point,
    },
    Zero,
}

const PSD_TOL: f64 = 1e-9;
const MAX_CONDITION: f64 = 1e12;

impl MonotoneOperator {
    pub fn validate(&self) -> Result<()> {
        match self {
            MonotoneOperator::NormalCone { set } => set.validate(),
            MonotoneOperator::L1 { weight } => {
                if weight.is_finite() && *weight >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidOperator(format!("L1 weight {weight} must be >= 0")))
                }
            }
            MonotoneOperator::AffineMonotone { b, c } => {
                if !b.is_square() {
                    return Err(Error::InvalidOperator("affine monotone operator needs a square matrix".into()));
                }
                matrix::check_finite(b, "monotone operator matrix")?;
                check_dim(b.nrows(), c.dim())?;
                let min_eig = matrix::symmetric_eigenvalues(b)[0];
                if min_eig < -PSD_TOL * (1.0 + b.amax()) {
                    return Err(Error::InvalidOperator(format!(
                        "B + Bᵀ is not positive semidefinite (smallest eigenvalue of the symmetric part {min_eig:.3e})"
                    )));
                }
                Ok(())
            }
            MonotoneOperator::Zero => Ok(()),
        }
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            MonotoneOperator::NormalCone { set } => set.ambient_dim(),
            MonotoneOperator::AffineMonotone { c, .. } => Some(c.dim()),
            MonotoneOperator::L1 { .. } | MonotoneOperator::Zero => None,
        }
    }
}

/// The resolvent `J^M_λ` of a maximal monotone operator at a fixed `λ > 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ResolventRepr", into = "ResolventRepr")]
pub struct Resolvent {
    operator: MonotoneOperator,
    lambda: f64,
    // (I + λB)⁻¹ for the affine case
    inverse: Option<DMatrix<f64>>,
}

#[derive(Serialize, Deserialize)]
struct ResolventRepr {
    operator: MonotoneOperator,
    lambda: f64,
}

impl TryFrom<ResolventRepr> for Resolvent {
    type Error = Error;
    fn try_from(r: ResolventRepr) -> Result<Self> {
        Resolvent::new(r.operator, r.lambda)
    }
}

impl From<Resolvent> for ResolventRepr {
    fn from(r: Resolvent) -> Self {
        ResolventRepr {
            operator: r.operator,
            lambda: r.lambda,
        }
    }
}

impl Resolvent {
    pub fn new(operator: MonotoneOperator, lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidParameter(format!("resolvent parameter λ = {lambda} must be positive")));
        }
        operator.validate()?;
        let inverse = match &operator {
            MonotoneOperator::AffineMonotone { b, .. } => {
                let system = DMatrix::identity(b.nrows(), b.ncols()) + b * lambda;
                let sv = system.singular_values();
                let condition = sv.max() / sv.min();
                if !condition.is_finite() || condition > MAX_CONDITION {
                    return Err(Error::IllConditioned { condition });
                }
                Some(system.try_inverse().ok_or(Error::IllConditioned {
                    condition: f64::INFINITY,
                })?)
            }
            _ => None,
        };
        Ok(Self {
            operator,
            lambda,
            inverse,
        })
    }

    pub fn zero(lambda: f64) -> Result<Self> {
        Self::new(MonotoneOperator::Zero, lambda)
    }

    pub fn l1(weight: f64, lambda: f64) -> Result<Self> {
        Self::new(MonotoneOperator::L1 { weight }, lambda)
    }

    pub fn normal_cone(set: ConvexSet, lambda: f64) -> Result<Self> {
        Self::new(MonotoneOperator::NormalCone { set }, lambda)
    }

    pub fn affine_monotone(b: DMatrix<f64>, c: Point, lambda: f64) -> Result<Self> {
        Self::new(MonotoneOperator::AffineMonotone { b, c }, lambda)
    }

    pub fn operator(&self) -> &MonotoneOperator {
        &self.operator
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Same operator, different `λ`.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(self.operator.clone(), lambda)
    }

    pub fn dim(&self) -> Option<usize> {
        self.operator.dim()
    }

    pub fn apply(&self, x: &Point) -> Result<Point> {
        if let Some(d) = self.dim() {
            check_dim(d, x.dim())?;
        }
        match &self.operator {
            MonotoneOperator::NormalCone { set } => project(set, x),
            MonotoneOperator::L1 { weight } => {
                let t = self.lambda * weight;
                Ok(x.map(|v| v.signum() * (v.abs() - t).max(0.0)))
            }
            MonotoneOperator::AffineMonotone { c, .. } => {
                let inv = self.inverse.as_ref().expect("inverse cached at construction");
                let rhs = x - &(c * self.lambda);
                Ok(Point::from_raw(inv * rhs.as_vector()))
            }
            MonotoneOperator::Zero => Ok(x.clone()),
        }
    }
}

pub fn resolvent_apply(j: &Resolvent, x: &Point) -> Result<Point> {
    j.apply(x)
}
