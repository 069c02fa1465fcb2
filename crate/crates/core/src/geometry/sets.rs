use serde::{Deserialize, Serialize};

use super::dykstra::{project_intersection, DykstraSettings};
use super::point::Point;
use crate::error::{check_dim, Error, Result};

/// `{z : ⟨a, z⟩ ≤ b}`. A zero normal with `b ≥ 0` is the whole space and is
/// flagged as degenerate; a zero normal with `b < 0` is rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HalfSpaceRepr", into = "HalfSpaceRepr")]
pub struct HalfSpace {
    normal: Point,
    offset: f64,
    degenerate: bool,
}

#[derive(Serialize, Deserialize)]
struct HalfSpaceRepr {
    normal: Point,
    offset: f64,
}

impl TryFrom<HalfSpaceRepr> for HalfSpace {
    type Error = Error;
    fn try_from(r: HalfSpaceRepr) -> Result<Self> {
        HalfSpace::new(r.normal, r.offset)
    }
}

impl From<HalfSpace> for HalfSpaceRepr {
    fn from(h: HalfSpace) -> Self {
        HalfSpaceRepr {
            normal: h.normal,
            offset: h.offset,
        }
    }
}

impl HalfSpace {
    pub fn new(normal: Point, offset: f64) -> Result<Self> {
        if !offset.is_finite() {
            return Err(Error::NonFinite("half-space offset"));
        }
        let degenerate = normal.norm_squared() == 0.0;
        if degenerate && offset < 0.0 {
            return Err(Error::EmptySet(format!(
                "zero normal with negative offset {offset}"
            )));
        }
        Ok(Self {
            normal,
            offset,
            degenerate,
        })
    }

    pub fn normal(&self) -> &Point {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn dim(&self) -> usize {
        self.normal.dim()
    }

    /// `⟨a, z⟩ − b`; nonpositive inside.
    pub fn violation(&self, z: &Point) -> f64 {
        self.normal.dot(z) - self.offset
    }

    /// Signed Euclidean distance to the boundary, `−∞` for the whole space.
    pub fn signed_distance(&self, z: &Point) -> f64 {
        if self.degenerate {
            return f64::NEG_INFINITY;
        }
        self.violation(z) / self.normal.norm()
    }

    pub fn contains(&self, z: &Point, tol: f64) -> bool {
        self.signed_distance(z) <= tol
    }

    pub fn project(&self, x: &Point) -> Point {
        if self.degenerate {
            return x.clone();
        }
        let v = self.violation(x);
        if v <= 0.0 {
            return x.clone();
        }
        x - &(&self.normal * (v / self.normal.norm_squared()))
    }
}

/// The closed convex sets the solver knows how to project onto.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConvexSet {
    WholeSpace,
    Box { lower: Point, upper: Point },
    Ball { center: Point, radius: f64 },
    HalfSpace(HalfSpace),
    Intersection(Vec<ConvexSet>),
}

impl ConvexSet {
    pub fn boxed(lower: Point, upper: Point) -> Result<Self> {
        let set = ConvexSet::Box { lower, upper };
        set.validate()?;
        Ok(set)
    }

    /// `[lo, hi]^dim`
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::boxed(Point::new(vec![lo; dim])?, Point::new(vec![hi; dim])?)
    }

    pub fn ball(center: Point, radius: f64) -> Result<Self> {
        let set = ConvexSet::Ball { center, radius };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ConvexSet::WholeSpace | ConvexSet::HalfSpace(_) => Ok(()),
            ConvexSet::Box { lower, upper } => {
                check_dim(lower.dim(), upper.dim())?;
                if lower.coords().iter().zip(upper.coords()).any(|(l, u)| l > u) {
                    return Err(Error::EmptySet("box with lower > upper".into()));
                }
                Ok(())
            }
            ConvexSet::Ball { radius, .. } => {
                if radius.is_finite() && *radius >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!("ball radius {radius}")))
                }
            }
            ConvexSet::Intersection(sets) => {
                let mut dim = None;
                for s in sets {
                    s.validate()?;
                    match (dim, s.ambient_dim()) {
                        (Some(d), Some(e)) => check_dim(d, e)?,
                        (None, e) => dim = e,
                        _ => {}
                    }
                }
                Ok(())
            }
        }
    }

    /// Ambient dimension, if the set pins one down.
    pub fn ambient_dim(&self) -> Option<usize> {
        match self {
            ConvexSet::WholeSpace => None,
            ConvexSet::Box { lower, .. } => Some(lower.dim()),
            ConvexSet::Ball { center, .. } => Some(center.dim()),
            ConvexSet::HalfSpace(h) => Some(h.dim()),
            ConvexSet::Intersection(sets) => sets.iter().find_map(ConvexSet::ambient_dim),
        }
    }

    /// Signed violation in distance units: `≤ 0` means the point is in the
    /// set. Intersections report the worst member.
    pub fn violation(&self, x: &Point) -> f64 {
        match self {
            ConvexSet::WholeSpace => f64::NEG_INFINITY,
            ConvexSet::Box { lower, upper } => x
                .coords()
                .iter()
                .zip(lower.coords().iter().zip(upper.coords()))
                .map(|(v, (l, u))| (l - v).max(v - u))
                .fold(f64::NEG_INFINITY, f64::max),
            ConvexSet::Ball { center, radius } => x.distance(center) - radius,
            ConvexSet::HalfSpace(h) => h.signed_distance(x),
            ConvexSet::Intersection(sets) => sets
                .iter()
                .map(|s| s.violation(x))
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    pub fn contains(&self, x: &Point, tol: f64) -> bool {
        self.violation(x) <= tol
    }
}

/// Metric projection onto `set`.
///
/// Closed forms for the primitive sets. An intersection of at most two
/// half-spaces is projected exactly through its KKT system; any other
/// intersection goes through Dykstra with default settings.
pub fn project(set: &ConvexSet, x: &Point) -> Result<Point> {
    if let Some(d) = set.ambient_dim() {
        check_dim(d, x.dim())?;
    }
    match set {
        ConvexSet::WholeSpace => Ok(x.clone()),
        ConvexSet::Box { lower, upper } => {
            let coords = x
                .coords()
                .iter()
                .zip(lower.coords().iter().zip(upper.coords()))
                .map(|(v, (l, u))| v.clamp(*l, *u))
                .collect();
            Point::new(coords)
        }
        ConvexSet::Ball { center, radius } => {
            let offset = x - center;
            let dist = offset.norm();
            if dist <= *radius {
                Ok(x.clone())
            } else {
                Ok(center + &(offset * (radius / dist)))
            }
        }
        ConvexSet::HalfSpace(h) => Ok(h.project(x)),
        ConvexSet::Intersection(sets) => match sets.as_slice() {
            [] => Ok(x.clone()),
            [only] => project(only, x),
            [ConvexSet::HalfSpace(h1), ConvexSet::HalfSpace(h2)] => project_halfspace_pair(h1, h2, x),
            _ => {
                let s = DykstraSettings::default();
                project_intersection(sets, x, s.max_iter, s.tol)
            }
        },
    }
}

/// Exact projection onto `H1 ∩ H2` by active-set enumeration.
pub fn project_halfspace_pair(h1: &HalfSpace, h2: &HalfSpace, x: &Point) -> Result<Point> {
    check_dim(h1.dim(), x.dim())?;
    check_dim(h2.dim(), x.dim())?;
    let feas_tol = |z: &Point| 1e-12 * (1.0 + z.norm());
    let in_both = |z: &Point| h1.contains(z, feas_tol(z)) && h2.contains(z, feas_tol(z));

    if in_both(x) {
        return Ok(x.clone());
    }
    // one active constraint: projecting onto the violated half-space and
    // landing inside the other is already optimal
    for (h, other) in [(h1, h2), (h2, h1)] {
        if h.violation(x) > 0.0 {
            let y = h.project(x);
            if other.contains(&y, feas_tol(&y)) {
                return Ok(y);
            }
        }
    }
    if h1.is_degenerate() || h2.is_degenerate() {
        // a single non-degenerate constraint is always handled above
        return Err(Error::EmptyIntersection { residual: 0.0 });
    }
    // both active, in the orthonormal basis e1 ∝ a1, e2 ∝ a2 − ⟨a2, e1⟩e1:
    // z = x − αe1 − βe2 with ⟨a1, z⟩ = b1 and ⟨a2, z⟩ = b2. Solving in this
    // basis keeps both boundary residuals at rounding level even when the
    // normals are nearly parallel.
    let (n1, n2) = (h1.normal().norm(), h2.normal().norm());
    let e1 = h1.normal() * (1.0 / n1);
    let c = h2.normal().dot(&e1);
    let v = h2.normal() - &(&e1 * c);
    let s = v.norm();
    if s <= PARALLEL_TOL * n2 {
        let gap = -(h1.offset() / n1 + h2.offset() / n2);
        return Err(Error::EmptyIntersection { residual: gap.abs() });
    }
    let e2 = v * (1.0 / s);
    let b1 = h1.offset() / n1;
    let alpha = e1.dot(x) - b1;
    let beta = e2.dot(x) - (h2.offset() - c * b1) / s;
    let mu2 = beta / s;
    let mu1 = (alpha - c * mu2) / n1;
    if mu2 <= 0.0 {
        return Ok(h1.project(x));
    }
    if mu1 <= 0.0 {
        return Ok(h2.project(x));
    }
    Ok(&(x - &(&e1 * alpha)) - &(&e2 * beta))
}

/// Sine of the angle below which two normals count as parallel.
const PARALLEL_TOL: f64 = 1e-12;
