use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::{ConvexSet, LinearMap};
use crate::operators::{IsmMap, NonexpansiveMap, Resolvent};

/// One split monotone variational inclusion instance:
/// `C ⊆ H1`, `Q ⊆ H2`, `A : H1 → H2`, `M1, M2` (through their resolvents),
/// the inverse strongly monotone `f, g`, the nonexpansive `S` and the
/// family `T_1, …, T_N`.
///
/// `dim H1` and `dim H2` are read off `A`; the moduli `θ1, θ2` live in
/// `f` and `g`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub c: ConvexSet,
    pub q: ConvexSet,
    pub a: LinearMap,
    pub m1: Resolvent,
    pub m2: Resolvent,
    pub f: IsmMap,
    pub g: IsmMap,
    pub s: NonexpansiveMap,
    pub family: Vec<NonexpansiveMap>,
}

impl ProblemSpec {
    pub fn dim1(&self) -> usize {
        self.a.domain_dim()
    }

    pub fn dim2(&self) -> usize {
        self.a.codomain_dim()
    }

    pub fn theta1(&self) -> f64 {
        self.f.theta()
    }

    pub fn theta2(&self) -> f64 {
        self.g.theta()
    }

    /// `α = 2·min(θ1, θ2)`, the upper end of the admissible `λ` interval.
    pub fn lambda_limit(&self) -> f64 {
        2.0 * self.theta1().min(self.theta2())
    }

    /// Structural checks: every operator valid and all dimensions agree.
    pub fn validate(&self) -> Result<()> {
        let (d1, d2) = (self.dim1(), self.dim2());
        let in_h1 = |d: Option<usize>| d.map_or(Ok(()), |d| check_dim(d1, d));
        let in_h2 = |d: Option<usize>| d.map_or(Ok(()), |d| check_dim(d2, d));

        self.c.validate()?;
        self.q.validate()?;
        in_h1(self.c.ambient_dim())?;
        in_h2(self.q.ambient_dim())?;
        in_h1(self.m1.dim())?;
        in_h2(self.m2.dim())?;
        self.f.validate()?;
        self.g.validate()?;
        in_h1(self.f.dim())?;
        in_h2(self.g.dim())?;
        self.s.validate()?;
        in_h1(self.s.dim())?;
        for t in &self.family {
            t.validate()?;
            in_h1(t.dim())?;
        }
        Ok(())
    }

    /// Rebinds both resolvents to a new `λ`.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Ok(Self {
            m1: self.m1.with_lambda(lambda)?,
            m2: self.m2.with_lambda(lambda)?,
            ..self.clone()
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ProblemSpec = serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialization(e.to_string()))
    }
}
