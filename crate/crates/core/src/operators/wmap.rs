use crate::error::{Error, Result};
use crate::geometry::Point;

use super::NonexpansiveMap;

/// W-mapping generated by `T_1, …, T_N` and weights `λ_1, …, λ_N ∈ [0, 1]`:
///
/// ```text
/// U_{N+1} = I
/// U_k     = λ_k T_k U_{k+1} + (1 − λ_k) I      k = N, …, 1
/// W       = U_1
/// ```
#[derive(Clone, Debug, PartialEq)]
pub struct WMapping {
    family: Vec<NonexpansiveMap>,
    lambdas: Vec<f64>,
}

impl WMapping {
    pub fn new(family: Vec<NonexpansiveMap>, lambdas: Vec<f64>) -> Result<Self> {
        check_weights(family.len(), &lambdas)?;
        Ok(Self { family, lambdas })
    }

    pub fn family(&self) -> &[NonexpansiveMap] {
        &self.family
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn apply(&self, x: &Point) -> Result<Point> {
        apply_w_mapping(&self.family, &self.lambdas, x)
    }
}

pub fn w_mapping_apply(w: &WMapping, x: &Point) -> Result<Point> {
    w.apply(x)
}

fn check_weights(n: usize, lambdas: &[f64]) -> Result<()> {
    if lambdas.len() != n {
        return Err(Error::InvalidParameter(format!(
            "W-mapping has {n} maps but {} weights",
            lambdas.len()
        )));
    }
    if let Some(bad) = lambdas.iter().find(|l| !(0.0..=1.0).contains(*l)) {
        return Err(Error::InvalidParameter(format!("W-mapping weight {bad} outside [0, 1]")));
    }
    Ok(())
}

/// Borrowing form of [`WMapping::apply`] used by the solver, which rebuilds
/// the weights every iteration. An empty family is the identity.
pub fn apply_w_mapping(family: &[NonexpansiveMap], lambdas: &[f64], x: &Point) -> Result<Point> {
    check_weights(family.len(), lambdas)?;
    let mut v = x.clone();
    for (t, &l) in family.iter().zip(lambdas).rev() {
        v = t.apply(&v)?.combine(l, x, 1.0 - l);
    }
    Ok(v)
}
