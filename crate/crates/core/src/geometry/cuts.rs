//! The two half-spaces cut out at every iteration of the hybrid method.

use super::point::Point;
use super::sets::HalfSpace;
use crate::error::{check_dim, Error, Result};

/// `C_n = {z : ‖y − z‖² ≤ (1 − β)‖x − z‖² + β‖Sx − z‖²}` as a half-space.
///
/// The `‖z‖²` terms cancel since the weights sum to one, leaving
/// `⟨a, z⟩ ≤ b` with `a = 2((1 − β)x + βSx − y)` and
/// `b = (1 − β)‖x‖² + β‖Sx‖² − ‖y‖²`. The offset is evaluated as
/// `⟨d, m + y⟩ + β(1 − β)‖x − Sx‖²` with `m = (1 − β)x + βSx`, `d = m − y`,
/// which is the same number without the cancellation between squared norms.
pub fn build_cn_halfspace(x_n: &Point, s_xn: &Point, y_n: &Point, beta: f64) -> Result<HalfSpace> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidParameter(format!("beta_n = {beta} outside [0, 1]")));
    }
    check_dim(x_n.dim(), s_xn.dim())?;
    check_dim(x_n.dim(), y_n.dim())?;
    let m = x_n.combine(1.0 - beta, s_xn, beta);
    let d = &m - y_n;
    let spread = beta * (1.0 - beta) * x_n.distance(s_xn).powi(2);
    let offset = d.dot(&(&m + y_n)) + spread;
    HalfSpace::new(&d * 2.0, offset)
}

/// `Q_n = {z : ⟨x_n − z, x_0 − x_n⟩ ≥ 0}` as `⟨x_0 − x_n, z⟩ ≤ ⟨x_0 − x_n, x_n⟩`.
/// Degenerates to the whole space when `x_0 = x_n`.
pub fn build_qn_halfspace(x_0: &Point, x_n: &Point) -> Result<HalfSpace> {
    check_dim(x_0.dim(), x_n.dim())?;
    let a = x_0 - x_n;
    let b = a.dot(x_n);
    HalfSpace::new(a, b)
}
