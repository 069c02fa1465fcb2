//! Resolvents, inverse strongly monotone maps, nonexpansive maps, the
//! forward–backward operators `U`, `V` and the W-mapping.

pub mod ism;
pub mod nonexpansive;
pub mod resolvent;
pub mod wmap;

pub use ism::{ism_apply, IsmMap};
pub use nonexpansive::NonexpansiveMap;
pub use resolvent::{resolvent_apply, MonotoneOperator, Resolvent};
pub use wmap::{apply_w_mapping, w_mapping_apply, WMapping};

use crate::error::{Error, Result};
use crate::geometry::Point;

/// `J(x − λ f(x))`, i.e. `U = J^{M1}_λ(I − λf)` or `V = J^{M2}_λ(I − λg)`.
///
/// `λ` must be the parameter baked into `J` and lie in `(0, 2θ)`, which
/// makes the composition nonexpansive.
pub fn forward_backward_apply(j: &Resolvent, f: &IsmMap, lambda: f64, x: &Point) -> Result<Point> {
    if lambda != j.lambda() {
        return Err(Error::InvalidParameter(format!(
            "forward step λ = {lambda} differs from resolvent λ = {}",
            j.lambda()
        )));
    }
    let upper = 2.0 * f.theta();
    if !(lambda > 0.0 && lambda < upper) {
        return Err(Error::InadmissibleStep { lambda, upper });
    }
    let forward = x - &(&f.apply(x)? * lambda);
    j.apply(&forward)
}
