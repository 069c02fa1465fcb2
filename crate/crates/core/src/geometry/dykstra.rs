//! Dykstra's alternating projection with correction terms.
//!
//! Unlike plain alternating projection, the limit is the metric projection
//! of the starting point onto the intersection, not merely some feasible
//! point of it.

use serde::{Deserialize, Serialize};

use super::point::Point;
use super::sets::{project, ConvexSet};
use crate::error::{Error, Result};

/// Correction mass, relative to `1 + ‖x‖ + ‖x − current‖`, that a stall
/// must reach before it is read as an empty intersection. Below it a stall
/// is treated as a plateau: the iterate can sit still for many cycles while
/// the corrections build up before the active set changes.
const EMPTY_MASS_FACTOR: f64 = 100.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DykstraSettings {
    pub max_iter: usize,
    pub tol: f64,
    /// Cycles over which a non-decreasing residual together with large,
    /// growing correction terms is read as an empty intersection.
    pub stall_window: usize,
}

impl Default for DykstraSettings {
    fn default() -> Self {
        Self {
            max_iter: 10_000,
            tol: 1e-10,
            stall_window: 50,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DykstraOutcome {
    pub point: Point,
    pub cycles: usize,
    pub residual: f64,
}

/// Projection of `x` onto `∩ sets`, see [`dykstra`].
pub fn project_intersection(sets: &[ConvexSet], x: &Point, max_iter: usize, tol: f64) -> Result<Point> {
    let settings = DykstraSettings {
        max_iter,
        tol,
        ..DykstraSettings::default()
    };
    dykstra(sets, x, &settings).map(|o| o.point)
}

/// Runs Dykstra cycles over `sets` in order.
///
/// The per-cycle residual is the larger of the iterate change and the
/// change of the correction terms; the run stops once it falls below
/// `tol·(1 + ‖x‖)`. A single set is projected directly.
pub fn dykstra(sets: &[ConvexSet], x: &Point, settings: &DykstraSettings) -> Result<DykstraOutcome> {
    match sets {
        [] => {
            return Ok(DykstraOutcome {
                point: x.clone(),
                cycles: 0,
                residual: 0.0,
            })
        }
        [only] => {
            return Ok(DykstraOutcome {
                point: project(only, x)?,
                cycles: 1,
                residual: 0.0,
            })
        }
        _ => {}
    }

    let mut current = x.clone();
    let mut corrections = vec![Point::zeros(x.dim()); sets.len()];
    let mut residuals: Vec<f64> = Vec::new();
    let mut correction_mass: Vec<f64> = Vec::new();
    let mut residual = f64::INFINITY;

    for cycle in 1..=settings.max_iter {
        let previous = current.clone();
        let mut correction_change = 0.0;
        for (set, corr) in sets.iter().zip(corrections.iter_mut()) {
            let shifted = &current + corr;
            let projected = project(set, &shifted)?;
            let updated = &shifted - &projected;
            correction_change += updated.distance(corr).powi(2);
            *corr = updated;
            current = projected;
        }
        residual = current.distance(&previous).max(correction_change.sqrt());
        if residual <= settings.tol * (1.0 + current.norm()) {
            return Ok(DykstraOutcome {
                point: current,
                cycles: cycle,
                residual,
            });
        }

        residuals.push(residual);
        correction_mass.push(corrections.iter().map(Point::norm).sum());
        let w = settings.stall_window;
        if w > 0 && residuals.len() > w {
            let k = residuals.len() - 1;
            let not_decreasing = residuals[k] >= 0.999 * residuals[k - w];
            let growth = correction_mass[k] - correction_mass[k - w];
            let large = correction_mass[k] >= EMPTY_MASS_FACTOR * (1.0 + x.norm() + x.distance(&current));
            if not_decreasing && growth >= 0.5 * w as f64 * residuals[k] && large {
                return Err(Error::EmptyIntersection { residual });
            }
        }
    }
    Err(Error::DykstraNotConverged {
        iterations: settings.max_iter,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::sets::HalfSpace;

    fn p(c: &[f64]) -> Point {
        Point::from_slice(c).unwrap()
    }

    fn half(a: &[f64], b: f64) -> ConvexSet {
        ConvexSet::HalfSpace(HalfSpace::new(p(a), b).unwrap())
    }

    #[test]
    fn separable_clamps() {
        let sets = [half(&[1.0, 0.0], 1.0), half(&[0.0, 1.0], 1.0)];
        let got = project_intersection(&sets, &p(&[2.0, 2.0]), 10_000, 1e-10).unwrap();
        assert!(got.distance(&p(&[1.0, 1.0])) < 1e-12);
    }

    #[test]
    fn single_set_is_plain_projection() {
        let ball = ConvexSet::ball(p(&[0.0, 0.0]), 1.0).unwrap();
        let x = p(&[3.0, 4.0]);
        assert_eq!(
            project_intersection(std::slice::from_ref(&ball), &x, 10, 1e-10).unwrap(),
            project(&ball, &x).unwrap()
        );
    }

    #[test]
    fn finds_metric_projection_not_just_feasible_point() {
        // plain alternating projection from (2, 2) stops at a non-optimal
        // point of the ball/half-plane intersection
        let sets = [
            ConvexSet::ball(p(&[0.0, 0.0]), 1.0).unwrap(),
            half(&[1.0, 1.0], 0.5),
        ];
        let x = p(&[2.0, -0.5]);
        let got = project_intersection(&sets, &x, 10_000, 1e-12).unwrap();
        // characterization: ⟨x − Px, z − Px⟩ ≤ 0 on sampled feasible z
        for i in 0..64 {
            let t = i as f64 * std::f64::consts::TAU / 64.0;
            for r in [0.2, 0.6, 0.99] {
                let z = p(&[r * t.cos(), r * t.sin()]);
                if sets.iter().all(|s| s.contains(&z, 0.0)) {
                    assert!((&x - &got).dot(&(&z - &got)) <= 1e-8);
                }
            }
        }
    }

    #[test]
    fn empty_intersection_reported() {
        let sets = [
            ConvexSet::ball(p(&[0.0, 0.0]), 1.0).unwrap(),
            ConvexSet::ball(p(&[3.0, 0.0]), 1.0).unwrap(),
        ];
        let err = project_intersection(&sets, &p(&[1.5, 2.0]), 10_000, 1e-10).unwrap_err();
        assert!(matches!(err, Error::EmptyIntersection { .. }), "{err:?}");
    }

    #[test]
    fn plateau_is_not_mistaken_for_emptiness() {
        // the iterate stays put for about 100 cycles before the active set changes
        let sets = [
            ConvexSet::cube(3, -1.0, 1.0).unwrap(),
            half(&[-0.5311714420756004, 0.6176508076140157, -0.4460069576391447], 0.5042421406686819),
        ];
        let x = p(&[1.9380779366347, 2.9357235815750298, -2.9031548655456128]);
        let got = project_intersection(&sets, &x, 10_000, 1e-10).unwrap();
        assert!(sets.iter().all(|s| s.contains(&got, 1e-9)));
        assert!((got.coords()[1] - 0.9542716).abs() < 1e-6);
    }

    #[test]
    fn budget_exhaustion_reported() {
        let sets = [
            ConvexSet::ball(p(&[0.0, 0.0]), 1.0).unwrap(),
            half(&[1.0, 1.0], 0.5),
        ];
        let err = project_intersection(&sets, &p(&[2.0, -0.5]), 1, 1e-14).unwrap_err();
        assert!(matches!(err, Error::DykstraNotConverged { iterations: 1, .. }));
    }
}
