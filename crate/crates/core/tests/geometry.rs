use proptest::prelude::*;
use splitvi::geometry::{
    build_cn_halfspace, build_qn_halfspace, dykstra, project, ConvexSet, DykstraSettings, HalfSpace, Point,
};

const DIM: usize = 3;

fn point(scale: f64) -> impl Strategy<Value = Point> {
    prop::collection::vec(-scale..scale, DIM).prop_map(|v| Point::new(v).unwrap())
}

fn halfspace() -> impl Strategy<Value = HalfSpace> {
    (point(1.0), 0.1..2.0f64)
        .prop_filter("normal too short", |(a, _)| a.norm() > 1e-3)
        .prop_map(|(a, b)| HalfSpace::new(a, b).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 300, ..ProptestConfig::default() })]

    /// `⟨x − P x, c − P x⟩ ≤ 0` for every `c` in the set, checked at sampled `c`.
    #[test]
    fn dykstra_satisfies_the_projection_inequality(
        h1 in halfspace(),
        h2 in halfspace(),
        x in point(5.0),
        samples in prop::collection::vec(point(1.0), 20),
    ) {
        // the origin lies in every set, so the intersection is nonempty
        let sets = vec![
            ConvexSet::cube(DIM, -1.0, 1.0).unwrap(),
            ConvexSet::Intersection(vec![ConvexSet::HalfSpace(h1), ConvexSet::HalfSpace(h2)]),
        ];
        let out = dykstra(&sets, &x, &DykstraSettings::default()).unwrap();
        let px = &out.point;
        for s in &sets {
            prop_assert!(s.contains(px, 1e-8));
        }
        let all = ConvexSet::Intersection(sets);
        for c in samples.iter().filter(|c| all.contains(c, 0.0)) {
            prop_assert!((&x - px).dot(&(c - px)) <= 1e-7 * (1.0 + x.norm()));
        }
    }

    #[test]
    fn projection_is_idempotent(x in point(5.0), h in halfspace()) {
        for set in [
            ConvexSet::cube(DIM, -1.0, 1.0).unwrap(),
            ConvexSet::ball(Point::zeros(DIM), 1.0).unwrap(),
            ConvexSet::HalfSpace(h),
        ] {
            let p = project(&set, &x).unwrap();
            prop_assert!(project(&set, &p).unwrap().distance(&p) <= 1e-12 * (1.0 + p.norm()));
        }
    }

    /// `C_n` is the set of `z` with
    /// `‖y − z‖² ≤ (1 − β)‖x − z‖² + β‖Sx − z‖²`.
    #[test]
    fn cn_matches_its_quadratic_form(
        x in point(2.0),
        sx in point(2.0),
        y in point(2.0),
        z in point(4.0),
        beta in 0.0..=1.0f64,
    ) {
        let h = build_cn_halfspace(&x, &sx, &y, beta).unwrap();
        let quad = y.distance(&z).powi(2) - (1.0 - beta) * x.distance(&z).powi(2) - beta * sx.distance(&z).powi(2);
        prop_assert!((h.violation(&z) - quad).abs() <= 1e-9 * (1.0 + z.norm_squared() + x.norm_squared()));
    }

    #[test]
    fn qn_keeps_x_n_on_its_boundary(x0 in point(2.0), xn in point(2.0), z in point(4.0)) {
        let h = build_qn_halfspace(&x0, &xn).unwrap();
        prop_assert!(h.violation(&xn).abs() <= 1e-12 * (1.0 + xn.norm_squared() + x0.norm_squared()));
        let expect = (&x0 - &xn).dot(&(&z - &xn));
        prop_assert!((h.violation(&z) - expect).abs() <= 1e-12 * (1.0 + z.norm_squared() + x0.norm_squared()));
    }
}
