//! Exact distance geometry of planar convex domains.

mod domain;
mod pointset;
mod skeleton;

pub use domain::{BBox, ConvexDomain, DomainKind};
pub use pointset::{closest_on_segment, hausdorff, point_segment_distance, sample_segment, PointSet, PointSetKind};
pub use skeleton::convex_polygon_skeleton;

use crate::{Report, Scalar};

/// Shape class of a domain whose cut locus is its high ridge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StadiumClass {
    Disc,
    SegmentParallelSet,
    NotStadium,
}

impl StadiumClass {
    pub fn tag(self) -> &'static str {
        match self {
            StadiumClass::Disc => "disc",
            StadiumClass::SegmentParallelSet => "segment-parallel-set",
            StadiumClass::NotStadium => "not-stadium",
        }
    }
}

/// Hausdorff distance between the cut locus and the high ridge, both sampled at `resolution`.
pub fn cut_high_hausdorff<T: Scalar>(dom: &ConvexDomain<T>, resolution: T) -> T {
    let cut = dom.cut_locus(resolution).expect("positive resolution");
    let high = dom.high_ridge(resolution * T::lit(1e-3));
    hausdorff(&cut.samples(resolution), &high.samples(resolution))
}

/// Classifies `dom` by comparing its cut locus and high ridge within `tol`.
///
/// The report carries the Hausdorff distance and a `tag=` note with the class.
pub fn is_stadium_like<T: Scalar>(dom: &ConvexDomain<T>, tol: T) -> (Report, StadiumClass) {
    let res = (tol / T::lit(4.0)).min(dom.max_distance() / T::lit(64.0));
    let dist = cut_high_hausdorff(dom, res);
    let mut rep = Report::new("is_stadium_like");
    rep.check("hausdorff_cut_high", dist.to_f64_lossy(), tol.to_f64_lossy());
    let class = if !rep.pass {
        StadiumClass::NotStadium
    } else if dom.high_ridge(res).len() == 1 {
        StadiumClass::Disc
    } else {
        StadiumClass::SegmentParallelSet
    };
    rep.note(format!("tag={}", class.tag()));
    (rep, class)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Point2;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn p(x: f64, y: f64) -> Point2<f64> {
        Point2::new(x, y)
    }

    fn square() -> ConvexDomain<f64> {
        ConvexDomain::square(0.0, 0.0, 1.0).unwrap()
    }

    fn stadium() -> ConvexDomain<f64> {
        ConvexDomain::stadium(p(-1., 0.), p(1., 0.), 0.5).unwrap()
    }

    #[test]
    fn distance_examples() {
        assert_eq!(ConvexDomain::<f64>::unit_disc().distance(p(0., 0.)).unwrap(), 1.0);
        assert_relative_eq!(square().distance(p(0.5, 0.5)).unwrap(), 0.5, epsilon = 1e-15);
        assert_relative_eq!(stadium().distance(p(0.3, 0.)).unwrap(), 0.5, epsilon = 1e-15);
        let err = square().distance(p(2., 0.)).unwrap_err();
        assert!(err.to_string().contains("outside domain"));
    }

    #[test]
    fn invalid_domains_rejected() {
        assert!(ConvexDomain::disc(p(0., 0.), 0.0).is_err());
        assert!(ConvexDomain::polygon(vec![p(0., 0.), p(0., 1.), p(1., 1.), p(1., 0.)]).is_err());
        assert!(ConvexDomain::polygon(vec![p(0., 0.), p(1., 0.), p(2., 0.), p(1., 1.)]).is_err());
        assert!(ConvexDomain::stadium(p(0., 0.), p(1., 0.), -1.0).is_err());
    }

    #[test]
    fn projection_examples() {
        let sq = square();
        let one = sq.projection_set(p(0.25, 0.5), 1e-9).unwrap();
        assert_eq!(one.points, vec![p(0.0, 0.5)]);
        let four = sq.projection_set(p(0.5, 0.5), 1e-9).unwrap();
        assert_eq!(four.len(), 4);
        for m in [p(0.5, 0.), p(1., 0.5), p(0.5, 1.), p(0., 0.5)] {
            assert!(four.points.iter().any(|q| q.dist(m) < 1e-12));
        }
        let disc = ConvexDomain::<f64>::unit_disc();
        assert_eq!(disc.projection_set(p(0.5, 0.), 1e-9).unwrap().points, vec![p(1., 0.)]);
        let c = disc.projection_set(p(0., 0.), 1e-9).unwrap();
        assert_eq!(c.kind, PointSetKind::Polyline);
        assert_eq!(c.len(), 64);
        assert!(sq.projection_set(p(0., 0.5), 1e-9).is_err());
    }

    #[test]
    fn high_ridge_examples() {
        assert_eq!(ConvexDomain::<f64>::unit_disc().high_ridge(1e-9).points, vec![p(0., 0.)]);
        let h = square().high_ridge(1e-9);
        assert_eq!(h.len(), 1);
        assert!(h.points[0].dist(p(0.5, 0.5)) < 1e-12);
        let s = stadium().high_ridge(1e-9);
        assert_eq!(s.kind, PointSetKind::Segment);
        let rect = ConvexDomain::rectangle(0.0, 0.0, 3.0, 1.0).unwrap().high_ridge(1e-9);
        assert_eq!(rect.kind, PointSetKind::Segment);
        assert!(rect.points.iter().any(|q| q.dist(p(0.5, 0.5)) < 1e-9));
        assert!(rect.points.iter().any(|q| q.dist(p(2.5, 0.5)) < 1e-9));
    }

    #[test]
    fn lambda_examples() {
        assert_eq!(ConvexDomain::<f64>::unit_disc().lambda_infinity(), 1.0);
        assert_relative_eq!(square().lambda_infinity(), 2.0, epsilon = 1e-12);
        assert_eq!(stadium().lambda_infinity(), 2.0);
    }

    #[test]
    fn cut_locus_examples() {
        assert_eq!(ConvexDomain::<f64>::unit_disc().cut_locus(0.01).unwrap().points, vec![p(0., 0.)]);
        assert!(square().cut_locus(0.0).is_err());
        let c = square().cut_locus(0.01).unwrap();
        for q in &c.points {
            assert!((q.x - q.y).abs() < 1e-9 || (q.x + q.y - 1.0).abs() < 1e-9);
        }
        assert!(hausdorff(&c.points, &[p(0., 0.), p(1., 1.), p(0.5, 0.5), p(1., 0.), p(0., 1.)]) < 0.71);
    }

    /// Grid oracle: points with two or more nearest boundary points.
    fn oracle_cut(dom: &ConvexDomain<f64>, n: usize) -> Vec<Point2<f64>> {
        let b = dom.bounding_box();
        let h = b.width().max(b.height()) / n as f64;
        let mut out = Vec::new();
        for i in 0..=n {
            for j in 0..=n {
                let x = p(b.min.x + i as f64 * h, b.min.y + j as f64 * h);
                if !dom.contains_strictly(x) {
                    continue;
                }
                // Depth gaps change by at most 2h per grid step.
                let proj = dom.projection_set(x, 1.01 * h).unwrap();
                let spread = proj.points.iter().flat_map(|a| proj.points.iter().map(move |c| a.dist(*c))).fold(0.0, f64::max);
                if spread > 2.0 * h {
                    out.push(x);
                }
            }
        }
        out
    }

    #[test]
    fn cut_locus_matches_grid_oracle() {
        let n = 160;
        for dom in [square(), stadium(), ConvexDomain::polygon(vec![p(0., 0.), p(3., 0.), p(2., 2.), p(0., 1.5)]).unwrap()] {
            let b = dom.bounding_box();
            let h = b.width().max(b.height()) / n as f64;
            let exact = dom.cut_locus(h / 2.0).unwrap().samples(h / 2.0);
            let oracle = oracle_cut(&dom, n);
            // The oracle misses the last cells near the boundary endpoints of the axis.
            let d_or = oracle.iter().map(|q| exact.iter().map(|e| e.dist(*q)).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max);
            assert!(d_or < 2.0 * h, "{} oracle point off the axis by {d_or}", dom.kind_name());
            let interior: Vec<_> = exact.iter().copied().filter(|e| dom.distance(*e).unwrap() > 4.0 * h).collect();
            let d_ex = interior.iter().map(|e| oracle.iter().map(|q| q.dist(*e)).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max);
            assert!(d_ex < 2.0 * h, "{} axis point missed by oracle by {d_ex}", dom.kind_name());
        }
    }

    #[test]
    fn stadium_classification() {
        let (r, c) = is_stadium_like(&ConvexDomain::<f64>::unit_disc(), 0.02);
        assert!(r.pass);
        assert_eq!(c, StadiumClass::Disc);
        let (r, c) = is_stadium_like(&stadium(), 0.02);
        assert!(r.pass);
        assert_eq!(c, StadiumClass::SegmentParallelSet);
        assert!(r.notes.contains("tag=segment-parallel-set"));
        let (r, c) = is_stadium_like(&square(), 0.02);
        assert!(!r.pass);
        assert_eq!(c, StadiumClass::NotStadium);
        // Corner to centre.
        assert_relative_eq!(r.value("hausdorff_cut_high").unwrap(), 0.5f64.sqrt(), max_relative = 1e-6);
    }

    #[test]
    fn parallel_set_geometry() {
        let tri = vec![p(0., 0.), p(2., 0.), p(0., 2.)];
        let dom = ConvexDomain::parallel_set(tri, 0.5).unwrap();
        // Outside the triangle: d = r - dist to triangle.
        assert_relative_eq!(dom.distance(p(-0.25, 1.0)).unwrap(), 0.25, epsilon = 1e-12);
        // Inside: r + depth.
        assert_relative_eq!(dom.distance(p(0.5, 0.5)).unwrap(), 1.0, epsilon = 1e-12);
        let inr = 2.0 / (2.0 + 2f64.sqrt());
        assert_relative_eq!(dom.max_distance(), 0.5 + inr, epsilon = 1e-12);
        let per = 4.0 + 8f64.sqrt() + std::f64::consts::TAU * 0.5;
        assert_relative_eq!(dom.perimeter(), per, epsilon = 1e-12);
        for (b, n) in dom.boundary_samples(50) {
            assert!(dom.distance(b).unwrap() < 1e-9);
            assert_relative_eq!(dom.distance(b + n.scale(0.1)).unwrap(), 0.1, epsilon = 1e-9);
        }
    }

    #[test]
    fn boundary_samples_on_every_kind() {
        for dom in [square(), stadium(), ConvexDomain::unit_disc()] {
            let s = dom.boundary_samples(40);
            assert_eq!(s.len(), 40);
            for (b, n) in s {
                assert!(dom.distance(b).unwrap() < 1e-9);
                assert_relative_eq!(n.norm(), 1.0, epsilon = 1e-12);
                assert_relative_eq!(dom.distance(b + n.scale(0.05)).unwrap(), 0.05, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn scaling() {
        let s2 = square().scaled(2.0);
        assert_relative_eq!(s2.max_distance(), 1.0, epsilon = 1e-12);
        let st = stadium().scaled(2.0);
        assert_eq!(st.kind(), &DomainKind::Stadium { a: p(-2., 0.), b: p(2., 0.), radius: 1.0 });
    }

    fn domains() -> Vec<ConvexDomain<f64>> {
        vec![
            ConvexDomain::unit_disc(),
            square(),
            stadium(),
            ConvexDomain::polygon(vec![p(0., 0.), p(3., 0.), p(2., 2.), p(0., 1.5)]).unwrap(),
            ConvexDomain::parallel_set(vec![p(0., 0.), p(2., 0.), p(0., 2.)], 0.3).unwrap(),
        ]
    }

    fn point_in(dom: &ConvexDomain<f64>, u: f64, v: f64) -> Option<Point2<f64>> {
        let b = dom.bounding_box();
        let x = p(b.min.x + u * b.width(), b.min.y + v * b.height());
        dom.contains(x).then_some(x)
    }

    proptest! {
        #[test]
        fn distance_is_one_lipschitz(k in 0usize..5, a in 0.0..1.0f64, b in 0.0..1.0f64, c in 0.0..1.0f64, d in 0.0..1.0f64) {
            let dom = &domains()[k];
            if let (Some(x), Some(y)) = (point_in(dom, a, b), point_in(dom, c, d)) {
                let dx = dom.distance(x).unwrap();
                let dy = dom.distance(y).unwrap();
                prop_assert!((dx - dy).abs() <= x.dist(y) + 1e-12);
            }
        }

        #[test]
        fn distance_is_concave(k in 0usize..5, a in 0.0..1.0f64, b in 0.0..1.0f64, c in 0.0..1.0f64, d in 0.0..1.0f64) {
            let dom = &domains()[k];
            if let (Some(x), Some(y)) = (point_in(dom, a, b), point_in(dom, c, d)) {
                let m = x.midpoint(y);
                let lhs = dom.distance(m).unwrap();
                prop_assert!(lhs >= 0.5 * (dom.distance(x).unwrap() + dom.distance(y).unwrap()) - 1e-12);
            }
        }

        #[test]
        fn projections_realise_distance(k in 0usize..5, a in 0.0..1.0f64, b in 0.0..1.0f64) {
            let dom = &domains()[k];
            if let Some(x) = point_in(dom, a, b) {
                if dom.distance(x).unwrap() > 1e-6 {
                    let d = dom.distance(x).unwrap();
                    let pr = dom.projection_set(x, 1e-9).unwrap();
                    prop_assert!(!pr.is_empty());
                    for q in &pr.points {
                        prop_assert!((q.dist(x) - d).abs() < 1e-9);
                        prop_assert!(dom.distance(*q).unwrap() < 1e-9);
                    }
                }
            }
        }

        #[test]
        fn singleton_projection_off_the_axis(k in 1usize..5, a in 0.0..1.0f64, b in 0.0..1.0f64) {
            let dom = &domains()[k];
            if let Some(x) = point_in(dom, a, b) {
                let axis = dom.cut_locus(1e-3).unwrap();
                let gap = axis.samples(1e-3).iter().map(|q| q.dist(x)).fold(f64::INFINITY, f64::min);
                if gap > 1e-2 && dom.distance(x).unwrap() > 1e-6 {
                    prop_assert_eq!(dom.projection_set(x, 1e-9).unwrap().len(), 1);
                }
            }
        }
    }

    #[test]
    fn high_ridge_inside_cut_locus_and_lambda_identity() {
        for dom in domains() {
            let cut = dom.cut_locus(1e-3).unwrap().samples(1e-3);
            for q in dom.high_ridge(1e-9).samples(1e-2) {
                let gap = cut.iter().map(|c| c.dist(q)).fold(f64::INFINITY, f64::min);
                assert!(gap < 2e-3, "{}: ridge point {q:?} off the cut locus by {gap}", dom.kind_name());
            }
            assert_relative_eq!(dom.lambda_infinity() * dom.max_distance(), 1.0, epsilon = 4.0 * f64::EPSILON);
        }
    }
}
