use super::*;
use crate::field::rasterize;
use crate::geometry::ConvexDomain;
use proptest::prelude::{prop_assert, proptest, ProptestConfig};

fn brute<T: Scalar>(u: &ScalarField<T>, eps: T) -> Vec<T> {
    let g = &*u.grid;
    (0..g.len())
        .map(|a| {
            let x = g.node_point(a);
            (0..g.len()).map(|b| u.values[b] - g.node_point(b).dist(x).powi(2) / (T::lit(2.0) * eps)).fold(T::neg_infinity(), T::max)
        })
        .collect()
}

fn brute_argmax(u: &ScalarField<f64>, x: Point2<f64>, eps: f64) -> Point2<f64> {
    let g = &*u.grid;
    let k = (0..g.len())
        .max_by(|&a, &b| {
            let va = u.values[a] - g.node_point(a).dist(x).powi(2) / (2.0 * eps);
            let vb = u.values[b] - g.node_point(b).dist(x).powi(2) / (2.0 * eps);
            va.partial_cmp(&vb).unwrap()
        })
        .unwrap();
    g.node_point(k)
}

fn random_field(n: usize, seed: u64) -> ScalarField<f64> {
    let g = Arc::new(Grid::from_predicate(Point2::new(0.0, 0.0), 1.0 / (n - 1) as f64, n, n, |_| true));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    ScalarField { grid: g, values, boundary_value: 0.0 }
}

use crate::Point2;

#[test]
fn zero_field_is_fixed() {
    let dom = ConvexDomain::<f64>::unit_disc();
    let g = Arc::new(rasterize(&dom, 1.0 / 16.0).unwrap());
    let u = ScalarField::zeros(g);
    let ue = sup_convolution(&u, 0.1).unwrap();
    assert!(ue.values.iter().all(|&v| v == 0.0));
}

#[test]
fn one_dimensional_parabola() {
    let n = 81;
    let h = 0.05f64;
    let g = Arc::new(Grid::from_predicate(Point2::new(-2.0f64, 0.0), h, n, 1, |_| true));
    let u = ScalarField::from_fn_everywhere(g.clone(), 0.0, |p| -p.x * p.x / 2.0);
    let eps = 0.25;
    let ue = sup_convolution(&u, eps).unwrap();
    // The node maximiser y = x/(1+eps) is a node when x is a multiple of 1.25 h.
    for k in 0..n {
        let x = g.node_point(k).x;
        let t = x / (1.25 * h);
        if (t - t.round()).abs() < 1e-9 && x.abs() < 1.5 {
            let exact = -x * x / (2.0 * (1.0 + eps));
            assert!((ue.values[k] - exact).abs() < 1e-12, "x={x}: {} vs {exact}", ue.values[k]);
        }
    }
}

#[test]
fn matches_brute_force_on_random_fields() {
    for seed in 0..10 {
        let u = random_field(24, seed);
        let ue = sup_convolution(&u, 0.05).unwrap();
        let b = brute(&u, 0.05);
        let err = ue.values.iter().zip(&b).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err <= 1e-12, "seed {seed}: {err}");
    }
}

#[test]
fn f32_matches_brute_force() {
    let g = Arc::new(Grid::from_predicate(Point2::new(0.0f32, 0.0), 0.05, 20, 20, |_| true));
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let values = (0..g.len()).map(|_| rng.gen_range(-1.0f32..1.0)).collect();
    let u = ScalarField { grid: g, values, boundary_value: 0.0 };
    let ue = sup_convolution(&u, 0.05f32).unwrap();
    let b = brute(&u, 0.05f32);
    let err = ue.values.iter().zip(&b).map(|(a, b)| (a - b).abs()).fold(0.0f32, f32::max);
    assert!(err <= 1e-5, "{err}");
}

#[test]
fn disc_sets_and_argmax_map() {
    let dom = ConvexDomain::<f64>::unit_disc();
    let g = Arc::new(rasterize(&dom, 1.0 / 64.0).unwrap());
    let u = ScalarField::distance(&dom, g.clone());
    let sc = sup_convolve(&u, 0.01).unwrap();
    assert!((sc.rho - 0.2).abs() < 1e-12);
    for k in g.inside_nodes() {
        assert_eq!(sc.u_mask[k], u.values[k] > 0.01);
        assert!(!sc.a_mask[k] || sc.u_mask[k]);
        assert!(!sc.omega_mask[k] || sc.a_mask[k]);
        if sc.a_mask[k] {
            assert!(sc.y_map.components[k].dist(g.node_point(k)) <= sc.rho);
        }
    }
    assert!(sc.a_mask.iter().any(|&b| b));
    let (i, j) = g.nearest(Point2::new(0.5, 0.0));
    let k = g.idx(i, j);
    let y = brute_argmax(&u, g.node_point(k), 0.01);
    assert!(sc.y_map.components[k].dist(y) <= 2.0 * g.h, "{:?} vs {y:?}", sc.y_map.components[k]);
    assert!(sc.summary().contains("rho = "));
    assert_eq!(sc.mask_pgms().len(), 4);
}

#[test]
fn epsilon_too_large() {
    let dom = ConvexDomain::<f64>::unit_disc();
    let g = Arc::new(rasterize(&dom, 1.0 / 32.0).unwrap());
    let u = ScalarField::distance(&dom, g);
    assert!(matches!(sup_convolve(&u, 1.0), Err(Error::EpsilonTooLarge(_))));
    assert!(sup_convolution(&u, 0.0).is_err());
}

#[test]
fn c_eps_arithmetic() {
    assert!((c_eps(0.1f64, 0.01) - 0.10405).abs() < 1e-15);
}

#[test]
fn lemma_approx1_on_disc_distance() {
    let dom = ConvexDomain::<f64>::unit_disc();
    // With h > 2 eps the node maximiser is x itself, so the smallest eps needs h < eps.
    let g = Arc::new(rasterize(&dom, 1.0 / 512.0).unwrap());
    let u = ScalarField::distance(&dom, g);
    let res: Vec<_> = [0.04, 0.01, 0.0025].iter().map(|&e| sup_convolve(&u, e).unwrap()).collect();
    let rep = check_lemma_approx1(&u, &res);
    assert!(rep.pass, "{rep}");
    for r in ["sup_error_ratio_0", "sup_error_ratio_1"] {
        let v = rep.value(r).unwrap();
        assert!((v - 4.0).abs() < 0.4, "{r} = {v}");
    }
}

#[test]
fn lemma_approx1_on_quadratic() {
    let dom = ConvexDomain::<f64>::unit_disc();
    let g = Arc::new(rasterize(&dom, 1.0 / 64.0).unwrap());
    let u = ScalarField::from_fn(g, 0.0, |p| 1.0 - p.norm_sq() / 2.0);
    let res: Vec<_> = [0.04, 0.01, 0.0025].iter().map(|&e| sup_convolve(&u, e).unwrap()).collect();
    let rep = check_lemma_approx1(&u, &res);
    assert!(rep.pass, "{rep}");
    assert!(rep.value("smooth_nodes").unwrap() > 100.0);
}

#[test]
fn lemma_approx1_zero_field() {
    let dom = ConvexDomain::<f64>::unit_disc();
    let g = Arc::new(rasterize(&dom, 1.0 / 32.0).unwrap());
    let u = ScalarField::zeros(g.clone());
    let ue = sup_convolution(&u, 0.01).unwrap();
    // A_eps is empty for the zero field, so the sets are assembled by hand.
    let n = g.len();
    let sc = SupConvResult {
        epsilon: 0.01,
        u_eps: ue,
        rho: 0.0,
        u_mask: vec![false; n],
        a_mask: vec![false; n],
        omega_mask: vec![false; n],
        m_mask: vec![false; n],
        m_eps: 0.0,
        b_eps: 0.0,
        c_eps: 0.005,
        y_map: VectorField { grid: g.clone(), components: vec![Point2::origin(); n] },
    };
    let rep = check_lemma_approx1(&u, &[sc.clone()]);
    assert!(rep.pass, "{rep}");
    let q = q_region_and_supine(&u, &sc);
    assert!(q.pass && q.notes.contains("vacuous"));
}

#[test]
fn q_region_on_disc_distance() {
    let dom = ConvexDomain::<f64>::unit_disc();
    let g = Arc::new(rasterize(&dom, 1.0 / 128.0).unwrap());
    let u = ScalarField::distance(&dom, g);
    let sc = sup_convolve(&u, 0.01).unwrap();
    let rep = q_region_and_supine(&u, &sc);
    assert!(rep.value("q_nodes").unwrap() > 0.0);
    assert!(rep.pass, "{rep}");
}

#[test]
fn q_region_smoke_on_paraboloid() {
    let dom = ConvexDomain::<f64>::unit_disc();
    let g = Arc::new(rasterize(&dom, 1.0 / 64.0).unwrap());
    let u = ScalarField::from_fn(g, 0.0, |p| 1.0 - p.norm_sq());
    let sc = sup_convolve(&u, 0.01).unwrap();
    let rep = q_region_and_supine(&u, &sc);
    assert_eq!(rep.name, "q_region_supine");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dominates_and_is_monotone_in_eps(seed in 0u64..1000, e1 in 0.001f64..0.2, e2 in 0.001f64..0.2) {
        let u = random_field(16, seed);
        let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
        let a = sup_convolution(&u, lo).unwrap();
        let b = sup_convolution(&u, hi).unwrap();
        for k in 0..u.values.len() {
            prop_assert!(a.values[k] >= u.values[k]);
            prop_assert!(b.values[k] >= a.values[k]);
        }
        let bf = brute(&u, lo);
        for k in 0..u.values.len() {
            prop_assert!((a.values[k] - bf[k]).abs() <= 1e-12);
        }
    }

    #[test]
    fn max_is_preserved(seed in 0u64..1000, eps in 0.001f64..0.1) {
        let u = random_field(16, seed);
        let ue = sup_convolution(&u, eps).unwrap();
        let m = u.values.iter().copied().fold(f64::MIN, f64::max);
        let me = ue.values.iter().copied().fold(f64::MIN, f64::max);
        prop_assert!((m - me).abs() < 1e-15);
    }
}
