use super::*;
use crate::field::rasterize;
use crate::geometry::ConvexDomain;
use crate::supconv::sup_convolve;
use std::sync::Arc;

fn disc_d(h: f64) -> ScalarField<f64> {
    let dom = ConvexDomain::unit_disc();
    ScalarField::distance(&dom, Arc::new(rasterize(&dom, h).unwrap()))
}

#[test]
fn radial_flow_on_disc_distance() {
    let d = disc_d(1.0 / 128.0);
    let tr = flow_ode(&d, Point2::new(0.9, 0.0), 0.01, 0.8, 10.0).unwrap();
    assert_eq!(tr.terminal, Terminal::EnteredTarget);
    assert!((tr.entry_time.unwrap() - 0.7).abs() < 0.02, "{:?}", tr.entry_time);
    assert!(tr.samples.iter().all(|s| s.x.y.abs() < 1e-9));
    let rep = flow_diagnostics(&tr);
    assert!(rep.pass, "{rep}");
    assert!(rep.value("grad_norm_spread").unwrap() < 0.01);
    assert!(rep.value("affinity_defect").unwrap() < 1e-3);
}

#[test]
fn horizontal_flow_on_linear_field() {
    let dom = ConvexDomain::<f64>::square(0.0, 0.0, 1.0).unwrap();
    let g = Arc::new(rasterize(&dom, 1.0 / 64.0).unwrap());
    let f = ScalarField::from_fn_everywhere(g, 0.0, |p| p.x);
    let tr = flow_ode(&f, Point2::new(0.1, 0.5), 0.01, 0.8, 10.0).unwrap();
    assert_eq!(tr.terminal, Terminal::EnteredTarget);
    assert!((tr.entry_time.unwrap() - 0.7).abs() < 0.02);
    let disc = flow_discrete(&f, Point2::new(0.1, 0.5), 0.05, 0.8).unwrap();
    for w in disc.samples.windows(2) {
        assert!((w[1].u - w[0].u - 0.05).abs() < 1e-12);
        assert!((w[1].x.y - 0.5).abs() < 1e-6);
    }
}

#[test]
fn aronsson_flow_keeps_gradient_norm() {
    let dom = ConvexDomain::<f64>::square(-1.0, -1.0, 2.0).unwrap();
    let g = Arc::new(rasterize(&dom, 1.0 / 128.0).unwrap());
    let f = ScalarField::from_fn_everywhere(g, 0.0, |p| p.x.abs().powf(4.0 / 3.0) - p.y.abs().powf(4.0 / 3.0));
    let tr = flow_ode(&f, Point2::new(0.5, -0.5), 0.005, 0.6, 10.0).unwrap();
    assert!(tr.samples.len() > 20);
    let rep = flow_diagnostics(&tr);
    assert!(rep.value("grad_norm_spread").unwrap() < 0.01, "{rep}");
}

#[test]
fn discrete_radial_steps() {
    let d = disc_d(1.0 / 128.0);
    let tr = flow_discrete(&d, Point2::new(0.9, 0.0), 0.05, 0.8).unwrap();
    for (j, s) in tr.samples.iter().enumerate() {
        assert!((s.x.x - (0.9 - 0.05 * j as f64)).abs() < 1e-3 && s.x.y.abs() < 1e-3, "step {j}: {:?}", s.x);
    }
    for w in tr.samples.windows(2) {
        assert!((w[1].u - w[0].u - 0.05).abs() < 1e-3);
    }
}

#[test]
fn convex_growth_on_square_of_x() {
    let dom = ConvexDomain::<f64>::square(-1.0, -1.0, 2.0).unwrap();
    let g = Arc::new(rasterize(&dom, 1.0 / 64.0).unwrap());
    let f = ScalarField::from_fn_everywhere(g, 0.0, |p| p.x * p.x);
    let tr = flow_ode(&f, Point2::new(0.1, 0.0), 0.01, 0.5, 10.0).unwrap();
    assert!(tr.samples.windows(2).all(|w| w[1].grad_norm > w[0].grad_norm));
    let rep = flow_diagnostics(&tr);
    assert!(rep.pass, "{rep}");
}

#[test]
fn ode_and_discrete_agree_on_smooth_field() {
    let dom = ConvexDomain::<f64>::square(0.0, 0.0, 1.0).unwrap();
    let g = Arc::new(rasterize(&dom, 1.0 / 64.0).unwrap());
    let f = ScalarField::from_fn(g.clone(), 0.0, |p| (std::f64::consts::PI * p.x).sin() * (std::f64::consts::PI * p.y).sin());
    let delta = 2.0 * g.h;
    let a = flow_ode(&f, Point2::new(0.15, 0.3), delta, 0.95, 10.0).unwrap();
    let b = flow_discrete(&f, Point2::new(0.15, 0.3), delta, 0.95).unwrap();
    assert!(trajectory_distance(&a, &b) <= 3.0 * delta, "{}", trajectory_distance(&a, &b));
}

#[test]
fn critical_start_is_rejected() {
    let d = disc_d(1.0 / 32.0);
    let dom = ConvexDomain::<f64>::square(-1.0, -1.0, 2.0).unwrap();
    let g = Arc::new(rasterize(&dom, 1.0 / 16.0).unwrap());
    let f = ScalarField::from_fn_everywhere(g, 0.0, |p| -(p.x * p.x + p.y * p.y));
    assert!(matches!(flow_ode(&f, Point2::new(0.0, 0.0), 0.01, 1.0, 1.0), Err(Error::CriticalStart(_))));
    assert!(flow_ode(&d, Point2::new(5.0, 0.0), 0.01, 1.0, 1.0).is_err());
}

#[test]
fn csv_layout_and_monotone_values() {
    let d = disc_d(1.0 / 64.0);
    let tr = flow_ode(&d, Point2::new(0.3, 0.4), 0.02, 2.0, 5.0).unwrap();
    assert!(tr.samples.windows(2).all(|w| w[1].u >= w[0].u && w[1].t > w[0].t));
    assert!(tr.samples.windows(2).all(|w| w[1].x.dist(w[0].x) <= tr.step * (1.0 + 1e-9)));
    let csv = tr.to_csv();
    assert!(csv.starts_with("t,x,y,u,gradnorm,terminal\n"));
    assert_eq!(csv.lines().count(), tr.samples.len() + 1);
}

#[test]
fn propagation_bound_on_disc_distance() {
    let dom = ConvexDomain::unit_disc();
    let g = Arc::new(rasterize(&dom, 1.0 / 128.0).unwrap());
    let u = ScalarField::distance(&dom, g);
    let gs = GroundState::from_field(u.clone(), &dom);
    // Gradients of the node-restricted sup-convolution carry O(h / eps) errors, so eps >> h.
    let sc = sup_convolve(&u, 0.04).unwrap();
    assert!(sc.b_eps < 0.05, "b = {}", sc.b_eps);
    let rep = check_propagation_bound(&sc, &gs, 20).unwrap();
    assert!(rep.pass, "{rep}");
    assert!(rep.value("trajectories").unwrap() >= 19.0);
    let cov = coverage(&sc, 7);
    assert!(cov.pass, "{cov}");
}

#[test]
fn propagation_bound_rejects_degenerate_gradient() {
    let dom = ConvexDomain::unit_disc();
    let g = Arc::new(rasterize(&dom, 1.0 / 32.0).unwrap());
    let u = ScalarField::distance(&dom, g);
    let gs = GroundState::from_field(u.clone(), &dom);
    let mut sc = sup_convolve(&u, 0.01).unwrap();
    sc.b_eps = 1.0;
    assert!(matches!(check_propagation_bound(&sc, &gs, 4), Err(Error::HypothesisViolated(_))));
}

