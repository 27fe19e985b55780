use crate::eigensolver::GroundState;
use crate::field::{hessian, NodeKind, ScalarField};
use crate::geometry::{is_stadium_like, ConvexDomain};
use crate::{Report, Scalar};

use super::{rescale_to_unit, C_H, TAU};

/// `|grad u|` at `n_samples` boundary points from the quadratic through
/// `u(y + k s nu)`, `k = 1, 2, 3`, `s = 3h`:
/// `(-5 u_1 + 8 u_2 - 3 u_3) / (2 s)`.
///
/// The boundary value itself is not used, so the staircase offset of the
/// lattice boundary cancels. Samples whose normal segment of length `3s`
/// leaves the normal collar (`d(y + 3 s nu) < 3 s`, near polygon corners) are
/// skipped. Records min, max, mean and the flatness ratio max/min.
pub fn boundary_gradient_profile<T: Scalar>(gs: &GroundState<T>, dom: &ConvexDomain<T>, n_samples: usize) -> Report {
    let mut rep = Report::new("boundary_gradient_profile");
    let u = &gs.u;
    let s = T::lit(3.0) * u.grid.h;
    let mut vals = Vec::with_capacity(n_samples);
    let mut skipped = 0usize;
    for (y, nu) in dom.boundary_samples(n_samples) {
        let far = T::lit(3.0) * s;
        if dom.distance_or_zero(y + nu.scale(far)) < far * (T::one() - T::lit(1e-9)) {
            skipped += 1;
            continue;
        }
        let at = |k: f64| u.interpolate(y + nu.scale(s * T::lit(k)));
        if let (Ok(a), Ok(b), Ok(c)) = (at(1.0), at(2.0), at(3.0)) {
            vals.push((T::lit(8.0) * b - T::lit(5.0) * a - T::lit(3.0) * c) / (s + s));
        }
    }
    if vals.is_empty() {
        rep.note("no boundary sample could be evaluated");
        rep.fail();
        return rep;
    }
    let lo = vals.iter().copied().fold(T::infinity(), T::min);
    let hi = vals.iter().copied().fold(T::neg_infinity(), T::max);
    let mean = vals.iter().copied().sum::<T>() / T::from_usize_lossy(vals.len());
    rep.record("samples", vals.len() as f64);
    rep.record("skipped", skipped as f64);
    rep.record("min", lo.to_f64_lossy());
    rep.record("max", hi.to_f64_lossy());
    rep.record("mean", mean.to_f64_lossy());
    rep.record("flatness", if lo > T::zero() { (hi / lo).to_f64_lossy() } else { f64::INFINITY });
    rep
}

/// Upwind (Godunov) gradient norm
/// `sqrt(max(D-x, -D+x, 0)^2 + max(D-y, -D+y, 0)^2)` at an interior node.
fn upwind_norm<T: Scalar>(f: &ScalarField<T>, k: usize) -> T {
    let g = &*f.grid;
    let v = &f.values;
    let n = g.nx;
    let part = |lo: T, hi: T| ((v[k] - lo) / g.h).max((v[k] - hi) / g.h).max(T::zero());
    part(v[k - 1], v[k + 1]).hypot(part(v[k - n], v[k + n]))
}

/// If at least 99% of interior nodes have upwind `|grad f| >= 1 - tol`,
/// checks `sup |f - d| <= h + tol`; otherwise notes that the hypothesis is not met.
pub fn eikonal_comparison<T: Scalar>(f: &ScalarField<T>, dom: &ConvexDomain<T>, tol: T) -> Report {
    let mut rep = Report::new("eikonal_comparison");
    let g = &*f.grid;
    let interior: Vec<usize> = (0..g.len()).filter(|&k| g.mask[k] == NodeKind::Interior).collect();
    let ok = interior.iter().filter(|&&k| upwind_norm(f, k) >= T::one() - tol).count();
    let frac = ok as f64 / interior.len().max(1) as f64;
    rep.record("hypothesis_fraction", frac);
    if frac < 0.99 {
        rep.note("hypothesis not met");
        return rep;
    }
    let sup = g
        .inside_nodes()
        .map(|k| (f.values[k] - dom.distance_or_zero(g.node_point(k))).abs())
        .fold(T::zero(), T::max);
    rep.check("sup_abs_f_minus_d", sup.to_f64_lossy(), (g.h + tol).to_f64_lossy());
    rep
}

/// Largest discrete Hessian norm of `u` over interior nodes at distance at
/// least `3h` from the high ridge.
pub fn hessian_proxy<T: Scalar>(u: &ScalarField<T>, dom: &ConvexDomain<T>) -> T {
    let g = &*u.grid;
    let ridge = dom.high_ridge(g.h / T::lit(4.0));
    let hs = hessian(u);
    let far = T::lit(3.0) * g.h;
    (0..g.len())
        .filter(|&k| g.mask[k] == NodeKind::Interior && ridge.distance_to(g.node_point(k)) >= far)
        .map(|k| hs[k].norm())
        .fold(T::zero(), T::max)
}

/// Both branches of the rigidity implication, evaluated in the frame where
/// `max d = 1` and `max u = 1`.
///
/// Flat boundary gradient (ratio at most `1 + TAU`) requires `sup |u - d| <= C_H h`
/// and a stadium-like domain at tolerance `2h`. Otherwise the domain must fail
/// to be stadium-like or `u` must differ from `d` by more than `C_H h`.
pub fn rigidity_test<T: Scalar>(gs: &GroundState<T>, dom: &ConvexDomain<T>) -> Report {
    let mut rep = Report::new("rigidity_test");
    let (gs, dom) = rescale_to_unit(gs, dom);
    let u = &gs.u;
    let g = &*u.grid;
    let h = g.h;
    let profile = boundary_gradient_profile(&gs, &dom, 256);
    let flatness = profile.value("flatness").unwrap_or(f64::INFINITY);
    let sup = g
        .inside_nodes()
        .map(|k| (u.values[k] - dom.distance_or_zero(g.node_point(k))).abs())
        .fold(T::zero(), T::max)
        .to_f64_lossy();
    let (st, class) = is_stadium_like(&dom, T::lit(2.0) * h);
    let bound = (T::lit(C_H) * h).to_f64_lossy();
    rep.record("flatness", flatness);
    rep.record("hausdorff_cut_high", st.value("hausdorff_cut_high").unwrap_or(f64::NAN));
    rep.record("hessian_proxy", hessian_proxy(u, &dom).to_f64_lossy());
    if flatness <= 1.0 + TAU {
        rep.note("branch=rigid");
        rep.check("sup_abs_u_minus_d", sup, bound);
        rep.check("not_stadium_like", f64::from(u8::from(!st.pass)), 0.0);
    } else {
        rep.note("branch=non-rigid");
        rep.record("sup_abs_u_minus_d", sup);
        if st.pass && sup <= bound {
            rep.note("flat-gradient conclusion holds without flat gradient");
            rep.fail();
        }
    }
    rep.note(format!("tag={}", class.tag()));
    rep
}
