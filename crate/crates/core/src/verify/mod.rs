//! Checks of computed ground states against the distance function.

mod local;
mod rigidity;

use std::sync::Arc;

use crate::eigensolver::{GroundState, Normalization, TrailEntry};
use crate::field::{gradient, infinity_laplacian, Grid, ScalarField};
use crate::geometry::{hausdorff, ConvexDomain};
use crate::{Report, Scalar};

pub use local::{s_minus, s_minus_check, semiconcavity_test};
pub use rigidity::{boundary_gradient_profile, eikonal_comparison, hessian_proxy, rigidity_test};

/// Constant `C` in the `C h` bounds of this module.
pub const C_H: f64 = 4.0;
/// Flatness threshold `tau` of the rigidity test.
pub const TAU: f64 = 0.1;

/// Rescales lengths by `Lambda_inf` so that `max d = 1`, and `u` so that `max u = 1`.
pub fn rescale_to_unit<T: Scalar>(gs: &GroundState<T>, dom: &ConvexDomain<T>) -> (GroundState<T>, ConvexDomain<T>) {
    let s = dom.lambda_infinity();
    let g = &*gs.u.grid;
    let grid = Arc::new(Grid { origin: g.origin.scale(s), h: g.h * s, nx: g.nx, ny: g.ny, mask: g.mask.clone() });
    let umax = gs.u.max_inside();
    let values = gs.u.values.iter().map(|&v| v / umax).collect();
    let u = ScalarField { grid, values, boundary_value: gs.u.boundary_value / umax };
    let trail = gs
        .trail
        .iter()
        .map(|e| TrailEntry { lambda: e.lambda / s, ..*e })
        .collect();
    let out = GroundState {
        u,
        trail,
        normalization: Normalization { max_distance: T::one(), factor: gs.normalization.factor / umax },
        converged: gs.converged,
        sup_changes: gs.sup_changes.clone(),
    };
    (out, dom.scaled(s))
}

/// Interior nodes where the ground-state residual is evaluated: `u > 0.05 max u`
/// and more than two lattice spacings from the discrete argmax set
/// (`u >= max u - h L / 2`).
pub fn admissible_nodes<T: Scalar>(u: &ScalarField<T>) -> Vec<bool> {
    let g = &*u.grid;
    let grad = gradient(u);
    let lip = g.inside_nodes().map(|k| grad.components[k].norm()).fold(T::zero(), T::max);
    let top: Vec<(i64, i64)> = u
        .near_max_nodes(g.h * lip / T::lit(2.0))
        .into_iter()
        .map(|m| {
            let (i, j) = g.ij(m);
            (i as i64, j as i64)
        })
        .collect();
    let umax = u.max_inside();
    (0..g.len())
        .map(|k| {
            let (i, j) = g.ij(k);
            let (i, j) = (i as i64, j as i64);
            g.mask[k] == crate::field::NodeKind::Interior
                && u.values[k] > T::lit(0.05) * umax
                && top.iter().all(|&(a, b)| (a - i).pow(2) + (b - j).pow(2) > 4)
        })
        .collect()
}

/// `min{|grad u| / u - lambda_inf, -Delta_inf u}` at admissible nodes; NaN elsewhere.
pub fn residual_field<T: Scalar>(u: &ScalarField<T>, lambda_inf: T) -> ScalarField<T> {
    let grad = gradient(u);
    let il = infinity_laplacian(u);
    let adm = admissible_nodes(u);
    let values = (0..u.values.len())
        .map(|k| if adm[k] { (grad.components[k].norm() / u.values[k] - lambda_inf).min(-il.values[k]) } else { T::nan() })
        .collect();
    ScalarField { grid: u.grid.clone(), values, boundary_value: T::nan() }
}

/// Residual of the ground-state equation for `gs` on `dom`.
pub fn ground_state_residual<T: Scalar>(gs: &GroundState<T>, dom: &ConvexDomain<T>) -> ScalarField<T> {
    residual_field(&gs.u, dom.lambda_infinity())
}

/// `max |r|` over the finite entries of a residual field.
pub fn max_residual<T: Scalar>(r: &ScalarField<T>) -> T {
    r.values.iter().filter(|v| v.is_finite()).map(|v| v.abs()).fold(T::zero(), T::max)
}

/// Report on the residual: `max |r|`, its ratio to `h`, and the node count.
pub fn residual_report<T: Scalar>(r: &ScalarField<T>) -> Report {
    let mut rep = Report::new("ground_state_residual");
    let m = max_residual(r);
    rep.record("admissible_nodes", r.values.iter().filter(|v| v.is_finite()).count() as f64);
    rep.record("max_abs_residual", m.to_f64_lossy());
    rep.record("c_measured", (m / r.grid.h).to_f64_lossy());
    rep
}

/// `u <= d`, `u = d` on ridge-to-boundary segments, and argmax against the
/// high ridge, each within `C_H h`.
pub fn compare_with_distance<T: Scalar>(gs: &GroundState<T>, dom: &ConvexDomain<T>) -> Report {
    let mut rep = Report::new("compare_with_distance");
    let u = &gs.u;
    let g = &*u.grid;
    let h = g.h;
    let tol = (T::lit(C_H) * h).to_f64_lossy();
    let above = g.inside_nodes().map(|k| u.values[k] - dom.distance_or_zero(g.node_point(k))).fold(T::neg_infinity(), T::max);
    rep.check("max_u_minus_d", above.to_f64_lossy(), tol);

    let ridge = dom.high_ridge(h / T::lit(4.0));
    let ridge_pts = ridge.samples(h);
    let stride = (ridge_pts.len() / 16).max(1);
    let mut seg = T::zero();
    for &z in ridge_pts.iter().step_by(stride) {
        let Ok(proj) = dom.projection_set(z, h / T::lit(4.0)) else {
            continue;
        };
        let targets = proj.samples(dom.perimeter() / T::lit(64.0));
        for &y in &targets {
            let n = (z.dist(y) / h).ceil().to_usize().unwrap_or(1).max(1);
            for i in 0..=n {
                let x = y.lerp(z, T::from_usize_lossy(i) / T::from_usize_lossy(n));
                if let Ok(v) = u.interpolate(x) {
                    seg = seg.max((v - dom.distance_or_zero(x)).abs());
                }
            }
        }
    }
    rep.check("max_abs_u_minus_d_on_segments", seg.to_f64_lossy(), tol);

    let grad = gradient(u);
    let lip = g.inside_nodes().map(|k| grad.components[k].norm()).fold(T::zero(), T::max);
    let top: Vec<_> = u.near_max_nodes(h * lip).into_iter().map(|k| g.node_point(k)).collect();
    rep.check("argmax_hausdorff", hausdorff(&top, &ridge_pts).to_f64_lossy(), tol);
    rep
}
