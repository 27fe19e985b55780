use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field::{gradient, hessian, NodeKind, ScalarField};
use crate::{Error, Point2, Report, Result, Scalar};

/// `S^-(x)`: Richardson extrapolation to `r = 0` of
/// `M(r) = max over the circle of radius r of (f(x) - f(y)) / r`.
///
/// With one radius `M(r)` is returned; with more, the intercept of the
/// least-squares line through `(r, M(r))`.
pub fn s_minus<T: Scalar>(f: &ScalarField<T>, x: Point2<T>, radii: &[T]) -> Result<T> {
    let g = &*f.grid;
    if radii.is_empty() {
        return Err(Error::InvalidArgument("no radii".into()));
    }
    let rmin = radii.iter().copied().fold(T::infinity(), T::min);
    if rmin < T::lit(2.0) * g.h * (T::one() - T::lit(1e-9)) {
        return Err(Error::InvalidArgument(format!("smallest radius {rmin} is below 2h")));
    }
    let neg = ScalarField { grid: f.grid.clone(), values: f.values.iter().map(|&v| -v).collect(), boundary_value: -f.boundary_value };
    let fx = f.interpolate(x)?;
    let mut pts = Vec::with_capacity(radii.len());
    for &r in radii {
        let (m, _) = neg.sphere_max_refined(x, r, 64)?;
        pts.push((r, (fx + m) / r));
    }
    if pts.len() == 1 {
        return Ok(pts[0].1);
    }
    let n = T::from_usize_lossy(pts.len());
    let mr = pts.iter().map(|p| p.0).sum::<T>() / n;
    let mm = pts.iter().map(|p| p.1).sum::<T>() / n;
    let sxx: T = pts.iter().map(|p| (p.0 - mr) * (p.0 - mr)).sum();
    let sxy: T = pts.iter().map(|p| (p.0 - mr) * (p.1 - mm)).sum();
    if !(sxx > T::zero()) {
        return Ok(mm);
    }
    Ok(mm - sxy / sxx * mr)
}

/// Smallest `C` with `f(z) >= lam f(x) + (1 - lam) f(y) - C lam (1 - lam) |x - y|^2 / 2`,
/// `z = lam x + (1 - lam) y`, over random node segments in `region`.
///
/// Segments are centred on random region nodes with lattice offsets `4v`,
/// `1 <= |v|_inf <= 4`, and `lam` in `{1/2, 1/4, 3/4}`, so every point is a
/// node. The predicted bound `L^2 max u / (min u)^2` over the region is
/// recorded. A kink resolved at lattice scale makes `C` grow like `1/h`; the
/// test fails when `C h > 1/4`.
pub fn semiconcavity_test<T: Scalar>(f: &ScalarField<T>, region: &[bool], nsegments: usize, seed: u64) -> Report {
    let mut rep = Report::new("semiconcavity");
    let g = &*f.grid;
    let nodes: Vec<usize> = (0..g.len()).filter(|&k| region[k]).collect();
    if nodes.is_empty() {
        rep.note("vacuous: empty region");
        return rep;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = T::neg_infinity();
    let mut tested = 0usize;
    let mut attempts = 0usize;
    let lams = [(1usize, 2usize), (1, 4), (3, 4)];
    while tested < nsegments && attempts < 50 * nsegments.max(1) {
        attempts += 1;
        let z = nodes[rng.gen_range(0..nodes.len())];
        let (a, b): (i64, i64) = (rng.gen_range(-4..=4), rng.gen_range(-4..=4));
        if a == 0 && b == 0 {
            continue;
        }
        let (num, den) = lams[rng.gen_range(0..lams.len())];
        // x = z - (1 - lam) 4v, y = z + lam 4v.
        let wx = 4 * (den - num) as i64 / den as i64;
        let wy = 4 * num as i64 / den as i64;
        let (zi, zj) = g.ij(z);
        let at = |s: i64| -> Option<usize> {
            let i = zi as i64 + s * a;
            let j = zj as i64 + s * b;
            if i < 0 || j < 0 || i >= g.nx as i64 || j >= g.ny as i64 {
                return None;
            }
            let k = g.idx(i as usize, j as usize);
            region[k].then_some(k)
        };
        let (Some(x), Some(y)) = (at(-wx), at(wy)) else {
            continue;
        };
        tested += 1;
        let lam = T::from_usize_lossy(num) / T::from_usize_lossy(den);
        let len2 = g.node_point(x).dist(g.node_point(y)).powi(2);
        let gap = lam * f.values[x] + (T::one() - lam) * f.values[y] - f.values[z];
        c = c.max(T::lit(2.0) * gap / (lam * (T::one() - lam) * len2));
    }
    let grad = gradient(f);
    let lip = nodes.iter().map(|&k| grad.components[k].norm()).fold(T::zero(), T::max);
    let fmax = nodes.iter().map(|&k| f.values[k]).fold(T::neg_infinity(), T::max);
    let fmin = nodes.iter().map(|&k| f.values[k]).fold(T::infinity(), T::min);
    let predicted = if fmin > T::zero() { lip * lip * fmax / (fmin * fmin) } else { T::infinity() };
    let c = c.max(T::zero());
    rep.record("segments", tested as f64);
    rep.record("c_estimate", c.to_f64_lossy());
    rep.record("c_predicted", predicted.to_f64_lossy());
    rep.check("c_times_h", (c * g.h).to_f64_lossy(), 0.25);
    rep
}

/// Compares [`s_minus`] with the central-difference `|grad u|` at up to `n`
/// random smooth nodes, radii `{2h, 3h, 4h}`.
///
/// A node is smooth when `u > 0.1 max u`, its 11x11 lattice patch is interior,
/// and the discrete Hessian norm on the patch stays below `2 max |grad u| / max u`.
pub fn s_minus_check<T: Scalar>(u: &ScalarField<T>, n: usize, tol: T, seed: u64) -> Report {
    let mut rep = Report::new("s_minus");
    let g = &*u.grid;
    let grad = gradient(u);
    let hs = hessian(u);
    let umax = u.max_inside();
    let lip = g.inside_nodes().map(|k| grad.components[k].norm()).fold(T::zero(), T::max);
    let kappa = T::lit(2.0) * lip / umax;
    let reach = 5usize;
    let smooth = |k: usize| {
        let (i, j) = g.ij(k);
        if i < reach || j < reach || i + reach >= g.nx || j + reach >= g.ny || !(u.values[k] > T::lit(0.1) * umax) {
            return false;
        }
        (j - reach..=j + reach).all(|b| {
            (i - reach..=i + reach).all(|a| {
                let m = g.idx(a, b);
                g.mask[m] == NodeKind::Interior && hs[m].norm() <= kappa
            })
        })
    };
    let mut nodes: Vec<usize> = (0..g.len()).filter(|&k| smooth(k)).collect();
    rep.record("smooth_nodes", nodes.len() as f64);
    if nodes.is_empty() {
        rep.note("no smooth node");
        rep.fail();
        return rep;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let take = n.min(nodes.len());
    for i in 0..take {
        let j = rng.gen_range(i..nodes.len());
        nodes.swap(i, j);
    }
    let radii = [T::lit(2.0) * g.h, T::lit(3.0) * g.h, T::lit(4.0) * g.h];
    let mut worst = T::zero();
    for &k in &nodes[..take] {
        match s_minus(u, g.node_point(k), &radii) {
            Ok(s) => worst = worst.max((s - grad.components[k].norm()).abs()),
            Err(e) => {
                rep.note(format!("node {k}: {e}"));
                rep.fail();
            }
        }
    }
    rep.record("nodes", take as f64);
    rep.check("max_abs_s_minus_minus_grad", worst.to_f64_lossy(), tol.to_f64_lossy());
    rep
}
