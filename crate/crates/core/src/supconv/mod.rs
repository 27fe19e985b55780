//! Supremal convolutions and the ε-sets built on them.

mod envelope;

use std::fmt::Write as _;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field::{gradient, hessian, infinity_laplacian, mask_pgm, Grid, ScalarField, VectorField};
use crate::{Error, Report, Result, Scalar};

use envelope::Envelope;

/// `u^eps(x) = max_y u(y) - |x - y|^2 / (2 eps)` over all lattice nodes.
///
/// Separable: a row pass then a column pass of the linear-time upper
/// envelope of parabolas. Exterior nodes take part with their stored values.
pub fn sup_convolution<T: Scalar>(u: &ScalarField<T>, epsilon: T) -> Result<ScalarField<T>> {
    if !(epsilon > T::zero()) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    let g = &*u.grid;
    let c = g.h * g.h / (T::lit(2.0) * epsilon);
    Ok(ScalarField { grid: u.grid.clone(), values: envelope_2d(g, &u.values, c), boundary_value: u.boundary_value })
}

/// Separable 2-D upper envelope with lattice coefficient `c`.
fn envelope_2d<T: Scalar>(g: &Grid<T>, f: &[T], c: T) -> Vec<T> {
    let (nx, ny) = (g.nx, g.ny);
    let mut rows = vec![T::zero(); nx * ny];
    let mut env = Envelope::new(nx.max(ny));
    for j in 0..ny {
        env.upper(&f[j * nx..(j + 1) * nx], c, &mut rows[j * nx..(j + 1) * nx]);
    }
    let mut out = vec![T::zero(); nx * ny];
    let mut col = vec![T::zero(); ny];
    let mut res = vec![T::zero(); ny];
    for i in 0..nx {
        for j in 0..ny {
            col[j] = rows[j * nx + i];
        }
        env.upper(&col, c, &mut res);
        for j in 0..ny {
            out[j * nx + i] = res[j];
        }
    }
    out
}

/// Euclidean distance from every node to the nearest node outside `set`.
fn distance_to_complement<T: Scalar>(g: &Grid<T>, set: &[bool]) -> Vec<T> {
    let f: Vec<T> = set.iter().map(|&s| if s { T::neg_infinity() } else { T::zero() }).collect();
    envelope_2d(g, &f, g.h * g.h).into_iter().map(|v| (-v).max(T::zero()).sqrt()).collect()
}

/// A supremal convolution with its ε-sets.
#[derive(Debug, Clone)]
pub struct SupConvResult<T> {
    pub epsilon: T,
    pub u_eps: ScalarField<T>,
    /// `2 sqrt(eps max|u|)`.
    pub rho: T,
    /// `U_eps = {u > eps}`.
    pub u_mask: Vec<bool>,
    /// Nodes of `U_eps` farther than `rho` from its complement.
    pub a_mask: Vec<bool>,
    /// `Omega_eps = {x in A_eps : u^eps > m_eps}`.
    pub omega_mask: Vec<bool>,
    /// `M_eps = {u^eps > (1 - c_eps) max u}`.
    pub m_mask: Vec<bool>,
    /// `max u^eps` over the boundary layer of `A_eps`.
    pub m_eps: T,
    /// `1 - min |grad u^eps|` over the boundary layer of `Omega_eps`.
    pub b_eps: T,
    /// `b + (eps/2)(1 - b)^2`.
    pub c_eps: T,
    /// `x + eps grad u^eps(x)`.
    pub y_map: VectorField<T>,
}

/// `c_eps = b + (eps / 2)(1 - b)^2`.
pub fn c_eps<T: Scalar>(b: T, epsilon: T) -> T {
    let r = T::one() - b;
    b + epsilon / T::lit(2.0) * r * r
}

impl<T: Scalar> SupConvResult<T> {
    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.u_eps.grid
    }

    /// Nodes of `Omega_eps` with a 4-neighbour outside it.
    pub fn omega_boundary(&self) -> Vec<bool> {
        self.grid().mask_boundary(&self.omega_mask)
    }

    /// Nodes of `A_eps` with a 4-neighbour outside it.
    pub fn a_boundary(&self) -> Vec<bool> {
        self.grid().mask_boundary(&self.a_mask)
    }

    /// Named masks in export order.
    pub fn masks(&self) -> [(&'static str, &[bool]); 4] {
        [("U_eps", &self.u_mask), ("A_eps", &self.a_mask), ("Omega_eps", &self.omega_mask), ("M_eps", &self.m_mask)]
    }

    /// 8-bit PGM of each mask, keyed by name.
    pub fn mask_pgms(&self) -> Vec<(&'static str, Vec<u8>)> {
        self.masks().iter().map(|(n, m)| (*n, mask_pgm(self.grid(), m))).collect()
    }

    /// Plain-text summary: ε, ρ, m_ε, b_ε, c_ε and node counts.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "epsilon = {}", self.epsilon);
        let _ = writeln!(s, "rho = {}", self.rho);
        let _ = writeln!(s, "m_eps = {}", self.m_eps);
        let _ = writeln!(s, "b_eps = {}", self.b_eps);
        let _ = writeln!(s, "c_eps = {}", self.c_eps);
        for (name, m) in self.masks() {
            let _ = writeln!(s, "{name} nodes = {}", m.iter().filter(|&&b| b).count());
        }
        s
    }
}

/// Builds `U_eps`, `A_eps`, `m_eps`, `Omega_eps`, `M_eps` and the argmax map.
///
/// `M_eps` uses the level `(1 - c_eps) max u`, which is `1 - c_eps` in the
/// frame with `max u = 1`.
pub fn build_eps_sets<T: Scalar>(u: &ScalarField<T>, u_eps: &ScalarField<T>, epsilon: T) -> Result<SupConvResult<T>> {
    if !(epsilon > T::zero()) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    let g = &*u.grid;
    let n = g.len();
    let umax = g.inside_nodes().map(|k| u.values[k].abs()).fold(T::zero(), T::max);
    let rho = T::lit(2.0) * (epsilon * umax).sqrt();
    let u_mask: Vec<bool> = (0..n).map(|k| g.inside(k) && u.values[k] > epsilon).collect();
    let dist = distance_to_complement(g, &u_mask);
    let a_mask: Vec<bool> = (0..n).map(|k| u_mask[k] && dist[k] > rho).collect();
    if !a_mask.iter().any(|&b| b) {
        return Err(Error::EpsilonTooLarge(epsilon.to_f64_lossy()));
    }
    let a_bd = g.mask_boundary(&a_mask);
    let m_eps = (0..n).filter(|&k| a_bd[k]).map(|k| u_eps.values[k]).fold(T::neg_infinity(), T::max);
    let omega_mask: Vec<bool> = (0..n).map(|k| a_mask[k] && u_eps.values[k] > m_eps).collect();
    let grad = gradient(u_eps);
    let o_bd = g.mask_boundary(&omega_mask);
    let min_grad = (0..n).filter(|&k| o_bd[k]).map(|k| grad.components[k].norm()).fold(T::infinity(), T::min);
    let b_eps = if min_grad.is_finite() { (T::one() - min_grad).max(T::zero()) } else { T::zero() };
    let c = c_eps(b_eps, epsilon);
    let level = (T::one() - c) * umax;
    let m_mask: Vec<bool> = (0..n).map(|k| g.inside(k) && u_eps.values[k] > level).collect();
    let y_map = VectorField {
        grid: u.grid.clone(),
        components: (0..n).map(|k| g.node_point(k) + grad.components[k].scale(epsilon)).collect(),
    };
    Ok(SupConvResult {
        epsilon,
        u_eps: u_eps.clone(),
        rho,
        u_mask,
        a_mask,
        omega_mask,
        m_mask,
        m_eps,
        b_eps,
        c_eps: c,
        y_map,
    })
}

/// [`sup_convolution`] followed by [`build_eps_sets`].
pub fn sup_convolve<T: Scalar>(u: &ScalarField<T>, epsilon: T) -> Result<SupConvResult<T>> {
    let ue = sup_convolution(u, epsilon)?;
    build_eps_sets(u, &ue, epsilon)
}

/// One-node dilation of `set` inside the domain.
fn dilate<T: Scalar>(g: &Grid<T>, set: &[bool]) -> Vec<bool> {
    let mut out = set.to_vec();
    for j in 1..g.ny - 1 {
        for i in 1..g.nx - 1 {
            let k = g.idx(i, j);
            if g.inside(k) && (set[k - 1] || set[k + 1] || set[k - g.nx] || set[k + g.nx]) {
                out[k] = true;
            }
        }
    }
    out
}

const SEGMENTS: usize = 400;
const SEED: u64 = 0x5eed;

/// Largest midpoint-convexity excess of `u^eps + |x|^2 / (2 eps)` on random
/// even-offset segments whose endpoints and midpoint lie in `region`.
fn semiconvexity_excess<T: Scalar>(sc: &SupConvResult<T>, region: &[bool], rng: &mut ChaCha8Rng) -> (T, usize) {
    let g = &**sc.grid();
    let nodes: Vec<usize> = (0..g.len()).filter(|&k| region[k]).collect();
    if nodes.len() < 2 {
        return (T::neg_infinity(), 0);
    }
    let two_eps = T::lit(2.0) * sc.epsilon;
    let v = |k: usize| sc.u_eps.values[k] + g.node_point(k).norm_sq() / two_eps;
    let mut worst = T::neg_infinity();
    let mut tested = 0usize;
    let mut attempts = 0usize;
    while tested < SEGMENTS && attempts < 50 * SEGMENTS {
        attempts += 1;
        let a = nodes[rng.gen_range(0..nodes.len())];
        let b = nodes[rng.gen_range(0..nodes.len())];
        let ((ia, ja), (ib, jb)) = (g.ij(a), g.ij(b));
        if a == b || (ia + ib) % 2 != 0 || (ja + jb) % 2 != 0 {
            continue;
        }
        let m = g.idx((ia + ib) / 2, (ja + jb) / 2);
        if !region[m] {
            continue;
        }
        tested += 1;
        worst = worst.max(v(m) - (v(a) + v(b)) / T::lit(2.0));
    }
    (worst, tested)
}

/// Discrete checks of the regularity and convergence of `u^eps`.
///
/// (a) `u^eps + |x|^2 / (2 eps)` is midpoint convex on random segments in
/// `Omega_eps` plus one node layer; (b) `max |u^eps - u|` over the core
/// `{u > 0.3 max u}` decreases with `eps` and is at most `eps L^2 / 2 + h L`
/// at the smallest `eps`; (c) on core nodes where the Hessian of `u` stays
/// below `1 / (8 eps L)` within reach of the argmax map, `max |grad u^eps -
/// grad u| <= 2 eps H L + 2 h H` at the smallest `eps`.
pub fn check_lemma_approx1<T: Scalar>(u: &ScalarField<T>, results: &[SupConvResult<T>]) -> Report {
    let mut rep = Report::new("lemma_approx1");
    if results.is_empty() {
        rep.note("vacuous: no supremal convolutions");
        return rep;
    }
    let mut sorted: Vec<&SupConvResult<T>> = results.iter().collect();
    sorted.sort_by(|a, b| b.epsilon.partial_cmp(&a.epsilon).expect("finite epsilon"));
    let g = &*u.grid;
    let h = g.h;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);

    // (a)
    let mut worst_a = T::neg_infinity();
    for sc in &sorted {
        let region = dilate(g, &sc.omega_mask);
        let (w, _) = semiconvexity_excess(sc, &region, &mut rng);
        let scale = (0..g.len()).filter(|&k| region[k]).map(|k| sc.u_eps.values[k].abs() + g.node_point(k).norm_sq() / sc.epsilon).fold(T::one(), T::max);
        worst_a = worst_a.max(w / scale);
    }
    rep.check("semiconvexity_excess_rel", worst_a.max(T::zero()).to_f64_lossy(), 1e-10);

    // (b)
    let grad_u = gradient(u);
    let lip = g.inside_nodes().map(|k| grad_u.components[k].norm()).fold(T::zero(), T::max);
    let umax = u.max_inside();
    let core: Vec<usize> = g.inside_nodes().filter(|&k| u.values[k] > T::lit(0.3) * umax).collect();
    let mut errs = Vec::new();
    for sc in &sorted {
        let e = core.iter().map(|&k| (sc.u_eps.values[k] - u.values[k]).abs()).fold(T::zero(), T::max);
        errs.push(e);
    }
    let mut monotone_violation = T::zero();
    for (i, w) in errs.windows(2).enumerate() {
        monotone_violation = monotone_violation.max(w[1] - w[0]);
        if w[1] > T::zero() {
            rep.record(format!("sup_error_ratio_{i}"), (w[0] / w[1]).to_f64_lossy());
        }
    }
    rep.check("sup_error_increase", monotone_violation.to_f64_lossy(), 1e-12);
    let eps_min = sorted.last().expect("non-empty").epsilon;
    let last = *errs.last().expect("non-empty");
    rep.check("sup_error_smallest_eps", last.to_f64_lossy(), (eps_min * lip * lip / T::lit(2.0) + h * lip).to_f64_lossy() + 1e-12);

    // (c)
    let sc = sorted.last().expect("non-empty");
    let hess = hessian(u);
    let hn: Vec<T> = (0..g.len()).map(|k| if g.inside(k) { hess[k].norm() } else { T::zero() }).collect();
    let reach = eps_min * lip + T::lit(2.0) * h;
    let cap = T::one() / (T::lit(8.0) * eps_min * lip.max(T::lit(1e-300)));
    let r = (reach / h).ceil().to_usize().unwrap_or(0) as isize;
    let grad_e = gradient(&sc.u_eps);
    let mut hmax = T::zero();
    let mut gerr = T::zero();
    let mut smooth = 0usize;
    for &k in &core {
        let (i, j) = g.ij(k);
        let mut local = T::zero();
        let mut ok = true;
        for dj in -r..=r {
            for di in -r..=r {
                let (ii, jj) = (i as isize + di, j as isize + dj);
                if ii < 0 || jj < 0 || ii >= g.nx as isize || jj >= g.ny as isize {
                    ok = false;
                    continue;
                }
                let m = g.idx(ii as usize, jj as usize);
                if !g.inside(m) {
                    ok = false;
                } else {
                    local = local.max(hn[m]);
                }
            }
        }
        if !ok || local > cap {
            continue;
        }
        smooth += 1;
        hmax = hmax.max(local);
        gerr = gerr.max((grad_e.components[k] - grad_u.components[k]).norm());
    }
    rep.record("smooth_nodes", smooth as f64);
    let tol = T::lit(2.0) * eps_min * hmax * lip + T::lit(2.0) * h * hmax;
    rep.check("grad_error_smallest_eps", gerr.to_f64_lossy(), tol.to_f64_lossy() + 1e-12);
    rep
}

/// `Q_eps` and the fraction of its nodes where `-Delta_inf u^eps <= tol`.
///
/// `tol = 10 h L^2 / eps` with `L = max |grad u^eps|` on `Q_eps`, the
/// first-order error of the Hessian stencil on a field with curvature bound
/// `1 / eps`. Pass iff the fraction is at least 0.99; an empty `Q_eps` is
/// reported as vacuous.
pub fn q_region_and_supine<T: Scalar>(u: &ScalarField<T>, sc: &SupConvResult<T>) -> Report {
    let mut rep = Report::new("q_region_supine");
    rep.record("u_max", u.max_inside().to_f64_lossy());
    let g = &**sc.grid();
    let grad = gradient(&sc.u_eps);
    let half = sc.epsilon / T::lit(2.0);
    let q: Vec<usize> = (0..g.len())
        .filter(|&k| {
            let p = grad.components[k].norm();
            sc.omega_mask[k] && sc.u_eps.values[k] < p - half * p * p
        })
        .collect();
    rep.record("q_nodes", q.len() as f64);
    if q.is_empty() {
        rep.note("vacuous: Q_eps is empty");
        return rep;
    }
    let il = infinity_laplacian(&sc.u_eps);
    let lip = q.iter().map(|&k| grad.components[k].norm()).fold(T::zero(), T::max);
    let tol = T::lit(10.0) * g.h * lip * lip / sc.epsilon;
    let good = q.iter().filter(|&&k| -il.values[k] <= tol).count();
    let worst = q.iter().map(|&k| -il.values[k]).fold(T::neg_infinity(), T::max);
    rep.record("tolerance", tol.to_f64_lossy());
    rep.record("worst_minus_inf_laplacian", worst.to_f64_lossy());
    let frac = good as f64 / q.len() as f64;
    rep.record("subharmonic_fraction", frac);
    if frac < 0.99 {
        rep.fail();
    }
    rep
}

#[cfg(test)]
mod tests;
