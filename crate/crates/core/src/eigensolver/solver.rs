use std::collections::VecDeque;
use std::sync::Arc;

use crate::eigensolver::energy::PEnergy;
use crate::eigensolver::precond::PoissonPreconditioner;
use crate::eigensolver::SolverOptions;
use crate::field::{Grid, ScalarField};
use crate::geometry::ConvexDomain;
use crate::{Error, Result, Scalar};

/// Outcome of one fixed-p solve.
#[derive(Debug, Clone)]
pub struct PSolution<T> {
    /// Minimiser normalised to `sum |u|^p h^2 = 1`.
    pub u: ScalarField<T>,
    pub lambda: T,
    pub iterations: usize,
    /// Relative preconditioned gradient norm at the last iterate.
    pub residual: T,
    /// Rooted Rayleigh quotient after every accepted step.
    pub history: Vec<T>,
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

/// `u^T K u` for the dimensionless 5-point operator on masked values.
fn dirichlet_energy<T: Scalar>(grid: &Grid<T>, u: &[T]) -> T {
    let nx = grid.nx;
    let mut e = T::zero();
    for j in 0..grid.ny - 1 {
        for i in 0..nx - 1 {
            let k = j * nx + i;
            let a = u[k + 1] - u[k];
            let c = u[k + nx] - u[k];
            e += a * a + c * c;
        }
    }
    e
}

/// Minimises the discrete rooted Rayleigh quotient at exponent `p`.
///
/// Limited-memory BFGS on `ln Lambda_p` with a positivity clamp, Armijo
/// backtracking and renormalisation after every step. The initial inverse
/// Hessian is the fast Poisson solve on the lattice rectangle; at `p = 2`
/// the first unit step is one inverse iteration.
pub fn solve_p_ground_state<T: Scalar>(
    dom: &ConvexDomain<T>,
    grid: &Arc<Grid<T>>,
    p: T,
    opts: &SolverOptions<T>,
    warm_start: Option<&ScalarField<T>>,
) -> Result<PSolution<T>> {
    if !(p >= T::lit(2.0)) {
        return Err(Error::InvalidArgument(format!("exponent must be at least 2, got {p}")));
    }
    opts.validate()?;
    let energy = PEnergy::new(grid, p);
    let pc = PoissonPreconditioner::new(grid);
    let n = grid.len();

    let start = match warm_start.or(opts.seed_field.as_ref()) {
        Some(f) => f.values.clone(),
        None => ScalarField::distance(dom, grid.clone()).values,
    };
    let mut u: Vec<T> = (0..n).map(|k| if grid.inside(k) { start[k].max(T::zero()) } else { T::zero() }).collect();
    let s = energy.lp_norm(&u);
    if !(s > T::zero()) {
        return Err(Error::InvalidArgument("starting field vanishes on the grid".into()));
    }
    u.iter_mut().for_each(|v| *v /= s);

    let mut g = vec![T::zero(); n];
    let mut j = energy.log_lambda_grad(&u, &mut g).ok_or_else(|| Error::InvalidArgument("degenerate field".into()))?;
    let mut z = vec![T::zero(); n];
    pc.apply(&g, &mut z);
    // Without curvature pairs the unit step on `-P g` scaled by `u^T K u` is one inverse iteration at p = 2.
    let gamma0 = dirichlet_energy(grid, &u);
    let mut mem: VecDeque<(Vec<T>, Vec<T>, T)> = VecDeque::with_capacity(opts.memory);
    let mut gamma = gamma0;
    let mut history = vec![j.exp()];
    let mut small = 0usize;
    let mut trial = vec![T::zero(); n];
    let mut g_new = vec![T::zero(); n];
    let mut dir = vec![T::zero(); n];
    let mut q = vec![T::zero(); n];
    let mut coef = vec![T::zero(); opts.memory];
    let mut last_decrease = T::infinity();
    let residual = |u: &[T], z: &[T]| {
        let um = u.iter().copied().fold(T::zero(), T::max);
        let zm = z.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        dirichlet_energy(grid, u) * zm / um
    };

    for it in 0..opts.max_iterations {
        // Two-loop recursion with the scaled Poisson solve as initial inverse Hessian.
        q.copy_from_slice(&g);
        for (i, (s, y, rho)) in mem.iter().enumerate().rev() {
            coef[i] = *rho * dot(s, &q);
            q.iter_mut().zip(y).for_each(|(a, b)| *a -= coef[i] * *b);
        }
        pc.apply(&q, &mut dir);
        dir.iter_mut().for_each(|d| *d *= gamma);
        for (i, (s, y, rho)) in mem.iter().enumerate() {
            let b = *rho * dot(y, &dir);
            dir.iter_mut().zip(s).for_each(|(d, sv)| *d += (coef[i] - b) * *sv);
        }
        dir.iter_mut().for_each(|d| *d = -*d);
        let mut gd = dot(&g, &dir);
        if !(gd < T::zero()) && !mem.is_empty() {
            mem.clear();
            gamma = gamma0;
            dir.iter_mut().zip(&z).for_each(|(d, v)| *d = -gamma * *v);
            gd = dot(&g, &dir);
        }
        if !(gd < T::zero()) {
            let res = residual(&u, &z);
            return Ok(finish(grid, u, j, it, res, history));
        }
        // Backtracking on the clamped path.
        let mut a = T::one();
        let mut accepted = None;
        for _ in 0..opts.max_backtracks {
            for k in 0..n {
                trial[k] = if grid.inside(k) { (u[k] + a * dir[k]).max(T::zero()) } else { T::zero() };
            }
            if let Some(jt) = energy.log_lambda(&trial) {
                let mut lin = T::zero();
                for k in 0..n {
                    lin += g[k] * (trial[k] - u[k]);
                }
                if jt <= j + opts.armijo_c1 * lin.min(T::zero()) {
                    accepted = Some(jt);
                    break;
                }
            }
            a *= opts.backtrack;
        }
        let Some(jt) = accepted else {
            if mem.is_empty() {
                let res = residual(&u, &z);
                return Ok(finish(grid, u, j, it, res, history));
            }
            mem.clear();
            gamma = gamma0;
            continue;
        };
        debug_assert!(jt <= j, "Rayleigh quotient increased");
        let sc = energy.lp_norm(&trial);
        let mut s_vec = vec![T::zero(); n];
        for k in 0..n {
            let v = trial[k] / sc;
            s_vec[k] = v - u[k];
            u[k] = v;
        }
        let jn = energy.log_lambda_grad(&u, &mut g_new).expect("nonzero iterate");
        let y_vec: Vec<T> = g_new.iter().zip(&g).map(|(a, b)| *a - *b).collect();
        let sy = dot(&s_vec, &y_vec);
        std::mem::swap(&mut g, &mut g_new);
        pc.apply(&g, &mut z);
        if sy > T::zero() {
            let mut py = vec![T::zero(); n];
            pc.apply(&y_vec, &mut py);
            let ypy = dot(&y_vec, &py);
            if ypy > T::zero() {
                gamma = sy / ypy;
            }
            if mem.len() == opts.memory {
                mem.pop_front();
            }
            mem.push_back((s_vec, y_vec, T::one() / sy));
        }
        let decrease = T::one() - (jn - j).exp();
        j = jn;
        history.push(j.exp());
        last_decrease = decrease;
        if decrease < opts.tolerance {
            small += 1;
            if small >= opts.patience {
                let res = residual(&u, &z);
                return Ok(finish(grid, u, j, it + 1, res, history));
            }
        } else {
            small = 0;
        }
    }
    Err(Error::NoConvergence {
        p: p.to_f64_lossy(),
        iterations: opts.max_iterations,
        last_decrease: last_decrease.to_f64_lossy(),
        best: u.iter().map(|v| v.to_f64_lossy()).collect(),
        best_lambda: j.exp().to_f64_lossy(),
    })
}

fn finish<T: Scalar>(grid: &Arc<Grid<T>>, u: Vec<T>, j: T, iterations: usize, residual: T, history: Vec<T>) -> PSolution<T> {
    PSolution {
        u: ScalarField { grid: grid.clone(), values: u, boundary_value: T::zero() },
        lambda: j.exp(),
        iterations,
        residual,
        history,
    }
}
