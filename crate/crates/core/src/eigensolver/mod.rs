//! First Dirichlet eigenfunctions of the p-Laplacian and their p -> infinity limit.

mod energy;
mod precond;
mod solver;

use std::fmt::Write as _;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use energy::PEnergy;
pub use precond::PoissonPreconditioner;
pub use solver::{solve_p_ground_state, PSolution};

use crate::field::{Grid, ScalarField};
use crate::geometry::ConvexDomain;
use crate::{Error, Report, Result, Scalar};

/// Knobs of the fixed-p solver and of the p continuation.
#[derive(Debug, Clone)]
pub struct SolverOptions<T> {
    pub max_iterations: usize,
    /// Armijo sufficient-decrease constant.
    pub armijo_c1: T,
    /// Step shrink factor per backtrack.
    pub backtrack: T,
    pub max_backtracks: usize,
    /// Curvature pairs kept by the quasi-Newton update.
    pub memory: usize,
    /// Relative decrease of `Lambda_p` below which a step counts as stalled.
    pub tolerance: T,
    /// Consecutive stalled steps that end a solve.
    pub patience: usize,
    pub p_schedule: Vec<T>,
    pub seed_field: Option<ScalarField<T>>,
    /// Sup-norm change between consecutive normalised iterates, relative to
    /// `max d`, below which the continuation counts as converged.
    pub sup_tolerance: T,
}

impl<T: Scalar> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            max_iterations: 20_000,
            armijo_c1: T::lit(1e-4),
            backtrack: T::lit(0.5),
            max_backtracks: 40,
            memory: 12,
            tolerance: T::lit(1e-10),
            patience: 10,
            p_schedule: [2.0, 4.0, 8.0, 16.0, 32.0, 64.0].iter().map(|&p| T::lit(p)).collect(),
            seed_field: None,
            sup_tolerance: T::lit(0.05),
        }
    }
}

impl<T: Scalar> SolverOptions<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > T::zero()) {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if self.p_schedule.is_empty() || !(self.p_schedule[0] >= T::lit(2.0)) {
            return Err(Error::InvalidArgument("p schedule must start at 2 or above".into()));
        }
        if self.p_schedule.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("p schedule must be strictly increasing".into()));
        }
        if !(self.backtrack > T::zero() && self.backtrack < T::one()) || self.max_iterations == 0 {
            return Err(Error::InvalidArgument("invalid line-search parameters".into()));
        }
        Ok(())
    }
}

/// One step of the p continuation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrailEntry<T> {
    pub p: T,
    pub lambda: T,
    pub iterations: usize,
    pub residual: T,
}

/// How the final field was scaled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalization<T> {
    /// Target maximum: the largest distance to the boundary.
    pub max_distance: T,
    /// Factor applied to the last unit-`L^p` iterate.
    pub factor: T,
}

/// Limit of p-eigenfunctions normalised by `max u = max d`.
#[derive(Debug, Clone)]
pub struct GroundState<T> {
    pub u: ScalarField<T>,
    pub trail: Vec<TrailEntry<T>>,
    pub normalization: Normalization<T>,
    pub converged: bool,
    /// Sup-norm change between consecutive normalised iterates, relative to `max d`.
    pub sup_changes: Vec<T>,
}

impl<T: Scalar> GroundState<T> {
    /// Wraps a given field, normalised to `max u = max d`.
    pub fn from_field(u: ScalarField<T>, dom: &ConvexDomain<T>) -> Self {
        let md = dom.max_distance();
        let factor = md / u.max_inside();
        Self {
            u: u.scaled(factor),
            trail: Vec::new(),
            normalization: Normalization { max_distance: md, factor },
            converged: true,
            sup_changes: Vec::new(),
        }
    }

    pub fn h(&self) -> T {
        self.u.grid.h
    }

    /// CSV with header `p,lambda_p,iterations,residual`.
    pub fn trail_csv(&self) -> String {
        let mut s = String::from("p,lambda_p,iterations,residual\n");
        for e in &self.trail {
            let _ = writeln!(s, "{},{},{},{}", e.p, e.lambda, e.iterations, e.residual);
        }
        s
    }

    pub fn last_lambda(&self) -> Option<T> {
        self.trail.last().map(|e| e.lambda)
    }
}

/// Runs the fixed-p solver along the schedule with warm starts.
pub fn infinity_ground_state<T: Scalar>(dom: &ConvexDomain<T>, grid: &Arc<Grid<T>>, opts: &SolverOptions<T>) -> Result<GroundState<T>> {
    opts.validate()?;
    let md = dom.max_distance();
    let mut trail = Vec::new();
    let mut sup_changes = Vec::new();
    let mut prev: Option<ScalarField<T>> = None;
    let mut prev_norm: Option<ScalarField<T>> = None;
    let mut factor = T::one();
    for &p in &opts.p_schedule {
        let sol = solve_p_ground_state(dom, grid, p, opts, prev.as_ref())?;
        trail.push(TrailEntry { p, lambda: sol.lambda, iterations: sol.iterations, residual: sol.residual });
        factor = md / sol.u.max_inside();
        let normed = sol.u.scaled(factor);
        if let Some(q) = &prev_norm {
            sup_changes.push(normed.sup_diff(q) / md);
        }
        prev_norm = Some(normed);
        prev = Some(sol.u);
    }
    let last = trail.last().expect("non-empty schedule");
    let linf = dom.lambda_infinity();
    if (last.lambda - linf).abs() > T::lit(0.5) * linf {
        return Err(Error::ScheduleFailure {
            p: last.p.to_f64_lossy(),
            lambda_p: last.lambda.to_f64_lossy(),
            lambda_inf: linf.to_f64_lossy(),
        });
    }
    let converged = sup_changes.last().is_some_and(|&c| c < opts.sup_tolerance);
    Ok(GroundState {
        u: prev_norm.expect("non-empty schedule"),
        trail,
        normalization: Normalization { max_distance: md, factor },
        converged,
        sup_changes,
    })
}

/// Midpoint log-concavity of `u` on random lattice segments.
///
/// Endpoints are inside nodes with `u > 0.01 max u` and even index offsets, so
/// the midpoint is a node. Slack per segment is `10 h max u / min` of the
/// three sampled values.
pub fn log_concavity_check_field<T: Scalar>(u: &ScalarField<T>, nsegments: usize, seed: u64) -> Report {
    let g = &*u.grid;
    let umax = u.max_inside();
    let nodes: Vec<usize> = g.inside_nodes().filter(|&k| u.values[k] > T::lit(0.01) * umax).collect();
    let mut rep = Report::new("log_concavity");
    if nodes.len() < 2 {
        rep.note("vacuous: fewer than two admissible nodes");
        return rep;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = T::neg_infinity();
    let mut failures = 0usize;
    let mut tested = 0usize;
    let mut attempts = 0usize;
    while tested < nsegments && attempts < 50 * nsegments {
        attempts += 1;
        let a = nodes[rng.gen_range(0..nodes.len())];
        let b = nodes[rng.gen_range(0..nodes.len())];
        let ((ia, ja), (ib, jb)) = (g.ij(a), g.ij(b));
        if a == b || (ia + ib) % 2 != 0 || (ja + jb) % 2 != 0 {
            continue;
        }
        let m = g.idx((ia + ib) / 2, (ja + jb) / 2);
        let (ua, ub, um) = (u.values[a], u.values[b], u.values[m]);
        if !g.inside(m) || !(um > T::zero()) {
            continue;
        }
        tested += 1;
        let slack = T::lit(10.0) * g.h * umax / ua.min(ub).min(um);
        let gap = (ua.ln() + ub.ln()) / T::lit(2.0) - um.ln() - slack;
        worst = worst.max(gap);
        if gap > T::zero() {
            failures += 1;
        }
    }
    rep.record("segments", tested as f64);
    rep.check("failures", failures as f64, 0.0);
    rep.record("worst_excess", worst.to_f64_lossy());
    rep
}

/// [`log_concavity_check_field`] on a ground state.
pub fn log_concavity_check<T: Scalar>(gs: &GroundState<T>, nsegments: usize, seed: u64) -> Report {
    log_concavity_check_field(&gs.u, nsegments, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::rasterize;
    use crate::Point2;

    #[test]
    fn options_validation() {
        let mut o = SolverOptions::<f64>::default();
        assert!(o.validate().is_ok());
        o.p_schedule = vec![1.5, 4.0];
        assert!(o.validate().is_err());
        o.p_schedule = vec![2.0, 2.0];
        assert!(o.validate().is_err());
        o = SolverOptions { tolerance: 0.0, ..Default::default() };
        assert!(o.validate().is_err());
    }

    #[test]
    fn log_concavity_examples() {
        let dom = ConvexDomain::<f64>::unit_disc();
        let g = Arc::new(rasterize(&dom, 1.0 / 128.0).unwrap());
        let d = ScalarField::distance(&dom, g.clone());
        assert!(log_concavity_check_field(&d, 2000, 1).pass);
        let bump = ScalarField::from_fn(g.clone(), 0.0, |p: Point2<f64>| (-p.norm_sq()).exp());
        assert!(log_concavity_check_field(&bump, 2000, 2).pass);
        let bowl = ScalarField::from_fn(g.clone(), 0.0, |p: Point2<f64>| p.norm_sq() + 0.1);
        assert!(!log_concavity_check_field(&bowl, 2000, 3).pass);
    }

    #[test]
    fn trail_csv_header() {
        let dom = ConvexDomain::<f64>::unit_disc();
        let g = Arc::new(rasterize(&dom, 0.125).unwrap());
        let mut gs = GroundState::from_field(ScalarField::distance(&dom, g), &dom);
        gs.trail.push(TrailEntry { p: 2.0, lambda: 2.5, iterations: 3, residual: 0.01 });
        assert_eq!(gs.trail_csv(), "p,lambda_p,iterations,residual\n2,2.5,3,0.01\n");
    }
}
