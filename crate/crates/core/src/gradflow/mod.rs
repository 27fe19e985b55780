//! Normalized gradient flows, the sphere-max scheme and their diagnostics.

use std::fmt::Write as _;

use crate::eigensolver::GroundState;
use crate::field::{gradient, hessian, ScalarField, VectorField};
use crate::supconv::SupConvResult;
use crate::{Error, Point2, Report, Result, Scalar};

/// Why a trajectory ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Terminal {
    EnteredTarget,
    LeftGrid,
    Stalled,
    /// The time budget ran out first.
    MaxTime,
}

impl Terminal {
    pub fn tag(self) -> &'static str {
        match self {
            Terminal::EnteredTarget => "entered_target",
            Terminal::LeftGrid => "left_grid",
            Terminal::Stalled => "stalled",
            Terminal::MaxTime => "max_time",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowSample<T> {
    pub t: T,
    pub x: Point2<T>,
    pub u: T,
    pub grad_norm: T,
}

/// A sampled trajectory with uniform time step.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub samples: Vec<FlowSample<T>>,
    pub terminal: Terminal,
    /// `dt` for the ODE flow, `delta` for the sphere-max scheme.
    pub step: T,
    /// Crossing time of the stop level, linearly interpolated between samples.
    pub entry_time: Option<T>,
    /// Diagnostic slack `10 (h + step) Lip(grad f)` along the path.
    pub slack: T,
}

impl<T: Scalar> Trajectory<T> {
    /// CSV with header `t,x,y,u,gradnorm,terminal`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,x,y,u,gradnorm,terminal\n");
        for p in &self.samples {
            let _ = writeln!(s, "{},{},{},{},{},{}", p.t, p.x.x, p.x.y, p.u, p.grad_norm, self.terminal.tag());
        }
        s
    }

    pub fn points(&self) -> Vec<Point2<T>> {
        self.samples.iter().map(|s| s.x).collect()
    }

    pub fn last(&self) -> &FlowSample<T> {
        self.samples.last().expect("trajectories hold their start")
    }
}

/// A field prepared for repeated flows: interpolated gradient and Hessian norms.
pub struct Flow<'a, T> {
    f: &'a ScalarField<T>,
    grad: VectorField<T>,
    hess_norm: Vec<T>,
    /// `10^-6 max |grad f|`.
    pub stall_threshold: T,
}

impl<'a, T: Scalar> Flow<'a, T> {
    pub fn new(f: &'a ScalarField<T>) -> Self {
        let grad = gradient(f);
        let g = &*f.grid;
        let gmax = g.inside_nodes().map(|k| grad.components[k].norm()).fold(T::zero(), T::max);
        let hess_norm = hessian(f).iter().map(|m| m.norm()).collect();
        Self { f, grad, hess_norm, stall_threshold: T::lit(1e-6) * gmax }
    }

    pub fn field(&self) -> &ScalarField<T> {
        self.f
    }

    pub fn grad_at(&self, x: Point2<T>) -> Result<Point2<T>> {
        self.grad.interpolate(x)
    }

    fn direction(&self, x: Point2<T>) -> Option<Point2<T>> {
        let g = self.grad.interpolate(x).ok()?;
        let n = g.norm();
        (n > self.stall_threshold).then(|| g.scale(T::one() / n))
    }

    fn slack_along(&self, pts: &[Point2<T>], step: T) -> T {
        let g = &*self.f.grid;
        let lip = pts
            .iter()
            .map(|&p| {
                let (i, j) = g.nearest(p);
                self.hess_norm[g.idx(i, j)]
            })
            .fold(T::zero(), T::max);
        T::lit(10.0) * (g.h + step) * lip
    }

    fn start(&self, x0: Point2<T>) -> Result<FlowSample<T>> {
        let u = self.f.interpolate(x0)?;
        let gn = self.grad.interpolate(x0)?.norm();
        if !(gn > self.stall_threshold) {
            return Err(Error::CriticalStart(gn.to_f64_lossy()));
        }
        Ok(FlowSample { t: T::zero(), x: x0, u, grad_norm: gn })
    }

    /// Classical RK4 on `x' = grad f / |grad f|` until `stop(x, f(x))` holds.
    ///
    /// A step that would lower `f` ends the trajectory as stalled, so values
    /// along the samples never decrease.
    pub fn integrate(&self, x0: Point2<T>, dt: T, max_time: T, stop: impl Fn(Point2<T>, T) -> bool) -> Result<Trajectory<T>> {
        if !(dt > T::zero()) {
            return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
        }
        let first = self.start(x0)?;
        let mut samples = vec![first];
        let mut entry_time = None;
        let half = dt / T::lit(2.0);
        let terminal = if stop(x0, first.u) {
            entry_time = Some(T::zero());
            Terminal::EnteredTarget
        } else {
            loop {
                let cur = *samples.last().expect("non-empty");
                if cur.t >= max_time {
                    break Terminal::MaxTime;
                }
                let x = cur.x;
                let step = (|| {
                    let k1 = self.direction(x)?;
                    let k2 = self.direction(x + k1.scale(half))?;
                    let k3 = self.direction(x + k2.scale(half))?;
                    let k4 = self.direction(x + k3.scale(dt))?;
                    Some(x + (k1 + k2.scale(T::lit(2.0)) + k3.scale(T::lit(2.0)) + k4).scale(dt / T::lit(6.0)))
                })();
                let Some(xn) = step else {
                    break if self.stage_in_hull(x, dt) {
                        Terminal::Stalled
                    } else {
                        Terminal::LeftGrid
                    };
                };
                let Ok(un) = self.f.interpolate(xn) else {
                    break Terminal::LeftGrid;
                };
                let gn = self.grad.interpolate(xn).map(|g| g.norm()).unwrap_or(T::zero());
                if un < cur.u || !(gn > self.stall_threshold) {
                    break Terminal::Stalled;
                }
                samples.push(FlowSample { t: cur.t + dt, x: xn, u: un, grad_norm: gn });
                if stop(xn, un) {
                    entry_time = Some(cur.t + dt);
                    break Terminal::EnteredTarget;
                }
            }
        };
        let pts: Vec<Point2<T>> = samples.iter().map(|s| s.x).collect();
        let slack = self.slack_along(&pts, dt);
        Ok(Trajectory { samples, terminal, step: dt, entry_time, slack })
    }

    /// `true` when every RK4 stage point from `x` stays in the lattice hull.
    fn stage_in_hull(&self, x: Point2<T>, dt: T) -> bool {
        let g = &*self.f.grid;
        let r = dt;
        [Point2::new(r, T::zero()), Point2::new(-r, T::zero()), Point2::new(T::zero(), r), Point2::new(T::zero(), -r)]
            .iter()
            .all(|&d| g.in_hull(x + d))
    }

    /// Normalized gradient flow by RK4 until `f > stop_level`.
    pub fn ode(&self, x0: Point2<T>, dt: T, stop_level: T, max_time: T) -> Result<Trajectory<T>> {
        let mut tr = self.integrate(x0, dt, max_time, |_, u| u > stop_level)?;
        if tr.terminal == Terminal::EnteredTarget && tr.samples.len() >= 2 {
            let n = tr.samples.len();
            let (a, b) = (tr.samples[n - 2], tr.samples[n - 1]);
            let s = if b.u > a.u { (stop_level - a.u) / (b.u - a.u) } else { T::one() };
            tr.entry_time = Some(a.t + s.max(T::zero()).min(T::one()) * dt);
        }
        Ok(tr)
    }

    /// Sphere-max scheme: `x_j` maximises `f` on the circle of radius `delta`
    /// about `x_{j-1}`. Stops as [`Flow::ode`]; a step that does not raise `f`
    /// ends the trajectory as stalled.
    pub fn discrete(&self, x0: Point2<T>, delta: T, stop_level: T, max_steps: usize) -> Result<Trajectory<T>> {
        if !(delta > T::zero()) {
            return Err(Error::InvalidArgument(format!("step must be positive, got {delta}")));
        }
        let first = self.start(x0)?;
        let mut samples = vec![first];
        let mut entry_time = None;
        let terminal = if first.u > stop_level {
            entry_time = Some(T::zero());
            Terminal::EnteredTarget
        } else {
            loop {
                let cur = *samples.last().expect("non-empty");
                if samples.len() > max_steps {
                    break Terminal::MaxTime;
                }
                let Ok((un, xn)) = self.f.sphere_max_refined(cur.x, delta, 64) else {
                    break Terminal::LeftGrid;
                };
                if !(un > cur.u) {
                    break Terminal::Stalled;
                }
                let gn = self.grad.interpolate(xn).map(|g| g.norm()).unwrap_or(T::zero());
                samples.push(FlowSample { t: cur.t + delta, x: xn, u: un, grad_norm: gn });
                if un > stop_level {
                    let s = (stop_level - cur.u) / (un - cur.u);
                    entry_time = Some(cur.t + s * delta);
                    break Terminal::EnteredTarget;
                }
                if !(gn > self.stall_threshold) {
                    break Terminal::Stalled;
                }
            }
        };
        let pts: Vec<Point2<T>> = samples.iter().map(|s| s.x).collect();
        let slack = self.slack_along(&pts, delta);
        Ok(Trajectory { samples, terminal, step: delta, entry_time, slack })
    }
}

/// Normalized gradient flow of `f` from `x0` by RK4.
pub fn flow_ode<T: Scalar>(f: &ScalarField<T>, x0: Point2<T>, dt: T, stop_level: T, max_time: T) -> Result<Trajectory<T>> {
    Flow::new(f).ode(x0, dt, stop_level, max_time)
}

/// Sphere-max scheme from `x0` with step `delta`.
pub fn flow_discrete<T: Scalar>(f: &ScalarField<T>, x0: Point2<T>, delta: T, stop_level: T) -> Result<Trajectory<T>> {
    let g = &*f.grid;
    let span = (g.far_corner() - g.origin).norm();
    let steps = (T::lit(4.0) * span / delta).ceil().to_usize().unwrap_or(usize::MAX);
    Flow::new(f).discrete(x0, delta, stop_level, steps)
}

/// Monotonicity and convexity along a trajectory, with the trajectory's own slack.
pub fn flow_diagnostics<T: Scalar>(traj: &Trajectory<T>) -> Report {
    flow_diagnostics_with(traj, traj.slack)
}

/// (a) `grad_norm` non-decreasing within `slack`; (b) second differences of
/// `u` at least `-slack * step`; (c) the affinity defect `max |second
/// difference|` and the relative spread of `grad_norm`, recorded.
pub fn flow_diagnostics_with<T: Scalar>(traj: &Trajectory<T>, slack: T) -> Report {
    let mut rep = Report::new("flow_diagnostics");
    let s = &traj.samples;
    rep.record("samples", s.len() as f64);
    if s.len() < 3 {
        rep.note("too few samples");
        rep.fail();
        return rep;
    }
    let drop = s.windows(2).map(|w| w[0].grad_norm - w[1].grad_norm).fold(T::neg_infinity(), T::max);
    let second: Vec<T> = s.windows(3).map(|w| w[2].u - T::lit(2.0) * w[1].u + w[0].u).collect();
    let concave = second.iter().map(|&v| -v).fold(T::neg_infinity(), T::max);
    let defect = second.iter().map(|v| v.abs()).fold(T::zero(), T::max);
    let (gmin, gmax, gsum) = s.iter().fold((T::infinity(), T::zero(), T::zero()), |(a, b, c), p| (a.min(p.grad_norm), b.max(p.grad_norm), c + p.grad_norm));
    let mean = gsum / T::from_usize_lossy(s.len());
    rep.check("grad_norm_decrease", drop.max(T::zero()).to_f64_lossy(), slack.to_f64_lossy());
    rep.check("u_concavity", concave.max(T::zero()).to_f64_lossy(), (slack * traj.step).to_f64_lossy());
    rep.record("affinity_defect", defect.to_f64_lossy());
    rep.record("grad_norm_spread", ((gmax - gmin) / mean).to_f64_lossy());
    rep.record("u_nondecreasing", if s.windows(2).all(|w| w[1].u >= w[0].u) { 1.0 } else { 0.0 });
    rep.note(format!("terminal={}", traj.terminal.tag()));
    rep
}

/// Symmetric Hausdorff distance between the sample sets of two trajectories.
pub fn trajectory_distance<T: Scalar>(a: &Trajectory<T>, b: &Trajectory<T>) -> T {
    crate::geometry::hausdorff(&a.points(), &b.points())
}

/// Every `stride`-th node of `set`, in storage order.
fn pick(set: &[bool], count: usize) -> Vec<usize> {
    let nodes: Vec<usize> = (0..set.len()).filter(|&k| set[k]).collect();
    if nodes.is_empty() || count == 0 {
        return Vec::new();
    }
    let stride = (nodes.len() / count).max(1);
    nodes.into_iter().step_by(stride).take(count).collect()
}

/// Gradient bounds along the flow of `u^eps` from the boundary of `Omega_eps`.
///
/// Expects `sc` and `gs` in the frame with `Lambda_inf = 1` (`max u = 1`).
/// Checks along `n_start` trajectories, up to entry into `M_eps`, that
/// `|grad u^eps|` is non-decreasing and stays above `1 - b_eps`, both within
/// `slack = 2 (h + eps)`. Samples within `2h` (in value) of the level of
/// `M_eps` are skipped: interpolated gradients there straddle the ridge. Then the same lower bound at every node of
/// `Omega_eps \ M_eps`, passing when at least 99% hold. The entry time bound
/// `T <= max u^eps / alpha_eps` is checked per trajectory.
pub fn check_propagation_bound<T: Scalar>(sc: &SupConvResult<T>, gs: &GroundState<T>, n_start: usize) -> Result<Report> {
    if sc.b_eps >= T::one() {
        return Err(Error::HypothesisViolated(sc.b_eps.to_f64_lossy()));
    }
    let mut rep = Report::new("propagation_bound");
    let g = &**sc.grid();
    let h = g.h;
    let umax = gs.u.max_inside();
    if (umax - T::one()).abs() > T::lit(1e-6) {
        rep.note(format!("max u = {umax}, not the unit frame"));
    }
    rep.record("b_eps", sc.b_eps.to_f64_lossy());
    rep.record("c_eps", sc.c_eps.to_f64_lossy());
    let slack = T::lit(2.0) * (h + sc.epsilon);
    let floor = T::one() - sc.b_eps - slack;
    let level = (T::one() - sc.c_eps) * umax;
    let flow = Flow::new(&sc.u_eps);
    let grad = gradient(&sc.u_eps);

    let outside_m: Vec<usize> = (0..g.len()).filter(|&k| sc.omega_mask[k] && !sc.m_mask[k]).collect();
    let alpha = outside_m.iter().map(|&k| grad.components[k].norm()).fold(T::infinity(), T::min);
    let ue_max = sc.u_eps.max_inside();
    let t_bound = ue_max / alpha;
    rep.record("alpha_eps", alpha.to_f64_lossy());

    let starts = pick(&sc.omega_boundary(), n_start);
    let mut worst_drop = T::zero();
    let mut worst_floor = T::zero();
    let mut worst_time = T::neg_infinity();
    let mut launched = 0usize;
    let mut entered = 0usize;
    for k in starts {
        let x0 = g.node_point(k);
        let Ok(tr) = flow.ode(x0, h, level, T::lit(4.0) * ue_max / alpha.max(T::lit(1e-3))) else {
            continue;
        };
        launched += 1;
        if tr.terminal == Terminal::EnteredTarget {
            entered += 1;
        }
        let upto: Vec<&FlowSample<T>> = tr.samples.iter().filter(|s| s.u <= level - T::lit(2.0) * h).collect();
        for w in upto.windows(2) {
            worst_drop = worst_drop.max(w[0].grad_norm - w[1].grad_norm);
        }
        for s in &upto {
            worst_floor = worst_floor.max(floor - s.grad_norm);
        }
        if let Some(t) = tr.entry_time {
            worst_time = worst_time.max(t - t_bound);
        }
    }
    rep.record("trajectories", launched as f64);
    rep.record("entered_m_eps", entered as f64);
    rep.check("grad_norm_decrease", worst_drop.to_f64_lossy(), slack.to_f64_lossy());
    rep.check("below_floor_along_flow", worst_floor.to_f64_lossy(), 0.0);
    if worst_time.is_finite() {
        rep.check("entry_time_excess", worst_time.to_f64_lossy(), (T::lit(2.0) * h).to_f64_lossy());
    }
    let good = outside_m.iter().filter(|&&k| grad.components[k].norm() >= floor).count();
    let frac = if outside_m.is_empty() { 1.0 } else { good as f64 / outside_m.len() as f64 };
    rep.record("nodes_checked", outside_m.len() as f64);
    rep.record("node_fraction", frac);
    if frac < 0.99 {
        rep.fail();
    }
    Ok(rep)
}

/// Backward flows from nodes of `Omega_eps \ M_eps` (every `stride`-th) and
/// the fraction that reaches the boundary of `Omega_eps`.
///
/// A backward flow ends when it reaches a node outside `Omega_eps` or drops to
/// `u^eps <= m_eps + h`. Pass iff at least 95% do. Uncovered start nodes are
/// counted and their mean position noted.
pub fn coverage<T: Scalar>(sc: &SupConvResult<T>, stride: usize) -> Report {
    let mut rep = Report::new("coverage");
    let g = &**sc.grid();
    let neg = ScalarField { grid: sc.u_eps.grid.clone(), values: sc.u_eps.values.iter().map(|&v| -v).collect(), boundary_value: -sc.u_eps.boundary_value };
    let flow = Flow::new(&neg);
    let nodes: Vec<usize> = (0..g.len()).filter(|&k| sc.omega_mask[k] && !sc.m_mask[k]).step_by(stride.max(1)).collect();
    let span = (g.far_corner() - g.origin).norm();
    let stop_u = sc.m_eps + g.h;
    let mut covered = 0usize;
    let mut tried = 0usize;
    let mut miss = Point2::origin();
    for &k in &nodes {
        tried += 1;
        let stop = |x: Point2<T>, v: T| {
            let (i, j) = g.nearest(x);
            !sc.omega_mask[g.idx(i, j)] || -v <= stop_u
        };
        match flow.integrate(g.node_point(k), g.h / T::lit(2.0), T::lit(2.0) * span, stop) {
            Ok(tr) if tr.terminal == Terminal::EnteredTarget => covered += 1,
            Err(Error::CriticalStart(_)) => tried -= 1,
            _ => miss = miss + g.node_point(k),
        }
    }
    let frac = if tried == 0 { 1.0 } else { covered as f64 / tried as f64 };
    rep.record("starts", tried as f64);
    rep.record("covered_fraction", frac);
    let missed = tried - covered;
    rep.record("uncovered", missed as f64);
    if missed > 0 {
        let c = miss.scale(T::one() / T::from_usize_lossy(missed));
        rep.note(format!("uncovered mean position ({}, {})", c.x, c.y));
    }
    if frac < 0.95 {
        rep.fail();
    }
    rep
}

#[cfg(test)]
mod tests;
