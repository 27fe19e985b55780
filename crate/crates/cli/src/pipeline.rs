//! rasterize -> eigensolve -> supconv / gradflow / verify -> artifacts.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use infground::eigensolver::{infinity_ground_state, log_concavity_check};
use infground::field::{mask_pgm, rasterize, NodeKind, ScalarField};
use infground::geometry::is_stadium_like;
use infground::gradflow::{check_propagation_bound, coverage, flow_diagnostics, flow_discrete, flow_ode, trajectory_distance};
use infground::supconv::{check_lemma_approx1, q_region_and_supine, sup_convolve};
use infground::verify::{
    boundary_gradient_profile, compare_with_distance, eikonal_comparison, ground_state_residual, residual_report,
    rigidity_test, s_minus_check, semiconcavity_test,
};
use infground::{Field, GroundState, Report, SupConv, REPORT_CSV_HEADER};
use log::info;

use crate::config::ExperimentConfig;

/// Environment variable prefixed to relative output directories.
pub const OUT_ROOT_ENV: &str = "INFGROUND_OUT_ROOT";

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("solver error: {0}")]
    Solver(#[from] infground::Error),
}

pub struct RunOutcome {
    pub dir: PathBuf,
    pub reports: Vec<Report>,
}

/// Output directory after the [`OUT_ROOT_ENV`] override.
pub fn resolve_out(out: &Path) -> PathBuf {
    match std::env::var_os(OUT_ROOT_ENV) {
        Some(root) if out.is_relative() => PathBuf::from(root).join(out),
        _ => out.to_path_buf(),
    }
}

/// Serialized artifact writer that keeps the MANIFEST current.
struct Artifacts {
    dir: PathBuf,
    files: Vec<String>,
    seed: u64,
}

impl Artifacts {
    fn write(&mut self, name: &str, bytes: impl AsRef<[u8]>) -> Result<(), RunError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|source| RunError::Io { path, source })?;
        self.files.push(name.to_string());
        Ok(())
    }

    /// `<stem>.pgm` plus its `.scale` sidecar.
    fn heatmap(&mut self, stem: &str, f: &Field) -> Result<(), RunError> {
        let (bytes, lo, hi) = f.to_pgm();
        self.write(&format!("{stem}.pgm"), bytes)?;
        self.write(&format!("{stem}.pgm.scale"), format!("min={lo}\nmax={hi}\nlevels=65535\n"))
    }

    fn manifest(&self, status: &str, error: Option<&str>) -> Result<(), RunError> {
        let mut s = format!("status={status}\nseed={}\n", self.seed);
        if let Some(e) = error {
            let _ = writeln!(s, "error={}", e.replace('\n', " "));
        }
        for f in &self.files {
            let _ = writeln!(s, "file={f}");
        }
        let path = self.dir.join("MANIFEST");
        fs::write(&path, s).map_err(|source| RunError::Io { path, source })
    }
}

/// Runs the configured pipeline into `dir`.
///
/// A solver failure leaves the artifacts written so far and a MANIFEST with
/// `status=incomplete`.
pub fn run(cfg: &ExperimentConfig, dir: &Path) -> Result<RunOutcome, RunError> {
    fs::create_dir_all(dir).map_err(|source| RunError::Io { path: dir.to_path_buf(), source })?;
    let mut art = Artifacts { dir: dir.to_path_buf(), files: Vec::new(), seed: cfg.seed };
    art.manifest("incomplete", None)?;
    let gs = match solve(cfg, &mut art) {
        Ok(gs) => gs,
        Err(e) => {
            art.manifest("incomplete", Some(&e.to_string()))?;
            return Err(e);
        }
    };
    let reports = run_checks(cfg, &gs, &mut art)?;
    let mut csv = format!("{REPORT_CSV_HEADER}\n");
    let mut summary = String::new();
    for r in &reports {
        for row in r.csv_rows() {
            let _ = writeln!(csv, "{row}");
        }
        let _ = writeln!(summary, "{}", summary_line(r));
    }
    art.write("checks.csv", csv)?;
    art.write("summary.txt", summary)?;
    art.manifest("complete", None)?;
    Ok(RunOutcome { dir: dir.to_path_buf(), reports })
}

/// `name: pass|fail label=value ...`
pub fn summary_line(r: &Report) -> String {
    let mut s = format!("{}: {}", r.name, if r.pass { "pass" } else { "fail" });
    for m in &r.measurements {
        let _ = write!(s, " {}={:.6}", m.label, m.value);
    }
    s
}

fn solve(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<GroundState, RunError> {
    let t0 = Instant::now();
    let grid = Arc::new(rasterize(&cfg.domain, cfg.h)?);
    let d = ScalarField::distance(&cfg.domain, grid.clone());
    art.write("distance.csv", d.to_csv())?;
    art.heatmap("distance", &d)?;
    info!("{} nodes, {} inside", grid.len(), grid.interior_count());
    let gs = infinity_ground_state(&cfg.domain, &grid, &cfg.solver_options())?;
    info!("ground state in {:.1?}", t0.elapsed());
    art.write("trail.csv", gs.trail_csv())?;
    art.write("u.csv", gs.u.to_csv())?;
    art.heatmap("u", &gs.u)?;
    Ok(gs)
}

fn failed(name: &str, e: impl std::fmt::Display) -> Report {
    let mut r = Report::new(name);
    r.note(e.to_string());
    r.fail();
    r
}

fn renamed(mut r: Report, name: impl Into<String>) -> Report {
    r.name = name.into();
    r
}

fn run_checks(cfg: &ExperimentConfig, gs: &GroundState, art: &mut Artifacts) -> Result<Vec<Report>, RunError> {
    let dom = &cfg.domain;
    let g = gs.u.grid.clone();
    let h = g.h;
    let mut out = Vec::new();
    let needs_sup = ["lemma_approx1", "q_region_supine", "propagation_bound", "coverage"].iter().any(|c| cfg.wants(c));
    let sups: Vec<(f64, infground::Result<SupConv>)> =
        if needs_sup { cfg.epsilons.iter().map(|&e| (e, sup_convolve(&gs.u, e))).collect() } else { Vec::new() };
    for (i, (_, sc)) in sups.iter().enumerate() {
        if let Ok(sc) = sc {
            art.heatmap(&format!("supconv_{i}_u_eps"), &sc.u_eps)?;
            for (name, mask) in sc.masks() {
                art.write(&format!("supconv_{i}_{name}.pgm"), mask_pgm(&g, mask))?;
            }
        }
    }
    for check in &cfg.checks {
        let t0 = Instant::now();
        match check.as_str() {
            "eigenvalue_limit" => out.push(eigenvalue_limit(gs, dom.lambda_infinity())),
            "log_concavity" => out.push(log_concavity_check(gs, cfg.segments, cfg.seed)),
            "is_stadium_like" => out.push(is_stadium_like(dom, 2.0 * h).0),
            "boundary_flatness" => out.push(renamed(boundary_gradient_profile(gs, dom, 256), "boundary_flatness")),
            "compare_with_distance" => out.push(compare_with_distance(gs, dom)),
            "ground_state_residual" => {
                let r = ground_state_residual(gs, dom);
                art.write("residual.csv", r.to_csv())?;
                out.push(residual_report(&r));
            }
            "rigidity_test" => out.push(rigidity_test(gs, dom)),
            "eikonal_comparison" => out.push(eikonal_comparison(&gs.u, dom, 0.1)),
            "semiconcavity" => {
                let reach = (3.0 * h).max(0.1 * dom.max_distance());
                let region: Vec<bool> = (0..g.len())
                    .map(|k| g.mask[k] == NodeKind::Interior && dom.distance_or_zero(g.node_point(k)) >= reach)
                    .collect();
                out.push(semiconcavity_test(&gs.u, &region, cfg.segments, cfg.seed.wrapping_add(1)));
            }
            "s_minus" => out.push(s_minus_check(&gs.u, 50, 0.05, cfg.seed.wrapping_add(2))),
            "lemma_approx1" => {
                let ok: Vec<SupConv> = sups.iter().filter_map(|(_, r)| r.as_ref().ok().cloned()).collect();
                let mut r = check_lemma_approx1(&gs.u, &ok);
                for (e, res) in &sups {
                    if let Err(err) = res {
                        r.note(format!("eps={e}: {err}"));
                        r.fail();
                    }
                }
                out.push(r);
            }
            "q_region_supine" => {
                for (e, sc) in &sups {
                    let name = format!("q_region_supine[eps={e}]");
                    out.push(match sc {
                        Ok(sc) => renamed(q_region_and_supine(&gs.u, sc), name),
                        Err(err) => failed(&name, err),
                    });
                }
            }
            "propagation_bound" => {
                for (e, sc) in &sups {
                    let name = format!("propagation_bound[eps={e}]");
                    let r = sc.as_ref().map_err(|e| e.to_string()).and_then(|sc| {
                        check_propagation_bound(sc, gs, cfg.n_start).map_err(|e| e.to_string())
                    });
                    out.push(match r {
                        Ok(r) => renamed(r, name),
                        Err(err) => failed(&name, err),
                    });
                }
            }
            "coverage" => {
                for (e, sc) in &sups {
                    let name = format!("coverage[eps={e}]");
                    out.push(match sc {
                        Ok(sc) => renamed(coverage(sc, 4), name),
                        Err(err) => failed(&name, err),
                    });
                }
            }
            "flow_diagnostics" => {
                let (r, csv) = flows(cfg, gs);
                art.write("flows.csv", csv)?;
                out.push(r);
            }
            other => unreachable!("unregistered check {other}"),
        }
        info!("{check} in {:.1?}", t0.elapsed());
    }
    Ok(out)
}

fn eigenvalue_limit(gs: &GroundState, linf: f64) -> Report {
    let mut r = Report::new("eigenvalue_limit");
    let Some(last) = gs.trail.last() else {
        return failed("eigenvalue_limit", "empty trail");
    };
    r.record("p", last.p);
    r.record("lambda_p", last.lambda);
    r.record("lambda_inf", linf);
    r.check("relative_gap", (last.lambda - linf).abs() / linf, 0.1);
    r.record("sup_change", gs.sup_changes.last().copied().unwrap_or(f64::NAN));
    r
}

/// Normalized flows from `n_start` boundary points moved a tenth of `max d`
/// inward, stopped at `u = 0.8 max u`.
fn flows(cfg: &ExperimentConfig, gs: &GroundState) -> (Report, String) {
    let dom = &cfg.domain;
    let md = dom.max_distance();
    let level = 0.8 * gs.u.max_inside();
    let mut r = Report::new("flow_diagnostics");
    let mut csv = String::from("trajectory,t,x,y,u,gradnorm,terminal\n");
    let mut failures = 0usize;
    let mut worst: Vec<(String, f64)> = Vec::new();
    let mut gap = 0.0f64;
    for (i, (y, nu)) in dom.boundary_samples(cfg.n_start).into_iter().enumerate() {
        let x0 = y + nu.scale(0.1 * md);
        let traj = match flow_ode(&gs.u, x0, cfg.dt, level, 2.0 * md) {
            Ok(t) => t,
            Err(e) => {
                r.note(format!("start {i}: {e}"));
                failures += 1;
                continue;
            }
        };
        for line in traj.to_csv().lines().skip(1) {
            let _ = writeln!(csv, "{i},{line}");
        }
        let d = flow_diagnostics(&traj);
        failures += usize::from(!d.pass);
        for m in &d.measurements {
            match worst.iter_mut().find(|w| w.0 == m.label) {
                Some(w) => w.1 = w.1.max(m.value),
                None => worst.push((m.label.clone(), m.value)),
            }
        }
        if let Ok(disc) = flow_discrete(&gs.u, x0, cfg.delta, level) {
            gap = gap.max(trajectory_distance(&traj, &disc));
        }
    }
    r.record("trajectories", cfg.n_start as f64);
    for (label, v) in worst {
        r.record(format!("max_{label}"), v);
    }
    r.record("max_ode_discrete_distance", gap);
    r.check("failures", failures as f64, 0.0);
    (r, csv)
}
