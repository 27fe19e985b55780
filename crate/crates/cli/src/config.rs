//! `key = value` experiment configuration with `[section]` headers.
//!
//! ```text
//! # comment
//! [domain]
//! kind = stadium          # disc | square | rectangle | stadium | polygon | parallel_set
//! a = -1, 0
//! b = 1, 0
//! radius = 0.5
//!
//! [grid]
//! h = 1/128               # numbers accept a/b fractions
//!
//! [solver]
//! p_schedule = 2, 4, 8, 16, 32, 64
//! tolerance = 1e-10
//! patience = 10
//! max_iterations = 20000
//!
//! [supconv]
//! epsilon = 0.04, 0.01
//!
//! [flow]
//! dt = 0.005
//! delta = 0.01
//! n_start = 20
//!
//! [checks]
//! run = all               # or a comma list from CHECKS
//! segments = 400
//!
//! [output]
//! dir = out/stadium
//! seed = 1
//! ```
//!
//! Domain keys per kind: `disc` takes `center`, `radius`; `square` takes
//! `origin`, `side`; `rectangle` takes `origin`, `width`, `height`; `stadium`
//! takes `a`, `b`, `radius`; `polygon` takes `vertices = x,y; x,y; ...`
//! (counter-clockwise); `parallel_set` takes `vertices` and `radius`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use infground::geometry::ConvexDomain;
use infground::{Domain, Point, SolverOptions};

/// Every check the runner knows, in execution order.
pub const CHECKS: &[&str] = &[
    "eigenvalue_limit",
    "log_concavity",
    "is_stadium_like",
    "boundary_flatness",
    "compare_with_distance",
    "ground_state_residual",
    "rigidity_test",
    "eikonal_comparison",
    "semiconcavity",
    "s_minus",
    "lemma_approx1",
    "q_region_supine",
    "propagation_bound",
    "coverage",
    "flow_diagnostics",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}: {}", self.field, self.message),
            None => write!(f, "{}: {}", self.field, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn err(line: Option<usize>, field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError { line, field: field.to_string(), message: message.into() }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub domain: Domain,
    pub h: f64,
    pub p_schedule: Vec<f64>,
    pub tolerance: f64,
    pub patience: usize,
    pub max_iterations: usize,
    pub epsilons: Vec<f64>,
    pub dt: f64,
    pub delta: f64,
    pub n_start: usize,
    pub segments: usize,
    pub checks: Vec<String>,
    pub out: PathBuf,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            p_schedule: self.p_schedule.clone(),
            tolerance: self.tolerance,
            patience: self.patience,
            max_iterations: self.max_iterations,
            ..Default::default()
        }
    }

    pub fn wants(&self, check: &str) -> bool {
        self.checks.iter().any(|c| c == check)
    }
}

/// Parses a comma list of check names, `all` for the whole registry.
pub fn parse_checks(s: &str) -> Result<Vec<String>, ConfigError> {
    let names: Vec<&str> = s.split(',').map(str::trim).filter(|t| !t.is_empty()).collect();
    if names == ["all"] {
        return Ok(CHECKS.iter().map(|c| c.to_string()).collect());
    }
    if names.is_empty() {
        return Err(err(None, "checks", "empty check list"));
    }
    for n in &names {
        if !CHECKS.contains(n) {
            return Err(err(None, "checks", format!("unknown check `{n}`")));
        }
    }
    // Registry order keeps outputs independent of how the list was written.
    Ok(CHECKS.iter().filter(|c| names.contains(c)).map(|c| c.to_string()).collect())
}

struct Entry {
    line: usize,
    value: String,
    used: bool,
}

struct Table(BTreeMap<String, Entry>);

impl Table {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.0.get_mut(key).map(|e| {
            e.used = true;
            (e.line, e.value.clone())
        })
    }

    fn required(&mut self, key: &str) -> Result<(usize, String), ConfigError> {
        self.take(key).ok_or_else(|| err(None, key, "missing"))
    }

    fn number(&mut self, key: &str, default: Option<f64>) -> Result<f64, ConfigError> {
        match (self.take(key), default) {
            (Some((line, v)), _) => parse_number(&v).map_err(|m| err(Some(line), key, m)),
            (None, Some(d)) => Ok(d),
            (None, None) => Err(err(None, key, "missing")),
        }
    }

    fn positive(&mut self, key: &str, default: Option<f64>) -> Result<f64, ConfigError> {
        let line = self.0.get(key).map(|e| e.line);
        let v = self.number(key, default)?;
        if !(v > 0.0) || !v.is_finite() {
            return Err(err(line, key, format!("must be positive, got {v}")));
        }
        Ok(v)
    }

    fn count(&mut self, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.take(key) {
            Some((line, v)) => match v.parse::<usize>() {
                Ok(n) if n > 0 => Ok(n),
                _ => Err(err(Some(line), key, format!("expected a positive integer, got `{v}`"))),
            },
            None => Ok(default),
        }
    }

    fn list(&mut self, key: &str, default: &[f64]) -> Result<Vec<f64>, ConfigError> {
        match self.take(key) {
            Some((line, v)) => {
                let xs = v.split(',').map(|t| parse_number(t.trim())).collect::<Result<Vec<_>, _>>();
                let xs = xs.map_err(|m| err(Some(line), key, m))?;
                if xs.is_empty() || xs.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
                    return Err(err(Some(line), key, "expected positive numbers"));
                }
                Ok(xs)
            }
            None => Ok(default.to_vec()),
        }
    }

    fn point(&mut self, key: &str, default: Option<Point>) -> Result<Point, ConfigError> {
        match (self.take(key), default) {
            (Some((line, v)), _) => parse_point(&v).map_err(|m| err(Some(line), key, m)),
            (None, Some(p)) => Ok(p),
            (None, None) => Err(err(None, key, "missing")),
        }
    }

    fn vertices(&mut self, key: &str) -> Result<Vec<Point>, ConfigError> {
        let (line, v) = self.required(key)?;
        v.split(';').map(|t| parse_point(t.trim())).collect::<Result<_, _>>().map_err(|m| err(Some(line), key, m))
    }
}

fn parse_number(s: &str) -> Result<f64, String> {
    let bad = || format!("not a number: `{s}`");
    match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| bad())?;
            let b: f64 = b.trim().parse().map_err(|_| bad())?;
            if b == 0.0 {
                return Err(bad());
            }
            Ok(a / b)
        }
        None => s.trim().parse().map_err(|_| bad()),
    }
}

fn parse_point(s: &str) -> Result<Point, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected `x, y`, got `{s}`"));
    }
    Ok(Point::new(parse_number(parts[0].trim())?, parse_number(parts[1].trim())?))
}

/// Parses and validates a configuration text.
pub fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut section = String::new();
    let mut table = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| err(Some(line), content, "unterminated section header"))?;
            section = name.trim().to_string();
            continue;
        }
        let (k, v) = content.split_once('=').ok_or_else(|| err(Some(line), content, "expected `key = value`"))?;
        let key = format!("{section}.{}", k.trim());
        if table.insert(key.clone(), Entry { line, value: v.trim().to_string(), used: false }).is_some() {
            return Err(err(Some(line), &key, "duplicate key"));
        }
    }
    let mut t = Table(table);
    let cfg = build(&mut t)?;
    if let Some((k, e)) = t.0.iter().find(|(_, e)| !e.used) {
        return Err(err(Some(e.line), k, "unknown key"));
    }
    Ok(cfg)
}

fn build(t: &mut Table) -> Result<ExperimentConfig, ConfigError> {
    let domain = build_domain(t)?;
    let h = t.positive("grid.h", None)?;
    let p_schedule = t.list("solver.p_schedule", &[2.0, 4.0, 8.0, 16.0, 32.0, 64.0])?;
    let defaults = SolverOptions::default();
    let tolerance = t.positive("solver.tolerance", Some(defaults.tolerance))?;
    let patience = t.count("solver.patience", defaults.patience)?;
    let max_iterations = t.count("solver.max_iterations", defaults.max_iterations)?;
    let epsilons = t.list("supconv.epsilon", &[0.04, 0.01])?;
    let dt = t.positive("flow.dt", Some(h / 2.0))?;
    let delta = t.positive("flow.delta", Some(2.0 * h))?;
    let n_start = t.count("flow.n_start", 20)?;
    let segments = t.count("checks.segments", 400)?;
    let checks = match t.take("checks.run") {
        Some((line, v)) => parse_checks(&v).map_err(|e| ConfigError { line: Some(line), ..e })?,
        None => parse_checks("all")?,
    };
    let out = PathBuf::from(t.take("output.dir").map(|e| e.1).unwrap_or_else(|| "out".into()));
    let seed = match t.take("output.seed") {
        Some((line, v)) => v.parse().map_err(|_| err(Some(line), "output.seed", format!("not an unsigned integer: `{v}`")))?,
        None => 0,
    };
    let opts = SolverOptions { p_schedule: p_schedule.clone(), tolerance, ..Default::default() };
    opts.validate().map_err(|e| err(None, "solver", e.to_string()))?;
    Ok(ExperimentConfig {
        domain,
        h,
        p_schedule,
        tolerance,
        patience,
        max_iterations,
        epsilons,
        dt,
        delta,
        n_start,
        segments,
        checks,
        out,
        seed,
    })
}

fn build_domain(t: &mut Table) -> Result<Domain, ConfigError> {
    let (line, kind) = t.required("domain.kind")?;
    let dom = match kind.as_str() {
        "disc" => {
            let c = t.point("domain.center", Some(Point::origin()))?;
            ConvexDomain::disc(c, t.positive("domain.radius", Some(1.0))?)
        }
        "square" => {
            let o = t.point("domain.origin", Some(Point::origin()))?;
            ConvexDomain::square(o.x, o.y, t.positive("domain.side", Some(1.0))?)
        }
        "rectangle" => {
            let o = t.point("domain.origin", Some(Point::origin()))?;
            let w = t.positive("domain.width", None)?;
            ConvexDomain::rectangle(o.x, o.y, w, t.positive("domain.height", None)?)
        }
        "stadium" => {
            let a = t.point("domain.a", None)?;
            let b = t.point("domain.b", None)?;
            ConvexDomain::stadium(a, b, t.positive("domain.radius", None)?)
        }
        "polygon" => ConvexDomain::polygon(t.vertices("domain.vertices")?),
        "parallel_set" => {
            let v = t.vertices("domain.vertices")?;
            ConvexDomain::parallel_set(v, t.positive("domain.radius", None)?)
        }
        other => return Err(err(Some(line), "domain.kind", format!("unknown kind `{other}`"))),
    };
    dom.map_err(|e| err(Some(line), "domain", e.to_string()))
}
