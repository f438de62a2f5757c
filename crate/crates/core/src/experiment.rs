//! Batch experiments: generate instances, run estimators, write CSV.
//!
//! Config files are `key = value` lines (`#` starts a comment). Lists are
//! comma-separated; integer ranges `a..b` are inclusive and float ranges are
//! written `start:stop:step`.
//!
//! ```text
//! generator = grid            # or spiderweb
//! size = 4, 5                 # grid side
//! rings = 2                   # spiderweb only
//! degree = 3..6               # spiderweb only
//! beta = 0.1:2:0.1
//! theta = 0.1, 1
//! mode = attractive           # or mixed (default)
//! seeds = 1..50
//! methods = bp, z_empty, pfaffian_2, exact, loop_oracle
//! ```
//!
//! Optional keys: `schedule` (BP schedule or `multistart`, the default),
//! `threshold`, `max_iterations`, `budget` (Pfaffian-series term limit).

use crate::bp::{BpConfig, BpResult, Schedule, run_bp, run_bp_multistart};
use crate::gen::{InteractionMode, ModelParams, grid_factor_graph, reduced_forney, spiderweb_factor_graph};
use crate::model::{EXACT_VARIABLE_LIMIT, FactorGraph, ForneyGraph, exact_log_z_factor_graph};
use crate::series::{enumerate_loops, pfaffian_series, z_empty};
use rayon::prelude::*;
use std::fmt;
use std::io;
use std::str::FromStr;
use std::time::Instant;
use thiserror::Error;

/// `|log Z - log Z'| / log Z`; `None` when `log Z = 0`.
pub fn error_metric(log_z_est: f64, log_z_exact: f64) -> Option<f64> {
    if log_z_exact == 0.0 {
        None
    } else {
        Some((log_z_exact - log_z_est).abs() / log_z_exact)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Bp,
    ZEmpty,
    /// Pfaffian series up to `|Ψ| <= k`.
    Pfaffian(usize),
    Exact,
    LoopOracle,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Bp => f.write_str("bp"),
            Method::ZEmpty => f.write_str("z_empty"),
            Method::Pfaffian(k) => write!(f, "pfaffian_{k}"),
            Method::Exact => f.write_str("exact"),
            Method::LoopOracle => f.write_str("loop_oracle"),
        }
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bp" => Ok(Method::Bp),
            "z_empty" => Ok(Method::ZEmpty),
            "exact" => Ok(Method::Exact),
            "loop_oracle" => Ok(Method::LoopOracle),
            _ => s
                .strip_prefix("pfaffian_")
                .and_then(|k| k.parse().ok())
                .map(Method::Pfaffian)
                .ok_or_else(|| format!("unknown method `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Shape {
    Grid { n: usize },
    Spiderweb { rings: usize, d: usize },
}

impl Shape {
    pub fn generator(&self) -> &'static str {
        match self {
            Shape::Grid { .. } => "grid",
            Shape::Spiderweb { .. } => "spiderweb",
        }
    }

    pub fn size_label(&self) -> String {
        match self {
            Shape::Grid { n } => n.to_string(),
            Shape::Spiderweb { rings, d } => format!("{rings}x{d}"),
        }
    }

    pub fn factor_graph(&self, params: &ModelParams) -> Result<FactorGraph, crate::gen::GenError> {
        match *self {
            Shape::Grid { n } => grid_factor_graph(n, params),
            Shape::Spiderweb { rings, d } => spiderweb_factor_graph(rings, d, params),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub shapes: Vec<Shape>,
    pub betas: Vec<f64>,
    pub thetas: Vec<f64>,
    pub seeds: Vec<u64>,
    pub mode: InteractionMode,
    pub methods: Vec<Method>,
    /// `None` runs the multistart cascade.
    pub schedule: Option<Schedule>,
    pub threshold: f64,
    pub max_iterations: usize,
    pub budget: usize,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("missing key `{0}`")]
    Missing(&'static str),
    #[error("key `{key}`: {msg}")]
    Value { key: String, msg: String },
}

fn value_err(key: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError::Value {
        key: key.to_string(),
        msg: msg.into(),
    }
}

fn parse_list<T: FromStr>(key: &str, raw: &str) -> Result<Vec<T>, ConfigError> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| value_err(key, format!("bad item `{s}`"))))
        .collect()
}

fn parse_ints(key: &str, raw: &str) -> Result<Vec<u64>, ConfigError> {
    let mut out = Vec::new();
    for item in raw.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((a, b)) = item.split_once("..") {
            let a: u64 = a.trim().parse().map_err(|_| value_err(key, format!("bad range `{item}`")))?;
            let b: u64 = b.trim().parse().map_err(|_| value_err(key, format!("bad range `{item}`")))?;
            if a > b {
                return Err(value_err(key, format!("empty range `{item}`")));
            }
            out.extend(a..=b);
        } else {
            out.push(item.parse().map_err(|_| value_err(key, format!("bad integer `{item}`")))?);
        }
    }
    Ok(out)
}

fn parse_floats(key: &str, raw: &str) -> Result<Vec<f64>, ConfigError> {
    let mut out = Vec::new();
    for item in raw.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let parts: Vec<&str> = item.split(':').map(str::trim).collect();
        let num = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| value_err(key, format!("bad number `{s}`")))
        };
        match parts[..] {
            [x] => out.push(num(x)?),
            [start, stop, step] => {
                let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
                if step <= 0.0 || stop < start {
                    return Err(value_err(key, format!("bad range `{item}`")));
                }
                // integer stepping avoids accumulated drift
                let count = ((stop - start) / step + 1e-9).floor() as usize;
                out.extend((0..=count).map(|i| start + i as f64 * step));
            }
            _ => return Err(value_err(key, format!("bad item `{item}`"))),
        }
    }
    Ok(out)
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut entries: Vec<(String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((k, v)) = content.split_once('=') else {
            return Err(ConfigError::Syntax {
                line: i + 1,
                msg: "expected `key = value`".into(),
            });
        };
        let key = k.trim().to_string();
        if entries.iter().any(|(x, _)| *x == key) {
            return Err(ConfigError::Syntax {
                line: i + 1,
                msg: format!("duplicate key `{key}`"),
            });
        }
        entries.push((key, v.trim().to_string()));
    }
    const KNOWN: [&str; 13] = [
        "generator", "size", "rings", "degree", "beta", "theta", "mode", "seeds", "methods",
        "schedule", "threshold", "max_iterations", "budget",
    ];
    if let Some((k, _)) = entries.iter().find(|(k, _)| !KNOWN.contains(&k.as_str())) {
        return Err(value_err(k, "unknown key"));
    }
    let get = |k: &str| entries.iter().find(|(x, _)| x == k).map(|(_, v)| v.as_str());
    let need = |k: &'static str| get(k).ok_or(ConfigError::Missing(k));

    let generator = need("generator")?;
    let shapes = match generator {
        "grid" => parse_ints("size", need("size")?)?
            .into_iter()
            .map(|n| Shape::Grid { n: n as usize })
            .collect(),
        "spiderweb" => {
            let rings = parse_ints("rings", need("rings")?)?;
            let degrees = parse_ints("degree", need("degree")?)?;
            rings
                .iter()
                .flat_map(|&r| {
                    degrees.iter().map(move |&d| Shape::Spiderweb {
                        rings: r as usize,
                        d: d as usize,
                    })
                })
                .collect()
        }
        other => return Err(value_err("generator", format!("unknown generator `{other}`"))),
    };
    let schedule = match get("schedule") {
        None | Some("multistart") => None,
        Some(s) => Some(s.parse().map_err(|e: String| value_err("schedule", e))?),
    };
    let defaults = BpConfig::default();
    let scalar = |k: &str, default: f64| -> Result<f64, ConfigError> {
        get(k).map_or(Ok(default), |v| {
            v.parse().map_err(|_| value_err(k, format!("bad number `{v}`")))
        })
    };
    let config = ExperimentConfig {
        shapes,
        betas: parse_floats("beta", need("beta")?)?,
        thetas: parse_floats("theta", need("theta")?)?,
        seeds: parse_ints("seeds", need("seeds")?)?,
        mode: get("mode")
            .map_or(Ok(InteractionMode::Mixed), str::parse)
            .map_err(|e| value_err("mode", e))?,
        methods: parse_list("methods", get("methods").unwrap_or(""))?,
        schedule,
        threshold: scalar("threshold", defaults.threshold)?,
        max_iterations: scalar("max_iterations", defaults.max_iterations as f64)? as usize,
        budget: scalar("budget", 10_000.0)? as usize,
    };
    if config.threshold.is_nan() || config.threshold <= 0.0 || config.max_iterations == 0 {
        return Err(value_err("threshold", "threshold and max_iterations must be positive"));
    }
    Ok(config)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub instance: usize,
    pub seed: u64,
    pub generator: &'static str,
    pub size: String,
    pub beta: f64,
    pub theta: f64,
    pub mode: InteractionMode,
    pub method: Method,
    pub log_z: Option<f64>,
    pub log_z_exact: Option<f64>,
    pub error: Option<f64>,
    pub bp_iterations: Option<usize>,
    pub converged: Option<bool>,
    /// `ok`, or a short failure description.
    pub status: String,
    pub wall_ms: f64,
}

pub const CSV_HEADER: [&str; 16] = [
    "kind", "instance", "seed", "generator", "size", "beta", "theta", "mode", "method", "log_z",
    "log_z_exact", "error", "bp_iterations", "converged", "status", "wall_ms",
];

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

impl ExperimentRow {
    fn record(&self) -> Vec<String> {
        vec![
            "instance".into(),
            self.instance.to_string(),
            self.seed.to_string(),
            self.generator.into(),
            self.size.clone(),
            self.beta.to_string(),
            self.theta.to_string(),
            self.mode.to_string(),
            self.method.to_string(),
            opt(self.log_z),
            opt(self.log_z_exact),
            opt(self.error),
            opt(self.bp_iterations),
            opt(self.converged),
            self.status.clone(),
            format!("{:.3}", self.wall_ms),
        ]
    }
}

struct Instance {
    index: usize,
    shape: Shape,
    params: ModelParams,
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn run_instance(inst: &Instance, cfg: &ExperimentConfig) -> Vec<ExperimentRow> {
    let row = |method: Method| ExperimentRow {
        instance: inst.index,
        seed: inst.params.seed,
        generator: inst.shape.generator(),
        size: inst.shape.size_label(),
        beta: inst.params.beta,
        theta: inst.params.theta,
        mode: inst.params.mode,
        method,
        log_z: None,
        log_z_exact: None,
        error: None,
        bp_iterations: None,
        converged: None,
        status: "ok".into(),
        wall_ms: 0.0,
    };
    let fail_all = |msg: String| -> Vec<ExperimentRow> {
        cfg.methods
            .iter()
            .map(|&m| ExperimentRow {
                status: msg.clone(),
                ..row(m)
            })
            .collect()
    };

    let fg = match inst.shape.factor_graph(&inst.params) {
        Ok(fg) => fg,
        Err(e) => return fail_all(format!("generator: {e}")),
    };
    let exact_start = Instant::now();
    let exact = if fg.num_vars() <= EXACT_VARIABLE_LIMIT {
        exact_log_z_factor_graph(&fg).ok()
    } else {
        None
    };
    let exact_ms = ms(exact_start);
    let g: ForneyGraph = match reduced_forney(&fg) {
        Ok(g) => g,
        Err(e) => return fail_all(format!("conversion: {e}")),
    };
    let bp_cfg = BpConfig {
        schedule: cfg.schedule.unwrap_or(Schedule::FixedSequential),
        threshold: cfg.threshold,
        max_iterations: cfg.max_iterations,
        seed: inst.params.seed,
    };
    let bp_start = Instant::now();
    let bp: Result<BpResult, _> = match cfg.schedule {
        Some(_) => run_bp(&g, &bp_cfg),
        None => run_bp_multistart(&g, &bp_cfg),
    };
    let bp_ms = ms(bp_start);

    cfg.methods
        .iter()
        .map(|&method| {
            let mut r = row(method);
            r.log_z_exact = exact;
            if method == Method::Exact {
                r.log_z = exact;
                r.wall_ms = exact_ms;
                if exact.is_none() {
                    r.status = format!("exact: more than {EXACT_VARIABLE_LIMIT} variables");
                }
            } else {
                match &bp {
                    Err(e) => r.status = format!("bp: {e}"),
                    Ok(res) => {
                        r.bp_iterations = Some(res.iterations);
                        r.converged = Some(res.converged);
                        let start = Instant::now();
                        let est: Result<f64, String> = match method {
                            Method::Bp => Ok(res.log_z),
                            Method::ZEmpty => z_empty(&g, res)
                                .map_err(|e| e.to_string())
                                .map(|z| z.ln().map_or(f64::NAN, |l| res.log_z + l)),
                            Method::Pfaffian(k) => pfaffian_series(&g, res, k, cfg.budget)
                                .map_err(|e| e.to_string())
                                .map(|s| s.log_z(res)),
                            Method::LoopOracle => enumerate_loops(&g, res, false)
                                .map_err(|e| e.to_string())
                                .map(|loops| {
                                    let s: f64 = 1.0 + loops.iter().map(|l| l.r).sum::<f64>();
                                    if s > 0.0 { res.log_z + s.ln() } else { f64::NAN }
                                }),
                            Method::Exact => unreachable!(),
                        };
                        r.wall_ms = ms(start) + if method == Method::Bp { bp_ms } else { 0.0 };
                        match est {
                            Ok(v) if v.is_finite() => r.log_z = Some(v),
                            Ok(_) => r.status = "non-positive estimate".into(),
                            Err(e) => r.status = format!("{method}: {e}"),
                        }
                    }
                }
            }
            if let (Some(est), Some(ex)) = (r.log_z, r.log_z_exact) {
                r.error = error_metric(est, ex);
                if r.error.is_none() && r.status == "ok" {
                    r.status = "error undefined: log Z = 0".into();
                }
            }
            r
        })
        .collect()
}

fn instances(cfg: &ExperimentConfig) -> Vec<Instance> {
    let mut out = Vec::new();
    for &shape in &cfg.shapes {
        for &beta in &cfg.betas {
            for &theta in &cfg.thetas {
                for &seed in &cfg.seeds {
                    out.push(Instance {
                        index: out.len(),
                        shape,
                        params: ModelParams {
                            beta,
                            theta,
                            seed,
                            mode: cfg.mode,
                        },
                    });
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    pub rows: Vec<ExperimentRow>,
    /// Rows whose status is not `ok`.
    pub failures: usize,
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Runs every instance (in parallel) and writes instance rows in instance
/// order, followed by mean and median error rows per cell and method.
pub fn run_experiment<W: io::Write>(
    cfg: &ExperimentConfig,
    out: W,
) -> Result<ExperimentOutcome, csv::Error> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(CSV_HEADER)?;
    if cfg.methods.is_empty() {
        writer.flush()?;
        return Ok(ExperimentOutcome {
            rows: Vec::new(),
            failures: 0,
        });
    }
    let rows: Vec<ExperimentRow> = instances(cfg)
        .par_iter()
        .map(|inst| run_instance(inst, cfg))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    for r in &rows {
        writer.write_record(r.record())?;
    }

    // cells in first-appearance order
    let mut cells: Vec<(&'static str, String, u64, u64, Method)> = Vec::new();
    for r in &rows {
        let key = (r.generator, r.size.clone(), r.beta.to_bits(), r.theta.to_bits(), r.method);
        if !cells.contains(&key) {
            cells.push(key);
        }
    }
    for (generator, size, beta, theta, method) in cells {
        let mut errors: Vec<f64> = rows
            .iter()
            .filter(|r| {
                r.generator == generator
                    && r.size == size
                    && r.beta.to_bits() == beta
                    && r.theta.to_bits() == theta
                    && r.method == method
            })
            .filter_map(|r| r.error)
            .collect();
        if errors.is_empty() {
            continue;
        }
        let mean = errors.iter().sum::<f64>() / errors.len() as f64;
        let med = median(&mut errors);
        for (kind, value) in [("mean", mean), ("median", med)] {
            writer.write_record([
                kind.to_string(),
                String::new(),
                String::new(),
                generator.to_string(),
                size.clone(),
                f64::from_bits(beta).to_string(),
                f64::from_bits(theta).to_string(),
                cfg.mode.to_string(),
                method.to_string(),
                String::new(),
                String::new(),
                value.to_string(),
                String::new(),
                String::new(),
                format!("n={}", errors.len()),
                String::new(),
            ])?;
        }
    }
    writer.flush()?;
    let failures = rows.iter().filter(|r| r.status != "ok").count();
    Ok(ExperimentOutcome { rows, failures })
}
