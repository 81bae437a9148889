//! Flat `key = value` run configuration.
//!
//! One assignment per line, `#` starts a comment, blank lines are ignored.
//! Lists are comma separated. Unknown and repeated keys are rejected.
//!
//! | key | default | range |
//! |-----|---------|-------|
//! | `p`, `q` | required for fitting | integer >= 0 |
//! | `lambda` | required for fitting | > 0 |
//! | `mu` | required for fitting | >= 0 |
//! | `r` | 0.5 | (0, 1] |
//! | `s` | 1 | (0, 1] |
//! | `tau` | 1e-4 | > 0 |
//! | `eps` | 1e-6 | > 0 |
//! | `max_iters` | 50000 | >= 1 |
//! | `solver` | hybrid | fista, palm, hybrid |
//! | `input` | none | path of a `t,y,observed` CSV |
//! | `output` | `.` | output directory |
//! | `seed` | 0 | u64 |
//! | `n` | 1000 | >= 1 |
//! | `true_a0` | 1 | finite |
//! | `true_a` | 0.25,-0.5,0,0,-0.5,0.5 | finite list |
//! | `true_b` | empty | finite list |
//! | `observed_fraction` | 1 | (0, 1] |
//! | `contamination_fraction` | 0 | [0, 1) |
//! | `outlier_value` | 20 | >= 0 |
//! | `corruption_seed` | `seed` | u64 |
//! | `runs` | 1 | >= 1 |
//! | `execution` | parallel | parallel, serial |
//! | `prox_anchor` | 5 | > 0 |
//! | `prox_r` | 0.5 | (0, 1) |
//! | `prox_mu` | 1 | >= 0 |
//! | `prox_mu_multiples` | 2,1,0.75,0.25 | list of >= 0 |
//! | `prox_r_values` | 0,0.5,1 | list in [0, 1] |
//! | `prox_t_min`, `prox_t_max` | 0, 5 | min < max |
//! | `prox_t_step` | 0.01 | > 0 |

use std::collections::HashMap;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::model::{HyperParams, ModelParams};
use crate::par::Execution;
use crate::sim::{reference_params, CorruptionSpec, TrueModel, DEFAULT_OUTLIER_VALUE};
use crate::solvers::Solver;

#[derive(Debug, Clone, PartialEq)]
pub struct ProxCurveConfig {
    pub anchor: f64,
    pub r: f64,
    pub mu: f64,
    pub mu_multiples: Vec<f64>,
    pub r_values: Vec<f64>,
    pub t_min: f64,
    pub t_max: f64,
    pub t_step: f64,
}

impl Default for ProxCurveConfig {
    fn default() -> Self {
        Self {
            anchor: 5.0,
            r: 0.5,
            mu: 1.0,
            mu_multiples: vec![2.0, 1.0, 0.75, 0.25],
            r_values: vec![0.0, 0.5, 1.0],
            t_min: 0.0,
            t_max: 5.0,
            t_step: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub p: Option<usize>,
    pub q: Option<usize>,
    pub lambda: Option<f64>,
    pub mu: Option<f64>,
    pub r: f64,
    pub s: f64,
    pub tau: f64,
    pub eps: f64,
    pub max_iters: usize,
    pub solver: Solver,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub seed: u64,
    pub n: usize,
    pub true_params: ModelParams,
    pub observed_fraction: f64,
    pub contamination_fraction: f64,
    pub outlier_value: f64,
    corruption_seed: Option<u64>,
    pub runs: usize,
    pub execution: Execution,
    pub prox: ProxCurveConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            p: None,
            q: None,
            lambda: None,
            mu: None,
            r: HyperParams::DEFAULT_R,
            s: HyperParams::DEFAULT_S,
            tau: HyperParams::DEFAULT_TAU,
            eps: HyperParams::DEFAULT_EPS,
            max_iters: HyperParams::DEFAULT_MAX_ITERS,
            solver: Solver::Hybrid,
            input: None,
            output: None,
            seed: 0,
            n: 1000,
            true_params: reference_params(),
            observed_fraction: 1.0,
            contamination_fraction: 0.0,
            outlier_value: DEFAULT_OUTLIER_VALUE,
            corruption_seed: None,
            runs: 1,
            execution: Execution::Parallel,
            prox: ProxCurveConfig::default(),
        }
    }
}

impl RunConfig {
    /// Hyperparameters for fitting; `p`, `q`, `lambda` and `mu` must be set.
    pub fn hyper(&self) -> Result<HyperParams> {
        let missing = |k: &str| Error::Invalid(format!("config key `{k}` is required"));
        let h = HyperParams {
            p: self.p.ok_or_else(|| missing("p"))?,
            q: self.q.ok_or_else(|| missing("q"))?,
            r: self.r,
            s: self.s,
            lambda: self.lambda.ok_or_else(|| missing("lambda"))?,
            mu: self.mu.ok_or_else(|| missing("mu"))?,
            tau: self.tau,
            eps: self.eps,
            max_iters: self.max_iters,
        };
        h.validate()?;
        Ok(h)
    }

    pub fn true_model(&self) -> TrueModel {
        TrueModel {
            params: self.true_params.clone(),
            n: self.n,
            seed: self.seed,
        }
    }

    pub fn corruption(&self) -> CorruptionSpec {
        CorruptionSpec {
            observed_fraction: self.observed_fraction,
            contamination_fraction: self.contamination_fraction,
            outlier_value: self.outlier_value,
            seed: self.corruption_seed(),
        }
    }

    /// Explicit `corruption_seed`, else `seed`.
    pub fn corruption_seed(&self) -> u64 {
        self.corruption_seed.unwrap_or(self.seed)
    }

    pub fn set_corruption_seed(&mut self, seed: u64) {
        self.corruption_seed = Some(seed);
    }
}

struct Entry<'a> {
    line: usize,
    key: &'a str,
    value: &'a str,
}

impl Entry<'_> {
    fn err(&self, msg: impl std::fmt::Display) -> Error {
        Error::Config {
            line: self.line,
            message: format!("`{}`: {msg}", self.key),
        }
    }

    fn float(&self) -> Result<f64> {
        self.value
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| self.err(format!("`{}` is not a finite number", self.value)))
    }

    fn float_in(&self, ok: impl Fn(f64) -> bool, range: &str) -> Result<f64> {
        let v = self.float()?;
        if ok(v) {
            Ok(v)
        } else {
            Err(self.err(format!("{v} is outside the accepted range {range}")))
        }
    }

    fn uint(&self, min: u64, range: &str) -> Result<u64> {
        let v = self
            .value
            .parse::<u64>()
            .map_err(|_| self.err(format!("`{}` is not a nonnegative integer", self.value)))?;
        if v < min {
            return Err(self.err(format!("{v} is outside the accepted range {range}")));
        }
        Ok(v)
    }

    fn list(&self, ok: impl Fn(f64) -> bool, range: &str) -> Result<Vec<f64>> {
        if self.value.is_empty() {
            return Ok(Vec::new());
        }
        self.value
            .split(',')
            .map(|item| {
                let item = item.trim();
                let v = item
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| {
                        self.err(format!("list item `{item}` is not a finite number"))
                    })?;
                if ok(v) {
                    Ok(v)
                } else {
                    Err(self.err(format!(
                        "list item {v} is outside the accepted range {range}"
                    )))
                }
            })
            .collect()
    }
}

fn unit_open_closed(v: f64) -> bool {
    v > 0.0 && v <= 1.0
}

/// Parses and validates a configuration, filling defaults.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut seen: HashMap<&str, usize> = HashMap::new();
    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::Config {
            line,
            message: format!("expected `key = value`, found `{content}`"),
        })?;
        let key = key.trim();
        if let Some(first) = seen.insert(key, line) {
            return Err(Error::Config {
                line,
                message: format!("`{key}` is repeated (first set on line {first})"),
            });
        }
        entries.push(Entry {
            line,
            key,
            value: value.trim(),
        });
    }

    let mut cfg = RunConfig::default();
    let (mut true_a0, mut true_a, mut true_b) = (None, None, None);
    for e in &entries {
        match e.key {
            "p" => cfg.p = Some(e.uint(0, "[0, inf)")? as usize),
            "q" => cfg.q = Some(e.uint(0, "[0, inf)")? as usize),
            "r" => cfg.r = e.float_in(unit_open_closed, "(0, 1]")?,
            "s" => cfg.s = e.float_in(unit_open_closed, "(0, 1]")?,
            "lambda" => cfg.lambda = Some(e.float_in(|v| v > 0.0, "(0, inf)")?),
            "mu" => cfg.mu = Some(e.float_in(|v| v >= 0.0, "[0, inf)")?),
            "tau" => cfg.tau = e.float_in(|v| v > 0.0, "(0, inf)")?,
            "eps" => cfg.eps = e.float_in(|v| v > 0.0, "(0, inf)")?,
            "max_iters" => cfg.max_iters = e.uint(1, "[1, inf)")? as usize,
            "solver" => {
                cfg.solver = e.value.parse().map_err(|_| {
                    e.err(format!("`{}` is not one of fista, palm, hybrid", e.value))
                })?
            }
            "input" => cfg.input = Some(PathBuf::from(e.value)),
            "output" => cfg.output = Some(PathBuf::from(e.value)),
            "seed" => cfg.seed = e.uint(0, "[0, 2^64)")?,
            "n" => cfg.n = e.uint(1, "[1, inf)")? as usize,
            "true_a0" => true_a0 = Some(e.float()?),
            "true_a" => true_a = Some(e.list(|_| true, "finite")?),
            "true_b" => true_b = Some(e.list(|_| true, "finite")?),
            "observed_fraction" => {
                cfg.observed_fraction = e.float_in(unit_open_closed, "(0, 1]")?
            }
            "contamination_fraction" => {
                cfg.contamination_fraction = e.float_in(|v| (0.0..1.0).contains(&v), "[0, 1)")?
            }
            "outlier_value" => cfg.outlier_value = e.float_in(|v| v >= 0.0, "[0, inf)")?,
            "corruption_seed" => cfg.corruption_seed = Some(e.uint(0, "[0, 2^64)")?),
            "runs" => cfg.runs = e.uint(1, "[1, inf)")? as usize,
            "execution" => {
                cfg.execution = match e.value {
                    "parallel" => Execution::Parallel,
                    "serial" => Execution::Serial,
                    other => return Err(e.err(format!("`{other}` is not one of parallel, serial"))),
                }
            }
            "prox_anchor" => cfg.prox.anchor = e.float_in(|v| v > 0.0, "(0, inf)")?,
            "prox_r" => cfg.prox.r = e.float_in(|v| v > 0.0 && v < 1.0, "(0, 1)")?,
            "prox_mu" => cfg.prox.mu = e.float_in(|v| v >= 0.0, "[0, inf)")?,
            "prox_mu_multiples" => cfg.prox.mu_multiples = e.list(|v| v >= 0.0, "[0, inf)")?,
            "prox_r_values" => {
                cfg.prox.r_values = e.list(|v| (0.0..=1.0).contains(&v), "[0, 1]")?
            }
            "prox_t_min" => cfg.prox.t_min = e.float()?,
            "prox_t_max" => cfg.prox.t_max = e.float()?,
            "prox_t_step" => cfg.prox.t_step = e.float_in(|v| v > 0.0, "(0, inf)")?,
            other => {
                return Err(Error::Config {
                    line: e.line,
                    message: format!("unknown key `{other}`"),
                })
            }
        }
    }
    if cfg.prox.t_min >= cfg.prox.t_max {
        let line = seen
            .get("prox_t_max")
            .or(seen.get("prox_t_min"))
            .copied()
            .unwrap_or(0);
        return Err(Error::Config {
            line,
            message: format!(
                "prox_t_min = {} must be below prox_t_max = {}",
                cfg.prox.t_min, cfg.prox.t_max
            ),
        });
    }
    let defaults = reference_params();
    cfg.true_params = ModelParams {
        a0: true_a0.unwrap_or(defaults.a0),
        a: true_a.unwrap_or(defaults.a),
        b: true_b.unwrap_or(defaults.b),
    };
    Ok(cfg)
}
