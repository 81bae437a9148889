//! Synthetic data: simulate the log-linear Poisson process, hide entries,
//! contaminate observed ones, and run repeated recovery experiments.
//!
//! Randomness comes from ChaCha8 streams. A generator for `(seed, stream)`
//! is `ChaCha8Rng::seed_from_u64(seed)` switched to word stream `stream`.
//! Simulation draws from stream [`SIMULATE_STREAM`], missingness from
//! [`MISSING_STREAM`] and contamination from [`OUTLIER_STREAM`]. Run `i` of
//! an experiment replaces each base seed with [`run_seed`]`(seed, i)`, so a
//! run's data never depends on which thread executed it.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{
    clamp_mean, linear_predictor, HyperParams, ModelParams, ObservationSet, SeriesSample,
};
use crate::par::{map_indexed, Execution};
use crate::solvers::{default_init, fit, Solver};

pub const SIMULATE_STREAM: u64 = 0;
pub const MISSING_STREAM: u64 = 1;
pub const OUTLIER_STREAM: u64 = 2;

/// Contamination value used in the reference experiments.
pub const DEFAULT_OUTLIER_VALUE: f64 = 20.0;

/// Means below this use sequential-search inversion.
const INVERSION_LIMIT: f64 = 10.0;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Seed for run `run` of an experiment: SplitMix64 finalizer of
/// `seed + (run + 1) * 0x9E3779B97F4A7C15`.
pub fn run_seed(seed: u64, run: usize) -> u64 {
    let mut z = seed.wrapping_add((run as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One Poisson draw. Exact inversion below mean 10, transformed rejection
/// (PTRS) above.
pub fn poisson_sample<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> Result<u64> {
    if !(mean >= 0.0 && mean.is_finite()) {
        return Err(Error::domain("mean", mean, "[0, inf)"));
    }
    if mean == 0.0 {
        return Ok(0);
    }
    if mean < INVERSION_LIMIT {
        return Ok(poisson_inversion(mean, rng));
    }
    Ok(poisson_ptrs(mean, rng))
}

fn poisson_inversion<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    let u: f64 = rng.random();
    let mut k = 0u64;
    let mut p = (-mean).exp();
    let mut cdf = p;
    // the tail beyond ~200 has probability below 1e-150 for mean < 10
    while u > cdf && k < 1000 {
        k += 1;
        p *= mean / k as f64;
        cdf += p;
    }
    k
}

// Hormann (1993), "The transformed rejection method for generating Poisson
// random variables".
fn poisson_ptrs<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    let slam = mean.sqrt();
    let loglam = mean.ln();
    let b = 0.931 + 2.53 * slam;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let vr = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u = rng.random::<f64>() - 0.5;
        let v: f64 = rng.random();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + mean + 0.43).floor();
        if us >= 0.07 && v <= vr {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let lhs = v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln();
        let rhs = -mean + k * loglam - crate::model::log_gamma(k + 1.0).unwrap_or(f64::INFINITY);
        if lhs <= rhs {
            return k as u64;
        }
    }
}

/// Ground-truth process.
#[derive(Debug, Clone, PartialEq)]
pub struct TrueModel {
    pub params: ModelParams,
    pub n: usize,
    pub seed: u64,
}

impl TrueModel {
    /// `a0 = 1`, `a = (0.25, -0.5, 0, 0, -0.5, 0.5)`, `q = 0`.
    pub fn reference(n: usize, seed: u64) -> Self {
        Self {
            params: reference_params(),
            n,
            seed,
        }
    }
}

pub fn reference_params() -> ModelParams {
    ModelParams {
        a0: 1.0,
        a: vec![0.25, -0.5, 0.0, 0.0, -0.5, 0.5],
        b: vec![],
    }
}

/// Simulated counts and the conditional means that generated them.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub y: SeriesSample,
    pub u: Vec<f64>,
}

/// Draws `y_i ~ Poisson(u_i)` left to right, each `u_i` computed from the
/// previously drawn values.
pub fn simulate_with_means(model: &TrueModel) -> Result<Simulation> {
    if model.n == 0 {
        return Err(Error::Invalid("series length must be at least 1".into()));
    }
    if !model.params.is_finite() {
        return Err(Error::Invalid("true coefficients must be finite".into()));
    }
    let mut rng = stream_rng(model.seed, SIMULATE_STREAM);
    let n = model.n;
    let mut y = Vec::with_capacity(n);
    let mut ly = Vec::with_capacity(n);
    let mut u = Vec::with_capacity(n);
    let mut lu = Vec::with_capacity(n);
    for i in 0..n {
        let v = linear_predictor(&model.params, &ly, &lu, i);
        let (ui, li, _) = clamp_mean(v);
        if !ui.is_finite() {
            return Err(Error::NumericalRange(format!(
                "simulated mean overflows at index {}",
                i + 1
            )));
        }
        let yi = poisson_sample(ui, &mut rng)? as f64;
        y.push(yi);
        ly.push(yi.ln_1p());
        u.push(ui);
        lu.push(li);
    }
    Ok(Simulation {
        y: SeriesSample::new(y)?,
        u,
    })
}

pub fn simulate(model: &TrueModel) -> Result<SeriesSample> {
    simulate_with_means(model).map(|s| s.y)
}

/// Missingness and contamination settings.
#[derive(Debug, Clone, PartialEq)]
pub struct CorruptionSpec {
    /// Fraction of indices observed, in `(0, 1]`.
    pub observed_fraction: f64,
    /// Fraction of observed entries replaced by `outlier_value`, in `[0, 1)`.
    pub contamination_fraction: f64,
    pub outlier_value: f64,
    pub seed: u64,
}

impl CorruptionSpec {
    pub fn clean(seed: u64) -> Self {
        Self {
            observed_fraction: 1.0,
            contamination_fraction: 0.0,
            outlier_value: DEFAULT_OUTLIER_VALUE,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.observed_fraction > 0.0 && self.observed_fraction <= 1.0) {
            return Err(Error::domain(
                "observed_fraction",
                self.observed_fraction,
                "(0, 1]",
            ));
        }
        if !(self.contamination_fraction >= 0.0 && self.contamination_fraction < 1.0) {
            return Err(Error::domain(
                "contamination_fraction",
                self.contamination_fraction,
                "[0, 1)",
            ));
        }
        if !(self.outlier_value >= 0.0 && self.outlier_value.is_finite()) {
            return Err(Error::domain(
                "outlier_value",
                self.outlier_value,
                "[0, inf)",
            ));
        }
        Ok(())
    }
}

pub fn full_observation(y: &SeriesSample) -> ObservationSet {
    ObservationSet::from_parts(y.len(), (0..y.len()).collect(), y.values().to_vec())
        .expect("a nonempty nonnegative series is a valid observation set")
}

/// Observes a uniformly random subset of `round(observed_fraction * N)`
/// indices (at least one).
pub fn inject_missing<R: Rng + ?Sized>(
    y: &SeriesSample,
    spec: &CorruptionSpec,
    rng: &mut R,
) -> Result<ObservationSet> {
    spec.validate()?;
    let n = y.len();
    if n == 0 {
        return Err(Error::EmptyObservations);
    }
    let k = ((spec.observed_fraction * n as f64).round() as usize).clamp(1, n);
    let mut indices = sample(rng, n, k).into_vec();
    indices.sort_unstable();
    let values = indices.iter().map(|&i| y.values()[i]).collect();
    ObservationSet::from_parts(n, indices, values)
}

/// Observation set after contamination, with the replaced indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Contaminated {
    pub obs: ObservationSet,
    /// Series indices (0-based, ascending) whose value was replaced.
    pub indices: Vec<usize>,
}

/// Replaces `round(contamination_fraction * |D|)` observed entries, drawn
/// uniformly without replacement, with `outlier_value`.
pub fn inject_outliers<R: Rng + ?Sized>(
    obs: &ObservationSet,
    spec: &CorruptionSpec,
    rng: &mut R,
) -> Result<Contaminated> {
    spec.validate()?;
    let d = obs.count();
    let k = ((spec.contamination_fraction * d as f64).round() as usize).min(d);
    let mut out = obs.clone();
    if k == 0 {
        return Ok(Contaminated {
            obs: out,
            indices: Vec::new(),
        });
    }
    let mut positions = sample(rng, d, k).into_vec();
    positions.sort_unstable();
    for &pos in &positions {
        out.set_value(pos, spec.outlier_value);
    }
    let indices = positions.iter().map(|&pos| obs.indices()[pos]).collect();
    Ok(Contaminated { obs: out, indices })
}

/// Missingness then contamination, each from its own stream of `spec.seed`.
pub fn corrupt(y: &SeriesSample, spec: &CorruptionSpec) -> Result<Contaminated> {
    let obs = inject_missing(y, spec, &mut stream_rng(spec.seed, MISSING_STREAM))?;
    inject_outliers(&obs, spec, &mut stream_rng(spec.seed, OUTLIER_STREAM))
}

/// Box-plot statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiveNumber {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl FiveNumber {
    /// Quartiles by linear interpolation between order statistics; NaN for
    /// an empty sample.
    pub fn from_sample(values: &[f64]) -> Self {
        let mut v: Vec<f64> = values.to_vec();
        v.sort_by(f64::total_cmp);
        Self {
            min: quantile_sorted(&v, 0.0),
            q1: quantile_sorted(&v, 0.25),
            median: quantile_sorted(&v, 0.5),
            q3: quantile_sorted(&v, 0.75),
            max: quantile_sorted(&v, 1.0),
        }
    }
}

fn quantile_sorted(v: &[f64], q: f64) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    let h = q * (v.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

pub fn median(values: &[f64]) -> f64 {
    FiveNumber::from_sample(values).median
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientSummary {
    pub name: String,
    pub truth: f64,
    /// Estimates of the successful runs, in run order.
    pub estimates: Vec<f64>,
    pub stats: FiveNumber,
}

impl CoefficientSummary {
    pub fn abs_errors(&self) -> Vec<f64> {
        self.estimates
            .iter()
            .map(|e| (e - self.truth).abs())
            .collect()
    }

    pub fn median_abs_error(&self) -> f64 {
        median(&self.abs_errors())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub run: usize,
    /// Flattened `a0, a, b`, absent if the run failed.
    pub estimates: Option<Vec<f64>>,
    pub iterations: usize,
    pub converged: bool,
    pub final_objective: f64,
    pub contaminated: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSummary {
    pub solver: Solver,
    pub coefficients: Vec<CoefficientSummary>,
    pub runs: Vec<RunRecord>,
}

impl ExperimentSummary {
    pub fn coefficient(&self, name: &str) -> Option<&CoefficientSummary> {
        self.coefficients.iter().find(|c| c.name == name)
    }

    pub fn failed_runs(&self) -> impl Iterator<Item = &RunRecord> {
        self.runs.iter().filter(|r| r.error.is_some())
    }

    pub fn mean_iterations(&self) -> f64 {
        let ok: Vec<_> = self.runs.iter().filter(|r| r.error.is_none()).collect();
        ok.iter().map(|r| r.iterations as f64).sum::<f64>() / ok.len() as f64
    }
}

/// Truth for each fitted coefficient; lags beyond the true order are zero.
pub fn truth_for(model: &ModelParams, p: usize, q: usize) -> Vec<f64> {
    std::iter::once(model.a0)
        .chain((0..p).map(|k| model.a.get(k).copied().unwrap_or(0.0)))
        .chain((0..q).map(|k| model.b.get(k).copied().unwrap_or(0.0)))
        .collect()
}

/// Data for run `run`: simulated series and its corrupted observation.
pub fn run_data(
    model: &TrueModel,
    spec: &CorruptionSpec,
    run: usize,
) -> Result<(Simulation, Contaminated)> {
    let sim_model = TrueModel {
        seed: run_seed(model.seed, run),
        ..model.clone()
    };
    let sim = simulate_with_means(&sim_model)?;
    let run_spec = CorruptionSpec {
        seed: run_seed(spec.seed, run),
        ..spec.clone()
    };
    let corrupted = corrupt(&sim.y, &run_spec)?;
    Ok((sim, corrupted))
}

/// `runs` independent simulate, corrupt and fit pipelines.
///
/// A failing run is recorded with its error and left out of the statistics.
pub fn run_experiment(
    model: &TrueModel,
    spec: &CorruptionSpec,
    hyper: &HyperParams,
    runs: usize,
    solver: Solver,
    exec: Execution,
) -> Result<ExperimentSummary> {
    if runs == 0 {
        return Err(Error::Invalid("run count must be at least 1".into()));
    }
    hyper.validate()?;
    spec.validate()?;

    let records = map_indexed(runs, exec, |run| {
        let outcome = run_data(model, spec, run).and_then(|(_, corrupted)| {
            let init = default_init(&corrupted.obs, hyper)?;
            let rep = fit(solver, &corrupted.obs, hyper, init)?;
            Ok((rep, corrupted.indices.len()))
        });
        match outcome {
            Ok((rep, contaminated)) => RunRecord {
                run,
                estimates: Some(rep.params.flatten()),
                iterations: rep.iterations,
                converged: rep.converged,
                final_objective: rep.final_objective(),
                contaminated,
                error: None,
            },
            Err(e) => RunRecord {
                run,
                estimates: None,
                iterations: 0,
                converged: false,
                final_objective: f64::NAN,
                contaminated: 0,
                error: Some(
                    Error::Run {
                        run,
                        source: Box::new(e),
                    }
                    .to_string(),
                ),
            },
        }
    });

    let names = ModelParams::zeros(hyper.p, hyper.q).names();
    let truth = truth_for(&model.params, hyper.p, hyper.q);
    let coefficients = names
        .into_iter()
        .enumerate()
        .map(|(c, name)| {
            let estimates: Vec<f64> = records
                .iter()
                .filter_map(|r| r.estimates.as_ref().map(|e| e[c]))
                .collect();
            CoefficientSummary {
                name,
                truth: truth[c],
                stats: FiveNumber::from_sample(&estimates),
                estimates,
            }
        })
        .collect();
    Ok(ExperimentSummary {
        solver,
        coefficients,
        runs: records,
    })
}
