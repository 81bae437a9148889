//! Block proximal-gradient solvers for the robust objective.
//!
//! All three schemes split the objective into the smooth Poisson part `H`
//! and three separable penalties (on `a`, on `b`, and on the observed
//! residual `y_D - y~_D`), alternate a gradient step on `H` with the exact
//! scalar proximal map of each penalty, and stop once
//! `|J_m - J_{m-1}| <= eps`.
//!
//! * [`palm_fit`]: Gauss-Seidel sweep over `a0, a, b, y`, each block using
//!   the freshest values of the others.
//! * [`fista_fit`]: every block is advanced from the same extrapolated point
//!   with FISTA momentum.
//! * [`hybrid_fit`]: the Gauss-Seidel sweep of PALM with FISTA extrapolation
//!   applied block by block, extrapolated blocks fed forward within the
//!   sweep.
//!
//! The prox of `tau * mu * |.|^s` is `shrink(., tau * mu, s)`; the step size
//! scales the threshold.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{
    forward_means, objective, HyperParams, MeanSeries, ModelParams, ObservationSet, SeriesSample,
    SmoothState,
};
use crate::prox::shrink_scalar;

/// Largest per-step objective increase tolerated by [`palm_fit`].
pub const PALM_INCREASE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Fista,
    Palm,
    Hybrid,
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Solver::Fista => "fista",
            Solver::Palm => "palm",
            Solver::Hybrid => "hybrid",
        })
    }
}

impl FromStr for Solver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fista" => Ok(Solver::Fista),
            "palm" => Ok(Solver::Palm),
            "hybrid" => Ok(Solver::Hybrid),
            other => Err(Error::Invalid(format!(
                "unknown solver `{other}`; expected fista, palm or hybrid"
            ))),
        }
    }
}

/// Starting point for a fit.
#[derive(Debug, Clone, PartialEq)]
pub struct Init {
    pub params: ModelParams,
    pub y: SeriesSample,
}

#[derive(Debug, Clone)]
pub struct FitReport {
    pub solver: Solver,
    pub params: ModelParams,
    pub y_hat: SeriesSample,
    pub u_hat: MeanSeries,
    pub iterations: usize,
    /// `J` after each iteration; `objective_trace.len() == iterations`.
    pub objective_trace: Vec<f64>,
    pub converged: bool,
}

impl FitReport {
    pub fn final_objective(&self) -> f64 {
        self.objective_trace.last().copied().unwrap_or(f64::NAN)
    }
}

/// Constant start: every entry of `y` set to the observed mean, zero lag
/// coefficients and `a0 = log(mean + 1)`, so the initial mean equals `y`.
///
/// Starting the observed entries away from `y~` lets the residual penalty
/// decide which of them to release; see [`observed_init`].
pub fn default_init(obs: &ObservationSet, hyper: &HyperParams) -> Result<Init> {
    let mean = checked_mean(obs)?;
    Ok(Init {
        params: constant_params(mean, hyper),
        y: SeriesSample::new(vec![mean; obs.len()])?,
    })
}

/// Observed entries kept, unobserved entries set to the observed mean,
/// coefficients as in [`default_init`].
///
/// With `r < 1` the residual penalty has infinite slope at zero, so a
/// proximal step only moves an observed entry off `y~` when
/// `tau * |dH/dy_i|` exceeds the shrinkage threshold of `tau * lambda`.
/// From this start the observed entries usually stay pinned to `y~`.
pub fn observed_init(obs: &ObservationSet, hyper: &HyperParams) -> Result<Init> {
    let mean = checked_mean(obs)?;
    let y: Vec<f64> = obs.dense().into_iter().map(|v| v.unwrap_or(mean)).collect();
    Ok(Init {
        params: constant_params(mean, hyper),
        y: SeriesSample::new(y)?,
    })
}

fn checked_mean(obs: &ObservationSet) -> Result<f64> {
    if obs.count() == 0 {
        return Err(Error::EmptyObservations);
    }
    Ok(obs.mean())
}

fn constant_params(mean: f64, hyper: &HyperParams) -> ModelParams {
    ModelParams {
        a0: mean.ln_1p(),
        a: vec![0.0; hyper.p],
        b: vec![0.0; hyper.q],
    }
}

/// Runs the chosen solver.
pub fn fit(
    solver: Solver,
    obs: &ObservationSet,
    hyper: &HyperParams,
    init: Init,
) -> Result<FitReport> {
    match solver {
        Solver::Fista => fista_fit(obs, hyper, init),
        Solver::Palm => palm_fit(obs, hyper, init),
        Solver::Hybrid => hybrid_fit(obs, hyper, init),
    }
}

/// One proximal step on `y`: gradient step everywhere, then on `D` the
/// residual against `y~` is shrunk with threshold `tau * lambda`. The result
/// is projected onto `y >= 0`.
pub fn y_prox_step(
    z: &[f64],
    grad_y: &[f64],
    tau: f64,
    obs: &ObservationSet,
    lambda: f64,
    r: f64,
) -> Vec<f64> {
    let mut out: Vec<f64> = z.iter().zip(grad_y).map(|(zi, gi)| zi - tau * gi).collect();
    for (&i, &target) in obs.indices().iter().zip(obs.values()) {
        out[i] = shrink_scalar(out[i] - target, tau * lambda, r) + target;
    }
    for v in out.iter_mut() {
        *v = v.max(0.0);
    }
    out
}

fn coef_prox_step(c: &[f64], grad: &[f64], tau: f64, mu: f64, s: f64) -> Vec<f64> {
    c.iter()
        .zip(grad)
        .map(|(ci, gi)| shrink_scalar(ci - tau * gi, tau * mu, s))
        .collect()
}

fn check_inputs(obs: &ObservationSet, hyper: &HyperParams, init: &Init) -> Result<()> {
    hyper.validate()?;
    hyper.check_params(&init.params)?;
    if init.y.len() != obs.len() {
        return Err(Error::Dimension(format!(
            "initial series has {} entries but the observation set covers {}",
            init.y.len(),
            obs.len()
        )));
    }
    if !init.params.is_finite() {
        return Err(Error::Invalid("initial coefficients must be finite".into()));
    }
    Ok(())
}

fn finite_objective(
    params: &ModelParams,
    y: &[f64],
    obs: &ObservationSet,
    hyper: &HyperParams,
    iteration: usize,
) -> Result<f64> {
    let j = objective(params, y, obs, hyper)?;
    if !j.is_finite() {
        return Err(Error::NumericalRange(format!(
            "objective is {j} at iteration {iteration}"
        )));
    }
    Ok(j)
}

fn finish(
    solver: Solver,
    params: ModelParams,
    y: Vec<f64>,
    trace: Vec<f64>,
    converged: bool,
) -> Result<FitReport> {
    let u_hat = forward_means(&params, &y)?;
    Ok(FitReport {
        solver,
        params,
        y_hat: SeriesSample::new(y)?,
        u_hat,
        iterations: trace.len(),
        objective_trace: trace,
        converged,
    })
}

/// Proximal alternating linearized minimization.
///
/// Returns [`Error::Diverged`] when an iteration raises the objective by more
/// than [`PALM_INCREASE_TOL`], which means `tau` is too large for the
/// instance.
pub fn palm_fit(obs: &ObservationSet, hyper: &HyperParams, init: Init) -> Result<FitReport> {
    check_inputs(obs, hyper, &init)?;
    let tau = hyper.tau;
    let mut params = init.params;
    let mut y = init.y.into_inner();
    let mut prev = finite_objective(&params, &y, obs, hyper, 0)?;
    let mut trace = Vec::new();
    let mut converged = false;

    for m in 1..=hyper.max_iters {
        let g0 = SmoothState::new(&params, &y)?.grad_a0();
        params.a0 -= tau * g0;
        if hyper.p > 0 {
            let ga = SmoothState::new(&params, &y)?.grad_a();
            params.a = coef_prox_step(&params.a, &ga, tau, hyper.mu, hyper.s);
        }
        if hyper.q > 0 {
            let gb = SmoothState::new(&params, &y)?.grad_b();
            params.b = coef_prox_step(&params.b, &gb, tau, hyper.mu, hyper.s);
        }
        let gy = SmoothState::new(&params, &y)?.grad_y();
        y = y_prox_step(&y, &gy, tau, obs, hyper.lambda, hyper.r);

        let j = finite_objective(&params, &y, obs, hyper, m)?;
        if j > prev + PALM_INCREASE_TOL {
            return Err(Error::Diverged {
                iteration: m,
                previous: prev,
                current: j,
            });
        }
        trace.push(j);
        if (j - prev).abs() <= hyper.eps {
            converged = true;
            break;
        }
        prev = j;
    }
    finish(Solver::Palm, params, y, trace, converged)
}

/// FISTA applied to all blocks jointly; every gradient is taken at the
/// extrapolated point of the previous iteration. Momentum restarts whenever
/// the objective increases ([`Momentum::Restart`]).
pub fn fista_fit(obs: &ObservationSet, hyper: &HyperParams, init: Init) -> Result<FitReport> {
    accelerated(obs, hyper, init, Solver::Fista, Momentum::Restart)
}

/// PALM block order with FISTA extrapolation per block, each freshly
/// extrapolated block fed forward within the sweep. Momentum restarts
/// whenever the objective increases ([`Momentum::Restart`]).
pub fn hybrid_fit(obs: &ObservationSet, hyper: &HyperParams, init: Init) -> Result<FitReport> {
    accelerated(obs, hyper, init, Solver::Hybrid, Momentum::Restart)
}

/// Extrapolation rule used by the accelerated solvers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Momentum {
    /// `alpha_{m+1} = (1 + sqrt(1 + 4 alpha_m^2)) / 2`, weight `(alpha_m - 1) / alpha_{m+1}`.
    Fista,
    /// As [`Momentum::Fista`], but an objective increase resets `alpha` to 1
    /// and restarts the extrapolation from the current iterate.
    Restart,
    /// Extrapolation weight forced to zero.
    Off,
}

/// FISTA momentum sequence `alpha_2, alpha_3, ...`, starting at `alpha_2 = 1`.
pub fn momentum_sequence(len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut alpha = 1.0f64;
    for _ in 0..len {
        out.push(alpha);
        alpha = (1.0 + (1.0 + 4.0 * alpha * alpha).sqrt()) / 2.0;
    }
    out
}

/// [`fista_fit`] or [`hybrid_fit`] with an explicit momentum rule.
pub fn accelerated_fit(
    obs: &ObservationSet,
    hyper: &HyperParams,
    init: Init,
    solver: Solver,
    momentum: Momentum,
) -> Result<FitReport> {
    if solver == Solver::Palm {
        return Err(Error::Invalid("PALM has no momentum variant".into()));
    }
    accelerated(obs, hyper, init, solver, momentum)
}

fn extrapolate(cur: &[f64], prev: &[f64], beta: f64) -> Vec<f64> {
    cur.iter()
        .zip(prev)
        .map(|(c, p)| c + beta * (c - p))
        .collect()
}

fn accelerated(
    obs: &ObservationSet,
    hyper: &HyperParams,
    init: Init,
    solver: Solver,
    momentum: Momentum,
) -> Result<FitReport> {
    check_inputs(obs, hyper, &init)?;
    let tau = hyper.tau;
    let hybrid = solver == Solver::Hybrid;

    // Last accepted iterate.
    let mut x = init.params;
    let mut y = init.y.into_inner();
    // Extrapolated point the next step starts from.
    let mut ext = x.clone();
    let mut z = y.clone();

    let mut alpha = 1.0f64;
    let mut prev = finite_objective(&x, &y, obs, hyper, 0)?;
    let mut trace = Vec::new();
    let mut converged = false;

    for m in 1..=hyper.max_iters {
        let alpha_next = (1.0 + (1.0 + 4.0 * alpha * alpha).sqrt()) / 2.0;
        let beta = match momentum {
            Momentum::Fista | Momentum::Restart => (alpha - 1.0) / alpha_next,
            Momentum::Off => 0.0,
        };

        let state = SmoothState::new(&ext, &z)?;
        let a0_new = ext.a0 - tau * state.grad_a0();
        let c0_next = a0_new + beta * (a0_new - x.a0);

        // Gradient evaluation point for the remaining blocks; the hybrid
        // scheme threads each freshly extrapolated block forward.
        let mut point = ext.clone();
        let fista_state = if hybrid { None } else { Some(state) };

        let a_new = if hyper.p > 0 {
            let ga = match &fista_state {
                Some(st) => st.grad_a(),
                None => {
                    point.a0 = c0_next;
                    SmoothState::new(&point, &z)?.grad_a()
                }
            };
            coef_prox_step(&ext.a, &ga, tau, hyper.mu, hyper.s)
        } else {
            Vec::new()
        };
        let c_next = extrapolate(&a_new, &x.a, beta);

        let b_new = if hyper.q > 0 {
            let gb = match &fista_state {
                Some(st) => st.grad_b(),
                None => {
                    point.a0 = c0_next;
                    point.a = c_next.clone();
                    SmoothState::new(&point, &z)?.grad_b()
                }
            };
            coef_prox_step(&ext.b, &gb, tau, hyper.mu, hyper.s)
        } else {
            Vec::new()
        };
        let d_next = extrapolate(&b_new, &x.b, beta);

        let gy = match &fista_state {
            Some(st) => st.grad_y(),
            None => {
                point.a0 = c0_next;
                point.a = c_next.clone();
                point.b = d_next.clone();
                SmoothState::new(&point, &z)?.grad_y()
            }
        };
        let y_new = y_prox_step(&z, &gy, tau, obs, hyper.lambda, hyper.r);
        let z_next: Vec<f64> = y_new
            .iter()
            .zip(&y)
            .map(|(c, p)| (c + beta * (c - p)).max(0.0))
            .collect();

        x = ModelParams {
            a0: a0_new,
            a: a_new,
            b: b_new,
        };
        y = y_new;
        ext = ModelParams {
            a0: c0_next,
            a: c_next,
            b: d_next,
        };
        z = z_next;
        alpha = alpha_next;

        let j = finite_objective(&x, &y, obs, hyper, m)?;
        trace.push(j);
        if (j - prev).abs() <= hyper.eps {
            converged = true;
            break;
        }
        if momentum == Momentum::Restart && j > prev {
            alpha = 1.0;
            ext = x.clone();
            z = y.clone();
        }
        prev = j;
    }
    finish(solver, x, y, trace, converged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::grad_smooth;

    fn obs_from(values: &[f64], mask: &[bool]) -> ObservationSet {
        ObservationSet::from_mask(mask, values).unwrap()
    }

    #[test]
    fn momentum_starts_at_one_then_golden_ratio() {
        let seq = momentum_sequence(3);
        assert_eq!(seq[0], 1.0);
        assert!((seq[1] - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-15);
        assert!(seq[2] > seq[1]);
    }

    #[test]
    fn init_constant_series() {
        let obs = obs_from(&[4.0; 5], &[true; 5]);
        let h = HyperParams::new(2, 1, 1.0, 1.0);
        let init = default_init(&obs, &h).unwrap();
        assert_eq!(init.params.a0, 5f64.ln());
        assert_eq!(init.params.a, vec![0.0, 0.0]);
        assert_eq!(init.params.b, vec![0.0]);
        assert_eq!(init.y.values(), &[4.0; 5]);
        let u = forward_means(&init.params, init.y.values()).unwrap().u;
        for ui in u {
            assert!((ui - 4.0).abs() < 1e-14);
        }
    }

    #[test]
    fn init_fills_missing_with_mean() {
        let obs = obs_from(&[3.0, 0.0, 3.4, 0.0], &[true, false, true, false]);
        let h = HyperParams::new(0, 0, 1.0, 0.0);
        let init = observed_init(&obs, &h).unwrap();
        assert_eq!(init.y.values(), &[3.0, 3.2, 3.4, 3.2]);
        assert_eq!(default_init(&obs, &h).unwrap().y.values(), &[3.2; 4]);
        let full = obs_from(&[1.0, 4.0, 0.0], &[true; 3]);
        assert_eq!(
            observed_init(&full, &h).unwrap().y.values(),
            &[1.0, 4.0, 0.0]
        );
    }

    #[test]
    fn y_step_with_zero_gradient_is_shifted_shrink() {
        let obs = obs_from(&[1.0, 5.0, 2.0, 0.0], &[true, true, false, true]);
        let z = vec![1.5, 1.0, 7.0, 0.2];
        let out = y_prox_step(&z, &[0.0; 4], 0.1, &obs, 3.0, 0.5);
        assert_eq!(out[0], shrink_scalar(0.5, 0.3, 0.5) + 1.0);
        assert_eq!(out[1], shrink_scalar(-4.0, 0.3, 0.5) + 5.0);
        assert_eq!(out[2], 7.0);
        assert_eq!(out[3], shrink_scalar(0.2, 0.3, 0.5));
    }

    #[test]
    fn y_step_projects_onto_nonnegative() {
        let obs = obs_from(&[1.0, 0.0], &[true, false]);
        let out = y_prox_step(&[0.5, 0.1], &[100.0, 100.0], 0.1, &obs, 1e-3, 1.0);
        assert_eq!(out, vec![0.0, 0.0]);
    }

    #[test]
    fn fixed_point_does_not_move() {
        // Every mean is clamped (v_i = -1 < 0), so the coefficient gradients are
        // exactly zero; y = 0 with zero observations is held by the projection.
        let params = ModelParams::new(-1.0, vec![0.3, -0.2], vec![0.1]).unwrap();
        let y = vec![0.0; 6];
        let g = grad_smooth(&params, &y).unwrap();
        assert_eq!(
            (g.a0, g.a.clone(), g.b.clone()),
            (0.0, vec![0.0; 2], vec![0.0])
        );
        let obs = obs_from(&y, &[true, false, true, true, false, true]);
        let mut hyper = HyperParams::new(2, 1, 1.0, 0.0);
        hyper.max_iters = 5;
        for solver in [Solver::Palm, Solver::Fista, Solver::Hybrid] {
            let init = Init {
                params: params.clone(),
                y: SeriesSample::new(y.clone()).unwrap(),
            };
            let rep = fit(solver, &obs, &hyper, init).unwrap();
            assert_eq!(rep.params, params, "{solver}");
            assert_eq!(rep.y_hat.values(), &y[..]);
            assert!(rep.converged);
            assert_eq!(rep.iterations, 1);
        }
    }

    #[test]
    fn rejects_mismatched_init() {
        let obs = obs_from(&[1.0, 2.0], &[true, true]);
        let h = HyperParams::new(1, 0, 1.0, 1.0);
        let init = Init {
            params: ModelParams::zeros(2, 0),
            y: SeriesSample::new(vec![1.0, 2.0]).unwrap(),
        };
        assert!(palm_fit(&obs, &h, init).is_err());
    }

    #[test]
    fn palm_flags_too_large_step() {
        let values: Vec<f64> = (0..50).map(|i| ((i * 7) % 11) as f64).collect();
        let obs = obs_from(&values, &[true; 50]);
        let mut h = HyperParams::new(2, 0, 5.0, 1.0);
        h.tau = 1.0;
        let init = default_init(&obs, &h).unwrap();
        assert!(palm_fit(&obs, &h, init).is_err());
    }

    fn toy_series(n: usize) -> Vec<f64> {
        (0..n).map(|i| ((i * 7 + 3) % 9) as f64).collect()
    }

    fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
        let g = (5f64.sqrt() - 1.0) / 2.0;
        while hi - lo > tol {
            let x1 = hi - g * (hi - lo);
            let x2 = lo + g * (hi - lo);
            if f(x1) < f(x2) {
                hi = x2;
            } else {
                lo = x1;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn palm_intercept_matches_line_search() {
        // p = q = 0, r = 1 and lambda well above |dH/dy| keep y = y~ at the
        // optimum, leaving a one-dimensional problem in a0.
        let values = toy_series(8);
        let obs = obs_from(&values, &[true; 8]);
        let mut h = HyperParams::new(0, 0, 5.0, 0.0);
        h.r = 1.0;
        h.tau = 1e-2;
        h.eps = 1e-13;
        h.max_iters = 200_000;
        let rep = palm_fit(&obs, &h, default_init(&obs, &h).unwrap()).unwrap();
        assert!(rep.converged);
        let j = |a0: f64| {
            objective(
                &ModelParams::new(a0, vec![], vec![]).unwrap(),
                &values,
                &obs,
                &h,
            )
            .unwrap()
        };
        let best = golden_section(j, 0.1, 4.0, 1e-10);
        assert!(
            (rep.params.a0 - best).abs() < 1e-4,
            "{} vs {best}",
            rep.params.a0
        );
        let mean = values.iter().sum::<f64>() / 8.0;
        assert!((best - mean.ln_1p()).abs() < 1e-6);
        for (a, b) in rep.y_hat.values().iter().zip(&values) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    fn toy_problem() -> (ObservationSet, HyperParams, Init) {
        let values = crate::sim::simulate(&crate::sim::TrueModel::reference(60, 1)).unwrap();
        let mask: Vec<bool> = (0..60).map(|i| i % 5 != 2).collect();
        let obs = obs_from(values.values(), &mask);
        let h = HyperParams::new(2, 1, 2.0, 3.0);
        let init = default_init(&obs, &h).unwrap();
        (obs, h, init)
    }

    #[test]
    fn fista_without_momentum_is_plain_proximal_gradient() {
        let (obs, mut h, init) = toy_problem();
        h.max_iters = 5;
        h.eps = f64::MIN_POSITIVE;
        let rep = accelerated_fit(&obs, &h, init.clone(), Solver::Fista, Momentum::Off).unwrap();

        let mut params = init.params;
        let mut y = init.y.into_inner();
        let mut trace = Vec::new();
        for _ in 0..5 {
            let g = grad_smooth(&params, &y).unwrap();
            params = ModelParams {
                a0: params.a0 - h.tau * g.a0,
                a: coef_prox_step(&params.a, &g.a, h.tau, h.mu, h.s),
                b: coef_prox_step(&params.b, &g.b, h.tau, h.mu, h.s),
            };
            y = y_prox_step(&y, &g.y, h.tau, &obs, h.lambda, h.r);
            trace.push(objective(&params, &y, &obs, &h).unwrap());
        }
        assert_eq!(rep.params, params);
        assert_eq!(rep.y_hat.values(), &y[..]);
        assert_eq!(rep.objective_trace, trace);
    }

    #[test]
    fn hybrid_without_momentum_is_palm() {
        let (obs, mut h, init) = toy_problem();
        h.max_iters = 25;
        let hybrid =
            accelerated_fit(&obs, &h, init.clone(), Solver::Hybrid, Momentum::Off).unwrap();
        let palm = palm_fit(&obs, &h, init).unwrap();
        assert_eq!(hybrid.params, palm.params);
        assert_eq!(hybrid.y_hat, palm.y_hat);
        assert_eq!(hybrid.objective_trace, palm.objective_trace);
    }

    #[test]
    fn palm_trace_is_nonincreasing_on_small_step() {
        let (obs, mut h, init) = toy_problem();
        h.max_iters = 2000;
        let rep = palm_fit(&obs, &h, init).unwrap();
        assert!(rep
            .objective_trace
            .windows(2)
            .all(|w| w[1] <= w[0] + PALM_INCREASE_TOL));
    }

    #[test]
    fn fits_are_deterministic() {
        let (obs, mut h, init) = toy_problem();
        h.max_iters = 300;
        for solver in [Solver::Palm, Solver::Fista, Solver::Hybrid] {
            let a = fit(solver, &obs, &h, init.clone()).unwrap();
            let b = fit(solver, &obs, &h, init.clone()).unwrap();
            assert_eq!(a.params, b.params);
            assert_eq!(a.y_hat, b.y_hat);
            assert_eq!(a.objective_trace, b.objective_trace);
            assert_eq!(a.iterations, a.objective_trace.len());
            assert!(a.y_hat.values().iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn large_lambda_reproduces_observations() {
        let (obs, mut h, init) = toy_problem();
        h.lambda = 50.0;
        h.max_iters = 20_000;
        let rep = hybrid_fit(&obs, &h, init).unwrap();
        for (&i, &v) in obs.indices().iter().zip(obs.values()) {
            assert!(
                (rep.y_hat.values()[i] - v).abs() <= 1e-3,
                "y[{i}] = {} vs {v}",
                rep.y_hat.values()[i]
            );
        }
    }

    #[test]
    fn solver_names_round_trip() {
        for s in [Solver::Fista, Solver::Palm, Solver::Hybrid] {
            assert_eq!(s.to_string().parse::<Solver>().unwrap(), s);
        }
        assert!("newton".parse::<Solver>().is_err());
    }
}
