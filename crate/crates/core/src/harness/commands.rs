//! Subcommand bodies. Each writes its files into `out` and reports a
//! [`Status`]; input and validation problems are returned as errors.
//!
//! Outputs:
//!
//! * `fit`: `report.json`, `fitted.csv` (`t,y_hat,u_hat,observed,y_tilde,residual`)
//! * `simulate`: `series.csv` (`t,y,observed`), `truth.csv`
//!   (`t,y_true,u_true,observed,contaminated`), `contamination.csv` (`t`)
//! * `experiment`: `estimates.csv`
//!   (`run,coefficient,estimate,truth,iterations,converged`), `summary.json`
//! * `prox-curve`: `energy.csv`, `shrink.csv`

use std::path::Path;

use serde::Serialize;

use super::config::{ProxCurveConfig, RunConfig};
use super::io::{csv_writer, fmt_num, read_series_csv, write_json, write_series_csv};
use crate::error::{Error, Result};
use crate::model::neg_log_likelihood;
use crate::prox::{eval_g, prox_energy, shrink, ShrinkageProblem};
use crate::sim::{corrupt, run_experiment, simulate_with_means, FiveNumber};
use crate::solvers::{default_init, fit, Solver};

/// Process outcome; the discriminant is the exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success = 0,
    InputError = 1,
    NotConverged = 2,
}

impl Status {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Serialize)]
struct FitJson {
    solver: Solver,
    converged: bool,
    iterations: usize,
    objective: f64,
    neg_log_likelihood: Option<f64>,
    a0: f64,
    a: Vec<f64>,
    b: Vec<f64>,
    n: usize,
    observed: usize,
    p: usize,
    q: usize,
    r: f64,
    s: f64,
    lambda: f64,
    mu: f64,
    tau: f64,
    eps: f64,
}

pub fn cmd_fit(cfg: &RunConfig, out: &Path) -> Result<Status> {
    let hyper = cfg.hyper()?;
    let input = cfg
        .input
        .as_ref()
        .ok_or_else(|| Error::Invalid("config key `input` is required for fit".into()))?;
    let obs = read_series_csv(input)?;
    let init = default_init(&obs, &hyper)?;
    let rep = match fit(cfg.solver, &obs, &hyper, init) {
        Ok(rep) => rep,
        Err(e @ (Error::Diverged { .. } | Error::NumericalRange(_))) => {
            eprintln!("fit did not converge: {e}");
            return Ok(Status::NotConverged);
        }
        Err(e) => return Err(e),
    };
    std::fs::create_dir_all(out)?;

    let y = rep.y_hat.values();
    let nll = neg_log_likelihood(&rep.params, y, &obs, &hyper).ok();
    write_json(
        &out.join("report.json"),
        &FitJson {
            solver: rep.solver,
            converged: rep.converged,
            iterations: rep.iterations,
            objective: rep.final_objective(),
            neg_log_likelihood: nll,
            a0: rep.params.a0,
            a: rep.params.a.clone(),
            b: rep.params.b.clone(),
            n: obs.len(),
            observed: obs.count(),
            p: hyper.p,
            q: hyper.q,
            r: hyper.r,
            s: hyper.s,
            lambda: hyper.lambda,
            mu: hyper.mu,
            tau: hyper.tau,
            eps: hyper.eps,
        },
    )?;

    let mut w = csv_writer(&out.join("fitted.csv"))?;
    w.write_record(["t", "y_hat", "u_hat", "observed", "y_tilde", "residual"])?;
    for (i, target) in obs.dense().into_iter().enumerate() {
        let (flag, tilde, resid) = match target {
            Some(v) => ("1", fmt_num(v), fmt_num(y[i] - v)),
            None => ("0", String::new(), String::new()),
        };
        w.write_record([
            (i + 1).to_string(),
            fmt_num(y[i]),
            fmt_num(rep.u_hat.u[i]),
            flag.to_string(),
            tilde,
            resid,
        ])?;
    }
    w.flush()?;

    Ok(if rep.converged {
        Status::Success
    } else {
        Status::NotConverged
    })
}

pub fn cmd_simulate(cfg: &RunConfig, out: &Path) -> Result<Status> {
    let model = cfg.true_model();
    let spec = cfg.corruption();
    spec.validate()?;
    let sim = simulate_with_means(&model)?;
    let corrupted = corrupt(&sim.y, &spec)?;
    std::fs::create_dir_all(out)?;

    write_series_csv(&out.join("series.csv"), &corrupted.obs)?;

    let observed = corrupted.obs.mask();
    let mut contaminated = vec![false; model.n];
    for &i in &corrupted.indices {
        contaminated[i] = true;
    }
    let mut w = csv_writer(&out.join("truth.csv"))?;
    w.write_record(["t", "y_true", "u_true", "observed", "contaminated"])?;
    for i in 0..model.n {
        w.write_record([
            (i + 1).to_string(),
            fmt_num(sim.y.values()[i]),
            fmt_num(sim.u[i]),
            u8::from(observed[i]).to_string(),
            u8::from(contaminated[i]).to_string(),
        ])?;
    }
    w.flush()?;

    let mut w = csv_writer(&out.join("contamination.csv"))?;
    w.write_record(["t"])?;
    for &i in &corrupted.indices {
        w.write_record([(i + 1).to_string()])?;
    }
    w.flush()?;
    Ok(Status::Success)
}

#[derive(Serialize)]
struct CoefficientJson<'a> {
    name: &'a str,
    truth: f64,
    #[serde(flatten)]
    stats: FiveNumber,
    median_abs_error: f64,
}

#[derive(Serialize)]
struct FailureJson<'a> {
    run: usize,
    error: &'a str,
}

#[derive(Serialize)]
struct SummaryJson<'a> {
    solver: Solver,
    runs: usize,
    succeeded: usize,
    converged: usize,
    mean_iterations: f64,
    coefficients: Vec<CoefficientJson<'a>>,
    failures: Vec<FailureJson<'a>>,
}

pub fn cmd_experiment(cfg: &RunConfig, out: &Path) -> Result<Status> {
    let hyper = cfg.hyper()?;
    let summary = run_experiment(
        &cfg.true_model(),
        &cfg.corruption(),
        &hyper,
        cfg.runs,
        cfg.solver,
        cfg.execution,
    )?;
    std::fs::create_dir_all(out)?;

    let mut w = csv_writer(&out.join("estimates.csv"))?;
    w.write_record([
        "run",
        "coefficient",
        "estimate",
        "truth",
        "iterations",
        "converged",
    ])?;
    for rec in &summary.runs {
        let Some(est) = &rec.estimates else { continue };
        for (c, coef) in summary.coefficients.iter().enumerate() {
            w.write_record([
                (rec.run + 1).to_string(),
                coef.name.clone(),
                fmt_num(est[c]),
                fmt_num(coef.truth),
                rec.iterations.to_string(),
                u8::from(rec.converged).to_string(),
            ])?;
        }
    }
    w.flush()?;

    let succeeded = summary.runs.iter().filter(|r| r.error.is_none()).count();
    let converged = summary.runs.iter().filter(|r| r.converged).count();
    write_json(
        &out.join("summary.json"),
        &SummaryJson {
            solver: summary.solver,
            runs: summary.runs.len(),
            succeeded,
            converged,
            mean_iterations: summary.mean_iterations(),
            coefficients: summary
                .coefficients
                .iter()
                .map(|c| CoefficientJson {
                    name: &c.name,
                    truth: c.truth,
                    stats: c.stats,
                    median_abs_error: c.median_abs_error(),
                })
                .collect(),
            failures: summary
                .failed_runs()
                .map(|r| FailureJson {
                    run: r.run + 1,
                    error: r.error.as_deref().unwrap_or(""),
                })
                .collect(),
        },
    )?;
    for r in summary.failed_runs() {
        eprintln!("{}", r.error.as_deref().unwrap_or(""));
    }
    Ok(if converged == summary.runs.len() {
        Status::Success
    } else {
        Status::NotConverged
    })
}

/// `t_min, t_min + step, ..., t_max` with both endpoints exact.
pub fn grid(t_min: f64, t_max: f64, step: f64) -> Vec<f64> {
    let n = ((t_max - t_min) / step).round().max(1.0) as usize;
    (0..=n)
        .map(|k| {
            if k == n {
                t_max
            } else {
                t_min + k as f64 * step
            }
        })
        .collect()
}

fn label(x: f64) -> String {
    format!("{x}")
}

pub fn cmd_prox_curve(cfg: &RunConfig, out: &Path) -> Result<Status> {
    let pc: &ProxCurveConfig = &cfg.prox;
    let crit = ShrinkageProblem::new(pc.anchor, 1.0, pc.r)?.critical_mu();
    let ts = grid(pc.t_min, pc.t_max, pc.t_step);
    std::fs::create_dir_all(out)?;

    // E_r(t) and g_r(t) at the anchor for each multiple of the critical weight
    let anchored: Vec<ShrinkageProblem> = pc
        .mu_multiples
        .iter()
        .map(|m| ShrinkageProblem::new(pc.anchor, m * crit, pc.r))
        .collect::<Result<_>>()?;
    let mut w = csv_writer(&out.join("energy.csv"))?;
    let mut header = vec!["t".to_string()];
    for m in &pc.mu_multiples {
        header.push(format!("energy_mu{}", label(*m)));
        header.push(format!("g_mu{}", label(*m)));
    }
    w.write_record(&header)?;
    for &t in &ts {
        let mut row = vec![fmt_num(t)];
        for prob in &anchored {
            row.push(fmt_num(prox_energy(t, prob)));
            row.push(eval_g(t, prob).map(fmt_num).unwrap_or_default());
        }
        w.write_record(&row)?;
    }
    w.flush()?;

    // shrink(t', .) across the grid of anchors
    let mut w = csv_writer(&out.join("shrink.csv"))?;
    let mut header = vec!["t_prime".to_string()];
    header.extend(pc.r_values.iter().map(|r| format!("shrink_r{}", label(*r))));
    header.extend(
        pc.mu_multiples
            .iter()
            .map(|m| format!("shrink_mu{}", label(*m))),
    );
    w.write_record(&header)?;
    for &tp in &ts {
        let mut row = vec![fmt_num(tp)];
        for &r in &pc.r_values {
            row.push(fmt_num(shrink(&ShrinkageProblem::new(tp, pc.mu, r)?)));
        }
        for m in &pc.mu_multiples {
            row.push(fmt_num(shrink(&ShrinkageProblem::new(tp, m * crit, pc.r)?)));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(Status::Success)
}
