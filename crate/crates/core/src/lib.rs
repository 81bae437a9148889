//! Robust estimation of Poisson log-linear autoregressive count series with
//! missing entries and sparse outliers.
//!
//! The series `y` is treated as a decision variable alongside the model
//! coefficients: observed entries are tied to the data through an `l^r`
//! penalty (`0 < r <= 1`) that tolerates a few large deviations, unobserved
//! entries are imputed freely, and lag coefficients carry an `l^s` sparsity
//! penalty. Three block proximal-gradient schemes are provided in
//! [`solvers`].
//!
//! ```no_run
//! use robust_ts::{model::HyperParams, sim, solvers};
//!
//! let truth = sim::TrueModel::reference(1000, 7);
//! let y = sim::simulate(&truth).unwrap();
//! let obs = sim::full_observation(&y);
//! let mut hyper = HyperParams::new(6, 0, 5.0, 10.0);
//! hyper.tau = 1e-5;
//! let init = solvers::default_init(&obs, &hyper).unwrap();
//! let fit = solvers::hybrid_fit(&obs, &hyper, init).unwrap();
//! println!("a0 = {}, a = {:?}", fit.params.a0, fit.params.a);
//! ```

pub mod error;
pub mod harness;
pub mod model;
pub mod par;
pub mod prox;
pub mod sim;
pub mod solvers;

pub use error::{Error, Result};
