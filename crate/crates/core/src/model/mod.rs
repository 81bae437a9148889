//! Poisson log-linear autoregression.
//!
//! The conditional mean follows
//!
//! ```text
//! log(u_i + 1) = a0 + sum_k a_k log(y_{i-k} + 1) + sum_k b_k log(u_{i-k} + 1)
//! ```
//!
//! with `y` and `u` identically zero before the first index, and
//! `u_i = max(exp(.) - 1, 0)`. The objective couples the Poisson negative
//! log-likelihood of the full series `y` with an `l^r` penalty on the
//! residual against the observed entries and an `l^s` penalty on the lag
//! coefficients.

mod special;

pub use special::{digamma, log_gamma};

use crate::error::{Error, Result};
use special::{digamma_unchecked, log_gamma_unchecked};

/// Floor applied to `u_i` inside `log(u_i)` and `y_i / u_i`.
pub const U_FLOOR: f64 = 1e-8;

/// Coefficients `(a0, a, b)` of the log-linear recursion.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub a0: f64,
    /// Lags of `log(y + 1)`, `a[k-1] = a_k`.
    pub a: Vec<f64>,
    /// Lags of `log(u + 1)`, `b[k-1] = b_k`.
    pub b: Vec<f64>,
}

impl ModelParams {
    pub fn new(a0: f64, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        let p = Self { a0, a, b };
        if !p.is_finite() {
            return Err(Error::Invalid("model coefficients must be finite".into()));
        }
        Ok(p)
    }

    pub fn zeros(p: usize, q: usize) -> Self {
        Self {
            a0: 0.0,
            a: vec![0.0; p],
            b: vec![0.0; q],
        }
    }

    pub fn p(&self) -> usize {
        self.a.len()
    }

    pub fn q(&self) -> usize {
        self.b.len()
    }

    pub fn is_finite(&self) -> bool {
        self.a0.is_finite() && self.a.iter().chain(&self.b).all(|v| v.is_finite())
    }

    /// Coefficient names in report order: `a0, a1..ap, b1..bq`.
    pub fn names(&self) -> Vec<String> {
        std::iter::once("a0".to_string())
            .chain((1..=self.p()).map(|k| format!("a{k}")))
            .chain((1..=self.q()).map(|k| format!("b{k}")))
            .collect()
    }

    /// Coefficients flattened in the order of [`ModelParams::names`].
    pub fn flatten(&self) -> Vec<f64> {
        std::iter::once(self.a0)
            .chain(self.a.iter().copied())
            .chain(self.b.iter().copied())
            .collect()
    }
}

/// A full-length nonnegative series.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSample {
    values: Vec<f64>,
}

impl SeriesSample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::Invalid(format!(
                "series entry {} = {v} must be finite and nonnegative",
                i + 1
            )));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.values
    }
}

/// Observed index set `D` (0-based indices, ascending) with its values.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSet {
    len: usize,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl ObservationSet {
    /// Builds an observation set from a mask and a dense value vector; values
    /// off the mask are ignored.
    pub fn from_mask(mask: &[bool], dense: &[f64]) -> Result<Self> {
        if mask.len() != dense.len() {
            return Err(Error::Dimension(format!(
                "mask has {} entries but values have {}",
                mask.len(),
                dense.len()
            )));
        }
        let (indices, values): (Vec<_>, Vec<_>) = mask
            .iter()
            .zip(dense)
            .enumerate()
            .filter(|(_, (m, _))| **m)
            .map(|(i, (_, v))| (i, *v))
            .unzip();
        Self::from_parts(mask.len(), indices, values)
    }

    /// Builds an observation set from strictly increasing indices into `0..len`.
    pub fn from_parts(len: usize, indices: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::EmptyObservations);
        }
        if indices.len() != values.len() {
            return Err(Error::Dimension(format!(
                "{} observed indices but {} values",
                indices.len(),
                values.len()
            )));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) || indices[indices.len() - 1] >= len {
            return Err(Error::Invalid(
                "observed indices must be strictly increasing and inside the series".into(),
            ));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Invalid(format!(
                "observed value {v} must be finite and nonnegative"
            )));
        }
        Ok(Self {
            len,
            indices,
            values,
        })
    }

    /// Series length `N`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `|D|`
    pub fn count(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.len];
        for &i in &self.indices {
            m[i] = true;
        }
        m
    }

    /// Observed values scattered into a length-`N` vector, `None` off `D`.
    pub fn dense(&self) -> Vec<Option<f64>> {
        let mut d = vec![None; self.len];
        for (&i, &v) in self.indices.iter().zip(&self.values) {
            d[i] = Some(v);
        }
        d
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub(crate) fn set_value(&mut self, pos: usize, value: f64) {
        self.values[pos] = value;
    }
}

/// Orders, penalty weights and solver controls.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperParams {
    pub p: usize,
    pub q: usize,
    /// Residual penalty exponent, in `(0, 1]`.
    pub r: f64,
    /// Coefficient penalty exponent, in `(0, 1]`.
    pub s: f64,
    pub lambda: f64,
    pub mu: f64,
    /// Shared gradient step size.
    pub tau: f64,
    /// Tolerance on `|J_m - J_{m-1}|`.
    pub eps: f64,
    pub max_iters: usize,
}

impl HyperParams {
    pub const DEFAULT_R: f64 = 0.5;
    pub const DEFAULT_S: f64 = 1.0;
    pub const DEFAULT_TAU: f64 = 1e-4;
    pub const DEFAULT_EPS: f64 = 1e-6;
    pub const DEFAULT_MAX_ITERS: usize = 50_000;

    /// Defaults for everything except orders and penalty weights.
    pub fn new(p: usize, q: usize, lambda: f64, mu: f64) -> Self {
        Self {
            p,
            q,
            r: Self::DEFAULT_R,
            s: Self::DEFAULT_S,
            lambda,
            mu,
            tau: Self::DEFAULT_TAU,
            eps: Self::DEFAULT_EPS,
            max_iters: Self::DEFAULT_MAX_ITERS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r > 0.0 && self.r <= 1.0) {
            return Err(Error::domain("r", self.r, "(0, 1]"));
        }
        if !(self.s > 0.0 && self.s <= 1.0) {
            return Err(Error::domain("s", self.s, "(0, 1]"));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::domain("lambda", self.lambda, "(0, inf)"));
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return Err(Error::domain("mu", self.mu, "[0, inf)"));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::domain("tau", self.tau, "(0, inf)"));
        }
        if !(self.eps > 0.0) {
            return Err(Error::domain("eps", self.eps, "(0, inf)"));
        }
        if self.max_iters == 0 {
            return Err(Error::domain("max_iters", 0.0, "[1, inf)"));
        }
        Ok(())
    }

    pub fn check_params(&self, params: &ModelParams) -> Result<()> {
        if params.p() != self.p || params.q() != self.q {
            return Err(Error::Dimension(format!(
                "coefficients have p = {}, q = {} but orders are p = {}, q = {}",
                params.p(),
                params.q(),
                self.p,
                self.q
            )));
        }
        Ok(())
    }
}

/// Conditional means `u` together with the intermediate forward-pass state.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanSeries {
    /// `u_i >= 0`
    pub u: Vec<f64>,
    /// `log(u_i + 1)` of the clamped mean.
    pub log1p_u: Vec<f64>,
    /// `false` where the clamp `max(., 0)` is active.
    pub active: Vec<bool>,
}

/// Linear predictor `v_i` from lagged `log(y+1)` and `log(u+1)`, zero boundary.
#[inline]
pub(crate) fn linear_predictor(
    params: &ModelParams,
    log1p_y: &[f64],
    log1p_u: &[f64],
    i: usize,
) -> f64 {
    let mut v = params.a0;
    for (k, ak) in params.a.iter().enumerate() {
        if i > k {
            v += ak * log1p_y[i - k - 1];
        }
    }
    for (k, bk) in params.b.iter().enumerate() {
        if i > k {
            v += bk * log1p_u[i - k - 1];
        }
    }
    v
}

/// Clamped mean from the linear predictor: `(u, log(u+1), active)`.
#[inline]
pub(crate) fn clamp_mean(v: f64) -> (f64, f64, bool) {
    if v > 0.0 {
        (v.exp_m1(), v, true)
    } else {
        (0.0, 0.0, false)
    }
}

pub(crate) fn log1p_series(y: &[f64]) -> Vec<f64> {
    y.iter().map(|v| v.ln_1p()).collect()
}

/// Runs the mean recursion over the whole series.
pub fn forward_means(params: &ModelParams, y: &[f64]) -> Result<MeanSeries> {
    let n = y.len();
    let ly = log1p_series(y);
    let mut u = Vec::with_capacity(n);
    let mut lu = Vec::with_capacity(n);
    let mut active = Vec::with_capacity(n);
    for i in 0..n {
        let v = linear_predictor(params, &ly, &lu, i);
        let (ui, li, act) = clamp_mean(v);
        if !ui.is_finite() {
            return Err(Error::NumericalRange(format!(
                "mean overflow at index {}: log(u + 1) = {v}",
                i + 1
            )));
        }
        u.push(ui);
        lu.push(li);
        active.push(act);
    }
    Ok(MeanSeries {
        u,
        log1p_u: lu,
        active,
    })
}

fn check_lengths(y: &[f64], obs: &ObservationSet) -> Result<()> {
    if y.len() != obs.len() {
        return Err(Error::Dimension(format!(
            "series has {} entries but the observation set covers {}",
            y.len(),
            obs.len()
        )));
    }
    Ok(())
}

fn smooth_from_means(u: &[f64], y: &[f64]) -> f64 {
    u.iter()
        .zip(y)
        .map(|(&ui, &yi)| ui - yi * ui.max(U_FLOOR).ln() + log_gamma_unchecked(yi + 1.0))
        .sum()
}

/// `H = sum_i [u_i - y_i log(u_i) + log Gamma(y_i + 1)]`.
pub fn smooth_part(params: &ModelParams, y: &[f64]) -> Result<f64> {
    let means = forward_means(params, y)?;
    Ok(smooth_from_means(&means.u, y))
}

/// `lambda * sum_{i in D} |y_i - y~_i|^r`
pub fn residual_penalty(y: &[f64], obs: &ObservationSet, lambda: f64, r: f64) -> f64 {
    lambda
        * obs
            .indices()
            .iter()
            .zip(obs.values())
            .map(|(&i, &v)| (y[i] - v).abs().powf(r))
            .sum::<f64>()
}

/// `mu * (sum |a_k|^s + sum |b_k|^s)`
pub fn coefficient_penalty(params: &ModelParams, mu: f64, s: f64) -> f64 {
    mu * params
        .a
        .iter()
        .chain(&params.b)
        .map(|c| c.abs().powf(s))
        .sum::<f64>()
}

/// The three additive pieces of the objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveParts {
    pub smooth: f64,
    pub residual: f64,
    pub coefficients: f64,
}

impl ObjectiveParts {
    pub fn total(&self) -> f64 {
        self.smooth + self.residual + self.coefficients
    }
}

pub fn objective_parts(
    params: &ModelParams,
    y: &[f64],
    obs: &ObservationSet,
    hyper: &HyperParams,
) -> Result<ObjectiveParts> {
    hyper.check_params(params)?;
    check_lengths(y, obs)?;
    Ok(ObjectiveParts {
        smooth: smooth_part(params, y)?,
        residual: residual_penalty(y, obs, hyper.lambda, hyper.r),
        coefficients: coefficient_penalty(params, hyper.mu, hyper.s),
    })
}

/// Full objective `J = H + lambda*||y_D - y~_D||_r^r + mu*(||a||_s^s + ||b||_s^s)`.
pub fn objective(
    params: &ModelParams,
    y: &[f64],
    obs: &ObservationSet,
    hyper: &HyperParams,
) -> Result<f64> {
    objective_parts(params, y, obs, hyper).map(|p| p.total())
}

/// Normalization `C_r = r / (2 Gamma(1/r))` of the density `C_r lam^(1/r) exp(-lam |x|^r)`.
pub fn laplace_family_constant(r: f64) -> Result<f64> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::domain("r", r, "(0, 1]"));
    }
    Ok(r / (2.0 * log_gamma_unchecked(1.0 / r).exp()))
}

/// Negative log-likelihood including the prior normalization constants.
///
/// Differs from [`objective`] by a constant that depends only on the
/// hyperparameters and `|D|`.
pub fn neg_log_likelihood(
    params: &ModelParams,
    y: &[f64],
    obs: &ObservationSet,
    hyper: &HyperParams,
) -> Result<f64> {
    let j = objective(params, y, obs, hyper)?;
    let d = obs.count() as f64;
    let mut constant =
        -d * laplace_family_constant(hyper.r)?.ln() - d / hyper.r * hyper.lambda.ln();
    let pq = (params.p() + params.q()) as f64;
    if pq > 0.0 {
        if !(hyper.mu > 0.0) {
            return Err(Error::domain("mu", hyper.mu, "(0, inf) when p + q > 0"));
        }
        constant += -pq * laplace_family_constant(hyper.s)?.ln() - pq / hyper.s * hyper.mu.ln();
    }
    Ok(j + constant)
}

/// Gradient of the smooth part `H` with respect to every block.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothGradient {
    pub a0: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub y: Vec<f64>,
}

/// Forward pass plus the reverse (adjoint) sweep of the mean recursion.
///
/// `adjoint[j]` is the total derivative of `H` with respect to the linear
/// predictor `v_j`, including its influence on later means through the `b`
/// feedback. Each gradient block is then a single pass over the series.
#[derive(Debug, Clone)]
pub struct SmoothState<'a> {
    params: &'a ModelParams,
    y: &'a [f64],
    log1p_y: Vec<f64>,
    means: MeanSeries,
    adjoint: Vec<f64>,
}

impl<'a> SmoothState<'a> {
    pub fn new(params: &'a ModelParams, y: &'a [f64]) -> Result<Self> {
        let means = forward_means(params, y)?;
        let n = y.len();
        let mut adjoint = vec![0.0; n];
        for j in (0..n).rev() {
            if !means.active[j] {
                continue;
            }
            let uj = means.u[j];
            let mut acc = poisson_weight(uj, y[j]);
            for (k, bk) in params.b.iter().enumerate() {
                if j + k + 1 < n {
                    acc += bk * adjoint[j + k + 1];
                }
            }
            adjoint[j] = acc;
        }
        Ok(Self {
            params,
            y,
            log1p_y: log1p_series(y),
            means,
            adjoint,
        })
    }

    pub fn means(&self) -> &MeanSeries {
        &self.means
    }

    pub fn smooth(&self) -> f64 {
        smooth_from_means(&self.means.u, self.y)
    }

    pub fn grad_a0(&self) -> f64 {
        self.adjoint.iter().sum()
    }

    pub fn grad_a(&self) -> Vec<f64> {
        lagged_dot(&self.adjoint, &self.log1p_y, self.params.p())
    }

    pub fn grad_b(&self) -> Vec<f64> {
        lagged_dot(&self.adjoint, &self.means.log1p_u, self.params.q())
    }

    pub fn grad_y(&self) -> Vec<f64> {
        let n = self.y.len();
        (0..n)
            .map(|i| {
                let yi = self.y[i];
                let direct = -self.means.u[i].max(U_FLOOR).ln() + digamma_unchecked(yi + 1.0);
                let mut coupling = 0.0;
                for (k, ak) in self.params.a.iter().enumerate() {
                    let j = i + k + 1;
                    if j < n {
                        coupling += self.adjoint[j] * (ak / (yi + 1.0));
                    }
                }
                direct + coupling
            })
            .collect()
    }

    pub fn gradient(&self) -> SmoothGradient {
        SmoothGradient {
            a0: self.grad_a0(),
            a: self.grad_a(),
            b: self.grad_b(),
            y: self.grad_y(),
        }
    }
}

// (u - y)/u * (u + 1), the derivative of u - y log u with respect to log(u + 1).
#[inline]
fn poisson_weight(u: f64, y: f64) -> f64 {
    (u - y) / u.max(U_FLOOR) * (u + 1.0)
}

// out[k-1] = sum_j w_j * x_{j-k}
fn lagged_dot(w: &[f64], x: &[f64], lags: usize) -> Vec<f64> {
    (1..=lags)
        .map(|k| {
            let mut s = 0.0;
            for j in k..w.len() {
                s += w[j] * x[j - k];
            }
            s
        })
        .collect()
}

/// Exact gradient of [`smooth_part`].
pub fn grad_smooth(params: &ModelParams, y: &[f64]) -> Result<SmoothGradient> {
    Ok(SmoothState::new(params, y)?.gradient())
}

/// Gradient of [`smooth_part`] by forward propagation of the sensitivities
/// `d log(u_i + 1) / d theta`, one recursion per coefficient and per `y_i`.
///
/// Costs `O(N^2 q)` for the `y` block. Kept as a reference for
/// [`grad_smooth`], which computes the same quantity with one reverse sweep.
pub fn grad_smooth_forward(params: &ModelParams, y: &[f64]) -> Result<SmoothGradient> {
    let means = forward_means(params, y)?;
    let n = y.len();
    let ly = log1p_series(y);
    let weight: Vec<f64> = (0..n).map(|j| poisson_weight(means.u[j], y[j])).collect();

    // Propagates S_j = active_j * (base_j + sum_l b_l S_{j-l}) and returns
    // sum_j weight_j * S_j.
    let propagate = |base: &dyn Fn(usize) -> f64, start: usize| -> f64 {
        let mut sens = vec![0.0; n];
        let mut total = 0.0;
        for j in start..n {
            let mut s = base(j);
            for (l, bl) in params.b.iter().enumerate() {
                if j > l {
                    s += bl * sens[j - l - 1];
                }
            }
            let s = if means.active[j] { s } else { 0.0 };
            sens[j] = s;
            total += weight[j] * s;
        }
        total
    };

    let a0 = propagate(&|_| 1.0, 0);
    let a = (1..=params.p())
        .map(|k| propagate(&|j| if j >= k { ly[j - k] } else { 0.0 }, 0))
        .collect();
    let b = (1..=params.q())
        .map(|k| propagate(&|j| if j >= k { means.log1p_u[j - k] } else { 0.0 }, 0))
        .collect();
    let gy = (0..n)
        .map(|i| {
            let yi = y[i];
            let direct = -means.u[i].max(U_FLOOR).ln() + digamma_unchecked(yi + 1.0);
            let coupling = propagate(
                &|j| {
                    let lag = j - i;
                    if (1..=params.p()).contains(&lag) {
                        params.a[lag - 1] / (yi + 1.0)
                    } else {
                        0.0
                    }
                },
                i + 1,
            );
            direct + coupling
        })
        .collect();
    Ok(SmoothGradient { a0, a, b, y: gy })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn full_obs(values: &[f64]) -> ObservationSet {
        ObservationSet::from_mask(&vec![true; values.len()], values).unwrap()
    }

    #[test]
    fn constant_mean() {
        let p = ModelParams::new(LN_2, vec![], vec![]).unwrap();
        let m = forward_means(&p, &[4.0, 0.0, 9.0, 1.0]).unwrap();
        for u in &m.u {
            assert!((u - 1.0).abs() < 1e-15);
        }
        let p = ModelParams::zeros(0, 0);
        assert_eq!(forward_means(&p, &[4.0, 0.0, 9.0]).unwrap().u, vec![0.0; 3]);
    }

    #[test]
    fn identity_propagation() {
        let p = ModelParams::new(0.0, vec![1.0], vec![]).unwrap();
        let m = forward_means(&p, &[3.0, 7.0, 2.0]).unwrap();
        assert_eq!(m.u[0], 0.0);
        assert!((m.u[1] - 3.0).abs() < 1e-14);
        assert!((m.u[2] - 7.0).abs() < 1e-13);
    }

    #[test]
    fn clamp_feeds_back_zero() {
        // v_1 = -1 is clamped, so the b-term sees log(0 + 1) = 0
        let p = ModelParams::new(-1.0, vec![], vec![5.0]).unwrap();
        let m = forward_means(&p, &[0.0, 0.0]).unwrap();
        assert_eq!(m.u, vec![0.0, 0.0]);
        assert_eq!(m.active, vec![false, false]);
    }

    #[test]
    fn overflow_is_reported() {
        let p = ModelParams::new(800.0, vec![], vec![]).unwrap();
        assert!(matches!(
            forward_means(&p, &[1.0]),
            Err(Error::NumericalRange(_))
        ));
    }

    #[test]
    fn objective_examples() {
        let p = ModelParams::new(LN_2, vec![], vec![]).unwrap();
        let obs = full_obs(&[1.0]);
        let h = HyperParams::new(0, 0, 3.0, 2.0);
        assert!((objective(&p, &[1.0], &obs, &h).unwrap() - 1.0).abs() < 1e-14);
        let h = HyperParams::new(0, 0, 5.0, 2.0);
        let j = objective(&p, &[2.0], &obs, &h).unwrap();
        assert!((j - (6.0 + LN_2)).abs() < 1e-13, "{j}");
        assert!((smooth_part(&p, &[1.0]).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn objective_checks_shapes() {
        let p = ModelParams::zeros(2, 0);
        let obs = full_obs(&[1.0, 2.0]);
        let h = HyperParams::new(1, 0, 1.0, 1.0);
        assert!(matches!(
            objective(&p, &[1.0, 2.0], &obs, &h),
            Err(Error::Dimension(_))
        ));
        let h = HyperParams::new(2, 0, 1.0, 1.0);
        assert!(objective(&p, &[1.0], &obs, &h).is_err());
    }

    #[test]
    fn gradient_examples() {
        let p = ModelParams::new(LN_2, vec![], vec![]).unwrap();
        let g = grad_smooth(&p, &[1.0]).unwrap();
        assert!(g.a0.abs() < 1e-14);
        let g = grad_smooth(&p, &[2.0]).unwrap();
        assert!((g.a0 + 2.0).abs() < 1e-14);
    }

    #[test]
    fn flat_branch_has_zero_sensitivity() {
        let p = ModelParams::new(-0.5, vec![0.1], vec![]).unwrap();
        let g = grad_smooth(&p, &[0.0, 1.0]).unwrap();
        // u_1 clamped; u_2 = exp(-0.5) - 1 < 0 clamped as well
        assert_eq!(g.a0, 0.0);
        assert_eq!(g.a, vec![0.0]);
    }

    fn sample_series(n: usize, seed: u64) -> Vec<f64> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random_range(0.0..8.0)).collect()
    }

    fn active_params(q: usize) -> ModelParams {
        let b = [0.2, -0.05][..q].to_vec();
        ModelParams::new(0.8, vec![0.3, -0.1, 0.05], b).unwrap()
    }

    fn central_diff(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let y = sample_series(40, 3);
        let p = active_params(2);
        assert!(forward_means(&p, &y).unwrap().active.iter().all(|&a| a));
        let g = grad_smooth(&p, &y).unwrap();
        let h = 1e-6;
        let close = |fd: f64, an: f64| (fd - an).abs() <= 1e-6 * fd.abs().max(1.0);

        let fd = central_diff(
            |t| smooth_part(&ModelParams { a0: t, ..p.clone() }, &y).unwrap(),
            p.a0,
            h,
        );
        assert!(close(fd, g.a0), "a0: {fd} vs {}", g.a0);
        for k in 0..p.p() {
            let fd = central_diff(
                |t| {
                    let mut q = p.clone();
                    q.a[k] = t;
                    smooth_part(&q, &y).unwrap()
                },
                p.a[k],
                h,
            );
            assert!(close(fd, g.a[k]), "a{k}: {fd} vs {}", g.a[k]);
        }
        for k in 0..p.q() {
            let fd = central_diff(
                |t| {
                    let mut q = p.clone();
                    q.b[k] = t;
                    smooth_part(&q, &y).unwrap()
                },
                p.b[k],
                h,
            );
            assert!(close(fd, g.b[k]), "b{k}: {fd} vs {}", g.b[k]);
        }
        for i in [0, 1, 7, 20, 38, 39] {
            let fd = central_diff(
                |t| {
                    let mut z = y.clone();
                    z[i] = t;
                    smooth_part(&p, &z).unwrap()
                },
                y[i],
                h,
            );
            assert!(close(fd, g.y[i]), "y{i}: {fd} vs {}", g.y[i]);
        }
    }

    #[test]
    fn adjoint_matches_forward_sensitivities() {
        let y = sample_series(60, 9);
        let p = active_params(0);
        assert_eq!(
            grad_smooth(&p, &y).unwrap(),
            grad_smooth_forward(&p, &y).unwrap()
        );

        for q in 1..=2 {
            let p = active_params(q);
            let g = grad_smooth(&p, &y).unwrap();
            let f = grad_smooth_forward(&p, &y).unwrap();
            let pairs = std::iter::once((g.a0, f.a0))
                .chain(g.a.iter().copied().zip(f.a.iter().copied()))
                .chain(g.b.iter().copied().zip(f.b.iter().copied()))
                .chain(g.y.iter().copied().zip(f.y.iter().copied()));
            for (x, z) in pairs {
                assert!(
                    (x - z).abs() <= 1e-10 * z.abs().max(1.0),
                    "q = {q}: {x} vs {z}"
                );
            }
        }
    }

    #[test]
    fn smooth_state_agrees_with_free_functions() {
        let y = sample_series(25, 4);
        let p = active_params(1);
        let st = SmoothState::new(&p, &y).unwrap();
        assert_eq!(st.smooth(), smooth_part(&p, &y).unwrap());
        assert_eq!(st.means(), &forward_means(&p, &y).unwrap());
        assert_eq!(st.gradient(), grad_smooth(&p, &y).unwrap());
    }

    #[test]
    fn objective_decomposes() {
        let y = sample_series(30, 5);
        let mask: Vec<bool> = (0..30).map(|i| i % 3 != 0).collect();
        let obs =
            ObservationSet::from_mask(&mask, &y.iter().map(|v| v.round()).collect::<Vec<_>>())
                .unwrap();
        let p = active_params(1);
        let mut h = HyperParams::new(3, 1, 2.0, 7.0);
        h.r = 0.5;
        h.s = 0.75;
        let parts = objective_parts(&p, &y, &obs, &h).unwrap();
        assert_eq!(parts.smooth, smooth_part(&p, &y).unwrap());
        assert_eq!(parts.residual, residual_penalty(&y, &obs, 2.0, 0.5));
        assert_eq!(parts.coefficients, coefficient_penalty(&p, 7.0, 0.75));
        assert_eq!(objective(&p, &y, &obs, &h).unwrap(), parts.total());

        let mut resid = 0.0;
        for i in 0..30 {
            if mask[i] {
                resid += (y[i] - y[i].round()).abs().sqrt();
            }
        }
        assert!((parts.residual - 2.0 * resid).abs() < 1e-12);
        let coef: f64 = [0.3f64, -0.1, 0.05, 0.2]
            .iter()
            .map(|c| c.abs().powf(0.75))
            .sum();
        assert!((parts.coefficients - 7.0 * coef).abs() < 1e-12);
    }

    #[test]
    fn objective_is_monotone_in_penalty_weights() {
        let y = sample_series(30, 6);
        let obs = full_obs(&y.iter().map(|v| v.round()).collect::<Vec<_>>());
        let p = active_params(1);
        let j = |lambda: f64, mu: f64| {
            objective(&p, &y, &obs, &HyperParams::new(3, 1, lambda, mu)).unwrap()
        };
        let mut prev = j(0.5, 1.0);
        for lambda in [1.0, 2.0, 10.0, 50.0] {
            let cur = j(lambda, 1.0);
            assert!(cur > prev);
            prev = cur;
        }
        let mut prev = j(1.0, 0.0);
        for mu in [1.0, 10.0, 60.0] {
            let cur = j(1.0, mu);
            assert!(cur > prev);
            prev = cur;
        }
    }

    #[test]
    fn boundary_lags_read_as_zero() {
        let y = sample_series(12, 8);
        let p = active_params(2);
        let m = forward_means(&p, &y).unwrap();
        assert!((m.u[0] - p.a0.exp_m1()).abs() < 1e-15);
        let v1 = p.a0 + p.a[0] * y[0].ln_1p() + p.b[0] * p.a0;
        assert!((m.u[1] - v1.exp_m1()).abs() < 1e-13);

        // means only look backward: extending the series leaves the prefix intact
        let mut longer = y.clone();
        longer.extend([3.0, 0.0, 11.0]);
        let ml = forward_means(&p, &longer).unwrap();
        assert_eq!(&ml.u[..12], &m.u[..]);

        // an all-zero series keeps the intercept-only mean at every step when a = b = 0
        let p0 = ModelParams::new(0.4, vec![0.0; 3], vec![0.0; 2]).unwrap();
        let m0 = forward_means(&p0, &[0.0; 6]).unwrap();
        assert!(m0.u.iter().all(|&u| u == 0.4f64.exp_m1()));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn means_are_nonnegative(
                a0 in -2.0..2.0f64,
                a in prop::collection::vec(-0.6..0.6f64, 0..4),
                b in prop::collection::vec(-0.4..0.4f64, 0..3),
                y in prop::collection::vec(0.0..30.0f64, 1..40),
            ) {
                let p = ModelParams::new(a0, a, b).unwrap();
                let m = forward_means(&p, &y).unwrap();
                for i in 0..y.len() {
                    prop_assert!(m.u[i] >= 0.0);
                    prop_assert_eq!(m.active[i], m.u[i] > 0.0 || m.log1p_u[i] > 0.0);
                    prop_assert!((m.log1p_u[i] - m.u[i].ln_1p()).abs() <= 1e-12 * m.log1p_u[i].max(1.0));
                }
            }

            #[test]
            fn penalties_are_nonnegative_and_vanish_at_fit(
                y in prop::collection::vec(0.0..30.0f64, 1..40),
                lambda in 0.1..50.0f64,
                r in 0.1..=1.0f64,
            ) {
                let obs = full_obs(&y);
                prop_assert_eq!(residual_penalty(&y, &obs, lambda, r), 0.0);
                let shifted: Vec<f64> = y.iter().map(|v| v + 0.5).collect();
                prop_assert!(residual_penalty(&shifted, &obs, lambda, r) > 0.0);
            }

            #[test]
            fn adjoint_equals_forward(
                a0 in 0.2..1.5f64,
                a in prop::collection::vec(-0.3..0.3f64, 0..3),
                b in prop::collection::vec(-0.3..0.3f64, 0..3),
                y in prop::collection::vec(0.0..15.0f64, 1..25),
            ) {
                let p = ModelParams::new(a0, a, b).unwrap();
                let g = grad_smooth(&p, &y).unwrap();
                let f = grad_smooth_forward(&p, &y).unwrap();
                let tol = |z: f64| 1e-9 * z.abs().max(1.0);
                prop_assert!((g.a0 - f.a0).abs() <= tol(f.a0));
                for (x, z) in g.a.iter().zip(&f.a).chain(g.b.iter().zip(&f.b)).chain(g.y.iter().zip(&f.y)) {
                    prop_assert!((x - z).abs() <= tol(*z), "{} vs {}", x, z);
                }
            }
        }
    }

    #[test]
    fn laplace_constant() {
        assert!((laplace_family_constant(1.0).unwrap() - 0.5).abs() < 1e-15);
        // Gamma(2) = 1, so C_{1/2} = 1/4
        assert!((laplace_family_constant(0.5).unwrap() - 0.25).abs() < 1e-14);
        assert!(laplace_family_constant(0.0).is_err());
    }

    #[test]
    fn laplace_constant_normalizes_by_quadrature() {
        // C_r * int_R exp(-|x|^r) dx should be 1
        for &r in &[0.5, 0.75, 1.0] {
            let c = laplace_family_constant(r).unwrap();
            // int_0^inf exp(-x^r) dx: substitute t = x^r, then t = w^3,
            // giving (3/r) int_0^inf w^(3/r - 1) exp(-w^3) dw, smooth at 0; Simpson on [0, 6]
            let n = 200_000;
            let h = 6.0 / n as f64;
            let f = |w: f64| 3.0 / r * w.powf(3.0 / r - 1.0) * (-w * w * w).exp();
            let mut s = f(0.0) + f(6.0);
            for i in 1..n {
                let wt = if i % 2 == 1 { 4.0 } else { 2.0 };
                s += wt * f(i as f64 * h);
            }
            let integral = 2.0 * s * h / 3.0;
            assert!(
                (c * integral - 1.0).abs() < 1e-8,
                "r = {r}: {}",
                c * integral
            );
        }
    }

    #[test]
    fn observation_set_invariants() {
        assert!(matches!(
            ObservationSet::from_mask(&[false, false], &[1.0, 2.0]),
            Err(Error::EmptyObservations)
        ));
        assert!(ObservationSet::from_mask(&[true, false], &[-1.0, 2.0]).is_err());
        let o = ObservationSet::from_mask(&[true, false, true], &[1.0, f64::NAN, 3.0]).unwrap();
        assert_eq!(o.indices(), &[0, 2]);
        assert_eq!(o.values(), &[1.0, 3.0]);
        assert_eq!(o.mask(), vec![true, false, true]);
        assert_eq!(o.mean(), 2.0);
    }

    #[test]
    fn hyper_validation() {
        let mut h = HyperParams::new(1, 0, 1.0, 1.0);
        assert!(h.validate().is_ok());
        h.r = 1.5;
        assert!(h.validate().is_err());
        h.r = 1.0;
        h.s = 0.0;
        assert!(h.validate().is_err());
        h.s = 1.0;
        h.lambda = 0.0;
        assert!(h.validate().is_err());
    }
}
