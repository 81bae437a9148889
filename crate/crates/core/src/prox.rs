//! Scalar proximal operators for the penalty `mu * |t|^r`.
//!
//! For an anchor `t'` the shrinkage map returns the global minimizer of
//!
//! ```text
//! E_r(t) = mu * |t|^r + 0.5 * (t - t')^2
//! ```
//!
//! `r = 1` is soft thresholding, `r = 0` is hard thresholding, and for
//! `0 < r < 1` the positive stationary point is the larger zero of the
//! strictly convex function `g_r(t) = mu*r - t'*t^(1-r) + t^(2-r)`, found by
//! Newton's method started at `t'`.

use crate::error::{Error, Result};

/// Default Newton stopping tolerance on successive iterates.
pub const NEWTON_EPS: f64 = 1e-6;

/// Iteration cap before the bisection fallback takes over.
pub const NEWTON_MAX_ITERS: usize = 50;

/// A single scalar shrinkage problem `argmin_t mu*|t|^r + 0.5*(t - t')^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShrinkageProblem {
    pub t_prime: f64,
    pub mu: f64,
    pub r: f64,
}

/// Result of the Newton search for the second zero of `g_r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondZero {
    pub root: f64,
    /// Number of Newton updates performed.
    pub iterations: usize,
    /// True when the iteration cap was hit and bisection produced the root.
    pub bisected: bool,
}

impl ShrinkageProblem {
    pub fn new(t_prime: f64, mu: f64, r: f64) -> Result<Self> {
        if !t_prime.is_finite() {
            return Err(Error::domain("t_prime", t_prime, "a finite real"));
        }
        if !(mu >= 0.0) || !mu.is_finite() {
            return Err(Error::domain("mu", mu, "[0, inf)"));
        }
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::domain("r", r, "[0, 1]"));
        }
        Ok(Self { t_prime, mu, r })
    }

    /// Minimizer of `g_r` on `(0, inf)` for the anchor `|t'|`.
    pub fn g_argmin(&self) -> f64 {
        (1.0 - self.r) / (2.0 - self.r) * self.t_prime.abs()
    }

    /// Largest `mu` for which `g_r` still touches zero, `(1/r)(t' - t0) t0^(1-r)`.
    ///
    /// Below this value `g_r` has two zeros and the second one is a local
    /// minimizer of the energy.
    pub fn critical_mu(&self) -> f64 {
        let a = self.t_prime.abs();
        let t0 = self.g_argmin();
        if t0 <= 0.0 {
            return 0.0;
        }
        (a - t0) * pow_pos(t0, 1.0 - self.r) / self.r
    }
}

// t^e for t > 0 only.
#[inline]
fn pow_pos(t: f64, e: f64) -> f64 {
    debug_assert!(t > 0.0);
    (e * t.ln()).exp()
}

/// `mu*|t|^r + 0.5*(t - t')^2`, with the hard-threshold convention at `r = 0`.
pub fn prox_energy(t: f64, prob: &ShrinkageProblem) -> f64 {
    let quad = 0.5 * (t - prob.t_prime) * (t - prob.t_prime);
    if t == 0.0 {
        return quad;
    }
    let pen = if prob.r == 0.0 {
        prob.mu
    } else if prob.r == 1.0 {
        prob.mu * t.abs()
    } else {
        prob.mu * pow_pos(t.abs(), prob.r)
    };
    pen + quad
}

/// `g_r(t) = mu*r - |t'|*t^(1-r) + t^(2-r)` for `t > 0` and `0 < r < 1`.
pub fn eval_g(t: f64, prob: &ShrinkageProblem) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::domain("t", t, "(0, inf)"));
    }
    if !(prob.r > 0.0 && prob.r < 1.0) {
        return Err(Error::domain("r", prob.r, "(0, 1)"));
    }
    Ok(g_unchecked(t, prob.t_prime.abs(), prob.mu, prob.r))
}

#[inline]
fn g_unchecked(t: f64, a: f64, mu: f64, r: f64) -> f64 {
    let t1r = pow_pos(t, 1.0 - r);
    mu * r - a * t1r + t * t1r
}

#[inline]
fn g_prime_unchecked(t: f64, a: f64, r: f64) -> f64 {
    let tr = pow_pos(t, -r);
    -(1.0 - r) * a * tr + (2.0 - r) * t * tr
}

/// Larger zero of `g_r` on `(t0, |t'|]`, by Newton's method started at `|t'|`.
///
/// Requires `0 < r < 1`, `t' != 0` and `g_r(t0) < 0`.
pub fn newton_second_zero(prob: &ShrinkageProblem, eps: f64) -> Result<SecondZero> {
    if !(prob.r > 0.0 && prob.r < 1.0) {
        return Err(Error::domain("r", prob.r, "(0, 1)"));
    }
    if !(eps > 0.0) {
        return Err(Error::domain("eps", eps, "(0, inf)"));
    }
    let a = prob.t_prime.abs();
    if a == 0.0 {
        return Err(Error::Precondition(
            "g_r has no second zero when t' = 0".into(),
        ));
    }
    let t0 = prob.g_argmin();
    let g0 = g_unchecked(t0, a, prob.mu, prob.r);
    if !(g0 < 0.0) {
        return Err(Error::Precondition(format!(
            "g_r(t0) = {g0} is not negative; the energy has no positive local minimizer"
        )));
    }
    Ok(second_zero_unchecked(a, prob.mu, prob.r, t0, eps))
}

fn second_zero_unchecked(a: f64, mu: f64, r: f64, t0: f64, eps: f64) -> SecondZero {
    let mut t = a;
    for it in 1..=NEWTON_MAX_ITERS {
        let next = t - g_unchecked(t, a, mu, r) / g_prime_unchecked(t, a, r);
        // Newton from the right of a convex increasing branch never undershoots
        // the root in exact arithmetic; rounding can, so keep the iterate inside.
        let next = next.clamp(t0, a);
        if (next - t).abs() <= eps {
            return SecondZero {
                root: next,
                iterations: it,
                bisected: false,
            };
        }
        t = next;
    }
    // g_r(t0) < 0 < g_r(a), so the bracket is valid.
    let (mut lo, mut hi) = (t0, a);
    while hi - lo > eps * 1e-3 && hi - lo > f64::EPSILON * hi {
        let mid = 0.5 * (lo + hi);
        if g_unchecked(mid, a, mu, r) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    SecondZero {
        root: 0.5 * (lo + hi),
        iterations: NEWTON_MAX_ITERS,
        bisected: true,
    }
}

/// Global minimizer of `E_r`.
///
/// When `E_r(0) == E_r(t2)` the nonzero minimizer is returned, matching the
/// hard-threshold convention.
pub fn shrink(prob: &ShrinkageProblem) -> f64 {
    shrink_with_eps(prob, NEWTON_EPS)
}

/// [`shrink`] with an explicit Newton tolerance.
pub fn shrink_with_eps(prob: &ShrinkageProblem, eps: f64) -> f64 {
    let tp = prob.t_prime;
    let mu = prob.mu;
    if tp == 0.0 || mu == 0.0 {
        return tp;
    }
    let r = prob.r;
    if r == 1.0 {
        return tp.signum() * (tp.abs() - mu).max(0.0);
    }
    if r == 0.0 {
        return if 0.5 * tp * tp < mu { 0.0 } else { tp };
    }
    let a = tp.abs();
    let t0 = prob.g_argmin();
    if g_unchecked(t0, a, mu, r) >= 0.0 {
        return 0.0;
    }
    let t2 = second_zero_unchecked(a, mu, r, t0, eps).root;
    let pos = ShrinkageProblem { t_prime: a, mu, r };
    if prox_energy(t2, &pos) <= prox_energy(0.0, &pos) {
        tp.signum() * t2
    } else {
        0.0
    }
}

/// Convenience form of [`shrink`] taking the three scalars directly.
#[inline]
pub fn shrink_scalar(t_prime: f64, mu: f64, r: f64) -> f64 {
    shrink(&ShrinkageProblem { t_prime, mu, r })
}

/// Elementwise shrinkage of a slice in place.
pub fn shrink_slice(values: &mut [f64], mu: f64, r: f64) {
    for v in values.iter_mut() {
        *v = shrink_scalar(*v, mu, r);
    }
}
