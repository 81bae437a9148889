//! Log-gamma and digamma for positive real arguments.

use crate::error::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

// Asymptotic series needs x >= this for ~1e-16 relative accuracy.
const ASYMPTOTIC_MIN: f64 = 10.0;

/// `ln Gamma(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || x.is_infinite() {
        return Err(Error::domain("x", x, "(0, inf)"));
    }
    Ok(log_gamma_unchecked(x))
}

/// `psi(x) = Gamma'(x) / Gamma(x)` for `x > 0`.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || x.is_infinite() {
        return Err(Error::domain("x", x, "(0, inf)"));
    }
    Ok(digamma_unchecked(x))
}

pub(crate) fn log_gamma_unchecked(x: f64) -> f64 {
    if x == 1.0 || x == 2.0 {
        return 0.0;
    }
    if x < ASYMPTOTIC_MIN {
        // Shift up with Gamma(x) = Gamma(x + n) / (x (x+1) ... (x+n-1)).
        // Taking the log of the product once keeps the shift exact enough.
        let mut prod = 1.0;
        let mut z = x;
        while z < ASYMPTOTIC_MIN {
            prod *= z;
            z += 1.0;
        }
        return stirling(z) - prod.ln();
    }
    stirling(x)
}

// Stirling series with Bernoulli terms up to B_16.
fn stirling(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv
        * (1.0 / 12.0
            - inv2
                * (1.0 / 360.0
                    - inv2
                        * (1.0 / 1260.0
                            - inv2
                                * (1.0 / 1680.0
                                    - inv2
                                        * (1.0 / 1188.0
                                            - inv2
                                                * (691.0 / 360_360.0
                                                    - inv2
                                                        * (1.0 / 156.0
                                                            - inv2 * 3617.0 / 122_400.0)))))));
    (x - 0.5) * x.ln() - x + LN_SQRT_2PI + series
}

pub(crate) fn digamma_unchecked(x: f64) -> f64 {
    let mut acc = 0.0;
    let mut z = x;
    while z < ASYMPTOTIC_MIN {
        acc -= 1.0 / z;
        z += 1.0;
    }
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let series = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2
                                * (1.0 / 240.0
                                    - inv2
                                        * (1.0 / 132.0
                                            - inv2 * (691.0 / 32_760.0 - inv2 / 12.0))))));
    acc + z.ln() - 0.5 * inv - series
}
