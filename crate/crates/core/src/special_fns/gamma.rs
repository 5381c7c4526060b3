//! Gamma-family functions on the real line.
//!
//! `gamma` uses the Lanczos approximation with g = 7 and nine coefficients,
//! together with the reflection formula for arguments below one half.
//! `digamma` uses upward recurrence into the asymptotic region plus the
//! reflection formula for negative arguments.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

const SQRT_TWO_PI: f64 = 2.506_628_274_631_000_5;

/// True when `x` is within `1e-12` of one of 0, -1, -2, ...
pub fn is_nonpositive_integer(x: f64) -> bool {
    x <= 1e-12 && (x - x.round()).abs() <= 1e-12
}

/// sin(pi x) with exact zeros at the integers.
pub(crate) fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (x / 2.0).floor();
    let (r, sign) = if r > 1.0 { (r - 1.0, -1.0) } else { (r, 1.0) };
    let s = if r == 0.0 || r == 1.0 {
        0.0
    } else if r < 0.25 {
        (PI * r).sin()
    } else if r < 0.75 {
        (PI * (0.5 - r)).cos()
    } else {
        (PI * (1.0 - r)).sin()
    };
    sign * s
}

/// cos(pi x) with exact zeros at the half-integers.
pub(crate) fn cos_pi(x: f64) -> f64 {
    sin_pi(x + 0.5)
}

/// Lanczos sum for x >= 0.5, returning Gamma(x).
fn lanczos(x: f64) -> f64 {
    let x = x - 1.0;
    let mut acc = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    // split the power so that t^(x+1/2) does not overflow before e^-t is applied
    let half = t.powf((x + 0.5) / 2.0);
    SQRT_TWO_PI * half * (-t).exp() * half * acc
}

/// Gamma(x). Poles at the non-positive integers are reported as errors.
pub fn gamma(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::Domain("gamma of NaN".into()));
    }
    if is_nonpositive_integer(x) {
        return Err(Error::Pole(x));
    }
    if x < 0.5 {
        Ok(PI / (sin_pi(x) * lanczos(1.0 - x)))
    } else {
        Ok(lanczos(x))
    }
}

/// 1 / Gamma(x), an entire function: exactly zero at the poles of Gamma.
pub fn rgamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        return 0.0;
    }
    if x < 0.5 {
        sin_pi(x) * lanczos(1.0 - x) / PI
    } else {
        1.0 / lanczos(x)
    }
}

/// ln Gamma(x) for x > 0.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("ln_gamma requires x > 0, got {x}")));
    }
    if x < 0.5 {
        return Ok((PI / (sin_pi(x) * lanczos(1.0 - x))).ln());
    }
    let y = x - 1.0;
    let mut acc = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (y + i as f64);
    }
    let t = y + LANCZOS_G + 0.5;
    Ok(0.5 * (2.0 * PI).ln() + (y + 0.5) * t.ln() - t + acc.ln())
}

/// Digamma psi(x) = Gamma'(x) / Gamma(x).
pub fn digamma(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::Domain("digamma of NaN".into()));
    }
    if is_nonpositive_integer(x) {
        return Err(Error::Pole(x));
    }
    if x < 0.0 {
        // psi(x) = psi(1 - x) - pi cot(pi x)
        let cot = cos_pi(x) / sin_pi(x);
        return Ok(digamma(1.0 - x)? - PI * cot);
    }
    let mut x = x;
    let mut shift = 0.0;
    while x < 10.0 {
        shift -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    // Bernoulli-number tail: B_2k / (2k x^2k), k = 1..7
    let tail = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2
                                * (1.0 / 240.0
                                    - inv2 * (1.0 / 132.0 - inv2 * (691.0 / 32_760.0 - inv2 / 12.0))))));
    Ok(shift + x.ln() - 0.5 / x - tail)
}

/// Rising factorial (x)_n = x (x+1) ... (x+n-1), with (x)_0 = 1.
pub fn pochhammer(x: f64, n: u32) -> f64 {
    (0..n).fold(1.0, |acc, k| acc * (x + k as f64))
}

/// Surface area of the unit sphere S^{k-1} in R^k.
pub fn unit_sphere_area(k: usize) -> f64 {
    let half = k as f64 / 2.0;
    2.0 * PI.powf(half) * rgamma(half)
}
