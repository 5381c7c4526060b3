//! Radial potentials of the two candidate minimizers.
//!
//! With rho = |x/R|^2, the uniform measure on the unit sphere produces
//! `psi_gamma(rho)` (up to the sphere area) and the ball profile
//! `(1 - |y|^2)^((2 - gamma - d)/2)` produces an affine function of rho inside
//! the ball. Exponent zero always means the logarithmic kernel.

use std::f64::consts::PI;

use crate::closed_form::{CandidateKind, CandidateMinimizer};
use crate::error::{domain, Error, Result};
use crate::special_fns::{
    digamma, gamma, hyp2f1, hyp2f1_a_derivative_at_zero, hyp2f1_at_one, hyp2f1_deriv, hyp2f1_zw,
    hyp3f2, rgamma, unit_sphere_area,
};

/// Dimension and exponents of the kernel |z|^alpha/alpha - |z|^beta/beta.
///
/// A log flag replaces the corresponding power by ln|z| and requires the
/// exponent value to be 0.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct KernelParams {
    pub d: usize,
    pub alpha: f64,
    pub beta: f64,
    pub alpha_is_log: bool,
    pub beta_is_log: bool,
}

impl KernelParams {
    pub fn new(d: usize, alpha: f64, beta: f64) -> Result<Self> {
        Self::with_flags(d, alpha, beta, false, false)
    }

    /// beta = 0 with the logarithmic repulsion -ln|z|.
    pub fn log_beta(d: usize, alpha: f64) -> Result<Self> {
        Self::with_flags(d, alpha, 0.0, false, true)
    }

    /// alpha = 0 with the logarithmic attraction ln|z|.
    pub fn log_alpha(d: usize, beta: f64) -> Result<Self> {
        Self::with_flags(d, 0.0, beta, true, false)
    }

    pub fn with_flags(
        d: usize,
        alpha: f64,
        beta: f64,
        alpha_is_log: bool,
        beta_is_log: bool,
    ) -> Result<Self> {
        if d == 0 {
            return domain("dimension must be at least 1");
        }
        if !(alpha.is_finite() && beta.is_finite()) {
            return domain("exponents must be finite");
        }
        if (alpha_is_log && alpha != 0.0) || (beta_is_log && beta != 0.0) {
            return domain("log flag set for a nonzero exponent");
        }
        if (alpha == 0.0 && !alpha_is_log) || (beta == 0.0 && !beta_is_log) {
            return domain("exponent 0 needs the explicit log flag");
        }
        let df = d as f64;
        if !(beta > -df && beta < alpha) {
            return domain(format!("need -d < beta < alpha, got d = {d}, alpha = {alpha}, beta = {beta}"));
        }
        Ok(Self { d, alpha, beta, alpha_is_log, beta_is_log })
    }

    pub fn dim(&self) -> f64 {
        self.d as f64
    }
}

/// Squared scaled radius rho = |x/R|^2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialArg(f64);

impl RadialArg {
    pub fn new(rho: f64) -> Result<Self> {
        if rho >= 0.0 && rho.is_finite() {
            Ok(Self(rho))
        } else {
            domain(format!("rho must be finite and >= 0, got {rho}"))
        }
    }

    pub fn from_norm(x_norm: f64, radius: f64) -> Result<Self> {
        Self::new((x_norm / radius).powi(2))
    }

    pub fn rho(self) -> f64 {
        self.0
    }
}

fn check_sphere_dim(d: usize) -> Result<f64> {
    if d < 2 {
        return domain(format!("sphere potentials need d >= 2, got {d}"));
    }
    Ok(d as f64)
}

fn check_rho(rho: f64) -> Result<()> {
    if rho >= 0.0 && rho.is_finite() {
        Ok(())
    } else {
        domain(format!("rho must be finite and >= 0, got {rho}"))
    }
}

/// Parameters (a, b, c) of the hypergeometric function behind psi_gamma.
fn psi_params(df: f64, g: f64) -> (f64, f64, f64) {
    (-g / 2.0, (2.0 - g - df) / 2.0, df / 2.0)
}

/// psi_gamma(rho): F(-g/2, (2-g-d)/2; d/2; rho) inside, rho^(g/2) F(...; 1/rho) outside.
///
/// Off rho = 1 any real gamma is accepted. At rho = 1 the value exists for
/// d + gamma > 1.
pub fn psi_gamma(d: usize, g: f64, rho: f64) -> Result<f64> {
    let df = check_sphere_dim(d)?;
    check_rho(rho)?;
    if g == 0.0 {
        return Ok(1.0);
    }
    let (a, b, c) = psi_params(df, g);
    if rho < 1.0 {
        hyp2f1(a, b, c, rho)
    } else if rho > 1.0 {
        Ok(rho.powf(g / 2.0) * hyp2f1_zw(a, b, c, 1.0 / rho, (rho - 1.0) / rho)?)
    } else {
        if !(df + g > 1.0) {
            return domain(format!("psi_gamma(1) needs d + gamma > 1, got {}", df + g));
        }
        hyp2f1_at_one(a, b, c)
    }
}

/// d/drho psi_gamma(rho). At rho = 1 requires d + gamma > 2.
pub fn psi_gamma_prime(d: usize, g: f64, rho: f64) -> Result<f64> {
    let df = check_sphere_dim(d)?;
    check_rho(rho)?;
    if g == 0.0 {
        return Ok(0.0);
    }
    let (a, b, c) = psi_params(df, g);
    if rho < 1.0 {
        hyp2f1_deriv(a, b, c, rho, 1)
    } else if rho > 1.0 {
        let z = 1.0 / rho;
        let w = (rho - 1.0) / rho;
        let f = hyp2f1_zw(a, b, c, z, w)?;
        let fp = a * b / c * hyp2f1_zw(a + 1.0, b + 1.0, c + 1.0, z, w)?;
        Ok(g / 2.0 * rho.powf(g / 2.0 - 1.0) * f - rho.powf(g / 2.0 - 2.0) * fp)
    } else {
        Ok(psi_values_at_one(d, g)?.first)
    }
}

/// psi_gamma and its first two derivatives at rho = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiAtOne {
    pub value: f64,
    pub first: f64,
    /// Only defined for d + gamma > 3.
    pub second: Option<f64>,
}

/// Boundary values at rho = 1; requires d + gamma > 2.
pub fn psi_values_at_one(d: usize, g: f64) -> Result<PsiAtOne> {
    let df = check_sphere_dim(d)?;
    if g == 0.0 {
        return Ok(PsiAtOne { value: 1.0, first: 0.0, second: Some(0.0) });
    }
    if !(df + g > 2.0) {
        return domain(format!("psi values at 1 need d + gamma > 2, got {}", df + g));
    }
    let value = gamma(df / 2.0)? * gamma(df + g - 1.0)?
        * rgamma((df + g) / 2.0)
        * rgamma((2.0 * df + g - 2.0) / 2.0);
    let (first_over, second_over) = psi_derivs_at_one_over_gamma(d, g)?;
    Ok(PsiAtOne { value, first: g * first_over, second: second_over.map(|s| g * s) })
}

/// psi'_gamma(1)/gamma and psi''_gamma(1)/gamma. Both stay finite at
/// gamma = 0, where they are the derivatives of the log profile at 1.
pub fn psi_derivs_at_one_over_gamma(d: usize, g: f64) -> Result<(f64, Option<f64>)> {
    let df = check_sphere_dim(d)?;
    if !(df + g > 2.0) {
        return domain(format!("psi'(1) needs d + gamma > 2, got {}", df + g));
    }
    let common = gamma(df / 2.0)? * rgamma((2.0 * df + g - 2.0) / 2.0);
    let first = 0.5 * common * gamma(df + g - 2.0)? * rgamma((df + g - 2.0) / 2.0);
    let second = if df + g > 3.0 {
        Some(0.5 * (g / 2.0 - 1.0) * common * gamma(df + g - 3.0)? * rgamma((df + g - 4.0) / 2.0))
    } else {
        None
    };
    Ok((first, second))
}

/// Integral of |x - w|^gamma over the unit sphere S^{d-1}, |x| = x_norm.
pub fn sphere_potential(d: usize, g: f64, x_norm: f64) -> Result<f64> {
    let df = check_sphere_dim(d)?;
    if x_norm == 1.0 && !(g > 1.0 - df) {
        return domain(format!("sphere potential at |x| = 1 needs gamma > 1 - d, got {g}"));
    }
    Ok(unit_sphere_area(d) * psi_gamma(d, g, x_norm * x_norm)?)
}

/// Same integral through |S^{d-1}| (x+1)^gamma F(-g/2, (d-1)/2; d-1; 4x/(x+1)^2).
pub fn sphere_potential_alt(d: usize, g: f64, x_norm: f64) -> Result<f64> {
    let df = check_sphere_dim(d)?;
    if x_norm == 1.0 || !(x_norm >= 0.0) {
        return domain(format!("alternative sphere formula needs x_norm >= 0, x_norm != 1, got {x_norm}"));
    }
    let s = x_norm + 1.0;
    let z = 4.0 * x_norm / (s * s);
    let w = ((1.0 - x_norm) / s).powi(2);
    let f = hyp2f1_zw(-g / 2.0, (df - 1.0) / 2.0, df - 1.0, z.min(1.0), w)?;
    Ok(unit_sphere_area(d) * s.powf(g) * f)
}

fn check_ball_gamma(df: f64, g: f64) -> Result<()> {
    if g > -df && g < 4.0 - df {
        Ok(())
    } else {
        domain(format!("ball potential needs -d < gamma < 4 - d, got d = {df}, gamma = {g}"))
    }
}

/// Integral over |y| < 1 of |x - y|^gamma (1 - |y|^2)^((2 - gamma - d)/2).
///
/// Inside the closed unit ball this is K (1 + gamma |x|^2 / d) with
/// K = pi^(d/2) Gamma((4-g-d)/2) Gamma((g+d)/2) / Gamma(d/2).
pub fn ball_potential(d: usize, g: f64, x_norm: f64) -> Result<f64> {
    if d == 0 {
        return domain("dimension must be at least 1");
    }
    let df = d as f64;
    check_ball_gamma(df, g)?;
    check_rho(x_norm)?;
    let rho = x_norm * x_norm;
    let pi_pow = PI.powf(df / 2.0);
    if rho <= 1.0 {
        let k = pi_pow * gamma((4.0 - g - df) / 2.0)? * gamma((g + df) / 2.0)? * rgamma(df / 2.0);
        return Ok(k * (1.0 + g * rho / df));
    }
    let a = -g / 2.0;
    let b = (2.0 - g - df) / 2.0;
    let c = 2.0 - g / 2.0;
    let f = hyp2f1_zw(a, b, c, 1.0 / rho, (rho - 1.0) / rho)?;
    Ok(pi_pow * gamma((4.0 - g - df) / 2.0)? * rgamma(c) * rho.powf(g / 2.0) * f)
}

/// C_beta = integral of (1 - |y|^2)^((2-beta-d)/2) over the unit ball, and the
/// coefficient d/(4 - beta) of the normalized second moment.
pub fn quadratic_ball_moment(d: usize, beta: f64) -> Result<(f64, f64)> {
    if d == 0 {
        return domain("dimension must be at least 1");
    }
    let df = d as f64;
    check_ball_gamma(df, beta)?;
    let c_beta = PI.powf(df / 2.0) * gamma((4.0 - beta - df) / 2.0)? * rgamma((4.0 - beta) / 2.0);
    Ok((c_beta, df / (4.0 - beta)))
}

/// Log profile of the sphere: lim (psi_gamma - 1)/gamma as gamma -> 0, which
/// is the average of ln|x - w| over the unit sphere at rho = |x|^2.
pub fn tilde_psi0(d: usize, rho: f64) -> Result<f64> {
    let df = check_sphere_dim(d)?;
    check_rho(rho)?;
    let (b, c) = ((2.0 - df) / 2.0, df / 2.0);
    if rho <= 1.0 {
        Ok(-0.5 * hyp2f1_a_derivative_at_zero(b, c, rho)?)
    } else {
        Ok(0.5 * rho.ln() - 0.5 * hyp2f1_a_derivative_at_zero(b, c, 1.0 / rho)?)
    }
}

/// The same log profile through ln(1 + r) - r/(1+r)^2 3F2(1, 1, (d+1)/2; 2, d; 4r/(1+r)^2), r = sqrt(rho).
pub fn tilde_psi0_3f2(d: usize, rho: f64) -> Result<f64> {
    let df = check_sphere_dim(d)?;
    check_rho(rho)?;
    let r = rho.sqrt();
    let s = 1.0 + r;
    let z = (4.0 * r / (s * s)).min(1.0);
    Ok(s.ln() - r / (s * s) * hyp3f2(1.0, 1.0, (df + 1.0) / 2.0, 2.0, df, z)?)
}

/// Derivative of [`tilde_psi0`] in rho. For d = 2 it jumps from 0 to 1/2 at
/// rho = 1, so that point is a domain error there.
pub fn tilde_psi0_prime(d: usize, rho: f64) -> Result<f64> {
    let df = check_sphere_dim(d)?;
    check_rho(rho)?;
    if rho < 1.0 {
        if d == 2 {
            return Ok(0.0);
        }
        Ok((df - 2.0) / (2.0 * df) * hyp2f1(1.0, (4.0 - df) / 2.0, df / 2.0 + 1.0, rho)?)
    } else if rho > 1.0 {
        let f = hyp2f1_zw(1.0, (2.0 - df) / 2.0, df / 2.0, 1.0 / rho, (rho - 1.0) / rho)?;
        Ok(0.5 / rho * f)
    } else if d == 2 {
        domain("the d = 2 log profile has a kink at rho = 1")
    } else {
        Ok(0.25)
    }
}

/// Second derivative of [`tilde_psi0`] at rho = 1, (4 - d)/(8(d - 3)); d >= 4.
pub fn tilde_psi0_second_at_one(d: usize) -> Result<f64> {
    let (_, second) = psi_derivs_at_one_over_gamma(d, 0.0)?;
    second.ok_or_else(|| Error::Domain(format!("second derivative at 1 needs d > 3, got {d}")))
}

/// Integral over |y| < 1 of ln|x - y| (1 - |y|^2)^((2-d)/2), for d in {1, 2, 3}.
pub fn ball_log_potential(d: usize, x_norm: f64) -> Result<f64> {
    if !(1..=3).contains(&d) {
        return domain(format!("log ball potential needs d in 1..=3, got {d}"));
    }
    check_rho(x_norm)?;
    let df = d as f64;
    let (c0, _) = quadratic_ball_moment(d, 0.0)?;
    let rho = x_norm * x_norm;
    let shift = 0.5 * (digamma(df / 2.0)? - digamma(2.0)?);
    let slope = if rho <= 1.0 {
        rho / df
    } else {
        let h = hyp2f1_a_derivative_at_zero((2.0 - df) / 2.0, 2.0, 1.0 / rho)?;
        0.5 * rho.ln() - shift - 0.5 * h
    };
    Ok(c0 * (slope + shift))
}

/// Potential of a candidate measure for the kernel of `params` at |x| = x_norm.
pub fn total_potential(params: &KernelParams, candidate: &CandidateMinimizer, x_norm: f64) -> Result<f64> {
    check_rho(x_norm)?;
    let r = candidate.radius;
    let rho = (x_norm / r).powi(2);
    match candidate.kind {
        CandidateKind::UniformSphere => {
            let attract = if params.alpha_is_log {
                r.ln() + tilde_psi0(params.d, rho)?
            } else {
                r.powf(params.alpha) / params.alpha * psi_gamma(params.d, params.alpha, rho)?
            };
            let repel = if params.beta_is_log {
                r.ln() + tilde_psi0(params.d, rho)?
            } else {
                r.powf(params.beta) / params.beta * psi_gamma(params.d, params.beta, rho)?
            };
            Ok(attract - repel)
        }
        CandidateKind::BallProfile => {
            if params.alpha != 2.0 || params.alpha_is_log {
                return Err(Error::Regime(format!(
                    "ball profile potential needs alpha = 2, got {}",
                    params.alpha
                )));
            }
            let x = x_norm / r;
            if params.beta_is_log {
                let (c0, m) = quadratic_ball_moment(params.d, 0.0)?;
                Ok(0.5 * r * r * (rho + m) - r.ln() - ball_log_potential(params.d, x)? / c0)
            } else {
                let beta = params.beta;
                let (cb, m) = quadratic_ball_moment(params.d, beta)?;
                Ok(0.5 * r * r * (rho + m) - r.powf(beta) / beta * ball_potential(params.d, beta, x)? / cb)
            }
        }
    }
}
