//! Explicit minimizers: the critical curve beta_*, radii, energies and the
//! regime decision between the uniform sphere and the ball profile.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::potentials::{
    ball_log_potential, ball_potential, psi_gamma, quadratic_ball_moment, tilde_psi0, KernelParams,
};
use crate::special_fns::{digamma, gamma, rgamma, unit_sphere_area};

/// Ties in the regime tests are resolved with this absolute slack.
const TIE: f64 = 1e-12;

/// beta_*(alpha) = (-10 + 3 alpha + 7 d - alpha d - d^2) / (d + alpha - 3).
pub fn beta_star(d: usize, alpha: f64) -> f64 {
    let df = d as f64;
    (-10.0 + 3.0 * alpha + 7.0 * df - alpha * df - df * df) / (df + alpha - 3.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    SphereTheorem1,
    BallTheorem2,
    Boundary,
    OutOfScope,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeTag {
    pub tag: Regime,
    pub detail: String,
}

impl RegimeTag {
    fn new(tag: Regime, detail: impl Into<String>) -> Self {
        Self { tag, detail: detail.into() }
    }

    pub fn is_supported(&self) -> bool {
        self.tag != Regime::OutOfScope
    }
}

/// Decide which explicit minimizer applies to `params`.
pub fn classify(params: &KernelParams) -> Result<RegimeTag> {
    let df = params.dim();
    let (alpha, beta) = (params.alpha, params.beta);
    if !(beta > -df && beta < alpha) {
        return domain(format!("need -d < beta < alpha, got alpha = {alpha}, beta = {beta}"));
    }
    if params.alpha_is_log {
        return Ok(RegimeTag::new(Regime::OutOfScope, "alpha out of supported range (logarithmic attraction)"));
    }
    if alpha == 2.0 && beta < (2.0f64).min(4.0 - df) {
        return Ok(RegimeTag::new(
            Regime::BallTheorem2,
            format!("alpha = 2 and -d < beta < min(2, 4 - d) = {}", (2.0f64).min(4.0 - df)),
        ));
    }
    if !(2.0..=4.0).contains(&alpha) {
        return Ok(RegimeTag::new(Regime::OutOfScope, "alpha out of supported range [2, 4]"));
    }
    if params.d < 2 {
        return Ok(RegimeTag::new(Regime::OutOfScope, "sphere minimizers need d >= 2"));
    }
    let bs = beta_star(params.d, alpha);
    if beta < bs - TIE {
        return Ok(RegimeTag::new(
            Regime::OutOfScope,
            format!("beta below beta_*(alpha) = {bs}: the sphere is not a minimizer"),
        ));
    }
    if beta > 2.0 + TIE {
        return Ok(RegimeTag::new(Regime::OutOfScope, "beta above 2"));
    }
    if alpha == 4.0 && beta == 2.0 {
        return Ok(RegimeTag::new(
            Regime::Boundary,
            "(alpha, beta) = (4, 2): spheres minimize but the minimizer is not unique",
        ));
    }
    Ok(RegimeTag::new(
        Regime::SphereTheorem1,
        format!("2 <= alpha <= 4 and beta_*(alpha) = {bs} <= beta <= 2"),
    ))
}

fn require_supported(params: &KernelParams) -> Result<Regime> {
    let tag = classify(params)?;
    if tag.is_supported() {
        Ok(tag.tag)
    } else {
        Err(Error::Regime(tag.detail))
    }
}

/// The sphere radius R_{alpha,beta}, whatever the regime.
pub fn sphere_formula_radius(d: usize, alpha: f64, beta: f64) -> Result<f64> {
    let df = d as f64;
    let ratio = gamma((df + beta - 1.0) / 2.0)? * gamma((2.0 * df + alpha - 2.0) / 2.0)?
        * rgamma((df + alpha - 1.0) / 2.0)
        * rgamma((2.0 * df + beta - 2.0) / 2.0);
    if !(ratio > 0.0) {
        return domain(format!("sphere radius undefined for d = {d}, alpha = {alpha}, beta = {beta}"));
    }
    Ok(0.5 * ratio.powf(1.0 / (alpha - beta)))
}

/// The ball radius R_{2,beta}, for -d < beta <= 4 - d and beta < 2. At
/// beta = 4 - d the profile collapses onto the sphere and the formula agrees
/// with the sphere radius.
pub fn ball_formula_radius(d: usize, beta: f64) -> Result<f64> {
    let df = d as f64;
    if !(beta > -df && beta <= 4.0 - df && beta < 2.0) {
        return domain(format!("ball radius needs -d < beta <= 4 - d and beta < 2, got {beta}"));
    }
    let ratio = gamma((4.0 - beta) / 2.0)? * gamma((beta + df) / 2.0)? * rgamma(1.0 + df / 2.0);
    Ok(ratio.powf(1.0 / (2.0 - beta)))
}

/// Energy of the uniform sphere of radius R_{alpha,beta} (beta = 0 means log).
pub fn sphere_formula_energy(d: usize, alpha: f64, beta: f64, beta_is_log: bool) -> Result<f64> {
    let df = d as f64;
    if beta_is_log {
        let ratio = gamma((df - 1.0) / 2.0)? * gamma((2.0 * df + alpha - 2.0) / 2.0)?
            * rgamma(df - 1.0)
            * rgamma((df + alpha - 1.0) / 2.0);
        return Ok((1.0 - ratio.ln()) / (2.0 * alpha)
            + 0.25 * (digamma(df - 1.0)? - digamma((df - 1.0) / 2.0)?));
    }
    let r = sphere_formula_radius(d, alpha, beta)?;
    let pref = PI.powf(-0.5) * 2f64.powf(df + alpha - 3.0) * gamma(df / 2.0)?
        * gamma((df + alpha - 1.0) / 2.0)?
        * rgamma((2.0 * df + alpha - 2.0) / 2.0);
    Ok(-pref * (1.0 / beta - 1.0 / alpha) * r.powf(alpha))
}

/// Energy of the ball profile for alpha = 2 (beta = 0 means log).
pub fn ball_formula_energy(d: usize, beta: f64, beta_is_log: bool) -> Result<f64> {
    let df = d as f64;
    if beta_is_log {
        if !(1..=4).contains(&d) {
            return domain(format!("log ball energy needs d in 1..=4, got {d}"));
        }
        return Ok(0.25 * (0.5 + (df / 2.0).ln() + digamma(2.0)? - digamma(df / 2.0)?));
    }
    let r = ball_formula_radius(d, beta)?;
    Ok(-df * (2.0 - beta) / (2.0 * beta * (4.0 - beta)) * r * r)
}

/// Radius of the minimizer for a supported regime.
pub fn radius(params: &KernelParams) -> Result<f64> {
    match require_supported(params)? {
        Regime::BallTheorem2 => ball_formula_radius(params.d, params.beta),
        _ => sphere_formula_radius(params.d, params.alpha, params.beta),
    }
}

/// Minimal energy E_{alpha,beta} for a supported regime.
pub fn energy(params: &KernelParams) -> Result<f64> {
    match require_supported(params)? {
        Regime::BallTheorem2 => ball_formula_energy(params.d, params.beta, params.beta_is_log),
        _ => sphere_formula_energy(params.d, params.alpha, params.beta, params.beta_is_log),
    }
}

/// Value of the total potential on the support; equal to twice the energy.
pub fn eta(params: &KernelParams) -> Result<f64> {
    Ok(2.0 * energy(params)?)
}

/// eta recomputed from potential values: the sphere potential at rho = 1, or
/// the ball potential at the centre.
pub fn eta_from_potential(params: &KernelParams) -> Result<f64> {
    let regime = require_supported(params)?;
    let r = radius(params)?;
    let (d, beta) = (params.d, params.beta);
    if regime == Regime::BallTheorem2 {
        if params.beta_is_log {
            let (c0, m) = quadratic_ball_moment(d, 0.0)?;
            return Ok(0.5 * r * r * m - r.ln() - ball_log_potential(d, 0.0)? / c0);
        }
        let (cb, m) = quadratic_ball_moment(d, beta)?;
        return Ok(0.5 * r * r * m - r.powf(beta) / beta * ball_potential(d, beta, 0.0)? / cb);
    }
    let attract = r.powf(params.alpha) / params.alpha * psi_gamma(d, params.alpha, 1.0)?;
    let repel = if params.beta_is_log {
        r.ln() + tilde_psi0(d, 1.0)?
    } else {
        r.powf(beta) / beta * psi_gamma(d, beta, 1.0)?
    };
    Ok(attract - repel)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CandidateKind {
    UniformSphere,
    BallProfile,
}

/// A probability measure centred at the origin: the uniform measure on the
/// sphere of radius R, or the density
/// normalization (R^2 - |x|^2)^((2-beta-d)/2) on the ball of radius R.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidateMinimizer {
    pub kind: CandidateKind,
    pub radius: f64,
    /// Ball: C_beta^-1 R^(beta-2). Sphere: the surface density (|S^{d-1}| R^{d-1})^-1.
    pub normalization: f64,
}

impl CandidateMinimizer {
    pub fn sphere(d: usize, radius: f64) -> Result<Self> {
        if d < 2 || !(radius > 0.0) {
            return domain(format!("sphere candidate needs d >= 2 and R > 0, got d = {d}, R = {radius}"));
        }
        let normalization = 1.0 / (unit_sphere_area(d) * radius.powi(d as i32 - 1));
        Ok(Self { kind: CandidateKind::UniformSphere, radius, normalization })
    }

    pub fn ball(d: usize, beta: f64, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return domain(format!("ball candidate needs R > 0, got {radius}"));
        }
        let (cb, _) = quadratic_ball_moment(d, beta)?;
        Ok(Self { kind: CandidateKind::BallProfile, radius, normalization: radius.powf(beta - 2.0) / cb })
    }
}

/// The minimizer predicted for a supported regime.
pub fn candidate(params: &KernelParams) -> Result<CandidateMinimizer> {
    let regime = require_supported(params)?;
    let r = radius(params)?;
    if regime == Regime::BallTheorem2 {
        CandidateMinimizer::ball(params.d, params.beta, r)
    } else {
        CandidateMinimizer::sphere(params.d, r)
    }
}

/// The uniform sphere of radius R_{alpha,beta}, regardless of regime.
pub fn forced_sphere_candidate(params: &KernelParams) -> Result<CandidateMinimizer> {
    let r = sphere_formula_radius(params.d, params.alpha, params.beta)?;
    CandidateMinimizer::sphere(params.d, r)
}

/// Density of the ball minimizer at distance r from its centre.
pub fn ball_density(params: &KernelParams, r: f64) -> Result<f64> {
    if require_supported(params)? != Regime::BallTheorem2 {
        return Err(Error::Regime("ball density needs the alpha = 2 ball regime".into()));
    }
    if !(r >= 0.0) {
        return domain(format!("radius must be >= 0, got {r}"));
    }
    let c = candidate(params)?;
    if r >= c.radius {
        return Ok(0.0);
    }
    let p = (2.0 - params.beta - params.dim()) / 2.0;
    Ok(c.normalization * (c.radius * c.radius - r * r).powf(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn critical_curve() {
        for d in 2..8 {
            assert!(rel(beta_star(d, 2.0), 4.0 - d as f64) < 1e-15);
        }
        assert!(rel(beta_star(2, 4.0), 4.0 / 3.0) < 1e-15);
        for d in [2, 3, 5] {
            assert!(beta_star(d, 3.0) > beta_star(d, 4.0));
            for &a in &[2.0, 2.5, 3.0, 4.0, 7.0] {
                let b = beta_star(d, a);
                assert!(b > 3.0 - d as f64 && b <= 4.0 - d as f64);
            }
        }
    }

    #[test]
    fn radii() {
        for d in 1..6 {
            let r = ball_formula_radius(d, 2.0 - d as f64).unwrap();
            assert!((r - 1.0).abs() < 1e-14, "d = {d}");
        }
        let p = KernelParams::new(3, 2.0, 1.0).unwrap();
        assert!(rel(radius(&p).unwrap(), 2.0 / 3.0) < 1e-14);
        assert!(rel(ball_formula_radius(3, 1.0).unwrap(), 2.0 / 3.0) < 1e-14);
        assert!(rel(ball_formula_radius(4, 0.0).unwrap(), 0.5f64.sqrt()) < 1e-14);
        assert!(ball_formula_radius(3, 1.5).is_err());
        for d in 2..6 {
            let df = d as f64;
            let p = KernelParams::new(d, 4.0, 2.0).unwrap();
            assert!(rel(radius(&p).unwrap(), 0.5 * (2.0 * df / (df + 1.0)).sqrt()) < 1e-14);
        }
        assert!(rel(sphere_formula_radius(2, 4.0, 2.0).unwrap(), 1.0 / 3f64.sqrt()) < 1e-14);
        let log = KernelParams::log_beta(3, 2.0).unwrap();
        assert!(rel(radius(&log).unwrap(), (2.0f64 / 3.0).sqrt()) < 1e-14);
    }

    #[test]
    fn energies() {
        let e1 = sphere_formula_energy(3, 2.0, 1.0, false).unwrap();
        let e2 = ball_formula_energy(3, 1.0, false).unwrap();
        assert!(rel(e1, -2.0 / 9.0) < 1e-13);
        assert!(rel(e2, -2.0 / 9.0) < 1e-13);
        let log2 = KernelParams::log_beta(2, 2.0).unwrap();
        assert!(rel(energy(&log2).unwrap(), 0.375) < 1e-14);
        let target = 0.25 * (0.5 + 2f64.ln());
        assert!(rel(sphere_formula_energy(4, 2.0, 0.0, true).unwrap(), target) < 1e-13);
        assert!(rel(ball_formula_energy(4, 0.0, true).unwrap(), target) < 1e-14);
    }

    #[test]
    fn eta_routes_agree() {
        let cases = [
            KernelParams::new(3, 2.0, 1.5).unwrap(),
            KernelParams::new(2, 3.0, 1.75).unwrap(),
            KernelParams::new(5, 4.0, 0.5).unwrap(),
            KernelParams::log_beta(4, 3.0).unwrap(),
            KernelParams::new(2, 2.0, -1.0).unwrap(),
            KernelParams::new(1, 2.0, 0.5).unwrap(),
            KernelParams::log_beta(3, 2.0).unwrap(),
            KernelParams::log_beta(1, 2.0).unwrap(),
        ];
        for p in cases {
            let a = eta(&p).unwrap();
            let b = eta_from_potential(&p).unwrap();
            assert!(rel(b, a) < 1e-12, "{p:?}: {a} vs {b}");
            assert_eq!(a / energy(&p).unwrap(), 2.0);
        }
        let p = KernelParams::new(2, 2.0, -1.0).unwrap();
        assert!(rel(eta(&p).unwrap(), 1.2 * (0.75 * PI).powf(2.0 / 3.0)) < 1e-14);
        assert!((eta(&p).unwrap() - 2.124_816).abs() < 1e-5);
        assert!(rel(eta(&KernelParams::new(3, 2.0, 1.0).unwrap()).unwrap(), -4.0 / 9.0) < 1e-13);
    }

    #[test]
    fn classification() {
        let tag = |d, a, b| classify(&KernelParams::new(d, a, b).unwrap()).unwrap().tag;
        assert_eq!(tag(3, 2.0, 1.5), Regime::SphereTheorem1);
        assert_eq!(tag(3, 2.0, 1.0), Regime::SphereTheorem1);
        assert_eq!(tag(3, 2.0, 0.5), Regime::BallTheorem2);
        assert_eq!(tag(2, 4.0, 2.0), Regime::Boundary);
        assert_eq!(tag(3, 5.0, 1.0), Regime::OutOfScope);
        assert_eq!(tag(3, 3.0, 0.5), Regime::OutOfScope);
        assert_eq!(tag(1, 2.0, 1.5), Regime::BallTheorem2);
        assert_eq!(tag(2, 4.0, 4.0 / 3.0), Regime::SphereTheorem1);
        let out = classify(&KernelParams::new(3, 5.0, 1.0).unwrap()).unwrap();
        assert!(out.detail.contains("alpha out of supported range"));
        assert!(matches!(radius(&KernelParams::new(3, 5.0, 1.0).unwrap()), Err(Error::Regime(_))));
        let log_alpha = KernelParams::log_alpha(3, -1.0).unwrap();
        assert_eq!(classify(&log_alpha).unwrap().tag, Regime::OutOfScope);
    }

    #[test]
    fn ball_density_values() {
        let p = KernelParams::log_beta(2, 2.0).unwrap();
        assert!(rel(ball_density(&p, 0.0).unwrap(), 1.0 / PI) < 1e-14);
        assert_eq!(ball_density(&p, 1.0).unwrap(), 0.0);
        assert_eq!(ball_density(&p, 3.0).unwrap(), 0.0);
        assert!(ball_density(&KernelParams::new(3, 2.0, 1.5).unwrap(), 0.1).is_err());
    }
}
