//! Numerical checks of the explicit minimizers.
//!
//! The quadrature oracles integrate the defining integrals directly and share
//! no code with the hypergeometric formulas. The Euler-Lagrange check samples
//! the total potential of a candidate: it must equal eta on the support and be
//! at least eta everywhere else.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_form::{self, CandidateKind, CandidateMinimizer};
use crate::error::{domain, Error, Result};
use crate::potentials::{
    psi_derivs_at_one_over_gamma, psi_gamma, psi_values_at_one, tilde_psi0, total_potential,
    KernelParams,
};
use crate::quadrature::{tanh_sinh, QuadOptions};
use crate::special_fns::{hyp2f1, hyp2f1_at_one, unit_sphere_area};

const HALF_PI: f64 = std::f64::consts::FRAC_PI_2;
const PI: f64 = std::f64::consts::PI;

fn oracle_opts() -> QuadOptions {
    QuadOptions::with_tol(1e-13, 1e-300)
}

/// Breakpoints on [0, pi] for an integrand that peaks at theta ~ scale.
fn angular_breaks(scale: f64) -> Vec<f64> {
    let mut breaks = vec![0.0];
    if scale > 0.0 && scale < 0.5 {
        let mut t = scale;
        while t < 0.5 {
            breaks.push(t);
            t *= 8.0;
        }
    }
    breaks.push(HALF_PI);
    breaks.push(PI);
    breaks
}

/// Integral over theta in [0, pi] of k(q) sin^(d-2)(theta), where
/// q = |x - r w|^2 = (x - r)^2 + 4 x r sin^2(theta/2).
fn angular_integral<K>(d: usize, x: f64, r: f64, k: &K) -> Result<f64>
where
    K: Fn(f64) -> f64 + Sync,
{
    let gap = (x - r) * (x - r);
    let xr4 = 4.0 * x * r;
    let scale = if x > 0.0 && r > 0.0 { (x - r).abs() / (x * r).sqrt() } else { 1.0 };
    let breaks = angular_breaks(scale);
    let power = d as i32 - 2;
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let integrand = |theta: f64, from_a: f64, to_b: f64| -> Result<f64> {
            // theta measured from the nearer exact endpoint
            let t = if a == 0.0 { from_a } else { theta };
            let s_half = (0.5 * t).sin();
            let sin_theta = if b == PI { to_b.sin() } else { t.sin() };
            let q = gap + xr4 * s_half * s_half;
            Ok(k(q) * sin_theta.powi(power))
        };
        total += tanh_sinh(integrand, a, b, &oracle_opts())?.value;
    }
    Ok(total)
}

fn check_sphere_oracle(d: usize, x_norm: f64) -> Result<()> {
    if d < 2 {
        return domain(format!("sphere oracle needs d >= 2, got {d}"));
    }
    if !(x_norm >= 0.0 && x_norm.is_finite()) {
        return domain(format!("x_norm must be finite and >= 0, got {x_norm}"));
    }
    Ok(())
}

/// Integral of |x - w|^gamma over S^{d-1} by polar coordinates.
pub fn sphere_potential_quad(d: usize, g: f64, x_norm: f64) -> Result<f64> {
    check_sphere_oracle(d, x_norm)?;
    if x_norm == 1.0 && !(g > 1.0 - d as f64) {
        return domain(format!("sphere integral at |x| = 1 diverges for gamma = {g}"));
    }
    let half = g / 2.0;
    Ok(unit_sphere_area(d - 1) * angular_integral(d, x_norm, 1.0, &|q: f64| q.powf(half))?)
}

/// Integral of ln|x - w| over S^{d-1} by polar coordinates.
pub fn sphere_log_potential_quad(d: usize, x_norm: f64) -> Result<f64> {
    check_sphere_oracle(d, x_norm)?;
    Ok(unit_sphere_area(d - 1) * angular_integral(d, x_norm, 1.0, &|q: f64| 0.5 * q.ln())?)
}

fn ball_oracle<K>(d: usize, p: f64, x: f64, k: K) -> Result<f64>
where
    K: Fn(f64) -> f64 + Sync,
{
    if !(x >= 0.0 && x.is_finite()) {
        return domain(format!("x_norm must be finite and >= 0, got {x}"));
    }
    let opts = QuadOptions::with_tol(1e-12, 1e-300);
    if d == 1 {
        // k takes |x - y|^2; weight (1 - y^2)^p = ((1 - y)(1 + y))^p
        let mut total = 0.0;
        if x < 1.0 {
            let left = |_: f64, da: f64, db: f64| -> Result<f64> {
                // y = -1 + da = x - db
                Ok(k(db * db) * (da * (2.0 - da)).powf(p))
            };
            let right = |_: f64, da: f64, db: f64| -> Result<f64> {
                // y = x + da = 1 - db
                Ok(k(da * da) * (db * (2.0 - db)).powf(p))
            };
            total += tanh_sinh(left, -1.0, x, &opts)?.value;
            total += tanh_sinh(right, x, 1.0, &opts)?.value;
        } else {
            let whole = |_: f64, da: f64, db: f64| -> Result<f64> {
                let dist = (x - 1.0) + db;
                Ok(k(dist * dist) * (da * db).powf(p))
            };
            total += tanh_sinh(whole, -1.0, 1.0, &opts)?.value;
        }
        return Ok(total);
    }
    if d == 2 {
        return plane_ball_oracle(p, x, &k, &opts);
    }
    let sphere = unit_sphere_area(d - 1);
    let radial = |r: f64, _: f64, to_one: f64| -> Result<f64> {
        // shells this thin contribute nothing but can underflow |x - y|
        if r < 1e-100 {
            return Ok(0.0);
        }
        let weight = r.powi(d as i32 - 1) * (to_one * (2.0 - to_one)).powf(p);
        if weight == 0.0 {
            return Ok(0.0);
        }
        Ok(weight * sphere * angular_integral(d, x, r, &k)?)
    };
    let mut pieces = vec![0.0];
    if x > 0.0 && x < 1.0 {
        pieces.push(x);
    }
    pieces.push(1.0);
    let mut total = 0.0;
    for w in pieces.windows(2) {
        let (a, b) = (w[0], w[1]);
        // distance to r = 1 must stay exact on the last piece
        let f = |r: f64, da: f64, db: f64| radial(r, da, if b == 1.0 { db } else { 1.0 - r });
        total += tanh_sinh(f, a, b, &opts)?.value;
    }
    Ok(total)
}

/// Planar case in polar coordinates about x: y = x + t e(phi). Along each ray
/// 1 - |y|^2 = (t - t_lo)(t_hi - t), so both the kernel singularity at t = 0
/// and the weight at the rim sit at interval ends. Shells about the origin
/// fail here because the angular integral diverges at r = x once gamma <= -1.
fn plane_ball_oracle<K>(p: f64, x: f64, k: &K, opts: &QuadOptions) -> Result<f64>
where
    K: Fn(f64) -> f64 + Sync,
{
    if x < 1.0 {
        // phi measured from the direction of x; t_lo < 0 < t_hi
        let ray = |phi: f64, _: f64, _: f64| -> Result<f64> {
            let (s, c) = phi.sin_cos();
            let disc = (1.0 - x * x * s * s).sqrt();
            let (t_hi, t_lo) = if c > 0.0 {
                ((1.0 - x * x) / (disc + x * c), -x * c - disc)
            } else {
                (disc - x * c, -(1.0 - x * x) / (disc - x * c))
            };
            let f = |_: f64, t: f64, to_rim: f64| -> Result<f64> {
                if t == 0.0 {
                    return Ok(0.0);
                }
                Ok(k(t * t) * t * (to_rim * (t - t_lo)).powf(p))
            };
            Ok(tanh_sinh(f, 0.0, t_hi, opts)?.value)
        };
        return Ok(2.0 * tanh_sinh(ray, 0.0, PI, opts)?.value);
    }
    // phi measured from the direction of -x; rays meet the disc for sin(phi) < 1/x
    let phi_c = (1.0 / x).asin();
    let cos_c = (1.0 - 1.0 / (x * x)).sqrt();
    let ray = |phi: f64, _: f64, to_edge: f64| -> Result<f64> {
        let c = phi.cos();
        // 1 - x sin(phi) without cancellation near the tangent direction
        let gap = 2.0 * (0.5 * to_edge).sin().powi(2) + x * cos_c * to_edge.sin();
        let disc = (gap * (2.0 - gap)).max(0.0).sqrt();
        if disc == 0.0 {
            return Ok(0.0);
        }
        let t_lo = (x * x - 1.0) / (x * c + disc);
        let t_hi = x * c + disc;
        let f = |t: f64, da: f64, db: f64| -> Result<f64> { Ok(k(t * t) * t * (da * db).powf(p)) };
        Ok(tanh_sinh(f, t_lo, t_hi, opts)?.value)
    };
    Ok(2.0 * tanh_sinh(ray, 0.0, phi_c, opts)?.value)
}

/// Integral over |y| < 1 of |x - y|^gamma (1 - |y|^2)^((2-gamma-d)/2), by
/// radial shells times an angular integral (a plain 1-D integral for d = 1).
pub fn ball_potential_quad(d: usize, g: f64, x_norm: f64) -> Result<f64> {
    let df = d as f64;
    if d == 0 || !(g > -df && g < 4.0 - df) {
        return domain(format!("ball oracle needs -d < gamma < 4 - d, got d = {d}, gamma = {g}"));
    }
    let p = (2.0 - g - df) / 2.0;
    let half = g / 2.0;
    ball_oracle(d, p, x_norm, move |q: f64| q.powf(half))
}

/// Integral over |y| < 1 of ln|x - y| (1 - |y|^2)^((2-d)/2), for d in 1..=3.
pub fn ball_log_potential_quad(d: usize, x_norm: f64) -> Result<f64> {
    if !(1..=3).contains(&d) {
        return domain(format!("log ball oracle needs d in 1..=3, got {d}"));
    }
    let p = (2.0 - d as f64) / 2.0;
    ball_oracle(d, p, x_norm, |q: f64| 0.5 * q.ln())
}

/// Mass of a candidate measure, by quadrature of its density.
pub fn candidate_mass(d: usize, beta: f64, candidate: &CandidateMinimizer) -> Result<f64> {
    let r = candidate.radius;
    match candidate.kind {
        CandidateKind::UniformSphere => {
            Ok(candidate.normalization * unit_sphere_area(d) * r.powi(d as i32 - 1))
        }
        CandidateKind::BallProfile => {
            let p = (2.0 - beta - d as f64) / 2.0;
            let shell = unit_sphere_area(d);
            let f = |s: f64, _: f64, to_r: f64| -> Result<f64> {
                Ok(shell * s.powi(d as i32 - 1) * (to_r * (2.0 * r - to_r)).powf(p))
            };
            let q = tanh_sinh(f, 0.0, r, &QuadOptions::with_tol(1e-13, 1e-300))?;
            Ok(candidate.normalization * q.value)
        }
    }
}

/// Outcome of the Euler-Lagrange check on a grid of rho = |x/R|^2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ELReport {
    pub eta: f64,
    /// max |phi - eta| over support nodes
    pub support_max_abs_dev: f64,
    /// min (phi - eta) over nodes off the support
    pub exterior_min_margin: f64,
    /// rho at which the exterior minimum occurs
    pub exterior_min_rho: f64,
    pub grid: Vec<f64>,
    pub tol_support: f64,
    pub tol_exterior: f64,
    pub passed: bool,
}

/// Sample points on [0, rho_max]: 60% clustered at rho = 1 from both sides,
/// the rest log-spaced towards 0 and towards rho_max, plus 0 and 1 themselves.
pub fn el_grid(rho_max: f64, n: usize) -> Vec<f64> {
    let near = (n * 3) / 10;
    let far = (n - 2 * near) / 2;
    let logspace = |lo: f64, hi: f64, k: usize| -> Vec<f64> {
        if k == 0 {
            return Vec::new();
        }
        if k == 1 {
            return vec![lo];
        }
        let (a, b) = (lo.ln(), hi.ln());
        (0..k).map(|i| (a + (b - a) * i as f64 / (k - 1) as f64).exp()).collect()
    };
    let mut grid = vec![0.0, 1.0];
    grid.extend(logspace(1e-6, 0.5, near).into_iter().map(|t| 1.0 - t));
    grid.extend(logspace(1e-6, 1.0, near).into_iter().map(|t| 1.0 + t));
    grid.extend(logspace(1e-6, 0.5, far));
    let rest = n.saturating_sub(grid.len());
    if rho_max > 2.0 {
        grid.extend(logspace(2.0, rho_max, rest));
    }
    grid.retain(|&r| r <= rho_max);
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();
    grid
}

/// Check the candidate of the regime of `params`, with eta from the energy formula.
pub fn verify_euler_lagrange(params: &KernelParams, rho_max: f64, n_grid: usize) -> Result<ELReport> {
    let candidate = closed_form::candidate(params)?;
    let eta = closed_form::eta(params)?;
    verify_candidate(params, &candidate, eta, rho_max, n_grid)
}

/// Check an arbitrary candidate against the value eta.
pub fn verify_candidate(
    params: &KernelParams,
    candidate: &CandidateMinimizer,
    eta: f64,
    rho_max: f64,
    n_grid: usize,
) -> Result<ELReport> {
    if !(rho_max > 1.0) || n_grid < 100 {
        return domain(format!("need rho_max > 1 and n_grid >= 100, got {rho_max}, {n_grid}"));
    }
    let grid = el_grid(rho_max, n_grid);
    let r = candidate.radius;
    let values: Vec<f64> = grid
        .par_iter()
        .map(|&rho| total_potential(params, candidate, r * rho.sqrt()))
        .collect::<Result<_>>()?;
    let on_support = |rho: f64| match candidate.kind {
        CandidateKind::UniformSphere => rho == 1.0,
        CandidateKind::BallProfile => rho <= 1.0,
    };
    let mut dev: f64 = 0.0;
    let mut margin = f64::INFINITY;
    let mut margin_rho = f64::NAN;
    for (&rho, &phi) in grid.iter().zip(&values) {
        if on_support(rho) {
            dev = dev.max((phi - eta).abs());
        } else if phi - eta < margin {
            margin = phi - eta;
            margin_rho = rho;
        }
    }
    let tol = 1e-9 * eta.abs().max(1.0);
    Ok(ELReport {
        eta,
        support_max_abs_dev: dev,
        exterior_min_margin: margin,
        exterior_min_rho: margin_rho,
        grid,
        tol_support: tol,
        tol_exterior: tol,
        passed: dev <= tol && margin >= -tol,
    })
}

fn check_psi_capital(params: &KernelParams) -> Result<()> {
    if params.alpha_is_log || params.d < 2 {
        return Err(Error::Regime("the sphere comparison function needs d >= 2 and a power attraction".into()));
    }
    if !params.beta_is_log && params.beta.abs() < 1e-6 {
        return Err(Error::IllConditioned(format!(
            "|beta| = {} < 1e-6 without the log flag",
            params.beta.abs()
        )));
    }
    Ok(())
}

/// Psi(rho) = (psi'_beta(1)/beta) / psi'_alpha(1) psi_alpha(rho) - (psi_beta(rho) - 1)/beta.
///
/// The constant 1/beta is added to the textbook combination so that beta -> 0
/// tends to the log version (psi_beta - 1)/beta -> tilde psi_0. Adding a
/// constant changes neither derivatives nor convexity.
pub fn psi_capital(params: &KernelParams, rho: f64) -> Result<f64> {
    check_psi_capital(params)?;
    let (d, alpha, beta) = (params.d, params.alpha, params.beta);
    let (beta_first, _) = psi_derivs_at_one_over_gamma(d, beta)?;
    let alpha_first = psi_values_at_one(d, alpha)?.first;
    let lead = beta_first / alpha_first * psi_gamma(d, alpha, rho)?;
    let tail = if params.beta_is_log {
        tilde_psi0(d, rho)?
    } else {
        (psi_gamma(d, beta, rho)? - 1.0) / beta
    };
    Ok(lead - tail)
}

/// Closed-form Psi''(1) for raw exponents; needs d + beta > 3.
pub fn psi_dd_at_one_formula(d: usize, alpha: f64, beta: f64) -> Result<f64> {
    let (beta_first, beta_second) = psi_derivs_at_one_over_gamma(d, beta)?;
    let beta_second = beta_second
        .ok_or_else(|| Error::Domain(format!("Psi''(1) needs d + beta > 3, got {}", d as f64 + beta)))?;
    let a = psi_values_at_one(d, alpha)?;
    let alpha_second = a
        .second
        .ok_or_else(|| Error::Domain(format!("Psi''(1) needs d + alpha > 3, got {}", d as f64 + alpha)))?;
    Ok(beta_first / a.first * alpha_second - beta_second)
}

/// Psi''(1) for `params`; its sign decides local minimality of the sphere.
pub fn psi_capital_dd_at_one(params: &KernelParams) -> Result<f64> {
    check_psi_capital(params)?;
    psi_dd_at_one_formula(params.d, params.alpha, params.beta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub grid: Vec<f64>,
    /// minimum of the second divided differences of Psi (which approximate Psi'')
    pub min_second_difference: f64,
    /// rho at the centre of the stencil attaining the minimum
    pub min_rho: f64,
    pub psi_dd_at_one: Option<f64>,
    pub tol: f64,
    pub passed: bool,
}

/// Second divided differences of Psi on a uniform grid of [0, rho_max] with
/// rho = 1 inserted as a node, so no stencil straddles the branch point.
pub fn convexity_report(params: &KernelParams, rho_max: f64, n_grid: usize) -> Result<ConvexityReport> {
    check_psi_capital(params)?;
    if !(rho_max > 1.0) || n_grid < 3 {
        return domain(format!("need rho_max > 1 and n_grid >= 3, got {rho_max}, {n_grid}"));
    }
    let mut grid: Vec<f64> = (0..n_grid).map(|i| rho_max * i as f64 / (n_grid - 1) as f64).collect();
    grid.push(1.0);
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    let values: Vec<f64> = grid.par_iter().map(|&rho| psi_capital(params, rho)).collect::<Result<_>>()?;
    let mut min = f64::INFINITY;
    let mut min_rho = f64::NAN;
    for i in 1..grid.len() - 1 {
        let (x0, x1, x2) = (grid[i - 1], grid[i], grid[i + 1]);
        let (f0, f1, f2) = (values[i - 1], values[i], values[i + 1]);
        let dd = 2.0 * ((f2 - f1) / (x2 - x1) - (f1 - f0) / (x1 - x0)) / (x2 - x0);
        if dd < min {
            min = dd;
            min_rho = x1;
        }
    }
    let tol = 1e-7;
    Ok(ConvexityReport {
        grid,
        min_second_difference: min,
        min_rho,
        psi_dd_at_one: psi_capital_dd_at_one(params).ok(),
        tol,
        passed: min >= -tol,
    })
}

/// Signs of g(z) = F(a1, b1; c; z) - q F(a2, b2; c; z) along a grid of [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignPattern {
    /// -1, 0 or 1 per grid node
    pub signs: Vec<i8>,
    /// consecutive duplicates removed
    pub runs: Vec<i8>,
    /// number of flips between strictly positive and strictly negative values
    pub changes: usize,
}

impl SignPattern {
    fn from_signs(signs: Vec<i8>) -> Self {
        let mut runs: Vec<i8> = Vec::new();
        for &s in &signs {
            if runs.last() != Some(&s) {
                runs.push(s);
            }
        }
        let strict: Vec<i8> = runs.iter().copied().filter(|&s| s != 0).collect();
        let changes = strict.windows(2).filter(|w| w[0] != w[1]).count();
        Self { signs, runs, changes }
    }

    /// At most one change, and only from negative to positive.
    pub fn is_single_upward(&self) -> bool {
        let strict: Vec<i8> = self.runs.iter().copied().filter(|&s| s != 0).collect();
        match self.changes {
            0 => true,
            1 => strict.first() == Some(&-1),
            _ => false,
        }
    }
}

pub fn single_zero_scan(
    a1: f64,
    b1: f64,
    a2: f64,
    b2: f64,
    c: f64,
    q: f64,
    n_grid: usize,
) -> Result<SignPattern> {
    if !(q > 0.0 && 0.0 < a2 && a2 < a1 && 0.0 < b2 && b2 < b1 && c > a1 + b1) || n_grid < 2 {
        return domain("single-zero scan needs q > 0, 0 < a2 < a1, 0 < b2 < b1, c > a1 + b1, n_grid >= 2");
    }
    let signs = (0..n_grid)
        .into_par_iter()
        .map(|i| -> Result<i8> {
            let z = i as f64 / (n_grid - 1) as f64;
            let (f1, f2) = if i == n_grid - 1 {
                (hyp2f1_at_one(a1, b1, c)?, hyp2f1_at_one(a2, b2, c)?)
            } else {
                (hyp2f1(a1, b1, c, z)?, hyp2f1(a2, b2, c, z)?)
            };
            let g = f1 - q * f2;
            let scale = f1.abs() + q * f2.abs();
            Ok(if g.abs() <= 1e-12 * scale {
                0
            } else if g > 0.0 {
                1
            } else {
                -1
            })
        })
        .collect::<Result<Vec<i8>>>()?;
    Ok(SignPattern::from_signs(signs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{ball_log_potential, ball_potential, sphere_potential};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn sphere_oracle_examples() {
        for d in 2..5 {
            let got = sphere_potential_quad(d, 1.7, 0.0).unwrap();
            assert!(rel(got, unit_sphere_area(d)) < 1e-12);
        }
        assert!(rel(sphere_potential_quad(3, -1.0, 2.0).unwrap(), 2.0 * PI) < 1e-12);
        for &x in &[0.5, 0.999, 1.0, 1.001, 3.0] {
            let a = sphere_potential_quad(3, -0.5, x).unwrap();
            let b = sphere_potential(3, -0.5, x).unwrap();
            assert!(rel(a, b) < 1e-10, "x = {x}: {a} vs {b}");
        }
    }

    #[test]
    fn ball_oracle_examples() {
        for d in 1..=3 {
            let df = d as f64;
            let g = 1.0 - df / 2.0;
            let a = ball_potential_quad(d, g, 0.0).unwrap();
            assert!(rel(a, ball_potential(d, g, 0.0).unwrap()) < 1e-10, "d = {d}");
        }
        // gamma = 0 with d = 2: the disc area
        assert!(rel(ball_potential_quad(2, 0.0, 0.4).unwrap(), PI) < 1e-11);
        for &x in &[0.4, 2.0] {
            let a = ball_potential_quad(3, -0.5, x).unwrap();
            let b = ball_potential(3, -0.5, x).unwrap();
            assert!(rel(a, b) < 1e-8, "x = {x}: {a} vs {b}");
        }
        for d in 1..=3 {
            for &x in &[0.0, 0.5, 1.5] {
                let a = ball_log_potential_quad(d, x).unwrap();
                let b = ball_log_potential(d, x).unwrap();
                assert!((a - b).abs() < 1e-9 * b.abs().max(1.0), "d = {d}, x = {x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn log_sphere_oracle() {
        for d in 2..5 {
            for &x in &[0.3, 0.9, 1.0, 1.1, 4.0] {
                let a = sphere_log_potential_quad(d, x).unwrap() / unit_sphere_area(d);
                let b = tilde_psi0(d, x * x).unwrap();
                assert!((a - b).abs() < 1e-10, "d = {d}, x = {x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn grid_shape() {
        let g = el_grid(25.0, 2000);
        assert!(g.len() >= 1990 && g.len() <= 2002, "{}", g.len());
        assert_eq!(g[0], 0.0);
        assert!(g.contains(&1.0));
        assert!((g.last().unwrap() - 25.0).abs() < 1e-12);
        let near = g.iter().filter(|&&r| (0.5..=2.0).contains(&r)).count();
        assert!(near as f64 >= 0.6 * g.len() as f64 - 2.0);
    }

    #[test]
    fn el_examples() {
        let p = KernelParams::new(3, 2.0, 1.5).unwrap();
        let rep = verify_euler_lagrange(&p, 25.0, 400).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert!(rep.exterior_min_margin >= -1e-9 * rep.eta.abs());

        let p = KernelParams::new(2, 2.0, -1.0).unwrap();
        let rep = verify_euler_lagrange(&p, 25.0, 400).unwrap();
        assert!(rep.passed);
        assert!(rep.support_max_abs_dev <= 1e-9 * rep.eta.abs());

        // sphere forced below beta_*: dips below eta just inside the sphere
        let p = KernelParams::new(3, 2.0, 0.7).unwrap();
        let c = closed_form::forced_sphere_candidate(&p).unwrap();
        let eta = total_potential(&p, &c, c.radius).unwrap();
        let rep = verify_candidate(&p, &c, eta, 25.0, 400).unwrap();
        assert!(!rep.passed);
        assert!(rep.exterior_min_margin < -1e-6);
        // rho = 1 is a local maximum of the potential: it dips on both sides
        for &rho in &[1.0 - 1e-3, 1.0 + 1e-3] {
            assert!(total_potential(&p, &c, c.radius * f64::sqrt(rho)).unwrap() < eta);
        }
    }

    #[test]
    fn psi_capital_properties() {
        let p = KernelParams::new(3, 2.5, 1.2).unwrap();
        let h = 1e-6;
        let slope = (psi_capital(&p, 1.0 + h).unwrap() - psi_capital(&p, 1.0 - h).unwrap()) / (2.0 * h);
        assert!(slope.abs() < 1e-8);
        let base = psi_capital(&p, 1.0).unwrap();
        for &rho in &[0.0, 0.5, 0.99, 1.01, 3.0, 20.0] {
            assert!(psi_capital(&p, rho).unwrap() >= base);
        }
        let near = KernelParams::new(4, 2.0, 1e-5).unwrap();
        let log = KernelParams::log_beta(4, 2.0).unwrap();
        let diff = psi_capital(&near, 4.0).unwrap() - psi_capital(&log, 4.0).unwrap();
        assert!(diff.abs() <= 1e-3);
        let tiny = KernelParams::new(4, 2.0, 1e-7).unwrap();
        assert!(matches!(psi_capital(&tiny, 1.0), Err(Error::IllConditioned(_))));
    }

    #[test]
    fn psi_dd_examples() {
        let bs = closed_form::beta_star(3, 3.0);
        assert!(psi_dd_at_one_formula(3, 3.0, bs).unwrap().abs() < 1e-10);
        let p = KernelParams::new(3, 2.5, 1.2).unwrap();
        let h = 1e-4;
        let fd = (psi_capital(&p, 1.0 + h).unwrap() - 2.0 * psi_capital(&p, 1.0).unwrap()
            + psi_capital(&p, 1.0 - h).unwrap())
            / (h * h);
        assert!((fd - psi_capital_dd_at_one(&p).unwrap()).abs() < 1e-5);
    }

    #[test]
    fn convexity_examples() {
        let p = KernelParams::new(3, 2.0, 1.5).unwrap();
        assert!(convexity_report(&p, 10.0, 400).unwrap().passed);
        let p = KernelParams::new(2, 4.0, 4.0 / 3.0).unwrap();
        let rep = convexity_report(&p, 10.0, 400).unwrap();
        assert!(rep.passed, "{}", rep.min_second_difference);
        let p = KernelParams::new(3, 2.0, 0.5).unwrap();
        let rep = convexity_report(&p, 10.0, 400).unwrap();
        assert!(!rep.passed);
        assert!((rep.min_rho - 1.0).abs() < 0.2);
    }

    #[test]
    fn single_zero_examples() {
        let (a1, b1, a2, b2, c) = (1.5, 2.0, 0.5, 1.0, 4.0);
        let p = single_zero_scan(a1, b1, a2, b2, c, 1e-9, 101).unwrap();
        assert_eq!(p.runs, vec![1]);
        let q = hyp2f1_at_one(a1, b1, c).unwrap() / hyp2f1_at_one(a2, b2, c).unwrap();
        let p = single_zero_scan(a1, b1, a2, b2, c, q, 101).unwrap();
        assert_eq!(p.runs, vec![-1, 0]);
        assert!(p.is_single_upward());
        let p = single_zero_scan(a1, b1, a2, b2, c, 1.3, 101).unwrap();
        assert_eq!(p.runs.first(), Some(&-1));
        assert_eq!(p.changes, 1);
        assert!(single_zero_scan(a2, b1, a1, b2, c, 1.0, 11).is_err());
    }
}
