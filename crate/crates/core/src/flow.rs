//! Particle discretization of the interaction energy and its gradient flow.
//!
//! N equal-mass particles carry the empirical measure. Each step moves every
//! particle along its mean pair force and backtracks on the step size until
//! the discrete energy does not increase.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_form;
use crate::error::{domain, Error, Result};
use crate::potentials::KernelParams;

const MIN_STEP: f64 = 1e-16;
const GROWTH: f64 = 1.5;
const INITIAL_STEP: f64 = 0.1;

/// W(r) = r^alpha/alpha - r^beta/beta, with ln r for a log exponent.
pub fn kernel_w(params: &KernelParams, r: f64) -> Result<f64> {
    if !(r >= 0.0 && r.is_finite()) {
        return domain(format!("distance must be finite and >= 0, got {r}"));
    }
    if r == 0.0 {
        if params.beta <= 0.0 || params.alpha_is_log {
            return domain("kernel is singular at r = 0");
        }
        return Ok(0.0);
    }
    Ok(w_unchecked(params, r))
}

#[inline]
fn w_unchecked(params: &KernelParams, r: f64) -> f64 {
    let attract = if params.alpha_is_log { r.ln() } else { r.powf(params.alpha) / params.alpha };
    let repel = if params.beta_is_log { r.ln() } else { r.powf(params.beta) / params.beta };
    attract - repel
}

/// r^gamma from r^2, with the cheap cases spelled out.
#[inline]
fn power(gamma: f64, r2: f64) -> f64 {
    if gamma == 2.0 {
        r2
    } else if gamma == 1.0 {
        r2.sqrt()
    } else if gamma == -1.0 {
        1.0 / r2.sqrt()
    } else if gamma.fract() == 0.0 && gamma.abs() <= 8.0 {
        r2.sqrt().powi(gamma as i32)
    } else {
        (0.5 * gamma * r2.ln()).exp()
    }
}

/// r^alpha and r^beta, with 1 for a log exponent.
#[inline]
fn powers(params: &KernelParams, r2: f64) -> (f64, f64) {
    let pa = if params.alpha_is_log { 1.0 } else { power(params.alpha, r2) };
    let pb = if params.beta_is_log { 1.0 } else { power(params.beta, r2) };
    (pa, pb)
}

/// W(r) and s(r) from |z|^2 in one pass.
#[inline]
fn pair_terms(params: &KernelParams, r2: f64) -> (f64, f64) {
    let (pa, pb) = powers(params, r2);
    let wa = if params.alpha_is_log { 0.5 * r2.ln() } else { pa / params.alpha };
    let wb = if params.beta_is_log { 0.5 * r2.ln() } else { pb / params.beta };
    (wa - wb, (pb - pa) / r2)
}

/// W(r_new) - W(r_old) from r_new^2, the exact-ish gap r_new^2 - r_old^2 and
/// the powers r_new^gamma already computed for the force, without cancellation.
#[inline]
fn pair_delta(params: &KernelParams, r2_new: f64, dr2: f64, pa: f64, pb: f64) -> f64 {
    let r2_old = r2_new - dr2;
    // l = ln r_new - ln r_old
    let l = 0.5 * (dr2 / r2_old).ln_1p();
    let da = if params.alpha_is_log {
        l
    } else if params.alpha == 2.0 {
        0.5 * dr2
    } else {
        -pa * (-params.alpha * l).exp_m1() / params.alpha
    };
    let db = if params.beta_is_log { l } else { -pb * (-params.beta * l).exp_m1() / params.beta };
    da - db
}

/// Scalar s(r) with -grad W(z) = s(|z|) z, namely s = r^(beta-2) - r^(alpha-2).
/// The log kernels fit the same formula with exponent 0.
#[inline]
fn force_factor(params: &KernelParams, r: f64) -> f64 {
    r.powf(params.beta - 2.0) - r.powf(params.alpha - 2.0)
}

/// -grad W(z), the force exerted on a particle at offset z from a source.
pub fn force(params: &KernelParams, z: &[f64]) -> Result<Vec<f64>> {
    let r = norm(z);
    if r == 0.0 {
        return domain("force is undefined at z = 0");
    }
    let s = force_factor(params, r);
    Ok(z.iter().map(|v| s * v).collect())
}

fn norm(z: &[f64]) -> f64 {
    z.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    pub energy: f64,
    pub step_size: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSystem {
    /// row-major N x d
    pub positions: Vec<f64>,
    pub n: usize,
    pub params: KernelParams,
    pub rng_seed: u64,
    pub step_size: f64,
    pub iteration: usize,
    pub energy_trace: Vec<TraceEntry>,
    /// Fixed-order energy reduction, bit-reproducible for any thread count.
    pub deterministic: bool,
    cache: Option<(f64, Vec<f64>)>,
}

impl ParticleSystem {
    pub fn new(params: KernelParams, positions: Vec<f64>, rng_seed: u64) -> Result<Self> {
        let d = params.d;
        if !positions.len().is_multiple_of(d) {
            return domain(format!("{} coordinates do not split into rows of {d}", positions.len()));
        }
        let n = positions.len() / d;
        if n < 2 {
            return domain(format!("need at least 2 particles, got {n}"));
        }
        if positions.iter().any(|v| !v.is_finite()) {
            return domain("positions must be finite");
        }
        let mut sys = Self {
            positions,
            n,
            params,
            rng_seed,
            step_size: INITIAL_STEP,
            iteration: 0,
            energy_trace: Vec::new(),
            deterministic: true,
            cache: None,
        };
        let (e, f) = sys.evaluate(&sys.positions, None)?;
        sys.energy_trace.push(TraceEntry { iteration: 0, energy: e, step_size: sys.step_size });
        sys.cache = Some((e, f));
        Ok(sys)
    }

    /// N particles drawn uniformly from the ball of radius `radius`.
    pub fn random(params: KernelParams, n: usize, radius: f64, seed: u64) -> Result<Self> {
        let d = params.d;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut positions = Vec::with_capacity(n * d);
        let mut point = vec![0.0; d];
        while positions.len() < n * d {
            for v in point.iter_mut() {
                *v = rng.gen_range(-1.0..1.0);
            }
            if norm(&point) < 1.0 {
                positions.extend(point.iter().map(|v| v * radius));
            }
        }
        Self::new(params, positions, seed)
    }

    pub fn with_deterministic(mut self, deterministic: bool) -> Self {
        self.deterministic = deterministic;
        self
    }

    pub fn dim(&self) -> usize {
        self.params.d
    }

    pub fn particle(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.positions[i * d..(i + 1) * d]
    }

    pub fn energy(&self) -> f64 {
        self.cache.as_ref().map(|c| c.0).unwrap_or(f64::NAN)
    }

    /// Mean pair force on each particle, row-major.
    pub fn forces(&self) -> &[f64] {
        self.cache.as_ref().map(|c| c.1.as_slice()).unwrap_or(&[])
    }

    pub fn max_force(&self) -> f64 {
        self.forces().chunks(self.dim()).map(norm).fold(0.0, f64::max)
    }

    /// Discrete energy and mean forces at `pos`. With `from`, the first value is
    /// instead the energy change from `from` to `pos`, summed pair by pair.
    /// Each row is summed in index order; rows are combined in order when
    /// deterministic.
    fn evaluate(&self, pos: &[f64], from: Option<&[f64]>) -> Result<(f64, Vec<f64>)> {
        let d = self.dim();
        let n = self.n;
        let p = self.params;
        let rows: Vec<(f64, Vec<f64>)> = (0..n)
            .into_par_iter()
            .map(|i| -> Result<(f64, Vec<f64>)> {
                let xi = &pos[i * d..(i + 1) * d];
                let mut e = 0.0;
                let mut f = vec![0.0; d];
                let mut z = vec![0.0; d];
                for j in 0..n {
                    if j == i {
                        continue;
                    }
                    let xj = &pos[j * d..(j + 1) * d];
                    for k in 0..d {
                        z[k] = xi[k] - xj[k];
                    }
                    let r2: f64 = z.iter().map(|v| v * v).sum();
                    if r2 == 0.0 {
                        return domain(format!("particles {i} and {j} coincide"));
                    }
                    let s = match from {
                        None => {
                            let (w, s) = pair_terms(&p, r2);
                            e += w;
                            s
                        }
                        Some(old) => {
                            let (pa, pb) = powers(&p, r2);
                            let (oi, oj) = (&old[i * d..(i + 1) * d], &old[j * d..(j + 1) * d]);
                            // displacements x_new - x_old are exact, so dz is accurate
                            // to its own size rather than to |z|
                            let mut dr2 = 0.0;
                            for k in 0..d {
                                let dz = (xi[k] - oi[k]) - (xj[k] - oj[k]);
                                dr2 += dz * (2.0 * z[k] - dz);
                            }
                            e += pair_delta(&p, r2, dr2, pa, pb);
                            (pb - pa) / r2
                        }
                    };
                    for k in 0..d {
                        f[k] += s * z[k];
                    }
                }
                let inv_n = 1.0 / n as f64;
                f.iter_mut().for_each(|v| *v *= inv_n);
                Ok((e, f))
            })
            .collect::<Result<_>>()?;
        let scale = 1.0 / (2.0 * (n * n) as f64);
        let energy = if self.deterministic {
            rows.iter().fold(0.0, |acc, r| acc + r.0) * scale
        } else {
            rows.par_iter().map(|r| r.0).sum::<f64>() * scale
        };
        if !energy.is_finite() {
            return domain("discrete energy is not finite");
        }
        let forces = rows.into_iter().flat_map(|r| r.1).collect();
        Ok((energy, forces))
    }

    /// One explicit step with backtracking; the accepted step grows the next
    /// trial step by 1.5. Acceptance tests the summed pair differences, which
    /// stay accurate where two full energies would agree to the last bit, and
    /// the trace records the previous energy plus that change.
    pub fn step(&mut self) -> Result<()> {
        let (e0, f0) = self.cache.clone().expect("system is evaluated on construction");
        let mut h = self.step_size;
        loop {
            if h < MIN_STEP {
                return Err(Error::Stall { iteration: self.iteration, step_size: h });
            }
            let trial: Vec<f64> = self.positions.iter().zip(&f0).map(|(x, f)| x + h * f).collect();
            match self.evaluate(&trial, Some(&self.positions)) {
                Ok((de, f1)) if de <= 0.0 => {
                    let e1 = e0 + de;
                    self.positions = trial;
                    self.iteration += 1;
                    self.energy_trace.push(TraceEntry { iteration: self.iteration, energy: e1, step_size: h });
                    self.cache = Some((e1, f1));
                    self.step_size = h * GROWTH;
                    return Ok(());
                }
                // higher energy or a collision: shrink
                _ => h /= 2.0,
            }
        }
    }

    pub fn centroid(&self) -> Vec<f64> {
        let d = self.dim();
        let mut c = vec![0.0; d];
        for row in self.positions.chunks(d) {
            for k in 0..d {
                c[k] += row[k];
            }
        }
        c.iter_mut().for_each(|v| *v /= self.n as f64);
        c
    }

    pub fn radial_stats(&self) -> RadialStats {
        let center = self.centroid();
        let radii: Vec<f64> = self
            .positions
            .chunks(self.dim())
            .map(|row| norm(&row.iter().zip(&center).map(|(x, c)| x - c).collect::<Vec<_>>()))
            .collect();
        let n = radii.len() as f64;
        let mean = radii.iter().sum::<f64>() / n;
        let var = radii.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n;
        let max = radii.iter().copied().fold(0.0, f64::max);
        RadialStats { mean_radius: mean, std_radius: var.sqrt(), max_radius: max, center }
    }

    /// Positions as CSV with header x0,...,x{d-1}.
    pub fn positions_csv(&self) -> String {
        let d = self.dim();
        let header: Vec<String> = (0..d).map(|k| format!("x{k}")).collect();
        let mut out = header.join(",");
        out.push('\n');
        for row in self.positions.chunks(d) {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// Energy trace as CSV with header iteration,energy,step_size.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("iteration,energy,step_size\n");
        for t in &self.energy_trace {
            let _ = writeln!(out, "{},{:?},{:?}", t.iteration, t.energy, t.step_size);
        }
        out
    }
}

/// Energy of the empirical measure, 1/(2N^2) times the sum over i != j.
pub fn discrete_energy(sys: &ParticleSystem) -> Result<f64> {
    Ok(sys.evaluate(&sys.positions, None)?.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialStats {
    pub mean_radius: f64,
    pub std_radius: f64,
    pub max_radius: f64,
    pub center: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowOutcome {
    pub system: ParticleSystem,
    pub stats: RadialStats,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub deterministic: bool,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 100_000, deterministic: true }
    }
}

/// Flow from a random start in the ball of radius 2R (R from the closed form
/// when the regime is known, else 1) until the largest force is at most `tol`.
/// Running out of iterations is not an error: the outcome says `converged: false`.
pub fn run_to_convergence(params: &KernelParams, n: usize, seed: u64, opts: &FlowOptions) -> Result<FlowOutcome> {
    if n < 2 {
        return domain(format!("need at least 2 particles, got {n}"));
    }
    let scale = closed_form::radius(params).unwrap_or(1.0);
    let mut sys = ParticleSystem::random(*params, n, 2.0 * scale, seed)?.with_deterministic(opts.deterministic);
    let mut converged = sys.max_force() <= opts.tol;
    while !converged && sys.iteration < opts.max_iter {
        sys.step()?;
        converged = sys.max_force() <= opts.tol;
    }
    let stats = sys.radial_stats();
    Ok(FlowOutcome { system: sys, stats, converged })
}
