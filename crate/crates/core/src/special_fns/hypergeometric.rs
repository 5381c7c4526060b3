//! Gauss hypergeometric function 2F1 on [0, 1] and the generalized 3F2.
//!
//! Evaluation strategy for F(a, b; c; z):
//!
//! * terminating series (a or b a non-positive integer): exact polynomial sum;
//! * z <= 0.75: direct power series;
//! * z in (0.75, 1): the z -> 1 - z connection formula. When s = c - a - b is
//!   within 1e-8 of an integer the logarithmic (degenerate) form is used
//!   instead, so there is no accuracy floor near integer s.
//!
//! Callers that know 1 - z more accurately than z itself (for instance
//! 1 - 1/rho = (rho - 1)/rho) can use [`hyp2f1_zw`].

use crate::error::{domain, Error, Result};
use crate::quadrature::{tanh_sinh, QuadOptions};

use super::gamma::{digamma, gamma, is_nonpositive_integer, rgamma};

/// Hard cap on the number of series terms.
pub const MAX_TERMS: usize = 2_000_000;

const DIRECT_LIMIT: f64 = 0.75;
const INTEGER_GAP: f64 = 1e-8;

/// Parameters and argument of F(a, b; c; z).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyp2F1Input {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub z: f64,
}

impl Hyp2F1Input {
    pub fn new(a: f64, b: f64, c: f64, z: f64) -> Result<Self> {
        check_params(a, b, c)?;
        if !(0.0..=1.0).contains(&z) {
            return domain(format!("2F1 argument z = {z} outside [0, 1]"));
        }
        Ok(Self { a, b, c, z })
    }

    /// F(a, b; c; z); z = 1 is evaluated with the Gauss formula.
    pub fn eval(&self) -> Result<f64> {
        hyp2f1_closed(self.a, self.b, self.c, self.z)
    }

    pub fn derivative(&self, order: u32) -> Result<f64> {
        hyp2f1_deriv(self.a, self.b, self.c, self.z, order)
    }
}

fn check_params(a: f64, b: f64, c: f64) -> Result<()> {
    if !(a.is_finite() && b.is_finite() && c.is_finite()) {
        return domain("non-finite 2F1 parameter");
    }
    if is_nonpositive_integer(c) {
        return domain(format!("2F1 lower parameter c = {c} is a non-positive integer"));
    }
    Ok(())
}

/// F(a, b; c; z) for z in [0, 1).
pub fn hyp2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    check_params(a, b, c)?;
    if !(0.0..1.0).contains(&z) {
        return domain(format!("2F1 argument z = {z} outside [0, 1)"));
    }
    eval_2f1(a, b, c, z, 1.0 - z)
}

/// F(a, b; c; z) for z in [0, 1) given w = 1 - z separately.
pub fn hyp2f1_zw(a: f64, b: f64, c: f64, z: f64, w: f64) -> Result<f64> {
    check_params(a, b, c)?;
    if !(0.0..=1.0).contains(&z) || !(w > 0.0 && w <= 1.0) {
        return domain(format!("2F1 argument z = {z} (1 - z = {w}) outside [0, 1)"));
    }
    eval_2f1(a, b, c, z, w)
}

/// F(a, b; c; z) on the closed interval [0, 1].
pub fn hyp2f1_closed(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if z == 1.0 {
        hyp2f1_at_one(a, b, c)
    } else {
        hyp2f1(a, b, c, z)
    }
}

/// Gauss's value F(a, b; c; 1) = Gamma(c) Gamma(c-a-b) / (Gamma(c-a) Gamma(c-b)).
pub fn hyp2f1_at_one(a: f64, b: f64, c: f64) -> Result<f64> {
    check_params(a, b, c)?;
    let s = c - a - b;
    if !(s > 0.0) {
        return domain(format!("F(a,b;c;1) needs c - a - b > 0, got {s}"));
    }
    if a == 0.0 || b == 0.0 {
        return Ok(1.0);
    }
    Ok(gamma(c)? * gamma(s)? * rgamma(c - a) * rgamma(c - b))
}

/// First or second z-derivative of F(a, b; c; z) on [0, 1].
///
/// At z = 1 the boundary derivative needs c - a - b > order.
pub fn hyp2f1_deriv(a: f64, b: f64, c: f64, z: f64, order: u32) -> Result<f64> {
    check_params(a, b, c)?;
    let k = order as f64;
    let coeff = match order {
        1 => a * b / c,
        2 => a * (a + 1.0) * b * (b + 1.0) / (c * (c + 1.0)),
        _ => return domain(format!("derivative order {order} not supported")),
    };
    if coeff == 0.0 {
        return Ok(0.0);
    }
    if z == 1.0 {
        if !(c - a - b > k) {
            return domain(format!(
                "order-{order} derivative at z = 1 needs c - a - b > {order}, got {}",
                c - a - b
            ));
        }
        return Ok(coeff * hyp2f1_at_one(a + k, b + k, c + k)?);
    }
    Ok(coeff * hyp2f1(a + k, b + k, c + k, z)?)
}

fn eval_2f1(a: f64, b: f64, c: f64, z: f64, w: f64) -> Result<f64> {
    if z == 0.0 {
        return Ok(1.0);
    }
    if is_nonpositive_integer(a) || is_nonpositive_integer(b) {
        let (a, b) = (snap(a), snap(b));
        return series_2f1(a, b, c, z);
    }
    if z <= DIRECT_LIMIT {
        return series_2f1(a, b, c, z);
    }
    let s = c - a - b;
    let m = s.round();
    if (s - m).abs() <= INTEGER_GAP {
        if m >= 0.0 {
            degenerate_connection(a, b, m as u32, w)
        } else {
            // Euler: F(a,b;c;z) = w^(c-a-b) F(c-a, c-b; c; z), whose excess is -m > 0
            let inner = eval_2f1(c - a, c - b, c, z, w)?;
            Ok(w.powf(s) * inner)
        }
    } else {
        connection(a, b, c, s, w)
    }
}

fn snap(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        x.round()
    } else {
        x
    }
}

/// Direct power series. Stops after three consecutive terms below
/// machine epsilon relative to the partial sum, once terms are shrinking.
pub(crate) fn series_2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut small = 0;
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        let ratio = (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * z;
        term *= ratio;
        sum += term;
        if term == 0.0 {
            return Ok(sum);
        }
        if term.abs() <= f64::EPSILON * sum.abs() && ratio.abs() < 1.0 {
            small += 1;
            if small >= 3 {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
        if !sum.is_finite() {
            return Err(Error::NonConvergence(format!(
                "2F1({a}, {b}; {c}; {z}) series overflowed"
            )));
        }
    }
    Err(Error::NonConvergence(format!(
        "2F1({a}, {b}; {c}; {z}) exceeded {MAX_TERMS} terms"
    )))
}

/// Connection formula for non-integer s = c - a - b.
fn connection(a: f64, b: f64, c: f64, s: f64, w: f64) -> Result<f64> {
    let gc = gamma(c)?;
    let mut total = 0.0;
    let pref1 = gc * gamma(s)? * rgamma(c - a) * rgamma(c - b);
    if pref1 != 0.0 {
        total += pref1 * series_2f1(a, b, 1.0 - s, w)?;
    }
    let pref2 = gc * gamma(-s)? * rgamma(a) * rgamma(b);
    if pref2 != 0.0 {
        total += w.powf(s) * pref2 * series_2f1(c - a, c - b, 1.0 + s, w)?;
    }
    Ok(total)
}

/// Connection formula for c = a + b + m with integer m >= 0 (logarithmic case).
fn degenerate_connection(a: f64, b: f64, m: u32, w: f64) -> Result<f64> {
    let mf = m as f64;
    let c = a + b + mf;
    let gc = gamma(c)?;
    let mut total = 0.0;

    if m > 0 {
        let pref = gamma(mf)? * gc * rgamma(a + mf) * rgamma(b + mf);
        if pref != 0.0 {
            let mut term = 1.0;
            let mut sum = 1.0;
            for n in 1..m {
                let k = (n - 1) as f64;
                term *= (a + k) * (b + k) / ((k + 1.0) * (1.0 - mf + k)) * w;
                sum += term;
            }
            total += pref * sum;
        }
    }

    let pref = gc * rgamma(a) * rgamma(b);
    if pref == 0.0 {
        return Ok(total);
    }
    let ln_w = w.ln();
    let mut psi_n1 = digamma(1.0)?;
    let mut psi_nm1 = digamma(mf + 1.0)?;
    let mut psi_a = digamma(a + mf)?;
    let mut psi_b = digamma(b + mf)?;
    // (a+m)_n (b+m)_n / (n! (n+m)!) w^n, starting at 1/m!
    let mut term = 1.0 / (1..=m).fold(1.0, |acc, k| acc * k as f64);
    let mut sum = 0.0;
    let mut small = 0;
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        let contrib = term * (ln_w - psi_n1 - psi_nm1 + psi_a + psi_b);
        sum += contrib;
        if contrib.abs() <= f64::EPSILON * sum.abs() {
            small += 1;
            if small >= 3 {
                let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
                return Ok(total - sign * w.powi(m as i32) * pref * sum);
            }
        } else {
            small = 0;
        }
        term *= (a + mf + nf) * (b + mf + nf) / ((nf + 1.0) * (nf + mf + 1.0)) * w;
        psi_n1 += 1.0 / (nf + 1.0);
        psi_nm1 += 1.0 / (nf + mf + 1.0);
        psi_a += 1.0 / (a + mf + nf);
        psi_b += 1.0 / (b + mf + nf);
    }
    Err(Error::NonConvergence(format!(
        "logarithmic 2F1 connection series for (a={a}, b={b}, m={m}) did not converge"
    )))
}

/// The a-derivative of F(a, b; c; z) at a = 0:
/// sum over n >= 1 of (b)_n / ((c)_n n) z^n, for z in [0, 1].
///
/// At z = 1 this equals psi(c) - psi(c - b) and requires c - b > 0. Close to
/// z = 1 the value is obtained by integrating its derivative
/// (b/c) F(1, b+1; c+1; t) from z up to 1.
pub fn hyp2f1_a_derivative_at_zero(b: f64, c: f64, z: f64) -> Result<f64> {
    if is_nonpositive_integer(c) {
        return domain(format!("lower parameter c = {c} is a non-positive integer"));
    }
    if !(0.0..=1.0).contains(&z) {
        return domain(format!("argument z = {z} outside [0, 1]"));
    }
    if b == 0.0 || z == 0.0 {
        return Ok(0.0);
    }
    if z <= 0.9 || is_nonpositive_integer(b) {
        let mut coeff = 1.0; // (b)_n / (c)_n
        let mut power = 1.0;
        let mut sum = 0.0;
        let mut small = 0;
        for n in 1..MAX_TERMS {
            let k = (n - 1) as f64;
            coeff *= (b + k) / (c + k);
            power *= z;
            let term = coeff * power / n as f64;
            sum += term;
            if term == 0.0 || (term.abs() <= f64::EPSILON * sum.abs() && n as f64 > b.abs()) {
                small += 1;
                if small >= 3 || term == 0.0 {
                    return Ok(sum);
                }
            } else {
                small = 0;
            }
        }
        return Err(Error::NonConvergence(format!(
            "parameter-derivative series at z = {z} did not converge"
        )));
    }
    if !(c - b > 0.0) {
        return domain(format!("a-derivative at z near 1 needs c - b > 0, got {}", c - b));
    }
    let at_one = digamma(c)? - digamma(c - b)?;
    if z == 1.0 {
        return Ok(at_one);
    }
    let scale = b / c;
    let (b1, c1) = (b + 1.0, c + 1.0);
    // integrand on [z, 1]; `to_one` is the exact distance 1 - t
    let integrand = |t: f64, _from_z: f64, to_one: f64| -> Result<f64> {
        if to_one <= 0.0 {
            return hyp2f1_at_one(1.0, b1, c1);
        }
        eval_2f1(1.0, b1, c1, t, to_one)
    };
    let tail = tanh_sinh(integrand, z, 1.0, &QuadOptions::precise())?;
    Ok(at_one - scale * tail.value)
}

/// Generalized hypergeometric series 3F2(a0, a1, a2; b0, b1; z), z in [0, 1].
///
/// Above z = 0.9, where the terms decay only algebraically, the Euler
/// integral over a 2F1 is used whenever some pair satisfies b_j > a_i > 0;
/// otherwise the series is summed directly up to [`MAX_TERMS`].
pub fn hyp3f2(a0: f64, a1: f64, a2: f64, b0: f64, b1: f64, z: f64) -> Result<f64> {
    if is_nonpositive_integer(b0) || is_nonpositive_integer(b1) {
        return domain("3F2 lower parameter is a non-positive integer");
    }
    if !(0.0..=1.0).contains(&z) {
        return domain(format!("3F2 argument z = {z} outside [0, 1]"));
    }
    let excess = b0 + b1 - a0 - a1 - a2;
    let upper = [snap(a0), snap(a1), snap(a2)];
    let terminating = upper.iter().any(|&x| is_nonpositive_integer(x));
    if z == 1.0 && !terminating && !(excess > 0.0) {
        return domain(format!("3F2 at z = 1 diverges (excess {excess} <= 0)"));
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    let ratio = |n: f64| {
        (upper[0] + n) * (upper[1] + n) * (upper[2] + n) / ((b0 + n) * (b1 + n) * (n + 1.0)) * z
    };

    if z > 0.9 && !terminating {
        if let Some(value) = euler_integral_3f2(upper, [b0, b1], z)? {
            return Ok(value);
        }
    }

    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut small = 0;
    for n in 0..MAX_TERMS {
        let r = ratio(n as f64);
        term *= r;
        sum += term;
        if term == 0.0 {
            return Ok(sum);
        }
        if term.abs() <= f64::EPSILON * sum.abs() && r.abs() < 1.0 {
            small += 1;
            if small >= 3 {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
    }
    Err(Error::NonConvergence(format!(
        "3F2({a0}, {a1}, {a2}; {b0}, {b1}; {z}) exceeded {MAX_TERMS} terms"
    )))
}

/// Euler integral over u in [0, 1] of
/// u^(a0-1) (1-u)^(b0-a0-1) F(a1, a2; b1; z u), for a pairing with b0 > a0 > 0.
/// Returns None when no upper/lower pair qualifies.
#[allow(clippy::needless_range_loop)]
fn euler_integral_3f2(upper: [f64; 3], lower: [f64; 2], z: f64) -> Result<Option<f64>> {
    let mut pick = None;
    'search: for i in 0..3 {
        for j in 0..2 {
            if lower[j] > upper[i] && upper[i] > 0.0 {
                pick = Some((i, j));
                break 'search;
            }
        }
    }
    let Some((i, j)) = pick else { return Ok(None) };
    let (a0, b0) = (upper[i], lower[j]);
    let rest: Vec<f64> = (0..3).filter(|&k| k != i).map(|k| upper[k]).collect();
    let (a1, a2, b1) = (rest[0], rest[1], lower[1 - j]);
    let w_z = 1.0 - z;
    let integrand = |u: f64, du: f64, dv: f64| -> Result<f64> {
        // 1 - z u = (1 - z) + z (1 - u)
        let w = w_z + z * dv;
        let weight = du.powf(a0 - 1.0) * dv.powf(b0 - a0 - 1.0);
        if weight == 0.0 {
            return Ok(0.0);
        }
        let f = if w <= 0.0 {
            hyp2f1_at_one(a1, a2, b1)?
        } else {
            hyp2f1_zw(a1, a2, b1, z * u, w)?
        };
        Ok(weight * f)
    };
    let r = tanh_sinh(integrand, 0.0, 1.0, &QuadOptions::precise())?;
    Ok(Some(gamma(b0)? * rgamma(a0) * rgamma(b0 - a0) * r.value))
}
