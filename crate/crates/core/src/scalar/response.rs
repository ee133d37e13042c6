//! Response functions of a discrete prior `V`, with `G ~ N(0, 1)`
//! independent of `V`:
//!
//! ```text
//! D(x) = E{(xV + G)_+^2}
//! F(x) = E{V (xV + G)_+} / sqrt(D(x))
//! G(x) = E{G (xV + G)_+} / sqrt(D(x)) = E{Phi(xV)} / sqrt(D(x))
//! ```
//!
//! The last form of `G` uses Stein's identity. For every `x >= 0` the three
//! satisfy `x F(x) + G(x) = sqrt(D(x))`.

use super::normal::{cap_b, cap_k, positive_part_mean, std_normal_cdf};
use crate::error::{Error, Result};
use crate::measures::DiscreteMeasure;

/// `D`, `F` and `G` evaluated together at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseEval {
    pub x: f64,
    pub d: f64,
    pub f: f64,
    pub g: f64,
}

/// Evaluates all three response functions with a single pass over the atoms.
pub fn evaluate(m: &DiscreteMeasure, x: f64) -> ResponseEval {
    let mut d = 0.0;
    let mut y = 0.0;
    let mut stein = 0.0;
    for atom in m.atoms() {
        let z = x * atom.value;
        d += atom.weight * cap_k(z);
        y += atom.weight * atom.value * positive_part_mean(z);
        stein += atom.weight * std_normal_cdf(z);
    }
    let root = d.sqrt();
    ResponseEval {
        x,
        d,
        f: y / root,
        g: stein / root,
    }
}

pub fn dee(m: &DiscreteMeasure, x: f64) -> f64 {
    m.atoms()
        .iter()
        .map(|a| a.weight * cap_k(x * a.value))
        .sum()
}

pub fn eff(m: &DiscreteMeasure, x: f64) -> f64 {
    evaluate(m, x).f
}

pub fn gee(m: &DiscreteMeasure, x: f64) -> f64 {
    evaluate(m, x).g
}

/// Closed form of `F` for the two-point prior `mu_eps`. Kept as an
/// independent route to cross-check [`eff`].
pub fn eff_eps_closed(eps: f64, x: f64) -> Result<f64> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::EpsOutOfRange(eps));
    }
    if x < 0.0 || !x.is_finite() {
        return Err(Error::DomainError {
            func: "eff_eps_closed",
            value: x,
        });
    }
    if x == 0.0 {
        // removable singularity of eps B(w) / x
        return Ok(eff(&DiscreteMeasure::two_point(eps)?, 0.0));
    }
    let w = x / eps.sqrt();
    let b = cap_b(w);
    let num = eps * b / x;
    let den = ((1.0 - eps) / 2.0 + eps * (b + std_normal_cdf(w))).sqrt();
    Ok(num / den)
}

/// `R_sym(x) = beta F(x)^2 + 2 G(x)`.
pub fn rayleigh_sym(m: &DiscreteMeasure, beta: f64, x: f64) -> f64 {
    let r = evaluate(m, x);
    beta * r.f * r.f + 2.0 * r.g
}

/// `R_rec(x, alpha) = sqrt(1 + beta F(x/sqrt(alpha))^2) + sqrt(alpha) G(x/sqrt(alpha))`.
pub fn rayleigh_rec(m: &DiscreteMeasure, beta: f64, alpha: f64, x: f64) -> f64 {
    let sa = alpha.sqrt();
    let r = evaluate(m, x / sa);
    (1.0 + beta * r.f * r.f).sqrt() + sa * r.g
}
