//! Uniform limits of the response functions as the sparsity `P(V != 0)`
//! goes to zero. These curves do not depend on the prior.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

pub fn f0(x: f64) -> f64 {
    x / (0.5 + x * x).sqrt()
}

pub fn g0(x: f64) -> f64 {
    0.5 / (0.5 + x * x).sqrt()
}

/// Limit of the symmetric fixed point; zero at and below `beta = 1/sqrt(2)`.
pub fn t0(beta: f64) -> f64 {
    if beta <= FRAC_1_SQRT_2 {
        0.0
    } else {
        (beta * beta - 0.5).sqrt()
    }
}

/// Limit of the rectangular fixed point; zero at and below
/// `beta = sqrt(alpha/2)`.
pub fn s0(beta: f64, alpha: f64) -> f64 {
    if beta <= (alpha / 2.0).sqrt() {
        0.0
    } else {
        ((beta * beta - alpha / 2.0) / (1.0 + beta)).sqrt()
    }
}

/// Limit of the symmetric Rayleigh value: `sqrt(2)` below threshold and
/// `beta + 1/(2 beta)` above.
pub fn rayleigh_sym0(beta: f64) -> f64 {
    if beta <= FRAC_1_SQRT_2 {
        SQRT_2
    } else {
        beta + 1.0 / (2.0 * beta)
    }
}

pub fn overlap_sym0(beta: f64) -> f64 {
    if beta <= FRAC_1_SQRT_2 {
        0.0
    } else {
        (1.0 - 1.0 / (2.0 * beta * beta)).sqrt()
    }
}

pub fn rayleigh_rec0(beta: f64, alpha: f64) -> f64 {
    if beta <= (alpha / 2.0).sqrt() {
        1.0 + (alpha / 2.0).sqrt()
    } else {
        let sb = beta.sqrt();
        ((sb + alpha / (2.0 * sb)) * (sb + 1.0 / sb)).sqrt()
    }
}

pub fn overlap_rec0(beta: f64, alpha: f64) -> f64 {
    if beta <= (alpha / 2.0).sqrt() {
        0.0
    } else {
        ((beta * beta - alpha / 2.0) / (beta * beta + beta * alpha / 2.0)).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_values() {
        assert_eq!(t0(FRAC_1_SQRT_2), 0.0);
        assert!((t0(1.0) - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((s0(1.0, 1.0) - 0.5).abs() < 1e-15);
        assert_eq!(s0(0.5, 1.0), 0.0);
    }

    #[test]
    fn limit_curves_are_consistent() {
        // F0(T0) is the overlap limit, R follows from F0 and G0
        for beta in [0.8, 1.0, 1.5, 3.0] {
            let t = t0(beta);
            assert!((f0(t) - overlap_sym0(beta)).abs() < 1e-14);
            assert!((beta * f0(t).powi(2) + 2.0 * g0(t) - rayleigh_sym0(beta)).abs() < 1e-14);
        }
        for (beta, alpha) in [(1.0, 1.0), (1.2, 0.5), (2.0, 3.0)] {
            let y = s0(beta, alpha) / alpha.sqrt();
            assert!((f0(y) - overlap_rec0(beta, alpha)).abs() < 1e-14);
            let r = (1.0 + beta * f0(y).powi(2)).sqrt() + alpha.sqrt() * g0(y);
            assert!((r - rayleigh_rec0(beta, alpha)).abs() < 1e-14);
        }
        assert!((rayleigh_rec0(1.0, 1.0) - 3f64.sqrt()).abs() < 1e-15);
        assert!((rayleigh_rec0(0.5, 1.0) - (1.0 + FRAC_1_SQRT_2)).abs() < 1e-15);
    }
}
