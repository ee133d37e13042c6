//! Standard normal density and distribution function, plus the truncated
//! Gaussian moments built from them.

use std::f64::consts::FRAC_1_SQRT_2;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

pub fn std_normal_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// `Phi(x)`, evaluated through `erfc` so both tails keep full relative
/// accuracy. Saturates to exactly 0 or 1 beyond `|x| = 40`.
pub fn std_normal_cdf(x: f64) -> f64 {
    if x < -40.0 {
        0.0
    } else if x > 40.0 {
        1.0
    } else {
        0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
    }
}

/// Upper tail `1 - Phi(x)` without cancellation.
pub fn std_normal_sf(x: f64) -> f64 {
    std_normal_cdf(-x)
}

/// `B(w) = w^2 Phi(w) + w phi(w) = E{ w (w + G)_+ }`.
pub fn cap_b(w: f64) -> f64 {
    w * w * std_normal_cdf(w) + w * std_normal_pdf(w)
}

/// `K(x) = E{(x + G)_+^2} = (1 + x^2) Phi(x) + x phi(x)`.
pub fn cap_k(x: f64) -> f64 {
    let k = (1.0 + x * x) * std_normal_cdf(x) + x * std_normal_pdf(x);
    // the two terms cancel in the far left tail
    k.max(0.0)
}

/// `b(w) = w^2 (Phi(w) - 1) + w phi(w) = B(w) - w^2`, computed from the
/// upper tail directly.
pub fn b_small(w: f64) -> f64 {
    w * std_normal_pdf(w) - w * w * std_normal_sf(w)
}

/// `E{(c + G)_+} = c Phi(c) + phi(c)`.
pub fn positive_part_mean(c: f64) -> f64 {
    c * std_normal_cdf(c) + std_normal_pdf(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pdf_and_cdf_reference_values() {
        assert_eq!(std_normal_cdf(0.0), 0.5);
        assert!((std_normal_pdf(0.0) - 0.3989422804014327).abs() < 1e-17);
        // mpmath, 40 digits
        assert!((std_normal_cdf(1.96) - 0.975_002_104_851_779_6).abs() <= 1e-15);
        assert!((std_normal_cdf(-8.0) - 6.220_960_574_271_784e-16).abs() <= 1e-15 * 1e-14);
        assert!((std_normal_cdf(8.0) - 0.999_999_999_999_999_4).abs() <= 1e-15);
        assert_eq!(std_normal_cdf(-41.0), 0.0);
        assert_eq!(std_normal_cdf(41.0), 1.0);
    }

    #[test]
    fn cdf_symmetry() {
        for i in -800..=800 {
            let x = i as f64 / 100.0;
            let s = std_normal_cdf(x) + std_normal_cdf(-x);
            assert!((s - 1.0).abs() <= 2e-16, "x = {x}");
        }
    }

    #[test]
    fn cap_b_values() {
        assert_eq!(cap_b(0.0), 0.0);
        // quadrature of E w (w + G)_+ at w = 1
        assert!((cap_b(1.0) - 1.083_315_470_587_686_3).abs() < 1e-14);
        assert!((cap_b(10.0) - 100.0).abs() < 1e-6);
    }

    #[test]
    fn cap_k_values() {
        assert_eq!(cap_k(0.0), 0.5);
        assert!((cap_k(1.0) - 1.924_660_216_656_229_2).abs() < 1e-14);
        assert!(cap_k(-10.0) <= 1e-20);
        assert!(cap_k(-10.0) >= 0.0);
    }

    #[test]
    fn b_small_values() {
        assert_eq!(b_small(0.0), 0.0);
        let b2 = b_small(2.0);
        assert!(b2 > 0.0 && b2 < std_normal_pdf(2.0) / 2.0);
        assert!((b2 - 0.016_981_405_233_659_275).abs() < 1e-15);
        assert!((b_small(1.0) - 0.083_315_470_587_686_3).abs() < 1e-14);
        // agrees with B(w) - w^2 where that form is still accurate
        for w in [0.1, 0.5, 1.5, 3.0] {
            assert!((b_small(w) - (cap_b(w) - w * w)).abs() < 1e-13);
        }
        // stays positive deep in the tail where B(w) - w^2 cancels to 0
        for w in [6.0, 10.0, 20.0] {
            let b = b_small(w);
            assert!(b > 0.0 && b < std_normal_pdf(w) / w, "w = {w}, b = {b}");
        }
    }
}
