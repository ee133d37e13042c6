//! Cached Gaussian quadrature rules.

use std::sync::OnceLock;

use gauss_quad::{GaussHermite, GaussLegendre};

/// Gauss–Hermite rule rescaled to the standard normal law, so that
/// `expect(f) ~ E f(Z)` with `Z ~ N(0, 1)`.
#[derive(Debug, Clone)]
pub struct NormalRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl NormalRule {
    fn build(order: usize) -> Self {
        let rule = GaussHermite::new(order).expect("order >= 2");
        let scale = std::f64::consts::PI.sqrt();
        let (nodes, weights) = rule
            .iter()
            .map(|(x, w)| (x * std::f64::consts::SQRT_2, w / scale))
            .unzip();
        NormalRule { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn expect<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&z, &w)| w * f(z))
            .sum()
    }
}

/// Normal-law rule of one of the supported orders 61, 81 or 121.
pub fn normal_rule(order: usize) -> &'static NormalRule {
    static R61: OnceLock<NormalRule> = OnceLock::new();
    static R81: OnceLock<NormalRule> = OnceLock::new();
    static R121: OnceLock<NormalRule> = OnceLock::new();
    let cell = match order {
        61 => &R61,
        81 => &R81,
        121 => &R121,
        _ => panic!("unsupported Gauss-Hermite order {order}"),
    };
    cell.get_or_init(|| NormalRule::build(order))
}

const LEGENDRE_ORDER: usize = 24;

/// Composite Gauss–Legendre quadrature of `f` over `[a, b]` with `panels`
/// equal sub-intervals.
pub fn legendre_composite<F: FnMut(f64) -> f64>(a: f64, b: f64, panels: usize, mut f: F) -> f64 {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    let rule = RULE.get_or_init(|| GaussLegendre::new(LEGENDRE_ORDER).expect("order >= 2"));
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|k| {
            let lo = a + k as f64 * h;
            rule.integrate(lo, lo + h, &mut f)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_moments() {
        for order in [61, 81, 121] {
            let r = normal_rule(order);
            assert_eq!(r.order(), order);
            assert!((r.expect(|_| 1.0) - 1.0).abs() < 1e-13);
            assert!(r.expect(|z| z).abs() < 1e-13);
            assert!((r.expect(|z| z * z) - 1.0).abs() < 1e-13);
            assert!((r.expect(|z| z.powi(4)) - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn legendre_integrates_smooth_functions() {
        let v = legendre_composite(0.0, std::f64::consts::PI, 4, f64::sin);
        assert!((v - 2.0).abs() < 1e-14);
    }
}
