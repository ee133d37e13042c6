//! Least-favorable sparsity and minimax overlap over the two-point family
//! `(1 - eps) delta_0 + eps delta_{1/sqrt(eps)}`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fixed_point::{solve_s, solve_t};
use crate::measures::DiscreteMeasure;
use crate::scalar::eff;

/// Smallest sparsity scanned. Below it `T_eps` is within solver tolerance
/// of its `eps -> 0` limit.
pub const EPS_FLOOR: f64 = 1e-6;
const GRID_POINTS: usize = 200;
const GOLDEN_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    BelowThreshold,
    AboveThreshold,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorstCaseReport {
    pub beta: f64,
    pub alpha: Option<f64>,
    pub eps_bar: f64,
    pub regime: Regime,
    pub eps_star: Option<f64>,
    /// Set when the minimizer sits at `eps_bar` rather than in the interior.
    pub at_boundary: bool,
    pub overlap_floor: f64,
}

fn check(beta: f64, eps_bar: f64) -> Result<()> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::BetaNonPositive(beta));
    }
    if !(eps_bar > 0.0 && eps_bar <= 1.0) {
        return Err(Error::EpsOutOfRange(eps_bar));
    }
    Ok(())
}

/// Minimizes `obj` over `(0, eps_bar]`: logarithmic grid scan from
/// [`EPS_FLOOR`], ties to the smaller `eps`, then golden-section refinement
/// on the bracketing grid cell.
fn minimize_eps<O: Fn(f64) -> Result<f64>>(obj: O, eps_bar: f64) -> Result<(f64, f64)> {
    let lo = EPS_FLOOR.min(eps_bar);
    let ratio = (eps_bar / lo).ln();
    let grid: Vec<f64> = (0..GRID_POINTS)
        .map(|i| {
            if i + 1 == GRID_POINTS {
                eps_bar
            } else {
                lo * (ratio * i as f64 / (GRID_POINTS - 1) as f64).exp()
            }
        })
        .collect();
    let mut best = (grid[0], obj(grid[0])?);
    let mut best_i = 0;
    for (i, &e) in grid.iter().enumerate().skip(1) {
        let v = obj(e)?;
        if v < best.1 {
            best = (e, v);
            best_i = i;
        }
    }

    let mut a = grid[best_i.saturating_sub(1)];
    let mut b = grid[(best_i + 1).min(GRID_POINTS - 1)];
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (obj(c)?, obj(d)?);
    while b - a > GOLDEN_TOL {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = obj(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = obj(d)?;
        }
    }
    let mid = 0.5 * (a + b);
    let candidates = [(mid, obj(mid)?), (a, obj(a)?), (b, obj(b)?)];
    for (e, v) in candidates {
        if v < best.1 || (v == best.1 && e < best.0) {
            best = (e, v);
        }
    }
    Ok(best)
}

/// Worst case for the symmetric model. Below `beta = 1/sqrt(2)` the
/// minimax overlap is zero; above it the minimizer of `eps -> T_eps(beta)`
/// also minimizes the overlap `T/beta`.
pub fn worst_eps_sym(beta: f64, eps_bar: f64) -> Result<WorstCaseReport> {
    check(beta, eps_bar)?;
    if beta <= std::f64::consts::FRAC_1_SQRT_2 {
        return Ok(WorstCaseReport {
            beta,
            alpha: None,
            eps_bar,
            regime: Regime::BelowThreshold,
            eps_star: None,
            at_boundary: false,
            overlap_floor: 0.0,
        });
    }
    let (eps, t) = minimize_eps(|e| solve_t(&DiscreteMeasure::two_point(e)?, beta), eps_bar)?;
    Ok(WorstCaseReport {
        beta,
        alpha: None,
        eps_bar,
        regime: Regime::AboveThreshold,
        eps_star: Some(eps),
        at_boundary: eps_bar - eps <= GOLDEN_TOL,
        overlap_floor: t / beta,
    })
}

/// Worst case for the rectangular model, threshold `sqrt(alpha/2)`.
pub fn worst_eps_rec(beta: f64, alpha: f64, eps_bar: f64) -> Result<WorstCaseReport> {
    check(beta, eps_bar)?;
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::AlphaNonPositive(alpha));
    }
    if beta <= (alpha / 2.0).sqrt() {
        return Ok(WorstCaseReport {
            beta,
            alpha: Some(alpha),
            eps_bar,
            regime: Regime::BelowThreshold,
            eps_star: None,
            at_boundary: false,
            overlap_floor: 0.0,
        });
    }
    let (eps, s) = minimize_eps(
        |e| solve_s(&DiscreteMeasure::two_point(e)?, beta, alpha),
        eps_bar,
    )?;
    let floor = eff(&DiscreteMeasure::two_point(eps)?, s / alpha.sqrt());
    Ok(WorstCaseReport {
        beta,
        alpha: Some(alpha),
        eps_bar,
        regime: Regime::AboveThreshold,
        eps_star: Some(eps),
        at_boundary: eps_bar - eps <= GOLDEN_TOL,
        overlap_floor: floor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::overlap_sym0;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn floor_sym_at(eps: f64, beta: f64) -> f64 {
        solve_t(&DiscreteMeasure::two_point(eps).unwrap(), beta).unwrap() / beta
    }

    #[test]
    fn below_threshold() {
        let r = worst_eps_sym(0.5, 1.0).unwrap();
        assert_eq!(r.regime, Regime::BelowThreshold);
        assert_eq!(r.overlap_floor, 0.0);
        assert_eq!(r.eps_star, None);
        let r = worst_eps_rec(0.5, 1.0, 1.0).unwrap();
        assert_eq!(r.regime, Regime::BelowThreshold);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            worst_eps_sym(0.0, 1.0),
            Err(Error::BetaNonPositive(_))
        ));
        assert!(matches!(
            worst_eps_sym(1.0, 0.0),
            Err(Error::EpsOutOfRange(_))
        ));
        assert!(matches!(
            worst_eps_rec(1.0, -1.0, 1.0),
            Err(Error::AlphaNonPositive(_))
        ));
    }

    #[test]
    fn sym_dominance() {
        let r = worst_eps_sym(1.2, 1.0).unwrap();
        for i in 1..=50 {
            let eps = i as f64 / 50.0;
            assert!(
                r.overlap_floor <= floor_sym_at(eps, 1.2) + 1e-12,
                "eps = {eps}"
            );
        }
        assert!(r.overlap_floor > 0.0 && r.overlap_floor <= 1.0);
    }

    #[test]
    fn regime_flips_at_thresholds() {
        let b = FRAC_1_SQRT_2;
        assert_eq!(
            worst_eps_sym(b - 1e-6, 1.0).unwrap().regime,
            Regime::BelowThreshold
        );
        assert_eq!(
            worst_eps_sym(b + 1e-6, 1.0).unwrap().regime,
            Regime::AboveThreshold
        );
        for alpha in [0.5, 1.0, 2.0] {
            let b = (alpha / 2.0f64).sqrt();
            let lo = worst_eps_rec(b - 1e-6, alpha, 1.0).unwrap();
            let hi = worst_eps_rec(b + 1e-6, alpha, 1.0).unwrap();
            assert_eq!(lo.regime, Regime::BelowThreshold);
            assert_eq!(hi.regime, Regime::AboveThreshold);
        }
    }

    #[test]
    fn floor_vanishes_at_threshold() {
        let mut prev = 0.0;
        for delta in [1e-4, 1e-3, 1e-2] {
            let beta = FRAC_1_SQRT_2 + delta;
            let r = worst_eps_sym(beta, 1.0).unwrap();
            assert!(r.overlap_floor <= overlap_sym0(beta) + 1e-9);
            assert!(r.overlap_floor > prev);
            prev = r.overlap_floor;
        }
        let r = worst_eps_sym(FRAC_1_SQRT_2 + 1e-4, 1.0).unwrap();
        assert!(r.overlap_floor < 0.02, "{}", r.overlap_floor);
    }

    #[test]
    fn floor_is_monotone_in_beta() {
        let mut prev = 0.0;
        for i in 0..20 {
            let beta = 0.72 + 0.07 * i as f64;
            let f = worst_eps_sym(beta, 0.5).unwrap().overlap_floor;
            assert!(f >= prev - 1e-10, "beta = {beta}");
            prev = f;
        }
    }

    #[test]
    fn boundary_flag() {
        // small eps_bar forces the minimizer onto the boundary
        let r = worst_eps_sym(1.0, 0.01).unwrap();
        assert!(r.at_boundary, "{r:?}");
        let r = worst_eps_sym(1.0, 1.0).unwrap();
        assert!(!r.at_boundary);
    }
}
