//! Fixed points of the state-evolution maps, the one- and two-time
//! recursions, and the classical spectral baselines.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::measures::DiscreteMeasure;
use crate::quadrature::{legendre_composite, normal_rule};
use crate::scalar::{
    dee, eff, positive_part_mean, rayleigh_rec, rayleigh_sym, std_normal_cdf, std_normal_pdf,
};

const BISECT_MAX_ITER: usize = 200;
const BISECT_WIDTH: f64 = 1e-14;
const BRACKET_LO: f64 = 1e-30;

/// Default number of state-evolution steps.
pub const DEFAULT_SE_STEPS: usize = 100;

/// Predictions for the symmetric (Wigner) model.
#[derive(Debug, Clone, PartialEq)]
pub struct SePredictionSym {
    pub beta: f64,
    /// `tau_1, ..., tau_{t_max}`.
    pub tau_seq: Vec<f64>,
    pub t_star: f64,
    pub overlap: f64,
    pub lambda_plus: f64,
}

/// Predictions for the rectangular model.
#[derive(Debug, Clone, PartialEq)]
pub struct SePredictionRec {
    pub beta: f64,
    pub alpha: f64,
    /// `mu_0, ..., mu_{t_max}`.
    pub mu_seq: Vec<f64>,
    /// `theta_1, ..., theta_{t_max}`.
    pub theta_seq: Vec<f64>,
    pub s_star: f64,
    pub overlap_v: f64,
    pub overlap_u: f64,
    pub sigma_plus: f64,
}

/// Correlations `Q_{t,t+1}` between consecutive iterates.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoTimeTrace {
    pub q_seq: Vec<f64>,
    pub taus: Vec<f64>,
}

fn check_beta(beta: f64) -> Result<()> {
    if beta < 0.0 || !beta.is_finite() {
        return Err(Error::BetaNonPositive(beta));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::AlphaNonPositive(alpha));
    }
    Ok(())
}

/// Root of an increasing-through-zero function on `[lo, hi]`, assuming
/// `h(lo) < 0 <= h(hi)`.
fn bisect<H: Fn(f64) -> f64>(h: H, mut lo: f64, mut hi: f64) -> f64 {
    if h(hi) == 0.0 {
        return hi;
    }
    for _ in 0..BISECT_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= BISECT_WIDTH || mid <= lo || mid >= hi {
            break;
        }
        let v = h(mid);
        if v == 0.0 {
            return mid;
        }
        if v < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // the endpoint with the smaller residual
    if h(lo).abs() <= h(hi).abs() {
        lo
    } else {
        hi
    }
}

/// `T_V(beta)`: the unique non-negative solution of `x = beta F_V(x)`.
/// Returns 0 for `beta = 0`.
pub fn solve_t(m: &DiscreteMeasure, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    if beta == 0.0 {
        return Ok(0.0);
    }
    if m.mean() <= 0.0 {
        return Err(Error::NoPositiveMean);
    }
    Ok(bisect(|x| x - beta * eff(m, x), BRACKET_LO, beta))
}

/// `S_V(beta, alpha)`: the unique non-negative solution of
/// `x sqrt(1 + beta F(x/sqrt(alpha))^2) = beta F(x/sqrt(alpha))`.
/// Returns 0 for `beta = 0`.
pub fn solve_s(m: &DiscreteMeasure, beta: f64, alpha: f64) -> Result<f64> {
    check_beta(beta)?;
    check_alpha(alpha)?;
    if beta == 0.0 {
        return Ok(0.0);
    }
    if m.mean() <= 0.0 {
        return Err(Error::NoPositiveMean);
    }
    let sa = alpha.sqrt();
    let h = |x: f64| {
        let f = eff(m, x / sa);
        x * (1.0 + beta * f * f).sqrt() - beta * f
    };
    Ok(bisect(h, BRACKET_LO, beta.sqrt()))
}

/// Symmetric state evolution `tau_1 = beta E V`, `tau_{t+1} = beta F(tau_t)`
/// together with its limit and the predicted overlap and Rayleigh value.
pub fn se_sym(m: &DiscreteMeasure, beta: f64, t_max: usize) -> Result<SePredictionSym> {
    if t_max < 1 {
        return Err(Error::InvalidParameter {
            name: "t_max",
            value: t_max as f64,
        });
    }
    let t_star = solve_t(m, beta)?;
    let mut tau_seq = Vec::with_capacity(t_max);
    let mut tau = beta * m.mean();
    tau_seq.push(tau);
    for _ in 1..t_max {
        tau = beta * eff(m, tau);
        tau_seq.push(tau);
    }
    let overlap = if beta == 0.0 { 0.0 } else { eff(m, t_star) };
    Ok(SePredictionSym {
        beta,
        tau_seq,
        t_star,
        overlap,
        lambda_plus: rayleigh_sym(m, beta, t_star),
    })
}

/// Rectangular state evolution: `mu_0 = sqrt(beta) E V`,
/// `theta_{t+1} = sqrt(beta) mu_t / sqrt(1 + mu_t^2)` and
/// `mu_t = sqrt(beta) F(theta_t / sqrt(alpha))`.
pub fn se_rec(m: &DiscreteMeasure, beta: f64, alpha: f64, t_max: usize) -> Result<SePredictionRec> {
    if t_max < 1 {
        return Err(Error::InvalidParameter {
            name: "t_max",
            value: t_max as f64,
        });
    }
    let s_star = solve_s(m, beta, alpha)?;
    let sb = beta.sqrt();
    let sa = alpha.sqrt();
    let mut mu = sb * m.mean();
    let mut mu_seq = vec![mu];
    let mut theta_seq = Vec::with_capacity(t_max);
    for _ in 0..t_max {
        let theta = sb * mu / (1.0 + mu * mu).sqrt();
        mu = sb * eff(m, theta / sa);
        theta_seq.push(theta);
        mu_seq.push(mu);
    }
    let (overlap_v, overlap_u) = if beta == 0.0 {
        (0.0, 0.0)
    } else {
        let mu_star = sb * eff(m, s_star / sa);
        (
            eff(m, s_star / sa),
            mu_star / (1.0 + mu_star * mu_star).sqrt(),
        )
    };
    Ok(SePredictionRec {
        beta,
        alpha,
        mu_seq,
        theta_seq,
        s_star,
        overlap_v,
        overlap_u,
        sigma_plus: rayleigh_rec(m, beta, alpha, s_star),
    })
}

/// Top eigenvalue and eigenvector overlap of `beta v v' + W` for GOE noise.
pub fn classical_pca_sym(beta: f64) -> (f64, f64) {
    if beta <= 1.0 {
        (2.0, 0.0)
    } else {
        (beta + 1.0 / beta, (1.0 - 1.0 / (beta * beta)).sqrt())
    }
}

/// Overlap of the top right singular vector with `v` in the rectangular
/// model with aspect ratio `alpha = p/n`.
pub fn classical_pca_rec(beta: f64, alpha: f64) -> f64 {
    if beta <= alpha.sqrt() {
        0.0
    } else {
        let r = alpha / (beta * beta);
        ((1.0 - r) / (1.0 + alpha / beta)).sqrt()
    }
}

/// `E (a + G1)_+ (b + G2)_+` for standard normals with correlation `q`.
///
/// Integrates `d/dq E = P(G1 > -a, G2 > -b)` from 0 to `q` and uses
/// Plackett's identity for the bivariate normal CDF; the remaining angular
/// integral is smooth and handled by composite Gauss–Legendre.
pub fn relu_cross_moment(a: f64, b: f64, q: f64) -> f64 {
    if q >= 1.0 {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        return (a * b + 1.0) * std_normal_cdf(a) + b * std_normal_pdf(a);
    }
    let base = positive_part_mean(a) * positive_part_mean(b);
    if q == 0.0 {
        return base;
    }
    let d2 = (a - b) * (a - b);
    let ab = a * b;
    let integral = legendre_composite(0.0, q.asin(), 8, |theta| {
        let (s, c) = theta.sin_cos();
        (q - s) * (-(d2 / (2.0 * c * c) + ab / (1.0 + s))).exp()
    });
    base + q * std_normal_cdf(a) * std_normal_cdf(b) + integral / (2.0 * std::f64::consts::PI)
}

fn check_h_args(q: f64, tau1: f64, tau2: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::QOutOfRange(q));
    }
    for (name, t) in [("tau1", tau1), ("tau2", tau2)] {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidParameter { name, value: t });
        }
    }
    Ok(())
}

/// `H_V(q; tau1, tau2)`: correlation-like functional
/// `E{(tau1 V + G1)_+ (tau2 V + G2)_+} / sqrt(D(tau1) D(tau2))` with
/// `corr(G1, G2) = q`.
pub fn h_two_time(m: &DiscreteMeasure, q: f64, tau1: f64, tau2: f64) -> Result<f64> {
    check_h_args(q, tau1, tau2)?;
    let num: f64 = m
        .atoms()
        .iter()
        .map(|at| at.weight * relu_cross_moment(tau1 * at.value, tau2 * at.value, q))
        .sum();
    Ok(num / (dee(m, tau1) * dee(m, tau2)).sqrt())
}

fn h_numerator_hermite(m: &DiscreteMeasure, q: f64, tau1: f64, tau2: f64, order: usize) -> f64 {
    let rule = normal_rule(order);
    let sq = q.sqrt();
    let s = (1.0 - q).sqrt();
    let inner = |c: f64| s * positive_part_mean(c / s);
    m.atoms()
        .iter()
        .map(|at| {
            let (a, b) = (tau1 * at.value, tau2 * at.value);
            at.weight * rule.expect(|z| inner(a + sq * z) * inner(b + sq * z))
        })
        .sum()
}

/// [`h_two_time`] computed instead by conditioning on the common Gaussian
/// component and integrating it with Gauss–Hermite quadrature (order 61,
/// raised to 121 when orders 61 and 81 disagree by more than `1e-9`).
///
/// Accurate for moderate `q`; the integrand develops a kink as `q -> 1`
/// and the error there grows to about `1e-4`.
pub fn h_two_time_hermite(m: &DiscreteMeasure, q: f64, tau1: f64, tau2: f64) -> Result<f64> {
    check_h_args(q, tau1, tau2)?;
    if q == 1.0 {
        return h_two_time(m, q, tau1, tau2);
    }
    let n61 = h_numerator_hermite(m, q, tau1, tau2, 61);
    let n81 = h_numerator_hermite(m, q, tau1, tau2, 81);
    let num = if (n61 - n81).abs() > 1e-9 {
        h_numerator_hermite(m, q, tau1, tau2, 121)
    } else {
        n61
    };
    Ok(num / (dee(m, tau1) * dee(m, tau2)).sqrt())
}

/// Two-time state evolution along the first off-diagonal,
/// `Q_{t+1,t+2} = H(Q_{t,t+1}; tau_t, tau_{t+1})`, seeded with
/// `Q_{1,2} = E(tau_1 V + G)_+ / sqrt(D(tau_1))`.
pub fn two_time_seq(m: &DiscreteMeasure, beta: f64, t_max: usize) -> Result<TwoTimeTrace> {
    if t_max < 2 {
        return Err(Error::InvalidParameter {
            name: "t_max",
            value: t_max as f64,
        });
    }
    check_beta(beta)?;
    let mut taus = Vec::with_capacity(t_max);
    let mut tau = beta * m.mean();
    taus.push(tau);
    for _ in 1..t_max {
        tau = beta * eff(m, tau);
        taus.push(tau);
    }
    let t1 = taus[0];
    let first: f64 = m
        .atoms()
        .iter()
        .map(|a| a.weight * positive_part_mean(t1 * a.value))
        .sum::<f64>()
        / dee(m, t1).sqrt();
    let mut q_seq = Vec::with_capacity(t_max - 1);
    q_seq.push(first.clamp(0.0, 1.0));
    for t in 0..t_max - 2 {
        let q = h_two_time(m, q_seq[t], taus[t], taus[t + 1])?;
        q_seq.push(q.clamp(0.0, 1.0));
    }
    Ok(TwoTimeTrace { q_seq, taus })
}

/// Symmetric threshold below which no prior gives a positive overlap in
/// the sparse limit.
pub const SYM_THRESHOLD: f64 = FRAC_1_SQRT_2;
