//! Approximate message passing for non-negative PCA, and the plain power
//! method used as the classical baseline.
//!
//! Symmetric model:
//!
//! ```text
//! v^{t+1} = X f(v^t) - b_t f(v^{t-1}),   f(x) = sqrt(n) x_+ / |x_+|
//! b_t     = |v^t_+|_0 / (sqrt(n) |v^t_+|)
//! ```
//!
//! Rectangular model, with `g(x) = sqrt(n) x / |x|`:
//!
//! ```text
//! u^t     = X f(v^t) - b_t g(u^{t-1})
//! v^{t+1} = X' g(u^t) - d_t f(v^t),      d_t = sqrt(n) / |u^t|
//! ```
//!
//! Both start from `v^0 = (1, ..., 1)` and take the memory term at `t = 0`
//! to be zero. The estimates `v_hat = v_+ / |v_+|` (and `u_hat = u / |u|`)
//! are feasible at every iteration.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{dot, norm, DenseMatrix};

/// Default tolerance on `|v_hat^t - v_hat^{t-1}|` for early stopping.
pub const DEFAULT_TOL: f64 = 1e-7;

/// Observables recorded at one iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmpRow {
    pub t: usize,
    /// `<v_hat, v0>` when the planted signal is known.
    pub overlap: Option<f64>,
    /// `<v_hat, X v_hat>` (symmetric) or `<u_hat, X v_hat>` (rectangular).
    pub rayleigh: f64,
    pub onsager_b: f64,
    pub onsager_d: Option<f64>,
    /// Fraction of strictly positive entries of `v^t`.
    pub pos_support_frac: f64,
    /// `|v_hat^t - v_hat^{t-1}|`; absent at `t = 0`.
    pub step: Option<f64>,
    /// `<u_hat, u0>` in the rectangular model.
    pub overlap_u: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct AmpTrace {
    pub rows: Vec<AmpRow>,
    /// Set when the run stopped on the tolerance rather than on `t_max`.
    pub converged: bool,
}

impl AmpTrace {
    pub fn last(&self) -> Option<&AmpRow> {
        self.rows.last()
    }
}

/// Stop once the last recorded step is within `tol` (only when `tol > 0`)
/// or the iteration budget is exhausted.
pub fn stopping_rule(trace: &AmpTrace, t_max: usize, tol: f64) -> bool {
    match trace.last() {
        None => false,
        Some(row) => row.t >= t_max || (tol > 0.0 && row.step.is_some_and(|s| s <= tol)),
    }
}

/// Positive part, normalized: returns `(v_+ / |v_+|, |v_+|, |v_+|_0)`.
fn project_positive(v: &[f64]) -> (Vec<f64>, f64, usize) {
    let mut out: Vec<f64> = v.iter().map(|&x| if x > 0.0 { x } else { 0.0 }).collect();
    let count = v.iter().filter(|&&x| x > 0.0).count();
    let nrm = norm(&out);
    if nrm > 0.0 {
        out.iter_mut().for_each(|x| *x /= nrm);
    }
    (out, nrm, count)
}

fn diff_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Iteration state of the symmetric recursion.
#[derive(Debug, Clone)]
pub struct AmpStateSym {
    pub n: usize,
    pub t: usize,
    pub v_curr: Vec<f64>,
    /// `f(v^{t-1})`, zero before the first update.
    pub f_prev: Vec<f64>,
}

impl AmpStateSym {
    pub fn new(n: usize) -> Self {
        AmpStateSym {
            n,
            t: 0,
            v_curr: vec![1.0; n],
            f_prev: vec![0.0; n],
        }
    }
}

#[derive(Debug, Clone)]
pub struct AmpResultSym {
    pub v_hat: Vec<f64>,
    /// Raw iterate `v^t` at the stopping iteration.
    pub v: Vec<f64>,
    pub trace: AmpTrace,
}

/// Runs the symmetric recursion for at most `t_max` updates and returns the
/// estimate at the stopping iteration. `tol = 0` disables early stopping.
pub fn amp_sym(
    x: &DenseMatrix,
    v0: Option<&[f64]>,
    t_max: usize,
    tol: f64,
) -> Result<AmpResultSym> {
    if !x.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let n = x.rows();
    if let Some(v0) = v0 {
        if v0.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: v0.len(),
            });
        }
    }
    let sn = (n as f64).sqrt();
    let mut state = AmpStateSym::new(n);
    let mut trace = AmpTrace::default();
    let mut prev_hat: Option<Vec<f64>> = None;
    let mut w = vec![0.0; n];
    loop {
        let t = state.t;
        let (v_hat, pos_norm, count) = project_positive(&state.v_curr);
        if pos_norm == 0.0 {
            return Err(Error::DeadIterate { t });
        }
        let f: Vec<f64> = v_hat.iter().map(|x| sn * x).collect();
        x.gemv(&f, &mut w);
        let b = count as f64 / (sn * pos_norm);
        let step = prev_hat.as_ref().map(|p| diff_norm(&v_hat, p));
        trace.rows.push(AmpRow {
            t,
            overlap: v0.map(|v0| dot(&v_hat, v0)),
            // <v_hat, X v_hat> = <v_hat, X f> / sqrt(n)
            rayleigh: dot(&v_hat, &w) / sn,
            onsager_b: b,
            onsager_d: None,
            pos_support_frac: count as f64 / n as f64,
            step,
            overlap_u: None,
        });
        if stopping_rule(&trace, t_max, tol) {
            trace.converged = t < t_max;
            return Ok(AmpResultSym {
                v_hat,
                v: state.v_curr,
                trace,
            });
        }
        for ((vi, wi), fp) in state.v_curr.iter_mut().zip(&w).zip(&state.f_prev) {
            *vi = wi - b * fp;
        }
        state.f_prev = f;
        state.t += 1;
        prev_hat = Some(v_hat);
    }
}

/// Iteration state of the rectangular recursion.
#[derive(Debug, Clone)]
pub struct AmpStateRec {
    pub t: usize,
    pub v_curr: Vec<f64>,
    /// `g(u^{t-1})`, zero before the first update.
    pub g_prev: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct AmpResultRec {
    pub u_hat: Vec<f64>,
    pub v_hat: Vec<f64>,
    /// Raw iterate `v^t` at the stopping iteration.
    pub v: Vec<f64>,
    pub trace: AmpTrace,
}

/// Runs the rectangular recursion on an `n x p` matrix.
pub fn amp_rec(
    x: &DenseMatrix,
    u0: Option<&[f64]>,
    v0: Option<&[f64]>,
    t_max: usize,
    tol: f64,
) -> Result<AmpResultRec> {
    let (n, p) = (x.rows(), x.cols());
    for (sig, dim) in [(u0, n), (v0, p)] {
        if let Some(s) = sig {
            if s.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: s.len(),
                });
            }
        }
    }
    let sn = (n as f64).sqrt();
    let mut state = AmpStateRec {
        t: 0,
        v_curr: vec![1.0; p],
        g_prev: vec![0.0; n],
    };
    let mut trace = AmpTrace::default();
    let mut prev_hat: Option<Vec<f64>> = None;
    let mut w = vec![0.0; n];
    let mut xt_g = vec![0.0; p];
    loop {
        let t = state.t;
        let (v_hat, pos_norm, count) = project_positive(&state.v_curr);
        if pos_norm == 0.0 {
            return Err(Error::DeadIterate { t });
        }
        let f: Vec<f64> = v_hat.iter().map(|x| sn * x).collect();
        x.gemv(&f, &mut w);
        let b = count as f64 / (sn * pos_norm);
        let u: Vec<f64> = w
            .iter()
            .zip(&state.g_prev)
            .map(|(wi, gp)| wi - b * gp)
            .collect();
        let u_norm = norm(&u);
        if u_norm == 0.0 {
            return Err(Error::ZeroUVector { t });
        }
        let u_hat: Vec<f64> = u.iter().map(|x| x / u_norm).collect();
        let d = sn / u_norm;
        let step = prev_hat.as_ref().map(|q| diff_norm(&v_hat, q));
        trace.rows.push(AmpRow {
            t,
            overlap: v0.map(|v0| dot(&v_hat, v0)),
            // <u_hat, X v_hat> = <u_hat, X f> / sqrt(n)
            rayleigh: dot(&u_hat, &w) / sn,
            onsager_b: b,
            onsager_d: Some(d),
            pos_support_frac: count as f64 / p as f64,
            step,
            overlap_u: u0.map(|u0| dot(&u_hat, u0)),
        });
        if stopping_rule(&trace, t_max, tol) {
            trace.converged = t < t_max;
            return Ok(AmpResultRec {
                u_hat,
                v_hat,
                v: state.v_curr,
                trace,
            });
        }
        let g: Vec<f64> = u_hat.iter().map(|x| sn * x).collect();
        x.gemv_t(&g, &mut xt_g);
        for ((vi, xg), fi) in state.v_curr.iter_mut().zip(&xt_g).zip(&f) {
            *vi = xg - d * fi;
        }
        state.g_prev = g;
        state.t += 1;
        prev_hat = Some(v_hat);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerResult {
    pub vector: Vec<f64>,
    pub eigenvalue: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Plain power iteration from the all-ones direction; stops when
/// consecutive unit iterates differ by at most `tol` or after `t_max`
/// products.
pub fn power_iteration(x: &DenseMatrix, t_max: usize, tol: f64) -> PowerResult {
    let n = x.rows();
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut w = vec![0.0; n];
    let mut eigenvalue = 0.0;
    for it in 1..=t_max {
        x.gemv(&v, &mut w);
        eigenvalue = dot(&v, &w);
        let wn = norm(&w);
        if wn == 0.0 {
            return PowerResult {
                vector: v,
                eigenvalue: 0.0,
                iterations: it,
                converged: true,
            };
        }
        w.iter_mut().for_each(|x| *x /= wn);
        let step = diff_norm(&v, &w);
        std::mem::swap(&mut v, &mut w);
        if step <= tol {
            return PowerResult {
                vector: v,
                eigenvalue,
                iterations: it,
                converged: true,
            };
        }
    }
    PowerResult {
        vector: v,
        eigenvalue,
        iterations: t_max,
        converged: false,
    }
}
