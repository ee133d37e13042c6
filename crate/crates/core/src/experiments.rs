//! Experiment harness behind the `nnpca` binary: prediction curves, Monte
//! Carlo simulations, `(beta, eps)` sweeps and worst-case reports.
//!
//! Settings arrive as `key=value` pairs (from a config file and/or command
//! line flags) and are validated into an [`ExperimentConfig`]. Every command
//! is a pure function of its config; replicates run on the current rayon
//! pool and rows are emitted in (grid point, replicate) order.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::amp::{amp_rec, amp_sym};
use crate::error::{Error, Result};
use crate::fixed_point::{classical_pca_rec, classical_pca_sym, se_rec, se_sym};
use crate::linalg::{dot, lanczos_top};
use crate::measures::DiscreteMeasure;
use crate::scalar::{overlap_rec0, overlap_sym0, rayleigh_rec0, rayleigh_sym0};
use crate::spiked::{
    constant_unit, gen_rec, gen_sym, random_start, signal_from_measure, two_point_signal,
    uniform_sphere,
};
use crate::worst_case::{worst_eps_rec, worst_eps_sym, WorstCaseReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Predict,
    Simulate,
    Sweep,
    Worstcase,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Predict => "predict",
            Command::Simulate => "simulate",
            Command::Sweep => "sweep",
            Command::Worstcase => "worstcase",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Sym,
    Rec,
}

impl Model {
    fn name(self) -> &'static str {
        match self {
            Model::Sym => "sym",
            Model::Rec => "rec",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Signal prior: a two-point mixture given by its sparsity, or an explicit
/// discrete measure rescaled to unit second moment.
#[derive(Debug, Clone, PartialEq)]
pub enum Prior {
    Eps(f64),
    Measure(DiscreteMeasure),
}

impl Prior {
    pub fn measure(&self) -> Result<DiscreteMeasure> {
        match self {
            Prior::Eps(e) => DiscreteMeasure::two_point(*e),
            Prior::Measure(m) => Ok(m.clone()),
        }
    }

    pub fn sparsity(&self) -> f64 {
        match self {
            Prior::Eps(e) => *e,
            Prior::Measure(m) => m.sparsity(),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Prior::Eps(e) => format!("two_point({e})"),
            Prior::Measure(m) => m.to_string(),
        }
    }

    /// Planted signal of dimension `dim`: the deterministic two-point vector
    /// for [`Prior::Eps`], i.i.d. draws otherwise.
    pub fn signal(&self, dim: usize, seed: u64) -> Result<Vec<f64>> {
        match self {
            Prior::Eps(e) => two_point_signal(dim, *e),
            Prior::Measure(m) => Ok(signal_from_measure(dim, m, seed)?.v),
        }
    }
}

/// Validated settings shared by all commands.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub model: Model,
    pub n: usize,
    pub p: usize,
    pub betas: Vec<f64>,
    pub priors: Vec<Prior>,
    pub eps_bar: f64,
    pub t_max: usize,
    /// Early-stopping tolerance for AMP; 0 runs exactly `t_max` updates.
    pub tol: f64,
    pub replicates: usize,
    pub seed: u64,
    pub lanczos_steps: usize,
    pub u0_constant: bool,
    pub no_timestamp: bool,
    pub format: Format,
    pub threads: Option<usize>,
    pub out: Option<String>,
}

/// Keys accepted in config files and as `--key` flags.
pub const CONFIG_KEYS: &[&str] = &[
    "model",
    "prior",
    "eps",
    "beta",
    "beta-grid",
    "alpha",
    "n",
    "p",
    "eps-bar",
    "t-max",
    "tol",
    "replicates",
    "seed",
    "lanczos-steps",
    "u0",
    "no-timestamp",
    "format",
    "threads",
    "out",
];

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Parses `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| config_err(format!("line {}: expected key=value", lineno + 1)))?;
        let k = k.trim().trim_start_matches("--").replace('_', "-");
        if !CONFIG_KEYS.contains(&k.as_str()) {
            return Err(config_err(format!(
                "line {}: unknown key {k:?}",
                lineno + 1
            )));
        }
        map.insert(k, v.trim().to_string());
    }
    Ok(map)
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| config_err(format!("invalid value for {key}: {v:?}")))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(key, s))
        .collect()
}

/// Expands `a:b:step` into `a, a + step, ...` up to `b` inclusive (with a
/// relative slack of `1e-9` steps).
pub fn parse_grid(v: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = v.split(':').collect();
    if parts.len() != 3 {
        return Err(config_err(format!("grid must be a:b:step, got {v:?}")));
    }
    let a: f64 = parse_num("beta-grid", parts[0])?;
    let b: f64 = parse_num("beta-grid", parts[1])?;
    let step: f64 = parse_num("beta-grid", parts[2])?;
    if !(step > 0.0) || !(b >= a) || !a.is_finite() || !b.is_finite() {
        return Err(config_err(format!("invalid grid {v:?}")));
    }
    let count = ((b - a) / step + 1e-9).floor() as usize;
    // k * step rather than repeated addition keeps grid points clean
    Ok((0..=count).map(|k| a + k as f64 * step).collect())
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim() {
        "" | "1" | "true" | "yes" => Ok(true),
        "0" | "false" | "no" => Ok(false),
        _ => Err(config_err(format!("invalid boolean for {key}: {v:?}"))),
    }
}

impl ExperimentConfig {
    /// Builds and validates a config from merged settings.
    pub fn from_settings(command: Command, s: &BTreeMap<String, String>) -> Result<Self> {
        for k in s.keys() {
            if !CONFIG_KEYS.contains(&k.as_str()) {
                return Err(config_err(format!("unknown setting {k:?}")));
            }
        }
        let get = |k: &str| s.get(k).map(String::as_str);

        let model = match get("model") {
            Some("sym") => Model::Sym,
            Some("rec") => Model::Rec,
            Some(other) => return Err(config_err(format!("unknown model {other:?}"))),
            None if get("alpha").is_some() || get("p").is_some() => Model::Rec,
            None => Model::Sym,
        };

        let n: usize = get("n")
            .map(|v| parse_num("n", v))
            .transpose()?
            .unwrap_or(2000);
        let alpha: Option<f64> = get("alpha").map(|v| parse_num("alpha", v)).transpose()?;
        if let Some(a) = alpha {
            if !(a > 0.0) || !a.is_finite() {
                return Err(Error::AlphaNonPositive(a));
            }
        }
        let p: usize = match (get("p"), alpha) {
            (Some(v), _) => parse_num("p", v)?,
            (None, Some(a)) => ((a * n as f64).round() as usize).max(1),
            (None, None) => (n / 2).max(1),
        };

        let betas = match (get("beta"), get("beta-grid")) {
            (Some(_), Some(_)) => {
                return Err(config_err("give either beta or beta-grid, not both"));
            }
            (Some(v), None) => parse_list("beta", v)?,
            (None, Some(v)) => parse_grid(v)?,
            (None, None) => parse_grid("0.05:1.5:0.05")?,
        };

        let priors = match (get("prior"), get("eps")) {
            (Some(_), Some(_)) => return Err(config_err("give either prior or eps, not both")),
            (Some(v), None) => {
                let m: DiscreteMeasure = v.parse()?;
                vec![Prior::Measure(m.to_unit_second_moment()?)]
            }
            (None, Some(v)) => parse_list("eps", v)?.into_iter().map(Prior::Eps).collect(),
            (None, None) => vec![Prior::Eps(0.1)],
        };

        let format = match get("format") {
            Some("csv") => Format::Csv,
            Some("json") => Format::Json,
            Some(other) => return Err(config_err(format!("unknown format {other:?}"))),
            None if command == Command::Worstcase => Format::Json,
            None => Format::Csv,
        };

        let u0_constant = match get("u0") {
            None | Some("sphere") => false,
            Some("constant") => true,
            Some(other) => return Err(config_err(format!("unknown u0 {other:?}"))),
        };

        let cfg = ExperimentConfig {
            command,
            model,
            n,
            p,
            betas,
            priors,
            eps_bar: get("eps-bar")
                .map(|v| parse_num("eps-bar", v))
                .transpose()?
                .unwrap_or(1.0),
            t_max: get("t-max")
                .map(|v| parse_num("t-max", v))
                .transpose()?
                .unwrap_or(50),
            tol: get("tol")
                .map(|v| parse_num("tol", v))
                .transpose()?
                .unwrap_or(0.0),
            replicates: get("replicates")
                .map(|v| parse_num("replicates", v))
                .transpose()?
                .unwrap_or(20),
            seed: get("seed")
                .map(|v| parse_num("seed", v))
                .transpose()?
                .unwrap_or(0),
            lanczos_steps: get("lanczos-steps")
                .map(|v| parse_num("lanczos-steps", v))
                .transpose()?
                .unwrap_or(150),
            u0_constant,
            no_timestamp: get("no-timestamp")
                .map(|v| parse_bool("no-timestamp", v))
                .transpose()?
                .unwrap_or(false),
            format,
            threads: get("threads")
                .map(|v| parse_num("threads", v))
                .transpose()?,
            out: get("out").map(str::to_string),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn alpha(&self) -> f64 {
        self.p as f64 / self.n as f64
    }

    fn validate(&self) -> Result<()> {
        if self.betas.is_empty() {
            return Err(config_err("beta grid is empty"));
        }
        if self.priors.is_empty() {
            return Err(config_err("eps list is empty"));
        }
        for &b in &self.betas {
            if !(b >= 0.0) || !b.is_finite() {
                return Err(Error::BetaNonPositive(b));
            }
            if self.command == Command::Worstcase && b == 0.0 {
                return Err(Error::BetaNonPositive(b));
            }
        }
        for prior in &self.priors {
            if let Prior::Eps(e) = prior {
                if !(*e > 0.0 && *e <= 1.0) {
                    return Err(Error::EpsOutOfRange(*e));
                }
            }
        }
        if !(self.eps_bar > 0.0 && self.eps_bar <= 1.0) {
            return Err(Error::EpsOutOfRange(self.eps_bar));
        }
        if self.n < 10 {
            return Err(config_err(format!("n must be at least 10, got {}", self.n)));
        }
        if self.p < 1 {
            return Err(config_err("p must be positive"));
        }
        if self.replicates < 1 {
            return Err(config_err("replicates must be at least 1"));
        }
        if self.t_max < 1 {
            return Err(config_err("t-max must be at least 1"));
        }
        if !(self.tol >= 0.0) {
            return Err(config_err("tol must be non-negative"));
        }
        if self.lanczos_steps < 1 {
            return Err(config_err("lanczos-steps must be at least 1"));
        }
        if self.threads == Some(0) {
            return Err(config_err("threads must be at least 1"));
        }
        Ok(())
    }

    /// Number of signal dimensions that carry the planted vector `v0`.
    fn signal_dim(&self) -> usize {
        match self.model {
            Model::Sym => self.n,
            Model::Rec => self.p,
        }
    }
}

// ---------------------------------------------------------------------------
// rows

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictRow {
    pub model: Model,
    pub beta: f64,
    pub alpha: Option<f64>,
    pub eps: f64,
    pub prior: String,
    /// `T_V(beta)` or `S_V(beta, alpha)`.
    pub fixed_point: f64,
    pub overlap: f64,
    pub overlap_u: Option<f64>,
    pub rayleigh: f64,
    pub classical_eigenvalue: Option<f64>,
    pub classical_overlap: f64,
    pub limit_overlap: f64,
    pub limit_rayleigh: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub model: Model,
    pub n: usize,
    pub p: Option<usize>,
    pub beta: f64,
    pub eps: f64,
    pub prior: String,
    pub seed: u64,
    pub t_used: usize,
    pub status: String,
    pub overlap_emp: Option<f64>,
    pub overlap_pred: f64,
    pub rayleigh_emp: Option<f64>,
    pub rayleigh_pred: f64,
    pub overlap_u_emp: Option<f64>,
    pub overlap_u_pred: Option<f64>,
    pub overlap_classical_emp: Option<f64>,
    pub overlap_classical_pred: f64,
    pub wall_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub model: Model,
    pub n: usize,
    pub p: Option<usize>,
    pub beta: f64,
    pub eps: f64,
    pub prior: String,
    pub replicates: usize,
    pub failed: usize,
    pub overlap_emp_mean: Option<f64>,
    pub overlap_emp_sd: Option<f64>,
    pub overlap_pred: f64,
    pub rayleigh_emp_mean: Option<f64>,
    pub rayleigh_emp_sd: Option<f64>,
    pub rayleigh_pred: f64,
    pub overlap_classical_emp_mean: Option<f64>,
    pub overlap_classical_emp_sd: Option<f64>,
    pub overlap_classical_pred: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    pub model: Model,
    pub n: usize,
    pub p: Option<usize>,
    pub beta: f64,
    pub eps: f64,
    pub prior: String,
    pub replicates: usize,
    pub failed: usize,
    pub overlap_emp_mean: Option<f64>,
    pub overlap_pred: f64,
    pub diff: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub cells: usize,
    pub diff_mean: Option<f64>,
    pub diff_sd: Option<f64>,
}

/// Mean and sample standard deviation (`n - 1` denominator).
pub fn mean_sd(xs: &[f64]) -> (Option<f64>, Option<f64>) {
    if xs.is_empty() {
        return (None, None);
    }
    let k = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / k;
    if xs.len() < 2 {
        return (Some(mean), None);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (k - 1.0);
    (Some(mean), Some(var.sqrt()))
}

// ---------------------------------------------------------------------------
// predictions

struct Prediction {
    fixed_point: f64,
    overlap: f64,
    overlap_u: Option<f64>,
    rayleigh: f64,
    classical_eigenvalue: Option<f64>,
    classical_overlap: f64,
    limit_overlap: f64,
    limit_rayleigh: f64,
}

fn predict_one(model: Model, m: &DiscreteMeasure, beta: f64, alpha: f64) -> Result<Prediction> {
    match model {
        Model::Sym => {
            let p = se_sym(m, beta, 1)?;
            let (eig, ov) = classical_pca_sym(beta);
            Ok(Prediction {
                fixed_point: p.t_star,
                overlap: p.overlap,
                overlap_u: None,
                rayleigh: p.lambda_plus,
                classical_eigenvalue: Some(eig),
                classical_overlap: ov,
                limit_overlap: overlap_sym0(beta),
                limit_rayleigh: rayleigh_sym0(beta),
            })
        }
        Model::Rec => {
            let p = se_rec(m, beta, alpha, 1)?;
            Ok(Prediction {
                fixed_point: p.s_star,
                overlap: p.overlap_v,
                overlap_u: Some(p.overlap_u),
                rayleigh: p.sigma_plus,
                classical_eigenvalue: None,
                classical_overlap: classical_pca_rec(beta, alpha),
                limit_overlap: overlap_rec0(beta, alpha),
                limit_rayleigh: rayleigh_rec0(beta, alpha),
            })
        }
    }
}

pub fn cmd_predict(cfg: &ExperimentConfig) -> Result<Vec<PredictRow>> {
    let alpha = cfg.alpha();
    let mut rows = Vec::new();
    for prior in &cfg.priors {
        let m = prior.measure()?;
        for &beta in &cfg.betas {
            let pr = predict_one(cfg.model, &m, beta, alpha)?;
            rows.push(PredictRow {
                model: cfg.model,
                beta,
                alpha: (cfg.model == Model::Rec).then_some(alpha),
                eps: prior.sparsity(),
                prior: prior.label(),
                fixed_point: pr.fixed_point,
                overlap: pr.overlap,
                overlap_u: pr.overlap_u,
                rayleigh: pr.rayleigh,
                classical_eigenvalue: pr.classical_eigenvalue,
                classical_overlap: pr.classical_overlap,
                limit_overlap: pr.limit_overlap,
                limit_rayleigh: pr.limit_rayleigh,
            });
        }
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// simulations

/// Empirical observables of one replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateOutcome {
    pub t_used: usize,
    pub status: &'static str,
    pub overlap: Option<f64>,
    pub rayleigh: Option<f64>,
    pub overlap_u: Option<f64>,
    pub overlap_classical: Option<f64>,
}

fn failed_status(e: &Error) -> Option<&'static str> {
    match e {
        Error::DeadIterate { .. } => Some("dead_iterate"),
        Error::ZeroUVector { .. } => Some("zero_u"),
        _ => None,
    }
}

/// Generates one instance and runs AMP plus the Lanczos spectral baseline.
pub fn run_replicate(
    cfg: &ExperimentConfig,
    beta: f64,
    prior: &Prior,
    seed: u64,
) -> Result<ReplicateOutcome> {
    let v0 = prior.signal(cfg.signal_dim(), seed)?;
    match cfg.model {
        Model::Sym => {
            let inst = gen_sym(cfg.n, beta, &v0, seed)?;
            let classical = {
                let start = random_start(cfg.n, seed);
                let (_, v1) = lanczos_top(|x, y| inst.x.gemv(x, y), &start, cfg.lanczos_steps);
                dot(&v1, &v0).abs()
            };
            match amp_sym(&inst.x, Some(&v0), cfg.t_max, cfg.tol) {
                Ok(r) => {
                    let last = r.trace.last().expect("trace has at least one row");
                    Ok(ReplicateOutcome {
                        t_used: last.t,
                        status: "ok",
                        overlap: last.overlap,
                        rayleigh: Some(last.rayleigh),
                        overlap_u: None,
                        overlap_classical: Some(classical),
                    })
                }
                Err(e) => match failed_status(&e) {
                    Some(status) => Ok(ReplicateOutcome {
                        t_used: match e {
                            Error::DeadIterate { t } => t,
                            _ => 0,
                        },
                        status,
                        overlap: None,
                        rayleigh: None,
                        overlap_u: None,
                        overlap_classical: Some(classical),
                    }),
                    None => Err(e),
                },
            }
        }
        Model::Rec => {
            let u0 = if cfg.u0_constant {
                constant_unit(cfg.n)
            } else {
                uniform_sphere(cfg.n, seed)
            };
            let inst = gen_rec(cfg.n, cfg.p, beta, &u0, &v0, seed)?;
            let classical = {
                let start = random_start(cfg.p, seed);
                let mut tmp = vec![0.0; cfg.n];
                let (_, v1) = lanczos_top(
                    |x, y| {
                        inst.x.gemv(x, &mut tmp);
                        inst.x.gemv_t(&tmp, y);
                    },
                    &start,
                    cfg.lanczos_steps,
                );
                dot(&v1, &v0).abs()
            };
            match amp_rec(&inst.x, Some(&u0), Some(&v0), cfg.t_max, cfg.tol) {
                Ok(r) => {
                    let last = r.trace.last().expect("trace has at least one row");
                    Ok(ReplicateOutcome {
                        t_used: last.t,
                        status: "ok",
                        overlap: last.overlap,
                        rayleigh: Some(last.rayleigh),
                        overlap_u: last.overlap_u,
                        overlap_classical: Some(classical),
                    })
                }
                Err(e) => match failed_status(&e) {
                    Some(status) => Ok(ReplicateOutcome {
                        t_used: match e {
                            Error::DeadIterate { t } | Error::ZeroUVector { t } => t,
                            _ => 0,
                        },
                        status,
                        overlap: None,
                        rayleigh: None,
                        overlap_u: None,
                        overlap_classical: Some(classical),
                    }),
                    None => Err(e),
                },
            }
        }
    }
}

/// Grid points in output order: priors outermost, then betas.
fn grid(cfg: &ExperimentConfig) -> Vec<(usize, f64)> {
    (0..cfg.priors.len())
        .flat_map(|i| cfg.betas.iter().map(move |&b| (i, b)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationOutput {
    pub rows: Vec<ExperimentRow>,
    pub summary: Vec<SummaryRow>,
}

pub fn cmd_simulate(cfg: &ExperimentConfig) -> Result<SimulationOutput> {
    let alpha = cfg.alpha();
    let p_field = (cfg.model == Model::Rec).then_some(cfg.p);
    let points = grid(cfg);
    let measures: Vec<DiscreteMeasure> = cfg
        .priors
        .iter()
        .map(Prior::measure)
        .collect::<Result<_>>()?;
    let preds: Vec<Prediction> = points
        .iter()
        .map(|&(i, b)| predict_one(cfg.model, &measures[i], b, alpha))
        .collect::<Result<_>>()?;

    let jobs: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|g| (0..cfg.replicates).map(move |r| (g, r)))
        .collect();
    let outcomes: Vec<(ReplicateOutcome, f64)> = jobs
        .par_iter()
        .map(|&(g, r)| {
            let (i, beta) = points[g];
            let start = Instant::now();
            let out = run_replicate(cfg, beta, &cfg.priors[i], cfg.seed.wrapping_add(r as u64))?;
            Ok((out, start.elapsed().as_secs_f64() * 1e3))
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(jobs.len());
    for (&(g, r), (out, ms)) in jobs.iter().zip(&outcomes) {
        let (i, beta) = points[g];
        let pr = &preds[g];
        rows.push(ExperimentRow {
            model: cfg.model,
            n: cfg.n,
            p: p_field,
            beta,
            eps: cfg.priors[i].sparsity(),
            prior: cfg.priors[i].label(),
            seed: cfg.seed.wrapping_add(r as u64),
            t_used: out.t_used,
            status: out.status.to_string(),
            overlap_emp: out.overlap,
            overlap_pred: pr.overlap,
            rayleigh_emp: out.rayleigh,
            rayleigh_pred: pr.rayleigh,
            overlap_u_emp: out.overlap_u,
            overlap_u_pred: pr.overlap_u,
            overlap_classical_emp: out.overlap_classical,
            overlap_classical_pred: pr.classical_overlap,
            wall_ms: (!cfg.no_timestamp).then_some(*ms),
        });
    }

    let summary = rows
        .chunks(cfg.replicates)
        .map(|chunk| {
            let first = &chunk[0];
            let ok: Vec<&ExperimentRow> = chunk.iter().filter(|r| r.status == "ok").collect();
            let col = |f: fn(&ExperimentRow) -> Option<f64>| -> Vec<f64> {
                ok.iter().filter_map(|r| f(r)).collect()
            };
            let (om, osd) = mean_sd(&col(|r| r.overlap_emp));
            let (rm, rsd) = mean_sd(&col(|r| r.rayleigh_emp));
            let (cm, csd) = mean_sd(
                &chunk
                    .iter()
                    .filter_map(|r| r.overlap_classical_emp)
                    .collect::<Vec<_>>(),
            );
            SummaryRow {
                model: first.model,
                n: first.n,
                p: first.p,
                beta: first.beta,
                eps: first.eps,
                prior: first.prior.clone(),
                replicates: chunk.len(),
                failed: chunk.len() - ok.len(),
                overlap_emp_mean: om,
                overlap_emp_sd: osd,
                overlap_pred: first.overlap_pred,
                rayleigh_emp_mean: rm,
                rayleigh_emp_sd: rsd,
                rayleigh_pred: first.rayleigh_pred,
                overlap_classical_emp_mean: cm,
                overlap_classical_emp_sd: csd,
                overlap_classical_pred: first.overlap_classical_pred,
            }
        })
        .collect();
    Ok(SimulationOutput { rows, summary })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepOutput {
    pub cells: Vec<SweepCell>,
    pub summary: SweepSummary,
}

/// Empirical minus predicted overlap over the `(beta, eps)` grid.
pub fn cmd_sweep(cfg: &ExperimentConfig) -> Result<SweepOutput> {
    let sim = cmd_simulate(cfg)?;
    let cells: Vec<SweepCell> = sim
        .summary
        .iter()
        .map(|s| SweepCell {
            model: s.model,
            n: s.n,
            p: s.p,
            beta: s.beta,
            eps: s.eps,
            prior: s.prior.clone(),
            replicates: s.replicates,
            failed: s.failed,
            overlap_emp_mean: s.overlap_emp_mean,
            overlap_pred: s.overlap_pred,
            diff: s.overlap_emp_mean.map(|m| m - s.overlap_pred),
        })
        .collect();
    let diffs: Vec<f64> = cells.iter().filter_map(|c| c.diff).collect();
    let (diff_mean, diff_sd) = mean_sd(&diffs);
    Ok(SweepOutput {
        summary: SweepSummary {
            cells: cells.len(),
            diff_mean,
            diff_sd,
        },
        cells,
    })
}

pub fn cmd_worstcase(cfg: &ExperimentConfig) -> Result<Vec<WorstCaseReport>> {
    cfg.betas
        .iter()
        .map(|&b| match cfg.model {
            Model::Sym => worst_eps_sym(b, cfg.eps_bar),
            Model::Rec => worst_eps_rec(b, cfg.alpha(), cfg.eps_bar),
        })
        .collect()
}

// ---------------------------------------------------------------------------
// rendering

/// Reals are written with 17 significant digits; missing values are empty.
fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_real(x: Option<f64>) -> String {
    x.map(real).unwrap_or_default()
}

fn opt_int(x: Option<usize>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn csv_block(header: &[&str], records: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for rec in records {
        w.write_record(rec).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

fn predict_csv(rows: &[PredictRow]) -> Result<String> {
    let header = [
        "model",
        "beta",
        "alpha",
        "eps",
        "prior",
        "fixed_point",
        "overlap",
        "overlap_u",
        "rayleigh",
        "classical_eigenvalue",
        "classical_overlap",
        "limit_overlap",
        "limit_rayleigh",
    ];
    let recs: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.model.name().into(),
                real(r.beta),
                opt_real(r.alpha),
                real(r.eps),
                r.prior.clone(),
                real(r.fixed_point),
                real(r.overlap),
                opt_real(r.overlap_u),
                real(r.rayleigh),
                opt_real(r.classical_eigenvalue),
                real(r.classical_overlap),
                real(r.limit_overlap),
                real(r.limit_rayleigh),
            ]
        })
        .collect();
    csv_block(&header, &recs)
}

fn simulate_csv(out: &SimulationOutput) -> Result<String> {
    let header = [
        "model",
        "n",
        "p",
        "beta",
        "eps",
        "prior",
        "seed",
        "t_used",
        "status",
        "overlap_emp",
        "overlap_pred",
        "rayleigh_emp",
        "rayleigh_pred",
        "overlap_u_emp",
        "overlap_u_pred",
        "overlap_classical_emp",
        "overlap_classical_pred",
        "wall_ms",
    ];
    let recs: Vec<Vec<String>> = out
        .rows
        .iter()
        .map(|r| {
            vec![
                r.model.name().into(),
                r.n.to_string(),
                opt_int(r.p),
                real(r.beta),
                real(r.eps),
                r.prior.clone(),
                r.seed.to_string(),
                r.t_used.to_string(),
                r.status.clone(),
                opt_real(r.overlap_emp),
                real(r.overlap_pred),
                opt_real(r.rayleigh_emp),
                real(r.rayleigh_pred),
                opt_real(r.overlap_u_emp),
                opt_real(r.overlap_u_pred),
                opt_real(r.overlap_classical_emp),
                real(r.overlap_classical_pred),
                opt_real(r.wall_ms),
            ]
        })
        .collect();
    let mut s = csv_block(&header, &recs)?;
    let header = [
        "model",
        "n",
        "p",
        "beta",
        "eps",
        "prior",
        "replicates",
        "failed",
        "overlap_emp_mean",
        "overlap_emp_sd",
        "overlap_pred",
        "rayleigh_emp_mean",
        "rayleigh_emp_sd",
        "rayleigh_pred",
        "overlap_classical_emp_mean",
        "overlap_classical_emp_sd",
        "overlap_classical_pred",
    ];
    let recs: Vec<Vec<String>> = out
        .summary
        .iter()
        .map(|r| {
            vec![
                r.model.name().into(),
                r.n.to_string(),
                opt_int(r.p),
                real(r.beta),
                real(r.eps),
                r.prior.clone(),
                r.replicates.to_string(),
                r.failed.to_string(),
                opt_real(r.overlap_emp_mean),
                opt_real(r.overlap_emp_sd),
                real(r.overlap_pred),
                opt_real(r.rayleigh_emp_mean),
                opt_real(r.rayleigh_emp_sd),
                real(r.rayleigh_pred),
                opt_real(r.overlap_classical_emp_mean),
                opt_real(r.overlap_classical_emp_sd),
                real(r.overlap_classical_pred),
            ]
        })
        .collect();
    s.push_str("\n# summary\n");
    s.push_str(&csv_block(&header, &recs)?);
    Ok(s)
}

fn sweep_csv(out: &SweepOutput) -> Result<String> {
    let header = [
        "model",
        "n",
        "p",
        "beta",
        "eps",
        "prior",
        "replicates",
        "failed",
        "overlap_emp_mean",
        "overlap_pred",
        "diff",
    ];
    let recs: Vec<Vec<String>> = out
        .cells
        .iter()
        .map(|c| {
            vec![
                c.model.name().into(),
                c.n.to_string(),
                opt_int(c.p),
                real(c.beta),
                real(c.eps),
                c.prior.clone(),
                c.replicates.to_string(),
                c.failed.to_string(),
                opt_real(c.overlap_emp_mean),
                real(c.overlap_pred),
                opt_real(c.diff),
            ]
        })
        .collect();
    let mut s = csv_block(&header, &recs)?;
    s.push_str("\n# summary\n");
    s.push_str(&csv_block(
        &["cells", "diff_mean", "diff_sd"],
        &[vec![
            out.summary.cells.to_string(),
            opt_real(out.summary.diff_mean),
            opt_real(out.summary.diff_sd),
        ]],
    )?);
    Ok(s)
}

fn worstcase_csv(reports: &[WorstCaseReport]) -> Result<String> {
    let header = [
        "beta",
        "alpha",
        "eps_bar",
        "regime",
        "eps_star",
        "at_boundary",
        "overlap_floor",
    ];
    let recs: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            vec![
                real(r.beta),
                opt_real(r.alpha),
                real(r.eps_bar),
                match r.regime {
                    crate::worst_case::Regime::BelowThreshold => "below_threshold".into(),
                    crate::worst_case::Regime::AboveThreshold => "above_threshold".into(),
                },
                opt_real(r.eps_star),
                r.at_boundary.to_string(),
                real(r.overlap_floor),
            ]
        })
        .collect();
    csv_block(&header, &recs)
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string(v).map_err(|e| Error::Io(e.to_string()))
}

#[derive(Serialize)]
struct JsonEnvelope<'a, T: Serialize> {
    command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    generated_unix: Option<u64>,
    #[serde(flatten)]
    body: &'a T,
}

#[derive(Serialize)]
struct Rows<'a, T: Serialize> {
    rows: &'a [T],
}

fn timestamp() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn envelope<T: Serialize>(cfg: &ExperimentConfig, body: &T) -> Result<String> {
    let env = JsonEnvelope {
        command: cfg.command.name(),
        generated_unix: (!cfg.no_timestamp).then(timestamp),
        body,
    };
    Ok(to_json(&env)? + "\n")
}

/// Runs the configured command and renders its output.
pub fn run(cfg: &ExperimentConfig) -> Result<String> {
    let mut text = String::new();
    if cfg.format == Format::Csv && !cfg.no_timestamp {
        writeln!(
            text,
            "# nnpca {} generated_unix={}",
            cfg.command.name(),
            timestamp()
        )
        .expect("writing to a String cannot fail");
    }
    let body = match (cfg.command, cfg.format) {
        (Command::Predict, Format::Csv) => predict_csv(&cmd_predict(cfg)?)?,
        (Command::Predict, Format::Json) => envelope(
            cfg,
            &Rows {
                rows: &cmd_predict(cfg)?,
            },
        )?,
        (Command::Simulate, Format::Csv) => simulate_csv(&cmd_simulate(cfg)?)?,
        (Command::Simulate, Format::Json) => envelope(cfg, &cmd_simulate(cfg)?)?,
        (Command::Sweep, Format::Csv) => sweep_csv(&cmd_sweep(cfg)?)?,
        (Command::Sweep, Format::Json) => envelope(cfg, &cmd_sweep(cfg)?)?,
        (Command::Worstcase, Format::Csv) => worstcase_csv(&cmd_worstcase(cfg)?)?,
        (Command::Worstcase, Format::Json) => {
            // one JSON report per line
            let mut s = String::new();
            for r in cmd_worstcase(cfg)? {
                s.push_str(&to_json(&r)?);
                s.push('\n');
            }
            s
        }
    };
    text.push_str(&body);
    Ok(text)
}

/// Process exit code for an error: 3 for numerical failures, 2 for
/// everything attributable to the configuration.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NoPositiveMean
        | Error::DomainError { .. }
        | Error::DeadIterate { .. }
        | Error::ZeroUVector { .. }
        | Error::NotSymmetric
        | Error::QOutOfRange(_) => 3,
        _ => 2,
    }
}
