//! Finite-n checks of the generators and AMP against their asymptotic
//! descriptions.

use nnpca_core::amp::{amp_rec, amp_sym};
use nnpca_core::experiments::{cmd_simulate, cmd_sweep, Command, ExperimentConfig};
use nnpca_core::fixed_point::{se_rec, se_sym};
use nnpca_core::linalg::{dot, lanczos_top, norm, DenseMatrix};
use nnpca_core::scalar::gee;
use nnpca_core::spiked::{
    gen_rec, gen_sym, random_start, signal_from_measure, two_point_signal, uniform_sphere,
    InstanceDump,
};
use nnpca_core::DiscreteMeasure;

#[test]
fn onsager_coefficient_tracks_state_evolution_sym() {
    let (n, beta, eps) = (4000, 1.0, 0.1);
    let m = DiscreteMeasure::two_point(eps).unwrap();
    let v0 = two_point_signal(n, eps).unwrap();
    let inst = gen_sym(n, beta, &v0, 11).unwrap();
    let r = amp_sym(&inst.x, Some(&v0), 30, 0.0).unwrap();
    let se = se_sym(&m, beta, 30).unwrap();
    let b = r.trace.rows[30].onsager_b;
    let want = gee(&m, se.tau_seq[29]);
    assert!((b - want).abs() <= 0.05, "b_30 = {b}, G(tau_30) = {want}");
}

#[test]
fn onsager_coefficient_tracks_state_evolution_rec() {
    let (n, p, beta, eps) = (4000, 2000, 1.0, 0.1);
    let alpha = p as f64 / n as f64;
    let m = DiscreteMeasure::two_point(eps).unwrap();
    let v0 = two_point_signal(p, eps).unwrap();
    let u0 = uniform_sphere(n, 12);
    let inst = gen_rec(n, p, beta, &u0, &v0, 12).unwrap();
    let r = amp_rec(&inst.x, Some(&u0), Some(&v0), 30, 0.0).unwrap();
    let se = se_rec(&m, beta, alpha, 30).unwrap();
    let b = r.trace.rows[30].onsager_b;
    let want = alpha.sqrt() * gee(&m, se.theta_seq[29] / alpha.sqrt());
    assert!((b - want).abs() <= 0.05, "b_30 = {b}, want {want}");
    let mu = se.mu_seq[30];
    let u_pred = mu / (1.0 + mu * mu).sqrt();
    let u_emp = r.trace.rows[30].overlap_u.unwrap();
    assert!(
        (u_emp - u_pred).abs() <= 0.05,
        "u overlap {u_emp} vs {u_pred}"
    );
}

#[test]
fn iterates_follow_the_scalar_channel() {
    // (1/n) sum_i v^t_i sqrt(n) v0_i -> E (tau_t V + G) V = tau_t
    let (n, beta, eps, t) = (8000, 1.0, 0.1, 5);
    let m = DiscreteMeasure::two_point(eps).unwrap();
    let v0 = two_point_signal(n, eps).unwrap();
    let inst = gen_sym(n, beta, &v0, 13).unwrap();
    let r = amp_sym(&inst.x, Some(&v0), t, 0.0).unwrap();
    let emp = dot(&r.v, &v0) / (n as f64).sqrt();
    let tau = se_sym(&m, beta, t).unwrap().tau_seq[t - 1];
    assert!(
        (emp - tau).abs() <= 0.05,
        "empirical {emp}, tau_{t} = {tau}"
    );
}

/// `max_{s = +-1} <(s v)_+, X (s v)_+> / |(s v)_+|^2`.
fn truncated_value(x: &DenseMatrix, v: &[f64]) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for s in [1.0, -1.0] {
        let w: Vec<f64> = v.iter().map(|&a| (s * a).max(0.0)).collect();
        let nw = norm(&w);
        if nw == 0.0 {
            continue;
        }
        let mut xw = vec![0.0; w.len()];
        x.gemv(&w, &mut xw);
        best = best.max(dot(&w, &xw) / (nw * nw));
    }
    best
}

#[test]
fn amp_beats_truncated_classical_pca() {
    let (n, beta, eps) = (1000, 1.0, 0.3);
    let v0 = two_point_signal(n, eps).unwrap();
    let mut wins = 0;
    for seed in 0..50 {
        let inst = gen_sym(n, beta, &v0, seed).unwrap();
        let r = amp_sym(&inst.x, None, 50, 0.0).unwrap();
        let (_, v1) = lanczos_top(|a, b| inst.x.gemv(a, b), &random_start(n, seed), 100);
        if r.trace.last().unwrap().rayleigh >= truncated_value(&inst.x, &v1) {
            wins += 1;
        }
    }
    assert!(wins >= 45, "AMP won {wins} of 50");
}

#[test]
fn noise_moments() {
    let n = 2000;
    let v0 = two_point_signal(n, 1.0).unwrap();
    let inst = gen_sym(n, 0.0, &v0, 14).unwrap();
    let (mut s, mut s2, mut d2) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let xii = inst.x.get(i, i);
        d2 += xii * xii;
        for j in i + 1..n {
            let z = inst.x.get(i, j);
            s += z;
            s2 += z * z;
        }
    }
    let k = (n * (n - 1) / 2) as f64;
    let mean = s / k;
    let var = s2 / k - mean * mean;
    let se_mean = (1.0 / n as f64 / k).sqrt();
    assert!(mean.abs() <= 4.0 * se_mean, "off-diagonal mean {mean}");
    assert!(
        (var * n as f64 - 1.0).abs() <= 0.05,
        "off-diagonal variance {var}"
    );
    let dvar = d2 / n as f64;
    let rel_se = (2.0 / n as f64).sqrt();
    assert!(
        (dvar * n as f64 / 2.0 - 1.0).abs() <= 5.0 * rel_se,
        "diagonal variance {dvar}"
    );
}

#[test]
fn spectral_sanity_sym() {
    let n = 4000;
    let v0 = two_point_signal(n, 0.1).unwrap();
    let inst = gen_sym(n, 2.0, &v0, 15).unwrap();
    let (lam, _) = lanczos_top(|a, b| inst.x.gemv(a, b), &random_start(n, 15), 60);
    assert!((lam - 2.5).abs() <= 0.05, "lambda1 = {lam}");
}

#[test]
fn marchenko_pastur_edge() {
    let (n, p) = (4000, 1000);
    let v0 = two_point_signal(p, 0.1).unwrap();
    let u0 = uniform_sphere(n, 16);
    let inst = gen_rec(n, p, 0.0, &u0, &v0, 16).unwrap();
    let mut tmp = vec![0.0; n];
    let (lam, _) = lanczos_top(
        |a, b| {
            inst.x.gemv(a, &mut tmp);
            inst.x.gemv_t(&tmp, b);
        },
        &random_start(p, 16),
        80,
    );
    let sigma = lam.sqrt();
    assert!((sigma - 1.5).abs() <= 0.05, "top singular value {sigma}");
}

#[test]
fn sampled_support_fraction() {
    let m = DiscreteMeasure::two_point(0.5).unwrap();
    let s = signal_from_measure(100_000, &m, 17).unwrap();
    let frac = s.v.iter().filter(|&&x| x > 0.0).count() as f64 / 1e5;
    assert!((frac - 0.5).abs() <= 0.01, "{frac}");
    assert!((norm(&s.v) - 1.0).abs() <= 1e-12);
    assert!(s.norm_deviation.abs() < 0.05);
}

#[test]
fn dump_round_trip_of_generated_instance() {
    let v0 = two_point_signal(30, 0.2).unwrap();
    let inst = gen_sym(30, 1.5, &v0, 19).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.bin");
    InstanceDump::from(&inst).save(&path).unwrap();
    let back = InstanceDump::load(&path).unwrap();
    assert_eq!(back.x, inst.x);
    assert_eq!(back.seed, 19);
    assert_eq!(back.beta, 1.5);
}

#[test]
fn sweep_matches_predictions_on_a_grid() {
    let settings = [
        ("n", "1000"),
        ("beta", "0.6,0.9,1.2,1.5"),
        ("eps", "0.05,0.2,0.5"),
        ("replicates", "8"),
        ("lanczos-steps", "20"),
        ("no-timestamp", "true"),
    ];
    let cfg = ExperimentConfig::from_settings(
        Command::Sweep,
        &settings
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect(),
    )
    .unwrap();
    let out = cmd_sweep(&cfg).unwrap();
    assert_eq!(out.summary.cells, 12);
    let mean = out.summary.diff_mean.unwrap();
    let sd = out.summary.diff_sd.unwrap();
    assert!(mean.abs() <= 1e-2, "mean difference {mean}");
    assert!(sd <= 6e-2, "sd of differences {sd}");
}

#[test]
fn replicate_wall_time_is_quadratic_at_most() {
    // generation and dense matrix-vector products make each replicate O(n^2)
    let sizes = [500usize, 1000, 2000, 4000];
    let mut logs = Vec::new();
    for &n in &sizes {
        let settings = [
            ("n", n.to_string()),
            ("beta", "1".into()),
            ("eps", "0.1".into()),
            ("replicates", "3".into()),
        ];
        let cfg = ExperimentConfig::from_settings(
            Command::Simulate,
            &settings
                .iter()
                .map(|(k, v)| (k.to_string(), v.clone()))
                .collect(),
        )
        .unwrap();
        let out = cmd_simulate(&cfg).unwrap();
        let best = out
            .rows
            .iter()
            .map(|r| r.wall_ms.unwrap())
            .fold(f64::INFINITY, f64::min);
        logs.push(((n as f64).ln(), best.ln()));
    }
    let k = logs.len() as f64;
    let mx = logs.iter().map(|l| l.0).sum::<f64>() / k;
    let my = logs.iter().map(|l| l.1).sum::<f64>() / k;
    let sxy: f64 = logs.iter().map(|l| (l.0 - mx) * (l.1 - my)).sum();
    let sxx: f64 = logs.iter().map(|l| (l.0 - mx) * (l.0 - mx)).sum();
    let exponent = sxy / sxx;
    assert!(
        exponent <= 2.2,
        "time exponent {exponent}, log(n), log(ms): {logs:?}"
    );
}
