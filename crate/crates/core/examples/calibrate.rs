//! Calibration run behind the frozen multiplicative-outlier separation
//! thresholds: prints the distribution of the smallest and second-smallest
//! eigenvalue moduli of the weakly perturbed unitary family at the
//! verification scale, plus the same picture at the critical coupling
//! where separation is expected to degrade.
//!
//! Run with: cargo run --release --example calibrate


use rayon::prelude::*;
use rmt_lab::ensembles::SeedSpec;
use rmt_lab::linalg::eigenvalues;
use rmt_lab::models::{build_matrix, ModelConfig};

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let idx = ((sorted.len() as f64 - 1.0) * q).round() as usize;
    sorted[idx]
}

fn survey(n: usize, t: f64, trials: u64, master: u64, label: &str) {
    let pairs: Vec<(f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = SeedSpec::new(master, trial).rng();
            let u = rmt_lab::ensembles::haar_from_rng(n, &mut rng).unwrap();
            let v = rmt_lab::ensembles::unit_vector_from_rng(n, &mut rng).unwrap();
            let model = ModelConfig::multiplicative(v).unwrap();
            let vals = eigenvalues(&build_matrix(&model, &u, t).unwrap()).unwrap();
            let mut mods: Vec<f64> = vals.iter().map(|z| z.norm()).collect();
            mods.sort_by(|a, b| a.partial_cmp(b).unwrap());
            (mods[0], mods[1])
        })
        .collect();
    let mut smallest: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let mut second: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    smallest.sort_by(|a, b| a.partial_cmp(b).unwrap());
    second.sort_by(|a, b| a.partial_cmp(b).unwrap());
    println!("=== {label}: n = {n}, t = {t:.5}, {trials} trials ===");
    println!(
        "smallest |lambda|:  q01 {:.4}  q50 {:.4}  q99 {:.4}  max {:.4}",
        quantile(&smallest, 0.01),
        quantile(&smallest, 0.50),
        quantile(&smallest, 0.99),
        smallest.last().unwrap()
    );
    println!(
        "2nd-smallest:       min {:.4}  q01 {:.4}  q50 {:.4}  q99 {:.4}",
        second.first().unwrap(),
        quantile(&second, 0.01),
        quantile(&second, 0.50),
        quantile(&second, 0.99)
    );
    for (lo, hi) in [(0.5, 0.8), (0.6, 0.85), (0.6, 0.9)] {
        let hits = pairs.iter().filter(|(a, b)| *a <= lo && *b >= hi).count();
        println!(
            "separation with outlier <= {lo} and bulk >= {hi}: {}/{} = {:.3}",
            hits,
            trials,
            hits as f64 / trials as f64
        );
    }
}

// Distances of the nearest and second-nearest eigenvalue to the predicted
// outlier location z_t = t / ((1 - t) v* U* v), per trial.
fn survey_centered(n: usize, t: f64, trials: u64, master: u64, label: &str) {
    let pairs: Vec<(f64, f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = SeedSpec::new(master, trial).rng();
            let u = rmt_lab::ensembles::haar_from_rng(n, &mut rng).unwrap();
            let v = rmt_lab::ensembles::unit_vector_from_rng(n, &mut rng).unwrap();
            let model = ModelConfig::multiplicative(v.clone()).unwrap();
            let c1 = rmt_lab::linalg::dot_herm(
                v.view(),
                rmt_lab::linalg::adjoint(&u).dot(&v).view(),
            );
            let z_t = num_complex::Complex64::new(t / (1.0 - t), 0.0) / c1;
            let vals = eigenvalues(&build_matrix(&model, &u, t).unwrap()).unwrap();
            let mut dists: Vec<f64> = vals.iter().map(|z| (z - z_t).norm()).collect();
            dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
            (dists[0], dists[1], z_t.norm())
        })
        .collect();
    let mut nearest: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let mut second: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    nearest.sort_by(|a, b| a.partial_cmp(b).unwrap());
    second.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mean_zt = pairs.iter().map(|p| p.2).sum::<f64>() / trials as f64;
    println!("=== {label} (z_t-centered): n = {n}, t = {t:.5}, mean |z_t| = {mean_zt:.3} ===");
    println!(
        "nearest distance:  q50 {:.4}  q95 {:.4}  q99 {:.4}  max {:.4}",
        quantile(&nearest, 0.50),
        quantile(&nearest, 0.95),
        quantile(&nearest, 0.99),
        nearest.last().unwrap()
    );
    println!(
        "2nd nearest:       min {:.4}  q01 {:.4}  q05 {:.4}  q50 {:.4}",
        second.first().unwrap(),
        quantile(&second, 0.01),
        quantile(&second, 0.05),
        quantile(&second, 0.50)
    );
    for (r1, r2) in [(0.1, 0.2), (0.12, 0.25), (0.15, 0.3), (0.2, 0.4), (0.25, 0.5)] {
        let hits = pairs.iter().filter(|(a, b, _)| *a <= r1 && *b >= r2).count();
        println!(
            "separation with |l1 - z_t| <= {r1} and rest >= {r2}: {}/{} = {:.3}",
            hits,
            trials,
            hits as f64 / trials as f64
        );
    }
}

// Exact radial law at t = 0: the nonzero squared moduli of U (I - v v*) are
// distributed like independent Beta(k, 1), k = 1..n-1, so
// P(min modulus > x) = prod_k (1 - x^(2k)).
fn beta_law_check(n: usize, trials: u64, master: u64) {
    let seconds: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = SeedSpec::new(master, trial).rng();
            let u = rmt_lab::ensembles::haar_from_rng(n, &mut rng).unwrap();
            let v = rmt_lab::ensembles::unit_vector_from_rng(n, &mut rng).unwrap();
            let model = ModelConfig::multiplicative(v).unwrap();
            let vals = eigenvalues(&build_matrix(&model, &u, 0.0).unwrap()).unwrap();
            let mut mods: Vec<f64> = vals.iter().map(|z| z.norm()).collect();
            mods.sort_by(|a, b| a.partial_cmp(b).unwrap());
            mods[1] // smallest nonzero modulus
        })
        .collect();
    println!("=== t = 0 radial law check: n = {n}, {trials} trials ===");
    for x in [0.3f64, 0.45, 0.6, 0.75] {
        let empirical = seconds.iter().filter(|m| **m <= x).count() as f64 / trials as f64;
        let mut survive = 1.0f64;
        for k in 1..n {
            survive *= 1.0 - x.powi(2 * k as i32);
            if survive == 0.0 {
                break;
            }
        }
        let predicted = 1.0 - survive;
        println!(
            "P(smallest nonzero modulus <= {x}): empirical {empirical:.3} vs Beta-law {predicted:.3}"
        );
    }
}

// Ratio of second-smallest to smallest modulus, plus the best jointly
// attainable absolute thresholds.
fn survey_ratio(n: usize, t: f64, trials: u64, master: u64, label: &str) {
    let pairs: Vec<(f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = SeedSpec::new(master, trial).rng();
            let u = rmt_lab::ensembles::haar_from_rng(n, &mut rng).unwrap();
            let v = rmt_lab::ensembles::unit_vector_from_rng(n, &mut rng).unwrap();
            let model = ModelConfig::multiplicative(v).unwrap();
            let vals = eigenvalues(&build_matrix(&model, &u, t).unwrap()).unwrap();
            let mut mods: Vec<f64> = vals.iter().map(|z| z.norm()).collect();
            mods.sort_by(|a, b| a.partial_cmp(b).unwrap());
            (mods[0], mods[1])
        })
        .collect();
    let mut ratios: Vec<f64> = pairs.iter().map(|(a, b)| b / a).collect();
    ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
    println!("=== {label} gap ratios: n = {n}, t = {t:.5}, {trials} trials ===");
    println!(
        "second/smallest: min {:.3}  q01 {:.3}  q05 {:.3}  q50 {:.3}",
        ratios.first().unwrap(),
        quantile(&ratios, 0.01),
        quantile(&ratios, 0.05),
        quantile(&ratios, 0.50)
    );
    for c in [1.1, 1.2, 1.3, 1.5] {
        let freq = ratios.iter().filter(|r| **r >= c).count() as f64 / trials as f64;
        println!("P(ratio >= {c}) = {freq:.3}");
    }
    // Best absolute ring pair.
    let mut best = (0.0, 0.0, 0.0);
    let mut a = 0.20;
    while a <= 0.75 {
        let mut b = a + 0.02;
        while b <= 0.9 {
            let hits = pairs.iter().filter(|(m1, m2)| *m1 <= a && *m2 >= b).count();
            let f = hits as f64 / trials as f64;
            if f > best.2 {
                best = (a, b, f);
            }
            b += 0.02;
        }
        a += 0.01;
    }
    println!(
        "best absolute ring pair: outlier <= {:.2}, bulk >= {:.2}, frequency {:.3}",
        best.0, best.1, best.2
    );
}

fn main() {
    let n = 250usize;
    let master = 1729u64;
    let trials = 200u64;
    beta_law_check(n, trials, master ^ 0xbe7a);
    survey(n, (n as f64).powf(-0.7), trials, master, "weak coupling");
    survey(n, 5.0 / (n as f64).sqrt(), trials, master ^ 0x5eed, "critical coupling");
    survey_centered(n, (n as f64).powf(-0.7), trials, master, "weak coupling");
    survey_ratio(n, (n as f64).powf(-0.7), trials, master, "weak coupling");
    survey_ratio(n, 5.0 / (n as f64).sqrt(), trials, master ^ 0x5eed, "critical coupling");
}
