//! The verification battery: exact algebraic identities at every size, plus
//! finite-size Monte Carlo proxies for the asymptotic localization and
//! distributional statements. Each criterion produces one record with its
//! statistic, its frozen threshold, and a pass flag; thresholds live here,
//! in code, and nowhere else.
//!
//! Statistical criteria operationalize "with high probability" as >= 95% of
//! at least 200 seeded trials at desk scale. They are checked at the default
//! master seed; other seeds pass with high probability but not certainty.

use ndarray::prelude::*;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::ensembles::{
    ginibre_from_rng, gue_from_rng, haar_from_rng, kostlan_expected_count, unit_vector_from_rng,
    SeedSpec,
};
use crate::error::{LabError, Result};
use crate::gaf::{compare_clouds, gaf_zeros, required_truncation, sample_gaf};
use crate::linalg::{dot_herm, eigen_decompose, eigenvalues, sylvester_check};
use crate::models::{build_matrix, level_target, spectral_function, ModelConfig, ModelKind};
use crate::outliers::{compare_counts, detect_separation, local_law_margin, Region};
use crate::overlaps::overlap_matrix;
use crate::trajectories::{eigen_state_at, integrate_ode, match_sets, ode_residual, track};

/// Master seed the battery is calibrated against.
pub const DEFAULT_MASTER_SEED: u64 = 1729;

/// How a statistic compares against its threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    AtMost,
    AtLeast,
    Below,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub direction: Direction,
    pub pass: bool,
    pub detail: String,
}

impl CriterionResult {
    fn new(
        name: &str,
        statistic: f64,
        threshold: f64,
        direction: Direction,
        detail: String,
    ) -> Self {
        let pass = match direction {
            Direction::AtMost => statistic <= threshold,
            Direction::AtLeast => statistic >= threshold,
            Direction::Below => statistic < threshold,
        } && statistic.is_finite();
        CriterionResult { name: name.to_string(), statistic, threshold, direction, pass, detail }
    }

    pub fn line(&self) -> String {
        let op = match self.direction {
            Direction::AtMost => "<=",
            Direction::AtLeast => ">=",
            Direction::Below => "<",
        };
        format!(
            "{} {} (statistic {:.6e} {} threshold {:.6e}) {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.statistic,
            op,
            self.threshold,
            self.detail
        )
    }
}

pub const SUITES: &[&str] = &[
    "identities",
    "level-sets",
    "additive-outlier",
    "anti-hermitian-outlier",
    "multiplicative-outlier",
    "counting",
    "gaf-match",
    "gaf-sanity",
    "ode",
    "limits",
    "local-law",
    "ensembles",
];

fn criterion_seed(master: u64, tag: &str) -> u64 {
    // FNV-1a over the tag, folded into the master seed.
    let mut h: u64 = 0xcbf29ce484222325;
    for b in tag.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h ^ master
}

/// Run one named suite.
pub fn run_suite(suite: &str, master_seed: u64) -> Result<Vec<CriterionResult>> {
    match suite {
        "identities" => identities(master_seed),
        "level-sets" => level_sets(master_seed),
        "additive-outlier" => additive_outlier(master_seed),
        "anti-hermitian-outlier" => anti_hermitian_outlier(master_seed),
        "multiplicative-outlier" => multiplicative_outlier(master_seed),
        "counting" => counting(master_seed),
        "gaf-match" => gaf_match(master_seed),
        "gaf-sanity" => gaf_sanity(master_seed),
        "ode" => ode(master_seed),
        "limits" => limits(master_seed),
        "local-law" => local_law(master_seed),
        "ensembles" => ensembles_suite(master_seed),
        other => Err(LabError::InvalidConfig(format!(
            "unknown suite '{other}'; available: {}",
            SUITES.join(", ")
        ))),
    }
}

/// Run every suite in order.
pub fn run_all(master_seed: u64) -> Result<Vec<CriterionResult>> {
    let mut out = Vec::new();
    for suite in SUITES {
        out.extend(run_suite(suite, master_seed)?);
    }
    Ok(out)
}

// --- criterion 1: exact identities -------------------------------------

fn identities(master: u64) -> Result<Vec<CriterionResult>> {
    let mut results = Vec::new();

    // Sylvester det(I + AB) = det(I + BA), 100 random rectangular instances.
    {
        let seed = criterion_seed(master, "sylvester");
        let mut worst = 0.0f64;
        for trial in 0..100u64 {
            let mut rng = SeedSpec::new(seed, trial).rng();
            let n = 1 + (trial % 8) as usize;
            let d = 1 + (trial % 3) as usize;
            let a = Array2::from_shape_simple_fn((n, d), || {
                crate::ensembles::complex_standard_gaussian(&mut rng)
            });
            let b = Array2::from_shape_simple_fn((d, n), || {
                crate::ensembles::complex_standard_gaussian(&mut rng)
            });
            let (lhs, rhs) = sylvester_check(&a, &b)?;
            worst = worst.max((lhs - rhs).norm() / lhs.norm().max(1.0));
        }
        results.push(CriterionResult::new(
            "identities/sylvester",
            worst,
            1e-10,
            Direction::AtMost,
            "100 instances, n <= 8, d <= 3".into(),
        ));
    }

    // Rank-one determinant lemma: det(I + (M-z)^-1 t v w*) = 1 + t w*(M-z)^-1 v.
    {
        let seed = criterion_seed(master, "matrix-determinant-lemma");
        let mut worst = 0.0f64;
        for trial in 0..100u64 {
            let mut rng = SeedSpec::new(seed, trial).rng();
            let n = 5;
            let m = ginibre_from_rng(n, &mut rng)?;
            let v = unit_vector_from_rng(n, &mut rng)?;
            let w = unit_vector_from_rng(n, &mut rng)?;
            let t = Complex64::new(1.0, 0.0) + crate::ensembles::complex_standard_gaussian(&mut rng);
            let z = Complex64::new(2.0, 2.0);
            let mut shifted = m.clone();
            for i in 0..n {
                shifted[[i, i]] -= z;
            }
            use ndarray_linalg::{Determinant, Inverse};
            let inv = shifted.inv()?;
            let mut p = inv.dot(&crate::linalg::outer(&v.mapv(|x| x * t), &w));
            for i in 0..n {
                p[[i, i]] += 1.0;
            }
            let lhs = p.det()?;
            let rhs = Complex64::new(1.0, 0.0) + t * dot_herm(w.view(), inv.dot(&v).view());
            worst = worst.max((lhs - rhs).norm() / lhs.norm().max(1.0));
        }
        results.push(CriterionResult::new(
            "identities/matrix-determinant-lemma",
            worst,
            1e-10,
            Direction::AtMost,
            "100 rank-one instances at n = 5".into(),
        ));
    }

    // Trace identity: sum Im lambda = t for H + i t v v*.
    {
        let seed = criterion_seed(master, "trace");
        let n = 50;
        let mut worst = 0.0f64;
        for trial in 0..20u64 {
            let mut rng = SeedSpec::new(seed, trial).rng();
            let h = gue_from_rng(n, &mut rng)?;
            let v = unit_vector_from_rng(n, &mut rng)?;
            let t = 0.25 + 0.35 * trial as f64;
            let model = ModelConfig::anti_hermitian(v)?;
            let g = build_matrix(&model, &h, t)?;
            let vals = eigenvalues(&g)?;
            let trace_im: f64 = vals.iter().map(|z| z.im).sum();
            worst = worst.max((trace_im - t).abs());
        }
        results.push(CriterionResult::new(
            "identities/trace",
            worst,
            1e-9 * n as f64,
            Direction::AtMost,
            "20 instances at n = 50, t in [0.25, 7]".into(),
        ));
    }

    // Determinant identity: prod |lambda| = |t| for the multiplicative family.
    {
        let seed = criterion_seed(master, "determinant");
        let n = 50;
        let mut worst = 0.0f64;
        let ts = [-0.9, -0.5, -0.1, 0.05, 0.2, 0.45, 0.7, 0.95];
        for (trial, &t) in ts.iter().enumerate() {
            let mut rng = SeedSpec::new(seed, trial as u64).rng();
            let u = haar_from_rng(n, &mut rng)?;
            let v = unit_vector_from_rng(n, &mut rng)?;
            let model = ModelConfig::multiplicative(v)?;
            let g = build_matrix(&model, &u, t)?;
            let vals = eigenvalues(&g)?;
            let log_prod: f64 = vals.iter().map(|z| z.norm().ln()).sum();
            worst = worst.max((log_prod - t.abs().ln()).abs());
        }
        results.push(CriterionResult::new(
            "identities/determinant",
            worst,
            1e-8,
            Direction::AtMost,
            "8 couplings at n = 50 (relative, via log)".into(),
        ));
    }

    // Biorthogonality, overlap row sums, and the diagonal lower bound.
    {
        let seed = criterion_seed(master, "overlaps");
        let mut worst_bio = 0.0f64;
        let mut worst_row = 0.0f64;
        let mut min_diag = f64::INFINITY;
        for trial in 0..10u64 {
            let mut rng = SeedSpec::new(seed, trial).rng();
            let g = ginibre_from_rng(30, &mut rng)?;
            let es = eigen_decompose(&g)?;
            worst_bio = worst_bio.max(es.biorthogonality_defect());
            let o = overlap_matrix(&es)?;
            for i in 0..30 {
                worst_row = worst_row.max((o.row_sum(i) - Complex64::new(1.0, 0.0)).norm());
                min_diag = min_diag.min(o.entries[[i, i]].re);
            }
        }
        results.push(CriterionResult::new(
            "identities/biorthogonality",
            worst_bio,
            1e-8,
            Direction::AtMost,
            "10 Ginibre eigensystems at n = 30".into(),
        ));
        results.push(CriterionResult::new(
            "identities/overlap-row-sums",
            worst_row,
            1e-7,
            Direction::AtMost,
            "rows of the overlap matrix sum to 1".into(),
        ));
        results.push(CriterionResult::new(
            "identities/overlap-diagonal",
            min_diag,
            1.0 - 1e-8,
            Direction::AtLeast,
            "diagonal overlaps are at least 1".into(),
        ));
    }

    Ok(results)
}

// --- criterion 2: level-set equivalence ---------------------------------

fn level_sets(master: u64) -> Result<Vec<CriterionResult>> {
    let seed = criterion_seed(master, "level-sets");
    let mut results = Vec::new();
    for kind in [ModelKind::Additive, ModelKind::AntiHermitian, ModelKind::Multiplicative] {
        let mut worst = 0.0f64;
        let mut checked = 0usize;
        for trial in 0..50u64 {
            let mut rng = SeedSpec::new(seed, trial).rng();
            let n = 5 + (trial % 16) as usize;
            let (model, base, t) = match kind {
                ModelKind::Additive => {
                    let g = ginibre_from_rng(n, &mut rng)?;
                    let v = unit_vector_from_rng(n, &mut rng)?;
                    let w = unit_vector_from_rng(n, &mut rng)?;
                    let t = 2.0 + 4.0 * (trial as f64 / 50.0);
                    (ModelConfig::additive(v, w)?, g, t)
                }
                ModelKind::AntiHermitian => {
                    let h = gue_from_rng(n, &mut rng)?;
                    let v = unit_vector_from_rng(n, &mut rng)?;
                    let t = 0.5 + 2.0 * (trial as f64 / 50.0);
                    (ModelConfig::anti_hermitian(v)?, h, t)
                }
                ModelKind::Multiplicative => {
                    let u = haar_from_rng(n, &mut rng)?;
                    let v = unit_vector_from_rng(n, &mut rng)?;
                    let t = -0.8 + 1.6 * ((trial as f64 + 0.5) / 50.0);
                    (ModelConfig::multiplicative(v)?, u, t)
                }
            };
            let target = level_target(kind, t)?;
            let g_t = build_matrix(&model, &base, t)?;
            let vals = eigenvalues(&g_t)?;
            // Poles sit at Sp(base) for every family (for unitary U the poles
            // of the multiplicative form, 1/conj(u), coincide with Sp(U)).
            let poles: Vec<Complex64> = eigenvalues(&base)?.to_vec();
            for lam in vals.iter() {
                let pole_dist =
                    poles.iter().map(|p| (lam - p).norm()).fold(f64::INFINITY, f64::min);
                if pole_dist <= 1e-6 {
                    continue;
                }
                let w_val = spectral_function(&model, &base, *lam)?;
                worst = worst.max((w_val - target).norm());
                checked += 1;
            }
        }
        results.push(CriterionResult::new(
            &format!("level-sets/{}", kind.label()),
            worst,
            1e-7,
            Direction::AtMost,
            format!("{checked} eigenvalues over 50 instances, n <= 20"),
        ));
    }
    Ok(results)
}

// --- criterion 3: additive unique outlier --------------------------------

fn additive_outlier(master: u64) -> Result<Vec<CriterionResult>> {
    let seed = criterion_seed(master, "additive-outlier");
    let n = 100;
    let t = 20.0;
    let trials = 200u64;
    let hits: usize = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<bool> {
            let mut rng = SeedSpec::new(seed, trial).rng();
            let g = ginibre_from_rng(n, &mut rng)?;
            let v = unit_vector_from_rng(n, &mut rng)?;
            let model = ModelConfig::additive(v.clone(), v)?;
            let vals = eigenvalues(&build_matrix(&model, &g, t)?)?;
            let outliers: Vec<&Complex64> = vals.iter().filter(|z| z.norm() > 1.2).collect();
            Ok(outliers.len() == 1 && (outliers[0] - Complex64::new(t, 0.0)).norm() <= 1.0)
        })
        .collect::<Result<Vec<bool>>>()?
        .into_iter()
        .filter(|&b| b)
        .count();
    let freq = hits as f64 / trials as f64;
    Ok(vec![CriterionResult::new(
        "additive-outlier/unique-located",
        freq,
        0.95,
        Direction::AtLeast,
        format!("n = {n}, t = {t}, {trials} trials: one |lambda| > 1.2 within 1.0 of t"),
    )])
}

// --- criterion 4: anti-Hermitian outlier and subcritical contrast --------

fn anti_hermitian_outlier(master: u64) -> Result<Vec<CriterionResult>> {
    let seed = criterion_seed(master, "anti-hermitian-outlier");
    let n = 100;
    let trials = 200u64;

    let supercritical: usize = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<bool> {
            let mut rng = SeedSpec::new(seed, trial).rng();
            let h = gue_from_rng(n, &mut rng)?;
            let v = unit_vector_from_rng(n, &mut rng)?;
            let model = ModelConfig::anti_hermitian(v)?;
            let vals = eigenvalues(&build_matrix(&model, &h, 2.0)?)?;
            let top = vals
                .iter()
                .cloned()
                .max_by(|a, b| a.im.partial_cmp(&b.im).unwrap())
                .unwrap();
            let rest_max_im = vals
                .iter()
                .filter(|z| (**z - top).norm() > 0.0)
                .map(|z| z.im)
                .fold(f64::NEG_INFINITY, f64::max);
            Ok((top - Complex64::new(0.0, 1.5)).norm() <= 0.3 && rest_max_im <= 0.15)
        })
        .collect::<Result<Vec<bool>>>()?
        .into_iter()
        .filter(|&b| b)
        .count();

    let sub_seed = criterion_seed(master, "anti-hermitian-subcritical");
    let subcritical: usize = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<bool> {
            let mut rng = SeedSpec::new(sub_seed, trial).rng();
            let h = gue_from_rng(n, &mut rng)?;
            let v = unit_vector_from_rng(n, &mut rng)?;
            let model = ModelConfig::anti_hermitian(v)?;
            let vals = eigenvalues(&build_matrix(&model, &h, 0.5)?)?;
            let max_im = vals.iter().map(|z| z.im).fold(f64::NEG_INFINITY, f64::max);
            Ok(max_im <= 0.1)
        })
        .collect::<Result<Vec<bool>>>()?
        .into_iter()
        .filter(|&b| b)
        .count();

    Ok(vec![
        CriterionResult::new(
            "anti-hermitian-outlier/supercritical",
            supercritical as f64 / trials as f64,
            0.95,
            Direction::AtLeast,
            format!("n = {n}, t = 2, {trials} trials: top within 0.3 of 1.5i, rest Im <= 0.15"),
        ),
        CriterionResult::new(
            "anti-hermitian-outlier/subcritical",
            subcritical as f64 / trials as f64,
            0.95,
            Direction::AtLeast,
            format!("n = {n}, t = 0.5, {trials} trials: max Im <= 0.1"),
        ),
    ])
}

// --- criterion 5: multiplicative outlier and scale contrast --------------

/// Separation thresholds for the weak-coupling multiplicative outlier at
/// n = 250, t = n^(-0.7). The calibration run (examples/calibrate.rs,
/// 200 trials at master seed 1729) puts the smallest modulus at
/// median 0.34 (q99 0.59) and the second smallest at median 0.66 with a
/// heavy lower tail reaching 0.40; no threshold pair reaches a 95% joint
/// frequency at this size (the best, a zero-width ring at 0.49/0.51,
/// attains 0.795). The separation check is therefore expected to fail at
/// desk scale and is reported as an honest negative; the companion
/// critical-coupling contrast still demonstrates that separation degrades
/// entirely at t ~ n^(-1/2).
const UA_OUTLIER_RADIUS: f64 = 0.6;
const UA_BULK_RADIUS: f64 = 0.85;

fn multiplicative_outlier(master: u64) -> Result<Vec<CriterionResult>> {
    let seed = criterion_seed(master, "multiplicative-outlier");
    let n = 250usize;
    let trials = 200u64;
    let d1 = Region::disk(Complex64::new(0.0, 0.0), UA_OUTLIER_RADIUS);
    let d2 = Region::Annulus { inner: UA_BULK_RADIUS, outer: f64::INFINITY };

    let run = |t: f64, cseed: u64| -> Result<usize> {
        (0..trials)
            .into_par_iter()
            .map(|trial| -> Result<bool> {
                let mut rng = SeedSpec::new(cseed, trial).rng();
                let u = haar_from_rng(n, &mut rng)?;
                let v = unit_vector_from_rng(n, &mut rng)?;
                let model = ModelConfig::multiplicative(v)?;
                let vals = eigenvalues(&build_matrix(&model, &u, t)?)?;
                let report = detect_separation(&vals.to_vec(), &d1, &d2)?;
                Ok(report.satisfied)
            })
            .collect::<Result<Vec<bool>>>()
            .map(|v| v.into_iter().filter(|&b| b).count())
    };

    let t_weak = (n as f64).powf(-0.7);
    let weak = run(t_weak, seed)?;
    let t_critical = 5.0 / (n as f64).sqrt();
    let critical = run(t_critical, criterion_seed(master, "multiplicative-contrast"))?;

    Ok(vec![
        CriterionResult::new(
            "multiplicative-outlier/separated",
            weak as f64 / trials as f64,
            0.95,
            Direction::AtLeast,
            format!(
                "n = {n}, t = n^-0.7 = {t_weak:.4}: one |lambda| <= {UA_OUTLIER_RADIUS}, rest >= {UA_BULK_RADIUS}; \
                 known not to hold at this size (calibration ceiling 0.795 over all threshold pairs)"
            ),
        ),
        CriterionResult::new(
            "multiplicative-outlier/critical-contrast",
            critical as f64 / trials as f64,
            0.95,
            Direction::Below,
            format!("n = {n}, t = 5 n^-1/2 = {t_critical:.4}: separation frequency degrades"),
        ),
    ])
}

// --- criterion 6: threshold counting vs the Bessel asymptotic ------------

fn counting(master: u64) -> Result<Vec<CriterionResult>> {
    let seed = criterion_seed(master, "counting");
    let (empirical, predicted) = compare_counts(100, 1.0, 0.03, 500, seed)?;
    let log_ratio = (empirical / predicted).ln().abs();
    Ok(vec![CriterionResult::new(
        "counting/bessel-asymptotic",
        log_ratio,
        2f64.ln(),
        Direction::AtMost,
        format!(
            "n = 100, t = 1, y = 0.03, 500 trials: empirical {empirical:.3} vs predicted {predicted:.3} (within a factor 2)"
        ),
    )])
}

// --- criterion 7: distributional match against Gaussian series zeros -----

fn gaf_match(master: u64) -> Result<Vec<CriterionResult>> {
    let trials = 200u64;
    let mut results = Vec::new();

    // (a) Inverted additive outliers at mu = 2 against the matched series
    // zeros. The weighted resolvent expands as
    // sqrt(n) w*(zI - G)^-1 v ~ (1/z) g(1/z), so the inverted outliers are
    // the zeros of u g(u) - 1/mu: a Gaussian series with no constant term
    // held against the level 1/mu.
    {
        let seed = criterion_seed(master, "gaf-match-additive");
        let n = 200usize;
        let mu = 2.0;
        let t = mu * (n as f64).sqrt();
        let inverted: Vec<Vec<Complex64>> = (0..trials)
            .into_par_iter()
            .map(|trial| -> Result<Vec<Complex64>> {
                let mut rng = SeedSpec::new(seed, trial).rng();
                let g = ginibre_from_rng(n, &mut rng)?;
                let v = unit_vector_from_rng(n, &mut rng)?;
                let w = unit_vector_from_rng(n, &mut rng)?;
                let model = ModelConfig::additive(v, w)?;
                let vals = eigenvalues(&build_matrix(&model, &g, t)?)?;
                Ok(vals
                    .iter()
                    .filter(|z| z.norm() > 1.05)
                    .map(|z| Complex64::new(1.0, 0.0) / z)
                    .collect())
            })
            .collect::<Result<Vec<_>>>()?;

        let r = 0.9;
        let k = required_truncation(r);
        let zero_seed = criterion_seed(master, "gaf-match-additive-zeros");
        let zeros: Vec<Vec<Complex64>> = (0..trials)
            .into_par_iter()
            .map(|trial| -> Result<Vec<Complex64>> {
                let gaf = sample_gaf(k, SeedSpec::new(zero_seed, trial))?.without_constant_term();
                gaf_zeros(&gaf, Complex64::new(1.0 / mu, 0.0), r)
            })
            .collect::<Result<Vec<_>>>()?;

        let annuli = [(0.0, 0.3), (0.3, 0.6), (0.6, 0.9)];
        let comps = compare_clouds(&inverted, &zeros, &annuli)?;
        let worst_z = comps.iter().map(|c| c.z_score.abs()).fold(0.0f64, f64::max);
        let detail = comps
            .iter()
            .map(|c| format!("[{:.1},{:.1}): {:.2} vs {:.2}", c.inner, c.outer, c.mean_a, c.mean_b))
            .collect::<Vec<_>>()
            .join("; ");
        results.push(CriterionResult::new(
            "gaf-match/inverted-additive",
            worst_z,
            3.0,
            Direction::AtMost,
            format!("n = {n}, mu = {mu}, {trials} trials/side: {detail}"),
        ));
    }

    // (b) Multiplicative spectra at t = 2 n^-1/2 against the matched series
    // zeros: z in Sp(G(t)) iff sum_{k>=1} c_k z^k = t/(1-t), and sqrt(n) c_k
    // tends to independent standard Gaussians.
    {
        let seed = criterion_seed(master, "gaf-match-multiplicative");
        let n = 250usize;
        let t = 2.0 / (n as f64).sqrt();
        let spectra: Vec<Vec<Complex64>> = (0..trials)
            .into_par_iter()
            .map(|trial| -> Result<Vec<Complex64>> {
                let mut rng = SeedSpec::new(seed, trial).rng();
                let u = haar_from_rng(n, &mut rng)?;
                let v = unit_vector_from_rng(n, &mut rng)?;
                let model = ModelConfig::multiplicative(v)?;
                let vals = eigenvalues(&build_matrix(&model, &u, t)?)?;
                Ok(vals.to_vec())
            })
            .collect::<Result<Vec<_>>>()?;

        let r = 0.9;
        let k = required_truncation(r);
        let level = Complex64::new((n as f64).sqrt() * t / (1.0 - t), 0.0);
        let zero_seed = criterion_seed(master, "gaf-match-multiplicative-zeros");
        let zeros: Vec<Vec<Complex64>> = (0..trials)
            .into_par_iter()
            .map(|trial| -> Result<Vec<Complex64>> {
                let gaf = sample_gaf(k, SeedSpec::new(zero_seed, trial))?.without_constant_term();
                gaf_zeros(&gaf, level, r)
            })
            .collect::<Result<Vec<_>>>()?;

        // Bands beyond modulus ~0.65 are excluded: at n = 250 the heavy
        // lower tail of the near-circle bulk (the same finite-size effect
        // that defeats the separation criterion) is still visible there,
        // while the limiting zero process has no such points. The inverted
        // additive cloud needs no such cut because inversion compresses its
        // edge.
        let annuli = [(0.0, 0.35), (0.35, 0.5), (0.5, 0.65)];
        let comps = compare_clouds(&spectra, &zeros, &annuli)?;
        let worst_z = comps.iter().map(|c| c.z_score.abs()).fold(0.0f64, f64::max);
        let detail = comps
            .iter()
            .map(|c| format!("[{:.2},{:.2}): {:.2} vs {:.2}", c.inner, c.outer, c.mean_a, c.mean_b))
            .collect::<Vec<_>>()
            .join("; ");
        results.push(CriterionResult::new(
            "gaf-match/multiplicative",
            worst_z,
            3.0,
            Direction::AtMost,
            format!("n = {n}, t = 2 n^-1/2, {trials} trials/side: {detail}"),
        ));
    }

    Ok(results)
}

// --- criterion 8: Gaussian series sanity ---------------------------------

fn gaf_sanity(master: u64) -> Result<Vec<CriterionResult>> {
    let seed = criterion_seed(master, "gaf-sanity");
    let r = 0.5;
    let k = required_truncation(r);
    let trials = 2000u64;
    let counts: Vec<usize> = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<usize> {
            let gaf = sample_gaf(k, SeedSpec::new(seed, trial))?;
            Ok(gaf_zeros(&gaf, Complex64::new(0.0, 0.0), r)?.len())
        })
        .collect::<Result<Vec<_>>>()?;
    let mean = counts.iter().sum::<usize>() as f64 / trials as f64;
    Ok(vec![
        CriterionResult::new(
            "gaf-sanity/mean-zero-count",
            (mean - 1.0 / 3.0).abs(),
            0.05,
            Direction::AtMost,
            format!("{trials} trials at r = 0.5: mean count {mean:.4} vs 1/3"),
        ),
        // gaf_zeros errors out on any root/winding disagreement, so reaching
        // this point certifies exact agreement on every sample.
        CriterionResult::new(
            "gaf-sanity/argument-principle",
            0.0,
            0.0,
            Direction::AtMost,
            format!("winding count equals root count on all {trials} samples"),
        ),
    ])
}

// --- criterion 9: trajectory ODE -----------------------------------------

fn ode(master: u64) -> Result<Vec<CriterionResult>> {
    let mut results = Vec::new();

    // Median relative residual on n = 20 additive runs away from collisions.
    {
        let seed = criterion_seed(master, "ode-residual");
        let mut all = Vec::new();
        for trial in 0..5u64 {
            let mut rng = SeedSpec::new(seed, trial).rng();
            let base = ginibre_from_rng(20, &mut rng)?;
            let v = unit_vector_from_rng(20, &mut rng)?;
            let w = unit_vector_from_rng(20, &mut rng)?;
            let model = ModelConfig::additive(v, w)?;
            let bundle = track(&model, &base, 2.0, 3.0, 400)?;
            let res = ode_residual(&bundle)?;
            all.extend(res.into_iter().flatten());
        }
        all.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = all[all.len() / 2];
        results.push(CriterionResult::new(
            "ode/residual-median",
            median,
            1e-3,
            Direction::AtMost,
            format!("5 additive runs, n = 20, t in [2, 3] ({} points)", all.len()),
        ));
    }

    // Integrator endpoint against direct diagonalization.
    {
        let seed = criterion_seed(master, "ode-integrate");
        let mut worst = 0.0f64;
        for trial in 0..5u64 {
            let mut rng = SeedSpec::new(seed, trial).rng();
            let base = ginibre_from_rng(5, &mut rng)?;
            let v = unit_vector_from_rng(5, &mut rng)?;
            let w = unit_vector_from_rng(5, &mut rng)?;
            let model = ModelConfig::additive(v, w)?;
            let (positions, velocities) = eigen_state_at(&model, &base, 2.0)?;
            let bundle = integrate_ode(&positions, &velocities, (2.0, 2.5), 1e-3)?;
            let finals: Vec<Complex64> = bundle.paths.iter().map(|p| *p.last().unwrap()).collect();
            let direct = eigenvalues(&build_matrix(&model, &base, 2.5)?)?.to_vec();
            let perm = match_sets(&finals, &direct)?;
            for (j, &pj) in perm.iter().enumerate() {
                worst = worst.max((finals[j] - direct[pj]).norm());
            }
        }
        results.push(CriterionResult::new(
            "ode/integrator-endpoint",
            worst,
            1e-4,
            Direction::AtMost,
            "5 runs, n = 5, span [2, 2.5], RK4 step 1e-3".into(),
        ));
    }

    // First-order velocities against central finite differences.
    {
        let seed = criterion_seed(master, "ode-velocity");
        let mut worst = 0.0f64;
        let h = 1e-4;
        for trial in 0..5u64 {
            let mut rng = SeedSpec::new(seed, trial).rng();
            let base = ginibre_from_rng(5, &mut rng)?;
            let v = unit_vector_from_rng(5, &mut rng)?;
            let w = unit_vector_from_rng(5, &mut rng)?;
            let model = ModelConfig::additive(v, w)?;
            let (positions, velocities) = eigen_state_at(&model, &base, 0.0)?;
            let plus = eigenvalues(&build_matrix(&model, &base, h)?)?.to_vec();
            let minus = eigenvalues(&build_matrix(&model, &base, -h)?)?.to_vec();
            let p_plus = match_sets(&positions, &plus)?;
            let p_minus = match_sets(&positions, &minus)?;
            for j in 0..5 {
                let fd = (plus[p_plus[j]] - minus[p_minus[j]]) / Complex64::new(2.0 * h, 0.0);
                worst = worst.max((fd - velocities[j]).norm());
            }
        }
        results.push(CriterionResult::new(
            "ode/velocity-finite-difference",
            worst,
            1e-6,
            Direction::AtMost,
            "5 runs, n = 5, central differences at h = 1e-4".into(),
        ));
    }

    Ok(results)
}

// --- criterion 10: large-t limits ----------------------------------------

fn limits(master: u64) -> Result<Vec<CriterionResult>> {
    let mut results = Vec::new();
    let t_far = 1e6;

    // Anti-Hermitian: far-field eigenvalues are real, match the compression
    // spectrum, and interlace Sp(H).
    {
        let seed = criterion_seed(master, "limits-anti-hermitian");
        let n = 50;
        let trials = 20u64;
        let mut worst_im = 0.0f64;
        let mut worst_match = 0.0f64;
        let mut interlace_ok = true;
        for trial in 0..trials {
            let mut rng = SeedSpec::new(seed, trial).rng();
            let h = gue_from_rng(n, &mut rng)?;
            let v = unit_vector_from_rng(n, &mut rng)?;
            let model = ModelConfig::anti_hermitian(v)?;
            let limits = crate::trajectories::large_t_limits(&model, &h)?;
            let far = eigenvalues(&build_matrix(&model, &h, t_far)?)?;
            let mut finite: Vec<Complex64> =
                far.iter().cloned().filter(|z| z.im < 0.5 * t_far).collect();
            if finite.len() != n - 1 {
                worst_match = f64::INFINITY;
                continue;
            }
            finite.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
            let mut expect = limits.finite_limits.clone();
            expect.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
            for (f, e) in finite.iter().zip(expect.iter()) {
                worst_im = worst_im.max(f.im.abs());
                worst_match = worst_match.max((f - e).norm());
            }
            use ndarray_linalg::{Eigh, UPLO};
            let (spec_h, _) = h.eigh(UPLO::Lower)?;
            for (k, e) in expect.iter().enumerate() {
                if !(spec_h[k] <= e.re + 1e-9 && e.re <= spec_h[k + 1] + 1e-9) {
                    interlace_ok = false;
                }
            }
        }
        results.push(CriterionResult::new(
            "limits/anti-hermitian-real",
            worst_im,
            1e-3,
            Direction::AtMost,
            format!("n = 50, t = 1e6, {trials} trials: non-outlier eigenvalues are real"),
        ));
        results.push(CriterionResult::new(
            "limits/anti-hermitian-compression",
            worst_match,
            1e-3,
            Direction::AtMost,
            "far-field eigenvalues match the v-complement compression".into(),
        ));
        results.push(CriterionResult::new(
            "limits/anti-hermitian-interlacing",
            if interlace_ok { 1.0 } else { 0.0 },
            1.0,
            Direction::AtLeast,
            "compression spectrum interlaces Sp(H)".into(),
        ));
    }

    // Additive: far-field eigenvalues match the numerator roots.
    {
        let seed = criterion_seed(master, "limits-additive");
        let n = 50;
        let trials = 20u64;
        let mut worst = 0.0f64;
        for trial in 0..trials {
            let mut rng = SeedSpec::new(seed, trial).rng();
            let g = ginibre_from_rng(n, &mut rng)?;
            let v = unit_vector_from_rng(n, &mut rng)?;
            let w = unit_vector_from_rng(n, &mut rng)?;
            let model = ModelConfig::additive(v, w)?;
            let limits = crate::trajectories::large_t_limits(&model, &g)?;
            if limits.finite_limits.len() != n - 1 {
                worst = f64::INFINITY;
                continue;
            }
            let far = eigenvalues(&build_matrix(&model, &g, t_far)?)?;
            // Drop the single escaping outlier (largest modulus).
            let mut sorted: Vec<Complex64> = far.to_vec();
            sorted.sort_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap());
            let finite = &sorted[..n - 1];
            let perm = match_sets(finite, &limits.finite_limits)?;
            for (j, &pj) in perm.iter().enumerate() {
                worst = worst.max((finite[j] - limits.finite_limits[pj]).norm());
            }
        }
        results.push(CriterionResult::new(
            "limits/additive-numerator-roots",
            worst,
            1e-3,
            Direction::AtMost,
            format!("n = 50, t = 1e6, {trials} trials"),
        ));
    }

    Ok(results)
}

// --- criterion 11: isotropic resolvent bound ------------------------------

fn local_law(master: u64) -> Result<Vec<CriterionResult>> {
    let seed = criterion_seed(master, "local-law");
    let n = 200;
    let trials = 200u64;
    let z = Complex64::new(2.5, 0.5);
    let hits: usize = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<bool> {
            let mut rng = SeedSpec::new(seed, trial).rng();
            let h = gue_from_rng(n, &mut rng)?;
            let v = unit_vector_from_rng(n, &mut rng)?;
            Ok(local_law_margin(&h, &v, z, 0.1)? <= 1.0)
        })
        .collect::<Result<Vec<bool>>>()?
        .into_iter()
        .filter(|&b| b)
        .count();
    Ok(vec![CriterionResult::new(
        "local-law/margin",
        hits as f64 / trials as f64,
        0.95,
        Direction::AtLeast,
        format!("n = {n}, z = 2.5 + 0.5i, eps = 0.1, {trials} trials"),
    )])
}

// --- criterion 12: ensemble statistics ------------------------------------

fn ensembles_suite(master: u64) -> Result<Vec<CriterionResult>> {
    let mut results = Vec::new();

    // Semicircle mass on [-1, 1].
    {
        let seed = criterion_seed(master, "semicircle");
        let n = 200;
        let trials = 50u64;
        let mass: f64 = (0..trials)
            .into_par_iter()
            .map(|trial| -> Result<f64> {
                use ndarray_linalg::{Eigh, UPLO};
                let h = gue_from_rng(n, &mut SeedSpec::new(seed, trial).rng())?;
                let (w, _) = h.eigh(UPLO::Lower)?;
                Ok(w.iter().filter(|x| x.abs() <= 1.0).count() as f64 / n as f64)
            })
            .collect::<Result<Vec<f64>>>()?
            .iter()
            .sum::<f64>()
            / trials as f64;
        let predicted = 3f64.sqrt() / (2.0 * std::f64::consts::PI) + 1.0 / 3.0;
        results.push(CriterionResult::new(
            "ensembles/semicircle-mass",
            (mass - predicted).abs(),
            0.03,
            Direction::AtMost,
            format!("n = {n}, {trials} trials: mass {mass:.4} vs {predicted:.4}"),
        ));
    }

    // Circular-law containment.
    {
        let seed = criterion_seed(master, "circular");
        let n = 200;
        let trials = 50u64;
        let fraction: f64 = (0..trials)
            .into_par_iter()
            .map(|trial| -> Result<f64> {
                let g = ginibre_from_rng(n, &mut SeedSpec::new(seed, trial).rng())?;
                let vals = eigenvalues(&g)?;
                Ok(vals.iter().filter(|z| z.norm() <= 1.05).count() as f64 / n as f64)
            })
            .collect::<Result<Vec<f64>>>()?
            .iter()
            .sum::<f64>()
            / trials as f64;
        results.push(CriterionResult::new(
            "ensembles/circular-containment",
            fraction,
            0.99,
            Direction::AtLeast,
            format!("n = {n}, {trials} trials: mean fraction inside radius 1.05"),
        ));
    }

    // Kostlan radii count at r = 0.8.
    {
        let seed = criterion_seed(master, "kostlan");
        let n = 50;
        let trials = 500u64;
        let r = 0.8;
        let counts: Vec<f64> = (0..trials)
            .into_par_iter()
            .map(|trial| -> Result<f64> {
                let g = ginibre_from_rng(n, &mut SeedSpec::new(seed, trial).rng())?;
                let vals = eigenvalues(&g)?;
                Ok(vals.iter().filter(|z| z.norm_sqr() > r * r).count() as f64)
            })
            .collect::<Result<Vec<f64>>>()?;
        let mean = counts.iter().sum::<f64>() / trials as f64;
        let var =
            counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (trials as f64 - 1.0);
        let se = (var / trials as f64).sqrt();
        let predicted = kostlan_expected_count(n, r);
        let z = ((mean - predicted) / se).abs();
        results.push(CriterionResult::new(
            "ensembles/kostlan-radii",
            z,
            3.0,
            Direction::AtMost,
            format!(
                "n = {n}, r = {r}, {trials} trials: mean {mean:.3} vs predicted {predicted:.3} (se {se:.3})"
            ),
        ));
    }

    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_rejected() {
        assert!(matches!(
            run_suite("no-such-suite", DEFAULT_MASTER_SEED),
            Err(LabError::InvalidConfig(_))
        ));
    }

    #[test]
    fn identities_suite_passes() {
        let results = identities(DEFAULT_MASTER_SEED).unwrap();
        for r in &results {
            assert!(r.pass, "{}", r.line());
        }
    }

    #[test]
    fn result_line_format() {
        let r = CriterionResult::new("demo/x", 0.5, 1.0, Direction::AtMost, "d".into());
        assert!(r.pass);
        assert!(r.line().starts_with("PASS demo/x"));
        let r = CriterionResult::new("demo/y", 2.0, 1.0, Direction::AtMost, "d".into());
        assert!(!r.pass);
        assert!(r.line().starts_with("FAIL demo/y"));
    }
}
