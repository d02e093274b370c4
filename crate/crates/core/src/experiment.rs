//! Experiment configuration and the Monte Carlo runners behind the CLI
//! subcommands. Every run is a pure function of its `ExperimentConfig`:
//! trial k draws from the ChaCha stream (master_seed, k), workers may run in
//! any order, and aggregation sorts by trial index, so reruns are
//! byte-identical.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::{
    ginibre_from_rng, gue_from_rng, haar_from_rng, unit_vector_from_rng, SeedSpec,
};
use crate::error::{LabError, Result};
use crate::gaf::{gaf_zeros, required_truncation, sample_gaf};
use crate::io;
use crate::linalg::{dot_herm, eigen_decompose, eigenvalues, CMatrix, CVector};
use crate::models::{build_matrix, predicted_outlier, ModelConfig, ModelKind};
use crate::outliers::{anti_hermitian_domains, count_above, Region};
use crate::overlaps::overlap_matrix;
use crate::trajectories::track;

/// Default master seed when neither the CLI flag, the environment variable,
/// nor a config file provides one.
pub const DEFAULT_SEED: u64 = 20240901;

/// Name of the environment variable carrying the master seed.
pub const SEED_ENV_VAR: &str = "RMT_LAB_SEED";

/// What to build per trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelChoice {
    /// Raw ensembles, no perturbation.
    Ginibre,
    Gue,
    Haar,
    /// Perturbed families.
    Perturbed(ModelKind),
}

impl ModelChoice {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "ginibre" => ModelChoice::Ginibre,
            "gue" => ModelChoice::Gue,
            "haar" => ModelChoice::Haar,
            "additive" => ModelChoice::Perturbed(ModelKind::Additive),
            "anti-hermitian" => ModelChoice::Perturbed(ModelKind::AntiHermitian),
            "multiplicative" => ModelChoice::Perturbed(ModelKind::Multiplicative),
            other => {
                return Err(LabError::InvalidConfig(format!(
                    "unknown model '{other}' (expected ginibre, gue, haar, additive, anti-hermitian, or multiplicative)"
                )))
            }
        })
    }

    pub fn label(&self) -> &'static str {
        match self {
            ModelChoice::Ginibre => "ginibre",
            ModelChoice::Gue => "gue",
            ModelChoice::Haar => "haar",
            ModelChoice::Perturbed(kind) => kind.label(),
        }
    }
}

/// Coupling specification: a single value, an inclusive range with a step
/// count, or a named n-dependent regime.
#[derive(Debug, Clone, PartialEq)]
pub enum TSpec {
    Value(f64),
    Range { a: f64, b: f64, steps: usize },
    /// t = mu / sqrt(n).
    MuOverSqrtN(f64),
    /// t = n^alpha.
    NPow(f64),
}

impl TSpec {
    pub fn parse(s: &str) -> Result<Self> {
        let bad = |detail: &str| LabError::InvalidConfig(format!("bad t specification '{s}': {detail}"));
        if let Some(rest) = s.strip_prefix("mu_over_sqrt_n:") {
            return rest
                .parse::<f64>()
                .map(TSpec::MuOverSqrtN)
                .map_err(|_| bad("expected mu_over_sqrt_n:<float>"));
        }
        if let Some(rest) = s.strip_prefix("n_pow:") {
            return rest
                .parse::<f64>()
                .map(TSpec::NPow)
                .map_err(|_| bad("expected n_pow:<float>"));
        }
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [one] => one.parse::<f64>().map(TSpec::Value).map_err(|_| bad("expected a float")),
            [a, b, steps] => {
                let a = a.parse::<f64>().map_err(|_| bad("range start is not a float"))?;
                let b = b.parse::<f64>().map_err(|_| bad("range end is not a float"))?;
                let steps =
                    steps.parse::<usize>().map_err(|_| bad("step count is not an integer"))?;
                if steps < 2 {
                    return Err(bad("need at least 2 steps"));
                }
                Ok(TSpec::Range { a, b, steps })
            }
            _ => Err(bad("expected <t>, <a>:<b>:<steps>, mu_over_sqrt_n:<mu>, or n_pow:<alpha>")),
        }
    }

    /// Single coupling value (range specs are rejected).
    pub fn single(&self, n: usize) -> Result<f64> {
        match *self {
            TSpec::Value(t) => Ok(t),
            TSpec::MuOverSqrtN(mu) => Ok(mu / (n as f64).sqrt()),
            TSpec::NPow(alpha) => Ok((n as f64).powf(alpha)),
            TSpec::Range { .. } => Err(LabError::InvalidConfig(
                "this subcommand needs a single t, not a range".into(),
            )),
        }
    }

    /// Range endpoints and step count (single values are rejected).
    pub fn range(&self) -> Result<(f64, f64, usize)> {
        match *self {
            TSpec::Range { a, b, steps } => Ok((a, b, steps)),
            _ => Err(LabError::InvalidConfig(
                "this subcommand needs a t range (use --t-range a:b:steps)".into(),
            )),
        }
    }
}

/// One experiment: everything the runners need, deserializable from a TOML
/// config file with every field overridable by a CLI flag.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: Option<String>,
    pub n: usize,
    /// t specification string (see [`TSpec::parse`]).
    pub t: Option<String>,
    pub trials: usize,
    pub seed: Option<u64>,
    pub epsilon: f64,
    pub out: PathBuf,
    pub svg: bool,
    /// "random" or "same" (additive second direction).
    pub w_mode: String,
    /// Which outlier analyses to run: any of "separation", "prediction",
    /// "counts".
    pub analyses: Vec<String>,
    /// Threshold for imaginary-part counting (anti-Hermitian analyses).
    pub y: Option<f64>,
    /// Gaussian series truncation (defaults to the tail criterion).
    pub gaf_truncation: Option<usize>,
    /// Disk radius for zero finding.
    pub radius: f64,
    /// Level c for zeros of g - c.
    pub target_re: f64,
    pub target_im: f64,
    /// Rank of the multiplicative perturbation.
    pub rank: usize,
    /// Initial steps for trajectory grids.
    pub steps: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: None,
            n: 100,
            t: None,
            trials: 1,
            seed: None,
            epsilon: 0.3,
            out: PathBuf::from("out"),
            svg: false,
            w_mode: "random".into(),
            analyses: vec!["separation".into(), "prediction".into()],
            y: None,
            gaf_truncation: None,
            radius: 0.5,
            target_re: 0.0,
            target_im: 0.0,
            rank: 1,
            steps: 200,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        toml::from_str(&text).map_err(|e| LabError::InvalidConfig(format!("{path:?}: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(LabError::InvalidConfig("n must be at least 1".into()));
        }
        if self.trials == 0 {
            return Err(LabError::InvalidConfig("trials must be at least 1".into()));
        }
        if self.w_mode != "random" && self.w_mode != "same" {
            return Err(LabError::InvalidConfig(format!(
                "w_mode must be 'random' or 'same', got '{}'",
                self.w_mode
            )));
        }
        if self.rank == 0 || self.rank >= self.n {
            return Err(LabError::InvalidConfig(format!(
                "rank {} out of range for n = {}",
                self.rank, self.n
            )));
        }
        Ok(())
    }

    /// Master seed resolution order: explicit config/CLI value, then the
    /// RMT_LAB_SEED environment variable, then the built-in default.
    pub fn master_seed(&self) -> u64 {
        if let Some(seed) = self.seed {
            return seed;
        }
        if let Ok(var) = std::env::var(SEED_ENV_VAR) {
            if let Ok(seed) = var.parse::<u64>() {
                return seed;
            }
        }
        DEFAULT_SEED
    }

    pub fn model_choice(&self) -> Result<ModelChoice> {
        let name = self
            .model
            .as_deref()
            .ok_or_else(|| LabError::InvalidConfig("no model given (use --model)".into()))?;
        ModelChoice::parse(name)
    }

    pub fn t_spec(&self) -> Result<TSpec> {
        let spec = self
            .t
            .as_deref()
            .ok_or_else(|| LabError::InvalidConfig("no t given (use --t or --t-range)".into()))?;
        TSpec::parse(spec)
    }

    fn out_path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

/// Base matrix plus model for one trial, drawn from one RNG stream.
fn draw_model(
    choice: ModelChoice,
    config: &ExperimentConfig,
    trial: u64,
) -> Result<(ModelConfig, CMatrix)> {
    let kind = match choice {
        ModelChoice::Perturbed(kind) => kind,
        _ => {
            return Err(LabError::InvalidConfig(format!(
                "model '{}' has no coupling; this subcommand needs a perturbed family",
                choice.label()
            )))
        }
    };
    let n = config.n;
    let mut rng = SeedSpec::new(config.master_seed(), trial).rng();
    match kind {
        ModelKind::Additive => {
            let base = ginibre_from_rng(n, &mut rng)?;
            let v = unit_vector_from_rng(n, &mut rng)?;
            let w = if config.w_mode == "same" { v.clone() } else { unit_vector_from_rng(n, &mut rng)? };
            Ok((ModelConfig::additive(v, w)?, base))
        }
        ModelKind::AntiHermitian => {
            let base = gue_from_rng(n, &mut rng)?;
            let v = unit_vector_from_rng(n, &mut rng)?;
            Ok((ModelConfig::anti_hermitian(v)?, base))
        }
        ModelKind::Multiplicative => {
            let base = haar_from_rng(n, &mut rng)?;
            if config.rank == 1 {
                let v = unit_vector_from_rng(n, &mut rng)?;
                Ok((ModelConfig::multiplicative(v)?, base))
            } else {
                // Orthonormalize d independent directions by Gram-Schmidt.
                let mut dirs: Vec<CVector> = Vec::with_capacity(config.rank);
                while dirs.len() < config.rank {
                    let mut v = unit_vector_from_rng(n, &mut rng)?;
                    for u in &dirs {
                        let overlap = dot_herm(u.view(), v.view());
                        v = &v - &u.mapv(|x| x * overlap);
                    }
                    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                    if norm < 1e-8 {
                        continue;
                    }
                    dirs.push(v.mapv(|z| z / norm));
                }
                Ok((ModelConfig::multiplicative_rank_d(dirs)?, base))
            }
        }
    }
}

fn draw_ensemble(choice: ModelChoice, n: usize, seed: SeedSpec) -> Result<CMatrix> {
    let mut rng = seed.rng();
    match choice {
        ModelChoice::Ginibre => ginibre_from_rng(n, &mut rng),
        ModelChoice::Gue => gue_from_rng(n, &mut rng),
        ModelChoice::Haar => haar_from_rng(n, &mut rng),
        ModelChoice::Perturbed(_) => unreachable!("callers dispatch perturbed models separately"),
    }
}

/// `sample`: spectra of an ensemble (t = 0) or of G(t) at a single coupling.
pub fn run_sample(config: &ExperimentConfig) -> Result<String> {
    config.validate()?;
    let choice = config.model_choice()?;
    let label = choice.label().to_string();
    let rows: Vec<(u64, f64, Vec<Complex64>)> = match choice {
        ModelChoice::Perturbed(_) => {
            let t = config.t_spec()?.single(config.n)?;
            (0..config.trials as u64)
                .into_par_iter()
                .map(|trial| -> Result<(u64, f64, Vec<Complex64>)> {
                    let (model, base) = draw_model(choice, config, trial)?;
                    let vals = eigenvalues(&build_matrix(&model, &base, t)?)?;
                    Ok((trial, t, vals.to_vec()))
                })
                .collect::<Result<Vec<_>>>()?
        }
        _ => (0..config.trials as u64)
            .into_par_iter()
            .map(|trial| -> Result<(u64, f64, Vec<Complex64>)> {
                let m = draw_ensemble(choice, config.n, SeedSpec::new(config.master_seed(), trial))?;
                let vals = eigenvalues(&m)?;
                Ok((trial, 0.0, vals.to_vec()))
            })
            .collect::<Result<Vec<_>>>()?,
    };
    let mut csv = io::SpectrumCsv::new();
    for (trial, t, vals) in &rows {
        csv.push(&label, *trial, *t, vals);
    }
    let path = config.out_path("spectra.csv");
    csv.finish(&path)?;
    Ok(format!(
        "wrote {} eigenvalues x {} trials to {}",
        config.n,
        config.trials,
        path.display()
    ))
}

/// `trajectories`: tracked eigenvalue paths over a coupling range.
pub fn run_trajectories(config: &ExperimentConfig) -> Result<String> {
    config.validate()?;
    let choice = config.model_choice()?;
    let (a, b, steps) = match config.t_spec()? {
        TSpec::Range { a, b, steps } => (a, b, steps),
        other => {
            let t = other.single(config.n)?;
            return Err(LabError::InvalidConfig(format!(
                "trajectories need a t range, got single t = {t}; use --t-range a:b:steps"
            )));
        }
    };
    let label = choice.label().to_string();
    let bundles: Vec<(u64, crate::trajectories::TrajectoryBundle)> = (0..config.trials as u64)
        .into_par_iter()
        .map(|trial| -> Result<(u64, crate::trajectories::TrajectoryBundle)> {
            let (model, base) = draw_model(choice, config, trial)?;
            Ok((trial, track(&model, &base, a, b, steps)?))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut csv = io::TrajectoryCsv::new();
    for (trial, bundle) in &bundles {
        let indices = io::base_grid_indices(bundle, steps);
        csv.push(&label, *trial, bundle, &indices);
    }
    let csv_path = config.out_path("trajectories.csv");
    csv.finish(&csv_path)?;

    let mut summary = format!(
        "wrote {} paths x {} grid points x {} trials to {}",
        config.n,
        steps + 1,
        config.trials,
        csv_path.display()
    );
    if config.svg {
        let only_bundles: Vec<crate::trajectories::TrajectoryBundle> =
            bundles.iter().map(|(_, b)| b.clone()).collect();
        let svg_path = config.out_path("trajectories.svg");
        io::write_text(&svg_path, &io::trajectory_svg(&only_bundles))?;
        summary.push_str(&format!("; plot in {}", svg_path.display()));
    }
    let min_gap = bundles.iter().map(|(_, b)| b.min_gap).fold(f64::INFINITY, f64::min);
    let refinements: usize = bundles.iter().map(|(_, b)| b.refinements).sum();
    summary.push_str(&format!("; min gap {min_gap:.3e}, {refinements} refinements"));
    Ok(summary)
}

/// Per-trial record emitted by the `outlier` subcommand.
#[derive(Debug, Serialize)]
pub struct OutlierRecord {
    pub model: String,
    pub trial: u64,
    pub t: f64,
    pub satisfied: Option<bool>,
    pub outlier_count: Option<usize>,
    pub margin: Option<f64>,
    pub outlier_re: Option<f64>,
    pub outlier_im: Option<f64>,
    pub predicted_re: Option<f64>,
    pub predicted_im: Option<f64>,
    pub prediction_gap: Option<f64>,
    pub count_above_y: Option<usize>,
}

/// `outlier`: separation reports, prediction gaps, and threshold counts.
pub fn run_outlier(config: &ExperimentConfig) -> Result<String> {
    config.validate()?;
    let choice = config.model_choice()?;
    let kind = match choice {
        ModelChoice::Perturbed(kind) => kind,
        _ => {
            return Err(LabError::InvalidConfig(
                "outlier analysis needs a perturbed family".into(),
            ))
        }
    };
    let t = config.t_spec()?.single(config.n)?;
    let n = config.n;
    let want = |name: &str| config.analyses.iter().any(|a| a == name);

    let records: Vec<OutlierRecord> = (0..config.trials as u64)
        .into_par_iter()
        .map(|trial| -> Result<OutlierRecord> {
            let (model, base) = draw_model(choice, config, trial)?;
            let vals = eigenvalues(&build_matrix(&model, &base, t)?)?.to_vec();
            let mut record = OutlierRecord {
                model: choice.label().into(),
                trial,
                t,
                satisfied: None,
                outlier_count: None,
                margin: None,
                outlier_re: None,
                outlier_im: None,
                predicted_re: None,
                predicted_im: None,
                prediction_gap: None,
                count_above_y: None,
            };
            if want("separation") {
                let domains: Option<(Region, Region)> = match kind {
                    ModelKind::Additive if t.abs() > 2.2 => Some((
                        Region::disk(Complex64::new(t, 0.0), 1.0),
                        Region::disk(Complex64::new(0.0, 0.0), 1.1),
                    )),
                    ModelKind::AntiHermitian if t > 1.0 => {
                        Some(anti_hermitian_domains(n, t, config.epsilon)?)
                    }
                    ModelKind::Multiplicative if t != 0.0 && t.abs() < 1.0 => Some((
                        Region::disk(Complex64::new(0.0, 0.0), 0.6),
                        Region::Annulus { inner: 0.85, outer: f64::INFINITY },
                    )),
                    _ => None,
                };
                if let Some((d1, d2)) = domains {
                    let expected = match kind {
                        ModelKind::Multiplicative => model.rank(),
                        _ => 1,
                    };
                    let report =
                        crate::outliers::detect_separation_count(&vals, &d1, &d2, expected)?;
                    record.satisfied = Some(report.satisfied);
                    record.outlier_count = Some(report.outlier_count);
                    record.margin = Some(report.margin);
                    if let Some(z) = report.outlier {
                        record.outlier_re = Some(z.re);
                        record.outlier_im = Some(z.im);
                    }
                }
            }
            if want("prediction") {
                if let Ok(prediction) = predicted_outlier(&model, &base, t, n) {
                    record.predicted_re = Some(prediction.location.re);
                    record.predicted_im = Some(prediction.location.im);
                    let nearest = vals
                        .iter()
                        .map(|z| (z - prediction.location).norm())
                        .fold(f64::INFINITY, f64::min);
                    record.prediction_gap = Some(nearest);
                }
            }
            if want("counts") {
                if let Some(y) = config.y {
                    record.count_above_y = Some(count_above(&vals, y));
                }
            }
            Ok(record)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut jsonl = String::new();
    for record in &records {
        jsonl.push_str(
            &serde_json::to_string(record)
                .map_err(|e| LabError::InvalidConfig(format!("serialization failure: {e}")))?,
        );
        jsonl.push('\n');
    }
    let path = config.out_path("outliers.jsonl");
    io::write_text(&path, &jsonl)?;

    let satisfied: Vec<bool> = records.iter().filter_map(|r| r.satisfied).collect();
    let mut summary = format!("wrote {} records to {}", records.len(), path.display());
    if !satisfied.is_empty() {
        let freq =
            satisfied.iter().filter(|&&b| b).count() as f64 / satisfied.len() as f64;
        summary.push_str(&format!("; separation frequency {freq:.3}"));
    }
    let gaps: Vec<f64> = records.iter().filter_map(|r| r.prediction_gap).collect();
    if !gaps.is_empty() {
        let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
        summary.push_str(&format!("; mean |nearest - predicted| {mean:.4}"));
    }
    if let Some(y) = config.y {
        let counts: Vec<usize> = records.iter().filter_map(|r| r.count_above_y).collect();
        if !counts.is_empty() {
            let mean = counts.iter().sum::<usize>() as f64 / counts.len() as f64;
            summary.push_str(&format!("; mean count above y={y}: {mean:.3}"));
            if kind == ModelKind::AntiHermitian && t > 0.0 && y > 0.0 {
                let predicted = crate::models::expected_count(n, t, y)?;
                summary.push_str(&format!(" (asymptotic {predicted:.3})"));
            }
        }
    }
    Ok(summary)
}

/// `gaf`: sampled zero clouds of g - c in a disk.
pub fn run_gaf(config: &ExperimentConfig) -> Result<String> {
    config.validate()?;
    let r = config.radius;
    if !(0.0 < r && r < 1.0) {
        return Err(LabError::InvalidConfig(format!("radius {r} outside (0, 1)")));
    }
    let k = config.gaf_truncation.unwrap_or_else(|| required_truncation(r));
    let c = Complex64::new(config.target_re, config.target_im);
    let clouds: Vec<Vec<Complex64>> = (0..config.trials as u64)
        .into_par_iter()
        .map(|trial| -> Result<Vec<Complex64>> {
            let gaf = sample_gaf(k, SeedSpec::new(config.master_seed(), trial))?;
            gaf_zeros(&gaf, c, r)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut csv = io::PointCsv::new();
    for (trial, cloud) in clouds.iter().enumerate() {
        csv.push(trial as u64, cloud);
    }
    let path = config.out_path("gaf_zeros.csv");
    csv.finish(&path)?;
    let mean = clouds.iter().map(Vec::len).sum::<usize>() as f64 / clouds.len() as f64;
    Ok(format!(
        "wrote {} zero clouds (K = {k}, |z| <= {r}) to {}; mean count {mean:.4}",
        config.trials,
        path.display()
    ))
}

/// `overlaps`: eigenvalues with diagonal overlaps, per trial.
pub fn run_overlaps(config: &ExperimentConfig) -> Result<String> {
    config.validate()?;
    let choice = config.model_choice()?;
    let rows: Vec<(u64, Vec<Complex64>, Vec<f64>)> = (0..config.trials as u64)
        .into_par_iter()
        .map(|trial| -> Result<(u64, Vec<Complex64>, Vec<f64>)> {
            let matrix = match choice {
                ModelChoice::Perturbed(_) => {
                    let t = config.t_spec()?.single(config.n)?;
                    let (model, base) = draw_model(choice, config, trial)?;
                    build_matrix(&model, &base, t)?
                }
                _ => draw_ensemble(choice, config.n, SeedSpec::new(config.master_seed(), trial))?,
            };
            let es = eigen_decompose(&matrix)?;
            let o = overlap_matrix(&es)?;
            Ok((trial, es.values.to_vec(), o.diagonal()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut csv = io::OverlapCsv::new();
    for (trial, values, diag) in &rows {
        csv.push(*trial, values, diag);
    }
    let path = config.out_path("overlaps.csv");
    csv.finish(&path)?;
    let mean_diag: f64 = rows
        .iter()
        .flat_map(|(_, _, d)| d.iter())
        .sum::<f64>()
        / rows.iter().map(|(_, _, d)| d.len()).sum::<usize>() as f64;
    Ok(format!(
        "wrote {} eigenvalue/overlap rows to {}; mean diagonal overlap {mean_diag:.3}",
        config.n * config.trials,
        path.display()
    ))
}

/// `verify`: run suites, write JSONL records, return (results, all_pass).
pub fn run_verify(
    suite: &str,
    master_seed: u64,
    out: Option<&Path>,
) -> Result<(Vec<crate::verify::CriterionResult>, bool)> {
    let results = if suite == "all" {
        crate::verify::run_all(master_seed)?
    } else {
        crate::verify::run_suite(suite, master_seed)?
    };
    if let Some(dir) = out {
        let mut jsonl = String::new();
        for r in &results {
            jsonl.push_str(&serde_json::to_string(r).map_err(|e| {
                LabError::InvalidConfig(format!("serialization failure: {e}"))
            })?);
            jsonl.push('\n');
        }
        io::write_text(&dir.join("verify.jsonl"), &jsonl)?;
    }
    let all_pass = results.iter().all(|r| r.pass);
    Ok((results, all_pass))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Mutex;

    // Env-var tests share process state; serialize them.
    static ENV_LOCK: Mutex<()> = Mutex::new(());

    #[test]
    fn t_spec_parsing() {
        assert_eq!(TSpec::parse("2.5").unwrap(), TSpec::Value(2.5));
        assert_eq!(
            TSpec::parse("-30:30:200").unwrap(),
            TSpec::Range { a: -30.0, b: 30.0, steps: 200 }
        );
        assert_eq!(TSpec::parse("mu_over_sqrt_n:2").unwrap(), TSpec::MuOverSqrtN(2.0));
        assert_eq!(TSpec::parse("n_pow:-0.7").unwrap(), TSpec::NPow(-0.7));
        assert!(TSpec::parse("a:b").is_err());
        assert!(TSpec::parse("1:2:1").is_err());

        assert_eq!(TSpec::MuOverSqrtN(2.0).single(100).unwrap(), 0.2);
        let t = TSpec::NPow(-0.7).single(250).unwrap();
        assert!((t - (250f64).powf(-0.7)).abs() < 1e-15);
        assert!(TSpec::Range { a: 0.0, b: 1.0, steps: 2 }.single(10).is_err());
    }

    #[test]
    fn model_choice_parsing() {
        assert_eq!(ModelChoice::parse("ginibre").unwrap(), ModelChoice::Ginibre);
        assert_eq!(
            ModelChoice::parse("anti-hermitian").unwrap(),
            ModelChoice::Perturbed(ModelKind::AntiHermitian)
        );
        assert!(ModelChoice::parse("wishart").is_err());
    }

    #[test]
    fn seed_resolution_order() {
        let _guard = ENV_LOCK.lock().unwrap();
        let mut config = ExperimentConfig { seed: Some(7), ..Default::default() };
        assert_eq!(config.master_seed(), 7);
        config.seed = None;
        std::env::set_var(SEED_ENV_VAR, "99");
        assert_eq!(config.master_seed(), 99);
        std::env::remove_var(SEED_ENV_VAR);
        assert_eq!(config.master_seed(), DEFAULT_SEED);
    }

    #[test]
    fn config_from_toml_and_validation() {
        let _guard = ENV_LOCK.lock().unwrap();
        let text = r#"
model = "additive"
n = 16
t = "0.5"
trials = 3
seed = 11
w_mode = "same"
"#;
        let config: ExperimentConfig = toml::from_str(text).unwrap();
        assert_eq!(config.n, 16);
        assert_eq!(config.master_seed(), 11);
        config.validate().unwrap();

        let bad: std::result::Result<ExperimentConfig, _> = toml::from_str("nonsense_key = 3");
        assert!(bad.is_err());

        let zero = ExperimentConfig { n: 0, ..Default::default() };
        assert!(zero.validate().is_err());
    }

    #[test]
    fn sample_run_is_deterministic() {
        let dir = tempdir();
        let config = ExperimentConfig {
            model: Some("ginibre".into()),
            n: 8,
            trials: 2,
            seed: Some(5),
            out: dir.clone(),
            ..Default::default()
        };
        run_sample(&config).unwrap();
        let first = std::fs::read(dir.join("spectra.csv")).unwrap();
        run_sample(&config).unwrap();
        let second = std::fs::read(dir.join("spectra.csv")).unwrap();
        assert_eq!(first, second);
        let text = String::from_utf8(first).unwrap();
        assert_eq!(text.lines().count(), 1 + 8 * 2);
        assert!(text.starts_with("model,trial,t,re,im\n"));
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn trajectory_run_row_counts() {
        let dir = tempdir();
        let config = ExperimentConfig {
            model: Some("additive".into()),
            n: 4,
            t: Some("-2:2:8".into()),
            trials: 2,
            seed: Some(3),
            out: dir.clone(),
            svg: true,
            ..Default::default()
        };
        let summary = run_trajectories(&config).unwrap();
        assert!(summary.contains("4 paths"));
        let text = std::fs::read_to_string(dir.join("trajectories.csv")).unwrap();
        assert_eq!(text.lines().count(), 1 + 4 * 9 * 2);
        assert!(dir.join("trajectories.svg").exists());
        std::fs::remove_dir_all(&dir).ok();
    }

    fn tempdir() -> PathBuf {
        let dir = std::env::temp_dir().join(format!(
            "rmt-lab-test-{}-{}",
            std::process::id(),
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .unwrap()
                .as_nanos()
        ));
        std::fs::create_dir_all(&dir).unwrap();
        dir
    }
}
