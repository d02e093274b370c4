//! Experiment runner for the rank-one perturbation lab.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rmt_lab::experiment::{self, ExperimentConfig};
use rmt_lab::verify;

#[derive(Parser)]
#[command(
    name = "rmt-lab",
    about = "Spectra, trajectories, and verification for rank-one non-Hermitian perturbations of random matrices",
    version
)]
struct Cli {
    /// TOML config file; CLI flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default, Clone)]
struct CommonFlags {
    /// Model: ginibre, gue, haar, additive, anti-hermitian, multiplicative.
    #[arg(long)]
    model: Option<String>,

    /// Matrix dimension.
    #[arg(long)]
    n: Option<usize>,

    /// Single coupling value or named regime (mu_over_sqrt_n:<mu>, n_pow:<alpha>).
    #[arg(long)]
    t: Option<String>,

    /// Coupling range a:b:steps.
    #[arg(long, value_name = "A:B:STEPS")]
    t_range: Option<String>,

    /// Number of Monte Carlo trials.
    #[arg(long)]
    trials: Option<usize>,

    /// Master seed (also via the RMT_LAB_SEED environment variable).
    #[arg(long)]
    seed: Option<u64>,

    /// Exponent for localization domains.
    #[arg(long)]
    epsilon: Option<f64>,

    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Also render an SVG plot where supported.
    #[arg(long)]
    svg: bool,

    /// Additive second direction: random (independent uniform) or same (w = v).
    #[arg(long, value_name = "random|same")]
    w: Option<String>,
}

impl CommonFlags {
    fn apply(&self, config: &mut ExperimentConfig) {
        if let Some(model) = &self.model {
            config.model = Some(model.clone());
        }
        if let Some(n) = self.n {
            config.n = n;
        }
        if let Some(t) = &self.t {
            config.t = Some(t.clone());
        }
        if let Some(range) = &self.t_range {
            config.t = Some(range.clone());
        }
        if let Some(trials) = self.trials {
            config.trials = trials;
        }
        if let Some(seed) = self.seed {
            config.seed = Some(seed);
        }
        if let Some(epsilon) = self.epsilon {
            config.epsilon = epsilon;
        }
        if let Some(out) = &self.out {
            config.out = out.clone();
        }
        if self.svg {
            config.svg = true;
        }
        if let Some(w) = &self.w {
            config.w_mode = w.clone();
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Draw spectra of an ensemble or a perturbed family at fixed coupling.
    Sample {
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Track eigenvalue paths over a coupling range.
    Trajectories {
        #[command(flatten)]
        common: CommonFlags,

        /// Initial number of grid steps (refined adaptively as needed).
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Separation reports, outlier predictions, and threshold counts.
    Outlier {
        #[command(flatten)]
        common: CommonFlags,

        /// Analyses to run (repeatable): separation, prediction, counts.
        #[arg(long = "analysis")]
        analyses: Vec<String>,

        /// Count eigenvalues with imaginary part above this threshold.
        #[arg(long)]
        y: Option<f64>,

        /// Rank of the multiplicative perturbation.
        #[arg(long)]
        rank: Option<usize>,
    },
    /// Sample Gaussian power series and export zero clouds.
    Gaf {
        #[command(flatten)]
        common: CommonFlags,

        /// Series truncation (defaults to the tail criterion for the radius).
        #[arg(long)]
        truncation: Option<usize>,

        /// Disk radius for zero finding (inside the unit disk).
        #[arg(long)]
        radius: Option<f64>,

        /// Real part of the level c in g - c.
        #[arg(long, default_value_t = 0.0)]
        target_re: f64,

        /// Imaginary part of the level c.
        #[arg(long, default_value_t = 0.0)]
        target_im: f64,
    },
    /// Eigenvalues with diagonal eigenvector overlaps.
    Overlaps {
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Run verification suites and report one record per criterion.
    Verify {
        /// Suite name, or "all".
        #[arg(default_value = "all")]
        suite: String,

        /// Master seed for the Monte Carlo criteria.
        #[arg(long)]
        seed: Option<u64>,

        /// Also write verify.jsonl into this directory.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,

        /// List available suites and exit.
        #[arg(long)]
        list: bool,
    },
}

fn load_config(path: &Option<PathBuf>) -> Result<ExperimentConfig, rmt_lab::LabError> {
    match path {
        Some(p) => ExperimentConfig::load(p),
        None => Ok(ExperimentConfig::default()),
    }
}

fn run(cli: Cli) -> Result<bool, rmt_lab::LabError> {
    match cli.command {
        Command::Sample { common } => {
            let mut config = load_config(&cli.config)?;
            common.apply(&mut config);
            println!("{}", experiment::run_sample(&config)?);
            Ok(true)
        }
        Command::Trajectories { common, steps } => {
            let mut config = load_config(&cli.config)?;
            common.apply(&mut config);
            if let Some(steps) = steps {
                config.steps = steps;
            }
            println!("{}", experiment::run_trajectories(&config)?);
            Ok(true)
        }
        Command::Outlier { common, analyses, y, rank } => {
            let mut config = load_config(&cli.config)?;
            common.apply(&mut config);
            if !analyses.is_empty() {
                config.analyses = analyses;
            }
            if y.is_some() {
                config.y = y;
                if !config.analyses.iter().any(|a| a == "counts") {
                    config.analyses.push("counts".into());
                }
            }
            if let Some(rank) = rank {
                config.rank = rank;
            }
            println!("{}", experiment::run_outlier(&config)?);
            Ok(true)
        }
        Command::Gaf { common, truncation, radius, target_re, target_im } => {
            let mut config = load_config(&cli.config)?;
            common.apply(&mut config);
            config.gaf_truncation = truncation;
            if let Some(radius) = radius {
                config.radius = radius;
            }
            config.target_re = target_re;
            config.target_im = target_im;
            println!("{}", experiment::run_gaf(&config)?);
            Ok(true)
        }
        Command::Overlaps { common } => {
            let mut config = load_config(&cli.config)?;
            common.apply(&mut config);
            println!("{}", experiment::run_overlaps(&config)?);
            Ok(true)
        }
        Command::Verify { suite, seed, out, list } => {
            if list {
                for name in verify::SUITES {
                    println!("{name}");
                }
                return Ok(true);
            }
            let mut config = load_config(&cli.config)?;
            config.seed = seed.or(config.seed);
            let master = if config.seed.is_some() || std::env::var(experiment::SEED_ENV_VAR).is_ok()
            {
                config.master_seed()
            } else {
                verify::DEFAULT_MASTER_SEED
            };
            let (results, all_pass) = experiment::run_verify(&suite, master, out.as_deref())?;
            for r in &results {
                println!("{}", r.line());
            }
            eprintln!(
                "{} of {} criteria passed (seed {master})",
                results.iter().filter(|r| r.pass).count(),
                results.len()
            );
            Ok(all_pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(rmt_lab::LabError::InvalidConfig(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
