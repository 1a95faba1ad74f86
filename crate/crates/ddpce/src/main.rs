//! Experiment CLI: `run` a full tempering sweep, `fit` a single surrogate
//! from CSV data, `sample` input realizations, or `basis` a reloadable
//! orthonormal basis.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ddpce::harness::{emit_report, run_experiment, ExperimentConfig};
use ddpce::regression::{assemble_design, fit, sparse_fit, Scheme, SparseStop};
use ddpce::sampling::{draw_samples, load_samples, save_samples};
use ddpce::surrogate::SurrogateModel;
use ddpce::{Error, MultivariateBasis, Result};

#[derive(Parser)]
#[command(name = "ddpce", version, about = "Data-driven PCE surrogates with tempered Christoffel weighting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full experiment described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `output_dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides both seeds: train = S, reference = S + 1000003.
        #[arg(long)]
        seed_override: Option<u64>,
    },
    /// Draw input samples from the config's distributions into a CSV file.
    Sample {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build an orthonormal basis from a samples CSV and export it.
    Basis {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        degree: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a surrogate to a samples CSV (with a y column) and export it.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        degree: usize,
        /// Weighting scheme: `ols`, `cls`, or `alpha:<exponent>`.
        #[arg(long, default_value = "ols")]
        scheme: String,
        /// Sparse selection: `target:<k>` or `epsilon:<x>`.
        #[arg(long)]
        sparse: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Run { config, out, seed_override } => {
            let mut cfg = ExperimentConfig::from_file(&config)?;
            if let Some(seed) = seed_override {
                cfg.seed_train = seed;
                cfg.seed_ref = seed.wrapping_add(1_000_003);
            }
            let dir = out
                .or_else(|| cfg.output_dir.clone())
                .ok_or_else(|| Error::Config("no output directory: pass --out or set output_dir".into()))?;
            let report = run_experiment(&cfg)?;
            emit_report(&report, &dir)?;

            println!(
                "reference: mean {} std {} ({} samples)",
                report.reference.mean, report.reference.std, cfg.ref_size
            );
            println!("case,p5_dev,p95_dev,mean_dev,std_dev,score_lr");
            for row in &report.rows {
                println!(
                    "{},{:.4},{:.4},{:.4},{:.4},{:.4}",
                    row.label, row.p5_dev, row.p95_dev, row.mean_dev, row.std_dev, row.score_lr
                );
            }
            for w in &report.provenance.warnings {
                eprintln!("warning: {w}");
            }
            for (case, err) in &report.failures {
                eprintln!("warning: case {case} failed: {err}");
            }
            println!("report written to {}", dir.display());
            Ok(())
        }
        Command::Sample { config, count, seed, out } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let samples = draw_samples(&cfg.input, count, seed)?;
            save_samples(&samples, &out)?;
            println!("wrote {} samples ({} dims) to {}", count, cfg.input.dim(), out.display());
            Ok(())
        }
        Command::Basis { input, degree, out } => {
            let samples = load_samples(&input)?;
            let basis = MultivariateBasis::build(samples.x(), degree)?;
            std::fs::write(&out, basis.to_text())?;
            println!(
                "built basis: d = {}, p = {}, N = {} -> {}",
                basis.input_dim(),
                degree,
                basis.len(),
                out.display()
            );
            Ok(())
        }
        Command::Fit { input, degree, scheme, sparse, out } => {
            let samples = load_samples(&input)?;
            let y = samples
                .y()
                .ok_or_else(|| Error::Config(format!("{} has no y column", input.display())))?
                .clone();
            let basis = MultivariateBasis::build(samples.x(), degree)?;
            let design = assemble_design(&basis, &samples)?;
            let scheme = parse_scheme(&scheme)?;
            let result = match sparse.as_deref() {
                None => fit(&design, &y, scheme)?,
                Some(s) => sparse_fit(&design, &y, scheme, parse_sparse(s)?)?,
            };
            println!(
                "fit: scheme {} score_lr {:.4} weighted {:.4} cond(G) {:.3e} cond(G_w) {:.3e} rms {:.6e} active {}",
                scheme.label(),
                result.diagnostics.score_lr(),
                result.weighted.score_lr,
                result.diagnostics.gram_condition(),
                result.weighted.gram_condition,
                result.residual_rms,
                result.active_set.len()
            );
            let model = SurrogateModel::new(basis, &result)?;
            model.save(&out)?;
            println!("model written to {}", out.display());
            Ok(())
        }
    }
}

fn parse_scheme(s: &str) -> Result<Scheme> {
    match s {
        "ols" => Ok(Scheme::Ols),
        "cls" => Ok(Scheme::Cls),
        other => {
            if let Some(a) = other.strip_prefix("alpha:") {
                let a: f64 = a
                    .parse()
                    .map_err(|_| Error::Config(format!("malformed tempering exponent {a:?}")))?;
                Ok(Scheme::Tempered(a))
            } else {
                Err(Error::Config(format!(
                    "scheme must be `ols`, `cls` or `alpha:<exponent>`, got {other:?}"
                )))
            }
        }
    }
}

fn parse_sparse(s: &str) -> Result<SparseStop> {
    if let Some(k) = s.strip_prefix("target:") {
        let k: usize =
            k.parse().map_err(|_| Error::Config(format!("malformed sparsity target {k:?}")))?;
        return Ok(SparseStop::TargetSparsity(k));
    }
    if let Some(e) = s.strip_prefix("epsilon:") {
        let e: f64 =
            e.parse().map_err(|_| Error::Config(format!("malformed epsilon {e:?}")))?;
        return Ok(SparseStop::Epsilon(e));
    }
    Err(Error::Config(format!("sparse must be `target:<k>` or `epsilon:<x>`, got {s:?}")))
}
