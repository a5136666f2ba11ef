//! Thin CLI over the library: `analyze` runs the full pipeline, `calibrate`
//! checks the Gamma null empirically, `synth` writes a synthetic dataset
//! with known ground truth.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tenet::run::{Correction, Validator};
use tenet::{Error, RunConfig, SynthSpec};

#[derive(Parser)]
#[command(name = "tenet", version, about = "causal networks from transfer entropy")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline: prices -> TE matrices -> validated networks.
    Analyze(AnalyzeArgs),
    /// Monte Carlo check of the Gamma null rejection rates.
    Calibrate(CalibrateArgs),
    /// Generate a synthetic dataset with planted causal couplings.
    Synth(SynthArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// JSON config file mirroring the flags; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    prices: Option<PathBuf>,
    #[arg(long)]
    sectors: Option<PathBuf>,
    /// Return sampling period in minutes.
    #[arg(long)]
    tau: Option<usize>,
    /// Comma-separated lags in minutes, e.g. 1,5,10,20,30,40,50,60.
    #[arg(long, value_delimiter = ',')]
    lags: Option<Vec<usize>>,
    /// Discretization alphabet size.
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    pvalue: Option<f64>,
    #[arg(long, value_parser = parse_correction)]
    correction: Option<Correction>,
    #[arg(long, value_parser = parse_validator)]
    validator: Option<Validator>,
    #[arg(long)]
    surrogates: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Acknowledge the cost of permutation validation at tiny alpha.
    #[arg(long)]
    allow_expensive_surrogates: bool,
}

fn parse_correction(s: &str) -> Result<Correction, String> {
    match s {
        "bonferroni" => Ok(Correction::Bonferroni),
        "none" => Ok(Correction::None),
        other => Err(format!("unknown correction {other}")),
    }
}

fn parse_validator(s: &str) -> Result<Validator, String> {
    match s {
        "gamma" => Ok(Validator::Gamma),
        "permutation" => Ok(Validator::Permutation),
        other => Err(format!("unknown validator {other}")),
    }
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long, default_value_t = 4)]
    bins: usize,
    #[arg(long, default_value_t = 2000)]
    sample_size: usize,
    #[arg(long, default_value_t = 0.01)]
    pvalue: f64,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// JSON file with the synthetic spec (n_series, length, couplings,
    /// noise_std, seed).
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Number of round-robin sector labels.
    #[arg(long, default_value_t = 4)]
    sectors: usize,
}

fn build_config(args: AnalyzeArgs) -> Result<RunConfig, Error> {
    let mut config: RunConfig = match &args.config {
        Some(path) => serde_json::from_slice(&std::fs::read(path)?)?,
        None => RunConfig {
            prices: PathBuf::new(),
            sectors: None,
            tau: 1,
            lags: Vec::new(),
            bins: 4,
            pvalue: 0.01,
            correction: Correction::Bonferroni,
            validator: Validator::Gamma,
            surrogates: 9999,
            seed: 0,
            out: PathBuf::from("tenet-out"),
            allow_expensive_surrogates: false,
            histogram_bins: 50,
        },
    };
    if let Some(v) = args.prices {
        config.prices = v;
    }
    if let Some(v) = args.sectors {
        config.sectors = Some(v);
    }
    if let Some(v) = args.tau {
        config.tau = v;
    }
    if let Some(v) = args.lags {
        config.lags = v;
    }
    if let Some(v) = args.bins {
        config.bins = v;
    }
    if let Some(v) = args.pvalue {
        config.pvalue = v;
    }
    if let Some(v) = args.correction {
        config.correction = v;
    }
    if let Some(v) = args.validator {
        config.validator = v;
    }
    if let Some(v) = args.surrogates {
        config.surrogates = v;
    }
    if let Some(v) = args.seed {
        config.seed = v;
    }
    if let Some(v) = args.out {
        config.out = v;
    }
    if args.allow_expensive_surrogates {
        config.allow_expensive_surrogates = true;
    }
    if config.prices.as_os_str().is_empty() {
        return Err(Error::Config("--prices (or a config file) is required".into()));
    }
    Ok(config)
}

fn run() -> Result<(), Error> {
    let cli = Cli::parse();
    match cli.command {
        Command::Analyze(args) => {
            let config = build_config(args)?;
            let manifest = tenet::analyze(&config)?;
            for lag in &manifest.lags {
                println!(
                    "lag {:>3} min: {} / {} validated links{}",
                    lag.lag_minutes,
                    lag.validated_links,
                    lag.total_pairs,
                    lag.threshold_bits
                        .map_or(String::new(), |t| format!(" (threshold {t:.6} bits)"))
                );
            }
            println!(
                "wrote {} files to {} in {:.1}s",
                manifest.files.len() + 1,
                config.out.display(),
                manifest.wall_time_secs
            );
        }
        Command::Calibrate(args) => {
            let report = tenet::calibrate_gamma_null(
                args.bins,
                args.sample_size,
                args.pvalue,
                args.trials,
                args.seed,
            )?;
            let json = serde_json::to_string_pretty(&report)?;
            match args.out {
                Some(path) => std::fs::write(path, json)?,
                None => println!("{json}"),
            }
        }
        Command::Synth(args) => {
            let spec: SynthSpec = serde_json::from_slice(&std::fs::read(&args.spec)?)?;
            tenet::write_synth_dataset(&spec, &args.out, args.sectors)?;
            println!(
                "wrote prices.csv, sectors.csv, ground_truth.csv to {}",
                args.out.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::init();
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
