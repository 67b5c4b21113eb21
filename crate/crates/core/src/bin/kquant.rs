use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kquant::harness::{run, CachePolicy, Experiment, ExperimentConfig, KRange};

/// Runs Kähler quantization experiments from a JSON config.
#[derive(Parser, Debug)]
#[command(name = "kquant", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment config (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory, overriding the config.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Random seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Level range MIN..MAX (inclusive), replacing the config levels.
    #[arg(long, global = true, value_name = "MIN..MAX")]
    k: Option<String>,

    /// Neither read nor write the Gram cache.
    #[arg(long, global = true)]
    no_cache: bool,

    /// Print every check, not only failures.
    #[arg(short, long, global = true)]
    verbose: bool,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Bergman density, mass identity and balancing defect per level
    Bergman,
    /// Decay rates of the density expansion and the metric error (CP1)
    Rates,
    /// Aubin-Yau sandwich and the step gaps of the lemma chain
    Lemmas,
    /// Convexity of f_k along random geodesics and its derivative at 0
    Geodesic,
    /// Donaldson T-iteration from a perturbed balanced Gram
    Titerate,
    /// K-energy along several paths (CP1)
    Kenergy,
    /// Limit of 2(L_k - L_k(ref)) against the K-energy (CP1)
    Theorem1,
    /// Every experiment available on the configured model.
    All,
}

impl Command {
    fn experiment(self) -> Option<Experiment> {
        Some(match self {
            Command::Bergman => Experiment::Bergman,
            Command::Rates => Experiment::Rates,
            Command::Lemmas => Experiment::Lemmas,
            Command::Geodesic => Experiment::Geodesic,
            Command::Titerate => Experiment::Titerate,
            Command::Kenergy => Experiment::Kenergy,
            Command::Theorem1 => Experiment::Theorem1,
            Command::All => return None,
        })
    }
}

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn load(cli: &Cli) -> kquant::Result<ExperimentConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| kquant::Error::Config("--config PATH is required".into()))?;
    let mut config = ExperimentConfig::load(path)?;
    config.experiments = cli.command.experiment().into_iter().collect();
    if let Some(out) = &cli.out {
        config.output_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        config.seed = Some(seed);
    }
    if let Some(k) = &cli.k {
        config.k_range = Some(k.parse::<KRange>()?);
        config.k_list = None;
        config.k_overrides.clear();
    }
    if cli.no_cache {
        config.cache.policy = CachePolicy::Off;
    }
    config.validate()?;
    Ok(config)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let config = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("kquant: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let report = match run(&config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("kquant: run failed: {e}");
            return ExitCode::from(EXIT_CHECK_FAILED);
        }
    };
    let s = &report.summary;
    for c in &s.checks {
        if cli.verbose || !c.passed {
            let mark = if c.passed { "ok  " } else { "FAIL" };
            let detail = c.detail.as_deref().map(|d| format!(" ({d})")).unwrap_or_default();
            println!(
                "{mark} [{}] {}: {:e} {} {:e}{detail}",
                c.experiment,
                c.name,
                c.value,
                c.relation,
                c.threshold
            );
        }
    }
    let failed = s.failures().count();
    println!(
        "{} checks, {} failed; report in {}",
        s.checks.len(),
        failed,
        report.summary_path.display()
    );
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_CHECK_FAILED)
    }
}
