use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use twl::cache::SpectrumCache;
use twl::output::write_report;
use twl::{run, Experiment, ExperimentConfig, HarnessError, EXIT_CHECK_FAILED, EXIT_PASS, EXIT_USAGE};

#[derive(Parser)]
#[command(name = "twl", version, about = "Toeplitz Weyl-law laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration file (key = value).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Random seed; defaults to the first entry of `seeds`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Exit with status 3 when the acceptance thresholds are not met.
    #[arg(long, global = true)]
    check: bool,
    /// Disable the spectrum cache.
    #[arg(long, global = true)]
    no_cache: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Compute (or load) the spectrum and tabulate counting functions.
    Spectrum,
    /// Counting function against the Weyl-law prediction.
    Weyl,
    /// Smoothed trace against its leading term.
    Trace,
    /// Smoothed kernel on the diagonal against its leading term.
    Kernel,
    /// Lie-derivative and pullback identities of the contact flow.
    ContactCheck,
    /// Random instances of the Hessian determinant/signature lemmas.
    HessianCheck {
        #[arg(long, default_value_t = 1000)]
        instances: usize,
    },
    /// Near-diagonal Szegő kernel against the universal model.
    SzegoCheck,
}

fn execute(cli: &Cli) -> Result<bool, HarnessError> {
    if let Some(n) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| HarnessError::Usage(e.to_string()))?;
    }
    let cfg = cli.config.as_deref().map(ExperimentConfig::load).transpose()?;
    let (exp, instances) = match cli.command {
        Command::Spectrum => (Experiment::Spectrum, 0),
        Command::Weyl => (Experiment::Weyl, 0),
        Command::Trace => (Experiment::Trace, 0),
        Command::Kernel => (Experiment::Kernel, 0),
        Command::ContactCheck => (Experiment::ContactCheck, 0),
        Command::HessianCheck { instances } => (Experiment::HessianCheck, instances),
        Command::SzegoCheck => (Experiment::SzegoCheck, 0),
    };
    let seed = cli
        .seed
        .or_else(|| cfg.as_ref().map(|c| c.seeds[0]))
        .unwrap_or(0);
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.as_ref().map(|c| c.output_dir.clone()))
        .unwrap_or_else(|| PathBuf::from("out"));
    let cache = (!cli.no_cache).then(|| SpectrumCache::from_env(&out.join("cache")));
    let report = run(exp, cfg.as_ref(), cache.as_ref(), seed, instances)?;
    let (csv, json) = write_report(&out, &report)?;
    println!(
        "{} {}: {} ({})",
        report.experiment_id,
        report.subcommand,
        if report.check.passed { "pass" } else { "fail" },
        report.check.detail
    );
    println!("wrote {} and {}", csv.display(), json.display());
    Ok(report.check.passed || !cli.check)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { EXIT_PASS as u8 });
        }
    };
    match execute(&cli) {
        Ok(true) => ExitCode::from(EXIT_PASS as u8),
        Ok(false) => ExitCode::from(EXIT_CHECK_FAILED as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
