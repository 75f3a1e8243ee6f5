use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use condibeam::experiment::{run, ConfigError, ExperimentConfig, ExperimentKind, OutputFormat, RunError};
use condibeam::selftest::{run_selftest, Mutation};

const EXIT_CONFIG: u8 = 2;
const EXIT_DOMAIN: u8 = 3;
const EXIT_SELFTEST: u8 = 4;

/// Conditional beam-splitter experiments.
///
/// Experiments: y-matrix, scheme-a, scheme-b, multi-cat, q-grid, wigner-grid,
/// quadrature-grid, prob-scan, povm-demo. `selftest` runs the built-in checks.
#[derive(Parser, Debug)]
#[command(name = "condibeam", version)]
struct Cli {
    /// Experiment name, or `selftest`.
    experiment: String,

    /// TOML config file.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,

    /// csv or json-like.
    #[arg(long)]
    format: Option<String>,

    /// Include the wall-clock duration in json-like output.
    #[arg(long)]
    timing: bool,

    #[arg(long, hide = true)]
    mutate: Option<String>,
}

fn config_failure(e: &ConfigError) -> ExitCode {
    eprintln!("{e}");
    ExitCode::from(EXIT_CONFIG)
}

fn selftest(cli: &Cli) -> ExitCode {
    let mutation = match cli.mutate.as_deref() {
        None => Mutation::None,
        Some("flip-sign") => Mutation::FlipSign,
        Some(other) => return config_failure(&ConfigError::new("mutate", format!("unknown mutation `{other}`"))),
    };
    let report = run_selftest(mutation);
    print!("{}", report.text());
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_SELFTEST)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if cli.experiment == "selftest" {
        return selftest(&cli);
    }

    let kind: ExperimentKind = match cli.experiment.parse() {
        Ok(k) => k,
        Err(e) => return config_failure(&e),
    };
    let Some(path) = &cli.config else {
        return config_failure(&ConfigError::new("config", "--config <path> is required"));
    };
    let raw = match std::fs::read_to_string(path) {
        Ok(s) => s,
        Err(e) => return config_failure(&ConfigError::new("config", format!("{}: {e}", path.display()))),
    };
    let cfg = match ExperimentConfig::parse(&raw) {
        Ok(c) => c,
        Err(e) => return config_failure(&e),
    };
    let format = match cli.format.as_deref().map(str::parse::<OutputFormat>) {
        Some(Ok(f)) => f,
        Some(Err(e)) => return config_failure(&e),
        None => cfg.format.unwrap_or(OutputFormat::JsonLike),
    };
    let out = cli.out.clone().or_else(|| cfg.out.as_ref().map(PathBuf::from));

    let envelope = match run(kind, &cfg, &raw) {
        Ok(env) => env,
        Err(RunError::Config(e)) => return config_failure(&e),
        Err(RunError::Domain(e)) => {
            eprintln!("domain error: {e}");
            return ExitCode::from(EXIT_DOMAIN);
        }
    };
    log::info!("{kind} finished in {:.1} ms", envelope.duration_ms);
    let text = envelope.render(format, cli.timing);
    match out {
        Some(p) => {
            if let Err(e) = std::fs::write(&p, text) {
                eprintln!("cannot write {}: {e}", p.display());
                return ExitCode::FAILURE;
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(text.as_bytes()).and_then(|()| stdout.flush()) {
                Ok(()) => {}
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
                Err(e) => {
                    eprintln!("cannot write to stdout: {e}");
                    return ExitCode::FAILURE;
                }
            }
        }
    }
    ExitCode::SUCCESS
}
