use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qecbench::config::{ConfigError, RunConfig, TopologyConfig};
use qecbench::{parallel, run_and_emit, RunError};
use qecbench_core::CodeId;

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

/// Run-until-failure benchmarks of small quantum error-correcting codes.
#[derive(Parser)]
#[command(name = "qecbench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample failure iterations and estimate the logical T1.
    Run {
        #[command(flatten)]
        overrides: Overrides,
        /// Output directory.
        #[arg(long, default_value = "qecbench-out")]
        out: PathBuf,
    },
    /// Check a configuration and print it with defaults filled in.
    Validate {
        #[command(flatten)]
        overrides: Overrides,
    },
    /// List the available codes and their qubit layouts.
    Codes,
}

#[derive(Args)]
struct Overrides {
    /// JSON configuration file; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// three_qubit, steane, ft_steane or shor_nine
    #[arg(long)]
    code: Option<String>,
    /// Number of shots.
    #[arg(long)]
    samples: Option<u64>,
    /// Master seed; shot i draws from stream i.
    #[arg(long)]
    seed: Option<u64>,
    /// Cycles after which a surviving shot is censored.
    #[arg(long)]
    max_iterations: Option<u64>,
    /// all_to_all, line, square or square:RxC
    #[arg(long)]
    topology: Option<String>,
}

impl Overrides {
    fn apply(&self) -> Result<RunConfig, ConfigError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(code) = &self.code {
            cfg.code = code.parse::<CodeId>().map_err(|_| ConfigError::Invalid {
                field: "code".into(),
                reason: format!("unknown code `{code}`"),
            })?;
        }
        if let Some(t) = &self.topology {
            cfg.topology = t.parse::<TopologyConfig>()?;
        }
        cfg.samples = self.samples.unwrap_or(cfg.samples);
        cfg.seed = self.seed.unwrap_or(cfg.seed);
        cfg.max_iterations = self.max_iterations.unwrap_or(cfg.max_iterations);
        Ok(cfg)
    }
}

fn load(overrides: &Overrides) -> Result<RunConfig, ExitCode> {
    let checked = overrides
        .apply()
        .and_then(|cfg| cfg.resolve().map(|r| (cfg, r)));
    match checked {
        Ok((cfg, resolved)) => {
            for w in &resolved.warnings {
                eprintln!("warning: {w}");
            }
            Ok(cfg)
        }
        Err(e) => {
            eprintln!("error: {e}");
            Err(ExitCode::from(EXIT_CONFIG))
        }
    }
}

fn list_codes() {
    println!(
        "{:<12} {:>5} {:>8} {:>6}  params",
        "code", "data", "ancilla", "total"
    );
    for code in CodeId::ALL {
        let l = code.layout();
        let params = l
            .params
            .map_or("-".to_string(), |[n, k, d]| format!("[[{n},{k},{d}]]"));
        println!(
            "{:<12} {:>5} {:>8} {:>6}  {params}",
            code.name(),
            l.n_data,
            l.n_ancilla,
            l.n_total
        );
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Codes => {
            list_codes();
            ExitCode::SUCCESS
        }
        Command::Validate { overrides } => match load(&overrides) {
            Ok(cfg) => {
                println!("{}", cfg.to_json());
                ExitCode::SUCCESS
            }
            Err(code) => code,
        },
        Command::Run { overrides, out } => {
            let cfg = match load(&overrides) {
                Ok(cfg) => cfg,
                Err(code) => return code,
            };
            match run_and_emit(&cfg, &out, parallel::thread_count()) {
                Ok(manifest) => {
                    for f in &manifest.files {
                        println!("{}", out.join(&f.path).display());
                    }
                    println!("{}", out.join(qecbench::output::MANIFEST_FILE).display());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(match e {
                        RunError::Config(_) => EXIT_CONFIG,
                        _ => EXIT_RUNTIME,
                    })
                }
            }
        }
    }
}
