//! `rosenfied` — build and verify Fiedler pencils of Rosenbrock system
//! matrices.
//!
//! Exit codes: 0 success, 1 failed checks (report still emitted) or failed
//! generation, 2 usage or JSON schema violation, 3 dimension mismatch.

mod commands;
mod schema;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{
    cmd_build, cmd_gen, cmd_spectra, cmd_verify, parse_sigma, roundtrip_exact, CommandError,
    RunConfig, SigmaSelection,
};
use rosenfied_core::random::SystemParams;
use schema::SystemFile;

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_SCHEMA: u8 = 2;
const EXIT_DIMENSION: u8 = 3;

#[derive(Parser)]
#[command(
    name = "rosenfied",
    about = "Fiedler pencils for Rosenbrock system matrices: construction and verification",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct OutputArg {
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Assemble the pencil λX + Y for one ordering and report its structure.
    Build {
        /// System description (JSON).
        file: PathBuf,
        /// Ordering as a comma-separated image list, e.g. 1,3,2.
        /// Defaults to the file's "sigma", else the descending ordering
        /// (first companion form).
        #[arg(long)]
        sigma: Option<String>,
        #[command(flatten)]
        output: OutputArg,
    },
    /// Run the full check battery: assembly equality, commutativity,
    /// corner structure, auxiliary relations, equivalence certificate,
    /// and spectrum comparison.
    Verify {
        file: PathBuf,
        /// Check one ordering (comma-separated image list).
        #[arg(long, conflicts_with_all = ["all_sigma", "random"])]
        sigma: Option<String>,
        /// Check every ordering (d ≤ 5).
        #[arg(long, conflicts_with = "random")]
        all_sigma: bool,
        /// Check K random orderings drawn from --seed.
        #[arg(long, value_name = "K")]
        random: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Spectral matching tolerance; ROSENFIED_TOL overrides the default.
        #[arg(long)]
        tol: Option<f64>,
        /// Exact structural comparisons (integer-valued systems).
        #[arg(long)]
        integer: bool,
        /// Negative control: flip the C coupling sign inside 𝕄_0 before
        /// checking; the structural checks must catch it.
        #[arg(long)]
        inject_typo: bool,
        #[command(flatten)]
        output: OutputArg,
    },
    /// Generate a random system file.
    Gen {
        #[arg(value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(value_parser = clap::value_parser!(u64).range(1..))]
        m: u64,
        #[arg(value_parser = clap::value_parser!(u64).range(1..))]
        d_a: u64,
        #[arg(value_parser = clap::value_parser!(u64).range(1..))]
        d_d: u64,
        /// Integer entries in {-3..3} instead of complex uniforms.
        #[arg(long)]
        integer: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArg,
    },
    /// Compare pencil and oracle spectra; recover eigenvectors at simple
    /// eigenvalues through the first companion form.
    Spectra {
        file: PathBuf,
        #[arg(long)]
        sigma: Option<String>,
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        output: OutputArg,
    },
}

fn spectral_tol(flag: Option<f64>) -> f64 {
    flag.or_else(|| {
        std::env::var("ROSENFIED_TOL")
            .ok()
            .and_then(|s| s.parse::<f64>().ok())
    })
    .unwrap_or(1e-6)
}

fn load_file(path: &PathBuf) -> Result<SystemFile, ExitCode> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("rosenfied: cannot read {}: {e}", path.display());
        ExitCode::from(EXIT_SCHEMA)
    })?;
    let mut deserializer = serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(&mut deserializer).map_err(|e| {
        eprintln!(
            "rosenfied: schema violation at {}: {}",
            e.path(),
            e.inner()
        );
        ExitCode::from(EXIT_SCHEMA)
    })
}

fn emit(value: &serde_json::Value, out: &OutputArg) -> Result<(), ExitCode> {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    match &out.out {
        Some(path) => std::fs::write(path, text + "\n").map_err(|e| {
            eprintln!("rosenfied: cannot write {}: {e}", path.display());
            ExitCode::from(EXIT_SCHEMA)
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{text}").map_err(|_| ExitCode::from(EXIT_SCHEMA))
        }
    }
}

fn fail(err: CommandError, out: &OutputArg) -> ExitCode {
    match err {
        CommandError::Dimension(msg) => {
            eprintln!("rosenfied: dimension mismatch: {msg}");
            ExitCode::from(EXIT_DIMENSION)
        }
        CommandError::Usage(msg) => {
            eprintln!("rosenfied: {msg}");
            ExitCode::from(EXIT_SCHEMA)
        }
        CommandError::Failed(report) => {
            let _ = emit(&report, out);
            ExitCode::from(EXIT_CHECK_FAILED)
        }
    }
}

fn parse_sigma_flag(flag: &Option<String>) -> Result<Option<Vec<usize>>, ExitCode> {
    match flag {
        None => Ok(None),
        Some(text) => parse_sigma(text).map(Some).map_err(|msg| {
            eprintln!("rosenfied: {msg}");
            ExitCode::from(EXIT_SCHEMA)
        }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Build { file, sigma, output } => {
            let system = match load_file(&file) {
                Ok(f) => f,
                Err(code) => return code,
            };
            let sigma = match parse_sigma_flag(&sigma) {
                Ok(s) => s,
                Err(code) => return code,
            };
            match cmd_build(&system, sigma) {
                Ok(report) => match emit(&report, &output) {
                    Ok(()) => ExitCode::SUCCESS,
                    Err(code) => code,
                },
                Err(e) => fail(e, &output),
            }
        }
        Command::Verify {
            file,
            sigma,
            all_sigma,
            random,
            seed,
            tol,
            integer,
            inject_typo,
            output,
        } => {
            let system = match load_file(&file) {
                Ok(f) => f,
                Err(code) => return code,
            };
            let sigma = match parse_sigma_flag(&sigma) {
                Ok(s) => s,
                Err(code) => return code,
            };
            let selection = if all_sigma {
                SigmaSelection::All
            } else if let Some(k) = random {
                SigmaSelection::Random(k)
            } else {
                SigmaSelection::Single(sigma)
            };
            let config = RunConfig {
                seed,
                tol_spectral: spectral_tol(tol),
                integer_mode: integer,
                ..RunConfig::default()
            };
            match cmd_verify(&system, &selection, &config, inject_typo) {
                Ok((report, pass)) => {
                    if emit(&report, &output).is_err() {
                        return ExitCode::from(EXIT_SCHEMA);
                    }
                    if pass {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(EXIT_CHECK_FAILED)
                    }
                }
                Err(e) => fail(e, &output),
            }
        }
        Command::Gen {
            n,
            m,
            d_a,
            d_d,
            integer,
            seed,
            output,
        } => {
            let params = SystemParams {
                n: n as usize,
                m: m as usize,
                d_a: d_a as usize,
                d_d: d_d as usize,
            };
            match cmd_gen(params, integer, seed) {
                Ok(file) => {
                    debug_assert!(roundtrip_exact(&file));
                    let value = serde_json::to_value(&file).expect("system file serializes");
                    match emit(&value, &output) {
                        Ok(()) => ExitCode::SUCCESS,
                        Err(code) => code,
                    }
                }
                Err(e) => fail(e, &output),
            }
        }
        Command::Spectra { file, sigma, tol, output } => {
            let system = match load_file(&file) {
                Ok(f) => f,
                Err(code) => return code,
            };
            let sigma = match parse_sigma_flag(&sigma) {
                Ok(s) => s,
                Err(code) => return code,
            };
            let config = RunConfig {
                tol_spectral: spectral_tol(tol),
                ..RunConfig::default()
            };
            match cmd_spectra(&system, sigma, &config) {
                Ok((report, pass)) => {
                    if emit(&report, &output).is_err() {
                        return ExitCode::from(EXIT_SCHEMA);
                    }
                    if pass {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(EXIT_CHECK_FAILED)
                    }
                }
                Err(e) => fail(e, &output),
            }
        }
    }
}
