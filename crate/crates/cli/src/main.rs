#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fockforge_cli::report::table_csv;
use fockforge_cli::suites::params::{default_nu, default_z};
use fockforge_cli::suites::{knu_rows, knu_table, KNU_HEADER};
use fockforge_cli::{run_file, CliError, Format, CATALOG, EXIT_CONFIG};

#[derive(Parser)]
#[command(name = "fockforge", version, about = "Coherent-state verification suites on truncated Fock spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the suites listed in a configuration file.
    Run {
        config: PathBuf,
        /// Output directory; overrides the configuration.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated subset of json,txt,csv.
        #[arg(long, value_delimiter = ',')]
        format: Option<Vec<Format>>,
        /// Allow bases above the memory guard.
        #[arg(long)]
        override_memory_guard: bool,
    },
    /// List the suite catalog with parameter schemas.
    Suites,
    /// Print the K_nu(2z) integral-representation table as CSV.
    BesselCheck {
        /// Orders as a range `a..b` (inclusive) or a comma list.
        #[arg(long, default_value = "0..3")]
        nu: String,
        /// Comma-separated arguments.
        #[arg(long, value_delimiter = ',')]
        z: Option<Vec<f64>>,
        /// Write the table here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_nu(s: &str) -> Result<Vec<u32>, String> {
    if let Some((a, b)) = s.split_once("..") {
        let a: u32 = a.trim().parse().map_err(|e| format!("--nu {s:?}: {e}"))?;
        let b: u32 = b.trim().parse().map_err(|e| format!("--nu {s:?}: {e}"))?;
        if a > b {
            return Err(format!("--nu {s:?}: empty range"));
        }
        return Ok((a..=b).collect());
    }
    s.split(',')
        .map(|t| t.trim().parse().map_err(|e| format!("--nu {s:?}: {e}")))
        .collect()
}

fn configure_threads() -> Result<(), String> {
    if let Ok(v) = std::env::var("FOCKFORGE_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| format!("FOCKFORGE_THREADS={v:?} is not a positive integer"))?;
        if n == 0 {
            return Err("FOCKFORGE_THREADS must be at least 1".into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn fail(msg: impl std::fmt::Display, code: i32) -> ExitCode {
    eprintln!("fockforge: {msg}");
    ExitCode::from(code as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        return fail(e, EXIT_CONFIG);
    }
    match cli.command {
        Command::Run {
            config,
            out,
            format,
            override_memory_guard,
        } => match run_file(&config, out.as_deref(), format, override_memory_guard) {
            Ok((report, code)) => {
                print!("{}", report.to_text());
                ExitCode::from(code as u8)
            }
            Err(e) => fail(&e, e.exit_code()),
        },
        Command::Suites => {
            for c in CATALOG {
                println!("{}\n  {}\n  params: {}\n", c.name, c.summary, c.schema);
            }
            ExitCode::SUCCESS
        }
        Command::BesselCheck { nu, z, out } => {
            let nu = match parse_nu(&nu) {
                Ok(v) => v,
                Err(e) => return fail(e, EXIT_CONFIG),
            };
            let z = z.unwrap_or_else(default_z);
            let nu = if nu.is_empty() { default_nu() } else { nu };
            if z.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
                return fail("--z values must be positive and finite", EXIT_CONFIG);
            }
            let rows = match knu_table(&nu, &z) {
                Ok(r) => r,
                Err(e) => return fail(&e, e.exit_code()),
            };
            let header = KNU_HEADER.map(String::from).to_vec();
            let text = table_csv(&header, &knu_rows(&rows));
            match out {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, text) {
                        let e = CliError::Io(format!("{}: {e}", path.display()));
                        return fail(&e, e.exit_code());
                    }
                }
                None => print!("{text}"),
            }
            ExitCode::SUCCESS
        }
    }
}
