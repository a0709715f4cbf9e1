use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num::complex::Complex64;

use msumma::commands::{self, exit, read_problem, Command, Flags};
use msumma::dsl::parse_complex;

#[derive(Parser)]
#[command(name = "msumma", version, about = "Moment Borel summability of formal solutions of moment PDEs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute the formal solution and write it as a series file.
    Solve(Args),
    /// Estimate Gevrey orders of the solution and the data.
    Gevrey(Args),
    /// Locate Borel-plane singularities.
    Singular(Args),
    /// Decide summability in the given directions.
    Verdict(Args),
    /// Borel-Laplace resummation of u(t, z) at one point.
    Resum(Args),
    /// Everything above, bundled into one JSON file plus CSV plot data.
    Report(Args),
}

#[derive(clap::Args)]
struct Args {
    problem: PathBuf,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Comma-separated directions in radians.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    directions: Option<Vec<f64>>,
    /// One direction per level, in order of decreasing K.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    multidirection: Option<Vec<f64>>,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
    t: Option<Complex64>,
    #[arg(long, allow_hyphen_values = true)]
    d: Option<f64>,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
    z: Option<Complex64>,
    /// Override trunc_t.
    #[arg(long)]
    trunc: Option<usize>,
    #[arg(long, conflicts_with = "csv")]
    json: bool,
    #[arg(long)]
    csv: bool,
}

fn seed() -> Result<u64, String> {
    match std::env::var("MSUMMA_SEED") {
        Ok(v) => v.trim().parse().map_err(|_| format!("MSUMMA_SEED must be an unsigned integer, got `{v}`")),
        Err(_) => Ok(commands::DEFAULT_SEED),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, a) = match cli.cmd {
        Cmd::Solve(a) => (Command::Solve, a),
        Cmd::Gevrey(a) => (Command::Gevrey, a),
        Cmd::Singular(a) => (Command::Singular, a),
        Cmd::Verdict(a) => (Command::Verdict, a),
        Cmd::Resum(a) => (Command::Resum, a),
        Cmd::Report(a) => (Command::Report, a),
    };
    let seed = match seed() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit::SEMANTIC as u8);
        }
    };
    let flags = Flags {
        out: a.out,
        directions: a.directions,
        multidirection: a.multidirection,
        t: a.t,
        d: a.d,
        z: a.z.unwrap_or_default(),
        trunc: a.trunc,
        json: a.json,
        csv: a.csv,
        seed,
    };
    let text = match read_problem(&a.problem) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let result = std::panic::catch_unwind(|| commands::run(cmd, &text, &flags));
    match result {
        Ok(Ok(out)) => {
            print!("{}", out.stdout);
            if out.inconclusive_only {
                eprintln!("all verdicts inconclusive");
            }
            ExitCode::from(out.exit_code() as u8)
        }
        Ok(Err(e)) => {
            eprintln!("{}: {e}", a.problem.display());
            ExitCode::from(e.exit_code() as u8)
        }
        Err(_) => ExitCode::from(exit::INTERNAL as u8),
    }
}
