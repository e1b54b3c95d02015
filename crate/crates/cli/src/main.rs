//! `fermat`: command-line front end for `fermat-core`.

mod commands;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "fermat", version, about = "Exact invariants of the Fermat Jacobians y^2 = x^m + 1")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Working precision of numeric cross-checks, in bits.
    #[arg(long, env = "FERMAT_BITS", default_value_t = 256, global = true,
          value_parser = clap::value_parser!(u32).range(64..=4096))]
    pub bits: u32,
    /// Split primes scanned per squareness decision.
    #[arg(long, default_value_t = 400, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub budget_primes: u64,
    /// Largest conductor a square class may need.
    #[arg(long, default_value_t = 1 << 16, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub budget_conductor: u64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Isogeny decomposition of J_m, or the epsilon decomposition of 2f.
    Decompose(DecomposeArgs),
    /// Kernel basis of the character-lattice map.
    MtEquations(MArgs),
    /// Multiquadratic monodromy field over Q(zeta_m).
    MonodromyField(MArgs),
    /// Rank table of the monodromy field over a range of m.
    Table(TableArgs),
    /// Frobenius value of a Mumford-Tate equation at a prime.
    VerifyFrobenius(FrobeniusArgs),
    /// Gross-Koblitz comparison for a Gamma character.
    GrossKoblitz(GrossKoblitzArgs),
    /// Component group, Galois action and identity component.
    SatoTate(SatoTateArgs),
    /// The polarization on H^1 in the omega basis.
    Polarization(MArgs),
}

#[derive(Args, Debug)]
pub struct MArgs {
    #[arg(long)]
    pub m: u64,
    /// Also report whether this equation lies in the kernel.
    #[arg(long)]
    pub equation: Option<String>,
}

#[derive(Args, Debug)]
pub struct DecomposeArgs {
    #[arg(long)]
    pub m: u64,
    /// Values f(0), ..., f(m-1) of a constant-weight function to decompose.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "random")]
    pub function: Option<Vec<i64>>,
    /// Decompose a random constant-weight function instead.
    #[arg(long)]
    pub random: bool,
    /// Seed for --random.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct TableArgs {
    /// Odd m only.
    #[arg(long)]
    pub odd: bool,
    #[arg(long, default_value_t = 3)]
    pub min: u64,
    #[arg(long)]
    pub max: u64,
}

#[derive(Args, Debug)]
pub struct FrobeniusArgs {
    #[arg(long)]
    pub m: u64,
    #[arg(long)]
    pub p: u64,
    /// Equation such as "x_10*x_12/x_8/x_14".
    #[arg(long)]
    pub equation: String,
}

#[derive(Args, Debug)]
pub struct GrossKoblitzArgs {
    #[arg(long)]
    pub m: u64,
    #[arg(long)]
    pub p: u64,
    /// p-adic precision N (work modulo p^N).
    #[arg(long, env = "FERMAT_PADIC_PRECISION", default_value_t = 3)]
    pub padic_precision: u32,
    /// Gamma indices i_1, ..., i_q of alpha = gamma_{i_1} * ... * gamma_{i_q}.
    #[arg(long, value_delimiter = ',', required_unless_present = "equation")]
    pub gamma: Option<Vec<u64>>,
    /// Take alpha from an equation: x_j contributes gamma_j, 1/x_j contributes gamma_{m-j}.
    #[arg(long, conflicts_with = "gamma")]
    pub equation: Option<String>,
}

#[derive(Args, Debug)]
pub struct SatoTateArgs {
    #[arg(long)]
    pub m: u64,
    /// Also print rho(t) on the degree-2 Tate classes, e.g. "8,+-".
    #[arg(long)]
    pub element: Option<String>,
    /// For m = 15, test the published component representatives.
    #[arg(long)]
    pub reference: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let fmt = cli.global.format;
    match commands::run(&cli) {
        Ok(report) => match emit(&cli.global, &report.render(fmt)) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("fermat: cannot write output: {e}");
                ExitCode::from(1)
            }
        },
        Err(e) => {
            let body = serde_json::json!({ "error": { "code": e.code(), "message": e.to_string() } });
            println!("{}", serde_json::to_string_pretty(&body).expect("json"));
            ExitCode::from(1)
        }
    }
}

fn emit(g: &Global, text: &str) -> std::io::Result<()> {
    match &g.out {
        Some(p) => std::fs::write(p, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}
