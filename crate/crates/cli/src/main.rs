use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

/// Exact spanning-set relaxations and pitch certificates for 0/1 covering and packing.
#[derive(Parser, Debug)]
#[command(name = "pitchforge", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for random generators.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Largest n for hypercube enumeration (overrides PITCHFORGE_LIMITS).
    #[arg(long, global = true)]
    limit_n: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Table,
    Json,
    /// LP text (relax only).
    Lp,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Cover,
    Packing,
    Symknap,
    Interpolate,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write an instance: fc:N, symknap:N:B, random:N:M:DENSITY or randpack:N:M:MAXCOEF.
    Gen { spec: String },
    /// Build and solve a spanning-set SA relaxation.
    Relax {
        /// Instance file or generator spec.
        #[arg(long)]
        instance: String,
        /// Pitch parameter of S_A(pi) (cover instances).
        #[arg(long, conflicts_with_all = ["degree", "symmetric"])]
        pi: Option<usize>,
        /// Standard SA with all monomials of degree <= d.
        #[arg(long, conflicts_with = "symmetric")]
        degree: Option<usize>,
        /// Cardinality indicators as the spanning set.
        #[arg(long)]
        symmetric: bool,
        /// Objective: `sum` or comma-separated coefficients.
        #[arg(long, default_value = "sum")]
        objective: String,
        /// Also write the LP as JSON to this path.
        #[arg(long)]
        lp_json: Option<PathBuf>,
    },
    /// Build, verify and write a certificate.
    Certify {
        #[arg(long)]
        instance: String,
        /// Inequality file or inline form such as `sum>=2` or `1,1,0<=1`.
        #[arg(long)]
        ineq: Option<String>,
        /// Polynomial file for interpolation targets.
        #[arg(long)]
        poly: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Mode::Cover)]
        mode: Mode,
        /// Pitch parameter for cover certificates (default: the inequality's pitch).
        #[arg(long)]
        pi: Option<usize>,
    },
    /// Check a certificate file.
    Verify {
        certificate: PathBuf,
        /// Instance for certificates that do not embed one.
        #[arg(long)]
        instance: Option<String>,
    },
    /// Relaxation optima side by side with the integer optimum.
    Compare {
        #[arg(long)]
        instance: String,
        #[arg(long, default_value_t = 2)]
        pi: usize,
        /// Comma-separated SA degrees.
        #[arg(long, default_value = "0,1,2")]
        degrees: String,
        #[arg(long, default_value = "sum")]
        objective: String,
    },
    /// Scaled-point experiment against enumerated CG cuts (packing instances).
    Closure {
        #[arg(long)]
        instance: String,
        #[arg(long, default_value = "sum")]
        objective: String,
        #[arg(long, default_value_t = 1)]
        t: u32,
        #[arg(long, default_value = "1")]
        epsilon: String,
        /// Multiplier denominator for cut enumeration.
        #[arg(long, default_value_t = 2)]
        denominator: u32,
        /// Coefficient bound for enumerated pitch-bounded inequalities.
        #[arg(long, default_value_t = 2)]
        coef_bound: u32,
    },
    /// Dump S_A(pi).
    Spanning {
        #[arg(long)]
        instance: String,
        #[arg(long)]
        pi: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = cli.global;
    let result = match cli.command {
        Command::Gen { spec } => commands::gen(&g, &spec),
        Command::Relax {
            instance,
            pi,
            degree,
            symmetric,
            objective,
            lp_json,
        } => commands::relax(
            &g,
            &instance,
            pi,
            degree,
            symmetric,
            &objective,
            lp_json.as_deref(),
        ),
        Command::Certify {
            instance,
            ineq,
            poly,
            mode,
            pi,
        } => commands::certify(&g, &instance, ineq.as_deref(), poly.as_deref(), mode, pi),
        Command::Verify {
            certificate,
            instance,
        } => commands::verify(&g, &certificate, instance.as_deref()),
        Command::Compare {
            instance,
            pi,
            degrees,
            objective,
        } => commands::compare(&g, &instance, pi, &degrees, &objective),
        Command::Closure {
            instance,
            objective,
            t,
            epsilon,
            denominator,
            coef_bound,
        } => commands::closure(
            &g,
            &instance,
            &objective,
            t,
            &epsilon,
            denominator,
            coef_bound,
        ),
        Command::Spanning { instance, pi } => commands::spanning(&g, &instance, pi),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            commands::exit_code(&e)
        }
    }
}
