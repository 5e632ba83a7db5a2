//! `multistar`: command-line front end for the multistar library.
//!
//! Every subcommand resolves its configuration (defaults, then `--config`
//! JSON, then flags), validates it, runs, and writes a report carrying a
//! metadata header (tool version, seed, SHA-256 of the resolved
//! configuration). Exit status: 0 success, 1 numerical failure, 2 usage or
//! configuration error.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use multistar::lattice::{BranchPolicy, IcKind};
use multistar::legs::Color;
use multistar::multispin::Picture;
use multistar::solver::Slot;

use config::{load, CafccRun, EvolveRun, GammaCheck, GammaRun, SolveRun, SsrRun};
use output::Format;

/// Why a command did not succeed.
#[derive(Debug)]
pub enum Failure {
    /// Malformed flags or configuration (exit status 2).
    Usage(String),
    /// A numerical routine failed (exit status 1).
    Numerical(multistar::Error),
}

impl From<multistar::Error> for Failure {
    fn from(e: multistar::Error) -> Self {
        match e {
            multistar::Error::Config(m) => Failure::Usage(m),
            other => Failure::Numerical(other),
        }
    }
}

/// Where and how to write the report.
pub struct Output {
    pub format: Format,
    pub path: Option<PathBuf>,
}

#[derive(Parser)]
#[command(name = "multistar", version, about = "Multicomponent 5-point equations: special functions, solvers, lattices, consistency and quadrature checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON configuration file; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the hyperbolic gamma function, with optional identity checks.
    Gamma {
        /// Argument, e.g. `0.2` or `0.1+0.45i`.
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        z: Option<Complex64>,
        /// Modulus b > 0.
        #[arg(long)]
        b: Option<f64>,
        /// Identity checks (repeatable).
        #[arg(long, value_enum)]
        check: Vec<GammaCheck>,
        /// Pass threshold of the checks.
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Solve a seeded random 5-point stencil for one corner.
    Solve {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_parser = Picture::from_str)]
        picture: Option<Picture>,
        /// Stencil colour: black or white.
        #[arg(long, value_parser = parse_color)]
        color: Option<Color>,
        /// Unknown corner: i, j, k or l.
        #[arg(long, value_parser = Slot::from_str)]
        corner: Option<Slot>,
        #[arg(long)]
        seed: Option<u64>,
        /// Residual target max_a |A_a − 1|.
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Evolve a square checkerboard lattice from seeded initial data.
    Evolve {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_parser = Picture::from_str)]
        picture: Option<Picture>,
        /// Width and height.
        #[arg(long)]
        size: Option<usize>,
        /// Initial condition: corner or staircase.
        #[arg(long, value_parser = IcKind::from_str)]
        ic: Option<IcKind>,
        /// Branch policy: nearest, indexed or indexed:K.
        #[arg(long, value_parser = BranchPolicy::from_str)]
        branch: Option<BranchPolicy>,
        #[arg(long)]
        seed: Option<u64>,
        /// Residual target of each solve.
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Run consistency experiments on random face-centred cubes.
    Cafcc {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_parser = Picture::from_str)]
        picture: Option<Picture>,
        #[arg(long)]
        trials: Option<usize>,
        /// Seed of the first trial.
        #[arg(long)]
        seed: Option<u64>,
        /// Success threshold of the check equations.
        #[arg(long)]
        tol: Option<f64>,
        /// Exit with status 1 below this success rate.
        #[arg(long)]
        min_rate: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Check the star-star relation by quadrature.
    Ssr {
        /// 2, or 3 together with --expensive.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        b: Option<f64>,
        /// Rapidities p as `p1,p2`.
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        p: Option<[f64; 2]>,
        /// Rapidities q as `q1,q2`.
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        q: Option<[f64; 2]>,
        /// Seed of the random boundary spins.
        #[arg(long)]
        seed: Option<u64>,
        /// Allow the slow two-dimensional quadrature (n = 3).
        #[arg(long)]
        expensive: bool,
        /// Target relative error of each integral.
        #[arg(long)]
        tol: Option<f64>,
        /// Exit with status 1 above this residual.
        #[arg(long)]
        threshold: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    Complex64::from_str(s.trim()).map_err(|_| format!("cannot parse complex number '{s}' (e.g. 0.2, -1.5i, 0.1+0.45i)"))
}

fn parse_color(s: &str) -> Result<Color, String> {
    match s {
        "black" => Ok(Color::Black),
        "white" => Ok(Color::White),
        other => Err(format!("unknown colour '{other}' (expected black or white)")),
    }
}

fn parse_pair(s: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => Ok([a.parse().map_err(|e| format!("{a}: {e}"))?, b.parse().map_err(|e| format!("{b}: {e}"))?]),
        _ => Err(format!("expected two comma-separated numbers, got '{s}'")),
    }
}

fn set<T>(slot: &mut T, flag: Option<T>) {
    if let Some(v) = flag {
        *slot = v;
    }
}

fn output(common: &Common) -> Output {
    Output { format: common.format, path: common.out.clone() }
}

fn run(cli: Cli) -> Result<i32, Failure> {
    match cli.command {
        Command::Gamma { z, b, check, tol, common } => {
            let mut cfg: GammaRun = load(common.config.as_deref())?;
            set(&mut cfg.z, z);
            set(&mut cfg.b, b);
            set(&mut cfg.tol, tol);
            if !check.is_empty() {
                cfg.checks = check;
            }
            commands::gamma(&cfg, &output(&common))
        }
        Command::Solve { n, picture, color, corner, seed, tol, common } => {
            let mut cfg: SolveRun = load(common.config.as_deref())?;
            set(&mut cfg.n, n);
            set(&mut cfg.picture, picture);
            set(&mut cfg.color, color);
            set(&mut cfg.corner, corner);
            set(&mut cfg.seed, seed);
            set(&mut cfg.solver.tol, tol);
            commands::solve(&cfg, &output(&common))
        }
        Command::Evolve { n, picture, size, ic, branch, seed, tol, common } => {
            let mut cfg: EvolveRun = load(common.config.as_deref())?;
            set(&mut cfg.n, n);
            set(&mut cfg.picture, picture);
            set(&mut cfg.size, size);
            set(&mut cfg.ic, ic);
            set(&mut cfg.branch, branch);
            set(&mut cfg.seed, seed);
            set(&mut cfg.solver.tol, tol);
            commands::evolve(&cfg, &output(&common))
        }
        Command::Cafcc { n, picture, trials, seed, tol, min_rate, common } => {
            let mut cfg: CafccRun = load(common.config.as_deref())?;
            set(&mut cfg.n, n);
            set(&mut cfg.picture, picture);
            set(&mut cfg.trials, trials);
            set(&mut cfg.seed, seed);
            set(&mut cfg.experiment.success, tol);
            if min_rate.is_some() {
                cfg.min_rate = min_rate;
            }
            commands::cafcc(&cfg, &output(&common))
        }
        Command::Ssr { n, b, p, q, seed, expensive, tol, threshold, common } => {
            let mut cfg: SsrRun = load(common.config.as_deref())?;
            set(&mut cfg.n, n);
            set(&mut cfg.b, b);
            set(&mut cfg.p, p);
            set(&mut cfg.q, q);
            set(&mut cfg.seed, seed);
            cfg.expensive |= expensive;
            if let Some(t) = tol {
                let mut qc = cfg.quadrature_config();
                qc.rel_tol = t;
                cfg.quadrature = Some(qc);
            }
            if threshold.is_some() {
                cfg.threshold = threshold;
            }
            commands::ssr(&cfg, &output(&common))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(e)) => {
            eprintln!("numerical failure: {e}");
            ExitCode::from(1)
        }
    }
}
