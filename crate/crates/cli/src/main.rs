//! `hol`: command-line front end for hol-core.

mod cache;
mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hol_core::lattice::AlgdepSettings;
use hol_core::thirdkind::ResidueOrientation;

#[derive(Parser, Debug)]
#[command(name = "hol", version, about = "Hecke orbits, third-kind forms and regularized pairings")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Working precision W in decimal digits (>= 30).
    #[arg(long = "prec", global = true, default_value_t = 60, value_parser = clap::value_parser!(u32).range(30..))]
    pub prec: u32,
    /// Truncation order M (>= 10; `qexp` and `sieve` accept any M >= 1).
    #[arg(long, global = true, default_value_t = 60, value_parser = clap::value_parser!(i64).range(1..))]
    pub order: i64,
    /// Also write numeric output as CSV to this path.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    /// Neither read nor write the cache.
    #[arg(long, global = true)]
    pub no_cache: bool,
    /// Cache directory.
    #[arg(long, global = true, env = "HOL_CACHE_DIR")]
    pub cache_dir: Option<PathBuf>,
    /// Excision radii for quadrature, strictly decreasing.
    #[arg(long, global = true, value_delimiter = ',', default_values_t = hol_core::pairing::DEFAULT_SCHEDULE)]
    pub schedule: Vec<f64>,
    /// Residue sign convention for printed divisors.
    #[arg(long, global = true, value_enum, default_value_t = Orientation::CuspPositive)]
    pub residue_sign: Orientation,
    /// Maximal degree for integer relation searches.
    #[arg(long, global = true, default_value_t = 8)]
    pub max_degree: usize,
    /// Height bound for integer relation searches.
    #[arg(long, global = true, default_value_t = 1e20)]
    pub max_height: f64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    CuspPositive,
    PointPositive,
}

impl Global {
    pub fn orientation(&self) -> ResidueOrientation {
        match self.residue_sign {
            Orientation::CuspPositive => ResidueOrientation::CuspPositive,
            Orientation::PointPositive => ResidueOrientation::PointPositive,
        }
    }

    pub fn algdep(&self) -> AlgdepSettings {
        AlgdepSettings {
            max_degree: self.max_degree,
            max_height: self.max_height,
            digits: self.prec,
            confirm_extra: 20,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum SeriesName {
    E2,
    E4,
    E6,
    Delta,
    J,
    En,
    Eta,
    Faber,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print a q-expansion.
    Qexp {
        #[arg(value_enum)]
        series: SeriesName,
        /// Index for `faber`.
        #[arg(long, default_value_t = 1)]
        m: u32,
        /// Level for `en` and `eta`.
        #[arg(long, default_value_t = 11)]
        level: u64,
        /// Exponents `d:r_d,...` for `eta`.
        #[arg(long, default_value = "1:2,11:2")]
        eta: String,
    },
    /// List the Hecke orbit T_m.tau.
    Orbit {
        #[arg(long)]
        m: u64,
        #[arg(long, allow_hyphen_values = true)]
        tau: String,
        #[arg(long, default_value_t = 1)]
        level: u64,
    },
    /// Evaluate j(tau).
    Evalj {
        #[arg(long, allow_hyphen_values = true)]
        tau: String,
    },
    /// Look for an integral quadratic form with root tau.
    Cmcheck {
        #[arg(long, allow_hyphen_values = true)]
        tau: String,
        #[arg(long, default_value_t = 10000)]
        max_disc: u64,
    },
    /// Search for an integer polynomial vanishing at a number `re` or `re,im`.
    Algdep {
        #[arg(long, allow_hyphen_values = true)]
        value: String,
    },
    /// Hilbert class polynomial of a discriminant.
    Hclass {
        #[arg(long, allow_hyphen_values = true)]
        disc: i64,
    },
    /// Differentials of the third kind.
    Thirdkind {
        #[command(subcommand)]
        op: ThirdKindOp,
    },
    /// Regularized pairings.
    Pair {
        #[command(subcommand)]
        op: PairOp,
    },
    /// Petersson norms of the eigenforms of a bundled basis.
    Norm {
        #[arg(long, default_value_t = 11)]
        level: u64,
    },
    /// Hecke matrices and eigenforms of a cusp form basis.
    Eigen {
        #[command(subcommand)]
        op: EigenOp,
    },
    /// Sieve a level-one series at the given primes.
    Sieve {
        #[arg(long, value_enum, default_value_t = SeriesName::J)]
        series: SeriesName,
        #[arg(long, value_delimiter = ',', default_value = "2,3")]
        primes: Vec<u64>,
    },
    /// Run named check suites (`all` for every suite).
    Verify {
        suite: String,
        #[arg(long)]
        m_max: Option<u64>,
        /// Points for orbit-identity; repeatable.
        #[arg(long, allow_hyphen_values = true)]
        tau: Vec<String>,
    },
    /// Orbit sums of j - 744 with integer relation evidence.
    Report {
        #[arg(long, allow_hyphen_values = true)]
        tau: String,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6")]
        ms: Vec<u64>,
    },
}

#[derive(Subcommand, Debug)]
pub enum ThirdKindOp {
    /// Level-one form with residue divisor Q_inf - Q_tau.
    Level1 {
        #[arg(long, allow_hyphen_values = true)]
        tau: String,
    },
    /// Logarithmic derivative of an eta quotient.
    Etadlog {
        #[arg(long, default_value = "1:12,11:-12")]
        eta: String,
        #[arg(long, default_value_t = 11)]
        level: u64,
    },
    /// Project the level-one form at tau orthogonally to a bundled cusp form basis.
    Project {
        #[arg(long, allow_hyphen_values = true)]
        tau: String,
        #[arg(long, default_value_t = 11)]
        level: u64,
    },
    /// Algebraicity evidence for coefficients of a level-one form.
    Scholl {
        #[arg(long, allow_hyphen_values = true)]
        tau: String,
        #[arg(long, value_delimiter = ',', default_value = "1,2")]
        indices: Vec<i64>,
    },
}

#[derive(Subcommand, Debug)]
pub enum PairOp {
    /// Coefficient formula for (j_m, g_tau) at level one.
    Coeff {
        #[arg(long, allow_hyphen_values = true)]
        tau: String,
        #[arg(long, default_value_t = 1)]
        m: u32,
    },
    /// Quadrature of (f_i, dt/t) for the bundled basis and an eta quotient t.
    Numeric {
        #[arg(long, default_value = "1:12,11:-12")]
        eta: String,
        #[arg(long, default_value_t = 11)]
        level: u64,
    },
    /// Both methods on their vanishing fixtures.
    Compare {
        #[arg(long, allow_hyphen_values = true, default_value = "0.3+1.7i")]
        tau: String,
        #[arg(long, default_value_t = 3)]
        m: u32,
    },
}

#[derive(Subcommand, Debug)]
pub enum EigenOp {
    /// Matrix of T_m on the echelonized basis.
    Matrix {
        #[arg(long, default_value_t = 23)]
        level: u64,
        #[arg(long)]
        m: u64,
    },
    /// Eigenforms and eigenvalues.
    System {
        #[arg(long, default_value_t = 23)]
        level: u64,
        #[arg(long, value_delimiter = ',', default_value = "2,3,5,7,13")]
        probes: Vec<u64>,
    },
    /// Coordinates of a cusp form, given by a(1),a(2),..., in the eigenbasis.
    Decompose {
        #[arg(long, default_value_t = 23)]
        level: u64,
        #[arg(long, allow_hyphen_values = true)]
        coeffs: String,
    },
    /// m^-1 sum alpha_i conj(beta_i) lambda_{i,m} (f_i, f_i); lists are `re,im;re,im;...`.
    Lemma43 {
        #[arg(long, default_value_t = 11)]
        level: u64,
        #[arg(long)]
        m: u64,
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        #[arg(long, allow_hyphen_values = true)]
        beta: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.global.schedule.len() < 3 || cli.global.schedule.windows(2).any(|w| w[1] >= w[0]) || cli.global.schedule.iter().any(|&e| e <= 0.0) {
        eprintln!("error: --schedule must hold at least three strictly decreasing positive values");
        return ExitCode::from(2);
    }
    if cli.global.order < 10 && !matches!(cli.command, Command::Qexp { .. } | Command::Sieve { .. }) {
        eprintln!("error: --order must be at least 10 for this command");
        return ExitCode::from(2);
    }
    match commands::run(&cli) {
        Ok(status) => ExitCode::from(status),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
