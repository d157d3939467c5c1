mod commands;
mod config;
mod output;

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use resonance_core::cache::Cache;
use resonance_core::lfunc::Smoothing;
use resonance_core::resonator::{DEFAULT_B, DEFAULT_GAMMA, DEFAULT_U};
use resonance_core::search::ScoreWeight;

use crate::output::Format;

pub const DEFAULT_CACHE_DIR: &str = ".resonance-cache";

#[derive(Debug, Parser)]
#[command(
    name = "resonance",
    version,
    about = "Dedekind zeta coefficients, Gal sums and resonator-guided large values for Q(zeta_d)",
    args_override_self = true,
    after_help = "Exit status: 0 success, 1 invalid input, 2 computation error or failed check.\n\
                  Every run appends a provenance line to <cache dir>/provenance.jsonl unless --ledger is given.\n\
                  The cache directory defaults to .resonance-cache and can be overridden by RESONANCE_CACHE_DIR."
)]
pub struct Cli {
    /// Plain-text `key = value` file; flags override it.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// csv, json-lines or text.
    #[arg(long, global = true, default_value = "csv")]
    pub format: Format,
    /// Write results here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,
    #[arg(long = "cache-dir", global = true, value_name = "PATH")]
    pub cache_dir: Option<PathBuf>,
    /// Bypass the result cache.
    #[arg(long = "no-cache", global = true)]
    pub no_cache: bool,
    /// Provenance ledger path.
    #[arg(long, global = true, value_name = "PATH")]
    pub ledger: Option<PathBuf>,
    /// Worker threads, 0 for all cores.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Clone, Args)]
pub struct Shape {
    #[arg(long)]
    pub d: u64,
    #[arg(long, default_value_t = DEFAULT_U)]
    pub u: f64,
    #[arg(long, default_value_t = DEFAULT_B)]
    pub b: f64,
    #[arg(long, default_value_t = DEFAULT_GAMMA)]
    pub gamma: f64,
    /// Defaults to sqrt(h)/e.
    #[arg(long)]
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GalTable {
    Report,
    Profile,
    Sigma,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Coeffs,
    Lemma1,
    Lemma2,
    Gcd,
    Relation5,
    Rankin,
    Sw,
    Zeta,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Coefficients a(n) of the Dedekind zeta function of Q(zeta_d).
    #[command(args_override_self = true, after_help = "CSV columns: n,a_n")]
    Coeffs {
        #[arg(long)]
        d: u64,
        #[arg(long = "n-max")]
        n_max: usize,
        /// Compare against the character-convolution oracle.
        #[arg(long)]
        check: bool,
    },
    /// Build the resonator set M.
    #[command(
        args_override_self = true,
        after_help = "CSV columns: index,m,omega,log_value\nm is written as space-separated prime:exponent pairs."
    )]
    Construct {
        #[command(flatten)]
        shape: Shape,
        #[arg(long = "N")]
        n: u64,
        /// Also write the set in its text serialization.
        #[arg(long, value_name = "PATH")]
        save: Option<PathBuf>,
    },
    /// Gal sums over the resonator set.
    #[command(
        args_override_self = true,
        after_help = "CSV columns (report): d,N,size,s_half_weighted,s_third_weighted,normalized,beta_empirical,beta_theoretical,h,lcal_N[,s_alpha_plain]\n\
                      CSV columns (profile): X,truncated\n\
                      CSV columns (sigma): k,j_k,sigma,t_sigma"
    )]
    Galsum {
        #[command(flatten)]
        shape: Shape,
        #[arg(long = "N")]
        n: u64,
        /// Also report the unweighted sum at this exponent.
        #[arg(long)]
        alpha: Option<f64>,
        /// Log-spaced truncation cutoffs.
        #[arg(long, default_value_t = 20)]
        grid: usize,
        /// Exponent in the T_sigma expression.
        #[arg(long = "t-alpha", default_value_t = 0.5)]
        t_alpha: f64,
        #[arg(long, value_enum, default_value = "report")]
        table: GalTable,
    },
    /// Kernel transform values and monotonicity/derivative checks.
    #[command(args_override_self = true, after_help = "CSV columns: v,k_hat")]
    Kernel {
        /// Defaults to 2 phi(d) when --d is given.
        #[arg(long)]
        eta: Option<u32>,
        #[arg(long)]
        d: Option<u64>,
        #[arg(long, default_value_t = resonance_core::search::kernel::DEFAULT_EPSILON)]
        epsilon: f64,
        #[arg(long = "T")]
        t: f64,
        /// `lemma4` runs the monotonicity and derivative checks.
        #[arg(long)]
        check: Option<String>,
        #[arg(long, default_value_t = 200)]
        points: usize,
    },
    /// Resonator-guided search for large |zeta_K(1/2 + it)| on [0, T].
    #[command(
        args_override_self = true,
        after_help = "CSV columns: d,T,N,size,budget,seed,t_star,zeta_abs,baseline_t,baseline_max,reference,evaluations,complete\n\
                      Results are also appended to the search ledger (seed,T,d,budget,t_star,zeta_abs,baseline_max,reference)."
    )]
    Search {
        #[arg(long)]
        d: u64,
        #[arg(long = "T")]
        t: f64,
        #[arg(long, default_value_t = 2000)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// N = floor(T^(1 - beta)).
        #[arg(long, default_value_t = 0.0)]
        beta: f64,
        #[arg(long, default_value_t = 1e-8)]
        tolerance: f64,
        /// gaussian or flat.
        #[arg(long, default_value = "gaussian")]
        weight: ScoreWeight,
        /// Search ledger; defaults to <cache dir>/search-ledger.csv.
        #[arg(long, value_name = "PATH")]
        results: Option<PathBuf>,
    },
    /// Property sweeps with violation counts.
    #[command(args_override_self = true, after_help = "CSV columns: suite,checked,violations,passed,detail")]
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 3)]
        d: u64,
        /// Construction size for lemma2, gcd and rankin.
        #[arg(long = "N", default_value_t = 16384)]
        n: u64,
        #[arg(long, default_value_t = 10_000)]
        pairs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "n-max", default_value_t = 5000)]
        n_max: usize,
        /// Primes for lemma1 values, instances for relation5, cutoffs for rankin.
        #[arg(long, default_value_t = 50)]
        count: usize,
        /// Sieve bound for sw.
        #[arg(long, default_value_t = 1e7)]
        x: f64,
        /// Heights for zeta.
        #[arg(long, value_delimiter = ',', default_value = "10,20,50")]
        t: Vec<f64>,
    },
    /// Gal-sum reports over a geometric range of N with the growth-trend slope.
    #[command(
        args_override_self = true,
        after_help = "CSV columns: d,N,size,s_half_weighted,s_third_weighted,normalized,beta_empirical,beta_theoretical,h,lcal_N\n\
                      Summary: slope of log(normalized) against phi(d) sqrt(log N log3 N / log2 N), null for fewer than two points."
    )]
    Sweep {
        #[command(flatten)]
        shape: Shape,
        #[arg(long = "n-lo")]
        n_lo: u64,
        #[arg(long = "n-hi")]
        n_hi: u64,
        #[arg(long, default_value_t = 2)]
        factor: u64,
    },
    /// zeta_K along Re(s) = sigma.
    #[command(args_override_self = true, after_help = "CSV columns: t,re,im,abs,est_error")]
    Zeta {
        #[arg(long)]
        d: u64,
        #[arg(long, default_value_t = 0.5)]
        sigma: f64,
        #[arg(long = "t-lo")]
        t_lo: f64,
        #[arg(long = "t-hi")]
        t_hi: f64,
        #[arg(long, default_value_t = 11)]
        steps: usize,
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
        /// sharp or smooth.
        #[arg(long, default_value = "sharp")]
        smoothing: Smoothing,
    },
}

impl Cmd {
    pub fn name(&self) -> &'static str {
        match self {
            Cmd::Coeffs { .. } => "coeffs",
            Cmd::Construct { .. } => "construct",
            Cmd::Galsum { .. } => "galsum",
            Cmd::Kernel { .. } => "kernel",
            Cmd::Search { .. } => "search",
            Cmd::Verify { .. } => "verify",
            Cmd::Sweep { .. } => "sweep",
            Cmd::Zeta { .. } => "zeta",
        }
    }
}

/// Failure with its exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl From<resonance_core::Error> for Failure {
    fn from(e: resonance_core::Error) -> Self {
        Failure {
            code: if e.is_validation() { 1 } else { 2 },
            message: e.to_string(),
        }
    }
}

impl Failure {
    pub fn invalid(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }

    pub fn failed(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }
}

pub fn cache_dir(cli: &Cli) -> PathBuf {
    match &cli.cache_dir {
        Some(d) => d.clone(),
        None => Cache::from_env(DEFAULT_CACHE_DIR).dir().to_path_buf(),
    }
}

fn append_provenance(path: &Path, args: &[String], command: &str, wall: f64, code: u8, threads: usize) {
    let line = serde_json::json!({
        "command": command,
        "args": args,
        "version": format!("resonance-cli {} / resonance-core {}", env!("CARGO_PKG_VERSION"), resonance_core::VERSION),
        "threads": threads,
        "wall_seconds": wall,
        "exit": code,
    });
    let written = path
        .parent()
        .map_or(Ok(()), |p| if p.as_os_str().is_empty() { Ok(()) } else { std::fs::create_dir_all(p) })
        .and_then(|_| std::fs::OpenOptions::new().create(true).append(true).open(path))
        .and_then(|mut f| writeln!(f, "{line}"));
    if let Err(e) = written {
        eprintln!("warning: could not append provenance to {}: {e}", path.display());
    }
}

fn main() -> ExitCode {
    let mut args: Vec<String> = std::env::args().collect();
    if let Some(path) = config::config_path(&args) {
        match config::splice(&Cli::command(), args, Path::new(&path)) {
            Ok(a) => args = a,
            Err(config::ConfigError(msg)) => {
                eprintln!("error: {msg}");
                return ExitCode::from(1);
            }
        }
    }
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if cli.threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global();
    }
    let start = Instant::now();
    let result = commands::run(&cli).and_then(|(out, ok)| {
        let text = out.render(cli.format);
        match &cli.output {
            Some(p) => std::fs::write(p, text).map_err(|e| Failure::failed(format!("cannot write {}: {e}", p.display())))?,
            None => print!("{text}"),
        }
        if ok {
            Ok(())
        } else {
            Err(Failure::failed(format!("{}: check failed", cli.command.name())))
        }
    });
    let code = match &result {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    };
    let ledger = cli.ledger.clone().unwrap_or_else(|| cache_dir(&cli).join("provenance.jsonl"));
    append_provenance(
        &ledger,
        &args[1..],
        cli.command.name(),
        start.elapsed().as_secs_f64(),
        code,
        rayon::current_num_threads(),
    );
    ExitCode::from(code)
}
