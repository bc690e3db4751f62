//! Command-line front end shared by the `paralab` binary and the tests.
//!
//! Exit codes: 0 clean, 1 invariant violations, 2 usage error, 3 budget
//! guard, 4 any other failure.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use log::info;
use serde_json::json;

use super::cache::Cache;
use super::plot;
use super::record::{ExperimentRecord, Params};
use super::suites::{self, SuiteOutput};
use super::symbol_io::read_symbol;
use crate::error::{Error, Result};
use crate::extremal::{GrowthMode, DEFAULT_POWER_BUDGET};
use crate::sampling::{random_symbol, rng, SymbolDistribution};

pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_FAILURE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "paralab", version, about = "Dyadic paraproduct and BMO experiments")]
pub struct Cli {
    /// Output directory for CSV, JSON and SVG files.
    #[arg(long, global = true, default_value = "paralab-out")]
    pub out: PathBuf,
    /// Also write an SVG growth plot.
    #[arg(long, global = true)]
    pub plot: bool,
    /// Recompute even if a cached record exists.
    #[arg(long, global = true)]
    pub no_cache: bool,
    /// Cache directory (default: $PARALAB_CACHE_DIR or <out>/cache).
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Suppress the summary table.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct FuzzArgs {
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, default_value_t = 8)]
    pub nmax: usize,
    #[arg(long, default_value_t = 6)]
    pub kmax: usize,
}

#[derive(Debug, Subcommand, Clone)]
pub enum Command {
    /// L^inf, BMO and paraproduct norms of one symbol.
    Norms {
        /// JSON symbol file; a random symbol is used when absent.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        depth: usize,
    },
    /// Lower bounds for the paraproduct norm of contractive witnesses.
    #[command(name = "growth-theorem11")]
    GrowthTheorem11 {
        #[arg(long, value_enum, default_value_t = ModeArg::Pairing)]
        mode: ModeArg,
        #[arg(long, value_delimiter = ',', default_value = "4,16,64,256")]
        n: Vec<usize>,
        #[arg(long, default_value_t = DEFAULT_POWER_BUDGET)]
        budget: usize,
    },
    /// Rank-one search for the S^1 norm of triangular truncation.
    GrowthTriangle {
        #[arg(long, value_delimiter = ',', default_value = "2,4,8,16,32,64")]
        n: Vec<usize>,
        #[arg(long, default_value_t = 8)]
        starts: usize,
    },
    /// BMO_c norm of the sweep of the witness symbols.
    Sweep {
        #[arg(long, value_delimiter = ',', default_value = "2,4,8")]
        n: Vec<usize>,
        #[arg(long, default_value_t = DEFAULT_POWER_BUDGET)]
        budget: usize,
    },
    /// John-Nirenberg quantity against BMO_cr on random symbols.
    JnCheck {
        #[command(flatten)]
        fuzz: FuzzArgs,
        #[arg(long, default_value_t = 2.0)]
        q: f64,
    },
    /// Square function bound on random symbols.
    #[command(name = "prop22-fuzz")]
    Prop22Fuzz {
        #[command(flatten)]
        fuzz: FuzzArgs,
    },
    /// Algebraic identities on random instances.
    IdentitySuite {
        #[arg(long, default_value_t = 50)]
        instances: usize,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum ModeArg {
    Pairing,
    Power,
}

impl From<ModeArg> for GrowthMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Pairing => GrowthMode::Pairing,
            ModeArg::Power => GrowthMode::Power,
        }
    }
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Norms { .. } => "norms",
            Command::GrowthTheorem11 { .. } => "growth-theorem11",
            Command::GrowthTriangle { .. } => "growth-triangle",
            Command::Sweep { .. } => "sweep",
            Command::JnCheck { .. } => "jn-check",
            Command::Prop22Fuzz { .. } => "prop22-fuzz",
            Command::IdentitySuite { .. } => "identity-suite",
        }
    }
}

fn fuzz_params(p: &mut Params, f: &FuzzArgs) {
    p.insert("samples".into(), json!(f.samples));
    p.insert("nmax".into(), json!(f.nmax));
    p.insert("kmax".into(), json!(f.kmax));
}

/// Canonical parameters; the raw symbol file contents stand in for `--input`.
pub fn params_for(command: &Command, seed: u64) -> Result<Params> {
    let mut p = Params::new();
    p.insert("seed".into(), json!(seed));
    match command {
        Command::Norms { input, n, depth } => match input {
            Some(path) => {
                let text = std::fs::read_to_string(path)?;
                let value: serde_json::Value = serde_json::from_str(&text)?;
                p.insert("input".into(), value);
            }
            None => {
                p.insert("n".into(), json!(n));
                p.insert("depth".into(), json!(depth));
            }
        },
        Command::GrowthTheorem11 { mode, n, budget } => {
            p.insert("mode".into(), json!(format!("{mode:?}").to_lowercase()));
            p.insert("n".into(), json!(n));
            p.insert("budget".into(), json!(budget));
        }
        Command::GrowthTriangle { n, starts } => {
            p.insert("n".into(), json!(n));
            p.insert("starts".into(), json!(starts));
        }
        Command::Sweep { n, budget } => {
            p.insert("n".into(), json!(n));
            p.insert("budget".into(), json!(budget));
        }
        Command::JnCheck { fuzz, q } => {
            fuzz_params(&mut p, fuzz);
            p.insert("q".into(), json!(q));
        }
        Command::Prop22Fuzz { fuzz } => fuzz_params(&mut p, fuzz),
        Command::IdentitySuite { instances } => {
            p.insert("instances".into(), json!(instances));
        }
    }
    Ok(p)
}

pub fn run_suite(command: &Command, seed: u64) -> Result<SuiteOutput> {
    match command {
        Command::Norms { input, n, depth } => {
            let b = match input {
                Some(path) => read_symbol(path)?,
                None => random_symbol(&mut rng(seed), *n, *depth, SymbolDistribution { contractive: true })?,
            };
            suites::norms(&b, seed)
        }
        Command::GrowthTheorem11 { mode, n, budget } => suites::growth_theorem11(n, (*mode).into(), seed, *budget),
        Command::GrowthTriangle { n, starts } => suites::growth_triangle(n, *starts, seed),
        Command::Sweep { n, budget } => suites::sweep_growth(n, *budget),
        Command::JnCheck { fuzz, q } => suites::jn_check(fuzz.samples, fuzz.nmax, fuzz.kmax, *q, seed),
        Command::Prop22Fuzz { fuzz } => suites::square_bound_fuzz(fuzz.samples, fuzz.nmax, fuzz.kmax, seed),
        Command::IdentitySuite { instances } => suites::identity_suite(*instances, seed),
    }
}

/// What a run produced.
#[derive(Debug)]
pub struct Outcome {
    pub record: ExperimentRecord,
    pub from_cache: bool,
    pub csv_path: PathBuf,
}

fn cache_for(cli: &Cli) -> Cache {
    if cli.no_cache {
        return Cache::disabled();
    }
    match &cli.cache_dir {
        Some(d) => Cache::open(d),
        None => Cache::from_env(cli.out.join("cache")),
    }
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    let name = cli.command.name();
    let params = params_for(&cli.command, cli.seed)?;
    let cache = cache_for(cli);
    let (record, from_cache) = match cache.get(name, &params) {
        Some(r) => {
            info!("{name}: cache hit {}", r.cache_key);
            (r, true)
        }
        None => {
            let start = Instant::now();
            let out = run_suite(&cli.command, cli.seed)?;
            let mut record =
                ExperimentRecord::new(name, params, out.table, out.violations, start.elapsed().as_secs_f64());
            record.plot = out.plot;
            cache.put(&record);
            (record, false)
        }
    };
    std::fs::create_dir_all(&cli.out)?;
    let csv_path = cli.out.join(format!("{name}.csv"));
    record.table.write_csv(&csv_path)?;
    std::fs::write(cli.out.join(format!("{name}.json")), serde_json::to_string_pretty(&record)?)?;
    if cli.plot {
        if let Some(spec) = &record.plot {
            std::fs::write(cli.out.join(format!("{name}.svg")), plot::render(spec, &record.table))?;
        }
    }
    Ok(Outcome { record, from_cache, csv_path })
}

pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Budget(_) => EXIT_BUDGET,
        _ => EXIT_FAILURE,
    }
}

/// Parses `args`, runs, prints the summary and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(outcome) => report(&cli, &outcome),
        Err(e) => {
            eprintln!("paralab {}: {e}", cli.command.name());
            exit_code_for(&e)
        }
    }
}

fn report(cli: &Cli, outcome: &Outcome) -> i32 {
    let r = &outcome.record;
    if !cli.quiet {
        print!("{}", r.table.render());
        let src = if outcome.from_cache { " (cached)" } else { "" };
        println!("{}: wrote {}{src}", r.experiment, display(&outcome.csv_path));
    }
    for v in &r.violations {
        eprintln!("violation: {v}");
    }
    if r.violations.is_empty() {
        0
    } else {
        eprintln!("{}: {} violation(s)", r.experiment, r.violations.len());
        EXIT_VIOLATION
    }
}

fn display(p: &Path) -> String {
    p.display().to_string()
}
