//! `coded-matmul`: experiment driver for coded distributed matrix
//! multiplication.
//!
//! - `run <config>` executes every `[scenario]` section of a config file
//!   and emits one CSV.
//! - `preset <name>` does the same for a built-in experiment (`fig1`,
//!   `fig2`, `fig4`, `fig5`, `table4`).
//! - `selftest <scheme>` runs one scheme end to end on exact-field
//!   operands: encode, straggle the maximum tolerable worker set, decode
//!   and compare against a direct multiplication.
//! - `code validate <file>` parses a code catalog and checks recovery
//!   from every (or a sample of) k-subsets of nodes.
//! - `plotdata <csv>` splits a result CSV into per-series data files.
//!
//! Seeds resolve in order: `--seed` flag, then the `CODED_MATMUL_SEED`
//! environment variable, then the config value or built-in default.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use coded_matmul::{
    emit_plotdata, parse_catalog, parse_config, preset, rows_to_csv, run_scenario, sample_validate, selftest, validate_mds,
    Catalog, RunRow, Scenario, SchemeKind,
};

const SEED_ENV: &str = "CODED_MATMUL_SEED";

#[derive(Parser)]
#[command(
    name = "coded-matmul",
    version,
    about = "Coded distributed matrix-multiplication experiments: latency simulation, communication costs and exact-recovery checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every scenario in a config file and emit one CSV
    Run {
        /// Config file of `[scenario]` sections with `key = value` lines
        config: PathBuf,
        /// Write the CSV to this file instead of stdout
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Run a built-in experiment preset and emit one CSV
    Preset {
        /// One of: fig1, fig2, fig4, fig5, table4
        name: String,
        /// Override the random seed for every scenario in the preset
        #[arg(long)]
        seed: Option<u64>,
        /// Override the Monte Carlo trial count for every scenario
        #[arg(long)]
        trials: Option<usize>,
        /// Write the CSV to this file instead of stdout
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Encode, straggle, decode and verify one scheme on exact operands
    Selftest {
        /// Scheme: uncoded, poly, matdot, amds or asym
        scheme: SchemeKind,
        /// Row-block count (split order `m` for poly/matdot); at most 6
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Column-block count / processors per node; k*b at most 64
        #[arg(long, default_value_t = 2)]
        b: usize,
        /// Maximum summands per coded cell
        #[arg(long, default_value_t = 2)]
        sigma: usize,
        /// Random seed for operands and the straggler set
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Code-catalog utilities
    Code {
        #[command(subcommand)]
        command: CodeCommand,
    },
    /// Split a result CSV into per-(scenario, scheme) plot series files
    Plotdata {
        /// CSV produced by `run` or `preset`
        csv: PathBuf,
        /// Directory to write the `.dat` files into
        #[arg(long, value_name = "DIR", default_value = ".")]
        dir: PathBuf,
    },
}

#[derive(Subcommand)]
enum CodeCommand {
    /// Parse a catalog file and verify recovery from k-subsets of nodes
    Validate {
        /// Catalog file (`arraycode ...` or `asymcode ...` header)
        catalog: PathBuf,
        /// Subset sample size for codes too large to enumerate
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Random seed for subset sampling
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Run { config, out } => cmd_run(&config, out.as_deref()),
        Command::Preset { name, seed, trials, out } => cmd_preset(&name, seed, trials, out.as_deref()),
        Command::Selftest {
            scheme,
            k,
            b,
            sigma,
            seed,
        } => cmd_selftest(scheme, k, b, sigma, seed),
        Command::Code {
            command: CodeCommand::Validate { catalog, samples, seed },
        } => cmd_validate(&catalog, samples, seed),
        Command::Plotdata { csv, dir } => cmd_plotdata(&csv, &dir),
    }
}

/// The seed from `CODED_MATMUL_SEED`, if set; an error if set but unusable.
fn env_seed() -> Result<Option<u64>, String> {
    match std::env::var(SEED_ENV) {
        Ok(text) => text
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| format!("{SEED_ENV} must be an unsigned integer, got {text:?}")),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(err) => Err(format!("{SEED_ENV}: {err}")),
    }
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|err| format!("cannot read {}: {err}", path.display()))
}

/// Which `[scenario]` sections of a config set `seed` explicitly, in
/// file order — those keep their value when the environment supplies a
/// fallback seed.
fn sections_with_explicit_seed(text: &str) -> Vec<bool> {
    let mut flags = Vec::new();
    for raw in text.lines() {
        let content = raw.trim();
        if content == "[scenario]" {
            flags.push(false);
        } else if !content.starts_with('#') {
            if let Some((key, _)) = content.split_once('=') {
                if key.trim() == "seed" {
                    if let Some(last) = flags.last_mut() {
                        *last = true;
                    }
                }
            }
        }
    }
    flags
}

fn run_to_csv(scenarios: &[Scenario]) -> String {
    let rows: Vec<RunRow> = scenarios.iter().flat_map(run_scenario).collect();
    rows_to_csv(&rows)
}

fn write_csv(csv: &str, out: Option<&Path>) -> Result<ExitCode, String> {
    match out {
        Some(path) => {
            fs::write(path, csv).map_err(|err| format!("cannot write {}: {err}", path.display()))?;
            eprintln!(
                "wrote {} ({} data rows)",
                path.display(),
                csv.lines().count().saturating_sub(2)
            );
        }
        None => print!("{csv}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_run(config: &Path, out: Option<&Path>) -> Result<ExitCode, String> {
    let text = read(config)?;
    let mut scenarios = parse_config(&text).map_err(|err| format!("{}: {err}", config.display()))?;
    if let Some(seed) = env_seed()? {
        for (scenario, explicit) in scenarios.iter_mut().zip(sections_with_explicit_seed(&text)) {
            if !explicit {
                scenario.seed = seed;
            }
        }
    }
    write_csv(&run_to_csv(&scenarios), out)
}

fn cmd_preset(name: &str, seed: Option<u64>, trials: Option<usize>, out: Option<&Path>) -> Result<ExitCode, String> {
    let text = preset(name).map_err(|err| err.to_string())?;
    let mut scenarios = parse_config(&text).expect("preset configs always parse");
    let seed = match seed {
        Some(seed) => Some(seed),
        None => env_seed()?,
    };
    for scenario in &mut scenarios {
        if let Some(seed) = seed {
            scenario.seed = seed;
        }
        if let Some(trials) = trials {
            scenario.trials = trials;
        }
    }
    write_csv(&run_to_csv(&scenarios), out)
}

fn cmd_selftest(scheme: SchemeKind, k: usize, b: usize, sigma: usize, seed: Option<u64>) -> Result<ExitCode, String> {
    let seed = match seed {
        Some(seed) => Some(seed),
        None => env_seed()?,
    }
    .unwrap_or(7);
    let report = selftest(scheme, k, b, sigma, seed).map_err(|err| err.to_string())?;
    let verdict = if report.passed { "PASS" } else { "FAIL" };
    let trace = report
        .peel_trace
        .map(|steps| format!("; peeling steps: {steps}"))
        .unwrap_or_default();
    println!(
        "selftest {} (k={k} b={b} sigma={sigma} seed={seed}): {verdict} — {}{trace}",
        report.scheme.name(),
        report.detail
    );
    Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn cmd_validate(catalog: &Path, samples: usize, seed: Option<u64>) -> Result<ExitCode, String> {
    let text = read(catalog)?;
    let parsed = parse_catalog(&text).map_err(|err| format!("{}: {err}", catalog.display()))?;
    let seed = match seed {
        Some(seed) => Some(seed),
        None => env_seed()?,
    }
    .unwrap_or(7);
    let (label, verdict) = match &parsed {
        Catalog::Array(code) => {
            let label = format!(
                "arraycode n={} k={} b={} sigma={}",
                code.n(),
                code.k(),
                code.b(),
                code.sigma()
            );
            match validate_mds(code) {
                (true, _) => (
                    label,
                    Ok(format!("every {}-of-{} node subset recovers all sources", code.k(), code.n())),
                ),
                (false, witness) => (
                    label,
                    Err(format!("nodes {:?} cannot recover all sources", witness.unwrap_or_default())),
                ),
            }
        }
        Catalog::Asym(code) => {
            let label = format!("asymcode n={} k={} b={} sigma={}", code.n(), code.k(), code.b(), code.sigma());
            match sample_validate(code, samples, seed) {
                (0, _) => (
                    label,
                    Ok(format!(
                        "no failing subset among up to {samples} sampled {}-of-{} subsets",
                        code.k(),
                        code.n()
                    )),
                ),
                (failures, witness) => (
                    label,
                    Err(format!(
                        "{failures} sampled subsets fail; first witness: nodes {:?}",
                        witness.unwrap_or_default()
                    )),
                ),
            }
        }
    };
    match verdict {
        Ok(detail) => {
            println!("{}: valid — {detail}", label);
            Ok(ExitCode::SUCCESS)
        }
        Err(detail) => {
            println!("{}: INVALID — {detail}", label);
            Ok(ExitCode::FAILURE)
        }
    }
}

fn cmd_plotdata(csv: &Path, dir: &Path) -> Result<ExitCode, String> {
    let text = read(csv)?;
    let files = emit_plotdata(&text).map_err(|err| format!("{}: {err}", csv.display()))?;
    fs::create_dir_all(dir).map_err(|err| format!("cannot create {}: {err}", dir.display()))?;
    for (name, contents) in &files {
        let path = dir.join(name);
        fs::write(&path, contents).map_err(|err| format!("cannot write {}: {err}", path.display()))?;
        println!("{}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}
