//! Experiment harness: scenario configs, preset sweeps, CSV emission,
//! an end-to-end exactness self-test, and plot-data splitting.
//!
//! A scenario fixes the cluster parameters and sweeps one variable
//! ([`SweepVar`]) across a list of points; [`run_scenario`] produces
//! one row per (scheme, point) holding the Monte Carlo estimate, both
//! closed forms and the communication overheads. Rows never abort a
//! sweep: a point whose preconditions fail carries the message in its
//! `error` column instead.
//!
//! Config files are flat `key = value` text under `[scenario]`
//! section headers — diff-friendly and language-agnostic. The built-in
//! presets ([`preset`]) are ordinary configs embedded as strings, so
//! `preset fig1` and `run fig1.cfg` share one code path.
//!
//! The CSV schema is versioned by its leading comment line and floats
//! are printed with fixed six-digit precision, so identical inputs
//! yield byte-identical files.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::arraycode::{builtin_5222, max_blocklength, search_code};
use crate::asymcode::{build_asym_code, max_blocklength_asym};
use crate::cluster::{encode_tasks, encode_tasks_asym, ClusterPlan};
use crate::comm::{comm_symbols, CommCost};
use crate::error::Error;
use crate::latency::{epsilon_for_stragglers, LatencyParams, SchemeKind};
use crate::matrix::{matmul_oracle, DenseMatrix};
use crate::partition::{assemble, compute_blocks, grid_plan, PartitionPlan, SourceBlock, TaskDescriptor};
use crate::peel::{peel_decode, PeelOutcome};
use crate::ring::Ring;
use crate::schemes::{matdot_decode, matdot_encode, poly_decode, poly_encode, uncoded_plan, MatDotCode, PolyCode};
use crate::sim::{mc_simulate, SimOutcome};
use crate::Result;

/// Leading comment line that versions the CSV schema.
pub const CSV_SCHEMA: &str = "# coded-matmul csv schema v1";

const CSV_HEADER: &str = "scenario,scheme,sweep,sweep_value,k,n,t,b,sigma,p,c,mu,epsilon,delta,trials,seed,\
mc_mean_total,mc_var_total,mc_mean_encode,mc_mean_parallel,mc_mean_decode,\
cf_total_natural,cf_total_hnumber,cf_encode_hnumber,cf_parallel_hnumber,cf_decode_hnumber,\
ms_overhead,sm_overhead,total_overhead,error";

// ---------- Scenario description ----------

/// The variable a scenario sweeps. `CommCost` sweeps the problem size
/// `k` underneath but reports the resulting total communication
/// overhead as the x-value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    K,
    PEqualsC,
    Epsilon,
    CommCost,
}

impl SweepVar {
    pub fn name(self) -> &'static str {
        match self {
            SweepVar::K => "k",
            SweepVar::PEqualsC => "p_equals_c",
            SweepVar::Epsilon => "epsilon",
            SweepVar::CommCost => "comm_cost",
        }
    }

    fn parse(text: &str, line: usize) -> Result<SweepVar> {
        match text {
            "k" => Ok(SweepVar::K),
            "p_equals_c" => Ok(SweepVar::PEqualsC),
            "epsilon" => Ok(SweepVar::Epsilon),
            "comm_cost" => Ok(SweepVar::CommCost),
            other => Err(Error::Parse {
                line,
                detail: format!("unknown sweep variable `{other}`"),
            }),
        }
    }
}

/// How a scenario chooses the blocklength `n` (equivalently the
/// straggler allowance `t = n - k`) at each sweep point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StragglerRule {
    /// `n` is the classical array-code blocklength bound at (k, b, sigma).
    Classical,
    /// `n` is the overhead-widened bound at (k, b, sigma, epsilon).
    Overhead,
    /// Fixed straggler fraction: `n = round(k / (1 - ratio))`; the
    /// asymmetric scheme solves for the overhead that reaches this `n`.
    Ratio(f64),
    /// Fixed straggler count: `n = k + t`.
    Fixed(usize),
    /// Classical bound for the uniform array code, overhead bound for
    /// everything else — the pairing the reference comparison table uses.
    Mixed,
}

impl StragglerRule {
    fn parse(text: &str, line: usize) -> Result<StragglerRule> {
        if let Some(rest) = text.strip_prefix("ratio:") {
            let ratio: f64 = rest.trim().parse().map_err(|_| Error::Parse {
                line,
                detail: format!("bad straggler ratio `{rest}`"),
            })?;
            if !(ratio > 0.0 && ratio < 1.0) {
                return Err(Error::Parse {
                    line,
                    detail: format!("straggler ratio {ratio} outside (0, 1)"),
                });
            }
            return Ok(StragglerRule::Ratio(ratio));
        }
        if let Some(rest) = text.strip_prefix("fixed:") {
            let t: usize = rest.trim().parse().map_err(|_| Error::Parse {
                line,
                detail: format!("bad straggler count `{rest}`"),
            })?;
            return Ok(StragglerRule::Fixed(t));
        }
        match text {
            "classical" => Ok(StragglerRule::Classical),
            "overhead" => Ok(StragglerRule::Overhead),
            "mixed" => Ok(StragglerRule::Mixed),
            other => Err(Error::Parse {
                line,
                detail: format!("unknown straggler rule `{other}`"),
            }),
        }
    }
}

/// One experiment: fixed parameters, a scheme list and a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub schemes: Vec<SchemeKind>,
    pub sweep: SweepVar,
    pub values: Vec<f64>,
    pub k: usize,
    pub b: usize,
    pub sigma: usize,
    pub p: usize,
    pub c: f64,
    pub mu: f64,
    pub trials: usize,
    pub seed: u64,
    pub epsilon: f64,
    pub delta: Option<f64>,
    pub straggler_rule: StragglerRule,
}

impl Default for Scenario {
    fn default() -> Scenario {
        Scenario {
            name: String::new(),
            schemes: Vec::new(),
            sweep: SweepVar::K,
            values: Vec::new(),
            k: 1000,
            b: 20,
            sigma: 7,
            p: 50,
            c: 50.0,
            mu: 1.0,
            trials: 10_000,
            seed: 7,
            epsilon: 0.0,
            delta: None,
            straggler_rule: StragglerRule::Classical,
        }
    }
}

// ---------- Config parsing ----------

fn parse_num<T: std::str::FromStr>(value: &str, line: usize, what: &str) -> Result<T> {
    value.trim().parse().map_err(|_| Error::Parse {
        line,
        detail: format!("bad {what} `{value}`"),
    })
}

fn finish_section(scenario: Scenario, start_line: usize) -> Result<Scenario> {
    if scenario.name.is_empty() {
        return Err(Error::Parse {
            line: start_line,
            detail: "scenario is missing `name`".into(),
        });
    }
    if scenario.schemes.is_empty() {
        return Err(Error::Parse {
            line: start_line,
            detail: format!("scenario `{}` lists no schemes", scenario.name),
        });
    }
    if scenario.values.is_empty() {
        return Err(Error::Parse {
            line: start_line,
            detail: format!("scenario `{}` lists no sweep values", scenario.name),
        });
    }
    if scenario.trials == 0 {
        return Err(Error::Parse {
            line: start_line,
            detail: format!("scenario `{}` needs trials >= 1", scenario.name),
        });
    }
    Ok(scenario)
}

/// Parse a config into its scenarios, in file order. Errors carry the
/// 1-based line they were found on.
pub fn parse_config(text: &str) -> Result<Vec<Scenario>> {
    let mut scenarios = Vec::new();
    let mut current: Option<(Scenario, usize)> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        if content.starts_with('[') {
            if content != "[scenario]" {
                return Err(Error::Parse {
                    line,
                    detail: format!("unknown section header `{content}`"),
                });
            }
            if let Some((scenario, start)) = current.take() {
                scenarios.push(finish_section(scenario, start)?);
            }
            current = Some((Scenario::default(), line));
            continue;
        }
        let Some((scenario, _)) = current.as_mut() else {
            return Err(Error::Parse {
                line,
                detail: "expected a `[scenario]` section header first".into(),
            });
        };
        let Some((key, value)) = content.split_once('=') else {
            return Err(Error::Parse {
                line,
                detail: format!("expected `key = value`, got `{content}`"),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        match key {
            "name" => scenario.name = value.to_string(),
            "schemes" => {
                scenario.schemes = value
                    .split(',')
                    .map(|s| {
                        s.parse::<SchemeKind>().map_err(|e| Error::Parse {
                            line,
                            detail: e.to_string(),
                        })
                    })
                    .collect::<Result<_>>()?;
            }
            "sweep" => scenario.sweep = SweepVar::parse(value, line)?,
            "values" => {
                scenario.values = value
                    .split(',')
                    .map(|v| parse_num::<f64>(v, line, "sweep value"))
                    .collect::<Result<_>>()?;
            }
            "k" => scenario.k = parse_num(value, line, "k")?,
            "b" => scenario.b = parse_num(value, line, "b")?,
            "sigma" => scenario.sigma = parse_num(value, line, "sigma")?,
            "p" => scenario.p = parse_num(value, line, "p")?,
            "c" => scenario.c = parse_num(value, line, "c")?,
            "mu" => scenario.mu = parse_num(value, line, "mu")?,
            "trials" => scenario.trials = parse_num(value, line, "trials")?,
            "seed" => scenario.seed = parse_num(value, line, "seed")?,
            "epsilon" => scenario.epsilon = parse_num(value, line, "epsilon")?,
            "delta" => scenario.delta = Some(parse_num(value, line, "delta")?),
            "straggler_rule" => scenario.straggler_rule = StragglerRule::parse(value, line)?,
            other => {
                return Err(Error::Parse {
                    line,
                    detail: format!("unknown key `{other}`"),
                })
            }
        }
    }
    if let Some((scenario, start)) = current.take() {
        scenarios.push(finish_section(scenario, start)?);
    }
    if scenarios.is_empty() {
        return Err(Error::Parse {
            line: 1,
            detail: "config contains no `[scenario]` section".into(),
        });
    }
    Ok(scenarios)
}

// ---------- Presets ----------

const K_GRID: &str = "100,200,300,400,500,600,700,800,900,1000,1100,1200,1300,1400,1500,1600,1700,1800,1900,2000";

fn fig5_section(b: usize, epsilon: usize) -> String {
    format!(
        "[scenario]\nname = fig5_b{b}_eps{epsilon}\nschemes = asym\nsweep = comm_cost\n\
values = 50,100,250,500,750,1000,1500,2000,2500,3000\nb = {b}\nepsilon = {epsilon}\nstraggler_rule = overhead\n"
    )
}

/// Config text of a named preset experiment.
pub fn preset(name: &str) -> Result<String> {
    match name {
        // Latency vs problem size at the default cluster, redundancy
        // from the classical blocklength bound.
        "fig1" => Ok(format!(
            "[scenario]\nname = fig1\nschemes = uncoded,poly,matdot,amds\nsweep = k\nvalues = {K_GRID}\nstraggler_rule = classical\n"
        )),
        // Latency vs master power (p = c swept together) at k = 1000.
        "fig2" => Ok("[scenario]\nname = fig2\nschemes = uncoded,poly,matdot,amds\nsweep = p_equals_c\n\
values = 2,5,10,20,30,40,50,75,100\nk = 1000\nstraggler_rule = classical\n"
            .to_string()),
        // Latency vs problem size at a fixed 10% straggler fraction;
        // the asymmetric scheme solves for the overhead that tolerates
        // it, the uniform array code is annotated where it cannot.
        "fig4" => Ok(format!(
            "[scenario]\nname = fig4\nschemes = poly,matdot,amds,asym\nsweep = k\nvalues = {K_GRID}\nstraggler_rule = ratio:0.1\n"
        )),
        // Latency vs communication overhead for the asymmetric scheme
        // on a (b, epsilon) grid.
        "fig5" => Ok([(50, 3), (50, 4), (50, 5), (100, 3), (100, 4), (100, 5)]
            .iter()
            .map(|&(b, eps)| fig5_section(b, eps))
            .collect::<Vec<_>>()
            .join("\n")),
        // The scheme-comparison table: b = 100, epsilon = 3,
        // k in {100, 1000}, classical bound for the uniform array code
        // and the overhead bound for the rest.
        "table4" => Ok("[scenario]\nname = table4\nschemes = poly,matdot,amds,asym\nsweep = k\nvalues = 100,1000\n\
b = 100\nepsilon = 3\nstraggler_rule = mixed\n"
            .to_string()),
        other => Err(Error::Scenario { field: "preset", detail: format!("unknown preset `{other}`; expected fig1|fig2|fig4|fig5|table4") }),
    }
}

// ---------- Scenario execution ----------

/// One CSV row: the resolved point plus its measurements, or the
/// failure that prevented them.
#[derive(Debug, Clone)]
pub struct RunRow {
    pub scenario: String,
    pub scheme: SchemeKind,
    pub sweep: SweepVar,
    pub sweep_value: f64,
    pub k: usize,
    pub n: Option<usize>,
    pub b: usize,
    pub sigma: usize,
    pub p: usize,
    pub c: f64,
    pub mu: f64,
    pub epsilon: f64,
    pub delta: Option<f64>,
    pub trials: usize,
    pub seed: u64,
    pub sim: Option<SimOutcome>,
    pub comm: Option<CommCost>,
    pub error: Option<String>,
}

fn integer_value(value: f64, what: &str) -> Result<usize> {
    if value.fract() != 0.0 || !(1.0..=1e9).contains(&value) {
        return Err(Error::Scenario {
            field: "values",
            detail: format!("{what} sweep needs positive integers, got {value}"),
        });
    }
    Ok(value as usize)
}

/// Blocklength and overhead for one (scheme, point); also returns a
/// non-fatal annotation when the uniform array code is asked for more
/// redundancy than its bound supports.
fn resolve_point(scenario: &Scenario, scheme: SchemeKind, k: usize, epsilon: f64) -> Result<(usize, f64, Option<String>)> {
    if scheme == SchemeKind::Uncoded {
        return Ok((k, 0.0, None));
    }
    let (b, sigma) = (scenario.b, scenario.sigma);
    let (n, epsilon) = match scenario.straggler_rule {
        StragglerRule::Classical => (max_blocklength(k, b, sigma)?, epsilon),
        StragglerRule::Overhead => (max_blocklength_asym(k, b, sigma, epsilon)?, epsilon),
        StragglerRule::Fixed(t) => (k + t, epsilon),
        StragglerRule::Ratio(ratio) => {
            let n = ((k as f64 / (1.0 - ratio)).round() as usize).max(k + 1);
            match scheme {
                SchemeKind::Asym => (n, epsilon_for_stragglers(k, b, sigma, n)?),
                _ => (n, epsilon),
            }
        }
        StragglerRule::Mixed => match scheme {
            SchemeKind::Amds => (max_blocklength(k, b, sigma)?, epsilon),
            _ => (max_blocklength_asym(k, b, sigma, epsilon)?, epsilon),
        },
    };
    let mut note = None;
    if scheme == SchemeKind::Amds {
        let bound = max_blocklength(k, b, sigma)?;
        if n > bound {
            note = Some(format!(
                "n={n} exceeds the classical blocklength bound {bound}; no such uniform code exists"
            ));
        }
    }
    Ok((n, epsilon, note))
}

fn run_point(scenario: &Scenario, scheme: SchemeKind, value: f64) -> RunRow {
    let mut row = RunRow {
        scenario: scenario.name.clone(),
        scheme,
        sweep: scenario.sweep,
        sweep_value: value,
        k: scenario.k,
        n: None,
        b: scenario.b,
        sigma: scenario.sigma,
        p: scenario.p,
        c: scenario.c,
        mu: scenario.mu,
        epsilon: scenario.epsilon,
        delta: None,
        trials: scenario.trials,
        seed: scenario.seed,
        sim: None,
        comm: None,
        error: None,
    };
    let outcome = (|| -> Result<()> {
        let mut epsilon = scenario.epsilon;
        match scenario.sweep {
            SweepVar::K | SweepVar::CommCost => row.k = integer_value(value, "k")?,
            SweepVar::PEqualsC => {
                row.c = value;
                row.p = integer_value(value, "p")?;
            }
            SweepVar::Epsilon => epsilon = value,
        }
        let (n, epsilon, note) = resolve_point(scenario, scheme, row.k, epsilon)?;
        row.n = Some(n);
        row.epsilon = epsilon;
        row.error = note;
        let params = LatencyParams {
            k: row.k,
            n,
            b: row.b,
            sigma: row.sigma,
            mu: row.mu,
            c: row.c,
            p: row.p,
            epsilon,
            delta: scenario.delta,
            profile: None,
        };
        if scheme == SchemeKind::Asym {
            row.delta = Some(params.delta_value());
        }
        let comm = comm_symbols(scheme, &params, 1)?;
        row.sim = Some(mc_simulate(scheme, &params, scenario.trials, scenario.seed)?);
        if scenario.sweep == SweepVar::CommCost {
            row.sweep_value = comm.total_overhead;
        }
        row.comm = Some(comm);
        Ok(())
    })();
    if let Err(err) = outcome {
        row.error = Some(err.to_string());
    }
    row
}

/// Run every (scheme, sweep point) of a scenario, scheme-major.
/// Failures surface per row; the sweep always completes.
pub fn run_scenario(scenario: &Scenario) -> Vec<RunRow> {
    let mut rows = Vec::with_capacity(scenario.schemes.len() * scenario.values.len());
    for &scheme in &scenario.schemes {
        for &value in &scenario.values {
            rows.push(run_point(scenario, scheme, value));
        }
    }
    rows
}

// ---------- CSV emission ----------

fn push_f64(out: &mut String, value: f64) {
    let _ = write!(out, ",{value:.6}");
}

fn push_opt<T: std::fmt::Display>(out: &mut String, value: Option<T>) {
    match value {
        Some(v) => {
            let _ = write!(out, ",{v}");
        }
        None => out.push(','),
    }
}

fn push_opt_f64(out: &mut String, value: Option<f64>) {
    match value {
        Some(v) => push_f64(out, v),
        None => out.push(','),
    }
}

/// Render rows to the versioned CSV format (schema comment, header,
/// one line per row; floats at fixed six-digit precision).
pub fn rows_to_csv(rows: &[RunRow]) -> String {
    let mut out = String::new();
    out.push_str(CSV_SCHEMA);
    out.push('\n');
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        let _ = write!(out, "{},{},{}", row.scenario, row.scheme.name(), row.sweep.name());
        push_f64(&mut out, row.sweep_value);
        let _ = write!(out, ",{}", row.k);
        push_opt(&mut out, row.n);
        push_opt(&mut out, row.n.map(|n| n - row.k));
        let _ = write!(out, ",{},{},{}", row.b, row.sigma, row.p);
        push_f64(&mut out, row.c);
        push_f64(&mut out, row.mu);
        push_f64(&mut out, row.epsilon);
        push_opt_f64(&mut out, row.delta);
        let _ = write!(out, ",{},{}", row.trials, row.seed);
        let sim = row.sim.as_ref();
        push_opt_f64(&mut out, sim.map(|s| s.mean_total));
        push_opt_f64(&mut out, sim.map(|s| s.var_total));
        push_opt_f64(&mut out, sim.map(|s| s.mean_encode));
        push_opt_f64(&mut out, sim.map(|s| s.mean_parallel));
        push_opt_f64(&mut out, sim.map(|s| s.mean_decode));
        push_opt_f64(&mut out, sim.map(|s| s.closed_form_natural.total()));
        push_opt_f64(&mut out, sim.map(|s| s.closed_form_hnumber.total()));
        push_opt_f64(&mut out, sim.map(|s| s.closed_form_hnumber.encode));
        push_opt_f64(&mut out, sim.map(|s| s.closed_form_hnumber.parallel));
        push_opt_f64(&mut out, sim.map(|s| s.closed_form_hnumber.decode));
        let comm = row.comm.as_ref();
        push_opt_f64(&mut out, comm.map(|c| c.normalized_overhead_ms));
        push_opt_f64(&mut out, comm.map(|c| c.normalized_overhead_sm));
        push_opt_f64(&mut out, comm.map(|c| c.total_overhead));
        match &row.error {
            Some(msg) => {
                let _ = write!(out, ",{}", msg.replace(',', ";").replace('\n', " "));
            }
            None => out.push(','),
        }
        out.push('\n');
    }
    out
}

/// Parse a config, run every scenario in it and render one CSV.
pub fn run_config(text: &str) -> Result<String> {
    let scenarios = parse_config(text)?;
    let mut rows = Vec::new();
    for scenario in &scenarios {
        rows.extend(run_scenario(scenario));
    }
    Ok(rows_to_csv(&rows))
}

// ---------- Plot data ----------

/// Split a CSV produced by [`rows_to_csv`] into per-(scenario, scheme)
/// series files: `(filename, contents)` pairs with `x y logy_hint`
/// columns, where the hint marks problem-size sweeps (conventionally
/// drawn with a log y-axis). Rows with errors or without measurements
/// are skipped; an empty input yields no files.
pub fn emit_plotdata(csv: &str) -> Result<Vec<(String, String)>> {
    if csv.trim().is_empty() {
        return Ok(Vec::new());
    }
    let mut lines = csv.lines().enumerate();
    let Some((_, schema)) = lines.next() else {
        return Ok(Vec::new());
    };
    if schema.trim() != CSV_SCHEMA {
        return Err(Error::Parse {
            line: 1,
            detail: format!("expected schema line `{CSV_SCHEMA}`"),
        });
    }
    let Some((_, header)) = lines.next() else {
        return Err(Error::Parse {
            line: 2,
            detail: "missing header row".into(),
        });
    };
    let columns: Vec<&str> = header.split(',').collect();
    let find = |name: &str| -> Result<usize> {
        columns.iter().position(|c| *c == name).ok_or_else(|| Error::Parse {
            line: 2,
            detail: format!("missing column `{name}`"),
        })
    };
    let (c_scen, c_scheme, c_sweep, c_x, c_y, c_err) = (
        find("scenario")?,
        find("scheme")?,
        find("sweep")?,
        find("sweep_value")?,
        find("mc_mean_total")?,
        find("error")?,
    );

    let mut series: BTreeMap<(String, String), Vec<String>> = BTreeMap::new();
    for (idx, raw) in lines {
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != columns.len() {
            return Err(Error::Parse {
                line: idx + 1,
                detail: format!("expected {} fields, got {}", columns.len(), fields.len()),
            });
        }
        if !fields[c_err].is_empty() || fields[c_y].is_empty() {
            continue;
        }
        let hint = if fields[c_sweep] == "k" { 1 } else { 0 };
        series
            .entry((fields[c_scen].to_string(), fields[c_scheme].to_string()))
            .or_default()
            .push(format!("{} {} {hint}", fields[c_x], fields[c_y]));
    }
    Ok(series
        .into_iter()
        .map(|((scenario, scheme), rows)| {
            let name = format!("{scenario}_{scheme}.dat");
            let mut body = format!("# scenario={scenario} scheme={scheme} columns=sweep_value,mc_mean_total,logy_hint\n");
            body.push_str(&rows.join("\n"));
            body.push('\n');
            (name, body)
        })
        .collect())
}

// ---------- End-to-end exactness self-test ----------

/// Outcome of one [`selftest`] run.
#[derive(Debug, Clone)]
pub struct SelfTestReport {
    pub scheme: SchemeKind,
    pub passed: bool,
    pub detail: String,
    /// Peeling steps taken (array-code schemes only).
    pub peel_trace: Option<usize>,
}

fn first_mismatch(got: &DenseMatrix, want: &DenseMatrix) -> Option<(usize, usize)> {
    (0..want.rows())
        .flat_map(|r| (0..want.cols()).map(move |c| (r, c)))
        .find(|&(r, c)| got.get(r, c) != want.get(r, c))
}

fn pick_survivors(rng: &mut ChaCha8Rng, n: usize, keep: usize) -> Vec<usize> {
    let mut survivors = rand::seq::index::sample(rng, n, keep).into_vec();
    survivors.sort_unstable();
    survivors
}

fn peel_and_compare(
    plan: &ClusterPlan,
    partition_plan: &PartitionPlan,
    survivors: &[usize],
    blocks: &[SourceBlock],
    oracle: &DenseMatrix,
    kb: usize,
) -> Result<(bool, String, Option<usize>)> {
    let outputs = plan.evaluate(blocks)?;
    let equations = plan.survivor_equations(survivors, &outputs);
    match peel_decode(&equations, kb)? {
        PeelOutcome::Stuck { missing, .. } => Ok((
            false,
            format!("peeling stuck with {} sources unresolved", missing.len()),
            None,
        )),
        PeelOutcome::Complete { values, trace, .. } => {
            let decoded: Vec<SourceBlock> = values
                .into_iter()
                .enumerate()
                .map(|(i, value)| SourceBlock { index: i + 1, value })
                .collect();
            let got = assemble(&decoded, partition_plan)?;
            match first_mismatch(&got, oracle) {
                None => Ok((
                    true,
                    format!("decoded from survivors {survivors:?} in {} peeling steps", trace.len()),
                    Some(trace.len()),
                )),
                Some((r, c)) => Ok((false, format!("decode mismatch at row {r}, column {c}"), Some(trace.len()))),
            }
        }
    }
}

fn array_selftest(
    plan: &ClusterPlan,
    a: &DenseMatrix,
    b: &DenseMatrix,
    tasks: &[TaskDescriptor],
    partition_plan: &PartitionPlan,
    keep: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(bool, String, Option<usize>)> {
    let blocks = compute_blocks(a, b, tasks)?;
    let oracle = matmul_oracle(a, b)?;
    let survivors = pick_survivors(rng, plan.nodes(), keep);
    peel_and_compare(plan, partition_plan, &survivors, &blocks, &oracle, tasks.len())
}

/// Run one scheme end to end on random exact-field operands: encode,
/// straggle the maximum tolerable number of workers at random, decode
/// from the survivors and compare against [`matmul_oracle`]. For the
/// interpolation schemes `k` plays the part of the split order `m`.
pub fn selftest(scheme: SchemeKind, k: usize, b: usize, sigma: usize, seed: u64) -> Result<SelfTestReport> {
    if k == 0 || b == 0 || sigma == 0 {
        return Err(Error::Scenario {
            field: "selftest",
            detail: "k, b and sigma must be at least 1".into(),
        });
    }
    if k * b > 64 || k > 6 {
        return Err(Error::Scenario {
            field: "selftest",
            detail: format!("desk-scale only: need k <= 6 and k*b <= 64, got k={k}, b={b}"),
        });
    }
    let ring = Ring::default_field();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = 8;

    let (passed, detail, peel_trace) = match scheme {
        SchemeKind::Amds => {
            let code = if (k, b, sigma) == (2, 2, 2) {
                builtin_5222()
            } else {
                let n = max_blocklength(k, b, sigma)?.min(k + 3);
                search_code(n, k, b, sigma, seed)?
            };
            let a = DenseMatrix::random(&mut rng, rows, k, ring);
            let bm = DenseMatrix::random(&mut rng, rows, b, ring);
            let (partition_plan, tasks) = grid_plan(&a, &bm, k, b)?;
            let plan = encode_tasks(&code, &tasks)?;
            array_selftest(&plan, &a, &bm, &tasks, &partition_plan, k, &mut rng)?
        }
        SchemeKind::Asym => {
            let n = k + 2;
            let code = build_asym_code(n, k, b, sigma, 0.5, seed)?;
            let a = DenseMatrix::random(&mut rng, rows, k, ring);
            let bm = DenseMatrix::random(&mut rng, rows, b, ring);
            let (partition_plan, tasks) = grid_plan(&a, &bm, k, b)?;
            let plan = encode_tasks_asym(&code, &tasks)?;
            array_selftest(&plan, &a, &bm, &tasks, &partition_plan, k, &mut rng)?
        }
        SchemeKind::Poly => {
            let m = k;
            let code = PolyCode::new(m, m * m + 6, ring)?;
            let a = DenseMatrix::random(&mut rng, rows, m, ring);
            let bm = DenseMatrix::random(&mut rng, rows, m, ring);
            let oracle = matmul_oracle(&a, &bm)?;
            let (partition_plan, _) = grid_plan(&a, &bm, m, m)?;
            let tasks = poly_encode(&a, &bm, &code)?;
            let results: Vec<(i128, DenseMatrix)> = tasks.iter().map(|t| t.execute()).collect::<Result<_>>()?;
            let survivors = pick_survivors(&mut rng, results.len(), code.threshold());
            let kept: Vec<(i128, DenseMatrix)> = survivors.iter().map(|&i| results[i].clone()).collect();
            let blocks = poly_decode(&kept, m, ring)?;
            let got = assemble(&blocks, &partition_plan)?;
            match first_mismatch(&got, &oracle) {
                None => (
                    true,
                    format!(
                        "{} of {} workers sufficed (survivors {survivors:?})",
                        code.threshold(),
                        results.len()
                    ),
                    None,
                ),
                Some((r, c)) => (false, format!("decode mismatch at row {r}, column {c}"), None),
            }
        }
        SchemeKind::MatDot => {
            let m = k;
            let code = MatDotCode::new(m, 2 * m + 1, ring)?;
            let a = DenseMatrix::random(&mut rng, 4 * m, 3, ring);
            let bm = DenseMatrix::random(&mut rng, 4 * m, 2, ring);
            let oracle = matmul_oracle(&a, &bm)?;
            let tasks = matdot_encode(&a, &bm, &code)?;
            let results: Vec<(i128, DenseMatrix)> = tasks.iter().map(|t| t.execute()).collect::<Result<_>>()?;
            let survivors = pick_survivors(&mut rng, results.len(), code.threshold());
            let kept: Vec<(i128, DenseMatrix)> = survivors.iter().map(|&i| results[i].clone()).collect();
            let got = matdot_decode(&kept, m, ring)?;
            match first_mismatch(&got, &oracle) {
                None => (
                    true,
                    format!(
                        "{} of {} workers sufficed (survivors {survivors:?})",
                        code.threshold(),
                        results.len()
                    ),
                    None,
                ),
                Some((r, c)) => (false, format!("decode mismatch at row {r}, column {c}"), None),
            }
        }
        SchemeKind::Uncoded => {
            let a = DenseMatrix::random(&mut rng, rows, k, ring);
            let bm = DenseMatrix::random(&mut rng, rows, b, ring);
            let oracle = matmul_oracle(&a, &bm)?;
            let (partition_plan, tasks) = uncoded_plan(&a, &bm)?;
            let blocks = compute_blocks(&a, &bm, &tasks)?;
            let got = assemble(&blocks, &partition_plan)?;
            if let Some((r, c)) = first_mismatch(&got, &oracle) {
                (false, format!("reconstruction mismatch at row {r}, column {c}"), None)
            } else {
                // With any single worker missing, reconstruction is
                // impossible — expected, and worth stating in the report.
                let short = &blocks[1..];
                match assemble(short, &partition_plan) {
                    Err(_) => (
                        true,
                        "full set reconstructs exactly; any missing worker is unrecoverable (expected)".to_string(),
                        None,
                    ),
                    Ok(_) => (
                        false,
                        "reconstruction unexpectedly succeeded with a missing worker".to_string(),
                        None,
                    ),
                }
            }
        }
    };
    Ok(SelfTestReport {
        scheme,
        passed,
        detail,
        peel_trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "[scenario]\nname = smoke\nschemes = uncoded,poly\nsweep = k\nvalues = 100,200\n\
b = 4\ntrials = 50\nseed = 3\nstraggler_rule = classical\n";

    #[test]
    fn minimal_config_fills_defaults() {
        let scenarios = parse_config(SMALL).unwrap();
        assert_eq!(scenarios.len(), 1);
        let s = &scenarios[0];
        assert_eq!(s.name, "smoke");
        assert_eq!(s.schemes, vec![SchemeKind::Uncoded, SchemeKind::Poly]);
        assert_eq!((s.sigma, s.p, s.c, s.mu), (7, 50, 50.0, 1.0));
        assert_eq!(s.b, 4, "explicit keys override defaults");
        assert_eq!(s.straggler_rule, StragglerRule::Classical);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad_key = "[scenario]\nname = x\nschemes = poly\nvalues = 1\nwidgets = 3\n";
        match parse_config(bad_key) {
            Err(Error::Parse { line, detail }) => {
                assert_eq!(line, 5);
                assert!(detail.contains("widgets"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(
            matches!(parse_config("k = 3\n"), Err(Error::Parse { line: 1, .. })),
            "key before any section"
        );
        assert!(matches!(
            parse_config("[scenario]\nname = x\nschemes = nope\nvalues = 1\n"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(parse_config("[other]\n"), Err(Error::Parse { line: 1, .. })));
        assert!(
            matches!(
                parse_config("[scenario]\nname = x\nschemes = poly\n"),
                Err(Error::Parse { line: 1, .. })
            ),
            "missing values"
        );
        assert!(matches!(
            parse_config("[scenario]\nname = x\nschemes = poly\nvalues = 1\nstraggler_rule = ratio:2\n"),
            Err(Error::Parse { line: 5, .. })
        ));
        assert!(parse_config("").is_err());
    }

    #[test]
    fn preset_configs_parse() {
        for name in ["fig1", "fig2", "fig4", "fig5", "table4"] {
            let scenarios = parse_config(&preset(name).unwrap()).unwrap();
            assert!(!scenarios.is_empty(), "{name}");
        }
        let fig5 = parse_config(&preset("fig5").unwrap()).unwrap();
        assert_eq!(fig5.len(), 6);
        assert_eq!(fig5[0].name, "fig5_b50_eps3");
        assert_eq!(fig5[5].name, "fig5_b100_eps5");
        assert!(fig5
            .iter()
            .all(|s| s.schemes == vec![SchemeKind::Asym] && s.sweep == SweepVar::CommCost));
        assert!(preset("fig3").is_err());
    }

    #[test]
    fn comparison_table_preset_resolves_reference_redundancy() {
        let mut scenario = parse_config(&preset("table4").unwrap()).unwrap().remove(0);
        scenario.trials = 50;
        let rows = run_scenario(&scenario);
        assert_eq!(rows.len(), 8);
        let t: Vec<usize> = rows.iter().map(|r| r.n.unwrap() - r.k).collect();
        assert_eq!(t, vec![37, 27, 37, 27, 6, 6, 37, 27]);
        assert!(rows.iter().all(|r| r.error.is_none() && r.sim.is_some()));
    }

    #[test]
    fn csv_runs_are_byte_identical() {
        let first = run_config(SMALL).unwrap();
        let second = run_config(SMALL).unwrap();
        assert_eq!(first, second);
        assert!(first.starts_with(CSV_SCHEMA));
        assert_eq!(first.lines().count(), 2 + 4, "schema + header + 2 schemes x 2 points");
        let header_fields = first.lines().nth(1).unwrap().split(',').count();
        for row in first.lines().skip(2) {
            assert_eq!(row.split(',').count(), header_fields, "row stays aligned: {row}");
        }
    }

    #[test]
    fn ratio_rule_annotates_uniform_codes_beyond_their_bound() {
        let config = "[scenario]\nname = r\nschemes = amds\nsweep = k\nvalues = 100\ntrials = 20\nstraggler_rule = ratio:0.1\n";
        let scenario = parse_config(config).unwrap().remove(0);
        let row = run_scenario(&scenario).remove(0);
        assert_eq!(row.n, Some(111));
        let note = row.error.expect("bound annotation");
        assert!(note.contains("classical blocklength bound 106"), "{note}");
        assert!(row.sim.is_some(), "annotation is non-fatal; the model still runs");
    }

    #[test]
    fn ratio_rule_solves_overhead_for_the_asymmetric_scheme() {
        let config = "[scenario]\nname = r\nschemes = asym\nsweep = k\nvalues = 100\ntrials = 20\nstraggler_rule = ratio:0.1\n";
        let scenario = parse_config(config).unwrap().remove(0);
        let row = run_scenario(&scenario).remove(0);
        assert_eq!(row.n, Some(111));
        assert!(row.error.is_none());
        assert!(row.epsilon > 0.0);
        assert!(crate::asymcode::max_blocklength_asym(100, 20, 7, row.epsilon).unwrap() >= 111);
    }

    #[test]
    fn sweep_value_reports_overhead_on_comm_cost_sweeps() {
        let config = "[scenario]\nname = cc\nschemes = asym\nsweep = comm_cost\nvalues = 50,100\n\
b = 50\nepsilon = 3\ntrials = 20\nstraggler_rule = overhead\n";
        let scenario = parse_config(config).unwrap().remove(0);
        let rows = run_scenario(&scenario);
        for row in &rows {
            let comm = row.comm.as_ref().unwrap();
            assert_eq!(row.sweep_value, comm.total_overhead);
            assert!(row.sweep_value > 1.0, "coded overhead is substantial here");
        }
    }

    #[test]
    fn bad_sweep_points_fail_row_local_not_fatal() {
        let config =
            "[scenario]\nname = part\nschemes = poly\nsweep = k\nvalues = 100.5,100\ntrials = 20\nstraggler_rule = classical\n";
        let scenario = parse_config(config).unwrap().remove(0);
        let rows = run_scenario(&scenario);
        assert!(rows[0].error.as_deref().unwrap().contains("integer"));
        assert!(rows[1].error.is_none() && rows[1].sim.is_some());
    }

    #[test]
    fn selftest_passes_for_every_scheme() {
        for (scheme, k, b, sigma) in [
            (SchemeKind::Amds, 2, 2, 2),
            (SchemeKind::Asym, 2, 2, 2),
            (SchemeKind::Poly, 2, 2, 2),
            (SchemeKind::MatDot, 2, 2, 2),
            (SchemeKind::Uncoded, 2, 3, 1),
        ] {
            let report = selftest(scheme, k, b, sigma, 11).unwrap();
            assert!(report.passed, "{scheme:?}: {}", report.detail);
        }
        let amds = selftest(SchemeKind::Amds, 2, 2, 2, 11).unwrap();
        assert!(amds.peel_trace.unwrap() == 4, "2x2 grid peels all four sources");
        assert!(selftest(SchemeKind::Amds, 100, 100, 7, 1).is_err(), "desk-scale guard");
    }

    #[test]
    fn plotdata_splits_series_and_tolerates_empty_input() {
        let csv = run_config(SMALL).unwrap();
        let files = emit_plotdata(&csv).unwrap();
        assert_eq!(files.len(), 2);
        let (name, body) = &files[0];
        assert!(name.ends_with(".dat"));
        assert_eq!(body.lines().count(), 3, "comment + 2 points");
        assert!(
            body.lines().nth(1).unwrap().ends_with(" 1"),
            "k sweep carries the log-scale hint"
        );
        assert!(emit_plotdata("").unwrap().is_empty());
        assert!(emit_plotdata("scenario,scheme\n").is_err(), "missing schema line");
    }
}
