//! Command-line harness. Every subcommand builds its entire output string
//! before printing, so identical requests produce identical bytes. Exit
//! codes: 0 success, 1 domain error (error kind and message on stderr),
//! 2 usage error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::error::SglError;
use crate::exact::{
    bound_fixed_point, bound_grid_search, bound_residual, brute_force_opt, exact_expected_values,
    g_curve, monte_carlo_expected_values, EnumCaps, ExpectationReport, Mode,
};
use crate::greedy::{
    check_potential_monotone, random_order_greedy, PermutationSource, TieBreakPolicy,
};
use crate::ground::ElementSet;
use crate::instances::{
    builtin_instance, compose_copies, extend_with_dummies, instance_to_json, read_instance,
    read_swm_instance, swm_to_coverage_instance, Instance,
};
use crate::oracle::{verify_properties, PropertyReport, VerifyMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy)]
enum SeedArg {
    Fixed(u64),
    Entropy,
}

fn parse_seed(s: &str) -> Result<SeedArg, String> {
    if s == "entropy" {
        return Ok(SeedArg::Entropy);
    }
    s.parse()
        .map(SeedArg::Fixed)
        .map_err(|_| format!("`{s}` is neither an unsigned integer nor `entropy`"))
}

fn parse_tie(s: &str) -> Result<TieBreakPolicy, String> {
    TieBreakPolicy::parse_spec(s).map_err(|e| e.to_string())
}

#[derive(Parser, Debug)]
#[command(
    name = "sgl",
    version,
    about = "Random-order greedy for monotone submodular maximization over partition matroids",
    after_help = "The environment variable SGL_ENUM_CAP overrides both exact-enumeration caps \
                  (m! orders and base count)."
)]
struct Cli {
    /// Output format. Human output rounds numbers to 6 decimals; csv and
    /// json keep full precision.
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct SourceArgs {
    /// Builtin instance: 7-12 or 19-33.
    #[arg(long, value_name = "NAME", conflicts_with = "instance")]
    paper: Option<String>,
    /// Path to an instance document (weighted-coverage or swm-coverage; SWM
    /// documents are reduced on load).
    #[arg(long, value_name = "PATH")]
    instance: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ModeArgs {
    /// Enumerate all m! arrival orders exactly.
    #[arg(long)]
    exact: bool,
    /// Estimate over this many seeded random orders instead.
    #[arg(long, value_name = "N", conflicts_with = "exact")]
    trials: Option<u64>,
    /// Seed for the random orders, or `entropy`.
    #[arg(long, default_value = "0", value_parser = parse_seed)]
    seed: SeedArg,
    /// Worker threads for Monte Carlo (results do not depend on this).
    #[arg(long, value_name = "T")]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// One greedy run under a fixed or seeded arrival order.
    Solve {
        #[command(flatten)]
        source: SourceArgs,
        /// Comma-separated part names; every part exactly once.
        #[arg(long, value_name = "PARTS")]
        order: Option<String>,
        /// Seed for a uniform order when --order is absent, or `entropy`.
        #[arg(long, default_value = "0", value_parser = parse_seed)]
        seed: SeedArg,
        #[arg(long, default_value = "first-name", value_parser = parse_tie)]
        tie: TieBreakPolicy,
        /// Append the per-step trace to human output (csv and json always
        /// carry the steps).
        #[arg(long)]
        trace: bool,
    },
    /// Brute-force optimum over all bases.
    Opt {
        #[command(flatten)]
        source: SourceArgs,
    },
    /// Expected greedy value and approximation ratio.
    Ratio {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        mode: ModeArgs,
        #[arg(long, default_value = "first-name", value_parser = parse_tie)]
        tie: TieBreakPolicy,
    },
    /// Per-step expected values against the lower-bound curve g(i/m).
    Curve {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        mode: ModeArgs,
        #[arg(long, default_value = "first-name", value_parser = parse_tie)]
        tie: TieBreakPolicy,
    },
    /// Solve the ratio-bound quadratic at (p, q) or over a grid.
    Bound {
        #[arg(long, requires = "q", conflicts_with = "grid")]
        p: Option<f64>,
        #[arg(long, requires = "p")]
        q: Option<f64>,
        /// Grid resolution: search {1/N, ..., (N-1)/N}².
        #[arg(long, value_name = "N")]
        grid: Option<usize>,
    },
    /// Emit a builtin instance document.
    Paper {
        /// 7-12 or 19-33.
        name: String,
        /// Write the document here instead of stdout.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Reduce an SWM document to its weighted-coverage instance.
    ReduceSwm {
        /// Path to an swm-coverage document.
        #[arg(long, value_name = "PATH")]
        instance: PathBuf,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Add dummy singleton parts that the objective ignores.
    Extend {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, value_name = "N")]
        dummies: usize,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Concatenate disjoint renamed copies of an instance.
    Compose {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, value_name = "K")]
        copies: usize,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Check non-negativity, monotonicity, submodularity and the derived
    /// marginal inequalities; exits 1 if any violation is found.
    Verify {
        #[command(flatten)]
        source: SourceArgs,
        /// Check every subset, pair and nested triple (the default).
        #[arg(long)]
        exhaustive: bool,
        /// Sample configurations instead, including the sampling lower bound.
        #[arg(long, conflicts_with = "exhaustive")]
        sampled: bool,
        /// Trials in sampled mode.
        #[arg(long, default_value_t = 2000, value_name = "N")]
        trials: u64,
        #[arg(long, default_value = "0", value_parser = parse_seed)]
        seed: SeedArg,
        /// Ground-set limit for exhaustive mode.
        #[arg(long, default_value_t = 16, value_name = "N")]
        max_elements: usize,
    },
    /// Check the potential Φ_i = f(A_i) + f(S ∪ A_i ∪ T↓i) over every
    /// arrival order, with T the brute-force optimum; exits 1 on violation.
    CheckPotential {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, default_value = "first-name", value_parser = parse_tie)]
        tie: TieBreakPolicy,
        /// Comma-separated element names for the set S (default empty).
        #[arg(long, value_name = "ELEMENTS")]
        s: Option<String>,
    },
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Domain(SglError),
}

impl From<SglError> for CliError {
    fn from(e: SglError) -> Self {
        CliError::Domain(e)
    }
}

struct Outcome {
    stdout: String,
    /// Present when the command ran but the checked property failed.
    failure: Option<SglError>,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome {
            stdout,
            failure: None,
        }
    }
}

/// Parses and runs one request; prints to stdout/stderr and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(outcome) => {
            print!("{}", outcome.stdout);
            match outcome.failure {
                None => 0,
                Some(e) => {
                    eprintln!("{}: {e}", e.kind());
                    1
                }
            }
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            2
        }
        Err(CliError::Domain(e)) => {
            eprintln!("{}: {e}", e.kind());
            1
        }
    }
}

fn caps_from_env() -> Result<EnumCaps, CliError> {
    match std::env::var("SGL_ENUM_CAP") {
        Err(_) => Ok(EnumCaps::default()),
        Ok(v) => {
            let cap: u128 = v.parse().map_err(|_| {
                CliError::Usage(format!("SGL_ENUM_CAP=`{v}` is not an unsigned integer"))
            })?;
            Ok(EnumCaps {
                max_orders: cap,
                max_bases: cap,
            })
        }
    }
}

fn resolve_seed(seed: SeedArg) -> u64 {
    match seed {
        SeedArg::Fixed(v) => v,
        // Each RandomState draws fresh OS-seeded keys; reports echo the
        // resolved seed so the run stays reproducible after the fact.
        SeedArg::Entropy => {
            use std::hash::{BuildHasher, Hasher};
            std::collections::hash_map::RandomState::new()
                .build_hasher()
                .finish()
        }
    }
}

fn load_source(source: &SourceArgs) -> Result<Instance, CliError> {
    match (&source.paper, &source.instance) {
        (Some(name), None) => builtin_instance(name).ok_or_else(|| {
            CliError::Usage(format!(
                "unknown builtin instance `{name}` (available: 7-12, 19-33)"
            ))
        }),
        (None, Some(path)) => Ok(read_instance(path)?),
        _ => Err(CliError::Usage(
            "exactly one of --paper and --instance is required".into(),
        )),
    }
}

fn with_pool<T>(
    threads: Option<usize>,
    f: impl FnOnce() -> Result<T, CliError> + Send,
) -> Result<T, CliError>
where
    T: Send,
{
    match threads {
        None => f(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot build a {n}-thread pool: {e}")))?
            .install(f),
    }
}

const VERSION: &str = env!("CARGO_PKG_VERSION");

fn json_doc(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable report");
    s.push('\n');
    s
}

fn csv_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn order_names(instance: &Instance, permutation: &[usize]) -> Vec<String> {
    permutation
        .iter()
        .map(|&ix| instance.matroid().part(ix).name().to_string())
        .collect()
}

/// Resolves a comma-separated part-name order; every part exactly once.
fn parse_order(instance: &Instance, spec: &str) -> Result<Vec<usize>, CliError> {
    let matroid = instance.matroid();
    let mut order = Vec::new();
    let mut seen = vec![false; matroid.m()];
    for name in spec.split(',') {
        let ix = matroid
            .part_index(name)
            .map_err(|_| CliError::Usage(format!("unknown part `{name}` in --order")))?;
        if seen[ix] {
            return Err(CliError::Usage(format!(
                "part `{name}` appears twice in --order"
            )));
        }
        seen[ix] = true;
        order.push(ix);
    }
    if order.len() != matroid.m() {
        return Err(CliError::Usage(format!(
            "--order lists {} of {} parts",
            order.len(),
            matroid.m()
        )));
    }
    Ok(order)
}

fn dispatch(cli: &Cli) -> Result<Outcome, CliError> {
    let caps = caps_from_env()?;
    match &cli.command {
        Command::Solve {
            source,
            order,
            seed,
            tie,
            trace,
        } => cmd_solve(cli.format, source, order.as_deref(), *seed, tie, *trace),
        Command::Opt { source } => cmd_opt(cli.format, source, &caps),
        Command::Ratio { source, mode, tie } => {
            cmd_expectation(cli.format, source, mode, tie, &caps, false)
        }
        Command::Curve { source, mode, tie } => {
            cmd_expectation(cli.format, source, mode, tie, &caps, true)
        }
        Command::Bound { p, q, grid } => cmd_bound(cli.format, *p, *q, *grid),
        Command::Paper { name, out } => cmd_paper(cli.format, name, out.as_deref()),
        Command::ReduceSwm { instance, out } => {
            cmd_reduce_swm(cli.format, instance, out.as_deref())
        }
        Command::Extend {
            source,
            dummies,
            out,
        } => {
            let inst = load_source(source)?;
            let extended = extend_with_dummies(&inst, *dummies)?;
            emit_instance(cli.format, &extended, out.as_deref())
        }
        Command::Compose {
            source,
            copies,
            out,
        } => {
            let inst = load_source(source)?;
            let composed = compose_copies(&inst, *copies)?;
            emit_instance(cli.format, &composed, out.as_deref())
        }
        Command::Verify {
            source,
            exhaustive: _,
            sampled,
            trials,
            seed,
            max_elements,
        } => cmd_verify(cli.format, source, *sampled, *trials, *seed, *max_elements),
        Command::CheckPotential { source, tie, s } => {
            cmd_check_potential(cli.format, source, tie, s.as_deref(), &caps)
        }
    }
}

fn cmd_solve(
    format: Format,
    source: &SourceArgs,
    order: Option<&str>,
    seed: SeedArg,
    tie: &TieBreakPolicy,
    trace_flag: bool,
) -> Result<Outcome, CliError> {
    let instance = load_source(source)?;
    let (perm_source, seed_used) = match order {
        Some(spec) => (
            PermutationSource::Explicit(parse_order(&instance, spec)?),
            None,
        ),
        None => {
            let seed = resolve_seed(seed);
            (PermutationSource::Uniform { seed }, Some(seed))
        }
    };
    let trace = random_order_greedy(&instance, &perm_source, tie)?;
    let order = order_names(&instance, &trace.permutation);

    let stdout = match format {
        Format::Human => {
            let mut out = String::new();
            let _ = writeln!(out, "instance: {}", instance.name());
            let _ = writeln!(
                out,
                "m: {}\nn: {}",
                instance.matroid().m(),
                instance.matroid().ground().len()
            );
            let _ = writeln!(out, "order: {}", order.join(" "));
            if let Some(seed) = seed_used {
                let _ = writeln!(out, "seed: {seed}");
            }
            let _ = writeln!(out, "tie: {tie}");
            let _ = writeln!(out, "final_set: {}", trace.final_set.join(" "));
            let _ = writeln!(out, "final_value: {:.6}", trace.final_value);
            if trace_flag {
                let _ = writeln!(out, "trace:");
                for (i, step) in trace.steps.iter().enumerate() {
                    let _ = writeln!(
                        out,
                        "{}\t{}\t{}\t{:.6}\t{:.6}",
                        i + 1,
                        step.part,
                        step.element,
                        step.gain,
                        step.value
                    );
                }
            }
            out
        }
        Format::Csv => {
            let rows: Vec<Vec<String>> = trace
                .steps
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    vec![
                        (i + 1).to_string(),
                        s.part.clone(),
                        s.element.clone(),
                        format!("{}", s.gain),
                        format!("{}", s.value),
                    ]
                })
                .collect();
            csv_table(&["step", "part", "element", "gain", "value"], &rows)
        }
        Format::Json => json_doc(&json!({
            "command": "solve",
            "version": VERSION,
            "instance": instance.name(),
            "order": order,
            "seed": seed_used,
            "tie": tie.to_string(),
            "final_set": trace.final_set,
            "final_value": trace.final_value,
            "steps": trace.steps,
        })),
    };
    Ok(Outcome::ok(stdout))
}

fn cmd_opt(format: Format, source: &SourceArgs, caps: &EnumCaps) -> Result<Outcome, CliError> {
    let instance = load_source(source)?;
    let (base, value) = brute_force_opt(&instance, caps)?;
    let mut names: Vec<String> = base
        .names(instance.matroid().ground())
        .iter()
        .map(|s| s.to_string())
        .collect();
    names.sort_unstable();
    let bases = instance.matroid().base_count();

    let stdout = match format {
        Format::Human => format!(
            "instance: {}\nbases: {}\nopt_set: {}\nopt_value: {:.6}\n",
            instance.name(),
            bases,
            names.join(" "),
            value
        ),
        Format::Csv => csv_table(
            &["bases", "opt_value", "opt_set"],
            &[vec![bases.to_string(), format!("{value}"), names.join(" ")]],
        ),
        Format::Json => json_doc(&json!({
            "command": "opt",
            "version": VERSION,
            "instance": instance.name(),
            "bases": bases.to_string(),
            "opt_set": names,
            "opt_value": value,
        })),
    };
    Ok(Outcome::ok(stdout))
}

fn expectation_report(
    instance: &Instance,
    mode: &ModeArgs,
    tie: &TieBreakPolicy,
    caps: &EnumCaps,
) -> Result<ExpectationReport, CliError> {
    match (mode.exact, mode.trials) {
        (true, None) | (false, None) => Ok(exact_expected_values(instance, tie, caps)?),
        (false, Some(trials)) => {
            let seed = resolve_seed(mode.seed);
            with_pool(mode.threads, || {
                Ok(monte_carlo_expected_values(
                    instance, trials, seed, tie, caps,
                )?)
            })
        }
        (true, Some(_)) => unreachable!("clap conflicts_with"),
    }
}

fn mode_summary(mode: &Mode) -> String {
    match mode {
        Mode::Exact { orders } => format!("exact ({orders} orders)"),
        Mode::MonteCarlo { trials, seed, .. } => {
            format!("monte-carlo ({trials} trials, seed {seed})")
        }
    }
}

fn fraction_text(report: &ExpectationReport) -> String {
    match report.ratio_fraction {
        Some((n, d)) => format!("{n}/{d}"),
        None => String::new(),
    }
}

fn cmd_expectation(
    format: Format,
    source: &SourceArgs,
    mode: &ModeArgs,
    tie: &TieBreakPolicy,
    caps: &EnumCaps,
    curve: bool,
) -> Result<Outcome, CliError> {
    let instance = load_source(source)?;
    let report = expectation_report(&instance, mode, tie, caps)?;
    let m = instance.matroid().m();
    let bound = g_curve(m)?;
    let command = if curve { "curve" } else { "ratio" };

    let stdout = match format {
        Format::Human => {
            let mut out = String::new();
            let _ = writeln!(out, "instance: {}", instance.name());
            let _ = writeln!(out, "tie: {tie}");
            let _ = writeln!(out, "mode: {}", mode_summary(&report.mode));
            let _ = writeln!(out, "opt: {:.6}", report.opt_value);
            let _ = writeln!(out, "expected_final: {:.6}", report.expected_final);
            let _ = writeln!(out, "ratio: {:.6}", report.ratio);
            let fraction = fraction_text(&report);
            if !fraction.is_empty() {
                let _ = writeln!(out, "fraction: {fraction}");
            }
            if curve {
                let stderr = match &report.mode {
                    Mode::MonteCarlo { stderr, .. } => Some(stderr),
                    Mode::Exact { .. } => None,
                };
                let _ = writeln!(
                    out,
                    "{}",
                    if stderr.is_some() {
                        "i\texpected_value\tlower_bound_g\tstderr"
                    } else {
                        "i\texpected_value\tlower_bound_g"
                    }
                );
                for i in 0..=m {
                    let lower = bound[i] * report.opt_value;
                    match stderr {
                        Some(se) => {
                            let _ = writeln!(
                                out,
                                "{i}\t{:.6}\t{lower:.6}\t{:.6}",
                                report.per_step[i], se[i]
                            );
                        }
                        None => {
                            let _ = writeln!(out, "{i}\t{:.6}\t{lower:.6}", report.per_step[i]);
                        }
                    }
                }
            }
            out
        }
        Format::Csv => {
            if curve {
                let mc_stderr = match &report.mode {
                    Mode::MonteCarlo { stderr, .. } => Some(stderr),
                    Mode::Exact { .. } => None,
                };
                let header: Vec<&str> = if mc_stderr.is_some() {
                    vec!["i", "expected_value", "lower_bound_g", "stderr"]
                } else {
                    vec!["i", "expected_value", "lower_bound_g"]
                };
                let rows: Vec<Vec<String>> = (0..=m)
                    .map(|i| {
                        let mut row = vec![
                            i.to_string(),
                            format!("{}", report.per_step[i]),
                            format!("{}", bound[i] * report.opt_value),
                        ];
                        if let Some(se) = mc_stderr {
                            row.push(format!("{}", se[i]));
                        }
                        row
                    })
                    .collect();
                csv_table(&header, &rows)
            } else {
                let (mode_name, samples, seed) = match &report.mode {
                    Mode::Exact { orders } => ("exact", *orders, String::new()),
                    Mode::MonteCarlo { trials, seed, .. } => {
                        ("monte-carlo", *trials, seed.to_string())
                    }
                };
                csv_table(
                    &[
                        "mode",
                        "samples",
                        "seed",
                        "opt",
                        "expected_final",
                        "ratio",
                        "fraction",
                    ],
                    &[vec![
                        mode_name.to_string(),
                        samples.to_string(),
                        seed,
                        format!("{}", report.opt_value),
                        format!("{}", report.expected_final),
                        format!("{}", report.ratio),
                        fraction_text(&report),
                    ]],
                )
            }
        }
        Format::Json => json_doc(&json!({
            "command": command,
            "version": VERSION,
            "instance": instance.name(),
            "tie": tie.to_string(),
            "report": report,
            "lower_bound_g": bound,
        })),
    };
    Ok(Outcome::ok(stdout))
}

fn cmd_bound(
    format: Format,
    p: Option<f64>,
    q: Option<f64>,
    grid: Option<usize>,
) -> Result<Outcome, CliError> {
    let (solution, grid_used) = match (p, q, grid) {
        (Some(p), Some(q), None) => (bound_fixed_point(p, q)?, None),
        (None, None, Some(n)) => (bound_grid_search(n)?, Some(n)),
        _ => {
            return Err(CliError::Usage(
                "bound needs either --p and --q, or --grid N".into(),
            ))
        }
    };
    let residual = bound_residual(&solution);

    let stdout = match format {
        Format::Human => {
            let mut out = String::new();
            if let Some(n) = grid_used {
                let _ = writeln!(out, "grid: {n}");
            }
            let _ = writeln!(out, "p: {:.6}", solution.p);
            let _ = writeln!(out, "q: {:.6}", solution.q);
            let _ = writeln!(
                out,
                "quadratic: 6c^2 + ({:.6})c + ({:.6}) = 0",
                solution.quadratic[1], solution.quadratic[2]
            );
            let _ = writeln!(out, "c: {:.6}", solution.c);
            out
        }
        Format::Csv => csv_table(
            &["p", "q", "a", "b", "c0", "c"],
            &[vec![
                format!("{}", solution.p),
                format!("{}", solution.q),
                format!("{}", solution.quadratic[0]),
                format!("{}", solution.quadratic[1]),
                format!("{}", solution.quadratic[2]),
                format!("{}", solution.c),
            ]],
        ),
        Format::Json => json_doc(&json!({
            "command": "bound",
            "version": VERSION,
            "grid": grid_used,
            "solution": solution,
            "residual": residual,
        })),
    };
    Ok(Outcome::ok(stdout))
}

fn emit_instance(
    format: Format,
    instance: &Instance,
    out: Option<&Path>,
) -> Result<Outcome, CliError> {
    let document = instance_to_json(instance)?;
    match out {
        None => Ok(Outcome::ok(document)),
        Some(path) => {
            std::fs::write(path, &document).map_err(|e| {
                SglError::Io(std::io::Error::new(
                    e.kind(),
                    format!("{}: {e}", path.display()),
                ))
            })?;
            let m = instance.matroid().m();
            let n = instance.matroid().ground().len();
            let stdout = match format {
                Format::Human => format!(
                    "instance: {}\nm: {m}\nn: {n}\nwrote: {}\n",
                    instance.name(),
                    path.display()
                ),
                Format::Csv => csv_table(
                    &["instance", "m", "n", "path"],
                    &[vec![
                        instance.name().to_string(),
                        m.to_string(),
                        n.to_string(),
                        path.display().to_string(),
                    ]],
                ),
                Format::Json => json_doc(&json!({
                    "command": "emit",
                    "version": VERSION,
                    "instance": instance.name(),
                    "m": m,
                    "n": n,
                    "path": path.display().to_string(),
                })),
            };
            Ok(Outcome::ok(stdout))
        }
    }
}

fn cmd_paper(format: Format, name: &str, out: Option<&Path>) -> Result<Outcome, CliError> {
    let instance = builtin_instance(name).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown builtin instance `{name}` (available: 7-12, 19-33)"
        ))
    })?;
    emit_instance(format, &instance, out)
}

fn cmd_reduce_swm(format: Format, path: &Path, out: Option<&Path>) -> Result<Outcome, CliError> {
    let swm = read_swm_instance(path)?;
    // The emitted document is the reduction flattened to a self-contained
    // coverage instance; values agree with the composite oracle everywhere.
    let flattened = swm_to_coverage_instance(&swm)?;
    emit_instance(format, &flattened, out)
}

fn cmd_verify(
    format: Format,
    source: &SourceArgs,
    sampled: bool,
    trials: u64,
    seed: SeedArg,
    max_elements: usize,
) -> Result<Outcome, CliError> {
    let instance = load_source(source)?;
    let (mode, mode_text) = if sampled {
        let seed = resolve_seed(seed);
        (
            VerifyMode::Sampled { trials, seed },
            format!("sampled ({trials} trials, seed {seed})"),
        )
    } else {
        (
            VerifyMode::Exhaustive { max_elements },
            format!("exhaustive (up to {max_elements} elements)"),
        )
    };
    let report = verify_properties(instance.oracle(), mode)?;
    let stdout = render_property_report(format, &instance, &mode_text, &report);
    let failure = if report.passed() {
        None
    } else {
        Some(SglError::InvariantViolation(format!(
            "{} property violation(s) on `{}`",
            report.violations_total,
            instance.name()
        )))
    };
    Ok(Outcome { stdout, failure })
}

fn render_witness(v: &crate::oracle::PropertyViolation) -> String {
    let mut parts: Vec<String> = v
        .witness
        .iter()
        .map(|(role, set)| format!("{role}={{{set}}}"))
        .collect();
    parts.extend(
        v.values
            .iter()
            .map(|(name, value)| format!("{name}={value}")),
    );
    parts.join(" ")
}

fn render_property_report(
    format: Format,
    instance: &Instance,
    mode_text: &str,
    report: &PropertyReport,
) -> String {
    match format {
        Format::Human => {
            let mut out = String::new();
            let _ = writeln!(out, "instance: {}", instance.name());
            let _ = writeln!(out, "mode: {mode_text}");
            let _ = writeln!(out, "checked: {}", report.checked.join(", "));
            let _ = writeln!(out, "queries: {}", report.queries);
            let _ = writeln!(out, "violations: {}", report.violations_total);
            for v in &report.violations {
                let _ = writeln!(out, "violation: {} {}", v.property, render_witness(v));
            }
            let _ = writeln!(out, "{}", if report.passed() { "PASS" } else { "FAIL" });
            out
        }
        Format::Csv => {
            let rows: Vec<Vec<String>> = report
                .violations
                .iter()
                .map(|v| vec![v.property.clone(), render_witness(v)])
                .collect();
            csv_table(&["property", "witness"], &rows)
        }
        Format::Json => json_doc(&json!({
            "command": "verify",
            "version": VERSION,
            "instance": instance.name(),
            "mode": mode_text,
            "report": report,
            "passed": report.passed(),
        })),
    }
}

fn cmd_check_potential(
    format: Format,
    source: &SourceArgs,
    tie: &TieBreakPolicy,
    s_spec: Option<&str>,
    caps: &EnumCaps,
) -> Result<Outcome, CliError> {
    let instance = load_source(source)?;
    let matroid = instance.matroid();
    let ground = matroid.ground();
    let m = matroid.m();
    let orders: u128 = (1..=m as u128).product();
    if orders > caps.max_orders {
        return Err(SglError::TooLarge {
            what: "order enumeration",
            unit: "orders",
            size: orders,
            cap: caps.max_orders,
        }
        .into());
    }
    let s = match s_spec {
        None => ElementSet::empty(),
        Some(spec) => ground
            .set_from_names(spec.split(','))
            .map_err(|e| CliError::Usage(format!("--s: {e}")))?,
    };
    let (t, _) = brute_force_opt(&instance, caps)?;
    let mut t_names: Vec<&str> = t.names(ground);
    t_names.sort_unstable();

    use itertools::Itertools;
    let mut failures: Vec<serde_json::Value> = Vec::new();
    let mut failure_lines: Vec<String> = Vec::new();
    let mut monotone_failures = 0u64;
    let mut closing_failures = 0u64;
    for perm in (0..m).permutations(m) {
        let trace = random_order_greedy(&instance, &PermutationSource::Explicit(perm), tie)?;
        let check = check_potential_monotone(&instance, &trace, &s, &t)?;
        if check.passed() {
            continue;
        }
        let order = order_names(&instance, &trace.permutation).join(",");
        if let Some((i, prev, cur)) = check.first_violation {
            monotone_failures += 1;
            failure_lines.push(format!(
                "order {order}: phi decreased at step {i} ({prev} -> {cur})"
            ));
        }
        if !check.closing_ok() {
            closing_failures += 1;
            failure_lines.push(format!(
                "order {order}: closing {} < {}",
                check.closing_lhs, check.closing_rhs
            ));
        }
        if failures.len() < 32 {
            failures.push(json!({
                "order": order,
                "first_violation": check.first_violation,
                "closing_lhs": check.closing_lhs,
                "closing_rhs": check.closing_rhs,
            }));
        }
    }
    let passed = monotone_failures == 0 && closing_failures == 0;

    let stdout = match format {
        Format::Human => {
            let mut out = String::new();
            let _ = writeln!(out, "instance: {}", instance.name());
            let _ = writeln!(out, "tie: {tie}");
            let _ = writeln!(out, "orders: {orders}");
            let rendered_s = s.render(ground);
            let _ = writeln!(
                out,
                "s: {}",
                if rendered_s.is_empty() {
                    "(empty)"
                } else {
                    &rendered_s
                }
            );
            let _ = writeln!(out, "t: {}", t_names.join(" "));
            let _ = writeln!(out, "monotone_violations: {monotone_failures}");
            let _ = writeln!(out, "closing_violations: {closing_failures}");
            for line in failure_lines.iter().take(8) {
                let _ = writeln!(out, "{line}");
            }
            let _ = writeln!(out, "{}", if passed { "PASS" } else { "FAIL" });
            out
        }
        Format::Csv => {
            let rows: Vec<Vec<String>> = failure_lines
                .iter()
                .map(|line| vec![line.clone()])
                .collect();
            csv_table(&["failure"], &rows)
        }
        Format::Json => json_doc(&json!({
            "command": "check-potential",
            "version": VERSION,
            "instance": instance.name(),
            "tie": tie.to_string(),
            "orders": orders.to_string(),
            "s": s.render(ground),
            "t": t_names,
            "monotone_violations": monotone_failures,
            "closing_violations": closing_failures,
            "failures": failures,
            "passed": passed,
        })),
    };
    let failure = if passed {
        None
    } else {
        Some(SglError::InvariantViolation(format!(
            "potential check failed on {} order(s) of `{}`",
            monotone_failures + closing_failures,
            instance.name()
        )))
    };
    Ok(Outcome { stdout, failure })
}
