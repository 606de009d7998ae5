use std::fs;
use std::io::{BufReader, ErrorKind, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use efxgraph::io::{
    allocation_to_json, instance_to_json, parse_allocation, parse_coloring, parse_instance,
    AllocationDocument,
};
use efxgraph::report::{RunReport, VerdictDoc};
use efxgraph::solvers::{read_trace, write_trace};
use efxgraph::{
    analyze, audit, brute_force_efx, generate, is_efx, solve_with, Error, GenSpec, GraphFamily,
    Instance, Labels, Method, ValuationFamily,
};
use rayon::prelude::*;

const EXIT_INPUT: u8 = 1;
const EXIT_UNSUPPORTED: u8 = 2;
const EXIT_VIOLATION: u8 = 3;

const INSTANCE_SUFFIX: &str = ".instance.json";

/// EFX allocations on multi-graph instances.
///
/// Exit codes: 0 ok, 1 input error, 2 unsupported instance class, 3 EFX or trace
/// invariant violation.
#[derive(Parser)]
#[command(name = "efxgraph", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance and print a run report.
    Solve(SolveArgs),
    /// Check an allocation (possibly partial) for EFX.
    Verify {
        instance: PathBuf,
        allocation: PathBuf,
    },
    /// Write a seeded random instance.
    Gen(GenArgs),
    /// Report which solver preconditions an instance meets.
    Analyze { instance: PathBuf },
    /// Replay a solver trace and check its invariants.
    Audit { instance: PathBuf, trace: PathBuf },
    /// Count EFX allocations by exhaustive search.
    Oracle { instance: PathBuf },
}

#[derive(Args)]
struct SolveArgs {
    #[arg(required_unless_present = "batch", conflicts_with = "batch")]
    instance: Option<PathBuf>,
    /// Colouring hint for the chromatic solver.
    #[arg(long, conflicts_with = "batch")]
    coloring: Option<PathBuf>,
    /// Where to write the allocation.
    #[arg(long, conflicts_with = "batch")]
    out: Option<PathBuf>,
    /// Where to write the trace, one JSON event per line.
    #[arg(long, conflicts_with = "batch")]
    trace: Option<PathBuf>,
    /// Run one solver on every component instead of dispatching
    /// (tree, bipartite, chromatic, brute_force).
    #[arg(long)]
    method: Option<Method>,
    /// Solve every `*.instance.json` in a directory, writing `.alloc.json`,
    /// `.trace.jsonl` and `.report.json` next to each.
    #[arg(long, value_name = "DIR")]
    batch: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[command(subcommand)]
    family: GenFamily,
}

#[derive(Args)]
struct GenCommon {
    /// additive, unit_demand, budget_additive or table (multitrees only).
    #[arg(long, default_value = "additive")]
    valuations: ValuationFamily,
    #[arg(long, default_value_t = 100)]
    value_max: u64,
    #[arg(long, env = "EFXGRAPH_SEED", default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum GenFamily {
    Bipartite {
        #[arg(long)]
        left: usize,
        #[arg(long)]
        right: usize,
        /// Probability that a left/right pair is joined, as `num/den`.
        #[arg(long, default_value = "1/2", value_parser = parse_fraction)]
        edge_prob: (u64, u64),
        #[arg(long, default_value_t = 1)]
        max_parallel: usize,
        #[command(flatten)]
        common: GenCommon,
    },
    Multitree {
        #[arg(long)]
        agents: usize,
        #[arg(long, default_value_t = 1)]
        max_parallel: usize,
        #[command(flatten)]
        common: GenCommon,
    },
    Multicycle {
        #[arg(long)]
        len: usize,
        #[arg(long, default_value_t = 1)]
        max_parallel: usize,
        #[command(flatten)]
        common: GenCommon,
    },
    Petersen {
        #[arg(long, default_value_t = 2)]
        copies: usize,
        #[command(flatten)]
        common: GenCommon,
    },
}

fn parse_fraction(s: &str) -> std::result::Result<(u64, u64), String> {
    let (num, den) = s.split_once('/').ok_or("expected num/den")?;
    let num = num.trim().parse().map_err(|e| format!("numerator: {e}"))?;
    let den = den
        .trim()
        .parse()
        .map_err(|e| format!("denominator: {e}"))?;
    Ok((num, den))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve(args) => cmd_solve(&args),
        Command::Verify {
            instance,
            allocation,
        } => cmd_verify(&instance, &allocation),
        Command::Gen(args) => cmd_gen(args.family),
        Command::Analyze { instance } => cmd_analyze(&instance),
        Command::Audit { instance, trace } => cmd_audit(&instance, &trace),
        Command::Oracle { instance } => cmd_oracle(&instance),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let class = err.chain().find_map(|e| e.downcast_ref::<Error>());
    match class {
        Some(
            Error::UnsupportedClass(_)
            | Error::UnsupportedValuation { .. }
            | Error::Precondition(_),
        ) => EXIT_UNSUPPORTED,
        _ => EXIT_INPUT,
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn load_instance(path: &Path) -> Result<(Instance, Labels)> {
    parse_instance(&read(path)?).with_context(|| format!("loading {}", path.display()))
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    emit(&serde_json::to_string_pretty(value)?)
}

/// Writes `text` and a newline to stdout. A closed pipe (`| head`) is not an error.
fn emit(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}").and_then(|()| out.flush()) {
        Err(e) if e.kind() == ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

struct Run {
    report: RunReport,
    allocation_json: String,
    trace_jsonl: Vec<u8>,
    code: u8,
}

fn run_solver(
    inst: &Instance,
    labels: &Labels,
    coloring: Option<&Path>,
    method: Option<Method>,
) -> Result<Run> {
    let hint = coloring
        .map(|p| {
            parse_coloring(&read(p)?, labels).with_context(|| format!("loading {}", p.display()))
        })
        .transpose()?;
    let start = Instant::now();
    let solution = solve_with(inst, hint.as_ref(), method)?;
    let wall_time_us = u64::try_from(start.elapsed().as_micros()).unwrap_or(u64::MAX);
    let verdict = is_efx(inst, &solution.allocation)?;
    let audit_report = audit(inst, &solution.trace)?;
    let code = if verdict.ok() && audit_report.passed() {
        0
    } else {
        EXIT_VIOLATION
    };
    let mut trace_jsonl = Vec::new();
    write_trace(&mut trace_jsonl, &solution.trace)?;
    Ok(Run {
        report: RunReport::new(&solution, &verdict, &audit_report, labels, wall_time_us),
        allocation_json: allocation_to_json(&solution.allocation, labels),
        trace_jsonl,
        code,
    })
}

fn cmd_solve(args: &SolveArgs) -> Result<u8> {
    if let Some(dir) = &args.batch {
        return solve_batch(dir, args.method);
    }
    let path = args.instance.as_deref().expect("clap requires an instance");
    let (inst, labels) = load_instance(path)?;
    let run = run_solver(&inst, &labels, args.coloring.as_deref(), args.method)?;
    if let Some(out) = &args.out {
        write(out, &run.allocation_json)?;
    }
    if let Some(trace) = &args.trace {
        fs::write(trace, &run.trace_jsonl)
            .with_context(|| format!("writing {}", trace.display()))?;
    }
    print_json(&run.report)?;
    Ok(run.code)
}

/// Method, verdict and exit code of one batch entry.
type BatchOutcome = Result<(Method, bool, u8)>;

fn solve_batch(dir: &Path, method: Option<Method>) -> Result<u8> {
    let mut inputs: Vec<(String, PathBuf)> = fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .filter_map(|entry| {
            let path = entry.ok()?.path();
            let name = path.file_name()?.to_str()?;
            let stem = name.strip_suffix(INSTANCE_SUFFIX)?.to_string();
            Some((stem, path))
        })
        .collect();
    inputs.sort();
    if inputs.is_empty() {
        bail!("no *{INSTANCE_SUFFIX} files in {}", dir.display());
    }
    let codes: Vec<(String, BatchOutcome)> = inputs
        .par_iter()
        .map(|(stem, path)| {
            let result = (|| {
                let (inst, labels) = load_instance(path)?;
                let run = run_solver(&inst, &labels, None, method)?;
                write(
                    &dir.join(format!("{stem}.alloc.json")),
                    &run.allocation_json,
                )?;
                fs::write(dir.join(format!("{stem}.trace.jsonl")), &run.trace_jsonl)?;
                write(
                    &dir.join(format!("{stem}.report.json")),
                    &serde_json::to_string_pretty(&run.report)?,
                )?;
                Ok((run.report.method_used, run.report.verdict.ok, run.code))
            })();
            (stem.clone(), result)
        })
        .collect();
    let mut worst = 0;
    let mut summary = Vec::new();
    for (stem, result) in codes {
        match result {
            Ok((method, ok, code)) => {
                summary.push(format!(
                    "{stem}: {method} {}",
                    if ok { "efx" } else { "NOT EFX" }
                ));
                worst = worst.max(code);
            }
            Err(err) => {
                summary.push(format!("{stem}: error: {err:#}"));
                worst = worst.max(exit_code(&err));
            }
        }
    }
    emit(&summary.join("\n"))?;
    Ok(worst)
}

fn cmd_verify(instance: &Path, allocation: &Path) -> Result<u8> {
    let (inst, labels) = load_instance(instance)?;
    let alloc = parse_allocation(&read(allocation)?, &labels)
        .with_context(|| format!("loading {}", allocation.display()))?;
    let verdict = is_efx(&inst, &alloc)?;
    let doc = VerdictDoc::new(&verdict, &labels);
    print_json(&doc)?;
    match doc.witness {
        None => Ok(0),
        Some(w) => {
            eprintln!("{} envies {} even without {}", w.envier, w.envied, w.good);
            Ok(EXIT_VIOLATION)
        }
    }
}

fn cmd_gen(family: GenFamily) -> Result<u8> {
    let (graph, common) = match family {
        GenFamily::Bipartite {
            left,
            right,
            edge_prob: (edge_num, edge_den),
            max_parallel,
            common,
        } => (
            GraphFamily::Bipartite {
                left,
                right,
                edge_num,
                edge_den,
                max_parallel,
            },
            common,
        ),
        GenFamily::Multitree {
            agents,
            max_parallel,
            common,
        } => (
            GraphFamily::Multitree {
                agents,
                max_parallel,
            },
            common,
        ),
        GenFamily::Multicycle {
            len,
            max_parallel,
            common,
        } => (GraphFamily::Multicycle { len, max_parallel }, common),
        GenFamily::Petersen { copies, common } => (GraphFamily::Petersen { copies }, common),
    };
    let spec = GenSpec {
        graph,
        valuations: common.valuations,
        value_max: common.value_max,
    };
    let inst = generate(&spec, common.seed)?;
    let labels = Labels::numbered(inst.agent_count(), inst.good_count());
    let json = instance_to_json(&inst, &labels);
    match common.out {
        Some(path) => write(&path, &json)?,
        None => emit(&json)?,
    }
    Ok(0)
}

fn cmd_analyze(instance: &Path) -> Result<u8> {
    let (inst, _) = load_instance(instance)?;
    print_json(&analyze(&inst))?;
    Ok(0)
}

fn cmd_audit(instance: &Path, trace: &Path) -> Result<u8> {
    let (inst, _) = load_instance(instance)?;
    let file = fs::File::open(trace).with_context(|| format!("reading {}", trace.display()))?;
    let events =
        read_trace(BufReader::new(file)).with_context(|| format!("loading {}", trace.display()))?;
    let report = audit(&inst, &events)?;
    let mut lines = vec![format!(
        "{:<18} {:<15} {:>8} {:>11}",
        "invariant", "status", "checked", "violations"
    )];
    for fam in &report.families {
        lines.push(format!(
            "{:<18} {:<15} {:>8} {:>11}",
            fam.family.name(),
            fam.status().name(),
            fam.checked,
            fam.violations.len()
        ));
    }
    for fam in &report.families {
        for v in &fam.violations {
            lines.push(format!("event {}: {}: {}", v.event, fam.family, v.message));
        }
    }
    emit(&lines.join("\n"))?;
    Ok(if report.passed() { 0 } else { EXIT_VIOLATION })
}

fn cmd_oracle(instance: &Path) -> Result<u8> {
    let (inst, labels) = load_instance(instance)?;
    let report = brute_force_efx(&inst)?;
    let sample = report
        .sample
        .as_ref()
        .map(|a| AllocationDocument::from_allocation(a, &labels));
    print_json(&serde_json::json!({
        "efx_count": report.efx_count,
        "searched": report.searched,
        "sample": sample,
    }))?;
    Ok(0)
}
