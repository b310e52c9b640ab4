//! moatforge: Steiner trees with certified bidirected-cut dual bounds.
//!
//! Verbs: solve, verify, oracle (dw|lp|export), generate, batch.
//! Exit codes: 0 success, 1 input error, 2 failed verdict or diagnostic
//! failure.

use std::collections::BTreeMap;
use std::io::Write;
use std::process::ExitCode;

type AnyError = Box<dyn std::error::Error + Send + Sync>;

use clap::{Args, Parser, Subcommand, ValueEnum};

use moatforge::diagnostics::{self, Constants};
use moatforge::dual::FeasibilityVerdict;
use moatforge::gap::{scale_or_contract, SolveConfig, SolveStatus};
use moatforge::growth::{run_growth, GrowthConfig, GrowthMode};
use moatforge::instance::{
    generate_family, metric_closure, parse_instance, parse_stp_with_root, render_native, Family,
    Format, Instance,
};
use moatforge::merge::{terminal_mst, MergeForest};
use moatforge::oracles::{self, LpSpec, Method, Relaxation};
use moatforge::rat::{format_rat, parse_rat, rat, Rat};
use moatforge::ucr::{audit_laminar_bound, grow_ucr_dual, restrict_rootless, LaminarVerdict};

#[derive(Parser)]
#[command(name = "moatforge", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scale-or-contract procedure and report tree, bound, ratio.
    Solve(SolveArgs),
    /// Grow the dual and run the selected audits.
    Verify(VerifyArgs),
    /// Independent exact references.
    Oracle(OracleArgs),
    /// Print a generated instance in the native format.
    Generate(InstanceArgs),
    /// Run a manifest of solve/verify entries.
    Batch(BatchArgs),
}

#[derive(Args, Clone)]
struct InstanceArgs {
    /// Family name: subdiv-triangle, gap-gadget, spider, bipartite-fan,
    /// cycle, random, potential-gadget.
    #[arg(long, conflicts_with = "file")]
    family: Option<String>,
    /// Instance file path.
    #[arg(long)]
    file: Option<String>,
    /// File format.
    #[arg(long, value_enum, default_value_t = FileFormat::Native)]
    format: FileFormat,
    /// Root terminal override (1-based id).
    #[arg(long)]
    root: Option<usize>,
    /// Family parameter n.
    #[arg(long)]
    n: Option<usize>,
    /// Family parameter k.
    #[arg(long)]
    k: Option<usize>,
    /// Family parameter q.
    #[arg(long)]
    q: Option<usize>,
    /// Random seed (random family; batch determinism).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FileFormat {
    Native,
    Stp,
}

#[derive(Args, Clone)]
struct GrowthArgs {
    /// Growth parameter delta, as p/q or decimal (default 0.00858).
    #[arg(long)]
    delta: Option<String>,
    /// Subdivision parameter eps-prime (default 1e-7).
    #[arg(long)]
    eps_prime: Option<String>,
    /// Growth mode.
    #[arg(long, value_enum, default_value_t = Mode::Continuous)]
    mode: Mode,
    /// Write the growth trace of the input instance as JSON.
    #[arg(long)]
    trace_out: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Continuous,
    Subdivide,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    growth: GrowthArgs,
    /// Contraction parameter gamma (default 0.0774).
    #[arg(long)]
    gamma: Option<String>,
    /// Component bound for the exhaustive fallback.
    #[arg(long, default_value_t = 6)]
    h: usize,
    /// Also write the report JSON to this path.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    growth: GrowthArgs,
    /// Contraction parameter gamma used by audit preconditions.
    #[arg(long)]
    gamma: Option<String>,
    /// Local-optimality bound for audit preconditions.
    #[arg(long, default_value_t = 4)]
    h: usize,
    /// Comma-separated audits: feasible,distance,potential,chains,laminar.
    #[arg(long, default_value = "feasible")]
    audits: String,
    /// Also write the verdict JSON to this path.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(subcommand)]
    what: OracleCommand,
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Exact optimum Steiner tree (Dreyfus-Wagner).
    Dw(DwArgs),
    /// Exact LP value of a cut relaxation.
    Lp(LpArgs),
    /// Write the full cut LP in LP text format.
    Export(ExportArgs),
}

#[derive(Args)]
struct DwArgs {
    #[command(flatten)]
    instance: InstanceArgs,
}

#[derive(Args)]
struct LpArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, value_enum, default_value_t = RelaxKind::Bcr)]
    relaxation: RelaxKind,
    #[arg(long, value_enum, default_value_t = MethodKind::Enumerate)]
    method: MethodKind,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, value_enum, default_value_t = RelaxKind::Bcr)]
    relaxation: RelaxKind,
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum RelaxKind {
    Ucr,
    Bcr,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodKind {
    Enumerate,
    Separate,
}

#[derive(Args)]
struct BatchArgs {
    /// Manifest path: one JSON object per line.
    #[arg(long)]
    manifest: String,
    /// JSONL results path (stdout when omitted).
    #[arg(long)]
    out: Option<String>,
    /// CSV summary path.
    #[arg(long)]
    csv: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, AnyError> {
    match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Oracle(args) => cmd_oracle(args),
        Command::Generate(args) => {
            let (inst, _) = load_instance(&args)?;
            print!("{}", render_native(&inst));
            Ok(ExitCode::SUCCESS)
        }
        Command::Batch(args) => cmd_batch(args),
    }
}

fn load_instance(args: &InstanceArgs) -> Result<(Instance, String), AnyError> {
    let (mut inst, label) = if let Some(name) = &args.family {
        let mut params: BTreeMap<String, String> = BTreeMap::new();
        if let Some(n) = args.n {
            params.insert("n".into(), n.to_string());
        }
        if let Some(k) = args.k {
            params.insert("k".into(), k.to_string());
        }
        if let Some(q) = args.q {
            params.insert("q".into(), q.to_string());
        }
        if let Some(seed) = args.seed {
            params.insert("seed".into(), seed.to_string());
        }
        let family = Family::parse(name, &params)?;
        let label = match &family {
            Family::Spider { k, q } => format!("spider({k},{q})"),
            Family::BipartiteFan { k, q } => format!("bipartite-fan({k},{q})"),
            Family::Cycle { n, k } => format!("cycle({n},{k})"),
            Family::Random { n, k, seed } => format!("random({n},{k},{seed})"),
            _ => name.clone(),
        };
        (generate_family(&family)?, label)
    } else if let Some(path) = &args.file {
        let text = std::fs::read_to_string(path)?;
        let inst = match args.format {
            FileFormat::Native => parse_instance(&text, Format::Native)?,
            FileFormat::Stp => parse_stp_with_root(&text, args.root)?,
        };
        (inst, path.clone())
    } else {
        return Err("one of --family or --file is required".into());
    };
    if let Some(r) = args.root {
        if r == 0 {
            return Err("vertex ids are 1-based".into());
        }
        inst = Instance::new(inst.vertex_count, inst.edges, inst.terminals, r - 1)?;
    }
    Ok((inst, label))
}

fn growth_config(args: &GrowthArgs) -> Result<GrowthConfig, AnyError> {
    let mut cfg = GrowthConfig::table1();
    if let Some(d) = &args.delta {
        cfg.delta = parse_positive(d, "delta")?;
    }
    if let Some(e) = &args.eps_prime {
        cfg.eps_prime = parse_positive(e, "eps-prime")?;
    }
    cfg.mode = match args.mode {
        Mode::Continuous => GrowthMode::Continuous,
        Mode::Subdivide => GrowthMode::Subdivide,
    };
    Ok(cfg)
}

fn parse_positive(text: &str, name: &str) -> Result<Rat, AnyError> {
    let v = parse_rat(text)?;
    if v <= rat(0, 1) {
        return Err(format!("{name} must be positive").into());
    }
    Ok(v)
}

fn emit(json: &serde_json::Value, out: &Option<String>) -> Result<(), AnyError> {
    let text = serde_json::to_string_pretty(json)?;
    println!("{text}");
    if let Some(path) = out {
        std::fs::write(path, format!("{text}\n"))?;
    }
    Ok(())
}

fn cmd_solve(args: SolveArgs) -> Result<ExitCode, AnyError> {
    let (inst, label) = load_instance(&args.instance)?;
    let growth = growth_config(&args.growth)?;
    let mut cfg = SolveConfig {
        growth,
        ..SolveConfig::default()
    };
    if let Some(g) = &args.gamma {
        cfg.gamma = parse_positive(g, "gamma")?;
    }
    cfg.h = args.h;
    if let Some(path) = &args.growth.trace_out {
        write_trace(&inst, &cfg.growth, path)?;
    }
    let mut report = scale_or_contract(&inst, &cfg)?;
    report.instance = label;
    emit(&report.to_json(), &args.out)?;
    let ok = report.status == SolveStatus::Ok
        && report
            .ratio
            .as_ref()
            .map(|r| *r <= rat(19_988, 10_000))
            .unwrap_or(false);
    Ok(match (report.status, ok) {
        (SolveStatus::DiagnosticFail, _) => ExitCode::from(2),
        (_, true) => ExitCode::SUCCESS,
        (_, false) => ExitCode::from(2),
    })
}

fn write_trace(
    inst: &Instance,
    cfg: &GrowthConfig,
    path: &str,
) -> Result<(), AnyError> {
    let m = metric_closure(inst);
    let f = MergeForest::build(&m);
    let tr = run_growth(&m, &f, cfg)?;
    std::fs::write(path, serde_json::to_string_pretty(&tr.to_json())?)?;
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode, AnyError> {
    let (inst, label) = load_instance(&args.instance)?;
    let growth = growth_config(&args.growth)?;
    let gamma = match &args.gamma {
        Some(g) => parse_positive(g, "gamma")?,
        None => rat(774, 10_000),
    };
    let m = metric_closure(&inst);
    let f = MergeForest::build(&m);
    let tr = run_growth(&m, &f, &growth)?;
    if let Some(path) = &args.growth.trace_out {
        std::fs::write(path, serde_json::to_string_pretty(&tr.to_json())?)?;
    }
    let (_, mst) = terminal_mst(&m);
    let (value, scaled) = tr.dual_value();
    let mut verdicts: Vec<serde_json::Value> = vec![];
    let mut any_fail = false;

    let consts = Constants {
        delta: growth.delta.clone(),
        gamma: gamma.clone(),
        ..Constants::table1()
    };
    // Local optimality precondition, shared by distance/potential/chains.
    let wanted: Vec<&str> = args.audits.split(',').map(|s| s.trim()).collect();
    let needs_local = wanted
        .iter()
        .any(|w| matches!(*w, "distance" | "potential" | "chains"));
    let locally_optimal = if needs_local && inst.terminals.len() <= 14 {
        diagnostics::verify_local_optimality(&m, &f, &gamma, args.h)?.is_none()
    } else {
        false
    };

    for audit in &wanted {
        match *audit {
            "feasible" => {
                let scale = moatforge::rat::one() + &growth.delta;
                let verdict = moatforge::dual::verify_dual_feasible(&tr.z, &m, &scale);
                let ok = verdict.is_feasible();
                if !ok {
                    any_fail = true;
                }
                verdicts.push(serde_json::json!({
                    "audit": "feasible",
                    "status": if ok { "FEASIBLE" } else { "INFEASIBLE" },
                    "witness": match &verdict {
                        FeasibilityVerdict::Feasible => serde_json::Value::Null,
                        FeasibilityVerdict::ViolatedEdge { u, v, load, cost } => serde_json::json!({
                            "edge": [u + 1, v + 1],
                            "load": format_rat(load),
                            "cost": format_rat(cost),
                        }),
                        FeasibilityVerdict::DomainViolation { set, reason } => serde_json::json!({
                            "set": set.iter().map(|x| x + 1).collect::<Vec<_>>(),
                            "reason": reason,
                        }),
                    },
                }));
            }
            "distance" => {
                if !locally_optimal {
                    verdicts.push(skipped("distance"));
                    continue;
                }
                let v = diagnostics::distance_bound_audit(&tr, &f, &m, &consts);
                if !v.passed() {
                    any_fail = true;
                }
                verdicts.push(v.to_json(&label));
            }
            "potential" | "chains" => {
                if !locally_optimal {
                    verdicts.push(skipped(audit));
                    continue;
                }
                let v = path_audits(&tr, &f, audit)?;
                if v["status"] == "FAIL" {
                    any_fail = true;
                }
                verdicts.push(v);
            }
            "laminar" => {
                let y = grow_ucr_dual(&m);
                let ybar = restrict_rootless(&y, inst.root);
                let verdict = audit_laminar_bound(&inst, &ybar);
                let (status, detail) = match &verdict {
                    LaminarVerdict::Pass { value, bound, opt } => (
                        "PASS",
                        serde_json::json!({
                            "value": format_rat(value),
                            "bound": format_rat(bound),
                            "opt": format_rat(opt),
                        }),
                    ),
                    LaminarVerdict::Fail { value, bound, opt } => (
                        "FAIL",
                        serde_json::json!({
                            "value": format_rat(value),
                            "bound": format_rat(bound),
                            "opt": format_rat(opt),
                        }),
                    ),
                    LaminarVerdict::NotLaminar => ("ERROR", serde_json::json!("support not laminar")),
                    LaminarVerdict::Infeasible { witness } => {
                        ("ERROR", serde_json::json!({ "infeasible": witness }))
                    }
                };
                if status != "PASS" {
                    any_fail = true;
                }
                verdicts.push(serde_json::json!({
                    "audit": "laminar",
                    "status": status,
                    "detail": detail,
                }));
            }
            other => {
                return Err(format!("unknown audit `{other}`").into());
            }
        }
    }

    let result = serde_json::json!({
        "instance": label,
        "delta": format_rat(&growth.delta),
        "mst": format_rat(&mst),
        "completed": tr.completed(),
        "captures": tr.captured.iter().map(|(sid, t)| serde_json::json!({
            "set": tr.forest.sets[*sid].members.iter().map(|v| v + 1).collect::<Vec<_>>(),
            "t": format_rat(t),
        })).collect::<Vec<_>>(),
        "value": format_rat(&value),
        "scaled_value": format_rat(&scaled),
        "audits": verdicts,
    });
    emit(&result, &args.out)?;
    Ok(if any_fail {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    })
}

fn skipped(audit: &str) -> serde_json::Value {
    serde_json::json!({
        "audit": audit,
        "status": "SKIPPED",
        "reason": "instance not verified locally gamma-MST-optimal at h",
    })
}

/// Run chain/potential audits over every set-vertex pair reached before the
/// set's deactivation.
fn path_audits(
    tr: &moatforge::growth::GrowthTrace,
    f: &MergeForest,
    which: &str,
) -> Result<serde_json::Value, AnyError> {
    let mut checked = 0usize;
    let mut failures: Vec<String> = vec![];
    for s in &f.sets {
        if f.has_root(s.id) {
            continue;
        }
        let d = s.deactivation.clone().unwrap_or_else(|| tr.t_max.clone());
        let labels = moatforge::growth::reach_labels(tr, s.id);
        for v in 0..tr.base_vertex_count {
            let Some(reach) = labels[v].clone() else {
                continue;
            };
            if reach >= d {
                continue;
            }
            let path = moatforge::growth::extract_s_tight_path(tr, s.id, v)?;
            if path.vertices.len() < 2 {
                continue;
            }
            let decomp = diagnostics::chain_decomposition(tr, f, &path)?;
            checked += 1;
            if which == "chains" {
                if let Some(failure) = &decomp.failure {
                    failures.push(failure.clone());
                }
            } else {
                for idx in 0..decomp.chains.len() {
                    let verdict = diagnostics::potential_audit(tr, f, &decomp, idx);
                    if !verdict.passed() {
                        failures.push(verdict.worst_witness.unwrap_or_default());
                    }
                }
            }
        }
    }
    Ok(serde_json::json!({
        "audit": which,
        "status": if failures.is_empty() { "PASS" } else { "FAIL" },
        "paths_checked": checked,
        "failures": failures,
    }))
}

fn cmd_oracle(args: OracleArgs) -> Result<ExitCode, AnyError> {
    match args.what {
        OracleCommand::Dw(a) => {
            let (inst, label) = load_instance(&a.instance)?;
            let m = metric_closure(&inst);
            let (cost, edges) = oracles::dreyfus_wagner(&m)?;
            let json = serde_json::json!({
                "instance": label,
                "opt": format_rat(&cost),
                "tree": edges.iter().map(|(u, v)| vec![u + 1, v + 1]).collect::<Vec<_>>(),
            });
            emit(&json, &None)?;
            Ok(ExitCode::SUCCESS)
        }
        OracleCommand::Lp(a) => {
            let (inst, label) = load_instance(&a.instance)?;
            let spec = LpSpec {
                relaxation: match a.relaxation {
                    RelaxKind::Ucr => Relaxation::Ucr,
                    RelaxKind::Bcr => Relaxation::Bcr { root: inst.root },
                },
            };
            let method = match a.method {
                MethodKind::Enumerate => Method::Enumerate,
                MethodKind::Separate => Method::Separate,
            };
            let (value, stats) = oracles::lp_value(&inst, &spec, method)?;
            let json = serde_json::json!({
                "instance": label,
                "value": format_rat(&value),
                "pivots": stats.pivots,
                "cuts_added": stats.cuts_added,
            });
            emit(&json, &None)?;
            Ok(ExitCode::SUCCESS)
        }
        OracleCommand::Export(a) => {
            let (inst, _) = load_instance(&a.instance)?;
            let spec = LpSpec {
                relaxation: match a.relaxation {
                    RelaxKind::Ucr => Relaxation::Ucr,
                    RelaxKind::Bcr => Relaxation::Bcr { root: inst.root },
                },
            };
            match &a.out {
                Some(path) => {
                    let mut file = std::fs::File::create(path)?;
                    oracles::export_lp(&inst, &spec, &mut file)?;
                }
                None => {
                    let mut stdout = std::io::stdout().lock();
                    oracles::export_lp(&inst, &spec, &mut stdout)?;
                    stdout.flush()?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn cmd_batch(args: BatchArgs) -> Result<ExitCode, AnyError> {
    let manifest = std::fs::read_to_string(&args.manifest)?;
    let entries: Vec<serde_json::Value> = manifest
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect::<Result<_, _>>()?;
    // Fan out across entries; results keep manifest order.
    let results: Vec<serde_json::Value> = std::thread::scope(|scope| {
        let handles: Vec<_> = entries
            .iter()
            .map(|entry| scope.spawn(move || run_batch_entry(entry)))
            .collect();
        handles
            .into_iter()
            .map(|h| match h.join() {
                Ok(Ok(v)) => v,
                Ok(Err(e)) => serde_json::json!({"status": "ERROR", "error": e.to_string()}),
                Err(_) => serde_json::json!({"status": "ERROR", "error": "panicked"}),
            })
            .collect()
    });
    let jsonl: String = results
        .iter()
        .map(|r| serde_json::to_string(r).unwrap())
        .collect::<Vec<_>>()
        .join("\n");
    match &args.out {
        Some(path) => std::fs::write(path, format!("{jsonl}\n"))?,
        None => println!("{jsonl}"),
    }
    if let Some(path) = &args.csv {
        let mut csv = String::from("instance,mst,opt,lp,dual,tree,ratio\n");
        for r in &results {
            let get = |k: &str| {
                r.get(k)
                    .and_then(|v| v.as_str())
                    .unwrap_or("")
                    .to_string()
            };
            csv.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                get("instance"),
                get("mst"),
                get("opt"),
                get("lp"),
                get("dual_bound"),
                get("tree_cost"),
                get("ratio"),
            ));
        }
        std::fs::write(path, csv)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn run_batch_entry(
    entry: &serde_json::Value,
) -> Result<serde_json::Value, AnyError> {
    let verb = entry.get("verb").and_then(|v| v.as_str()).unwrap_or("solve");
    let get_usize = |k: &str| entry.get(k).and_then(|v| v.as_u64()).map(|v| v as usize);
    let instance_args = InstanceArgs {
        family: entry
            .get("family")
            .and_then(|v| v.as_str())
            .map(String::from),
        file: entry.get("file").and_then(|v| v.as_str()).map(String::from),
        format: match entry.get("format").and_then(|v| v.as_str()) {
            Some("stp") => FileFormat::Stp,
            _ => FileFormat::Native,
        },
        root: get_usize("root"),
        n: get_usize("n"),
        k: get_usize("k"),
        q: get_usize("q"),
        seed: entry.get("seed").and_then(|v| v.as_u64()),
    };
    let (inst, label) = load_instance(&instance_args)?;
    let mut growth = GrowthConfig::table1();
    if let Some(d) = entry.get("delta").and_then(|v| v.as_str()) {
        growth.delta = parse_rat(d)?;
    }
    match verb {
        "solve" => {
            let cfg = SolveConfig {
                growth,
                gamma: entry
                    .get("gamma")
                    .and_then(|v| v.as_str())
                    .map(parse_rat)
                    .transpose()?
                    .unwrap_or_else(|| rat(774, 10_000)),
                h: get_usize("h").unwrap_or(6),
            };
            let mut report = scale_or_contract(&inst, &cfg)?;
            report.instance = label;
            let mut json = report.to_json();
            // Enrich with oracle columns where cheap.
            let m = metric_closure(&inst);
            if inst.terminals.len() <= 10 {
                if let Ok((opt, _)) = oracles::dreyfus_wagner(&m) {
                    json["opt"] = serde_json::json!(format_rat(&opt));
                }
            }
            if inst.vertex_count <= 24 {
                let spec = LpSpec {
                    relaxation: Relaxation::Bcr { root: inst.root },
                };
                if let Ok((lp, _)) = oracles::lp_value(&inst, &spec, Method::Separate) {
                    json["lp"] = serde_json::json!(format_rat(&lp));
                }
            }
            Ok(json)
        }
        "verify" => {
            let m = metric_closure(&inst);
            let f = MergeForest::build(&m);
            let tr = run_growth(&m, &f, &growth)?;
            let (value, scaled) = tr.dual_value();
            let (_, mst) = terminal_mst(&m);
            Ok(serde_json::json!({
                "instance": label,
                "verb": "verify",
                "mst": format_rat(&mst),
                "completed": tr.completed(),
                "captures": tr.captured.len(),
                "value": format_rat(&value),
                "scaled_value": format_rat(&scaled),
            }))
        }
        other => Err(format!("unknown verb `{other}`").into()),
    }
}
