use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use sdglab_core::decomposition::{
    decompose, graph_weight_coefficient, ham_path, lightness_trace, verify_certificate, weight_coefficient,
    DecompositionCertificate, HamMode,
};
use sdglab_core::disk_graph::RangeAssignment;
use sdglab_core::error::Error;
use sdglab_core::experiments::{emit_csv, emit_summary, render_svg, run_sweep, SweepConfig};
use sdglab_core::graph::kruskal_msf;
use sdglab_core::hamiltonian::{Exactness, HamPath};
use sdglab_core::instances::{
    gen_c3, gen_chain_metric, gen_line_graph, gen_random_instance, gen_star_metric, line_graph_defaults,
    read_instance, write_instance, Family, InstanceBundle, RangeMode, Space,
};
use sdglab_core::metric::{Metric, Norm};
use sdglab_core::range_assignment::{bounded_assignment, cost_ratio_check};

#[derive(Parser)]
#[command(name = "sdglab", version, about = "Symmetric disk graph experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance file.
    Gen(GenArgs),
    /// Edge list of the symmetric disk graph.
    Sdg(InstanceArgs),
    /// Minimum spanning forest of the disk graph against the host MST.
    Msf(InstanceArgs),
    /// Decomposition certificate for the disk-graph MSF, verified.
    Decompose(PathArgs),
    /// Peeling trace with the logarithmic weight bound.
    Trace(PathArgs),
    /// Bounded range assignment.
    Assign(AssignArgs),
    /// Seeded random sweep to CSV.
    Sweep(SweepArgs),
    /// Check a certificate produced by `decompose`.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_parser = parse_family)]
    family: Family,
    #[arg(long, default_value_t = 5)]
    n: usize,
    /// Heavy weight W for c3 and line.
    #[arg(long)]
    w: Option<f64>,
    /// Spacing for line.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value = "2", value_parser = parse_norm)]
    p: Norm,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Ranges::Uniform)]
    ranges: Ranges,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InstanceArgs {
    instance: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PathArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value_t = Ham::Auto)]
    ham: Ham,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AssignArgs {
    instance: PathBuf,
    /// JSON array of range bounds; defaults to the instance ranges.
    #[arg(long)]
    bounds: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    instance: PathBuf,
    certificate: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// euclidean, matrix or all.
    #[arg(long, default_value = "all")]
    family: String,
    #[arg(long, value_delimiter = ',', default_values_t = [8, 16, 32, 64])]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [1, 2, 3, 5])]
    dim: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,inf", value_parser = parse_norm)]
    p: Vec<Norm>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Ranges::Uniform, Ranges::Biased])]
    ranges: Vec<Ranges>,
    #[arg(long, value_enum, default_value_t = Ham::Auto)]
    ham: Ham,
    /// Worker count; 0 uses all cores. SDGLAB_THREADS caps it.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Ranges {
    Uniform,
    Biased,
}

impl From<Ranges> for RangeMode {
    fn from(r: Ranges) -> Self {
        match r {
            Ranges::Uniform => RangeMode::Uniform,
            Ranges::Biased => RangeMode::Biased,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Ham {
    Exact,
    Approx,
    Auto,
}

impl From<Ham> for HamMode {
    fn from(h: Ham) -> Self {
        match h {
            Ham::Exact => HamMode::Exact,
            Ham::Approx => HamMode::Approx,
            Ham::Auto => HamMode::Auto,
        }
    }
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_norm(s: &str) -> Result<Norm, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// What `decompose` writes and `verify` reads.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CertificateDocument {
    path: Vec<usize>,
    certificate: DecompositionCertificate,
}

/// Command failure: invalid input (exit 2) or a failed check (exit 1).
enum Failure {
    Input(String),
    Check(Value),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn emit(value: &Value, out: Option<&Path>) -> Outcome {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Input(e.to_string()))? + "\n";
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn load(path: &Path) -> Result<InstanceBundle, Failure> {
    read_instance(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn need_metric(b: &InstanceBundle) -> Result<&Metric, Failure> {
    b.metric().ok_or_else(|| Failure::Input("this command needs a metric instance, not a general graph".into()))
}

fn cmd_gen(a: &GenArgs) -> Outcome {
    let bundle = match a.family {
        Family::Star => gen_star_metric(a.n)?,
        Family::Chain => gen_chain_metric(a.n)?,
        Family::C3 => gen_c3(a.w.unwrap_or(1000.0))?,
        Family::Line => {
            let (w, eps) = line_graph_defaults(a.n);
            gen_line_graph(a.n, a.w.unwrap_or(w), a.eps.unwrap_or(eps))?
        }
        Family::Euclidean => gen_random_instance(a.n, Space::Euclidean { d: a.dim, p: a.p }, a.ranges.into(), a.seed)?,
        Family::Matrix => gen_random_instance(a.n, Space::Matrix, a.ranges.into(), a.seed)?,
    };
    match &a.out {
        Some(p) => write_instance(&bundle, p).map_err(Failure::from),
        None => emit(&to_value(&bundle), None),
    }
}

fn cmd_sdg(a: &InstanceArgs) -> Outcome {
    let b = load(&a.instance)?;
    let g = b.sdg()?;
    emit(&json!({ "n": g.n(), "weight": g.weight(), "edges": to_value(&g)["edges"] }), a.out.as_deref())
}

fn cmd_msf(a: &InstanceArgs) -> Outcome {
    let b = load(&a.instance)?;
    let forest = kruskal_msf(&b.sdg()?);
    let report = match b.metric() {
        Some(m) => weight_coefficient(m, &b.ranges)?,
        None => graph_weight_coefficient(b.graph().expect("host is a graph"), &b.ranges)?,
    };
    let mut doc = json!({
        "n": b.n(),
        "forest": to_value(&forest.as_graph())["edges"],
        "components": forest.num_components(),
        "w_msf_sdg": report.w_msf_sdg,
        "w_mst": report.w_mst_metric,
        "coefficient": report.coefficient,
        "bound_2log": report.bound,
        "bound_applies": report.bound_applies,
        "within_bound": report.within_bound(),
    });
    if !report.bound_applies {
        doc["note"] = json!("general-graph: bound not applicable");
    }
    emit(&doc, a.out.as_deref())?;
    if report.within_bound() {
        Ok(())
    } else {
        Err(Failure::Check(json!({ "violation": "coefficient exceeds 2·log_5/4 n", "coefficient": report.coefficient })))
    }
}

fn cmd_decompose(a: &PathArgs) -> Outcome {
    let b = load(&a.instance)?;
    let m = need_metric(&b)?;
    let h = ham_path(m, a.ham.into())?;
    let forest = kruskal_msf(&b.sdg()?);
    let certificate = decompose(m, &b.ranges, &forest, &h)?;
    let violations = verify_certificate(m, &b.ranges, &forest, &h, &certificate);
    emit(&to_value(&CertificateDocument { path: h.order().to_vec(), certificate }), a.out.as_deref())?;
    check_violations(violations.iter().map(ToString::to_string).collect())
}

fn check_violations(v: Vec<String>) -> Outcome {
    if v.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(json!({ "violations": v })))
    }
}

fn cmd_trace(a: &PathArgs) -> Outcome {
    let b = load(&a.instance)?;
    let m = need_metric(&b)?;
    let trace = lightness_trace(m, &b.ranges, a.ham.into())?;
    let violations: Vec<String> = trace.check(m, &b.ranges).iter().map(ToString::to_string).collect();
    let coefficient = if m.n() >= 2 { Some(weight_coefficient(m, &b.ranges)?.coefficient) } else { None };
    let doc = json!({
        "n": trace.n,
        "rounds": trace.rounds.len(),
        "max_rounds": trace.max_rounds,
        "coefficient": coefficient,
        "w_forest": trace.w_forest,
        "w_ham": trace.w_ham,
        "removed_total": trace.removed_total,
        "budget": trace.budget,
        "log_bound": trace.log_bound,
        "bound_ok": violations.is_empty(),
        "violations": violations,
        "trace": to_value(&trace),
    });
    emit(&doc, a.out.as_deref())?;
    check_violations(violations)
}

fn cmd_assign(a: &AssignArgs) -> Outcome {
    let b = load(&a.instance)?;
    let m = need_metric(&b)?;
    let bounds = match &a.bounds {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?;
            serde_json::from_str::<RangeAssignment>(&text).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?
        }
        None => b.ranges.clone(),
    };
    let report = bounded_assignment(m, &bounds)?;
    let check = report.connected_input.then(|| cost_ratio_check(&report, m.n()));
    let mut doc = to_value(&report);
    doc["ratio"] = json!(check.as_ref().and_then(|c| c.as_ref().ok()));
    emit(&doc, a.out.as_deref())?;
    match check {
        Some(Err(v)) => Err(Failure::Check(json!({ "violation": v.to_string() }))),
        _ if !report.feasible => Err(Failure::Check(json!({ "violation": "assignment is infeasible" }))),
        _ => Ok(()),
    }
}

fn cmd_sweep(a: &SweepArgs) -> Outcome {
    let euclid = a.dim.iter().flat_map(|&d| a.p.iter().map(move |&p| Space::Euclidean { d, p }));
    let spaces: Vec<Space> = match a.family.as_str() {
        "euclidean" => euclid.collect(),
        "matrix" => vec![Space::Matrix],
        "all" => euclid.chain([Space::Matrix]).collect(),
        other => return Err(Failure::Input(format!("sweep family must be euclidean, matrix or all, got {other:?}"))),
    };
    let config = SweepConfig {
        base_seed: a.seed,
        trials: a.trials,
        sizes: a.n.clone(),
        spaces,
        range_modes: a.ranges.iter().map(|&r| r.into()).collect(),
        ham: a.ham.into(),
        threads: a.threads,
    };
    let records = run_sweep(&config)?;
    if let Some(p) = &a.out {
        emit_csv(&records, p)?;
    }
    if let Some(p) = &a.svg {
        std::fs::write(p, render_svg(&records)).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?;
    }
    print!("{}", emit_summary(&records));
    check_violations(records.iter().flat_map(|r| r.violations()).collect())
}

fn cmd_verify(a: &VerifyArgs) -> Outcome {
    let b = load(&a.instance)?;
    let m = need_metric(&b)?;
    let text = std::fs::read_to_string(&a.certificate)
        .map_err(|e| Failure::Input(format!("{}: {e}", a.certificate.display())))?;
    let doc: CertificateDocument =
        serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", a.certificate.display())))?;
    let h = HamPath::from_order(m, doc.path, Exactness::Approx)?;
    let forest = kruskal_msf(&b.sdg()?);
    let violations: Vec<String> =
        verify_certificate(m, &b.ranges, &forest, &h, &doc.certificate).iter().map(ToString::to_string).collect();
    emit(&json!({ "ok": violations.is_empty(), "violations": violations }), None)?;
    check_violations(violations)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Sdg(a) => cmd_sdg(a),
        Command::Msf(a) => cmd_msf(a),
        Command::Decompose(a) => cmd_decompose(a),
        Command::Trace(a) => cmd_trace(a),
        Command::Assign(a) => cmd_assign(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(v)) => {
            eprintln!("{}", json!({ "error": "check failed", "details": v }));
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("{}", json!({ "error": msg }));
            ExitCode::from(2)
        }
    }
}
