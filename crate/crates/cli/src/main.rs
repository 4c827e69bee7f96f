use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use graph_cosparse::analysis::{cosparsity, prop1_basis};
use graph_cosparse::figure::{fig1_checks, fig1_files, Fig1, DEFAULT_ATOMS, DEFAULT_N};
use graph_cosparse::graph::{CirculantSpec, Cosupport, Graph};
use graph_cosparse::io::{cosupport_to_json, matrix_to_csv, parse_circulant_json, parse_graph_auto, signal_to_csv};
use graph_cosparse::linalg::{centering_projector, penrose_residuals, pseudoinverse, rank, TolPolicy};
use graph_cosparse::scalar::max_abs;
use graph_cosparse::synthesis::{incidence_pinv, knot_support, structured_sparsity_check, synthesize};
use graph_cosparse::verify::{self, Faults, UserGraph, VerifyConfig};

#[derive(Parser)]
#[command(
    name = "gcos",
    version,
    about = "Cosparse analysis and sparse synthesis operators on graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write L, S and their pseudoinverses as CSV, with a JSON report.
    Operators {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Reproduce the three-panel circulant atom figure (CSV and SVG).
    Fig1 {
        #[arg(long, default_value_t = DEFAULT_N)]
        n: usize,
        /// Atom indices `i,j`.
        #[arg(long, value_delimiter = ',', default_values_t = [DEFAULT_ATOMS.0, DEFAULT_ATOMS.1])]
        atoms: Vec<usize>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run every verification suite; exit 1 on the first failure.
    Verify {
        #[command(flatten)]
        source: OptionalSource,
        #[arg(long, default_value_t = verify::DEFAULT_SEED)]
        seed: u64,
        /// Case count for every randomized suite.
        #[arg(long)]
        trials: Option<usize>,
        /// Residual tolerance override (default 1e-9).
        #[arg(long)]
        tol: Option<f64>,
        /// Directory for verify_report.json; the report goes to stdout otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, hide = true, default_value = "")]
        inject_fault: String,
    },
    /// Basis of the analysis subspace for a cosupport.
    AnalysisBasis {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        indices: IndexSet,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Synthesize `L† Ψᵀ c` from a support and coefficients.
    Synth {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_delimiter = ',', required = true)]
        support: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        coeffs: Vec<f64>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Edge list (`i j w` per line) or graph JSON file.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Circulant spec JSON, inline or a file path.
    #[arg(long)]
    circulant: Option<String>,
}

#[derive(Args)]
#[group(required = false, multiple = false)]
struct OptionalSource {
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long)]
    circulant: Option<String>,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct IndexSet {
    /// Zero rows `Λ`, comma separated.
    #[arg(long, value_delimiter = ',')]
    cosupport: Option<Vec<usize>>,
    /// Nonzero rows `Λ^∁`, comma separated.
    #[arg(long, value_delimiter = ',')]
    support: Option<Vec<usize>>,
}

/// Failure carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

fn input_error(e: impl std::fmt::Display) -> Failure {
    Failure {
        code: 2,
        message: e.to_string(),
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| input_error(format!("cannot read {}: {e}", path.display())))
}

fn load_circulant(arg: &str) -> Result<CirculantSpec<f64>, Failure> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        read_text(Path::new(arg))?
    };
    parse_circulant_json(&text).map_err(input_error)
}

fn load_source(graph: Option<&Path>, circulant: Option<&str>) -> Result<Option<UserGraph>, Failure> {
    match (graph, circulant) {
        (Some(p), None) => Ok(Some(UserGraph::General(
            parse_graph_auto(&read_text(p)?).map_err(input_error)?,
        ))),
        (None, Some(c)) => Ok(Some(UserGraph::Circulant(load_circulant(c)?))),
        (None, None) => Ok(None),
        (Some(_), Some(_)) => Err(input_error("give exactly one of --graph and --circulant")),
    }
}

fn load_graph(source: &Source) -> Result<Graph<f64>, Failure> {
    Ok(load_source(source.graph.as_deref(), source.circulant.as_deref())?
        .expect("clap requires a source")
        .graph())
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| input_error(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| input_error(format!("cannot write {}: {e}", path.display())))
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct OperatorsReport {
    n: usize,
    edges: usize,
    components: usize,
    rank: usize,
    /// `‖L L† - (I - J/n)‖`, only for connected graphs.
    projection_residual: Option<f64>,
    penrose_residuals: [f64; 4],
    /// `‖L† - L/n²‖` when the graph is the unweighted complete graph.
    complete_graph_residual: Option<f64>,
}

fn cmd_operators(source: &Source, out: &Path) -> Result<(), Failure> {
    let g = load_graph(source)?;
    let l = g.laplacian();
    let s = g.incidence();
    let lp = pseudoinverse(&l, TolPolicy::Standard).map_err(input_error)?;
    let sp = incidence_pinv(&lp, &s);
    let n = g.n();
    let report = OperatorsReport {
        n,
        edges: g.edge_count(),
        components: g.connected_components(),
        rank: rank(&l),
        projection_residual: g
            .is_connected()
            .then(|| max_abs(&(&l * &lp - centering_projector::<f64>(n)))),
        penrose_residuals: penrose_residuals(&l, &lp),
        complete_graph_residual: g
            .is_unweighted_complete()
            .then(|| max_abs(&(&lp - &l / (n * n) as f64))),
    };
    write(out, "L.csv", &matrix_to_csv(&l))?;
    write(out, "S.csv", &matrix_to_csv(&s))?;
    write(out, "Lpinv.csv", &matrix_to_csv(&lp))?;
    write(out, "Spinv.csv", &matrix_to_csv(&sp))?;
    write(out, "report.json", &to_json(&report))
}

fn cmd_fig1(n: usize, atoms: &[usize], out: &Path) -> Result<(), Failure> {
    let &[i, j] = atoms else {
        return Err(input_error(format!("--atoms takes two indices, got {}", atoms.len())));
    };
    let fig = Fig1::<f64>::build(n, i, j).map_err(input_error)?;
    for (name, body) in fig1_files(&fig) {
        write(out, &name, &body)?;
    }
    let checks = fig1_checks(&fig).map_err(input_error)?;
    #[derive(Serialize)]
    struct Report<'a> {
        passed: bool,
        #[serde(flatten)]
        checks: &'a graph_cosparse::figure::Fig1Checks,
    }
    write(
        out,
        "fig1_report.json",
        &to_json(&Report {
            passed: checks.passed(),
            checks: &checks,
        }),
    )
}

fn cmd_verify(
    source: &OptionalSource,
    seed: u64,
    trials: Option<usize>,
    tol: Option<f64>,
    out: Option<&Path>,
    fault: &str,
) -> Result<(), Failure> {
    let mut cfg = VerifyConfig {
        seed,
        tol,
        graph: load_source(source.graph.as_deref(), source.circulant.as_deref())?,
        faults: Faults::parse(fault).map_err(input_error)?,
        ..VerifyConfig::default()
    };
    if let Some(t) = trials {
        cfg = cfg.with_trials(t);
    }
    let report = verify::run(&cfg);
    let json = to_json(&report);
    match out {
        Some(dir) => write(dir, "verify_report.json", &json)?,
        None => print!("{json}"),
    }
    for s in &report.suites {
        eprintln!("{:<16} {}", s.name, if s.passed { "pass" } else { "FAIL" });
    }
    match report.first_failure {
        None => Ok(()),
        Some(msg) => Err(Failure {
            code: 1,
            message: format!("verification failed: {msg}"),
        }),
    }
}

fn resolve_cosupport(n: usize, indices: &IndexSet) -> Result<Cosupport, Failure> {
    match (&indices.cosupport, &indices.support) {
        (Some(lam), None) => Cosupport::from_lambda(n, lam),
        (None, Some(comp)) => Cosupport::from_complement(n, comp),
        _ => unreachable!("clap enforces exactly one index set"),
    }
    .map_err(input_error)
}

#[derive(Serialize)]
struct BasisColumn {
    column: usize,
    cosparsity: usize,
    cosupport: Vec<usize>,
}

#[derive(Serialize)]
struct BasisReport {
    n: usize,
    cosupport: Vec<usize>,
    support: Vec<usize>,
    rank: usize,
    /// Rows of `L` annihilating every basis column.
    cosupport_recovered: Vec<usize>,
    columns: Vec<BasisColumn>,
}

fn cmd_analysis_basis(source: &Source, indices: &IndexSet, tol: f64, out: &Path) -> Result<(), Failure> {
    let g = load_graph(source)?;
    let lam = resolve_cosupport(g.n(), indices)?;
    let basis = prop1_basis(&g, &lam).map_err(input_error)?;
    let m = basis.matrix();
    let l = g.laplacian();
    let mut columns = Vec::new();
    let mut common: Option<Vec<usize>> = None;
    for c in 0..m.ncols() {
        let (k, cos) = cosparsity(&l, &m.column(c).into_owned(), tol).map_err(input_error)?;
        let zeros = cos.lambda().to_vec();
        common = Some(match common {
            None => zeros.clone(),
            Some(prev) => prev.into_iter().filter(|v| zeros.contains(v)).collect(),
        });
        columns.push(BasisColumn {
            column: c,
            cosparsity: k,
            cosupport: zeros,
        });
    }
    let recovered = common.unwrap_or_default();
    let report = BasisReport {
        n: g.n(),
        cosupport: lam.lambda().to_vec(),
        support: lam.complement().to_vec(),
        rank: rank(&m),
        cosupport_recovered: recovered.clone(),
        columns,
    };
    write(out, "basis.csv", &matrix_to_csv(&m))?;
    write(out, "cosupport.json", &format!("{}\n", cosupport_to_json(&recovered)))?;
    write(out, "report.json", &to_json(&report))
}

#[derive(Serialize)]
struct SynthReport {
    n: usize,
    support: Vec<usize>,
    coeffs: Vec<f64>,
    cosparsity: usize,
    knots: Vec<usize>,
    structured_sparsity: bool,
    warning: Option<String>,
}

fn cmd_synth(source: &Source, support: &[usize], coeffs: &[f64], tol: f64, out: &Path) -> Result<(), Failure> {
    let g = load_graph(source)?;
    if !g.is_connected() {
        return Err(input_error(format!(
            "graph has {} components; synthesis needs a connected graph",
            g.connected_components()
        )));
    }
    let l = g.laplacian();
    let lp = pseudoinverse(&l, TolPolicy::Standard).map_err(input_error)?;
    let x = synthesize(&lp, support, coeffs).map_err(input_error)?;
    let (k, _) = cosparsity(&l, &x, tol).map_err(input_error)?;
    let structured = structured_sparsity_check(coeffs, 1e-12);
    let warning =
        (!structured).then(|| "coefficients do not sum to zero: L x is not supported on the given support".to_string());
    if let Some(w) = &warning {
        eprintln!("warning: {w}");
    }
    let lx = &l * &x;
    let report = SynthReport {
        n: g.n(),
        support: support.to_vec(),
        coeffs: coeffs.to_vec(),
        cosparsity: k,
        knots: knot_support(lx.as_slice()),
        structured_sparsity: structured,
        warning,
    };
    write(out, "signal.csv", &signal_to_csv(&x))?;
    write(out, "report.json", &to_json(&report))
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Operators { source, out } => cmd_operators(source, out),
        Command::Fig1 { n, atoms, out } => cmd_fig1(*n, atoms, out),
        Command::Verify {
            source,
            seed,
            trials,
            tol,
            out,
            inject_fault,
        } => cmd_verify(source, *seed, *trials, *tol, out.as_deref(), inject_fault),
        Command::AnalysisBasis {
            source,
            indices,
            tol,
            out,
        } => cmd_analysis_basis(source, indices, *tol, out),
        Command::Synth {
            source,
            support,
            coeffs,
            tol,
            out,
        } => cmd_synth(source, support, coeffs, *tol, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("gcos: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
