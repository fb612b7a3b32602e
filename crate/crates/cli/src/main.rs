#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hodge_afem::adapt::verify::{run_suite, RunMatrix, Suite, MARKING_SEED};
use hodge_afem::adapt::{
    amfem, contraction_report, fit_rate, AmfemOptions, ConvergenceHistory, RateAxis, RateQuantity, Strategy, BETA_GRID,
};
use hodge_afem::mesh::{builtin_domain, Domain};
use hodge_afem::{DataFunction, Error, Mesh};
use serde_json::json;

const EXIT_CONFIG: u8 = 1;
const EXIT_ASSERTION: u8 = 2;
const EXIT_SOLVER: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "hodge-afem", version, about = "Adaptive mixed finite elements for the Hodge-Laplace problem")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the adaptive loop and write history.csv, mesh.json, manifest.json and report.json.
    Adapt(AdaptArgs),
    /// Run verification suites over a run matrix of uniform refinements and write report.json.
    Verify(VerifyArgs),
    /// Print convergence rates of history files.
    Rates(RatesArgs),
}

#[derive(Debug, Args)]
struct ProblemArgs {
    /// Builtin domain: square, lshape, square_one_hole, square_two_holes.
    #[arg(long, conflicts_with = "mesh")]
    domain: Option<String>,
    /// Mesh JSON file used instead of a builtin domain.
    #[arg(long)]
    mesh: Option<PathBuf>,
    /// Data: const1, sinsin, linex, signstep, or a tabulated-grid JSON file.
    #[arg(long = "f")]
    f: Option<String>,
    /// Uniform levels added to the finest mesh for the reference solution.
    #[arg(long, default_value_t = 2)]
    reference_depth: usize,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StrategyArg {
    Dorfler,
    Uniform,
}

#[derive(Debug, Args)]
struct AdaptArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Dörfler parameter in (0, 1], applied to squared indicators.
    #[arg(long, default_value_t = 0.5)]
    theta: f64,
    /// Tolerance on the estimator η (not η²).
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
    #[arg(long, default_value_t = 50)]
    max_iter: usize,
    /// δ of the quasi-error (1-δ)e_k + βη_k.
    #[arg(long, default_value_t = 0.25)]
    delta: f64,
    /// Comma-separated β values of the contraction report.
    #[arg(long, value_delimiter = ',', default_values_t = BETA_GRID)]
    beta_grid: Vec<f64>,
    #[arg(long, value_enum, default_value_t = StrategyArg::Dorfler)]
    strategy: StrategyArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SuiteArg {
    Stability,
    Quasi,
    Bounds,
    Harmonics,
    Marking,
    All,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, value_enum, default_value_t = SuiteArg::All)]
    suite: SuiteArg,
    /// Uniform levels of the run matrix, comma-separated.
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2, 3, 4, 5])]
    levels: Vec<usize>,
}

#[derive(Debug, Args)]
struct RatesArgs {
    /// History CSV files.
    #[arg(required = true)]
    files: Vec<PathBuf>,
}

/// A failed command with its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Failure { code: EXIT_CONFIG, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Factorization(_) | Error::DepthLimit(_) => EXIT_SOLVER,
            _ => EXIT_CONFIG,
        };
        Failure { code, message: e.to_string() }
    }
}

type CmdResult = Result<(), Failure>;

fn load_mesh(p: &ProblemArgs) -> Result<(Mesh, String), Failure> {
    match (&p.domain, &p.mesh) {
        (_, Some(path)) => {
            let mesh = Mesh::load(path).map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
            Ok((mesh, path.display().to_string()))
        }
        (Some(name), None) => {
            let domain: Domain = name.parse()?;
            Ok((builtin_domain(domain)?, domain.to_string()))
        }
        (None, None) => Ok((builtin_domain(Domain::Square)?, Domain::Square.to_string())),
    }
}

fn load_data(p: &ProblemArgs, default: DataFunction) -> Result<(DataFunction, String), Failure> {
    match &p.f {
        None => Ok((default.clone(), default.name().to_string())),
        Some(s) if DataFunction::BUILTIN.contains(&s.as_str()) => Ok((s.parse()?, s.clone())),
        Some(s) if Path::new(s).is_file() => {
            let f = DataFunction::from_file(s).map_err(|e| Failure::config(format!("{s}: {e}")))?;
            Ok((f, s.clone()))
        }
        Some(s) => Err(Failure::config(format!(
            "unknown data function `{s}`: not one of {} and not a readable file",
            DataFunction::BUILTIN.join(", ")
        ))),
    }
}

fn prepare_out(p: &ProblemArgs) -> CmdResult {
    if p.reference_depth == 0 {
        return Err(Failure::config("--reference-depth must be at least 1"));
    }
    fs::create_dir_all(&p.out).map_err(|e| Failure::config(format!("{}: {e}", p.out.display())))
}

fn write(path: PathBuf, text: &str) -> CmdResult {
    fs::write(&path, text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))
}

fn slope(history: &ConvergenceHistory, y: RateQuantity) -> Option<f64> {
    fit_rate(history, RateAxis::Dofs, y).ok()
}

fn fmt_slope(s: Option<f64>) -> String {
    s.map_or_else(|| "n/a".to_string(), |s| format!("{s:.2}"))
}

fn cmd_adapt(a: &AdaptArgs) -> CmdResult {
    if !(a.theta > 0.0 && a.theta <= 1.0) {
        return Err(Failure::config(format!("--theta {} is not in (0, 1]", a.theta)));
    }
    if !(a.eps > 0.0) {
        return Err(Failure::config(format!("--eps {} must be positive", a.eps)));
    }
    if !(a.delta > 0.0 && a.delta < 1.0) {
        return Err(Failure::config(format!("--delta {} is not in (0, 1)", a.delta)));
    }
    if a.beta_grid.is_empty() || a.beta_grid.iter().any(|&b| !(b > 0.0)) {
        return Err(Failure::config("--beta-grid needs positive values"));
    }
    prepare_out(&a.problem)?;
    let (mesh, domain) = load_mesh(&a.problem)?;
    let (f, f_name) = load_data(&a.problem, DataFunction::Const1)?;
    let strategy = match a.strategy {
        StrategyArg::Dorfler => Strategy::Dorfler,
        StrategyArg::Uniform => Strategy::Uniform,
    };
    let options = AmfemOptions {
        max_iter: a.max_iter,
        reference_depth: a.problem.reference_depth,
        delta: a.delta,
        beta: 1.0,
        strategy,
    };
    let out = amfem(&mesh, &f, a.eps, a.theta, &options)?;

    let dir = &a.problem.out;
    write(dir.join("history.csv"), &out.history.to_csv())?;
    write(dir.join("mesh.json"), &out.mesh.to_json()?)?;
    let manifest = json!({
        "command": "adapt",
        "domain": domain,
        "f": f_name,
        "theta": a.theta,
        "eps": a.eps,
        "max_iter": a.max_iter,
        "delta": a.delta,
        "beta_grid": a.beta_grid,
        "reference_depth": a.problem.reference_depth,
        "strategy": options.strategy,
        "seeds": {},
        "iterations": out.history.len(),
        "converged": out.converged,
        "version": env!("CARGO_PKG_VERSION"),
    });
    write(dir.join("manifest.json"), &serde_json::to_string_pretty(&manifest).expect("json value"))?;
    let report = match contraction_report(&out.history, a.delta, a.theta, &a.beta_grid) {
        Ok(r) => serde_json::to_value(r).expect("serializable report"),
        Err(e) => json!({ "contraction": e.to_string() }),
    };
    write(dir.join("report.json"), &serde_json::to_string_pretty(&report).expect("json value"))?;

    let last = out.history.last().expect("at least one iteration");
    println!(
        "iterations {} cells {} dofs {} eta {:.6e}",
        out.history.len(),
        last.cells,
        last.dofs(),
        last.eta_sq.sqrt()
    );
    println!(
        "rates vs dofs: error {} eta {}",
        fmt_slope(slope(&out.history, RateQuantity::Error)),
        fmt_slope(slope(&out.history, RateQuantity::Eta))
    );
    if !out.converged {
        eprintln!("warning: iteration cap {} reached before eta <= {}", a.max_iter, a.eps);
    }
    Ok(())
}

fn cmd_verify(v: &VerifyArgs) -> CmdResult {
    prepare_out(&v.problem)?;
    let (base, domain) = load_mesh(&v.problem)?;
    let (f, f_name) = load_data(&v.problem, DataFunction::SinSin)?;
    let suite = match v.suite {
        SuiteArg::Stability => Suite::Stability,
        SuiteArg::Quasi => Suite::Quasi,
        SuiteArg::Bounds => Suite::Bounds,
        SuiteArg::Harmonics => Suite::Harmonics,
        SuiteArg::Marking => Suite::Marking,
        SuiteArg::All => Suite::All,
    };
    let matrix = RunMatrix { base, f, levels: v.levels.clone(), reference_depth: v.problem.reference_depth };
    let report = run_suite(suite, &matrix)?;
    write(v.problem.out.join("report.json"), &report.to_json()?)?;
    let manifest = json!({
        "command": "verify",
        "suite": format!("{:?}", v.suite).to_lowercase(),
        "domain": domain,
        "f": f_name,
        "levels": v.levels,
        "reference_depth": v.problem.reference_depth,
        "seeds": { "marking": MARKING_SEED },
        "version": env!("CARGO_PKG_VERSION"),
    });
    write(v.problem.out.join("manifest.json"), &serde_json::to_string_pretty(&manifest).expect("json value"))?;
    let checks = report.entries().keys().filter(|k| k.starts_with("pass.")).count();
    match report.failures().first() {
        None => {
            println!("all {checks} checks passed");
            Ok(())
        }
        Some(first) => {
            for name in report.failures() {
                println!("FAIL {name}");
            }
            Err(Failure { code: EXIT_ASSERTION, message: format!("assertion `{first}` failed") })
        }
    }
}

fn cmd_rates(r: &RatesArgs) -> CmdResult {
    let mut error_slopes = Vec::new();
    for path in &r.files {
        let name = path.display();
        let h = ConvergenceHistory::load(path).map_err(|e| match e {
            Error::Io(_) => Failure::config(format!("{name}: {e}")),
            e => Failure::config(e.to_string()),
        })?;
        if h.len() < 3 {
            return Err(Failure::config(format!("{name}: {} records, need at least 3", h.len())));
        }
        let (e, eta) = (slope(&h, RateQuantity::Error), slope(&h, RateQuantity::Eta));
        println!("{name}: error {} eta {}", fmt_slope(e), fmt_slope(eta));
        error_slopes.push(e);
    }
    if let [Some(a), Some(b)] = error_slopes[..] {
        println!(
            "error slope difference ({} minus {}): {:.2}",
            r.files[1].display(),
            r.files[0].display(),
            b - a
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_CONFIG) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Adapt(a) => cmd_adapt(a),
        Command::Verify(v) => cmd_verify(v),
        Command::Rates(r) => cmd_rates(r),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
