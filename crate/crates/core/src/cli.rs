//! Command-line front end.
//!
//! Exit codes: 0 success, 1 operational error (including failed required
//! certificates), 2 requirement violation.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::diagnostics::{certify_all, CertificationOutcome};
use crate::error::{Error, Result};
use crate::objectives::{residuals, ProblemInstance};
use crate::problems::{
    generate, load_problem, load_trace_json, parse_trace_csv, save_problem, save_trace_json,
    trace_to_csv, GeneratorSpec, SetFamily,
};
use crate::solvers::{run, Algorithm, InitialPoint, IterateTrace, NMode, SolverConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_REQUIREMENT: i32 = 2;

/// Environment variable supplying the default seed.
pub const SEED_ENV: &str = "SPLITFEAS_SEED";

#[derive(Debug, Parser)]
#[command(name = "splitfeas", version, about = "Split feasibility solvers and descent certificates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a seeded problem instance and write it as JSON.
    Generate(GenerateArgs),
    /// Run one algorithm on a problem and write its trace.
    Solve(SolveArgs),
    /// Check the descent certificates of a recorded trace.
    Certify(CertifyArgs),
    /// Run a grid of algorithms and parameters on one problem.
    Sweep(SweepArgs),
    /// Render a trace CSV as a residual-versus-iteration SVG.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub n: usize,
    /// Rows of `A`; a comma list gives one map per `Q_j`.
    #[arg(long, value_delimiter = ',', required = true)]
    pub m: Vec<usize>,
    #[arg(long, default_value = "ball")]
    pub set_c: SetFamily,
    #[arg(long, default_value = "box")]
    pub set_q: SetFamily,
    /// Plant a solution (the default).
    #[arg(long, conflicts_with = "inconsistent")]
    pub consistent: bool,
    /// Separate `A(C)` from `Q` by `--margin` (ball and box families only).
    #[arg(long)]
    pub inconsistent: bool,
    #[arg(long, default_value_t = 1.0)]
    pub margin: f64,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    /// Singular values of `A`, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub spectrum: Option<Vec<f64>>,
    /// Shape `A` to meet this algorithm's requirements (`alg6`, `alg7` or an algorithm name).
    #[arg(long, value_parser = parse_requirement)]
    pub require: Option<Algorithm>,
    /// Sparsity level for sparsity families.
    #[arg(long)]
    pub sparsity: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Clone)]
pub struct ParamArgs {
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub tau1: Option<f64>,
    #[arg(long)]
    pub tau2: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Residual tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub step_tol: Option<f64>,
    #[arg(long)]
    pub inner_tol: Option<f64>,
    #[arg(long)]
    pub inner_max_iter: Option<usize>,
    /// Run even if a requirement of the algorithm fails.
    #[arg(long = "override")]
    pub override_requirements: bool,
    /// Refuse subproblems that need the iterative inner solvers.
    #[arg(long)]
    pub no_inner_solver: bool,
}

impl ParamArgs {
    fn apply(&self, cfg: &mut SolverConfig) {
        macro_rules! set {
            ($($f:ident <- $g:ident),*) => {$( if let Some(v) = self.$g { cfg.$f = v; } )*};
        }
        set!(lambda <- lambda, rho <- rho, tau <- tau, tau1 <- tau1, tau2 <- tau2,
             max_iter <- max_iter, residual_tol <- tol, step_tol <- step_tol,
             inner_tol <- inner_tol, inner_max_iter <- inner_max_iter);
        cfg.override_requirements |= self.override_requirements;
        cfg.inner_solver &= !self.no_inner_solver;
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub problem: PathBuf,
    #[arg(long)]
    pub algorithm: Algorithm,
    #[command(flatten)]
    pub params: ParamArgs,
    /// Starting point, comma separated. When absent, a `--seed` Gaussian draw projected onto `C`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x0: Option<Vec<f64>>,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    /// Trace CSV destination.
    #[arg(long)]
    pub trace_out: PathBuf,
    /// Also write the full trace (all vectors) as JSON next to the CSV.
    #[arg(long)]
    pub full_trace: bool,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    /// Full trace JSON written by `solve --full-trace`.
    #[arg(long)]
    pub trace: PathBuf,
    #[arg(long)]
    pub problem: PathBuf,
    /// Solver configuration JSON replacing the one embedded in the trace.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Report JSON destination; defaults to `<trace>.cert.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub problem: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    pub algorithms: Vec<Algorithm>,
    /// Parameter ranges, e.g. `tau=1.1,1.5,2;lambda=0.5,1`.
    #[arg(long, default_value = "")]
    pub grid: String,
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Trace CSV.
    #[arg(long)]
    pub trace: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

/// What a command did.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandResult {
    pub exit_code: i32,
    pub artifacts: Vec<PathBuf>,
    pub summary: String,
}

impl CommandResult {
    fn ok(artifacts: Vec<PathBuf>, summary: String) -> Self {
        Self {
            exit_code: EXIT_OK,
            artifacts,
            summary,
        }
    }

    fn from_error(e: &Error) -> Self {
        let exit_code = match e {
            Error::Requirement(_) => EXIT_REQUIREMENT,
            _ => EXIT_ERROR,
        };
        Self {
            exit_code,
            artifacts: Vec::new(),
            summary: format!("error: {e}"),
        }
    }
}

fn parse_requirement(s: &str) -> std::result::Result<Algorithm, String> {
    match s {
        "alg1" => Ok(Algorithm::PadmmSf1),
        "alg2" => Ok(Algorithm::PgSf1p),
        "alg3" => Ok(Algorithm::AmSf1p),
        "alg4" => Ok(Algorithm::CqSf1p),
        "alg5" => Ok(Algorithm::PgSf3),
        "alg6" => Ok(Algorithm::WpadmmSf4(NMode::ProxIdentity)),
        "alg7" => Ok(Algorithm::WpadmmSf4(NMode::Linearized)),
        other => other.parse().map_err(|e: Error| e.to_string()),
    }
}

/// Parses arguments and runs the command. Never panics on bad input.
pub fn run_cli<I, T>(args: I) -> CommandResult
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(cli.command),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            CommandResult {
                exit_code: code,
                artifacts: Vec::new(),
                summary: e.render().to_string(),
            }
        }
    }
}

pub fn execute(command: Command) -> CommandResult {
    let out = match command {
        Command::Generate(a) => cmd_generate(&a),
        Command::Solve(a) => cmd_solve(&a),
        Command::Certify(a) => cmd_certify(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Plot(a) => cmd_plot(&a),
    };
    out.unwrap_or_else(|e| CommandResult::from_error(&e))
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<CommandResult> {
    let spec = GeneratorSpec {
        n: args.n,
        m: args.m.clone(),
        set_c: args.set_c,
        set_q: args.set_q,
        consistent: !args.inconsistent,
        seed: args.seed,
        spectrum: args.spectrum.clone(),
        enforce_requirements_for: args.require,
        sparsity: args.sparsity,
        margin: args.margin,
    };
    let problem = generate(&spec)?;
    save_problem(&args.out, &problem)?;
    let mut summary = format!("wrote {}\n", args.out.display());
    if let Some(w) = &problem.witness {
        let (rc, rq) = residuals(&problem, w)?;
        let _ = writeln!(summary, "witness residuals: C {rc:.3e}, Q {rq:.3e}");
    }
    if let Some(floor) = problem.residual_floor()? {
        let _ = writeln!(
            summary,
            "inconsistent: margin {}, residual floor {floor:.6e}",
            args.margin
        );
    }
    for (j, a) in problem.maps.iter().enumerate() {
        let s = a.spectral_summary(crate::linops::DEFAULT_SPECTRAL_TOL)?;
        let _ = writeln!(
            summary,
            "A[{j}]: λ_max(AᵀA) {:.6}, κ(AᵀA) {}, AAᵀ ≻ 0: {}",
            s.gram_lambda_max,
            if s.gram_condition.is_finite() {
                format!("{:.6}", s.gram_condition)
            } else {
                "inf".into()
            },
            s.rowgram_positive_definite()
        );
        if let Some(alg) = args.require {
            let report = crate::linops::check_table_requirements(&s, alg);
            let _ = write!(summary, "{report}");
            if !summary.ends_with('\n') {
                summary.push('\n');
            }
        }
    }
    Ok(CommandResult::ok(vec![args.out.clone()], summary))
}

/// Seeded Gaussian draw projected onto `C`, so every recorded iterate of a
/// projection method lies in `C` from `k = 0` on.
fn random_x0(seed: u64, problem: &ProblemInstance) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g: Vec<f64> = (0..problem.n()).map(|_| StandardNormal.sample(&mut rng)).collect();
    problem.set_c.project(&g)
}

fn companion_json(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

pub fn cmd_solve(args: &SolveArgs) -> Result<CommandResult> {
    let problem = load_problem(&args.problem)?;
    let mut cfg = SolverConfig::defaults(args.algorithm, &problem)?;
    args.params.apply(&mut cfg);
    let x0 = match &args.x0 {
        Some(x) => x.clone(),
        None => random_x0(args.seed, &problem)?,
    };
    let init = InitialPoint::default_for(args.algorithm, &problem, x0)?;
    let trace = run(&problem, &cfg, &init)?;

    let mut artifacts = vec![args.trace_out.clone()];
    fs::write(&args.trace_out, trace_to_csv(&trace))?;
    if args.full_trace {
        let json = companion_json(&args.trace_out);
        save_trace_json(&json, &trace)?;
        artifacts.push(json);
    }

    let mut summary = String::new();
    if args.algorithm.is_experimental() {
        summary.push_str("experimental: convergence Unknown\n");
    }
    for w in trace.warnings.iter().filter(|w| !w.starts_with("experimental")) {
        let _ = writeln!(summary, "warning: {w}");
    }
    let last = trace.last();
    let _ = writeln!(
        summary,
        "{}: {} after {} iterations; residual_C {:.6e}, residual_Q {:.6e}",
        args.algorithm,
        trace.termination.as_str(),
        trace.iterations(),
        last.residual_c,
        last.residual_q
    );
    let _ = writeln!(summary, "wrote {}", artifacts_list(&artifacts));
    Ok(CommandResult::ok(artifacts, summary))
}

fn artifacts_list(paths: &[PathBuf]) -> String {
    paths
        .iter()
        .map(|p| p.display().to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn cmd_certify(args: &CertifyArgs) -> Result<CommandResult> {
    let mut trace = load_trace_json(&args.trace)?;
    let problem = load_problem(&args.problem)?;
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path)?;
        let cfg: SolverConfig = serde_json::from_str(&text).map_err(|e| Error::Format {
            path: format!("{}: line {}, column {}", path.display(), e.line(), e.column()),
            message: e.to_string(),
        })?;
        if cfg.algorithm != trace.algorithm {
            return Err(Error::InvalidConfig(format!(
                "configuration is for {} but the trace was produced by {}",
                cfg.algorithm, trace.algorithm
            )));
        }
        trace.config = cfg;
    }
    let outcome = certify_all(&trace, &problem)?;
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| args.trace.with_extension("cert.json"));
    fs::write(&out, serde_json::to_string_pretty(&outcome)? + "\n")?;

    let mut summary = certification_text(&outcome);
    let _ = writeln!(summary, "wrote {}", out.display());
    let exit_code = if outcome.all_required_passed() {
        EXIT_OK
    } else {
        EXIT_ERROR
    };
    Ok(CommandResult {
        exit_code,
        artifacts: vec![out],
        summary,
    })
}

fn certification_text(outcome: &CertificationOutcome) -> String {
    let mut s = String::new();
    for w in &outcome.warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    for r in &outcome.reports {
        let tag = if outcome.required.contains(&r.condition) {
            ""
        } else {
            " (informational)"
        };
        let _ = writeln!(s, "{r}{tag}");
    }
    for k in &outcome.skipped {
        let _ = writeln!(s, "not applicable: {k}");
    }
    let _ = writeln!(s, "convergence: {}", outcome.convergence);
    s
}

/// One parameter axis of a sweep grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridAxis {
    pub name: String,
    pub values: Vec<f64>,
}

const GRID_PARAMS: [&str; 5] = ["lambda", "rho", "tau", "tau1", "tau2"];

/// Parses `name=v1,v2;name=v3`.
pub fn parse_grid(text: &str) -> Result<Vec<GridAxis>> {
    let mut axes: Vec<GridAxis> = Vec::new();
    for part in text.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (name, values) = part
            .split_once('=')
            .ok_or_else(|| Error::InvalidConfig(format!("grid axis {part:?} is not name=values")))?;
        let name = name.trim();
        if !GRID_PARAMS.contains(&name) {
            return Err(Error::InvalidConfig(format!(
                "grid parameter {name:?} not one of {}",
                GRID_PARAMS.join(", ")
            )));
        }
        if axes.iter().any(|a| a.name == name) {
            return Err(Error::InvalidConfig(format!("grid parameter {name:?} repeated")));
        }
        let values = values
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::InvalidConfig(format!("grid value {v:?} for {name}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        axes.push(GridAxis {
            name: name.to_string(),
            values,
        });
    }
    Ok(axes)
}

/// Cartesian product of the axes, in row-major order.
fn grid_points(axes: &[GridAxis]) -> Vec<Vec<(String, f64)>> {
    let mut points = vec![Vec::new()];
    for axis in axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.values.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push((axis.name.clone(), *v));
                    q
                })
            })
            .collect();
    }
    points
}

#[derive(Debug, Clone, Serialize)]
struct SweepCell {
    cell: usize,
    algorithm: Algorithm,
    params: Vec<(String, f64)>,
    experimental: bool,
    status: String,
    iterations: Option<usize>,
    termination: Option<String>,
    residual_c: Option<f64>,
    residual_q: Option<f64>,
    certificates_passed: Option<usize>,
    certificates_total: Option<usize>,
    trace: Option<PathBuf>,
}

fn sweep_cell(
    cell: usize,
    problem: &crate::objectives::ProblemInstance,
    algorithm: Algorithm,
    params: &[(String, f64)],
    base: &ParamArgs,
    x0: &[f64],
    out_dir: &Path,
) -> SweepCell {
    let mut out = SweepCell {
        cell,
        algorithm,
        params: params.to_vec(),
        experimental: algorithm.is_experimental(),
        status: String::new(),
        iterations: None,
        termination: None,
        residual_c: None,
        residual_q: None,
        certificates_passed: None,
        certificates_total: None,
        trace: None,
    };
    let result = (|| -> Result<IterateTrace> {
        let mut cfg = SolverConfig::defaults(algorithm, problem)?;
        base.apply(&mut cfg);
        for (name, v) in params {
            match name.as_str() {
                "lambda" => cfg.lambda = *v,
                "rho" => cfg.rho = *v,
                "tau" => cfg.tau = *v,
                "tau1" => cfg.tau1 = *v,
                "tau2" => cfg.tau2 = *v,
                _ => unreachable!("grid names are validated"),
            }
        }
        let init = InitialPoint::default_for(algorithm, problem, x0.to_vec())?;
        let trace = run(problem, &cfg, &init)?;
        let path = out_dir.join(format!("cell_{cell:03}_{algorithm}.csv"));
        fs::write(&path, trace_to_csv(&trace))?;
        out.trace = Some(path);
        Ok(trace)
    })();
    match result {
        Ok(trace) => {
            let last = trace.last();
            out.status = "ok".into();
            out.iterations = Some(trace.iterations());
            out.termination = Some(trace.termination.as_str().into());
            out.residual_c = Some(last.residual_c);
            out.residual_q = Some(last.residual_q);
            if let Ok(c) = certify_all(&trace, problem) {
                out.certificates_passed = Some(c.reports.iter().filter(|r| r.passed).count());
                out.certificates_total = Some(c.reports.len());
            }
        }
        Err(e @ Error::Requirement(_)) => out.status = format!("requirement: {e}"),
        Err(e) => out.status = format!("error: {e}"),
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn opt_num<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<CommandResult> {
    let problem = load_problem(&args.problem)?;
    let axes = parse_grid(&args.grid)?;
    fs::create_dir_all(&args.out_dir)?;
    let x0 = random_x0(args.seed, &problem)?;
    let mut jobs = Vec::new();
    for &alg in &args.algorithms {
        for point in grid_points(&axes) {
            jobs.push((jobs.len(), alg, point));
        }
    }
    let cells: Vec<SweepCell> = jobs
        .par_iter()
        .map(|(i, alg, point)| sweep_cell(*i, &problem, *alg, point, &args.params, &x0, &args.out_dir))
        .collect();

    let mut table = String::from(
        "cell,algorithm,params,experimental,status,iterations,termination,residual_C,residual_Q,certificates_passed,certificates_total\n",
    );
    for c in &cells {
        let params: Vec<String> = c.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let _ = writeln!(
            table,
            "{},{},{},{},{},{},{},{},{},{},{}",
            c.cell,
            c.algorithm,
            csv_field(&params.join(";")),
            c.experimental,
            csv_field(&c.status),
            opt_num(c.iterations),
            c.termination.clone().unwrap_or_default(),
            opt_num(c.residual_c),
            opt_num(c.residual_q),
            opt_num(c.certificates_passed),
            opt_num(c.certificates_total),
        );
    }
    let summary_path = args.out_dir.join("summary.csv");
    fs::write(&summary_path, &table)?;
    let mut artifacts: Vec<PathBuf> = cells.iter().filter_map(|c| c.trace.clone()).collect();
    artifacts.push(summary_path.clone());

    let mut summary = String::new();
    for c in &cells {
        let params: Vec<String> = c.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let tag = if c.experimental { " [experimental]" } else { "" };
        let _ = write!(summary, "cell {:>3} {}{} {}: ", c.cell, c.algorithm, tag, params.join(" "));
        match (c.iterations, c.residual_c, c.residual_q) {
            (Some(it), Some(rc), Some(rq)) => {
                let _ = write!(summary, "{it} iterations, residuals {rc:.3e} / {rq:.3e}");
                if let (Some(p), Some(t)) = (c.certificates_passed, c.certificates_total) {
                    let _ = write!(summary, ", certificates {p}/{t}");
                }
                summary.push('\n');
            }
            _ => {
                let _ = writeln!(summary, "{}", c.status);
            }
        }
    }
    let _ = writeln!(summary, "wrote {} traces and {}", cells.iter().filter(|c| c.trace.is_some()).count(), summary_path.display());
    Ok(CommandResult::ok(artifacts, summary))
}

/// Residual-versus-iteration curves on a log scale.
pub fn render_svg(rows: &[crate::problems::CsvRow]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const PAD: f64 = 56.0;
    let floor = 1e-16f64;
    let log = |v: f64| v.max(floor).log10();
    let series: [(&str, &str, Vec<(f64, f64)>); 2] = [
        ("residual_C", "#1f77b4", rows.iter().map(|r| (r.k as f64, log(r.residual_c))).collect()),
        ("residual_Q", "#d62728", rows.iter().map(|r| (r.k as f64, log(r.residual_q))).collect()),
    ];
    let kmax = rows.iter().map(|r| r.k).max().unwrap_or(0).max(1) as f64;
    let all = series.iter().flat_map(|s| s.2.iter().map(|p| p.1));
    let (mut lo, mut hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        lo = -1.0;
        hi = 0.0;
    }
    lo = lo.floor();
    hi = hi.ceil().max(lo + 1.0);
    let sx = |k: f64| PAD + (W - 2.0 * PAD) * k / kmax;
    let sy = |v: f64| H - PAD - (H - 2.0 * PAD) * (v - lo) / (hi - lo);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<path d="M{x0} {y0} H{x1} M{x0} {y0} V{y1}" stroke="black" fill="none"/>"#,
        x0 = PAD,
        y0 = H - PAD,
        x1 = W - PAD,
        y1 = PAD
    );
    let mut e = lo as i64;
    while e as f64 <= hi {
        let y = sy(e as f64);
        let _ = writeln!(
            svg,
            r##"<line x1="{PAD}" y1="{y:.2}" x2="{x2}" y2="{y:.2}" stroke="#ddd"/><text x="{tx}" y="{ty:.2}" text-anchor="end">1e{e}</text>"##,
            x2 = W - PAD,
            tx = PAD - 6.0,
            ty = y + 4.0
        );
        e += 1;
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">iteration k (max {})</text>"#,
        W / 2.0,
        H - 16.0,
        kmax as usize
    );
    for (i, (name, color, pts)) in series.iter().enumerate() {
        let mut d = String::new();
        for (j, (k, v)) in pts.iter().enumerate() {
            let _ = write!(d, "{}{:.2} {:.2} ", if j == 0 { "M" } else { "L" }, sx(*k), sy(*v));
        }
        let _ = writeln!(
            svg,
            r#"<path d="{}" stroke="{color}" stroke-width="1.5" fill="none"/>"#,
            d.trim_end()
        );
        let ly = PAD + 16.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{ly}" fill="{color}" text-anchor="end">{name}</text>"#,
            W - PAD - 4.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn cmd_plot(args: &PlotArgs) -> Result<CommandResult> {
    let text = fs::read_to_string(&args.trace)?;
    let rows = parse_trace_csv(&text).map_err(|e| match e {
        Error::Format { path, message } => Error::Format {
            path: format!("{}: {path}", args.trace.display()),
            message,
        },
        other => other,
    })?;
    if rows.is_empty() {
        return Err(Error::Format {
            path: args.trace.display().to_string(),
            message: "trace has no rows".into(),
        });
    }
    fs::write(&args.out, render_svg(&rows))?;
    Ok(CommandResult::ok(
        vec![args.out.clone()],
        format!("wrote {} ({} iterations)\n", args.out.display(), rows.len() - 1),
    ))
}
