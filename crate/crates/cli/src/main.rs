//! `tf2d`: command-line front end for the Thomas-Fermi and semiclassics toolkit.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, Context as _};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use tf2d_core::coulomb::{
    coulomb_energy, fmt17, nodal_newton_bound, upper_bound_report, write_density_csv, UpperBoundReport,
};
use tf2d_core::energy::{predict_energy, AtomSpec};
use tf2d_core::grid::make_log_grid;
use tf2d_core::hydrogen::{c_h, trace_ladder};
use tf2d_core::potential::{RadialPotential, TabulatedPotential};
use tf2d_core::semiclassics::{check_h_values, verify_semiclassics, SingularPotential, TraceSource};
use tf2d_core::spectral::SpectralOptions;
use tf2d_core::tf::{
    tf_energy_curve, TfOptions, TfSolution, TfSolver, DEFAULT_NODES, DEFAULT_R_MAX, DEFAULT_R_MIN,
};
use tf2d_core::verify::{run_selected, VerifyConfig, CRITERIA};
use tf2d_core::Error;

#[derive(Parser, Debug)]
#[command(name = "tf2d", version, about = "Two-dimensional Thomas-Fermi atoms and semiclassical traces")]
struct Cli {
    /// Output format for the report written to stdout.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    output: Format,
    /// Suppress progress and summary lines on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the TF problem for one mass budget.
    TfSolve(TfSolveArgs),
    /// Tabulate E^TF(lambda) and check its shape.
    TfCurve(TfCurveArgs),
    /// Compare eigenvalue sums with the two-term semiclassical formula.
    Semiclassics(SemiclassicsArgs),
    /// Exact versus asymptotic hydrogen traces.
    HydrogenCheck(HydrogenArgs),
    /// Two-term ground-state energy for charge Z and N electrons.
    EnergyPredict(EnergyArgs),
    /// Check the Coulomb potential bounds on a TF density.
    CoulombCheck(CoulombArgs),
    /// Run the numbered verification criteria.
    VerifyAll(VerifyArgs),
}

#[derive(Args, Debug, Clone)]
struct GridArgs {
    /// Number of grid nodes.
    #[arg(long, default_value_t = DEFAULT_NODES)]
    nodes: usize,
    #[arg(long, default_value_t = DEFAULT_R_MIN)]
    r_min: f64,
    /// Truncation radius.
    #[arg(long, default_value_t = DEFAULT_R_MAX)]
    r_max: f64,
    /// Bound on the TF equation residual.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = Method::Newton)]
    method: Method,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Newton,
    Mixing,
}

impl GridArgs {
    fn solver(&self) -> Result<TfSolver<f64>, Failure> {
        let grid = make_log_grid(self.nodes, self.r_min, self.r_max)?;
        Ok(TfSolver::new(Arc::new(grid)))
    }

    fn options(&self) -> TfOptions<f64> {
        let base = match self.method {
            Method::Newton => TfOptions::default(),
            Method::Mixing => TfOptions::mixing(),
        };
        TfOptions { tol: self.tol, ..base }
    }
}

#[derive(Args, Debug)]
struct TfSolveArgs {
    #[arg(long)]
    lambda: f64,
    #[command(flatten)]
    grid: GridArgs,
    /// Write r, rho, potential to this CSV file.
    #[arg(long)]
    density_csv: Option<PathBuf>,
    /// Also write the report to this file.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TfCurveArgs {
    #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,0.75,1,1.5,2")]
    lambdas: Vec<f64>,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args, Debug)]
struct SemiclassicsArgs {
    /// hydrogen-shifted, tf:<lambda> or file:<path>.
    #[arg(long)]
    potential: String,
    /// Shift of the hydrogen potential kappa/r - mu.
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    /// Coulomb strength; for file potentials part of the singularity certificate.
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    /// Descending list of semiclassical parameters.
    #[arg(long, value_delimiter = ',', default_value = "0.2,0.1,0.05")]
    h: Vec<f64>,
    /// Use the closed-form hydrogen traces instead of eigenvalue sums.
    #[arg(long)]
    exact: bool,
    /// Certificate exponent for file potentials.
    #[arg(long, default_value_t = 0.5)]
    theta: f64,
    /// Certificate constant for file potentials.
    #[arg(long, default_value_t = 1.0)]
    c_sing: f64,
    /// Certificate radius for file potentials.
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    /// Coarse mesh step of the eigenvalue computation.
    #[arg(long, default_value_t = 0.01)]
    dx: f64,
    /// Dirichlet radius; chosen from the potential when omitted.
    #[arg(long)]
    radius: Option<f64>,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args, Debug)]
struct HydrogenArgs {
    /// Largest rung of the ladder mu_m = 1/(2(m+1/2)^2).
    #[arg(long, default_value_t = 1000)]
    m_max: usize,
}

#[derive(Args, Debug)]
struct EnergyArgs {
    #[arg(long = "Z")]
    z: f64,
    #[arg(long = "N")]
    n: f64,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args, Debug)]
struct CoulombArgs {
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Subset of criteria to run, e.g. 1,2,5.
    #[arg(long, value_delimiter = ',')]
    criteria: Option<Vec<u8>>,
    #[arg(long, default_value_t = DEFAULT_NODES)]
    nodes: usize,
}

/// How a command ended when it did not succeed.
enum Failure {
    /// Invalid input; exit code 2.
    Usage(String),
    /// A computation failed or a check did not hold; exit code 1.
    Run(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parameter(msg) => Failure::Usage(msg),
            other => Failure::Run(other.into()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Run(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Run(e.into())
    }
}

type CmdResult = Result<bool, Failure>;

struct Out {
    format: Format,
    quiet: bool,
}

impl Out {
    fn note(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }

    fn emit<S: Serialize>(&self, value: &S, header: &[&str], rows: Vec<Vec<String>>) -> Result<(), Failure> {
        let stdout = io::stdout();
        let mut lock = stdout.lock();
        self.write(&mut lock, value, header, rows)
    }

    fn write<S: Serialize, W: Write>(
        &self,
        w: &mut W,
        value: &S,
        header: &[&str],
        rows: Vec<Vec<String>>,
    ) -> Result<(), Failure> {
        match self.format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut *w, value).map_err(|e| anyhow!(e))?;
                writeln!(w)?;
            }
            Format::Csv => {
                let mut csv = csv::Writer::from_writer(&mut *w);
                csv.write_record(header).map_err(|e| anyhow!(e))?;
                for row in rows {
                    csv.write_record(row).map_err(|e| anyhow!(e))?;
                }
                csv.flush()?;
            }
        }
        Ok(())
    }
}

fn opt17(x: Option<f64>) -> String {
    x.map(fmt17).unwrap_or_default()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(v) = std::env::var("TF2D_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: TF2D_THREADS must be a positive integer, got {v:?}");
                return ExitCode::from(2);
            }
        }
    }
    let out = Out {
        format: cli.output,
        quiet: cli.quiet,
    };
    let result = match cli.command {
        Command::TfSolve(a) => tf_solve(&out, a),
        Command::TfCurve(a) => tf_curve(&out, a),
        Command::Semiclassics(a) => semiclassics(&out, a),
        Command::HydrogenCheck(a) => hydrogen_check(&out, a),
        Command::EnergyPredict(a) => energy_predict(&out, a),
        Command::CoulombCheck(a) => coulomb_check(&out, a),
        Command::VerifyAll(a) => verify_all(&out, a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn positive_lambda(lambda: f64) -> Result<(), Failure> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Failure::Usage(format!("--lambda must be positive, got {lambda}")))
    }
}

fn solve(out: &Out, grid: &GridArgs, lambda: f64) -> Result<TfSolution<f64>, Failure> {
    let solver = grid.solver()?;
    let sol = solver.solve(lambda, &grid.options())?;
    for w in &sol.warnings {
        out.note(format!("warning: {w}"));
    }
    Ok(sol)
}

fn tf_solve(out: &Out, a: TfSolveArgs) -> CmdResult {
    positive_lambda(a.lambda)?;
    let sol = solve(out, &a.grid, a.lambda)?;
    let s = sol.summary();
    out.note(format!(
        "lambda {} mu {} energy {} mass {} residual {:.2e}",
        s.lambda, s.mu, s.energy, s.mass, s.residual
    ));
    if let Some(path) = &a.density_csv {
        let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        write_density_csv(&sol.density, &sol.potential, BufWriter::new(f))?;
    }
    let header = ["lambda", "mu", "energy", "mass", "residual", "support_radius"];
    let rows = || {
        vec![vec![
            fmt17(s.lambda),
            fmt17(s.mu),
            fmt17(s.energy),
            fmt17(s.mass),
            fmt17(s.residual),
            opt17(s.support_radius),
        ]]
    };
    if let Some(path) = &a.report {
        write_file(out, path, &s, &header, rows())?;
    }
    out.emit(&s, &header, rows())?;
    Ok(true)
}

fn write_file<S: Serialize>(
    out: &Out,
    path: &Path,
    value: &S,
    header: &[&str],
    rows: Vec<Vec<String>>,
) -> Result<(), Failure> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(f);
    out.write(&mut w, value, header, rows)?;
    w.flush()?;
    Ok(())
}

fn tf_curve(out: &Out, a: TfCurveArgs) -> CmdResult {
    for &l in &a.lambdas {
        positive_lambda(l)?;
    }
    let solver = a.grid.solver()?;
    let (curve, _) = tf_energy_curve(&a.lambdas, &solver, &a.grid.options())?;
    out.note(format!(
        "decreasing {} convex {} flat beyond neutrality {} (deviation {:.1e})",
        curve.decreasing, curve.convex, curve.flat_beyond_neutral, curve.flat_deviation
    ));
    let rows = curve
        .points
        .iter()
        .map(|p| vec![fmt17(p.lambda), fmt17(p.energy), fmt17(p.mu), fmt17(p.mass)])
        .collect();
    out.emit(&curve, &["lambda", "energy", "mu", "mass"], rows)?;
    Ok(true)
}

fn semiclassics(out: &Out, a: SemiclassicsArgs) -> CmdResult {
    check_h_values(&a.h)?;
    let spectral = SpectralOptions {
        dx: a.dx,
        radius: a.radius,
        ..SpectralOptions::default()
    };
    let mut source = TraceSource::Spectral(spectral);
    let grid;
    let potential = if a.potential == "hydrogen-shifted" {
        if a.exact {
            source = TraceSource::ExactCoulomb { mu: a.mu };
        }
        grid = Arc::new(make_log_grid(a.grid.nodes, a.grid.r_min, a.grid.r_max)?);
        SingularPotential::shifted_coulomb(a.kappa, a.mu)?
    } else if let Some(l) = a.potential.strip_prefix("tf:") {
        let lambda: f64 = l
            .parse()
            .map_err(|_| Failure::Usage(format!("cannot read lambda from {:?}", a.potential)))?;
        positive_lambda(lambda)?;
        let sol = solve(out, &a.grid, lambda)?;
        grid = sol.grid().clone();
        SingularPotential::tf(&sol)?
    } else if let Some(path) = a.potential.strip_prefix("file:") {
        let table = TabulatedPotential::<f64>::from_path(Path::new(path))?;
        grid = Arc::new(make_log_grid(a.grid.nodes, a.grid.r_min, a.grid.r_max)?);
        let v: Arc<dyn RadialPotential<f64>> = Arc::new(table);
        SingularPotential::new(v, a.kappa, a.theta, a.c_sing, a.delta)?
    } else {
        return Err(Failure::Usage(format!(
            "unknown potential {:?}; use hydrogen-shifted, tf:<lambda> or file:<path>",
            a.potential
        )));
    };
    if a.exact && !matches!(source, TraceSource::ExactCoulomb { .. }) {
        return Err(Failure::Usage("--exact applies only to hydrogen-shifted".into()));
    }
    let run = verify_semiclassics(&potential, &grid, &a.h, &source)?;
    out.note(format!("weyl integral {}", run.weyl_integral));
    for r in &run.reports {
        out.note(format!(
            "h {:<6} numeric {:<22} formula {:<22} h^2 residual {:.4e}",
            r.h, r.numeric_trace, r.formula_value, r.scaled_residual
        ));
    }
    out.note(format!(
        "|h^2 residual| decreasing: within 10% {}, strictly {}",
        run.decreasing_weak, run.decreasing_strict
    ));
    let rows = run
        .reports
        .iter()
        .map(|r| {
            vec![
                fmt17(r.h),
                fmt17(r.numeric_trace),
                fmt17(r.formula_value),
                fmt17(r.residual),
                fmt17(r.scaled_residual),
            ]
        })
        .collect();
    out.emit(
        &run.reports,
        &["h", "numeric", "formula", "residual", "scaled_residual"],
        rows,
    )?;
    Ok(run.decreasing_weak)
}

fn hydrogen_check(out: &Out, a: HydrogenArgs) -> CmdResult {
    if a.m_max < 1 {
        return Err(Failure::Usage("--m-max must be at least 1".into()));
    }
    let mut ms: Vec<usize> = std::iter::successors(Some(1usize), |m| m.checked_mul(10))
        .take_while(|m| *m < a.m_max)
        .collect();
    ms.push(a.m_max);
    let ladder = trace_ladder::<f64>(&ms)?;
    let c: f64 = c_h();
    let rounded = (c * 1e4).round() / 1e4 == -2.2339;
    let shrinking = ladder.windows(2).all(|w| w[1].difference < w[0].difference);
    out.note(format!("c_H = {c:.12}"));
    for p in &ladder {
        out.note(format!(
            "m {:<8} exact {:<22} asymptotic {:<22} difference {:.3e}",
            p.m, p.exact, p.asymptotic, p.difference
        ));
    }
    #[derive(Serialize)]
    struct Report<'a> {
        c_h: f64,
        ladder: &'a [tf2d_core::hydrogen::LadderPoint<f64>],
    }
    let rows = ladder
        .iter()
        .map(|p| {
            vec![
                p.m.to_string(),
                fmt17(p.mu),
                fmt17(p.exact),
                fmt17(p.asymptotic),
                fmt17(p.difference),
            ]
        })
        .collect();
    out.emit(
        &Report { c_h: c, ladder: &ladder },
        &["m", "mu", "exact", "asymptotic", "difference"],
        rows,
    )?;
    Ok(rounded && shrinking)
}

fn energy_predict(out: &Out, a: EnergyArgs) -> CmdResult {
    let spec = AtomSpec::new(a.z, a.n)?;
    let sol = solve(out, &a.grid, spec.lambda().min(1.0))?;
    let p = predict_energy(&spec, sol.energy);
    out.note(format!("E^TF({}) = {}", sol.lambda, sol.energy));
    let rows = vec![vec![
        fmt17(p.z),
        fmt17(p.n),
        fmt17(p.lambda),
        fmt17(p.e_predicted),
        fmt17(p.terms.leading),
        fmt17(p.terms.second),
    ]];
    out.emit(&p, &["Z", "N", "lambda", "E_predicted", "leading", "second"], rows)?;
    Ok(true)
}

#[derive(Serialize)]
struct CoulombReport {
    lambda: f64,
    mass: f64,
    self_energy: f64,
    newton_min_slack: f64,
    newton_violations: usize,
    upper: UpperBoundReport<f64>,
}

fn coulomb_check(out: &Out, a: CoulombArgs) -> CmdResult {
    positive_lambda(a.lambda)?;
    let sol = solve(out, &a.grid, a.lambda)?;
    let rho = &sol.density;
    let newton = nodal_newton_bound(rho);
    let slack: Vec<f64> = sol.potential.iter().zip(&newton).map(|(p, n)| p - n).collect();
    let upper = upper_bound_report(rho, &sol.potential)?;
    let report = CoulombReport {
        lambda: a.lambda,
        mass: rho.mass(),
        self_energy: coulomb_energy(rho, rho)?,
        newton_min_slack: slack.iter().copied().fold(f64::INFINITY, f64::min),
        newton_violations: slack.iter().filter(|s| **s < 0.0).count(),
        upper,
    };
    let ok = report.newton_violations == 0 && report.upper.violations.is_empty();
    out.note(format!(
        "newton bound: min slack {:.3e}, {} violations; upper bound: min slack {:.3e}, {} violations",
        report.newton_min_slack,
        report.newton_violations,
        report.upper.min_slack,
        report.upper.violations.len()
    ));
    let nodes = rho.grid().nodes();
    let rows = (0..nodes.len())
        .map(|i| {
            vec![
                fmt17(nodes[i]),
                fmt17(sol.potential[i]),
                fmt17(newton[i]),
                fmt17(tf2d_core::coulomb::potential_upper_bound(rho.mass(), nodes[i])),
            ]
        })
        .collect();
    out.emit(&report, &["r", "potential", "newton_bound", "upper_bound"], rows)?;
    Ok(ok)
}

fn verify_all(out: &Out, a: VerifyArgs) -> CmdResult {
    let ids: Vec<u8> = a.criteria.unwrap_or_else(|| CRITERIA.iter().map(|c| c.0).collect());
    let cfg = VerifyConfig {
        seed: a.seed,
        grid_nodes: a.nodes,
        ..VerifyConfig::default()
    };
    let report = run_selected(&cfg, &ids)?;
    for c in &report.criteria {
        out.note(c.line());
    }
    let rows = report
        .criteria
        .iter()
        .map(|c| vec![c.id.to_string(), c.name.to_string(), c.passed.to_string(), c.summary.clone()])
        .collect();
    out.emit(&report, &["id", "name", "passed", "summary"], rows)?;
    Ok(report.all_passed)
}
