//! The verification suite: eleven numbered checks with machine-readable results.

use std::sync::{Arc, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::coulomb::{newton_kernel, upper_bound_report, ProductRule, RadialDensity};
use crate::elliptic::{complete_k, half_integral_closed_form};
use crate::error::{param, Result};
use crate::grid::{make_log_grid, RadialGrid};
use crate::hydrogen::{c_h, trace_ladder};
use crate::potential::ShiftedCoulomb;
use crate::quadrature::GaussLegendre;
use crate::semiclassics::{verify_semiclassics, SingularPotential, TraceSource};
use crate::spectral::{channel_spectra, SpectralOptions};
use crate::tf::{
    check_neutral_tail, energy_identity, tf_energy_curve, EnergyCurve, TfOptions, TfSolution,
    TfSolver, DEFAULT_NODES, DEFAULT_R_MAX, DEFAULT_R_MIN,
};
use crate::energy::predict_radius_growth;

pub const CRITERIA: [(u8, &str); 11] = [
    (1, "hydrogen_constant"),
    (2, "hydrogen_semiclassics"),
    (3, "spectral_oracle"),
    (4, "elliptic"),
    (5, "tf_solve"),
    (6, "energy_identity"),
    (7, "neutral_tail"),
    (8, "coulomb_bounds"),
    (9, "semiclassics_trend"),
    (10, "extensivity"),
    (11, "determinism"),
];

#[derive(Clone, Debug, Serialize)]
pub struct VerifyConfig {
    pub seed: u64,
    pub grid_nodes: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub h_values: Vec<f64>,
    pub random_densities: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            grid_nodes: DEFAULT_NODES,
            r_min: DEFAULT_R_MIN,
            r_max: DEFAULT_R_MAX,
            h_values: vec![0.2, 0.1, 0.05],
            random_densities: 20,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub summary: String,
    pub details: Value,
}

impl CriterionResult {
    /// `criterion 5 tf_solve: PASS (...)`.
    pub fn line(&self) -> String {
        format!(
            "criterion {} {}: {} ({})",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.summary
        )
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub criteria: Vec<CriterionResult>,
    pub all_passed: bool,
}

const NEUTRAL_CURVE: [f64; 6] = [0.25, 0.5, 0.75, 1.0, 1.5, 2.0];

type CurveResult = std::result::Result<(EnergyCurve<f64>, Vec<TfSolution<f64>>), String>;

/// Shared state so the TF problem is solved once per run.
pub struct Context {
    cfg: VerifyConfig,
    solver: OnceLock<std::result::Result<TfSolver<f64>, String>>,
    curve: OnceLock<CurveResult>,
}

impl Context {
    pub fn new(cfg: VerifyConfig) -> Self {
        Self {
            cfg,
            solver: OnceLock::new(),
            curve: OnceLock::new(),
        }
    }

    pub fn config(&self) -> &VerifyConfig {
        &self.cfg
    }

    fn solver(&self) -> std::result::Result<&TfSolver<f64>, String> {
        self.solver
            .get_or_init(|| {
                make_log_grid(self.cfg.grid_nodes, self.cfg.r_min, self.cfg.r_max)
                    .map(|g| TfSolver::new(Arc::new(g)))
                    .map_err(|e| e.to_string())
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    fn curve(&self) -> std::result::Result<&(EnergyCurve<f64>, Vec<TfSolution<f64>>), String> {
        self.curve
            .get_or_init(|| {
                let solver = self.solver()?;
                tf_energy_curve(&NEUTRAL_CURVE, solver, &TfOptions::default()).map_err(|e| e.to_string())
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    fn solution(&self, lambda: f64) -> std::result::Result<&TfSolution<f64>, String> {
        let (_, sols) = self.curve()?;
        sols.iter()
            .find(|s| s.lambda == lambda)
            .ok_or_else(|| format!("no solution for lambda = {lambda}"))
    }
}

fn result(id: u8, passed: bool, summary: String, details: Value) -> CriterionResult {
    let name = CRITERIA[(id - 1) as usize].1;
    CriterionResult {
        id,
        name,
        passed,
        summary,
        details,
    }
}

fn failed(id: u8, err: impl std::fmt::Display) -> CriterionResult {
    result(id, false, format!("error: {err}"), Value::Null)
}

/// Runs one criterion (1 to 10) against a shared context.
pub fn run_criterion(id: u8, ctx: &Context) -> CriterionResult {
    let out = match id {
        1 => Ok(hydrogen_constant()),
        2 => hydrogen_semiclassics().map_err(|e| e.to_string()),
        3 => spectral_oracle().map_err(|e| e.to_string()),
        4 => elliptic(ctx.cfg.seed).map_err(|e| e.to_string()),
        5 => tf_solve(ctx),
        6 => identity(ctx),
        7 => neutral_tail(ctx),
        8 => coulomb_bounds(ctx),
        9 => semiclassics_trend(ctx),
        10 => extensivity(ctx),
        _ => return failed(id.max(1).min(11), format!("criterion {id} cannot run on its own")),
    };
    out.unwrap_or_else(|e| failed(id, e))
}

/// Runs the selected criteria in ascending order. Criterion 11 repeats all
/// other selected criteria on a fresh context and compares the serialized
/// results byte for byte.
pub fn run_selected(cfg: &VerifyConfig, ids: &[u8]) -> Result<VerifyReport> {
    let mut ids = ids.to_vec();
    ids.sort_unstable();
    ids.dedup();
    if let Some(bad) = ids.iter().find(|i| **i == 0 || **i > 11) {
        return param(format!("no criterion {bad}; valid ids are 1 to 11"));
    }
    let body: Vec<u8> = ids.iter().copied().filter(|i| *i != 11).collect();
    let first = run_pass(cfg, &body);
    let mut criteria = first.clone();
    if ids.contains(&11) {
        let second = run_pass(cfg, &body);
        let a = serde_json::to_vec(&first)?;
        let b = serde_json::to_vec(&second)?;
        let same = a == b;
        criteria.push(result(
            11,
            same,
            format!("{} criteria repeated, {} bytes, identical: {same}", body.len(), a.len()),
            json!({ "bytes": a.len(), "identical": same }),
        ));
    }
    let all_passed = criteria.iter().all(|c| c.passed);
    Ok(VerifyReport {
        seed: cfg.seed,
        criteria,
        all_passed,
    })
}

pub fn run_all(cfg: &VerifyConfig) -> Result<VerifyReport> {
    let ids: Vec<u8> = CRITERIA.iter().map(|c| c.0).collect();
    run_selected(cfg, &ids)
}

fn run_pass(cfg: &VerifyConfig, ids: &[u8]) -> Vec<CriterionResult> {
    let ctx = Context::new(cfg.clone());
    ids.iter().map(|&id| run_criterion(id, &ctx)).collect()
}

pub fn hydrogen_constant() -> CriterionResult {
    let c: f64 = c_h();
    let rounded = (c * 1e4).round() / 1e4;
    let passed = rounded == -2.2339;
    result(1, passed, format!("c_H = {c:.10}"), json!({ "c_h": c, "rounded": rounded }))
}

pub fn hydrogen_semiclassics() -> Result<CriterionResult> {
    let ladder = trace_ladder::<f64>(&[10, 100, 1000])?;
    let d: Vec<f64> = ladder.iter().map(|p| p.difference).collect();
    let passed = d[0] <= 0.1 && d[2] <= 0.002 && d.windows(2).all(|w| w[1] < w[0]);
    Ok(result(
        2,
        passed,
        format!("differences at m = 10, 100, 1000: {:.3e}, {:.3e}, {:.3e}", d[0], d[1], d[2]),
        serde_json::to_value(&ladder)?,
    ))
}

pub fn spectral_oracle() -> Result<CriterionResult> {
    let v = ShiftedCoulomb::new(1.0, 0.0);
    let h = 0.5f64.sqrt();
    let pairs: Vec<_> = (0..=3usize)
        .into_par_iter()
        .map(|m| channel_spectra(&v, h, m, 400.0, 0.05, 0.01))
        .collect::<Result<_>>()?;
    let mut worst = 0.0f64;
    let mut rows = Vec::new();
    for (m, pair) in pairs.iter().enumerate() {
        for nr in 0..=3usize {
            let (Some(f), Some(c)) = (pair.fine.eigenvalues.get(nr), pair.coarse.eigenvalues.get(nr)) else {
                worst = f64::INFINITY;
                continue;
            };
            let e = (4.0 * f - c) / 3.0;
            let k = (nr + m) as f64 + 0.5;
            let exact = -0.5 / (k * k);
            worst = worst.max((e - exact).abs());
            rows.push(json!({ "m": m, "n_r": nr, "computed": e, "exact": exact }));
        }
    }
    Ok(result(
        3,
        worst <= 1e-5,
        format!("largest eigenvalue error {worst:.3e}"),
        json!({ "max_error": worst, "levels": rows }),
    ))
}

pub fn elliptic(seed: u64) -> Result<CriterionResult> {
    let eps = 1e-5f64;
    let asym = complete_k(1.0 - eps)? - 0.5 * eps.ln().abs();
    let target = 1.5 * std::f64::consts::LN_2;
    let asym_ok = (asym - target).abs() <= 2e-3;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gl = GaussLegendre::<f64>::new(20);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let k: f64 = rng.gen_range(0.01..0.99);
        // t = 1 − u² turns the endpoint singularity into a smooth peak at u = 0
        let f = |u: f64| 2.0 / (1.0 - k + k * u * u).sqrt();
        let mut quad = gl.integrate(0.0, 1e-12, f);
        let mut hi = 1.0;
        for _ in 0..12 {
            quad += gl.integrate(hi * 0.1, hi, f);
            hi *= 0.1;
        }
        worst = worst.max((half_integral_closed_form(k)? - quad).abs());
    }
    let passed = asym_ok && worst <= 1e-9;
    Ok(result(
        4,
        passed,
        format!(
            "K(1-1e-5) - ln term = {asym:.6} vs {target:.6}; closed form error {worst:.2e}"
        ),
        json!({ "asymptote": asym, "target": target, "closed_form_max_error": worst }),
    ))
}

pub fn tf_solve(ctx: &Context) -> std::result::Result<CriterionResult, String> {
    let (curve, sols) = ctx.curve()?;
    let mut ok = curve.decreasing && curve.convex && curve.flat_beyond_neutral;
    let mut rows = Vec::new();
    for s in sols.iter().filter(|s| s.lambda <= 1.0) {
        let mass_ok = (s.mass() - s.lambda.min(1.0)).abs() <= 1e-6;
        let res_ok = s.residual < 1e-6;
        let mu_ok = (s.mu > 0.0) == (s.lambda < 1.0);
        ok &= mass_ok && res_ok && mu_ok;
        rows.push(json!({
            "lambda": s.lambda, "mass": s.mass(), "mu": s.mu, "energy": s.energy,
            "residual": s.residual, "support_radius": s.support_radius,
        }));
    }
    Ok(result(
        5,
        ok,
        format!(
            "decreasing {}, convex {}, flat beyond 1 within {:.1e}",
            curve.decreasing, curve.convex, curve.flat_deviation
        ),
        json!({ "solutions": rows, "curve": curve }),
    ))
}

pub fn identity(ctx: &Context) -> std::result::Result<CriterionResult, String> {
    let mut ok = true;
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for lambda in [0.5, 1.0] {
        let check = energy_identity(ctx.solution(lambda)?);
        ok &= check.relative_difference <= 1e-4;
        worst = worst.max(check.relative_difference);
        rows.push(check);
    }
    Ok(result(
        6,
        ok,
        format!("largest relative difference {worst:.2e}"),
        serde_json::to_value(&rows).map_err(|e| e.to_string())?,
    ))
}

pub fn neutral_tail(ctx: &Context) -> std::result::Result<CriterionResult, String> {
    let report = check_neutral_tail(ctx.solution(1.0)?).map_err(|e| e.to_string())?;
    Ok(result(
        7,
        report.violations.is_empty(),
        format!(
            "{} nodes, {} violations, margins {:.2e} / {:.2e}",
            report.checked_nodes,
            report.violations.len(),
            report.tail_mass_margin,
            report.convexity_margin
        ),
        serde_json::to_value(&report).map_err(|e| e.to_string())?,
    ))
}

/// Random densities obeying `ρ ≥ 0`, `2πρ(r) r ≤ 1` and `∫ρ ≤ 1`.
pub fn random_admissible_density(grid: &Arc<RadialGrid<f64>>, rng: &mut ChaCha8Rng) -> Result<RadialDensity<f64>> {
    let tau = 2.0 * std::f64::consts::PI;
    let scale: f64 = 10f64.powf(rng.gen_range(-1.0..1.0));
    let power: f64 = rng.gen_range(0.0..3.0);
    let shape = rng.gen_range(0..4);
    let raw = |r: f64| -> f64 {
        let x = r / scale;
        match shape {
            0 => (-x).exp(),
            1 => x.powf(power) * (-x * x).exp(),
            2 => 1.0 / (1.0 + x).powf(3.0 + power),
            _ => f64::from(u8::from(x <= 1.0)),
        }
    };
    let base = RadialDensity::from_fn(grid.clone(), raw)?;
    let target: f64 = rng.gen_range(0.05..1.0);
    let factor = target / base.mass();
    let clipped: Vec<f64> = grid
        .nodes()
        .iter()
        .zip(base.values())
        .map(|(r, v)| (v * factor).min(1.0 / (tau * r)))
        .collect();
    RadialDensity::new(grid.clone(), clipped)
}

pub fn coulomb_bounds(ctx: &Context) -> std::result::Result<CriterionResult, String> {
    let solver = ctx.solver()?;
    let op = solver.operator();
    let grid = solver.grid().clone();
    let nodes = grid.nodes();
    let newton: Vec<Vec<f64>> = nodes
        .par_iter()
        .map_init(ProductRule::default, |rule, &r| rule.row(&grid, r, newton_kernel(r)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.cfg.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut densities: Vec<(String, RadialDensity<f64>)> = Vec::new();
    for l in [0.25, 0.5, 0.75, 1.0] {
        densities.push((format!("tf:{l}"), ctx.solution(l)?.density.clone()));
    }
    for k in 0..ctx.cfg.random_densities {
        let d = random_admissible_density(&grid, &mut rng).map_err(|e| e.to_string())?;
        densities.push((format!("random:{k}"), d));
    }
    let mut lower_violations = 0usize;
    let mut upper_violations = 0usize;
    let mut rows = Vec::new();
    for (label, rho) in &densities {
        let phi = op.apply(rho.values());
        let mut lower_slack = f64::INFINITY;
        for (i, p) in phi.iter().enumerate() {
            let lower: f64 = newton[i].iter().zip(rho.values()).map(|(a, b)| a * b).sum();
            let slack = p - lower;
            lower_slack = lower_slack.min(slack);
            if slack < 0.0 {
                lower_violations += 1;
            }
        }
        let upper = upper_bound_report(rho, &phi).map_err(|e| e.to_string())?;
        upper_violations += upper.violations.len();
        rows.push(json!({
            "density": label, "mass": rho.mass(),
            "newton_min_slack": lower_slack, "upper_min_slack": upper.min_slack,
        }));
    }
    Ok(result(
        8,
        lower_violations == 0 && upper_violations == 0,
        format!(
            "{} densities, {lower_violations} lower and {upper_violations} upper violations",
            densities.len()
        ),
        json!({ "densities": rows, "lower_violations": lower_violations, "upper_violations": upper_violations }),
    ))
}

pub fn semiclassics_trend(ctx: &Context) -> std::result::Result<CriterionResult, String> {
    let h = &ctx.cfg.h_values;
    let sol = ctx.solution(1.0)?;
    let e = |x: crate::Error| x.to_string();
    let tf = SingularPotential::tf(sol).map_err(e)?;
    let tf_run = verify_semiclassics(&tf, sol.grid(), h, &TraceSource::Spectral(SpectralOptions::default()))
        .map_err(e)?;
    let hyd = SingularPotential::shifted_coulomb(1.0, 1.0).map_err(e)?;
    let hyd_run = verify_semiclassics(&hyd, sol.grid(), h, &TraceSource::ExactCoulomb { mu: 1.0 }).map_err(e)?;
    let scaled = |run: &crate::semiclassics::SemiclassicsRun<f64>| -> Vec<String> {
        run.reports.iter().map(|r| format!("{:.3e}", r.scaled_residual.abs())).collect()
    };
    Ok(result(
        9,
        tf_run.decreasing_strict && hyd_run.decreasing_strict,
        format!(
            "TF |h^2 residual| {} (within 10%: {}), hydrogen {} (within 10%: {})",
            scaled(&tf_run).join(" > "),
            tf_run.decreasing_weak,
            scaled(&hyd_run).join(" > "),
            hyd_run.decreasing_weak
        ),
        json!({ "tf": tf_run, "hydrogen": hyd_run }),
    ))
}

pub fn extensivity(ctx: &Context) -> std::result::Result<CriterionResult, String> {
    let sol = ctx.solution(1.0)?;
    let rows = predict_radius_growth(sol, &[0.5, 1.0, 2.0, 4.0]).map_err(|e| e.to_string())?;
    let passed = rows.iter().all(|r| r.c_r > 0.0);
    let values: Vec<String> = rows.iter().map(|r| format!("{:.3e}", r.c_r)).collect();
    Ok(result(
        10,
        passed,
        format!("C_R at R = 0.5, 1, 2, 4: {}", values.join(", ")),
        serde_json::to_value(&rows).map_err(|e| e.to_string())?,
    ))
}
