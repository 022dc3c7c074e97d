//! The two-dimensional Thomas-Fermi problem.
//!
//! Minimizes
//! `E(ρ) = ∫ πρ² − ρ/|x| + (4π)⁻¹[|x|⁻¹ − 1]₊² dx + D(ρ)` over `ρ ≥ 0`,
//! `∫ρ ≤ λ`, whose minimizer satisfies `2πρ = [|x|⁻¹ − ρ∗|x|⁻¹ − μ]₊`.
//!
//! The default solver treats the TF equation at fixed `μ` as a semismooth
//! system and applies an active-set Newton method with a backtracking line
//! search; `μ` is then located by a safeguarded regula falsi on the
//! decreasing map `μ ↦ ∫ρ_μ`. A damped fixed-point iteration is available as
//! [`TfMethod::Mixing`] for small problems.

use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use serde::Serialize;

use crate::coulomb::{CoulombOperator, ProductRule, RadialDensity};
use crate::error::{param, Error, Result};
use crate::grid::RadialGrid;
use crate::linalg::lu_solve;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TfMethod<T> {
    /// Active-set Newton at fixed `μ`, regula falsi on `μ`.
    Newton,
    /// `ρ ← (1 − t)ρ + t·RHS(ρ)` with `μ` re-bisected every step and `t`
    /// halved whenever the residual grows.
    Mixing { t: T },
}

#[derive(Clone, Debug)]
pub struct TfOptions<T> {
    pub method: TfMethod<T>,
    /// Bound on `sup |2πρ − [V]₊|`.
    pub tol: T,
    /// Bound on `|∫ρ − min(λ, 1)|` for the chemical potential search.
    pub mass_tol: T,
    /// Iteration cap of the inner solver (Newton steps or mixing steps).
    pub max_iter: usize,
    /// Cap on chemical potential updates.
    pub max_outer: usize,
}

impl<T: Real> Default for TfOptions<T> {
    fn default() -> Self {
        Self {
            method: TfMethod::Newton,
            tol: T::tol(1e-8),
            mass_tol: T::tol(1e-11),
            max_iter: 200,
            max_outer: 200,
        }
    }
}

impl<T: Real> TfOptions<T> {
    pub fn mixing() -> Self {
        Self {
            method: TfMethod::Mixing { t: T::c(0.3) },
            max_iter: 100_000,
            ..Self::default()
        }
    }
}

/// Converged minimizer with diagnostics.
#[derive(Clone, Debug)]
pub struct TfSolution<T: Real> {
    pub lambda: T,
    pub density: RadialDensity<T>,
    /// Nodal Coulomb potential `ρ∗|x|⁻¹`.
    pub potential: Vec<T>,
    pub mu: T,
    pub energy: T,
    pub residual: T,
    pub iterations: usize,
    pub support_radius: Option<T>,
    pub warnings: Vec<String>,
}

/// Result record in the shape the command line emits.
#[derive(Clone, Debug, Serialize)]
pub struct TfSummary<T: Real> {
    pub lambda: T,
    pub mu: T,
    pub energy: T,
    pub mass: T,
    pub residual: T,
    pub support_radius: Option<T>,
}

impl<T: Real> TfSolution<T> {
    pub fn summary(&self) -> TfSummary<T> {
        TfSummary {
            lambda: self.lambda,
            mu: self.mu,
            energy: self.energy,
            mass: self.density.mass(),
            residual: self.residual,
            support_radius: self.support_radius,
        }
    }

    pub fn grid(&self) -> &Arc<RadialGrid<T>> {
        self.density.grid()
    }

    pub fn mass(&self) -> T {
        self.density.mass()
    }

    /// `V(r_i) = 1/r_i − φ(r_i) − μ` at the nodes.
    pub fn nodal_tf_potential(&self) -> Vec<T> {
        self.grid()
            .nodes()
            .iter()
            .zip(&self.potential)
            .map(|(r, p)| T::one() / *r - *p - self.mu)
            .collect()
    }

    /// `D(ρ)` from the stored potential.
    pub fn coulomb_energy(&self) -> T {
        half_dot(self.grid(), self.density.values(), &self.potential)
    }
}

fn half_dot<T: Real>(grid: &RadialGrid<T>, f: &[T], phi: &[T]) -> T {
    T::c(0.5)
        * grid
            .weights()
            .iter()
            .zip(f)
            .zip(phi)
            .map(|((w, a), p)| *w * *a * *p)
            .sum::<T>()
}

/// Solver bound to one grid; the Coulomb matrix is assembled once and shared.
pub struct TfSolver<T: Real> {
    op: Arc<CoulombOperator<T>>,
    neutral: OnceLock<(Vec<T>, usize)>,
}

impl<T: Real> TfSolver<T> {
    pub fn new(grid: Arc<RadialGrid<T>>) -> Self {
        Self::with_operator(Arc::new(CoulombOperator::new(grid)))
    }

    pub fn with_operator(op: Arc<CoulombOperator<T>>) -> Self {
        Self {
            op,
            neutral: OnceLock::new(),
        }
    }

    pub fn grid(&self) -> &Arc<RadialGrid<T>> {
        self.op.grid()
    }

    pub fn operator(&self) -> &Arc<CoulombOperator<T>> {
        &self.op
    }

    /// Minimizer for mass budget `lambda`, started from `min(λ,1)·e^{−r}`.
    pub fn solve(&self, lambda: T, opts: &TfOptions<T>) -> Result<TfSolution<T>> {
        check_lambda(lambda)?;
        let init = self.exponential_start(lambda.min(T::one()));
        if opts.method == TfMethod::Newton {
            return self.newton(lambda, init, opts, true);
        }
        self.mixing(lambda, init, opts)
    }

    /// Minimizer started from caller-supplied nodal values.
    pub fn solve_from(&self, lambda: T, init: &[T], opts: &TfOptions<T>) -> Result<TfSolution<T>> {
        check_lambda(lambda)?;
        self.grid().check_values(init)?;
        let init: Vec<T> = init.iter().map(|v| v.max(T::zero())).collect();
        match opts.method {
            TfMethod::Newton => self.newton(lambda, init, opts, false),
            TfMethod::Mixing { .. } => self.mixing(lambda, init, opts),
        }
    }

    fn exponential_start(&self, mass: T) -> Vec<T> {
        let grid = self.grid();
        let raw: Vec<T> = grid.nodes().iter().map(|r| (-*r).exp()).collect();
        let total: T = grid.weights().iter().zip(&raw).map(|(w, v)| *w * *v).sum();
        raw.into_iter().map(|v| v * mass / total).collect()
    }

    fn newton(&self, lambda: T, init: Vec<T>, opts: &TfOptions<T>, cache: bool) -> Result<TfSolution<T>> {
        let target = lambda.min(T::one());
        let (rho0, it0) = if cache {
            let hit = self.neutral.get().cloned();
            match hit {
                Some(v) => v,
                None => {
                    let v = self.newton_fixed_mu(T::zero(), init, opts)?;
                    let _ = self.neutral.set(v.clone());
                    v
                }
            }
        } else {
            self.newton_fixed_mu(T::zero(), init, opts)?
        };
        let mass0 = self.mass_of(&rho0);
        let mut iterations = it0;
        if lambda >= T::one() || mass0 <= target {
            return self.finish(lambda, rho0, T::zero(), iterations);
        }

        // bracket: mass(lo) > target > mass(hi)
        let (mut lo, mut f_lo, mut rho_lo) = (T::zero(), mass0 - target, rho0);
        let mut hi = T::one();
        let mut f_hi;
        let rho_hi;
        loop {
            let (rho, it) = self.newton_fixed_mu(hi, rho_lo.clone(), opts)?;
            iterations += it;
            let f = self.mass_of(&rho) - target;
            if f <= T::zero() {
                f_hi = f;
                rho_hi = rho;
                break;
            }
            lo = hi;
            f_lo = f;
            rho_lo = rho;
            hi = hi * T::c(2.0);
            if hi > T::c(1e12) {
                return Err(Error::Convergence {
                    iterations,
                    residual: f.as_f64(),
                    detail: "could not bracket the chemical potential".into(),
                });
            }
        }
        if f_hi.abs() <= opts.mass_tol {
            return self.finish(lambda, rho_hi, hi, iterations);
        }
        let mut side = 0i8;
        for _ in 0..opts.max_outer {
            let mu = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
            let mu = if mu > lo && mu < hi {
                mu
            } else {
                (lo + hi) * T::c(0.5)
            };
            let (rho, it) = self.newton_fixed_mu(mu, rho_lo.clone(), opts)?;
            iterations += it;
            let f = self.mass_of(&rho) - target;
            if f.abs() <= opts.mass_tol || (hi - lo) <= T::epsilon() * T::c(4.0) * hi {
                return self.finish(lambda, rho, mu, iterations);
            }
            if f > T::zero() {
                lo = mu;
                f_lo = f;
                rho_lo = rho;
                if side == 1 {
                    f_hi = f_hi * T::c(0.5);
                }
                side = 1;
            } else {
                hi = mu;
                f_hi = f;
                if side == -1 {
                    f_lo = f_lo * T::c(0.5);
                }
                side = -1;
            }
        }
        Err(Error::Convergence {
            iterations,
            residual: (f_lo.abs().min(f_hi.abs())).as_f64(),
            detail: "chemical potential search exhausted".into(),
        })
    }

    fn mass_of(&self, rho: &[T]) -> T {
        self.grid()
            .weights()
            .iter()
            .zip(rho)
            .map(|(w, v)| *w * *v)
            .sum()
    }

    /// Residual `r_i·(2πρ_i − [1/r_i − φ_i − μ]₊)`, scaled so every node counts alike.
    fn scaled_residual(&self, rho: &[T], phi: &[T], mu: T) -> Vec<T> {
        let tau = T::c(2.0) * T::PI();
        self.grid()
            .nodes()
            .iter()
            .zip(rho)
            .zip(phi)
            .map(|((r, v), p)| *r * tau * *v - (T::one() - *r * (*p + mu)).pos())
            .collect()
    }

    fn newton_fixed_mu(&self, mu: T, mut rho: Vec<T>, opts: &TfOptions<T>) -> Result<(Vec<T>, usize)> {
        let n = self.op.len();
        let nodes = self.grid().nodes();
        let tau = T::c(2.0) * T::PI();
        let norm = |v: &[T]| v.iter().map(|x| *x * *x).sum::<T>().sqrt();
        let sup = |v: &[T]| v.iter().fold(T::zero(), |m, x| m.max(x.abs()));
        let scaled_tol = T::tol(1e-14);

        let mut phi = self.op.apply(&rho);
        let mut res = self.scaled_residual(&rho, &phi, mu);
        let mut merit = norm(&res);
        let mut prev_active: Vec<usize> = Vec::new();
        for iter in 0..opts.max_iter {
            let active: Vec<usize> = (0..n)
                .filter(|&i| T::one() - nodes[i] * (phi[i] + mu) > T::zero())
                .collect();
            if sup(&res) <= scaled_tol || (active == prev_active && self.abs_residual(&rho, &phi, mu) <= opts.tol * T::c(1e-3)) {
                return Ok((rho, iter));
            }
            // rows scaled by r_i, unknowns z_j = r_j ρ_j
            let m = active.len();
            let mut a = vec![T::zero(); m * m];
            let mut b = vec![T::zero(); m];
            a.par_chunks_mut(m.max(1)).enumerate().for_each(|(p, row)| {
                let i = active[p];
                let ri = nodes[i];
                let mrow = self.op.row(i);
                for (q, &j) in active.iter().enumerate() {
                    row[q] = ri * mrow[j] / nodes[j];
                }
                row[p] = row[p] + tau;
            });
            for (p, &i) in active.iter().enumerate() {
                b[p] = T::one() - mu * nodes[i];
            }
            if m > 0 {
                lu_solve(&mut a, m, &mut b)?;
            }
            let mut target = vec![T::zero(); n];
            for (p, &i) in active.iter().enumerate() {
                target[i] = b[p] / nodes[i];
            }

            let mut t = T::one();
            let mut accepted = false;
            for _ in 0..40 {
                let trial: Vec<T> = rho
                    .iter()
                    .zip(&target)
                    .map(|(x, y)| (*x + t * (*y - *x)).max(T::zero()))
                    .collect();
                let trial_phi = self.op.apply(&trial);
                let trial_res = self.scaled_residual(&trial, &trial_phi, mu);
                let trial_merit = norm(&trial_res);
                if trial_merit < merit * (T::one() - T::c(1e-4) * t) || trial_merit <= scaled_tol {
                    rho = trial;
                    phi = trial_phi;
                    res = trial_res;
                    merit = trial_merit;
                    accepted = true;
                    break;
                }
                t = t * T::c(0.5);
            }
            if !accepted {
                let abs = self.abs_residual(&rho, &phi, mu);
                if abs <= opts.tol {
                    return Ok((rho, iter));
                }
                return Err(Error::Convergence {
                    iterations: iter,
                    residual: abs.as_f64(),
                    detail: format!("line search stalled at mu = {mu}"),
                });
            }
            prev_active = active;
        }
        let abs = self.abs_residual(&rho, &phi, mu);
        if abs <= opts.tol {
            return Ok((rho, opts.max_iter));
        }
        Err(Error::Convergence {
            iterations: opts.max_iter,
            residual: abs.as_f64(),
            detail: format!("Newton iteration cap reached at mu = {mu}"),
        })
    }

    fn abs_residual(&self, rho: &[T], phi: &[T], mu: T) -> T {
        tf_residual(self.grid(), rho, phi, mu)
    }

    fn mixing(&self, lambda: T, init: Vec<T>, opts: &TfOptions<T>) -> Result<TfSolution<T>> {
        let TfMethod::Mixing { t: t0 } = opts.method else {
            unreachable!("mixing called with another method")
        };
        let grid = self.grid().clone();
        let nodes = grid.nodes();
        let tau = T::c(2.0) * T::PI();
        let target = lambda.min(T::one());
        let mut rho = init;
        let mut t = t0;
        let mut prev = T::infinity();
        let mut mu = T::zero();
        for iter in 0..opts.max_iter {
            let phi = self.op.apply(&rho);
            let v: Vec<T> = nodes.iter().zip(&phi).map(|(r, p)| T::one() / *r - *p).collect();
            let rhs_mass = |mu: T| -> T {
                grid.weights()
                    .iter()
                    .zip(&v)
                    .map(|(w, x)| *w * (*x - mu).pos())
                    .sum::<T>()
                    / tau
            };
            mu = T::zero();
            if lambda < T::one() && rhs_mass(T::zero()) > target {
                let (mut lo, mut hi) = (T::zero(), T::one());
                while rhs_mass(hi) > target {
                    lo = hi;
                    hi = hi * T::c(2.0);
                }
                for _ in 0..200 {
                    let mid = (lo + hi) * T::c(0.5);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if rhs_mass(mid) > target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                mu = (lo + hi) * T::c(0.5);
            }
            let rhs: Vec<T> = v.iter().map(|x| (*x - mu).pos() / tau).collect();
            let residual = rho
                .iter()
                .zip(&rhs)
                .fold(T::zero(), |m, (a, b)| m.max(tau * (*a - *b).abs()));
            if residual <= opts.tol * T::c(1e-2) {
                return self.finish(lambda, rhs, mu, iter);
            }
            if residual > prev {
                t = t * T::c(0.5);
                if t < T::c(1e-8) {
                    break;
                }
            }
            prev = residual;
            rho = rho
                .iter()
                .zip(&rhs)
                .map(|(a, b)| (T::one() - t) * *a + t * *b)
                .collect();
        }
        Err(Error::Convergence {
            iterations: opts.max_iter,
            residual: prev.as_f64(),
            detail: format!("damped iteration did not settle (mu = {mu}, mixing {t})"),
        })
    }

    fn finish(&self, lambda: T, rho: Vec<T>, mu: T, iterations: usize) -> Result<TfSolution<T>> {
        let grid = self.grid().clone();
        let density = RadialDensity::new(grid.clone(), rho)?;
        let potential = self.op.apply(density.values());
        let residual = tf_residual(&grid, density.values(), &potential, mu);
        let energy = regrouped_energy(&density, &potential);
        let n = grid.len();
        let last_positive = density.values().iter().rposition(|v| *v > T::zero());
        let support_radius = match last_positive {
            Some(i) if i + 1 < n => Some(grid.nodes()[i + 1]),
            Some(_) => None,
            None => Some(T::zero()),
        };
        let mut warnings = Vec::new();
        if let Some(s) = support_radius {
            if s * T::c(2.0) > grid.r_max() {
                warnings.push(format!(
                    "support radius {s} exceeds half the truncation radius {}",
                    grid.r_max()
                ));
            }
        } else if lambda < T::one() {
            warnings.push("density is positive up to the truncation radius".into());
        }
        let shortfall = lambda.min(T::one()) - density.mass();
        if shortfall > T::c(1e-6) {
            warnings.push(format!(
                "mass {} falls short of {} by {shortfall}; the tail beyond r_max = {} is cut off",
                density.mass(),
                lambda.min(T::one()),
                grid.r_max()
            ));
        }
        Ok(TfSolution {
            lambda,
            density,
            potential,
            mu,
            energy,
            residual,
            iterations,
            support_radius,
            warnings,
        })
    }

    /// Regrouped functional of nodal values, reusing the assembled operator.
    pub fn functional(&self, values: &[T]) -> Result<T> {
        let density = RadialDensity::new(self.grid().clone(), values.to_vec())?;
        let phi = self.op.apply(density.values());
        Ok(regrouped_energy(&density, &phi))
    }
}

fn check_lambda<T: Real>(lambda: T) -> Result<()> {
    if !(lambda > T::zero()) || !lambda.is_finite() {
        return param(format!("lambda must be positive, got {lambda}"));
    }
    Ok(())
}

/// `sup_i |2πρ_i − [1/r_i − φ_i − μ]₊|`.
pub fn tf_residual<T: Real>(grid: &RadialGrid<T>, rho: &[T], phi: &[T], mu: T) -> T {
    let tau = T::c(2.0) * T::PI();
    grid.nodes()
        .iter()
        .zip(rho)
        .zip(phi)
        .fold(T::zero(), |m, ((r, v), p)| {
            m.max((tau * *v - (T::one() / *r - *p - mu).pos()).abs())
        })
}

/// `∫_{|x|≤1} π(ρ − 1/(2π|x|))² + ∫_{|x|>1} (πρ² − ρ/|x|) + D(ρ) − 3/4`,
/// with the density between nodes taken from the grid interpolant and the
/// split at `|x| = 1` made exactly.
fn regrouped_energy<T: Real>(rho: &RadialDensity<T>, phi: &[T]) -> T {
    let grid = rho.grid();
    let pi = T::PI();
    let tau = T::c(2.0) * pi;
    let values = rho.values();
    let local = grid.integrate_fn(T::zero(), T::infinity(), &[T::one()], |s| {
        let v = grid.interpolate_density(values, s).unwrap_or(T::zero());
        if s <= T::one() {
            let d = v - T::one() / (tau * s);
            pi * d * d
        } else {
            pi * v * v - v / s
        }
    });
    local + half_dot(grid, values, phi) - T::c(0.75)
}

/// TF functional by the regrouped formula.
pub fn tf_functional<T: Real>(rho: &RadialDensity<T>) -> T {
    let phi = crate::coulomb::nodal_potential(rho);
    regrouped_energy(rho, &phi)
}

/// TF functional in its original form, `∫ πρ² − ρ/|x|` by the nodal rule plus
/// the counterterm `(4π)⁻¹∫[|x|⁻¹ − 1]₊²` integrated exactly over the grid range.
pub fn tf_functional_raw<T: Real>(rho: &RadialDensity<T>) -> T {
    let grid = rho.grid();
    let phi = crate::coulomb::nodal_potential(rho);
    let pi = T::PI();
    let local: T = grid
        .weights()
        .iter()
        .zip(grid.nodes())
        .zip(rho.values())
        .map(|((w, r), v)| *w * (pi * *v * *v - *v / *r))
        .sum();
    local + counterterm(grid.r_min()) + half_dot(grid, rho.values(), &phi)
}

/// `(4π)⁻¹ ∫_{|x| ≥ a} [|x|⁻¹ − 1]₊² dx` for `0 < a`.
pub fn counterterm<T: Real>(a: T) -> T {
    if a >= T::one() {
        return T::zero();
    }
    T::c(0.5) * (-a.ln() - T::c(2.0) * (T::one() - a) + (T::one() - a * a) * T::c(0.5))
}

/// `∫_{r_min ≤ |x|} ([V]₊² − [κ|x|⁻¹ − κ]₊²) dx` from nodal values of `u = r·V`.
///
/// `u` is interpolated between nodes and the kink at `|x| = 1` is a panel
/// break.
pub fn weyl_difference<T: Real>(grid: &RadialGrid<T>, u: &[T], kappa: T) -> T {
    grid.integrate_fn(T::zero(), T::infinity(), &[T::one()], |s| {
        weyl_integrand(s, grid.interpolate(u, s).unwrap_or(T::zero()), kappa)
    })
}

/// The same integrand over the disk `|x| < r_min`, where `r·V` is taken constant.
pub fn weyl_core<T: Real>(grid: &RadialGrid<T>, u: &[T], kappa: T) -> T {
    let r0 = grid.r_min();
    T::c(2.0) * T::PI() * r0 * r0 * weyl_integrand(r0, u[0], kappa)
}

fn weyl_integrand<T: Real>(s: T, us: T, kappa: T) -> T {
    let p = us.pos();
    let c = (kappa - kappa * s).pos();
    (p - c) * (p + c) / (s * s)
}

/// Both sides of `e(λ) = E^TF(λ)` on the grid, with
/// `e(λ) = −(4π)⁻¹∫([V]₊² − [|x|⁻¹−1]₊²) − μλ − D(ρ)`.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityCheck<T: Real> {
    pub lambda: T,
    pub e_lambda: T,
    pub energy: T,
    pub relative_difference: T,
}

pub fn energy_identity<T: Real>(sol: &TfSolution<T>) -> IdentityCheck<T> {
    let u: Vec<T> = sol
        .grid()
        .nodes()
        .iter()
        .zip(sol.nodal_tf_potential())
        .map(|(r, v)| *r * v)
        .collect();
    let w = weyl_difference(sol.grid(), &u, T::one());
    let e = -w / (T::c(4.0) * T::PI()) - sol.mu * sol.mass() - sol.coulomb_energy();
    IdentityCheck {
        lambda: sol.lambda,
        e_lambda: e,
        energy: sol.energy,
        relative_difference: ((e - sol.energy) / sol.energy).abs(),
    }
}

/// Grid used when none is given: 1201 nodes on `[1e−6, 1e7]`.
///
/// The neutral density decays like `0.9/r³`, so its mass outside radius `R`
/// is about `0.9/R`; the large outer radius keeps that loss below `1e−6`.
pub fn default_grid<T: Real>() -> Arc<RadialGrid<T>> {
    Arc::new(
        crate::grid::make_log_grid(DEFAULT_NODES, T::c(DEFAULT_R_MIN), T::c(DEFAULT_R_MAX))
            .expect("default grid parameters are valid"),
    )
}

pub const DEFAULT_NODES: usize = 1201;
pub const DEFAULT_R_MIN: f64 = 1e-6;
pub const DEFAULT_R_MAX: f64 = 1e7;

/// Convenience wrapper building a solver for a single solve.
pub fn tf_solve<T: Real>(lambda: T, grid: Arc<RadialGrid<T>>, opts: &TfOptions<T>) -> Result<TfSolution<T>> {
    TfSolver::new(grid).solve(lambda, opts)
}

/// `E^TF(λ)` at every requested `λ` plus the shape checks on the curve.
#[derive(Clone, Debug, Serialize)]
pub struct EnergyCurve<T: Real> {
    pub points: Vec<CurvePoint<T>>,
    pub decreasing: bool,
    pub convex: bool,
    pub flat_beyond_neutral: bool,
    pub flat_deviation: T,
}

#[derive(Clone, Debug, Serialize)]
pub struct CurvePoint<T: Real> {
    pub lambda: T,
    pub energy: T,
    pub mu: T,
    pub mass: T,
}

/// Solves every `λ` in parallel and checks monotonicity, convexity on
/// `(0, 1]` and flatness for `λ ≥ 1` (within `1e−6`).
pub fn tf_energy_curve<T: Real>(
    lambdas: &[T],
    solver: &TfSolver<T>,
    opts: &TfOptions<T>,
) -> Result<(EnergyCurve<T>, Vec<TfSolution<T>>)> {
    if lambdas.is_empty() {
        return param("no lambda values given");
    }
    if lambdas.iter().any(|l| !(*l > T::zero())) {
        return param("lambda values must be positive");
    }
    if lambdas.windows(2).any(|w| w[1] <= w[0]) {
        return param("lambda values must be strictly ascending");
    }
    // the neutral solve seeds every other one; do it first
    if lambdas.iter().any(|l| *l < T::one()) || lambdas.iter().any(|l| *l >= T::one()) {
        solver.solve(T::one(), opts)?;
    }
    let sols: Vec<TfSolution<T>> = lambdas
        .par_iter()
        .map(|&l| solver.solve(l, opts))
        .collect::<Result<_>>()?;
    let points: Vec<CurvePoint<T>> = sols
        .iter()
        .map(|s| CurvePoint {
            lambda: s.lambda,
            energy: s.energy,
            mu: s.mu,
            mass: s.mass(),
        })
        .collect();
    let unit: Vec<&CurvePoint<T>> = points.iter().filter(|p| p.lambda <= T::one()).collect();
    let decreasing = unit.windows(2).all(|w| w[1].energy < w[0].energy);
    let convex = unit.windows(3).all(|w| {
        let s1 = (w[1].energy - w[0].energy) / (w[1].lambda - w[0].lambda);
        let s2 = (w[2].energy - w[1].energy) / (w[2].lambda - w[1].lambda);
        s2 > s1
    });
    let above: Vec<&CurvePoint<T>> = points.iter().filter(|p| p.lambda >= T::one()).collect();
    let flat_deviation = above
        .iter()
        .map(|p| (p.energy - above[0].energy).abs())
        .fold(T::zero(), T::max);
    Ok((
        EnergyCurve {
            points,
            decreasing,
            convex,
            flat_beyond_neutral: flat_deviation <= T::c(1e-6),
            flat_deviation,
        },
        sols,
    ))
}

/// `g(r) = ∫_{|y|≥r} (1 − r/|y|) ρ(y) dy` by product integration.
pub fn tail_function_g<T: Real>(rho: &RadialDensity<T>, r: T) -> T {
    tail_function_with(&ProductRule::default(), rho, r)
}

fn tail_function_with<T: Real>(rule: &ProductRule<T>, rho: &RadialDensity<T>, r: T) -> T {
    let grid = rho.grid();
    if r >= grid.r_max() {
        return T::zero();
    }
    let tau = T::c(2.0) * T::PI();
    let row = rule.row(grid, r, |s, _| if s > r { tau * (T::one() - r / s) } else { T::zero() });
    row.iter().zip(rho.values()).map(|(c, v)| *c * *v).sum()
}

/// `∫_{|y|≥r} ρ(y) dy`.
pub fn tail_mass<T: Real>(rho: &RadialDensity<T>, r: T) -> T {
    tail_mass_with(&ProductRule::default(), rho, r)
}

fn tail_mass_with<T: Real>(rule: &ProductRule<T>, rho: &RadialDensity<T>, r: T) -> T {
    let grid = rho.grid();
    if r >= grid.r_max() {
        return T::zero();
    }
    let tau = T::c(2.0) * T::PI();
    let row = rule.row(grid, r, |s, _| if s > r { tau } else { T::zero() });
    row.iter().zip(rho.values()).map(|(c, v)| *c * *v).sum()
}

#[derive(Clone, Debug, Serialize)]
pub struct TailViolation<T: Real> {
    pub r: T,
    pub check: &'static str,
    pub lhs: T,
    pub rhs: T,
}

/// Lower bounds on the tail of the neutral density.
///
/// The mass missing from the truncated grid (`1 − ∫ρ`) lies beyond `r_max`;
/// it is added to the tail mass and to `g` as if it sat at `r_max`, which
/// is the smallest contribution it can make.
#[derive(Clone, Debug, Serialize)]
pub struct NeutralTailReport<T: Real> {
    pub cutoff: T,
    pub checked_nodes: usize,
    pub untracked_mass: T,
    pub tail_mass_at_one: T,
    /// `min (∫_{|x|≥r}ρ − e^{−2√r})`
    pub tail_mass_margin: T,
    /// `min (g(r) − e^{−2√r})`
    pub g_margin: T,
    /// `min (g(r) − 2πρ(r) r)`
    pub convexity_margin: T,
    pub violations: Vec<TailViolation<T>>,
}

pub fn check_neutral_tail<T: Real>(sol: &TfSolution<T>) -> Result<NeutralTailReport<T>> {
    if sol.lambda < T::one() {
        return param(format!(
            "tail bounds concern the neutral atom, got lambda = {}",
            sol.lambda
        ));
    }
    let rho = &sol.density;
    let grid = rho.grid();
    let cutoff = grid.r_max() * T::c(0.5);
    let missing = (T::one() - rho.mass()).max(T::zero());
    let tau = T::c(2.0) * T::PI();
    let idx: Vec<usize> = (0..grid.len()).filter(|&i| grid.nodes()[i] <= cutoff).collect();
    let rows: Vec<(T, T, T, T)> = idx
        .par_iter()
        .map_init(ProductRule::default, |rule, &i| {
            let r = grid.nodes()[i];
            let q = tail_mass_with(rule, rho, r) + missing;
            let g = tail_function_with(rule, rho, r) + missing * (T::one() - r / grid.r_max());
            (r, q, g, tau * rho.values()[i] * r)
        })
        .collect();
    let mut report = NeutralTailReport {
        cutoff,
        checked_nodes: rows.len(),
        untracked_mass: missing,
        tail_mass_at_one: tail_mass(rho, T::one()) + missing,
        tail_mass_margin: T::infinity(),
        g_margin: T::infinity(),
        convexity_margin: T::infinity(),
        violations: Vec::new(),
    };
    for (r, q, g, rg2) in rows {
        let e = (-T::c(2.0) * r.sqrt()).exp();
        report.tail_mass_margin = report.tail_mass_margin.min(q - e);
        report.g_margin = report.g_margin.min(g - e);
        report.convexity_margin = report.convexity_margin.min(g - rg2);
        for (check, lhs, rhs) in [("tail_mass", q, e), ("g", g, e), ("r_g2", g, rg2)] {
            if lhs < rhs {
                report.violations.push(TailViolation { r, check, lhs, rhs });
            }
        }
    }
    Ok(report)
}

/// `V(r) = 1/r − (ρ∗|x|⁻¹)(r) − μ` anywhere on `(0, ∞)`.
///
/// Between nodes `r·V` is interpolated; inside `r_min` the potential is held at
/// its value at `r_min`; beyond `r_max` it decays like a monopole.
pub fn tf_potential<T: Real>(sol: &TfSolution<T>, r: T) -> T {
    let grid = sol.grid();
    let nodes = grid.nodes();
    let n = nodes.len();
    if r < grid.r_min() {
        return (T::one() - r * sol.potential[0]) / r - sol.mu;
    }
    if r > grid.r_max() {
        return (T::one() - sol.potential[n - 1] * nodes[n - 1]) / r - sol.mu;
    }
    let u: Vec<T> = nodes
        .iter()
        .zip(&sol.potential)
        .map(|(x, p)| T::one() - *x * (*p + sol.mu))
        .collect();
    grid.interpolate(&u, r).unwrap_or(T::zero()) / r
}
