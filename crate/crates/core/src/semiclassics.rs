//! Two-term semiclassical asymptotics for Coulomb-singular potentials.
//!
//! For `V` with `|V(x) − κ|x|⁻¹| ≤ C|x|^{−θ}` near the origin,
//!
//! `Tr[−h²Δ − V]₋ ≈ −(8πh²)⁻¹ ∫([V]₊² − κ²[|x|⁻¹ − 1]₊²) + κ²(4h²)⁻¹(ln(2h²/κ) + c_H)`.
//!
//! This module evaluates the right-hand side and compares it with numerical
//! traces for a decreasing sequence of `h`.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{param, Error, Result};
use crate::grid::RadialGrid;
use crate::hydrogen::{c_h, scaled_trace};
use crate::potential::{RadialPotential, ShiftedCoulomb, TfPotential};
use crate::quadrature::GaussLegendre;
use crate::scalar::Real;
use crate::spectral::{neg_eigenvalue_sum, SpectralOptions};
use crate::tf::TfSolution;

/// A potential together with a certificate for its Coulomb singularity.
#[derive(Clone)]
pub struct SingularPotential<T: Real> {
    potential: Arc<dyn RadialPotential<T>>,
    kappa: T,
    theta: T,
    c_sing: T,
    delta: T,
}

impl<T: Real> std::fmt::Debug for SingularPotential<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SingularPotential")
            .field("kappa", &self.kappa)
            .field("theta", &self.theta)
            .field("c_sing", &self.c_sing)
            .field("delta", &self.delta)
            .finish_non_exhaustive()
    }
}

const CERTIFICATE_SAMPLES: usize = 97;

impl<T: Real> SingularPotential<T> {
    /// Checks `|r·V(r) − κ| ≤ C·r^{1−θ}` at log-spaced points of `[10⁻⁸δ, δ]`.
    pub fn new(
        potential: Arc<dyn RadialPotential<T>>,
        kappa: T,
        theta: T,
        c_sing: T,
        delta: T,
    ) -> Result<Self> {
        if !(kappa > T::zero()) || !(c_sing > T::zero()) || !(delta > T::zero()) {
            return param("kappa, C and delta must be positive");
        }
        if !(theta > T::zero() && theta < T::one()) {
            return param(format!("theta must lie in (0, 1), got {theta}"));
        }
        let out = Self {
            potential,
            kappa,
            theta,
            c_sing,
            delta,
        };
        for k in 0..CERTIFICATE_SAMPLES {
            let t = k as f64 / (CERTIFICATE_SAMPLES - 1) as f64;
            let r = delta * T::c(10f64.powf(-8.0 * t));
            let dev = (out.potential.reduced(r) - kappa).abs();
            let bound = out.deviation_bound(r);
            if !(dev <= bound) {
                return Err(Error::Certificate(format!(
                    "|r V(r) - kappa| = {dev} exceeds C r^(1-theta) = {bound} at r = {r}"
                )));
            }
        }
        Ok(out)
    }

    /// `κ/r − μ`, certified with `θ = ½`, `δ = 1`.
    pub fn shifted_coulomb(kappa: T, mu: T) -> Result<Self> {
        let c = mu.abs().max(T::tol(1e-12));
        Self::new(Arc::new(ShiftedCoulomb::new(kappa, mu)), kappa, T::c(0.5), c, T::one())
    }

    /// The TF potential of a solution, `κ = 1`, `θ = ½`, `δ = 1`.
    ///
    /// The screening potential of a density of mass `λ` obeys
    /// `φ(r) ≤ 2√(2λ)r^{−½} + 3`, so `C = 2√(2λ) + 3 + μ` works on `r ≤ 1`.
    pub fn tf(sol: &TfSolution<T>) -> Result<Self> {
        let lambda = sol.mass();
        let c = T::c(2.0) * (T::c(2.0) * lambda).sqrt() + T::c(3.0) + sol.mu;
        Self::new(Arc::new(TfPotential::new(sol)), T::one(), T::c(0.5), c, T::one())
    }

    pub fn potential(&self) -> &Arc<dyn RadialPotential<T>> {
        &self.potential
    }

    pub fn kappa(&self) -> T {
        self.kappa
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn c_sing(&self) -> T {
        self.c_sing
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    fn deviation_bound(&self, r: T) -> T {
        self.c_sing * r.powf(T::one() - self.theta) * (T::one() + T::tol(1e-9)) + T::tol(1e-13)
    }

    /// `[V]₊² − κ²[1/r − 1]₊²` at `r`.
    fn weyl_integrand(&self, r: T) -> T {
        let p = self.potential.reduced(r).pos();
        let c = (self.kappa - self.kappa * r).pos();
        (p - c) * (p + c) / (r * r)
    }
}

/// `∫_{ℝ²}([V]₊² − κ²[|x|⁻¹ − 1]₊²) dx`.
///
/// The difference is integrated pointwise, panel by panel on `grid`, with
/// extra breaks at `|x| = 1` and wherever `V` changes sign between nodes.
/// The disk inside `r_min` and any positive part of `V` beyond `r_max` are
/// added with geometric Gauss cells.
pub fn weyl_integral<T: Real>(v: &SingularPotential<T>, grid: &RadialGrid<T>) -> Result<T> {
    check_cancellation(v, grid.r_min())?;
    let nodes = grid.nodes();
    let mut breaks = vec![T::one()];
    let u: Vec<T> = nodes.iter().map(|r| v.potential.reduced(*r)).collect();
    for i in 0..nodes.len() - 1 {
        if (u[i] > T::zero()) != (u[i + 1] > T::zero()) {
            breaks.push(sign_change(v.potential.as_ref(), nodes[i], nodes[i + 1]));
        }
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).expect("finite breaks"));
    let body = grid.integrate_fn(T::zero(), T::infinity(), &breaks, |s| v.weyl_integrand(s));
    if !body.is_finite() {
        return Err(Error::Numeric("weyl integral is not finite".into()));
    }
    let tau = T::c(2.0) * T::PI();
    let gl = GaussLegendre::<T>::new(10);
    let radial = |s: T| tau * s * v.weyl_integrand(s);
    let mut core = T::zero();
    let mut hi = grid.r_min();
    for _ in 0..16 {
        let lo = hi * T::c(0.1);
        core = core + gl.integrate(lo, hi, radial);
        hi = lo;
    }
    let mut tail = T::zero();
    let mut lo = grid.r_max();
    if v.potential.reduced(lo) > T::zero() {
        for _ in 0..8 {
            let hi = lo * T::c(10.0);
            tail = tail + gl.integrate(lo, hi, radial);
            lo = hi;
        }
    }
    Ok(body + core + tail)
}

fn sign_change<T: Real>(v: &dyn RadialPotential<T>, mut a: T, mut b: T) -> T {
    let pos_a = v.reduced(a) > T::zero();
    for _ in 0..100 {
        let mid = (a + b) * T::c(0.5);
        if mid <= a || mid >= b {
            break;
        }
        if (v.reduced(mid) > T::zero()) == pos_a {
            a = mid;
        } else {
            b = mid;
        }
    }
    (a + b) * T::c(0.5)
}

/// The `1/r²` parts of the Weyl integrand must cancel near the origin: with
/// the certificate, `r²|f(r)| ≤ C r^{1−θ}(2κ + C r^{1−θ})`.
fn check_cancellation<T: Real>(v: &SingularPotential<T>, r_min: T) -> Result<()> {
    let start = v.delta.min(r_min);
    for k in 0..=8 {
        let r = start * T::c(10f64.powi(-k));
        let lhs = (v.weyl_integrand(r) * r * r).abs();
        let dev = v.deviation_bound(r);
        let bound = dev * (T::c(2.0) * v.kappa + dev);
        if !(lhs <= bound) {
            return Err(Error::Certificate(format!(
                "weyl integrand does not cancel at r = {r}: r^2 |f| = {lhs} > {bound}"
            )));
        }
    }
    Ok(())
}

/// `−(8πh²)⁻¹·weyl + κ²(4h²)⁻¹(ln(2h²/κ) + c_H)`.
pub fn two_term_formula<T: Real>(kappa: T, weyl: T, h: T) -> T {
    let h2 = h * h;
    -weyl / (T::c(8.0) * T::PI() * h2)
        + kappa * kappa / (T::c(4.0) * h2) * ((T::c(2.0) * h2 / kappa).ln() + c_h())
}

#[derive(Clone, Debug, Serialize)]
pub struct SemiclassicsReport<T: Real> {
    pub h: T,
    pub numeric_trace: T,
    pub formula_value: T,
    pub residual: T,
    pub scaled_residual: T,
}

/// Where the traces come from.
#[derive(Clone, Debug)]
pub enum TraceSource<T> {
    /// Numerical eigenvalue sums.
    Spectral(SpectralOptions<T>),
    /// Closed-form hydrogen traces; valid only for `V = κ/r − μ`.
    ExactCoulomb { mu: T },
}

/// Reports for every `h` together with the trend verdicts.
#[derive(Clone, Debug, Serialize)]
pub struct SemiclassicsRun<T: Real> {
    pub kappa: T,
    pub weyl_integral: T,
    pub reports: Vec<SemiclassicsReport<T>>,
    /// Discretization error of each numerical trace (zero for exact traces).
    pub trace_errors: Vec<T>,
    /// `|h²Δ|` never grows by more than 10% from one `h` to the next.
    pub decreasing_weak: bool,
    /// `|h²Δ|` shrinks strictly from one `h` to the next.
    pub decreasing_strict: bool,
}

pub fn verify_semiclassics<T: Real>(
    v: &SingularPotential<T>,
    grid: &RadialGrid<T>,
    h_values: &[T],
    source: &TraceSource<T>,
) -> Result<SemiclassicsRun<T>> {
    check_h_values(h_values)?;
    let weyl = weyl_integral(v, grid)?;
    let traces: Vec<(T, T)> = h_values
        .par_iter()
        .map(|&h| match source {
            TraceSource::Spectral(opts) => {
                let r = neg_eigenvalue_sum(v.potential.as_ref(), h, opts)?;
                Ok((r.sum, r.error_estimate))
            }
            TraceSource::ExactCoulomb { mu } => Ok((scaled_trace(h, v.kappa, *mu)?, T::zero())),
        })
        .collect::<Result<_>>()?;
    let reports: Vec<SemiclassicsReport<T>> = h_values
        .iter()
        .zip(&traces)
        .map(|(&h, &(numeric, _))| {
            let formula = two_term_formula(v.kappa, weyl, h);
            let residual = numeric - formula;
            SemiclassicsReport {
                h,
                numeric_trace: numeric,
                formula_value: formula,
                residual,
                scaled_residual: h * h * residual,
            }
        })
        .collect();
    let scaled: Vec<T> = reports.iter().map(|r| r.scaled_residual.abs()).collect();
    Ok(SemiclassicsRun {
        kappa: v.kappa,
        weyl_integral: weyl,
        decreasing_weak: scaled.windows(2).all(|w| w[1] <= w[0] * T::c(1.1)),
        decreasing_strict: scaled.windows(2).all(|w| w[1] < w[0]),
        trace_errors: traces.into_iter().map(|t| t.1).collect(),
        reports,
    })
}

pub fn check_h_values<T: Real>(h_values: &[T]) -> Result<()> {
    if h_values.is_empty() {
        return param("no h values given");
    }
    if h_values.iter().any(|h| !(*h > T::zero())) {
        return param("h values must be positive");
    }
    if h_values.windows(2).any(|w| !(w[1] < w[0])) {
        return param("h values must be strictly descending");
    }
    Ok(())
}
