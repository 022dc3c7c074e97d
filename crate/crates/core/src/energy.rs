//! Large-`Z` energy asymptotics and the extensivity constant of the neutral atom.

use serde::Serialize;

use crate::error::{param, Error, Result};
use crate::hydrogen::c_h;
use crate::scalar::Real;
use crate::tf::TfSolution;

/// Nuclear charge `Z` and electron number `N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AtomSpec<T: Real> {
    #[serde(rename = "Z")]
    pub z: T,
    #[serde(rename = "N")]
    pub n: T,
}

impl<T: Real> AtomSpec<T> {
    pub fn new(z: T, n: T) -> Result<Self> {
        if !(z > T::zero()) || !z.is_finite() {
            return param(format!("Z must be positive, got {z}"));
        }
        if !(n > T::zero()) || !n.is_finite() {
            return param(format!("N must be positive, got {n}"));
        }
        Ok(Self { z, n })
    }

    /// `N/Z`.
    pub fn lambda(&self) -> T {
        self.n / self.z
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct EnergyTerms<T: Real> {
    pub leading: T,
    pub second: T,
}

/// Two-term asymptote `−½Z² ln Z + (E^TF + ½c_H)Z²`; the `o(Z²)`
/// remainder is not modeled.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct EnergyPrediction<T: Real> {
    #[serde(rename = "Z")]
    pub z: T,
    #[serde(rename = "N")]
    pub n: T,
    pub lambda: T,
    #[serde(rename = "E_predicted")]
    pub e_predicted: T,
    pub terms: EnergyTerms<T>,
}

/// `tf_energy` must be `E^TF(min{λ, 1})`.
pub fn predict_energy<T: Real>(spec: &AtomSpec<T>, tf_energy: T) -> EnergyPrediction<T> {
    let z2 = spec.z * spec.z;
    let leading = -T::c(0.5) * z2 * spec.z.ln();
    let second = (tf_energy + T::c(0.5) * c_h::<T>()) * z2;
    EnergyPrediction {
        z: spec.z,
        n: spec.n,
        lambda: spec.lambda(),
        e_predicted: leading + second,
        terms: EnergyTerms { leading, second },
    }
}

/// One row of the radius-growth table.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ExtensivityRow<T: Real> {
    #[serde(rename = "R")]
    pub r: T,
    /// `∫_{|x|≥2R} ρ² dx`.
    pub tail_integral: T,
    /// `πR` times the tail integral.
    pub c_r: T,
}

fn extensivity_row<T: Real>(sol: &TfSolution<T>, r: T) -> Result<ExtensivityRow<T>> {
    if sol.lambda < T::one() {
        return Err(Error::Precondition(format!(
            "extensivity concerns the neutral atom; this solution has lambda = {} and compact support",
            sol.lambda
        )));
    }
    if !(r > T::zero()) {
        return param(format!("R must be positive, got {r}"));
    }
    let grid = sol.grid();
    if T::c(2.0) * r >= grid.r_max() * T::c(0.5) {
        return Err(Error::Domain(format!(
            "2R = {} is not below half the truncation radius {}",
            T::c(2.0) * r,
            grid.r_max()
        )));
    }
    let values = sol.density.values();
    let tail = grid.integrate_fn(T::c(2.0) * r, T::infinity(), &[], |s| {
        let v = grid.interpolate_density(values, s).unwrap_or(T::zero());
        v * v
    });
    Ok(ExtensivityRow {
        r,
        tail_integral: tail,
        c_r: T::PI() * r * tail,
    })
}

/// `C_R = πR ∫_{|x|≥2R} ρ² dx` for the neutral density.
pub fn extensivity_constant<T: Real>(sol: &TfSolution<T>, r: T) -> Result<T> {
    Ok(extensivity_row(sol, r)?.c_r)
}

/// `C_R` for each radius in an ascending list.
pub fn predict_radius_growth<T: Real>(sol: &TfSolution<T>, radii: &[T]) -> Result<Vec<ExtensivityRow<T>>> {
    if radii.windows(2).any(|w| !(w[1] > w[0])) {
        return param("radii must be strictly ascending");
    }
    radii.iter().map(|&r| extensivity_row(sol, r)).collect()
}
