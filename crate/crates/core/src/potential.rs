//! Radial potentials `V(|x|)` on the plane.
//!
//! Potentials are described through the reduced form `u(r) = r·V(r)`, which
//! stays bounded at the origin for Coulomb-type singularities and is what
//! every consumer actually interpolates or integrates.

use std::io::Read;
use std::sync::Arc;

use crate::error::{param, Error, Result};
use crate::grid::RadialGrid;
use crate::scalar::Real;
use crate::tf::TfSolution;

pub trait RadialPotential<T: Real>: Send + Sync {
    /// `r·V(r)` for `r > 0`.
    fn reduced(&self, r: T) -> T;

    fn value(&self, r: T) -> T {
        self.reduced(r) / r
    }
}

impl<T: Real, P: RadialPotential<T> + ?Sized> RadialPotential<T> for Arc<P> {
    fn reduced(&self, r: T) -> T {
        (**self).reduced(r)
    }
}

impl<T: Real, P: RadialPotential<T> + ?Sized> RadialPotential<T> for &P {
    fn reduced(&self, r: T) -> T {
        (**self).reduced(r)
    }
}

/// `κ/r − μ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShiftedCoulomb<T> {
    pub kappa: T,
    pub mu: T,
}

impl<T: Real> ShiftedCoulomb<T> {
    pub fn new(kappa: T, mu: T) -> Self {
        Self { kappa, mu }
    }
}

impl<T: Real> RadialPotential<T> for ShiftedCoulomb<T> {
    fn reduced(&self, r: T) -> T {
        self.kappa - self.mu * r
    }
}

/// A closure `r ↦ V(r)`.
pub struct FnPotential<F>(pub F);

impl<T: Real, F: Fn(T) -> T + Send + Sync> RadialPotential<T> for FnPotential<F> {
    fn reduced(&self, r: T) -> T {
        r * (self.0)(r)
    }

    fn value(&self, r: T) -> T {
        (self.0)(r)
    }
}

/// The TF potential `1/r − ρ∗|x|⁻¹ − μ` of a solved problem.
///
/// Inside the grid `u = r·V` is interpolated from the nodes. Below `r_min`
/// the screening potential is frozen at its first nodal value. Beyond
/// `r_max` an ion keeps its enclosed charge as a point charge, while for
/// the neutral atom `V` continues with the `r⁻³` decay of its tail.
#[derive(Clone, Debug)]
pub struct TfPotential<T: Real> {
    grid: Arc<RadialGrid<T>>,
    u: Vec<T>,
    phi0: T,
    outer_charge: T,
    mu: T,
}

impl<T: Real> TfPotential<T> {
    pub fn new(sol: &TfSolution<T>) -> Self {
        let grid = sol.grid().clone();
        let nodes = grid.nodes();
        let u = nodes
            .iter()
            .zip(&sol.potential)
            .map(|(r, p)| T::one() - *r * (*p + sol.mu))
            .collect();
        let last = nodes.len() - 1;
        Self {
            phi0: sol.potential[0],
            outer_charge: T::one() - nodes[last] * sol.potential[last],
            mu: sol.mu,
            u,
            grid,
        }
    }

    pub fn grid(&self) -> &Arc<RadialGrid<T>> {
        &self.grid
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    /// Nodal `r·V`.
    pub fn nodal_reduced(&self) -> &[T] {
        &self.u
    }
}

impl<T: Real> RadialPotential<T> for TfPotential<T> {
    fn reduced(&self, r: T) -> T {
        if r < self.grid.r_min() {
            return T::one() - r * (self.phi0 + self.mu);
        }
        if r > self.grid.r_max() {
            if self.mu == T::zero() {
                let t = self.grid.r_max() / r;
                return self.outer_charge * t * t;
            }
            return self.outer_charge - self.mu * r;
        }
        self.grid.interpolate(&self.u, r).unwrap_or(T::zero())
    }
}

/// Samples `(r_i, V(r_i))` with `r·V` interpolated linearly in `r`.
///
/// Below the first sample `r·V` is held constant (a pure Coulomb core); past
/// the last one `V` keeps its final value.
#[derive(Clone, Debug)]
pub struct TabulatedPotential<T> {
    r: Vec<T>,
    u: Vec<T>,
}

impl<T: Real> TabulatedPotential<T> {
    pub fn new(r: Vec<T>, v: Vec<T>) -> Result<Self> {
        if r.len() != v.len() {
            return param(format!("{} radii but {} potential values", r.len(), v.len()));
        }
        if r.len() < 2 {
            return param("a tabulated potential needs at least two samples");
        }
        if !(r[0] > T::zero()) || r.windows(2).any(|w| !(w[1] > w[0])) {
            return param("radii must be positive and strictly increasing");
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numeric("non-finite potential sample".into()));
        }
        let u = r.iter().zip(&v).map(|(a, b)| *a * *b).collect();
        Ok(Self { r, u })
    }

    /// Reads two columns `r, V`; a header line is optional.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let (mut r, mut v) = (Vec::new(), Vec::new());
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() < 2 {
                return param(format!("row {} has fewer than two columns", line + 1));
            }
            let parsed = (rec[0].parse::<f64>(), rec[1].parse::<f64>());
            match parsed {
                (Ok(a), Ok(b)) => {
                    r.push(T::c(a));
                    v.push(T::c(b));
                }
                _ if line == 0 => continue,
                _ => return param(format!("row {} is not numeric", line + 1)),
            }
        }
        Self::new(r, v)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        Self::from_csv(std::fs::File::open(path)?)
    }
}

impl<T: Real> RadialPotential<T> for TabulatedPotential<T> {
    fn reduced(&self, r: T) -> T {
        let n = self.r.len();
        if r <= self.r[0] {
            return self.u[0];
        }
        if r >= self.r[n - 1] {
            return r * self.u[n - 1] / self.r[n - 1];
        }
        let k = self.r.partition_point(|x| *x <= r) - 1;
        let t = (r - self.r[k]) / (self.r[k + 1] - self.r[k]);
        self.u[k] + t * (self.u[k + 1] - self.u[k])
    }
}
