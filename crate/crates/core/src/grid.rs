//! Radial grids for integrals of the form `∫ f(r) 2πr dr`.
//!
//! Nodes are geometric so that the `1/r` behaviour of atomic densities near
//! the nucleus is resolved. The rule interpolates `g(r) = r·f(r)` by
//! Lagrange polynomials on panels of two cells (one leading single-cell
//! panel when the cell count is odd) and integrates the interpolant exactly.
//! That makes the rule exact for `f = 1`, `f = 1/r` and `f = r`, and it is
//! the same interpolant the Coulomb operator integrates against its kernel.
//!
//! The disk `[0, r_min]` is outside the rule. Callers whose integrand
//! satisfies `r·f(r) → const` add the core contribution themselves.

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::quadrature::GaussLegendre;
use crate::scalar::Real;

/// A run of two or three consecutive nodes carrying one interpolating polynomial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Panel {
    pub start: usize,
    pub len: usize,
}

impl Panel {
    pub fn end(&self) -> usize {
        self.start + self.len - 1
    }

    pub fn indices(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.len
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridData<T>", into = "GridData<T>")]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct RadialGrid<T: Real> {
    nodes: Vec<T>,
    weights: Vec<T>,
    panels: Vec<Panel>,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
struct GridData<T: Real> {
    nodes: Vec<T>,
    weights: Vec<T>,
    r_max: T,
}

impl<T: Real> From<RadialGrid<T>> for GridData<T> {
    fn from(g: RadialGrid<T>) -> Self {
        let r_max = g.r_max();
        Self {
            nodes: g.nodes,
            weights: g.weights,
            r_max,
        }
    }
}

impl<T: Real> TryFrom<GridData<T>> for RadialGrid<T> {
    type Error = Error;

    fn try_from(d: GridData<T>) -> Result<Self> {
        let grid = RadialGrid::from_nodes(d.nodes)?;
        if d.r_max != grid.r_max() {
            return param("r_max does not equal the last node");
        }
        if d.weights.len() != grid.weights.len() {
            return param("weights and nodes differ in length");
        }
        for (w, v) in d.weights.iter().zip(&grid.weights) {
            if (*w - *v).abs() > T::tol(1e-10) * *v {
                return param("weights are not the panel rule for these nodes");
            }
        }
        Ok(grid)
    }
}

/// Geometric grid with `n` nodes from `r_min` to `r_max`.
pub fn make_log_grid<T: Real>(n: usize, r_min: T, r_max: T) -> Result<RadialGrid<T>> {
    if n < 16 {
        return param(format!("grid needs at least 16 nodes, got {n}"));
    }
    if !(r_min > T::zero() && r_max > r_min && r_max.is_finite()) {
        return param(format!(
            "need 0 < r_min < r_max, got r_min = {r_min}, r_max = {r_max}"
        ));
    }
    let log_ratio = (r_max / r_min).ln();
    let last = T::from_usize_exact(n - 1);
    let mut nodes: Vec<T> = (0..n)
        .map(|i| r_min * (log_ratio * T::from_usize_exact(i) / last).exp())
        .collect();
    nodes[0] = r_min;
    nodes[n - 1] = r_max;
    RadialGrid::from_nodes(nodes)
}

impl<T: Real> RadialGrid<T> {
    /// Builds the panel rule on arbitrary ascending positive nodes.
    ///
    /// Quadratic panels are used when every pair of neighbouring cells inside
    /// a panel has a length ratio below 2 (which keeps all weights positive);
    /// otherwise the rule falls back to single-cell linear panels.
    pub fn from_nodes(nodes: Vec<T>) -> Result<Self> {
        let n = nodes.len();
        if n < 2 {
            return param("a grid needs at least two nodes");
        }
        if nodes.iter().any(|r| !r.is_finite() || *r <= T::zero()) {
            return param("grid nodes must be finite and positive");
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return param("grid nodes must be strictly increasing");
        }
        let cells = n - 1;
        let mut panels = Vec::with_capacity(cells);
        let mut start = 0;
        if cells % 2 == 1 {
            panels.push(Panel { start: 0, len: 2 });
            start = 1;
        }
        while start + 2 < n {
            panels.push(Panel { start, len: 3 });
            start += 2;
        }
        let two = T::c(2.0);
        let balanced = panels.iter().filter(|p| p.len == 3).all(|p| {
            let h0 = nodes[p.start + 1] - nodes[p.start];
            let h1 = nodes[p.start + 2] - nodes[p.start + 1];
            h1 < two * h0 && h0 < two * h1
        });
        if !balanced {
            panels = (0..cells).map(|start| Panel { start, len: 2 }).collect();
        }

        let gauss = GaussLegendre::<T>::new(3);
        let tau = T::c(2.0) * T::PI();
        let mut weights = vec![T::zero(); n];
        for p in &panels {
            let xs = &nodes[p.indices()];
            for (s, w) in gauss.points(xs[0], xs[p.len - 1]) {
                for (k, j) in p.indices().enumerate() {
                    weights[j] = weights[j] + w * lagrange(xs, k, s);
                }
            }
        }
        for (w, r) in weights.iter_mut().zip(&nodes) {
            *w = *w * tau * *r;
        }
        if weights.iter().any(|w| *w <= T::zero()) {
            return Err(Error::Numeric("non-positive quadrature weight".into()));
        }
        let grid = Self {
            nodes,
            weights,
            panels,
        };
        let area = T::PI() * (grid.r_max().powi(2) - grid.r_min().powi(2));
        let total: T = grid.weights.iter().copied().sum();
        if (total - area).abs() > T::tol(1e-10) * area {
            return Err(Error::Numeric(format!(
                "weights sum to {total}, expected {area}"
            )));
        }
        Ok(grid)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn panels(&self) -> &[Panel] {
        &self.panels
    }

    pub fn r_min(&self) -> T {
        self.nodes[0]
    }

    pub fn r_max(&self) -> T {
        self.nodes[self.nodes.len() - 1]
    }

    /// `Σ w_i values_i`.
    pub fn integrate(&self, values: &[T]) -> Result<T> {
        self.check_values(values)?;
        Ok(self
            .weights
            .iter()
            .zip(values)
            .map(|(w, v)| *w * *v)
            .sum())
    }

    pub(crate) fn check_values(&self, values: &[T]) -> Result<()> {
        if values.len() != self.len() {
            return param(format!(
                "expected {} values, got {}",
                self.len(),
                values.len()
            ));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!(
                "non-finite value at node {i} (r = {})",
                self.nodes[i]
            )));
        }
        Ok(())
    }

    /// Index of the panel whose closed interval contains `s`.
    pub fn panel_of(&self, s: T) -> Option<usize> {
        if s < self.r_min() || s > self.r_max() {
            return None;
        }
        let idx = self
            .panels
            .partition_point(|p| self.nodes[p.end()] < s);
        Some(idx.min(self.panels.len() - 1))
    }

    /// Panel interpolant of nodal `values` at `s`.
    pub fn interpolate(&self, values: &[T], s: T) -> Option<T> {
        let p = self.panels[self.panel_of(s)?];
        let xs = &self.nodes[p.indices()];
        Some(
            p.indices()
                .enumerate()
                .map(|(k, j)| values[j] * lagrange(xs, k, s))
                .sum(),
        )
    }

    /// Value at `s` of the density whose `r·f` is interpolated, the
    /// representation every integral on this grid assumes.
    pub fn interpolate_density(&self, values: &[T], s: T) -> Option<T> {
        let p = self.panels[self.panel_of(s)?];
        let xs = &self.nodes[p.indices()];
        let g: T = p
            .indices()
            .enumerate()
            .map(|(k, j)| values[j] * xs[k] * lagrange(xs, k, s))
            .sum();
        Some(g / s)
    }

    /// `∫ f(r) 2πr dr` over `[lo, hi] ∩ [r_min, r_max]` by Gauss-Legendre on
    /// each panel, splitting panels at `lo`, `hi` and every point of `breaks`.
    pub fn integrate_fn(&self, lo: T, hi: T, breaks: &[T], mut f: impl FnMut(T) -> T) -> T {
        let gauss = GaussLegendre::<T>::new(10);
        let tau = T::c(2.0) * T::PI();
        let lo = lo.max(self.r_min());
        let hi = hi.min(self.r_max());
        let mut total = T::zero();
        if lo >= hi {
            return total;
        }
        let mut cuts: Vec<T> = Vec::new();
        for p in &self.panels {
            let a = self.nodes[p.start].max(lo);
            let b = self.nodes[p.end()].min(hi);
            if a >= b {
                continue;
            }
            cuts.clear();
            cuts.push(a);
            cuts.extend(breaks.iter().copied().filter(|x| *x > a && *x < b));
            cuts.push(b);
            cuts.sort_by(|x, y| x.partial_cmp(y).expect("finite breakpoints"));
            for w in cuts.windows(2) {
                total = total + gauss.integrate(w[0], w[1], |s| f(s) * tau * s);
            }
        }
        total
    }
}

/// Lagrange basis polynomial `k` on the nodes `xs`, evaluated at `s`.
#[inline]
pub(crate) fn lagrange<T: Real>(xs: &[T], k: usize, s: T) -> T {
    let mut v = T::one();
    for (m, &xm) in xs.iter().enumerate() {
        if m != k {
            v = v * (s - xm) / (xs[k] - xm);
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn grid(n: usize, a: f64, b: f64) -> RadialGrid<f64> {
        make_log_grid(n, a, b).unwrap()
    }

    #[test]
    fn constant_and_inverse_radius_are_exact() {
        let g = grid(64, 1e-6, 50.0);
        let one = g.integrate(&vec![1.0; 64]).unwrap();
        assert!((one - PI * 2500.0).abs() < 1e-10 * PI * 2500.0);
        let inv: Vec<f64> = g.nodes().iter().map(|r| 1.0 / (2.0 * PI * r)).collect();
        let got = g.integrate(&inv).unwrap();
        assert!((got - (50.0 - 1e-6)).abs() < 1e-10 * 50.0);
    }

    #[test]
    fn linear_integrand_matches_antiderivative() {
        let g = grid(64, 1e-6, 50.0);
        let got = g.integrate(g.nodes()).unwrap();
        let want = 2.0 * PI / 3.0 * (50f64.powi(3) - 1e-18);
        assert!((got - want).abs() < 1e-8 * want);
    }

    #[test]
    fn exponential_against_closed_form() {
        let g = grid(400, 1e-6, 50.0);
        let v: Vec<f64> = g.nodes().iter().map(|r| (-r).exp()).collect();
        let got = g.integrate(&v).unwrap();
        let b = 50.0f64;
        let a = 1e-6f64;
        let anti = |r: f64| -2.0 * PI * (-r).exp() * (1.0 + r);
        let want = anti(b) - anti(a);
        assert!((got - want).abs() < 1e-6 * want, "{got} vs {want}");
    }

    #[test]
    fn error_shrinks_as_grid_doubles() {
        let a = 1e-6f64;
        let b = 50.0f64;
        let anti = |r: f64| -2.0 * PI * (-r).exp() * (1.0 + r);
        let want = anti(b) - anti(a);
        let errs: Vec<f64> = [64, 128, 256]
            .iter()
            .map(|&n| {
                let g = grid(n, a, b);
                let v: Vec<f64> = g.nodes().iter().map(|r| (-r).exp()).collect();
                (g.integrate(&v).unwrap() - want).abs()
            })
            .collect();
        assert!(errs[1] < errs[0] && errs[2] < errs[1], "{errs:?}");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(make_log_grid::<f64>(8, 1e-6, 1.0).is_err());
        assert!(make_log_grid::<f64>(32, 1.0, 1.0).is_err());
        assert!(make_log_grid::<f64>(32, -1.0, 1.0).is_err());
        let g = grid(32, 1e-3, 1.0);
        assert!(matches!(g.integrate(&[1.0; 3]), Err(Error::Parameter(_))));
        let mut v = vec![1.0; 32];
        v[5] = f64::NAN;
        assert!(matches!(g.integrate(&v), Err(Error::Numeric(_))));
    }

    #[test]
    fn coarse_grids_fall_back_to_linear_panels() {
        let g = grid(16, 1e-6, 50.0);
        assert!(g.panels().iter().all(|p| p.len == 2));
        assert!(g.weights().iter().all(|w| *w > 0.0));
    }

    #[test]
    fn json_round_trip() {
        let g = grid(40, 1e-4, 20.0);
        let text = serde_json::to_string(&g).unwrap();
        assert!(text.starts_with("{\"nodes\":"));
        assert!(text.contains("\"r_max\":20.0"));
        let back: RadialGrid<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, g);
        let mut tampered: serde_json::Value = serde_json::from_str(&text).unwrap();
        tampered["weights"][3] = serde_json::json!(1.0);
        assert!(serde_json::from_value::<RadialGrid<f64>>(tampered).is_err());
    }

    #[test]
    fn interpolation_reproduces_nodes_and_inverse_radius() {
        let g = grid(65, 1e-5, 10.0);
        let v: Vec<f64> = g.nodes().iter().map(|r| 1.0 / r).collect();
        for (i, r) in g.nodes().iter().enumerate() {
            assert!((g.interpolate(&v, *r).unwrap() - v[i]).abs() < 1e-9 * v[i]);
        }
        let s = 0.123;
        assert!((g.interpolate_density(&v, s).unwrap() - 1.0 / s).abs() < 1e-12 / s);
        assert!(g.interpolate(&v, 11.0).is_none());
    }

    #[test]
    fn function_integration_splits_at_breaks() {
        let g = grid(101, 1e-6, 10.0);
        // indicator of r < 1 integrates to the unit disk area
        let got = g.integrate_fn(0.0, 20.0, &[1.0], |r| if r < 1.0 { 1.0 } else { 0.0 });
        assert!((got - PI * (1.0 - 1e-12)).abs() < 1e-12);
        let ring = g.integrate_fn(2.0, 3.0, &[], |_| 1.0);
        assert!((ring - 5.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn single_precision_grid() {
        let g = make_log_grid::<f32>(64, 1e-4, 10.0).unwrap();
        let total = g.integrate(&vec![1.0; 64]).unwrap();
        assert!((total - std::f32::consts::PI * 100.0).abs() < 1e-3 * total);
    }

    proptest! {
        #[test]
        fn weights_positive_and_exact(n in 16usize..300, lo in -8.0f64..-1.0, hi in 0.0f64..4.0) {
            let (a, b) = (10f64.powf(lo), 10f64.powf(hi));
            let g = grid(n, a, b);
            prop_assert!(g.weights().iter().all(|w| *w > 0.0));
            let one = g.integrate(&vec![1.0; n]).unwrap();
            prop_assert!((one - PI * (b * b - a * a)).abs() <= 1e-10 * PI * b * b);
            let inv: Vec<f64> = g.nodes().iter().map(|r| 1.0 / (2.0 * PI * r)).collect();
            prop_assert!((g.integrate(&inv).unwrap() - (b - a)).abs() <= 1e-10 * b);
        }
    }
}
