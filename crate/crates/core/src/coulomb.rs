//! Coulomb potentials and energies of radial densities in the plane.
//!
//! All radial integrals here are product integrations: the density enters
//! through the grid interpolant of `s·ρ(s)` and the kernel is integrated
//! against each Lagrange basis polynomial. The log singularity of the angular
//! kernel at `s = r` is split off at `r` and integrated with a tanh-sinh rule
//! in the exact gap variable; panels that come close to `r` without
//! containing it are subdivided geometrically toward `r`.

use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::elliptic::kernel_from_gap;
use crate::error::{domain, param, Error, Result};
use crate::grid::{lagrange, RadialGrid};
use crate::quadrature::{GaussLegendre, TanhSinh};
use crate::scalar::Real;

/// Nonnegative radial density on a shared grid with its cached mass.
#[derive(Clone, Debug)]
pub struct RadialDensity<T: Real> {
    grid: Arc<RadialGrid<T>>,
    values: Vec<T>,
    mass: T,
}

impl<T: Real> RadialDensity<T> {
    pub fn new(grid: Arc<RadialGrid<T>>, values: Vec<T>) -> Result<Self> {
        grid.check_values(&values)?;
        if let Some(i) = values.iter().position(|v| *v < T::zero()) {
            return param(format!(
                "density is negative at node {i} (r = {})",
                grid.nodes()[i]
            ));
        }
        let mass = grid.integrate(&values)?;
        Ok(Self { grid, values, mass })
    }

    pub fn from_fn(grid: Arc<RadialGrid<T>>, f: impl Fn(T) -> T) -> Result<Self> {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self::new(grid, values)
    }

    pub fn zero(grid: Arc<RadialGrid<T>>) -> Self {
        let n = grid.len();
        Self {
            grid,
            values: vec![T::zero(); n],
            mass: T::zero(),
        }
    }

    pub fn grid(&self) -> &Arc<RadialGrid<T>> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn mass(&self) -> T {
        self.mass
    }

    /// `α·self`, for `α ≥ 0`.
    pub fn scaled(&self, alpha: T) -> Result<Self> {
        Self::new(
            self.grid.clone(),
            self.values.iter().map(|v| *v * alpha).collect(),
        )
    }

    /// Density value between nodes, from the same interpolant the integrals use.
    pub fn at(&self, r: T) -> Option<T> {
        self.grid.interpolate_density(&self.values, r)
    }

    fn same_grid(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || self.grid == other.grid
    }
}

/// Quadrature rules shared by every product-integration row.
pub struct ProductRule<T> {
    gauss: GaussLegendre<T>,
    singular: TanhSinh<T>,
}

impl<T: Real> Default for ProductRule<T> {
    fn default() -> Self {
        Self {
            gauss: GaussLegendre::new(16),
            singular: TanhSinh::default(),
        }
    }
}

impl<T: Real> ProductRule<T> {
    /// Coefficients `c` with `Σ_j c_j f(r_j) ≈ ∫ f(s) K(s, |s − r|) s ds` over
    /// the grid, where `f` is represented by the grid interpolant.
    ///
    /// `kernel` receives the integration point and its exact distance to `r`;
    /// it may be singular (integrably) at distance zero.
    pub fn row(&self, grid: &RadialGrid<T>, r: T, kernel: impl Fn(T, T) -> T) -> Vec<T> {
        let mut out = vec![T::zero(); grid.len()];
        self.accumulate(grid, r, &kernel, &mut out);
        out
    }

    fn accumulate(&self, grid: &RadialGrid<T>, r: T, kernel: &impl Fn(T, T) -> T, out: &mut [T]) {
        let nodes = grid.nodes();
        let touch = T::c(1e-13) * r;
        for p in grid.panels() {
            let xs = &nodes[p.indices()];
            let (a, b) = (xs[0], xs[p.len - 1]);
            let mut add = |s: T, gap: T, w: T| {
                let kv = w * kernel(s, gap);
                for (k, j) in p.indices().enumerate() {
                    out[j] = out[j] + kv * xs[k] * lagrange(xs, k, s);
                }
            };
            if r > a + touch && r < b - touch {
                for (s, gap, w) in self.singular.points(a, r, false) {
                    add(s, gap, w);
                }
                for (s, gap, w) in self.singular.points(r, b, true) {
                    add(s, gap, w);
                }
            } else if (r - a).abs() <= touch {
                for (s, gap, w) in self.singular.points(r, b, true) {
                    add(s, gap, w);
                }
            } else if (r - b).abs() <= touch {
                for (s, gap, w) in self.singular.points(a, r, false) {
                    add(s, gap, w);
                }
            } else {
                let (near, far) = if r < a { (a, b) } else { (b, a) };
                let dist = (near - r).abs();
                let len = b - a;
                if dist * T::c(2.0) >= len {
                    for (s, w) in self.gauss.points(a, b) {
                        add(s, (s - r).abs(), w);
                    }
                } else {
                    // pieces whose length equals their distance to r
                    let dir = if far > near { T::one() } else { -T::one() };
                    let mut x0 = near;
                    let mut step = dist;
                    loop {
                        let mut x1 = x0 + dir * step;
                        let last = (x1 - near).abs() >= len;
                        if last {
                            x1 = far;
                        }
                        for (s, w) in self.gauss.points(x0.min(x1), x0.max(x1)) {
                            add(s, (s - r).abs(), w);
                        }
                        if last {
                            break;
                        }
                        x0 = x1;
                        step = step * T::c(2.0);
                    }
                }
            }
        }
    }
}

/// Angular Coulomb kernel at radius `r`, as a function of the point and gap.
#[inline]
pub fn coulomb_kernel<T: Real>(r: T) -> impl Fn(T, T) -> T {
    move |s: T, gap: T| kernel_from_gap(r.max(s), gap)
}

/// `2π / max(r, s)`.
#[inline]
pub fn newton_kernel<T: Real>(r: T) -> impl Fn(T, T) -> T {
    move |s: T, _gap: T| T::c(2.0) * T::PI() / r.max(s)
}

/// Dense collocation matrix `M` with `(ρ∗|·|⁻¹)(r_i) ≈ Σ_j M_ij ρ_j`.
#[derive(Clone, Debug)]
pub struct CoulombOperator<T: Real> {
    grid: Arc<RadialGrid<T>>,
    matrix: Vec<T>,
}

impl<T: Real> CoulombOperator<T> {
    /// Assembles the matrix, one row per node in parallel.
    pub fn new(grid: Arc<RadialGrid<T>>) -> Self {
        let n = grid.len();
        let rows: Vec<Vec<T>> = (0..n)
            .into_par_iter()
            .map_init(ProductRule::default, |rule, i| {
                let r = grid.nodes()[i];
                rule.row(&grid, r, coulomb_kernel(r))
            })
            .collect();
        let mut matrix = Vec::with_capacity(n * n);
        for row in rows {
            matrix.extend(row);
        }
        Self { grid, matrix }
    }

    pub fn grid(&self) -> &Arc<RadialGrid<T>> {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn row(&self, i: usize) -> &[T] {
        let n = self.len();
        &self.matrix[i * n..(i + 1) * n]
    }

    /// Nodal potential of nodal density values.
    pub fn apply(&self, values: &[T]) -> Vec<T> {
        let n = self.len();
        assert_eq!(values.len(), n, "density length must match the grid");
        self.matrix
            .par_chunks(n)
            .map(|row| row.iter().zip(values).map(|(m, v)| *m * *v).sum())
            .collect()
    }

    /// `D(f, g) = ½ Σ w_i f_i (M g)_i`.
    pub fn energy(&self, f: &[T], g: &[T]) -> T {
        let phi = self.apply(g);
        T::c(0.5)
            * self
                .grid
                .weights()
                .iter()
                .zip(f)
                .zip(&phi)
                .map(|((w, a), p)| *w * *a * *p)
                .sum::<T>()
    }
}

fn check_inside<T: Real>(grid: &RadialGrid<T>, r: T) -> Result<()> {
    let slack = T::c(1e-12) * grid.r_max();
    if !(r >= grid.r_min() - slack && r <= grid.r_max() + slack) {
        return domain(format!(
            "r = {r} outside the grid [{}, {}]",
            grid.r_min(),
            grid.r_max()
        ));
    }
    Ok(())
}

fn contract<T: Real>(row: &[T], values: &[T]) -> T {
    row.iter().zip(values).map(|(c, v)| *c * *v).sum()
}

/// `(ρ∗|·|⁻¹)(r)` for `r` inside the grid.
pub fn coulomb_potential<T: Real>(rho: &RadialDensity<T>, r: T) -> Result<T> {
    check_inside(rho.grid(), r)?;
    let row = ProductRule::default().row(rho.grid(), r, coulomb_kernel(r));
    Ok(contract(&row, rho.values()))
}

/// Nodal potential of `rho`, computed row by row without storing the matrix.
pub fn nodal_potential<T: Real>(rho: &RadialDensity<T>) -> Vec<T> {
    let grid = rho.grid();
    grid.nodes()
        .par_iter()
        .map_init(ProductRule::default, |rule, &r| {
            contract(&rule.row(grid, r, coulomb_kernel(r)), rho.values())
        })
        .collect()
}

/// `D(f, g) = ½ ∬ f(x) g(y) / |x − y|`.
pub fn coulomb_energy<T: Real>(f: &RadialDensity<T>, g: &RadialDensity<T>) -> Result<T> {
    if !f.same_grid(g) {
        return param("densities live on different grids");
    }
    let phi = nodal_potential(g);
    let total: T = f
        .grid()
        .weights()
        .iter()
        .zip(f.values())
        .zip(&phi)
        .map(|((w, a), p)| *w * *a * *p)
        .sum();
    Ok(T::c(0.5) * total)
}

/// `∫ ρ(y) / max(r, |y|) dy`, a lower bound for the Coulomb potential.
pub fn newton_lower_bound<T: Real>(rho: &RadialDensity<T>, r: T) -> Result<T> {
    if !(r > T::zero()) {
        return domain(format!("r must be positive, got {r}"));
    }
    let row = ProductRule::default().row(rho.grid(), r, newton_kernel(r));
    Ok(contract(&row, rho.values()))
}

/// Nodal values of [`newton_lower_bound`].
pub fn nodal_newton_bound<T: Real>(rho: &RadialDensity<T>) -> Vec<T> {
    let grid = rho.grid();
    grid.nodes()
        .par_iter()
        .map_init(ProductRule::default, |rule, &r| {
            contract(&rule.row(grid, r, newton_kernel(r)), rho.values())
        })
        .collect()
}

/// Outcome of comparing a potential with `2√(2λ) r^{−1/2} + 3`.
#[derive(Clone, Debug, Serialize)]
pub struct UpperBoundReport<T: Real> {
    pub lambda: T,
    pub min_slack: T,
    pub max_slack: T,
    pub violations: Vec<BoundViolation<T>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundViolation<T: Real> {
    pub r: T,
    pub potential: T,
    pub bound: T,
}

/// Explicit upper bound `2√(2λ) r^{−1/2} + 3` for densities with `2πρ r ≤ 1`.
pub fn potential_upper_bound<T: Real>(lambda: T, r: T) -> T {
    T::c(2.0) * (T::c(2.0) * lambda).sqrt() / r.sqrt() + T::c(3.0)
}

/// Checks the explicit upper bound at every node.
pub fn check_upper_bound<T: Real>(rho: &RadialDensity<T>) -> Result<UpperBoundReport<T>> {
    let potential = nodal_potential(rho);
    upper_bound_report(rho, &potential)
}

/// Same as [`check_upper_bound`] with a precomputed nodal potential.
pub fn upper_bound_report<T: Real>(
    rho: &RadialDensity<T>,
    potential: &[T],
) -> Result<UpperBoundReport<T>> {
    let tau = T::c(2.0) * T::PI();
    let limit = T::one() + T::c(1e-9);
    for (r, v) in rho.grid().nodes().iter().zip(rho.values()) {
        if tau * *v * *r > limit {
            return Err(Error::Precondition(format!(
                "2πρ(r)·r = {} exceeds 1 at r = {r}",
                tau * *v * *r
            )));
        }
    }
    let lambda = rho.mass();
    let mut min_slack = T::infinity();
    let mut max_slack = T::neg_infinity();
    let mut violations = Vec::new();
    for (&r, &p) in rho.grid().nodes().iter().zip(potential) {
        let bound = potential_upper_bound(lambda, r);
        let slack = bound - p;
        min_slack = min_slack.min(slack);
        max_slack = max_slack.max(slack);
        if slack < T::zero() {
            violations.push(BoundViolation {
                r,
                potential: p,
                bound,
            });
        }
    }
    Ok(UpperBoundReport {
        lambda,
        min_slack,
        max_slack,
        violations,
    })
}

/// `D(f) / ‖f‖²_{4/3}`, to be compared with a chosen Hardy-Littlewood-Sobolev constant.
pub fn hls_ratio<T: Real>(f: &RadialDensity<T>) -> Result<T> {
    let d = coulomb_energy(f, f)?;
    let p: Vec<T> = f.values().iter().map(|v| v.powf(T::c(4.0 / 3.0))).collect();
    let norm = f.grid().integrate(&p)?.powf(T::c(0.75));
    if norm == T::zero() {
        return param("the zero density has no HLS ratio");
    }
    Ok(d / (norm * norm))
}

/// Writes `r, rho, potential` rows.
pub fn write_density_csv<T: Real, W: Write>(
    rho: &RadialDensity<T>,
    potential: &[T],
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["r", "rho", "potential"])?;
    for ((r, v), p) in rho.grid().nodes().iter().zip(rho.values()).zip(potential) {
        w.write_record([fmt17(*r), fmt17(*v), fmt17(*p)])?;
    }
    w.flush()?;
    Ok(())
}

/// Seventeen significant digits, enough to round-trip an `f64`.
pub fn fmt17<T: Real>(x: T) -> String {
    format!("{:.16e}", x.as_f64())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_log_grid;
    use std::f64::consts::PI;

    fn grid(n: usize, a: f64, b: f64) -> Arc<RadialGrid<f64>> {
        Arc::new(make_log_grid(n, a, b).unwrap())
    }

    /// Reference potential of a radial density by tensor Gauss rules over
    /// `(s, θ)`; valid when `r` is outside the support.
    fn brute_potential(rho: impl Fn(f64) -> f64, a: f64, b: f64, r: f64) -> f64 {
        let gs = GaussLegendre::<f64>::new(64);
        let gt = GaussLegendre::<f64>::new(128);
        let mut total = 0.0;
        let cells = 64;
        for c in 0..cells {
            let lo = a * (b / a).powf(c as f64 / cells as f64);
            let hi = a * (b / a).powf((c + 1) as f64 / cells as f64);
            for (s, ws) in gs.points(lo, hi) {
                let ang: f64 = gt
                    .points(0.0, 2.0 * PI)
                    .map(|(t, wt)| wt / (r * r + s * s - 2.0 * r * s * t.cos()).sqrt())
                    .sum();
                total += ws * rho(s) * s * ang;
            }
        }
        total
    }

    #[test]
    fn uniform_disk_center_potential() {
        let g = grid(301, 1e-7, 1.0);
        let rho = RadialDensity::from_fn(g, |_| 1.0 / PI).unwrap();
        let v = coulomb_potential(&rho, 1e-7).unwrap();
        assert!((v - 2.0).abs() < 1e-5, "{v}");
    }

    #[test]
    fn uniform_disk_self_energy() {
        // the potential has a (1 − r) ln(1 − r) edge term, so refine
        let g = grid(1201, 1e-8, 1.0);
        let rho = RadialDensity::from_fn(g, |_| 1.0 / PI).unwrap();
        let d = coulomb_energy(&rho, &rho).unwrap();
        assert!((d - 8.0 / (3.0 * PI)).abs() < 1e-4, "{d}");
    }

    #[test]
    fn annulus_matches_double_quadrature() {
        // the annulus is the whole grid so the density has no jump inside it;
        // exterior points are reached through the row rule directly
        let (a, b) = (0.1, 1.0);
        let g = grid(201, a, b);
        let rho = RadialDensity::from_fn(g.clone(), |r| 1.0 / (2.0 * PI * r)).unwrap();
        let rule = ProductRule::default();
        for r in [1.2, 3.0] {
            let want = brute_potential(|s| 1.0 / (2.0 * PI * s), a, b, r);
            let got = contract(&rule.row(&g, r, coulomb_kernel(r)), rho.values());
            assert!((got - want).abs() < 1e-6 * want, "{got} vs {want}");
        }
    }

    /// Complete elliptic integral of the second kind by Gauss panels.
    fn ellint_e(k: f64) -> f64 {
        let g = GaussLegendre::<f64>::new(32);
        (0..32)
            .map(|c| {
                let lo = c as f64 * PI / 64.0;
                g.integrate(lo, lo + PI / 64.0, |t| (1.0 - k * k * t.sin().powi(2)).sqrt())
            })
            .sum()
    }

    #[test]
    fn uniform_disk_interior_potential() {
        // potential of surface density 1/π on the unit disk is (4/π) E(r)
        let g = grid(401, 1e-8, 1.0);
        let rho = RadialDensity::from_fn(g, |_| 1.0 / PI).unwrap();
        for r in [0.3, 0.7, 0.95, 1.0] {
            let want = 4.0 / PI * ellint_e(r);
            let got = coulomb_potential(&rho, r).unwrap();
            assert!((got - want).abs() < 1e-6, "r = {r}: {got} vs {want}");
        }
    }

    #[test]
    fn far_field_is_monopole() {
        let g = grid(401, 1e-6, 1e3);
        let eps = 1e-3;
        let rho = RadialDensity::from_fn(g.clone(), |r| {
            (-(r / eps).powi(2)).exp() / (PI * eps * eps)
        })
        .unwrap();
        let lambda = rho.mass();
        for r in [1.0, 10.0, 100.0] {
            let v = coulomb_potential(&rho, r).unwrap();
            assert!((v * r / lambda - 1.0).abs() < 1e-5, "r = {r}");
        }
        let nb = newton_lower_bound(&rho, 2.0).unwrap();
        assert!((nb - lambda / 2.0).abs() < 1e-8);
    }

    #[test]
    fn newton_bound_for_disk_outside() {
        let g = grid(301, 1e-7, 1.0);
        let rho = RadialDensity::from_fn(g, |_| 1.0 / PI).unwrap();
        let nb = newton_lower_bound(&rho, 2.0).unwrap();
        assert!((nb - 0.5 * rho.mass()).abs() < 1e-12);
        assert!((rho.mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn operator_agrees_with_pointwise_rows() {
        let g = grid(121, 1e-5, 20.0);
        let rho = RadialDensity::from_fn(g.clone(), |r| (-r).exp()).unwrap();
        let op = CoulombOperator::new(g.clone());
        let phi = op.apply(rho.values());
        for i in [0, 17, 60, 120] {
            let v = coulomb_potential(&rho, g.nodes()[i]).unwrap();
            assert!((phi[i] - v).abs() < 1e-13 * v);
        }
        let d1 = op.energy(rho.values(), rho.values());
        let d2 = coulomb_energy(&rho, &rho).unwrap();
        assert!((d1 - d2).abs() < 1e-13 * d1);
    }

    #[test]
    fn energy_symmetric_positive_and_quadratic() {
        let g = grid(201, 1e-6, 30.0);
        let f = RadialDensity::from_fn(g.clone(), |r| (-r).exp()).unwrap();
        let h = RadialDensity::from_fn(g.clone(), |r| 1.0 / (1.0 + r * r).powi(2)).unwrap();
        let fg = coulomb_energy(&f, &h).unwrap();
        let gf = coulomb_energy(&h, &f).unwrap();
        assert!((fg - gf).abs() < 1e-3 * fg.abs());
        let d = coulomb_energy(&f, &f).unwrap();
        assert!(d > 0.0);
        let d3 = coulomb_energy(&f.scaled(3.0).unwrap(), &f.scaled(3.0).unwrap()).unwrap();
        assert!((d3 - 9.0 * d).abs() < 1e-12 * d3);
    }

    #[test]
    fn potential_is_linear() {
        let g = grid(151, 1e-6, 30.0);
        let f = RadialDensity::from_fn(g.clone(), |r| (-r).exp()).unwrap();
        let h = RadialDensity::from_fn(g.clone(), |r| (-2.0 * r).exp() * r).unwrap();
        let (a, b) = (0.7, 2.3);
        let comb = RadialDensity::new(
            g.clone(),
            f.values().iter().zip(h.values()).map(|(x, y)| a * x + b * y).collect(),
        )
        .unwrap();
        for r in [1e-6, 0.37, 4.0] {
            let lhs = coulomb_potential(&comb, r).unwrap();
            let rhs = a * coulomb_potential(&f, r).unwrap() + b * coulomb_potential(&h, r).unwrap();
            assert!((lhs - rhs).abs() < 1e-10 * lhs.abs());
        }
    }

    #[test]
    fn mismatched_grids_and_outside_points_rejected() {
        let f = RadialDensity::from_fn(grid(40, 1e-4, 5.0), |r| (-r).exp()).unwrap();
        let h = RadialDensity::from_fn(grid(41, 1e-4, 5.0), |r| (-r).exp()).unwrap();
        assert!(matches!(coulomb_energy(&f, &h), Err(Error::Parameter(_))));
        assert!(matches!(coulomb_potential(&f, 6.0), Err(Error::Domain(_))));
        assert!(RadialDensity::new(f.grid().clone(), vec![-1.0; 40]).is_err());
    }

    #[test]
    fn upper_bound_cases() {
        let g = grid(301, 1e-6, 50.0);
        let shell = RadialDensity::from_fn(g.clone(), |r| {
            if (0.1..=1.0).contains(&r) {
                1.0 / (2.0 * PI * r)
            } else {
                0.0
            }
        })
        .unwrap();
        let rep = check_upper_bound(&shell).unwrap();
        assert!(rep.violations.is_empty());
        assert!(rep.min_slack > 0.0);

        let zero = RadialDensity::zero(g.clone());
        let rep = check_upper_bound(&zero).unwrap();
        assert!((rep.min_slack - 3.0).abs() < 1e-15 && (rep.max_slack - 3.0).abs() < 1e-15);

        let too_big = RadialDensity::from_fn(g, |r| 2.0 / (2.0 * PI * r)).unwrap();
        assert!(matches!(check_upper_bound(&too_big), Err(Error::Precondition(_))));
    }

    #[test]
    fn newton_bound_below_potential() {
        let g = grid(151, 1e-6, 40.0);
        let rho = RadialDensity::from_fn(g.clone(), |r| (-r).exp() / (2.0 * PI * r)).unwrap();
        let phi = nodal_potential(&rho);
        let nb = nodal_newton_bound(&rho);
        for (p, b) in phi.iter().zip(&nb) {
            assert!(b <= p);
        }
    }

    #[test]
    fn hls_ratio_is_finite_and_scale_free() {
        let g = grid(151, 1e-6, 40.0);
        let f = RadialDensity::from_fn(g, |r| (-r).exp()).unwrap();
        let a = hls_ratio(&f).unwrap();
        let b = hls_ratio(&f.scaled(5.0).unwrap()).unwrap();
        assert!(a.is_finite() && a > 0.0);
        assert!((a - b).abs() < 1e-12 * a);
    }

    #[test]
    fn csv_export_has_header_and_rows() {
        let g = grid(20, 1e-3, 2.0);
        let rho = RadialDensity::from_fn(g, |r| (-r).exp()).unwrap();
        let phi = nodal_potential(&rho);
        let mut buf = Vec::new();
        write_density_csv(&rho, &phi, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("r,rho,potential"));
        assert_eq!(lines.count(), 20);
    }
}
