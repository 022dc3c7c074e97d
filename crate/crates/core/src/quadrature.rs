//! Fixed one-dimensional quadrature rules.
//!
//! Gauss-Legendre handles smooth integrands on panels. The tanh-sinh rule is
//! used for integrands with an integrable endpoint singularity (logarithmic or
//! algebraic), which is what the Coulomb kernel produces on the cells touching
//! the evaluation radius.

use crate::scalar::Real;

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// Builds the `n`-point rule by Newton iteration on the Legendre recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "a Gauss rule needs at least one node");
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        let nf = n as f64;
        for i in 0..(n + 1) / 2 {
            // Start from the Tricomi estimate and polish in f64, then cast.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = T::c(-x);
            nodes[n - 1 - i] = T::c(x);
            weights[i] = T::c(w);
            weights[n - 1 - i] = T::c(w);
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn points(&self, a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
        let half = (b - a) * T::c(0.5);
        let mid = (a + b) * T::c(0.5);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, a: T, b: T, mut f: impl FnMut(T) -> T) -> T {
        self.points(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Tanh-sinh (double exponential) rule on `[0, 1]`.
///
/// Each node stores its distance to both endpoints separately, so a caller
/// can hand the integrand an exact gap to a singular endpoint instead of a
/// difference of two nearly equal numbers.
#[derive(Clone, Debug)]
pub struct TanhSinh<T> {
    from_left: Vec<T>,
    from_right: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> TanhSinh<T> {
    /// Rule with abscissa step `step` truncated at `|t| <= t_max`.
    pub fn new(step: f64, t_max: f64) -> Self {
        let half_pi = std::f64::consts::FRAC_PI_2;
        let k_max = (t_max / step).ceil() as i64;
        let mut from_left = Vec::new();
        let mut from_right = Vec::new();
        let mut weights = Vec::new();
        for k in -k_max..=k_max {
            let t = k as f64 * step;
            let u = half_pi * t.sinh();
            let left = 1.0 / (1.0 + (-2.0 * u).exp());
            let right = 1.0 / (1.0 + (2.0 * u).exp());
            let e = u.exp() + (-u).exp();
            let w = step * half_pi * t.cosh() * 2.0 / (e * e);
            let (l, r, wt) = (T::from_f64(left), T::from_f64(right), T::from_f64(w));
            if let (Some(l), Some(r), Some(wt)) = (l, r, wt) {
                if l > T::zero() && r > T::zero() && wt > T::zero() && wt.is_finite() {
                    from_left.push(l);
                    from_right.push(r);
                    weights.push(wt);
                }
            }
        }
        Self {
            from_left,
            from_right,
            weights,
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Points of `[a, b]` as `(x, gap, weight)` where `gap` is the exact
    /// distance from the singular endpoint (`a` when `singular_at_left`).
    pub fn points(&self, a: T, b: T, singular_at_left: bool) -> impl Iterator<Item = (T, T, T)> + '_ {
        let len = b - a;
        (0..self.weights.len()).map(move |i| {
            if singular_at_left {
                let gap = len * self.from_left[i];
                (a + gap, gap, len * self.weights[i])
            } else {
                let gap = len * self.from_right[i];
                (b - gap, gap, len * self.weights[i])
            }
        })
    }
}

impl<T: Real> Default for TanhSinh<T> {
    fn default() -> Self {
        Self::new(1.0 / 8.0, 3.5)
    }
}
