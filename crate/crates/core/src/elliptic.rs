//! Complete elliptic integral of the first kind and the angular Coulomb kernel.

use crate::error::{domain, Error, Result};
use crate::scalar::Real;

/// Modulus `k` of `K(k)`, validated to lie in `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct EllipticModulus<T>(T);

impl<T: Real> EllipticModulus<T> {
    pub fn new(k: T) -> Result<Self> {
        if k >= T::zero() && k < T::one() {
            Ok(Self(k))
        } else {
            domain(format!("elliptic modulus must lie in [0, 1), got {k}"))
        }
    }

    pub fn get(self) -> T {
        self.0
    }
}

/// `K(k) = π / (2 AGM(1, √(1 − k²)))`.
#[must_use]
pub fn ellint_k<T: Real>(k: EllipticModulus<T>) -> T {
    let k = k.0;
    k_from_complement(((T::one() - k) * (T::one() + k)).sqrt())
}

/// Convenience wrapper validating `k` first.
pub fn complete_k<T: Real>(k: T) -> Result<T> {
    Ok(ellint_k(EllipticModulus::new(k)?))
}

/// `K` expressed through the complementary modulus `k' = √(1 − k²)`.
///
/// Taking `k'` directly keeps full relative accuracy when `k` is within a few
/// ulps of 1, which is the regime of the Coulomb kernel near its diagonal.
#[must_use]
pub fn k_from_complement<T: Real>(kp: T) -> T {
    let mut a = T::one();
    let mut b = kp;
    let tol = T::tol(1e-15);
    for _ in 0..64 {
        if (a - b).abs() <= tol * a {
            break;
        }
        let next = (a + b) * T::c(0.5);
        b = (a * b).sqrt();
        a = next;
    }
    T::FRAC_PI_2() / a
}

/// `∫₀¹ dt / √((1 − t)(1 − kt)) = (1/√k) ln((1 + √k)/(1 − √k))`.
pub fn half_integral_closed_form<T: Real>(k: T) -> Result<T> {
    if !(k > T::zero() && k < T::one()) {
        return domain(format!("half integral needs 0 < k < 1, got {k}"));
    }
    let q = k.sqrt();
    // (1/q) ln((1+q)/(1-q)) written as 2 atanh(q)/q, stable as q -> 0
    Ok(T::c(2.0) * q.atanh() / q)
}

/// `∫₀^{2π} dθ / √(r² + s² − 2rs cos θ) = 4 K(min/max) / max`.
///
/// The value diverges like `(2/r) ln(8r/|r − s|)` on the diagonal, so pairs
/// with `|r − s| < 1e−12 max(r, s)` are refused.
pub fn angular_kernel<T: Real>(r: T, s: T) -> Result<T> {
    if !(r > T::zero() && s > T::zero()) || !r.is_finite() || !s.is_finite() {
        return domain(format!("kernel radii must be positive, got r = {r}, s = {s}"));
    }
    let big = r.max(s);
    let gap = (r - s).abs();
    if gap < T::c(1e-12) * big {
        return Err(Error::Singularity(r.as_f64()));
    }
    Ok(kernel_from_gap(big, gap))
}

/// Kernel value from the larger radius and the exact gap `|r − s| > 0`.
#[inline]
pub(crate) fn kernel_from_gap<T: Real>(big: T, gap: T) -> T {
    let kp = (gap * (T::c(2.0) * big - gap)).sqrt() / big;
    T::c(4.0) * k_from_complement(kp) / big
}
