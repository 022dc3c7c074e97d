//! Exact spectrum of the two-dimensional hydrogen operator `−½Δ − |x|⁻¹`.
//!
//! Levels are `E_n = −1/(2(n+½)²)` with multiplicity `2n + 1`. Summing the
//! shifted levels gives the trace `Tr[−½Δ − |x|⁻¹ + μ]₋` in closed form, and
//! its small-`μ` expansion defines the constant `c_H = 1 − 3 ln 2 − 2γ`.

use serde::Serialize;

use crate::error::{param, Result};
use crate::scalar::Real;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_61;

/// `1 − 3 ln 2 − 2γ`.
pub fn c_h<T: Real>() -> T {
    T::one() - T::c(3.0) * T::LN_2() - T::c(2.0 * EULER_GAMMA)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct HydrogenConstants<T: Real> {
    pub c_h: T,
    pub gamma_e: T,
}

impl<T: Real> Default for HydrogenConstants<T> {
    fn default() -> Self {
        Self {
            c_h: c_h(),
            gamma_e: T::c(EULER_GAMMA),
        }
    }
}

/// `(E_n, 2n + 1)`.
pub fn hydrogen_level<T: Real>(n: usize) -> (T, usize) {
    let k = T::from_usize_exact(n) + T::c(0.5);
    (-T::c(0.5) / (k * k), 2 * n + 1)
}

/// `Σ_n (2n+1)[E_n + μ]₋`, summing while `E_n + μ < 0`.
pub fn exact_trace<T: Real>(mu: T) -> Result<T> {
    if !(mu > T::zero()) {
        return param(format!("mu must be positive, got {mu}"));
    }
    let mut sum = T::zero();
    let mut n = 0;
    loop {
        let (e, mult) = hydrogen_level::<T>(n);
        if e + mu >= T::zero() {
            return Ok(sum);
        }
        sum = sum + T::from_usize_exact(mult) * (e + mu);
        n += 1;
    }
}

/// `½(ln μ + c_H)`.
pub fn asymptotic_trace_mu<T: Real>(mu: T) -> Result<T> {
    if !(mu > T::zero()) {
        return param(format!("mu must be positive, got {mu}"));
    }
    Ok(T::c(0.5) * (mu.ln() + c_h()))
}

/// `(4h²)⁻¹(ln(2h²) + ln μ + c_H)`.
pub fn asymptotic_trace_h<T: Real>(h: T, mu: T) -> Result<T> {
    if !(h > T::zero()) {
        return param(format!("h must be positive, got {h}"));
    }
    if !(mu > T::zero()) {
        return param(format!("mu must be positive, got {mu}"));
    }
    let h2 = h * h;
    Ok(((T::c(2.0) * h2).ln() + mu.ln() + c_h()) / (T::c(4.0) * h2))
}

/// `Tr[−h²Δ − κ|x|⁻¹ + μ]₋ = κ²(2h²)⁻¹·exact_trace(2h²μ/κ²)`.
pub fn scaled_trace<T: Real>(h: T, kappa: T, mu: T) -> Result<T> {
    if !(h > T::zero()) || !(kappa > T::zero()) {
        return param("h and kappa must be positive");
    }
    let h2 = h * h;
    let k2 = kappa * kappa;
    Ok(k2 / (T::c(2.0) * h2) * exact_trace(T::c(2.0) * h2 * mu / k2)?)
}

/// `μ_m = 1/(2(m+½)²)`, the shift that puts level `m` exactly at zero.
pub fn threshold_shift<T: Real>(m: usize) -> T {
    -hydrogen_level::<T>(m).0
}

/// `Σ_{n=0}^m 1/(n+½) − ln m`, which tends to `2 ln 2 + γ`.
pub fn euler_partial_sum<T: Real>(m: usize) -> Result<T> {
    if m == 0 {
        return param("m must be at least 1");
    }
    // summed from the small end to keep the rounding error down
    let s = (0..=m)
        .rev()
        .map(|n| T::one() / (T::from_usize_exact(n) + T::c(0.5)))
        .sum::<T>();
    Ok(s - T::from_usize_exact(m).ln())
}

/// One rung of the `μ_m` ladder.
#[derive(Clone, Debug, Serialize)]
pub struct LadderPoint<T: Real> {
    pub m: usize,
    pub mu: T,
    pub exact: T,
    pub asymptotic: T,
    pub difference: T,
}

pub fn trace_ladder<T: Real>(ms: &[usize]) -> Result<Vec<LadderPoint<T>>> {
    ms.iter()
        .map(|&m| {
            let mu = threshold_shift::<T>(m);
            let exact = exact_trace(mu)?;
            let asymptotic = asymptotic_trace_mu(mu)?;
            Ok(LadderPoint {
                m,
                mu,
                exact,
                asymptotic,
                difference: (exact - asymptotic).abs(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_value() {
        let c: f64 = c_h();
        assert!((c + 2.233_872_9).abs() < 1e-7);
        assert!((c + 2.2339).abs() < 5e-5);
        let k = HydrogenConstants::<f64>::default();
        assert_eq!(k.c_h, c);
    }

    #[test]
    fn first_levels() {
        assert_eq!(hydrogen_level::<f64>(0), (-2.0, 1));
        let (e, m) = hydrogen_level::<f64>(1);
        assert!((e + 2.0 / 9.0).abs() < 1e-16 && m == 3);
        let (e, m) = hydrogen_level::<f64>(2);
        assert!((e + 0.08).abs() < 1e-16 && m == 5);
    }

    #[test]
    fn exact_trace_values() {
        assert_eq!(exact_trace(2.0f64).unwrap(), 0.0);
        assert!((exact_trace(2.0f64 / 9.0).unwrap() + 16.0 / 9.0).abs() < 1e-14);
        let want = -(2.0 + 2.0 / 3.0 + 2.0 / 5.0) + 9.0 / 12.5;
        assert!((exact_trace(0.08f64).unwrap() - want).abs() < 1e-14);
        assert!((want + 2.346_666_666_666_667).abs() < 1e-12);
        assert!(exact_trace(0.0f64).is_err());
    }

    #[test]
    fn closed_form_at_thresholds() {
        // −Σ_{n≤m} 1/(n+½) + (m+1)²/(2(m+½)²)
        for m in [0usize, 1, 5, 40] {
            let mu = threshold_shift::<f64>(m);
            let k = m as f64 + 0.5;
            let closed = -(0..=m).map(|n| 1.0 / (n as f64 + 0.5)).sum::<f64>()
                + ((m + 1) * (m + 1)) as f64 / (2.0 * k * k);
            assert!((exact_trace(mu).unwrap() - closed).abs() < 1e-12);
        }
    }

    #[test]
    fn asymptotic_values() {
        let c: f64 = c_h();
        assert_eq!(asymptotic_trace_mu(1.0).unwrap(), 0.5 * c);
        assert!((asymptotic_trace_mu(std::f64::consts::E).unwrap() - 0.5 * (1.0 + c)).abs() < 1e-15);
        assert!((asymptotic_trace_h(0.5f64.sqrt(), 1.0).unwrap() - 0.5 * c).abs() < 1e-15);
    }

    #[test]
    fn ladder_converges() {
        let pts = trace_ladder::<f64>(&[10, 100, 1000]).unwrap();
        assert!(pts[0].difference <= 0.1);
        assert!(pts[2].difference <= 0.002);
        assert!(pts.windows(2).all(|w| w[1].difference < w[0].difference));
    }

    #[test]
    fn scaling_identity_small_h() {
        let h = 0.05f64;
        let exact = scaled_trace(h, 1.0, 1.0).unwrap();
        let asym = asymptotic_trace_h(h, 1.0).unwrap();
        assert!(h * h * (exact - asym).abs() < 0.05);
    }

    #[test]
    fn euler_sum_limit() {
        let s: f64 = euler_partial_sum(100_000).unwrap();
        assert!((s - (2.0 * std::f64::consts::LN_2 + EULER_GAMMA)).abs() < 1e-3);
    }

    proptest! {
        #[test]
        fn trace_is_monotone_and_vanishes(a in 1e-3f64..3.0, b in 1e-3f64..3.0) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let (ta, tb) = (exact_trace(lo).unwrap(), exact_trace(hi).unwrap());
            prop_assert!(ta <= tb);
            prop_assert!(ta <= 0.0);
            if lo >= 2.0 {
                prop_assert_eq!(ta, 0.0);
            }
        }

        #[test]
        fn trace_is_continuous(m in 0usize..50, eps in 1e-12f64..1e-9) {
            let mu = threshold_shift::<f64>(m);
            let jump = exact_trace(mu + eps).unwrap() - exact_trace(mu).unwrap();
            // the slope in μ is the number of bound states below the shift
            let slope = ((m + 2) * (m + 2)) as f64;
            prop_assert!(jump.abs() <= slope * eps + 1e-12);
        }
    }
}
