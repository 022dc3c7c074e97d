//! Dense LU with partial pivoting for the active-set Newton systems.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Solves `A x = b` in place. `a` is row-major `n × n` and is overwritten by
/// its LU factors; `b` is overwritten by the solution.
pub(crate) fn lu_solve<T: Real>(a: &mut [T], n: usize, b: &mut [T]) -> Result<()> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    for k in 0..n {
        let (mut piv, mut best) = (k, a[k * n + k].abs());
        for i in k + 1..n {
            let v = a[i * n + k].abs();
            if v > best {
                best = v;
                piv = i;
            }
        }
        if !(best > T::zero()) || !best.is_finite() {
            return Err(Error::Numeric(format!("singular Newton matrix at column {k}")));
        }
        if piv != k {
            for j in 0..n {
                a.swap(k * n + j, piv * n + j);
            }
            b.swap(k, piv);
        }
        let (head, tail) = a.split_at_mut((k + 1) * n);
        let pivot_row = &head[k * n..];
        let d = pivot_row[k];
        let bk = b[k];
        let factors: Vec<T> = tail
            .par_chunks_mut(n)
            .map(|row| {
                let l = row[k] / d;
                if l != T::zero() {
                    for j in k + 1..n {
                        row[j] = row[j] - l * pivot_row[j];
                    }
                }
                row[k] = l;
                l
            })
            .collect();
        for (i, l) in factors.into_iter().enumerate() {
            b[k + 1 + i] = b[k + 1 + i] - l * bk;
        }
    }
    for k in (0..n).rev() {
        let row = &a[k * n..(k + 1) * n];
        let mut s = b[k];
        for j in k + 1..n {
            s = s - row[j] * b[j];
        }
        b[k] = s / row[k];
    }
    Ok(())
}
