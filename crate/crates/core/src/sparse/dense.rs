//! Dense LU with partial pivoting. Only meant for small systems (a few
//! hundred unknowns) used as reference solutions.

use alloc::vec::Vec;

use crate::error::{Error, Result};

pub const MAX_DENSE_DOFS: usize = 500;

/// Solves the row-major `n x n` system `a x = b`.
pub fn lu_solve(n: usize, a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    if n > MAX_DENSE_DOFS {
        return Err(Error::InvalidInput(alloc::format!("dense solve limited to {MAX_DENSE_DOFS} unknowns, got {n}")));
    }
    if a.len() != n * n || b.len() != n {
        return Err(Error::DimensionMismatch(alloc::format!("dense {n}x{n} with {} entries", a.len())));
    }
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    let scale = m.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    for k in 0..n {
        let (p, pv) = (k..n).map(|i| (i, m[i * n + k].abs())).fold((k, -1.0), |a, b| if b.1 > a.1 { b } else { a });
        if pv <= 1e-14 * scale {
            return Err(Error::Singular(k));
        }
        if p != k {
            for j in 0..n {
                m.swap(k * n + j, p * n + j);
            }
            x.swap(k, p);
        }
        let d = m[k * n + k];
        for i in k + 1..n {
            let f = m[i * n + k] / d;
            if f != 0.0 {
                for j in k..n {
                    m[i * n + j] -= f * m[k * n + j];
                }
                x[i] -= f * x[k];
            }
        }
    }
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| m[k * n + j] * x[j]).sum();
        x[k] = (x[k] - s) / m[k * n + k];
    }
    Ok(x)
}
