//! Sparse linear algebra: frozen-pattern CSR matrices and Krylov solvers.

pub mod csr;
pub mod dense;
pub mod krylov;

pub use csr::{CsrMatrix, SparsityPattern};
pub use krylov::{solve, KrylovConfig, KrylovMethod, Preconditioner, SolveInfo};

/// Removes the weighted mean `sum w_i x_i / sum w_i` from `x`.
pub fn subtract_mean(x: &mut [f64], weights: &[f64]) {
    let wsum: f64 = weights.iter().sum();
    debug_assert!(wsum > 0.0, "weights must have positive sum");
    let mean = x.iter().zip(weights).map(|(a, w)| a * w).sum::<f64>() / wsum;
    x.iter_mut().for_each(|v| *v -= mean);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subtract_mean_examples() {
        let mut c = [2.5; 4];
        subtract_mean(&mut c, &[1.0; 4]);
        assert!(c.iter().all(|&v| v == 0.0));
        let mut z = [-1.0, 0.0, 1.0];
        subtract_mean(&mut z, &[1.0; 3]);
        assert_eq!(z, [-1.0, 0.0, 1.0]);
        let mut x = [1.0, 2.0, 3.0];
        subtract_mean(&mut x, &[1.0; 3]);
        assert_eq!(x, [-1.0, 0.0, 1.0]);
    }
}
