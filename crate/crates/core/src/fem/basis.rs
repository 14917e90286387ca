//! Nodal Lagrange basis on the reference triangle, written in barycentric form.
//!
//! Local node order: the three vertices, then `degree - 1` nodes on each edge
//! `(v0, v1)`, `(v1, v2)`, `(v2, v0)` running from the first vertex to the
//! second, then interior nodes in lexicographic barycentric order.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

pub const MAX_DEGREE: usize = 4;

/// Local edge `e` connects local vertices `EDGE_VERTICES[e]`.
pub const EDGE_VERTICES: [[usize; 2]; 3] = [[0, 1], [1, 2], [2, 0]];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LagrangeBasis {
    degree: usize,
    /// Barycentric multi-indices `(i, j, k)` with `i + j + k = degree`.
    nodes: Vec<[usize; 3]>,
}

impl LagrangeBasis {
    pub fn new(degree: usize) -> Result<Self> {
        if degree == 0 || degree > MAX_DEGREE {
            return Err(Error::UnsupportedDegree(degree));
        }
        let p = degree;
        let mut nodes = vec![[p, 0, 0], [0, p, 0], [0, 0, p]];
        for [a, b] in EDGE_VERTICES {
            for m in 1..p {
                let mut idx = [0; 3];
                idx[a] = p - m;
                idx[b] = m;
                nodes.push(idx);
            }
        }
        for i in 1..p {
            for j in 1..p - i {
                let k = p - i - j;
                if k >= 1 {
                    nodes.push([i, j, k]);
                }
            }
        }
        debug_assert_eq!(nodes.len(), Self::local_dim(p));
        Ok(LagrangeBasis { degree, nodes })
    }

    pub fn local_dim(degree: usize) -> usize {
        (degree + 1) * (degree + 2) / 2
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    pub fn dofs_per_edge(&self) -> usize {
        self.degree - 1
    }

    pub fn interior_dofs(&self) -> usize {
        self.dim() - 3 - 3 * self.dofs_per_edge()
    }

    pub fn nodes(&self) -> &[[usize; 3]] {
        &self.nodes
    }

    pub fn node_barycentric(&self, i: usize) -> [f64; 3] {
        let p = self.degree as f64;
        let n = self.nodes[i];
        [n[0] as f64 / p, n[1] as f64 / p, n[2] as f64 / p]
    }

    /// Values and reference-coordinate gradients of every local basis function
    /// at barycentric point `lambda` (reference vertices (0,0), (1,0), (0,1)).
    pub fn eval(&self, lambda: [f64; 3], values: &mut [f64], grads: &mut [[f64; 2]]) {
        let p = self.degree as f64;
        // factor[l][n] = P_n(lambda_l) and its derivative, P_n(t) = prod_{m<n} (p t - m)/(m + 1)
        let mut val = [[0.0; MAX_DEGREE + 1]; 3];
        let mut der = [[0.0; MAX_DEGREE + 1]; 3];
        for l in 0..3 {
            val[l][0] = 1.0;
            der[l][0] = 0.0;
            for n in 1..=self.degree {
                let m = (n - 1) as f64;
                let f = (p * lambda[l] - m) / (m + 1.0);
                der[l][n] = der[l][n - 1] * f + val[l][n - 1] * p / (m + 1.0);
                val[l][n] = val[l][n - 1] * f;
            }
        }
        for (idx, node) in self.nodes.iter().enumerate() {
            let [i, j, k] = *node;
            let (a, b, c) = (val[0][i], val[1][j], val[2][k]);
            values[idx] = a * b * c;
            let d0 = der[0][i] * b * c;
            let d1 = a * der[1][j] * c;
            let d2 = a * b * der[2][k];
            grads[idx] = [d1 - d0, d2 - d0];
        }
    }
}

/// Values and reference gradients of all local basis functions of `degree`
/// at barycentric `point`.
pub fn eval_basis(degree: usize, point: [f64; 3]) -> Result<(Vec<f64>, Vec<[f64; 2]>)> {
    let basis = LagrangeBasis::new(degree)?;
    let mut v = vec![0.0; basis.dim()];
    let mut g = vec![[0.0; 2]; basis.dim()];
    basis.eval(point, &mut v, &mut g);
    Ok((v, g))
}
