use alloc::vec;
use alloc::vec::Vec;

use super::basis::LagrangeBasis;
use super::quadrature::QuadratureRule;
use crate::mesh::Point;

/// Affine map of a straight-sided triangle.
#[derive(Debug, Clone, Copy)]
pub struct CellGeometry {
    pub coords: [Point; 3],
    /// Cell area (half the Jacobian determinant).
    pub area: f64,
    // J^{-T} stored row-major
    inv_t: [[f64; 2]; 2],
}

impl CellGeometry {
    pub fn new(coords: [Point; 3]) -> Self {
        let j00 = coords[1][0] - coords[0][0];
        let j01 = coords[2][0] - coords[0][0];
        let j10 = coords[1][1] - coords[0][1];
        let j11 = coords[2][1] - coords[0][1];
        let det = j00 * j11 - j01 * j10;
        let inv_t = [[j11 / det, -j10 / det], [-j01 / det, j00 / det]];
        CellGeometry { coords, area: 0.5 * det, inv_t }
    }

    #[inline]
    pub fn physical_gradient(&self, g: [f64; 2]) -> [f64; 2] {
        [
            self.inv_t[0][0] * g[0] + self.inv_t[0][1] * g[1],
            self.inv_t[1][0] * g[0] + self.inv_t[1][1] * g[1],
        ]
    }

    pub fn point(&self, lambda: [f64; 3]) -> Point {
        super::space::map_to_physical(&self.coords, lambda)
    }
}

/// Basis values and reference gradients at every point of a quadrature rule.
#[derive(Debug, Clone)]
pub struct Tabulation {
    pub dim: usize,
    pub values: Vec<f64>,
    pub grads: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub points: Vec<[f64; 3]>,
}

impl Tabulation {
    pub fn new(basis: &LagrangeBasis, rule: &QuadratureRule) -> Self {
        let dim = basis.dim();
        let nq = rule.len();
        let mut values = vec![0.0; nq * dim];
        let mut grads = vec![[0.0; 2]; nq * dim];
        for q in 0..nq {
            basis.eval(rule.points[q], &mut values[q * dim..(q + 1) * dim], &mut grads[q * dim..(q + 1) * dim]);
        }
        Tabulation { dim, values, grads, weights: rule.weights.clone(), points: rule.points.clone() }
    }

    pub fn num_points(&self) -> usize {
        self.weights.len()
    }

    #[inline]
    pub fn values_at(&self, q: usize) -> &[f64] {
        &self.values[q * self.dim..(q + 1) * self.dim]
    }

    #[inline]
    pub fn grads_at(&self, q: usize) -> &[[f64; 2]] {
        &self.grads[q * self.dim..(q + 1) * self.dim]
    }

    /// Physical gradients of all basis functions at point `q` into `out`.
    pub fn physical_grads(&self, geom: &CellGeometry, q: usize, out: &mut [[f64; 2]]) {
        for (o, g) in out.iter_mut().zip(self.grads_at(q)) {
            *o = geom.physical_gradient(*g);
        }
    }
}
