//! Collapsed-coordinate (Duffy) Gauss rules on the reference triangle.

use alloc::vec::Vec;

/// Barycentric points with weights normalised to sum to one, so that
/// `integral over T of f = |T| * sum_q w_q f(x_q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    degree: usize,
}

impl QuadratureRule {
    /// Rule exact for all polynomials of total degree `<= degree`.
    pub fn with_degree(degree: usize) -> Self {
        // x = u, y = (1 - u) v maps x^a y^b to degree a + b + 1 in u and b in v.
        let n = (degree + 3) / 2;
        let (gx, gw) = gauss_legendre_unit(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for (&u, &wu) in gx.iter().zip(&gw) {
            for (&v, &wv) in gx.iter().zip(&gw) {
                let x = u;
                let y = (1.0 - u) * v;
                points.push([1.0 - x - y, x, y]);
                // Reference area is 1/2; normalise to unit total weight.
                weights.push(2.0 * wu * wv * (1.0 - u));
            }
        }
        QuadratureRule { points, weights, degree }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = Vec::with_capacity(n);
    let mut w = Vec::with_capacity(n);
    for i in 0..n {
        let mut z = libm::cos(core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        let weight = 2.0 / ((1.0 - z * z) * dp * dp);
        x.push(0.5 * (1.0 - z));
        w.push(0.5 * weight);
    }
    (x, w)
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    #[test]
    fn weights_sum_to_one() {
        for d in 0..=14 {
            let r = QuadratureRule::with_degree(d);
            assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn monomial_moments() {
        for d in 0..=12 {
            let r = QuadratureRule::with_degree(d);
            for a in 0..=d {
                for b in 0..=d - a {
                    let q: f64 = r
                        .points
                        .iter()
                        .zip(&r.weights)
                        .map(|(p, w)| 0.5 * w * libm::pow(p[1], a as f64) * libm::pow(p[2], b as f64))
                        .sum();
                    let exact = factorial(a) * factorial(b) / factorial(a + b + 2);
                    assert!((q - exact).abs() < 1e-14, "d={d} a={a} b={b}: {q} vs {exact}");
                }
            }
        }
    }

    #[test]
    fn points_inside_triangle() {
        let r = QuadratureRule::with_degree(9);
        for p in &r.points {
            assert!(p.iter().all(|&l| l > 0.0 && l < 1.0));
        }
    }
}
