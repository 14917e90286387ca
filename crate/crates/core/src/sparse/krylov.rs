//! Preconditioned Krylov solvers: BiCGStab, CG and MINRES.
//!
//! All three share the stopping rule `||b - A x|| <= max(rtol ||b - A x0||, atol)`
//! on the true residual. When an inner recurrence claims convergence but the
//! true residual does not meet the target, the method restarts from the
//! current iterate until the iteration budget is spent. For matrices with the
//! constant null space the residual is measured after removing its mean.

use alloc::vec;
use alloc::vec::Vec;

use super::csr::CsrMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KrylovMethod {
    BiCgStab,
    Cg,
    Minres,
}

impl KrylovMethod {
    pub fn name(self) -> &'static str {
        match self {
            KrylovMethod::BiCgStab => "bicgstab",
            KrylovMethod::Cg => "cg",
            KrylovMethod::Minres => "minres",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preconditioner {
    None,
    Jacobi,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovConfig {
    pub method: KrylovMethod,
    pub rtol: f64,
    pub atol: f64,
    pub max_iters: usize,
    pub preconditioner: Preconditioner,
    /// The matrix is singular with the constant vector as its null space
    /// (pure Neumann or fully periodic). Residuals are kept orthogonal to it.
    pub constant_nullspace: bool,
}

impl KrylovConfig {
    pub fn velocity() -> Self {
        KrylovConfig {
            method: KrylovMethod::BiCgStab,
            rtol: 1e-8,
            atol: 1e-12,
            max_iters: 500,
            preconditioner: Preconditioner::Jacobi,
            constant_nullspace: false,
        }
    }

    pub fn pressure() -> Self {
        KrylovConfig { method: KrylovMethod::Minres, ..Self::velocity() }
    }

    pub fn mass() -> Self {
        KrylovConfig { method: KrylovMethod::Cg, ..Self::velocity() }
    }

    pub fn with_rtol(mut self, rtol: f64) -> Self {
        self.rtol = rtol;
        self
    }

    pub fn with_constant_nullspace(mut self, on: bool) -> Self {
        self.constant_nullspace = on;
        self
    }

    pub fn with_method(mut self, method: KrylovMethod) -> Self {
        self.method = method;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0) || self.max_iters == 0 {
            return Err(Error::InvalidParameter(alloc::format!("invalid Krylov config {self:?}")));
        }
        Ok(())
    }
}

impl Default for KrylovConfig {
    fn default() -> Self {
        Self::velocity()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveInfo {
    pub iterations: usize,
    pub initial_residual: f64,
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

fn residual(a: &CsrMatrix, b: &[f64], x: &[f64], r: &mut [f64]) {
    a.matvec_into(x, r).expect("dimensions checked");
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
}

struct Jacobi {
    inv_diag: Option<Vec<f64>>,
    deflate: bool,
}

impl Jacobi {
    fn new(a: &CsrMatrix, kind: Preconditioner, deflate: bool) -> Self {
        let inv_diag = match kind {
            Preconditioner::None => None,
            Preconditioner::Jacobi => {
                Some(a.diagonal().into_iter().map(|d| if d != 0.0 { 1.0 / d } else { 1.0 }).collect())
            }
        };
        Jacobi { inv_diag, deflate }
    }

    /// Removes the uniform mean of a residual-space vector when the matrix
    /// has the constant null space, so rounding cannot feed the null direction.
    fn deflate(&self, r: &mut [f64]) {
        if self.deflate && !r.is_empty() {
            let mean = r.iter().sum::<f64>() / r.len() as f64;
            r.iter_mut().for_each(|v| *v -= mean);
        }
    }

    fn apply(&self, r: &[f64], z: &mut [f64]) {
        match &self.inv_diag {
            Some(d) => z.iter_mut().zip(r).zip(d).for_each(|((z, r), d)| *z = r * d),
            None => z.copy_from_slice(r),
        }
    }
}

/// Solves `A x = b` starting from the contents of `x`.
pub fn solve(a: &CsrMatrix, b: &[f64], x: &mut [f64], cfg: &KrylovConfig) -> Result<SolveInfo> {
    cfg.validate()?;
    let n = a.nrows();
    if a.ncols() != n || b.len() != n || x.len() != n {
        return Err(Error::DimensionMismatch(alloc::format!(
            "solve on {}x{} with b {} and x {}",
            a.nrows(),
            a.ncols(),
            b.len(),
            x.len()
        )));
    }
    if matches!(cfg.method, KrylovMethod::Cg | KrylovMethod::Minres) {
        debug_assert!(symmetry_probe(a) < 1e-10, "{} needs a symmetric matrix", cfg.method.name());
    }
    let pc = Jacobi::new(a, cfg.preconditioner, cfg.constant_nullspace);
    let mut r = vec![0.0; n];
    residual(a, b, x, &mut r);
    pc.deflate(&mut r);
    let r0 = norm(&r);
    let target = (cfg.rtol * r0).max(cfg.atol);
    let mut history = vec![r0];
    let mut info = SolveInfo { iterations: 0, initial_residual: r0, residual: r0 };
    if r0 <= target {
        return Ok(info);
    }
    while info.iterations < cfg.max_iters {
        let budget = cfg.max_iters - info.iterations;
        let used = match cfg.method {
            KrylovMethod::BiCgStab => bicgstab(a, b, x, &pc, target, budget, &mut history)?,
            KrylovMethod::Cg => cg(a, b, x, &pc, target, budget, &mut history)?,
            KrylovMethod::Minres => minres(a, b, x, &pc, target, r0, budget, &mut history)?,
        };
        info.iterations += used.max(1);
        residual(a, b, x, &mut r);
        pc.deflate(&mut r);
        info.residual = norm(&r);
        if !info.residual.is_finite() {
            return Err(Error::Breakdown { method: cfg.method.name(), iterations: info.iterations });
        }
        if info.residual <= target {
            return Ok(info);
        }
    }
    Err(Error::NotConverged {
        method: cfg.method.name(),
        iterations: info.iterations,
        residual: info.residual,
        target,
        history,
    })
}

/// Max relative asymmetry `|y^T A x - x^T A y|` over a fixed pseudo-random pair.
pub fn symmetry_probe(a: &CsrMatrix) -> f64 {
    let n = a.nrows();
    let mut state = 0x2545_f491_4f6c_dd1du64;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let x: Vec<f64> = (0..n).map(|_| next()).collect();
    let y: Vec<f64> = (0..n).map(|_| next()).collect();
    let ax = a.matvec(&x).unwrap_or_default();
    let ay = a.matvec(&y).unwrap_or_default();
    let (yax, xay) = (dot(&y, &ax), dot(&x, &ay));
    (yax - xay).abs() / (norm(&ax) * norm(&y)).max(f64::MIN_POSITIVE)
}

fn bicgstab(
    a: &CsrMatrix,
    b: &[f64],
    x: &mut [f64],
    pc: &Jacobi,
    target: f64,
    budget: usize,
    history: &mut Vec<f64>,
) -> Result<usize> {
    let n = b.len();
    let mut r = vec![0.0; n];
    residual(a, b, x, &mut r);
    pc.deflate(&mut r);
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut p_hat = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut s_hat = vec![0.0; n];
    let mut t = vec![0.0; n];
    let scale = norm(&r_hat);
    for it in 1..=budget {
        let rho_new = dot(&r_hat, &r);
        if rho_new.abs() <= 1e-300 * scale * scale || omega == 0.0 {
            if norm(&r) <= target {
                return Ok(it - 1);
            }
            return Err(Error::Breakdown { method: "bicgstab", iterations: it });
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        pc.apply(&p, &mut p_hat);
        a.matvec_into(&p_hat, &mut v)?;
        let rv = dot(&r_hat, &v);
        if rv == 0.0 {
            return Err(Error::Breakdown { method: "bicgstab", iterations: it });
        }
        alpha = rho / rv;
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        pc.deflate(&mut s);
        let sn = norm(&s);
        if sn <= target {
            for i in 0..n {
                x[i] += alpha * p_hat[i];
            }
            history.push(sn);
            return Ok(it);
        }
        pc.apply(&s, &mut s_hat);
        a.matvec_into(&s_hat, &mut t)?;
        let tt = dot(&t, &t);
        omega = if tt > 0.0 { dot(&t, &s) / tt } else { 0.0 };
        for i in 0..n {
            x[i] += alpha * p_hat[i] + omega * s_hat[i];
            r[i] = s[i] - omega * t[i];
        }
        pc.deflate(&mut r);
        let rn = norm(&r);
        history.push(rn);
        if rn <= target {
            return Ok(it);
        }
    }
    Ok(budget)
}

fn cg(
    a: &CsrMatrix,
    b: &[f64],
    x: &mut [f64],
    pc: &Jacobi,
    target: f64,
    budget: usize,
    history: &mut Vec<f64>,
) -> Result<usize> {
    let n = b.len();
    let mut r = vec![0.0; n];
    residual(a, b, x, &mut r);
    pc.deflate(&mut r);
    let mut z = vec![0.0; n];
    pc.apply(&r, &mut z);
    let mut p = z.clone();
    let mut q = vec![0.0; n];
    let mut rz = dot(&r, &z);
    for it in 1..=budget {
        a.matvec_into(&p, &mut q)?;
        let pq = dot(&p, &q);
        if pq == 0.0 {
            return Err(Error::Breakdown { method: "cg", iterations: it });
        }
        let alpha = rz / pq;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        pc.deflate(&mut r);
        let rn = norm(&r);
        history.push(rn);
        if rn <= target {
            return Ok(it);
        }
        pc.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Ok(budget)
}

/// Preconditioned MINRES (Paige-Saunders). The recurrence tracks the residual
/// in the preconditioner norm; we stop on the same relative reduction as the
/// 2-norm target and let the caller verify the true residual.
#[allow(clippy::too_many_arguments)]
fn minres(
    a: &CsrMatrix,
    b: &[f64],
    x: &mut [f64],
    pc: &Jacobi,
    target: f64,
    r0_norm: f64,
    budget: usize,
    history: &mut Vec<f64>,
) -> Result<usize> {
    let n = b.len();
    let mut r1 = vec![0.0; n];
    residual(a, b, x, &mut r1);
    pc.deflate(&mut r1);
    let start_norm = norm(&r1);
    let mut y = vec![0.0; n];
    pc.apply(&r1, &mut y);
    let beta1_sq = dot(&r1, &y);
    if beta1_sq < 0.0 {
        return Err(Error::Breakdown { method: "minres", iterations: 0 });
    }
    let beta1 = libm::sqrt(beta1_sq);
    if beta1 == 0.0 {
        return Ok(0);
    }
    // Inner tolerance: relative reduction needed from this (re)start.
    let rel = (target / start_norm.max(f64::MIN_POSITIVE)).min(target / r0_norm.max(f64::MIN_POSITIVE));
    let mut r2 = r1.clone();
    let (mut oldb, mut beta, mut dbar, mut epsln, mut phibar) = (0.0, beta1, 0.0, 0.0, beta1);
    let (mut cs, mut sn) = (-1.0f64, 0.0f64);
    let mut w = vec![0.0; n];
    let mut w1 = vec![0.0; n];
    let mut w2 = vec![0.0; n];
    let mut v = vec![0.0; n];
    for it in 1..=budget {
        let s = 1.0 / beta;
        for i in 0..n {
            v[i] = s * y[i];
        }
        a.matvec_into(&v, &mut y)?;
        if it >= 2 {
            let f = beta / oldb;
            for i in 0..n {
                y[i] -= f * r1[i];
            }
        }
        let alfa = dot(&v, &y);
        let f = alfa / beta;
        for i in 0..n {
            y[i] -= f * r2[i];
        }
        core::mem::swap(&mut r1, &mut r2);
        r2.copy_from_slice(&y);
        pc.deflate(&mut r2);
        pc.apply(&r2, &mut y);
        oldb = beta;
        let beta_sq = dot(&r2, &y);
        if beta_sq < 0.0 {
            return Err(Error::Breakdown { method: "minres", iterations: it });
        }
        beta = libm::sqrt(beta_sq);
        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = libm::hypot(gbar, beta).max(f64::EPSILON);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;
        let denom = 1.0 / gamma;
        core::mem::swap(&mut w1, &mut w2);
        core::mem::swap(&mut w2, &mut w);
        for i in 0..n {
            w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) * denom;
            x[i] += phi * w[i];
        }
        history.push(phibar / beta1 * start_norm);
        if phibar <= rel * beta1 || beta == 0.0 {
            return Ok(it);
        }
    }
    Ok(budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::dense;

    fn laplace_1d(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0 + 0.1 * i as f64));
            if i > 0 {
                t.push((i, i - 1, -1.0));
            }
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, n, &t).unwrap()
    }

    #[test]
    fn recovers_ones_with_every_method() {
        let a = laplace_1d(40);
        let b = a.matvec(&vec![1.0; 40]).unwrap();
        for m in [KrylovMethod::BiCgStab, KrylovMethod::Cg, KrylovMethod::Minres] {
            for pc in [Preconditioner::None, Preconditioner::Jacobi] {
                let cfg = KrylovConfig { method: m, preconditioner: pc, rtol: 1e-12, ..KrylovConfig::default() };
                let mut x = vec![0.0; 40];
                let info = solve(&a, &b, &mut x, &cfg).unwrap();
                assert!(info.residual <= 1e-12 * info.initial_residual);
                assert!(x.iter().all(|v| (v - 1.0).abs() < 1e-9), "{m:?} {pc:?}");
            }
        }
    }

    #[test]
    fn zero_rhs_takes_no_iterations() {
        let a = laplace_1d(10);
        let mut x = vec![0.0; 10];
        let info = solve(&a, &vec![0.0; 10], &mut x, &KrylovConfig::pressure()).unwrap();
        assert_eq!(info.iterations, 0);
        assert!(x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn non_convergence_carries_history() {
        let a = laplace_1d(200);
        let b = vec![1.0; 200];
        let mut x = vec![0.0; 200];
        let cfg = KrylovConfig { max_iters: 3, rtol: 1e-14, ..KrylovConfig::mass() };
        match solve(&a, &b, &mut x, &cfg) {
            Err(Error::NotConverged { history, iterations, .. }) => {
                assert_eq!(iterations, 3);
                assert!(history.len() >= 2);
            }
            other => panic!("expected NotConverged, got {other:?}"),
        }
    }

    #[test]
    fn nonsymmetric_bicgstab_vs_dense() {
        let n = 30;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 4.0));
            if i > 0 {
                t.push((i, i - 1, -1.5));
            }
            if i + 1 < n {
                t.push((i, i + 1, -0.5));
            }
            t.push((i, (i * 7 + 3) % n, 0.3));
        }
        let a = CsrMatrix::from_triplets(n, n, &t).unwrap();
        let b: Vec<f64> = (0..n).map(|i| libm::sin(i as f64)).collect();
        let mut x = vec![0.0; n];
        solve(&a, &b, &mut x, &KrylovConfig::velocity().with_rtol(1e-13)).unwrap();
        let exact = dense::lu_solve(n, &a.to_dense(), &b).unwrap();
        for (u, v) in x.iter().zip(&exact) {
            assert!((u - v).abs() < 1e-10);
        }
    }
}
