//! Global assembly of the matrices and vectors used by the fractional-step
//! solvers.
//!
//! Every matrix on a given pair of spaces shares one [`SparsityPattern`]
//! computed from the cell dof maps, so `A`, `M`, `K` and `C` can be combined
//! with [`CsrMatrix::axpy`] without pattern checks failing. A [`ScatterMap`]
//! caches the value-array position of each local `(i, j)` entry per cell, which
//! makes repeated assembly into a frozen pattern a pure scatter.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fem::{CellGeometry, DirichletBC, LagrangeSpace, QuadratureRule, Tabulation};
use crate::mesh::Point;
use crate::sparse::{CsrMatrix, SparsityPattern};

/// Cell-local to value-array index map for one (row space, column space) pair.
#[derive(Debug, Clone)]
pub struct ScatterMap {
    pattern: Arc<SparsityPattern>,
    nrow_local: usize,
    ncol_local: usize,
    positions: Vec<usize>,
}

impl ScatterMap {
    pub fn new(rows: &LagrangeSpace, cols: &LagrangeSpace) -> Result<Self> {
        if !Arc::ptr_eq(rows.mesh(), cols.mesh()) {
            return Err(Error::InvalidInput("row and column spaces live on different meshes".into()));
        }
        let mut row_lists = vec![Vec::new(); rows.ndofs()];
        let ncells = rows.mesh().num_cells();
        for c in 0..ncells {
            for &i in rows.cell_dofs(c) {
                row_lists[i].extend_from_slice(cols.cell_dofs(c));
            }
        }
        let pattern = Arc::new(SparsityPattern::from_rows(cols.ndofs(), row_lists)?);
        let (nr, nc) = (rows.local_dim(), cols.local_dim());
        let mut positions = Vec::with_capacity(ncells * nr * nc);
        for c in 0..ncells {
            for &i in rows.cell_dofs(c) {
                for &j in cols.cell_dofs(c) {
                    positions.push(pattern.find(i, j).expect("cell entry in pattern"));
                }
            }
        }
        Ok(ScatterMap { pattern, nrow_local: nr, ncol_local: nc, positions })
    }

    pub fn pattern(&self) -> &Arc<SparsityPattern> {
        &self.pattern
    }

    #[inline]
    fn cell(&self, c: usize) -> &[usize] {
        let n = self.nrow_local * self.ncol_local;
        &self.positions[c * n..(c + 1) * n]
    }
}

/// Quadrature rule used for forms coupling spaces of the given degrees.
pub fn form_rule(degrees: &[usize]) -> QuadratureRule {
    let d = degrees.iter().copied().max().unwrap_or(1);
    QuadratureRule::with_degree(2 * d + 1)
}

/// Generic cell loop: `kernel(cell, local)` fills the row-major local
/// matrix which is then scattered into `target`.
pub fn assemble_into<F>(target: &mut CsrMatrix, scatter: &ScatterMap, ncells: usize, mut kernel: F) -> Result<()>
where
    F: FnMut(usize, &mut [f64]),
{
    if !Arc::ptr_eq(target.pattern(), &scatter.pattern) && **target.pattern() != *scatter.pattern {
        return Err(Error::PatternMismatch("target matrix was not built on this scatter map".into()));
    }
    target.set_zero();
    let mut local = vec![0.0; scatter.nrow_local * scatter.ncol_local];
    let values = target.values_mut();
    for c in 0..ncells {
        local.iter_mut().for_each(|v| *v = 0.0);
        kernel(c, &mut local);
        for (&k, &v) in scatter.cell(c).iter().zip(&local) {
            values[k] += v;
        }
    }
    Ok(())
}

fn geometry(space: &LagrangeSpace, c: usize) -> CellGeometry {
    CellGeometry::new(space.mesh().cell_coordinates(c))
}

/// `M_ij = int phi_j phi_i`
pub fn assemble_mass(space: &LagrangeSpace) -> Result<CsrMatrix> {
    let scatter = ScatterMap::new(space, space)?;
    let mut m = CsrMatrix::zeros(scatter.pattern().clone());
    mass_into(space, &scatter, &mut m)?;
    Ok(m)
}

pub fn mass_into(space: &LagrangeSpace, scatter: &ScatterMap, m: &mut CsrMatrix) -> Result<()> {
    let tab = Tabulation::new(space.basis(), &form_rule(&[space.degree()]));
    let n = tab.dim;
    assemble_into(m, scatter, space.mesh().num_cells(), |c, local| {
        let g = geometry(space, c);
        for q in 0..tab.num_points() {
            let phi = tab.values_at(q);
            let w = tab.weights[q] * g.area;
            for i in 0..n {
                let wi = w * phi[i];
                for j in 0..n {
                    local[i * n + j] += wi * phi[j];
                }
            }
        }
    })
}

/// `K_ij = int grad phi_j . grad phi_i`
pub fn assemble_stiffness(space: &LagrangeSpace) -> Result<CsrMatrix> {
    let scatter = ScatterMap::new(space, space)?;
    let mut k = CsrMatrix::zeros(scatter.pattern().clone());
    stiffness_into(space, &scatter, &mut k)?;
    Ok(k)
}

pub fn stiffness_into(space: &LagrangeSpace, scatter: &ScatterMap, k: &mut CsrMatrix) -> Result<()> {
    let tab = Tabulation::new(space.basis(), &form_rule(&[space.degree()]));
    let n = tab.dim;
    let mut grads = vec![[0.0; 2]; n];
    assemble_into(k, scatter, space.mesh().num_cells(), |c, local| {
        let g = geometry(space, c);
        for q in 0..tab.num_points() {
            tab.physical_grads(&g, q, &mut grads);
            let w = tab.weights[q] * g.area;
            for i in 0..n {
                for j in 0..n {
                    local[i * n + j] += w * (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]);
                }
            }
        }
    })
}

/// `C_ij = int (u . grad phi_j) phi_i` for the convecting velocity `u` given as
/// dof vectors on `space`. Values are reset; the pattern is kept.
pub fn convection_into(
    space: &LagrangeSpace,
    tab: &Tabulation,
    scatter: &ScatterMap,
    velocity: [&[f64]; 2],
    c_mat: &mut CsrMatrix,
) -> Result<()> {
    let n = tab.dim;
    for u in velocity {
        if u.len() != space.ndofs() {
            return Err(Error::DimensionMismatch(format!("convecting velocity has {} dofs", u.len())));
        }
    }
    let mut grads = vec![[0.0; 2]; n];
    let mut ul = [[0.0; 15]; 2];
    assemble_into(c_mat, scatter, space.mesh().num_cells(), |c, local| {
        let g = geometry(space, c);
        let dofs = space.cell_dofs(c);
        for k in 0..2 {
            for (l, &d) in dofs.iter().enumerate() {
                ul[k][l] = velocity[k][d];
            }
        }
        for q in 0..tab.num_points() {
            let phi = tab.values_at(q);
            tab.physical_grads(&g, q, &mut grads);
            let (mut ux, mut uy) = (0.0, 0.0);
            for l in 0..n {
                ux += ul[0][l] * phi[l];
                uy += ul[1][l] * phi[l];
            }
            let w = tab.weights[q] * g.area;
            for j in 0..n {
                let adv = w * (ux * grads[j][0] + uy * grads[j][1]);
                for i in 0..n {
                    local[i * n + j] += adv * phi[i];
                }
            }
        }
    })
}

pub fn assemble_convection(space: &LagrangeSpace, velocity: [&[f64]; 2]) -> Result<CsrMatrix> {
    let scatter = ScatterMap::new(space, space)?;
    let tab = Tabulation::new(space.basis(), &form_rule(&[space.degree()]));
    let mut c = CsrMatrix::zeros(scatter.pattern().clone());
    convection_into(space, &tab, &scatter, velocity, &mut c)?;
    Ok(c)
}

/// `int (d/dx_k trial_j) test_i` with rows on `test` and columns on `trial`.
fn derivative_matrices(test: &LagrangeSpace, trial: &LagrangeSpace) -> Result<[CsrMatrix; 2]> {
    let scatter = ScatterMap::new(test, trial)?;
    let rule = form_rule(&[test.degree(), trial.degree()]);
    let tt = Tabulation::new(test.basis(), &rule);
    let tr = Tabulation::new(trial.basis(), &rule);
    let (nr, nc) = (tt.dim, tr.dim);
    let mut grads = vec![[0.0; 2]; nc];
    let mut out = [CsrMatrix::zeros(scatter.pattern().clone()), CsrMatrix::zeros(scatter.pattern().clone())];
    for (k, mat) in out.iter_mut().enumerate() {
        assemble_into(mat, &scatter, test.mesh().num_cells(), |c, local| {
            let g = geometry(test, c);
            for q in 0..rule.len() {
                let phi = tt.values_at(q);
                tr.physical_grads(&g, q, &mut grads);
                let w = rule.weights[q] * g.area;
                for i in 0..nr {
                    for j in 0..nc {
                        local[i * nc + j] += w * grads[j][k] * phi[i];
                    }
                }
            }
        })?;
    }
    Ok(out)
}

/// Pressure-gradient matrices `dP^k_ij = int (d/dx_k psi_j) phi_i`
/// (velocity rows, pressure columns).
pub fn assemble_gradient(velocity: &LagrangeSpace, pressure: &LagrangeSpace) -> Result<[CsrMatrix; 2]> {
    derivative_matrices(velocity, pressure)
}

/// Velocity-divergence matrices `dU^k_ij = int (d/dx_k phi_j) psi_i`
/// (pressure rows, velocity columns).
pub fn assemble_divergence(velocity: &LagrangeSpace, pressure: &LagrangeSpace) -> Result<[CsrMatrix; 2]> {
    derivative_matrices(pressure, velocity)
}

/// `b_i = int f phi_i` for a scalar source.
pub fn assemble_source(space: &LagrangeSpace, f: &dyn Fn(Point) -> f64) -> Vec<f64> {
    let rule = form_rule(&[space.degree()]);
    let tab = Tabulation::new(space.basis(), &rule);
    let mut b = vec![0.0; space.ndofs()];
    for c in 0..space.mesh().num_cells() {
        let g = geometry(space, c);
        let dofs = space.cell_dofs(c);
        for q in 0..tab.num_points() {
            let fx = f(g.point(tab.points[q]));
            let w = tab.weights[q] * g.area * fx;
            for (i, &d) in dofs.iter().enumerate() {
                b[d] += w * tab.values_at(q)[i];
            }
        }
    }
    b
}

/// `b0^k_i = int f_k phi_i` for each velocity component.
pub fn assemble_body_force(space: &LagrangeSpace, f: &dyn Fn(Point) -> [f64; 2]) -> [Vec<f64>; 2] {
    [assemble_source(space, &|x| f(x)[0]), assemble_source(space, &|x| f(x)[1])]
}

/// `b_i = int (d/dx_k p) phi_i`, assembled directly from the pressure field
/// (the low-memory alternative to `dP^k * P`).
pub fn assemble_gradient_vector(
    velocity: &LagrangeSpace,
    pressure: &LagrangeSpace,
    p: &[f64],
    k: usize,
) -> Vec<f64> {
    let rule = form_rule(&[velocity.degree(), pressure.degree()]);
    let tv = Tabulation::new(velocity.basis(), &rule);
    let tp = Tabulation::new(pressure.basis(), &rule);
    let mut pgrads = vec![[0.0; 2]; tp.dim];
    let mut b = vec![0.0; velocity.ndofs()];
    for c in 0..velocity.mesh().num_cells() {
        let g = geometry(velocity, c);
        let vd = velocity.cell_dofs(c);
        let pd = pressure.cell_dofs(c);
        for q in 0..rule.len() {
            tp.physical_grads(&g, q, &mut pgrads);
            let dp: f64 = pd.iter().zip(&pgrads).map(|(&d, gr)| p[d] * gr[k]).sum();
            let w = rule.weights[q] * g.area * dp;
            for (i, &d) in vd.iter().enumerate() {
                b[d] += w * tv.values_at(q)[i];
            }
        }
    }
    b
}

/// `b_i = int div(u) psi_i`, assembled directly from the velocity dofs.
pub fn assemble_divergence_vector(velocity: &LagrangeSpace, pressure: &LagrangeSpace, u: [&[f64]; 2]) -> Vec<f64> {
    let rule = form_rule(&[velocity.degree(), pressure.degree()]);
    let tv = Tabulation::new(velocity.basis(), &rule);
    let tp = Tabulation::new(pressure.basis(), &rule);
    let mut vgrads = vec![[0.0; 2]; tv.dim];
    let mut b = vec![0.0; pressure.ndofs()];
    for c in 0..velocity.mesh().num_cells() {
        let g = geometry(velocity, c);
        let vd = velocity.cell_dofs(c);
        let pd = pressure.cell_dofs(c);
        for q in 0..rule.len() {
            tv.physical_grads(&g, q, &mut vgrads);
            let div: f64 = vd.iter().zip(&vgrads).map(|(&d, gr)| u[0][d] * gr[0] + u[1][d] * gr[1]).sum();
            let w = rule.weights[q] * g.area * div;
            for (i, &d) in pd.iter().enumerate() {
                b[d] += w * tp.values_at(q)[i];
            }
        }
    }
    b
}

/// Row-only Dirichlet application shared by all velocity components: the
/// rows of `a` at the (common) bc dofs become identity rows and each
/// component's right-hand side gets its own bc values.
pub fn apply_dirichlet(a: &mut CsrMatrix, rhs: &mut [&mut [f64]], bcs: &[DirichletBC]) -> Result<()> {
    if rhs.len() != bcs.len() {
        return Err(Error::BoundaryConditions(format!("{} right-hand sides for {} conditions", rhs.len(), bcs.len())));
    }
    let Some(first) = bcs.first() else { return Ok(()) };
    if let Some(k) = bcs.iter().position(|bc| bc.dofs != first.dofs) {
        return Err(Error::BoundaryConditions(format!(
            "component {k} has different Dirichlet dofs than component 0; the shared coefficient matrix needs identical locations"
        )));
    }
    a.set_identity_rows(&first.dofs)?;
    for (b, bc) in rhs.iter_mut().zip(bcs) {
        bc.apply_to_vector(b);
    }
    Ok(())
}

/// Preassembled operator bundle for the optimized solver.
#[derive(Debug, Clone)]
pub struct Operators {
    pub velocity: Arc<LagrangeSpace>,
    pub pressure: Arc<LagrangeSpace>,
    /// Velocity mass matrix.
    pub m: CsrMatrix,
    /// Velocity stiffness matrix.
    pub k: CsrMatrix,
    /// Work matrix on the velocity pattern (coefficient matrix of the tentative step).
    pub a: CsrMatrix,
    /// Pressure Laplacian (shares `k`'s pattern and values when the spaces coincide).
    pub k_hat: CsrMatrix,
    /// `dP^k`; `None` in low-memory mode.
    pub dp: Option<[CsrMatrix; 2]>,
    /// `dU^k`; `None` in low-memory mode or when the spaces coincide (then `dU = dP`).
    pub du: Option<[CsrMatrix; 2]>,
    pub m_lumped: Vec<f64>,
    /// Lumped pressure mass: weights for pressure normalization.
    pub p_lumped: Vec<f64>,
    pub low_memory: bool,
    pub(crate) scatter: ScatterMap,
    pub(crate) tab: Tabulation,
}

impl Operators {
    pub fn new(velocity: Arc<LagrangeSpace>, pressure: Arc<LagrangeSpace>, low_memory: bool) -> Result<Self> {
        if !Arc::ptr_eq(velocity.mesh(), pressure.mesh()) {
            return Err(Error::InvalidInput("velocity and pressure spaces must share a mesh".into()));
        }
        let scatter = ScatterMap::new(&velocity, &velocity)?;
        let mut m = CsrMatrix::zeros(scatter.pattern().clone());
        mass_into(&velocity, &scatter, &mut m)?;
        let mut k = CsrMatrix::zeros(scatter.pattern().clone());
        stiffness_into(&velocity, &scatter, &mut k)?;
        let a = CsrMatrix::zeros(scatter.pattern().clone());
        let same = velocity.degree() == pressure.degree();
        let k_hat = if same { k.clone() } else { assemble_stiffness(&pressure)? };
        let p_lumped = if same { m.lump() } else { assemble_mass(&pressure)?.lump() };
        let (dp, du) = if low_memory {
            (None, None)
        } else {
            let dp = assemble_gradient(&velocity, &pressure)?;
            let du = if same { None } else { Some(assemble_divergence(&velocity, &pressure)?) };
            (Some(dp), du)
        };
        let m_lumped = m.lump();
        let tab = Tabulation::new(velocity.basis(), &form_rule(&[velocity.degree()]));
        Ok(Operators { velocity, pressure, m, k, a, k_hat, dp, du, m_lumped, p_lumped, low_memory, scatter, tab })
    }

    pub fn spaces_coincide(&self) -> bool {
        self.velocity.degree() == self.pressure.degree()
    }

    /// Assembles `C(u)` into `target`, which must live on the velocity pattern.
    pub fn convection_into(&self, velocity: [&[f64]; 2], target: &mut CsrMatrix) -> Result<()> {
        convection_into(&self.velocity, &self.tab, &self.scatter, velocity, target)
    }

    /// `int (d/dx_k p) phi_i` for pressure dofs `p`.
    pub fn gradient(&self, k: usize, p: &[f64]) -> Result<Vec<f64>> {
        match &self.dp {
            Some(dp) => dp[k].matvec(p),
            None => Ok(assemble_gradient_vector(&self.velocity, &self.pressure, p, k)),
        }
    }

    /// `sum_k int (d/dx_k u_k) psi_i`.
    pub fn divergence(&self, u: [&[f64]; 2]) -> Result<Vec<f64>> {
        if self.low_memory {
            return Ok(assemble_divergence_vector(&self.velocity, &self.pressure, u));
        }
        let mats = match (&self.du, &self.dp) {
            (Some(du), _) => du,
            (None, Some(dp)) => dp,
            (None, None) => unreachable!("matrices exist outside low-memory mode"),
        };
        let mut out = mats[0].matvec(u[0])?;
        mats[1].matvec_add(1.0, u[1], &mut out)?;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Mesh;

    fn single_triangle_space(degree: usize) -> LagrangeSpace {
        // 1x1 grid; tests restrict assembly to cell 0
        let mesh = Arc::new(Mesh::unit_square(1, 1).unwrap());
        LagrangeSpace::new(mesh, degree).unwrap()
    }

    fn element_matrix(global: &CsrMatrix, space: &LagrangeSpace, cell: usize) -> Vec<f64> {
        let dofs = space.cell_dofs(cell);
        let mut out = Vec::new();
        for &i in dofs {
            for &j in dofs {
                out.push(global.get(i, j));
            }
        }
        out
    }

    fn one_cell_matrix(space: &LagrangeSpace, which: &str) -> Vec<f64> {
        let scatter = ScatterMap::new(space, space).unwrap();
        let mut m = CsrMatrix::zeros(scatter.pattern().clone());
        let tab = Tabulation::new(space.basis(), &form_rule(&[space.degree()]));
        let n = tab.dim;
        let mut grads = vec![[0.0; 2]; n];
        assemble_into(&mut m, &scatter, space.mesh().num_cells(), |c, local| {
            if c != 0 {
                return;
            }
            let g = geometry(space, c);
            for q in 0..tab.num_points() {
                tab.physical_grads(&g, q, &mut grads);
                let phi = tab.values_at(q);
                let w = tab.weights[q] * g.area;
                for i in 0..n {
                    for j in 0..n {
                        local[i * n + j] += match which {
                            "mass" => w * phi[i] * phi[j],
                            _ => w * (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]),
                        };
                    }
                }
            }
        })
        .unwrap();
        element_matrix(&m, space, 0)
    }

    #[test]
    fn p1_element_matrices() {
        let s = single_triangle_space(1);
        // cell 0 = (0,0), (1,0), (1,1): right angle at local vertex 1.
        let mass = one_cell_matrix(&s, "mass");
        let expect_m = [2.0, 1.0, 1.0, 1.0, 2.0, 1.0, 1.0, 1.0, 2.0].map(|v| v / 24.0);
        for (a, b) in mass.iter().zip(expect_m) {
            assert!((a - b).abs() < 1e-15);
        }
        let stiff = one_cell_matrix(&s, "stiff");
        let expect_k = [1.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 1.0].map(|v| v * 0.5);
        for (a, b) in stiff.iter().zip(expect_k) {
            assert!((a - b).abs() < 1e-15, "{stiff:?}");
        }
        let rows: Vec<f64> = (0..3).map(|i| mass[3 * i..3 * i + 3].iter().sum()).collect();
        for r in rows {
            assert!((r - 1.0 / 6.0).abs() < 1e-15);
        }
    }

    #[test]
    fn global_mass_and_stiffness_properties() {
        for p in 1..=4 {
            let mesh = Arc::new(Mesh::rectangle([0.0, 0.0], [2.0, 1.5], [3, 2], [false, false], None).unwrap());
            let s = LagrangeSpace::new(mesh, p).unwrap();
            let m = assemble_mass(&s).unwrap();
            let k = assemble_stiffness(&s).unwrap();
            let total: f64 = m.lump().iter().sum();
            assert!((total - 3.0).abs() < 1e-12);
            let k1 = k.matvec(&vec![1.0; s.ndofs()]).unwrap();
            assert!(k1.iter().all(|v| v.abs() < 1e-12));
            assert!(crate::sparse::krylov::symmetry_probe(&m) < 1e-14);
            assert!(crate::sparse::krylov::symmetry_probe(&k) < 1e-14);
        }
    }

    #[test]
    fn convection_annihilates_constants() {
        let mesh = Arc::new(Mesh::rectangle([0.0, 0.0], [2.0, 2.0], [4, 4], [true, true], None).unwrap());
        let s = Arc::new(LagrangeSpace::new(mesh, 2).unwrap());
        let u = s.interpolate(|x| libm::sin(x[0]) + x[1]);
        let v = s.interpolate(|x| libm::cos(3.0 * x[1]));
        let c = assemble_convection(&s, [&u.dofs, &v.dofs]).unwrap();
        assert!(c.matvec(&vec![1.0; s.ndofs()]).unwrap().iter().all(|x| x.abs() < 1e-12));
        let zero = vec![0.0; s.ndofs()];
        let c0 = assemble_convection(&s, [&zero, &zero]).unwrap();
        assert!(c0.values().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn dirichlet_requires_shared_locations() {
        let s = single_triangle_space(1);
        let mut a = assemble_mass(&s).unwrap();
        let bc0 = s.dirichlet_bc(|x| x[1] > 0.5, |_| 1.0);
        let bc1 = s.dirichlet_bc(|x| x[1] < 0.5, |_| 0.0);
        let mut b0 = vec![0.0; 4];
        let mut b1 = vec![0.0; 4];
        let err = apply_dirichlet(&mut a, &mut [&mut b0, &mut b1], &[bc0.clone(), bc1]).unwrap_err();
        assert!(matches!(err, Error::BoundaryConditions(_)));
        let before = a.clone();
        apply_dirichlet(&mut a, &mut [], &[]).unwrap();
        assert_eq!(a, before);
    }

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn divergence_equals_gradient_on_equal_spaces() {
        let mesh = Arc::new(Mesh::rectangle([0.0, 0.0], [2.0, 2.0], [3, 3], [true, true], None).unwrap());
        for p in 1..=3 {
            let s = LagrangeSpace::new(mesh.clone(), p).unwrap();
            let dp = assemble_gradient(&s, &s).unwrap();
            let du = assemble_divergence(&s, &s).unwrap();
            for k in 0..2 {
                assert!(max_diff(dp[k].values(), du[k].values()) < 1e-14);
                // periodic: integration by parts makes dU = -dP^T
                let dpt = dp[k].transpose();
                let a = du[k].to_dense();
                let b = dpt.to_dense();
                let d = a.iter().zip(&b).map(|(x, y)| (x + y).abs()).fold(0.0, f64::max);
                assert!(d < 1e-14, "p={p} k={k} defect {d}");
            }
        }
    }

    #[test]
    fn divergence_of_linear_field_is_lumped_mass() {
        let mesh = Arc::new(Mesh::rectangle([0.0, 0.0], [1.0, 1.0], [3, 4], [false, false], None).unwrap());
        let v = Arc::new(LagrangeSpace::new(mesh.clone(), 2).unwrap());
        let q = Arc::new(LagrangeSpace::new(mesh, 1).unwrap());
        let ops = Operators::new(v.clone(), q.clone(), false).unwrap();
        let ux = v.interpolate(|x| x[0]);
        let zero = vec![0.0; v.ndofs()];
        let div = ops.divergence([&ux.dofs, &zero]).unwrap();
        assert!(max_diff(&div, &ops.p_lumped) < 1e-14);
        let gp = ops.gradient(0, &vec![3.0; q.ndofs()]).unwrap();
        assert!(gp.iter().all(|x| x.abs() < 1e-13));
    }

    #[test]
    fn low_memory_vectors_match_matrices() {
        let mesh = Arc::new(Mesh::rectangle([0.0, 0.0], [2.0, 2.0], [4, 3], [true, false], None).unwrap());
        for (dv, dq) in [(1, 1), (2, 1), (3, 2)] {
            let v = Arc::new(LagrangeSpace::new(mesh.clone(), dv).unwrap());
            let q = Arc::new(LagrangeSpace::new(mesh.clone(), dq).unwrap());
            let full = Operators::new(v.clone(), q.clone(), false).unwrap();
            let lean = Operators::new(v.clone(), q.clone(), true).unwrap();
            let p = q.interpolate(|x| libm::sin(x[0]) * x[1] * x[1]);
            let u = v.interpolate(|x| libm::cos(2.0 * x[1]) + x[0]);
            let w = v.interpolate(|x| x[0] * x[1]);
            for k in 0..2 {
                assert!(max_diff(&full.gradient(k, &p.dofs).unwrap(), &lean.gradient(k, &p.dofs).unwrap()) < 1e-13);
            }
            let a = full.divergence([&u.dofs, &w.dofs]).unwrap();
            let b = lean.divergence([&u.dofs, &w.dofs]).unwrap();
            assert!(max_diff(&a, &b) < 1e-13);
        }
    }

    #[test]
    fn body_force_integrates_components() {
        let mesh = Arc::new(Mesh::rectangle([0.0, -1.0], [3.0, 1.0], [3, 2], [true, false], None).unwrap());
        let s = LagrangeSpace::new(mesh, 2).unwrap();
        let b = assemble_body_force(&s, &|_| [0.5, -2.0]);
        assert!((b[0].iter().sum::<f64>() - 3.0).abs() < 1e-13);
        assert!((b[1].iter().sum::<f64>() + 12.0).abs() < 1e-13);
    }
}
