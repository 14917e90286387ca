use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::{
    mass_config, pressure_config, project_compatible, BoundaryData, Convection, NSParameters, PressureInfo,
    SolutionState, Stepper, VelocityUpdate,
};
use crate::assembly::{form_rule, ScatterMap};
use crate::error::Result;
use crate::fem::{CellGeometry, LagrangeSpace, Tabulation};
use crate::mesh::Point;
use crate::problems::Problem;
use crate::sparse::{solve, subtract_mean, CsrMatrix, SolveInfo};

/// What an integrand sees at one quadrature point.
struct QuadPoint<'a> {
    x: Point,
    /// Test functions (also the trial functions: every form here is square).
    phi: &'a [f64],
    grad: &'a [[f64; 2]],
    /// Basis of the auxiliary space carrying a coefficient from the other space.
    aux_grad: &'a [[f64; 2]],
    dofs: &'a [usize],
    aux_dofs: &'a [usize],
}

impl QuadPoint<'_> {
    fn value(&self, f: &[f64]) -> f64 {
        self.dofs.iter().zip(self.phi).map(|(&d, p)| f[d] * p).sum()
    }

    fn gradient(&self, f: &[f64]) -> [f64; 2] {
        grad_of(f, self.dofs, self.grad)
    }

    fn aux_gradient(&self, f: &[f64]) -> [f64; 2] {
        grad_of(f, self.aux_dofs, self.aux_grad)
    }
}

fn grad_of(f: &[f64], dofs: &[usize], grads: &[[f64; 2]]) -> [f64; 2] {
    let mut g = [0.0; 2];
    for (&d, gr) in dofs.iter().zip(grads) {
        g[0] += f[d] * gr[0];
        g[1] += f[d] * gr[1];
    }
    g
}

type MatrixIntegrand<'f> = &'f mut dyn FnMut(&QuadPoint, usize, usize) -> f64;
type VectorIntegrand<'f> = &'f mut dyn FnMut(&QuadPoint, usize) -> f64;

/// Cell loop for forms on `space` whose coefficients may also live on `aux`.
struct FormLoop<'s> {
    space: &'s LagrangeSpace,
    aux: &'s LagrangeSpace,
    tab: Tabulation,
    aux_tab: Tabulation,
}

impl<'s> FormLoop<'s> {
    fn new(space: &'s LagrangeSpace, aux: &'s LagrangeSpace) -> Self {
        let rule = form_rule(&[space.degree(), aux.degree()]);
        FormLoop { space, aux, tab: Tabulation::new(space.basis(), &rule), aux_tab: Tabulation::new(aux.basis(), &rule) }
    }

    fn assemble(
        &self,
        scatter: Option<&ScatterMap>,
        mut matrix: Option<MatrixIntegrand<'_>>,
        mut vector: Option<VectorIntegrand<'_>>,
    ) -> (Option<CsrMatrix>, Vec<f64>) {
        let mesh = self.space.mesh();
        let n = self.tab.dim;
        let mut mat = scatter.map(|s| CsrMatrix::zeros(s.pattern().clone()));
        let mut local = vec![0.0; n * n];
        let mut rhs = vec![0.0; self.space.ndofs()];
        let mut grad = vec![[0.0; 2]; n];
        let mut aux_grad = vec![[0.0; 2]; self.aux_tab.dim];
        for c in 0..mesh.num_cells() {
            let geom = CellGeometry::new(mesh.cell_coordinates(c));
            let dofs = self.space.cell_dofs(c);
            local.iter_mut().for_each(|v| *v = 0.0);
            for q in 0..self.tab.num_points() {
                self.tab.physical_grads(&geom, q, &mut grad);
                self.aux_tab.physical_grads(&geom, q, &mut aux_grad);
                let pt = QuadPoint {
                    x: geom.point(self.tab.points[q]),
                    phi: self.tab.values_at(q),
                    grad: &grad,
                    aux_grad: &aux_grad,
                    dofs,
                    aux_dofs: self.aux.cell_dofs(c),
                };
                let w = self.tab.weights[q] * geom.area;
                if let Some(f) = matrix.as_mut() {
                    for i in 0..n {
                        for j in 0..n {
                            local[i * n + j] += w * f(&pt, i, j);
                        }
                    }
                }
                if let Some(f) = vector.as_mut() {
                    for (i, &d) in dofs.iter().enumerate() {
                        rhs[d] += w * f(&pt, i);
                    }
                }
            }
            if let Some(m) = mat.as_mut() {
                let pattern = m.pattern().clone();
                let values = m.values_mut();
                for (i, &gi) in dofs.iter().enumerate() {
                    for (j, &gj) in dofs.iter().enumerate() {
                        values[pattern.find(gi, gj).expect("cell entry in pattern")] += local[i * n + j];
                    }
                }
            }
        }
        (mat, rhs)
    }
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// IPCS that assembles every bilinear and linear form by direct quadrature of
/// the coefficient fields each time it is needed. It shares no operator code
/// with the preassembled solver and serves as its reference.
pub struct NaiveStepper<'p> {
    problem: &'p dyn Problem,
    velocity: Arc<LagrangeSpace>,
    pressure: Arc<LagrangeSpace>,
    params: NSParameters,
    bcs: BoundaryData,
    vv: ScatterMap,
    pp: ScatterMap,
    velocity_lumped: Vec<f64>,
    pressure_lumped: Vec<f64>,
}

impl<'p> NaiveStepper<'p> {
    pub fn new(
        problem: &'p dyn Problem,
        params: &NSParameters,
        bcs: &BoundaryData,
        velocity: &Arc<LagrangeSpace>,
        pressure: &Arc<LagrangeSpace>,
    ) -> Result<Self> {
        let lumped = |s: &LagrangeSpace| FormLoop::new(s, s).assemble(None, None, Some(&mut |p, i| p.phi[i])).1;
        let velocity_lumped = lumped(velocity);
        super::check_lumped(&velocity_lumped, params)?;
        Ok(NaiveStepper {
            problem,
            velocity_lumped,
            pressure_lumped: lumped(pressure),
            vv: ScatterMap::new(velocity, velocity)?,
            pp: ScatterMap::new(pressure, pressure)?,
            velocity: velocity.clone(),
            pressure: pressure.clone(),
            params: params.clone(),
            bcs: bcs.clone(),
        })
    }

    fn forms(&self) -> FormLoop<'_> {
        FormLoop::new(&self.velocity, &self.pressure)
    }
}

impl Stepper for NaiveStepper<'_> {
    fn assemble_first_inner_iter(&mut self, _state: &SolutionState) -> Result<Option<f64>> {
        Ok(None)
    }

    fn tentative_velocity(&mut self, state: &mut SolutionState, k: usize) -> Result<SolveInfo> {
        let (dt, nu) = (self.params.dt, self.params.nu);
        let problem = self.problem;
        let u1 = [&state.velocity_prev[0].dofs[..], &state.velocity_prev[1].dofs[..]];
        let u2 = [&state.velocity_prev2[0].dofs[..], &state.velocity_prev2[1].dofs[..]];
        let p_star = &state.pressure.dofs[..];
        let explicit = self.params.convection == Convection::Abe;
        let ubar = |p: &QuadPoint| [1.5 * p.value(u1[0]) - 0.5 * p.value(u2[0]), 1.5 * p.value(u1[1]) - 0.5 * p.value(u2[1])];

        let mut a = |p: &QuadPoint, i: usize, j: usize| {
            let conv = if explicit { 0.0 } else { 0.5 * dot(ubar(p), p.grad[j]) * p.phi[i] };
            p.phi[j] * p.phi[i] / dt + conv + 0.5 * nu * dot(p.grad[j], p.grad[i])
        };
        let mut l = |p: &QuadPoint, i: usize| {
            let g1 = p.gradient(u1[k]);
            let conv = if explicit {
                let g2 = p.gradient(u2[k]);
                let w1 = [p.value(u1[0]), p.value(u1[1])];
                let w2 = [p.value(u2[0]), p.value(u2[1])];
                1.5 * dot(w1, g1) - 0.5 * dot(w2, g2)
            } else {
                0.5 * dot(ubar(p), g1)
            };
            let f = problem.body_force(p.x)[k];
            (p.value(u1[k]) / dt - conv - p.aux_gradient(p_star)[k] + f) * p.phi[i] - 0.5 * nu * dot(g1, p.grad[i])
        };
        let (mat, mut b) = self.forms().assemble(Some(&self.vv), Some(&mut a), Some(&mut l));
        let mut mat = mat.expect("matrix requested");
        let bc = &self.bcs.velocity[k];
        mat.set_identity_rows(&bc.dofs)?;
        bc.apply_to_vector(&mut b);
        solve(&mat, &b, &mut state.velocity[k].dofs, &self.params.velocity_krylov)
    }

    fn pressure_correction(&mut self, state: &mut SolutionState) -> Result<PressureInfo> {
        let dt = self.params.dt;
        let p_star = state.pressure.dofs.clone();
        let ui = [&state.velocity[0].dofs[..], &state.velocity[1].dofs[..]];
        let mut a = |p: &QuadPoint, i: usize, j: usize| dot(p.grad[j], p.grad[i]);
        let mut l = |p: &QuadPoint, i: usize| {
            let div = p.aux_gradient(ui[0])[0] + p.aux_gradient(ui[1])[1];
            dot(p.gradient(&p_star), p.grad[i]) - div / dt * p.phi[i]
        };
        let forms = FormLoop::new(&self.pressure, &self.velocity);
        let (mat, mut rhs) = forms.assemble(Some(&self.pp), Some(&mut a), Some(&mut l));
        let mut mat = mat.expect("matrix requested");
        let has_bcs = !self.bcs.pressure.is_empty();
        let cfg = pressure_config(&self.params, has_bcs);
        let mut info = PressureInfo::default();
        if has_bcs {
            mat.set_identity_rows(&self.bcs.pressure.dofs)?;
            self.bcs.pressure.apply_to_vector(&mut rhs);
            info.solve = Some(solve(&mat, &rhs, &mut state.pressure.dofs, &cfg)?);
        } else {
            info.rhs_defect = project_compatible(&mut rhs);
            info.solve = Some(solve(&mat, &rhs, &mut state.pressure.dofs, &cfg)?);
            subtract_mean(&mut state.pressure.dofs, &self.pressure_lumped);
        }
        for ((phi, p), o) in state.correction.dofs.iter_mut().zip(&state.pressure.dofs).zip(&p_star) {
            *phi = p - o;
        }
        Ok(info)
    }

    fn velocity_update(&mut self, state: &mut SolutionState) -> Result<usize> {
        let dt = self.params.dt;
        let has_bcs = !self.bcs.velocity_dofs().is_empty();
        let mut iterations = 0;
        for k in 0..2 {
            let phi = &state.correction.dofs[..];
            let u = &mut state.velocity[k].dofs;
            match self.params.velocity_update {
                VelocityUpdate::Lumping => {
                    let (_, g) = self.forms().assemble(None, None, Some(&mut |p: &QuadPoint, i| p.aux_gradient(phi)[k] * p.phi[i]));
                    for ((u, g), m) in u.iter_mut().zip(&g).zip(&self.velocity_lumped) {
                        *u -= dt * g / m;
                    }
                }
                VelocityUpdate::MassSolve => {
                    let ui: &[f64] = u;
                    let mut a = |p: &QuadPoint, i: usize, j: usize| p.phi[j] * p.phi[i];
                    let mut l = |p: &QuadPoint, i: usize| (p.value(ui) - dt * p.aux_gradient(phi)[k]) * p.phi[i];
                    let (mat, mut rhs) = self.forms().assemble(Some(&self.vv), Some(&mut a), Some(&mut l));
                    let mut mat = mat.expect("matrix requested");
                    if has_bcs {
                        mat.set_identity_rows(self.bcs.velocity_dofs())?;
                        self.bcs.velocity[k].apply_to_vector(&mut rhs);
                    }
                    iterations += solve(&mat, &rhs, u, &mass_config(&self.params, has_bcs))?.iterations;
                }
            }
            self.bcs.velocity[k].apply_to_vector(u);
        }
        Ok(iterations)
    }

    fn scalar_step(&mut self, state: &mut SolutionState, index: usize) -> Result<SolveInfo> {
        let dt = self.params.dt;
        let problem = self.problem;
        let u1 = [&state.velocity_prev[0].dofs[..], &state.velocity_prev[1].dofs[..]];
        let u2 = [&state.velocity_prev2[0].dofs[..], &state.velocity_prev2[1].dofs[..]];
        let scalar = &state.scalars[index];
        let (d, c1) = (scalar.diffusivity, &scalar.previous.dofs[..]);
        let ubar = |p: &QuadPoint| [1.5 * p.value(u1[0]) - 0.5 * p.value(u2[0]), 1.5 * p.value(u1[1]) - 0.5 * p.value(u2[1])];
        let mut a = |p: &QuadPoint, i: usize, j: usize| {
            p.phi[j] * p.phi[i] / dt + 0.5 * dot(ubar(p), p.grad[j]) * p.phi[i] + 0.5 * d * dot(p.grad[j], p.grad[i])
        };
        let mut l = |p: &QuadPoint, i: usize| {
            let g = p.gradient(c1);
            (p.value(c1) / dt - 0.5 * dot(ubar(p), g) + problem.scalar_source(index, p.x)) * p.phi[i]
                - 0.5 * d * dot(g, p.grad[i])
        };
        let forms = FormLoop::new(&self.velocity, &self.velocity);
        let (mat, mut b) = forms.assemble(Some(&self.vv), Some(&mut a), Some(&mut l));
        let mut mat = mat.expect("matrix requested");
        let bc = &self.bcs.scalars[index];
        mat.set_identity_rows(&bc.dofs)?;
        bc.apply_to_vector(&mut b);
        solve(&mat, &b, &mut state.scalars[index].value.dofs, &self.params.velocity_krylov)
    }

    fn divergence(&self, u: [&[f64]; 2]) -> Result<Vec<f64>> {
        let forms = FormLoop::new(&self.pressure, &self.velocity);
        let (_, b) = forms.assemble(
            None,
            None,
            Some(&mut |p: &QuadPoint, i| (p.aux_gradient(u[0])[0] + p.aux_gradient(u[1])[1]) * p.phi[i]),
        );
        Ok(b)
    }
}
