use alloc::sync::Arc;
use alloc::vec::Vec;

use super::{
    mass_config, pressure_config, project_compatible, BoundaryData, Convection, NSParameters, PressureInfo,
    SolutionState, Stepper, VelocityUpdate,
};
use crate::assembly::{self, Operators};
use crate::error::Result;
use crate::fem::LagrangeSpace;
use crate::problems::Problem;
use crate::sparse::{solve, subtract_mean, CsrMatrix, SolveInfo};

/// IPCS on preassembled operators: the coefficient matrix is rebuilt once per
/// step from `M`, `K` and the convection matrix with in-pattern axpy.
pub struct OptimizedStepper {
    pub ops: Operators,
    params: NSParameters,
    bcs: BoundaryData,
    body_force: [Vec<f64>; 2],
    b_tmp: [Vec<f64>; 2],
    /// Convection matrix of the current step (scalars, explicit convection).
    convection: CsrMatrix,
    /// Copy of the intermediate coefficient matrix, kept only for verification.
    intermediate: Option<CsrMatrix>,
    mass_bc: Option<CsrMatrix>,
    k_hat_bc: Option<CsrMatrix>,
    /// Explicit convection vectors of the last step, tagged with the step they serve.
    abe_cache: Option<(usize, [Vec<f64>; 2])>,
    scalar_sources: Vec<Vec<f64>>,
    scalar_matrix: CsrMatrix,
}

impl OptimizedStepper {
    pub fn new(
        problem: &dyn Problem,
        params: &NSParameters,
        bcs: &BoundaryData,
        velocity: &Arc<LagrangeSpace>,
        pressure: &Arc<LagrangeSpace>,
    ) -> Result<Self> {
        let ops = Operators::new(velocity.clone(), pressure.clone(), params.low_memory)?;
        super::check_lumped(&ops.m_lumped, params)?;
        let body_force = assembly::assemble_body_force(velocity, &|x| problem.body_force(x));
        let mass_bc = if bcs.velocity_dofs().is_empty() || params.velocity_update != VelocityUpdate::MassSolve {
            None
        } else {
            let mut m = ops.m.clone();
            m.set_identity_rows(bcs.velocity_dofs())?;
            Some(m)
        };
        let k_hat_bc = if bcs.pressure.is_empty() {
            None
        } else {
            let mut k = ops.k_hat.clone();
            k.set_identity_rows(&bcs.pressure.dofs)?;
            Some(k)
        };
        let nscalars = bcs.scalars.len();
        let scalar_sources = (0..nscalars).map(|i| assembly::assemble_source(velocity, &|x| problem.scalar_source(i, x))).collect();
        let n = velocity.ndofs();
        Ok(OptimizedStepper {
            convection: ops.a.clone(),
            scalar_matrix: ops.a.clone(),
            ops,
            params: params.clone(),
            bcs: bcs.clone(),
            body_force,
            b_tmp: super::zero_vectors(n),
            intermediate: None,
            mass_bc,
            k_hat_bc,
            abe_cache: None,
            scalar_sources,
        })
    }

    fn assemble_convection(&mut self, u: [&[f64]; 2], into_a: bool) -> Result<()> {
        let ops = &mut self.ops;
        let target = if into_a { &mut ops.a } else { &mut self.convection };
        assembly::convection_into(&ops.velocity, &ops.tab, &ops.scatter, u, target)
    }

    /// Algorithm for the Adams-Bashforth/Crank-Nicolson coefficient matrix and
    /// the old-level part of the right-hand side. Returns the identity defect
    /// when verification is on.
    fn assemble_abcn(&mut self, state: &SolutionState) -> Result<Option<f64>> {
        let dt = self.params.dt;
        let nu = self.params.nu;
        let ubar: Vec<Vec<f64>> = (0..2)
            .map(|k| {
                state.velocity_prev[k]
                    .dofs
                    .iter()
                    .zip(&state.velocity_prev2[k].dofs)
                    .map(|(a, b)| 1.5 * a - 0.5 * b)
                    .collect()
            })
            .collect();
        self.assemble_convection([&ubar[0], &ubar[1]], true)?;
        if !self.bcs.scalars.is_empty() {
            self.convection.values_mut().copy_from_slice(self.ops.a.values());
        }
        let a = &mut self.ops.a;
        a.scale(-0.5);
        a.axpy(1.0 / dt, &self.ops.m)?;
        a.axpy(-0.5 * nu, &self.ops.k)?;
        for k in 0..2 {
            let b = &mut self.b_tmp[k];
            b.copy_from_slice(&self.body_force[k]);
            a.matvec_add(1.0, &state.velocity_prev[k].dofs, b)?;
        }
        if self.params.verify_assembly {
            match &mut self.intermediate {
                Some(m) => m.values_mut().copy_from_slice(a.values()),
                None => self.intermediate = Some(a.clone()),
            }
        }
        a.scale(-1.0);
        a.axpy(2.0 / dt, &self.ops.m)?;
        let defect = self.intermediate.as_ref().filter(|_| self.params.verify_assembly).map(|inter| {
            let two_m = 2.0 / dt;
            a.values()
                .iter()
                .zip(inter.values())
                .zip(self.ops.m.values())
                .map(|((f, i), m)| (f + i - two_m * m).abs())
                .fold(0.0, f64::max)
        });
        Ok(defect)
    }

    fn assemble_abe(&mut self, state: &SolutionState) -> Result<()> {
        let dt = self.params.dt;
        let nu = self.params.nu;
        let n = state.n;
        let prev = [&state.velocity_prev[0].dofs[..], &state.velocity_prev[1].dofs[..]];
        let prev2 = [&state.velocity_prev2[0].dofs[..], &state.velocity_prev2[1].dofs[..]];

        self.assemble_convection(prev, false)?;
        let conv_prev = [self.convection.matvec(prev[0])?, self.convection.matvec(prev[1])?];
        let conv_prev2 = match self.abe_cache.take() {
            Some((step, v)) if step == n => v,
            _ => {
                self.assemble_convection(prev2, false)?;
                [self.convection.matvec(prev2[0])?, self.convection.matvec(prev2[1])?]
            }
        };
        for k in 0..2 {
            let b = &mut self.b_tmp[k];
            self.ops.m.matvec_into(prev[k], b)?;
            b.iter_mut().for_each(|v| *v /= dt);
            self.ops.k.matvec_add(-0.5 * nu, prev[k], b)?;
            for i in 0..b.len() {
                b[i] += self.body_force[k][i] - 1.5 * conv_prev[k][i] + 0.5 * conv_prev2[k][i];
            }
        }
        self.abe_cache = Some((n + 1, conv_prev));

        let a = &mut self.ops.a;
        a.set_zero();
        a.axpy(1.0 / dt, &self.ops.m)?;
        a.axpy(0.5 * nu, &self.ops.k)?;
        if !self.bcs.scalars.is_empty() {
            let ubar: Vec<Vec<f64>> =
                (0..2).map(|k| prev[k].iter().zip(prev2[k]).map(|(a, b)| 1.5 * a - 0.5 * b).collect()).collect();
            self.assemble_convection([&ubar[0], &ubar[1]], false)?;
        }
        Ok(())
    }
}

impl Stepper for OptimizedStepper {
    fn assemble_first_inner_iter(&mut self, state: &SolutionState) -> Result<Option<f64>> {
        let defect = match self.params.convection {
            Convection::Abcn => self.assemble_abcn(state)?,
            Convection::Abe => {
                self.assemble_abe(state)?;
                None
            }
        };
        self.ops.a.set_identity_rows(self.bcs.velocity_dofs())?;
        Ok(defect)
    }

    fn tentative_velocity(&mut self, state: &mut SolutionState, k: usize) -> Result<SolveInfo> {
        let mut b = self.b_tmp[k].clone();
        let grad = self.ops.gradient(k, &state.pressure.dofs)?;
        b.iter_mut().zip(&grad).for_each(|(b, g)| *b -= g);
        self.bcs.velocity[k].apply_to_vector(&mut b);
        solve(&self.ops.a, &b, &mut state.velocity[k].dofs, &self.params.velocity_krylov)
    }

    fn pressure_correction(&mut self, state: &mut SolutionState) -> Result<PressureInfo> {
        let dt = self.params.dt;
        let mut rhs = self.ops.k_hat.matvec(&state.pressure.dofs)?;
        let div = self.ops.divergence([&state.velocity[0].dofs, &state.velocity[1].dofs])?;
        rhs.iter_mut().zip(&div).for_each(|(r, d)| *r -= d / dt);
        let old = state.pressure.dofs.clone();
        let cfg = pressure_config(&self.params, self.k_hat_bc.is_some());
        let mut info = PressureInfo::default();
        match &self.k_hat_bc {
            None => {
                info.rhs_defect = project_compatible(&mut rhs);
                info.solve = Some(solve(&self.ops.k_hat, &rhs, &mut state.pressure.dofs, &cfg)?);
                subtract_mean(&mut state.pressure.dofs, &self.ops.p_lumped);
            }
            Some(k_bc) => {
                self.bcs.pressure.apply_to_vector(&mut rhs);
                info.solve = Some(solve(k_bc, &rhs, &mut state.pressure.dofs, &cfg)?);
            }
        }
        for ((phi, p), o) in state.correction.dofs.iter_mut().zip(&state.pressure.dofs).zip(&old) {
            *phi = p - o;
        }
        Ok(info)
    }

    fn velocity_update(&mut self, state: &mut SolutionState) -> Result<usize> {
        let dt = self.params.dt;
        let mut iterations = 0;
        for k in 0..2 {
            let grad = self.ops.gradient(k, &state.correction.dofs)?;
            let u = &mut state.velocity[k].dofs;
            match self.params.velocity_update {
                VelocityUpdate::Lumping => {
                    for ((u, g), m) in u.iter_mut().zip(&grad).zip(&self.ops.m_lumped) {
                        *u -= dt * g / m;
                    }
                }
                VelocityUpdate::MassSolve => {
                    let mut rhs = self.ops.m.matvec(u)?;
                    rhs.iter_mut().zip(&grad).for_each(|(r, g)| *r -= dt * g);
                    let matrix = match &self.mass_bc {
                        Some(m) => {
                            self.bcs.velocity[k].apply_to_vector(&mut rhs);
                            m
                        }
                        None => &self.ops.m,
                    };
                    let cfg = mass_config(&self.params, self.mass_bc.is_some());
                    iterations += solve(matrix, &rhs, u, &cfg)?.iterations;
                }
            }
            self.bcs.velocity[k].apply_to_vector(u);
        }
        Ok(iterations)
    }

    fn scalar_step(&mut self, state: &mut SolutionState, index: usize) -> Result<SolveInfo> {
        let dt = self.params.dt;
        let scalar = &mut state.scalars[index];
        let d = scalar.diffusivity;
        let a = &mut self.scalar_matrix;
        a.set_zero();
        a.axpy(-0.5, &self.convection)?;
        a.axpy(1.0 / dt, &self.ops.m)?;
        a.axpy(-0.5 * d, &self.ops.k)?;
        let mut b = self.scalar_sources[index].clone();
        a.matvec_add(1.0, &scalar.previous.dofs, &mut b)?;
        a.scale(-1.0);
        a.axpy(2.0 / dt, &self.ops.m)?;
        let bc = &self.bcs.scalars[index];
        a.set_identity_rows(&bc.dofs)?;
        bc.apply_to_vector(&mut b);
        solve(a, &b, &mut scalar.value.dofs, &self.params.velocity_krylov)
    }

    fn divergence(&self, u: [&[f64]; 2]) -> Result<Vec<f64>> {
        self.ops.divergence(u)
    }
}

impl OptimizedStepper {
    /// Current coefficient matrix (after boundary rows).
    pub fn coefficient_matrix(&self) -> &CsrMatrix {
        &self.ops.a
    }

    /// Old-level right-hand side of the tentative step, without the pressure gradient.
    pub fn old_level_rhs(&self) -> &[Vec<f64>; 2] {
        &self.b_tmp
    }
}

impl OptimizedStepper {
    /// Convection matrix of the current step.
    pub fn convection_matrix(&self) -> &CsrMatrix {
        &self.convection
    }

    /// Coefficient matrix of the last scalar solve (after boundary rows).
    pub fn scalar_matrix(&self) -> &CsrMatrix {
        &self.scalar_matrix
    }
}
