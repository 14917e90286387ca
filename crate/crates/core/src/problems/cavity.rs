use super::{set_count, Problem};
use crate::error::Result;
use crate::fem::LagrangeSpace;
use crate::fracstep::{BcMap, BoundaryData, NSParameters, SolutionState};
use crate::mesh::{cavity_stretch, Mesh, Point};
use crate::params::ParamValue;
use alloc::string::ToString;
use alloc::vec;

/// Lid-driven flow in the unit square, mesh clustered toward all walls.
#[derive(Debug, Clone)]
pub struct DrivenCavity {
    pub nx: usize,
    pub ny: usize,
}

impl Default for DrivenCavity {
    fn default() -> Self {
        DrivenCavity { nx: 50, ny: 50 }
    }
}

/// Bottom and side walls (the corners of the lid included).
pub fn noslip(x: Point) -> bool {
    (x[0] * x[1] * (1.0 - x[0])).abs() < 1e-8
}

pub fn lid(x: Point) -> bool {
    (x[1] - 1.0).abs() < 1e-8
}

impl Problem for DrivenCavity {
    fn name(&self) -> &str {
        "DrivenCavity"
    }

    fn keys(&self) -> &'static [&'static str] {
        &["Nx", "Ny"]
    }

    fn set(&mut self, key: &str, value: &ParamValue) -> Result<bool> {
        match key {
            "Nx" => set_count(value, key, &mut self.nx),
            "Ny" => set_count(value, key, &mut self.ny),
            _ => Ok(false),
        }
    }

    fn default_parameters(&self) -> NSParameters {
        NSParameters { nu: 0.001, t_end: 1.0, dt: 0.001, ..NSParameters::default() }
    }

    fn mesh(&self) -> Result<Mesh> {
        let stretch = |x: Point| [cavity_stretch(x[0]), cavity_stretch(x[1])];
        Mesh::rectangle([0.0, 0.0], [1.0, 1.0], [self.nx, self.ny], [false, false], Some(&stretch))
    }

    fn create_bcs(&self, velocity: &LagrangeSpace, _pressure: &LagrangeSpace) -> BcMap {
        let wall = velocity.dirichlet_bc(noslip, |_| 0.0);
        let mut bcs = BcMap::new();
        bcs.insert("u0".to_string(), vec![velocity.dirichlet_bc(lid, |_| 1.0), wall.clone()]);
        bcs.insert("u1".to_string(), vec![velocity.dirichlet_bc(lid, |_| 0.0), wall]);
        bcs.insert("p".to_string(), vec![]);
        bcs
    }

    fn initialize(&self, state: &mut SolutionState, bcs: &BoundaryData) -> Result<()> {
        for k in 0..2 {
            bcs.velocity[k].apply_to_vector(&mut state.velocity_prev[k].dofs);
            bcs.velocity[k].apply_to_vector(&mut state.velocity_prev2[k].dofs);
        }
        Ok(())
    }
}
