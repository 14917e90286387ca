use core::f64::consts::PI;

use super::{set_count, Problem, ReferenceSolution};
use crate::error::{Error, Result};
use crate::fem::LagrangeSpace;
use crate::fracstep::{BcMap, NSParameters};
use crate::mesh::{channel_stretch, Mesh, Point};
use crate::params::ParamValue;
use alloc::string::ToString;
use alloc::vec;

/// Plane channel between no-slip walls at `y = +-1`, periodic in `x`, driven by
/// a constant body force `u_tau^2` in the streamwise direction.
#[derive(Debug, Clone)]
pub struct Channel2D {
    pub nx: usize,
    pub ny: usize,
    pub re_tau: f64,
    poiseuille: Poiseuille,
}

impl Default for Channel2D {
    fn default() -> Self {
        let mut c = Channel2D { nx: 16, ny: 16, re_tau: 395.0, poiseuille: Poiseuille { nu: 2e-5, forcing: 0.0 } };
        let u_tau = c.friction_velocity();
        c.poiseuille.forcing = u_tau * u_tau;
        c
    }
}

pub const CHANNEL_LENGTH: f64 = 2.0 * PI;

pub fn walls(x: Point) -> bool {
    ((x[1] + 1.0) * (x[1] - 1.0)).abs() < 1e-8
}

impl Channel2D {
    /// `u_tau = nu Re_tau`.
    pub fn friction_velocity(&self) -> f64 {
        self.poiseuille.nu * self.re_tau
    }

    pub fn poiseuille(&self) -> &Poiseuille {
        &self.poiseuille
    }
}

/// Steady laminar profile `u = f/(2 nu) (1 - y^2)` for streamwise forcing `f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Poiseuille {
    pub nu: f64,
    pub forcing: f64,
}

impl Poiseuille {
    pub fn centerline(&self) -> f64 {
        self.forcing / (2.0 * self.nu)
    }

    /// `nu du/dy` at the lower wall; balances the forcing.
    pub fn wall_shear(&self) -> f64 {
        self.forcing
    }
}

impl ReferenceSolution for Poiseuille {
    fn velocity(&self, x: Point, _t: f64) -> [f64; 2] {
        [self.centerline() * (1.0 - x[1] * x[1]), 0.0]
    }

    fn pressure(&self, _x: Point, _t: f64) -> f64 {
        0.0
    }
}

impl Problem for Channel2D {
    fn name(&self) -> &str {
        "Channel2D"
    }

    fn keys(&self) -> &'static [&'static str] {
        &["Nx", "Ny", "Re_tau"]
    }

    fn set(&mut self, key: &str, value: &ParamValue) -> Result<bool> {
        match key {
            "Nx" => set_count(value, key, &mut self.nx),
            "Ny" => set_count(value, key, &mut self.ny),
            "Re_tau" => {
                let r = value.as_f64(key)?;
                if !(r > 0.0) {
                    return Err(Error::InvalidParameter("`Re_tau` must be positive".into()));
                }
                self.re_tau = r;
                Ok(true)
            }
            _ => Ok(false),
        }
    }

    fn default_parameters(&self) -> NSParameters {
        NSParameters { nu: 2e-5, dt: 0.05, velocity_degree: 1, ..NSParameters::default() }
    }

    fn configure(&mut self, params: &NSParameters) {
        self.poiseuille.nu = params.nu;
        let u_tau = self.friction_velocity();
        self.poiseuille.forcing = u_tau * u_tau;
    }

    fn mesh(&self) -> Result<Mesh> {
        let stretch = |x: Point| [x[0], channel_stretch(x[1])];
        Mesh::rectangle([0.0, -1.0], [CHANNEL_LENGTH, 1.0], [self.nx, self.ny], [true, false], Some(&stretch))
    }

    fn create_bcs(&self, velocity: &LagrangeSpace, _pressure: &LagrangeSpace) -> BcMap {
        let wall = velocity.dirichlet_bc(walls, |_| 0.0);
        let mut bcs = BcMap::new();
        bcs.insert("u0".to_string(), vec![wall.clone()]);
        bcs.insert("u1".to_string(), vec![wall]);
        bcs
    }

    fn body_force(&self, _x: Point) -> [f64; 2] {
        [self.poiseuille.forcing, 0.0]
    }

    fn reference(&self) -> Option<&dyn ReferenceSolution> {
        Some(&self.poiseuille)
    }
}
