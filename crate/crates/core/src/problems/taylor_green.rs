use core::f64::consts::PI;

use libm::{cos, exp, sin};

use super::{set_count, Problem, ReferenceSolution};
use crate::error::Result;
use crate::fracstep::{BoundaryData, NSParameters, SolutionState};
use crate::mesh::{Mesh, Point};
use crate::params::ParamValue;

/// Decaying vortex array on the doubly periodic square `[0, 2]^2`.
#[derive(Debug, Clone)]
pub struct TaylorGreen2D {
    /// Cells per side.
    pub n: usize,
    /// Start the extra velocity level and the pressure from the exact solution
    /// at `-dt` and `-dt/2` instead of copying the initial state.
    pub staggered_start: bool,
    exact: TaylorGreenExact,
    dt: f64,
}

impl Default for TaylorGreen2D {
    fn default() -> Self {
        TaylorGreen2D { n: 10, staggered_start: false, exact: TaylorGreenExact { nu: 0.01 }, dt: 0.001 }
    }
}

impl TaylorGreen2D {
    pub fn new(n: usize) -> Self {
        TaylorGreen2D { n, ..Self::default() }
    }

    pub fn exact(&self) -> &TaylorGreenExact {
        &self.exact
    }
}

/// Closed-form Taylor-Green velocity and pressure for viscosity `nu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaylorGreenExact {
    pub nu: f64,
}

impl ReferenceSolution for TaylorGreenExact {
    fn velocity(&self, x: Point, t: f64) -> [f64; 2] {
        let decay = exp(-2.0 * PI * PI * self.nu * t);
        [-sin(PI * x[1]) * cos(PI * x[0]) * decay, sin(PI * x[0]) * cos(PI * x[1]) * decay]
    }

    fn pressure(&self, x: Point, t: f64) -> f64 {
        -0.25 * (cos(2.0 * PI * x[0]) + cos(2.0 * PI * x[1])) * exp(-4.0 * PI * PI * self.nu * t)
    }
}

impl Problem for TaylorGreen2D {
    fn name(&self) -> &str {
        "TaylorGreen2D"
    }

    fn keys(&self) -> &'static [&'static str] {
        &["N", "staggered_start"]
    }

    fn set(&mut self, key: &str, value: &ParamValue) -> Result<bool> {
        match key {
            "N" => set_count(value, key, &mut self.n),
            "staggered_start" => {
                self.staggered_start = value.as_bool(key)?;
                Ok(true)
            }
            _ => Ok(false),
        }
    }

    fn default_parameters(&self) -> NSParameters {
        NSParameters { nu: 0.01, dt: 0.001, t_end: 1.0, ..NSParameters::default() }
    }

    fn configure(&mut self, params: &NSParameters) {
        self.exact.nu = params.nu;
        self.dt = params.dt;
    }

    fn mesh(&self) -> Result<Mesh> {
        Mesh::rectangle([0.0, 0.0], [2.0, 2.0], [self.n, self.n], [true, true], None)
    }

    fn initialize(&self, state: &mut SolutionState, _bcs: &BoundaryData) -> Result<()> {
        let (t_prev2, t_p) = if self.staggered_start { (-self.dt, -0.5 * self.dt) } else { (0.0, 0.0) };
        let e = self.exact;
        for k in 0..2 {
            let v = state.velocity_space().clone();
            state.velocity_prev[k] = v.interpolate(|x| e.velocity(x, 0.0)[k]);
            state.velocity_prev2[k] = v.interpolate(|x| e.velocity(x, t_prev2)[k]);
        }
        let q = state.pressure_space().clone();
        state.pressure = q.interpolate(|x| e.pressure(x, t_p));
        Ok(())
    }

    fn reference(&self) -> Option<&dyn ReferenceSolution> {
        Some(&self.exact)
    }
}
