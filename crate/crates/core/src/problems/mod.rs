//! Problem definitions: mesh, boundary conditions, initial state and forcing.

mod cavity;
mod channel;
mod taylor_green;

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fem::LagrangeSpace;
use crate::fracstep::{BcMap, BoundaryData, NSParameters, SolutionState};
use crate::mesh::{Mesh, Point};
use crate::params::{Overrides, ParamValue};

pub use cavity::DrivenCavity;
pub use channel::Channel2D;
pub use taylor_green::TaylorGreen2D;

/// A passive scalar carried by the flow.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarSpec {
    pub name: String,
    pub diffusivity: f64,
}

/// Exact velocity and pressure, used for error measurements.
pub trait ReferenceSolution {
    fn velocity(&self, x: Point, t: f64) -> [f64; 2];
    fn pressure(&self, x: Point, t: f64) -> f64;
}

/// A flow configuration. Everything except `name` and `mesh` has a default.
pub trait Problem {
    fn name(&self) -> &str;

    /// Problem-specific parameter keys accepted by [`Problem::set`].
    fn keys(&self) -> &'static [&'static str] {
        &[]
    }

    /// Sets a problem-specific parameter; `Ok(false)` for unknown keys.
    fn set(&mut self, _key: &str, _value: &ParamValue) -> Result<bool> {
        Ok(false)
    }

    /// Solver parameters this problem starts from before overrides.
    fn default_parameters(&self) -> NSParameters {
        NSParameters::default()
    }

    /// Called once the final solver parameters are known.
    fn configure(&mut self, _params: &NSParameters) {}

    fn mesh(&self) -> Result<Mesh>;

    fn create_bcs(&self, _velocity: &LagrangeSpace, _pressure: &LagrangeSpace) -> BcMap {
        BcMap::new()
    }

    /// Fills the previous velocity levels, the pressure and the scalars'
    /// previous values. The default leaves everything at rest.
    fn initialize(&self, _state: &mut SolutionState, _bcs: &BoundaryData) -> Result<()> {
        Ok(())
    }

    fn body_force(&self, _x: Point) -> [f64; 2] {
        [0.0, 0.0]
    }

    fn scalars(&self) -> Vec<ScalarSpec> {
        Vec::new()
    }

    fn scalar_source(&self, _index: usize, _x: Point) -> f64 {
        0.0
    }

    fn reference(&self) -> Option<&dyn ReferenceSolution> {
        None
    }
}

pub const PROBLEM_NAMES: &[&str] = &["TaylorGreen2D", "DrivenCavity", "Channel2D"];

/// Instantiates a built-in problem by name (aliases `TaylorGreen`, `Channel`).
pub fn by_name(name: &str) -> Result<Box<dyn Problem>> {
    match name {
        "TaylorGreen2D" | "TaylorGreen" => Ok(Box::new(TaylorGreen2D::default())),
        "DrivenCavity" => Ok(Box::new(DrivenCavity::default())),
        "Channel2D" | "Channel" => Ok(Box::new(Channel2D::default())),
        other => Err(Error::InvalidParameter(alloc::format!(
            "unknown problem `{other}` (available: {})",
            PROBLEM_NAMES.join(", ")
        ))),
    }
}

/// Applies overrides to a problem and its default parameters. Problem keys
/// reach the problem before any mesh is built.
pub fn configure(problem: &mut dyn Problem, overrides: &Overrides) -> Result<NSParameters> {
    let mut params = problem.default_parameters();
    for (key, value) in overrides {
        if params.set(key, value)? || problem.set(key, value)? {
            continue;
        }
        let mut valid: Vec<&str> = NSParameters::KEYS.to_vec();
        valid.extend_from_slice(problem.keys());
        return Err(Error::UnknownParameter { key: key.clone(), valid: valid.join(", ") });
    }
    params.validate()?;
    problem.configure(&params);
    Ok(params)
}

/// `by_name` followed by `configure`.
pub fn create(name: &str, overrides: &Overrides) -> Result<(Box<dyn Problem>, NSParameters)> {
    let mut problem = by_name(name)?;
    let params = configure(problem.as_mut(), overrides)?;
    Ok((problem, params))
}

fn set_count(value: &ParamValue, key: &str, target: &mut usize) -> Result<bool> {
    let n = value.as_usize(key)?;
    if n == 0 {
        return Err(Error::InvalidParameter(alloc::format!("`{key}` must be at least 1")));
    }
    *target = n;
    Ok(true)
}

#[cfg(test)]
mod tests;
