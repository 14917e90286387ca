//! Error norms, convergence orders and the Taylor-Green study runners.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fem::{CellGeometry, Field, QuadratureRule, Tabulation};
use crate::fracstep::{self, Hooks, NSParameters, SolutionState};
use crate::mesh::Point;
use crate::problems::{Problem, ReferenceSolution, TaylorGreen2D};
use crate::sparse::CsrMatrix;

/// Exactness of the rule used for error integrals.
pub const ERROR_QUADRATURE_DEGREE: usize = 12;

pub fn error_rule() -> QuadratureRule {
    QuadratureRule::with_degree(ERROR_QUADRATURE_DEGREE)
}

/// `sqrt(sum_k int (f_k - e_k)^2)` over the mesh of the fields, which must
/// share one space.
pub fn l2_error_components(fields: &[&Field], exact: &dyn Fn(Point) -> Vec<f64>, rule: &QuadratureRule) -> f64 {
    let Some(first) = fields.first() else { return 0.0 };
    let space = first.space();
    let mesh = space.mesh();
    let tab = Tabulation::new(space.basis(), rule);
    let mut sum = 0.0;
    for c in 0..mesh.num_cells() {
        let geom = CellGeometry::new(mesh.cell_coordinates(c));
        let dofs = space.cell_dofs(c);
        for q in 0..tab.num_points() {
            let phi = tab.values_at(q);
            let e = exact(geom.point(tab.points[q]));
            let mut local = 0.0;
            for (k, f) in fields.iter().enumerate() {
                let fh: f64 = dofs.iter().zip(phi).map(|(&d, p)| f.dofs[d] * p).sum();
                local += (fh - e[k]) * (fh - e[k]);
            }
            sum += tab.weights[q] * geom.area * local;
        }
    }
    libm::sqrt(sum)
}

pub fn l2_error(field: &Field, exact: &dyn Fn(Point) -> f64, rule: &QuadratureRule) -> f64 {
    l2_error_components(&[field], &|x| alloc::vec![exact(x)], rule)
}

pub fn l2_error_vector(fields: [&Field; 2], exact: &dyn Fn(Point) -> [f64; 2], rule: &QuadratureRule) -> f64 {
    l2_error_components(&fields, &|x| exact(x).to_vec(), rule)
}

/// `k_i = ln(E_i / E_{i-1}) / ln(r_i / r_{i-1})` for consecutive pairs.
pub fn convergence_order(errors: &[f64], resolutions: &[f64]) -> Result<Vec<f64>> {
    if errors.len() != resolutions.len() || errors.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "need matching lists of length >= 2, got {} errors and {} resolutions",
            errors.len(),
            resolutions.len()
        )));
    }
    if errors.iter().chain(resolutions).any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidInput("errors and resolutions must be positive".into()));
    }
    Ok(errors
        .windows(2)
        .zip(resolutions.windows(2))
        .map(|(e, r)| libm::log(e[1] / e[0]) / libm::log(r[1] / r[0]))
        .collect())
}

/// One line of a convergence table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    /// `h` for spatial studies, `dt` for temporal ones.
    pub resolution: f64,
    pub err_u: f64,
    pub err_p: f64,
    pub order_u: Option<f64>,
    pub order_p: Option<f64>,
}

/// Builds rows with orders from `(resolution, err_u, err_p)` triples.
pub fn convergence_table(samples: &[(f64, f64, f64)]) -> Result<Vec<ConvergenceRow>> {
    let res: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let eu: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let ep: Vec<f64> = samples.iter().map(|s| s.2).collect();
    let (ku, kp) = if samples.len() >= 2 {
        (convergence_order(&eu, &res)?, convergence_order(&ep, &res)?)
    } else {
        (Vec::new(), Vec::new())
    };
    Ok(samples
        .iter()
        .enumerate()
        .map(|(i, s)| ConvergenceRow {
            resolution: s.0,
            err_u: s.1,
            err_p: s.2,
            order_u: i.checked_sub(1).map(|j| ku[j]),
            order_p: i.checked_sub(1).map(|j| kp[j]),
        })
        .collect())
}

/// `||f - I_h e||`: the error against the nodal interpolant of `exact` in the
/// field's own space, which removes the interpolation error from the measure.
pub fn interpolant_error(field: &Field, exact: &dyn Fn(Point) -> f64, rule: &QuadratureRule) -> f64 {
    let mut diff = field.space().interpolate(exact);
    diff.dofs.iter_mut().zip(&field.dofs).for_each(|(e, f)| *e = f - *e);
    l2_error(&diff, &|_| 0.0, rule)
}

/// Root mean square of the nodal error vector `f - I_h e` over all dofs of
/// the given fields.
pub fn nodal_rms_error(fields: &[&Field], exact: &dyn Fn(Point) -> Vec<f64>) -> f64 {
    let mut sum = 0.0;
    let mut count = 0;
    for (k, f) in fields.iter().enumerate() {
        let interp = f.space().interpolate(|x| exact(x)[k]);
        sum += f.dofs.iter().zip(&interp.dofs).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        count += f.dofs.len();
    }
    if count == 0 {
        return 0.0;
    }
    libm::sqrt(sum / count as f64)
}

/// Velocity and pressure errors of `state` against the interpolated reference
/// at `t` (velocity) and `t_pressure` (pressure), as nodal RMS values.
pub fn solution_errors(state: &SolutionState, exact: &dyn ReferenceSolution, t: f64, t_pressure: f64) -> (f64, f64) {
    let eu = nodal_rms_error(&[&state.velocity[0], &state.velocity[1]], &|x| exact.velocity(x, t).to_vec());
    let ep = nodal_rms_error(&[&state.pressure], &|x| alloc::vec![exact.pressure(x, t_pressure)]);
    (eu, ep)
}

/// Outcome of one Taylor-Green run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaylorGreenSample {
    pub h: f64,
    pub dt: f64,
    pub err_u: f64,
    pub err_p: f64,
}

/// Runs the Taylor-Green problem and measures errors at the final time.
pub fn run_taylor_green(problem: &TaylorGreen2D, params: &NSParameters) -> Result<TaylorGreenSample> {
    let mut problem = problem.clone();
    problem.configure(params);
    let out = fracstep::run(&problem, params, &mut Hooks::none())?;
    let t = out.state.t;
    // the pressure of a finished step lives half a step behind the velocity
    let (err_u, err_p) = solution_errors(&out.state, problem.exact(), t, t - 0.5 * params.dt);
    let h = out.state.velocity_space().mesh().mesh_size_h();
    Ok(TaylorGreenSample { h, dt: params.dt, err_u, err_p })
}

/// Mesh refinement study: one run per entry of `ns`, errors against `h`.
pub fn run_spatial_study(template: &TaylorGreen2D, params: &NSParameters, ns: &[usize]) -> Result<Vec<ConvergenceRow>> {
    let mut samples = Vec::with_capacity(ns.len());
    for &n in ns {
        let mut problem = template.clone();
        problem.n = n;
        let s = run_taylor_green(&problem, params)?;
        samples.push((s.h, s.err_u, s.err_p));
    }
    convergence_table(&samples)
}

/// Time-step study on a fixed mesh: errors against `dt`.
pub fn run_temporal_study(template: &TaylorGreen2D, params: &NSParameters, dts: &[f64]) -> Result<Vec<ConvergenceRow>> {
    let mut samples = Vec::with_capacity(dts.len());
    for &dt in dts {
        let s = run_taylor_green(template, &NSParameters { dt, ..params.clone() })?;
        samples.push((s.dt, s.err_u, s.err_p));
    }
    convergence_table(&samples)
}

/// `1/2 sum_k u_k^T M u_k`
pub fn kinetic_energy(mass: &CsrMatrix, velocity: [&[f64]; 2]) -> Result<f64> {
    let mut e = 0.0;
    for u in velocity {
        let mu = mass.matvec(u)?;
        e += u.iter().zip(&mu).map(|(a, b)| a * b).sum::<f64>();
    }
    Ok(0.5 * e)
}
