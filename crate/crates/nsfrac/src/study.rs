//! Taylor-Green convergence studies with independent rows run in parallel.
//!
//! Rows are collected by index, so the table does not depend on scheduling.

use nsfrac_core::fracstep::NSParameters;
use nsfrac_core::problems::TaylorGreen2D;
use nsfrac_core::verify::{convergence_table, run_taylor_green, ConvergenceRow, TaylorGreenSample};
use rayon::prelude::*;

/// Mesh sizes of the spatial study.
pub const SPATIAL_NS: [usize; 5] = [10, 20, 30, 40, 50];
/// Time steps of the temporal study.
pub const TEMPORAL_DTS: [f64; 5] = [0.5, 0.25, 0.125, 0.0625, 0.03125];
/// Cells per side of the temporal study mesh.
pub const TEMPORAL_N: usize = 16;

fn table(samples: Vec<TaylorGreenSample>, by_dt: bool) -> nsfrac_core::Result<Vec<ConvergenceRow>> {
    let triples: Vec<_> = samples.iter().map(|s| (if by_dt { s.dt } else { s.h }, s.err_u, s.err_p)).collect();
    convergence_table(&triples)
}

pub fn spatial(template: &TaylorGreen2D, params: &NSParameters, ns: &[usize]) -> nsfrac_core::Result<Vec<ConvergenceRow>> {
    let samples = ns
        .par_iter()
        .map(|&n| {
            let mut problem = template.clone();
            problem.n = n;
            run_taylor_green(&problem, params)
        })
        .collect::<nsfrac_core::Result<Vec<_>>>()?;
    table(samples, false)
}

pub fn temporal(template: &TaylorGreen2D, params: &NSParameters, dts: &[f64]) -> nsfrac_core::Result<Vec<ConvergenceRow>> {
    let samples = dts
        .par_iter()
        .map(|&dt| run_taylor_green(template, &NSParameters { dt, ..params.clone() }))
        .collect::<nsfrac_core::Result<Vec<_>>>()?;
    table(samples, true)
}

/// Parameters of the temporal study: P4P3 to `T = 6`.
pub fn temporal_parameters(base: &NSParameters) -> NSParameters {
    NSParameters { velocity_degree: 4, pressure_degree: 3, t_end: 6.0, ..base.clone() }
}
