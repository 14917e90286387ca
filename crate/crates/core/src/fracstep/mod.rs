//! Fractional-step time loop.
//!
//! Each step runs `max_iters` inner iterations of {tentative velocity per
//! component, pressure correction}, then the velocity update, then the passive
//! scalars. Two interchangeable steppers implement the individual stages:
//! the preassembled [`Operators`](crate::assembly::Operators) path and a naive
//! path that assembles every variational form from scratch each step.

mod naive;
mod optimized;

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fem::{DirichletBC, Field, LagrangeSpace};
use crate::params::{Overrides, ParamValue};
use crate::problems::Problem;
use crate::sparse::{KrylovConfig, KrylovMethod, SolveInfo};

pub use naive::NaiveStepper;
pub use optimized::OptimizedStepper;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    IpcsNaive,
    IpcsAbcn,
}

impl SolverKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "ipcs_naive" | "IPCS" => Ok(SolverKind::IpcsNaive),
            "ipcs_abcn" | "IPCS_ABCN" => Ok(SolverKind::IpcsAbcn),
            other => Err(Error::InvalidParameter(format!(
                "unknown solver `{other}` (expected ipcs_naive/IPCS or ipcs_abcn/IPCS_ABCN)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::IpcsNaive => "ipcs_naive",
            SolverKind::IpcsAbcn => "ipcs_abcn",
        }
    }
}

/// Treatment of the convective term in the tentative velocity equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convection {
    /// Adams-Bashforth convecting velocity, Crank-Nicolson convected velocity.
    Abcn,
    /// Fully explicit Adams-Bashforth.
    Abe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VelocityUpdate {
    MassSolve,
    Lumping,
}

/// Solver parameters. Field names follow the command-line keys except `t_end` (`T`).
#[derive(Debug, Clone, PartialEq)]
pub struct NSParameters {
    pub nu: f64,
    pub dt: f64,
    pub t_end: f64,
    pub max_iters: usize,
    pub velocity_degree: usize,
    pub pressure_degree: usize,
    pub solver: SolverKind,
    pub convection: Convection,
    pub velocity_update: VelocityUpdate,
    pub low_memory: bool,
    pub velocity_krylov: KrylovConfig,
    pub pressure_krylov: KrylovConfig,
    pub mass_krylov: KrylovConfig,
    /// Steps between checkpoints; 0 disables them.
    pub checkpoint_interval: usize,
    /// Record the coefficient-matrix identity defect on every step.
    pub verify_assembly: bool,
}

impl Default for NSParameters {
    fn default() -> Self {
        NSParameters {
            nu: 0.01,
            dt: 0.01,
            t_end: 1.0,
            max_iters: 1,
            velocity_degree: 2,
            pressure_degree: 1,
            solver: SolverKind::IpcsAbcn,
            convection: Convection::Abcn,
            velocity_update: VelocityUpdate::MassSolve,
            low_memory: false,
            velocity_krylov: KrylovConfig::velocity(),
            pressure_krylov: KrylovConfig::pressure(),
            mass_krylov: KrylovConfig::mass(),
            checkpoint_interval: 0,
            verify_assembly: false,
        }
    }
}

impl NSParameters {
    pub const KEYS: &'static [&'static str] = &[
        "nu",
        "dt",
        "T",
        "max_iters",
        "velocity_degree",
        "pressure_degree",
        "solver",
        "convection",
        "velocity_update",
        "low_memory",
        "velocity_rtol",
        "pressure_rtol",
        "mass_rtol",
        "krylov_atol",
        "krylov_max_iters",
        "checkpoint_interval",
        "verify_assembly",
    ];

    /// Sets one parameter; returns `Ok(false)` when the key is not a solver key.
    pub fn set(&mut self, key: &str, value: &ParamValue) -> Result<bool> {
        match key {
            "nu" => self.nu = value.as_f64(key)?,
            "dt" => self.dt = value.as_f64(key)?,
            "T" => self.t_end = value.as_f64(key)?,
            "max_iters" => self.max_iters = value.as_usize(key)?,
            "velocity_degree" => self.velocity_degree = value.as_usize(key)?,
            "pressure_degree" => self.pressure_degree = value.as_usize(key)?,
            "solver" => self.solver = SolverKind::parse(value.as_str(key)?)?,
            "convection" => {
                self.convection = match value.as_str(key)? {
                    "abcn" | "ABCN" => Convection::Abcn,
                    "abe" | "ABE" => Convection::Abe,
                    other => return Err(Error::InvalidParameter(format!("unknown convection `{other}`"))),
                }
            }
            "velocity_update" => {
                self.velocity_update = match value.as_str(key)? {
                    "mass_solve" => VelocityUpdate::MassSolve,
                    "lumping" => VelocityUpdate::Lumping,
                    other => return Err(Error::InvalidParameter(format!("unknown velocity_update `{other}`"))),
                }
            }
            "low_memory" => self.low_memory = value.as_bool(key)?,
            "velocity_rtol" => self.velocity_krylov.rtol = value.as_f64(key)?,
            "pressure_rtol" => self.pressure_krylov.rtol = value.as_f64(key)?,
            "mass_rtol" => self.mass_krylov.rtol = value.as_f64(key)?,
            "krylov_atol" => {
                let atol = value.as_f64(key)?;
                self.velocity_krylov.atol = atol;
                self.pressure_krylov.atol = atol;
                self.mass_krylov.atol = atol;
            }
            "krylov_max_iters" => {
                let n = value.as_usize(key)?;
                self.velocity_krylov.max_iters = n;
                self.pressure_krylov.max_iters = n;
                self.mass_krylov.max_iters = n;
            }
            "checkpoint_interval" => self.checkpoint_interval = value.as_usize(key)?,
            "verify_assembly" => self.verify_assembly = value.as_bool(key)?,
            _ => return Ok(false),
        }
        Ok(true)
    }

    /// Applies every override, rejecting keys that are not solver keys.
    pub fn apply(&mut self, overrides: &Overrides) -> Result<()> {
        for (key, value) in overrides {
            if !self.set(key, value)? {
                return Err(Error::UnknownParameter { key: key.clone(), valid: Self::KEYS.join(", ") });
            }
        }
        self.validate()
    }

    /// Sets all Krylov relative tolerances at once.
    pub fn with_krylov_rtol(mut self, rtol: f64) -> Self {
        self.velocity_krylov.rtol = rtol;
        self.pressure_krylov.rtol = rtol;
        self.mass_krylov.rtol = rtol;
        self
    }

    pub fn num_steps(&self) -> usize {
        libm::round(self.t_end / self.dt) as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_end >= self.dt) {
            return bad(format!("T = {} must be at least dt = {}", self.t_end, self.dt));
        }
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return bad(format!("nu must be positive, got {}", self.nu));
        }
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1".into());
        }
        for (name, d) in [("velocity_degree", self.velocity_degree), ("pressure_degree", self.pressure_degree)] {
            if !(1..=crate::fem::basis::MAX_DEGREE).contains(&d) {
                return bad(format!("{name} must be in 1..=4, got {d}"));
            }
        }
        self.velocity_krylov.validate()?;
        self.pressure_krylov.validate()?;
        self.mass_krylov.validate()
    }
}

/// A transported scalar with its current and previous values.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub name: String,
    pub diffusivity: f64,
    pub value: Field,
    pub previous: Field,
}

/// Everything that evolves in time.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionState {
    /// Tentative velocity during a step, the new velocity after it.
    pub velocity: [Field; 2],
    /// Velocity at the previous time level.
    pub velocity_prev: [Field; 2],
    /// Velocity two levels back.
    pub velocity_prev2: [Field; 2],
    pub pressure: Field,
    /// Last pressure correction.
    pub correction: Field,
    pub scalars: Vec<ScalarField>,
    pub t: f64,
    pub n: usize,
}

impl SolutionState {
    pub fn zeros(velocity: &Arc<LagrangeSpace>, pressure: &Arc<LagrangeSpace>) -> Self {
        let v = || [Field::zeros(velocity), Field::zeros(velocity)];
        SolutionState {
            velocity: v(),
            velocity_prev: v(),
            velocity_prev2: v(),
            pressure: Field::zeros(pressure),
            correction: Field::zeros(pressure),
            scalars: Vec::new(),
            t: 0.0,
            n: 0,
        }
    }

    pub fn velocity_space(&self) -> &Arc<LagrangeSpace> {
        self.velocity[0].space()
    }

    pub fn pressure_space(&self) -> &Arc<LagrangeSpace> {
        self.pressure.space()
    }

    fn rotate(&mut self) {
        for k in 0..2 {
            core::mem::swap(&mut self.velocity_prev2[k].dofs, &mut self.velocity_prev[k].dofs);
            self.velocity_prev[k].dofs.copy_from_slice(&self.velocity[k].dofs);
        }
        for s in &mut self.scalars {
            s.previous.dofs.copy_from_slice(&s.value.dofs);
        }
    }

    fn check_finite(&self) -> Result<()> {
        let fields = self
            .velocity
            .iter()
            .enumerate()
            .map(|(k, f)| (format!("u{k}"), f))
            .chain([("p".to_string(), &self.pressure)])
            .chain(self.scalars.iter().map(|s| (s.name.clone(), &s.value)));
        for (name, f) in fields {
            if f.dofs.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { field: name, step: self.n, time: self.t });
            }
        }
        Ok(())
    }
}

/// Boundary conditions keyed by component: `"u0"`, `"u1"`, `"p"` or a scalar name.
/// Later entries in each list win on shared dofs.
pub type BcMap = BTreeMap<String, Vec<DirichletBC>>;

/// Combined boundary conditions per system.
#[derive(Debug, Clone, Default)]
pub struct BoundaryData {
    pub velocity: [DirichletBC; 2],
    pub pressure: DirichletBC,
    pub scalars: Vec<DirichletBC>,
}

impl BoundaryData {
    pub fn from_map(map: &BcMap, scalar_names: &[String]) -> Result<Self> {
        for key in map.keys() {
            let ok = matches!(key.as_str(), "u0" | "u1" | "p") || scalar_names.iter().any(|s| s == key);
            if !ok {
                return Err(Error::BoundaryConditions(format!(
                    "unknown boundary condition key `{key}` (expected u0, u1, p or a scalar name)"
                )));
            }
        }
        let get = |k: &str| map.get(k).map(|l| DirichletBC::combine(l)).unwrap_or_default();
        let data = BoundaryData {
            velocity: [get("u0"), get("u1")],
            pressure: get("p"),
            scalars: scalar_names.iter().map(|s| get(s)).collect(),
        };
        if data.velocity[0].dofs != data.velocity[1].dofs {
            return Err(Error::BoundaryConditions(
                "velocity components must share Dirichlet dof locations (values may differ)".into(),
            ));
        }
        Ok(data)
    }

    pub fn velocity_dofs(&self) -> &[usize] {
        &self.velocity[0].dofs
    }
}

/// Passed to every hook.
pub struct HookContext<'a> {
    pub state: &'a mut SolutionState,
    pub params: &'a NSParameters,
    pub inner_iter: usize,
    /// Velocity component (tentative hook) or scalar index (scalar hook).
    pub component: Option<usize>,
    /// Diagnostics of the finished step (temporal hook only).
    pub diagnostics: Option<&'a StepDiagnostics>,
    /// Set by a hook to end the run after the current step.
    pub stop: bool,
}

pub type Hook<'h> = Box<dyn FnMut(&mut HookContext<'_>) -> Result<()> + 'h>;

/// Optional callbacks at fixed points of the time loop.
#[derive(Default)]
pub struct Hooks<'h> {
    pub start_timestep: Option<Hook<'h>>,
    pub velocity_tentative: Option<Hook<'h>>,
    pub pressure: Option<Hook<'h>>,
    pub scalar: Option<Hook<'h>>,
    pub temporal: Option<Hook<'h>>,
    pub theend: Option<Hook<'h>>,
}

impl<'h> Hooks<'h> {
    pub fn none() -> Self {
        Hooks::default()
    }

    pub fn temporal(f: impl FnMut(&mut HookContext<'_>) -> Result<()> + 'h) -> Self {
        Hooks { temporal: Some(Box::new(f)), ..Hooks::default() }
    }
}

/// Per-step solver statistics.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepDiagnostics {
    pub step: usize,
    pub time: f64,
    pub velocity_iterations: usize,
    pub pressure_iterations: usize,
    pub update_iterations: usize,
    pub scalar_iterations: usize,
    pub velocity_residual: f64,
    pub pressure_residual: f64,
    pub courant: f64,
    /// `max |A_final + A_intermediate - 2M/dt|`, when verification is enabled.
    pub assembly_defect: Option<f64>,
    /// Relative mean of the pressure right-hand side before projection.
    pub pressure_rhs_defect: f64,
    /// Euclidean norm of the discrete divergence before and after the update.
    pub divergence_tentative: f64,
    pub divergence_updated: f64,
    /// L2 (Euclidean dof) norm of the pressure correction per inner iteration.
    pub correction_norms: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PressureInfo {
    pub solve: Option<SolveInfo>,
    pub rhs_defect: f64,
}

/// Stage interface shared by the naive and the preassembled solvers.
pub trait Stepper {
    /// First inner iteration of a step: everything that only depends on old levels.
    fn assemble_first_inner_iter(&mut self, state: &SolutionState) -> Result<Option<f64>>;
    fn tentative_velocity(&mut self, state: &mut SolutionState, component: usize) -> Result<SolveInfo>;
    fn pressure_correction(&mut self, state: &mut SolutionState) -> Result<PressureInfo>;
    fn velocity_update(&mut self, state: &mut SolutionState) -> Result<usize>;
    fn scalar_step(&mut self, state: &mut SolutionState, index: usize) -> Result<SolveInfo>;
    /// `sum_k dU^k u_k` for a velocity given as dof vectors.
    fn divergence(&self, u: [&[f64]; 2]) -> Result<Vec<f64>>;
}

pub(crate) fn norm2(x: &[f64]) -> f64 {
    libm::sqrt(x.iter().map(|v| v * v).sum())
}

/// Projects a pressure right-hand side onto the range of the pure-Neumann
/// Laplacian and returns the relative defect that was removed.
pub(crate) fn project_compatible(rhs: &mut [f64]) -> f64 {
    let sum: f64 = rhs.iter().sum();
    let scale: f64 = rhs.iter().map(|v| v.abs()).sum();
    let defect = if scale > 0.0 { (sum / scale).abs() } else { 0.0 };
    if defect > 1e-8 {
        log::warn!("pressure right-hand side is not mean-zero (relative defect {defect:.3e}); projecting");
    }
    let mean = sum / rhs.len() as f64;
    rhs.iter_mut().for_each(|v| *v -= mean);
    defect
}

/// Krylov settings for the pressure system, which turns nonsymmetric once
/// Dirichlet rows are applied.
pub(crate) fn pressure_config(params: &NSParameters, has_bcs: bool) -> KrylovConfig {
    if has_bcs {
        params.pressure_krylov.with_method(KrylovMethod::BiCgStab)
    } else {
        params.pressure_krylov.with_constant_nullspace(true)
    }
}

pub(crate) fn mass_config(params: &NSParameters, has_bcs: bool) -> KrylovConfig {
    if has_bcs {
        params.mass_krylov.with_method(KrylovMethod::BiCgStab)
    } else {
        params.mass_krylov
    }
}

/// Row-sum lumping only gives a usable diagonal when every basis function has
/// a positive integral, which fails for P2 (vertex functions integrate to zero).
pub(crate) fn check_lumped(lumped: &[f64], params: &NSParameters) -> Result<()> {
    if params.velocity_update != VelocityUpdate::Lumping {
        return Ok(());
    }
    let max = lumped.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if lumped.iter().any(|&v| !(v > 1e-10 * max)) {
        return Err(Error::InvalidParameter(format!(
            "velocity_update=lumping needs positive row sums, which P{} does not have; use mass_solve",
            params.velocity_degree
        )));
    }
    Ok(())
}

/// A problem set up for time stepping.
pub struct Simulation<'p> {
    problem: &'p dyn Problem,
    params: NSParameters,
    stepper: Box<dyn Stepper + 'p>,
    cell_sizes: Vec<f64>,
    pub state: SolutionState,
    pub bcs: BoundaryData,
}

impl<'p> Simulation<'p> {
    /// Builds mesh, spaces, boundary conditions and the initial state.
    pub fn new(problem: &'p dyn Problem, params: &NSParameters) -> Result<Self> {
        params.validate()?;
        let mesh = Arc::new(problem.mesh()?);
        let velocity = Arc::new(LagrangeSpace::new(mesh.clone(), params.velocity_degree)?);
        let pressure = Arc::new(LagrangeSpace::new(mesh.clone(), params.pressure_degree)?);
        let specs = problem.scalars();
        let names: Vec<String> = specs.iter().map(|s| s.name.clone()).collect();
        let bcs = BoundaryData::from_map(&problem.create_bcs(&velocity, &pressure), &names)?;

        let mut state = SolutionState::zeros(&velocity, &pressure);
        state.scalars = specs
            .iter()
            .map(|s| ScalarField {
                name: s.name.clone(),
                diffusivity: s.diffusivity,
                value: Field::zeros(&velocity),
                previous: Field::zeros(&velocity),
            })
            .collect();
        problem.initialize(&mut state, &bcs)?;
        for k in 0..2 {
            state.velocity[k].dofs.copy_from_slice(&state.velocity_prev[k].dofs);
        }
        for s in &mut state.scalars {
            s.value.dofs.copy_from_slice(&s.previous.dofs);
        }
        state.check_finite()?;

        let stepper: Box<dyn Stepper> = match params.solver {
            SolverKind::IpcsAbcn => Box::new(OptimizedStepper::new(problem, params, &bcs, &velocity, &pressure)?),
            SolverKind::IpcsNaive => Box::new(NaiveStepper::new(problem, params, &bcs, &velocity, &pressure)?),
        };
        let cell_sizes = (0..mesh.num_cells()).map(|c| 2.0 * mesh.circumradius(c)).collect();
        log::info!(
            "{}: {} solver, P{}P{}, {} velocity dofs, {} pressure dofs, {} steps of dt = {}",
            problem.name(),
            params.solver.name(),
            params.velocity_degree,
            params.pressure_degree,
            velocity.ndofs(),
            pressure.ndofs(),
            params.num_steps(),
            params.dt
        );
        Ok(Simulation { problem, params: params.clone(), stepper, cell_sizes, state, bcs })
    }

    pub fn params(&self) -> &NSParameters {
        &self.params
    }

    pub fn problem(&self) -> &dyn Problem {
        self.problem
    }

    /// Replaces the state, e.g. after restoring a checkpoint. Shapes must match.
    pub fn set_state(&mut self, state: SolutionState) -> Result<()> {
        let same = |a: &[Field], b: &[Field]| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.len() == y.len());
        if !same(&state.velocity_prev, &self.state.velocity_prev)
            || state.pressure.len() != self.state.pressure.len()
            || state.scalars.len() != self.state.scalars.len()
        {
            return Err(Error::DimensionMismatch("state does not match the problem's spaces".into()));
        }
        self.state = state;
        Ok(())
    }

    pub fn is_finished(&self) -> bool {
        self.state.n >= self.params.num_steps()
    }

    pub fn divergence_norm(&self, u: [&[f64]; 2]) -> Result<f64> {
        Ok(norm2(&self.stepper.divergence(u)?))
    }

    fn courant(&self) -> f64 {
        let space = self.state.velocity_space();
        let mut cfl: f64 = 0.0;
        for (c, h) in self.cell_sizes.iter().enumerate() {
            for &d in space.cell_dofs(c) {
                let (u, v) = (self.state.velocity[0].dofs[d], self.state.velocity[1].dofs[d]);
                cfl = cfl.max(libm::sqrt(u * u + v * v) * self.params.dt / h);
            }
        }
        cfl
    }

    /// Advances one time step.
    pub fn step(&mut self, hooks: &mut Hooks<'_>) -> Result<(StepDiagnostics, bool)> {
        let n = self.state.n + 1;
        let t = n as f64 * self.params.dt;
        self.step_inner(hooks).map_err(|e| e.at_step(n, t))
    }

    fn call(
        hook: &mut Option<Hook<'_>>,
        state: &mut SolutionState,
        params: &NSParameters,
        inner_iter: usize,
        component: Option<usize>,
        diagnostics: Option<&StepDiagnostics>,
    ) -> Result<bool> {
        match hook {
            Some(h) => {
                let mut ctx = HookContext { state, params, inner_iter, component, diagnostics, stop: false };
                h(&mut ctx)?;
                Ok(ctx.stop)
            }
            None => Ok(false),
        }
    }

    fn step_inner(&mut self, hooks: &mut Hooks<'_>) -> Result<(StepDiagnostics, bool)> {
        let params = &self.params;
        let state = &mut self.state;
        state.n += 1;
        state.t = state.n as f64 * params.dt;
        let mut diag = StepDiagnostics { step: state.n, time: state.t, ..Default::default() };
        let mut stop = Self::call(&mut hooks.start_timestep, state, params, 0, None, None)?;

        for inner in 0..params.max_iters {
            if inner == 0 {
                diag.assembly_defect = self.stepper.assemble_first_inner_iter(state)?;
            }
            for k in 0..2 {
                stop |= Self::call(&mut hooks.velocity_tentative, state, params, inner, Some(k), None)?;
                let info = self.stepper.tentative_velocity(state, k)?;
                diag.velocity_iterations += info.iterations;
                diag.velocity_residual = diag.velocity_residual.max(info.residual);
            }
            stop |= Self::call(&mut hooks.pressure, state, params, inner, None, None)?;
            let info = self.stepper.pressure_correction(state)?;
            if let Some(s) = info.solve {
                diag.pressure_iterations += s.iterations;
                diag.pressure_residual = diag.pressure_residual.max(s.residual);
            }
            diag.pressure_rhs_defect = diag.pressure_rhs_defect.max(info.rhs_defect);
            diag.correction_norms.push(norm2(&state.correction.dofs));
        }

        diag.divergence_tentative =
            norm2(&self.stepper.divergence([&state.velocity[0].dofs, &state.velocity[1].dofs])?);
        diag.update_iterations = self.stepper.velocity_update(state)?;
        diag.divergence_updated =
            norm2(&self.stepper.divergence([&state.velocity[0].dofs, &state.velocity[1].dofs])?);

        for i in 0..state.scalars.len() {
            stop |= Self::call(&mut hooks.scalar, state, params, 0, Some(i), None)?;
            diag.scalar_iterations += self.stepper.scalar_step(state, i)?.iterations;
        }
        state.check_finite()?;
        state.rotate();
        diag.courant = self.courant();
        let state = &mut self.state;
        stop |= Self::call(&mut hooks.temporal, state, &self.params, 0, None, Some(&diag))?;
        log::debug!(
            "step {} t={:.6} vel_it={} p_it={} cfl={:.3e} div {:.3e}->{:.3e}",
            diag.step,
            diag.time,
            diag.velocity_iterations,
            diag.pressure_iterations,
            diag.courant,
            diag.divergence_tentative,
            diag.divergence_updated
        );
        Ok((diag, stop))
    }

    /// Steps to the end time (or until a hook requests a stop) and calls `theend`.
    pub fn run(mut self, hooks: &mut Hooks<'_>) -> Result<RunOutput> {
        let mut diagnostics = Vec::with_capacity(self.params.num_steps().saturating_sub(self.state.n));
        while !self.is_finished() {
            let (diag, stop) = self.step(hooks)?;
            diagnostics.push(diag);
            if stop {
                break;
            }
        }
        Self::call(&mut hooks.theend, &mut self.state, &self.params, 0, None, None)?;
        Ok(RunOutput { state: self.state, bcs: self.bcs, diagnostics })
    }
}

/// Final state and per-step diagnostics of a run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub state: SolutionState,
    pub bcs: BoundaryData,
    pub diagnostics: Vec<StepDiagnostics>,
}

/// Runs `problem` from its initial condition to `params.t_end`.
pub fn run(problem: &dyn Problem, params: &NSParameters, hooks: &mut Hooks<'_>) -> Result<RunOutput> {
    Simulation::new(problem, params)?.run(hooks)
}

pub(crate) fn zero_vectors(n: usize) -> [Vec<f64>; 2] {
    [vec![0.0; n], vec![0.0; n]]
}
