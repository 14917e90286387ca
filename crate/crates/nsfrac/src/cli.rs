//! `nsfrac <subcommand> problem=<name> [solver=<name>] [key=value ...] [--out DIR]`
//!
//! Every `key=value` token is typed on the fly (int, float, bool, string) and
//! checked against the solver and problem keys before anything runs. A few keys
//! belong to the driver itself and never reach the solver:
//!
//! - `output=vtk,csv,checkpoint`: artifacts to write (default all three);
//! - `checkpoint=PATH`: restart file for `resume`;
//! - `Ns=10,20,...`: meshes of `study-spatial`;
//! - `dts=0.5,0.25,...`: time steps of `study-temporal`.

use std::cell::RefCell;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write as _};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use nsfrac_core::fracstep::{Convection, Hooks, NSParameters, Simulation, SolverKind, VelocityUpdate};
use nsfrac_core::params::{Overrides, ParamValue};
use nsfrac_core::problems::{self, TaylorGreen2D};
use nsfrac_core::verify;

use crate::{checkpoint, study, table, vtk};

pub const USAGE: &str = "\
usage: nsfrac <run|study-spatial|study-temporal|resume> problem=<name> [solver=<name>] [key=value ...] [--out DIR]

problems: TaylorGreen2D (TaylorGreen), DrivenCavity, Channel2D (Channel)
solvers:  ipcs_abcn (IPCS_ABCN, default), ipcs_naive (IPCS)
driver keys: output=vtk,csv,checkpoint  checkpoint=PATH  Ns=10,20  dts=0.5,0.25
verbosity: NSFRAC_LOG=error|warn|info|debug|trace";

const DRIVER_KEYS: [&str; 4] = ["output", "checkpoint", "Ns", "dts"];

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}\n\n{USAGE}")]
    Usage(String),
    #[error("malformed token `{0}` (expected key=value)")]
    MalformedToken(String),
    #[error("bad value in `{token}`: {reason}")]
    BadValue { token: String, reason: String },
    #[error(transparent)]
    Config(#[from] nsfrac_core::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Run,
    StudySpatial,
    StudyTemporal,
    Resume,
}

impl Command {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "run" => Command::Run,
            "study-spatial" => Command::StudySpatial,
            "study-temporal" => Command::StudyTemporal,
            "resume" => Command::Resume,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Outputs {
    pub csv: bool,
    pub vtk: bool,
    pub checkpoint: bool,
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs { csv: true, vtk: true, checkpoint: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    /// Canonical problem name.
    pub problem: String,
    pub solver: SolverKind,
    /// Solver and problem overrides in command-line order of keys.
    pub overrides: Overrides,
    pub out_dir: PathBuf,
    pub outputs: Outputs,
    pub log_level: String,
    pub checkpoint: Option<PathBuf>,
    pub ns: Vec<usize>,
    pub dts: Vec<f64>,
}

fn parse_list<T: std::str::FromStr>(token: &str, raw: &str) -> Result<Vec<T>, CliError> {
    let items: Result<Vec<T>, _> = raw.split(',').map(|s| s.trim().parse::<T>()).collect();
    match items {
        Ok(v) if !v.is_empty() => Ok(v),
        _ => Err(CliError::BadValue { token: token.into(), reason: "expected a comma-separated list".into() }),
    }
}

/// Parses the arguments after the program name. `log_level` is the value of
/// `NSFRAC_LOG`, if set.
pub fn parse_args<S: AsRef<str>>(args: &[S], log_level: Option<&str>) -> Result<RunConfig, CliError> {
    let mut args = args.iter().map(|s| s.as_ref());
    let command = match args.next() {
        None | Some("-h" | "--help" | "help") => return Err(CliError::Usage("missing subcommand".into())),
        Some(c) => Command::parse(c).ok_or_else(|| CliError::Usage(format!("unknown subcommand `{c}`")))?,
    };
    let mut problem = None;
    let mut overrides = Overrides::new();
    let mut out_dir = PathBuf::from("nsfrac-out");
    let mut outputs = Outputs::default();
    let mut checkpoint = None;
    let mut ns = study::SPATIAL_NS.to_vec();
    let mut dts = study::TEMPORAL_DTS.to_vec();

    while let Some(token) = args.next() {
        if token == "--out" {
            out_dir = args.next().ok_or_else(|| CliError::Usage("`--out` needs a directory".into()))?.into();
            continue;
        }
        if let Some(dir) = token.strip_prefix("--out=") {
            out_dir = dir.into();
            continue;
        }
        if token.starts_with("--") {
            return Err(CliError::Usage(format!("unknown flag `{token}`")));
        }
        let (key, value) = match token.split_once('=') {
            Some((k, v)) if !k.is_empty() && !v.is_empty() => (k, v),
            _ => return Err(CliError::MalformedToken(token.into())),
        };
        match key {
            "problem" => problem = Some(value.to_string()),
            "output" => {
                outputs = Outputs { csv: false, vtk: false, checkpoint: false };
                for kind in value.split(',') {
                    match kind {
                        "csv" => outputs.csv = true,
                        "vtk" => outputs.vtk = true,
                        "checkpoint" => outputs.checkpoint = true,
                        "none" => {}
                        other => {
                            return Err(CliError::BadValue {
                                token: token.into(),
                                reason: format!("unknown output kind `{other}`"),
                            })
                        }
                    }
                }
            }
            "checkpoint" => checkpoint = Some(PathBuf::from(value)),
            "Ns" => ns = parse_list(token, value)?,
            "dts" => dts = parse_list(token, value)?,
            _ => {
                overrides.insert(key.to_string(), ParamValue::infer(value));
            }
        }
    }
    let problem = problem.ok_or_else(|| CliError::Usage("missing `problem=<name>`".into()))?;
    // resolves aliases, checks keys and value types without building a mesh
    let (p, params) = problems::create(&problem, &overrides).map_err(|e| match e {
        nsfrac_core::Error::UnknownParameter { key, valid } => nsfrac_core::Error::UnknownParameter {
            key,
            valid: format!("{valid}, problem, {}", DRIVER_KEYS.join(", ")),
        },
        other => other,
    })?;
    if command == Command::Resume && checkpoint.is_none() {
        return Err(CliError::Usage("`resume` needs `checkpoint=PATH`".into()));
    }
    Ok(RunConfig {
        command,
        problem: p.name().to_string(),
        solver: params.solver,
        overrides,
        out_dir,
        outputs,
        log_level: log_level.unwrap_or("info").to_string(),
        checkpoint,
        ns,
        dts,
    })
}

/// Files written by a command.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub files: Vec<PathBuf>,
    pub steps: usize,
    pub final_time: f64,
    /// Velocity and pressure errors when the problem has a reference solution.
    pub errors: Option<(f64, f64)>,
}

fn convection_name(c: Convection) -> &'static str {
    match c {
        Convection::Abcn => "abcn",
        Convection::Abe => "abe",
    }
}

fn update_name(u: VelocityUpdate) -> &'static str {
    match u {
        VelocityUpdate::MassSolve => "mass_solve",
        VelocityUpdate::Lumping => "lumping",
    }
}

/// Header of every log: command, problem, each override and the resolved parameters.
pub fn log_header(cfg: &RunConfig, params: &NSParameters) -> String {
    let mut h = String::new();
    writeln!(h, "# nsfrac {:?}", cfg.command).unwrap();
    writeln!(h, "# problem = {}", cfg.problem).unwrap();
    writeln!(h, "# solver = {}", cfg.solver.name()).unwrap();
    for (k, v) in &cfg.overrides {
        writeln!(h, "# override {k} = {v}").unwrap();
    }
    writeln!(
        h,
        "# parameters nu={} dt={} T={} max_iters={} P{}P{} convection={} velocity_update={} low_memory={}",
        params.nu,
        params.dt,
        params.t_end,
        params.max_iters,
        params.velocity_degree,
        params.pressure_degree,
        convection_name(params.convection),
        update_name(params.velocity_update),
        params.low_memory
    )
    .unwrap();
    writeln!(
        h,
        "# krylov velocity_rtol={} pressure_rtol={} mass_rtol={} atol={} max_iters={}",
        params.velocity_krylov.rtol,
        params.pressure_krylov.rtol,
        params.mass_krylov.rtol,
        params.velocity_krylov.atol,
        params.velocity_krylov.max_iters
    )
    .unwrap();
    h
}

fn create_dir(dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))
}

/// Runs the configured command and writes its artifacts.
pub fn execute(cfg: &RunConfig) -> anyhow::Result<Report> {
    create_dir(&cfg.out_dir)?;
    match cfg.command {
        Command::Run | Command::Resume => simulate(cfg),
        Command::StudySpatial | Command::StudyTemporal => run_study(cfg),
    }
}

const STEP_COLUMNS: &str =
    "step,time,velocity_iterations,pressure_iterations,update_iterations,courant,divergence_tentative,divergence_updated";

fn simulate(cfg: &RunConfig) -> anyhow::Result<Report> {
    let (problem, params) = problems::create(&cfg.problem, &cfg.overrides)?;
    let mut sim = Simulation::new(problem.as_ref(), &params)?;
    if cfg.command == Command::Resume {
        let path = cfg.checkpoint.as_deref().expect("checked by parse_args");
        let state = checkpoint::restore(path, &sim.state)?;
        log::info!("resuming from {} at step {} (t = {})", path.display(), state.n, state.t);
        sim.set_state(state)?;
    }

    let mut report = Report::default();
    let log_path = cfg.out_dir.join("run.log");
    let mut log_file = BufWriter::new(File::create(&log_path).with_context(|| log_path.display().to_string())?);
    let header = log_header(cfg, &params);
    for line in header.lines() {
        log::info!("{line}");
    }
    writeln!(log_file, "{header}{STEP_COLUMNS}")?;
    report.files.push(log_path.clone());

    let interval = params.checkpoint_interval;
    let written = RefCell::new(Vec::new());
    let log_file = RefCell::new(log_file);
    let mut hooks = Hooks::temporal(|ctx| {
        let d = ctx.diagnostics.expect("temporal hooks carry diagnostics");
        writeln!(
            log_file.borrow_mut(),
            "{},{},{},{},{},{},{},{}",
            d.step,
            d.time,
            d.velocity_iterations,
            d.pressure_iterations,
            d.update_iterations,
            d.courant,
            d.divergence_tentative,
            d.divergence_updated
        )
        .map_err(|e| nsfrac_core::Error::InvalidInput(format!("writing the run log: {e}")))?;
        if cfg.outputs.checkpoint && interval > 0 && ctx.state.n % interval == 0 {
            let path = cfg.out_dir.join(format!("checkpoint_{:06}.nsf", ctx.state.n));
            checkpoint::save(ctx.state, &path).map_err(|e| nsfrac_core::Error::InvalidInput(e.to_string()))?;
            written.borrow_mut().push(path);
        }
        Ok(())
    });
    let out = sim.run(&mut hooks).with_context(|| format!("{} run failed", cfg.problem))?;
    drop(hooks);
    log_file.into_inner().flush()?;
    report.files.extend(written.into_inner());
    report.steps = out.diagnostics.len();
    report.final_time = out.state.t;

    if cfg.outputs.vtk {
        let path = cfg.out_dir.join(format!("{}_final.vtk", cfg.problem));
        vtk::write_state(&out.state, &format!("{} t={}", cfg.problem, out.state.t), &path)?;
        report.files.push(path);
    }
    if cfg.outputs.checkpoint {
        let path = cfg.out_dir.join("checkpoint_final.nsf");
        checkpoint::save(&out.state, &path)?;
        report.files.push(path);
    }
    if let Some(reference) = problem.reference() {
        let t = out.state.t;
        // the pressure of a finished step sits half a step behind the velocity
        let (eu, ep) = verify::solution_errors(&out.state, reference, t, t - 0.5 * params.dt);
        log::info!("errors at t = {t}: velocity {eu:.3e}, pressure {ep:.3e}");
        report.errors = Some((eu, ep));
        if cfg.outputs.csv {
            let h = out.state.velocity_space().mesh().mesh_size_h();
            let rows = verify::convergence_table(&[(h, eu, ep)])?;
            let path = cfg.out_dir.join("errors.csv");
            fs::write(&path, table::to_csv(&rows)).with_context(|| path.display().to_string())?;
            report.files.push(path);
        }
    }
    log::info!("{} steps, t = {}", report.steps, report.final_time);
    Ok(report)
}

fn run_study(cfg: &RunConfig) -> anyhow::Result<Report> {
    let problem = problems::by_name(&cfg.problem)?;
    if problem.name() != "TaylorGreen2D" {
        bail!("studies need the Taylor-Green problem (got {})", cfg.problem);
    }
    let temporal = cfg.command == Command::StudyTemporal;
    let mut overrides = cfg.overrides.clone();
    if temporal {
        // P4P3 to T = 6 on a 16x16 mesh unless overridden
        let base = study::temporal_parameters(&NSParameters::default());
        overrides.entry("velocity_degree".into()).or_insert(ParamValue::Int(base.velocity_degree as i64));
        overrides.entry("pressure_degree".into()).or_insert(ParamValue::Int(base.pressure_degree as i64));
        overrides.entry("T".into()).or_insert(ParamValue::Float(base.t_end));
        overrides.entry("N".into()).or_insert(ParamValue::Int(study::TEMPORAL_N as i64));
    }
    let mut tg = TaylorGreen2D::default();
    let params = problems::configure(&mut tg, &overrides)?;
    let header = log_header(cfg, &params);
    for line in header.lines() {
        log::info!("{line}");
    }
    let (rows, name, label) = if temporal {
        log::info!("temporal study on N = {}: dt = {:?}", tg.n, cfg.dts);
        (study::temporal(&tg, &params, &cfg.dts)?, "study_temporal", "dt")
    } else {
        log::info!("spatial study: N = {:?}", cfg.ns);
        (study::spatial(&tg, &params, &cfg.ns)?, "study_spatial", "h")
    };
    let text = table::to_text(&rows, label);
    print!("{text}");
    let mut report = Report::default();
    let log_path = cfg.out_dir.join(format!("{name}.log"));
    fs::write(&log_path, format!("{header}{text}")).with_context(|| log_path.display().to_string())?;
    report.files.push(log_path);
    if cfg.outputs.csv {
        let path = cfg.out_dir.join(format!("{name}.csv"));
        fs::write(&path, table::to_csv(&rows)).with_context(|| path.display().to_string())?;
        report.files.push(path);
    }
    let last = rows.last().expect("at least one row");
    report.errors = Some((last.err_u, last.err_p));
    Ok(report)
}
