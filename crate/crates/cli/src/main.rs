//! `wagner`: integrate and analyse the projected equation and lifted
//! geodesics on surfaces given by formulas.

mod contour;
mod error;
mod output;
mod run;
mod runspec;
mod surface;
mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};

use clap::{Args, Parser, Subcommand};

use error::CliError;
use run::Run;
use runspec::{
    parse_span, InitRef, InitSpec, IntegratorSpec, Mode, OneOrMany, RunSpec, SurfaceRef,
};

#[derive(Parser)]
#[command(
    name = "wagner",
    version,
    about = "Projected and lifted geodesics on surfaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the projected equation for one or more values of C.
    Integrate(RunArgs),
    /// Integrate a geodesic of the lifted metric.
    Lift {
        /// Lift a projected solution instead of integrating the geodesic directly.
        #[arg(long)]
        solution: bool,
        #[command(flatten)]
        args: RunArgs,
    },
    /// Report the first integrals along a trajectory.
    Invariants {
        /// Use the lifted geodesic.
        #[arg(long)]
        lifted: bool,
        #[command(flatten)]
        args: RunArgs,
    },
    /// Curvature region that confines a solution.
    Region(RunArgs),
    /// Graph u1(u2) of a solution on a surface of revolution by quadrature.
    Quadrature(RunArgs),
    /// Structure, connection and curvature tables of the lift at a point.
    Tables(RunArgs),
    /// Run several run files, optionally in parallel.
    Batch {
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
}

#[derive(Args, Default)]
struct RunArgs {
    /// Run file (JSON); flags override its values.
    #[arg(long)]
    run: Option<PathBuf>,
    /// Surface file, or a built-in such as `torus(2,1)`.
    #[arg(long)]
    surface: Option<String>,
    /// Constant C of the projected equation (repeatable).
    #[arg(long = "C", allow_negative_numbers = true)]
    c: Vec<f64>,
    /// Initial state, e.g. `u1=0,u2=0.3,angle=0.4,speed=1`.
    #[arg(long, allow_hyphen_values = true)]
    init: Option<String>,
    /// Named start point (`min-k`); u1/u2 then come from the surface.
    #[arg(long)]
    at: Option<String>,
    /// Time span `start:end`.
    #[arg(long, value_parser = parse_span, allow_hyphen_values = true)]
    t_span: Option<[f64; 2]>,
    /// `rkf45` (adaptive) or `rk4` (fixed step).
    #[arg(long)]
    method: Option<String>,
    /// Sets both tolerances.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
    #[arg(long)]
    rel_tol: Option<f64>,
    /// First step (adaptive) or fixed step (rk4).
    #[arg(long, visible_alias = "h")]
    h_init: Option<f64>,
    #[arg(long)]
    h_min: Option<f64>,
    #[arg(long)]
    h_max: Option<f64>,
    #[arg(long)]
    max_steps: Option<usize>,
    /// Skip locating singular-set crossings.
    #[arg(long)]
    no_events: bool,
    /// Range of u2 for the quadrature, `start:end`.
    #[arg(long, value_parser = parse_span, allow_hyphen_values = true)]
    u2_span: Option<[f64; 2]>,
    /// Main output (CSV or JSON); stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
    /// JSON summary of the run.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Integrate in N directions, equally spaced from the initial one.
    #[arg(long)]
    fan: Option<usize>,
}

impl RunArgs {
    fn to_spec(&self) -> Result<RunSpec, CliError> {
        let mut init = match &self.init {
            Some(s) => Some(InitSpec::parse(s)?),
            None => None,
        };
        if let Some(at) = &self.at {
            init.get_or_insert_with(InitSpec::default).at = Some(at.clone());
        }
        let c = match self.c.as_slice() {
            [] => None,
            [x] => Some(OneOrMany::One(*x)),
            xs => Some(OneOrMany::Many(xs.to_vec())),
        };
        Ok(RunSpec {
            mode: None,
            surface: self.surface.clone().map(SurfaceRef::Named),
            c,
            init: init.map(InitRef::Fields),
            t_span: self.t_span,
            integrator: IntegratorSpec {
                method: self.method.clone(),
                abs_tol: self.abs_tol.or(self.tol),
                rel_tol: self.rel_tol.or(self.tol),
                h_init: self.h_init,
                h_min: self.h_min,
                h_max: self.h_max,
                max_steps: self.max_steps,
                detect_events: self.no_events.then_some(false),
            },
            u2_span: self.u2_span,
            lifted: None,
            out: self.out.clone(),
            svg: self.svg.clone(),
            report: self.report.clone(),
            fan: self.fan,
        })
    }
}

/// Layers defaults, the run file and the flags, then runs.
fn run_args(mode: Mode, args: &RunArgs, lifted: bool) -> Result<(), CliError> {
    let (file, base) = match &args.run {
        Some(p) => (
            RunSpec::from_file(p)?,
            p.parent().map(Path::to_path_buf).unwrap_or_default(),
        ),
        None => (RunSpec::default(), PathBuf::new()),
    };
    let mut flags = args.to_spec()?;
    flags.mode = Some(mode);
    if lifted {
        flags.lifted = Some(true);
    }
    // Paths given as flags are relative to the working directory, paths in the
    // file to the file's directory.
    let mut spec = file.overlay(RunSpec {
        out: None,
        svg: None,
        report: None,
        surface: None,
        ..flags.clone()
    })?;
    let rebase = |p: Option<PathBuf>| p.map(|p| base.join(p));
    spec.out = flags.out.or_else(|| rebase(spec.out.take()));
    spec.svg = flags.svg.or_else(|| rebase(spec.svg.take()));
    spec.report = flags.report.or_else(|| rebase(spec.report.take()));
    spec.surface = match flags.surface {
        Some(s) => Some(s),
        None => spec.surface.take().map(|s| match s {
            SurfaceRef::Named(n) if base.join(&n).is_file() => {
                SurfaceRef::Named(base.join(n).to_string_lossy().into())
            }
            other => other,
        }),
    };
    Run {
        spec: &spec,
        base: Path::new(""),
    }
    .execute()
}

/// Runs one run file whose `mode` field selects the command.
fn run_file(path: &Path) -> Result<(), CliError> {
    let spec = RunSpec::from_file(path)?;
    let mode = spec
        .mode
        .ok_or_else(|| CliError::config(format!("{}: missing mode", path.display())))?;
    let args = RunArgs {
        run: Some(path.to_path_buf()),
        ..RunArgs::default()
    };
    run_args(mode, &args, false)
}

fn batch(files: &[PathBuf], jobs: usize) -> u8 {
    let next = AtomicUsize::new(0);
    let worst = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..jobs.clamp(1, files.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(f) = files.get(i) else { break };
                let code = match run_file(f) {
                    Ok(()) => {
                        log::info!("{}: ok", f.display());
                        0
                    }
                    Err(e) => {
                        eprintln!("error: {}: {e}", f.display());
                        e.exit_code()
                    }
                };
                worst.fetch_max(code as usize, Ordering::Relaxed);
            });
        }
    });
    worst.load(Ordering::Relaxed) as u8
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("WAGNER_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Integrate(a) => run_args(Mode::Project, a, false),
        Command::Lift { solution, args } => run_args(
            if *solution {
                Mode::LiftSolution
            } else {
                Mode::Lift
            },
            args,
            false,
        ),
        Command::Invariants { lifted, args } => run_args(Mode::Invariants, args, *lifted),
        Command::Region(a) => run_args(Mode::Region, a, false),
        Command::Quadrature(a) => run_args(Mode::Quadrature, a, false),
        Command::Tables(a) => run_args(Mode::Tables, a, false),
        Command::Batch { jobs, files } => return ExitCode::from(batch(files, *jobs)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
