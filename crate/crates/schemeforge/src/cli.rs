//! Command-line front end over the library: `classify` prints scheme
//! assignments, `solve` runs a problem and writes solution and track files,
//! `verify` replays the closed-form checks for a family, and `bench` times
//! the finite-difference path against the Galerkin path on the same problem.
//!
//! Exit codes: 0 success, 1 a verification check failed, 2 bad input or
//! usage, 3 the solver failed at runtime, 4 the problem is recognized but
//! not supported by the bundled solvers.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bench::{run_benchmark, BenchReport};
use crate::metrics::{
    analytic_interface_position, analytic_profile, expected_radius, least_squares_slope,
    linf_error, measure_grain_radius, measure_interface_position, weighted_l2_error, TrackPoint,
};
use crate::problem_spec::{parse_problem_spec, ProblemSpec, SpecError};
use crate::problems::{
    detect_family, square_pulse, Advection2dSetup, AllenCahn1dSetup, AllenCahn2dSetup,
    ProblemFamily,
};
use crate::report::Table;
use crate::scheme_selector::{d2_display, select_schemes, NodeId, Scheme, SelectorConfig};
use crate::solver_dg::DgSystem;
use crate::time_integrator::{
    integrate_dirk2, integrate_dirk2_observed, integrate_ssprk3_observed, step_count_for,
    DirkOptions, IntegrateError, StepperStats,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_UNSUPPORTED: i32 = 4;

#[derive(Parser)]
#[command(
    name = "schemeforge",
    about = "Scheme selection and solver kit for PDE problems",
    disable_version_flag = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Assign a numerical scheme to every governed field of a problem.
    Classify(ClassifyArgs),
    /// Run the solver selected for a problem and write solution files.
    Solve(SolveArgs),
    /// Run the built-in correctness checks for a problem family.
    Verify(SolveArgs),
    /// Time the finite-difference and Galerkin paths on the same problem.
    Bench(BenchArgs),
}

#[derive(Args)]
struct ClassifyArgs {
    /// Problem description file (TOML).
    #[arg(long)]
    spec: PathBuf,
    /// Directory to write assignments.csv into.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    /// Problem description file (TOML).
    #[arg(long)]
    spec: PathBuf,
    /// Directory for solution and track CSV files.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Force a scheme (FDM, CGM, DGM, FVM) instead of the selector's pick.
    #[arg(long)]
    scheme: Option<String>,
    /// Polynomial order of the discontinuous scheme.
    #[arg(long)]
    p: Option<usize>,
    /// Grid spacing override.
    #[arg(long)]
    h: Option<f64>,
    /// Time step override; explicit runs take it literally, even past the
    /// stability limit.
    #[arg(long)]
    dt: Option<f64>,
    /// Final-time override.
    #[arg(long)]
    t_end: Option<f64>,
    /// Worker threads (also SCHEMEFORGE_THREADS). The kernels are single
    /// threaded; the value is validated and recorded.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct BenchArgs {
    /// Problem description file (TOML).
    #[arg(long)]
    spec: PathBuf,
    /// Directory to write bench.csv into.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Timed repeats per scheme.
    #[arg(long, default_value_t = 20)]
    repeats: usize,
    /// Grid spacing override.
    #[arg(long)]
    h: Option<f64>,
    /// Time step override.
    #[arg(long)]
    dt: Option<f64>,
    /// Final-time override (shortens each timed run).
    #[arg(long)]
    t_end: Option<f64>,
    /// Worker threads (also SCHEMEFORGE_THREADS).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

fn fail(code: i32, message: impl Into<String>) -> Failure {
    Failure { code, message: message.into() }
}

type CmdResult = Result<(), Failure>;

/// Entry point used by the binary and by tests. Returns the process exit
/// code instead of exiting so callers stay in control.
pub fn run_from<I: IntoIterator<Item = String>>(args: I) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            eprint!("{e}");
            return EXIT_USAGE;
        }
        Err(e) => {
            // --help and friends land here
            print!("{e}");
            return EXIT_OK;
        }
    };
    let outcome = match cli.command {
        Command::Classify(args) => cmd_classify(&args),
        Command::Solve(args) => cmd_solve(&args),
        Command::Verify(args) => cmd_verify(&args),
        Command::Bench(args) => cmd_bench(&args),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn load_spec(path: &Path) -> Result<ProblemSpec, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| fail(EXIT_USAGE, format!("cannot read {}: {e}", path.display())))?;
    parse_problem_spec(&text).map_err(|e| match e {
        SpecError::Unsupported { .. } => fail(EXIT_UNSUPPORTED, e.to_string()),
        other => fail(EXIT_USAGE, other.to_string()),
    })
}

fn resolve_threads(requested: Option<usize>) -> Result<usize, Failure> {
    let n = match requested {
        Some(n) => n,
        None => match std::env::var("SCHEMEFORGE_THREADS") {
            Ok(s) => s
                .parse::<usize>()
                .map_err(|_| fail(EXIT_USAGE, format!("SCHEMEFORGE_THREADS is not a number: {s}")))?,
            Err(_) => 1,
        },
    };
    if n == 0 {
        return Err(fail(EXIT_USAGE, "thread count must be at least 1"));
    }
    Ok(n)
}

fn resolve_scheme(spec: &ProblemSpec, requested: Option<&str>) -> Result<Scheme, Failure> {
    if let Some(name) = requested {
        return Scheme::parse(name).ok_or_else(|| {
            fail(EXIT_USAGE, format!("unknown scheme `{name}`; expected FDM, FVM, CGM, or DGM"))
        });
    }
    let assignments = select_schemes(spec, &SelectorConfig::default())
        .map_err(|e| fail(EXIT_UNSUPPORTED, e.to_string()))?;
    match assignments.as_slice() {
        [single] => Ok(single.scheme),
        _ => Err(fail(
            EXIT_UNSUPPORTED,
            "the solver commands need a problem with exactly one governed field",
        )),
    }
}

fn ensure_out_dir(out: &Option<PathBuf>) -> Result<Option<PathBuf>, Failure> {
    match out {
        None => Ok(None),
        Some(dir) => {
            fs::create_dir_all(dir)
                .map_err(|e| fail(EXIT_USAGE, format!("cannot create {}: {e}", dir.display())))?;
            Ok(Some(dir.clone()))
        }
    }
}

fn save_table(dir: &Path, name: &str, table: &Table) -> CmdResult {
    let path = dir.join(name);
    table
        .save_csv(&path)
        .map_err(|e| fail(EXIT_USAGE, format!("cannot write {}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn track_table(track: &[TrackPoint]) -> Table {
    let mut t = Table::new(vec!["t", "measured", "analytic"]);
    for p in track {
        t.push_row(vec![p.t.to_string(), p.measured.to_string(), p.analytic.to_string()]);
    }
    t
}

fn solution_table(coords: &[[f64; 2]], state: &[f64], dim: usize) -> Table {
    let mut t = if dim == 1 {
        Table::new(vec!["x", "u"])
    } else {
        Table::new(vec!["x", "y", "u"])
    };
    for (c, u) in coords.iter().zip(state) {
        if dim == 1 {
            t.push_row(vec![c[0].to_string(), u.to_string()]);
        } else {
            t.push_row(vec![c[0].to_string(), c[1].to_string(), u.to_string()]);
        }
    }
    t
}

fn cmd_classify(args: &ClassifyArgs) -> CmdResult {
    let spec = load_spec(&args.spec)?;
    let assignments = select_schemes(&spec, &SelectorConfig::default())
        .map_err(|e| fail(EXIT_UNSUPPORTED, e.to_string()))?;

    let mut table = Table::new(vec!["field", "D1", "D2", "D3", "D4", "scheme"]);
    for a in &assignments {
        table.push_row(vec![
            a.field.clone(),
            a.verdict_for(NodeId::D1).unwrap_or("n.a.").to_string(),
            d2_display(a).to_string(),
            a.verdict_for(NodeId::D3).unwrap_or("n.a.").to_string(),
            a.verdict_for(NodeId::D4).unwrap_or("n.a.").to_string(),
            a.scheme.as_str().to_string(),
        ]);
    }
    print!("{}", table.to_text());

    if let Some(dir) = ensure_out_dir(&args.out)? {
        let mut csv = Table::new(vec!["field", "scheme", "trail"]);
        for a in &assignments {
            csv.push_row(vec![a.field.clone(), a.scheme.as_str().to_string(), a.trail_string()]);
        }
        save_table(&dir, "assignments.csv", &csv)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// shared run drivers

struct RunOutput {
    coords: Vec<[f64; 2]>,
    state: Vec<f64>,
    track: Vec<TrackPoint>,
    /// States captured at the quarter points of the run, with their times.
    checkpoints: Vec<(f64, Vec<f64>)>,
    stats: StepperStats,
}

fn checkpoint_marks(n_steps: usize) -> Vec<usize> {
    [0.25, 0.5, 0.75, 1.0]
        .iter()
        .map(|f| ((f * n_steps as f64).round() as usize).max(1))
        .collect()
}

fn solver_failure(e: IntegrateError) -> Failure {
    fail(EXIT_SOLVER, e.to_string())
}

fn build_failure(e: crate::mesh::MeshError) -> Failure {
    fail(EXIT_USAGE, e.to_string())
}

fn integrate_front<F>(
    rhs: F,
    y: &mut [f64],
    xs: &[f64],
    setup: &AllenCahn1dSetup,
    n_steps: usize,
) -> Result<(Vec<TrackPoint>, Vec<(f64, Vec<f64>)>, StepperStats), Failure>
where
    F: FnMut(&[f64], f64, &mut [f64]),
{
    let marks = checkpoint_marks(n_steps);
    let mut track = Vec::with_capacity(n_steps + 1);
    let mut checkpoints = Vec::new();
    let p = setup.params;
    let stats = integrate_dirk2_observed(
        rhs,
        y,
        0.0,
        setup.t_end,
        n_steps,
        &DirkOptions::default(),
        |step, t, u| {
            track.push(TrackPoint {
                t,
                measured: measure_interface_position(xs, u).unwrap_or(f64::NAN),
                analytic: analytic_interface_position(setup.x0, p.mobility, p.mu0, p.gamma, t),
            });
            if marks.contains(&step) {
                checkpoints.push((t, u.to_vec()));
            }
        },
    )
    .map_err(solver_failure)?;
    Ok((track, checkpoints, stats))
}

fn run_front_1d(setup: &AllenCahn1dSetup, scheme: Scheme) -> Result<RunOutput, Failure> {
    let (n_steps, _) = step_count_for(setup.t_end, setup.dt_max);
    match scheme {
        Scheme::Fdm => {
            let sys = setup.build_fd().map_err(build_failure)?;
            let xs = sys.grid.coords[0].clone();
            let mut y = sys.state.clone();
            let (track, checkpoints, stats) =
                integrate_front(|u, _, du| sys.rhs(u, du), &mut y, &xs, setup, n_steps)?;
            Ok(RunOutput {
                coords: xs.iter().map(|x| [*x, 0.0]).collect(),
                state: y,
                track,
                checkpoints,
                stats,
            })
        }
        Scheme::Cgm => {
            let mut sys = setup.build_cg().map_err(build_failure)?;
            let coords = sys.mesh.vertices.clone();
            let xs: Vec<f64> = coords.iter().map(|v| v[0]).collect();
            let mut y = sys.state.clone();
            let (track, checkpoints, stats) =
                integrate_front(|u, _, du| sys.rhs(u, du), &mut y, &xs, setup, n_steps)?;
            Ok(RunOutput { coords, state: y, track, checkpoints, stats })
        }
        other => Err(fail(
            EXIT_USAGE,
            format!("scheme {} does not discretize this family; use FDM or CGM", other.as_str()),
        )),
    }
}

fn integrate_grain<F>(
    rhs: F,
    y: &mut [f64],
    weights: &[f64],
    setup: &AllenCahn2dSetup,
    n_steps: usize,
) -> Result<(Vec<TrackPoint>, StepperStats), Failure>
where
    F: FnMut(&[f64], f64, &mut [f64]),
{
    let mut track = Vec::with_capacity(n_steps + 1);
    let mobility = setup.params.mobility;
    let stats = integrate_dirk2_observed(
        rhs,
        y,
        0.0,
        setup.t_end,
        n_steps,
        &DirkOptions::default(),
        |_, t, u| {
            track.push(TrackPoint {
                t,
                measured: measure_grain_radius(u, weights).unwrap_or(f64::NAN),
                analytic: expected_radius(setup.r0, mobility, t).unwrap_or(f64::NAN),
            });
        },
    )
    .map_err(solver_failure)?;
    Ok((track, stats))
}

fn run_grain_2d(setup: &AllenCahn2dSetup, scheme: Scheme) -> Result<RunOutput, Failure> {
    let (n_steps, _) = step_count_for(setup.t_end, setup.dt_max);
    match scheme {
        Scheme::Fdm => {
            let sys = setup.build_fd().map_err(build_failure)?;
            let weights = sys.grid.mass_weights();
            let coords: Vec<[f64; 2]> =
                (0..sys.n_dofs()).map(|i| sys.grid.vertex_coords(i)).collect();
            let mut y = sys.state.clone();
            let (track, stats) =
                integrate_grain(|u, _, du| sys.rhs(u, du), &mut y, &weights, setup, n_steps)?;
            Ok(RunOutput { coords, state: y, track, checkpoints: Vec::new(), stats })
        }
        Scheme::Cgm => {
            let mut sys = setup.build_cg().map_err(build_failure)?;
            let weights = sys.mass_diag.clone();
            let coords = sys.mesh.vertices.clone();
            let mut y = sys.state.clone();
            let (track, stats) =
                integrate_grain(|u, _, du| sys.rhs(u, du), &mut y, &weights, setup, n_steps)?;
            Ok(RunOutput { coords, state: y, track, checkpoints: Vec::new(), stats })
        }
        other => Err(fail(
            EXIT_USAGE,
            format!("scheme {} does not discretize this family; use FDM or CGM", other.as_str()),
        )),
    }
}

struct TransportRun {
    sys: DgSystem,
    state: Vec<f64>,
    track: Vec<TrackPoint>,
    stats: StepperStats,
}

fn run_transport(setup: &Advection2dSetup, dt_user: Option<f64>) -> Result<TransportRun, Failure> {
    let sys = setup.build().map_err(build_failure)?;
    let dt_max = dt_user.unwrap_or_else(|| sys.max_stable_dt(setup.safety));
    let (n_steps, _) = step_count_for(setup.t_end, dt_max);
    let mut track = Vec::with_capacity(n_steps + 1);
    let m0 = sys.total_mass(&sys.state);
    let mut y = sys.state.clone();
    let sys_ref = &sys;
    let stats = integrate_ssprk3_observed(
        |u, _, du| sys_ref.rhs(u, du),
        &mut y,
        0.0,
        setup.t_end,
        n_steps,
        |_, t, u| {
            track.push(TrackPoint { t, measured: sys_ref.total_mass(u), analytic: m0 });
        },
    )
    .map_err(solver_failure)?;
    Ok(TransportRun { sys, state: y, track, stats })
}

/// Exact transported pulse on the periodic domain.
fn transported_pulse(extent: [f64; 2], velocity: [f64; 2], p: [f64; 2], t: f64) -> f64 {
    let wrap = |x: f64| {
        let span = extent[1] - extent[0];
        let mut y = (x - extent[0]) % span;
        if y < 0.0 {
            y += span;
        }
        extent[0] + y
    };
    square_pulse([wrap(p[0] - velocity[0] * t), wrap(p[1] - velocity[1] * t)])
}

// ---------------------------------------------------------------------------
// solve

fn front_setup(args: &SolveArgs) -> AllenCahn1dSetup {
    let mut s = AllenCahn1dSetup::default();
    if let Some(h) = args.h {
        s.h = h;
    }
    if let Some(dt) = args.dt {
        s.dt_max = dt;
    }
    if let Some(t) = args.t_end {
        s.t_end = t;
    }
    s
}

fn grain_setup(args: &SolveArgs) -> AllenCahn2dSetup {
    let mut s = AllenCahn2dSetup::default();
    if let Some(h) = args.h {
        s.h = h;
    }
    if let Some(dt) = args.dt {
        s.dt_max = dt;
    }
    if let Some(t) = args.t_end {
        s.t_end = t;
    }
    s
}

fn transport_setup(args: &SolveArgs, scheme: Scheme) -> Result<Advection2dSetup, Failure> {
    let order = match scheme {
        Scheme::Fvm => {
            if let Some(p) = args.p {
                if p != 0 {
                    return Err(fail(EXIT_USAGE, "the finite-volume scheme is order 0; drop --p"));
                }
            }
            0
        }
        Scheme::Dgm => args.p.unwrap_or(3),
        other => {
            return Err(fail(
                EXIT_USAGE,
                format!("scheme {} does not discretize this family; use DGM or FVM", other.as_str()),
            ))
        }
    };
    let mut s = Advection2dSetup::with_order(order);
    if let Some(t) = args.t_end {
        s.t_end = t;
    }
    if let Some(h) = args.h {
        let span = s.extent[1] - s.extent[0];
        let cells = (span / h).round();
        if cells < 1.0 || (cells * h - span).abs() > 1e-9 * span {
            return Err(fail(EXIT_USAGE, format!("spacing {h} does not tile the domain")));
        }
        s.cells_per_axis = cells as usize;
    }
    Ok(s)
}

fn summary_header(family: ProblemFamily, scheme: Scheme, dofs: usize, stats: &StepperStats) -> Table {
    let mut t = Table::new(vec!["quantity", "value"]);
    t.push_row(vec!["family".to_string(), family.to_string()]);
    t.push_row(vec!["scheme".to_string(), scheme.as_str().to_string()]);
    t.push_row(vec!["dofs".to_string(), dofs.to_string()]);
    t.push_row(vec!["steps".to_string(), stats.steps.to_string()]);
    t.push_row(vec!["rhs_evals".to_string(), stats.rhs_evals.to_string()]);
    t
}

fn cmd_solve(args: &SolveArgs) -> CmdResult {
    let spec = load_spec(&args.spec)?;
    resolve_threads(args.threads)?;
    let family = detect_family(&spec)
        .ok_or_else(|| fail(EXIT_UNSUPPORTED, "no built-in solver family matches this problem"))?;
    let scheme = resolve_scheme(&spec, args.scheme.as_deref())?;
    let out = ensure_out_dir(&args.out)?;

    match family {
        ProblemFamily::AllenCahn1d => {
            let setup = front_setup(args);
            let run = run_front_1d(&setup, scheme)?;
            let last = run.track.last().unwrap();
            let mut summary = summary_header(family, scheme, run.state.len(), &run.stats);
            summary.push_row(vec!["interface_measured".to_string(), format!("{:.6}", last.measured)]);
            summary.push_row(vec!["interface_analytic".to_string(), format!("{:.6}", last.analytic)]);
            summary.push_row(vec![
                "interface_deviation".to_string(),
                format!("{:.3e}", (last.measured - last.analytic).abs()),
            ]);
            print!("{}", summary.to_text());
            if let Some(dir) = &out {
                save_table(dir, "solution.csv", &solution_table(&run.coords, &run.state, 1))?;
                save_table(dir, "interface_track.csv", &track_table(&run.track))?;
            }
        }
        ProblemFamily::AllenCahn2d => {
            let setup = grain_setup(args);
            let run = run_grain_2d(&setup, scheme)?;
            let last = run.track.last().unwrap();
            let mut summary = summary_header(family, scheme, run.state.len(), &run.stats);
            summary.push_row(vec!["radius_measured".to_string(), format!("{:.6}", last.measured)]);
            summary.push_row(vec!["radius_analytic".to_string(), format!("{:.6}", last.analytic)]);
            print!("{}", summary.to_text());
            if let Some(dir) = &out {
                save_table(dir, "solution.csv", &solution_table(&run.coords, &run.state, 2))?;
                save_table(dir, "radius_track.csv", &track_table(&run.track))?;
            }
        }
        ProblemFamily::Advection2d => {
            let setup = transport_setup(args, scheme)?;
            let run = run_transport(&setup, args.dt)?;
            let exact: Vec<f64> = run
                .sys
                .dof_coords
                .iter()
                .map(|c| transported_pulse(setup.extent, setup.velocity, *c, setup.t_end))
                .collect();
            let l2 = weighted_l2_error(&run.state, &exact, &run.sys.mass_diag);
            let drift = (run.track.last().unwrap().measured - run.track[0].measured).abs();
            let mut summary = summary_header(family, scheme, run.state.len(), &run.stats);
            summary.push_row(vec!["order".to_string(), setup.order.to_string()]);
            summary.push_row(vec!["mass_drift".to_string(), format!("{drift:.3e}")]);
            summary.push_row(vec!["l2_error_vs_exact".to_string(), format!("{l2:.6}")]);
            print!("{}", summary.to_text());
            if let Some(dir) = &out {
                save_table(dir, "solution.csv", &solution_table(&run.sys.dof_coords, &run.state, 2))?;
                save_table(dir, "mass_track.csv", &track_table(&run.track))?;
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// verify

struct Check {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn report_checks(checks: &[Check]) -> CmdResult {
    let mut failed = 0;
    for c in checks {
        println!("{:<26} {} ({})", c.name, if c.passed { "PASS" } else { "FAIL" }, c.detail);
        if !c.passed {
            failed += 1;
        }
    }
    if failed == 0 {
        Ok(())
    } else {
        Err(fail(EXIT_VERIFY_FAIL, format!("{failed} verification check(s) failed")))
    }
}

fn verify_front(args: &SolveArgs) -> Result<Vec<Check>, Failure> {
    let setup = front_setup(args);
    let fd = run_front_1d(&setup, Scheme::Fdm)?;
    let cg = run_front_1d(&setup, Scheme::Cgm)?;
    let mut checks = Vec::new();

    let last = fd.track.last().unwrap();
    checks.push(Check {
        name: "interface_final_bounds",
        passed: last.measured >= setup.x0 && last.measured <= last.analytic,
        detail: format!("measured {:.4}, analytic {:.4}", last.measured, last.analytic),
    });

    let xs: Vec<f64> = fd.coords.iter().map(|c| c[0]).collect();
    let grid = setup.grid().map_err(build_failure)?;
    let weights = grid.mass_weights();
    let centered: Vec<f64> =
        xs.iter().map(|x| analytic_profile(*x, last.measured, setup.params.xi)).collect();
    let shape_err = weighted_l2_error(&fd.state, &centered, &weights);
    checks.push(Check {
        name: "interface_profile",
        passed: shape_err <= 0.05,
        detail: format!("centered-profile error {shape_err:.3e}, limit 5e-2"),
    });

    let mut worst = 0.0_f64;
    for ((t_fd, u_fd), (_, u_cg)) in fd.checkpoints.iter().zip(&cg.checkpoints) {
        let d = linf_error(u_fd, u_cg);
        if d > worst {
            worst = d;
        }
        let _ = t_fd;
    }
    checks.push(Check {
        name: "scheme_agreement",
        passed: worst <= 1e-8 && !cg.checkpoints.is_empty(),
        detail: format!("max FDM-CGM deviation {worst:.3e}, limit 1e-8"),
    });
    Ok(checks)
}

fn verify_grain(args: &SolveArgs, scheme: Scheme) -> Result<Vec<Check>, Failure> {
    let setup = grain_setup(args);
    let run = run_grain_2d(&setup, scheme)?;
    let mut checks = Vec::new();

    let radii: Vec<f64> = run.track.iter().map(|p| p.measured).collect();
    let monotone = radii.windows(2).all(|w| w[1] <= w[0] + 1e-9);
    checks.push(Check {
        name: "radius_monotone",
        passed: monotone,
        detail: format!("r(0) {:.3} down to r(T) {:.3}", radii[0], radii[radii.len() - 1]),
    });

    let half = run.track.len() / 2;
    let ts: Vec<f64> = run.track[..half].iter().map(|p| p.t).collect();
    let r2: Vec<f64> = run.track[..half].iter().map(|p| p.measured * p.measured).collect();
    let slope = least_squares_slope(&ts, &r2);
    let nominal = -2.0 * setup.params.mobility;
    let passed = slope >= 1.5 * nominal && slope <= 0.5 * nominal;
    checks.push(Check {
        name: "shrinkage_rate",
        passed,
        detail: format!("d(r^2)/dt {slope:.3}, nominal {nominal:.3} within 50%"),
    });
    Ok(checks)
}

fn verify_transport(args: &SolveArgs, scheme: Scheme) -> Result<Vec<Check>, Failure> {
    let setup = transport_setup(args, scheme)?;
    let run = run_transport(&setup, args.dt)?;
    let mut checks = Vec::new();

    let mut step_worst = 0.0_f64;
    for w in run.track.windows(2) {
        step_worst = step_worst.max((w[1].measured - w[0].measured).abs());
    }
    checks.push(Check {
        name: "mass_per_step",
        passed: step_worst <= 1e-12,
        detail: format!("worst per-step drift {step_worst:.3e}, limit 1e-12"),
    });

    let total = (run.track.last().unwrap().measured - run.track[0].measured).abs();
    checks.push(Check {
        name: "mass_total",
        passed: total <= 1e-10,
        detail: format!("total drift {total:.3e}, limit 1e-10"),
    });

    checks.push(Check {
        name: "state_finite",
        passed: run.state.iter().all(|v| v.is_finite()),
        detail: format!("{} dofs after {} steps", run.state.len(), run.stats.steps),
    });
    Ok(checks)
}

fn cmd_verify(args: &SolveArgs) -> CmdResult {
    let spec = load_spec(&args.spec)?;
    resolve_threads(args.threads)?;
    let family = detect_family(&spec)
        .ok_or_else(|| fail(EXIT_UNSUPPORTED, "no built-in solver family matches this problem"))?;
    let checks = match family {
        ProblemFamily::AllenCahn1d => verify_front(args)?,
        ProblemFamily::AllenCahn2d => {
            let scheme = resolve_scheme(&spec, args.scheme.as_deref())?;
            verify_grain(args, scheme)?
        }
        ProblemFamily::Advection2d => {
            let scheme = resolve_scheme(&spec, args.scheme.as_deref())?;
            verify_transport(args, scheme)?
        }
    };
    report_checks(&checks)
}

// ---------------------------------------------------------------------------
// bench

fn bench_overrides_1d(args: &BenchArgs) -> AllenCahn1dSetup {
    let mut s = AllenCahn1dSetup::default();
    if let Some(h) = args.h {
        s.h = h;
    }
    if let Some(dt) = args.dt {
        s.dt_max = dt;
    }
    if let Some(t) = args.t_end {
        s.t_end = t;
    }
    s
}

fn bench_overrides_2d(args: &BenchArgs) -> AllenCahn2dSetup {
    let mut s = AllenCahn2dSetup::default();
    if let Some(h) = args.h {
        s.h = h;
    }
    if let Some(dt) = args.dt {
        s.dt_max = dt;
    }
    if let Some(t) = args.t_end {
        s.t_end = t;
    }
    s
}

/// Times one scheme: every repeat resets the state and integrates the full
/// horizon with the implicit stepper.
fn timed_solve<F>(
    label: &str,
    repeats: usize,
    bytes: usize,
    y0: &[f64],
    t_end: f64,
    n_steps: usize,
    mut rhs: F,
) -> Result<BenchReport, Failure>
where
    F: FnMut(&[f64], f64, &mut [f64]),
{
    let opts = DirkOptions::default();
    let mut y = y0.to_vec();
    let mut bad: Option<IntegrateError> = None;
    let report = run_benchmark(label, repeats, bytes, || {
        if bad.is_some() {
            return;
        }
        y.copy_from_slice(y0);
        if let Err(e) = integrate_dirk2(&mut rhs, &mut y, 0.0, t_end, n_steps, &opts) {
            bad = Some(e);
        }
    });
    match bad {
        Some(e) => Err(solver_failure(e)),
        None => Ok(report),
    }
}

fn cmd_bench(args: &BenchArgs) -> CmdResult {
    if args.repeats == 0 {
        return Err(fail(EXIT_USAGE, "--repeats must be at least 1"));
    }
    let spec = load_spec(&args.spec)?;
    resolve_threads(args.threads)?;
    let family = detect_family(&spec)
        .ok_or_else(|| fail(EXIT_UNSUPPORTED, "no built-in solver family matches this problem"))?;
    let out = ensure_out_dir(&args.out)?;

    let reports: Vec<BenchReport> = match family {
        ProblemFamily::AllenCahn1d => {
            let setup = bench_overrides_1d(args);
            let (n_steps, _) = step_count_for(setup.t_end, setup.dt_max);
            let fd = setup.build_fd().map_err(build_failure)?;
            let fd_report = timed_solve(
                "FDM",
                args.repeats,
                fd.allocated_bytes(),
                &fd.state.clone(),
                setup.t_end,
                n_steps,
                |u, _, du| fd.rhs(u, du),
            )?;
            let mut cg = setup.build_cg().map_err(build_failure)?;
            let y0 = cg.state.clone();
            let bytes = cg.allocated_bytes();
            let cg_report =
                timed_solve("CGM", args.repeats, bytes, &y0, setup.t_end, n_steps, |u, _, du| {
                    cg.rhs(u, du)
                })?;
            vec![fd_report, cg_report]
        }
        ProblemFamily::AllenCahn2d => {
            let setup = bench_overrides_2d(args);
            let (n_steps, _) = step_count_for(setup.t_end, setup.dt_max);
            let fd = setup.build_fd().map_err(build_failure)?;
            let fd_report = timed_solve(
                "FDM",
                args.repeats,
                fd.allocated_bytes(),
                &fd.state.clone(),
                setup.t_end,
                n_steps,
                |u, _, du| fd.rhs(u, du),
            )?;
            let mut cg = setup.build_cg().map_err(build_failure)?;
            let y0 = cg.state.clone();
            let bytes = cg.allocated_bytes();
            let cg_report =
                timed_solve("CGM", args.repeats, bytes, &y0, setup.t_end, n_steps, |u, _, du| {
                    cg.rhs(u, du)
                })?;
            vec![fd_report, cg_report]
        }
        ProblemFamily::Advection2d => {
            return Err(fail(
                EXIT_UNSUPPORTED,
                "bench compares the FDM and CGM paths; the transport family has neither",
            ));
        }
    };

    let fastest = reports.iter().map(|r| r.median_s).fold(f64::INFINITY, f64::min);
    let mut table =
        Table::new(vec!["scheme", "n", "median_s", "mean_s", "std_s", "bytes", "relative"]);
    for r in &reports {
        table.push_row(vec![
            r.scheme.clone(),
            r.n.to_string(),
            format!("{:.6}", r.median_s),
            format!("{:.6}", r.mean_s),
            format!("{:.6}", r.std_s),
            r.bytes.to_string(),
            format!("{:.2}x", r.median_s / fastest),
        ]);
    }
    print!("{}", table.to_text());

    if let Some(dir) = &out {
        let mut csv = Table::new(vec!["scheme", "n", "median_s", "mean_s", "std_s", "bytes"]);
        for r in &reports {
            csv.push_row(vec![
                r.scheme.clone(),
                r.n.to_string(),
                r.median_s.to_string(),
                r.mean_s.to_string(),
                r.std_s.to_string(),
                r.bytes.to_string(),
            ]);
        }
        save_table(dir, "bench.csv", &csv)?;
    }
    Ok(())
}
