//! Runs configured experiments and writes their result files.

use std::fs;
use std::path::Path;
use std::time::Duration;

use rayon::prelude::*;
use wavecoeff::carleman::{check_observation_geometry, CarlemanWeights, GeometryReport, WeightProfile};
use wavecoeff::objective::{estimate_k, KEstimate};
use wavecoeff::reconstruct::{run, suggest_parameters, IterationConfig, ReconstructionResult};
use wavecoeff::synth::make_observation;
use wavecoeff::{CoefficientSpec, ForwardModel, Grid1D, ObservationWindow, SpaceTimeField, SpatialField, TimeGrid};

use crate::config::{CaseConfig, Desc, ExperimentConfig, GeometryConfig, LoadedConfig, Mode, Param};
use crate::descriptor::Descriptor;
use crate::error::{CliError, Result};

pub const HISTORY_HEADER: [&str; 5] = ["iter", "step_ratio", "J", "misfit", "err"];
pub const PROFILE_HEADER: [&str; 3] = ["x", "p_true", "p_final"];
pub const SWEEP_HEADER: [&str; 8] = ["omega_spec", "delta0", "K", "alpha", "N", "err", "elapsed", "status"];
pub const GEOMETRY_HEADER: [&str; 3] = ["condition", "holds", "detail"];

/// Number of random pairs behind the empirical `K` reported in single mode.
pub const K_SAMPLES: usize = 20;

/// How a run ended, mapped onto the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    NotConverged,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Converged => 0,
            Status::NotConverged => 2,
        }
    }
}

fn num(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v:e}")
    }
}

fn intervals(list: &[(f64, f64)]) -> String {
    if list.is_empty() {
        return "empty".into();
    }
    list.iter().map(|(a, b)| format!("({a},{b})")).collect::<Vec<_>>().join("U")
}

fn descriptor(loaded: &LoadedConfig, d: &Desc, key: &str) -> Result<Descriptor> {
    Descriptor::parse(d.get_ref())
        .map_err(|e| CliError::Config(format!("invalid descriptor in {}: {e}", loaded.describe(d, key))))
}

fn spatial(loaded: &LoadedConfig, d: &Desc, key: &str, grid: Grid1D) -> Result<SpatialField> {
    let f = descriptor(loaded, d, key)?;
    if f.depends_on_time() {
        return Err(CliError::Config(format!(
            "{} must not depend on t",
            loaded.describe(d, key)
        )));
    }
    let dom = (grid.x_min(), grid.x_max());
    Ok(SpatialField::from_fn(grid, |x| f.eval(x, 0.0, dom))?)
}

fn window(omega: &[[f64; 2]], grid: &Grid1D) -> Result<ObservationWindow> {
    ObservationWindow::new(
        (grid.x_min(), grid.x_max()),
        omega.iter().map(|&[a, b]| (a, b)).collect(),
    )
    .map_err(|e| CliError::Config(e.to_string()))
}

/// The mesh, forward model and coefficients shared by every case of a config.
pub struct Problem {
    pub grid: Grid1D,
    pub model: ForwardModel,
    pub p_true: SpatialField,
    pub p0: SpatialField,
}

impl Problem {
    pub fn build(loaded: &LoadedConfig) -> Result<Self> {
        let c = &loaded.config;
        let pc = &c.problem;
        let grid = Grid1D::new(pc.x_min, pc.x_max, pc.n_cells)?;
        let tgrid = TimeGrid::new(pc.t_max, pc.n_steps)?;
        let f = descriptor(loaded, &pc.source, "problem.source")?;
        let dom = (pc.x_min, pc.x_max);
        let source = SpaceTimeField::from_fn(grid, tgrid, |x, t| f.eval(x, t, dom))?;
        let u0 = spatial(loaded, &pc.initial_value, "problem.initial_value", grid)?;
        Ok(Self {
            grid,
            model: ForwardModel::new(source, u0)?,
            p_true: spatial(loaded, &pc.p_true, "problem.p_true", grid)?,
            p0: spatial(loaded, &c.iteration.p0, "iteration.p0", grid)?,
        })
    }

    fn spec(&self, c: &ExperimentConfig, p_true: &SpatialField) -> Result<CoefficientSpec> {
        let it = &c.iteration;
        let v = p_true.values();
        let [l, r] = it.boundary.unwrap_or([v[0], v[v.len() - 1]]);
        Ok(CoefficientSpec::new(l, r, it.kappa1, it.m1, it.clamp)?)
    }
}

/// Everything one reconstruction produced, plus the parameters it used.
pub struct Reconstructed {
    pub window: ObservationWindow,
    pub spec: CoefficientSpec,
    pub cfg: IterationConfig,
    pub p_true: SpatialField,
    pub result: ReconstructionResult,
}

struct CaseInputs<'a> {
    omega: &'a [[f64; 2]],
    delta0: f64,
    seed: u64,
    k: Param,
    alpha: Param,
    epsilon: Param,
    p_true: Option<&'a Desc>,
}

fn reconstruct_case(loaded: &LoadedConfig, problem: &Problem, case: &CaseInputs) -> Result<Reconstructed> {
    let c = &loaded.config;
    let p_true = match case.p_true {
        Some(d) => spatial(loaded, d, "case.p_true", problem.grid)?,
        None => problem.p_true.clone(),
    };
    let window = window(case.omega, &problem.grid)?;
    let auto = suggest_parameters(&window, case.delta0)?;
    let cfg = IterationConfig {
        k: case.k.resolve(auto.k),
        alpha: case.alpha.resolve(auto.alpha),
        epsilon: case.epsilon.resolve(auto.epsilon),
        max_iter: c.iteration.max_iter,
        seed: case.seed,
    };
    cfg.validate()?;
    let spec = problem.spec(c, &p_true)?;
    let data = make_observation(&problem.model, &p_true, &window, case.delta0, case.seed)?.noisy;
    let result = run(&data, &spec, &cfg, &problem.model, &window, &problem.p0, Some(&p_true))?;
    Ok(Reconstructed {
        window,
        spec,
        cfg,
        p_true,
        result,
    })
}

pub struct SingleReport {
    pub run: Reconstructed,
    pub k_estimate: KEstimate,
    /// The configuration with every default and `auto` value filled in.
    pub effective: ExperimentConfig,
}

pub fn run_single(loaded: &LoadedConfig) -> Result<SingleReport> {
    let c = &loaded.config;
    let problem = Problem::build(loaded)?;
    let obs = &c.observation;
    let it = &c.iteration;
    let run = reconstruct_case(
        loaded,
        &problem,
        &CaseInputs {
            omega: &obs.omega,
            delta0: obs.delta0,
            seed: obs.seed,
            k: it.k,
            alpha: it.alpha,
            epsilon: it.epsilon,
            p_true: None,
        },
    )?;
    let k_estimate = estimate_k(
        &problem.model,
        (run.spec.boundary_left, run.spec.boundary_right),
        &run.window,
        K_SAMPLES,
        obs.seed,
    )?;
    let mut effective = c.clone();
    effective.mode = Mode::Single;
    effective.iteration.k = Param::Value(run.cfg.k);
    effective.iteration.alpha = Param::Value(run.cfg.alpha);
    effective.iteration.epsilon = Param::Value(run.cfg.epsilon);
    effective.iteration.boundary = Some([run.spec.boundary_left, run.spec.boundary_right]);
    effective.cases.clear();
    let report = SingleReport {
        run,
        k_estimate,
        effective,
    };
    write_single(&c.output.dir, &report, &problem)?;
    Ok(report)
}

fn write_single(dir: &Path, report: &SingleReport, problem: &Problem) -> Result<()> {
    fs::create_dir_all(dir)?;
    let r = &report.run.result;

    let mut w = csv::Writer::from_path(dir.join("history.csv"))?;
    w.write_record(HISTORY_HEADER)?;
    for h in &r.history {
        w.write_record([
            h.iter.to_string(),
            num(h.step_ratio),
            num(h.j),
            num(h.misfit),
            num(h.err.unwrap_or(f64::NAN)),
        ])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("profile.csv"))?;
    w.write_record(PROFILE_HEADER)?;
    for ((x, pt), pf) in problem
        .grid
        .nodes()
        .zip(report.run.p_true.values())
        .zip(r.p_final.values())
    {
        w.write_record([num(x), num(*pt), num(*pf)])?;
    }
    w.flush()?;

    let mut s = String::new();
    let mut line = |k: &str, v: String| s.push_str(&format!("# {k} = {v}\n"));
    line("N", r.iterations.to_string());
    line("err", num(r.rel_error.unwrap_or(f64::NAN)));
    line("elapsed_s", format!("{:.6}", r.elapsed.as_secs_f64()));
    line("converged", r.converged.to_string());
    line("K", num(report.run.cfg.k));
    line("K_empirical", num(report.k_estimate.max()));
    line("max_h1_norm", num(r.max_h1_norm));
    line("exceeds_m1", r.exceeded_m1(&report.run.spec).to_string());
    line("clamp_activations", r.clamp_activations.to_string());
    s.push('\n');
    s.push_str(&report.effective.to_toml()?);
    fs::write(dir.join("summary.txt"), s)?;
    Ok(())
}

/// One line of sweep.csv.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub omega_spec: String,
    pub delta0: f64,
    pub k: f64,
    pub alpha: f64,
    pub n: usize,
    pub err: f64,
    pub elapsed: Duration,
    pub status: String,
}

impl SweepRow {
    pub fn converged(&self) -> bool {
        self.status == "converged"
    }
}

/// Reads `WAVECOEFF_THREADS`; 0 or unset lets the pool pick.
pub fn thread_count() -> Result<usize> {
    match std::env::var("WAVECOEFF_THREADS") {
        Err(_) => Ok(0),
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("WAVECOEFF_THREADS must be a non-negative integer, got `{v}`"))),
    }
}

fn sweep_row(loaded: &LoadedConfig, problem: &Problem, case: &CaseConfig) -> SweepRow {
    let c = &loaded.config;
    let inputs = CaseInputs {
        omega: &case.omega,
        delta0: case.delta0,
        seed: case.seed.unwrap_or(c.observation.seed),
        k: case.k,
        alpha: case.alpha,
        epsilon: case.epsilon,
        p_true: case.p_true.as_ref(),
    };
    let omega_spec = window(&case.omega, &problem.grid)
        .map(|w| w.to_string())
        .unwrap_or_else(|_| intervals(&case.omega.iter().map(|&[a, b]| (a, b)).collect::<Vec<_>>()));
    match reconstruct_case(loaded, problem, &inputs) {
        Ok(r) => SweepRow {
            omega_spec,
            delta0: case.delta0,
            k: r.cfg.k,
            alpha: r.cfg.alpha,
            n: r.result.iterations,
            err: r.result.rel_error.unwrap_or(f64::NAN),
            elapsed: r.result.elapsed,
            status: if r.result.converged { "converged" } else { "max_iter" }.into(),
        },
        Err(e) => SweepRow {
            omega_spec,
            delta0: case.delta0,
            k: match case.k {
                Param::Value(v) => v,
                Param::Auto => f64::NAN,
            },
            alpha: match case.alpha {
                Param::Value(v) => v,
                Param::Auto => f64::NAN,
            },
            n: 0,
            err: f64::NAN,
            elapsed: Duration::ZERO,
            status: format!("error: {e}"),
        },
    }
}

pub fn run_sweep(loaded: &LoadedConfig) -> Result<Vec<SweepRow>> {
    let c = &loaded.config;
    if c.cases.is_empty() {
        return Err(CliError::Config("sweep mode needs at least one [[case]]".into()));
    }
    let problem = Problem::build(loaded)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count()?)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start worker threads: {e}")))?;
    let rows: Vec<SweepRow> = pool.install(|| {
        c.cases
            .par_iter()
            .map(|case| sweep_row(loaded, &problem, case))
            .collect()
    });

    fs::create_dir_all(&c.output.dir)?;
    let mut w = csv::Writer::from_path(c.output.dir.join("sweep.csv"))?;
    w.write_record(SWEEP_HEADER)?;
    for r in &rows {
        let elapsed = if c.output.timings {
            format!("{:.6}", r.elapsed.as_secs_f64())
        } else {
            "-".into()
        };
        w.write_record([
            r.omega_spec.clone(),
            num(r.delta0),
            num(r.k),
            num(r.alpha),
            r.n.to_string(),
            num(r.err),
            elapsed,
            r.status.clone(),
        ])?;
    }
    w.flush()?;
    Ok(rows)
}

pub struct GeometryRun {
    pub weights: CarlemanWeights,
    pub report: GeometryReport,
    pub window: ObservationWindow,
}

pub fn run_geometry(loaded: &LoadedConfig) -> Result<GeometryRun> {
    let c = &loaded.config;
    let gc = c.geometry.clone().unwrap_or_default();
    let pc = &c.problem;
    let grid = Grid1D::new(pc.x_min, pc.x_max, pc.n_cells)?;
    let profile = match &gc.d {
        Some(d) => WeightProfile::Sampled(spatial(loaded, d, "geometry.d", grid)?),
        None => WeightProfile::Quadratic { center: gc.center },
    };
    let weights = CarlemanWeights::new((pc.x_min, pc.x_max), profile, gc.beta, gc.lambda, gc.delta)
        .map_err(|e| CliError::Config(format!("invalid [geometry] block: {e}")))?;
    let window = window(&c.observation.omega, &grid)?;
    let u0 = spatial(loaded, &pc.initial_value, "problem.initial_value", grid)?;
    let t_max = gc.t_max.unwrap_or(pc.t_max);
    let report = check_observation_geometry(&weights, &window, t_max, Some(&u0))?;
    let run = GeometryRun {
        weights,
        report,
        window,
    };
    write_geometry(&c.output.dir, &run, &gc)?;
    Ok(run)
}

fn geometry_rows(run: &GeometryRun) -> Vec<(&'static str, bool, String)> {
    let r = &run.report;
    let gamma = r.gamma.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(", ");
    vec![
        (
            "time_condition",
            r.time_condition,
            format!("T = {}, max d = {}, minimal T = {}", r.t_max, r.max_d, r.minimal_t),
        ),
        ("boundary_coverage", r.boundary_coverage, format!("omega = {}", run.window)),
        (
            "containment",
            r.containment,
            format!("closure of {} within the domain and Gamma = {{{gamma}}}", intervals(&r.level_set)),
        ),
        ("level_set", !r.level_set.is_empty(), intervals(&r.level_set)),
        (
            "feasible_beta",
            r.feasible_beta.is_some(),
            r.feasible_beta
                .map(|(a, b)| format!("({a},{b})"))
                .unwrap_or_else(|| "none".into()),
        ),
        (
            "nonvanishing",
            r.nonvanishing_min.is_some_and(|m| m > 0.0),
            format!("min |u0' d'| = {}", r.nonvanishing_min.unwrap_or(f64::NAN)),
        ),
    ]
}

fn write_geometry(dir: &Path, run: &GeometryRun, gc: &GeometryConfig) -> Result<()> {
    fs::create_dir_all(dir)?;
    let rows = geometry_rows(run);
    let mut w = csv::Writer::from_path(dir.join("geometry.csv"))?;
    w.write_record(GEOMETRY_HEADER)?;
    for (name, holds, detail) in &rows {
        w.write_record([*name, if *holds { "true" } else { "false" }, detail.as_str()])?;
    }
    w.flush()?;

    let r = &run.report;
    let d = match &gc.d {
        Some(d) => format!("sampled from `{}`", d.get_ref()),
        None => format!("(x - x0)^2 with x0 = {}", gc.center),
    };
    let verdict = |b: bool| if b { "holds" } else { "fails" };
    let mut s = format!(
        "weight d(x) = {d}, beta = {}, lambda = {}, delta = {}\n",
        run.weights.beta(),
        run.weights.lambda(),
        run.weights.delta()
    );
    s.push_str(&format!("observation window omega = {}, T = {}\n\n", run.window, r.t_max));
    s.push_str(&format!(
        "time condition T^2 > max d: {} (max d = {}, minimal T = {})\n",
        verdict(r.time_condition),
        r.max_d,
        r.minimal_t
    ));
    s.push_str(&format!("boundary coverage of omega: {}\n", verdict(r.boundary_coverage)));
    s.push_str(&format!("containment of closure of Omega(delta): {}\n", verdict(r.containment)));
    s.push_str(&format!("level set Omega(delta): {}\n", intervals(&r.level_set)));
    s.push_str(&format!(
        "feasible beta interval: {}\n",
        rows[4].2
    ));
    s.push_str(&format!("non-vanishing check: {}\n", rows[5].2));
    fs::write(dir.join("geometry.txt"), s)?;
    Ok(())
}

/// Runs the configured mode and reports how it ended.
pub fn execute(loaded: &LoadedConfig) -> Result<Status> {
    let ok = |b: bool| if b { Status::Converged } else { Status::NotConverged };
    match loaded.config.mode {
        Mode::Single => Ok(ok(run_single(loaded)?.run.result.converged)),
        Mode::Sweep => Ok(ok(run_sweep(loaded)?.iter().all(SweepRow::converged))),
        Mode::Geometry => run_geometry(loaded).map(|_| Status::Converged),
    }
}
