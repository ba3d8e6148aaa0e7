//! Sweep runner: expands a config into (theta, order) cells, runs them
//! concurrently, and writes per-cell CSV files plus a run manifest.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use fracwr::bounds::{self, BoundCurve, BoundInputs, HConvention};
use fracwr::dnwr::{self, dnwr_iterate};
use fracwr::nnwr::{self, nnwr_iterate};
use fracwr::solver1d::solve_monodomain;
use fracwr::solver2d::{nnwr2d_iterate, solve_monodomain_2d, LineWaveform, Problem2D};
use fracwr::timegrid::CaputoWeights;
use fracwr::{
    DecompositionSpec, FracError, ProblemSpec, Quantity, Result, TimeMesh, Waveform,
    WaveformTag,
};

use crate::catalog;
use crate::config::{Algorithm, ExperimentConfig, Grading, ThetaPolicy};

pub struct CellOutcome {
    /// Representative theta (the swept value, or the first interface theta).
    pub theta_label: f64,
    /// Per-interface thetas actually used.
    pub theta: Vec<f64>,
    /// Fractional order 2*nu of this cell.
    pub order: f64,
    /// Reference-based interface error per iteration (k = 0 is the guess).
    pub errors: Vec<f64>,
    pub update_norms: Vec<f64>,
    pub bound: Option<BoundCurve>,
    pub wall_seconds: f64,
    pub failure: Option<String>,
}

impl CellOutcome {
    /// Iterations needed to bring the reference error below `tol`.
    pub fn iterations_to(&self, tol: f64) -> Option<usize> {
        self.errors.iter().position(|e| *e < tol)
    }
}

pub struct RunSummary {
    pub cells: Vec<CellOutcome>,
    pub files: Vec<PathBuf>,
    pub all_ok: bool,
}

/// Time mesh for one fractional order: graded for sub-diffusion, uniform at
/// and above the classical order (the diffusion-wave scheme needs it).
pub fn build_mesh(cfg: &ExperimentConfig, order: f64) -> Result<Arc<TimeMesh>> {
    let mesh = if order < 1.0 {
        let r = match cfg.grading {
            Grading::Auto => TimeMesh::optimal_grading(order),
            Grading::Fixed(r) => r,
        };
        TimeMesh::graded(cfg.t_end, cfg.steps, r)?
    } else {
        if let Grading::Fixed(r) = cfg.grading {
            if r != 1.0 {
                return Err(FracError::UnsupportedMesh(
                    "orders >= 1 run on uniform meshes".into(),
                ));
            }
        }
        TimeMesh::uniform(cfg.t_end, cfg.steps)?
    };
    Ok(Arc::new(mesh))
}

fn optimal_thetas_for(cfg: &ExperimentConfig, decomp: Option<&DecompositionSpec>) -> Vec<f64> {
    match cfg.algorithm {
        Algorithm::Dnwr => dnwr::optimal_thetas(decomp.expect("1d")),
        Algorithm::Nnwr => nnwr::optimal_thetas(decomp.expect("1d")),
        Algorithm::Nnwr2d => vec![0.25],
    }
}

/// The theta cells of the sweep. A sweep grid is 0.05..0.95 resampled to
/// `count` points with the nearest grid point replaced by theta* (so the
/// optimum always belongs to the grid).
pub fn theta_cells(
    cfg: &ExperimentConfig,
    decomp: Option<&DecompositionSpec>,
) -> Vec<(f64, Vec<f64>)> {
    let n_int = match cfg.algorithm {
        Algorithm::Nnwr2d => 1,
        _ => decomp.map(|d| d.n_interfaces()).unwrap_or(1),
    };
    match &cfg.theta {
        ThetaPolicy::Optimal => {
            let th = optimal_thetas_for(cfg, decomp);
            vec![(th[0], th)]
        }
        ThetaPolicy::Fixed(v) => {
            let th: Vec<f64> = if v.len() == 1 {
                vec![v[0]; n_int]
            } else {
                v.clone()
            };
            vec![(th[0], th)]
        }
        ThetaPolicy::Sweep { count } => {
            let star = optimal_thetas_for(cfg, decomp)[0];
            // base grid centred on the usable range for this algorithm
            let hi: f64 = match cfg.algorithm {
                Algorithm::Dnwr => 0.9,
                _ => 0.45,
            };
            let lo = hi / (*count as f64);
            let mut grid: Vec<f64> = (0..*count)
                .map(|i| lo + (hi - lo) * i as f64 / (*count as f64 - 1.0).max(1.0))
                .collect();
            let nearest = grid
                .iter()
                .enumerate()
                .min_by(|a, b| {
                    (a.1 - star).abs().partial_cmp(&(b.1 - star).abs()).unwrap()
                })
                .map(|(i, _)| i)
                .unwrap();
            grid[nearest] = star;
            grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
            grid.dedup();
            grid.into_iter().map(|t| (t, vec![t; n_int])).collect()
        }
    }
}

fn problem_1d(cfg: &ExperimentConfig, order: f64, decomp: &DecompositionSpec) -> Result<ProblemSpec> {
    Ok(ProblemSpec {
        nu: order / 2.0,
        domain: cfg.domain,
        kappa: decomp.kappa_map(),
        forcing: catalog::forcing(&cfg.forcing)?,
        dirichlet: Arc::new(|_, _| 0.0),
        u0: catalog::initial(&cfg.initial)?,
        v0: Arc::new(|_| 0.0),
        t_end: cfg.t_end,
    })
}

fn problem_2d(cfg: &ExperimentConfig, order: f64) -> Result<Problem2D> {
    Ok(Problem2D {
        nu: order / 2.0,
        x_range: cfg.domain,
        y_range: cfg.domain_y,
        kappa: cfg.kappa.first().copied().unwrap_or(1.0),
        forcing: catalog::forcing_2d(&cfg.forcing)?,
        dirichlet: Arc::new(|_, _, _| 0.0),
        u0: catalog::initial_2d(&cfg.initial)?,
        v0: Arc::new(|_, _| 0.0),
        t_end: cfg.t_end,
    })
}

pub fn decomposition(cfg: &ExperimentConfig, theta: &[f64]) -> Result<DecompositionSpec> {
    DecompositionSpec::new(
        cfg.breakpoints.clone(),
        cfg.kappa.clone(),
        theta.to_vec(),
        cfg.dx.clone(),
    )
}

fn bound_for(cfg: &ExperimentConfig, order: f64) -> Option<Result<BoundCurve>> {
    if !cfg.bound_overlay {
        return None;
    }
    let nu = order / 2.0;
    let k_max = cfg.k_max;
    Some(match cfg.algorithm {
        Algorithm::Dnwr => {
            let lengths: Vec<f64> = (0..cfg.kappa.len())
                .map(|i| cfg.breakpoints[i + 1] - cfg.breakpoints[i])
                .collect();
            let inp = BoundInputs { nu, t_end: cfg.t_end, lengths, kappa: cfg.kappa.clone() };
            if nu <= 0.5 {
                bounds::dnwr_bound_subdiffusion(&inp, k_max, HConvention::MinScaled)
            } else {
                bounds::dnwr_bound_wave(&inp, k_max)
            }
        }
        Algorithm::Nnwr => {
            let lengths: Vec<f64> = (0..cfg.kappa.len())
                .map(|i| cfg.breakpoints[i + 1] - cfg.breakpoints[i])
                .collect();
            let inp = BoundInputs { nu, t_end: cfg.t_end, lengths, kappa: cfg.kappa.clone() };
            bounds::nnwr_bound_1d(&inp, k_max)
        }
        Algorithm::Nnwr2d => bounds::nnwr_bound_2d(
            cfg.split - cfg.domain.0,
            cfg.domain.1 - cfg.split,
            cfg.kappa.first().copied().unwrap_or(1.0),
            nu,
            cfg.t_end,
            k_max,
        ),
    })
}

fn run_cell_1d(
    cfg: &ExperimentConfig,
    order: f64,
    theta: &[f64],
    mesh: &Arc<TimeMesh>,
    reference: &[Waveform],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let decomp = decomposition(cfg, theta)?;
    let spec = problem_1d(cfg, order, &decomp)?;
    let guesses: Vec<Waveform> = (1..=decomp.n_interfaces())
        .map(|i| {
            Waveform::step_guess(
                mesh.clone(),
                1.0,
                (spec.u0)(decomp.interface_x(i)),
                WaveformTag { interface: i, quantity: Quantity::Trace },
            )
        })
        .collect();
    let (errors, update_norms) = match cfg.algorithm {
        Algorithm::Dnwr => {
            let out = dnwr_iterate(&spec, &decomp, mesh, guesses, cfg.k_max, cfg.tol)?;
            (out.history.errors_against(reference)?, out.history.update_norms)
        }
        Algorithm::Nnwr => {
            let out = nnwr_iterate(&spec, &decomp, mesh, guesses, cfg.k_max, cfg.tol)?;
            (out.history.errors_against(reference)?, out.history.update_norms)
        }
        Algorithm::Nnwr2d => unreachable!(),
    };
    Ok((errors, update_norms))
}

fn run_cell_2d(
    cfg: &ExperimentConfig,
    order: f64,
    theta: f64,
    mesh: &Arc<TimeMesh>,
    reference: &LineWaveform,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let prob = problem_2d(cfg, order)?;
    let mut guess = LineWaveform::zeros(mesh.clone(), reference.ys.clone());
    for (iy, &y) in reference.ys.clone().iter().enumerate() {
        guess.values[0][iy] = (prob.u0)(cfg.split, y);
    }
    let interior = 1..reference.ys.len() - 1;
    for step in 1..=mesh.steps() {
        for iy in interior.clone() {
            guess.values[step][iy] = 1.0;
        }
    }
    let dx = cfg.dx.first().copied().unwrap_or(0.01);
    let out = nnwr2d_iterate(
        &prob, cfg.split, theta, mesh, dx, cfg.dy, guess, cfg.k_max, cfg.tol,
    )?;
    Ok((out.history.errors_against(reference), out.history.update_norms))
}

/// Run every (theta, order) cell; pure computation, no file output.
pub fn run_cells(cfg: &ExperimentConfig) -> Result<Vec<CellOutcome>> {
    cfg.validate()?;
    let run = || -> Result<Vec<CellOutcome>> {
        let mut jobs = Vec::new();
        for &order in &cfg.orders {
            let mesh = build_mesh(cfg, order)?;
            // reference solve shared by all theta cells of this order
            match cfg.algorithm {
                Algorithm::Nnwr2d => {
                    let prob = problem_2d(cfg, order)?;
                    let weights = CaputoWeights::for_order(&mesh, order)?;
                    let dx = cfg.dx.first().copied().unwrap_or(0.01);
                    let mono =
                        solve_monodomain_2d(&prob, cfg.split, dx, cfg.dy, &mesh, &weights)?;
                    let reference = Arc::new(mono.trace);
                    for (label, th) in theta_cells(cfg, None) {
                        jobs.push((order, label, th, mesh.clone(), None, Some(reference.clone())));
                    }
                }
                _ => {
                    let probe_theta =
                        vec![0.5; cfg.breakpoints.len().saturating_sub(2).max(1)];
                    let decomp = decomposition(cfg, &probe_theta)?;
                    let spec = problem_1d(cfg, order, &decomp)?;
                    let weights = CaputoWeights::for_order(&mesh, order)?;
                    let mono = solve_monodomain(&spec, &decomp, &mesh, &weights)?;
                    let reference = Arc::new(mono.traces);
                    for (label, th) in theta_cells(cfg, Some(&decomp)) {
                        jobs.push((order, label, th, mesh.clone(), Some(reference.clone()), None));
                    }
                }
            }
        }

        let cells: Vec<CellOutcome> = jobs
            .par_iter()
            .map(|(order, label, th, mesh, ref1d, ref2d)| {
                let started = Instant::now();
                let result = match cfg.algorithm {
                    Algorithm::Nnwr2d => {
                        run_cell_2d(cfg, *order, th[0], mesh, ref2d.as_ref().unwrap())
                    }
                    _ => run_cell_1d(cfg, *order, th, mesh, ref1d.as_ref().unwrap()),
                };
                let wall = started.elapsed().as_secs_f64();
                let bound = bound_for(cfg, *order).and_then(|b| b.ok());
                match result {
                    Ok((errors, update_norms)) => CellOutcome {
                        theta_label: *label,
                        theta: th.clone(),
                        order: *order,
                        errors,
                        update_norms,
                        bound,
                        wall_seconds: wall,
                        failure: None,
                    },
                    Err(e) => CellOutcome {
                        theta_label: *label,
                        theta: th.clone(),
                        order: *order,
                        errors: Vec::new(),
                        update_norms: Vec::new(),
                        bound,
                        wall_seconds: wall,
                        failure: Some(e.to_string()),
                    },
                }
            })
            .collect();
        Ok(cells)
    };
    if cfg.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| FracError::InvalidParameter(format!("worker pool: {e}")))?
            .install(run)
    } else {
        run()
    }
}

const CSV_SCHEMA: &str = "# fracwr cell csv schema v1: k,error,update_norm,wall_time[,bound]\n\
# bound column = theorem curve scaled by the initial error (overlay-ready)";

fn write_atomic(path: &Path, content: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    let io = |e: std::io::Error| FracError::InvalidParameter(format!("io: {e}"));
    let mut f = fs::File::create(&tmp).map_err(io)?;
    f.write_all(content.as_bytes()).map_err(io)?;
    f.sync_all().ok();
    fs::rename(&tmp, path).map_err(io)?;
    Ok(())
}

pub fn cell_csv(cell: &CellOutcome) -> String {
    let mut s = String::new();
    s.push_str(CSV_SCHEMA);
    s.push('\n');
    s.push_str(&format!(
        "# algorithm cell: theta={} order={}\n",
        cell.theta_label, cell.order
    ));
    if let Some(b) = &cell.bound {
        for (name, v) in &b.constants {
            s.push_str(&format!("# bound {name} = {v}\n"));
        }
        for note in &b.notes {
            s.push_str(&format!("# note: {note}\n"));
        }
    }
    if let Some(msg) = &cell.failure {
        s.push_str(&format!("# FAILED: {msg}\n"));
    }
    s.push_str("k,error,update_norm,wall_time");
    if cell.bound.is_some() {
        s.push_str(",bound");
    }
    s.push('\n');
    for (k, e) in cell.errors.iter().enumerate() {
        let up = if k == 0 { f64::NAN } else { cell.update_norms[k - 1] };
        s.push_str(&format!("{k},{e:e},{up:e},{:e}", cell.wall_seconds));
        if let Some(b) = &cell.bound {
            if k < b.value.len() {
                let scaled = b.value[k] * cell.errors[0];
                s.push_str(&format!(",{scaled:e}"));
            } else {
                s.push(',');
            }
        }
        s.push('\n');
    }
    s
}

/// Full experiment: run cells, write one CSV per cell plus the manifest.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunSummary> {
    let cells = run_cells(cfg)?;
    fs::create_dir_all(out_dir)
        .map_err(|e| FracError::InvalidParameter(format!("cannot create {out_dir:?}: {e}")))?;
    let mut files = Vec::new();
    for cell in &cells {
        let name = format!(
            "{}_theta{:.4}_nu{}.csv",
            cfg.label, cell.theta_label, cell.order
        );
        let path = out_dir.join(name);
        write_atomic(&path, &cell_csv(cell))?;
        files.push(path);
    }

    let mut manifest = String::from("# fracwr run manifest v1\n");
    for (k, v) in cfg.manifest_entries() {
        manifest.push_str(&format!("{k} = {v}\n"));
    }
    for &order in &cfg.orders {
        let mesh = build_mesh(cfg, order)?;
        manifest.push_str(&format!(
            "derived.grading.nu{order} = {}\n",
            mesh.grading()
        ));
    }
    for cell in &cells {
        let status = cell.failure.clone().unwrap_or_else(|| "ok".into());
        manifest.push_str(&format!(
            "cell.theta{:.4}.nu{} = {} iters={} final_err={:e}\n",
            cell.theta_label,
            cell.order,
            status,
            cell.errors.len().saturating_sub(1),
            cell.errors.last().copied().unwrap_or(f64::NAN),
        ));
    }
    write_atomic(&out_dir.join("manifest.txt"), &manifest)?;

    // every written error must be finite and nonnegative; failures are
    // flagged per cell rather than dropped
    let all_ok = cells.iter().all(|c| {
        c.failure.is_none() && c.errors.iter().all(|e| e.is_finite() && *e >= 0.0)
    });
    Ok(RunSummary { cells, files, all_ok })
}
