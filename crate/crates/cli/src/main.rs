//! CLI for the waveform-relaxation experiment runner.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fracwr::bounds::{self, BoundInputs, HConvention};
use fracwr_cli::config::{Algorithm, ExperimentConfig, Grading, ThetaPolicy};
use fracwr_cli::presets;
use fracwr_cli::runner::{run_experiment, RunSummary};
use fracwr_cli::verify::{rows_to_csv, verify_kernels};

#[derive(Parser)]
#[command(
    name = "fracwr",
    about = "Waveform-relaxation solvers for time-fractional diffusion, with convergence-bound calculators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunFlags {
    /// Config file; its keys override every flag below.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Fractional orders 2*nu, comma separated.
    #[arg(long, value_delimiter = ',')]
    order: Vec<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    /// Domain endpoints "a,b".
    #[arg(long, value_delimiter = ',')]
    domain: Vec<f64>,
    /// Subdomain breakpoints x0,..,xN.
    #[arg(long, value_delimiter = ',')]
    breakpoints: Vec<f64>,
    /// Per-subdomain diffusion coefficients.
    #[arg(long, value_delimiter = ',')]
    kappa: Vec<f64>,
    /// Per-subdomain grid spacings.
    #[arg(long, value_delimiter = ',')]
    dx: Vec<f64>,
    /// theta policy: "optimal", "sweep", or comma-separated values.
    #[arg(long)]
    theta: Option<String>,
    #[arg(long)]
    steps: Option<usize>,
    /// Time grading exponent or "auto".
    #[arg(long)]
    grading: Option<String>,
    #[arg(long)]
    k_max: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    forcing: Option<String>,
    #[arg(long)]
    initial: Option<String>,
    /// 2D: y-range "lo,hi".
    #[arg(long, value_delimiter = ',')]
    domain_y: Vec<f64>,
    /// 2D: interface position.
    #[arg(long)]
    split: Option<f64>,
    /// 2D: y spacing.
    #[arg(long)]
    dy: Option<f64>,
    #[arg(long)]
    bound_overlay: bool,
    /// Worker threads for sweep cells (0 = all cores).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single configured experiment (any algorithm).
    Solve(RunFlags),
    /// Dirichlet-Neumann waveform relaxation in 1D.
    Dnwr(RunFlags),
    /// Neumann-Neumann waveform relaxation in 1D.
    Nnwr(RunFlags),
    /// Two-strip Neumann-Neumann waveform relaxation in 2D.
    Nnwr2d(RunFlags),
    /// Evaluate a theoretical bound curve to CSV without running a solver.
    Bounds {
        /// dnwr-sub | dnwr-wave | dnwr-2d | nnwr-1d | nnwr-2d
        #[arg(long)]
        family: String,
        /// Fractional order 2*nu.
        #[arg(long)]
        order: f64,
        #[arg(long, default_value_t = 1.0)]
        t_end: f64,
        /// Subdomain lengths (1D families).
        #[arg(long, value_delimiter = ',')]
        lengths: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        kappa: Vec<f64>,
        /// 2D family: the two strip widths.
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        b: Option<f64>,
        #[arg(long, default_value_t = 12)]
        k_max: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check every kernel lemma bound against quadrature L1 norms.
    VerifyKernels {
        #[arg(long)]
        out: Option<PathBuf>,
        /// Thinned grid for a fast sanity pass.
        #[arg(long)]
        quick: bool,
        #[arg(long, default_value_t = 1200)]
        panels: usize,
    },
    /// Re-run a shipped experiment configuration.
    Reproduce {
        id: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// List the shipped presets.
    ListPresets,
}

fn apply_flags(base: ExperimentConfig, flags: &RunFlags) -> Result<ExperimentConfig, String> {
    let mut cfg = base;
    if !flags.order.is_empty() {
        cfg.orders = flags.order.clone();
    }
    if let Some(t) = flags.t_end {
        cfg.t_end = t;
    }
    if flags.domain.len() == 2 {
        cfg.domain = (flags.domain[0], flags.domain[1]);
    }
    if !flags.breakpoints.is_empty() {
        cfg.breakpoints = flags.breakpoints.clone();
    }
    if !flags.kappa.is_empty() {
        cfg.kappa = flags.kappa.clone();
    }
    if !flags.dx.is_empty() {
        cfg.dx = flags.dx.clone();
    }
    if let Some(t) = &flags.theta {
        cfg.theta = match t.as_str() {
            "optimal" => ThetaPolicy::Optimal,
            "sweep" => ThetaPolicy::Sweep { count: 9 },
            list => {
                let vals: Result<Vec<f64>, _> = list.split(',').map(str::parse).collect();
                ThetaPolicy::Fixed(vals.map_err(|e| format!("bad --theta: {e}"))?)
            }
        };
    }
    if let Some(s) = flags.steps {
        cfg.steps = s;
    }
    if let Some(g) = &flags.grading {
        cfg.grading = if g == "auto" {
            Grading::Auto
        } else {
            Grading::Fixed(g.parse().map_err(|e| format!("bad --grading: {e}"))?)
        };
    }
    if let Some(k) = flags.k_max {
        cfg.k_max = k;
    }
    if let Some(t) = flags.tol {
        cfg.tol = t;
    }
    if let Some(f) = &flags.forcing {
        cfg.forcing = f.clone();
    }
    if let Some(u) = &flags.initial {
        cfg.initial = u.clone();
    }
    if flags.domain_y.len() == 2 {
        cfg.domain_y = (flags.domain_y[0], flags.domain_y[1]);
    }
    if let Some(s) = flags.split {
        cfg.split = s;
    }
    if let Some(d) = flags.dy {
        cfg.dy = d;
    }
    if flags.bound_overlay {
        cfg.bound_overlay = true;
    }
    cfg.workers = flags.workers;

    // a config file overrides the flags
    if let Some(path) = &flags.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        cfg = ExperimentConfig::parse(&text).map_err(|e| e.to_string())?;
    }
    Ok(cfg)
}

fn run_and_report(cfg: &ExperimentConfig, out: &Path) -> Result<(), String> {
    cfg.validate().map_err(|e| e.to_string())?;
    let summary: RunSummary = run_experiment(cfg, out).map_err(|e| e.to_string())?;
    for cell in &summary.cells {
        let status = cell.failure.clone().unwrap_or_else(|| "ok".into());
        println!(
            "theta={:.4} 2nu={}: {} iterations={} final_error={:.3e} ({:.2}s)",
            cell.theta_label,
            cell.order,
            status,
            cell.errors.len().saturating_sub(1),
            cell.errors.last().copied().unwrap_or(f64::NAN),
            cell.wall_seconds,
        );
    }
    println!("wrote {} cell file(s) under {}", summary.files.len(), out.display());
    if summary.all_ok {
        Ok(())
    } else {
        Err("one or more cells failed".into())
    }
}

#[allow(clippy::too_many_arguments)]
fn bound_command(
    family: &str,
    order: f64,
    t_end: f64,
    lengths: &[f64],
    kappa: &[f64],
    a: Option<f64>,
    b: Option<f64>,
    k_max: usize,
) -> Result<String, String> {
    let nu = order / 2.0;
    let curve = match family {
        "nnwr-2d" => {
            let (a, b) = (a.ok_or("--a required")?, b.ok_or("--b required")?);
            let kap = kappa.first().copied().unwrap_or(1.0);
            bounds::nnwr_bound_2d(a, b, kap, nu, t_end, k_max)
        }
        _ => {
            let inp = BoundInputs {
                nu,
                t_end,
                lengths: lengths.to_vec(),
                kappa: kappa.to_vec(),
            };
            match family {
                "dnwr-sub" => bounds::dnwr_bound_subdiffusion(&inp, k_max, HConvention::MinScaled),
                "dnwr-wave" => bounds::dnwr_bound_wave(&inp, k_max),
                "dnwr-2d" => bounds::dnwr_bound_2d(&inp, k_max),
                "nnwr-1d" => bounds::nnwr_bound_1d(&inp, k_max),
                other => return Err(format!("unknown bound family `{other}`")),
            }
        }
    }
    .map_err(|e| e.to_string())?;
    let mut s = String::new();
    for (name, v) in &curve.constants {
        s.push_str(&format!("# {name} = {v}\n"));
    }
    for note in &curve.notes {
        s.push_str(&format!("# note: {note}\n"));
    }
    s.push_str("k,bound,log_bound\n");
    for i in 0..curve.k.len() {
        s.push_str(&format!("{},{},{}\n", curve.k[i], curve.value[i], curve.log_value[i]));
    }
    Ok(s)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result: Result<(), String> = match cli.command {
        Command::Solve(flags) => {
            let out = flags.out.clone();
            apply_flags(ExperimentConfig::default(), &flags).and_then(|c| run_and_report(&c, &out))
        }
        Command::Dnwr(flags) => {
            let out = flags.out.clone();
            let force = flags.config.is_none();
            apply_flags(ExperimentConfig::default(), &flags).and_then(|mut c| {
                if force {
                    c.algorithm = Algorithm::Dnwr;
                }
                run_and_report(&c, &out)
            })
        }
        Command::Nnwr(flags) => {
            let out = flags.out.clone();
            let force = flags.config.is_none();
            apply_flags(ExperimentConfig::default(), &flags).and_then(|mut c| {
                if force {
                    c.algorithm = Algorithm::Nnwr;
                }
                run_and_report(&c, &out)
            })
        }
        Command::Nnwr2d(flags) => {
            let out = flags.out.clone();
            let force = flags.config.is_none();
            apply_flags(ExperimentConfig::default(), &flags).and_then(|mut c| {
                if force {
                    c.algorithm = Algorithm::Nnwr2d;
                }
                run_and_report(&c, &out)
            })
        }
        Command::Bounds { family, order, t_end, lengths, kappa, a, b, k_max, out } => {
            bound_command(&family, order, t_end, &lengths, &kappa, a, b, k_max).and_then(|csv| {
                match out {
                    Some(path) => std::fs::write(&path, csv)
                        .map_err(|e| format!("cannot write {}: {e}", path.display())),
                    None => {
                        print!("{csv}");
                        Ok(())
                    }
                }
            })
        }
        Command::VerifyKernels { out, quick, panels } => {
            verify_kernels(quick, panels).map_err(|e| e.to_string()).and_then(|rows| {
                let bad = rows
                    .iter()
                    .filter(|r| r.status == "VIOLATION" || r.status.starts_with("error"))
                    .count();
                let csv = rows_to_csv(&rows);
                let write_result = match out {
                    Some(path) => std::fs::write(&path, &csv)
                        .map_err(|e| format!("cannot write {}: {e}", path.display())),
                    None => {
                        print!("{csv}");
                        Ok(())
                    }
                };
                write_result.and_then(|()| {
                    println!("# {} cases, {} problems", rows.len(), bad);
                    if bad == 0 {
                        Ok(())
                    } else {
                        Err(format!("{bad} kernel cases violated their bounds"))
                    }
                })
            })
        }
        Command::Reproduce { id, out } => presets::by_id(&id)
            .map_err(|e| e.to_string())
            .and_then(|p| {
                println!("# preset {}: {}", p.id, p.about);
                run_and_report(&p.config, &out.join(p.id))
            }),
        Command::ListPresets => {
            for p in presets::all_presets() {
                println!("{:28} {}", p.id, p.about);
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
