//! 1D implicit stepping on one subdomain or the whole composite domain.
//!
//! Interior rows are central second differences in flux form. Interface
//! Neumann conditions are imposed through half-cell balance rows, and the
//! fluxes handed to a neighbour are the matching discrete balance fluxes, so
//! that the union of two subdomain solves with consistent interface data
//! reproduces the monodomain rows exactly. That is what makes the DD fixed
//! point agree with the monodomain solution to solver roundoff rather than
//! to discretization order.

use std::sync::Arc;

use crate::error::{FracError, Result};
use crate::linalg::solve_tridiag;
use crate::problem::{ProblemSpec, Quantity, Waveform, WaveformTag};
use crate::timegrid::{CaputoWeights, TimeMesh};

/// A uniform grid on one subdomain with its diffusion constant.
#[derive(Debug, Clone)]
pub struct SubdomainGrid {
    pub x_left: f64,
    pub x_right: f64,
    pub n_cells: usize,
    pub kappa: f64,
}

impl SubdomainGrid {
    pub fn new(x_left: f64, x_right: f64, n_cells: usize, kappa: f64) -> Result<Self> {
        if !(x_right > x_left) || !(kappa > 0.0) {
            return Err(FracError::InvalidParameter(
                "subdomain needs positive length and kappa".into(),
            ));
        }
        if n_cells < 4 {
            return Err(FracError::InvalidGrid(
                "subdomain needs at least 3 interior nodes".into(),
            ));
        }
        Ok(SubdomainGrid { x_left, x_right, n_cells, kappa })
    }

    pub fn dx(&self) -> f64 {
        (self.x_right - self.x_left) / self.n_cells as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..=self.n_cells).map(|i| self.x_left + i as f64 * dx).collect()
    }
}

/// Boundary handling for one side of a subdomain solve.
pub enum SideBc<'a> {
    /// Outer physical boundary; the problem's Dirichlet data applies.
    OuterDirichlet,
    /// Interface Dirichlet data from a trace waveform.
    Dirichlet(&'a Waveform),
    /// Interface Neumann data: the incoming flux kappa * du/dx waveform.
    NeumannFlux(&'a Waveform),
}

/// Space-time field on a fixed grid: `values[step][node]`.
pub struct FieldHistory {
    pub xs: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl FieldHistory {
    pub fn linf_diff(&self, other: &FieldHistory) -> f64 {
        assert_eq!(self.xs.len(), other.xs.len());
        self.values
            .iter()
            .zip(other.values.iter())
            .flat_map(|(a, b)| a.iter().zip(b.iter()))
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Column of values over time at one node.
    pub fn node_series(&self, i: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[i]).collect()
    }
}

pub struct SubdomainSolution {
    pub field: FieldHistory,
    pub trace_left: Waveform,
    pub trace_right: Waveform,
    /// Discrete balance fluxes kappa*du/dx at the two ends, sampled at each
    /// step's enforcement time; entry 0 is unused.
    pub flux_left: Waveform,
    pub flux_right: Waveform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Second-order one-sided flux stencil at a subdomain end, per time step.
/// Exact for fields that are quadratic in x.
pub fn extract_flux(
    field: &FieldHistory,
    side: Side,
    kappa: f64,
    mesh: &Arc<TimeMesh>,
    interface: usize,
) -> Result<Waveform> {
    let n = field.xs.len();
    if n < 3 {
        return Err(FracError::InvalidGrid(
            "flux stencil needs at least 3 spatial nodes".into(),
        ));
    }
    let dx = field.xs[1] - field.xs[0];
    let values = field
        .values
        .iter()
        .map(|u| match side {
            Side::Left => kappa * (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * dx),
            Side::Right => kappa * (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * dx),
        })
        .collect();
    Waveform::new(mesh.clone(), values, WaveformTag { interface, quantity: Quantity::Flux })
}

fn check_waveform(mesh: &Arc<TimeMesh>, bc: &SideBc) -> Result<()> {
    let wf = match bc {
        SideBc::Dirichlet(w) | SideBc::NeumannFlux(w) => w,
        SideBc::OuterDirichlet => return Ok(()),
    };
    if wf.values().len() != mesh.steps() + 1 {
        return Err(FracError::Incompatible(
            "boundary waveform not sampled on the solve mesh".into(),
        ));
    }
    Ok(())
}

/// Implicit solve of the subdomain problem over the whole time window.
pub fn solve_subdomain(
    grid: &SubdomainGrid,
    spec: &ProblemSpec,
    mesh: &Arc<TimeMesh>,
    weights: &CaputoWeights,
    left: SideBc,
    right: SideBc,
) -> Result<SubdomainSolution> {
    spec.validate()?;
    check_waveform(mesh, &left)?;
    check_waveform(mesh, &right)?;
    if weights.steps() != mesh.steps() {
        return Err(FracError::Incompatible("weights built for a different mesh".into()));
    }

    let xs = grid.nodes();
    let nx = xs.len();
    let dx = grid.dx();
    let kappa = grid.kappa;
    let m = mesh.steps();
    let beta_i = weights.beta_implicit();
    let beta_e = weights.beta_explicit();

    let mut values: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    values.push(xs.iter().map(|&x| (spec.u0)(x)).collect());
    let v0_samples: Vec<f64> = xs.iter().map(|&x| (spec.v0)(x)).collect();

    // balance-flux bookkeeping
    let mut flux_left = vec![0.0; m + 1];
    let mut flux_right = vec![0.0; m + 1];

    let mut sub = vec![0.0; nx];
    let mut diag = vec![0.0; nx];
    let mut sup = vec![0.0; nx];
    let mut rhs = vec![0.0; nx];
    let mut hist = vec![0.0; nx];

    let r_imp = beta_i * kappa / (dx * dx);
    let r_exp = beta_e * kappa / (dx * dx);

    for n in 1..=m {
        let sigma = weights.lead(n);
        let t_enf = mesh.enforcement_time(n, weights.scheme());
        let t_node = mesh.nodes()[n];

        // history term per node
        for h in hist.iter_mut() {
            *h = 0.0;
        }
        let coef = weights.hist_coef(n);
        for (j, &c) in coef.iter().enumerate() {
            if c != 0.0 {
                let uj = &values[j];
                for i in 0..nx {
                    hist[i] += c * uj[i];
                }
            }
        }
        let v0c = weights.v0_coef(n);
        if v0c != 0.0 {
            for i in 0..nx {
                hist[i] += v0c * v0_samples[i];
            }
        }

        let prev = &values[n - 1];
        for i in 1..nx - 1 {
            sub[i] = -r_imp;
            diag[i] = sigma + 2.0 * r_imp;
            sup[i] = -r_imp;
            rhs[i] = (spec.forcing)(xs[i], t_enf)
                + hist[i]
                + r_exp * (prev[i + 1] - 2.0 * prev[i] + prev[i - 1]);
        }

        match &left {
            SideBc::OuterDirichlet => {
                sub[0] = 0.0;
                diag[0] = 1.0;
                sup[0] = 0.0;
                rhs[0] = (spec.dirichlet)(xs[0], t_node);
            }
            SideBc::Dirichlet(w) => {
                sub[0] = 0.0;
                diag[0] = 1.0;
                sup[0] = 0.0;
                rhs[0] = w.values()[n];
            }
            SideBc::NeumannFlux(w) => {
                let q = w.values()[n];
                sub[0] = 0.0;
                diag[0] = sigma + 2.0 * r_imp;
                sup[0] = -2.0 * r_imp;
                rhs[0] = (spec.forcing)(xs[0], t_enf) + hist[0] - 2.0 * q / dx
                    + 2.0 * r_exp * (prev[1] - prev[0]);
            }
        }
        match &right {
            SideBc::OuterDirichlet => {
                sub[nx - 1] = 0.0;
                diag[nx - 1] = 1.0;
                sup[nx - 1] = 0.0;
                rhs[nx - 1] = (spec.dirichlet)(xs[nx - 1], t_node);
            }
            SideBc::Dirichlet(w) => {
                sub[nx - 1] = 0.0;
                diag[nx - 1] = 1.0;
                sup[nx - 1] = 0.0;
                rhs[nx - 1] = w.values()[n];
            }
            SideBc::NeumannFlux(w) => {
                let q = w.values()[n];
                sub[nx - 1] = -2.0 * r_imp;
                diag[nx - 1] = sigma + 2.0 * r_imp;
                sup[nx - 1] = 0.0;
                rhs[nx - 1] = (spec.forcing)(xs[nx - 1], t_enf) + hist[nx - 1]
                    + 2.0 * q / dx
                    + 2.0 * r_exp * (prev[nx - 2] - prev[nx - 1]);
            }
        }

        // strict diagonal dominance holds for every valid input
        for i in 0..nx {
            assert!(
                diag[i] > 0.0 && diag[i] >= sub[i].abs() + sup[i].abs(),
                "assembled system lost diagonal dominance at row {i}"
            );
        }

        let u = solve_tridiag(&sub, &diag, &sup, &rhs);

        // balance fluxes at the enforcement time
        let ctu0 = sigma * u[0] - hist[0];
        let ctun = sigma * u[nx - 1] - hist[nx - 1];
        flux_left[n] = kappa
            * (beta_i * (u[1] - u[0]) + beta_e * (prev[1] - prev[0]))
            / dx
            - 0.5 * dx * (ctu0 - (spec.forcing)(xs[0], t_enf));
        flux_right[n] = kappa
            * (beta_i * (u[nx - 1] - u[nx - 2]) + beta_e * (prev[nx - 1] - prev[nx - 2]))
            / dx
            + 0.5 * dx * (ctun - (spec.forcing)(xs[nx - 1], t_enf));

        values.push(u);
    }

    let trace_left = Waveform::new(
        mesh.clone(),
        values.iter().map(|u| u[0]).collect(),
        WaveformTag { interface: 0, quantity: Quantity::Trace },
    )?;
    let trace_right = Waveform::new(
        mesh.clone(),
        values.iter().map(|u| u[nx - 1]).collect(),
        WaveformTag { interface: 0, quantity: Quantity::Trace },
    )?;
    let flux_left = Waveform::new(
        mesh.clone(),
        flux_left,
        WaveformTag { interface: 0, quantity: Quantity::Flux },
    )?;
    let flux_right = Waveform::new(
        mesh.clone(),
        flux_right,
        WaveformTag { interface: 0, quantity: Quantity::Flux },
    )?;

    Ok(SubdomainSolution {
        field: FieldHistory { xs, values },
        trace_left,
        trace_right,
        flux_left,
        flux_right,
    })
}

pub struct MonodomainSolution {
    pub field: FieldHistory,
    /// Trace waveform at each interior breakpoint of the decomposition.
    pub traces: Vec<Waveform>,
    /// Node index of each interface in the composite grid.
    pub interface_nodes: Vec<usize>,
}

/// Composite grid built from the per-subdomain spacings; interfaces are
/// shared nodes.
pub fn composite_grid(decomp: &crate::problem::DecompositionSpec) -> (Vec<f64>, Vec<usize>) {
    let mut xs = vec![decomp.breakpoints[0]];
    let mut interface_nodes = Vec::new();
    for i in 0..decomp.n_subdomains() {
        let a = decomp.breakpoints[i];
        let b = decomp.breakpoints[i + 1];
        let n_cells = (((b - a) / decomp.dx[i]).round() as usize).max(4);
        let dx = (b - a) / n_cells as f64;
        for j in 1..=n_cells {
            xs.push(a + j as f64 * dx);
        }
        if i + 1 < decomp.n_subdomains() {
            interface_nodes.push(xs.len() - 1);
        }
    }
    (xs, interface_nodes)
}

/// Harmonic-mean diffusion on the segment between two nodes. Coincides with
/// the cell value when kappa is constant on the cell, and yields the
/// flux-continuous two-layer stencil when a jump falls inside it.
fn face_kappa(kappa: &crate::problem::PiecewiseConstant, xl: f64, xr: f64) -> f64 {
    let mut pts = vec![xl];
    for &c in kappa.cuts() {
        if c > xl && c < xr {
            pts.push(c);
        }
    }
    pts.push(xr);
    let mut acc = 0.0;
    for w in pts.windows(2) {
        acc += (w[1] - w[0]) / kappa.value_at(0.5 * (w[0] + w[1]));
    }
    (xr - xl) / acc
}

/// Single-domain reference solve on the composite grid; the DD fixed point
/// must reproduce this field.
pub fn solve_monodomain(
    spec: &ProblemSpec,
    decomp: &crate::problem::DecompositionSpec,
    mesh: &Arc<TimeMesh>,
    weights: &CaputoWeights,
) -> Result<MonodomainSolution> {
    spec.validate()?;
    let (xs, interface_nodes) = composite_grid(decomp);
    let nx = xs.len();
    let m = mesh.steps();
    let beta_i = weights.beta_implicit();
    let beta_e = weights.beta_explicit();

    // per-face diffusion
    let kface: Vec<f64> = (0..nx - 1).map(|i| face_kappa(&spec.kappa, xs[i], xs[i + 1])).collect();

    let mut values: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    values.push(xs.iter().map(|&x| (spec.u0)(x)).collect());
    let v0_samples: Vec<f64> = xs.iter().map(|&x| (spec.v0)(x)).collect();

    let mut sub = vec![0.0; nx];
    let mut diag = vec![0.0; nx];
    let mut sup = vec![0.0; nx];
    let mut rhs = vec![0.0; nx];
    let mut hist = vec![0.0; nx];

    for n in 1..=m {
        let sigma = weights.lead(n);
        let t_enf = mesh.enforcement_time(n, weights.scheme());
        let t_node = mesh.nodes()[n];

        for h in hist.iter_mut() {
            *h = 0.0;
        }
        for (j, &c) in weights.hist_coef(n).iter().enumerate() {
            if c != 0.0 {
                let uj = &values[j];
                for i in 0..nx {
                    hist[i] += c * uj[i];
                }
            }
        }
        let v0c = weights.v0_coef(n);
        if v0c != 0.0 {
            for i in 0..nx {
                hist[i] += v0c * v0_samples[i];
            }
        }

        let prev = &values[n - 1];
        for i in 1..nx - 1 {
            let dxl = xs[i] - xs[i - 1];
            let dxr = xs[i + 1] - xs[i];
            let vol = 0.5 * (dxl + dxr);
            let cl = kface[i - 1] / (dxl * vol);
            let cr = kface[i] / (dxr * vol);
            sub[i] = -beta_i * cl;
            diag[i] = sigma + beta_i * (cl + cr);
            sup[i] = -beta_i * cr;
            rhs[i] = (spec.forcing)(xs[i], t_enf)
                + hist[i]
                + beta_e * (cr * (prev[i + 1] - prev[i]) - cl * (prev[i] - prev[i - 1]));
        }
        sub[0] = 0.0;
        diag[0] = 1.0;
        sup[0] = 0.0;
        rhs[0] = (spec.dirichlet)(xs[0], t_node);
        sub[nx - 1] = 0.0;
        diag[nx - 1] = 1.0;
        sup[nx - 1] = 0.0;
        rhs[nx - 1] = (spec.dirichlet)(xs[nx - 1], t_node);

        for i in 0..nx {
            assert!(
                diag[i] > 0.0 && diag[i] >= sub[i].abs() + sup[i].abs(),
                "monodomain system lost diagonal dominance at row {i}"
            );
        }
        values.push(solve_tridiag(&sub, &diag, &sup, &rhs));
    }

    let traces = interface_nodes
        .iter()
        .enumerate()
        .map(|(k, &i)| {
            Waveform::new(
                mesh.clone(),
                values.iter().map(|u| u[i]).collect(),
                WaveformTag { interface: k + 1, quantity: Quantity::Trace },
            )
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(MonodomainSolution { field: FieldHistory { xs, values }, traces, interface_nodes })
}
