//! Problem descriptions and the interface-data types exchanged by the
//! waveform-relaxation iterations.

use std::sync::Arc;

use crate::error::{FracError, Result};
use crate::timegrid::TimeMesh;

pub type SpaceTimeFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type SpaceFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Piecewise-constant diffusion coefficient; `cuts` are the interior
/// breakpoints, `values` has one entry per piece.
#[derive(Debug, Clone)]
pub struct PiecewiseConstant {
    cuts: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseConstant {
    pub fn constant(v: f64) -> Self {
        PiecewiseConstant { cuts: Vec::new(), values: vec![v] }
    }

    pub fn new(cuts: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != cuts.len() + 1 {
            return Err(FracError::InvalidParameter(
                "piecewise map needs one value per piece".into(),
            ));
        }
        if cuts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(FracError::InvalidParameter(
                "piecewise breakpoints must be strictly increasing".into(),
            ));
        }
        if values.iter().any(|v| !(*v > 0.0)) {
            return Err(FracError::InvalidParameter(
                "diffusion coefficient must be positive".into(),
            ));
        }
        Ok(PiecewiseConstant { cuts, values })
    }

    /// Value on the piece containing x; at a breakpoint the right piece wins.
    pub fn value_at(&self, x: f64) -> f64 {
        let i = self.cuts.iter().take_while(|c| **c <= x).count();
        self.values[i]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cuts(&self) -> &[f64] {
        &self.cuts
    }
}

/// A single PDE instance: order 2*nu Caputo time derivative, piecewise
/// diffusion, forcing, outer Dirichlet data and initial conditions.
#[derive(Clone)]
pub struct ProblemSpec {
    pub nu: f64,
    pub domain: (f64, f64),
    pub kappa: PiecewiseConstant,
    pub forcing: SpaceTimeFn,
    pub dirichlet: SpaceTimeFn,
    pub u0: SpaceFn,
    /// Initial velocity; only consulted when 2*nu > 1.
    pub v0: SpaceFn,
    pub t_end: f64,
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0 && self.nu < 1.0) {
            return Err(FracError::InvalidParameter(format!(
                "half-order nu must lie in (0,1), got {}",
                self.nu
            )));
        }
        if !(self.t_end > 0.0) {
            return Err(FracError::InvalidParameter("horizon must be positive".into()));
        }
        if !(self.domain.1 > self.domain.0) {
            return Err(FracError::InvalidParameter("empty spatial domain".into()));
        }
        Ok(())
    }

    /// The equation order 2*nu.
    pub fn order(&self) -> f64 {
        2.0 * self.nu
    }

    pub fn is_diffusion_wave(&self) -> bool {
        self.order() > 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Trace,
    Flux,
}

/// Identifies what a waveform samples and where.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WaveformTag {
    pub interface: usize,
    pub quantity: Quantity,
}

/// A time-sampled trace or flux on one interface: one value per mesh node.
/// Flux waveforms store, at index n, the value used by step n (the scheme's
/// enforcement time); index 0 is unused for fluxes.
#[derive(Clone)]
pub struct Waveform {
    mesh: Arc<TimeMesh>,
    values: Vec<f64>,
    pub tag: WaveformTag,
}

impl Waveform {
    pub fn new(mesh: Arc<TimeMesh>, values: Vec<f64>, tag: WaveformTag) -> Result<Self> {
        if values.len() != mesh.steps() + 1 {
            return Err(FracError::Incompatible(format!(
                "waveform has {} samples, mesh has {} nodes",
                values.len(),
                mesh.steps() + 1
            )));
        }
        Ok(Waveform { mesh, values, tag })
    }

    pub fn zeros(mesh: Arc<TimeMesh>, tag: WaveformTag) -> Self {
        let n = mesh.steps() + 1;
        Waveform { mesh, values: vec![0.0; n], tag }
    }

    /// Step-function initial guess: `value` on (0, T], the initial datum at
    /// t = 0.
    pub fn step_guess(mesh: Arc<TimeMesh>, value: f64, at_t0: f64, tag: WaveformTag) -> Self {
        let mut values = vec![value; mesh.steps() + 1];
        values[0] = at_t0;
        Waveform { mesh, values, tag }
    }

    pub fn mesh(&self) -> &Arc<TimeMesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn same_mesh(&self, other: &Waveform) -> bool {
        Arc::ptr_eq(&self.mesh, &other.mesh) || self.mesh.nodes() == other.mesh.nodes()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sup_distance(&self, other: &Waveform) -> f64 {
        self.values
            .iter()
            .zip(other.values.iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// 1D decomposition: breakpoints, per-subdomain diffusion and grid size,
/// per-interface relaxation parameter. Scaled lengths h_i = a_i / sqrt(k_i)
/// are derived at construction.
#[derive(Debug, Clone)]
pub struct DecompositionSpec {
    pub breakpoints: Vec<f64>,
    pub kappa: Vec<f64>,
    pub theta: Vec<f64>,
    pub dx: Vec<f64>,
    scaled_lengths: Vec<f64>,
}

impl DecompositionSpec {
    pub fn new(
        breakpoints: Vec<f64>,
        kappa: Vec<f64>,
        theta: Vec<f64>,
        dx: Vec<f64>,
    ) -> Result<Self> {
        let n = breakpoints.len().saturating_sub(1);
        if n < 2 {
            return Err(FracError::InvalidParameter(
                "decomposition needs at least two subdomains".into(),
            ));
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(FracError::InvalidParameter(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        if kappa.len() != n || dx.len() != n || theta.len() != n - 1 {
            return Err(FracError::InvalidParameter(format!(
                "expected {n} kappas/dx and {} thetas",
                n - 1
            )));
        }
        if kappa.iter().any(|k| !(*k > 0.0)) {
            return Err(FracError::InvalidParameter("kappa must be positive".into()));
        }
        if theta.iter().any(|t| !(*t > 0.0 && *t <= 1.0)) {
            return Err(FracError::InvalidParameter("theta must lie in (0,1]".into()));
        }
        if dx.iter().any(|d| !(*d > 0.0)) {
            return Err(FracError::InvalidParameter("dx must be positive".into()));
        }
        let scaled_lengths = (0..n)
            .map(|i| (breakpoints[i + 1] - breakpoints[i]) / kappa[i].sqrt())
            .collect();
        Ok(DecompositionSpec { breakpoints, kappa, theta, dx, scaled_lengths })
    }

    pub fn n_subdomains(&self) -> usize {
        self.kappa.len()
    }

    pub fn n_interfaces(&self) -> usize {
        self.n_subdomains() - 1
    }

    pub fn length(&self, i: usize) -> f64 {
        self.breakpoints[i + 1] - self.breakpoints[i]
    }

    /// h_i = a_i / sqrt(kappa_i).
    pub fn scaled_lengths(&self) -> &[f64] {
        &self.scaled_lengths
    }

    /// Interface coordinate x_i, i in 1..N (one-based).
    pub fn interface_x(&self, i: usize) -> f64 {
        self.breakpoints[i]
    }

    /// The piecewise-constant kappa map over the whole domain.
    pub fn kappa_map(&self) -> PiecewiseConstant {
        PiecewiseConstant::new(
            self.breakpoints[1..self.breakpoints.len() - 1].to_vec(),
            self.kappa.clone(),
        )
        .expect("validated at construction")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Tolerance,
    MaxIterations,
}

/// Record of one DD run: per-iteration interface traces (including the
/// initial guess), successive-update norms and the stopping condition.
pub struct IterationHistory {
    pub traces: Vec<Vec<Waveform>>,
    pub update_norms: Vec<f64>,
    pub termination: Termination,
}

impl IterationHistory {
    pub fn iterations(&self) -> usize {
        self.traces.len() - 1
    }

    /// e_k = max over interfaces of the sup-distance to the reference traces.
    pub fn errors_against(&self, reference: &[Waveform]) -> Result<Vec<f64>> {
        for (tr, rf) in self.traces[0].iter().zip(reference.iter()) {
            if !tr.same_mesh(rf) {
                return Err(FracError::Incompatible(
                    "reference traces sampled on a different mesh".into(),
                ));
            }
        }
        if reference.len() != self.traces[0].len() {
            return Err(FracError::Incompatible(
                "reference trace count differs from history".into(),
            ));
        }
        Ok(self
            .traces
            .iter()
            .map(|row| {
                row.iter()
                    .zip(reference.iter())
                    .fold(0.0f64, |m, (a, b)| m.max(a.sup_distance(b)))
            })
            .collect())
    }
}

/// Convenience free function mirroring `IterationHistory::errors_against`.
pub fn interface_error(history: &IterationHistory, reference: &[Waveform]) -> Result<Vec<f64>> {
    history.errors_against(reference)
}
