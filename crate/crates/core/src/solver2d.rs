//! 2D rectangular strip decomposition: line-implicit solves on each strip
//! with a banded direct factorization, and the two-subdomain NNWR cycle with
//! interface data living on (time x y-line).
//!
//! The same half-cell balance construction as in 1D makes the discrete DD
//! fixed point coincide with the monodomain field.

use std::sync::Arc;

use rayon::join;

use crate::error::{FracError, Result};
use crate::linalg::BandMatrix;
use crate::problem::Termination;
use crate::timegrid::{CaputoWeights, TimeMesh};

pub type SpaceTimeFn2 = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;
pub type SpaceFn2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Homogeneous-kappa problem on a rectangle with Dirichlet outer data.
#[derive(Clone)]
pub struct Problem2D {
    pub nu: f64,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub kappa: f64,
    pub forcing: SpaceTimeFn2,
    pub dirichlet: SpaceTimeFn2,
    pub u0: SpaceFn2,
    pub v0: SpaceFn2,
    pub t_end: f64,
}

impl Problem2D {
    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0 && self.nu < 1.0) || !(self.kappa > 0.0) || !(self.t_end > 0.0) {
            return Err(FracError::InvalidParameter("bad 2D problem parameters".into()));
        }
        if !(self.x_range.1 > self.x_range.0 && self.y_range.1 > self.y_range.0) {
            return Err(FracError::InvalidParameter("empty 2D domain".into()));
        }
        Ok(())
    }

    pub fn order(&self) -> f64 {
        2.0 * self.nu
    }

    fn homogeneous_like(&self) -> Problem2D {
        Problem2D {
            forcing: Arc::new(|_, _, _| 0.0),
            dirichlet: Arc::new(|_, _, _| 0.0),
            u0: Arc::new(|_, _| 0.0),
            v0: Arc::new(|_, _| 0.0),
            ..self.clone()
        }
    }
}

/// Waveform over (time x y-line): `values[step][iy]`, all y nodes included.
#[derive(Clone)]
pub struct LineWaveform {
    mesh: Arc<TimeMesh>,
    pub ys: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl LineWaveform {
    pub fn zeros(mesh: Arc<TimeMesh>, ys: Vec<f64>) -> Self {
        let steps = mesh.steps();
        let n = ys.len();
        LineWaveform { mesh, ys, values: vec![vec![0.0; n]; steps + 1] }
    }

    pub fn mesh(&self) -> &Arc<TimeMesh> {
        &self.mesh
    }

    pub fn sup_distance(&self, other: &LineWaveform) -> f64 {
        self.values
            .iter()
            .zip(other.values.iter())
            .flat_map(|(a, b)| a.iter().zip(b.iter()))
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn sup_norm(&self) -> f64 {
        self.values
            .iter()
            .flat_map(|r| r.iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum YBoundary {
    /// Outer Dirichlet rows at the two y edges (the physical setting).
    Dirichlet,
    /// Periodic wrap in y; test configuration for the row-decoupling check.
    Periodic,
}

/// Uniform grid on one strip.
#[derive(Debug, Clone)]
pub struct StripGrid {
    pub x_left: f64,
    pub x_right: f64,
    pub nx_cells: usize,
    pub y_lo: f64,
    pub y_hi: f64,
    pub ny_cells: usize,
    pub kappa: f64,
    pub y_boundary: YBoundary,
}

impl StripGrid {
    pub fn dx(&self) -> f64 {
        (self.x_right - self.x_left) / self.nx_cells as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_hi - self.y_lo) / self.ny_cells as f64
    }

    pub fn xs(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..=self.nx_cells).map(|i| self.x_left + i as f64 * dx).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        let dy = self.dy();
        match self.y_boundary {
            YBoundary::Dirichlet => {
                (0..=self.ny_cells).map(|j| self.y_lo + j as f64 * dy).collect()
            }
            // periodic: the node y_hi coincides with y_lo and is dropped
            YBoundary::Periodic => {
                (0..self.ny_cells).map(|j| self.y_lo + j as f64 * dy).collect()
            }
        }
    }
}

/// Boundary condition on the two x-sides of a strip.
pub enum StripBc<'a> {
    OuterDirichlet,
    Dirichlet(&'a LineWaveform),
    NeumannFlux(&'a LineWaveform),
}

/// Field on a strip: `values[step][ix * nys + iy]`.
pub struct Field2D {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl Field2D {
    #[inline]
    pub fn at(&self, step: usize, ix: usize, iy: usize) -> f64 {
        self.values[step][ix * self.ys.len() + iy]
    }

    pub fn linf_diff(&self, other: &Field2D) -> f64 {
        self.values
            .iter()
            .zip(other.values.iter())
            .flat_map(|(a, b)| a.iter().zip(b.iter()))
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

pub struct StripSolution {
    pub field: Field2D,
    pub trace_left: LineWaveform,
    pub trace_right: LineWaveform,
    /// Balance fluxes kappa du/dx per y node at each step's enforcement
    /// time; y-boundary entries are zero.
    pub flux_left: LineWaveform,
    pub flux_right: LineWaveform,
}

struct Assembled {
    matrix: BandMatrix,
    sigma: f64,
}

/// Implicit stepping on one strip. Dirichlet rows pin outer boundaries (and
/// the interface when trace data is given); interface Neumann rows use the
/// half-cell balance in x. The banded operator is factored once per distinct
/// leading coefficient, so uniform meshes factor exactly once.
pub fn solve_strip_2d(
    grid: &StripGrid,
    prob: &Problem2D,
    mesh: &Arc<TimeMesh>,
    weights: &CaputoWeights,
    left: StripBc,
    right: StripBc,
) -> Result<StripSolution> {
    prob.validate()?;
    if weights.steps() != mesh.steps() {
        return Err(FracError::Incompatible("weights built for a different mesh".into()));
    }
    if grid.nx_cells < 4 || grid.ny_cells < 4 {
        return Err(FracError::InvalidGrid("strip needs at least 4 cells per direction".into()));
    }
    for bc in [&left, &right] {
        if let StripBc::Dirichlet(w) | StripBc::NeumannFlux(w) = bc {
            if w.values.len() != mesh.steps() + 1 {
                return Err(FracError::Incompatible(
                    "interface waveform not on the solve mesh".into(),
                ));
            }
            if w.ys.len() != grid.ys().len() {
                return Err(FracError::Incompatible(
                    "interface waveform on a different y grid".into(),
                ));
            }
        }
    }

    let xs = grid.xs();
    let ys = grid.ys();
    let nxs = xs.len();
    let nys = ys.len();
    let n = nxs * nys;
    let dx = grid.dx();
    let dy = grid.dy();
    let kappa = grid.kappa;
    let periodic = grid.y_boundary == YBoundary::Periodic;
    let m = mesh.steps();
    let beta_i = weights.beta_implicit();
    let beta_e = weights.beta_explicit();
    let rx = kappa / (dx * dx);
    let ry = kappa / (dy * dy);

    let idx = |ix: usize, iy: usize| ix * nys + iy;
    let y_prev = |iy: usize| if iy == 0 { nys - 1 } else { iy - 1 };
    let y_next = |iy: usize| if iy + 1 == nys { 0 } else { iy + 1 };

    // row classification
    #[derive(Clone, Copy, PartialEq)]
    enum Row {
        Interior,
        OuterDirichlet,
        TraceDirichlet(bool), // true = left side
        Neumann(bool),        // true = left side
    }
    let classify = |ix: usize, iy: usize| -> Row {
        if !periodic && (iy == 0 || iy == nys - 1) {
            return Row::OuterDirichlet;
        }
        if ix == 0 {
            return match left {
                StripBc::OuterDirichlet => Row::OuterDirichlet,
                StripBc::Dirichlet(_) => Row::TraceDirichlet(true),
                StripBc::NeumannFlux(_) => Row::Neumann(true),
            };
        }
        if ix == nxs - 1 {
            return match right {
                StripBc::OuterDirichlet => Row::OuterDirichlet,
                StripBc::Dirichlet(_) => Row::TraceDirichlet(false),
                StripBc::NeumannFlux(_) => Row::Neumann(false),
            };
        }
        Row::Interior
    };

    let assemble = |sigma: f64| -> Assembled {
        let bw = nys; // y-fastest ordering: x neighbours are nys apart
        let mut a = BandMatrix::zeros(n, bw);
        for ix in 0..nxs {
            for iy in 0..nys {
                let r = idx(ix, iy);
                match classify(ix, iy) {
                    Row::OuterDirichlet | Row::TraceDirichlet(_) => {
                        a.set(r, r, 1.0);
                    }
                    Row::Interior => {
                        a.set(r, r, sigma + beta_i * (2.0 * rx + 2.0 * ry));
                        a.set(r, idx(ix - 1, iy), -beta_i * rx);
                        a.set(r, idx(ix + 1, iy), -beta_i * rx);
                        a.add(r, idx(ix, y_prev(iy)), -beta_i * ry);
                        a.add(r, idx(ix, y_next(iy)), -beta_i * ry);
                    }
                    Row::Neumann(is_left) => {
                        a.set(r, r, sigma + beta_i * (2.0 * rx + 2.0 * ry));
                        let nb = if is_left { idx(ix + 1, iy) } else { idx(ix - 1, iy) };
                        a.set(r, nb, -2.0 * beta_i * rx);
                        a.add(r, idx(ix, y_prev(iy)), -beta_i * ry);
                        a.add(r, idx(ix, y_next(iy)), -beta_i * ry);
                    }
                }
            }
        }
        let mut m = a;
        m.factor();
        Assembled { matrix: m, sigma }
    };

    let mut values: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    let mut u0 = vec![0.0; n];
    for ix in 0..nxs {
        for iy in 0..nys {
            u0[idx(ix, iy)] = (prob.u0)(xs[ix], ys[iy]);
        }
    }
    values.push(u0);
    let mut v0 = vec![0.0; n];
    for ix in 0..nxs {
        for iy in 0..nys {
            v0[idx(ix, iy)] = (prob.v0)(xs[ix], ys[iy]);
        }
    }

    let mut cached: Option<Assembled> = None;
    let mut hist = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    let mut flux_left = LineWaveform::zeros(mesh.clone(), ys.clone());
    let mut flux_right = LineWaveform::zeros(mesh.clone(), ys.clone());

    // discrete Laplacian pieces at the previous step (explicit CN part)
    let lap_y = |u: &[f64], ix: usize, iy: usize| -> f64 {
        (u[idx(ix, y_prev(iy))] - 2.0 * u[idx(ix, iy)] + u[idx(ix, y_next(iy))]) / (dy * dy)
    };

    for step in 1..=m {
        let sigma = weights.lead(step);
        let t_enf = mesh.enforcement_time(step, weights.scheme());
        let t_node = mesh.nodes()[step];

        let rebuild = match &cached {
            Some(a) => a.sigma != sigma,
            None => true,
        };
        if rebuild {
            cached = Some(assemble(sigma));
        }
        let assembled = cached.as_ref().unwrap();

        for h in hist.iter_mut() {
            *h = 0.0;
        }
        for (j, &c) in weights.hist_coef(step).iter().enumerate() {
            if c != 0.0 {
                let uj = &values[j];
                for i in 0..n {
                    hist[i] += c * uj[i];
                }
            }
        }
        let v0c = weights.v0_coef(step);
        if v0c != 0.0 {
            for i in 0..n {
                hist[i] += v0c * v0[i];
            }
        }

        let prev = &values[step - 1];
        for ix in 0..nxs {
            for iy in 0..nys {
                let r = idx(ix, iy);
                rhs[r] = match classify(ix, iy) {
                    Row::OuterDirichlet => (prob.dirichlet)(xs[ix], ys[iy], t_node),
                    Row::TraceDirichlet(is_left) => {
                        let w = if is_left {
                            match &left {
                                StripBc::Dirichlet(w) => w,
                                _ => unreachable!(),
                            }
                        } else {
                            match &right {
                                StripBc::Dirichlet(w) => w,
                                _ => unreachable!(),
                            }
                        };
                        w.values[step][iy]
                    }
                    Row::Interior => {
                        let lap_prev = (prev[idx(ix - 1, iy)] - 2.0 * prev[r]
                            + prev[idx(ix + 1, iy)])
                            / (dx * dx)
                            + lap_y(prev, ix, iy);
                        (prob.forcing)(xs[ix], ys[iy], t_enf)
                            + hist[r]
                            + beta_e * kappa * lap_prev
                    }
                    Row::Neumann(is_left) => {
                        let (w, sgn, nb) = if is_left {
                            let w = match &left {
                                StripBc::NeumannFlux(w) => w,
                                _ => unreachable!(),
                            };
                            (w, -1.0, idx(ix + 1, iy))
                        } else {
                            let w = match &right {
                                StripBc::NeumannFlux(w) => w,
                                _ => unreachable!(),
                            };
                            (w, 1.0, idx(ix - 1, iy))
                        };
                        let q = w.values[step][iy];
                        (prob.forcing)(xs[ix], ys[iy], t_enf)
                            + hist[r]
                            + sgn * 2.0 * q / dx
                            + beta_e
                                * (2.0 * rx * (prev[nb] - prev[r]) + kappa * lap_y(prev, ix, iy))
                    }
                };
            }
        }

        let u = assembled.matrix.solve(&rhs);

        // balance fluxes along the two x-ends at interior y nodes
        for iy in 0..nys {
            if !periodic && (iy == 0 || iy == nys - 1) {
                continue;
            }
            let f = (prob.forcing)(xs[0], ys[iy], t_enf);
            let r = idx(0, iy);
            let ct = sigma * u[r] - hist[r];
            let lap_y_enf = beta_i
                * kappa
                * ((u[idx(0, y_prev(iy))] - 2.0 * u[r] + u[idx(0, y_next(iy))]) / (dy * dy))
                + beta_e * kappa * lap_y(prev, 0, iy);
            flux_left.values[step][iy] = kappa
                * (beta_i * (u[idx(1, iy)] - u[r]) + beta_e * (prev[idx(1, iy)] - prev[r]))
                / dx
                - 0.5 * dx * (ct - lap_y_enf - f);

            let f = (prob.forcing)(xs[nxs - 1], ys[iy], t_enf);
            let r = idx(nxs - 1, iy);
            let ct = sigma * u[r] - hist[r];
            let lap_y_enf = beta_i
                * kappa
                * ((u[idx(nxs - 1, y_prev(iy))] - 2.0 * u[r] + u[idx(nxs - 1, y_next(iy))])
                    / (dy * dy))
                + beta_e * kappa * lap_y(prev, nxs - 1, iy);
            flux_right.values[step][iy] = kappa
                * (beta_i * (u[r] - u[idx(nxs - 2, iy)])
                    + beta_e * (prev[r] - prev[idx(nxs - 2, iy)]))
                / dx
                + 0.5 * dx * (ct - lap_y_enf - f);
        }

        values.push(u);
    }

    let mut trace_left = LineWaveform::zeros(mesh.clone(), ys.clone());
    let mut trace_right = LineWaveform::zeros(mesh.clone(), ys.clone());
    for step in 0..=m {
        for iy in 0..nys {
            trace_left.values[step][iy] = values[step][idx(0, iy)];
            trace_right.values[step][iy] = values[step][idx(nxs - 1, iy)];
        }
    }

    Ok(StripSolution {
        field: Field2D { xs, ys, values },
        trace_left,
        trace_right,
        flux_left,
        flux_right,
    })
}

pub struct Monodomain2D {
    pub field: Field2D,
    pub trace: LineWaveform,
    pub split_index: usize,
}

/// Reference solve on the full rectangle; the split must land on a grid node.
pub fn solve_monodomain_2d(
    prob: &Problem2D,
    split: f64,
    dx: f64,
    dy: f64,
    mesh: &Arc<TimeMesh>,
    weights: &CaputoWeights,
) -> Result<Monodomain2D> {
    let (x0, x1) = prob.x_range;
    let nx = ((x1 - x0) / dx).round() as usize;
    let ny = ((prob.y_range.1 - prob.y_range.0) / dy).round() as usize;
    let grid = StripGrid {
        x_left: x0,
        x_right: x1,
        nx_cells: nx,
        y_lo: prob.y_range.0,
        y_hi: prob.y_range.1,
        ny_cells: ny,
        kappa: prob.kappa,
        y_boundary: YBoundary::Dirichlet,
    };
    let sol = solve_strip_2d(
        &grid,
        prob,
        mesh,
        weights,
        StripBc::OuterDirichlet,
        StripBc::OuterDirichlet,
    )?;
    let split_index = ((split - x0) / grid.dx()).round() as usize;
    if (x0 + split_index as f64 * grid.dx() - split).abs() > 1e-9 * (x1 - x0) {
        return Err(FracError::Incompatible("split must lie on the monodomain grid".into()));
    }
    let mut trace = LineWaveform::zeros(mesh.clone(), sol.field.ys.clone());
    for step in 0..=mesh.steps() {
        for iy in 0..sol.field.ys.len() {
            trace.values[step][iy] = sol.field.at(step, split_index, iy);
        }
    }
    Ok(Monodomain2D { field: sol.field, trace, split_index })
}

pub struct Nnwr2dHistory {
    pub traces: Vec<LineWaveform>,
    pub update_norms: Vec<f64>,
    pub termination: Termination,
}

impl Nnwr2dHistory {
    pub fn iterations(&self) -> usize {
        self.traces.len() - 1
    }

    pub fn errors_against(&self, reference: &LineWaveform) -> Vec<f64> {
        self.traces.iter().map(|t| t.sup_distance(reference)).collect()
    }
}

pub struct Nnwr2dOutput {
    pub history: Nnwr2dHistory,
    pub final_fields: (Field2D, Field2D),
}

/// Two-subdomain NNWR in 2D: Dirichlet step on both strips, Neumann
/// correction driven by the interface flux jump, relaxed trace update.
#[allow(clippy::too_many_arguments)]
pub fn nnwr2d_iterate(
    prob: &Problem2D,
    split: f64,
    theta: f64,
    mesh: &Arc<TimeMesh>,
    dx: f64,
    dy: f64,
    initial: LineWaveform,
    k_max: usize,
    tol: f64,
) -> Result<Nnwr2dOutput> {
    prob.validate()?;
    if !(split > prob.x_range.0 && split < prob.x_range.1) {
        return Err(FracError::InvalidParameter("split must lie inside the domain".into()));
    }
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(FracError::InvalidParameter("theta must lie in (0,1]".into()));
    }
    let weights = CaputoWeights::for_order(mesh, prob.order())?;
    let ny = ((prob.y_range.1 - prob.y_range.0) / dy).round() as usize;
    let mk_grid = |a: f64, b: f64| StripGrid {
        x_left: a,
        x_right: b,
        nx_cells: (((b - a) / dx).round() as usize).max(4),
        y_lo: prob.y_range.0,
        y_hi: prob.y_range.1,
        ny_cells: ny.max(4),
        kappa: prob.kappa,
        y_boundary: YBoundary::Dirichlet,
    };
    let g1 = mk_grid(prob.x_range.0, split);
    let g2 = mk_grid(split, prob.x_range.1);
    if initial.ys.len() != g1.ys().len() {
        return Err(FracError::Incompatible("initial trace on a different y grid".into()));
    }
    let corr = prob.homogeneous_like();

    let mut traces = vec![initial];
    let mut update_norms = Vec::new();
    let mut termination = Termination::MaxIterations;
    let mut final_fields = None;

    for _k in 1..=k_max {
        let w = traces.last().unwrap();
        let (s1, s2) = join(
            || {
                solve_strip_2d(
                    &g1,
                    prob,
                    mesh,
                    &weights,
                    StripBc::OuterDirichlet,
                    StripBc::Dirichlet(w),
                )
            },
            || {
                solve_strip_2d(
                    &g2,
                    prob,
                    mesh,
                    &weights,
                    StripBc::Dirichlet(w),
                    StripBc::OuterDirichlet,
                )
            },
        );
        let (s1, s2) = (s1?, s2?);

        let mut jump = LineWaveform::zeros(mesh.clone(), s1.field.ys.clone());
        let mut neg_jump = LineWaveform::zeros(mesh.clone(), s1.field.ys.clone());
        for step in 1..=mesh.steps() {
            for iy in 0..jump.ys.len() {
                let v = s1.flux_right.values[step][iy] - s2.flux_left.values[step][iy];
                jump.values[step][iy] = v;
                neg_jump.values[step][iy] = -v;
            }
        }

        let (p1, p2) = join(
            || {
                solve_strip_2d(
                    &g1,
                    &corr,
                    mesh,
                    &weights,
                    StripBc::OuterDirichlet,
                    StripBc::NeumannFlux(&jump),
                )
            },
            || {
                solve_strip_2d(
                    &g2,
                    &corr,
                    mesh,
                    &weights,
                    StripBc::NeumannFlux(&neg_jump),
                    StripBc::OuterDirichlet,
                )
            },
        );
        let (p1, p2) = (p1?, p2?);

        let mut new_trace = w.clone();
        for step in 0..=mesh.steps() {
            for iy in 0..new_trace.ys.len() {
                new_trace.values[step][iy] -= theta
                    * (p1.trace_right.values[step][iy] + p2.trace_left.values[step][iy]);
            }
        }
        let update = new_trace.sup_distance(w);
        final_fields = Some((s1.field, s2.field));
        traces.push(new_trace);
        update_norms.push(update);
        if update < tol {
            termination = Termination::Tolerance;
            break;
        }
    }

    Ok(Nnwr2dOutput {
        history: Nnwr2dHistory { traces, update_norms, termination },
        final_fields: final_fields.expect("k_max >= 1"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver1d::{solve_subdomain, SideBc, SubdomainGrid};
    use crate::special::gamma;
    use crate::problem::{PiecewiseConstant, ProblemSpec};

    fn zero_prob(nu: f64) -> Problem2D {
        Problem2D {
            nu,
            x_range: (0.0, 1.0),
            y_range: (0.0, 1.0),
            kappa: 1.0,
            forcing: Arc::new(|_, _, _| 0.0),
            dirichlet: Arc::new(|_, _, _| 0.0),
            u0: Arc::new(|_, _| 0.0),
            v0: Arc::new(|_, _| 0.0),
            t_end: 1.0,
        }
    }

    fn grid_for(prob: &Problem2D, nx: usize, ny: usize) -> StripGrid {
        StripGrid {
            x_left: prob.x_range.0,
            x_right: prob.x_range.1,
            nx_cells: nx,
            y_lo: prob.y_range.0,
            y_hi: prob.y_range.1,
            ny_cells: ny,
            kappa: prob.kappa,
            y_boundary: YBoundary::Dirichlet,
        }
    }

    #[test]
    fn zero_data_zero_field() {
        let prob = zero_prob(0.25);
        let mesh = Arc::new(TimeMesh::graded(1.0, 6, 3.0).unwrap());
        let w = CaputoWeights::l1(&mesh, 0.5).unwrap();
        let sol = solve_strip_2d(
            &grid_for(&prob, 6, 6),
            &prob,
            &mesh,
            &w,
            StripBc::OuterDirichlet,
            StripBc::OuterDirichlet,
        )
        .unwrap();
        for row in &sol.field.values {
            for v in row {
                assert_eq!(*v, 0.0);
            }
        }
    }

    #[test]
    fn linear_in_x_is_exact() {
        // u = x is stationary with f = 0 and matching boundary data
        let mut prob = zero_prob(0.25);
        prob.dirichlet = Arc::new(|x, _, _| x);
        prob.u0 = Arc::new(|x, _| x);
        let mesh = Arc::new(TimeMesh::graded(1.0, 6, 2.0).unwrap());
        let w = CaputoWeights::l1(&mesh, 0.5).unwrap();
        let sol = solve_strip_2d(
            &grid_for(&prob, 8, 8),
            &prob,
            &mesh,
            &w,
            StripBc::OuterDirichlet,
            StripBc::OuterDirichlet,
        )
        .unwrap();
        for step in 0..=mesh.steps() {
            for (ix, &x) in sol.field.xs.iter().enumerate() {
                for iy in 0..sol.field.ys.len() {
                    assert!(
                        (sol.field.at(step, ix, iy) - x).abs() < 1e-10,
                        "step {step}, x={x}"
                    );
                }
            }
        }
    }

    #[test]
    fn spatial_order_two_on_manufactured_solution() {
        // u = (1+t) sin(pi x) sin(pi y): the L1 operator integrates (1+t)
        // exactly, so the remaining error is the 5-point stencil's O(h^2)
        let alpha = 0.5;
        let pi = std::f64::consts::PI;
        let mut errs = Vec::new();
        for cells in [10usize, 20] {
            let mut prob = zero_prob(alpha / 2.0);
            prob.forcing = Arc::new(move |x, y, t: f64| {
                (t.powf(1.0 - alpha) / gamma(2.0 - alpha)
                    + 2.0 * pi * pi * (1.0 + t))
                    * (pi * x).sin()
                    * (pi * y).sin()
            });
            prob.u0 = Arc::new(move |x, y| (pi * x).sin() * (pi * y).sin());
            let mesh = Arc::new(TimeMesh::graded(1.0, 32, 3.0).unwrap());
            let w = CaputoWeights::l1(&mesh, alpha).unwrap();
            let sol = solve_strip_2d(
                &grid_for(&prob, cells, cells),
                &prob,
                &mesh,
                &w,
                StripBc::OuterDirichlet,
                StripBc::OuterDirichlet,
            )
            .unwrap();
            let mut err = 0.0f64;
            let last = mesh.steps();
            for (ix, &x) in sol.field.xs.iter().enumerate() {
                for (iy, &y) in sol.field.ys.iter().enumerate() {
                    let want = 2.0 * (pi * x).sin() * (pi * y).sin();
                    err = err.max((sol.field.at(last, ix, iy) - want).abs());
                }
            }
            errs.push(err);
        }
        let order = (errs[0] / errs[1]).log2();
        assert!(order > 1.7, "observed spatial order {order} ({errs:?})");
    }

    #[test]
    fn y_rows_decouple_under_periodic_wrap() {
        // y-independent data with periodic y: every row equals the 1D solve
        let mut prob = zero_prob(0.25);
        prob.forcing = Arc::new(|x, _, _| (2.0 * x).cos());
        prob.u0 = Arc::new(|x, _| x * (1.0 - x));
        let mesh = Arc::new(TimeMesh::graded(1.0, 8, 3.0).unwrap());
        let w = CaputoWeights::l1(&mesh, 0.5).unwrap();
        let mut grid = grid_for(&prob, 12, 6);
        grid.y_boundary = YBoundary::Periodic;
        let sol = solve_strip_2d(
            &grid,
            &prob,
            &mesh,
            &w,
            StripBc::OuterDirichlet,
            StripBc::OuterDirichlet,
        )
        .unwrap();

        let spec1 = ProblemSpec {
            nu: 0.25,
            domain: (0.0, 1.0),
            kappa: PiecewiseConstant::constant(1.0),
            forcing: Arc::new(|x, _| (2.0 * x).cos()),
            dirichlet: Arc::new(|_, _| 0.0),
            u0: Arc::new(|x: f64| x * (1.0 - x)),
            v0: Arc::new(|_| 0.0),
            t_end: 1.0,
        };
        let g1 = SubdomainGrid::new(0.0, 1.0, 12, 1.0).unwrap();
        let s1 = solve_subdomain(
            &g1,
            &spec1,
            &mesh,
            &w,
            SideBc::OuterDirichlet,
            SideBc::OuterDirichlet,
        )
        .unwrap();
        for step in 0..=mesh.steps() {
            for ix in 0..sol.field.xs.len() {
                for iy in 0..sol.field.ys.len() {
                    let want = s1.field.values[step][ix];
                    let got = sol.field.at(step, ix, iy);
                    assert!(
                        (got - want).abs() < 1e-10,
                        "step {step} ix {ix} iy {iy}: {got} vs {want}"
                    );
                }
            }
        }
    }

    #[test]
    fn nnwr2d_fixed_point() {
        let mut prob = zero_prob(0.25);
        prob.x_range = (0.0, 2.0);
        prob.y_range = (-1.0, 1.0);
        prob.u0 = Arc::new(|x, y: f64| x * (2.0 - x) * (-2.0 * y * y).exp());
        let mesh = Arc::new(TimeMesh::graded(1.0, 8, 3.0).unwrap());
        let w = CaputoWeights::l1(&mesh, 0.5).unwrap();
        let mono = solve_monodomain_2d(&prob, 0.5, 0.1, 0.2, &mesh, &w).unwrap();
        let out = nnwr2d_iterate(
            &prob,
            0.5,
            0.25,
            &mesh,
            0.1,
            0.2,
            mono.trace.clone(),
            5,
            1e-9,
        )
        .unwrap();
        assert_eq!(out.history.iterations(), 1);
        assert!(out.history.update_norms[0] < 1e-10, "{}", out.history.update_norms[0]);
        assert_eq!(out.history.termination, Termination::Tolerance);
        // converged fields match the monodomain restriction
        let (f1, f2) = &out.final_fields;
        let split_ix = mono.split_index;
        let mut worst = 0.0f64;
        for step in 0..=mesh.steps() {
            for ix in 0..f1.xs.len() {
                for iy in 0..f1.ys.len() {
                    worst = worst
                        .max((f1.at(step, ix, iy) - mono.field.at(step, ix, iy)).abs());
                }
            }
            for ix in 0..f2.xs.len() {
                for iy in 0..f2.ys.len() {
                    worst = worst.max(
                        (f2.at(step, ix, iy) - mono.field.at(step, split_ix + ix, iy)).abs(),
                    );
                }
            }
        }
        assert!(worst < 1e-9, "fixed-point field mismatch {worst}");
    }

    #[test]
    fn classical_limit_separable_decay() {
        // 2nu = 1, u0 = sin(pi x) sin(pi y) on the unit square decays like
        // exp(-2 pi^2 t); check the interface trace
        let mut prob = zero_prob(0.5);
        prob.t_end = 0.05;
        let pi = std::f64::consts::PI;
        prob.u0 = Arc::new(move |x, y| (pi * x).sin() * (pi * y).sin());
        let mesh = Arc::new(TimeMesh::uniform(0.05, 256).unwrap());
        let w = CaputoWeights::backward_euler(&mesh).unwrap();
        let mono = solve_monodomain_2d(&prob, 0.5, 0.05, 0.05, &mesh, &w).unwrap();
        let decay = (-2.0 * pi * pi * 0.05).exp();
        let iy_mid = mono.trace.ys.len() / 2;
        let got = mono.trace.values[mesh.steps()][iy_mid];
        let want = decay * (pi * 0.5).sin() * (pi * mono.trace.ys[iy_mid]).sin();
        assert!((got - want).abs() < 6e-3, "{got} vs {want}");
    }
}
