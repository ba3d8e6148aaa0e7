//! Dirichlet-Neumann waveform relaxation on a 1D multidomain split.
//!
//! Each sweep solves the pivot subdomain (index ceil(N/2)) with Dirichlet
//! interface data on both sides, then chains outward: subdomains left of the
//! pivot take Dirichlet on their left and the neighbour's flux on their
//! right, mirrored on the other side. The relaxed trace update closes the
//! iteration.

use std::sync::Arc;

use rayon::join;

use crate::error::{FracError, Result};
use crate::problem::{
    DecompositionSpec, IterationHistory, ProblemSpec, Termination, Waveform,
};
use crate::solver1d::{solve_subdomain, FieldHistory, SideBc, SubdomainGrid, SubdomainSolution};
use crate::timegrid::{CaputoWeights, TimeMesh};

/// Optimal relaxation parameter for one interface,
/// theta* = 1 / (1 + sqrt(kappa_D / kappa_N)), where kappa_D belongs to the
/// side that receives Dirichlet data and kappa_N to the side that receives
/// the flux.
pub fn optimal_theta_dnwr(kappa_dirichlet_side: f64, kappa_neumann_side: f64) -> Result<f64> {
    if !(kappa_dirichlet_side > 0.0 && kappa_neumann_side > 0.0) {
        return Err(FracError::InvalidParameter(
            "optimal theta needs positive diffusion coefficients".into(),
        ));
    }
    Ok(1.0 / (1.0 + (kappa_dirichlet_side / kappa_neumann_side).sqrt()))
}

/// Per-interface optimal thetas for a decomposition with pivot at ceil(N/2):
/// interfaces left of the pivot have their Dirichlet side on the right.
pub fn optimal_thetas(decomp: &DecompositionSpec) -> Vec<f64> {
    let n = decomp.n_subdomains();
    let pivot = n.div_ceil(2);
    (1..n)
        .map(|i| {
            if i < pivot {
                // subdomain i+1 is the Dirichlet side, i the Neumann side
                optimal_theta_dnwr(decomp.kappa[i], decomp.kappa[i - 1]).unwrap()
            } else {
                optimal_theta_dnwr(decomp.kappa[i - 1], decomp.kappa[i]).unwrap()
            }
        })
        .collect()
}

pub struct DnwrOutput {
    pub history: IterationHistory,
    /// Subdomain fields from the last completed iteration.
    pub final_fields: Vec<FieldHistory>,
}

fn grids(decomp: &DecompositionSpec) -> Result<Vec<SubdomainGrid>> {
    (0..decomp.n_subdomains())
        .map(|i| {
            let a = decomp.breakpoints[i];
            let b = decomp.breakpoints[i + 1];
            let n_cells = (((b - a) / decomp.dx[i]).round() as usize).max(4);
            SubdomainGrid::new(a, b, n_cells, decomp.kappa[i])
        })
        .collect()
}

/// One full DNWR run. `guesses` are the N-1 initial interface traces.
pub fn dnwr_iterate(
    spec: &ProblemSpec,
    decomp: &DecompositionSpec,
    mesh: &Arc<TimeMesh>,
    guesses: Vec<Waveform>,
    k_max: usize,
    tol: f64,
) -> Result<DnwrOutput> {
    spec.validate()?;
    let n = decomp.n_subdomains();
    if guesses.len() != n - 1 {
        return Err(FracError::Incompatible(format!(
            "need {} interface guesses, got {}",
            n - 1,
            guesses.len()
        )));
    }
    for g in &guesses {
        if g.values().len() != mesh.steps() + 1 {
            return Err(FracError::Incompatible("guess not sampled on the mesh".into()));
        }
    }
    if !(tol > 0.0) {
        return Err(FracError::InvalidParameter("tolerance must be positive".into()));
    }
    let weights = CaputoWeights::for_order(mesh, spec.order())?;
    let grids = grids(decomp)?;
    let pivot = n.div_ceil(2); // 1-based

    let mut traces_rows: Vec<Vec<Waveform>> = vec![guesses];
    let mut update_norms = Vec::new();
    let mut termination = Termination::MaxIterations;
    let mut final_fields: Vec<FieldHistory> = Vec::new();

    for _k in 1..=k_max {
        let psi = traces_rows.last().unwrap();

        // Pivot: Dirichlet on both sides.
        let left_bc = if pivot == 1 {
            SideBc::OuterDirichlet
        } else {
            SideBc::Dirichlet(&psi[pivot - 2])
        };
        let right_bc = if pivot == n {
            SideBc::OuterDirichlet
        } else {
            SideBc::Dirichlet(&psi[pivot - 1])
        };
        let pivot_sol =
            solve_subdomain(&grids[pivot - 1], spec, mesh, &weights, left_bc, right_bc)?;

        // Outward chains; the two halves are independent.
        let (left_sols, right_sols) = join(
            || -> Result<Vec<SubdomainSolution>> {
                let mut sols: Vec<SubdomainSolution> = Vec::new();
                // i = pivot-1 down to 1
                for i in (1..pivot).rev() {
                    let neighbour_flux = if let Some(last) = sols.last() {
                        &last.flux_left
                    } else {
                        &pivot_sol.flux_left
                    };
                    let left_bc = if i == 1 {
                        SideBc::OuterDirichlet
                    } else {
                        SideBc::Dirichlet(&psi[i - 2])
                    };
                    sols.push(solve_subdomain(
                        &grids[i - 1],
                        spec,
                        mesh,
                        &weights,
                        left_bc,
                        SideBc::NeumannFlux(neighbour_flux),
                    )?);
                }
                Ok(sols)
            },
            || -> Result<Vec<SubdomainSolution>> {
                let mut sols: Vec<SubdomainSolution> = Vec::new();
                for i in pivot + 1..=n {
                    let neighbour_flux = if let Some(last) = sols.last() {
                        &last.flux_right
                    } else {
                        &pivot_sol.flux_right
                    };
                    let right_bc = if i == n {
                        SideBc::OuterDirichlet
                    } else {
                        SideBc::Dirichlet(&psi[i - 1])
                    };
                    sols.push(solve_subdomain(
                        &grids[i - 1],
                        spec,
                        mesh,
                        &weights,
                        SideBc::NeumannFlux(neighbour_flux),
                        right_bc,
                    )?);
                }
                Ok(sols)
            },
        );
        let left_sols = left_sols?; // order: pivot-1, pivot-2, ..., 1
        let right_sols = right_sols?; // order: pivot+1, ..., N

        // Reassemble solutions indexed by subdomain (1-based).
        let solution = |i: usize| -> &SubdomainSolution {
            if i == pivot {
                &pivot_sol
            } else if i < pivot {
                &left_sols[pivot - 1 - i]
            } else {
                &right_sols[i - pivot - 1]
            }
        };

        // Relaxed trace update.
        let mut new_traces = Vec::with_capacity(n - 1);
        let mut update_norm = 0.0f64;
        for i in 1..n {
            let theta = decomp.theta[i - 1];
            let candidate = if i < pivot {
                &solution(i).trace_right
            } else {
                &solution(i + 1).trace_left
            };
            let mut w = psi[i - 1].clone();
            for (v, (c, old)) in w
                .values_mut()
                .iter_mut()
                .zip(candidate.values().iter().zip(psi[i - 1].values().iter()))
            {
                *v = theta * c + (1.0 - theta) * old;
            }
            update_norm = update_norm.max(w.sup_distance(&psi[i - 1]));
            new_traces.push(w);
        }

        final_fields = (1..=n).map(solution).map(|s| FieldHistory {
            xs: s.field.xs.clone(),
            values: s.field.values.clone(),
        }).collect();

        traces_rows.push(new_traces);
        update_norms.push(update_norm);
        if update_norm < tol {
            termination = Termination::Tolerance;
            break;
        }
    }

    Ok(DnwrOutput {
        history: IterationHistory { traces: traces_rows, update_norms, termination },
        final_fields,
    })
}
