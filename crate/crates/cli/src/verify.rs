//! Kernel-lemma verification sweep: quadrature L1 norms against the
//! closed-form bounds over a deterministic parameter grid.

use rayon::prelude::*;

use fracwr::laplace::kernels::kernel_catalog;
use fracwr::Result;

#[derive(Debug, Clone)]
pub struct VerifyRow {
    pub kernel: String,
    pub alpha: f64,
    pub params: Vec<f64>,
    pub t_end: f64,
    pub norm: f64,
    pub bound: f64,
    /// (bound - norm) / bound; negative means a bound violation.
    pub margin: f64,
    pub status: String,
}

const LS: [f64; 3] = [0.5, 1.0, 2.0];
const SUB_ALPHAS: [f64; 3] = [0.25, 0.4, 0.5];
const WAVE_ALPHAS: [f64; 2] = [0.6, 0.75];
const TIMES: [f64; 2] = [0.5, 1.0];

fn min3(v: &[f64]) -> f64 {
    v.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// The full case list. `quick` keeps one time point and thins the chains.
pub fn case_list(quick: bool) -> Vec<(String, Vec<f64>, f64, f64)> {
    let times: &[f64] = if quick { &TIMES[1..] } else { &TIMES };
    let chain_ls: Vec<[f64; 3]> = {
        let mut v = Vec::new();
        for &a in &LS {
            for &b in &LS {
                for &c in &LS {
                    v.push([a, b, c]);
                }
            }
        }
        if quick {
            v.into_iter().step_by(5).collect()
        } else {
            v
        }
    };
    let mut cases = Vec::new();
    for &t in times {
        // subordinator kernel (exp bound)
        for &alpha in &SUB_ALPHAS {
            for &l in &LS {
                cases.push(("exp".to_string(), vec![l], alpha, t));
            }
        }
        // P kernels, alpha <= 1/2; the cosh(l) numerator takes l = min(l_i)
        for &alpha in &SUB_ALPHAS {
            for &l1 in &LS {
                for &l2 in &LS {
                    cases.push(("P1".into(), vec![l1.min(l2), l1, l2], alpha, t));
                }
            }
            for ls in &chain_ls {
                let l = min3(ls);
                for name in ["P2", "P3", "P4"] {
                    cases.push((name.into(), vec![l, ls[0], ls[1], ls[2]], alpha, t));
                }
            }
            // geometric-series kernel
            for &l1 in &LS {
                for &l2 in &LS {
                    cases.push(("Geo".into(), vec![l1, l2], alpha, t));
                }
            }
        }
        // Q kernels, alpha > 1/2; the exp shift is min(l_i) as in the
        // theorem's usage
        for &alpha in &WAVE_ALPHAS {
            for &l1 in &LS {
                for &l2 in &LS {
                    cases.push(("Q1".into(), vec![l1.min(l2), l1, l2], alpha, t));
                }
                for &shift in &LS {
                    if shift <= l1 {
                        cases.push(("Qcosh".into(), vec![shift, l1], alpha, t));
                    }
                }
            }
            for ls in &chain_ls {
                let shift = min3(ls);
                for name in ["Q2", "Qmixed", "Q3"] {
                    cases.push((name.into(), vec![shift, ls[0], ls[1], ls[2]], alpha, t));
                }
            }
        }
    }
    cases
}

pub fn verify_kernels(quick: bool, panels: usize) -> Result<Vec<VerifyRow>> {
    let cases = case_list(quick);
    let rows: Vec<VerifyRow> = cases
        .par_iter()
        .map(|(name, params, alpha, t)| {
            let run = || -> Result<(f64, f64)> {
                let k = kernel_catalog(name, params, *alpha)?;
                let norm = k.l1_norm(*t, panels)?;
                let bound = k.lemma_bound(*t)?;
                Ok((norm, bound))
            };
            match run() {
                Ok((norm, bound)) => {
                    let margin = (bound - norm) / bound.max(1e-300);
                    let status = if norm <= bound * (1.0 + 1e-9) {
                        if margin < 0.05 {
                            "tight".to_string()
                        } else {
                            "ok".to_string()
                        }
                    } else {
                        "VIOLATION".to_string()
                    };
                    VerifyRow {
                        kernel: name.clone(),
                        alpha: *alpha,
                        params: params.clone(),
                        t_end: *t,
                        norm,
                        bound,
                        margin,
                        status,
                    }
                }
                Err(e) => VerifyRow {
                    kernel: name.clone(),
                    alpha: *alpha,
                    params: params.clone(),
                    t_end: *t,
                    norm: f64::NAN,
                    bound: f64::NAN,
                    margin: f64::NAN,
                    status: format!("error: {e}"),
                },
            }
        })
        .collect();
    Ok(rows)
}

pub fn rows_to_csv(rows: &[VerifyRow]) -> String {
    let mut s = String::from("kernel,alpha,params,t,norm,bound,margin,status\n");
    for r in rows {
        let params = r
            .params
            .iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.kernel, r.alpha, params, r.t_end, r.norm, r.bound, r.margin, r.status
        ));
    }
    s
}
