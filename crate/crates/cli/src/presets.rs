//! Shipped experiment presets: the full-scale reference configurations,
//! plus small "acc-" fixtures sized for the acceptance suite.

use fracwr::{FracError, Result};

use crate::config::{Algorithm, ExperimentConfig, Grading, ThetaPolicy};

#[derive(Debug)]
pub struct Preset {
    pub id: &'static str,
    pub about: &'static str,
    pub config: ExperimentConfig,
}

fn dnwr_base() -> ExperimentConfig {
    ExperimentConfig {
        algorithm: Algorithm::Dnwr,
        label: "dnwr".into(),
        orders: vec![0.5],
        t_end: 1.0,
        domain: (0.0, 2.0),
        forcing: "sin_pi_x_over_2".into(),
        initial: "zero".into(),
        breakpoints: vec![0.0, 1.0, 2.0],
        kappa: vec![1.0, 1.0],
        dx: vec![0.01, 0.01],
        theta: ThetaPolicy::Optimal,
        steps: 64,
        grading: Grading::Auto,
        k_max: 40,
        tol: 1e-9,
        ..ExperimentConfig::default()
    }
}

fn nnwr_base() -> ExperimentConfig {
    ExperimentConfig {
        algorithm: Algorithm::Nnwr,
        label: "nnwr".into(),
        orders: vec![0.5],
        t_end: 4.0,
        domain: (0.0, 16.0),
        forcing: "sin_pi_x_over_16".into(),
        initial: "parabola_0_16".into(),
        breakpoints: vec![0.0, 3.2, 6.4, 9.6, 12.8, 16.0],
        kappa: vec![1.0; 5],
        dx: vec![0.1; 5],
        theta: ThetaPolicy::Optimal,
        steps: 256,
        grading: Grading::Auto,
        k_max: 40,
        tol: 1e-9,
        ..ExperimentConfig::default()
    }
}

fn nnwr2d_base() -> ExperimentConfig {
    ExperimentConfig {
        algorithm: Algorithm::Nnwr2d,
        label: "nnwr2d".into(),
        orders: vec![0.5],
        t_end: 1.0,
        domain: (0.0, 2.0),
        domain_y: (-5.0, 5.0),
        split: 0.5,
        dy: 0.1,
        forcing: "zero".into(),
        initial: "gauss_bump".into(),
        breakpoints: vec![0.0, 0.5, 2.0],
        kappa: vec![1.0],
        dx: vec![0.01],
        theta: ThetaPolicy::Fixed(vec![0.25]),
        steps: 256,
        grading: Grading::Auto,
        k_max: 30,
        tol: 1e-10,
        ..ExperimentConfig::default()
    }
}

/// Table of diffusion coefficients folded symmetrically: subdomains (i,
/// N+1-i) share kappa_i = 1/4^{i-1}.
pub fn folded_kappa(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let idx = i.min(n - 1 - i);
            0.25f64.powi(idx as i32)
        })
        .collect()
}

pub fn all_presets() -> Vec<Preset> {
    let mut out = Vec::new();

    // theta sweep at 2nu = 0.5, equal split of (0,2)
    let mut cfg = dnwr_base();
    cfg.label = "dnwr-theta-sweep".into();
    cfg.theta = ThetaPolicy::Sweep { count: 9 };
    out.push(Preset {
        id: "dnwr-theta-sweep",
        about: "DNWR on (0,2), a=b=1, 2nu=0.5, theta grid of 9 including theta*",
        config: cfg,
    });

    // heterogeneous-kappa order sweep at a fixed theta = 0.33
    let mut cfg = dnwr_base();
    cfg.label = "dnwr-nu-sweep-theta0.33".into();
    cfg.kappa = vec![1.0, 0.25];
    cfg.dx = vec![0.01, 0.005];
    cfg.theta = ThetaPolicy::Fixed(vec![0.33]);
    cfg.orders = vec![0.5, 1.0, 1.5];
    out.push(Preset {
        id: "dnwr-nu-sweep-theta0.33",
        about: "DNWR kappa=(1,0.25), theta=0.33, 2nu in {0.5,1,1.5}",
        config: cfg,
    });

    // five-subdomain NNWR with the unequal breakpoints
    let mut cfg = nnwr_base();
    cfg.label = "nnwr-five-subdomain".into();
    cfg.breakpoints = vec![0.0, 3.5, 5.5, 10.0, 12.0, 16.0];
    cfg.theta = ThetaPolicy::Sweep { count: 9 };
    out.push(Preset {
        id: "nnwr-five-subdomain",
        about: "NNWR on (0,16), unequal subdomains, theta grid of 9 including 0.25",
        config: cfg,
    });

    // eight equal subdomains with the folded kappa table
    let mut cfg = nnwr_base();
    cfg.label = "nnwr-kappa-table2-N8".into();
    cfg.breakpoints = (0..=8).map(|i| 2.0 * i as f64).collect();
    cfg.kappa = folded_kappa(8);
    cfg.dx = vec![0.1; 8];
    cfg.bound_overlay = true;
    out.push(Preset {
        id: "nnwr-kappa-table2-N8",
        about: "NNWR, 8 equal subdomains on (0,16), kappa_i = 1/4^(i-1) folded",
        config: cfg,
    });

    // 2D bound overlay, full scale
    let mut cfg = nnwr2d_base();
    cfg.label = "nnwr2d-bound-overlay".into();
    cfg.orders = vec![0.5, 1.5];
    cfg.bound_overlay = true;
    out.push(Preset {
        id: "nnwr2d-bound-overlay",
        about: "NNWR 2D at full scale (graded-mesh refactorization: ~30 min)",
        config: cfg,
    });

    // ---- acceptance-scale fixtures (small grids, fast) ----
    for (id, n_sub) in [("acc-dnwr-N2", 2usize), ("acc-dnwr-N3", 3), ("acc-dnwr-N5", 5)] {
        let mut cfg = dnwr_base();
        cfg.label = id.into();
        let width = 2.0 / n_sub as f64;
        cfg.breakpoints = (0..=n_sub).map(|i| width * i as f64).collect();
        cfg.kappa = folded_kappa(n_sub);
        cfg.dx = vec![0.025; n_sub];
        cfg.steps = 32;
        cfg.k_max = 60;
        cfg.tol = 1e-11;
        out.push(Preset {
            id,
            about: "acceptance fixture: DNWR fixed-point and convergence checks",
            config: cfg,
        });
    }
    for (id, n_sub) in [("acc-nnwr-N2", 2usize), ("acc-nnwr-N5", 5), ("acc-nnwr-N8", 8)] {
        let mut cfg = nnwr_base();
        cfg.label = id.into();
        let width = 16.0 / n_sub as f64;
        cfg.breakpoints = (0..=n_sub).map(|i| width * i as f64).collect();
        cfg.kappa = folded_kappa(n_sub);
        cfg.dx = vec![0.2; n_sub];
        cfg.steps = 32;
        cfg.k_max = 60;
        cfg.tol = 1e-11;
        out.push(Preset {
            id,
            about: "acceptance fixture: NNWR fixed-point and convergence checks",
            config: cfg,
        });
    }
    let mut cfg = nnwr2d_base();
    cfg.label = "acc-nnwr2d".into();
    cfg.dx = vec![0.025];
    cfg.dy = 0.5;
    cfg.steps = 32;
    cfg.k_max = 40;
    cfg.tol = 1e-11;
    out.push(Preset {
        id: "acc-nnwr2d",
        about: "acceptance fixture: two-strip NNWR in 2D",
        config: cfg,
    });

    out
}

pub fn by_id(id: &str) -> Result<Preset> {
    all_presets()
        .into_iter()
        .find(|p| p.id == id)
        .ok_or_else(|| {
            let ids: Vec<&str> = all_presets().iter().map(|p| p.id).collect();
            FracError::InvalidParameter(format!(
                "unknown preset `{id}`; available: {}",
                ids.join(", ")
            ))
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for p in all_presets() {
            p.config.validate().unwrap_or_else(|e| panic!("{}: {e}", p.id));
        }
    }

    #[test]
    fn unknown_id_lists_available() {
        let err = by_id("nope").unwrap_err().to_string();
        assert!(err.contains("dnwr-theta-sweep"));
        assert!(err.contains("nnwr2d-bound-overlay"));
    }

    #[test]
    fn table_bound_curve_decreases_after_second_iteration() {
        // eight-subdomain folded-kappa configuration: constants evaluate and
        // the curve decays from k = 2 on
        let inp = fracwr::bounds::BoundInputs {
            nu: 0.25,
            t_end: 4.0,
            lengths: vec![2.0; 8],
            kappa: folded_kappa(8),
        };
        let curve = fracwr::bounds::nnwr_bound_1d(&inp, 12).unwrap();
        assert!(curve.constant("c").unwrap() > 0.0);
        for k in 2..curve.value.len() - 1 {
            assert!(
                curve.value[k + 1] < curve.value[k],
                "curve should decrease from k=2: {:?}",
                curve.value
            );
        }
    }

    #[test]
    fn folded_kappa_matches_table() {
        assert_eq!(folded_kappa(4), vec![1.0, 0.25, 0.25, 1.0]);
        let k8 = folded_kappa(8);
        assert_eq!(k8[0], 1.0);
        assert_eq!(k8[3], 0.25f64.powi(3));
        assert_eq!(k8[4], 0.25f64.powi(3));
        assert_eq!(k8[7], 1.0);
    }
}
