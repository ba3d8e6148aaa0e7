//! Time meshes and discrete Caputo operators.
//!
//! Two discretizations are provided: the L1 scheme on (possibly graded)
//! meshes for orders alpha in (0,1), and the Sun-Wu scheme on uniform meshes
//! for orders alpha in (1,2). alpha = 1 falls back to the classical backward
//! difference so the same solver code covers the heat-equation limit.
//!
//! Every scheme is exposed through the same per-step interface: at step n the
//! discrete operator is `lead(n) * u_n - sum_j hist_coef(n)[j] * u_j
//! - v0_coef(n) * v0`, which is what the implicit steppers assemble against.

use crate::error::{FracError, Result};
use crate::special::gamma;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshKind {
    Uniform,
    Graded,
}

/// Ordered time grid on [0, T] with an optional power grading t_j = T (j/M)^r.
#[derive(Debug, Clone)]
pub struct TimeMesh {
    t_end: f64,
    grading: f64,
    kind: MeshKind,
    nodes: Vec<f64>,
}

impl TimeMesh {
    /// Graded mesh t_j = T (j/M)^r; r = 1 yields the uniform mesh.
    pub fn graded(t_end: f64, steps: usize, grading: f64) -> Result<Self> {
        if !(t_end > 0.0) {
            return Err(FracError::InvalidParameter(format!(
                "time horizon must be positive, got {t_end}"
            )));
        }
        if steps == 0 {
            return Err(FracError::InvalidParameter("step count must be >= 1".into()));
        }
        if !(grading >= 1.0) {
            return Err(FracError::InvalidParameter(format!(
                "grading exponent must be >= 1, got {grading}"
            )));
        }
        let m = steps as f64;
        let nodes = (0..=steps)
            .map(|j| t_end * (j as f64 / m).powf(grading))
            .collect();
        Ok(TimeMesh {
            t_end,
            grading,
            kind: if grading > 1.0 { MeshKind::Graded } else { MeshKind::Uniform },
            nodes,
        })
    }

    pub fn uniform(t_end: f64, steps: usize) -> Result<Self> {
        Self::graded(t_end, steps, 1.0)
    }

    /// Number of steps M (the mesh has M+1 nodes).
    pub fn steps(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn grading(&self) -> f64 {
        self.grading
    }

    pub fn kind(&self) -> MeshKind {
        self.kind
    }

    pub fn is_uniform(&self) -> bool {
        self.kind == MeshKind::Uniform
    }

    /// Step length t_n - t_{n-1}, n in 1..=M.
    pub fn dt(&self, n: usize) -> f64 {
        self.nodes[n] - self.nodes[n - 1]
    }

    /// Time at which step n's equation is enforced: t_n for fully implicit
    /// schemes, the midpoint for the Sun-Wu scheme.
    pub fn enforcement_time(&self, n: usize, scheme: CaputoScheme) -> f64 {
        match scheme {
            CaputoScheme::SunWu => 0.5 * (self.nodes[n] + self.nodes[n - 1]),
            _ => self.nodes[n],
        }
    }

    /// Default grading exponent for the L1 scheme, r = (2 - alpha) / alpha,
    /// clamped to [1, inf).
    pub fn optimal_grading(alpha: f64) -> f64 {
        ((2.0 - alpha) / alpha).max(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaputoScheme {
    L1,
    SunWu,
    BackwardEuler,
}

/// Per-step coefficient tables for a discrete Caputo operator on a fixed mesh.
#[derive(Debug, Clone)]
pub struct CaputoWeights {
    alpha: f64,
    scheme: CaputoScheme,
    /// lead[n-1]: coefficient of u_n at step n.
    lead: Vec<f64>,
    /// hist[n-1][j]: coefficient of u_j (j = 0..n-1) on the right-hand side.
    hist: Vec<Vec<f64>>,
    /// v0_coef[n-1]: right-hand-side coefficient of the initial velocity.
    v0_coef: Vec<f64>,
}

impl CaputoWeights {
    /// L1 weights for alpha in (0,1) on a uniform or graded mesh.
    ///
    /// b_{n,j} = [(t_n - t_{j-1})^{1-a} - (t_n - t_j)^{1-a}] / (G(2-a) dt_j);
    /// the operator at t_n is sum_j b_{n,j} (u_j - u_{j-1}).
    pub fn l1(mesh: &TimeMesh, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(FracError::WrongRegime(format!(
                "L1 scheme requires alpha in (0,1), got {alpha}"
            )));
        }
        let m = mesh.steps();
        let g = gamma(2.0 - alpha);
        let t = mesh.nodes();
        let mut lead = Vec::with_capacity(m);
        let mut hist = Vec::with_capacity(m);
        let mut v0_coef = Vec::with_capacity(m);
        for n in 1..=m {
            // b[j-1] = b_{n,j}
            let b: Vec<f64> = (1..=n)
                .map(|j| {
                    ((t[n] - t[j - 1]).powf(1.0 - alpha) - (t[n] - t[j]).powf(1.0 - alpha))
                        / (g * (t[j] - t[j - 1]))
                })
                .collect();
            lead.push(b[n - 1]);
            let mut h = vec![0.0; n];
            h[0] = b[0];
            for j in 1..n {
                h[j] = b[j] - b[j - 1];
            }
            hist.push(h);
            v0_coef.push(0.0);
        }
        Ok(CaputoWeights { alpha, scheme: CaputoScheme::L1, lead, hist, v0_coef })
    }

    /// Sun-Wu weights for alpha in (1,2); uniform meshes only. Uses both
    /// initial conditions (value and velocity).
    pub fn sun_wu(mesh: &TimeMesh, alpha: f64) -> Result<Self> {
        if !(alpha > 1.0 && alpha < 2.0) {
            return Err(FracError::WrongRegime(format!(
                "Sun-Wu scheme requires alpha in (1,2), got {alpha}"
            )));
        }
        if !mesh.is_uniform() {
            return Err(FracError::UnsupportedMesh(
                "Sun-Wu scheme is defined on uniform meshes".into(),
            ));
        }
        let m_steps = mesh.steps();
        let dt = mesh.dt(1);
        let eta = dt.powf(1.0 - alpha) / gamma(3.0 - alpha);
        let a: Vec<f64> = (0..m_steps)
            .map(|l| ((l + 1) as f64).powf(2.0 - alpha) - (l as f64).powf(2.0 - alpha))
            .collect();
        let lead_val = eta * a[0] / dt;
        let mut lead = Vec::with_capacity(m_steps);
        let mut hist = Vec::with_capacity(m_steps);
        let mut v0_coef = Vec::with_capacity(m_steps);
        for n in 1..=m_steps {
            lead.push(lead_val);
            let mut h = vec![0.0; n];
            // lead * u_{n-1} plus the telescoped history differences
            h[n - 1] += lead_val;
            for k in 1..n {
                let c = eta * (a[n - k - 1] - a[n - k]) / dt;
                h[k] += c;
                h[k - 1] -= c;
            }
            hist.push(h);
            v0_coef.push(eta * a[n - 1]);
        }
        Ok(CaputoWeights { alpha, scheme: CaputoScheme::SunWu, lead, hist, v0_coef })
    }

    /// Classical backward difference; the alpha = 1 (heat) limit.
    pub fn backward_euler(mesh: &TimeMesh) -> Result<Self> {
        let m = mesh.steps();
        let mut lead = Vec::with_capacity(m);
        let mut hist = Vec::with_capacity(m);
        for n in 1..=m {
            let inv_dt = 1.0 / mesh.dt(n);
            lead.push(inv_dt);
            let mut h = vec![0.0; n];
            h[n - 1] = inv_dt;
            hist.push(h);
        }
        Ok(CaputoWeights {
            alpha: 1.0,
            scheme: CaputoScheme::BackwardEuler,
            lead,
            hist,
            v0_coef: vec![0.0; m],
        })
    }

    /// Scheme dispatch on the order 2*nu: L1 below 1, backward difference at
    /// exactly 1, Sun-Wu above.
    pub fn for_order(mesh: &TimeMesh, alpha: f64) -> Result<Self> {
        if alpha == 1.0 {
            Self::backward_euler(mesh)
        } else if alpha < 1.0 {
            Self::l1(mesh, alpha)
        } else {
            Self::sun_wu(mesh, alpha)
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn scheme(&self) -> CaputoScheme {
        self.scheme
    }

    pub fn steps(&self) -> usize {
        self.lead.len()
    }

    /// Coefficient of u_n in the discrete operator at step n (n in 1..=M).
    pub fn lead(&self, n: usize) -> f64 {
        self.lead[n - 1]
    }

    /// Right-hand-side coefficients of u_0..u_{n-1} at step n.
    pub fn hist_coef(&self, n: usize) -> &[f64] {
        &self.hist[n - 1]
    }

    /// Right-hand-side coefficient of the initial velocity at step n.
    pub fn v0_coef(&self, n: usize) -> f64 {
        self.v0_coef[n - 1]
    }

    /// Implicit weight on the spatial operator: 1 for fully implicit schemes,
    /// 1/2 for the Sun-Wu (Crank-Nicolson-like) scheme.
    pub fn beta_implicit(&self) -> f64 {
        match self.scheme {
            CaputoScheme::SunWu => 0.5,
            _ => 1.0,
        }
    }

    /// Explicit weight on the spatial operator at the previous step.
    pub fn beta_explicit(&self) -> f64 {
        match self.scheme {
            CaputoScheme::SunWu => 0.5,
            _ => 0.0,
        }
    }

    /// Evaluate the discrete Caputo operator on a sampled history
    /// u_0..u_M; returns the value at every step 1..=M.
    pub fn apply(&self, u: &[f64], v0: f64) -> Vec<f64> {
        assert_eq!(u.len(), self.steps() + 1, "history length must be M+1");
        (1..=self.steps())
            .map(|n| {
                let h = self.hist_coef(n);
                let mut acc = self.lead(n) * u[n] - self.v0_coef(n) * v0;
                for (j, c) in h.iter().enumerate() {
                    acc -= c * u[j];
                }
                acc
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::gamma;
    use proptest::prelude::*;

    #[test]
    fn graded_mesh_examples() {
        let mesh = TimeMesh::graded(1.0, 4, 2.0).unwrap();
        let want = [0.0, 0.0625, 0.25, 0.5625, 1.0];
        for (a, b) in mesh.nodes().iter().zip(want.iter()) {
            assert!((a - b).abs() <= 8.0 * f64::EPSILON);
        }
        assert_eq!(mesh.kind(), MeshKind::Graded);

        let mesh = TimeMesh::graded(1.0, 4, 1.0).unwrap();
        let want = [0.0, 0.25, 0.5, 0.75, 1.0];
        for (a, b) in mesh.nodes().iter().zip(want.iter()) {
            assert!((a - b).abs() <= 8.0 * f64::EPSILON);
        }
        assert_eq!(mesh.kind(), MeshKind::Uniform);

        let mesh = TimeMesh::graded(4.0, 2, 3.0).unwrap();
        let want = [0.0, 0.5, 4.0];
        for (a, b) in mesh.nodes().iter().zip(want.iter()) {
            assert!((a - b).abs() <= 32.0 * f64::EPSILON);
        }
    }

    #[test]
    fn graded_mesh_rejects_bad_parameters() {
        assert!(TimeMesh::graded(0.0, 4, 2.0).is_err());
        assert!(TimeMesh::graded(-1.0, 4, 2.0).is_err());
        assert!(TimeMesh::graded(1.0, 0, 2.0).is_err());
        assert!(TimeMesh::graded(1.0, 4, 0.5).is_err());
    }

    #[test]
    fn l1_leading_coefficient_uniform() {
        // dt = 1, alpha = 0.5: leading coefficient 1/Gamma(1.5) = 2/sqrt(pi)
        let mesh = TimeMesh::uniform(4.0, 4).unwrap();
        let w = CaputoWeights::l1(&mesh, 0.5).unwrap();
        let want = 2.0 / std::f64::consts::PI.sqrt();
        assert!((w.lead(1) - want).abs() < 1e-14);
    }

    #[test]
    fn l1_rejects_out_of_range_alpha() {
        let mesh = TimeMesh::uniform(1.0, 4).unwrap();
        assert!(CaputoWeights::l1(&mesh, 0.0).is_err());
        assert!(CaputoWeights::l1(&mesh, 1.0).is_err());
        assert!(CaputoWeights::l1(&mesh, 1.5).is_err());
    }

    #[test]
    fn l1_near_one_collapses_to_backward_difference() {
        let mesh = TimeMesh::uniform(1.0, 8).unwrap();
        let w = CaputoWeights::l1(&mesh, 1.0 - 1e-9).unwrap();
        let dt = mesh.dt(1);
        let u: Vec<f64> = mesh.nodes().iter().map(|t| (3.0 * t).sin()).collect();
        let d = w.apply(&u, 0.0);
        for n in 1..=mesh.steps() {
            let bd = (u[n] - u[n - 1]) / dt;
            assert!((d[n - 1] - bd).abs() < 1e-6, "n={n}: {} vs {}", d[n - 1], bd);
        }
    }

    #[test]
    fn l1_exact_for_linear_history_on_graded_mesh() {
        // Caputo of t is t^(1-a)/Gamma(2-a); L1 integrates linear u exactly.
        let alpha = 0.5;
        let mesh = TimeMesh::graded(1.0, 4, 2.0).unwrap();
        let w = CaputoWeights::l1(&mesh, alpha).unwrap();
        let u: Vec<f64> = mesh.nodes().to_vec();
        let d = w.apply(&u, 0.0);
        let t_m = mesh.t_end();
        let exact = t_m.powf(1.0 - alpha) / gamma(2.0 - alpha);
        assert!((d.last().unwrap() - exact).abs() < 1e-12);
        assert!((exact - 2.0 / std::f64::consts::PI.sqrt()).abs() < 1e-4);
    }

    #[test]
    fn l1_uniform_weights_positive_and_decreasing_in_lag() {
        let mesh = TimeMesh::uniform(2.0, 32).unwrap();
        for alpha in [0.25, 0.5, 0.75] {
            let w = CaputoWeights::l1(&mesh, alpha).unwrap();
            // reconstruct b_{n,j} from the stored tables: b_{n,n} = lead,
            // b_{n,j} = b_{n,j+1} - hist[j]
            let n = mesh.steps();
            let mut b = vec![0.0; n + 1];
            b[n] = w.lead(n);
            for j in (1..n).rev() {
                b[j] = b[j + 1] - w.hist_coef(n)[j];
            }
            for j in 1..n {
                assert!(b[j] > 0.0);
                assert!(b[j] < b[j + 1], "alpha={alpha}: not decreasing in lag at j={j}");
            }
        }
    }

    #[test]
    fn constant_history_gives_zero() {
        let mesh = TimeMesh::graded(1.0, 10, 3.0).unwrap();
        let u = vec![4.2; 11];
        for w in [
            CaputoWeights::l1(&mesh, 0.3).unwrap(),
            CaputoWeights::backward_euler(&mesh).unwrap(),
        ] {
            for d in w.apply(&u, 0.0) {
                assert!(d.abs() < 1e-10);
            }
        }
        let mesh = TimeMesh::uniform(1.0, 10).unwrap();
        let w = CaputoWeights::sun_wu(&mesh, 1.5).unwrap();
        for d in w.apply(&[4.2; 11], 0.0) {
            assert!(d.abs() < 1e-10);
        }
    }

    #[test]
    fn sunwu_rejects_graded_and_wrong_alpha() {
        let graded = TimeMesh::graded(1.0, 8, 2.0).unwrap();
        assert!(matches!(
            CaputoWeights::sun_wu(&graded, 1.5),
            Err(FracError::UnsupportedMesh(_))
        ));
        let uni = TimeMesh::uniform(1.0, 8).unwrap();
        assert!(CaputoWeights::sun_wu(&uni, 0.5).is_err());
        assert!(CaputoWeights::sun_wu(&uni, 2.0).is_err());
    }

    #[test]
    fn sunwu_near_two_collapses_to_second_difference() {
        let mesh = TimeMesh::uniform(1.0, 16).unwrap();
        let w = CaputoWeights::sun_wu(&mesh, 2.0 - 1e-10).unwrap();
        let dt = mesh.dt(1);
        let u: Vec<f64> = mesh.nodes().iter().map(|t| (2.0 * t).cos()).collect();
        let d = w.apply(&u, 0.0);
        for n in 2..=mesh.steps() {
            let sd = (u[n] - 2.0 * u[n - 1] + u[n - 2]) / (dt * dt);
            assert!((d[n - 1] - sd).abs() < 1e-5, "n={n}");
        }
    }

    #[test]
    fn sunwu_zero_history_gives_zero() {
        let mesh = TimeMesh::uniform(1.0, 12).unwrap();
        let w = CaputoWeights::sun_wu(&mesh, 1.3).unwrap();
        for d in w.apply(&[0.0; 13], 0.0) {
            assert_eq!(d, 0.0);
        }
    }

    #[test]
    fn sunwu_converges_to_exact_caputo_of_t_squared() {
        // D^a t^2 = 2 t^{2-a} / Gamma(3-a); measure order by refinement.
        let alpha = 1.5;
        let t_end = 4.0;
        let mut errs = Vec::new();
        for m in [32, 64, 128] {
            let mesh = TimeMesh::uniform(t_end, m).unwrap();
            let w = CaputoWeights::sun_wu(&mesh, alpha).unwrap();
            let u: Vec<f64> = mesh.nodes().iter().map(|t| t * t).collect();
            let d = w.apply(&u, 0.0);
            let n = mesh.steps();
            let t_mid = mesh.enforcement_time(n, CaputoScheme::SunWu);
            let exact = 2.0 * t_mid.powf(2.0 - alpha) / gamma(3.0 - alpha);
            errs.push((d[n - 1] - exact).abs());
        }
        let order = (errs[0] / errs[2]).log2() / 2.0;
        assert!(
            order > 3.0 - alpha - 0.3,
            "observed Sun-Wu order {order}, errors {errs:?}"
        );
    }

    #[test]
    fn l1_order_on_t_squared() {
        for alpha in [0.4, 0.8] {
            let mut errs = Vec::new();
            for m in [64, 128, 256] {
                let mesh = TimeMesh::uniform(1.0, m).unwrap();
                let w = CaputoWeights::l1(&mesh, alpha).unwrap();
                let u: Vec<f64> = mesh.nodes().iter().map(|t| t * t).collect();
                let d = w.apply(&u, 0.0);
                let exact = 2.0 / gamma(3.0 - alpha);
                errs.push((d.last().unwrap() - exact).abs());
            }
            let order = (errs[0] / errs[2]).log2() / 2.0;
            assert!(
                order >= 2.0 - alpha - 0.3,
                "alpha={alpha}: observed L1 order {order}, errors {errs:?}"
            );
        }
    }

    proptest! {
        #[test]
        fn discrete_caputo_is_linear(
            seed in 0u64..1000,
            a in -3.0f64..3.0,
            b in -3.0f64..3.0,
            alpha in 0.1f64..0.9,
        ) {
            use rand::{rngs::StdRng, Rng, SeedableRng};
            let mut rng = StdRng::seed_from_u64(seed);
            let mesh = TimeMesh::graded(1.0, 12, 2.0).unwrap();
            let w = CaputoWeights::l1(&mesh, alpha).unwrap();
            let u: Vec<f64> = (0..13).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let v: Vec<f64> = (0..13).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let combo: Vec<f64> = u.iter().zip(&v).map(|(x, y)| a * x + b * y).collect();
            let du = w.apply(&u, 0.0);
            let dv = w.apply(&v, 0.0);
            let dc = w.apply(&combo, 0.0);
            for n in 0..12 {
                let expect = a * du[n] + b * dv[n];
                prop_assert!((dc[n] - expect).abs() < 1e-9 * (1.0 + expect.abs()));
            }
        }
    }
}
