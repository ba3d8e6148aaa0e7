//! Laplace-domain interface-error iteration matrix for the DNWR split on
//! 2m+1 subdomains: the closed entry formulas, an independent construction
//! from the block matrices (T, U, P, D, E), and frequency-domain error
//! propagation as an oracle for the time-domain iteration.

use num_complex::Complex64;

use crate::error::{FracError, Result};
use crate::laplace::talbot::{contour, LaplaceSymbol, DEFAULT_NODES};

/// Geometry and relaxation data for a 2m+1 subdomain split.
#[derive(Debug, Clone)]
pub struct RhoParams {
    pub m: usize,
    /// Scaled lengths h_j = a_j / sqrt(kappa_j), j = 1..2m+1.
    pub scaled_lengths: Vec<f64>,
    pub kappa: Vec<f64>,
    /// Relaxation parameters theta_1..theta_2m.
    pub theta: Vec<f64>,
    pub nu: f64,
}

impl RhoParams {
    pub fn new(
        scaled_lengths: Vec<f64>,
        kappa: Vec<f64>,
        theta: Vec<f64>,
        nu: f64,
    ) -> Result<Self> {
        let n = kappa.len();
        if n < 3 || n.is_multiple_of(2) {
            return Err(FracError::InvalidParameter(
                "rho matrix is defined for an odd subdomain count >= 3".into(),
            ));
        }
        let m = (n - 1) / 2;
        if scaled_lengths.len() != n || theta.len() != 2 * m {
            return Err(FracError::InvalidParameter(
                "need 2m+1 lengths/kappas and 2m thetas".into(),
            ));
        }
        if !(nu > 0.0 && nu < 1.0) {
            return Err(FracError::InvalidParameter("nu must lie in (0,1)".into()));
        }
        Ok(RhoParams { m, scaled_lengths, kappa, theta, nu })
    }

    /// Optimal thetas: 1/(1+sqrt(k_{i+1}/k_i)) left of the pivot, mirrored
    /// on the right.
    pub fn with_optimal_theta(
        scaled_lengths: Vec<f64>,
        kappa: Vec<f64>,
        nu: f64,
    ) -> Result<Self> {
        let n = kappa.len();
        let m = (n - 1) / 2;
        let theta: Vec<f64> = (1..=2 * m)
            .map(|i| {
                if i <= m {
                    1.0 / (1.0 + (kappa[i] / kappa[i - 1]).sqrt())
                } else {
                    1.0 / (1.0 + (kappa[i - 1] / kappa[i]).sqrt())
                }
            })
            .collect();
        Self::new(scaled_lengths, kappa, theta, nu)
    }

    /// sinh/cosh of h_j s^nu for every subdomain, 0-indexed.
    pub fn sigma_gamma(&self, s: Complex64) -> (Vec<Complex64>, Vec<Complex64>) {
        let z = s.powf(self.nu);
        let sigma: Vec<Complex64> =
            self.scaled_lengths.iter().map(|h| (h * z).sinh()).collect();
        let gamma: Vec<Complex64> =
            self.scaled_lengths.iter().map(|h| (h * z).cosh()).collect();
        (sigma, gamma)
    }

    fn mirrored(&self) -> RhoParams {
        let n = self.kappa.len();
        RhoParams {
            m: self.m,
            scaled_lengths: (0..n).map(|p| self.scaled_lengths[n - 1 - p]).collect(),
            kappa: (0..n).map(|p| self.kappa[n - 1 - p]).collect(),
            theta: (0..2 * self.m).map(|q| self.theta[2 * self.m - 1 - q]).collect(),
            nu: self.nu,
        }
    }
}

/// Upper-half closed-form row entries (one-based indices: i in 1..=m, j in
/// 1..=2m). sigma/gamma are 0-indexed by subdomain.
fn rho_upper_entry(
    p: &RhoParams,
    sigma: &[Complex64],
    gamma: &[Complex64],
    i: usize,
    j: usize,
) -> Complex64 {
    let m = p.m;
    let th = p.theta[i - 1];
    let sqrt_ratio = |num: usize, den: usize| (p.kappa[num - 1] / p.kappa[den - 1]).sqrt();
    let g = |idx: usize| gamma[idx - 1];
    let sg = |idx: usize| sigma[idx - 1];
    let one = Complex64::new(1.0, 0.0);

    if j == i && i < m {
        one - th * (1.0 + sqrt_ratio(i + 1, i))
            + th * sqrt_ratio(i + 1, i)
                * (one - sg(i) * sg(i + 1) / (g(i) * g(i + 1)))
    } else if j == i && i == m {
        one - th * (1.0 + sqrt_ratio(m + 1, m))
            + th * sqrt_ratio(m + 1, m)
                * (one - sg(m) * g(m + 1) / (g(m) * sg(m + 1)))
    } else if i > 1 && j == i - 1 {
        Complex64::new(th, 0.0) / g(i)
    } else if j > i && j <= m.saturating_sub(1) {
        // band entry; the denominator chain runs gamma_i..gamma_{j+1}
        let mut chain = one;
        for q in i..=j + 1 {
            chain *= g(q);
        }
        -th * sqrt_ratio(j + 1, i) * sg(i) * sg(j + 1) / chain
    } else if j == m && i < m {
        let mut chain = one;
        for q in i..=m {
            chain *= g(q);
        }
        -th * sqrt_ratio(m + 1, i) * g(m + 1) * sg(i) / (chain * sg(m + 1))
    } else if j == m + 1 {
        let mut chain = one;
        for q in i..=m {
            chain *= g(q);
        }
        th * sqrt_ratio(m + 1, i) * sg(i) / (chain * sg(m + 1))
    } else {
        Complex64::new(0.0, 0.0)
    }
}

/// Closed-form iteration matrix at one Laplace point. The lower half comes
/// from the upper half of the mirrored decomposition.
pub fn eval_rho_closed(p: &RhoParams, s: Complex64) -> Vec<Vec<Complex64>> {
    let m = p.m;
    let n = 2 * m;
    let (sigma, gamma) = p.sigma_gamma(s);
    let pm = p.mirrored();
    let (sigma_m, gamma_m) = pm.sigma_gamma(s);
    let mut rho = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for i in 1..=m {
        for j in 1..=n {
            rho[i - 1][j - 1] = rho_upper_entry(p, &sigma, &gamma, i, j);
        }
    }
    for i in m + 1..=n {
        for j in 1..=n {
            rho[i - 1][j - 1] =
                rho_upper_entry(&pm, &sigma_m, &gamma_m, n + 1 - i, n + 1 - j);
        }
    }
    rho
}

/// Solve the upper-bidiagonal system U x = b (diag d, superdiagonal e).
fn solve_upper_bidiag(d: &[Complex64], e: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let n = d.len();
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    x[n - 1] = b[n - 1] / d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = (b[i] - e[i] * x[i + 1]) / d[i];
    }
    x
}

/// Solve the lower-bidiagonal system U x = b (diag d, subdiagonal e with
/// e[i] multiplying x[i-1]).
fn solve_lower_bidiag(d: &[Complex64], e: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let n = d.len();
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    x[0] = b[0] / d[0];
    for i in 1..n {
        x[i] = (b[i] - e[i] * x[i - 1]) / d[i];
    }
    x
}

/// Iteration matrix assembled from the appendix block construction: the
/// scaled-variable recurrences w = T w + P z, U z = D w + E w', unscaled
/// back to the interface errors. Valid for arbitrary theta.
pub fn eval_rho_blocks(p: &RhoParams, s: Complex64) -> Vec<Vec<Complex64>> {
    let m = p.m;
    let n = 2 * m;
    let (sigma, gamma) = p.sigma_gamma(s);
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let sg = |i: usize| sigma[i - 1];
    let g = |i: usize| gamma[i - 1];
    let kap = |i: usize| p.kappa[i - 1];
    let th = |i: usize| p.theta[i - 1];

    // left blocks (one-based subdomain indices 1..m, interfaces 1..m)
    let mut t_l = vec![vec![zero; m]; m];
    let mut p_l = vec![zero; m];
    let mut u_diag_l = vec![zero; m];
    let mut u_sup_l = vec![zero; m]; // u_sup_l[i] couples z_{i+2} in row i+1
    let mut d_l = vec![zero; m];
    for i in 1..=m {
        t_l[i - 1][i - 1] = one - th(i);
        if i > 1 {
            t_l[i - 1][i - 2] = Complex64::new(th(i), 0.0) / g(i - 1);
        }
        p_l[i - 1] = Complex64::new(th(i) * kap(i + 1) / kap(i), 0.0);
        u_diag_l[i - 1] = Complex64::new((kap(i + 1) / kap(i)).sqrt(), 0.0);
        if i < m {
            u_sup_l[i - 1] = -(kap(i + 2) / kap(i + 1)) * sg(i) / (sg(i + 1) * g(i + 1));
            d_l[i - 1] = -sg(i) * sg(i + 1) / (g(i) * g(i + 1));
        } else {
            d_l[i - 1] = -sg(m) * g(m + 1) / (g(m) * sg(m + 1));
        }
    }
    // E_L has the single entry (m, 1): sigma_m / (sigma_{m+1} gamma_{m+2})
    let e_l_entry = sg(m) / (sg(m + 1) * g(m + 2));

    // right blocks (subdomains m+2..2m+1, interfaces m+1..2m; local 1..m)
    let mut t_r = vec![vec![zero; m]; m];
    let mut p_r = vec![zero; m];
    let mut u_diag_r = vec![zero; m];
    let mut u_sub_r = vec![zero; m];
    let mut d_r = vec![zero; m];
    for lo in 1..=m {
        let i = m + lo; // interface index
        t_r[lo - 1][lo - 1] = one - th(i);
        if lo < m {
            t_r[lo - 1][lo] = Complex64::new(th(i), 0.0) / g(i + 2);
        }
        p_r[lo - 1] = Complex64::new(th(i) * kap(i) / kap(i + 1), 0.0);
        u_diag_r[lo - 1] = Complex64::new((kap(i) / kap(i + 1)).sqrt(), 0.0);
        if lo > 1 {
            u_sub_r[lo - 1] = -(kap(i - 1) / kap(i)) * sg(i + 1) / (sg(i) * g(i));
            d_r[lo - 1] = -sg(i) * sg(i + 1) / (g(i) * g(i + 1));
        } else {
            d_r[0] = -g(m + 1) * sg(m + 2) / (sg(m + 1) * g(m + 2));
        }
    }
    // E_R single entry (1, m): sigma_{m+2} / (gamma_m sigma_{m+1})
    let e_r_entry = sg(m + 2) / (g(m) * sg(m + 1));

    // full matrix in scaled variables
    let mut mat = vec![vec![zero; n]; n];
    // columns j = 1..m drive both w_L (via T_L, D_L) and w_R (via E_R)
    for j in 1..=m {
        // U_L z = D_L e_j  (digonal D_L picks column j)
        let mut b = vec![zero; m];
        b[j - 1] = d_l[j - 1];
        let z = solve_upper_bidiag(&u_diag_l, &u_sup_l, &b);
        for i in 1..=m {
            mat[i - 1][j - 1] = t_l[i - 1][j - 1] + p_l[i - 1] * z[i - 1];
        }
        // right half sees w_L only through E_R (column m of w_L)
        if j == m {
            let mut b = vec![zero; m];
            b[0] = e_r_entry;
            let z = solve_lower_bidiag(&u_diag_r, &u_sub_r, &b);
            for i in 1..=m {
                mat[m + i - 1][j - 1] = p_r[i - 1] * z[i - 1];
            }
        }
    }
    for j in 1..=m {
        // columns m+j: w_R components
        let mut b = vec![zero; m];
        b[j - 1] = d_r[j - 1];
        let z = solve_lower_bidiag(&u_diag_r, &u_sub_r, &b);
        for i in 1..=m {
            mat[m + i - 1][m + j - 1] = t_r[i - 1][j - 1] + p_r[i - 1] * z[i - 1];
        }
        if j == 1 {
            let mut b = vec![zero; m];
            b[m - 1] = e_l_entry;
            let z = solve_upper_bidiag(&u_diag_l, &u_sup_l, &b);
            for i in 1..=m {
                mat[i - 1][m + j - 1] = p_l[i - 1] * z[i - 1];
            }
        }
    }

    // unscale: w_bar_i = S_i w_i with S = diag(gamma_1..gamma_m,
    // gamma_{m+2}..gamma_{2m+1}); rho = S^{-1} M S
    let scale = |i: usize| -> Complex64 {
        if i <= m {
            g(i)
        } else {
            g(i + 1)
        }
    };
    let mut rho = vec![vec![zero; n]; n];
    for i in 1..=n {
        for j in 1..=n {
            rho[i - 1][j - 1] = mat[i - 1][j - 1] * scale(j) / scale(i);
        }
    }
    rho
}

fn mat_vec(a: &[Vec<Complex64>], x: &[Complex64]) -> Vec<Complex64> {
    a.iter()
        .map(|row| row.iter().zip(x.iter()).map(|(r, v)| r * v).sum())
        .collect()
}

/// Frequency-domain error propagation: apply rho(s)^k to the initial error
/// symbols on the contour and invert, giving per-interface time-domain
/// predictions. Restricted to nu <= 1/2, where every rho entry is analytic
/// off the negative real axis and the Talbot contour applies.
pub fn propagate_error_frequency(
    p: &RhoParams,
    initial: &[LaplaceSymbol],
    k: usize,
    times: &[f64],
) -> Result<Vec<Vec<f64>>> {
    if p.nu > 0.5 {
        return Err(FracError::WrongRegime(
            "frequency propagation uses the Talbot contour, valid for nu <= 1/2".into(),
        ));
    }
    let n = 2 * p.m;
    if initial.len() != n {
        return Err(FracError::Incompatible(format!(
            "need {n} initial symbols, got {}",
            initial.len()
        )));
    }
    let mut out = vec![vec![0.0; times.len()]; n];
    for (ti, &t) in times.iter().enumerate() {
        if !(t > 0.0) {
            return Err(FracError::InvalidParameter("times must be positive".into()));
        }
        for (s, w) in contour(t, DEFAULT_NODES) {
            let mut v: Vec<Complex64> = initial.iter().map(|f| f.at(s)).collect();
            if k > 0 {
                let rho = eval_rho_closed(p, s);
                for _ in 0..k {
                    v = mat_vec(&rho, &v);
                }
            }
            for i in 0..n {
                out[i][ti] += (w * v[i]).re;
            }
        }
        for i in 0..n {
            if !out[i][ti].is_finite() {
                return Err(FracError::ContourFailure(format!(
                    "error propagation diverged at t = {t}, interface {}",
                    i + 1
                )));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{rngs::StdRng, Rng, SeedableRng};

    fn symmetric_params(m: usize, nu: f64) -> RhoParams {
        let n = 2 * m + 1;
        RhoParams::with_optimal_theta(vec![1.0; n], vec![1.0; n], nu).unwrap()
    }

    #[test]
    fn hyperbolic_identity_on_contour() {
        let p = symmetric_params(2, 0.25);
        for (s, _) in contour(0.7, 24) {
            let (sigma, gamma) = p.sigma_gamma(s);
            for (sg, g) in sigma.iter().zip(gamma.iter()) {
                let resid = g * g - sg * sg - Complex64::new(1.0, 0.0);
                assert!(resid.norm() < 1e-9, "identity violated: {resid}");
            }
        }
    }

    #[test]
    fn symmetric_m1_entries() {
        // equal kappa, equal lengths: diagonal vanishes; off-diagonal is
        // 1/(2 cosh(h s^nu))
        let p = symmetric_params(1, 0.25);
        let s = Complex64::new(1.0, 0.0); // h s^nu = 1
        let rho = eval_rho_closed(&p, s);
        assert!(rho[0][0].norm() < 1e-14);
        assert!(rho[1][1].norm() < 1e-14);
        let want = 1.0 / (2.0 * 1.0f64.cosh());
        assert!((want - 0.32403).abs() < 1e-5);
        assert!((rho[0][1].re - want).abs() < 1e-12);
        assert!((rho[1][0].re - want).abs() < 1e-12);
    }

    #[test]
    fn sparsity_pattern_matches_case_list() {
        let m = 3;
        let n = 2 * m;
        let mut rng = StdRng::seed_from_u64(3);
        let lengths: Vec<f64> = (0..n + 1).map(|_| rng.gen_range(0.5..2.0)).collect();
        let kappa: Vec<f64> = (0..n + 1).map(|_| rng.gen_range(0.25..4.0)).collect();
        let p = RhoParams::with_optimal_theta(lengths, kappa, 0.3).unwrap();
        let rho = eval_rho_closed(&p, Complex64::new(0.8, 0.4));
        for i in 1..=m {
            for j in 1..=n {
                let expect_zero = j > m + 1 || (i > 1 && j < i - 1);
                if expect_zero {
                    assert!(
                        rho[i - 1][j - 1].norm() < 1e-15,
                        "expected structural zero at ({i},{j})"
                    );
                }
            }
        }
        // mirrored for the lower half
        for i in m + 1..=n {
            for j in 1..=n {
                let (ri, rj) = (n + 1 - i, n + 1 - j);
                let expect_zero = rj > m + 1 || (ri > 1 && rj < ri - 1);
                if expect_zero {
                    assert!(
                        rho[i - 1][j - 1].norm() < 1e-15,
                        "expected structural zero at ({i},{j})"
                    );
                }
            }
        }
    }

    #[test]
    fn closed_and_blocks_agree_at_optimal_theta() {
        let mut rng = StdRng::seed_from_u64(42);
        for trial in 0..50 {
            let m = rng.gen_range(1..=3);
            let n = 2 * m + 1;
            let lengths: Vec<f64> = (0..n).map(|_| rng.gen_range(0.4..2.5)).collect();
            let kappa: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..5.0)).collect();
            let nu = rng.gen_range(0.1..0.9);
            let p = RhoParams::with_optimal_theta(lengths, kappa, nu).unwrap();
            for (s, _) in contour(1.0, 10) {
                let a = eval_rho_closed(&p, s);
                let b = eval_rho_blocks(&p, s);
                for i in 0..2 * m {
                    for j in 0..2 * m {
                        let d = (a[i][j] - b[i][j]).norm();
                        assert!(
                            d < 1e-12,
                            "trial {trial} m={m} entry ({i},{j}): closed {} blocks {} (|diff| {d})",
                            a[i][j],
                            b[i][j]
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn blocks_theta_one_replacement_structure() {
        // theta = 1 kills the (1-theta) diagonal of T
        let p = RhoParams::new(vec![1.0; 3], vec![1.0; 3], vec![1.0, 1.0], 0.3).unwrap();
        let s = Complex64::new(1.3, 0.2);
        let rho = eval_rho_blocks(&p, s);
        // with theta=1 the m=1 diagonal reduces to -sigma gamma/(gamma sigma)
        // of the pure Dirichlet-Neumann map; just check finiteness and the
        // absence of the identity part: rho_{11} != 1 - theta = 0 shifted
        let (sigma, gamma) = p.sigma_gamma(s);
        let want = -(sigma[0] * gamma[1]) / (gamma[0] * sigma[1]);
        assert!((rho[0][0] - want).norm() < 1e-12);
    }

    #[test]
    fn pu_inverse_closed_form_pattern() {
        // (P_L U_L^{-1})_{ij} = th_i sqrt(k_{j+1}/k_i) sigma_i /
        //   (gamma_{i+1}..gamma_j sigma_j) for i < j; diag th_i sqrt(k_{i+1}/k_i)
        let mut rng = StdRng::seed_from_u64(9);
        let m = 3;
        let n = 2 * m + 1;
        let lengths: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
        let kappa: Vec<f64> = (0..n).map(|_| rng.gen_range(0.3..3.0)).collect();
        let p = RhoParams::with_optimal_theta(lengths, kappa, 0.4).unwrap();
        let s = Complex64::new(0.9, 0.7);
        let (sigma, gamma) = p.sigma_gamma(s);
        // numeric P_L U_L^{-1} by solving against unit vectors
        let zero = Complex64::new(0.0, 0.0);
        let mut u_diag = vec![zero; m];
        let mut u_sup = vec![zero; m];
        for i in 1..=m {
            u_diag[i - 1] = Complex64::new((p.kappa[i] / p.kappa[i - 1]).sqrt(), 0.0);
            if i < m {
                u_sup[i - 1] =
                    -(p.kappa[i + 1] / p.kappa[i]) * sigma[i - 1] / (sigma[i] * gamma[i]);
            }
        }
        for j in 1..=m {
            let mut b = vec![zero; m];
            b[j - 1] = Complex64::new(1.0, 0.0);
            let z = solve_upper_bidiag(&u_diag, &u_sup, &b);
            for i in 1..=m {
                let numeric =
                    Complex64::new(p.theta[i - 1] * p.kappa[i] / p.kappa[i - 1], 0.0) * z[i - 1];
                let closed = if i == j {
                    Complex64::new(
                        p.theta[i - 1] * (p.kappa[i] / p.kappa[i - 1]).sqrt(),
                        0.0,
                    )
                } else if i < j {
                    let mut chain = Complex64::new(1.0, 0.0);
                    for q in i + 1..=j {
                        chain *= gamma[q - 1];
                    }
                    Complex64::new(
                        p.theta[i - 1] * (p.kappa[j] / p.kappa[i - 1]).sqrt(),
                        0.0,
                    ) * sigma[i - 1]
                        / (chain * sigma[j - 1])
                } else {
                    zero
                };
                assert!(
                    (numeric - closed).norm() < 1e-12,
                    "entry ({i},{j}): {numeric} vs {closed}"
                );
            }
        }
    }

    #[test]
    fn propagation_trivia() {
        let p = symmetric_params(1, 0.25);
        let zero_sym = LaplaceSymbol::new("0", |_| Complex64::new(0.0, 0.0));
        let out = propagate_error_frequency(
            &p,
            &[zero_sym.clone(), zero_sym],
            3,
            &[0.25, 0.5, 1.0],
        )
        .unwrap();
        for row in &out {
            for v in row {
                assert!(v.abs() < 1e-14);
            }
        }
        // k = 0 returns the inverse transform of the initial symbols
        let step = LaplaceSymbol::new("1/s", |s| 1.0 / s);
        let out =
            propagate_error_frequency(&p, &[step.clone(), step], 0, &[0.5, 1.0]).unwrap();
        for row in &out {
            for v in row {
                assert!((v - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn propagation_rejects_wave_regime() {
        let p = symmetric_params(1, 0.75);
        let step = LaplaceSymbol::new("1/s", |s| 1.0 / s);
        assert!(matches!(
            propagate_error_frequency(&p, &[step.clone(), step], 1, &[1.0]),
            Err(FracError::WrongRegime(_))
        ));
    }
}
