//! Direct solvers used by the implicit time steppers: Thomas elimination for
//! tridiagonal systems and an LU factorization for banded matrices.
//!
//! No pivoting anywhere: every system assembled in this crate is strictly
//! diagonally dominant (asserted at assembly time), so elimination is stable.

/// Tridiagonal system solver, `sub`/`diag`/`sup` are the three diagonals.
/// `sub[0]` and `sup[n-1]` are ignored. Solves in O(n), overwrites nothing.
pub fn solve_tridiag(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    assert!(n >= 1 && sub.len() == n && sup.len() == n && rhs.len() == n);
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - sub[i] * c[i - 1];
        c[i] = sup[i] / m;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / m;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        let t = x[i] - c[i] * x[i + 1];
        x[i] = t;
    }
    x
}

/// Banded matrix in LAPACK-like storage: row `i`, column `j` stored when
/// `|i - j| <= bw`. `data[i][j - i + bw]` holds entry (i, j).
pub struct BandMatrix {
    pub n: usize,
    pub bw: usize,
    data: Vec<f64>,
    factored: bool,
}

impl BandMatrix {
    pub fn zeros(n: usize, bw: usize) -> Self {
        BandMatrix {
            n,
            bw,
            data: vec![0.0; n * (2 * bw + 1)],
            factored: false,
        }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.bw >= i && j <= i + self.bw);
        i * (2 * self.bw + 1) + (j + self.bw - i)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.bw < i || j > i + self.bw {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(!self.factored, "matrix already factored");
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(!self.factored, "matrix already factored");
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    /// In-place LU without pivoting. L's unit diagonal is implicit; the
    /// multipliers overwrite the sub-band. The elimination works on
    /// contiguous row slices so the inner update vectorizes.
    pub fn factor(&mut self) {
        assert!(!self.factored);
        let n = self.n;
        let bw = self.bw;
        let w = 2 * bw + 1;
        for k in 0..n {
            let piv = self.data[k * w + bw];
            assert!(piv != 0.0, "zero pivot in banded LU at row {k}");
            let jmax = (k + bw).min(n - 1);
            let len = jmax - k; // columns k+1..=jmax
            let imax = (k + bw).min(n - 1);
            for i in (k + 1)..=imax {
                let (head, tail) = self.data.split_at_mut(i * w);
                let row_k = &head[k * w..k * w + w];
                let row_i = &mut tail[..w];
                let off = k + bw - i; // column k in row i
                let lik = row_i[off] / piv;
                row_i[off] = lik;
                if lik != 0.0 && len > 0 {
                    let dst = &mut row_i[off + 1..off + 1 + len];
                    let src = &row_k[bw + 1..bw + 1 + len];
                    for (d, s) in dst.iter_mut().zip(src.iter()) {
                        *d -= lik * s;
                    }
                }
            }
        }
        self.factored = true;
    }

    /// Solve with the factored matrix.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        assert!(self.factored, "factor() must be called before solve()");
        let n = self.n;
        let bw = self.bw;
        let w = 2 * bw + 1;
        let mut x = rhs.to_vec();
        // forward
        for i in 0..n {
            let jmin = i.saturating_sub(bw);
            let row = &self.data[i * w..i * w + w];
            let mut acc = x[i];
            for (j, xv) in x[jmin..i].iter().enumerate() {
                acc -= row[jmin + j + bw - i] * xv;
            }
            x[i] = acc;
        }
        // backward
        for i in (0..n).rev() {
            let jmax = (i + bw).min(n - 1);
            let row = &self.data[i * w..i * w + w];
            let mut acc = x[i];
            for (j, xv) in x[i + 1..=jmax].iter().enumerate() {
                acc -= row[bw + 1 + j] * xv;
            }
            x[i] = acc / row[bw];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{rngs::StdRng, Rng, SeedableRng};

    #[test]
    fn tridiag_matches_dense() {
        let n = 11;
        let mut rng = StdRng::seed_from_u64(7);
        let sub: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.4..0.4)).collect();
        let sup: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.4..0.4)).collect();
        let diag: Vec<f64> = (0..n).map(|_| rng.gen_range(1.0..2.0)).collect();
        let x_true: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut rhs = vec![0.0; n];
        for i in 0..n {
            rhs[i] = diag[i] * x_true[i];
            if i > 0 {
                rhs[i] += sub[i] * x_true[i - 1];
            }
            if i + 1 < n {
                rhs[i] += sup[i] * x_true[i + 1];
            }
        }
        let x = solve_tridiag(&sub, &diag, &sup, &rhs);
        for i in 0..n {
            assert!((x[i] - x_true[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn banded_lu_matches_dense() {
        let n = 40;
        let bw = 5;
        let mut rng = StdRng::seed_from_u64(11);
        let mut a = BandMatrix::zeros(n, bw);
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i.saturating_sub(bw)..=(i + bw).min(n - 1) {
                let v = if i == j {
                    rng.gen_range(4.0..6.0)
                } else {
                    rng.gen_range(-0.3..0.3)
                };
                a.set(i, j, v);
                dense[i][j] = v;
            }
        }
        let x_true: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let rhs: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| dense[i][j] * x_true[j]).sum())
            .collect();
        a.factor();
        let x = a.solve(&rhs);
        for i in 0..n {
            assert!((x[i] - x_true[i]).abs() < 1e-11, "i={i}: {} vs {}", x[i], x_true[i]);
        }
    }
}
