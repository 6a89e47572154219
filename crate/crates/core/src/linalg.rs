//! Small dense linear algebra helpers: Cholesky factorization with
//! rank-one style add/drop updates for an active-set Gram matrix.
//!
//! Path algorithms grow and shrink the active set one variable at a
//! time, so the factor is maintained incrementally: appending a row is
//! a triangular solve, removing one is a sweep of Givens rotations.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

/// Relative floor under which a pivot is treated as zero.
const PIVOT_REL_TOL: f64 = 1e-12;

/// Lower-triangular Cholesky factor of a symmetric positive definite
/// matrix built up one row/column at a time. Row `k` stores entries
/// `L[k][0..=k]`.
#[derive(Debug, Clone, Default)]
pub struct UpdatableCholesky {
    rows: Vec<Vec<f64>>,
    /// Largest diagonal seen, used to scale the pivot tolerance.
    diag_scale: f64,
}

impl UpdatableCholesky {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Extends the factored matrix by one row/column. `cross` holds the
    /// inner products against the existing columns (length `size()`),
    /// `diag` the new diagonal entry. Fails if the update would make the
    /// matrix numerically singular.
    pub fn push(&mut self, cross: &[f64], diag: f64, column: usize) -> Result<()> {
        assert_eq!(cross.len(), self.rows.len());
        let w = self.forward_sub(cross);
        let rem = diag - w.iter().map(|v| v * v).sum::<f64>();
        self.diag_scale = self.diag_scale.max(diag.abs());
        if rem <= PIVOT_REL_TOL * self.diag_scale.max(1e-300) {
            return Err(Error::RankDeficient { column });
        }
        let mut row = w;
        row.push(rem.sqrt());
        self.rows.push(row);
        Ok(())
    }

    /// Removes row/column `index`, re-triangularizing the trailing block
    /// with Givens rotations.
    pub fn remove(&mut self, index: usize) {
        assert!(index < self.rows.len());
        self.rows.remove(index);
        let m = self.rows.len();
        for j in index..m {
            // Row j currently has one entry past its diagonal; rotate
            // columns (j, j+1) to annihilate it.
            let a = self.rows[j][j];
            let b = self.rows[j][j + 1];
            let r = a.hypot(b);
            if r > 0.0 {
                let (c, s) = (a / r, b / r);
                for k in j..m {
                    let x = self.rows[k][j];
                    let y = self.rows[k][j + 1];
                    self.rows[k][j] = c * x + s * y;
                    self.rows[k][j + 1] = s.mul_add(-x, c * y);
                }
            }
            self.rows[j].truncate(j + 1);
        }
    }

    fn forward_sub(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        for (k, row) in self.rows.iter().enumerate() {
            let dot: f64 = row[..k].iter().zip(&x[..k]).map(|(l, v)| l * v).sum();
            x[k] = (x[k] - dot) / row[k];
        }
        x
    }

    fn back_sub(&self, mut x: Vec<f64>) -> Vec<f64> {
        let m = self.rows.len();
        for k in (0..m).rev() {
            let mut v = x[k];
            for i in k + 1..m {
                v -= self.rows[i][k] * x[i];
            }
            x[k] = v / self.rows[k][k];
        }
        x
    }

    /// Solves `G x = b` where `G = L Lᵀ` is the factored matrix.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.rows.len());
        self.back_sub(self.forward_sub(b))
    }

    /// Reconstructs the factored matrix; test support.
    #[cfg(test)]
    fn reconstruct(&self) -> Array2<f64> {
        let m = self.rows.len();
        let mut g = Array2::zeros((m, m));
        for i in 0..m {
            for j in 0..m {
                let mut v = 0.0;
                for k in 0..=i.min(j) {
                    v += self.rows[i][k] * self.rows[j][k];
                }
                g[[i, j]] = v;
            }
        }
        g
    }
}

/// Dense Cholesky factorization of a symmetric positive definite matrix.
pub fn cholesky(a: &ArrayView2<f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let mut l = Array2::<f64>::zeros((n, n));
    let mut scale: f64 = 1e-300;
    for j in 0..n {
        scale = scale.max(a[[j, j]].abs());
        for i in j..n {
            let mut sum = a[[i, j]];
            for k in 0..j {
                sum -= l[[i, k]] * l[[j, k]];
            }
            if i == j {
                if sum <= PIVOT_REL_TOL * scale {
                    return Err(Error::RankDeficient { column: j });
                }
                l[[j, j]] = sum.sqrt();
            } else {
                l[[i, j]] = sum / l[[j, j]];
            }
        }
    }
    Ok(l)
}

/// Solves `A x = b` for symmetric positive definite `A`.
pub fn solve_spd(a: &ArrayView2<f64>, b: &ArrayView1<f64>) -> Result<Array1<f64>> {
    let l = cholesky(a)?;
    let n = a.nrows();
    assert_eq!(b.len(), n);
    let mut x = b.to_owned();
    for i in 0..n {
        let mut v = x[i];
        for k in 0..i {
            v -= l[[i, k]] * x[k];
        }
        x[i] = v / l[[i, i]];
    }
    for i in (0..n).rev() {
        let mut v = x[i];
        for k in i + 1..n {
            v -= l[[k, i]] * x[k];
        }
        x[i] = v / l[[i, i]];
    }
    Ok(x)
}

/// Least squares fit `argmin ‖y − X b‖²` via the normal equations.
/// Requires `X` to have full column rank.
pub fn least_squares(x: &ArrayView2<f64>, y: &ArrayView1<f64>) -> Result<Array1<f64>> {
    let g = x.t().dot(x);
    let rhs = x.t().dot(y);
    solve_spd(&g.view(), &rhs.view())
}

/// Solves `A x = b` for general square `A` by Gaussian elimination with
/// partial pivoting. For the small bordered systems that are not symmetric.
pub fn solve_general(a: &ArrayView2<f64>, b: &ArrayView1<f64>) -> Result<Array1<f64>> {
    let n = a.nrows();
    assert_eq!(a.ncols(), n);
    assert_eq!(b.len(), n);
    let mut m = a.to_owned();
    let mut x = b.to_owned();
    let scale = m.iter().fold(0.0f64, |s, &v| s.max(v.abs())).max(1.0);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[[i, col]].abs().total_cmp(&m[[j, col]].abs()))
            .unwrap();
        if m[[pivot, col]].abs() <= 1e-13 * scale {
            return Err(Error::RankDeficient { column: col });
        }
        if pivot != col {
            for k in 0..n {
                m.swap([pivot, k], [col, k]);
            }
            x.swap(pivot, col);
        }
        for row in col + 1..n {
            let factor = m[[row, col]] / m[[col, col]];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                m[[row, k]] -= factor * m[[col, k]];
            }
            x[row] -= factor * x[col];
        }
    }
    for i in (0..n).rev() {
        let mut v = x[i];
        for k in i + 1..n {
            v -= m[[i, k]] * x[k];
        }
        x[i] = v / m[[i, i]];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn spd_4x4() -> Array2<f64> {
        // B Bᵀ + I for a fixed B keeps the test matrix well conditioned.
        let b = array![
            [0.6, -1.2, 0.3, 0.9],
            [1.1, 0.4, -0.7, 0.2],
            [-0.5, 0.8, 1.3, -0.1],
            [0.2, -0.3, 0.6, 1.4],
        ];
        b.dot(&b.t()) + Array2::<f64>::eye(4)
    }

    #[test]
    fn cholesky_reconstructs() {
        let a = spd_4x4();
        let l = cholesky(&a.view()).unwrap();
        let back = l.dot(&l.t());
        for (u, v) in a.iter().zip(back.iter()) {
            assert_abs_diff_eq!(u, v, epsilon = 1e-12);
        }
    }

    #[test]
    fn solve_spd_matches_direct() {
        let a = spd_4x4();
        let b = array![1.0, -2.0, 0.5, 3.0];
        let x = solve_spd(&a.view(), &b.view()).unwrap();
        let back = a.dot(&x);
        for (u, v) in b.iter().zip(back.iter()) {
            assert_abs_diff_eq!(u, v, epsilon = 1e-10);
        }
    }

    #[test]
    fn cholesky_rejects_singular() {
        let a = array![[1.0, 1.0], [1.0, 1.0]];
        assert!(matches!(
            cholesky(&a.view()),
            Err(Error::RankDeficient { column: 1 })
        ));
    }

    #[test]
    fn incremental_push_matches_batch() {
        let a = spd_4x4();
        let mut inc = UpdatableCholesky::new();
        for k in 0..4 {
            let cross: Vec<f64> = (0..k).map(|i| a[[k, i]]).collect();
            inc.push(&cross, a[[k, k]], k).unwrap();
        }
        let back = inc.reconstruct();
        for (u, v) in a.iter().zip(back.iter()) {
            assert_abs_diff_eq!(u, v, epsilon = 1e-12);
        }
    }

    #[test]
    fn remove_matches_refactorization() {
        let a = spd_4x4();
        for drop in 0..4 {
            let mut inc = UpdatableCholesky::new();
            for k in 0..4 {
                let cross: Vec<f64> = (0..k).map(|i| a[[k, i]]).collect();
                inc.push(&cross, a[[k, k]], k).unwrap();
            }
            inc.remove(drop);
            let keep: Vec<usize> = (0..4).filter(|&i| i != drop).collect();
            let back = inc.reconstruct();
            for (bi, &i) in keep.iter().enumerate() {
                for (bj, &j) in keep.iter().enumerate() {
                    assert_abs_diff_eq!(back[[bi, bj]], a[[i, j]], epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn solve_after_updates_stays_consistent() {
        // Grow to five columns, drop the middle one, grow again; the
        // factor must keep solving the current Gram exactly.
        let b = array![
            [0.6, -1.2, 0.3, 0.9, -0.4],
            [1.1, 0.4, -0.7, 0.2, 0.8],
            [-0.5, 0.8, 1.3, -0.1, 0.6],
            [0.2, -0.3, 0.6, 1.4, -1.0],
            [0.9, 0.5, -0.2, 0.3, 1.2],
            [-0.7, 1.0, 0.4, -0.6, 0.1],
        ];
        let g = b.t().dot(&b);
        let mut inc = UpdatableCholesky::new();
        let mut cols: Vec<usize> = vec![];
        for k in 0..4 {
            let cross: Vec<f64> = cols.iter().map(|&i| g[[k, i]]).collect();
            inc.push(&cross, g[[k, k]], k).unwrap();
            cols.push(k);
        }
        inc.remove(2);
        cols.remove(2);
        let cross: Vec<f64> = cols.iter().map(|&i| g[[4, i]]).collect();
        inc.push(&cross, g[[4, 4]], 4).unwrap();
        cols.push(4);

        let rhs: Vec<f64> = cols.iter().map(|&i| i as f64 + 1.0).collect();
        let x = inc.solve(&rhs);
        for (r, &i) in cols.iter().enumerate() {
            let mut v = 0.0;
            for (c, &j) in cols.iter().enumerate() {
                v += g[[i, j]] * x[c];
            }
            assert_abs_diff_eq!(v, rhs[r], epsilon = 1e-10);
        }
    }

    #[test]
    fn least_squares_recovers_exact_coefficients() {
        let x = array![
            [1.0, 0.0, 2.0],
            [0.0, 1.0, -1.0],
            [1.0, 1.0, 0.0],
            [2.0, -1.0, 1.0],
            [0.5, 0.5, 0.5],
        ];
        let beta = array![1.5, -2.0, 0.25];
        let y = x.dot(&beta);
        let fit = least_squares(&x.view(), &y.view()).unwrap();
        for (u, v) in beta.iter().zip(fit.iter()) {
            assert_abs_diff_eq!(u, v, epsilon = 1e-10);
        }
    }

    #[test]
    fn general_solve_handles_asymmetric_systems() {
        // Asymmetric, needs a row swap: the first pivot is below the diagonal.
        let a = array![
            [0.001, 2.0, -1.0],
            [3.0, -0.5, 0.25],
            [-1.0, 4.0, 1.5],
        ];
        let truth = array![2.0, -1.0, 0.5];
        let b = a.dot(&truth);
        let x = solve_general(&a.view(), &b.view()).unwrap();
        for (u, v) in truth.iter().zip(x.iter()) {
            assert_abs_diff_eq!(u, v, epsilon = 1e-12);
        }
    }

    #[test]
    fn general_solve_rejects_singular_matrices() {
        let a = array![[1.0, 2.0], [2.0, 4.0]];
        let b = array![1.0, 2.0];
        assert!(solve_general(&a.view(), &b.view()).is_err());
    }
}
