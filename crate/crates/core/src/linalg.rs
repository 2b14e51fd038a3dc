//! Small dense linear algebra: column-major matrices, Cholesky solves,
//! minimum-norm least squares and Jacobi eigenvalue routines.
//!
//! Everything here is hand-rolled and deterministic. Sizes are desk scale
//! (a few thousand rows, at most a couple of thousand columns).

use crate::error::{Error, Result};

/// Largest side accepted by [`sym_eig_range`].
pub const EIG_RANGE_CAP: usize = 200;

/// Relative singular-value cutoff used by the minimum-norm solvers.
pub const SVD_CUTOFF: f64 = 1e-10;

/// Relative eigenvalue cutoff for pseudo-inverse solves on Gram matrices.
/// A Gram matrix squares singular values, so this sits well above the
/// roundoff floor of `X'X` rather than at `SVD_CUTOFF^2`.
pub const GRAM_EIG_CUTOFF: f64 = 1e-12;

/// Real matrix stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Wraps column-major `data`, checking its length and finiteness.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    /// Builds a matrix from row slices (convenient in tests and fixtures).
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        let mut data = vec![0.0; n * d];
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                data[j * n + i] = v;
            }
        }
        Self::new(n, d, data)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.rows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[j * self.rows + i] = v;
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        let r = self.rows;
        &mut self.data[j * r..(j + 1) * r]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.cols).map(|j| self.get(i, j)).collect()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// `A x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "matvec dimension");
        let mut out = vec![0.0; self.rows];
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                axpy(xj, self.col(j), &mut out);
            }
        }
        out
    }

    /// `A' x`.
    pub fn t_matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows, "t_matvec dimension");
        (0..self.cols).map(|j| dot(self.col(j), x)).collect()
    }

    /// `A' A`.
    pub fn gram(&self) -> DenseMatrix {
        let d = self.cols;
        let mut g = DenseMatrix::zeros(d, d);
        for j in 0..d {
            for k in j..d {
                let v = dot(self.col(j), self.col(k));
                g.set(j, k, v);
                g.set(k, j, v);
            }
        }
        g
    }

    /// Copy of the listed columns, in the given order.
    pub fn select_columns(&self, idx: &[usize]) -> DenseMatrix {
        let mut data = Vec::with_capacity(self.rows * idx.len());
        for &j in idx {
            data.extend_from_slice(self.col(j));
        }
        DenseMatrix {
            rows: self.rows,
            cols: idx.len(),
            data,
        }
    }

    /// Principal submatrix on `idx` (rows and columns).
    pub fn principal(&self, idx: &[usize]) -> DenseMatrix {
        DenseMatrix::from_fn(idx.len(), idx.len(), |a, b| self.get(idx[a], idx[b]))
    }

    pub fn scaled(&self, c: f64) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.cols {
            for i in 0..j {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `y += a x`.
#[inline]
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

pub fn norm_inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn check_square_symmetric(a: &DenseMatrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let asym = a.asymmetry();
    if asym > 1e-12 * a.max_abs().max(f64::MIN_POSITIVE) {
        return Err(Error::NotSymmetric(asym));
    }
    Ok(())
}

/// Lower Cholesky factor `L` with `A = L L'`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    lower: DenseMatrix,
}

impl Cholesky {
    /// Factors a symmetric positive-definite matrix. A pivot at or below
    /// `1e-12 * trace(A) / n` is reported as [`Error::NotPositiveDefinite`].
    pub fn factor(a: &DenseMatrix) -> Result<Self> {
        check_square_symmetric(a)?;
        let n = a.rows();
        let floor = 1e-12 * a.trace() / n.max(1) as f64;
        let mut l = DenseMatrix::zeros(n, n);
        for j in 0..n {
            let mut diag = a.get(j, j);
            for k in 0..j {
                diag -= l.get(j, k) * l.get(j, k);
            }
            if !(diag > floor) || diag <= 0.0 {
                return Err(Error::NotPositiveDefinite {
                    index: j,
                    pivot: diag,
                });
            }
            let ljj = diag.sqrt();
            l.set(j, j, ljj);
            for i in j + 1..n {
                let mut v = a.get(i, j);
                for k in 0..j {
                    v -= l.get(i, k) * l.get(j, k);
                }
                l.set(i, j, v / ljj);
            }
        }
        Ok(Self { lower: l })
    }

    pub fn lower(&self) -> &DenseMatrix {
        &self.lower
    }

    /// Solves `A x = b` by forward and back substitution.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lower.rows();
        assert_eq!(b.len(), n, "cholesky solve dimension");
        let l = &self.lower;
        let mut z = b.to_vec();
        for i in 0..n {
            let mut v = z[i];
            for k in 0..i {
                v -= l.get(i, k) * z[k];
            }
            z[i] = v / l.get(i, i);
        }
        for i in (0..n).rev() {
            let mut v = z[i];
            for k in i + 1..n {
                v -= l.get(k, i) * z[k];
            }
            z[i] = v / l.get(i, i);
        }
        z
    }

    /// `L z`, used to colour standard normal draws.
    pub fn mul_lower(&self, z: &[f64], out: &mut [f64]) {
        let n = self.lower.rows();
        for (i, o) in out.iter_mut().enumerate().take(n) {
            let mut v = 0.0;
            for (k, zk) in z.iter().enumerate().take(i + 1) {
                v += self.lower.get(i, k) * zk;
            }
            *o = v;
        }
    }
}

/// Solves `A x = b` for symmetric positive-definite `A`.
pub fn solve_spd(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "rhs of length {} for a {}x{} system",
            b.len(),
            a.rows(),
            a.cols()
        )));
    }
    Ok(Cholesky::factor(a)?.solve(b))
}

/// Minimum-norm least-squares solution of `min ||y - X beta||_2`.
///
/// Uses a one-sided Jacobi SVD; singular values at or below
/// `SVD_CUTOFF * sigma_max` are treated as zero. Zero columns give an empty
/// vector.
pub fn least_squares_min_norm(x: &DenseMatrix, y: &[f64]) -> Result<Vec<f64>> {
    if y.len() != x.rows() {
        return Err(Error::DimensionMismatch(format!(
            "response of length {} for {} rows",
            y.len(),
            x.rows()
        )));
    }
    let n = x.cols();
    if n == 0 {
        return Ok(Vec::new());
    }
    let svd = JacobiSvd::compute(x);
    let smax = svd.sigma.iter().fold(0.0f64, |m, &s| m.max(s));
    let mut beta = vec![0.0; n];
    if smax == 0.0 {
        return Ok(beta);
    }
    for i in 0..n {
        let s = svd.sigma[i];
        if s > SVD_CUTOFF * smax {
            let coef = dot(svd.u.col(i), y) / (s * s);
            axpy(coef, svd.v.col(i), &mut beta);
        }
    }
    Ok(beta)
}

/// Minimum-norm solution of the normal equations `G beta = c` where
/// `G = X'X` and `c = X'y`. Tries Cholesky first and falls back to an
/// eigen-decomposition pseudo-inverse when `G` is singular.
pub fn least_squares_min_norm_gram(g: &DenseMatrix, c: &[f64]) -> Result<Vec<f64>> {
    if c.len() != g.rows() {
        return Err(Error::DimensionMismatch(format!(
            "rhs of length {} for a {}x{} gram",
            c.len(),
            g.rows(),
            g.cols()
        )));
    }
    if g.rows() == 0 {
        return Ok(Vec::new());
    }
    match Cholesky::factor(g) {
        Ok(ch) => Ok(ch.solve(c)),
        Err(Error::NotPositiveDefinite { .. }) => {
            let eig = sym_eigen(g)?;
            let lmax = eig.values.iter().fold(0.0f64, |m, &v| m.max(v));
            let mut beta = vec![0.0; c.len()];
            if lmax <= 0.0 {
                return Ok(beta);
            }
            for (i, &lam) in eig.values.iter().enumerate() {
                if lam > GRAM_EIG_CUTOFF * lmax {
                    let v = eig.vectors.col(i);
                    axpy(dot(v, c) / lam, v, &mut beta);
                }
            }
            Ok(beta)
        }
        Err(e) => Err(e),
    }
}

/// Thin SVD by one-sided (Hestenes) Jacobi rotations.
struct JacobiSvd {
    /// Columns are `sigma_i * u_i` before normalisation; kept unnormalised.
    u: DenseMatrix,
    v: DenseMatrix,
    sigma: Vec<f64>,
}

impl JacobiSvd {
    fn compute(x: &DenseMatrix) -> Self {
        let n = x.cols();
        let mut u = x.clone();
        let mut v = DenseMatrix::identity(n);
        let eps = 1e-15;
        for _sweep in 0..80 {
            let mut rotated = false;
            for p in 0..n {
                for q in p + 1..n {
                    let alpha = dot(u.col(p), u.col(p));
                    let beta = dot(u.col(q), u.col(q));
                    let gamma = dot(u.col(p), u.col(q));
                    if gamma == 0.0 || gamma.abs() <= eps * (alpha * beta).sqrt() {
                        continue;
                    }
                    rotated = true;
                    let zeta = (beta - alpha) / (2.0 * gamma);
                    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;
                    rotate_cols(&mut u, p, q, c, s);
                    rotate_cols(&mut v, p, q, c, s);
                }
            }
            if !rotated {
                break;
            }
        }
        let sigma = (0..n).map(|j| norm2(u.col(j))).collect();
        Self { u, v, sigma }
    }
}

fn rotate_cols(m: &mut DenseMatrix, p: usize, q: usize, c: f64, s: f64) {
    let rows = m.rows();
    let data = m.data_mut();
    for i in 0..rows {
        let a = data[p * rows + i];
        let b = data[q * rows + i];
        data[p * rows + i] = c * a - s * b;
        data[q * rows + i] = s * a + c * b;
    }
}

/// Eigenvalues (ascending) and matching orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

/// Full symmetric eigendecomposition by cyclic Jacobi rotations.
pub fn sym_eigen(a: &DenseMatrix) -> Result<SymEigen> {
    check_square_symmetric(a)?;
    let n = a.rows();
    let mut m = a.clone();
    let mut v = DenseMatrix::identity(n);
    let scale: f64 = m.data().iter().map(|x| x * x).sum::<f64>().sqrt();
    if scale > 0.0 {
        for _sweep in 0..100 {
            let mut off = 0.0;
            for j in 0..n {
                for i in 0..j {
                    off += m.get(i, j) * m.get(i, j);
                }
            }
            if off.sqrt() <= 1e-16 * scale {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = m.get(p, q);
                    if apq == 0.0 {
                        continue;
                    }
                    let app = m.get(p, p);
                    let aqq = m.get(q, q);
                    let theta = (aqq - app) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let mkp = m.get(k, p);
                        let mkq = m.get(k, q);
                        m.set(k, p, c * mkp - s * mkq);
                        m.set(k, q, s * mkp + c * mkq);
                    }
                    for k in 0..n {
                        let mpk = m.get(p, k);
                        let mqk = m.get(q, k);
                        m.set(p, k, c * mpk - s * mqk);
                        m.set(q, k, s * mpk + c * mqk);
                    }
                    m.set(p, q, 0.0);
                    m.set(q, p, 0.0);
                    rotate_cols(&mut v, p, q, c, s);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m.get(i, i).total_cmp(&m.get(j, j)));
    let values = order.iter().map(|&i| m.get(i, i)).collect();
    let vectors = v.select_columns(&order);
    Ok(SymEigen { values, vectors })
}

/// Extreme eigenvalues `(lambda_min, lambda_max)` of a symmetric matrix with
/// side at most [`EIG_RANGE_CAP`].
pub fn sym_eig_range(a: &DenseMatrix) -> Result<(f64, f64)> {
    if a.rows() > EIG_RANGE_CAP || a.cols() > EIG_RANGE_CAP {
        return Err(Error::DimensionTooLarge {
            side: a.rows().max(a.cols()),
            cap: EIG_RANGE_CAP,
        });
    }
    if a.rows() == 0 {
        return Err(Error::InvalidArgument(
            "empty matrix has no eigenvalues".into(),
        ));
    }
    let eig = sym_eigen(a)?;
    Ok((eig.values[0], *eig.values.last().expect("nonempty")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual_inf(a: &DenseMatrix, x: &[f64], b: &[f64]) -> f64 {
        let ax = a.matvec(x);
        ax.iter().zip(b).fold(0.0, |m, (p, q)| m.max((p - q).abs()))
    }

    #[test]
    fn spd_identity_and_diagonal() {
        let x = solve_spd(&DenseMatrix::identity(3), &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(x, vec![1.0, 2.0, 3.0]);
        let x = solve_spd(&DenseMatrix::from_diag(&[2.0, 4.0]), &[2.0, 8.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn spd_rejects_singular_and_asymmetric() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(matches!(
            solve_spd(&a, &[1.0, 1.0]),
            Err(Error::NotPositiveDefinite { index: 1, .. })
        ));
        let a = DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![0.0, 2.0]]).unwrap();
        assert!(matches!(
            solve_spd(&a, &[1.0, 1.0]),
            Err(Error::NotSymmetric(_))
        ));
        assert!(matches!(
            solve_spd(&DenseMatrix::identity(2), &[1.0]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn spd_seeded_residual() {
        // Gram of a fixed 8x5 pattern plus a ridge keeps it well conditioned.
        let z = DenseMatrix::from_fn(8, 5, |i, j| ((i * 7 + j * 13) % 11) as f64 / 5.0 - 1.0);
        let mut a = z.gram();
        for i in 0..5 {
            a.set(i, i, a.get(i, i) + 0.5);
        }
        let b = [0.3, -1.2, 2.5, 0.0, 4.0];
        let x = solve_spd(&a, &b).unwrap();
        assert!(residual_inf(&a, &x, &b) <= 1e-9 * (1.0 + norm_inf(&b)));
    }

    #[test]
    fn min_norm_identity_and_empty() {
        let y = [1.0, 0.0, -1.0, 2.0];
        let beta = least_squares_min_norm(&DenseMatrix::identity(4), &y).unwrap();
        for (b, t) in beta.iter().zip(&y) {
            assert!((b - t).abs() < 1e-14);
        }
        let empty = DenseMatrix::zeros(4, 0);
        assert!(least_squares_min_norm(&empty, &y).unwrap().is_empty());
    }

    #[test]
    fn min_norm_rank_deficient_duplicate_column() {
        // Two identical columns: the minimum-norm split is symmetric.
        let x = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![2.0, 2.0], vec![0.5, 0.5]]).unwrap();
        let y = [2.0, 4.0, 1.0];
        let beta = least_squares_min_norm(&x, &y).unwrap();
        assert!((beta[0] - 1.0).abs() < 1e-12, "{beta:?}");
        assert!((beta[1] - 1.0).abs() < 1e-12, "{beta:?}");
        let g = x.gram();
        let c = x.t_matvec(&y);
        let beta_g = least_squares_min_norm_gram(&g, &c).unwrap();
        assert!((beta_g[0] - 1.0).abs() < 1e-9 && (beta_g[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn min_norm_underdetermined_matches_pinv() {
        // One row, two columns: minimum-norm solution is x' y / ||x||^2.
        let x = DenseMatrix::from_rows(&[vec![3.0, 4.0]]).unwrap();
        let beta = least_squares_min_norm(&x, &[5.0]).unwrap();
        assert!((beta[0] - 0.6).abs() < 1e-14 && (beta[1] - 0.8).abs() < 1e-14);
    }

    #[test]
    fn eig_range_diagonal_and_scaled_identity() {
        let (lo, hi) = sym_eig_range(&DenseMatrix::from_diag(&[1.0, 2.0, 5.0])).unwrap();
        assert_eq!((lo, hi), (1.0, 5.0));
        let (lo, hi) = sym_eig_range(&DenseMatrix::identity(6).scaled(2.5)).unwrap();
        assert_eq!((lo, hi), (2.5, 2.5));
    }

    #[test]
    fn eig_range_cap() {
        let big = DenseMatrix::identity(EIG_RANGE_CAP + 1);
        assert!(matches!(
            sym_eig_range(&big),
            Err(Error::DimensionTooLarge {
                side: 201,
                cap: 200
            })
        ));
    }

    #[test]
    fn eigenvectors_reconstruct() {
        let a = DenseMatrix::from_fn(6, 6, |i, j| 0.5f64.powi((i as i32 - j as i32).abs()));
        let eig = sym_eigen(&a).unwrap();
        for k in 0..6 {
            let v = eig.vectors.col(k);
            let av = a.matvec(v);
            for i in 0..6 {
                assert!((av[i] - eig.values[k] * v[i]).abs() < 1e-12);
            }
        }
    }
}
