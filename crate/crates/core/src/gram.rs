use crate::linalg::{axpy, DenseMatrix};

/// Running sufficient statistics of a growing design: `diag(X'X)`, `X'y`,
/// `y'y`, plus the columns of `X'X` that have been asked for.
///
/// Coordinate descent only touches Gram columns of coordinates that become
/// nonzero, so a column is built from the stored rows the first time it is
/// requested and updated with every later row. Building late adds the same
/// products in the same order as tracking from the start, so the result does
/// not depend on when a column was first requested.
#[derive(Debug, Clone)]
pub struct GramStats {
    d: usize,
    rows: usize,
    /// Row-major copy of every observed covariate.
    xs: Vec<f64>,
    diag: Vec<f64>,
    xty: Vec<f64>,
    yty: f64,
    cols: Vec<Vec<f64>>,
    tracked: Vec<usize>,
}

impl GramStats {
    pub fn new(d: usize) -> Self {
        Self {
            d,
            rows: 0,
            xs: Vec::new(),
            diag: vec![0.0; d],
            xty: vec![0.0; d],
            yty: 0.0,
            cols: vec![Vec::new(); d],
            tracked: Vec::new(),
        }
    }

    pub fn from_design(x: &DenseMatrix, y: &[f64]) -> Self {
        assert_eq!(x.rows(), y.len(), "design/response length");
        let mut s = Self::new(x.cols());
        for (i, &yi) in y.iter().enumerate() {
            s.add_row(&x.row(i), yi);
        }
        s
    }

    /// Appends one observation `(x, y)`.
    pub fn add_row(&mut self, x: &[f64], y: f64) {
        assert_eq!(x.len(), self.d, "row length");
        self.xs.extend_from_slice(x);
        for (g, &v) in self.diag.iter_mut().zip(x) {
            *g += v * v;
        }
        axpy(y, x, &mut self.xty);
        self.yty += y * y;
        for &j in &self.tracked {
            let xj = x[j];
            if xj != 0.0 {
                axpy(xj, x, &mut self.cols[j]);
            }
        }
        self.rows += 1;
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of Gram columns currently maintained.
    pub fn tracked_columns(&self) -> usize {
        self.tracked.len()
    }

    #[inline]
    pub fn diag(&self, j: usize) -> f64 {
        self.diag[j]
    }

    #[inline]
    pub fn xty(&self) -> &[f64] {
        &self.xty
    }

    #[inline]
    pub fn yty(&self) -> f64 {
        self.yty
    }

    /// Column `j` of `X'X`, built on first use.
    pub fn col(&mut self, j: usize) -> &[f64] {
        if self.cols[j].is_empty() && self.d > 0 {
            let mut c = vec![0.0; self.d];
            for row in self.xs.chunks_exact(self.d) {
                let xj = row[j];
                if xj != 0.0 {
                    axpy(xj, row, &mut c);
                }
            }
            self.cols[j] = c;
            self.tracked.push(j);
        }
        &self.cols[j]
    }

    /// Stops maintaining the columns for which `keep` is false. They are
    /// rebuilt from the stored rows if requested again.
    pub fn retain_columns(&mut self, keep: impl Fn(usize) -> bool) {
        let cols = &mut self.cols;
        self.tracked.retain(|&j| {
            let k = keep(j);
            if !k {
                cols[j] = Vec::new();
            }
            k
        });
    }

    /// `X'X beta`, touching only the nonzero coordinates of `beta`.
    pub fn gram_times(&mut self, beta: &[f64]) -> Vec<f64> {
        assert_eq!(beta.len(), self.d, "coefficient length");
        let mut out = vec![0.0; self.d];
        for (j, &b) in beta.iter().enumerate() {
            if b != 0.0 {
                axpy(b, self.col(j), &mut out);
            }
        }
        out
    }

    /// Principal submatrix of `X'X` on `idx`.
    pub fn principal(&mut self, idx: &[usize]) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(idx.len(), idx.len());
        for (b, &j) in idx.iter().enumerate() {
            let col = self.col(j).to_vec();
            for (a, &i) in idx.iter().enumerate() {
                m.set(a, b, col[i]);
            }
        }
        m
    }

    /// The full `X'X`.
    pub fn to_dense(&mut self) -> DenseMatrix {
        let all: Vec<usize> = (0..self.d).collect();
        self.principal(&all)
    }

    /// `||y - X beta||^2` from the statistics.
    pub fn rss(&mut self, beta: &[f64]) -> f64 {
        let gb = self.gram_times(beta);
        let quad: f64 = beta.iter().zip(&gb).map(|(b, g)| b * g).sum();
        let cross: f64 = beta.iter().zip(&self.xty).map(|(b, c)| b * c).sum();
        (self.yty - 2.0 * cross + quad).max(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn incremental_matches_batch() {
        let x = DenseMatrix::from_fn(7, 3, |i, j| (i as f64 - 3.0) * (j as f64 + 0.5));
        let y: Vec<f64> = (0..7).map(|i| i as f64 * 0.25 - 1.0).collect();
        let mut stats = GramStats::from_design(&x, &y);
        assert_eq!(stats.rows(), 7);
        let batch = x.gram();
        for (a, b) in stats.to_dense().data().iter().zip(batch.data()) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in stats.xty().iter().zip(&x.t_matvec(&y)) {
            assert!((a - b).abs() < 1e-12);
        }
        let beta = [0.1, -0.2, 0.3];
        let r: Vec<f64> = x.matvec(&beta).iter().zip(&y).map(|(p, q)| q - p).collect();
        let rss: f64 = r.iter().map(|v| v * v).sum();
        assert!((stats.rss(&beta) - rss).abs() < 1e-10);
    }

    #[test]
    fn late_column_equals_tracked_column() {
        let x = DenseMatrix::from_fn(9, 4, |i, j| ((i * 7 + j * 3) % 5) as f64 * 0.37 - 0.8);
        let mut early = GramStats::new(4);
        early.col(2);
        let mut late = GramStats::new(4);
        for i in 0..9 {
            early.add_row(&x.row(i), 0.0);
            late.add_row(&x.row(i), 0.0);
        }
        assert_eq!(early.col(2).to_vec(), late.col(2).to_vec());
        assert_eq!(early.diag(2), late.col(2)[2]);
        early.retain_columns(|_| false);
        assert_eq!(early.tracked_columns(), 0);
        assert_eq!(early.col(2).to_vec(), late.col(2).to_vec());
    }
}
