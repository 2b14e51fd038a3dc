use serde::{Deserialize, Serialize};

/// A `d`-dimensional parameter stored by its support.
///
/// `support` is strictly increasing and `values[i]` belongs to
/// `support[i]`. Coordinates off the support are exactly zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseParam {
    dim: usize,
    support: Vec<usize>,
    values: Vec<f64>,
}

impl SparseParam {
    /// Builds from (index, value) pairs; panics on an out-of-range or
    /// repeated index.
    pub fn new(dim: usize, mut entries: Vec<(usize, f64)>) -> Self {
        entries.sort_by_key(|e| e.0);
        for w in entries.windows(2) {
            assert!(w[0].0 != w[1].0, "repeated support index {}", w[0].0);
        }
        if let Some(last) = entries.last() {
            assert!(last.0 < dim, "support index {} out of range {dim}", last.0);
        }
        let (support, values) = entries.into_iter().unzip();
        Self {
            dim,
            support,
            values,
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(dim, Vec::new())
    }

    /// Keeps the nonzero coordinates of a dense vector.
    pub fn from_dense(x: &[f64]) -> Self {
        let entries = x
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(j, v)| (j, *v))
            .collect();
        Self::new(x.len(), entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of stored coordinates whose value is nonzero.
    pub fn l0(&self) -> usize {
        self.values.iter().filter(|v| **v != 0.0).count()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.dim];
        for (&j, &v) in self.support.iter().zip(&self.values) {
            x[j] = v;
        }
        x
    }

    /// `x' theta` touching only the support.
    pub fn dot_dense(&self, x: &[f64]) -> f64 {
        self.support
            .iter()
            .zip(&self.values)
            .map(|(&j, &v)| x[j] * v)
            .sum()
    }

    pub fn norm2(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.support.binary_search(&j).is_ok()
    }
}

/// False positives and false negatives of an estimate's support against the
/// true support.
pub fn support_errors(estimate: &[f64], truth: &SparseParam) -> (u32, u32) {
    let mut fp = 0u32;
    let mut hits = 0u32;
    for (j, &v) in estimate.iter().enumerate() {
        if v != 0.0 {
            if truth.contains(j) {
                hits += 1;
            } else {
                fp += 1;
            }
        }
    }
    let fneg = truth.l0() as u32 - hits.min(truth.l0() as u32);
    (fp, fneg)
}
