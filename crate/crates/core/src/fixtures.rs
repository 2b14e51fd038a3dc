//! Constructions used as test fixtures and diagnostics: sparse packing sets,
//! the radial prior, sampled restricted-eigenvalue constants and empirical
//! margin curves.

use std::f64::consts::PI;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{sym_eig_range, DenseMatrix};
use crate::param::SparseParam;
use crate::rng::{CovariateModel, CovariateSampler, RngStream};

/// `((s - 1) / 2) ln((d - s) / ((s - 1) / 2))`, defined for
/// `3 <= s <= (d + 2) / 3`.
pub fn l_ds(d: usize, s: usize) -> Result<f64> {
    if s < 3 || 3 * s > d + 2 {
        return Err(Error::OutOfRegime { d, s });
    }
    let h = (s as f64 - 1.0) / 2.0;
    Ok(h * ((d - s) as f64 / h).ln())
}

/// Family of `s`-sparse vectors with a common norm and controlled pairwise
/// distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackingSet {
    pub vectors: Vec<Vec<f64>>,
    pub d: usize,
    pub s: usize,
    pub r: f64,
    pub delta: f64,
}

impl PackingSet {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Exhaustive check of every vector and every pair:
    /// `||a||_0 = s`, `||a||^2 = r^2 + 2 delta^2`,
    /// `delta^2 <= ||a_i - a_j||^2 <= 8 delta^2`, and `ln M >= L_{d,s}`.
    /// Norm comparisons allow a relative slack of `1e-12`.
    pub fn verify(&self) -> std::result::Result<(), String> {
        let tol = 1e-12;
        let d2 = self.delta * self.delta;
        let norm_target = self.r * self.r + 2.0 * d2;
        for (i, v) in self.vectors.iter().enumerate() {
            if v.len() != self.d {
                return Err(format!("vector {i} has length {}", v.len()));
            }
            let l0 = v.iter().filter(|x| **x != 0.0).count();
            if l0 != self.s {
                return Err(format!("vector {i} has {l0} nonzeros, expected {}", self.s));
            }
            let nrm: f64 = v.iter().map(|x| x * x).sum();
            if (nrm - norm_target).abs() > tol * norm_target {
                return Err(format!(
                    "vector {i} has squared norm {nrm}, expected {norm_target}"
                ));
            }
        }
        for i in 0..self.vectors.len() {
            for j in i + 1..self.vectors.len() {
                let dist: f64 = self.vectors[i]
                    .iter()
                    .zip(&self.vectors[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                if dist < d2 * (1.0 - tol) || dist > 8.0 * d2 * (1.0 + tol) {
                    return Err(format!("pair ({i}, {j}) at squared distance {dist}"));
                }
            }
        }
        let bound = l_ds(self.d, self.s).map_err(|e| e.to_string())?;
        let log_m = (self.vectors.len() as f64).ln();
        if log_m < bound {
            return Err(format!("ln M = {log_m} below {bound}"));
        }
        Ok(())
    }
}

/// `ceil(exp(L_{d,s}))`, the smallest size meeting the cardinality bound.
pub fn packing_target(d: usize, s: usize) -> Result<usize> {
    Ok(l_ds(d, s)?.exp().ceil() as usize)
}

/// Packing set of the minimal size `ceil(exp(L_{d,s}))`.
pub fn build_packing_set(
    d: usize,
    s: usize,
    r: f64,
    delta: f64,
    stream: &mut RngStream,
    max_attempts: usize,
) -> Result<PackingSet> {
    let target = packing_target(d, s)?;
    build_packing_set_sized(d, s, r, delta, target, stream, max_attempts)
}

/// Randomized greedy packing of `target` vectors
/// `(r, sqrt(2 / (s - 1)) delta p)` with `p` in `{-1, 0, 1}^(d-1)`, `s - 1`
/// nonzeros, and pairwise Hamming distance at least `(s - 1) / 2` between
/// patterns. The result is verified before it is returned.
pub fn build_packing_set_sized(
    d: usize,
    s: usize,
    r: f64,
    delta: f64,
    target: usize,
    stream: &mut RngStream,
    max_attempts: usize,
) -> Result<PackingSet> {
    l_ds(d, s)?;
    if !(r > 0.0) || !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need r > 0 and delta > 0, got r = {r}, delta = {delta}"
        )));
    }
    let k = s - 1;
    // patterns as sorted (index, sign) lists over coordinates 1..d
    let mut accepted: Vec<Vec<(usize, i8)>> = Vec::with_capacity(target);
    let mut attempts = 0;
    while accepted.len() < target {
        if attempts == max_attempts {
            return Err(Error::PackingFailed {
                built: accepted.len(),
                target,
                attempts,
            });
        }
        attempts += 1;
        let mut idx = index::sample(stream, d - 1, k).into_vec();
        idx.sort_unstable();
        let cand: Vec<(usize, i8)> = idx
            .into_iter()
            .map(|j| (j + 1, if stream.gen::<bool>() { 1 } else { -1 }))
            .collect();
        if accepted.iter().all(|p| 2 * hamming(p, &cand) >= k) {
            accepted.push(cand);
        }
    }
    let scale = (2.0 / k as f64).sqrt() * delta;
    let vectors = accepted
        .iter()
        .map(|p| {
            let mut v = vec![0.0; d];
            v[0] = r;
            for &(j, sg) in p {
                v[j] = scale * f64::from(sg);
            }
            v
        })
        .collect();
    let set = PackingSet {
        vectors,
        d,
        s,
        r,
        delta,
    };
    if let Err(msg) = set.verify() {
        panic!("packing construction produced an invalid set: {msg}");
    }
    Ok(set)
}

/// Hamming distance between two sparse ternary patterns.
fn hamming(a: &[(usize, i8)], b: &[(usize, i8)]) -> usize {
    let (mut i, mut j, mut h) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => {
                h += 1;
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                h += 1;
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                h += usize::from(a[i].1 != b[j].1);
                i += 1;
                j += 1;
            }
        }
    }
    h + (a.len() - i) + (b.len() - j)
}

/// A uniformly chosen member of a packing set.
pub fn sample_omega2(set: &PackingSet, stream: &mut RngStream) -> SparseParam {
    assert!(!set.is_empty(), "empty packing set");
    let i = stream.gen_range(0..set.len());
    SparseParam::from_dense(&set.vectors[i])
}

/// Radial density `(4 / r) sin^2(2 pi tau / r)` on `[r/2, r]`.
pub fn radial_density(tau: f64, r: f64) -> f64 {
    if tau < r / 2.0 || tau > r {
        0.0
    } else {
        4.0 / r * (2.0 * PI * tau / r).sin().powi(2)
    }
}

/// Radius drawn from [`radial_density`] by rejection against the uniform
/// envelope of height `4 / r`.
pub fn sample_radius(r: f64, stream: &mut RngStream) -> f64 {
    loop {
        let tau = r / 2.0 + r / 2.0 * stream.uniform();
        let accept = (2.0 * PI * tau / r).sin().powi(2);
        if stream.uniform() < accept {
            return tau;
        }
    }
}

/// Draw from the radial prior: the first `s` coordinates are `R U` with `U`
/// uniform on the unit sphere and `R` from [`radial_density`]; the rest are
/// zero.
pub fn sample_omega1(d: usize, s: usize, r: f64, stream: &mut RngStream) -> Result<SparseParam> {
    if s < 2 || s > d || !(r > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need 2 <= s <= d and r > 0, got s = {s}, d = {d}, r = {r}"
        )));
    }
    let u = loop {
        let g: Vec<f64> = (0..s).map(|_| stream.standard_normal()).collect();
        let nrm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nrm > 0.0 {
            break g.into_iter().map(|x| x / nrm).collect::<Vec<_>>();
        }
    };
    let radius = sample_radius(r, stream);
    Ok(SparseParam::new(
        d,
        u.into_iter()
            .enumerate()
            .map(|(j, x)| (j, radius * x))
            .collect(),
    ))
}

/// `||X v||^2 / (n ||v||^2)`.
pub fn re_ratio(x: &DenseMatrix, n: usize, v: &[f64]) -> f64 {
    let xv = x.matvec(v);
    let num: f64 = xv.iter().map(|a| a * a).sum();
    let den: f64 = v.iter().map(|a| a * a).sum();
    num / (n as f64 * den)
}

/// Random direction in the cone `{v : ||v_{J^c}||_1 <= kappa ||v_J||_1}`
/// for a random `s`-subset `J`.
pub fn sample_cone_direction(d: usize, s: usize, kappa: f64, stream: &mut RngStream) -> Vec<f64> {
    let j_set = index::sample(stream, d, s).into_vec();
    let mut in_j = vec![false; d];
    let mut v = vec![0.0; d];
    for &j in &j_set {
        in_j[j] = true;
        v[j] = stream.standard_normal();
    }
    let l1_j: f64 = j_set.iter().map(|&j| v[j].abs()).sum();
    let mut rest: Vec<f64> = (0..d)
        .map(|j| {
            if in_j[j] {
                0.0
            } else {
                stream.standard_normal()
            }
        })
        .collect();
    let l1_rest: f64 = rest.iter().map(|a| a.abs()).sum();
    if l1_rest > 0.0 {
        let scale = stream.uniform() * kappa * l1_j / l1_rest;
        for (vj, rj) in v.iter_mut().zip(rest.iter_mut()) {
            if *rj != 0.0 {
                *vj = *rj * scale;
            }
        }
    }
    v
}

/// Smallest ratio over the given directions.
pub fn re_constant_with_directions(x: &DenseMatrix, n: usize, dirs: &[Vec<f64>]) -> f64 {
    dirs.iter()
        .map(|v| re_ratio(x, n, v))
        .fold(f64::INFINITY, f64::min)
}

/// Smallest ratio over `n_dirs` sampled cone directions.
///
/// This over-estimates the restricted-eigenvalue constant (it is a minimum
/// over a sample, not over the cone) and is a diagnostic, not a certificate.
pub fn re_constant_sampled(
    x: &DenseMatrix,
    n: usize,
    s: usize,
    kappa: f64,
    n_dirs: usize,
    stream: &mut RngStream,
) -> Result<f64> {
    let d = x.cols();
    if n_dirs == 0 || s == 0 || s > d || !(kappa >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need n_dirs >= 1, 1 <= s <= {d}, kappa >= 0"
        )));
    }
    let dirs: Vec<Vec<f64>> = (0..n_dirs)
        .map(|_| sample_cone_direction(d, s, kappa, stream))
        .collect();
    Ok(re_constant_with_directions(x, n, &dirs))
}

/// Exact constant for the full cone: the smallest eigenvalue of `X'X / n`.
pub fn re_constant_full(x: &DenseMatrix, n: usize) -> Result<f64> {
    Ok(sym_eig_range(&x.gram().scaled(1.0 / n as f64))?.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginCurve {
    pub taus: Vec<f64>,
    pub empirical_probs: Vec<f64>,
    pub n_samples: usize,
}

/// Monte Carlo estimate of `P(|u'X| <= tau)` on a grid, all grid points
/// sharing one sample.
pub fn margin_curve(
    cov: &CovariateModel,
    u: &[f64],
    taus: &[f64],
    n_samples: usize,
    stream: &mut RngStream,
) -> Result<MarginCurve> {
    if u.len() != cov.d || u.iter().all(|v| *v == 0.0) {
        return Err(Error::InvalidArgument(
            "direction must be nonzero of length d".into(),
        ));
    }
    if taus.is_empty() || taus[0] <= 0.0 || taus.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "taus must be positive and ascending".into(),
        ));
    }
    if n_samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let mut sampler = CovariateSampler::new(cov)?;
    let mut x = vec![0.0; cov.d];
    let mut counts = vec![0usize; taus.len()];
    for _ in 0..n_samples {
        sampler.sample_into(stream, &mut x);
        let m = crate::linalg::dot(u, &x).abs();
        let first = taus.partition_point(|&t| t < m);
        for c in &mut counts[first..] {
            *c += 1;
        }
    }
    Ok(MarginCurve {
        taus: taus.to_vec(),
        empirical_probs: counts
            .iter()
            .map(|&c| c as f64 / n_samples as f64)
            .collect(),
        n_samples,
    })
}
