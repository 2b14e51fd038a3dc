//! Cyclic coordinate-descent Lasso.
//!
//! The objective is `(1 / (2 n)) ||y - X beta||^2 + lambda ||beta||_1` where
//! `n` is the normalizer, which may exceed the number of stored rows (the
//! bandit design zero-pads rounds where an arm was not pulled). There is no
//! intercept and no column standardisation.
//!
//! Two entry points share that objective: [`lasso_fit`] works on the design
//! matrix with an incrementally maintained residual, and [`lasso_fit_gram`]
//! works on running [`GramStats`] with an incrementally maintained `X'X beta`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gram::GramStats;
use crate::linalg::{axpy, dot, norm_inf, DenseMatrix};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITERS: usize = 10_000;

/// `sign(z) * max(|z| - tau, 0)`.
#[inline]
pub fn soft_threshold(z: f64, tau: f64) -> f64 {
    debug_assert!(tau >= 0.0);
    if z > tau {
        z - tau
    } else if z < -tau {
        z + tau
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LassoProblem<'a> {
    x: &'a DenseMatrix,
    y: &'a [f64],
    lambda: f64,
    normalizer: usize,
}

impl<'a> LassoProblem<'a> {
    pub fn new(x: &'a DenseMatrix, y: &'a [f64], lambda: f64, normalizer: usize) -> Result<Self> {
        if y.len() != x.rows() {
            return Err(Error::DimensionMismatch(format!(
                "response of length {} for {} rows",
                y.len(),
                x.rows()
            )));
        }
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!("lambda = {lambda}")));
        }
        if normalizer == 0 || normalizer < x.rows() {
            return Err(Error::InvalidArgument(format!(
                "normalizer {normalizer} below row count {}",
                x.rows()
            )));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("response"));
        }
        Ok(Self {
            x,
            y,
            lambda,
            normalizer,
        })
    }

    /// Problem with the normalizer equal to the row count.
    pub fn iid(x: &'a DenseMatrix, y: &'a [f64], lambda: f64) -> Result<Self> {
        Self::new(x, y, lambda, x.rows().max(1))
    }

    pub fn x(&self) -> &DenseMatrix {
        self.x
    }

    pub fn y(&self) -> &[f64] {
        self.y
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn normalizer(&self) -> usize {
        self.normalizer
    }

    pub fn objective(&self, beta: &[f64]) -> f64 {
        let xb = self.x.matvec(beta);
        let rss: f64 = xb.iter().zip(self.y).map(|(p, q)| (q - p) * (q - p)).sum();
        rss / (2.0 * self.normalizer as f64) + self.lambda * l1(beta)
    }
}

#[derive(Debug, Clone)]
pub struct LassoOptions {
    pub tol: f64,
    pub max_iters: usize,
    pub warm_start: Option<Vec<f64>>,
}

impl Default for LassoOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iters: DEFAULT_MAX_ITERS,
            warm_start: None,
        }
    }
}

impl LassoOptions {
    pub fn warm(beta: Vec<f64>) -> Self {
        Self {
            warm_start: Some(beta),
            ..Self::default()
        }
    }

    fn validate(&self, d: usize) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tol = {}", self.tol)));
        }
        if let Some(w) = &self.warm_start {
            if w.len() != d {
                return Err(Error::DimensionMismatch(format!(
                    "warm start of length {} for {d} coefficients",
                    w.len()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoFit {
    pub coef: Vec<f64>,
    pub support: Vec<usize>,
    pub kkt_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl LassoFit {
    fn from_coef(coef: Vec<f64>, kkt_residual: f64, iterations: usize, converged: bool) -> Self {
        let support = nonzero_support(&coef);
        Self {
            coef,
            support,
            kkt_residual,
            iterations,
            converged,
        }
    }

    /// `Err(NotConverged)` when the sweep budget ran out.
    pub fn ensure_converged(&self) -> Result<&Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged {
                iterations: self.iterations,
                kkt_residual: self.kkt_residual,
            })
        }
    }
}

pub(crate) fn nonzero_support(beta: &[f64]) -> Vec<usize> {
    beta.iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(j, _)| j)
        .collect()
}

fn l1(beta: &[f64]) -> f64 {
    beta.iter().map(|v| v.abs()).sum()
}

/// Stationarity violation of `beta` given the scaled gradient
/// `g = X'(X beta - y) / n`.
fn kkt_from_gradient(grad: &[f64], beta: &[f64], lambda: f64) -> f64 {
    grad.iter().zip(beta).fold(0.0f64, |worst, (&g, &b)| {
        let v = if b != 0.0 {
            (g + lambda * b.signum()).abs()
        } else {
            (g.abs() - lambda).max(0.0)
        };
        worst.max(v)
    })
}

/// Largest KKT violation of `beta`; zero exactly at a minimiser.
pub fn kkt_residual(p: &LassoProblem<'_>, beta: &[f64]) -> f64 {
    assert_eq!(beta.len(), p.x.cols(), "coefficient length");
    let xb = p.x.matvec(beta);
    let resid: Vec<f64> = xb.iter().zip(p.y).map(|(a, b)| a - b).collect();
    let n = p.normalizer as f64;
    let grad: Vec<f64> = (0..p.x.cols())
        .map(|j| dot(p.x.col(j), &resid) / n)
        .collect();
    kkt_from_gradient(&grad, beta, p.lambda)
}

/// Coordinate-descent Lasso on the design matrix.
///
/// Coordinates are visited in index order. A column that is identically zero
/// keeps a zero coefficient. The fit is `converged` when the largest
/// coordinate move in a sweep is at most `tol * (1 + ||beta||_inf)` and the
/// KKT residual is at most `10 * tol`; otherwise the last iterate is returned
/// with `converged = false`.
pub fn lasso_fit(p: &LassoProblem<'_>, opts: &LassoOptions) -> Result<LassoFit> {
    let x = p.x;
    let d = x.cols();
    opts.validate(d)?;
    let n = p.normalizer as f64;
    let thresh = n * p.lambda;
    let col_sq: Vec<f64> = (0..d).map(|j| dot(x.col(j), x.col(j))).collect();

    let mut beta = opts.warm_start.clone().unwrap_or_else(|| vec![0.0; d]);
    for (b, &s) in beta.iter_mut().zip(&col_sq) {
        if s == 0.0 {
            *b = 0.0;
        }
    }
    let mut resid = p.y.to_vec();
    for (j, &b) in beta.iter().enumerate() {
        if b != 0.0 {
            axpy(-b, x.col(j), &mut resid);
        }
    }

    let mut iterations = 0;
    let mut converged = false;
    let mut kkt = f64::INFINITY;
    #[cfg(debug_assertions)]
    let mut last_obj = p.objective(&beta);
    while iterations < opts.max_iters {
        let mut max_delta = 0.0f64;
        for j in 0..d {
            if col_sq[j] == 0.0 {
                continue;
            }
            let old = beta[j];
            let rho = dot(x.col(j), &resid) + col_sq[j] * old;
            let new = soft_threshold(rho, thresh) / col_sq[j];
            let delta = new - old;
            if delta != 0.0 {
                axpy(-delta, x.col(j), &mut resid);
                beta[j] = new;
                max_delta = max_delta.max(delta.abs());
            }
        }
        iterations += 1;
        #[cfg(debug_assertions)]
        {
            let obj = p.objective(&beta);
            debug_assert!(
                obj <= last_obj + 1e-12 * (1.0 + last_obj.abs()),
                "objective increased from {last_obj} to {obj}"
            );
            last_obj = obj;
        }
        if max_delta <= opts.tol * (1.0 + norm_inf(&beta)) {
            kkt = kkt_residual(p, &beta);
            if kkt <= 10.0 * opts.tol {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        kkt = kkt_residual(p, &beta);
    }
    Ok(LassoFit::from_coef(beta, kkt, iterations, converged))
}

/// Lasso objective evaluated from sufficient statistics.
pub fn objective_gram(stats: &mut GramStats, beta: &[f64], lambda: f64, normalizer: usize) -> f64 {
    stats.rss(beta) / (2.0 * normalizer as f64) + lambda * l1(beta)
}

/// KKT residual evaluated from sufficient statistics.
pub fn kkt_residual_gram(
    stats: &mut GramStats,
    beta: &[f64],
    lambda: f64,
    normalizer: usize,
) -> f64 {
    let gb = stats.gram_times(beta);
    let n = normalizer as f64;
    let grad: Vec<f64> = gb
        .iter()
        .zip(stats.xty())
        .map(|(q, c)| (q - c) / n)
        .collect();
    kkt_from_gradient(&grad, beta, lambda)
}

/// One coordinate step on sufficient statistics; returns `|delta|`.
#[inline]
fn gram_step(stats: &mut GramStats, j: usize, thresh: f64, beta: &mut [f64], q: &mut [f64]) -> f64 {
    let gjj = stats.diag(j);
    if gjj == 0.0 {
        return 0.0;
    }
    let old = beta[j];
    let rho = stats.xty()[j] - q[j] + gjj * old;
    let new = soft_threshold(rho, thresh) / gjj;
    let delta = new - old;
    if delta != 0.0 {
        axpy(delta, stats.col(j), q);
        beta[j] = new;
    }
    delta.abs()
}

/// Coordinate-descent Lasso on running sufficient statistics.
///
/// Same objective, stopping rule and zero-column convention as
/// [`lasso_fit`]. Between full sweeps it iterates on the current active set,
/// which is what keeps per-round refits cheap with warm starts. Takes the
/// statistics mutably because Gram columns are built on demand.
pub fn lasso_fit_gram(
    stats: &mut GramStats,
    lambda: f64,
    normalizer: usize,
    opts: &LassoOptions,
) -> Result<LassoFit> {
    let d = stats.dim();
    opts.validate(d)?;
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!("lambda = {lambda}")));
    }
    if normalizer == 0 || normalizer < stats.rows() {
        return Err(Error::InvalidArgument(format!(
            "normalizer {normalizer} below row count {}",
            stats.rows()
        )));
    }
    let thresh = normalizer as f64 * lambda;

    let mut beta = opts.warm_start.clone().unwrap_or_else(|| vec![0.0; d]);
    for (j, b) in beta.iter_mut().enumerate() {
        if stats.diag(j) == 0.0 {
            *b = 0.0;
        }
    }
    let mut q = stats.gram_times(&beta);

    let mut iterations = 0;
    let mut converged = false;
    let mut kkt = f64::INFINITY;
    let mut active: Vec<usize> = Vec::with_capacity(d);
    #[cfg(debug_assertions)]
    let mut last_obj = objective_gram(stats, &beta, lambda, normalizer);
    while iterations < opts.max_iters {
        let mut max_delta = 0.0f64;
        for j in 0..d {
            max_delta = max_delta.max(gram_step(stats, j, thresh, &mut beta, &mut q));
        }
        iterations += 1;
        #[cfg(debug_assertions)]
        {
            let obj = objective_gram(stats, &beta, lambda, normalizer);
            debug_assert!(
                obj <= last_obj + 1e-10 * (1.0 + last_obj.abs()),
                "objective increased from {last_obj} to {obj}"
            );
            last_obj = obj;
        }
        if max_delta <= opts.tol * (1.0 + norm_inf(&beta)) {
            kkt = kkt_residual_gram(stats, &beta, lambda, normalizer);
            if kkt <= 10.0 * opts.tol {
                converged = true;
                break;
            }
            // drift in q; rebuild before sweeping again
            q = stats.gram_times(&beta);
            continue;
        }
        active.clear();
        active.extend(
            beta.iter()
                .enumerate()
                .filter(|(_, b)| **b != 0.0)
                .map(|(j, _)| j),
        );
        while iterations < opts.max_iters {
            let mut inner = 0.0f64;
            for &j in &active {
                inner = inner.max(gram_step(stats, j, thresh, &mut beta, &mut q));
            }
            iterations += 1;
            if inner <= opts.tol * (1.0 + norm_inf(&beta)) {
                break;
            }
        }
    }
    if !converged {
        kkt = kkt_residual_gram(stats, &beta, lambda, normalizer);
    }
    Ok(LassoFit::from_coef(beta, kkt, iterations, converged))
}

/// Which regularisation schedule a sequential experiment uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleVariant {
    /// `lambda_t = C0 sigma sqrt(log(d t) / t)`.
    TheorySeq,
    /// `lambda_t = C0 sqrt(log(d) / t)`.
    SimSeq,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeqLambdaSchedule {
    pub variant: ScheduleVariant,
    pub c0: f64,
    pub sigma: f64,
    pub d: usize,
}

/// Regularisation level at round `t >= 1` (natural logarithms).
pub fn seq_lambda(sched: &SeqLambdaSchedule, t: usize) -> f64 {
    assert!(t >= 1, "rounds start at 1");
    let t_f = t as f64;
    let d = sched.d as f64;
    match sched.variant {
        ScheduleVariant::TheorySeq => sched.c0 * sched.sigma * ((d * t_f).ln() / t_f).sqrt(),
        ScheduleVariant::SimSeq => sched.c0 * (d.ln() / t_f).sqrt(),
    }
}
