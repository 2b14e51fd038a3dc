//! OPT-Lasso: threshold a Lasso fit, then refit least squares on the
//! surviving coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gram::GramStats;
use crate::lasso::{
    lasso_fit, lasso_fit_gram, LassoFit, LassoOptions, LassoProblem, ScheduleVariant,
    SeqLambdaSchedule,
};
use crate::linalg::{
    least_squares_min_norm, least_squares_min_norm_gram, sym_eig_range, DenseMatrix,
};
use crate::param::SparseParam;

/// Indices with `|beta_j| > lambda_opt`, ascending.
pub fn threshold_support(beta: &[f64], lambda_opt: f64) -> Vec<usize> {
    beta.iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > lambda_opt)
        .map(|(j, _)| j)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptLassoConfig {
    pub lambda: f64,
    pub lambda_opt: f64,
    pub normalizer: usize,
}

impl OptLassoConfig {
    fn validate(&self) -> Result<()> {
        if !(self.lambda_opt >= 0.0) || !self.lambda_opt.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "lambda_opt = {}",
                self.lambda_opt
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptLassoFit {
    pub coef: Vec<f64>,
    pub selected: Vec<usize>,
    pub lasso_stage: LassoFit,
    pub lambda_opt: f64,
    pub normalizer: usize,
}

impl OptLassoFit {
    pub fn converged(&self) -> bool {
        self.lasso_stage.converged
    }
}

fn scatter(d: usize, idx: &[usize], vals: &[f64]) -> Vec<f64> {
    let mut coef = vec![0.0; d];
    for (&j, &v) in idx.iter().zip(vals) {
        coef[j] = v;
    }
    coef
}

/// Lasso, threshold, least-squares refit on the design matrix.
///
/// A non-converged Lasso stage is not an error here: the refit runs on the
/// returned iterate and `lasso_stage.converged` carries the flag.
pub fn opt_lasso_fit(
    x: &DenseMatrix,
    y: &[f64],
    cfg: &OptLassoConfig,
    opts: &LassoOptions,
) -> Result<OptLassoFit> {
    cfg.validate()?;
    let p = LassoProblem::new(x, y, cfg.lambda, cfg.normalizer)?;
    let lasso_stage = lasso_fit(&p, opts)?;
    let selected = threshold_support(&lasso_stage.coef, cfg.lambda_opt);
    let refit = least_squares_min_norm(&x.select_columns(&selected), y)?;
    Ok(OptLassoFit {
        coef: scatter(x.cols(), &selected, &refit),
        selected,
        lasso_stage,
        lambda_opt: cfg.lambda_opt,
        normalizer: cfg.normalizer,
    })
}

/// Least-squares refit on `selected` from sufficient statistics.
pub fn refit_gram(stats: &mut GramStats, selected: &[usize]) -> Result<Vec<f64>> {
    let g = stats.principal(selected);
    let c: Vec<f64> = selected.iter().map(|&j| stats.xty()[j]).collect();
    let vals = least_squares_min_norm_gram(&g, &c)?;
    Ok(scatter(stats.dim(), selected, &vals))
}

/// [`opt_lasso_fit`] on running sufficient statistics.
pub fn opt_lasso_fit_gram(
    stats: &mut GramStats,
    cfg: &OptLassoConfig,
    opts: &LassoOptions,
) -> Result<OptLassoFit> {
    cfg.validate()?;
    let lasso_stage = lasso_fit_gram(stats, cfg.lambda, cfg.normalizer, opts)?;
    opt_from_lasso_gram(stats, lasso_stage, cfg.lambda_opt, cfg.normalizer)
}

/// Threshold-and-refit step applied to an existing Lasso fit.
pub fn opt_from_lasso_gram(
    stats: &mut GramStats,
    lasso_stage: LassoFit,
    lambda_opt: f64,
    normalizer: usize,
) -> Result<OptLassoFit> {
    let selected = threshold_support(&lasso_stage.coef, lambda_opt);
    let coef = refit_gram(stats, &selected)?;
    Ok(OptLassoFit {
        coef,
        selected,
        lasso_stage,
        lambda_opt,
        normalizer,
    })
}

/// Threshold level at round `t`.
///
/// The simulation variant uses `log(d t)` here even though its Lasso level
/// uses `log d`.
pub fn seq_lambda_opt(sched: &SeqLambdaSchedule, c0_hard: f64, t: usize) -> f64 {
    assert!(t >= 1, "rounds start at 1");
    let t_f = t as f64;
    let root = ((sched.d as f64 * t_f).ln() / t_f).sqrt();
    match sched.variant {
        ScheduleVariant::TheorySeq => c0_hard * sched.c0 * sched.sigma * root,
        ScheduleVariant::SimSeq => c0_hard * sched.c0 * root,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
}

/// Evaluates the deterministic OPT-Lasso error bound
/// `||theta_opt - theta||^2 <= (2b/a + 1) sum_{j in S} theta_j^2 1{|theta_j| <= 2 lambda_opt}
///                              + (2/a^2) ||X_S' eps / n||^2`.
///
/// The bound needs `||theta_lasso - theta||_inf <= lambda_opt` and the
/// eigenvalues of `X_S'X_S / n` inside `[a, b]`; when either fails on this
/// instance the result is `Unverifiable`.
pub fn deterministic_bound_check(
    theta: &SparseParam,
    fit: &OptLassoFit,
    x: &DenseMatrix,
    eps: &[f64],
    a: f64,
    b: f64,
) -> Result<BoundCheck> {
    if eps.len() != x.rows() || theta.dim() != x.cols() || fit.coef.len() != x.cols() {
        return Err(Error::DimensionMismatch("bound check inputs".into()));
    }
    if !(a > 0.0) || !(b >= a) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < a <= b, got a = {a}, b = {b}"
        )));
    }
    let truth = theta.to_dense();
    let lam_opt = fit.lambda_opt;
    let sup_err = fit
        .lasso_stage
        .coef
        .iter()
        .zip(&truth)
        .fold(0.0f64, |m, (u, v)| m.max((u - v).abs()));
    if sup_err > lam_opt {
        return Err(Error::Unverifiable(format!(
            "lasso sup-norm error {sup_err:e} exceeds threshold {lam_opt:e}"
        )));
    }
    let n = fit.normalizer as f64;
    let s = theta.support();
    let mut noise_term = 0.0;
    if !s.is_empty() {
        let gss = x.gram().principal(s).scaled(1.0 / n);
        let (lo, hi) = sym_eig_range(&gss)?;
        if lo < a || hi > b {
            return Err(Error::Unverifiable(format!(
                "restricted eigenvalues [{lo:e}, {hi:e}] outside [{a:e}, {b:e}]"
            )));
        }
        let xs = x.select_columns(s);
        noise_term = xs
            .t_matvec(eps)
            .iter()
            .map(|v| (v / n) * (v / n))
            .sum::<f64>();
    }
    let weak: f64 = theta
        .values()
        .iter()
        .filter(|v| v.abs() <= 2.0 * lam_opt)
        .map(|v| v * v)
        .sum();
    let rhs = (2.0 * b / a + 1.0) * weak + 2.0 / (a * a) * noise_term;
    let lhs: f64 = fit
        .coef
        .iter()
        .zip(&truth)
        .map(|(u, v)| (u - v) * (u - v))
        .sum();
    Ok(BoundCheck {
        holds: lhs <= rhs + 1e-12,
        lhs,
        rhs,
    })
}

/// Whether `{j : |theta_j| > 2 lambda_opt} ⊆ selected ⊆ support(theta)`.
pub fn support_contained(theta: &SparseParam, selected: &[usize], lambda_opt: f64) -> bool {
    let strong_in = theta
        .support()
        .iter()
        .zip(theta.values())
        .filter(|(_, v)| v.abs() > 2.0 * lambda_opt)
        .all(|(j, _)| selected.binary_search(j).is_ok());
    strong_in && selected.iter().all(|&j| theta.contains(j))
}

/// `sum_{t=1..T} a^2 1{|a| <= sqrt(b / t)}`.
pub fn instance_sum(a: f64, b: f64, horizon: usize) -> f64 {
    let hits = (1..=horizon)
        .filter(|&t| a.abs() <= (b / t as f64).sqrt())
        .count();
    a * a * hits as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lasso::LassoOptions;

    #[test]
    fn threshold_is_strict() {
        assert_eq!(threshold_support(&[0.1, -0.5, 0.3], 0.3), vec![1]);
        assert_eq!(threshold_support(&[0.0, 2.0, -1.0], 0.0), vec![1, 2]);
        assert!(threshold_support(&[0.1, -0.5], 0.5).is_empty());
    }

    #[test]
    fn threshold_schedule_arithmetic() {
        let s = SeqLambdaSchedule {
            variant: ScheduleVariant::SimSeq,
            c0: 0.8,
            sigma: 1.0,
            d: 1000,
        };
        assert!((seq_lambda_opt(&s, 0.6, 1000) - 0.056_418_912_011_443_19).abs() < 1e-12);
        let th = SeqLambdaSchedule {
            variant: ScheduleVariant::TheorySeq,
            ..s
        };
        assert_eq!(seq_lambda_opt(&th, 0.0, 10), 0.0);
        for t in [1usize, 7, 300] {
            let r = seq_lambda_opt(&th, 0.6, t) / crate::lasso::seq_lambda(&th, t);
            assert!((r - 0.6).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_response_gives_zero() {
        let x = DenseMatrix::from_fn(15, 4, |i, j| ((i * 7 + j) % 5) as f64 - 2.0);
        let y = vec![0.0; 15];
        let cfg = OptLassoConfig {
            lambda: 0.1,
            lambda_opt: 0.05,
            normalizer: 15,
        };
        let fit = opt_lasso_fit(&x, &y, &cfg, &LassoOptions::default()).unwrap();
        assert!(fit.coef.iter().all(|v| *v == 0.0));
        assert!(fit.selected.is_empty());
    }

    #[test]
    fn single_column_refit() {
        let x = DenseMatrix::from_fn(20, 3, |i, j| ((i * 3 + j * 5) % 11) as f64 / 5.0 - 1.0);
        let y: Vec<f64> = (0..20).map(|i| 3.0 * x.get(i, 1)).collect();
        let cfg = OptLassoConfig {
            lambda: 1e-3,
            lambda_opt: 0.5,
            normalizer: 20,
        };
        let fit = opt_lasso_fit(&x, &y, &cfg, &LassoOptions::default()).unwrap();
        assert_eq!(fit.selected, vec![1]);
        let col = x.col(1);
        let ols = crate::linalg::dot(col, &y) / crate::linalg::dot(col, col);
        assert!((fit.coef[1] - ols).abs() < 1e-9);
        assert_eq!(fit.coef[0], 0.0);
        assert_eq!(fit.coef[2], 0.0);

        let mut stats = GramStats::from_design(&x, &y);
        let g = opt_lasso_fit_gram(&mut stats, &cfg, &LassoOptions::default()).unwrap();
        assert_eq!(g.selected, fit.selected);
        assert!((g.coef[1] - ols).abs() < 1e-9);
    }

    #[test]
    fn empty_support_bound_is_trivial() {
        let x = DenseMatrix::from_fn(30, 4, |i, j| ((i + j * 3) % 4) as f64 - 1.5);
        let eps: Vec<f64> = (0..30)
            .map(|i| ((i * 13) % 7) as f64 / 10.0 - 0.3)
            .collect();
        let cfg = OptLassoConfig {
            lambda: 10.0,
            lambda_opt: 1.0,
            normalizer: 30,
        };
        let fit = opt_lasso_fit(&x, &eps, &cfg, &LassoOptions::default()).unwrap();
        let theta = SparseParam::zero(4);
        let chk = deterministic_bound_check(&theta, &fit, &x, &eps, 0.5, 2.0).unwrap();
        assert_eq!(chk.lhs, 0.0);
        assert!(chk.holds);
    }

    #[test]
    fn containment_helper() {
        let theta = SparseParam::new(6, vec![(0, 2.0), (3, 0.1)]);
        assert!(support_contained(&theta, &[0], 0.5));
        assert!(support_contained(&theta, &[0, 3], 0.5));
        assert!(!support_contained(&theta, &[3], 0.5));
        assert!(!support_contained(&theta, &[0, 1], 0.5));
    }

    #[test]
    fn instance_sum_examples() {
        // a^2 = 0.25 passes while t <= 4 b = 4
        assert_eq!(instance_sum(0.5, 1.0, 100), 1.0);
        assert_eq!(instance_sum(0.5, 1.0, 2), 0.5);
        assert_eq!(instance_sum(3.0, 1.0, 100), 0.0);
    }
}
