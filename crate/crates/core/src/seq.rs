//! Sequential estimation of a fixed sparse parameter from a growing i.i.d.
//! sample, refitting at every round.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gram::GramStats;
use crate::lasso::{
    lasso_fit_gram, seq_lambda, LassoFit, LassoOptions, ScheduleVariant, SeqLambdaSchedule,
};
use crate::linalg::Cholesky;
use crate::opt_lasso::{opt_from_lasso_gram, refit_gram, seq_lambda_opt};
use crate::param::{support_errors, SparseParam};
use crate::rng::{
    sample_sparse_uniform_param, tags, CovariateKind, CovariateModel, CovariateSampler, RngStream,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Lasso,
    OptLasso,
    /// Least squares on the true support.
    OracleLs,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeqMethod {
    pub estimator: Estimator,
    #[serde(default)]
    pub c0: f64,
    #[serde(default)]
    pub c0_hard: f64,
}

impl SeqMethod {
    pub fn lasso(c0: f64) -> Self {
        Self {
            estimator: Estimator::Lasso,
            c0,
            c0_hard: 0.0,
        }
    }

    pub fn opt(c0: f64, c0_hard: f64) -> Self {
        Self {
            estimator: Estimator::OptLasso,
            c0,
            c0_hard,
        }
    }

    pub fn oracle() -> Self {
        Self {
            estimator: Estimator::OracleLs,
            c0: 0.0,
            c0_hard: 0.0,
        }
    }

    /// Short label used in tables, e.g. `opt(0.8,0.6)` or `lasso(1)`.
    pub fn label(&self) -> String {
        match self.estimator {
            Estimator::Lasso => format!("lasso({})", self.c0),
            Estimator::OptLasso => format!("opt({},{})", self.c0, self.c0_hard),
            Estimator::OracleLs => "oracle_ls".to_string(),
        }
    }
}

fn default_sigma() -> f64 {
    1.0
}

fn default_every() -> usize {
    1
}

fn default_hi() -> f64 {
    1.0
}

fn default_schedule() -> ScheduleVariant {
    ScheduleVariant::SimSeq
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequentialScenario {
    pub label: String,
    pub s0: usize,
    pub d: usize,
    pub horizon: usize,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default)]
    pub cov: CovariateKind,
    #[serde(default = "default_schedule")]
    pub schedule: ScheduleVariant,
    pub methods: Vec<SeqMethod>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap_xi: Option<f64>,
    /// Inclusive round window for the cumulative error; `(max(T/10, 1), T)`
    /// when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_window: Option<(usize, usize)>,
    #[serde(default = "default_every")]
    pub refit_every: usize,
    /// Range of the supported parameter values.
    #[serde(default)]
    pub theta_lo: f64,
    #[serde(default = "default_hi")]
    pub theta_hi: f64,
}

impl SequentialScenario {
    pub fn new(label: &str, s0: usize, d: usize, horizon: usize, methods: Vec<SeqMethod>) -> Self {
        Self {
            label: label.to_string(),
            s0,
            d,
            horizon,
            sigma: 1.0,
            cov: CovariateKind::GaussianIdentity,
            schedule: ScheduleVariant::SimSeq,
            methods,
            cap_xi: None,
            error_window: None,
            refit_every: 1,
            theta_lo: 0.0,
            theta_hi: 1.0,
        }
    }

    pub fn covariate_model(&self) -> CovariateModel {
        CovariateModel {
            kind: self.cov.clone(),
            d: self.d,
        }
    }

    pub fn window(&self) -> (usize, usize) {
        self.error_window
            .unwrap_or(((self.horizon / 10).max(1), self.horizon))
    }

    pub fn validate(&self) -> Result<()> {
        if self.s0 == 0 || self.s0 > self.d {
            return Err(Error::config("s0", format!("must lie in 1..={}", self.d)));
        }
        if self.horizon < 2 {
            return Err(Error::config("horizon", "must be at least 2"));
        }
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::config("sigma", "must be finite and nonnegative"));
        }
        self.covariate_model().validate()?;
        if self.methods.is_empty() {
            return Err(Error::config("methods", "at least one method is required"));
        }
        for m in &self.methods {
            if m.estimator != Estimator::OracleLs && !(m.c0 > 0.0) {
                return Err(Error::config("methods.c0", "must be positive"));
            }
            if m.estimator == Estimator::OptLasso && !(m.c0_hard >= 0.0) {
                return Err(Error::config("methods.c0_hard", "must be nonnegative"));
            }
        }
        let (lo, hi) = self.window();
        if lo == 0 || lo > hi || hi > self.horizon {
            return Err(Error::config(
                "error_window",
                format!("({lo}, {hi}) is not inside [1, {}]", self.horizon),
            ));
        }
        if let Some(xi) = self.cap_xi {
            if !(xi >= 0.0) {
                return Err(Error::config("cap_xi", "must be nonnegative"));
            }
        }
        if self.refit_every == 0 {
            return Err(Error::config("refit_every", "must be at least 1"));
        }
        if !(self.theta_lo < self.theta_hi) {
            return Err(Error::config("theta_lo", "must be below theta_hi"));
        }
        Ok(())
    }

    fn schedule_for(&self, c0: f64) -> SeqLambdaSchedule {
        SeqLambdaSchedule {
            variant: self.schedule,
            c0,
            sigma: self.sigma,
            d: self.d,
        }
    }
}

/// Per-round trace of one method in one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeqRunRecord {
    pub method: SeqMethod,
    pub squared_error: Vec<f64>,
    pub fp: Vec<u32>,
    pub fn_: Vec<u32>,
    pub theta_true: SparseParam,
    /// Refits whose Lasso stage ran out of sweeps.
    pub unconverged_fits: usize,
}

impl SeqRunRecord {
    pub fn horizon(&self) -> usize {
        self.squared_error.len()
    }
}

/// Rounds `every, 2 every, ...` up to `horizon`.
pub fn refit_cadence_plan(horizon: usize, every: usize) -> Vec<usize> {
    assert!(every >= 1, "cadence must be positive");
    (1..=horizon / every).map(|m| m * every).collect()
}

/// `sum_{t=from..=to} min(err_t, cap)` with rounds counted from 1.
pub fn cumulative_error(rec: &SeqRunRecord, window: (usize, usize), cap: Option<f64>) -> f64 {
    cumulative_capped(&rec.squared_error, window, cap)
}

pub(crate) fn cumulative_capped(errors: &[f64], window: (usize, usize), cap: Option<f64>) -> f64 {
    let (lo, hi) = window;
    assert!(
        lo >= 1 && lo <= hi && hi <= errors.len(),
        "window ({lo}, {hi}) out of range"
    );
    let cap = cap.unwrap_or(f64::INFINITY);
    errors[lo - 1..hi].iter().map(|e| e.min(cap)).sum()
}

/// One replication of a single method.
///
/// Uses the same random draws as [`run_sequential_methods`], so the record
/// equals that method's entry there.
pub fn run_sequential_replication(
    sc: &SequentialScenario,
    method: SeqMethod,
    stream: &RngStream,
) -> Result<SeqRunRecord> {
    let mut single = sc.clone();
    single.methods = vec![method];
    Ok(run_sequential_methods(&single, stream)?.remove(0))
}

/// One replication of every method in the scenario on shared data.
///
/// The parameter, covariates and noise come from separate substreams of
/// `stream`. Lasso fits are shared between methods with the same `c0` and
/// warm-started from the previous refit.
pub fn run_sequential_methods(
    sc: &SequentialScenario,
    stream: &RngStream,
) -> Result<Vec<SeqRunRecord>> {
    sc.validate()?;
    let d = sc.d;
    let horizon = sc.horizon;
    let mut params = stream.split(tags::PARAMS);
    let mut cov_stream = stream.split(tags::COVARIATES);
    let mut noise = stream.split(tags::NOISE);
    let theta = sample_sparse_uniform_param(&mut params, d, sc.s0, sc.theta_lo, sc.theta_hi)?;
    let truth = theta.to_dense();
    let mut sampler = CovariateSampler::new(&sc.covariate_model())?;

    // Lasso path per distinct c0, keyed by its bit pattern for exact sharing.
    let mut paths: BTreeMap<u64, (f64, Vec<f64>)> = BTreeMap::new();
    for m in &sc.methods {
        if m.estimator != Estimator::OracleLs {
            paths.entry(m.c0.to_bits()).or_insert((m.c0, vec![0.0; d]));
        }
    }

    let nm = sc.methods.len();
    let mut records: Vec<SeqRunRecord> = sc
        .methods
        .iter()
        .map(|&method| SeqRunRecord {
            method,
            squared_error: Vec::with_capacity(horizon),
            fp: Vec::with_capacity(horizon),
            fn_: Vec::with_capacity(horizon),
            theta_true: theta.clone(),
            unconverged_fits: 0,
        })
        .collect();
    let mut estimates: Vec<Vec<f64>> = vec![vec![0.0; d]; nm];

    let mut stats = GramStats::new(d);
    let mut x = vec![0.0; d];
    let mut lasso_fits: BTreeMap<u64, LassoFit> = BTreeMap::new();
    for t in 1..=horizon {
        sampler.sample_into(&mut cov_stream, &mut x);
        let y = theta.dot_dense(&x) + sc.sigma * noise.standard_normal();
        stats.add_row(&x, y);

        if t.is_power_of_two() {
            // columns of long-dead coordinates cost O(d) per row to keep
            let live = |j: usize| theta.contains(j) || paths.values().any(|(_, w)| w[j] != 0.0);
            stats.retain_columns(live);
        }
        if t % sc.refit_every == 0 {
            lasso_fits.clear();
            for (key, (c0, warm)) in paths.iter_mut() {
                let lambda = seq_lambda(&sc.schedule_for(*c0), t);
                let fit = lasso_fit_gram(&mut stats, lambda, t, &LassoOptions::warm(warm.clone()))?;
                warm.clone_from(&fit.coef);
                lasso_fits.insert(*key, fit);
            }
            for (i, m) in sc.methods.iter().enumerate() {
                match m.estimator {
                    Estimator::Lasso => {
                        let fit = &lasso_fits[&m.c0.to_bits()];
                        estimates[i].clone_from(&fit.coef);
                        records[i].unconverged_fits += usize::from(!fit.converged);
                    }
                    Estimator::OptLasso => {
                        let fit = &lasso_fits[&m.c0.to_bits()];
                        records[i].unconverged_fits += usize::from(!fit.converged);
                        let lam_opt = seq_lambda_opt(&sc.schedule_for(m.c0), m.c0_hard, t);
                        estimates[i] =
                            opt_from_lasso_gram(&mut stats, fit.clone(), lam_opt, t)?.coef;
                    }
                    Estimator::OracleLs => {
                        estimates[i] = oracle_estimate(&mut stats, &theta)?;
                    }
                }
            }
        }

        for (rec, est) in records.iter_mut().zip(&estimates) {
            let err: f64 = est.iter().zip(&truth).map(|(a, b)| (a - b) * (a - b)).sum();
            let (fp, fneg) = support_errors(est, &theta);
            rec.squared_error.push(err);
            rec.fp.push(fp);
            rec.fn_.push(fneg);
        }
    }
    Ok(records)
}

/// Least squares on the true support once its Gram block is invertible;
/// zero before that.
fn oracle_estimate(stats: &mut GramStats, theta: &SparseParam) -> Result<Vec<f64>> {
    let s = theta.support();
    let block = stats.principal(s);
    if Cholesky::factor(&block).is_err() {
        return Ok(vec![0.0; stats.dim()]);
    }
    refit_gram(stats, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::make_stream;

    #[test]
    fn cadence_examples() {
        assert_eq!(refit_cadence_plan(10, 1), (1..=10).collect::<Vec<_>>());
        assert_eq!(refit_cadence_plan(10, 4), vec![4, 8]);
        assert_eq!(refit_cadence_plan(50, 50), vec![50]);
    }

    fn record(errors: Vec<f64>) -> SeqRunRecord {
        let n = errors.len();
        SeqRunRecord {
            method: SeqMethod::oracle(),
            squared_error: errors,
            fp: vec![0; n],
            fn_: vec![0; n],
            theta_true: SparseParam::zero(3),
            unconverged_fits: 0,
        }
    }

    #[test]
    fn cumulative_error_examples() {
        assert_eq!(cumulative_error(&record(vec![0.0; 5]), (1, 5), None), 0.0);
        assert_eq!(
            cumulative_error(&record(vec![4.0, 1.0, 1.0]), (1, 3), Some(0.0)),
            0.0
        );
        assert_eq!(
            cumulative_error(&record(vec![4.0, 1.0, 1.0]), (1, 3), Some(2.0)),
            4.0
        );
        assert_eq!(
            cumulative_error(&record(vec![4.0, 1.0, 1.0]), (2, 2), None),
            1.0
        );
    }

    #[test]
    fn noiseless_oracle_is_exact() {
        let mut sc = SequentialScenario::new("t", 3, 12, 20, vec![SeqMethod::oracle()]);
        sc.sigma = 0.0;
        let rec = run_sequential_replication(&sc, SeqMethod::oracle(), &make_stream(5, 0)).unwrap();
        for t in sc.s0 + 1..=20 {
            assert!(
                rec.squared_error[t - 1] < 1e-20,
                "t={t}: {}",
                rec.squared_error[t - 1]
            );
            assert_eq!((rec.fp[t - 1], rec.fn_[t - 1]), (0, 0));
        }
    }

    #[test]
    fn fully_shrunk_lasso() {
        let m = SeqMethod::lasso(1e6);
        let sc = SequentialScenario::new("t", 4, 30, 40, vec![m]);
        let rec = run_sequential_replication(&sc, m, &make_stream(9, 3)).unwrap();
        let norm2 = rec.theta_true.norm2().powi(2);
        for t in 0..40 {
            assert!((rec.squared_error[t] - norm2).abs() < 1e-14);
            assert_eq!(rec.fp[t], 0);
            assert_eq!(rec.fn_[t], 4);
        }
    }

    #[test]
    fn shared_run_matches_single_runs() {
        let methods = vec![
            SeqMethod::opt(0.8, 0.6),
            SeqMethod::lasso(0.8),
            SeqMethod::oracle(),
        ];
        let sc = SequentialScenario::new("t", 3, 40, 120, methods.clone());
        let s = make_stream(11, 2);
        let all = run_sequential_methods(&sc, &s).unwrap();
        for (m, rec) in methods.iter().zip(&all) {
            let one = run_sequential_replication(&sc, *m, &s).unwrap();
            assert_eq!(&one, rec);
        }
    }

    #[test]
    fn records_cover_the_horizon() {
        let sc = SequentialScenario::new(
            "t",
            3,
            40,
            100,
            vec![SeqMethod::lasso(0.5), SeqMethod::opt(0.5, 0.4)],
        );
        for rec in run_sequential_methods(&sc, &make_stream(1, 0)).unwrap() {
            assert!(rec.squared_error.iter().all(|e| *e >= 0.0));
            assert_eq!(rec.horizon(), 100);
        }
    }

    #[test]
    fn window_default_and_validation() {
        let sc = SequentialScenario::new("t", 5, 100, 10_000, vec![SeqMethod::lasso(1.0)]);
        assert_eq!(sc.window(), (1000, 10_000));
        let mut bad = sc.clone();
        bad.error_window = Some((0, 10));
        assert!(matches!(bad.validate(), Err(Error::ConfigInvalid { .. })));
        let mut bad = sc;
        bad.s0 = 0;
        assert!(bad.validate().is_err());
    }
}
