//! Sparse linear contextual bandit: environment, regret accounting and the
//! staged greedy policies.
//!
//! Arms are indexed from 0 in this module.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gram::GramStats;
use crate::lasso::{lasso_fit_gram, LassoOptions};
use crate::linalg::dot;
use crate::opt_lasso::opt_from_lasso_gram;
use crate::param::{support_errors, SparseParam};
use crate::rng::{
    sample_sparse_uniform_param, tags, CovariateKind, CovariateModel, CovariateSampler, RngStream,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Random,
    ThreeStage,
    /// Stage 2 removed: `gamma2 := gamma1`.
    TwoStageOpt,
    /// Stage 3 removed: `gamma2 := T`.
    TwoStageLasso,
    /// Greedy on the true parameters.
    Oracle,
}

impl PolicyKind {
    pub fn label(&self) -> &'static str {
        match self {
            PolicyKind::Random => "random",
            PolicyKind::ThreeStage => "three_stage",
            PolicyKind::TwoStageOpt => "two_stage_opt",
            PolicyKind::TwoStageLasso => "two_stage_lasso",
            PolicyKind::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieRule {
    LowestIndex,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BanditLambdaVariant {
    /// `lambda = 6 m_X sigma sqrt(log(d T) / t)`, `lambda_opt = 28 L3 lambda`.
    TheoryBandit,
    /// `lambda = C0 p_hat sqrt(log(d) / t)`, `lambda_opt = C0h C0 sqrt(log(d t) / t)`.
    SimBandit,
}

fn default_sigma() -> f64 {
    1.0
}

fn default_cov() -> CovariateKind {
    CovariateKind::ClippedGaussian { bound: 1.0 }
}

fn default_variant() -> BanditLambdaVariant {
    BanditLambdaVariant::SimBandit
}

fn default_tie() -> TieRule {
    TieRule::LowestIndex
}

fn default_mx() -> f64 {
    1.0
}

fn default_l3() -> f64 {
    2.0
}

fn default_hi() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BanditScenario {
    pub label: String,
    pub arms: usize,
    pub s0: usize,
    pub d: usize,
    pub horizon: usize,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_cov")]
    pub cov: CovariateKind,
    pub gamma1: usize,
    pub gamma2: usize,
    pub g1: usize,
    pub g2: usize,
    pub c0: f64,
    pub c0_hard: f64,
    #[serde(default = "default_variant")]
    pub lambda_variant: BanditLambdaVariant,
    #[serde(default = "default_tie")]
    pub tie_rule: TieRule,
    #[serde(default = "default_mx")]
    pub m_x: f64,
    #[serde(default = "default_l3")]
    pub l3: f64,
    /// Every arm shares one parameter draw.
    #[serde(default)]
    pub identical_arms: bool,
    pub policies: Vec<PolicyKind>,
    #[serde(default)]
    pub theta_lo: f64,
    #[serde(default = "default_hi")]
    pub theta_hi: f64,
}

impl BanditScenario {
    /// Simulation defaults: clipped covariates, `gamma1 = 10 K`,
    /// `gamma2 = 8 gamma1`, refits every 50 rounds.
    pub fn new(
        label: &str,
        s0: usize,
        d: usize,
        arms: usize,
        horizon: usize,
        c0: f64,
        c0_hard: f64,
    ) -> Self {
        let gamma1 = 10 * arms;
        Self {
            label: label.to_string(),
            arms,
            s0,
            d,
            horizon,
            sigma: 1.0,
            cov: default_cov(),
            gamma1,
            gamma2: (8 * gamma1).min(horizon),
            g1: 50,
            g2: 50,
            c0,
            c0_hard,
            lambda_variant: BanditLambdaVariant::SimBandit,
            tie_rule: TieRule::LowestIndex,
            m_x: 1.0,
            l3: 2.0,
            identical_arms: false,
            policies: vec![
                PolicyKind::ThreeStage,
                PolicyKind::TwoStageOpt,
                PolicyKind::TwoStageLasso,
            ],
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

    pub fn validate(&self) -> Result<()> {
        if self.arms == 0 {
            return Err(Error::config("arms", "need at least one arm"));
        }
        if self.s0 == 0 || self.s0 > self.d {
            return Err(Error::config("s0", format!("must lie in 1..={}", self.d)));
        }
        if self.horizon < 1 {
            return Err(Error::config("horizon", "must be positive"));
        }
        if !(1 <= self.gamma1 && self.gamma1 <= self.gamma2 && self.gamma2 <= self.horizon) {
            return Err(Error::config(
                "gamma1",
                format!(
                    "need 1 <= gamma1 <= gamma2 <= T, got ({}, {}, {})",
                    self.gamma1, self.gamma2, self.horizon
                ),
            ));
        }
        if self.g1 == 0 || self.g2 == 0 {
            return Err(Error::config("g1", "refit cadences must be positive"));
        }
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::config("sigma", "must be finite and nonnegative"));
        }
        if !(self.c0 > 0.0) || !(self.c0_hard >= 0.0) {
            return Err(Error::config("c0", "need c0 > 0 and c0_hard >= 0"));
        }
        if !(self.m_x > 0.0) || !(self.l3 > 0.0) {
            return Err(Error::config("m_x", "theory constants must be positive"));
        }
        if self.policies.is_empty() {
            return Err(Error::config("policies", "at least one policy is required"));
        }
        if !(self.theta_lo < self.theta_hi) {
            return Err(Error::config("theta_lo", "must be below theta_hi"));
        }
        self.covariate_model().validate()
    }

    /// `(gamma1, gamma2)` after the policy's ablation.
    pub fn stage_bounds(&self, policy: PolicyKind) -> (usize, usize) {
        match policy {
            PolicyKind::TwoStageOpt => (self.gamma1, self.gamma1),
            PolicyKind::TwoStageLasso => (self.gamma1, self.horizon),
            _ => (self.gamma1, self.gamma2),
        }
    }
}

/// Arm-selection rule in force at a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "stage", rename_all = "snake_case")]
pub enum StageRule {
    Random,
    /// Greedy on Lasso estimates fitted at the end of `fit_round`.
    Lasso {
        fit_round: usize,
    },
    /// Greedy on OPT-Lasso estimates fitted at the end of `fit_round`.
    Opt {
        fit_round: usize,
    },
}

/// Stage map of the three-stage algorithm at round `t >= 1`.
pub fn stage_rule(t: usize, gamma1: usize, gamma2: usize, g1: usize, g2: usize) -> StageRule {
    assert!(t >= 1 && gamma1 <= gamma2 && g1 >= 1 && g2 >= 1);
    if t <= gamma1 {
        StageRule::Random
    } else if t <= gamma2 {
        StageRule::Lasso {
            fit_round: gamma1 + (t - gamma1 - 1) / g1 * g1,
        }
    } else {
        StageRule::Opt {
            fit_round: gamma2 + (t - gamma2 - 1) / g2 * g2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FitKind {
    Lasso,
    Opt,
}

/// Which estimator, if any, is fitted at the end of round `r`.
fn fit_at(
    r: usize,
    horizon: usize,
    gamma1: usize,
    gamma2: usize,
    g1: usize,
    g2: usize,
) -> Option<FitKind> {
    if r < gamma1 || r >= horizon {
        None
    } else if r < gamma2 {
        (r - gamma1).is_multiple_of(g1).then_some(FitKind::Lasso)
    } else {
        (r - gamma2).is_multiple_of(g2).then_some(FitKind::Opt)
    }
}

/// `max_k x'theta_k - x'theta_a`.
pub fn instantaneous_regret(x: &[f64], thetas: &[SparseParam], a: usize) -> f64 {
    assert!(a < thetas.len(), "arm {a} out of range");
    let best = thetas
        .iter()
        .map(|th| th.dot_dense(x))
        .fold(f64::NEG_INFINITY, f64::max);
    best - thetas[a].dot_dense(x)
}

/// `argmax_k estimate_k'x` with ties broken by `tie`.
///
/// The random rule draws from `stream` only when there is a tie.
pub fn select_arm_greedy(
    estimates: &[Vec<f64>],
    x: &[f64],
    tie: TieRule,
    stream: &mut RngStream,
) -> usize {
    let scores: Vec<f64> = estimates.iter().map(|e| dot(e, x)).collect();
    argmax_with_ties(&scores, tie, stream)
}

fn argmax_with_ties(scores: &[f64], tie: TieRule, stream: &mut RngStream) -> usize {
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let first = scores
        .iter()
        .position(|&s| s == best)
        .expect("nonempty scores");
    match tie {
        TieRule::LowestIndex => first,
        TieRule::Random => {
            let ties: Vec<usize> = (0..scores.len()).filter(|&k| scores[k] == best).collect();
            if ties.len() == 1 {
                first
            } else {
                ties[stream.gen_range(0..ties.len())]
            }
        }
    }
}

/// `(lambda, lambda_opt)` at round `t` for an arm pulled a fraction
/// `pull_fraction` of the time so far.
pub fn bandit_lambda(sc: &BanditScenario, t: usize, pull_fraction: f64) -> (f64, f64) {
    assert!(t >= 1, "rounds start at 1");
    let t_f = t as f64;
    let d = sc.d as f64;
    match sc.lambda_variant {
        BanditLambdaVariant::TheoryBandit => {
            let lam = 6.0 * sc.m_x * sc.sigma * ((d * sc.horizon as f64).ln() / t_f).sqrt();
            (lam, 28.0 * sc.l3 * lam)
        }
        BanditLambdaVariant::SimBandit => {
            let lam = sc.c0 * pull_fraction * (d.ln() / t_f).sqrt();
            let lam_opt = sc.c0_hard * sc.c0 * ((d * t_f).ln() / t_f).sqrt();
            (lam, lam_opt)
        }
    }
}

/// Observations split by the arm that was pulled.
///
/// Per-arm fits divide by the total round count, not the arm's pull count.
#[derive(Debug, Clone)]
pub struct ArmDataset {
    stats: Vec<GramStats>,
    rounds: Vec<Vec<usize>>,
    total: usize,
}

impl ArmDataset {
    pub fn new(arms: usize, d: usize) -> Self {
        Self {
            stats: (0..arms).map(|_| GramStats::new(d)).collect(),
            rounds: vec![Vec::new(); arms],
            total: 0,
        }
    }

    /// Records round `t` (which must be the next round) under arm `a`.
    pub fn push(&mut self, t: usize, a: usize, x: &[f64], y: f64) {
        assert_eq!(t, self.total + 1, "rounds must arrive in order");
        self.stats[a].add_row(x, y);
        self.rounds[a].push(t);
        self.total = t;
    }

    pub fn pulls(&self, a: usize) -> usize {
        self.rounds[a].len()
    }

    pub fn rounds(&self, a: usize) -> &[usize] {
        &self.rounds[a]
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn stats_mut(&mut self, a: usize) -> &mut GramStats {
        &mut self.stats[a]
    }

    /// Every round `1..=total` belongs to exactly one arm.
    pub fn is_partition(&self) -> bool {
        let mut seen = vec![false; self.total + 1];
        for list in &self.rounds {
            for &t in list {
                if t == 0 || t > self.total || seen[t] {
                    return false;
                }
                seen[t] = true;
            }
        }
        seen[1..].iter().all(|&s| s)
    }
}

/// Support quality of one arm's estimate at one refit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefitMetric {
    pub round: usize,
    pub arm: usize,
    pub opt: bool,
    pub fp: u32,
    pub fn_: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BanditRunRecord {
    pub policy: PolicyKind,
    pub regret: Vec<f64>,
    pub arms: Vec<u32>,
    pub refits: Vec<RefitMetric>,
    pub gamma1: usize,
    pub gamma2: usize,
    /// Lasso fits that ran out of sweeps.
    pub unconverged_fits: usize,
}

/// `sum_{t=from..=to} r_t`, rounds counted from 1.
pub fn cumulative_regret(rec: &BanditRunRecord, window: (usize, usize)) -> f64 {
    let (lo, hi) = window;
    assert!(
        lo >= 1 && lo <= hi && hi <= rec.regret.len(),
        "window ({lo}, {hi}) out of range"
    );
    rec.regret[lo - 1..hi].iter().sum()
}

/// Draws the arm parameters for a replication.
pub fn draw_arm_parameters(sc: &BanditScenario, stream: &RngStream) -> Result<Vec<SparseParam>> {
    let mut params = stream.split(tags::PARAMS);
    if sc.identical_arms {
        let th = sample_sparse_uniform_param(&mut params, sc.d, sc.s0, sc.theta_lo, sc.theta_hi)?;
        return Ok(vec![th; sc.arms]);
    }
    (0..sc.arms)
        .map(|_| sample_sparse_uniform_param(&mut params, sc.d, sc.s0, sc.theta_lo, sc.theta_hi))
        .collect()
}

/// One replication of `policy`.
///
/// Parameters, covariates, noise and the policy's own randomness come from
/// separate substreams, so every policy sees the same environment.
pub fn run_bandit_replication(
    sc: &BanditScenario,
    policy: PolicyKind,
    stream: &RngStream,
) -> Result<BanditRunRecord> {
    sc.validate()?;
    let (k, d, horizon) = (sc.arms, sc.d, sc.horizon);
    let (gamma1, gamma2) = sc.stage_bounds(policy);
    let thetas = draw_arm_parameters(sc, stream)?;
    let mut cov_stream = stream.split(tags::COVARIATES);
    let mut noise = stream.split(tags::NOISE);
    let mut pol = stream.split(tags::POLICY);
    let mut sampler = CovariateSampler::new(&sc.covariate_model())?;

    let mut data = ArmDataset::new(k, d);
    let mut estimates = vec![vec![0.0; d]; k];
    let mut warm = vec![vec![0.0; d]; k];
    let mut rec = BanditRunRecord {
        policy,
        regret: Vec::with_capacity(horizon),
        arms: Vec::with_capacity(horizon),
        refits: Vec::new(),
        gamma1,
        gamma2,
        unconverged_fits: 0,
    };
    let mut x = vec![0.0; d];
    let mut scores = vec![0.0; k];
    for t in 1..=horizon {
        sampler.sample_into(&mut cov_stream, &mut x);
        let eps = noise.standard_normal();
        let a = match policy {
            PolicyKind::Oracle => {
                for (s, th) in scores.iter_mut().zip(&thetas) {
                    *s = th.dot_dense(&x);
                }
                argmax_with_ties(&scores, TieRule::LowestIndex, &mut pol)
            }
            PolicyKind::Random => pol.gen_range(0..k),
            _ if t <= gamma1 => pol.gen_range(0..k),
            _ => select_arm_greedy(&estimates, &x, sc.tie_rule, &mut pol),
        };
        let r = instantaneous_regret(&x, &thetas, a);
        debug_assert!(r >= 0.0);
        rec.regret.push(r);
        rec.arms.push(a as u32);
        let y = thetas[a].dot_dense(&x) + sc.sigma * eps;
        data.push(t, a, &x, y);

        if matches!(policy, PolicyKind::Oracle | PolicyKind::Random) {
            continue;
        }
        let Some(kind) = fit_at(t, horizon, gamma1, gamma2, sc.g1, sc.g2) else {
            continue;
        };
        debug_assert!(data.is_partition());
        for arm in 0..k {
            let pulls = data.pulls(arm);
            if pulls == 0 {
                continue;
            }
            let (lam, lam_opt) = bandit_lambda(sc, t, pulls as f64 / t as f64);
            let stats = data.stats_mut(arm);
            if t.is_power_of_two() {
                let w = &warm[arm];
                stats.retain_columns(|j| w[j] != 0.0);
            }
            let fit = lasso_fit_gram(stats, lam, t, &LassoOptions::warm(warm[arm].clone()))?;
            rec.unconverged_fits += usize::from(!fit.converged);
            warm[arm].clone_from(&fit.coef);
            estimates[arm] = match kind {
                FitKind::Lasso => fit.coef,
                FitKind::Opt => opt_from_lasso_gram(stats, fit, lam_opt, t)?.coef,
            };
            let (fp, fneg) = support_errors(&estimates[arm], &thetas[arm]);
            rec.refits.push(RefitMetric {
                round: t,
                arm,
                opt: kind == FitKind::Opt,
                fp,
                fn_: fneg,
            });
        }
    }
    Ok(rec)
}
