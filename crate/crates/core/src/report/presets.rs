use crate::bandit::BanditScenario;
use crate::error::{Error, Result};
use crate::seq::{SeqMethod, SequentialScenario};

use super::{ExperimentConfig, Payload};

pub const DEFAULT_SEED: u64 = 20_240_601;

/// `(name, s0, d, T)`.
pub const SEQ_PRESETS: [(&str, usize, usize, usize); 4] = [
    ("seq-a", 5, 100, 10_000),
    ("seq-b", 10, 500, 10_000),
    ("seq-c", 5, 1000, 5000),
    ("seq-d", 10, 1000, 5000),
];

/// `(name, s0, d, K)`, all with `T = 10_000`.
pub const BANDIT_PRESETS: [(&str, usize, usize, usize); 8] = [
    ("bandit-a", 5, 100, 5),
    ("bandit-b", 5, 100, 10),
    ("bandit-c", 10, 500, 5),
    ("bandit-d", 10, 500, 10),
    ("bandit-e", 5, 1000, 5),
    ("bandit-f", 5, 1000, 10),
    ("bandit-g", 10, 1000, 5),
    ("bandit-h", 10, 1000, 10),
];

const BANDIT_HORIZON: usize = 10_000;

/// Desk-scale knobs applied on top of a preset.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PresetOverrides {
    pub reps: Option<usize>,
    pub horizon: Option<usize>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
}

/// Two OPT-Lasso tunings, two Lasso tunings and the support oracle.
pub fn seq_preset(name: &str) -> Option<SequentialScenario> {
    let &(label, s0, d, t) = SEQ_PRESETS.iter().find(|p| p.0 == name)?;
    Some(SequentialScenario::new(
        label,
        s0,
        d,
        t,
        vec![
            SeqMethod::opt(0.8, 0.6),
            SeqMethod::opt(1.0, 0.4),
            SeqMethod::lasso(0.8),
            SeqMethod::lasso(1.0),
            SeqMethod::oracle(),
        ],
    ))
}

/// `C0 = 2`; `C0_hard = 0.6` with five arms and `1` with ten.
pub fn bandit_preset(name: &str) -> Option<BanditScenario> {
    let &(label, s0, d, k) = BANDIT_PRESETS.iter().find(|p| p.0 == name)?;
    let c0_hard = if k == 5 { 0.6 } else { 1.0 };
    Some(BanditScenario::new(
        label,
        s0,
        d,
        k,
        BANDIT_HORIZON,
        2.0,
        c0_hard,
    ))
}

fn apply(mut payload: Payload, ov: &PresetOverrides) -> ExperimentConfig {
    if let Some(t) = ov.horizon {
        match &mut payload {
            Payload::Sequential(s) => s.horizon = t,
            Payload::Bandit(b) => {
                b.horizon = t;
                b.gamma1 = b.gamma1.min(t);
                b.gamma2 = (8 * b.gamma1).min(t);
            }
            Payload::Fixtures(_) => {}
        }
    }
    let mut cfg = ExperimentConfig::new(payload);
    cfg.reps = ov.reps;
    if let Some(s) = ov.seed {
        cfg.seed = s;
    }
    cfg.parallel_jobs = ov.jobs.unwrap_or(0);
    cfg
}

pub fn table1(ov: &PresetOverrides) -> Vec<ExperimentConfig> {
    SEQ_PRESETS
        .iter()
        .map(|p| apply(Payload::Sequential(seq_preset(p.0).unwrap()), ov))
        .collect()
}

pub fn table2(ov: &PresetOverrides) -> Vec<ExperimentConfig> {
    BANDIT_PRESETS
        .iter()
        .map(|p| apply(Payload::Bandit(bandit_preset(p.0).unwrap()), ov))
        .collect()
}

/// `table1`, `table2` or a single scenario name such as `seq-c`.
pub fn preset_configs(name: &str, ov: &PresetOverrides) -> Result<Vec<ExperimentConfig>> {
    match name {
        "table1" => Ok(table1(ov)),
        "table2" => Ok(table2(ov)),
        _ => {
            if let Some(s) = seq_preset(name) {
                Ok(vec![apply(Payload::Sequential(s), ov)])
            } else if let Some(b) = bandit_preset(name) {
                Ok(vec![apply(Payload::Bandit(b), ov)])
            } else {
                Err(Error::config("preset", format!("unknown preset `{name}`")))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for c in table1(&PresetOverrides::default())
            .iter()
            .chain(&table2(&PresetOverrides::default()))
        {
            c.validate().unwrap();
        }
        let b = bandit_preset("bandit-f").unwrap();
        assert_eq!((b.gamma1, b.gamma2, b.c0, b.c0_hard), (100, 800, 2.0, 1.0));
        let a = bandit_preset("bandit-a").unwrap();
        assert_eq!((a.gamma1, a.gamma2, a.c0_hard), (50, 400, 0.6));
        assert_eq!(seq_preset("seq-c").unwrap().window(), (500, 5000));
    }

    #[test]
    fn overrides() {
        let ov = PresetOverrides {
            reps: Some(4),
            horizon: Some(300),
            seed: Some(9),
            jobs: Some(2),
        };
        let cfgs = preset_configs("bandit-a", &ov).unwrap();
        let Payload::Bandit(b) = &cfgs[0].payload else {
            panic!()
        };
        assert_eq!((b.horizon, b.gamma1, b.gamma2), (300, 50, 300));
        assert_eq!(
            (cfgs[0].reps(), cfgs[0].seed, cfgs[0].parallel_jobs),
            (4, 9, 2)
        );
        assert!(preset_configs("seq-z", &ov).is_err());
        assert_eq!(preset_configs("table1", &ov).unwrap().len(), 4);
    }
}
