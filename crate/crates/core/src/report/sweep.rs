use serde::{Deserialize, Serialize};

use crate::bandit::{cumulative_regret, run_bandit_replication, PolicyKind};
use crate::error::{Error, Result};
use crate::parallel::replicate;
use crate::rng::make_stream;
use crate::seq::{cumulative_error, run_sequential_methods, SeqMethod};
use crate::stats::{aggregate_replications, Summary};

use super::{csv_writer, finish, Payload, TableRow};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub c0: Vec<f64>,
    pub c0_hard: Vec<f64>,
}

impl SweepGrid {
    pub fn validate(&self) -> Result<()> {
        if self.c0.is_empty() || self.c0_hard.is_empty() {
            return Err(Error::config("sweep", "grid must be nonempty"));
        }
        if self.c0.iter().any(|c| !(*c > 0.0)) || self.c0_hard.iter().any(|c| !(*c >= 0.0)) {
            return Err(Error::config("sweep", "need c0 > 0 and c0_hard >= 0"));
        }
        Ok(())
    }

    fn cells(&self) -> Vec<(f64, f64)> {
        self.c0
            .iter()
            .flat_map(|&a| self.c0_hard.iter().map(move |&b| (a, b)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub c0: f64,
    pub c0_hard: f64,
    pub summary: Summary,
    pub is_min: bool,
}

/// OPT-Lasso error (sequential) or three-stage regret (bandit) on every
/// `(c0, c0_hard)` cell, row-major in `c0`. All cells share the replication
/// streams. The cell with the lowest mean is flagged.
pub fn sensitivity_sweep(
    base: &Payload,
    grid: &SweepGrid,
    reps: usize,
    seed: u64,
    jobs: usize,
) -> Result<(Vec<SweepCell>, Vec<TableRow>)> {
    grid.validate()?;
    let cells = grid.cells();
    let (label, metric, per_rep): (String, &str, Vec<Vec<f64>>) = match base {
        Payload::Sequential(sc) => {
            let mut sc = sc.clone();
            sc.methods = cells.iter().map(|&(a, b)| SeqMethod::opt(a, b)).collect();
            sc.validate()?;
            let window = sc.window();
            let v = replicate(reps, jobs, |rep| {
                let recs = run_sequential_methods(&sc, &make_stream(seed, rep as u32))?;
                Ok(recs
                    .iter()
                    .map(|r| cumulative_error(r, window, sc.cap_xi))
                    .collect())
            })?;
            (sc.label, "cum_error", v)
        }
        Payload::Bandit(sc) => {
            let scenarios: Vec<_> = cells
                .iter()
                .map(|&(a, b)| {
                    let mut s = sc.clone();
                    s.c0 = a;
                    s.c0_hard = b;
                    s.policies = vec![PolicyKind::ThreeStage];
                    s
                })
                .collect();
            for s in &scenarios {
                s.validate()?;
            }
            let v = replicate(reps, jobs, |rep| {
                let stream = make_stream(seed, rep as u32);
                scenarios
                    .iter()
                    .map(|s| {
                        let rec = run_bandit_replication(s, PolicyKind::ThreeStage, &stream)?;
                        Ok(cumulative_regret(&rec, (1, s.horizon)))
                    })
                    .collect()
            })?;
            (sc.label.clone(), "cum_regret", v)
        }
        Payload::Fixtures(_) => {
            return Err(Error::config("sweep", "not available for fixtures"));
        }
    };
    let mut out = Vec::with_capacity(cells.len());
    for (i, &(c0, c0_hard)) in cells.iter().enumerate() {
        let vals: Vec<f64> = per_rep.iter().map(|r| r[i]).collect();
        out.push(SweepCell {
            c0,
            c0_hard,
            summary: aggregate_replications(&vals)?,
            is_min: false,
        });
    }
    let best = out
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.summary.mean.total_cmp(&b.1.summary.mean))
        .map(|(i, _)| i)
        .expect("nonempty grid");
    out[best].is_min = true;
    let method = match base {
        Payload::Sequential(_) => "opt",
        _ => "three_stage",
    };
    let rows = out
        .iter()
        .map(|c| {
            TableRow::new(
                &label,
                &format!("{method}({},{})", c.c0, c.c0_hard),
                metric,
                c.summary,
                seed,
            )
        })
        .collect();
    Ok((out, rows))
}

pub(super) fn cells_csv(cells: &[SweepCell]) -> Result<String> {
    let mut w = csv_writer();
    w.write_record(["c0", "c0_hard", "mean", "sem", "sd", "reps", "is_min"])?;
    for c in cells {
        w.write_record([
            c.c0.to_string(),
            c.c0_hard.to_string(),
            c.summary.mean.to_string(),
            c.summary.sem.to_string(),
            c.summary.sd.to_string(),
            c.summary.reps.to_string(),
            c.is_min.to_string(),
        ])?;
    }
    finish(w)
}
