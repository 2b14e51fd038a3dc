//! Experiment orchestration: configs, replication fan-out, aggregation and
//! the `table.csv` / `curves.csv` / `manifest.json` outputs.

mod presets;
mod svg;
mod sweep;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bandit::{run_bandit_replication, BanditRunRecord, BanditScenario};
use crate::error::{Error, Result};
use crate::fixtures::{build_packing_set, build_packing_set_sized, sample_omega1, PackingSet};
use crate::parallel::replicate;
use crate::rng::{make_stream, tags, RngStream};
use crate::seq::{cumulative_capped, run_sequential_methods, SeqRunRecord, SequentialScenario};
use crate::stats::{aggregate_replications, Summary};

pub use presets::{
    bandit_preset, preset_configs, seq_preset, table1, table2, PresetOverrides, BANDIT_PRESETS,
    DEFAULT_SEED, SEQ_PRESETS,
};
pub use svg::{render_curves_svg, series_from_curves, write_curves_svg, Series};
pub use sweep::{sensitivity_sweep, SweepCell, SweepGrid};

pub const TABLE_HEADER: [&str; 8] = [
    "scenario", "method", "metric", "mean", "sem", "sd", "reps", "seed",
];
pub const CURVES_HEADER: [&str; 5] = ["scenario", "method", "metric", "t", "value"];

/// Points kept per curve.
pub const CURVE_POINTS: usize = 200;

/// Build identifier in `git describe` form.
pub fn version() -> &'static str {
    env!("SEQLAB_VERSION")
}

/// One aggregated cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub scenario: String,
    pub method: String,
    pub metric: String,
    pub mean: f64,
    pub sem: f64,
    pub sd: f64,
    pub reps: usize,
    pub seed: u64,
}

impl TableRow {
    pub fn new(scenario: &str, method: &str, metric: &str, s: Summary, seed: u64) -> Self {
        Self {
            scenario: scenario.to_string(),
            method: method.to_string(),
            metric: metric.to_string(),
            mean: s.mean,
            sem: s.sem,
            sd: s.sd,
            reps: s.reps,
            seed,
        }
    }

    /// A single exact value (no replication spread).
    pub fn exact(scenario: &str, method: &str, metric: &str, value: f64, seed: u64) -> Self {
        Self::new(
            scenario,
            method,
            metric,
            Summary {
                mean: value,
                sem: 0.0,
                sd: 0.0,
                reps: 1,
            },
            seed,
        )
    }
}

/// One point of a mean curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub scenario: String,
    pub method: String,
    pub metric: String,
    pub t: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureSpec {
    pub d: usize,
    pub s: usize,
    pub r: f64,
    pub delta: f64,
    /// Packing size; `ceil(exp(L_{d,s}))` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<usize>,
    #[serde(default = "default_attempts")]
    pub max_attempts: usize,
    #[serde(default = "default_omega1_samples")]
    pub omega1_samples: usize,
}

fn default_attempts() -> usize {
    1_000_000
}

fn default_omega1_samples() -> usize {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "scenario", rename_all = "snake_case")]
pub enum Payload {
    Sequential(SequentialScenario),
    Bandit(BanditScenario),
    Fixtures(FixtureSpec),
}

impl Payload {
    pub fn label(&self) -> &str {
        match self {
            Payload::Sequential(s) => &s.label,
            Payload::Bandit(b) => &b.label,
            Payload::Fixtures(_) => "fixtures",
        }
    }

    fn default_reps(&self) -> usize {
        match self {
            Payload::Sequential(_) => 200,
            Payload::Bandit(_) => 1000,
            Payload::Fixtures(_) => 1,
        }
    }
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub payload: Payload,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Replications; 200 for sequential and 1000 for bandit runs when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reps: Option<usize>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Worker threads, `0` for all cores. Never changes the numbers.
    #[serde(default)]
    pub parallel_jobs: usize,
    /// Run a `(c0, c0_hard)` grid over the scenario instead of its methods.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepGrid>,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

impl ExperimentConfig {
    pub fn new(payload: Payload) -> Self {
        Self {
            payload,
            output_dir: default_output_dir(),
            reps: None,
            seed: DEFAULT_SEED,
            parallel_jobs: 0,
            sweep: None,
        }
    }

    pub fn reps(&self) -> usize {
        self.reps.unwrap_or_else(|| self.payload.default_reps())
    }

    pub fn validate(&self) -> Result<()> {
        match &self.payload {
            Payload::Sequential(s) => s.validate()?,
            Payload::Bandit(b) => b.validate()?,
            Payload::Fixtures(f) => {
                if f.omega1_samples < 2 {
                    return Err(Error::config("omega1_samples", "must be at least 2"));
                }
                crate::fixtures::l_ds(f.d, f.s)
                    .map_err(|e| Error::config("scenario.s", e.to_string()))?;
                if !(f.r > 0.0 && f.delta > 0.0) {
                    return Err(Error::config("scenario.r", "r and delta must be positive"));
                }
            }
        }
        if !matches!(self.payload, Payload::Fixtures(_)) && self.reps() < 2 {
            return Err(Error::config(
                "reps",
                "at least two replications are required",
            ));
        }
        if self.reps() > u32::MAX as usize {
            return Err(Error::config("reps", "too many replications"));
        }
        if let Some(g) = &self.sweep {
            if matches!(self.payload, Payload::Fixtures(_)) {
                return Err(Error::config("sweep", "not available for fixtures"));
            }
            g.validate()?;
        }
        Ok(())
    }
}

/// Everything needed to rerun a batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub seed: u64,
    pub wall_time_secs: f64,
    pub parallel_jobs: usize,
    pub experiments: Vec<ExperimentConfig>,
    pub outputs: Vec<String>,
    /// Lasso fits that ran out of sweeps, summed over the batch.
    pub unconverged_fits: usize,
}

/// Reads either a single experiment config or a manifest.
pub fn load_experiments(path: &Path) -> Result<Vec<ExperimentConfig>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    if value.get("experiments").is_some() {
        let m: Manifest = serde_json::from_value(value)?;
        Ok(m.experiments)
    } else {
        Ok(vec![serde_json::from_value(value)?])
    }
}

#[derive(Debug, Default)]
struct Output {
    rows: Vec<TableRow>,
    curves: Vec<CurveRow>,
    files: Vec<(String, String)>,
    unconverged: usize,
}

impl Output {
    fn extend(&mut self, other: Output) {
        self.rows.extend(other.rows);
        self.curves.extend(other.curves);
        self.files.extend(other.files);
        self.unconverged += other.unconverged;
    }
}

/// Runs one experiment into its `output_dir` and returns the manifest path.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<PathBuf> {
    run_batch(
        std::slice::from_ref(cfg),
        &cfg.output_dir,
        Some(cfg.parallel_jobs),
    )
}

/// Runs several experiments into one combined table. `jobs` overrides every
/// config's `parallel_jobs`.
pub fn run_batch(
    cfgs: &[ExperimentConfig],
    out_dir: &Path,
    jobs: Option<usize>,
) -> Result<PathBuf> {
    if cfgs.is_empty() {
        return Err(Error::InvalidArgument("no experiments to run".into()));
    }
    for cfg in cfgs {
        cfg.validate()?;
    }
    let start = Instant::now();
    let mut out = Output::default();
    let mut echo = Vec::with_capacity(cfgs.len());
    for cfg in cfgs {
        let jobs = jobs.unwrap_or(cfg.parallel_jobs);
        out.extend(execute(cfg, jobs)?);
        let mut resolved = cfg.clone();
        resolved.reps = Some(cfg.reps());
        resolved.output_dir = out_dir.to_path_buf();
        echo.push(resolved);
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut outputs = vec!["table.csv".to_string(), "curves.csv".to_string()];
    write_table(&out_dir.join("table.csv"), &out.rows)?;
    write_curves(&out_dir.join("curves.csv"), &out.curves)?;
    for (name, body) in &out.files {
        let p = out_dir.join(name);
        fs::write(&p, body).map_err(|e| Error::io(p, e))?;
        outputs.push(name.clone());
    }
    let manifest = Manifest {
        version: version().to_string(),
        seed: cfgs[0].seed,
        wall_time_secs: start.elapsed().as_secs_f64(),
        parallel_jobs: jobs.unwrap_or(cfgs[0].parallel_jobs),
        experiments: echo,
        outputs,
        unconverged_fits: out.unconverged,
    };
    let path = out_dir.join("manifest.json");
    let body = serde_json::to_string_pretty(&manifest)? + "\n";
    fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

fn execute(cfg: &ExperimentConfig, jobs: usize) -> Result<Output> {
    let (reps, seed) = (cfg.reps(), cfg.seed);
    if let Some(grid) = &cfg.sweep {
        let (cells, rows) = sensitivity_sweep(&cfg.payload, grid, reps, seed, jobs)?;
        let mut out = Output {
            rows,
            ..Output::default()
        };
        out.files
            .push(("sweep.csv".into(), sweep::cells_csv(&cells)?));
        return Ok(out);
    }
    match &cfg.payload {
        Payload::Sequential(sc) => run_sequential(sc, reps, seed, jobs),
        Payload::Bandit(sc) => run_bandit(sc, reps, seed, jobs),
        Payload::Fixtures(f) => run_fixtures(f, seed),
    }
}

/// Evenly spaced rounds in `[lo, hi]`, both ends included.
pub fn thin_grid(lo: usize, hi: usize, points: usize) -> Vec<usize> {
    assert!(lo <= hi && points >= 2);
    let n = hi - lo + 1;
    if n <= points {
        return (lo..=hi).collect();
    }
    let mut g: Vec<usize> = (0..points)
        .map(|i| lo + ((i * (hi - lo)) as f64 / (points - 1) as f64).round() as usize)
        .collect();
    g.dedup();
    g
}

/// Per-replication reduction of one method.
struct Reduced {
    metrics: Vec<(&'static str, f64)>,
    curves: Vec<(&'static str, Vec<(usize, f64)>)>,
    unconverged: usize,
}

fn aggregate(
    scenario: &str,
    labels: &[String],
    per_rep: Vec<Vec<Reduced>>,
    seed: u64,
) -> Result<Output> {
    let mut out = Output::default();
    for (m, label) in labels.iter().enumerate() {
        let first = &per_rep[0][m];
        for (i, (name, _)) in first.metrics.iter().enumerate() {
            let vals: Vec<f64> = per_rep.iter().map(|r| r[m].metrics[i].1).collect();
            out.rows.push(TableRow::new(
                scenario,
                label,
                name,
                aggregate_replications(&vals)?,
                seed,
            ));
        }
        for (i, (name, pts)) in first.curves.iter().enumerate() {
            for (p, &(t, _)) in pts.iter().enumerate() {
                let sum: f64 = per_rep.iter().map(|r| r[m].curves[i].1[p].1).sum();
                out.curves.push(CurveRow {
                    scenario: scenario.to_string(),
                    method: label.clone(),
                    metric: name.to_string(),
                    t,
                    value: sum / per_rep.len() as f64,
                });
            }
        }
        out.unconverged += per_rep.iter().map(|r| r[m].unconverged).sum::<usize>();
    }
    Ok(out)
}

fn run_sequential(sc: &SequentialScenario, reps: usize, seed: u64, jobs: usize) -> Result<Output> {
    let window = sc.window();
    let err_grid = thin_grid(window.0, window.1, CURVE_POINTS);
    let sup_grid = thin_grid(1, sc.horizon, CURVE_POINTS);
    let per_rep = replicate(reps, jobs, |rep| {
        let recs = run_sequential_methods(sc, &make_stream(seed, rep as u32))?;
        Ok(recs
            .iter()
            .map(|r| reduce_seq(r, window, sc.cap_xi, &err_grid, &sup_grid))
            .collect())
    })?;
    let labels: Vec<String> = sc.methods.iter().map(|m| m.label()).collect();
    aggregate(&sc.label, &labels, per_rep, seed)
}

fn reduce_seq(
    rec: &SeqRunRecord,
    window: (usize, usize),
    cap: Option<f64>,
    err_grid: &[usize],
    sup_grid: &[usize],
) -> Reduced {
    let cap_v = cap.unwrap_or(f64::INFINITY);
    let mut running = Vec::with_capacity(err_grid.len());
    let mut acc = 0.0;
    let mut next = 0;
    for t in window.0..=window.1 {
        acc += rec.squared_error[t - 1].min(cap_v);
        if next < err_grid.len() && err_grid[next] == t {
            running.push((t, acc));
            next += 1;
        }
    }
    let at = |v: &[u32]| -> Vec<(usize, f64)> {
        sup_grid.iter().map(|&t| (t, f64::from(v[t - 1]))).collect()
    };
    let horizon = rec.horizon();
    Reduced {
        metrics: vec![
            (
                "cum_error",
                cumulative_capped(&rec.squared_error, window, cap),
            ),
            ("fp_final", f64::from(rec.fp[horizon - 1])),
            ("fn_final", f64::from(rec.fn_[horizon - 1])),
        ],
        curves: vec![
            ("running_error", running),
            ("fp", at(&rec.fp)),
            ("fn", at(&rec.fn_)),
        ],
        unconverged: rec.unconverged_fits,
    }
}

fn run_bandit(sc: &BanditScenario, reps: usize, seed: u64, jobs: usize) -> Result<Output> {
    let grid = thin_grid(1, sc.horizon, CURVE_POINTS);
    let per_rep = replicate(reps, jobs, |rep| {
        let stream = make_stream(seed, rep as u32);
        sc.policies
            .iter()
            .map(|&p| {
                Ok(reduce_bandit(
                    &run_bandit_replication(sc, p, &stream)?,
                    &grid,
                ))
            })
            .collect()
    })?;
    let labels: Vec<String> = sc.policies.iter().map(|p| p.label().to_string()).collect();
    aggregate(&sc.label, &labels, per_rep, seed)
}

fn reduce_bandit(rec: &BanditRunRecord, grid: &[usize]) -> Reduced {
    let mut cum = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    let mut next = 0;
    for (i, r) in rec.regret.iter().enumerate() {
        acc += r;
        if next < grid.len() && grid[next] == i + 1 {
            cum.push((i + 1, acc));
            next += 1;
        }
    }
    let mut curves = vec![("cum_regret", cum)];
    if !rec.refits.is_empty() {
        // arm-averaged support errors, held constant between refits
        let mut rounds: Vec<(usize, f64, f64)> = Vec::new();
        let mut i = 0;
        while i < rec.refits.len() {
            let round = rec.refits[i].round;
            let (mut fp, mut fneg, mut n) = (0.0, 0.0, 0.0);
            while i < rec.refits.len() && rec.refits[i].round == round {
                fp += f64::from(rec.refits[i].fp);
                fneg += f64::from(rec.refits[i].fn_);
                n += 1.0;
                i += 1;
            }
            rounds.push((round, fp / n, fneg / n));
        }
        let first = rounds[0].0;
        let pts: Vec<(usize, usize)> = grid
            .iter()
            .filter(|&&t| t >= first)
            .map(|&t| (t, rounds.partition_point(|r| r.0 <= t) - 1))
            .collect();
        curves.push(("fp", pts.iter().map(|&(t, k)| (t, rounds[k].1)).collect()));
        curves.push(("fn", pts.iter().map(|&(t, k)| (t, rounds[k].2)).collect()));
    }
    Reduced {
        metrics: vec![("cum_regret", acc)],
        curves,
        unconverged: rec.unconverged_fits,
    }
}

fn fixture_streams(seed: u64) -> (RngStream, RngStream) {
    (
        RngStream::new(seed, 0, tags::FIXTURE),
        RngStream::new(seed, 1, tags::FIXTURE),
    )
}

fn run_fixtures(f: &FixtureSpec, seed: u64) -> Result<Output> {
    let (mut ps, mut os) = fixture_streams(seed);
    let set = match f.target {
        Some(m) => build_packing_set_sized(f.d, f.s, f.r, f.delta, m, &mut ps, f.max_attempts)?,
        None => build_packing_set(f.d, f.s, f.r, f.delta, &mut ps, f.max_attempts)?,
    };
    let mut radii = Vec::with_capacity(f.omega1_samples);
    let mut omega = csv_writer();
    let mut header = vec!["sample".to_string(), "radius".to_string()];
    header.extend((1..=f.s).map(|j| format!("theta_{j}")));
    omega.write_record(&header)?;
    for i in 0..f.omega1_samples {
        let th = sample_omega1(f.d, f.s, f.r, &mut os)?;
        let dense = th.to_dense();
        let radius = th.norm2();
        radii.push(radius);
        let mut rec = vec![i.to_string(), radius.to_string()];
        rec.extend(dense[..f.s].iter().map(|v| v.to_string()));
        omega.write_record(&rec)?;
    }
    let scenario = format!("packing(d={},s={})", f.d, f.s);
    let mut out = Output::default();
    out.rows.push(TableRow::exact(
        &scenario,
        "packing",
        "size",
        set.len() as f64,
        seed,
    ));
    out.rows.push(TableRow::new(
        &scenario,
        "omega1",
        "radius",
        aggregate_replications(&radii)?,
        seed,
    ));
    out.files.push(("packing.csv".into(), packing_csv(&set)?));
    out.files.push(("omega1.csv".into(), finish(omega)?));
    Ok(out)
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| Error::InvalidArgument(format!("csv buffer: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// One row per packing vector, nonzero coordinates only (1-based indices).
pub fn packing_csv(set: &PackingSet) -> Result<String> {
    let mut w = csv_writer();
    w.write_record(["vector", "coordinate", "value"])?;
    for (i, v) in set.vectors.iter().enumerate() {
        for (j, x) in v.iter().enumerate() {
            if *x != 0.0 {
                w.write_record([i.to_string(), (j + 1).to_string(), x.to_string()])?;
            }
        }
    }
    finish(w)
}

pub fn table_csv(rows: &[TableRow]) -> Result<String> {
    let mut w = csv_writer();
    w.write_record(TABLE_HEADER)?;
    for r in rows {
        w.write_record([
            r.scenario.clone(),
            r.method.clone(),
            r.metric.clone(),
            r.mean.to_string(),
            r.sem.to_string(),
            r.sd.to_string(),
            r.reps.to_string(),
            r.seed.to_string(),
        ])?;
    }
    finish(w)
}

pub fn write_table(path: &Path, rows: &[TableRow]) -> Result<()> {
    fs::write(path, table_csv(rows)?).map_err(|e| Error::io(path, e))
}

pub fn read_table(path: &Path) -> Result<Vec<TableRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != TABLE_HEADER {
        return Err(Error::InvalidArgument(format!(
            "{} does not have the table header",
            path.display()
        )));
    }
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

pub fn write_curves(path: &Path, rows: &[CurveRow]) -> Result<()> {
    let mut w = csv_writer();
    w.write_record(CURVES_HEADER)?;
    for r in rows {
        w.write_record([
            r.scenario.clone(),
            r.method.clone(),
            r.metric.clone(),
            r.t.to_string(),
            r.value.to_string(),
        ])?;
    }
    fs::write(path, finish(w)?).map_err(|e| Error::io(path, e))
}

pub fn read_curves(path: &Path) -> Result<Vec<CurveRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bandit::PolicyKind;
    use crate::seq::SeqMethod;

    fn small_seq() -> ExperimentConfig {
        let sc = SequentialScenario::new(
            "tiny",
            2,
            8,
            40,
            vec![SeqMethod::opt(0.8, 0.6), SeqMethod::lasso(0.8)],
        );
        let mut cfg = ExperimentConfig::new(Payload::Sequential(sc));
        cfg.reps = Some(3);
        cfg
    }

    #[test]
    fn grid_endpoints() {
        assert_eq!(thin_grid(3, 7, 10), vec![3, 4, 5, 6, 7]);
        let g = thin_grid(1, 10_000, 200);
        assert_eq!((g[0], *g.last().unwrap(), g.len()), (1, 10_000, 200));
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn config_round_trip() {
        let cfg = small_seq();
        let text = serde_json::to_string(&cfg).unwrap();
        assert!(text.contains("\"kind\":\"sequential\""));
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn config_errors_name_the_field() {
        let mut cfg = small_seq();
        if let Payload::Sequential(s) = &mut cfg.payload {
            s.s0 = 0;
        }
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("`s0`"), "{err}");
        let mut cfg = small_seq();
        cfg.reps = Some(1);
        assert!(cfg.validate().unwrap_err().to_string().contains("`reps`"));
    }

    #[test]
    fn sequential_rows_and_curves() {
        let cfg = small_seq();
        let out = execute(&cfg, 1).unwrap();
        assert_eq!(out.rows.len(), 6);
        assert!(out.rows.iter().all(|r| r.reps == 3));
        for r in &out.rows {
            assert!((r.sem - r.sd / 3f64.sqrt()).abs() <= 1e-12 * r.sd.max(1.0));
        }
        let running: Vec<&CurveRow> = out
            .curves
            .iter()
            .filter(|c| c.method == "opt(0.8,0.6)" && c.metric == "running_error")
            .collect();
        assert_eq!(running.first().unwrap().t, 4);
        assert_eq!(running.last().unwrap().t, 40);
        let total = out
            .rows
            .iter()
            .find(|r| r.method == "opt(0.8,0.6)" && r.metric == "cum_error")
            .unwrap()
            .mean;
        assert!((running.last().unwrap().value - total).abs() < 1e-9 * total.max(1.0));
    }

    #[test]
    fn oracle_bandit_table() {
        let mut sc = BanditScenario::new("or", 2, 6, 3, 60, 2.0, 0.6);
        sc.policies = vec![PolicyKind::Oracle];
        let mut cfg = ExperimentConfig::new(Payload::Bandit(sc));
        cfg.reps = Some(2);
        let out = execute(&cfg, 1).unwrap();
        assert_eq!(out.rows.len(), 1);
        let r = &out.rows[0];
        assert_eq!((r.mean, r.sem, r.sd), (0.0, 0.0, 0.0));
        assert!(out.curves.iter().all(|c| c.value == 0.0));
    }

    #[test]
    fn table_csv_layout() {
        let rows = vec![TableRow::exact("a,b", "m", "x", 1.5, 7)];
        let s = table_csv(&rows).unwrap();
        assert_eq!(
            s,
            "scenario,method,metric,mean,sem,sd,reps,seed\n\"a,b\",m,x,1.5,0,0,1,7\n"
        );
    }
}
