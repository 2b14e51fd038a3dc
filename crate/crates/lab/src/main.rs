use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use seqlab::fixtures::l_ds;
use seqlab::report::{
    load_experiments, preset_configs, read_curves, run_batch, series_from_curves, write_curves_svg,
    ExperimentConfig, FixtureSpec, Payload, PresetOverrides, SweepGrid, DEFAULT_SEED,
};

#[derive(Parser)]
#[command(name = "lab", version = seqlab::report::version(), about = "Sparse regression and bandit simulation lab")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run an experiment config or rerun a manifest.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory, overriding the config.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Run a named preset: table1, table2, seq-a..seq-d or bandit-a..bandit-h.
    Preset {
        name: String,
        #[command(flatten)]
        knobs: Knobs,
    },
    /// Grid over (C0, C0_hard) for one scenario.
    Sweep {
        /// Scenario preset name.
        #[arg(long, conflicts_with = "config")]
        preset: Option<String>,
        /// Experiment config supplying the base scenario.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', required = true)]
        c0: Vec<f64>,
        #[arg(long = "c0-hard", value_delimiter = ',', required = true)]
        c0_hard: Vec<f64>,
        #[command(flatten)]
        knobs: Knobs,
    },
    /// Theory fixtures.
    Fixtures {
        #[command(subcommand)]
        what: FixtureCmd,
    },
    /// Render curves.csv as an SVG line chart.
    Plot {
        #[arg(long)]
        curves: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Scenario to plot; the first one in the file by default.
        #[arg(long)]
        scenario: Option<String>,
        /// Metric to plot; the first one of the scenario by default.
        #[arg(long)]
        metric: Option<String>,
        #[arg(long)]
        title: Option<String>,
    },
}

#[derive(Args)]
struct Knobs {
    #[arg(long)]
    reps: Option<usize>,
    /// Horizon override.
    #[arg(long = "T")]
    horizon: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Knobs {
    fn overrides(&self) -> PresetOverrides {
        PresetOverrides {
            reps: self.reps,
            horizon: self.horizon,
            seed: self.seed,
            jobs: self.jobs,
        }
    }
}

#[derive(Subcommand)]
enum FixtureCmd {
    /// Build and verify a sparse packing set; also dump radial-prior samples.
    Packing {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        s: usize,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        /// Packing size; the smallest admissible size by default.
        #[arg(long)]
        target: Option<usize>,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value = "out/fixtures")]
        out: PathBuf,
    },
}

fn run(cfgs: &[ExperimentConfig], out: &Path, jobs: Option<usize>) -> Result<()> {
    let manifest = run_batch(cfgs, out, jobs)?;
    let table = fs::read_to_string(out.join("table.csv"))?;
    print!("{table}");
    eprintln!("wrote {}", manifest.display());
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::Run { config, out, jobs } => {
            let cfgs = load_experiments(&config)
                .with_context(|| format!("loading {}", config.display()))?;
            let out = out.unwrap_or_else(|| cfgs[0].output_dir.clone());
            run(&cfgs, &out, jobs)
        }
        Cmd::Preset { name, knobs } => {
            let cfgs = preset_configs(&name, &knobs.overrides())?;
            let out = knobs
                .out
                .clone()
                .unwrap_or_else(|| Path::new("out").join(&name));
            run(&cfgs, &out, knobs.jobs)
        }
        Cmd::Sweep {
            preset,
            config,
            c0,
            c0_hard,
            knobs,
        } => {
            let mut cfg = match (preset, config) {
                (Some(p), None) => {
                    let mut cfgs = preset_configs(&p, &knobs.overrides())?;
                    if cfgs.len() != 1 {
                        bail!("`{p}` is a table preset; sweep one scenario such as bandit-e");
                    }
                    cfgs.remove(0)
                }
                (None, Some(c)) => {
                    let mut cfgs = load_experiments(&c)?;
                    if cfgs.len() != 1 {
                        bail!(
                            "{} holds {} experiments, expected one",
                            c.display(),
                            cfgs.len()
                        );
                    }
                    let mut cfg = cfgs.remove(0);
                    if knobs.reps.is_some() {
                        cfg.reps = knobs.reps;
                    }
                    if let Some(s) = knobs.seed {
                        cfg.seed = s;
                    }
                    cfg
                }
                _ => bail!("give exactly one of --preset or --config"),
            };
            if matches!(&cfg.payload, Payload::Fixtures(_)) {
                bail!("sweeps need a sequential or bandit scenario");
            }
            cfg.sweep = Some(SweepGrid { c0, c0_hard });
            let out = knobs
                .out
                .clone()
                .unwrap_or_else(|| PathBuf::from("out/sweep"));
            run(&[cfg], &out, knobs.jobs)
        }
        Cmd::Fixtures {
            what:
                FixtureCmd::Packing {
                    d,
                    s,
                    r,
                    delta,
                    target,
                    samples,
                    seed,
                    out,
                },
        } => {
            let bound = l_ds(d, s)?;
            let mut cfg = ExperimentConfig::new(Payload::Fixtures(FixtureSpec {
                d,
                s,
                r,
                delta,
                target,
                max_attempts: 1_000_000,
                omega1_samples: samples,
            }));
            cfg.seed = seed;
            eprintln!(
                "L(d={d}, s={s}) = {bound:.6}, minimal size {}",
                bound.exp().ceil()
            );
            run(&[cfg], &out, None)
        }
        Cmd::Plot {
            curves,
            out,
            scenario,
            metric,
            title,
        } => {
            let rows = read_curves(&curves)?;
            let Some(first) = rows.first() else {
                bail!("{} has no curve rows", curves.display());
            };
            let scenario = scenario.unwrap_or_else(|| first.scenario.clone());
            let metric = match metric {
                Some(m) => m,
                None => match rows.iter().find(|r| r.scenario == scenario) {
                    Some(r) => r.metric.clone(),
                    None => bail!("no curves for scenario `{scenario}`"),
                },
            };
            let series = series_from_curves(&rows, &scenario, &metric);
            if series.is_empty() {
                bail!("no `{metric}` curves for scenario `{scenario}`");
            }
            let title = title.unwrap_or_else(|| format!("{scenario}: {metric}"));
            write_curves_svg(&series, &title, &out)?;
            eprintln!("wrote {}", out.display());
            Ok(())
        }
    }
}
