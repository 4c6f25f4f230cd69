use std::path::PathBuf;
use std::str::FromStr;

use anyhow::Context;
use clap::{Args, ValueEnum};
use gmbe_core::io::{emit_csv, ResultRow};
use rayon::prelude::*;
use serde::Serialize;

use crate::gen::{Family, ModelArgs};
use crate::run::{Instance, MethodArg, RunError};
use crate::{sidecar, usage, Failure};

/// Inclusive `start:stop:step` grid of interaction strengths.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl FromStr for TRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |x: &str| x.trim().parse::<f64>().map_err(|_| format!("bad number {x:?} in {s:?}"));
        let (start, stop, step) = match parts.as_slice() {
            [a] => (num(a)?, num(a)?, 1.0),
            [a, b, c] => (num(a)?, num(b)?, num(c)?),
            _ => return Err(format!("expected start:stop:step, got {s:?}")),
        };
        if !(step > 0.0 && step.is_finite()) {
            return Err(format!("step must be positive, got {step}"));
        }
        if !(start >= 0.0 && stop >= start && stop.is_finite()) {
            return Err(format!("need 0 <= start <= stop, got {start}:{stop}"));
        }
        Ok(TRange { start, stop, step })
    }
}

impl TRange {
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        // rounding keeps 0.2 + 2 * 0.2 printing as 0.6
        (0..n)
            .map(|i| ((self.start + i as f64 * self.step) * 1e12).round() / 1e12)
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Reference {
    /// Exact ln Z for Ising grids, the MBE bound otherwise.
    Auto,
    Exact,
    Mbe,
}

#[derive(Args, Debug, Serialize)]
pub struct SweepArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    /// Interaction strengths as start:stop:step (inclusive).
    #[arg(long = "t", default_value = "0.2:2.0:0.2")]
    pub t: TRange,
    /// Independent models per strength.
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, value_enum, value_delimiter = ',',
          default_value = "wmbe,wmbe-w,wmbe-theta,wmbe-wtheta,wmbe-g,wmbe-wg")]
    pub methods: Vec<MethodArg>,
    #[arg(long, default_value_t = 4)]
    pub ibound: usize,
    #[arg(long, default_value_t = 150)]
    pub iters: usize,
    /// Trial `k` uses model seed `seed + k`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "auto")]
    pub reference: Reference,
    /// Record wall times. Off by default so that reruns give identical bytes.
    #[arg(long)]
    pub timing: bool,
    /// Worker threads (default: all cores).
    #[arg(long, env = "GMBE_THREADS")]
    pub threads: Option<usize>,
    /// Output CSV; a JSON sidecar is written next to it. Prints to stdout
    /// when absent.
    #[arg(short, long)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

struct Job {
    t: f64,
    seed: u64,
}

fn reference(args: &SweepArgs, inst: &Instance) -> Option<(&'static str, f64)> {
    let exact = || inst.exact().ok().map(|r| ("logZ", r.log_bound));
    let mbe = || {
        inst.run(MethodArg::Mbe, args.ibound, 0)
            .ok()
            .map(|r| ("logZ_MBE", r.log_bound))
    };
    match (args.reference, args.model.model) {
        (Reference::Exact, _) => exact(),
        (Reference::Mbe, _) => mbe(),
        (Reference::Auto, Family::IsingGrid) => exact().or_else(mbe),
        (Reference::Auto, _) => mbe(),
    }
}

fn run_job(args: &SweepArgs, job: &Job) -> Vec<ResultRow> {
    let model_id = args.model.id(job.t, job.seed);
    let row = |method: &str, direction: &str| ResultRow {
        model_id: model_id.clone(),
        method: method.to_string(),
        ibound: args.ibound,
        t: job.t,
        seed: job.seed,
        direction: direction.to_string(),
        log_bound: None,
        reference: None,
        metric_kind: None,
        metric: None,
        wall_time_s: 0.0,
        status: String::new(),
    };
    let inst = args
        .model
        .build(job.t, job.seed, true)
        .and_then(Instance::new);
    let inst = match inst {
        Ok(i) => i,
        Err(e) => {
            return args
                .methods
                .iter()
                .map(|m| ResultRow {
                    status: format!("error: {e:#}"),
                    ..row(m.tag(), &m.direction().to_string())
                })
                .collect()
        }
    };
    let reference = reference(args, &inst);
    args.methods
        .iter()
        .map(|&m| {
            let base = row(m.tag(), &m.direction().to_string());
            let r = match inst.run(m, args.ibound, args.iters) {
                Ok(res) => ResultRow {
                    log_bound: Some(res.log_bound),
                    wall_time_s: if args.timing { res.wall_time_s } else { 0.0 },
                    status: "ok".into(),
                    ..base
                },
                Err(e @ (RunError::Skipped(_) | RunError::Failed(_))) => ResultRow {
                    status: e.status(),
                    ..base
                },
            };
            match reference {
                Some((kind, z)) => r.with_reference(kind, z),
                None => r,
            }
        })
        .collect()
}

/// Rows ordered by strength, then trial, then method, whatever the number of
/// workers.
pub fn sweep_rows(args: &SweepArgs) -> Vec<ResultRow> {
    let jobs: Vec<Job> = args
        .t
        .points()
        .into_iter()
        .flat_map(|t| (0..args.trials as u64).map(move |k| (t, k)))
        .map(|(t, k)| Job {
            t,
            seed: args.seed.wrapping_add(k),
        })
        .collect();
    jobs.par_iter().flat_map_iter(|j| run_job(args, j)).collect()
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<(), Failure> {
    if args.trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    if args.methods.is_empty() {
        return Err(usage("--methods must name at least one method"));
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(usage("GMBE_THREADS / --threads must be at least 1"));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().context("starting worker pool")?;
    let rows = pool.install(|| sweep_rows(args));
    let csv = emit_csv(&rows).map_err(anyhow::Error::from)?;
    match &args.output {
        None => print!("{csv}"),
        Some(path) => {
            std::fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?;
            sidecar::write(path, "sweep", args)?;
        }
    }
    Ok(())
}
