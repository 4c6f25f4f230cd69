use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::Args;
use gmbe_core::io::{emit_trace_csv, parse_uai};
use gmbe_core::{BoundResult, Direction, FactorGraph};
use serde::Serialize;

use crate::run::{Instance, MethodArg, RunError};
use crate::{usage, Failure};

#[derive(Args, Debug)]
pub struct BoundArgs {
    /// UAI model file.
    pub model: PathBuf,
    #[arg(long, value_enum, default_value = "wmbe")]
    pub method: MethodArg,
    /// Reverse-Hölder lower bound (plain WMBE only).
    #[arg(long)]
    pub lower: bool,
    #[arg(long, default_value_t = 4)]
    pub ibound: usize,
    /// Outer optimizer iterations.
    #[arg(long, default_value_t = 150)]
    pub iters: usize,
    /// Write the optimizer trace as CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Serialize)]
struct Report<'a> {
    method: &'a str,
    direction: Direction,
    log_bound: f64,
    iters: usize,
    wall_time_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<&'a [f64]>,
}

pub fn read_model(path: &Path) -> Result<FactorGraph, Failure> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::Usage)?;
    parse_uai(&text)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(Failure::Usage)
}

pub fn cmd_bound(args: &BoundArgs) -> Result<(), Failure> {
    let method = match (args.method, args.lower) {
        (m, false) => m,
        (MethodArg::Wmbe | MethodArg::WmbeLower, true) => MethodArg::WmbeLower,
        (m, true) => {
            return Err(usage(format!(
                "--lower is only supported with --method wmbe, not {}",
                m.name()
            )))
        }
    };
    let inst = Instance::new(read_model(&args.model)?)?;
    let res: BoundResult = inst
        .run(method, args.ibound, args.iters)
        .map_err(|e: RunError| Failure::Runtime(e.into()))?;
    if let Some(path) = &args.trace {
        let csv = emit_trace_csv(&res).map_err(anyhow::Error::from)?;
        std::fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?;
    }
    let iters = res.trace.len().saturating_sub(1);
    let report = Report {
        method: &res.method,
        direction: res.direction,
        log_bound: res.log_bound,
        iters,
        wall_time_s: res.wall_time_s,
        trace: (!res.trace.is_empty()).then_some(res.trace.as_slice()),
    };
    println!("{}", serde_json::to_string(&report).map_err(anyhow::Error::from)?);
    Ok(())
}
