//! Method dispatch shared by `bound`, `verify` and `sweep`.
//!
//! `be` eliminates the model as given. Every other method runs on its
//! Forney form (unchanged when the model already is one), so that the plain
//! and optimized variants of one instance share a single mini-bucket tree.

use std::time::Instant;

use anyhow::Context;
use clap::ValueEnum;
use gmbe_core::elimination::MiniBucketTree;
use gmbe_core::model::to_forney;
use gmbe_core::{
    build_minibucket_tree, default_order, optimize_bound, run_be, run_mbe, run_wmbe, BoundResult,
    Direction, EliminationError, FactorGraph, ForneyGraph, Method, OptimizeError, OptimizerConfig,
};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    Be,
    Mbe,
    Wmbe,
    /// Reverse-Hölder lower bound with fixed weights.
    WmbeLower,
    WmbeW,
    WmbeTheta,
    WmbeWtheta,
    WmbeG,
    WmbeWg,
}

impl MethodArg {
    pub fn optimizer(self) -> Option<Method> {
        Some(match self {
            MethodArg::Wmbe => Method::Wmbe,
            MethodArg::WmbeW => Method::WmbeW,
            MethodArg::WmbeTheta => Method::WmbeTheta,
            MethodArg::WmbeWtheta => Method::WmbeWTheta,
            MethodArg::WmbeG => Method::WmbeG,
            MethodArg::WmbeWg => Method::WmbeWG,
            _ => return None,
        })
    }

    pub fn direction(self) -> Direction {
        match self {
            MethodArg::WmbeLower => Direction::Lower,
            _ => Direction::Upper,
        }
    }

    /// Tag used in reports and CSV rows.
    pub fn tag(self) -> &'static str {
        match self {
            MethodArg::Be => "BE",
            MethodArg::Mbe => "MBE",
            MethodArg::WmbeLower => "WMBE",
            m => m.optimizer().unwrap().tag(),
        }
    }

    pub fn name(self) -> String {
        self.to_possible_value().unwrap().get_name().to_string()
    }
}

/// A model together with its Forney form and a default elimination order.
pub struct Instance {
    pub graph: FactorGraph,
    pub forney: ForneyGraph,
}

impl Instance {
    pub fn new(graph: FactorGraph) -> anyhow::Result<Self> {
        let (forney, _) = to_forney(&graph).context("converting to Forney form")?;
        Ok(Instance { graph, forney })
    }

    fn tree(&self, ibound: usize, direction: Direction) -> Result<MiniBucketTree, EliminationError> {
        let g = self.forney.as_factor_graph();
        build_minibucket_tree(g, &default_order(g), ibound, direction)
    }

    pub fn exact(&self) -> Result<BoundResult, RunError> {
        let start = Instant::now();
        let z = run_be(&self.graph, &default_order(&self.graph)).map_err(RunError::from)?;
        if z.sign() <= 0 {
            return Err(RunError::Failed(format!("Z is not positive (sign {})", z.sign())));
        }
        Ok(BoundResult {
            method: "BE".into(),
            direction: Direction::Upper,
            log_bound: z.ln_abs(),
            trace: Vec::new(),
            wall_time_s: start.elapsed().as_secs_f64(),
        })
    }

    pub fn run(&self, method: MethodArg, ibound: usize, iterations: usize) -> Result<BoundResult, RunError> {
        let g = self.forney.as_factor_graph();
        match method {
            MethodArg::Be => self.exact(),
            MethodArg::Mbe => Ok(run_mbe(g, &self.tree(ibound, Direction::Upper)?)?),
            MethodArg::WmbeLower => Ok(run_wmbe(g, &self.tree(ibound, Direction::Lower)?)?),
            MethodArg::Wmbe => Ok(run_wmbe(g, &self.tree(ibound, Direction::Upper)?)?),
            m => {
                let config = OptimizerConfig::for_method(m.optimizer().unwrap()).with_iterations(iterations);
                let res = optimize_bound(&self.forney, &self.tree(ibound, Direction::Upper)?, &config)?;
                if let Some(w) = res.trace.windows(2).find(|w| w[1] > w[0]) {
                    return Err(RunError::Failed(format!(
                        "optimizer trace increased from {} to {}",
                        w[0], w[1]
                    )));
                }
                Ok(res)
            }
        }
    }
}

/// Skips are expected outcomes (the model does not fit the ibound); failures
/// are not.
#[derive(Debug, Clone, PartialEq)]
pub enum RunError {
    Skipped(String),
    Failed(String),
}

impl RunError {
    pub fn status(&self) -> String {
        match self {
            RunError::Skipped(m) => format!("skipped: {m}"),
            RunError::Failed(m) => format!("error: {m}"),
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.status())
    }
}

impl std::error::Error for RunError {}

impl From<EliminationError> for RunError {
    fn from(e: EliminationError) -> Self {
        match e {
            EliminationError::IboundTooSmall { .. } => RunError::Skipped(e.to_string()),
            e => RunError::Failed(e.to_string()),
        }
    }
}

impl From<OptimizeError> for RunError {
    fn from(e: OptimizeError) -> Self {
        match e {
            OptimizeError::Elimination(e) => e.into(),
            e => RunError::Failed(e.to_string()),
        }
    }
}
