use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, ValueEnum};
use gmbe_core::io::emit_uai;
use gmbe_core::model::{gen_forney_3regular, gen_ising_grid, gen_symmetric_forney, ising_to_forney};
use gmbe_core::FactorGraph;
use serde::Serialize;

use crate::{sidecar, usage, Failure};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Pairwise Ising spin glass on a square grid.
    IsingGrid,
    /// 3-regular Forney-style model with Gaussian log-factors.
    #[value(name = "forney-3reg")]
    #[serde(rename = "forney-3reg")]
    Forney3reg,
    /// 3-regular Forney-style model with flip-symmetric factors.
    Symmetric,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub model: Family,
    #[arg(long, default_value_t = 10)]
    pub rows: usize,
    #[arg(long, default_value_t = 10)]
    pub cols: usize,
    /// Number of factors of a 3-regular model (even).
    #[arg(long, default_value_t = 180)]
    pub factors: usize,
    /// Variance of the field potentials of an Ising grid.
    #[arg(long, default_value_t = 0.1)]
    pub field: f64,
    /// Write an Ising grid in its plaquette (Forney-style) form.
    #[arg(long)]
    pub levin_nave: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct GenArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    /// Interaction strength (variance of the couplings or log-factors).
    #[arg(long = "t", default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output UAI file; a JSON sidecar is written next to it. Prints to
    /// stdout when absent.
    #[arg(short, long)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

impl ModelArgs {
    /// The model a generator call describes. Ising grids come back in
    /// plaquette form when `forney` is set.
    pub fn build(&self, t: f64, seed: u64, forney: bool) -> anyhow::Result<FactorGraph> {
        Ok(match self.model {
            Family::IsingGrid => {
                let grid = gen_ising_grid(self.rows, self.cols, t, self.field, seed)?;
                if forney {
                    ising_to_forney(&grid.graph, self.rows, self.cols)?.into_factor_graph()
                } else {
                    grid.graph
                }
            }
            Family::Forney3reg => gen_forney_3regular(self.factors, t, seed)?.into_factor_graph(),
            Family::Symmetric => gen_symmetric_forney(self.factors, t, seed)?.into_factor_graph(),
        })
    }

    pub fn id(&self, t: f64, seed: u64) -> String {
        match self.model {
            Family::IsingGrid => format!("ising-{}x{}-t{t}-s{seed}", self.rows, self.cols),
            Family::Forney3reg => format!("forney3reg-{}-t{t}-s{seed}", self.factors),
            Family::Symmetric => format!("symmetric-{}-t{t}-s{seed}", self.factors),
        }
    }
}

pub fn cmd_gen(args: &GenArgs) -> Result<(), Failure> {
    if !(args.t >= 0.0 && args.t.is_finite()) {
        return Err(usage(format!("--t must be finite and non-negative, got {}", args.t)));
    }
    let g = args
        .model
        .build(args.t, args.seed, args.model.levin_nave)
        .map_err(Failure::Usage)?;
    let text = emit_uai(&g).map_err(anyhow::Error::from)?;
    match &args.output {
        None => print!("{text}"),
        Some(path) => {
            std::fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
            sidecar::write(path, "gen", args)?;
        }
    }
    Ok(())
}
