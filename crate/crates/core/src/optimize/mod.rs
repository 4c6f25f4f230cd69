//! Bound tightening: auxiliary marginals, gauge and reparameterization
//! gradients, and the monotone descent driver.

mod aux;
mod grad;
mod state;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::elimination::{Direction, EliminationError};
use crate::gauge::GaugeError;
use crate::model::{FactorId, VarId};

pub use aux::{aux_marginals, AuxMarginals};
pub use grad::{gauge_gradient, reparam_gradient, ZERO_LOG_THRESHOLD};
pub use state::{gauge_step, optimize, optimize_bound, reparam_step, weight_step, OptState};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizeError {
    #[error(transparent)]
    Elimination(#[from] EliminationError),
    #[error(transparent)]
    Gauge(#[from] GaugeError),
    #[error("{factor} entry {index} is zero; the gauge gradient is undefined")]
    ZeroFactorEntry { factor: FactorId, index: usize },
    #[error("auxiliary distribution has a zero normalizer at mini-bucket {node}")]
    NumericalUnderflow { node: usize },
    #[error("every candidate gauge step for {var} is ill-conditioned")]
    SingularGaugeStep { var: VarId },
    #[error("bound optimization needs an {expected} bound tree")]
    WrongDirection { expected: Direction },
    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),
}

/// Step sizes, iteration budget and parameter selection of the optimizer.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerConfig {
    pub mu_gauge: f64,
    pub mu_weight: f64,
    pub mu_theta: f64,
    pub iterations: usize,
    pub gauges: bool,
    pub weights: bool,
    pub reparam: bool,
    /// Step shrink factor of the backtracking search.
    pub backtrack: f64,
    pub max_halvings: usize,
    pub weight_floor: f64,
    /// Log-weight step of the finite-difference weight gradient.
    pub weight_fd_step: f64,
    /// Stop once the bound improves by less than this (relative) over ten
    /// iterations.
    pub rel_tol: Option<f64>,
    /// Reuse one set of auxiliary marginals for a whole gauge sweep.
    pub stale_q: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            mu_gauge: 0.01,
            mu_weight: 0.1,
            mu_theta: 0.1,
            iterations: 150,
            gauges: false,
            weights: false,
            reparam: false,
            backtrack: 0.5,
            max_halvings: 20,
            weight_floor: 1e-3,
            weight_fd_step: 1e-4,
            rel_tol: None,
            stale_q: false,
        }
    }
}

impl OptimizerConfig {
    pub fn for_method(method: Method) -> Self {
        let (gauges, weights, reparam) = method.flags();
        OptimizerConfig {
            gauges,
            weights,
            reparam,
            ..Self::default()
        }
    }

    pub fn with_iterations(mut self, iterations: usize) -> Self {
        self.iterations = iterations;
        self
    }

    pub fn method(&self) -> Method {
        Method::from_flags(self.gauges, self.weights, self.reparam)
    }

    pub fn validate(&self) -> Result<(), OptimizeError> {
        let positive = [
            ("mu_gauge", self.mu_gauge),
            ("mu_weight", self.mu_weight),
            ("mu_theta", self.mu_theta),
            ("weight_fd_step", self.weight_fd_step),
        ];
        for (name, x) in positive {
            if !(x > 0.0 && x.is_finite()) {
                return Err(OptimizeError::InvalidConfig(format!("{name} must be positive, got {x}")));
            }
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(OptimizeError::InvalidConfig(format!(
                "backtrack factor must lie in (0, 1), got {}",
                self.backtrack
            )));
        }
        if !(self.weight_floor > 0.0 && self.weight_floor < 0.5) {
            return Err(OptimizeError::InvalidConfig(format!(
                "weight floor must lie in (0, 0.5), got {}",
                self.weight_floor
            )));
        }
        Ok(())
    }
}

/// Optimized bound variants, named by the parameters they tune.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Wmbe,
    WmbeW,
    WmbeTheta,
    WmbeWTheta,
    WmbeG,
    WmbeWG,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Wmbe,
        Method::WmbeW,
        Method::WmbeTheta,
        Method::WmbeWTheta,
        Method::WmbeG,
        Method::WmbeWG,
    ];

    /// `(gauges, weights, reparam)`.
    pub fn flags(self) -> (bool, bool, bool) {
        match self {
            Method::Wmbe => (false, false, false),
            Method::WmbeW => (false, true, false),
            Method::WmbeTheta => (false, false, true),
            Method::WmbeWTheta => (false, true, true),
            Method::WmbeG => (true, false, false),
            Method::WmbeWG => (true, true, false),
        }
    }

    /// Gauges subsume reparameterizations, so both flags together name the
    /// gauge method.
    pub fn from_flags(gauges: bool, weights: bool, reparam: bool) -> Self {
        match (gauges, weights, reparam) {
            (true, true, _) => Method::WmbeWG,
            (true, false, _) => Method::WmbeG,
            (false, true, true) => Method::WmbeWTheta,
            (false, false, true) => Method::WmbeTheta,
            (false, true, false) => Method::WmbeW,
            (false, false, false) => Method::Wmbe,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Method::Wmbe => "WMBE",
            Method::WmbeW => "WMBE-w",
            Method::WmbeTheta => "WMBE-theta",
            Method::WmbeWTheta => "WMBE-wtheta",
            Method::WmbeG => "WMBE-G",
            Method::WmbeWG => "WMBE-wG",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let lower = s.to_ascii_lowercase();
        Method::ALL
            .into_iter()
            .find(|m| m.tag().to_ascii_lowercase() == lower)
            .ok_or_else(|| format!("unknown method {s:?}"))
    }
}
