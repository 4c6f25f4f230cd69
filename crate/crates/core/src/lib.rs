//! Guaranteed bounds on the partition function of discrete graphical models.
//!
//! The crate computes exact partition functions by bucket elimination, upper
//! and lower bounds by weighted mini-bucket elimination (WMBE), and tightens
//! the upper bound by gradient descent over gauge transformations, Hölder
//! weights and reparameterizations of a Forney-style model.
//!
//! Module map:
//!
//! * [`model`]: factors, factor graphs, Forney-style graphs and generators.
//! * [`gauge`]: gauge matrices, the conjugacy constraint, reparameterizations.
//! * [`elimination`]: elimination orders, bucket elimination, mini-bucket
//!   trees and the WMBE/MBE bounds.
//! * [`optimize`]: auxiliary marginals, gradients and the bound optimizer.
//! * [`oracle`]: brute-force reference computations.
//! * [`io`]: UAI model files and CSV result rows.

pub mod elimination;
pub mod gauge;
pub mod io;
pub mod logspace;
pub mod model;
pub mod optimize;
pub mod oracle;
pub(crate) mod tensor;

pub use elimination::{
    build_minibucket_tree, default_order, run_be, run_mbe, run_wmbe, wsum, BoundResult,
    Direction, EliminationError, EliminationOrder, MiniBucketTree,
};
pub use gauge::{GaugeError, GaugeSet, Reparam};
pub use logspace::SignedLog;
pub use model::{Factor, FactorGraph, FactorId, ForneyGraph, ModelError, VarId};
pub use optimize::{optimize_bound, Method, OptimizeError, OptimizerConfig};
