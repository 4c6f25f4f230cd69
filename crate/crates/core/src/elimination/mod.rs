//! Bucket elimination, weighted mini-bucket elimination and its limits.

mod eval;
mod order;
mod tree;

use std::fmt;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::logspace::{weighted_logsumexp, SignedLog};
use crate::model::{FactorGraph, FactorId, VarId};

pub(crate) use eval::{forward, log_bound_with};
pub use order::{default_order, EliminationOrder};
pub use tree::{build_minibucket_tree, MiniBucket, MiniBucketTree};

/// Which side of `Z` a bound lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Upper,
    Lower,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Upper => "upper",
            Direction::Lower => "lower",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EliminationError {
    #[error("Hölder weight of {0} is zero or non-finite")]
    ZeroWeight(VarId),
    #[error("bucket over {scope} variables exceeds the dense table limit")]
    WidthExceeded { scope: usize },
    #[error("factor {factor} has arity {arity}, larger than ibound {ibound}")]
    IboundTooSmall {
        factor: FactorId,
        arity: usize,
        ibound: usize,
    },
    #[error("invalid elimination order: {0}")]
    InvalidOrder(String),
    #[error("invalid Hölder weights: {0}")]
    InvalidWeights(String),
    #[error("{0}")]
    ModelMismatch(String),
    #[error("operation needs an {expected} bound tree")]
    WrongDirection { expected: Direction },
}

/// A bound (or exact value) of `ln Z` with its optimization history.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundResult {
    pub method: String,
    pub direction: Direction,
    pub log_bound: f64,
    /// Bound after initialization and after every outer iteration.
    pub trace: Vec<f64>,
    pub wall_time_s: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Reduction {
    Weighted(f64),
    Max,
}

/// Weighted absolute summation `(Σ |ψ|^{1/w})^w`, always nonnegative.
pub fn wsum(values: &[SignedLog], w: f64) -> Result<SignedLog, ZeroWeightError> {
    if w == 0.0 || !w.is_finite() {
        return Err(ZeroWeightError);
    }
    let logs: Vec<f64> = values.iter().map(|v| v.ln_abs()).collect();
    Ok(SignedLog::from_ln(weighted_logsumexp(&logs, w)))
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("wsum weight must be nonzero and finite")]
pub struct ZeroWeightError;

/// Exact `Z` by bucket elimination with signed arithmetic.
pub fn run_be(g: &FactorGraph, order: &EliminationOrder) -> Result<SignedLog, EliminationError> {
    let tree = build_minibucket_tree(g, order, usize::MAX, Direction::Upper)?;
    Ok(eval::signed_forward(g, &tree))
}

/// Weighted mini-bucket bound with the tree's current weights.
///
/// Upper trees give `ln Z_UB >= ln Z`; lower trees give `ln Z_LB <= ln Z` for
/// models with nonnegative factors. Signs of factor entries are ignored.
pub fn run_wmbe(g: &FactorGraph, tree: &MiniBucketTree) -> Result<BoundResult, EliminationError> {
    let start = Instant::now();
    tree.check_model(g)?;
    tree.check_weights()?;
    let b = log_bound_with(g, tree, tree.weights());
    Ok(BoundResult {
        method: "WMBE".into(),
        direction: tree.direction(),
        log_bound: b,
        trace: vec![b],
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Mini-bucket upper bound: the first mini-bucket of each variable sums, the
/// others maximize.
pub fn run_mbe(g: &FactorGraph, tree: &MiniBucketTree) -> Result<BoundResult, EliminationError> {
    let start = Instant::now();
    tree.check_model(g)?;
    if tree.direction() != Direction::Upper {
        return Err(EliminationError::WrongDirection {
            expected: Direction::Upper,
        });
    }
    let ops = |id: usize| {
        if tree.nodes[id].copy == 0 {
            Reduction::Weighted(1.0)
        } else {
            Reduction::Max
        }
    };
    let b = forward(g, tree, ops, false).log_bound;
    Ok(BoundResult {
        method: "MBE".into(),
        direction: Direction::Upper,
        log_bound: b,
        trace: vec![b],
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{gen_forney_3regular, Factor};
    use crate::oracle::brute_z;
    use proptest::prelude::*;

    fn lin(xs: &[f64]) -> Vec<SignedLog> {
        xs.iter().map(|&x| SignedLog::from_f64(x)).collect()
    }

    #[test]
    fn wsum_examples() {
        assert!((wsum(&lin(&[3., 4.]), 0.5).unwrap().to_f64() - 5.0).abs() < 1e-12);
        assert!((wsum(&lin(&[-3., 4.]), 0.5).unwrap().to_f64() - 5.0).abs() < 1e-12);
        assert!((wsum(&lin(&[3., 4.]), 1e-6).unwrap().to_f64() - 4.0).abs() < 1e-4);
        assert!((wsum(&lin(&[3., 4.]), 1e-9).unwrap().to_f64() - 4.0).abs() < 1e-6);
        assert_eq!(wsum(&lin(&[3., 4.]), 0.0), Err(ZeroWeightError));
    }

    #[test]
    fn be_hand_sum() {
        let fa = Factor::from_linear(vec![VarId(0)], vec![2], &[1., 2.]).unwrap();
        let fb = Factor::from_linear(vec![VarId(0)], vec![2], &[3., 4.]).unwrap();
        let g = FactorGraph::new(vec![2], vec![fa, fb]).unwrap();
        let z = run_be(&g, &default_order(&g)).unwrap();
        assert!((z.to_f64() - 11.0).abs() < 1e-12);
    }

    #[test]
    fn be_matches_enumeration() {
        for seed in 0..5 {
            let g = gen_forney_3regular(8, 1.0, seed).unwrap();
            let z = run_be(&g, &default_order(&g)).unwrap();
            let b = brute_z(&g).unwrap();
            assert!((z.ln_abs() - b.ln_abs()).abs() < 1e-10);
        }
    }

    #[test]
    fn mbe_without_split_is_be() {
        let g = gen_forney_3regular(8, 1.0, 3).unwrap();
        let o = default_order(&g);
        let t = build_minibucket_tree(&g, &o, 99, Direction::Upper).unwrap();
        let z = run_be(&g, &o).unwrap().ln_abs();
        assert!((run_mbe(&g, &t).unwrap().log_bound - z).abs() < 1e-10);
        assert!((run_wmbe(&g, &t).unwrap().log_bound - z).abs() < 1e-10);
    }

    proptest! {
        #[test]
        fn holder_inequality(
            a in prop::collection::vec(0.01f64..10.0, 4),
            b in prop::collection::vec(0.01f64..10.0, 4),
            w1 in 0.05f64..1.0,
            w2 in 0.05f64..1.0,
        ) {
            let w0 = w1 + w2;
            let prod: Vec<SignedLog> = a.iter().zip(&b).map(|(x, y)| SignedLog::from_f64(x * y)).collect();
            let lhs = wsum(&prod, w0).unwrap().ln_abs();
            let rhs = wsum(&lin(&a), w1).unwrap().ln_abs() + wsum(&lin(&b), w2).unwrap().ln_abs();
            prop_assert!(lhs <= rhs + 1e-12);
        }

        #[test]
        fn wsum_one_is_plain_sum(xs in prop::collection::vec(0.0f64..100.0, 1..10)) {
            let s: f64 = xs.iter().sum();
            let ws = wsum(&lin(&xs), 1.0).unwrap().to_f64();
            prop_assert!((ws - s).abs() <= 1e-12 * s.max(1e-300));
        }
    }
}
