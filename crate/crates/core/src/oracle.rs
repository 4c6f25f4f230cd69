//! Exhaustive reference computations. Everything here enumerates the full
//! assignment space and shares no code path with the elimination engines
//! beyond factor storage.

use thiserror::Error;

use crate::elimination::MiniBucketTree;
use crate::logspace::{weighted_logsumexp, SignedLog};
use crate::model::{FactorGraph, FactorId};
use crate::tensor::{checked_size, row_major_strides, unravel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("enumeration needs {states:?} states, budget is {budget}")]
    BudgetExceeded { states: Option<usize>, budget: usize },
    #[error("objective is not finite at coordinate {coordinate} (step {step})")]
    NonFiniteEvaluation { coordinate: usize, step: f64 },
    #[error("oracle input is inconsistent: {0}")]
    Mismatch(String),
}

/// Cap on the number of joint assignments an oracle may enumerate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleBudget {
    pub max_states: usize,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget { max_states: 1 << 20 }
    }
}

impl OracleBudget {
    fn admit(&self, cards: &[usize]) -> Result<usize, OracleError> {
        match checked_size(cards) {
            Some(s) if s <= self.max_states => Ok(s),
            s => Err(OracleError::BudgetExceeded {
                states: s,
                budget: self.max_states,
            }),
        }
    }
}

/// `Z` by enumeration with the default budget.
pub fn brute_z(g: &FactorGraph) -> Result<SignedLog, OracleError> {
    brute_z_with(g, OracleBudget::default())
}

/// `Z = Σ_x Π_α f_α(x_α)` by enumeration, in signed-log arithmetic.
pub fn brute_z_with(g: &FactorGraph, budget: OracleBudget) -> Result<SignedLog, OracleError> {
    let size = budget.admit(g.cards())?;
    let mut terms = Vec::with_capacity(size);
    let mut x = vec![0usize; g.num_vars()];
    for i in 0..size {
        unravel(i, g.cards(), &mut x);
        let mut t = SignedLog::ONE;
        for f in g.factors() {
            let idx = f.scope().iter().zip(f.cards()).fold(0, |acc, (v, &c)| acc * c + x[v.index()]);
            t = t * f.values()[idx];
        }
        terms.push(t);
    }
    Ok(SignedLog::sum(terms.iter().copied()))
}

/// `ln|Π_α f_α(x̄_α)|` over every split assignment. Node 0 (eliminated first)
/// is the fastest axis.
fn split_log_product(
    g: &FactorGraph,
    tree: &MiniBucketTree,
    budget: OracleBudget,
) -> Result<Vec<f64>, OracleError> {
    tree.check_model(g).map_err(|e| OracleError::Mismatch(e.to_string()))?;
    let cards = tree.node_cards();
    let rev: Vec<usize> = cards.iter().rev().copied().collect();
    let size = budget.admit(cards)?;
    let n = cards.len();
    let mut x = vec![0usize; n];
    let mut rev_state = vec![0usize; n];
    let mut out = Vec::with_capacity(size);
    for i in 0..size {
        unravel(i, &rev, &mut rev_state);
        for k in 0..n {
            x[k] = rev_state[n - 1 - k];
        }
        let mut t = 0.0;
        for (a, f) in g.factors().iter().enumerate() {
            let scope = tree.factor_scope(FactorId(a));
            let idx = scope.iter().zip(f.cards()).fold(0, |acc, (&k, &c)| acc * c + x[k]);
            t += f.values()[idx].ln_abs();
        }
        out.push(t);
    }
    Ok(out)
}

/// Literal nested weighted summation over the split model with the tree's
/// weights, without mini-bucket factorization.
pub fn brute_wmbe(g: &FactorGraph, tree: &MiniBucketTree) -> Result<f64, OracleError> {
    brute_wmbe_with(g, tree, tree.weights(), OracleBudget::default())
}

pub fn brute_wmbe_with(
    g: &FactorGraph,
    tree: &MiniBucketTree,
    weights: &[f64],
    budget: OracleBudget,
) -> Result<f64, OracleError> {
    let mut cur = split_log_product(g, tree, budget)?;
    for (k, &d) in tree.node_cards().iter().enumerate() {
        cur = cur
            .chunks(d)
            .map(|c| weighted_logsumexp(c, weights[k]))
            .collect();
    }
    Ok(cur[0])
}

/// Factor marginals of the auxiliary distribution evaluated from its chain
/// rule definition: `q(x̄) = Π_k (Z_k(x̄_{k:}) / Z_{k+1}(x̄_{k+1:}))^{1/w_k}`
/// where `Z_{k+1}` is the weighted sum of `Z_k` over node `k`. Each table is
/// laid out like the factor's own table.
pub fn brute_q(g: &FactorGraph, tree: &MiniBucketTree) -> Result<Vec<Vec<f64>>, OracleError> {
    let w = tree.weights();
    let cards = tree.node_cards();
    let n = cards.len();
    let mut levels = vec![split_log_product(g, tree, OracleBudget::default())?];
    for k in 0..n {
        let next = levels[k]
            .chunks(cards[k])
            .map(|c| weighted_logsumexp(c, w[k]))
            .collect();
        levels.push(next);
    }
    // ln q over the full split space, node 0 fastest
    let size = levels[0].len();
    let mut ln_q = vec![0.0; size];
    let mut stride = 1;
    for k in 0..n {
        for (i, q) in ln_q.iter_mut().enumerate() {
            let hi = i / stride;
            *q += (levels[k][hi] - levels[k + 1][hi / cards[k]]) / w[k];
        }
        stride *= cards[k];
    }
    let node_strides: Vec<usize> = {
        let mut s = vec![1; n];
        for k in 1..n {
            s[k] = s[k - 1] * cards[k - 1];
        }
        s
    };
    let mut out = Vec::with_capacity(g.num_factors());
    for (a, f) in g.factors().iter().enumerate() {
        let scope = tree.factor_scope(FactorId(a));
        let fstrides = row_major_strides(f.cards());
        let mut table = vec![0.0; f.len()];
        for (i, &lq) in ln_q.iter().enumerate() {
            let idx: usize = scope
                .iter()
                .zip(&fstrides)
                .map(|(&k, &s)| (i / node_strides[k]) % cards[k] * s)
                .sum();
            table[idx] += lq.exp();
        }
        out.push(table);
    }
    Ok(out)
}

/// Central differences `(f(x + h e_i) - f(x - h e_i)) / 2h` per coordinate.
pub fn fd_gradient(
    mut f: impl FnMut(&[f64]) -> f64,
    point: &[f64],
    h: f64,
) -> Result<Vec<f64>, OracleError> {
    let mut x = point.to_vec();
    let mut grad = Vec::with_capacity(point.len());
    for i in 0..point.len() {
        x[i] = point[i] + h;
        let up = f(&x);
        x[i] = point[i] - h;
        let down = f(&x);
        x[i] = point[i];
        if !(up.is_finite() && down.is_finite()) {
            return Err(OracleError::NonFiniteEvaluation { coordinate: i, step: h });
        }
        grad.push((up - down) / (2.0 * h));
    }
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elimination::{build_minibucket_tree, default_order, run_wmbe, Direction};
    use crate::model::{gen_forney_3regular, Factor, VarId};

    #[test]
    fn hand_sum() {
        let fa = Factor::from_linear(vec![VarId(0)], vec![2], &[1., 2.]).unwrap();
        let fb = Factor::from_linear(vec![VarId(0)], vec![2], &[3., 4.]).unwrap();
        let g = FactorGraph::new(vec![2], vec![fa, fb]).unwrap();
        assert!((brute_z(&g).unwrap().to_f64() - 11.0).abs() < 1e-12);
    }

    #[test]
    fn all_ones() {
        let fs = (0..5)
            .map(|i| Factor::uniform(vec![VarId(i), VarId((i + 1) % 5)], vec![3, 3]).unwrap())
            .collect();
        let g = FactorGraph::new(vec![3; 5], fs).unwrap();
        assert!((brute_z(&g).unwrap().ln_abs() - 5.0 * 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn negative_entries_cancel() {
        let fa = Factor::from_linear(vec![VarId(0)], vec![2], &[1., -1.]).unwrap();
        let fb = Factor::from_linear(vec![VarId(0)], vec![2], &[2., 2.]).unwrap();
        let g = FactorGraph::new(vec![2], vec![fa, fb]).unwrap();
        assert!(brute_z(&g).unwrap().is_zero());
    }

    #[test]
    fn budget_is_enforced() {
        let g = gen_forney_3regular(20, 1.0, 0).unwrap();
        assert!(matches!(
            brute_z_with(&g, OracleBudget { max_states: 1000 }),
            Err(OracleError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn unsplit_wmbe_is_z() {
        let g = gen_forney_3regular(8, 1.0, 1).unwrap();
        let t = build_minibucket_tree(&g, &default_order(&g), 99, Direction::Upper).unwrap();
        let z = brute_z(&g).unwrap().ln_abs();
        assert!((brute_wmbe(&g, &t).unwrap() - z).abs() < 1e-10);
    }

    #[test]
    fn split_wmbe_matches_engine_and_bounds() {
        for seed in 0..5 {
            let g = gen_forney_3regular(8, 1.0, seed).unwrap();
            let o = default_order(&g);
            let z = brute_z(&g).unwrap().ln_abs();
            for dir in [Direction::Upper, Direction::Lower] {
                let t = build_minibucket_tree(&g, &o, 3, dir).unwrap();
                let b = brute_wmbe(&g, &t).unwrap();
                let e = run_wmbe(&g, &t).unwrap().log_bound;
                assert!((b - e).abs() <= 1e-10 * b.abs().max(1.0));
                match dir {
                    Direction::Upper => assert!(b >= z - 1e-9),
                    Direction::Lower => assert!(b <= z + 1e-9),
                }
            }
        }
    }

    #[test]
    fn brute_q_tables_are_distributions() {
        let g = gen_forney_3regular(6, 1.0, 2).unwrap();
        let t = build_minibucket_tree(&g, &default_order(&g), 3, Direction::Upper).unwrap();
        for table in brute_q(&g, &t).unwrap() {
            let s: f64 = table.iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
            assert!(table.iter().all(|&p| p >= 0.0));
        }
    }

    #[test]
    fn fd_of_quadratic() {
        let g = fd_gradient(|x| x[0] * x[0] + 3.0 * x[0] * x[1], &[1.0, 2.0], 1e-4).unwrap();
        assert!((g[0] - 8.0).abs() < 1e-8);
        assert!((g[1] - 3.0).abs() < 1e-8);
        assert!(fd_gradient(|x| 1.0 / x[0], &[0.0], 1e-4).is_ok());
        assert!(fd_gradient(|x| x[0].ln(), &[0.0], 1e-4).is_err());
    }
}
