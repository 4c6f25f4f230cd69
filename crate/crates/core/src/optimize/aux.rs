use crate::elimination::{forward, MiniBucketTree, Reduction};
use crate::model::{FactorGraph, FactorId, VarId};
use crate::tensor::row_major_strides;

use super::OptimizeError;

/// Marginals of the auxiliary distribution `q` induced by the nested weighted
/// sums: one table per mini-bucket (over its own and its message variables)
/// and one per factor (over the factor's split scope, laid out like the
/// factor's table).
#[derive(Clone, Debug, PartialEq)]
pub struct AuxMarginals {
    nodes: Vec<Vec<f64>>,
    factors: Vec<Vec<f64>>,
}

impl AuxMarginals {
    pub fn factor(&self, a: FactorId) -> &[f64] {
        &self.factors[a.index()]
    }

    pub fn factors(&self) -> &[Vec<f64>] {
        &self.factors
    }

    /// Joint marginal of a mini-bucket, `x_self * msg_len + j` layout.
    pub fn node(&self, id: usize) -> &[f64] {
        &self.nodes[id]
    }

    /// Marginal of `x_v` (as seen by factor `a`) under `q_a`.
    pub fn var_marginal(&self, g: &FactorGraph, a: FactorId, v: VarId) -> Vec<f64> {
        let f = g.factor(a);
        let pos = f.position(v).expect("variable in factor scope");
        axis_marginal(&self.factors[a.index()], f.cards(), pos)
    }
}

pub(crate) fn axis_marginal(table: &[f64], cards: &[usize], axis: usize) -> Vec<f64> {
    let stride = row_major_strides(cards)[axis];
    let mut out = vec![0.0; cards[axis]];
    for (i, &p) in table.iter().enumerate() {
        out[(i / stride) % cards[axis]] += p;
    }
    out
}

/// Forward pass storing bucket tables, then a backward pass from the roots
/// that multiplies each bucket's conditional `q(x_k | message scope)` with
/// the marginal its parent assigns to the message scope.
pub fn aux_marginals(g: &FactorGraph, tree: &MiniBucketTree) -> Result<AuxMarginals, OptimizeError> {
    tree.check_model(g)?;
    let w = tree.weights();
    let fwd = forward(g, tree, |id| Reduction::Weighted(w[id]), true);
    let nodes = tree.nodes();
    let mut joint: Vec<Vec<f64>> = vec![Vec::new(); nodes.len()];
    // marginal over each node's message scope, filled by its parent
    let mut incoming: Vec<Vec<f64>> = nodes.iter().map(|b| vec![0.0; b.msg_len]).collect();
    for id in (0..nodes.len()).rev() {
        let node = &nodes[id];
        if node.parent.is_none() {
            incoming[id] = vec![1.0];
        }
        let table = &fwd.tables[id];
        let msg = &fwd.messages[id];
        let m = node.msg_len;
        let mut q = vec![0.0; table.len()];
        for j in 0..m {
            let pj = incoming[id][j];
            if pj == 0.0 {
                continue;
            }
            if msg[j] == f64::NEG_INFINITY || !msg[j].is_finite() {
                return Err(OptimizeError::NumericalUnderflow { node: id });
            }
            for x in 0..node.card {
                q[x * m + j] = pj * ((table[x * m + j] - msg[j]) / w[id]).exp();
            }
        }
        for (&c, map) in node.children.iter().zip(&node.child_maps) {
            let target = &mut incoming[c];
            for (&p, &k) in q.iter().zip(map) {
                target[k] += p;
            }
        }
        joint[id] = q;
    }
    let factors = g
        .factors()
        .iter()
        .enumerate()
        .map(|(a, f)| match tree.factor_home[a] {
            Some(h) => {
                let pos = nodes[h].factors.iter().position(|&b| b == a).unwrap();
                let mut t = vec![0.0; f.len()];
                for (&p, &k) in joint[h].iter().zip(&nodes[h].factor_maps[pos]) {
                    t[k] += p;
                }
                t
            }
            None => vec![1.0],
        })
        .collect();
    Ok(AuxMarginals {
        nodes: joint,
        factors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elimination::{build_minibucket_tree, default_order, Direction};
    use crate::model::{gen_forney_3regular, gen_symmetric_forney, Factor};
    use crate::oracle::brute_q;

    #[test]
    fn single_variable() {
        let fa = Factor::from_linear(vec![VarId(0)], vec![2], &[1., 2.]).unwrap();
        let fb = Factor::from_linear(vec![VarId(0)], vec![2], &[3., 4.]).unwrap();
        let g = FactorGraph::new(vec![2], vec![fa, fb]).unwrap();
        let t = build_minibucket_tree(&g, &default_order(&g), 1, Direction::Upper).unwrap();
        let q = aux_marginals(&g, &t).unwrap();
        assert!((q.factor(FactorId(0))[0] - 3.0 / 11.0).abs() < 1e-14);
        assert!((q.factor(FactorId(1))[1] - 8.0 / 11.0).abs() < 1e-14);
    }

    #[test]
    fn matches_chain_rule_oracle() {
        for seed in 0..6 {
            let g = gen_forney_3regular(6, 1.0, seed).unwrap();
            for dir in [Direction::Upper, Direction::Lower] {
                let t = build_minibucket_tree(&g, &default_order(&g), 3, dir).unwrap();
                let q = aux_marginals(&g, &t).unwrap();
                let want = brute_q(&g, &t).unwrap();
                for (a, b) in q.factors().iter().zip(&want) {
                    for (x, y) in a.iter().zip(b) {
                        assert!((x - y).abs() < 1e-8, "seed {seed}: {x} vs {y}");
                    }
                }
            }
        }
    }

    #[test]
    fn tables_are_normalized() {
        let g = gen_forney_3regular(16, 1.0, 3).unwrap();
        let t = build_minibucket_tree(&g, &default_order(&g), 4, Direction::Upper).unwrap();
        let q = aux_marginals(&g, &t).unwrap();
        for table in q.factors() {
            assert!((table.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(table.iter().all(|&p| p >= 0.0));
        }
    }

    #[test]
    fn symmetric_model_has_uniform_variable_marginals() {
        let g = gen_symmetric_forney(10, 1.0, 1).unwrap();
        let t = build_minibucket_tree(&g, &default_order(&g), 3, Direction::Upper).unwrap();
        assert!(t.is_split());
        let q = aux_marginals(&g, &t).unwrap();
        for (a, f) in g.factors().iter().enumerate() {
            for &v in f.scope() {
                for p in q.var_marginal(&g, FactorId(a), v) {
                    assert!((p - 0.5).abs() < 1e-9);
                }
            }
        }
    }
}
