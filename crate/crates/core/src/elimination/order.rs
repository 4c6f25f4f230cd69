use std::collections::BTreeSet;

use crate::model::{FactorGraph, VarId};

use super::EliminationError;

/// A permutation of a model's variables giving the order in which they are
/// summed out.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EliminationOrder {
    order: Vec<VarId>,
    position: Vec<usize>,
}

impl EliminationOrder {
    pub fn new(order: Vec<VarId>) -> Result<Self, EliminationError> {
        let n = order.len();
        let mut position = vec![usize::MAX; n];
        for (i, v) in order.iter().enumerate() {
            if v.index() >= n || position[v.index()] != usize::MAX {
                return Err(EliminationError::InvalidOrder(format!(
                    "{v} is out of range or repeated in an order of length {n}"
                )));
            }
            position[v.index()] = i;
        }
        Ok(EliminationOrder { order, position })
    }

    /// Variables in increasing id order.
    pub fn identity(n: usize) -> Self {
        EliminationOrder {
            order: (0..n).map(VarId).collect(),
            position: (0..n).collect(),
        }
    }

    #[inline]
    pub fn as_slice(&self) -> &[VarId] {
        &self.order
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.order.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Step at which `v` is eliminated.
    #[inline]
    pub fn position(&self, v: VarId) -> usize {
        self.position[v.index()]
    }

    /// Bucket scope sizes of exact elimination: for each step, the number of
    /// variables (the eliminated one included) its bucket touches.
    pub fn bucket_scopes(&self, g: &FactorGraph) -> Vec<usize> {
        let mut adj = interaction_graph(g);
        let mut sizes = Vec::with_capacity(self.len());
        for &v in &self.order {
            let nb: Vec<usize> = adj[v.index()].iter().copied().collect();
            sizes.push(nb.len() + 1);
            eliminate(&mut adj, v.index(), &nb);
        }
        sizes
    }

    /// Largest bucket scope of exact elimination, i.e. the `ibound` at which
    /// mini-bucket elimination stops splitting.
    pub fn max_bucket_scope(&self, g: &FactorGraph) -> usize {
        self.bucket_scopes(g).into_iter().max().unwrap_or(0)
    }

    /// Induced width: largest bucket scope minus one.
    pub fn induced_width(&self, g: &FactorGraph) -> usize {
        self.max_bucket_scope(g).saturating_sub(1)
    }
}

fn interaction_graph(g: &FactorGraph) -> Vec<BTreeSet<usize>> {
    let mut adj = vec![BTreeSet::new(); g.num_vars()];
    for f in g.factors() {
        for &u in f.scope() {
            for &v in f.scope() {
                if u != v {
                    adj[u.index()].insert(v.index());
                }
            }
        }
    }
    adj
}

fn eliminate(adj: &mut [BTreeSet<usize>], v: usize, nb: &[usize]) {
    for &a in nb {
        adj[a].remove(&v);
        for &b in nb {
            if a != b {
                adj[a].insert(b);
            }
        }
    }
    adj[v].clear();
}

fn fill_in(adj: &[BTreeSet<usize>], v: usize) -> usize {
    let nb: Vec<usize> = adj[v].iter().copied().collect();
    let mut missing = 0;
    for (i, &a) in nb.iter().enumerate() {
        for &b in &nb[i + 1..] {
            if !adj[a].contains(&b) {
                missing += 1;
            }
        }
    }
    missing
}

/// Greedy min-fill order; ties go to the smallest variable id.
pub fn default_order(g: &FactorGraph) -> EliminationOrder {
    let n = g.num_vars();
    let mut adj = interaction_graph(g);
    let mut score: Vec<usize> = (0..n).map(|v| fill_in(&adj, v)).collect();
    let mut done = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| !done[v])
            .min_by_key(|&v| (score[v], v))
            .expect("variables remain");
        let nb: Vec<usize> = adj[v].iter().copied().collect();
        eliminate(&mut adj, v, &nb);
        done[v] = true;
        order.push(VarId(v));
        let mut touched = BTreeSet::new();
        for &a in &nb {
            touched.insert(a);
            touched.extend(adj[a].iter().copied());
        }
        for u in touched {
            if !done[u] {
                score[u] = fill_in(&adj, u);
            }
        }
    }
    EliminationOrder::new(order).expect("min-fill emits a permutation")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Factor;

    fn chain(n: usize) -> FactorGraph {
        let mut fs = vec![Factor::uniform(vec![VarId(0)], vec![2]).unwrap()];
        for i in 0..n - 1 {
            fs.push(Factor::uniform(vec![VarId(i), VarId(i + 1)], vec![2, 2]).unwrap());
        }
        fs.push(Factor::uniform(vec![VarId(n - 1)], vec![2]).unwrap());
        FactorGraph::new(vec![2; n], fs).unwrap()
    }

    #[test]
    fn chain_eliminates_from_an_end() {
        let g = chain(6);
        let o = default_order(&g);
        assert_eq!(o.as_slice()[0], VarId(0));
        assert_eq!(o.induced_width(&g), 1);
    }

    #[test]
    fn rejects_non_permutations() {
        assert!(EliminationOrder::new(vec![VarId(0), VarId(0)]).is_err());
        assert!(EliminationOrder::new(vec![VarId(2), VarId(0)]).is_err());
    }

    #[test]
    fn order_is_a_permutation() {
        let g = crate::model::gen_forney_3regular(20, 1.0, 1).unwrap();
        let o = default_order(&g);
        let mut seen: Vec<usize> = o.as_slice().iter().map(|v| v.index()).collect();
        seen.sort_unstable();
        assert_eq!(seen, (0..g.num_vars()).collect::<Vec<_>>());
    }
}
