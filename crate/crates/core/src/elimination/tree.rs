use std::collections::BTreeSet;

use crate::model::{FactorGraph, FactorId, VarId};
use crate::tensor::{checked_size, projection_map, MAX_TABLE_ENTRIES};

use super::{Direction, EliminationError, EliminationOrder};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Item {
    Factor(usize),
    Message(usize),
}

/// One mini-bucket: a copy `var^(copy)` of an original variable together with
/// the factors and incoming messages grouped with it.
#[derive(Clone, Debug, PartialEq)]
pub struct MiniBucket {
    pub(crate) var: VarId,
    pub(crate) copy: usize,
    pub(crate) factors: Vec<usize>,
    pub(crate) children: Vec<usize>,
    pub(crate) parent: Option<usize>,
    /// Original variables of the group, the eliminated one included.
    pub(crate) orig_scope: Vec<VarId>,
    /// (original variable, eliminating node) for every outgoing-message variable.
    pub(crate) msg_map: Vec<(VarId, usize)>,
    /// Split variables (node ids, ascending) of the outgoing message.
    pub(crate) msg_scope: Vec<usize>,
    pub(crate) card: usize,
    pub(crate) msg_len: usize,
    /// Table index map for every factor, aligned with `factors`.
    pub(crate) factor_maps: Vec<Vec<usize>>,
    /// Table index map for every child message, aligned with `children`.
    pub(crate) child_maps: Vec<Vec<usize>>,
}

impl MiniBucket {
    pub fn var(&self) -> VarId {
        self.var
    }

    /// Index of this mini-bucket within its variable's bucket.
    pub fn copy(&self) -> usize {
        self.copy
    }

    pub fn factors(&self) -> impl Iterator<Item = FactorId> + '_ {
        self.factors.iter().map(|&a| FactorId(a))
    }

    pub fn parent(&self) -> Option<usize> {
        self.parent
    }

    pub fn scope_size(&self) -> usize {
        self.orig_scope.len()
    }

    /// Entries of the bucket table: `card * prod(message cards)`.
    pub fn table_len(&self) -> usize {
        self.card * self.msg_len
    }
}

/// Mini-bucket partition of a model under a fixed elimination order.
///
/// Every mini-bucket is one split variable of the weighted bound; the node list
/// is the modified elimination order over split variables. Each node carries a
/// Hölder weight, and the weights of one original variable's copies sum to 1.
#[derive(Clone, Debug, PartialEq)]
pub struct MiniBucketTree {
    order: EliminationOrder,
    ibound: usize,
    direction: Direction,
    pub(crate) nodes: Vec<MiniBucket>,
    weights: Vec<f64>,
    copies: Vec<Vec<usize>>,
    pub(crate) factor_home: Vec<Option<usize>>,
    pub(crate) factor_scope: Vec<Vec<usize>>,
    cards: Vec<usize>,
    factor_cards: Vec<Vec<usize>>,
}

/// Builds the mini-bucket tree for `g` under `order`.
///
/// Bucket contents are sorted by scope size (descending, stable) and placed
/// first-fit into mini-buckets whose joint scope stays within `ibound`
/// variables. Each mini-bucket's message joins the bucket of its earliest
/// remaining variable. Weights start uniform for upper bounds; for lower
/// bounds the first copy gets `1 + (R-1)/2` and the others `-1/2`.
pub fn build_minibucket_tree(
    g: &FactorGraph,
    order: &EliminationOrder,
    ibound: usize,
    direction: Direction,
) -> Result<MiniBucketTree, EliminationError> {
    if order.len() != g.num_vars() {
        return Err(EliminationError::ModelMismatch(format!(
            "order covers {} variables, model has {}",
            order.len(),
            g.num_vars()
        )));
    }
    for (a, f) in g.factors().iter().enumerate() {
        if f.arity() > ibound {
            return Err(EliminationError::IboundTooSmall {
                factor: FactorId(a),
                arity: f.arity(),
                ibound,
            });
        }
    }

    let n = g.num_vars();
    let first = |scope: &BTreeSet<VarId>| scope.iter().map(|&v| order.position(v)).min();
    let mut buckets: Vec<Vec<(Item, BTreeSet<VarId>)>> = vec![Vec::new(); n];
    let mut factor_home = vec![None; g.num_factors()];
    for (a, f) in g.factors().iter().enumerate() {
        let scope: BTreeSet<VarId> = f.scope().iter().copied().collect();
        if let Some(p) = first(&scope) {
            buckets[p].push((Item::Factor(a), scope));
        }
    }

    let mut nodes: Vec<MiniBucket> = Vec::new();
    let mut copies = vec![Vec::new(); n];
    for (step, &v) in order.as_slice().iter().enumerate() {
        let mut items = std::mem::take(&mut buckets[step]);
        items.sort_by_key(|(_, s)| std::cmp::Reverse(s.len()));
        let mut groups: Vec<(BTreeSet<VarId>, Vec<Item>)> = Vec::new();
        for (item, scope) in items {
            let slot = groups
                .iter()
                .position(|(u, _)| u.union(&scope).count() <= ibound);
            match slot {
                Some(k) => {
                    groups[k].0.extend(scope);
                    groups[k].1.push(item);
                }
                None => groups.push((scope, vec![item])),
            }
        }
        for (copy, (scope, members)) in groups.into_iter().enumerate() {
            let id = nodes.len();
            let mut factors = Vec::new();
            let mut children = Vec::new();
            for item in members {
                match item {
                    Item::Factor(a) => {
                        factor_home[a] = Some(id);
                        factors.push(a);
                    }
                    Item::Message(c) => {
                        nodes[c].parent = Some(id);
                        children.push(c);
                    }
                }
            }
            let mut rest = scope.clone();
            rest.remove(&v);
            if let Some(p) = first(&rest) {
                buckets[p].push((Item::Message(id), rest));
            }
            copies[v.index()].push(id);
            nodes.push(MiniBucket {
                var: v,
                copy,
                factors,
                children,
                parent: None,
                orig_scope: scope.into_iter().collect(),
                msg_map: Vec::new(),
                msg_scope: Vec::new(),
                card: g.card(v),
                msg_len: 1,
                factor_maps: Vec::new(),
                child_maps: Vec::new(),
            });
        }
    }

    // resolve which copy eliminates each message variable, parents first
    for id in (0..nodes.len()).rev() {
        let Some(p) = nodes[id].parent else { continue };
        let map: Vec<(VarId, usize)> = nodes[id]
            .orig_scope
            .iter()
            .filter(|&&u| u != nodes[id].var)
            .map(|&u| (u, resolve(&nodes[p], p, u)))
            .collect();
        let mut scope: Vec<usize> = map.iter().map(|&(_, k)| k).collect();
        scope.sort_unstable();
        nodes[id].msg_map = map;
        nodes[id].msg_scope = scope;
    }

    let cards: Vec<usize> = nodes.iter().map(|b| b.card).collect();
    let factor_scope: Vec<Vec<usize>> = g
        .factors()
        .iter()
        .enumerate()
        .map(|(a, f)| match factor_home[a] {
            Some(h) => f.scope().iter().map(|&u| resolve(&nodes[h], h, u)).collect(),
            None => Vec::new(),
        })
        .collect();

    for id in 0..nodes.len() {
        let msg_cards: Vec<usize> = nodes[id].msg_scope.iter().map(|&k| cards[k]).collect();
        let mut table_cards = vec![nodes[id].card];
        table_cards.extend(&msg_cards);
        let size = checked_size(&table_cards)
            .filter(|&s| s <= MAX_TABLE_ENTRIES)
            .ok_or(EliminationError::WidthExceeded {
                scope: nodes[id].orig_scope.len(),
            })?;
        let mut table_scope = vec![id];
        table_scope.extend(&nodes[id].msg_scope);
        let factor_maps = nodes[id]
            .factors
            .iter()
            .map(|&a| {
                let inner = &factor_scope[a];
                let inner_cards: Vec<usize> = inner.iter().map(|&k| cards[k]).collect();
                projection_map(&table_scope, &table_cards, inner, &inner_cards)
            })
            .collect();
        let child_maps = nodes[id]
            .children
            .iter()
            .map(|&c| {
                let inner = &nodes[c].msg_scope;
                let inner_cards: Vec<usize> = inner.iter().map(|&k| cards[k]).collect();
                projection_map(&table_scope, &table_cards, inner, &inner_cards)
            })
            .collect();
        let node = &mut nodes[id];
        node.msg_len = size / node.card;
        node.factor_maps = factor_maps;
        node.child_maps = child_maps;
    }

    let weights = initial_weights(&nodes, &copies, direction);
    Ok(MiniBucketTree {
        order: order.clone(),
        ibound,
        direction,
        nodes,
        weights,
        copies,
        factor_home,
        factor_scope,
        cards,
        factor_cards: g.factors().iter().map(|f| f.cards().to_vec()).collect(),
    })
}

fn resolve(node: &MiniBucket, id: usize, u: VarId) -> usize {
    if node.var == u {
        id
    } else {
        node.msg_map
            .iter()
            .find(|&&(x, _)| x == u)
            .map(|&(_, k)| k)
            .expect("message variable is carried by the parent bucket")
    }
}

fn initial_weights(nodes: &[MiniBucket], copies: &[Vec<usize>], direction: Direction) -> Vec<f64> {
    let mut w = vec![0.0; nodes.len()];
    for ids in copies {
        let r = ids.len() as f64;
        for (k, &id) in ids.iter().enumerate() {
            w[id] = match direction {
                Direction::Upper => 1.0 / r,
                Direction::Lower if k == 0 => 1.0 + 0.5 * (r - 1.0),
                Direction::Lower => -0.5,
            };
        }
    }
    w
}

impl MiniBucketTree {
    pub fn order(&self) -> &EliminationOrder {
        &self.order
    }

    pub fn ibound(&self) -> usize {
        self.ibound
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// Mini-buckets in the modified elimination order.
    pub fn nodes(&self) -> &[MiniBucket] {
        &self.nodes
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Node ids of the copies of an original variable, in creation order.
    pub fn copies(&self, v: VarId) -> &[usize] {
        &self.copies[v.index()]
    }

    /// Number of mini-buckets of the largest bucket.
    pub fn max_split(&self) -> usize {
        self.copies.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Variables eliminated in more than one mini-bucket.
    pub fn split_vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.copies
            .iter()
            .enumerate()
            .filter(|(_, c)| c.len() > 1)
            .map(|(v, _)| VarId(v))
    }

    pub fn is_split(&self) -> bool {
        self.copies.iter().any(|c| c.len() > 1)
    }

    /// Split variables (node ids) of a factor, aligned with its scope.
    pub fn factor_scope(&self, a: FactorId) -> &[usize] {
        &self.factor_scope[a.index()]
    }

    /// Mini-bucket holding a factor (`None` for constant factors).
    pub fn factor_home(&self, a: FactorId) -> Option<usize> {
        self.factor_home[a.index()]
    }

    pub fn node_cards(&self) -> &[usize] {
        &self.cards
    }

    /// Replaces the Hölder weights after checking them against the bound
    /// direction: copies of a variable sum to 1, all positive for upper bounds,
    /// exactly one positive for lower bounds.
    pub fn set_weights(&mut self, weights: Vec<f64>) -> Result<(), EliminationError> {
        check_weights(&self.copies, self.direction, &weights)?;
        self.weights = weights;
        Ok(())
    }

    pub(crate) fn set_weights_unchecked(&mut self, weights: Vec<f64>) {
        debug_assert_eq!(weights.len(), self.weights.len());
        self.weights = weights;
    }

    pub fn check_weights(&self) -> Result<(), EliminationError> {
        check_weights(&self.copies, self.direction, &self.weights)
    }

    /// Structural compatibility with a model (same variables and factor shapes).
    pub fn check_model(&self, g: &FactorGraph) -> Result<(), EliminationError> {
        let same = g.num_vars() == self.copies.len()
            && g.num_factors() == self.factor_cards.len()
            && g
                .factors()
                .iter()
                .zip(&self.factor_cards)
                .all(|(f, c)| f.cards() == c.as_slice());
        if same {
            Ok(())
        } else {
            Err(EliminationError::ModelMismatch(
                "tree was built for a different model".into(),
            ))
        }
    }
}

fn check_weights(
    copies: &[Vec<usize>],
    direction: Direction,
    weights: &[f64],
) -> Result<(), EliminationError> {
    let total: usize = copies.iter().map(Vec::len).sum();
    if weights.len() != total {
        return Err(EliminationError::InvalidWeights(format!(
            "expected {total} weights, got {}",
            weights.len()
        )));
    }
    for (v, ids) in copies.iter().enumerate() {
        let w: Vec<f64> = ids.iter().map(|&k| weights[k]).collect();
        if w.iter().any(|&x| x == 0.0 || !x.is_finite()) {
            return Err(EliminationError::ZeroWeight(VarId(v)));
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(EliminationError::InvalidWeights(format!(
                "weights of x{v} sum to {sum}"
            )));
        }
        let positive = w.iter().filter(|&&x| x > 0.0).count();
        let ok = match direction {
            Direction::Upper => positive == w.len(),
            Direction::Lower => positive == 1,
        };
        if !ok {
            return Err(EliminationError::InvalidWeights(format!(
                "weights of x{v} violate the {direction} sign pattern: {w:?}"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elimination::default_order;
    use crate::model::gen_forney_3regular;

    #[test]
    fn three_regular_splits_at_most_in_two() {
        let g = gen_forney_3regular(20, 1.0, 4).unwrap();
        let o = default_order(&g);
        let t = build_minibucket_tree(&g, &o, 4, Direction::Upper).unwrap();
        assert!(t.is_split());
        assert!(t.max_split() <= 2);
        for v in g.vars() {
            let w: f64 = t.copies(v).iter().map(|&k| t.weights()[k]).sum();
            assert!((w - 1.0).abs() < 1e-12);
        }
        // every factor lives in exactly one mini-bucket
        let mut seen = vec![0; g.num_factors()];
        for b in t.nodes() {
            for a in b.factors() {
                seen[a.index()] += 1;
            }
        }
        assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn registry_round_trip_recovers_variables() {
        let g = gen_forney_3regular(12, 1.0, 2).unwrap();
        let t = build_minibucket_tree(&g, &default_order(&g), 3, Direction::Upper).unwrap();
        let merged: BTreeSet<VarId> = t.nodes().iter().map(|b| b.var()).collect();
        assert_eq!(merged, g.vars().collect());
        for v in g.vars() {
            assert!(t.copies(v).iter().all(|&k| t.nodes()[k].var() == v));
        }
        // split scopes map back onto the factor scopes
        for (a, f) in g.factors().iter().enumerate() {
            let back: Vec<VarId> = t
                .factor_scope(FactorId(a))
                .iter()
                .map(|&k| t.nodes()[k].var())
                .collect();
            assert_eq!(back, f.scope());
        }
    }

    #[test]
    fn large_ibound_means_no_split() {
        let g = gen_forney_3regular(12, 1.0, 2).unwrap();
        let o = default_order(&g);
        let t = build_minibucket_tree(&g, &o, o.max_bucket_scope(&g), Direction::Upper).unwrap();
        assert!(!t.is_split());
        assert_eq!(t.num_nodes(), g.num_vars());
    }

    #[test]
    fn lower_weights_have_one_positive_copy() {
        let g = gen_forney_3regular(20, 1.0, 4).unwrap();
        let t = build_minibucket_tree(&g, &default_order(&g), 3, Direction::Lower).unwrap();
        t.check_weights().unwrap();
        let v = t.split_vars().next().unwrap();
        let w: Vec<f64> = t.copies(v).iter().map(|&k| t.weights()[k]).collect();
        assert_eq!(w, vec![1.5, -0.5]);
    }

    #[test]
    fn rejects_small_ibound() {
        let g = gen_forney_3regular(8, 1.0, 0).unwrap();
        let err = build_minibucket_tree(&g, &default_order(&g), 2, Direction::Upper).unwrap_err();
        assert!(matches!(err, EliminationError::IboundTooSmall { arity: 3, ibound: 2, .. }));
    }

    #[test]
    fn weight_validation() {
        let g = gen_forney_3regular(20, 1.0, 4).unwrap();
        let mut t = build_minibucket_tree(&g, &default_order(&g), 3, Direction::Upper).unwrap();
        let mut w = t.weights().to_vec();
        let v = t.split_vars().next().unwrap();
        let ids = t.copies(v).to_vec();
        w[ids[0]] = 0.9;
        assert!(t.set_weights(w.clone()).is_err());
        w[ids[1]] = 0.1;
        t.set_weights(w).unwrap();
    }
}
