use crate::logspace::{weighted_logsumexp, SignedLog};
use crate::model::FactorGraph;

use super::{MiniBucketTree, Reduction};

/// Per-node tables and messages of one forward pass over `|f|`.
pub(crate) struct Forward {
    /// `ln` of each bucket table, `x_self * msg_len + j` layout.
    pub tables: Vec<Vec<f64>>,
    /// `ln` of each outgoing message over the node's message scope.
    pub messages: Vec<Vec<f64>>,
    pub log_bound: f64,
}

fn reduce(table: &[f64], card: usize, msg_len: usize, op: Reduction, scratch: &mut Vec<f64>) -> Vec<f64> {
    (0..msg_len)
        .map(|j| {
            scratch.clear();
            scratch.extend((0..card).map(|x| table[x * msg_len + j]));
            match op {
                Reduction::Weighted(w) => weighted_logsumexp(scratch, w),
                Reduction::Max => scratch.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            }
        })
        .collect()
}

fn bucket_table(g: &FactorGraph, tree: &MiniBucketTree, id: usize, messages: &[Vec<f64>]) -> Vec<f64> {
    let node = &tree.nodes[id];
    let mut table = vec![0.0; node.table_len()];
    for (&a, map) in node.factors.iter().zip(&node.factor_maps) {
        let vals = g.factors()[a].values();
        for (t, &k) in table.iter_mut().zip(map) {
            *t += vals[k].ln_abs();
        }
    }
    for (&c, map) in node.children.iter().zip(&node.child_maps) {
        let msg = &messages[c];
        for (t, &k) in table.iter_mut().zip(map) {
            *t += msg[k];
        }
    }
    table
}

fn constant_part(g: &FactorGraph, tree: &MiniBucketTree) -> f64 {
    tree.factor_home
        .iter()
        .zip(g.factors())
        .filter(|(h, _)| h.is_none())
        .map(|(_, f)| f.values()[0].ln_abs())
        .sum()
}

/// Forward pass of the weighted bound with one reduction per node. Tables are
/// only retained when `keep_tables` is set.
pub(crate) fn forward(
    g: &FactorGraph,
    tree: &MiniBucketTree,
    ops: impl Fn(usize) -> Reduction,
    keep_tables: bool,
) -> Forward {
    let n = tree.nodes.len();
    let mut messages: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut tables = Vec::with_capacity(if keep_tables { n } else { 0 });
    let mut log_bound = constant_part(g, tree);
    let mut scratch = Vec::new();
    for id in 0..n {
        let node = &tree.nodes[id];
        let table = bucket_table(g, tree, id, &messages);
        let msg = reduce(&table, node.card, node.msg_len, ops(id), &mut scratch);
        if node.parent.is_none() {
            log_bound += msg[0];
        }
        messages.push(msg);
        if keep_tables {
            tables.push(table);
        }
    }
    Forward {
        tables,
        messages,
        log_bound,
    }
}

/// `ln` of the weighted bound for explicit per-node weights.
pub(crate) fn log_bound_with(g: &FactorGraph, tree: &MiniBucketTree, weights: &[f64]) -> f64 {
    forward(g, tree, |id| Reduction::Weighted(weights[id]), false).log_bound
}

/// Exact signed elimination over an unsplit tree.
pub(crate) fn signed_forward(g: &FactorGraph, tree: &MiniBucketTree) -> SignedLog {
    let n = tree.nodes.len();
    let mut messages: Vec<Vec<SignedLog>> = Vec::with_capacity(n);
    let mut z = SignedLog::ONE;
    for (a, f) in g.factors().iter().enumerate() {
        if tree.factor_home[a].is_none() {
            z = z * f.values()[0];
        }
    }
    let mut column = Vec::new();
    for id in 0..n {
        let node = &tree.nodes[id];
        let mut table = vec![SignedLog::ONE; node.table_len()];
        for (&a, map) in node.factors.iter().zip(&node.factor_maps) {
            let vals = g.factors()[a].values();
            for (t, &k) in table.iter_mut().zip(map) {
                *t = *t * vals[k];
            }
        }
        for (&c, map) in node.children.iter().zip(&node.child_maps) {
            let msg = &messages[c];
            for (t, &k) in table.iter_mut().zip(map) {
                *t = *t * msg[k];
            }
        }
        let msg: Vec<SignedLog> = (0..node.msg_len)
            .map(|j| {
                column.clear();
                column.extend((0..node.card).map(|x| table[x * node.msg_len + j]));
                SignedLog::sum(column.iter().copied())
            })
            .collect();
        if node.parent.is_none() {
            z = z * msg[0];
        }
        messages.push(msg);
    }
    z
}
