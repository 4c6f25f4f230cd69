use std::collections::BTreeMap;
use std::ops::Deref;

use super::{Factor, FactorGraph, FactorId, ModelError, VarId};
use crate::logspace::SignedLog;

/// A factor graph certified to have exactly two factors adjacent to every
/// variable.
#[derive(Clone, Debug, PartialEq)]
pub struct ForneyGraph {
    graph: FactorGraph,
}

impl ForneyGraph {
    /// The two factors adjacent to `v`. The first (lower id) is the "free" edge
    /// of the variable's gauge pair, the second the conjugate edge.
    #[inline]
    pub fn edge(&self, v: VarId) -> (FactorId, FactorId) {
        let n = self.graph.neighbors(v);
        (n[0], n[1])
    }

    pub fn as_factor_graph(&self) -> &FactorGraph {
        &self.graph
    }

    pub fn into_factor_graph(self) -> FactorGraph {
        self.graph
    }

    /// Replaces the table of one factor; scope and cardinalities stay fixed.
    pub fn set_factor_values(&mut self, a: FactorId, values: Vec<SignedLog>) {
        self.graph.set_factor_values(a, values);
    }
}

impl Deref for ForneyGraph {
    type Target = FactorGraph;

    fn deref(&self) -> &FactorGraph {
        &self.graph
    }
}

impl AsRef<FactorGraph> for ForneyGraph {
    fn as_ref(&self) -> &FactorGraph {
        &self.graph
    }
}

impl AsRef<FactorGraph> for FactorGraph {
    fn as_ref(&self) -> &FactorGraph {
        self
    }
}

/// Certifies `g` as Forney-style, listing every variable whose degree is not 2.
pub fn validate_forney(g: FactorGraph) -> Result<ForneyGraph, ModelError> {
    let bad: Vec<(VarId, usize)> = g
        .vars()
        .map(|v| (v, g.degree(v)))
        .filter(|&(_, d)| d != 2)
        .collect();
    if bad.is_empty() {
        Ok(ForneyGraph { graph: g })
    } else {
        Err(ModelError::DegreeViolation(bad))
    }
}

/// Provenance of variables introduced by [`to_forney`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CopyMap {
    origin: Vec<VarId>,
    copies: BTreeMap<VarId, Vec<VarId>>,
}

impl CopyMap {
    /// True when no variable was split.
    pub fn is_empty(&self) -> bool {
        self.copies.is_empty()
    }

    /// Original variable behind a variable of the converted graph.
    pub fn original(&self, v: VarId) -> VarId {
        self.origin[v.index()]
    }

    /// Copies of a split original variable (the first copy reuses its id).
    pub fn copies_of(&self, v: VarId) -> Option<&[VarId]> {
        self.copies.get(&v).map(Vec::as_slice)
    }

    pub fn split_variables(&self) -> impl Iterator<Item = (&VarId, &Vec<VarId>)> {
        self.copies.iter()
    }
}

/// Converts an arbitrary factor graph into an equivalent Forney-style graph.
///
/// A variable of degree `k > 2` is replaced by `k` copies, one per incident
/// factor, tied together by an arity-`k` equality factor; a degree-1 variable
/// gets an all-ones singleton partner. Degree-2 variables are untouched, so a
/// graph that is already Forney-style comes back unchanged. The partition
/// function is preserved exactly.
pub fn to_forney(g: &FactorGraph) -> Result<(ForneyGraph, CopyMap), ModelError> {
    let (mut cards, mut factors) = g.clone().into_parts();
    let mut origin: Vec<VarId> = g.vars().collect();
    let mut copies = BTreeMap::new();
    let mut extra = Vec::new();
    for v in g.vars() {
        let incident = g.neighbors(v);
        let card = g.card(v);
        match incident.len() {
            2 => {}
            1 => extra.push(Factor::uniform(vec![v], vec![card])?),
            _ => {
                let mut ids = vec![v];
                for &a in &incident[1..] {
                    let c = VarId(cards.len());
                    cards.push(card);
                    origin.push(v);
                    factors[a.index()].rename(v, c);
                    ids.push(c);
                }
                extra.push(Factor::equality(ids.clone(), card)?);
                copies.insert(v, ids);
            }
        }
    }
    factors.extend(extra);
    let graph = validate_forney(FactorGraph::new(cards, factors)?)?;
    Ok((graph, CopyMap { origin, copies }))
}
