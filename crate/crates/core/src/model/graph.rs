use super::{Factor, FactorId, ModelError, VarId};

/// Bipartite variable/factor graph with per-variable cardinalities.
///
/// Construction checks that scopes reference declared variables with matching
/// cardinalities and that every variable appears in at least one factor.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorGraph {
    cards: Vec<usize>,
    factors: Vec<Factor>,
    adjacency: Vec<Vec<FactorId>>,
}

impl FactorGraph {
    pub fn new(cards: Vec<usize>, factors: Vec<Factor>) -> Result<Self, ModelError> {
        let num_vars = cards.len();
        if let Some(v) = cards.iter().position(|&c| c == 0) {
            return Err(ModelError::ZeroCardinality(VarId(v)));
        }
        let mut adjacency = vec![Vec::new(); num_vars];
        for (a, f) in factors.iter().enumerate() {
            for (&v, &c) in f.scope().iter().zip(f.cards()) {
                if v.index() >= num_vars {
                    return Err(ModelError::UnknownVariable {
                        factor: FactorId(a),
                        var: v,
                        num_vars,
                    });
                }
                if cards[v.index()] != c {
                    return Err(ModelError::CardinalityMismatch {
                        factor: FactorId(a),
                        var: v,
                        expected: cards[v.index()],
                        got: c,
                    });
                }
                adjacency[v.index()].push(FactorId(a));
            }
        }
        if let Some(v) = adjacency.iter().position(Vec::is_empty) {
            return Err(ModelError::IsolatedVariable(VarId(v)));
        }
        Ok(FactorGraph {
            cards,
            factors,
            adjacency,
        })
    }

    #[inline]
    pub fn num_vars(&self) -> usize {
        self.cards.len()
    }

    #[inline]
    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    #[inline]
    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    #[inline]
    pub fn card(&self, v: VarId) -> usize {
        self.cards[v.index()]
    }

    #[inline]
    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    #[inline]
    pub fn factor(&self, a: FactorId) -> &Factor {
        &self.factors[a.index()]
    }

    /// Factors adjacent to `v`, in increasing id order.
    #[inline]
    pub fn neighbors(&self, v: VarId) -> &[FactorId] {
        &self.adjacency[v.index()]
    }

    #[inline]
    pub fn degree(&self, v: VarId) -> usize {
        self.adjacency[v.index()].len()
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> {
        (0..self.num_vars()).map(VarId)
    }

    pub fn max_arity(&self) -> usize {
        self.factors.iter().map(Factor::arity).max().unwrap_or(0)
    }

    /// Size of the full joint assignment space, `None` on overflow.
    pub fn state_space(&self) -> Option<usize> {
        crate::tensor::checked_size(&self.cards)
    }

    pub fn has_negative(&self) -> bool {
        self.factors.iter().any(Factor::has_negative)
    }

    pub fn into_parts(self) -> (Vec<usize>, Vec<Factor>) {
        (self.cards, self.factors)
    }

    /// Replaces the table of one factor; scope and cardinalities stay fixed.
    pub(crate) fn set_factor_values(&mut self, a: FactorId, values: Vec<crate::SignedLog>) {
        self.factors[a.index()].set_values(values);
    }
}
