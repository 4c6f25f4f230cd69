use crate::logspace::SignedLog;
use crate::tensor::{checked_size, row_major_strides, MAX_TABLE_ENTRIES};

use super::{ModelError, VarId};

/// A dense real-valued table over an ordered tuple of discrete variables.
///
/// Entries are indexed row-major by scope order (the last scope variable varies
/// fastest) and stored as signed log-magnitudes, so gauge-transformed factors
/// with negative entries are representable.
#[derive(Clone, Debug, PartialEq)]
pub struct Factor {
    scope: Vec<VarId>,
    cards: Vec<usize>,
    values: Vec<SignedLog>,
}

impl Factor {
    pub fn new(
        scope: Vec<VarId>,
        cards: Vec<usize>,
        values: Vec<SignedLog>,
    ) -> Result<Self, ModelError> {
        if scope.len() != cards.len() {
            return Err(ModelError::ScopeCardMismatch {
                scope: scope.len(),
                cards: cards.len(),
            });
        }
        for (i, v) in scope.iter().enumerate() {
            if scope[..i].contains(v) {
                return Err(ModelError::DuplicateScopeVariable(*v));
            }
            if cards[i] == 0 {
                return Err(ModelError::ZeroCardinality(*v));
            }
        }
        let expected = checked_size(&cards)
            .filter(|&n| n <= MAX_TABLE_ENTRIES)
            .ok_or_else(|| ModelError::TableTooLarge(cards.clone()))?;
        if values.len() != expected {
            return Err(ModelError::TableLength {
                expected,
                got: values.len(),
            });
        }
        Ok(Factor {
            scope,
            cards,
            values,
        })
    }

    /// Builds a factor from linear-domain values.
    pub fn from_linear(
        scope: Vec<VarId>,
        cards: Vec<usize>,
        values: &[f64],
    ) -> Result<Self, ModelError> {
        if let Some(index) = values.iter().position(|x| !x.is_finite()) {
            return Err(ModelError::InvalidValue {
                index,
                reason: "non-finite",
            });
        }
        Self::new(
            scope,
            cards,
            values.iter().map(|&x| SignedLog::from_f64(x)).collect(),
        )
    }

    /// Builds a positive factor from log-values (`-inf` is a zero entry).
    pub fn from_log(
        scope: Vec<VarId>,
        cards: Vec<usize>,
        log_values: &[f64],
    ) -> Result<Self, ModelError> {
        if let Some(index) = log_values
            .iter()
            .position(|x| x.is_nan() || *x == f64::INFINITY)
        {
            return Err(ModelError::InvalidValue {
                index,
                reason: "log-value is NaN or +inf",
            });
        }
        Self::new(
            scope,
            cards,
            log_values.iter().map(|&x| SignedLog::from_ln(x)).collect(),
        )
    }

    /// All-ones factor.
    pub fn uniform(scope: Vec<VarId>, cards: Vec<usize>) -> Result<Self, ModelError> {
        let n = checked_size(&cards)
            .filter(|&n| n <= MAX_TABLE_ENTRIES)
            .ok_or_else(|| ModelError::TableTooLarge(cards.clone()))?;
        Self::new(scope, cards, vec![SignedLog::ONE; n])
    }

    /// Equality constraint `δ(x_1 = … = x_k)`: one on the diagonal, zero elsewhere.
    pub fn equality(scope: Vec<VarId>, card: usize) -> Result<Self, ModelError> {
        let cards = vec![card; scope.len()];
        let n = checked_size(&cards)
            .filter(|&n| n <= MAX_TABLE_ENTRIES)
            .ok_or_else(|| ModelError::TableTooLarge(cards.clone()))?;
        let mut values = vec![SignedLog::ZERO; n];
        let step: usize = row_major_strides(&cards).iter().sum();
        for s in 0..card {
            values[s * step] = SignedLog::ONE;
        }
        Self::new(scope, cards, values)
    }

    #[inline]
    pub fn scope(&self) -> &[VarId] {
        &self.scope
    }

    #[inline]
    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    #[inline]
    pub fn values(&self) -> &[SignedLog] {
        &self.values
    }

    #[inline]
    pub fn arity(&self) -> usize {
        self.scope.len()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn position(&self, v: VarId) -> Option<usize> {
        self.scope.iter().position(|&u| u == v)
    }

    pub fn strides(&self) -> Vec<usize> {
        row_major_strides(&self.cards)
    }

    /// Row-major index of a full assignment given in scope order.
    pub fn index_of(&self, states: &[usize]) -> usize {
        debug_assert_eq!(states.len(), self.scope.len());
        states
            .iter()
            .zip(&self.cards)
            .fold(0, |acc, (&s, &c)| acc * c + s)
    }

    pub fn value(&self, states: &[usize]) -> SignedLog {
        self.values[self.index_of(states)]
    }

    /// Linear-domain copy of the table.
    pub fn to_linear(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.to_f64()).collect()
    }

    /// `ln|f|` for every entry.
    pub fn log_abs(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.ln_abs()).collect()
    }

    pub fn has_negative(&self) -> bool {
        self.values.iter().any(|v| v.sign() < 0)
    }

    /// Replaces the table, keeping scope and cardinalities.
    pub fn with_values(&self, values: Vec<SignedLog>) -> Result<Self, ModelError> {
        Self::new(self.scope.clone(), self.cards.clone(), values)
    }

    pub(crate) fn set_values(&mut self, values: Vec<SignedLog>) {
        assert_eq!(values.len(), self.values.len());
        self.values = values;
    }

    pub(crate) fn rename(&mut self, from: VarId, to: VarId) {
        for v in &mut self.scope {
            if *v == from {
                *v = to;
            }
        }
    }
}
