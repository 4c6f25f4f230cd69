//! Gauge transformations of Forney-style models and reparameterizations as
//! their diagonal special case.

use std::fmt;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::logspace::SignedLog;
use crate::model::{Factor, FactorId, ForneyGraph, VarId};
use crate::tensor::row_major_strides;

/// Condition number above which a gauge matrix is treated as singular.
pub const MAX_CONDITION: f64 = 1e8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaugeError {
    #[error("gauge for axis {axis} is {rows}x{cols}, variable has cardinality {card}")]
    DimensionMismatch {
        axis: usize,
        rows: usize,
        cols: usize,
        card: usize,
    },
    #[error("expected {expected} gauge matrices, got {got}")]
    WrongCount { expected: usize, got: usize },
    #[error("gauge constraint violated at {var}: deviation {deviation:e}")]
    ConstraintViolated { var: VarId, deviation: f64 },
    #[error("gauge matrix is singular or ill-conditioned (condition number {condition:e})")]
    IllConditioned { condition: f64 },
    #[error("no well-conditioned gauge found for {var} after {attempts} attempts")]
    GenerationFailed { var: VarId, attempts: usize },
    #[error("{factor} is not adjacent to {var}")]
    NotAnEdge { var: VarId, factor: FactorId },
    #[error("transformed factor is invalid: {0}")]
    Model(#[from] crate::model::ModelError),
}

/// 2-norm condition number; `inf` for singular matrices.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min <= 0.0 || !min.is_finite() {
        f64::INFINITY
    } else {
        max / min
    }
}

/// `(G^T)^{-1}`, refusing matrices whose condition number exceeds
/// [`MAX_CONDITION`].
pub fn conjugate(g: &DMatrix<f64>) -> Result<DMatrix<f64>, GaugeError> {
    let condition = condition_number(g);
    if condition > MAX_CONDITION {
        return Err(GaugeError::IllConditioned { condition });
    }
    g.transpose()
        .try_inverse()
        .ok_or(GaugeError::IllConditioned { condition })
}

/// Applies `G` to one axis of a linear-domain table:
/// `out(.., a, ..) = Σ_b G(a, b) t(.., b, ..)`.
pub(crate) fn transform_axis(values: &[f64], cards: &[usize], axis: usize, g: &DMatrix<f64>) -> Vec<f64> {
    let d = cards[axis];
    let stride = row_major_strides(cards)[axis];
    let block = stride * d;
    let mut out = vec![0.0; values.len()];
    for base in (0..values.len()).step_by(block) {
        for inner in 0..stride {
            let at = |s: usize| base + s * stride + inner;
            for a in 0..d {
                let mut acc = 0.0;
                for b in 0..d {
                    acc += g[(a, b)] * values[at(b)];
                }
                out[at(a)] = acc;
            }
        }
    }
    out
}

/// Gauge transform of one factor, one matrix per scope position:
/// `f̂(x) = Σ_{x'} f(x') Π_v G_v(x_v, x'_v)`. The result may have negative
/// entries.
pub fn gauge_transform_factor(f: &Factor, gauges: &[DMatrix<f64>]) -> Result<Factor, GaugeError> {
    if gauges.len() != f.arity() {
        return Err(GaugeError::WrongCount {
            expected: f.arity(),
            got: gauges.len(),
        });
    }
    for (axis, (g, &card)) in gauges.iter().zip(f.cards()).enumerate() {
        if g.nrows() != card || g.ncols() != card {
            return Err(GaugeError::DimensionMismatch {
                axis,
                rows: g.nrows(),
                cols: g.ncols(),
                card,
            });
        }
    }
    let active: Vec<usize> = (0..gauges.len())
        .filter(|&k| gauges[k] != DMatrix::identity(f.cards()[k], f.cards()[k]))
        .collect();
    if active.is_empty() {
        return Ok(f.clone());
    }
    let mut vals = f.to_linear();
    for axis in active {
        vals = transform_axis(&vals, f.cards(), axis, &gauges[axis]);
    }
    Ok(f.with_values(vals.into_iter().map(SignedLog::from_f64).collect())?)
}

/// One gauge matrix per (variable, factor) edge of a Forney-style model.
///
/// For each variable the edge to its lower-id factor is "free" and the other is
/// "conjugate"; a valid set satisfies `G_free^T G_conj = I`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeSet {
    edges: Vec<(FactorId, FactorId)>,
    free: Vec<DMatrix<f64>>,
    conj: Vec<DMatrix<f64>>,
}

impl GaugeSet {
    pub fn identity(g: &ForneyGraph) -> Self {
        let eye = |v: VarId| DMatrix::identity(g.card(v), g.card(v));
        GaugeSet {
            edges: g.vars().map(|v| g.edge(v)).collect(),
            free: g.vars().map(eye).collect(),
            conj: g.vars().map(eye).collect(),
        }
    }

    /// Sets the free-edge matrices and derives each conjugate by inversion.
    pub fn from_free(g: &ForneyGraph, free: Vec<DMatrix<f64>>) -> Result<Self, GaugeError> {
        let conj = free.iter().map(conjugate).collect::<Result<Vec<_>, _>>()?;
        Self::from_pairs(g, free, conj)
    }

    /// Both matrices of every variable given explicitly; the constraint is not
    /// enforced here (see [`check_constraint`]).
    pub fn from_pairs(
        g: &ForneyGraph,
        free: Vec<DMatrix<f64>>,
        conj: Vec<DMatrix<f64>>,
    ) -> Result<Self, GaugeError> {
        for list in [&free, &conj] {
            if list.len() != g.num_vars() {
                return Err(GaugeError::WrongCount {
                    expected: g.num_vars(),
                    got: list.len(),
                });
            }
        }
        for (v, (a, b)) in g.vars().zip(free.iter().zip(&conj)) {
            let card = g.card(v);
            for m in [a, b] {
                if m.nrows() != card || m.ncols() != card {
                    return Err(GaugeError::DimensionMismatch {
                        axis: v.index(),
                        rows: m.nrows(),
                        cols: m.ncols(),
                        card,
                    });
                }
            }
        }
        Ok(GaugeSet {
            edges: g.vars().map(|v| g.edge(v)).collect(),
            free,
            conj,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.free.len()
    }

    /// `(free factor, conjugate factor)` of a variable.
    pub fn edge(&self, v: VarId) -> (FactorId, FactorId) {
        self.edges[v.index()]
    }

    pub fn free(&self, v: VarId) -> &DMatrix<f64> {
        &self.free[v.index()]
    }

    pub fn conj(&self, v: VarId) -> &DMatrix<f64> {
        &self.conj[v.index()]
    }

    /// Matrix on edge `(v, a)`.
    pub fn get(&self, v: VarId, a: FactorId) -> Result<&DMatrix<f64>, GaugeError> {
        let (f, c) = self.edges[v.index()];
        if a == f {
            Ok(&self.free[v.index()])
        } else if a == c {
            Ok(&self.conj[v.index()])
        } else {
            Err(GaugeError::NotAnEdge { var: v, factor: a })
        }
    }
}

impl fmt::Display for GaugeSet {
    /// One line per edge: variable, factor, then row-major entries.
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (v, &(a, b)) in self.edges.iter().enumerate() {
            for (factor, m) in [(a, &self.free[v]), (b, &self.conj[v])] {
                write!(out, "x{v} {factor}")?;
                for r in 0..m.nrows() {
                    for c in 0..m.ncols() {
                        write!(out, " {}", m[(r, c)])?;
                    }
                }
                writeln!(out)?;
            }
        }
        Ok(())
    }
}

/// Per-variable deviation `max |G_free^T G_conj - I|`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintReport {
    pub deviation: Vec<f64>,
}

impl ConstraintReport {
    pub fn max(&self) -> f64 {
        self.deviation.iter().copied().fold(0.0, f64::max)
    }

    /// Variable with the largest deviation.
    pub fn worst(&self) -> Option<(VarId, f64)> {
        self.deviation
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(v, &d)| (VarId(v), d))
    }
}

pub fn pair_deviation(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let p = a.transpose() * b;
    let eye = DMatrix::<f64>::identity(p.nrows(), p.ncols());
    (p - eye).amax()
}

pub fn check_constraint(gs: &GaugeSet) -> ConstraintReport {
    ConstraintReport {
        deviation: gs
            .free
            .iter()
            .zip(&gs.conj)
            .map(|(a, b)| pair_deviation(a, b))
            .collect(),
    }
}

/// Tolerance on the constraint deviation accepted by [`apply_gauges`].
pub const CONSTRAINT_TOL: f64 = 1e-8;

/// Transforms every factor with the matrices on its edges.
pub fn apply_gauges(g: &ForneyGraph, gs: &GaugeSet) -> Result<ForneyGraph, GaugeError> {
    if gs.num_vars() != g.num_vars() {
        return Err(GaugeError::WrongCount {
            expected: g.num_vars(),
            got: gs.num_vars(),
        });
    }
    if let Some((var, deviation)) = check_constraint(gs).worst() {
        if deviation >= CONSTRAINT_TOL {
            return Err(GaugeError::ConstraintViolated { var, deviation });
        }
    }
    let mut out = g.clone();
    for (a, f) in g.factors().iter().enumerate() {
        let mats = f
            .scope()
            .iter()
            .map(|&v| gs.get(v, FactorId(a)).cloned())
            .collect::<Result<Vec<_>, _>>()?;
        let t = gauge_transform_factor(f, &mats)?;
        out.set_factor_values(FactorId(a), t.values().to_vec());
    }
    Ok(out)
}

const MAX_ATTEMPTS: usize = 100;
const RANDOM_MAX_CONDITION: f64 = 1e3;

/// Random constraint-satisfying gauges: each free matrix is
/// `I + scale * E` with `E` uniform on `(-1, 1)`, redrawn until its condition
/// number is below 1e3; the conjugate is its inverse transpose.
pub fn random_valid_gauges(g: &ForneyGraph, scale: f64, seed: u64) -> Result<GaugeSet, GaugeError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut free = Vec::with_capacity(g.num_vars());
    for v in g.vars() {
        let d = g.card(v);
        let mut found = None;
        for _ in 0..MAX_ATTEMPTS {
            let m = DMatrix::<f64>::identity(d, d)
                + DMatrix::from_fn(d, d, |_, _| scale * rng.gen_range(-1.0..1.0));
            if condition_number(&m) < RANDOM_MAX_CONDITION {
                found = Some(m);
                break;
            }
        }
        free.push(found.ok_or(GaugeError::GenerationFailed {
            var: v,
            attempts: MAX_ATTEMPTS,
        })?);
    }
    GaugeSet::from_free(g, free)
}

/// Log-domain rescaling vectors on every edge, stored per variable for its
/// free edge; the conjugate edge carries the negation, so
/// `θ_free(x) + θ_conj(x) = 0` holds by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Reparam {
    edges: Vec<(FactorId, FactorId)>,
    theta: Vec<Vec<f64>>,
}

impl Reparam {
    pub fn zeros(g: &ForneyGraph) -> Self {
        Reparam {
            edges: g.vars().map(|v| g.edge(v)).collect(),
            theta: g.vars().map(|v| vec![0.0; g.card(v)]).collect(),
        }
    }

    pub fn from_free(g: &ForneyGraph, theta: Vec<Vec<f64>>) -> Result<Self, GaugeError> {
        if theta.len() != g.num_vars() {
            return Err(GaugeError::WrongCount {
                expected: g.num_vars(),
                got: theta.len(),
            });
        }
        for (v, t) in g.vars().zip(&theta) {
            if t.len() != g.card(v) {
                return Err(GaugeError::DimensionMismatch {
                    axis: v.index(),
                    rows: t.len(),
                    cols: 1,
                    card: g.card(v),
                });
            }
        }
        Ok(Reparam {
            edges: g.vars().map(|v| g.edge(v)).collect(),
            theta,
        })
    }

    pub fn free(&self, v: VarId) -> &[f64] {
        &self.theta[v.index()]
    }

    /// `θ_{v a}` for either edge of `v`.
    pub fn get(&self, v: VarId, a: FactorId) -> Result<Vec<f64>, GaugeError> {
        let (f, c) = self.edges[v.index()];
        let t = &self.theta[v.index()];
        if a == f {
            Ok(t.clone())
        } else if a == c {
            Ok(t.iter().map(|x| -x).collect())
        } else {
            Err(GaugeError::NotAnEdge { var: v, factor: a })
        }
    }

    pub(crate) fn add_free(&mut self, v: VarId, delta: &[f64]) {
        for (t, d) in self.theta[v.index()].iter_mut().zip(delta) {
            *t += d;
        }
    }

    /// `f_a(x) exp(Σ_{v ∈ a} θ_{va}(x_v))` on every factor.
    pub fn apply(&self, g: &ForneyGraph) -> Result<ForneyGraph, GaugeError> {
        let mut out = g.clone();
        for (a, f) in g.factors().iter().enumerate() {
            let thetas = f
                .scope()
                .iter()
                .map(|&v| self.get(v, FactorId(a)))
                .collect::<Result<Vec<_>, _>>()?;
            out.set_factor_values(FactorId(a), scale_by_theta(f, &thetas));
        }
        Ok(out)
    }
}

pub(crate) fn scale_by_theta(f: &Factor, thetas: &[Vec<f64>]) -> Vec<SignedLog> {
    let mut state = vec![0; f.arity()];
    f.values()
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            crate::tensor::unravel(i, f.cards(), &mut state);
            let shift: f64 = thetas.iter().zip(&state).map(|(t, &s)| t[s]).sum();
            x * SignedLog::from_ln(shift)
        })
        .collect()
}

/// Diagonal gauges `diag(exp θ)` equivalent to a reparameterization.
pub fn reparam_as_gauges(r: &Reparam) -> GaugeSet {
    let diag = |t: &[f64], sign: f64| {
        DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            t.len(),
            t.iter().map(|x| (sign * x).exp()),
        ))
    };
    GaugeSet {
        edges: r.edges.clone(),
        free: r.theta.iter().map(|t| diag(t, 1.0)).collect(),
        conj: r.theta.iter().map(|t| diag(t, -1.0)).collect(),
    }
}
