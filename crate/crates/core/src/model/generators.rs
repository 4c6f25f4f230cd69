//! Random model families: Ising spin glasses on square grids and 3-regular
//! Forney-style models (generic and flip-symmetric).
//!
//! `t` and the field parameter are variances: couplings are drawn from
//! `N(0, t)`, i.e. with standard deviation `sqrt(t)`. Every generator seeds its
//! own ChaCha stream, so identical parameters give bit-identical models.

use std::ops::Deref;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::forney::validate_forney;
use super::{Factor, FactorGraph, ForneyGraph, ModelError, VarId};

/// Pairwise Ising model on a non-toroidal `rows x cols` grid.
///
/// Variable `(i, j)` has id `i * cols + j`; state 0 is spin −1 and state 1 is
/// spin +1. Factors are the `rows * cols` singleton fields followed by the
/// couplings, each vertex contributing its right then its down edge.
#[derive(Clone, Debug, PartialEq)]
pub struct IsingGrid {
    pub rows: usize,
    pub cols: usize,
    pub graph: FactorGraph,
}

impl Deref for IsingGrid {
    type Target = FactorGraph;

    fn deref(&self) -> &FactorGraph {
        &self.graph
    }
}

fn normal(variance: f64, what: &str) -> Result<Normal<f64>, ModelError> {
    if !(variance >= 0.0 && variance.is_finite()) {
        return Err(ModelError::InvalidParameter(format!(
            "{what} variance must be finite and non-negative, got {variance}"
        )));
    }
    Normal::new(0.0, variance.sqrt())
        .map_err(|e| ModelError::InvalidParameter(format!("{what}: {e}")))
}

/// Ising spin glass with fields `φ_v ~ N(0, field_var)` and couplings
/// `φ_uv ~ N(0, t)`; potentials `exp(φ_v x_v)` and `exp(φ_uv x_u x_v)`.
pub fn gen_ising_grid(
    rows: usize,
    cols: usize,
    t: f64,
    field_var: f64,
    seed: u64,
) -> Result<IsingGrid, ModelError> {
    if rows == 0 || cols == 0 {
        return Err(ModelError::InvalidParameter(format!(
            "grid must be at least 1x1, got {rows}x{cols}"
        )));
    }
    let field = normal(field_var, "field")?;
    let coupling = normal(t, "interaction")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rows * cols;
    let mut factors = Vec::with_capacity(3 * n);
    for v in 0..n {
        let phi = field.sample(&mut rng);
        factors.push(Factor::from_log(vec![VarId(v)], vec![2], &[-phi, phi])?);
    }
    for i in 0..rows {
        for j in 0..cols {
            let v = i * cols + j;
            let mut neighbors = Vec::with_capacity(2);
            if j + 1 < cols {
                neighbors.push(v + 1);
            }
            if i + 1 < rows {
                neighbors.push(v + cols);
            }
            for u in neighbors {
                let phi = coupling.sample(&mut rng);
                factors.push(Factor::from_log(
                    vec![VarId(v), VarId(u)],
                    vec![2, 2],
                    &[phi, -phi, -phi, phi],
                )?);
            }
        }
    }
    Ok(IsingGrid {
        rows,
        cols,
        graph: FactorGraph::new(vec![2; n], factors)?,
    })
}

/// Scopes of the 3-regular cycle-with-chords Forney graph: factor `i` touches
/// cycle variables `i - 1` and `i` (modulo `n`) and chord variable
/// `n + (i mod n/2)`, which it shares with factor `i ± n/2`.
fn regular_scopes(num_factors: usize) -> Result<Vec<Vec<VarId>>, ModelError> {
    if num_factors < 4 || num_factors % 2 != 0 {
        return Err(ModelError::OddFactorCount(num_factors));
    }
    let n = num_factors;
    Ok((0..n)
        .map(|i| {
            let mut scope = vec![VarId((i + n - 1) % n), VarId(i), VarId(n + i % (n / 2))];
            scope.sort();
            scope
        })
        .collect())
}

/// 3-regular Forney-style model with binary variables and i.i.d.
/// `log f(x) ~ N(0, t)` entries. `num_factors` factors, `1.5 * num_factors`
/// variables.
pub fn gen_forney_3regular(num_factors: usize, t: f64, seed: u64) -> Result<ForneyGraph, ModelError> {
    let scopes = regular_scopes(num_factors)?;
    let dist = normal(t, "interaction")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let factors = scopes
        .into_iter()
        .map(|scope| {
            let logs: Vec<f64> = (0..8).map(|_| dist.sample(&mut rng)).collect();
            Factor::from_log(scope, vec![2; 3], &logs)
        })
        .collect::<Result<Vec<_>, _>>()?;
    validate_forney(FactorGraph::new(vec![2; num_factors * 3 / 2], factors)?)
}

/// Same topology as [`gen_forney_3regular`], but every factor is invariant
/// under flipping all of its arguments: entries with first argument 0 are
/// sampled and mirrored onto their complements.
pub fn gen_symmetric_forney(num_factors: usize, t: f64, seed: u64) -> Result<ForneyGraph, ModelError> {
    let scopes = regular_scopes(num_factors)?;
    let dist = normal(t, "interaction")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let factors = scopes
        .into_iter()
        .map(|scope| {
            let mut logs = [0.0; 8];
            for idx in 0..4 {
                let x = dist.sample(&mut rng);
                logs[idx] = x;
                logs[7 - idx] = x;
            }
            Factor::from_log(scope, vec![2; 3], &logs)
        })
        .collect::<Result<Vec<_>, _>>()?;
    validate_forney(FactorGraph::new(vec![2; num_factors * 3 / 2], factors)?)
}
