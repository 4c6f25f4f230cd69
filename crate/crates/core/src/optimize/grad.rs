use nalgebra::DMatrix;

use crate::model::{Factor, FactorId, ForneyGraph, VarId};

use super::aux::axis_marginal;
use super::{AuxMarginals, OptimizeError};

/// Entries whose log-magnitude is below this are treated as zero when they
/// appear in a gradient denominator.
pub const ZERO_LOG_THRESHOLD: f64 = -300.0;

/// `Σ_y q(y, x_v = a) f(y, x_v = b) / f(y, x_v = a)` for all `(a, b)`.
fn ratio_moments(f: &Factor, a: FactorId, q: &[f64], axis: usize) -> Result<DMatrix<f64>, OptimizeError> {
    let d = f.cards()[axis];
    let stride = f.strides()[axis];
    let vals = f.values();
    let mut m = DMatrix::zeros(d, d);
    for (i, den) in vals.iter().enumerate() {
        let s = (i / stride) % d;
        if den.is_zero() || den.ln_abs() < ZERO_LOG_THRESHOLD {
            return Err(OptimizeError::ZeroFactorEntry { factor: a, index: i });
        }
        let base = i - s * stride;
        for t in 0..d {
            let num = vals[base + t * stride];
            let sign = f64::from(num.sign() * den.sign());
            m[(s, t)] += q[i] * sign * (num.ln_abs() - den.ln_abs()).exp();
        }
    }
    Ok(m)
}

/// Gradient of `ln Z_WMBE` with respect to the free gauge of `v` at the
/// identity, with the conjugate gauge tied to it as `(G^T)^{-1}`:
///
/// `grad(a, b) = Σ_y q_α(y, a) f_α(y, b) / f_α(y, a)
///             - Σ_y q_β(y, b) f_β(y, a) / f_β(y, b)`
///
/// where `α` is the free and `β` the conjugate factor of `v`.
pub fn gauge_gradient(g: &ForneyGraph, q: &AuxMarginals, v: VarId) -> Result<DMatrix<f64>, OptimizeError> {
    let (alpha, beta) = g.edge(v);
    let fa = g.factor(alpha);
    let fb = g.factor(beta);
    let ma = ratio_moments(fa, alpha, q.factor(alpha), fa.position(v).unwrap())?;
    let mb = ratio_moments(fb, beta, q.factor(beta), fb.position(v).unwrap())?;
    Ok(ma - mb.transpose())
}

/// Gradient of `ln Z_WMBE` with respect to each variable's free-edge
/// reparameterization: `q_α(x_v) - q_β(x_v)`.
pub fn reparam_gradient(g: &ForneyGraph, q: &AuxMarginals) -> Vec<Vec<f64>> {
    g.vars()
        .map(|v| {
            let (alpha, beta) = g.edge(v);
            let pa = marginal(g, q, alpha, v);
            let pb = marginal(g, q, beta, v);
            pa.iter().zip(&pb).map(|(x, y)| x - y).collect()
        })
        .collect()
}

fn marginal(g: &ForneyGraph, q: &AuxMarginals, a: FactorId, v: VarId) -> Vec<f64> {
    let f = g.factor(a);
    axis_marginal(q.factor(a), f.cards(), f.position(v).unwrap())
}
