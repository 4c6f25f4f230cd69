use std::time::Instant;

use nalgebra::DMatrix;

use crate::elimination::{log_bound_with, BoundResult, Direction, MiniBucketTree};
use crate::gauge::{conjugate, scale_by_theta, transform_axis, Reparam};
use crate::logspace::SignedLog;
use crate::model::{Factor, FactorId, ForneyGraph, VarId};

use super::{aux_marginals, gauge_gradient, reparam_gradient, AuxMarginals, OptimizeError, OptimizerConfig};

/// Working state of the optimizer. Gauge and reparameterization steps are
/// absorbed into the factors of `graph` as soon as they are accepted, so the
/// current gauges are always the identity.
#[derive(Clone, Debug)]
pub struct OptState {
    pub graph: ForneyGraph,
    pub tree: MiniBucketTree,
    /// Accumulated reparameterization (θ steps only).
    pub reparam: Reparam,
    /// Current `ln Z_WMBE`.
    pub bound: f64,
}

impl OptState {
    pub fn new(graph: ForneyGraph, tree: MiniBucketTree) -> Result<Self, OptimizeError> {
        if tree.direction() != Direction::Upper {
            return Err(OptimizeError::WrongDirection {
                expected: Direction::Upper,
            });
        }
        tree.check_model(&graph)?;
        tree.check_weights()?;
        let bound = log_bound_with(&graph, &tree, tree.weights());
        Ok(OptState {
            reparam: Reparam::zeros(&graph),
            graph,
            tree,
            bound,
        })
    }

    fn evaluate(&self) -> f64 {
        log_bound_with(&self.graph, &self.tree, self.tree.weights())
    }
}

/// `f` transformed by `m` along `axis`, computed on a table rescaled by its
/// largest magnitude.
fn transformed(f: &Factor, axis: usize, m: &DMatrix<f64>) -> Vec<SignedLog> {
    let top = f
        .values()
        .iter()
        .map(|v| v.ln_abs())
        .fold(f64::NEG_INFINITY, f64::max);
    let shift = if top.is_finite() { top } else { 0.0 };
    let lin: Vec<f64> = f
        .values()
        .iter()
        .map(|v| f64::from(v.sign()) * (v.ln_abs() - shift).exp())
        .collect();
    transform_axis(&lin, f.cards(), axis, m)
        .into_iter()
        .map(|x| {
            let s = SignedLog::from_f64(x);
            s * SignedLog::from_ln(shift)
        })
        .collect()
}

fn step_sizes(mu: f64, config: &OptimizerConfig) -> impl Iterator<Item = f64> + '_ {
    (0..=config.max_halvings).map(move |k| mu * config.backtrack.powi(k as i32))
}

/// One gauge update on variable `v` with fresh auxiliary marginals.
pub fn gauge_step(state: &mut OptState, v: VarId, mu: f64, config: &OptimizerConfig) -> Result<bool, OptimizeError> {
    gauge_step_with(state, v, mu, config, None)
}

/// Descends along the gauge gradient of `v`, absorbing `G` into the free and
/// `(G^T)^{-1}` into the conjugate factor. The largest step in the
/// backtracking sequence that does not increase the bound is kept; returns
/// whether a step was accepted (a zero gradient counts as an accepted no-op).
fn gauge_step_with(
    state: &mut OptState,
    v: VarId,
    mu: f64,
    config: &OptimizerConfig,
    stale: Option<&AuxMarginals>,
) -> Result<bool, OptimizeError> {
    let fresh;
    let q = match stale {
        Some(q) => q,
        None => {
            fresh = aux_marginals(&state.graph, &state.tree)?;
            &fresh
        }
    };
    let grad = gauge_gradient(&state.graph, q, v)?;
    if grad.amax() == 0.0 {
        return Ok(true);
    }
    let (alpha, beta) = state.graph.edge(v);
    let fa = state.graph.factor(alpha).clone();
    let fb = state.graph.factor(beta).clone();
    let (pa, pb) = (fa.position(v).unwrap(), fb.position(v).unwrap());
    let d = state.graph.card(v);
    let mut any_regular = false;
    for step in step_sizes(mu, config) {
        let ga = DMatrix::identity(d, d) - &grad * step;
        let Ok(gb) = conjugate(&ga) else { continue };
        any_regular = true;
        state.graph.set_factor_values(alpha, transformed(&fa, pa, &ga));
        state.graph.set_factor_values(beta, transformed(&fb, pb, &gb));
        let b = state.evaluate();
        if b <= state.bound {
            state.bound = b;
            return Ok(true);
        }
    }
    state.graph.set_factor_values(alpha, fa.values().to_vec());
    state.graph.set_factor_values(beta, fb.values().to_vec());
    if any_regular {
        Ok(false)
    } else {
        Err(OptimizeError::SingularGaugeStep { var: v })
    }
}

/// Multiplicative descent on the Hölder weights of split variables using a
/// central finite-difference gradient in log-weight space.
pub fn weight_step(state: &mut OptState, mu: f64, config: &OptimizerConfig) -> Result<bool, OptimizeError> {
    let split: Vec<VarId> = state.tree.split_vars().collect();
    if split.is_empty() {
        return Ok(true);
    }
    let w = state.tree.weights().to_vec();
    let h = config.weight_fd_step;
    let mut grad = vec![0.0; w.len()];
    let mut probe = w.clone();
    for &v in &split {
        for &k in state.tree.copies(v) {
            probe[k] = w[k] * h.exp();
            let up = log_bound_with(&state.graph, &state.tree, &probe);
            probe[k] = w[k] * (-h).exp();
            let down = log_bound_with(&state.graph, &state.tree, &probe);
            probe[k] = w[k];
            grad[k] = (up - down) / (2.0 * h);
        }
    }
    if grad.iter().all(|&g| g == 0.0) {
        return Ok(true);
    }
    for step in step_sizes(mu, config) {
        let mut cand = w.clone();
        for &v in &split {
            let ids = state.tree.copies(v);
            for &k in ids {
                cand[k] = w[k] * (-step * grad[k]).exp();
            }
            normalize(&mut cand, ids, config.weight_floor);
        }
        let b = log_bound_with(&state.graph, &state.tree, &cand);
        if b.is_finite() && b <= state.bound {
            state.tree.set_weights_unchecked(cand);
            state.bound = b;
            return Ok(true);
        }
    }
    Ok(false)
}

fn normalize(w: &mut [f64], ids: &[usize], floor: f64) {
    let total: f64 = ids.iter().map(|&k| w[k]).sum();
    for &k in ids {
        w[k] = (w[k] / total).max(floor);
    }
    let total: f64 = ids.iter().map(|&k| w[k]).sum();
    for &k in ids {
        w[k] /= total;
    }
}

/// Descends along the reparameterization gradient of all variables at once,
/// rescaling each free factor by `exp(θ)` and each conjugate by `exp(-θ)`.
pub fn reparam_step(state: &mut OptState, mu: f64, config: &OptimizerConfig) -> Result<bool, OptimizeError> {
    let q = aux_marginals(&state.graph, &state.tree)?;
    let grad = reparam_gradient(&state.graph, &q);
    if grad.iter().flatten().all(|&g| g == 0.0) {
        return Ok(true);
    }
    let original = state.graph.clone();
    for step in step_sizes(mu, config) {
        for (a, f) in original.factors().iter().enumerate() {
            let thetas: Vec<Vec<f64>> = f
                .scope()
                .iter()
                .map(|&v| {
                    let sign = if original.edge(v).0 == FactorId(a) { -step } else { step };
                    grad[v.index()].iter().map(|g| sign * g).collect()
                })
                .collect();
            state.graph.set_factor_values(FactorId(a), scale_by_theta(f, &thetas));
        }
        let b = state.evaluate();
        if b <= state.bound {
            state.bound = b;
            for v in original.vars() {
                let delta: Vec<f64> = grad[v.index()].iter().map(|g| -step * g).collect();
                state.reparam.add_free(v, &delta);
            }
            return Ok(true);
        }
    }
    state.graph = original;
    Ok(false)
}

/// Runs the configured number of outer iterations on `state`. Each iteration
/// sweeps gauge steps over the variables in elimination order, then takes a
/// weight step, then a reparameterization step, as enabled.
pub fn optimize(state: &mut OptState, config: &OptimizerConfig) -> Result<BoundResult, OptimizeError> {
    config.validate()?;
    let start = Instant::now();
    let mut trace = vec![state.bound];
    let order: Vec<VarId> = state.tree.order().as_slice().to_vec();
    for _ in 0..config.iterations {
        if config.gauges {
            let stale = if config.stale_q {
                Some(aux_marginals(&state.graph, &state.tree)?)
            } else {
                None
            };
            for &v in &order {
                gauge_step_with(state, v, config.mu_gauge, config, stale.as_ref())?;
            }
        }
        if config.weights {
            weight_step(state, config.mu_weight, config)?;
        }
        if config.reparam {
            reparam_step(state, config.mu_theta, config)?;
        }
        trace.push(state.bound);
        if let Some(tol) = config.rel_tol {
            let n = trace.len();
            if n > 10 && trace[n - 11] - trace[n - 1] <= tol * trace[n - 1].abs() {
                break;
            }
        }
    }
    Ok(BoundResult {
        method: config.method().tag().to_string(),
        direction: Direction::Upper,
        log_bound: state.bound,
        trace,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Algorithm entry point: optimizes a copy of `g` and `tree`.
pub fn optimize_bound(
    g: &ForneyGraph,
    tree: &MiniBucketTree,
    config: &OptimizerConfig,
) -> Result<BoundResult, OptimizeError> {
    let mut state = OptState::new(g.clone(), tree.clone())?;
    optimize(&mut state, config)
}
