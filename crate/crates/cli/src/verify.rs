use std::path::PathBuf;

use clap::Args;
use gmbe_core::oracle::{brute_z_with, OracleBudget};
use gmbe_core::Direction;
use serde::Serialize;

use crate::bound::read_model;
use crate::run::{Instance, MethodArg, RunError};
use crate::Failure;

/// Allowed slack of the sandwich checks in log space.
pub const GAP_TOL: f64 = 1e-9;

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// UAI model file.
    pub model: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "be,mbe,wmbe,wmbe-lower")]
    pub methods: Vec<MethodArg>,
    #[arg(long, default_value_t = 4)]
    pub ibound: usize,
    #[arg(long, default_value_t = 50)]
    pub iters: usize,
    /// Largest joint state space the brute-force oracle may enumerate.
    #[arg(long, default_value_t = 1 << 20)]
    pub max_states: usize,
}

#[derive(Serialize)]
struct Line {
    method: String,
    tag: String,
    direction: Option<Direction>,
    log_bound: Option<f64>,
    /// `log_bound - ln Z`.
    gap: Option<f64>,
    status: String,
}

#[derive(Serialize)]
struct Report {
    log_z: f64,
    results: Vec<Line>,
}

fn violates(method: MethodArg, gap: f64) -> bool {
    match method {
        MethodArg::Be => gap.abs() > GAP_TOL,
        MethodArg::WmbeLower => gap > GAP_TOL,
        _ => gap < -GAP_TOL,
    }
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<(), Failure> {
    let g = read_model(&args.model)?;
    let budget = OracleBudget {
        max_states: args.max_states,
    };
    let z = brute_z_with(&g, budget).map_err(anyhow::Error::from)?;
    if z.sign() <= 0 {
        return Err(Failure::Runtime(anyhow::anyhow!("Z is not positive; no log bound to check")));
    }
    let log_z = z.ln_abs();
    let inst = Instance::new(g)?;
    let mut violations = Vec::new();
    let mut failures = Vec::new();
    let mut results = Vec::new();
    for &m in &args.methods {
        let line = match inst.run(m, args.ibound, args.iters) {
            Ok(r) => {
                let gap = r.log_bound - log_z;
                let bad = violates(m, gap);
                if bad {
                    violations.push(format!("{} gap {gap:e}", m.name()));
                }
                Line {
                    method: m.name(),
                    tag: r.method,
                    direction: Some(r.direction),
                    log_bound: Some(r.log_bound),
                    gap: Some(gap),
                    status: if bad { "violated" } else { "ok" }.into(),
                }
            }
            Err(e) => {
                if let RunError::Failed(msg) = &e {
                    failures.push(format!("{}: {msg}", m.name()));
                }
                Line {
                    method: m.name(),
                    tag: m.tag().into(),
                    direction: None,
                    log_bound: None,
                    gap: None,
                    status: e.status(),
                }
            }
        };
        results.push(line);
    }
    let report = Report { log_z, results };
    println!(
        "{}",
        serde_json::to_string_pretty(&report).map_err(anyhow::Error::from)?
    );
    if !violations.is_empty() {
        return Err(Failure::Verification(violations.join("; ")));
    }
    if !failures.is_empty() {
        return Err(Failure::Runtime(anyhow::anyhow!(failures.join("; "))));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_rules() {
        assert!(!violates(MethodArg::Wmbe, -1e-12));
        assert!(violates(MethodArg::Wmbe, -1e-6));
        assert!(violates(MethodArg::WmbeLower, 1e-6));
        assert!(!violates(MethodArg::WmbeLower, -3.0));
        assert!(violates(MethodArg::Be, -1e-6));
        assert!(!violates(MethodArg::Be, 1e-12));
    }
}
