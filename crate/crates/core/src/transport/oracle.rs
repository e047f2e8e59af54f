//! Seeded comparison of Sinkhorn against the exact solver on small random
//! slack-augmented problems.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use super::cost::{augment_cost, CostMatrix, Marginal};
use super::exact::{exact_ot_oracle, ORACLE_MAX_N};
use super::sinkhorn::sinkhorn;
use crate::error::{Error, Result};

/// Settings of one oracle run. Instance `k` has `N = sizes[k % sizes.len()]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleCheckConfig {
    pub instances: usize,
    pub sizes: Vec<usize>,
    pub epsilon_ot: f64,
    pub iters: usize,
    pub seed: u64,
}

impl Default for OracleCheckConfig {
    fn default() -> Self {
        Self {
            instances: 50,
            sizes: vec![2, 3, 4],
            epsilon_ot: 0.005,
            iters: 2000,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleInstance {
    pub n: usize,
    pub c_birth: f64,
    pub c_death: f64,
    pub sinkhorn_objective: f64,
    pub exact_objective: f64,
    pub relative_gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleCheckReport {
    pub config: OracleCheckConfig,
    pub max_relative_gap: f64,
    pub instances: Vec<OracleInstance>,
}

/// Real costs uniform on [0, 2]; birth and death penalties uniform on [0.1, 1].
pub fn oracle_check(cfg: &OracleCheckConfig) -> Result<OracleCheckReport> {
    if cfg.instances == 0 || cfg.sizes.is_empty() {
        return Err(Error::Validation("oracle check needs instances and sizes".into()));
    }
    if let Some(&n) = cfg.sizes.iter().find(|&&n| n == 0 || n > ORACLE_MAX_N) {
        return Err(Error::Size(format!("oracle sizes must be in 1..={ORACLE_MAX_N}, got {n}")));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let mut out = Vec::with_capacity(cfg.instances);
    for k in 0..cfg.instances {
        let n = cfg.sizes[k % cfg.sizes.len()];
        let c = Array2::from_shape_fn((n, n), |_| rng.random_range(0.0..=2.0));
        let c_birth = rng.random_range(0.1..=1.0);
        let c_death = rng.random_range(0.1..=1.0);
        let cost = augment_cost(&CostMatrix::from_entries(c)?, c_birth, c_death)?;
        let marginal = Marginal::with_slack(n);
        let view = cost.entries().view();
        let sinkhorn_objective = sinkhorn(&cost, &marginal, cfg.epsilon_ot, cfg.iters)?.objective(view);
        let exact_objective = exact_ot_oracle(&cost, &marginal)?.objective(view);
        let relative_gap = (sinkhorn_objective - exact_objective).abs() / exact_objective.abs().max(1e-300);
        out.push(OracleInstance {
            n,
            c_birth,
            c_death,
            sinkhorn_objective,
            exact_objective,
            relative_gap,
        });
    }
    let max_relative_gap = out.iter().map(|i| i.relative_gap).fold(0.0, f64::max);
    Ok(OracleCheckReport {
        config: cfg.clone(),
        max_relative_gap,
        instances: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_oversized_instances() {
        let cfg = OracleCheckConfig { sizes: vec![7], ..Default::default() };
        assert!(matches!(oracle_check(&cfg), Err(Error::Size(_))));
    }

    #[test]
    fn seeded_runs_repeat() {
        let cfg = OracleCheckConfig { instances: 6, iters: 200, ..Default::default() };
        assert_eq!(oracle_check(&cfg).unwrap(), oracle_check(&cfg).unwrap());
    }
}
