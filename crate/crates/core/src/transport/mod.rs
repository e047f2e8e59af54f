//! Temporal evidence between consecutive frames.
//!
//! Target tokens of frame t are matched against source tokens of frame t−1 by
//! entropic optimal transport on a cosine cost. A slack node lets target tokens
//! without a plausible source draw their mass at a fixed birth penalty; the
//! mass it supplies becomes the token's birth evidence.

pub mod cost;
pub mod exact;
pub mod oracle;
pub mod sinkhorn;

use ndarray::{ArrayView2, Axis};

use crate::config::{RunConfig, TransportMode};
use crate::error::{Error, Result};

pub use cost::{augment_cost, build_cost, AugmentedCost, CostMatrix, Marginal};
pub use exact::exact_ot_oracle;
pub use oracle::{oracle_check, OracleCheckConfig, OracleCheckReport};
pub use sinkhorn::{sinkhorn, solve_entropic, TransportPlan};

/// Death penalty used by [`TransportMode::OnlyBirth`]: 50× the largest cosine cost.
pub const CLOSED_DEATH_COST: f64 = 100.0;

/// Solver settings for one frame pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransportParams {
    pub epsilon_ot: f64,
    pub c_birth: f64,
    pub c_death: f64,
    pub iters: usize,
}

impl Default for TransportParams {
    fn default() -> Self {
        Self::from(&RunConfig::default())
    }
}

impl From<&RunConfig> for TransportParams {
    fn from(c: &RunConfig) -> Self {
        Self {
            epsilon_ot: c.epsilon_ot,
            c_birth: c.c_birth,
            c_death: c.c_death,
            iters: c.sinkhorn_iters,
        }
    }
}

/// Per-token evidence for the target frame of one pair.
#[derive(Clone, Debug, PartialEq)]
pub struct TemporalScores {
    /// Plan-weighted matching cost per target token.
    pub e: Vec<f64>,
    /// Mass drawn from the slack source per target token.
    pub b: Vec<f64>,
    /// Mass each source token sends to the slack target. Reported, never scored.
    pub death: Vec<f64>,
}

impl TemporalScores {
    fn zeros_like(e: Vec<f64>) -> Self {
        let n = e.len();
        Self {
            e,
            b: vec![0.0; n],
            death: vec![0.0; n],
        }
    }

    /// `e + λ·b`, the temporal factor of the forensic score.
    pub fn combined(&self, lambda_birth: f64) -> Vec<f64> {
        self.e
            .iter()
            .zip(&self.b)
            .map(|(e, b)| e + lambda_birth * b)
            .collect()
    }
}

pub fn temporal_scores(plan: &TransportPlan, cost: &AugmentedCost) -> Result<TemporalScores> {
    let p = plan.entries();
    if p.dim() != cost.entries().dim() {
        return Err(Error::Shape(format!(
            "plan is {:?} but cost is {:?}",
            p.dim(),
            cost.entries().dim()
        )));
    }
    let n = cost.n();
    let c = cost.entries();
    let e = (0..n)
        .map(|j| {
            let mut acc = 0.0;
            for i in 0..n {
                acc += p[[i, j]] * c[[i, j]];
            }
            acc
        })
        .collect();
    Ok(TemporalScores {
        e,
        b: (0..n).map(|j| p[[n, j]]).collect(),
        death: (0..n).map(|i| p[[i, n]]).collect(),
    })
}

/// Distance of every token to the frame's mean embedding. Used where a frame has
/// no predecessor.
pub fn spatial_novelty(frame: ArrayView2<'_, f64>) -> Vec<f64> {
    let Some(mean) = frame.mean_axis(Axis(0)) else {
        return Vec::new();
    };
    frame
        .rows()
        .into_iter()
        .map(|row| (&row - &mean).mapv(|d| d * d).sum().sqrt())
        .collect()
}

/// Builds the augmented cost for a frame pair and solves it.
pub fn solve_pair(
    prev: ArrayView2<'_, f64>,
    curr: ArrayView2<'_, f64>,
    params: &TransportParams,
) -> Result<(AugmentedCost, TransportPlan)> {
    let cost = build_cost(prev, curr)?;
    let aug = augment_cost(&cost, params.c_birth, params.c_death)?;
    let plan = sinkhorn(&aug, &Marginal::with_slack(cost.n()), params.epsilon_ot, params.iters)?;
    Ok((aug, plan))
}

/// Temporal evidence under one of the transport formulations.
pub fn temporal_scores_variant(
    mode: TransportMode,
    prev: ArrayView2<'_, f64>,
    curr: ArrayView2<'_, f64>,
    params: &TransportParams,
) -> Result<TemporalScores> {
    match mode {
        TransportMode::HardAssignment => {
            let cost = build_cost(prev, curr)?;
            let e = cost
                .entries()
                .columns()
                .into_iter()
                .map(|col| col.iter().copied().fold(f64::INFINITY, f64::min))
                .collect();
            Ok(TemporalScores::zeros_like(e))
        }
        TransportMode::BalancedOt => {
            let cost = build_cost(prev, curr)?;
            let marginal = Marginal::uniform(cost.n());
            let plan = solve_entropic(
                cost.entries().view(),
                marginal.weights(),
                params.epsilon_ot,
                params.iters,
            )?;
            let p = plan.entries();
            let c = cost.entries();
            let e = (0..cost.n())
                .map(|j| {
                    let mut acc = 0.0;
                    for i in 0..cost.n() {
                        acc += p[[i, j]] * c[[i, j]];
                    }
                    acc
                })
                .collect();
            Ok(TemporalScores::zeros_like(e))
        }
        TransportMode::OnlyBirth => {
            let closed = TransportParams {
                c_death: CLOSED_DEATH_COST,
                ..*params
            };
            let (aug, plan) = solve_pair(prev, curr, &closed)?;
            temporal_scores(&plan, &aug)
        }
        TransportMode::BirthDeath => {
            let (aug, plan) = solve_pair(prev, curr, params)?;
            temporal_scores(&plan, &aug)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    #[test]
    fn perfect_continuity_has_no_evidence() {
        let n = 3;
        let mut p = Array2::<f64>::zeros((n + 1, n + 1));
        for i in 0..n {
            p[[i, i]] = 1.0 / n as f64;
        }
        p[[n, n]] = 1.0;
        let plan = TransportPlan::from_entries(p, Marginal::with_slack(n).weights());
        let aug = augment_cost(&CostMatrix::from_entries(Array2::zeros((n, n))).unwrap(), 0.35, 0.35)
            .unwrap();
        let s = temporal_scores(&plan, &aug).unwrap();
        assert_eq!(s.e, vec![0.0; n]);
        assert_eq!(s.b, vec![0.0; n]);
    }

    #[test]
    fn single_token_solved_plan() {
        let aug = augment_cost(&CostMatrix::from_entries(array![[0.0]]).unwrap(), 0.35, 0.35).unwrap();
        let plan = sinkhorn(&aug, &Marginal::with_slack(1), 0.005, 500).unwrap();
        let s = temporal_scores(&plan, &aug).unwrap();
        assert!(s.e[0].abs() < 1e-9);
        assert!(s.b[0] < 1e-6);
    }

    #[test]
    fn shape_mismatch() {
        let aug = augment_cost(&CostMatrix::from_entries(array![[0.0]]).unwrap(), 0.35, 0.35).unwrap();
        let plan = TransportPlan::from_entries(Array2::zeros((3, 3)), &[1.0, 1.0, 1.0]);
        assert!(matches!(temporal_scores(&plan, &aug), Err(Error::Shape(_))));
    }

    #[test]
    fn spatial_novelty_cases() {
        assert_eq!(spatial_novelty(array![[0.3, 0.4], [0.3, 0.4]].view()), vec![0.0, 0.0]);
        assert_eq!(spatial_novelty(array![[1.0, 0.0], [-1.0, 0.0]].view()), vec![1.0, 1.0]);
        let s = spatial_novelty(array![[1.0, 0.0], [0.0, 1.0], [0.0, -1.0]].view());
        let side = (1.0f64 / 9.0 + 1.0).sqrt();
        assert!((s[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((s[1] - side).abs() < 1e-12);
        assert!((s[2] - side).abs() < 1e-12);
    }

    #[test]
    fn hard_assignment_on_identical_frames() {
        let f = array![[1.0, 0.0], [0.0, 1.0], [0.6, 0.8]];
        let s = temporal_scores_variant(TransportMode::HardAssignment, f.view(), f.view(), &TransportParams::default())
            .unwrap();
        assert!(s.e.iter().all(|&e| e.abs() < 1e-12));
        assert_eq!(s.b, vec![0.0; 3]);
    }
}
