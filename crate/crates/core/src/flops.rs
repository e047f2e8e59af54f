//! Analytical prefill cost: per-layer transformer FLOPs, visual sequence length,
//! and the operation count of the transport solver.
//!
//! All counts are exact 128-bit integers; only the final ratios are floating point.

use serde::Serialize;

use crate::error::{Error, Result};

/// Language-model dimensions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ModelDims {
    pub layers: u64,
    pub hidden: u64,
    pub ffn: u64,
}

impl ModelDims {
    /// 7B-class decoder: 32 layers, hidden 4096, FFN 11008.
    pub const SEVEN_B: ModelDims = ModelDims {
        layers: 32,
        hidden: 4096,
        ffn: 11008,
    };

    fn validate(&self) -> Result<()> {
        if self.layers == 0 || self.hidden == 0 || self.ffn == 0 {
            return Err(Error::Validation(format!("model dims must be positive: {self:?}")));
        }
        Ok(())
    }
}

/// The three summands of the per-sequence FLOP count, already multiplied by the layer count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FlopTerms {
    /// `L·4·n·d²` (QKV and output projections).
    pub projections: u128,
    /// `L·2·n²·d` (attention scores and mixing).
    pub attention: u128,
    /// `L·2·n·d·m` (feed-forward).
    pub feed_forward: u128,
}

impl FlopTerms {
    pub fn total(&self) -> Result<u128> {
        self.projections
            .checked_add(self.attention)
            .and_then(|s| s.checked_add(self.feed_forward))
            .ok_or_else(overflow)
    }
}

fn overflow() -> Error {
    Error::Range("FLOP count exceeds 128-bit range".into())
}

fn mul(values: &[u128]) -> Result<u128> {
    values
        .iter()
        .try_fold(1u128, |acc, &v| acc.checked_mul(v))
        .ok_or_else(overflow)
}

pub fn flop_terms(dims: &ModelDims, n: u64) -> Result<FlopTerms> {
    dims.validate()?;
    if n == 0 {
        return Err(Error::Validation("sequence length must be at least 1".into()));
    }
    let (l, d, m, n) = (
        dims.layers as u128,
        dims.hidden as u128,
        dims.ffn as u128,
        n as u128,
    );
    Ok(FlopTerms {
        projections: mul(&[l, 4, n, d, d])?,
        attention: mul(&[l, 2, n, n, d])?,
        feed_forward: mul(&[l, 2, n, d, m])?,
    })
}

/// `L·(4nd² + 2n²d + 2ndm)`.
pub fn transformer_flops(dims: &ModelDims, n: u64) -> Result<u128> {
    flop_terms(dims, n)?.total()
}

/// `T·(tokens_per_frame + 1)`: patch tokens plus one global token per frame.
pub fn visual_length(frames: u64, tokens_per_frame: u64) -> u64 {
    frames * (tokens_per_frame + 1)
}

/// `(T−1)·iters·(N+1)²` solver operations; zero for a single frame.
pub fn ot_overhead(frames: u64, n: u64, iters: u64) -> Result<u128> {
    if frames == 0 {
        return Err(Error::Validation("frame count must be at least 1".into()));
    }
    mul(&[frames as u128 - 1, iters as u128, n as u128 + 1, n as u128 + 1])
}

/// Prompt composition around the visual tokens.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SequenceBudget {
    pub n_sys: u64,
    pub n_txt: u64,
    pub frames: u64,
    pub tokens_per_frame: u64,
    /// Retained patch tokens per frame after pruning.
    pub kept: Option<u64>,
}

impl SequenceBudget {
    pub fn length_before(&self) -> u64 {
        self.n_sys + self.n_txt + visual_length(self.frames, self.tokens_per_frame)
    }

    pub fn length_after(&self) -> Option<u64> {
        self.kept
            .map(|k| self.n_sys + self.n_txt + visual_length(self.frames, k))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CostReport {
    pub dims: ModelDims,
    pub budget: SequenceBudget,
    pub sinkhorn_iters: u64,
    pub sequence_before: u64,
    pub sequence_after: u64,
    pub terms_before: FlopTerms,
    pub terms_after: FlopTerms,
    pub flops_before: u128,
    pub flops_after: u128,
    /// Solver operations, reported apart from the transformer FLOPs.
    pub ot_overhead: u128,
    pub ot_overhead_unit: &'static str,
    /// `1 − (K+1)²/(N+1)²`: per-frame shrinkage of the quadratic attention term.
    pub quad_reduction_factor: f64,
    /// `flops_after / flops_before`.
    pub total_reduction_ratio: f64,
}

pub fn quad_reduction_factor(n: u64, k: u64) -> f64 {
    let (n1, k1) = ((n + 1) as f64, (k + 1) as f64);
    1.0 - (k1 * k1) / (n1 * n1)
}

pub fn reduction_report(dims: &ModelDims, budget: &SequenceBudget, iters: u64) -> Result<CostReport> {
    let k = budget
        .kept
        .ok_or_else(|| Error::Validation("reduction report needs a retained count K".into()))?;
    if k > budget.tokens_per_frame {
        return Err(Error::Validation(format!(
            "K = {k} exceeds tokens per frame N = {}",
            budget.tokens_per_frame
        )));
    }
    let before = budget.length_before();
    let after = budget.length_after().expect("K present");
    let terms_before = flop_terms(dims, before)?;
    let terms_after = flop_terms(dims, after)?;
    let flops_before = terms_before.total()?;
    let flops_after = terms_after.total()?;
    Ok(CostReport {
        dims: *dims,
        budget: *budget,
        sinkhorn_iters: iters,
        sequence_before: before,
        sequence_after: after,
        terms_before,
        terms_after,
        flops_before,
        flops_after,
        ot_overhead: ot_overhead(budget.frames, budget.tokens_per_frame, iters)?,
        ot_overhead_unit: "sinkhorn_cell_updates",
        quad_reduction_factor: quad_reduction_factor(budget.tokens_per_frame, k),
        total_reduction_ratio: flops_after as f64 / flops_before as f64,
    })
}
