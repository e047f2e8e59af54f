//! Log-domain Sinkhorn for square problems with identical row and column marginals.
//!
//! Potentials start at zero. Each iteration updates the column potential, then
//! the row potential. After the last iteration the plan is materialised and every
//! row is rescaled once so that row sums match the marginal to rounding. The
//! remaining column error is recorded on the plan.

use ndarray::{Array2, ArrayView2};

use super::cost::{AugmentedCost, Marginal};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct TransportPlan {
    entries: Array2<f64>,
    row_residual: f64,
    col_residual: f64,
}

impl TransportPlan {
    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    /// ∞-norm of `P·1 − a` after the closing row rescale.
    pub fn row_residual(&self) -> f64 {
        self.row_residual
    }

    /// ∞-norm of `Pᵀ·1 − a`.
    pub fn col_residual(&self) -> f64 {
        self.col_residual
    }

    /// Frobenius inner product with a cost of the same shape.
    pub fn objective(&self, cost: ArrayView2<'_, f64>) -> f64 {
        assert_eq!(self.entries.dim(), cost.dim(), "plan and cost shapes differ");
        self.entries
            .iter()
            .zip(cost.iter())
            .map(|(p, c)| p * c)
            .sum()
    }

    pub(crate) fn from_entries(entries: Array2<f64>, marginal: &[f64]) -> Self {
        let (row_residual, col_residual) = residuals(&entries, marginal);
        Self {
            entries,
            row_residual,
            col_residual,
        }
    }
}

pub fn sinkhorn(
    cost: &AugmentedCost,
    marginal: &Marginal,
    epsilon_ot: f64,
    iters: usize,
) -> Result<TransportPlan> {
    solve_entropic(cost.entries().view(), marginal.weights(), epsilon_ot, iters)
}

/// Entropic OT on any square cost with `marginal` on both sides.
pub fn solve_entropic(
    cost: ArrayView2<'_, f64>,
    marginal: &[f64],
    epsilon_ot: f64,
    iters: usize,
) -> Result<TransportPlan> {
    let n = marginal.len();
    if cost.dim() != (n, n) {
        return Err(Error::Shape(format!(
            "cost is {:?} but marginal has length {n}",
            cost.dim()
        )));
    }
    if !(epsilon_ot.is_finite() && epsilon_ot > 0.0) {
        return Err(Error::Domain(format!("epsilon_ot must be positive, got {epsilon_ot}")));
    }
    if iters == 0 {
        return Err(Error::Domain("sinkhorn needs at least one iteration".into()));
    }
    if cost.iter().any(|c| !c.is_finite()) {
        return Err(Error::Domain("cost holds a non-finite entry".into()));
    }
    if marginal.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
        return Err(Error::Domain("marginal entries must be positive".into()));
    }

    let neg_scaled = cost.mapv(|c| -c / epsilon_ot);
    let log_a: Vec<f64> = marginal.iter().map(|a| a.ln()).collect();
    let mut f = vec![0.0; n];
    let mut g = vec![0.0; n];
    let mut buf = vec![0.0; n];

    for _ in 0..iters {
        for j in 0..n {
            for i in 0..n {
                buf[i] = f[i] / epsilon_ot + neg_scaled[[i, j]];
            }
            g[j] = epsilon_ot * (log_a[j] - log_sum_exp(&buf));
        }
        for i in 0..n {
            for j in 0..n {
                buf[j] = g[j] / epsilon_ot + neg_scaled[[i, j]];
            }
            f[i] = epsilon_ot * (log_a[i] - log_sum_exp(&buf));
        }
    }

    let mut entries = Array2::<f64>::zeros((n, n));
    for ((i, j), p) in entries.indexed_iter_mut() {
        *p = ((f[i] + g[j]) / epsilon_ot + neg_scaled[[i, j]]).exp();
    }
    for (i, mut row) in entries.rows_mut().into_iter().enumerate() {
        let sum: f64 = row.iter().sum();
        if sum > 0.0 {
            let scale = marginal[i] / sum;
            row.mapv_inplace(|p| p * scale);
        }
    }
    Ok(TransportPlan::from_entries(entries, marginal))
}

/// Sequential, max-shifted log-sum-exp.
fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    let mut acc = 0.0;
    for &x in xs {
        acc += (x - max).exp();
    }
    max + acc.ln()
}

fn residuals(p: &Array2<f64>, a: &[f64]) -> (f64, f64) {
    let mut row = 0.0f64;
    for (r, &ai) in p.rows().into_iter().zip(a) {
        row = row.max((r.sum() - ai).abs());
    }
    let mut col = 0.0f64;
    for (c, &aj) in p.columns().into_iter().zip(a) {
        col = col.max((c.sum() - aj).abs());
    }
    (row, col)
}
