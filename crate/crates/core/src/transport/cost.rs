use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

/// Cosine distances between source tokens (rows, frame t−1) and target tokens
/// (columns, frame t).
#[derive(Clone, Debug, PartialEq)]
pub struct CostMatrix {
    entries: Array2<f64>,
}

impl CostMatrix {
    /// Wraps an arbitrary square, finite cost. Used by tests and the oracle check.
    pub fn from_entries(entries: Array2<f64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return Err(Error::Shape(format!("cost must be square and nonempty, got {:?}", entries.dim())));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("cost matrix holds a non-finite entry".into()));
        }
        Ok(Self { entries })
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }
}

/// `C_ij = 1 − prev_i · curr_j`, clamped to [0, 2].
pub fn build_cost(prev: ArrayView2<'_, f64>, curr: ArrayView2<'_, f64>) -> Result<CostMatrix> {
    if prev.dim() != curr.dim() {
        return Err(Error::Shape(format!(
            "frames differ in shape: prev {:?}, curr {:?}",
            prev.dim(),
            curr.dim()
        )));
    }
    let entries = prev.dot(&curr.t()).mapv(|dot| (1.0 - dot).clamp(0.0, 2.0));
    CostMatrix::from_entries(entries)
}

/// The (N+1)×(N+1) cost with a slack row (birth) and slack column (death).
#[derive(Clone, Debug, PartialEq)]
pub struct AugmentedCost {
    entries: Array2<f64>,
}

impl AugmentedCost {
    /// Number of real tokens per side.
    pub fn n(&self) -> usize {
        self.entries.nrows() - 1
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    /// The real-token block.
    pub fn real_block(&self) -> ArrayView2<'_, f64> {
        let n = self.n();
        self.entries.slice(ndarray::s![..n, ..n])
    }
}

pub fn augment_cost(cost: &CostMatrix, c_birth: f64, c_death: f64) -> Result<AugmentedCost> {
    for (name, c) in [("c_birth", c_birth), ("c_death", c_death)] {
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::Domain(format!("{name} must be a nonnegative finite real, got {c}")));
        }
    }
    let n = cost.n();
    let mut entries = Array2::<f64>::zeros((n + 1, n + 1));
    entries.slice_mut(ndarray::s![..n, ..n]).assign(cost.entries());
    entries.slice_mut(ndarray::s![..n, n]).fill(c_death);
    entries.slice_mut(ndarray::s![n, ..n]).fill(c_birth);
    entries[[n, n]] = 0.0;
    Ok(AugmentedCost { entries })
}

/// `[1/N, …, 1/N, 1]`: uniform real mass plus one unit of slack. Total mass 2.
#[derive(Clone, Debug, PartialEq)]
pub struct Marginal {
    weights: Vec<f64>,
}

impl Marginal {
    pub fn with_slack(n: usize) -> Self {
        assert!(n >= 1, "marginal needs at least one real token");
        let mut weights = vec![1.0 / n as f64; n];
        weights.push(1.0);
        Self { weights }
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n >= 1, "marginal needs at least one token");
        Self {
            weights: vec![1.0 / n as f64; n],
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}
