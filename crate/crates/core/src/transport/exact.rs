//! Exact (unregularised) transport for small slack-augmented problems.
//!
//! With the slack marginal scaled by N every real token carries one unit of
//! mass and the slack node carries N units. The transportation problem then has
//! an integral optimal vertex, so it is solved exactly as a 2N×2N assignment
//! problem with the slack node expanded into N copies on each side.

use ndarray::{Array2, ArrayView2};

use super::cost::{AugmentedCost, Marginal};
use super::sinkhorn::TransportPlan;
use crate::error::{Error, Result};

pub const ORACLE_MAX_N: usize = 6;

pub fn exact_ot_oracle(cost: &AugmentedCost, marginal: &Marginal) -> Result<TransportPlan> {
    let n = cost.n();
    if n > ORACLE_MAX_N {
        return Err(Error::Size(format!(
            "exact oracle is limited to N <= {ORACLE_MAX_N}, got N = {n}"
        )));
    }
    if marginal.len() != n + 1 {
        return Err(Error::Shape(format!(
            "marginal has length {} but cost is {}x{}",
            marginal.len(),
            n + 1,
            n + 1
        )));
    }
    if cost.entries().iter().any(|c| !c.is_finite()) {
        return Err(Error::Domain("cost holds a non-finite entry".into()));
    }

    // copy k < n is real token k, copies n..2n are the slack node
    let m = 2 * n;
    let node = |k: usize| k.min(n);
    let mut expanded = Array2::<f64>::zeros((m, m));
    for ((r, c), v) in expanded.indexed_iter_mut() {
        *v = cost.entries()[[node(r), node(c)]];
    }
    let assignment = hungarian(expanded.view());

    let unit = 1.0 / n as f64;
    let mut entries = Array2::<f64>::zeros((n + 1, n + 1));
    for (r, &c) in assignment.iter().enumerate() {
        entries[[node(r), node(c)]] += unit;
    }
    Ok(TransportPlan::from_entries(entries, marginal.weights()))
}

/// Minimum-cost perfect matching on a square matrix; returns the column
/// assigned to each row. O(n³) shortest augmenting path with potentials.
pub fn hungarian(cost: ArrayView2<'_, f64>) -> Vec<usize> {
    let n = cost.nrows();
    assert_eq!(n, cost.ncols(), "assignment cost must be square");
    // 1-based arrays with a virtual column 0
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        let mut min_v = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let reduced = cost[[i0 - 1, j - 1]] - u[i0] - v[j];
                if reduced < min_v[j] {
                    min_v[j] = reduced;
                    way[j] = j0;
                }
                if min_v[j] < delta {
                    delta = min_v[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_v[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0; n];
    for j in 1..=n {
        assignment[row_of[j] - 1] = j - 1;
    }
    assignment
}
