//! One frame pair with a token that has no plausible source: the slack row
//! supplies its mass as birth evidence. The entropic plan is printed next to
//! the exact plan.

use ndarray::array;
use tokensieve::transport::{
    augment_cost, build_cost, exact_ot_oracle, sinkhorn, temporal_scores, Marginal,
};

fn main() -> tokensieve::Result<()> {
    let prev = array![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
    // token 0 persists, token 1 is orthogonal to both sources
    let curr = array![[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]];

    let cost = augment_cost(&build_cost(prev.view(), curr.view())?, 0.35, 0.35)?;
    let marginal = Marginal::with_slack(2);
    println!("augmented cost:\n{:.3}", cost.entries());

    for (eps, iters) in [(0.1, 20), (0.01, 500)] {
        let plan = sinkhorn(&cost, &marginal, eps, iters)?;
        let scores = temporal_scores(&plan, &cost)?;
        println!("\nepsilon {eps}, {iters} iterations");
        println!("plan:\n{:.4}", plan.entries());
        println!("e = {:.4?}  b = {:.4?}  death = {:.4?}", scores.e, scores.b, scores.death);
        println!("column residual {:.2e}", plan.col_residual());
    }

    let exact = exact_ot_oracle(&cost, &marginal)?;
    println!("\nexact plan:\n{:.4}", exact.entries());
    println!("exact objective {:.6}", exact.objective(cost.entries().view()));
    Ok(())
}
