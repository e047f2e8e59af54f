//! Prefill cost of a 7B-class decoder on 8 frames of 576 tokens, before and
//! after keeping 10 % of the patch tokens.

use tokensieve::flops::{reduction_report, transformer_flops, ModelDims, SequenceBudget};
use tokensieve::scoring::retained_count;

fn main() -> tokensieve::Result<()> {
    let small = ModelDims { layers: 2, hidden: 8, ffn: 16 };
    println!("L=2 d=8 m=16 n=4: {} FLOPs", transformer_flops(&small, 4)?);

    let budget = SequenceBudget {
        n_sys: 32,
        n_txt: 32,
        frames: 8,
        tokens_per_frame: 576,
        kept: Some(retained_count(576, 0.1)? as u64),
    };
    let r = reduction_report(&ModelDims::SEVEN_B, &budget, 20)?;
    println!("sequence {} -> {}", r.sequence_before, r.sequence_after);
    println!("FLOPs    {:.4e} -> {:.4e}", r.flops_before as f64, r.flops_after as f64);
    println!("ratio    {:.4}", r.total_reduction_ratio);
    println!("attention term shrinks by {:.5} per frame", r.quad_reduction_factor);
    let saved = r.flops_before - r.flops_after;
    println!(
        "solver: {} cell updates, {:.2e} of the FLOPs saved",
        r.ot_overhead,
        r.ot_overhead as f64 / saved as f64
    );
    Ok(())
}
