//! Recall of injected tokens against a saliency baseline, and how well the
//! largest transport cost separates forged from pristine sequences.
//!
//! cargo run --release --example synthetic_bench [trials]

use tokensieve::bench::{run_bench, SynthConfig, DEFAULT_RATIOS};
use tokensieve::RunConfig;

fn main() -> tokensieve::Result<()> {
    let trials = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(20);
    let report = run_bench(&SynthConfig::default(), &RunConfig::default(), trials, &DEFAULT_RATIOS)?;

    println!("{trials} trials");
    println!("{:>6} {:>18} {:>18}", "ratio", "forensic", "saliency");
    for row in &report.recall {
        println!(
            "{:>6} {:>10.3} ± {:.3} {:>10.3} ± {:.3}",
            row.ratio, row.forensic.mean, row.forensic.std, row.saliency_proxy.mean, row.saliency_proxy.std
        );
    }
    let c = &report.cost_distribution;
    println!("mean cost  forged {:.5}  pristine {:.5}", c.forged.mean, c.pristine.mean);
    println!("p95 cost   forged {:.5}  pristine {:.5}", c.forged.p95, c.pristine.p95);
    println!("AUC of per-sequence max cost: {:.4}", report.separation_auc);
    Ok(())
}
