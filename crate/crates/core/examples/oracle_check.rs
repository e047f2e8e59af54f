//! Sinkhorn at small epsilon against the exact assignment solver.

use tokensieve::transport::{oracle_check, OracleCheckConfig};

fn main() -> tokensieve::Result<()> {
    let report = oracle_check(&OracleCheckConfig::default())?;
    for (k, inst) in report.instances.iter().enumerate().take(6) {
        println!(
            "#{k} N={} sinkhorn {:.6} exact {:.6} gap {:.2e}",
            inst.n, inst.sinkhorn_objective, inst.exact_objective, inst.relative_gap
        );
    }
    println!("max relative gap over {} instances: {:.3e}", report.instances.len(), report.max_relative_gap);
    Ok(())
}
