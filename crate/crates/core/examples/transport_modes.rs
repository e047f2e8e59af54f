//! Temporal evidence of the four transport formulations on one instance with
//! six orthogonal tokens injected into the second frame.

use tokensieve::bench::gen_orthogonal_injection;
use tokensieve::transport::{temporal_scores_variant, TransportParams};
use tokensieve::{project_normalize, Projector, TransportMode};

fn main() -> tokensieve::Result<()> {
    let (tokens, injected) = gen_orthogonal_injection(64, 64, 6, 0.02, 1)?;
    let z = project_normalize(&tokens, &Projector::Identity, 1e-8)?;
    let params = TransportParams::default();
    println!("injected {injected:?}");
    println!("{:<16} {:>12} {:>12} {:>10}", "mode", "min inj", "max clean", "top-6 hit");
    for mode in TransportMode::ALL {
        let ts = temporal_scores_variant(mode, z.frame(0), z.frame(1), &params)?;
        let s = ts.combined(1.0);
        let min_inj = injected.iter().map(|&j| s[j]).fold(f64::INFINITY, f64::min);
        let max_clean = (0..s.len())
            .filter(|j| !injected.contains(j))
            .map(|j| s[j])
            .fold(f64::NEG_INFINITY, f64::max);
        let mut order: Vec<usize> = (0..s.len()).collect();
        order.sort_by(|&a, &b| s[b].total_cmp(&s[a]).then(a.cmp(&b)));
        let hits = order[..6].iter().filter(|j| injected.contains(j)).count();
        println!("{:<16} {min_inj:>12.6} {max_clean:>12.6} {hits:>10}", mode.as_str());
    }
    Ok(())
}
