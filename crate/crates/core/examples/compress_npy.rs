//! Writes a small token tensor to NPY, loads it back and prunes it to 25 %.
//!
//! cargo run --example compress_npy

use tokensieve::bench::gen_orthogonal_injection;
use tokensieve::tensor_io::{save_token_tensor, to_canonical_json};
use tokensieve::{compress, load_token_tensor, Projector, RunConfig};

fn main() -> tokensieve::Result<()> {
    let dir = std::env::temp_dir().join("tokensieve-compress-example");
    std::fs::create_dir_all(&dir).map_err(|e| tokensieve::Error::io(&dir, e))?;
    let path = dir.join("tokens.npy");

    let (tokens, injected) = gen_orthogonal_injection(16, 32, 4, 0.02, 7)?;
    save_token_tensor(&path, &tokens)?;
    let tokens = load_token_tensor(&path)?;

    let config = RunConfig { ratio: 0.25, ..RunConfig::default() };
    let (selection, scores) = compress(&tokens, None, &config, &Projector::Identity)?;

    println!("injected into frame 1: {injected:?}");
    for f in &selection.frames {
        println!("frame {} keeps {:?} (+ global token)", f.frame, f.kept);
    }
    println!(
        "tokens {} -> {} (K = {})",
        selection.tokens_before, selection.tokens_after, selection.k
    );
    println!("birth evidence of frame 1: {:.4?}", scores.frames[1].b);
    println!("{}", to_canonical_json(&selection.frames[1])?);
    Ok(())
}
