//! Patch priors of a synthetic frame under every spatial operator.

use ndarray::Array2;
use tokensieve::frequency::{laplacian_response, patch_grid, prior_variant};
use tokensieve::{ImageFrame, SpatialOperator};

fn main() -> tokensieve::Result<()> {
    let mut impulse = Array2::zeros((5, 5));
    impulse[[2, 2]] = 1.0;
    let r = laplacian_response(&ImageFrame::new(impulse)?)?;
    println!("laplacian magnitude of an impulse:\n{}", r.values());

    // smooth gradient with a noisy square in the lower right
    let (h, w) = (48, 48);
    let pixels = Array2::from_shape_fn((h, w), |(y, x)| {
        let base = 0.3 + 0.4 * x as f64 / w as f64;
        if y >= 32 && x >= 32 {
            base + if (x * 7 + y * 13) % 3 == 0 { 0.25 } else { -0.15 }
        } else {
            base
        }
    });
    let frame = ImageFrame::new(pixels)?;
    let (rows, cols) = patch_grid(9);
    for op in SpatialOperator::ALL {
        let prior = prior_variant(op, &frame, rows, cols)?;
        println!("\n{op} ({rows}x{cols}):");
        for row in prior.values.chunks(cols) {
            println!("  {:.3?}", row);
        }
    }
    Ok(())
}
