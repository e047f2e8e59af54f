//! High-frequency spatial prior: a fixed 3×3 filter response average-pooled onto
//! the patch grid and max-normalised into [0, 1].

use ndarray::{Array2, ArrayView2};
use serde::Serialize;

use crate::config::SpatialOperator;
use crate::error::{Error, Result};
use crate::tensor_io::ImageFrame;

/// 4-neighbour discrete Laplacian. Swap for `[[1,1,1],[1,-8,1],[1,1,1]]` to
/// try the 8-neighbour stencil.
pub const LAPLACIAN_KERNEL: [[f64; 3]; 3] = [[0.0, 1.0, 0.0], [1.0, -4.0, 1.0], [0.0, 1.0, 0.0]];

const SOBEL_X: [[f64; 3]; 3] = [[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]];
const SOBEL_Y: [[f64; 3]; 3] = [[-1.0, -2.0, -1.0], [0.0, 0.0, 0.0], [1.0, 2.0, 1.0]];

/// Nonnegative per-pixel filter magnitude.
#[derive(Clone, Debug, PartialEq)]
pub struct ResponseMap {
    values: Array2<f64>,
}

impl ResponseMap {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Validation("response map must be finite and nonnegative".into()));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }
}

/// Per-patch prior in row-major grid order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PatchPrior {
    pub grid_rows: usize,
    pub grid_cols: usize,
    pub values: Vec<f64>,
}

impl PatchPrior {
    pub fn zeros(grid_rows: usize, grid_cols: usize) -> Self {
        Self {
            grid_rows,
            grid_cols,
            values: vec![0.0; grid_rows * grid_cols],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Grid used for N patch tokens: the most square factorisation with
/// rows ≤ cols (24×24 for 576, 1×N for primes).
pub fn patch_grid(n: usize) -> (usize, usize) {
    assert!(n >= 1);
    let mut rows = (n as f64).sqrt() as usize;
    while rows > 1 && !n.is_multiple_of(rows) {
        rows -= 1;
    }
    let rows = rows.max(1);
    (rows, n / rows)
}

/// 3×3 correlation with replicate (edge-clamped) borders.
///
/// Kernels must sum to zero, so the response is accumulated over differences to
/// the centre pixel. Constant regions then give exactly 0.
fn filter3(img: ArrayView2<'_, f64>, kernel: &[[f64; 3]; 3]) -> Array2<f64> {
    debug_assert_eq!(kernel.iter().flatten().sum::<f64>(), 0.0);
    let (h, w) = img.dim();
    let at = |y: isize, x: isize| {
        let y = y.clamp(0, h as isize - 1) as usize;
        let x = x.clamp(0, w as isize - 1) as usize;
        img[[y, x]]
    };
    Array2::from_shape_fn((h, w), |(y, x)| {
        let centre = img[[y, x]];
        let mut acc = 0.0;
        for (ky, krow) in kernel.iter().enumerate() {
            for (kx, &k) in krow.iter().enumerate() {
                if k != 0.0 && !(ky == 1 && kx == 1) {
                    acc += k * (at(y as isize + ky as isize - 1, x as isize + kx as isize - 1) - centre);
                }
            }
        }
        acc
    })
}

pub fn laplacian_response(frame: &ImageFrame) -> Result<ResponseMap> {
    check_frame(frame)?;
    ResponseMap::new(filter3(frame.pixels().view(), &LAPLACIAN_KERNEL).mapv(f64::abs))
}

pub fn sobel_response(frame: &ImageFrame) -> Result<ResponseMap> {
    check_frame(frame)?;
    let gx = filter3(frame.pixels().view(), &SOBEL_X);
    let gy = filter3(frame.pixels().view(), &SOBEL_Y);
    let mag = ndarray::Zip::from(&gx).and(&gy).map_collect(|a, b| a.hypot(*b));
    ResponseMap::new(mag)
}

fn check_frame(frame: &ImageFrame) -> Result<()> {
    if frame.height() < 3 || frame.width() < 3 {
        return Err(Error::Size(format!(
            "frame is {}x{}, filters need at least 3x3",
            frame.height(),
            frame.width()
        )));
    }
    Ok(())
}

/// Half-open pixel ranges of each block along one axis; the last block takes
/// the remainder.
fn block_bounds(len: usize, blocks: usize) -> Vec<(usize, usize)> {
    let base = len / blocks;
    (0..blocks)
        .map(|b| {
            let start = b * base;
            let end = if b + 1 == blocks { len } else { start + base };
            (start, end)
        })
        .collect()
}

fn check_grid(h: usize, w: usize, grid_rows: usize, grid_cols: usize) -> Result<()> {
    if grid_rows == 0 || grid_cols == 0 || grid_rows > h || grid_cols > w {
        return Err(Error::Size(format!(
            "grid {grid_rows}x{grid_cols} does not fit a {h}x{w} image"
        )));
    }
    Ok(())
}

fn pool_with(
    values: ArrayView2<'_, f64>,
    grid_rows: usize,
    grid_cols: usize,
    reduce: impl Fn(ArrayView2<'_, f64>) -> f64,
) -> Result<PatchPrior> {
    let (h, w) = values.dim();
    check_grid(h, w, grid_rows, grid_cols)?;
    let rows = block_bounds(h, grid_rows);
    let cols = block_bounds(w, grid_cols);
    let mut out = Vec::with_capacity(grid_rows * grid_cols);
    for &(y0, y1) in &rows {
        for &(x0, x1) in &cols {
            out.push(reduce(values.slice(ndarray::s![y0..y1, x0..x1])));
        }
    }
    Ok(max_normalize(PatchPrior {
        grid_rows,
        grid_cols,
        values: out,
    }))
}

fn max_normalize(mut prior: PatchPrior) -> PatchPrior {
    let max = prior.values.iter().copied().fold(0.0, f64::max);
    if max > 0.0 {
        for v in &mut prior.values {
            *v /= max;
        }
    }
    prior
}

/// Block means, then divide by the largest block mean.
pub fn pool_prior(map: &ResponseMap, grid_rows: usize, grid_cols: usize) -> Result<PatchPrior> {
    pool_with(map.values().view(), grid_rows, grid_cols, |block| {
        block.sum() / block.len() as f64
    })
}

/// Population variance, shifted by the first pixel so constant blocks give exactly 0.
fn block_variance(block: ArrayView2<'_, f64>) -> f64 {
    let n = block.len() as f64;
    let shift = block.iter().next().copied().unwrap_or(0.0);
    let mean = block.iter().map(|v| v - shift).sum::<f64>() / n;
    block
        .iter()
        .map(|v| {
            let d = v - shift - mean;
            d * d
        })
        .sum::<f64>()
        / n
}

pub fn prior_variant(
    op: SpatialOperator,
    frame: &ImageFrame,
    grid_rows: usize,
    grid_cols: usize,
) -> Result<PatchPrior> {
    check_grid(frame.height(), frame.width(), grid_rows, grid_cols)?;
    match op {
        SpatialOperator::None => Ok(PatchPrior::zeros(grid_rows, grid_cols)),
        SpatialOperator::PatchVariance => {
            pool_with(frame.pixels().view(), grid_rows, grid_cols, block_variance)
        }
        SpatialOperator::Sobel => pool_prior(&sobel_response(frame)?, grid_rows, grid_cols),
        SpatialOperator::Laplacian => pool_prior(&laplacian_response(frame)?, grid_rows, grid_cols),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    fn frame(pixels: Array2<f64>) -> ImageFrame {
        ImageFrame::unclamped(pixels).unwrap()
    }

    #[test]
    fn constant_frame_has_no_response() {
        for c in [0.0, 0.3, 1.0] {
            let r = laplacian_response(&frame(Array2::from_elem((5, 7), c))).unwrap();
            assert!(r.values().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn impulse_response() {
        let mut px = Array2::zeros((5, 5));
        px[[2, 2]] = 1.0;
        let r = laplacian_response(&frame(px)).unwrap();
        let expected = array![
            [0.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0, 0.0],
            [0.0, 1.0, 4.0, 1.0, 0.0],
            [0.0, 0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 0.0],
        ];
        assert_eq!(r.values(), &expected);
    }

    #[test]
    fn ramp_interior_vanishes() {
        let w = 8;
        let px = Array2::from_shape_fn((6, w), |(_, x)| x as f64 / w as f64);
        let r = laplacian_response(&frame(px)).unwrap();
        for y in 0..6 {
            for x in 1..w - 1 {
                assert!(r.values()[[y, x]] < 1e-15, "({y},{x})");
            }
        }
        // replicate padding bends the ramp at the left/right borders
        assert!(r.values()[[0, 0]] > 0.0);
    }

    #[test]
    fn too_small_frame() {
        // ImageFrame refuses sub-3 frames at construction already
        assert!(matches!(ImageFrame::new(Array2::zeros((2, 5))), Err(Error::Size(_))));
    }

    #[test]
    fn pooling_examples() {
        let zero = ResponseMap::new(Array2::zeros((4, 4))).unwrap();
        assert_eq!(pool_prior(&zero, 2, 2).unwrap().values, vec![0.0; 4]);

        let m = ResponseMap::new(array![[4.0, 0.0], [0.0, 0.0]]).unwrap();
        assert_eq!(pool_prior(&m, 2, 2).unwrap().values, vec![1.0, 0.0, 0.0, 0.0]);

        let mut v = Array2::zeros((4, 4));
        v.slice_mut(ndarray::s![0..2, 0..2]).fill(2.0);
        v.slice_mut(ndarray::s![0..2, 2..4]).assign(&array![[1.0, 1.0], [2.0, 0.0]]);
        let p = pool_prior(&ResponseMap::new(v).unwrap(), 2, 2).unwrap();
        assert_eq!(p.values, vec![1.0, 0.5, 0.0, 0.0]);
    }

    #[test]
    fn remainder_pixels_fold_into_last_block() {
        assert_eq!(block_bounds(7, 3), vec![(0, 2), (2, 4), (4, 7)]);
        // 5 columns into 2 blocks: [0,2) and [2,5)
        let mut v = Array2::zeros((1, 5));
        v[[0, 4]] = 3.0;
        let p = pool_with(v.view(), 1, 2, |b| b.sum() / b.len() as f64).unwrap();
        assert_eq!(p.values, vec![0.0, 1.0]);
    }

    #[test]
    fn grid_larger_than_image() {
        let m = ResponseMap::new(Array2::zeros((3, 3))).unwrap();
        assert!(matches!(pool_prior(&m, 4, 1), Err(Error::Size(_))));
        assert!(matches!(pool_prior(&m, 0, 1), Err(Error::Size(_))));
    }

    #[test]
    fn variants() {
        for c in [0.4, 0.6, 1.0 / 3.0] {
            let flat = frame(Array2::from_elem((24, 24), c));
            for op in SpatialOperator::ALL {
                let p = prior_variant(op, &flat, 4, 4).unwrap();
                assert_eq!(p.values, vec![0.0; 16], "{op} at {c}");
            }
        }

        // vertical step between columns 3 and 4 of an 8-wide frame, 1×4 grid
        let step = frame(Array2::from_shape_fn((6, 8), |(_, x)| if x >= 4 { 1.0 } else { 0.0 }));
        let p = prior_variant(SpatialOperator::Sobel, &step, 1, 4).unwrap();
        assert_eq!(p.values, vec![0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn grid_factorisation() {
        assert_eq!(patch_grid(576), (24, 24));
        assert_eq!(patch_grid(64), (8, 8));
        assert_eq!(patch_grid(12), (3, 4));
        assert_eq!(patch_grid(7), (1, 7));
        assert_eq!(patch_grid(1), (1, 1));
    }

    proptest! {
        #[test]
        fn prior_range_and_max(
            h in 3usize..12, w in 3usize..12,
            seed in proptest::collection::vec(0.0f64..1.0, 144),
            op_idx in 0usize..4,
        ) {
            let px = Array2::from_shape_fn((h, w), |(y, x)| seed[y * 12 + x]);
            let f = frame(px);
            let (gr, gc) = (h.min(3), w.min(2));
            let p = prior_variant(SpatialOperator::ALL[op_idx], &f, gr, gc).unwrap();
            prop_assert!(p.values.iter().all(|v| (0.0..=1.0).contains(v)));
            let max = p.values.iter().copied().fold(0.0, f64::max);
            prop_assert!(max == 0.0 || max == 1.0);
        }

        #[test]
        fn laplacian_ignores_brightness_shift(
            seed in proptest::collection::vec(0.0f64..1.0, 64),
            shift in -5.0f64..5.0,
        ) {
            let px = Array2::from_shape_vec((8, 8), seed).unwrap();
            let a = prior_variant(SpatialOperator::Laplacian, &frame(px.clone()), 4, 4).unwrap();
            let b = prior_variant(SpatialOperator::Laplacian, &frame(px + shift), 4, 4).unwrap();
            for (x, y) in a.values.iter().zip(&b.values) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }

        #[test]
        fn constant_response_pools_to_ones(h in 3usize..20, w in 3usize..20, c in 0.01f64..10.0) {
            let m = ResponseMap::new(Array2::from_elem((h, w), c)).unwrap();
            let p = pool_prior(&m, 3.min(h), 3.min(w)).unwrap();
            prop_assert!(p.values.iter().all(|&v| (v - 1.0).abs() < 1e-12));
        }
    }
}
