//! File formats: NPY token tensors, PGM/NPY frames, and canonical JSON reports.

pub mod npy;
pub mod pgm;
pub mod report;

use std::path::Path;

use ndarray::{Array2, Array3, ArrayView2};

use crate::error::{Error, Result};

pub use report::{save_report, to_canonical_json};

/// Patch-token embeddings of shape (frames, tokens per frame, dim), held in `f64`.
#[derive(Clone, Debug, PartialEq)]
pub struct TokenTensor {
    data: Array3<f64>,
}

impl TokenTensor {
    pub fn new(data: Array3<f64>) -> Result<Self> {
        let (t, n, d) = data.dim();
        if t == 0 || n == 0 || d == 0 {
            return Err(Error::Shape(format!("token tensor has empty axis: ({t}, {n}, {d})")));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation(format!(
                "token tensor holds a non-finite value at flat index {pos}"
            )));
        }
        Ok(Self { data })
    }

    pub fn from_shape_vec(shape: (usize, usize, usize), values: Vec<f64>) -> Result<Self> {
        let len = values.len();
        let data = Array3::from_shape_vec(shape, values).map_err(|_| {
            Error::Shape(format!("{len} values cannot fill shape {shape:?}"))
        })?;
        Self::new(data)
    }

    pub fn frames(&self) -> usize {
        self.data.dim().0
    }

    pub fn tokens_per_frame(&self) -> usize {
        self.data.dim().1
    }

    pub fn dim(&self) -> usize {
        self.data.dim().2
    }

    pub fn data(&self) -> &Array3<f64> {
        &self.data
    }

    pub fn frame(&self, t: usize) -> ArrayView2<'_, f64> {
        self.data.index_axis(ndarray::Axis(0), t)
    }

    pub fn into_inner(self) -> Array3<f64> {
        self.data
    }
}

/// Greyscale frame with pixels in [0, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct ImageFrame {
    pixels: Array2<f64>,
}

impl ImageFrame {
    /// Clamps into [0, 1]. Rejects frames smaller than 3×3 and NaN pixels.
    pub fn new(pixels: Array2<f64>) -> Result<Self> {
        Self::check(&pixels)?;
        Ok(Self {
            pixels: pixels.mapv(|v| v.clamp(0.0, 1.0)),
        })
    }

    /// Keeps values as given (no clamping); for synthetic filter checks that
    /// need intensities outside [0, 1].
    pub fn unclamped(pixels: Array2<f64>) -> Result<Self> {
        Self::check(&pixels)?;
        if pixels.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("frame holds a non-finite pixel".into()));
        }
        Ok(Self { pixels })
    }

    fn check(pixels: &Array2<f64>) -> Result<()> {
        let (h, w) = pixels.dim();
        if h < 3 || w < 3 {
            return Err(Error::Size(format!("frame is {h}x{w}, both sides must be at least 3")));
        }
        if pixels.iter().any(|v| v.is_nan()) {
            return Err(Error::Validation("frame holds a NaN pixel".into()));
        }
        Ok(())
    }

    pub fn height(&self) -> usize {
        self.pixels.dim().0
    }

    pub fn width(&self) -> usize {
        self.pixels.dim().1
    }

    pub fn pixels(&self) -> &Array2<f64> {
        &self.pixels
    }
}

pub fn load_token_tensor(path: &Path) -> Result<TokenTensor> {
    let arr = npy::read_npy_file(path)?;
    let [t, n, d] = arr.shape[..] else {
        return Err(Error::Shape(format!(
            "token tensor must be 3-dimensional, got shape {:?}",
            arr.shape
        )));
    };
    TokenTensor::from_shape_vec((t, n, d), arr.data)
}

pub fn save_token_tensor(path: &Path, tokens: &TokenTensor) -> Result<()> {
    let (t, n, d) = tokens.data.dim();
    let values: Vec<f64> = tokens.data.iter().copied().collect();
    npy::write_npy_f64(path, &[t, n, d], &values)
}

/// Loads a `P5` PGM (scaled by maxval) or a 2-D NPY (clamped).
pub fn load_frame(path: &Path) -> Result<ImageFrame> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_frame(&bytes)
}

pub fn decode_frame(bytes: &[u8]) -> Result<ImageFrame> {
    if bytes.starts_with(npy::MAGIC) {
        let arr = npy::parse_npy(bytes)?;
        let [h, w] = arr.shape[..] else {
            return Err(Error::Shape(format!(
                "frame NPY must be 2-dimensional, got shape {:?}",
                arr.shape
            )));
        };
        let pixels = Array2::from_shape_vec((h, w), arr.data).expect("shape checked by parser");
        return ImageFrame::new(pixels);
    }
    let pgm = pgm::parse_pgm(bytes)?;
    let scale = pgm.maxval as f64;
    let pixels = Array2::from_shape_vec(
        (pgm.height, pgm.width),
        pgm.samples.iter().map(|&s| s as f64 / scale).collect(),
    )
    .expect("sample count checked by parser");
    ImageFrame::new(pixels)
}

/// Reads a 2-D weight and 1-D bias pair for an affine projector.
pub fn load_matrix(path: &Path) -> Result<Array2<f64>> {
    let arr = npy::read_npy_file(path)?;
    let [r, c] = arr.shape[..] else {
        return Err(Error::Shape(format!("expected a 2-D array, got shape {:?}", arr.shape)));
    };
    Array2::from_shape_vec((r, c), arr.data).map_err(|e| Error::Shape(e.to_string()))
}

pub fn load_vector(path: &Path) -> Result<Vec<f64>> {
    let arr = npy::read_npy_file(path)?;
    if arr.shape.len() != 1 {
        return Err(Error::Shape(format!("expected a 1-D array, got shape {:?}", arr.shape)));
    }
    Ok(arr.data)
}
