//! Affine projection of patch tokens followed by L2 normalisation.

use ndarray::{Array1, Array2, Array3, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::tensor_io::TokenTensor;

/// The multimodal projector. `Identity` keeps the raw embedding dimension.
#[derive(Clone, Debug, PartialEq, Default)]
pub enum Projector {
    #[default]
    Identity,
    Affine {
        /// Shape (D_p, D_v).
        weight: Array2<f64>,
        bias: Array1<f64>,
    },
}

impl Projector {
    pub fn affine(weight: Array2<f64>, bias: Option<Array1<f64>>) -> Result<Self> {
        if weight.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("projector weight holds a non-finite value".into()));
        }
        let out_dim = weight.nrows();
        let bias = bias.unwrap_or_else(|| Array1::zeros(out_dim));
        if bias.len() != out_dim {
            return Err(Error::Shape(format!(
                "projector bias has length {} but weight has {out_dim} output rows",
                bias.len()
            )));
        }
        if bias.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("projector bias holds a non-finite value".into()));
        }
        Ok(Projector::Affine { weight, bias })
    }

    fn output_dim(&self, input_dim: usize) -> usize {
        match self {
            Projector::Identity => input_dim,
            Projector::Affine { weight, .. } => weight.nrows(),
        }
    }
}

/// Unit-norm projected tokens, shape (frames, tokens, D_p).
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedTokens {
    data: Array3<f64>,
}

impl NormalizedTokens {
    pub fn frames(&self) -> usize {
        self.data.dim().0
    }

    pub fn tokens_per_frame(&self) -> usize {
        self.data.dim().1
    }

    pub fn dim(&self) -> usize {
        self.data.dim().2
    }

    pub fn frame(&self, t: usize) -> ArrayView2<'_, f64> {
        self.data.index_axis(Axis(0), t)
    }

    pub fn data(&self) -> &Array3<f64> {
        &self.data
    }

    /// Wraps rows that are already unit-norm (or near-zero), skipping projection.
    pub fn from_unit_rows(data: Array3<f64>) -> Self {
        Self { data }
    }
}

/// `z = g(v) / (‖g(v)‖₂ + epsilon_norm)` for every token.
pub fn project_normalize(
    tokens: &TokenTensor,
    proj: &Projector,
    epsilon_norm: f64,
) -> Result<NormalizedTokens> {
    if !(epsilon_norm > 0.0 && epsilon_norm.is_finite()) {
        return Err(Error::Validation("epsilon_norm must be positive".into()));
    }
    let (t, n, d) = tokens.data().dim();
    if let Projector::Affine { weight, .. } = proj {
        if weight.ncols() != d {
            return Err(Error::Shape(format!(
                "projector expects input dim {} but tokens have dim {d}",
                weight.ncols()
            )));
        }
    }
    let out_dim = proj.output_dim(d);
    let mut out = Array3::<f64>::zeros((t, n, out_dim));
    for (src, mut dst) in tokens
        .data()
        .lanes(Axis(2))
        .into_iter()
        .zip(out.lanes_mut(Axis(2)))
    {
        match proj {
            Projector::Identity => dst.assign(&src),
            Projector::Affine { weight, bias } => dst.assign(&(weight.dot(&src) + bias)),
        }
        let norm = l2(dst.view());
        dst.mapv_inplace(|v| v / (norm + epsilon_norm));
    }
    Ok(NormalizedTokens { data: out })
}

pub(crate) fn l2(v: ArrayView1<'_, f64>) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    fn single(v: &[f64]) -> TokenTensor {
        TokenTensor::from_shape_vec((1, 1, v.len()), v.to_vec()).unwrap()
    }

    #[test]
    fn three_four_five() {
        let z = project_normalize(&single(&[3.0, 4.0, 0.0]), &Projector::Identity, 1e-8).unwrap();
        let row = z.frame(0).row(0).to_vec();
        for (got, want) in row.iter().zip([0.6, 0.8, 0.0]) {
            assert!((got - want).abs() < 1e-7);
        }
    }

    #[test]
    fn zero_token_stays_zero() {
        let z = project_normalize(&single(&[0.0, 0.0]), &Projector::Identity, 1e-8).unwrap();
        assert!(z.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn uniform_scale_cancels() {
        let p = Projector::affine(array![[2.0, 0.0], [0.0, 2.0]], None).unwrap();
        let z = project_normalize(&single(&[1.0, 0.0]), &p, 1e-8).unwrap();
        assert!((z.data()[[0, 0, 0]] - 1.0).abs() < 1e-7);
        assert!(z.data()[[0, 0, 1]].abs() < 1e-7);
    }

    #[test]
    fn affine_changes_dimension_and_applies_bias() {
        let p = Projector::affine(array![[1.0, 1.0]], Some(array![1.0])).unwrap();
        let z = project_normalize(&single(&[0.5, 0.5]), &p, 1e-8).unwrap();
        assert_eq!(z.dim(), 1);
        assert!((z.data()[[0, 0, 0]] - 1.0).abs() < 1e-7);
    }

    #[test]
    fn dimension_mismatch_names_both_dims() {
        let p = Projector::affine(Array2::zeros((4, 5)), None).unwrap();
        match project_normalize(&single(&[1.0, 2.0, 3.0]), &p, 1e-8) {
            Err(Error::Shape(msg)) => assert!(msg.contains('5') && msg.contains('3'), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bias_length_checked() {
        assert!(matches!(
            Projector::affine(Array2::zeros((2, 2)), Some(array![1.0])),
            Err(Error::Shape(_))
        ));
    }

    proptest! {
        // x/(‖x‖+ε) is within ε/‖x‖ of the unit direction, so 1e-9 needs ‖x‖ ≥ 10
        #[test]
        fn direction_invariance(
            v in proptest::collection::vec(-100.0f64..100.0, 1..8),
            alpha in 1.0f64..1e3,
        ) {
            prop_assume!(v.iter().map(|x| x * x).sum::<f64>().sqrt() >= 10.0);
            let scaled: Vec<f64> = v.iter().map(|x| x * alpha).collect();
            let a = project_normalize(&single(&v), &Projector::Identity, 1e-8).unwrap();
            let b = project_normalize(&single(&scaled), &Projector::Identity, 1e-8).unwrap();
            for (x, y) in a.data().iter().zip(b.data()) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }

        #[test]
        fn norms_never_exceed_one(
            v in proptest::collection::vec(-1e3f64..1e3, 1..8),
        ) {
            let z = project_normalize(&single(&v), &Projector::Identity, 1e-8).unwrap();
            let norm = l2(z.frame(0).row(0));
            prop_assert!(norm <= 1.0);
            let raw = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if raw > 1e-7 {
                prop_assert!(norm > 1.0 - 1e-6);
            }
        }
    }
}
