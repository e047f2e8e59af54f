//! Forensic scoring, per-frame Top-K selection and the end-to-end `compress` pipeline.

use serde::Serialize;

use crate::config::{validate_ratio, RunConfig};
use crate::error::{Error, Result};
use crate::frequency::{patch_grid, prior_variant};
use crate::projection::{project_normalize, NormalizedTokens, Projector};
use crate::tensor_io::{ImageFrame, TokenTensor};
use crate::transport::{spatial_novelty, temporal_scores_variant, TemporalScores, TransportParams};

/// `s_j = (e_j + λ·b_j)·(1 + η·U_j)`.
pub fn forensic_score(
    e: &[f64],
    b: &[f64],
    u: &[f64],
    lambda_birth: f64,
    eta_forensic: f64,
) -> Result<Vec<f64>> {
    if e.len() != b.len() || e.len() != u.len() {
        return Err(Error::Shape(format!(
            "score inputs differ in length: e {}, b {}, U {}",
            e.len(),
            b.len(),
            u.len()
        )));
    }
    for (name, v) in [("lambda_birth", lambda_birth), ("eta_forensic", eta_forensic)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::Domain(format!("{name} must be a nonnegative real")));
        }
    }
    Ok(e.iter()
        .zip(b)
        .zip(u)
        .map(|((e, b), u)| (e + lambda_birth * b) * (1.0 + eta_forensic * u))
        .collect())
}

/// `K = max(1, ⌊ρ·N⌋)`.
pub fn retained_count(n: usize, ratio: f64) -> Result<usize> {
    validate_ratio(ratio)?;
    Ok(((ratio * n as f64).floor() as usize).clamp(1, n.max(1)))
}

/// Indices of the K highest scores, ties to the lower index, returned ascending.
pub fn select_topk(scores: &[f64], ratio: f64) -> Result<Vec<usize>> {
    if scores.is_empty() {
        return Err(Error::Shape("cannot select from an empty frame".into()));
    }
    let k = retained_count(scores.len(), ratio)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut kept = order[..k].to_vec();
    kept.sort_unstable();
    Ok(kept)
}

/// Scores of one frame.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrameScores {
    pub frame: usize,
    /// True when `e` is the spatial-novelty fallback (no predecessor frame).
    pub spatial_fallback: bool,
    pub e: Vec<f64>,
    pub b: Vec<f64>,
    pub death: Vec<f64>,
    pub u: Vec<f64>,
    pub s: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScoreBundle {
    pub config: RunConfig,
    pub frames: Vec<FrameScores>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrameSelection {
    pub frame: usize,
    /// Retained patch-token indices, ascending.
    pub kept: Vec<usize>,
    /// Scores of the retained tokens, aligned with `kept`.
    pub scores: Vec<f64>,
    /// The global token is never scored and always retained.
    pub global_kept: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelectionResult {
    pub config: RunConfig,
    pub frames: Vec<FrameSelection>,
    pub k: usize,
    pub tokens_before: usize,
    pub tokens_after: usize,
}

impl SelectionResult {
    pub fn kept(&self, frame: usize) -> &[usize] {
        &self.frames[frame].kept
    }
}

/// Temporal term per frame. Frame 0 (and every single-frame input) falls back
/// to spatial novelty with zero birth evidence.
pub fn temporal_terms(z: &NormalizedTokens, config: &RunConfig) -> Result<Vec<(bool, TemporalScores)>> {
    let params = TransportParams::from(config);
    let n = z.tokens_per_frame();
    let mut out = Vec::with_capacity(z.frames());
    out.push((
        true,
        TemporalScores {
            e: spatial_novelty(z.frame(0)),
            b: vec![0.0; n],
            death: vec![0.0; n],
        },
    ));
    for t in 1..z.frames() {
        let scores = temporal_scores_variant(config.transport_mode, z.frame(t - 1), z.frame(t), &params)?;
        out.push((false, scores));
    }
    Ok(out)
}

/// Scores every token without selecting.
pub fn score(
    tokens: &TokenTensor,
    frames: Option<&[ImageFrame]>,
    config: &RunConfig,
    projector: &Projector,
) -> Result<ScoreBundle> {
    config.validate()?;
    let n = tokens.tokens_per_frame();
    if let Some(frames) = frames {
        if frames.len() != tokens.frames() {
            return Err(Error::Shape(format!(
                "{} frames supplied for a tensor with T = {}",
                frames.len(),
                tokens.frames()
            )));
        }
    }
    let z = project_normalize(tokens, projector, config.epsilon_norm)?;
    let temporal = temporal_terms(&z, config)?;
    let (grid_rows, grid_cols) = patch_grid(n);

    let mut out = Vec::with_capacity(temporal.len());
    for (t, (fallback, ts)) in temporal.into_iter().enumerate() {
        let u = match frames {
            Some(frames) => {
                prior_variant(config.spatial_operator, &frames[t], grid_rows, grid_cols)?.values
            }
            None => vec![0.0; n],
        };
        let s = forensic_score(&ts.e, &ts.b, &u, config.lambda_birth, config.eta_forensic)?;
        out.push(FrameScores {
            frame: t,
            spatial_fallback: fallback,
            e: ts.e,
            b: ts.b,
            death: ts.death,
            u,
            s,
        });
    }
    Ok(ScoreBundle {
        config: config.clone(),
        frames: out,
    })
}

/// Selects the Top-K tokens of every frame from precomputed scores.
pub fn select(bundle: &ScoreBundle) -> Result<SelectionResult> {
    let config = &bundle.config;
    let t = bundle.frames.len();
    let n = bundle.frames.first().map_or(0, |f| f.s.len());
    let k = retained_count(n, config.ratio)?;
    let frames = bundle
        .frames
        .iter()
        .map(|f| {
            let kept = select_topk(&f.s, config.ratio)?;
            Ok(FrameSelection {
                frame: f.frame,
                scores: kept.iter().map(|&j| f.s[j]).collect(),
                kept,
                global_kept: true,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SelectionResult {
        config: config.clone(),
        frames,
        k,
        tokens_before: t * (n + 1),
        tokens_after: t * (k + 1),
    })
}

/// Project, score and prune. `frames`, when given, must hold one image per token frame.
pub fn compress(
    tokens: &TokenTensor,
    frames: Option<&[ImageFrame]>,
    config: &RunConfig,
    projector: &Projector,
) -> Result<(SelectionResult, ScoreBundle)> {
    let bundle = score(tokens, frames, config, projector)?;
    let selection = select(&bundle)?;
    Ok((selection, bundle))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use proptest::prelude::*;

    #[test]
    fn forensic_score_examples() {
        let s = forensic_score(&[0.1, 0.8], &[0.0, 0.5], &[0.0, 1.0], 1.0, 1.0).unwrap();
        assert!((s[0] - 0.1).abs() < 1e-15);
        assert!((s[1] - 2.6).abs() < 1e-15);

        let s = forensic_score(&[0.0; 3], &[0.0; 3], &[0.2, 1.0, 0.7], 1.0, 5.0).unwrap();
        assert_eq!(s, vec![0.0; 3]);

        let e = [0.3, 0.1];
        let b = [0.05, 0.2];
        let s = forensic_score(&e, &b, &[1.0, 0.5], 2.0, 0.0).unwrap();
        assert_eq!(s, vec![0.3 + 2.0 * 0.05, 0.1 + 2.0 * 0.2]);
    }

    #[test]
    fn forensic_score_errors() {
        assert!(matches!(forensic_score(&[0.0], &[0.0, 1.0], &[0.0], 1.0, 1.0), Err(Error::Shape(_))));
        assert!(matches!(forensic_score(&[0.0], &[0.0], &[0.0], -1.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn topk_examples() {
        assert_eq!(retained_count(10, 0.25).unwrap(), 2);
        assert_eq!(retained_count(576, 0.1).unwrap(), 57);
        assert_eq!(retained_count(4, 0.05).unwrap(), 1);
        let s: Vec<f64> = (0..7).map(|i| i as f64).collect();
        assert_eq!(select_topk(&s, 1.0).unwrap(), (0..7).collect::<Vec<_>>());
        assert_eq!(select_topk(&[0.5, 0.9, 0.5, 0.1], 0.5).unwrap(), vec![0, 1]);
        assert!(matches!(select_topk(&[1.0], 1.5), Err(Error::Domain(_))));
        assert!(matches!(select_topk(&[1.0], 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn identical_frames_keep_first_k() {
        let row: Vec<f64> = (0..8).map(|i| (i as f64).sin()).collect();
        let values: Vec<f64> = row.iter().cycle().take(2 * 5 * 8).copied().collect();
        let tokens = TokenTensor::from_shape_vec((2, 5, 8), values).unwrap();
        let config = RunConfig {
            ratio: 0.4,
            ..RunConfig::default()
        };
        let (sel, bundle) = compress(&tokens, None, &config, &Projector::Identity).unwrap();
        for f in &bundle.frames {
            assert!(f.s.windows(2).all(|w| w[0] == w[1]), "{:?}", f.s);
        }
        for f in &sel.frames {
            assert_eq!(f.kept, vec![0, 1]);
            assert!(f.global_kept);
        }
        assert_eq!(sel.tokens_before, 12);
        assert_eq!(sel.tokens_after, 6);
    }

    #[test]
    fn frame_count_and_grid_are_checked() {
        let tokens = TokenTensor::from_shape_vec((2, 4, 3), vec![0.5; 24]).unwrap();
        let f = ImageFrame::new(Array2::from_elem((8, 8), 0.5)).unwrap();
        let config = RunConfig::default();
        let one = vec![f.clone()];
        assert!(matches!(compress(&tokens, Some(&one), &config, &Projector::Identity), Err(Error::Shape(_))));

        // 4 tokens map onto a 2x2 grid; a 3x3 frame fits, but 64 tokens (8x8) would not
        let tokens = TokenTensor::from_shape_vec((1, 64, 2), vec![0.5; 128]).unwrap();
        let small = vec![ImageFrame::new(Array2::from_elem((3, 3), 0.5)).unwrap()];
        assert!(matches!(compress(&tokens, Some(&small), &config, &Projector::Identity), Err(Error::Size(_))));
    }

    #[test]
    fn single_frame_uses_spatial_novelty() {
        let tokens = TokenTensor::from_shape_vec(
            (1, 3, 2),
            vec![1.0, 0.0, 0.0, 1.0, 0.0, -1.0],
        )
        .unwrap();
        let config = RunConfig {
            ratio: 0.34,
            ..RunConfig::default()
        };
        let (sel, bundle) = compress(&tokens, None, &config, &Projector::Identity).unwrap();
        assert!(bundle.frames[0].spatial_fallback);
        assert_eq!(bundle.frames[0].b, vec![0.0; 3]);
        // the two mirrored tokens tie; the lower index wins
        assert_eq!(sel.kept(0), &[1]);
    }

    proptest! {
        #[test]
        fn kept_scores_dominate_dropped(
            scores in proptest::collection::vec(0.0f64..1.0, 1..40),
            ratio in 0.01f64..=1.0,
        ) {
            let kept = select_topk(&scores, ratio).unwrap();
            let k = retained_count(scores.len(), ratio).unwrap();
            prop_assert_eq!(kept.len(), k);
            prop_assert!(kept.windows(2).all(|w| w[0] < w[1]));
            for j in 0..scores.len() {
                if kept.contains(&j) { continue; }
                for &i in &kept {
                    prop_assert!(scores[i] > scores[j] || (scores[i] == scores[j] && i < j));
                }
            }
        }

        #[test]
        fn selection_ignores_positive_rescaling(
            e in proptest::collection::vec(0.0f64..1.0, 2..30),
            c in 0.01f64..100.0,
            ratio in 0.05f64..=1.0,
        ) {
            let b: Vec<f64> = e.iter().map(|x| (x * 7.0).fract()).collect();
            let u: Vec<f64> = e.iter().map(|x| (x * 13.0).fract()).collect();
            let s1 = forensic_score(&e, &b, &u, 1.0, 1.0).unwrap();
            let es: Vec<f64> = e.iter().map(|x| x * c).collect();
            let bs: Vec<f64> = b.iter().map(|x| x * c).collect();
            let s2 = forensic_score(&es, &bs, &u, 1.0, 1.0).unwrap();
            // exact ties can split under rounding; compare only when the ordering is strict
            let mut sorted = s1.clone();
            sorted.sort_by(f64::total_cmp);
            prop_assume!(sorted.windows(2).all(|w| w[1] - w[0] > 1e-9));
            prop_assert_eq!(select_topk(&s1, ratio).unwrap(), select_topk(&s2, ratio).unwrap());
        }

        #[test]
        fn eta_lifts_high_frequency_token(
            u in proptest::collection::vec(0.0f64..1.0, 2..20),
            temporal in 0.01f64..1.0,
            eta in 0.0f64..5.0,
            d_eta in 0.0f64..5.0,
        ) {
            let n = u.len();
            let e = vec![temporal; n];
            let b = vec![0.0; n];
            let top = (0..n).max_by(|&a, &b| u[a].total_cmp(&u[b]).then(b.cmp(&a))).unwrap();
            let rank = |s: &[f64]| s.iter().enumerate().filter(|&(j, v)| *v > s[top] || (*v == s[top] && j < top)).count();
            let lo = forensic_score(&e, &b, &u, 1.0, eta).unwrap();
            let hi = forensic_score(&e, &b, &u, 1.0, eta + d_eta).unwrap();
            prop_assert!(rank(&hi) <= rank(&lo));
        }
    }
}
