//! Seeded generators for smooth ("pristine") and artifact-bearing ("forged")
//! token sequences.
//!
//! Randomness comes from ChaCha20 seeded with `SynthConfig::seed`. Trial `k` of a
//! benchmark reads stream `k` of that seed, so trials are independent and each
//! is reproducible on its own.

use ndarray::{Array1, Array3, ArrayViewMut1, Axis};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor_io::TokenTensor;

/// Which frames receive artifacts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ArtifactFrames {
    /// One frame drawn uniformly from 1..T (frame 0 when T = 1).
    #[default]
    Random,
    Fixed(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub frames: usize,
    pub tokens: usize,
    pub dim: usize,
    /// Per-step perturbation scale. The step is `drift_sigma·g` with
    /// `g ~ N(0, I/D)`, so its expected squared norm is `drift_sigma²`
    /// regardless of the embedding dimension.
    pub drift_sigma: f64,
    /// Tokens replaced in each artifact frame.
    pub artifact_count: usize,
    pub artifact_frames: ArtifactFrames,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            frames: 8,
            tokens: 64,
            dim: 64,
            drift_sigma: 0.02,
            artifact_count: 6,
            artifact_frames: ArtifactFrames::Random,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.frames == 0 || self.tokens == 0 || self.dim == 0 {
            return Err(Error::Validation("frames, tokens and dim must be positive".into()));
        }
        if !(self.drift_sigma.is_finite() && self.drift_sigma >= 0.0) {
            return Err(Error::Validation("drift_sigma must be nonnegative".into()));
        }
        if self.artifact_count > self.tokens {
            return Err(Error::Domain(format!(
                "artifact_count {} exceeds tokens per frame {}",
                self.artifact_count, self.tokens
            )));
        }
        if let ArtifactFrames::Fixed(frames) = &self.artifact_frames {
            if let Some(bad) = frames.iter().find(|&&t| t >= self.frames) {
                return Err(Error::Validation(format!("artifact frame {bad} is out of range")));
            }
        }
        Ok(())
    }

    /// Generator for benchmark trial `trial`.
    pub fn trial_rng(&self, trial: u64) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(trial);
        rng
    }
}

/// Ground-truth `(frame, token)` pairs, sorted.
pub type ArtifactMask = Vec<(usize, usize)>;

fn gaussian_direction(rng: &mut ChaCha20Rng, mut out: ArrayViewMut1<'_, f64>) {
    for v in out.iter_mut() {
        *v = rng.sample(StandardNormal);
    }
    normalize(out);
}

fn normalize(mut v: ArrayViewMut1<'_, f64>) {
    let norm = v.dot(&v).sqrt();
    if norm > 0.0 {
        v.mapv_inplace(|x| x / norm);
    }
}

pub fn gen_pristine_with(cfg: &SynthConfig, rng: &mut ChaCha20Rng) -> Result<TokenTensor> {
    cfg.validate()?;
    let (t, n, d) = (cfg.frames, cfg.tokens, cfg.dim);
    let mut data = Array3::<f64>::zeros((t, n, d));
    for row in data.index_axis_mut(Axis(0), 0).rows_mut() {
        gaussian_direction(rng, row);
    }
    let scale = cfg.drift_sigma / (d as f64).sqrt();
    let mut step = Array1::<f64>::zeros(d);
    for f in 1..t {
        if scale == 0.0 {
            // renormalising a unit row is not bit-exact, so copy instead
            let prev = data.index_axis(Axis(0), f - 1).to_owned();
            data.index_axis_mut(Axis(0), f).assign(&prev);
            continue;
        }
        for j in 0..n {
            for v in step.iter_mut() {
                *v = scale * rng.sample::<f64, _>(StandardNormal);
            }
            let prev = data.slice(ndarray::s![f - 1, j, ..]).to_owned();
            let mut row = data.slice_mut(ndarray::s![f, j, ..]);
            row.assign(&(prev + &step));
            normalize(row);
        }
    }
    TokenTensor::new(data)
}

pub fn gen_forged_with(cfg: &SynthConfig, rng: &mut ChaCha20Rng) -> Result<(TokenTensor, ArtifactMask)> {
    let base = gen_pristine_with(cfg, rng)?;
    if cfg.artifact_count == 0 {
        return Ok((base, Vec::new()));
    }
    let frames = match &cfg.artifact_frames {
        ArtifactFrames::Random if cfg.frames == 1 => vec![0],
        ArtifactFrames::Random => vec![rng.random_range(1..cfg.frames)],
        ArtifactFrames::Fixed(frames) => {
            let mut f = frames.clone();
            f.sort_unstable();
            f.dedup();
            f
        }
    };
    let mut data = base.into_inner();
    let mut mask = Vec::with_capacity(frames.len() * cfg.artifact_count);
    for &f in &frames {
        let mut picked = sample(rng, cfg.tokens, cfg.artifact_count).into_vec();
        picked.sort_unstable();
        for j in picked {
            gaussian_direction(rng, data.slice_mut(ndarray::s![f, j, ..]));
            mask.push((f, j));
        }
    }
    Ok((TokenTensor::new(data)?, mask))
}

/// Pristine sequence from stream 0 of `cfg.seed`.
pub fn gen_pristine(cfg: &SynthConfig) -> Result<TokenTensor> {
    gen_pristine_with(cfg, &mut cfg.trial_rng(0))
}

/// Forged sequence from stream 0 of `cfg.seed`: the pristine sequence for the
/// same seed with `artifact_count` rows replaced by fresh random directions in
/// each artifact frame.
pub fn gen_forged(cfg: &SynthConfig) -> Result<(TokenTensor, ArtifactMask)> {
    gen_forged_with(cfg, &mut cfg.trial_rng(0))
}

/// A two-frame sequence whose second frame carries `count` tokens orthogonal
/// to every first-frame token.
///
/// First-frame tokens are random directions in the leading `dim − count`
/// coordinates. The second frame drifts them by `drift_sigma` (scaled as in
/// [`SynthConfig`]), then replaces `count` random rows with random directions
/// in the trailing `count` coordinates.
pub fn gen_orthogonal_injection(
    tokens: usize,
    dim: usize,
    count: usize,
    drift_sigma: f64,
    seed: u64,
) -> Result<(TokenTensor, Vec<usize>)> {
    if count == 0 || count >= dim || count > tokens {
        return Err(Error::Domain(format!(
            "need 0 < count < dim and count <= tokens, got count {count}, dim {dim}, tokens {tokens}"
        )));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let split = dim - count;
    let mut data = Array3::<f64>::zeros((2, tokens, dim));
    for row in data.index_axis_mut(Axis(0), 0).rows_mut() {
        gaussian_direction(&mut rng, row.slice_move(ndarray::s![..split]));
    }
    let scale = drift_sigma / (dim as f64).sqrt();
    for j in 0..tokens {
        let prev = data.slice(ndarray::s![0, j, ..]).to_owned();
        let mut row = data.slice_mut(ndarray::s![1, j, ..]);
        row.assign(&prev);
        for v in row.slice_mut(ndarray::s![..split]).iter_mut() {
            *v += scale * rng.sample::<f64, _>(StandardNormal);
        }
        normalize(row);
    }
    let mut injected = sample(&mut rng, tokens, count).into_vec();
    injected.sort_unstable();
    for &j in &injected {
        let mut row = data.slice_mut(ndarray::s![1, j, ..]);
        row.fill(0.0);
        gaussian_direction(&mut rng, row.slice_move(ndarray::s![split..]));
    }
    Ok((TokenTensor::new(data)?, injected))
}

#[cfg(test)]
mod tests {

    #[test]
    fn injected_rows_are_orthogonal_to_the_first_frame() {
        let (x, injected) = gen_orthogonal_injection(16, 12, 3, 0.02, 9).unwrap();
        assert_eq!(injected.len(), 3);
        for &j in &injected {
            for i in 0..16 {
                assert_eq!(x.frame(0).row(i).dot(&x.frame(1).row(j)), 0.0);
            }
        }
        assert!(gen_orthogonal_injection(4, 4, 4, 0.0, 0).is_err());
    }
    use super::*;

    fn cosine_distance(a: ndarray::ArrayView1<'_, f64>, b: ndarray::ArrayView1<'_, f64>) -> f64 {
        1.0 - a.dot(&b)
    }

    #[test]
    fn zero_drift_freezes_frames() {
        let cfg = SynthConfig { drift_sigma: 0.0, frames: 4, tokens: 5, dim: 6, artifact_count: 0, ..Default::default() };
        let x = gen_pristine(&cfg).unwrap();
        for t in 1..4 {
            assert_eq!(x.frame(t), x.frame(0));
        }
    }

    #[test]
    fn small_drift_stays_close() {
        let cfg = SynthConfig { drift_sigma: 0.05, frames: 8, tokens: 64, dim: 64, seed: 3, ..Default::default() };
        let x = gen_pristine(&cfg).unwrap();
        let mut total = 0.0;
        let mut count = 0;
        for t in 1..8 {
            for j in 0..64 {
                let d = cosine_distance(x.frame(t - 1).row(j), x.frame(t).row(j));
                assert!(d < 0.05, "{d}");
                total += d;
                count += 1;
            }
        }
        // 1 − 1/√(1 + σ²) ≈ 0.00125
        let mean = total / count as f64;
        assert!(mean < 0.01, "mean consecutive cosine distance {mean}");
    }

    #[test]
    fn same_seed_same_tensor() {
        let cfg = SynthConfig { seed: 42, ..Default::default() };
        assert_eq!(gen_pristine(&cfg).unwrap(), gen_pristine(&cfg).unwrap());
        assert_eq!(gen_forged(&cfg).unwrap(), gen_forged(&cfg).unwrap());
        let other = SynthConfig { seed: 43, ..Default::default() };
        assert_ne!(gen_pristine(&cfg).unwrap(), gen_pristine(&other).unwrap());
    }

    #[test]
    fn forged_replaces_masked_rows_only() {
        let cfg = SynthConfig {
            artifact_frames: ArtifactFrames::Fixed(vec![2, 5]),
            seed: 9,
            ..Default::default()
        };
        let pristine = gen_pristine(&cfg).unwrap();
        let (forged, mask) = gen_forged(&cfg).unwrap();
        assert_eq!(mask.len(), cfg.artifact_count * 2);
        for t in 0..cfg.frames {
            for j in 0..cfg.tokens {
                let same = forged.frame(t).row(j) == pristine.frame(t).row(j);
                assert_eq!(same, !mask.contains(&(t, j)), "({t},{j})");
            }
        }
    }

    #[test]
    fn artifacts_are_nearly_orthogonal_to_their_predecessor() {
        let mut sum = 0.0;
        let draws = 1000;
        for seed in 0..draws {
            let cfg = SynthConfig {
                frames: 3,
                tokens: 8,
                artifact_count: 1,
                artifact_frames: ArtifactFrames::Fixed(vec![2]),
                seed,
                ..Default::default()
            };
            let (x, mask) = gen_forged(&cfg).unwrap();
            let (t, j) = mask[0];
            sum += x.frame(t - 1).row(j).dot(&x.frame(t).row(j)).abs();
        }
        let mean = sum / draws as f64;
        assert!(mean < 0.15, "mean |dot| {mean}");
    }

    #[test]
    fn no_artifacts_means_pristine() {
        let cfg = SynthConfig { artifact_count: 0, seed: 5, ..Default::default() };
        let (x, mask) = gen_forged(&cfg).unwrap();
        assert!(mask.is_empty());
        assert_eq!(x, gen_pristine(&cfg).unwrap());
    }

    #[test]
    fn too_many_artifacts() {
        let cfg = SynthConfig { tokens: 4, artifact_count: 5, ..Default::default() };
        assert!(matches!(gen_forged(&cfg), Err(Error::Domain(_))));
    }

    #[test]
    fn random_frame_avoids_first_frame() {
        for seed in 0..50 {
            let cfg = SynthConfig { seed, frames: 3, tokens: 4, dim: 4, artifact_count: 2, ..Default::default() };
            let (_, mask) = gen_forged(&cfg).unwrap();
            assert!(mask.iter().all(|&(t, _)| t >= 1));
        }
    }
}
