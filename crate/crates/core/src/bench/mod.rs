//! Synthetic benchmark: recall of artifact tokens under pruning and separation
//! of forged from pristine sequences by transport cost.

pub mod synth;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::projection::{project_normalize, NormalizedTokens, Projector};
use crate::scoring::{score, select_topk, SelectionResult};

pub use synth::{
    gen_forged, gen_forged_with, gen_orthogonal_injection, gen_pristine, gen_pristine_with, ArtifactFrames,
    ArtifactMask, SynthConfig,
};

pub const DEFAULT_RATIOS: [f64; 5] = [0.05, 0.1, 0.25, 0.5, 1.0];
pub const DEFAULT_TRIALS: usize = 100;

/// Saliency stand-in: cosine similarity of each token to its frame's mean
/// embedding. Zero everywhere when the mean vanishes.
pub fn baseline_saliency_score(tokens: &NormalizedTokens, frame: usize) -> Vec<f64> {
    let z = tokens.frame(frame);
    let Some(mean) = z.mean_axis(ndarray::Axis(0)) else {
        return Vec::new();
    };
    let norm = mean.dot(&mean).sqrt();
    if norm == 0.0 {
        return vec![0.0; z.nrows()];
    }
    z.rows().into_iter().map(|row| row.dot(&mean) / norm).collect()
}

/// Fraction of masked `(frame, token)` pairs present in the kept sets.
pub fn recall(kept: &[Vec<usize>], mask: &[(usize, usize)]) -> Result<f64> {
    if mask.is_empty() {
        return Err(Error::Domain("recall is undefined for an empty artifact mask".into()));
    }
    let hits = mask
        .iter()
        .filter(|(t, j)| kept.get(*t).is_some_and(|k| k.binary_search(j).is_ok()))
        .count();
    Ok(hits as f64 / mask.len() as f64)
}

pub fn eval_recall(selection: &SelectionResult, mask: &[(usize, usize)]) -> Result<f64> {
    let kept: Vec<Vec<usize>> = selection.frames.iter().map(|f| f.kept.clone()).collect();
    recall(&kept, mask)
}

/// Area under the ROC curve for "positive scores exceed negative scores",
/// counting ties as one half.
pub fn auc(positives: &[f64], negatives: &[f64]) -> f64 {
    if positives.is_empty() || negatives.is_empty() {
        return 0.5;
    }
    let mut wins = 0.0;
    for &p in positives {
        for &n in negatives {
            if p > n {
                wins += 1.0;
            } else if p == n {
                wins += 0.5;
            }
        }
    }
    wins / (positives.len() * negatives.len()) as f64
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// Sample standard deviation; zero for a single value.
    fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self { mean, std }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecallRow {
    pub ratio: f64,
    pub forensic: MeanStd,
    pub saliency_proxy: MeanStd,
}

/// Summary of per-token transport costs `e` pooled over a population.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CostSummary {
    pub mean: f64,
    pub max: f64,
    pub p95: f64,
    /// Mean over sequences of each sequence's largest `e`.
    pub mean_sequence_max: f64,
}

impl CostSummary {
    fn of(all: &mut [f64], sequence_max: &[f64]) -> Self {
        all.sort_by(f64::total_cmp);
        let n = all.len();
        // nearest-rank percentile
        let rank = ((0.95 * n as f64).ceil() as usize).clamp(1, n);
        Self {
            mean: all.iter().sum::<f64>() / n as f64,
            max: all[n - 1],
            p95: all[rank - 1],
            mean_sequence_max: sequence_max.iter().sum::<f64>() / sequence_max.len() as f64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CostDistribution {
    pub forged: CostSummary,
    pub pristine: CostSummary,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchReport {
    pub synth: SynthConfig,
    pub run: RunConfig,
    pub trials: usize,
    pub seed: u64,
    pub recall: Vec<RecallRow>,
    pub cost_distribution: CostDistribution,
    /// AUC of per-sequence max `e`, forged against pristine.
    pub separation_auc: f64,
}

impl BenchReport {
    pub fn recall_at(&self, ratio: f64) -> Option<&RecallRow> {
        self.recall.iter().find(|r| r.ratio == ratio)
    }
}

struct TrialOutcome {
    forensic_recall: Vec<f64>,
    saliency_recall: Vec<f64>,
    forged_e: Vec<f64>,
    pristine_e: Vec<f64>,
    forged_max: f64,
    pristine_max: f64,
}

/// Transport costs `e` of every frame that has a predecessor.
fn transport_costs(bundle: &crate::scoring::ScoreBundle) -> Vec<f64> {
    bundle
        .frames
        .iter()
        .filter(|f| !f.spatial_fallback)
        .flat_map(|f| f.e.iter().copied())
        .collect()
}

fn run_trial(cfg: &SynthConfig, run: &RunConfig, ratios: &[f64], trial: usize) -> Result<TrialOutcome> {
    let mut rng = cfg.trial_rng(trial as u64);
    let (forged, mask) = gen_forged_with(cfg, &mut rng)?;
    let pristine = gen_pristine_with(cfg, &mut rng)?;

    let forged_scores = score(&forged, None, run, &Projector::Identity)?;
    let pristine_scores = score(&pristine, None, run, &Projector::Identity)?;
    let z = project_normalize(&forged, &Projector::Identity, run.epsilon_norm)?;
    let saliency: Vec<Vec<f64>> = (0..z.frames()).map(|t| baseline_saliency_score(&z, t)).collect();

    let mut forensic_recall = Vec::with_capacity(ratios.len());
    let mut saliency_recall = Vec::with_capacity(ratios.len());
    for &ratio in ratios {
        let kept = forged_scores
            .frames
            .iter()
            .map(|f| select_topk(&f.s, ratio))
            .collect::<Result<Vec<_>>>()?;
        forensic_recall.push(recall(&kept, &mask)?);
        let kept = saliency
            .iter()
            .map(|s| select_topk(s, ratio))
            .collect::<Result<Vec<_>>>()?;
        saliency_recall.push(recall(&kept, &mask)?);
    }

    let forged_e = transport_costs(&forged_scores);
    let pristine_e = transport_costs(&pristine_scores);
    let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(TrialOutcome {
        forensic_recall,
        saliency_recall,
        forged_max: max(&forged_e),
        pristine_max: max(&pristine_e),
        forged_e,
        pristine_e,
    })
}

/// Runs `trials` forged/pristine pairs. Trial `k` draws from stream `k` of
/// `cfg.seed`; trials run in parallel and are merged in index order.
pub fn run_bench(cfg: &SynthConfig, run: &RunConfig, trials: usize, ratios: &[f64]) -> Result<BenchReport> {
    cfg.validate()?;
    run.validate()?;
    if trials == 0 {
        return Err(Error::Validation("trials must be at least 1".into()));
    }
    if cfg.frames < 2 {
        return Err(Error::Validation("the benchmark needs at least 2 frames".into()));
    }
    if cfg.artifact_count == 0 {
        return Err(Error::Domain("the benchmark needs at least one artifact per forged sequence".into()));
    }
    if ratios.is_empty() {
        return Err(Error::Validation("at least one ratio is required".into()));
    }
    for &r in ratios {
        crate::config::validate_ratio(r)?;
    }

    let outcomes = (0..trials)
        .into_par_iter()
        .map(|k| run_trial(cfg, run, ratios, k))
        .collect::<Result<Vec<_>>>()?;

    let recall_rows = ratios
        .iter()
        .enumerate()
        .map(|(i, &ratio)| {
            let f: Vec<f64> = outcomes.iter().map(|o| o.forensic_recall[i]).collect();
            let s: Vec<f64> = outcomes.iter().map(|o| o.saliency_recall[i]).collect();
            RecallRow {
                ratio,
                forensic: MeanStd::of(&f),
                saliency_proxy: MeanStd::of(&s),
            }
        })
        .collect();

    let forged_max: Vec<f64> = outcomes.iter().map(|o| o.forged_max).collect();
    let pristine_max: Vec<f64> = outcomes.iter().map(|o| o.pristine_max).collect();
    let mut forged_all: Vec<f64> = outcomes.iter().flat_map(|o| o.forged_e.iter().copied()).collect();
    let mut pristine_all: Vec<f64> = outcomes.iter().flat_map(|o| o.pristine_e.iter().copied()).collect();

    Ok(BenchReport {
        synth: cfg.clone(),
        run: run.clone(),
        trials,
        seed: cfg.seed,
        recall: recall_rows,
        cost_distribution: CostDistribution {
            forged: CostSummary::of(&mut forged_all, &forged_max),
            pristine: CostSummary::of(&mut pristine_all, &pristine_max),
        },
        separation_auc: auc(&forged_max, &pristine_max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array3;

    fn unit_rows(rows: &[[f64; 2]]) -> NormalizedTokens {
        let data = Array3::from_shape_fn((1, rows.len(), 2), |(_, j, k)| rows[j][k]);
        NormalizedTokens::from_unit_rows(data)
    }

    #[test]
    fn saliency_proxy_cases() {
        let same = unit_rows(&[[0.6, 0.8], [0.6, 0.8], [0.6, 0.8]]);
        for s in baseline_saliency_score(&same, 0) {
            assert!((s - 1.0).abs() < 1e-12);
        }
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let injected = unit_rows(&[[1.0, 0.0], [1.0, 0.0], [h, h], [1.0, 0.0], [0.0, 1.0]]);
        let s = baseline_saliency_score(&injected, 0);
        let lowest = (0..s.len()).min_by(|&a, &b| s[a].total_cmp(&s[b])).unwrap();
        assert_eq!(lowest, 4);
        let anti = unit_rows(&[[1.0, 0.0], [-1.0, 0.0]]);
        assert_eq!(baseline_saliency_score(&anti, 0), vec![0.0, 0.0]);
    }

    #[test]
    fn recall_cases() {
        let mask = vec![(1, 0), (1, 3), (2, 1), (2, 2), (3, 0), (3, 4)];
        let all = vec![vec![], vec![0, 3], vec![1, 2], vec![0, 4]];
        assert_eq!(recall(&all, &mask).unwrap(), 1.0);
        let none = vec![vec![1], vec![1], vec![0], vec![1]];
        assert_eq!(recall(&none, &mask).unwrap(), 0.0);
        let half = vec![vec![], vec![0, 3], vec![1], vec![]];
        assert_eq!(recall(&half, &mask).unwrap(), 0.5);
        assert!(matches!(recall(&half, &[]), Err(Error::Domain(_))));
    }

    #[test]
    fn auc_cases() {
        assert_eq!(auc(&[2.0, 3.0], &[0.0, 1.0]), 1.0);
        assert_eq!(auc(&[0.0], &[1.0]), 0.0);
        assert_eq!(auc(&[1.0], &[1.0]), 0.5);
    }

    #[test]
    fn summary_percentile() {
        let mut v: Vec<f64> = (1..=100).map(f64::from).collect();
        let s = CostSummary::of(&mut v, &[1.0, 3.0]);
        assert_eq!(s.p95, 95.0);
        assert_eq!(s.max, 100.0);
        assert_eq!(s.mean, 50.5);
        assert_eq!(s.mean_sequence_max, 2.0);
    }

    #[test]
    fn recall_is_monotone_in_ratio() {
        let cfg = SynthConfig { frames: 3, tokens: 16, dim: 16, artifact_count: 3, seed: 1, ..Default::default() };
        let report = run_bench(&cfg, &RunConfig::default(), 2, &DEFAULT_RATIOS).unwrap();
        for w in report.recall.windows(2) {
            assert!(w[1].forensic.mean >= w[0].forensic.mean);
            assert!(w[1].saliency_proxy.mean >= w[0].saliency_proxy.mean);
        }
        let last = report.recall.last().unwrap();
        assert_eq!(last.forensic.mean, 1.0);
        assert_eq!(last.saliency_proxy.mean, 1.0);
    }

    #[test]
    fn rejects_degenerate_benches() {
        let run = RunConfig::default();
        assert!(run_bench(&SynthConfig::default(), &run, 0, &DEFAULT_RATIOS).is_err());
        let no_art = SynthConfig { artifact_count: 0, ..Default::default() };
        assert!(matches!(run_bench(&no_art, &run, 1, &DEFAULT_RATIOS), Err(Error::Domain(_))));
        assert!(run_bench(&SynthConfig::default(), &run, 1, &[1.5]).is_err());
    }
}
