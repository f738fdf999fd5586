//! Empirical validation operators: Monte-Carlo histogram deltas, sign
//! preservation counts, feature directionality scans and the
//! directional-feature ablation experiment.

use serde::{Deserialize, Serialize};

use crate::classifier::{self, TrainConfig};
use crate::embed::{embed_once, StegoSpec};
use crate::error::{Error, Result};
use crate::features::{extract, residual, residual_histogram, FeatureSetDescriptor, FeatureVector, Predictor};
use crate::imaging::GrayImage;
use crate::rng::SeededRng;
use crate::theory::AdaptiveChangeModel;

/// Per-bin averages of the first and second histogram variations over
/// repeated independent embeddings, with standard errors of the means.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonteCarloDeltas {
    pub min_bin: i32,
    pub repetitions: u32,
    pub mean_delta1: Vec<f64>,
    pub mean_delta2: Vec<f64>,
    pub stderr_delta1: Vec<f64>,
    pub stderr_delta2: Vec<f64>,
}

impl MonteCarloDeltas {
    pub fn bin_index(&self, k: i32) -> Option<usize> {
        let idx = k - self.min_bin;
        if idx < 0 || idx as usize >= self.mean_delta1.len() {
            None
        } else {
            Some(idx as usize)
        }
    }
}

/// Average the residual-histogram variations `h' - h` and `h'' - h'` over
/// `repetitions` independent single and double embeddings (horizontal
/// predictor, untruncated bins).
pub fn monte_carlo_deltas(
    image: &GrayImage,
    spec: &StegoSpec,
    repetitions: u32,
    rng: SeededRng,
) -> Result<MonteCarloDeltas> {
    if repetitions < 1 {
        return Err(Error::InvalidArgument("repetitions must be >= 1".into()));
    }
    use rayon::prelude::*;
    let base = residual_histogram(&residual(image, Predictor::Horizontal)?, None);
    let bins = base.counts().len();
    // Integer accumulators keep the parallel reduction exact, so the result
    // does not depend on thread scheduling.
    #[derive(Clone)]
    struct Acc {
        sum1: Vec<i64>,
        sumsq1: Vec<i64>,
        sum2: Vec<i64>,
        sumsq2: Vec<i64>,
    }
    let zero = Acc {
        sum1: vec![0; bins],
        sumsq1: vec![0; bins],
        sum2: vec![0; bins],
        sumsq2: vec![0; bins],
    };
    let merge = |mut a: Acc, b: Acc| {
        for i in 0..bins {
            a.sum1[i] += b.sum1[i];
            a.sumsq1[i] += b.sumsq1[i];
            a.sum2[i] += b.sum2[i];
            a.sumsq2[i] += b.sumsq2[i];
        }
        a
    };
    let acc = (0..repetitions)
        .into_par_iter()
        .map(|rep| -> Result<Acc> {
            let first = embed_once(image, spec, rng.derive("mc.first", rep as u64))?;
            let second = embed_once(&first, spec, rng.derive("mc.second", rep as u64))?;
            let h1 = residual_histogram(&residual(&first, Predictor::Horizontal)?, None);
            let h2 = residual_histogram(&residual(&second, Predictor::Horizontal)?, None);
            let mut a = Acc {
                sum1: vec![0; bins],
                sumsq1: vec![0; bins],
                sum2: vec![0; bins],
                sumsq2: vec![0; bins],
            };
            for i in 0..bins {
                let k = base.min_bin() + i as i32;
                let d1 = h1.bin(k) as i64 - base.bin(k) as i64;
                let d2 = h2.bin(k) as i64 - h1.bin(k) as i64;
                a.sum1[i] = d1;
                a.sumsq1[i] = d1 * d1;
                a.sum2[i] = d2;
                a.sumsq2[i] = d2 * d2;
            }
            Ok(a)
        })
        .try_reduce(|| zero.clone(), |a, b| Ok(merge(a, b)))?;
    let n = repetitions as f64;
    let finish = |sum: &[i64], sumsq: &[i64]| -> (Vec<f64>, Vec<f64>) {
        let mean: Vec<f64> = sum.iter().map(|&s| s as f64 / n).collect();
        let stderr: Vec<f64> = sumsq
            .iter()
            .zip(mean.iter())
            .map(|(&sq, &m)| {
                if repetitions < 2 {
                    f64::INFINITY
                } else {
                    let var = (sq as f64 / n - m * m).max(0.0) * n / (n - 1.0);
                    (var / n).sqrt()
                }
            })
            .collect();
        (mean, stderr)
    };
    let (mean_delta1, stderr_delta1) = finish(&acc.sum1, &acc.sumsq1);
    let (mean_delta2, stderr_delta2) = finish(&acc.sum2, &acc.sumsq2);
    Ok(MonteCarloDeltas {
        min_bin: base.min_bin(),
        repetitions,
        mean_delta1,
        mean_delta2,
        stderr_delta1,
        stderr_delta2,
    })
}

/// Count the central bins `k in [-half_window, half_window]` whose first and
/// second single-realization variations share a strict sign.
pub fn preservation_count(
    image: &GrayImage,
    spec: &StegoSpec,
    rng: SeededRng,
    half_window: i32,
) -> Result<u32> {
    let first = embed_once(image, spec, rng.derive("pres.first", 0))?;
    let second = embed_once(&first, spec, rng.derive("pres.second", 0))?;
    let h0 = residual_histogram(&residual(image, Predictor::Horizontal)?, None);
    let h1 = residual_histogram(&residual(&first, Predictor::Horizontal)?, None);
    let h2 = residual_histogram(&residual(&second, Predictor::Horizontal)?, None);
    let mut preserved = 0u32;
    for k in -half_window..=half_window {
        let d1 = h1.bin(k) as i64 - h0.bin(k) as i64;
        let d2 = h2.bin(k) as i64 - h1.bin(k) as i64;
        if d1 * d2 > 0 {
            preserved += 1;
        }
    }
    Ok(preserved)
}

/// Estimate the dependent-change model of a simulator empirically: the
/// marginal change probability and the conditional probability that a pixel
/// changes given its left neighbor changed.
pub fn estimate_beta_prime(
    image: &GrayImage,
    spec: &StegoSpec,
    repetitions: u32,
    rng: SeededRng,
) -> Result<AdaptiveChangeModel> {
    if repetitions < 1 {
        return Err(Error::InvalidArgument("repetitions must be >= 1".into()));
    }
    let (w, h) = (image.width(), image.height());
    let mut changed = 0u64;
    let mut pair_both = 0u64;
    let mut pairs = 0u64;
    let mut total = 0u64;
    for rep in 0..repetitions {
        let stego = embed_once(image, spec, rng.derive("betaprime", rep as u64))?;
        let mut flags = vec![false; w * h];
        for (i, (&a, &b)) in image.pixels().iter().zip(stego.pixels()).enumerate() {
            flags[i] = a != b;
        }
        changed += flags.iter().filter(|&&f| f).count() as u64;
        total += (w * h) as u64;
        for y in 0..h {
            for x in 1..w {
                pairs += 1;
                if flags[y * w + x] && flags[y * w + x - 1] {
                    pair_both += 1;
                }
            }
        }
    }
    let beta = changed as f64 / total as f64;
    let beta_prime = if changed == 0 {
        beta
    } else {
        (pair_both as f64 / pairs as f64) / beta
    };
    AdaptiveChangeModel::new(beta.min(0.5), beta_prime.min(1.0))
}

/// Hard-directionality scan over a feature set: for every image and feature,
/// extract `f(X)`, `f(S(X))` and `f(S(S(X)))` and flag the feature when the
/// two consecutive variations share a strict sign.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DirectionalityReport {
    pub n_images: usize,
    pub n_features: usize,
    /// Per feature, the number of images where it is directional.
    pub per_feature_counts: Vec<u32>,
    /// Per image, the number of directional features.
    pub per_image_counts: Vec<u32>,
    /// Per-image per-feature flags (not serialized; large).
    #[serde(skip)]
    pub flags: Vec<Vec<bool>>,
}

impl DirectionalityReport {
    /// Number of features directional for strictly more than
    /// `fraction * n_images` images.
    pub fn features_directional_above(&self, fraction: f64) -> usize {
        let cut = fraction * self.n_images as f64;
        self.per_feature_counts
            .iter()
            .filter(|&&c| c as f64 > cut)
            .count()
    }

    /// Mean over features of the per-feature directional image fraction.
    pub fn mean_per_feature_directionality(&self) -> f64 {
        if self.n_images == 0 || self.n_features == 0 {
            return 0.0;
        }
        let total: u64 = self.per_feature_counts.iter().map(|&c| c as u64).sum();
        total as f64 / (self.n_images as f64 * self.n_features as f64)
    }
}

pub fn directionality_scan(
    images: &[GrayImage],
    spec: &StegoSpec,
    descriptor: &FeatureSetDescriptor,
    rng: SeededRng,
) -> Result<DirectionalityReport> {
    if images.is_empty() {
        return Err(Error::InvalidArgument(
            "directionality scan needs at least one image".into(),
        ));
    }
    use rayon::prelude::*;
    let n_features = descriptor.dimension();
    let flags: Vec<Vec<bool>> = images
        .par_iter()
        .enumerate()
        .map(|(i, image)| -> Result<Vec<bool>> {
            let first = embed_once(image, spec, rng.derive("dir.first", i as u64))?;
            let second = embed_once(&first, spec, rng.derive("dir.second", i as u64))?;
            let f0 = extract(image, descriptor)?;
            let f1 = extract(&first, descriptor)?;
            let f2 = extract(&second, descriptor)?;
            Ok((0..n_features)
                .map(|j| {
                    let d1 = f1.values[j] - f0.values[j];
                    let d2 = f2.values[j] - f1.values[j];
                    d1 * d2 > 0.0
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut per_feature_counts = vec![0u32; n_features];
    let mut per_image_counts = Vec::with_capacity(images.len());
    for image_flags in &flags {
        let mut count = 0u32;
        for (j, &f) in image_flags.iter().enumerate() {
            if f {
                per_feature_counts[j] += 1;
                count += 1;
            }
        }
        per_image_counts.push(count);
    }
    Ok(DirectionalityReport {
        n_images: images.len(),
        n_features,
        per_feature_counts,
        per_image_counts,
        flags,
    })
}

/// Feature-zeroing modes for the directionality ablation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AblationMode {
    /// Keep only non-directional features (zero the directional ones); the
    /// "NDFO" arm.
    NonDirectionalOnly,
    /// Keep only directional features; the "DFO" arm.
    DirectionalOnly,
    /// Zero a uniformly random subset with the same per-image cardinality as
    /// `NonDirectionalOnly`; the "RRF" control.
    RandomMatched,
    /// Zero a random half of the directional features; the "50% DFR" control.
    HalfDirectionalRemoved,
}

impl std::fmt::Display for AblationMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            AblationMode::NonDirectionalOnly => "ndfo",
            AblationMode::DirectionalOnly => "dfo",
            AblationMode::RandomMatched => "rrf",
            AblationMode::HalfDirectionalRemoved => "half-dfr",
        };
        write!(f, "{name}")
    }
}

/// Zero feature entries per image according to `mode` and the per-image
/// directionality flags. Random modes draw from per-image streams of `rng`.
pub fn apply_ablation(
    rows: &[FeatureVector],
    flags: &[Vec<bool>],
    mode: AblationMode,
    rng: SeededRng,
) -> Result<Vec<FeatureVector>> {
    use rand::Rng;
    if rows.len() != flags.len() {
        return Err(Error::InvalidArgument(format!(
            "{} feature rows but {} flag rows",
            rows.len(),
            flags.len()
        )));
    }
    let mut out = Vec::with_capacity(rows.len());
    for (i, (row, row_flags)) in rows.iter().zip(flags.iter()).enumerate() {
        if row.values.len() != row_flags.len() {
            return Err(Error::InvalidArgument(format!(
                "row {i}: {} features but {} flags",
                row.values.len(),
                row_flags.len()
            )));
        }
        let mut values = row.values.clone();
        match mode {
            AblationMode::NonDirectionalOnly => {
                for (v, &f) in values.iter_mut().zip(row_flags.iter()) {
                    if f {
                        *v = 0.0;
                    }
                }
            }
            AblationMode::DirectionalOnly => {
                for (v, &f) in values.iter_mut().zip(row_flags.iter()) {
                    if !f {
                        *v = 0.0;
                    }
                }
            }
            AblationMode::RandomMatched => {
                let d = row_flags.iter().filter(|&&f| f).count();
                let mut r = rng.derive("ablate.random", i as u64).rng();
                let mut pool: Vec<usize> = (0..values.len()).collect();
                for j in 0..d {
                    let k = r.gen_range(j..pool.len());
                    pool.swap(j, k);
                    values[pool[j]] = 0.0;
                }
            }
            AblationMode::HalfDirectionalRemoved => {
                let mut directional: Vec<usize> = row_flags
                    .iter()
                    .enumerate()
                    .filter(|(_, &f)| f)
                    .map(|(j, _)| j)
                    .collect();
                let half = directional.len() / 2;
                let mut r = rng.derive("ablate.half", i as u64).rng();
                for j in 0..half {
                    let k = r.gen_range(j..directional.len());
                    directional.swap(j, k);
                    values[directional[j]] = 0.0;
                }
            }
        }
        out.push(FeatureVector {
            values,
            descriptor_hash: row.descriptor_hash,
        });
    }
    Ok(out)
}

/// Outcome of one ablation arm: the standard classifier trained and
/// evaluated on ablated features.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AblationOutcome {
    pub mode: AblationMode,
    pub error: f64,
    pub n_test: usize,
}

/// Train on ablated training features and evaluate on ablated test features.
#[allow(clippy::too_many_arguments)]
pub fn ablation_classify(
    train_rows: &[FeatureVector],
    train_labels: &[u8],
    test_rows: &[FeatureVector],
    test_labels: &[u8],
    mode: AblationMode,
    train_flags: &[Vec<bool>],
    test_flags: &[Vec<bool>],
    config: &TrainConfig,
    rng: SeededRng,
) -> Result<AblationOutcome> {
    let ablated_train = apply_ablation(train_rows, train_flags, mode, rng.derive("train", 0))?;
    let ablated_test = apply_ablation(test_rows, test_flags, mode, rng.derive("test", 0))?;
    let model = classifier::train(&ablated_train, train_labels, config)?;
    let error = classifier::classification_error(&model, &ablated_test, test_labels)?;
    Ok(AblationOutcome {
        mode,
        error,
        n_test: test_rows.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::synth_cover;

    #[test]
    fn zero_alpha_monte_carlo_gives_zero_deltas() {
        let img = synth_cover(32, 32, 0.5, SeededRng::new(1)).unwrap();
        let spec = StegoSpec::lsbm(0.0).unwrap();
        let mc = monte_carlo_deltas(&img, &spec, 1, SeededRng::new(2)).unwrap();
        assert!(mc.mean_delta1.iter().all(|&d| d == 0.0));
        assert!(mc.mean_delta2.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn monte_carlo_center_bin_drops() {
        // The center bin of a peaked histogram must lose mass on average.
        let img = synth_cover(128, 128, 0.4, SeededRng::new(3)).unwrap();
        let spec = StegoSpec::lsbm(0.25).unwrap();
        let mc = monte_carlo_deltas(&img, &spec, 50, SeededRng::new(4)).unwrap();
        let idx = mc.bin_index(0).unwrap();
        assert!(mc.mean_delta1[idx] < 0.0);
        assert!(mc.mean_delta2[idx] < 0.0);
        assert!(mc.stderr_delta1[idx] > 0.0);
    }

    #[test]
    fn beta_prime_estimation_brackets_models() {
        let img = synth_cover(128, 128, 0.5, SeededRng::new(5)).unwrap();
        // LSB matching selects pixels independently.
        let lsbm = StegoSpec::lsbm(0.4).unwrap();
        let model = estimate_beta_prime(&img, &lsbm, 20, SeededRng::new(6)).unwrap();
        assert!((model.beta - 0.2).abs() < 0.01, "beta {}", model.beta);
        assert!(
            (model.beta_prime - model.beta).abs() < 0.05,
            "independent embedding should have beta' close to beta, got {}",
            model.beta_prime
        );
        // Adaptive embedding concentrates changes in textured regions.
        let hill = StegoSpec::hill(0.4).unwrap();
        let model = estimate_beta_prime(&img, &hill, 20, SeededRng::new(7)).unwrap();
        assert!(
            model.beta_prime > 1.5 * model.beta,
            "adaptive embedding should cluster changes: beta {} beta' {}",
            model.beta,
            model.beta_prime
        );
    }

    #[test]
    fn constant_feature_is_never_directional() {
        let images: Vec<GrayImage> = (0..4)
            .map(|s| synth_cover(32, 32, 0.5, SeededRng::new(s)).unwrap())
            .collect();
        let spec = StegoSpec::lsbm(0.25).unwrap();
        // MinMax at T=4 on tiny flat-ish covers: the extreme bins are often
        // empty, i.e. constant zero across embeddings. Those features must
        // count as non-directional (strict inequality).
        let desc = FeatureSetDescriptor::uniform(&[crate::features::SubmodelKind::MinMax], 4, false)
            .unwrap();
        let report = directionality_scan(&images, &spec, &desc, SeededRng::new(9)).unwrap();
        assert_eq!(report.n_images, 4);
        assert_eq!(report.n_features, 18);
        for (img_flags, &count) in report.flags.iter().zip(report.per_image_counts.iter()) {
            assert_eq!(img_flags.iter().filter(|&&f| f).count() as u32, count);
        }
    }

    #[test]
    fn ablation_cardinalities() {
        let rows: Vec<FeatureVector> = (0..3)
            .map(|i| FeatureVector {
                values: (0..10).map(|j| (i * 10 + j) as f64 + 1.0).collect(),
                descriptor_hash: 7,
            })
            .collect();
        let flags: Vec<Vec<bool>> = vec![
            (0..10).map(|j| j % 2 == 0).collect(),
            (0..10).map(|j| j < 3).collect(),
            vec![false; 10],
        ];
        let rng = SeededRng::new(11);
        let ndfo = apply_ablation(&rows, &flags, AblationMode::NonDirectionalOnly, rng).unwrap();
        let rrf = apply_ablation(&rows, &flags, AblationMode::RandomMatched, rng).unwrap();
        let dfo = apply_ablation(&rows, &flags, AblationMode::DirectionalOnly, rng).unwrap();
        let half = apply_ablation(&rows, &flags, AblationMode::HalfDirectionalRemoved, rng).unwrap();
        for i in 0..3 {
            let d = flags[i].iter().filter(|&&f| f).count();
            let zeros = |v: &FeatureVector| v.values.iter().filter(|&&x| x == 0.0).count();
            assert_eq!(zeros(&ndfo[i]), d);
            assert_eq!(zeros(&rrf[i]), d, "RRF must zero exactly as many as NDFO");
            assert_eq!(zeros(&dfo[i]), 10 - d);
            assert_eq!(zeros(&half[i]), d / 2);
        }
    }

    #[test]
    fn flag_dimension_mismatch_rejected() {
        let rows = vec![FeatureVector {
            values: vec![1.0; 5],
            descriptor_hash: 0,
        }];
        let flags = vec![vec![true; 4]];
        assert!(matches!(
            apply_ablation(&rows, &flags, AblationMode::DirectionalOnly, SeededRng::new(1)),
            Err(Error::InvalidArgument(_))
        ));
    }
}
