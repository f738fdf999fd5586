//! Binary ensemble classifier: random-subspace Fisher linear discriminants
//! with majority vote.
//!
//! Each learner sees a random subset of feature dimensions, fits a Fisher
//! discriminant on standardized features with a small ridge on the
//! within-class scatter (truncated histograms produce collinear columns),
//! and votes. Training is deterministic given the seed; subspaces are keyed
//! by learner index, not by row order.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::rng::SeededRng;

const MODEL_VERSION: u32 = 1;
const RIDGE_FACTOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThresholdMode {
    /// Vote threshold fixed at a strict majority of learners.
    MajorityVote,
    /// Vote threshold tuned on a held-out stratified 20% split.
    ValidationTuned,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub n_learners: usize,
    /// Dimensions per learner; defaults to `ceil(D/4)` capped at 200.
    pub subspace_dim: Option<usize>,
    pub seed: u64,
    pub threshold_mode: ThresholdMode,
}

impl TrainConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            n_learners: 51,
            subspace_dim: None,
            seed,
            threshold_mode: ThresholdMode::MajorityVote,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Standardizer {
    means: Vec<f64>,
    scales: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Learner {
    indices: Vec<u32>,
    weights: Vec<f64>,
    bias: f64,
}

impl Learner {
    fn score(&self, standardized: &[f64]) -> f64 {
        let mut acc = -self.bias;
        for (&idx, &w) in self.indices.iter().zip(self.weights.iter()) {
            acc += w * standardized[idx as usize];
        }
        acc
    }
}

/// A trained vote ensemble, serializable as versioned JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleModel {
    version: u32,
    config: TrainConfig,
    standardizer: Standardizer,
    learners: Vec<Learner>,
    threshold: u32,
    descriptor_hash: u64,
}

impl EnsembleModel {
    pub fn dimension(&self) -> usize {
        self.standardizer.means.len()
    }

    pub fn n_learners(&self) -> usize {
        self.learners.len()
    }

    pub fn vote_threshold(&self) -> u32 {
        self.threshold
    }

    pub fn descriptor_hash(&self) -> u64 {
        self.descriptor_hash
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text =
            serde_json::to_string(self).map_err(|e| Error::Parse(format!("model encode: {e}")))?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let model: EnsembleModel =
            serde_json::from_str(&text).map_err(|e| Error::Parse(format!("model decode: {e}")))?;
        if model.version != MODEL_VERSION {
            return Err(Error::UnsupportedVersion {
                expected: MODEL_VERSION,
                got: model.version,
            });
        }
        Ok(model)
    }
}

/// Train an ensemble on an `N x D` feature matrix with 0/1 labels.
pub fn train(features: &[FeatureVector], labels: &[u8], config: &TrainConfig) -> Result<EnsembleModel> {
    if features.len() != labels.len() {
        return Err(Error::InvalidArgument(format!(
            "{} feature rows but {} labels",
            features.len(),
            labels.len()
        )));
    }
    if features.len() < 20 {
        return Err(Error::InvalidArgument(format!(
            "need at least 20 training rows, got {}",
            features.len()
        )));
    }
    if labels.iter().any(|&l| l > 1) {
        return Err(Error::InvalidArgument("labels must be 0 or 1".into()));
    }
    let n0 = labels.iter().filter(|&&l| l == 0).count();
    let n1 = labels.len() - n0;
    if n0 < 2 || n1 < 2 {
        return Err(Error::InvalidArgument(format!(
            "both classes must be present ({n0} zeros, {n1} ones)"
        )));
    }
    let dim = features[0].values.len();
    let hash = features[0].descriptor_hash;
    for row in features {
        if row.values.len() != dim {
            return Err(Error::InvalidArgument("ragged feature matrix".into()));
        }
        if row.descriptor_hash != hash {
            return Err(Error::DescriptorMismatch {
                expected: hash,
                got: row.descriptor_hash,
            });
        }
    }
    if config.n_learners == 0 || config.n_learners % 2 == 0 {
        return Err(Error::InvalidArgument(
            "n_learners must be odd and nonzero".into(),
        ));
    }
    let d_sub = config
        .subspace_dim
        .unwrap_or_else(|| dim.div_ceil(4).min(200))
        .min(dim)
        .max(1);

    let root = SeededRng::new(config.seed);

    // Optional held-out split, stratified per class.
    let (fit_idx, val_idx): (Vec<usize>, Vec<usize>) = match config.threshold_mode {
        ThresholdMode::MajorityVote => ((0..features.len()).collect(), Vec::new()),
        ThresholdMode::ValidationTuned => {
            let mut fit = Vec::new();
            let mut val = Vec::new();
            for class in [0u8, 1] {
                let mut idx: Vec<usize> = (0..features.len())
                    .filter(|&i| labels[i] == class)
                    .collect();
                shuffle(&mut idx, root.derive("valsplit", class as u64));
                let n_val = (idx.len() / 5).max(1);
                val.extend_from_slice(&idx[..n_val]);
                fit.extend_from_slice(&idx[n_val..]);
            }
            fit.sort_unstable();
            val.sort_unstable();
            (fit, val)
        }
    };

    // Standardize on the fitting rows.
    let nf = fit_idx.len() as f64;
    let mut means = vec![0.0f64; dim];
    for &i in &fit_idx {
        for (m, &v) in means.iter_mut().zip(features[i].values.iter()) {
            *m += v;
        }
    }
    for m in means.iter_mut() {
        *m /= nf;
    }
    let mut scales = vec![0.0f64; dim];
    for &i in &fit_idx {
        for (s, (&v, &m)) in scales.iter_mut().zip(features[i].values.iter().zip(means.iter())) {
            let d = v - m;
            *s += d * d;
        }
    }
    for s in scales.iter_mut() {
        *s = (*s / nf).sqrt();
        if *s < 1e-12 {
            *s = 1.0;
        }
    }
    let standardized: Vec<Vec<f64>> = features
        .iter()
        .map(|row| {
            row.values
                .iter()
                .zip(means.iter().zip(scales.iter()))
                .map(|(&v, (&m, &s))| (v - m) / s)
                .collect()
        })
        .collect();

    // Pooled within-class scatter and class means over the full dimension,
    // computed once; learners slice out their subspaces.
    let mut mu = [vec![0.0f64; dim], vec![0.0f64; dim]];
    let mut counts = [0usize; 2];
    for &i in &fit_idx {
        let c = labels[i] as usize;
        counts[c] += 1;
        for (m, &v) in mu[c].iter_mut().zip(standardized[i].iter()) {
            *m += v;
        }
    }
    for c in 0..2 {
        for m in mu[c].iter_mut() {
            *m /= counts[c] as f64;
        }
    }
    let mut scatter = vec![0.0f64; dim * dim];
    let mut centered = vec![0.0f64; dim];
    for &i in &fit_idx {
        let c = labels[i] as usize;
        for (dst, (&v, &m)) in centered.iter_mut().zip(standardized[i].iter().zip(mu[c].iter())) {
            *dst = v - m;
        }
        for a in 0..dim {
            let ca = centered[a];
            if ca == 0.0 {
                continue;
            }
            let row = &mut scatter[a * dim..(a + 1) * dim];
            for (b, &cb) in centered.iter().enumerate().skip(a) {
                row[b] += ca * cb;
            }
        }
    }

    let mut learners = Vec::with_capacity(config.n_learners);
    for l in 0..config.n_learners {
        let indices = sample_indices(dim, d_sub, root.derive("subspace", l as u64));
        let mut s = DMatrix::<f64>::zeros(d_sub, d_sub);
        for (a, &ia) in indices.iter().enumerate() {
            for (b, &ib) in indices.iter().enumerate() {
                let (lo, hi) = if ia <= ib { (ia, ib) } else { (ib, ia) };
                s[(a, b)] = scatter[lo * dim + hi];
            }
        }
        let trace: f64 = (0..d_sub).map(|i| s[(i, i)]).sum();
        let ridge = (RIDGE_FACTOR * trace / d_sub as f64).max(1e-12);
        for i in 0..d_sub {
            s[(i, i)] += ridge;
        }
        let diff = DVector::from_iterator(
            d_sub,
            indices.iter().map(|&j| mu[1][j] - mu[0][j]),
        );
        let w = match s.clone().cholesky() {
            Some(ch) => ch.solve(&diff),
            None => s
                .lu()
                .solve(&diff)
                .ok_or_else(|| Error::Numerical("singular within-class scatter".into()))?,
        };
        let mid = DVector::from_iterator(
            d_sub,
            indices.iter().map(|&j| 0.5 * (mu[0][j] + mu[1][j])),
        );
        let bias = w.dot(&mid);
        learners.push(Learner {
            indices: indices.iter().map(|&i| i as u32).collect(),
            weights: w.iter().cloned().collect(),
            bias,
        });
    }

    let majority = (config.n_learners / 2 + 1) as u32;
    let threshold = match config.threshold_mode {
        ThresholdMode::MajorityVote => majority,
        ThresholdMode::ValidationTuned => {
            let mut best = (f64::INFINITY, majority);
            for t in 1..=config.n_learners as u32 {
                let mut errors = 0usize;
                for &i in &val_idx {
                    let votes = learners
                        .iter()
                        .filter(|lr| lr.score(&standardized[i]) > 0.0)
                        .count() as u32;
                    let label = u8::from(votes >= t);
                    if label != labels[i] {
                        errors += 1;
                    }
                }
                let err = errors as f64 / val_idx.len().max(1) as f64;
                let better = err < best.0 - 1e-12
                    || ((err - best.0).abs() <= 1e-12
                        && t.abs_diff(majority) < best.1.abs_diff(majority));
                if better {
                    best = (err, t);
                }
            }
            best.1
        }
    };

    Ok(EnsembleModel {
        version: MODEL_VERSION,
        config: *config,
        standardizer: Standardizer { means, scales },
        learners,
        threshold,
        descriptor_hash: hash,
    })
}

/// Predict a 0/1 label; also returns the number of learner votes for class 1.
pub fn predict(model: &EnsembleModel, features: &FeatureVector) -> Result<(u8, u32)> {
    if features.descriptor_hash != model.descriptor_hash {
        return Err(Error::DescriptorMismatch {
            expected: model.descriptor_hash,
            got: features.descriptor_hash,
        });
    }
    if features.values.len() != model.dimension() {
        return Err(Error::InvalidArgument(format!(
            "feature vector has {} values, model expects {}",
            features.values.len(),
            model.dimension()
        )));
    }
    let standardized: Vec<f64> = features
        .values
        .iter()
        .zip(model.standardizer.means.iter().zip(model.standardizer.scales.iter()))
        .map(|(&v, (&m, &s))| (v - m) / s)
        .collect();
    let votes = model
        .learners
        .iter()
        .filter(|lr| lr.score(&standardized) > 0.0)
        .count() as u32;
    Ok((u8::from(votes >= model.threshold), votes))
}

/// Classification error of `model` over labeled rows.
pub fn classification_error(
    model: &EnsembleModel,
    features: &[FeatureVector],
    labels: &[u8],
) -> Result<f64> {
    let mut wrong = 0usize;
    for (row, &label) in features.iter().zip(labels.iter()) {
        if predict(model, row)?.0 != label {
            wrong += 1;
        }
    }
    Ok(wrong as f64 / features.len().max(1) as f64)
}

fn shuffle(idx: &mut [usize], rng: SeededRng) {
    use rand::seq::SliceRandom;
    idx.shuffle(&mut rng.rng());
}

/// Sample `k` distinct indices from `0..n` (partial Fisher-Yates), sorted.
fn sample_indices(n: usize, k: usize, rng: SeededRng) -> Vec<usize> {
    use rand::Rng;
    let mut r = rng.rng();
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = r.gen_range(i..n);
        pool.swap(i, j);
    }
    let mut out = pool[..k].to_vec();
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    /// Two Gaussian blobs 3 sigma apart along every axis.
    fn blobs(n_per_class: usize, dim: usize, seed: u64) -> (Vec<FeatureVector>, Vec<u8>) {
        let mut r = SeededRng::new(seed).rng();
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for class in 0..2u8 {
            let shift = 3.0 * class as f64;
            for _ in 0..n_per_class {
                let values: Vec<f64> = (0..dim)
                    .map(|_| shift + r.sample::<f64, _>(StandardNormal))
                    .collect();
                rows.push(FeatureVector {
                    values,
                    descriptor_hash: 0xfeed,
                });
                labels.push(class);
            }
        }
        (rows, labels)
    }

    #[test]
    fn separates_well_separated_blobs() {
        let (rows, labels) = blobs(500, 10, 1);
        let model = train(&rows, &labels, &TrainConfig::new(7)).unwrap();
        let err = classification_error(&model, &rows, &labels).unwrap();
        assert!(err <= 0.01, "training error {err}");
    }

    #[test]
    fn training_is_deterministic() {
        let (rows, labels) = blobs(50, 8, 2);
        let config = TrainConfig::new(11);
        let a = train(&rows, &labels, &config).unwrap();
        let b = train(&rows, &labels, &config).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn single_class_rejected() {
        let (rows, _) = blobs(20, 4, 3);
        let labels = vec![0u8; rows.len()];
        assert!(matches!(
            train(&rows, &labels, &TrainConfig::new(1)),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn centroid_prediction_has_wide_margin() {
        let (rows, labels) = blobs(500, 10, 4);
        let model = train(&rows, &labels, &TrainConfig::new(5)).unwrap();
        let centroid = FeatureVector {
            values: vec![0.0; 10],
            descriptor_hash: 0xfeed,
        };
        let (label, votes) = predict(&model, &centroid).unwrap();
        assert_eq!(label, 0);
        assert!(votes <= model.n_learners() as u32 / 4, "votes {votes}");
    }

    #[test]
    fn single_learner_acts_as_plain_fld() {
        let (rows, labels) = blobs(100, 6, 5);
        let config = TrainConfig {
            n_learners: 1,
            subspace_dim: Some(6),
            ..TrainConfig::new(9)
        };
        let model = train(&rows, &labels, &config).unwrap();
        assert_eq!(model.vote_threshold(), 1);
        let err = classification_error(&model, &rows, &labels).unwrap();
        assert!(err <= 0.01);
    }

    #[test]
    fn training_rows_predict_their_labels() {
        let (mut rows, mut labels) = blobs(50, 5, 6);
        rows.push(rows[0].clone());
        labels.push(labels[0]);
        let model = train(&rows, &labels, &TrainConfig::new(2)).unwrap();
        let (label, _) = predict(&model, &rows[0]).unwrap();
        assert_eq!(label, labels[0]);
    }

    #[test]
    fn row_permutation_leaves_predictions_unchanged() {
        let (rows, labels) = blobs(100, 8, 7);
        let model_a = train(&rows, &labels, &TrainConfig::new(3)).unwrap();
        let mut permuted: Vec<(FeatureVector, u8)> =
            rows.iter().cloned().zip(labels.iter().cloned()).collect();
        permuted.reverse();
        let (rows_p, labels_p): (Vec<_>, Vec<_>) = permuted.into_iter().unzip();
        let model_b = train(&rows_p, &labels_p, &TrainConfig::new(3)).unwrap();
        let (probe, _) = blobs(20, 8, 8);
        for p in &probe {
            assert_eq!(predict(&model_a, p).unwrap().0, predict(&model_b, p).unwrap().0);
        }
    }

    #[test]
    fn affine_feature_rescaling_is_absorbed() {
        let (rows, labels) = blobs(200, 6, 9);
        let model_a = train(&rows, &labels, &TrainConfig::new(4)).unwrap();
        let rescale = |v: &FeatureVector| {
            let mut values = v.values.clone();
            for (j, x) in values.iter_mut().enumerate() {
                let scale = [3.5, -2.0, 0.4, 10.0, -0.7, 1.0][j % 6];
                let shift = [7.0, -1.0, 0.0, 2.5, 100.0, -3.0][j % 6];
                *x = *x * scale + shift;
            }
            FeatureVector {
                values,
                descriptor_hash: v.descriptor_hash,
            }
        };
        let rows_b: Vec<FeatureVector> = rows.iter().map(rescale).collect();
        let model_b = train(&rows_b, &labels, &TrainConfig::new(4)).unwrap();
        let (probe, _) = blobs(30, 6, 10);
        for p in &probe {
            let q = rescale(p);
            assert_eq!(predict(&model_a, p).unwrap().0, predict(&model_b, &q).unwrap().0);
        }
    }

    #[test]
    fn votes_monotone_along_class_direction() {
        let (rows, labels) = blobs(200, 6, 11);
        let model = train(&rows, &labels, &TrainConfig::new(12)).unwrap();
        // Moving along the (raw-space) class-mean difference increases every
        // learner's projection, so votes can only grow.
        let direction: Vec<f64> = (0..6).map(|_| 3.0).collect();
        let mut last = 0u32;
        for step in 0..=20 {
            let t = step as f64 * 0.2 - 1.0;
            let probe = FeatureVector {
                values: direction.iter().map(|d| d * t).collect(),
                descriptor_hash: 0xfeed,
            };
            let (_, votes) = predict(&model, &probe).unwrap();
            if step > 0 {
                assert!(votes >= last, "votes dropped from {last} to {votes}");
            }
            last = votes;
        }
    }

    #[test]
    fn validation_tuned_threshold_runs() {
        let (rows, labels) = blobs(100, 8, 13);
        let config = TrainConfig {
            threshold_mode: ThresholdMode::ValidationTuned,
            ..TrainConfig::new(21)
        };
        let model = train(&rows, &labels, &config).unwrap();
        assert!((1..=51).contains(&(model.vote_threshold() as usize)));
        let err = classification_error(&model, &rows, &labels).unwrap();
        assert!(err <= 0.02);
    }

    #[test]
    fn save_load_roundtrip_and_guards() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        let (rows, labels) = blobs(30, 5, 14);
        let model = train(&rows, &labels, &TrainConfig::new(6)).unwrap();
        model.save(&path).unwrap();
        let loaded = EnsembleModel::load(&path).unwrap();
        assert_eq!(
            serde_json::to_string(&model).unwrap(),
            serde_json::to_string(&loaded).unwrap()
        );

        std::fs::write(&path, "{not json").unwrap();
        assert!(matches!(EnsembleModel::load(&path), Err(Error::Parse(_))));

        let mut wrong = model.clone();
        wrong.version = 99;
        wrong.save(&path).unwrap();
        assert!(matches!(
            EnsembleModel::load(&path),
            Err(Error::UnsupportedVersion { .. })
        ));

        let alien = FeatureVector {
            values: vec![0.0; 5],
            descriptor_hash: 0xbeef,
        };
        assert!(matches!(
            predict(&model, &alien),
            Err(Error::DescriptorMismatch { .. })
        ));
        let short = FeatureVector {
            values: vec![0.0; 4],
            descriptor_hash: 0xfeed,
        };
        assert!(matches!(
            predict(&model, &short),
            Err(Error::InvalidArgument(_))
        ));
    }
}
