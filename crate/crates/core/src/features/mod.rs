//! Feature extraction: residual histograms, SPAM co-occurrences and minmax
//! histograms, plus the descriptor/CSV plumbing that ties feature vectors to
//! the exact configuration that produced them.

mod matrix;
mod minmax;
mod residual;
mod spam;

pub use matrix::{load_feature_matrix, save_feature_matrix};
pub use minmax::minmax_histogram;
pub use residual::{residual, residual_histogram, ResidualHistogram, ResidualMatrix};
pub use spam::spam_cooccurrence;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::GrayImage;
use crate::rng::fnv1a;

/// One-pixel predictors used for residuals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Predictor {
    /// x̂(i,j) = x(i-1,j)
    Horizontal,
    /// x̂(i,j) = x(i,j-1)
    Vertical,
    /// x̂(i,j) = x(i-1,j-1)
    Diagonal,
    /// x̂(i,j) = x(i-1,j+1)
    MinorDiagonal,
}

impl Predictor {
    pub const ALL: [Predictor; 4] = [
        Predictor::Horizontal,
        Predictor::Vertical,
        Predictor::Diagonal,
        Predictor::MinorDiagonal,
    ];
}

/// Feature submodels, in canonical concatenation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SubmodelKind {
    ResidualHist,
    Spam1,
    Spam2,
    MinMax,
}

/// A submodel with its truncation threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Submodel {
    pub kind: SubmodelKind,
    pub t: u32,
}

impl Submodel {
    pub fn dimension(&self) -> usize {
        let bins = (2 * self.t + 1) as usize;
        match self.kind {
            SubmodelKind::ResidualHist => 4 * bins,
            SubmodelKind::Spam1 => 2 * bins * bins,
            SubmodelKind::Spam2 => 2 * bins * bins * bins,
            SubmodelKind::MinMax => 2 * bins,
        }
    }
}

/// Which submodels to extract, with what truncation, and whether to
/// normalize counts to frequencies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSetDescriptor {
    pub submodels: Vec<Submodel>,
    pub normalize: bool,
}

impl FeatureSetDescriptor {
    pub fn new(mut submodels: Vec<Submodel>, normalize: bool) -> Result<Self> {
        if submodels.is_empty() {
            return Err(Error::InvalidArgument("empty feature descriptor".into()));
        }
        if submodels.iter().any(|s| s.t < 1) {
            return Err(Error::InvalidArgument("truncation must be >= 1".into()));
        }
        submodels.sort_by_key(|s| s.kind);
        for w in submodels.windows(2) {
            if w[0].kind == w[1].kind {
                return Err(Error::InvalidArgument(format!(
                    "duplicate submodel {:?}",
                    w[0].kind
                )));
            }
        }
        Ok(Self {
            submodels,
            normalize,
        })
    }

    /// One threshold for every submodel.
    pub fn uniform(kinds: &[SubmodelKind], t: u32, normalize: bool) -> Result<Self> {
        Self::new(kinds.iter().map(|&kind| Submodel { kind, t }).collect(), normalize)
    }

    /// The default "rich-model-like" set: residual histograms (T=10),
    /// first/second-order SPAM (T=4/T=3) and minmax (T=4), 950 features.
    pub fn reduced_rich(normalize: bool) -> Self {
        Self::new(
            vec![
                Submodel { kind: SubmodelKind::ResidualHist, t: 10 },
                Submodel { kind: SubmodelKind::Spam1, t: 4 },
                Submodel { kind: SubmodelKind::Spam2, t: 3 },
                Submodel { kind: SubmodelKind::MinMax, t: 4 },
            ],
            normalize,
        )
        .expect("static descriptor")
    }

    /// A light set that skips the second-order co-occurrences; good enough
    /// for non-adaptive embedding and much faster to extract.
    pub fn light(normalize: bool) -> Self {
        Self::new(
            vec![
                Submodel { kind: SubmodelKind::ResidualHist, t: 10 },
                Submodel { kind: SubmodelKind::Spam1, t: 4 },
                Submodel { kind: SubmodelKind::MinMax, t: 4 },
            ],
            normalize,
        )
        .expect("static descriptor")
    }

    pub fn dimension(&self) -> usize {
        self.submodels.iter().map(Submodel::dimension).sum()
    }

    /// Stable identity of the descriptor, used to guard models and feature
    /// files against configuration drift.
    pub fn hash(&self) -> u64 {
        let mut s = fnv1a(0xcbf2_9ce4_8422_2325, b"fsd-v1");
        for sub in &self.submodels {
            let tag: &[u8] = match sub.kind {
                SubmodelKind::ResidualHist => b"rh",
                SubmodelKind::Spam1 => b"s1",
                SubmodelKind::Spam2 => b"s2",
                SubmodelKind::MinMax => b"mm",
            };
            s = fnv1a(s, tag);
            s = fnv1a(s, &sub.t.to_le_bytes());
        }
        fnv1a(s, &[self.normalize as u8])
    }
}

/// An extracted feature vector, tagged with the descriptor that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub descriptor_hash: u64,
}

/// Extract the requested submodels, concatenated in canonical order.
pub fn extract(image: &GrayImage, descriptor: &FeatureSetDescriptor) -> Result<FeatureVector> {
    let mut values = Vec::with_capacity(descriptor.dimension());
    for sub in &descriptor.submodels {
        match sub.kind {
            SubmodelKind::ResidualHist => {
                for pred in Predictor::ALL {
                    let hist = residual_histogram(&residual(image, pred)?, Some(sub.t));
                    let n = hist.total() as f64;
                    let scale = if descriptor.normalize && n > 0.0 { 1.0 / n } else { 1.0 };
                    values.extend(hist.counts().iter().map(|&c| c as f64 * scale));
                }
            }
            SubmodelKind::Spam1 => {
                values.extend(spam_cooccurrence(image, 1, sub.t, descriptor.normalize)?)
            }
            SubmodelKind::Spam2 => {
                values.extend(spam_cooccurrence(image, 2, sub.t, descriptor.normalize)?)
            }
            SubmodelKind::MinMax => {
                values.extend(minmax_histogram(image, sub.t, descriptor.normalize)?)
            }
        }
    }
    debug_assert_eq!(values.len(), descriptor.dimension());
    Ok(FeatureVector {
        values,
        descriptor_hash: descriptor.hash(),
    })
}

/// Extract a whole image set in parallel, preserving order.
pub fn extract_batch(
    images: &[GrayImage],
    descriptor: &FeatureSetDescriptor,
) -> Result<Vec<FeatureVector>> {
    use rayon::prelude::*;
    images
        .par_iter()
        .map(|img| extract(img, descriptor))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::synth_cover;
    use crate::rng::SeededRng;

    #[test]
    fn dimensions_follow_declaration() {
        let d = FeatureSetDescriptor::uniform(&[SubmodelKind::ResidualHist], 10, true).unwrap();
        assert_eq!(d.dimension(), 84);
        let d = FeatureSetDescriptor::uniform(
            &[SubmodelKind::MinMax, SubmodelKind::ResidualHist],
            4,
            true,
        )
        .unwrap();
        assert_eq!(d.dimension(), 4 * 9 + 18);
        assert_eq!(FeatureSetDescriptor::reduced_rich(true).dimension(), 950);

        let img = synth_cover(32, 32, 0.5, SeededRng::new(1)).unwrap();
        let v = extract(&img, &d).unwrap();
        assert_eq!(v.values.len(), d.dimension());
    }

    #[test]
    fn extraction_is_pure() {
        let img = synth_cover(48, 32, 0.6, SeededRng::new(2)).unwrap();
        let d = FeatureSetDescriptor::reduced_rich(true);
        assert_eq!(extract(&img, &d).unwrap(), extract(&img, &d).unwrap());
    }

    #[test]
    fn canonical_order_ignores_declaration_order() {
        let a = FeatureSetDescriptor::uniform(
            &[SubmodelKind::MinMax, SubmodelKind::Spam1],
            4,
            false,
        )
        .unwrap();
        let b = FeatureSetDescriptor::uniform(
            &[SubmodelKind::Spam1, SubmodelKind::MinMax],
            4,
            false,
        )
        .unwrap();
        assert_eq!(a, b);
        assert_eq!(a.hash(), b.hash());
    }

    #[test]
    fn hash_separates_configurations() {
        let a = FeatureSetDescriptor::uniform(&[SubmodelKind::Spam1], 4, false).unwrap();
        let b = FeatureSetDescriptor::uniform(&[SubmodelKind::Spam1], 3, false).unwrap();
        let c = FeatureSetDescriptor::uniform(&[SubmodelKind::Spam1], 4, true).unwrap();
        assert_ne!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn invalid_descriptors_rejected() {
        assert!(FeatureSetDescriptor::new(vec![], true).is_err());
        assert!(FeatureSetDescriptor::uniform(&[SubmodelKind::Spam1], 0, true).is_err());
        assert!(FeatureSetDescriptor::new(
            vec![
                Submodel { kind: SubmodelKind::Spam1, t: 3 },
                Submodel { kind: SubmodelKind::Spam1, t: 4 },
            ],
            true
        )
        .is_err());
    }
}
