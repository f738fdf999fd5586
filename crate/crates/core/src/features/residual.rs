//! Prediction residuals and their histograms.

use crate::error::{Error, Result};
use crate::imaging::GrayImage;

use super::Predictor;

/// Residuals `r = x - x̂` for one predictor; border rows/columns with no
/// prediction are dropped, so the matrix is smaller than the image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidualMatrix {
    pub width: usize,
    pub height: usize,
    pub values: Vec<i16>,
}

/// Integer bin counts over a symmetric residual range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidualHistogram {
    min_bin: i32,
    counts: Vec<u64>,
}

impl ResidualHistogram {
    pub fn from_counts(min_bin: i32, counts: Vec<u64>) -> Self {
        Self { min_bin, counts }
    }

    pub fn min_bin(&self) -> i32 {
        self.min_bin
    }

    pub fn max_bin(&self) -> i32 {
        self.min_bin + self.counts.len() as i32 - 1
    }

    /// Count at bin `k`; out-of-range bins read as zero.
    pub fn bin(&self, k: i32) -> u64 {
        let idx = k - self.min_bin;
        if idx < 0 || idx as usize >= self.counts.len() {
            0
        } else {
            self.counts[idx as usize]
        }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Compute the residual matrix of `image` under `predictor`.
pub fn residual(image: &GrayImage, predictor: Predictor) -> Result<ResidualMatrix> {
    let (w, h) = (image.width(), image.height());
    let need = |min_w: usize, min_h: usize| -> Result<()> {
        if w < min_w || h < min_h {
            Err(Error::InvalidArgument(format!(
                "image {w}x{h} too small for {predictor:?} residuals"
            )))
        } else {
            Ok(())
        }
    };
    let (rw, rh) = match predictor {
        Predictor::Horizontal => {
            need(2, 1)?;
            (w - 1, h)
        }
        Predictor::Vertical => {
            need(1, 2)?;
            (w, h - 1)
        }
        Predictor::Diagonal | Predictor::MinorDiagonal => {
            need(2, 2)?;
            (w - 1, h - 1)
        }
    };
    let mut values = Vec::with_capacity(rw * rh);
    match predictor {
        Predictor::Horizontal => {
            for y in 0..h {
                for x in 1..w {
                    values.push(image.get(x, y) as i16 - image.get(x - 1, y) as i16);
                }
            }
        }
        Predictor::Vertical => {
            for y in 1..h {
                for x in 0..w {
                    values.push(image.get(x, y) as i16 - image.get(x, y - 1) as i16);
                }
            }
        }
        Predictor::Diagonal => {
            for y in 1..h {
                for x in 1..w {
                    values.push(image.get(x, y) as i16 - image.get(x - 1, y - 1) as i16);
                }
            }
        }
        Predictor::MinorDiagonal => {
            for y in 0..h - 1 {
                for x in 1..w {
                    values.push(image.get(x, y) as i16 - image.get(x - 1, y + 1) as i16);
                }
            }
        }
    }
    Ok(ResidualMatrix {
        width: rw,
        height: rh,
        values,
    })
}

/// Histogram of a residual matrix. With `threshold = Some(T)` residuals are
/// first clamped to `[-T, T]` (so the ±T bins accumulate the tails); without
/// it the full `[-255, 255]` range is used. The bin counts always sum to the
/// number of residuals.
pub fn residual_histogram(residuals: &ResidualMatrix, threshold: Option<u32>) -> ResidualHistogram {
    let t = threshold.map(|t| t as i32).unwrap_or(255);
    let bins = (2 * t + 1) as usize;
    let mut counts = vec![0u64; bins];
    for &r in &residuals.values {
        let clamped = (r as i32).clamp(-t, t);
        counts[(clamped + t) as usize] += 1;
    }
    ResidualHistogram::from_counts(-t, counts)
}
