//! Steganographic change simulators.
//!
//! No real message is ever encoded: the simulators sample the pixel-change
//! process (±1 changes with the appropriate per-pixel probabilities) that an
//! actual embedder with a random key and message would produce. All results
//! downstream depend only on those change statistics.

mod hill;
mod payload;

pub use hill::hill_cost;
pub use payload::{payload_to_rates, ternary_entropy, MAX_PAYLOAD_BPP};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::GrayImage;
use crate::rng::SeededRng;

/// Embedding algorithm selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StegoAlgorithm {
    #[serde(rename = "lsbm")]
    LsbMatching,
    #[serde(rename = "hill")]
    HillAdaptive,
}

impl std::fmt::Display for StegoAlgorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StegoAlgorithm::LsbMatching => write!(f, "lsbm"),
            StegoAlgorithm::HillAdaptive => write!(f, "hill"),
        }
    }
}

/// An embedding algorithm with its payload. For LSB matching the selection
/// rate alpha equals the payload in bpp (no matrix embedding).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StegoSpec {
    pub algorithm: StegoAlgorithm,
    pub payload_bpp: f64,
}

impl StegoSpec {
    pub fn new(algorithm: StegoAlgorithm, payload_bpp: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&payload_bpp) {
            return Err(Error::InvalidArgument(format!(
                "payload must be in [0,1] bpp, got {payload_bpp}"
            )));
        }
        Ok(Self {
            algorithm,
            payload_bpp,
        })
    }

    pub fn lsbm(payload_bpp: f64) -> Result<Self> {
        Self::new(StegoAlgorithm::LsbMatching, payload_bpp)
    }

    pub fn hill(payload_bpp: f64) -> Result<Self> {
        Self::new(StegoAlgorithm::HillAdaptive, payload_bpp)
    }
}

/// Per-pixel embedding costs, same dimensions as the source image.
#[derive(Debug, Clone)]
pub struct CostMap {
    pub width: usize,
    pub height: usize,
    pub costs: Vec<f64>,
}

impl CostMap {
    pub fn new(width: usize, height: usize, costs: Vec<f64>) -> Result<Self> {
        if costs.len() != width * height {
            return Err(Error::InvalidArgument("cost map shape mismatch".into()));
        }
        if costs.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::InvalidArgument(
                "costs must be finite and nonnegative".into(),
            ));
        }
        Ok(Self {
            width,
            height,
            costs,
        })
    }
}

/// Per-pixel probability of a +1 change (the -1 change is symmetric), so the
/// total change probability of a pixel is `2 * rate <= 2/3`.
#[derive(Debug, Clone)]
pub struct ChangeRateMap {
    pub width: usize,
    pub height: usize,
    pub rates: Vec<f64>,
}

impl ChangeRateMap {
    pub fn new(width: usize, height: usize, rates: Vec<f64>) -> Result<Self> {
        if rates.len() != width * height {
            return Err(Error::InvalidArgument("rate map shape mismatch".into()));
        }
        if rates.iter().any(|p| !(0.0..=1.0 / 3.0 + 1e-12).contains(p)) {
            return Err(Error::InvalidArgument(
                "change rates must be in [0, 1/3]".into(),
            ));
        }
        Ok(Self {
            width,
            height,
            rates,
        })
    }

    /// Expected fraction of changed pixels.
    pub fn expected_change_rate(&self) -> f64 {
        2.0 * self.rates.iter().sum::<f64>() / self.rates.len() as f64
    }
}

/// Apply a ±1 step to a pixel, flipping direction at the saturated values so
/// a drawn change is never silently dropped.
#[inline]
fn step_pixel(value: u8, up: bool) -> u8 {
    match (value, up) {
        (255, true) => 254,
        (0, false) => 1,
        (v, true) => v + 1,
        (v, false) => v - 1,
    }
}

/// LSB-matching simulator: each pixel is selected with probability `alpha`
/// and, when selected, changes by ±1 with probability 1/2 (the other half of
/// the selections already carry the right LSB). Net per-pixel change
/// probability is `alpha/2`.
pub fn lsbm_simulate(image: &GrayImage, alpha: f64, rng: SeededRng) -> Result<GrayImage> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidArgument(format!(
            "alpha must be in [0,1], got {alpha}"
        )));
    }
    let mut r = rng.rng();
    let mut out = image.clone();
    let q = alpha / 4.0;
    for px in out.pixels_mut() {
        let u: f64 = r.gen();
        if u < q {
            *px = step_pixel(*px, true);
        } else if u < 2.0 * q {
            *px = step_pixel(*px, false);
        }
    }
    Ok(out)
}

/// Sample ±1 changes from a per-pixel change-rate map.
pub fn adaptive_simulate(
    image: &GrayImage,
    rates: &ChangeRateMap,
    rng: SeededRng,
) -> Result<GrayImage> {
    if rates.width != image.width() || rates.height != image.height() {
        return Err(Error::InvalidArgument(format!(
            "rate map {}x{} does not match image {}x{}",
            rates.width,
            rates.height,
            image.width(),
            image.height()
        )));
    }
    let mut r = rng.rng();
    let mut out = image.clone();
    for (px, &p) in out.pixels_mut().iter_mut().zip(rates.rates.iter()) {
        let u: f64 = r.gen();
        if u < p {
            *px = step_pixel(*px, true);
        } else if u < 2.0 * p {
            *px = step_pixel(*px, false);
        }
    }
    Ok(out)
}

/// One application of the embedding function to a single image.
pub fn embed_once(image: &GrayImage, spec: &StegoSpec, rng: SeededRng) -> Result<GrayImage> {
    match spec.algorithm {
        StegoAlgorithm::LsbMatching => lsbm_simulate(image, spec.payload_bpp, rng),
        StegoAlgorithm::HillAdaptive => {
            if spec.payload_bpp == 0.0 {
                return Ok(image.clone());
            }
            let cost = hill_cost(image)?;
            let rates = payload_to_rates(&cost, spec.payload_bpp)?;
            adaptive_simulate(image, &rates, rng)
        }
    }
}

/// Elementwise [`embed_once`] with an independent stream per image, so the
/// output for index `i` depends only on `images[i]` and `i`. Runs in
/// parallel; the per-index streams make the result independent of
/// scheduling.
pub fn embed_set(images: &[GrayImage], spec: &StegoSpec, rng: SeededRng) -> Result<Vec<GrayImage>> {
    use rayon::prelude::*;
    images
        .par_iter()
        .enumerate()
        .map(|(i, img)| embed_once(img, spec, rng.derive("embed_set", i as u64)))
        .collect()
}
