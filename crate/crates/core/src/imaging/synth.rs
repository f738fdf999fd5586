//! Synthetic cover generation.
//!
//! Covers are built from two 2-D Gaussian white-noise fields smoothed with
//! binomial kernels: a base field smoothed by `binomial(2*ceil(8*(1-r))+1)`
//! that forms the low-frequency landscape, and a lightly smoothed
//! high-frequency field gated by a slowly varying log-normal texture
//! envelope, plus a random planar gradient of amplitude 40 gray levels,
//! clamped to `[0, 255]`. The envelope creates flat and textured regions the
//! way natural images have sky and grass: residual histograms become heavy
//! tailed (a scale mixture), and adaptive cost functions see genuine
//! high-pass contrast to concentrate their changes in.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::imaging::GrayImage;
use crate::rng::SeededRng;

/// Planar gradient peak-to-peak amplitude in gray levels.
const GRADIENT_AMPLITUDE: f64 = 40.0;
/// Texture envelope clamp range (log-normal, median 1).
const ENVELOPE_MIN: f64 = 0.35;
const ENVELOPE_MAX: f64 = 2.75;
/// Envelope grid spacing in pixels. Coarse enough that texture patches
/// survive the smoothing inside adaptive cost functions.
const ENVELOPE_STEP: usize = 32;
/// Envelope level below which a region carries no high-frequency texture.
const TEXTURE_OFFSET: f64 = 0.9;

/// Generate a synthetic grayscale cover. Deterministic in `(width, height,
/// roughness, rng)`.
pub fn synth_cover(width: usize, height: usize, roughness: f64, rng: SeededRng) -> Result<GrayImage> {
    if width < 16 || height < 16 {
        return Err(Error::InvalidArgument(format!(
            "cover dimensions must be at least 16x16, got {width}x{height}"
        )));
    }
    if !(0.0..=1.0).contains(&roughness) {
        return Err(Error::InvalidArgument(format!(
            "roughness must be in [0,1], got {roughness}"
        )));
    }

    let m = (8.0 * (1.0 - roughness)).ceil() as usize;
    let base_field = unit_smoothed_noise(width, height, m, rng.derive("synth.base", 0));
    // High-frequency texture field, lightly smoothed (binomial of length 3).
    let hf_field = unit_smoothed_noise(width, height, 1, rng.derive("synth.texture", 0));

    // Base amplitude targets a residual std on the smooth landscape that
    // grows gently with roughness; the lag-1 residual of a
    // binomial(2m+1)-smoothed unit field has std sqrt(2/(2m+1)).
    let base_residual_std = 1.1 + 2.6 * roughness;
    let base_amp = base_residual_std * ((2 * m + 1) as f64 / 2.0).sqrt();
    // Texture amplitude grows with roughness.
    let hf_amp = (1.2 + 7.0 * roughness) * (3.0f64 / 2.0).sqrt();

    // Low-frequency log-normal envelope gating the texture component.
    let tau = 0.3 + 0.4 * roughness;
    let envelope = {
        let mut r = rng.derive("synth.envelope", 0).rng();
        let gw = width.div_ceil(ENVELOPE_STEP) + 1;
        let gh = height.div_ceil(ENVELOPE_STEP) + 1;
        let grid: Vec<f64> = (0..gw * gh)
            .map(|_| r.sample::<f64, _>(StandardNormal))
            .collect();
        move |x: usize, y: usize| {
            let gx = x / ENVELOPE_STEP;
            let gy = y / ENVELOPE_STEP;
            let fx = (x % ENVELOPE_STEP) as f64 / ENVELOPE_STEP as f64;
            let fy = (y % ENVELOPE_STEP) as f64 / ENVELOPE_STEP as f64;
            let g00 = grid[gy * gw + gx];
            let g10 = grid[gy * gw + gx + 1];
            let g01 = grid[(gy + 1) * gw + gx];
            let g11 = grid[(gy + 1) * gw + gx + 1];
            let g = g00 * (1.0 - fx) * (1.0 - fy)
                + g10 * fx * (1.0 - fy)
                + g01 * (1.0 - fx) * fy
                + g11 * fx * fy;
            (tau * g).exp().clamp(ENVELOPE_MIN, ENVELOPE_MAX)
        }
    };

    let (grad_x, grad_y, base_level) = {
        let mut r = rng.derive("synth.gradient", 0).rng();
        let theta: f64 = r.gen_range(0.0..std::f64::consts::TAU);
        let level: f64 = 128.0 + r.gen_range(-16.0..16.0);
        (
            0.5 * GRADIENT_AMPLITUDE * theta.cos(),
            0.5 * GRADIENT_AMPLITUDE * theta.sin(),
            level,
        )
    };

    let w1 = (width - 1).max(1) as f64;
    let h1 = (height - 1).max(1) as f64;
    let mut pixels = Vec::with_capacity(width * height);
    for y in 0..height {
        let v = 2.0 * y as f64 / h1 - 1.0;
        for x in 0..width {
            let u = 2.0 * x as f64 / w1 - 1.0;
            let idx = y * width + x;
            let texture_gain = hf_amp * (envelope(x, y) - TEXTURE_OFFSET).max(0.0);
            let value = base_level
                + grad_x * u
                + grad_y * v
                + base_amp * base_field[idx]
                + texture_gain * hf_field[idx];
            pixels.push(value.round().clamp(0.0, 255.0) as u8);
        }
    }
    GrayImage::new(width, height, pixels)
}

/// White Gaussian noise smoothed with a binomial kernel of length `2m+1`,
/// normalized to unit variance.
fn unit_smoothed_noise(width: usize, height: usize, m: usize, rng: SeededRng) -> Vec<f64> {
    let mut r = rng.rng();
    let mut noise = vec![0.0f64; width * height];
    for v in noise.iter_mut() {
        *v = r.sample::<f64, _>(StandardNormal);
    }
    let kernel = binomial_kernel(m);
    let mut field = smooth_separable(&noise, width, height, &kernel);
    // Separable smoothing shrinks the variance by sum(w^2) per axis, so the
    // 2-D field std is exactly sum(w^2).
    let sumsq: f64 = kernel.iter().map(|w| w * w).sum();
    for v in field.iter_mut() {
        *v /= sumsq;
    }
    field
}

/// Normalized binomial kernel of length `2m+1` (row `2m` of Pascal's triangle).
fn binomial_kernel(m: usize) -> Vec<f64> {
    let n = 2 * m;
    let mut row = vec![1.0f64];
    for _ in 0..n {
        let mut next = vec![0.0; row.len() + 1];
        for (i, &v) in row.iter().enumerate() {
            next[i] += v;
            next[i + 1] += v;
        }
        row = next;
    }
    let total = 2f64.powi(n as i32);
    for v in row.iter_mut() {
        *v /= total;
    }
    row
}

/// Separable convolution with mirror-padded borders.
fn smooth_separable(src: &[f64], width: usize, height: usize, kernel: &[f64]) -> Vec<f64> {
    let half = kernel.len() / 2;
    if half == 0 {
        return src.to_vec();
    }
    let mirror = |i: isize, n: usize| -> usize {
        let n = n as isize;
        let mut i = i;
        if i < 0 {
            i = -i;
        }
        if i >= n {
            i = 2 * n - 2 - i;
        }
        i as usize
    };
    let mut tmp = vec![0.0f64; width * height];
    for y in 0..height {
        let row = &src[y * width..(y + 1) * width];
        for x in 0..width {
            let mut acc = 0.0;
            for (k, &wk) in kernel.iter().enumerate() {
                let xi = mirror(x as isize + k as isize - half as isize, width);
                acc += wk * row[xi];
            }
            tmp[y * width + x] = acc;
        }
    }
    let mut out = vec![0.0f64; width * height];
    for y in 0..height {
        for x in 0..width {
            let mut acc = 0.0;
            for (k, &wk) in kernel.iter().enumerate() {
                let yi = mirror(y as isize + k as isize - half as isize, height);
                acc += wk * tmp[yi * width + x];
            }
            out[y * width + x] = acc;
        }
    }
    out
}
