//! Minmax residual histograms.
//!
//! For every pixel with all four one-pixel predictions available, take the
//! minimum and maximum of the four directional residuals, truncate to
//! `[-T, T]`, and histogram each. The feature vector is the "min" histogram
//! followed by the "max" histogram, `2 * (2T+1)` values.

use crate::error::{Error, Result};
use crate::imaging::GrayImage;

pub fn minmax_histogram(image: &GrayImage, t: u32, normalize: bool) -> Result<Vec<f64>> {
    if t < 1 {
        return Err(Error::InvalidArgument("minmax threshold must be >= 1".into()));
    }
    let (w, h) = (image.width(), image.height());
    if w < 3 || h < 3 {
        return Err(Error::InvalidArgument(format!(
            "image {w}x{h} too small for minmax residuals"
        )));
    }
    let ti = t as i32;
    let bins = (2 * t + 1) as usize;
    let mut h_min = vec![0u64; bins];
    let mut h_max = vec![0u64; bins];
    let mut count = 0u64;
    for y in 1..h - 1 {
        for x in 1..w {
            let c = image.get(x, y) as i32;
            let rh = c - image.get(x - 1, y) as i32;
            let rv = c - image.get(x, y - 1) as i32;
            let rd = c - image.get(x - 1, y - 1) as i32;
            let rm = c - image.get(x - 1, y + 1) as i32;
            let r_min = rh.min(rv).min(rd).min(rm);
            let r_max = rh.max(rv).max(rd).max(rm);
            h_min[(r_min.clamp(-ti, ti) + ti) as usize] += 1;
            h_max[(r_max.clamp(-ti, ti) + ti) as usize] += 1;
            count += 1;
        }
    }
    let scale = if normalize && count > 0 {
        1.0 / count as f64
    } else {
        1.0
    };
    let mut out = Vec::with_capacity(2 * bins);
    out.extend(h_min.iter().map(|&c| c as f64 * scale));
    out.extend(h_max.iter().map(|&c| c as f64 * scale));
    Ok(out)
}
