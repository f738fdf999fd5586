//! SPAM co-occurrence features.
//!
//! Adjacent pixel differences are truncated to `[-T, T]` and their joint
//! histogram is taken along each of the 8 scan directions (pairs for order 1,
//! triples for order 2). The four axis directions are pooled into one
//! symmetry class and the four diagonal directions into another, by
//! averaging, giving `2 * (2T+1)^(order+1)` features.

use crate::error::{Error, Result};
use crate::imaging::GrayImage;

const AXES: [(isize, isize); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
const DIAGONALS: [(isize, isize); 4] = [(1, 1), (-1, -1), (1, -1), (-1, 1)];

pub fn spam_cooccurrence(
    image: &GrayImage,
    order: u8,
    t: u32,
    normalize: bool,
) -> Result<Vec<f64>> {
    if t < 1 {
        return Err(Error::InvalidArgument("spam threshold must be >= 1".into()));
    }
    if !(order == 1 || order == 2) {
        return Err(Error::InvalidArgument(format!(
            "spam order must be 1 or 2, got {order}"
        )));
    }
    let span = order as usize + 2; // pixels per tuple
    if image.width() < span || image.height() < span {
        return Err(Error::InvalidArgument(format!(
            "image {}x{} too small for order-{order} co-occurrences",
            image.width(),
            image.height()
        )));
    }
    let bins = (2 * t + 1) as usize;
    let cells = bins.pow(order as u32 + 1);

    let mut pooled = Vec::with_capacity(2 * cells);
    for class in [AXES, DIAGONALS] {
        let mut sum = vec![0u64; cells];
        let mut tuples = 0u64;
        for dir in class {
            tuples += accumulate(image, dir, order, t as i32, &mut sum);
        }
        // Pooled counts are divided by the class tuple count (frequencies sum
        // to 1) when normalizing, otherwise averaged over the 4 directions.
        let scale = if normalize && tuples > 0 {
            1.0 / tuples as f64
        } else {
            0.25
        };
        pooled.extend(sum.iter().map(|&c| c as f64 * scale));
    }
    Ok(pooled)
}

/// Add the co-occurrence counts of one direction into `sum`; returns the
/// number of tuples counted.
fn accumulate(image: &GrayImage, dir: (isize, isize), order: u8, t: i32, sum: &mut [u64]) -> u64 {
    let (w, h) = (image.width() as isize, image.height() as isize);
    let (dx, dy) = dir;
    let steps = order as isize + 1; // differences per tuple
    let bins = (2 * t + 1) as usize;
    let mut tuples = 0u64;
    for y in 0..h {
        for x in 0..w {
            let end_x = x + (steps) * dx;
            let end_y = y + (steps) * dy;
            if end_x < 0 || end_x >= w || end_y < 0 || end_y >= h {
                continue;
            }
            let mut idx = 0usize;
            let mut px = x;
            let mut py = y;
            for _ in 0..steps {
                let a = image.get(px as usize, py as usize) as i32;
                let b = image.get((px + dx) as usize, (py + dy) as usize) as i32;
                let d = (a - b).clamp(-t, t);
                idx = idx * bins + (d + t) as usize;
                px += dx;
                py += dy;
            }
            sum[idx] += 1;
            tuples += 1;
        }
    }
    tuples
}
