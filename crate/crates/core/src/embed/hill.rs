//! HILL embedding-cost map.
//!
//! Cost pipeline: `rho = (1 / (|X (*) KB| (*) L1 + eps)) (*) L2` with the 3x3
//! high-pass kernel `KB = [[-1,2,-1],[2,-4,2],[-1,2,-1]]`, `L1` a 3x3 mean,
//! `L2` a 15x15 mean, mirror-padded borders, `eps = 1e-10`, and costs capped
//! at the wet cost `1e10`.

use crate::error::{Error, Result};
use crate::imaging::GrayImage;

use super::CostMap;

/// Wet cost: a pixel at this cost is effectively never changed.
pub const WET_COST: f64 = 1e10;
const EPS_W: f64 = 1e-10;

const KB: [[f64; 3]; 3] = [[-1.0, 2.0, -1.0], [2.0, -4.0, 2.0], [-1.0, 2.0, -1.0]];

pub fn hill_cost(image: &GrayImage) -> Result<CostMap> {
    let (w, h) = (image.width(), image.height());
    if w < 16 || h < 16 {
        return Err(Error::InvalidArgument(format!(
            "hill cost needs at least 16x16, got {w}x{h}"
        )));
    }

    // High-pass response, absolute value.
    let mut hp = vec![0.0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (dy, row) in KB.iter().enumerate() {
                let yy = mirror(y as isize + dy as isize - 1, h);
                for (dx, &k) in row.iter().enumerate() {
                    let xx = mirror(x as isize + dx as isize - 1, w);
                    acc += k * image.get(xx, yy) as f64;
                }
            }
            hp[y * w + x] = acc.abs();
        }
    }

    // 3x3 mean, reciprocal, 15x15 mean.
    let l1 = box_mean(&hp, w, h, 1);
    let mut inv: Vec<f64> = l1
        .iter()
        .map(|&v| (1.0 / (v + EPS_W)).min(WET_COST))
        .collect();
    inv = box_mean(&inv, w, h, 7);
    let costs: Vec<f64> = inv.iter().map(|&v| v.min(WET_COST)).collect();
    CostMap::new(w, h, costs)
}

#[inline]
fn mirror(i: isize, n: usize) -> usize {
    let n = n as isize;
    let mut i = i;
    if i < 0 {
        i = -i;
    }
    if i >= n {
        i = 2 * n - 2 - i;
    }
    i as usize
}

/// Separable box mean of radius `r` with mirror padding.
fn box_mean(src: &[f64], w: usize, h: usize, r: usize) -> Vec<f64> {
    let inv_len = 1.0 / (2 * r + 1) as f64;
    let mut tmp = vec![0.0f64; w * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for x in 0..w {
            let mut acc = 0.0;
            for d in -(r as isize)..=(r as isize) {
                acc += row[mirror(x as isize + d, w)];
            }
            tmp[y * w + x] = acc * inv_len;
        }
    }
    let mut out = vec![0.0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for d in -(r as isize)..=(r as isize) {
                acc += tmp[mirror(y as isize + d, h) * w + x];
            }
            out[y * w + x] = acc * inv_len;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::synth_cover;
    use crate::rng::SeededRng;

    /// Independent oracle: the whole pipeline with plain nested 2-D
    /// convolutions, no separability tricks.
    fn hill_cost_oracle(image: &GrayImage) -> Vec<f64> {
        let (w, h) = (image.width(), image.height());
        let conv = |src: &dyn Fn(usize, usize) -> f64, kernel: &[(isize, isize, f64)]| {
            let mut out = vec![0.0f64; w * h];
            for y in 0..h {
                for x in 0..w {
                    let mut acc = 0.0;
                    for &(dx, dy, k) in kernel {
                        let xx = mirror(x as isize + dx, w);
                        let yy = mirror(y as isize + dy, h);
                        acc += k * src(xx, yy);
                    }
                    out[y * w + x] = acc;
                }
            }
            out
        };
        let mut kb = Vec::new();
        for dy in -1isize..=1 {
            for dx in -1isize..=1 {
                kb.push((dx, dy, KB[(dy + 1) as usize][(dx + 1) as usize]));
            }
        }
        let mut l1 = Vec::new();
        for dy in -1isize..=1 {
            for dx in -1isize..=1 {
                l1.push((dx, dy, 1.0 / 9.0));
            }
        }
        let mut l2 = Vec::new();
        for dy in -7isize..=7 {
            for dx in -7isize..=7 {
                l2.push((dx, dy, 1.0 / 225.0));
            }
        }
        let hp = conv(&|x, y| image.get(x, y) as f64, &kb);
        let hp_abs: Vec<f64> = hp.iter().map(|v| v.abs()).collect();
        let sm = conv(&|x, y| hp_abs[y * w + x], &l1);
        let inv: Vec<f64> = sm
            .iter()
            .map(|&v| (1.0 / (v + EPS_W)).min(WET_COST))
            .collect();
        let out = conv(&|x, y| inv[y * w + x], &l2);
        out.iter().map(|&v| v.min(WET_COST)).collect()
    }

    #[test]
    fn matches_direct_convolution_oracle() {
        let img = synth_cover(32, 32, 0.7, SeededRng::new(77)).unwrap();
        let fast = hill_cost(&img).unwrap();
        let slow = hill_cost_oracle(&img);
        for (a, b) in fast.costs.iter().zip(slow.iter()) {
            let denom = b.abs().max(1.0);
            assert!((a - b).abs() / denom < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn constant_image_hits_wet_cost_everywhere() {
        let img = GrayImage::new(32, 32, vec![128; 32 * 32]).unwrap();
        let cost = hill_cost(&img).unwrap();
        assert!(cost.costs.iter().all(|&c| c == WET_COST));
    }

    #[test]
    fn textured_region_is_cheaper_than_flat_region() {
        let mut px = vec![128u8; 32 * 32];
        px[8 * 32 + 8] = 220;
        let img = GrayImage::new(32, 32, px).unwrap();
        let cost = hill_cost(&img).unwrap();
        assert!(cost.costs[8 * 32 + 8] < cost.costs[25 * 32 + 25]);
    }

    #[test]
    fn shape_matches_image() {
        let img = synth_cover(20, 40, 0.5, SeededRng::new(5)).unwrap();
        let cost = hill_cost(&img).unwrap();
        assert_eq!((cost.width, cost.height), (20, 40));
        assert_eq!(cost.costs.len(), 800);
        assert!(matches!(
            hill_cost(&GrayImage::new(8, 32, vec![0; 256]).unwrap()),
            Err(Error::InvalidArgument(_))
        ));
    }
}
