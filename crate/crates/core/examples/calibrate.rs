//! Scratch diagnostics for the synthetic cover generator.

use stegdci::embed::{embed_once, hill_cost, payload_to_rates, StegoSpec};
use stegdci::features::{residual, residual_histogram, Predictor};
use stegdci::imaging::synth_cover;
use stegdci::rng::SeededRng;
use stegdci::theory::{estimate_beta_prime, fit_cauchy, preservation_count};

fn main() {
    for &roughness in &[0.0, 0.25, 0.5, 0.75] {
        let mut kurt_acc = (0.0f64, 0.0f64, 0.0f64);
        let mut in4 = 0u64;
        let mut total = 0u64;
        let mut max_gap_frac: f64 = 0.0;
        let mut gammas = Vec::new();
        let mut change_fracs = Vec::new();
        let mut betas = Vec::new();
        let mut beta_ratio = Vec::new();
        let mut preservations = Vec::new();
        for seed in 1..=12u64 {
            let img = synth_cover(256, 256, roughness, SeededRng::new(seed)).unwrap();
            let rm = residual(&img, Predictor::Horizontal).unwrap();
            for &r in &rm.values {
                let r = r as f64;
                kurt_acc.0 += 1.0;
                kurt_acc.1 += r * r;
                kurt_acc.2 += r * r * r * r;
                if r.abs() <= 4.0 {
                    in4 += 1;
                }
                total += 1;
            }
            let h = residual_histogram(&rm, None);
            let n = h.total() as f64;
            for k in -10..10i32 {
                let gap = (h.bin(k + 1) as f64 - h.bin(k) as f64).abs() / n;
                max_gap_frac = max_gap_frac.max(gap);
            }
            if let Ok(fit) = fit_cauchy(&h) {
                gammas.push(fit.gamma);
            }
            // HILL at 0.4 bpp
            let spec = StegoSpec::hill(0.4).unwrap();
            let cost = hill_cost(&img).unwrap();
            let rates = payload_to_rates(&cost, 0.4).unwrap();
            change_fracs.push(rates.expected_change_rate());
            let stego = embed_once(&img, &spec, SeededRng::new(1000 + seed)).unwrap();
            let frac = img
                .pixels()
                .iter()
                .zip(stego.pixels())
                .filter(|(a, b)| a != b)
                .count() as f64
                / img.len() as f64;
            let _ = frac;
            if seed <= 3 {
                let model = estimate_beta_prime(&img, &spec, 8, SeededRng::new(2000 + seed)).unwrap();
                betas.push(model.beta);
                beta_ratio.push(model.beta_prime / model.beta.max(1e-9));
            }
            let lsbm = StegoSpec::lsbm(0.25).unwrap();
            preservations.push(
                preservation_count(&img, &lsbm, SeededRng::new(3000 + seed), 10).unwrap(),
            );
        }
        let n = kurt_acc.0;
        let kurt = (kurt_acc.2 / n) / (kurt_acc.1 / n).powi(2);
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len().max(1) as f64;
        let meanu = |v: &[u32]| v.iter().map(|&x| x as f64).sum::<f64>() / v.len().max(1) as f64;
        println!(
            "roughness {roughness}: kurt {kurt:.2}, in[-4,4] {:.4}, max central gap {:.4}N, gamma {:.2}, hill 2p {:.4}, beta {:.4}, beta'/beta {:.2}, preserve {:.1}/21",
            in4 as f64 / total as f64,
            max_gap_frac,
            mean(&gammas),
            mean(&change_fracs),
            mean(&betas),
            mean(&beta_ratio),
            meanu(&preservations),
        );
    }
}
