//! Scratch probe: message-length search stop distribution on sensor-noise
//! covers.

use rand::Rng;
use stegdci::classifier::TrainConfig;
use stegdci::embed::{embed_once, lsbm_simulate, StegoAlgorithm, StegoSpec};
use stegdci::features::FeatureSetDescriptor;
use stegdci::imaging::{synth_cover, GrayImage};
use stegdci::protocols::{find_message_length, PipelineConfig, RateGrid};
use stegdci::rng::SeededRng;

fn hard_cover(rng: SeededRng, q_max: f64) -> GrayImage {
    let mut r = rng.derive("params", 0).rng();
    let roughness = r.gen_range(0.1..0.9);
    let sensor = r.gen_range(0.0..q_max);
    let img = synth_cover(256, 256, roughness, rng).unwrap();
    lsbm_simulate(&img, sensor, rng.derive("sensor", 0)).unwrap()
}

fn covers(n: usize, root: SeededRng, tag: &str, q_max: f64) -> Vec<GrayImage> {
    (0..n)
        .map(|i| hard_cover(root.derive(tag, i as u64), q_max))
        .collect()
}

fn main() {
    let grid = RateGrid::new(vec![0.35, 0.3, 0.25, 0.2, 0.15, 0.1]).unwrap();
    let spec_true = StegoSpec::lsbm(0.2).unwrap();
    for q_max in [0.3, 0.4] {
        for n_train in [150usize] {
            let mut picks = Vec::new();
            for trial in 1..=10u64 {
                let root = SeededRng::new(5000 + trial);
                let train = covers(n_train, root, "train", q_max);
                let mut test = covers(100, root.derive("testc", 0), "c", q_max);
                let srcs = covers(100, root.derive("tests", 0), "s", q_max);
                for (i, s) in srcs.iter().enumerate() {
                    test.push(embed_once(s, &spec_true, root.derive("emb", i as u64)).unwrap());
                }
                let pipeline = PipelineConfig {
                    descriptor: FeatureSetDescriptor::light(true),
                    train: TrainConfig::new(root.scalar_seed("t")),
                };
                let search = find_message_length(
                    &train,
                    &test,
                    StegoAlgorithm::LsbMatching,
                    &grid,
                    &pipeline,
                    None,
                    root.derive("search", 0),
                )
                .unwrap();
                picks.push(search.rate);
            }
            let hits = picks
                .iter()
                .filter(|r| [0.25, 0.2, 0.15].contains(r))
                .count();
            println!("q_max {q_max} n_train {n_train}: picks {picks:?} -> {hits}/10 hits");
        }
    }
}
