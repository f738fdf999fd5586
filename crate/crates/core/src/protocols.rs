//! Higher-level steganalysis protocols on top of the DCI machinery: the full
//! train-and-test pipeline, unknown-message-length search, multi-rate
//! fusion for mixed-payload batches, unsupervised detection via artificial
//! training sets, and pooled multi-embedder dataset construction.

use serde::{Deserialize, Serialize};

use crate::classifier::{self, EnsembleModel, TrainConfig};
use crate::dci::{quad_classify, summarize, DciReport, Verdict};
use crate::embed::{embed_once, embed_set, StegoAlgorithm, StegoSpec};
use crate::error::{Error, Result};
use crate::features::{extract, extract_batch, FeatureSetDescriptor, FeatureVector};
use crate::imaging::{GrayImage, Label};
use crate::rng::SeededRng;

/// Feature and training configuration shared by the protocol pipelines.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub descriptor: FeatureSetDescriptor,
    pub train: TrainConfig,
}

/// Ordered payload grid, strictly decreasing, all in (0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateGrid {
    rates: Vec<f64>,
}

impl RateGrid {
    pub fn new(rates: Vec<f64>) -> Result<Self> {
        if rates.is_empty() {
            return Err(Error::InvalidArgument("empty rate grid".into()));
        }
        for &r in &rates {
            if !(r > 0.0 && r <= 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "grid rate {r} outside (0, 1]"
                )));
            }
        }
        for w in rates.windows(2) {
            if w[1] >= w[0] {
                return Err(Error::InvalidArgument(
                    "rate grid must be strictly decreasing".into(),
                ));
            }
        }
        Ok(Self { rates })
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    /// The grid rate closest to the middle, used as the standard-classifier
    /// reference in mixed-rate comparisons.
    pub fn middle(&self) -> f64 {
        self.rates[self.rates.len() / 2]
    }
}

/// One rate of a scan: the payload and the DCI report it produced.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateScanRow {
    pub rate: f64,
    pub report: DciReport,
}

/// Render scan rows in the tabular layout used by the reports.
pub fn scan_table_csv(rows: &[RateScanRow]) -> String {
    let mut out = format!("rate,{}\n", DciReport::TABLE_HEADER);
    for row in rows {
        out.push_str(&format!("{:.4},{}\n", row.rate, row.report.table_row()));
    }
    out
}

/// Precomputed cover/test features so repeated scans only re-embed.
pub struct DciContext<'a> {
    train_covers: &'a [GrayImage],
    test: &'a [GrayImage],
    cover_features: Vec<FeatureVector>,
    test_features: Vec<FeatureVector>,
    pipeline: &'a PipelineConfig,
}

impl<'a> DciContext<'a> {
    pub fn new(
        train_covers: &'a [GrayImage],
        test: &'a [GrayImage],
        pipeline: &'a PipelineConfig,
    ) -> Result<Self> {
        let cover_features = extract_batch(train_covers, &pipeline.descriptor)?;
        let test_features = extract_batch(test, &pipeline.descriptor)?;
        Ok(Self {
            train_covers,
            test,
            cover_features,
            test_features,
            pipeline,
        })
    }

    /// Train the primary/secondary classifier pair for `spec`.
    ///
    /// The primary training set is the covers plus their single embeddings;
    /// the secondary set is one further embedding of every primary image,
    /// with labels carried over.
    pub fn train_pair(&self, spec: &StegoSpec, rng: SeededRng) -> Result<(EnsembleModel, EnsembleModel)> {
        use rayon::prelude::*;
        let n = self.train_covers.len();
        // Cover half: primary features are precomputed, the secondary image
        // is one embedding away.
        let cover_b: Vec<FeatureVector> = self
            .train_covers
            .par_iter()
            .enumerate()
            .map(|(i, cover)| {
                let b = embed_once(cover, spec, rng.derive("train.b", i as u64))?;
                extract(&b, &self.pipeline.descriptor)
            })
            .collect::<Result<_>>()?;
        // Stego half: embed once for the primary set, once more for the
        // secondary.
        let stego_pairs: Vec<(FeatureVector, FeatureVector)> = self
            .train_covers
            .par_iter()
            .enumerate()
            .map(|(i, cover)| {
                let stego = embed_once(cover, spec, rng.derive("train.stego", i as u64))?;
                let fa = extract(&stego, &self.pipeline.descriptor)?;
                let b = embed_once(&stego, spec, rng.derive("train.b", (n + i) as u64))?;
                let fb = extract(&b, &self.pipeline.descriptor)?;
                Ok((fa, fb))
            })
            .collect::<Result<_>>()?;
        let mut a_features = Vec::with_capacity(2 * n);
        let mut b_features = Vec::with_capacity(2 * n);
        let mut labels = Vec::with_capacity(2 * n);
        a_features.extend(self.cover_features.iter().cloned());
        b_features.extend(cover_b);
        labels.resize(n, 0u8);
        for (fa, fb) in stego_pairs {
            a_features.push(fa);
            b_features.push(fb);
            labels.push(1u8);
        }
        let ca_config = TrainConfig {
            seed: rng.scalar_seed("ca"),
            ..self.pipeline.train
        };
        let cb_config = TrainConfig {
            seed: rng.scalar_seed("cb"),
            ..self.pipeline.train
        };
        let ca = classifier::train(&a_features, &labels, &ca_config)?;
        let cb = classifier::train(&b_features, &labels, &cb_config)?;
        Ok((ca, cb))
    }

    /// Full DCI run at one embedding spec: train both classifiers, build the
    /// secondary testing set, classify four ways and summarize.
    pub fn run_at(
        &self,
        spec: &StegoSpec,
        truth: Option<&[Label]>,
        rng: SeededRng,
    ) -> Result<DciReport> {
        use rayon::prelude::*;
        let (ca, cb) = self.train_pair(spec, rng.derive("train", 0))?;
        let b_features: Vec<FeatureVector> = self
            .test
            .par_iter()
            .enumerate()
            .map(|(i, img)| {
                let b = embed_once(img, spec, rng.derive("test.b", i as u64))?;
                extract(&b, &self.pipeline.descriptor)
            })
            .collect::<Result<_>>()?;
        let quads = quad_classify(&ca, &cb, &self.test_features, &b_features)?;
        summarize(&quads, truth, self.test.len())
    }
}

/// One-shot DCI pipeline: covers + test images in, report out.
pub fn run_dci(
    train_covers: &[GrayImage],
    test: &[GrayImage],
    spec: &StegoSpec,
    pipeline: &PipelineConfig,
    truth: Option<&[Label]>,
    rng: SeededRng,
) -> Result<DciReport> {
    DciContext::new(train_covers, test, pipeline)?.run_at(spec, truth, rng)
}

/// Result of the unknown-message-length search.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MessageLengthSearch {
    pub rate: f64,
    /// Set when no grid rate satisfied the stopping rule; `rate` is then the
    /// last grid entry.
    pub exhausted: bool,
    pub scan: Vec<RateScanRow>,
}

/// The scan stopping rule: the first row whose cover-side inconsistencies do
/// not dominate the stego side.
pub fn scan_stopping_index(rows: &[(usize, usize)]) -> Option<usize> {
    rows.iter().position(|&(nc_cover, nc_stego)| nc_cover <= nc_stego)
}

/// Walk the rate grid from the highest payload down, running the full DCI at
/// each rate, and return the first rate where the overestimation signature
/// (more cover-side than stego-side inconsistencies) disappears.
pub fn find_message_length(
    train_covers: &[GrayImage],
    test: &[GrayImage],
    algorithm: StegoAlgorithm,
    grid: &RateGrid,
    pipeline: &PipelineConfig,
    truth: Option<&[Label]>,
    rng: SeededRng,
) -> Result<MessageLengthSearch> {
    if train_covers.len() < 100 {
        return Err(Error::InvalidArgument(format!(
            "message-length search needs at least 100 training covers, got {}",
            train_covers.len()
        )));
    }
    let ctx = DciContext::new(train_covers, test, pipeline)?;
    let mut scan = Vec::new();
    for (i, &rate) in grid.rates().iter().enumerate() {
        let spec = StegoSpec::new(algorithm, rate)?;
        let report = ctx.run_at(&spec, truth, rng.derive("rate", i as u64))?;
        let stop = report.n_nc_cover <= report.n_nc_stego;
        scan.push(RateScanRow { rate, report });
        if stop {
            return Ok(MessageLengthSearch {
                rate,
                exhausted: false,
                scan,
            });
        }
    }
    Ok(MessageLengthSearch {
        rate: *grid.rates().last().expect("grid nonempty"),
        exhausted: true,
        scan,
    })
}

/// Fused per-image label over a rate grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FusionLabel {
    Cover,
    Stego,
    Nc,
}

impl std::fmt::Display for FusionLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FusionLabel::Cover => write!(f, "cover"),
            FusionLabel::Stego => write!(f, "stego"),
            FusionLabel::Nc => write!(f, "nc"),
        }
    }
}

/// Per-image fusion outcome with the verdict sequence that produced it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FusionOutcome {
    pub label: FusionLabel,
    /// (rate, verdict) pairs in high-to-low rate order.
    pub per_rate: Vec<(f64, Verdict)>,
}

/// Fuse the per-rate verdicts of a single image.
///
/// Rules, in order: (1) fewer than two non-NC2 verdicts mean the image stays
/// inconsistent; (2) if, after discarding NC2 entries and treating NC1 as a
/// wildcard, every Cover precedes every Stego in high-to-low rate order and
/// at least one Stego is present, the image is Stego (the over- to
/// under-estimation signature); (3) otherwise majority vote over the Cover
/// and Stego verdicts, ties inconsistent.
pub fn multirate_fuse(verdicts: &[(f64, Verdict)], grid: &RateGrid) -> Result<FusionOutcome> {
    let mut ordered = Vec::with_capacity(grid.len());
    for &rate in grid.rates() {
        let v = verdicts
            .iter()
            .find(|(r, _)| (r - rate).abs() < 1e-12)
            .ok_or_else(|| Error::InvalidArgument(format!("missing verdict for rate {rate}")))?;
        ordered.push((rate, v.1));
    }
    let usable: Vec<Verdict> = ordered
        .iter()
        .map(|&(_, v)| v)
        .filter(|v| *v != Verdict::Nc2)
        .collect();
    if usable.len() < 2 {
        return Ok(FusionOutcome {
            label: FusionLabel::Nc,
            per_rate: ordered,
        });
    }
    let decisive: Vec<Verdict> = usable
        .iter()
        .cloned()
        .filter(|v| matches!(v, Verdict::Cover | Verdict::Stego))
        .collect();
    let regular = decisive
        .windows(2)
        .all(|w| !(w[0] == Verdict::Stego && w[1] == Verdict::Cover));
    let stego_count = decisive.iter().filter(|&&v| v == Verdict::Stego).count();
    let cover_count = decisive.len() - stego_count;
    let label = if regular && stego_count >= 1 {
        FusionLabel::Stego
    } else if stego_count > cover_count {
        FusionLabel::Stego
    } else if cover_count > stego_count {
        FusionLabel::Cover
    } else {
        FusionLabel::Nc
    };
    Ok(FusionOutcome {
        label,
        per_rate: ordered,
    })
}

/// Ground truth for one test image in a mixed-rate batch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestTruth {
    pub label: Label,
    pub bpp: Option<f64>,
}

/// Accuracy per (label, true rate) group on the fused labels.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupSummary {
    pub label: Label,
    pub bpp: Option<f64>,
    pub n: usize,
    pub n_classified: usize,
    pub n_correct: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RealWorldSummary {
    pub n: usize,
    pub n_classified: usize,
    pub classified_fraction: f64,
    pub accuracy_on_classified: f64,
    /// Primary-classifier accuracy at the middle grid rate, restricted to
    /// the images the fusion classified.
    pub standard_accuracy_on_classified: f64,
    pub groups: Vec<GroupSummary>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RealWorldScan {
    pub outcomes: Vec<FusionOutcome>,
    pub rate_reports: Vec<RateScanRow>,
    pub summary: Option<RealWorldSummary>,
}

/// Run the DCI at every grid rate (four classifications per image per rate)
/// and fuse the per-rate verdicts per image.
pub fn real_world_scan(
    train_covers: &[GrayImage],
    test: &[GrayImage],
    algorithm: StegoAlgorithm,
    grid: &RateGrid,
    pipeline: &PipelineConfig,
    truth: Option<&[TestTruth]>,
    rng: SeededRng,
) -> Result<RealWorldScan> {
    if test.is_empty() {
        return Ok(RealWorldScan {
            outcomes: Vec::new(),
            rate_reports: Vec::new(),
            summary: None,
        });
    }
    if let Some(t) = truth {
        if t.len() != test.len() {
            return Err(Error::InvalidArgument(format!(
                "{} truth entries for {} test images",
                t.len(),
                test.len()
            )));
        }
    }
    let labels: Option<Vec<Label>> = truth.map(|t| t.iter().map(|x| x.label).collect());
    let ctx = DciContext::new(train_covers, test, pipeline)?;
    let mut rate_reports = Vec::with_capacity(grid.len());
    for (i, &rate) in grid.rates().iter().enumerate() {
        let spec = StegoSpec::new(algorithm, rate)?;
        let report = ctx.run_at(&spec, labels.as_deref(), rng.derive("rate", i as u64))?;
        rate_reports.push(RateScanRow { rate, report });
    }
    let mut outcomes = Vec::with_capacity(test.len());
    for k in 0..test.len() {
        let per_rate: Vec<(f64, Verdict)> = rate_reports
            .iter()
            .map(|row| (row.rate, row.report.verdicts[k]))
            .collect();
        outcomes.push(multirate_fuse(&per_rate, grid)?);
    }

    let summary = truth.map(|truths| {
        let middle_idx = grid.len() / 2;
        let middle_quads = &rate_reports[middle_idx].report.quads;
        let mut n_classified = 0usize;
        let mut n_correct = 0usize;
        let mut std_correct = 0usize;
        let mut groups: Vec<GroupSummary> = Vec::new();
        for (k, (outcome, t)) in outcomes.iter().zip(truths.iter()).enumerate() {
            let group = match groups
                .iter_mut()
                .find(|g| g.label == t.label && g.bpp == t.bpp)
            {
                Some(g) => g,
                None => {
                    groups.push(GroupSummary {
                        label: t.label,
                        bpp: t.bpp,
                        n: 0,
                        n_classified: 0,
                        n_correct: 0,
                    });
                    groups.last_mut().expect("just pushed")
                }
            };
            group.n += 1;
            if outcome.label == FusionLabel::Nc {
                continue;
            }
            n_classified += 1;
            group.n_classified += 1;
            let truth_is_stego = t.label == Label::Stego;
            let fused_stego = outcome.label == FusionLabel::Stego;
            if fused_stego == truth_is_stego {
                n_correct += 1;
                group.n_correct += 1;
            }
            if (middle_quads[k].ca_a == 1) == truth_is_stego {
                std_correct += 1;
            }
        }
        groups.sort_by(|a, b| {
            (a.label == Label::Stego, a.bpp.unwrap_or(0.0))
                .partial_cmp(&(b.label == Label::Stego, b.bpp.unwrap_or(0.0)))
                .expect("finite rates")
        });
        RealWorldSummary {
            n: test.len(),
            n_classified,
            classified_fraction: n_classified as f64 / test.len() as f64,
            accuracy_on_classified: n_correct as f64 / n_classified.max(1) as f64,
            standard_accuracy_on_classified: std_correct as f64 / n_classified.max(1) as f64,
            groups,
        }
    });

    Ok(RealWorldScan {
        outcomes,
        rate_reports,
        summary,
    })
}

/// Unsupervised detection with artificial training sets: train on the test
/// set (label 0) against its double embedding (label 1) and read the labels
/// of the single embedding through the index bijection.
pub fn ats_unsupervised(
    test: &[GrayImage],
    spec: &StegoSpec,
    descriptor: &FeatureSetDescriptor,
    config: &TrainConfig,
    rng: SeededRng,
) -> Result<Vec<u8>> {
    if test.len() < 40 {
        return Err(Error::InvalidArgument(format!(
            "ats needs at least 40 images, got {}",
            test.len()
        )));
    }
    let b = embed_set(test, spec, rng.derive("ats.b", 0))?;
    let c = embed_set(&b, spec, rng.derive("ats.c", 0))?;
    let mut rows = extract_batch(test, descriptor)?;
    rows.extend(extract_batch(&c, descriptor)?);
    let mut labels = vec![0u8; test.len()];
    labels.resize(2 * test.len(), 1u8);
    let model = classifier::train(&rows, &labels, config)?;
    extract_batch(&b, descriptor)?
        .iter()
        .map(|f| Ok(classifier::predict(&model, f)?.0))
        .collect()
}

/// Embed each cover with one spec drawn from `specs`, keeping the per-spec
/// counts balanced within one. The assignment is a deterministic shuffle of
/// a round-robin list.
pub fn build_pooled_dataset(
    covers: &[GrayImage],
    specs: &[StegoSpec],
    rng: SeededRng,
) -> Result<(Vec<GrayImage>, Vec<StegoSpec>)> {
    if specs.is_empty() {
        return Err(Error::InvalidArgument("no embedding specs supplied".into()));
    }
    let mut assignment: Vec<StegoSpec> = (0..covers.len())
        .map(|i| specs[i % specs.len()])
        .collect();
    use rand::seq::SliceRandom;
    assignment.shuffle(&mut rng.derive("pool.shuffle", 0).rng());
    let mut stego = Vec::with_capacity(covers.len());
    for (i, (cover, spec)) in covers.iter().zip(assignment.iter()).enumerate() {
        stego.push(embed_once(cover, spec, rng.derive("pool.embed", i as u64))?);
    }
    Ok((stego, assignment))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::StegoAlgorithm;
    use crate::imaging::synth_cover;

    fn v(rates: &[f64], verdicts: &[Verdict]) -> Vec<(f64, Verdict)> {
        rates.iter().cloned().zip(verdicts.iter().cloned()).collect()
    }

    fn grid5() -> RateGrid {
        RateGrid::new(vec![0.6, 0.5, 0.4, 0.3, 0.2]).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(RateGrid::new(vec![]).is_err());
        assert!(RateGrid::new(vec![0.3, 0.3]).is_err());
        assert!(RateGrid::new(vec![0.2, 0.3]).is_err());
        assert!(RateGrid::new(vec![0.3, 0.0]).is_err());
        assert!(RateGrid::new(vec![1.5, 0.2]).is_err());
        let g = RateGrid::new(vec![0.5, 0.4, 0.3]).unwrap();
        assert_eq!(g.middle(), 0.4);
    }

    #[test]
    fn fuse_regular_sequence_is_stego() {
        use Verdict::*;
        let rates = [0.6, 0.5, 0.4, 0.3, 0.2];
        let out = multirate_fuse(&v(&rates, &[Nc1, Cover, Stego, Stego, Nc1]), &grid5()).unwrap();
        assert_eq!(out.label, FusionLabel::Stego);
    }

    #[test]
    fn fuse_nearly_all_nc2_is_nc() {
        use Verdict::*;
        let rates = [0.6, 0.5, 0.4, 0.3, 0.2];
        let out = multirate_fuse(&v(&rates, &[Nc2, Nc2, Nc2, Nc2, Stego]), &grid5()).unwrap();
        assert_eq!(out.label, FusionLabel::Nc);
        let out = multirate_fuse(&v(&rates, &[Nc2; 5]), &grid5()).unwrap();
        assert_eq!(out.label, FusionLabel::Nc);
    }

    #[test]
    fn fuse_irregular_tie_is_nc() {
        use Verdict::*;
        let rates = [0.6, 0.5, 0.4, 0.3, 0.2];
        let out = multirate_fuse(&v(&rates, &[Stego, Cover, Stego, Cover, Nc1]), &grid5()).unwrap();
        assert_eq!(out.label, FusionLabel::Nc);
    }

    #[test]
    fn fuse_majority_vote_cases() {
        use Verdict::*;
        let rates = [0.6, 0.5, 0.4, 0.3, 0.2];
        // Irregular but cover-heavy.
        let out = multirate_fuse(&v(&rates, &[Stego, Cover, Cover, Cover, Stego]), &grid5()).unwrap();
        assert_eq!(out.label, FusionLabel::Cover);
        // All-cover regular sequence has no stego, falls through to voting.
        let out = multirate_fuse(&v(&rates, &[Cover, Cover, Nc1, Cover, Nc1]), &grid5()).unwrap();
        assert_eq!(out.label, FusionLabel::Cover);
        // Wildcards only: 0-0 tie.
        let out = multirate_fuse(&v(&rates, &[Nc1, Nc1, Nc1, Nc1, Nc1]), &grid5()).unwrap();
        assert_eq!(out.label, FusionLabel::Nc);
    }

    #[test]
    fn fuse_never_invents_stego() {
        use Verdict::*;
        // No Stego verdict anywhere: the fused label cannot be Stego.
        let rates = [0.6, 0.5, 0.4, 0.3, 0.2];
        let patterns: &[[Verdict; 5]] = &[
            [Cover, Cover, Cover, Cover, Cover],
            [Cover, Nc1, Cover, Nc2, Cover],
            [Nc1, Nc1, Cover, Nc1, Nc1],
            [Nc2, Nc2, Cover, Cover, Nc1],
        ];
        for p in patterns {
            let out = multirate_fuse(&v(&rates, p), &grid5()).unwrap();
            assert_ne!(out.label, FusionLabel::Stego, "{p:?}");
        }
    }

    #[test]
    fn fuse_missing_rate_rejected() {
        use Verdict::*;
        let rates = [0.6, 0.5, 0.4, 0.3];
        assert!(matches!(
            multirate_fuse(&v(&rates, &[Cover, Cover, Cover, Cover]), &grid5()),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn fuse_rule2_ignores_rates_dropped_by_nc2() {
        use Verdict::*;
        let rates = [0.6, 0.5, 0.4, 0.3, 0.2];
        // The NC2 at 0.5 is discarded; the remaining sequence is regular.
        let a = multirate_fuse(&v(&rates, &[Cover, Nc2, Stego, Stego, Nc1]), &grid5()).unwrap();
        let b = multirate_fuse(&v(&rates, &[Cover, Nc2, Stego, Stego, Nc1]), &grid5()).unwrap();
        assert_eq!(a.label, FusionLabel::Stego);
        assert_eq!(a.label, b.label);
    }

    #[test]
    fn stopping_rule_fixture() {
        // Scan rows (N_NC_cover, N_NC_stego) for rates 0.35, 0.30, 0.25, 0.20.
        let rows = [(157, 20), (73, 19), (47, 30), (41, 49)];
        assert_eq!(scan_stopping_index(&rows), Some(3));
        let all_over = [(157, 20), (73, 19)];
        assert_eq!(scan_stopping_index(&all_over), None);
        assert_eq!(scan_stopping_index(&[(10, 10)]), Some(0));
    }

    #[test]
    fn find_message_length_requires_enough_covers() {
        let covers: Vec<GrayImage> = (0..5)
            .map(|s| synth_cover(16, 16, 0.5, SeededRng::new(s)).unwrap())
            .collect();
        let pipeline = PipelineConfig {
            descriptor: FeatureSetDescriptor::light(true),
            train: TrainConfig::new(1),
        };
        let grid = RateGrid::new(vec![0.3, 0.2]).unwrap();
        let err = find_message_length(
            &covers,
            &covers,
            StegoAlgorithm::LsbMatching,
            &grid,
            &pipeline,
            None,
            SeededRng::new(2),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }

    #[test]
    fn pooled_dataset_balances_specs() {
        let covers: Vec<GrayImage> = (0..10)
            .map(|s| synth_cover(16, 16, 0.5, SeededRng::new(s)).unwrap())
            .collect();
        let specs = vec![
            StegoSpec::lsbm(0.1).unwrap(),
            StegoSpec::lsbm(0.2).unwrap(),
            StegoSpec::hill(0.4).unwrap(),
        ];
        let rng = SeededRng::new(77);
        let (stego, assignment) = build_pooled_dataset(&covers, &specs, rng).unwrap();
        assert_eq!(stego.len(), 10);
        assert_eq!(assignment.len(), 10);
        let mut counts = [0usize; 3];
        for a in &assignment {
            let idx = specs.iter().position(|s| s == a).unwrap();
            counts[idx] += 1;
        }
        counts.sort_unstable();
        assert_eq!(counts, [3, 3, 4]);
        // Deterministic in the seed.
        let (_, assignment2) = build_pooled_dataset(&covers, &specs, rng).unwrap();
        assert_eq!(assignment, assignment2);

        let single = build_pooled_dataset(&covers, &specs[..1], rng).unwrap();
        assert!(single.1.iter().all(|s| *s == specs[0]));
        let empty = build_pooled_dataset(&[], &specs, rng).unwrap();
        assert!(empty.0.is_empty());
        assert!(build_pooled_dataset(&covers, &[], rng).is_err());
    }

    #[test]
    fn ats_needs_enough_images() {
        let covers: Vec<GrayImage> = (0..5)
            .map(|s| synth_cover(16, 16, 0.5, SeededRng::new(s)).unwrap())
            .collect();
        let err = ats_unsupervised(
            &covers,
            &StegoSpec::lsbm(0.4).unwrap(),
            &FeatureSetDescriptor::light(true),
            &TrainConfig::new(1),
            SeededRng::new(2),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }

    #[test]
    fn empty_real_world_scan_is_empty() {
        let covers: Vec<GrayImage> = (0..2)
            .map(|s| synth_cover(16, 16, 0.5, SeededRng::new(s)).unwrap())
            .collect();
        let pipeline = PipelineConfig {
            descriptor: FeatureSetDescriptor::light(true),
            train: TrainConfig::new(1),
        };
        let scan = real_world_scan(
            &covers,
            &[],
            StegoAlgorithm::LsbMatching,
            &grid5(),
            &pipeline,
            None,
            SeededRng::new(3),
        )
        .unwrap();
        assert!(scan.outcomes.is_empty());
        assert!(scan.rate_reports.is_empty());
        assert!(scan.summary.is_none());
    }
}
