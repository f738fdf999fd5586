//! Command-line interface for the stegdci workbench.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 data error,
//! 4 numerical failure.

mod config;
mod util;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use stegdci::classifier::{self, EnsembleModel, ThresholdMode, TrainConfig};
use stegdci::embed::{embed_set, StegoAlgorithm, StegoSpec};
use stegdci::error::Error;
use stegdci::features::{extract_batch, save_feature_matrix};
use stegdci::imaging::{write_pgm, Label};
use stegdci::protocols::{
    self, ats_unsupervised, find_message_length, real_world_scan, scan_table_csv, TestTruth,
};
use stegdci::rng::SeededRng;
use stegdci::theory::{
    self, expected_step_approx, expected_step_exact, fit_cauchy, predict_sign_first,
    predict_sign_second, ExpectedHistogram, Sign,
};

use config::ExperimentConfig;
use util::{load_image_set, read_histogram_csv, resolve_descriptor, write_text};

#[derive(Parser)]
#[command(
    name = "stegdci",
    version,
    about = "Steganalysis workbench: embedding simulators, residual features, \
             classifier-inconsistency detection and its supporting theory"
)]
struct Cli {
    /// Worker threads for per-image fan-out (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate embedding into every PGM of a directory.
    Embed(EmbedArgs),
    /// Extract feature vectors from a directory of PGMs into a CSV.
    Features(FeaturesArgs),
    /// Train an ensemble classifier from a feature CSV and a labeled manifest.
    Train(TrainArgs),
    /// Classify feature rows with a trained model.
    Predict(PredictArgs),
    /// Detect classifier inconsistencies and estimate the classification error.
    Dci(ConfigArgs),
    /// Search the payload grid for the true embedding bit rate.
    FindBitrate(ConfigArgs),
    /// Mixed-payload scan: run the DCI at every grid rate and fuse verdicts.
    RealWorld(ConfigArgs),
    /// Unsupervised detection via artificial training sets.
    Ats(AtsArgs),
    /// Numerical theory tools.
    #[command(subcommand)]
    Theory(TheoryCommand),
}

#[derive(Args)]
struct EmbedArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long = "out")]
    output: PathBuf,
    #[arg(long)]
    algo: AlgoArg,
    #[arg(long)]
    bpp: f64,
    #[arg(long)]
    seed: u64,
}

#[derive(Args)]
struct FeaturesArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Descriptor: `light`, `reduced-rich`, or a path to a descriptor JSON.
    #[arg(long)]
    desc: String,
    #[arg(long = "out")]
    output: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    /// Feature CSV written by `features`.
    #[arg(long)]
    features: PathBuf,
    /// Manifest whose labeled entries align with the CSV rows.
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long = "out")]
    output: PathBuf,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 51)]
    learners: usize,
    #[arg(long)]
    subspace: Option<usize>,
    /// Tune the vote threshold on a held-out split.
    #[arg(long)]
    tuned: bool,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    model: PathBuf,
    #[arg(long = "out")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ConfigArgs {
    /// Experiment config JSON (paths, algo, bpp or grid, seed).
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config's `out_dir`).
    #[arg(long = "out")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct AtsArgs {
    /// Test images: directory of PGMs or a manifest JSON.
    #[arg(long)]
    test: PathBuf,
    #[arg(long)]
    algo: AlgoArg,
    #[arg(long)]
    bpp: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value = "light")]
    desc: String,
    #[arg(long = "out")]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum TheoryCommand {
    /// Apply the expected-histogram operators to a histogram CSV.
    Expected(TheoryExpectedArgs),
    /// Predict per-bin variation signs for one and two embeddings.
    Signs(TheorySignsArgs),
    /// Fit a Cauchy scale to a histogram CSV.
    Cauchy(TheoryHistArgs),
    /// Average true histogram variations over repeated embeddings.
    Montecarlo(TheoryMonteCarloArgs),
    /// Scan a feature set for hard directionality over an image set.
    Directionality(TheoryDirectionalityArgs),
    /// Classify with directionality-based feature zeroing.
    Ablation(TheoryAblationArgs),
}

#[derive(Args)]
struct TheoryExpectedArgs {
    #[arg(long)]
    hist: PathBuf,
    #[arg(long)]
    alpha: f64,
    #[arg(long = "out")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct TheorySignsArgs {
    #[arg(long)]
    hist: PathBuf,
    /// Selection rate for the second-order assumption check.
    #[arg(long, default_value_t = 0.25)]
    alpha: f64,
}

#[derive(Args)]
struct TheoryHistArgs {
    #[arg(long)]
    hist: PathBuf,
}

#[derive(Args)]
struct TheoryMonteCarloArgs {
    #[arg(long)]
    image: PathBuf,
    #[arg(long)]
    algo: AlgoArg,
    #[arg(long)]
    bpp: f64,
    #[arg(long, default_value_t = 1000)]
    reps: u32,
    #[arg(long)]
    seed: u64,
    #[arg(long = "out")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct TheoryDirectionalityArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    algo: AlgoArg,
    #[arg(long)]
    bpp: f64,
    #[arg(long)]
    seed: u64,
    /// Descriptor preset for the scan (raw counts are used regardless).
    #[arg(long, default_value = "reduced-rich")]
    desc: String,
    #[arg(long = "out")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct TheoryAblationArgs {
    /// Cover images; stego pairs and the train/test split are built here.
    #[arg(long)]
    covers: PathBuf,
    #[arg(long)]
    algo: AlgoArg,
    #[arg(long)]
    bpp: f64,
    #[arg(long)]
    mode: AblationArg,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value = "light")]
    desc: String,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum AlgoArg {
    Lsbm,
    Hill,
}

impl From<AlgoArg> for StegoAlgorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Lsbm => StegoAlgorithm::LsbMatching,
            AlgoArg::Hill => StegoAlgorithm::HillAdaptive,
        }
    }
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum AblationArg {
    Ndfo,
    Dfo,
    Rrf,
    HalfDfr,
}

impl From<AblationArg> for theory::AblationMode {
    fn from(a: AblationArg) -> Self {
        match a {
            AblationArg::Ndfo => theory::AblationMode::NonDirectionalOnly,
            AblationArg::Dfo => theory::AblationMode::DirectionalOnly,
            AblationArg::Rrf => theory::AblationMode::RandomMatched,
            AblationArg::HalfDfr => theory::AblationMode::HalfDirectionalRemoved,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        // Per-image work is keyed by index, so the thread count never
        // changes results.
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            eprintln!("error: cannot configure {jobs} worker threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::InvalidArgument(_) => 2,
                Error::Io(_)
                | Error::Parse(_)
                | Error::UnsupportedFormat(_)
                | Error::DescriptorMismatch { .. }
                | Error::UnsupportedVersion { .. } => 3,
                Error::Numerical(_) | Error::AssumptionViolated(_) => 4,
            };
            ExitCode::from(code)
        }
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Embed(args) => cmd_embed(args),
        Command::Features(args) => cmd_features(args),
        Command::Train(args) => cmd_train(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Dci(args) => cmd_dci(args),
        Command::FindBitrate(args) => cmd_find_bitrate(args),
        Command::RealWorld(args) => cmd_real_world(args),
        Command::Ats(args) => cmd_ats(args),
        Command::Theory(cmd) => match cmd {
            TheoryCommand::Expected(args) => cmd_theory_expected(args),
            TheoryCommand::Signs(args) => cmd_theory_signs(args),
            TheoryCommand::Cauchy(args) => cmd_theory_cauchy(args),
            TheoryCommand::Montecarlo(args) => cmd_theory_montecarlo(args),
            TheoryCommand::Directionality(args) => cmd_theory_directionality(args),
            TheoryCommand::Ablation(args) => cmd_theory_ablation(args),
        },
    }
}

fn cmd_embed(args: EmbedArgs) -> Result<(), Error> {
    let spec = StegoSpec::new(args.algo.into(), args.bpp)?;
    let set = load_image_set(&args.input)?;
    std::fs::create_dir_all(&args.output)?;
    let rng = SeededRng::new(args.seed);
    let stego = embed_set(&set.images, &spec, rng)?;
    let mut records = Vec::with_capacity(stego.len());
    for (i, (img, src)) in stego.iter().zip(set.paths.iter()).enumerate() {
        let name = src
            .file_name()
            .ok_or_else(|| Error::InvalidArgument(format!("bad path {}", src.display())))?;
        let out_path = args.output.join(name);
        write_pgm(img, &out_path)?;
        records.push(serde_json::json!({
            "source": src,
            "output": out_path,
            "stream": rng.derive("embed_set", i as u64).stream,
        }));
    }
    let sidecar = serde_json::json!({
        "format": 1,
        "algo": spec.algorithm,
        "bpp": spec.payload_bpp,
        "seed": args.seed,
        "images": records,
    });
    write_text(
        &args.output.join("embed.json"),
        &serde_json::to_string_pretty(&sidecar).expect("json"),
    )?;
    println!(
        "embedded {} images ({} {:.3} bpp, seed {})",
        stego.len(),
        spec.algorithm,
        spec.payload_bpp,
        args.seed
    );
    Ok(())
}

fn cmd_features(args: FeaturesArgs) -> Result<(), Error> {
    let descriptor = resolve_descriptor(&args.desc)?;
    let set = load_image_set(&args.input)?;
    let rows = extract_batch(&set.images, &descriptor)?;
    save_feature_matrix(&args.output, &descriptor, &rows)?;
    println!(
        "wrote {} rows x {} features (descriptor {:#018x})",
        rows.len(),
        descriptor.dimension(),
        descriptor.hash()
    );
    Ok(())
}

fn cmd_train(args: TrainArgs) -> Result<(), Error> {
    let (_, rows) = stegdci::features::load_feature_matrix(&args.features)?;
    let manifest = stegdci::imaging::DatasetManifest::load(&args.manifest)?;
    if manifest.len() != rows.len() {
        return Err(Error::InvalidArgument(format!(
            "manifest has {} entries but feature csv has {} rows",
            manifest.len(),
            rows.len()
        )));
    }
    let labels: Vec<u8> = manifest
        .entries
        .iter()
        .map(|e| match e.label {
            Some(Label::Cover) => Ok(0u8),
            Some(Label::Stego) => Ok(1u8),
            None => Err(Error::InvalidArgument(format!(
                "unlabeled manifest entry {}",
                e.path.display()
            ))),
        })
        .collect::<Result<_, _>>()?;
    let config = TrainConfig {
        n_learners: args.learners,
        subspace_dim: args.subspace,
        seed: args.seed,
        threshold_mode: if args.tuned {
            ThresholdMode::ValidationTuned
        } else {
            ThresholdMode::MajorityVote
        },
    };
    let model = classifier::train(&rows, &labels, &config)?;
    model.save(&args.output)?;
    println!(
        "trained {} learners on {} rows, vote threshold {}",
        model.n_learners(),
        rows.len(),
        model.vote_threshold()
    );
    Ok(())
}

fn cmd_predict(args: PredictArgs) -> Result<(), Error> {
    let (_, rows) = stegdci::features::load_feature_matrix(&args.features)?;
    let model = EnsembleModel::load(&args.model)?;
    let mut csv = String::from("index,label,votes\n");
    let mut stego = 0usize;
    for (i, row) in rows.iter().enumerate() {
        let (label, votes) = classifier::predict(&model, row)?;
        stego += label as usize;
        csv.push_str(&format!("{i},{label},{votes}\n"));
    }
    if let Some(out) = &args.output {
        write_text(out, &csv)?;
    } else {
        print!("{csv}");
    }
    println!(
        "classified {} rows: {} stego, {} cover",
        rows.len(),
        stego,
        rows.len() - stego
    );
    Ok(())
}

fn cmd_dci(args: ConfigArgs) -> Result<(), Error> {
    let cfg = ExperimentConfig::load(&args.config)?;
    let spec = StegoSpec::new(cfg.algo, cfg.single_rate()?)?;
    let pipeline = cfg.pipeline()?;
    let covers = load_image_set(&cfg.train_covers)?;
    let test = load_image_set(&cfg.test)?;
    let out = cfg.out_dir(args.output.as_deref())?;
    let report = protocols::run_dci(
        &covers.images,
        &test.images,
        &spec,
        &pipeline,
        test.labels.as_deref(),
        SeededRng::new(cfg.seed),
    )?;
    write_text(
        &out.join("report.json"),
        &serde_json::to_string_pretty(&report).expect("json"),
    )?;
    write_text(&out.join("verdicts.csv"), &report.verdict_csv())?;
    println!("{}", report.summary_line());
    Ok(())
}

fn cmd_find_bitrate(args: ConfigArgs) -> Result<(), Error> {
    let cfg = ExperimentConfig::load(&args.config)?;
    let grid = cfg.rate_grid()?;
    let pipeline = cfg.pipeline()?;
    let covers = load_image_set(&cfg.train_covers)?;
    let test = load_image_set(&cfg.test)?;
    let out = cfg.out_dir(args.output.as_deref())?;
    let search = find_message_length(
        &covers.images,
        &test.images,
        cfg.algo,
        &grid,
        &pipeline,
        test.labels.as_deref(),
        SeededRng::new(cfg.seed),
    )?;
    write_text(&out.join("scan.csv"), &scan_table_csv(&search.scan))?;
    write_text(
        &out.join("result.json"),
        &serde_json::to_string_pretty(&serde_json::json!({
            "format": 1,
            "rate": search.rate,
            "exhausted": search.exhausted,
        }))
        .expect("json"),
    )?;
    println!("rate,N_NC_cover,N_NC_stego,err_hat_0.5");
    for row in &search.scan {
        println!(
            "{:.2},{},{},{:.3}",
            row.rate, row.report.n_nc_cover, row.report.n_nc_stego, row.report.err_hat_half
        );
    }
    println!(
        "selected rate: {:.2}{}",
        search.rate,
        if search.exhausted { " (grid exhausted)" } else { "" }
    );
    Ok(())
}

fn cmd_real_world(args: ConfigArgs) -> Result<(), Error> {
    let cfg = ExperimentConfig::load(&args.config)?;
    let grid = cfg.rate_grid()?;
    let pipeline = cfg.pipeline()?;
    let covers = load_image_set(&cfg.train_covers)?;
    let test = load_image_set(&cfg.test)?;
    let out = cfg.out_dir(args.output.as_deref())?;
    let truth: Option<Vec<TestTruth>> = test.labels.as_ref().map(|labels| {
        labels
            .iter()
            .zip(test.rates.iter())
            .map(|(&label, &bpp)| TestTruth { label, bpp })
            .collect()
    });
    let scan = real_world_scan(
        &covers.images,
        &test.images,
        cfg.algo,
        &grid,
        &pipeline,
        truth.as_deref(),
        SeededRng::new(cfg.seed),
    )?;
    let mut outcomes = String::from("index,fused");
    for rate in grid.rates() {
        outcomes.push_str(&format!(",verdict@{rate:.2}"));
    }
    outcomes.push('\n');
    for (i, o) in scan.outcomes.iter().enumerate() {
        outcomes.push_str(&format!("{i},{}", o.label));
        for (_, v) in &o.per_rate {
            outcomes.push_str(&format!(",{v}"));
        }
        outcomes.push('\n');
    }
    write_text(&out.join("outcomes.csv"), &outcomes)?;
    write_text(&out.join("rates.csv"), &scan_table_csv(&scan.rate_reports))?;
    write_text(
        &out.join("summary.json"),
        &serde_json::to_string_pretty(&serde_json::json!({
            "format": 1,
            "summary": scan.summary,
        }))
        .expect("json"),
    )?;
    match &scan.summary {
        Some(s) => println!(
            "classified {}/{} ({:.1}%), accuracy {:.3} (standard {:.3})",
            s.n_classified,
            s.n,
            100.0 * s.classified_fraction,
            s.accuracy_on_classified,
            s.standard_accuracy_on_classified
        ),
        None => println!("classified outcomes written (no ground truth supplied)"),
    }
    Ok(())
}

fn cmd_ats(args: AtsArgs) -> Result<(), Error> {
    let spec = StegoSpec::new(args.algo.into(), args.bpp)?;
    let descriptor = resolve_descriptor(&args.desc)?;
    let test = load_image_set(&args.test)?;
    let config = TrainConfig::new(args.seed);
    let labels = ats_unsupervised(
        &test.images,
        &spec,
        &descriptor,
        &config,
        SeededRng::new(args.seed),
    )?;
    let mut csv = String::from("index,label\n");
    for (i, l) in labels.iter().enumerate() {
        csv.push_str(&format!("{i},{l}\n"));
    }
    if let Some(out) = &args.output {
        write_text(out, &csv)?;
    }
    let stego = labels.iter().filter(|&&l| l == 1).count();
    print!(
        "labeled {} images: {} stego, {} cover",
        labels.len(),
        stego,
        labels.len() - stego
    );
    if let Some(truth) = &test.labels {
        let correct = labels
            .iter()
            .zip(truth.iter())
            .filter(|&(&l, &t)| (l == 1) == (t == Label::Stego))
            .count();
        print!(", accuracy {:.3}", correct as f64 / labels.len() as f64);
    }
    println!();
    Ok(())
}

fn cmd_theory_expected(args: TheoryExpectedArgs) -> Result<(), Error> {
    let h = read_histogram_csv(&args.hist)?;
    let eh = ExpectedHistogram::from_counts(&h);
    let approx = expected_step_approx(&eh, args.alpha)?;
    let exact = expected_step_exact(&eh, args.alpha)?;
    let mut csv = String::from("k,approx,exact\n");
    for k in exact.min_bin()..=exact.max_bin() {
        csv.push_str(&format!("{k},{},{}\n", approx.bin(k), exact.bin(k)));
    }
    match &args.output {
        Some(out) => write_text(out, &csv)?,
        None => print!("{csv}"),
    }
    println!(
        "mass {} -> approx {:.6}, exact {:.6}",
        eh.total(),
        approx.total(),
        exact.total()
    );
    Ok(())
}

fn cmd_theory_signs(args: TheorySignsArgs) -> Result<(), Error> {
    let h = read_histogram_csv(&args.hist)?;
    let glyph = |s: Sign| match s {
        Sign::Negative => '-',
        Sign::Positive => '+',
        Sign::Indeterminate => '0',
    };
    println!("k,first,second");
    for k in h.min_bin() + 2..=h.max_bin() - 2 {
        let first = predict_sign_first(&h, k);
        let second = predict_sign_second(&h, k, args.alpha)?;
        println!("{k},{},{}", glyph(first), glyph(second));
    }
    Ok(())
}

fn cmd_theory_cauchy(args: TheoryHistArgs) -> Result<(), Error> {
    let h = read_histogram_csv(&args.hist)?;
    let fit = fit_cauchy(&h)?;
    println!(
        "gamma={:.4} loglik={:.2} concave_for=|s|<{:.4}",
        fit.gamma,
        fit.loglik,
        fit.concavity_bound()
    );
    Ok(())
}

fn cmd_theory_montecarlo(args: TheoryMonteCarloArgs) -> Result<(), Error> {
    let image = stegdci::imaging::read_pgm(&args.image)?;
    let spec = StegoSpec::new(args.algo.into(), args.bpp)?;
    let mc = theory::monte_carlo_deltas(&image, &spec, args.reps, SeededRng::new(args.seed))?;
    // Model series from the cover histogram, for side-by-side comparison.
    let h = stegdci::features::residual_histogram(
        &stegdci::features::residual(&image, stegdci::features::Predictor::Horizontal)?,
        None,
    );
    let eh = ExpectedHistogram::from_counts(&h);
    let e1 = expected_step_approx(&eh, spec.payload_bpp)?;
    let e2 = expected_step_approx(&e1, spec.payload_bpp)?;
    let mut csv = String::from("k,mean_d1,stderr_d1,mean_d2,stderr_d2,model_d1,model_d2\n");
    for k in -25i32..=25 {
        let Some(i) = mc.bin_index(k) else { continue };
        csv.push_str(&format!(
            "{k},{},{},{},{},{},{}\n",
            mc.mean_delta1[i],
            mc.stderr_delta1[i],
            mc.mean_delta2[i],
            mc.stderr_delta2[i],
            e1.bin(k) - eh.bin(k),
            e2.bin(k) - e1.bin(k),
        ));
    }
    match &args.output {
        Some(out) => write_text(out, &csv)?,
        None => print!("{csv}"),
    }
    println!("averaged {} repetitions", mc.repetitions);
    Ok(())
}

fn cmd_theory_directionality(args: TheoryDirectionalityArgs) -> Result<(), Error> {
    let set = load_image_set(&args.input)?;
    let spec = StegoSpec::new(args.algo.into(), args.bpp)?;
    // Raw counts: the scan looks at signed count drift, not frequencies.
    let mut descriptor = resolve_descriptor(&args.desc)?;
    descriptor.normalize = false;
    let report =
        theory::directionality_scan(&set.images, &spec, &descriptor, SeededRng::new(args.seed))?;
    if let Some(out) = &args.output {
        write_text(out, &serde_json::to_string_pretty(&report).expect("json"))?;
    }
    let over_half = report.features_directional_above(0.5);
    let over_70 = report.features_directional_above(0.7);
    println!(
        "{} features over {} images: {} ({:.1}%) directional for >50% of images, \
         {} ({:.1}%) for >70%; mean {:.3}",
        report.n_features,
        report.n_images,
        over_half,
        100.0 * over_half as f64 / report.n_features as f64,
        over_70,
        100.0 * over_70 as f64 / report.n_features as f64,
        report.mean_per_feature_directionality()
    );
    Ok(())
}

fn cmd_theory_ablation(args: TheoryAblationArgs) -> Result<(), Error> {
    let set = load_image_set(&args.covers)?;
    if set.images.len() < 25 {
        return Err(Error::InvalidArgument(format!(
            "ablation needs at least 25 covers, got {}",
            set.images.len()
        )));
    }
    let spec = StegoSpec::new(args.algo.into(), args.bpp)?;
    let mut descriptor = resolve_descriptor(&args.desc)?;
    descriptor.normalize = false;
    let rng = SeededRng::new(args.seed);
    let mode: theory::AblationMode = args.mode.into();

    // Pair every cover with a stego copy, split 80/20 into train and test,
    // and scan directionality over all images.
    let stego = embed_set(&set.images, &spec, rng.derive("ablation.stego", 0))?;
    let mut images = set.images.clone();
    images.extend(stego);
    let labels: Vec<u8> = (0..images.len())
        .map(|i| u8::from(i >= set.images.len()))
        .collect();
    let report =
        theory::directionality_scan(&images, &spec, &descriptor, rng.derive("ablation.dir", 0))?;
    let rows = extract_batch(&images, &descriptor)?;
    let n_test_covers = set.images.len() / 5;
    let is_test = |i: usize| i % set.images.len() < n_test_covers;
    let pick = |test: bool| {
        let mut r = Vec::new();
        let mut l = Vec::new();
        let mut f = Vec::new();
        for i in 0..images.len() {
            if is_test(i) == test {
                r.push(rows[i].clone());
                l.push(labels[i]);
                f.push(report.flags[i].clone());
            }
        }
        (r, l, f)
    };
    let (train_rows, train_labels, train_flags) = pick(false);
    let (test_rows, test_labels, test_flags) = pick(true);
    let outcome = theory::ablation_classify(
        &train_rows,
        &train_labels,
        &test_rows,
        &test_labels,
        mode,
        &train_flags,
        &test_flags,
        &TrainConfig::new(rng.scalar_seed("ablation.train")),
        rng.derive("ablation.zero", 0),
    )?;
    println!(
        "mode={} test_error={:.4} over {} images",
        outcome.mode, outcome.error, outcome.n_test
    );
    Ok(())
}
