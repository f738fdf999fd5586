//! Experiment configuration file shared by the `dci`, `find-bitrate` and
//! `real-world` commands.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use stegdci::classifier::{ThresholdMode, TrainConfig};
use stegdci::embed::StegoAlgorithm;
use stegdci::error::{Error, Result};
use stegdci::features::FeatureSetDescriptor;
use stegdci::protocols::{PipelineConfig, RateGrid};

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum FeatureSetChoice {
    Preset(String),
    Full(FeatureSetDescriptor),
}

#[derive(Debug, Deserialize)]
struct TrainOverrides {
    #[serde(default)]
    n_learners: Option<usize>,
    #[serde(default)]
    subspace_dim: Option<usize>,
    #[serde(default)]
    validation_tuned: Option<bool>,
}

fn default_format() -> u32 {
    1
}

/// On-disk experiment description. Paths are resolved relative to the config
/// file and must exist at load time; the seed is mandatory.
#[derive(Debug, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default = "default_format")]
    pub format: u32,
    pub train_covers: PathBuf,
    pub test: PathBuf,
    pub algo: StegoAlgorithm,
    #[serde(default)]
    pub bpp: Option<f64>,
    #[serde(default)]
    pub grid: Option<Vec<f64>>,
    #[serde(default)]
    feature_set: Option<FeatureSetChoice>,
    #[serde(default)]
    train: Option<TrainOverrides>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| Error::InvalidArgument(format!("bad config {}: {e}", path.display())))?;
        if cfg.format != 1 {
            return Err(Error::InvalidArgument(format!(
                "unsupported config format {}",
                cfg.format
            )));
        }
        let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        let resolve = |p: &PathBuf| -> PathBuf {
            if p.is_absolute() {
                p.clone()
            } else {
                base.join(p)
            }
        };
        cfg.train_covers = resolve(&cfg.train_covers);
        cfg.test = resolve(&cfg.test);
        cfg.out_dir = cfg.out_dir.as_ref().map(|p| resolve(p));
        for p in [&cfg.train_covers, &cfg.test] {
            if !p.exists() {
                return Err(Error::InvalidArgument(format!(
                    "referenced path does not exist: {}",
                    p.display()
                )));
            }
        }
        Ok(cfg)
    }

    pub fn descriptor(&self) -> Result<FeatureSetDescriptor> {
        match &self.feature_set {
            None => Ok(FeatureSetDescriptor::reduced_rich(true)),
            Some(FeatureSetChoice::Preset(name)) => match name.as_str() {
                "light" => Ok(FeatureSetDescriptor::light(true)),
                "reduced-rich" | "rich" => Ok(FeatureSetDescriptor::reduced_rich(true)),
                other => Err(Error::InvalidArgument(format!(
                    "unknown feature set preset {other:?}"
                ))),
            },
            Some(FeatureSetChoice::Full(desc)) => {
                FeatureSetDescriptor::new(desc.submodels.clone(), desc.normalize)
            }
        }
    }

    pub fn pipeline(&self) -> Result<PipelineConfig> {
        let mut train = TrainConfig::new(self.seed);
        if let Some(t) = &self.train {
            if let Some(n) = t.n_learners {
                train.n_learners = n;
            }
            if let Some(d) = t.subspace_dim {
                train.subspace_dim = Some(d);
            }
            if t.validation_tuned == Some(true) {
                train.threshold_mode = ThresholdMode::ValidationTuned;
            }
        }
        Ok(PipelineConfig {
            descriptor: self.descriptor()?,
            train,
        })
    }

    pub fn rate_grid(&self) -> Result<RateGrid> {
        match &self.grid {
            Some(rates) => RateGrid::new(rates.clone()),
            None => Err(Error::InvalidArgument(
                "this command needs a `grid` in the config".into(),
            )),
        }
    }

    pub fn single_rate(&self) -> Result<f64> {
        match self.bpp {
            Some(b) => Ok(b),
            None => Err(Error::InvalidArgument(
                "this command needs a `bpp` in the config".into(),
            )),
        }
    }

    pub fn out_dir(&self, cli_override: Option<&Path>) -> Result<PathBuf> {
        let dir = cli_override
            .map(|p| p.to_path_buf())
            .or_else(|| self.out_dir.clone())
            .ok_or_else(|| {
                Error::InvalidArgument("no output directory (config out_dir or --out)".into())
            })?;
        std::fs::create_dir_all(&dir)?;
        Ok(dir)
    }
}
