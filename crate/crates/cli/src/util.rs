//! Input loading and small format helpers shared by the subcommands.

use std::path::{Path, PathBuf};

use stegdci::error::{Error, Result};
use stegdci::features::{FeatureSetDescriptor, ResidualHistogram};
use stegdci::imaging::{read_pgm, DatasetManifest, GrayImage, Label};

/// A loaded image set with whatever ground truth the source carried.
pub struct ImageSet {
    pub images: Vec<GrayImage>,
    pub paths: Vec<PathBuf>,
    /// Present only when every entry carries a label.
    pub labels: Option<Vec<Label>>,
    /// Per-image true payload when recorded in a manifest.
    pub rates: Vec<Option<f64>>,
}

/// Load images from a directory of PGMs (sorted by filename) or from a JSON
/// manifest (paths resolved relative to the manifest).
pub fn load_image_set(path: &Path) -> Result<ImageSet> {
    if path.extension().is_some_and(|e| e == "json") {
        let manifest = DatasetManifest::load(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut images = Vec::with_capacity(manifest.len());
        let mut paths = Vec::with_capacity(manifest.len());
        let mut labels = Vec::new();
        let mut rates = Vec::with_capacity(manifest.len());
        for entry in &manifest.entries {
            let full = if entry.path.is_absolute() {
                entry.path.clone()
            } else {
                base.join(&entry.path)
            };
            images.push(read_pgm(&full)?);
            paths.push(full);
            if let Some(l) = entry.label {
                labels.push(l);
            }
            rates.push(entry.bpp);
        }
        let labels = (labels.len() == images.len()).then_some(labels);
        Ok(ImageSet {
            images,
            paths,
            labels,
            rates,
        })
    } else {
        if !path.is_dir() {
            return Err(Error::InvalidArgument(format!(
                "{} is neither a directory nor a .json manifest",
                path.display()
            )));
        }
        let mut paths: Vec<PathBuf> = std::fs::read_dir(path)?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|e| e == "pgm"))
            .collect();
        paths.sort();
        let mut images = Vec::with_capacity(paths.len());
        for p in &paths {
            images.push(read_pgm(p)?);
        }
        let n = images.len();
        Ok(ImageSet {
            images,
            paths,
            labels: None,
            rates: vec![None; n],
        })
    }
}

/// Resolve a descriptor argument: a preset name or a path to a descriptor
/// JSON file. Malformed descriptors are configuration errors.
pub fn resolve_descriptor(arg: &str) -> Result<FeatureSetDescriptor> {
    match arg {
        "light" => Ok(FeatureSetDescriptor::light(true)),
        "reduced-rich" | "rich" => Ok(FeatureSetDescriptor::reduced_rich(true)),
        path => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Error::InvalidArgument(format!("cannot read descriptor {path}: {e}"))
            })?;
            let desc: FeatureSetDescriptor = serde_json::from_str(&text)
                .map_err(|e| Error::InvalidArgument(format!("malformed descriptor {path}: {e}")))?;
            // Re-validate through the constructor.
            FeatureSetDescriptor::new(desc.submodels, desc.normalize)
        }
    }
}

/// Parse a histogram CSV of `k,count` lines (header optional).
pub fn read_histogram_csv(path: &Path) -> Result<ResidualHistogram> {
    let text = std::fs::read_to_string(path)?;
    let mut entries: Vec<(i32, u64)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let k = parts.next().unwrap_or("").trim();
        let c = parts.next().unwrap_or("").trim();
        match (k.parse::<i32>(), c.parse::<u64>()) {
            (Ok(k), Ok(c)) => entries.push((k, c)),
            _ if lineno == 0 => continue, // header
            _ => {
                return Err(Error::Parse(format!(
                    "{}:{}: expected `k,count`",
                    path.display(),
                    lineno + 1
                )))
            }
        }
    }
    if entries.is_empty() {
        return Err(Error::Parse(format!(
            "{}: no histogram bins",
            path.display()
        )));
    }
    entries.sort_by_key(|e| e.0);
    let min_bin = entries[0].0;
    let max_bin = entries[entries.len() - 1].0;
    let mut counts = vec![0u64; (max_bin - min_bin + 1) as usize];
    for (k, c) in entries {
        counts[(k - min_bin) as usize] += c;
    }
    Ok(ResidualHistogram::from_counts(min_bin, counts))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(path, text)?;
    Ok(())
}
