//! Feature-matrix persistence: CSV with the descriptor hash in the header
//! plus a JSON sidecar carrying the full descriptor.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{FeatureSetDescriptor, FeatureVector};

#[derive(Serialize, Deserialize)]
struct Sidecar {
    format: u32,
    descriptor_hash_hex: String,
    descriptor: FeatureSetDescriptor,
}

fn sidecar_path(csv: &Path) -> PathBuf {
    let mut os = csv.as_os_str().to_owned();
    os.push(".desc.json");
    PathBuf::from(os)
}

/// Write one row per feature vector. The CSV header carries the descriptor
/// hash; the descriptor itself goes to `<path>.desc.json`.
pub fn save_feature_matrix(
    path: &Path,
    descriptor: &FeatureSetDescriptor,
    rows: &[FeatureVector],
) -> Result<()> {
    let hash = descriptor.hash();
    for (i, row) in rows.iter().enumerate() {
        if row.descriptor_hash != hash {
            return Err(Error::DescriptorMismatch {
                expected: hash,
                got: row.descriptor_hash,
            });
        }
        if row.values.len() != descriptor.dimension() {
            return Err(Error::InvalidArgument(format!(
                "row {i} has {} values, descriptor declares {}",
                row.values.len(),
                descriptor.dimension()
            )));
        }
    }
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "descriptor={hash:#018x},dim={}", descriptor.dimension())?;
    for row in rows {
        let mut first = true;
        for v in &row.values {
            if !first {
                write!(w, ",")?;
            }
            write!(w, "{v}")?;
            first = false;
        }
        writeln!(w)?;
    }
    w.flush()?;
    let sidecar = Sidecar {
        format: 1,
        descriptor_hash_hex: format!("{hash:#018x}"),
        descriptor: descriptor.clone(),
    };
    std::fs::write(
        sidecar_path(path),
        serde_json::to_string_pretty(&sidecar).map_err(|e| Error::Parse(e.to_string()))?,
    )?;
    Ok(())
}

/// Read a feature matrix written by [`save_feature_matrix`].
pub fn load_feature_matrix(path: &Path) -> Result<(u64, Vec<FeatureVector>)> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty feature csv".into()))??;
    let hash = parse_header(&header)?;
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let values: std::result::Result<Vec<f64>, _> =
            line.split(',').map(|tok| tok.trim().parse::<f64>()).collect();
        let values =
            values.map_err(|e| Error::Parse(format!("feature csv row {}: {e}", i + 2)))?;
        rows.push(FeatureVector {
            values,
            descriptor_hash: hash,
        });
    }
    if let Some(first) = rows.first() {
        let dim = first.values.len();
        if rows.iter().any(|r| r.values.len() != dim) {
            return Err(Error::Parse("ragged feature csv".into()));
        }
    }
    Ok((hash, rows))
}

fn parse_header(header: &str) -> Result<u64> {
    let field = header
        .split(',')
        .find_map(|f| f.trim().strip_prefix("descriptor="))
        .ok_or_else(|| Error::Parse(format!("bad feature csv header: {header:?}")))?;
    let hex = field.trim_start_matches("0x");
    u64::from_str_radix(hex, 16).map_err(|e| Error::Parse(format!("bad descriptor hash: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{extract, SubmodelKind};
    use crate::imaging::synth_cover;
    use crate::rng::SeededRng;

    #[test]
    fn roundtrip_with_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("features.csv");
        let desc = FeatureSetDescriptor::uniform(&[SubmodelKind::MinMax], 4, true).unwrap();
        let rows: Vec<FeatureVector> = (0..3)
            .map(|i| {
                let img = synth_cover(24, 24, 0.5, SeededRng::new(i)).unwrap();
                extract(&img, &desc).unwrap()
            })
            .collect();
        save_feature_matrix(&path, &desc, &rows).unwrap();
        let (hash, loaded) = load_feature_matrix(&path).unwrap();
        assert_eq!(hash, desc.hash());
        assert_eq!(loaded.len(), 3);
        for (a, b) in rows.iter().zip(loaded.iter()) {
            assert_eq!(a.values, b.values);
        }
        let sidecar = std::fs::read_to_string(sidecar_path(&path)).unwrap();
        let sc: Sidecar = serde_json::from_str(&sidecar).unwrap();
        assert_eq!(sc.descriptor, desc);
        assert_eq!(sc.format, 1);
    }

    #[test]
    fn empty_matrix_keeps_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        let desc = FeatureSetDescriptor::uniform(&[SubmodelKind::MinMax], 4, true).unwrap();
        save_feature_matrix(&path, &desc, &[]).unwrap();
        let (hash, rows) = load_feature_matrix(&path).unwrap();
        assert_eq!(hash, desc.hash());
        assert!(rows.is_empty());
    }

    #[test]
    fn mismatched_rows_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let desc = FeatureSetDescriptor::uniform(&[SubmodelKind::MinMax], 4, true).unwrap();
        let bad = FeatureVector {
            values: vec![0.0; 18],
            descriptor_hash: 1,
        };
        let err = save_feature_matrix(&dir.path().join("x.csv"), &desc, &[bad]).unwrap_err();
        assert!(matches!(err, Error::DescriptorMismatch { .. }));
    }
}
