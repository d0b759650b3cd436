//! Plain-text subset files: a `# dataset <sha256>` header, then one
//! zero-based feature index per line.

use std::fmt::Write as _;
use std::path::Path;

use crate::dataset::{FeatureSubset, PartitionedDataset};
use crate::error::{Error, Result};

const HEADER_PREFIX: &str = "# dataset ";

pub fn format_subset(subset: &FeatureSubset, dataset_hash: &str) -> String {
    let mut out = format!("{HEADER_PREFIX}{dataset_hash}\n");
    for f in subset.indices() {
        let _ = writeln!(out, "{f}");
    }
    out
}

/// Parse a subset file into the dataset hash and the raw indices.
/// Blank lines and further `#` comments are ignored.
pub fn parse_subset(text: &str) -> Result<(String, Vec<usize>)> {
    let mut lines = text.lines().enumerate();
    let hash = match lines.next() {
        Some((_, first)) => first
            .strip_prefix(HEADER_PREFIX)
            .map(|h| h.trim().to_string())
            .filter(|h| !h.is_empty())
            .ok_or_else(|| Error::MalformedLine {
                line: 1,
                reason: format!("expected `{HEADER_PREFIX}<hash>` header"),
            })?,
        None => {
            return Err(Error::MalformedLine {
                line: 1,
                reason: "empty subset file".into(),
            })
        }
    };
    let mut indices = Vec::new();
    for (i, line) in lines {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let v = t.parse::<usize>().map_err(|_| Error::MalformedLine {
            line: i + 1,
            reason: format!("`{t}` is not a feature index"),
        })?;
        indices.push(v);
    }
    Ok((hash, indices))
}

pub fn write_subset(path: &Path, subset: &FeatureSubset, dataset_hash: &str) -> Result<()> {
    std::fs::write(path, format_subset(subset, dataset_hash)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Read a subset file written for `ds`; the header hash must match.
pub fn read_subset(path: &Path, ds: &PartitionedDataset) -> Result<FeatureSubset> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let (hash, indices) = parse_subset(&text)?;
    let actual = ds.content_hash();
    if hash != actual {
        return Err(Error::DatasetMismatch {
            expected: hash,
            actual,
        });
    }
    FeatureSubset::new(indices, ds.dimension())
}
