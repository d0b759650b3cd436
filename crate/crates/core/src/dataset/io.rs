use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use super::{Matrix, PartitionedDataset};
use crate::error::{Error, Result};

/// Delimiter and header settings for CSV input.
#[derive(Debug, Clone, Copy)]
pub struct CsvSchema {
    pub delimiter: u8,
    pub has_header: bool,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self {
            delimiter: b',',
            has_header: true,
        }
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Load a CSV file. Without a header, columns are named by zero-based
/// position, so `label_column` is then a number like `"4"`.
///
/// Classes are numbered in order of first appearance.
pub fn load_csv(path: &Path, label_column: &str, schema: CsvSchema) -> Result<PartitionedDataset> {
    let text = read_to_string(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter)
        .has_headers(schema.has_header)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let header: Vec<String> = if schema.has_header {
        reader.headers()?.iter().map(str::to_owned).collect()
    } else {
        Vec::new()
    };

    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        records.push(rec);
    }
    if records.is_empty() {
        return Err(Error::NoDataRows);
    }

    let width = records[0].len();
    let names: Vec<String> = if schema.has_header {
        header
    } else {
        (0..width).map(|c| c.to_string()).collect()
    };
    let label_idx = names
        .iter()
        .position(|n| n == label_column)
        .ok_or_else(|| Error::UnknownLabelColumn(label_column.to_owned()))?;

    let d = names.len() - 1;
    let mut data = Vec::with_capacity(records.len() * d);
    let mut labels = Vec::with_capacity(records.len());
    let mut class_names: Vec<String> = Vec::new();
    let mut class_of: HashMap<String, usize> = HashMap::new();

    for (r, rec) in records.iter().enumerate() {
        if rec.len() != names.len() {
            return Err(Error::MalformedLine {
                line: r + 1 + usize::from(schema.has_header),
                reason: format!("expected {} fields, found {}", names.len(), rec.len()),
            });
        }
        for (c, cell) in rec.iter().enumerate() {
            if c == label_idx {
                let next = class_names.len();
                let id = *class_of.entry(cell.to_owned()).or_insert_with(|| {
                    class_names.push(cell.to_owned());
                    next
                });
                labels.push(id);
            } else {
                match cell.parse::<f64>() {
                    Ok(v) if v.is_finite() => data.push(v),
                    _ => {
                        return Err(Error::NonNumericCell {
                            row: r + 1,
                            column: names[c].clone(),
                            value: cell.to_owned(),
                        })
                    }
                }
            }
        }
    }

    let features = Matrix::new(records.len(), d, data)?;
    PartitionedDataset::new(features, labels, class_names)
}

/// Load LIBSVM text (`label idx:val ...`, 1-based ascending indices).
///
/// Unlisted entries are zero; the dimension is the largest index seen.
/// Classes are numbered by ascending numeric label value.
pub fn load_libsvm(path: &Path) -> Result<PartitionedDataset> {
    let text = read_to_string(path)?;
    let mut rows: Vec<(String, Vec<(usize, f64)>)> = Vec::new();
    let mut dim = 0usize;

    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let label = tokens.next().unwrap_or_default();
        if label.parse::<f64>().is_err() {
            return Err(Error::MalformedLine {
                line: line_no,
                reason: format!("bad label {label:?}"),
            });
        }
        let mut entries = Vec::new();
        let mut last = 0usize;
        for tok in tokens {
            let (idx, val) = tok.split_once(':').ok_or_else(|| Error::MalformedLine {
                line: line_no,
                reason: format!("expected idx:val, found {tok:?}"),
            })?;
            let idx: usize = idx.parse().map_err(|_| Error::MalformedLine {
                line: line_no,
                reason: format!("bad index {idx:?}"),
            })?;
            if idx == 0 {
                return Err(Error::MalformedLine {
                    line: line_no,
                    reason: "indices are 1-based".into(),
                });
            }
            let val: f64 = match val.parse() {
                Ok(v) if f64::is_finite(v) => v,
                _ => {
                    return Err(Error::MalformedLine {
                        line: line_no,
                        reason: format!("bad value {val:?}"),
                    })
                }
            };
            if idx <= last {
                return Err(Error::IndicesNotAscending { line: line_no });
            }
            last = idx;
            entries.push((idx - 1, val));
        }
        dim = dim.max(last);
        rows.push((label.to_owned(), entries));
    }
    if rows.is_empty() {
        return Err(Error::NoDataRows);
    }

    let mut distinct: Vec<(f64, String)> = Vec::new();
    for (label, _) in &rows {
        let v: f64 = label.parse().unwrap_or(0.0);
        if !distinct.iter().any(|(u, _)| *u == v) {
            distinct.push((v, label.trim_start_matches('+').to_owned()));
        }
    }
    distinct.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut features = Matrix::zeros(rows.len(), dim);
    let mut labels = Vec::with_capacity(rows.len());
    for (r, (label, entries)) in rows.iter().enumerate() {
        let v: f64 = label.parse().unwrap_or(0.0);
        labels.push(distinct.iter().position(|(u, _)| *u == v).unwrap_or(0));
        for &(c, val) in entries {
            features.set(r, c, val);
        }
    }
    let names = distinct.into_iter().map(|(_, s)| s).collect();
    PartitionedDataset::new(features, labels, names)
}

fn create(path: &Path) -> Result<fs::File> {
    fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Write features `f0..f{d-1}` plus a trailing `label` column holding class names.
pub fn write_csv(ds: &PartitionedDataset, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    let mut header: Vec<String> = (0..ds.dimension()).map(|j| format!("f{j}")).collect();
    header.push("label".into());
    w.write_record(&header)?;
    for i in 0..ds.len() {
        let mut rec: Vec<String> = ds.features().row(i).iter().map(|v| v.to_string()).collect();
        rec.push(ds.class_names()[ds.truth()[i]].clone());
        w.write_record(&rec)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Write LIBSVM text, omitting zero entries. Labels are class indices + 1.
pub fn write_libsvm(ds: &PartitionedDataset, path: &Path) -> Result<()> {
    let mut out = String::new();
    for i in 0..ds.len() {
        out.push_str(&(ds.truth()[i] + 1).to_string());
        for (j, &v) in ds.features().row(i).iter().enumerate() {
            if v != 0.0 {
                out.push_str(&format!(" {}:{}", j + 1, v));
            }
        }
        out.push('\n');
    }
    create(path)?
        .write_all(out.as_bytes())
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn csv_maps_labels_by_first_appearance() {
        let f = temp("x,y,class\n1,2,a\n3,4,b\n5,6,a\n7,8,b\n");
        let ds = load_csv(f.path(), "class", CsvSchema::default()).unwrap();
        assert_eq!((ds.len(), ds.dimension(), ds.class_count()), (4, 2, 2));
        assert_eq!(ds.truth(), &[0, 1, 0, 1]);
        assert_eq!(ds.class_names(), &["a", "b"]);
        assert_eq!(ds.features().row(2), &[5.0, 6.0]);
    }

    #[test]
    fn csv_label_column_can_be_first_and_headerless() {
        let f = temp("b;1.5;2\na;0;1\n");
        let schema = CsvSchema {
            delimiter: b';',
            has_header: false,
        };
        let ds = load_csv(f.path(), "0", schema).unwrap();
        assert_eq!(ds.truth(), &[0, 1]);
        assert_eq!(ds.features().row(0), &[1.5, 2.0]);
    }

    #[test]
    fn csv_empty_file() {
        let f = temp("");
        assert!(matches!(
            load_csv(f.path(), "class", CsvSchema { has_header: false, ..Default::default() }),
            Err(Error::NoDataRows)
        ));
        let f = temp("x,class\n");
        assert!(matches!(
            load_csv(f.path(), "class", CsvSchema::default()),
            Err(Error::NoDataRows)
        ));
    }

    #[test]
    fn csv_nan_cell_is_named() {
        let f = temp("x,y,class\n1,2,a\n3,NaN,b\n");
        let err = load_csv(f.path(), "class", CsvSchema::default()).unwrap_err();
        match err {
            Error::NonNumericCell { row, column, value } => {
                assert_eq!((row, column.as_str(), value.as_str()), (2, "y", "NaN"));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn csv_unknown_label_and_missing_file() {
        let f = temp("x,class\n1,a\n");
        assert!(matches!(
            load_csv(f.path(), "target", CsvSchema::default()),
            Err(Error::UnknownLabelColumn(_))
        ));
        assert!(matches!(
            load_csv(Path::new("/nonexistent/file.csv"), "c", CsvSchema::default()),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn libsvm_zero_fills() {
        let f = temp("2 1:0.5 3:1.0\n1\n");
        let ds = load_libsvm(f.path()).unwrap();
        assert_eq!(ds.dimension(), 3);
        assert_eq!(ds.features().row(0), &[0.5, 0.0, 1.0]);
        assert_eq!(ds.features().row(1), &[0.0, 0.0, 0.0]);
        assert_eq!(ds.class_names()[ds.truth()[0]], "2");
        assert_eq!(ds.class_names()[ds.truth()[1]], "1");
    }

    #[test]
    fn libsvm_featureless_line() {
        let f = temp("1\n");
        let ds = load_libsvm(f.path()).unwrap();
        assert_eq!((ds.len(), ds.dimension()), (1, 0));
        assert_eq!(ds.class_names(), &["1"]);
    }

    #[test]
    fn libsvm_rejects_descending_indices() {
        let f = temp("1 1:1\n1 3:1 2:1\n");
        assert!(matches!(
            load_libsvm(f.path()),
            Err(Error::IndicesNotAscending { line: 2 })
        ));
    }

    #[test]
    fn libsvm_reports_malformed_line() {
        let f = temp("1 1:1\n\n-1 2=4\n");
        assert!(matches!(
            load_libsvm(f.path()),
            Err(Error::MalformedLine { line: 3, .. })
        ));
    }

    #[test]
    fn writers_round_trip() {
        let f = temp("x,y,class\n1,0,a\n0,4.5,b\n");
        let ds = load_csv(f.path(), "class", CsvSchema::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let csv_path = dir.path().join("d.csv");
        write_csv(&ds, &csv_path).unwrap();
        let back = load_csv(&csv_path, "label", CsvSchema::default()).unwrap();
        assert_eq!(back.features(), ds.features());
        assert_eq!(back.truth(), ds.truth());
        let svm_path = dir.path().join("d.svm");
        write_libsvm(&ds, &svm_path).unwrap();
        let back = load_libsvm(&svm_path).unwrap();
        assert_eq!(back.features(), ds.features());
        assert_eq!(back.truth(), ds.truth());
    }
}
