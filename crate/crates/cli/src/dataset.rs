//! CSV dataset ingestion: label-first rows, remaining columns min-max
//! scaled into `[0, 1]` per column, with the scaling parameters recorded in
//! a JSON sidecar next to the file.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;

use pathprox::model::Batch;
use pathprox::DenseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub features: DenseMatrix,
    pub labels: Vec<usize>,
    pub split: Split,
}

impl Dataset {
    pub fn to_batch(&self) -> Batch {
        Batch::new(self.features.clone(), self.labels.clone()).expect("consistent by construction")
    }
}

#[derive(Serialize)]
struct ScaleSidecar<'a> {
    min: &'a [f64],
    max: &'a [f64],
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".scale.json");
    path.with_file_name(name)
}

/// Loads a label-first CSV file. Every feature column is min-max scaled
/// into `[0, 1]` (constant columns collapse to zero) and the per-column
/// min/max are written to `<path>.scale.json`. Parse failures name the
/// offending 1-based line.
pub fn load_csv(path: &Path, split: Split) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read dataset {}", path.display()))?;
    let mut labels = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut cols = None;
    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let label_field = fields.next().expect("split yields at least one field");
        let label: i64 = label_field
            .trim()
            .parse()
            .with_context(|| format!("{}:{lineno}: bad label {label_field:?}", path.display()))?;
        if label < 0 {
            bail!("{}:{lineno}: negative label {label}", path.display());
        }
        let mut row = Vec::new();
        for field in fields {
            let value: f64 = field.trim().parse().with_context(|| {
                format!("{}:{lineno}: bad feature {field:?}", path.display())
            })?;
            if value.is_nan() {
                bail!("{}:{lineno}: NaN feature", path.display());
            }
            row.push(value);
        }
        match cols {
            None => cols = Some(row.len()),
            Some(c) if c != row.len() => {
                bail!(
                    "{}:{lineno}: expected {c} feature columns, found {}",
                    path.display(),
                    row.len()
                )
            }
            _ => {}
        }
        labels.push(label as usize);
        rows.push(row);
    }
    if rows.is_empty() {
        bail!("{}: empty dataset file", path.display());
    }

    let cols = cols.unwrap_or(0);
    let mut min = vec![f64::INFINITY; cols];
    let mut max = vec![f64::NEG_INFINITY; cols];
    for row in &rows {
        for (j, v) in row.iter().enumerate() {
            min[j] = min[j].min(*v);
            max[j] = max[j].max(*v);
        }
    }
    for row in &mut rows {
        for (j, v) in row.iter_mut().enumerate() {
            *v = if max[j] > min[j] { (*v - min[j]) / (max[j] - min[j]) } else { 0.0 };
        }
    }

    let sidecar = serde_json::to_string(&ScaleSidecar { min: &min, max: &max })?;
    std::fs::write(sidecar_path(path), sidecar)
        .with_context(|| format!("cannot write scaling sidecar for {}", path.display()))?;

    let features = DenseMatrix::from_rows(&rows)?;
    Ok(Dataset { features, labels, split })
}

/// Writes a label-first CSV with round-trip exact float formatting.
pub fn write_csv(path: &Path, features: &DenseMatrix, labels: &[usize]) -> Result<()> {
    let mut out = String::new();
    for (i, label) in labels.iter().enumerate() {
        write!(out, "{label}")?;
        for v in features.row(i) {
            write!(out, ",{v}")?;
        }
        out.push('\n');
    }
    std::fs::write(path, out).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}
