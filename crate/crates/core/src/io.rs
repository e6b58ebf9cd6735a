//! Readers and writers for matrices, vectors and instance files.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instances::GroundTruthInstance;
use crate::linalg::DenseMatrix;
use crate::problem::ProblemInstance;

/// Parses a MatrixMarket `array real general` file (column-major entries).
pub fn read_matrix_market(text: &str) -> Result<DenseMatrix> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty MatrixMarket input".into()))?;
    let fields: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(Error::Parse(format!("bad MatrixMarket header: {header:?}")));
    }
    if fields[2] != "array" || fields[3] != "real" || fields[4] != "general" {
        return Err(Error::Parse(format!(
            "unsupported MatrixMarket variant {} {} {}; only array real general",
            fields[2], fields[3], fields[4]
        )));
    }
    let mut tokens = lines
        .filter(|l| !l.trim_start().starts_with('%'))
        .flat_map(str::split_whitespace);
    let mut dim = |what: &str| -> Result<usize> {
        tokens
            .next()
            .ok_or_else(|| Error::Parse(format!("missing {what}")))?
            .parse()
            .map_err(|e| Error::Parse(format!("{what}: {e}")))
    };
    let (m, n) = (dim("row count")?, dim("column count")?);
    let values = tokens
        .map(parse_f64)
        .collect::<Result<Vec<f64>>>()?;
    if values.len() != m * n {
        return Err(Error::Parse(format!("expected {} entries, found {}", m * n, values.len())));
    }
    Ok(DenseMatrix::from_fn(m, n, |i, j| values[j * m + i]))
}

pub fn write_matrix_market(a: &DenseMatrix) -> String {
    let mut out = String::from("%%MatrixMarket matrix array real general\n");
    let _ = writeln!(out, "{} {}", a.rows(), a.cols());
    for j in 0..a.cols() {
        for i in 0..a.rows() {
            let _ = writeln!(out, "{:?}", a.get(i, j));
        }
    }
    out
}

/// Whitespace-separated numbers; lines starting with `%` or `#` are comments.
pub fn read_vector_text(text: &str) -> Result<Vec<f64>> {
    text.lines()
        .filter(|l| {
            let t = l.trim_start();
            !t.starts_with('%') && !t.starts_with('#')
        })
        .flat_map(|l| l.split(|c: char| c.is_whitespace() || c == ','))
        .filter(|t| !t.is_empty())
        .map(parse_f64)
        .collect()
}

/// A JSON array of numbers.
pub fn read_vector_json(text: &str) -> Result<Vec<f64>> {
    Ok(serde_json::from_str(text)?)
}

fn parse_f64(tok: &str) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| Error::Parse(format!("not a number: {tok:?}")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Parse(format!("non-finite entry {tok:?}")))
    }
}

/// Matrix as nested row arrays or an embedded MatrixMarket string.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixField {
    Rows(Vec<Vec<f64>>),
    MatrixMarket(String),
}

impl MatrixField {
    pub fn to_matrix(&self) -> Result<DenseMatrix> {
        match self {
            MatrixField::Rows(rows) => {
                if rows.is_empty() {
                    return Err(Error::Parse("matrix has no rows".into()));
                }
                DenseMatrix::from_rows(rows)
            }
            MatrixField::MatrixMarket(text) => read_matrix_market(text),
        }
    }
}

/// On-disk instance format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    #[serde(rename = "A")]
    pub a: MatrixField,
    pub b: Vec<f64>,
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_bar: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_bar: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl InstanceFile {
    pub fn from_instance(inst: &ProblemInstance) -> Self {
        Self {
            a: MatrixField::Rows(inst.a.to_rows()),
            b: inst.b.clone(),
            delta: inst.delta,
            x_bar: None,
            y_bar: None,
            seed: None,
        }
    }

    pub fn from_ground_truth(gt: &GroundTruthInstance, seed: Option<u64>) -> Self {
        Self {
            x_bar: Some(gt.x_bar.clone()),
            y_bar: Some(gt.y_bar.clone()),
            seed,
            ..Self::from_instance(&gt.inst)
        }
    }

    pub fn to_instance(&self) -> Result<ProblemInstance> {
        let a = self.a.to_matrix()?;
        if let Some(x) = &self.x_bar {
            if x.len() != a.cols() {
                return Err(Error::Dimension(format!("x_bar has {} entries, A has {} columns", x.len(), a.cols())));
            }
        }
        if let Some(y) = &self.y_bar {
            if y.len() != a.rows() {
                return Err(Error::Dimension(format!("y_bar has {} entries, A has {} rows", y.len(), a.rows())));
            }
        }
        ProblemInstance::new(a, self.b.clone(), self.delta)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub fn read_instance_json(path: &Path) -> Result<InstanceFile> {
    InstanceFile::from_json(&std::fs::read_to_string(path)?)
}

/// MatrixMarket file for `A` plus a text or JSON file for `b`.
pub fn read_instance_split(a_path: &Path, b_path: &Path, delta: f64) -> Result<ProblemInstance> {
    let a = read_matrix_market(&std::fs::read_to_string(a_path)?)?;
    let b_text = std::fs::read_to_string(b_path)?;
    let b = if b_text.trim_start().starts_with('[') {
        read_vector_json(&b_text)?
    } else {
        read_vector_text(&b_text)?
    };
    ProblemInstance::new(a, b, delta)
}
