//! Datasets in LIBSVM text format and seeded synthetic problem generators.

mod libsvm;
mod synthetic;

pub use libsvm::{parse_libsvm, parse_libsvm_str, write_libsvm};
pub use synthetic::{
    gen_classification, gen_diagonal_quadratic, gen_gaussian_ls, seeded_rng, start_point, SyntheticKind,
    SyntheticSpec, LABEL_STREAM, PROBLEM_STREAM, START_STREAM,
};

use std::collections::BTreeSet;

use log::warn;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{CsrMatrix, Design};
use crate::oracle::{LogisticProblem, OracleError, QuadraticProblem};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("labels {0:?} cannot be mapped to {{-1, +1}}")]
    Labels(Vec<f64>),
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Sparse row with strictly increasing 0-based indices.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseRow {
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseRow {
    pub fn nnz(&self) -> usize {
        self.indices.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub rows: Vec<SparseRow>,
    pub labels: Vec<f64>,
    pub n_features: usize,
    /// Where the data came from (file path or generator description).
    pub source: String,
}

impl Dataset {
    pub fn samples(&self) -> usize {
        self.rows.len()
    }

    /// Design matrix; dense when `m·n` is small enough (see [`Design::from_sparse`]).
    pub fn design(&self) -> Design {
        let csr = CsrMatrix::from_rows(
            self.n_features,
            self.rows.iter().map(|r| (r.indices.as_slice(), r.values.as_slice())),
        );
        Design::from_sparse(csr)
    }

    /// `(1/2m)‖Ax − y‖² + (τ/2)‖x‖²` with the labels as targets.
    pub fn quadratic(&self, ridge: f64) -> Result<QuadraticProblem, DataError> {
        Ok(QuadraticProblem::least_squares(self.design(), self.labels.clone(), ridge)?)
    }

    /// Logistic loss after [`normalize_labels`].
    pub fn logistic(&self, ridge: f64) -> Result<LogisticProblem, DataError> {
        let mut labels = self.labels.clone();
        normalize_labels(&mut labels)?;
        Ok(LogisticProblem::new(self.design(), labels, ridge)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub m: usize,
    pub n: usize,
    pub nnz: usize,
    /// `(label, count)` in increasing label order.
    pub label_histogram: Vec<(f64, usize)>,
    pub max_abs_value: f64,
    /// No samples at all.
    pub empty: bool,
}

pub fn dataset_stats(ds: &Dataset) -> DatasetStats {
    let mut histogram: Vec<(f64, usize)> = Vec::new();
    for &label in &ds.labels {
        match histogram.iter_mut().find(|(l, _)| *l == label) {
            Some((_, c)) => *c += 1,
            None => histogram.push((label, 1)),
        }
    }
    histogram.sort_by(|a, b| a.0.total_cmp(&b.0));
    DatasetStats {
        m: ds.rows.len(),
        n: ds.n_features,
        nnz: ds.rows.iter().map(SparseRow::nnz).sum(),
        label_histogram: histogram,
        max_abs_value: ds.rows.iter().flat_map(|r| &r.values).fold(0.0, |a, v| a.max(v.abs())),
        empty: ds.rows.is_empty(),
    }
}

/// Maps a two-valued label set onto `{−1, +1}` (smaller value to `−1`).
///
/// Labels already in `{−1, +1}` are left alone. Anything else, such as
/// `{0, 1}` or `{1, 2}`, is remapped with a warning.
pub fn normalize_labels(labels: &mut [f64]) -> Result<(), DataError> {
    let distinct: BTreeSet<u64> = labels.iter().map(|l| l.to_bits()).collect();
    let mut values: Vec<f64> = distinct.into_iter().map(f64::from_bits).collect();
    values.sort_by(f64::total_cmp);
    if values.iter().all(|&l| l == 1.0 || l == -1.0) {
        return Ok(());
    }
    if values.len() != 2 || values.iter().any(|l| !l.is_finite()) {
        return Err(DataError::Labels(values));
    }
    warn!("mapping labels {{{}, {}}} to {{-1, +1}}", values[0], values[1]);
    for l in labels.iter_mut() {
        *l = if *l == values[0] { -1.0 } else { 1.0 };
    }
    Ok(())
}
