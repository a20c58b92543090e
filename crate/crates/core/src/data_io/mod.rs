//! Datasets: LIBSVM text I/O, per-feature scaling and the synthetic
//! Cholesky-factor generator.

mod libsvm;
mod normalize;
mod synthetic;

pub use libsvm::{parse_libsvm, read_libsvm, write_libsvm, write_libsvm_to, LabelMap};
pub use normalize::{normalize, normalize_features, normalize_features_minmax, Normalization};
pub use synthetic::{generate_synthetic, SyntheticSpec};


use crate::error::{check_len, Result};
use crate::numkit::CsrMatrix;

/// Data matrix (one sample per row) with one target per sample: `±1` labels
/// for classification, raw values for regression or the linear term of a
/// quadratic.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub a: CsrMatrix,
    pub targets: Vec<f64>,
    pub feature_names: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(a: CsrMatrix, targets: Vec<f64>) -> Result<Self> {
        check_len(a.n_rows(), targets.len())?;
        Ok(Dataset {
            a,
            targets,
            feature_names: None,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.a.n_rows()
    }

    pub fn n_features(&self) -> usize {
        self.a.n_cols()
    }
}
