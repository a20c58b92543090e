//! Per-feature scaling of a data matrix into `[−1, 1]`.

use std::fmt;
use std::str::FromStr;

use super::Dataset;
use crate::error::{Error, Result};
use crate::numkit::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    #[default]
    None,
    /// Divide each column by its largest magnitude. Keeps sparsity.
    MaxAbs,
    /// Map each column affinely so its minimum and maximum (implicit zeros
    /// included) become −1 and 1. Generally densifies the matrix.
    MinMax,
}

impl Normalization {
    pub fn as_str(&self) -> &'static str {
        match self {
            Normalization::None => "none",
            Normalization::MaxAbs => "maxabs",
            Normalization::MinMax => "minmax",
        }
    }
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Normalization::None),
            "maxabs" => Ok(Normalization::MaxAbs),
            "minmax" => Ok(Normalization::MinMax),
            other => Err(Error::Config(format!(
                "unknown normalization {other:?} (expected none, maxabs or minmax)"
            ))),
        }
    }
}

pub fn normalize(ds: &Dataset, mode: Normalization) -> Dataset {
    match mode {
        Normalization::None => ds.clone(),
        Normalization::MaxAbs => normalize_features(ds),
        Normalization::MinMax => normalize_features_minmax(ds),
    }
}

/// Scales column `j` by `1 / max_i |A_ij|`; all-zero columns are untouched.
pub fn normalize_features(ds: &Dataset) -> Dataset {
    let a = &ds.a;
    let mut scale = vec![0.0f64; a.n_cols()];
    for (&c, &v) in a.indices().iter().zip(a.values()) {
        scale[c] = scale[c].max(v.abs());
    }
    let values: Vec<f64> = a
        .indices()
        .iter()
        .zip(a.values())
        .map(|(&c, &v)| if scale[c] > 0.0 { v / scale[c] } else { v })
        .collect();
    let a = CsrMatrix::new(
        a.n_rows(),
        a.n_cols(),
        a.indptr().to_vec(),
        a.indices().to_vec(),
        values,
    )
    .expect("rescaling keeps the structure valid");
    Dataset { a, ..ds.clone() }
}

/// `A_ij ← 2(A_ij − min_j)/(max_j − min_j) − 1` per column, where the
/// extremes include implicit zeros. Constant columns are left unchanged.
pub fn normalize_features_minmax(ds: &Dataset) -> Dataset {
    let a = &ds.a;
    let (n_rows, n_cols) = (a.n_rows(), a.n_cols());
    let mut lo = vec![f64::INFINITY; n_cols];
    let mut hi = vec![f64::NEG_INFINITY; n_cols];
    let mut stored = vec![0usize; n_cols];
    for (&c, &v) in a.indices().iter().zip(a.values()) {
        lo[c] = lo[c].min(v);
        hi[c] = hi[c].max(v);
        stored[c] += 1;
    }
    for c in 0..n_cols {
        if stored[c] < n_rows {
            lo[c] = lo[c].min(0.0);
            hi[c] = hi[c].max(0.0);
        }
    }
    let map = |c: usize, v: f64| -> f64 {
        let span = hi[c] - lo[c];
        if span > 0.0 {
            2.0 * (v - lo[c]) / span - 1.0
        } else {
            v
        }
    };
    let zero_image: Vec<f64> = (0..n_cols).map(|c| map(c, 0.0)).collect();

    let mut indptr = Vec::with_capacity(n_rows + 1);
    let mut indices = Vec::new();
    let mut values = Vec::new();
    indptr.push(0);
    for r in 0..n_rows {
        let (cols, vals) = a.row(r);
        let mut k = 0;
        for c in 0..n_cols {
            let v = if k < cols.len() && cols[k] == c {
                k += 1;
                map(c, vals[k - 1])
            } else {
                zero_image[c]
            };
            if v != 0.0 {
                indices.push(c);
                values.push(v);
            }
        }
        indptr.push(indices.len());
    }
    let a = CsrMatrix::new(n_rows, n_cols, indptr, indices, values)
        .expect("rescaling keeps the structure valid");
    Dataset { a, ..ds.clone() }
}
