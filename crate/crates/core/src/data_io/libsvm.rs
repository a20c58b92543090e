//! LIBSVM sparse text format: `<label> <index>:<value> ...` per line with
//! 1-based, strictly increasing feature indices.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::Dataset;
use crate::error::{Error, Result};
use crate::numkit::CsrMatrix;

/// How label tokens become targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LabelMap {
    /// Classification: `{0, 1}` map to `{−1, +1}` and `±1` are kept; anything
    /// else is an error.
    #[default]
    Binary,
    /// Regression and quadratic data: the label value is the target.
    Raw,
}

impl LabelMap {
    fn apply(self, v: f64) -> Option<f64> {
        match self {
            LabelMap::Raw => Some(v),
            LabelMap::Binary => {
                if v == 1.0 {
                    Some(1.0)
                } else if v == -1.0 || v == 0.0 {
                    Some(-1.0)
                } else {
                    None
                }
            }
        }
    }
}

pub fn read_libsvm(path: impl AsRef<Path>, label_map: LabelMap) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_libsvm(&text, label_map, path)
}

/// Parses LIBSVM text. `origin` only labels error messages.
pub fn parse_libsvm(text: &str, label_map: LabelMap, origin: &Path) -> Result<Dataset> {
    let mut indptr = vec![0usize];
    let mut indices = Vec::new();
    let mut values = Vec::new();
    let mut targets = Vec::new();
    let mut n_cols = 0usize;

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let err = |message: String| Error::Parse {
            path: origin.to_path_buf(),
            line,
            message,
        };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let label_tok = tokens.next().expect("non-empty line has a token");
        let label: f64 = label_tok
            .parse()
            .map_err(|_| err(format!("cannot parse label {label_tok:?}")))?;
        if !label.is_finite() {
            return Err(err(format!("label {label_tok:?} is not finite")));
        }
        let target = label_map
            .apply(label)
            .ok_or_else(|| err(format!("label {label_tok:?} is not a binary class label")))?;

        let mut last: Option<usize> = None;
        for tok in tokens {
            let (idx_s, val_s) = tok
                .split_once(':')
                .ok_or_else(|| err(format!("feature token {tok:?} is not <index>:<value>")))?;
            let idx: usize = idx_s
                .parse()
                .map_err(|_| err(format!("bad feature index {idx_s:?}")))?;
            if idx == 0 {
                return Err(err("feature indices are 1-based; found 0".into()));
            }
            if let Some(prev) = last {
                if idx == prev {
                    return Err(err(format!("duplicate feature index {idx}")));
                }
                if idx < prev {
                    return Err(err(format!("feature index {idx} follows {prev}")));
                }
            }
            last = Some(idx);
            let val: f64 = val_s
                .parse()
                .map_err(|_| err(format!("bad feature value {val_s:?}")))?;
            if !val.is_finite() {
                return Err(err(format!("feature value {val_s:?} is not finite")));
            }
            n_cols = n_cols.max(idx);
            if val != 0.0 {
                indices.push(idx - 1);
                values.push(val);
            }
        }
        targets.push(target);
        indptr.push(indices.len());
    }

    let a = CsrMatrix::new(targets.len(), n_cols, indptr, indices, values)?;
    Dataset::new(a, targets)
}

/// Writes one line per sample; floats use the shortest representation that
/// parses back to the same value.
pub fn write_libsvm_to(ds: &Dataset, mut out: impl Write) -> std::io::Result<()> {
    let mut line = String::new();
    for r in 0..ds.n_samples() {
        use std::fmt::Write as _;
        line.clear();
        write!(line, "{}", ds.targets[r]).unwrap();
        let (cols, vals) = ds.a.row(r);
        for (c, v) in cols.iter().zip(vals) {
            write!(line, " {}:{}", c + 1, v).unwrap();
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    out.flush()
}

pub fn write_libsvm(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_libsvm_to(ds, std::io::BufWriter::new(file)).map_err(|e| Error::io(path, e))
}
