//! Dataset loading, atomic file writes, and the run manifest.
//!
//! Dataset directories hold `view1.csv .. viewV.csv` (header-free numeric
//! CSV, one row per sample) plus an optional `labels.csv` with one integer
//! per line. All exports are written to a temp file and renamed into
//! place.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use tenview::anchor::MultiViewDataset;

/// Loader failures, each naming the offending file (and line where one
/// exists).
#[derive(Debug)]
pub enum LoadError {
    MissingViews {
        dir: PathBuf,
    },
    Io {
        file: PathBuf,
        source: std::io::Error,
    },
    NonNumeric {
        file: PathBuf,
        line: usize,
        token: String,
    },
    Ragged {
        file: PathBuf,
        line: usize,
        expected: usize,
        got: usize,
    },
    RowCountMismatch {
        file: PathBuf,
        rows: usize,
        first_file: PathBuf,
        first_rows: usize,
    },
    LabelLength {
        file: PathBuf,
        expected: usize,
        got: usize,
    },
    Invalid(String),
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadError::MissingViews { dir } => {
                write!(f, "no view1.csv found in {}", dir.display())
            }
            LoadError::Io { file, source } => {
                write!(f, "cannot read {}: {source}", file.display())
            }
            LoadError::NonNumeric { file, line, token } => write!(
                f,
                "{}:{line}: cell '{token}' is not a number",
                file.display()
            ),
            LoadError::Ragged {
                file,
                line,
                expected,
                got,
            } => write!(
                f,
                "{}:{line}: row has {got} columns, expected {expected}",
                file.display()
            ),
            LoadError::RowCountMismatch {
                file,
                rows,
                first_file,
                first_rows,
            } => write!(
                f,
                "{} has {rows} rows but {} has {first_rows}",
                file.display(),
                first_file.display()
            ),
            LoadError::LabelLength {
                file,
                expected,
                got,
            } => write!(
                f,
                "{} has {got} labels for {expected} samples",
                file.display()
            ),
            LoadError::Invalid(msg) => write!(f, "{msg}"),
        }
    }
}

fn parse_matrix(path: &Path) -> Result<Array2<f64>, LoadError> {
    let text = fs::read_to_string(path).map_err(|source| LoadError::Io {
        file: path.to_path_buf(),
        source,
    })?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = 0usize;
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for cell in line.split(',') {
            let token = cell.trim();
            let value: f64 = token.parse().map_err(|_| LoadError::NonNumeric {
                file: path.to_path_buf(),
                line: idx + 1,
                token: token.to_string(),
            })?;
            row.push(value);
        }
        if rows.is_empty() {
            width = row.len();
        } else if row.len() != width {
            return Err(LoadError::Ragged {
                file: path.to_path_buf(),
                line: idx + 1,
                expected: width,
                got: row.len(),
            });
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(LoadError::Invalid(format!("{} is empty", path.display())));
    }
    let n = rows.len();
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Array2::from_shape_vec((n, width), flat)
        .map_err(|e| LoadError::Invalid(format!("{}: {e}", path.display())))
}

/// Reads an integer-per-line labels file.
pub fn parse_labels(path: &Path) -> Result<Vec<usize>, LoadError> {
    let text = fs::read_to_string(path).map_err(|source| LoadError::Io {
        file: path.to_path_buf(),
        source,
    })?;
    let mut labels = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let token = line.trim();
        if token.is_empty() {
            continue;
        }
        let value: usize = token.parse().map_err(|_| LoadError::NonNumeric {
            file: path.to_path_buf(),
            line: idx + 1,
            token: token.to_string(),
        })?;
        labels.push(value);
    }
    Ok(labels)
}

/// Loads view1.csv.. plus optional labels.csv from a directory.
pub fn load_dataset(dir: &Path) -> Result<MultiViewDataset, LoadError> {
    let mut views = Vec::new();
    let mut names = Vec::new();
    let first_file = dir.join("view1.csv");
    loop {
        let path = dir.join(format!("view{}.csv", views.len() + 1));
        if !path.exists() {
            break;
        }
        let m = parse_matrix(&path)?;
        if let Some(first) = views.first() {
            let first: &Array2<f64> = first;
            if m.nrows() != first.nrows() {
                return Err(LoadError::RowCountMismatch {
                    file: path,
                    rows: m.nrows(),
                    first_file,
                    first_rows: first.nrows(),
                });
            }
        }
        names.push(format!("view{}", views.len() + 1));
        views.push(m);
    }
    if views.is_empty() {
        return Err(LoadError::MissingViews {
            dir: dir.to_path_buf(),
        });
    }
    let n = views[0].nrows();
    let labels_path = dir.join("labels.csv");
    let labels = if labels_path.exists() {
        let l = parse_labels(&labels_path)?;
        if l.len() != n {
            return Err(LoadError::LabelLength {
                file: labels_path,
                expected: n,
                got: l.len(),
            });
        }
        Some(l)
    } else {
        None
    };
    MultiViewDataset::new(views, labels)
        .map(|d| d.with_names(names))
        .map_err(|e| LoadError::Invalid(e.to_string()))
}

/// Writes content to `path` atomically (temp file + rename).
pub fn write_atomic(path: &Path, content: &str) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, content)?;
    fs::rename(&tmp, path)
}

/// FNV-1a over the dataset bytes: per-view dims, raw feature bits, labels.
pub fn fingerprint(data: &MultiViewDataset) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            hash ^= b as u64;
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    for v in 0..data.n_views() {
        let x = data.view(v);
        eat(&(x.nrows() as u64).to_le_bytes());
        eat(&(x.ncols() as u64).to_le_bytes());
        for &val in x.iter() {
            eat(&val.to_le_bytes());
        }
    }
    if let Some(labels) = data.labels() {
        for &l in labels {
            eat(&(l as u64).to_le_bytes());
        }
    }
    format!("{hash:016x}")
}

/// Formats a matrix as header-free CSV.
pub fn matrix_to_csv(m: &Array2<f64>) -> String {
    let mut out = String::new();
    for row in m.rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// One integer label per line.
pub fn labels_to_csv(labels: &[usize]) -> String {
    let mut out = String::new();
    for l in labels {
        out.push_str(&format!("{l}\n"));
    }
    out
}

/// Flat JSON object with stable key order; values are raw numbers or
/// pre-quoted strings.
pub fn flat_json(pairs: &[(&str, String)]) -> String {
    let mut out = String::from("{\n");
    for (i, (k, v)) in pairs.iter().enumerate() {
        out.push_str(&format!("  \"{k}\": {v}"));
        if i + 1 < pairs.len() {
            out.push(',');
        }
        out.push('\n');
    }
    out.push_str("}\n");
    out
}

pub fn json_str(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// JSON number formatting: finite values print plainly, non-finite become
/// null.
pub fn json_num(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        "null".to_string()
    }
}
