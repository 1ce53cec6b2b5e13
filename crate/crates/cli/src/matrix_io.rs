//! Text matrices: one row per line, each entry a `re im` pair, `#` starts a
//! comment.

use num_complex::Complex64;
use qae_core::linalg::ComplexMatrix;
use qae_core::QaeError;

pub fn parse_matrix(text: &str) -> Result<ComplexMatrix, QaeError> {
    let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let nums = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| QaeError::Parse {
                line: i + 1,
                msg: e.to_string(),
            })?;
        rows.push((i + 1, nums));
    }
    let n = rows.len();
    if n == 0 {
        return Err(QaeError::Parse {
            line: 1,
            msg: "empty matrix".into(),
        });
    }
    let mut data = Vec::with_capacity(n * n);
    for (line, nums) in rows {
        if nums.len() != 2 * n {
            return Err(QaeError::Parse {
                line,
                msg: format!("expected {} numbers ({n} complex entries), found {}", 2 * n, nums.len()),
            });
        }
        data.extend(nums.chunks(2).map(|c| Complex64::new(c[0], c[1])));
    }
    ComplexMatrix::from_row_major(data)
}

pub fn format_matrix(m: &ComplexMatrix) -> String {
    let n = m.dim();
    let mut out = String::new();
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| format!("{:?} {:?}", m[(i, j)].re, m[(i, j)].im)).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}
