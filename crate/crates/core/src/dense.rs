//! Determinants and minors of small dense matrices.

use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// A real number stored as `sign * exp(ln)`, used where determinants can
/// leave the range of `f64`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogScaled {
    pub sign: f64,
    pub ln: f64,
}

impl LogScaled {
    pub const ZERO: LogScaled = LogScaled {
        sign: 0.0,
        ln: f64::NEG_INFINITY,
    };

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            LogScaled {
                sign: x.signum(),
                ln: x.abs().ln(),
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0.0
    }

    pub fn value(&self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            self.sign * self.ln.exp()
        }
    }

    pub fn mul(self, other: LogScaled) -> LogScaled {
        if self.is_zero() || other.is_zero() {
            return Self::ZERO;
        }
        LogScaled {
            sign: self.sign * other.sign,
            ln: self.ln + other.ln,
        }
    }

    /// `self / other`, returned as a plain float.
    pub fn ratio(self, other: LogScaled) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        self.sign * other.sign * (self.ln - other.ln).exp()
    }
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det(m: &DMatrix<f64>) -> f64 {
    assert!(m.is_square(), "determinant of a non-square matrix");
    let n = m.nrows();
    let mut a = m.clone();
    let mut d = 1.0;
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[(i, k)].abs().total_cmp(&a[(j, k)].abs()))
            .unwrap();
        if a[(p, k)] == 0.0 {
            return 0.0;
        }
        if p != k {
            a.swap_rows(p, k);
            d = -d;
        }
        let pivot = a[(k, k)];
        d *= pivot;
        for i in (k + 1)..n {
            let factor = a[(i, k)] / pivot;
            if factor != 0.0 {
                for j in (k + 1)..n {
                    a[(i, j)] -= factor * a[(k, j)];
                }
            }
        }
    }
    d
}

/// Determinant in log form. Every column is first divided by its largest
/// absolute entry; the scales are added back in the log.
pub fn log_det(m: &DMatrix<f64>) -> LogScaled {
    log_det_scaled(m).0
}

/// Like [`log_det`], also returning the summed log column scales, so that
/// `det.ln - scales` is the log-determinant of the column-normalized matrix.
pub fn log_det_scaled(m: &DMatrix<f64>) -> (LogScaled, f64) {
    assert!(m.is_square(), "determinant of a non-square matrix");
    let mut a = m.clone();
    let mut scales = 0.0;
    for mut col in a.column_iter_mut() {
        let s = col.amax();
        if s == 0.0 || !s.is_finite() {
            return (LogScaled::ZERO, scales);
        }
        col /= s;
        scales += s.ln();
    }
    let mut ln = scales;
    let n = a.nrows();
    let mut sign = 1.0;
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[(i, k)].abs().total_cmp(&a[(j, k)].abs()))
            .unwrap();
        if a[(p, k)] == 0.0 {
            return (LogScaled::ZERO, scales);
        }
        if p != k {
            a.swap_rows(p, k);
            sign = -sign;
        }
        let pivot = a[(k, k)];
        sign *= pivot.signum();
        ln += pivot.abs().ln();
        for i in (k + 1)..n {
            let factor = a[(i, k)] / pivot;
            if factor != 0.0 {
                for j in (k + 1)..n {
                    a[(i, j)] -= factor * a[(k, j)];
                }
            }
        }
    }
    (LogScaled { sign, ln }, scales)
}

fn check_indices(list: &[usize], bound: usize, what: &str) -> Result<()> {
    if let Some(&i) = list.iter().find(|&&i| i >= bound) {
        return Err(Error::BadIndex(format!(
            "{what} index {i} out of bounds ({bound})"
        )));
    }
    if list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::BadIndex(format!(
            "{what} indices not strictly increasing"
        )));
    }
    Ok(())
}

/// Determinant of the submatrix on the given (0-based, strictly increasing)
/// rows and columns.
pub fn minor(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> Result<f64> {
    if rows.len() != cols.len() {
        return Err(Error::BadIndex(format!(
            "{} rows against {} columns",
            rows.len(),
            cols.len()
        )));
    }
    if rows.is_empty() {
        return Err(Error::BadIndex("empty index set".into()));
    }
    check_indices(rows, m.nrows(), "row")?;
    check_indices(cols, m.ncols(), "column")?;
    Ok(minor_unchecked(m, rows, cols))
}

pub(crate) fn minor_unchecked(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> f64 {
    let e = |i: usize, j: usize| m[(rows[i], cols[j])];
    match rows.len() {
        1 => e(0, 0),
        2 => e(0, 0) * e(1, 1) - e(0, 1) * e(1, 0),
        3 => {
            e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1))
                - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0))
                + e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0))
        }
        k => det(&DMatrix::from_fn(k, k, e)),
    }
}
