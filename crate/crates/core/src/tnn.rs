//! Total nonnegativity, total positivity, irreducibility and eigenvalue
//! interlacing for (mostly tridiagonal) matrices.

use crate::dense::minor_unchecked;
use crate::error::{Error, Result};
use crate::lax::{LaxMatrix, Spectrum, Tridiagonal};
use itertools::Itertools;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Largest size accepted by the exhaustive minor enumerations.
pub const MAX_EXHAUSTIVE: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TnnMethod {
    Exhaustive,
    TridiagonalCriterion,
    Interlacing,
}

/// A negative minor. Row and column indices are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TnnReport {
    pub is_tnn: bool,
    pub witness: Option<Witness>,
    pub method: TnnMethod,
}

impl TnnReport {
    fn pass(method: TnnMethod) -> Self {
        TnnReport {
            is_tnn: true,
            witness: None,
            method,
        }
    }

    fn fail(method: TnnMethod, rows: &[usize], cols: &[usize], value: f64) -> Self {
        TnnReport {
            is_tnn: false,
            witness: Some(Witness {
                rows: rows.iter().map(|i| i + 1).collect(),
                cols: cols.iter().map(|j| j + 1).collect(),
                value,
            }),
            method,
        }
    }
}

fn check_square(m: &DMatrix<f64>) -> Result<usize> {
    if !m.is_square() || m.nrows() == 0 {
        return Err(Error::LengthMismatch(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let n = m.nrows();
    if n > MAX_EXHAUSTIVE {
        return Err(Error::TooLarge {
            n,
            max: MAX_EXHAUSTIVE,
        });
    }
    Ok(n)
}

/// Minor with values inside the elimination rounding bound flushed to zero, so
/// structurally vanishing minors do not come out as tiny negatives.
fn flushed_minor(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> f64 {
    let v = minor_unchecked(m, rows, cols);
    let bound: f64 = rows
        .iter()
        .map(|&i| cols.iter().map(|&j| m[(i, j)].abs()).sum::<f64>())
        .product();
    if v.abs() <= 4.0 * rows.len() as f64 * f64::EPSILON * bound {
        0.0
    } else {
        v
    }
}

/// First minor (by size, then rows, then columns, lexicographically) for which
/// `reject` holds.
fn first_minor(
    m: &DMatrix<f64>,
    reject: impl Fn(f64) -> bool,
) -> Option<(Vec<usize>, Vec<usize>, f64)> {
    let n = m.nrows();
    for k in 1..=n {
        for rows in (0..n).combinations(k) {
            for cols in (0..n).combinations(k) {
                let v = flushed_minor(m, &rows, &cols);
                if reject(v) {
                    return Some((rows, cols, v));
                }
            }
        }
    }
    None
}

/// Checks every minor against `>= -tol`, stopping at the first negative one.
pub fn is_tnn_exhaustive(m: &DMatrix<f64>, tol: f64) -> Result<TnnReport> {
    check_square(m)?;
    Ok(match first_minor(m, |v| !(v >= -tol)) {
        None => TnnReport::pass(TnnMethod::Exhaustive),
        Some((r, c, v)) => TnnReport::fail(TnnMethod::Exhaustive, &r, &c, v),
    })
}

/// Every minor strictly positive.
pub fn is_totally_positive(m: &DMatrix<f64>) -> Result<bool> {
    check_square(m)?;
    Ok(first_minor(m, |v| !(v > 0.0)).is_none())
}

/// Tridiagonal criterion: nonnegative off-diagonal entries and nonnegative
/// contiguous principal minors `det T[i..=j]`.
pub fn is_tnn_tridiagonal(t: &Tridiagonal, tol: f64) -> TnnReport {
    let n = t.n();
    let method = TnnMethod::TridiagonalCriterion;
    for i in 0..n.saturating_sub(1) {
        if !(t.sup[i] >= -tol) {
            return TnnReport::fail(method, &[i], &[i + 1], t.sup[i]);
        }
        if !(t.sub[i] >= -tol) {
            return TnnReport::fail(method, &[i + 1], &[i], t.sub[i]);
        }
    }
    // minors[start][len] for contiguous blocks, ordered by size then start
    let tails: Vec<Vec<f64>> = (0..n).map(|s| t.principal(s, n).leading_minors()).collect();
    for len in 1..=n {
        for start in 0..=(n - len) {
            let v = tails[start][len];
            if !(v >= -tol) {
                let idx: Vec<usize> = (start..start + len).collect();
                return TnnReport::fail(method, &idx, &idx, v);
            }
        }
    }
    TnnReport::pass(method)
}

/// Dense-matrix entry point for the tridiagonal criterion.
pub fn is_tnn_tridiagonal_dense(m: &DMatrix<f64>, tol: f64) -> Result<TnnReport> {
    Ok(is_tnn_tridiagonal(&Tridiagonal::from_dense(m)?, tol))
}

/// Searches `L^k`, `k = 1..=k_max`, for a totally positive power. Returns the
/// smallest such `k`. A miss means "not found within the bound", not a proof
/// of reducibility.
pub fn is_irreducible_tnn(t: &Tridiagonal, k_max: usize) -> Result<(bool, Option<usize>)> {
    if k_max == 0 {
        return Err(Error::InvalidArgument("k_max must be at least 1".into()));
    }
    if !is_tnn_tridiagonal(t, 0.0).is_tnn {
        return Err(Error::NotTnn);
    }
    let m = t.to_dense();
    check_square(&m)?;
    let mut power = m.clone();
    for k in 1..=k_max {
        if k > 1 {
            power = &power * &m;
        }
        if is_totally_positive(&power)? {
            return Ok((true, Some(k)));
        }
    }
    Ok((false, None))
}

/// Default power bound for [`is_irreducible_tnn`].
pub fn default_k_max(n: usize) -> usize {
    2 * n
}

/// Spectra of `L`, of its trailing block `Q = L[2..N]` and of its leading
/// block `Q' = L[1..N-1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterlacingData {
    pub lambdas: Spectrum,
    pub mus: Vec<f64>,
    pub mus_prime: Vec<f64>,
}

pub fn interlacing_spectra(l: &LaxMatrix) -> Result<InterlacingData> {
    let lambdas = l.spectrum()?;
    let t = l.as_tridiagonal();
    let n = l.n();
    Ok(InterlacingData {
        lambdas,
        mus: t.principal(1, n).eigenvalues()?,
        mus_prime: t.principal(0, n - 1).eigenvalues()?,
    })
}

/// `0 < λ_1 < μ_1 < λ_2 < … < μ_{N-1} < λ_N`, strictly.
pub fn strictly_interlaces(lambdas: &[f64], mus: &[f64]) -> bool {
    if mus.len() + 1 != lambdas.len() || !(lambdas[0] > 0.0) {
        return false;
    }
    mus.iter()
        .enumerate()
        .all(|(i, &mu)| lambdas[i] < mu && mu < lambdas[i + 1])
}

/// Interlacing test against the trailing block `Q`.
pub fn check_interlacing(data: &InterlacingData) -> bool {
    strictly_interlaces(data.lambdas.lambdas(), &data.mus)
}

/// Interlacing test against the leading block `Q'`.
pub fn check_interlacing_prime(data: &InterlacingData) -> bool {
    strictly_interlaces(data.lambdas.lambdas(), &data.mus_prime)
}

/// Interlacing-based TNN verdict, valid for Lax matrices with positive `b`.
pub fn is_tnn_interlacing(l: &LaxMatrix) -> Result<TnnReport> {
    let data = interlacing_spectra(l)?;
    Ok(TnnReport {
        is_tnn: check_interlacing(&data),
        witness: None,
        method: TnnMethod::Interlacing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m2(a: f64, b: f64, c: f64, d: f64) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[a, b, c, d])
    }

    fn lax(a: &[f64], b: &[f64]) -> LaxMatrix {
        LaxMatrix::new(a.to_vec(), b.to_vec()).unwrap()
    }

    #[test]
    fn exhaustive_examples() {
        assert!(
            is_tnn_exhaustive(&m2(2.0, 1.0, 1.0, 2.0), 0.0)
                .unwrap()
                .is_tnn
        );
        let r = is_tnn_exhaustive(&m2(0.0, 1.0, 1.0, 0.0), 0.0).unwrap();
        assert!(!r.is_tnn);
        assert_eq!(
            r.witness,
            Some(Witness {
                rows: vec![1, 2],
                cols: vec![1, 2],
                value: -1.0
            })
        );
        assert!(
            is_tnn_exhaustive(&m2(1.0, 1.0, 1.0, 1.0), 0.0)
                .unwrap()
                .is_tnn
        );
        assert_eq!(
            is_tnn_exhaustive(&DMatrix::identity(9, 9), 0.0),
            Err(Error::TooLarge { n: 9, max: 8 })
        );
    }

    #[test]
    fn witness_is_first_in_enumeration_order() {
        // 1x1 minors come first: the -0.5 entry at (2,1) beats the negative determinant
        let r = is_tnn_exhaustive(&m2(1.0, 3.0, -0.5, 1.0), 0.0).unwrap();
        assert_eq!(r.witness.unwrap().rows, vec![2]);
    }

    #[test]
    fn tolerance_is_respected() {
        let m = m2(1.0, 1.0, 1.0, 1.0 - 1e-14);
        assert!(!is_tnn_exhaustive(&m, 0.0).unwrap().is_tnn);
        assert!(is_tnn_exhaustive(&m, 1e-12).unwrap().is_tnn);
    }

    #[test]
    fn tridiagonal_examples() {
        assert!(is_tnn_tridiagonal(&lax(&[2.0, 2.0], &[1.0]).as_tridiagonal(), 0.0).is_tnn);
        let r = is_tnn_tridiagonal(&lax(&[1.0, 1.0], &[2.0]).as_tridiagonal(), 0.0);
        assert!(!r.is_tnn);
        assert_eq!(r.witness.unwrap().value, -1.0);
        assert!(
            is_tnn_tridiagonal(&lax(&[2.0, 2.0, 2.0], &[1.0, 1.0]).as_tridiagonal(), 0.0).is_tnn
        );
        let r = is_tnn_tridiagonal(&lax(&[2.0, 2.0], &[-1.0]).as_tridiagonal(), 0.0);
        assert_eq!(
            r.witness.unwrap(),
            Witness {
                rows: vec![2],
                cols: vec![1],
                value: -1.0
            }
        );
        assert!(matches!(
            is_tnn_tridiagonal_dense(&DMatrix::from_element(3, 3, 1.0), 0.0),
            Err(Error::NotTridiagonal { .. })
        ));
    }

    #[test]
    fn total_positivity_examples() {
        assert!(is_totally_positive(&m2(5.0, 4.0, 4.0, 5.0)).unwrap());
        assert!(!is_totally_positive(&m2(1.0, 1.0, 1.0, 1.0)).unwrap());
        assert!(is_totally_positive(&m2(2.0, 1.0, 1.0, 2.0)).unwrap());
    }

    #[test]
    fn irreducibility_examples() {
        let l = lax(&[2.0, 2.0], &[1.0]).as_tridiagonal();
        assert_eq!(is_irreducible_tnn(&l, 4).unwrap(), (true, Some(1)));
        assert_eq!(is_irreducible_tnn(&l, 1).unwrap(), (true, Some(1)));
        let ones = Tridiagonal::from_dense(&m2(1.0, 1.0, 1.0, 1.0)).unwrap();
        assert_eq!(is_irreducible_tnn(&ones, 4).unwrap(), (false, None));
        let not_tnn = lax(&[1.0, 1.0], &[2.0]).as_tridiagonal();
        assert_eq!(is_irreducible_tnn(&not_tnn, 4), Err(Error::NotTnn));
        // tridiag(2,2,2): the (1,3) entry is zero so L is not TP; L^2 is.
        let l3 = lax(&[2.0, 2.0, 2.0], &[1.0, 1.0]).as_tridiagonal();
        assert_eq!(is_irreducible_tnn(&l3, 6).unwrap(), (true, Some(2)));
    }

    #[test]
    fn interlacing_examples() {
        let d = interlacing_spectra(&lax(&[2.0, 2.0, 2.0], &[1.0, 1.0])).unwrap();
        let r2 = std::f64::consts::SQRT_2;
        assert!((d.lambdas.lambdas()[0] - (2.0 - r2)).abs() < 1e-14);
        for (got, want) in d.mus.iter().chain(&d.mus_prime).zip([1.0, 3.0, 1.0, 3.0]) {
            assert!((got - want).abs() < 1e-14);
        }
        assert!(check_interlacing(&d) && check_interlacing_prime(&d));

        let d = interlacing_spectra(&lax(&[2.0, 2.0], &[1.0])).unwrap();
        assert_eq!(d.mus, vec![2.0]);
        assert_eq!(d.mus_prime, vec![2.0]);
        assert!(check_interlacing(&d));

        let d = interlacing_spectra(&lax(&[0.0, 0.0], &[1.0])).unwrap();
        assert_eq!(d.mus, vec![0.0]);
        assert!(!check_interlacing(&d));
    }

    #[test]
    fn interlacing_predicate() {
        assert!(strictly_interlaces(&[1.0, 3.0], &[2.0]));
        assert!(!strictly_interlaces(&[-1.0, 1.0], &[0.0]));
        assert!(strictly_interlaces(&[0.586, 2.0, 3.414], &[1.0, 3.0]));
        assert!(!strictly_interlaces(&[1.0, 3.0], &[3.0]));
        assert!(!strictly_interlaces(&[1.0, 3.0], &[]));
    }

    #[test]
    fn report_json_shape() {
        let r = is_tnn_exhaustive(&m2(0.0, 1.0, 1.0, 0.0), 0.0).unwrap();
        assert_eq!(
            serde_json::to_string(&r).unwrap(),
            r#"{"is_tnn":false,"witness":{"rows":[1,2],"cols":[1,2],"value":-1.0},"method":"exhaustive"}"#
        );
        let r = TnnReport::pass(TnnMethod::TridiagonalCriterion);
        assert_eq!(
            serde_json::to_string(&r).unwrap(),
            r#"{"is_tnn":true,"witness":null,"method":"tridiagonal-criterion"}"#
        );
    }
}
