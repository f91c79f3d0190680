//! Tridiagonal Lax matrices with unit superdiagonal, their characteristic
//! polynomials, spectra, and the cofactor vectors feeding the linearization.

use crate::dense;
use crate::error::{Error, Result};
use crate::ext::dd_div;
use crate::poly::Poly;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

/// Default minimum gap between eigenvalues for them to count as distinct.
pub const DEFAULT_SEPARATION: f64 = 1e-10;

/// Roots whose imaginary part is below this (relative to `max(1, |z|)`) are real.
const IMAG_TOL: f64 = 1e-8;

/// A general real tridiagonal matrix of size `n >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    /// Entries `(i + 1, i)`.
    pub sub: Vec<f64>,
    /// Entries `(i, i + 1)`.
    pub sup: Vec<f64>,
}

impl Tridiagonal {
    pub fn new(diag: Vec<f64>, sub: Vec<f64>, sup: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::InvalidSize { n: 0 });
        }
        if sub.len() + 1 != diag.len() || sup.len() != sub.len() {
            return Err(Error::LengthMismatch(format!(
                "diag {} / sub {} / sup {}",
                diag.len(),
                sub.len(),
                sup.len()
            )));
        }
        if diag.iter().chain(&sub).chain(&sup).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("tridiagonal matrix"));
        }
        Ok(Tridiagonal { diag, sub, sup })
    }

    /// Reads the three bands of a square matrix; fails if anything outside them is nonzero.
    pub fn from_dense(m: &DMatrix<f64>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::LengthMismatch(format!(
                "expected a square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let n = m.nrows();
        for i in 0..n {
            for j in 0..n {
                if i.abs_diff(j) > 1 && m[(i, j)] != 0.0 {
                    return Err(Error::NotTridiagonal { row: i, col: j });
                }
            }
        }
        Tridiagonal::new(
            (0..n).map(|i| m[(i, i)]).collect(),
            (1..n).map(|i| m[(i, i - 1)]).collect(),
            (1..n).map(|i| m[(i - 1, i)]).collect(),
        )
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
        }
        for i in 1..n {
            m[(i, i - 1)] = self.sub[i - 1];
            m[(i - 1, i)] = self.sup[i - 1];
        }
        m
    }

    /// Principal submatrix on the contiguous 0-based range `start..end`.
    pub fn principal(&self, start: usize, end: usize) -> Tridiagonal {
        Tridiagonal {
            diag: self.diag[start..end].to_vec(),
            sub: self.sub[start..end - 1].to_vec(),
            sup: self.sup[start..end - 1].to_vec(),
        }
    }

    /// `det(λE - T)` as a monic polynomial.
    pub fn char_poly(&self) -> Poly {
        let mut prev = Poly::constant(1.0);
        let mut cur = Poly::linear_root(self.diag[0]);
        for k in 1..self.n() {
            let next = &(&Poly::linear_root(self.diag[k]) * &cur)
                - &prev.scale(self.sub[k - 1] * self.sup[k - 1]);
            prev = cur;
            cur = next;
        }
        cur
    }

    /// Determinants of the leading principal blocks, `det T[0..k]` for `k = 0..=n`,
    /// by the continuant recurrence.
    pub fn leading_minors(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n() + 1);
        out.push(1.0);
        out.push(self.diag[0]);
        for k in 1..self.n() {
            let v = self.diag[k] * out[k] - self.sub[k - 1] * self.sup[k - 1] * out[k - 1];
            out.push(v);
        }
        out
    }

    /// Real eigenvalues in ascending order.
    ///
    /// When every `sub[i] * sup[i] > 0` the matrix is diagonally similar to a
    /// symmetric one with off-diagonals `sqrt(sub[i] * sup[i])`, and the
    /// eigenvalues come from Sturm-sequence bisection. Otherwise the roots of
    /// the characteristic polynomial are used.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        if self.sub.iter().zip(&self.sup).all(|(s, u)| s * u > 0.0) {
            let off: Vec<f64> = self
                .sub
                .iter()
                .zip(&self.sup)
                .map(|(s, u)| (s * u).sqrt())
                .collect();
            Ok(sturm_eigenvalues(&self.diag, &off))
        } else {
            self.eigenvalues_nonsymmetric()
        }
    }

    /// Eigenvalues of a tridiagonal matrix with some `sub[i] * sup[i] < 0`:
    /// Hessenberg QR on the balanced matrix (off-diagonal magnitudes
    /// `sqrt|sub[i] * sup[i]|`), each real eigenvalue then polished by Newton
    /// steps on the continuant recurrence.
    pub fn eigenvalues_nonsymmetric(&self) -> Result<Vec<f64>> {
        let n = self.n();
        let mut m = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
        }
        for i in 1..n {
            let p = self.sub[i - 1] * self.sup[i - 1];
            let r = p.abs().sqrt();
            m[(i - 1, i)] = r;
            m[(i, i - 1)] = if p < 0.0 { -r } else { r };
        }
        let raw = m.complex_eigenvalues();
        if let Some(z) = raw
            .iter()
            .find(|z| z.im.abs() > IMAG_TOL * z.norm().max(1.0))
        {
            return Err(Error::NonRealSpectrum { imag: z.im.abs() });
        }
        let mut re: Vec<f64> = raw.iter().map(|z| z.re).collect();
        re.sort_by(f64::total_cmp);
        let polished = (0..n)
            .map(|i| {
                let gap = [
                    i.checked_sub(1).map(|j| re[i] - re[j]),
                    re.get(i + 1).map(|x| x - re[i]),
                ]
                .into_iter()
                .flatten()
                .fold(f64::INFINITY, f64::min);
                self.newton_polish(re[i], 0.25 * gap)
            })
            .collect::<Vec<f64>>();
        let mut out = polished;
        out.sort_by(f64::total_cmp);
        Ok(out)
    }

    /// `(p, p')` of the characteristic polynomial at `x`, up to a common
    /// positive factor, by the continuant recurrence.
    fn continuant_with_derivative(&self, x: f64) -> (f64, f64) {
        let (mut p_prev, mut p) = (1.0, x - self.diag[0]);
        let (mut q_prev, mut q) = (0.0, 1.0);
        for k in 1..self.n() {
            let c = self.sub[k - 1] * self.sup[k - 1];
            let p_next = (x - self.diag[k]) * p - c * p_prev;
            let q_next = p + (x - self.diag[k]) * q - c * q_prev;
            (p_prev, p, q_prev, q) = (p, p_next, q, q_next);
            let big = p.abs().max(q.abs());
            if big > 1e100 {
                let s = 1.0 / big;
                (p_prev, p, q_prev, q) = (p_prev * s, p * s, q_prev * s, q * s);
            }
        }
        (p, q)
    }

    /// Newton iteration from `x0`, abandoned if it leaves `x0 ± radius`.
    fn newton_polish(&self, x0: f64, radius: f64) -> f64 {
        let mut x = x0;
        for _ in 0..30 {
            let (p, q) = self.continuant_with_derivative(x);
            if p == 0.0 || q == 0.0 || !q.is_finite() {
                break;
            }
            let step = p / q;
            let next = x - step;
            if !((next - x0).abs() <= radius) {
                return x0;
            }
            x = next;
            if step.abs() <= 2.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) {
                break;
            }
        }
        x
    }

    /// Eigenvalues from the roots of the characteristic polynomial.
    pub fn eigenvalues_by_roots(&self) -> Result<Vec<f64>> {
        real_roots(&self.char_poly())
    }
}

fn real_roots(p: &Poly) -> Result<Vec<f64>> {
    let roots = p.roots();
    if let Some(z) = roots
        .iter()
        .find(|z| z.im.abs() > IMAG_TOL * z.norm().max(1.0))
    {
        return Err(Error::NonRealSpectrum { imag: z.im.abs() });
    }
    let mut re: Vec<f64> = roots.iter().map(|z| z.re).collect();
    re.sort_by(f64::total_cmp);
    Ok(re)
}

/// Number of eigenvalues of the symmetric tridiagonal matrix strictly below `x`.
pub fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let guard = f64::MIN_POSITIVE.sqrt();
    let mut count = 0;
    let mut q = diag[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        let q_safe = if q.abs() < guard {
            guard.copysign(q)
        } else {
            q
        };
        q = (diag[i] - x) - off[i - 1] * off[i - 1] / q_safe;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Sturm count in double-double arithmetic for the tridiagonal matrix with
/// diagonal `diag` and off-diagonal products `prods`.
fn sturm_count_dd(diag: &[f64], prods: &[f64], x: TwoFloat) -> usize {
    let guard = f64::MIN_POSITIVE.sqrt();
    let mut count = 0;
    let mut q = TwoFloat::from(diag[0]) - x;
    for i in 0..diag.len() {
        if i > 0 {
            let q_safe = if q.hi().abs() < guard {
                TwoFloat::from(guard.copysign(q.hi()))
            } else {
                q
            };
            q = (TwoFloat::from(diag[i]) - x) - dd_div(TwoFloat::from(prods[i - 1]), q_safe);
        }
        if q.hi() < 0.0 {
            count += 1;
        }
    }
    count
}

/// Eigenvalue `index` (ascending) of the tridiagonal matrix with diagonal
/// `diag` and positive off-diagonal products `prods`, refined by
/// double-double bisection around the estimate `approx`.
pub fn refine_eigenvalue(diag: &[f64], prods: &[f64], index: usize, approx: f64) -> TwoFloat {
    let scale = diag
        .iter()
        .map(|x| x.abs())
        .chain(prods.iter().map(|p| p.abs().sqrt()))
        .chain([approx.abs(), 1.0])
        .fold(0.0, f64::max);
    let center = TwoFloat::from(approx);
    let mut r = 16.0 * f64::EPSILON * scale;
    for _ in 0..200 {
        if sturm_count_dd(diag, prods, center - r) <= index
            && sturm_count_dd(diag, prods, center + r) > index
        {
            break;
        }
        r *= 4.0;
    }
    let (mut lo, mut hi) = (center - r, center + r);
    let width = 4.0 * f64::EPSILON * f64::EPSILON * scale;
    for _ in 0..256 {
        if (hi - lo).hi() <= width {
            break;
        }
        let mid = (lo + hi) / 2.0;
        if sturm_count_dd(diag, prods, mid) <= index {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) / 2.0
}

/// All eigenvalues of a symmetric tridiagonal matrix by bisection on the
/// Sturm count, ascending.
pub fn sturm_eigenvalues(diag: &[f64], off: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r =
            if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let pad = 1e-12 * (hi - lo).max(1.0);
    lo -= pad;
    hi += pad;
    (0..n)
        .map(|k| {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..2000 {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                if sturm_count(diag, off, mid) <= k {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}

/// The spectrum of a Lax matrix: distinct real eigenvalues in increasing order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    lambdas: Vec<f64>,
}

impl Spectrum {
    pub fn new(lambdas: Vec<f64>) -> Result<Self> {
        Self::with_separation(lambdas, DEFAULT_SEPARATION)
    }

    pub fn with_separation(lambdas: Vec<f64>, separation: f64) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::InvalidSize { n: 0 });
        }
        if lambdas.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("spectrum"));
        }
        for (i, w) in lambdas.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(Error::NotIncreasing { index: i + 1 });
            }
            if w[1] - w[0] <= separation {
                return Err(Error::NonSimpleSpectrum { gap: w[1] - w[0] });
            }
        }
        Ok(Spectrum { lambdas })
    }

    pub fn n(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// `λ_1 > 0`, the situation of totally nonnegative matrices.
    pub fn is_positive(&self) -> bool {
        self.lambdas[0] > 0.0
    }

    pub fn min_gap(&self) -> f64 {
        self.lambdas
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// `∏_{i<j} (λ_j - λ_i)`, always positive.
    pub fn vandermonde(&self) -> f64 {
        self.ln_vandermonde().exp()
    }

    pub fn ln_vandermonde(&self) -> f64 {
        let l = &self.lambdas;
        let mut s = 0.0;
        for j in 0..l.len() {
            for i in 0..j {
                s += (l[j] - l[i]).ln();
            }
        }
        s
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SpectrumRepr {
    Object { lambdas: Vec<f64> },
    Bare(Vec<f64>),
}

impl<'de> Deserialize<'de> for Spectrum {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let lambdas = match SpectrumRepr::deserialize(d)? {
            SpectrumRepr::Object { lambdas } | SpectrumRepr::Bare(lambdas) => lambdas,
        };
        Spectrum::new(lambdas).map_err(serde::de::Error::custom)
    }
}

/// Which sheet of the spectral curve a cofactor vector lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sheet {
    /// Variable `x`, built from the last-row cofactors.
    Minus,
    /// Variable `y`, built from the first-row cofactors.
    Plus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialVector {
    pub entries: Vec<Poly>,
    pub sheet: Sheet,
}

impl PolynomialVector {
    pub fn eval(&self, lambda: f64) -> Vec<f64> {
        self.entries.iter().map(|p| p.eval(lambda)).collect()
    }
}

/// A root of a cofactor component; `off_axis` marks a genuinely complex root.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Root {
    pub re: f64,
    pub im: f64,
    pub off_axis: bool,
}

/// Zeros of the k-th cofactor component on each sheet.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Divisor {
    pub minus: Vec<Root>,
    pub plus: Vec<Root>,
}

#[derive(Serialize, Deserialize)]
struct LaxRepr {
    n: usize,
    a: Vec<f64>,
    b: Vec<f64>,
}

/// A point of the Toda phase space: diagonal `a`, subdiagonal `b` (all
/// nonzero), superdiagonal fixed to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LaxRepr", into = "LaxRepr")]
pub struct LaxMatrix {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl TryFrom<LaxRepr> for LaxMatrix {
    type Error = Error;
    fn try_from(r: LaxRepr) -> Result<Self> {
        if r.a.len() != r.n {
            return Err(Error::LengthMismatch(format!(
                "n = {} but a has {} entries",
                r.n,
                r.a.len()
            )));
        }
        LaxMatrix::new(r.a, r.b)
    }
}

impl From<LaxMatrix> for LaxRepr {
    fn from(l: LaxMatrix) -> Self {
        LaxRepr {
            n: l.n(),
            a: l.a,
            b: l.b,
        }
    }
}

impl LaxMatrix {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() < 2 {
            return Err(Error::InvalidSize { n: a.len() });
        }
        if b.len() + 1 != a.len() {
            return Err(Error::LengthMismatch(format!(
                "a has {} entries, b has {} (expected {})",
                a.len(),
                b.len(),
                a.len() - 1
            )));
        }
        if a.iter().chain(&b).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("Lax matrix"));
        }
        if let Some(i) = b.iter().position(|&x| x == 0.0) {
            return Err(Error::ZeroSubdiagonal { index: i + 1 });
        }
        Ok(LaxMatrix { a, b })
    }

    /// Reads a dense matrix whose superdiagonal must be 1 within `tol`.
    pub fn from_dense(m: &DMatrix<f64>, tol: f64) -> Result<Self> {
        let t = Tridiagonal::from_dense(m)?;
        let deviation = t.sup.iter().map(|u| (u - 1.0).abs()).fold(0.0, f64::max);
        if deviation > tol {
            return Err(Error::StructureLost { deviation });
        }
        LaxMatrix::new(t.diag, t.sub)
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        self.as_tridiagonal().to_dense()
    }

    pub fn as_tridiagonal(&self) -> Tridiagonal {
        Tridiagonal {
            diag: self.a.clone(),
            sub: self.b.clone(),
            sup: vec![1.0; self.b.len()],
        }
    }

    /// `f(λ) = (-1)^N det(L - λE)`, monic, ascending coefficients.
    pub fn char_poly(&self) -> Poly {
        self.as_tridiagonal().char_poly()
    }

    pub fn spectrum(&self) -> Result<Spectrum> {
        self.spectrum_with_separation(DEFAULT_SEPARATION)
    }

    pub fn spectrum_with_separation(&self, separation: f64) -> Result<Spectrum> {
        let eig = self.as_tridiagonal().eigenvalues()?;
        simple_spectrum(eig, separation)
    }

    /// Spectrum via polynomial roots regardless of the signs of `b`.
    pub fn spectrum_by_roots(&self) -> Result<Spectrum> {
        simple_spectrum(
            self.as_tridiagonal().eigenvalues_by_roots()?,
            DEFAULT_SEPARATION,
        )
    }

    /// `Δ_{1,1}(λ)`: the (1,1)-cofactor of `L - λE`, of degree `n - 1` with
    /// leading coefficient `(-1)^{n-1}`.
    pub fn chop_integral(&self) -> Poly {
        let trailing = self.as_tridiagonal().principal(1, self.n());
        let sign = if self.n().is_multiple_of(2) { -1.0 } else { 1.0 };
        trailing.char_poly().scale(sign)
    }

    /// `Δ_{1,1}(λ)` evaluated directly by the continuant recurrence, together
    /// with a running bound on the magnitudes summed, for zero tests.
    pub fn chop_integral_at(&self, lambda: f64) -> (f64, f64) {
        // det(L[2..N] - λE) by recurrence
        let (mut p_prev, mut p) = (1.0, self.a[1] - lambda);
        let (mut m_prev, mut m) = (1.0, self.a[1].abs() + lambda.abs());
        for k in 2..self.n() {
            let d = self.a[k] - lambda;
            let next = d * p - self.b[k - 1] * p_prev;
            let next_m = (self.a[k].abs() + lambda.abs()) * m + self.b[k - 1].abs() * m_prev;
            p_prev = p;
            p = next;
            m_prev = m;
            m = next_m;
        }
        (p, m)
    }

    /// The cofactor vectors `(v_-, v_+)`.
    ///
    /// `v_+[j] = (-1)^{1+j} Δ_{1,j}` exactly, so `v_+[1]` is the chop integral.
    /// `v_-[j]` is the monic determinant of the leading `(j-1)` block of
    /// `λE - L`, i.e. the last-row cofactors rescaled by `(-1)^{N+1}`. With
    /// this pairing `Δ_{1,1}·v_- ≡ v_+ (mod f)` and both vectors solve
    /// `(L - λE) v ≡ 0 (mod f)`.
    pub fn cofactor_vectors(&self) -> (PolynomialVector, PolynomialVector) {
        let n = self.n();
        let t = self.as_tridiagonal();
        let mut minus = Vec::with_capacity(n);
        minus.push(Poly::constant(1.0));
        for j in 1..n {
            minus.push(t.principal(0, j).char_poly());
        }
        let sign = if n.is_multiple_of(2) { -1.0 } else { 1.0 };
        let mut plus = Vec::with_capacity(n);
        let mut bprod = 1.0;
        for j in 0..n {
            if j > 0 {
                bprod *= self.b[j - 1];
            }
            let tail = if j + 1 < n {
                t.principal(j + 1, n).char_poly()
            } else {
                Poly::constant(1.0)
            };
            plus.push(tail.scale(sign * bprod));
        }
        (
            PolynomialVector {
                entries: minus,
                sheet: Sheet::Minus,
            },
            PolynomialVector {
                entries: plus,
                sheet: Sheet::Plus,
            },
        )
    }

    /// Zeros of the k-th (1-based) component of `v_-` (degree `k-1`) and of
    /// `v_+` (degree `n-k`).
    pub fn divisor_of_component(&self, k: usize) -> Result<Divisor> {
        if k == 0 || k > self.n() {
            return Err(Error::BadIndex(format!(
                "component {k} outside 1..={}",
                self.n()
            )));
        }
        let (minus, plus) = self.cofactor_vectors();
        let roots = |p: &Poly| -> Result<Vec<Root>> {
            if p.is_zero() {
                return Err(Error::DegenerateComponent { k });
            }
            let mut r: Vec<Root> = p
                .roots()
                .into_iter()
                .map(|z| Root {
                    re: z.re,
                    im: z.im,
                    off_axis: z.im.abs() > IMAG_TOL * z.norm().max(1.0),
                })
                .collect();
            r.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
            Ok(r)
        };
        Ok(Divisor {
            minus: roots(&minus.entries[k - 1])?,
            plus: roots(&plus.entries[k - 1])?,
        })
    }

    /// Leading principal minors `det L[1..k]` for `k = 0..=n`.
    pub fn leading_minors(&self) -> Vec<f64> {
        self.as_tridiagonal().leading_minors()
    }

    pub fn minor(&self, rows: &[usize], cols: &[usize]) -> Result<f64> {
        dense::minor(&self.to_dense(), rows, cols)
    }
}

fn simple_spectrum(eig: Vec<f64>, separation: f64) -> Result<Spectrum> {
    if let Some(gap) = eig
        .windows(2)
        .map(|w| w[1] - w[0])
        .find(|&g| g <= separation)
    {
        return Err(Error::NonSimpleSpectrum { gap });
    }
    Spectrum::with_separation(eig, separation)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lax(a: &[f64], b: &[f64]) -> LaxMatrix {
        LaxMatrix::new(a.to_vec(), b.to_vec()).unwrap()
    }

    fn close(x: &[f64], y: &[f64], tol: f64) -> bool {
        x.len() == y.len() && x.iter().zip(y).all(|(a, b)| (a - b).abs() <= tol)
    }

    #[test]
    fn double_double_refinement() {
        let x = refine_eigenvalue(&[2.0, 2.0], &[1.0], 0, 1.0 + 1e-9);
        assert!((x - 1.0).abs().hi() < 1e-30);
        let x = refine_eigenvalue(&[2.0, 2.0], &[1.0], 1, 2.9);
        assert!((x - 3.0).abs().hi() < 1e-30);
        // eigenvalues 2 ± √2 of tridiag(2; 1, 1)
        let x = refine_eigenvalue(&[2.0, 2.0, 2.0], &[1.0, 1.0], 2, 3.414);
        let d = x - 2.0;
        assert!((d * d - 2.0).abs().hi() < 1e-29, "{:e}", (d * d - 2.0).hi());
    }

    #[test]
    fn rejects_phase_space_violations() {
        assert_eq!(
            LaxMatrix::new(vec![1.0], vec![]),
            Err(Error::InvalidSize { n: 1 })
        );
        assert_eq!(
            LaxMatrix::new(vec![1.0, 2.0, 3.0], vec![1.0, 0.0]),
            Err(Error::ZeroSubdiagonal { index: 2 })
        );
        assert!(matches!(
            LaxMatrix::new(vec![1.0, 2.0], vec![]),
            Err(Error::LengthMismatch(_))
        ));
    }

    #[test]
    fn dense_layout() {
        let m = lax(&[1.0, 2.0, 3.0], &[4.0, 5.0]).to_dense();
        let want = DMatrix::from_row_slice(3, 3, &[1.0, 1.0, 0.0, 4.0, 2.0, 1.0, 0.0, 5.0, 3.0]);
        assert_eq!(m, want);
    }

    #[test]
    fn json_round_trip_and_validation() {
        let l = lax(&[2.0, 2.0], &[1.0]);
        let s = serde_json::to_string(&l).unwrap();
        assert_eq!(s, r#"{"n":2,"a":[2.0,2.0],"b":[1.0]}"#);
        assert_eq!(serde_json::from_str::<LaxMatrix>(&s).unwrap(), l);
        assert!(serde_json::from_str::<LaxMatrix>(r#"{"n":2,"a":[2,2],"b":[0]}"#).is_err());
        assert!(serde_json::from_str::<LaxMatrix>(r#"{"n":3,"a":[2,2],"b":[1]}"#).is_err());
    }

    #[test]
    fn char_poly_examples() {
        assert_eq!(
            lax(&[2.0, 2.0], &[1.0]).char_poly().coeffs(),
            &[3.0, -4.0, 1.0]
        );
        assert_eq!(
            lax(&[0.0, 0.0], &[5.0]).char_poly().coeffs(),
            &[-5.0, 0.0, 1.0]
        );
        assert_eq!(
            lax(&[2.0, 2.0, 2.0], &[1.0, 1.0]).char_poly().coeffs(),
            &[-4.0, 10.0, -6.0, 1.0]
        );
    }

    #[test]
    fn spectrum_examples() {
        let s = lax(&[2.0, 2.0], &[1.0]).spectrum().unwrap();
        assert!(close(s.lambdas(), &[1.0, 3.0], 1e-14));
        assert!(s.is_positive());
        let r2 = std::f64::consts::SQRT_2;
        let s = lax(&[2.0, 2.0, 2.0], &[1.0, 1.0]).spectrum().unwrap();
        assert!(close(s.lambdas(), &[2.0 - r2, 2.0, 2.0 + r2], 1e-14));
        assert!(matches!(
            lax(&[0.0, 0.0], &[-1.0]).spectrum(),
            Err(Error::NonRealSpectrum { .. })
        ));
    }

    #[test]
    fn negative_b_with_real_spectrum_uses_roots() {
        // [[3,1],[-1,0]]: λ² - 3λ + 1
        let s = lax(&[3.0, 0.0], &[-1.0]).spectrum().unwrap();
        let d = 5f64.sqrt();
        assert!(close(
            s.lambdas(),
            &[(3.0 - d) / 2.0, (3.0 + d) / 2.0],
            1e-13
        ));
    }

    #[test]
    fn spectrum_validation() {
        assert!(matches!(
            Spectrum::new(vec![1.0, 1.0]),
            Err(Error::NotIncreasing { .. })
        ));
        assert!(matches!(
            Spectrum::new(vec![3.0, 1.0]),
            Err(Error::NotIncreasing { .. })
        ));
        assert!(matches!(
            Spectrum::new(vec![1.0, 1.0 + 1e-12]),
            Err(Error::NonSimpleSpectrum { .. })
        ));
        assert!(Spectrum::with_separation(vec![1.0, 1.0 + 1e-12], 1e-14).is_ok());
        assert!(!Spectrum::new(vec![-1.0, 1.0]).unwrap().is_positive());
        let s: Spectrum = serde_json::from_str("[1, 3]").unwrap();
        assert_eq!(s.lambdas(), &[1.0, 3.0]);
        let s: Spectrum = serde_json::from_str(r#"{"lambdas":[1,2,4]}"#).unwrap();
        assert_eq!(s.vandermonde(), 1.0 * 3.0 * 2.0);
        assert!(serde_json::from_str::<Spectrum>("[3, 1]").is_err());
    }

    #[test]
    fn chop_integral_examples() {
        assert_eq!(
            lax(&[2.0, 2.0], &[1.0]).chop_integral().coeffs(),
            &[2.0, -1.0]
        );
        assert_eq!(
            lax(&[2.0, 2.0, 2.0], &[1.0, 1.0]).chop_integral().coeffs(),
            &[3.0, -4.0, 1.0]
        );
        assert_eq!(
            lax(&[0.7, -1.5], &[0.3]).chop_integral().coeffs(),
            &[-1.5, -1.0]
        );
        let l = lax(&[1.0, -2.0, 0.5, 3.0], &[0.4, 2.0, -1.0]);
        let p = l.chop_integral();
        assert_eq!(p.leading(), -1.0);
        for x in [-1.3, 0.0, 2.2] {
            assert!((p.eval(x) - l.chop_integral_at(x).0).abs() < 1e-12);
        }
    }

    #[test]
    fn cofactor_vector_examples() {
        let (vm, vp) = lax(&[2.0, 2.0], &[1.0]).cofactor_vectors();
        assert_eq!(vm.entries[0].coeffs(), &[1.0]);
        assert_eq!(vm.entries[1].coeffs(), &[-2.0, 1.0]);
        assert_eq!(vp.entries[0].coeffs(), &[2.0, -1.0]);
        assert_eq!(vp.entries[1].coeffs(), &[-1.0]);

        let (vm, vp) = lax(&[2.0, 2.0, 2.0], &[1.0, 1.0]).cofactor_vectors();
        assert_eq!(vm.entries[0].coeffs(), &[1.0]);
        assert_eq!(vp.entries[0].coeffs(), &[3.0, -4.0, 1.0]);
        assert_eq!(vp.entries[1].coeffs(), &[-2.0, 1.0]);
        assert_eq!(vp.entries[2].coeffs(), &[1.0]);
    }

    #[test]
    fn cofactor_degrees_and_leading_coefficients() {
        let l = lax(&[1.0, 2.0, -1.0, 0.5], &[2.0, -0.5, 3.0]);
        let n = l.n();
        let (vm, vp) = l.cofactor_vectors();
        let sign = if n % 2 == 0 { -1.0 } else { 1.0 };
        let mut bprod = 1.0;
        for i in 0..n {
            assert_eq!(vm.entries[i].degree(), i);
            assert_eq!(vm.entries[i].leading(), 1.0);
            if i > 0 {
                bprod *= l.b()[i - 1];
            }
            assert_eq!(vp.entries[i].degree(), n - 1 - i);
            assert!((vp.entries[i].leading() - sign * bprod).abs() < 1e-14);
        }
    }

    #[test]
    fn divisor_examples() {
        let l = lax(&[2.0, 2.0], &[1.0]);
        let d1 = l.divisor_of_component(1).unwrap();
        assert!(d1.minus.is_empty());
        assert_eq!(d1.plus.len(), 1);
        assert!((d1.plus[0].re - 2.0).abs() < 1e-14 && !d1.plus[0].off_axis);
        let d2 = l.divisor_of_component(2).unwrap();
        assert_eq!(d2.minus.len(), 1);
        assert!((d2.minus[0].re - 2.0).abs() < 1e-14);
        assert!(d2.plus.is_empty());
        assert!(matches!(l.divisor_of_component(3), Err(Error::BadIndex(_))));

        let l = lax(&[0.5, 1.0, 2.0, 1.5], &[0.3, 0.8, 1.1]);
        for k in 1..=4 {
            let d = l.divisor_of_component(k).unwrap();
            assert_eq!(d.minus.len(), k - 1);
            assert_eq!(d.plus.len(), 4 - k);
        }
    }

    #[test]
    fn complex_divisor_is_flagged() {
        // v_+[1] = Δ_{1,1} = 0·... for n=3 with negative b: (λ-a2)(λ-a3) - b2
        let l = lax(&[0.0, 0.0, 0.0], &[1.0, -1.0]);
        let d = l.divisor_of_component(1).unwrap();
        assert!(d.plus.iter().all(|r| r.off_axis));
    }

    #[test]
    fn sturm_counts() {
        let d = [1.0, 3.0];
        let e = [-1.0];
        assert_eq!(sturm_count(&d, &e, 0.0), 0);
        assert_eq!(sturm_count(&d, &e, 1.0), 1);
        assert_eq!(sturm_count(&d, &e, 4.0), 2);
    }
}
