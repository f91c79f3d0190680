//! The generalized Jacobi variety of the nodal spectral curve: degenerate
//! theta functions, tau functions, the linearization map `L ↦ [Δ_{1,1}(λ_i)]`
//! and its inverse, the linear flow, and the sign components of the real part.

use crate::dense::{log_det_scaled, LogScaled};
use crate::error::{Error, Result};
use crate::ext::{dd_div, Ext};
use crate::lax::{refine_eigenvalue, LaxMatrix, Spectrum};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use twofloat::TwoFloat;

/// Relative size below which a tau determinant counts as zero.
pub const GENERAL_TOL: f64 = 1e-12;

/// A point `[f_1 : … : f_N]` of the real Jacobi variety, stored with `f_1 = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PointRepr", into = "PointRepr")]
pub struct JacobiPoint {
    f: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct PointRepr {
    f: Vec<f64>,
}

impl TryFrom<PointRepr> for JacobiPoint {
    type Error = Error;
    fn try_from(r: PointRepr) -> Result<Self> {
        JacobiPoint::new(r.f)
    }
}

impl From<JacobiPoint> for PointRepr {
    fn from(p: JacobiPoint) -> Self {
        PointRepr { f: p.f }
    }
}

impl JacobiPoint {
    /// Normalizes a raw nonvanishing tuple by its first entry.
    pub fn new(raw: Vec<f64>) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::InvalidSize { n: 0 });
        }
        if let Some(i) = raw.iter().position(|&x| x == 0.0) {
            return Err(Error::ZeroComponent { index: i + 1 });
        }
        if raw.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("Jacobi point"));
        }
        let first = raw[0];
        let f: Vec<f64> = raw.into_iter().map(|x| x / first).collect();
        if f.iter().any(|x| !x.is_finite() || *x == 0.0) {
            return Err(Error::NonFinite("normalized Jacobi point"));
        }
        Ok(JacobiPoint { f })
    }

    pub fn n(&self) -> usize {
        self.f.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.f
    }

    /// Largest componentwise distance between normalized representatives,
    /// relative to the component size.
    pub fn distance(&self, other: &JacobiPoint) -> f64 {
        self.f
            .iter()
            .zip(&other.f)
            .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()))
            .fold(0.0, f64::max)
    }
}

/// Signs of `f_2 … f_N` under the `f_1 = 1` normalization.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignComponent {
    pub signs: Vec<i8>,
}

impl SignComponent {
    /// The alternating pattern `(-, +, -, …)` of the positive cone.
    pub fn positive_cone(n: usize) -> Self {
        SignComponent {
            signs: (0..n.saturating_sub(1))
                .map(|i| if i % 2 == 0 { -1 } else { 1 })
                .collect(),
        }
    }

    /// All `2^{n-1}` components.
    pub fn all(n: usize) -> Vec<SignComponent> {
        let m = n.saturating_sub(1);
        (0..1usize << m)
            .map(|mask| SignComponent {
                signs: (0..m)
                    .map(|i| if mask >> i & 1 == 1 { -1 } else { 1 })
                    .collect(),
            })
            .collect()
    }

    pub fn is_positive_cone(&self) -> bool {
        self.signs
            .iter()
            .enumerate()
            .all(|(i, &s)| s == if i % 2 == 0 { -1 } else { 1 })
    }
}

impl fmt::Display for SignComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.signs {
            f.write_str(if s > 0 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

impl FromStr for SignComponent {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '+' => Ok(1),
                '-' | '\u{2212}' => Ok(-1),
                _ => Err(Error::InvalidArgument(format!("bad sign character {c:?}"))),
            })
            .collect::<Result<Vec<i8>>>()
            .map(|signs| SignComponent { signs })
    }
}

impl Serialize for SignComponent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SignComponent {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

pub fn sign_component(f: &JacobiPoint) -> (SignComponent, bool) {
    let c = SignComponent {
        signs: f.f[1..]
            .iter()
            .map(|&x| if x > 0.0 { 1 } else { -1 })
            .collect(),
    };
    let cone = c.is_positive_cone();
    (c, cone)
}

/// The sign `ε_k` attached to the k-th tau determinant. It is the constant
/// sign of every Laplace-expansion term on the positive cone, so cone points
/// have all `τ_k > 0`.
pub fn tau_sign(n: usize, k: usize) -> f64 {
    // k(N-1) - k(k-1)/2 = k(2N-k-1)/2, nonnegative for k <= N
    if (k * (2 * n - k - 1) / 2).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Columns `(1, λ, …, λ^{N-k-1}, F, Fλ, …, Fλ^{k-1})`, or for the primed
/// variant the last F-power raised from `k-1` to `k`.
fn tau_matrix(lambdas: &[f64], f: &[f64], k: usize, prime: bool) -> DMatrix<f64> {
    let n = lambdas.len();
    let plain = n - k;
    DMatrix::from_fn(n, n, |i, j| {
        let l = lambdas[i];
        if j < plain {
            l.powi(j as i32)
        } else {
            let mut p = j - plain;
            if prime && p == k - 1 {
                p = k;
            }
            f[i] * l.powi(p as i32)
        }
    })
}

/// `θ_k(Z)`: the k-th degenerate theta function for positive `Z`.
pub fn theta(k: usize, z: &[f64], spec: &Spectrum) -> Result<f64> {
    let n = spec.n();
    if z.len() != n {
        return Err(Error::LengthMismatch(format!(
            "Z has {} entries, spectrum {}",
            z.len(),
            n
        )));
    }
    if k > n {
        return Err(Error::BadIndex(format!("theta index {k} outside 0..={n}")));
    }
    if let Some(i) = z.iter().position(|&x| !(x > 0.0)) {
        return Err(Error::NonPositiveZ { index: i + 1 });
    }
    let (d, _) = log_det_scaled(&tau_matrix(spec.lambdas(), z, k, false));
    let half_ln_prod: f64 = 0.5 * z.iter().map(|x| x.ln()).sum::<f64>();
    Ok(LogScaled {
        sign: d.sign,
        ln: d.ln - half_ln_prod,
    }
    .value())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TauSequence {
    pub tau: Vec<f64>,
    pub tau_prime: Vec<f64>,
}

/// Tau determinants in log form, with the cancellation measure used for
/// the generality test.
#[derive(Debug, Clone)]
pub(crate) struct LogTau {
    pub tau: Vec<LogScaled>,
    pub tau_prime: Vec<LogScaled>,
    /// `ln(|τ_k| / Σ_I |term_I|)` over the terms of the Laplace expansion
    /// along the F columns; zero when no cancellation occurs.
    pub relative: Vec<f64>,
}

/// Above this size the tau functions are evaluated by elimination instead
/// of the subset expansion.
const LAPLACE_MAX: usize = 16;

/// Signed sum of `sign · e^{ln}` terms, and `ln(|sum| / Σ|terms|)`.
fn signed_log_sum(terms: &[(f64, f64)]) -> (LogScaled, f64) {
    let m = terms.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return (LogScaled::ZERO, f64::NEG_INFINITY);
    }
    let (mut pos, mut neg) = (0.0, 0.0);
    for &(sign, ln) in terms {
        let v = (ln - m).exp();
        if sign > 0.0 {
            pos += v;
        } else {
            neg += v;
        }
    }
    let diff = pos - neg;
    if diff == 0.0 {
        return (LogScaled::ZERO, f64::NEG_INFINITY);
    }
    (
        LogScaled {
            sign: diff.signum(),
            ln: m + diff.abs().ln(),
        },
        (diff.abs() / (pos + neg)).ln(),
    )
}

/// Laplace expansion along the F columns: with rows `I` (1-based),
/// `τ_k = ε_k Σ_{|I|=k} (-1)^{ΣI + ΣC} ∏_{i∈I} F_i · V(λ_I) · V(λ_{I^c})`,
/// where `C` are the last `k` columns. The primed variant carries an extra
/// factor `Σ_{i∈I} λ_i`.
fn log_tau_laplace(lambdas: &[f64], f: &[f64]) -> LogTau {
    let n = lambdas.len();
    let mut gaps = vec![vec![0.0; n]; n];
    let mut ln_vand = 0.0;
    for a in 0..n {
        for b in (a + 1)..n {
            let g = (lambdas[b] - lambdas[a]).abs().ln();
            gaps[a][b] = g;
            gaps[b][a] = g;
            ln_vand += g;
        }
    }
    let mut terms: Vec<Vec<(f64, f64)>> = vec![Vec::new(); n + 1];
    let mut terms_prime: Vec<Vec<(f64, f64)>> = vec![Vec::new(); n + 1];
    for mask in 0u32..(1u32 << n) {
        let k = mask.count_ones() as usize;
        let (mut sign, mut ln, mut row_sum, mut e1) = (1.0, ln_vand, 0usize, 0.0);
        for i in 0..n {
            if mask & (1 << i) != 0 {
                sign *= f[i].signum();
                ln += f[i].abs().ln();
                row_sum += i + 1;
                e1 += lambdas[i];
                for j in 0..n {
                    if mask & (1 << j) == 0 {
                        ln -= gaps[i][j];
                    }
                }
            }
        }
        let col_sum = k * (2 * n - k + 1) / 2;
        if (row_sum + col_sum) % 2 == 1 {
            sign = -sign;
        }
        sign *= tau_sign(n, k);
        terms[k].push((sign, ln));
        if e1 != 0.0 {
            terms_prime[k].push((sign * e1.signum(), ln + e1.abs().ln()));
        }
    }
    let mut out = LogTau {
        tau: Vec::new(),
        tau_prime: Vec::new(),
        relative: Vec::new(),
    };
    for k in 0..=n {
        let (t, rel) = signed_log_sum(&terms[k]);
        out.tau.push(t);
        out.relative.push(rel);
        out.tau_prime.push(if k == 0 {
            LogScaled::ZERO
        } else {
            signed_log_sum(&terms_prime[k]).0
        });
    }
    out
}

/// Elimination fallback for large sizes; the cancellation measure compares
/// column-normalized determinants with the normalized Vandermonde.
fn log_tau_elimination(lambdas: &[f64], f: &[f64]) -> LogTau {
    let n = lambdas.len();
    let mut out = LogTau {
        tau: Vec::new(),
        tau_prime: Vec::new(),
        relative: Vec::new(),
    };
    let mut vand_scaled = 0.0;
    for k in 0..=n {
        let eps = tau_sign(n, k);
        let (d, scales) = log_det_scaled(&tau_matrix(lambdas, f, k, false));
        if k == 0 {
            vand_scaled = d.ln - scales;
        }
        out.relative.push((d.ln - scales - vand_scaled).min(0.0));
        out.tau.push(LogScaled {
            sign: eps * d.sign,
            ln: d.ln,
        });
        if k == 0 {
            out.tau_prime.push(LogScaled::ZERO);
        } else {
            let (dp, _) = log_det_scaled(&tau_matrix(lambdas, f, k, true));
            out.tau_prime.push(LogScaled {
                sign: eps * dp.sign,
                ln: dp.ln,
            });
        }
    }
    out
}

pub(crate) fn log_tau(spec: &Spectrum, f: &[f64]) -> Result<LogTau> {
    let n = spec.n();
    if f.len() != n {
        return Err(Error::LengthMismatch(format!(
            "F has {} entries, spectrum {}",
            f.len(),
            n
        )));
    }
    if let Some(i) = f.iter().position(|x| *x == 0.0 || !x.is_finite()) {
        return Err(Error::ZeroComponent { index: i + 1 });
    }
    Ok(if n <= LAPLACE_MAX {
        log_tau_laplace(spec.lambdas(), f)
    } else {
        log_tau_elimination(spec.lambdas(), f)
    })
}

/// Above this size [`ext_tau`] falls back to the log-form values.
const EXTENDED_MAX: usize = 12;

/// `τ_k` and `τ'_k` from the same expansion as [`log_tau`], with every
/// term, gap and sum in double-double arithmetic so that the ratios in
/// [`reconstruct`] survive heavy cancellation.
fn ext_tau(spec: &Spectrum, f: &[f64]) -> Result<(Vec<Ext>, Vec<Ext>)> {
    let n = spec.n();
    if n > EXTENDED_MAX {
        let lt = log_tau(spec, f)?;
        let conv = |v: &[LogScaled]| v.iter().map(|x| Ext::from_log(x.sign, x.ln)).collect();
        return Ok((conv(&lt.tau), conv(&lt.tau_prime)));
    }
    if f.len() != n {
        return Err(Error::LengthMismatch(format!(
            "F has {} entries, spectrum {}",
            f.len(),
            n
        )));
    }
    if let Some(i) = f.iter().position(|x| *x == 0.0 || !x.is_finite()) {
        return Err(Error::ZeroComponent { index: i + 1 });
    }
    let lambdas = spec.lambdas();
    let mut gaps = vec![vec![Ext::ZERO; n]; n];
    for a in 0..n {
        for b in (a + 1)..n {
            let g = Ext::from_dd(TwoFloat::from(lambdas[b]) - lambdas[a]);
            gaps[a][b] = g;
            gaps[b][a] = g;
        }
    }
    let mut tau = vec![Ext::ZERO; n + 1];
    let mut tau_prime = vec![Ext::ZERO; n + 1];
    for mask in 0u32..(1u32 << n) {
        let k = mask.count_ones() as usize;
        let inside = |i: usize| mask & (1 << i) != 0;
        let mut term = Ext::from_f64(tau_sign(n, k));
        let mut row_sum = 0usize;
        let mut e1 = TwoFloat::from(0.0);
        for i in 0..n {
            if inside(i) {
                term = term.mul(Ext::from_f64(f[i]));
                row_sum += i + 1;
                e1 += lambdas[i];
            }
            for j in (i + 1)..n {
                if inside(i) == inside(j) {
                    term = term.mul(gaps[i][j]);
                }
            }
        }
        if (row_sum + k * (2 * n - k + 1) / 2) % 2 == 1 {
            term = term.neg();
        }
        tau[k] = tau[k].add(term);
        if k > 0 {
            tau_prime[k] = tau_prime[k].add(term.mul(Ext::from_dd(e1)));
        }
    }
    Ok((tau, tau_prime))
}

/// `τ_k = ε_k det(1, …, λ^{N-k-1}, F, …, Fλ^{k-1})` and
/// `τ'_k = ε_k det(1, …, λ^{N-k-1}, F, …, Fλ^{k-2}, Fλ^k)` for `k = 0..=N`,
/// with `τ'_0 = 0`. `f` may be any nonvanishing tuple.
pub fn tau_sequence(spec: &Spectrum, f: &[f64]) -> Result<TauSequence> {
    let (tau, tau_prime) = ext_tau(spec, f)?;
    Ok(TauSequence {
        tau: tau.iter().map(|x| x.to_f64()).collect(),
        tau_prime: tau_prime.iter().map(|x| x.to_f64()).collect(),
    })
}

/// Index of the first tau function that vanishes at `f`, if any.
fn first_vanishing(lt: &LogTau) -> Option<usize> {
    let ln_tol = GENERAL_TOL.ln();
    (1..lt.tau.len()).find(|&k| lt.tau[k].is_zero() || lt.relative[k] <= ln_tol)
}

/// `min_k |τ_k| / Σ_I |term_I|`: how far `f` is from the non-general locus,
/// 1 on the positive cone and 0 at non-general points.
pub fn generality_margin(spec: &Spectrum, f: &JacobiPoint) -> Result<f64> {
    let lt = log_tau(spec, f.as_slice())?;
    Ok(lt.relative.iter().fold(0.0f64, |m, r| m.min(*r)).exp())
}

/// All `τ_k` nonzero relative to the size of their expansion terms.
pub fn is_general_point(spec: &Spectrum, f: &JacobiPoint) -> bool {
    match log_tau(spec, f.as_slice()) {
        Ok(lt) => first_vanishing(&lt).is_none(),
        Err(_) => false,
    }
}

/// Rescales so the largest component has magnitude one.
fn max_normalized(f: &[f64]) -> Vec<f64> {
    let m = f.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    f.iter().map(|x| x / m).collect()
}

/// The inverse of the linearization: the Lax matrix with
/// `b_n = τ_{n-1}τ_{n+1}/τ_n²` and `a_n = τ'_n/τ_n - τ'_{n-1}/τ_{n-1}`.
pub fn reconstruct(spec: &Spectrum, f: &JacobiPoint) -> Result<LaxMatrix> {
    let n = spec.n();
    if f.n() != n {
        return Err(Error::LengthMismatch(format!(
            "F has {} entries, spectrum {}",
            f.n(),
            n
        )));
    }
    let scaled = max_normalized(f.as_slice());
    let lt = log_tau(spec, &scaled)?;
    if let Some(k) = first_vanishing(&lt) {
        return Err(Error::NonGeneralDivisor { k });
    }
    let (t, tp) = ext_tau(spec, &scaled)?;
    let b = (1..n)
        .map(|m| t[m - 1].mul(t[m + 1]).div(t[m].mul(t[m])).to_f64())
        .collect();
    let a = (1..=n)
        .map(|m| (tp[m].div(t[m]).to_dd() - tp[m - 1].div(t[m - 1]).to_dd()).hi())
        .collect();
    LaxMatrix::new(a, b)
}

/// `Φ(L) = [Δ_{1,1}(λ_1) : … : Δ_{1,1}(λ_N)]`.
pub fn abel_jacobi(l: &LaxMatrix) -> Result<JacobiPoint> {
    let spec = l.spectrum()?;
    abel_jacobi_with_spectrum(l, &spec)
}

/// `(R_1, R_1', R_2, bound(R_2))` at `x` in double-double arithmetic, where
/// `R_k = det(x - L[k..N])` follows the continuant recurrence from the
/// bottom and the bound sums the magnitudes of the recurrence terms.
fn trailing_continuants(a: &[f64], b: &[f64], x: TwoFloat) -> (TwoFloat, TwoFloat, TwoFloat, f64) {
    let n = a.len();
    let one = TwoFloat::from(1.0);
    let zero = TwoFloat::from(0.0);
    // (R_{k+1}, R_{k+2}) and derivatives, starting below the last row
    let (mut r1, mut r2) = (one, zero);
    let (mut d1, mut d2) = (zero, zero);
    let (mut m1, mut m2) = (1.0, 0.0);
    let mut r_second = one;
    let mut m_second = 1.0;
    for k in (0..n).rev() {
        let shift = x - a[k];
        let c = if k + 1 < n { b[k] } else { 0.0 };
        let r = shift * r1 - r2 * c;
        let d = r1 + shift * d1 - d2 * c;
        let m = (x.hi().abs() + a[k].abs()) * m1 + c.abs() * m2;
        if k == 1 {
            r_second = r;
            m_second = m;
        }
        (r2, r1, d2, d1, m2, m1) = (r1, r, d1, d, m1, m);
    }
    (r1, d1, r_second, m_second)
}

/// Eigenvalue `index` of `L` refined to double-double precision from the
/// estimate `lambda`: bisection when `L` is symmetrizable, otherwise Newton
/// steps confined to `lambda ± radius`.
fn refine_lax_eigenvalue(l: &LaxMatrix, index: usize, lambda: f64, radius: f64) -> TwoFloat {
    if l.b().iter().all(|&b| b > 0.0) {
        return refine_eigenvalue(l.a(), l.b(), index, lambda);
    }
    let start = TwoFloat::from(lambda);
    let mut x = start;
    for _ in 0..8 {
        let (p, dp, _, _) = trailing_continuants(l.a(), l.b(), x);
        if p.hi() == 0.0 || dp.hi() == 0.0 {
            break;
        }
        let step = dd_div(p, dp);
        let next = x - step;
        if !((next - start).hi().abs() <= radius) {
            return x;
        }
        x = next;
        if step.hi().abs() <= 4.0 * f64::EPSILON * f64::EPSILON * x.hi().abs() {
            break;
        }
    }
    x
}

/// Same as [`abel_jacobi`] with a precomputed spectrum.
///
/// Each eigenvalue is refined to double-double precision and
/// `Δ_{1,1}(λ_j) = (-1)^{N-1} det(λ_j - L[2..N])` is evaluated by the
/// continuant recurrence in double-double arithmetic. This keeps full
/// relative accuracy when `λ_j` nearly coincides with an eigenvalue of the
/// trailing block, or when `L` is far from normal.
pub fn abel_jacobi_with_spectrum(l: &LaxMatrix, spec: &Spectrum) -> Result<JacobiPoint> {
    let n = l.n();
    if spec.n() != n {
        return Err(Error::LengthMismatch(format!(
            "spectrum has {} values, matrix size {}",
            spec.n(),
            n
        )));
    }
    let lambdas = spec.lambdas();
    let sign = if n.is_multiple_of(2) { -1.0 } else { 1.0 };
    let values = (0..n)
        .map(|i| {
            let gap = [
                i.checked_sub(1).map(|j| lambdas[i] - lambdas[j]),
                lambdas.get(i + 1).map(|x| x - lambdas[i]),
            ]
            .into_iter()
            .flatten()
            .fold(f64::INFINITY, f64::min);
            let x = refine_lax_eigenvalue(l, i, lambdas[i], 0.25 * gap);
            let (_, _, r, bound) = trailing_continuants(l.a(), l.b(), x);
            if r.hi().abs() <= 16.0 * n as f64 * f64::EPSILON * f64::EPSILON * bound {
                Err(Error::ZeroCofactorValue { index: i + 1 })
            } else {
                Ok(sign * r.hi())
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    JacobiPoint::new(values)
}

/// The linear flow `[e^{tλ_1}F_1 : … : e^{tλ_N}F_N]`, exponentiated after
/// subtracting the largest exponent.
pub fn evolve_point(f0: &JacobiPoint, spec: &Spectrum, t: f64) -> JacobiPoint {
    let logs: Vec<f64> = f0
        .as_slice()
        .iter()
        .zip(spec.lambdas())
        .map(|(f, l)| f.abs().ln() + t * l)
        .collect();
    let shift = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let raw: Vec<f64> = f0
        .as_slice()
        .iter()
        .zip(&logs)
        .map(|(f, g)| f.signum() * (g - shift).exp())
        .collect();
    let first = raw[0];
    JacobiPoint {
        f: raw.into_iter().map(|x| x / first).collect(),
    }
}
