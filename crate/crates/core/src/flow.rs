//! Time evolution of the Toda lattice `dL/dt = [L, L_-]` by three
//! independent routes: the tau-function closed form, the factorization of
//! `exp(tL_0)`, and fixed-step RK4 on the band coordinates.

use crate::error::{Error, Result};
use crate::jacobi::{
    abel_jacobi_with_spectrum, evolve_point, log_tau, reconstruct, JacobiPoint, GENERAL_TOL,
};
use crate::lax::{LaxMatrix, Spectrum};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// `|b_n|` above this aborts RK4 integration.
pub const OVERFLOW_THRESHOLD: f64 = 1e12;

/// Tolerance on the superdiagonal after conjugation in [`solve_symes`].
pub const STRUCTURE_TOL: f64 = 1e-9;

/// Grid resolution of [`detect_blowup`].
pub const BLOWUP_GRID: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Tau,
    Symes,
    Rk4,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Tau => "tau",
            Method::Symes => "symes",
            Method::Rk4 => "rk4",
        })
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tau" => Ok(Method::Tau),
            "symes" => Ok(Method::Symes),
            "rk4" => Ok(Method::Rk4),
            _ => Err(Error::InvalidArgument(format!("unknown method {s:?}"))),
        }
    }
}

/// `exp(tL_0) = exp(log_scale) * scaled`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledExp {
    pub scaled: DMatrix<f64>,
    pub log_scale: f64,
}

impl ScaledExp {
    pub fn to_matrix(&self) -> DMatrix<f64> {
        &self.scaled * self.log_scale.exp()
    }
}

/// `exp(tL_0)` by Lagrange interpolation on the eigenvalues:
/// `Σ_i e^{tλ_i} ∏_{j≠i} (L_0 - λ_j E)/(λ_i - λ_j)`.
pub fn matrix_exp_spectral(l0: &LaxMatrix, t: f64) -> Result<ScaledExp> {
    let spec = l0.spectrum()?;
    Ok(matrix_exp_with_spectrum(l0, &spec, t))
}

pub fn matrix_exp_with_spectrum(l0: &LaxMatrix, spec: &Spectrum, t: f64) -> ScaledExp {
    let n = l0.n();
    let lambdas = spec.lambdas();
    let m = l0.to_dense();
    let shift = lambdas
        .iter()
        .map(|l| t * l)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut out = DMatrix::zeros(n, n);
    for (i, &li) in lambdas.iter().enumerate() {
        let mut p = DMatrix::<f64>::identity(n, n);
        for (j, &lj) in lambdas.iter().enumerate() {
            if j != i {
                let mut factor = m.clone();
                for d in 0..n {
                    factor[(d, d)] -= lj;
                }
                p = p * factor / (li - lj);
            }
        }
        out += p * (t * li - shift).exp();
    }
    ScaledExp {
        scaled: out,
        log_scale: shift,
    }
}

/// Doolittle factorization `M = N R` with `N` unit lower triangular and `R`
/// upper triangular, without pivoting.
pub fn lu_unit_lower(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if !m.is_square() {
        return Err(Error::LengthMismatch(format!(
            "{}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    let n = m.nrows();
    let threshold = n as f64 * f64::EPSILON * m.amax();
    let mut lower = DMatrix::<f64>::identity(n, n);
    let mut upper = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        for j in k..n {
            let s: f64 = (0..k).map(|p| lower[(k, p)] * upper[(p, j)]).sum();
            upper[(k, j)] = m[(k, j)] - s;
        }
        let pivot = upper[(k, k)];
        if !(pivot.abs() > threshold) {
            return Err(Error::SingularLeadingMinor { k: k + 1 });
        }
        for i in (k + 1)..n {
            let s: f64 = (0..k).map(|p| lower[(i, p)] * upper[(p, k)]).sum();
            lower[(i, k)] = (m[(i, k)] - s) / pivot;
        }
    }
    Ok((lower, upper))
}

/// Reads the bands of a conjugated matrix back into a Lax matrix, checking
/// that the superdiagonal stayed at one.
fn read_lax(m: &DMatrix<f64>) -> Result<LaxMatrix> {
    let n = m.nrows();
    let scale = m.amax().max(1.0);
    let deviation = (1..n)
        .map(|i| (m[(i - 1, i)] - 1.0).abs())
        .fold(0.0, f64::max);
    if !(deviation <= STRUCTURE_TOL * scale) {
        return Err(Error::StructureLost { deviation });
    }
    LaxMatrix::new(
        (0..n).map(|i| m[(i, i)]).collect(),
        (1..n).map(|i| m[(i, i - 1)]).collect(),
    )
}

/// `L(t) = N^{-1} L_0 N` where `exp(tL_0) = N R`.
pub fn solve_symes(l0: &LaxMatrix, t: f64) -> Result<LaxMatrix> {
    let spec = l0.spectrum()?;
    solve_symes_with_spectrum(l0, &spec, t)
}

/// Longest exponent spread `|t|·(λ_max − λ_min)` handled by one factorization.
/// Beyond it the pivots of `exp(tL_0)` drop below double precision relative
/// to the leading entry, so longer times are split into equal steps.
const SYMES_SPREAD: f64 = 8.0;

pub fn solve_symes_with_spectrum(l0: &LaxMatrix, spec: &Spectrum, t: f64) -> Result<LaxMatrix> {
    let lambdas = spec.lambdas();
    let spread = lambdas[lambdas.len() - 1] - lambdas[0];
    let steps = ((t.abs() * spread) / SYMES_SPREAD).ceil().max(1.0) as usize;
    let dt = t / steps as f64;
    let mut l = l0.clone();
    for step in 1..=steps {
        let elapsed = if step == steps { t } else { dt * step as f64 };
        l = symes_step(&l, spec, dt).map_err(|err| match err {
            Error::Blowup { k, .. } => Error::Blowup { t: elapsed, k },
            other => other,
        })?;
    }
    Ok(l)
}

fn symes_step(l0: &LaxMatrix, spec: &Spectrum, t: f64) -> Result<LaxMatrix> {
    let e = matrix_exp_with_spectrum(l0, spec, t);
    let (lower, _) = lu_unit_lower(&e.scaled).map_err(|err| match err {
        Error::SingularLeadingMinor { k } => Error::Blowup { t, k },
        other => other,
    })?;
    let rhs = l0.to_dense() * &lower;
    // forward substitution with the unit lower factor
    let n = l0.n();
    let mut x = rhs;
    for i in 0..n {
        for p in 0..i {
            let li = lower[(i, p)];
            if li != 0.0 {
                for j in 0..n {
                    let v = x[(p, j)];
                    x[(i, j)] -= li * v;
                }
            }
        }
    }
    read_lax(&x)
}

/// Closed-form state: reconstruct the evolved Jacobi point.
pub fn solve_tau(l0: &LaxMatrix, t: f64) -> Result<LaxMatrix> {
    let spec = l0.spectrum()?;
    let f0 = abel_jacobi_with_spectrum(l0, &spec)?;
    solve_tau_from_point(&spec, &f0, t)
}

pub fn solve_tau_from_point(spec: &Spectrum, f0: &JacobiPoint, t: f64) -> Result<LaxMatrix> {
    reconstruct(spec, &evolve_point(f0, spec, t)).map_err(|err| match err {
        Error::NonGeneralDivisor { k } => Error::Blowup { t, k },
        other => other,
    })
}

/// Band coordinates `(a_1..a_N, b_1..b_{N-1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandState {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl BandState {
    pub fn from_lax(l: &LaxMatrix) -> Self {
        BandState {
            a: l.a().to_vec(),
            b: l.b().to_vec(),
        }
    }

    /// `[L, L_-]` on the bands: `ȧ_n = b_n - b_{n-1}`, `ḃ_n = b_n (a_{n+1} - a_n)`.
    pub fn derivative(&self) -> BandState {
        let n = self.a.len();
        let mut da = vec![0.0; n];
        for (i, &bi) in self.b.iter().enumerate() {
            da[i] += bi;
            da[i + 1] -= bi;
        }
        let db = self
            .b
            .iter()
            .enumerate()
            .map(|(i, bi)| bi * (self.a[i + 1] - self.a[i]))
            .collect();
        BandState { a: da, b: db }
    }

    fn axpy(&self, h: f64, d: &BandState) -> BandState {
        BandState {
            a: self.a.iter().zip(&d.a).map(|(x, y)| x + h * y).collect(),
            b: self.b.iter().zip(&d.b).map(|(x, y)| x + h * y).collect(),
        }
    }

    pub fn rk4_step(&self, h: f64) -> BandState {
        let k1 = self.derivative();
        let k2 = self.axpy(0.5 * h, &k1).derivative();
        let k3 = self.axpy(0.5 * h, &k2).derivative();
        let k4 = self.axpy(h, &k3).derivative();
        let combine = |x: &[f64], d1: &[f64], d2: &[f64], d3: &[f64], d4: &[f64]| -> Vec<f64> {
            (0..x.len())
                .map(|i| x[i] + h / 6.0 * (d1[i] + 2.0 * d2[i] + 2.0 * d3[i] + d4[i]))
                .collect()
        };
        BandState {
            a: combine(&self.a, &k1.a, &k2.a, &k3.a, &k4.a),
            b: combine(&self.b, &k1.b, &k2.b, &k3.b, &k4.b),
        }
    }

    pub fn to_lax(&self) -> Result<LaxMatrix> {
        LaxMatrix::new(self.a.clone(), self.b.clone())
    }
}

/// RK4 from `L_0` over a time span `t` (either sign) with `⌈|t|/dt⌉` steps,
/// the last one partial. `observe` sees the elapsed time and state after
/// every step.
pub fn integrate_rk4(
    l0: &LaxMatrix,
    t: f64,
    dt: f64,
    mut observe: impl FnMut(f64, &BandState),
) -> Result<LaxMatrix> {
    if !(dt > 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "rk4 needs dt > 0 and finite t (dt = {dt}, t = {t})"
        )));
    }
    let mut state = BandState::from_lax(l0);
    let steps = (t.abs() / dt).ceil() as usize;
    let h = dt.copysign(t);
    let mut elapsed = 0.0;
    for s in 0..steps {
        let step = if s + 1 == steps { t - elapsed } else { h };
        state = state.rk4_step(step);
        elapsed = if s + 1 == steps { t } else { elapsed + h };
        observe(elapsed, &state);
        if state
            .b
            .iter()
            .chain(&state.a)
            .any(|x| !x.is_finite() || x.abs() > OVERFLOW_THRESHOLD)
        {
            return Err(Error::Overflow { t: elapsed });
        }
    }
    state.to_lax()
}

pub fn solve_rk4(l0: &LaxMatrix, t: f64, dt: f64) -> Result<LaxMatrix> {
    integrate_rk4(l0, t, dt, |_, _| {})
}

/// A sampled solution. `states[i]` is the state at `times[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub method: Method,
    pub times: Vec<f64>,
    pub states: Vec<LaxMatrix>,
    pub blowup: Option<f64>,
}

impl Trajectory {
    /// CSV with header `t,a1..aN,b1..b{N-1}`; a blowup adds a trailing
    /// `# blowup t=<value>` line.
    pub fn to_csv(&self, n: usize) -> String {
        let mut out = String::from("t");
        for i in 1..=n {
            out.push_str(&format!(",a{i}"));
        }
        for i in 1..n {
            out.push_str(&format!(",b{i}"));
        }
        out.push('\n');
        for (t, l) in self.times.iter().zip(&self.states) {
            out.push_str(&format!("{t}"));
            for x in l.a().iter().chain(l.b()) {
                out.push_str(&format!(",{x}"));
            }
            out.push('\n');
        }
        if let Some(tb) = self.blowup {
            out.push_str(&format!("# blowup t={tb:.6}\n"));
        }
        out
    }
}

/// Sample times `t0, t0 + dt_out, …` strictly below `t1`, then `t1`.
pub fn sample_times(t0: f64, t1: f64, dt_out: f64) -> Vec<f64> {
    let span = t1 - t0;
    let eps = 1e-9 * dt_out.min(span);
    let mut times = Vec::new();
    let mut k = 0usize;
    loop {
        let t = t0 + k as f64 * dt_out;
        if t >= t1 - eps {
            break;
        }
        times.push(t);
        k += 1;
    }
    times.push(t1);
    times
}

/// Samples the flow starting from `l0`, taken as the state at `t0`.
/// Sampling stops before the first blowup, which is recorded.
pub fn trajectory(
    l0: &LaxMatrix,
    t0: f64,
    t1: f64,
    dt_out: f64,
    method: Method,
    rk4_dt: f64,
) -> Result<Trajectory> {
    if !(t0 < t1) || !(dt_out > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need t0 < t1 and dt_out > 0 (t0 = {t0}, t1 = {t1}, dt_out = {dt_out})"
        )));
    }
    let times_all = sample_times(t0, t1, dt_out);
    let mut traj = Trajectory {
        method,
        times: Vec::new(),
        states: Vec::new(),
        blowup: None,
    };
    match method {
        Method::Tau | Method::Symes => {
            let spec = l0.spectrum()?;
            let f0 = abel_jacobi_with_spectrum(l0, &spec)?;
            let scan = detect_blowup(&spec, &f0, 0.0, t1 - t0)?;
            let limit = scan.blowup;
            for &t in &times_all {
                let rel = t - t0;
                if limit.is_some_and(|b| rel >= b) {
                    traj.blowup = limit.map(|b| t0 + b);
                    break;
                }
                let state = match method {
                    _ if rel == 0.0 => Ok(l0.clone()),
                    Method::Tau => solve_tau_from_point(&spec, &f0, rel),
                    _ => solve_symes_with_spectrum(l0, &spec, rel),
                };
                match state {
                    Ok(l) => {
                        traj.times.push(t);
                        traj.states.push(l);
                    }
                    Err(Error::Blowup { .. }) => {
                        traj.blowup = Some(t);
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
        }
        Method::Rk4 => {
            let mut current = l0.clone();
            let mut prev = t0;
            for (i, &t) in times_all.iter().enumerate() {
                if i > 0 {
                    match solve_rk4(&current, t - prev, rk4_dt) {
                        Ok(l) => current = l,
                        Err(Error::Overflow { t: dt }) => {
                            traj.blowup = Some(prev + dt);
                            break;
                        }
                        Err(e) => return Err(e),
                    }
                }
                traj.times.push(t);
                traj.states.push(current.clone());
                prev = t;
            }
        }
    }
    Ok(traj)
}

/// A tau function that approaches zero on the grid without changing sign.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridMiss {
    pub k: usize,
    pub t: f64,
    pub relative_size: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlowupScan {
    pub blowup: Option<f64>,
    /// Index of the tau function vanishing at `blowup`.
    pub index: Option<usize>,
    pub grid_misses: Vec<GridMiss>,
}

/// Near-tangency threshold for [`GridMiss`] reports.
const TANGENCY_TOL: f64 = 1e-6;

/// Earliest `t` in `[t0, t1]` where some `τ_k(evolve_point(f0, t))` vanishes
/// (`f0` is the point at time zero). Sign changes on a uniform grid are
/// refined by bisection.
pub fn detect_blowup(spec: &Spectrum, f0: &JacobiPoint, t0: f64, t1: f64) -> Result<BlowupScan> {
    if !(t0 < t1) {
        return Err(Error::InvalidArgument(format!(
            "need t0 < t1 (t0 = {t0}, t1 = {t1})"
        )));
    }
    let n = spec.n();
    let ln_tol = GENERAL_TOL.ln();
    let eval = |t: f64| -> Result<(Vec<f64>, Vec<f64>)> {
        let lt = log_tau(spec, evolve_point(f0, spec, t).as_slice())?;
        let signs = (1..n)
            .map(|k| {
                if lt.relative[k] <= ln_tol {
                    0.0
                } else {
                    lt.tau[k].sign
                }
            })
            .collect();
        Ok((signs, lt.relative[1..n].to_vec()))
    };
    let step = (t1 - t0) / BLOWUP_GRID as f64;
    let grid: Vec<f64> = (0..=BLOWUP_GRID)
        .map(|j| {
            if j == BLOWUP_GRID {
                t1
            } else {
                t0 + j as f64 * step
            }
        })
        .collect();
    let values = grid.iter().map(|&t| eval(t)).collect::<Result<Vec<_>>>()?;

    let mut best: Option<(f64, usize)> = None;
    let mut misses = Vec::new();
    for k in 0..n - 1 {
        let mut root = None;
        for j in 0..grid.len() {
            let s = values[j].0[k];
            if s == 0.0 {
                root = Some(grid[j]);
                break;
            }
            if j + 1 < grid.len() && values[j + 1].0[k] != 0.0 && values[j + 1].0[k] != s {
                let (mut lo, mut hi) = (grid[j], grid[j + 1]);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi || hi - lo < 1e-13 * (1.0 + mid.abs()) {
                        break;
                    }
                    let sm = eval(mid)?.0[k];
                    if sm == 0.0 {
                        lo = mid;
                        hi = mid;
                        break;
                    }
                    if sm == s {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                root = Some(0.5 * (lo + hi));
                break;
            }
        }
        if let Some(r) = root {
            if best.is_none_or(|(b, _)| r < b) {
                best = Some((r, k + 1));
            }
        }
        for j in 1..grid.len().saturating_sub(1) {
            let r = values[j].1[k];
            let local_min = r <= values[j - 1].1[k] && r <= values[j + 1].1[k];
            let same_sign =
                values[j - 1].0[k] == values[j].0[k] && values[j].0[k] == values[j + 1].0[k];
            if local_min && same_sign && r.exp() < TANGENCY_TOL && root.is_none_or(|x| grid[j] < x)
            {
                misses.push(GridMiss {
                    k: k + 1,
                    t: grid[j],
                    relative_size: r.exp(),
                });
            }
        }
    }
    Ok(BlowupScan {
        blowup: best.map(|b| b.0),
        index: best.map(|b| b.1),
        grid_misses: misses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lax(a: &[f64], b: &[f64]) -> LaxMatrix {
        LaxMatrix::new(a.to_vec(), b.to_vec()).unwrap()
    }

    fn close(x: f64, y: f64, tol: f64) -> bool {
        (x - y).abs() <= tol * y.abs().max(1.0)
    }

    fn assert_state(l: &LaxMatrix, a: &[f64], b: &[f64], tol: f64) {
        for (x, y) in l.a().iter().zip(a).chain(l.b().iter().zip(b)) {
            assert!(close(*x, *y, tol), "{l:?} vs a={a:?} b={b:?}");
        }
    }

    const HALF_LN2: f64 = 0.34657359027997264;

    #[test]
    fn exp_two_point_formula() {
        let l0 = lax(&[2.0, 2.0], &[1.0]);
        for t in [-1.3, 0.0, 0.4, 2.0] {
            let e = matrix_exp_spectral(&l0, t).unwrap().to_matrix();
            let (p, q) = ((t as f64).exp(), (3.0 * t).exp());
            let want = DMatrix::from_row_slice(2, 2, &[p + q, q - p, q - p, p + q]) * 0.5;
            assert!((e - &want).amax() <= 1e-13 * want.amax());
        }
        let e0 = matrix_exp_spectral(&l0, 0.0).unwrap().to_matrix();
        assert!((e0 - DMatrix::identity(2, 2)).amax() < 1e-15);
    }

    #[test]
    fn exp_semigroup() {
        let l0 = lax(&[1.0, 2.5, 0.7, 3.0], &[0.4, 1.2, 0.3]);
        let (s, u) = (0.7, -0.4);
        let lhs = matrix_exp_spectral(&l0, s + u).unwrap().to_matrix();
        let rhs = matrix_exp_spectral(&l0, s).unwrap().to_matrix()
            * matrix_exp_spectral(&l0, u).unwrap().to_matrix();
        assert!((lhs - rhs).amax() < 1e-10);
    }

    #[test]
    fn lu_examples() {
        let (nl, r) = lu_unit_lower(&DMatrix::from_row_slice(2, 2, &[4.0, 2.0, 2.0, 3.0])).unwrap();
        assert_eq!(nl, DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.5, 1.0]));
        assert_eq!(r, DMatrix::from_row_slice(2, 2, &[4.0, 2.0, 0.0, 2.0]));
        let id = DMatrix::<f64>::identity(3, 3);
        assert_eq!(lu_unit_lower(&id).unwrap(), (id.clone(), id));
        assert_eq!(
            lu_unit_lower(&DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])),
            Err(Error::SingularLeadingMinor { k: 1 })
        );
    }

    #[test]
    fn golden_n2_all_methods() {
        let l0 = lax(&[2.0, 2.0], &[1.0]);
        let a = [7.0 / 3.0, 5.0 / 3.0];
        let b = [8.0 / 9.0];
        assert_state(&solve_symes(&l0, HALF_LN2).unwrap(), &a, &b, 1e-12);
        assert_state(&solve_tau(&l0, HALF_LN2).unwrap(), &a, &b, 1e-12);
        assert_state(&solve_rk4(&l0, HALF_LN2, 1e-4).unwrap(), &a, &b, 1e-9);
    }

    #[test]
    fn identity_at_zero_time() {
        let l0 = lax(&[1.5, 0.2, 2.0], &[0.7, 1.1]);
        assert_eq!(solve_rk4(&l0, 0.0, 1e-3).unwrap(), l0);
        assert_state(&solve_symes(&l0, 0.0).unwrap(), l0.a(), l0.b(), 1e-12);
        assert_state(&solve_tau(&l0, 0.0).unwrap(), l0.a(), l0.b(), 1e-12);
    }

    #[test]
    fn closed_form_n2() {
        // b_1(t) = 4e^{2t}/(1+e^{2t})^2, a_1(t) = (3e^{2t}+1)/(e^{2t}+1)
        let l0 = lax(&[2.0, 2.0], &[1.0]);
        for t in [-2.0, -0.5, 0.9, 3.0, 10.0] {
            let e = (2.0 * t as f64).exp();
            let b = 4.0 * e / (1.0 + e).powi(2);
            let a1 = (3.0 * e + 1.0) / (e + 1.0);
            let l = solve_tau(&l0, t).unwrap();
            assert!(close(l.b()[0], b, 1e-11), "t={t}: {} vs {b}", l.b()[0]);
            assert!(close(l.a()[0], a1, 1e-12));
            assert!(close(l.a()[1], 4.0 - a1, 1e-12));
        }
    }

    #[test]
    fn commutator_derivative() {
        let d = BandState::from_lax(&lax(&[2.0, 2.0], &[1.0])).derivative();
        assert_eq!((d.a[0], d.a[1], d.b[0]), (1.0, -1.0, 0.0));
        // dense check of [L, L_-] for n = 4
        let l = lax(&[1.0, -0.5, 2.0, 0.3], &[0.7, 1.3, -0.4]);
        let m = l.to_dense();
        let mut lower = DMatrix::zeros(4, 4);
        for i in 1..4 {
            lower[(i, i - 1)] = m[(i, i - 1)];
        }
        let c = &m * &lower - &lower * &m;
        let d = BandState::from_lax(&l).derivative();
        for i in 0..4 {
            assert!((c[(i, i)] - d.a[i]).abs() < 1e-14);
        }
        for i in 1..4 {
            assert!((c[(i, i - 1)] - d.b[i - 1]).abs() < 1e-14);
            assert!(c[(i - 1, i)].abs() < 1e-14);
        }
    }

    #[test]
    fn rk4_step_count_handles_partial_and_negative_spans() {
        let l0 = lax(&[2.0, 2.0], &[1.0]);
        let mut seen = Vec::new();
        solve_rk4(&l0, 0.25, 0.1).ok();
        integrate_rk4(&l0, -0.25, 0.1, |t, _| seen.push(t)).unwrap();
        assert_eq!(seen.len(), 3);
        assert_eq!(*seen.last().unwrap(), -0.25);
        assert!(matches!(
            solve_rk4(&l0, 1.0, 0.0),
            Err(Error::InvalidArgument(_))
        ));
    }

    fn noncone_l0() -> LaxMatrix {
        // state at t = -1 of the flow through [1 : 1] at t = 0
        let spec = Spectrum::new(vec![1.0, 3.0]).unwrap();
        let f = JacobiPoint::new(vec![1.0, (-2.0f64).exp()]).unwrap();
        reconstruct(&spec, &f).unwrap()
    }

    #[test]
    fn tau_blowup_of_noncone_point() {
        let l0 = noncone_l0();
        match solve_tau(&l0, 1.0) {
            Err(Error::Blowup { k, .. }) => assert_eq!(k, 1),
            other => panic!("expected blowup, got {other:?}"),
        }
        assert!(solve_tau(&l0, 0.5).is_ok());
    }

    #[test]
    fn blowup_detection() {
        let spec = Spectrum::new(vec![1.0, 3.0]).unwrap();
        let f0 = JacobiPoint::new(vec![1.0, 1.0]).unwrap();
        let scan = detect_blowup(&spec, &f0, -1.0, 1.0).unwrap();
        assert!(scan.blowup.unwrap().abs() < 1e-9);
        assert_eq!(scan.index, Some(1));
        // off-grid root
        let scan = detect_blowup(&spec, &f0, -0.7777, 0.9).unwrap();
        assert!(scan.blowup.unwrap().abs() < 1e-9);
        let cone = JacobiPoint::new(vec![1.0, -1.0]).unwrap();
        assert_eq!(
            detect_blowup(&spec, &cone, -20.0, 20.0).unwrap().blowup,
            None
        );
        assert_eq!(detect_blowup(&spec, &f0, 0.5, 2.0).unwrap().blowup, None);
    }

    #[test]
    fn trajectory_examples() {
        let l0 = lax(&[2.0, 2.0], &[1.0]);
        let tr = trajectory(&l0, 0.0, 1.0, 0.5, Method::Tau, 1e-3).unwrap();
        assert_eq!(tr.states.len(), 3);
        assert_eq!(tr.times, vec![0.0, 0.5, 1.0]);
        assert_eq!(tr.blowup, None);
        let tr = trajectory(&l0, 0.0, 1.0, 5.0, Method::Symes, 1e-3).unwrap();
        assert_eq!(tr.times, vec![0.0, 1.0]);
        assert_eq!(sample_times(0.0, 1.0, 0.1).len(), 11);

        for method in [Method::Tau, Method::Symes] {
            let tr = trajectory(&noncone_l0(), -1.0, 1.0, 0.1, method, 1e-3).unwrap();
            let b = tr.blowup.expect("blowup");
            assert!(b.abs() < 1e-6, "{method}: {b}");
            assert!(tr.times.iter().all(|&t| t < b));
            assert_eq!(tr.times.len(), 10);
        }
        assert!(matches!(
            trajectory(&l0, 1.0, 0.0, 0.1, Method::Tau, 1e-3),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn csv_layout() {
        let l0 = lax(&[2.0, 2.0], &[1.0]);
        let mut tr = trajectory(&l0, 0.0, 1.0, 1.0, Method::Tau, 1e-3).unwrap();
        tr.blowup = Some(0.0);
        let csv = tr.to_csv(2);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,a1,a2,b1");
        assert_eq!(lines[1], "0,2,2,1");
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[3], "# blowup t=0.000000");
    }
}
