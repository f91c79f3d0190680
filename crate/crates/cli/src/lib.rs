//! Command implementations behind the `toda` binary. Each command returns
//! an [`Outcome`] holding its exit code and output so it can be driven
//! without a subprocess.

use serde::{Deserialize, Serialize};
use serde_json::json;
use std::fs;
use std::path::{Path, PathBuf};
use toda_core::flow::{trajectory, Method, Trajectory};
use toda_core::jacobi::{
    abel_jacobi_with_spectrum, is_general_point, reconstruct, sign_component, tau_sequence,
};
use toda_core::lax::{LaxMatrix, Spectrum, Tridiagonal};
use toda_core::nalgebra::DMatrix;
use toda_core::tnn::{
    is_tnn_exhaustive, is_tnn_interlacing, is_tnn_tridiagonal, TnnMethod, TnnReport,
};
use toda_core::verify::{verify_theorem, Direction, VerifyConfig};
use toda_core::{Error, JacobiPoint};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NEGATIVE: i32 = 2;
pub const EXIT_BLOWUP: i32 = 3;

/// Superdiagonal tolerance when a dense matrix is read as a Lax matrix.
const SUPERDIAGONAL_TOL: f64 = 1e-12;

/// Exit code, stdout text and stderr text of a command.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    }

    fn fail(code: i32, message: impl std::fmt::Display) -> Self {
        Outcome {
            code,
            stdout: String::new(),
            stderr: format!("error: {message}\n"),
        }
    }
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// A matrix file: either `{"n", "a", "b"}` or a dense array of rows.
#[derive(Deserialize)]
#[serde(untagged)]
enum MatrixFile {
    Lax(LaxMatrix),
    Dense(Vec<Vec<f64>>),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PointFile {
    Point(JacobiPoint),
    Bare(Vec<f64>),
}

fn read_text(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn parse_json<T: for<'de> Deserialize<'de>>(path: &Path, what: &str) -> Result<T, String> {
    let text = read_text(path)?;
    serde_json::from_str(&text)
        .map_err(|e| format!("{} is not a valid {what}: {e}", path.display()))
}

fn dense_from_rows(rows: Vec<Vec<f64>>) -> Result<DMatrix<f64>, String> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err("dense matrix must be square and non-empty".into());
    }
    if rows.iter().flatten().any(|x| !x.is_finite()) {
        return Err("dense matrix has non-finite entries".into());
    }
    Ok(DMatrix::from_row_iterator(n, n, rows.into_iter().flatten()))
}

/// Reads any square matrix.
pub fn read_dense(path: &Path) -> Result<DMatrix<f64>, String> {
    match parse_json::<MatrixFile>(path, "matrix")? {
        MatrixFile::Lax(l) => Ok(l.to_dense()),
        MatrixFile::Dense(rows) => dense_from_rows(rows),
    }
}

/// Reads a Lax matrix, accepting dense input with a unit superdiagonal.
pub fn read_lax(path: &Path) -> Result<LaxMatrix, String> {
    match parse_json::<MatrixFile>(path, "matrix")? {
        MatrixFile::Lax(l) => Ok(l),
        MatrixFile::Dense(rows) => {
            LaxMatrix::from_dense(&dense_from_rows(rows)?, SUPERDIAGONAL_TOL)
                .map_err(|e| e.to_string())
        }
    }
}

pub fn read_spectrum(path: &Path) -> Result<Spectrum, String> {
    parse_json(path, "spectrum")
}

pub fn read_point(path: &Path) -> Result<JacobiPoint, String> {
    match parse_json::<PointFile>(path, "Jacobi point")? {
        PointFile::Point(p) => Ok(p),
        PointFile::Bare(f) => JacobiPoint::new(f).map_err(|e| e.to_string()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exhaustive,
    Tridiagonal,
    Interlacing,
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "exhaustive" => Ok(Mode::Exhaustive),
            "tridiagonal" => Ok(Mode::Tridiagonal),
            "interlacing" => Ok(Mode::Interlacing),
            _ => Err(format!("unknown mode {s:?}")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimulateArgs {
    pub matrix: PathBuf,
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
    pub method: Method,
    pub rk4_dt: f64,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

fn render_trajectory(tr: &Trajectory, n: usize, format: Format) -> String {
    match format {
        Format::Csv => tr.to_csv(n),
        Format::Json => pretty(tr),
    }
}

/// Exit 0 on a full run, 3 on blowup (partial output is still written),
/// 1 on input errors.
pub fn cmd_simulate(args: &SimulateArgs) -> Outcome {
    let l0 = match read_lax(&args.matrix) {
        Ok(l) => l,
        Err(e) => return Outcome::fail(EXIT_INPUT, e),
    };
    let format = args.format.unwrap_or_else(|| match &args.out {
        Some(p)
            if p.extension()
                .is_some_and(|e| e.eq_ignore_ascii_case("json")) =>
        {
            Format::Json
        }
        _ => Format::Csv,
    });
    let tr = match trajectory(&l0, args.t0, args.t1, args.dt, args.method, args.rk4_dt) {
        Ok(tr) => tr,
        Err(e) => return Outcome::fail(EXIT_INPUT, e),
    };
    let text = render_trajectory(&tr, l0.n(), format);
    let mut outcome = match &args.out {
        Some(path) => match fs::write(path, &text) {
            Ok(()) => Outcome::ok(String::new()),
            Err(e) => {
                return Outcome::fail(EXIT_INPUT, format!("cannot write {}: {e}", path.display()))
            }
        },
        None => Outcome::ok(text),
    };
    if let Some(t) = tr.blowup {
        outcome.code = EXIT_BLOWUP;
        outcome.stderr = format!("blowup at t = {t:.6}; trajectory truncated\n");
    }
    outcome
}

/// Prints a [`TnnReport`]; exit 0 if TNN, 2 if not, 1 on input errors.
pub fn cmd_check_tnn(matrix: &Path, mode: Mode, tol: f64) -> Outcome {
    let m = match read_dense(matrix) {
        Ok(m) => m,
        Err(e) => return Outcome::fail(EXIT_INPUT, e),
    };
    let report = match mode {
        Mode::Exhaustive => is_tnn_exhaustive(&m, tol),
        Mode::Tridiagonal => Tridiagonal::from_dense(&m).map(|t| is_tnn_tridiagonal(&t, tol)),
        Mode::Interlacing => interlacing_report(&m),
    };
    match report {
        Ok(r) => Outcome {
            code: if r.is_tnn { EXIT_OK } else { EXIT_NEGATIVE },
            stdout: pretty(&r),
            stderr: String::new(),
        },
        Err(e) => Outcome::fail(EXIT_INPUT, e),
    }
}

/// The interlacing test applies to tridiagonal matrices with positive
/// off-diagonal entries, which are diagonally similar to the Lax matrix
/// with `b_i = sub_i · sup_i`. A negative off-diagonal entry is itself a
/// negative minor.
fn interlacing_report(m: &DMatrix<f64>) -> toda_core::Result<TnnReport> {
    let t = Tridiagonal::from_dense(m)?;
    if t.sub.iter().chain(&t.sup).any(|&x| x < 0.0) {
        return Ok(TnnReport {
            is_tnn: false,
            witness: None,
            method: TnnMethod::Interlacing,
        });
    }
    if let Some(i) = t
        .sub
        .iter()
        .zip(&t.sup)
        .position(|(c, s)| *c == 0.0 || *s == 0.0)
    {
        return Err(Error::InvalidArgument(format!(
            "interlacing test needs nonzero off-diagonal entries (pair {} is zero)",
            i + 1
        )));
    }
    let b = t.sub.iter().zip(&t.sup).map(|(c, s)| c * s).collect();
    is_tnn_interlacing(&LaxMatrix::new(t.diag.clone(), b)?)
}

#[derive(Serialize)]
struct Linearization {
    f: Vec<f64>,
    sign_component: toda_core::SignComponent,
    in_positive_cone: bool,
    sign_alternating: bool,
    spectrum: Spectrum,
    tau: Vec<f64>,
    is_general: bool,
}

/// Jacobi point and cone diagnosis. `in_positive_cone` also requires a
/// positive spectrum; `sign_alternating` reports the sign pattern alone.
/// Exit 2 on linearization errors, 1 on input errors.
pub fn cmd_linearize(matrix: &Path) -> Outcome {
    let l = match read_lax(matrix) {
        Ok(l) => l,
        Err(e) => return Outcome::fail(EXIT_INPUT, e),
    };
    let result = l.spectrum().and_then(|spec| {
        let f = abel_jacobi_with_spectrum(&l, &spec)?;
        let tau = tau_sequence(&spec, f.as_slice())?.tau;
        Ok((spec, f, tau))
    });
    match result {
        Ok((spec, f, tau)) => {
            let (component, alternating) = sign_component(&f);
            let is_general = is_general_point(&spec, &f);
            Outcome::ok(pretty(&Linearization {
                in_positive_cone: alternating && spec.is_positive(),
                sign_alternating: alternating,
                sign_component: component,
                is_general,
                tau,
                spectrum: spec,
                f: f.as_slice().to_vec(),
            }))
        }
        Err(e) => Outcome::fail(EXIT_NEGATIVE, e),
    }
}

/// Prints the reconstructed Lax matrix. A non-general point exits 2 with
/// `{"error": "non_general_divisor", "index": k}` on stdout.
pub fn cmd_reconstruct(spectrum: &Path, point: &Path) -> Outcome {
    let (spec, f) = match read_spectrum(spectrum).and_then(|s| Ok((s, read_point(point)?))) {
        Ok(x) => x,
        Err(e) => return Outcome::fail(EXIT_INPUT, e),
    };
    match reconstruct(&spec, &f) {
        Ok(l) => Outcome::ok(pretty(&l)),
        Err(Error::NonGeneralDivisor { k }) => Outcome {
            code: EXIT_NEGATIVE,
            stdout: pretty(&json!({ "error": "non_general_divisor", "index": k })),
            stderr: format!("error: {}\n", Error::NonGeneralDivisor { k }),
        },
        Err(e) => Outcome::fail(EXIT_INPUT, e),
    }
}

/// Worker count from `TODA_WORKERS`: `Some(0)` runs sequentially, unset
/// uses the default pool.
pub fn workers_from_env() -> Result<Option<usize>, String> {
    match std::env::var("TODA_WORKERS") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| format!("TODA_WORKERS must be a nonnegative integer, got {v:?}")),
        Err(_) => Ok(None),
    }
}

/// Prints the [`toda_core::VerificationReport`]; exit 0 iff there are no
/// failures, 1 on a bad configuration.
pub fn cmd_verify_theorem(
    cfg: &VerifyConfig,
    workers: Option<usize>,
    out: Option<&Path>,
) -> Outcome {
    let report = match verify_theorem(cfg, workers) {
        Ok(r) => r,
        Err(e) => return Outcome::fail(EXIT_INPUT, e),
    };
    let text = pretty(&report);
    let mut outcome = match out {
        Some(path) => match fs::write(path, &text) {
            Ok(()) => Outcome::ok(String::new()),
            Err(e) => {
                return Outcome::fail(EXIT_INPUT, format!("cannot write {}: {e}", path.display()))
            }
        },
        None => Outcome::ok(text),
    };
    if !report.passed() {
        outcome.code = EXIT_NEGATIVE;
        outcome.stderr = format!("{} failures\n", report.failures);
    }
    outcome
}

pub fn parse_direction(s: &str) -> Result<Direction, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

pub fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}
