//! Randomized verification that the TNN part of an isospectral set maps
//! onto the positive cone, and that the other sign components do not.

use crate::error::{Error, Result};
use crate::jacobi::{
    abel_jacobi_with_spectrum, evolve_point, reconstruct, sign_component, JacobiPoint,
    SignComponent,
};
use crate::lax::{LaxMatrix, Spectrum};
use crate::sampling::{
    random_cone_point, random_point, random_spectrum, random_tnn_rejection, sample_rng,
};
use crate::tnn::is_tnn_tridiagonal;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

pub const MIN_N: usize = 2;
pub const MAX_N: usize = 8;

/// Stream offsets separating the sample families of one run.
const CONVERSE_STREAM: u64 = 1 << 40;
const NONCONE_STREAM: u64 = 1 << 41;

/// Failure payloads are attached only up to this many failures.
const PAYLOAD_LIMIT: usize = 10;

const REJECTION_TRIES: usize = 1_000_000;
const NONCONE_REDRAWS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Converse,
    Both,
}

impl Direction {
    fn forward(self) -> bool {
        matches!(self, Direction::Forward | Direction::Both)
    }

    fn converse(self) -> bool {
        matches!(self, Direction::Converse | Direction::Both)
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Forward => "forward",
            Direction::Converse => "converse",
            Direction::Both => "both",
        })
    }
}

impl FromStr for Direction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "forward" => Ok(Direction::Forward),
            "converse" => Ok(Direction::Converse),
            "both" => Ok(Direction::Both),
            _ => Err(Error::InvalidArgument(format!("unknown direction {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub direction: Direction,
    pub tolerance: f64,
    /// Samples per non-alternating sign component; zero skips the check.
    pub noncone_samples: usize,
    /// Range of the spectrum for cone samples.
    pub spectrum_range: (f64, f64),
    /// `ln|f_i|` is drawn from `(-r, r)`.
    pub log_radius: f64,
    /// Evolution times for the converse family are drawn from `(-t, t)`.
    pub time_radius: f64,
}

impl VerifyConfig {
    pub fn new(n: usize, samples: usize, seed: u64, direction: Direction) -> Self {
        VerifyConfig {
            n,
            samples,
            seed,
            direction,
            tolerance: 1e-9,
            noncone_samples: 0,
            spectrum_range: (0.1, 10.0),
            log_radius: 3.0,
            time_radius: 2.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(MIN_N..=MAX_N).contains(&self.n) {
            return Err(Error::InvalidArgument(format!(
                "n must be in {MIN_N}..={MAX_N}, got {}",
                self.n
            )));
        }
        let (lo, hi) = self.spectrum_range;
        if !(lo > 0.0 && lo < hi && hi.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "bad spectrum range ({lo}, {hi})"
            )));
        }
        if !(self.tolerance >= 0.0 && self.log_radius > 0.0 && self.time_radius >= 0.0) {
            return Err(Error::InvalidArgument(
                "tolerance and radii must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Check {
    Forward,
    Converse,
    Noncone,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Payload {
    Point {
        spectrum: Spectrum,
        point: JacobiPoint,
    },
    Matrix {
        matrix: LaxMatrix,
    },
}

/// One failed sample. It is replayed from `seed` and `stream`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureCase {
    pub check: Check,
    pub index: usize,
    pub seed: u64,
    pub stream: u64,
    pub diagnostic: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub payload: Option<Payload>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub n: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub direction: Direction,
    pub samples: usize,
    pub noncone_samples: usize,
    pub failures: usize,
    pub failure_cases: Vec<FailureCase>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

fn forward_sample(cfg: &VerifyConfig, index: usize) -> Option<FailureCase> {
    let stream = index as u64;
    let mut rng = sample_rng(cfg.seed, stream);
    let (lo, hi) = cfg.spectrum_range;
    let spec = random_spectrum(&mut rng, cfg.n, lo, hi, 0.0);
    let f = random_cone_point(&mut rng, cfg.n, cfg.log_radius);
    let diagnostic = match reconstruct(&spec, &f) {
        Ok(l) => {
            let r = is_tnn_tridiagonal(&l.as_tridiagonal(), cfg.tolerance);
            if r.is_tnn {
                return None;
            }
            match r.witness {
                Some(w) => format!(
                    "reconstruction not TNN: minor rows {:?} = {:e}",
                    w.rows, w.value
                ),
                None => "reconstruction not TNN".to_string(),
            }
        }
        Err(e) => format!("reconstruction failed: {e}"),
    };
    Some(FailureCase {
        check: Check::Forward,
        index,
        seed: cfg.seed,
        stream,
        diagnostic,
        payload: Some(Payload::Point {
            spectrum: spec,
            point: f,
        }),
    })
}

/// Even indices flow a reconstructed cone matrix for a random time; odd
/// indices use rejection sampling.
fn converse_matrix(
    cfg: &VerifyConfig,
    rng: &mut impl Rng,
    index: usize,
) -> std::result::Result<LaxMatrix, String> {
    if index.is_multiple_of(2) {
        let (lo, hi) = cfg.spectrum_range;
        let spec = random_spectrum(rng, cfg.n, lo, hi, 0.0);
        let f0 = random_cone_point(rng, cfg.n, cfg.log_radius);
        let t = if cfg.time_radius > 0.0 {
            rng.random_range(-cfg.time_radius..cfg.time_radius)
        } else {
            0.0
        };
        reconstruct(&spec, &evolve_point(&f0, &spec, t))
            .map_err(|e| format!("construction failed: {e}"))
    } else {
        random_tnn_rejection(rng, cfg.n, REJECTION_TRIES)
            .ok_or_else(|| "rejection sampling exhausted".to_string())
    }
}

fn converse_sample(cfg: &VerifyConfig, index: usize) -> Option<FailureCase> {
    let stream = CONVERSE_STREAM + index as u64;
    let mut rng = sample_rng(cfg.seed, stream);
    let fail = |diagnostic: String, matrix: Option<LaxMatrix>| FailureCase {
        check: Check::Converse,
        index,
        seed: cfg.seed,
        stream,
        diagnostic,
        payload: matrix.map(|matrix| Payload::Matrix { matrix }),
    };
    let l = match converse_matrix(cfg, &mut rng, index) {
        Ok(l) => l,
        Err(d) => return Some(fail(d, None)),
    };
    // Only TNN samples with positive simple spectrum are in scope.
    if !is_tnn_tridiagonal(&l.as_tridiagonal(), cfg.tolerance).is_tnn {
        return None;
    }
    let spec = match l.spectrum() {
        Ok(s) if s.is_positive() => s,
        _ => return None,
    };
    match abel_jacobi_with_spectrum(&l, &spec) {
        Ok(f) => {
            let (component, cone) = sign_component(&f);
            if cone {
                None
            } else {
                Some(fail(
                    format!("TNN matrix maps to sign component {component}"),
                    Some(l),
                ))
            }
        }
        Err(e) => Some(fail(format!("linearization failed: {e}"), Some(l))),
    }
}

fn noncone_sample(
    cfg: &VerifyConfig,
    pattern: usize,
    component: &SignComponent,
    index: usize,
) -> Option<FailureCase> {
    let flat = pattern * cfg.noncone_samples + index;
    let stream = NONCONE_STREAM + flat as u64;
    let mut rng = sample_rng(cfg.seed, stream);
    let (lo, hi) = cfg.spectrum_range;
    // non-general points have no reconstruction to test; redraw them
    let mut draw = 0;
    let (spec, f, result) = loop {
        let spec = random_spectrum(&mut rng, cfg.n, lo, hi, 0.0);
        let f = random_point(&mut rng, component, cfg.log_radius);
        match reconstruct(&spec, &f) {
            Err(Error::NonGeneralDivisor { .. }) if draw < NONCONE_REDRAWS => draw += 1,
            result => break (spec, f, result),
        }
    };
    let diagnostic = match result {
        Err(e) => format!("reconstruction failed: {e}"),
        Ok(l) if is_tnn_tridiagonal(&l.as_tridiagonal(), cfg.tolerance).is_tnn => {
            format!("point in component {component} reconstructs to a TNN matrix")
        }
        Ok(_) => return None,
    };
    Some(FailureCase {
        check: Check::Noncone,
        index: flat,
        seed: cfg.seed,
        stream,
        diagnostic,
        payload: Some(Payload::Point {
            spectrum: spec,
            point: f,
        }),
    })
}

/// Runs `f` over `0..count`, in parallel unless `workers == Some(0)`.
fn collect_failures<F>(count: usize, workers: Option<usize>, f: F) -> Vec<FailureCase>
where
    F: Fn(usize) -> Option<FailureCase> + Sync + Send,
{
    match workers {
        Some(0) => (0..count).filter_map(f).collect(),
        Some(k) => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
            Ok(pool) => pool.install(|| (0..count).into_par_iter().filter_map(&f).collect()),
            Err(_) => (0..count).filter_map(f).collect(),
        },
        None => (0..count).into_par_iter().filter_map(f).collect(),
    }
}

/// Runs the configured checks. `workers` is the thread count, `Some(0)`
/// meaning sequential and `None` the default pool; the report does not
/// depend on it.
pub fn verify_theorem(cfg: &VerifyConfig, workers: Option<usize>) -> Result<VerificationReport> {
    cfg.validate()?;
    let mut cases = Vec::new();
    if cfg.direction.forward() {
        cases.extend(collect_failures(cfg.samples, workers, |i| {
            forward_sample(cfg, i)
        }));
    }
    if cfg.direction.converse() {
        cases.extend(collect_failures(cfg.samples, workers, |i| {
            converse_sample(cfg, i)
        }));
    }
    if cfg.noncone_samples > 0 {
        let patterns: Vec<SignComponent> = SignComponent::all(cfg.n)
            .into_iter()
            .filter(|c| !c.is_positive_cone())
            .collect();
        let per = cfg.noncone_samples;
        cases.extend(collect_failures(patterns.len() * per, workers, |j| {
            noncone_sample(cfg, j / per, &patterns[j / per], j % per)
        }));
    }
    cases.sort_by_key(|c| (c.stream, c.index));
    if cases.len() > PAYLOAD_LIMIT {
        for c in &mut cases {
            c.payload = None;
        }
    }
    Ok(VerificationReport {
        n: cfg.n,
        seed: cfg.seed,
        tolerance: cfg.tolerance,
        direction: cfg.direction,
        samples: cfg.samples,
        noncone_samples: cfg.noncone_samples,
        failures: cases.len(),
        failure_cases: cases,
    })
}
