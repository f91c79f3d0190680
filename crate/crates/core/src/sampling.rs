//! Seeded random generators for spectra, Jacobi points and Lax matrices.
//!
//! Every sample draws from its own ChaCha stream keyed by `(seed, index)`,
//! so results do not depend on evaluation order or worker count.

use crate::jacobi::{JacobiPoint, SignComponent};
use crate::lax::{LaxMatrix, Spectrum};
use crate::tnn::is_tnn_tridiagonal;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Generator for sample `index` of a run seeded with `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `n` increasing values in `(lo, hi)` with consecutive gaps of at least
/// `min_gap`, by rejection.
pub fn random_spectrum<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64, min_gap: f64) -> Spectrum {
    assert!(n >= 1 && lo < hi && (n as f64 - 1.0) * min_gap < hi - lo);
    loop {
        let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(lo..hi)).collect();
        v.sort_by(f64::total_cmp);
        if v.windows(2).all(|w| w[1] - w[0] >= min_gap) {
            if let Ok(s) = Spectrum::new(v) {
                return s;
            }
        }
    }
}

/// Spectrum with consecutive gaps drawn from `gap_range`, starting at `start`.
pub fn spaced_spectrum<R: Rng>(
    rng: &mut R,
    n: usize,
    start: f64,
    gap_range: (f64, f64),
) -> Spectrum {
    let mut v = Vec::with_capacity(n);
    let mut x = start;
    for _ in 0..n {
        v.push(x);
        x += rng.random_range(gap_range.0..gap_range.1);
    }
    Spectrum::new(v).expect("gaps are positive")
}

/// A point of the given sign component with `ln|f_i| ~ U(-r, r)`.
pub fn random_point<R: Rng>(rng: &mut R, component: &SignComponent, r: f64) -> JacobiPoint {
    let mut f = vec![1.0];
    for &s in &component.signs {
        f.push(s as f64 * rng.random_range(-r..r).exp());
    }
    JacobiPoint::new(f).expect("components are nonzero")
}

pub fn random_cone_point<R: Rng>(rng: &mut R, n: usize, r: f64) -> JacobiPoint {
    random_point(rng, &SignComponent::positive_cone(n), r)
}

/// Diagonally dominant Lax matrix with `b_i ∈ (0.1, 1.5)`: its
/// symmetrization is positive definite, so the matrix is TNN with positive
/// spectrum of moderate spread.
pub fn random_dominant_tnn<R: Rng>(rng: &mut R, n: usize) -> LaxMatrix {
    let b: Vec<f64> = (1..n).map(|_| rng.random_range(0.1..1.5)).collect();
    let a = (0..n)
        .map(|i| {
            let left = if i > 0 { b[i - 1].sqrt() } else { 0.0 };
            let right = if i + 1 < n { b[i].sqrt() } else { 0.0 };
            left + right + rng.random_range(0.1..2.0)
        })
        .collect();
    LaxMatrix::new(a, b).expect("valid bands")
}

/// Lax matrix with `a_i ~ U(a_range)` and `b_i ~ U(b_range)`.
pub fn random_lax<R: Rng>(
    rng: &mut R,
    n: usize,
    a_range: (f64, f64),
    b_range: (f64, f64),
) -> LaxMatrix {
    let a = (0..n)
        .map(|_| rng.random_range(a_range.0..a_range.1))
        .collect();
    let b = (1..n)
        .map(|_| rng.random_range(b_range.0..b_range.1))
        .collect();
    LaxMatrix::new(a, b).expect("valid bands")
}

/// Rejection sampling of TNN Lax matrices with positive `b` and positive
/// spectrum. `None` after `max_tries` rejections.
pub fn random_tnn_rejection<R: Rng>(rng: &mut R, n: usize, max_tries: usize) -> Option<LaxMatrix> {
    for _ in 0..max_tries {
        let l = random_lax(rng, n, (0.0, 4.0), (0.01, 2.0));
        if is_tnn_tridiagonal(&l.as_tridiagonal(), 0.0).is_tnn
            && l.leading_minors().last().is_some_and(|&d| d > 1e-6)
        {
            return Some(l);
        }
    }
    None
}

/// Lax matrix near the TNN boundary: diagonal `√b_{i-1} + √b_i + U(-0.6, 1)`,
/// so roughly half the samples are TNN.
pub fn random_borderline_lax<R: Rng>(rng: &mut R, n: usize) -> LaxMatrix {
    let b: Vec<f64> = (1..n).map(|_| rng.random_range(0.05..2.0)).collect();
    let a = (0..n)
        .map(|i| {
            let left = if i > 0 { b[i - 1].sqrt() } else { 0.0 };
            let right = if i + 1 < n { b[i].sqrt() } else { 0.0 };
            left + right + rng.random_range(-0.6..1.0)
        })
        .collect();
    LaxMatrix::new(a, b).expect("valid bands")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_independent_of_order() {
        let x: f64 = sample_rng(7, 3).random();
        let _: f64 = sample_rng(7, 2).random();
        let y: f64 = sample_rng(7, 3).random();
        assert_eq!(x, y);
        let z: f64 = sample_rng(7, 4).random();
        assert_ne!(x, z);
    }

    #[test]
    fn generators_respect_constraints() {
        let mut rng = sample_rng(1, 0);
        for n in 2..=6 {
            let s = random_spectrum(&mut rng, n, 0.1, 10.0, 1e-3);
            assert!(s.is_positive() && s.min_gap() >= 1e-3 && s.lambdas()[n - 1] < 10.0);
            let f = random_cone_point(&mut rng, n, 3.0);
            assert!(crate::jacobi::sign_component(&f).1);
            let l = random_dominant_tnn(&mut rng, n);
            assert!(is_tnn_tridiagonal(&l.as_tridiagonal(), 0.0).is_tnn);
            assert!(l.spectrum().unwrap().is_positive());
            let r = random_tnn_rejection(&mut rng, n, 100_000).unwrap();
            assert!(is_tnn_tridiagonal(&r.as_tridiagonal(), 0.0).is_tnn);
        }
    }
}
