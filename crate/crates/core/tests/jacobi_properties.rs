use proptest::prelude::*;
use toda_core::jacobi::{
    abel_jacobi, is_general_point, reconstruct, sign_component, tau_sequence, tau_sign, theta,
};
use toda_core::sampling::{random_cone_point, random_dominant_tnn, random_spectrum, sample_rng};
use toda_core::tnn::is_tnn_tridiagonal;
use toda_core::SignComponent;

fn max_relative(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(1.0))
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn cone_points_round_trip(n in 2usize..=6, seed in any::<u64>()) {
        let mut rng = sample_rng(seed, 0);
        let spec = random_spectrum(&mut rng, n, 0.1, 10.0, 0.0);
        let f = random_cone_point(&mut rng, n, 3.0);
        prop_assert!(is_general_point(&spec, &f));
        let l = reconstruct(&spec, &f).unwrap();
        prop_assert!(is_tnn_tridiagonal(&l.as_tridiagonal(), 1e-9).is_tnn);
        let back = abel_jacobi(&l).unwrap();
        prop_assert!(back.distance(&f) <= 1e-8, "distance {}", back.distance(&f));
    }

    #[test]
    fn tnn_matrices_round_trip(n in 2usize..=6, seed in any::<u64>()) {
        let l = random_dominant_tnn(&mut sample_rng(seed, 0), n);
        let f = abel_jacobi(&l).unwrap();
        prop_assert!(sign_component(&f).1, "TNN matrix left the positive cone");
        let back = reconstruct(&l.spectrum().unwrap(), &f).unwrap();
        prop_assert!(max_relative(back.a(), l.a()) <= 1e-8);
        prop_assert!(max_relative(back.b(), l.b()) <= 1e-8);
    }

    #[test]
    fn theta_matches_signed_tau(n in 2usize..=6, seed in any::<u64>(), logs in prop::collection::vec(-1.0f64..1.0, 6)) {
        let spec = random_spectrum(&mut sample_rng(seed, 0), n, -5.0, 5.0, 0.05);
        let z: Vec<f64> = logs[..n].iter().map(|x| x.exp()).collect();
        let root = z.iter().product::<f64>().sqrt();
        let tau = tau_sequence(&spec, &z).unwrap().tau;
        for k in 0..=n {
            let lhs = theta(k, &z, &spec).unwrap() * root;
            let rhs = tau_sign(n, k) * tau[k];
            prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs(), "k={k}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn sign_components_enumerate_every_pattern(n in 1usize..=8) {
        let all = SignComponent::all(n);
        prop_assert_eq!(all.len(), 1 << (n - 1));
        prop_assert_eq!(all.iter().filter(|c| c.is_positive_cone()).count(), 1);
    }
}
