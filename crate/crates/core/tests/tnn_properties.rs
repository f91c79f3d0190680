use proptest::prelude::*;
use toda_core::lax::{LaxMatrix, Tridiagonal};
use toda_core::tnn::{
    is_irreducible_tnn, is_tnn_exhaustive, is_tnn_interlacing, is_tnn_tridiagonal,
    is_totally_positive,
};

/// Tridiagonal with positive off-diagonals and a diagonal close to the TNN
/// boundary, so both outcomes occur.
fn positive_tridiagonal() -> impl Strategy<Value = Tridiagonal> {
    (2usize..=6)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(0.1f64..2.0, n - 1),
                prop::collection::vec(0.05f64..2.0, n - 1),
                prop::collection::vec(-0.6f64..1.0, n),
            )
        })
        .prop_map(|(sup, sub, jitter)| {
            let n = jitter.len();
            let diag = (0..n)
                .map(|k| {
                    let left = if k > 0 {
                        (sub[k - 1] * sup[k - 1]).sqrt()
                    } else {
                        0.0
                    };
                    let right = if k + 1 < n {
                        (sub[k] * sup[k]).sqrt()
                    } else {
                        0.0
                    };
                    left + right + jitter[k]
                })
                .collect();
            Tridiagonal::new(diag, sub, sup).unwrap()
        })
}

fn lax_form(t: &Tridiagonal) -> LaxMatrix {
    LaxMatrix::new(
        t.diag.clone(),
        t.sub.iter().zip(&t.sup).map(|(x, y)| x * y).collect(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn three_criteria_agree(t in positive_tridiagonal()) {
        let exhaustive = is_tnn_exhaustive(&t.to_dense(), 0.0).unwrap().is_tnn;
        let contiguous = is_tnn_tridiagonal(&t, 0.0).is_tnn;
        let interlacing = is_tnn_interlacing(&lax_form(&t)).unwrap().is_tnn;
        prop_assert_eq!(exhaustive, contiguous);
        prop_assert_eq!(contiguous, interlacing);
    }

    #[test]
    fn sylvester_consistency(t in positive_tridiagonal()) {
        let n = t.n();
        let det = t.leading_minors()[n];
        let trailing = is_tnn_tridiagonal(&t.principal(1, n), 0.0).is_tnn;
        if det >= 0.0 && trailing {
            prop_assert!(is_tnn_tridiagonal(&t, 0.0).is_tnn);
        }
    }

    #[test]
    fn irreducible_tnn_has_positive_simple_spectrum(t in positive_tridiagonal()) {
        prop_assume!(is_tnn_tridiagonal(&t, 0.0).is_tnn);
        let (irreducible, _) = is_irreducible_tnn(&t, 2 * t.n()).unwrap();
        if irreducible {
            let spec = lax_form(&t).spectrum().unwrap();
            prop_assert!(spec.is_positive());
            prop_assert!(spec.min_gap() > 0.0);
        }
    }

    #[test]
    fn totally_positive_implies_tnn(
        entries in prop::collection::vec(0.0f64..2.0, 9),
    ) {
        let m = toda_core::nalgebra::DMatrix::from_row_slice(3, 3, &entries);
        if is_totally_positive(&m).unwrap() {
            prop_assert!(is_tnn_exhaustive(&m, 0.0).unwrap().is_tnn);
        }
    }
}
