mod common;

use kcontract::compound::add_compound;
use kcontract::matrix::{eigenvalues, Matrix};
use kcontract::measures::{
    measure, measure_of_second_compound, second_compound_measure_detail, Norm,
};
use proptest::prelude::*;

use common::square_strategy;

fn norm_strategy() -> impl Strategy<Value = Norm> {
    prop_oneof![Just(Norm::L1), Just(Norm::L2), Just(Norm::LInf)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn measures_match_textbook_formulas(a in square_strategy(1..=7, 3.0)) {
        prop_assert!((measure(&a, Norm::L1).unwrap() - common::measure_1(&a)).abs() <= 1e-12);
        prop_assert!((measure(&a, Norm::LInf).unwrap() - common::measure_inf(&a)).abs() <= 1e-12);
        prop_assert!((measure(&a, Norm::L2).unwrap() - common::measure_2(&a)).abs() <= 1e-10);
    }

    #[test]
    fn closed_form_second_compound_measure(a in square_strategy(2..=8, 3.0), p in norm_strategy()) {
        let closed = measure_of_second_compound(&a, p).unwrap();
        let direct = measure(&add_compound(&a, 2).unwrap(), p).unwrap();
        prop_assert!((closed - direct).abs() <= 1e-10, "{} vs {}", closed, direct);
    }

    #[test]
    fn measure_bounds_the_spectral_abscissa(a in square_strategy(1..=6, 3.0), p in norm_strategy()) {
        let abscissa = eigenvalues(&a).iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(measure(&a, p).unwrap() >= abscissa - 1e-9);
    }

    #[test]
    fn measure_is_subadditive_and_positively_homogeneous(
        (a, b) in (1usize..=6).prop_flat_map(|n| {
            (common::matrix_strategy(n, n, 3.0), common::matrix_strategy(n, n, 3.0))
        }),
        c in 0.0f64..5.0,
        p in norm_strategy(),
    ) {
        let sum = measure(&(&a + &b), p).unwrap();
        prop_assert!(sum <= measure(&a, p).unwrap() + measure(&b, p).unwrap() + 1e-10);
        let scaled = measure(&(&a * c), p).unwrap();
        prop_assert!((scaled - c * measure(&a, p).unwrap()).abs() <= 1e-9);
    }

    #[test]
    fn planar_closed_form_is_exactly_the_trace(a in common::matrix_strategy(2, 2, 5.0), p in norm_strategy()) {
        prop_assert_eq!(measure_of_second_compound(&a, p).unwrap(), a[(0, 0)] + a[(1, 1)]);
    }

    #[test]
    fn measure_of_shift(a in square_strategy(1..=6, 3.0), s in -5.0f64..5.0, p in norm_strategy()) {
        let n = a.nrows();
        let shifted = measure(&(&a + Matrix::identity(n, n) * s), p).unwrap();
        prop_assert!((shifted - measure(&a, p).unwrap() - s).abs() <= 1e-10);
    }
}

#[test]
fn planar_second_compound_measure_is_the_trace() {
    let a = Matrix::from_row_slice(2, 2, &[0.0, 1.0, -0.3, -0.1]);
    for p in Norm::ALL {
        let d = second_compound_measure_detail(&a, p).unwrap();
        assert_eq!(d.value, a.trace());
    }
}

#[test]
fn zero_matrix_has_zero_measure() {
    for p in Norm::ALL {
        assert_eq!(measure(&Matrix::zeros(3, 3), p).unwrap(), 0.0);
    }
}

#[test]
fn second_compound_worst_pair_is_reported() {
    // a11 + a33 dominates under μ∞ with no off-diagonal mass
    let a = Matrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, -5.0, 2.0]));
    let d = second_compound_measure_detail(&a, Norm::LInf).unwrap();
    assert_eq!(d.value, 3.0);
    assert_eq!(d.worst_pair, Some((0, 2)));
}
