use std::f64::consts::PI;

use proptest::prelude::*;

use kahlerlab::dhym::{arccot, complex_slope, lagrangian_phase, truncated_phase};
use kahlerlab::sampling::{random_hermitian, random_psd, sample_rng};
use kahlerlab::spectra::{index_subsets, Spectrum};

fn spectrum(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Spectrum> {
    prop::collection::vec(-20.0f64..20.0, n).prop_map(|v| Spectrum::new(v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1024))]

    #[test]
    fn slope_argument_is_the_phase(lambda in spectrum(1..=6)) {
        let z = complex_slope(&lambda).as_complex();
        prop_assume!(z.norm() > 1e-300);
        let diff = (z.arg() - lagrangian_phase(&lambda)).rem_euclid(2.0 * PI);
        prop_assert!(diff.min(2.0 * PI - diff) <= 1e-10, "diff {diff}");
    }

    #[test]
    fn cot_identity(lambda in spectrum(1..=6)) {
        let theta = lagrangian_phase(&lambda);
        prop_assume!(theta.sin().abs() >= 1e-2);
        let z = complex_slope(&lambda).as_complex();
        let defect = z.re - theta.cos() / theta.sin() * z.im;
        prop_assert!(defect.abs() <= 1e-9 * z.norm(), "defect {defect} at |z| {}", z.norm());
    }

    #[test]
    fn truncated_phase_is_the_best_tuple(lambda in spectrum(2..=6), pick in 0usize..8) {
        let n = lambda.dim();
        let ell = 1 + pick % (n - 1);
        let best = index_subsets(n, n - ell)
            .into_iter()
            .map(|kept| kept.iter().map(|&i| arccot(lambda.values()[i])).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max);
        prop_assert_eq!(truncated_phase(&lambda, ell).unwrap(), best);
    }

    #[test]
    fn phases_decrease_along_psd_increments(seed in any::<u64>(), n in 2usize..=5) {
        let mut rng = sample_rng(seed, 3);
        let b = random_hermitian(n, 3.0, &mut rng);
        let a = b.add(&random_psd(n, 4.0, &mut rng));
        let (la, lb) = (a.eigenvalues(), b.eigenvalues());
        prop_assert!(lagrangian_phase(&la) <= lagrangian_phase(&lb) + 1e-9);
        for ell in 1..n {
            prop_assert!(truncated_phase(&la, ell).unwrap() <= truncated_phase(&lb, ell).unwrap() + 1e-9);
        }
    }
}
