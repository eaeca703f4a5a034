use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use proptest::prelude::*;
use rand::Rng;

use kahlerlab::sampling::{random_hermitian, random_pd, sample_rng};
use kahlerlab::spectra::{majorizes, relative_eigenvalues, restricted_symmetric_generic, symmetric_functions, Spectrum};

fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn rational_spectrum(max_n: usize) -> impl Strategy<Value = Vec<BigRational>> {
    prop::collection::vec((-60i64..60, 1i64..24), 1..=max_n)
        .prop_map(|v| v.into_iter().map(|(a, b)| rat(a, b)).collect())
}

/// Sum over all k-subsets of the product, by bitmask.
fn enumerate(values: &[BigRational], k: usize) -> BigRational {
    let n = values.len();
    let mut total = BigRational::zero();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let mut p = BigRational::one();
        for (i, v) in values.iter().enumerate() {
            if mask & (1 << i) != 0 {
                p *= v;
            }
        }
        total += p;
    }
    total
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn recurrence_equals_subset_enumeration(values in rational_spectrum(6)) {
        let s = symmetric_functions(&values);
        prop_assert_eq!(s.len(), values.len() + 1);
        for (k, sk) in s.iter().enumerate() {
            prop_assert_eq!(sk, &enumerate(&values, k));
        }
    }

    #[test]
    fn euler_identity_is_exact(values in rational_spectrum(6)) {
        let n = values.len();
        let mut lhs = BigRational::zero();
        for (i, v) in values.iter().enumerate() {
            lhs += v * restricted_symmetric_generic(&values, n as i64 - 1, &[i]).unwrap();
        }
        let rhs = BigRational::from_integer(BigInt::from(n)) * enumerate(&values, n);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn relative_spectrum_is_congruence_invariant(seed in any::<u64>(), n in 1usize..=5) {
        let mut rng = sample_rng(seed, 0);
        let chi = random_hermitian(n, 2.0, &mut rng);
        let omega = random_pd(n, &mut rng);
        // Diagonally dominant, hence invertible.
        let m: Vec<Complex64> = (0..n * n)
            .map(|i| {
                let z = Complex64::new(rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4));
                if i % (n + 1) == 0 { z + 2.0 * n as f64 } else { z }
            })
            .collect();
        let before = relative_eigenvalues(&chi, &omega).unwrap();
        let after = relative_eigenvalues(&chi.congruence(&m), &omega.congruence(&m)).unwrap();
        for (a, b) in before.values().iter().zip(after.values()) {
            prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn convex_combinations_are_majorized(seed in any::<u64>(), n in 1usize..=6) {
        let mut rng = sample_rng(seed, 1);
        let a = random_hermitian(n, 3.0, &mut rng);
        let b = random_hermitian(n, 3.0, &mut rng);
        let (la, lb) = (a.eigenvalues(), b.eigenvalues());
        for t in [0.25, 0.5, 0.75] {
            let mixed = a.scale(t).add(&b.scale(1.0 - t)).eigenvalues();
            let bound: Vec<f64> = la.values().iter().zip(lb.values()).map(|(x, y)| t * x + (1.0 - t) * y).collect();
            let bound = Spectrum::new(bound).unwrap();
            prop_assert!(majorizes(&bound, &mixed).unwrap(), "t = {t}: {mixed:?} not majorized by {bound:?}");
        }
    }

    #[test]
    fn float_recurrence_tracks_exact(values in rational_spectrum(6)) {
        let floats: Vec<f64> = values
            .iter()
            .map(|r| r.to_f64().unwrap())
            .collect();
        let s = symmetric_functions(&floats);
        let abs: Vec<f64> = floats.iter().map(|v| v.abs()).collect();
        let scale = symmetric_functions(&abs);
        for k in 0..=values.len() {
            let exact = enumerate(&values, k).to_f64().unwrap();
            prop_assert!((s[k] - exact).abs() <= 1e-12 * scale[k].max(1.0));
        }
    }
}
