use proptest::prelude::*;

use kahlerlab::sampling::{random_pd, sample_rng};
use kahlerlab::spectra::HermitianMatrix;
use kahlerlab::torus::{
    decode_snapshot, encode_scalar_snapshot, f_form_density, integrate, mollify, random_trig_field, MollifierSpec,
    PotentialField, Snapshot, Spectral, TorusGrid,
};

fn grid_for(n: usize) -> TorusGrid {
    TorusGrid::new(n, if n == 3 { 8 } else { 12 }).unwrap()
}

fn field(grid: TorusGrid, seed: u64, stream: u64) -> PotentialField {
    random_trig_field(grid, 6, 3, 1.0, &mut sample_rng(seed, stream))
}

fn mean_of(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn laplacian_integrates_to_zero(seed in any::<u64>(), n in 1usize..=3) {
        let grid = grid_for(n);
        let phi = field(grid, seed, 0);
        let omega = random_pd(n, &mut sample_rng(seed, 1));
        let lap = Spectral::new(grid).laplacian(phi.values(), &omega).unwrap();
        let scale = lap.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        prop_assert!(mean_of(&lap).abs() <= 1e-13 * scale);
    }

    #[test]
    fn laplacian_is_symmetric(seed in any::<u64>(), n in 1usize..=3) {
        let grid = grid_for(n);
        let (phi, psi) = (field(grid, seed, 0), field(grid, seed, 1));
        let omega = random_pd(n, &mut sample_rng(seed, 2));
        let sp = Spectral::new(grid);
        let lp = sp.laplacian(phi.values(), &omega).unwrap();
        let ls = sp.laplacian(psi.values(), &omega).unwrap();
        let a: f64 = mean_of(&phi.values().iter().zip(&ls).map(|(x, y)| x * y).collect::<Vec<_>>());
        let b: f64 = mean_of(&psi.values().iter().zip(&lp).map(|(x, y)| x * y).collect::<Vec<_>>());
        prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn parseval(seed in any::<u64>(), n in 1usize..=3) {
        let grid = grid_for(n);
        let phi = field(grid, seed, 0);
        let hat = Spectral::new(grid).forward_real(phi.values());
        let physical: f64 = phi.values().iter().map(|v| v * v).sum();
        let spectral: f64 = hat.iter().map(|z| z.norm_sqr()).sum::<f64>() / grid.points() as f64;
        prop_assert!((physical - spectral).abs() <= 1e-12 * physical.max(1.0));
    }

    #[test]
    fn hessian_trace_has_zero_mean(seed in any::<u64>(), n in 1usize..=3) {
        let grid = grid_for(n);
        let phi = field(grid, seed, 0);
        let form = Spectral::new(grid).form_field(&HermitianMatrix::zeros(n), &phi).unwrap();
        let mean = form.hessian_mean();
        for j in 0..n {
            prop_assert!(mean[j * n + j].norm() <= 1e-12);
        }
    }

    #[test]
    fn f_form_pairing_is_nonpositive(seed in any::<u64>(), n in 2usize..=3, k_pick in 0usize..4) {
        let grid = grid_for(n);
        let phi = field(grid, seed, 0);
        let mut rng = sample_rng(seed, 5);
        let (chi, omega) = (random_pd(n, &mut rng), random_pd(n, &mut rng));
        let k = 1 + k_pick % (n - 1);
        let density = f_form_density(&chi, &omega, &phi, k).unwrap();
        prop_assert!(density.max() <= 1e-9, "max {}", density.max());
        prop_assert!(integrate(&density, None).unwrap() <= 1e-9);
    }

    #[test]
    fn mollifier_keeps_mean_and_range(seed in any::<u64>(), n in 1usize..=2, width in 2usize..=4) {
        let grid = grid_for(n);
        let phi = field(grid, seed, 0);
        let out = mollify(&phi, &MollifierSpec { delta: width as f64 * grid.spacing() }).unwrap();
        prop_assert!((out.mean() - phi.mean()).abs() <= 1e-12);
        prop_assert!(out.max() <= phi.max() + 1e-12 && out.min() >= phi.min() - 1e-12);
    }

    #[test]
    fn snapshot_round_trip_is_bit_exact(seed in any::<u64>(), n in 1usize..=3) {
        let phi = field(grid_for(n), seed, 0);
        match decode_snapshot(&encode_scalar_snapshot(&phi)).unwrap() {
            Snapshot::Scalar(back) => prop_assert_eq!(back, phi),
            Snapshot::Form { .. } => prop_assert!(false, "decoded a form snapshot"),
        }
    }
}
