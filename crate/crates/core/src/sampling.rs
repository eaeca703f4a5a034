//! Seeded random matrices and spectra for the property campaigns.
//!
//! Every sample draws from its own stream derived from `(seed, index)`, so a
//! campaign gives the same answers however rayon schedules it.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::spectra::HermitianMatrix;

pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn complex_gaussian<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// Haar-ish unitary from Gram-Schmidt on complex Gaussian columns
/// (row-major storage, columns orthonormal).
pub fn random_unitary<R: Rng>(n: usize, rng: &mut R) -> Vec<Complex64> {
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<Complex64> = (0..n).map(|_| complex_gaussian(rng)).collect();
        for _ in 0..2 {
            for u in &cols {
                let dot: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in v.iter_mut().zip(u) {
                    *x -= dot * y;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue;
        }
        cols.push(v.into_iter().map(|z| z / norm).collect());
    }
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for (j, col) in cols.iter().enumerate() {
        for (i, z) in col.iter().enumerate() {
            out[i * n + j] = *z;
        }
    }
    out
}

/// `U diag(values) U*`.
pub fn hermitian_with_spectrum(values: &[f64], unitary: &[Complex64]) -> HermitianMatrix {
    let n = values.len();
    let mut data = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in i..n {
            let mut s = Complex64::new(0.0, 0.0);
            for (k, v) in values.iter().enumerate() {
                s += unitary[i * n + k] * unitary[j * n + k].conj() * *v;
            }
            data[i * n + j] = s;
            data[j * n + i] = s.conj();
        }
        data[i * n + i].im = 0.0;
    }
    HermitianMatrix::from_raw(n, data)
}

/// Random Hermitian matrix with a prescribed spectrum and random eigenbasis.
pub fn random_hermitian_with<R: Rng>(values: &[f64], rng: &mut R) -> HermitianMatrix {
    let u = random_unitary(values.len(), rng);
    hermitian_with_spectrum(values, &u)
}

/// Random Hermitian matrix with standard Gaussian entries scaled by `scale`.
pub fn random_hermitian<R: Rng>(n: usize, scale: f64, rng: &mut R) -> HermitianMatrix {
    let mut data = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        let d: f64 = rng.sample(StandardNormal);
        data[i * n + i] = Complex64::new(d * scale, 0.0);
        for j in (i + 1)..n {
            let z = complex_gaussian(rng) * (scale / std::f64::consts::SQRT_2);
            data[i * n + j] = z;
            data[j * n + i] = z.conj();
        }
    }
    HermitianMatrix::from_raw(n, data)
}

/// Positive semidefinite matrix with eigenvalues drawn from `[0, max)`,
/// occasionally rank deficient.
pub fn random_psd<R: Rng>(n: usize, max: f64, rng: &mut R) -> HermitianMatrix {
    let values: Vec<f64> = (0..n)
        .map(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.0..max) })
        .collect();
    random_hermitian_with(&values, rng)
}

/// Well-conditioned positive definite matrix.
pub fn random_pd<R: Rng>(n: usize, rng: &mut R) -> HermitianMatrix {
    let values: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
    random_hermitian_with(&values, rng)
}

/// Positive spectrum, log-uniform in `[lo, hi]`.
pub fn log_uniform_spectrum<R: Rng>(n: usize, lo: f64, hi: f64, rng: &mut R) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|_| rng.gen_range(a..b).exp()).collect()
}

/// Cholesky factor of a matrix built by this module.
pub(crate) fn cholesky(omega: &HermitianMatrix) -> Vec<Complex64> {
    crate::spectra::cholesky_factor(omega).expect("matrix is not positive definite")
}

/// `L M L*`: a matrix whose eigenvalues relative to `L L*` are those of `M`.
pub fn lift(m: &HermitianMatrix, l: &[Complex64]) -> HermitianMatrix {
    let n = m.dim();
    // congruence computes X* M X, so pass X = L*.
    let mut lt = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            lt[i * n + j] = l[j * n + i].conj();
        }
    }
    m.congruence(&lt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::relative_eigenvalues;

    #[test]
    fn unitary_columns_are_orthonormal() {
        let mut rng = sample_rng(3, 0);
        let n = 5;
        let u = random_unitary(n, &mut rng);
        for a in 0..n {
            for b in 0..n {
                let dot: Complex64 = (0..n).map(|i| u[i * n + a].conj() * u[i * n + b]).sum();
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((dot - Complex64::new(expect, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: f64 = sample_rng(11, 4).gen();
        let b: f64 = sample_rng(11, 4).gen();
        let c: f64 = sample_rng(11, 5).gen();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn lifted_matrix_keeps_relative_spectrum() {
        let mut rng = sample_rng(5, 1);
        let omega = random_pd(3, &mut rng);
        let l = cholesky(&omega);
        let m = random_hermitian_with(&[0.5, 1.0, 4.0], &mut rng);
        let ev = relative_eigenvalues(&lift(&m, &l), &omega).unwrap();
        for (x, y) in ev.values().iter().zip([0.5, 1.0, 4.0]) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
