//! Potentials and (1,1)-form fields on the flat torus `C^n / (Z + iZ)^n`.
//!
//! Grid points are indexed row-major over the real axes
//! `(x1, y1, ..., xn, yn)` with the last axis fastest. Derivatives are
//! Fourier multipliers; the Nyquist mode is dropped from every
//! first-derivative symbol and second derivatives use products of those
//! symbols, so discrete integration by parts holds exactly.
//!
//! Reported integrals are normalized by `∫ω^n`, which makes every integral
//! a grid mean for constant `ω`.

use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::dhym::{phase_of, slope_of};
use crate::error::{domain, Error, Result};
use crate::gma::GmaCoefficients;
use crate::io::write_atomic;
use crate::quadrature::gauss_legendre;
use crate::spectra::{binomial, index_subsets, symmetric_functions, HermitianMatrix, Pencil};

/// Default number of Gauss-Legendre nodes for path energies.
pub const DEFAULT_PATH_NODES: usize = 16;
/// Largest grid exported as CSV.
pub const CSV_MAX_POINTS: usize = 1 << 16;
const SNAPSHOT_MAGIC: &[u8; 4] = b"KFLD";
const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TorusGrid {
    n: usize,
    size: usize,
}

impl TorusGrid {
    pub fn new(n: usize, size: usize) -> Result<Self> {
        if !(1..=3).contains(&n) {
            return domain(format!("complex dimension {n} outside 1..=3"));
        }
        if size < 8 || !size.is_multiple_of(2) {
            return Err(Error::Resolution(format!(
                "points per axis must be even and at least 8, got {size}"
            )));
        }
        Ok(Self { n, size })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Points per real axis.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn axes(&self) -> usize {
        2 * self.n
    }

    pub fn points(&self) -> usize {
        self.size.pow(self.axes() as u32)
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.size as f64
    }

    /// Per-axis integer index of a point.
    pub fn digits(&self, point: usize) -> Vec<usize> {
        let d = self.axes();
        let mut out = vec![0; d];
        let mut p = point;
        for a in (0..d).rev() {
            out[a] = p % self.size;
            p /= self.size;
        }
        out
    }

    /// Real coordinates `(x1, y1, ..., xn, yn)` in `[0, 1)`.
    pub fn coords(&self, point: usize) -> Vec<f64> {
        self.digits(point)
            .into_iter()
            .map(|i| i as f64 / self.size as f64)
            .collect()
    }

    pub(crate) fn stride(&self, axis: usize) -> usize {
        self.size.pow((self.axes() - 1 - axis) as u32)
    }

    fn check_same(&self, other: &TorusGrid) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!(
                "n = {}, N = {} versus n = {}, N = {}",
                self.n, self.size, other.n, other.size
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField {
    grid: TorusGrid,
    values: Vec<f64>,
}

impl PotentialField {
    pub fn new(grid: TorusGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.points() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.points()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return domain(format!("non-finite potential value at point {i}"));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: TorusGrid, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.points()],
        }
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn from_fn(grid: TorusGrid, f: impl Fn(&[f64]) -> f64 + Sync) -> Self {
        let values = (0..grid.points())
            .into_par_iter()
            .map(|p| f(&grid.coords(p)))
            .collect();
        Self { grid, values }
    }

    pub(crate) fn from_raw(grid: TorusGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.points());
        Self { grid, values }
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn axpy(&self, a: f64, other: &Self) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(Self {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(x, y)| x + a * y).collect(),
        })
    }

    /// Subtracts the maximum so that `max = 0`.
    pub fn normalize_sup(&self) -> Self {
        let m = self.max();
        self.map(|v| v - m)
    }

    pub fn normalize_mean(&self) -> Self {
        let m = self.mean();
        self.map(|v| v - m)
    }
}

/// `background + i∂∂̄φ` sampled on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FormField {
    grid: TorusGrid,
    background: HermitianMatrix,
    /// `points × n × n`, row-major per point.
    hessian: Vec<Complex64>,
}

impl FormField {
    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn background(&self) -> &HermitianMatrix {
        &self.background
    }

    pub fn hessian(&self) -> &[Complex64] {
        &self.hessian
    }

    /// Full matrix at a point.
    pub fn at(&self, point: usize) -> HermitianMatrix {
        let n = self.grid.n;
        let mut m = Vec::with_capacity(n * n);
        self.entries_into(point, 1.0, &mut m);
        HermitianMatrix::from_raw(n, m)
    }

    /// Writes `background + s·hessian` at a point.
    fn entries_into(&self, point: usize, s: f64, out: &mut Vec<Complex64>) {
        let n2 = self.grid.n * self.grid.n;
        out.clear();
        out.extend(
            self.background
                .entries()
                .iter()
                .zip(&self.hessian[point * n2..(point + 1) * n2])
                .map(|(b, h)| b + h * s),
        );
    }

    /// Grid mean of each hessian entry.
    pub fn hessian_mean(&self) -> Vec<Complex64> {
        let n2 = self.grid.n * self.grid.n;
        let mut m = vec![Complex64::new(0.0, 0.0); n2];
        for chunk in self.hessian.chunks(n2) {
            for (a, b) in m.iter_mut().zip(chunk) {
                *a += b;
            }
        }
        let p = self.grid.points() as f64;
        m.iter().map(|z| z / p).collect()
    }

    /// Relative eigenvalues of `background + s·hessian` at every point,
    /// `points × n`, each block ascending.
    pub fn spectra_scaled(&self, pencil: &Pencil, s: f64) -> Vec<f64> {
        let n = self.grid.n;
        let mut out = vec![0.0; self.grid.points() * n];
        out.par_chunks_mut(n).enumerate().for_each_init(
            || (Vec::with_capacity(n * n), vec![Complex64::new(0.0, 0.0); n * n]),
            |(buf, work), (p, o)| {
                self.entries_into(p, s, buf);
                pencil.eigenvalues_into(buf, work, o);
            },
        );
        out
    }

    pub fn spectra(&self, pencil: &Pencil) -> Vec<f64> {
        self.spectra_scaled(pencil, 1.0)
    }
}

/// FFT plans and wavenumber tables for one grid.
pub struct Spectral {
    grid: TorusGrid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// First-derivative wavenumber per point and axis, Nyquist dropped.
    kappa: Vec<f64>,
    dealias: bool,
}

impl Spectral {
    pub fn new(grid: TorusGrid) -> Self {
        Self::with_dealiasing(grid, false)
    }

    /// With `dealias` set, modes above `N/3` are removed before
    /// differentiating (2/3 rule).
    pub fn with_dealiasing(grid: TorusGrid, dealias: bool) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(grid.size);
        let inverse = planner.plan_fft_inverse(grid.size);
        let d = grid.axes();
        let mut kappa = vec![0.0; grid.points() * d];
        for (p, row) in kappa.chunks_mut(d).enumerate() {
            for (a, i) in grid.digits(p).into_iter().enumerate() {
                row[a] = 2.0 * PI * signed_mode(i, grid.size) as f64;
            }
        }
        Self {
            grid,
            forward,
            inverse,
            kappa,
            dealias,
        }
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    fn transform(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let size = self.grid.size;
        let points = self.grid.points();
        let mut lines = vec![Complex64::new(0.0, 0.0); points];
        for axis in 0..self.grid.axes() {
            let stride = self.grid.stride(axis);
            let block = stride * size;
            // Gather every line along `axis` into a contiguous batch.
            let mut li = 0;
            for outer in (0..points).step_by(block) {
                for inner in 0..stride {
                    let base = outer + inner;
                    for m in 0..size {
                        lines[li * size + m] = data[base + m * stride];
                    }
                    li += 1;
                }
            }
            fft.process(&mut lines);
            li = 0;
            for outer in (0..points).step_by(block) {
                for inner in 0..stride {
                    let base = outer + inner;
                    for m in 0..size {
                        data[base + m * stride] = lines[li * size + m];
                    }
                    li += 1;
                }
            }
        }
    }

    pub fn forward_real(&self, values: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut data, &self.forward);
        if self.dealias {
            let d = self.grid.axes();
            let cut = (self.grid.size / 3) as u64;
            for (p, z) in data.iter_mut().enumerate() {
                if self
                    .grid
                    .digits(p)
                    .iter()
                    .take(d)
                    .any(|&i| signed_mode(i, self.grid.size).unsigned_abs() > cut || i == self.grid.size / 2)
                {
                    *z = Complex64::new(0.0, 0.0);
                }
            }
        }
        data
    }

    /// Normalized inverse transform.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inverse);
        let scale = 1.0 / self.grid.points() as f64;
        data.iter_mut().for_each(|z| *z *= scale);
    }

    fn k(&self, point: usize, axis: usize) -> f64 {
        self.kappa[point * self.grid.axes() + axis]
    }

    /// `∂²φ/∂z_j∂z̄_k` at every point, `points × n × n`.
    pub fn hessian(&self, phi: &[f64]) -> Vec<Complex64> {
        let n = self.grid.n;
        let points = self.grid.points();
        let hat = self.forward_real(phi);
        let mut out = vec![Complex64::new(0.0, 0.0); points * n * n];
        for j in 0..n {
            for k in j..n {
                let mut field: Vec<Complex64> = hat
                    .iter()
                    .enumerate()
                    .map(|(p, z)| {
                        let (xj, yj) = (self.k(p, 2 * j), self.k(p, 2 * j + 1));
                        let (xk, yk) = (self.k(p, 2 * k), self.k(p, 2 * k + 1));
                        let sym = Complex64::new(-(xj * xk + yj * yk), -(xj * yk - yj * xk)) * 0.25;
                        z * sym
                    })
                    .collect();
                self.inverse(&mut field);
                for (p, z) in field.into_iter().enumerate() {
                    let base = p * n * n;
                    if j == k {
                        out[base + j * n + j] = Complex64::new(z.re, 0.0);
                    } else {
                        out[base + j * n + k] = z;
                        out[base + k * n + j] = z.conj();
                    }
                }
            }
        }
        out
    }

    /// `∂φ/∂z_j` at every point, `points × n`.
    pub fn dz(&self, phi: &[f64]) -> Vec<Complex64> {
        let n = self.grid.n;
        let points = self.grid.points();
        let hat = self.forward_real(phi);
        let mut out = vec![Complex64::new(0.0, 0.0); points * n];
        for j in 0..n {
            let mut field: Vec<Complex64> = hat
                .iter()
                .enumerate()
                .map(|(p, z)| {
                    // (∂x − i∂y)/2 has symbol (iκx + κy)/2.
                    z * Complex64::new(self.k(p, 2 * j + 1), self.k(p, 2 * j)) * 0.5
                })
                .collect();
            self.inverse(&mut field);
            for (p, z) in field.into_iter().enumerate() {
                out[p * n + j] = z;
            }
        }
        out
    }

    /// `Σ_{jk} (ω⁻¹)_{kj} ∂²φ/∂z_j∂z̄_k` for constant `ω`.
    pub fn laplacian(&self, phi: &[f64], omega: &HermitianMatrix) -> Result<Vec<f64>> {
        let n = self.grid.n;
        let inv = inverse_matrix(omega)?;
        let hat = self.forward_real(phi);
        let mut field: Vec<Complex64> = hat
            .iter()
            .enumerate()
            .map(|(p, z)| {
                let mut sym = Complex64::new(0.0, 0.0);
                for j in 0..n {
                    for k in 0..n {
                        let (xj, yj) = (self.k(p, 2 * j), self.k(p, 2 * j + 1));
                        let (xk, yk) = (self.k(p, 2 * k), self.k(p, 2 * k + 1));
                        let s = Complex64::new(-(xj * xk + yj * yk), -(xj * yk - yj * xk)) * 0.25;
                        sym += inv[k * n + j] * s;
                    }
                }
                z * sym
            })
            .collect();
        self.inverse(&mut field);
        Ok(field.into_iter().map(|z| z.re).collect())
    }

    /// Periodic convolution with a real, even kernel given on the grid.
    fn convolve(&self, phi: &[f64], kernel: &[f64]) -> Vec<f64> {
        let mut k = kernel.iter().map(|&v| Complex64::new(v, 0.0)).collect::<Vec<_>>();
        self.transform(&mut k, &self.forward);
        let mut data: Vec<Complex64> = phi.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut data, &self.forward);
        for (a, b) in data.iter_mut().zip(&k) {
            *a *= b;
        }
        self.inverse(&mut data);
        data.into_iter().map(|z| z.re).collect()
    }

    pub fn form_field(&self, background: &HermitianMatrix, phi: &PotentialField) -> Result<FormField> {
        self.grid.check_same(&phi.grid)?;
        if background.dim() != self.grid.n {
            return Err(Error::GridMismatch("background dimension differs from grid".into()));
        }
        Ok(FormField {
            grid: self.grid,
            background: background.clone(),
            hessian: self.hessian(&phi.values),
        })
    }
}

/// Signed Fourier mode of index `i`; the Nyquist index maps to 0.
fn signed_mode(i: usize, size: usize) -> i64 {
    let half = size / 2;
    if i < half {
        i as i64
    } else if i == half {
        0
    } else {
        i as i64 - size as i64
    }
}

fn inverse_matrix(m: &HermitianMatrix) -> Result<Vec<Complex64>> {
    let n = m.dim();
    let mut a = m.entries().to_vec();
    let mut inv = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        inv[i * n + i] = Complex64::new(1.0, 0.0);
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| a[x * n + col].norm().total_cmp(&a[y * n + col].norm()))
            .unwrap_or(col);
        if a[pivot * n + col].norm() < 1e-300 {
            return Err(Error::Pencil("singular matrix".into()));
        }
        for j in 0..n {
            a.swap(col * n + j, pivot * n + j);
            inv.swap(col * n + j, pivot * n + j);
        }
        let d = a[col * n + col];
        for j in 0..n {
            a[col * n + j] /= d;
            inv[col * n + j] /= d;
        }
        for r in 0..n {
            if r != col {
                let f = a[r * n + col];
                for j in 0..n {
                    let (ac, ic) = (a[col * n + j], inv[col * n + j]);
                    a[r * n + j] -= f * ac;
                    inv[r * n + j] -= f * ic;
                }
            }
        }
    }
    Ok(inv)
}

/// Sum of `modes` random plane waves with integer wave vectors of
/// sup-norm at most `max_mode` and total amplitude `amplitude`.
pub fn random_trig_field<R: rand::Rng>(grid: TorusGrid, modes: usize, max_mode: i64, amplitude: f64, rng: &mut R) -> PotentialField {
    let d = grid.axes();
    let waves: Vec<(Vec<f64>, f64, f64)> = (0..modes)
        .map(|_| {
            let k: Vec<f64> = (0..d).map(|_| rng.gen_range(-max_mode..=max_mode) as f64).collect();
            let a = rng.gen_range(-1.0..1.0) * amplitude / modes as f64;
            (k, a, rng.gen_range(0.0..2.0 * PI))
        })
        .collect();
    PotentialField::from_fn(grid, |x| {
        waves
            .iter()
            .map(|(k, a, ph)| a * (2.0 * PI * k.iter().zip(x).map(|(k, x)| k * x).sum::<f64>() + ph).cos())
            .sum()
    })
}

/// The `i∂∂̄φ` part alone (zero background).
pub fn i_ddbar(phi: &PotentialField) -> FormField {
    let grid = phi.grid;
    let spectral = Spectral::new(grid);
    FormField {
        grid,
        background: HermitianMatrix::zeros(grid.n),
        hessian: spectral.hessian(&phi.values),
    }
}

pub fn chi_from_potential(background: &HermitianMatrix, phi: &PotentialField) -> Result<FormField> {
    Spectral::new(phi.grid).form_field(background, phi)
}

/// `S_k(λ(x)) / C(n,k)`, i.e. `χ^k∧ω^{n−k}/ω^n` pointwise.
pub fn wedge_ratio(field: &FormField, omega: &HermitianMatrix, k: usize) -> Result<PotentialField> {
    let n = field.grid.n;
    if k > n {
        return domain(format!("k = {k} exceeds n = {n}"));
    }
    let pencil = Pencil::new(omega)?;
    let spectra = field.spectra(&pencil);
    let b = binomial(n, k) as f64;
    let values = spectra
        .par_chunks(n)
        .map(|l| symmetric_functions(l)[k] / b)
        .collect();
    Ok(PotentialField::from_raw(field.grid, values))
}

/// Normalized integral `∫ f·density ω^n / ∫ ω^n`.
pub fn integrate(f: &PotentialField, density: Option<&PotentialField>) -> Result<f64> {
    match density {
        None => Ok(f.mean()),
        Some(d) => {
            f.grid.check_same(&d.grid)?;
            Ok(f.values.iter().zip(&d.values).map(|(a, b)| a * b).sum::<f64>() / f.values.len() as f64)
        }
    }
}

/// `∫ω^n` on the unit-period torus, with `ω = i Σ ω_{jk̄} dz_j∧dz̄_k`.
pub fn omega_volume(omega: &HermitianMatrix) -> f64 {
    let n = omega.dim();
    let det: f64 = omega.eigenvalues().values().iter().product();
    (1..=n).product::<usize>() as f64 * 2f64.powi(n as i32) * det
}

/// Absolute integral `∫ f·density ω^n`.
pub fn integrate_absolute(f: &PotentialField, density: Option<&PotentialField>, omega: &HermitianMatrix) -> Result<f64> {
    Ok(integrate(f, density)? * omega_volume(omega))
}

pub fn l1_distance(phi1: &PotentialField, phi2: &PotentialField) -> Result<f64> {
    phi1.grid.check_same(&phi2.grid)?;
    Ok(phi1.values.iter().zip(&phi2.values).map(|(a, b)| (a - b).abs()).sum::<f64>() / phi1.values.len() as f64)
}

pub fn linf_distance(phi1: &PotentialField, phi2: &PotentialField) -> Result<f64> {
    phi1.grid.check_same(&phi2.grid)?;
    Ok(phi1
        .values
        .iter()
        .zip(&phi2.values)
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs())))
}

pub fn normalize_sup(phi: &PotentialField) -> PotentialField {
    phi.normalize_sup()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MollifierSpec {
    /// Radius in real coordinates.
    pub delta: f64,
}

/// Discrete bump `exp(−1/(1−r²))`, `r = |x|/δ`, normalized to unit mass.
pub fn mollifier_kernel(grid: TorusGrid, spec: &MollifierSpec) -> Result<Vec<f64>> {
    let h = grid.spacing();
    if !(spec.delta >= h) {
        return Err(Error::Resolution(format!(
            "mollifier radius {} is below the grid spacing {h}",
            spec.delta
        )));
    }
    let size = grid.size;
    let mut kernel: Vec<f64> = (0..grid.points())
        .map(|p| {
            let r2: f64 = grid
                .digits(p)
                .iter()
                .map(|&i| {
                    let d = if i <= size / 2 { i as f64 } else { i as f64 - size as f64 };
                    (d * h / spec.delta).powi(2)
                })
                .sum();
            if r2 < 1.0 {
                (-1.0 / (1.0 - r2)).exp()
            } else {
                0.0
            }
        })
        .collect();
    let mass: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|v| *v /= mass);
    Ok(kernel)
}

pub fn mollify(phi: &PotentialField, spec: &MollifierSpec) -> Result<PotentialField> {
    let kernel = mollifier_kernel(phi.grid, spec)?;
    let spectral = Spectral::new(phi.grid);
    let mut values = spectral.convolve(&phi.values, &kernel);
    // Put back the mean lost to rounding in the transforms.
    let shift = phi.mean() - values.iter().sum::<f64>() / values.len() as f64;
    values.iter_mut().for_each(|v| *v += shift);
    Ok(PotentialField::from_raw(phi.grid, values))
}

/// Gauss-Legendre rule on `[0, 1]` for path energies.
#[derive(Debug, Clone)]
pub struct PathRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl PathRule {
    pub fn new(m: usize) -> Self {
        let (nodes, weights) = gauss_legendre(m);
        Self { nodes, weights }
    }
}

impl Default for PathRule {
    fn default() -> Self {
        Self::new(DEFAULT_PATH_NODES)
    }
}

pub(crate) type Integrand<'a> = &'a (dyn Fn(usize, &[f64]) -> f64 + Sync);

/// `∫₀¹ ∫ φ·g(x, λ_{tφ}(x)) dt` for each integrand `g`, sharing the path
/// spectra of a precomputed form field `χ_φ`. Fails at the first node
/// where `admissible` rejects a spectrum.
pub(crate) fn path_energies(
    field: &FormField,
    pencil: &Pencil,
    phi: &[f64],
    rule: &PathRule,
    admissible: impl Fn(&[f64]) -> Option<String> + Sync,
    integrands: &[Integrand<'_>],
) -> Result<Vec<f64>> {
    let n = field.grid.n;
    let mut totals = vec![0.0; integrands.len()];
    for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
        let spectra = field.spectra_scaled(pencil, t);
        if let Some((point, reason)) = spectra
            .par_chunks(n)
            .enumerate()
            .find_first(|(_, l)| admissible(l).is_some())
            .map(|(p, l)| (p, admissible(l).unwrap_or_default()))
        {
            return Err(Error::DegenerateField {
                point,
                path_t: Some(t),
                reason,
            });
        }
        for (total, g) in totals.iter_mut().zip(integrands) {
            let terms: Vec<f64> = spectra
                .par_chunks(n)
                .enumerate()
                .map(|(p, l)| phi[p] * g(p, l))
                .collect();
            *total += w * terms.iter().sum::<f64>() / terms.len() as f64;
        }
    }
    Ok(totals)
}

pub(crate) fn path_energy(
    field: &FormField,
    pencil: &Pencil,
    phi: &[f64],
    rule: &PathRule,
    admissible: impl Fn(&[f64]) -> Option<String> + Sync,
    integrand: impl Fn(usize, &[f64]) -> f64 + Sync,
) -> Result<f64> {
    Ok(path_energies(field, pencil, phi, rule, admissible, &[&integrand])?[0])
}

pub(crate) fn positive_spectrum(l: &[f64]) -> Option<String> {
    if l[0] > 0.0 {
        None
    } else {
        Some(format!("relative eigenvalue {} is not positive", l[0]))
    }
}

pub(crate) fn phase_in_window(l: &[f64]) -> Option<String> {
    let th = phase_of(l);
    if th > 0.0 && th < PI {
        None
    } else {
        Some(format!("Lagrangian phase {th} left (0, pi)"))
    }
}

/// Monge-Ampère energy `I` with `dI(φ)(ψ) = ∫ψ χ_φ^n`, normalized by `∫ω^n`.
pub fn ma_energy(
    background: &HermitianMatrix,
    omega: &HermitianMatrix,
    phi: &PotentialField,
    rule: &PathRule,
) -> Result<f64> {
    let field = chi_from_potential(background, phi)?;
    let pencil = Pencil::new(omega)?;
    ma_energy_of(&field, &pencil, phi, rule)
}

pub(crate) fn ma_energy_of(field: &FormField, pencil: &Pencil, phi: &PotentialField, rule: &PathRule) -> Result<f64> {
    path_energy(field, pencil, &phi.values, rule, positive_spectrum, ma_integrand)
}

pub(crate) fn ma_integrand(_: usize, l: &[f64]) -> f64 {
    l.iter().product()
}

/// gMA functional `J` with `dJ(φ)(ψ) = ∫ψ (Σ_k c_k χ_φ^k∧ω^{n−k} − χ_φ^n)`.
pub fn gma_j_energy(
    background: &HermitianMatrix,
    omega: &HermitianMatrix,
    coeffs: &GmaCoefficients,
    phi: &PotentialField,
    rule: &PathRule,
) -> Result<f64> {
    let field = chi_from_potential(background, phi)?;
    let pencil = Pencil::new(omega)?;
    gma_j_energy_of(&field, &pencil, coeffs, phi, rule)
}

pub(crate) fn gma_j_energy_of(
    field: &FormField,
    pencil: &Pencil,
    coeffs: &GmaCoefficients,
    phi: &PotentialField,
    rule: &PathRule,
) -> Result<f64> {
    let w = coeffs.weights();
    let n = coeffs.n();
    path_energy(field, pencil, &phi.values, rule, positive_spectrum, |p, l| {
        let s = symmetric_functions(l);
        let lower: f64 = (1..n).map(|k| w[k] * s[k]).sum();
        lower + coeffs.c0().at(p) - s[n]
    })
}

/// dHYM functional `J` with `dJ(φ)(ψ) = ∫ψ Im(e^{−iθ}(α_φ + iω)^n)/ω^n`.
pub fn dhym_j_energy(
    alpha: &HermitianMatrix,
    omega: &HermitianMatrix,
    theta: f64,
    phi: &PotentialField,
    rule: &PathRule,
) -> Result<f64> {
    let field = chi_from_potential(alpha, phi)?;
    let pencil = Pencil::new(omega)?;
    dhym_j_energy_of(&field, &pencil, theta, phi, rule)
}

pub(crate) fn dhym_j_energy_of(
    field: &FormField,
    pencil: &Pencil,
    theta: f64,
    phi: &PotentialField,
    rule: &PathRule,
) -> Result<f64> {
    let rot = Complex64::from_polar(1.0, -theta);
    path_energy(field, pencil, &phi.values, rule, phase_in_window, |_, l| (rot * slope_of(l)).im)
}

/// Pointwise density of the pairing of `i∂φ∧∂̄φ` with
/// `kχ^{k−1}∧ω^{n−k} − (χ^k∧ω^{n−k}/χ^n)·nχ^{n−1}` for constant `χ, ω`,
/// computed in the simultaneous eigenbasis. Nonpositive pointwise.
pub fn f_form_density(
    chi: &HermitianMatrix,
    omega: &HermitianMatrix,
    phi: &PotentialField,
    k: usize,
) -> Result<PotentialField> {
    let n = phi.grid.n;
    if k == 0 || k >= n {
        return domain(format!("k = {k} outside [1, {}]", n.saturating_sub(1)));
    }
    let l = crate::spectra::cholesky_factor(omega)?;
    let pencil = Pencil::new(omega)?;
    let (lam, u) = pencil.reduce(chi).eigen();
    let lam = lam.values().to_vec();
    if lam[0] <= 0.0 {
        return domain("f_form_density needs a positive background");
    }
    // P = L⁻* U gives P*ωP = I and P*χP = Λ; the coordinate change
    // z = P̄w carries dz_j to Σ_a P̄_ja dw_a.
    let l_inv_star = {
        let li = inverse_matrix(&HermitianMatrix::from_raw(n, l.clone()))?;
        let mut t = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                t[i * n + j] = li[j * n + i].conj();
            }
        }
        t
    };
    let mut pm = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            for m in 0..n {
                pm[i * n + j] += l_inv_star[i * n + m] * u[m * n + j];
            }
        }
    }
    let s = symmetric_functions(&lam);
    let coef: Vec<f64> = (0..n)
        .map(|a| {
            let rest: Vec<f64> = (0..n).filter(|&i| i != a).map(|i| lam[i]).collect();
            let sr = symmetric_functions(&rest);
            (sr[k - 1] - s[k] * sr[n - 1] / s[n]) / binomial(n, k) as f64
        })
        .collect();
    let dz = Spectral::new(phi.grid).dz(&phi.values);
    let values = dz
        .par_chunks(n)
        .map(|g| {
            (0..n)
                .map(|a| {
                    let comp: Complex64 = (0..n).map(|j| pm[j * n + a].conj() * g[j]).sum();
                    comp.norm_sqr() * coef[a]
                })
                .sum()
        })
        .collect();
    Ok(PotentialField::from_raw(phi.grid, values))
}

/// `∫_V χ^a ∧ ω^b` over a coordinate subtorus, from `det(sχ_V + tω_V)`.
fn mixed_volume(chi: &HermitianMatrix, omega: &HermitianMatrix, a: usize) -> f64 {
    let p = chi.dim();
    // coeffs[i] multiplies s^i t^{p−i}.
    let mut total = vec![Complex64::new(0.0, 0.0); p + 1];
    let mut perm: Vec<usize> = (0..p).collect();
    permutations(&mut perm, 0, &mut |sigma, sign| {
        let mut poly = vec![Complex64::new(0.0, 0.0); p + 1];
        poly[0] = Complex64::new(sign, 0.0);
        for (row, &col) in sigma.iter().enumerate() {
            let (cs, ct) = (chi.get(row, col), omega.get(row, col));
            let mut next = vec![Complex64::new(0.0, 0.0); p + 1];
            for (i, c) in poly.iter().enumerate() {
                if i < p {
                    next[i + 1] += c * cs;
                }
                next[i] += c * ct;
            }
            poly = next;
        }
        for (t, c) in total.iter_mut().zip(&poly) {
            *t += c;
        }
    });
    let fact = |m: usize| (1..=m).product::<usize>() as f64;
    fact(a) * fact(p - a) * total[a].re
}

fn permutations(v: &mut Vec<usize>, start: usize, f: &mut impl FnMut(&[usize], f64)) {
    fn rec(v: &mut Vec<usize>, start: usize, sign: f64, f: &mut impl FnMut(&[usize], f64)) {
        if start == v.len() {
            f(v, sign);
            return;
        }
        for i in start..v.len() {
            v.swap(start, i);
            rec(v, start + 1, if i == start { sign } else { -sign }, f);
            v.swap(start, i);
        }
    }
    rec(v, start, 1.0, f);
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubtorusMargin {
    pub p: usize,
    /// Complex coordinate axes spanning the subtorus.
    pub axes: Vec<usize>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntersectionReport {
    /// One entry per `p = 1..n` and coordinate `p`-subtorus; the `p = n`
    /// entry is evaluated at the forced `c0` and vanishes up to rounding.
    pub margins: Vec<SubtorusMargin>,
    pub forced_c0: f64,
    /// `∫χ^n`, `∫χ^kω^{n−k}` for `k = 0..=n` on the whole torus.
    pub mixed: Vec<f64>,
    pub reduced_by_pencil: bool,
}

impl IntersectionReport {
    /// Smallest margin over `p < n`, with its location.
    pub fn weakest(&self) -> Option<&SubtorusMargin> {
        let n = self.margins.iter().map(|m| m.p).max().unwrap_or(0);
        self.margins
            .iter()
            .filter(|m| m.p < n)
            .min_by(|a, b| a.value.total_cmp(&b.value))
    }

    pub fn all_positive(&self) -> bool {
        self.weakest().is_none_or(|m| m.value > 0.0)
    }
}

/// Commutator threshold for treating two constant classes as simultaneously
/// diagonal.
pub const COMMUTE_TOL: f64 = 1e-12;

/// Intersection margins of constant classes over coordinate subtori, with
/// `c = (c_1..c_{n−1})`.
pub fn intersection_numbers(
    chi: &HermitianMatrix,
    omega: &HermitianMatrix,
    c: &[f64],
    pencil_reduce: bool,
) -> Result<IntersectionReport> {
    let n = chi.dim();
    if omega.dim() != n || c.len() + 1 != n {
        return domain("dimension mismatch between classes and coefficients");
    }
    let scale = chi.frobenius_norm().max(omega.frobenius_norm()).max(1.0);
    let commuting = chi.commutator_norm(omega) < COMMUTE_TOL * scale * scale;
    let (chi, omega, reduced) = if commuting {
        (chi.clone(), omega.clone(), false)
    } else if pencil_reduce {
        let pencil = Pencil::new(omega)?;
        (pencil.reduce(chi), HermitianMatrix::identity(n), true)
    } else {
        return domain("chi and omega do not commute; enable pencil reduction");
    };
    let fact = |m: usize| (1..=m).product::<usize>() as f64;
    let mixed: Vec<f64> = (0..=n).map(|k| mixed_volume(&chi, &omega, k)).collect();
    let lower: f64 = (1..n).map(|k| c[k - 1] * mixed[k]).sum();
    let forced_c0 = (mixed[n] - lower) / mixed[0];
    let mut full_c = vec![forced_c0];
    full_c.extend_from_slice(c);
    let mut margins = Vec::new();
    for p in 1..=n {
        for axes in index_subsets(n, p) {
            let (cv, ov) = (chi.principal(&axes), omega.principal(&axes));
            let mut value = fact(n) / fact(p) * mixed_volume(&cv, &ov, p);
            for k in (n - p)..n {
                let a = k + p - n;
                value -= full_c[k] * fact(k) / fact(a) * mixed_volume(&cv, &ov, a);
            }
            margins.push(SubtorusMargin { p, axes, value });
        }
    }
    Ok(IntersectionReport {
        margins,
        forced_c0,
        mixed,
        reduced_by_pencil: reduced,
    })
}

/// Decoded snapshot payload.
#[derive(Debug, Clone, PartialEq)]
pub enum Snapshot {
    Scalar(PotentialField),
    /// Full Hermitian matrices, `points × n × n`.
    Form { grid: TorusGrid, entries: Vec<Complex64> },
}

fn header(grid: TorusGrid, kind: u32) -> Vec<u8> {
    let mut out = Vec::with_capacity(20);
    out.extend_from_slice(SNAPSHOT_MAGIC);
    for v in [SNAPSHOT_VERSION, grid.n as u32, grid.size as u32, kind] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn encode_scalar_snapshot(phi: &PotentialField) -> Vec<u8> {
    let mut out = header(phi.grid, 0);
    for v in &phi.values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn encode_form_snapshot(field: &FormField) -> Vec<u8> {
    let mut out = header(field.grid, 1);
    let mut buf = Vec::new();
    for p in 0..field.grid.points() {
        field.entries_into(p, 1.0, &mut buf);
        for z in &buf {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    out
}

pub fn decode_snapshot(bytes: &[u8]) -> Result<Snapshot> {
    let bad = |m: &str| Error::Io(format!("malformed snapshot: {m}"));
    if bytes.len() < 20 || &bytes[..4] != SNAPSHOT_MAGIC {
        return Err(bad("missing KFLD header"));
    }
    let word = |i: usize| u32::from_le_bytes([bytes[4 + 4 * i], bytes[5 + 4 * i], bytes[6 + 4 * i], bytes[7 + 4 * i]]);
    if word(0) != SNAPSHOT_VERSION {
        return Err(bad("unsupported version"));
    }
    let grid = TorusGrid::new(word(1) as usize, word(2) as usize)?;
    let payload = &bytes[20..];
    let reals: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    match word(3) {
        0 => {
            if payload.len() != grid.points() * 8 {
                return Err(bad("payload length"));
            }
            PotentialField::new(grid, reals).map(Snapshot::Scalar)
        }
        1 => {
            let n = grid.n;
            if payload.len() != grid.points() * n * n * 16 {
                return Err(bad("payload length"));
            }
            let entries = reals.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect();
            Ok(Snapshot::Form { grid, entries })
        }
        k => Err(bad(&format!("unknown field kind {k}"))),
    }
}

pub fn write_scalar_snapshot(path: &Path, phi: &PotentialField) -> Result<()> {
    write_atomic(path, &encode_scalar_snapshot(phi))
}

pub fn write_form_snapshot(path: &Path, field: &FormField) -> Result<()> {
    write_atomic(path, &encode_form_snapshot(field))
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    decode_snapshot(&std::fs::read(path)?)
}

fn coord_header(grid: TorusGrid) -> String {
    (1..=grid.n)
        .flat_map(|j| [format!("x{j}"), format!("y{j}")])
        .collect::<Vec<_>>()
        .join(",")
}

/// CSV with one row per grid point: coordinates then the value.
pub fn scalar_csv(phi: &PotentialField) -> Result<String> {
    let grid = phi.grid;
    if grid.points() > CSV_MAX_POINTS {
        return Err(Error::Resolution(format!("grid of {} points is too large for CSV", grid.points())));
    }
    let mut s = format!("{},value\n", coord_header(grid));
    for (p, v) in phi.values.iter().enumerate() {
        let c: Vec<String> = grid.coords(p).iter().map(|x| x.to_string()).collect();
        s.push_str(&format!("{},{v}\n", c.join(",")));
    }
    Ok(s)
}

/// CSV with coordinates then `re_jk,im_jk` for every matrix entry.
pub fn form_csv(field: &FormField) -> Result<String> {
    let grid = field.grid;
    if grid.points() > CSV_MAX_POINTS {
        return Err(Error::Resolution(format!("grid of {} points is too large for CSV", grid.points())));
    }
    let n = grid.n;
    let cols: Vec<String> = (1..=n)
        .flat_map(|j| (1..=n).flat_map(move |k| [format!("re_{j}{k}"), format!("im_{j}{k}")]))
        .collect();
    let mut s = format!("{},{}\n", coord_header(grid), cols.join(","));
    let mut buf = Vec::new();
    for p in 0..grid.points() {
        field.entries_into(p, 1.0, &mut buf);
        let c: Vec<String> = grid.coords(p).iter().map(|x| x.to_string()).collect();
        let e: Vec<String> = buf.iter().flat_map(|z| [z.re.to_string(), z.im.to_string()]).collect();
        s.push_str(&format!("{},{}\n", c.join(","), e.join(",")));
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gma::C0;

    fn grid(n: usize, size: usize) -> TorusGrid {
        TorusGrid::new(n, size).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(matches!(TorusGrid::new(2, 7), Err(Error::Resolution(_))));
        assert!(matches!(TorusGrid::new(2, 6), Err(Error::Resolution(_))));
        assert!(TorusGrid::new(4, 8).is_err());
        let g = grid(2, 8);
        assert_eq!(g.points(), 4096);
        assert_eq!(g.coords(1), vec![0.0, 0.0, 0.0, 0.125]);
    }

    #[test]
    fn hessian_of_cosine() {
        let g = grid(1, 16);
        let phi = PotentialField::from_fn(g, |x| (2.0 * PI * x[0]).cos());
        let h = i_ddbar(&phi);
        for p in 0..g.points() {
            let x = g.coords(p)[0];
            let expect = -PI * PI * (2.0 * PI * x).cos();
            assert!((h.hessian()[p] - Complex64::new(expect, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn constant_has_zero_hessian() {
        let g = grid(2, 8);
        let h = i_ddbar(&PotentialField::constant(g, 3.5));
        assert!(h.hessian().iter().all(|z| z.norm() < 1e-13));
    }

    #[test]
    fn mixed_hessian_entry_matches_analytic() {
        // φ = cos(2π(x1 + y2)): ∂z1∂z̄2 φ = (1/4)(∂x1 − i∂y1)(∂x2 + i∂y2) φ = (i/4)∂x1∂y2 φ.
        let g = grid(2, 8);
        let phi = PotentialField::from_fn(g, |x| (2.0 * PI * (x[0] + x[3])).cos());
        let h = i_ddbar(&phi);
        for p in (0..g.points()).step_by(37) {
            let x = g.coords(p);
            let d = -4.0 * PI * PI * (2.0 * PI * (x[0] + x[3])).cos();
            let expect = Complex64::new(0.0, 0.25 * d);
            assert!((h.hessian()[p * 4 + 1] - expect).norm() < 1e-11);
            assert!((h.hessian()[p * 4 + 2] - expect.conj()).norm() < 1e-11);
        }
    }

    #[test]
    fn chi_example_stays_positive() {
        let g = grid(1, 16);
        let phi = PotentialField::from_fn(g, |x| (2.0 * PI * x[0]).cos() / (PI * PI));
        let f = chi_from_potential(&HermitianMatrix::scalar(1, 2.0), &phi).unwrap();
        for p in 0..g.points() {
            let x = g.coords(p)[0];
            assert!((f.at(p).get(0, 0).re - (2.0 - (2.0 * PI * x).cos())).abs() < 1e-12);
        }
        assert!(f.hessian_mean()[0].norm() < 1e-15);
    }

    #[test]
    fn wedge_ratio_examples() {
        let g = grid(2, 8);
        let zero = PotentialField::zeros(g);
        let f = chi_from_potential(&HermitianMatrix::scalar(2, 2.0), &zero).unwrap();
        let id = HermitianMatrix::identity(2);
        assert!(wedge_ratio(&f, &id, 1).unwrap().values().iter().all(|v| (v - 2.0).abs() < 1e-14));
        assert!(wedge_ratio(&f, &id, 0).unwrap().values().iter().all(|v| *v == 1.0));
        let f = chi_from_potential(&id, &zero).unwrap();
        for k in 0..=2 {
            assert!(wedge_ratio(&f, &id, k).unwrap().values().iter().all(|v| (v - 1.0).abs() < 1e-14));
        }
    }

    #[test]
    fn integrals() {
        let g = grid(1, 8);
        assert_eq!(integrate(&PotentialField::constant(g, 2.5), None).unwrap(), 2.5);
        let c = PotentialField::from_fn(g, |x| (2.0 * PI * x[0]).cos());
        assert!(integrate(&c, None).unwrap().abs() < 1e-14);
        assert!(integrate(&c, Some(&PotentialField::zeros(grid(1, 10)))).is_err());
        assert!((omega_volume(&HermitianMatrix::identity(1)) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn distances_and_normalization() {
        let g = grid(1, 8);
        let a = PotentialField::from_fn(g, |x| (2.0 * PI * x[1]).sin());
        let b = a.map(|v| v + 0.3);
        assert_eq!(l1_distance(&a, &a).unwrap(), 0.0);
        assert!((l1_distance(&a, &b).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(normalize_sup(&b).max(), 0.0);
    }

    #[test]
    fn mollifier_basics() {
        let g = grid(2, 8);
        let k = mollifier_kernel(g, &MollifierSpec { delta: 2.0 / 8.0 }).unwrap();
        assert!(k.iter().all(|v| *v >= 0.0));
        assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        let c = PotentialField::constant(g, 1.25);
        let m = mollify(&c, &MollifierSpec { delta: 0.25 }).unwrap();
        assert!(m.values().iter().all(|v| (v - 1.25).abs() < 1e-14));
        assert!(matches!(
            mollify(&c, &MollifierSpec { delta: 0.01 }),
            Err(Error::Resolution(_))
        ));
    }

    #[test]
    fn energies_vanish_at_zero() {
        let g = grid(2, 8);
        let zero = PotentialField::zeros(g);
        let id = HermitianMatrix::identity(2);
        let chi = HermitianMatrix::scalar(2, 2.0);
        let co = GmaCoefficients::constant(2, vec![1.0], 2.0).unwrap();
        let rule = PathRule::default();
        assert_eq!(ma_energy(&chi, &id, &zero, &rule).unwrap(), 0.0);
        assert_eq!(gma_j_energy(&chi, &id, &co, &zero, &rule).unwrap(), 0.0);
        assert_eq!(dhym_j_energy(&id, &id, PI / 2.0, &zero, &rule).unwrap(), 0.0);
        // Constant shift: I(c) = c ∫χ^n and J(c) = 0 where Q ≡ 1.
        let c = PotentialField::constant(g, 0.7);
        let e = ma_energy(&chi, &id, &c, &rule).unwrap();
        assert!((e - 0.7 * 4.0).abs() < 1e-12, "{e}");
        assert!(gma_j_energy(&chi, &id, &co, &c, &rule).unwrap().abs() < 1e-13);
        let _ = C0::Constant(0.0);
    }

    #[test]
    fn energy_reports_failing_path_point() {
        let g = grid(1, 8);
        let phi = PotentialField::from_fn(g, |x| (2.0 * PI * x[0]).cos());
        let err = ma_energy(&HermitianMatrix::identity(1), &HermitianMatrix::identity(1), &phi, &PathRule::new(4));
        assert!(matches!(err, Err(Error::DegenerateField { path_t: Some(_), .. })));
    }

    #[test]
    fn intersection_examples() {
        let r = intersection_numbers(&HermitianMatrix::scalar(2, 2.0), &HermitianMatrix::identity(2), &[1.0], false).unwrap();
        assert_eq!(r.forced_c0, 2.0);
        let p1: Vec<f64> = r.margins.iter().filter(|m| m.p == 1).map(|m| m.value).collect();
        assert_eq!(p1, vec![3.0, 3.0]);
        assert!(r.all_positive());
        let top = r.margins.iter().find(|m| m.p == 2).unwrap();
        assert!(top.value.abs() < 1e-12);
        let r = intersection_numbers(&HermitianMatrix::identity(3), &HermitianMatrix::identity(3), &[0.0, 0.0], false).unwrap();
        assert!((r.forced_c0 - 1.0).abs() < 1e-15);
        assert!(r.all_positive());
    }

    #[test]
    fn non_commuting_needs_pencil() {
        let chi = HermitianMatrix::from_real_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let omega = HermitianMatrix::diagonal(&[1.0, 2.0]);
        assert!(intersection_numbers(&chi, &omega, &[1.0], false).is_err());
        let r = intersection_numbers(&chi, &omega, &[1.0], true).unwrap();
        assert!(r.reduced_by_pencil);
    }

    #[test]
    fn snapshot_round_trip() {
        let g = grid(1, 8);
        let phi = PotentialField::from_fn(g, |x| x[0] - 2.0 * x[1]);
        let bytes = encode_scalar_snapshot(&phi);
        assert_eq!(&bytes[..4], b"KFLD");
        assert_eq!(bytes.len(), 20 + 64 * 8);
        assert_eq!(decode_snapshot(&bytes).unwrap(), Snapshot::Scalar(phi.clone()));
        let f = chi_from_potential(&HermitianMatrix::identity(1), &phi.map(|v| 0.01 * v)).unwrap();
        match decode_snapshot(&encode_form_snapshot(&f)).unwrap() {
            Snapshot::Form { entries, .. } => assert_eq!(entries[5], f.at(5).get(0, 0)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(decode_snapshot(b"nope").is_err());
        assert!(scalar_csv(&phi).unwrap().starts_with("x1,y1,value\n"));
    }
}
