//! Symmetric functions of eigenvalue vectors, Hermitian pencils and
//! majorization.
//!
//! Eigenvalues of `ω⁻¹χ` are obtained by reducing the pencil with the
//! Cholesky factor `ω = L L*` and running cyclic complex Jacobi sweeps on
//! `L⁻¹ χ L⁻*`. Spectra are always sorted ascending.

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::scalar::Scalar;

/// Off-diagonal Frobenius tolerance of the Jacobi sweeps, relative to
/// `max(1, ‖A‖_F)`.
pub const JACOBI_TOL: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 100;
/// Hermiticity tolerance applied to externally supplied matrices.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Positive-definiteness threshold for `ω`.
pub const PD_TOL: f64 = 1e-12;

/// Dense `n × n` Hermitian matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl HermitianMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar(n, 1.0)
    }

    pub fn scalar(n: usize, s: f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(s, 0.0);
        }
        m
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n);
        for (i, d) in diag.iter().enumerate() {
            m.data[i * n + i] = Complex64::new(*d, 0.0);
        }
        m
    }

    /// Builds from complex row-major entries, checking Hermiticity to
    /// [`HERMITIAN_TOL`] and then symmetrizing exactly.
    pub fn from_entries(n: usize, entries: Vec<Complex64>) -> Result<Self> {
        if n == 0 || entries.len() != n * n {
            return domain(format!(
                "expected {} entries for an {n}x{n} matrix, got {}",
                n * n,
                entries.len()
            ));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return domain("matrix entries must be finite");
        }
        let scale = entries.iter().map(|z| z.norm()).fold(1.0, f64::max);
        for j in 0..n {
            for k in 0..n {
                let defect = (entries[j * n + k] - entries[k * n + j].conj()).norm();
                if defect > HERMITIAN_TOL * scale {
                    return domain(format!(
                        "matrix is not Hermitian at ({j},{k}): defect {defect:e}"
                    ));
                }
            }
        }
        let mut m = Self { n, data: entries };
        m.symmetrize();
        Ok(m)
    }

    /// Real symmetric rows.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return domain("matrix rows must be square");
        }
        let entries = rows
            .iter()
            .flat_map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)))
            .collect();
        Self::from_entries(n, entries)
    }

    pub(crate) fn from_raw(n: usize, data: Vec<Complex64>) -> Self {
        debug_assert_eq!(data.len(), n * n);
        Self { n, data }
    }

    fn symmetrize(&mut self) {
        let n = self.n;
        for j in 0..n {
            self.data[j * n + j].im = 0.0;
            for k in (j + 1)..n {
                let avg = (self.data[j * n + k] + self.data[k * n + j].conj()) * 0.5;
                self.data[j * n + k] = avg;
                self.data[k * n + j] = avg.conj();
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, j: usize, k: usize) -> Complex64 {
        self.data[j * self.n + k]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        Self {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        Self {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    /// `M* A M` for an arbitrary square `M` (row-major).
    pub fn congruence(&self, m: &[Complex64]) -> Self {
        let n = self.n;
        assert_eq!(m.len(), n * n);
        let am = matmul(&self.data, m, n);
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                let mut s = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    s += m[k * n + i].conj() * am[k * n + j];
                }
                out[i * n + j] = s;
            }
        }
        let mut h = Self { n, data: out };
        h.symmetrize();
        h
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Principal submatrix on the given (sorted, distinct) indices.
    pub fn principal(&self, idx: &[usize]) -> Self {
        let p = idx.len();
        let mut data = Vec::with_capacity(p * p);
        for &a in idx {
            for &b in idx {
                data.push(self.get(a, b));
            }
        }
        Self { n: p, data }
    }

    /// Frobenius norm of `AB − BA`.
    pub fn commutator_norm(&self, other: &Self) -> f64 {
        let ab = matmul(&self.data, &other.data, self.n);
        let ba = matmul(&other.data, &self.data, self.n);
        ab.iter().zip(&ba).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
    }

    /// Eigenvalues by cyclic Jacobi, ascending.
    pub fn eigenvalues(&self) -> Spectrum {
        let mut work = self.data.clone();
        let mut out = vec![0.0; self.n];
        jacobi_eigenvalues(&mut work, self.n, &mut out, None);
        Spectrum::from_sorted_unchecked(out)
    }

    /// Eigenvalues (ascending) and the unitary whose columns are the
    /// matching eigenvectors.
    pub fn eigen(&self) -> (Spectrum, Vec<Complex64>) {
        let n = self.n;
        let mut work = self.data.clone();
        let mut vecs = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            vecs[i * n + i] = Complex64::new(1.0, 0.0);
        }
        let mut out = vec![0.0; n];
        jacobi_eigenvalues(&mut work, n, &mut out, Some(&mut vecs));
        (Spectrum::from_sorted_unchecked(out), vecs)
    }
}

fn matmul(a: &[Complex64], b: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

/// Ascending real eigenvalue vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    /// Sorts ascending (stable) and rejects non-finite entries.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return domain("spectrum must be non-empty");
        }
        if values.iter().any(|v| !v.is_finite()) {
            return domain("spectrum entries must be finite");
        }
        values.sort_by(|a, b| a.total_cmp(b));
        Ok(Self { values })
    }

    pub(crate) fn from_sorted_unchecked(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn scaled(&self, t: f64) -> Result<Self> {
        Self::new(self.values.iter().map(|v| v * t).collect())
    }
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn index_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < n - k + i {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        cur[i] += 1;
        for j in (i + 1)..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// All elementary symmetric functions `S_0..S_n`, built by multiplying out
/// `Π (1 + λ_j t)` one factor at a time.
pub fn symmetric_functions<T: Scalar>(values: &[T]) -> Vec<T> {
    let n = values.len();
    let mut e = vec![T::zero(); n + 1];
    e[0] = T::one();
    for (j, v) in values.iter().enumerate() {
        for k in (1..=j + 1).rev() {
            let prev = e[k - 1].clone() * v.clone();
            e[k] = e[k].clone() + prev;
        }
    }
    e
}

/// `f64` version of [`symmetric_functions`] writing `S_0..S_n` into `out`.
pub fn symmetric_into(values: &[f64], out: &mut [f64]) {
    let n = values.len();
    out[..=n].fill(0.0);
    out[0] = 1.0;
    for (j, v) in values.iter().enumerate() {
        for k in (1..=j + 1).rev() {
            out[k] += out[k - 1] * v;
        }
    }
}

/// `S_k` with the convention `S_k = 0` for `k < 0` and `k > n`.
pub fn symmetric_at<T: Scalar>(values: &[T], k: i64) -> T {
    if k < 0 || k as usize > values.len() {
        return T::zero();
    }
    symmetric_functions(values).swap_remove(k as usize)
}

/// `S_{k; i_1..i_l}`: `S_k` with the excluded entries set to zero, and zero
/// when the excluded indices repeat.
pub fn restricted_symmetric_generic<T: Scalar>(values: &[T], k: i64, excluded: &[usize]) -> Result<T> {
    let n = values.len();
    if let Some(&bad) = excluded.iter().find(|&&i| i >= n) {
        return domain(format!("excluded index {bad} out of range for n = {n}"));
    }
    let mut seen = vec![false; n];
    for &i in excluded {
        if seen[i] {
            return Ok(T::zero());
        }
        seen[i] = true;
    }
    let kept: Vec<T> = values
        .iter()
        .enumerate()
        .filter(|(i, _)| !seen[*i])
        .map(|(_, v)| v.clone())
        .collect();
    Ok(symmetric_at(&kept, k))
}

/// `S_k(λ)`, defined for `−1 ≤ k ≤ n`.
pub fn elementary_symmetric(lambda: &Spectrum, k: i64) -> Result<f64> {
    let n = lambda.dim() as i64;
    if k < -1 || k > n {
        return domain(format!("k = {k} outside [-1, {n}]"));
    }
    Ok(symmetric_at(lambda.values(), k))
}

pub fn restricted_symmetric(lambda: &Spectrum, k: i64, excluded: &[usize]) -> Result<f64> {
    let n = lambda.dim() as i64;
    if k < -1 || k > n {
        return domain(format!("k = {k} outside [-1, {n}]"));
    }
    restricted_symmetric_generic(lambda.values(), k, excluded)
}

/// Cyclic Jacobi on a Hermitian matrix stored row-major in `a` (destroyed).
/// Writes ascending eigenvalues to `out`; when `vecs` is given it must hold
/// the identity on entry and receives the eigenvectors as columns.
pub fn jacobi_eigenvalues(a: &mut [Complex64], n: usize, out: &mut [f64], mut vecs: Option<&mut [Complex64]>) {
    debug_assert_eq!(a.len(), n * n);
    if vecs.is_none() && n <= 2 {
        if n == 1 {
            out[0] = a[0].re;
        } else if n == 2 {
            let (p, q) = (a[0].re, a[3].re);
            let m = 0.5 * (p + q);
            let r = (0.5 * (p - q)).hypot(a[1].norm());
            out[0] = m - r;
            out[1] = m + r;
        }
        return;
    }
    let total: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let tol = JACOBI_TOL * total.max(1.0);
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += 2.0 * a[p * n + q].norm_sqr();
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let phase = apq / r;
                let theta = (aqq - app) / (2.0 * r);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // G = [[c, s], [-s e^{-iφ}, c e^{-iφ}]] on (p, q); A <- G* A G.
                let e_minus = phase.conj();
                for row in 0..n {
                    let xp = a[row * n + p];
                    let xq = a[row * n + q];
                    a[row * n + p] = xp * c - xq * e_minus * s;
                    a[row * n + q] = xp * s + xq * e_minus * c;
                }
                for col in 0..n {
                    let xp = a[p * n + col];
                    let xq = a[q * n + col];
                    a[p * n + col] = xp * c - xq * phase * s;
                    a[q * n + col] = xp * s + xq * phase * c;
                }
                a[p * n + q] = Complex64::new(0.0, 0.0);
                a[q * n + p] = Complex64::new(0.0, 0.0);
                a[p * n + p].im = 0.0;
                a[q * n + q].im = 0.0;
                if let Some(v) = vecs.as_deref_mut() {
                    for row in 0..n {
                        let xp = v[row * n + p];
                        let xq = v[row * n + q];
                        v[row * n + p] = xp * c - xq * e_minus * s;
                        v[row * n + q] = xp * s + xq * e_minus * c;
                    }
                }
            }
        }
    }
    for i in 0..n {
        out[i] = a[i * n + i].re;
    }
    match vecs {
        None => out.sort_by(|x, y| x.total_cmp(y)),
        Some(v) => {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&x, &y| out[x].total_cmp(&out[y]));
            let vals: Vec<f64> = order.iter().map(|&i| out[i]).collect();
            let old = v.to_vec();
            for (new_col, &old_col) in order.iter().enumerate() {
                for row in 0..n {
                    v[row * n + new_col] = old[row * n + old_col];
                }
            }
            out.copy_from_slice(&vals);
        }
    }
}

/// Reduction of the pencil `(χ, ω)` to a standard Hermitian problem through
/// the Cholesky factor of `ω`.
#[derive(Debug, Clone)]
pub struct Pencil {
    n: usize,
    l_inv: Vec<Complex64>,
}

impl Pencil {
    pub fn new(omega: &HermitianMatrix) -> Result<Self> {
        let n = omega.dim();
        let spec = omega.eigenvalues();
        let scale = spec.values().iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        if spec.min() <= PD_TOL * scale {
            return Err(Error::Pencil(format!(
                "omega is not positive definite (min eigenvalue {:e})",
                spec.min()
            )));
        }
        let l = cholesky_factor(omega)?;
        // Invert the lower-triangular factor column by column.
        let mut l_inv = vec![Complex64::new(0.0, 0.0); n * n];
        for col in 0..n {
            for i in col..n {
                let mut s = if i == col {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                for k in col..i {
                    s -= l[i * n + k] * l_inv[k * n + col];
                }
                l_inv[i * n + col] = s / l[i * n + i];
            }
        }
        Ok(Self { n, l_inv })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `L⁻¹ A L⁻*` written into `out` (row-major, Hermitian).
    pub fn reduce_into(&self, a: &[Complex64], out: &mut [Complex64]) {
        let n = self.n;
        let li = &self.l_inv;
        // tmp = L⁻¹ A, then out = tmp L⁻*.
        let mut tmp = [Complex64::new(0.0, 0.0); 64];
        let tmp = if n * n <= 64 {
            &mut tmp[..n * n]
        } else {
            return self.reduce_into_heap(a, out);
        };
        for i in 0..n {
            for j in 0..n {
                let mut s = Complex64::new(0.0, 0.0);
                for k in 0..=i {
                    s += li[i * n + k] * a[k * n + j];
                }
                tmp[i * n + j] = s;
            }
        }
        for i in 0..n {
            for j in 0..n {
                let mut s = Complex64::new(0.0, 0.0);
                for k in 0..=j {
                    s += tmp[i * n + k] * li[j * n + k].conj();
                }
                out[i * n + j] = s;
            }
        }
        for i in 0..n {
            out[i * n + i].im = 0.0;
        }
    }

    fn reduce_into_heap(&self, a: &[Complex64], out: &mut [Complex64]) {
        let n = self.n;
        let li = &self.l_inv;
        let mut tmp = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..=i {
                    tmp[i * n + j] += li[i * n + k] * a[k * n + j];
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                let mut s = Complex64::new(0.0, 0.0);
                for k in 0..=j {
                    s += tmp[i * n + k] * li[j * n + k].conj();
                }
                out[i * n + j] = s;
            }
        }
        for i in 0..n {
            out[i * n + i].im = 0.0;
        }
    }

    pub fn reduce(&self, chi: &HermitianMatrix) -> HermitianMatrix {
        let mut out = vec![Complex64::new(0.0, 0.0); self.n * self.n];
        self.reduce_into(chi.entries(), &mut out);
        let mut h = HermitianMatrix::from_raw(self.n, out);
        h.symmetrize();
        h
    }

    /// Eigenvalues of `ω⁻¹ A` for raw row-major `A`; `work` needs `n²` slots.
    pub fn eigenvalues_into(&self, a: &[Complex64], work: &mut [Complex64], out: &mut [f64]) {
        self.reduce_into(a, work);
        jacobi_eigenvalues(work, self.n, out, None);
    }

    pub fn eigenvalues(&self, chi: &HermitianMatrix) -> Result<Spectrum> {
        if chi.dim() != self.n {
            return domain("pencil dimension mismatch");
        }
        let mut work = vec![Complex64::new(0.0, 0.0); self.n * self.n];
        let mut out = vec![0.0; self.n];
        self.eigenvalues_into(chi.entries(), &mut work, &mut out);
        Spectrum::new(out)
    }
}

/// Lower-triangular `L` with `ω = L L*`, row-major.
pub(crate) fn cholesky_factor(omega: &HermitianMatrix) -> Result<Vec<Complex64>> {
    let n = omega.dim();
    let mut l = vec![Complex64::new(0.0, 0.0); n * n];
    for j in 0..n {
        let mut d = omega.get(j, j).re;
        for k in 0..j {
            d -= l[j * n + k].norm_sqr();
        }
        if d <= 0.0 {
            return Err(Error::Pencil("Cholesky factorization broke down".into()));
        }
        let d = d.sqrt();
        l[j * n + j] = Complex64::new(d, 0.0);
        for i in (j + 1)..n {
            let mut s = omega.get(i, j);
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k].conj();
            }
            l[i * n + j] = s / d;
        }
    }
    Ok(l)
}

/// Eigenvalues of `ω⁻¹χ`, ascending.
pub fn relative_eigenvalues(chi: &HermitianMatrix, omega: &HermitianMatrix) -> Result<Spectrum> {
    if chi.dim() != omega.dim() {
        return domain("chi and omega dimensions differ");
    }
    Pencil::new(omega)?.eigenvalues(chi)
}

/// Tolerance on the equality of total sums in [`majorizes`].
pub const MAJORIZATION_TOL: f64 = 1e-10;

/// `λ ≺ μ`: descending partial sums of `λ` never exceed those of `μ` and the
/// totals agree.
pub fn majorizes(mu: &Spectrum, lambda: &Spectrum) -> Result<bool> {
    if mu.dim() != lambda.dim() {
        return domain("majorization needs equal lengths");
    }
    let mut sm = 0.0;
    let mut sl = 0.0;
    let n = mu.dim();
    let scale = mu
        .values()
        .iter()
        .chain(lambda.values())
        .fold(1.0_f64, |m, v| m.max(v.abs()));
    let tol = MAJORIZATION_TOL * scale;
    for i in (0..n).rev() {
        sm += mu.values()[i];
        sl += lambda.values()[i];
        if i > 0 && sl > sm + tol {
            return Ok(false);
        }
    }
    Ok((sm - sl).abs() <= tol)
}

/// Successive Maclaurin gaps `(S_k/C(n,k))^{1/k} − (S_{k+1}/C(n,k+1))^{1/(k+1)}`
/// for `k = 1..n−1`; nonnegative for positive spectra.
pub fn newton_maclaurin_margin(lambda: &Spectrum) -> Result<Vec<f64>> {
    if lambda.min() <= 0.0 {
        return domain("Newton-Maclaurin margins need strictly positive eigenvalues");
    }
    let n = lambda.dim();
    let s = symmetric_functions(lambda.values());
    let mean = |k: usize| (s[k] / binomial(n, k) as f64).powf(1.0 / k as f64);
    Ok((1..n).map(|k| mean(k) - mean(k + 1)).collect())
}
