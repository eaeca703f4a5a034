//! Generalized Monge-Ampère operators on eigenvalue vectors.
//!
//! With weights `w_k = c_k / C(n,k)` the equation `χ^n = Σ c_k χ^k∧ω^{n−k}`
//! reads `Q = (Σ_k w_k S_k + c0) / S_n = 1` pointwise, and the cone `Γ̄` is cut
//! out by `P¹ ≤ 1` where
//!
//! ```text
//! P^ℓ(λ) = max_I Σ_k w_k S_{k−ℓ;I}(λ) / S_{n−ℓ;I}(λ)
//! ```
//!
//! over ℓ-subsets `I`. Everything that has to be checked exactly is written
//! over [`Scalar`] so tests can run it on rationals.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::sampling::{
    cholesky, lift, log_uniform_spectrum, random_hermitian_with, random_pd, random_psd, sample_rng,
};
use crate::scalar::Scalar;
use crate::spectra::{binomial, index_subsets, symmetric_functions, Pencil, Spectrum};

/// Absolute tolerance on eigenvalues in cone tests.
pub const EIG_TOL: f64 = 1e-12;
/// Absolute tolerance on operator values in positivity tests.
pub const OP_TOL: f64 = 1e-10;
/// Slack used by the sampled monotonicity and convexity checks.
pub const PROBE_SLACK: f64 = 1e-9;

/// The zeroth-order coefficient: a constant or one value per grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum C0 {
    Constant(f64),
    Field(Vec<f64>),
}

impl C0 {
    pub fn min(&self) -> f64 {
        match self {
            C0::Constant(v) => *v,
            C0::Field(f) => f.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            C0::Constant(v) => *v,
            C0::Field(f) => f.iter().sum::<f64>() / f.len() as f64,
        }
    }

    pub fn at(&self, point: usize) -> f64 {
        match self {
            C0::Constant(v) => *v,
            C0::Field(f) => f[point],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GmaCoefficients {
    n: usize,
    c: Vec<f64>,
    c0: C0,
    c0_floor: f64,
}

impl GmaCoefficients {
    /// `c` holds `c_1..c_{n−1}`.
    pub fn new(n: usize, c: Vec<f64>, c0: C0, c0_floor: f64) -> Result<Self> {
        let coeffs = Self::unchecked(n, c, c0, c0_floor);
        coeffs.validate()?;
        Ok(coeffs)
    }

    pub fn constant(n: usize, c: Vec<f64>, c0: f64) -> Result<Self> {
        Self::new(n, c, C0::Constant(c0), 0.0)
    }

    /// Skips validation; used to inject deliberately invalid fixtures.
    pub fn unchecked(n: usize, c: Vec<f64>, c0: C0, c0_floor: f64) -> Self {
        Self { n, c, c0, c0_floor }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if n == 0 {
            return domain("dimension must be positive");
        }
        if self.c.len() != n - 1 {
            return domain(format!("expected {} coefficients c_1..c_{}, got {}", n - 1, n - 1, self.c.len()));
        }
        if let Some((k, v)) = self.c.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0) {
            return domain(format!("c_{} = {v} must be finite and nonnegative", k + 1));
        }
        if !self.c0_floor.is_finite() || self.c0_floor < 0.0 {
            return domain("c0_floor must be finite and nonnegative");
        }
        let c0_vals: &[f64] = match &self.c0 {
            C0::Constant(v) => std::slice::from_ref(v),
            C0::Field(f) if f.is_empty() => return domain("c0 field is empty"),
            C0::Field(f) => f,
        };
        if c0_vals.iter().any(|v| !v.is_finite()) {
            return domain("c0 must be finite");
        }
        let min = self.c0.min();
        if min < -self.c0_floor {
            return domain(format!("c0 = {min} falls below the floor -{}", self.c0_floor));
        }
        if self.is_ma_regime() {
            if min <= 0.0 {
                return domain("Monge-Ampere regime (all c_k = 0) needs c0 > 0 everywhere");
            }
        } else if self.c0.mean() < 0.0 {
            return domain("the mean of c0 must be nonnegative");
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `c_1..c_{n−1}`.
    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn c0(&self) -> &C0 {
        &self.c0
    }

    pub fn c0_floor(&self) -> f64 {
        self.c0_floor
    }

    pub fn is_ma_regime(&self) -> bool {
        self.c.iter().all(|&v| v == 0.0)
    }

    pub fn with_c0(&self, c0: C0) -> Self {
        Self { c0, ..self.clone() }
    }

    pub fn with_c(&self, c: Vec<f64>) -> Self {
        Self { c, ..self.clone() }
    }

    /// `w_k = c_k / C(n,k)` for `k = 0..=n`, zero at both ends.
    pub fn weights(&self) -> Vec<f64> {
        let n = self.n;
        let mut w = vec![0.0; n + 1];
        for k in 1..n {
            w[k] = self.c[k - 1] / binomial(n, k) as f64;
        }
        w
    }
}

/// Value of `P^ℓ` allowing for vanishing denominators.
#[derive(Debug, Clone, PartialEq)]
pub enum Extended<T> {
    Finite(T),
    Infinite,
    /// Every tuple had `0/0`.
    Undefined,
}

#[derive(Debug, Clone)]
pub struct PEvaluation<T> {
    pub value: Extended<T>,
    /// Maximizing tuple.
    pub argmax: Option<Vec<usize>>,
    pub any_denominator: bool,
}

/// `P^ℓ` over exact or floating scalars; `weights` as in
/// [`GmaCoefficients::weights`], `values` assumed nonnegative.
pub fn p_extended<T: Scalar>(values: &[T], weights: &[T], ell: usize) -> PEvaluation<T> {
    let n = values.len();
    let mut best: Extended<T> = Extended::Undefined;
    let mut argmax = None;
    let mut any_denominator = false;
    for tuple in index_subsets(n, ell) {
        let rest: Vec<T> = (0..n)
            .filter(|i| !tuple.contains(i))
            .map(|i| values[i].clone())
            .collect();
        let e = symmetric_functions(&rest);
        let den = e[n - ell].clone();
        let mut num = T::zero();
        for k in ell..n {
            num = num + weights[k].clone() * e[k - ell].clone();
        }
        let candidate = if den.is_zero() {
            if num.is_zero() {
                continue;
            }
            Extended::Infinite
        } else {
            any_denominator = true;
            Extended::Finite(num / den)
        };
        let better = match (&best, &candidate) {
            (Extended::Infinite, _) => false,
            (_, Extended::Infinite) => true,
            (Extended::Undefined, _) => true,
            (Extended::Finite(b), Extended::Finite(c)) => c > b,
            _ => false,
        };
        if better {
            best = candidate;
            argmax = Some(tuple);
        }
    }
    PEvaluation {
        value: best,
        argmax,
        any_denominator,
    }
}

/// `Q` over exact or floating scalars; `None` when `S_n ≤ 0`.
pub fn q_generic<T: Scalar>(values: &[T], weights: &[T], c0: T) -> Option<T> {
    let n = values.len();
    let e = symmetric_functions(values);
    if e[n] <= T::zero() {
        return None;
    }
    let mut num = c0;
    for k in 1..n {
        num = num + weights[k].clone() * e[k].clone();
    }
    Some(num / e[n].clone())
}

fn factorial<T: Scalar>(m: usize) -> T {
    T::from_u64((1..=m as u64).product())
}

/// Eigenbasis coefficients of `T^p`, one per `p`-subset in lexicographic
/// order; `c` holds `c_0..c_{n−1}`.
pub fn tp_generic<T: Scalar>(values: &[T], c: &[T], p: usize) -> Vec<T> {
    let n = values.len();
    let nf: T = factorial(n);
    index_subsets(n, p)
        .into_iter()
        .map(|subset| {
            let sub: Vec<T> = subset.iter().map(|&i| values[i].clone()).collect();
            let e = symmetric_functions(&sub);
            let mut acc = nf.clone() * e[p].clone();
            for k in (n - p)..n {
                let w = factorial::<T>(k) * factorial::<T>(n - k);
                acc = acc - c[k].clone() * w * e[k + p - n].clone();
            }
            acc
        })
        .collect()
}

fn check_nonnegative(lambda: &Spectrum) -> Result<Vec<f64>> {
    if let Some((i, v)) = lambda.values().iter().enumerate().find(|(_, v)| **v < -EIG_TOL) {
        return domain(format!("eigenvalue {i} = {v} is negative"));
    }
    Ok(lambda.values().iter().map(|v| v.max(0.0)).collect())
}

fn check_dim(lambda: &Spectrum, coeffs: &GmaCoefficients) -> Result<()> {
    if lambda.dim() != coeffs.n() {
        return domain(format!(
            "spectrum has length {} but coefficients are for n = {}",
            lambda.dim(),
            coeffs.n()
        ));
    }
    Ok(())
}

pub fn gma_p(lambda: &Spectrum, coeffs: &GmaCoefficients, ell: usize) -> Result<f64> {
    check_dim(lambda, coeffs)?;
    let n = coeffs.n();
    if ell == 0 || ell >= n {
        return domain(format!("ell = {ell} outside [1, {}]", n.saturating_sub(1)));
    }
    let values = check_nonnegative(lambda)?;
    let eval = p_extended(&values, &coeffs.weights(), ell);
    if !eval.any_denominator {
        return Err(Error::DegenerateSpectrum(format!(
            "every S_(n-{ell}) restriction vanishes at {:?}",
            lambda.values()
        )));
    }
    Ok(match eval.value {
        Extended::Finite(v) => v,
        _ => f64::INFINITY,
    })
}

pub fn gma_q(lambda: &Spectrum, coeffs: &GmaCoefficients, c0_value: f64) -> Result<f64> {
    check_dim(lambda, coeffs)?;
    q_generic(lambda.values(), &coeffs.weights(), c0_value).ok_or_else(|| {
        Error::DegenerateSpectrum(format!("S_n <= 0 at {:?}", lambda.values()))
    })
}

/// Where a cone test failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Eigenvalue { index: usize, value: f64 },
    Tuple { indices: Vec<usize>, value: f64 },
    Constraint { name: String, value: f64 },
    Sample {
        index: u64,
        check: String,
        lhs: f64,
        rhs: f64,
        a: Vec<f64>,
        b: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeReport {
    pub is_member: bool,
    pub margin: f64,
    pub witness: Option<Witness>,
}

impl ConeReport {
    /// Keeps `is_member ⟺ margin ≥ 0` when membership was decided with a
    /// tolerance.
    pub(crate) fn from_raw(is_member: bool, raw_margin: f64, witness: Option<Witness>) -> Self {
        let margin = match (is_member, raw_margin >= 0.0) {
            (true, false) => 0.0,
            (false, true) => -f64::MIN_POSITIVE,
            _ => raw_margin,
        };
        Self {
            is_member,
            margin,
            witness: if is_member { None } else { witness },
        }
    }
}

fn p1_for_membership(values: &[f64], coeffs: &GmaCoefficients) -> (f64, Option<Vec<usize>>) {
    if coeffs.n() == 1 {
        return (0.0, None);
    }
    let eval = p_extended(values, &coeffs.weights(), 1);
    let v = match eval.value {
        Extended::Finite(v) => v,
        Extended::Infinite => f64::INFINITY,
        Extended::Undefined => 0.0,
    };
    (v, eval.argmax)
}

pub fn gamma_bar_membership(lambda: &Spectrum, coeffs: &GmaCoefficients) -> ConeReport {
    let min = lambda.min();
    if lambda.dim() != coeffs.n() {
        return ConeReport::from_raw(
            false,
            f64::NEG_INFINITY,
            Some(Witness::Constraint {
                name: "dimension".into(),
                value: lambda.dim() as f64,
            }),
        );
    }
    if min < -EIG_TOL {
        let index = lambda.values().iter().position(|v| *v < -EIG_TOL).unwrap_or(0);
        return ConeReport::from_raw(
            false,
            min,
            Some(Witness::Eigenvalue {
                index,
                value: lambda.values()[index],
            }),
        );
    }
    let values: Vec<f64> = lambda.values().iter().map(|v| v.max(0.0)).collect();
    let (p, argmax) = p1_for_membership(&values, coeffs);
    let member = p <= 1.0 + EIG_TOL;
    ConeReport::from_raw(
        member,
        min.min(1.0 - p),
        argmax.map(|indices| Witness::Tuple { indices, value: p }),
    )
}

pub fn tp_subset_coefficients(lambda: &Spectrum, coeffs: &GmaCoefficients, p: usize) -> Result<Vec<f64>> {
    check_dim(lambda, coeffs)?;
    let n = coeffs.n();
    if p == 0 || p > n {
        return domain(format!("p = {p} outside [1, {n}]"));
    }
    let c0 = match coeffs.c0() {
        C0::Constant(v) => *v,
        C0::Field(_) if p < n => 0.0,
        C0::Field(_) => return domain("T^n needs a pointwise c0 value; use a constant c0"),
    };
    let mut c = Vec::with_capacity(n);
    c.push(c0);
    c.extend_from_slice(coeffs.c());
    Ok(tp_generic(lambda.values(), &c, p))
}

pub fn tp_positive(lambda: &Spectrum, coeffs: &GmaCoefficients, p: usize) -> Result<bool> {
    Ok(tp_subset_coefficients(lambda, coeffs, p)?
        .iter()
        .all(|v| *v >= -OP_TOL))
}

pub fn c_subsolution_margin(lambda: &Spectrum, coeffs: &GmaCoefficients) -> Result<f64> {
    if coeffs.n() == 1 {
        check_dim(lambda, coeffs)?;
        check_nonnegative(lambda)?;
        return Ok(1.0);
    }
    Ok(1.0 - gma_p(lambda, coeffs, 1)?)
}

/// Certified lower bound on `S_n` over `{λ ≥ 0, P(λ) ≤ 1}`.
pub fn mass_lower_bound(coeffs: &GmaCoefficients) -> Result<f64> {
    let n = coeffs.n();
    if coeffs.is_ma_regime() {
        let m = coeffs.c0().min();
        if m > 0.0 {
            return Ok(m);
        }
        return domain("all coefficients vanish; no mass bound exists");
    }
    let w = coeffs.weights();
    let exponent = |k: usize| (k as f64 - 1.0) / (n as f64 - 1.0);
    // h(x) = 1 − Σ w_k x^{e_k − 1} increases from −∞ to 1.
    let h = |x: f64| 1.0 - (1..n).map(|k| w[k] * x.powf(exponent(k) - 1.0)).sum::<f64>();
    let mut hi = 1.0;
    while h(hi) <= 0.0 {
        hi *= 2.0;
    }
    let mut lo = hi / 2.0;
    while h(lo) > 0.0 {
        lo /= 2.0;
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(lo.powf(n as f64 / (n as f64 - 1.0)) / n as f64)
}

/// Operator probed by [`convexity_monotonicity_probe`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GmaOperator {
    P(usize),
    Q,
}

/// Smallest `t` (up to bisection accuracy, from above) with `f(t·μ) ≤ 1`,
/// for `f` decreasing in `t`.
pub(crate) fn threshold_scale(mu: &[f64], f: impl Fn(&[f64]) -> f64) -> f64 {
    let mut scratch = vec![0.0; mu.len()];
    let mut at = |t: f64| {
        for (s, m) in scratch.iter_mut().zip(mu) {
            *s = m * t;
        }
        f(&scratch)
    };
    let mut hi = 1.0;
    let mut guard = 0;
    while at(hi) > 1.0 && guard < 200 {
        hi *= 2.0;
        guard += 1;
    }
    let mut lo = hi;
    guard = 0;
    while at(lo) <= 1.0 && guard < 200 {
        lo *= 0.5;
        guard += 1;
    }
    if at(lo) <= 1.0 {
        return lo;
    }
    // The bracket is [lo, 2lo]; 44 halvings reach a relative width below 1e-13.
    for _ in 0..44 {
        let mid = 0.5 * (lo + hi);
        if at(mid) <= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

pub(crate) fn slack(a: f64, b: f64) -> f64 {
    PROBE_SLACK * a.abs().max(b.abs()).max(1.0)
}

pub(crate) struct ProbeOutcome {
    pub margin: f64,
    pub witness: Option<Witness>,
}

impl ProbeOutcome {
    pub fn new() -> Self {
        Self {
            margin: f64::INFINITY,
            witness: None,
        }
    }

    /// Records `lhs ≤ rhs` up to the relative probe slack.
    pub fn check(&mut self, index: u64, name: &str, lhs: f64, rhs: f64, a: &[f64], b: &[f64]) {
        let m = rhs + slack(lhs, rhs) - lhs;
        let m = if m.is_nan() { f64::NEG_INFINITY } else { m };
        if m < self.margin {
            self.margin = m;
        }
        if m < 0.0 && self.witness.is_none() {
            self.witness = Some(Witness::Sample {
                index,
                check: name.to_string(),
                lhs,
                rhs,
                a: a.to_vec(),
                b: b.to_vec(),
            });
        }
    }

    pub fn into_report(outcomes: Vec<ProbeOutcome>) -> ConeReport {
        let mut margin = f64::INFINITY;
        let mut witness = None;
        for o in outcomes {
            margin = margin.min(o.margin);
            if witness.is_none() {
                witness = o.witness;
            }
        }
        if margin == f64::INFINITY {
            margin = 0.0;
        }
        ConeReport {
            is_member: witness.is_none(),
            margin,
            witness,
        }
    }
}

/// Seeded check of the monotonicity, midpoint convexity and sublevel
/// convexity of `P^ℓ` (on `Γ_{≥0}`) or `Q` (on `Γ̄`), with matrices drawn
/// relative to a fixed random `ω`.
pub fn convexity_monotonicity_probe(
    op: GmaOperator,
    coeffs: &GmaCoefficients,
    samples: usize,
    seed: u64,
) -> Result<ConeReport> {
    let n = coeffs.n();
    if let GmaOperator::P(ell) = op {
        if ell == 0 || ell >= n {
            return domain(format!("ell = {ell} outside [1, {}]", n.saturating_sub(1)));
        }
    }
    if n < 2 {
        return domain("the probe needs n >= 2");
    }
    let omega = random_pd(n, &mut sample_rng(seed, u64::MAX));
    let l = cholesky(&omega);
    let pencil = Pencil::new(&omega)?;
    let weights = coeffs.weights();

    let outcomes: Vec<ProbeOutcome> = (0..samples as u64)
        .into_par_iter()
        .map(|index| {
            let mut rng = sample_rng(seed, index);
            let mut out = ProbeOutcome::new();
            let c0 = match coeffs.c0() {
                C0::Constant(v) => *v,
                C0::Field(f) => f[rand::Rng::gen_range(&mut rng, 0..f.len())],
            };
            let p_of = |v: &[f64], ell: usize| match p_extended(v, &weights, ell).value {
                Extended::Finite(x) => x,
                Extended::Infinite => f64::INFINITY,
                Extended::Undefined => 0.0,
            };
            let f = |v: &[f64]| -> f64 {
                match op {
                    GmaOperator::P(ell) => p_of(v, ell),
                    GmaOperator::Q => q_generic(v, &weights, c0).unwrap_or(f64::INFINITY),
                }
            };
            // Endpoints: positive spectra, pushed into Γ̄ for Q.
            let draw = |rng: &mut rand_chacha::ChaCha8Rng, level: bool| -> Vec<f64> {
                let mu = log_uniform_spectrum(n, 0.05, 20.0, rng);
                let needs_gamma = matches!(op, GmaOperator::Q) || level;
                if !needs_gamma {
                    return mu;
                }
                let mut t = if coeffs.is_ma_regime() { 1.0 } else { threshold_scale(&mu, |v| p_of(v, 1)) };
                if level {
                    let t_level = threshold_scale(&mu, f);
                    t = t.max(t_level);
                }
                let stretch = if rand::Rng::gen_bool(rng, 0.3) {
                    1.0
                } else {
                    1.0 + rand::Rng::gen_range(rng, 0.0..1.5)
                };
                mu.iter().map(|m| m * t * stretch).collect()
            };
            let spec_of = |m: &crate::spectra::HermitianMatrix| -> Vec<f64> {
                pencil.eigenvalues(m).map(|s| s.values().to_vec()).unwrap_or_default()
            };
            // Monotonicity: A = B + D with D ≥ 0.
            let mu_b = draw(&mut rng, false);
            let b = lift(&random_hermitian_with(&mu_b, &mut rng), &l);
            let d = lift(&random_psd(n, 5.0, &mut rng), &l);
            let a = b.add(&d);
            let lam_a = spec_of(&a);
            let lam_b = spec_of(&b);
            out.check(index, "monotonicity", f(&lam_a), f(&lam_b), &lam_a, &lam_b);

            // Midpoint convexity.
            let mu_c = draw(&mut rng, false);
            let c = lift(&random_hermitian_with(&mu_c, &mut rng), &l);
            let lam_c = spec_of(&c);
            let mid = spec_of(&b.add(&c).scale(0.5));
            out.check(
                index,
                "midpoint convexity",
                f(&mid),
                0.5 * (f(&lam_b) + f(&lam_c)),
                &lam_b,
                &lam_c,
            );

            // Sublevel set {f ≤ 1}.
            let mu_e = draw(&mut rng, true);
            let mu_g = draw(&mut rng, true);
            let e = lift(&random_hermitian_with(&mu_e, &mut rng), &l);
            let g = lift(&random_hermitian_with(&mu_g, &mut rng), &l);
            let lam_e = spec_of(&e);
            let lam_g = spec_of(&g);
            if f(&lam_e) <= 1.0 && f(&lam_g) <= 1.0 {
                let mid = spec_of(&e.add(&g).scale(0.5));
                out.check(index, "sublevel midpoint", f(&mid), 1.0, &lam_e, &lam_g);
                if matches!(op, GmaOperator::Q) {
                    out.check(index, "sublevel midpoint in gamma-bar", p_of(&mid, 1), 1.0, &lam_e, &lam_g);
                }
            }
            out
        })
        .collect();
    Ok(ProbeOutcome::into_report(outcomes))
}
