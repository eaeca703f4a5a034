//! Seeded property suites shared by the CLI and the acceptance runner.
//!
//! Every suite is deterministic in `(seed, samples)`: sample `i` draws from
//! its own stream, and results are reduced in index order.

use std::f64::consts::PI;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dhym::{
    gamma_theta_membership, phase_of, prop_probe, sample_gamma_theta, slope_of, DhymPhaseSpec,
};
use crate::error::{Error, Result};
use crate::gma::{
    convexity_monotonicity_probe, gamma_bar_membership, mass_lower_bound, p_extended, threshold_scale,
    tp_generic, ConeReport, Extended, GmaCoefficients, GmaOperator, ProbeOutcome, Witness, C0,
};
use crate::sampling::{log_uniform_spectrum, random_hermitian, sample_rng};
use crate::scalar::rational;
use crate::spectra::{
    index_subsets, majorizes, newton_maclaurin_margin, symmetric_functions, HermitianMatrix, Pencil,
    Spectrum,
};
use crate::torus::{
    chi_from_potential, dhym_j_energy, gma_j_energy, ma_energy, mollify, random_trig_field, MollifierSpec,
    PathRule, PotentialField, TorusGrid,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    SymOracle,
    GmaMonotonicity,
    TpEquivalence,
    DhymCone,
    PhaseSlope,
    NewtonMaclaurin,
    MassBound,
    KyFan,
    Mollifier,
    EnergyDerivatives,
}

impl Suite {
    pub const ALL: [Suite; 10] = [
        Suite::SymOracle,
        Suite::GmaMonotonicity,
        Suite::TpEquivalence,
        Suite::DhymCone,
        Suite::PhaseSlope,
        Suite::NewtonMaclaurin,
        Suite::MassBound,
        Suite::KyFan,
        Suite::Mollifier,
        Suite::EnergyDerivatives,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            Suite::SymOracle => "sym-oracle",
            Suite::GmaMonotonicity => "gma-monotonicity",
            Suite::TpEquivalence => "tp-equivalence",
            Suite::DhymCone => "dhym-cone",
            Suite::PhaseSlope => "phase-slope",
            Suite::NewtonMaclaurin => "newton-maclaurin",
            Suite::MassBound => "mass-bound",
            Suite::KyFan => "ky-fan",
            Suite::Mollifier => "mollifier",
            Suite::EnergyDerivatives => "energy-derivatives",
        }
    }

    /// Sample count used when none is given.
    pub fn default_samples(&self) -> usize {
        match self {
            Suite::SymOracle => 1_000,
            Suite::PhaseSlope | Suite::MassBound => 100_000,
            Suite::Mollifier => 100,
            Suite::EnergyDerivatives => 20,
            _ => 10_000,
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.id() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseReport {
    pub name: String,
    pub samples: usize,
    pub margin: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropReport {
    pub suite: Suite,
    pub seed: u64,
    pub samples: usize,
    pub passed: bool,
    pub cases: Vec<CaseReport>,
    /// First violation, in case order.
    pub witness: Option<Witness>,
}

impl PropReport {
    fn from_cases(suite: Suite, seed: u64, samples: usize, cases: Vec<(String, usize, ConeReport)>) -> Self {
        let witness = cases.iter().find_map(|(_, _, r)| r.witness.clone().filter(|_| !r.is_member));
        let cases: Vec<CaseReport> = cases
            .into_iter()
            .map(|(name, samples, r)| CaseReport {
                name,
                samples,
                margin: r.margin,
                passed: r.is_member,
            })
            .collect();
        Self {
            suite,
            seed,
            samples,
            passed: cases.iter().all(|c| c.passed),
            cases,
            witness,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PropOptions {
    pub seed: u64,
    pub samples: Option<usize>,
    /// Overrides `c_1..c_{n−1}` for the gMA suites, without validation, so
    /// that deliberately invalid fixtures can be exercised.
    pub coefficients: Option<Vec<f64>>,
}

pub fn run_suite(suite: Suite, opts: &PropOptions) -> Result<PropReport> {
    let samples = opts.samples.unwrap_or_else(|| suite.default_samples());
    let seed = opts.seed;
    let cases = match suite {
        Suite::SymOracle => vec![("recurrence vs enumeration".to_string(), samples, sym_oracle(samples, seed))],
        Suite::GmaMonotonicity => gma_monotonicity(samples, seed, opts.coefficients.as_deref())?,
        Suite::TpEquivalence => vec![("tp vs P".to_string(), samples, tp_equivalence(samples, seed))],
        Suite::DhymCone => dhym_cone(samples, seed)?,
        Suite::PhaseSlope => vec![("phase-slope identity".to_string(), samples, phase_slope(samples, seed))],
        Suite::NewtonMaclaurin => vec![("maclaurin gaps".to_string(), samples, newton_maclaurin(samples, seed))],
        Suite::MassBound => mass_bound(samples, seed, opts.coefficients.as_deref())?,
        Suite::KyFan => vec![("ky-fan".to_string(), samples, ky_fan(samples, seed))],
        Suite::Mollifier => mollifier(samples, seed)?,
        Suite::EnergyDerivatives => energy_derivatives(samples, seed)?,
    };
    Ok(PropReport::from_cases(suite, seed, samples, cases))
}

/// Independent case seeds from one campaign seed.
fn case_seed(seed: u64, case: u64) -> u64 {
    seed ^ case.wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

fn to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

fn random_rational<R: Rng>(rng: &mut R, num: std::ops::RangeInclusive<i64>, max_den: i64) -> BigRational {
    rational(rng.gen_range(num), rng.gen_range(1..=max_den))
}

fn sym_oracle(samples: usize, seed: u64) -> ConeReport {
    let outcomes: Vec<ProbeOutcome> = (0..samples as u64)
        .into_par_iter()
        .map(|index| {
            let mut rng = sample_rng(seed, index);
            let mut out = ProbeOutcome::new();
            let n = 1 + (index % 6) as usize;
            let values: Vec<BigRational> = (0..n).map(|_| random_rational(&mut rng, -30..=30, 12)).collect();
            let rec = symmetric_functions(&values);
            for (k, rk) in rec.iter().enumerate() {
                let mut sum = BigRational::zero();
                for subset in index_subsets(n, k) {
                    sum += subset.iter().fold(BigRational::one(), |acc, &i| acc * &values[i]);
                }
                let vals: Vec<f64> = values.iter().map(to_f64).collect();
                let (l, r) = (to_f64(rk), to_f64(&sum));
                if *rk != sum {
                    out.check(index, &format!("S_{k}"), f64::INFINITY, 0.0, &vals, &[l, r]);
                } else {
                    out.check(index, &format!("S_{k}"), 0.0, 0.0, &vals, &[]);
                }
            }
            out
        })
        .collect();
    ProbeOutcome::into_report(outcomes)
}

fn default_c(n: usize) -> Vec<f64> {
    (1..n).map(|k| 0.4 + 0.35 * k as f64).collect()
}

fn gma_monotonicity(samples: usize, seed: u64, c: Option<&[f64]>) -> Result<Vec<(String, usize, ConeReport)>> {
    let dims: Vec<usize> = match c {
        Some(c) => vec![c.len() + 1],
        None => (2..=5).collect(),
    };
    let mut cases = Vec::new();
    let mut case = 0;
    for n in dims {
        let cv = c.map(|c| c.to_vec()).unwrap_or_else(|| default_c(n));
        // Alternate c₀ = 0 and c₀ > 0 across dimensions.
        let c0 = if n % 2 == 0 { 0.0 } else { 0.8 };
        let coeffs = GmaCoefficients::unchecked(n, cv, C0::Constant(c0), 0.0);
        let ops = (1..n).map(GmaOperator::P).chain([GmaOperator::Q]);
        for op in ops {
            case += 1;
            let r = convexity_monotonicity_probe(op, &coeffs, samples, case_seed(seed, case))?;
            let name = match op {
                GmaOperator::P(l) => format!("n={n} P^{l}"),
                GmaOperator::Q => format!("n={n} Q c0={c0}"),
            };
            cases.push((name, samples, r));
        }
    }
    Ok(cases)
}

/// Exact check that every `T^p` coefficient is nonnegative exactly when
/// `P^{n−p} ≤ 1`, with all-`0/0` tuples counting as `≤ 1`.
fn tp_equivalence(samples: usize, seed: u64) -> ConeReport {
    let outcomes: Vec<ProbeOutcome> = (0..samples as u64)
        .into_par_iter()
        .map(|index| {
            let mut rng = sample_rng(seed, index);
            let mut out = ProbeOutcome::new();
            let n = 2 + (index % 4) as usize;
            let values: Vec<BigRational> = (0..n)
                .map(|_| {
                    if rng.gen_bool(0.15) {
                        BigRational::zero()
                    } else {
                        random_rational(&mut rng, 1..=36, 12)
                    }
                })
                .collect();
            let mut c: Vec<BigRational> = (0..n)
                .map(|_| {
                    if rng.gen_bool(0.2) {
                        BigRational::zero()
                    } else {
                        random_rational(&mut rng, 1..=24, 8)
                    }
                })
                .collect();
            if c[1..].iter().all(|x| x.is_zero()) {
                c[1] = BigRational::one();
            }
            let weights: Vec<BigRational> = (0..=n)
                .map(|k| {
                    if k == 0 || k == n {
                        BigRational::zero()
                    } else {
                        &c[k] / BigRational::from_integer(BigInt::from(crate::spectra::binomial(n, k)))
                    }
                })
                .collect();
            let vals: Vec<f64> = values.iter().map(to_f64).collect();
            for p in 1..n {
                let tp_ok = tp_generic(&values, &c, p).iter().all(|v| *v >= BigRational::zero());
                let p_ok = match p_extended(&values, &weights, n - p).value {
                    Extended::Finite(v) => v <= BigRational::one(),
                    Extended::Infinite => false,
                    Extended::Undefined => true,
                };
                let agree = if tp_ok == p_ok { 0.0 } else { f64::INFINITY };
                out.check(index, &format!("p = {p}"), agree, 0.0, &vals, &[]);
            }
            out
        })
        .collect();
    ProbeOutcome::into_report(outcomes)
}

fn dhym_cone(samples: usize, seed: u64) -> Result<Vec<(String, usize, ConeReport)>> {
    let spec = DhymPhaseSpec::new(0.4 * PI, 0.8 * PI, 0.0)?;
    let mut cases = Vec::new();
    for (case, n) in (2..=4).enumerate() {
        let r = prop_probe(&spec, n, 0.5, samples, case_seed(seed, case as u64 + 1))?;
        cases.push((format!("n={n}"), samples, r));
    }
    Ok(cases)
}

/// `|Re Π − cot θ · Im Π| ≤ 1e−9 |Π|` away from `Im Π = 0`.
pub const PHASE_SLOPE_TOL: f64 = 1e-9;
/// Draws with `|sin θ|` below this are redrawn.
pub const PHASE_SLOPE_MIN_SIN: f64 = 1e-2;

fn phase_slope(samples: usize, seed: u64) -> ConeReport {
    let outcomes: Vec<ProbeOutcome> = (0..samples as u64)
        .into_par_iter()
        .map(|index| {
            let mut rng = sample_rng(seed, index);
            let mut out = ProbeOutcome::new();
            let n = 1 + (index % 5) as usize;
            let (l, z) = loop {
                let l: Vec<f64> = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
                let z = slope_of(&l);
                if z.im.abs() >= PHASE_SLOPE_MIN_SIN * z.norm() {
                    break (l, z);
                }
            };
            let th = phase_of(&l);
            let defect = (z.re - th.cos() / th.sin() * z.im).abs();
            // Rescale so that the probe's own relative slack does not apply.
            let ratio = defect / (PHASE_SLOPE_TOL * z.norm());
            out.check(index, "phase-slope", ratio - 1.0, -crate::gma::PROBE_SLACK, &l, &[z.re, z.im]);
            out
        })
        .collect();
    ProbeOutcome::into_report(outcomes)
}

pub const MACLAURIN_TOL: f64 = 1e-10;

fn newton_maclaurin(samples: usize, seed: u64) -> ConeReport {
    let outcomes: Vec<ProbeOutcome> = (0..samples as u64)
        .into_par_iter()
        .map(|index| {
            let mut rng = sample_rng(seed, index);
            let mut out = ProbeOutcome::new();
            let n = 2 + (index % 5) as usize;
            let l = log_uniform_spectrum(n, 1e-3, 1e3, &mut rng);
            let margin = Spectrum::new(l.clone())
                .and_then(|s| newton_maclaurin_margin(&s))
                .map(|m| m.into_iter().fold(f64::INFINITY, f64::min))
                .unwrap_or(f64::NEG_INFINITY);
            let ratio = -margin / MACLAURIN_TOL;
            out.check(index, "maclaurin gap", ratio - 1.0, -crate::gma::PROBE_SLACK, &l, &[margin]);
            out
        })
        .collect();
    ProbeOutcome::into_report(outcomes)
}

/// Samples of `Γ̄` certify `S_n ≥ mass_lower_bound` (relative 1e−10).
fn mass_bound(samples: usize, seed: u64, c: Option<&[f64]>) -> Result<Vec<(String, usize, ConeReport)>> {
    let sets: Vec<Vec<f64>> = match c {
        Some(c) => vec![c.to_vec()],
        None => vec![vec![1.0], vec![0.5, 1.0], vec![0.3, 0.6, 0.9]],
    };
    let mut cases = Vec::new();
    for (case, cv) in sets.into_iter().enumerate() {
        let n = cv.len() + 1;
        let coeffs = GmaCoefficients::unchecked(n, cv.clone(), C0::Constant(0.0), 0.0);
        let bound = mass_lower_bound(&coeffs)?;
        let w = coeffs.weights();
        let cs = case_seed(seed, case as u64 + 1);
        let outcomes: Vec<ProbeOutcome> = (0..samples as u64)
            .into_par_iter()
            .map(|index| {
                let mut rng = sample_rng(cs, index);
                let mut out = ProbeOutcome::new();
                let mu = log_uniform_spectrum(n, 1e-2, 1e2, &mut rng);
                let p1 = |v: &[f64]| match p_extended(v, &w, 1).value {
                    Extended::Finite(x) => x,
                    Extended::Infinite => f64::INFINITY,
                    Extended::Undefined => 0.0,
                };
                let t = threshold_scale(&mu, p1);
                let stretch = if rng.gen_bool(0.5) { 1.0 } else { 1.0 + rng.gen_range(0.0..1.5) };
                let l: Vec<f64> = mu.iter().map(|m| m * t * stretch).collect();
                let sn = symmetric_functions(&l)[n];
                out.check(index, "mass bound", bound * (1.0 - 1e-10), sn, &l, &[bound]);
                out
            })
            .collect();
        cases.push((
            format!("n={n} c={cv:?} bound={bound:.12}"),
            samples,
            ProbeOutcome::into_report(outcomes),
        ));
    }
    Ok(cases)
}

fn ky_fan(samples: usize, seed: u64) -> ConeReport {
    let outcomes: Vec<ProbeOutcome> = (0..samples as u64)
        .into_par_iter()
        .map(|index| {
            let mut rng = sample_rng(seed, index);
            let mut out = ProbeOutcome::new();
            let n = 2 + (index % 5) as usize;
            let x = random_hermitian(n, 1.0, &mut rng);
            let y = random_hermitian(n, 1.0, &mut rng);
            let t: f64 = rng.gen_range(0.0..1.0);
            let (lx, ly) = (x.eigenvalues(), y.eigenvalues());
            let lhs = x.scale(t).add(&y.scale(1.0 - t)).eigenvalues();
            let rhs: Vec<f64> = lx.values().iter().zip(ly.values()).map(|(a, b)| t * a + (1.0 - t) * b).collect();
            let ok = Spectrum::new(rhs).and_then(|r| majorizes(&r, &lhs)).unwrap_or(false);
            out.check(index, "ky-fan", if ok { 0.0 } else { 1.0 }, 0.0, lx.values(), ly.values());
            out
        })
        .collect();
    ProbeOutcome::into_report(outcomes)
}

pub const MOLLIFIER_GRID: usize = 16;

/// Least pointwise membership margin of `χ + i∂∂̄φ`.
fn field_margin(chi: &HermitianMatrix, pencil: &Pencil, phi: &PotentialField, member: &(dyn Fn(&Spectrum) -> f64 + Sync)) -> f64 {
    let field = chi_from_potential(chi, phi).expect("grids agree");
    let n = phi.grid().n();
    field
        .spectra(pencil)
        .par_chunks(n)
        .map(|l| member(&Spectrum::new(l.to_vec()).expect("finite spectra")))
        .reduce(|| f64::INFINITY, f64::min)
}

/// Random fields whose pointwise spectra lie in `Γ̄` (gMA, even indices) or
/// `Γ̄_{θ,Θ}` (dHYM, odd indices), mollified at `δ ∈ {2h, 4h}`.
fn mollifier(samples: usize, seed: u64) -> Result<Vec<(String, usize, ConeReport)>> {
    let grid = TorusGrid::new(2, MOLLIFIER_GRID)?;
    let h = grid.spacing();
    let coeffs = GmaCoefficients::constant(2, vec![1.0], 0.0)?;
    let spec = DhymPhaseSpec::new(0.6 * PI, 0.85 * PI, 0.0)?;
    let gma_member = |l: &Spectrum| gamma_bar_membership(l, &coeffs).margin;
    let dhym_member = |l: &Spectrum| gamma_theta_membership(l, &spec, true).margin;
    let outcomes: Vec<ProbeOutcome> = (0..samples as u64)
        .map(|index| {
            let mut rng = sample_rng(seed, index);
            let mut out = ProbeOutcome::new();
            let omega = crate::sampling::random_pd(2, &mut rng);
            let pencil = Pencil::new(&omega).expect("positive definite");
            let l = crate::sampling::cholesky(&omega);
            let gma = index % 2 == 0;
            let mu = if gma {
                vec![rng.gen_range(0.8..1.5), rng.gen_range(0.8..3.0)]
            } else {
                sample_gamma_theta(2, 0.5 * PI, 0.75 * PI, &mut rng)
            };
            let chi = crate::sampling::lift(&crate::sampling::random_hermitian_with(&mu, &mut rng), &l);
            let member: &(dyn Fn(&Spectrum) -> f64 + Sync) = if gma { &gma_member } else { &dhym_member };
            let shape = random_trig_field(grid, 4, 2, 1.0, &mut rng);
            // Largest amplitude (coarse, then refined) keeping every point a member.
            let margin_at = |a: f64| field_margin(&chi, &pencil, &shape.map(|v| a * v), member);
            let mut a = 1.0;
            while margin_at(a) < 0.0 && a > 1e-6 {
                a *= 0.5;
            }
            let (mut lo, mut hi) = (a, 2.0 * a);
            for _ in 0..4 {
                let mid = 0.5 * (lo + hi);
                if margin_at(mid) >= 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let phi = shape.map(|v| lo * v);
            for delta in [2.0 * h, 4.0 * h] {
                let m = mollify(&phi, &MollifierSpec { delta }).expect("delta above spacing");
                let margin = field_margin(&chi, &pencil, &m, member);
                let name = if gma { "gma mollified" } else { "dhym mollified" };
                out.check(index, name, -margin, 1e-9 - crate::gma::PROBE_SLACK, &mu, &[lo, delta]);
            }
            out
        })
        .collect();
    Ok(vec![("mollified members".to_string(), samples, ProbeOutcome::into_report(outcomes))])
}

pub const ENERGY_GRID: usize = 12;
pub const ENERGY_REL_TOL: f64 = 1e-4;

/// Exact directional derivatives of the energies at `φ` in direction `ψ`.
pub fn energy_gradients(
    chi: &HermitianMatrix,
    alpha: &HermitianMatrix,
    omega: &HermitianMatrix,
    coeffs: &GmaCoefficients,
    theta: f64,
    phi: &PotentialField,
    psi: &PotentialField,
) -> Result<[f64; 3]> {
    let pencil = Pencil::new(omega)?;
    let n = phi.grid().n();
    let w = coeffs.weights();
    let mean = |v: Vec<f64>| v.iter().sum::<f64>() / v.len() as f64;
    let spectra = chi_from_potential(chi, phi)?.spectra(&pencil);
    let di = mean(spectra.chunks(n).zip(psi.values()).map(|(l, p)| p * l.iter().product::<f64>()).collect());
    let dj = mean(
        spectra
            .chunks(n)
            .zip(psi.values())
            .enumerate()
            .map(|(i, (l, p))| {
                let s = symmetric_functions(l);
                p * ((1..n).map(|k| w[k] * s[k]).sum::<f64>() + coeffs.c0().at(i) - s[n])
            })
            .collect(),
    );
    let rot = Complex64::from_polar(1.0, -theta);
    let spectra = chi_from_potential(alpha, phi)?.spectra(&pencil);
    let dh = mean(spectra.chunks(n).zip(psi.values()).map(|(l, p)| p * (rot * slope_of(l)).im).collect());
    Ok([di, dj, dh])
}

fn energy_derivatives(samples: usize, seed: u64) -> Result<Vec<(String, usize, ConeReport)>> {
    let grid = TorusGrid::new(2, ENERGY_GRID)?;
    let omega = HermitianMatrix::identity(2);
    let chi = HermitianMatrix::scalar(2, 2.0);
    let alpha = HermitianMatrix::from_real_rows(&[vec![1.2, 0.3], vec![0.3, 0.9]])?;
    let coeffs = GmaCoefficients::constant(2, vec![1.0], 2.0)?;
    let theta = PI / 2.0;
    let rule = PathRule::default();
    let names = ["I", "gMA J", "dHYM J"];
    let mut reports: Vec<Vec<ProbeOutcome>> = vec![Vec::new(), Vec::new(), Vec::new()];
    for index in 0..samples as u64 {
        let mut rng = sample_rng(seed, index);
        let phi = random_trig_field(grid, 5, 2, 0.006, &mut rng);
        // A constant part and a component along φ keep the derivatives away from 0.
        let psi = random_trig_field(grid, 5, 2, 1.0, &mut rng)
            .axpy(50.0, &phi)?
            .map(|v| v + 0.3);
        let exact = energy_gradients(&chi, &alpha, &omega, &coeffs, theta, &phi, &psi)?;
        let step = 1e-5;
        let plus = phi.axpy(step, &psi)?;
        let minus = phi.axpy(-step, &psi)?;
        let fd = [
            (ma_energy(&chi, &omega, &plus, &rule)? - ma_energy(&chi, &omega, &minus, &rule)?) / (2.0 * step),
            (gma_j_energy(&chi, &omega, &coeffs, &plus, &rule)? - gma_j_energy(&chi, &omega, &coeffs, &minus, &rule)?)
                / (2.0 * step),
            (dhym_j_energy(&alpha, &omega, theta, &plus, &rule)? - dhym_j_energy(&alpha, &omega, theta, &minus, &rule)?)
                / (2.0 * step),
        ];
        for k in 0..3 {
            let mut out = ProbeOutcome::new();
            let rel = (fd[k] - exact[k]).abs() / exact[k].abs().max(1e-12);
            out.check(index, names[k], rel / ENERGY_REL_TOL - 1.0, -crate::gma::PROBE_SLACK, &[fd[k]], &[exact[k]]);
            reports[k].push(out);
        }
    }
    Ok(reports
        .into_iter()
        .zip(names)
        .map(|(o, name)| (name.to_string(), samples, ProbeOutcome::into_report(o)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(suite: Suite, samples: usize) -> PropReport {
        run_suite(
            suite,
            &PropOptions {
                seed: 3,
                samples: Some(samples),
                coefficients: None,
            },
        )
        .unwrap()
    }

    #[test]
    fn suite_ids_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.id().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn small_suites_pass() {
        for s in [
            Suite::SymOracle,
            Suite::TpEquivalence,
            Suite::PhaseSlope,
            Suite::NewtonMaclaurin,
            Suite::MassBound,
            Suite::KyFan,
        ] {
            let r = quick(s, 200);
            assert!(r.passed, "{r:?}");
        }
    }

    #[test]
    fn negative_coefficient_fixture_fails() {
        let r = run_suite(
            Suite::GmaMonotonicity,
            &PropOptions {
                seed: 1,
                samples: Some(50),
                coefficients: Some(vec![-0.5]),
            },
        )
        .unwrap();
        assert!(!r.passed);
        assert!(r.witness.is_some());
    }

    #[test]
    fn deterministic() {
        assert_eq!(quick(Suite::KyFan, 100), quick(Suite::KyFan, 100));
    }
}
