//! Lagrangian phase operators for the deformed Hermitian-Yang-Mills
//! equation and the supercritical cones `Γ_{θ,Θ}`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::gma::{ConeReport, ProbeOutcome, Witness, EIG_TOL};
use crate::sampling::{
    cholesky, lift, random_hermitian, random_hermitian_with, random_pd, random_psd, sample_rng,
};
use crate::spectra::{majorizes, Pencil, Spectrum};

/// Distance from `0` or `π` below which `cot` is refused.
pub const PHASE_GUARD: f64 = 1e-12;
/// Smallest `|Im Π(λ+i)|` accepted by [`dhym_q`].
pub const IM_GUARD: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DhymPhaseSpec {
    pub theta: f64,
    #[serde(rename = "Theta")]
    pub big_theta: f64,
    pub c0_floor: f64,
}

impl DhymPhaseSpec {
    pub fn new(theta: f64, big_theta: f64, c0_floor: f64) -> Result<Self> {
        if !(theta > 0.0 && theta <= big_theta && big_theta < PI) {
            return domain(format!("need 0 < theta <= Theta < pi, got theta = {theta}, Theta = {big_theta}"));
        }
        if !c0_floor.is_finite() || c0_floor < 0.0 {
            return domain("c0_floor must be finite and nonnegative");
        }
        Ok(Self {
            theta,
            big_theta,
            c0_floor,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexSlope {
    pub re: f64,
    pub im: f64,
}

impl ComplexSlope {
    pub fn norm(&self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn as_complex(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// `arccot` with values in `(0, π)`.
pub fn arccot(x: f64) -> f64 {
    FRAC_PI_2 - x.atan()
}

pub fn lagrangian_phase(lambda: &Spectrum) -> f64 {
    phase_of(lambda.values())
}

pub(crate) fn phase_of(values: &[f64]) -> f64 {
    values.iter().map(|&v| arccot(v)).sum()
}

/// Arccot sum of the `n − ℓ` smallest eigenvalues.
pub fn truncated_phase(lambda: &Spectrum, ell: usize) -> Result<f64> {
    let n = lambda.dim();
    if ell == 0 || ell >= n {
        return domain(format!("ell = {ell} outside [1, {}]", n.saturating_sub(1)));
    }
    Ok(phase_of(&lambda.values()[..n - ell]))
}

pub fn complex_slope(lambda: &Spectrum) -> ComplexSlope {
    let z = slope_of(lambda.values());
    ComplexSlope { re: z.re, im: z.im }
}

pub(crate) fn slope_of(values: &[f64]) -> Complex64 {
    values
        .iter()
        .fold(Complex64::new(1.0, 0.0), |acc, &v| acc * Complex64::new(v, 1.0))
}

/// `cot` refusing phases within [`PHASE_GUARD`] of a multiple of `π`.
pub fn cot_guarded(phase: f64) -> Result<f64> {
    let r = phase.rem_euclid(PI);
    if r < PHASE_GUARD || PI - r < PHASE_GUARD {
        return Err(Error::PhaseSingularity { phase });
    }
    Ok(phase.cos() / phase.sin())
}

pub fn dhym_p(lambda: &Spectrum, ell: usize) -> Result<f64> {
    Ok(-cot_guarded(truncated_phase(lambda, ell)?)?)
}

pub fn dhym_q(lambda: &Spectrum, c0_value: f64) -> Result<f64> {
    let slope = slope_of(lambda.values());
    if slope.im.abs() < IM_GUARD {
        return Err(Error::PhaseSingularity {
            phase: lagrangian_phase(lambda),
        });
    }
    Ok(-cot_guarded(lagrangian_phase(lambda))? + c0_value / slope.im)
}

fn raw_theta_margin(values: &[f64], spec: &DhymPhaseSpec) -> (f64, &'static str) {
    let n = values.len();
    let theta = phase_of(values);
    let mut terms = vec![(spec.big_theta - theta, "Theta - theta(A)"), (theta, "theta(A)")];
    // With n = 1 there is nothing to truncate and only the phase window applies.
    if n > 1 {
        let tt = phase_of(&values[..n - 1]);
        terms.push((spec.theta - tt, "theta - truncated phase"));
        terms.push((tt, "truncated phase"));
    }
    terms
        .into_iter()
        .fold((f64::INFINITY, ""), |best, t| if t.0 < best.0 { t } else { best })
}

pub fn gamma_theta_membership(lambda: &Spectrum, spec: &DhymPhaseSpec, closed: bool) -> ConeReport {
    let (raw, name) = raw_theta_margin(lambda.values(), spec);
    let member = if closed { raw >= -EIG_TOL } else { raw > 0.0 };
    ConeReport::from_raw(
        member,
        raw,
        Some(Witness::Constraint {
            name: name.to_string(),
            value: raw,
        }),
    )
}

/// Random ascending spectrum in `Γ̄_{θ,Θ}`, drawn through its arccot
/// angles; about a third of the draws sit on the phase boundary.
pub fn sample_gamma_theta<R: Rng>(n: usize, theta: f64, big_theta: f64, rng: &mut R) -> Vec<f64> {
    let total = if rng.gen_bool(0.3) {
        big_theta
    } else {
        big_theta * rng.gen_range(0.05..1.0)
    };
    let w: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1) + 1e-3).collect();
    let sw: f64 = w.iter().sum();
    let mut angles: Vec<f64> = w.iter().map(|x| (total * x / sw).max(1e-6)).collect();
    angles.sort_by(|a, b| b.total_cmp(a));
    if n > 1 {
        let truncated: f64 = angles[..n - 1].iter().sum();
        if truncated > theta {
            let s = theta / truncated;
            angles.iter_mut().for_each(|a| *a *= s);
        }
    }
    let mut values: Vec<f64> = angles.iter().map(|a| 1.0 / a.tan()).collect();
    values.sort_by(|a, b| a.total_cmp(b));
    values
}

/// Sampled minimum of `Im Π(λ+i)` over `Γ̄_{θ,Θ}`: an estimate, not a bound.
pub fn im_lower_bound_probe(spec: &DhymPhaseSpec, n: usize, samples: usize, seed: u64) -> f64 {
    (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i);
            slope_of(&sample_gamma_theta(n, spec.theta, spec.big_theta, &mut rng)).im
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

/// Seeded campaign over the structural properties of the phase operators:
/// monotonicity of `θ` and `θ̃^ℓ`, convexity of `P^ℓ` on `Γ̄_{Θ,Θ}`,
/// midpoint closure of `Γ̄_{θ,Θ}` and of its `Q ≤ −cot θ` part (with
/// constant `c00 ≥ 0`), and Ky-Fan majorization.
pub fn prop_probe(spec: &DhymPhaseSpec, n: usize, c00: f64, samples: usize, seed: u64) -> Result<ConeReport> {
    if n < 2 {
        return domain("the probe needs n >= 2");
    }
    if c00 < -spec.c0_floor {
        return domain("c00 below the configured floor");
    }
    let omega = random_pd(n, &mut sample_rng(seed, u64::MAX));
    let l = cholesky(&omega);
    let pencil = Pencil::new(&omega)?;
    let target = -(spec.theta.cos() / spec.theta.sin());

    let outcomes: Vec<ProbeOutcome> = (0..samples as u64)
        .into_par_iter()
        .map(|index| {
            let mut rng = sample_rng(seed, index);
            let mut out = ProbeOutcome::new();
            let spec_of = |m: &crate::spectra::HermitianMatrix| -> Vec<f64> {
                pencil.eigenvalues(m).map(|s| s.values().to_vec()).unwrap_or_default()
            };
            let truncated = |v: &[f64], ell: usize| phase_of(&v[..n - ell]);

            let b = lift(&random_hermitian(n, 2.0, &mut rng), &l);
            let a = b.add(&lift(&random_psd(n, 3.0, &mut rng), &l));
            let (la, lb) = (spec_of(&a), spec_of(&b));
            out.check(index, "theta monotonicity", phase_of(&la), phase_of(&lb), &la, &lb);
            for ell in 1..n {
                out.check(
                    index,
                    "truncated phase monotonicity",
                    truncated(&la, ell),
                    truncated(&lb, ell),
                    &la,
                    &lb,
                );
            }

            let inside = |rng: &mut rand_chacha::ChaCha8Rng, th: f64| {
                let mu = sample_gamma_theta(n, th, spec.big_theta, rng);
                lift(&random_hermitian_with(&mu, rng), &l)
            };

            let e = inside(&mut rng, spec.big_theta);
            let g = inside(&mut rng, spec.big_theta);
            let (le, lg) = (spec_of(&e), spec_of(&g));
            let lm = spec_of(&e.add(&g).scale(0.5));
            for ell in 1..n {
                let p = |v: &[f64]| -(truncated(v, ell).cos() / truncated(v, ell).sin());
                out.check(index, "P convexity", p(&lm), 0.5 * (p(&le) + p(&lg)), &le, &lg);
            }

            let e = inside(&mut rng, spec.theta);
            let g = inside(&mut rng, spec.theta);
            let (le, lg) = (spec_of(&e), spec_of(&g));
            let mid = e.add(&g).scale(0.5);
            let lm = spec_of(&mid);
            out.check(index, "cone midpoint", -raw_theta_margin(&lm, spec).0, 0.0, &le, &lg);

            // Points of Γ̄_{θ,Θ} with Q ≤ −cot θ: shrink the angles until Q drops.
            let q = |v: &[f64]| -> f64 {
                let s = slope_of(v);
                -(phase_of(v).cos() / phase_of(v).sin()) + c00 / s.im
            };
            let sub_level = |rng: &mut rand_chacha::ChaCha8Rng| -> Option<Vec<f64>> {
                let mut mu = sample_gamma_theta(n, spec.theta, spec.big_theta, rng);
                for _ in 0..200 {
                    if q(&mu) <= target {
                        return Some(mu);
                    }
                    let angles: Vec<f64> = mu.iter().map(|&v| arccot(v) * 0.9).collect();
                    mu = angles.iter().map(|a| 1.0 / a.tan()).collect();
                    mu.sort_by(|a, b| a.total_cmp(b));
                }
                None
            };
            if let (Some(me), Some(mg)) = (sub_level(&mut rng), sub_level(&mut rng)) {
                let e = lift(&random_hermitian_with(&me, &mut rng), &l);
                let g = lift(&random_hermitian_with(&mg, &mut rng), &l);
                let (le, lg) = (spec_of(&e), spec_of(&g));
                if q(&le) <= target && q(&lg) <= target {
                    let lm = spec_of(&e.add(&g).scale(0.5));
                    out.check(index, "Q sublevel midpoint", q(&lm), target, &le, &lg);
                    out.check(index, "Q sublevel midpoint in cone", -raw_theta_margin(&lm, spec).0, 0.0, &le, &lg);
                }
            }

            let x = random_hermitian(n, 1.0, &mut rng);
            let y = random_hermitian(n, 1.0, &mut rng);
            let (lx, ly) = (x.eigenvalues(), y.eigenvalues());
            for t in [0.25, 0.5, 0.75] {
                let lhs = x.scale(t).add(&y.scale(1.0 - t)).eigenvalues();
                let rhs: Vec<f64> = lx
                    .values()
                    .iter()
                    .zip(ly.values())
                    .map(|(a, b)| t * a + (1.0 - t) * b)
                    .collect();
                let ok = Spectrum::new(rhs)
                    .and_then(|r| majorizes(&r, &lhs))
                    .unwrap_or(false);
                out.check(
                    index,
                    "ky-fan majorization",
                    if ok { 0.0 } else { 1.0 },
                    0.0,
                    lx.values(),
                    ly.values(),
                );
            }
            out
        })
        .collect();
    Ok(ProbeOutcome::into_report(outcomes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn spec(v: &[f64]) -> Spectrum {
        Spectrum::new(v.to_vec()).unwrap()
    }

    #[test]
    fn phase_examples() {
        assert!((lagrangian_phase(&spec(&[1.0, 1.0])) - FRAC_PI_2).abs() < 1e-15);
        assert!((lagrangian_phase(&spec(&[0.0, 0.0])) - PI).abs() < 1e-15);
        assert!((lagrangian_phase(&spec(&[1.0, 2.0, 3.0])) - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn truncated_examples() {
        assert!((truncated_phase(&spec(&[0.0, 1.0]), 1).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert!((truncated_phase(&spec(&[1.0, 1.0, 1.0]), 2).unwrap() - FRAC_PI_4).abs() < 1e-15);
        assert!((truncated_phase(&spec(&[5.0, 1.0]), 1).unwrap() - FRAC_PI_4).abs() < 1e-15);
        assert!(truncated_phase(&spec(&[5.0, 1.0]), 2).is_err());
    }

    #[test]
    fn slope_examples() {
        let s = complex_slope(&spec(&[1.0, 1.0]));
        assert!(s.re.abs() < 1e-15 && (s.im - 2.0).abs() < 1e-15);
        assert_eq!(complex_slope(&spec(&[0.0])), ComplexSlope { re: 0.0, im: 1.0 });
        let s = complex_slope(&spec(&[1.0, 2.0, 3.0]));
        assert!(s.re.abs() < 1e-14 && (s.im - 10.0).abs() < 1e-14);
    }

    #[test]
    fn p_and_q_examples() {
        assert!(dhym_p(&spec(&[0.0, 1.0]), 1).unwrap().abs() < 1e-15);
        assert!((dhym_p(&spec(&[5.0, 1.0]), 1).unwrap() + 1.0).abs() < 1e-15);
        assert!((dhym_p(&spec(&[1.0, 1.0, 1.0]), 2).unwrap() + 1.0).abs() < 1e-15);
        assert!(dhym_q(&spec(&[1.0, 1.0]), 0.0).unwrap().abs() < 1e-15);
        assert!((dhym_q(&spec(&[1.0, 1.0]), 2.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(dhym_q(&spec(&[1.0, 2.0, 3.0]), 0.0).unwrap().abs() < 1e-14);
    }

    #[test]
    fn singular_phases_are_typed_errors() {
        // θ = π exactly for λ = (0, 0).
        assert!(matches!(dhym_q(&spec(&[0.0, 0.0]), 0.0), Err(Error::PhaseSingularity { .. })));
        assert!(matches!(cot_guarded(PI), Err(Error::PhaseSingularity { .. })));
        assert!(cot_guarded(1.0).is_ok());
    }

    #[test]
    fn cone_examples() {
        let s = DhymPhaseSpec::new(3.0 * FRAC_PI_4, 7.0 * PI / 8.0, 0.0).unwrap();
        assert!(gamma_theta_membership(&spec(&[1.0, 1.0]), &s, false).is_member);
        let s = DhymPhaseSpec::new(FRAC_PI_2, 7.0 * PI / 8.0, 0.0).unwrap();
        let closed = gamma_theta_membership(&spec(&[0.0, 1.0]), &s, true);
        let open = gamma_theta_membership(&spec(&[0.0, 1.0]), &s, false);
        assert!(closed.is_member && closed.margin >= 0.0);
        assert!(!open.is_member && open.margin < 0.0);
        let r = gamma_theta_membership(&spec(&[-10.0, -10.0]), &s, true);
        assert!(!r.is_member && r.margin < 0.0);
    }

    #[test]
    fn phase_spec_validation() {
        assert!(DhymPhaseSpec::new(0.0, 1.0, 0.0).is_err());
        assert!(DhymPhaseSpec::new(2.0, 1.0, 0.0).is_err());
        assert!(DhymPhaseSpec::new(1.0, PI, 0.0).is_err());
    }

    #[test]
    fn sampled_points_are_in_closed_cone() {
        let s = DhymPhaseSpec::new(1.2, 2.5, 0.0).unwrap();
        for i in 0..500 {
            let mut rng = sample_rng(9, i);
            let v = sample_gamma_theta(3, s.theta, s.big_theta, &mut rng);
            assert!(gamma_theta_membership(&spec(&v), &s, true).is_member);
        }
    }

    #[test]
    fn im_probe_examples() {
        let s = DhymPhaseSpec::new(3.0 * FRAC_PI_4, 3.0 * FRAC_PI_4, 0.0).unwrap();
        assert!(im_lower_bound_probe(&s, 1, 2000, 1) > 0.0);
        assert!(im_lower_bound_probe(&s, 3, 2000, 1) > 0.0);
    }

    #[test]
    fn small_prop_probe_passes() {
        let s = DhymPhaseSpec::new(1.8, 2.6, 0.0).unwrap();
        let r = prop_probe(&s, 3, 0.5, 300, 4).unwrap();
        assert!(r.is_member, "{r:?}");
    }
}
