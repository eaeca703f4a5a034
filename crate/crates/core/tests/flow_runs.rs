use std::f64::consts::PI;

use kahlerlab::flows::{self, FlowConfig, FlowEquation, RunRecord, RunStatus, SweepConfig, SweepSchedule};
use kahlerlab::gma::GmaCoefficients;
use kahlerlab::spectra::HermitianMatrix;
use kahlerlab::torus::{PotentialField, TorusGrid};

fn grid() -> TorusGrid {
    TorusGrid::new(2, 8).unwrap()
}

fn bump() -> PotentialField {
    PotentialField::from_fn(grid(), |x| 0.04 * (2.0 * PI * x[0]).cos() + 0.02 * (2.0 * PI * x[3]).sin())
}

fn gma(phi0: PotentialField) -> FlowConfig {
    let coeffs = GmaCoefficients::constant(2, vec![1.0], 2.0).unwrap();
    FlowConfig::new(FlowEquation::Gma { coeffs }, HermitianMatrix::scalar(2, 2.0), HermitianMatrix::identity(2), phi0)
}

fn residual_settles(rec: &RunRecord) {
    let skip = rec.rows.len() / 5;
    for w in rec.rows[skip..].windows(2) {
        assert!(
            w[1].res_l2 <= w[0].res_l2 * (1.0 + 1e-9) + 1e-14,
            "res_l2 rose from {} to {} at t = {}",
            w[0].res_l2,
            w[1].res_l2,
            w[1].t
        );
    }
}

#[test]
fn gma_flow_conserves_energy_and_settles() {
    let rec = flows::run(gma(bump())).unwrap();
    assert_eq!(rec.status, RunStatus::Converged);
    assert!(!rec.mass_mismatched);
    let i0 = rec.rows[0].energy_i;
    for r in &rec.rows {
        assert!((r.energy_i - i0).abs() <= 1e-6 * i0.abs().max(1.0));
        assert!(r.sup_abs_phidot <= rec.rows[0].sup_abs_phidot + 1e-8);
    }
    residual_settles(&rec);
}

#[test]
fn mismatched_mass_is_flagged() {
    let coeffs = GmaCoefficients::constant(2, vec![1.0], 2.5).unwrap();
    let mut cfg = gma(bump());
    cfg.equation = FlowEquation::Gma { coeffs };
    cfg.t_max = 0.2;
    let rec = flows::run(cfg).unwrap();
    assert!(rec.mass_mismatched);
    assert_eq!(rec.forced_c0, Some(2.0));
}

#[test]
fn perturbed_flow_converges() {
    let coeffs = GmaCoefficients::constant(2, vec![1.0], 2.0).unwrap();
    let mut cfg = gma(bump());
    cfg.equation = FlowEquation::PerturbedGma { coeffs, epsilon: 0.1 };
    let rec = flows::run(cfg).unwrap();
    assert_eq!(rec.status, RunStatus::Converged);
    assert!(rec.a_epsilon.is_some());
}

#[test]
fn dhym_flow_confines_phase() {
    let cfg = FlowConfig::new(
        FlowEquation::Dhym { theta: PI / 2.0 },
        HermitianMatrix::identity(2),
        HermitianMatrix::identity(2),
        bump(),
    );
    let rec = flows::run(cfg).unwrap();
    assert_eq!(rec.status, RunStatus::Converged);
    let (lo, hi) = (rec.rows[0].theta_min, rec.rows[0].theta_max);
    for r in &rec.rows {
        assert!(r.theta_min >= lo - 1e-8 && r.theta_max <= hi + 1e-8);
    }
    for w in rec.rows.windows(3) {
        assert!(w[0].energy_j - 2.0 * w[1].energy_j + w[2].energy_j >= -1e-6);
    }
    residual_settles(&rec);
}

#[test]
fn runs_are_bit_identical() {
    let mut cfg = gma(bump());
    cfg.t_max = 0.5;
    let a = flows::run(cfg.clone()).unwrap();
    let b = flows::run(cfg).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    assert_eq!(a.final_phi, b.final_phi);
}

#[test]
fn t_max_is_reported() {
    let mut cfg = gma(bump());
    cfg.t_max = 0.3;
    cfg.residual_target = 1e-14;
    let rec = flows::run(cfg).unwrap();
    assert_eq!(rec.status, RunStatus::TMaxReached);
    assert!((rec.last().t - 0.3).abs() < 1e-12);
}

#[test]
fn single_index_sweep_is_one_run() {
    let mut base = gma(PotentialField::zeros(grid()));
    base.residual_target = 1e-7;
    let cfg = SweepConfig {
        base,
        schedule: SweepSchedule {
            s: vec![0.5],
            t: vec![],
            u: vec![],
        },
        c0_amplitude: 0.3,
        warm_start: true,
    };
    let report = flows::boundary_sweep(&cfg).unwrap();
    assert_eq!(report.entries.len(), 1);
    assert_eq!(report.records.len(), 1);
    assert!(report.distances.is_empty());
    assert_eq!(report.entries[0].status, RunStatus::Converged);
    assert!((report.entries[0].forced_c0 - 3.75).abs() < 1e-12);
}

#[test]
fn cold_and_warm_sweeps_agree() {
    let mut base = gma(PotentialField::zeros(grid()));
    base.residual_target = 1e-8;
    let schedule = SweepSchedule {
        s: vec![0.5, 0.25],
        t: vec![],
        u: vec![],
    };
    let run = |warm_start| {
        flows::boundary_sweep(&SweepConfig {
            base: base.clone(),
            schedule: schedule.clone(),
            c0_amplitude: 0.3,
            warm_start,
        })
        .unwrap()
    };
    let (warm, cold) = (run(true), run(false));
    for (a, b) in warm.distances.iter().zip(&cold.distances) {
        assert!((a - b).abs() < 1e-5, "{a} vs {b}");
    }
}
