use std::f64::consts::TAU;

use optomech::dynamics::{
    integrate_window, protocol_point, pulsed_protocol_with, seeded_origin, ProtocolConfig,
    SAMPLES_PER_PERIOD,
};
use optomech::model::{derive, DriveConfig, SystemParams};
use optomech::ode::Tolerances;
use optomech::response::solve_limit_cycle;
use optomech::stability::{bifurcation_sweep, classify, BifurcationKind, Region};

const DESK: f64 = 1000.0;

fn desk3() -> SystemParams {
    SystemParams::bundled_set("III")
        .unwrap()
        .desk_scaled(DESK)
        .unwrap()
}

fn crit(p: &SystemParams) -> f64 {
    derive(p).unwrap().n_in_crit
}

#[test]
fn halving_tolerances_leaves_window_mean_unchanged() {
    let p = desk3();
    let c = crit(&p);
    let base = ProtocolConfig::desk(DESK);
    let tight = ProtocolConfig {
        tol: Tolerances {
            rtol: 0.5e-9,
            atol: 0.5e-12,
            ..base.tol
        },
        ..base
    };
    for (x, r) in [(0.5, 0.008), (-1.0, 1.10), (0.0, 1.10), (0.94, 0.5)] {
        let d = DriveConfig::new(x * p.omega_m, r * c).unwrap();
        let a = protocol_point(&p, &d, &base).unwrap();
        let b = protocol_point(&p, &d, &tight).unwrap();
        let diff = (a.s21_mean - b.s21_mean).norm();
        assert!(diff < 1e-6, "x={x} r={r}: {diff:e}");
    }
}

#[test]
fn protocol_is_invariant_under_grid_permutation() {
    let p = desk3();
    let c = crit(&p);
    let cfg = ProtocolConfig::desk(DESK);
    let grid: Vec<f64> = (0..9)
        .map(|i| (-1.2 + 0.3 * i as f64) * p.omega_m)
        .collect();
    let perm = [4, 7, 0, 8, 2, 5, 1, 6, 3];
    let shuffled: Vec<f64> = perm.iter().map(|&i| grid[i]).collect();
    let a = pulsed_protocol_with(&p, 1.1 * c, &grid, &cfg).unwrap();
    let b = pulsed_protocol_with(&p, 1.1 * c, &shuffled, &cfg).unwrap();
    for (k, &i) in perm.iter().enumerate() {
        assert_eq!(b[k].delta, a[i].delta);
        assert_eq!(b[k].s21_mean, a[i].s21_mean);
    }
}

#[test]
fn weak_drive_settles_quietly() {
    let p = desk3();
    let d = DriveConfig::new(0.2 * p.omega_m, 0.008 * crit(&p)).unwrap();
    let r = protocol_point(&p, &d, &ProtocolConfig::desk(DESK)).unwrap();
    assert!(r.settled);
    assert!(r.window_b_amplitude < 1e-6, "{}", r.window_b_amplitude);
}

#[test]
fn limit_cycle_endpoint_is_seed_independent() {
    let p = desk3();
    let d = DriveConfig::new(0.94 * p.omega_m, 0.5 * crit(&p)).unwrap();
    let b = solve_limit_cycle(&p, &d).unwrap().amplitude_b;
    for seed in [1e-8, 1e-6, 1e-3] {
        let cfg = ProtocolConfig {
            seed,
            ..ProtocolConfig::desk(DESK)
        };
        let r = protocol_point(&p, &d, &cfg).unwrap();
        assert!(r.settled);
        assert!(
            (r.window_b_amplitude / b - 1.0).abs() < 0.02,
            "seed {seed}: {} vs {b}",
            r.window_b_amplitude
        );
    }
}

/// Between the Hopf point of the upper branch and the lower fold only the
/// lower branch is stable; the flow started from the empty cavity must land
/// on it.
#[test]
fn multistable_drive_selects_lower_branch() {
    let p = desk3();
    let c = crit(&p);
    for x in [-0.7, -0.9] {
        let delta = x * p.omega_m;
        let ev = bifurcation_sweep(&p, delta, 0.5 * c, 20.0 * c).unwrap();
        let hopf = ev
            .iter()
            .find(|e| e.kind == BifurcationKind::Hopf)
            .unwrap()
            .n_in_at;
        let fold = ev
            .iter()
            .find(|e| e.kind == BifurcationKind::SaddleNode)
            .unwrap()
            .n_in_at;
        let flux = (hopf * fold).sqrt();
        let d = DriveConfig::new(delta, flux).unwrap();
        let cell = classify(&p, &d).unwrap();
        assert_eq!(cell.region, Some(Region::III));
        let lower = &cell.fixed_points[0];
        assert!(lower.stable);

        let period = TAU / p.omega_m;
        let dt = period / SAMPLES_PER_PERIOD as f64;
        let t_end = 2000.0 * period;
        let tr = integrate_window(
            &p,
            &d,
            seeded_origin(1e-6),
            t_end,
            dt,
            t_end - period,
            Tolerances::default(),
        )
        .unwrap();
        let y = tr.states.last().unwrap();
        let n = y[0] * y[0] + y[1] * y[1];
        assert!(
            (n / lower.n_c - 1.0).abs() < 1e-6,
            "x={x}: {n} vs {}",
            lower.n_c
        );
    }
}

#[test]
fn region_i_saturates_at_the_analytic_amplitude() {
    let p = desk3();
    let c = crit(&p);
    let cfg = ProtocolConfig::desk(DESK);
    for x in [0.88, 0.92] {
        let d = DriveConfig::new(x * p.omega_m, 0.7 * c).unwrap();
        assert_eq!(classify(&p, &d).unwrap().region, Some(Region::I));
        let b = solve_limit_cycle(&p, &d).unwrap().amplitude_b;
        let r = protocol_point(&p, &d, &cfg).unwrap();
        assert!(
            (r.window_b_amplitude / b - 1.0).abs() < 0.02,
            "x={x}: {} vs {b}",
            r.window_b_amplitude
        );
    }
}

#[test]
fn laboratory_timing_is_available() {
    let lab = ProtocolConfig::laboratory();
    assert_eq!((lab.t_drive, lab.t_window), (1.4, 2e-3));
    let desk = ProtocolConfig::desk(DESK);
    assert!((desk.t_drive - 1.4e-3).abs() < 1e-15);
    assert!((desk.t_window - 2e-6).abs() < 1e-18);
}
