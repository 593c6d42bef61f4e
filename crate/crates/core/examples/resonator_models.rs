//! Notch resonator seen through a cable, electromechanically induced
//! transparency and thermal calibration of g0.

use std::f64::consts::TAU;

use optomech::auxmodels::{
    emit_s21, fit_line, g0_from_temperature_slope, notch_s21, sideband_area_from_occupation,
    thermal_occupation, EnvironmentParams, NotchResonator, ThermalModel,
};
use optomech::model::SystemParams;

fn main() -> optomech::Result<()> {
    let p = SystemParams::bundled_set("III")?;
    let res = NotchResonator::from_params(&p);
    let env = EnvironmentParams {
        a: 0.8,
        alpha_ph: 0.3,
        tau: 40e-9,
        phi_mismatch: 0.1,
    };
    for k in -3..=3 {
        let w = p.omega_c + k as f64 * p.kappa();
        let s = notch_s21(&res, &env, w);
        println!(
            "notch  (w - wc)/kappa = {k:+}  |S21| {:.4}  arg {:+.4}",
            s.norm(),
            s.arg()
        );
    }
    for k in -4..=4 {
        let om = p.omega_m + k as f64 * 100.0 * TAU;
        println!(
            "emit   offset {:+5} Hz  |S21| {:.5}",
            k * 100,
            emit_s21(&p, 10.0, -p.omega_m, om, 0.0)
        );
    }
    let temps: Vec<f64> = (1..=6).map(|i| 0.05 * i as f64).collect();
    let areas: Vec<f64> = temps
        .iter()
        .map(|&t| {
            sideband_area_from_occupation(
                p.g0,
                thermal_occupation(t, p.omega_m, ThermalModel::RayleighJeans),
            )
        })
        .collect();
    let (slope, _) = fit_line(&temps, &areas);
    println!(
        "g0 recovered {:.2} Hz (set {:.2} Hz)",
        g0_from_temperature_slope(slope, p.omega_m) / TAU,
        p.g0 / TAU
    );
    Ok(())
}
