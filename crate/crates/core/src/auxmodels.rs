//! Forward models used for device characterisation and closed-form figures
//! of merit: notch response with a measurement environment, EMIT lineshape,
//! mechanical sideband PSD, calibration relations and the backaction
//! benchmark.

use num_complex::Complex64;
use serde::Serialize;

use crate::model::{SystemParams, HBAR, K_B};

/// Gain, phase, delay and impedance-mismatch angle of the measurement chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvironmentParams {
    pub a: f64,
    pub alpha_ph: f64,
    pub tau: f64,
    pub phi_mismatch: f64,
}

impl EnvironmentParams {
    pub fn ideal() -> Self {
        EnvironmentParams {
            a: 1.0,
            alpha_ph: 0.0,
            tau: 0.0,
            phi_mismatch: 0.0,
        }
    }
}

/// Resonance frequency with loaded and external quality factors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NotchResonator {
    pub omega_c: f64,
    /// Loaded quality factor `ω_c / κ`.
    pub q_loaded: f64,
    /// External quality factor `ω_c / κ_ext`.
    pub q_ext: f64,
}

impl NotchResonator {
    pub fn from_params(p: &SystemParams) -> Self {
        NotchResonator {
            omega_c: p.omega_c,
            q_loaded: p.omega_c / p.kappa(),
            q_ext: p.omega_c / p.kappa_ext,
        }
    }
}

/// Notch-type resonator seen through the environment:
/// `a e^{iα} e^{-iωτ} [1 - (Q/|Q_ext|) e^{iφ} / (1 + 2iQ(ω/ω_c - 1))]`.
pub fn notch_s21(res: &NotchResonator, env: &EnvironmentParams, omega: f64) -> Complex64 {
    let pre = env.a * Complex64::from_polar(1.0, env.alpha_ph - omega * env.tau);
    let x = Complex64::new(1.0, 2.0 * res.q_loaded * (omega / res.omega_c - 1.0));
    let dip = res.q_loaded / res.q_ext.abs() * Complex64::from_polar(1.0, env.phi_mismatch) / x;
    pre * (1.0 - dip)
}

/// EMIT transmission magnitude under a control drive at detuning
/// `delta_drive`, probed `omega_probe_offset` above the drive:
///
/// `|1 - (κ_ext/2) / (-i(Δ + Ω) + κ/2 + g0^2 n_c / (-i(Ω - Ω_m) + Γ_m/2))| + c_bg`.
pub fn emit_s21(
    params: &SystemParams,
    n_c: f64,
    delta_drive: f64,
    omega_probe_offset: f64,
    c_bg: f64,
) -> f64 {
    let om = omega_probe_offset;
    let mech =
        params.g0 * params.g0 * n_c / Complex64::new(0.5 * params.gamma_m, -(om - params.omega_m));
    let den = Complex64::new(0.5 * params.kappa(), -(delta_drive + om)) + mech;
    (1.0 - 0.5 * params.kappa_ext / den).norm() + c_bg
}

/// Mechanical sideband lineshape `a Ω_m Γ_m / ((Ω^2 - Ω_m^2)^2 + Γ_m^2 Ω^2) + c`.
pub fn sideband_psd(params: &SystemParams, amplitude_a: f64, offset_c: f64, omega: f64) -> f64 {
    let om = params.omega_m;
    let gm = params.gamma_m;
    amplitude_a * om * gm / ((omega * omega - om * om).powi(2) + gm * gm * omega * omega) + offset_c
}

/// Closed-form area `∫ S(Ω) dΩ/2π` over all Ω of the offset-free lineshape,
/// equal to `S(Ω_m) Γ_m / 2`.
pub fn sideband_area(params: &SystemParams, amplitude_a: f64) -> f64 {
    amplitude_a / (2.0 * params.omega_m)
}

/// Sideband area for phonon occupation `n_m`: `2 n_m g0^2`.
pub fn sideband_area_from_occupation(g0: f64, n_m: f64) -> f64 {
    2.0 * n_m * g0 * g0
}

pub fn g0_from_sideband_area(area: f64, n_m: f64) -> f64 {
    (area / (2.0 * n_m)).sqrt()
}

/// `g0 = sqrt(slope ħ Ω_m / (2 k_B))` from the slope of sideband area versus
/// bath temperature.
pub fn g0_from_temperature_slope(slope: f64, omega_m: f64) -> f64 {
    (slope * HBAR * omega_m / (2.0 * K_B)).sqrt()
}

/// Ordinary least-squares line `y = slope x + intercept`.
pub fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThermalModel {
    /// `k_B T / (ħ Ω_m)`.
    #[default]
    RayleighJeans,
    /// `1 / (exp(ħ Ω_m / k_B T) - 1)`.
    BoseEinstein,
}

pub fn thermal_occupation(bath_t: f64, omega_m: f64, model: ThermalModel) -> f64 {
    if bath_t <= 0.0 {
        return 0.0;
    }
    let x = HBAR * omega_m / (K_B * bath_t);
    match model {
        ThermalModel::RayleighJeans => 1.0 / x,
        ThermalModel::BoseEinstein => 1.0 / x.exp_m1(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BenchmarkPoint {
    /// Infinite when `g0 = 0`.
    pub n_c_instab: f64,
    pub n_m_min: f64,
    pub c0: f64,
    pub n_m_lin: f64,
    pub n_th: f64,
}

impl BenchmarkPoint {
    pub fn instability_reachable(&self) -> bool {
        self.n_c_instab.is_finite()
    }

    /// Single-photon instability and ground-state cooling both within reach.
    pub fn in_quantum_regime(&self) -> bool {
        self.n_c_instab <= 1.0 && self.n_m_min <= 1.0
    }
}

pub fn benchmark(params: &SystemParams, bath_t: f64) -> BenchmarkPoint {
    benchmark_with(params, bath_t, ThermalModel::default())
}

pub fn benchmark_with(params: &SystemParams, bath_t: f64, model: ThermalModel) -> BenchmarkPoint {
    let k = params.kappa();
    let om = params.omega_m;
    let gm = params.gamma_m;
    let g2 = params.g0 * params.g0;
    let c0 = 4.0 * g2 / (gm * k);
    let n_m_lin = (k / (4.0 * om)).powi(2);
    let n_c_instab = if g2 > 0.0 {
        (1.0 + n_m_lin) / c0
    } else {
        f64::INFINITY
    };
    let n_th = thermal_occupation(bath_t, om, model);
    let s3 = 3f64.sqrt();
    let w = 16.0 * om * om + k * k;
    let ke = params.kerr_eff();
    let n_m_min =
        (4.0 * g2 * k * k + s3 * gm * ke * n_th * w) / (64.0 * g2 * om * om + s3 * gm * ke * w);
    BenchmarkPoint {
        n_c_instab,
        n_m_min,
        c0,
        n_m_lin,
        n_th,
    }
}
