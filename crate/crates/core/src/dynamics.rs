//! Time-domain integration of the quadrature equations, the pulsed
//! measurement protocol and Fourier diagnostics of limit cycles.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::model::{DriveConfig, SystemParams};
use crate::ode::{integrate_dense, State, Tolerances};

/// Mechanical seed used instead of the exact origin, which is itself a fixed
/// point of the noiseless flow at zero drive.
pub const MECHANICAL_SEED: f64 = 1e-6;

/// Output samples per mechanical period.
pub const SAMPLES_PER_PERIOD: usize = 64;

/// Right-hand side of the four quadrature equations
/// `(α_r, α_i, β_r, β_i)`.
#[inline]
pub fn rhs(params: &SystemParams, drive: &DriveConfig, y: &State) -> State {
    let [ar, ai, br, bi] = *y;
    let n = ar * ar + ai * ai;
    let h = 0.5 * params.kappa();
    let gm = 0.5 * params.gamma_m;
    let det = drive.delta + params.kerr * n - 2.0 * params.g0 * br;
    let drive_term = (0.5 * params.kappa_ext).sqrt() * drive.alpha_p();
    [
        -det * ai - h * ar - drive_term,
        det * ar - h * ai,
        params.omega_m * bi - gm * br,
        -params.omega_m * br - gm * bi - params.g0 * n,
    ]
}

/// Time-resolved scattering parameter `1 + sqrt(κ_ext/2) α / α_p`.
#[inline]
pub fn s21_of_state(params: &SystemParams, drive: &DriveConfig, y: &State) -> Complex64 {
    let c = (0.5 * params.kappa_ext).sqrt() / drive.alpha_p();
    Complex64::new(1.0 + c * y[0], c * y[1])
}

#[derive(Debug, Clone, Default)]
pub struct TimeTrace {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    /// Empty when the drive is off.
    pub s21: Vec<Complex64>,
}

impl TimeTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Integrates from `initial` over `[0, t_end]`, sampling every `dt_out`.
pub fn integrate(
    params: &SystemParams,
    drive: &DriveConfig,
    initial: State,
    t_end: f64,
    dt_out: f64,
) -> Result<TimeTrace> {
    integrate_window(
        params,
        drive,
        initial,
        t_end,
        dt_out,
        0.0,
        Tolerances::default(),
    )
}

/// As [`integrate`], but only samples with `t >= record_from` are kept.
pub fn integrate_window(
    params: &SystemParams,
    drive: &DriveConfig,
    initial: State,
    t_end: f64,
    dt_out: f64,
    record_from: f64,
    tol: Tolerances,
) -> Result<TimeTrace> {
    let mut trace = TimeTrace::default();
    let with_s21 = drive.n_in > 0.0;
    let f = |_t: f64, y: &State| rhs(params, drive, y);
    integrate_dense(f, 0.0, initial, t_end, dt_out, tol, |t, y| {
        if t >= record_from {
            trace.times.push(t);
            trace.states.push(*y);
            if with_s21 {
                trace.s21.push(s21_of_state(params, drive, y));
            }
        }
    })?;
    Ok(trace)
}

/// Initial state of every protocol run: empty cavity, seeded mechanics.
pub fn seeded_origin(seed: f64) -> State {
    [0.0, 0.0, seed, 0.0]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolConfig {
    pub t_drive: f64,
    pub t_window: f64,
    pub seed: f64,
    pub tol: Tolerances,
}

impl ProtocolConfig {
    /// Laboratory timing: 1.4 s drive, last 2 ms averaged.
    pub fn laboratory() -> Self {
        ProtocolConfig {
            t_drive: 1.4,
            t_window: 2e-3,
            seed: MECHANICAL_SEED,
            tol: Tolerances::default(),
        }
    }

    /// Laboratory timing compressed by the desk-scale factor.
    pub fn desk(factor: f64) -> Self {
        let lab = Self::laboratory();
        ProtocolConfig {
            t_drive: lab.t_drive / factor,
            t_window: lab.t_window / factor,
            ..lab
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolResult {
    pub delta: f64,
    pub s21_mean: Complex64,
    /// RMS of `|β - <β>|` over the window.
    pub window_b_amplitude: f64,
    pub settled: bool,
}

/// Drive window, rounded to an even number of mechanical periods so that it
/// splits into two whole-period halves.
pub fn window_periods(params: &SystemParams, t_window: f64) -> usize {
    let periods = (t_window * params.omega_m / TAU).round() as usize;
    (periods + periods % 2).max(2)
}

pub fn protocol_point(
    params: &SystemParams,
    drive: &DriveConfig,
    cfg: &ProtocolConfig,
) -> Result<ProtocolResult> {
    if !(cfg.t_window > 0.0 && cfg.t_window < cfg.t_drive) {
        return Err(Error::InvalidInput(
            "protocol needs 0 < t_window < t_drive".into(),
        ));
    }
    if !(drive.n_in > 0.0) {
        return Err(Error::InvalidInput(
            "protocol needs a non-zero drive".into(),
        ));
    }
    let period = TAU / params.omega_m;
    let dt = period / SAMPLES_PER_PERIOD as f64;
    let periods = window_periods(params, cfg.t_window);
    let samples = periods * SAMPLES_PER_PERIOD;
    let steps_total = (cfg.t_drive / dt).round() as usize;
    let t_end = steps_total as f64 * dt;
    let start_index = steps_total.saturating_sub(samples - 1);
    let record_from = (start_index as f64 - 0.5) * dt;
    let trace = integrate_window(
        params,
        drive,
        seeded_origin(cfg.seed),
        t_end,
        dt,
        record_from,
        cfg.tol,
    )?;
    Ok(summarize_window(drive.delta, &trace))
}

fn summarize_window(delta: f64, trace: &TimeTrace) -> ProtocolResult {
    let n = trace.s21.len();
    let mean = mean_c(&trace.s21);
    let half = n / 2;
    let m1: f64 = trace.s21[..half].iter().map(|z| z.norm()).sum::<f64>() / half as f64;
    let m2: f64 = trace.s21[half..].iter().map(|z| z.norm()).sum::<f64>() / (n - half) as f64;
    let level = 0.5 * (m1 + m2);
    let drift = (m1 - m2).abs() / level.max(1e-3);

    let betas: Vec<Complex64> = trace
        .states
        .iter()
        .map(|y| Complex64::new(y[2], y[3]))
        .collect();
    let bm = mean_c(&betas);
    let b_rms =
        (betas.iter().map(|b| (b - bm).norm_sqr()).sum::<f64>() / betas.len() as f64).sqrt();
    ProtocolResult {
        delta,
        s21_mean: mean,
        window_b_amplitude: b_rms,
        settled: drift < 1e-3,
    }
}

fn mean_c(v: &[Complex64]) -> Complex64 {
    v.iter().sum::<Complex64>() / v.len() as f64
}

/// Runs every detuning independently from the seeded origin and averages
/// `S21` over the terminal window.
pub fn pulsed_protocol(
    params: &SystemParams,
    flux: f64,
    deltas: &[f64],
    t_drive: f64,
    t_window: f64,
) -> Result<Vec<ProtocolResult>> {
    let cfg = ProtocolConfig {
        t_drive,
        t_window,
        ..ProtocolConfig::laboratory()
    };
    pulsed_protocol_with(params, flux, deltas, &cfg)
}

pub fn pulsed_protocol_with(
    params: &SystemParams,
    flux: f64,
    deltas: &[f64],
    cfg: &ProtocolConfig,
) -> Result<Vec<ProtocolResult>> {
    deltas
        .par_iter()
        .map(|&delta| protocol_point(params, &DriveConfig::new(delta, flux)?, cfg))
        .collect()
}

/// Zero-frequency DFT bin of a complex series, normalised by its length.
pub fn dc_component(v: &[Complex64]) -> Complex64 {
    let mut buf = v.to_vec();
    FftPlanner::new()
        .plan_fft_forward(buf.len())
        .process(&mut buf);
    buf[0] / v.len() as f64
}

/// Mean angular frequency of the mechanical motion about its centre, from the
/// unwrapped phase of `β - <β>`. The optical spring pulls a limit cycle away
/// from the bare `Ω_m`; harmonic analysis at the pulled frequency avoids
/// spectral leakage on long windows.
pub fn mechanical_frequency(trace: &TimeTrace) -> Result<f64> {
    if trace.len() < 3 {
        return Err(Error::InvalidInput(
            "trace too short for a frequency estimate".into(),
        ));
    }
    let centre = mean_c(
        &trace
            .states
            .iter()
            .map(|y| Complex64::new(y[2], y[3]))
            .collect::<Vec<_>>(),
    );
    let mut turned = 0.0;
    let mut prev: Option<f64> = None;
    for y in &trace.states {
        let ph = (Complex64::new(y[2], y[3]) - centre).arg();
        if let Some(q) = prev {
            let mut d = ph - q;
            d -= TAU * (d / TAU).round();
            turned += d;
        }
        prev = Some(ph);
    }
    let span = trace.times[trace.len() - 1] - trace.times[0];
    Ok(turned.abs() / span)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicContent {
    /// Whole mechanical periods analysed.
    pub periods: usize,
    /// Power fraction of `β_r` at `n Ω_m`, `n = 0..=5` (`±n` combined).
    pub mechanical: [f64; 6],
    /// Power fraction of `α_r + i α_i` in the component rotating as
    /// `e^{i n Ω_m t}`, `n = -5..=5` (index `n + 5`).
    pub cavity: [f64; 11],
}

impl HarmonicContent {
    /// Share of the non-DC mechanical power at `±Ω_m`.
    pub fn mechanical_fundamental_share(&self) -> f64 {
        let ac = 1.0 - self.mechanical[0];
        if ac <= 0.0 {
            return 1.0;
        }
        self.mechanical[1] / ac
    }

    pub fn cavity_at(&self, n: i64) -> f64 {
        self.cavity[(n + 5) as usize]
    }
}

/// Fourier decomposition of a steady trace sampled uniformly. The trace end
/// is kept and its start truncated to a whole number of mechanical periods.
pub fn harmonic_content(trace: &TimeTrace, omega_m: f64) -> Result<HarmonicContent> {
    if trace.len() < 2 {
        return Err(Error::InvalidInput(
            "trace too short for harmonic analysis".into(),
        ));
    }
    let dt = trace.times[1] - trace.times[0];
    let per_period = TAU / omega_m / dt;
    let span = (trace.len() - 1) as f64 * dt + dt;
    let periods = (span * omega_m / TAU).floor() as usize;
    if periods == 0 {
        return Err(Error::InvalidInput(
            "trace covers less than one mechanical period".into(),
        ));
    }
    let len = (periods as f64 * per_period).round() as usize;
    let len = len.min(trace.len());
    let start = trace.len() - len;
    let states = &trace.states[start..];

    let mut mech: Vec<Complex64> = states.iter().map(|y| Complex64::new(y[2], 0.0)).collect();
    let mut cav: Vec<Complex64> = states.iter().map(|y| Complex64::new(y[0], y[1])).collect();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(len);
    let mech_total: f64 = mech.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let cav_total: f64 = cav.iter().map(|z| z.norm_sqr()).sum::<f64>();
    fft.process(&mut mech);
    fft.process(&mut cav);
    // Parseval: Σ|x|^2 = Σ|X|^2 / len.
    let bin = |n: i64| -> usize { (n * periods as i64).rem_euclid(len as i64) as usize };
    let frac = |spec: &[Complex64], total: f64, n: i64| -> f64 {
        if total == 0.0 {
            return 0.0;
        }
        spec[bin(n)].norm_sqr() / len as f64 / total
    };
    let mut mechanical = [0.0; 6];
    mechanical[0] = frac(&mech, mech_total, 0);
    for (n, m) in mechanical.iter_mut().enumerate().skip(1) {
        *m = frac(&mech, mech_total, n as i64) + frac(&mech, mech_total, -(n as i64));
    }
    let mut cavity = [0.0; 11];
    for n in -5i64..=5 {
        cavity[(n + 5) as usize] = frac(&cav, cav_total, n);
    }
    Ok(HarmonicContent {
        periods,
        mechanical,
        cavity,
    })
}
