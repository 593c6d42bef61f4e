//! Analytic steady-state transmission `S21`: the fixed-point formula in the
//! stable regions, the Bessel sideband series on a self-consistent limit
//! cycle in the self-oscillating region, and a piecewise spectrum built from
//! the stability classification.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::bessel::{truncation_order, BesselTable};
use crate::error::{Error, Result};
use crate::model::{DriveConfig, SystemParams};
use crate::stability::{classify, Region};
use crate::steadystate::{photon_number_stable, photon_residual_oscillating};

/// Below this amplitude `gamma_opt` switches to its analytic small-amplitude
/// limit.
pub const SMALL_AMPLITUDE: f64 = 1e-12;

#[inline]
fn effective_detuning(params: &SystemParams, drive: &DriveConfig, n_c: f64) -> f64 {
    drive.delta + params.kerr_eff() * n_c
}

/// Fixed-point transmission `1 - (κ_ext/2) / (-i(Δ + K_eff n_c) + κ/2)`.
pub fn s21_stable(params: &SystemParams, drive: &DriveConfig, n_c: f64) -> Complex64 {
    let d = effective_detuning(params, drive, n_c);
    1.0 - 0.5 * params.kappa_ext / Complex64::new(0.5 * params.kappa(), -d)
}

/// Bessel argument `z1 = 2 B g0 / Ω_m` of the cavity phase modulation.
pub fn z1_of(params: &SystemParams, b: f64) -> f64 {
    2.0 * b * params.g0 / params.omega_m
}

pub fn amplitude_of_z1(params: &SystemParams, z1: f64) -> f64 {
    z1 * params.omega_m / (2.0 * params.g0)
}

/// Optomechanical damping rate of a mechanical oscillation of amplitude `b`
/// with time-averaged photon number `n_c`.
///
/// ```text
/// Γ_opt = (g0 κ_ext n_in / B) Im Σ_n J_n J_{n+1} /
///         [(i(D - nΩ_m) + κ/2)(-i(D - (n+1)Ω_m) + κ/2)],   D = Δ + K_eff n_c
/// ```
///
/// This is the rate at which the mean-field flow damps `|β|^2`; it reduces
/// to [`gamma_opt_linear`] as `b → 0`.
pub fn gamma_opt(params: &SystemParams, drive: &DriveConfig, b: f64, n_c: f64) -> f64 {
    if b < SMALL_AMPLITUDE {
        return gamma_opt_linear(params, drive, n_c);
    }
    let z = z1_of(params, b);
    let (table, n_max) = BesselTable::adaptive(z, 2);
    gamma_opt_series(params, drive, b, n_c, &table, n_max)
}

pub(crate) fn gamma_opt_series(
    params: &SystemParams,
    drive: &DriveConfig,
    b: f64,
    n_c: f64,
    table: &BesselTable,
    n_max: usize,
) -> f64 {
    let d = effective_detuning(params, drive, n_c);
    let a = 0.5 * params.kappa();
    let om = params.omega_m;
    let nm = n_max as i64;
    let mut s = 0.0;
    for n in -nm - 1..=nm {
        let w = table.get(n) * table.get(n + 1);
        if w == 0.0 {
            continue;
        }
        let p = Complex64::new(a, d - n as f64 * om);
        let q = Complex64::new(a, -(d - (n + 1) as f64 * om));
        s += w * (1.0 / (p * q)).im;
    }
    params.g0 * params.kappa_ext * drive.n_in / b * s
}

/// Small-amplitude optomechanical damping
/// `g0^2 n_c [κ/((D+Ω_m)^2 + κ^2/4) - κ/((D-Ω_m)^2 + κ^2/4)]`.
pub fn gamma_opt_linear(params: &SystemParams, drive: &DriveConfig, n_c: f64) -> f64 {
    let d = effective_detuning(params, drive, n_c);
    let k = params.kappa();
    let a2 = 0.25 * k * k;
    let om = params.omega_m;
    params.g0 * params.g0 * n_c * (k / ((d + om).powi(2) + a2) - k / ((d - om).powi(2) + a2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitCycleSolution {
    pub amplitude_b: f64,
    pub z1: f64,
    pub n_c: f64,
    pub gamma_opt: f64,
    pub converged: bool,
    /// `|Γ_m + Γ_opt| / Γ_m`.
    pub balance_residual: f64,
    /// Relative residual of the Bessel-corrected photon balance.
    pub photon_residual: f64,
}

/// Point count used when scanning the photon balance for roots.
const PHOTON_SCAN: usize = 600;
/// Upper end of the z1 bracket grid.
const Z1_MAX: f64 = 40.0;

fn photon_at(
    params: &SystemParams,
    drive: &DriveConfig,
    z: f64,
    n_prev: f64,
) -> Option<(f64, BesselTable, usize)> {
    let (table, n_max) = BesselTable::adaptive(z, 2);
    let roots =
        crate::steadystate::photon_number_oscillating(params, drive, &table, n_max, PHOTON_SCAN);
    let n = roots
        .into_iter()
        .min_by(|a, b| (a - n_prev).abs().total_cmp(&(b - n_prev).abs()))?;
    Some((n, table, n_max))
}

/// Power-balance function `Γ_m + Γ_opt(z1, n(z1))` on the tracked photon
/// branch.
struct Balance<'a> {
    params: &'a SystemParams,
    drive: &'a DriveConfig,
}

impl Balance<'_> {
    fn eval(&self, z: f64, n_prev: f64) -> Option<(f64, f64)> {
        let (n, table, n_max) = photon_at(self.params, self.drive, z, n_prev)?;
        let b = amplitude_of_z1(self.params, z);
        let g = gamma_opt_series(self.params, self.drive, b, n, &table, n_max);
        Some((self.params.gamma_m + g, n))
    }
}

fn z_grid() -> Vec<f64> {
    let mut g: Vec<f64> = (0..=30)
        .map(|i| 1e-4 * 1000f64.powf(i as f64 / 30.0))
        .collect();
    let mut z = 0.1;
    while z < Z1_MAX {
        z += 0.02;
        g.push(z);
    }
    g
}

/// Self-consistent mechanical amplitude and photon number of the limit cycle
/// reached from a small seed: the smallest amplitude at which `Γ_m + Γ_opt`
/// crosses zero from below, with the photon number following the branch
/// continuously connected to the fixed point.
pub fn solve_limit_cycle(params: &SystemParams, drive: &DriveConfig) -> Result<LimitCycleSolution> {
    if params.g0 <= 0.0 {
        return Err(Error::NoLimitCycle("no optomechanical coupling".into()));
    }
    let branches = photon_number_stable(params, drive);
    let n0 = branches.lower();
    let bal = Balance { params, drive };
    let f0 = params.gamma_m + gamma_opt_linear(params, drive, n0);
    if f0 >= 0.0 {
        return Err(Error::NoLimitCycle("fixed point is not anti-damped".into()));
    }

    let grid = z_grid();
    let mut z_prev = 0.0;
    let mut f_prev = f0;
    let mut n_prev = n0;
    for &z in &grid {
        let Some((f, n)) = bal.eval(z, n_prev) else {
            return Err(Error::NoLimitCycle(format!(
                "photon balance has no root at z1 = {z}"
            )));
        };
        if f_prev < 0.0 && f >= 0.0 {
            if let Some(sol) = refine(params, drive, z_prev, z, n_prev) {
                if sol.converged {
                    return Ok(sol);
                }
            }
        }
        z_prev = z;
        f_prev = f;
        n_prev = n;
    }
    Err(Error::NoLimitCycle(format!(
        "no stable power balance root below z1 = {Z1_MAX}"
    )))
}

fn refine(
    params: &SystemParams,
    drive: &DriveConfig,
    z_lo: f64,
    z_hi: f64,
    n_start: f64,
) -> Option<LimitCycleSolution> {
    let bal = Balance { params, drive };
    let (mut lo, mut hi) = (z_lo, z_hi);
    let mut n_track = n_start;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (f, n) = bal.eval(mid, n_track)?;
        if f < 0.0 {
            lo = mid;
            n_track = n;
        } else {
            hi = mid;
        }
    }
    // Both ends now bracket the root to machine precision; take the end with
    // the smaller balance residual.
    let (f_lo, n_lo) = bal.eval(lo.max(1e-300), n_track)?;
    let (f_hi, n_hi) = bal.eval(hi, n_track)?;
    let (z, n, f) = if f_lo.abs() <= f_hi.abs() {
        (lo, n_lo, f_lo)
    } else {
        (hi, n_hi, f_hi)
    };
    let (table, n_max) = BesselTable::adaptive(z, 2);
    let photon_residual =
        (photon_residual_oscillating(params, drive, &table, n_max, n) / n.max(1e-300)).abs();
    let balance_residual = (f / params.gamma_m).abs();
    let b = amplitude_of_z1(params, z);
    Some(LimitCycleSolution {
        amplitude_b: b,
        z1: z,
        n_c: n,
        gamma_opt: f - params.gamma_m,
        converged: balance_residual <= 1e-8 && photon_residual <= 1e-8,
        balance_residual,
        photon_residual,
    })
}

/// Cycle-averaged transmission on a limit cycle,
/// `1 - (κ_ext/2) Σ_n J_n(z1)^2 / (-i(D - nΩ_m) + κ/2)`.
pub fn s21_unstable(
    params: &SystemParams,
    drive: &DriveConfig,
    lc: &LimitCycleSolution,
) -> Complex64 {
    s21_sideband_sum(params, drive, lc.z1, lc.n_c)
}

pub fn s21_sideband_sum(
    params: &SystemParams,
    drive: &DriveConfig,
    z1: f64,
    n_c: f64,
) -> Complex64 {
    let n_max = truncation_order(z1);
    let table = BesselTable::new(z1, n_max);
    s21_series(params, drive, n_c, &table, n_max)
}

fn s21_series(
    params: &SystemParams,
    drive: &DriveConfig,
    n_c: f64,
    table: &BesselTable,
    n_max: usize,
) -> Complex64 {
    let d = effective_detuning(params, drive, n_c);
    let a = 0.5 * params.kappa();
    let nm = n_max as i64;
    let mut s = Complex64::new(0.0, 0.0);
    // Pair ±n so the sum is symmetric in the index by construction.
    let term = |n: i64| {
        let j = table.get(n);
        j * j / Complex64::new(a, -(d - n as f64 * params.omega_m))
    };
    s += term(0);
    for n in 1..=nm {
        s += term(n) + term(-n);
    }
    1.0 - 0.5 * params.kappa_ext * s
}

/// Complex amplitudes of the cavity field harmonics on a limit cycle,
/// `α(t) = Σ_m c_m e^{i m Ω_m t}` (up to a common phase), for
/// `m = -m_max..=m_max`.
pub fn cavity_harmonics(
    params: &SystemParams,
    drive: &DriveConfig,
    lc: &LimitCycleSolution,
    m_max: usize,
) -> Vec<Complex64> {
    let z = lc.z1;
    let n_max = truncation_order(z) + m_max;
    let table = BesselTable::new(z, 2 * n_max + m_max);
    let d = effective_detuning(params, drive, lc.n_c);
    let a = 0.5 * params.kappa();
    let f = (0.5 * params.kappa_ext * drive.n_in).sqrt();
    let nm = n_max as i64;
    let u: Vec<(i64, Complex64)> = (-nm..=nm)
        .map(|n| {
            let c = -f * table.get(n) / Complex64::new(a, -(d - n as f64 * params.omega_m));
            (n, c)
        })
        .collect();
    let mm = m_max as i64;
    (-mm..=mm)
        .map(|m| u.iter().map(|(n, c)| c * table.get(n - m)).sum())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    StableFormula,
    LimitCycleFormula,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::StableFormula => "stable_formula",
            Regime::LimitCycleFormula => "limit_cycle_formula",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumPoint {
    pub delta: f64,
    pub s21: Complex64,
    pub regime: Regime,
    /// `None` on a region boundary.
    pub region: Option<Region>,
    /// Set on boundary cells and where a limit-cycle solve failed.
    pub flagged: bool,
    pub limit_cycle: Option<LimitCycleSolution>,
}

pub fn spectrum_point(params: &SystemParams, drive: &DriveConfig) -> Result<SpectrumPoint> {
    let cell = classify(params, drive)?;
    let stable_point = |flagged| -> SpectrumPoint {
        let n = cell
            .lowest_stable()
            .map(|f| f.n_c)
            .unwrap_or_else(|| cell.fixed_points[0].n_c);
        SpectrumPoint {
            delta: drive.delta,
            s21: s21_stable(params, drive, n),
            regime: Regime::StableFormula,
            region: cell.region,
            flagged,
            limit_cycle: None,
        }
    };
    Ok(match cell.region {
        Some(Region::I) | Some(Region::AllUnstable) => match solve_limit_cycle(params, drive) {
            Ok(lc) => SpectrumPoint {
                delta: drive.delta,
                s21: s21_unstable(params, drive, &lc),
                regime: Regime::LimitCycleFormula,
                region: cell.region,
                flagged: false,
                limit_cycle: Some(lc),
            },
            Err(_) => stable_point(true),
        },
        Some(_) => stable_point(false),
        None => stable_point(true),
    })
}

/// Piecewise analytic spectrum over a detuning grid at fixed input flux.
pub fn spectrum(params: &SystemParams, flux: f64, deltas: &[f64]) -> Result<Vec<SpectrumPoint>> {
    deltas
        .par_iter()
        .map(|&delta| spectrum_point(params, &DriveConfig::new(delta, flux)?))
        .collect()
}
