//! Stationary intracavity photon number.
//!
//! The stable-regime photon equation
//!
//! ```text
//! n [(Δ + K_eff n)^2 + κ^2/4] = (κ_ext/2) n_in
//! ```
//!
//! is a cubic in `n` with one or three real roots, all of them positive.
//! With a self-oscillating mechanics the right-hand side picks up Bessel
//! sideband weights, see [`photon_residual_oscillating`].

use nalgebra::Matrix3;

use crate::bessel::BesselTable;
use crate::error::{Error, Result};
use crate::model::{DriveConfig, SystemParams, HBAR};

/// Roots closer than this (times `max(1, n)`) are reported as one double root.
pub const ROOT_MERGE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Branch {
    Lower,
    Middle,
    Upper,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::Lower => "lower",
            Branch::Middle => "middle",
            Branch::Upper => "upper",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhotonBranches {
    /// Ascending.
    pub roots: Vec<f64>,
    pub labels: Vec<Branch>,
    /// True when two roots of the cubic were merged into one.
    pub merged: bool,
}

impl PhotonBranches {
    fn from_roots(mut roots: Vec<f64>, merged: bool) -> Self {
        roots.sort_by(f64::total_cmp);
        let labels = match roots.len() {
            1 => vec![Branch::Lower],
            2 => vec![Branch::Lower, Branch::Upper],
            _ => vec![Branch::Lower, Branch::Middle, Branch::Upper],
        };
        PhotonBranches {
            roots,
            labels,
            merged,
        }
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn lower(&self) -> f64 {
        self.roots[0]
    }
}

/// The cubic `n[(Δ + K n)^2 + a^2] - F^2` and its derivative, with `a = κ/2`
/// and `F^2 = (κ_ext/2) n_in`.
#[derive(Debug, Clone, Copy)]
pub struct PhotonCubic {
    pub delta: f64,
    pub kerr: f64,
    pub half_kappa: f64,
    pub drive_sq: f64,
}

impl PhotonCubic {
    pub fn new(params: &SystemParams, drive: &DriveConfig) -> Self {
        PhotonCubic {
            delta: drive.delta,
            kerr: params.kerr_eff(),
            half_kappa: 0.5 * params.kappa(),
            drive_sq: 0.5 * params.kappa_ext * drive.n_in,
        }
    }

    pub fn eval(&self, n: f64) -> f64 {
        let d = self.delta + self.kerr * n;
        n * (d * d + self.half_kappa * self.half_kappa) - self.drive_sq
    }

    pub fn derivative(&self, n: f64) -> f64 {
        let d = self.delta + self.kerr * n;
        d * d + self.half_kappa * self.half_kappa + 2.0 * self.kerr * n * d
    }

    /// Relative residual `|LHS - RHS| / RHS` of the photon equation.
    pub fn relative_residual(&self, n: f64) -> f64 {
        if self.drive_sq == 0.0 {
            return n.abs();
        }
        (self.eval(n) / self.drive_sq).abs()
    }

    /// Coefficients of the monic cubic in `x = n K / κ`.
    fn scaled_coefficients(&self) -> [f64; 3] {
        let kappa = 2.0 * self.half_kappa;
        let r = self.delta / kappa;
        [
            2.0 * r,
            r * r + 0.25,
            -self.drive_sq * self.kerr / kappa.powi(3),
        ]
    }

    /// Sign of the discriminant of the expanded cubic: positive means three
    /// distinct real roots.
    pub fn discriminant(&self) -> f64 {
        let [b, c, d] = self.scaled_coefficients();
        18.0 * b * c * d - 4.0 * b.powi(3) * d + b * b * c * c - 4.0 * c.powi(3) - 27.0 * d * d
    }

    /// Stationary points of the cubic when they are real, ascending.
    fn critical_points(&self) -> Option<(f64, f64)> {
        let disc = self.delta * self.delta - 3.0 * self.half_kappa * self.half_kappa;
        if disc <= 0.0 {
            return None;
        }
        let s = disc.sqrt();
        let lo = (-2.0 * self.delta - s) / (3.0 * self.kerr);
        let hi = (-2.0 * self.delta + s) / (3.0 * self.kerr);
        (lo > 0.0).then_some((lo, hi))
    }

    /// None of the roots exceeds this.
    fn upper_bound(&self) -> f64 {
        self.drive_sq / (self.half_kappa * self.half_kappa)
    }
}

/// All real non-negative roots of the stable-regime photon equation.
pub fn photon_number_stable(params: &SystemParams, drive: &DriveConfig) -> PhotonBranches {
    let cubic = PhotonCubic::new(params, drive);
    solve_cubic(&cubic)
}

pub fn solve_cubic(cubic: &PhotonCubic) -> PhotonBranches {
    if cubic.drive_sq == 0.0 {
        return PhotonBranches::from_roots(vec![0.0], false);
    }
    if cubic.kerr == 0.0 {
        let a2 = cubic.half_kappa * cubic.half_kappa;
        let n = cubic.drive_sq / (cubic.delta * cubic.delta + a2);
        return PhotonBranches::from_roots(vec![n], false);
    }

    let guesses = companion_real_roots(cubic);
    let f = |n: f64| cubic.eval(n);
    let df = |n: f64| cubic.derivative(n);
    let pick = |lo: f64, hi: f64| {
        let g = guesses.iter().copied().find(|g| *g >= lo && *g <= hi);
        polish_bracketed(f, df, lo, hi, g)
    };
    let top = cubic.upper_bound();

    let roots = match cubic.critical_points() {
        Some((n_lo, n_hi)) if f(n_lo) >= 0.0 && f(n_hi) <= 0.0 => {
            vec![pick(0.0, n_lo), pick(n_lo, n_hi), pick(n_hi, top.max(n_hi))]
        }
        Some((n_lo, n_hi)) => {
            if f(n_lo) < 0.0 {
                vec![pick(n_hi, top.max(n_hi))]
            } else {
                vec![pick(0.0, n_lo)]
            }
        }
        None => vec![pick(0.0, top)],
    };

    if roots.len() == 3 {
        let close = |x: f64, y: f64| (y - x).abs() < ROOT_MERGE_TOL * x.max(y).max(1.0);
        if close(roots[0], roots[1]) && close(roots[1], roots[2]) {
            return PhotonBranches::from_roots(vec![roots[1]], true);
        }
        if close(roots[0], roots[1]) {
            return PhotonBranches::from_roots(vec![0.5 * (roots[0] + roots[1]), roots[2]], true);
        }
        if close(roots[1], roots[2]) {
            return PhotonBranches::from_roots(vec![roots[0], 0.5 * (roots[1] + roots[2])], true);
        }
    }
    PhotonBranches::from_roots(roots, false)
}

/// Real eigenvalues of the companion matrix, mapped back to photon numbers.
fn companion_real_roots(cubic: &PhotonCubic) -> Vec<f64> {
    let [b, c, d] = cubic.scaled_coefficients();
    let m = Matrix3::new(0.0, 0.0, -d, 1.0, 0.0, -c, 0.0, 1.0, -b);
    let scale = 2.0 * cubic.half_kappa / cubic.kerr;
    m.complex_eigenvalues()
        .iter()
        .filter(|z| z.im.abs() <= 1e-9 * z.re.abs().max(1.0))
        .map(|z| z.re * scale)
        .collect()
}

/// Safeguarded Newton iteration on a bracket with `f(lo) <= 0 <= f(hi)`
/// (or the reverse). Falls back to bisection whenever a step leaves the
/// bracket.
pub(crate) fn polish_bracketed<F, D>(f: F, df: D, lo: f64, hi: f64, guess: Option<f64>) -> f64
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let (mut lo, mut hi) = (lo, hi);
    let f_lo = f(lo);
    if f_lo == 0.0 {
        return lo;
    }
    let f_hi = f(hi);
    if f_hi == 0.0 {
        return hi;
    }
    let rising = f_lo < 0.0;
    let mut x = guess
        .filter(|g| *g > lo && *g < hi)
        .unwrap_or(0.5 * (lo + hi));
    for _ in 0..200 {
        let fx = f(x);
        if fx == 0.0 {
            return x;
        }
        if (fx < 0.0) == rising {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        let d = df(x);
        let newton = x - fx / d;
        x = if d != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    x
}

/// Linear-cavity photon number `(κ_ext/2) n_in / (Δ^2 + κ^2/4)`.
pub fn photon_number_linear(params: &SystemParams, drive: &DriveConfig) -> f64 {
    let a = 0.5 * params.kappa();
    0.5 * params.kappa_ext * drive.n_in / (drive.delta * drive.delta + a * a)
}

/// Residual of the time-averaged photon balance with a mechanical
/// oscillation of Bessel argument `z1`:
///
/// `n - F^2 Σ_k J_k(z1)^2 / ((Δ + K_eff n - k Ω_m)^2 + κ^2/4)`.
pub fn photon_residual_oscillating(
    params: &SystemParams,
    drive: &DriveConfig,
    bessel: &BesselTable,
    n_terms: usize,
    n: f64,
) -> f64 {
    let a2 = 0.25 * params.kappa().powi(2);
    let f2 = 0.5 * params.kappa_ext * drive.n_in;
    let d = drive.delta + params.kerr_eff() * n;
    let nt = n_terms as i64;
    let mut s = 0.0;
    for k in -nt..=nt {
        let j = bessel.get(k);
        let dk = d - k as f64 * params.omega_m;
        s += j * j / (dk * dk + a2);
    }
    n - f2 * s
}

/// All roots of the Bessel-corrected photon balance, ascending, found by
/// scanning `[0, F^2/(κ/2)^2]` and bisecting each sign change.
pub fn photon_number_oscillating(
    params: &SystemParams,
    drive: &DriveConfig,
    bessel: &BesselTable,
    n_terms: usize,
    scan_points: usize,
) -> Vec<f64> {
    let a2 = 0.25 * params.kappa().powi(2);
    let top = 0.5 * params.kappa_ext * drive.n_in / a2;
    if top == 0.0 {
        return vec![0.0];
    }
    let h = |n: f64| photon_residual_oscillating(params, drive, bessel, n_terms, n);
    let m = scan_points.max(8);
    let mut roots = Vec::new();
    let mut x_prev = 0.0;
    let mut h_prev = h(0.0);
    for i in 1..=m {
        // Slightly beyond the bound so the last root is always bracketed.
        let x = top * 1.001 * i as f64 / m as f64;
        let hx = h(x);
        if h_prev == 0.0 {
            roots.push(x_prev);
        } else if (h_prev < 0.0) != (hx < 0.0) && hx != 0.0 {
            roots.push(bisect(&h, x_prev, x));
        }
        x_prev = x;
        h_prev = hx;
    }
    roots
}

pub(crate) fn bisect<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> f64 {
    let (mut lo, mut hi) = (lo, hi);
    let rising = f(lo) < 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == rising {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub const KERR_SHIFT_MAX_ITER: usize = 10_000;

/// Lower-branch photon number and Kerr-shifted resonance `ω_c - K n` for a
/// single probe tone of power `p_drive` (W) at `omega_probe`.
///
/// Only the intrinsic Kerr constant enters; the mechanical contribution is
/// ignored, as in a bare nonlinear resonator.
pub fn kerr_shifted_response(
    params: &SystemParams,
    omega_probe: f64,
    p_drive: f64,
) -> Result<(f64, f64)> {
    if !(omega_probe > 0.0) || !(p_drive >= 0.0) {
        return Err(Error::InvalidInput(
            "kerr_shifted_response needs omega_probe > 0 and p_drive >= 0".into(),
        ));
    }
    let n_in = p_drive / (HBAR * omega_probe);
    let f2 = 0.5 * params.kappa_ext * n_in;
    let a2 = 0.25 * params.kappa().powi(2);
    let mut n = 0.0f64;
    for _ in 0..KERR_SHIFT_MAX_ITER {
        let omega_shifted = params.omega_c - params.kerr * n;
        let d = omega_probe - omega_shifted;
        let next = 0.5 * n + 0.5 * f2 / (d * d + a2);
        let change = (next - n).abs();
        n = next;
        if change <= 1e-12 * n.max(f64::MIN_POSITIVE) {
            return Ok((n, params.omega_c - params.kerr * n));
        }
    }
    Err(Error::NoContinuousSolution(KERR_SHIFT_MAX_ITER))
}
