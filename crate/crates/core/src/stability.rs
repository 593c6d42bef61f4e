//! Fixed points of the four-dimensional mean-field flow, their linear
//! stability, the (Δ, n_in) region map and bifurcation location along flux
//! sweeps.

use nalgebra::Matrix4;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::rhs;
use crate::error::{Error, Result};
use crate::model::{DriveConfig, SystemParams};
use crate::ode::State;
use crate::steadystate::{photon_number_stable, Branch, PhotonCubic};

/// Region classes by fixed-point census.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Region {
    /// One unstable fixed point.
    I,
    /// One stable fixed point.
    II,
    /// One stable and two unstable fixed points.
    III,
    /// Two stable and one unstable fixed point.
    IV,
    /// Three unstable fixed points.
    AllUnstable,
}

impl Region {
    pub fn from_census(n_fixed_points: usize, n_stable: usize) -> Option<Region> {
        match (n_fixed_points, n_stable) {
            (1, 0) => Some(Region::I),
            (1, 1) => Some(Region::II),
            (3, 1) => Some(Region::III),
            (3, 2) => Some(Region::IV),
            (3, 0) => Some(Region::AllUnstable),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Region::I => "i",
            Region::II => "ii",
            Region::III => "iii",
            Region::IV => "iv",
            Region::AllUnstable => "unstable3",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPoint {
    pub alpha_r: f64,
    pub alpha_i: f64,
    pub beta_r: f64,
    pub beta_i: f64,
    pub n_c: f64,
    pub branch: Branch,
    pub eigenvalues: [Complex64; 4],
    pub stable: bool,
}

impl FixedPoint {
    pub fn state(&self) -> State {
        [self.alpha_r, self.alpha_i, self.beta_r, self.beta_i]
    }

    pub fn max_real_eigenvalue(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityCell {
    pub delta: f64,
    pub n_in: f64,
    /// `None` marks a boundary cell: some eigenvalue is marginal or the root
    /// census is degenerate.
    pub region: Option<Region>,
    pub fixed_points: Vec<FixedPoint>,
}

impl StabilityCell {
    pub fn n_stable(&self) -> usize {
        self.fixed_points.iter().filter(|f| f.stable).count()
    }

    pub fn on_boundary(&self) -> bool {
        self.region.is_none()
    }

    /// Lowest-photon-number stable fixed point, if any.
    pub fn lowest_stable(&self) -> Option<&FixedPoint> {
        self.fixed_points.iter().find(|f| f.stable)
    }
}

/// Eigenvalues with `|Re λ|` below this are treated as marginal.
///
/// The nominal margin is `1e-6 κ`; it is capped at `1e-3 Γ_m` so that the
/// undriven mechanical decay rate itself never counts as marginal.
pub fn marginal_tolerance(params: &SystemParams) -> f64 {
    (1e-6 * params.kappa()).min(1e-3 * params.gamma_m)
}

/// Analytic Jacobian of the quadrature equations.
pub fn jacobian(params: &SystemParams, drive: &DriveConfig, state: &State) -> Matrix4<f64> {
    let [ar, ai, br, _bi] = *state;
    let k = params.kerr;
    let g = params.g0;
    let h = 0.5 * params.kappa();
    let d = drive.delta;
    let gm = 0.5 * params.gamma_m;
    let om = params.omega_m;
    Matrix4::new(
        -h - 2.0 * k * ar * ai,
        -d - k * (ar * ar + 3.0 * ai * ai) + 2.0 * g * br,
        2.0 * g * ai,
        0.0,
        d + k * (3.0 * ar * ar + ai * ai) - 2.0 * g * br,
        -h + 2.0 * k * ar * ai,
        -2.0 * g * ar,
        0.0,
        0.0,
        0.0,
        -gm,
        om,
        -2.0 * g * ar,
        -2.0 * g * ai,
        -om,
        -gm,
    )
}

/// Equilibria of the flow, one per root of the photon cubic, ascending in
/// photon number.
pub fn find_fixed_points(params: &SystemParams, drive: &DriveConfig) -> Result<Vec<FixedPoint>> {
    let branches = photon_number_stable(params, drive);
    let cubic = PhotonCubic::new(params, drive);
    let om = params.omega_m;
    let gm = 0.5 * params.gamma_m;
    let a = 0.5 * params.kappa();
    let f = (0.5 * params.kappa_ext).sqrt() * drive.alpha_p();
    let scale = params.kappa().max(params.omega_m);

    let mut out = Vec::with_capacity(branches.len());
    for (&n, &label) in branches.roots.iter().zip(&branches.labels) {
        let beta_r = -params.g0 * n * om / (om * om + gm * gm);
        let beta_i = gm * beta_r / om;
        let d_eff = cubic.delta + cubic.kerr * n;
        let den = a * a + d_eff * d_eff;
        let alpha_r = -f * a / den;
        let alpha_i = -f * d_eff / den;
        let state = [alpha_r, alpha_i, beta_r, beta_i];

        let r = rhs(params, drive, &state);
        let r_norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        let s_norm = state.iter().map(|x| x * x).sum::<f64>().sqrt();
        // Merged fold roots carry the cube-root conditioning of the fold.
        let tol = if branches.merged { 1e-6 } else { 1e-9 } * scale * s_norm.max(1.0);
        if r_norm > tol {
            return Err(Error::FixedPointResidual {
                residual: r_norm,
                tolerance: tol,
            });
        }

        let eigenvalues = eigenvalues(&jacobian(params, drive, &state));
        let stable = eigenvalues.iter().all(|z| z.re < 0.0);
        out.push(FixedPoint {
            alpha_r,
            alpha_i,
            beta_r,
            beta_i,
            n_c: alpha_r * alpha_r + alpha_i * alpha_i,
            branch: label,
            eigenvalues,
            stable,
        });
    }
    Ok(out)
}

/// Eigenvalues of a real 4x4 matrix, sorted by real then imaginary part.
pub fn eigenvalues(m: &Matrix4<f64>) -> [Complex64; 4] {
    let ev = m.complex_eigenvalues();
    let mut out = [Complex64::new(0.0, 0.0); 4];
    for (o, z) in out.iter_mut().zip(ev.iter()) {
        *o = Complex64::new(z.re, z.im);
    }
    out.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    debug_assert!(
        conjugate_closed(&out),
        "eigenvalues of a real matrix: {out:?}"
    );
    out
}

/// True when the set is closed under complex conjugation.
pub fn conjugate_closed(ev: &[Complex64]) -> bool {
    let scale = ev.iter().map(|z| z.norm()).fold(1.0, f64::max);
    ev.iter().all(|z| {
        ev.iter()
            .any(|w| (w.re - z.re).abs() <= 1e-9 * scale && (w.im + z.im).abs() <= 1e-9 * scale)
    })
}

pub fn classify(params: &SystemParams, drive: &DriveConfig) -> Result<StabilityCell> {
    let fixed_points = find_fixed_points(params, drive)?;
    let tol = marginal_tolerance(params);
    let marginal = fixed_points
        .iter()
        .any(|f| f.eigenvalues.iter().any(|z| z.re.abs() < tol));
    let n_stable = fixed_points.iter().filter(|f| f.stable).count();
    let region = if marginal {
        None
    } else {
        Region::from_census(fixed_points.len(), n_stable)
    };
    Ok(StabilityCell {
        delta: drive.delta,
        n_in: drive.n_in,
        region,
        fixed_points,
    })
}

/// Region map; `cells[i_flux * deltas.len() + i_delta]`.
#[derive(Debug, Clone)]
pub struct StabilityMap {
    pub deltas: Vec<f64>,
    pub fluxes: Vec<f64>,
    pub cells: Vec<StabilityCell>,
}

impl StabilityMap {
    pub fn cell(&self, i_flux: usize, i_delta: usize) -> &StabilityCell {
        &self.cells[i_flux * self.deltas.len() + i_delta]
    }
}

pub fn stability_map(
    params: &SystemParams,
    deltas: &[f64],
    fluxes: &[f64],
) -> Result<StabilityMap> {
    if deltas.is_empty() || fluxes.is_empty() {
        return Err(Error::InvalidInput(
            "stability map needs non-empty grids".into(),
        ));
    }
    let nd = deltas.len();
    let cells = (0..nd * fluxes.len())
        .into_par_iter()
        .map(|idx| {
            let drive = DriveConfig::new(deltas[idx % nd], fluxes[idx / nd])?;
            classify(params, &drive)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StabilityMap {
        deltas: deltas.to_vec(),
        fluxes: fluxes.to_vec(),
        cells,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BifurcationKind {
    Hopf,
    SaddleNode,
    InverseSaddleNode,
}

impl BifurcationKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BifurcationKind::Hopf => "hopf",
            BifurcationKind::SaddleNode => "saddle_node",
            BifurcationKind::InverseSaddleNode => "inverse_saddle_node",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BifurcationEvent {
    pub kind: BifurcationKind,
    /// Bracket midpoint.
    pub n_in_at: f64,
    pub bracket: (f64, f64),
    /// For a Hopf event the branch that changes stability. For a fold the
    /// outer member of the colliding pair (its partner is the middle branch).
    pub branch: Branch,
    /// Which way the branch stability went with increasing flux (Hopf only).
    pub gains_stability: bool,
}

pub const BIFURCATION_REL_WIDTH: f64 = 1e-4;
pub const BIFURCATION_MAX_BISECT: usize = 60;
const SWEEP_SAMPLES: usize = 1600;

#[derive(Debug, Clone)]
struct Census {
    n_in: f64,
    /// (photon number, stable, max Re λ, |Im λ| of the leading pair)
    points: Vec<(f64, bool, f64, f64)>,
}

fn census(params: &SystemParams, delta: f64, n_in: f64) -> Result<Census> {
    let fps = find_fixed_points(params, &DriveConfig::new(delta, n_in)?)?;
    Ok(Census {
        n_in,
        points: fps
            .iter()
            .map(|f| {
                let lead = f.eigenvalues[3];
                (f.n_c, f.stable, lead.re, lead.im.abs())
            })
            .collect(),
    })
}

fn bracket_done(lo: f64, hi: f64) -> bool {
    (hi - lo) <= BIFURCATION_REL_WIDTH * hi.abs()
}

/// Locates folds and Hopf points met while the flux is raised from `flux_lo`
/// to `flux_hi` at fixed detuning. Events are ordered by flux.
pub fn bifurcation_sweep(
    params: &SystemParams,
    delta: f64,
    flux_lo: f64,
    flux_hi: f64,
) -> Result<Vec<BifurcationEvent>> {
    if !(flux_lo > 0.0) || !(flux_hi > flux_lo) {
        return Err(Error::InvalidInput(
            "bifurcation sweep needs 0 < flux_lo < flux_hi".into(),
        ));
    }
    let ratio = (flux_hi / flux_lo).ln();
    let samples: Vec<Census> = (0..=SWEEP_SAMPLES)
        .into_par_iter()
        .map(|i| {
            census(
                params,
                delta,
                flux_lo * (ratio * i as f64 / SWEEP_SAMPLES as f64).exp(),
            )
        })
        .collect::<Result<Vec<_>>>()?;

    let mut events = Vec::new();
    for w in samples.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let (na, nb) = (a.points.len(), b.points.len());
        if na != nb {
            events.push(locate_fold(params, delta, a.clone(), b.clone())?);
            continue;
        }
        for j in 0..na {
            if a.points[j].1 != b.points[j].1 {
                if let Some(e) = locate_hopf(params, delta, j, a.clone(), b.clone())? {
                    events.push(e);
                }
            }
        }
    }
    events.sort_by(|x, y| x.n_in_at.total_cmp(&y.n_in_at));
    Ok(events)
}

fn locate_fold(
    params: &SystemParams,
    delta: f64,
    mut lo: Census,
    mut hi: Census,
) -> Result<BifurcationEvent> {
    let count_lo = lo.points.len();
    for _ in 0..BIFURCATION_MAX_BISECT {
        if bracket_done(lo.n_in, hi.n_in) {
            break;
        }
        let mid = census(params, delta, (lo.n_in * hi.n_in).sqrt())?;
        if mid.points.len() == count_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (single, triple, kind) = if lo.points.len() < hi.points.len() {
        (&lo, &hi, BifurcationKind::InverseSaddleNode)
    } else {
        (&hi, &lo, BifurcationKind::SaddleNode)
    };
    // The survivor continues whichever outer branch is closest to it; the
    // other outer branch collides with the middle one.
    let survivor = single.points.first().map(|p| p.0).unwrap_or(0.0);
    let branch = if triple.points.len() >= 3 {
        let d_lower = (triple.points[0].0 - survivor).abs();
        let d_upper = (triple.points[triple.points.len() - 1].0 - survivor).abs();
        if d_lower <= d_upper {
            Branch::Upper
        } else {
            Branch::Lower
        }
    } else {
        Branch::Lower
    };
    Ok(BifurcationEvent {
        kind,
        n_in_at: 0.5 * (lo.n_in + hi.n_in),
        bracket: (lo.n_in.min(hi.n_in), lo.n_in.max(hi.n_in)),
        branch,
        gains_stability: false,
    })
}

fn locate_hopf(
    params: &SystemParams,
    delta: f64,
    j: usize,
    mut lo: Census,
    mut hi: Census,
) -> Result<Option<BifurcationEvent>> {
    let count = lo.points.len();
    let stable_lo = lo.points[j].1;
    for _ in 0..BIFURCATION_MAX_BISECT {
        if bracket_done(lo.n_in, hi.n_in) {
            break;
        }
        let mid = census(params, delta, (lo.n_in * hi.n_in).sqrt())?;
        if mid.points.len() != count {
            // A fold sits inside the bracket as well; report the two as
            // coincident and let the fold bracket be found separately.
            break;
        }
        if mid.points[j].1 == stable_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // A real eigenvalue crossing would be a fold, not a Hopf point.
    let crossing_im = lo.points[j].3.max(hi.points[j].3);
    if crossing_im <= 1e-9 * params.omega_m {
        return Ok(None);
    }
    let branch = match (count, j) {
        (3, 1) => Branch::Middle,
        (3, 2) => Branch::Upper,
        _ => Branch::Lower,
    };
    Ok(Some(BifurcationEvent {
        kind: BifurcationKind::Hopf,
        n_in_at: 0.5 * (lo.n_in + hi.n_in),
        bracket: (lo.n_in, hi.n_in),
        branch,
        gains_stability: !stable_lo,
    }))
}
