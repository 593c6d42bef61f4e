//! Device parameters, unit conventions and the closed-form quantities derived
//! from them.
//!
//! Every frequency and rate is stored as an angular value in rad/s. Parameter
//! files quote ordinary frequencies in Hz and are converted on load. The
//! mechanical amplitude is the dimensionless quadrature amplitude (the
//! zero-point length is folded into `g0`).

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;

const BUNDLED_SETS: &str = include_str!("../data/paramsets.json");

/// Full parameter set of the Kerr-nonlinear optomechanical device.
///
/// `kerr` is the magnitude of the (softening) Kerr constant: the resonance
/// moves to lower frequency with photon number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub omega_c: f64,
    pub kappa_int: f64,
    pub kappa_ext: f64,
    pub kerr: f64,
    pub omega_m: f64,
    pub gamma_m: f64,
    pub g0: f64,
}

impl SystemParams {
    /// Builds a parameter set from ordinary frequencies in Hz.
    pub fn from_hz(
        omega_c: f64,
        kappa_int: f64,
        kappa_ext: f64,
        kerr: f64,
        omega_m: f64,
        gamma_m: f64,
        g0: f64,
    ) -> Result<Self> {
        let p = SystemParams {
            omega_c: TAU * omega_c,
            kappa_int: TAU * kappa_int,
            kappa_ext: TAU * kappa_ext,
            kerr: TAU * kerr,
            omega_m: TAU * omega_m,
            gamma_m: TAU * gamma_m,
            g0: TAU * g0,
        };
        p.validate()?;
        Ok(p)
    }

    /// One of the bundled working points `"I"` .. `"IV"`.
    pub fn bundled_set(name: &str) -> Result<Self> {
        let sets = ParamFile::bundled().into_sets()?;
        sets.get(name)
            .copied()
            .ok_or_else(|| Error::UnknownSet(name.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("omega_c", self.omega_c),
            ("kappa_int", self.kappa_int),
            ("kappa_ext", self.kappa_ext),
            ("kerr", self.kerr),
            ("omega_m", self.omega_m),
            ("gamma_m", self.gamma_m),
            ("g0", self.g0),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} is not finite")));
            }
        }
        for (name, v) in [
            ("omega_c", self.omega_c),
            ("kappa_ext", self.kappa_ext),
            ("omega_m", self.omega_m),
            ("gamma_m", self.gamma_m),
        ] {
            if v <= 0.0 {
                return Err(Error::InvalidParams(format!("{name} must be positive")));
            }
        }
        // kappa_int = 0 is the lossless (overcoupled) limit and stays allowed.
        for (name, v) in [
            ("kappa_int", self.kappa_int),
            ("kerr", self.kerr),
            ("g0", self.g0),
        ] {
            if v < 0.0 {
                return Err(Error::InvalidParams(format!("{name} must be non-negative")));
            }
        }
        if self.omega_m <= self.gamma_m {
            return Err(Error::InvalidParams(
                "mechanics must be underdamped (omega_m > gamma_m)".into(),
            ));
        }
        Ok(())
    }

    /// Total cavity linewidth.
    pub fn kappa(&self) -> f64 {
        self.kappa_int + self.kappa_ext
    }

    /// Kerr constant induced by the static radiation-pressure displacement.
    pub fn kerr_m(&self) -> f64 {
        2.0 * self.g0 * self.g0 * self.omega_m
            / (self.omega_m * self.omega_m + 0.25 * self.gamma_m * self.gamma_m)
    }

    pub fn kerr_eff(&self) -> f64 {
        self.kerr + self.kerr_m()
    }

    /// Multiplies every rate and frequency by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        SystemParams {
            omega_c: self.omega_c * s,
            kappa_int: self.kappa_int * s,
            kappa_ext: self.kappa_ext * s,
            kerr: self.kerr * s,
            omega_m: self.omega_m * s,
            gamma_m: self.gamma_m * s,
            g0: self.g0 * s,
        }
    }

    /// Desk-scale variant for time-domain runs.
    ///
    /// `gamma_m` is multiplied by `factor` and `g0` by `sqrt(factor)` so that
    /// the single-photon cooperativity is unchanged. The intrinsic Kerr constant
    /// is lowered by the resulting growth of the mechanical Kerr so that
    /// `kerr_eff`, and with it every critical quantity, stays fixed.
    pub fn desk_scaled(&self, factor: f64) -> Result<Self> {
        if !(factor >= 1.0 && factor.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "desk-scale factor must be >= 1, got {factor}"
            )));
        }
        let kerr_eff = self.kerr_eff();
        let mut p = *self;
        p.gamma_m *= factor;
        p.g0 *= factor.sqrt();
        let kerr = kerr_eff - p.kerr_m();
        if kerr < 0.0 {
            return Err(Error::InvalidParams(format!(
                "desk scale {factor} makes the mechanical Kerr exceed the effective Kerr"
            )));
        }
        p.kerr = kerr;
        p.validate()?;
        Ok(p)
    }

    /// Parameter set expressed in Hz, as written to parameter files.
    pub fn to_file_entry(&self) -> ParamFileEntry {
        ParamFileEntry {
            omega_c_hz: self.omega_c / TAU,
            kappa_int_hz: self.kappa_int / TAU,
            kappa_ext_hz: self.kappa_ext / TAU,
            kerr_hz: self.kerr / TAU,
            omega_m_hz: self.omega_m / TAU,
            gamma_m_hz: self.gamma_m / TAU,
            g0_hz: self.g0 / TAU,
        }
    }
}

/// One drive condition: bare detuning `omega_p - omega_c` and input flux.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveConfig {
    pub delta: f64,
    pub n_in: f64,
}

impl DriveConfig {
    pub fn new(delta: f64, n_in: f64) -> Result<Self> {
        if !(n_in >= 0.0) || !n_in.is_finite() || !delta.is_finite() {
            return Err(Error::InvalidInput(format!(
                "drive needs finite delta and n_in >= 0 (got delta={delta}, n_in={n_in})"
            )));
        }
        Ok(DriveConfig { delta, n_in })
    }

    /// Drive specified by power at the device in dBm.
    pub fn from_dbm(params: &SystemParams, delta: f64, p_dbm: f64) -> Result<Self> {
        let omega_p = params.omega_c + delta;
        Self::new(delta, power_dbm_to_flux(p_dbm, omega_p))
    }

    pub fn omega_p(&self, params: &SystemParams) -> f64 {
        params.omega_c + self.delta
    }

    /// Drive power in W.
    pub fn power_w(&self, params: &SystemParams) -> f64 {
        self.n_in * HBAR * self.omega_p(params)
    }

    pub fn power_dbm(&self, params: &SystemParams) -> f64 {
        flux_to_power_dbm(self.n_in, self.omega_p(params))
    }

    /// Drive amplitude `alpha_p = sqrt(n_in)`.
    pub fn alpha_p(&self) -> f64 {
        self.n_in.sqrt()
    }
}

/// Closed-form quantities that follow from a parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedQuantities {
    pub kerr_m: f64,
    pub kerr_eff: f64,
    /// Intracavity photon number at the bifurcation onset.
    pub n_c_crit: f64,
    /// Detuning at the bifurcation onset.
    pub delta_crit: f64,
    /// Input flux at the bifurcation onset, photons/s.
    pub n_in_crit: f64,
}

pub fn derive(params: &SystemParams) -> Result<DerivedQuantities> {
    let kappa = params.kappa();
    let kerr_m = params.kerr_m();
    let kerr_eff = params.kerr + kerr_m;
    if kerr_eff <= 0.0 {
        return Err(Error::NoBifurcation);
    }
    let sqrt3 = 3f64.sqrt();
    Ok(DerivedQuantities {
        kerr_m,
        kerr_eff,
        n_c_crit: kappa / (sqrt3 * kerr_eff),
        delta_crit: -sqrt3 * kappa / 2.0,
        n_in_crit: 2.0 * kappa.powi(3) / (3.0 * sqrt3 * params.kappa_ext * kerr_eff),
    })
}

/// Photon flux carried by a tone of power `p_dbm` at angular frequency `omega_p`.
pub fn power_dbm_to_flux(p_dbm: f64, omega_p: f64) -> f64 {
    10f64.powf((p_dbm - 30.0) / 10.0) / (HBAR * omega_p)
}

pub fn flux_to_power_dbm(n_in: f64, omega_p: f64) -> f64 {
    10.0 * (n_in * HBAR * omega_p).log10() + 30.0
}

/// Converts an ordinary frequency to angular frequency.
pub fn hz(f: f64) -> f64 {
    2.0 * PI * f
}

/// Parameter-file entry, plain frequencies in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamFileEntry {
    pub omega_c_hz: f64,
    pub kappa_int_hz: f64,
    pub kappa_ext_hz: f64,
    pub kerr_hz: f64,
    pub omega_m_hz: f64,
    pub gamma_m_hz: f64,
    pub g0_hz: f64,
}

impl ParamFileEntry {
    pub fn to_params(&self) -> Result<SystemParams> {
        SystemParams::from_hz(
            self.omega_c_hz,
            self.kappa_int_hz,
            self.kappa_ext_hz,
            self.kerr_hz,
            self.omega_m_hz,
            self.gamma_m_hz,
            self.g0_hz,
        )
    }
}

/// Contents of a parameter file: either one set or a map of named sets.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamFile {
    Single(ParamFileEntry),
    Named(BTreeMap<String, ParamFileEntry>),
}

impl ParamFile {
    pub fn bundled() -> Self {
        serde_json::from_str(BUNDLED_SETS).expect("bundled parameter sets are valid JSON")
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn into_sets(self) -> Result<BTreeMap<String, SystemParams>> {
        match self {
            ParamFile::Single(e) => Ok(BTreeMap::from([("custom".to_string(), e.to_params()?)])),
            ParamFile::Named(m) => m
                .into_iter()
                .map(|(k, e)| Ok((k, e.to_params()?)))
                .collect(),
        }
    }
}
