//! Command-line front end: parameter loading, grid construction and CSV/JSON
//! emission for each analysis.

use std::f64::consts::TAU;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::auxmodels::{benchmark_with, ThermalModel};
use crate::dynamics::{
    integrate_window, pulsed_protocol_with, seeded_origin, ProtocolConfig, SAMPLES_PER_PERIOD,
};
use crate::error::{Error, Result};
use crate::model::{
    derive, flux_to_power_dbm, power_dbm_to_flux, DriveConfig, ParamFile, SystemParams,
};
use crate::output;
use crate::response::spectrum;
use crate::stability::stability_map;

#[derive(Debug, Parser)]
#[command(
    name = "optomech",
    version,
    about = "Kerr-nonlinear cavity optomechanics simulator"
)]
pub struct Cli {
    /// Worker threads for grid sweeps (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parameter set and derived critical quantities.
    Params(ParamsArgs),
    /// Region classification over a (detuning, flux) grid.
    StabilityMap(MapArgs),
    /// Piecewise analytic transmission spectrum.
    Spectrum(SpectrumArgs),
    /// Pulsed time-domain measurement emulation.
    Protocol(ProtocolArgs),
    /// Single time-domain trace.
    Timetrace(TraceArgs),
    /// Instability threshold and cooling limit for every loaded set.
    Benchmark(BenchArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ParamSource {
    /// Bundled or file-provided set name.
    #[arg(long, default_value = "III")]
    pub set: String,
    /// JSON parameter file (one set, or a map of named sets).
    #[arg(long)]
    pub paramfile: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OutArg {
    /// Output file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FluxUnit {
    /// Multiples of the critical input flux.
    Crit,
    /// Photons per second.
    Photons,
    /// Power at the device in dBm, converted at the bare resonance.
    Dbm,
}

#[derive(Debug, Clone, Args)]
pub struct DeltaGrid {
    /// Lowest detuning in units of Ω_m.
    #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
    pub delta_min: f64,
    /// Highest detuning in units of Ω_m.
    #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
    pub delta_max: f64,
    #[arg(long, default_value_t = 201)]
    pub delta_steps: usize,
}

#[derive(Debug, Clone, Args)]
pub struct FluxGrid {
    #[arg(long, allow_hyphen_values = true)]
    pub flux_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub flux_max: Option<f64>,
    #[arg(long)]
    pub flux_steps: Option<usize>,
    /// Single flux value (shorthand for min = max, one step).
    #[arg(long, allow_hyphen_values = true)]
    pub flux: Option<f64>,
    /// Comma-separated list of flux values.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub flux_list: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value_t = FluxUnit::Crit)]
    pub flux_unit: FluxUnit,
}

#[derive(Debug, Args)]
pub struct ParamsArgs {
    #[command(flatten)]
    pub source: ParamSource,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct MapArgs {
    #[command(flatten)]
    pub source: ParamSource,
    #[command(flatten)]
    pub deltas: DeltaGrid,
    #[command(flatten)]
    pub fluxes: FluxGrid,
    /// Γ_m multiplier (see README, desk scaling).
    #[arg(long, default_value_t = 1.0)]
    pub desk_scale: f64,
    /// Also write region-change crossings to this file.
    #[arg(long)]
    pub boundaries: Option<PathBuf>,
    /// Overrides g0 (Hz), e.g. 0 for a bare Kerr resonator.
    #[arg(long)]
    pub g0_hz: Option<f64>,
    /// Overrides the intrinsic Kerr constant (Hz).
    #[arg(long)]
    pub kerr_hz: Option<f64>,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub source: ParamSource,
    #[command(flatten)]
    pub deltas: DeltaGrid,
    #[command(flatten)]
    pub fluxes: FluxGrid,
    #[arg(long, default_value_t = 1.0)]
    pub desk_scale: f64,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct ProtocolArgs {
    #[command(flatten)]
    pub source: ParamSource,
    #[command(flatten)]
    pub deltas: DeltaGrid,
    #[command(flatten)]
    pub fluxes: FluxGrid,
    /// Γ_m multiplier; drive and window times shrink by the same factor.
    #[arg(long, default_value_t = 1000.0)]
    pub desk_scale: f64,
    /// Laboratory timing with unscaled parameters (very long run).
    #[arg(long, conflicts_with = "desk_scale")]
    pub full_timing: bool,
    /// Drive duration override, s.
    #[arg(long)]
    pub t_drive: Option<f64>,
    /// Averaging window override, s.
    #[arg(long)]
    pub t_window: Option<f64>,
    /// Write the per-point protocol columns (b_rms, settled) instead of the
    /// spectrum schema shared with `spectrum`.
    #[arg(long)]
    pub raw: bool,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[command(flatten)]
    pub source: ParamSource,
    /// Detuning in units of Ω_m.
    #[arg(long, allow_hyphen_values = true)]
    pub delta: f64,
    #[command(flatten)]
    pub fluxes: FluxGrid,
    #[arg(long, default_value_t = 1000.0)]
    pub desk_scale: f64,
    /// Integration time, s (default: scaled drive duration).
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Sampling interval, s (default: Ω_m period / 64).
    #[arg(long)]
    pub dt_out: Option<f64>,
    /// Only samples from this time on are written, s.
    #[arg(long, default_value_t = 0.0)]
    pub record_from: f64,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Parameter file; all its sets are benchmarked (default: bundled sets).
    #[arg(long)]
    pub paramfile: Option<PathBuf>,
    /// Bath temperature, K.
    #[arg(long, default_value_t = 0.02)]
    pub temperature: f64,
    /// Use Bose-Einstein rather than Rayleigh-Jeans occupation.
    #[arg(long)]
    pub bose_einstein: bool,
    #[command(flatten)]
    pub out: OutArg,
}

/// Resolved inputs of one grid run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub set_name: String,
    pub params: SystemParams,
    pub deltas: Vec<f64>,
    pub fluxes: Vec<f64>,
    pub flux_unit: FluxUnit,
    pub desk_scale: f64,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    fn header(&self, extra: serde_json::Value) -> String {
        output::header_line(
            &self.params,
            json!({
                "set": self.set_name,
                "desk_scale": self.desk_scale,
                "flux_unit": format!("{:?}", self.flux_unit).to_lowercase(),
                "extra": extra,
            }),
        )
    }
}

pub fn load_params(source: &ParamSource) -> Result<SystemParams> {
    let file = match &source.paramfile {
        Some(p) => ParamFile::load(p)?,
        None => ParamFile::bundled(),
    };
    let sets = file.into_sets()?;
    if sets.len() == 1 && source.paramfile.is_some() {
        return Ok(*sets.values().next().unwrap());
    }
    sets.get(&source.set)
        .copied()
        .ok_or_else(|| Error::UnknownSet(source.set.clone()))
}

fn check_grid(lo: f64, hi: f64, steps: usize, what: &str) -> Result<()> {
    if !lo.is_finite() || !hi.is_finite() || steps == 0 || hi < lo || (steps > 1 && hi == lo) {
        return Err(Error::InvalidInput(format!(
            "{what} grid needs finite min < max and steps >= 1"
        )));
    }
    Ok(())
}

pub fn delta_grid(params: &SystemParams, g: &DeltaGrid) -> Result<Vec<f64>> {
    check_grid(g.delta_min, g.delta_max, g.delta_steps, "detuning")?;
    if g.delta_steps == 1 {
        return Ok(vec![g.delta_min * params.omega_m]);
    }
    Ok((0..g.delta_steps)
        .map(|i| {
            let x =
                g.delta_min + (g.delta_max - g.delta_min) * i as f64 / (g.delta_steps - 1) as f64;
            x * params.omega_m
        })
        .collect())
}

/// Flux values in photons/s. Ratio and photon grids are log-spaced, dBm grids
/// are linear in dBm.
pub fn flux_grid(params: &SystemParams, g: &FluxGrid) -> Result<Vec<f64>> {
    let raw: Vec<f64> = if let Some(list) = &g.flux_list {
        if g.flux.is_some() || g.flux_min.is_some() {
            return Err(Error::InvalidInput(
                "give one of --flux, --flux-list or --flux-min/max".into(),
            ));
        }
        list.clone()
    } else if let Some(f) = g.flux {
        if g.flux_min.is_some() || g.flux_max.is_some() {
            return Err(Error::InvalidInput(
                "give one of --flux, --flux-list or --flux-min/max".into(),
            ));
        }
        vec![f]
    } else {
        let (Some(lo), Some(hi)) = (g.flux_min, g.flux_max) else {
            return Err(Error::InvalidInput(
                "a flux (--flux, --flux-list or --flux-min/max) is required".into(),
            ));
        };
        let steps = g.flux_steps.unwrap_or(101);
        check_grid(lo, hi, steps, "flux")?;
        if steps == 1 {
            vec![lo]
        } else if g.flux_unit == FluxUnit::Dbm {
            (0..steps)
                .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
                .collect()
        } else {
            if lo <= 0.0 {
                return Err(Error::InvalidInput(
                    "log-spaced flux grid needs flux_min > 0".into(),
                ));
            }
            let r = (hi / lo).ln();
            (0..steps)
                .map(|i| lo * (r * i as f64 / (steps - 1) as f64).exp())
                .collect()
        }
    };
    let crit = || match derive(params) {
        Ok(d) => Ok(d.n_in_crit),
        Err(Error::NoBifurcation) => Err(Error::InvalidInput(
            "--flux-unit crit needs a parameter set with a bifurcation".into(),
        )),
        Err(e) => Err(e),
    };
    let out: Vec<f64> = match g.flux_unit {
        FluxUnit::Crit => {
            let c = crit()?;
            raw.iter().map(|x| x * c).collect()
        }
        FluxUnit::Photons => raw,
        FluxUnit::Dbm => raw
            .iter()
            .map(|&p| power_dbm_to_flux(p, params.omega_c))
            .collect(),
    };
    if out.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::InvalidInput(
            "flux values must be finite and >= 0".into(),
        ));
    }
    Ok(out)
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// `out.csv` becomes `out_2.csv` for the third of several outputs.
fn indexed_path(path: &Path, k: usize, count: usize) -> PathBuf {
    if count <= 1 {
        return path.to_path_buf();
    }
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let name = match path.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}_{k}.{ext}"),
        None => format!("{stem}_{k}"),
    };
    path.with_file_name(name)
}

fn scaled(params: SystemParams, desk_scale: f64) -> Result<SystemParams> {
    if desk_scale == 1.0 {
        Ok(params)
    } else {
        params.desk_scaled(desk_scale)
    }
}

pub fn cmd_params(args: &ParamsArgs) -> Result<()> {
    let p = load_params(&args.source)?;
    let report = match derive(&p) {
        Ok(d) => json!({
            "set": args.source.set,
            "params_hz": p.to_file_entry(),
            "kappa_hz": p.kappa() / TAU,
            "kerr_m_hz": d.kerr_m / TAU,
            "kerr_eff_hz": d.kerr_eff / TAU,
            "n_c_crit": d.n_c_crit,
            "delta_crit_hz": d.delta_crit / TAU,
            "delta_crit_over_omega_m": d.delta_crit / p.omega_m,
            "n_in_crit_photons_per_s": d.n_in_crit,
            "n_in_crit_dbm": flux_to_power_dbm(d.n_in_crit, p.omega_c),
        }),
        Err(Error::NoBifurcation) => json!({
            "set": args.source.set,
            "params_hz": p.to_file_entry(),
            "kappa_hz": p.kappa() / TAU,
            "bifurcation": "no bifurcation: effective Kerr constant is zero",
        }),
        Err(e) => return Err(e),
    };
    let mut w = open_out(args.out.out.as_deref())?;
    writeln!(w, "{}", serde_json::to_string_pretty(&report)?)?;
    w.flush()?;
    Ok(())
}

fn resolve(
    source: &ParamSource,
    deltas: &DeltaGrid,
    fluxes: &FluxGrid,
    desk_scale: f64,
    out: &OutArg,
) -> Result<RunConfig> {
    let base = load_params(source)?;
    let params = scaled(base, desk_scale)?;
    Ok(RunConfig {
        set_name: source.set.clone(),
        params,
        deltas: delta_grid(&params, deltas)?,
        fluxes: flux_grid(&params, fluxes)?,
        flux_unit: fluxes.flux_unit,
        desk_scale,
        out: out.out.clone(),
    })
}

pub fn cmd_stability_map(args: &MapArgs) -> Result<()> {
    let mut cfg = resolve(
        &args.source,
        &args.deltas,
        &args.fluxes,
        args.desk_scale,
        &args.out,
    )?;
    let mut p = cfg.params;
    if let Some(g) = args.g0_hz {
        p.g0 = TAU * g;
    }
    if let Some(k) = args.kerr_hz {
        p.kerr = TAU * k;
    }
    p.validate()?;
    // Grids in units of the critical flux refer to the unmodified set.
    let n_crit = derive(&cfg.params).map(|d| d.n_in_crit).unwrap_or(f64::NAN);
    cfg.params = p;
    let map = stability_map(&p, &cfg.deltas, &cfg.fluxes)?;
    let header = cfg.header(json!({"command": "stability-map", "n_in_crit_reference": n_crit}));
    let mut w = open_out(cfg.out.as_deref())?;
    output::write_stability_map(&mut w, &header, &map, &p, n_crit)?;
    if let Some(b) = &args.boundaries {
        let f = BufWriter::new(File::create(b)?);
        output::write_boundaries(f, &header, &map, &p, n_crit)?;
    }
    Ok(())
}

pub fn cmd_spectrum(args: &SpectrumArgs) -> Result<()> {
    let cfg = resolve(
        &args.source,
        &args.deltas,
        &args.fluxes,
        args.desk_scale,
        &args.out,
    )?;
    let count = cfg.fluxes.len();
    let mut stdout_used = false;
    for (k, &flux) in cfg.fluxes.iter().enumerate() {
        let points = spectrum(&cfg.params, flux, &cfg.deltas)?;
        let header = cfg.header(json!({"command": "spectrum", "n_in": flux}));
        let path = cfg.out.as_deref().map(|p| indexed_path(p, k, count));
        let mut w = open_out(path.as_deref())?;
        if path.is_none() && stdout_used {
            writeln!(w)?;
        }
        stdout_used = true;
        output::write_spectrum(&mut w, &header, &points, &cfg.params)?;
    }
    Ok(())
}

fn protocol_config(args: &ProtocolArgs) -> Result<(f64, ProtocolConfig)> {
    let (scale, mut pc) = if args.full_timing {
        (1.0, ProtocolConfig::laboratory())
    } else {
        if !(args.desk_scale >= 1.0) {
            return Err(Error::InvalidInput("--desk-scale must be >= 1".into()));
        }
        (args.desk_scale, ProtocolConfig::desk(args.desk_scale))
    };
    if let Some(t) = args.t_drive {
        pc.t_drive = t;
    }
    if let Some(t) = args.t_window {
        pc.t_window = t;
    }
    if !(pc.t_window > 0.0 && pc.t_window < pc.t_drive) {
        return Err(Error::InvalidInput("need 0 < t_window < t_drive".into()));
    }
    Ok((scale, pc))
}

pub fn cmd_protocol(args: &ProtocolArgs) -> Result<()> {
    let (scale, pc) = protocol_config(args)?;
    let cfg = resolve(&args.source, &args.deltas, &args.fluxes, scale, &args.out)?;
    let count = cfg.fluxes.len();
    let mut stdout_used = false;
    for (k, &flux) in cfg.fluxes.iter().enumerate() {
        let results = pulsed_protocol_with(&cfg.params, flux, &cfg.deltas, &pc)?;
        let header = cfg.header(json!({
            "command": "protocol", "n_in": flux, "t_drive_s": pc.t_drive, "t_window_s": pc.t_window,
        }));
        let path = cfg.out.as_deref().map(|p| indexed_path(p, k, count));
        let mut w = open_out(path.as_deref())?;
        if path.is_none() && stdout_used {
            writeln!(w)?;
        }
        stdout_used = true;
        if args.raw {
            output::write_protocol(&mut w, &header, &results)?;
        } else {
            output::write_protocol_as_spectrum(&mut w, &header, &results, &cfg.params)?;
        }
    }
    Ok(())
}

pub fn cmd_timetrace(args: &TraceArgs) -> Result<()> {
    let base = load_params(&args.source)?;
    let params = scaled(base, args.desk_scale)?;
    let fluxes = flux_grid(&params, &args.fluxes)?;
    if fluxes.len() != 1 {
        return Err(Error::InvalidInput(
            "timetrace takes exactly one flux value".into(),
        ));
    }
    let drive = DriveConfig::new(args.delta * params.omega_m, fluxes[0])?;
    let t_end = args
        .t_end
        .unwrap_or(ProtocolConfig::desk(args.desk_scale.max(1.0)).t_drive);
    let dt = args
        .dt_out
        .unwrap_or(TAU / params.omega_m / SAMPLES_PER_PERIOD as f64);
    let trace = integrate_window(
        &params,
        &drive,
        seeded_origin(crate::dynamics::MECHANICAL_SEED),
        t_end,
        dt,
        args.record_from,
        Default::default(),
    )?;
    let header = output::header_line(
        &params,
        json!({"command": "timetrace", "set": args.source.set, "desk_scale": args.desk_scale,
               "delta_over_omega_m": args.delta, "n_in": fluxes[0]}),
    );
    let mut w = open_out(args.out.out.as_deref())?;
    output::write_time_trace(&mut w, &header, &trace)
}

pub fn cmd_benchmark(args: &BenchArgs) -> Result<()> {
    let file = match &args.paramfile {
        Some(p) => ParamFile::load(p)?,
        None => ParamFile::bundled(),
    };
    if args.temperature < 0.0 || !args.temperature.is_finite() {
        return Err(Error::InvalidInput("temperature must be >= 0".into()));
    }
    let model = if args.bose_einstein {
        ThermalModel::BoseEinstein
    } else {
        ThermalModel::RayleighJeans
    };
    let sets: Vec<(String, SystemParams)> = file.into_sets()?.into_iter().collect();
    let rows: Vec<_> = sets
        .iter()
        .map(|(name, p)| (name.clone(), benchmark_with(p, args.temperature, model)))
        .collect();
    let header = output::header_sets(
        &sets,
        json!({"command": "benchmark", "temperature_k": args.temperature, "thermal_model": format!("{model:?}")}),
    );
    let mut w = open_out(args.out.out.as_deref())?;
    output::write_benchmark(&mut w, &header, &rows)
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Params(a) => cmd_params(a),
        Command::StabilityMap(a) => cmd_stability_map(a),
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Protocol(a) => cmd_protocol(a),
        Command::Timetrace(a) => cmd_timetrace(a),
        Command::Benchmark(a) => cmd_benchmark(a),
    }
}

/// Exit status for a finished run: 0 success, 2 configuration error,
/// 3 numerical failure.
pub fn exit_code(r: &Result<()>) -> i32 {
    match r {
        Ok(()) => 0,
        Err(e) if e.is_config() => 2,
        Err(_) => 3,
    }
}

pub fn run(cli: Cli) -> Result<()> {
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(Error::InvalidInput("--jobs must be >= 1".into()));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
        return pool.install(|| dispatch(&cli));
    }
    dispatch(&cli)
}

/// Parses `args`, runs the command and returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let r = run(cli);
    if let Err(e) = &r {
        eprintln!("error: {e}");
    }
    exit_code(&r)
}
