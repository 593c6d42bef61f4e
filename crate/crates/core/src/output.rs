//! CSV emission with a fixed column order and fixed 12-significant-digit
//! float formatting. Every file opens with a `#` line carrying the crate
//! version and the resolved parameter set.

use std::f64::consts::TAU;
use std::io::Write;

use serde_json::json;

use crate::auxmodels::BenchmarkPoint;
use crate::dynamics::{ProtocolResult, TimeTrace};
use crate::error::Result;
use crate::model::SystemParams;
use crate::response::SpectrumPoint;
use crate::stability::{Region, StabilityMap};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn fmt_f(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn region_str(r: Option<Region>) -> &'static str {
    r.map(|r| r.as_str()).unwrap_or("boundary")
}

/// Provenance line: version, resolved parameters in Hz and any extra context.
pub fn header_line(params: &SystemParams, extra: serde_json::Value) -> String {
    let v = json!({
        "version": VERSION,
        "params_hz": params.to_file_entry(),
        "context": extra,
    });
    format!("# optomech {VERSION} {v}")
}

/// Provenance line for outputs that span several parameter sets.
pub fn header_sets(sets: &[(String, SystemParams)], extra: serde_json::Value) -> String {
    let m: serde_json::Map<String, serde_json::Value> = sets
        .iter()
        .map(|(n, p)| (n.clone(), json!(p.to_file_entry())))
        .collect();
    let v = json!({"version": VERSION, "sets_hz": m, "context": extra});
    format!("# optomech {VERSION} {v}")
}

fn writer<W: Write>(mut w: W, header: &str) -> Result<csv::Writer<W>> {
    writeln!(w, "{header}")?;
    Ok(csv::WriterBuilder::new().from_writer(w))
}

fn finish<W: Write>(w: csv::Writer<W>) -> Result<()> {
    w.into_inner().map_err(|e| e.into_error())?.flush()?;
    Ok(())
}

pub fn write_stability_map<W: Write>(
    w: W,
    header: &str,
    map: &StabilityMap,
    params: &SystemParams,
    n_in_crit: f64,
) -> Result<()> {
    let mut c = writer(w, header)?;
    c.write_record([
        "delta_over_omega_m",
        "n_in_over_crit",
        "region",
        "n_fixed_points",
        "n_stable",
    ])
    .map_err(csv_err)?;
    for cell in &map.cells {
        c.write_record([
            fmt_f(cell.delta / params.omega_m),
            fmt_f(cell.n_in / n_in_crit),
            region_str(cell.region).to_string(),
            cell.fixed_points.len().to_string(),
            cell.n_stable().to_string(),
        ])
        .map_err(csv_err)?;
    }
    finish(c)
}

/// Region changes between neighbouring cells along each detuning row and
/// each flux column, one row per crossing.
pub fn write_boundaries<W: Write>(
    w: W,
    header: &str,
    map: &StabilityMap,
    params: &SystemParams,
    n_in_crit: f64,
) -> Result<()> {
    let mut c = writer(w, header)?;
    c.write_record([
        "delta_over_omega_m",
        "n_in_over_crit",
        "from",
        "to",
        "direction",
    ])
    .map_err(csv_err)?;
    let nd = map.deltas.len();
    let nf = map.fluxes.len();
    for i in 0..nf {
        for j in 0..nd {
            let here = map.cell(i, j).region;
            if j + 1 < nd {
                let next = map.cell(i, j + 1).region;
                if next != here {
                    c.write_record([
                        fmt_f(0.5 * (map.deltas[j] + map.deltas[j + 1]) / params.omega_m),
                        fmt_f(map.fluxes[i] / n_in_crit),
                        region_str(here).into(),
                        region_str(next).into(),
                        "delta".into(),
                    ])
                    .map_err(csv_err)?;
                }
            }
            if i + 1 < nf {
                let next = map.cell(i + 1, j).region;
                if next != here {
                    c.write_record([
                        fmt_f(map.deltas[j] / params.omega_m),
                        fmt_f((map.fluxes[i] * map.fluxes[i + 1]).sqrt() / n_in_crit),
                        region_str(here).into(),
                        region_str(next).into(),
                        "flux".into(),
                    ])
                    .map_err(csv_err)?;
                }
            }
        }
    }
    finish(c)
}

const SPECTRUM_COLUMNS: [&str; 8] = [
    "delta_hz",
    "delta_over_omega_m",
    "re_s21",
    "im_s21",
    "abs_s21",
    "regime",
    "region",
    "flagged",
];

pub fn write_spectrum<W: Write>(
    w: W,
    header: &str,
    points: &[SpectrumPoint],
    params: &SystemParams,
) -> Result<()> {
    let mut c = writer(w, header)?;
    c.write_record(SPECTRUM_COLUMNS).map_err(csv_err)?;
    for p in points {
        c.write_record([
            fmt_f(p.delta / TAU),
            fmt_f(p.delta / params.omega_m),
            fmt_f(p.s21.re),
            fmt_f(p.s21.im),
            fmt_f(p.s21.norm()),
            p.regime.as_str().into(),
            region_str(p.region).into(),
            p.flagged.to_string(),
        ])
        .map_err(csv_err)?;
    }
    finish(c)
}

/// Protocol results in the spectrum schema, so analytic and numeric spectra
/// can be compared column by column. Unsettled points are flagged.
pub fn write_protocol_as_spectrum<W: Write>(
    w: W,
    header: &str,
    results: &[ProtocolResult],
    params: &SystemParams,
) -> Result<()> {
    let mut c = writer(w, header)?;
    c.write_record(SPECTRUM_COLUMNS).map_err(csv_err)?;
    for r in results {
        c.write_record([
            fmt_f(r.delta / TAU),
            fmt_f(r.delta / params.omega_m),
            fmt_f(r.s21_mean.re),
            fmt_f(r.s21_mean.im),
            fmt_f(r.s21_mean.norm()),
            "time_domain".into(),
            "".into(),
            (!r.settled).to_string(),
        ])
        .map_err(csv_err)?;
    }
    finish(c)
}

pub fn write_protocol<W: Write>(w: W, header: &str, results: &[ProtocolResult]) -> Result<()> {
    let mut c = writer(w, header)?;
    c.write_record([
        "delta_hz", "re_s21", "im_s21", "abs_s21", "b_rms", "settled",
    ])
    .map_err(csv_err)?;
    for r in results {
        c.write_record([
            fmt_f(r.delta / TAU),
            fmt_f(r.s21_mean.re),
            fmt_f(r.s21_mean.im),
            fmt_f(r.s21_mean.norm()),
            fmt_f(r.window_b_amplitude),
            r.settled.to_string(),
        ])
        .map_err(csv_err)?;
    }
    finish(c)
}

pub fn write_time_trace<W: Write>(w: W, header: &str, trace: &TimeTrace) -> Result<()> {
    let mut c = writer(w, header)?;
    c.write_record([
        "t_s", "alpha_r", "alpha_i", "beta_r", "beta_i", "re_s21", "im_s21",
    ])
    .map_err(csv_err)?;
    for (k, (t, y)) in trace.times.iter().zip(&trace.states).enumerate() {
        let (re, im) = trace
            .s21
            .get(k)
            .map(|z| (z.re, z.im))
            .unwrap_or((f64::NAN, f64::NAN));
        c.write_record([
            fmt_f(*t),
            fmt_f(y[0]),
            fmt_f(y[1]),
            fmt_f(y[2]),
            fmt_f(y[3]),
            fmt_f(re),
            fmt_f(im),
        ])
        .map_err(csv_err)?;
    }
    finish(c)
}

pub fn write_benchmark<W: Write>(
    w: W,
    header: &str,
    rows: &[(String, BenchmarkPoint)],
) -> Result<()> {
    let mut c = writer(w, header)?;
    c.write_record(["set_name", "n_c_instab", "n_m_min", "c0", "n_th"])
        .map_err(csv_err)?;
    for (name, b) in rows {
        c.write_record([
            name.clone(),
            fmt_f(b.n_c_instab),
            fmt_f(b.n_m_min),
            fmt_f(b.c0),
            fmt_f(b.n_th),
        ])
        .map_err(csv_err)?;
    }
    finish(c)
}

fn csv_err(e: csv::Error) -> crate::error::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io.into(),
        other => std::io::Error::other(format!("{other:?}")).into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_f(1.0), "1.00000000000e0");
        assert_eq!(fmt_f(-0.000123456789012345), "-1.23456789012e-4");
        assert_eq!(fmt_f(f64::INFINITY), "inf");
    }

    #[test]
    fn header_embeds_params() {
        let p = SystemParams::bundled_set("III").unwrap();
        let h = header_line(&p, json!({"set": "III"}));
        assert!(h.starts_with("# optomech "));
        let v: serde_json::Value = serde_json::from_str(&h[h.find('{').unwrap()..]).unwrap();
        let g0 = v["params_hz"]["g0_hz"].as_f64().unwrap();
        assert!((g0 - 4.69e3).abs() < 1e-6);
    }

    #[test]
    fn benchmark_table_layout() {
        let p = SystemParams::bundled_set("IV").unwrap();
        let b = crate::auxmodels::benchmark(&p, 0.02);
        let mut buf = Vec::new();
        write_benchmark(&mut buf, "# h", &[("IV".into(), b)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# h");
        assert_eq!(lines[1], "set_name,n_c_instab,n_m_min,c0,n_th");
        assert!(lines[2].starts_with("IV,"));
    }
}
