//! Harmonic content of a simulated limit cycle at the pulled mechanical
//! frequency, next to the Bessel sideband prediction.

use std::f64::consts::TAU;

use optomech::dynamics::{
    harmonic_content, integrate_window, mechanical_frequency, seeded_origin, SAMPLES_PER_PERIOD,
};
use optomech::model::{derive, DriveConfig, SystemParams};
use optomech::ode::Tolerances;
use optomech::response::{cavity_harmonics, solve_limit_cycle};

fn main() -> optomech::Result<()> {
    let p = SystemParams::bundled_set("III")?.desk_scaled(1000.0)?;
    let d = DriveConfig::new(p.omega_m, 0.5 * derive(&p)?.n_in_crit)?;
    let period = TAU / p.omega_m;
    let dt = period / SAMPLES_PER_PERIOD as f64;
    let t_end = (1.4e-3 / dt).round() * dt;
    let tr = integrate_window(
        &p,
        &d,
        seeded_origin(1e-6),
        t_end,
        dt,
        t_end - 200.0 * period,
        Tolerances::default(),
    )?;
    let om = mechanical_frequency(&tr)?;
    let h = harmonic_content(&tr, om)?;
    let lc = solve_limit_cycle(&p, &d)?;
    let comb = cavity_harmonics(&p, &d, &lc, 5);
    let total: f64 = comb.iter().map(|c| c.norm_sqr()).sum();
    println!(
        "oscillation at {:.6} Om, mechanical share {:.5}",
        om / p.omega_m,
        h.mechanical_fundamental_share()
    );
    for m in -3i64..=3 {
        println!(
            "m = {m:+}  simulated {:.4}  predicted {:.4}",
            h.cavity_at(m),
            comb[(m + 5) as usize].norm_sqr() / total
        );
    }
    Ok(())
}
