//! Time-domain transmission with desk-scaled timing, compared with the
//! frequency-domain spectrum.

use optomech::dynamics::{pulsed_protocol_with, ProtocolConfig};
use optomech::model::{derive, SystemParams};
use optomech::response::spectrum;

const DESK: f64 = 1000.0;

fn main() -> optomech::Result<()> {
    let p = SystemParams::bundled_set("III")?.desk_scaled(DESK)?;
    let crit = derive(&p)?.n_in_crit;
    let deltas: Vec<f64> = (0..17)
        .map(|i| (-2.0 + 0.25 * i as f64) * p.omega_m)
        .collect();
    let td = pulsed_protocol_with(&p, 1.1 * crit, &deltas, &ProtocolConfig::desk(DESK))?;
    let fd = spectrum(&p, 1.1 * crit, &deltas)?;
    for (t, f) in td.iter().zip(&fd) {
        println!(
            "{:+6.2}  ode {:.5}  formula {:.5}  b_rms {:9.3e}  settled {}",
            t.delta / p.omega_m,
            t.s21_mean.norm(),
            f.s21.norm(),
            t.window_b_amplitude,
            t.settled
        );
    }
    Ok(())
}
