//! Desk scaling shortens the mechanical ring-up while keeping the critical
//! drive and the cooperativity.

use optomech::auxmodels::benchmark;
use optomech::model::{derive, SystemParams};

fn main() -> optomech::Result<()> {
    let p = SystemParams::bundled_set("III")?;
    for s in [1.0, 10.0, 100.0, 1000.0] {
        let q = p.desk_scaled(s)?;
        let d = derive(&q)?;
        println!(
            "factor {s:>6}  Gm/2pi {:9.3e} Hz  g0/2pi {:9.3e} Hz  C0 {:.4}  n_in_crit {:11.5e}  n_c_crit {:.4}",
            q.gamma_m / std::f64::consts::TAU,
            q.g0 / std::f64::consts::TAU,
            benchmark(&q, 0.02).c0,
            d.n_in_crit,
            d.n_c_crit
        );
    }
    Ok(())
}
