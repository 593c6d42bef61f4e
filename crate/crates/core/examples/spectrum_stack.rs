//! Transmission magnitude of set III below and above the instability.

use optomech::model::{derive, SystemParams};
use optomech::response::spectrum;

fn main() -> optomech::Result<()> {
    let p = SystemParams::bundled_set("III")?;
    let crit = derive(&p)?.n_in_crit;
    let deltas: Vec<f64> = (0..41)
        .map(|i| (-2.0 + 0.1 * i as f64) * p.omega_m)
        .collect();
    let low = spectrum(&p, 0.008 * crit, &deltas)?;
    let high = spectrum(&p, 1.10 * crit, &deltas)?;
    println!("delta/Om   |S21| 0.008   |S21| 1.10   regime");
    for (a, b) in low.iter().zip(&high) {
        println!(
            "{:+7.2}   {:10.5}   {:10.5}   {}",
            a.delta / p.omega_m,
            a.s21.norm(),
            b.s21.norm(),
            b.regime.as_str()
        );
    }
    Ok(())
}
