//! Coarse region map of set III printed as a character grid.

use optomech::model::{derive, SystemParams};
use optomech::stability::stability_map;

fn main() -> optomech::Result<()> {
    let p = SystemParams::bundled_set("III")?;
    let crit = derive(&p)?.n_in_crit;
    let deltas: Vec<f64> = (0..61)
        .map(|i| (-2.0 + i as f64 / 15.0) * p.omega_m)
        .collect();
    let fluxes: Vec<f64> = (0..21)
        .map(|i| crit * 10f64.powf(-2.0 + i as f64 * 0.15))
        .collect();
    let map = stability_map(&p, &deltas, &fluxes)?;
    for i in (0..fluxes.len()).rev() {
        let row: String = (0..deltas.len())
            .map(|j| match map.cell(i, j).region.map(|r| r.as_str()) {
                Some("i") => '1',
                Some("ii") => '.',
                Some("iii") => '3',
                Some("iv") => '4',
                _ => '?',
            })
            .collect();
        println!("{:>8.3}  {row}", fluxes[i] / crit);
    }
    println!("          delta/Om from -2 to +2");
    Ok(())
}
