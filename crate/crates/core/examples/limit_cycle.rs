//! Self-consistent limit cycle on the blue side of set III.

use optomech::model::{derive, DriveConfig, SystemParams};
use optomech::response::{s21_stable, s21_unstable, solve_limit_cycle};

fn main() -> optomech::Result<()> {
    let p = SystemParams::bundled_set("III")?;
    let crit = derive(&p)?.n_in_crit;
    for x in [0.86, 0.9, 0.94, 0.98, 1.02] {
        let d = DriveConfig::new(x * p.omega_m, 0.5 * crit)?;
        let lc = solve_limit_cycle(&p, &d)?;
        println!(
            "x = {x:.2}  B = {:9.3e}  z1 = {:.4}  n_c = {:7.4}  |S21| = {:.5} (fixed point {:.5})",
            lc.amplitude_b,
            lc.z1,
            lc.n_c,
            s21_unstable(&p, &d, &lc).norm(),
            s21_stable(&p, &d, lc.n_c).norm(),
        );
    }
    Ok(())
}
