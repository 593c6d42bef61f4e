//! Derived critical quantities of the bundled parameter sets.

use optomech::model::{derive, flux_to_power_dbm, SystemParams};

fn main() -> optomech::Result<()> {
    for name in ["I", "II", "III", "IV"] {
        let p = SystemParams::bundled_set(name)?;
        let d = derive(&p)?;
        println!(
            "{name:>3}  K_eff/2pi = {:>9.3} Hz  delta_crit/Om = {:+.3}  n_c_crit = {:>7.3}  P_crit = {:.2} dBm",
            d.kerr_eff / std::f64::consts::TAU,
            d.delta_crit / p.omega_m,
            d.n_c_crit,
            flux_to_power_dbm(d.n_in_crit, p.omega_c),
        );
    }
    Ok(())
}
