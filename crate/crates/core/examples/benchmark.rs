//! Quantum-regime benchmark of the parameter sets at 20 mK.

use optomech::auxmodels::benchmark;
use optomech::model::SystemParams;

fn main() -> optomech::Result<()> {
    for name in ["I", "II", "III", "IV"] {
        let b = benchmark(&SystemParams::bundled_set(name)?, 0.02);
        println!(
            "{name:>3}  n_c_instab {:9.4}  n_m_min {:7.4}  C0 {:9.3e}  quantum {}",
            b.n_c_instab,
            b.n_m_min,
            b.c0,
            b.in_quantum_regime()
        );
    }
    Ok(())
}
