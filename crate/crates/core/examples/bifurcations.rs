//! Folds and Hopf points met while raising the drive at red detuning.

use optomech::model::{derive, SystemParams};
use optomech::stability::bifurcation_sweep;

fn main() -> optomech::Result<()> {
    let p = SystemParams::bundled_set("III")?;
    let crit = derive(&p)?.n_in_crit;
    for x in [-0.2, -0.7, -1.2] {
        let ev = bifurcation_sweep(&p, x * p.omega_m, 0.1 * crit, 10.0 * crit)?;
        println!("delta = {x:+.1} Om");
        for e in ev {
            println!(
                "  {:<4} at {:.4} crit on {} branch",
                e.kind.as_str(),
                e.n_in_at / crit,
                e.branch.as_str()
            );
        }
    }
    Ok(())
}
