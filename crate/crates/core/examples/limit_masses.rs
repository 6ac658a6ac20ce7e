//! Masses, kernel integrals and the stereographic norm ratio of the
//! singular Liouville bubbles for the first few tower weights.

use std::f64::consts::PI;

use towerlab::limit_profiles::{kernel_integrals, limit_mass};
use towerlab::tower::alpha_of;

fn main() -> towerlab::Result<()> {
    println!(
        "{:>4} {:>18} {:>18} {:>14}",
        "alpha", "mass", "4 pi alpha", "int Z0 e^w"
    );
    for i in 1..=5 {
        let alpha = alpha_of(i);
        let mass = limit_mass(alpha)?;
        let (_, z0, _) = kernel_integrals(alpha)?;
        println!(
            "{alpha:>5} {mass:>18.12} {:>18.12} {z0:>14.6e}",
            4.0 * PI * alpha
        );
    }
    Ok(())
}
