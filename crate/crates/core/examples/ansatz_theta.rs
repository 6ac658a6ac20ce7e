//! Builds `W_λ` for a two-bubble tower and prints the interaction `Θ_j` on
//! each annulus.

use std::env;

use towerlab::tower::{assemble_ansatz, select_parameters, theta_sup, ProjectionMode};
use towerlab::DomainSpec;

fn main() -> towerlab::Result<()> {
    // optional argument: k
    let k: usize = env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2);
    let domain = DomainSpec::unit_disk();
    for lambda in [1e-2, 1e-3, 1e-4, 1e-5] {
        let p = select_parameters(k, lambda, 0.0)?;
        let w = assemble_ansatz(&p, &domain, ProjectionMode::Exact)?;
        print!("lambda {lambda:.0e}  W(R) = {:.1e}", w.boundary_defect());
        for j in 1..=k {
            let t = theta_sup(&w, j, 400)?;
            print!(
                "   j={j}: sup|Θ| {:.3e} ratio {:.3e}",
                t.sup_abs, t.sup_ratio
            );
        }
        println!();
    }
    Ok(())
}
