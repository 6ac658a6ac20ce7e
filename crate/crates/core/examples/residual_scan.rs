//! `L^p` norms of the ansatz error `R_λ` and the linearisation error `S_λ`
//! along a geometric sweep, with fitted and predicted exponents.

use towerlab::residual::{error_exponent, geometric_sweep, residual_norms, scaling_fit};
use towerlab::tower::{assemble_ansatz, select_parameters, ProjectionMode};
use towerlab::DomainSpec;

fn main() -> towerlab::Result<()> {
    let lambdas = geometric_sweep(1e-2, 1e-6, 5)?;
    for k in [1, 2] {
        for p in [1.0, 1.1] {
            let mut r = Vec::new();
            let mut s = Vec::new();
            for &lambda in &lambdas {
                let params = select_parameters(k, lambda, 0.0)?;
                let w = assemble_ansatz(&params, &DomainSpec::unit_disk(), ProjectionMode::Exact)?;
                let (rn, sn) = residual_norms(&w, p)?;
                r.push(rn.total_norm);
                s.push(sn.total_norm);
            }
            let predicted = error_exponent(k, p);
            let fr = scaling_fit(&lambdas, &r, predicted)?;
            let fs = scaling_fit(&lambdas, &s, predicted)?;
            println!(
                "k={k} p={p}: R slope {:.3}, S slope {:.3}, predicted {predicted:.3}",
                fr.exponent_fitted, fs.exponent_fitted
            );
        }
    }
    Ok(())
}
