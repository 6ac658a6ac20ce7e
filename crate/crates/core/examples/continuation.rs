//! Newton continuation down a `λ` sweep, then the fixed-point iteration at
//! the last point for comparison.

use std::sync::Arc;

use towerlab::greens::GreenData;
use towerlab::residual::geometric_sweep;
use towerlab::solver::{continuation, contraction_iterate};
use towerlab::tower::{assemble_on_mesh, select_parameters, ProjectionMode};
use towerlab::{DomainSpec, RadialMesh};

fn main() -> towerlab::Result<()> {
    let domain = DomainSpec::unit_disk();
    let lambdas = geometric_sweep(1e-2, 1e-6, 9)?;
    let path = continuation(1, &lambdas, &domain, 64.0, 1e-12)?;
    println!("lambda      |grad phi|   phi/(sqrt(l)|ln l|)  m+          m-          steps");
    for r in &path {
        let scaled = r.phi_norm / (r.lambda.sqrt() * r.lambda.ln().abs());
        println!(
            "{:<11.3e} {:<12.4e} {:<20.4} {:<11.6} {:<11.6} {}",
            r.lambda,
            r.phi_norm,
            scaled,
            r.m_plus,
            r.m_minus,
            r.newton_steps.len()
        );
    }

    let last = path.last().expect("nonempty sweep");
    let green = Arc::new(GreenData::new(&domain)?);
    let params = select_parameters(1, last.lambda, green.h00)?;
    let mesh = Arc::new(RadialMesh::for_scale(params.log_delta[0], 1.0, 64.0)?);
    let ansatz = assemble_on_mesh(&params, &green, ProjectionMode::Exact, mesh)?;
    let fp = contraction_iterate(&ansatz, 200, 1e-12)?;
    let gap =
        fp.u.values()
            .iter()
            .zip(last.u.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
    println!(
        "\nfixed point: {} iterations, ratio {:.2e}, max |u_fp - u_newton| = {gap:.2e}",
        fp.iterations.len(),
        fp.contraction_ratio.unwrap_or(f64::NAN)
    );
    Ok(())
}
