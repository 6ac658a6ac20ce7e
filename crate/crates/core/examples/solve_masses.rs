//! Solves for a single tower and compares its blow-up masses with the
//! quantized pair and the Ohtsuka–Suzuki identity.

use std::sync::Arc;

use towerlab::greens::GreenData;
use towerlab::solver::{newton_solve, ohtsuka_suzuki_check, quantized_masses};
use towerlab::tower::{assemble_on_mesh, select_parameters, ProjectionMode};
use towerlab::{DomainSpec, RadialMesh};

fn main() -> towerlab::Result<()> {
    let (k, lambda) = (2, 1e-5);
    let green = Arc::new(GreenData::new(&DomainSpec::unit_disk())?);
    let params = select_parameters(k, lambda, green.h00)?;
    let mesh = Arc::new(RadialMesh::for_scale(params.log_delta[0], 1.0, 64.0)?);
    let ansatz = assemble_on_mesh(&params, &green, ProjectionMode::Exact, mesh)?;
    let sol = newton_solve(&ansatz, None, 1e-12)?;

    let (qp, qm) = quantized_masses(k);
    println!("newton steps    {:?}", sol.newton_steps);
    println!("|grad phi|      {:.4e}", sol.phi_norm);
    println!("m+  {:.6}  (limit {qp:.6})", sol.m_plus);
    println!("m-  {:.6}  (limit {qm:.6})", sol.m_minus);
    println!(
        "OS defect       {:.3e}",
        ohtsuka_suzuki_check(sol.m_plus, sol.m_minus)
    );
    println!("far-field gap   {:.3e}", sol.farfield_gap);
    println!("sign changes    {}", sol.sign_changes);
    Ok(())
}
