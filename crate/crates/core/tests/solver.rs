use std::f64::consts::PI;
use std::sync::Arc;

use towerlab::greens::{DomainSpec, GreenData};
use towerlab::linearized::{min_singular, Sector};
use towerlab::mesh::RadialMesh;
use towerlab::residual::geometric_sweep;
use towerlab::solver::{
    continuation, masses, moser_trudinger_spot_check, newton_solve, quantized_masses,
};
use towerlab::tower::{assemble_on_mesh, select_parameters, Ansatz, ProjectionMode};

fn disk_ansatz(k: usize, lambda: f64, npu: f64) -> Ansatz {
    let green = Arc::new(GreenData::new(&DomainSpec::unit_disk()).unwrap());
    let p = select_parameters(k, lambda, green.h00).unwrap();
    let mesh = Arc::new(RadialMesh::for_scale(p.log_delta[0], 1.0, npu).unwrap());
    assemble_on_mesh(&p, &green, ProjectionMode::Exact, mesh).unwrap()
}

#[test]
fn direct_solve_matches_continuation_endpoint() {
    let lambdas = geometric_sweep(1e-2, 1e-4, 5).unwrap();
    let path = continuation(2, &lambdas, &DomainSpec::unit_disk(), 64.0, 1e-12).unwrap();
    let end = path.last().unwrap();
    let direct = newton_solve(&disk_ansatz(2, 1e-4, 64.0), None, 1e-12).unwrap();
    let gap = end
        .u
        .values()
        .iter()
        .zip(direct.u.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(
        gap < 1e-8,
        "continuation and direct solve differ by {gap:e}"
    );
    assert!((end.m_plus - direct.m_plus).abs() < 1e-8 * end.m_plus);
}

#[test]
fn newton_converges_quadratically_for_three_bubbles() {
    let a = disk_ansatz(3, 1e-3, 64.0);
    // start well away from the solution so several steps sit above roundoff
    let start = a.field.map(|r, v| v + 0.5 * (1.0 - r * r));
    let r = newton_solve(&a, Some(&start), 1e-13).unwrap();
    // e_{n+1} <= C e_n^2 on every step that is not roundoff
    let steps = &r.newton_steps;
    let quotients: Vec<f64> = steps
        .windows(2)
        .filter(|w| w[1] > 1e-11)
        .map(|w| w[1] / (w[0] * w[0]))
        .collect();
    assert!(quotients.len() >= 4);
    assert!(quotients.iter().all(|&c| c < 5.0), "{quotients:?}");
    assert_eq!(r.sign_changes, 2);
}

#[test]
fn masses_approach_the_quantized_pair() {
    let lambdas = geometric_sweep(1e-2, 1e-5, 4).unwrap();
    let path = continuation(2, &lambdas, &DomainSpec::unit_disk(), 64.0, 1e-12).unwrap();
    let (qp, qm) = quantized_masses(2);
    let err: Vec<f64> = path
        .iter()
        .map(|r| ((r.m_plus - qp).abs() + (r.m_minus - qm).abs()) / (qp + qm))
        .collect();
    assert!(err.windows(2).all(|w| w[1] < w[0]), "{err:?}");
    assert!(*err.last().unwrap() < 0.05);
}

#[test]
fn mass_of_a_single_exact_bubble() {
    // u = ln(8δ²/(δ² + r²)²) − ln λ solves −Δu = λe^u on the plane with mass 8π
    let mesh = Arc::new(RadialMesh::log_uniform(1e-6, 1.0, 64.0).unwrap());
    let (delta, log_lambda): (f64, f64) = (1e-2, -3.0);
    let u = towerlab::mesh::RadialField::from_fn(mesh, |r| {
        (8.0 * delta * delta).ln() - 2.0 * (delta * delta + r * r).ln() - log_lambda
    });
    let (plus, _) = masses(&u, log_lambda, 1.0).unwrap();
    let want = 8.0 * PI / (1.0 + delta * delta);
    assert!((plus - want).abs() < 1e-3 * want, "{plus} vs {want}");
}

#[test]
fn moser_trudinger_on_correction_and_tail() {
    let a = disk_ansatz(2, 1e-4, 64.0);
    let r = newton_solve(&a, None, 1e-12).unwrap();
    for eta in [0.5, 1.0, 2.0] {
        let mt = moser_trudinger_spot_check(&r.phi, eta);
        assert!(mt.holds, "phi, eta = {eta}: {mt:?}");
    }
    // the outer bubble restricted to the far field, shifted to vanish at r = 1
    let tail = a.levels[1].map(|r, v| {
        if r > 0.1 {
            v
        } else {
            a.levels[1].value_at(0.1)
        }
    });
    let mt = moser_trudinger_spot_check(&tail, 1.0);
    assert!(mt.holds, "tail: {mt:?}");
}

#[test]
fn even_sector_sigma_is_mesh_converged() {
    let p = select_parameters(2, 1e-4, 0.0).unwrap();
    let coarse = Arc::new(RadialMesh::for_scale(p.log_delta[0], 1.0, 64.0).unwrap());
    let fine = Arc::new(coarse.refined());
    let a = min_singular(&p, coarse, Sector::Even, 4).unwrap();
    let b = min_singular(&p, fine, Sector::Even, 4).unwrap();
    assert!(
        ((a.sigma_min - b.sigma_min) / b.sigma_min).abs() < 0.01,
        "{} vs {}",
        a.sigma_min,
        b.sigma_min
    );
}

#[test]
fn correction_grows_at_most_logarithmically() {
    let lambdas = geometric_sweep(1e-2, 1e-6, 5).unwrap();
    let path = continuation(1, &lambdas, &DomainSpec::unit_disk(), 64.0, 1e-12).unwrap();
    let ratio: Vec<f64> = path
        .iter()
        .map(|r| r.phi_norm / r.lambda.ln().abs())
        .collect();
    let first = ratio[0];
    assert!(ratio.iter().all(|&q| q <= 2.0 * first), "{ratio:?}");
}
