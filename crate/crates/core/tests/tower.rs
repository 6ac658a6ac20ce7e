use std::sync::Arc;

use proptest::prelude::*;

use towerlab::greens::{DomainSpec, GreenData};
use towerlab::mesh::RadialMesh;
use towerlab::tower::{
    assemble_ansatz, assemble_on_mesh, check_alternating_sum, delta_exponent, select_parameters,
    select_parameters_log, AnnulusDecomposition, ProjectionMode,
};

#[test]
fn two_bubble_scales_in_closed_form() {
    for lambda in [1e-2, 1e-4, 1e-7] {
        let p = select_parameters(2, lambda, 0.0).unwrap();
        let delta2 = (lambda / 72.0f64).powf(1.0 / 6.0);
        let delta1 = lambda.powf(1.5) / 41472f64.sqrt();
        assert!((p.log_delta[1] - delta2.ln()).abs() < 1e-13);
        assert!((p.log_delta[0] - delta1.ln()).abs() < 1e-13);
    }
}

#[test]
fn scale_factors_do_not_depend_on_lambda() {
    let h00 = 0.11;
    let a = select_parameters(4, 1e-3, h00).unwrap();
    let b = select_parameters_log(4, -250.0, h00).unwrap();
    for i in 0..4 {
        assert!((a.d[i] / b.d[i] - 1.0).abs() < 1e-10, "d_{} drifts", i + 1);
        let predicted = a.log_delta[i] + delta_exponent(4, i + 1) * (-250.0 - 1e-3f64.ln());
        assert!((b.log_delta[i] - predicted).abs() < 1e-9);
    }
}

#[test]
fn linear_and_log_entry_points_agree() {
    let lambda = 3.7e-5;
    let a = select_parameters(3, lambda, -0.02).unwrap();
    let b = select_parameters_log(3, lambda.ln(), -0.02).unwrap();
    assert_eq!(a.alpha, b.alpha);
    for i in 0..3 {
        assert_eq!(a.log_delta[i], b.log_delta[i]);
    }
}

#[test]
fn scales_far_below_double_range() {
    let p = select_parameters_log(3, -1.0e4, 0.0).unwrap();
    assert!(p.lambda == 0.0);
    assert!(p.log_delta.iter().all(|l| l.is_finite()));
    assert!(p.log_delta.windows(2).all(|w| w[0] < w[1]));
    for j in 0..3 {
        assert!(p.balance(j).abs() < 1e-9);
    }
}

#[test]
fn annuli_partition_the_disk() {
    let p = select_parameters(3, 1e-4, 0.0).unwrap();
    let a = AnnulusDecomposition::new(&p, 1.0).unwrap();
    assert_eq!(a.count(), 3);
    assert_eq!(a.bounds(1).0, 0.0);
    assert_eq!(a.bounds(3).1, 1.0);
    for j in 1..3 {
        assert_eq!(a.bounds(j).1, a.bounds(j + 1).0);
    }
    for j in 1..=3 {
        let delta = p.log_delta[j - 1].exp();
        assert_eq!(a.annulus_of(delta), j, "delta_{j} outside A_{j}");
    }
}

#[test]
fn projections_differ_by_a_power_of_delta() {
    let disk = DomainSpec::unit_disk();
    for lambda in [1e-2, 1e-4, 1e-6] {
        let p = select_parameters(2, lambda, 0.0).unwrap();
        let exact = assemble_ansatz(&p, &disk, ProjectionMode::Exact).unwrap();
        let asym = assemble_ansatz(&p, &disk, ProjectionMode::Asymptotic).unwrap();
        for (i, (e, a)) in exact.bubbles.iter().zip(&asym.bubbles).enumerate() {
            let gap = (e.constant_correction().unwrap() - a.constant_correction().unwrap()).abs();
            let bound = 3.0 * (p.alpha[i] * p.log_delta[i]).exp();
            assert!(gap <= bound, "level {}: gap {gap:e} > {bound:e}", i + 1);
        }
    }
}

#[test]
fn exact_projection_vanishes_on_the_circle() {
    let p = select_parameters(3, 1e-3, 0.0).unwrap();
    let a = assemble_ansatz(&p, &DomainSpec::unit_disk(), ProjectionMode::Exact).unwrap();
    assert!(a.boundary_defect() < 1e-12);
    for b in &a.bubbles {
        assert!(b.value([0.6, 0.8]).abs() < 1e-12);
    }
}

#[test]
fn rectangle_ansatz_is_even_and_vanishes_on_the_boundary() {
    let domain = DomainSpec::rectangle(1.0, 0.8).unwrap();
    let green = Arc::new(GreenData::new(&domain).unwrap());
    let p = select_parameters(2, 1e-3, green.h00).unwrap();
    let mesh = Arc::new(RadialMesh::for_scale(p.log_delta[0], domain.inradius(), 32.0).unwrap());
    let a = assemble_on_mesh(&p, &green, ProjectionMode::Exact, mesh).unwrap();
    assert!(
        a.evenness_defect() < 1e-10,
        "evenness {}",
        a.evenness_defect()
    );
    assert!(
        a.boundary_defect() < 1e-9,
        "boundary {}",
        a.boundary_defect()
    );
    let g = a.plane.as_ref().unwrap();
    let (i, j) = (3, 5);
    assert!((a.value(g.node(i, j)) - g.at(i, j)).abs() < 1e-8);
}

proptest! {
    #[test]
    fn balance_holds(k in 1usize..=6, log_lambda in -400.0f64..-0.5, h00 in -0.3f64..0.3) {
        let p = select_parameters_log(k, log_lambda, h00).unwrap();
        for j in 0..k {
            prop_assert!(p.balance(j).abs() < 1e-9, "level {} balance {}", j + 1, p.balance(j));
        }
        prop_assert_eq!(check_alternating_sum(&p).unwrap(), if k % 2 == 0 { 2 * k as i64 } else { -2 * k as i64 });
    }

    #[test]
    fn scales_are_ordered(k in 2usize..=6, log_lambda in -400.0f64..-1.0) {
        let p = select_parameters_log(k, log_lambda, 0.0).unwrap();
        for i in 0..k - 1 {
            prop_assert!(p.log_delta_ratio(i) < 0.0);
        }
    }
}
