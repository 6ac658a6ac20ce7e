use std::f64::consts::PI;

use towerlab::greens::{green_origin, harmonic_extension, robin_at_origin, DomainSpec, GreenData};

/// Regular part at the centre of the square `[−1, 1]²` from the image sum
/// over the doubly periodic lattice, folded into a rapidly converging
/// `ln tanh` series.
fn square_h00_series() -> f64 {
    let mut tail = 0.0;
    for m in 1..60 {
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        tail += sign * (PI * m as f64 / 2.0).tanh().ln();
    }
    -(PI / 4.0).ln() / (2.0 * PI) - tail / PI
}

/// Same quantity from the conformal radius: the Schwarz–Christoffel map of
/// the unit disk onto the square has `f'(0) = √2 / ∫_0^1 (1 − t⁴)^{−1/2} dt`.
fn square_h00_conformal() -> f64 {
    // t = 1 − v² removes the endpoint singularity
    let n = 200_000;
    let h = 1.0 / n as f64;
    let f = |v: f64| {
        let t: f64 = 1.0 - v * v;
        2.0 / ((1.0 + t) * (1.0 + t * t)).sqrt()
    };
    let mut acc = 0.0;
    for i in 0..n {
        let v = (i as f64 + 0.5) * h;
        acc += f(v);
    }
    let quarter_lemniscate = acc * h;
    (2f64.sqrt() / quarter_lemniscate).ln() / (2.0 * PI)
}

#[test]
fn two_oracles_agree() {
    assert!((square_h00_series() - square_h00_conformal()).abs() < 1e-9);
}

#[test]
fn square_regular_part_matches_image_series() {
    let g = GreenData::new(&DomainSpec::rectangle(1.0, 1.0).unwrap()).unwrap();
    let want = square_h00_series();
    assert!((g.h00 - want).abs() < 1e-6, "h00 = {} want {want}", g.h00);
    assert!(g.h00_error < 1e-5);
}

#[test]
fn regular_part_shifts_by_log_of_scale() {
    let base = robin_at_origin(&DomainSpec::rectangle(1.0, 1.0).unwrap()).unwrap();
    for a in [0.5, 2.0] {
        let scaled = robin_at_origin(&DomainSpec::rectangle(a, a).unwrap()).unwrap();
        assert!(
            (scaled - base - a.ln() / (2.0 * PI)).abs() < 1e-6,
            "a = {a}"
        );
    }
}

#[test]
fn wide_rectangle_exceeds_square() {
    // domain monotonicity of the Robin function
    let square = robin_at_origin(&DomainSpec::rectangle(1.0, 1.0).unwrap()).unwrap();
    let wide = robin_at_origin(&DomainSpec::rectangle(2.0, 1.0).unwrap()).unwrap();
    let tall = robin_at_origin(&DomainSpec::rectangle(1.0, 2.0).unwrap()).unwrap();
    assert!(wide > square);
    assert!((wide - tall).abs() < 1e-9);
}

#[test]
fn disk_of_radius_two() {
    let d = DomainSpec::disk(2.0).unwrap();
    let g = GreenData::new(&d).unwrap();
    assert!((g.h00 - 2f64.ln() / (2.0 * PI)).abs() < 1e-15);
    for r in [0.1, 0.7, 1.5, 2.0] {
        let want = -(r / 2.0f64).ln() / (2.0 * PI);
        assert!((green_origin(&d, [0.0, r]).unwrap() - want).abs() < 1e-14);
    }
    assert!(green_origin(&d, [2.0, 0.0]).unwrap().abs() < 1e-15);
}

#[test]
fn disk_extension_of_quadratic_harmonic() {
    let d = DomainSpec::disk(2.0).unwrap();
    let ext = harmonic_extension(&d, |x, y| x * x - y * y + 3.0).unwrap();
    for x in [[0.0, 0.0], [0.3, -1.1], [1.2, 1.2], [-1.9, 0.1]] {
        let want = x[0] * x[0] - x[1] * x[1] + 3.0;
        assert!((ext.eval(x).unwrap() - want).abs() < 1e-10, "{x:?}");
    }
    assert!(ext.eval([2.5, 0.0]).is_none());
}

#[test]
fn rectangle_extension_is_even() {
    let d = DomainSpec::rectangle(1.5, 1.0).unwrap();
    let ext = harmonic_extension(&d, |x, y| (x * x + 2.0 * y * y).ln_1p()).unwrap();
    for x in [[0.2, 0.3], [1.0, -0.4], [-0.7, 0.9]] {
        let a = ext.eval(x).unwrap();
        let b = ext.eval([-x[0], -x[1]]).unwrap();
        assert!((a - b).abs() < 1e-10);
    }
    // maximum principle: interior values lie within the boundary range
    let hi = (1.5f64 * 1.5 + 2.0).ln_1p();
    assert!(ext.eval([0.0, 0.0]).unwrap() > 0.0 && ext.eval([0.0, 0.0]).unwrap() < hi);
}
