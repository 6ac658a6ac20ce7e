//! Gauss–Legendre rules and adaptive panel refinement.
//!
//! Improper integrals over `ℝ²` in this crate are first mapped to the unit
//! interval (typically through `t = r^α / (1 + r^α)`), after which the
//! integrands are smooth in the interior with at most logarithmic endpoint
//! behaviour. Gauss nodes never touch the endpoints, and bisecting the panels
//! that fail the local check handles the logarithms.

use std::sync::OnceLock;

/// Nodes and weights of an `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Shared 20-point rule.
    pub fn standard() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(20))
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Single-panel rule on `[a, b]`.
    pub fn panel<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    /// Composite rule over `panels` equal panels.
    pub fn composite<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64, panels: usize) -> f64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|p| {
                let lo = a + p as f64 * h;
                self.panel(f, lo, lo + h)
            })
            .sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error_estimate: f64,
    pub panels: usize,
}

const MAX_DEPTH: usize = 64;
/// Panels narrower than this many ulps of their endpoints are not split.
const MIN_WIDTH_ULPS: f64 = 1024.0;

/// Adaptive Gauss–Legendre integration of `f` over `[a, b]`.
///
/// Each panel is compared against the sum over its two halves; panels that
/// disagree by more than their share of the tolerance are halved again.
/// The tolerance is `max(abs_tol, rel_tol * ∫|f|)` with `∫|f|` taken from a
/// coarse composite pass, so integrals that cancel to zero do not demand
/// an absolute accuracy far below their terms.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Quadrature {
    integrate_with(GaussLegendre::standard(), &f, a, b, abs_tol, rel_tol)
}

pub fn integrate_with<F: Fn(f64) -> f64>(
    rule: &GaussLegendre,
    f: &F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Quadrature {
    if a == b {
        return Quadrature {
            value: 0.0,
            error_estimate: 0.0,
            panels: 0,
        };
    }
    let coarse = rule.composite(&|x: f64| f(x).abs(), a, b, 8);
    let tol = abs_tol.max(rel_tol * coarse);
    let width = (b - a) / 8.0;
    let mut acc = Quadrature {
        value: 0.0,
        error_estimate: 0.0,
        panels: 0,
    };
    for p in 0..8 {
        let lo = a + p as f64 * width;
        let hi = if p == 7 { b } else { lo + width };
        let whole = rule.panel(f, lo, hi);
        let part = refine(rule, f, lo, hi, whole, tol / 8.0, 0);
        acc.value += part.value;
        acc.error_estimate += part.error_estimate;
        acc.panels += part.panels;
    }
    acc
}

fn refine<F: Fn(f64) -> f64>(
    rule: &GaussLegendre,
    f: &F,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> Quadrature {
    let mid = 0.5 * (a + b);
    let left = rule.panel(f, a, mid);
    let right = rule.panel(f, mid, b);
    let sum = left + right;
    let diff = (sum - whole).abs();
    let floor = 8.0 * f64::EPSILON * sum.abs();
    let unresolvable = (b - a) <= MIN_WIDTH_ULPS * f64::EPSILON * a.abs().max(b.abs());
    if diff <= tol.max(floor) || depth >= MAX_DEPTH || unresolvable || !diff.is_finite() {
        return Quadrature {
            value: sum,
            error_estimate: diff,
            panels: 2,
        };
    }
    let l = refine(rule, f, a, mid, left, 0.5 * tol, depth + 1);
    let r = refine(rule, f, mid, b, right, 0.5 * tol, depth + 1);
    Quadrature {
        value: l.value + r.value,
        error_estimate: l.error_estimate + r.error_estimate,
        panels: l.panels + r.panels,
    }
}

/// `∫_0^∞ g(r) dr` through `r = t / (1 - t)`.
pub fn integrate_half_line<F: Fn(f64) -> f64>(g: F, abs_tol: f64, rel_tol: f64) -> Quadrature {
    let mapped = |t: f64| {
        let one_minus = 1.0 - t;
        let r = t / one_minus;
        g(r) / (one_minus * one_minus)
    };
    integrate(mapped, 0.0, 1.0, abs_tol, rel_tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let rule = GaussLegendre::new(5);
        // degree 9 is the limit for 5 nodes
        let v = rule.panel(&|x: f64| x.powi(8) + 3.0 * x.powi(3), -1.0, 1.0);
        assert!((v - 2.0 / 9.0).abs() < 1e-15);
        let s: f64 = rule.weights().iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
    }

    #[test]
    fn log_endpoint_singularity() {
        let q = integrate(|t: f64| t.ln(), 0.0, 1.0, 1e-14, 1e-13);
        assert!((q.value + 1.0).abs() < 1e-12, "{q:?}");
    }

    #[test]
    fn half_line_algebraic_tail() {
        let q = integrate_half_line(|r| 1.0 / (1.0 + r * r), 1e-14, 1e-13);
        assert!((q.value - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn doubling_the_rule_order_is_stable() {
        let f = |t: f64| (1.0 - 2.0 * t) * (t.ln() - (1.0 - t).ln());
        let a = integrate_with(&GaussLegendre::new(10), &f, 0.0, 1.0, 1e-15, 1e-14).value;
        let b = integrate_with(&GaussLegendre::new(20), &f, 0.0, 1.0, 1e-15, 1e-14).value;
        assert!((a - b).abs() < 1e-11);
        assert!((b + 1.0).abs() < 1e-12);
    }
}
