//! Singular Liouville profiles `w^α_δ`, the kernel of their linearisation and
//! the weighted norms `L_α`, `H_α`.
//!
//! All profile arithmetic runs on `ln δ`: for deep towers `δ^α` is far below
//! the smallest positive double, while `ln δ` stays modest.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::log_add_exp;
use crate::mesh::{RadialField, RadialMesh};
use crate::quadrature::{integrate, GaussLegendre};

const QUAD_ABS_TOL: f64 = 1e-14;
const QUAD_REL_TOL: f64 = 1e-13;

/// Bubble `w^α_δ(x) = ln(2α²δ^α / (δ^α + |x|^α)²)` solving
/// `−Δw = |x|^{α−2} e^w` in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub alpha: f64,
    pub log_delta: f64,
}

impl Profile {
    pub fn new(alpha: f64, delta: f64) -> Result<Self> {
        ensure_finite("delta", delta)?;
        if delta <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "delta must be positive, got {delta}"
            )));
        }
        Self::from_log_delta(alpha, delta.ln())
    }

    pub fn from_log_delta(alpha: f64, log_delta: f64) -> Result<Self> {
        ensure_finite("alpha", alpha)?;
        ensure_finite("log_delta", log_delta)?;
        if alpha < 2.0 {
            return Err(Error::InvalidInput(format!(
                "alpha must be at least 2, got {alpha}"
            )));
        }
        Ok(Self { alpha, log_delta })
    }

    pub fn delta(&self) -> f64 {
        self.log_delta.exp()
    }

    /// `ln(δ^α + r^α)`.
    fn log_sum(&self, log_r: f64) -> f64 {
        log_add_exp(self.alpha * self.log_delta, self.alpha * log_r)
    }

    /// `w^α_δ(r)`.
    pub fn value(&self, r: f64) -> f64 {
        self.value_log_r(safe_ln(r))
    }

    pub fn value_log_r(&self, log_r: f64) -> f64 {
        (2.0 * self.alpha * self.alpha).ln() + self.alpha * self.log_delta
            - 2.0 * self.log_sum(log_r)
    }

    /// `ln(|x|^{α−2} e^{w(x)})`, the log of the bubble potential
    /// `2α²δ^α|x|^{α−2}/(δ^α+|x|^α)²`.
    pub fn log_density_log_r(&self, log_r: f64) -> f64 {
        let power = if self.alpha == 2.0 {
            0.0
        } else {
            (self.alpha - 2.0) * log_r
        };
        power + self.value_log_r(log_r)
    }

    pub fn density(&self, r: f64) -> f64 {
        self.log_density_log_r(safe_ln(r)).exp()
    }

    /// `Z(r) = (δ^α − r^α)/(δ^α + r^α)`, the radial kernel element.
    pub fn z(&self, r: f64) -> f64 {
        self.z_log_r(safe_ln(r))
    }

    pub fn z_log_r(&self, log_r: f64) -> f64 {
        (0.5 * self.alpha * (self.log_delta - log_r)).tanh()
    }
}

fn safe_ln(r: f64) -> f64 {
    if r == 0.0 {
        f64::NEG_INFINITY
    } else {
        r.ln()
    }
}

/// Checked evaluation of `w^α_δ(r)`.
pub fn bubble_value(profile: &Profile, r: f64) -> Result<f64> {
    ensure_finite("r", r)?;
    if r < 0.0 {
        return Err(Error::InvalidInput(format!(
            "radius must be nonnegative, got {r}"
        )));
    }
    Profile::from_log_delta(profile.alpha, profile.log_delta)?;
    Ok(profile.value(r))
}

/// Maximum relative residual of the discrete `−Δw − r^{α−2}e^w` over the
/// interior nodes of `mesh`.
pub fn verify_limit_pde(profile: &Profile, mesh: &RadialMesh) -> Result<f64> {
    mesh.require_density(3.0)?;
    let mesh = std::sync::Arc::new(mesh.clone());
    let w = RadialField::from_fn(mesh.clone(), |r| profile.value(r));
    let lap = w.neg_laplacian_interior();
    Ok(lap
        .iter()
        .enumerate()
        .map(|(k, l)| {
            let s = mesh.s(k + 1);
            let rhs = profile.log_density_log_r(s).exp();
            ((l - rhs) / rhs).abs()
        })
        .fold(0.0, f64::max))
}

/// Maximum absolute residual of the discrete linearised equation
/// `−ΔZ − 2α²r^{α−2}/(1+r^α)² Z` for the radial kernel element.
pub fn verify_kernel_pde(alpha: f64, mesh: &RadialMesh) -> Result<f64> {
    mesh.require_density(3.0)?;
    let profile = Profile::from_log_delta(alpha, 0.0)?;
    let mesh = std::sync::Arc::new(mesh.clone());
    let z = RadialField::from_fn(mesh.clone(), |r| profile.z(r));
    let lap = z.neg_laplacian_interior();
    Ok(lap
        .iter()
        .enumerate()
        .map(|(k, l)| {
            let r = mesh.r(k + 1);
            (l - profile.density(r) * z.values()[k + 1]).abs()
        })
        .fold(0.0, f64::max))
}

/// `∫_{ℝ²} g(|x|) dx` for radial `g` with algebraic tails at `0` and `∞`
/// (`r² g → 0` at both ends). The closure receives `(r, ln r)`.
pub fn plane_integral<G: Fn(f64, f64) -> f64>(alpha: f64, g: G) -> f64 {
    plane_integral_with(GaussLegendre::standard(), alpha, g)
}

/// Relative size below which the `s = ln r` integrand counts as tail.
const TAIL_CUTOFF: f64 = 1e-19;

/// As [`plane_integral`] with an explicit panel rule.
///
/// In `s = ln r` the integrand `2π r² g` is analytic and decays
/// exponentially at both ends, so a composite rule on a truncated interval
/// converges quickly. The interval grows until its end values are below
/// `TAIL_CUTOFF` of the peak; the panel count starts near `α` panels per unit
/// of `s` and doubles until two passes agree.
pub fn plane_integral_with<G: Fn(f64, f64) -> f64>(rule: &GaussLegendre, alpha: f64, g: G) -> f64 {
    let f = |s: f64| {
        let v = 2.0 * PI * g(s.exp(), s) * (2.0 * s).exp();
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let peak = (-160..=160)
        .map(|i| f(0.125 * i as f64).abs())
        .fold(0.0, f64::max);
    if peak == 0.0 {
        return 0.0;
    }
    let tail_end = |dir: f64| {
        let mut x = 4.0;
        while x < 2048.0
            && (f(dir * x).abs() > TAIL_CUTOFF * peak
                || f(dir * 0.5 * x).abs() > TAIL_CUTOFF * peak)
        {
            x *= 1.5;
        }
        dir * x
    };
    let (lo, hi) = (tail_end(-1.0), tail_end(1.0));
    let mut panels = (((hi - lo) * alpha.max(1.0)) / 4.0).ceil() as usize;
    let mut prev = rule.composite(&f, lo, hi, panels);
    let scale = rule.composite(&|s: f64| f(s).abs(), lo, hi, panels);
    for _ in 0..12 {
        panels *= 2;
        let next = rule.composite(&f, lo, hi, panels);
        if (next - prev).abs() <= QUAD_ABS_TOL.max(QUAD_REL_TOL * scale) {
            return next;
        }
        prev = next;
    }
    prev
}

/// Total mass `∫ |y|^{α−2} e^{w^α(y)} dy` of the unit-scale bubble.
pub fn limit_mass(alpha: f64) -> Result<f64> {
    let p = Profile::from_log_delta(alpha, 0.0)?;
    Ok(plane_integral(alpha, |_, log_r| {
        p.log_density_log_r(log_r).exp()
    }))
}

/// The three kernel integrals `(∫VZ, ∫VZ ln(1+|y|^α)², ∫VZ ln|y|)` with
/// `V = 2α²|y|^{α−2}/(1+|y|^α)²` and `Z = (1−|y|^α)/(1+|y|^α)`.
pub fn kernel_integrals(alpha: f64) -> Result<(f64, f64, f64)> {
    kernel_integrals_with(GaussLegendre::standard(), alpha)
}

pub fn kernel_integrals_with(rule: &GaussLegendre, alpha: f64) -> Result<(f64, f64, f64)> {
    let p = Profile::from_log_delta(alpha, 0.0)?;
    let vz = |log_r: f64| p.log_density_log_r(log_r).exp() * p.z_log_r(log_r);
    let i1 = plane_integral_with(rule, alpha, |_, lr| vz(lr));
    let i2 = plane_integral_with(rule, alpha, |_, lr| {
        vz(lr) * 2.0 * log_add_exp(0.0, alpha * lr)
    });
    let i3 = plane_integral_with(rule, alpha, |_, lr| vz(lr) * lr);
    Ok((i1, i2, i3))
}

/// Kernel of the linearised Liouville operator at the unit-scale profile,
/// in polar form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelBasis {
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelFunction {
    Radial,
    Cosine,
    Sine,
}

impl KernelBasis {
    pub fn new(alpha: f64) -> Result<Self> {
        Profile::from_log_delta(alpha, 0.0)?;
        Ok(Self { alpha })
    }

    pub const MEMBERS: [KernelFunction; 3] = [
        KernelFunction::Radial,
        KernelFunction::Cosine,
        KernelFunction::Sine,
    ];

    pub fn eval_polar(&self, which: KernelFunction, r: f64, theta: f64) -> f64 {
        let a = self.alpha;
        match which {
            KernelFunction::Radial => {
                let ra = r.powf(a);
                (1.0 - ra) / (1.0 + ra)
            }
            KernelFunction::Cosine | KernelFunction::Sine => {
                let amp = r.powf(0.5 * a) / (1.0 + r.powf(a));
                let phase = 0.5 * a * theta;
                if which == KernelFunction::Cosine {
                    amp * phase.cos()
                } else {
                    amp * phase.sin()
                }
            }
        }
    }

    pub fn eval(&self, which: KernelFunction, x: [f64; 2]) -> f64 {
        let r = x[0].hypot(x[1]);
        self.eval_polar(which, r, x[1].atan2(x[0]))
    }

    /// Angular Fourier mode carried by a kernel element.
    pub fn mode(&self, which: KernelFunction) -> f64 {
        match which {
            KernelFunction::Radial => 0.0,
            _ => 0.5 * self.alpha,
        }
    }
}

/// Weight `r^{(α−2)/2}/(1+r^α)` of the `L_α` norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedNormSpec {
    pub alpha: f64,
}

impl WeightedNormSpec {
    pub fn new(alpha: f64) -> Result<Self> {
        Profile::from_log_delta(alpha, 0.0)?;
        Ok(Self { alpha })
    }

    pub fn weight(&self, r: f64) -> f64 {
        r.powf(0.5 * (self.alpha - 2.0)) / (1.0 + r.powf(self.alpha))
    }

    /// `‖u‖²_{L_α}` for a radial function.
    pub fn l_norm_sq<F: RadialFunction + ?Sized>(&self, u: &F) -> f64 {
        let a = self.alpha;
        // weight² u² over the plane; the t-substitution absorbs the weight
        plane_integral(a, |r, lr| {
            let w2 = ((a - 2.0) * lr - 2.0 * log_add_exp(0.0, a * lr)).exp();
            w2 * u.value(r).powi(2)
        })
    }

    /// `‖∇u‖²_{L²}` for a radial function. Integrated in `ln r` like the
    /// weighted norm: transforms `u(r^{2/α})` have derivatives that blow up
    /// like a fractional power at the origin, which becomes plain exponential
    /// decay in that variable.
    pub fn gradient_norm_sq<F: RadialFunction + ?Sized>(&self, u: &F) -> f64 {
        plane_integral(self.alpha, |r, _| u.derivative(r).powi(2))
    }
}

/// Radial test function with an analytic derivative.
pub trait RadialFunction {
    fn value(&self, r: f64) -> f64;
    fn derivative(&self, r: f64) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RadialTestFunction {
    /// `(1 − r^α)/(1 + r^α)`.
    Kernel { alpha: f64 },
    /// `amp / (1 + (r/scale)^power)`.
    Rational { amp: f64, scale: f64, power: f64 },
    /// `amp · exp(−(r/width)²)`.
    Gaussian { amp: f64, width: f64 },
}

impl RadialFunction for RadialTestFunction {
    fn value(&self, r: f64) -> f64 {
        match *self {
            Self::Kernel { alpha } => {
                let ra = r.powf(alpha);
                (1.0 - ra) / (1.0 + ra)
            }
            Self::Rational { amp, scale, power } => amp / (1.0 + (r / scale).powf(power)),
            Self::Gaussian { amp, width } => amp * (-(r / width).powi(2)).exp(),
        }
    }

    fn derivative(&self, r: f64) -> f64 {
        match *self {
            Self::Kernel { alpha } => {
                if r == 0.0 {
                    return 0.0;
                }
                let ra = r.powf(alpha);
                -2.0 * alpha * ra / (r * (1.0 + ra).powi(2))
            }
            Self::Rational { amp, scale, power } => {
                if r == 0.0 {
                    return 0.0;
                }
                let q = (r / scale).powf(power);
                -amp * power * q / (r * (1.0 + q).powi(2))
            }
            Self::Gaussian { amp, width } => {
                -2.0 * amp * r / (width * width) * (-(r / width).powi(2)).exp()
            }
        }
    }
}

impl RadialTestFunction {
    /// Random rational or Gaussian profile with moderate parameters.
    pub fn random<R: Rng>(rng: &mut R) -> Self {
        if rng.gen_bool(0.5) {
            Self::Rational {
                amp: rng.gen_range(0.5..2.0),
                scale: rng.gen_range(0.3..3.0),
                power: rng.gen_range(1.5..5.0),
            }
        } else {
            Self::Gaussian {
                amp: rng.gen_range(0.5..2.0),
                width: rng.gen_range(0.3..3.0),
            }
        }
    }
}

/// `u ↦ ū`, `ū(s) = u(s^{2/α})`: the radial substitution taking `L_α` to `L_2`.
pub struct Stereographic<'a, F: ?Sized> {
    pub alpha: f64,
    pub inner: &'a F,
}

impl<F: RadialFunction + ?Sized> RadialFunction for Stereographic<'_, F> {
    fn value(&self, s: f64) -> f64 {
        self.inner.value(s.powf(2.0 / self.alpha))
    }

    fn derivative(&self, s: f64) -> f64 {
        if s == 0.0 {
            return 0.0;
        }
        let e = 2.0 / self.alpha;
        let r = s.powf(e);
        self.inner.derivative(r) * e * r / s
    }
}

/// `‖𝔗_α u‖²_{L_2} / ‖u‖²_{L_α}`; equals `α/2` for every admissible `u`.
/// The two sides are integrated independently, each with its own
/// substitution.
pub fn stereographic_norm_ratio<F: RadialFunction + ?Sized>(alpha: f64, u: &F) -> Result<f64> {
    let original = WeightedNormSpec::new(alpha)?.l_norm_sq(u);
    let transformed = WeightedNormSpec::new(2.0)?.l_norm_sq(&Stereographic { alpha, inner: u });
    if !original.is_finite() || !transformed.is_finite() {
        return Err(Error::InvalidInput(
            "test function is not integrable against the weight".into(),
        ));
    }
    if original == 0.0 {
        return Err(Error::InvalidInput(
            "test function has zero weighted norm".into(),
        ));
    }
    Ok(transformed / original)
}

/// Dirichlet energies of `u` and of its transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientComparison {
    pub alpha: f64,
    pub original: f64,
    pub transformed: f64,
}

impl GradientComparison {
    /// `(2/α)‖∇ū‖² ≤ ‖∇u‖² ≤ (α/2)‖∇ū‖²` up to a relative slack.
    pub fn holds(&self, rel_slack: f64) -> bool {
        let lo = 2.0 / self.alpha * self.transformed;
        let hi = 0.5 * self.alpha * self.transformed;
        self.original >= lo * (1.0 - rel_slack) && self.original <= hi * (1.0 + rel_slack)
    }
}

pub fn stereographic_gradient<F: RadialFunction + ?Sized>(
    alpha: f64,
    u: &F,
) -> Result<GradientComparison> {
    let spec = WeightedNormSpec::new(alpha)?;
    let original = spec.gradient_norm_sq(u);
    let transformed = spec.gradient_norm_sq(&Stereographic { alpha, inner: u });
    Ok(GradientComparison {
        alpha,
        original,
        transformed,
    })
}

/// `∫_0^1` helper kept for callers that work in the `t` variable directly.
pub fn unit_interval_integral<F: Fn(f64) -> f64>(f: F) -> f64 {
    integrate(f, 0.0, 1.0, QUAD_ABS_TOL, QUAD_REL_TOL).value
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bubble_at_origin() {
        let p = Profile::new(2.0, 1.0).unwrap();
        assert!((bubble_value(&p, 0.0).unwrap() - 8f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn scaling_identity() {
        for &(alpha, delta, r) in &[(2.0, 0.3, 0.7), (6.0, 1e-3, 2e-3), (10.0, 1e-30, 5e-31)] {
            let p = Profile::new(alpha, delta).unwrap();
            let unit = Profile::new(alpha, 1.0).unwrap();
            let lhs = p.value(r);
            let rhs = unit.value(r / delta) - alpha * delta.ln();
            assert!(
                (lhs - rhs).abs() < 1e-11 * lhs.abs().max(1.0),
                "{alpha} {delta}"
            );
        }
    }

    #[test]
    fn extended_precision_oracle_alpha6() {
        // ln(72·1e−12) − 2 ln(1e−12 + 1), summed by hand in high precision
        let p = Profile::new(6.0, 1e-2).unwrap();
        let expected = 72f64.ln() - 12.0 * 10f64.ln() - 2.0 * 1e-12;
        assert!((p.value(1.0) - expected).abs() < 1e-13);
        assert!((p.value(1.0) + 23.354355).abs() < 1e-5);
    }

    #[test]
    fn tiny_delta_does_not_underflow() {
        let p = Profile::new(2.0, 1e-300).unwrap();
        assert!(p.value(0.0).is_finite());
        assert!((p.value(1.0) - (8f64.ln() - 600.0 * 10f64.ln())).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(Profile::new(1.5, 1.0).is_err());
        assert!(Profile::new(2.0, 0.0).is_err());
        let p = Profile::new(2.0, 1.0).unwrap();
        assert!(bubble_value(&p, f64::NAN).is_err());
        assert!(bubble_value(&p, -1.0).is_err());
    }

    #[test]
    fn exact_identity_at_unit_radius() {
        let p = Profile::new(2.0, 1.0).unwrap();
        assert!((p.density(1.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn kernel_element_values() {
        let p = Profile::new(6.0, 1.0).unwrap();
        assert!((p.z(0.0) - 1.0).abs() < 1e-15);
        assert!(p.z(1.0).abs() < 1e-15);
        assert!((p.z(1e3) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn odd_half_alpha_kernels_are_odd() {
        for alpha in [2.0, 6.0, 10.0] {
            let k = KernelBasis::new(alpha).unwrap();
            for &(r, th) in &[(0.3, 0.1), (1.7, 2.0), (0.9, -1.3)] {
                let z0 = k.eval_polar(KernelFunction::Radial, r, th);
                assert_eq!(z0, k.eval_polar(KernelFunction::Radial, r, th + PI));
                for f in [KernelFunction::Cosine, KernelFunction::Sine] {
                    let a = k.eval_polar(f, r, th);
                    let b = k.eval_polar(f, r, th + PI);
                    assert!((a + b).abs() < 1e-14, "{alpha} {f:?}");
                }
            }
        }
        // α/2 even: the angular kernels are even instead
        let k = KernelBasis::new(4.0).unwrap();
        let a = k.eval_polar(KernelFunction::Cosine, 0.5, 0.2);
        assert!((a - k.eval_polar(KernelFunction::Cosine, 0.5, 0.2 + PI)).abs() < 1e-14);
    }

    #[test]
    fn weight_positive_and_square_integrable() {
        let spec = WeightedNormSpec::new(6.0).unwrap();
        for r in [1e-3, 0.5, 1.0, 10.0] {
            assert!(spec.weight(r) > 0.0);
        }
        // power 0 makes u ≡ 1/2, and ‖1‖²_{L_α} = 2π/α
        let half = RadialTestFunction::Rational {
            amp: 1.0,
            scale: 1.0,
            power: 0.0,
        };
        let n = spec.l_norm_sq(&half);
        assert!((n - 0.25 * 2.0 * PI / 6.0).abs() < 1e-12);
    }

    #[test]
    fn limit_pde_second_order() {
        let p = Profile::new(2.0, 1.0).unwrap();
        let m1 = RadialMesh::with_intervals((-5.0f64).exp(), 5.0f64.exp(), 1999).unwrap();
        let e1 = verify_limit_pde(&p, &m1).unwrap();
        assert!(e1 < 1e-5, "{e1}");
        let coarse = RadialMesh::with_intervals((-5.0f64).exp(), 5.0f64.exp(), 400).unwrap();
        let ec = verify_limit_pde(&p, &coarse).unwrap();
        let ef = verify_limit_pde(&p, &coarse.refined()).unwrap();
        assert!((ec / ef - 4.0).abs() < 0.1, "{}", ec / ef);
        let sparse = RadialMesh::with_intervals(1e-4, 1e4, 5).unwrap();
        assert!(matches!(
            verify_limit_pde(&p, &sparse),
            Err(Error::MeshTooCoarse { .. })
        ));
    }

    #[test]
    fn kernel_pde_residual_shrinks() {
        let m = RadialMesh::with_intervals((-6.0f64).exp(), 6.0f64.exp(), 300).unwrap();
        let a = verify_kernel_pde(6.0, &m).unwrap();
        let b = verify_kernel_pde(6.0, &m.refined()).unwrap();
        assert!(b < a / 3.5, "{a} {b}");
    }

    #[test]
    fn mass_is_scale_invariant() {
        for alpha in [2.0, 6.0, 10.0, 14.0] {
            let base = limit_mass(alpha).unwrap();
            for delta in [1.0, 1e-2, 1e-5] {
                let p = Profile::new(alpha, delta).unwrap();
                let m = plane_integral(alpha, |r, _| p.density(r * delta) * delta * delta);
                assert!((m - base).abs() < 1e-10 * base);
            }
        }
    }

    #[test]
    fn kernel_integrals_stable_under_order_doubling() {
        let a = kernel_integrals_with(&GaussLegendre::new(10), 6.0).unwrap();
        let b = kernel_integrals_with(&GaussLegendre::new(20), 6.0).unwrap();
        assert!((a.0 - b.0).abs() < 1e-11);
        assert!((a.1 - b.1).abs() < 1e-11);
        assert!((a.2 - b.2).abs() < 1e-11);
    }

    #[test]
    fn stereographic_identity_for_alpha_two() {
        let u = RadialTestFunction::Gaussian {
            amp: 1.0,
            width: 0.7,
        };
        let r = stereographic_norm_ratio(2.0, &u).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stereographic_gradient_bounds_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let u = RadialTestFunction::random(&mut rng);
            for alpha in [2.0, 6.0, 10.0] {
                let g = stereographic_gradient(alpha, &u).unwrap();
                assert!(g.holds(1e-9), "{g:?}");
            }
        }
    }

    #[test]
    fn radial_energy_scales_exactly() {
        // a slowly decaying profile whose transform has a fractional-power
        // derivative at the origin; the upper bound is attained with equality
        let u = RadialTestFunction::Rational {
            amp: 0.9893324707740926,
            scale: 2.556609344598576,
            power: 2.1038827353526917,
        };
        for alpha in [14.0, 30.0] {
            let g = stereographic_gradient(alpha, &u).unwrap();
            assert!((g.original / (0.5 * alpha * g.transformed) - 1.0).abs() < 1e-12, "{g:?}");
        }
    }
}
