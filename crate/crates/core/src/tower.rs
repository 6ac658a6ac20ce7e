//! The bubble tower: parameters, projected bubbles, the ansatz `W_λ`, its
//! annuli and the interaction function `Θ_j`.
//!
//! Level `i = 1..k` (stored at index `i − 1`) carries `α_i = 4i − 2` and a
//! scale `δ_i`, with `δ_1 ≪ … ≪ δ_k`. Scales are handled through
//! `a_i = α_i ln δ_i`, fixed by requiring the constant part of `Θ_j` to
//! vanish for every `j`:
//!
//! ```text
//! a_k = ln λ − ln(2α_k²) + S_k
//! a_j = a_{j+1} + 2 ln λ − ln(4α_j²α_{j+1}²)
//! S_j = Σ_i (−1)^{i−j} h_i(0) = (−1)^{k−j} 8kπ H(0,0)
//! ```

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::greens::{harmonic_extension, DomainSpec, GreenData, HarmonicExtension, HarmonicGrid};
use crate::limit_profiles::Profile;
use crate::mesh::{RadialField, RadialMesh, DEFAULT_NODES_PER_UNIT};

/// Minimum radial resolution accepted for an ansatz.
pub const MIN_NODES_PER_DECADE: f64 = 8.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BubbleParams {
    pub k: usize,
    pub lambda: f64,
    pub log_lambda: f64,
    pub alpha: Vec<f64>,
    pub log_delta: Vec<f64>,
    pub d: Vec<f64>,
    pub h00: f64,
    /// `h_i(0) = 4π α_i H(0,0)`.
    pub h: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// `α_i = 4i − 2`.
pub fn alpha_of(i: usize) -> f64 {
    (4 * i - 2) as f64
}

/// Exponent of `λ` in `δ_i = d_i λ^{(2(k−i)+1)/α_i}`.
pub fn delta_exponent(k: usize, i: usize) -> f64 {
    (2 * (k - i) + 1) as f64 / alpha_of(i)
}

/// Parameter selection in log variables; `lambda` may be given only through
/// its logarithm to reach scales below the double range.
pub fn select_parameters(k: usize, lambda: f64, h00: f64) -> Result<BubbleParams> {
    ensure_finite("lambda", lambda)?;
    if lambda <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    select_parameters_log(k, lambda.ln(), h00)
}

pub fn select_parameters_log(k: usize, log_lambda: f64, h00: f64) -> Result<BubbleParams> {
    ensure_finite("log_lambda", log_lambda)?;
    ensure_finite("h00", h00)?;
    if k == 0 {
        return Err(Error::InvalidInput(
            "a tower needs at least one bubble (k >= 1)".into(),
        ));
    }
    let mut warnings = Vec::new();
    if log_lambda >= 0.0 {
        warnings.push(format!(
            "lambda = {:.3e} is not below 1; the ansatz is built but its error estimates do not apply",
            log_lambda.exp()
        ));
    }
    let alpha: Vec<f64> = (1..=k).map(alpha_of).collect();
    let h: Vec<f64> = alpha.iter().map(|a| 4.0 * PI * a * h00).collect();
    let s_k = 8.0 * k as f64 * PI * h00;
    let mut a = vec![0.0; k];
    a[k - 1] = log_lambda - (2.0 * alpha[k - 1].powi(2)).ln() + s_k;
    for j in (0..k - 1).rev() {
        a[j] = a[j + 1] + 2.0 * log_lambda - (4.0 * alpha[j].powi(2) * alpha[j + 1].powi(2)).ln();
    }
    let log_delta: Vec<f64> = a.iter().zip(&alpha).map(|(a, al)| a / al).collect();
    let d = (1..=k)
        .map(|i| (log_delta[i - 1] - delta_exponent(k, i) * log_lambda).exp())
        .collect();
    Ok(BubbleParams {
        k,
        lambda: log_lambda.exp(),
        log_lambda,
        alpha,
        log_delta,
        d,
        h00,
        h,
        warnings,
    })
}

impl BubbleParams {
    pub fn profile(&self, i: usize) -> Profile {
        Profile {
            alpha: self.alpha[i],
            log_delta: self.log_delta[i],
        }
    }

    pub fn profiles(&self) -> Vec<Profile> {
        (0..self.k).map(|i| self.profile(i)).collect()
    }

    /// `(−1)^i` for level index `i` (zero based, level `i + 1`).
    pub fn sign(&self, i: usize) -> f64 {
        if (i + 1).is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    /// `S_j = Σ_i (−1)^{i−j} h_i(0)` for zero-based `j`.
    pub fn alternating_h(&self, j: usize) -> f64 {
        (0..self.k)
            .map(|i| {
                if (i + j).is_multiple_of(2) {
                    self.h[i]
                } else {
                    -self.h[i]
                }
            })
            .sum()
    }

    /// Left side of the balance equation for level `j`; zero for a
    /// consistent parameter set.
    pub fn balance(&self, j: usize) -> f64 {
        let a = |i: usize| self.alpha[i] * self.log_delta[i];
        let tail: f64 = (j + 1..self.k)
            .map(|i| if (i - j).is_multiple_of(2) { a(i) } else { -a(i) })
            .sum();
        -(2.0 * self.alpha[j].powi(2)).ln() - a(j) - 2.0 * tail
            + self.alternating_h(j)
            + self.log_lambda
    }

    /// `ln(δ_i/δ_{i+1})` for zero-based `i < k − 1`.
    pub fn log_delta_ratio(&self, i: usize) -> f64 {
        self.log_delta[i] - self.log_delta[i + 1]
    }

    /// Table rows `(i, α_i, δ_i, d_i, exponent)`.
    pub fn table_csv(&self) -> String {
        let mut out = String::from("i,alpha,delta,log_delta,d,exponent\n");
        for i in 0..self.k {
            out.push_str(&format!(
                "{},{},{:e},{},{},{}\n",
                i + 1,
                self.alpha[i],
                self.log_delta[i].exp(),
                self.log_delta[i],
                self.d[i],
                delta_exponent(self.k, i + 1)
            ));
        }
        out
    }
}

/// `Σ (−1)^i α_i`, checked against `(−1)^k 2k`.
pub fn check_alternating_sum(params: &BubbleParams) -> Result<i64> {
    let sum: i64 = (1..=params.k as i64)
        .map(|i| if i % 2 == 0 { 4 * i - 2 } else { -(4 * i - 2) })
        .sum();
    let k = params.k as i64;
    let expected = if k % 2 == 0 { 2 * k } else { -2 * k };
    if sum != expected {
        return Err(Error::InvalidInput(format!(
            "alternating sum {sum} differs from {expected}"
        )));
    }
    Ok(sum)
}

/// `(α_j − 2) + 2 Σ_{i<j} (−1)^{i−j} α_i` in integers, for `j = 1..k`.
/// Every entry vanishes.
pub fn log_coefficient_identity(k: usize) -> Vec<i64> {
    (1..=k as i64)
        .map(|j| {
            let inner: i64 = (1..j)
                .map(|i| {
                    if (j - i) % 2 == 0 {
                        4 * i - 2
                    } else {
                        -(4 * i - 2)
                    }
                })
                .sum();
            (4 * j - 4) + 2 * inner
        })
        .collect()
}

/// Annuli `A_j = {√(δ_{j−1}δ_j) ≤ |x| ≤ √(δ_jδ_{j+1})}` with `δ_0 = 0` and
/// the outer boundary clipped to `radius`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnulusDecomposition {
    pub radii: Vec<f64>,
}

impl AnnulusDecomposition {
    pub fn new(params: &BubbleParams, radius: f64) -> Result<Self> {
        let mut radii = Vec::with_capacity(params.k + 1);
        radii.push(0.0);
        for j in 0..params.k - 1 {
            radii.push((0.5 * (params.log_delta[j] + params.log_delta[j + 1])).exp());
        }
        radii.push(radius);
        if radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput(format!(
                "annulus radii are not increasing: {radii:?} (is delta_k below the domain size?)"
            )));
        }
        Ok(Self { radii })
    }

    pub fn count(&self) -> usize {
        self.radii.len() - 1
    }

    /// Bounds of annulus `j` (one based).
    pub fn bounds(&self, j: usize) -> (f64, f64) {
        (self.radii[j - 1], self.radii[j])
    }

    /// One-based annulus containing `r`; boundaries belong to the inner one.
    pub fn annulus_of(&self, r: f64) -> usize {
        self.radii[1..]
            .iter()
            .position(|&b| r <= b)
            .map_or(self.count(), |p| p + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionMode {
    /// `Pw = w + harmonic extension of −w|∂Ω`.
    #[default]
    Exact,
    /// `Pw = w − ln(2α²δ^α) + 4πα H(x,0)`.
    Asymptotic,
}

#[derive(Debug, Clone)]
enum Correction {
    Constant(f64),
    Robin {
        constant: f64,
        scale: f64,
        green: Arc<GreenData>,
    },
    Harmonic(Arc<HarmonicExtension>),
}

/// A bubble projected onto `H¹_0(Ω)`.
#[derive(Debug, Clone)]
pub struct ProjectedBubble {
    pub profile: Profile,
    correction: Correction,
}

impl ProjectedBubble {
    /// Harmonic correction `Pw − w` at `x`.
    pub fn correction(&self, x: [f64; 2]) -> f64 {
        match &self.correction {
            Correction::Constant(c) => *c,
            Correction::Robin {
                constant,
                scale,
                green,
            } => constant + scale * green.regular_part(x).unwrap_or(f64::NAN),
            Correction::Harmonic(h) => h.eval(x).unwrap_or(f64::NAN),
        }
    }

    /// The correction when it does not depend on `x` (disks).
    pub fn constant_correction(&self) -> Option<f64> {
        match self.correction {
            Correction::Constant(c) => Some(c),
            _ => None,
        }
    }

    pub fn value(&self, x: [f64; 2]) -> f64 {
        self.profile.value(x[0].hypot(x[1])) + self.correction(x)
    }

    /// Value on the positive `x` axis at `r = e^{log_r}`.
    pub fn value_log_r(&self, log_r: f64) -> f64 {
        let c = match self.correction {
            Correction::Constant(c) => c,
            _ => self.correction([log_r.exp(), 0.0]),
        };
        self.profile.value_log_r(log_r) + c
    }
}

pub fn project_bubble(
    green: &Arc<GreenData>,
    profile: Profile,
    mode: ProjectionMode,
) -> Result<ProjectedBubble> {
    let inradius = green.domain.inradius();
    if profile.log_delta >= inradius.ln() {
        return Err(Error::InvalidInput(format!(
            "bubble scale {:.3e} is not below the domain inradius {inradius}",
            profile.delta()
        )));
    }
    let a = profile.alpha;
    let asymptotic_constant = -((2.0 * a * a).ln() + a * profile.log_delta);
    let correction = match (&green.domain, mode) {
        (DomainSpec::Disk { radius }, ProjectionMode::Exact) => {
            Correction::Constant(-profile.value(*radius))
        }
        (DomainSpec::Disk { .. }, ProjectionMode::Asymptotic) => {
            Correction::Constant(asymptotic_constant + 4.0 * PI * a * green.h00)
        }
        (DomainSpec::Rectangle { .. }, ProjectionMode::Exact) => {
            let ext = harmonic_extension(&green.domain, |x, y| -profile.value(x.hypot(y)))?;
            Correction::Harmonic(Arc::new(ext))
        }
        (DomainSpec::Rectangle { .. }, ProjectionMode::Asymptotic) => Correction::Robin {
            constant: asymptotic_constant,
            scale: 4.0 * PI * a,
            green: green.clone(),
        },
    };
    Ok(ProjectedBubble {
        profile,
        correction,
    })
}

/// `W_λ = Σ (−1)^i Pw_i` with its radial samples.
#[derive(Debug, Clone)]
pub struct Ansatz {
    pub params: BubbleParams,
    pub domain: DomainSpec,
    pub mode: ProjectionMode,
    pub annuli: AnnulusDecomposition,
    pub bubbles: Vec<ProjectedBubble>,
    /// `Pw_i` on the radial mesh (along the positive `x` axis for
    /// rectangles).
    pub levels: Vec<RadialField>,
    pub field: RadialField,
    /// `W_λ` at the nodes of the rectangle grid.
    pub plane: Option<HarmonicGrid>,
}

/// Assembles the ansatz on the default tower mesh.
pub fn assemble_ansatz(
    params: &BubbleParams,
    domain: &DomainSpec,
    mode: ProjectionMode,
) -> Result<Ansatz> {
    let mesh = RadialMesh::for_scale(
        params.log_delta[0],
        domain.inradius(),
        DEFAULT_NODES_PER_UNIT,
    )?;
    assemble_on_mesh(
        params,
        &Arc::new(GreenData::new(domain)?),
        mode,
        Arc::new(mesh),
    )
}

pub fn assemble_on_mesh(
    params: &BubbleParams,
    green: &Arc<GreenData>,
    mode: ProjectionMode,
    mesh: Arc<RadialMesh>,
) -> Result<Ansatz> {
    mesh.require_density(MIN_NODES_PER_DECADE)?;
    let domain = green.domain.clone();
    if (mesh.radius() - domain.inradius()).abs() > 1e-12 * domain.inradius() {
        return Err(Error::InvalidInput(
            "radial mesh must end at the domain inradius".into(),
        ));
    }
    if mesh.r_min() > params.log_delta[0].exp() {
        return Err(Error::InvalidInput(
            "radial mesh does not reach the innermost bubble".into(),
        ));
    }
    let annuli = AnnulusDecomposition::new(params, domain.inradius())?;
    let bubbles = params
        .profiles()
        .into_iter()
        .map(|p| project_bubble(green, p, mode))
        .collect::<Result<Vec<_>>>()?;
    let levels: Vec<RadialField> = bubbles
        .iter()
        .map(|b| {
            let vals = mesh
                .log_radii()
                .into_iter()
                .map(|s| b.value_log_r(s))
                .collect();
            RadialField::new(mesh.clone(), vals)
        })
        .collect::<Result<_>>()?;
    let mut w = vec![0.0; mesh.len()];
    for (i, level) in levels.iter().enumerate() {
        let sign = params.sign(i);
        for (acc, v) in w.iter_mut().zip(level.values()) {
            *acc += sign * v;
        }
    }
    let field = RadialField::new(mesh.clone(), w)?;
    let plane = match domain {
        DomainSpec::Disk { .. } => None,
        DomainSpec::Rectangle {
            half_width,
            half_height,
            ..
        } => {
            let (nx, ny) = domain.grid_shape().expect("rectangle");
            let grid = HarmonicGrid::from_fn(half_width, half_height, nx, ny, |x, y| {
                bubbles
                    .iter()
                    .enumerate()
                    .map(|(i, b)| params.sign(i) * b.value([x, y]))
                    .sum()
            });
            let scale = grid.values().iter().fold(1.0_f64, |m, v| m.max(v.abs()));
            if grid.reflection_defect() > 1e-10 * scale {
                return Err(Error::InvalidInput("assembled ansatz is not even".into()));
            }
            Some(grid)
        }
    };
    Ok(Ansatz {
        params: params.clone(),
        domain,
        mode,
        annuli,
        bubbles,
        levels,
        field,
        plane,
    })
}

impl Ansatz {
    pub fn mesh(&self) -> &Arc<RadialMesh> {
        self.field.mesh()
    }

    /// `W_λ(x)` from the closed forms.
    pub fn value(&self, x: [f64; 2]) -> f64 {
        self.bubbles
            .iter()
            .enumerate()
            .map(|(i, b)| self.params.sign(i) * b.value(x))
            .sum()
    }

    /// `W_λ` on the positive `x` axis at `r = e^{log_r}`.
    pub fn value_log_r(&self, log_r: f64) -> f64 {
        self.bubbles
            .iter()
            .enumerate()
            .map(|(i, b)| self.params.sign(i) * b.value_log_r(log_r))
            .sum()
    }

    /// `Σ (−1)^i r^{α_i−2} e^{w_i}`, the exact `−ΔW_λ`.
    pub fn neg_laplacian_log_r(&self, log_r: f64) -> f64 {
        self.params
            .profiles()
            .iter()
            .enumerate()
            .map(|(i, p)| self.params.sign(i) * p.log_density_log_r(log_r).exp())
            .sum()
    }

    /// Largest `|W_λ|` on the boundary. On disks that is the last radial
    /// node; on rectangles the radial samples end at the inradius, which is
    /// off the boundary along the long axis, so the grid boundary is used.
    pub fn boundary_defect(&self) -> f64 {
        match &self.plane {
            Some(g) => g.boundary_sup(),
            None => self.field.values().last().copied().unwrap_or(0.0).abs(),
        }
    }

    /// Largest `|W_λ(x) − W_λ(−x)|` over the rectangle grid; zero on disks.
    pub fn evenness_defect(&self) -> f64 {
        self.plane.as_ref().map_or(0.0, |g| g.reflection_defect())
    }
}

/// `Θ_j` at scaled radius `|y|` with a flag telling whether `δ_j y` lies in
/// `A_j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaValue {
    pub value: f64,
    pub in_annulus: bool,
}

/// `Θ_j(y) = (−1)^j W_λ(δ_j y) − w_j(δ_j y) − (α_j − 2) ln|δ_j y| + ln λ`,
/// with one-based `j`. On the disk the result is radial; on rectangles `y`
/// is taken on the positive `x` axis.
pub fn theta(ansatz: &Ansatz, j: usize, y: f64) -> Result<ThetaValue> {
    let params = &ansatz.params;
    if j == 0 || j > params.k {
        return Err(Error::InvalidInput(format!(
            "level j = {j} outside 1..={}",
            params.k
        )));
    }
    ensure_finite("y", y)?;
    if y < 0.0 {
        return Err(Error::InvalidInput(
            "scaled radius must be nonnegative".into(),
        ));
    }
    let idx = j - 1;
    let log_r = params.log_delta[idx] + y.ln();
    let (lo, hi) = ansatz.annuli.bounds(j);
    let r = log_r.exp();
    let in_annulus = r >= lo * (1.0 - 1e-12) && r <= hi * (1.0 + 1e-12);
    Ok(ThetaValue {
        value: theta_log_r(ansatz, idx, log_r),
        in_annulus,
    })
}

/// `Θ_j` at `r = e^{log_r}` (zero-based level), summing the bubbles
/// relative to level `j` so the `w_j` terms cancel exactly.
pub fn theta_log_r(ansatz: &Ansatz, idx: usize, log_r: f64) -> f64 {
    let params = &ansatz.params;
    let mut acc = 0.0;
    for (i, b) in ansatz.bubbles.iter().enumerate() {
        let rel = if (i + idx).is_multiple_of(2) { 1.0 } else { -1.0 };
        if i == idx {
            acc += b.value_log_r(log_r) - b.profile.value_log_r(log_r);
        } else {
            acc += rel * b.value_log_r(log_r);
        }
    }
    let power = if params.alpha[idx] == 2.0 {
        0.0
    } else {
        (params.alpha[idx] - 2.0) * log_r
    };
    acc - power + params.log_lambda
}

/// Sup of `|Θ_j|` and of `|Θ_j|/(δ_j|y| + λ)` over `A_j`, sampled at
/// `samples` log-spaced radii.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaSup {
    pub j: usize,
    pub sup_abs: f64,
    pub sup_ratio: f64,
}

pub fn theta_sup(ansatz: &Ansatz, j: usize, samples: usize) -> Result<ThetaSup> {
    if j == 0 || j > ansatz.params.k {
        return Err(Error::InvalidInput(format!(
            "level j = {j} outside 1..={}",
            ansatz.params.k
        )));
    }
    let idx = j - 1;
    let (lo, hi) = ansatz.annuli.bounds(j);
    let lambda = ansatz.params.lambda;
    let log_hi = hi.ln();
    // the innermost annulus is a disk; sample down to well inside δ_1
    let log_lo = if lo == 0.0 {
        ansatz.params.log_delta[0] - 12.0
    } else {
        lo.ln()
    };
    let n = samples.max(2);
    let mut out = ThetaSup {
        j,
        sup_abs: 0.0,
        sup_ratio: 0.0,
    };
    for s in 0..n {
        let log_r = log_lo + (log_hi - log_lo) * s as f64 / (n - 1) as f64;
        let t = theta_log_r(ansatz, idx, log_r).abs();
        out.sup_abs = out.sup_abs.max(t);
        out.sup_ratio = out.sup_ratio.max(t / (log_r.exp() + lambda));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk_ansatz(k: usize, lambda: f64) -> Ansatz {
        let p = select_parameters(k, lambda, 0.0).unwrap();
        assemble_ansatz(&p, &DomainSpec::unit_disk(), ProjectionMode::Exact).unwrap()
    }

    #[test]
    fn alphas_and_alternating_sum() {
        let p = select_parameters(3, 1e-3, 0.0).unwrap();
        assert_eq!(p.alpha, vec![2.0, 6.0, 10.0]);
        assert_eq!(check_alternating_sum(&p).unwrap(), -6);
        assert_eq!(
            check_alternating_sum(&select_parameters(1, 0.1, 0.0).unwrap()).unwrap(),
            -2
        );
        assert_eq!(
            check_alternating_sum(&select_parameters(4, 0.1, 0.0).unwrap()).unwrap(),
            8
        );
    }

    #[test]
    fn single_bubble_scale() {
        let p = select_parameters(1, 1e-3, 0.0).unwrap();
        let delta = p.log_delta[0].exp();
        assert!((delta - (1e-3f64 / 8.0).sqrt()).abs() < 1e-15);
        assert!((delta - 1.1180e-2).abs() < 1e-6);
    }

    #[test]
    fn two_bubble_scales() {
        for lambda in [1e-2, 1e-3, 1e-6] {
            let p = select_parameters(2, lambda, 0.0).unwrap();
            let d2 = (lambda / 72.0).powf(1.0 / 6.0);
            let d1 = lambda.powf(1.5) / (144.0 * 2f64.sqrt());
            assert!((p.log_delta[1].exp() / d2 - 1.0).abs() < 1e-13);
            assert!((p.log_delta[0].exp() / d1 - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn identities() {
        for k in 1..=8 {
            assert!(log_coefficient_identity(k).iter().all(|&v| v == 0));
        }
        for k in 1..=6 {
            for lambda in [1e-2, 1e-5, 1e-8] {
                for h00 in [0.0, 0.0120578] {
                    let p = select_parameters(k, lambda, h00).unwrap();
                    for j in 0..k {
                        assert!(p.balance(j).abs() < 1e-9, "k={k} j={j}");
                    }
                }
            }
        }
    }

    #[test]
    fn warns_for_large_lambda() {
        let p = select_parameters(1, 2.0, 0.0).unwrap();
        assert_eq!(p.warnings.len(), 1);
        assert!(select_parameters(1, 1e-3, 0.0).unwrap().warnings.is_empty());
        assert!(select_parameters(0, 1e-3, 0.0).is_err());
        assert!(select_parameters(1, -1.0, 0.0).is_err());
    }

    #[test]
    fn annuli_are_nested() {
        let p = select_parameters(3, 1e-4, 0.0).unwrap();
        let a = AnnulusDecomposition::new(&p, 1.0).unwrap();
        assert_eq!(a.count(), 3);
        assert_eq!(a.annulus_of(p.log_delta[0].exp()), 1);
        assert_eq!(a.annulus_of(p.log_delta[1].exp()), 2);
        assert_eq!(a.annulus_of(0.9), 3);
    }

    #[test]
    fn disk_projection_constant() {
        let green = Arc::new(GreenData::new(&DomainSpec::unit_disk()).unwrap());
        let prof = Profile::new(2.0, 0.1).unwrap();
        let exact = project_bubble(&green, prof, ProjectionMode::Exact).unwrap();
        let asym = project_bubble(&green, prof, ProjectionMode::Asymptotic).unwrap();
        let c = exact.constant_correction().unwrap();
        assert!((c + 0.08f64.ln()).abs() < 0.03);
        assert!((c - asym.constant_correction().unwrap()).abs() <= 2.0 * 0.01 * 1.01);
        assert!(exact.value([1.0, 0.0]).abs() < 1e-14);
    }

    #[test]
    fn single_bubble_ansatz_is_nonpositive() {
        let a = disk_ansatz(1, 1e-3);
        assert!(a.field.values().iter().all(|&v| v <= 1e-14));
        assert!(a.boundary_defect() < 1e-13);
    }

    #[test]
    fn two_bubble_sign_at_outer_scale() {
        let a = disk_ansatz(2, 1e-3);
        assert!(a.value_log_r(a.params.log_delta[1]) > 0.0);
    }

    #[test]
    fn theta_single_bubble_closed_form() {
        for lambda in [1e-2, 1e-4] {
            let a = disk_ansatz(1, lambda);
            let t = theta(&a, 1, 1.0).unwrap();
            let delta2 = lambda / 8.0;
            assert!(
                (t.value - 2.0 * delta2.ln_1p()).abs() < 1e-12,
                "{}",
                t.value
            );
            assert!(t.in_annulus);
        }
    }

    #[test]
    fn undersampled_mesh_rejected() {
        let p = select_parameters(1, 1e-3, 0.0).unwrap();
        let green = Arc::new(GreenData::new(&DomainSpec::unit_disk()).unwrap());
        let mesh = RadialMesh::with_intervals((p.log_delta[0] - 6.0).exp(), 1.0, 10).unwrap();
        assert!(matches!(
            assemble_on_mesh(&p, &green, ProjectionMode::Exact, Arc::new(mesh)),
            Err(Error::MeshTooCoarse { .. })
        ));
    }
}
