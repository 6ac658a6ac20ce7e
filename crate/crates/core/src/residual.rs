//! Error fields of the ansatz and their `L^p` norms.
//!
//! With `f(s) = e^s − e^{−s}`:
//!
//! ```text
//! R_λ = −ΔW_λ − λ f(W_λ)
//! S_λ = λ f'(W_λ) − Σ_i |x|^{α_i−2} e^{w_i}
//! N_λ(φ) = λ [f(W_λ+φ) − f(W_λ) − f'(W_λ) φ]
//! ```
//!
//! `−ΔW_λ` is never differentiated numerically: it equals
//! `Σ (−1)^i |x|^{α_i−2} e^{w_i}` exactly. The fields are radial, so they
//! are only built for disks.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::RadialField;
use crate::quadrature::GaussLegendre;
use crate::tower::{AnnulusDecomposition, Ansatz};

/// Above this `|W|` only the dominant exponential of `sinh`/`cosh` is kept.
pub const DOMINANT_BRANCH: f64 = 350.0;

/// `λ (e^w − e^{−w})`.
pub fn sinh_term(log_lambda: f64, w: f64) -> f64 {
    if w.abs() > DOMINANT_BRANCH {
        w.signum() * (log_lambda + w.abs()).exp()
    } else {
        (log_lambda + w).exp() - (log_lambda - w).exp()
    }
}

/// `λ (e^w + e^{−w})`.
pub fn cosh_term(log_lambda: f64, w: f64) -> f64 {
    if w.abs() > DOMINANT_BRANCH {
        (log_lambda + w.abs()).exp()
    } else {
        (log_lambda + w).exp() + (log_lambda - w).exp()
    }
}

/// `e^x − 1 − x` without cancellation for small `x`.
pub fn expm1_minus_x(x: f64) -> f64 {
    if x.abs() < 0.05 {
        let mut term = 0.5 * x * x;
        let mut acc = term;
        for n in 3..=9 {
            term *= x / n as f64;
            acc += term;
        }
        acc
    } else {
        x.exp_m1() - x
    }
}

fn require_disk(ansatz: &Ansatz) -> Result<()> {
    if !ansatz.domain.is_disk() {
        return Err(Error::UnsupportedDomain(
            "radial error fields need a disk; rectangles only provide the ansatz".into(),
        ));
    }
    Ok(())
}

/// `Σ_i |x|^{α_i−2} e^{w_i}` at `r = e^{log_r}`.
pub fn potential_log_r(ansatz: &Ansatz, log_r: f64) -> f64 {
    ansatz
        .params
        .profiles()
        .iter()
        .map(|p| p.log_density_log_r(log_r).exp())
        .sum()
}

/// `R_λ` at `r = e^{log_r}`.
pub fn residual_log_r(ansatz: &Ansatz, log_r: f64) -> f64 {
    let w = ansatz.value_log_r(log_r);
    ansatz.neg_laplacian_log_r(log_r) - sinh_term(ansatz.params.log_lambda, w)
}

/// `S_λ` at `r = e^{log_r}`.
pub fn linear_error_log_r(ansatz: &Ansatz, log_r: f64) -> f64 {
    let w = ansatz.value_log_r(log_r);
    cosh_term(ansatz.params.log_lambda, w) - potential_log_r(ansatz, log_r)
}

fn nodal<F: Fn(f64) -> f64>(ansatz: &Ansatz, f: F) -> Result<RadialField> {
    require_disk(ansatz)?;
    let mesh = ansatz.mesh().clone();
    let values = mesh.log_radii().into_iter().map(f).collect();
    RadialField::new(mesh, values)
}

pub fn residual_field(ansatz: &Ansatz) -> Result<RadialField> {
    nodal(ansatz, |s| residual_log_r(ansatz, s))
}

pub fn linear_error_field(ansatz: &Ansatz) -> Result<RadialField> {
    nodal(ansatz, |s| linear_error_log_r(ansatz, s))
}

/// `N_λ(φ)` nodewise as `λe^{W}(e^{φ}−1−φ) − λe^{−W}(e^{−φ}−1+φ)`.
pub fn nonlinear_term(ansatz: &Ansatz, phi: &RadialField) -> Result<RadialField> {
    if !Arc::ptr_eq(phi.mesh(), ansatz.mesh()) && **phi.mesh() != **ansatz.mesh() {
        return Err(Error::InvalidInput(
            "correction lives on a different mesh".into(),
        ));
    }
    let ll = ansatz.params.log_lambda;
    let values = ansatz
        .field
        .values()
        .iter()
        .zip(phi.values())
        .map(|(&w, &p)| nonlinear_pointwise(ll, w, p))
        .collect();
    RadialField::new(phi.mesh().clone(), values)
}

pub fn nonlinear_pointwise(log_lambda: f64, w: f64, phi: f64) -> f64 {
    (log_lambda + w).exp() * expm1_minus_x(phi) - (log_lambda - w).exp() * expm1_minus_x(-phi)
}

/// `R_λ` on `A_j` split into its three mechanisms:
/// self-interaction `(−1)^j V_j (1 − e^{Θ_j})`, the opposite-sign exponential
/// `(−1)^j λ e^{−(−1)^j W}` and the tails `Σ_{i≠j} (−1)^i V_i` of the other
/// bubbles. The three sum to `R_λ`.
#[derive(Debug, Clone)]
pub struct ResidualSplit {
    pub self_interaction: RadialField,
    pub opposite_exponential: RadialField,
    pub cross_tails: RadialField,
}

pub fn residual_split(ansatz: &Ansatz) -> Result<ResidualSplit> {
    require_disk(ansatz)?;
    let mesh = ansatz.mesh().clone();
    let params = &ansatz.params;
    let profiles = params.profiles();
    let n = mesh.len();
    let (mut a, mut b, mut c) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for (node, s) in mesh.log_radii().into_iter().enumerate() {
        let j = ansatz.annuli.annulus_of(s.exp()) - 1;
        let sj = params.sign(j);
        let w = ansatz.value_log_r(s);
        let theta = crate::tower::theta_log_r(ansatz, j, s);
        a[node] = -sj * profiles[j].log_density_log_r(s).exp() * theta.exp_m1();
        b[node] = sj * (params.log_lambda - sj * w).exp();
        c[node] = (0..params.k)
            .filter(|&i| i != j)
            .map(|i| params.sign(i) * profiles[i].log_density_log_r(s).exp())
            .sum();
    }
    Ok(ResidualSplit {
        self_interaction: RadialField::new(mesh.clone(), a)?,
        opposite_exponential: RadialField::new(mesh.clone(), b)?,
        cross_tails: RadialField::new(mesh, c)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub p: f64,
    pub total_norm: f64,
    /// `(j, ‖f‖_{L^p(A_j)})`, one based.
    pub per_annulus: Vec<(usize, f64)>,
    pub quadrature_error_estimate: f64,
}

const CELL_POINTS: usize = 4;

/// `(∫_{A_j} |f|^p dx)` for every annulus, with `f` linear in `ln r` on each
/// mesh cell and constant inside the innermost node.
fn annulus_integrals(s: &[f64], values: &[f64], p: f64, annuli: &AnnulusDecomposition) -> Vec<f64> {
    let rule = GaussLegendre::new(CELL_POINTS);
    let mut out = vec![0.0; annuli.count()];
    let r0 = s[0].exp();
    out[annuli.annulus_of(r0) - 1] += PI * r0 * r0 * values[0].abs().powf(p);
    let cuts: Vec<f64> = annuli.radii[1..annuli.count()]
        .iter()
        .map(|r| r.ln())
        .collect();
    for i in 0..s.len() - 1 {
        let (s0, s1) = (s[i], s[i + 1]);
        let (v0, v1) = (values[i], values[i + 1]);
        let mut edges = vec![s0];
        edges.extend(cuts.iter().copied().filter(|&c| c > s0 && c < s1));
        edges.push(s1);
        for seg in edges.windows(2) {
            let f = |s: f64| {
                let t = (s - s0) / (s1 - s0);
                2.0 * PI * (2.0 * s).exp() * ((1.0 - t) * v0 + t * v1).abs().powf(p)
            };
            let mid = 0.5 * (seg[0] + seg[1]);
            let j = annuli.annulus_of(mid.exp()) - 1;
            out[j] += rule.panel(&f, seg[0], seg[1]);
        }
    }
    out
}

/// `L^p` norm of a radial field over the disk, total and per annulus.
pub fn lp_norm(field: &RadialField, p: f64, annuli: &AnnulusDecomposition) -> Result<NormReport> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidInput(format!(
            "p must be at least 1, got {p}"
        )));
    }
    let mesh = field.mesh();
    let s = mesh.log_radii();
    let fine = annulus_integrals(&s, field.values(), p, annuli);
    let total: f64 = fine.iter().sum();
    // second-order rule: the gap to the every-other-node rule is about 3×
    // the error of the fine one
    let mut keep: Vec<usize> = (0..s.len()).step_by(2).collect();
    if *keep.last().unwrap() != s.len() - 1 {
        keep.push(s.len() - 1);
    }
    let coarse_s: Vec<f64> = keep.iter().map(|&i| s[i]).collect();
    let coarse_v: Vec<f64> = keep.iter().map(|&i| field.values()[i]).collect();
    let coarse: f64 = annulus_integrals(&coarse_s, &coarse_v, p, annuli)
        .iter()
        .sum();
    let quadrature_error_estimate = (total.powf(1.0 / p) - coarse.powf(1.0 / p)).abs() / 3.0;
    Ok(NormReport {
        p,
        total_norm: total.powf(1.0 / p),
        per_annulus: fine
            .iter()
            .enumerate()
            .map(|(j, v)| (j + 1, v.powf(1.0 / p)))
            .collect(),
        quadrature_error_estimate,
    })
}

/// `(2−p)/(2p(2k−1))`, the decay exponent of `‖R_λ‖_p` and `‖S_λ‖_p`.
pub fn error_exponent(k: usize, p: f64) -> f64 {
    (2.0 - p) / (2.0 * p * (2 * k - 1) as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub exponent_fitted: f64,
    pub exponent_predicted: f64,
    pub lambdas: Vec<f64>,
    pub norms: Vec<f64>,
    /// RMS deviation of `ln norm` from the fitted line.
    pub fit_residual: f64,
    /// Fitted exponent below `predicted − tolerance`.
    pub violated: bool,
}

/// Slack allowed below the predicted exponent.
pub const SLOPE_TOLERANCE: f64 = 0.05;

pub fn scaling_fit(lambdas: &[f64], norms: &[f64], predicted: f64) -> Result<ScalingFit> {
    if lambdas.len() != norms.len() {
        return Err(Error::DegenerateSweep(
            "lambda and norm counts differ".into(),
        ));
    }
    if lambdas.len() < 4 {
        return Err(Error::DegenerateSweep(format!(
            "need at least 4 points, got {}",
            lambdas.len()
        )));
    }
    if lambdas.windows(2).any(|w| !(w[1] < w[0])) || lambdas.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::DegenerateSweep(
            "lambdas must be positive and strictly decreasing".into(),
        ));
    }
    if (lambdas[0] / lambdas[lambdas.len() - 1]).log10() < 3.0 - 1e-9 {
        return Err(Error::DegenerateSweep(
            "sweep spans fewer than 3 decades".into(),
        ));
    }
    if norms.iter().any(|&n| !(n > 0.0) || !n.is_finite()) {
        return Err(Error::DegenerateSweep(
            "norms must be positive and finite".into(),
        ));
    }
    let x: Vec<f64> = lambdas.iter().map(|l| l.ln()).collect();
    let y: Vec<f64> = norms.iter().map(|n| n.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let rms = (x
        .iter()
        .zip(&y)
        .map(|(a, b)| (b - my - slope * (a - mx)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(ScalingFit {
        exponent_fitted: slope,
        exponent_predicted: predicted,
        lambdas: lambdas.to_vec(),
        norms: norms.to_vec(),
        fit_residual: rms,
        violated: slope < predicted - SLOPE_TOLERANCE,
    })
}

/// Geometric sweep from `from` down to `to` with `points` entries.
pub fn geometric_sweep(from: f64, to: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 || !(from > 0.0) || !(to > 0.0) {
        return Err(Error::DegenerateSweep(
            "a sweep needs two positive ends and at least 2 points".into(),
        ));
    }
    let (a, b) = (from.ln(), to.ln());
    Ok((0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
        .collect())
}

/// `‖R_λ‖_p` and `‖S_λ‖_p` with their annulus breakdown.
pub fn residual_norms(ansatz: &Ansatz, p: f64) -> Result<(NormReport, NormReport)> {
    let r = lp_norm(&residual_field(ansatz)?, p, &ansatz.annuli)?;
    let s = lp_norm(&linear_error_field(ansatz)?, p, &ansatz.annuli)?;
    Ok((r, s))
}
