//! Correction of the ansatz to a discrete solution and the checks run on it.
//!
//! The discrete problem, for `u = W_λ + φ` on a disk, is
//!
//! ```text
//! K φ = M (λ f(W_λ + φ) − g),     g = Σ (−1)^i |x|^{α_i−2} e^{w_i} = −ΔW_λ
//! ```
//!
//! with `K` the radial stiffness and `M` the lumped `r² ds` weights, so the
//! ansatz contributes its exact Laplacian and only `φ` is discretised.
//! [`contraction_iterate`] solves it as `φ = L⁻¹(N(φ) + Sφ − R)` and
//! [`newton_solve`] by damped Newton; both reach the same fixed point.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::greens::{DomainSpec, GreenData};
use crate::linalg::SymTridiag;
use crate::mesh::{RadialField, RadialMesh};
use crate::quadrature::GaussLegendre;
use crate::residual::{cosh_term, nonlinear_pointwise, potential_log_r, residual_log_r, sinh_term};
use crate::tower::{assemble_on_mesh, select_parameters, Ansatz, ProjectionMode};

pub const DEFAULT_TOL: f64 = 1e-12;
const ARMIJO_C: f64 = 1e-4;
const MAX_HALVINGS: usize = 20;
const DIVERGENCE_STREAK: usize = 3;

/// The discrete equation around a fixed base field `W`.
#[derive(Debug, Clone)]
pub struct Problem {
    pub mesh: Arc<RadialMesh>,
    pub log_lambda: f64,
    /// `W` at every node, zero at the outer one.
    pub base: Vec<f64>,
    /// `−ΔW` at the unknown nodes.
    pub base_laplacian: Vec<f64>,
    weights: Vec<f64>,
    stiffness: SymTridiag,
}

impl Problem {
    pub fn from_ansatz(ansatz: &Ansatz) -> Result<Self> {
        if !ansatz.domain.is_disk() {
            return Err(Error::UnsupportedDomain(
                "the radial solver needs a disk".into(),
            ));
        }
        if ansatz.mode != ProjectionMode::Exact {
            return Err(Error::InvalidInput(
                "the solver needs the exact projection (W = 0 on the boundary)".into(),
            ));
        }
        let mesh = ansatz.mesh().clone();
        let base = ansatz.field.values().to_vec();
        let base_laplacian = (0..mesh.intervals())
            .map(|i| ansatz.neg_laplacian_log_r(mesh.s(i)))
            .collect();
        Ok(Self::assemble(
            mesh,
            ansatz.params.log_lambda,
            base,
            base_laplacian,
        ))
    }

    /// `W = 0`: the plain problem `−Δu = λ f(u)`.
    pub fn plain(mesh: Arc<RadialMesh>, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidInput(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        let n = mesh.len();
        Ok(Self::assemble(
            mesh,
            lambda.ln(),
            vec![0.0; n],
            vec![0.0; n - 1],
        ))
    }

    fn assemble(
        mesh: Arc<RadialMesh>,
        log_lambda: f64,
        base: Vec<f64>,
        base_laplacian: Vec<f64>,
    ) -> Self {
        let weights = mesh.equation_weights();
        let stiffness = mesh.stiffness(0);
        Self {
            mesh,
            log_lambda,
            base,
            base_laplacian,
            weights,
            stiffness,
        }
    }

    pub fn unknowns(&self) -> usize {
        self.weights.len()
    }

    /// `F(φ) = Kφ − M(λ f(W+φ) − g)`.
    pub fn residual(&self, phi: &[f64]) -> Vec<f64> {
        let mut out = self.stiffness.matvec(phi);
        for i in 0..out.len() {
            let u = self.base[i] + phi[i];
            out[i] -= self.weights[i] * (sinh_term(self.log_lambda, u) - self.base_laplacian[i]);
        }
        out
    }

    pub fn jacobian(&self, phi: &[f64]) -> SymTridiag {
        let d: Vec<f64> = (0..self.unknowns())
            .map(|i| -self.weights[i] * cosh_term(self.log_lambda, self.base[i] + phi[i]))
            .collect();
        self.stiffness.add_diagonal(&d)
    }

    fn with_boundary(&self, mut phi: Vec<f64>) -> RadialField {
        phi.push(0.0);
        RadialField::new(self.mesh.clone(), phi).expect("length matches")
    }

    fn solution(&self, phi: &[f64]) -> RadialField {
        let mut u: Vec<f64> = self.base.clone();
        for (a, b) in u.iter_mut().zip(phi) {
            *a += b;
        }
        RadialField::new(self.mesh.clone(), u).expect("length matches")
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Contraction,
    Newton,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveResult {
    pub method: Method,
    pub k: usize,
    pub lambda: f64,
    pub domain: DomainSpec,
    #[serde(skip)]
    pub u: RadialField,
    #[serde(skip)]
    pub phi: RadialField,
    /// `‖∇φ‖_{L²}`.
    pub phi_norm: f64,
    pub phi_sup: f64,
    pub m_plus: f64,
    pub m_minus: f64,
    /// Residual norms (Newton) or step norms (contraction), one per
    /// iteration.
    pub iterations: Vec<f64>,
    pub farfield_gap: f64,
    /// Largest observed step ratio of the fixed-point iteration.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub contraction_ratio: Option<f64>,
    pub final_residual: f64,
    pub sign_changes: usize,
    /// Sup norms of the Newton steps (empty for the fixed-point path).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub newton_steps: Vec<f64>,
}

/// Which parts of `T(φ) = L⁻¹(N(φ) + Sφ − R)` are kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContractionTerms {
    pub nonlinear: bool,
    pub linear_error: bool,
}

impl Default for ContractionTerms {
    fn default() -> Self {
        Self {
            nonlinear: true,
            linear_error: true,
        }
    }
}

pub fn contraction_iterate(ansatz: &Ansatz, max_iter: usize, tol: f64) -> Result<SolveResult> {
    contraction_iterate_with(ansatz, max_iter, tol, ContractionTerms::default())
}

pub fn contraction_iterate_with(
    ansatz: &Ansatz,
    max_iter: usize,
    tol: f64,
    terms: ContractionTerms,
) -> Result<SolveResult> {
    let problem = Problem::from_ansatz(ansatz)?;
    let mesh = problem.mesh.clone();
    let n = problem.unknowns();
    let ll = problem.log_lambda;
    let s: Vec<f64> = (0..n).map(|i| mesh.s(i)).collect();
    let v: Vec<f64> = s.iter().map(|&x| potential_log_r(ansatz, x)).collect();
    let r: Vec<f64> = s.iter().map(|&x| residual_log_r(ansatz, x)).collect();
    let lin: Vec<f64> = (0..n)
        .map(|i| cosh_term(ll, problem.base[i]) - v[i])
        .collect();
    let shift: Vec<f64> = v
        .iter()
        .zip(&problem.weights)
        .map(|(v, w)| -v * w)
        .collect();
    let op = problem.stiffness.add_diagonal(&shift).factor()?;

    let step_norm = |a: &[f64], b: &[f64]| {
        let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        (2.0 * PI * problem.stiffness.quadratic_form(&d)).sqrt()
    };
    let mut phi = vec![0.0; n];
    let mut history = Vec::new();
    let mut ratios = Vec::new();
    let mut streak = 0;
    for it in 0..max_iter {
        let rhs: Vec<f64> = (0..n)
            .map(|i| {
                let mut t = -r[i];
                if terms.nonlinear {
                    t += nonlinear_pointwise(ll, problem.base[i], phi[i]);
                }
                if terms.linear_error {
                    t += lin[i] * phi[i];
                }
                problem.weights[i] * t
            })
            .collect();
        let next = op.solve(&rhs);
        let step = step_norm(&next, &phi);
        phi = next;
        if let Some(&prev) = history.last() {
            if step > 0.0 && prev > 0.0 {
                let ratio = step / prev;
                ratios.push(ratio);
                streak = if ratio >= 1.0 { streak + 1 } else { 0 };
                if streak >= DIVERGENCE_STREAK {
                    return Err(Error::Diverged {
                        iterations: it + 1,
                        ratio,
                    });
                }
            }
        }
        history.push(step);
        if !step.is_finite() {
            return Err(Error::Diverged {
                iterations: it + 1,
                ratio: f64::INFINITY,
            });
        }
        if step < tol {
            let contraction_ratio = ratios
                .iter()
                .zip(&history)
                .filter(|(_, &h)| h > 1e3 * tol)
                .map(|(r, _)| *r)
                .fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.max(r))));
            let mut result = finish(ansatz, &problem, phi, history, Method::Contraction)?;
            result.contraction_ratio = contraction_ratio.or(Some(0.0));
            return Ok(result);
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual: *history.last().unwrap_or(&f64::NAN),
    })
}

/// Iterate and histories of a Newton run.
#[derive(Debug, Clone)]
pub struct NewtonRun {
    pub phi: Vec<f64>,
    /// `‖F‖₂` before the first and after every step.
    pub residuals: Vec<f64>,
    /// Sup norm of every accepted step.
    pub steps: Vec<f64>,
}

/// Damped Newton from `phi0` (zero when `None`).
pub fn newton_on(
    problem: &Problem,
    phi0: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
) -> Result<NewtonRun> {
    let n = problem.unknowns();
    let mut phi = phi0.map_or_else(|| vec![0.0; n], |p| p[..n].to_vec());
    let mut f = problem.residual(&phi);
    let mut fnorm = norm2(&f);
    let mut history = vec![fnorm];
    let mut steps = Vec::new();
    for it in 0..max_iter {
        let jac = problem.jacobian(&phi).factor()?;
        let delta = jac.solve(&f);
        let dnorm = delta.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial: Vec<f64> = phi.iter().zip(&delta).map(|(p, d)| p - t * d).collect();
            let ft = problem.residual(&trial);
            let nt = norm2(&ft);
            if nt.is_finite() && (nt <= (1.0 - ARMIJO_C * t) * fnorm || dnorm * t < tol) {
                accepted = Some((trial, ft, nt));
                break;
            }
            t *= 0.5;
        }
        let Some((trial, ft, nt)) = accepted else {
            return Err(Error::LineSearch {
                iteration: it,
                residual: fnorm,
            });
        };
        phi = trial;
        f = ft;
        fnorm = nt;
        history.push(fnorm);
        steps.push(dnorm * t);
        if dnorm * t < tol {
            return Ok(NewtonRun {
                phi,
                residuals: history,
                steps,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual: fnorm,
    })
}

/// Newton on the discrete problem of `ansatz`, started from `u0 − W_λ`
/// (from `W_λ` itself when `u0` is `None`).
pub fn newton_solve(ansatz: &Ansatz, u0: Option<&RadialField>, tol: f64) -> Result<SolveResult> {
    let problem = Problem::from_ansatz(ansatz)?;
    let phi0: Option<Vec<f64>> = u0.map(|u| {
        (0..problem.unknowns())
            .map(|i| u.value_at(problem.mesh.r(i)) - problem.base[i])
            .collect()
    });
    let run = newton_on(&problem, phi0.as_deref(), tol, 60)?;
    let mut result = finish(ansatz, &problem, run.phi, run.residuals, Method::Newton)?;
    result.newton_steps = run.steps;
    Ok(result)
}

/// Newton on `−Δu = λ f(u)` without an ansatz, from `u0`.
pub fn newton_plain(
    mesh: Arc<RadialMesh>,
    lambda: f64,
    u0: &RadialField,
    tol: f64,
) -> Result<(RadialField, Vec<f64>)> {
    let problem = Problem::plain(mesh, lambda)?;
    let run = newton_on(&problem, Some(u0.values()), tol, 60)?;
    Ok((problem.solution(&run.phi), run.residuals))
}

fn finish(
    ansatz: &Ansatz,
    problem: &Problem,
    phi: Vec<f64>,
    history: Vec<f64>,
    method: Method,
) -> Result<SolveResult> {
    let final_residual = norm2(&problem.residual(&phi));
    let phi_field = problem.with_boundary(phi);
    let u = problem.solution(phi_field.values());
    let radius = ansatz.domain.inradius();
    let (m_plus, m_minus) = masses(&u, ansatz.params.log_lambda, 0.5 * radius)?;
    let farfield_gap = farfield_compare(&u, ansatz.params.k, &ansatz.domain, (0.4, 0.8))?;
    Ok(SolveResult {
        method,
        k: ansatz.params.k,
        lambda: ansatz.params.lambda,
        domain: ansatz.domain.clone(),
        phi_norm: phi_field.energy_norm(),
        phi_sup: phi_field.sup_norm(),
        sign_changes: u.sign_changes(1e-12),
        u,
        phi: phi_field,
        m_plus,
        m_minus,
        iterations: history,
        farfield_gap,
        contraction_ratio: None,
        final_residual,
        newton_steps: Vec::new(),
    })
}

/// `m_± = 2π ∫_0^{r_cut} λ e^{±u} r dr` with `u` linear in `ln r` between
/// nodes and constant inside the innermost node.
pub fn masses(u: &RadialField, log_lambda: f64, r_cut: f64) -> Result<(f64, f64)> {
    let mesh = u.mesh();
    if !(r_cut > mesh.r_min()) || r_cut > mesh.radius() * (1.0 + 1e-12) {
        return Err(Error::InvalidInput(format!(
            "r_cut = {r_cut} must lie inside the mesh"
        )));
    }
    let rule = GaussLegendre::new(4);
    let s_cut = r_cut.ln();
    let v = u.values();
    let r0 = mesh.r_min();
    let inner = PI * r0 * r0;
    let mut plus = inner * (log_lambda + v[0]).exp();
    let mut minus = inner * (log_lambda - v[0]).exp();
    for i in 0..mesh.intervals() {
        let (s0, s1) = (mesh.s(i), mesh.s(i + 1));
        if s0 >= s_cut {
            break;
        }
        let hi = s1.min(s_cut);
        let interp = |s: f64| v[i] + (v[i + 1] - v[i]) * (s - s0) / (s1 - s0);
        plus += rule.panel(
            &|s: f64| 2.0 * PI * (log_lambda + interp(s) + 2.0 * s).exp(),
            s0,
            hi,
        );
        minus += rule.panel(
            &|s: f64| 2.0 * PI * (log_lambda - interp(s) + 2.0 * s).exp(),
            s0,
            hi,
        );
    }
    Ok((plus, minus))
}

/// Checked variant rejecting cuts inside the outermost bubble.
pub fn masses_for(result: &SolveResult, r_cut: f64, outer_log_delta: f64) -> Result<(f64, f64)> {
    if r_cut.ln() <= outer_log_delta {
        return Err(Error::InvalidInput(format!(
            "r_cut = {r_cut} does not enclose the outermost bubble (delta_k = {:.3e})",
            outer_log_delta.exp()
        )));
    }
    masses(&result.u, result.lambda.ln(), r_cut)
}

/// The limiting pair `(4πk(k−1), 4πk(k+1))` ordered as the numerics produce
/// it: `m_+ = Σ_{j even} 4πα_j`, `m_− = Σ_{j odd} 4πα_j`.
pub fn quantized_masses(k: usize) -> (f64, f64) {
    let (mut plus, mut minus) = (0.0, 0.0);
    for j in 1..=k {
        let m = 4.0 * PI * (4 * j - 2) as f64;
        if j % 2 == 0 {
            plus += m;
        } else {
            minus += m;
        }
    }
    (plus, minus)
}

/// `((m_+ − m_−)² − 8π(m_+ + m_−)) / (m_+ + m_−)²`.
pub fn ohtsuka_suzuki_check(m_plus: f64, m_minus: f64) -> f64 {
    let sum = m_plus + m_minus;
    ((m_plus - m_minus).powi(2) - 8.0 * PI * sum) / (sum * sum)
}

/// `sup |u − (−1)^k 8πk G(·,0)|` over radii in `[lo, hi]·R`.
pub fn farfield_compare(
    u: &RadialField,
    k: usize,
    domain: &DomainSpec,
    band: (f64, f64),
) -> Result<f64> {
    let green = GreenData::new(domain)?;
    let radius = domain.inradius();
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    let amp = sign * 8.0 * PI * k as f64;
    let mut gap = 0.0_f64;
    let mut seen = false;
    for (i, r) in u.mesh().radii().into_iter().enumerate() {
        if r < band.0 * radius || r > band.1 * radius {
            continue;
        }
        seen = true;
        gap = gap.max((u.values()[i] - amp * green.green([r, 0.0])?).abs());
    }
    if !seen {
        return Err(Error::InvalidInput(
            "no mesh node inside the far-field band".into(),
        ));
    }
    Ok(gap)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MoserTrudinger {
    pub integral: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Compares `∫_Ω e^{ηu}` with `c |Ω| e^{η²‖∇u‖²/(16π)}`, `c = 10`.
pub fn moser_trudinger_spot_check(u: &RadialField, eta: f64) -> MoserTrudinger {
    const C: f64 = 10.0;
    let mesh = u.mesh();
    let integral = mesh.integrate(
        &u.values()
            .iter()
            .map(|v| (eta * v).exp())
            .collect::<Vec<_>>(),
    );
    let area = PI * mesh.radius().powi(2);
    let bound = C * area * (eta * eta * u.energy_norm().powi(2) / (16.0 * PI)).exp();
    MoserTrudinger {
        integral,
        bound,
        holds: integral <= bound,
    }
}

/// Newton continuation down a decreasing `λ` sweep. Each solve starts from
/// the new ansatz plus the previous correction.
pub fn continuation(
    k: usize,
    lambdas: &[f64],
    domain: &DomainSpec,
    nodes_per_unit: f64,
    tol: f64,
) -> Result<Vec<SolveResult>> {
    let green = Arc::new(GreenData::new(domain)?);
    let mut out: Vec<SolveResult> = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let params = select_parameters(k, lambda, green.h00)?;
        let mesh = Arc::new(RadialMesh::for_scale(
            params.log_delta[0],
            domain.inradius(),
            nodes_per_unit,
        )?);
        let ansatz = assemble_on_mesh(&params, &green, ProjectionMode::Exact, mesh)?;
        let seed = out.last().map(|prev| {
            let w = &ansatz.field;
            w.map(|r, v| v + prev.phi.value_at(r))
        });
        out.push(newton_solve(&ansatz, seed.as_ref(), tol)?);
    }
    Ok(out)
}

/// Convergence order from the last three entries of a residual history
/// above `floor`.
pub fn convergence_order(history: &[f64], floor: f64) -> Option<f64> {
    let h: Vec<f64> = history.iter().copied().filter(|&v| v > floor).collect();
    if h.len() < 3 {
        return None;
    }
    let n = h.len();
    Some((h[n - 1] / h[n - 2]).ln() / (h[n - 2] / h[n - 3]).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tower::assemble_ansatz;

    fn ansatz(k: usize, lambda: f64) -> Ansatz {
        let p = select_parameters(k, lambda, 0.0).unwrap();
        assemble_ansatz(&p, &DomainSpec::unit_disk(), ProjectionMode::Exact).unwrap()
    }

    #[test]
    fn trivial_solution_from_zero() {
        let mesh = Arc::new(RadialMesh::log_uniform(1e-4, 1.0, 32.0).unwrap());
        let zero = RadialField::zeros(mesh.clone());
        let (u, _) = newton_plain(mesh, 1e-3, &zero, 1e-12).unwrap();
        assert!(u.sup_norm() == 0.0);
    }

    #[test]
    fn masses_of_zero_field() {
        let mesh = Arc::new(RadialMesh::log_uniform(1e-4, 1.0, 64.0).unwrap());
        let zero = RadialField::zeros(mesh);
        let (p, m) = masses(&zero, 1e-3f64.ln(), 0.5).unwrap();
        let expected = 1e-3 * PI * 0.25;
        assert!((p - expected).abs() < 1e-12 * expected);
        assert_eq!(p, m);
    }

    #[test]
    fn quantized_pairs_satisfy_identity() {
        for k in 1..=6 {
            let (p, m) = quantized_masses(k);
            assert!(ohtsuka_suzuki_check(p, m).abs() < 1e-14);
            let kk = k as f64;
            let mut pair = [p, m];
            pair.sort_by(f64::total_cmp);
            assert!((pair[0] - 4.0 * PI * kk * (kk - 1.0)).abs() < 1e-12);
            assert!((pair[1] - 4.0 * PI * kk * (kk + 1.0)).abs() < 1e-12);
        }
        assert_eq!(ohtsuka_suzuki_check(0.0, 8.0 * PI), 0.0);
    }

    #[test]
    fn synthetic_affine_iteration() {
        let a = ansatz(1, 1e-3);
        let terms = ContractionTerms {
            nonlinear: false,
            linear_error: false,
        };
        let res = contraction_iterate_with(&a, 10, 1e-13, terms).unwrap();
        assert_eq!(res.iterations.len(), 2);
        assert_eq!(res.iterations[1], 0.0);
    }

    #[test]
    fn contraction_and_newton_agree() {
        let a = ansatz(1, 1e-3);
        let c = contraction_iterate(&a, 200, 1e-12).unwrap();
        let n = newton_solve(&a, None, 1e-13).unwrap();
        let gap =
            c.u.values()
                .iter()
                .zip(n.u.values())
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
        assert!(gap < 1e-8, "{gap}");
        assert!(c.contraction_ratio.unwrap() < 0.5);
        assert_eq!(n.sign_changes, 0);
        assert!(n.u.values()[..n.u.values().len() - 1]
            .iter()
            .all(|&v| v < 0.0));
    }

    #[test]
    fn moser_trudinger_trivial_field() {
        let mesh = Arc::new(RadialMesh::log_uniform(1e-4, 1.0, 64.0).unwrap());
        let mt = moser_trudinger_spot_check(&RadialField::zeros(mesh), 1.0);
        assert!(mt.holds);
        assert!((mt.integral - PI).abs() < 1e-3);
    }

    #[test]
    fn newton_steps_converge_quadratically() {
        let a = ansatz(1, 1e-2);
        let n = newton_solve(&a, None, 1e-14).unwrap();
        let order = convergence_order(&n.newton_steps, 1e-13).unwrap();
        assert!(order >= 1.8, "order {order}, steps {:?}", n.newton_steps);
    }

    #[test]
    fn convergence_order_of_quadratic_sequence() {
        let h = [1e-1, 1e-2, 1e-4, 1e-8];
        assert!((convergence_order(&h, 1e-14).unwrap() - 2.0).abs() < 1e-12);
    }
}
