//! Result payloads per experiment kind and the verdicts derived from them.
//!
//! Verdicts depend only on a payload and a threshold table, so a stored
//! record can be re-judged without rerunning anything.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::limit_profiles::{GradientComparison, RadialTestFunction};
use crate::linearized::{band_ratio, Sector, SpectrumPoint};
use crate::residual::{NormReport, ScalingFit};
use crate::solver::{ohtsuka_suzuki_check, quantized_masses};
use crate::tower::{ProjectionMode, ThetaSup};

use super::config::ExperimentKind;
use super::thresholds::Thresholds;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "kebab-case")]
pub enum Payload {
    Params(ParamsPayload),
    Ansatz(AnsatzPayload),
    ResidualScan(ResidualPayload),
    LinearSpectrum(SpectrumPayload),
    Solve(SolvePayload),
    LimitChecks(LimitPayload),
}

impl Payload {
    pub fn kind(&self) -> ExperimentKind {
        match self {
            Payload::Params(_) => ExperimentKind::Params,
            Payload::Ansatz(_) => ExperimentKind::Ansatz,
            Payload::ResidualScan(_) => ExperimentKind::ResidualScan,
            Payload::LinearSpectrum(_) => ExperimentKind::LinearSpectrum,
            Payload::Solve(_) => ExperimentKind::Solve,
            Payload::LimitChecks(_) => ExperimentKind::LimitChecks,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsRow {
    pub lambda: f64,
    pub alpha: Vec<f64>,
    pub log_delta: Vec<f64>,
    pub d: Vec<f64>,
    /// Alternating `h_i(0)` sums entering each balance row.
    pub h: Vec<f64>,
    pub balance: Vec<f64>,
    pub alternating_sum: i64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsPayload {
    pub k: usize,
    pub h00: f64,
    pub log_identity: Vec<i64>,
    pub rows: Vec<ParamsRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnsatzRow {
    pub lambda: f64,
    pub boundary_defect: f64,
    pub evenness_defect: f64,
    pub theta: Vec<ThetaSup>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnsatzPayload {
    pub k: usize,
    pub projection: ProjectionMode,
    pub rows: Vec<AnsatzRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualScan {
    pub p: f64,
    pub predicted: f64,
    pub lambdas: Vec<f64>,
    pub residual: Vec<NormReport>,
    pub linear_error: Vec<NormReport>,
    /// Absent when the sweep is too short to fit.
    pub residual_fit: Option<ScalingFit>,
    pub linear_fit: Option<ScalingFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualPayload {
    pub k: usize,
    pub scans: Vec<ResidualScan>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorSweep {
    pub sector: Sector,
    pub points: Vec<SpectrumPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPayload {
    pub k: usize,
    pub max_mode: Option<u32>,
    pub sectors: Vec<SectorSweep>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveRow {
    pub lambda: f64,
    pub phi_norm: f64,
    pub phi_sup: f64,
    /// `‖φ‖ / (λ^{1/2} |ln λ|)`.
    pub phi_scaled: f64,
    pub m_plus: f64,
    pub m_minus: f64,
    pub ohtsuka_suzuki: f64,
    pub farfield_gap: f64,
    pub sign_changes: usize,
    pub newton_iterations: usize,
    pub newton_order: Option<f64>,
    pub final_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionRow {
    pub lambda: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Empirical contraction ratio; `None` when the iteration blew up.
    pub ratio: Option<f64>,
    /// Sup-norm gap to the Newton solution at the same `λ`.
    pub agreement: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolvePayload {
    pub k: usize,
    pub rows: Vec<SolveRow>,
    pub contraction: Vec<ContractionRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassRow {
    pub alpha: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelRow {
    pub alpha: f64,
    pub integrals: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StereoRow {
    pub alpha: f64,
    pub function: RadialTestFunction,
    pub ratio: f64,
    pub gradient_original: f64,
    pub gradient_transformed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitPayload {
    pub masses: Vec<MassRow>,
    pub kernel: Vec<KernelRow>,
    pub stereographic: Vec<StereoRow>,
    /// Largest relative residual of the discrete limit equation per `α`.
    pub pde_residual: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    Below,
    AtMost,
    AtLeast,
    Equal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub comparison: Comparison,
    pub pass: bool,
}

impl Verdict {
    fn new(name: impl Into<String>, value: f64, comparison: Comparison, threshold: f64) -> Self {
        let pass = match comparison {
            Comparison::Below => value < threshold,
            Comparison::AtMost => value <= threshold,
            Comparison::AtLeast => value >= threshold,
            Comparison::Equal => value == threshold,
        };
        // JSON has no infinities or NaN; saturate so records stay readable
        let value = if value.is_nan() || value == f64::INFINITY {
            f64::MAX
        } else {
            value.max(f64::MIN)
        };
        Self {
            name: name.into(),
            value,
            threshold,
            comparison,
            pass,
        }
    }

    pub fn describe(&self) -> String {
        let op = match self.comparison {
            Comparison::Below => "<",
            Comparison::AtMost => "<=",
            Comparison::AtLeast => ">=",
            Comparison::Equal => "==",
        };
        let tag = if self.pass { "PASS" } else { "FAIL" };
        format!(
            "{tag} {}: {:.6e} {op} {:.6e}",
            self.name, self.value, self.threshold
        )
    }
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

fn spread(values: &[f64]) -> f64 {
    let hi = values.iter().copied().fold(f64::MIN, f64::max);
    let lo = values.iter().copied().fold(f64::MAX, f64::min);
    hi / lo
}

/// Number of consecutive pairs where the sequence fails to decrease.
fn increases(values: &[f64]) -> f64 {
    values.windows(2).filter(|w| !(w[1] < w[0])).count() as f64
}

pub fn verdicts(payload: &Payload, t: &Thresholds) -> Vec<Verdict> {
    use Comparison::*;
    let mut out = Vec::new();
    match payload {
        Payload::Params(p) => {
            let bal = max_of(
                p.rows
                    .iter()
                    .flat_map(|r| r.balance.iter().map(|b| b.abs())),
            );
            out.push(Verdict::new("balance", bal, Below, t.value("balance_abs")));
            let ident = p.log_identity.iter().map(|v| v.abs()).max().unwrap_or(0) as f64;
            out.push(Verdict::new("log_coefficient_identity", ident, Equal, 0.0));
            let k = p.k as i64;
            let target = if k % 2 == 0 { 2 * k } else { -2 * k };
            let alt = p
                .rows
                .iter()
                .map(|r| (r.alternating_sum - target).abs())
                .max()
                .unwrap_or(0) as f64;
            out.push(Verdict::new("alternating_sum", alt, Equal, 0.0));
            if p.rows.len() >= 2 {
                let drift = (0..p.k)
                    .map(|i| spread_abs(p.rows.iter().map(|r| r.d[i])))
                    .fold(0.0, f64::max);
                out.push(Verdict::new(
                    "d_drift",
                    drift,
                    Below,
                    t.value("d_drift_abs"),
                ));
            }
        }
        Payload::Ansatz(a) => {
            let tol = t.value("boundary_defect_abs");
            out.push(Verdict::new(
                "boundary_defect",
                max_of(a.rows.iter().map(|r| r.boundary_defect)),
                Below,
                tol,
            ));
            out.push(Verdict::new(
                "evenness_defect",
                max_of(a.rows.iter().map(|r| r.evenness_defect)),
                Below,
                tol,
            ));
            if a.rows.len() >= 2 {
                for j in 1..=a.k {
                    let c: Vec<f64> = a.rows.iter().map(|r| r.theta[j - 1].sup_ratio).collect();
                    out.push(Verdict::new(
                        format!("theta_spread_j{j}"),
                        spread(&c),
                        Below,
                        t.value("theta_spread"),
                    ));
                }
            }
        }
        Payload::ResidualScan(r) => {
            let tol = t.value("slope_tolerance");
            for scan in &r.scans {
                for (label, fit) in [("R", &scan.residual_fit), ("S", &scan.linear_fit)] {
                    if let Some(fit) = fit {
                        out.push(Verdict::new(
                            format!("slope_{label}_p{}", scan.p),
                            fit.exponent_fitted,
                            AtLeast,
                            scan.predicted - tol,
                        ));
                    }
                }
            }
        }
        Payload::LinearSpectrum(s) => {
            let even = s.sectors.iter().find(|x| x.sector == Sector::Even);
            if let Some(even) = even {
                if even.points.len() >= 2 {
                    out.push(Verdict::new(
                        "even_band",
                        band_ratio(&even.points),
                        AtMost,
                        t.value("spectrum_band"),
                    ));
                }
            }
            let unres = s.sectors.iter().find(|x| x.sector == Sector::Unrestricted);
            if let (Some(even), Some(unres)) = (even, unres) {
                // compare at the smallest lambda
                let pick = |sw: &SectorSweep| {
                    sw.points
                        .iter()
                        .min_by(|a, b| a.lambda.total_cmp(&b.lambda))
                        .map(|p| p.sigma_min)
                };
                if let (Some(e), Some(u)) = (pick(even), pick(unres)) {
                    out.push(Verdict::new(
                        "unrestricted_collapse",
                        u / e,
                        Below,
                        t.value("unrestricted_ratio"),
                    ));
                }
            }
        }
        Payload::Solve(s) => solve_verdicts(s, t, &mut out),
        Payload::LimitChecks(l) => {
            let mass = max_of(
                l.masses
                    .iter()
                    .map(|m| (m.mass / (4.0 * PI * m.alpha) - 1.0).abs()),
            );
            out.push(Verdict::new(
                "limit_mass",
                mass,
                Below,
                t.value("limit_mass_rel"),
            ));
            let kern = max_of(l.kernel.iter().map(|k| {
                let want = [0.0, -4.0 * PI * k.alpha, -4.0 * PI];
                max_of(k.integrals.iter().zip(want).map(|(a, b)| (a - b).abs()))
            }));
            out.push(Verdict::new(
                "kernel_integrals",
                kern,
                Below,
                t.value("kernel_integral_abs"),
            ));
            let ratio = max_of(
                l.stereographic
                    .iter()
                    .map(|s| (s.ratio - 0.5 * s.alpha).abs()),
            );
            out.push(Verdict::new(
                "stereographic_ratio",
                ratio,
                Below,
                t.value("stereographic_ratio_abs"),
            ));
            let slack = t.value("gradient_slack");
            let broken = l
                .stereographic
                .iter()
                .filter(|s| {
                    !GradientComparison {
                        alpha: s.alpha,
                        original: s.gradient_original,
                        transformed: s.gradient_transformed,
                    }
                    .holds(slack)
                })
                .count();
            out.push(Verdict::new(
                "gradient_bound_violations",
                broken as f64,
                Equal,
                0.0,
            ));
        }
    }
    out
}

fn spread_abs(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    let hi = v.iter().copied().fold(f64::MIN, f64::max);
    let lo = v.iter().copied().fold(f64::MAX, f64::min);
    hi - lo
}

fn solve_verdicts(s: &SolvePayload, t: &Thresholds, out: &mut Vec<Verdict>) {
    use Comparison::*;
    let k = s.k;
    let bad_sign = s.rows.iter().filter(|r| r.sign_changes != k - 1).count();
    out.push(Verdict::new(
        "sign_change_mismatches",
        bad_sign as f64,
        Equal,
        0.0,
    ));
    if let Some(last) = s.rows.iter().min_by(|a, b| a.lambda.total_cmp(&b.lambda)) {
        let (qp, qm) = quantized_masses(k);
        let mut got = [last.m_plus, last.m_minus];
        let mut want = [qp, qm];
        got.sort_by(f64::total_cmp);
        want.sort_by(f64::total_cmp);
        let err = max_of(got.iter().zip(want).map(|(g, w)| (g - w).abs())) / (qp + qm);
        let tol = if k == 1 {
            t.value("mass_rel_k1")
        } else {
            t.value("mass_rel")
        };
        out.push(Verdict::new("mass_pair", err, AtMost, tol));
        out.push(Verdict::new(
            "ohtsuka_suzuki",
            ohtsuka_suzuki_check(last.m_plus, last.m_minus).abs(),
            Below,
            t.value("ohtsuka_suzuki"),
        ));
    }
    if s.rows.len() >= 2 {
        let os: Vec<f64> = s.rows.iter().map(|r| r.ohtsuka_suzuki.abs()).collect();
        out.push(Verdict::new(
            "ohtsuka_suzuki_increases",
            increases(&os),
            Equal,
            0.0,
        ));
        let ff: Vec<f64> = s.rows.iter().map(|r| r.farfield_gap).collect();
        out.push(Verdict::new(
            "farfield_increases",
            increases(&ff),
            Equal,
            0.0,
        ));
        let scaled: Vec<f64> = s.rows.iter().map(|r| r.phi_scaled).collect();
        let growth = scaled.iter().copied().fold(0.0, f64::max) / scaled[0];
        out.push(Verdict::new(
            "phi_scaled_growth",
            growth,
            AtMost,
            t.value("phi_scaled_growth"),
        ));
    }
    let orders: Vec<f64> = s.rows.iter().filter_map(|r| r.newton_order).collect();
    if !orders.is_empty() {
        let worst = orders.iter().copied().fold(f64::MAX, f64::min);
        out.push(Verdict::new(
            "newton_order",
            worst,
            AtLeast,
            t.value("newton_order"),
        ));
    }
    if !s.contraction.is_empty() {
        let diverged = s.contraction.iter().filter(|c| !c.converged).count();
        out.push(Verdict::new(
            "contraction_failures",
            diverged as f64,
            Equal,
            0.0,
        ));
        let ratio = max_of(s.contraction.iter().map(|c| c.ratio.unwrap_or(f64::MAX)));
        out.push(Verdict::new(
            "contraction_ratio",
            ratio,
            Below,
            t.value("contraction_ratio"),
        ));
        let gap = max_of(s.contraction.iter().filter_map(|c| c.agreement));
        out.push(Verdict::new(
            "path_agreement",
            gap,
            Below,
            t.value("path_agreement"),
        ));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comparisons() {
        assert!(Verdict::new("a", 1.0, Comparison::Below, 2.0).pass);
        assert!(!Verdict::new("a", 2.0, Comparison::Below, 2.0).pass);
        assert!(Verdict::new("a", 2.0, Comparison::AtMost, 2.0).pass);
        assert!(!Verdict::new("a", f64::NAN, Comparison::AtLeast, 0.0).pass);
        assert!(Verdict::new("a", 0.0, Comparison::Equal, 0.0).pass);
    }

    #[test]
    fn increase_counter() {
        assert_eq!(increases(&[3.0, 2.0, 1.0]), 0.0);
        assert_eq!(increases(&[3.0, 3.0, 1.0, 2.0]), 2.0);
    }

    #[test]
    fn exact_limit_payload_passes() {
        let l = LimitPayload {
            masses: vec![MassRow {
                alpha: 2.0,
                mass: 8.0 * PI,
            }],
            kernel: vec![KernelRow {
                alpha: 6.0,
                integrals: [0.0, -24.0 * PI, -4.0 * PI],
            }],
            stereographic: vec![],
            pde_residual: vec![],
        };
        let v = verdicts(&Payload::LimitChecks(l), &Thresholds::defaults());
        assert!(v.iter().all(|x| x.pass), "{v:?}");
    }
}
