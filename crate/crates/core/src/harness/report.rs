use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::Result;

use super::config::ExperimentKind;
use super::payload::Payload;
use super::record::RunRecord;
use super::registry::Registry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictFilter {
    Pass,
    Fail,
}

impl FromStr for VerdictFilter {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "pass" => Ok(Self::Pass),
            "fail" => Ok(Self::Fail),
            other => Err(format!(
                "verdict filter must be `pass` or `fail`, got `{other}`"
            )),
        }
    }
}

/// Record selection; unset fields match everything.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Filter {
    pub kind: Option<ExperimentKind>,
    pub k: Option<usize>,
    pub verdict: Option<VerdictFilter>,
}

impl Filter {
    pub fn matches(&self, record: &RunRecord) -> bool {
        self.kind.is_none_or(|k| record.kind() == k)
            && self.k.is_none_or(|k| record.config.k == k)
            && self
                .verdict
                .is_none_or(|v| (v == VerdictFilter::Pass) == record.passed)
    }
}

/// Collated output: one CSV table per experiment kind and a JSON summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Bundle {
    pub records: Vec<PathBuf>,
    pub tables: BTreeMap<ExperimentKind, String>,
    pub summary: Value,
    pub warnings: Vec<String>,
}

impl Bundle {
    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

pub fn report(registry: &Registry, filter: &Filter) -> Result<Bundle> {
    Ok(collate(registry.records()?, filter))
}

pub fn collate(records: Vec<(PathBuf, RunRecord)>, filter: &Filter) -> Bundle {
    let selected: Vec<(PathBuf, RunRecord)> = records
        .into_iter()
        .filter(|(_, r)| filter.matches(r))
        .collect();
    let mut warnings = Vec::new();
    if selected.is_empty() {
        warnings.push("no records match the filter".to_string());
    }
    for (path, r) in &selected {
        if !r.hash_is_consistent() {
            warnings.push(format!(
                "{}: stored input hash does not match its inputs",
                path.display()
            ));
        }
        if r.recompute_verdicts() != r.verdicts {
            warnings.push(format!(
                "{}: stored verdicts differ from recomputed ones",
                path.display()
            ));
        }
    }

    let mut tables: BTreeMap<ExperimentKind, String> = BTreeMap::new();
    for (_, r) in &selected {
        let t = table(r);
        let out = tables
            .entry(r.kind())
            .or_insert_with(|| format!("record,{}\n", t.header));
        for row in &t.rows {
            let _ = writeln!(out, "{},{row}", r.short_id());
        }
        for line in &t.footer {
            let _ = writeln!(out, "# {} {line}", r.short_id());
        }
    }

    let mut by_kind: BTreeMap<String, Value> = BTreeMap::new();
    for (_, r) in &selected {
        let e = by_kind
            .entry(r.kind().to_string())
            .or_insert_with(|| json!({ "records": 0, "passed": 0, "failed": 0 }));
        e["records"] = json!(e["records"].as_u64().unwrap_or(0) + 1);
        let key = if r.passed { "passed" } else { "failed" };
        e[key] = json!(e[key].as_u64().unwrap_or(0) + 1);
    }
    let runs: Vec<Value> = selected
        .iter()
        .map(|(path, r)| {
            json!({
                "id": r.short_id(),
                "file": path.file_name().map(|f| f.to_string_lossy().into_owned()),
                "kind": r.kind(),
                "k": r.config.k,
                "started_at": r.started_at,
                "passed": r.passed,
                "verdicts": r.verdicts,
            })
        })
        .collect();
    let summary = json!({
        "filter": filter,
        "records": selected.len(),
        "passed": selected.iter().filter(|(_, r)| r.passed).count(),
        "failed": selected.iter().filter(|(_, r)| !r.passed).count(),
        "by_kind": by_kind,
        "runs": runs,
        "warnings": warnings,
    });
    Bundle {
        records: selected.into_iter().map(|(p, _)| p).collect(),
        tables,
        summary,
        warnings,
    }
}

struct Table {
    header: &'static str,
    rows: Vec<String>,
    footer: Vec<String>,
}

/// CSV export of a single record.
pub fn record_csv(record: &RunRecord) -> String {
    let t = table(record);
    let mut out = format!("{}\n", t.header);
    for row in t.rows {
        out.push_str(&row);
        out.push('\n');
    }
    for line in t.footer {
        out.push_str("# ");
        out.push_str(&line);
        out.push('\n');
    }
    out
}

fn table(record: &RunRecord) -> Table {
    let mut rows = Vec::new();
    let mut footer = Vec::new();
    let header = match &record.payload {
        Payload::Params(p) => {
            for r in &p.rows {
                for i in 0..p.k {
                    rows.push(format!(
                        "{:e},{},{},{:.17e},{:.17e},{:e}",
                        r.lambda,
                        i + 1,
                        r.alpha[i],
                        r.log_delta[i],
                        r.d[i],
                        r.balance[i]
                    ));
                }
            }
            "lambda,i,alpha,log_delta,d,balance"
        }
        Payload::Ansatz(a) => {
            for r in &a.rows {
                for t in &r.theta {
                    rows.push(format!(
                        "{:e},{},{:e},{:e},{:e}",
                        r.lambda, t.j, t.sup_abs, t.sup_ratio, r.boundary_defect
                    ));
                }
            }
            "lambda,j,theta_sup,theta_ratio,boundary_defect"
        }
        Payload::ResidualScan(s) => {
            for scan in &s.scans {
                for (series, reports, fit) in [
                    ("R", &scan.residual, &scan.residual_fit),
                    ("S", &scan.linear_error, &scan.linear_fit),
                ] {
                    let Some(first) = reports.first() else {
                        continue;
                    };
                    let (x0, y0) = (scan.lambdas[0].ln(), first.total_norm.ln());
                    for (lambda, rep) in scan.lambdas.iter().zip(reports) {
                        let x = lambda.ln();
                        rows.push(format!(
                            "{series},{},{x:.10},{:.10},{:.10}",
                            scan.p,
                            rep.total_norm.ln(),
                            y0 + scan.predicted * (x - x0)
                        ));
                    }
                    match fit {
                        Some(f) => footer.push(format!(
                            "slope series={series} p={} fitted={:.6} predicted={:.6} rms={:.3e}",
                            scan.p, f.exponent_fitted, f.exponent_predicted, f.fit_residual
                        )),
                        None => footer.push(format!(
                            "slope series={series} p={} fitted=NA predicted={:.6}",
                            scan.p, scan.predicted
                        )),
                    }
                }
            }
            "series,p,ln_lambda,ln_norm,ln_reference"
        }
        Payload::LinearSpectrum(s) => {
            for sw in &s.sectors {
                let sector = match sw.sector {
                    crate::linearized::Sector::Even => "even",
                    crate::linearized::Sector::Unrestricted => "unrestricted",
                };
                for pt in &sw.points {
                    rows.push(format!(
                        "{sector},{:.10},{:e},{:e},{}",
                        pt.lambda.ln(),
                        pt.sigma_min,
                        pt.scaled,
                        pt.argmin_mode
                    ));
                }
            }
            "sector,ln_lambda,sigma_min,scaled,argmin_mode"
        }
        Payload::Solve(s) => {
            for r in &s.rows {
                rows.push(format!(
                    "{:e},{:e},{:e},{:.10},{:.10},{:e},{:e},{}",
                    r.lambda,
                    r.phi_norm,
                    r.phi_scaled,
                    r.m_plus,
                    r.m_minus,
                    r.ohtsuka_suzuki,
                    r.farfield_gap,
                    r.newton_iterations
                ));
            }
            "lambda,phi_norm,phi_scaled,m_plus,m_minus,ohtsuka_suzuki,farfield_gap,newton_iterations"
        }
        Payload::LimitChecks(l) => {
            use std::f64::consts::PI;
            for m in &l.masses {
                rows.push(format!(
                    "mass,{},{:.15},{:.15}",
                    m.alpha,
                    m.mass,
                    4.0 * PI * m.alpha
                ));
            }
            for k in &l.kernel {
                let want = [0.0, -4.0 * PI * k.alpha, -4.0 * PI];
                for (n, (got, w)) in k.integrals.iter().zip(want).enumerate() {
                    rows.push(format!(
                        "kernel_{},{},{:.15},{:.15}",
                        n + 1,
                        k.alpha,
                        got,
                        w
                    ));
                }
            }
            for s in &l.stereographic {
                rows.push(format!(
                    "norm_ratio,{},{:.15},{:.15}",
                    s.alpha,
                    s.ratio,
                    0.5 * s.alpha
                ));
            }
            "check,alpha,value,expected"
        }
    };
    Table {
        header,
        rows,
        footer,
    }
}
