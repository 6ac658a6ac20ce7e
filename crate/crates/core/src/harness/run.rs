use std::fs;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::SystemTime;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::greens::GreenData;
use crate::limit_profiles::{
    kernel_integrals, limit_mass, stereographic_gradient, stereographic_norm_ratio,
    verify_limit_pde, Profile, RadialTestFunction,
};
use crate::linearized::{default_max_mode, min_singular, min_singular_sweep};
use crate::mesh::RadialMesh;
use crate::residual::{error_exponent, linear_error_field, lp_norm, residual_field, scaling_fit};
use crate::solver::{continuation, contraction_iterate, convergence_order, ohtsuka_suzuki_check};
use crate::tower::{
    assemble_on_mesh, check_alternating_sum, log_coefficient_identity, select_parameters,
    theta_sup, Ansatz,
};

use super::config::{ExperimentKind, RunConfig};
use super::payload::*;
use super::record::RunRecord;
use super::registry::Registry;
use super::report::record_csv;

/// Radii sampled per annulus for the `Θ_j` sup.
const THETA_SAMPLES: usize = 400;
/// Step norms below this are roundoff and excluded from order estimates.
const STEP_FLOOR: f64 = 1e-13;

/// Runs `config` without touching the registry.
pub fn execute(config: &RunConfig) -> Result<RunRecord> {
    config.validate()?;
    let started = SystemTime::now();
    let payload = match config.kind {
        ExperimentKind::Params => Payload::Params(params(config)?),
        ExperimentKind::Ansatz => Payload::Ansatz(ansatz(config)?),
        ExperimentKind::ResidualScan => Payload::ResidualScan(residual_scan(config)?),
        ExperimentKind::LinearSpectrum => Payload::LinearSpectrum(spectrum(config)?),
        ExperimentKind::Solve => Payload::Solve(solve(config)?),
        ExperimentKind::LimitChecks => Payload::LimitChecks(limit_checks(config)?),
    };
    Ok(RunRecord::new(
        config.clone(),
        payload,
        started,
        SystemTime::now(),
    ))
}

/// Runs `config`, appends the record to `registry` and, when the config
/// names an output directory, writes the record's CSV export there.
pub fn run(config: &RunConfig, registry: &Registry) -> Result<(RunRecord, PathBuf)> {
    let record = execute(config)?;
    let path = registry.append(&record)?;
    if let Some(dir) = &config.output_dir {
        fs::create_dir_all(dir)?;
        fs::write(
            dir.join(format!("{}-{}.csv", record.kind(), record.short_id())),
            record_csv(&record),
        )?;
    }
    Ok((record, path))
}

fn build_ansatz(config: &RunConfig, green: &Arc<GreenData>, lambda: f64) -> Result<Ansatz> {
    let params = select_parameters(config.k, lambda, green.h00)?;
    let mesh = RadialMesh::for_scale(
        params.log_delta[0],
        config.domain.inradius(),
        config.nodes_per_unit,
    )?;
    assemble_on_mesh(&params, green, config.projection, Arc::new(mesh))
}

fn params(config: &RunConfig) -> Result<ParamsPayload> {
    let green = GreenData::new(&config.domain)?;
    let rows = config
        .lambdas()
        .into_par_iter()
        .map(|lambda| {
            let p = select_parameters(config.k, lambda, green.h00)?;
            Ok(ParamsRow {
                lambda,
                balance: (0..p.k).map(|j| p.balance(j)).collect(),
                h: (0..p.k).map(|j| p.alternating_h(j)).collect(),
                alternating_sum: check_alternating_sum(&p)?,
                alpha: p.alpha,
                log_delta: p.log_delta,
                d: p.d,
                warnings: p.warnings,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ParamsPayload {
        k: config.k,
        h00: green.h00,
        log_identity: log_coefficient_identity(config.k),
        rows,
    })
}

fn ansatz(config: &RunConfig) -> Result<AnsatzPayload> {
    let green = Arc::new(GreenData::new(&config.domain)?);
    let rows = config
        .lambdas()
        .into_par_iter()
        .map(|lambda| {
            let a = build_ansatz(config, &green, lambda)?;
            Ok(AnsatzRow {
                lambda,
                boundary_defect: a.boundary_defect(),
                evenness_defect: a.evenness_defect(),
                theta: (1..=config.k)
                    .map(|j| theta_sup(&a, j, THETA_SAMPLES))
                    .collect::<Result<_>>()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AnsatzPayload {
        k: config.k,
        projection: config.projection,
        rows,
    })
}

fn residual_scan(config: &RunConfig) -> Result<ResidualPayload> {
    let green = Arc::new(GreenData::new(&config.domain)?);
    let lambdas = config.lambdas();
    // per lambda, per p: (R, S)
    let norms = lambdas
        .par_iter()
        .map(|&lambda| {
            let a = build_ansatz(config, &green, lambda)?;
            let r = residual_field(&a)?;
            let s = linear_error_field(&a)?;
            config
                .p
                .iter()
                .map(|&p| Ok((lp_norm(&r, p, &a.annuli)?, lp_norm(&s, p, &a.annuli)?)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let scans = config
        .p
        .iter()
        .enumerate()
        .map(|(ip, &p)| {
            let predicted = error_exponent(config.k, p);
            let (residual, linear_error): (Vec<_>, Vec<_>) =
                norms.iter().map(|row| row[ip].clone()).unzip();
            let fit = |reports: &[crate::residual::NormReport]| {
                let values: Vec<f64> = reports.iter().map(|n| n.total_norm).collect();
                match scaling_fit(&lambdas, &values, predicted) {
                    Ok(f) => Ok(Some(f)),
                    Err(Error::DegenerateSweep(_)) => Ok(None),
                    Err(e) => Err(e),
                }
            };
            Ok(ResidualScan {
                p,
                predicted,
                lambdas: lambdas.clone(),
                residual_fit: fit(&residual)?,
                linear_fit: fit(&linear_error)?,
                residual,
                linear_error,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ResidualPayload { k: config.k, scans })
}

fn spectrum(config: &RunConfig) -> Result<SpectrumPayload> {
    let lambdas = config.lambdas();
    let radius = config.domain.inradius();
    let sectors = config
        .sectors
        .iter()
        .map(|&sector| {
            let points = if lambdas.len() >= 2 {
                min_singular_sweep(
                    config.k,
                    &lambdas,
                    radius,
                    sector,
                    config.max_mode,
                    config.nodes_per_unit,
                )?
            } else {
                let green = GreenData::new(&config.domain)?;
                let params = select_parameters(config.k, lambdas[0], green.h00)?;
                let mesh = Arc::new(RadialMesh::for_scale(
                    params.log_delta[0],
                    radius,
                    config.nodes_per_unit,
                )?);
                let m = config.max_mode.unwrap_or_else(|| default_max_mode(&params));
                vec![min_singular(&params, mesh, sector, m)?]
            };
            Ok(SectorSweep { sector, points })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumPayload {
        k: config.k,
        max_mode: config.max_mode,
        sectors,
    })
}

fn solve(config: &RunConfig) -> Result<SolvePayload> {
    let lambdas = config.lambdas();
    let results = continuation(
        config.k,
        &lambdas,
        &config.domain,
        config.nodes_per_unit,
        config.tolerances.newton,
    )?;
    let rows = results
        .iter()
        .map(|r| SolveRow {
            lambda: r.lambda,
            phi_norm: r.phi_norm,
            phi_sup: r.phi_sup,
            phi_scaled: r.phi_norm / (r.lambda.sqrt() * r.lambda.ln().abs()),
            m_plus: r.m_plus,
            m_minus: r.m_minus,
            ohtsuka_suzuki: ohtsuka_suzuki_check(r.m_plus, r.m_minus),
            farfield_gap: r.farfield_gap,
            sign_changes: r.sign_changes,
            newton_iterations: r.newton_steps.len(),
            newton_order: convergence_order(&r.newton_steps, STEP_FLOOR),
            final_residual: r.final_residual,
        })
        .collect();
    let contraction = if config.contraction_check {
        let green = Arc::new(GreenData::new(&config.domain)?);
        lambdas
            .par_iter()
            .zip(results.par_iter())
            .map(|(&lambda, newton)| {
                let a = build_ansatz(config, &green, lambda)?;
                match contraction_iterate(
                    &a,
                    config.tolerances.max_iterations,
                    config.tolerances.contraction,
                ) {
                    Ok(c) => {
                        let gap =
                            c.u.values()
                                .iter()
                                .zip(newton.u.values())
                                .map(|(x, y)| (x - y).abs())
                                .fold(0.0, f64::max);
                        Ok(ContractionRow {
                            lambda,
                            converged: true,
                            iterations: c.iterations.len(),
                            ratio: c.contraction_ratio,
                            agreement: Some(gap),
                        })
                    }
                    Err(Error::Diverged { iterations, ratio }) => Ok(ContractionRow {
                        lambda,
                        converged: false,
                        iterations,
                        ratio: ratio.is_finite().then_some(ratio),
                        agreement: None,
                    }),
                    Err(e) => Err(e),
                }
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    Ok(SolvePayload {
        k: config.k,
        rows,
        contraction,
    })
}

fn limit_checks(config: &RunConfig) -> Result<LimitPayload> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    // draw every test function up front so the set does not depend on scheduling
    let draws: Vec<(f64, RadialTestFunction)> = config
        .alphas
        .iter()
        .flat_map(|&a| std::iter::repeat_n(a, config.test_functions))
        .map(|a| (a, RadialTestFunction::random(&mut rng)))
        .collect();
    let masses = config
        .alphas
        .par_iter()
        .map(|&alpha| {
            Ok(MassRow {
                alpha,
                mass: limit_mass(alpha)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let kernel = config
        .alphas
        .par_iter()
        .map(|&alpha| {
            let (a, b, c) = kernel_integrals(alpha)?;
            Ok(KernelRow {
                alpha,
                integrals: [a, b, c],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let stereographic = draws
        .par_iter()
        .map(|&(alpha, function)| {
            let g = stereographic_gradient(alpha, &function)?;
            Ok(StereoRow {
                alpha,
                function,
                ratio: stereographic_norm_ratio(alpha, &function)?,
                gradient_original: g.original,
                gradient_transformed: g.transformed,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mesh = RadialMesh::log_uniform(1e-3, 1e3, config.nodes_per_unit)?;
    let pde_residual = config
        .alphas
        .iter()
        .map(|&alpha| Ok((alpha, verify_limit_pde(&Profile::new(alpha, 1.0)?, &mesh)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(LimitPayload {
        masses,
        kernel,
        stereographic,
        pde_residual,
    })
}
