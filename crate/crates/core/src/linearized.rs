//! The linearised operator `L_λ φ = −Δφ − V φ`, `V = Σ_i |x|^{α_i−2} e^{w_i}`,
//! reduced by angular Fourier modes on a disk.
//!
//! Mode `m` of `φ(r) cos(mθ)` becomes a symmetric tridiagonal system on the
//! log mesh (see [`RadialMesh::stiffness`]). The natural norm on the
//! solution side is the energy norm, so the singular values reported here
//! are those of the pencil `L φ = μ K φ` with `K` the mode-`m` stiffness,
//! i.e. of `L_λ` as a map `H¹_0 → H⁻¹`.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::greens::{harmonic_extension, DomainSpec};
use crate::limit_profiles::Profile;
use crate::linalg::SymTridiag;
use crate::mesh::{RadialField, RadialMesh, DEFAULT_NODES_PER_UNIT};
use crate::tower::{select_parameters, BubbleParams};

pub const INVERSE_ITERATION_TOL: f64 = 1e-10;
pub const INVERSE_ITERATION_MAX: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sector {
    /// `u(x) = u(−x)`: even angular modes only.
    #[default]
    Even,
    Unrestricted,
}

impl Sector {
    pub fn admits(&self, mode: u32) -> bool {
        match self {
            Sector::Even => mode.is_multiple_of(2),
            Sector::Unrestricted => true,
        }
    }
}

/// Default highest mode, `2 α_k`.
pub fn default_max_mode(params: &BubbleParams) -> u32 {
    2 * params.alpha[params.k - 1] as u32
}

#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub mesh: Arc<RadialMesh>,
    pub mode: u32,
    pub sector: Sector,
    /// `V` at the unknown nodes.
    pub potential: Vec<f64>,
    /// Lumped `∫ (·) r² ds` weights of the unknown nodes.
    pub weights: Vec<f64>,
    pub stiffness: SymTridiag,
    pub matrix: SymTridiag,
}

/// Operator with the tower potential of `params`.
pub fn build_operator(
    params: &BubbleParams,
    mesh: Arc<RadialMesh>,
    mode: u32,
    sector: Sector,
) -> Result<DiscreteOperator> {
    mesh.require_density(crate::tower::MIN_NODES_PER_DECADE)?;
    if mesh.r_min() > params.log_delta[0].exp() {
        return Err(Error::InvalidInput(
            "mesh does not resolve the innermost bubble".into(),
        ));
    }
    let profiles = params.profiles();
    build_with_potential(mesh, mode, sector, |s| {
        profiles.iter().map(|p| p.log_density_log_r(s).exp()).sum()
    })
}

/// Operator `−Δ − V` for an arbitrary radial potential given in `ln r`.
pub fn build_with_potential<V: Fn(f64) -> f64>(
    mesh: Arc<RadialMesh>,
    mode: u32,
    sector: Sector,
    potential: V,
) -> Result<DiscreteOperator> {
    if !sector.admits(mode) {
        return Err(Error::InvalidInput(format!(
            "mode {mode} is odd and the even sector only carries even modes"
        )));
    }
    let n = mesh.intervals();
    let potential: Vec<f64> = (0..n).map(|i| potential(mesh.s(i))).collect();
    let weights = mesh.equation_weights();
    let stiffness = mesh.stiffness(mode);
    let shift: Vec<f64> = potential
        .iter()
        .zip(&weights)
        .map(|(v, w)| -v * w)
        .collect();
    let matrix = stiffness.add_diagonal(&shift);
    Ok(DiscreteOperator {
        mesh,
        mode,
        sector,
        potential,
        weights,
        stiffness,
        matrix,
    })
}

/// Solution of `L φ = h` with its energy norm `‖∇φ‖_{L²}`.
#[derive(Debug, Clone)]
pub struct LinearSolution {
    pub phi: RadialField,
    pub energy_norm: f64,
    /// Smallest over largest `LDLᵀ` pivot magnitude.
    pub pivot_ratio: f64,
}

impl DiscreteOperator {
    pub fn len(&self) -> usize {
        self.matrix.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.is_empty()
    }

    /// `L φ` as a load vector (weak form), unknown nodes only.
    pub fn apply(&self, phi: &[f64]) -> Vec<f64> {
        self.matrix.matvec(&phi[..self.len()])
    }

    /// Energy norm of the angular mode `φ(r) cos(mθ)` up to the angular
    /// factor: `(2π φᵀKφ)^{1/2}`.
    pub fn energy_norm(&self, phi: &[f64]) -> f64 {
        (2.0 * PI * self.stiffness.quadratic_form(&phi[..self.len()])).sqrt()
    }

    /// Solves `L φ = h` with `φ = 0` on the outer circle.
    pub fn solve(&self, h: &RadialField) -> Result<LinearSolution> {
        if **h.mesh() != *self.mesh {
            return Err(Error::InvalidInput(
                "right-hand side lives on a different mesh".into(),
            ));
        }
        let rhs: Vec<f64> = self
            .weights
            .iter()
            .zip(h.values())
            .map(|(w, v)| w * v)
            .collect();
        let fac = self.matrix.factor()?;
        let mut phi = fac.solve(&rhs);
        let energy_norm = self.energy_norm(&phi);
        phi.push(0.0);
        Ok(LinearSolution {
            phi: RadialField::new(self.mesh.clone(), phi)?,
            energy_norm,
            pivot_ratio: fac.pivot_ratio,
        })
    }

    /// Number of pencil eigenvalues below `mu`.
    pub fn count_below(&self, mu: f64) -> usize {
        self.matrix.negative_count(Some(&self.stiffness), mu)
    }

    /// `n`-th (zero based) eigenvalue of `L φ = μ K φ` by bisection.
    pub fn pencil_eigenvalue(&self, n: usize, rel_tol: f64) -> f64 {
        let mut lo = -1.0;
        while self.count_below(lo) > n {
            lo *= 2.0;
        }
        // every pencil eigenvalue is at most 1 since V ≥ 0
        let mut hi = 1.0 + 1e-12;
        while hi - lo > rel_tol * lo.abs().max(hi.abs()).max(1e-300) {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if self.count_below(mid) > n {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Pencil eigenvalue of least magnitude and its eigenvector: bisection
    /// brackets it, shifted inverse iteration polishes it.
    pub fn min_singular(&self) -> Result<SingularPair> {
        let below = self.count_below(0.0);
        let mut candidates = Vec::new();
        if below > 0 {
            candidates.push(self.pencil_eigenvalue(below - 1, 1e-6));
        }
        if below < self.len() {
            candidates.push(self.pencil_eigenvalue(below, 1e-6));
        }
        let guess = candidates
            .into_iter()
            .min_by(|a, b| a.abs().total_cmp(&b.abs()))
            .ok_or_else(|| Error::InvalidInput("empty operator".into()))?;
        self.inverse_iteration(guess)
    }

    /// Inverse iteration on `(L − σK)` from shift `sigma`.
    pub fn inverse_iteration(&self, sigma: f64) -> Result<SingularPair> {
        let n = self.len();
        let shift = sigma - 1e-9 * sigma.abs().max(1e-12);
        let shifted = self.matrix.add_scaled(&self.stiffness, -shift);
        let fac = shifted.factor()?;
        let mut x: Vec<f64> = (0..n)
            .map(|i| 1.0 + (i as f64 * 0.618).sin() * 0.1)
            .collect();
        let mut mu = f64::NAN;
        for it in 1..=INVERSE_ITERATION_MAX {
            let kx = self.stiffness.matvec(&x);
            let mut y = fac.solve(&kx);
            let norm = self.stiffness.quadratic_form(&y).sqrt();
            y.iter_mut().for_each(|v| *v /= norm);
            let next = self.matrix.quadratic_form(&y);
            // pencil eigenvalues are O(1) at most, so tiny ones are judged on
            // an absolute scale
            let done = (next - mu).abs() <= INVERSE_ITERATION_TOL * next.abs().max(1e-2);
            x = y;
            mu = next;
            if done {
                return Ok(self.pair(mu, x, it));
            }
        }
        Err(Error::NoConvergence {
            iterations: INVERSE_ITERATION_MAX,
            residual: mu,
        })
    }

    fn pair(&self, mu: f64, mut x: Vec<f64>, iterations: usize) -> SingularPair {
        // orient so the innermost value is positive
        if x[0] < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
        x.push(0.0);
        SingularPair {
            mode: self.mode,
            sigma: mu.abs(),
            eigenvalue: mu,
            iterations,
            vector: RadialField::new(self.mesh.clone(), x).expect("length matches"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SingularPair {
    pub mode: u32,
    pub sigma: f64,
    pub eigenvalue: f64,
    pub iterations: usize,
    pub vector: RadialField,
}

/// Per-mode and overall smallest singular value at one `λ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPoint {
    pub lambda: f64,
    pub sector: Sector,
    /// `(mode, σ_min)` for every admitted mode.
    pub modes: Vec<(u32, f64)>,
    pub sigma_min: f64,
    pub argmin_mode: u32,
    /// `σ_min · |ln λ|`.
    pub scaled: f64,
}

/// `σ_min` over the admitted modes `0..=max_mode` for one `λ` on the unit
/// disk tower mesh.
pub fn min_singular(
    params: &BubbleParams,
    mesh: Arc<RadialMesh>,
    sector: Sector,
    max_mode: u32,
) -> Result<SpectrumPoint> {
    let modes: Vec<(u32, f64)> = (0..=max_mode)
        .filter(|&m| sector.admits(m))
        .map(|m| {
            Ok((
                m,
                build_operator(params, mesh.clone(), m, sector)?
                    .min_singular()?
                    .sigma,
            ))
        })
        .collect::<Result<_>>()?;
    let &(argmin_mode, sigma_min) = modes
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("mode 0 is always admitted");
    Ok(SpectrumPoint {
        lambda: params.lambda,
        sector,
        modes,
        sigma_min,
        argmin_mode,
        scaled: sigma_min * params.log_lambda.abs(),
    })
}

/// Sweep over `lambdas` on a disk of the given radius, one task per `λ`.
pub fn min_singular_sweep(
    k: usize,
    lambdas: &[f64],
    radius: f64,
    sector: Sector,
    max_mode: Option<u32>,
    nodes_per_unit: f64,
) -> Result<Vec<SpectrumPoint>> {
    if lambdas.len() < 2 {
        return Err(Error::DegenerateSweep(
            "a spectrum sweep needs at least two lambdas".into(),
        ));
    }
    let h00 = radius.ln() / (2.0 * PI);
    lambdas
        .par_iter()
        .map(|&lambda| {
            let params = select_parameters(k, lambda, h00)?;
            let mesh = Arc::new(RadialMesh::for_scale(
                params.log_delta[0],
                radius,
                nodes_per_unit,
            )?);
            let m = max_mode.unwrap_or_else(|| default_max_mode(&params));
            min_singular(&params, mesh, sector, m)
        })
        .collect()
}

/// Largest over smallest `σ_min · |ln λ|` along a sweep.
pub fn band_ratio(points: &[SpectrumPoint]) -> f64 {
    let hi = points.iter().map(|p| p.scaled).fold(f64::MIN, f64::max);
    let lo = points.iter().map(|p| p.scaled).fold(f64::MAX, f64::min);
    hi / lo
}

/// Linearisation `−Δ − 2α²r^{α−2}/(1+r^α)²` of the unit bubble truncated
/// to the disk of radius `truncation`.
pub fn limit_operator(
    alpha: f64,
    truncation: f64,
    mode: u32,
    sector: Sector,
) -> Result<DiscreteOperator> {
    let p = Profile::from_log_delta(alpha, 0.0)?;
    let r_min = (-12.0 / alpha.sqrt()).exp().min(1e-3);
    let mesh = Arc::new(RadialMesh::log_uniform(
        r_min,
        truncation,
        DEFAULT_NODES_PER_UNIT,
    )?);
    build_with_potential(mesh, mode, sector, |s| p.log_density_log_r(s).exp())
}

/// `PZ` for a single bubble and its distance to `2δ^α/(δ^α + r^α)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZProjection {
    pub alpha: f64,
    pub log_delta: f64,
    pub sup_gap: f64,
    /// `PZ` on the boundary.
    pub boundary_value: f64,
}

/// Projects `Z = (δ^α − |x|^α)/(δ^α + |x|^α)` and measures its gap to the
/// closed form on sample points.
pub fn z_projection_check(alpha: f64, log_delta: f64, domain: &DomainSpec) -> Result<ZProjection> {
    let p = Profile::from_log_delta(alpha, log_delta)?;
    if log_delta >= domain.inradius().ln() {
        return Err(Error::InvalidInput(
            "delta must lie below the domain inradius".into(),
        ));
    }
    let target = |r: f64| (1.0 + p.z(r)).max(0.0);
    match *domain {
        DomainSpec::Disk { radius } => {
            let c = -p.z(radius);
            let mesh =
                RadialMesh::log_uniform((log_delta - 8.0).exp(), radius, DEFAULT_NODES_PER_UNIT)?;
            let sup_gap = mesh
                .radii()
                .iter()
                .map(|&r| (p.z(r) + c - target(r)).abs())
                .fold(0.0, f64::max);
            Ok(ZProjection {
                alpha,
                log_delta,
                sup_gap,
                boundary_value: p.z(radius) + c,
            })
        }
        DomainSpec::Rectangle {
            half_width,
            half_height,
            ..
        } => {
            let ext = harmonic_extension(domain, |x, y| -p.z(x.hypot(y)))?;
            let (nx, ny) = domain.grid_shape().expect("rectangle");
            let mut sup_gap = 0.0_f64;
            let mut boundary = 0.0_f64;
            for j in 0..=ny {
                for i in 0..=nx {
                    let x = [
                        -half_width + 2.0 * half_width * i as f64 / nx as f64,
                        -half_height + 2.0 * half_height * j as f64 / ny as f64,
                    ];
                    let r = x[0].hypot(x[1]);
                    let pz = p.z(r) + ext.eval(x).unwrap_or(f64::NAN);
                    sup_gap = sup_gap.max((pz - target(r)).abs());
                    if i == 0 || j == 0 || i == nx || j == ny {
                        boundary = boundary.max(pz.abs());
                    }
                }
            }
            Ok(ZProjection {
                alpha,
                log_delta,
                sup_gap,
                boundary_value: boundary,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limit_profiles::WeightedNormSpec;

    fn tower_mesh(params: &BubbleParams) -> Arc<RadialMesh> {
        Arc::new(RadialMesh::for_scale(params.log_delta[0], 1.0, 64.0).unwrap())
    }

    #[test]
    fn odd_mode_rejected_in_even_sector() {
        let p = select_parameters(1, 1e-3, 0.0).unwrap();
        assert!(build_operator(&p, tower_mesh(&p), 1, Sector::Even).is_err());
        assert!(build_operator(&p, tower_mesh(&p), 1, Sector::Unrestricted).is_ok());
    }

    #[test]
    fn zero_potential_is_positive() {
        let mesh = Arc::new(RadialMesh::log_uniform(1e-4, 1.0, 32.0).unwrap());
        let op = build_with_potential(mesh, 0, Sector::Even, |_| 0.0).unwrap();
        assert_eq!(op.count_below(0.0), 0);
        let first = op.pencil_eigenvalue(0, 1e-10);
        assert!((first - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let p = select_parameters(1, 1e-3, 0.0).unwrap();
        let mesh = tower_mesh(&p);
        let op = build_operator(&p, mesh.clone(), 0, Sector::Even).unwrap();
        let sol = op.solve(&RadialField::zeros(mesh)).unwrap();
        assert!(sol.phi.values().iter().all(|&v| v == 0.0));
        assert_eq!(sol.energy_norm, 0.0);
    }

    #[test]
    fn manufactured_solution_second_order() {
        // φ* = 1 − r², −Δφ* = 4, V = 8δ²/(δ²+r²)² with δ = 1/2 (δ = 1
        // would put the kernel element exactly on the unit circle)
        let err = |npu: f64| {
            let mesh = Arc::new(RadialMesh::log_uniform(1e-5, 1.0, npu).unwrap());
            let pr = Profile::new(2.0, 0.5).unwrap();
            let op = build_with_potential(mesh.clone(), 0, Sector::Even, |s| {
                pr.log_density_log_r(s).exp()
            })
            .unwrap();
            let h = RadialField::from_fn(mesh.clone(), |r| 4.0 - pr.density(r) * (1.0 - r * r));
            let sol = op.solve(&h).unwrap();
            let exact = RadialField::from_fn(mesh, |r| 1.0 - r * r);
            sol.phi
                .values()
                .iter()
                .zip(exact.values())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(16.0), err(32.0));
        assert!(e1 < 5e-3, "{e1} {e2}");
        assert!((e1 / e2 - 4.0).abs() < 0.5, "{e1} {e2}");
    }

    #[test]
    fn limit_kernel_is_z0() {
        let alpha = 6.0;
        let small = |t: f64| {
            limit_operator(alpha, t, 0, Sector::Even)
                .unwrap()
                .min_singular()
                .unwrap()
        };
        let (a, b) = (small(50.0), small(500.0));
        assert!(b.sigma < a.sigma);
        // one negative eigenvalue, then the near-kernel
        let op = limit_operator(alpha, 500.0, 0, Sector::Even).unwrap();
        assert_eq!(op.count_below(0.0), 1);
        assert!(op.pencil_eigenvalue(2, 1e-8) > 0.1);
        // eigenvector matches Z0 in the weighted norm
        let v = &b.vector;
        let scale = v.values()[0];
        let prof = Profile::new(alpha, 1.0).unwrap();
        let spec = WeightedNormSpec::new(alpha).unwrap();
        let mesh = v.mesh();
        let (mut num, mut den) = (0.0, 0.0);
        for (i, w) in mesh.area_weights().iter().enumerate() {
            let r = mesh.r(i);
            let wt = spec.weight(r).powi(2) * w;
            num += wt * (v.values()[i] / scale - prof.z(r)).powi(2);
            den += wt * prof.z(r).powi(2);
        }
        assert!((num / den).sqrt() < 0.05, "{}", (num / den).sqrt());
    }

    #[test]
    fn even_sector_excludes_half_alpha_mode() {
        let alpha = 6.0;
        let m = (alpha / 2.0) as u32;
        let odd = limit_operator(alpha, 300.0, m, Sector::Unrestricted)
            .unwrap()
            .min_singular()
            .unwrap();
        assert!(odd.sigma < 1e-2, "{}", odd.sigma);
        for m in [2, 4] {
            let even = limit_operator(alpha, 300.0, m, Sector::Even)
                .unwrap()
                .min_singular()
                .unwrap();
            assert!(even.sigma > 0.1, "mode {m}: {}", even.sigma);
        }
    }

    #[test]
    fn z_projection_disk() {
        let z = z_projection_check(2.0, 1e-2f64.ln(), &DomainSpec::unit_disk()).unwrap();
        assert!(z.sup_gap <= 3.0 * 1e-4, "{}", z.sup_gap);
        assert_eq!(z.boundary_value, 0.0);
    }
}
