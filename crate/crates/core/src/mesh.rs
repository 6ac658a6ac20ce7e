//! Graded radial mesh, uniform in `s = ln r`, and fields sampled on it.
//!
//! Node `0` sits at `r_min > 0` and carries the regularity condition at the
//! origin (zero flux plus the contribution of the small inner disk); node `n`
//! sits on the outer circle `r = R`. Radial problems are assembled as
//! lumped P1 finite elements in `s`, giving symmetric tridiagonal systems.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::linalg::SymTridiag;

/// Default density of the tower mesh, nodes per unit of `ln r`.
pub const DEFAULT_NODES_PER_UNIT: f64 = 64.0;
/// Distance in `ln r` kept inside the innermost concentration scale.
pub const INNER_MARGIN: f64 = 6.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialMesh {
    s_min: f64,
    s_max: f64,
    intervals: usize,
}

impl RadialMesh {
    /// `intervals` equal steps in `ln r` between `r_min` and `radius`.
    pub fn with_intervals(r_min: f64, radius: f64, intervals: usize) -> Result<Self> {
        ensure_finite("r_min", r_min)?;
        ensure_finite("radius", radius)?;
        if !(r_min > 0.0 && radius > r_min) {
            return Err(Error::InvalidInput(format!(
                "need 0 < r_min < radius, got r_min={r_min}, radius={radius}"
            )));
        }
        if intervals < 2 {
            return Err(Error::InvalidInput(
                "a radial mesh needs at least 2 intervals".into(),
            ));
        }
        Ok(Self {
            s_min: r_min.ln(),
            s_max: radius.ln(),
            intervals,
        })
    }

    /// Mesh from `r_min` to `radius` with roughly `nodes_per_unit` nodes per
    /// unit of `ln r`.
    pub fn log_uniform(r_min: f64, radius: f64, nodes_per_unit: f64) -> Result<Self> {
        if !(nodes_per_unit > 0.0) {
            return Err(Error::InvalidInput(
                "nodes_per_unit must be positive".into(),
            ));
        }
        let span = (radius / r_min).ln();
        let n = (span * nodes_per_unit).ceil().max(2.0) as usize;
        Self::with_intervals(r_min, radius, n)
    }

    /// Mesh for a tower whose innermost scale is `exp(log_delta_min)`.
    pub fn for_scale(log_delta_min: f64, radius: f64, nodes_per_unit: f64) -> Result<Self> {
        ensure_finite("log_delta_min", log_delta_min)?;
        let r_min = (log_delta_min - INNER_MARGIN).exp();
        Self::log_uniform(r_min, radius, nodes_per_unit)
    }

    /// Same span, twice as many intervals.
    pub fn refined(&self) -> Self {
        Self {
            intervals: self.intervals * 2,
            ..self.clone()
        }
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    /// Node count including both ends.
    pub fn len(&self) -> usize {
        self.intervals + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Step in `ln r`.
    pub fn step(&self) -> f64 {
        (self.s_max - self.s_min) / self.intervals as f64
    }

    pub fn s(&self, i: usize) -> f64 {
        if i == self.intervals {
            self.s_max
        } else {
            self.s_min + i as f64 * self.step()
        }
    }

    pub fn r(&self, i: usize) -> f64 {
        self.s(i).exp()
    }

    pub fn radius(&self) -> f64 {
        self.s_max.exp()
    }

    pub fn r_min(&self) -> f64 {
        self.s_min.exp()
    }

    pub fn radii(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.r(i)).collect()
    }

    pub fn log_radii(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.s(i)).collect()
    }

    pub fn nodes_per_decade(&self) -> f64 {
        std::f64::consts::LN_10 / self.step()
    }

    pub fn require_density(&self, per_decade: f64) -> Result<()> {
        let have = self.nodes_per_decade();
        if have < per_decade {
            return Err(Error::MeshTooCoarse {
                nodes_per_decade: have,
                required: per_decade,
            });
        }
        Ok(())
    }

    /// Lumped `∫ (·) r² ds` weights for the unknown nodes `0..n`. Node 0
    /// also absorbs the inner disk `|x| < r_min` (weight `r_min²/2`).
    pub fn equation_weights(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.intervals)
            .map(|i| {
                let r2 = self.r(i).powi(2);
                if i == 0 {
                    r2 * (0.5 * h + 0.5)
                } else {
                    r2 * h
                }
            })
            .collect()
    }

    /// Area quadrature weights over all nodes: `∫_Ω g dx ≈ Σ w_i g(r_i)`.
    pub fn area_weights(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.len())
            .map(|i| {
                let r2 = self.r(i).powi(2);
                let m = if i == 0 {
                    0.5 * h + 0.5
                } else if i == self.intervals {
                    0.5 * h
                } else {
                    h
                };
                2.0 * PI * r2 * m
            })
            .collect()
    }

    /// Stiffness of `∫ (φ_s ψ_s + m² φ ψ) ds` on the unknown nodes `0..n`,
    /// Dirichlet at the outer node, natural condition at node 0.
    pub fn stiffness(&self, mode: u32) -> SymTridiag {
        let n = self.intervals;
        let h = self.step();
        let m2 = (mode as f64).powi(2);
        let mut diag = vec![2.0 / h + m2 * h; n];
        diag[0] = 1.0 / h + 0.5 * m2 * h;
        let off = vec![-1.0 / h; n - 1];
        SymTridiag::new(diag, off)
    }

    /// Area integral of nodal values.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.len());
        self.area_weights()
            .iter()
            .zip(values)
            .map(|(w, v)| w * v)
            .sum()
    }

    /// Index `i` and fraction `t` with `s = s_i + t h`, clamped to the mesh.
    pub fn locate(&self, s: f64) -> (usize, f64) {
        let h = self.step();
        let x = ((s - self.s_min) / h).clamp(0.0, self.intervals as f64);
        let i = (x.floor() as usize).min(self.intervals - 1);
        (i, x - i as f64)
    }
}

/// Scalar samples on a [`RadialMesh`], one per node.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    mesh: Arc<RadialMesh>,
    values: Vec<f64>,
}

impl RadialField {
    pub fn new(mesh: Arc<RadialMesh>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.len() {
            return Err(Error::InvalidInput(format!(
                "field has {} values for a mesh of {} nodes",
                values.len(),
                mesh.len()
            )));
        }
        Ok(Self { mesh, values })
    }

    pub fn zeros(mesh: Arc<RadialMesh>) -> Self {
        let n = mesh.len();
        Self {
            mesh,
            values: vec![0.0; n],
        }
    }

    pub fn from_fn<F: Fn(f64) -> f64>(mesh: Arc<RadialMesh>, f: F) -> Self {
        let values = (0..mesh.len()).map(|i| f(mesh.r(i))).collect();
        Self { mesh, values }
    }

    pub fn mesh(&self) -> &Arc<RadialMesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map<F: Fn(f64, f64) -> f64>(&self, f: F) -> RadialField {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| f(self.mesh.r(i), *v))
            .collect();
        RadialField {
            mesh: self.mesh.clone(),
            values,
        }
    }

    /// Linear interpolation in `ln r`; constant inside `r_min`.
    pub fn value_at(&self, r: f64) -> f64 {
        if r <= self.mesh.r_min() {
            return self.values[0];
        }
        let (i, t) = self.mesh.locate(r.ln());
        (1.0 - t) * self.values[i] + t * self.values[i + 1]
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `(∫ |∇u|² dx)^{1/2}` for the radial function.
    pub fn energy_norm(&self) -> f64 {
        let h = self.mesh.step();
        let sum: f64 = self.values.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
        (2.0 * PI * sum / h).sqrt()
    }

    pub fn integral(&self) -> f64 {
        self.mesh.integrate(&self.values)
    }

    /// Sign changes between the inner node and the last interior node;
    /// values below `eps` in magnitude are skipped.
    pub fn sign_changes(&self, eps: f64) -> usize {
        let mut last = 0.0_f64;
        let mut changes = 0;
        for v in &self.values[..self.values.len() - 1] {
            if v.abs() <= eps {
                continue;
            }
            if last != 0.0 && last.signum() != v.signum() {
                changes += 1;
            }
            last = *v;
        }
        changes
    }

    /// Second-order `-Δ` of the radial field at interior nodes `1..n`.
    pub fn neg_laplacian_interior(&self) -> Vec<f64> {
        let h2 = self.mesh.step().powi(2);
        (1..self.mesh.intervals())
            .map(|i| {
                let d2 = self.values[i + 1] - 2.0 * self.values[i] + self.values[i - 1];
                -d2 / (h2 * self.mesh.r(i).powi(2))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn area_weights_integrate_constant() {
        let mesh = RadialMesh::log_uniform(1e-6, 1.0, 64.0).unwrap();
        let one = vec![1.0; mesh.len()];
        let area = mesh.integrate(&one);
        assert!((area - PI).abs() / PI < 1e-4, "{area}");
    }

    #[test]
    fn boundary_node_is_exact() {
        let mesh = RadialMesh::log_uniform(1e-3, 2.5, 37.0).unwrap();
        assert_eq!(mesh.r(mesh.intervals()), 2.5_f64.ln().exp());
    }

    #[test]
    fn energy_norm_of_log() {
        // u = ln r on [a, 1]: ∫|∇u|² = 2π ln(1/a)
        let mesh = Arc::new(RadialMesh::log_uniform(1e-2, 1.0, 50.0).unwrap());
        let u = RadialField::from_fn(mesh, |r| r.ln());
        let e = u.energy_norm().powi(2);
        assert!((e - 2.0 * PI * 100f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn too_coarse_is_rejected() {
        let mesh = RadialMesh::with_intervals(1e-6, 1.0, 10).unwrap();
        assert!(matches!(
            mesh.require_density(8.0),
            Err(Error::MeshTooCoarse { .. })
        ));
    }

    #[test]
    fn sign_changes_counts_crossings() {
        let mesh = Arc::new(RadialMesh::log_uniform(1e-3, 1.0, 20.0).unwrap());
        let f = RadialField::from_fn(mesh, |r| (r.ln() * 1.5).sin());
        // ln r in [-6.9, 0): sin(1.5 s) vanishes at s = -kπ/1.5 for k = 1..3
        assert_eq!(f.sign_changes(1e-12), 3);
    }
}
