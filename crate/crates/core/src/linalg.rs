//! Symmetric tridiagonal matrices: factorisation, solves and inertia counts.
//!
//! Every radial operator in the crate is a three-point stencil in `s = ln r`,
//! so this is the only direct solver the radial code paths need.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    /// `off[i]` couples rows `i` and `i + 1`.
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(
            off.len() + 1,
            diag.len().max(1),
            "off-diagonal length mismatch"
        );
        Self { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        assert_eq!(x.len(), n);
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut v = self.diag[i] * x[i];
            if i > 0 {
                v += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                v += self.off[i] * x[i + 1];
            }
            y[i] = v;
        }
        y
    }

    /// `x^T A x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.matvec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, other: &SymTridiag, c: f64) -> SymTridiag {
        SymTridiag {
            diag: self
                .diag
                .iter()
                .zip(&other.diag)
                .map(|(a, b)| a + c * b)
                .collect(),
            off: self
                .off
                .iter()
                .zip(&other.off)
                .map(|(a, b)| a + c * b)
                .collect(),
        }
    }

    /// `self + diag(d)`.
    pub fn add_diagonal(&self, d: &[f64]) -> SymTridiag {
        SymTridiag {
            diag: self.diag.iter().zip(d).map(|(a, b)| a + b).collect(),
            off: self.off.clone(),
        }
    }

    /// `LDL^T` factorisation without pivoting.
    pub fn factor(&self) -> Result<TridiagFactor> {
        let n = self.len();
        let mut d = vec![0.0; n];
        let mut l = vec![0.0; n.saturating_sub(1)];
        let scale = self
            .diag
            .iter()
            .chain(&self.off)
            .fold(0.0_f64, |m, v| m.max(v.abs()));
        let mut min_pivot = f64::INFINITY;
        for i in 0..n {
            let mut di = self.diag[i];
            if i > 0 {
                di -= l[i - 1] * l[i - 1] * d[i - 1];
            }
            if !di.is_finite() || di.abs() <= 1e-300_f64.max(scale * 1e-15) {
                return Err(Error::Singular {
                    reason: format!("zero pivot at row {i} of {n}"),
                    pivot: di.abs() / scale.max(f64::MIN_POSITIVE),
                });
            }
            min_pivot = min_pivot.min(di.abs());
            d[i] = di;
            if i + 1 < n {
                l[i] = self.off[i] / di;
            }
        }
        Ok(TridiagFactor {
            d,
            l,
            pivot_ratio: min_pivot / scale.max(f64::MIN_POSITIVE),
        })
    }

    /// Number of negative eigenvalues of `self - mu * b` (Sylvester inertia
    /// of the `LDL^T` pivots).
    pub fn negative_count(&self, b: Option<&SymTridiag>, mu: f64) -> usize {
        let n = self.len();
        let mut count = 0;
        let mut prev = 1.0;
        for i in 0..n {
            let (bd, bo) = match b {
                Some(b) => (b.diag[i], if i > 0 { b.off[i - 1] } else { 0.0 }),
                None => (1.0, 0.0),
            };
            let a = self.diag[i] - mu * bd;
            let mut d = a;
            if i > 0 {
                let o = self.off[i - 1] - mu * bo;
                d -= o * o / prev;
            }
            if d == 0.0 {
                d = -f64::EPSILON * (a.abs() + f64::MIN_POSITIVE);
            }
            if d < 0.0 {
                count += 1;
            }
            prev = d;
        }
        count
    }
}

#[derive(Debug, Clone)]
pub struct TridiagFactor {
    d: Vec<f64>,
    l: Vec<f64>,
    /// Smallest pivot relative to the largest matrix entry; a crude
    /// conditioning indicator.
    pub pivot_ratio: f64,
}

impl TridiagFactor {
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        assert_eq!(rhs.len(), n);
        let mut y = rhs.to_vec();
        for i in 1..n {
            y[i] -= self.l[i - 1] * y[i - 1];
        }
        for i in 0..n {
            y[i] /= self.d[i];
        }
        for i in (0..n.saturating_sub(1)).rev() {
            y[i] -= self.l[i] * y[i + 1];
        }
        y
    }

    pub fn negative_pivots(&self) -> usize {
        self.d.iter().filter(|d| **d < 0.0).count()
    }
}
