//! Numerical construction and verification of bubble-tower blow-up solutions
//! of the sinh-Poisson problem
//!
//! ```text
//! −Δu = λ (e^u − e^(−u))  in Ω,    u = 0 on ∂Ω
//! ```
//!
//! on centrally symmetric planar domains. The crate is organised bottom-up:
//!
//! * [`limit_profiles`] – singular Liouville bubbles, their linearised kernel
//!   and the weighted-space identities used by the linear theory.
//! * [`greens`] – Dirichlet Green's function with pole at the origin, its
//!   regular part and harmonic extensions (disk and rectangle).
//! * [`tower`] – parameter selection, projected bubbles, the alternating
//!   ansatz `W_λ`, annuli and the interaction function `Θ_j`.
//! * [`residual`] – the error fields `R_λ`, `S_λ`, the nonlinear remainder
//!   and annulus-wise `L^p` norms with scaling fits.
//! * [`linearized`] – the bubble-potential operator `L_λ` reduced by Fourier
//!   modes, its inversion and singular-value sweeps.
//! * [`solver`] – fixed-point and Newton correction of the ansatz, blow-up
//!   masses and far-field checks.
//! * [`harness`] – run configuration, registry and report collation used by
//!   the `towerlab` binary.

pub mod error;
pub mod greens;
pub mod harness;
pub mod limit_profiles;
pub mod linalg;
pub mod linearized;
pub mod mesh;
pub mod quadrature;
pub mod residual;
pub mod solver;
pub mod tower;

pub use error::{Error, Result};
pub use greens::{DomainSpec, GreenData};
pub use limit_profiles::{KernelBasis, Profile, WeightedNormSpec};
pub use mesh::{RadialField, RadialMesh};
pub use residual::{NormReport, ScalingFit};
pub use solver::SolveResult;
pub use tower::{AnnulusDecomposition, Ansatz, BubbleParams, ProjectionMode};

/// `ln(e^a + e^b)` without overflow; accepts `-inf` arguments.
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}
