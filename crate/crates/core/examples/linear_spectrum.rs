use towerlab::linearized::{band_ratio, min_singular_sweep, Sector};
use towerlab::residual::geometric_sweep;

/// Smallest singular value of the linearised operator, even sector versus
/// all Fourier modes. In the even sector `σ_min |ln λ|` stays in a band; the
/// unrestricted sector picks up the near-kernel of the odd half-weight mode.
fn main() -> towerlab::Result<()> {
    let lambdas = geometric_sweep(1e-2, 1e-6, 5)?;
    for sector in [Sector::Even, Sector::Unrestricted] {
        let pts = min_singular_sweep(1, &lambdas, 1.0, sector, None, 64.0)?;
        println!("{sector:?}");
        for p in &pts {
            println!(
                "  lambda {:.0e}  sigma {:.4e}  scaled {:.4}  mode {}",
                p.lambda, p.sigma_min, p.scaled, p.argmin_mode
            );
        }
        println!("  band ratio {:.3}", band_ratio(&pts));
    }
    Ok(())
}
