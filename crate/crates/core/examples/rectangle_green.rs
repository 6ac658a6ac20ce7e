//! Regular part of the Dirichlet Green's function at the centre of a few
//! rectangles, with the Richardson error estimate, and a radial profile of
//! `G(x, 0)` for the square.

use towerlab::greens::{DomainSpec, GreenData};

fn main() -> towerlab::Result<()> {
    for (a, b) in [(1.0, 1.0), (1.5, 1.0), (2.0, 1.0), (4.0, 1.0)] {
        let g = GreenData::new(&DomainSpec::rectangle(a, b)?)?;
        println!(
            "[-{a}, {a}] x [-{b}, {b}]   H(0,0) = {:.10}  (+- {:.1e})",
            g.h00, g.h00_error
        );
    }
    let square = GreenData::new(&DomainSpec::rectangle(1.0, 1.0)?)?;
    let radii: Vec<f64> = (1..=9).map(|i| i as f64 / 10.0).collect();
    print!("\n{}", square.profile_csv(&radii)?);
    Ok(())
}
