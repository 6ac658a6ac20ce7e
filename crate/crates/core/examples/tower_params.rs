//! Scales of a three-bubble tower on the unit disk as `λ` shrinks.
//! The `d` column should not move.

use towerlab::greens::robin_at_origin;
use towerlab::tower::select_parameters;
use towerlab::DomainSpec;

fn main() -> towerlab::Result<()> {
    let h00 = robin_at_origin(&DomainSpec::unit_disk())?;
    for lambda in [1e-2, 1e-4, 1e-8] {
        let p = select_parameters(3, lambda, h00)?;
        println!("lambda = {lambda:e}");
        print!("{}", p.table_csv());
        let worst = (0..p.k).map(|j| p.balance(j).abs()).fold(0.0, f64::max);
        println!("max balance defect {worst:.2e}\n");
    }
    Ok(())
}
