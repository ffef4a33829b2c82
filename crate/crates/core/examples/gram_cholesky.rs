//! Exact Gram matrix of a fractional basis, its Cholesky factor and the
//! residual ‖RᵀR − G‖ at a few working precisions. Double precision breaks down
//! before n = 16.

use std::sync::Arc;

use opquad::opmatrix::{gram, Orthonormalizer};
use opquad::scalars::rat_to_f64;
use opquad::symfunc::{basis_family, UnitBox};

fn main() -> opquad::Result<()> {
    let basis = basis_family("fractional_powers_13", 4, 1)?;
    let g = gram(&basis, &UnitBox::new(1))?;
    println!("G (exact):");
    for row in g.rows() {
        let text: Vec<String> = row.iter().map(|q| q.to_string()).collect();
        println!("  {}", text.join("  "));
    }
    println!("G (f64):");
    for row in g.rows() {
        println!("  {:?}", row.iter().map(rat_to_f64).collect::<Vec<_>>());
    }

    let basis = basis_family("fractional_powers_13", 16, 1)?;
    for p in [53, 128, 256, 512] {
        match Orthonormalizer::new(basis.clone(), "fractional_powers_13", Arc::new(UnitBox::new(1)), p) {
            Ok(o) => println!("P = {p:3}  cholesky residual {:.3e}", o.cholesky_residual()?),
            Err(e) => println!("P = {p:3}  {e}"),
        }
    }
    Ok(())
}
