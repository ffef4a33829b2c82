//! Monomial basis with g = x: the eigenvalues of the projected operator are
//! the Gauss–Legendre nodes on [0, 1].
//!
//! cargo run --example gauss_legendre -- 6

use std::sync::Arc;

use opquad::opmatrix::Orthonormalizer;
use opquad::quadrule::rule_from_operator;
use opquad::symfunc::{basis_family, SymFunc, UnitBox};

fn main() -> opquad::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5);
    let basis = basis_family("monomials", n, 1)?;
    let ortho = Orthonormalizer::new(basis, "monomials", Arc::new(UnitBox::new(1)), 256)?;
    let m = ortho.project(&SymFunc::variable(0, 1))?;
    let rule = rule_from_operator(&m, None)?;

    println!("{n}-point rule, weights sum to {:.17}", rule.weight_sum());
    for (x, w) in rule.nodes().iter().zip(rule.weights()) {
        println!("  {x:.17}  {w:.17}");
    }
    for k in 0..=2 * n {
        println!("x^{k:<2} error {:+.3e}", rule.power_error(k as f64));
    }
    Ok(())
}
