//! Parse an expression over inner functions, compile it to a plan and evaluate
//! its corner at several sizes from a single build.
//!
//! cargo run --example expression -- "sqrt(g1) * exp(-g2)"

use std::sync::Arc;

use opquad::exprc::{compile, parse, Registry};
use opquad::opmatrix::Orthonormalizer;
use opquad::scalars::bf_to_f64;
use opquad::symfunc::{basis_family, SymFunc, UnitBox};

fn main() -> opquad::Result<()> {
    let src = std::env::args().nth(1).unwrap_or_else(|| "exp(g1) * log1p(g2)".into());
    let size = 12;
    let basis = basis_family("sum_product_powers", size, 2)?;
    let ortho = Orthonormalizer::new(basis, "sum_product_powers", Arc::new(UnitBox::new(2)), 512)?;
    let registry = Registry::new(Arc::new(ortho))
        .with(1, SymFunc::parse("x*y", 2)?)?
        .with(2, SymFunc::parse("x+y", 2)?)?;

    let ast = parse(&src)?;
    let plan = compile(&ast, &registry, false)?;
    println!("{ast}\n{plan}");

    let sizes: Vec<usize> = (1..=size).collect();
    for (n, out) in sizes.iter().zip(plan.evaluate_sizes(&sizes)?) {
        println!("{n:2}  {:.16}", bf_to_f64(out.as_scalar().expect("corner output")));
    }
    Ok(())
}
