//! f(M) through the eigendecomposition, including a user-defined function.

use std::sync::Arc;

use opquad::eigsym::symmetric_eigen;
use opquad::matfun::{apply_matfun_with, corner, CustomFunction, Domain, EvalMode, ScalarFunction};
use opquad::opmatrix::Orthonormalizer;
use opquad::scalars::bf_to_f64;
use opquad::symfunc::{basis_family, SymFunc, UnitBox};

fn main() -> opquad::Result<()> {
    let basis = basis_family("monomials", 8, 1)?;
    let ortho = Orthonormalizer::new(basis, "monomials", Arc::new(UnitBox::new(1)), 256)?;
    let eig = symmetric_eigen(ortho.project(&SymFunc::variable(0, 1))?.entries())?;

    let sinc = CustomFunction::new("sinc", Domain::REALS, |x: f64| if x == 0.0 { 1.0 } else { x.sin() / x });
    let functions = [
        (ScalarFunction::Exp, std::f64::consts::E - 1.0),
        (ScalarFunction::Sqrt, 2.0 / 3.0),
        (ScalarFunction::Power(2.5), 1.0 / 3.5),
        (ScalarFunction::Log1p, 2.0 * std::f64::consts::LN_2 - 1.0),
        (ScalarFunction::Custom(sinc), 0.946_083_070_367_183_1),
    ];
    for (f, exact) in functions {
        let value = bf_to_f64(&corner(&apply_matfun_with(&f, &eig, EvalMode::Double)?));
        println!("{:<8} {value:.16}  error {:+.2e}", f.name(), value - exact);
    }

    let neg = ScalarFunction::Log1p.check_domain([-1.5]);
    println!("log1p on -1.5: {}", neg.unwrap_err());
    Ok(())
}
