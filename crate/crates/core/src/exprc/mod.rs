//! Integrand expressions over matrix-valued inner functions.
//!
//! An expression such as `exp(g1)*log1p(g2)` is parsed into an [`Expr`],
//! lowered against a [`Registry`] of inner functions into an [`EvalPlan`],
//! and evaluated to the corner `[f(M)]₀₀` or the full matrix.

mod parser;
mod plan;

pub use parser::{parse, Expr};
pub use plan::{compile, EvalPlan, Output, OutputKind, Registry, Step};

use crate::error::Result;
use crate::scalars::BigFloat;

/// Parse, compile and evaluate to the corner in one call.
pub fn integrate(src: &str, registry: &Registry, symmetrize: bool) -> Result<BigFloat> {
    let plan = compile(&parse(src)?, registry, symmetrize)?;
    match plan.evaluate()? {
        Output::Scalar(x) => Ok(x),
        Output::Matrix(_) => unreachable!("plans compile to corner output"),
    }
}
