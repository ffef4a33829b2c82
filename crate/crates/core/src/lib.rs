pub mod cli;
pub mod eigsym;
pub mod error;
pub mod exprc;
pub mod matfun;
pub mod matrix;
pub mod opmatrix;
pub mod quadrule;
pub mod scalars;
pub mod symfunc;

pub use error::{Error, Result};
