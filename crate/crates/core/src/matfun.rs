//! Functions of symmetric matrices through their eigendecomposition.
//!
//! `f(A) = U diag(f(λ₀), …, f(λₙ)) Uᵀ`. The scalar `f` is evaluated in
//! binary64 by default; [`EvalMode::Working`] evaluates it at the matrix
//! precision instead (custom callables always run in binary64). Identity,
//! `abs` and integer powers need no rounding to binary64 and always run at
//! the matrix precision.

use std::fmt;
use std::sync::Arc;

use dashu_int::IBig;

use crate::eigsym::{symmetric_eigen, EigDecomp};
use crate::error::{Error, Result};
use crate::matrix::FloatMatrix;
use crate::scalars::{bf_abs, bf_from_f64, bf_is_zero, bf_sqrt, bf_to_f64, bf_zero, BigFloat};

/// Interval on which a scalar function is defined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub lower: f64,
    pub upper: f64,
    pub lower_open: bool,
    pub upper_open: bool,
}

impl Domain {
    pub const REALS: Domain = Domain {
        lower: f64::NEG_INFINITY,
        upper: f64::INFINITY,
        lower_open: true,
        upper_open: true,
    };

    pub fn closed_from(lower: f64) -> Self {
        Domain {
            lower,
            lower_open: false,
            ..Self::REALS
        }
    }

    pub fn open_from(lower: f64) -> Self {
        Domain {
            lower,
            lower_open: true,
            ..Self::REALS
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lower_open { x > self.lower } else { x >= self.lower };
        let below = if self.upper_open { x < self.upper } else { x <= self.upper };
        above && below
    }
}

type Callable = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A user-supplied scalar function.
#[derive(Clone)]
pub struct CustomFunction {
    name: String,
    f: Callable,
    domain: Domain,
}

impl CustomFunction {
    pub fn new(name: impl Into<String>, domain: Domain, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            f: Arc::new(f),
            domain,
        }
    }
}

impl fmt::Debug for CustomFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomFunction")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .finish()
    }
}

/// Outer function `f` applied to eigenvalues.
#[derive(Debug, Clone)]
pub enum ScalarFunction {
    Exp,
    /// `log(1 + x)`.
    Log1p,
    Power(f64),
    Sqrt,
    Abs,
    Identity,
    Custom(CustomFunction),
}

impl PartialEq for ScalarFunction {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (ScalarFunction::Power(a), ScalarFunction::Power(b)) => a.to_bits() == b.to_bits(),
            (ScalarFunction::Custom(a), ScalarFunction::Custom(b)) => a.name == b.name,
            (a, b) => std::mem::discriminant(a) == std::mem::discriminant(b),
        }
    }
}

fn is_integer(y: f64) -> bool {
    y.fract() == 0.0 && y.abs() < 2f64.powi(31)
}

impl ScalarFunction {
    /// Name as used in expressions: `exp`, `log1p`, `sqrt`, `abs`, `identity`, `pow<y>`.
    pub fn name(&self) -> String {
        match self {
            ScalarFunction::Exp => "exp".into(),
            ScalarFunction::Log1p => "log1p".into(),
            ScalarFunction::Power(y) => format!("pow{y}"),
            ScalarFunction::Sqrt => "sqrt".into(),
            ScalarFunction::Abs => "abs".into(),
            ScalarFunction::Identity => "identity".into(),
            ScalarFunction::Custom(c) => c.name.clone(),
        }
    }

    /// Inverse of [`name`](Self::name) for the built-in functions.
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => ScalarFunction::Exp,
            "log1p" => ScalarFunction::Log1p,
            "sqrt" => ScalarFunction::Sqrt,
            "abs" => ScalarFunction::Abs,
            "identity" => ScalarFunction::Identity,
            _ => {
                let y = name.strip_prefix("pow")?;
                if y.is_empty() || !y.bytes().all(|b| b.is_ascii_digit() || b == b'.') {
                    return None;
                }
                ScalarFunction::Power(y.parse().ok()?)
            }
        })
    }

    pub fn domain(&self) -> Domain {
        match self {
            ScalarFunction::Exp | ScalarFunction::Abs | ScalarFunction::Identity => Domain::REALS,
            ScalarFunction::Log1p => Domain::open_from(-1.0),
            ScalarFunction::Sqrt => Domain::closed_from(0.0),
            ScalarFunction::Power(y) => {
                if is_integer(*y) && *y >= 0.0 {
                    Domain::REALS
                } else if *y > 0.0 {
                    Domain::closed_from(0.0)
                } else {
                    Domain::open_from(0.0)
                }
            }
            ScalarFunction::Custom(c) => c.domain,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            ScalarFunction::Exp => x.exp(),
            ScalarFunction::Log1p => x.ln_1p(),
            ScalarFunction::Power(y) => {
                if is_integer(*y) {
                    x.powi(*y as i32)
                } else {
                    x.powf(*y)
                }
            }
            ScalarFunction::Sqrt => x.sqrt(),
            ScalarFunction::Abs => x.abs(),
            ScalarFunction::Identity => x,
            ScalarFunction::Custom(c) => (c.f)(x),
        }
    }

    /// Evaluation at the precision of `x`.
    pub fn eval_big(&self, x: &BigFloat) -> BigFloat {
        let p = x.precision();
        match self {
            ScalarFunction::Exp => x.exp(),
            ScalarFunction::Log1p => x.ln_1p(),
            ScalarFunction::Power(y) => {
                if is_integer(*y) {
                    x.powi(IBig::from(*y as i64))
                } else if bf_is_zero(x) {
                    bf_zero(p)
                } else {
                    x.powf(&bf_from_f64(*y, p))
                }
            }
            ScalarFunction::Sqrt => bf_sqrt(x).unwrap_or_else(|_| bf_zero(p)),
            ScalarFunction::Abs => bf_abs(x),
            ScalarFunction::Identity => x.clone(),
            ScalarFunction::Custom(c) => bf_from_f64((c.f)(bf_to_f64(x)), p),
        }
    }

    /// True when the function is a finite sequence of exact operations.
    pub fn is_algebraic(&self) -> bool {
        match self {
            ScalarFunction::Identity | ScalarFunction::Abs => true,
            ScalarFunction::Power(y) => is_integer(*y) && *y >= 0.0,
            _ => false,
        }
    }

    /// Error listing every point of `xs` outside the domain.
    pub fn check_domain(&self, xs: impl IntoIterator<Item = f64>) -> Result<()> {
        let domain = self.domain();
        let bad: Vec<f64> = xs.into_iter().filter(|x| !domain.contains(*x)).collect();
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Domain {
                function: self.name(),
                values: bad,
            })
        }
    }
}

impl fmt::Display for ScalarFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvalMode {
    /// `f(λ)` in binary64, rounded back to the working precision.
    #[default]
    Double,
    /// `f(λ)` at the working precision.
    Working,
}

/// `f(A)` from a precomputed decomposition of `A`, symmetrized.
pub fn apply_matfun_with(f: &ScalarFunction, eig: &EigDecomp, mode: EvalMode) -> Result<FloatMatrix> {
    f.check_domain(eig.values_f64())?;
    let p = eig.vectors().precision();
    let diag: Vec<BigFloat> = eig
        .values()
        .iter()
        .map(|l| match mode {
            EvalMode::Double if !f.is_algebraic() => bf_from_f64(f.eval(bf_to_f64(l)), p),
            _ => f.eval_big(l),
        })
        .collect();
    Ok(eig.compose(&diag).symmetrized())
}

/// `f(A) = U diag(f(λ)) Uᵀ` with `f` evaluated in binary64.
pub fn apply_matfun(f: &ScalarFunction, a: &FloatMatrix) -> Result<FloatMatrix> {
    apply_matfun_with(f, &symmetric_eigen(a)?, EvalMode::Double)
}

/// `[A]₀₀`, the integral approximation `⟨1, f(M[g]) 1⟩`.
///
/// # Panics
/// Panics on an empty matrix.
pub fn corner(a: &FloatMatrix) -> BigFloat {
    assert!(a.size() > 0, "corner of an empty matrix");
    a[(0, 0)].clone()
}

/// Ordered product `A₁ A₂ ⋯ Aₘ`.
pub fn product(factors: &[&FloatMatrix]) -> Result<FloatMatrix> {
    let (first, rest) = factors.split_first().ok_or(Error::EmptyProduct)?;
    let mut acc = (*first).clone();
    for m in rest {
        acc = acc.matmul(m)?;
    }
    Ok(acc)
}

/// `(A₁⋯Aₘ + Aₘ⋯A₁) / 2`, exactly symmetric as stored.
pub fn symmetrized_product(factors: &[&FloatMatrix]) -> Result<FloatMatrix> {
    for m in factors {
        if !m.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
    }
    let forward = product(factors)?;
    if factors.len() == 1 {
        return Ok(forward);
    }
    let reversed: Vec<&FloatMatrix> = factors.iter().rev().copied().collect();
    let backward = product(&reversed)?;
    let n = forward.size();
    let two = BigFloat::from(2);
    let mut out = forward.clone();
    for i in 0..n {
        for j in i..n {
            // the four terms are added in a fixed, order-independent pattern
            let upper = &forward[(i, j)] + &backward[(i, j)];
            let lower = &forward[(j, i)] + &backward[(j, i)];
            let v = (upper + lower) / &two / &two;
            out[(j, i)] = v.clone();
            out[(i, j)] = v;
        }
    }
    Ok(out)
}

/// `f(A) v`; its first entry approximates `∫ f(g) ψ w` when `v` holds the
/// coefficients of `ψ` in the orthonormal basis.
pub fn apply_to_coefficients(f: &ScalarFunction, a: &FloatMatrix, v: &[BigFloat]) -> Result<Vec<BigFloat>> {
    if v.len() != a.size() {
        return Err(Error::SizeMismatch {
            left: a.size(),
            right: v.len(),
        });
    }
    apply_matfun(f, a)?.matvec(v)
}
