use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::parser::Expr;
use crate::eigsym::symmetric_eigen;
use crate::error::{Error, Result};
use crate::matfun::{apply_matfun_with, corner, product, symmetrized_product, EvalMode, ScalarFunction};
use crate::matrix::FloatMatrix;
use crate::opmatrix::Orthonormalizer;
use crate::scalars::{bf_from_f64, BigFloat};
use crate::symfunc::SymFunc;

/// Inner functions `g1`…`g9` bound to a shared orthonormalized basis.
#[derive(Debug, Clone)]
pub struct Registry {
    ortho: Arc<Orthonormalizer>,
    inner: BTreeMap<u8, SymFunc>,
}

impl Registry {
    pub fn new(ortho: Arc<Orthonormalizer>) -> Self {
        Self {
            ortho,
            inner: BTreeMap::new(),
        }
    }

    /// Bind `gᵢ`, `i` in `1..=9`.
    pub fn bind(&mut self, index: u8, g: SymFunc) -> Result<()> {
        if !(1..=9).contains(&index) {
            return Err(Error::UnresolvedSymbol(format!("g{index}")));
        }
        if g.dim() != self.ortho.dim() {
            return Err(Error::DimensionMismatch {
                left: self.ortho.dim(),
                right: g.dim(),
            });
        }
        self.inner.insert(index, g);
        Ok(())
    }

    pub fn with(mut self, index: u8, g: SymFunc) -> Result<Self> {
        self.bind(index, g)?;
        Ok(self)
    }

    pub fn get(&self, index: u8) -> Option<&SymFunc> {
        self.inner.get(&index)
    }

    pub fn orthonormalizer(&self) -> &Arc<Orthonormalizer> {
        &self.ortho
    }
}

/// One primitive matrix operation; operands index earlier steps.
#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    Build { symbol: u8, g: SymFunc },
    /// `c·I`.
    Constant(f64),
    Apply { f: ScalarFunction, arg: usize },
    Add(usize, usize),
    Scale { factor: f64, arg: usize },
    /// One-sided product in source order, or the two-order average.
    Product { factors: Vec<usize>, symmetrize: bool },
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Step::Build { symbol, g } => write!(f, "build M[g{symbol}] with g{symbol} = {g}"),
            Step::Constant(c) => write!(f, "{c:?}·I"),
            Step::Apply { f: func, arg } => write!(f, "{func}(%{arg})"),
            Step::Add(a, b) => write!(f, "%{a} + %{b}"),
            Step::Scale { factor, arg } => write!(f, "{factor:?}·%{arg}"),
            Step::Product { factors, symmetrize } => {
                let list: Vec<String> = factors.iter().map(|i| format!("%{i}")).collect();
                if *symmetrize {
                    write!(f, "sym({})", list.join(", "))
                } else {
                    f.write_str(&list.join(" · "))
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputKind {
    /// Upper-left entry of the final matrix.
    #[default]
    Corner,
    Matrix,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Output {
    Scalar(BigFloat),
    Matrix(FloatMatrix),
}

impl Output {
    pub fn as_scalar(&self) -> Option<&BigFloat> {
        match self {
            Output::Scalar(x) => Some(x),
            Output::Matrix(_) => None,
        }
    }

    pub fn as_matrix(&self) -> Option<&FloatMatrix> {
        match self {
            Output::Matrix(m) => Some(m),
            Output::Scalar(_) => None,
        }
    }
}

/// Straight-line program producing the integrand matrix; the last step is the result.
#[derive(Debug, Clone)]
pub struct EvalPlan {
    steps: Vec<Step>,
    ortho: Arc<Orthonormalizer>,
    output: OutputKind,
    mode: EvalMode,
}

struct Compiler<'a> {
    registry: &'a Registry,
    symmetrize: bool,
    steps: Vec<Step>,
    symmetric: Vec<bool>,
    // step is a multiple of I
    scalar: Vec<bool>,
    built: BTreeMap<u8, usize>,
}

impl Compiler<'_> {
    fn push(&mut self, step: Step, symmetric: bool) -> usize {
        let scalar = match &step {
            Step::Constant(_) => true,
            Step::Scale { arg, .. } | Step::Apply { arg, .. } => self.scalar[*arg],
            Step::Add(a, b) => self.scalar[*a] && self.scalar[*b],
            Step::Product { factors, .. } => factors.iter().all(|&i| self.scalar[i]),
            Step::Build { .. } => false,
        };
        self.scalar.push(scalar);
        self.steps.push(step);
        self.symmetric.push(symmetric);
        self.steps.len() - 1
    }

    fn factors<'e>(e: &'e Expr, out: &mut Vec<&'e Expr>) {
        match e {
            Expr::Mul(a, b) => {
                Self::factors(a, out);
                Self::factors(b, out);
            }
            _ => out.push(e),
        }
    }

    fn emit(&mut self, e: &Expr) -> Result<usize> {
        Ok(match e {
            Expr::Const(c) => self.push(Step::Constant(*c), true),
            Expr::Inner(i) => {
                if let Some(&at) = self.built.get(i) {
                    return Ok(at);
                }
                let g = self.registry.get(*i).ok_or_else(|| Error::UnresolvedSymbol(format!("g{i}")))?;
                let at = self.push(Step::Build { symbol: *i, g: g.clone() }, true);
                self.built.insert(*i, at);
                at
            }
            Expr::Add(a, b) => {
                let (a, b) = (self.emit(a)?, self.emit(b)?);
                let sym = self.symmetric[a] && self.symmetric[b];
                self.push(Step::Add(a, b), sym)
            }
            Expr::Neg(a) => {
                let a = self.emit(a)?;
                let sym = self.symmetric[a];
                self.push(Step::Scale { factor: -1.0, arg: a }, sym)
            }
            Expr::Apply(f, a) => {
                let a = self.emit(a)?;
                if !self.symmetric[a] {
                    return Err(Error::NonSymmetricArgument(f.name()));
                }
                self.push(Step::Apply { f: f.clone(), arg: a }, true)
            }
            Expr::Mul(..) => {
                let mut list = Vec::new();
                Self::factors(e, &mut list);
                let mut factors = Vec::with_capacity(list.len());
                for f in list {
                    factors.push(self.emit(f)?);
                }
                if self.symmetrize && factors.iter().any(|&i| !self.symmetric[i]) {
                    return Err(Error::NonSymmetricArgument("symmetrized product".into()));
                }
                // multiples of I commute with everything
                let mut matrices = factors.iter().filter(|&&i| !self.scalar[i]);
                let sym = match (matrices.next(), matrices.next()) {
                    (None, _) => true,
                    (Some(&i), None) => self.symmetric[i],
                    _ => self.symmetrize,
                };
                let symmetrize = self.symmetrize;
                self.push(Step::Product { factors, symmetrize }, sym)
            }
        })
    }
}

/// Lower an expression to a plan over the registry's basis.
///
/// Products are flattened and taken in source order, or as the average of
/// the forward and reversed orders when `symmetrize` is set.
pub fn compile(ast: &Expr, registry: &Registry, symmetrize: bool) -> Result<EvalPlan> {
    let mut c = Compiler {
        registry,
        symmetrize,
        steps: Vec::new(),
        symmetric: Vec::new(),
        scalar: Vec::new(),
        built: BTreeMap::new(),
    };
    c.emit(ast)?;
    Ok(EvalPlan {
        steps: c.steps,
        ortho: Arc::clone(&registry.ortho),
        output: OutputKind::Corner,
        mode: EvalMode::Double,
    })
}

impl EvalPlan {
    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn output(&self) -> OutputKind {
        self.output
    }

    pub fn mode(&self) -> EvalMode {
        self.mode
    }

    /// Full basis size, the largest size the plan can be evaluated at.
    pub fn size(&self) -> usize {
        self.ortho.info().size
    }

    pub fn with_output(mut self, output: OutputKind) -> Self {
        self.output = output;
        self
    }

    pub fn with_mode(mut self, mode: EvalMode) -> Self {
        self.mode = mode;
        self
    }

    /// Run the plan on the full basis.
    pub fn evaluate(&self) -> Result<Output> {
        Ok(self.evaluate_sizes(&[self.size()])?.pop().expect("one size"))
    }

    /// Run the plan on leading sub-bases of the given sizes, building each
    /// operator matrix once.
    pub fn evaluate_sizes(&self, sizes: &[usize]) -> Result<Vec<Output>> {
        let full = self.size();
        if let Some(&bad) = sizes.iter().find(|&&k| k == 0 || k > full) {
            return Err(Error::SizeMismatch { left: full, right: bad });
        }
        let mut built: BTreeMap<usize, FloatMatrix> = BTreeMap::new();
        for (i, step) in self.steps.iter().enumerate() {
            if let Step::Build { g, .. } = step {
                built.insert(i, self.ortho.project(g)?.into_entries());
            }
        }
        sizes.iter().map(|&k| self.run(k, &built)).collect()
    }

    fn run(&self, k: usize, built: &BTreeMap<usize, FloatMatrix>) -> Result<Output> {
        let p = self.ortho.precision();
        let mut values: Vec<FloatMatrix> = Vec::with_capacity(self.steps.len());
        for (i, step) in self.steps.iter().enumerate() {
            let m = match step {
                Step::Build { .. } => built[&i].leading(k),
                Step::Constant(c) => FloatMatrix::identity(k, p).scale(&bf_from_f64(*c, p)),
                Step::Apply { f, arg } => apply_matfun_with(f, &symmetric_eigen(&values[*arg])?, self.mode)?,
                Step::Add(a, b) => values[*a].add(&values[*b])?,
                Step::Scale { factor, arg } => values[*arg].scale(&bf_from_f64(*factor, p)),
                Step::Product { factors, symmetrize } => {
                    let refs: Vec<&FloatMatrix> = factors.iter().map(|&j| &values[j]).collect();
                    if *symmetrize {
                        symmetrized_product(&refs)?
                    } else {
                        product(&refs)?
                    }
                }
            };
            values.push(m);
        }
        let last = values.pop().expect("plans are never empty");
        Ok(match self.output {
            OutputKind::Corner => Output::Scalar(corner(&last)),
            OutputKind::Matrix => Output::Matrix(last),
        })
    }
}

impl fmt::Display for EvalPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, step) in self.steps.iter().enumerate() {
            writeln!(f, "%{i} = {step}")?;
        }
        match self.output {
            OutputKind::Corner => write!(f, "corner(%{})", self.steps.len() - 1),
            OutputKind::Matrix => write!(f, "matrix(%{})", self.steps.len() - 1),
        }
    }
}
