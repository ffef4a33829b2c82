//! Explicit quadrature rules read off an eigendecomposition.
//!
//! Nodes are the eigenvalues `λᵢ`, weights the squared first components
//! `[uᵢ]₀²` of the eigenvectors. An optional node transform maps the nodes
//! onto the argument of the outer function (`λ ↦ λ³` for `g = x^(1/3)`).

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::eigsym::{symmetric_eigen, EigDecomp};
use crate::error::{Error, Result};
use crate::matfun::ScalarFunction;
use crate::opmatrix::OperatorMatrix;
use crate::scalars::bf_to_f64;

/// Absolute slack for range and interlacing checks.
pub const CHECK_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    raw_nodes: Vec<f64>,
    weights: Vec<f64>,
    transform: Option<ScalarFunction>,
    provenance: String,
}

impl QuadratureRule {
    /// Transformed nodes, ascending in `λ`.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Eigenvalues before the node transform.
    pub fn raw_nodes(&self) -> &[f64] {
        &self.raw_nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn transform(&self) -> Option<&ScalarFunction> {
        self.transform.as_ref()
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn with_provenance(mut self, provenance: impl Into<String>) -> Self {
        self.provenance = provenance.into();
        self
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn weights_positive(&self) -> bool {
        self.weights.iter().all(|w| *w > 0.0)
    }

    /// `Σ wᵢ xᵢ^y (y + 1) − 1`, the relative error against `∫₀¹ x^y dx`.
    pub fn power_error(&self, y: f64) -> f64 {
        let sum: f64 = self.nodes.iter().zip(&self.weights).map(|(x, w)| w * x.powf(y)).sum();
        sum * (y + 1.0) - 1.0
    }

    /// CSV with header `index,node,weight`, shortest round-trip numbers, LF endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,node,weight\n");
        for (i, (x, w)) in self.nodes.iter().zip(&self.weights).enumerate() {
            writeln!(out, "{i},{x:?},{w:?}").expect("write to string");
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut file = std::fs::File::create(path)?;
        file.write_all(self.to_csv().as_bytes())?;
        Ok(())
    }
}

/// Nodes `t(λᵢ)` and weights `[uᵢ]₀²`, rounded to binary64.
///
/// The transform is evaluated at the working precision.
pub fn extract_rule(eig: &EigDecomp, transform: Option<ScalarFunction>) -> QuadratureRule {
    let raw_nodes = eig.values_f64();
    let nodes = match &transform {
        Some(t) => eig.values().iter().map(|l| bf_to_f64(&t.eval_big(l))).collect(),
        None => raw_nodes.clone(),
    };
    let u = eig.vectors();
    let weights = (0..eig.size()).map(|i| bf_to_f64(&(&u[(0, i)] * &u[(0, i)]))).collect();
    QuadratureRule {
        nodes,
        raw_nodes,
        weights,
        transform,
        provenance: String::new(),
    }
}

/// Decompose `m` and extract its rule, tagging it with the basis and inner function.
pub fn rule_from_operator(m: &OperatorMatrix, transform: Option<ScalarFunction>) -> Result<QuadratureRule> {
    let eig = symmetric_eigen(m)?;
    let info = m.basis();
    let provenance = format!("{}[{}], g = {}", info.family, info.size, m.inner());
    Ok(extract_rule(&eig, transform).with_provenance(provenance))
}

/// `Σ wᵢ f(xᵢ)` over the (transformed) nodes.
pub fn apply_rule(rule: &QuadratureRule, f: &ScalarFunction) -> Result<f64> {
    f.check_domain(rule.nodes.iter().copied())?;
    Ok(rule.nodes.iter().zip(&rule.weights).map(|(x, w)| w * f.eval(*x)).sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RangeReport {
    pub ok: bool,
    /// Largest distance of a raw node outside `[inf, sup]`, zero if none.
    pub max_excess: f64,
    pub outside: Vec<usize>,
}

/// Raw nodes inside `[inf − 1e-12, sup + 1e-12]`.
pub fn check_range(rule: &QuadratureRule, inf: f64, sup: f64) -> RangeReport {
    let mut max_excess = 0.0f64;
    let mut outside = Vec::new();
    for (i, &x) in rule.raw_nodes.iter().enumerate() {
        let excess = (inf - x).max(x - sup).max(0.0);
        max_excess = max_excess.max(excess);
        if excess > CHECK_TOLERANCE {
            outside.push(i);
        }
    }
    RangeReport {
        ok: outside.is_empty(),
        max_excess,
        outside,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterlacingReport {
    pub ok: bool,
    /// Largest violation of `βᵢ ≤ αᵢ ≤ βᵢ₊₁`, zero if none.
    pub max_violation: f64,
}

/// Non-strict interlacing of `α` (size `n+1`) inside `β` (size `n+2`).
pub fn check_interlacing(smaller: &QuadratureRule, larger: &QuadratureRule) -> Result<InterlacingReport> {
    let alpha = &smaller.raw_nodes;
    let beta = &larger.raw_nodes;
    if beta.len() != alpha.len() + 1 {
        return Err(Error::SizeMismatch {
            left: alpha.len(),
            right: beta.len(),
        });
    }
    let mut max_violation = 0.0f64;
    for (i, a) in alpha.iter().enumerate() {
        max_violation = max_violation.max(beta[i] - a).max(a - beta[i + 1]);
    }
    Ok(InterlacingReport {
        ok: max_violation <= CHECK_TOLERANCE,
        max_violation,
    })
}
