//! Finite multiplication-operator matrices over a non-orthonormal basis.
//!
//! Gram entries `⟨φ̃ᵢ, φ̃ⱼ⟩` and raw operator entries `⟨φ̃ᵢ, g φ̃ⱼ⟩` are exact
//! rationals. Rounding starts at the Cholesky factor `RᵀR = G`, after which
//! the orthonormal-basis matrix `R⁻ᵀ M̃ R⁻¹` is obtained with two triangular
//! solves.
//!
//! Cholesky and both solves only ever read the leading `k`×`k` block to
//! produce the leading `k`×`k` block of their output, so a prefix of the basis
//! yields bit-identical entries to the corresponding block of a larger
//! assembly (see [`OperatorMatrix::leading`]).

use std::ops::Deref;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, FloatMatrix, RationalMatrix};
use crate::scalars::{
    bf_is_negative, bf_is_zero, bf_sqrt, bf_to_f64, check_precision, rat_to_bigfloat, BigFloat,
    Rational,
};
use crate::symfunc::{MomentOracle, SymFunc};

fn check_basis(basis: &[SymFunc], oracle: &dyn MomentOracle) -> Result<()> {
    if basis.is_empty() {
        return Err(Error::EmptyBasis);
    }
    for f in basis {
        if f.dim() != oracle.dim() {
            return Err(Error::DimensionMismatch {
                left: f.dim(),
                right: oracle.dim(),
            });
        }
    }
    Ok(())
}

/// Exact symmetric matrix `[⟨φ̃ᵢ, h φ̃ⱼ⟩]` for a fixed weight-side factor `h`.
fn assemble(basis: &[SymFunc], h: Option<&SymFunc>, oracle: &dyn MomentOracle) -> Result<RationalMatrix> {
    check_basis(basis, oracle)?;
    let n = basis.len();
    let left: Vec<SymFunc> = match h {
        Some(g) => basis.iter().map(|f| f.mul(g)).collect::<Result<_>>()?,
        None => basis.to_vec(),
    };
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let values: Vec<Rational> = pairs
        .par_iter()
        .map(|&(i, j)| oracle.inner(&left[i], &basis[j]))
        .collect::<Result<_>>()?;
    let mut m = DenseMatrix::filled(n, Rational::ZERO);
    for (&(i, j), v) in pairs.iter().zip(values) {
        m[(j, i)] = v.clone();
        m[(i, j)] = v;
    }
    Ok(m)
}

/// Gram matrix `G = [⟨φ̃ᵢ, φ̃ⱼ⟩]`, exact.
pub fn gram(basis: &[SymFunc], oracle: &dyn MomentOracle) -> Result<RationalMatrix> {
    assemble(basis, None, oracle)
}

/// `M̃ = [⟨φ̃ᵢ, g φ̃ⱼ⟩]`, exact.
pub fn raw_operator(basis: &[SymFunc], g: &SymFunc, oracle: &dyn MomentOracle) -> Result<RationalMatrix> {
    if g.dim() != oracle.dim() {
        return Err(Error::DimensionMismatch {
            left: g.dim(),
            right: oracle.dim(),
        });
    }
    assemble(basis, Some(g), oracle)
}

/// Upper-triangular `R` with positive diagonal and `RᵀR = G`, at `precision` bits.
pub fn cholesky(gram: &RationalMatrix, precision: usize) -> Result<FloatMatrix> {
    check_precision(precision)?;
    if !gram.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let g = gram.to_float(precision)?;
    let n = g.size();
    let mut r = FloatMatrix::zeros(n, precision);
    for j in 0..n {
        let mut pivot = g[(j, j)].clone();
        for k in 0..j {
            pivot -= &r[(k, j)] * &r[(k, j)];
        }
        if bf_is_negative(&pivot) || bf_is_zero(&pivot) {
            return Err(Error::DependentBasis {
                index: j,
                pivot: bf_to_f64(&pivot),
            });
        }
        let d = bf_sqrt(&pivot)?;
        for i in j + 1..n {
            let mut s = g[(j, i)].clone();
            for k in 0..j {
                s -= &r[(k, j)] * &r[(k, i)];
            }
            r[(j, i)] = s / &d;
        }
        r[(j, j)] = d;
    }
    Ok(r)
}

/// Solve `Rᵀ X = B` for upper-triangular `R` (forward substitution, column by column).
fn solve_upper_transposed(r: &FloatMatrix, b: &FloatMatrix) -> FloatMatrix {
    let n = r.size();
    let p = r.precision();
    let mut x = FloatMatrix::zeros(n, p);
    for col in 0..n {
        for i in 0..n {
            let mut s = b[(i, col)].clone();
            for l in 0..i {
                s -= &r[(l, i)] * &x[(l, col)];
            }
            x[(i, col)] = s / &r[(i, i)];
        }
    }
    x
}

/// Which basis the operator was built over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisInfo {
    /// Family name, or `custom`.
    pub family: String,
    /// Number of basis functions (`n + 1`).
    pub size: usize,
}

/// Cholesky factor of a basis, reusable for any number of inner functions.
#[derive(Debug, Clone)]
pub struct Orthonormalizer {
    basis: Vec<SymFunc>,
    info: BasisInfo,
    oracle: Arc<dyn MomentOracle>,
    gram: RationalMatrix,
    r: FloatMatrix,
    precision: usize,
}

impl Orthonormalizer {
    pub fn new(
        basis: Vec<SymFunc>,
        family: impl Into<String>,
        oracle: Arc<dyn MomentOracle>,
        precision: usize,
    ) -> Result<Self> {
        check_precision(precision)?;
        let gram = gram(&basis, oracle.as_ref())?;
        let r = cholesky(&gram, precision)?;
        let info = BasisInfo {
            family: family.into(),
            size: basis.len(),
        };
        Ok(Self {
            basis,
            info,
            oracle,
            gram,
            r,
            precision,
        })
    }

    pub fn basis(&self) -> &[SymFunc] {
        &self.basis
    }

    pub fn info(&self) -> &BasisInfo {
        &self.info
    }

    pub fn oracle(&self) -> &dyn MomentOracle {
        self.oracle.as_ref()
    }

    pub fn gram(&self) -> &RationalMatrix {
        &self.gram
    }

    pub fn cholesky_factor(&self) -> &FloatMatrix {
        &self.r
    }

    pub fn precision(&self) -> usize {
        self.precision
    }

    pub fn dim(&self) -> usize {
        self.oracle.dim()
    }

    /// `M_n[g]` in the implicitly orthonormalized basis.
    pub fn project(&self, g: &SymFunc) -> Result<OperatorMatrix> {
        let raw = raw_operator(&self.basis, g, self.oracle.as_ref())?;
        let entries = self.orthonormalize(&raw)?;
        Ok(OperatorMatrix {
            entries,
            basis: self.info.clone(),
            inner: g.clone(),
            precision: self.precision,
        })
    }

    /// `R⁻ᵀ A R⁻¹` for a symmetric rational `A`, symmetrized.
    pub fn orthonormalize(&self, raw: &RationalMatrix) -> Result<FloatMatrix> {
        if raw.size() != self.r.size() {
            return Err(Error::SizeMismatch {
                left: raw.size(),
                right: self.r.size(),
            });
        }
        let a = raw.to_float(self.precision)?;
        // X = R⁻ᵀ A, then M = X R⁻¹, i.e. Mᵀ = R⁻ᵀ Xᵀ
        let x = solve_upper_transposed(&self.r, &a);
        let mt = solve_upper_transposed(&self.r, &x.transpose());
        Ok(mt.transpose().symmetrized())
    }

    /// Coefficients `vᵢ = ⟨φᵢ, ψ⟩` of `ψ` in the orthonormalized basis.
    pub fn coefficients(&self, psi: &SymFunc) -> Result<Vec<BigFloat>> {
        let n = self.basis.len();
        let mut rhs = Vec::with_capacity(n);
        for f in &self.basis {
            rhs.push(rat_to_bigfloat(&self.oracle.inner(f, psi)?, self.precision)?);
        }
        let mut v: Vec<BigFloat> = Vec::with_capacity(n);
        for i in 0..n {
            let mut s = rhs[i].clone();
            for (l, vl) in v.iter().enumerate() {
                s -= &self.r[(l, i)] * vl;
            }
            v.push(s / &self.r[(i, i)]);
        }
        Ok(v)
    }

    /// Relative Frobenius residual `‖RᵀR − G‖ / ‖G‖`.
    pub fn cholesky_residual(&self) -> Result<f64> {
        let g = self.gram.to_float(self.precision)?;
        let rtr = self.r.transpose().matmul(&self.r)?;
        Ok(bf_to_f64(&(rtr.frobenius_distance(&g) / g.frobenius())))
    }
}

/// The matrix `M_n[g]`, indexed from 0, together with what it was built from.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    entries: FloatMatrix,
    basis: BasisInfo,
    inner: SymFunc,
    precision: usize,
}

impl OperatorMatrix {
    pub fn entries(&self) -> &FloatMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> FloatMatrix {
        self.entries
    }

    pub fn basis(&self) -> &BasisInfo {
        &self.basis
    }

    pub fn inner(&self) -> &SymFunc {
        &self.inner
    }

    pub fn precision(&self) -> usize {
        self.precision
    }

    /// Index of the last basis function, `n`.
    pub fn n(&self) -> usize {
        self.entries.size() - 1
    }

    /// `M_{k-1}[g]`: the operator for the first `k` basis functions.
    pub fn leading(&self, k: usize) -> OperatorMatrix {
        OperatorMatrix {
            entries: self.entries.leading(k),
            basis: BasisInfo {
                family: self.basis.family.clone(),
                size: k,
            },
            inner: self.inner.clone(),
            precision: self.precision,
        }
    }

    /// Relative Frobenius residual of `Rᵀ M R` against the exact `M̃`.
    pub fn reconstruction_residual(&self, ortho: &Orthonormalizer) -> Result<f64> {
        let raw = raw_operator(ortho.basis(), &self.inner, ortho.oracle())?.to_float(self.precision)?;
        let r = ortho.cholesky_factor();
        let back = r.transpose().matmul(&self.entries)?.matmul(r)?;
        let scale = raw.frobenius();
        if bf_is_zero(&scale) {
            return Ok(bf_to_f64(&back.frobenius()));
        }
        Ok(bf_to_f64(&(back.frobenius_distance(&raw) / scale)))
    }
}

impl Deref for OperatorMatrix {
    type Target = FloatMatrix;

    fn deref(&self) -> &FloatMatrix {
        &self.entries
    }
}

/// `M_n[g]` for a basis, building the Cholesky factor on the way.
pub fn operator_matrix(
    basis: &[SymFunc],
    g: &SymFunc,
    oracle: Arc<dyn MomentOracle>,
    precision: usize,
) -> Result<OperatorMatrix> {
    Orthonormalizer::new(basis.to_vec(), "custom", oracle, precision)?.project(g)
}

/// Largest `|a_ij|` among the entries off the tridiagonal band.
pub fn off_tridiagonal_max(m: &FloatMatrix) -> f64 {
    let n = m.size();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if i.abs_diff(j) > 1 {
                worst = worst.max(bf_to_f64(&m[(i, j)]).abs());
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::{bf_to_rational, rat_int, ratio};
    use crate::symfunc::{basis_family, UnitBox};

    fn p(src: &str, dim: usize) -> SymFunc {
        SymFunc::parse(src, dim).unwrap()
    }

    fn rows(m: &RationalMatrix) -> Vec<Vec<Rational>> {
        m.rows()
    }

    #[test]
    fn gram_examples() {
        let one = UnitBox::new(1);
        assert_eq!(rows(&gram(&[SymFunc::one(1)], &one).unwrap()), vec![vec![rat_int(1)]]);

        let b = [p("1", 1), p("x^(1/3)", 1), p("x", 1)];
        let expected = vec![
            vec![rat_int(1), ratio(3, 4), ratio(1, 2)],
            vec![ratio(3, 4), ratio(3, 5), ratio(3, 7)],
            vec![ratio(1, 2), ratio(3, 7), ratio(1, 3)],
        ];
        assert_eq!(rows(&gram(&b, &one).unwrap()), expected);

        let b2 = [p("1", 2), p("x+y", 2)];
        assert_eq!(
            rows(&gram(&b2, &UnitBox::new(2)).unwrap()),
            vec![vec![rat_int(1), rat_int(1)], vec![rat_int(1), ratio(7, 6)]]
        );
    }

    #[test]
    fn raw_operator_examples() {
        let one = UnitBox::new(1);
        let x = p("x", 1);
        assert_eq!(rows(&raw_operator(&[SymFunc::one(1)], &x, &one).unwrap()), vec![vec![ratio(1, 2)]]);
        assert_eq!(
            rows(&raw_operator(&[p("1", 1), p("x^(1/3)", 1)], &x, &one).unwrap()),
            vec![vec![ratio(1, 2), ratio(3, 7)], vec![ratio(3, 7), ratio(3, 8)]]
        );
        // ∫∫ xy(x+y)² = 1/8 + 2/9 + 1/8
        assert_eq!(
            rows(&raw_operator(&[p("1", 2), p("x+y", 2)], &p("x*y", 2), &UnitBox::new(2)).unwrap()),
            vec![vec![ratio(1, 4), ratio(1, 3)], vec![ratio(1, 3), ratio(17, 36)]]
        );
    }

    #[test]
    fn cholesky_examples() {
        let r = cholesky(&DenseMatrix::from_rows(vec![vec![rat_int(1)]]), 64).unwrap();
        assert_eq!(r.to_f64(), vec![vec![1.0]]);

        let g = DenseMatrix::from_rows(vec![vec![rat_int(4), rat_int(2)], vec![rat_int(2), rat_int(2)]]);
        assert_eq!(cholesky(&g, 64).unwrap().to_f64(), vec![vec![2.0, 1.0], vec![0.0, 1.0]]);

        let b = [p("1", 1), p("x^(1/3)", 1), p("x", 1)];
        let prec = 256;
        let r = cholesky(&gram(&b, &UnitBox::new(1)).unwrap(), prec).unwrap();
        assert_eq!(bf_to_rational(&r[(0, 0)]), rat_int(1));
        assert_eq!(bf_to_rational(&r[(0, 1)]), ratio(3, 4));
        // √(3/5 − 9/16) up to the cancellation in the pivot
        let expected = bf_sqrt(&rat_to_bigfloat(&ratio(3, 80), prec).unwrap()).unwrap();
        let rel = bf_to_f64(&((&r[(1, 1)] - &expected) / &expected)).abs();
        assert!(rel < 2f64.powi(-(prec as i32) + 8), "{rel:e}");
    }

    #[test]
    fn dependent_basis_names_index() {
        let b = [p("1", 1), p("x", 1), p("2*x + 3", 1)];
        let e = Orthonormalizer::new(b.to_vec(), "custom", Arc::new(UnitBox::new(1)), 128);
        assert!(matches!(e, Err(Error::DependentBasis { index: 2, .. })));
    }

    #[test]
    fn single_function_basis() {
        let m = operator_matrix(&[SymFunc::one(1)], &p("x", 1), Arc::new(UnitBox::new(1)), 128).unwrap();
        assert_eq!(m.to_f64(), vec![vec![0.5]]);
        assert_eq!(m.n(), 0);
    }

    /// Jacobi matrix of shifted Legendre polynomials on [0,1]: diagonal 1/2,
    /// off-diagonal k / (2 √(4k² − 1)).
    #[test]
    fn monomials_give_shifted_legendre_jacobi_matrix() {
        let basis = basis_family("monomials", 3, 1).unwrap();
        let m = operator_matrix(&basis, &p("x", 1), Arc::new(UnitBox::new(1)), 256).unwrap();
        let v = m.to_f64();
        for i in 0..3 {
            assert!((v[i][i] - 0.5).abs() < 1e-30);
        }
        let b = |k: f64| k / (2.0 * (4.0 * k * k - 1.0).sqrt());
        assert!((v[0][1] - b(1.0)).abs() < 1e-15);
        assert!((v[1][2] - b(2.0)).abs() < 1e-15);
        assert!((b(1.0) - 1.0 / 12f64.sqrt()).abs() < 1e-16);
        assert!(off_tridiagonal_max(&m) < 1e-70);
    }

    #[test]
    fn orthonormal_basis_leaves_raw_operator_unchanged() {
        // G = [[1]] so R = I
        let g = p("x^2 + 1/3", 1);
        let raw = raw_operator(&[SymFunc::one(1)], &g, &UnitBox::new(1)).unwrap();
        let m = operator_matrix(&[SymFunc::one(1)], &g, Arc::new(UnitBox::new(1)), 128).unwrap();
        assert_eq!(m[(0, 0)], rat_to_bigfloat(&raw[(0, 0)], 128).unwrap());

        let ortho = Orthonormalizer::new(vec![SymFunc::one(1)], "custom", Arc::new(UnitBox::new(1)), 128).unwrap();
        let a = DenseMatrix::from_rows(vec![vec![ratio(2, 3)]]);
        assert_eq!(ortho.orthonormalize(&a).unwrap()[(0, 0)], rat_to_bigfloat(&ratio(2, 3), 128).unwrap());
    }

    #[test]
    fn prefix_blocks_are_bitwise_identical() {
        let oracle: Arc<dyn MomentOracle> = Arc::new(UnitBox::new(2));
        let g = p("x*y", 2);
        let big = Orthonormalizer::new(basis_family("sum_product_powers", 7, 2).unwrap(), "sum_product_powers", oracle.clone(), 256)
            .unwrap()
            .project(&g)
            .unwrap();
        let small = Orthonormalizer::new(basis_family("sum_product_powers", 4, 2).unwrap(), "sum_product_powers", oracle, 256)
            .unwrap()
            .project(&g)
            .unwrap();
        assert_eq!(big.leading(4).entries(), small.entries());
    }

    #[test]
    fn residuals_are_tiny() {
        let prec = 512;
        let ortho = Orthonormalizer::new(
            basis_family("fractional_powers_13", 12, 1).unwrap(),
            "fractional_powers_13",
            Arc::new(UnitBox::new(1)),
            prec,
        )
        .unwrap();
        let bound = 2f64.powi(-(prec as i32) / 2);
        assert!(ortho.cholesky_residual().unwrap() <= bound);
        let m = ortho.project(&p("x^(1/3)", 1)).unwrap();
        assert!(m.is_symmetric());
        assert!(m.reconstruction_residual(&ortho).unwrap() <= bound);
    }
}
