//! Small dense square matrices over exact rationals or [`BigFloat`].

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalars::{bf_one, bf_sqrt, bf_to_f64, bf_zero, BigFloat, Rational};

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    n: usize,
    data: Vec<T>,
}

pub type RationalMatrix = DenseMatrix<Rational>;
pub type FloatMatrix = DenseMatrix<BigFloat>;

impl<T: Clone> DenseMatrix<T> {
    pub fn filled(n: usize, value: T) -> Self {
        Self {
            n,
            data: vec![value; n * n],
        }
    }

    /// Build from a function of `(row, col)`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    /// # Panics
    /// Panics if the rows do not form a square.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            assert_eq!(row.len(), n, "matrix rows must form a square");
            data.extend(row);
        }
        Self { n, data }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].clone())
    }

    /// Leading `k`×`k` principal submatrix.
    pub fn leading(&self, k: usize) -> Self {
        assert!(k <= self.n);
        Self::from_fn(k, |i, j| self[(i, j)].clone())
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> DenseMatrix<U> {
        DenseMatrix {
            n: self.n,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        self.data.chunks(self.n.max(1)).map(|r| r.to_vec()).collect()
    }
}

impl<T> DenseMatrix<T> {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.data.iter()
    }
}

impl<T: PartialEq> DenseMatrix<T> {
    /// Exact symmetry of the stored entries.
    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }
}

impl<T> Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n + j]
    }
}

impl<T> IndexMut<(usize, usize)> for DenseMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}

impl RationalMatrix {
    pub fn to_float(&self, precision: usize) -> Result<FloatMatrix> {
        let mut data = Vec::with_capacity(self.data.len());
        for r in &self.data {
            data.push(crate::scalars::rat_to_bigfloat(r, precision)?);
        }
        Ok(DenseMatrix { n: self.n, data })
    }
}

impl FloatMatrix {
    pub fn zeros(n: usize, precision: usize) -> Self {
        Self::filled(n, bf_zero(precision))
    }

    pub fn identity(n: usize, precision: usize) -> Self {
        let mut m = Self::zeros(n, precision);
        for i in 0..n {
            m[(i, i)] = bf_one(precision);
        }
        m
    }

    pub fn from_f64_rows(rows: &[Vec<f64>], precision: usize) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| {
                    r.iter()
                        .map(|&x| crate::scalars::bf_from_f64(x, precision))
                        .collect()
                })
                .collect(),
        )
    }

    /// Precision of the (0,0) entry, taken as the matrix working precision.
    pub fn precision(&self) -> usize {
        self.data.first().map_or(0, |x| x.precision())
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        self.data
            .chunks(self.n.max(1))
            .map(|r| r.iter().map(bf_to_f64).collect())
            .collect()
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::SizeMismatch {
                left: self.n,
                right: other.n,
            });
        }
        let n = self.n;
        let p = self.precision().max(other.precision());
        Ok(Self::from_fn(n, |i, j| {
            let mut acc = bf_zero(p);
            for k in 0..n {
                acc += &self[(i, k)] * &other[(k, j)];
            }
            acc
        }))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::SizeMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(Self::from_fn(self.n, |i, j| &self[(i, j)] + &other[(i, j)]))
    }

    pub fn scale(&self, factor: &BigFloat) -> Self {
        self.map(|x| x * factor)
    }

    pub fn matvec(&self, v: &[BigFloat]) -> Result<Vec<BigFloat>> {
        if v.len() != self.n {
            return Err(Error::SizeMismatch {
                left: self.n,
                right: v.len(),
            });
        }
        let p = self.precision();
        Ok((0..self.n)
            .map(|i| {
                let mut acc = bf_zero(p);
                for (a, b) in self.row(i).iter().zip(v) {
                    acc += a * b;
                }
                acc
            })
            .collect())
    }

    /// `(A + Aᵀ) / 2`, which is exactly symmetric as stored.
    pub fn symmetrized(&self) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            for j in 0..i {
                let avg = (&self[(i, j)] + &self[(j, i)]) / BigFloat::from(2);
                out[(j, i)] = avg.clone();
                out[(i, j)] = avg;
            }
        }
        out
    }

    pub fn frobenius(&self) -> BigFloat {
        let mut acc = bf_zero(self.precision());
        for x in &self.data {
            acc += x * x;
        }
        bf_sqrt(&acc).expect("sum of squares is nonnegative")
    }

    /// `‖self − other‖_F`.
    pub fn frobenius_distance(&self, other: &Self) -> BigFloat {
        let diff = Self::from_fn(self.n, |i, j| &self[(i, j)] - &other[(i, j)]);
        diff.frobenius()
    }
}
