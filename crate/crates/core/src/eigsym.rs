//! Cyclic Jacobi eigensolver for real symmetric matrices at arbitrary precision.

use crate::error::{Error, Result};
use crate::matrix::FloatMatrix;
use crate::scalars::{bf_abs, bf_is_negative, bf_is_zero, bf_one, bf_pow2, bf_sqrt, bf_to_f64, bf_zero, BigFloat};

/// Sweep cap before giving up.
pub const MAX_SWEEPS: usize = 64;

/// Eigenvalues in ascending order and the matching orthonormal eigenvectors (as columns).
#[derive(Debug, Clone, PartialEq)]
pub struct EigDecomp {
    values: Vec<BigFloat>,
    vectors: FloatMatrix,
}

impl EigDecomp {
    pub fn values(&self) -> &[BigFloat] {
        &self.values
    }

    pub fn vectors(&self) -> &FloatMatrix {
        &self.vectors
    }

    pub fn size(&self) -> usize {
        self.values.len()
    }

    pub fn values_f64(&self) -> Vec<f64> {
        self.values.iter().map(bf_to_f64).collect()
    }

    /// Column `i` of `U`.
    pub fn vector(&self, i: usize) -> Vec<BigFloat> {
        (0..self.size()).map(|k| self.vectors[(k, i)].clone()).collect()
    }

    /// `U diag(d) Uᵀ`.
    pub fn compose(&self, diag: &[BigFloat]) -> FloatMatrix {
        let n = self.size();
        let p = self.vectors.precision();
        FloatMatrix::from_fn(n, |i, j| {
            let mut acc = bf_zero(p);
            for (k, d) in diag.iter().enumerate() {
                acc += &self.vectors[(i, k)] * d * &self.vectors[(j, k)];
            }
            acc
        })
    }

    /// Relative Frobenius residual of `U Λ Uᵀ` against `a`.
    pub fn reconstruction_residual(&self, a: &FloatMatrix) -> f64 {
        let back = self.compose(&self.values);
        let scale = a.frobenius();
        if bf_is_zero(&scale) {
            return bf_to_f64(&back.frobenius());
        }
        bf_to_f64(&(back.frobenius_distance(a) / scale))
    }

    /// `‖UᵀU − I‖_F`.
    pub fn orthogonality_residual(&self) -> f64 {
        let u = &self.vectors;
        let utu = u.transpose().matmul(u).expect("square");
        bf_to_f64(&utu.frobenius_distance(&FloatMatrix::identity(self.size(), u.precision())))
    }
}

fn off_diagonal_norm(a: &FloatMatrix) -> BigFloat {
    let n = a.size();
    let mut acc = bf_zero(a.precision());
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += &a[(i, j)] * &a[(i, j)];
            }
        }
    }
    bf_sqrt(&acc).expect("nonnegative")
}

/// Eigendecomposition of a symmetric matrix at the matrix's own precision `P`.
///
/// Sweeps stop once the off-diagonal Frobenius norm falls below
/// `2^-(P-8) ‖A‖_F`. Output is deterministic: eigenvalues ascending (stable
/// order for ties), and each eigenvector's first component above `2^-(P/2)`
/// in magnitude is made nonnegative.
pub fn symmetric_eigen(a: &FloatMatrix) -> Result<EigDecomp> {
    if !a.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let n = a.size();
    let p = a.precision();
    let mut m = a.clone();
    let mut v = FloatMatrix::identity(n, p);

    let norm = a.frobenius();
    let tol = &norm * bf_pow2(-(p as isize - 8), p);
    // per-pivot skip level keeps the remaining off-diagonal mass under `tol`
    let skip = &tol / BigFloat::from(n.max(1) as i64);
    let one = bf_one(p);
    let two = BigFloat::from(2);

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&m);
        if off <= tol {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                residual: bf_to_f64(&off),
            });
        }
        sweeps += 1;
        for ip in 0..n {
            for iq in ip + 1..n {
                let apq = m[(ip, iq)].clone();
                if bf_abs(&apq) <= skip {
                    m[(ip, iq)] = bf_zero(p);
                    m[(iq, ip)] = bf_zero(p);
                    continue;
                }
                let theta = (&m[(iq, iq)] - &m[(ip, ip)]) / (&two * &apq);
                let root = bf_sqrt(&(&theta * &theta + &one))?;
                let mut t = &one / (bf_abs(&theta) + root);
                if bf_is_negative(&theta) {
                    t = -t;
                }
                let c = &one / bf_sqrt(&(&t * &t + &one))?;
                let s = &t * &c;
                let tau = &s / (&one + &c);

                let shift = &t * &apq;
                m[(ip, ip)] -= &shift;
                m[(iq, iq)] += &shift;
                m[(ip, iq)] = bf_zero(p);
                m[(iq, ip)] = bf_zero(p);
                for k in 0..n {
                    if k == ip || k == iq {
                        continue;
                    }
                    let g = m[(k, ip)].clone();
                    let h = m[(k, iq)].clone();
                    let new_p = &g - &s * (&h + &tau * &g);
                    let new_q = &h + &s * (&g - &tau * &h);
                    m[(k, ip)] = new_p.clone();
                    m[(ip, k)] = new_p;
                    m[(k, iq)] = new_q.clone();
                    m[(iq, k)] = new_q;
                }
                for k in 0..n {
                    let g = v[(k, ip)].clone();
                    let h = v[(k, iq)].clone();
                    v[(k, ip)] = &g - &s * (&h + &tau * &g);
                    v[(k, iq)] = &h + &s * (&g - &tau * &h);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].cmp(&m[(j, j)]));
    let values: Vec<BigFloat> = order.iter().map(|&i| m[(i, i)].clone()).collect();
    let sign_floor = bf_pow2(-(p as isize) / 2, p);
    let mut vectors = FloatMatrix::zeros(n, p);
    for (col, &src) in order.iter().enumerate() {
        let flip = (0..n)
            .map(|k| &v[(k, src)])
            .find(|x| bf_abs(x) > sign_floor)
            .is_some_and(bf_is_negative);
        for k in 0..n {
            vectors[(k, col)] = if flip { -v[(k, src)].clone() } else { v[(k, src)].clone() };
        }
    }
    Ok(EigDecomp { values, vectors })
}
