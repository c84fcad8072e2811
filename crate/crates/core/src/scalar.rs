//! Floating-point abstraction shared by every numerical module.
//!
//! All physics code is written against [`Real`]; the dense Hermitian
//! eigensolver and complex matrix product are dispatched per concrete type to
//! `faer`, which keeps the rest of the crate free of backend trait bounds.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use faer::{Accum, Mat, Par, Side};
use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

/// Real scalar type used for amplitudes, couplings and observables.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Every supported type can represent (a rounding of) any `f64`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("finite scalar converts to f64")
    }

    /// Eigen-decomposition of a Hermitian matrix. Eigenvalues ascend; column `k`
    /// of the returned matrix is the eigenvector of eigenvalue `k`.
    fn eigh(m: &ComplexMatrix<Self>) -> Result<(Vec<Self>, ComplexMatrix<Self>)>;

    /// Eigenvalues (ascending) of a Hermitian matrix.
    fn eigvalsh(m: &ComplexMatrix<Self>) -> Result<Vec<Self>>;

    /// Dense product `a * b`.
    fn matmul(a: &ComplexMatrix<Self>, b: &ComplexMatrix<Self>) -> ComplexMatrix<Self>;

    /// Dense product `a^dagger * b`.
    fn adjoint_matmul(a: &ComplexMatrix<Self>, b: &ComplexMatrix<Self>) -> ComplexMatrix<Self>;
}

fn to_faer<T: Real>(m: &ComplexMatrix<T>) -> Mat<Complex<T>> {
    Mat::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Real for $t {
            fn eigh(m: &ComplexMatrix<Self>) -> Result<(Vec<Self>, ComplexMatrix<Self>)> {
                check_square(m)?;
                let n = m.rows();
                if n == 0 {
                    return Ok((Vec::new(), ComplexMatrix::zeros(0, 0)));
                }
                let fm = to_faer(m);
                let evd = fm
                    .as_ref()
                    .self_adjoint_eigen(Side::Lower)
                    .map_err(|e| Error::Numeric(format!("eigendecomposition failed: {e:?}")))?;
                let s = evd.S().column_vector();
                let values: Vec<Self> = (0..n).map(|i| s[i].re).collect();
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Numeric("non-finite eigenvalue".into()));
                }
                let u = evd.U();
                let vectors = ComplexMatrix::from_fn(n, n, |i, j| *u.get(i, j));
                Ok((values, vectors))
            }

            fn eigvalsh(m: &ComplexMatrix<Self>) -> Result<Vec<Self>> {
                check_square(m)?;
                if m.rows() == 0 {
                    return Ok(Vec::new());
                }
                let fm = to_faer(m);
                let values = fm
                    .as_ref()
                    .self_adjoint_eigenvalues(Side::Lower)
                    .map_err(|e| Error::Numeric(format!("eigenvalue solve failed: {e:?}")))?;
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Numeric("non-finite eigenvalue".into()));
                }
                Ok(values)
            }

            fn matmul(a: &ComplexMatrix<Self>, b: &ComplexMatrix<Self>) -> ComplexMatrix<Self> {
                assert_eq!(a.cols(), b.rows(), "matmul inner dimension");
                let fa = to_faer(a);
                let fb = to_faer(b);
                let mut dst = Mat::<Complex<Self>>::zeros(a.rows(), b.cols());
                faer::linalg::matmul::matmul(
                    dst.as_mut(),
                    Accum::Replace,
                    fa.as_ref(),
                    fb.as_ref(),
                    Complex::new(1.0, 0.0),
                    Par::Seq,
                );
                ComplexMatrix::from_fn(a.rows(), b.cols(), |i, j| *dst.get(i, j))
            }

            fn adjoint_matmul(
                a: &ComplexMatrix<Self>,
                b: &ComplexMatrix<Self>,
            ) -> ComplexMatrix<Self> {
                assert_eq!(a.rows(), b.rows(), "adjoint_matmul inner dimension");
                let fa = to_faer(a);
                let fb = to_faer(b);
                let mut dst = Mat::<Complex<Self>>::zeros(a.cols(), b.cols());
                faer::linalg::matmul::matmul(
                    dst.as_mut(),
                    Accum::Replace,
                    fa.as_ref().adjoint(),
                    fb.as_ref(),
                    Complex::new(1.0, 0.0),
                    Par::Seq,
                );
                ComplexMatrix::from_fn(a.cols(), b.cols(), |i, j| *dst.get(i, j))
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);

fn check_square<T: Real>(m: &ComplexMatrix<T>) -> Result<()> {
    if m.rows() != m.cols() {
        return Err(Error::Dimension(format!(
            "expected a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigh_pauli_y() {
        let y = ComplexMatrix::from_rows(vec![
            vec![Complex::new(0.0, 0.0), Complex::new(0.0, -1.0)],
            vec![Complex::new(0.0, 1.0), Complex::new(0.0, 0.0)],
        ]);
        let (vals, vecs) = f64::eigh(&y).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14);
        assert!((vals[1] - 1.0).abs() < 1e-14);
        let recon = vecs
            .matmul(&ComplexMatrix::diagonal(&vals))
            .matmul(&vecs.adjoint());
        assert!(recon.max_abs_diff(&y) < 1e-14);
    }

    #[test]
    fn eigh_single_precision() {
        let m = ComplexMatrix::<f32>::diagonal(&[3.0, -1.0, 2.0]);
        let vals = f32::eigvalsh(&m).unwrap();
        assert_eq!(vals, vec![-1.0, 2.0, 3.0]);
    }

    #[test]
    fn eigh_rejects_rectangular() {
        let m = ComplexMatrix::<f64>::zeros(2, 3);
        assert!(matches!(f64::eigh(&m), Err(Error::Dimension(_))));
    }

    #[test]
    fn adjoint_product_matches_explicit() {
        let a = ComplexMatrix::<f64>::from_fn(3, 2, |i, j| Complex::new(i as f64, j as f64 + 1.0));
        let b = ComplexMatrix::<f64>::from_fn(3, 4, |i, j| Complex::new((i * j) as f64, -1.0));
        let direct = f64::adjoint_matmul(&a, &b);
        let explicit = a.adjoint().matmul(&b);
        assert!(direct.max_abs_diff(&explicit) < 1e-13);
    }
}
