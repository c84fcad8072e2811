//! Gaussian random-matrix ensembles and variance matching.
//!
//! Standard normalizations:
//!
//! | ensemble | diagonal | off-diagonal | `E Tr(H^2) / D` |
//! |----------|----------|--------------|-----------------|
//! | GOE | `N(0, 1)` | real, variance 1/2 | `(D + 1) / 2` |
//! | GUE | `N(0, 1)` | re, im each variance 1/2 | `D` |
//! | GSE | `[[A, B], [-B*, A*]]`, `A` GUE of size `D/2`, `B` complex antisymmetric | | `D - 1` |

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::models::{sector_basis, ParitySector};
use crate::rng::{rng_from_seed, SimRng};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ensemble {
    #[serde(alias = "GOE")]
    Goe,
    #[serde(alias = "GUE")]
    Gue,
    #[serde(alias = "GSE")]
    Gse,
}

impl Ensemble {
    pub fn label(self) -> &'static str {
        match self {
            Ensemble::Goe => "goe",
            Ensemble::Gue => "gue",
            Ensemble::Gse => "gse",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    pub ensemble: Ensemble,
    pub dim: usize,
    #[serde(default)]
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn new(ensemble: Ensemble, dim: usize) -> Self {
        Self {
            ensemble,
            dim,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::InvalidSpec(format!(
                "ensemble dimension must be at least 2, got {}",
                self.dim
            )));
        }
        if self.ensemble == Ensemble::Gse && self.dim % 2 != 0 {
            return Err(Error::InvalidSpec(format!(
                "GSE needs an even dimension, got {}",
                self.dim
            )));
        }
        Ok(())
    }

    pub fn sigma2(&self) -> f64 {
        ensemble_sigma2(self.ensemble, self.dim)
    }

    pub fn sample<T: Real>(&self) -> Result<ComplexMatrix<T>> {
        sample_gaussian(self, &mut rng_from_seed(self.seed))
    }
}

/// Eigenvalue variance `E Tr(H^2) / D` in standard normalization.
pub fn ensemble_sigma2(ensemble: Ensemble, dim: usize) -> f64 {
    let d = dim as f64;
    match ensemble {
        Ensemble::Goe => (d + 1.0) / 2.0,
        Ensemble::Gue => d,
        Ensemble::Gse => d - 1.0,
    }
}

/// `6 C(N,4) / (2^4 N^3)` for `N` Majoranas (or `2 n` spin components).
pub fn syk_sigma2(n_operators: usize) -> f64 {
    let n = n_operators as f64;
    6.0 * crate::models::binomial(n_operators as u64, 4) as f64 / (16.0 * n * n * n)
}

fn normal(rng: &mut SimRng) -> f64 {
    rng.sample(StandardNormal)
}

/// Draws one matrix; entries are generated row by row over the upper triangle.
pub fn sample_gaussian<T: Real>(spec: &EnsembleSpec, rng: &mut SimRng) -> Result<ComplexMatrix<T>> {
    spec.validate()?;
    let d = spec.dim;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = ComplexMatrix::<T>::zeros(d, d);
    match spec.ensemble {
        Ensemble::Goe | Ensemble::Gue => {
            let complex = spec.ensemble == Ensemble::Gue;
            for i in 0..d {
                m[(i, i)] = Complex::new(T::lit(normal(rng)), T::zero());
                for j in i + 1..d {
                    let re = normal(rng) * h;
                    let im = if complex { normal(rng) * h } else { 0.0 };
                    let z = Complex::new(T::lit(re), T::lit(im));
                    m[(i, j)] = z;
                    m[(j, i)] = z.conj();
                }
            }
        }
        Ensemble::Gse => {
            let k = d / 2;
            let a: ComplexMatrix<T> = sample_gaussian(&EnsembleSpec::new(Ensemble::Gue, k), rng)?;
            let mut b = ComplexMatrix::<T>::zeros(k, k);
            for i in 0..k {
                for j in i + 1..k {
                    let z = Complex::new(T::lit(normal(rng) * h), T::lit(normal(rng) * h));
                    b[(i, j)] = z;
                    b[(j, i)] = -z;
                }
            }
            for i in 0..k {
                for j in 0..k {
                    m[(i, j)] = a[(i, j)];
                    m[(i + k, j + k)] = a[(i, j)].conj();
                    m[(i, j + k)] = b[(i, j)];
                    m[(i + k, j)] = -b[(i, j)].conj();
                }
            }
        }
    }
    Ok(m)
}

/// `sqrt(target / current) * m`.
pub fn rescale_to_variance<T: Real>(
    m: &ComplexMatrix<T>,
    current_sigma2: f64,
    target_sigma2: f64,
) -> Result<ComplexMatrix<T>> {
    if !(current_sigma2 > 0.0 && target_sigma2 > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "variances must be positive, got current {current_sigma2}, target {target_sigma2}"
        )));
    }
    Ok(m.scaled(T::lit((target_sigma2 / current_sigma2).sqrt())))
}

/// Ensemble draw rescaled from its standard variance to `target_sigma2`.
pub fn sample_matched<T: Real>(
    spec: &EnsembleSpec,
    target_sigma2: f64,
    rng: &mut SimRng,
) -> Result<ComplexMatrix<T>> {
    let m = sample_gaussian(spec, rng)?;
    rescale_to_variance(&m, spec.sigma2(), target_sigma2)
}

/// Empirical `Tr(M^2) / dim` of a Hermitian matrix.
pub fn empirical_sigma2<T: Real>(m: &ComplexMatrix<T>) -> f64 {
    m.frobenius_sq().to_f64_lossy() / m.rows() as f64
}

/// Full-space matrix with `even` on the even-parity basis states and `odd` on
/// the odd ones (ascending basis order within each sector).
pub fn parity_block_diagonal<T: Real>(
    n_qubits: usize,
    even: &ComplexMatrix<T>,
    odd: &ComplexMatrix<T>,
) -> Result<ComplexMatrix<T>> {
    if n_qubits == 0 {
        return Err(Error::Dimension(
            "parity blocks need at least one qubit".into(),
        ));
    }
    let half = 1usize << (n_qubits - 1);
    if even.rows() != half || odd.rows() != half || !even.is_square() || !odd.is_square() {
        return Err(Error::Dimension(format!(
            "parity blocks must be {half}x{half}, got {}x{} and {}x{}",
            even.rows(),
            even.cols(),
            odd.rows(),
            odd.cols()
        )));
    }
    let mut m = ComplexMatrix::zeros(2 * half, 2 * half);
    for (block, sector) in [(even, ParitySector::Even), (odd, ParitySector::Odd)] {
        let basis = sector_basis(n_qubits, sector);
        for (i, &bi) in basis.iter().enumerate() {
            for (j, &bj) in basis.iter().enumerate() {
                m[(bi, bj)] = block[(i, j)];
            }
        }
    }
    Ok(m)
}
