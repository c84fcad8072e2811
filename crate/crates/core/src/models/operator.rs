use std::collections::HashMap;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::pauli::{PauliString, Phase};
use crate::scalar::Real;

/// Dense-matrix cap (in qubits) for [`OperatorSum::to_dense`]; `2^15` as in the exact propagator.
pub const DEFAULT_OPERATOR_DENSE_CAP: usize = 15;

/// One Hermitian term `coeff * P`; the string's phase is always `+1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Term<T> {
    pub coeff: T,
    pub string: PauliString,
}

/// Real-weighted sum of Hermitian Pauli strings on a fixed number of qubits.
///
/// Strings with phase `-1` are folded into the coefficient sign on insertion;
/// strings with an imaginary phase are rejected. Repeated strings are merged.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorSum<T> {
    n_qubits: usize,
    terms: Vec<Term<T>>,
    index: HashMap<(u64, u64), usize>,
}

impl<T: Real> OperatorSum<T> {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            terms: Vec::new(),
            index: HashMap::new(),
        }
    }

    /// `coeff * Identity`.
    pub fn identity(n_qubits: usize, coeff: T) -> Result<Self> {
        let mut s = Self::new(n_qubits);
        s.push(coeff, PauliString::identity(n_qubits)?)?;
        Ok(s)
    }

    pub fn from_terms(
        n_qubits: usize,
        terms: impl IntoIterator<Item = (T, PauliString)>,
    ) -> Result<Self> {
        let mut s = Self::new(n_qubits);
        for (c, p) in terms {
            s.push(c, p)?;
        }
        Ok(s)
    }

    /// Adds `coeff * string`, merging with an existing term on the same masks.
    pub fn push(&mut self, coeff: T, string: PauliString) -> Result<()> {
        if string.n_qubits() != self.n_qubits {
            return Err(Error::Dimension(format!(
                "term on {} qubits pushed into a sum on {}",
                string.n_qubits(),
                self.n_qubits
            )));
        }
        let sign = string.phase().real_sign().ok_or_else(|| {
            Error::InvalidSpec(format!("term {string} is not Hermitian (imaginary phase)"))
        })?;
        let coeff = if sign < 0 { -coeff } else { coeff };
        let string = string.with_phase(Phase::ONE);
        let key = (string.x_mask(), string.z_mask());
        match self.index.get(&key) {
            Some(&pos) => self.terms[pos].coeff += coeff,
            None => {
                self.index.insert(key, self.terms.len());
                self.terms.push(Term { coeff, string });
            }
        }
        Ok(())
    }

    #[inline]
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    #[inline]
    pub fn dim(&self) -> usize {
        1usize << self.n_qubits
    }

    pub fn terms(&self) -> &[Term<T>] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Multiplies every coefficient by `s`.
    pub fn scaled(mut self, s: T) -> Self {
        for t in &mut self.terms {
            t.coeff *= s;
        }
        self
    }

    /// Dense matrix, built column by column from the bitmask action.
    pub fn to_dense(&self, qubit_cap: usize) -> Result<ComplexMatrix<T>> {
        if self.n_qubits > qubit_cap {
            return Err(Error::Resource(format!(
                "dense operator on {} qubits exceeds cap {qubit_cap}",
                self.n_qubits
            )));
        }
        let dim = self.dim();
        let mut m = ComplexMatrix::zeros(dim, dim);
        for term in &self.terms {
            for b in 0..dim as u64 {
                let (row, ph) = term.string.act_on_basis(b);
                m[(row as usize, b as usize)] += ph.to_complex::<T>() * term.coeff;
            }
        }
        Ok(m)
    }

    /// Dense block on the given basis states, assuming every term maps the
    /// set into itself. `position[b]` must give the row of basis state `b`.
    pub(crate) fn dense_block(&self, basis: &[usize], position: &[usize]) -> ComplexMatrix<T> {
        let d = basis.len();
        let mut m = ComplexMatrix::zeros(d, d);
        for term in &self.terms {
            for (col, &b) in basis.iter().enumerate() {
                let (row, ph) = term.string.act_on_basis(b as u64);
                m[(position[row as usize], col)] += ph.to_complex::<T>() * term.coeff;
            }
        }
        m
    }

    /// Complex amplitude factor of each term for the matrix-free kernels.
    pub(crate) fn term_factors(&self) -> Vec<(u64, u64, Complex<T>)> {
        self.terms
            .iter()
            .map(|t| {
                let base = Phase::from_exponent(t.string.y_count()).to_complex::<T>() * t.coeff;
                (t.string.x_mask(), t.string.z_mask(), base)
            })
            .collect()
    }

    pub fn max_abs_coeff(&self) -> T {
        self.terms
            .iter()
            .fold(T::zero(), |m, t| m.max(t.coeff.abs()))
    }

    /// `Tr(H^2) / dim`, exact by trace-orthogonality of distinct Pauli strings.
    pub fn trace_h2_over_dim(&self) -> T {
        self.terms.iter().map(|t| t.coeff * t.coeff).sum()
    }

    /// `Tr(H) / dim` (the identity coefficient).
    pub fn trace_over_dim(&self) -> T {
        self.index
            .get(&(0, 0))
            .map_or(T::zero(), |&pos| self.terms[pos].coeff)
    }
}

impl<T: Real> OperatorSum<T> {
    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.coeff.is_zero())
    }
}
