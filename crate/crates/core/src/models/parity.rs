use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::pauli::{full_mask, PauliString, Phase};
use crate::scalar::Real;

use super::OperatorSum;

/// Eigenspace of the total parity `Z^{⊗n}`. `Even` is the `+1` space (even popcount).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParitySector {
    Even,
    Odd,
    Full,
}

impl ParitySector {
    pub fn contains(self, basis_state: usize) -> bool {
        match self {
            ParitySector::Full => true,
            ParitySector::Even => basis_state.count_ones() % 2 == 0,
            ParitySector::Odd => basis_state.count_ones() % 2 == 1,
        }
    }
}

/// `Z ⊗ Z ⊗ ... ⊗ Z` on `n_qubits` (`n_majorana / 2`) qubits.
pub fn parity_operator(n_majorana: usize) -> Result<PauliString> {
    if n_majorana == 0 || n_majorana % 2 != 0 {
        return Err(Error::InvalidSpec(format!(
            "Majorana count must be even and positive, got {n_majorana}"
        )));
    }
    let n = n_majorana / 2;
    PauliString::from_masks(n, 0, full_mask(n), Phase::ONE)
}

/// Computational basis states in the sector, ascending.
pub fn sector_basis(n_qubits: usize, sector: ParitySector) -> Vec<usize> {
    (0..1usize << n_qubits)
        .filter(|&b| sector.contains(b))
        .collect()
}

/// Inverse of [`sector_basis`]: row of each full-space state, `usize::MAX` outside the sector.
pub fn sector_positions(n_qubits: usize, basis: &[usize]) -> Vec<usize> {
    let mut pos = vec![usize::MAX; 1usize << n_qubits];
    for (row, &b) in basis.iter().enumerate() {
        pos[b] = row;
    }
    pos
}

/// Hamiltonian restricted to one parity sector.
#[derive(Clone, Debug)]
pub struct ParityBlock<T> {
    pub sector: ParitySector,
    pub n_qubits: usize,
    pub basis: Vec<usize>,
    pub matrix: ComplexMatrix<T>,
}

impl<T: Real> ParityBlock<T> {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Dense block of `h` on a parity sector. Fails with `SymmetryViolation`
/// if any term does not commute with the parity.
pub fn project_parity<T: Real>(
    h: &OperatorSum<T>,
    sector: ParitySector,
    qubit_cap: usize,
) -> Result<ParityBlock<T>> {
    let n = h.n_qubits();
    if n > qubit_cap {
        return Err(Error::Resource(format!(
            "dense block on {n} qubits exceeds cap {qubit_cap}"
        )));
    }
    if sector != ParitySector::Full {
        let p = parity_operator(2 * n)?;
        if let Some(t) = h.terms().iter().find(|t| !t.string.commutes_with(&p)) {
            return Err(Error::SymmetryViolation(format!(
                "term {} flips parity",
                t.string
            )));
        }
    }
    let basis = sector_basis(n, sector);
    let pos = sector_positions(n, &basis);
    let matrix = h.dense_block(&basis, &pos);
    Ok(ParityBlock {
        sector,
        n_qubits: n,
        basis,
        matrix,
    })
}
