//! Signed Pauli strings in symplectic bitmask form and the Jordan–Wigner
//! representation of Majorana and spin operators.
//!
//! Qubits are labelled `0..n` from the left of the tensor product. Qubit `q`
//! occupies bit `n - 1 - q` of both masks, which is also the bit it occupies in
//! a computational-basis index, so `|b>` with `b = 0b10` on two qubits is
//! `|1> ⊗ |0>`. With this layout a string acts on basis states as
//!
//! ```text
//! P |b> = phase * i^{|x & z|} * (-1)^{|z & b|} |b ^ x>
//! ```

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::scalar::Real;

/// Masks are `u64`; dense and state-vector code caps far below this.
pub const MAX_QUBITS: usize = 63;

/// Default qubit cap for [`PauliString::to_dense`].
pub const DEFAULT_DENSE_QUBIT_CAP: usize = 14;

/// A power of `i`: `i^k` for `k` in `0..4`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    #[inline]
    pub const fn from_exponent(k: u32) -> Self {
        Phase((k % 4) as u8)
    }

    #[inline]
    pub const fn exponent(self) -> u32 {
        self.0 as u32
    }

    #[inline]
    pub const fn is_real(self) -> bool {
        self.0 % 2 == 0
    }

    #[inline]
    pub const fn conj(self) -> Self {
        Phase((4 - self.0) % 4)
    }

    /// `+1` for `1`, `-1` for `-1`; `None` for imaginary phases.
    pub fn real_sign(self) -> Option<i8> {
        match self.0 {
            0 => Some(1),
            2 => Some(-1),
            _ => None,
        }
    }

    pub fn to_complex<T: Real>(self) -> Complex<T> {
        let (o, z) = (T::one(), T::zero());
        match self.0 {
            0 => Complex::new(o, z),
            1 => Complex::new(z, o),
            2 => Complex::new(-o, z),
            _ => Complex::new(z, -o),
        }
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;

    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: Phase) -> Phase {
        Phase::from_exponent(self.exponent() + rhs.exponent())
    }
}

/// Single-site Pauli factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// `phase * P_0 ⊗ P_1 ⊗ ... ⊗ P_{n-1}` with each `P_q` in `{I, X, Y, Z}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    n_qubits: usize,
    x_mask: u64,
    z_mask: u64,
    phase: Phase,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Result<Self> {
        Self::from_masks(n_qubits, 0, 0, Phase::ONE)
    }

    /// Builds a string from raw masks in basis-index bit layout.
    pub fn from_masks(n_qubits: usize, x_mask: u64, z_mask: u64, phase: Phase) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::InvalidSpec(format!(
                "qubit count {n_qubits} outside 1..={MAX_QUBITS}"
            )));
        }
        let width = full_mask(n_qubits);
        if (x_mask | z_mask) & !width != 0 {
            return Err(Error::InvalidSpec(format!(
                "mask bits set beyond {n_qubits} qubits"
            )));
        }
        Ok(Self {
            n_qubits,
            x_mask,
            z_mask,
            phase,
        })
    }

    /// `P` on qubit `q`, identity elsewhere.
    pub fn single(n_qubits: usize, qubit: usize, op: Pauli) -> Result<Self> {
        let mut s = Self::identity(n_qubits)?;
        s.set(qubit, op)?;
        Ok(s)
    }

    /// Builds `phase * ⊗ ops`.
    pub fn from_ops(ops: &[Pauli], phase: Phase) -> Result<Self> {
        let mut s = Self::identity(ops.len())?;
        for (q, &op) in ops.iter().enumerate() {
            s.set(q, op)?;
        }
        s.phase = phase;
        Ok(s)
    }

    fn set(&mut self, qubit: usize, op: Pauli) -> Result<()> {
        if qubit >= self.n_qubits {
            return Err(Error::InvalidSpec(format!(
                "qubit {qubit} out of range for {} qubits",
                self.n_qubits
            )));
        }
        let bit = 1u64 << (self.n_qubits - 1 - qubit);
        let (x, z) = op.bits();
        self.x_mask = if x {
            self.x_mask | bit
        } else {
            self.x_mask & !bit
        };
        self.z_mask = if z {
            self.z_mask | bit
        } else {
            self.z_mask & !bit
        };
        Ok(())
    }

    #[inline]
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    #[inline]
    pub fn x_mask(&self) -> u64 {
        self.x_mask
    }

    #[inline]
    pub fn z_mask(&self) -> u64 {
        self.z_mask
    }

    #[inline]
    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn with_phase(mut self, phase: Phase) -> Self {
        self.phase = phase;
        self
    }

    /// The Pauli factor acting on `qubit`.
    pub fn op(&self, qubit: usize) -> Pauli {
        let shift = self.n_qubits - 1 - qubit;
        Pauli::from_bits(
            (self.x_mask >> shift) & 1 == 1,
            (self.z_mask >> shift) & 1 == 1,
        )
    }

    pub fn y_count(&self) -> u32 {
        (self.x_mask & self.z_mask).count_ones()
    }

    pub fn weight(&self) -> u32 {
        (self.x_mask | self.z_mask).count_ones()
    }

    pub fn is_identity(&self) -> bool {
        self.x_mask == 0 && self.z_mask == 0
    }

    /// Every factor is Hermitian, so the string is Hermitian iff its phase is real.
    pub fn is_hermitian(&self) -> bool {
        self.phase.is_real()
    }

    /// True when the two strings commute (symplectic product is even).
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let s =
            (self.x_mask & other.z_mask).count_ones() + (self.z_mask & other.x_mask).count_ones();
        s % 2 == 0
    }

    /// Matrix element sign and destination for a basis state: returns
    /// `(b ^ x, i^k)` with `P|b> = i^k |b ^ x>`.
    #[inline]
    pub fn act_on_basis(&self, b: u64) -> (u64, Phase) {
        let k = self.phase.exponent() + self.y_count() + 2 * (self.z_mask & b).count_ones();
        (b ^ self.x_mask, Phase::from_exponent(k))
    }

    /// Dense `2^n x 2^n` matrix. Fails when `n_qubits > cap`.
    pub fn to_dense<T: Real>(&self, cap: usize) -> Result<ComplexMatrix<T>> {
        if self.n_qubits > cap {
            return Err(Error::Resource(format!(
                "dense Pauli string on {} qubits exceeds cap {cap}",
                self.n_qubits
            )));
        }
        let dim = 1usize << self.n_qubits;
        let mut m = ComplexMatrix::zeros(dim, dim);
        for b in 0..dim as u64 {
            let (row, ph) = self.act_on_basis(b);
            m[(row as usize, b as usize)] = ph.to_complex();
        }
        Ok(m)
    }
}

#[inline]
pub(crate) fn full_mask(n_qubits: usize) -> u64 {
    if n_qubits >= 64 {
        u64::MAX
    } else {
        (1u64 << n_qubits) - 1
    }
}

/// Matrix product `a * b` with the phase tracked exactly.
pub fn pauli_mul(a: &PauliString, b: &PauliString) -> Result<PauliString> {
    if a.n_qubits != b.n_qubits {
        return Err(Error::Dimension(format!(
            "cannot multiply strings on {} and {} qubits",
            a.n_qubits, b.n_qubits
        )));
    }
    // With P(x, z) = i^{|x&z|} X^x Z^z and Z^z1 X^x2 = (-1)^{|z1&x2|} X^x2 Z^z1.
    let x = a.x_mask ^ b.x_mask;
    let z = a.z_mask ^ b.z_mask;
    let k = a.phase.exponent()
        + b.phase.exponent()
        + a.y_count()
        + b.y_count()
        + 2 * (a.z_mask & b.x_mask).count_ones()
        + 4 * 64 // keeps the subtraction below non-negative
        - (x & z).count_ones();
    Ok(PauliString {
        n_qubits: a.n_qubits,
        x_mask: x,
        z_mask: z,
        phase: Phase::from_exponent(k),
    })
}

impl std::ops::Mul for PauliString {
    type Output = PauliString;

    /// Panics on mismatched qubit counts; use [`pauli_mul`] for a fallible product.
    fn mul(self, rhs: PauliString) -> PauliString {
        pauli_mul(&self, &rhs).expect("matching qubit counts")
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase.exponent() {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        f.write_str(prefix)?;
        for q in 0..self.n_qubits {
            write!(f, "{}", self.op(q).symbol())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Parses labels such as `"XZ"`, `"-iYXI"` or `"+Z"`.
    fn from_str(s: &str) -> Result<Self> {
        let (phase, body) = if let Some(rest) = s.strip_prefix("-i") {
            (Phase::MINUS_I, rest)
        } else if let Some(rest) = s.strip_prefix("+i") {
            (Phase::I, rest)
        } else if let Some(rest) = s.strip_prefix('i') {
            (Phase::I, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (Phase::MINUS_ONE, rest)
        } else if let Some(rest) = s.strip_prefix('+') {
            (Phase::ONE, rest)
        } else {
            (Phase::ONE, s)
        };
        let ops = body
            .chars()
            .map(|c| match c {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::InvalidSpec(format!("bad Pauli symbol {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        PauliString::from_ops(&ops, phase)
    }
}

/// Index `i` (1-based) of one of `n` Majorana operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MajoranaIndex {
    i: usize,
    n: usize,
}

impl MajoranaIndex {
    pub fn new(i: usize, n: usize) -> Result<Self> {
        if n == 0 || n % 2 != 0 {
            return Err(Error::InvalidSpec(format!(
                "Majorana count must be even and positive, got {n}"
            )));
        }
        if i == 0 || i > n {
            return Err(Error::InvalidSpec(format!(
                "Majorana index {i} outside 1..={n}"
            )));
        }
        Ok(Self { i, n })
    }

    pub fn index(&self) -> usize {
        self.i
    }

    pub fn count(&self) -> usize {
        self.n
    }

    pub fn n_qubits(&self) -> usize {
        self.n / 2
    }
}

/// Normalization of every Majorana string, so that `psi_i^2 = 1/2`.
pub fn majorana_norm<T: Real>() -> T {
    T::FRAC_1_SQRT_2()
}

/// Jordan–Wigner string of `psi_i`: `Z` on qubits before `k = ceil(i/2)`,
/// `X` (odd `i`) or `Y` (even `i`) on qubit `k`, identity after.
pub fn majorana_string<T: Real>(idx: MajoranaIndex) -> Result<(T, PauliString)> {
    let n_qubits = idx.n_qubits();
    let site = (idx.i - 1) / 2;
    let mut ops = vec![Pauli::I; n_qubits];
    for op in ops.iter_mut().take(site) {
        *op = Pauli::Z;
    }
    ops[site] = if idx.i % 2 == 1 { Pauli::X } else { Pauli::Y };
    Ok((majorana_norm(), PauliString::from_ops(&ops, Phase::ONE)?))
}

/// `sigma_{j,x}` for `a = 2j - 1`, `sigma_{j,y}` for `a = 2j` (1-based).
pub fn spin_operator(a: usize, n_spins: usize) -> Result<PauliString> {
    if n_spins == 0 {
        return Err(Error::InvalidSpec("spin count must be positive".into()));
    }
    if a == 0 || a > 2 * n_spins {
        return Err(Error::InvalidSpec(format!(
            "spin operator index {a} outside 1..={}",
            2 * n_spins
        )));
    }
    let op = if a % 2 == 1 { Pauli::X } else { Pauli::Y };
    PauliString::single(n_spins, (a - 1) / 2, op)
}

/// Dense anticommutator helper used by tests and diagnostics.
pub fn dense_anticommutator<T: Real>(
    a: (T, &PauliString),
    b: (T, &PauliString),
    cap: usize,
) -> Result<ComplexMatrix<T>> {
    let ma = a.1.to_dense::<T>(cap)?.scaled(a.0);
    let mb = b.1.to_dense::<T>(cap)?.scaled(b.0);
    Ok(ma.anticommutator(&mb))
}
