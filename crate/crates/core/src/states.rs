//! State vectors, bipartitions and entanglement entropy.
//!
//! Qubit `q` (0-based, left to right) is bit `n - 1 - q` of a basis index, so
//! "trailing" qubits are the low bits. A state tagged with a parity sector
//! stores only that sector's amplitudes, in ascending basis-index order.

use num_complex::Complex;
use num_traits::Zero;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{norm, ComplexMatrix};
use crate::models::{sector_basis, ParitySector};
use crate::rng::SimRng;
use crate::scalar::Real;

/// Norm tolerance for [`StateVector::new`].
pub const NORM_TOLERANCE: f64 = 1e-12;
/// Reduced-density eigenvalues below this are treated as zero.
pub const EIGENVALUE_CLIP: f64 = 1e-12;
/// Maximum `|Tr rho - 1|` accepted by [`von_neumann`].
pub const TRACE_TOLERANCE: f64 = 1e-8;
/// Kept-side qubit cap for dense reduced density matrices.
pub const REDUCED_QUBIT_CAP: usize = 14;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<T> {
    n_qubits: usize,
    amplitudes: Vec<Complex<T>>,
    sector: ParitySector,
}

fn sector_len(n_qubits: usize, sector: ParitySector) -> usize {
    match sector {
        ParitySector::Full => 1usize << n_qubits,
        _ => 1usize << (n_qubits - 1),
    }
}

impl<T: Real> StateVector<T> {
    /// Normalized state; fails if `| ||a|| - 1 | > 1e-12`.
    pub fn new(n_qubits: usize, amplitudes: Vec<Complex<T>>, sector: ParitySector) -> Result<Self> {
        let s = Self::unnormalized(n_qubits, amplitudes, sector)?;
        let nrm = s.norm().to_f64_lossy();
        let tol = NORM_TOLERANCE.max(T::epsilon().to_f64_lossy() * 64.0);
        if (nrm - 1.0).abs() > tol {
            return Err(Error::Numeric(format!("state norm {nrm} is not 1")));
        }
        Ok(s)
    }

    /// Any vector of the right length, e.g. the result of applying an operator.
    pub fn unnormalized(
        n_qubits: usize,
        amplitudes: Vec<Complex<T>>,
        sector: ParitySector,
    ) -> Result<Self> {
        if n_qubits == 0 || n_qubits > crate::pauli::MAX_QUBITS {
            return Err(Error::Dimension(format!(
                "unsupported qubit count {n_qubits}"
            )));
        }
        let len = sector_len(n_qubits, sector);
        if amplitudes.len() != len {
            return Err(Error::Dimension(format!(
                "{} amplitudes for a {:?} state on {n_qubits} qubits (expected {len})",
                amplitudes.len(),
                sector
            )));
        }
        Ok(Self {
            n_qubits,
            amplitudes,
            sector,
        })
    }

    /// Full-space basis state `|b>`.
    pub fn basis(n_qubits: usize, b: usize) -> Result<Self> {
        let mut amps = vec![Complex::zero(); 1usize << n_qubits];
        *amps
            .get_mut(b)
            .ok_or_else(|| Error::Dimension(format!("basis index {b} out of range")))? =
            Complex::new(T::one(), T::zero());
        Self::new(n_qubits, amps, ParitySector::Full)
    }

    #[inline]
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    #[inline]
    pub fn sector(&self) -> ParitySector {
        self.sector
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex<T>> {
        self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm(&self) -> T {
        norm(&self.amplitudes)
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm();
        if !(n > T::zero()) || !n.is_finite() {
            return Err(Error::Numeric(
                "cannot normalize a zero or non-finite state".into(),
            ));
        }
        for a in &mut self.amplitudes {
            *a /= n;
        }
        Ok(self)
    }

    /// Same vector with a new amplitude array of identical layout.
    pub fn with_amplitudes(&self, amplitudes: Vec<Complex<T>>) -> Result<Self> {
        Self::unnormalized(self.n_qubits, amplitudes, self.sector)
    }

    /// Zero-padded full-space vector.
    pub fn embed(&self) -> Self {
        if self.sector == ParitySector::Full {
            return self.clone();
        }
        let mut full = vec![Complex::zero(); 1usize << self.n_qubits];
        for (&b, &a) in sector_basis(self.n_qubits, self.sector)
            .iter()
            .zip(&self.amplitudes)
        {
            full[b] = a;
        }
        Self {
            n_qubits: self.n_qubits,
            amplitudes: full,
            sector: ParitySector::Full,
        }
    }

    /// Sector amplitudes of a full-space state, without renormalization.
    pub fn restrict(&self, sector: ParitySector) -> Result<Self> {
        if sector == self.sector {
            return Ok(self.clone());
        }
        if self.sector != ParitySector::Full {
            return Err(Error::InvalidArgument(format!(
                "cannot restrict a {:?} state to {:?}",
                self.sector, sector
            )));
        }
        let amps = sector_basis(self.n_qubits, sector)
            .iter()
            .map(|&b| self.amplitudes[b])
            .collect();
        Self::unnormalized(self.n_qubits, amps, sector)
    }

    /// Projection onto a sector followed by renormalization.
    pub fn project(&self, sector: ParitySector) -> Result<Self> {
        self.restrict(sector)?.normalized()
    }

    /// Weight of the full-space state on a sector.
    pub fn sector_weight(&self, sector: ParitySector) -> T {
        let full = self.embed();
        full.amplitudes
            .iter()
            .enumerate()
            .filter(|(b, _)| sector.contains(*b))
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }
}

/// `⊗ (|0> + |1>)/sqrt 2`.
pub fn product_state<T: Real>(n_qubits: usize) -> Result<StateVector<T>> {
    if n_qubits == 0 {
        return Err(Error::InvalidArgument(
            "product state needs at least one qubit".into(),
        ));
    }
    let dim = 1usize << n_qubits;
    let a = (T::one() / T::from_usize_lossy(dim)).sqrt();
    StateVector::new(
        n_qubits,
        vec![Complex::new(a, T::zero()); dim],
        ParitySector::Full,
    )
}

/// Haar-random pure state.
pub fn random_state<T: Real>(n_qubits: usize, rng: &mut SimRng) -> Result<StateVector<T>> {
    let dim = 1usize << n_qubits;
    let amps: Vec<Complex<T>> = (0..dim)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex::new(T::lit(re), T::lit(im))
        })
        .collect();
    StateVector::unnormalized(n_qubits, amps, ParitySector::Full)?.normalized()
}

/// Split of the qubits into a kept part `A` and a traced part `B`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bipartition {
    n_qubits: usize,
    kept: Vec<usize>,
    traced: Vec<usize>,
}

impl Bipartition {
    /// `kept` lists 0-based qubits, in the order that defines the kept index.
    pub fn new(n_qubits: usize, kept: Vec<usize>) -> Result<Self> {
        if n_qubits == 0 || n_qubits > crate::pauli::MAX_QUBITS {
            return Err(Error::InvalidBipartition(format!(
                "unsupported qubit count {n_qubits}"
            )));
        }
        let mut seen = vec![false; n_qubits];
        for &q in &kept {
            if q >= n_qubits || seen[q] {
                return Err(Error::InvalidBipartition(format!(
                    "kept qubits {kept:?} invalid for {n_qubits} qubits"
                )));
            }
            seen[q] = true;
        }
        let traced = (0..n_qubits).filter(|&q| !seen[q]).collect();
        Ok(Self {
            n_qubits,
            kept,
            traced,
        })
    }

    /// Keeps the leading `n_qubits - n_traced` qubits.
    pub fn trailing(n_qubits: usize, n_traced: usize) -> Result<Self> {
        if n_traced > n_qubits {
            return Err(Error::InvalidBipartition(format!(
                "cannot trace {n_traced} of {n_qubits} qubits"
            )));
        }
        Self::new(n_qubits, (0..n_qubits - n_traced).collect())
    }

    /// Equal cut; for odd `n` the kept side is the smaller one.
    pub fn half(n_qubits: usize) -> Result<Self> {
        Self::trailing(n_qubits, n_qubits - n_qubits / 2)
    }

    /// `|kept| = round(l * n)`, swapped if needed so that the kept side is not larger.
    pub fn from_fraction(n_qubits: usize, l: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&l) {
            return Err(Error::InvalidBipartition(format!(
                "subsystem fraction {l} outside [0, 1]"
            )));
        }
        let k = (l * n_qubits as f64).round() as usize;
        let k = k.min(n_qubits - k);
        Self::trailing(n_qubits, n_qubits - k)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn kept(&self) -> &[usize] {
        &self.kept
    }

    pub fn traced(&self) -> &[usize] {
        &self.traced
    }

    /// `𝒩 = 2^|kept|`.
    pub fn kept_dim(&self) -> usize {
        1usize << self.kept.len()
    }

    /// `ℳ = 2^|traced|`.
    pub fn traced_dim(&self) -> usize {
        1usize << self.traced.len()
    }

    pub fn complement(&self) -> Self {
        Self {
            n_qubits: self.n_qubits,
            kept: self.traced.clone(),
            traced: self.kept.clone(),
        }
    }

    fn is_trailing(&self) -> bool {
        self.kept.iter().enumerate().all(|(i, &q)| i == q)
    }

    fn deposit(&self, qubits: &[usize], idx: usize) -> usize {
        let k = qubits.len();
        qubits
            .iter()
            .enumerate()
            .filter(|(i, _)| idx >> (k - 1 - i) & 1 == 1)
            .fold(0usize, |b, (_, &q)| b | 1usize << (self.n_qubits - 1 - q))
    }

    /// Full basis index of kept index `a` and traced index `c`.
    pub fn compose(&self, a: usize, c: usize) -> usize {
        self.deposit(&self.kept, a) | self.deposit(&self.traced, c)
    }

    /// Orders full-space amplitudes as a `kept_dim x traced_dim` matrix (row-major).
    fn coefficient_matrix<T: Real>(&self, full: &[Complex<T>]) -> ComplexMatrix<T> {
        let (na, nb) = (self.kept_dim(), self.traced_dim());
        if self.is_trailing() {
            return ComplexMatrix::from_fn(na, nb, |a, c| full[a * nb + c]);
        }
        let kept_bits: Vec<usize> = (0..na).map(|a| self.deposit(&self.kept, a)).collect();
        let traced_bits: Vec<usize> = (0..nb).map(|c| self.deposit(&self.traced, c)).collect();
        ComplexMatrix::from_fn(na, nb, |a, c| full[kept_bits[a] | traced_bits[c]])
    }
}

/// `(1/sqrt 𝒩) sum_i |i>_A |i>_B`; requires equal sides.
pub fn max_entangled_state<T: Real>(bp: &Bipartition) -> Result<StateVector<T>> {
    if bp.kept_dim() != bp.traced_dim() {
        return Err(Error::InvalidBipartition(format!(
            "maximally entangled state needs equal halves, got {} and {}",
            bp.kept_dim(),
            bp.traced_dim()
        )));
    }
    max_entangled_state_rank(bp)
}

/// Uniform Schmidt state of rank `min(𝒩, ℳ)`, pairing kept index `i` with traced index `i`.
pub fn max_entangled_state_rank<T: Real>(bp: &Bipartition) -> Result<StateVector<T>> {
    let rank = bp.kept_dim().min(bp.traced_dim());
    let a = (T::one() / T::from_usize_lossy(rank)).sqrt();
    let mut amps = vec![Complex::zero(); 1usize << bp.n_qubits()];
    for i in 0..rank {
        amps[bp.compose(i, i)] = Complex::new(a, T::zero());
    }
    StateVector::new(bp.n_qubits(), amps, ParitySector::Full)
}

fn check_cover<T>(psi: &StateVector<T>, bp: &Bipartition) -> Result<()> {
    if psi.n_qubits != bp.n_qubits {
        return Err(Error::Dimension(format!(
            "bipartition on {} qubits applied to a {}-qubit state",
            bp.n_qubits, psi.n_qubits
        )));
    }
    Ok(())
}

/// `rho_A = Tr_B |psi><psi|`.
pub fn reduced_density<T: Real>(
    psi: &StateVector<T>,
    bp: &Bipartition,
) -> Result<ComplexMatrix<T>> {
    check_cover(psi, bp)?;
    if bp.kept.len() > REDUCED_QUBIT_CAP {
        return Err(Error::Resource(format!(
            "reduced density on {} kept qubits exceeds cap {REDUCED_QUBIT_CAP}",
            bp.kept.len()
        )));
    }
    let full = psi.embed();
    let a = bp.coefficient_matrix(&full.amplitudes);
    let rho = a.matmul(&a.adjoint());
    let half = T::lit(0.5);
    Ok(ComplexMatrix::from_fn(rho.rows(), rho.cols(), |i, j| {
        (rho[(i, j)] + rho[(j, i)].conj()) * half
    }))
}

/// Eigenvalues of `rho_A`, clipped at `1e-12`, ascending.
pub fn schmidt_spectrum<T: Real>(psi: &StateVector<T>, bp: &Bipartition) -> Result<Vec<T>> {
    check_cover(psi, bp)?;
    let small = if bp.kept_dim() <= bp.traced_dim() {
        bp.clone()
    } else {
        bp.complement()
    };
    let rho = reduced_density(psi, &small)?;
    let mut ev = T::eigvalsh(&rho)?;
    let clip = T::lit(EIGENVALUE_CLIP);
    for e in &mut ev {
        if *e < clip {
            *e = T::zero();
        }
    }
    Ok(ev)
}

/// `-sum e ln e` over a spectrum with `0 ln 0 = 0`, floored at zero.
pub fn entropy_from_spectrum<T: Real>(spectrum: &[T]) -> T {
    let s: T = spectrum
        .iter()
        .filter(|&&e| e > T::zero())
        .map(|&e| -e * e.ln())
        .sum();
    s.max(T::zero())
}

/// `S(rho) = -Tr(rho ln rho)` in nats.
pub fn von_neumann<T: Real>(rho: &ComplexMatrix<T>) -> Result<T> {
    let tr = rho.trace();
    let dev = ((tr.re - T::one()).abs() + tr.im.abs()).to_f64_lossy();
    if !(dev <= TRACE_TOLERANCE) {
        return Err(Error::Numeric(format!(
            "density matrix trace {}+{}i deviates from 1",
            tr.re, tr.im
        )));
    }
    let mut ev = T::eigvalsh(rho)?;
    let clip = T::lit(EIGENVALUE_CLIP);
    for e in &mut ev {
        if *e < clip {
            *e = T::zero();
        }
    }
    Ok(entropy_from_spectrum(&ev))
}

/// Entanglement entropy across `bp`, computed on the smaller side.
pub fn entanglement_entropy<T: Real>(psi: &StateVector<T>, bp: &Bipartition) -> Result<T> {
    let small = if bp.kept_dim() <= bp.traced_dim() {
        bp.clone()
    } else {
        bp.complement()
    };
    von_neumann(&reduced_density(psi, &small)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex<f64> {
        Complex::new(re, 0.0)
    }

    /// Index-summed partial trace over the listed qubits.
    fn brute_partial_trace(psi: &[Complex<f64>], n: usize, kept: &[usize]) -> ComplexMatrix<f64> {
        let na = 1usize << kept.len();
        let kept_index = |b: usize| {
            kept.iter()
                .fold(0usize, |acc, &q| (acc << 1) | (b >> (n - 1 - q) & 1))
        };
        let traced_mask = (0..n)
            .filter(|q| !kept.contains(q))
            .fold(0usize, |m, q| m | 1 << (n - 1 - q));
        let mut rho = ComplexMatrix::zeros(na, na);
        for b1 in 0..psi.len() {
            for b2 in 0..psi.len() {
                if b1 & traced_mask == b2 & traced_mask {
                    rho[(kept_index(b1), kept_index(b2))] += psi[b1] * psi[b2].conj();
                }
            }
        }
        rho
    }

    #[test]
    fn product_state_amplitudes() {
        let s = product_state::<f64>(1).unwrap();
        assert_eq!(s.amplitudes(), &[c(std::f64::consts::FRAC_1_SQRT_2); 2]);
        let s3 = product_state::<f64>(3).unwrap();
        assert!(s3
            .amplitudes()
            .iter()
            .all(|a| (a.re - 1.0 / 8f64.sqrt()).abs() < 1e-16 && a.im == 0.0));
        for k in 0..=3 {
            let bp = Bipartition::trailing(3, k).unwrap();
            assert!(entanglement_entropy(&s3, &bp).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn bell_state() {
        let bp = Bipartition::half(2).unwrap();
        let bell = max_entangled_state::<f64>(&bp).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(bell.amplitudes(), &[c(h), c(0.0), c(0.0), c(h)]);
        let rho = reduced_density(&bell, &bp).unwrap();
        assert!(rho.max_abs_diff(&ComplexMatrix::identity(2).scaled(0.5)) < 1e-15);
        assert!((entanglement_entropy(&bell, &bp).unwrap() - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn max_entangled_entropy_is_ln_n() {
        let bp = Bipartition::half(12).unwrap();
        let psi = max_entangled_state::<f64>(&bp).unwrap();
        assert!((entanglement_entropy(&psi, &bp).unwrap() - 64f64.ln()).abs() < 1e-12);
        assert!((psi.sector_weight(ParitySector::Even) - 1.0).abs() < 1e-14);
        assert!(matches!(
            max_entangled_state::<f64>(&Bipartition::trailing(5, 2).unwrap()),
            Err(Error::InvalidBipartition(_))
        ));
        let unequal = Bipartition::from_fraction(12, 0.25).unwrap();
        let r = max_entangled_state_rank::<f64>(&unequal).unwrap();
        assert!((entanglement_entropy(&r, &unequal).unwrap() - 8f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn von_neumann_values() {
        let mixed = ComplexMatrix::<f64>::diagonal(&[0.75, 0.25]);
        let expected = -(0.75f64 * 0.75f64.ln() + 0.25 * 0.25f64.ln());
        assert!((von_neumann(&mixed).unwrap() - expected).abs() < 1e-15);
        assert!((expected - 0.5623351446188083).abs() < 1e-15);
        let id = ComplexMatrix::<f64>::identity(8).scaled(0.125);
        assert!((von_neumann(&id).unwrap() - 8f64.ln()).abs() < 1e-14);
        let pure = ComplexMatrix::<f64>::diagonal(&[1.0, 0.0, 0.0]);
        assert_eq!(von_neumann(&pure).unwrap(), 0.0);
        let bad = ComplexMatrix::<f64>::diagonal(&[0.5, 0.6]);
        assert!(matches!(von_neumann(&bad), Err(Error::Numeric(_))));
    }

    #[test]
    fn partial_trace_matches_brute_force() {
        let mut rng = rng_from_seed(17);
        let psi = random_state::<f64>(6, &mut rng).unwrap();
        for kept in [
            vec![0, 1, 2],
            vec![3, 4, 5],
            vec![0, 2, 5],
            vec![4, 1],
            vec![5],
        ] {
            let bp = Bipartition::new(6, kept.clone()).unwrap();
            let rho = reduced_density(&psi, &bp).unwrap();
            let oracle = brute_partial_trace(psi.amplitudes(), 6, &kept);
            assert!(rho.max_abs_diff(&oracle) < 1e-15, "kept {kept:?}");
            assert!((rho.trace().re - 1.0).abs() < 1e-10);
            assert_eq!(rho.hermiticity_defect(), 0.0);
        }
    }

    #[test]
    fn sector_embedding_is_zero_padding() {
        let mut rng = rng_from_seed(2);
        let full = random_state::<f64>(6, &mut rng).unwrap();
        let even = full.project(ParitySector::Even).unwrap();
        assert_eq!(even.len(), 32);
        let padded = even.embed();
        for (b, a) in padded.amplitudes().iter().enumerate() {
            if b.count_ones() % 2 == 1 {
                assert_eq!(*a, Complex::zero());
            }
        }
        let bp = Bipartition::half(6).unwrap();
        assert_eq!(
            reduced_density(&even, &bp).unwrap(),
            reduced_density(&padded, &bp).unwrap()
        );
        assert_eq!(padded.restrict(ParitySector::Even).unwrap(), even);
    }

    #[test]
    fn fraction_cuts() {
        let bp = Bipartition::from_fraction(12, 5.0 / 12.0).unwrap();
        assert_eq!((bp.kept_dim(), bp.traced_dim()), (32, 128));
        let bp = Bipartition::from_fraction(12, 0.75).unwrap();
        assert_eq!(bp.kept().len(), 3);
        let bp = Bipartition::from_fraction(8, 1.0 / 3.0).unwrap();
        assert_eq!(bp.kept().len(), 3);
        assert!(Bipartition::new(4, vec![0, 0]).is_err());
        assert!(Bipartition::new(4, vec![4]).is_err());
    }

    fn apply_single_qubit(psi: &mut [Complex<f64>], n: usize, q: usize, u: [[Complex<f64>; 2]; 2]) {
        let bit = 1usize << (n - 1 - q);
        for b in 0..psi.len() {
            if b & bit == 0 {
                let (a0, a1) = (psi[b], psi[b | bit]);
                psi[b] = u[0][0] * a0 + u[0][1] * a1;
                psi[b | bit] = u[1][0] * a0 + u[1][1] * a1;
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn both_sides_have_equal_entropy(seed in any::<u64>(), n in 2usize..=10, k_frac in 0.0f64..1.0) {
            let mut rng = rng_from_seed(seed);
            let psi = random_state::<f64>(n, &mut rng).unwrap();
            let k = ((n as f64) * k_frac) as usize;
            let bp = Bipartition::trailing(n, k).unwrap();
            let sa = von_neumann(&reduced_density(&psi, &bp).unwrap()).unwrap();
            let sb = von_neumann(&reduced_density(&psi, &bp.complement()).unwrap()).unwrap();
            prop_assert!((sa - sb).abs() < 1e-10);
            prop_assert!(sa >= 0.0 && sa <= (bp.kept_dim().min(bp.traced_dim()) as f64).ln() + 1e-12);
        }

        #[test]
        fn entropy_invariant_under_traced_side_rotations(seed in any::<u64>(), theta in 0.0f64..6.3, phi in 0.0f64..6.3) {
            let n = 6;
            let mut rng = rng_from_seed(seed);
            let psi = random_state::<f64>(n, &mut rng).unwrap();
            let bp = Bipartition::trailing(n, 3).unwrap();
            let s0 = entanglement_entropy(&psi, &bp).unwrap();
            let (ct, st) = (theta.cos(), theta.sin());
            let e = Complex::from_polar(1.0, phi);
            let u = [[c(ct), -e.conj() * st], [e * st, c(ct)]];
            let mut amps = psi.amplitudes().to_vec();
            for q in 3..6 {
                apply_single_qubit(&mut amps, n, q, u);
            }
            let rotated = psi.with_amplitudes(amps).unwrap();
            prop_assert!((entanglement_entropy(&rotated, &bp).unwrap() - s0).abs() < 1e-10);
        }
    }
}
