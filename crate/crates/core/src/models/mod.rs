//! Random SYK-family Hamiltonians as Pauli sums.
//!
//! All four variants share the `q = 4` structure
//! `H = sum_{i<j<k<l} c_{ijkl} O_i O_j O_k O_l`, differing in the operators
//! (`psi` Majoranas or `sigma_{x,y}` spin components), which quadruples are
//! present, and how the couplings are drawn. Every term is a single Pauli
//! string, so a realization is an [`OperatorSum`] with at most `C(N, 4)` terms.

mod operator;
mod parity;

pub use operator::{OperatorSum, Term, DEFAULT_OPERATOR_DENSE_CAP};
pub use parity::{
    parity_operator, project_parity, sector_basis, sector_positions, ParityBlock, ParitySector,
};

use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{majorana_string, pauli_mul, spin_operator, MajoranaIndex, PauliString, Phase};
use crate::rng::{rng_from_seed, SimRng};
use crate::scalar::Real;

/// Overall factor applied to spin-SYK terms so that its eigenvalue variance
/// equals that of the Majorana variants with `2 * n_spins` Majoranas.
///
/// Spin components square to the identity while `psi^2 = 1/2`, so the bare
/// spin Hamiltonian carries `2^4` times the Majorana variance.
pub const SPIN_SYK_GLOBAL_SCALE: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Syk,
    SparseSyk,
    BinarySyk,
    SpinSyk,
}

impl Variant {
    pub fn label(self) -> &'static str {
        match self {
            Variant::Syk => "syk",
            Variant::SparseSyk => "sparse_syk",
            Variant::BinarySyk => "binary_syk",
            Variant::SpinSyk => "spin_syk",
        }
    }

    pub fn is_majorana(self) -> bool {
        !matches!(self, Variant::SpinSyk)
    }
}

fn default_p() -> f64 {
    1.0
}

/// One random-Hamiltonian draw.
///
/// `n` is the Majorana count for the SYK family and the spin count for
/// [`Variant::SpinSyk`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub variant: Variant,
    pub n: usize,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<u64>,
    #[serde(default)]
    pub seed: u64,
}

impl ModelSpec {
    pub fn syk(n: usize) -> Self {
        Self {
            variant: Variant::Syk,
            n,
            p: 1.0,
            kappa: None,
            seed: 0,
        }
    }

    pub fn sparse_syk(n: usize, p: f64) -> Self {
        Self {
            variant: Variant::SparseSyk,
            n,
            p,
            kappa: None,
            seed: 0,
        }
    }

    pub fn binary_syk(n: usize, kappa: u64) -> Self {
        Self {
            variant: Variant::BinarySyk,
            n,
            p: 1.0,
            kappa: Some(kappa),
            seed: 0,
        }
    }

    pub fn spin_syk(n_spins: usize, p: f64) -> Self {
        Self {
            variant: Variant::SpinSyk,
            n: n_spins,
            p,
            kappa: None,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Number of fermionic (or spin) operators the quadruples run over.
    pub fn operator_count(&self) -> usize {
        match self.variant {
            Variant::SpinSyk => 2 * self.n,
            _ => self.n,
        }
    }

    pub fn n_qubits(&self) -> usize {
        match self.variant {
            Variant::SpinSyk => self.n,
            _ => self.n / 2,
        }
    }

    pub fn hilbert_dim(&self) -> usize {
        1usize << self.n_qubits()
    }

    pub fn quadruple_count(&self) -> u64 {
        binomial(self.operator_count() as u64, 4)
    }

    /// Retention probability; for the binary model `kappa / C(N, 4)`.
    pub fn retention_probability(&self) -> f64 {
        match (self.variant, self.kappa) {
            (Variant::BinarySyk, Some(k)) => k as f64 / self.quadruple_count() as f64,
            _ => self.p,
        }
    }

    /// Target eigenvalue variance `6 C(N,4) / (2^4 N^3)` with `N` the operator count.
    pub fn sigma2_target(&self) -> f64 {
        crate::rmt::syk_sigma2(self.operator_count())
    }

    pub fn validate(&self) -> Result<()> {
        let n_ops = self.operator_count();
        match self.variant {
            Variant::SpinSyk => {
                if self.n < 2 {
                    return Err(Error::InvalidSpec(format!(
                        "spin-SYK needs at least 2 spins, got {}",
                        self.n
                    )));
                }
            }
            _ => {
                if self.n % 2 != 0 {
                    return Err(Error::InvalidSpec(format!(
                        "Majorana count must be even, got {}",
                        self.n
                    )));
                }
                if self.n < 4 {
                    return Err(Error::InvalidSpec(format!(
                        "need at least 4 Majoranas, got {}",
                        self.n
                    )));
                }
            }
        }
        if self.n_qubits() > crate::pauli::MAX_QUBITS {
            return Err(Error::InvalidSpec(format!(
                "{} qubits exceeds mask width",
                self.n_qubits()
            )));
        }
        match self.variant {
            Variant::Syk => {
                if self.p != 1.0 {
                    return Err(Error::InvalidSpec(format!(
                        "dense SYK requires p = 1 (got {}); use sparse_syk",
                        self.p
                    )));
                }
            }
            Variant::SparseSyk | Variant::SpinSyk => {
                if !(self.p > 0.0 && self.p <= 1.0) {
                    return Err(Error::InvalidSpec(format!(
                        "retention probability {} outside (0, 1]",
                        self.p
                    )));
                }
            }
            Variant::BinarySyk => {
                let kappa = self
                    .kappa
                    .ok_or_else(|| Error::InvalidSpec("binary SYK requires kappa".into()))?;
                let total = binomial(n_ops as u64, 4);
                if kappa == 0 || kappa > total {
                    return Err(Error::InvalidSpec(format!(
                        "kappa {kappa} outside 1..={total}"
                    )));
                }
            }
        }
        if self.variant != Variant::BinarySyk && self.kappa.is_some() {
            return Err(Error::InvalidSpec(
                "kappa only applies to binary_syk".into(),
            ));
        }
        Ok(())
    }

    /// Builds the realization selected by `self.seed`.
    pub fn build<T: Real>(&self) -> Result<OperatorSum<T>> {
        let mut rng = rng_from_seed(self.seed);
        self.build_with(&mut rng)
    }

    pub fn build_with<T: Real>(&self, rng: &mut SimRng) -> Result<OperatorSum<T>> {
        match self.variant {
            Variant::Syk | Variant::SparseSyk => build_syk(self, rng),
            Variant::BinarySyk => build_binary_syk(self, rng),
            Variant::SpinSyk => build_spin_syk(self, rng),
        }
    }

    pub fn label(&self) -> String {
        match self.variant {
            Variant::BinarySyk => format!(
                "{}_n{}_k{}",
                self.variant.label(),
                self.n,
                self.kappa.unwrap_or(0)
            ),
            _ if self.p == 1.0 => format!("{}_n{}", self.variant.label(), self.n),
            _ => format!("{}_n{}_p{}", self.variant.label(), self.n, self.p),
        }
    }
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// All `i < j < k < l` in `0..n`, lexicographic.
pub fn quadruples(n: usize) -> Vec<[usize; 4]> {
    let mut out = Vec::with_capacity(binomial(n as u64, 4) as usize);
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                for l in k + 1..n {
                    out.push([i, j, k, l]);
                }
            }
        }
    }
    out
}

fn product_string(ops: &[PauliString], quad: &[usize; 4]) -> Result<PauliString> {
    let mut s = ops[quad[0]];
    for &q in &quad[1..] {
        s = pauli_mul(&s, &ops[q])?;
    }
    Ok(s)
}

fn majorana_strings(n: usize) -> Result<Vec<PauliString>> {
    (1..=n)
        .map(|i| majorana_string::<f64>(MajoranaIndex::new(i, n)?).map(|(_, s)| s))
        .collect()
}

/// Sparse (or, at `p = 1`, dense) Majorana SYK.
///
/// Every quadruple consumes one uniform draw (retention) and one Gaussian
/// coupling whether or not it is kept, so realizations with the same seed
/// are nested in `p`.
pub fn build_syk<T: Real>(spec: &ModelSpec, rng: &mut SimRng) -> Result<OperatorSum<T>> {
    if !matches!(spec.variant, Variant::Syk | Variant::SparseSyk) {
        return Err(Error::InvalidSpec(format!(
            "build_syk called for {:?}",
            spec.variant
        )));
    }
    spec.validate()?;
    let n = spec.n;
    let strings = majorana_strings(n)?;
    // sqrt(6 / (p N^3)) times the four Majorana normalizations (1/sqrt 2)^4 = 1/4.
    let prefactor = (6.0 / (spec.p * (n as f64).powi(3))).sqrt() * 0.25;
    let mut h = OperatorSum::new(n / 2);
    for quad in quadruples(n) {
        let u: f64 = rng.random();
        let j: f64 = rng.sample(StandardNormal);
        if u < spec.p {
            h.push(T::lit(prefactor * j), product_string(&strings, &quad)?)?;
        }
    }
    Ok(h)
}

/// The `kappa` retained quadruple indices (ascending, into [`quadruples`]) and their `±1` couplings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryCouplings {
    pub indices: Vec<usize>,
    pub signs: Vec<i8>,
}

impl BinaryCouplings {
    pub fn plus_count(&self) -> usize {
        self.signs.iter().filter(|&&s| s > 0).count()
    }

    pub fn minus_count(&self) -> usize {
        self.signs.len() - self.plus_count()
    }
}

/// Draws `kappa` distinct quadruples and a balanced set of `±1` couplings;
/// for odd `kappa` the majority sign is decided by a fair coin.
pub fn sample_binary_couplings(
    n_quadruples: usize,
    kappa: usize,
    rng: &mut SimRng,
) -> Result<BinaryCouplings> {
    if kappa > n_quadruples {
        return Err(Error::InvalidSpec(format!(
            "kappa {kappa} exceeds {n_quadruples} quadruples"
        )));
    }
    let mut indices = index::sample(rng, n_quadruples, kappa).into_vec();
    indices.sort_unstable();
    let half = kappa / 2;
    let (plus, minus) = if kappa % 2 == 0 {
        (half, half)
    } else if rng.random::<bool>() {
        (half + 1, half)
    } else {
        (half, half + 1)
    };
    let mut signs: Vec<i8> = std::iter::repeat_n(1i8, plus)
        .chain(std::iter::repeat_n(-1i8, minus))
        .collect();
    signs.shuffle(rng);
    Ok(BinaryCouplings { indices, signs })
}

pub fn build_binary_syk<T: Real>(spec: &ModelSpec, rng: &mut SimRng) -> Result<OperatorSum<T>> {
    if spec.variant != Variant::BinarySyk {
        return Err(Error::InvalidSpec(format!(
            "build_binary_syk called for {:?}",
            spec.variant
        )));
    }
    spec.validate()?;
    let n = spec.n;
    let kappa = spec.kappa.expect("validated") as usize;
    let quads = quadruples(n);
    let couplings = sample_binary_couplings(quads.len(), kappa, rng)?;
    let p = spec.retention_probability();
    let prefactor = (6.0 / (p * (n as f64).powi(3))).sqrt() * 0.25;
    let strings = majorana_strings(n)?;
    let mut h = OperatorSum::new(n / 2);
    for (&idx, &sign) in couplings.indices.iter().zip(&couplings.signs) {
        h.push(
            T::lit(prefactor * f64::from(sign)),
            product_string(&strings, &quads[idx])?,
        )?;
    }
    Ok(h)
}

/// Number of spins whose `x` and `y` components both appear in the quadruple
/// (1-based operator indices `2j - 1`, `2j` belong to spin `j`).
pub fn eta(quad: &[usize; 4]) -> u32 {
    let mut count = 0;
    for w in quad.windows(2) {
        if w[0] % 2 == 1 && w[1] == w[0] + 1 {
            count += 1;
        }
    }
    count
}

pub fn build_spin_syk<T: Real>(spec: &ModelSpec, rng: &mut SimRng) -> Result<OperatorSum<T>> {
    if spec.variant != Variant::SpinSyk {
        return Err(Error::InvalidSpec(format!(
            "build_spin_syk called for {:?}",
            spec.variant
        )));
    }
    spec.validate()?;
    let n_spins = spec.n;
    let n_ops = 2 * n_spins;
    let ops = (1..=n_ops)
        .map(|a| spin_operator(a, n_spins))
        .collect::<Result<Vec<_>>>()?;
    let prefactor = SPIN_SYK_GLOBAL_SCALE * (6.0 / (spec.p * (n_ops as f64).powi(3))).sqrt();
    let mut h = OperatorSum::new(n_spins);
    for quad0 in quadruples(n_ops) {
        let u: f64 = rng.random();
        let j: f64 = rng.sample(StandardNormal);
        if u < spec.p {
            let one_based = quad0.map(|q| q + 1);
            let s = product_string(&ops, &quad0)?;
            let s = s.with_phase(s.phase() * Phase::from_exponent(eta(&one_based)));
            h.push(T::lit(prefactor * j), s)?;
        }
    }
    Ok(h)
}

/// Summary statistics of a Hamiltonian realization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianStats {
    pub term_count: usize,
    pub trace_h2_over_dim: f64,
    pub max_coeff: f64,
}

pub fn hamiltonian_stats<T: Real>(h: &OperatorSum<T>) -> HamiltonianStats {
    HamiltonianStats {
        term_count: h.len(),
        trace_h2_over_dim: h.trace_h2_over_dim().to_f64_lossy(),
        max_coeff: h.max_abs_coeff().to_f64_lossy(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ComplexMatrix;
    use crate::rng::rng_from_seed;

    #[test]
    fn binomials() {
        assert_eq!(binomial(8, 4), 70);
        assert_eq!(binomial(24, 4), 10626);
        assert_eq!(binomial(16, 4), 1820);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(quadruples(8).len(), 70);
    }

    #[test]
    fn dense_syk_term_count_and_magnitude() {
        let spec = ModelSpec::syk(8).with_seed(11);
        let h: OperatorSum<f64> = spec.build().unwrap();
        assert_eq!(h.len(), 70);
        // Replay the couplings: coefficient magnitude = sqrt(6/8^3) |J| / 4.
        let mut rng = rng_from_seed(11);
        let mut js = Vec::new();
        for _ in 0..70 {
            let _u: f64 = rng.random();
            js.push(rng.sample::<f64, _>(StandardNormal));
        }
        for (t, j) in h.terms().iter().zip(&js) {
            let expected = (6.0f64 / 512.0).sqrt() * j.abs() / 4.0;
            assert!((t.coeff.abs() - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn dense_syk_matches_majorana_kronecker_construction() {
        // Oracle: dense product of the four dense Majorana matrices per term.
        let n = 8;
        let spec = ModelSpec::syk(n).with_seed(3);
        let h: OperatorSum<f64> = spec.build().unwrap();
        let dense = h.to_dense(8).unwrap();
        let psis: Vec<ComplexMatrix<f64>> = (1..=n)
            .map(|i| {
                let (c, s) = majorana_string::<f64>(MajoranaIndex::new(i, n).unwrap()).unwrap();
                s.to_dense(8).unwrap().scaled(c)
            })
            .collect();
        let mut rng = rng_from_seed(3);
        let mut oracle = ComplexMatrix::zeros(16, 16);
        let pref = (6.0f64 / 512.0).sqrt();
        for q in quadruples(n) {
            let _u: f64 = rng.random();
            let j: f64 = rng.sample(StandardNormal);
            let prod = psis[q[0]]
                .matmul(&psis[q[1]])
                .matmul(&psis[q[2]])
                .matmul(&psis[q[3]]);
            oracle = oracle.add(&prod.scaled(pref * j));
        }
        assert!(dense.max_abs_diff(&oracle) < 1e-13);
        assert_eq!(dense.hermiticity_defect(), 0.0);
    }

    #[test]
    fn sparse_retention_is_nested_in_p() {
        let dense: OperatorSum<f64> = ModelSpec::sparse_syk(10, 1.0).with_seed(5).build().unwrap();
        let sparse: OperatorSum<f64> = ModelSpec::sparse_syk(10, 0.3).with_seed(5).build().unwrap();
        let dense_keys: std::collections::HashSet<_> = dense
            .terms()
            .iter()
            .map(|t| (t.string.x_mask(), t.string.z_mask()))
            .collect();
        assert!(sparse.len() < dense.len());
        assert!(sparse
            .terms()
            .iter()
            .all(|t| dense_keys.contains(&(t.string.x_mask(), t.string.z_mask()))));
    }

    #[test]
    fn sparse_term_count_mean_at_n24() {
        // 0.004 * C(24, 4) = 42.504
        let draws = 400;
        let counts: Vec<f64> = (0..draws)
            .map(|s| {
                ModelSpec::sparse_syk(24, 0.004)
                    .with_seed(s)
                    .build::<f64>()
                    .unwrap()
                    .len() as f64
            })
            .collect();
        let mean = counts.iter().sum::<f64>() / draws as f64;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (draws as f64 - 1.0);
        let se = (var / draws as f64).sqrt();
        assert!((mean - 42.504).abs() < 3.0 * se, "mean {mean} se {se}");
    }

    #[test]
    fn binary_kappa_and_p() {
        let spec = ModelSpec::binary_syk(24, 10626);
        assert_eq!(spec.retention_probability(), 1.0);
        let spec = ModelSpec::binary_syk(24, 22).with_seed(9);
        let mut rng = rng_from_seed(9);
        let c = sample_binary_couplings(10626, 22, &mut rng).unwrap();
        assert_eq!((c.plus_count(), c.minus_count()), (11, 11));
        let h: OperatorSum<f64> = spec.build().unwrap();
        assert_eq!(h.len(), 22);
        assert!(ModelSpec::binary_syk(8, 71).validate().is_err());
    }

    #[test]
    fn binary_odd_kappa_majority_is_fair() {
        let mut plus_major = 0;
        let draws = 2000;
        for s in 0..draws {
            let mut rng = rng_from_seed(s);
            let c = sample_binary_couplings(70, 5, &mut rng).unwrap();
            let split = (c.plus_count(), c.minus_count());
            assert!(split == (3, 2) || split == (2, 3));
            if split == (3, 2) {
                plus_major += 1;
            }
        }
        let frac = plus_major as f64 / draws as f64;
        assert!((frac - 0.5).abs() < 3.0 * (0.25 / draws as f64).sqrt());
    }

    #[test]
    fn eta_counts_complete_spins() {
        assert_eq!(eta(&[1, 2, 3, 5]), 1);
        assert_eq!(eta(&[1, 3, 5, 7]), 0);
        assert_eq!(eta(&[1, 2, 3, 4]), 2);
        // 2 and 3 belong to different spins.
        assert_eq!(eta(&[2, 3, 6, 8]), 0);
    }

    #[test]
    fn spin_term_with_eta_two_is_hermitian() {
        // Oracle: dense sigma products for quadruple (1,2,3,4) on 4 spins.
        let ops: Vec<ComplexMatrix<f64>> = (1..=4)
            .map(|a| spin_operator(a, 4).unwrap().to_dense(4).unwrap())
            .collect();
        let prod = ops[0].matmul(&ops[1]).matmul(&ops[2]).matmul(&ops[3]);
        // i^2 = -1 times the product.
        let term = prod.scaled(-1.0);
        assert_eq!(term.hermiticity_defect(), 0.0);
        assert!(
            prod.scaled_complex(num_complex::Complex::new(0.0, 1.0))
                .hermiticity_defect()
                > 0.5
        );
    }

    #[test]
    fn spin_syk_is_hermitian_and_parity_symmetric() {
        let h: OperatorSum<f64> = ModelSpec::spin_syk(4, 1.0).with_seed(2).build().unwrap();
        assert_eq!(h.len(), 70);
        let d = h.to_dense(8).unwrap();
        assert_eq!(d.hermiticity_defect(), 0.0);
        let p = parity_operator(8).unwrap().to_dense::<f64>(8).unwrap();
        assert_eq!(d.commutator(&p).max_abs(), 0.0);
    }

    #[test]
    fn validation_errors() {
        assert!(ModelSpec::syk(7).validate().is_err());
        assert!(ModelSpec::syk(2).validate().is_err());
        assert!(ModelSpec::sparse_syk(8, 0.0).validate().is_err());
        assert!(ModelSpec::sparse_syk(8, 1.5).validate().is_err());
        assert!(ModelSpec::spin_syk(1, 1.0).validate().is_err());
        let mut s = ModelSpec::syk(8);
        s.p = 0.5;
        assert!(s.validate().is_err());
    }

    #[test]
    fn stats_of_simple_sums() {
        let empty = OperatorSum::<f64>::new(3);
        assert_eq!(
            hamiltonian_stats(&empty),
            HamiltonianStats {
                term_count: 0,
                trace_h2_over_dim: 0.0,
                max_coeff: 0.0
            }
        );
        let single = OperatorSum::from_terms(2, [(0.7, "XY".parse().unwrap())]).unwrap();
        let st = hamiltonian_stats(&single);
        assert_eq!(st.term_count, 1);
        assert!((st.trace_h2_over_dim - 0.49).abs() < 1e-15);
    }

    #[test]
    fn stats_ensemble_mean_matches_closed_form_n8() {
        // Oracle: dense Tr(H^2)/dim averaged over draws, vs 6 C(8,4)/(16 * 8^3) = 420/8192.
        let draws = 1000;
        let mut from_coeffs = Vec::with_capacity(draws);
        for s in 0..draws as u64 {
            let h: OperatorSum<f64> = ModelSpec::syk(8).with_seed(s).build().unwrap();
            from_coeffs.push(hamiltonian_stats(&h).trace_h2_over_dim);
            if s < 20 {
                let d = h.to_dense(8).unwrap();
                let dense_tr = d.frobenius_sq() / 16.0;
                assert!((dense_tr - from_coeffs[s as usize]).abs() < 1e-13);
            }
        }
        let mean = from_coeffs.iter().sum::<f64>() / draws as f64;
        let var =
            from_coeffs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (draws as f64 - 1.0);
        let se = (var / draws as f64).sqrt();
        assert!(
            (mean - 420.0 / 8192.0).abs() < 3.0 * se,
            "mean {mean} se {se}"
        );
    }
}
