//! Entanglement entropy of every eigenstate of a random matrix.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observables::mean_and_se;
use crate::rmt::{Ensemble, EnsembleSpec};
use crate::scalar::Real;
use crate::states::{entanglement_entropy, Bipartition, StateVector};

use super::bounds::{page_bound_asymptotic, page_exact};

/// Largest matrix dimension the survey will diagonalize.
pub const SURVEY_DIM_CAP: usize = 1 << 13;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurveyResult {
    pub ensemble: Ensemble,
    pub dim: usize,
    pub fraction: f64,
    pub bipartition: Bipartition,
    /// Smaller and larger subsystem dimensions.
    pub n_small: usize,
    pub m_large: usize,
    pub seeds: Vec<u64>,
    /// Ensemble mean and SE of `S` for the `n`-th eigenstate (ascending eigenvalue).
    pub per_index_mean: Vec<f64>,
    pub per_index_se: Vec<f64>,
    /// Mean over the spectrum, then over realizations.
    pub grand_mean: f64,
    pub grand_se: f64,
    pub page_exact: f64,
    pub page_asymptotic: f64,
}

fn entropies_of<T: Real>(spec: &EnsembleSpec, seed: u64, bp: &Bipartition) -> Result<Vec<f64>> {
    let h = (*spec).with_seed(seed).sample::<T>()?;
    let (_, vectors) = T::eigh(&h)?;
    let n = bp.n_qubits();
    vectors
        .into_columns()
        .into_iter()
        .map(|v| {
            let psi = StateVector::unnormalized(n, v, crate::models::ParitySector::Full)?;
            entanglement_entropy(&psi, bp).map(T::to_f64_lossy)
        })
        .collect()
}

/// Eigenstate entanglement survey across the `fraction` cut for every seed.
pub fn eigenstate_ee_survey<T: Real>(
    spec: &EnsembleSpec,
    fraction: f64,
    seeds: &[u64],
) -> Result<SurveyResult> {
    spec.validate()?;
    if !spec.dim.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "survey dimension {} is not a power of two",
            spec.dim
        )));
    }
    if spec.dim > SURVEY_DIM_CAP {
        return Err(Error::Resource(format!(
            "survey dimension {} exceeds the cap {SURVEY_DIM_CAP}",
            spec.dim
        )));
    }
    if seeds.is_empty() {
        return Err(Error::InvalidArgument("no realizations requested".into()));
    }
    let n_qubits = spec.dim.trailing_zeros() as usize;
    let bp = Bipartition::from_fraction(n_qubits, fraction)?;
    let rows: Vec<Vec<f64>> = seeds
        .par_iter()
        .map(|&s| entropies_of::<T>(spec, s, &bp))
        .collect::<Result<_>>()?;
    let (per_index_mean, per_index_se): (Vec<f64>, Vec<f64>) = (0..spec.dim)
        .map(|k| mean_and_se(&rows.iter().map(|r| r[k]).collect::<Vec<_>>()))
        .unzip();
    let spectral: Vec<f64> = rows
        .iter()
        .map(|r| r.iter().sum::<f64>() / r.len() as f64)
        .collect();
    let (grand_mean, grand_se) = mean_and_se(&spectral);
    let (a, b) = (bp.kept_dim(), bp.traced_dim());
    let (n_small, m_large) = (a.min(b), a.max(b));
    Ok(SurveyResult {
        ensemble: spec.ensemble,
        dim: spec.dim,
        fraction,
        bipartition: bp,
        n_small,
        m_large,
        seeds: seeds.to_vec(),
        per_index_mean,
        per_index_se,
        grand_mean,
        grand_se,
        page_exact: page_exact(n_small, m_large)?,
        page_asymptotic: page_bound_asymptotic(n_small, m_large)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::realization_seeds;

    #[test]
    fn bounded_by_ln_n_and_near_page() {
        let spec = EnsembleSpec::new(Ensemble::Gue, 64);
        let r = eigenstate_ee_survey::<f64>(&spec, 0.5, &realization_seeds(3, 6)).unwrap();
        assert_eq!((r.n_small, r.m_large), (8, 8));
        assert_eq!(r.per_index_mean.len(), 64);
        assert!(r
            .per_index_mean
            .iter()
            .all(|&s| s > 0.0 && s <= 8f64.ln() + 1e-12));
        assert!(
            (r.grand_mean - r.page_exact).abs() < 0.05,
            "{} vs {}",
            r.grand_mean,
            r.page_exact
        );
    }

    #[test]
    fn unitary_and_symplectic_not_below_orthogonal() {
        let seeds = realization_seeds(11, 8);
        let run = |e| eigenstate_ee_survey::<f64>(&EnsembleSpec::new(e, 256), 0.5, &seeds).unwrap();
        let goe = run(Ensemble::Goe);
        for e in [Ensemble::Gue, Ensemble::Gse] {
            let r = run(e);
            let se = r.grand_se.hypot(goe.grand_se);
            assert!(
                r.grand_mean >= goe.grand_mean - 2.0 * se,
                "{e:?}: {} < {}",
                r.grand_mean,
                goe.grand_mean
            );
        }
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(matches!(
            eigenstate_ee_survey::<f64>(&EnsembleSpec::new(Ensemble::Gue, 24), 0.5, &[1]),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            eigenstate_ee_survey::<f64>(&EnsembleSpec::new(Ensemble::Gue, 1 << 14), 0.5, &[1]),
            Err(Error::Resource(_))
        ));
    }
}
