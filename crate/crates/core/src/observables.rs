//! Entanglement-entropy and autocorrelation trajectories, single realization and ensemble.

use num_complex::Complex;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{KrylovOptions, LinearOperator, Method, Propagator, SumOperator};
use crate::linalg::{inner, ComplexMatrix};
use crate::models::{ModelSpec, OperatorSum, ParitySector};
use crate::pauli::{majorana_string, spin_operator, MajoranaIndex, PauliString};
use crate::rmt::{parity_block_diagonal, sample_matched, Ensemble, EnsembleSpec};
use crate::rng::rng_from_seed;
use crate::scalar::Real;
use crate::states::{
    entanglement_entropy, max_entangled_state, max_entangled_state_rank, product_state,
    Bipartition, StateVector,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    Ee,
    Autocorr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// `⊗ (|0> + |1>)/sqrt 2`.
    #[default]
    Product,
    /// Uniform Schmidt state across the bipartition (rank `min(𝒩, ℳ)`).
    MaxEntangled,
}

/// Probe operator for the autocorrelation: a Majorana `psi_i` (weight 1/2) or a spin component (weight 1).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "index", rename_all = "snake_case")]
pub enum Probe {
    Majorana(usize),
    Spin(usize),
}

impl Default for Probe {
    fn default() -> Self {
        Probe::Majorana(1)
    }
}

impl Probe {
    /// `O^2 = weight * I`, with `O = sqrt(weight) * string`.
    pub fn weight(self) -> f64 {
        match self {
            Probe::Majorana(_) => 0.5,
            Probe::Spin(_) => 1.0,
        }
    }

    pub fn string(self, n_qubits: usize) -> Result<PauliString> {
        match self {
            Probe::Majorana(i) => {
                Ok(majorana_string::<f64>(MajoranaIndex::new(i, 2 * n_qubits)?)?.1)
            }
            Probe::Spin(a) => spin_operator(a, n_qubits),
        }
    }

    /// The probe as an operator sum with coefficient `sqrt(weight)`.
    pub fn operator<T: Real>(self, n_qubits: usize) -> Result<OperatorSum<T>> {
        OperatorSum::from_terms(
            n_qubits,
            [(T::lit(self.weight().sqrt()), self.string(n_qubits)?)],
        )
    }

    pub fn label(self) -> String {
        match self {
            Probe::Majorana(i) => format!("majorana_{i}"),
            Probe::Spin(a) => format!("spin_{a}"),
        }
    }
}

/// Where the Hamiltonian of each realization comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HamiltonianSource {
    Model(ModelSpec),
    /// Gaussian ensemble on the qubit space of `matched`, rescaled to its eigenvalue variance.
    Rmt {
        ensemble: Ensemble,
        matched: ModelSpec,
    },
}

impl HamiltonianSource {
    pub fn n_qubits(&self) -> usize {
        match self {
            HamiltonianSource::Model(m) => m.n_qubits(),
            HamiltonianSource::Rmt { matched, .. } => matched.n_qubits(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            HamiltonianSource::Model(m) => m.validate(),
            HamiltonianSource::Rmt { matched, .. } => matched.validate(),
        }
    }

    pub fn label(&self) -> String {
        match self {
            HamiltonianSource::Model(m) => m.label(),
            HamiltonianSource::Rmt { ensemble, matched } => {
                format!("{}_n{}", ensemble.label(), matched.n)
            }
        }
    }

    /// Default probe: `psi_1` for Majorana models and for RMT, `sigma^x_1` for spin-SYK.
    pub fn default_probe(&self) -> Probe {
        match self {
            HamiltonianSource::Model(m) if !m.variant.is_majorana() => Probe::Spin(1),
            _ => Probe::Majorana(1),
        }
    }

    /// Draws the realization for `seed`.
    pub fn realize<T: Real>(&self, seed: u64, sector: ParitySector) -> Result<Realization<T>> {
        match self {
            HamiltonianSource::Model(m) => Ok(Realization::Sum(m.clone().with_seed(seed).build()?)),
            HamiltonianSource::Rmt { ensemble, matched } => {
                let n = matched.n_qubits();
                let target = matched.sigma2_target();
                let mut rng = rng_from_seed(seed);
                if sector == ParitySector::Full {
                    let spec = EnsembleSpec::new(*ensemble, 1usize << n);
                    Ok(Realization::Dense(sample_matched(&spec, target, &mut rng)?))
                } else {
                    let spec = EnsembleSpec::new(*ensemble, 1usize << (n - 1));
                    let even = sample_matched(&spec, target, &mut rng)?;
                    let odd = sample_matched(&spec, target, &mut rng)?;
                    Ok(Realization::Blocks {
                        n_qubits: n,
                        even,
                        odd,
                    })
                }
            }
        }
    }
}

/// One Hamiltonian draw.
#[derive(Clone, Debug)]
pub enum Realization<T> {
    Sum(OperatorSum<T>),
    Dense(ComplexMatrix<T>),
    /// Parity-block-diagonal matrix given by its two sector blocks.
    Blocks {
        n_qubits: usize,
        even: ComplexMatrix<T>,
        odd: ComplexMatrix<T>,
    },
}

impl<T: Real> Realization<T> {
    pub fn n_qubits(&self) -> usize {
        match self {
            Realization::Sum(s) => s.n_qubits(),
            Realization::Dense(m) => m.rows().trailing_zeros() as usize,
            Realization::Blocks { n_qubits, .. } => *n_qubits,
        }
    }

    pub fn propagator(
        &self,
        sector: ParitySector,
        method: Method,
        opts: KrylovOptions,
    ) -> Result<Propagator<T>> {
        let n = self.n_qubits();
        match (self, sector) {
            (Realization::Sum(s), _) => Propagator::from_sum(s, sector, method, opts),
            (Realization::Dense(m), ParitySector::Full) => {
                Propagator::from_dense(m, n, sector, method, opts)
            }
            (Realization::Dense(_), _) => Err(Error::SymmetryViolation(
                "a full random matrix has no parity sectors; sample blocks instead".into(),
            )),
            (Realization::Blocks { even, .. }, ParitySector::Even) => {
                Propagator::from_dense(even, n, sector, method, opts)
            }
            (Realization::Blocks { odd, .. }, ParitySector::Odd) => {
                Propagator::from_dense(odd, n, sector, method, opts)
            }
            (Realization::Blocks { even, odd, .. }, ParitySector::Full) => Propagator::from_dense(
                &parity_block_diagonal(n, even, odd)?,
                n,
                sector,
                method,
                opts,
            ),
        }
    }
}

/// Initial state on the requested layout; sector layouts project and renormalize.
pub fn initial_state<T: Real>(
    kind: InitialState,
    n_qubits: usize,
    bp: &Bipartition,
    sector: ParitySector,
) -> Result<StateVector<T>> {
    let psi = match kind {
        InitialState::Product => product_state(n_qubits)?,
        InitialState::MaxEntangled if bp.kept_dim() == bp.traced_dim() => max_entangled_state(bp)?,
        InitialState::MaxEntangled => max_entangled_state_rank(bp)?,
    };
    if sector == ParitySector::Full {
        Ok(psi)
    } else {
        psi.project(sector)
    }
}

/// `S(t) = S(rho_A(psi(t)))` on each grid time.
pub fn ee_trajectory<T: Real>(
    prop: &Propagator<T>,
    psi0: &StateVector<T>,
    bp: &Bipartition,
    times: &[T],
) -> Result<Vec<T>> {
    prop.evolve(psi0, times)?
        .iter()
        .map(|psi| entanglement_entropy(psi, bp))
        .collect()
}

/// `C(t) = <psi0| e^{iHt} O e^{-iHt} O |psi0> / <psi0|psi0>`, computed as `<u(t)|O|w(t)>` with
/// `u = e^{-iHt} psi0`, `w = e^{-iHt} O psi0`.
///
/// `prop_w` evolves `O psi0`; it differs from `prop_u` only when both are
/// sector propagators and `O` flips the parity.
pub fn autocorrelation<T: Real>(
    prop_u: &Propagator<T>,
    prop_w: &Propagator<T>,
    probe: Probe,
    psi0: &StateVector<T>,
    times: &[T],
) -> Result<Vec<Complex<T>>> {
    let n = psi0.n_qubits();
    let string_op = OperatorSum::from_terms(n, [(T::one(), probe.string(n)?)])?;
    let to_w = SumOperator::new(&string_op, psi0.sector())?;
    let back = SumOperator::new(&string_op, to_w.out_sector())?;
    if prop_w.sector() != to_w.out_sector() {
        return Err(Error::SymmetryViolation(format!(
            "probe maps {:?} to {:?} but the second propagator acts on {:?}",
            psi0.sector(),
            to_w.out_sector(),
            prop_w.sector()
        )));
    }
    let mut w0 = vec![Complex::zero(); to_w.dim()];
    to_w.apply_into(psi0.amplitudes(), &mut w0);
    let us = prop_u.evolve_amplitudes(psi0.amplitudes(), times)?;
    let ws = prop_w.evolve_amplitudes(&w0, times)?;
    // Dividing by the stored norm keeps C(0) = weight exact for states normalized to an ulp.
    let weight = T::lit(probe.weight()) / inner(psi0.amplitudes(), psi0.amplitudes()).re;
    let mut ow = vec![Complex::zero(); back.dim()];
    us.iter()
        .zip(&ws)
        .map(|(u, w)| {
            if u.len() != ow.len() {
                return Err(Error::Dimension(
                    "probe image does not match the first propagator".into(),
                ));
            }
            back.apply_into(w, &mut ow);
            Ok(inner(u, &ow) * weight)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "observable", rename_all = "snake_case")]
pub enum ObservableSpec {
    Ee { bipartition: Bipartition },
    Autocorr { probe: Probe },
}

/// Everything needed to run one trajectory ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryJob {
    pub source: HamiltonianSource,
    pub observable: ObservableSpec,
    pub initial_state: InitialState,
    pub sector: ParitySector,
    pub times: Vec<f64>,
    pub method: Method,
    pub krylov: KrylovOptions,
}

impl TrajectoryJob {
    pub fn ee(source: HamiltonianSource, bipartition: Bipartition, times: Vec<f64>) -> Self {
        Self {
            source,
            observable: ObservableSpec::Ee { bipartition },
            initial_state: InitialState::Product,
            sector: ParitySector::Full,
            times,
            method: Method::Auto,
            krylov: KrylovOptions::default(),
        }
    }

    pub fn autocorr(source: HamiltonianSource, probe: Probe, times: Vec<f64>) -> Self {
        Self {
            source,
            observable: ObservableSpec::Autocorr { probe },
            initial_state: InitialState::Product,
            sector: ParitySector::Full,
            times,
            method: Method::Auto,
            krylov: KrylovOptions::default(),
        }
    }

    pub fn with_sector(mut self, sector: ParitySector) -> Self {
        self.sector = sector;
        self
    }

    pub fn with_initial_state(mut self, s: InitialState) -> Self {
        self.initial_state = s;
        self
    }

    pub fn with_method(mut self, m: Method) -> Self {
        self.method = m;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.source.validate()?;
        if self.times.is_empty() {
            return Err(Error::InvalidArgument("empty time grid".into()));
        }
        if self.times.windows(2).any(|w| !(w[0] < w[1]))
            || self.times.iter().any(|t| !t.is_finite())
        {
            return Err(Error::InvalidArgument(
                "time grid must be finite and strictly increasing".into(),
            ));
        }
        let n = self.source.n_qubits();
        if let ObservableSpec::Ee { bipartition } = &self.observable {
            if bipartition.n_qubits() != n {
                return Err(Error::InvalidBipartition(format!(
                    "bipartition on {} qubits for a {n}-qubit Hamiltonian",
                    bipartition.n_qubits()
                )));
            }
        }
        Ok(())
    }

    fn bipartition(&self) -> Result<Bipartition> {
        match &self.observable {
            ObservableSpec::Ee { bipartition } => Ok(bipartition.clone()),
            ObservableSpec::Autocorr { .. } => Bipartition::half(self.source.n_qubits()),
        }
    }

    /// One realization: real `S(t)` or complex `C(t)` as `(re, im)`.
    pub fn run_realization<T: Real>(&self, seed: u64) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
        let n = self.source.n_qubits();
        let times: Vec<T> = self.times.iter().map(|&t| T::lit(t)).collect();
        let h = self.source.realize::<T>(seed, self.sector)?;
        let prop = h.propagator(self.sector, self.method, self.krylov)?;
        let bp = self.bipartition()?;
        let psi0 = initial_state::<T>(self.initial_state, n, &bp, self.sector)?;
        match &self.observable {
            ObservableSpec::Ee { bipartition } => {
                let s = ee_trajectory(&prop, &psi0, bipartition, &times)?;
                Ok((s.into_iter().map(T::to_f64_lossy).collect(), None))
            }
            ObservableSpec::Autocorr { probe } => {
                let c = if self.sector == ParitySector::Full {
                    autocorrelation(&prop, &prop, *probe, &psi0, &times)?
                } else {
                    let probe_sum = OperatorSum::from_terms(n, [(T::one(), probe.string(n)?)])?;
                    let w_sector = SumOperator::new(&probe_sum, self.sector)?.out_sector();
                    if w_sector == self.sector {
                        autocorrelation(&prop, &prop, *probe, &psi0, &times)?
                    } else {
                        let prop_w = h.propagator(w_sector, self.method, self.krylov)?;
                        autocorrelation(&prop, &prop_w, *probe, &psi0, &times)?
                    }
                };
                Ok((
                    c.iter().map(|z| z.re.to_f64_lossy()).collect(),
                    Some(c.iter().map(|z| z.im.to_f64_lossy()).collect()),
                ))
            }
        }
    }

    pub fn observable_kind(&self) -> Observable {
        match self.observable {
            ObservableSpec::Ee { .. } => Observable::Ee,
            ObservableSpec::Autocorr { .. } => Observable::Autocorr,
        }
    }

    /// All realizations on the current rayon pool; results are in seed order.
    pub fn run<T: Real>(&self, seeds: &[u64]) -> Result<TrajectoryRecord> {
        self.validate()?;
        if seeds.is_empty() {
            return Err(Error::InvalidArgument("no realizations requested".into()));
        }
        let rows: Vec<(Vec<f64>, Option<Vec<f64>>)> = seeds
            .par_iter()
            .map(|&s| self.run_realization::<T>(s))
            .collect::<Result<_>>()?;
        self.assemble(seeds, rows)
    }

    /// Builds the record from per-seed `run_realization` outputs, in seed order.
    pub fn assemble(
        &self,
        seeds: &[u64],
        rows: Vec<(Vec<f64>, Option<Vec<f64>>)>,
    ) -> Result<TrajectoryRecord> {
        if rows.len() != seeds.len() {
            return Err(Error::Dimension(format!(
                "{} rows for {} seeds",
                rows.len(),
                seeds.len()
            )));
        }
        let (re, im): (Vec<Vec<f64>>, Vec<Option<Vec<f64>>>) = rows.into_iter().unzip();
        let im = if self.observable_kind() == Observable::Autocorr {
            Some(
                im.into_iter()
                    .map(|v| {
                        v.ok_or_else(|| {
                            Error::Dimension("autocorrelation row lacks an imaginary part".into())
                        })
                    })
                    .collect::<Result<_>>()?,
            )
        } else {
            None
        };
        TrajectoryRecord::new(
            self.observable_kind(),
            self.times.clone(),
            re,
            im,
            self.meta(seeds),
        )
    }

    pub fn meta(&self, seeds: &[u64]) -> TrajectoryMeta {
        let (bipartition, probe) = match &self.observable {
            ObservableSpec::Ee { bipartition } => (Some(bipartition.clone()), None),
            ObservableSpec::Autocorr { probe } => (None, Some(*probe)),
        };
        TrajectoryMeta {
            label: self.source.label(),
            source: self.source.clone(),
            bipartition,
            probe,
            sector: self.sector,
            initial_state: self.initial_state,
            method: self.method,
            seeds: seeds.to_vec(),
            spec_hash: String::new(),
        }
    }
}

/// Same pipeline with a variance-matched Gaussian ensemble in place of the model.
pub fn rmt_baseline<T: Real>(
    job: &TrajectoryJob,
    ensemble: Ensemble,
    seeds: &[u64],
) -> Result<TrajectoryRecord> {
    let matched = match &job.source {
        HamiltonianSource::Model(m) => m.clone(),
        HamiltonianSource::Rmt { matched, .. } => matched.clone(),
    };
    let mut rmt = job.clone();
    rmt.source = HamiltonianSource::Rmt { ensemble, matched };
    rmt.run::<T>(seeds)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub label: String,
    pub source: HamiltonianSource,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bipartition: Option<Bipartition>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probe: Option<Probe>,
    pub sector: ParitySector,
    pub initial_state: InitialState,
    pub method: Method,
    pub seeds: Vec<u64>,
    pub spec_hash: String,
}

/// Ensemble of trajectories on a shared time grid.
///
/// For the autocorrelation `per_realization` holds `Re C`, `per_realization_im`
/// holds `Im C`, and `mean_abs`/`std_error_abs` summarize `|C|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub observable: Observable,
    pub times: Vec<f64>,
    pub per_realization: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_realization_im: Option<Vec<Vec<f64>>>,
    pub mean: Vec<f64>,
    pub std_error: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_abs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std_error_abs: Option<Vec<f64>>,
    pub meta: TrajectoryMeta,
}

/// Mean and standard error (sample standard deviation over `sqrt(n)`; zero for one sample).
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn column_stats(rows: &[Vec<f64>], n_times: usize) -> (Vec<f64>, Vec<f64>) {
    (0..n_times)
        .map(|j| mean_and_se(&rows.iter().map(|r| r[j]).collect::<Vec<_>>()))
        .unzip()
}

impl TrajectoryRecord {
    pub fn new(
        observable: Observable,
        times: Vec<f64>,
        per_realization: Vec<Vec<f64>>,
        per_realization_im: Option<Vec<Vec<f64>>>,
        meta: TrajectoryMeta,
    ) -> Result<Self> {
        if per_realization.is_empty() {
            return Err(Error::InvalidArgument(
                "record needs at least one realization".into(),
            ));
        }
        if per_realization.iter().any(|r| r.len() != times.len()) {
            return Err(Error::Dimension(
                "realization row length differs from the time grid".into(),
            ));
        }
        if let Some(im) = &per_realization_im {
            if im.len() != per_realization.len() || im.iter().any(|r| r.len() != times.len()) {
                return Err(Error::Dimension(
                    "imaginary part does not match the real part".into(),
                ));
            }
        }
        let (mean, std_error) = column_stats(&per_realization, times.len());
        let (mean_abs, std_error_abs) = match &per_realization_im {
            Some(im) => {
                let abs = Self::abs_rows(&per_realization, im);
                let (m, s) = column_stats(&abs, times.len());
                (Some(m), Some(s))
            }
            None => (None, None),
        };
        Ok(Self {
            observable,
            times,
            per_realization,
            per_realization_im,
            mean,
            std_error,
            mean_abs,
            std_error_abs,
            meta,
        })
    }

    fn abs_rows(re: &[Vec<f64>], im: &[Vec<f64>]) -> Vec<Vec<f64>> {
        re.iter()
            .zip(im)
            .map(|(r, i)| r.iter().zip(i).map(|(a, b)| a.hypot(*b)).collect())
            .collect()
    }

    pub fn realizations(&self) -> usize {
        self.per_realization.len()
    }

    /// Largest deviation between the stored and recomputed summaries.
    pub fn consistency_defect(&self) -> f64 {
        let (m, s) = column_stats(&self.per_realization, self.times.len());
        let d = |a: &[f64], b: &[f64]| {
            a.iter()
                .zip(b)
                .fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()))
        };
        d(&m, &self.mean).max(d(&s, &self.std_error))
    }

    /// Per-realization `|C(t)|` (or `S(t)` for EE).
    pub fn magnitude_rows(&self) -> Vec<Vec<f64>> {
        match &self.per_realization_im {
            Some(im) => Self::abs_rows(&self.per_realization, im),
            None => self
                .per_realization
                .iter()
                .map(|r| r.iter().map(|x| x.abs()).collect())
                .collect(),
        }
    }

    /// Per-realization time average over `lo <= t <= hi`, then mean and SE across realizations.
    pub fn window_average(&self, lo: f64, hi: f64, magnitude: bool) -> Result<(f64, f64)> {
        let idx: Vec<usize> = (0..self.times.len())
            .filter(|&j| self.times[j] >= lo && self.times[j] <= hi)
            .collect();
        if idx.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "no grid points in [{lo}, {hi}]"
            )));
        }
        let rows = if magnitude {
            self.magnitude_rows()
        } else {
            self.per_realization.clone()
        };
        let per: Vec<f64> = rows
            .iter()
            .map(|r| idx.iter().map(|&j| r[j]).sum::<f64>() / idx.len() as f64)
            .collect();
        Ok(mean_and_se(&per))
    }

    /// Saturation value of `|C(t)|`: window average over `[20, 30]`.
    pub fn saturation_value(&self) -> Result<(f64, f64)> {
        self.window_average(20.0, 30.0, true)
    }

    /// Restriction to a subset of realizations (bootstrap resamples).
    pub fn resampled(&self, rows: &[usize]) -> Result<Self> {
        let pick = |m: &Vec<Vec<f64>>| rows.iter().map(|&r| m[r].clone()).collect::<Vec<_>>();
        let mut meta = self.meta.clone();
        meta.seeds = rows
            .iter()
            .map(|&r| self.meta.seeds.get(r).copied().unwrap_or_default())
            .collect();
        Self::new(
            self.observable,
            self.times.clone(),
            pick(&self.per_realization),
            self.per_realization_im.as_ref().map(pick),
            meta,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::realization_seeds;

    fn grid(t_max: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| t_max * k as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn ee_starts_at_zero_and_stays_bounded() {
        let job = TrajectoryJob::ee(
            HamiltonianSource::Model(ModelSpec::syk(12)),
            Bipartition::half(6).unwrap(),
            grid(10.0, 21),
        );
        let rec = job.run::<f64>(&realization_seeds(1, 4)).unwrap();
        assert_eq!(rec.mean[0], 0.0);
        let ln_n = 8f64.ln();
        for row in &rec.per_realization {
            assert!(row.iter().all(|&s| (0.0..=ln_n + 1e-12).contains(&s)));
        }
        assert!(rec.consistency_defect() < 1e-12);
    }

    #[test]
    fn max_entangled_starts_at_ln_n() {
        let job = TrajectoryJob::ee(
            HamiltonianSource::Model(ModelSpec::syk(12)),
            Bipartition::half(6).unwrap(),
            grid(2.0, 3),
        )
        .with_initial_state(InitialState::MaxEntangled);
        let rec = job.run::<f64>(&[3]).unwrap();
        assert!((rec.mean[0] - 8f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn autocorrelation_at_zero() {
        let times = grid(3.0, 4);
        let maj = TrajectoryJob::autocorr(
            HamiltonianSource::Model(ModelSpec::syk(16)),
            Probe::Majorana(1),
            times.clone(),
        );
        let rec = maj.run::<f64>(&[1, 2]).unwrap();
        assert_eq!(rec.per_realization[0][0], 0.5);
        assert_eq!(rec.per_realization_im.as_ref().unwrap()[0][0], 0.0);
        let spin = TrajectoryJob::autocorr(
            HamiltonianSource::Model(ModelSpec::spin_syk(8, 1.0)),
            Probe::Spin(1),
            times.clone(),
        );
        assert_eq!(spin.run::<f64>(&[1]).unwrap().per_realization[0][0], 1.0);
        let rmt = rmt_baseline::<f64>(&maj, Ensemble::Gue, &[5]).unwrap();
        assert_eq!(rmt.per_realization[0][0], 0.5);
        for row in rec.magnitude_rows() {
            assert!(row.iter().all(|&c| c <= 0.5 + 1e-12));
        }
    }

    #[test]
    fn sector_mode_matches_full_space_with_projected_state() {
        // Oracle: full-space evolution of the even-projected product state.
        let times = grid(4.0, 9);
        let src = HamiltonianSource::Model(ModelSpec::syk(12));
        let sector = TrajectoryJob::autocorr(src.clone(), Probe::Majorana(1), times.clone())
            .with_sector(ParitySector::Even)
            .run_realization::<f64>(7)
            .unwrap();
        let h: OperatorSum<f64> = ModelSpec::syk(12).with_seed(7).build().unwrap();
        let prop = Propagator::from_sum(
            &h,
            ParitySector::Full,
            Method::ExactEig,
            KrylovOptions::default(),
        )
        .unwrap();
        let psi = product_state::<f64>(6)
            .unwrap()
            .project(ParitySector::Even)
            .unwrap()
            .embed();
        let full = autocorrelation(&prop, &prop, Probe::Majorana(1), &psi, &times).unwrap();
        for (j, z) in full.iter().enumerate() {
            assert!((z.re - sector.0[j]).abs() < 1e-10);
            assert!((z.im - sector.1.as_ref().unwrap()[j]).abs() < 1e-10);
        }
    }

    #[test]
    fn rmt_sector_blocks_run() {
        let job = TrajectoryJob::autocorr(
            HamiltonianSource::Model(ModelSpec::syk(12)),
            Probe::Majorana(1),
            grid(2.0, 3),
        )
        .with_sector(ParitySector::Odd);
        let rec = rmt_baseline::<f64>(&job, Ensemble::Goe, &[1, 2]).unwrap();
        assert!((rec.mean[0] - 0.5).abs() < 1e-15);
        let ee = TrajectoryJob::ee(
            HamiltonianSource::Model(ModelSpec::syk(12)),
            Bipartition::half(6).unwrap(),
            grid(2.0, 3),
        )
        .with_sector(ParitySector::Odd);
        assert!(rmt_baseline::<f64>(&ee, Ensemble::Gue, &[1]).is_ok());
    }

    #[test]
    fn ensemble_is_independent_of_thread_count() {
        let job = TrajectoryJob::ee(
            HamiltonianSource::Model(ModelSpec::sparse_syk(12, 0.5)),
            Bipartition::half(6).unwrap(),
            grid(5.0, 11),
        );
        let seeds = realization_seeds(9, 6);
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let four = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap();
        let a = one.install(|| job.run::<f64>(&seeds)).unwrap();
        let b = four.install(|| job.run::<f64>(&seeds)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn window_average_and_resampling() {
        let meta = TrajectoryJob::ee(
            HamiltonianSource::Model(ModelSpec::syk(8)),
            Bipartition::half(4).unwrap(),
            vec![0.0, 1.0],
        )
        .meta(&[1, 2]);
        let rec = TrajectoryRecord::new(
            Observable::Ee,
            vec![0.0, 1.0, 2.0],
            vec![vec![0.0, 1.0, 3.0], vec![0.0, 3.0, 5.0]],
            None,
            meta,
        )
        .unwrap();
        assert_eq!(rec.mean, vec![0.0, 2.0, 4.0]);
        assert_eq!(rec.std_error[1], 1.0);
        let (m, se) = rec.window_average(1.0, 2.0, false).unwrap();
        assert_eq!((m, se), (3.0, 1.0));
        assert!(rec.window_average(5.0, 6.0, false).is_err());
        let r = rec.resampled(&[1, 1]).unwrap();
        assert_eq!(r.mean, vec![0.0, 3.0, 5.0]);
        assert_eq!(r.meta.seeds, vec![2, 2]);
    }

    #[test]
    fn validation() {
        let bad_bp = TrajectoryJob::ee(
            HamiltonianSource::Model(ModelSpec::syk(8)),
            Bipartition::half(5).unwrap(),
            vec![0.0],
        );
        assert!(matches!(
            bad_bp.run::<f64>(&[1]),
            Err(Error::InvalidBipartition(_))
        ));
        let bad_t = TrajectoryJob::ee(
            HamiltonianSource::Model(ModelSpec::syk(8)),
            Bipartition::half(4).unwrap(),
            vec![1.0, 0.0],
        );
        assert!(bad_t.run::<f64>(&[1]).is_err());
        assert!(TrajectoryJob::ee(
            HamiltonianSource::Model(ModelSpec::syk(8)),
            Bipartition::half(4).unwrap(),
            vec![0.0]
        )
        .run::<f64>(&[])
        .is_err());
    }
}
