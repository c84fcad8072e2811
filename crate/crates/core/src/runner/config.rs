//! Versioned run configuration.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{SaturationTolerance, SweepValues};
use crate::error::{Error, Result};
use crate::evolve::{KrylovOptions, Method};
use crate::models::{binomial, ModelSpec, ParitySector, Variant};
use crate::observables::{HamiltonianSource, InitialState, Probe};
use crate::rmt::Ensemble;
use crate::states::Bipartition;

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_T_MAX: f64 = 30.0;
pub const DEFAULT_TIME_POINTS: usize = 301;
/// Default cap on the qubit count of any propagated state.
pub const DEFAULT_MAX_QUBITS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pipeline {
    Ee,
    Autocorr,
    Survey,
    Sweep,
    Bounds,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Precision {
    #[default]
    F64,
    F32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TimeGrid {
    Uniform {
        #[serde(default)]
        t_min: f64,
        t_max: f64,
        points: usize,
    },
    /// `points` log-spaced times on `[t_min, t_max]`, optionally preceded by `t = 0`.
    Log {
        t_min: f64,
        t_max: f64,
        points: usize,
        #[serde(default = "yes")]
        include_zero: bool,
    },
    Explicit {
        values: Vec<f64>,
    },
}

fn yes() -> bool {
    true
}

impl Default for TimeGrid {
    fn default() -> Self {
        TimeGrid::Uniform {
            t_min: 0.0,
            t_max: DEFAULT_T_MAX,
            points: DEFAULT_TIME_POINTS,
        }
    }
}

impl TimeGrid {
    pub fn times(&self) -> Result<Vec<f64>> {
        let bad = |msg: String| Err(Error::Config(msg));
        let t = match self {
            TimeGrid::Uniform {
                t_min,
                t_max,
                points,
            } => {
                if *points < 2 || !(t_min < t_max) {
                    return bad(format!("uniform grid needs points >= 2 and t_min < t_max, got {points} on [{t_min}, {t_max}]"));
                }
                let h = (t_max - t_min) / (*points - 1) as f64;
                (0..*points)
                    .map(|k| {
                        if k + 1 == *points {
                            *t_max
                        } else {
                            t_min + h * k as f64
                        }
                    })
                    .collect()
            }
            TimeGrid::Log {
                t_min,
                t_max,
                points,
                include_zero,
            } => {
                if *points < 2 || !(0.0 < *t_min && t_min < t_max) {
                    return bad(format!("log grid needs points >= 2 and 0 < t_min < t_max, got {points} on [{t_min}, {t_max}]"));
                }
                let (a, b) = (t_min.ln(), t_max.ln());
                let h = (b - a) / (*points - 1) as f64;
                let mut v: Vec<f64> = if *include_zero { vec![0.0] } else { Vec::new() };
                v.extend((0..*points).map(|k| match k {
                    0 => *t_min,
                    k if k + 1 == *points => *t_max,
                    k => (a + h * k as f64).exp(),
                }));
                v
            }
            TimeGrid::Explicit { values } => values.clone(),
        };
        if t.is_empty()
            || t.windows(2).any(|w| !(w[0] < w[1]))
            || t.iter().any(|x| !x.is_finite() || *x < 0.0)
        {
            return bad("time grid must be non-empty, non-negative and strictly increasing".into());
        }
        Ok(t)
    }
}

/// Subsystem cut: a fraction of the qubits, a number of traced trailing qubits, or an explicit kept set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BipartitionSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub traced: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kept: Option<Vec<usize>>,
}

impl Default for BipartitionSpec {
    fn default() -> Self {
        Self {
            fraction: Some(0.5),
            traced: None,
            kept: None,
        }
    }
}

impl BipartitionSpec {
    pub fn resolve(&self, n_qubits: usize) -> Result<Bipartition> {
        match (&self.fraction, &self.traced, &self.kept) {
            (Some(l), None, None) => Bipartition::from_fraction(n_qubits, *l),
            (None, Some(t), None) => Bipartition::trailing(n_qubits, *t),
            (None, None, Some(k)) => Bipartition::new(n_qubits, k.clone()),
            _ => Err(Error::Config(
                "bipartition needs exactly one of `fraction`, `traced` or `kept`".into(),
            )),
        }
    }
}

/// One curve: a Hamiltonian source plus optional per-curve overrides.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveConfig {
    pub label: String,
    pub source: HamiltonianSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bipartition: Option<BipartitionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<Probe>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<InitialState>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sector: Option<ParitySector>,
    /// Overrides the run-level realization count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub realizations: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolutionConfig {
    pub method: Method,
    pub sector: ParitySector,
    pub initial_state: InitialState,
    pub krylov: KrylovOptions,
    pub max_qubits: usize,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            method: Method::Auto,
            sector: ParitySector::Full,
            initial_state: InitialState::Product,
            krylov: KrylovOptions::default(),
            max_qubits: DEFAULT_MAX_QUBITS,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RmtConfig {
    /// Ensembles substituted for each model curve by the RMT-baseline command.
    pub ensembles: Vec<Ensemble>,
}

impl Default for RmtConfig {
    fn default() -> Self {
        Self {
            ensembles: vec![Ensemble::Goe, Ensemble::Gue],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurveyConfig {
    pub ensembles: Vec<Ensemble>,
    pub dim: usize,
    #[serde(default = "half")]
    pub fraction: f64,
}

fn half() -> f64 {
    0.5
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    P,
    Kappa,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    #[serde(default)]
    pub tolerance: SaturationTolerance,
}

impl SweepConfig {
    pub fn sweep_values(&self) -> Result<SweepValues> {
        match self.parameter {
            SweepParameter::P => Ok(SweepValues::P(self.values.clone())),
            SweepParameter::Kappa => self
                .values
                .iter()
                .map(|&k| {
                    if k >= 0.0 && k.fract() == 0.0 {
                        Ok(k as u64)
                    } else {
                        Err(Error::Config(format!(
                            "kappa value {k} is not a non-negative integer"
                        )))
                    }
                })
                .collect::<Result<_>>()
                .map(SweepValues::Kappa),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    /// Smaller subsystem dimensions.
    pub n: Vec<usize>,
    /// Integer ratios `M / N`.
    pub q: Vec<usize>,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        Self {
            n: vec![16, 64, 256],
            q: vec![1, 2, 4],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitKind {
    Linear,
    Exp,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub kind: FitKind,
    /// Required for `exp`; `linear` defaults to `[0.5, t*]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
    #[serde(default = "default_resamples")]
    pub resamples: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_resamples() -> usize {
    crate::analysis::fit::DEFAULT_BOOTSTRAP_RESAMPLES
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Also render `report.svg`.
    pub svg: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub name: String,
    pub pipeline: Pipeline,
    #[serde(default = "one")]
    pub realizations: usize,
    #[serde(default)]
    pub master_seed: u64,
    /// Worker threads; 0 uses every core.
    #[serde(default)]
    pub jobs: usize,
    #[serde(default)]
    pub precision: Precision,
    #[serde(default)]
    pub times: TimeGrid,
    #[serde(default)]
    pub evolution: EvolutionConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub curves: Vec<CurveConfig>,
    #[serde(default)]
    pub rmt: RmtConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub survey: Option<SurveyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

fn one() -> usize {
    1
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }

    /// Seeds for the run-level realization count; curve seeds are prefixes of the same stream.
    pub fn seeds(&self) -> Vec<u64> {
        crate::rng::realization_seeds(self.master_seed, self.realizations)
    }

    pub fn curve_seeds(&self, curve: &CurveConfig) -> Vec<u64> {
        crate::rng::realization_seeds(
            self.master_seed,
            curve.realizations.unwrap_or(self.realizations),
        )
    }

    /// Longest seed list any curve uses.
    pub fn all_seeds(&self) -> Vec<u64> {
        let r = self
            .curves
            .iter()
            .filter_map(|c| c.realizations)
            .fold(self.realizations, usize::max);
        crate::rng::realization_seeds(self.master_seed, r)
    }

    /// Sets the realization count of the run and of every curve.
    pub fn set_realizations(&mut self, r: usize) {
        self.realizations = r;
        for c in &mut self.curves {
            if c.realizations.is_some() {
                c.realizations = Some(r);
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (this build reads {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.realizations == 0 {
            return Err(Error::Config("realizations must be positive".into()));
        }
        if !is_safe_name(&self.name) {
            return Err(Error::Config(format!(
                "run name {:?} must be a plain file-name stem",
                self.name
            )));
        }
        self.times.times()?;
        let mut labels = BTreeSet::new();
        for c in &self.curves {
            if !is_safe_name(&c.label) || !labels.insert(c.label.as_str()) {
                return Err(Error::Config(format!(
                    "curve label {:?} is empty, unsafe or repeated",
                    c.label
                )));
            }
            c.source.validate()?;
            if c.realizations == Some(0) {
                return Err(Error::Config(format!(
                    "curve {} has zero realizations",
                    c.label
                )));
            }
            if let Some(b) = &c.bipartition {
                b.resolve(c.source.n_qubits())?;
            }
        }
        let need = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "pipeline {:?} needs {what}",
                    self.pipeline
                )))
            }
        };
        match self.pipeline {
            Pipeline::Ee | Pipeline::Autocorr => {
                need(!self.curves.is_empty(), "at least one [[curves]] entry")?
            }
            Pipeline::Survey => need(self.survey.is_some(), "a [survey] section")?,
            Pipeline::Sweep => need(
                self.sweep.is_some() && !self.curves.is_empty(),
                "a [sweep] section and curves",
            )?,
            Pipeline::Bounds => {}
        }
        if let Some(sw) = &self.sweep {
            sw.sweep_values()?;
        }
        if let Some(f) = &self.fit {
            if f.kind == FitKind::Exp && f.window.is_none() {
                return Err(Error::Config(
                    "exponential fits need an explicit window".into(),
                ));
            }
        }
        Ok(())
    }

    /// Shrinks every system to at most `max_qubits` qubits (figure recipes at desk scale).
    pub fn reduced(&self, max_qubits: usize) -> Result<Self> {
        if max_qubits < 2 {
            return Err(Error::Config("reduced size needs at least 2 qubits".into()));
        }
        let mut cfg = self.clone();
        for c in &mut cfg.curves {
            let spec = match &mut c.source {
                HamiltonianSource::Model(m) => m,
                HamiltonianSource::Rmt { matched, .. } => matched,
            };
            shrink_model(spec, max_qubits);
            let n = spec.n_qubits();
            match &c.bipartition {
                Some(BipartitionSpec { kept: Some(k), .. }) if k.iter().any(|&q| q >= n) => {
                    c.bipartition = Some(BipartitionSpec::default());
                }
                Some(BipartitionSpec {
                    traced: Some(t), ..
                }) if *t >= n => {
                    c.bipartition = Some(BipartitionSpec {
                        fraction: None,
                        traced: Some(n / 2),
                        kept: None,
                    });
                }
                _ => {}
            }
        }
        if let Some(s) = &mut cfg.survey {
            s.dim = s.dim.min(1usize << max_qubits);
        }
        if let (Some(sw), Some(c)) = (&mut cfg.sweep, cfg.curves.first()) {
            if let (SweepParameter::Kappa, HamiltonianSource::Model(m)) = (sw.parameter, &c.source)
            {
                let cap = m.quadruple_count() as f64;
                sw.values.retain(|&k| k <= cap);
                if sw.values.last() != Some(&cap) {
                    sw.values.push(cap);
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn shrink_model(m: &mut ModelSpec, max_qubits: usize) {
    if m.n_qubits() <= max_qubits {
        return;
    }
    m.n = match m.variant {
        Variant::SpinSyk => max_qubits,
        _ => 2 * max_qubits,
    };
    if let Some(k) = m.kappa {
        m.kappa = Some(k.min(binomial(m.operator_count() as u64, 4)));
    }
}

fn is_safe_name(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
        && !s.starts_with('.')
}
