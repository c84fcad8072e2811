//! Saturation verdicts across a sparseness sweep.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::Variant;
use crate::observables::{HamiltonianSource, ObservableSpec, TrajectoryJob, TrajectoryRecord};
use crate::scalar::Real;

use super::bounds::page_exact;

/// Sparseness values: retention probabilities, or coupling counts for binary SYK.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "parameter", content = "values", rename_all = "snake_case")]
pub enum SweepValues {
    P(Vec<f64>),
    Kappa(Vec<u64>),
}

impl SweepValues {
    pub fn len(&self) -> usize {
        match self {
            SweepValues::P(v) => v.len(),
            SweepValues::Kappa(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn name(&self) -> &'static str {
        match self {
            SweepValues::P(_) => "p",
            SweepValues::Kappa(_) => "kappa",
        }
    }

    fn value(&self, i: usize) -> f64 {
        match self {
            SweepValues::P(v) => v[i],
            SweepValues::Kappa(v) => v[i] as f64,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SaturationTolerance {
    /// Multiple of the window-mean standard error.
    pub se_multiple: f64,
    /// Absolute slack in nats.
    pub absolute: f64,
    /// Averaging window `[lo, hi]`.
    pub window: [f64; 2],
}

impl Default for SaturationTolerance {
    fn default() -> Self {
        Self {
            se_multiple: 3.0,
            absolute: 0.05,
            window: [25.0, 30.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepVerdict {
    pub value: f64,
    pub window_mean: f64,
    pub window_se: f64,
    pub target: f64,
    pub tolerance: f64,
    pub saturates: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub parameter: String,
    pub label: String,
    pub target: f64,
    pub settings: SaturationTolerance,
    pub verdicts: Vec<SweepVerdict>,
    /// Largest swept value whose verdict fails.
    pub critical_value: Option<f64>,
    /// `(critical value, next larger swept value)`.
    pub bracket: Option<(f64, Option<f64>)>,
    /// Indices `i` where value `i` saturates but value `i + 1` does not.
    pub monotonicity_violations: Vec<usize>,
}

impl SweepResult {
    pub fn is_monotone(&self) -> bool {
        self.monotonicity_violations.is_empty()
    }
}

fn job_for(base: &TrajectoryJob, values: &SweepValues, i: usize) -> Result<TrajectoryJob> {
    let HamiltonianSource::Model(spec) = &base.source else {
        return Err(Error::InvalidSpec(
            "sparseness sweeps need a model source".into(),
        ));
    };
    let mut spec = spec.clone();
    match values {
        SweepValues::P(v) => {
            if spec.variant == Variant::Syk && v[i] < 1.0 {
                spec.variant = Variant::SparseSyk;
            }
            if spec.variant == Variant::SparseSyk && v[i] == 1.0 {
                spec.variant = Variant::Syk;
            }
            spec.p = v[i];
        }
        SweepValues::Kappa(v) => {
            if spec.variant != Variant::BinarySyk {
                return Err(Error::InvalidSpec(
                    "kappa sweeps need a binary SYK model".into(),
                ));
            }
            spec.kappa = Some(v[i]);
        }
    }
    let mut job = base.clone();
    job.source = HamiltonianSource::Model(spec);
    job.validate()?;
    Ok(job)
}

/// Runs every `(value, seed)` pair, then records each value's window-mean `S` against
/// the exact Page value of the job's bipartition.
pub fn sparseness_sweep<T: Real>(
    base: &TrajectoryJob,
    values: &SweepValues,
    seeds: &[u64],
    settings: SaturationTolerance,
) -> Result<(SweepResult, Vec<TrajectoryRecord>)> {
    let ObservableSpec::Ee { bipartition } = &base.observable else {
        return Err(Error::InvalidSpec(
            "sparseness sweeps use the entanglement entropy".into(),
        ));
    };
    if values.is_empty() || seeds.is_empty() {
        return Err(Error::InvalidArgument(
            "sweep needs values and realizations".into(),
        ));
    }
    let sorted = (1..values.len()).all(|i| values.value(i - 1) < values.value(i));
    if !sorted {
        return Err(Error::InvalidArgument(
            "sweep values must be strictly increasing".into(),
        ));
    }
    let jobs: Vec<TrajectoryJob> = (0..values.len())
        .map(|i| job_for(base, values, i))
        .collect::<Result<_>>()?;
    let pairs: Vec<(usize, u64)> = (0..jobs.len())
        .flat_map(|i| seeds.iter().map(move |&s| (i, s)))
        .collect();
    let rows: Vec<(Vec<f64>, Option<Vec<f64>>)> = pairs
        .par_iter()
        .map(|&(i, s)| jobs[i].run_realization::<T>(s))
        .collect::<Result<_>>()?;
    let mut rows = rows.into_iter();
    let records: Vec<TrajectoryRecord> = jobs
        .iter()
        .map(|job| job.assemble(seeds, rows.by_ref().take(seeds.len()).collect()))
        .collect::<Result<_>>()?;

    let (a, b) = (bipartition.kept_dim(), bipartition.traced_dim());
    let target = page_exact(a.min(b), a.max(b))?;
    let verdicts: Vec<SweepVerdict> = records
        .iter()
        .enumerate()
        .map(|(i, rec)| {
            let (m, se) = rec.window_average(settings.window[0], settings.window[1], false)?;
            let tolerance = settings.se_multiple * se + settings.absolute;
            Ok(SweepVerdict {
                value: values.value(i),
                window_mean: m,
                window_se: se,
                target,
                tolerance,
                saturates: (m - target).abs() <= tolerance,
            })
        })
        .collect::<Result<_>>()?;

    let critical = verdicts.iter().rposition(|v| !v.saturates);
    let monotonicity_violations = (0..verdicts.len().saturating_sub(1))
        .filter(|&i| verdicts[i].saturates && !verdicts[i + 1].saturates)
        .collect();
    let label = match &base.source {
        HamiltonianSource::Model(m) => format!("{}_n{}", m.variant.label(), m.n),
        HamiltonianSource::Rmt { .. } => unreachable!("checked in job_for"),
    };
    Ok((
        SweepResult {
            parameter: values.name().into(),
            label,
            target,
            settings,
            critical_value: critical.map(|i| verdicts[i].value),
            bracket: critical.map(|i| (verdicts[i].value, verdicts.get(i + 1).map(|v| v.value))),
            verdicts,
            monotonicity_violations,
        },
        records,
    ))
}
