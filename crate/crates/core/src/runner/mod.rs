//! Configuration-driven pipelines: seeding, parallel execution and output files.
//!
//! Every command writes its files into one output directory together with
//! `<command>.manifest.json` (config hash, seeds, software version, file list,
//! completion status). Wall-clock time goes to `<command>.timing.json` so that
//! everything else is byte-identical across reruns with the same seed.

pub mod config;
pub mod output;
pub mod report;

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    default_linear_window, eigenstate_ee_survey, fit_exp_decay, fit_linear_slope,
    mp_entropy_numeric, mp_entropy_via_i, page_bound_asymptotic, page_exact, sparseness_sweep,
    FitOptions, FitResult, MpParams,
};
use crate::error::{Error, Result};
use crate::models::{hamiltonian_stats, ParitySector};
use crate::observables::{
    mean_and_se, HamiltonianSource, Observable, Realization, TrajectoryJob, TrajectoryRecord,
};
use crate::rmt::{empirical_sigma2, EnsembleSpec};
use crate::scalar::Real;

pub use config::{
    BipartitionSpec, BoundsConfig, CurveConfig, EvolutionConfig, FitConfig, FitKind, OutputConfig,
    Pipeline, Precision, RmtConfig, RunConfig, SurveyConfig, SweepConfig, SweepParameter, TimeGrid,
    SCHEMA_VERSION,
};
pub use output::{
    fmt17, read_csv, read_json, write_trajectory_csv, CsvTable, Manifest, OutputDir, RunStatus,
};
pub use report::{emit_report, FitOverlay, ReferenceLine, ReportBundle};

/// Largest dense random-matrix block, in qubits.
pub const DENSE_QUBIT_CAP: usize = 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Build,
    EvolveEe,
    Autocorr,
    RmtBaseline,
    Bounds,
    Survey,
    Sweep,
    Fit,
    Report,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Build => "build",
            Command::EvolveEe => "evolve-ee",
            Command::Autocorr => "autocorr",
            Command::RmtBaseline => "rmt-baseline",
            Command::Bounds => "bounds",
            Command::Survey => "survey",
            Command::Sweep => "sweep",
            Command::Fit => "fit",
            Command::Report => "report",
        }
    }

    pub fn manifest_file(self) -> String {
        format!("{}.manifest.json", self.name())
    }

    pub fn timing_file(self) -> String {
        format!("{}.timing.json", self.name())
    }

    fn accepts(self, p: Pipeline) -> bool {
        match self {
            Command::Build | Command::Bounds => true,
            Command::EvolveEe => p == Pipeline::Ee,
            Command::Autocorr => p == Pipeline::Autocorr,
            Command::RmtBaseline | Command::Fit | Command::Report => {
                matches!(p, Pipeline::Ee | Pipeline::Autocorr)
            }
            Command::Survey => p == Pipeline::Survey,
            Command::Sweep => p == Pipeline::Sweep,
        }
    }

    /// The command that runs a configuration's own pipeline.
    pub fn for_pipeline(p: Pipeline) -> Self {
        match p {
            Pipeline::Ee => Command::EvolveEe,
            Pipeline::Autocorr => Command::Autocorr,
            Pipeline::Survey => Command::Survey,
            Pipeline::Sweep => Command::Sweep,
            Pipeline::Bounds => Command::Bounds,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub wall_seconds: f64,
}

/// Runs `command` for `cfg`, writing into `out_dir`. On failure the files written so far
/// stay on disk and the manifest carries `status = "failed"`.
pub fn execute(command: Command, cfg: &RunConfig, out_dir: &Path) -> Result<Manifest> {
    cfg.validate()?;
    if !command.accepts(cfg.pipeline) {
        return Err(Error::Config(format!(
            "command {} does not apply to a {:?} pipeline",
            command.name(),
            cfg.pipeline
        )));
    }
    let mut out = OutputDir::create(out_dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::Resource(format!("cannot start {} worker threads: {e}", cfg.jobs)))?;
    let start = Instant::now();
    let result = pool.install(|| match cfg.precision {
        Precision::F64 => dispatch::<f64>(command, cfg, &mut out),
        Precision::F32 => dispatch::<f32>(command, cfg, &mut out),
    });
    let wall_seconds = start.elapsed().as_secs_f64();
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        name: cfg.name.clone(),
        command: command.name().into(),
        software: concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION")).into(),
        config_hash: cfg.hash(),
        master_seed: cfg.master_seed,
        seeds: cfg.all_seeds(),
        outputs: out.written().to_vec(),
        status: if result.is_ok() {
            RunStatus::Complete
        } else {
            RunStatus::Failed
        },
        error: result.as_ref().err().map(|e| e.to_string()),
        config: serde_json::to_value(cfg).expect("config serializes"),
    };
    output::write_json(&out.path(&command.manifest_file()), &manifest)?;
    output::write_json(&out.path(&command.timing_file()), &Timing { wall_seconds })?;
    result.map(|_| manifest)
}

fn dispatch<T: Real>(command: Command, cfg: &RunConfig, out: &mut OutputDir) -> Result<()> {
    match command {
        Command::Build => build::<T>(cfg, out),
        Command::EvolveEe | Command::Autocorr => {
            trajectories::<T>(cfg, &cfg.curves, out)?;
            Ok(())
        }
        Command::RmtBaseline => {
            trajectories::<T>(cfg, &rmt_curves(cfg), out)?;
            Ok(())
        }
        Command::Bounds => bounds(cfg, out),
        Command::Survey => survey::<T>(cfg, out),
        Command::Sweep => sweep::<T>(cfg, out),
        Command::Fit => fit_saved(cfg, out),
        Command::Report => report_saved(cfg, out),
    }
}

/// The trajectory job of one curve under the config's evolution settings.
pub fn curve_job(
    cfg: &RunConfig,
    curve: &CurveConfig,
    observable: Observable,
) -> Result<TrajectoryJob> {
    let n = curve.source.n_qubits();
    if n > cfg.evolution.max_qubits {
        return Err(Error::Resource(format!(
            "curve {} needs {n} qubits, above max_qubits = {}",
            curve.label, cfg.evolution.max_qubits
        )));
    }
    if let HamiltonianSource::Rmt { .. } = curve.source {
        let sector = curve.sector.unwrap_or(cfg.evolution.sector);
        let block = if sector == ParitySector::Full {
            n
        } else {
            n - 1
        };
        if block > DENSE_QUBIT_CAP {
            return Err(Error::Resource(format!(
                "curve {} needs a dense 2^{block} random matrix, above 2^{DENSE_QUBIT_CAP}",
                curve.label
            )));
        }
    }
    let times = cfg.times.times()?;
    let job = match observable {
        Observable::Ee => {
            let bp = curve.bipartition.clone().unwrap_or_default().resolve(n)?;
            TrajectoryJob::ee(curve.source.clone(), bp, times)
        }
        Observable::Autocorr => {
            let probe = curve.probe.unwrap_or_else(|| curve.source.default_probe());
            TrajectoryJob::autocorr(curve.source.clone(), probe, times)
        }
    };
    let mut job = job
        .with_sector(curve.sector.unwrap_or(cfg.evolution.sector))
        .with_initial_state(curve.initial_state.unwrap_or(cfg.evolution.initial_state))
        .with_method(cfg.evolution.method);
    job.krylov = cfg.evolution.krylov;
    job.validate()?;
    Ok(job)
}

fn observable_of(p: Pipeline) -> Observable {
    match p {
        Pipeline::Autocorr => Observable::Autocorr,
        _ => Observable::Ee,
    }
}

fn rmt_curves(cfg: &RunConfig) -> Vec<CurveConfig> {
    cfg.curves
        .iter()
        .filter_map(|c| match &c.source {
            HamiltonianSource::Model(m) => Some((c, m)),
            HamiltonianSource::Rmt { .. } => None,
        })
        .flat_map(|(c, m)| {
            cfg.rmt.ensembles.iter().map(move |&e| CurveConfig {
                label: format!("{}_{}", c.label, e.label().to_lowercase()),
                source: HamiltonianSource::Rmt {
                    ensemble: e,
                    matched: m.clone(),
                },
                ..c.clone()
            })
        })
        .collect()
}

/// Runs every curve, writes `<label>.csv` and `<label>.record.json`, and fits if configured.
pub fn trajectories<T: Real>(
    cfg: &RunConfig,
    curves: &[CurveConfig],
    out: &mut OutputDir,
) -> Result<Vec<(String, TrajectoryRecord)>> {
    let hash = cfg.hash();
    let jobs = curves
        .iter()
        .map(|c| curve_job(cfg, c, observable_of(cfg.pipeline)))
        .collect::<Result<Vec<_>>>()?;
    let mut records = Vec::with_capacity(curves.len());
    for (c, job) in curves.iter().zip(&jobs) {
        let mut rec = job.run::<T>(&cfg.curve_seeds(c))?;
        rec.meta.spec_hash = hash.clone();
        out.trajectory(&c.label, &rec)?;
        records.push((c.label.clone(), rec));
    }
    if let Some(f) = &cfg.fit {
        let entries = fit_records(f, &records);
        out.json("fits.json", &entries)?;
    }
    Ok(records)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitEntry {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<FitResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Saturation target used for the default linear window.
pub fn saturation_target(rec: &TrajectoryRecord) -> Result<f64> {
    match &rec.meta.bipartition {
        Some(bp) => {
            let (a, b) = (bp.kept_dim(), bp.traced_dim());
            page_exact(a.min(b), a.max(b))
        }
        None => Ok(rec.mean.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
    }
}

pub fn fit_one(f: &FitConfig, rec: &TrajectoryRecord) -> Result<FitResult> {
    let opts = FitOptions {
        resamples: f.resamples,
        seed: f.seed,
    };
    match f.kind {
        FitKind::Linear => {
            let window = match f.window {
                Some(w) => w,
                None => default_linear_window(rec, saturation_target(rec)?),
            };
            fit_linear_slope(rec, window, &opts)
        }
        FitKind::Exp => {
            let window = f
                .window
                .ok_or_else(|| Error::Config("exponential fits need a window".into()))?;
            fit_exp_decay(rec, window, &opts)
        }
    }
}

fn fit_records(f: &FitConfig, records: &[(String, TrajectoryRecord)]) -> Vec<FitEntry> {
    records
        .iter()
        .map(|(label, rec)| match fit_one(f, rec) {
            Ok(r) => FitEntry {
                label: label.clone(),
                result: Some(r),
                error: None,
            },
            Err(e) => FitEntry {
                label: label.clone(),
                result: None,
                error: Some(e.to_string()),
            },
        })
        .collect()
}

fn load_records(cfg: &RunConfig, out: &OutputDir) -> Result<Vec<(String, TrajectoryRecord)>> {
    cfg.curves
        .iter()
        .map(|c| {
            let path = out.path(&format!("{}.record.json", c.label));
            if !path.exists() {
                return Err(Error::Config(format!(
                    "missing {}; run the pipeline first",
                    path.display()
                )));
            }
            Ok((c.label.clone(), read_json(&path)?))
        })
        .collect()
}

fn fit_saved(cfg: &RunConfig, out: &mut OutputDir) -> Result<()> {
    let f = cfg
        .fit
        .as_ref()
        .ok_or_else(|| Error::Config("the fit command needs a [fit] section".into()))?;
    let records = load_records(cfg, out)?;
    let mut first_err = None;
    let entries: Vec<FitEntry> = records
        .iter()
        .map(|(label, rec)| match fit_one(f, rec) {
            Ok(r) => FitEntry {
                label: label.clone(),
                result: Some(r),
                error: None,
            },
            Err(e) => {
                let msg = e.to_string();
                first_err.get_or_insert(e);
                FitEntry {
                    label: label.clone(),
                    result: None,
                    error: Some(msg),
                }
            }
        })
        .collect();
    out.json("fits.json", &entries)?;
    first_err.map_or(Ok(()), Err)
}

fn report_saved(cfg: &RunConfig, out: &mut OutputDir) -> Result<()> {
    let records = load_records(cfg, out)?;
    let mut references: Vec<ReferenceLine> = Vec::new();
    for (_, rec) in &records {
        if let Some(bp) = &rec.meta.bipartition {
            let (a, b) = (bp.kept_dim(), bp.traced_dim());
            let (n, m) = (a.min(b), a.max(b));
            for (name, value) in [
                (format!("page_exact_{n}x{m}"), page_exact(n, m)?),
                (
                    format!("page_asymptotic_{n}x{m}"),
                    page_bound_asymptotic(n, m)?,
                ),
            ] {
                if !references.iter().any(|r| r.name == name) {
                    references.push(ReferenceLine { name, value });
                }
            }
        }
    }
    let fits_path = out.path("fits.json");
    let fits: Vec<(String, FitResult)> = if fits_path.exists() {
        read_json::<Vec<FitEntry>>(&fits_path)?
            .into_iter()
            .filter_map(|e| e.result.map(|r| (e.label, r)))
            .collect()
    } else {
        Vec::new()
    };
    emit_report(out, &records, &references, &fits, cfg.output.svg)?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuildSummary {
    pub label: String,
    pub n_qubits: usize,
    pub sigma2_target: f64,
    pub trace_h2_over_dim_mean: f64,
    pub trace_h2_over_dim_se: f64,
    /// Mean number of Pauli terms (models only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub term_count_mean: Option<f64>,
    pub realizations: usize,
}

fn build<T: Real>(cfg: &RunConfig, out: &mut OutputDir) -> Result<()> {
    if cfg.curves.is_empty() {
        return Err(Error::Config("build needs at least one curve".into()));
    }
    let mut rows = Vec::new();
    for c in &cfg.curves {
        let seeds = cfg.curve_seeds(c);
        let stats: Vec<(f64, Option<usize>)> = seeds
            .par_iter()
            .map(|&s| match c.source.realize::<T>(s, ParitySector::Full)? {
                Realization::Sum(h) => {
                    let st = hamiltonian_stats(&h);
                    Ok((st.trace_h2_over_dim, Some(st.term_count)))
                }
                Realization::Dense(m) => Ok((empirical_sigma2(&m), None)),
                Realization::Blocks { .. } => {
                    Err(Error::Numeric("unexpected block realization".into()))
                }
            })
            .collect::<Result<_>>()?;
        let (m, se) = mean_and_se(&stats.iter().map(|s| s.0).collect::<Vec<_>>());
        let terms = stats
            .iter()
            .map(|s| s.1.map(|k| k as f64))
            .collect::<Option<Vec<f64>>>();
        let target = match &c.source {
            HamiltonianSource::Model(m) => m.sigma2_target(),
            HamiltonianSource::Rmt { matched, .. } => matched.sigma2_target(),
        };
        rows.push(BuildSummary {
            label: c.label.clone(),
            n_qubits: c.source.n_qubits(),
            sigma2_target: target,
            trace_h2_over_dim_mean: m,
            trace_h2_over_dim_se: se,
            term_count_mean: terms.map(|t| t.iter().sum::<f64>() / t.len() as f64),
            realizations: seeds.len(),
        });
    }
    out.json("build.json", &rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsRow {
    pub n: usize,
    pub m: usize,
    pub q: f64,
    pub page_asymptotic: f64,
    pub page_exact: f64,
    pub mp_entropy_numeric: f64,
    pub mp_entropy_via_i: f64,
    pub identity_defect: f64,
}

pub fn bounds_table(b: &BoundsConfig) -> Result<Vec<BoundsRow>> {
    let mut rows = Vec::new();
    for &n in &b.n {
        for &q in &b.q {
            let p = MpParams::new(n, q * n)?;
            let numeric = mp_entropy_numeric(&p)?;
            let asym = page_bound_asymptotic(n, q * n)?;
            rows.push(BoundsRow {
                n,
                m: q * n,
                q: p.q,
                page_asymptotic: asym,
                page_exact: page_exact(n, q * n)?,
                mp_entropy_numeric: numeric,
                mp_entropy_via_i: mp_entropy_via_i(&p)?,
                identity_defect: (numeric - asym).abs(),
            });
        }
    }
    Ok(rows)
}

fn bounds(cfg: &RunConfig, out: &mut OutputDir) -> Result<()> {
    let rows = bounds_table(&cfg.bounds.clone().unwrap_or_default())?;
    let header: Vec<String> = [
        "n",
        "m",
        "q",
        "page_asymptotic",
        "page_exact",
        "mp_entropy_numeric",
        "mp_entropy_via_i",
        "identity_defect",
    ]
    .map(String::from)
    .to_vec();
    let table: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            vec![
                r.n as f64,
                r.m as f64,
                r.q,
                r.page_asymptotic,
                r.page_exact,
                r.mp_entropy_numeric,
                r.mp_entropy_via_i,
                r.identity_defect,
            ]
        })
        .collect();
    out.table("bounds.csv", &header, &table)?;
    out.json("bounds.json", &rows)
}

fn survey<T: Real>(cfg: &RunConfig, out: &mut OutputDir) -> Result<()> {
    let s = cfg
        .survey
        .as_ref()
        .ok_or_else(|| Error::Config("missing [survey] section".into()))?;
    let seeds = cfg.seeds();
    let mut results = Vec::new();
    for &e in &s.ensembles {
        let r = eigenstate_ee_survey::<T>(&EnsembleSpec::new(e, s.dim), s.fraction, &seeds)?;
        let header: Vec<String> = ["index", "mean", "std_error"].map(String::from).to_vec();
        let rows: Vec<Vec<f64>> = (0..r.dim)
            .map(|k| vec![k as f64, r.per_index_mean[k], r.per_index_se[k]])
            .collect();
        out.table(
            &format!("survey_{}.csv", e.label().to_lowercase()),
            &header,
            &rows,
        )?;
        results.push(r);
    }
    out.json("survey.json", &results)
}

fn sweep<T: Real>(cfg: &RunConfig, out: &mut OutputDir) -> Result<()> {
    let s = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("missing [sweep] section".into()))?;
    let hash = cfg.hash();
    for c in &cfg.curves {
        let seeds = cfg.curve_seeds(c);
        let base = curve_job(cfg, c, Observable::Ee)?;
        let (result, records) =
            sparseness_sweep::<T>(&base, &s.sweep_values()?, &seeds, s.tolerance)?;
        for (v, mut rec) in result.verdicts.iter().zip(records) {
            rec.meta.spec_hash = hash.clone();
            out.trajectory(
                &format!("{}_{}{}", c.label, result.parameter, v.value),
                &rec,
            )?;
        }
        out.json(&format!("sweep_{}.json", c.label), &result)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> RunConfig {
        RunConfig::from_toml_str(text).unwrap()
    }

    const EE: &str = r#"
schema_version = 1
name = "t"
pipeline = "ee"
realizations = 3
master_seed = 9
jobs = 1
[times]
kind = "uniform"
t_max = 4.0
points = 41
[[curves]]
label = "syk8"
source = { kind = "model", variant = "syk", n = 8 }
[[curves]]
label = "spin4"
source = { kind = "model", variant = "spin_syk", n = 4 }
[fit]
kind = "linear"
[output]
svg = true
"#;

    #[test]
    fn ee_pipeline_is_byte_deterministic() {
        let c = cfg(EE);
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let m = execute(Command::EvolveEe, &c, a.path()).unwrap();
        execute(Command::EvolveEe, &c, b.path()).unwrap();
        assert_eq!(m.status, RunStatus::Complete);
        assert!(
            m.outputs.contains(&"syk8.csv".to_string())
                && m.outputs.contains(&"fits.json".to_string())
        );
        for f in m.outputs.iter().chain([&Command::EvolveEe.manifest_file()]) {
            assert_eq!(
                std::fs::read(a.path().join(f)).unwrap(),
                std::fs::read(b.path().join(f)).unwrap(),
                "{f}"
            );
        }
        let rec: TrajectoryRecord = read_json(&a.path().join("syk8.record.json")).unwrap();
        let table = read_csv(&a.path().join("syk8.csv")).unwrap();
        assert_eq!(table.column("mean").unwrap(), rec.mean);
        assert_eq!(table.column("std_error").unwrap(), rec.std_error);
        assert_eq!(rec.meta.spec_hash, c.hash());

        execute(Command::Report, &c, a.path()).unwrap();
        let bundle: ReportBundle = read_json(&a.path().join("report.json")).unwrap();
        assert!(bundle.references.iter().any(|r| r.name == "page_exact_4x4"));
        assert_eq!(bundle.overlays.len(), 2);
        assert!(a.path().join("report.svg").exists());
        execute(Command::Fit, &c, a.path()).unwrap();
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let mut c = cfg(EE);
        c.realizations = 6;
        c.fit = None;
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        execute(Command::EvolveEe, &c, a.path()).unwrap();
        c.jobs = 4;
        execute(Command::EvolveEe, &c, b.path()).unwrap();
        let ra: TrajectoryRecord = read_json(&a.path().join("syk8.record.json")).unwrap();
        let rb: TrajectoryRecord = read_json(&b.path().join("syk8.record.json")).unwrap();
        assert_eq!(ra.mean, rb.mean);
    }

    #[test]
    fn command_must_match_pipeline() {
        let c = cfg(EE);
        let d = tempfile::tempdir().unwrap();
        assert!(matches!(
            execute(Command::Survey, &c, d.path()),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            execute(Command::Fit, &c, &d.path().join("fresh")),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn resource_cap_flushes_failed_manifest() {
        let mut c = cfg(EE);
        c.evolution.max_qubits = 3;
        let d = tempfile::tempdir().unwrap();
        let err = execute(Command::EvolveEe, &c, d.path()).unwrap_err();
        assert_eq!(err.exit_code(), 4);
        let m: Manifest = read_json(&d.path().join(Command::EvolveEe.manifest_file())).unwrap();
        assert_eq!(m.status, RunStatus::Failed);
        assert!(m.error.unwrap().contains("max_qubits"));
    }

    #[test]
    fn empty_report_writes_nothing() {
        let d = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(d.path()).unwrap();
        assert!(emit_report(&mut out, &[], &[], &[], false).is_err());
        assert_eq!(std::fs::read_dir(d.path()).unwrap().count(), 0);
    }

    #[test]
    fn rmt_baseline_build_bounds() {
        let mut c = cfg(EE);
        c.fit = None;
        let d = tempfile::tempdir().unwrap();
        let m = execute(Command::RmtBaseline, &c, d.path()).unwrap();
        assert!(m.outputs.contains(&"syk8_goe.csv".to_string()));
        assert!(m.outputs.contains(&"spin4_gue.csv".to_string()));
        execute(Command::Build, &c, d.path()).unwrap();
        let rows: Vec<BuildSummary> = read_json(&d.path().join("build.json")).unwrap();
        assert_eq!(rows[0].term_count_mean, Some(70.0));
        execute(Command::Bounds, &c, d.path()).unwrap();
        let rows: Vec<BoundsRow> = read_json(&d.path().join("bounds.json")).unwrap();
        assert_eq!(rows.len(), 9);
        assert!(rows.iter().all(|r| r.identity_defect < 1e-6));
    }
}
