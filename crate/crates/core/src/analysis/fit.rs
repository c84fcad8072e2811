//! Least-squares fits to ensemble-mean trajectories with bootstrap uncertainties.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observables::TrajectoryRecord;
use crate::rng::rng_from_seed;

pub const DEFAULT_BOOTSTRAP_RESAMPLES: usize = 200;
pub const MIN_FIT_POINTS: usize = 5;
/// Lower edge of the default linear-growth window.
pub const LINEAR_WINDOW_START: f64 = 0.5;
/// The default window ends where the mean first reaches this fraction of the saturation target.
pub const LINEAR_WINDOW_FRACTION: f64 = 0.9;
pub const DECAY_SIGNIFICANCE: f64 = 2.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitParameter {
    pub name: String,
    pub value: f64,
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub method: String,
    pub parameters: Vec<FitParameter>,
    pub window: [f64; 2],
    pub points: usize,
    pub residual_norm: f64,
    pub resamples: usize,
}

impl FitResult {
    pub fn parameter(&self, name: &str) -> Option<&FitParameter> {
        self.parameters.iter().find(|p| p.name == name)
    }

    /// `(value, std_error)` of a named parameter; panics if absent.
    pub fn get(&self, name: &str) -> (f64, f64) {
        let p = self
            .parameter(name)
            .unwrap_or_else(|| panic!("no fit parameter {name}"));
        (p.value, p.std_error)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitOptions {
    pub resamples: usize,
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            resamples: DEFAULT_BOOTSTRAP_RESAMPLES,
            seed: 0,
        }
    }
}

fn window_indices(times: &[f64], lo: f64, hi: f64) -> Result<Vec<usize>> {
    if !(lo < hi) {
        return Err(Error::FitDomain(format!("empty fit window [{lo}, {hi}]")));
    }
    let idx: Vec<usize> = (0..times.len())
        .filter(|&j| times[j] >= lo && times[j] <= hi)
        .collect();
    if idx.len() < MIN_FIT_POINTS {
        return Err(Error::FitDomain(format!(
            "fit window [{lo}, {hi}] holds {} grid points, need {MIN_FIT_POINTS}",
            idx.len()
        )));
    }
    Ok(idx)
}

/// `[0.5, t*]` with `t*` the first time the mean reaches 90% of `target`
/// (the last grid time if it never does).
pub fn default_linear_window(record: &TrajectoryRecord, target: f64) -> [f64; 2] {
    let t_star = record
        .times
        .iter()
        .zip(&record.mean)
        .find(|(&t, &m)| t >= LINEAR_WINDOW_START && m >= LINEAR_WINDOW_FRACTION * target)
        .map(|(&t, _)| t)
        .unwrap_or(*record.times.last().unwrap_or(&LINEAR_WINDOW_START));
    [LINEAR_WINDOW_START, t_star]
}

/// Ordinary least squares `y = intercept + slope * x`; returns `(intercept, slope, residual norm)`.
pub fn linear_least_squares(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    let n = x.len() as f64;
    if x.len() < 2 || x.len() != y.len() {
        return Err(Error::FitDomain("need at least two paired points".into()));
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::FitDomain("degenerate abscissae".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let res = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok((intercept, slope, res))
}

fn bootstrap<F>(record: &TrajectoryRecord, opts: &FitOptions, mut fit: F) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let r = record.realizations();
    let mut rng = rng_from_seed(opts.seed);
    let mut draws = Vec::with_capacity(opts.resamples);
    let mut failures = 0usize;
    for _ in 0..opts.resamples {
        let rows: Vec<usize> = (0..r).map(|_| rng.random_range(0..r)).collect();
        let mean: Vec<f64> = (0..record.times.len())
            .map(|j| {
                rows.iter()
                    .map(|&k| record.per_realization[k][j])
                    .sum::<f64>()
                    / r as f64
            })
            .collect();
        match fit(&mean) {
            Ok(p) => draws.push(p),
            Err(Error::FitDomain(_)) => failures += 1,
            Err(e) => return Err(e),
        }
    }
    if failures * 2 > opts.resamples {
        return Err(Error::FitDomain(format!(
            "{failures} of {} bootstrap resamples left the fit domain",
            opts.resamples
        )));
    }
    Ok(draws)
}

fn spread(draws: &[Vec<f64>], k: usize) -> f64 {
    if draws.len() < 2 {
        return 0.0;
    }
    let xs: Vec<f64> = draws.iter().map(|d| d[k]).collect();
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Linear fit of the ensemble mean on `window`; slope and intercept errors from a bootstrap over realizations.
pub fn fit_linear_slope(
    record: &TrajectoryRecord,
    window: [f64; 2],
    opts: &FitOptions,
) -> Result<FitResult> {
    let idx = window_indices(&record.times, window[0], window[1])?;
    let x: Vec<f64> = idx.iter().map(|&j| record.times[j]).collect();
    let pick = |m: &[f64]| idx.iter().map(|&j| m[j]).collect::<Vec<_>>();
    let (intercept, slope, res) = linear_least_squares(&x, &pick(&record.mean))?;
    let draws = bootstrap(record, opts, |m| {
        let (i, s, _) = linear_least_squares(&x, &pick(m))?;
        Ok(vec![s, i])
    })?;
    Ok(FitResult {
        method: "linear_least_squares_bootstrap".into(),
        parameters: vec![
            FitParameter {
                name: "slope".into(),
                value: slope,
                std_error: spread(&draws, 0),
            },
            FitParameter {
                name: "intercept".into(),
                value: intercept,
                std_error: spread(&draws, 1),
            },
        ],
        window,
        points: idx.len(),
        residual_norm: res,
        resamples: opts.resamples,
    })
}

/// Nonlinear least squares for `y = a exp(-b t)` (Levenberg–Marquardt from a log-linear start).
pub fn exp_least_squares(t: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    if y.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::FitDomain(
            "exponential fit needs positive data in the window".into(),
        ));
    }
    let ln_y: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let (ln_a, neg_b, _) = linear_least_squares(t, &ln_y)?;
    let (mut a, mut b) = (ln_a.exp(), -neg_b);
    let cost = |a: f64, b: f64| {
        t.iter()
            .zip(y)
            .map(|(&ti, &yi)| (yi - a * (-b * ti).exp()).powi(2))
            .sum::<f64>()
    };
    let mut c = cost(a, b);
    let mut lambda = 1e-3;
    for _ in 0..200 {
        // Normal equations J^T J and J^T r for r = y - model.
        let (mut jaa, mut jab, mut jbb, mut ga, mut gb) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&ti, &yi) in t.iter().zip(y) {
            let e = (-b * ti).exp();
            let r = yi - a * e;
            let da = e;
            let db = -a * ti * e;
            jaa += da * da;
            jab += da * db;
            jbb += db * db;
            ga += da * r;
            gb += db * r;
        }
        let mut improved = false;
        for _ in 0..30 {
            let (m11, m22) = (jaa * (1.0 + lambda), jbb * (1.0 + lambda));
            let det = m11 * m22 - jab * jab;
            if det == 0.0 || !det.is_finite() {
                lambda *= 10.0;
                continue;
            }
            let step_a = (m22 * ga - jab * gb) / det;
            let step_b = (m11 * gb - jab * ga) / det;
            let nc = cost(a + step_a, b + step_b);
            if nc.is_finite() && nc <= c {
                let rel = (c - nc) / c.max(f64::MIN_POSITIVE);
                a += step_a;
                b += step_b;
                c = nc;
                lambda = (lambda / 10.0).max(1e-12);
                improved = rel > 1e-15;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::FitDomain("exponential fit diverged".into()));
    }
    Ok((a, b, c.sqrt()))
}

/// `a exp(-b t)` fit of the real ensemble mean on `window`; requires a positive decay rate
/// at least `DECAY_SIGNIFICANCE` bootstrap standard errors away from zero, and a fitted drop
/// across the window larger than the rms residual.
pub fn fit_exp_decay(
    record: &TrajectoryRecord,
    window: [f64; 2],
    opts: &FitOptions,
) -> Result<FitResult> {
    let idx = window_indices(&record.times, window[0], window[1])?;
    let t: Vec<f64> = idx.iter().map(|&j| record.times[j]).collect();
    let pick = |m: &[f64]| idx.iter().map(|&j| m[j]).collect::<Vec<_>>();
    let (a, b, res) = exp_least_squares(&t, &pick(&record.mean))?;
    let draws = bootstrap(record, opts, |m| {
        let (a, b, _) = exp_least_squares(&t, &pick(m))?;
        Ok(vec![a, b])
    })?;
    let (sa, sb) = (spread(&draws, 0), spread(&draws, 1));
    if !(b > 0.0) {
        return Err(Error::FitDomain(format!(
            "no decay in window [{}, {}]: b = {b}",
            window[0], window[1]
        )));
    }
    if !sb.is_finite() || b < DECAY_SIGNIFICANCE * sb {
        return Err(Error::FitDomain(format!(
            "decay rate {b} not resolved against its uncertainty {sb}"
        )));
    }
    let (t0, t1) = (t[0], t[t.len() - 1]);
    let drop = a * ((-b * t0).exp() - (-b * t1).exp());
    let rms = res / (t.len() as f64).sqrt();
    if drop <= rms {
        return Err(Error::FitDomain(format!(
            "fitted decay {drop} across the window is below the residual scatter {rms}"
        )));
    }
    Ok(FitResult {
        method: "exp_decay_least_squares_bootstrap".into(),
        parameters: vec![
            FitParameter {
                name: "a".into(),
                value: a,
                std_error: sa,
            },
            FitParameter {
                name: "b".into(),
                value: b,
                std_error: sb,
            },
        ],
        window,
        points: idx.len(),
        residual_norm: res,
        resamples: opts.resamples,
    })
}
