//! Plot-ready bundles: aligned curve columns, reference lines and fit overlays.

use std::path::Path;

use plotters::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::FitResult;
use crate::error::{Error, Result};
use crate::observables::TrajectoryRecord;

use super::output::OutputDir;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceLine {
    pub name: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitOverlay {
    pub label: String,
    pub fit: FitResult,
    pub t: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub curves: Vec<String>,
    pub references: Vec<ReferenceLine>,
    pub overlays: Vec<FitOverlay>,
}

fn overlay(label: &str, fit: &FitResult, times: &[f64]) -> FitOverlay {
    let t: Vec<f64> = times
        .iter()
        .copied()
        .filter(|&t| t >= fit.window[0] && t <= fit.window[1])
        .collect();
    let y = match fit.method.as_str() {
        m if m.starts_with("exp") => {
            let (a, b) = (fit.get("a").0, fit.get("b").0);
            t.iter().map(|&t| a * (-b * t).exp()).collect()
        }
        _ => {
            let (s, i) = (fit.get("slope").0, fit.get("intercept").0);
            t.iter().map(|&t| i + s * t).collect()
        }
    };
    FitOverlay {
        label: label.into(),
        fit: fit.clone(),
        t,
        y,
    }
}

/// Writes `report.csv` (one `mean`/`std_error` column pair per curve), `report.json`
/// (references and fit overlays) and, if asked, `report.svg`.
pub fn emit_report(
    out: &mut OutputDir,
    records: &[(String, TrajectoryRecord)],
    references: &[ReferenceLine],
    fits: &[(String, FitResult)],
    svg: bool,
) -> Result<ReportBundle> {
    let Some((_, first)) = records.first() else {
        return Err(Error::InvalidArgument(
            "report needs at least one record".into(),
        ));
    };
    let times = &first.times;
    if let Some((label, _)) = records.iter().find(|(_, r)| &r.times != times) {
        return Err(Error::Dimension(format!(
            "curve {label} is on a different time grid"
        )));
    }
    let mut header = vec!["t".to_string()];
    for (label, _) in records {
        header.push(format!("{label}_mean"));
        header.push(format!("{label}_std_error"));
    }
    let rows: Vec<Vec<f64>> = (0..times.len())
        .map(|j| {
            let mut row = vec![times[j]];
            for (_, r) in records {
                row.push(r.mean[j]);
                row.push(r.std_error[j]);
            }
            row
        })
        .collect();
    out.table("report.csv", &header, &rows)?;
    let bundle = ReportBundle {
        curves: records.iter().map(|(l, _)| l.clone()).collect(),
        references: references.to_vec(),
        overlays: fits.iter().map(|(l, f)| overlay(l, f, times)).collect(),
    };
    out.json("report.json", &bundle)?;
    if svg {
        render_svg(&out.path("report.svg"), records, &bundle)?;
        out.mark("report.svg");
    }
    Ok(bundle)
}

fn render_svg(
    path: &Path,
    records: &[(String, TrajectoryRecord)],
    bundle: &ReportBundle,
) -> Result<()> {
    let plot_err = |e: String| Error::Io(std::io::Error::other(e));
    let times = &records[0].1.times;
    let (t0, t1) = (times[0], *times.last().unwrap_or(&1.0));
    let ys = records
        .iter()
        .flat_map(|(_, r)| r.mean.iter().copied())
        .chain(bundle.references.iter().map(|r| r.value))
        .filter(|y| y.is_finite());
    let (lo, hi) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| {
        (a.min(y), b.max(y))
    });
    let pad = 0.05 * (hi - lo).max(1e-12);
    let root = SVGBackend::new(path, (800, 500)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| plot_err(e.to_string()))?;
    let mut chart = ChartBuilder::on(&root)
        .margin(20)
        .build_cartesian_2d(t0..t1.max(t0 + 1e-12), (lo - pad)..(hi + pad))
        .map_err(|e| plot_err(e.to_string()))?;
    for (k, (_, r)) in records.iter().enumerate() {
        let color = Palette99::pick(k);
        chart
            .draw_series(LineSeries::new(
                r.times.iter().copied().zip(r.mean.iter().copied()),
                color.stroke_width(2),
            ))
            .map_err(|e| plot_err(e.to_string()))?;
    }
    for reference in &bundle.references {
        chart
            .draw_series(LineSeries::new(
                [(t0, reference.value), (t1, reference.value)],
                BLACK.stroke_width(1),
            ))
            .map_err(|e| plot_err(e.to_string()))?;
    }
    for o in &bundle.overlays {
        chart
            .draw_series(LineSeries::new(
                o.t.iter().copied().zip(o.y.iter().copied()),
                RED.stroke_width(1),
            ))
            .map_err(|e| plot_err(e.to_string()))?;
    }
    root.present().map_err(|e| plot_err(e.to_string()))?;
    Ok(())
}
