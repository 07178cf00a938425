//! CSV tables and overlay images for an experiment report.
//!
//! Floats are written in shortest round-trip form so every cell can be
//! re-derived bit-exactly from `per_sample_ratios.csv`. Undefined values are
//! empty cells.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cam::CamMethod;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::experiment::{
    CorrelationRow, ExperimentReport, ExplanationRow, SampleRatio, ScenarioOutcome,
};
use crate::focus::RatioRecord;
use crate::overlay::write_overlay;
use crate::splits::Splits;
use crate::stats::Metric;

pub const CLASSIFICATION_CSV: &str = "classification.csv";
pub const EXPLANATION_CSV: &str = "explanation.csv";
pub const CORRELATION_CSV: &str = "correlation.csv";
pub const RATIOS_CSV: &str = "per_sample_ratios.csv";
pub const OVERLAY_DIR: &str = "overlays";

/// Shortest round-trip form; exponent notation for very small or large
/// magnitudes.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| Error::Csv(e).context(path.display().to_string()))
}

fn finish(mut w: csv::Writer<fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

fn mean_of(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let defined: Vec<f64> = values.flatten().collect();
    if defined.is_empty() {
        None
    } else {
        Some(defined.iter().sum::<f64>() / defined.len() as f64)
    }
}

fn classification_rows(model: &str, rows: &[ScenarioOutcome], out: &mut Vec<Vec<String>>) {
    for s in rows {
        let mut line = vec![
            s.evaluation.to_string(),
            s.scenario.to_string(),
            model.to_string(),
            s.test_size.to_string(),
            num(s.metrics.tau),
        ];
        for m in Metric::ALL {
            let e = s.metrics.get(m);
            line.push(cell(e.value));
            line.push(cell(e.se));
        }
        out.push(line);
    }
    if let Some(first) = rows.first() {
        // Mean of the defined per-scenario values and of their SEs.
        let mut line = vec![
            first.evaluation.to_string(),
            "mean".into(),
            model.to_string(),
            String::new(),
            String::new(),
        ];
        for m in Metric::ALL {
            line.push(cell(mean_of(rows.iter().map(|s| s.metrics.get(m).value))));
            line.push(cell(mean_of(rows.iter().map(|s| s.metrics.get(m).se))));
        }
        out.push(line);
    }
}

pub fn write_classification(path: &Path, report: &ExperimentReport) -> Result<()> {
    let mut w = writer(path)?;
    let mut header: Vec<String> = ["evaluation", "scenario", "model", "n_test", "tau"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for m in Metric::ALL {
        header.push(m.name().into());
        header.push(format!("{}_se", m.name()));
    }
    w.write_record(&header)?;
    let mut rows = Vec::new();
    classification_rows(&report.model, &report.scenarios, &mut rows);
    classification_rows(&report.model, &report.external, &mut rows);
    for r in rows {
        w.write_record(&r)?;
    }
    finish(w, path)
}

pub fn write_explanation(path: &Path, rows: &[ExplanationRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "method",
        "anatomy",
        "n",
        "activation_mean",
        "activation_se",
        "structure_mean",
        "structure_se",
        "difference_mean",
        "difference_se",
        "t",
        "df",
        "p_value",
    ])?;
    for r in rows {
        w.write_record([
            r.method.to_string(),
            r.anatomy.clone(),
            r.n.to_string(),
            num(r.activation.mean),
            num(r.activation.se),
            num(r.structure.mean),
            num(r.structure.se),
            num(r.difference.mean),
            num(r.difference.se),
            cell(r.test.map(|t| t.statistic)),
            cell(r.test.map(|t| t.df)),
            cell(r.test.map(|t| t.p_value)),
        ])?;
    }
    finish(w, path)
}

pub fn write_correlation(path: &Path, rows: &[CorrelationRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "anatomy",
        "method",
        "n",
        "pearson_r",
        "pearson_p",
        "spearman_rho",
        "spearman_p",
    ])?;
    for r in rows {
        w.write_record([
            r.anatomy.clone(),
            r.method.map_or_else(|| "all".to_string(), |m| m.to_string()),
            r.n.to_string(),
            cell(r.pearson.map(|c| c.coefficient)),
            cell(r.pearson.map(|c| c.test.p_value)),
            cell(r.spearman.map(|c| c.coefficient)),
            cell(r.spearman.map(|c| c.test.p_value)),
        ])?;
    }
    finish(w, path)
}

#[derive(Debug, Serialize, Deserialize)]
struct RatioRow {
    scenario: usize,
    sample_id: String,
    label: u8,
    score: f64,
    target_class: usize,
    method: String,
    anatomy: String,
    activation_ratio: f64,
    structure_ratio: f64,
    difference: f64,
}

pub fn write_ratios(path: &Path, ratios: &[SampleRatio]) -> Result<()> {
    let mut w = writer(path)?;
    for r in ratios {
        w.serialize(RatioRow {
            scenario: r.scenario,
            sample_id: r.sample_id.clone(),
            label: u8::from(r.label),
            score: r.score,
            target_class: r.target_class,
            method: r.method.to_string(),
            anatomy: r.anatomy.clone(),
            activation_ratio: r.record.activation_ratio,
            structure_ratio: r.record.structure_ratio,
            difference: r.record.difference,
        })?;
    }
    finish(w, path)
}

/// Reads a per-sample ratio file written by [`write_ratios`].
pub fn read_ratios(path: &Path) -> Result<Vec<SampleRatio>> {
    let mut rd = csv::Reader::from_path(path)
        .map_err(|e| Error::Csv(e).context(path.display().to_string()))?;
    let mut out = Vec::new();
    for (line, row) in rd.deserialize::<RatioRow>().enumerate() {
        let ctx = || format!("{} record {}", path.display(), line + 1);
        let row = row.map_err(|e| Error::Csv(e).context(ctx()))?;
        let method: CamMethod = row.method.parse().map_err(|e: Error| e.context(ctx()))?;
        out.push(SampleRatio {
            scenario: row.scenario,
            sample_id: row.sample_id,
            label: row.label != 0,
            score: row.score,
            target_class: row.target_class,
            method,
            anatomy: row.anatomy,
            record: RatioRecord::new(row.activation_ratio, row.structure_ratio),
        });
    }
    Ok(out)
}

/// Writes `scenario,role,sample_id` rows for all six scenarios.
pub fn write_splits(path: &Path, ds: &Dataset, splits: &Splits) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["scenario", "role", "sample_id"])?;
    for s in &splits.scenarios {
        for (role, idx) in [("train", &s.train), ("val", &s.val), ("test", &s.test)] {
            for &i in idx {
                w.write_record([s.index.to_string(), role.into(), ds.records[i].id.clone()])?;
            }
        }
    }
    finish(w, path)
}

/// Writes the four tables and any retained overlays into `dir`; returns the
/// paths written.
pub fn write_report(dir: &Path, report: &ExperimentReport, fraction: f64) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let p = dir.join(CLASSIFICATION_CSV);
    write_classification(&p, report)?;
    written.push(p);
    let p = dir.join(EXPLANATION_CSV);
    write_explanation(&p, &report.explanation)?;
    written.push(p);
    let p = dir.join(CORRELATION_CSV);
    write_correlation(&p, &report.correlation)?;
    written.push(p);
    let p = dir.join(RATIOS_CSV);
    write_ratios(&p, &report.ratios)?;
    written.push(p);
    written.extend(write_overlays(dir, report, fraction)?);
    Ok(written)
}

pub fn write_overlays(dir: &Path, report: &ExperimentReport, fraction: f64) -> Result<Vec<PathBuf>> {
    if report.maps.is_empty() {
        return Ok(Vec::new());
    }
    let odir = dir.join(OVERLAY_DIR);
    fs::create_dir_all(&odir).map_err(|e| Error::io(&odir, e))?;
    let mut written = Vec::new();
    for m in &report.maps {
        let p = odir.join(format!("s{}_{}_{}.ppm", m.scenario, m.sample_id, m.method));
        write_overlay(&p, &m.image, &m.saliency, m.anatomy.as_ref().map(|a| &a.1), fraction)?;
        written.push(p);
    }
    Ok(written)
}
