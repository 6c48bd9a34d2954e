//! Operating-point calibration from classifier score files.
//!
//! Scores enter as CSV (`image_id,<label keys...>`); calibration picks one
//! threshold per label minimizing
//!
//! ```text
//! L(theta) = -ln( mean over images of F1_i(theta) )
//! ```
//!
//! where `F1_i` is the image-level F1 between thresholded predictions and
//! truth (an image with no true and no predicted labels scores 1). Because
//! F1 is piecewise constant between observed scores, candidate thresholds
//! are the observed values per label plus {0, 1}.
//!
//! The optimizer initializes each threshold at its per-label F1 maximum and
//! runs coordinate descent until no single-coordinate move improves the
//! loss. Single-coordinate moves can stall on a joint optimum that needs two
//! thresholds raised together, so an exact sweep over the whole candidate
//! grid runs afterwards whenever the grid is small enough to enumerate; the
//! returned loss is the better of the two.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::patterndb::{LabelSpace, PatternVector};

/// Full grid search is attempted when the candidate combination count stays
/// under this budget.
const EXACT_SWEEP_BUDGET: u128 = 200_000;

#[derive(Debug, Error)]
pub enum CalibrationError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("row {row}, label {label:?}: score {value} outside [0,1]")]
    ScoreOutOfRange {
        row: usize,
        label: String,
        value: f64,
    },
    #[error("row {row}, label {label:?}: truth value {value} is not 0 or 1")]
    TruthNotBinary {
        row: usize,
        label: String,
        value: f64,
    },
    #[error("label {0:?} has no calibrated threshold")]
    MissingThreshold(String),
    #[error("label {0:?} is not part of the label space")]
    LabelSpaceMismatch(String),
}

/// Per-image classifier scores over a set of label keys.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    pub image_ids: Vec<String>,
    pub labels: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl ScoreMatrix {
    pub fn read_csv(path: &Path) -> Result<ScoreMatrix, CalibrationError> {
        let raw = fs::read_to_string(path)?;
        ScoreMatrix::from_csv_str(&raw)
    }

    pub fn from_csv_str(raw: &str) -> Result<ScoreMatrix, CalibrationError> {
        let mut reader = csv::ReaderBuilder::new().from_reader(raw.as_bytes());
        let headers = reader.headers()?.clone();
        if headers.is_empty() || headers.get(0) != Some("image_id") {
            return Err(CalibrationError::Shape(
                "first CSV column must be image_id".to_string(),
            ));
        }
        let labels: Vec<String> = headers.iter().skip(1).map(|s| s.to_string()).collect();
        if labels.is_empty() {
            return Err(CalibrationError::Empty("no label columns"));
        }
        let mut image_ids = Vec::new();
        let mut rows = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record?;
            if record.len() != labels.len() + 1 {
                return Err(CalibrationError::Shape(format!(
                    "row {} has {} fields, expected {}",
                    i + 1,
                    record.len(),
                    labels.len() + 1
                )));
            }
            image_ids.push(record[0].to_string());
            let mut row = Vec::with_capacity(labels.len());
            for (j, field) in record.iter().skip(1).enumerate() {
                let value: f64 = field.trim().parse().map_err(|_| {
                    CalibrationError::Shape(format!(
                        "row {}, label {:?}: {:?} is not a number",
                        i + 1,
                        labels[j],
                        field
                    ))
                })?;
                if !(0.0..=1.0).contains(&value) {
                    return Err(CalibrationError::ScoreOutOfRange {
                        row: i + 1,
                        label: labels[j].clone(),
                        value,
                    });
                }
                row.push(value);
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(CalibrationError::Empty("no score rows"));
        }
        Ok(ScoreMatrix {
            image_ids,
            labels,
            rows,
        })
    }

    /// Interpret this matrix as ground truth; every value must be 0 or 1.
    pub fn truth_rows(&self) -> Result<Vec<Vec<bool>>, CalibrationError> {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, &v)| {
                        if v == 0.0 {
                            Ok(false)
                        } else if v == 1.0 {
                            Ok(true)
                        } else {
                            Err(CalibrationError::TruthNotBinary {
                                row: i + 1,
                                label: self.labels[j].clone(),
                                value: v,
                            })
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

/// Calibrated per-label thresholds and the loss they achieve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoints {
    pub labels: Vec<String>,
    pub thresholds: Vec<f64>,
    pub achieved_loss: f64,
}

impl OperatingPoints {
    pub fn threshold_for(&self, label: &str) -> Option<f64> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| self.thresholds[i])
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CalibrateOptions {
    /// Average F1 over labels (columns) instead of images (rows).
    pub per_label_f1: bool,
}

/// Image-level F1 with the empty/empty = 1 convention.
pub fn image_f1(predicted: &[bool], truth: &[bool]) -> f64 {
    let tp = predicted.iter().zip(truth).filter(|(p, t)| **p && **t).count();
    let np = predicted.iter().filter(|p| **p).count();
    let nt = truth.iter().filter(|t| **t).count();
    if np + nt == 0 {
        1.0
    } else {
        2.0 * tp as f64 / (np + nt) as f64
    }
}

fn mean_f1(
    rows: &[Vec<f64>],
    truth: &[Vec<bool>],
    thresholds: &[f64],
    per_label: bool,
) -> f64 {
    if per_label {
        let labels = thresholds.len();
        let mut total = 0.0;
        for l in 0..labels {
            let predicted: Vec<bool> = rows.iter().map(|r| r[l] >= thresholds[l]).collect();
            let actual: Vec<bool> = truth.iter().map(|t| t[l]).collect();
            total += image_f1(&predicted, &actual);
        }
        total / labels as f64
    } else {
        let mut total = 0.0;
        for (row, t) in rows.iter().zip(truth) {
            let predicted: Vec<bool> =
                row.iter().zip(thresholds).map(|(s, th)| s >= th).collect();
            total += image_f1(&predicted, t);
        }
        total / rows.len() as f64
    }
}

/// The calibration objective `-ln(mean F1)`.
pub fn loss_at(
    rows: &[Vec<f64>],
    truth: &[Vec<bool>],
    thresholds: &[f64],
    options: CalibrateOptions,
) -> f64 {
    let mean = mean_f1(rows, truth, thresholds, options.per_label_f1);
    if mean <= 0.0 {
        f64::INFINITY
    } else {
        // 0.0 - ln keeps a perfect mean at +0.0 rather than -0.0.
        0.0 - mean.ln()
    }
}

/// Candidate thresholds for one label: observed scores plus {0, 1}.
fn candidates_for(rows: &[Vec<f64>], label: usize) -> Vec<f64> {
    let mut values: Vec<f64> = rows.iter().map(|r| r[label]).collect();
    values.push(0.0);
    values.push(1.0);
    values.sort_by(|a, b| a.partial_cmp(b).expect("scores are finite"));
    values.dedup();
    values
}

/// Per-label F1-maximizing threshold; among equal maxima the largest
/// threshold wins, keeping calibration conservative and deterministic.
fn per_label_init(rows: &[Vec<f64>], truth: &[Vec<bool>], label: usize) -> f64 {
    let mut best = (f64::NEG_INFINITY, 0.0);
    for &threshold in &candidates_for(rows, label) {
        let mut tp = 0usize;
        let mut fp = 0usize;
        let mut fn_ = 0usize;
        for (row, t) in rows.iter().zip(truth) {
            let predicted = row[label] >= threshold;
            match (predicted, t[label]) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => {}
            }
        }
        let f1 = if tp + fp + fn_ == 0 {
            1.0
        } else {
            2.0 * tp as f64 / (2 * tp + fp + fn_) as f64
        };
        if f1 > best.0 + 1e-12 || (f1 > best.0 - 1e-12 && threshold > best.1) {
            best = (f1.max(best.0), threshold);
        }
    }
    best.1
}

/// Select per-label operating points minimizing `-ln(mean F1)`.
pub fn calibrate(
    scores: &ScoreMatrix,
    truth: &[Vec<bool>],
    options: CalibrateOptions,
) -> Result<OperatingPoints, CalibrationError> {
    let rows = &scores.rows;
    if rows.is_empty() {
        return Err(CalibrationError::Empty("no score rows"));
    }
    if truth.len() != rows.len() {
        return Err(CalibrationError::Shape(format!(
            "{} truth rows for {} score rows",
            truth.len(),
            rows.len()
        )));
    }
    for (i, t) in truth.iter().enumerate() {
        if t.len() != scores.labels.len() {
            return Err(CalibrationError::Shape(format!(
                "truth row {} has {} values, expected {}",
                i + 1,
                t.len(),
                scores.labels.len()
            )));
        }
    }

    let n_labels = scores.labels.len();
    let candidates: Vec<Vec<f64>> = (0..n_labels).map(|l| candidates_for(rows, l)).collect();

    let mut thresholds: Vec<f64> =
        (0..n_labels).map(|l| per_label_init(rows, truth, l)).collect();
    let mut current = loss_at(rows, truth, &thresholds, options);

    // Coordinate descent in label order; a move must strictly improve.
    loop {
        let mut changed = false;
        for l in 0..n_labels {
            let mut best_threshold = thresholds[l];
            let mut best_loss = current;
            let original = thresholds[l];
            for &candidate in &candidates[l] {
                if candidate == original {
                    continue;
                }
                thresholds[l] = candidate;
                let loss = loss_at(rows, truth, &thresholds, options);
                if loss < best_loss - 1e-12
                    || (loss < best_loss + 1e-12
                        && loss < current - 1e-12
                        && candidate > best_threshold)
                {
                    best_loss = loss.min(best_loss);
                    best_threshold = candidate;
                }
            }
            thresholds[l] = best_threshold;
            if best_loss < current - 1e-12 {
                current = best_loss;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    // Exact refinement on small grids; coordinate moves alone can miss
    // optima that need two thresholds changed together.
    let grid_size: u128 = candidates.iter().map(|c| c.len() as u128).product();
    if grid_size <= EXACT_SWEEP_BUDGET {
        let mut combo = vec![0usize; n_labels];
        let mut probe = vec![0.0f64; n_labels];
        loop {
            for l in 0..n_labels {
                probe[l] = candidates[l][combo[l]];
            }
            let loss = loss_at(rows, truth, &probe, options);
            if loss < current - 1e-12 {
                current = loss;
                thresholds.copy_from_slice(&probe);
            }
            let mut carry = 0;
            loop {
                combo[carry] += 1;
                if combo[carry] < candidates[carry].len() {
                    break;
                }
                combo[carry] = 0;
                carry += 1;
                if carry == n_labels {
                    break;
                }
            }
            if carry == n_labels {
                break;
            }
        }
    }

    Ok(OperatingPoints {
        labels: scores.labels.clone(),
        thresholds,
        achieved_loss: current,
    })
}

/// Threshold one score row into a pattern vector over the label space.
/// A score exactly at its threshold sets the bit (>= convention).
pub fn apply_thresholds(
    row: &[f64],
    row_labels: &[String],
    points: &OperatingPoints,
    space: &LabelSpace,
) -> Result<PatternVector, CalibrationError> {
    if row.len() != row_labels.len() {
        return Err(CalibrationError::Shape(format!(
            "{} scores for {} labels",
            row.len(),
            row_labels.len()
        )));
    }
    let mut vector = PatternVector::zeros(space.len());
    for (value, label) in row.iter().zip(row_labels) {
        let threshold = points
            .threshold_for(label)
            .ok_or_else(|| CalibrationError::MissingThreshold(label.clone()))?;
        let index = space
            .index_of(label)
            .ok_or_else(|| CalibrationError::LabelSpaceMismatch(label.clone()))?;
        if *value >= threshold {
            vector.set(index);
        }
    }
    Ok(vector)
}

/// Combine a CFL pattern (over the bare-core subset) with an FFL pattern
/// (over the full space): fine bits pass through, and a CFL detection with
/// no set positive label of that core falls back to setting the bare-core
/// bit.
pub fn merge_patterns(
    cfl: &PatternVector,
    ffl: &PatternVector,
    space: &LabelSpace,
) -> Result<PatternVector, CalibrationError> {
    if cfl.len() != space.cfl_subset.len() {
        return Err(CalibrationError::Shape(format!(
            "CFL vector has {} bits, cfl subset has {}",
            cfl.len(),
            space.cfl_subset.len()
        )));
    }
    if ffl.len() != space.len() {
        return Err(CalibrationError::Shape(format!(
            "FFL vector has {} bits, label space has {}",
            ffl.len(),
            space.len()
        )));
    }
    let mut positive_cores: HashMap<&str, bool> = HashMap::new();
    for i in ffl.ones() {
        let label = space.label(i);
        if label.present {
            positive_cores.insert(label.core.as_str(), true);
        }
    }
    let mut merged = ffl.clone();
    for (k, &space_index) in space.cfl_subset.iter().enumerate() {
        if !cfl.get(k) {
            continue;
        }
        let core = space.label(space_index).core.as_str();
        if !positive_cores.contains_key(core) {
            merged.set(space_index);
        }
    }
    Ok(merged)
}

/// Key-level merge used by the CLI: FFL keys pass through; a CFL key whose
/// core has no positive FFL label joins the result.
pub fn merge_label_keys(cfl_keys: &[String], ffl_keys: &[String]) -> Vec<String> {
    use crate::extraction::FflLabel;
    let positive_cores: Vec<String> = ffl_keys
        .iter()
        .filter_map(|k| FflLabel::parse(k).ok())
        .filter(|l| l.present)
        .map(|l| l.core)
        .collect();
    let mut merged: Vec<String> = ffl_keys.to_vec();
    for key in cfl_keys {
        let Ok(label) = FflLabel::parse(key) else {
            continue;
        };
        if !positive_cores.contains(&label.core) {
            merged.push(key.clone());
        }
    }
    merged.sort();
    merged.dedup();
    merged
}
