//! Calibration must match an independent exhaustive grid search.
//!
//! The oracle enumerates every combination of candidate thresholds (observed
//! score values plus {0, 1} per label) and evaluates the loss directly. It
//! shares no code with the optimizer.

use fflgen_core::calibration::{
    apply_thresholds, calibrate, image_f1, CalibrateOptions, OperatingPoints, ScoreMatrix,
};
use fflgen_core::patterndb::LabelSpace;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn matrix(rows: Vec<Vec<f64>>) -> ScoreMatrix {
    let labels = (0..rows[0].len()).map(|l| format!("<t|yes|l{l}>")).collect();
    ScoreMatrix {
        image_ids: (0..rows.len()).map(|i| format!("img{i}")).collect(),
        labels,
        rows,
    }
}

/// Oracle loss: a plain nested loop over the full candidate grid.
fn grid_search_loss(rows: &[Vec<f64>], truth: &[Vec<bool>]) -> f64 {
    let n_labels = rows[0].len();
    let candidates: Vec<Vec<f64>> = (0..n_labels)
        .map(|l| {
            let mut v: Vec<f64> = rows.iter().map(|r| r[l]).collect();
            v.push(0.0);
            v.push(1.0);
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            v.dedup();
            v
        })
        .collect();

    let loss_of = |thresholds: &[f64]| -> f64 {
        let mut total = 0.0;
        for (row, t) in rows.iter().zip(truth) {
            let predicted: Vec<bool> =
                row.iter().zip(thresholds).map(|(s, th)| s >= th).collect();
            total += image_f1(&predicted, t);
        }
        let mean = total / rows.len() as f64;
        if mean <= 0.0 {
            f64::INFINITY
        } else {
            -mean.ln()
        }
    };

    let mut best = f64::INFINITY;
    let mut combo = vec![0usize; n_labels];
    loop {
        let thresholds: Vec<f64> =
            combo.iter().enumerate().map(|(l, &i)| candidates[l][i]).collect();
        best = best.min(loss_of(&thresholds));
        let mut carry = 0;
        loop {
            combo[carry] += 1;
            if combo[carry] < candidates[carry].len() {
                break;
            }
            combo[carry] = 0;
            carry += 1;
            if carry == n_labels {
                return best;
            }
        }
    }
}

fn assert_matches_oracle(rows: Vec<Vec<f64>>, truth: Vec<Vec<bool>>) {
    let scores = matrix(rows);
    let points = calibrate(&scores, &truth, CalibrateOptions::default()).unwrap();
    let oracle = grid_search_loss(&scores.rows, &truth);
    let both_infinite = points.achieved_loss.is_infinite() && oracle.is_infinite();
    assert!(
        both_infinite || (points.achieved_loss - oracle).abs() <= 1e-9,
        "optimizer {} vs oracle {} on {:?} / {:?}",
        points.achieved_loss,
        oracle,
        scores.rows,
        truth
    );
}

const GRID: [f64; 3] = [0.2, 0.5, 0.8];

/// Exhaustive over every score/truth assignment when the cell count allows
/// it (n * L <= 4 gives 3^4 * 2^4 = 1296 instances at the largest shape).
#[test]
fn exhaustive_small_instances_match_grid_search() {
    for (n, l) in [(1usize, 1usize), (1, 2), (2, 1), (2, 2), (1, 3), (3, 1), (4, 1)] {
        let cells = n * l;
        for score_assign in 0..3usize.pow(cells as u32) {
            for truth_assign in 0..2usize.pow(cells as u32) {
                let mut rows = vec![vec![0.0; l]; n];
                let mut truth = vec![vec![false; l]; n];
                let mut s = score_assign;
                let mut t = truth_assign;
                for i in 0..n {
                    for j in 0..l {
                        rows[i][j] = GRID[s % 3];
                        s /= 3;
                        truth[i][j] = t % 2 == 1;
                        t /= 2;
                    }
                }
                assert_matches_oracle(rows, truth);
            }
        }
    }
}

/// Dense seeded sweep over every remaining shape up to 6 images x 3 labels.
#[test]
fn sampled_larger_instances_match_grid_search() {
    let mut rng = StdRng::seed_from_u64(20_240_817);
    for n in 1..=6usize {
        for l in 1..=3usize {
            if n * l <= 4 {
                continue; // covered exhaustively above
            }
            for _ in 0..400 {
                let rows: Vec<Vec<f64>> = (0..n)
                    .map(|_| (0..l).map(|_| GRID[rng.random_range(0..3)]).collect())
                    .collect();
                let truth: Vec<Vec<bool>> =
                    (0..n).map(|_| (0..l).map(|_| rng.random_bool(0.5)).collect()).collect();
                assert_matches_oracle(rows, truth);
            }
        }
    }
}

#[test]
fn separable_instances_reach_exactly_zero_loss() {
    for n in 1..=6usize {
        for l in 1..=3usize {
            // Positives score 0.8, negatives 0.2: thresholds at 0.8 separate
            // perfectly, so every image-level F1 is 1 and the loss is 0.
            let truth: Vec<Vec<bool>> =
                (0..n).map(|i| (0..l).map(|j| (i + j) % 2 == 0).collect()).collect();
            let rows: Vec<Vec<f64>> = truth
                .iter()
                .map(|t| t.iter().map(|&p| if p { 0.8 } else { 0.2 }).collect())
                .collect();
            let scores = matrix(rows);
            let points = calibrate(&scores, &truth, CalibrateOptions::default()).unwrap();
            assert_eq!(points.achieved_loss, 0.0, "separable case must hit L = 0");
        }
    }
}

/// The returned loss never exceeds the loss at the per-label initialization
/// (recomputed here independently).
#[test]
fn descent_from_per_label_initialization() {
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..300 {
        let n = rng.random_range(1..=8);
        let l = rng.random_range(1..=4);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..l).map(|_| (rng.random_range(0..=10) as f64) / 10.0).collect())
            .collect();
        let truth: Vec<Vec<bool>> =
            (0..n).map(|_| (0..l).map(|_| rng.random_bool(0.4)).collect()).collect();
        let scores = matrix(rows.clone());
        let points = calibrate(&scores, &truth, CalibrateOptions::default()).unwrap();

        // Independent per-label init: best label-level F1, largest threshold.
        let mut init = vec![0.0; l];
        for (j, slot) in init.iter_mut().enumerate() {
            let mut candidates: Vec<f64> = rows.iter().map(|r| r[j]).collect();
            candidates.push(0.0);
            candidates.push(1.0);
            candidates.sort_by(|a, b| a.partial_cmp(b).unwrap());
            candidates.dedup();
            let mut best = (-1.0f64, 0.0f64);
            for &th in &candidates {
                let tp = rows
                    .iter()
                    .zip(&truth)
                    .filter(|(r, t)| r[j] >= th && t[j])
                    .count();
                let fp = rows
                    .iter()
                    .zip(&truth)
                    .filter(|(r, t)| r[j] >= th && !t[j])
                    .count();
                let fn_ = rows
                    .iter()
                    .zip(&truth)
                    .filter(|(r, t)| r[j] < th && t[j])
                    .count();
                let f1 = if tp + fp + fn_ == 0 {
                    1.0
                } else {
                    2.0 * tp as f64 / (2 * tp + fp + fn_) as f64
                };
                if f1 > best.0 + 1e-12 || ((f1 - best.0).abs() <= 1e-12 && th > best.1) {
                    best = (f1.max(best.0), th);
                }
            }
            *slot = best.1;
        }
        let init_loss = {
            let mut total = 0.0;
            for (row, t) in rows.iter().zip(&truth) {
                let predicted: Vec<bool> =
                    row.iter().zip(&init).map(|(s, th)| s >= th).collect();
                total += image_f1(&predicted, t);
            }
            let mean = total / rows.len() as f64;
            if mean <= 0.0 {
                f64::INFINITY
            } else {
                -mean.ln()
            }
        };
        assert!(
            points.achieved_loss <= init_loss + 1e-9,
            "loss went up: {} from init {}",
            points.achieved_loss,
            init_loss
        );
    }
}

/// Raising any single threshold never adds predicted bits.
#[test]
fn thresholding_is_monotone() {
    let space = LabelSpace::from_keys(
        (0..4).map(|l| format!("<t|yes|l{l}>")).collect(),
        vec![1.0; 4],
        vec![1; 4],
    )
    .unwrap();
    let labels: Vec<String> = (0..4).map(|l| format!("<t|yes|l{l}>")).collect();
    let mut rng = StdRng::seed_from_u64(99);
    for _ in 0..500 {
        let row: Vec<f64> = (0..4).map(|_| rng.random_range(0..=10) as f64 / 10.0).collect();
        let thresholds: Vec<f64> =
            (0..4).map(|_| rng.random_range(0..=10) as f64 / 10.0).collect();
        let points = OperatingPoints {
            labels: labels.clone(),
            thresholds: thresholds.clone(),
            achieved_loss: 0.0,
        };
        let base = apply_thresholds(&row, &labels, &points, &space).unwrap();
        for l in 0..4 {
            let mut raised = thresholds.clone();
            raised[l] = (raised[l] + 0.3).min(1.0);
            let points = OperatingPoints {
                labels: labels.clone(),
                thresholds: raised,
                achieved_loss: 0.0,
            };
            let after = apply_thresholds(&row, &labels, &points, &space).unwrap();
            for bit in after.ones() {
                assert!(base.get(bit), "raising a threshold added bit {bit}");
            }
        }
    }
}
