use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::features::AccountFeatures;
use super::model::{fit_rows, ClassifierKind, ClassifierParams};
use super::Label;
use crate::error::{Error, Result};

/// Splits indices into `k` folds preserving class proportions.
///
/// Each class is shuffled with `seed` and dealt round-robin, continuing
/// the deal across classes, so per-class and total fold sizes both differ
/// by at most one.
pub fn stratified_kfold<T: Ord>(labels: &[T], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k must be at least 2, got {k}")));
    }
    if k > labels.len() {
        return Err(Error::KTooLarge { k, n: labels.len() });
    }
    let mut classes: BTreeMap<&T, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        classes.entry(l).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for members in classes.values_mut() {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            folds[next % k].push(i);
            next += 1;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Harmonic mean of precision and recall, 0 when both are 0.
pub fn f1_from(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

pub fn f1_score(tp: u64, fp: u64, fn_: u64) -> Result<Metrics> {
    if tp + fp == 0 {
        return Err(Error::UndefinedMetric("precision: no predicted positives"));
    }
    if tp + fn_ == 0 {
        return Err(Error::UndefinedMetric("recall: no actual positives"));
    }
    let precision = tp as f64 / (tp + fp) as f64;
    let recall = tp as f64 / (tp + fn_) as f64;
    Ok(Metrics {
        precision,
        recall,
        f1: f1_from(precision, recall),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldScore {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl FoldScore {
    /// Scores with `Bot` as the positive class; undefined ratios count as 0.
    fn from_counts(tp: u64, fp: u64, fn_: u64, tn: u64) -> FoldScore {
        let ratio = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        FoldScore {
            tp,
            fp,
            fn_,
            tn,
            precision,
            recall,
            f1: f1_from(precision, recall),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CVReport {
    pub kind: ClassifierKind,
    pub k: usize,
    pub seed: u64,
    pub folds: Vec<FoldScore>,
    pub mean_precision: f64,
    pub mean_recall: f64,
    pub mean_f1: f64,
}

/// Stratified k-fold cross-validation of one classifier kind.
pub fn evaluate_cv(
    kind: ClassifierKind,
    features: &[AccountFeatures],
    labels: &[Label],
    params: &ClassifierParams,
    k: usize,
    seed: u64,
) -> Result<CVReport> {
    if features.len() != labels.len() {
        return Err(Error::InvalidParameter(format!(
            "{} feature rows but {} labels",
            features.len(),
            labels.len()
        )));
    }
    let rows: Vec<Vec<f64>> = features.iter().map(|f| f.to_row().to_vec()).collect();
    let folds = stratified_kfold(labels, k, seed)?;
    let mut scores = Vec::with_capacity(k);
    for held in &folds {
        let mut in_test = vec![false; rows.len()];
        for &i in held {
            in_test[i] = true;
        }
        let train_idx: Vec<usize> = (0..rows.len()).filter(|&i| !in_test[i]).collect();
        let train_rows: Vec<Vec<f64>> = train_idx.iter().map(|&i| rows[i].clone()).collect();
        let train_labels: Vec<Label> = train_idx.iter().map(|&i| labels[i]).collect();
        let model = fit_rows(kind, &train_rows, &train_labels, params)?;
        let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
        for &i in held {
            let predicted = model.label_for(model.probability_row(&rows[i])?);
            match (predicted, labels[i]) {
                (Label::Bot, Label::Bot) => tp += 1,
                (Label::Bot, Label::Human) => fp += 1,
                (Label::Human, Label::Bot) => fn_ += 1,
                (Label::Human, Label::Human) => tn += 1,
            }
        }
        scores.push(FoldScore::from_counts(tp, fp, fn_, tn));
    }
    let mean = |f: fn(&FoldScore) -> f64| scores.iter().map(f).sum::<f64>() / scores.len() as f64;
    Ok(CVReport {
        kind,
        k,
        seed,
        mean_precision: mean(|s| s.precision),
        mean_recall: mean(|s| s.recall),
        mean_f1: mean(|s| s.f1),
        folds: scores,
    })
}
