use serde::{Deserialize, Serialize};

use super::features::AccountFeatures;
use super::gbdt::{BoostedTrees, GbdtParams};
use super::logistic::{LogisticModel, LogisticParams};
use super::Label;
use crate::error::{Error, Result};

/// Version written into persisted model documents.
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    LogisticRegression,
    GradientBoosting,
}

impl ClassifierKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::LogisticRegression => "logistic_regression",
            ClassifierKind::GradientBoosting => "gradient_boosting",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierParams {
    pub gradient_boosting: GbdtParams,
    pub logistic: LogisticParams,
    /// Probability at or above which an account is labeled a bot.
    pub threshold: f64,
}

impl Default for ClassifierParams {
    fn default() -> Self {
        ClassifierParams {
            gradient_boosting: GbdtParams::default(),
            logistic: LogisticParams::default(),
            threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FittedState {
    Logistic(LogisticModel),
    Boosted(BoostedTrees),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classifier {
    pub format_version: u32,
    pub kind: ClassifierKind,
    pub params: ClassifierParams,
    pub state: Option<FittedState>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub probability: f64,
    pub label: Label,
}

fn check_finite(row: &[f64]) -> Result<()> {
    if row.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteFeature)
    }
}

impl Classifier {
    pub fn unfitted(kind: ClassifierKind, params: ClassifierParams) -> Classifier {
        Classifier {
            format_version: MODEL_FORMAT_VERSION,
            kind,
            params,
            state: None,
        }
    }

    pub fn is_fitted(&self) -> bool {
        self.state.is_some()
    }

    pub fn probability_row(&self, row: &[f64]) -> Result<f64> {
        check_finite(row)?;
        match &self.state {
            None => Err(Error::UnfittedModel),
            Some(FittedState::Logistic(m)) => Ok(m.probability(row)),
            Some(FittedState::Boosted(m)) => Ok(m.probability(row)),
        }
    }

    pub fn predict(&self, x: &AccountFeatures) -> Result<Prediction> {
        let probability = self.probability_row(&x.to_row())?;
        Ok(Prediction {
            probability,
            label: self.label_for(probability),
        })
    }

    /// `Bot` iff the probability reaches the threshold.
    pub fn label_for(&self, probability: f64) -> Label {
        if probability >= self.params.threshold {
            Label::Bot
        } else {
            Label::Human
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Classifier> {
        let model: Classifier = serde_json::from_str(text)?;
        if model.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::ModelFormat(format!(
                "format_version {} (expected {MODEL_FORMAT_VERSION})",
                model.format_version
            )));
        }
        Ok(model)
    }
}

pub(crate) fn fit_rows(
    kind: ClassifierKind,
    rows: &[Vec<f64>],
    labels: &[Label],
    params: &ClassifierParams,
) -> Result<Classifier> {
    if rows.len() != labels.len() {
        return Err(Error::InvalidParameter(format!(
            "{} feature rows but {} labels",
            rows.len(),
            labels.len()
        )));
    }
    if rows.len() < 2 {
        return Err(Error::InvalidParameter("need at least two samples".into()));
    }
    for r in rows {
        check_finite(r)?;
    }
    let bots = labels.iter().filter(|&&l| l == Label::Bot).count();
    if bots == 0 || bots == labels.len() {
        return Err(Error::DegenerateLabels);
    }
    let targets: Vec<f64> = labels
        .iter()
        .map(|&l| if l == Label::Bot { 1.0 } else { 0.0 })
        .collect();
    let state = match kind {
        ClassifierKind::LogisticRegression => {
            FittedState::Logistic(LogisticModel::fit(rows, &targets, &params.logistic))
        }
        ClassifierKind::GradientBoosting => {
            FittedState::Boosted(BoostedTrees::fit(rows, &targets, &params.gradient_boosting))
        }
    };
    Ok(Classifier {
        format_version: MODEL_FORMAT_VERSION,
        kind,
        params: params.clone(),
        state: Some(state),
    })
}

/// Fits a classifier; both labels must occur.
pub fn train(
    kind: ClassifierKind,
    features: &[AccountFeatures],
    labels: &[Label],
    params: &ClassifierParams,
) -> Result<Classifier> {
    let rows: Vec<Vec<f64>> = features.iter().map(|f| f.to_row().to_vec()).collect();
    fit_rows(kind, &rows, labels, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bots::features::Placement;

    fn feat(sim: f64) -> AccountFeatures {
        AccountFeatures {
            comment_similarity: sim,
            organization_owned: false,
            unique_event_types: 3,
            bot_placement: Placement::End,
        }
    }

    fn separable() -> (Vec<AccountFeatures>, Vec<Label>) {
        let xs: Vec<f64> = (0..20).map(|i| -0.95 + 0.1 * f64::from(i)).collect();
        let feats = xs.iter().map(|&x| feat(x)).collect();
        let labels = xs
            .iter()
            .map(|&x| if x > 0.0 { Label::Bot } else { Label::Human })
            .collect();
        (feats, labels)
    }

    #[test]
    fn both_kinds_fit_separable_data() {
        let (x, y) = separable();
        for kind in [ClassifierKind::GradientBoosting, ClassifierKind::LogisticRegression] {
            let m = train(kind, &x, &y, &ClassifierParams::default()).unwrap();
            let correct = x
                .iter()
                .zip(&y)
                .filter(|(f, l)| m.predict(f).unwrap().label == **l)
                .count();
            assert_eq!(correct, 20, "{kind:?}");
            assert_eq!(m.predict(&feat(0.9)).unwrap().label, Label::Bot);
        }
    }

    #[test]
    fn degenerate_and_non_finite() {
        let (x, _) = separable();
        let all_bot = vec![Label::Bot; x.len()];
        assert!(matches!(
            train(
                ClassifierKind::GradientBoosting,
                &x,
                &all_bot,
                &ClassifierParams::default()
            ),
            Err(Error::DegenerateLabels)
        ));
        let (mut x, y) = separable();
        x[3].comment_similarity = f64::NAN;
        assert!(matches!(
            train(ClassifierKind::LogisticRegression, &x, &y, &ClassifierParams::default()),
            Err(Error::NonFiniteFeature)
        ));
    }

    #[test]
    fn identical_rows_predict_majority() {
        let x = vec![feat(0.3); 10];
        let y: Vec<Label> = (0..10).map(|i| if i < 6 { Label::Bot } else { Label::Human }).collect();
        for kind in [ClassifierKind::GradientBoosting, ClassifierKind::LogisticRegression] {
            let m = train(kind, &x, &y, &ClassifierParams::default()).unwrap();
            let accuracy = y.iter().filter(|&&l| m.predict(&x[0]).unwrap().label == l).count();
            assert_eq!(accuracy, 6);
        }
    }

    #[test]
    fn threshold_boundary_and_errors() {
        let m = Classifier::unfitted(ClassifierKind::GradientBoosting, ClassifierParams::default());
        assert_eq!(m.label_for(0.5), Label::Bot);
        assert_eq!(m.label_for(0.4999), Label::Human);
        assert!(matches!(m.predict(&feat(0.1)), Err(Error::UnfittedModel)));

        let (x, y) = separable();
        let m = train(ClassifierKind::GradientBoosting, &x, &y, &ClassifierParams::default()).unwrap();
        assert!(matches!(m.predict(&feat(f64::INFINITY)), Err(Error::NonFiniteFeature)));
    }

    #[test]
    fn json_round_trip_preserves_predictions() {
        let (x, y) = separable();
        for kind in [ClassifierKind::GradientBoosting, ClassifierKind::LogisticRegression] {
            let m = train(kind, &x, &y, &ClassifierParams::default()).unwrap();
            let back = Classifier::from_json(&m.to_json().unwrap()).unwrap();
            for f in &x {
                assert_eq!(m.predict(f).unwrap(), back.predict(f).unwrap());
            }
        }
        let bad = r#"{"format_version":9,"kind":"gradient_boosting","params":{},"state":null}"#;
        assert!(matches!(Classifier::from_json(bad), Err(Error::ModelFormat(_))));
    }
}
