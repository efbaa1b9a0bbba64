//! Bot account detection: the four account features, two classifier
//! kinds, stratified cross-validation and CSV interchange.
//!
//! Only accounts whose login contains "bot" are ever classified; every
//! other account is human.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event::Event;

pub mod cv;
pub mod features;
pub mod gbdt;
pub mod logistic;
pub mod model;

pub use cv::{evaluate_cv, f1_from, f1_score, stratified_kfold, CVReport, FoldScore, Metrics};
pub use features::{
    account_histories, bot_name_placement, candidate_accounts, comment_similarity, extract_features, AccountFeatures,
    Placement, DEFAULT_COMMENT_CAP,
};
pub use gbdt::GbdtParams;
pub use logistic::LogisticParams;
pub use model::{train, Classifier, ClassifierKind, ClassifierParams, Prediction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Bot,
    Human,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Bot => "bot",
            Label::Human => "human",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledAccount {
    pub login: String,
    pub features: AccountFeatures,
    pub label: Label,
}

/// Features of every candidate account present in `events`, keyed by login.
pub fn candidate_features(events: &[Event], comment_cap: usize) -> Result<BTreeMap<String, AccountFeatures>> {
    let histories = account_histories(events);
    let candidates = candidate_accounts(histories.keys().copied());
    candidates
        .into_iter()
        .map(|login| {
            let f = extract_features(&login, &histories[login.as_str()], comment_cap)?;
            Ok((login, f))
        })
        .collect()
}

/// Joins manual labels onto extracted features; labels without events are skipped.
pub fn join_labels(
    features: &BTreeMap<String, AccountFeatures>,
    labels: &[(String, Label)],
) -> (Vec<LabeledAccount>, Vec<String>) {
    let mut joined = Vec::new();
    let mut missing = Vec::new();
    for (login, label) in labels {
        match features.get(login) {
            Some(f) => joined.push(LabeledAccount {
                login: login.clone(),
                features: f.clone(),
                label: *label,
            }),
            None => missing.push(login.clone()),
        }
    }
    (joined, missing)
}

/// Final account labels: the manual label where one exists, else the prediction.
pub fn resolve_labels(
    predictions: &BTreeMap<String, Prediction>,
    manual: &[(String, Label)],
) -> HashMap<String, Label> {
    let mut out: HashMap<String, Label> = predictions.iter().map(|(l, p)| (l.clone(), p.label)).collect();
    for (login, label) in manual {
        out.insert(login.clone(), *label);
    }
    out
}

#[derive(Serialize, Deserialize)]
struct LabelRow {
    login: String,
    is_bot: u8,
}

/// Reads `login,is_bot` rows with `is_bot` in {0, 1}.
pub fn read_labels<R: Read>(src: R) -> Result<Vec<(String, Label)>> {
    let mut out = Vec::new();
    for (i, row) in csv::Reader::from_reader(src).deserialize::<LabelRow>().enumerate() {
        let row = row?;
        let label = match row.is_bot {
            1 => Label::Bot,
            0 => Label::Human,
            v => {
                return Err(Error::MalformedRecord {
                    line: i + 2,
                    message: format!("is_bot must be 0 or 1, got {v}"),
                })
            }
        };
        out.push((row.login, label));
    }
    Ok(out)
}

pub fn write_labels<W: Write>(out: W, labels: &[(String, Label)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (login, label) in labels {
        w.serialize(LabelRow {
            login: login.clone(),
            is_bot: u8::from(*label == Label::Bot),
        })?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct PredictionRow {
    login: String,
    probability: f64,
    label: Label,
}

/// Writes `login,probability,label` rows.
pub fn write_predictions<W: Write>(out: W, predictions: &BTreeMap<String, Prediction>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (login, p) in predictions {
        w.serialize(PredictionRow {
            login: login.clone(),
            probability: p.probability,
            label: p.label,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_predictions<R: Read>(src: R) -> Result<BTreeMap<String, Prediction>> {
    let mut out = BTreeMap::new();
    for row in csv::Reader::from_reader(src).deserialize::<PredictionRow>() {
        let row = row?;
        out.insert(
            row.login,
            Prediction {
                probability: row.probability,
                label: row.label,
            },
        );
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct FeatureRow {
    login: String,
    comment_similarity: f64,
    organization_owned: u8,
    unique_event_types: u32,
    bot_placement: Placement,
}

pub fn write_features<W: Write>(out: W, features: &BTreeMap<String, AccountFeatures>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (login, f) in features {
        w.serialize(FeatureRow {
            login: login.clone(),
            comment_similarity: f.comment_similarity,
            organization_owned: u8::from(f.organization_owned),
            unique_event_types: f.unique_event_types,
            bot_placement: f.bot_placement,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_features<R: Read>(src: R) -> Result<BTreeMap<String, AccountFeatures>> {
    let mut out = BTreeMap::new();
    for row in csv::Reader::from_reader(src).deserialize::<FeatureRow>() {
        let row = row?;
        out.insert(
            row.login,
            AccountFeatures {
                comment_similarity: row.comment_similarity,
                organization_owned: row.organization_owned != 0,
                unique_event_types: row.unique_event_types,
                bot_placement: row.bot_placement,
            },
        );
    }
    Ok(out)
}
