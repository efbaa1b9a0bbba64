use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event::Event;

/// Default number of most recent comments entering the pairwise similarity.
pub const DEFAULT_COMMENT_CAP: usize = 200;

/// Number of numeric columns produced by [`AccountFeatures::to_row`].
pub const NUM_COLUMNS: usize = 7;

pub const COLUMN_NAMES: [&str; NUM_COLUMNS] = [
    "comment_similarity",
    "organization_owned",
    "unique_event_types",
    "placement_beginning",
    "placement_middle",
    "placement_end",
    "placement_absent",
];

/// Where "bot" occurs in a login.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Placement {
    Beginning,
    Middle,
    End,
    Absent,
}

impl Placement {
    pub fn as_str(self) -> &'static str {
        match self {
            Placement::Beginning => "beginning",
            Placement::Middle => "middle",
            Placement::End => "end",
            Placement::Absent => "absent",
        }
    }
}

impl fmt::Display for Placement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Placement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "beginning" => Ok(Placement::Beginning),
            "middle" => Ok(Placement::Middle),
            "end" => Ok(Placement::End),
            "absent" => Ok(Placement::Absent),
            _ => Err(Error::InvalidParameter(format!("unknown placement {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccountFeatures {
    /// Mean pairwise cosine similarity of comments; -1 with fewer than two comments.
    pub comment_similarity: f64,
    pub organization_owned: bool,
    pub unique_event_types: u32,
    pub bot_placement: Placement,
}

impl AccountFeatures {
    /// Numeric encoding: similarity, org flag, type count, one-hot placement.
    pub fn to_row(&self) -> [f64; NUM_COLUMNS] {
        let mut row = [0.0; NUM_COLUMNS];
        row[0] = self.comment_similarity;
        row[1] = if self.organization_owned { 1.0 } else { 0.0 };
        row[2] = f64::from(self.unique_event_types);
        let slot = match self.bot_placement {
            Placement::Beginning => 3,
            Placement::Middle => 4,
            Placement::End => 5,
            Placement::Absent => 6,
        };
        row[slot] = 1.0;
        row
    }
}

/// Logins containing "bot", case-insensitively.
pub fn candidate_accounts<'a>(logins: impl IntoIterator<Item = &'a str>) -> BTreeSet<String> {
    logins
        .into_iter()
        .filter(|l| l.to_lowercase().contains("bot"))
        .map(str::to_string)
        .collect()
}

pub fn bot_name_placement(login: &str) -> Placement {
    let lower = login.to_lowercase();
    if lower.starts_with("bot") {
        Placement::Beginning
    } else if lower.ends_with("bot") {
        Placement::End
    } else if lower.contains("bot") {
        Placement::Middle
    } else {
        Placement::Absent
    }
}

/// Sparse term-frequency vector: sorted (term id, count) pairs.
type TermVector = Vec<(u32, f64)>;

fn term_vectors<S: AsRef<str>>(comments: &[S]) -> Vec<(TermVector, f64)> {
    let mut vocab: HashMap<String, u32> = HashMap::new();
    comments
        .iter()
        .map(|c| {
            let mut counts: BTreeMap<u32, f64> = BTreeMap::new();
            for tok in c
                .as_ref()
                .split(|ch: char| !ch.is_alphanumeric())
                .filter(|t| !t.is_empty())
            {
                let next = vocab.len() as u32;
                let id = *vocab.entry(tok.to_lowercase()).or_insert(next);
                *counts.entry(id).or_default() += 1.0;
            }
            let norm = counts.values().map(|v| v * v).sum::<f64>().sqrt();
            (counts.into_iter().collect(), norm)
        })
        .collect()
}

fn dot(a: &TermVector, b: &TermVector) -> f64 {
    let (mut i, mut j, mut acc) = (0, 0, 0.0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                acc += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    acc
}

/// Mean cosine similarity over all unordered comment pairs.
///
/// Tokens are lowercased runs of alphanumerics weighted by raw term
/// frequency. A comment without tokens scores 0 against everything.
/// Returns -1 when there are fewer than two comments.
pub fn comment_similarity<S: AsRef<str>>(comments: &[S]) -> f64 {
    if comments.len() < 2 {
        return -1.0;
    }
    let vecs = term_vectors(comments);
    let mut total = 0.0;
    let mut pairs = 0u64;
    for i in 0..vecs.len() {
        for j in i + 1..vecs.len() {
            let (a, na) = &vecs[i];
            let (b, nb) = &vecs[j];
            if *na > 0.0 && *nb > 0.0 {
                total += dot(a, b) / (na * nb);
            }
            pairs += 1;
        }
    }
    (total / pairs as f64).clamp(0.0, 1.0)
}

/// Computes the four features from one account's events.
///
/// Only the `comment_cap` most recent comments count toward similarity.
pub fn extract_features(login: &str, events: &[&Event], comment_cap: usize) -> Result<AccountFeatures> {
    if events.is_empty() {
        return Err(Error::EmptyHistory(login.to_string()));
    }
    let mut commented: Vec<&Event> = events.iter().copied().filter(|e| e.comment_body.is_some()).collect();
    commented.sort_by_key(|e| e.created_at);
    let recent = &commented[commented.len().saturating_sub(comment_cap)..];
    let comments: Vec<&str> = recent.iter().filter_map(|e| e.comment_body.as_deref()).collect();

    let types: BTreeSet<_> = events.iter().map(|e| e.event_type).collect();
    Ok(AccountFeatures {
        comment_similarity: comment_similarity(&comments),
        organization_owned: events.iter().any(|e| e.org_owned_actor),
        unique_event_types: types.len() as u32,
        bot_placement: bot_name_placement(login),
    })
}

/// Per-login event lists, in input order.
pub fn account_histories(events: &[Event]) -> BTreeMap<&str, Vec<&Event>> {
    let mut out: BTreeMap<&str, Vec<&Event>> = BTreeMap::new();
    for ev in events {
        out.entry(ev.actor_login.as_str()).or_default().push(ev);
    }
    out
}
