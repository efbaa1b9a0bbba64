//! Team rosters and per-repository event sequences.
//!
//! A member is a human account with at least one push or pull request on
//! the repository; repositories with two or more members are teams. A team
//! is human-bot when any detected bot acted on the repository.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bots::Label;
use crate::error::{Error, Result};
use crate::event::{Event, EventType};

pub const DEFAULT_MIN_LEN: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TeamKind {
    #[serde(rename = "human-bot")]
    HumanBot,
    #[serde(rename = "human-only")]
    HumanOnly,
}

impl TeamKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TeamKind::HumanBot => "human-bot",
            TeamKind::HumanOnly => "human-only",
        }
    }
}

impl fmt::Display for TeamKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TeamKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "human-bot" => Ok(TeamKind::HumanBot),
            "human-only" => Ok(TeamKind::HumanOnly),
            _ => Err(Error::InvalidParameter(format!("unknown team kind {s:?}"))),
        }
    }
}

/// The six-symbol alphabet used for motif discovery.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ReducedSymbol {
    /// Push
    PU,
    /// PullRequest
    PR,
    /// Issues and IssueComment
    IS,
    /// PullRequestReviewComment
    RC,
    /// Create
    CR,
    /// Delete
    DE,
}

impl ReducedSymbol {
    pub const ALL: [ReducedSymbol; 6] = [
        ReducedSymbol::PU,
        ReducedSymbol::PR,
        ReducedSymbol::IS,
        ReducedSymbol::RC,
        ReducedSymbol::CR,
        ReducedSymbol::DE,
    ];

    pub fn from_event(t: EventType) -> Option<ReducedSymbol> {
        Some(match t {
            EventType::Push => ReducedSymbol::PU,
            EventType::PullRequest => ReducedSymbol::PR,
            EventType::Issues | EventType::IssueComment => ReducedSymbol::IS,
            EventType::PullRequestReviewComment => ReducedSymbol::RC,
            EventType::Create => ReducedSymbol::CR,
            EventType::Delete => ReducedSymbol::DE,
            _ => return None,
        })
    }

    /// One-letter code used in sequence files.
    pub fn code(self) -> char {
        match self {
            ReducedSymbol::PU => 'P',
            ReducedSymbol::PR => 'R',
            ReducedSymbol::IS => 'I',
            ReducedSymbol::RC => 'V',
            ReducedSymbol::CR => 'C',
            ReducedSymbol::DE => 'D',
        }
    }

    pub fn from_code(c: char) -> Option<ReducedSymbol> {
        ReducedSymbol::ALL.into_iter().find(|s| s.code() == c)
    }

    pub fn name(self) -> &'static str {
        match self {
            ReducedSymbol::PU => "PU",
            ReducedSymbol::PR => "PR",
            ReducedSymbol::IS => "IS",
            ReducedSymbol::RC => "RC",
            ReducedSymbol::CR => "CR",
            ReducedSymbol::DE => "DE",
        }
    }
}

impl fmt::Display for ReducedSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn encode_symbols(symbols: &[ReducedSymbol]) -> String {
    symbols.iter().map(|s| s.code()).collect()
}

pub fn decode_symbols(text: &str) -> Result<Vec<ReducedSymbol>> {
    text.chars()
        .map(|c| {
            ReducedSymbol::from_code(c).ok_or_else(|| Error::InvalidParameter(format!("unknown symbol code {c:?}")))
        })
        .collect()
}

/// Maps raw types onto the reduced alphabet, dropping the seven rare types.
pub fn reduce_alphabet(raw: &[EventType]) -> Vec<ReducedSymbol> {
    raw.iter().filter_map(|&t| ReducedSymbol::from_event(t)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Team {
    pub repo_id: u64,
    pub members: BTreeSet<u64>,
    pub kind: TeamKind,
    /// Member events in time order; ties keep input order.
    pub raw_events: Vec<Event>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TeamSequence {
    pub repo_id: u64,
    pub kind: TeamKind,
    pub symbols: Vec<ReducedSymbol>,
    pub pre_reduction: Vec<EventType>,
}

impl TeamSequence {
    pub fn from_team(team: &Team) -> TeamSequence {
        let pre_reduction: Vec<EventType> = team.raw_events.iter().map(|e| e.event_type).collect();
        TeamSequence {
            repo_id: team.repo_id,
            kind: team.kind,
            symbols: reduce_alphabet(&pre_reduction),
            pre_reduction,
        }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

fn is_bot(labels: &HashMap<String, Label>, login: &str) -> bool {
    labels.get(login) == Some(&Label::Bot)
}

fn build_team(repo_id: u64, mut events: Vec<&Event>, labels: &HashMap<String, Label>) -> Option<Team> {
    events.sort_by_key(|e| e.created_at);
    let mut has_bot = false;
    let mut members = BTreeSet::new();
    for ev in &events {
        if is_bot(labels, &ev.actor_login) {
            has_bot = true;
        } else if ev.event_type.is_contribution() {
            members.insert(ev.actor_id);
        }
    }
    if members.len() < 2 {
        return None;
    }
    let raw_events = events
        .into_iter()
        .filter(|e| members.contains(&e.actor_id) && !is_bot(labels, &e.actor_login))
        .cloned()
        .collect();
    Some(Team {
        repo_id,
        members,
        kind: if has_bot {
            TeamKind::HumanBot
        } else {
            TeamKind::HumanOnly
        },
        raw_events,
    })
}

/// Groups events by repository and builds every team, ordered by repo id.
///
/// Accounts missing from `bot_labels` count as human.
pub fn build_teams(events: &[Event], bot_labels: &HashMap<String, Label>) -> Vec<Team> {
    let mut by_repo: BTreeMap<u64, Vec<&Event>> = BTreeMap::new();
    for ev in events {
        by_repo.entry(ev.repo_id).or_default().push(ev);
    }
    by_repo
        .into_par_iter()
        .filter_map(|(repo, evs)| build_team(repo, evs, bot_labels))
        .collect()
}

pub fn filter_short(sequences: Vec<TeamSequence>, min_len: usize) -> Result<Vec<TeamSequence>> {
    if min_len == 0 {
        return Err(Error::InvalidParameter("min_len must be at least 1".into()));
    }
    Ok(sequences.into_iter().filter(|s| s.len() >= min_len).collect())
}

/// Which event types make up a frequency vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrequencyDims {
    /// Push, PullRequest, Issues, IssueComment, Create, Delete.
    #[default]
    Six,
    /// The six above plus PullRequestReviewComment.
    WithReviewComments,
}

impl FrequencyDims {
    pub fn types(self) -> &'static [EventType] {
        const SIX: [EventType; 7] = [
            EventType::Push,
            EventType::PullRequest,
            EventType::Issues,
            EventType::IssueComment,
            EventType::Create,
            EventType::Delete,
            EventType::PullRequestReviewComment,
        ];
        match self {
            FrequencyDims::Six => &SIX[..6],
            FrequencyDims::WithReviewComments => &SIX,
        }
    }
}

/// Event counts of a team over the given dimensions, from its raw sequence.
pub fn frequency_vector(seq: &TeamSequence, dims: FrequencyDims) -> Vec<u32> {
    let types = dims.types();
    let mut counts = vec![0u32; types.len()];
    for t in &seq.pre_reduction {
        if let Some(i) = types.iter().position(|x| x == t) {
            counts[i] += 1;
        }
    }
    counts
}

#[derive(Serialize, Deserialize)]
struct SequenceRow {
    repo_id: u64,
    kind: TeamKind,
    symbols: String,
}

#[derive(Serialize, Deserialize)]
struct PreReductionRow {
    repo_id: u64,
    kind: TeamKind,
    events: String,
}

#[derive(Serialize, Deserialize)]
struct TeamRow {
    repo_id: u64,
    kind: TeamKind,
    members: String,
    events: usize,
}

pub fn write_teams<W: Write>(out: W, teams: &[Team]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for t in teams {
        let members: Vec<String> = t.members.iter().map(u64::to_string).collect();
        w.serialize(TeamRow {
            repo_id: t.repo_id,
            kind: t.kind,
            members: members.join(";"),
            events: t.raw_events.len(),
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `repo_id,kind,symbols` rows.
pub fn write_sequences<W: Write>(out: W, seqs: &[TeamSequence]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for s in seqs {
        w.serialize(SequenceRow {
            repo_id: s.repo_id,
            kind: s.kind,
            symbols: encode_symbols(&s.symbols),
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `repo_id,kind,events` rows, events space-separated by type name.
pub fn write_pre_reduction<W: Write>(out: W, seqs: &[TeamSequence]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for s in seqs {
        let names: Vec<&str> = s.pre_reduction.iter().map(|t| t.as_str()).collect();
        w.serialize(PreReductionRow {
            repo_id: s.repo_id,
            kind: s.kind,
            events: names.join(" "),
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Reads sequences; the raw sequences are joined in by repo id when given.
pub fn read_sequences<R: Read, P: Read>(symbols: R, pre_reduction: Option<P>) -> Result<Vec<TeamSequence>> {
    let mut pre: HashMap<u64, Vec<EventType>> = HashMap::new();
    if let Some(src) = pre_reduction {
        for row in csv::Reader::from_reader(src).deserialize::<PreReductionRow>() {
            let row = row?;
            let events = row
                .events
                .split_whitespace()
                .map(|n| {
                    n.parse::<EventType>()
                        .map_err(|e| Error::InvalidParameter(format!("unknown event type {:?}", e.0)))
                })
                .collect::<Result<Vec<_>>>()?;
            pre.insert(row.repo_id, events);
        }
    }
    let mut out = Vec::new();
    for row in csv::Reader::from_reader(symbols).deserialize::<SequenceRow>() {
        let row = row?;
        out.push(TeamSequence {
            repo_id: row.repo_id,
            kind: row.kind,
            symbols: decode_symbols(&row.symbols)?,
            pre_reduction: pre.remove(&row.repo_id).unwrap_or_default(),
        });
    }
    Ok(out)
}
