//! Normalized event records and the activity filter.
//!
//! The ingestion format is newline-delimited JSON, one object per line:
//!
//! ```text
//! {"event_type":"Push","actor_id":1,"actor_login":"alice","repo_id":9,
//!  "created_at":"2019-06-01T00:00:00Z","org_owned_actor":false}
//! ```
//!
//! `comment_body` is optional and only allowed on comment-bearing types.
//! Unknown keys are ignored. Gzip input is detected by its magic bytes.

use std::collections::BTreeSet;
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::{DateTime, SecondsFormat, Utc};
use flate2::read::MultiGzDecoder;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The fourteen raw public event types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EventType {
    Push,
    PullRequest,
    Create,
    IssueComment,
    PullRequestReviewComment,
    Delete,
    Issues,
    Watch,
    Fork,
    Release,
    Gollum,
    Member,
    CommitComment,
    Public,
}

impl EventType {
    pub const ALL: [EventType; 14] = [
        EventType::Push,
        EventType::PullRequest,
        EventType::Create,
        EventType::IssueComment,
        EventType::PullRequestReviewComment,
        EventType::Delete,
        EventType::Issues,
        EventType::Watch,
        EventType::Fork,
        EventType::Release,
        EventType::Gollum,
        EventType::Member,
        EventType::CommitComment,
        EventType::Public,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EventType::Push => "Push",
            EventType::PullRequest => "PullRequest",
            EventType::Create => "Create",
            EventType::IssueComment => "IssueComment",
            EventType::PullRequestReviewComment => "PullRequestReviewComment",
            EventType::Delete => "Delete",
            EventType::Issues => "Issues",
            EventType::Watch => "Watch",
            EventType::Fork => "Fork",
            EventType::Release => "Release",
            EventType::Gollum => "Gollum",
            EventType::Member => "Member",
            EventType::CommitComment => "CommitComment",
            EventType::Public => "Public",
        }
    }

    /// Types whose records may carry a comment body.
    pub fn bears_comment(self) -> bool {
        matches!(
            self,
            EventType::IssueComment | EventType::PullRequestReviewComment | EventType::CommitComment
        )
    }

    /// Push and PullRequest: the contribution types behind activity and membership.
    pub fn is_contribution(self) -> bool {
        matches!(self, EventType::Push | EventType::PullRequest)
    }
}

impl fmt::Display for EventType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownEventType(pub String);

impl FromStr for EventType {
    type Err = UnknownEventType;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        EventType::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| UnknownEventType(s.to_string()))
    }
}

/// One timestamped actor action on a repository.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub event_type: EventType,
    pub actor_id: u64,
    pub actor_login: String,
    pub repo_id: u64,
    pub created_at: DateTime<Utc>,
    pub org_owned_actor: bool,
    pub comment_body: Option<String>,
}

#[derive(Deserialize)]
struct RawRecord {
    event_type: String,
    actor_id: u64,
    actor_login: String,
    repo_id: u64,
    created_at: String,
    org_owned_actor: bool,
    #[serde(default)]
    comment_body: Option<String>,
}

#[derive(Serialize)]
struct RecordOut<'a> {
    event_type: EventType,
    actor_id: u64,
    actor_login: &'a str,
    repo_id: u64,
    created_at: String,
    org_owned_actor: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    comment_body: Option<&'a str>,
}

impl Event {
    /// Serializes the event as one normalized record (no trailing newline).
    pub fn to_json_line(&self) -> String {
        let out = RecordOut {
            event_type: self.event_type,
            actor_id: self.actor_id,
            actor_login: &self.actor_login,
            repo_id: self.repo_id,
            created_at: self.created_at.to_rfc3339_opts(SecondsFormat::Secs, true),
            org_owned_actor: self.org_owned_actor,
            comment_body: self.comment_body.as_deref(),
        };
        serde_json::to_string(&out).expect("event serialization is infallible")
    }
}

/// Parses one normalized record. `line` is the 1-based line number used in errors.
pub fn parse_event_line(text: &str, line: usize) -> Result<Event> {
    let raw: RawRecord = serde_json::from_str(text).map_err(|e| Error::MalformedRecord {
        line,
        message: e.to_string(),
    })?;
    let event_type = raw
        .event_type
        .parse::<EventType>()
        .map_err(|UnknownEventType(value)| Error::UnknownEventType { line, value })?;
    let created_at = DateTime::parse_from_rfc3339(&raw.created_at)
        .map_err(|_| Error::InvalidTimestamp {
            line,
            value: raw.created_at.clone(),
        })?
        .with_timezone(&Utc);
    if created_at.timestamp_subsec_nanos() != 0 {
        return Err(Error::InvalidTimestamp {
            line,
            value: raw.created_at,
        });
    }
    if raw.actor_login.is_empty() {
        return Err(Error::MalformedRecord {
            line,
            message: "actor_login is empty".into(),
        });
    }
    if raw.comment_body.is_some() && !event_type.bears_comment() {
        return Err(Error::MalformedRecord {
            line,
            message: format!("comment_body not allowed on {event_type}"),
        });
    }
    Ok(Event {
        event_type,
        actor_id: raw.actor_id,
        actor_login: raw.actor_login,
        repo_id: raw.repo_id,
        created_at,
        org_owned_actor: raw.org_owned_actor,
        comment_body: raw.comment_body,
    })
}

/// How the stream reacts to a bad record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParseMode {
    /// The first parse error is yielded and iteration stops.
    #[default]
    Strict,
    /// Bad records are logged, counted and skipped.
    Lenient,
}

/// A skipped record in lenient mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub message: String,
}

const MAX_KEPT_DIAGNOSTICS: usize = 1000;

/// Single-pass iterator over the records of a byte stream.
///
/// Memory use is bounded by the longest line; only the first
/// thousand diagnostics are retained (the total is always counted).
pub struct EventStream<R> {
    reader: R,
    buf: String,
    line: usize,
    mode: ParseMode,
    done: bool,
    diagnostics: Vec<Diagnostic>,
    skipped: usize,
}

impl<R: BufRead> EventStream<R> {
    pub fn new(reader: R, mode: ParseMode) -> Self {
        EventStream {
            reader,
            buf: String::new(),
            line: 0,
            mode,
            done: false,
            diagnostics: Vec::new(),
            skipped: 0,
        }
    }

    pub fn diagnostics(&self) -> &[Diagnostic] {
        &self.diagnostics
    }

    /// Number of records skipped in lenient mode.
    pub fn skipped(&self) -> usize {
        self.skipped
    }
}

impl<R: BufRead> Iterator for EventStream<R> {
    type Item = Result<Event>;

    fn next(&mut self) -> Option<Self::Item> {
        while !self.done {
            self.buf.clear();
            match self.reader.read_line(&mut self.buf) {
                Ok(0) => self.done = true,
                Ok(_) => {
                    self.line += 1;
                    let text = self.buf.trim_end_matches(['\n', '\r']);
                    if text.trim().is_empty() {
                        continue;
                    }
                    match parse_event_line(text, self.line) {
                        Ok(ev) => return Some(Ok(ev)),
                        Err(e) if self.mode == ParseMode::Lenient => {
                            log::warn!("skipping record: {e}");
                            self.skipped += 1;
                            if self.diagnostics.len() < MAX_KEPT_DIAGNOSTICS {
                                self.diagnostics.push(Diagnostic {
                                    line: self.line,
                                    message: e.to_string(),
                                });
                            }
                        }
                        Err(e) => {
                            self.done = true;
                            return Some(Err(e));
                        }
                    }
                }
                Err(e) => {
                    self.done = true;
                    return Some(Err(Error::Io(e)));
                }
            }
        }
        None
    }
}

/// Streams events from any reader, transparently un-gzipping compressed input.
pub fn stream_events<R: Read + 'static>(source: R, mode: ParseMode) -> io::Result<EventStream<Box<dyn BufRead>>> {
    let mut buffered = BufReader::with_capacity(1 << 16, source);
    let gz = {
        let head = buffered.fill_buf()?;
        head.len() >= 2 && head[0] == 0x1f && head[1] == 0x8b
    };
    let reader: Box<dyn BufRead> = if gz {
        Box::new(BufReader::with_capacity(1 << 16, MultiGzDecoder::new(buffered)))
    } else {
        Box::new(buffered)
    };
    Ok(EventStream::new(reader, mode))
}

pub fn open_events(path: &Path, mode: ParseMode) -> Result<EventStream<Box<dyn BufRead>>> {
    let file = File::open(path)?;
    Ok(stream_events(file, mode)?)
}

/// Reads a whole file, line by line, without the streaming machinery.
pub fn parse_events_str(text: &str, mode: ParseMode) -> Result<(Vec<Event>, Vec<Diagnostic>)> {
    let mut events = Vec::new();
    let mut diags = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match parse_event_line(line, i + 1) {
            Ok(ev) => events.push(ev),
            Err(e) if mode == ParseMode::Lenient => diags.push(Diagnostic {
                line: i + 1,
                message: e.to_string(),
            }),
            Err(e) => return Err(e),
        }
    }
    Ok((events, diags))
}

pub fn write_events<'a, W: Write>(mut out: W, events: impl IntoIterator<Item = &'a Event>) -> io::Result<()> {
    for ev in events {
        writeln!(out, "{}", ev.to_json_line())?;
    }
    out.flush()
}

/// Users and repositories with at least one push or pull request.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ActivitySummary {
    pub active_users: BTreeSet<u64>,
    pub active_repos: BTreeSet<u64>,
}

pub fn filter_active<'a>(events: impl IntoIterator<Item = &'a Event>) -> ActivitySummary {
    let mut summary = ActivitySummary::default();
    for ev in events.into_iter().filter(|e| e.event_type.is_contribution()) {
        summary.active_users.insert(ev.actor_id);
        summary.active_repos.insert(ev.repo_id);
    }
    summary
}
