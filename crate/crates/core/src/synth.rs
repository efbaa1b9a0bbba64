//! Synthetic corpora with known ground truth.
//!
//! Two generators live here: team corpora (member event sequences with
//! optional planted motifs, comment arrangement and bot activity, emitted
//! as normalized events) and labeled bot-candidate accounts for the
//! classifier. Output is a pure function of the `SynthSpec`, seed included.

use std::collections::BTreeSet;

use chrono::{DateTime, Duration, Utc};
use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bots::Label;
use crate::error::{Error, Result};
use crate::event::{Event, EventType};
use crate::teams::{decode_symbols, encode_symbols, ReducedSymbol, TeamKind, TeamSequence};

/// Event-type shares of the reference corpus, in percent.
pub const REFERENCE_PERCENT: [(EventType, f64); 14] = [
    (EventType::Push, 44.1),
    (EventType::PullRequest, 15.6),
    (EventType::Create, 11.3),
    (EventType::IssueComment, 9.1),
    (EventType::PullRequestReviewComment, 5.6),
    (EventType::Delete, 4.7),
    (EventType::Issues, 4.0),
    (EventType::Watch, 2.4),
    (EventType::Fork, 1.3),
    (EventType::Release, 0.56),
    (EventType::Gollum, 0.38),
    (EventType::Member, 0.31),
    (EventType::CommitComment, 0.16),
    (EventType::Public, 0.07),
];

/// Reference shares normalized to sum to one.
pub fn reference_weights() -> Vec<(EventType, f64)> {
    let total: f64 = REFERENCE_PERCENT.iter().map(|(_, p)| p).sum();
    REFERENCE_PERCENT.iter().map(|&(t, p)| (t, p / total)).collect()
}

/// Background weights over the reduced alphabet derived from the reference
/// shares (Issues and IssueComment pooled), in `ReducedSymbol::ALL` order.
pub fn reduced_background() -> [f64; 6] {
    let share = |t: EventType| REFERENCE_PERCENT.iter().find(|(x, _)| *x == t).unwrap().1;
    [
        share(EventType::Push),
        share(EventType::PullRequest),
        share(EventType::Issues) + share(EventType::IssueComment),
        share(EventType::PullRequestReviewComment),
        share(EventType::Create),
        share(EventType::Delete),
    ]
}

/// Draws `n` raw event types i.i.d. from the reference shares.
pub fn draw_event_types(n: usize, seed: u64) -> Vec<EventType> {
    let weights = reference_weights();
    let dist = WeightedIndex::new(weights.iter().map(|w| w.1)).expect("valid weights");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| weights[dist.sample(&mut rng)].0).collect()
}

fn derive_seed(seed: u64, a: u64, b: u64) -> u64 {
    // splitmix64 finalizer over a simple combination
    let mut z = seed ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ b.wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn rng_for(seed: u64, a: u64, b: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, a, b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommentMode {
    /// Issue comments fall wherever the background puts them.
    #[default]
    Natural,
    /// Issue comments gathered into runs of two to four.
    Clustered,
    /// Issue comments spread so that no two are adjacent where possible.
    Interspersed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GroupSpec {
    pub name: String,
    pub n_teams: usize,
    /// Bot accounts acting on each team; zero makes a human-only group.
    pub bots_per_team: usize,
    pub comment_mode: CommentMode,
}

impl Default for GroupSpec {
    fn default() -> Self {
        GroupSpec {
            name: "group".into(),
            n_teams: 100,
            bots_per_team: 0,
            comment_mode: CommentMode::Natural,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedMotif {
    /// Compact symbol code, e.g. `"PRIP"` for PU PR IS PU.
    pub symbols: String,
    /// Insertion probability per group, in group order.
    pub rates: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BotAccountSpec {
    pub n_accounts: usize,
    pub bot_fraction: f64,
    /// Probability that an account draws its behavior from the other class.
    pub noise: f64,
}

impl Default for BotAccountSpec {
    fn default() -> Self {
        BotAccountSpec {
            n_accounts: 600,
            bot_fraction: 0.7,
            noise: 0.07,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub seed: u64,
    pub groups: Vec<GroupSpec>,
    pub min_length: usize,
    pub max_length: usize,
    /// Weights over PU, PR, IS, RC, CR, DE.
    pub background: [f64; 6],
    /// Probability that an IS symbol is an IssueComment rather than Issues.
    pub issue_comment_share: f64,
    pub motifs: Vec<PlantedMotif>,
    pub min_members: usize,
    pub max_members: usize,
    /// Upper bound on Watch/Fork events by non-members per team.
    pub max_outsider_events: usize,
    /// Team `i` of every group starts from the same background draw.
    pub paired_backbones: bool,
    pub bot_accounts: BotAccountSpec,
    pub start: DateTime<Utc>,
}

impl Default for SynthSpec {
    fn default() -> Self {
        let bg = reduced_background();
        SynthSpec {
            seed: 0,
            groups: vec![
                GroupSpec {
                    name: TeamKind::HumanBot.as_str().into(),
                    bots_per_team: 1,
                    ..GroupSpec::default()
                },
                GroupSpec {
                    name: TeamKind::HumanOnly.as_str().into(),
                    ..GroupSpec::default()
                },
            ],
            min_length: 10,
            max_length: 40,
            background: bg,
            issue_comment_share: 9.1 / 13.1,
            motifs: Vec::new(),
            min_members: 2,
            max_members: 4,
            max_outsider_events: 2,
            paired_backbones: false,
            bot_accounts: BotAccountSpec::default(),
            start: DateTime::from_timestamp(1_559_347_200, 0).expect("valid start"),
        }
    }
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidSpec(format!("{name} = {p} is not a probability")))
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.groups.is_empty() {
            return Err(Error::InvalidSpec("no groups".into()));
        }
        if self.min_length < 5 || self.max_length < self.min_length {
            return Err(Error::InvalidSpec(format!(
                "length range {}..={} must start at 5 or more",
                self.min_length, self.max_length
            )));
        }
        if self.background.iter().any(|w| !(w.is_finite() && *w >= 0.0)) || self.background.iter().sum::<f64>() <= 0.0 {
            return Err(Error::InvalidSpec(
                "background weights must be nonnegative, not all zero".into(),
            ));
        }
        check_probability("issue_comment_share", self.issue_comment_share)?;
        check_probability("bot_fraction", self.bot_accounts.bot_fraction)?;
        check_probability("noise", self.bot_accounts.noise)?;
        if self.min_members < 2 || self.max_members < self.min_members {
            return Err(Error::InvalidSpec("member range must start at 2 or more".into()));
        }
        let mut names = BTreeSet::new();
        for g in &self.groups {
            if !names.insert(g.name.as_str()) {
                return Err(Error::InvalidSpec(format!("duplicate group {:?}", g.name)));
            }
        }
        for m in &self.motifs {
            let symbols = decode_symbols(&m.symbols).map_err(|e| Error::InvalidSpec(e.to_string()))?;
            if symbols.is_empty() || symbols.len() > self.min_length {
                return Err(Error::InvalidSpec(format!(
                    "motif {:?} must fit the shortest sequence",
                    m.symbols
                )));
            }
            if m.rates.len() != self.groups.len() {
                return Err(Error::InvalidSpec(format!(
                    "motif {:?} needs one rate per group",
                    m.symbols
                )));
            }
            for &r in &m.rates {
                check_probability("motif rate", r)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Insertion {
    pub repo_id: u64,
    pub motif: usize,
    /// Position in the team's member sequence.
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestGroup {
    pub name: String,
    pub repo_ids: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub motifs: Vec<String>,
    pub groups: Vec<ManifestGroup>,
    pub insertions: Vec<Insertion>,
    /// Bot accounts acting on teams.
    pub team_bots: Vec<String>,
    /// Labeled bot-candidate accounts from the classifier fixture.
    pub labeled_accounts: Vec<(String, Label)>,
}

impl Manifest {
    pub fn bot_logins(&self) -> BTreeSet<&str> {
        self.team_bots
            .iter()
            .map(String::as_str)
            .chain(
                self.labeled_accounts
                    .iter()
                    .filter(|(_, l)| *l == Label::Bot)
                    .map(|(s, _)| s.as_str()),
            )
            .collect()
    }
}

pub struct SynthCorpus {
    pub events: Vec<Event>,
    pub manifest: Manifest,
}

/// A generated team before it is turned into timestamped events.
struct TeamDraft {
    repo_id: u64,
    group: usize,
    raw: Vec<EventType>,
    insertions: Vec<(usize, usize)>,
}

fn raw_for(sym: ReducedSymbol, comment_share: f64, rng: &mut ChaCha8Rng) -> EventType {
    match sym {
        ReducedSymbol::PU => EventType::Push,
        ReducedSymbol::PR => EventType::PullRequest,
        ReducedSymbol::IS => {
            if rng.gen_bool(comment_share) {
                EventType::IssueComment
            } else {
                EventType::Issues
            }
        }
        ReducedSymbol::RC => EventType::PullRequestReviewComment,
        ReducedSymbol::CR => EventType::Create,
        ReducedSymbol::DE => EventType::Delete,
    }
}

/// Re-places the issue comments of `raw` according to `mode`; length is kept.
fn arrange_comments(raw: Vec<EventType>, mode: CommentMode, rng: &mut ChaCha8Rng) -> Vec<EventType> {
    if mode == CommentMode::Natural {
        return raw;
    }
    let comments = raw.iter().filter(|&&t| t == EventType::IssueComment).count();
    let rest: Vec<EventType> = raw.into_iter().filter(|&t| t != EventType::IssueComment).collect();
    let gaps = rest.len() + 1;
    let mut per_gap = vec![0usize; gaps];
    match mode {
        CommentMode::Clustered => {
            let mut left = comments;
            let mut runs = Vec::new();
            while left > 0 {
                let r = rng.gen_range(2..=4).min(left);
                runs.push(r);
                left -= r;
            }
            let mut slots: Vec<usize> = (0..gaps).collect();
            slots.shuffle(rng);
            for (i, r) in runs.into_iter().enumerate() {
                per_gap[slots[i % gaps]] += r;
            }
        }
        CommentMode::Interspersed => {
            let mut slots: Vec<usize> = (0..gaps).collect();
            slots.shuffle(rng);
            for i in 0..comments {
                per_gap[slots[i % gaps]] += 1;
            }
        }
        CommentMode::Natural => unreachable!(),
    }
    let mut out = Vec::with_capacity(rest.len() + comments);
    for (i, n) in per_gap.into_iter().enumerate() {
        out.extend(std::iter::repeat_n(EventType::IssueComment, n));
        if i < rest.len() {
            out.push(rest[i]);
        }
    }
    out
}

fn draft_team(spec: &SynthSpec, motifs: &[Vec<ReducedSymbol>], group: usize, index: usize, repo_id: u64) -> TeamDraft {
    let background = WeightedIndex::new(spec.background).expect("validated weights");
    let mut rng = rng_for(spec.seed, 1 + group as u64, index as u64);
    let mut backbone_rng = if spec.paired_backbones {
        rng_for(spec.seed, 0, index as u64)
    } else {
        rng.clone()
    };
    loop {
        let len = backbone_rng.gen_range(spec.min_length..=spec.max_length);
        let symbols: Vec<ReducedSymbol> = (0..len)
            .map(|_| ReducedSymbol::ALL[background.sample(&mut backbone_rng)])
            .collect();
        let raw: Vec<EventType> = symbols
            .iter()
            .map(|&s| raw_for(s, spec.issue_comment_share, &mut backbone_rng))
            .collect();
        let mut raw = arrange_comments(raw, spec.groups[group].comment_mode, &mut rng);

        let mut taken = vec![false; raw.len()];
        let mut insertions = Vec::new();
        for (mi, m) in motifs.iter().enumerate() {
            if !rng.gen_bool(spec.motifs[mi].rates[group]) {
                continue;
            }
            for _ in 0..32 {
                let off = rng.gen_range(0..=raw.len() - m.len());
                if taken[off..off + m.len()].iter().any(|&t| t) {
                    continue;
                }
                for (k, &s) in m.iter().enumerate() {
                    raw[off + k] = if s == ReducedSymbol::IS {
                        EventType::IssueComment
                    } else {
                        raw_for(s, spec.issue_comment_share, &mut rng)
                    };
                    taken[off + k] = true;
                }
                insertions.push((mi, off));
                break;
            }
        }
        if raw.iter().filter(|t| t.is_contribution()).count() >= spec.min_members {
            return TeamDraft {
                repo_id,
                group,
                raw,
                insertions,
            };
        }
    }
}

const BOT_TEMPLATES: [&str; 6] = [
    "Coverage report: {n}% of changed lines covered, {m} files reviewed",
    "This pull request has been automatically marked as stale after {n} days",
    "Build {n} passed on all {m} platforms",
    "Bumps dependency from version {n} to {m}",
    "Thanks for the contribution! Please sign the CLA before merge {n}",
    "Deployment preview ready at build {n} revision {m}",
];

const WORDS: [&str; 48] = [
    "fix",
    "this",
    "looks",
    "good",
    "but",
    "we",
    "should",
    "check",
    "the",
    "edge",
    "case",
    "when",
    "input",
    "is",
    "empty",
    "maybe",
    "refactor",
    "later",
    "agree",
    "thanks",
    "tests",
    "fail",
    "locally",
    "on",
    "windows",
    "can",
    "you",
    "rebase",
    "please",
    "merged",
    "docs",
    "need",
    "update",
    "nice",
    "catch",
    "why",
    "not",
    "use",
    "iterator",
    "here",
    "perf",
    "regression",
    "benchmark",
    "numbers",
    "see",
    "issue",
    "above",
    "ok",
];

fn template_comment(template: &str, rng: &mut ChaCha8Rng) -> String {
    template
        .replace("{n}", &rng.gen_range(1..100).to_string())
        .replace("{m}", &rng.gen_range(1..20).to_string())
}

fn free_comment(rng: &mut ChaCha8Rng) -> String {
    let n = rng.gen_range(3..12);
    (0..n)
        .map(|_| *WORDS.choose(rng).unwrap())
        .collect::<Vec<_>>()
        .join(" ")
}

const BOT_NAMES: [&str; 8] = [
    "ci", "deploy", "stale", "renovate", "coverage", "release", "lint", "merge",
];
const HUMAN_BOT_NAMES: [(&str, &str); 6] = [
    ("robotics", "middle"),
    ("abbot", "end"),
    ("talbot", "end"),
    ("botany", "beginning"),
    ("cabot", "end"),
    ("lobotomy", "middle"),
];

fn bot_login(i: usize, rng: &mut ChaCha8Rng) -> String {
    let base = BOT_NAMES[rng.gen_range(0..BOT_NAMES.len())];
    match rng.gen_range(0..20) {
        0..=11 => format!("{base}{i}-bot"),
        12..=16 => format!("bot-{base}{i}"),
        _ => format!("{base}bot{i}x"),
    }
}

fn human_candidate_login(i: usize, rng: &mut ChaCha8Rng) -> String {
    let (base, placement) = HUMAN_BOT_NAMES[rng.gen_range(0..HUMAN_BOT_NAMES.len())];
    match placement {
        "end" => format!("dev{i}-{base}"),
        "beginning" => format!("{base}-dev{i}"),
        _ => format!("x{base}{i}"),
    }
}

/// One labeled account with its full event history.
#[derive(Debug, Clone, PartialEq)]
pub struct AccountFixture {
    pub login: String,
    pub label: Label,
    pub events: Vec<Event>,
}

/// Event types an account of the given behavior class produces.
fn account_behavior(bot_like: bool, rng: &mut ChaCha8Rng) -> (Vec<EventType>, usize, Option<usize>, bool) {
    // (event type repertoire, number of events, template index or free text, org owned)
    if bot_like {
        if rng.gen_bool(0.7) {
            let mut types = vec![EventType::IssueComment];
            if rng.gen_bool(0.4) {
                types.push(EventType::PullRequestReviewComment);
            }
            (
                types,
                rng.gen_range(3..25),
                Some(rng.gen_range(0..BOT_TEMPLATES.len())),
                rng.gen_bool(0.8),
            )
        } else {
            let mut types = vec![EventType::Push];
            if rng.gen_bool(0.5) {
                types.push(EventType::Create);
            }
            (types, rng.gen_range(3..25), None, rng.gen_bool(0.8))
        }
    } else {
        let n_types = rng.gen_range(2..=7);
        let mut pool: Vec<EventType> = EventType::ALL.to_vec();
        pool.shuffle(rng);
        let mut types: Vec<EventType> = pool.into_iter().take(n_types).collect();
        if rng.gen_bool(0.8) && !types.contains(&EventType::IssueComment) {
            types[0] = EventType::IssueComment;
        }
        (types, rng.gen_range(n_types.max(4)..40), None, rng.gen_bool(0.25))
    }
}

fn account_events(
    login: &str,
    actor_id: u64,
    repo_id: u64,
    bot_like: bool,
    start: DateTime<Utc>,
    rng: &mut ChaCha8Rng,
) -> Vec<Event> {
    let (types, n, template, org) = account_behavior(bot_like, rng);
    let mut t = start + Duration::seconds(rng.gen_range(0..86_400));
    (0..n.max(types.len()))
        .map(|i| {
            let ty = if i < types.len() {
                types[i]
            } else {
                *types.choose(rng).unwrap()
            };
            t += Duration::seconds(rng.gen_range(60..7200));
            let comment_body = ty.bears_comment().then(|| match template {
                Some(k) => template_comment(BOT_TEMPLATES[k], rng),
                None => free_comment(rng),
            });
            Event {
                event_type: ty,
                actor_id,
                actor_login: login.to_string(),
                repo_id,
                created_at: t,
                org_owned_actor: org,
                comment_body,
            }
        })
        .collect()
}

const FIXTURE_ACTOR_BASE: u64 = 5_000_000;
const FIXTURE_REPO_BASE: u64 = 5_000_000;

/// Labeled accounts whose logins all contain "bot".
///
/// Bots comment from a single template or only push; humans use several
/// event types and free-form comments. With probability `noise` an account
/// behaves like the other class while keeping its label.
pub fn generate_bot_accounts(spec: &SynthSpec) -> Result<Vec<AccountFixture>> {
    spec.validate()?;
    let b = &spec.bot_accounts;
    let n_bots = (b.n_accounts as f64 * b.bot_fraction).round() as usize;
    let mut rng = rng_for(spec.seed, 0xB07, 0);
    let mut labels: Vec<Label> = (0..b.n_accounts)
        .map(|i| if i < n_bots { Label::Bot } else { Label::Human })
        .collect();
    labels.shuffle(&mut rng);
    Ok(labels
        .into_iter()
        .enumerate()
        .map(|(i, label)| {
            let mut r = rng_for(spec.seed, 0xB08, i as u64);
            let is_bot = label == Label::Bot;
            let login = if is_bot {
                bot_login(i, &mut r)
            } else {
                human_candidate_login(i, &mut r)
            };
            let bot_like = is_bot != r.gen_bool(b.noise);
            let events = account_events(
                &login,
                FIXTURE_ACTOR_BASE + i as u64,
                FIXTURE_REPO_BASE + i as u64,
                bot_like,
                spec.start,
                &mut r,
            );
            AccountFixture { login, label, events }
        })
        .collect())
}

const HUMAN_ACTOR_BASE: u64 = 1_000_000;
const TEAM_BOT_ACTOR_BASE: u64 = 3_000_000;
const OUTSIDER_ACTOR_BASE: u64 = 4_000_000;
const REPO_BASE: u64 = 1000;

fn decoded_motifs(spec: &SynthSpec) -> Vec<Vec<ReducedSymbol>> {
    spec.motifs
        .iter()
        .map(|m| decode_symbols(&m.symbols).expect("validated"))
        .collect()
}

fn drafts(spec: &SynthSpec) -> Vec<TeamDraft> {
    let motifs = decoded_motifs(spec);
    let mut out = Vec::new();
    let mut repo = REPO_BASE;
    for (gi, g) in spec.groups.iter().enumerate() {
        for ti in 0..g.n_teams {
            out.push(draft_team(spec, &motifs, gi, ti, repo));
            repo += 1;
        }
    }
    out
}

fn manifest_for(spec: &SynthSpec, drafts: &[TeamDraft]) -> Manifest {
    Manifest {
        seed: spec.seed,
        motifs: spec.motifs.iter().map(|m| m.symbols.clone()).collect(),
        groups: spec
            .groups
            .iter()
            .enumerate()
            .map(|(gi, g)| ManifestGroup {
                name: g.name.clone(),
                repo_ids: drafts.iter().filter(|d| d.group == gi).map(|d| d.repo_id).collect(),
            })
            .collect(),
        insertions: drafts
            .iter()
            .flat_map(|d| {
                d.insertions.iter().map(|&(motif, offset)| Insertion {
                    repo_id: d.repo_id,
                    motif,
                    offset,
                })
            })
            .collect(),
        team_bots: Vec::new(),
        labeled_accounts: Vec::new(),
    }
}

/// Member sequences only, grouped as in the `SynthSpec`; no events are built.
///
/// The kind of a sequence is human-bot when its group has bots.
pub fn generate_team_sequences(spec: &SynthSpec) -> Result<(Vec<TeamSequence>, Manifest)> {
    spec.validate()?;
    let drafts = drafts(spec);
    let seqs = drafts
        .iter()
        .map(|d| TeamSequence {
            repo_id: d.repo_id,
            kind: if spec.groups[d.group].bots_per_team > 0 {
                TeamKind::HumanBot
            } else {
                TeamKind::HumanOnly
            },
            symbols: crate::teams::reduce_alphabet(&d.raw),
            pre_reduction: d.raw.clone(),
        })
        .collect();
    Ok((seqs, manifest_for(spec, &drafts)))
}

struct Actor {
    id: u64,
    login: String,
    org: bool,
}

/// Full corpus: team events (members, bots, outsiders) plus the labeled
/// bot-candidate fixture, sorted by time with ties in generation order.
pub fn generate(spec: &SynthSpec) -> Result<SynthCorpus> {
    spec.validate()?;
    let drafts = drafts(spec);
    let mut manifest = manifest_for(spec, &drafts);

    let bot_teams: usize = spec
        .groups
        .iter()
        .filter(|g| g.bots_per_team > 0)
        .map(|g| g.n_teams)
        .sum();
    let max_bots = spec.groups.iter().map(|g| g.bots_per_team).max().unwrap_or(0);
    let pool_size = if bot_teams == 0 {
        0
    } else {
        (bot_teams / 4).max(3).max(max_bots)
    };
    let mut pool_rng = rng_for(spec.seed, 0xB0B, 0);
    let bot_pool: Vec<(Actor, usize)> = (0..pool_size)
        .map(|i| {
            let base = BOT_NAMES[i % BOT_NAMES.len()];
            let login = if i % 3 == 2 {
                format!("bot-{base}{i}")
            } else {
                format!("{base}{i}-bot")
            };
            (
                Actor {
                    id: TEAM_BOT_ACTOR_BASE + i as u64,
                    login,
                    org: pool_rng.gen_bool(0.9),
                },
                pool_rng.gen_range(0..BOT_TEMPLATES.len()),
            )
        })
        .collect();
    let mut used_bots = BTreeSet::new();

    let mut events = Vec::new();
    let mut next_human = HUMAN_ACTOR_BASE;
    for d in &drafts {
        let g = &spec.groups[d.group];
        let mut rng = rng_for(spec.seed, 0xE7, d.repo_id);
        let contributions = d.raw.iter().filter(|t| t.is_contribution()).count();
        let n_members = rng.gen_range(spec.min_members..=spec.max_members).min(contributions);
        let members: Vec<Actor> = (0..n_members)
            .map(|_| {
                next_human += 1;
                Actor {
                    id: next_human,
                    login: format!("dev{next_human}"),
                    org: rng.gen_bool(0.1),
                }
            })
            .collect();

        // (type, actor, comment) in team order
        let mut timeline: Vec<(EventType, &Actor, Option<String>)> = Vec::new();
        let mut contrib_seen = 0;
        for &t in &d.raw {
            let actor = if t.is_contribution() && contrib_seen < n_members {
                contrib_seen += 1;
                &members[contrib_seen - 1]
            } else {
                &members[rng.gen_range(0..n_members)]
            };
            let body = t.bears_comment().then(|| free_comment(&mut rng));
            timeline.push((t, actor, body));
        }
        let picked: Vec<usize> = if g.bots_per_team > 0 {
            rand::seq::index::sample(&mut rng, bot_pool.len(), g.bots_per_team.min(bot_pool.len())).into_vec()
        } else {
            Vec::new()
        };
        for bi in picked {
            let (bot, template) = &bot_pool[bi];
            used_bots.insert(bi);
            let n = rng.gen_range(1..=1 + d.raw.len() / 5);
            for _ in 0..n {
                let pos = rng.gen_range(0..=timeline.len());
                let body = template_comment(BOT_TEMPLATES[*template], &mut rng);
                timeline.insert(pos, (EventType::IssueComment, bot, Some(body)));
            }
        }
        let outsiders: Vec<Actor> = (0..rng.gen_range(0..=spec.max_outsider_events))
            .map(|k| Actor {
                id: OUTSIDER_ACTOR_BASE + d.repo_id * 8 + k as u64,
                login: format!("user{}", d.repo_id * 8 + k as u64),
                org: false,
            })
            .collect();
        let outsider_refs: Vec<&Actor> = outsiders.iter().collect();
        for o in outsider_refs {
            let t = if rng.gen_bool(0.6) {
                EventType::Watch
            } else {
                EventType::Fork
            };
            let pos = rng.gen_range(0..=timeline.len());
            timeline.insert(pos, (t, o, None));
        }

        let mut ts = spec.start + Duration::seconds(rng.gen_range(0..25 * 86_400));
        for (t, actor, body) in timeline {
            ts += Duration::seconds(rng.gen_range(1..3600));
            events.push(Event {
                event_type: t,
                actor_id: actor.id,
                actor_login: actor.login.clone(),
                repo_id: d.repo_id,
                created_at: ts,
                org_owned_actor: actor.org,
                comment_body: body,
            });
        }
    }
    manifest.team_bots = used_bots.into_iter().map(|i| bot_pool[i].0.login.clone()).collect();

    if spec.bot_accounts.n_accounts > 0 {
        for acc in generate_bot_accounts(spec)? {
            manifest.labeled_accounts.push((acc.login, acc.label));
            events.extend(acc.events);
        }
    }
    events.sort_by_key(|e| e.created_at);
    Ok(SynthCorpus { events, manifest })
}

/// Compact code of a planted motif as stored in the manifest.
pub fn motif_code(symbols: &[ReducedSymbol]) -> String {
    encode_symbols(symbols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bots::{account_histories, extract_features};
    use crate::teams::{build_teams, TeamSequence as Seq};
    use std::collections::HashMap;

    fn small_spec(seed: u64) -> SynthSpec {
        SynthSpec {
            seed,
            groups: vec![
                GroupSpec {
                    name: "human-bot".into(),
                    n_teams: 20,
                    bots_per_team: 1,
                    ..GroupSpec::default()
                },
                GroupSpec {
                    name: "human-only".into(),
                    n_teams: 30,
                    ..GroupSpec::default()
                },
            ],
            motifs: vec![PlantedMotif {
                symbols: "PRIP".into(),
                rates: vec![0.8, 0.0],
            }],
            bot_accounts: BotAccountSpec {
                n_accounts: 40,
                ..BotAccountSpec::default()
            },
            ..SynthSpec::default()
        }
    }

    #[test]
    fn deterministic() {
        let a = generate(&small_spec(3)).unwrap();
        let b = generate(&small_spec(3)).unwrap();
        assert_eq!(a.events, b.events);
        assert_eq!(a.manifest, b.manifest);
        assert_ne!(generate(&small_spec(4)).unwrap().events, a.events);
    }

    #[test]
    fn events_round_trip_through_the_parser() {
        let c = generate(&small_spec(5)).unwrap();
        for (i, e) in c.events.iter().enumerate() {
            assert_eq!(&crate::event::parse_event_line(&e.to_json_line(), i + 1).unwrap(), e);
        }
    }

    #[test]
    fn team_building_recovers_member_sequences() {
        let spec = small_spec(6);
        let c = generate(&spec).unwrap();
        let (seqs, manifest) = generate_team_sequences(&spec).unwrap();
        let labels: HashMap<String, Label> = c
            .manifest
            .bot_logins()
            .into_iter()
            .map(|l| (l.to_string(), Label::Bot))
            .collect();
        let built: Vec<Seq> = build_teams(&c.events, &labels).iter().map(Seq::from_team).collect();
        assert_eq!(built, seqs);
        assert_eq!(manifest.insertions, c.manifest.insertions);
    }

    #[test]
    fn insertions_are_present_at_their_offsets() {
        let (seqs, manifest) = generate_team_sequences(&small_spec(7)).unwrap();
        assert!(!manifest.insertions.is_empty());
        let motif = decode_symbols(&manifest.motifs[0]).unwrap();
        for ins in &manifest.insertions {
            let s = seqs.iter().find(|s| s.repo_id == ins.repo_id).unwrap();
            assert_eq!(&s.symbols[ins.offset..ins.offset + motif.len()], motif.as_slice());
        }
        let human_only = &manifest.groups[1].repo_ids;
        assert!(manifest.insertions.iter().all(|i| !human_only.contains(&i.repo_id)));
    }

    #[test]
    fn comment_modes_keep_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let raw: Vec<EventType> = [
            EventType::IssueComment,
            EventType::Push,
            EventType::IssueComment,
            EventType::Create,
        ]
        .repeat(5);
        for mode in [CommentMode::Clustered, CommentMode::Interspersed] {
            let out = arrange_comments(raw.clone(), mode, &mut rng);
            assert_eq!(out.len(), raw.len());
            let count = |v: &[EventType]| v.iter().filter(|&&t| t == EventType::IssueComment).count();
            assert_eq!(count(&out), count(&raw));
        }
        let spread = arrange_comments(raw, CommentMode::Interspersed, &mut rng);
        assert!(spread
            .windows(2)
            .all(|w| w != [EventType::IssueComment, EventType::IssueComment]));
    }

    #[test]
    fn fixture_without_noise_is_separable() {
        let spec = SynthSpec {
            bot_accounts: BotAccountSpec {
                n_accounts: 200,
                bot_fraction: 0.7,
                noise: 0.0,
            },
            ..SynthSpec::default()
        };
        let accounts = generate_bot_accounts(&spec).unwrap();
        assert_eq!(accounts.iter().filter(|a| a.label == Label::Bot).count(), 140);
        for a in &accounts {
            assert!(a.login.to_lowercase().contains("bot"));
            let refs: Vec<&Event> = a.events.iter().collect();
            let f = extract_features(&a.login, &refs, 200).unwrap();
            match a.label {
                Label::Bot => assert!(f.unique_event_types <= 2),
                Label::Human => assert!(f.unique_event_types >= 2),
            }
        }
        let all: Vec<Event> = accounts.iter().flat_map(|a| a.events.clone()).collect();
        assert_eq!(account_histories(&all).len(), 200);
    }

    #[test]
    fn invalid_specs() {
        let s = SynthSpec {
            min_length: 4,
            ..SynthSpec::default()
        };
        assert!(matches!(s.validate(), Err(Error::InvalidSpec(_))));
        let s = SynthSpec {
            background: [0.0; 6],
            ..SynthSpec::default()
        };
        assert!(s.validate().is_err());
        let mut s = small_spec(0);
        s.motifs[0].rates = vec![1.5, 0.0];
        assert!(s.validate().is_err());
    }

    #[test]
    fn background_frequencies_converge() {
        let spec = SynthSpec {
            groups: vec![GroupSpec {
                name: "a".into(),
                n_teams: 4000,
                ..GroupSpec::default()
            }],
            ..SynthSpec::default()
        };
        let (seqs, _) = generate_team_sequences(&spec).unwrap();
        let mut counts = [0usize; 6];
        for s in &seqs {
            for &x in &s.symbols {
                counts[x as usize] += 1;
            }
        }
        let total: usize = counts.iter().sum();
        assert!(total >= 100_000);
        let bg = spec.background;
        let wsum: f64 = bg.iter().sum();
        for i in 0..6 {
            let got = 100.0 * counts[i] as f64 / total as f64;
            assert!((got - 100.0 * bg[i] / wsum).abs() < 1.0, "{i}: {got}");
        }
    }
}
