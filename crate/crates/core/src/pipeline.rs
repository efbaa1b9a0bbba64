//! End-to-end orchestration over an output directory of plain CSV/JSON
//! artifacts. Each stage reads its inputs from the directory and writes its
//! outputs back, so stages can be run one at a time or all together.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use log::{info, warn};
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::bots::{
    self, candidate_features, evaluate_cv, join_labels, resolve_labels, CVReport, Classifier, ClassifierKind,
    ClassifierParams, Label, Prediction, DEFAULT_COMMENT_CAP,
};
use crate::error::{Error, Result};
use crate::event::{filter_active, open_events, write_events, Event, ParseMode};
use crate::matcher::{self, match_teams, median_table, MatchedPair, MedianTable, TeamVector};
use crate::motif::{self, motif_graph, window_sweep, ContrastMotifSet, MotifParams, SequenceGroup};
use crate::stats::{compare_run_lengths, proportions, Proportion, RunLengthComparison, RunLengthMode};
use crate::synth::{self, SynthSpec};
use crate::teams::{self, build_teams, filter_short, FrequencyDims, TeamKind, TeamSequence};

pub const EVENTS: &str = "events.norm.ndjson";
pub const INGEST_SUMMARY: &str = "ingest.json";
pub const BOT_FEATURES: &str = "bot_features.csv";
pub const BOT_PREDICTIONS: &str = "bot_predictions.csv";
pub const CV_REPORT: &str = "cv_report.json";
pub const MODEL: &str = "model.json";
pub const TEAMS: &str = "teams.csv";
pub const TEAM_SUMMARY: &str = "team_summary.json";
pub const SEQUENCES: &str = "sequences.csv";
pub const SEQUENCES_PRE: &str = "sequences_pre.csv";
pub const MATCHES: &str = "matches.csv";
pub const MEDIANS: &str = "medians.csv";
pub const MOTIFS: &str = "motifs.csv";
pub const MOTIF_SWEEP: &str = "motif_sweep.json";
pub const RUN_LENGTHS: &str = "run_lengths.json";
pub const PROPORTIONS: &str = "proportions.csv";
pub const REPORT: &str = "report.json";
pub const STALE_MARKER: &str = "STALE";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowRange {
    pub min: usize,
    pub max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub inputs: Vec<PathBuf>,
    pub labels: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub parse_mode: ParseMode,
    pub classifier: ClassifierKind,
    pub classifier_params: ClassifierParams,
    /// Also cross-validate the other classifier kind on the same folds.
    pub compare_classifiers: bool,
    pub comment_cap: usize,
    pub k: usize,
    pub seed: Option<u64>,
    /// Refuse to run without an explicit seed.
    pub reproducible: bool,
    pub min_len: usize,
    pub windows: WindowRange,
    pub highlight_w: usize,
    pub motif: MotifParams,
    pub frequency_dims: FrequencyDims,
    pub run_length_mode: RunLengthMode,
    /// Worker threads; `None` uses every core.
    pub threads: Option<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            inputs: Vec::new(),
            labels: None,
            output_dir: PathBuf::from("out"),
            parse_mode: ParseMode::Strict,
            classifier: ClassifierKind::GradientBoosting,
            classifier_params: ClassifierParams::default(),
            compare_classifiers: true,
            comment_cap: DEFAULT_COMMENT_CAP,
            k: 5,
            seed: None,
            reproducible: true,
            min_len: teams::DEFAULT_MIN_LEN,
            windows: WindowRange { min: 2, max: 5 },
            highlight_w: 4,
            motif: MotifParams::default(),
            frequency_dims: FrequencyDims::Six,
            run_length_mode: RunLengthMode::PerTeamMeans,
            threads: None,
        }
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<PipelineConfig> {
        serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<PipelineConfig> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.k < 2 {
            return bad(format!("k must be at least 2, got {}", self.k));
        }
        if self.reproducible && self.seed.is_none() {
            return bad("a seed is required in reproducible mode".into());
        }
        if self.min_len == 0 {
            return bad("min_len must be at least 1".into());
        }
        if self.windows.min == 0 || self.windows.max < self.windows.min {
            return bad(format!(
                "empty window range {}..={}",
                self.windows.min, self.windows.max
            ));
        }
        if !(self.motif.alpha > 0.0 && self.motif.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.motif.alpha));
        }
        if self.motif.candidates == Some(0) {
            return bad("candidates must be positive".into());
        }
        if self.highlight_w == 0 {
            return bad("highlight_w must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.classifier_params.threshold) {
            return bad("threshold must lie in [0, 1]".into());
        }
        if self.threads == Some(0) {
            return bad("threads must be positive".into());
        }
        Ok(())
    }

    fn seed_value(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.output_dir.join(name)
    }
}

fn upstream(config: &PipelineConfig, name: &str, stage: &str) -> Result<PathBuf> {
    let path = config.path(name);
    if path.exists() {
        Ok(path)
    } else {
        Err(Error::MissingUpstreamArtifact {
            path,
            hint: format!("run `teamflow {stage}` first"),
        })
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

/// Writes through a temporary file so a failed stage never leaves a torn artifact.
fn write_atomic(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        body(&mut w)?;
        w.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)?;
        Ok(())
    })
}

fn load_events(path: &Path) -> Result<Vec<Event>> {
    open_events(path, ParseMode::Strict)?.collect()
}

fn stage<T>(name: &'static str, path: PathBuf, f: impl FnOnce() -> Result<T>) -> Result<T> {
    info!("stage {name}");
    f().map_err(|e| e.in_stage(name, path))
}

// ---- ingest ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub events: usize,
    pub skipped_records: usize,
    pub active_users: usize,
    pub active_repos: usize,
    pub diagnostics: Vec<String>,
}

/// Parses every input and writes the normalized event file.
pub fn ingest(config: &PipelineConfig) -> Result<IngestSummary> {
    let out = config.path(EVENTS);
    stage("ingest", out.clone(), || {
        if config.inputs.is_empty() {
            return Err(Error::InvalidConfig("no input files".into()));
        }
        fs::create_dir_all(&config.output_dir)?;
        let mut events = Vec::new();
        let mut diagnostics = Vec::new();
        let mut skipped = 0;
        for input in &config.inputs {
            let mut stream = open_events(input, config.parse_mode).map_err(|e| e.in_stage("ingest", input.clone()))?;
            for ev in stream.by_ref() {
                events.push(ev.map_err(|e| e.in_stage("ingest", input.clone()))?);
            }
            skipped += stream.skipped();
            diagnostics.extend(
                stream
                    .diagnostics()
                    .iter()
                    .map(|d| format!("{}:{}: {}", input.display(), d.line, d.message)),
            );
        }
        if skipped > 0 {
            warn!("skipped {skipped} malformed records");
        }
        if events.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        write_atomic(&out, |w| Ok(write_events(w, &events)?))?;
        let active = filter_active(&events);
        let summary = IngestSummary {
            events: events.len(),
            skipped_records: skipped,
            active_users: active.active_users.len(),
            active_repos: active.active_repos.len(),
            diagnostics,
        };
        write_json(&config.path(INGEST_SUMMARY), &summary)?;
        Ok(summary)
    })
}

// ---- bot detection ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BotSummary {
    pub candidates: usize,
    pub labeled: usize,
    pub labels_without_events: Vec<String>,
    pub predicted_bots: usize,
    pub cv: Vec<CVReport>,
}

fn load_labels(config: &PipelineConfig) -> Result<Vec<(String, Label)>> {
    match &config.labels {
        Some(p) if !p.exists() => Err(Error::MissingUpstreamArtifact {
            path: p.clone(),
            hint: "check the labels path in the config or --labels".into(),
        }),
        Some(p) => bots::read_labels(File::open(p)?),
        None => Err(Error::InvalidConfig("a labels file is required".into())),
    }
}

fn train_and_predict(
    config: &PipelineConfig,
    features: &BTreeMap<String, bots::AccountFeatures>,
    labels: &[(String, Label)],
    with_cv: bool,
) -> Result<(Classifier, BTreeMap<String, Prediction>, BotSummary)> {
    let (joined, missing) = join_labels(features, labels);
    if !missing.is_empty() {
        warn!("{} labeled accounts have no events", missing.len());
    }
    let x: Vec<_> = joined.iter().map(|a| a.features.clone()).collect();
    let y: Vec<Label> = joined.iter().map(|a| a.label).collect();
    let mut cv = Vec::new();
    if with_cv {
        let mut kinds = vec![config.classifier];
        if config.compare_classifiers {
            kinds.push(match config.classifier {
                ClassifierKind::GradientBoosting => ClassifierKind::LogisticRegression,
                ClassifierKind::LogisticRegression => ClassifierKind::GradientBoosting,
            });
        }
        for kind in kinds {
            cv.push(evaluate_cv(
                kind,
                &x,
                &y,
                &config.classifier_params,
                config.k,
                config.seed_value(),
            )?);
        }
    }
    let model = bots::train(config.classifier, &x, &y, &config.classifier_params)?;
    let predictions = features
        .iter()
        .map(|(login, f)| Ok((login.clone(), model.predict(f)?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    let summary = BotSummary {
        candidates: features.len(),
        labeled: joined.len(),
        labels_without_events: missing,
        predicted_bots: predictions.values().filter(|p| p.label == Label::Bot).count(),
        cv,
    };
    Ok((model, predictions, summary))
}

/// Features, cross-validation, final model and predictions for every candidate.
pub fn detect_bots(config: &PipelineConfig) -> Result<BotSummary> {
    stage("detect-bots", config.path(BOT_PREDICTIONS), || {
        let events = load_events(&upstream(config, EVENTS, "ingest")?)?;
        let labels = load_labels(config)?;
        let features = candidate_features(&events, config.comment_cap)?;
        write_atomic(&config.path(BOT_FEATURES), |w| bots::write_features(w, &features))?;
        let (model, predictions, summary) = train_and_predict(config, &features, &labels, true)?;
        write_json(&config.path(CV_REPORT), &summary)?;
        write_atomic(&config.path(MODEL), |w| {
            writeln!(w, "{}", model.to_json()?)?;
            Ok(())
        })?;
        write_atomic(&config.path(BOT_PREDICTIONS), |w| {
            bots::write_predictions(w, &predictions)
        })?;
        Ok(summary)
    })
}

/// Predictions from persisted features; only the predictions file is written.
pub fn detect_bots_from_features(config: &PipelineConfig) -> Result<BotSummary> {
    stage("detect-bots", config.path(BOT_PREDICTIONS), || {
        let features = bots::read_features(File::open(upstream(config, BOT_FEATURES, "detect-bots")?)?)?;
        let labels = load_labels(config)?;
        let (_, predictions, summary) = train_and_predict(config, &features, &labels, false)?;
        write_atomic(&config.path(BOT_PREDICTIONS), |w| {
            bots::write_predictions(w, &predictions)
        })?;
        Ok(summary)
    })
}

// ---- teams ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamSummary {
    pub teams_human_bot: usize,
    pub teams_human_only: usize,
    pub kept_human_bot: usize,
    pub kept_human_only: usize,
    pub min_len: usize,
}

fn count_kind<'a>(kinds: impl IntoIterator<Item = &'a TeamKind>, kind: TeamKind) -> usize {
    kinds.into_iter().filter(|&&k| k == kind).count()
}

pub fn build_team_sequences(config: &PipelineConfig) -> Result<TeamSummary> {
    stage("build-teams", config.path(SEQUENCES), || {
        let events = load_events(&upstream(config, EVENTS, "ingest")?)?;
        let predictions = bots::read_predictions(File::open(upstream(config, BOT_PREDICTIONS, "detect-bots")?)?)?;
        let manual = match &config.labels {
            Some(_) => load_labels(config)?,
            None => Vec::new(),
        };
        let resolved: HashMap<String, Label> = resolve_labels(&predictions, &manual);
        let teams = build_teams(&events, &resolved);
        let seqs: Vec<TeamSequence> = teams.iter().map(TeamSequence::from_team).collect();
        let kept = filter_short(seqs, config.min_len)?;
        write_atomic(&config.path(TEAMS), |w| teams::write_teams(w, &teams))?;
        write_atomic(&config.path(SEQUENCES), |w| teams::write_sequences(w, &kept))?;
        write_atomic(&config.path(SEQUENCES_PRE), |w| teams::write_pre_reduction(w, &kept))?;
        let summary = TeamSummary {
            teams_human_bot: count_kind(teams.iter().map(|t| &t.kind), TeamKind::HumanBot),
            teams_human_only: count_kind(teams.iter().map(|t| &t.kind), TeamKind::HumanOnly),
            kept_human_bot: count_kind(kept.iter().map(|s| &s.kind), TeamKind::HumanBot),
            kept_human_only: count_kind(kept.iter().map(|s| &s.kind), TeamKind::HumanOnly),
            min_len: config.min_len,
        };
        write_json(&config.path(TEAM_SUMMARY), &summary)?;
        Ok(summary)
    })
}

fn load_sequences(config: &PipelineConfig) -> Result<Vec<TeamSequence>> {
    let symbols = File::open(upstream(config, SEQUENCES, "build-teams")?)?;
    let pre = File::open(upstream(config, SEQUENCES_PRE, "build-teams")?)?;
    teams::read_sequences(symbols, Some(pre))
}

// ---- matched sampling ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary {
    pub minority: usize,
    pub majority_before: usize,
    pub majority_after: usize,
    pub mean_distance: f64,
    pub medians: MedianTable,
}

/// Human-bot teams are the minority; each takes its nearest human-only team.
pub fn sample(config: &PipelineConfig) -> Result<SampleSummary> {
    stage("sample", config.path(MATCHES), || {
        let seqs = load_sequences(config)?;
        let vectors = |kind: TeamKind| -> Vec<TeamVector> {
            seqs.iter()
                .filter(|s| s.kind == kind)
                .map(|s| TeamVector::from_sequence(s, config.frequency_dims))
                .collect()
        };
        let minority = vectors(TeamKind::HumanBot);
        let majority = vectors(TeamKind::HumanOnly);
        if minority.is_empty() {
            return Err(Error::EmptySample);
        }
        let pairs = match_teams(&minority, &majority)?;
        let by_id: HashMap<u64, &TeamVector> = majority.iter().map(|v| (v.repo_id, v)).collect();
        let matched: Vec<TeamVector> = pairs.iter().map(|p| by_id[&p.majority_repo_id].clone()).collect();
        let medians = median_table(config.frequency_dims, &minority, &majority, &matched)?;
        write_atomic(&config.path(MATCHES), |w| matcher::write_matches(w, &pairs))?;
        write_atomic(&config.path(MEDIANS), |w| matcher::write_medians(w, &medians))?;
        Ok(SampleSummary {
            minority: minority.len(),
            majority_before: majority.len(),
            majority_after: matched.len(),
            mean_distance: pairs.iter().map(|p| p.distance).sum::<f64>() / pairs.len() as f64,
            medians,
        })
    })
}

/// Human-bot sequences and the matched human-only sequences, in file order.
fn matched_groups(config: &PipelineConfig) -> Result<(Vec<TeamSequence>, Vec<TeamSequence>)> {
    let seqs = load_sequences(config)?;
    let pairs = matcher::read_matches(File::open(upstream(config, MATCHES, "sample")?)?)?;
    let mut by_id: HashMap<u64, &TeamSequence> = seqs.iter().map(|s| (s.repo_id, s)).collect();
    let minority: Vec<TeamSequence> = seqs.iter().filter(|s| s.kind == TeamKind::HumanBot).cloned().collect();
    let majority = pairs
        .iter()
        .map(|p| {
            by_id
                .remove(&p.majority_repo_id)
                .cloned()
                .ok_or_else(|| Error::MalformedRecord {
                    line: 0,
                    message: format!("matched repo {} is not in {SEQUENCES}", p.majority_repo_id),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((minority, majority))
}

// ---- motifs ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupMotifSummary {
    pub group: String,
    pub accepted: usize,
    pub excluded_sequences: usize,
    pub top: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSummary {
    pub w: usize,
    pub candidate_count: usize,
    pub groups: Vec<GroupMotifSummary>,
    /// Set when discovery at this window length failed.
    pub error: Option<String>,
}

const TOP_MOTIFS: usize = 10;

fn summarize(set: &ContrastMotifSet) -> WindowSummary {
    WindowSummary {
        w: set.w,
        candidate_count: set.candidate_count,
        groups: set
            .groups
            .iter()
            .map(|g| GroupMotifSummary {
                group: g.group.clone(),
                accepted: g.motifs.len(),
                excluded_sequences: g.excluded_sequences,
                top: g
                    .motifs
                    .iter()
                    .take(TOP_MOTIFS)
                    .map(|m| teams::encode_symbols(&m.symbols))
                    .collect(),
            })
            .collect(),
        error: None,
    }
}

pub fn motif_file(w: Option<usize>) -> String {
    match w {
        None => MOTIFS.to_string(),
        Some(w) => format!("motifs_w{w}.csv"),
    }
}

pub fn graph_file(group: &str) -> String {
    format!("motif_graph_{group}.dot")
}

/// Contrast motifs over the window range, or over a single `w` when given.
///
/// The sweep writes `motifs.csv`, `motif_sweep.json` and one DOT graph per
/// group built from the highlight window; a single window writes
/// `motifs_w<w>.csv` only.
pub fn motifs(config: &PipelineConfig, single: Option<usize>) -> Result<Vec<WindowSummary>> {
    let out = config.path(&motif_file(single));
    stage("motifs", out.clone(), || {
        let (hb, ho) = matched_groups(config)?;
        let groups = vec![
            SequenceGroup::new(TeamKind::HumanBot.as_str(), hb.into_iter().map(|s| s.symbols).collect()),
            SequenceGroup::new(
                TeamKind::HumanOnly.as_str(),
                ho.into_iter().map(|s| s.symbols).collect(),
            ),
        ];
        let range = match single {
            Some(w) => w..=w,
            None => config.windows.min..=config.windows.max,
        };
        let mut sets = Vec::new();
        let mut summaries = Vec::new();
        for (w, result) in window_sweep(&groups, range, &config.motif) {
            match result {
                Ok(set) => {
                    summaries.push(summarize(&set));
                    sets.push(set);
                }
                Err(e) if single.is_none() => {
                    warn!("w = {w}: {e}");
                    summaries.push(WindowSummary {
                        w,
                        candidate_count: 0,
                        groups: Vec::new(),
                        error: Some(e.to_string()),
                    });
                }
                Err(e) => return Err(e),
            }
        }
        write_atomic(&out, |w| motif::write_motifs(w, &sets))?;
        if single.is_none() {
            write_json(&config.path(MOTIF_SWEEP), &summaries)?;
            let highlight = sets.iter().find(|s| s.w == config.highlight_w);
            for g in &groups {
                let graph = motif_graph(
                    highlight
                        .and_then(|s| s.group(&g.name))
                        .into_iter()
                        .flat_map(|gm| gm.motifs.iter().map(|m| m.symbols.as_slice())),
                );
                let dot = graph.to_dot(&g.name);
                write_atomic(&config.path(&graph_file(&g.name)), |w| Ok(w.write_all(dot.as_bytes())?))?;
            }
        }
        Ok(summaries)
    })
}

// ---- statistics ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsSummary {
    pub run_lengths: Option<RunLengthComparison>,
    pub proportions: Option<Vec<Proportion>>,
}

/// Issue-comment run lengths of matched human-only teams (first) against
/// human-bot teams (second).
pub fn run_length_stage(config: &PipelineConfig) -> Result<RunLengthComparison> {
    stage("stats", config.path(RUN_LENGTHS), || {
        let (hb, ho) = matched_groups(config)?;
        let cmp = compare_run_lengths(
            ho.iter().map(|s| s.pre_reduction.as_slice()),
            hb.iter().map(|s| s.pre_reduction.as_slice()),
            config.run_length_mode,
        )?;
        write_json(&config.path(RUN_LENGTHS), &cmp)?;
        Ok(cmp)
    })
}

/// Event-type shares of the whole normalized corpus.
pub fn proportion_stage(config: &PipelineConfig) -> Result<Vec<Proportion>> {
    stage("stats", config.path(PROPORTIONS), || {
        let path = upstream(config, EVENTS, "ingest")?;
        let types = open_events(&path, ParseMode::Strict)?.map(|e| e.map(|e| e.event_type));
        let types = types.collect::<Result<Vec<_>>>()?;
        let table = proportions(types)?;
        write_atomic(&config.path(PROPORTIONS), |w| {
            let mut out = csv::Writer::from_writer(w);
            for p in &table {
                out.serialize(p)?;
            }
            out.flush()?;
            Ok(())
        })?;
        Ok(table)
    })
}

fn read_proportions(path: &Path) -> Result<Vec<Proportion>> {
    csv::Reader::from_path(path)?
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}

// ---- report ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportParams {
    pub seed: Option<u64>,
    pub classifier: ClassifierKind,
    pub k: usize,
    pub min_len: usize,
    pub windows: WindowRange,
    pub highlight_w: usize,
    pub motif: MotifParams,
    pub frequency_dims: FrequencyDims,
    pub run_length_mode: RunLengthMode,
}

impl ReportParams {
    fn from_config(c: &PipelineConfig) -> Self {
        ReportParams {
            seed: c.seed,
            classifier: c.classifier,
            k: c.k,
            min_len: c.min_len,
            windows: c.windows,
            highlight_w: c.highlight_w,
            motif: c.motif.clone(),
            frequency_dims: c.frequency_dims,
            run_length_mode: c.run_length_mode,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub events: usize,
    pub skipped_records: usize,
    pub active_users: usize,
    pub active_repos: usize,
    pub candidate_accounts: usize,
    pub predicted_bots: usize,
    pub teams: TeamSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchingSummary {
    pub minority: usize,
    pub majority_before: usize,
    pub majority_after: usize,
    pub mean_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub version: String,
    pub params: ReportParams,
    pub corpus: CorpusStats,
    pub classifiers: Vec<CVReport>,
    pub matching: MatchingSummary,
    pub medians: MedianTable,
    pub motifs: Vec<WindowSummary>,
    pub run_lengths: RunLengthComparison,
    pub proportions: Vec<Proportion>,
}

/// Assembles `report.json` from persisted artifacts only.
pub fn report(config: &PipelineConfig) -> Result<PipelineReport> {
    stage("report", config.path(REPORT), || {
        let ingest: IngestSummary = read_json(&upstream(config, INGEST_SUMMARY, "ingest")?)?;
        let bots: BotSummary = read_json(&upstream(config, CV_REPORT, "detect-bots")?)?;
        let predictions = bots::read_predictions(File::open(upstream(config, BOT_PREDICTIONS, "detect-bots")?)?)?;
        let teams: TeamSummary = read_json(&upstream(config, TEAM_SUMMARY, "build-teams")?)?;
        let pairs: Vec<MatchedPair> = matcher::read_matches(File::open(upstream(config, MATCHES, "sample")?)?)?;
        let medians = matcher::read_medians(File::open(upstream(config, MEDIANS, "sample")?)?)?;
        let motifs: Vec<WindowSummary> = read_json(&upstream(config, MOTIF_SWEEP, "motifs")?)?;
        let run_lengths: RunLengthComparison = read_json(&upstream(config, RUN_LENGTHS, "stats")?)?;
        let proportions = read_proportions(&upstream(config, PROPORTIONS, "stats")?)?;
        let report = PipelineReport {
            version: env!("CARGO_PKG_VERSION").to_string(),
            params: ReportParams::from_config(config),
            corpus: CorpusStats {
                events: ingest.events,
                skipped_records: ingest.skipped_records,
                active_users: ingest.active_users,
                active_repos: ingest.active_repos,
                candidate_accounts: predictions.len(),
                predicted_bots: predictions.values().filter(|p| p.label == Label::Bot).count(),
                teams: teams.clone(),
            },
            classifiers: bots.cv,
            matching: MatchingSummary {
                minority: teams.kept_human_bot,
                majority_before: teams.kept_human_only,
                majority_after: pairs.len(),
                mean_distance: if pairs.is_empty() {
                    0.0
                } else {
                    pairs.iter().map(|p| p.distance).sum::<f64>() / pairs.len() as f64
                },
            },
            medians,
            motifs,
            run_lengths,
            proportions,
        };
        write_json(&config.path(REPORT), &report)?;
        Ok(report)
    })
}

// ---- whole pipeline ----

/// Runs `f` on a pool sized by the config.
pub fn with_threads<T: Send>(config: &PipelineConfig, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = config.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    pool.install(f)
}

/// Every stage in order. On failure a `STALE` marker names the failed stage
/// so leftover artifacts are not mistaken for a complete run.
pub fn run(config: &PipelineConfig) -> Result<PipelineReport> {
    config.validate()?;
    fs::create_dir_all(&config.output_dir)?;
    let marker = config.path(STALE_MARKER);
    let result = with_threads(config, || {
        ingest(config)?;
        detect_bots(config)?;
        build_team_sequences(config)?;
        sample(config)?;
        motifs(config, None)?;
        run_length_stage(config)?;
        proportion_stage(config)?;
        report(config)
    });
    match &result {
        Ok(_) => {
            if marker.exists() {
                fs::remove_file(&marker)?;
            }
        }
        Err(e) => {
            let stage = match e {
                Error::Stage { stage, .. } => *stage,
                _ => "pipeline",
            };
            fs::write(&marker, format!("{stage}: {e}\n"))?;
        }
    }
    result
}

// ---- synthetic corpora ----

pub const SYNTH_EVENTS: &str = "events.ndjson";
pub const SYNTH_MANIFEST: &str = "manifest.json";
pub const SYNTH_LABELS: &str = "labels.csv";

/// Writes a synthetic corpus, its manifest and the fixture labels into `dir`.
pub fn write_synth(spec: &SynthSpec, dir: &Path) -> Result<synth::Manifest> {
    let corpus = synth::generate(spec)?;
    fs::create_dir_all(dir)?;
    write_atomic(&dir.join(SYNTH_EVENTS), |w| Ok(write_events(w, &corpus.events)?))?;
    write_json(&dir.join(SYNTH_MANIFEST), &corpus.manifest)?;
    write_atomic(&dir.join(SYNTH_LABELS), |w| {
        bots::write_labels(w, &corpus.manifest.labeled_accounts)
    })?;
    Ok(corpus.manifest)
}
