//! Acceptance suite. Every test prints one `criterion N ... PASS|FAIL` line
//! (run with `--nocapture` to see them) and fails when its criterion does.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use teamflow::bots::{
    evaluate_cv, extract_features, f1_from, AccountFeatures, ClassifierKind, ClassifierParams, Label,
};
use teamflow::matcher::{match_teams, median_table, TeamVector};
use teamflow::motif::{discover, MotifParams, SequenceGroup};
use teamflow::pipeline::{self, PipelineConfig};
use teamflow::stats::{
    compare_run_lengths, mann_whitney_u, mann_whitney_u_normal, proportions, Direction, RunLengthMode,
};
use teamflow::synth::{
    draw_event_types, generate_bot_accounts, generate_team_sequences, reference_weights, BotAccountSpec, CommentMode,
    GroupSpec, PlantedMotif, SynthSpec,
};
use teamflow::teams::{decode_symbols, encode_symbols, FrequencyDims, ReducedSymbol, TeamSequence};
use teamflow::EventType;

fn verdict(n: &str, pass: bool, detail: String) {
    println!("criterion {n} {} : {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {n} failed: {detail}");
}

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
}

// ---------------------------------------------------------------- 1

#[test]
fn criterion_1_classifier_band() {
    let start = Instant::now();
    let spec = SynthSpec {
        seed: 1,
        bot_accounts: BotAccountSpec::default(),
        ..SynthSpec::default()
    };
    let accounts = generate_bot_accounts(&spec).unwrap();
    let features: Vec<AccountFeatures> = accounts
        .iter()
        .map(|a| extract_features(&a.login, &a.events.iter().collect::<Vec<_>>(), 200).unwrap())
        .collect();
    let labels: Vec<Label> = accounts.iter().map(|a| a.label).collect();
    let bots = labels.iter().filter(|&&l| l == Label::Bot).count();
    let params = ClassifierParams::default();
    let gb = evaluate_cv(ClassifierKind::GradientBoosting, &features, &labels, &params, 5, 1).unwrap();
    let lr = evaluate_cv(ClassifierKind::LogisticRegression, &features, &labels, &params, 5, 1).unwrap();
    let elapsed = start.elapsed();
    verdict(
        "1",
        gb.mean_f1 >= 0.90 && gb.mean_f1 >= lr.mean_f1 && elapsed < Duration::from_secs(10),
        format!(
            "{} accounts ({bots} bots), GB F1 {:.3} (P {:.3}, R {:.3}), LR F1 {:.3}, {:.2?}",
            accounts.len(),
            gb.mean_f1,
            gb.mean_precision,
            gb.mean_recall,
            lr.mean_f1,
            elapsed
        ),
    );
}

// ---------------------------------------------------------------- 2

#[test]
fn criterion_2_f1_arithmetic() {
    let f1 = f1_from(0.89, 0.97);
    verdict("2", (0.925..=0.932).contains(&f1), format!("F1(0.89, 0.97) = {f1:.5}"));
}

// ---------------------------------------------------------------- 3

/// Every tie-free pair of samples as a rank pattern: which of the pooled
/// ranks 1..=n1+n2 belong to the first sample.
fn rank_patterns(n1: usize, n2: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    let n = n1 + n2;
    (0u32..1 << n)
        .filter(|mask| mask.count_ones() as usize == n1)
        .map(|mask| {
            let (mut a, mut b) = (Vec::new(), Vec::new());
            for r in 0..n {
                if mask & (1 << r) != 0 {
                    a.push(r as f64 + 1.0)
                } else {
                    b.push(r as f64 + 1.0)
                }
            }
            (a, b)
        })
        .collect()
}

/// U by direct pair counting.
fn u_by_pairs(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .flat_map(|x| {
            b.iter().map(move |y| {
                if x > y {
                    1.0
                } else if x == y {
                    0.5
                } else {
                    0.0
                }
            })
        })
        .sum()
}

/// Two-sided exact p by enumerating every split of the pooled ranks.
fn exact_p_by_enumeration(n1: usize, n2: usize, u: f64) -> f64 {
    let all: Vec<f64> = rank_patterns(n1, n2).iter().map(|(a, b)| u_by_pairs(a, b)).collect();
    let total = all.len() as f64;
    let le = all.iter().filter(|&&x| x <= u).count() as f64 / total;
    let ge = all.iter().filter(|&&x| x >= u).count() as f64 / total;
    (2.0 * le.min(ge)).min(1.0)
}

fn size_pairs() -> Vec<(usize, usize)> {
    (1..10).flat_map(|n1| (1..=10 - n1).map(move |n2| (n1, n2))).collect()
}

#[test]
fn criterion_3_u_statistic_and_exact_p_match_enumeration() {
    let mut cases = 0;
    let mut mismatches = Vec::new();
    for (n1, n2) in size_pairs() {
        for (a, b) in rank_patterns(n1, n2) {
            cases += 1;
            let r = mann_whitney_u(&a, &b).unwrap();
            let u = u_by_pairs(&a, &b);
            let p = exact_p_by_enumeration(n1, n2, u);
            if r.u_statistic != u || (r.p_two_sided - p).abs() > 1e-12 {
                mismatches.push((a, b));
            }
        }
    }
    let spot = mann_whitney_u(&[1.0, 2.0], &[3.0, 4.0]).unwrap();
    verdict(
        "3a",
        mismatches.is_empty() && (spot.p_two_sided - 1.0 / 3.0).abs() < 1e-12,
        format!(
            "{cases} tie-free pairs, {} mismatches; p([1,2] vs [3,4]) = {:.6}",
            mismatches.len(),
            spot.p_two_sided
        ),
    );
}

#[test]
fn criterion_3_normal_approximation_within_bound() {
    let mut worst = (0.0, 0, 0, 0.0);
    let mut over = BTreeSet::new();
    for (n1, n2) in size_pairs() {
        for (a, b) in rank_patterns(n1, n2) {
            let exact = mann_whitney_u(&a, &b).unwrap().p_two_sided;
            let normal = mann_whitney_u_normal(&a, &b).unwrap().p_two_sided;
            let gap = (exact - normal).abs();
            if gap > 0.05 {
                over.insert((n1, n2));
            }
            if gap > worst.0 {
                worst = (gap, n1, n2, u_by_pairs(&a, &b));
            }
        }
    }
    verdict(
        "3b",
        over.is_empty(),
        format!(
            "max |p_normal - p_exact| = {:.4} at n1={}, n2={}, U={}; sizes over 0.05: {:?}",
            worst.0, worst.1, worst.2, worst.3, over
        ),
    );
}

// ---------------------------------------------------------------- 4

fn two_group_spec(seed: u64, motif: Option<&str>) -> SynthSpec {
    SynthSpec {
        seed,
        groups: vec![
            GroupSpec {
                name: "A".into(),
                n_teams: 200,
                ..GroupSpec::default()
            },
            GroupSpec {
                name: "B".into(),
                n_teams: 200,
                ..GroupSpec::default()
            },
        ],
        motifs: motif
            .map(|m| {
                vec![PlantedMotif {
                    symbols: m.into(),
                    rates: vec![0.8, 0.0],
                }]
            })
            .unwrap_or_default(),
        bot_accounts: BotAccountSpec {
            n_accounts: 0,
            ..BotAccountSpec::default()
        },
        ..SynthSpec::default()
    }
}

fn split_groups(seqs: &[TeamSequence], n_first: usize) -> Vec<SequenceGroup> {
    let symbols = |s: &[TeamSequence]| s.iter().map(|t| t.symbols.clone()).collect();
    vec![
        SequenceGroup::new("A", symbols(&seqs[..n_first])),
        SequenceGroup::new("B", symbols(&seqs[n_first..])),
    ]
}

#[test]
fn criterion_4_planted_motif_recovery() {
    let planted = "PRIP";
    let params = MotifParams::default();
    let mut recovered = 0;
    let mut false_positive_runs = 0;
    let mut slowest = Duration::ZERO;
    for seed in 0..20 {
        let start = Instant::now();
        let (seqs, manifest) = generate_team_sequences(&two_group_spec(seed, Some(planted))).unwrap();
        assert!(!manifest.insertions.is_empty());
        let set = discover(&split_groups(&seqs, 200), 4, &params).unwrap();
        if set
            .group("A")
            .unwrap()
            .motifs
            .iter()
            .any(|m| encode_symbols(&m.symbols) == planted && m.p_value < 0.01)
        {
            recovered += 1;
        }
        let (null, _) = generate_team_sequences(&two_group_spec(1000 + seed, None)).unwrap();
        if discover(&split_groups(&null, 200), 4, &params)
            .unwrap()
            .motifs()
            .next()
            .is_some()
        {
            false_positive_runs += 1;
        }
        slowest = slowest.max(start.elapsed());
    }
    verdict(
        "4",
        recovered >= 19 && false_positive_runs <= 1 && slowest < Duration::from_secs(60),
        format!(
            "recovered {recovered}/20, null runs with any motif {false_positive_runs}/20, slowest seed {slowest:.2?}"
        ),
    );
}

// ---------------------------------------------------------------- 5

fn load_micro(path: &Path) -> Vec<SequenceGroup> {
    let mut groups: Vec<SequenceGroup> = Vec::new();
    for line in fs::read_to_string(path).unwrap().lines() {
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let (name, code) = line.split_once(' ').unwrap();
        let seq = decode_symbols(code.trim()).unwrap();
        match groups.iter_mut().find(|g| g.name == name) {
            Some(g) => g.sequences.push(seq),
            None => groups.push(SequenceGroup::new(name, vec![seq])),
        }
    }
    groups
}

/// Accepted (group, window) pairs by direct enumeration of every window.
fn brute_force_motifs(groups: &[SequenceGroup], w: usize, alpha: f64) -> BTreeSet<(String, Vec<ReducedSymbol>)> {
    let dist = |m: &[ReducedSymbol], s: &[ReducedSymbol]| -> f64 {
        let mut best = w;
        for off in 0..=s.len() - w {
            let d = (0..w).filter(|&i| s[off + i] != m[i]).count();
            best = best.min(d);
        }
        best as f64 / w as f64
    };
    let per_group: Vec<BTreeSet<Vec<ReducedSymbol>>> = groups
        .iter()
        .map(|g| {
            g.sequences
                .iter()
                .flat_map(|s| s.windows(w).map(|x| x.to_vec()))
                .collect()
        })
        .collect();
    let tests: usize = per_group.iter().map(BTreeSet::len).sum();
    let mut accepted = BTreeSet::new();
    for (gi, cands) in per_group.iter().enumerate() {
        for m in cands {
            let d: Vec<Vec<f64>> = groups
                .iter()
                .map(|g| g.sequences.iter().map(|s| dist(m, s)).collect())
                .collect();
            let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
            let ok = (0..groups.len()).filter(|&h| h != gi).all(|h| {
                mean(&d[gi]) < mean(&d[h])
                    && (mann_whitney_u(&d[gi], &d[h]).unwrap().p_two_sided * tests as f64).min(1.0) < alpha
            });
            if ok {
                accepted.insert((groups[gi].name.clone(), m.clone()));
            }
        }
    }
    accepted
}

#[test]
fn criterion_5_micro_corpora_match_brute_force() {
    let mut files: Vec<PathBuf> = fs::read_dir(data_dir().join("micro"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    files.sort();
    assert!(!files.is_empty());
    let mut checks = 0;
    let mut nonempty = 0;
    let mut failures = Vec::new();
    for file in &files {
        let groups = load_micro(file);
        assert!(groups
            .iter()
            .all(|g| g.sequences.len() <= 20 && g.sequences.iter().all(|s| s.len() <= 12)));
        for w in 2..=5 {
            for alpha in [0.01, 0.5] {
                let params = MotifParams {
                    candidates: None,
                    alpha,
                };
                let got: BTreeSet<(String, Vec<ReducedSymbol>)> = discover(&groups, w, &params)
                    .unwrap()
                    .motifs()
                    .map(|m| (m.group.clone(), m.symbols.clone()))
                    .collect();
                let want = brute_force_motifs(&groups, w, alpha);
                checks += 1;
                nonempty += usize::from(!want.is_empty());
                if got != want {
                    failures.push(format!("{} w={w} alpha={alpha}", file.display()));
                }
            }
        }
    }
    verdict(
        "5",
        failures.is_empty() && nonempty > 0,
        format!(
            "{} corpora, {checks} (w, alpha) checks, {nonempty} with accepted motifs, mismatches {failures:?}",
            files.len()
        ),
    );
}

// ---------------------------------------------------------------- 6

#[test]
fn criterion_6_matching_closes_median_gaps() {
    // a minority of long, busy teams against a larger pool of mostly short ones
    let minority_spec = SynthSpec {
        seed: 6,
        groups: vec![GroupSpec {
            name: "minority".into(),
            n_teams: 100,
            ..GroupSpec::default()
        }],
        min_length: 25,
        max_length: 60,
        bot_accounts: BotAccountSpec {
            n_accounts: 0,
            ..BotAccountSpec::default()
        },
        ..SynthSpec::default()
    };
    let majority_spec = SynthSpec {
        seed: 7,
        groups: vec![GroupSpec {
            name: "majority".into(),
            n_teams: 500,
            ..GroupSpec::default()
        }],
        min_length: 5,
        max_length: 40,
        ..minority_spec.clone()
    };
    let vectors = |spec: &SynthSpec, offset: u64| -> Vec<TeamVector> {
        generate_team_sequences(spec)
            .unwrap()
            .0
            .iter()
            .map(|s| {
                let mut v = TeamVector::from_sequence(s, FrequencyDims::Six);
                v.repo_id += offset;
                v
            })
            .collect()
    };
    let minority = vectors(&minority_spec, 0);
    let majority = vectors(&majority_spec, 1_000_000);
    let pairs = match_teams(&minority, &majority).unwrap();
    let matched: Vec<TeamVector> = pairs
        .iter()
        .map(|p| {
            majority
                .iter()
                .find(|v| v.repo_id == p.majority_repo_id)
                .unwrap()
                .clone()
        })
        .collect();
    let table = median_table(FrequencyDims::Six, &minority, &majority, &matched).unwrap();
    let gaps = table.gaps();
    let closed = gaps.iter().all(|&(_, before, after)| after <= before);
    let diverged = gaps.iter().any(|&(_, before, _)| before > 0.0);
    let rows: Vec<String> = table
        .rows
        .iter()
        .map(|r| {
            format!(
                "{} {}/{}/{}",
                r.event_type, r.minority, r.majority_before, r.majority_after
            )
        })
        .collect();
    verdict(
        "6",
        closed && diverged,
        format!("medians minority/majority/matched: {}", rows.join(", ")),
    );
}

// ---------------------------------------------------------------- 7

#[test]
fn criterion_7_clustered_comments_have_longer_runs() {
    let spec = SynthSpec {
        seed: 7,
        paired_backbones: true,
        groups: vec![
            GroupSpec {
                name: "A".into(),
                n_teams: 200,
                comment_mode: CommentMode::Clustered,
                ..GroupSpec::default()
            },
            GroupSpec {
                name: "B".into(),
                n_teams: 200,
                comment_mode: CommentMode::Interspersed,
                ..GroupSpec::default()
            },
        ],
        bot_accounts: BotAccountSpec {
            n_accounts: 0,
            ..BotAccountSpec::default()
        },
        ..SynthSpec::default()
    };
    let (seqs, _) = generate_team_sequences(&spec).unwrap();
    let (a, b) = seqs.split_at(200);
    let comments = |g: &[TeamSequence]| -> usize {
        g.iter()
            .flat_map(|s| &s.pre_reduction)
            .filter(|&&t| t == EventType::IssueComment)
            .count()
    };
    let cmp = compare_run_lengths(
        a.iter().map(|s| s.pre_reduction.as_slice()),
        b.iter().map(|s| s.pre_reduction.as_slice()),
        RunLengthMode::PerTeamMeans,
    )
    .unwrap();
    verdict(
        "7",
        comments(a) == comments(b) && cmp.direction == Direction::FirstHigher && cmp.test.p_two_sided < 0.01,
        format!(
            "comments {} vs {}, mean run {:.3} vs {:.3}, p = {:.3e}",
            comments(a),
            comments(b),
            cmp.mean_first,
            cmp.mean_second,
            cmp.test.p_two_sided
        ),
    );
}

// ---------------------------------------------------------------- 8

fn sample_config(out: &Path) -> PipelineConfig {
    let mut c = PipelineConfig::load(&data_dir().join("sample_config.json")).unwrap();
    c.inputs = vec![data_dir().join("sample_events.ndjson")];
    c.labels = Some(data_dir().join("sample_labels.csv"));
    c.output_dir = out.to_path_buf();
    c
}

#[test]
fn criterion_8_pipeline_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (one, two) = (dir.path().join("one"), dir.path().join("two"));
    let first = pipeline::run(&sample_config(&one)).unwrap();
    let mut second_config = sample_config(&two);
    second_config.threads = Some(1);
    pipeline::run(&second_config).unwrap();
    let files = [
        pipeline::REPORT.to_string(),
        pipeline::MOTIFS.to_string(),
        pipeline::graph_file("human-bot"),
        pipeline::graph_file("human-only"),
    ];
    let differing: Vec<&String> = files
        .iter()
        .filter(|f| fs::read(one.join(f)).unwrap() != fs::read(two.join(f)).unwrap())
        .collect();
    let teams = &first.corpus.teams;
    verdict(
        "8",
        differing.is_empty() && teams.kept_human_bot > 0 && teams.kept_human_only > 0,
        format!(
            "{} events, {} human-bot and {} human-only teams; differing artifacts {differing:?}",
            first.corpus.events, teams.kept_human_bot, teams.kept_human_only
        ),
    );
}

// ---------------------------------------------------------------- 9

#[test]
fn criterion_9_proportions_match_generator_weights() {
    let draws = draw_event_types(100_000, 9);
    let table = proportions(draws).unwrap();
    let mut worst = (EventType::Push, 0.0f64);
    for (t, w) in reference_weights() {
        let got = table.iter().find(|p| p.event_type == t).map_or(0.0, |p| p.percent);
        let gap = (got - 100.0 * w).abs();
        if gap > worst.1 {
            worst = (t, gap);
        }
    }
    verdict(
        "9",
        worst.1 <= 1.0,
        format!("largest deviation {:.3} pp ({})", worst.1, worst.0),
    );
}
