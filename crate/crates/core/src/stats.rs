//! Nonparametric statistics: the Mann-Whitney U-test, issue-comment run
//! lengths and event-type proportion tables.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::event::EventType;

/// Combined sample size up to which tie-free samples use the exact null distribution.
pub const EXACT_MAX_N: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UTestMethod {
    Exact,
    NormalApprox,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UTestResult {
    /// U of the first sample: pairs (a, b) with a > b, ties counting one half.
    pub u_statistic: f64,
    pub p_two_sided: f64,
    /// One-sided p for the alternative "first sample tends to be larger".
    pub p_greater: f64,
    /// One-sided p for the alternative "first sample tends to be smaller".
    pub p_less: f64,
    pub n1: usize,
    pub n2: usize,
    pub method: UTestMethod,
}

/// Midranks (1-based) of `values`, plus the tie-group sizes.
fn midranks(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        if end - start > 1 {
            ties.push(end - start);
        }
        start = end;
    }
    (ranks, ties)
}

/// Number of rank arrangements giving each U in `0..=n1*n2` for tie-free samples.
pub fn exact_u_counts(n1: usize, n2: usize) -> Vec<u64> {
    let max_u = n1 * n2;
    // table[i][j] holds the distribution for sizes (i, j)
    let mut table: Vec<Vec<Vec<u64>>> = vec![vec![Vec::new(); n2 + 1]; n1 + 1];
    for i in 0..=n1 {
        for j in 0..=n2 {
            let mut dist = vec![0u64; i * j + 1];
            if i == 0 || j == 0 {
                dist[0] = 1;
            } else {
                // the largest observation comes from sample 1 (beats all j) or sample 2
                for (u, c) in table[i - 1][j].iter().enumerate() {
                    dist[u + j] += c;
                }
                for (u, c) in table[i][j - 1].iter().enumerate() {
                    dist[u] += c;
                }
            }
            table[i][j] = dist;
        }
    }
    let out = std::mem::take(&mut table[n1][n2]);
    debug_assert_eq!(out.len(), max_u + 1);
    out
}

fn clamp_p(p: f64) -> f64 {
    p.clamp(f64::MIN_POSITIVE, 1.0)
}

fn upper_normal_tail(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

struct RankedSamples {
    u: f64,
    n1: usize,
    n2: usize,
    ties: Vec<usize>,
}

fn rank_samples(a: &[f64], b: &[f64]) -> Result<RankedSamples> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    let (n1, n2) = (a.len(), b.len());
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, ties) = midranks(&pooled);
    let rank_sum_a: f64 = ranks[..n1].iter().sum();
    Ok(RankedSamples {
        u: rank_sum_a - (n1 * (n1 + 1)) as f64 / 2.0,
        n1,
        n2,
        ties,
    })
}

fn exact_test(r: &RankedSamples) -> UTestResult {
    let counts = exact_u_counts(r.n1, r.n2);
    let total = counts.iter().sum::<u64>() as f64;
    let k = r.u.round() as usize;
    let p_less = counts[..=k].iter().sum::<u64>() as f64 / total;
    let p_greater = counts[k..].iter().sum::<u64>() as f64 / total;
    UTestResult {
        u_statistic: r.u,
        p_two_sided: clamp_p(2.0 * p_less.min(p_greater)),
        p_greater: clamp_p(p_greater),
        p_less: clamp_p(p_less),
        n1: r.n1,
        n2: r.n2,
        method: UTestMethod::Exact,
    }
}

fn normal_test(r: &RankedSamples) -> UTestResult {
    let nn = (r.n1 * r.n2) as f64;
    let n = (r.n1 + r.n2) as f64;
    let tie_term: f64 = r.ties.iter().map(|&t| (t * t * t - t) as f64).sum();
    let var = nn / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    let (p_two, p_greater, p_less) = if var <= 0.0 {
        (1.0, 1.0, 1.0)
    } else {
        let sd = var.sqrt();
        let dev = r.u - nn / 2.0;
        (
            2.0 * upper_normal_tail((dev.abs() - 0.5).max(0.0) / sd),
            upper_normal_tail((dev - 0.5) / sd),
            upper_normal_tail((-dev - 0.5) / sd),
        )
    };
    UTestResult {
        u_statistic: r.u,
        p_two_sided: clamp_p(p_two),
        p_greater: clamp_p(p_greater),
        p_less: clamp_p(p_less),
        n1: r.n1,
        n2: r.n2,
        method: UTestMethod::NormalApprox,
    }
}

/// Two-sided Mann-Whitney U-test with midranks for ties.
///
/// Tie-free samples with `n1 + n2 <= 10` get the exact permutation
/// distribution; everything else uses the normal approximation with tie
/// and continuity corrections.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<UTestResult> {
    let r = rank_samples(a, b)?;
    if r.ties.is_empty() && r.n1 + r.n2 <= EXACT_MAX_N {
        Ok(exact_test(&r))
    } else {
        Ok(normal_test(&r))
    }
}

/// The normal approximation, forced even where the exact method would apply.
pub fn mann_whitney_u_normal(a: &[f64], b: &[f64]) -> Result<UTestResult> {
    Ok(normal_test(&rank_samples(a, b)?))
}

/// Median with the mean-of-middle-two rule; `None` on empty input.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len().is_multiple_of(2) {
        (v[mid - 1] + v[mid]) / 2.0
    } else {
        v[mid]
    })
}

/// Lengths of the maximal runs of consecutive `IssueComment` events.
pub fn issue_comment_runs(events: &[EventType]) -> Vec<usize> {
    let mut runs = Vec::new();
    let mut current = 0;
    for &t in events {
        if t == EventType::IssueComment {
            current += 1;
        } else if current > 0 {
            runs.push(current);
            current = 0;
        }
    }
    if current > 0 {
        runs.push(current);
    }
    runs
}

/// Mean maximal-run length of issue comments; `None` when the sequence has none.
pub fn run_length_means(events: &[EventType]) -> Option<f64> {
    let runs = issue_comment_runs(events);
    if runs.is_empty() {
        None
    } else {
        Some(runs.iter().sum::<usize>() as f64 / runs.len() as f64)
    }
}

/// What the run-length test compares across groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunLengthMode {
    /// One observation per team: its mean run length.
    #[default]
    PerTeamMeans,
    /// Every run in the group is an observation.
    PooledRuns,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLengthSummary {
    /// Observations entering the test (team means or pooled runs).
    pub values: Vec<f64>,
    /// Teams without a single issue comment.
    pub excluded_teams: usize,
}

pub fn run_length_summary<'a>(
    group: impl IntoIterator<Item = &'a [EventType]>,
    mode: RunLengthMode,
) -> RunLengthSummary {
    let mut values = Vec::new();
    let mut excluded_teams = 0;
    for seq in group {
        let runs = issue_comment_runs(seq);
        if runs.is_empty() {
            excluded_teams += 1;
            continue;
        }
        match mode {
            RunLengthMode::PerTeamMeans => values.push(runs.iter().sum::<usize>() as f64 / runs.len() as f64),
            RunLengthMode::PooledRuns => values.extend(runs.iter().map(|&r| r as f64)),
        }
    }
    RunLengthSummary { values, excluded_teams }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    FirstHigher,
    SecondHigher,
    Tie,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLengthComparison {
    pub test: UTestResult,
    pub direction: Direction,
    pub median_first: f64,
    pub median_second: f64,
    pub mean_first: f64,
    pub mean_second: f64,
    pub excluded_first: usize,
    pub excluded_second: usize,
    pub mode: RunLengthMode,
}

/// U-test on the issue-comment run lengths of two groups of raw sequences.
pub fn compare_run_lengths<'a, 'b>(
    first: impl IntoIterator<Item = &'a [EventType]>,
    second: impl IntoIterator<Item = &'b [EventType]>,
    mode: RunLengthMode,
) -> Result<RunLengthComparison> {
    let a = run_length_summary(first, mode);
    let b = run_length_summary(second, mode);
    let test = mann_whitney_u(&a.values, &b.values)?;
    let median_first = median(&a.values).expect("nonempty after test");
    let median_second = median(&b.values).expect("nonempty after test");
    let direction = match median_first.total_cmp(&median_second) {
        std::cmp::Ordering::Greater => Direction::FirstHigher,
        std::cmp::Ordering::Less => Direction::SecondHigher,
        std::cmp::Ordering::Equal => Direction::Tie,
    };
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    Ok(RunLengthComparison {
        direction,
        median_first,
        median_second,
        mean_first: mean(&a.values),
        mean_second: mean(&b.values),
        excluded_first: a.excluded_teams,
        excluded_second: b.excluded_teams,
        mode,
        test,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub event_type: EventType,
    pub count: u64,
    pub percent: f64,
}

/// Share of each event type, most frequent first. Types that never occur are omitted.
pub fn proportions(types: impl IntoIterator<Item = EventType>) -> Result<Vec<Proportion>> {
    let mut counts = [0u64; 14];
    for t in types {
        counts[t as usize] += 1;
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::EmptyCorpus);
    }
    let mut table: Vec<Proportion> = EventType::ALL
        .into_iter()
        .zip(counts)
        .filter(|&(_, c)| c > 0)
        .map(|(event_type, count)| Proportion {
            event_type,
            count,
            percent: 100.0 * count as f64 / total as f64,
        })
        .collect();
    table.sort_by(|x, y| y.count.cmp(&x.count).then(x.event_type.cmp(&y.event_type)));
    Ok(table)
}
