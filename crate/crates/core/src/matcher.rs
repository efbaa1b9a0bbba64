//! Nearest-neighbor down-sampling of the majority group on event-frequency
//! vectors, and the median table comparing groups before and after.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event::EventType;
use crate::stats::median;
use crate::teams::{frequency_vector, FrequencyDims, TeamSequence};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TeamVector {
    pub repo_id: u64,
    pub counts: Vec<u32>,
}

impl TeamVector {
    pub fn from_sequence(seq: &TeamSequence, dims: FrequencyDims) -> TeamVector {
        TeamVector {
            repo_id: seq.repo_id,
            counts: frequency_vector(seq, dims),
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| u64::from(c)).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub minority_repo_id: u64,
    pub majority_repo_id: u64,
    pub distance: f64,
}

fn squared_distance(a: &[u32], b: &[u32]) -> u64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = i64::from(x) - i64::from(y);
            (d * d) as u64
        })
        .sum()
}

/// Greedy matching without replacement.
///
/// Minority teams are visited by descending total event count (ties by
/// repo id); each takes the Euclidean-nearest unused majority team, ties
/// going to the smaller repo id. Pairs come back in visiting order.
pub fn match_teams(minority: &[TeamVector], majority: &[TeamVector]) -> Result<Vec<MatchedPair>> {
    if majority.len() < minority.len() {
        return Err(Error::MajorityExhausted {
            minority: minority.len(),
            majority: majority.len(),
        });
    }
    let mut order: Vec<&TeamVector> = minority.iter().collect();
    order.sort_by(|a, b| b.total().cmp(&a.total()).then(a.repo_id.cmp(&b.repo_id)));

    let mut used = vec![false; majority.len()];
    let mut pairs = Vec::with_capacity(minority.len());
    for team in order {
        let (best, d2) = majority
            .par_iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(i, cand)| (i, squared_distance(&team.counts, &cand.counts)))
            .min_by(|(i, da), (j, db)| da.cmp(db).then(majority[*i].repo_id.cmp(&majority[*j].repo_id)))
            .expect("majority has an unused team");
        used[best] = true;
        pairs.push(MatchedPair {
            minority_repo_id: team.repo_id,
            majority_repo_id: majority[best].repo_id,
            distance: (d2 as f64).sqrt(),
        });
    }
    Ok(pairs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MedianRow {
    pub event_type: EventType,
    pub minority: f64,
    pub majority_before: f64,
    pub majority_after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MedianTable {
    pub rows: Vec<MedianRow>,
}

impl MedianTable {
    /// Per-type |median gap| to the minority group, before and after matching.
    pub fn gaps(&self) -> Vec<(EventType, f64, f64)> {
        self.rows
            .iter()
            .map(|r| {
                (
                    r.event_type,
                    (r.majority_before - r.minority).abs(),
                    (r.majority_after - r.minority).abs(),
                )
            })
            .collect()
    }
}

fn component_medians(group: &[TeamVector], dims: usize) -> Result<Vec<f64>> {
    if group.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok((0..dims)
        .map(|j| {
            let col: Vec<f64> = group.iter().map(|v| f64::from(v.counts[j])).collect();
            median(&col).expect("nonempty")
        })
        .collect())
}

pub fn median_table(
    dims: FrequencyDims,
    minority: &[TeamVector],
    majority_all: &[TeamVector],
    majority_matched: &[TeamVector],
) -> Result<MedianTable> {
    let types = dims.types();
    let a = component_medians(minority, types.len())?;
    let b = component_medians(majority_all, types.len())?;
    let c = component_medians(majority_matched, types.len())?;
    Ok(MedianTable {
        rows: types
            .iter()
            .enumerate()
            .map(|(j, &t)| MedianRow {
                event_type: t,
                minority: a[j],
                majority_before: b[j],
                majority_after: c[j],
            })
            .collect(),
    })
}

pub fn write_matches<W: Write>(out: W, pairs: &[MatchedPair]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for p in pairs {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_matches<R: Read>(src: R) -> Result<Vec<MatchedPair>> {
    csv::Reader::from_reader(src)
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}

#[derive(Serialize, Deserialize)]
struct MedianCsvRow {
    event_type: EventType,
    human_bot: f64,
    human_only: f64,
    down_sampled_human_only: f64,
}

/// Writes the table with the columns human-bot, human-only, down-sampled human-only.
pub fn write_medians<W: Write>(out: W, table: &MedianTable) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in &table.rows {
        w.serialize(MedianCsvRow {
            event_type: r.event_type,
            human_bot: r.minority,
            human_only: r.majority_before,
            down_sampled_human_only: r.majority_after,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_medians<R: Read>(src: R) -> Result<MedianTable> {
    let mut rows = Vec::new();
    for r in csv::Reader::from_reader(src).deserialize::<MedianCsvRow>() {
        let r = r?;
        rows.push(MedianRow {
            event_type: r.event_type,
            minority: r.human_bot,
            majority_before: r.human_only,
            majority_after: r.down_sampled_human_only,
        });
    }
    Ok(MedianTable { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tv(repo_id: u64, counts: &[u32]) -> TeamVector {
        TeamVector {
            repo_id,
            counts: counts.to_vec(),
        }
    }

    #[test]
    fn exact_match_wins() {
        let pairs = match_teams(
            &[tv(1, &[2, 0, 0, 0, 0, 0])],
            &[tv(10, &[2, 0, 0, 0, 0, 0]), tv(11, &[9; 6])],
        )
        .unwrap();
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].majority_repo_id, 10);
        assert_eq!(pairs[0].distance, 0.0);
    }

    /// Minimum total distance over every injective assignment.
    fn brute_force_best(minority: &[TeamVector], majority: &[TeamVector]) -> f64 {
        fn go(i: usize, minority: &[TeamVector], majority: &[TeamVector], used: &mut Vec<bool>) -> f64 {
            if i == minority.len() {
                return 0.0;
            }
            let mut best = f64::INFINITY;
            for j in 0..majority.len() {
                if !used[j] {
                    used[j] = true;
                    let d = (squared_distance(&minority[i].counts, &majority[j].counts) as f64).sqrt();
                    best = best.min(d + go(i + 1, minority, majority, used));
                    used[j] = false;
                }
            }
            best
        }
        go(0, minority, majority, &mut vec![false; majority.len()])
    }

    #[test]
    fn axis_aligned_neighbors() {
        let minority = [tv(1, &[4, 0, 0, 0, 0, 0]), tv(2, &[0, 4, 0, 0, 0, 0])];
        let majority = [
            tv(10, &[3, 0, 0, 0, 0, 0]),
            tv(11, &[0, 3, 0, 0, 0, 0]),
            tv(12, &[10; 6]),
        ];
        let pairs = match_teams(&minority, &majority).unwrap();
        let mut got: Vec<(u64, u64)> = pairs.iter().map(|p| (p.minority_repo_id, p.majority_repo_id)).collect();
        got.sort_unstable();
        assert_eq!(got, [(1, 10), (2, 11)]);
        assert!(pairs.iter().all(|p| p.distance == 1.0));
        let total: f64 = pairs.iter().map(|p| p.distance).sum();
        assert_eq!(total, brute_force_best(&minority, &majority));
    }

    #[test]
    fn tie_goes_to_smaller_repo() {
        let pairs = match_teams(&[tv(1, &[1, 0])], &[tv(20, &[2, 0]), tv(5, &[0, 0])]).unwrap();
        assert_eq!(pairs[0].majority_repo_id, 5);
    }

    #[test]
    fn exhausted_majority() {
        assert!(matches!(
            match_teams(&[tv(1, &[1]), tv(2, &[1])], &[tv(3, &[1])]),
            Err(Error::MajorityExhausted {
                minority: 2,
                majority: 1
            })
        ));
    }

    #[test]
    fn medians() {
        let one = [tv(1, &[11, 9, 1, 6, 2, 1])];
        let t = median_table(FrequencyDims::Six, &one, &one, &one).unwrap();
        let got: Vec<f64> = t.rows.iter().map(|r| r.minority).collect();
        assert_eq!(got, [11.0, 9.0, 1.0, 6.0, 2.0, 1.0]);

        let two = [tv(1, &[1, 0, 0, 0, 0, 0]), tv(2, &[3, 0, 0, 0, 0, 0])];
        let t = median_table(FrequencyDims::Six, &two, &two, &two).unwrap();
        assert_eq!(t.rows[0].minority, 2.0);
        assert!(median_table(FrequencyDims::Six, &[], &two, &two).is_err());
    }

    #[test]
    fn median_csv_round_trip() {
        let g = [tv(1, &[11, 9, 1, 6, 2, 1]), tv(2, &[9, 4, 0, 0, 3, 1])];
        let t = median_table(FrequencyDims::Six, &g[..1], &g, &g[1..]).unwrap();
        let mut out = Vec::new();
        write_medians(&mut out, &t).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("event_type,human_bot,human_only,down_sampled_human_only\nPush,11.0,10.0,9.0\n"));
        assert_eq!(read_medians(text.as_bytes()).unwrap(), t);
    }

    fn vectors(max: usize) -> impl Strategy<Value = Vec<Vec<u32>>> {
        prop::collection::vec(prop::collection::vec(0u32..6, 3), 1..max)
    }

    proptest! {
        #[test]
        fn matching_invariants(minority in vectors(8), extra in vectors(8)) {
            let minority: Vec<TeamVector> =
                minority.iter().enumerate().map(|(i, c)| tv(i as u64, c)).collect();
            // majority holds an exact copy of every minority vector plus extras
            let majority: Vec<TeamVector> = minority
                .iter()
                .map(|t| t.counts.clone())
                .chain(extra)
                .enumerate()
                .map(|(i, c)| tv(100 + i as u64, &c))
                .collect();
            let pairs = match_teams(&minority, &majority).unwrap();
            prop_assert_eq!(pairs.len(), minority.len());
            let mut ids: Vec<u64> = pairs.iter().map(|p| p.majority_repo_id).collect();
            ids.sort_unstable();
            ids.dedup();
            prop_assert_eq!(ids.len(), minority.len());
            prop_assert!(pairs.iter().all(|p| p.distance == 0.0));
            prop_assert_eq!(match_teams(&minority, &majority).unwrap(), pairs);
        }
    }
}
