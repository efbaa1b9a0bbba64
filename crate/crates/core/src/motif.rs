//! Contrast motif discovery over reduced-alphabet sequences.
//!
//! For every group, the most widespread length-`w` windows become
//! candidates. A candidate is kept for its group when its mean distance to
//! the group's sequences is below the mean distance to every other group
//! and a two-sided Mann-Whitney test on the two distance samples is
//! significant after Bonferroni correction over all candidates.
//!
//! The distance from a window to a sequence is the smallest Hamming
//! distance over all alignments, divided by `w`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::mann_whitney_u;
use crate::teams::{decode_symbols, encode_symbols, ReducedSymbol};

pub type Window = Vec<ReducedSymbol>;

pub const DEFAULT_CANDIDATES: usize = 50;
pub const DEFAULT_ALPHA: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MotifParams {
    /// Candidates per group; `None` takes every distinct window.
    pub candidates: Option<usize>,
    /// Family-wise significance level.
    pub alpha: f64,
}

impl Default for MotifParams {
    fn default() -> Self {
        MotifParams {
            candidates: Some(DEFAULT_CANDIDATES),
            alpha: DEFAULT_ALPHA,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceGroup {
    pub name: String,
    pub sequences: Vec<Vec<ReducedSymbol>>,
}

impl SequenceGroup {
    pub fn new(name: impl Into<String>, sequences: Vec<Vec<ReducedSymbol>>) -> Self {
        SequenceGroup {
            name: name.into(),
            sequences,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Motif {
    pub symbols: Window,
    pub group: String,
    pub mean_dist_own: f64,
    /// Smallest mean distance among the other groups.
    pub mean_dist_other: f64,
    /// Bonferroni-corrected p, the largest over the other groups.
    pub p_value: f64,
    /// Own-group sequences containing the window exactly.
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupMotifs {
    pub group: String,
    pub motifs: Vec<Motif>,
    /// Sequences left out because they are shorter than the window.
    pub excluded_sequences: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastMotifSet {
    pub w: usize,
    pub groups: Vec<GroupMotifs>,
    /// Total candidates tested, the Bonferroni factor.
    pub candidate_count: usize,
}

impl ContrastMotifSet {
    pub fn group(&self, name: &str) -> Option<&GroupMotifs> {
        self.groups.iter().find(|g| g.group == name)
    }

    pub fn motifs(&self) -> impl Iterator<Item = &Motif> {
        self.groups.iter().flat_map(|g| &g.motifs)
    }
}

fn check_window(w: usize) -> Result<()> {
    if w == 0 {
        Err(Error::InvalidParameter("window length must be positive".into()))
    } else {
        Ok(())
    }
}

/// Distinct windows of each length-`w` slice in `group`, with document frequency.
fn document_frequencies(group: &[Vec<ReducedSymbol>], w: usize) -> HashMap<&[ReducedSymbol], usize> {
    let mut df: HashMap<&[ReducedSymbol], usize> = HashMap::new();
    for seq in group {
        let distinct: BTreeSet<&[ReducedSymbol]> = seq.windows(w).collect();
        for win in distinct {
            *df.entry(win).or_default() += 1;
        }
    }
    df
}

/// The `k` windows contained in the most sequences, ties broken by symbol order.
pub fn candidates(group: &[Vec<ReducedSymbol>], w: usize, k: Option<usize>) -> Result<Vec<Window>> {
    check_window(w)?;
    if k == Some(0) {
        return Err(Error::InvalidParameter("candidate count must be positive".into()));
    }
    if group.iter().all(|s| s.len() < w) {
        return Err(Error::WindowTooLong { w });
    }
    let mut ranked: Vec<(&[ReducedSymbol], usize)> = document_frequencies(group, w).into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    if let Some(k) = k {
        ranked.truncate(k);
    }
    Ok(ranked.into_iter().map(|(win, _)| win.to_vec()).collect())
}

fn min_hamming(m: &[ReducedSymbol], s: &[ReducedSymbol]) -> usize {
    s.windows(m.len())
        .map(|v| v.iter().zip(m).filter(|(a, b)| a != b).count())
        .min()
        .unwrap_or(m.len())
}

/// Normalized minimum Hamming distance from `m` to any window of `s`.
pub fn motif_distance(m: &[ReducedSymbol], s: &[ReducedSymbol]) -> Result<f64> {
    check_window(m.len())?;
    if s.len() < m.len() {
        return Err(Error::SequenceTooShort {
            len: s.len(),
            w: m.len(),
        });
    }
    Ok(min_hamming(m, s) as f64 / m.len() as f64)
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Finds the contrast motifs of every group at window length `w`.
///
/// Every sequence must be at least `w` long.
pub fn discover(groups: &[SequenceGroup], w: usize, params: &MotifParams) -> Result<ContrastMotifSet> {
    check_window(w)?;
    if groups.len() < 2 {
        return Err(Error::InvalidParameter("need at least two groups".into()));
    }
    if !(params.alpha > 0.0 && params.alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must be in (0, 1], got {}",
            params.alpha
        )));
    }
    for g in groups {
        if g.sequences.is_empty() {
            return Err(Error::InvalidParameter(format!("group {:?} is empty", g.name)));
        }
        if let Some(s) = g.sequences.iter().find(|s| s.len() < w) {
            return Err(Error::SequenceTooShort { len: s.len(), w });
        }
    }

    let per_group: Vec<Vec<Window>> = groups
        .iter()
        .map(|g| candidates(&g.sequences, w, params.candidates))
        .collect::<Result<_>>()?;
    let candidate_count: usize = per_group.iter().map(Vec::len).sum();

    // distances of each distinct candidate to every sequence, grouped
    let unique: Vec<&Window> = per_group
        .iter()
        .flatten()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let distances: HashMap<&Window, Vec<Vec<f64>>> = unique
        .par_iter()
        .map(|&m| {
            let per: Vec<Vec<f64>> = groups
                .iter()
                .map(|g| {
                    g.sequences
                        .iter()
                        .map(|s| min_hamming(m, s) as f64 / w as f64)
                        .collect()
                })
                .collect();
            (m, per)
        })
        .collect();

    let mut out = Vec::with_capacity(groups.len());
    for (gi, group) in groups.iter().enumerate() {
        let mut accepted = Vec::new();
        for m in &per_group[gi] {
            let d = &distances[m];
            let own = &d[gi];
            let own_mean = mean(own);
            let mut other_mean = f64::INFINITY;
            let mut worst_p: f64 = 0.0;
            let mut keep = true;
            for (hi, other) in d.iter().enumerate() {
                if hi == gi {
                    continue;
                }
                let m_other = mean(other);
                other_mean = other_mean.min(m_other);
                if own_mean >= m_other {
                    keep = false;
                    break;
                }
                let p = mann_whitney_u(own, other)?.p_two_sided;
                worst_p = worst_p.max((p * candidate_count as f64).min(1.0));
                if worst_p >= params.alpha {
                    keep = false;
                    break;
                }
            }
            if keep {
                accepted.push(Motif {
                    symbols: m.clone(),
                    group: group.name.clone(),
                    mean_dist_own: own_mean,
                    mean_dist_other: other_mean,
                    p_value: worst_p,
                    support: own.iter().filter(|&&x| x == 0.0).count(),
                });
            }
        }
        accepted.sort_by(|a, b| {
            a.mean_dist_own
                .total_cmp(&b.mean_dist_own)
                .then_with(|| a.symbols.cmp(&b.symbols))
        });
        out.push(GroupMotifs {
            group: group.name.clone(),
            motifs: accepted,
            excluded_sequences: 0,
        });
    }
    Ok(ContrastMotifSet {
        w,
        groups: out,
        candidate_count,
    })
}

/// Runs [`discover`] for each window length.
///
/// Sequences shorter than a window are dropped at that length (and counted
/// in `excluded_sequences`); a length that empties some group yields
/// `WindowTooLong`.
pub fn window_sweep(
    groups: &[SequenceGroup],
    windows: RangeInclusive<usize>,
    params: &MotifParams,
) -> BTreeMap<usize, Result<ContrastMotifSet>> {
    windows
        .map(|w| {
            let trimmed: Vec<SequenceGroup> = groups
                .iter()
                .map(|g| SequenceGroup {
                    name: g.name.clone(),
                    sequences: g.sequences.iter().filter(|s| s.len() >= w).cloned().collect(),
                })
                .collect();
            let result = if trimmed.iter().any(|g| g.sequences.is_empty()) {
                Err(Error::WindowTooLong { w })
            } else {
                discover(&trimmed, w, params).map(|mut set| {
                    for (g, (orig, kept)) in set.groups.iter_mut().zip(groups.iter().zip(&trimmed)) {
                        g.excluded_sequences = orig.sequences.len() - kept.sequences.len();
                        if g.excluded_sequences > 0 {
                            log::warn!(
                                "w={w}: excluded {} sequences of group {} shorter than the window",
                                g.excluded_sequences,
                                g.group
                            );
                        }
                    }
                    set
                })
            };
            (w, result)
        })
        .collect()
}

/// Adjacent-symbol transitions aggregated over a set of motifs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MotifGraph {
    pub nodes: BTreeSet<ReducedSymbol>,
    pub edges: BTreeMap<(ReducedSymbol, ReducedSymbol), u32>,
}

impl MotifGraph {
    pub fn total_weight(&self) -> u64 {
        self.edges.values().map(|&w| u64::from(w)).sum()
    }

    /// Graphviz digraph named `name`; edge weights go in `label`.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = String::new();
        writeln!(out, "digraph \"{}\" {{", name.replace('"', "\\\"")).unwrap();
        for n in &self.nodes {
            writeln!(out, "    {n};").unwrap();
        }
        for ((a, b), w) in &self.edges {
            writeln!(out, "    {a} -> {b} [label={w}];").unwrap();
        }
        out.push_str("}\n");
        out
    }
}

pub fn motif_graph<'a>(motifs: impl IntoIterator<Item = &'a [ReducedSymbol]>) -> MotifGraph {
    let mut g = MotifGraph::default();
    for m in motifs {
        g.nodes.extend(m.iter().copied());
        for pair in m.windows(2) {
            *g.edges.entry((pair[0], pair[1])).or_default() += 1;
        }
    }
    g
}

#[derive(Serialize, Deserialize)]
struct MotifRow {
    group: String,
    w: usize,
    symbols: String,
    mean_own: f64,
    mean_other: f64,
    p_corrected: f64,
    support: usize,
}

/// Writes `group,w,symbols,mean_own,mean_other,p_corrected,support` rows.
pub fn write_motifs<'a, W: Write>(out: W, sets: impl IntoIterator<Item = &'a ContrastMotifSet>) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    for set in sets {
        for m in set.motifs() {
            wtr.serialize(MotifRow {
                group: m.group.clone(),
                w: set.w,
                symbols: encode_symbols(&m.symbols),
                mean_own: m.mean_dist_own,
                mean_other: m.mean_dist_other,
                p_corrected: m.p_value,
                support: m.support,
            })?;
        }
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_motifs<R: Read>(src: R) -> Result<Vec<(usize, Motif)>> {
    let mut out = Vec::new();
    for row in csv::Reader::from_reader(src).deserialize::<MotifRow>() {
        let row = row?;
        out.push((
            row.w,
            Motif {
                symbols: decode_symbols(&row.symbols)?,
                group: row.group,
                mean_dist_own: row.mean_own,
                mean_dist_other: row.mean_other,
                p_value: row.p_corrected,
                support: row.support,
            },
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use ReducedSymbol::*;

    #[test]
    fn candidate_enumeration() {
        let g = vec![vec![PU, PR, PU, PR, PU]];
        let c = candidates(&g, 2, Some(2)).unwrap();
        assert_eq!(c, [vec![PU, PR], vec![PR, PU]]);
        assert_eq!(candidates(&g, 2, Some(10)).unwrap().len(), 2);
        let g = vec![vec![PU, PR, IS], vec![IS, PR, PU], vec![PU, PR, IS]];
        assert_eq!(candidates(&g, 3, None).unwrap(), [vec![PU, PR, IS], vec![IS, PR, PU]]);
        assert!(matches!(candidates(&g, 4, None), Err(Error::WindowTooLong { w: 4 })));
    }

    #[test]
    fn candidates_rank_by_document_frequency() {
        // PU PU occurs three times in one sequence, CR DE once in each of two
        let g = vec![vec![PU, PU, PU, PU], vec![CR, DE], vec![CR, DE]];
        assert_eq!(candidates(&g, 2, Some(1)).unwrap(), [vec![CR, DE]]);
    }

    #[test]
    fn distances() {
        assert_eq!(motif_distance(&[PU, PR], &[IS, PU, PR]).unwrap(), 0.0);
        assert_eq!(motif_distance(&[PU, PU], &[IS, IS, IS]).unwrap(), 1.0);
        assert!((motif_distance(&[PU, PR, IS], &[PU, PR, PU, IS]).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert!(matches!(
            motif_distance(&[PU, PR, IS], &[PU]),
            Err(Error::SequenceTooShort { len: 1, w: 3 })
        ));
    }

    #[test]
    fn identical_groups_have_no_motifs() {
        let seqs = vec![
            vec![PU, PR, IS, PU, CR],
            vec![PU, PU, PR, DE, IS],
            vec![IS, IS, PR, PU, PU],
        ];
        let groups = [SequenceGroup::new("a", seqs.clone()), SequenceGroup::new("b", seqs)];
        let set = discover(&groups, 3, &MotifParams::default()).unwrap();
        assert_eq!(set.motifs().count(), 0);
    }

    #[test]
    fn graph_from_motifs() {
        let g = motif_graph([&[PU, PR, PU][..]]);
        assert_eq!(g.edges.len(), 2);
        assert_eq!(g.edges[&(PU, PR)], 1);
        assert_eq!(g.edges[&(PR, PU)], 1);
        assert_eq!(motif_graph(std::iter::empty()), MotifGraph::default());
        let g = motif_graph([&[PU, PR][..], &[IS, PU, PR][..]]);
        assert_eq!(g.edges[&(PU, PR)], 2);
        assert_eq!(g.nodes, BTreeSet::from([PU, PR, IS]));
        assert_eq!(
            g.to_dot("human-bot"),
            "digraph \"human-bot\" {\n    PU;\n    PR;\n    IS;\n    PU -> PR [label=2];\n    IS -> PU [label=1];\n}\n"
        );
    }

    fn symbol() -> impl Strategy<Value = ReducedSymbol> {
        (0usize..6).prop_map(|i| ReducedSymbol::ALL[i])
    }

    proptest! {
        #[test]
        fn distance_zero_iff_contained(
            m in prop::collection::vec(symbol(), 1..4),
            s in prop::collection::vec(symbol(), 4..12),
        ) {
            let d = motif_distance(&m, &s).unwrap();
            let contained = s.windows(m.len()).any(|v| v == m.as_slice());
            prop_assert_eq!(d == 0.0, contained);
            prop_assert!((0.0..=1.0).contains(&d));
        }

        #[test]
        fn distance_invariant_under_relabeling(
            m in prop::collection::vec(symbol(), 1..4),
            s in prop::collection::vec(symbol(), 4..12),
            rot in 0usize..6,
        ) {
            let relabel = |x: &ReducedSymbol| ReducedSymbol::ALL[(*x as usize + rot) % 6];
            let m2: Vec<_> = m.iter().map(relabel).collect();
            let s2: Vec<_> = s.iter().map(relabel).collect();
            prop_assert_eq!(motif_distance(&m, &s).unwrap(), motif_distance(&m2, &s2).unwrap());
        }

        #[test]
        fn graph_weight_counts_transitions(
            motifs in prop::collection::vec(prop::collection::vec(symbol(), 3), 0..10),
        ) {
            let g = motif_graph(motifs.iter().map(Vec::as_slice));
            prop_assert_eq!(g.total_weight(), 2 * motifs.len() as u64);
            prop_assert!(g.edges.values().all(|&w| w >= 1));
        }
    }
}
