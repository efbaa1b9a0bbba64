//! Contrast motif discovery with a planted motif.
//!
//! Plants PU PR IS PU into 80% of group A's sequences, sweeps window
//! lengths 2 to 5 and writes the w = 4 motif graph of group A as DOT.
//!
//! ```bash
//! cargo run --release --example contrast_motifs > motifs_a.dot
//! ```

use teamflow::motif::{motif_graph, window_sweep, MotifParams, SequenceGroup};
use teamflow::synth::{generate_team_sequences, BotAccountSpec, GroupSpec, PlantedMotif, SynthSpec};
use teamflow::teams::encode_symbols;

fn main() -> teamflow::Result<()> {
    let spec = SynthSpec {
        seed: 11,
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
        motifs: vec![PlantedMotif {
            symbols: "PRIP".into(),
            rates: vec![0.8, 0.0],
        }],
        bot_accounts: BotAccountSpec {
            n_accounts: 0,
            ..BotAccountSpec::default()
        },
        ..SynthSpec::default()
    };
    let (seqs, manifest) = generate_team_sequences(&spec)?;
    eprintln!("planted {} occurrences", manifest.insertions.len());

    let groups: Vec<SequenceGroup> = manifest
        .groups
        .iter()
        .map(|g| {
            let members = seqs.iter().filter(|s| g.repo_ids.contains(&s.repo_id));
            SequenceGroup::new(g.name.clone(), members.map(|s| s.symbols.clone()).collect())
        })
        .collect();

    let sweep = window_sweep(&groups, 2..=5, &MotifParams::default());
    for (w, set) in &sweep {
        let set = set
            .as_ref()
            .map_err(|e| teamflow::Error::InvalidParameter(e.to_string()))?;
        for g in &set.groups {
            let top: Vec<String> = g.motifs.iter().take(5).map(|m| encode_symbols(&m.symbols)).collect();
            eprintln!("w={w} {}: {} accepted, top {:?}", g.group, g.motifs.len(), top);
        }
    }

    if let Some(Ok(set)) = sweep.get(&4) {
        let a = set.group("A").expect("group A");
        let graph = motif_graph(a.motifs.iter().map(|m| m.symbols.as_slice()));
        print!("{}", graph.to_dot("A"));
    }
    Ok(())
}
