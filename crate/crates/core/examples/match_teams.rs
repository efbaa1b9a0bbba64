//! Matched down-sampling of a large group against a small one.
//!
//! The majority group is mostly short teams; nearest-neighbor matching on
//! event-count vectors picks the majority teams that look like the
//! minority, and the median table shows the gap closing.
//!
//! ```bash
//! cargo run --release --example match_teams
//! ```

use teamflow::matcher::{match_teams, median_table, TeamVector};
use teamflow::synth::{generate_team_sequences, BotAccountSpec, GroupSpec, SynthSpec};
use teamflow::teams::FrequencyDims;

fn vectors(seed: u64, n: usize, lengths: (usize, usize), repo_offset: u64) -> teamflow::Result<Vec<TeamVector>> {
    let spec = SynthSpec {
        seed,
        groups: vec![GroupSpec {
            name: "g".into(),
            n_teams: n,
            ..GroupSpec::default()
        }],
        min_length: lengths.0,
        max_length: lengths.1,
        bot_accounts: BotAccountSpec {
            n_accounts: 0,
            ..BotAccountSpec::default()
        },
        ..SynthSpec::default()
    };
    Ok(generate_team_sequences(&spec)?
        .0
        .iter()
        .map(|s| {
            let mut v = TeamVector::from_sequence(s, FrequencyDims::Six);
            v.repo_id += repo_offset;
            v
        })
        .collect())
}

fn main() -> teamflow::Result<()> {
    let minority = vectors(1, 80, (20, 50), 0)?;
    let majority = vectors(2, 600, (5, 30), 1_000_000)?;
    let pairs = match_teams(&minority, &majority)?;
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

    let table = median_table(FrequencyDims::Six, &minority, &majority, &matched)?;
    println!("{:<14}{:>10}{:>10}{:>10}", "type", "minority", "all", "matched");
    for r in &table.rows {
        println!(
            "{:<14}{:>10}{:>10}{:>10}",
            r.event_type.as_str(),
            r.minority,
            r.majority_before,
            r.majority_after
        );
    }
    let mean = pairs.iter().map(|p| p.distance).sum::<f64>() / pairs.len() as f64;
    println!("{} pairs, mean distance {mean:.2}", pairs.len());
    Ok(())
}
