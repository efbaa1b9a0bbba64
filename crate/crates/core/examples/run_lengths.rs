//! Issue-comment run lengths of clustered versus interspersed teams.
//!
//! Both groups share their background draws, so they hold exactly the same
//! number of comments; only the arrangement differs.
//!
//! ```bash
//! cargo run --release --example run_lengths
//! ```

use teamflow::stats::{compare_run_lengths, RunLengthMode};
use teamflow::synth::{generate_team_sequences, BotAccountSpec, CommentMode, GroupSpec, SynthSpec};

fn main() -> teamflow::Result<()> {
    let spec = SynthSpec {
        seed: 5,
        paired_backbones: true,
        groups: vec![
            GroupSpec {
                name: "clustered".into(),
                n_teams: 150,
                comment_mode: CommentMode::Clustered,
                ..GroupSpec::default()
            },
            GroupSpec {
                name: "interspersed".into(),
                n_teams: 150,
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
    let (seqs, _) = generate_team_sequences(&spec)?;
    let (a, b) = seqs.split_at(150);

    for mode in [RunLengthMode::PerTeamMeans, RunLengthMode::PooledRuns] {
        let c = compare_run_lengths(
            a.iter().map(|s| s.pre_reduction.as_slice()),
            b.iter().map(|s| s.pre_reduction.as_slice()),
            mode,
        )?;
        println!(
            "{mode:?}: means {:.2} vs {:.2}, direction {:?}, U = {}, p = {:.2e} ({:?})",
            c.mean_first, c.mean_second, c.direction, c.test.u_statistic, c.test.p_two_sided, c.test.method
        );
    }
    Ok(())
}
