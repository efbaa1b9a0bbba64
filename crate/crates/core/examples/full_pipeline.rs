//! Runs every stage on the bundled sample and prints the headline numbers.
//!
//! ```bash
//! cargo run --release --example full_pipeline -- /tmp/teamflow_out
//! ```

use std::path::{Path, PathBuf};

use teamflow::pipeline::{run, PipelineConfig};

fn main() -> teamflow::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let mut config = PipelineConfig::load(&data.join("sample_config.json"))?;
    config.inputs = vec![data.join("sample_events.ndjson")];
    config.labels = Some(data.join("sample_labels.csv"));
    config.output_dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("out"));

    let report = run(&config)?;
    let c = &report.corpus;
    println!(
        "{} events, {} candidates, {} predicted bots, teams: {} human-bot / {} human-only",
        c.events, c.candidate_accounts, c.predicted_bots, c.teams.kept_human_bot, c.teams.kept_human_only
    );
    for cv in &report.classifiers {
        println!("  {} F1 {:.3}", cv.kind.as_str(), cv.mean_f1);
    }
    for w in &report.motifs {
        for g in &w.groups {
            println!(
                "  w={} {}: {} motifs {:?}",
                w.w,
                g.group,
                g.accepted,
                g.top.iter().take(3).collect::<Vec<_>>()
            );
        }
    }
    let rl = &report.run_lengths;
    println!(
        "  run lengths human-only vs human-bot: {:?}, p = {:.2e}",
        rl.direction, rl.test.p_two_sided
    );
    println!("artifacts in {}", config.output_dir.display());
    Ok(())
}
