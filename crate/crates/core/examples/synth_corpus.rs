//! Writes a synthetic event corpus with its ground-truth manifest.
//!
//! ```bash
//! cargo run --release --example synth_corpus -- /tmp/corpus
//! ```

use std::path::PathBuf;

use teamflow::pipeline::write_synth;
use teamflow::synth::{PlantedMotif, SynthSpec};

fn main() -> teamflow::Result<()> {
    let dest = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("synth_out"));
    let spec = SynthSpec {
        seed: 42,
        motifs: vec![PlantedMotif {
            symbols: "PRIP".into(),
            rates: vec![0.5, 0.0],
        }],
        ..SynthSpec::default()
    };
    println!("{}", serde_json::to_string_pretty(&spec)?);
    let manifest = write_synth(&spec, &dest)?;
    for g in &manifest.groups {
        println!("{}: {} teams", g.name, g.repo_ids.len());
    }
    println!(
        "{} motif insertions, {} team bots, {} labeled accounts -> {}",
        manifest.insertions.len(),
        manifest.team_bots.len(),
        manifest.labeled_accounts.len(),
        dest.display()
    );
    Ok(())
}
