//! Bot detection on a synthetic labeled fixture.
//!
//! Extracts the four account features, cross-validates both classifier
//! kinds on the same stratified folds, then trains a final model and
//! classifies a few hand-made accounts.
//!
//! ```bash
//! cargo run --release --example detect_bots
//! ```

use teamflow::bots::{
    evaluate_cv, extract_features, train, AccountFeatures, ClassifierKind, ClassifierParams, Label, Placement,
};
use teamflow::synth::{generate_bot_accounts, SynthSpec};

fn main() -> teamflow::Result<()> {
    let spec = SynthSpec {
        seed: 3,
        ..SynthSpec::default()
    };
    let accounts = generate_bot_accounts(&spec)?;
    let features = accounts
        .iter()
        .map(|a| extract_features(&a.login, &a.events.iter().collect::<Vec<_>>(), 200))
        .collect::<teamflow::Result<Vec<_>>>()?;
    let labels: Vec<Label> = accounts.iter().map(|a| a.label).collect();

    let params = ClassifierParams::default();
    for kind in [ClassifierKind::GradientBoosting, ClassifierKind::LogisticRegression] {
        let cv = evaluate_cv(kind, &features, &labels, &params, 5, 3)?;
        println!(
            "{:<20} F1 {:.3}  precision {:.3}  recall {:.3}",
            kind.as_str(),
            cv.mean_f1,
            cv.mean_precision,
            cv.mean_recall
        );
    }

    let model = train(ClassifierKind::GradientBoosting, &features, &labels, &params)?;
    let probes = [
        (
            "templated commenter",
            AccountFeatures {
                comment_similarity: 0.85,
                organization_owned: true,
                unique_event_types: 1,
                bot_placement: Placement::End,
            },
        ),
        (
            "busy human",
            AccountFeatures {
                comment_similarity: 0.1,
                organization_owned: false,
                unique_event_types: 6,
                bot_placement: Placement::Middle,
            },
        ),
    ];
    for (name, f) in probes {
        let p = model.predict(&f)?;
        println!("{name:<20} -> {} (p = {:.2})", p.label, p.probability);
    }
    Ok(())
}
