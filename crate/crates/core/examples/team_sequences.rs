//! From raw events to team sequences.
//!
//! Parses a handful of NDJSON events, builds teams (members are humans with
//! a push or pull request), and prints each team's reduced-alphabet
//! sequence and frequency vector.
//!
//! ```bash
//! cargo run --example team_sequences
//! ```

use std::collections::HashMap;

use teamflow::bots::Label;
use teamflow::event::{parse_events_str, ParseMode};
use teamflow::teams::{build_teams, encode_symbols, frequency_vector, FrequencyDims, TeamSequence};

const EVENTS: &str = r#"
{"event_type":"Push","actor_id":1,"actor_login":"ana","repo_id":10,"created_at":"2019-06-01T10:00:00Z","org_owned_actor":false}
{"event_type":"PullRequest","actor_id":2,"actor_login":"ben","repo_id":10,"created_at":"2019-06-01T10:05:00Z","org_owned_actor":false}
{"event_type":"IssueComment","actor_id":3,"actor_login":"ci-bot","repo_id":10,"created_at":"2019-06-01T10:06:00Z","org_owned_actor":true,"comment_body":"Build 12 passed"}
{"event_type":"IssueComment","actor_id":1,"actor_login":"ana","repo_id":10,"created_at":"2019-06-01T10:07:00Z","org_owned_actor":false,"comment_body":"thanks"}
{"event_type":"Watch","actor_id":9,"actor_login":"fan","repo_id":10,"created_at":"2019-06-01T10:08:00Z","org_owned_actor":false}
{"event_type":"Push","actor_id":2,"actor_login":"ben","repo_id":10,"created_at":"2019-06-01T10:09:00Z","org_owned_actor":false}
{"event_type":"Push","actor_id":4,"actor_login":"cy","repo_id":20,"created_at":"2019-06-02T09:00:00Z","org_owned_actor":false}
{"event_type":"Create","actor_id":5,"actor_login":"dee","repo_id":20,"created_at":"2019-06-02T09:01:00Z","org_owned_actor":false}
{"event_type":"PullRequest","actor_id":5,"actor_login":"dee","repo_id":20,"created_at":"2019-06-02T09:02:00Z","org_owned_actor":false}
{"event_type":"Delete","actor_id":4,"actor_login":"cy","repo_id":20,"created_at":"2019-06-02T09:03:00Z","org_owned_actor":false}
"#;

fn main() -> teamflow::Result<()> {
    let (events, _) = parse_events_str(EVENTS, ParseMode::Strict)?;
    let labels = HashMap::from([("ci-bot".to_string(), Label::Bot)]);
    for team in build_teams(&events, &labels) {
        let seq = TeamSequence::from_team(&team);
        println!(
            "repo {} [{}] members {:?}: {}  counts {:?}",
            team.repo_id,
            team.kind,
            team.members,
            encode_symbols(&seq.symbols),
            frequency_vector(&seq, FrequencyDims::Six)
        );
    }
    Ok(())
}
