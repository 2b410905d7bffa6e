use ptlc_swap::chainsim::{diff_jsonl, Trace};
use ptlc_swap::group::ProfileName;
use ptlc_swap::protocol::*;

fn jsonl(scenario: ScenarioName, profile: ProfileName, seed: u64) -> String {
    run_scenario(&ScenarioScript::new(scenario, profile, seed))
        .unwrap()
        .trace
        .to_jsonl()
}

#[test]
fn same_seed_gives_byte_identical_traces() {
    for profile in [ProfileName::Toy, ProfileName::Secp256k1] {
        for scenario in ScenarioName::ALL {
            let (a, b) = (jsonl(scenario, profile, 11), jsonl(scenario, profile, 11));
            assert_eq!(a, b, "{scenario} on {profile}");
            assert_eq!(diff_jsonl(&a, &b).unwrap(), None);
        }
    }
}

#[test]
fn traces_round_trip_through_jsonl() {
    for scenario in ScenarioName::ALL {
        let text = jsonl(scenario, ProfileName::Secp256k1, 2);
        assert_eq!(Trace::from_jsonl(&text).unwrap().to_jsonl(), text);
    }
}

#[test]
fn different_seeds_diverge_at_the_first_keyed_event() {
    let d = diff_jsonl(
        &jsonl(ScenarioName::Happy, ProfileName::Secp256k1, 1),
        &jsonl(ScenarioName::Happy, ProfileName::Secp256k1, 2),
    )
    .unwrap()
    .expect("seeds change keys and ids");
    assert_eq!(d.index, 1);
}

#[test]
fn fee_change_diverges_at_the_fee_event() {
    let run = |alpha: &str| {
        let mut s = ScenarioScript::new(ScenarioName::Facilitated, ProfileName::Secp256k1, 5);
        s.overrides.alpha = Some(FeeSetting::Text(alpha.into()));
        run_scenario(&s).unwrap().trace.to_jsonl()
    };
    let d = diff_jsonl(&run("0.01"), &run("0.02"))
        .unwrap()
        .expect("fee is in the trace");
    let left = d.left.unwrap();
    assert_eq!(left["actor"], "facilitator");
    assert_eq!(left["kind"], "proposal_sent");
}

#[test]
fn field_order_does_not_matter_to_the_diff() {
    let text = jsonl(ScenarioName::Happy, ProfileName::Toy, 0);
    let reordered: String = text
        .lines()
        .map(|l| {
            let v: serde_json::Map<String, serde_json::Value> = serde_json::from_str(l).unwrap();
            let mut pairs: Vec<_> = v.into_iter().collect();
            pairs.reverse();
            let body: Vec<String> = pairs
                .iter()
                .map(|(k, v)| format!("{:?}:{}", k, v))
                .collect();
            format!("{{{}}}\n", body.join(","))
        })
        .collect();
    assert_ne!(reordered, text);
    assert_eq!(diff_jsonl(&text, &reordered).unwrap(), None);
}
