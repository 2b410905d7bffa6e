use ptlc_swap::chainsim::{tx_label, ChainTag, EventKind};
use ptlc_swap::group::ProfileName;
use ptlc_swap::ids::Account;
use ptlc_swap::protocol::*;

const SAT: u64 = DEFAULT_AMOUNT_SAT;
const WEI: u128 = DEFAULT_AMOUNT_WEI;
const COLLATERAL: u128 = DEFAULT_AMOUNT_WEI / 10;
const GAS: u128 = 5_000;

fn run(scenario: ScenarioName, profile: ProfileName, seed: u64) -> ScenarioReport {
    run_scenario(&ScenarioScript::new(scenario, profile, seed)).unwrap()
}

fn with(scenario: ScenarioName, f: impl FnOnce(&mut Overrides)) -> ScenarioReport {
    let mut script = ScenarioScript::new(scenario, ProfileName::Secp256k1, 0);
    f(&mut script.overrides);
    run_scenario(&script).unwrap()
}

fn ghost(name: &str) -> Outcome {
    Outcome::Refunded {
        ghost: Some(Account::new(name)),
    }
}

#[test]
fn every_scenario_ends_in_its_expected_atomic_outcome() {
    for seed in 0..4 {
        for (scenario, expected) in [
            (ScenarioName::Happy, Outcome::Swapped),
            (ScenarioName::MakerGhost, ghost(MAKER)),
            (ScenarioName::TakerGhost, ghost(TAKER)),
            (ScenarioName::EveReplay, Outcome::Swapped),
            (ScenarioName::Facilitated, Outcome::Swapped),
        ] {
            let r = run(scenario, ProfileName::Secp256k1, seed);
            assert_eq!(r.outcome, expected, "{scenario} seed {seed}");
            assert!(
                r.conservation_errors.is_empty(),
                "{:?}",
                r.conservation_errors
            );
            assert_eq!(r.initial_totals, r.final_totals);
        }
    }
}

#[test]
fn happy_swap_moves_exactly_the_agreed_amounts() {
    let r = run(ScenarioName::Happy, ProfileName::Secp256k1, 7);
    assert_eq!(r.balance(TAKER), (SAT, TAKER_ETH_BALANCE - WEI - GAS));
    assert_eq!(
        r.balance(MAKER),
        (MAKER_BTC_BALANCE - SAT, MAKER_ETH_BALANCE + WEI)
    );
    assert_eq!(r.balance("block_producer"), (0, GAS));
}

#[test]
fn ghosting_maker_forfeits_collateral_to_the_taker() {
    let r = run(ScenarioName::MakerGhost, ProfileName::Secp256k1, 0);
    assert_eq!(r.balance(TAKER), (0, TAKER_ETH_BALANCE - GAS + COLLATERAL));
    assert_eq!(
        r.balance(MAKER),
        (MAKER_BTC_BALANCE, MAKER_ETH_BALANCE - COLLATERAL)
    );
    let refund = r
        .trace
        .iter()
        .find(|e| e.is(EventKind::Refunded))
        .expect("ETH refunded");
    let lock = r.trace.iter().find(|e| e.is(EventKind::Locked)).unwrap();
    assert!(refund.time >= lock.time + DEFAULT_TIMEOUT_ETH - 15);
}

#[test]
fn ghosting_taker_costs_the_maker_nothing() {
    let r = run(ScenarioName::TakerGhost, ProfileName::Secp256k1, 0);
    assert_eq!(r.balance(MAKER), (MAKER_BTC_BALANCE, MAKER_ETH_BALANCE));
    assert_eq!(r.balance(TAKER), (0, TAKER_ETH_BALANCE - GAS));
    assert!(!r.trace.iter().any(|e| e.is(EventKind::BtcFunded)));
}

#[test]
fn facilitator_takes_the_floor_of_its_fraction() {
    for (alpha, fee) in [("0.01", WEI / 100), ("1/3", WEI / 3), ("0.0000001", 0)] {
        let r = with(ScenarioName::Facilitated, |o| {
            o.alpha = Some(FeeSetting::Text(alpha.into()))
        });
        assert_eq!(r.outcome, Outcome::Swapped, "alpha {alpha}");
        assert_eq!(
            r.balance(FACILITATOR),
            (0, FACILITATOR_ETH_BALANCE - GAS + fee),
            "alpha {alpha}"
        );
        assert_eq!(r.balance(MAKER).1, MAKER_ETH_BALANCE + WEI - fee);
        assert_eq!(r.balance(TAKER).1, TAKER_ETH_BALANCE - WEI);
    }
}

#[test]
fn eavesdropper_cannot_divert_anything() {
    for seed in 0..3 {
        let r = run(ScenarioName::EveReplay, ProfileName::Secp256k1, seed);
        assert_eq!(r.adversary_diversions(), 0);
        assert_eq!(r.balance(ADVERSARY), (0, 0));
        let attempts: Vec<_> = r
            .trace
            .iter()
            .filter(|e| e.is(EventKind::AdversaryAttempt))
            .collect();
        assert_eq!(attempts.len(), ADVERSARY_STRATEGIES.len());
        // Tampered spends were front-run and still rejected by the chain.
        let rejected = r
            .trace
            .iter()
            .filter(|e| e.is(EventKind::TxRejected) && e.by(&Account::new(ADVERSARY)))
            .filter(|e| tx_label(&e.payload) == Some("btc_spend"))
            .count();
        assert_eq!(rejected, 5, "seed {seed}");
    }
}

/// The toy hash is linear, so forged signatures verify about one time in
/// 23. That profile exists for hand-checked arithmetic, not security.
#[test]
fn toy_profile_does_not_resist_the_adversary() {
    let broken = (0..100)
        .filter(|&seed| {
            !run(ScenarioName::EveReplay, ProfileName::Toy, seed)
                .outcome
                .is_atomic()
        })
        .count();
    assert!(broken > 0);
    for scenario in [
        ScenarioName::Happy,
        ScenarioName::MakerGhost,
        ScenarioName::TakerGhost,
        ScenarioName::Facilitated,
    ] {
        for seed in 0..20 {
            assert!(
                run(scenario, ProfileName::Toy, seed).is_atomic(),
                "{scenario} seed {seed}"
            );
        }
    }
}

#[test]
fn oracle_confirmations_lengthen_the_maker_critical_path() {
    for (confirmations, expected) in [(1, 15), (2, 30), (4, 60)] {
        let r = with(ScenarioName::Happy, |o| {
            o.oracle_confirmations = Some(confirmations)
        });
        assert_eq!(maker_critical_path(&r.trace), Ok(expected));
    }
}

#[test]
fn message_latency_delays_but_does_not_break_the_swap() {
    let fast = with(ScenarioName::Happy, |_| {});
    let slow = with(ScenarioName::Happy, |o| o.latency = Some(700));
    assert_eq!(slow.outcome, Outcome::Swapped);
    assert!(slow.end_time > fast.end_time);
    assert_eq!(slow.balance(MAKER), fast.balance(MAKER));
}

#[test]
fn short_timeouts_still_refund_cleanly() {
    let r = with(ScenarioName::MakerGhost, |o| {
        o.timeout_btc = Some(1);
        o.timeout_eth = Some(700);
    });
    assert_eq!(r.outcome, ghost(MAKER));
    assert!(r.end_time < 2_000);
}

#[test]
fn invalid_settings_are_rejected_before_running() {
    let bad: [fn(&mut Overrides); 5] = [
        |o| o.alpha = Some(FeeSetting::Text("1".into())),
        |o| o.alpha = Some(FeeSetting::Number(0.0)),
        |o| o.amount_sat = Some(0),
        |o| o.timeout_eth = Some(DEFAULT_TIMEOUT_BTC_BLOCKS * 600),
        |o| o.oracle_confirmations = Some(0),
    ];
    for f in bad {
        let mut script = ScenarioScript::new(ScenarioName::Facilitated, ProfileName::Toy, 0);
        f(&mut script.overrides);
        assert!(run_scenario(&script).is_err(), "{:?}", script.overrides);
    }
}

#[test]
fn trace_ends_with_one_terminal_event() {
    for scenario in ScenarioName::ALL {
        let r = run(scenario, ProfileName::Toy, 1);
        let last = r.trace.events.last().unwrap();
        assert_eq!(last.chain, ChainTag::Offchain);
        let terminal = [
            EventKind::SwapCompleted,
            EventKind::SwapRefunded,
            EventKind::AtomicityViolation,
        ];
        assert!(terminal.contains(&last.kind));
        assert_eq!(
            r.trace
                .iter()
                .filter(|e| terminal.contains(&e.kind))
                .count(),
            1
        );
        assert!(
            r.trace.events.windows(2).all(|w| w[0].time <= w[1].time),
            "{scenario}: time went backwards"
        );
    }
}
