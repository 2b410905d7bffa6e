#[allow(dead_code)]
#[path = "../../validation/src/lib.rs"]
mod common;

use proptest::prelude::*;
use ptlc_swap::adaptor::{
    commit_secret, complete, extract_secret, presign, verify_presignature, AdaptorSecret,
    PreSignature,
};
use ptlc_swap::chainsim::{EthChain, EthConfig, EthTx, InstanceState, Simulation};
use ptlc_swap::fee::{compute_fee, FeeRate};
use ptlc_swap::group::{Group, Secp256k1, Toy23};
use ptlc_swap::ids::{Account, SwapId};
use ptlc_swap::schnorr::{sign, sign_with_nonce, verify, KeyPair, Signature};
use ptlc_swap::taproot::{tweak_keypair, tweak_public, SwapMetadata};

type S = <Secp256k1 as Group>::Scalar;

fn secp_scalar() -> impl Strategy<Value = S> {
    any::<[u8; 32]>().prop_filter_map("nonzero scalar", |b| {
        let s = Secp256k1::reduce_digest(&b);
        (!Secp256k1::is_zero(&s)).then_some(s)
    })
}

fn metadata() -> impl Strategy<Value = SwapMetadata> {
    (
        1..u64::MAX,
        1..u128::MAX,
        any::<u64>(),
        any::<u64>(),
        prop::collection::vec(any::<u8>(), 0..40),
        any::<[u8; 32]>(),
    )
        .prop_map(
            |(amount_sat, amount_wei, timeout_btc, timeout_eth, c, id)| SwapMetadata {
                amount_sat,
                amount_wei,
                timeout_btc,
                timeout_eth,
                commitment: ptlc_swap::adaptor::SecretCommitment::from_bytes(c),
                swap_id: SwapId(id),
            },
        )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn secp_signatures_verify_only_their_message(x in secp_scalar(), m in any::<Vec<u8>>(), other in any::<Vec<u8>>()) {
        let kp = KeyPair::<Secp256k1>::from_secret(x);
        let sig = sign(&kp, &m, b"prop");
        prop_assert!(verify(&sig, kp.public(), &m));
        prop_assume!(other != m);
        prop_assert!(!verify(&sig, kp.public(), &other));
        let sig2 = Signature::<Secp256k1>::from_bytes(&sig.to_bytes()).unwrap();
        prop_assert_eq!(sig2, sig);
    }

    #[test]
    fn secp_adaptor_round_trip(x in secp_scalar(), sa in secp_scalar(), wrong in secp_scalar(), m in any::<[u8; 32]>()) {
        let kp = KeyPair::<Secp256k1>::from_secret(x);
        let secret = AdaptorSecret::new(sa).unwrap();
        let ps = presign(&kp, &m, &secret, b"prop");
        prop_assert!(verify_presignature(&ps, kp.public(), &m));
        let full = complete(&ps, &sa);
        prop_assert_eq!(full, sign(&kp, &m, b"prop"));
        prop_assert!(verify(&full, kp.public(), &m));
        prop_assert_eq!(extract_secret(&full, &ps).unwrap(), secret);
        prop_assert_eq!(commit_secret(&secret), ps.commitment.clone());
        prop_assume!(wrong != sa);
        prop_assert!(!verify(&complete(&ps, &wrong), kp.public(), &m));
        prop_assert_eq!(PreSignature::<Secp256k1>::from_bytes(&ps.to_bytes()).unwrap(), ps);
    }

    #[test]
    fn secp_tweak_agrees_on_both_sides(x in secp_scalar(), md in metadata(), m in any::<[u8; 32]>()) {
        let kp = KeyPair::<Secp256k1>::from_secret(x);
        let tk = tweak_keypair(&kp, &md);
        prop_assert_eq!(tk.tweaked_public, tweak_public::<Secp256k1>(kp.public(), &md));
        prop_assert_eq!(Secp256k1::base_mul(&tk.tweaked_secret), tk.tweaked_public);
        let sig = sign(&tk.signing_key().unwrap(), &m, b"prop");
        prop_assert!(verify(&sig, &tk.tweaked_public, &m));
        prop_assert!(!verify(&sig, kp.public(), &m));
        prop_assert_eq!(SwapMetadata::from_canonical_bytes(&md.canonical_bytes()).unwrap(), md);
    }

    #[test]
    fn toy_signing_matches_reference(x in 1u64..23, k in 1u64..23, m in any::<Vec<u8>>()) {
        let sig = sign_with_nonce(&KeyPair::<Toy23>::from_secret(common::ts(x)), &m, &common::ts(k));
        prop_assert_eq!((common::pv(&sig.nonce_point), common::sv(&sig.scalar)), common::sign(x, k, &m));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn fee_splits_the_amount_exactly(amount in any::<u128>(), den in 2u64..1_000_000, num_frac in 0.0f64..1.0) {
        let num = 1 + ((den - 2) as f64 * num_frac) as u64;
        let rate = FeeRate::new(num, den).unwrap();
        let (fee, net) = compute_fee(amount, rate);
        prop_assert_eq!(fee.checked_add(net), Some(amount));
        prop_assert!(fee <= amount);
        // fee = floor(amount * num / den), checked without overflow
        let (q, r) = (amount / den as u128, amount % den as u128);
        prop_assert_eq!(fee, q * num as u128 + r * num as u128 / den as u128);
    }

    #[test]
    fn clock_advances_compose(a in 0u64..2_000, b in 0u64..2_000) {
        let mut split = Simulation::<Toy23>::default();
        let mut events = split.advance_time(a);
        events.extend(split.advance_time(b));
        let mut whole = Simulation::<Toy23>::default();
        prop_assert_eq!(events, whole.advance_time(a + b));
        prop_assert_eq!((split.btc.height(), split.eth.height()), ((a + b) / 600, (a + b) / 15));
    }
}

#[derive(Debug, Clone)]
enum Op {
    Deploy(usize, usize),
    Lock(usize, usize),
    Collateral(usize, usize),
    Claim(usize, usize, u64),
    Refund(usize, usize),
    Mine(u64),
}

fn op() -> impl Strategy<Value = Op> {
    let who = 0usize..3;
    let swap = 0usize..2;
    prop_oneof![
        (who.clone(), swap.clone()).prop_map(|(w, s)| Op::Deploy(w, s)),
        (who.clone(), swap.clone()).prop_map(|(w, s)| Op::Lock(w, s)),
        (who.clone(), swap.clone()).prop_map(|(w, s)| Op::Collateral(w, s)),
        (who.clone(), swap.clone(), 1u64..23).prop_map(|(w, s, v)| Op::Claim(w, s, v)),
        (who, swap).prop_map(|(w, s)| Op::Refund(w, s)),
        (1u64..400).prop_map(Op::Mine),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    /// Whatever anyone submits, wei is neither created nor destroyed and an
    /// instance pays out at most once.
    #[test]
    fn eth_chain_conserves_funds(ops in prop::collection::vec(op(), 1..60)) {
        let people = [Account::new("a"), Account::new("b"), Account::new("c")];
        let mut chain = EthChain::<Toy23>::new(EthConfig::default());
        for p in &people {
            chain.credit(p, 50_000);
        }
        let secret = |v: u64| AdaptorSecret::<Toy23>::new(common::ts(v)).unwrap();
        let params = |s: usize| SwapMetadata {
            amount_sat: 1,
            amount_wei: 10_000,
            timeout_btc: 1,
            timeout_eth: 900,
            commitment: commit_secret(&secret(4 + s as u64)),
            swap_id: SwapId([s as u8; 32]),
        };
        let id = |s: usize| SwapId([s as u8; 32]);
        let supply = chain.total_supply();
        let mut t = 0;
        let mut finished: Vec<Option<InstanceState>> = vec![None, None];
        for op in ops {
            let tx = match op {
                Op::Deploy(w, s) => EthTx::Deploy {
                    from: people[w].clone(),
                    params: params(s),
                    beneficiary: people[(w + 1) % 3].clone(),
                    facilitator: (s == 1).then(|| (people[2].clone(), FeeRate::new(1, 10).unwrap())),
                    collateral: 1_000,
                },
                Op::Lock(w, s) => EthTx::Lock { from: people[w].clone(), swap_id: id(s) },
                Op::Collateral(w, s) => EthTx::PostCollateral { from: people[w].clone(), swap_id: id(s) },
                Op::Claim(w, s, v) => EthTx::Claim { caller: people[w].clone(), swap_id: id(s), secret: secret(v) },
                Op::Refund(w, s) => EthTx::Refund { caller: people[w].clone(), swap_id: id(s) },
                Op::Mine(dt) => {
                    t += dt;
                    chain.mine_block(t);
                    prop_assert_eq!(chain.total_supply(), supply);
                    check_terminal_states(&chain, &mut finished)?;
                    continue;
                }
            };
            chain.submit(tx);
        }
        chain.mine_block(t + 1);
        prop_assert_eq!(chain.total_supply(), supply);
        check_terminal_states(&chain, &mut finished)?;
    }
}

/// Terminal instances hold nothing and never change state again.
fn check_terminal_states(
    chain: &EthChain<Toy23>,
    finished: &mut [Option<InstanceState>],
) -> Result<(), TestCaseError> {
    for (s, seen) in finished.iter_mut().enumerate() {
        let Some(inst) = chain.instance(&SwapId([s as u8; 32])) else {
            continue;
        };
        if let Some(prev) = *seen {
            prop_assert_eq!(inst.state, prev);
        }
        if inst.state.is_terminal() {
            *seen = Some(inst.state);
            prop_assert_eq!(inst.escrow(), 0);
        }
    }
    Ok(())
}
