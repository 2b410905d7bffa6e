//! UTXO chain with swap outputs.
//!
//! A swap output is spendable through the key path (a completed adaptor
//! signature plus the unlock value and oracle attestation) at any height,
//! and through the refund path once `refund_height` is reached. Either way
//! it is consumed exactly once.

use std::collections::BTreeMap;

use super::clock::Seconds;
use super::trace::{ChainTag, EventKind, TraceEvent};
use super::ChainError;
use crate::adaptor::PreSignature;
use crate::codec::Writer;
use crate::group::Group;
use crate::ids::{Account, SwapId};
use crate::oracle::UnlockMessage;
use crate::taproot::{check_taproot_spend, SpendTx, TaprootSpend};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaprootOutput<G: Group> {
    pub swap_id: SwapId,
    pub value: u64,
    pub tweaked_key: G::Point,
    pub refund_key: G::Point,
    pub refund_height: u64,
    /// Pre-signature and oracle key the key-path check runs against.
    pub presignature: PreSignature<G>,
    pub oracle_key: G::Point,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FundedOutput<G: Group> {
    pub output: TaprootOutput<G>,
    pub funder: Account,
    pub funded_height: u64,
}

/// How a swap output was consumed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Consumed<G: Group> {
    Spent {
        tx: SpendTx,
        spend: TaprootSpend<G>,
        height: u64,
    },
    Refunded {
        to: Account,
        height: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BtcTx<G: Group> {
    Fund {
        funder: Account,
        output: TaprootOutput<G>,
    },
    Spend {
        submitter: Account,
        tx: SpendTx,
        spend: TaprootSpend<G>,
    },
    Refund {
        submitter: Account,
        swap_id: SwapId,
    },
}

impl<G: Group> BtcTx<G> {
    pub fn label(&self) -> &'static str {
        match self {
            BtcTx::Fund { .. } => "btc_fund",
            BtcTx::Spend { .. } => "btc_spend",
            BtcTx::Refund { .. } => "btc_refund",
        }
    }

    pub fn sender(&self) -> &Account {
        match self {
            BtcTx::Fund { funder, .. } => funder,
            BtcTx::Spend { submitter, .. } | BtcTx::Refund { submitter, .. } => submitter,
        }
    }

    pub fn swap_id(&self) -> SwapId {
        match self {
            BtcTx::Fund { output, .. } => output.swap_id,
            BtcTx::Spend { tx, .. } => tx.swap_id,
            BtcTx::Refund { swap_id, .. } => *swap_id,
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        let w = Writer::new().str(self.label()).raw(&self.swap_id().0);
        match self {
            BtcTx::Fund { output, .. } => w
                .u64(output.value)
                .prefixed(&G::encode_point(&output.tweaked_key))
                .u64(output.refund_height)
                .finish(),
            BtcTx::Spend { tx, spend, .. } => w
                .prefixed(&tx.canonical_bytes())
                .prefixed(&spend.final_sig.to_bytes())
                .prefixed(&G::encode_scalar(spend.unlock_value.value()))
                .prefixed(&spend.oracle_sig.to_bytes())
                .prefixed(&spend.oracle_msg)
                .finish(),
            BtcTx::Refund { .. } => w.finish(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BtcChain<G: Group> {
    block_interval: Seconds,
    height: u64,
    now: Seconds,
    balances: BTreeMap<Account, u64>,
    utxos: BTreeMap<SwapId, FundedOutput<G>>,
    consumed: BTreeMap<SwapId, (FundedOutput<G>, Consumed<G>)>,
    mempool: Vec<BtcTx<G>>,
    /// Leading mempool entries that were submitted with priority.
    priority: usize,
}

impl<G: Group> BtcChain<G> {
    pub fn new(block_interval: Seconds) -> Self {
        BtcChain {
            block_interval,
            height: 0,
            now: 0,
            balances: BTreeMap::new(),
            utxos: BTreeMap::new(),
            consumed: BTreeMap::new(),
            mempool: Vec::new(),
            priority: 0,
        }
    }

    pub fn block_interval(&self) -> Seconds {
        self.block_interval
    }

    pub fn height(&self) -> u64 {
        self.height
    }

    pub fn now(&self) -> Seconds {
        self.now
    }

    pub fn credit(&mut self, who: &Account, amount: u64) {
        *self.balances.entry(who.clone()).or_default() += amount;
    }

    pub fn balance(&self, who: &Account) -> u64 {
        self.balances.get(who).copied().unwrap_or(0)
    }

    pub fn utxo(&self, id: &SwapId) -> Option<&FundedOutput<G>> {
        self.utxos.get(id)
    }

    pub fn consumed(&self, id: &SwapId) -> Option<&(FundedOutput<G>, Consumed<G>)> {
        self.consumed.get(id)
    }

    pub fn mempool(&self) -> &[BtcTx<G>] {
        &self.mempool
    }

    /// Balances plus unspent output values.
    pub fn total_supply(&self) -> u64 {
        self.balances.values().sum::<u64>()
            + self.utxos.values().map(|u| u.output.value).sum::<u64>()
    }

    pub fn submit(&mut self, tx: BtcTx<G>) {
        self.mempool.push(tx);
    }

    /// Queues ahead of every ordinary transaction, as a fee bump would.
    pub fn submit_priority(&mut self, tx: BtcTx<G>) {
        self.mempool.insert(self.priority, tx);
        self.priority += 1;
    }

    fn event(&self, kind: EventKind, id: SwapId, actor: &Account) -> TraceEvent {
        TraceEvent::new(self.now, ChainTag::Btc, kind)
            .swap(id)
            .actor(actor)
    }

    fn live(&self, id: &SwapId) -> Result<&FundedOutput<G>, ChainError> {
        match self.utxos.get(id) {
            Some(u) => Ok(u),
            None if self.consumed.contains_key(id) => Err(ChainError::AlreadySpent(*id)),
            None => Err(ChainError::UnknownSwap(*id)),
        }
    }

    pub fn btc_lock(
        &mut self,
        output: TaprootOutput<G>,
        funder: &Account,
    ) -> Result<TraceEvent, ChainError> {
        let id = output.swap_id;
        if self.utxos.contains_key(&id) || self.consumed.contains_key(&id) {
            return Err(ChainError::DuplicateSwap(id));
        }
        if output.value == 0 {
            return Err(ChainError::ZeroAmount);
        }
        let available = self.balance(funder);
        if available < output.value {
            return Err(ChainError::InsufficientFunds {
                account: funder.clone(),
                needed: output.value as u128,
                available: available as u128,
            });
        }
        *self.balances.get_mut(funder).expect("balance checked") -= output.value;
        let payload = Writer::new()
            .u64(output.value)
            .prefixed(&G::encode_point(&output.tweaked_key))
            .u64(output.refund_height)
            .finish();
        self.utxos.insert(
            id,
            FundedOutput {
                output,
                funder: funder.clone(),
                funded_height: self.height,
            },
        );
        Ok(self
            .event(EventKind::BtcFunded, id, funder)
            .payload(payload))
    }

    /// Key-path spend. The spend message is `tx.sighash()`, so the recipient
    /// is fixed by whatever the maker pre-signed.
    pub fn btc_spend(
        &mut self,
        tx: &SpendTx,
        spend: &TaprootSpend<G>,
        submitter: &Account,
    ) -> Result<TraceEvent, ChainError> {
        let id = tx.swap_id;
        let funded = self.live(&id)?;
        let out = &funded.output;
        if tx.value != out.value {
            return Err(ChainError::SpendRejected(
                "value does not match the output".into(),
            ));
        }
        let unlock = UnlockMessage::from_bytes(&spend.oracle_msg)
            .ok_or_else(|| ChainError::SpendRejected("malformed oracle message".into()))?;
        if unlock.swap_id != id {
            return Err(ChainError::SpendRejected(
                "oracle message is for another swap".into(),
            ));
        }
        let checks = check_taproot_spend(
            spend,
            &out.presignature,
            &out.tweaked_key,
            &tx.sighash(),
            &out.presignature.commitment,
            &out.oracle_key,
        )?;
        if !checks.all() {
            return Err(ChainError::SpendRejected(format!(
                "final_signature={} commitment={} oracle_signature={}",
                checks.final_signature, checks.commitment, checks.oracle_signature
            )));
        }
        let funded = self.utxos.remove(&id).expect("checked live");
        self.credit(&tx.recipient, tx.value);
        let payload = BtcTx::Spend {
            submitter: submitter.clone(),
            tx: tx.clone(),
            spend: spend.clone(),
        }
        .encode();
        self.consumed.insert(
            id,
            (
                funded,
                Consumed::Spent {
                    tx: tx.clone(),
                    spend: spend.clone(),
                    height: self.height,
                },
            ),
        );
        Ok(self
            .event(EventKind::BtcSpent, id, submitter)
            .payload(payload))
    }

    /// Refund path: pays the funder back, only at or after `refund_height`.
    pub fn btc_refund(
        &mut self,
        id: &SwapId,
        submitter: &Account,
    ) -> Result<TraceEvent, ChainError> {
        let funded = self.live(id)?;
        let opens = funded.output.refund_height;
        if self.height < opens {
            return Err(ChainError::RefundTooEarly {
                height: self.height,
                opens,
            });
        }
        let funded = self.utxos.remove(id).expect("checked live");
        let to = funded.funder.clone();
        let value = funded.output.value;
        self.credit(&to, value);
        self.consumed.insert(
            *id,
            (
                funded,
                Consumed::Refunded {
                    to: to.clone(),
                    height: self.height,
                },
            ),
        );
        let payload = Writer::new().str(to.as_str()).u64(value).finish();
        Ok(self
            .event(EventKind::BtcRefunded, *id, submitter)
            .payload(payload))
    }

    fn apply(&mut self, tx: BtcTx<G>) -> Result<TraceEvent, ChainError> {
        match tx {
            BtcTx::Fund { funder, output } => self.btc_lock(output, &funder),
            BtcTx::Spend {
                submitter,
                tx,
                spend,
            } => self.btc_spend(&tx, &spend, &submitter),
            BtcTx::Refund { submitter, swap_id } => self.btc_refund(&swap_id, &submitter),
        }
    }

    /// Mines one block at time `t`: mempool in FIFO order, then refunds of
    /// every output whose refund height has been reached.
    pub fn mine_block(&mut self, t: Seconds) -> Vec<TraceEvent> {
        assert!(t >= self.now, "chain time cannot move backwards");
        self.now = t;
        self.height += 1;
        let mut events = vec![TraceEvent::new(t, ChainTag::Btc, EventKind::BlockMined)
            .payload(self.height.to_be_bytes().to_vec())];
        self.priority = 0;
        for tx in std::mem::take(&mut self.mempool) {
            let (label, sender, id) = (tx.label(), tx.sender().clone(), tx.swap_id());
            match self.apply(tx) {
                Ok(e) => events.push(e),
                Err(err) => events.push(
                    self.event(EventKind::TxRejected, id, &sender)
                        .payload(Writer::new().str(label).str(&err.to_string()).finish()),
                ),
            }
        }
        let keeper = Account::new("timeout_keeper");
        let due: Vec<SwapId> = self
            .utxos
            .iter()
            .filter(|(_, u)| self.height >= u.output.refund_height)
            .map(|(id, _)| *id)
            .collect();
        for id in due {
            events.push(
                self.btc_refund(&id, &keeper)
                    .expect("refund height reached"),
            );
        }
        events
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adaptor::{complete, presign, AdaptorSecret};
    use crate::group::Secp256k1;
    use crate::schnorr::{keygen, sign};

    type G = Secp256k1;

    struct Fixture {
        chain: BtcChain<G>,
        tx: SpendTx,
        spend: TaprootSpend<G>,
        id: SwapId,
    }

    /// A funded output with refund height 3 and a valid spend of it.
    fn fixture() -> Fixture {
        let id = SwapId([5; 32]);
        let maker = keygen::<G>(b"maker");
        let oracle = keygen::<G>(b"oracle");
        let secret = AdaptorSecret::<G>::new(G::scalar_from_u64(99)).unwrap();
        let tx = SpendTx {
            swap_id: id,
            recipient: Account::new("taker"),
            value: 1_000,
        };
        let ps = presign(&maker, &tx.sighash(), &secret, b"n");
        let msg = UnlockMessage {
            swap_id: id,
            commitment: ps.commitment.clone(),
            lock_height: 1,
            contract_id: 1,
        }
        .to_bytes();
        let spend = TaprootSpend {
            final_sig: complete(&ps, secret.value()),
            unlock_value: secret,
            oracle_sig: sign(&oracle, &msg, b"o"),
            oracle_msg: msg,
        };
        let output = TaprootOutput {
            swap_id: id,
            value: 1_000,
            tweaked_key: *maker.public(),
            refund_key: *maker.public(),
            refund_height: 3,
            presignature: ps,
            oracle_key: *oracle.public(),
        };
        let mut chain = BtcChain::new(600);
        chain.credit(&Account::new("maker"), 5_000);
        chain.submit(BtcTx::Fund {
            funder: Account::new("maker"),
            output,
        });
        chain.mine_block(600);
        assert!(chain.utxo(&id).is_some());
        Fixture {
            chain,
            tx,
            spend,
            id,
        }
    }

    fn kinds(events: &[TraceEvent]) -> Vec<EventKind> {
        events.iter().skip(1).map(|e| e.kind).collect()
    }

    #[test]
    fn valid_spend_pays_the_signed_recipient_in_the_next_block() {
        let mut f = fixture();
        f.chain.submit(BtcTx::Spend {
            submitter: Account::new("taker"),
            tx: f.tx.clone(),
            spend: f.spend.clone(),
        });
        assert_eq!(f.chain.balance(&Account::new("taker")), 0);
        let events = f.chain.mine_block(1_200);
        assert_eq!(kinds(&events), vec![EventKind::BtcSpent]);
        assert_eq!(f.chain.balance(&Account::new("taker")), 1_000);
        assert_eq!(f.chain.total_supply(), 5_000);
    }

    #[test]
    fn replayed_spend_is_rejected() {
        let mut f = fixture();
        let spend = BtcTx::Spend {
            submitter: Account::new("taker"),
            tx: f.tx.clone(),
            spend: f.spend.clone(),
        };
        f.chain.submit(spend.clone());
        f.chain.submit(spend);
        let events = f.chain.mine_block(1_200);
        assert_eq!(
            kinds(&events),
            vec![EventKind::BtcSpent, EventKind::TxRejected]
        );
        assert_eq!(f.chain.balance(&Account::new("taker")), 1_000);
    }

    #[test]
    fn redirected_spend_fails_the_signature_check() {
        let mut f = fixture();
        let tx = SpendTx {
            recipient: Account::new("eve"),
            ..f.tx.clone()
        };
        let err = f
            .chain
            .btc_spend(&tx, &f.spend, &Account::new("eve"))
            .unwrap_err();
        assert!(
            matches!(err, ChainError::SpendRejected(ref m) if m.contains("final_signature=false")),
            "{err}"
        );
        assert!(f.chain.utxo(&f.id).is_some());
    }

    #[test]
    fn refund_opens_exactly_at_refund_height() {
        let mut f = fixture();
        f.chain.mine_block(1_200);
        assert_eq!(f.chain.height(), 2);
        let maker = Account::new("maker");
        assert_eq!(
            f.chain.btc_refund(&f.id, &maker),
            Err(ChainError::RefundTooEarly {
                height: 2,
                opens: 3
            })
        );
        f.chain.submit(BtcTx::Refund {
            submitter: maker.clone(),
            swap_id: f.id,
        });
        let events = f.chain.mine_block(1_800);
        assert_eq!(kinds(&events), vec![EventKind::BtcRefunded]);
        assert_eq!(f.chain.balance(&maker), 5_000);
        assert!(matches!(
            f.chain.consumed(&f.id),
            Some((_, Consumed::Refunded { height: 3, .. }))
        ));
    }

    #[test]
    fn keeper_refunds_unclaimed_outputs() {
        let mut f = fixture();
        f.chain.mine_block(1_200);
        let events = f.chain.mine_block(1_800);
        assert_eq!(kinds(&events), vec![EventKind::BtcRefunded]);
        assert_eq!(events[1].actor, Some(Account::new("timeout_keeper")));
    }

    #[test]
    fn priority_submissions_are_mined_first_in_submission_order() {
        let mut f = fixture();
        let honest = BtcTx::Spend {
            submitter: Account::new("taker"),
            tx: f.tx.clone(),
            spend: f.spend.clone(),
        };
        let eve = |n: &str| BtcTx::Refund {
            submitter: Account::new(n),
            swap_id: f.id,
        };
        f.chain.submit(honest);
        f.chain.submit_priority(eve("eve1"));
        f.chain.submit_priority(eve("eve2"));
        let senders: Vec<&str> = f
            .chain
            .mempool()
            .iter()
            .map(|t| t.sender().as_str())
            .collect();
        assert_eq!(senders, vec!["eve1", "eve2", "taker"]);
        f.chain.mine_block(1_200);
        f.chain.submit(eve("late"));
        f.chain.submit_priority(eve("first"));
        assert_eq!(f.chain.mempool()[0].sender().as_str(), "first");
    }
}
