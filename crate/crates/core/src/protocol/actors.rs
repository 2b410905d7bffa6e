//! Actor state machines. Each actor reacts to bus messages and, after every
//! change in the world, gets a chance to act on what it can observe: chain
//! state, mempools and the messages addressed to it.

use crate::adaptor::{complete, extract_secret, AdaptorSecret, SecretCommitment};
use crate::chainsim::{
    labelled, BtcChain, BtcTx, Consumed, EthChain, EthTx, EventKind, InstanceState, Seconds,
    TaprootOutput,
};
use crate::fee::FeeRate;
use crate::group::{scalar_arith, Group, ScalarOp};
use crate::ids::{Account, SwapId};
use crate::oracle::{verify_release, Oracle, ReleaseStatus, UnlockRelease};
use crate::schnorr::{sign, KeyPair, Signature};
use crate::taproot::{verify_taproot_spend, SpendTx, SwapMetadata, TaprootSpend};

use super::proposal::{build_and_sign_proposal, verify_proposal, EscrowReceipt, SwapProposal};

#[derive(Debug, Clone)]
pub enum Message<G: Group> {
    EscrowRequest {
        swap_id: SwapId,
        secret: AdaptorSecret<G>,
        commitment: SecretCommitment,
    },
    EscrowAck(EscrowReceipt),
    EscrowRejected(SwapId),
    Proposal(Box<SwapProposal<G>>),
    Release(Box<UnlockRelease<G>>),
}

#[derive(Debug, Clone)]
pub enum Action<G: Group> {
    Send(Account, Message<G>),
    Eth(EthTx<G>),
    Btc(BtcTx<G>),
    /// Submitted ahead of ordinary transactions (front-running).
    EthPriority(EthTx<G>),
    BtcPriority(BtcTx<G>),
    /// Off-chain trace event; the engine stamps time and actor.
    Record(EventKind, Vec<u8>),
}

/// Read-only view of everything an actor may observe.
pub struct World<'a, G: Group> {
    pub now: Seconds,
    pub eth: &'a EthChain<G>,
    pub btc: &'a BtcChain<G>,
}

pub trait Actor<G: Group> {
    fn account(&self) -> &Account;
    fn on_message(
        &mut self,
        from: &Account,
        msg: Message<G>,
        world: &World<'_, G>,
    ) -> Vec<Action<G>>;
    fn poll(&mut self, world: &World<'_, G>) -> Vec<Action<G>>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Conduct {
    Honest,
    /// Maker: posts collateral after the lock, then never funds BTC.
    /// Taker: accepts and deploys, then never locks.
    Ghost,
}

/// Agreed economics every honest party checks proposals against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwapTerms {
    pub amount_sat: u64,
    pub amount_wei: u128,
    pub timeout_btc_blocks: u64,
    pub timeout_eth: Seconds,
    pub collateral: u128,
    pub fee: Option<FeeRate>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MakerPhase {
    Start,
    AwaitingEscrow,
    Proposed,
    Funded,
    Claimed,
    Idle,
}

pub struct Maker<G: Group> {
    account: Account,
    identity: KeyPair<G>,
    btc_key: KeyPair<G>,
    secret: AdaptorSecret<G>,
    metadata: SwapMetadata,
    taker: Account,
    oracle: (Account, G::Point),
    propose_to: Account,
    collateral: u128,
    conduct: Conduct,
    phase: MakerPhase,
    receipt: Option<EscrowReceipt>,
    proposal: Option<SwapProposal<G>>,
}

impl<G: Group> Maker<G> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        account: Account,
        identity: KeyPair<G>,
        btc_key: KeyPair<G>,
        secret: AdaptorSecret<G>,
        metadata: SwapMetadata,
        taker: Account,
        oracle: (Account, G::Point),
        propose_to: Account,
        collateral: u128,
        conduct: Conduct,
    ) -> Self {
        Maker {
            account,
            identity,
            btc_key,
            secret,
            metadata,
            taker,
            oracle,
            propose_to,
            collateral,
            conduct,
            phase: MakerPhase::Start,
            receipt: None,
            proposal: None,
        }
    }

    fn id(&self) -> SwapId {
        self.metadata.swap_id
    }

    fn lock_seen(&self, world: &World<'_, G>) -> bool {
        let id = self.id();
        world
            .eth
            .instance(&id)
            .is_some_and(|i| i.state == InstanceState::Locked)
            || world
                .eth
                .mempool()
                .iter()
                .any(|tx| matches!(tx, EthTx::Lock { swap_id, .. } if *swap_id == id))
    }
}

impl<G: Group> Actor<G> for Maker<G> {
    fn account(&self) -> &Account {
        &self.account
    }

    fn on_message(
        &mut self,
        _from: &Account,
        msg: Message<G>,
        _world: &World<'_, G>,
    ) -> Vec<Action<G>> {
        match msg {
            Message::EscrowAck(receipt) if self.phase == MakerPhase::AwaitingEscrow => {
                self.receipt = Some(receipt);
                let (proposal, _) = build_and_sign_proposal(
                    &self.identity,
                    &self.btc_key,
                    self.account.clone(),
                    self.metadata.clone(),
                    &self.secret,
                    self.taker.clone(),
                    self.receipt.as_ref(),
                )
                .expect("receipt matches and the swap id avoids a zero tweak");
                let bytes = proposal.signed_bytes();
                self.proposal = Some(proposal.clone());
                self.phase = MakerPhase::Proposed;
                vec![
                    Action::Record(EventKind::ProposalSent, bytes),
                    Action::Send(
                        self.propose_to.clone(),
                        Message::Proposal(Box::new(proposal)),
                    ),
                ]
            }
            Message::EscrowRejected(_) => {
                self.phase = MakerPhase::Idle;
                Vec::new()
            }
            _ => Vec::new(),
        }
    }

    fn poll(&mut self, world: &World<'_, G>) -> Vec<Action<G>> {
        let id = self.id();
        match self.phase {
            MakerPhase::Start => {
                self.phase = MakerPhase::AwaitingEscrow;
                vec![
                    Action::Record(
                        EventKind::EscrowRequested,
                        self.metadata.commitment.as_bytes().to_vec(),
                    ),
                    Action::Send(
                        self.oracle.0.clone(),
                        Message::EscrowRequest {
                            swap_id: id,
                            secret: self.secret,
                            commitment: self.metadata.commitment.clone(),
                        },
                    ),
                ]
            }
            MakerPhase::Proposed if self.lock_seen(world) => {
                let mut actions = Vec::new();
                if self.collateral > 0 {
                    actions.push(Action::Eth(EthTx::PostCollateral {
                        from: self.account.clone(),
                        swap_id: id,
                    }));
                }
                match self.conduct {
                    Conduct::Honest => {
                        let proposal = self.proposal.as_ref().expect("proposed");
                        actions.push(Action::Btc(BtcTx::Fund {
                            funder: self.account.clone(),
                            output: TaprootOutput {
                                swap_id: id,
                                value: self.metadata.amount_sat,
                                tweaked_key: proposal.output_key(),
                                refund_key: *self.btc_key.public(),
                                refund_height: self.metadata.timeout_btc,
                                presignature: proposal.presignature.clone(),
                                oracle_key: self.oracle.1,
                            },
                        }));
                        self.phase = MakerPhase::Funded;
                    }
                    Conduct::Ghost => self.phase = MakerPhase::Idle,
                }
                actions
            }
            MakerPhase::Proposed if world.eth.instance(&id).is_some_and(|i| i.expired) => {
                self.phase = MakerPhase::Idle;
                Vec::new()
            }
            MakerPhase::Funded => {
                let Some((_, Consumed::Spent { spend, .. })) = world.btc.consumed(&id) else {
                    if world.btc.consumed(&id).is_some() {
                        self.phase = MakerPhase::Idle;
                    }
                    return Vec::new();
                };
                let ps = &self.proposal.as_ref().expect("proposed").presignature;
                let Ok(secret) = extract_secret(&spend.final_sig, ps) else {
                    return Vec::new();
                };
                self.phase = MakerPhase::Claimed;
                let mut actions = vec![Action::Record(
                    EventKind::SecretExtracted,
                    G::encode_scalar(secret.value()),
                )];
                if world
                    .eth
                    .instance(&id)
                    .is_some_and(|i| i.state == InstanceState::Locked)
                {
                    actions.push(Action::Eth(EthTx::Claim {
                        caller: self.account.clone(),
                        swap_id: id,
                        secret,
                    }));
                }
                actions
            }
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TakerPhase {
    AwaitProposal,
    AwaitInstance,
    AwaitOutput,
    Spent,
    Idle,
}

pub struct Taker<G: Group> {
    account: Account,
    maker_identity: G::Point,
    oracle_key: G::Point,
    terms: SwapTerms,
    /// Deploys the instance itself; otherwise expects this facilitator to.
    deployer: Option<Account>,
    conduct: Conduct,
    phase: TakerPhase,
    proposal: Option<SwapProposal<G>>,
    release: Option<UnlockRelease<G>>,
}

impl<G: Group> Taker<G> {
    pub fn new(
        account: Account,
        maker_identity: G::Point,
        oracle_key: G::Point,
        terms: SwapTerms,
        deployer: Option<Account>,
        conduct: Conduct,
    ) -> Self {
        Taker {
            account,
            maker_identity,
            oracle_key,
            terms,
            deployer,
            conduct,
            phase: TakerPhase::AwaitProposal,
            proposal: None,
            release: None,
        }
    }

    fn acceptable(&self, p: &SwapProposal<G>) -> bool {
        verify_proposal(p, &self.maker_identity)
            && p.spend_tx.recipient == self.account
            && p.metadata.amount_sat == self.terms.amount_sat
            && p.metadata.amount_wei == self.terms.amount_wei
            && p.metadata.timeout_eth == self.terms.timeout_eth
    }

    fn instance_matches(&self, world: &World<'_, G>, p: &SwapProposal<G>) -> bool {
        let Some(inst) = world.eth.instance(&p.metadata.swap_id) else {
            return false;
        };
        let expected_fee = self.deployer.as_ref().zip(self.terms.fee);
        inst.state == InstanceState::Deployed
            && !inst.expired
            && inst.params == p.metadata
            && *inst.beneficiary() == p.maker_eth_account
            && inst.facilitator().map(|(a, r)| (a, *r)) == expected_fee
            && inst.collateral == self.terms.collateral
    }

    fn output_matches(&self, out: &TaprootOutput<G>, p: &SwapProposal<G>) -> bool {
        out.value == p.metadata.amount_sat
            && out.tweaked_key == p.output_key()
            && out.presignature == p.presignature
            && out.oracle_key == self.oracle_key
            && out.refund_height == p.metadata.timeout_btc
    }
}

impl<G: Group> Actor<G> for Taker<G> {
    fn account(&self) -> &Account {
        &self.account
    }

    fn on_message(
        &mut self,
        _from: &Account,
        msg: Message<G>,
        _world: &World<'_, G>,
    ) -> Vec<Action<G>> {
        match msg {
            Message::Proposal(p) if self.phase == TakerPhase::AwaitProposal => {
                if !self.acceptable(&p) {
                    self.phase = TakerPhase::Idle;
                    return vec![Action::Record(
                        EventKind::ProposalRejected,
                        p.metadata.swap_id.0.to_vec(),
                    )];
                }
                let mut actions = vec![Action::Record(
                    EventKind::ProposalAccepted,
                    p.metadata.swap_id.0.to_vec(),
                )];
                if self.deployer.is_none() {
                    actions.push(Action::Eth(EthTx::Deploy {
                        from: self.account.clone(),
                        params: p.metadata.clone(),
                        beneficiary: p.maker_eth_account.clone(),
                        facilitator: None,
                        collateral: self.terms.collateral,
                    }));
                }
                self.proposal = Some(*p);
                self.phase = TakerPhase::AwaitInstance;
                actions
            }
            Message::Release(rel) if self.proposal.is_some() && self.release.is_none() => {
                let p = self.proposal.as_ref().expect("checked");
                let ok = verify_release(&rel, &self.oracle_key, &p.metadata.commitment)
                    && rel.message.swap_id == p.metadata.swap_id;
                let bytes = rel.message.to_bytes();
                if !ok {
                    return vec![Action::Record(EventKind::ReleaseRejected, bytes)];
                }
                self.release = Some(*rel);
                vec![Action::Record(EventKind::ReleaseAccepted, bytes)]
            }
            _ => Vec::new(),
        }
    }

    fn poll(&mut self, world: &World<'_, G>) -> Vec<Action<G>> {
        let Some(p) = self.proposal.as_ref() else {
            return Vec::new();
        };
        let id = p.metadata.swap_id;
        match self.phase {
            TakerPhase::AwaitInstance if self.instance_matches(world, p) => {
                if self.conduct == Conduct::Ghost {
                    self.phase = TakerPhase::Idle;
                    return Vec::new();
                }
                self.phase = TakerPhase::AwaitOutput;
                vec![Action::Eth(EthTx::Lock {
                    from: self.account.clone(),
                    swap_id: id,
                })]
            }
            TakerPhase::AwaitOutput => {
                let (Some(rel), Some(funded)) = (self.release.as_ref(), world.btc.utxo(&id)) else {
                    return Vec::new();
                };
                if !self.output_matches(&funded.output, p) {
                    self.phase = TakerPhase::Idle;
                    return Vec::new();
                }
                let spend = TaprootSpend {
                    final_sig: complete(&p.presignature, rel.unlock_value.value()),
                    unlock_value: rel.unlock_value,
                    oracle_sig: rel.oracle_sig,
                    oracle_msg: rel.message.to_bytes(),
                };
                self.phase = TakerPhase::Spent;
                vec![Action::Btc(BtcTx::Spend {
                    submitter: self.account.clone(),
                    tx: p.spend_tx.clone(),
                    spend,
                })]
            }
            _ => Vec::new(),
        }
    }
}

pub struct OracleActor<G: Group> {
    account: Account,
    oracle: Oracle<G>,
    pending: Vec<SwapId>,
}

impl<G: Group> OracleActor<G> {
    pub fn new(account: Account, oracle: Oracle<G>) -> Self {
        OracleActor {
            account,
            oracle,
            pending: Vec::new(),
        }
    }
}

impl<G: Group> Actor<G> for OracleActor<G> {
    fn account(&self) -> &Account {
        &self.account
    }

    fn on_message(
        &mut self,
        from: &Account,
        msg: Message<G>,
        _world: &World<'_, G>,
    ) -> Vec<Action<G>> {
        let Message::EscrowRequest {
            swap_id,
            secret,
            commitment,
        } = msg
        else {
            return Vec::new();
        };
        match self
            .oracle
            .escrow_secret(swap_id, secret, commitment.clone())
        {
            Ok(()) => {
                self.pending.push(swap_id);
                vec![
                    Action::Record(EventKind::EscrowAccepted, swap_id.0.to_vec()),
                    Action::Send(
                        from.clone(),
                        Message::EscrowAck(EscrowReceipt {
                            swap_id,
                            commitment,
                        }),
                    ),
                ]
            }
            Err(e) => vec![
                Action::Record(
                    EventKind::EscrowRejected,
                    labelled(&e.to_string(), &swap_id.0),
                ),
                Action::Send(from.clone(), Message::EscrowRejected(swap_id)),
            ],
        }
    }

    fn poll(&mut self, world: &World<'_, G>) -> Vec<Action<G>> {
        let mut actions = Vec::new();
        let mut still_pending = Vec::new();
        for id in std::mem::take(&mut self.pending) {
            match self.oracle.observe_and_release(world.eth, &id) {
                Ok(ReleaseStatus::Released(rel)) => {
                    let to = world
                        .eth
                        .instance(&id)
                        .and_then(|i| i.locker.clone())
                        .expect("released only when locked");
                    let record = crate::codec::Writer::new()
                        .prefixed(&rel.message.to_bytes())
                        .prefixed(&rel.oracle_sig.to_bytes())
                        .finish();
                    actions.push(Action::Record(EventKind::OracleRelease, record));
                    actions.push(Action::Send(to, Message::Release(Box::new(rel))));
                }
                Ok(ReleaseStatus::NotReady) => still_pending.push(id),
                Ok(ReleaseStatus::Closed) | Err(_) => {}
            }
        }
        self.pending = still_pending;
        actions
    }
}

/// Deploys the instance on the maker's behalf, paying gas, and relays the
/// proposal to the taker. Earns the fee on release.
pub struct Facilitator<G: Group> {
    account: Account,
    maker_identity: G::Point,
    taker: Account,
    terms: SwapTerms,
    relayed: bool,
}

impl<G: Group> Facilitator<G> {
    pub fn new(
        account: Account,
        maker_identity: G::Point,
        taker: Account,
        terms: SwapTerms,
    ) -> Self {
        Facilitator {
            account,
            maker_identity,
            taker,
            terms,
            relayed: false,
        }
    }
}

impl<G: Group> Actor<G> for Facilitator<G> {
    fn account(&self) -> &Account {
        &self.account
    }

    fn on_message(
        &mut self,
        _from: &Account,
        msg: Message<G>,
        _world: &World<'_, G>,
    ) -> Vec<Action<G>> {
        let Message::Proposal(p) = msg else {
            return Vec::new();
        };
        if self.relayed || !verify_proposal(&p, &self.maker_identity) {
            return Vec::new();
        }
        self.relayed = true;
        let rate = self.terms.fee.expect("facilitated terms carry a fee");
        vec![
            Action::Record(
                EventKind::ProposalSent,
                labelled(&rate.to_string(), &p.metadata.swap_id.0),
            ),
            Action::Eth(EthTx::Deploy {
                from: self.account.clone(),
                params: p.metadata.clone(),
                beneficiary: p.maker_eth_account.clone(),
                facilitator: Some((self.account.clone(), rate)),
                collateral: self.terms.collateral,
            }),
            Action::Send(self.taker.clone(), Message::Proposal(p)),
        ]
    }

    fn poll(&mut self, _world: &World<'_, G>) -> Vec<Action<G>> {
        Vec::new()
    }
}

/// Attack names in the order they are attempted.
pub const ADVERSARY_STRATEGIES: [&str; 8] = [
    "redirect",
    "complete_and_submit",
    "rerandomize_scalar",
    "rerandomize_nonce",
    "forge_oracle",
    "exact_replay",
    "eth_claim",
    "early_refund",
];

/// Sees every proposal and every broadcast transaction but holds no honest
/// party's private key. Once the taker's spend shows up in the mempool it
/// extracts the secret and runs every strategy against the chains.
pub struct Adversary<G: Group> {
    account: Account,
    key: KeyPair<G>,
    proposal: Option<SwapProposal<G>>,
    attacked: bool,
}

impl<G: Group> Adversary<G> {
    pub fn new(account: Account, key: KeyPair<G>) -> Self {
        Adversary {
            account,
            key,
            proposal: None,
            attacked: false,
        }
    }

    /// Payload flag is 1 iff the attempt would have paid someone other than
    /// the recipient the maker signed for.
    fn attempt(label: &str, diverted: bool) -> Action<G> {
        Action::Record(
            EventKind::AdversaryAttempt,
            labelled(label, &[diverted as u8]),
        )
    }

    fn attack(
        &self,
        out: &TaprootOutput<G>,
        observed_tx: &SpendTx,
        observed: &TaprootSpend<G>,
    ) -> Vec<Action<G>> {
        let ps = &out.presignature;
        let id = out.swap_id;
        let Ok(secret) = extract_secret(&observed.final_sig, ps) else {
            return Vec::new();
        };
        let mut actions = Vec::new();
        let mut try_spend = |label: &str, tx: SpendTx, spend: TaprootSpend<G>| {
            let accepted = verify_taproot_spend(
                &spend,
                ps,
                &out.tweaked_key,
                &tx.sighash(),
                &ps.commitment,
                &out.oracle_key,
            )
            .unwrap_or(false);
            let diverted = accepted && tx.recipient != observed_tx.recipient;
            actions.push(Self::attempt(label, diverted));
            actions.push(Action::BtcPriority(BtcTx::Spend {
                submitter: self.account.clone(),
                tx,
                spend,
            }));
        };

        let mine = SpendTx {
            recipient: self.account.clone(),
            ..observed_tx.clone()
        };
        let completed = complete(ps, secret.value());
        let own = TaprootSpend {
            final_sig: completed,
            unlock_value: secret,
            ..observed.clone()
        };
        let bumped = scalar_arith::<G>(&completed.scalar, &G::scalar_one(), ScalarOp::Add);

        try_spend("redirect", mine.clone(), observed.clone());
        try_spend("complete_and_submit", mine.clone(), own.clone());
        let final_sig = Signature {
            nonce_point: completed.nonce_point,
            scalar: bumped,
        };
        try_spend(
            "rerandomize_scalar",
            mine.clone(),
            TaprootSpend {
                final_sig,
                ..own.clone()
            },
        );
        let final_sig = Signature {
            nonce_point: completed.nonce_point + G::generator(),
            scalar: bumped,
        };
        try_spend(
            "rerandomize_nonce",
            mine.clone(),
            TaprootSpend {
                final_sig,
                ..own.clone()
            },
        );
        let oracle_sig = sign(&self.key, &own.oracle_msg, b"forged-release");
        try_spend("forge_oracle", mine, TaprootSpend { oracle_sig, ..own });
        try_spend("exact_replay", observed_tx.clone(), observed.clone());

        // The contract pays its fixed beneficiary whoever calls it.
        actions.push(Self::attempt("eth_claim", false));
        actions.push(Action::EthPriority(EthTx::Claim {
            caller: self.account.clone(),
            swap_id: id,
            secret,
        }));
        actions.push(Self::attempt("early_refund", false));
        actions.push(Action::BtcPriority(BtcTx::Refund {
            submitter: self.account.clone(),
            swap_id: id,
        }));
        actions.push(Action::EthPriority(EthTx::Refund {
            caller: self.account.clone(),
            swap_id: id,
        }));
        actions
    }
}

impl<G: Group> Actor<G> for Adversary<G> {
    fn account(&self) -> &Account {
        &self.account
    }

    fn on_message(
        &mut self,
        _from: &Account,
        msg: Message<G>,
        _world: &World<'_, G>,
    ) -> Vec<Action<G>> {
        if let Message::Proposal(p) = msg {
            self.proposal.get_or_insert(*p);
        }
        Vec::new()
    }

    fn poll(&mut self, world: &World<'_, G>) -> Vec<Action<G>> {
        if self.attacked {
            return Vec::new();
        }
        let Some(p) = self.proposal.as_ref() else {
            return Vec::new();
        };
        let id = p.metadata.swap_id;
        let Some(funded) = world.btc.utxo(&id) else {
            return Vec::new();
        };
        let observed = world.btc.mempool().iter().find_map(|tx| match tx {
            BtcTx::Spend {
                submitter,
                tx,
                spend,
            } if tx.swap_id == id && *submitter != self.account => Some((tx, spend)),
            _ => None,
        });
        let Some((tx, spend)) = observed else {
            return Vec::new();
        };
        self.attacked = true;
        self.attack(&funded.output, tx, spend)
    }
}
