//! Contract chain: account balances, a swap factory and per-swap instances.
//!
//! Instance lifecycle: `Deployed -> Locked -> {Released, Refunded}`. The
//! beneficiary and facilitator are fixed at deployment. A deployed instance
//! that is never locked simply expires at its deadline.

use std::collections::BTreeMap;

use super::clock::Seconds;
use super::trace::{ChainTag, EventKind, TraceEvent};
use super::ChainError;
use crate::adaptor::{commit_secret, AdaptorSecret};
use crate::codec::Writer;
use crate::fee::{compute_fee, FeeRate};
use crate::group::Group;
use crate::ids::{Account, SwapId};
use crate::taproot::SwapMetadata;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceState {
    Deployed,
    Locked,
    Released,
    Refunded,
}

impl InstanceState {
    pub fn is_terminal(self) -> bool {
        matches!(self, InstanceState::Released | InstanceState::Refunded)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwapInstance {
    pub contract_id: u64,
    pub params: SwapMetadata,
    beneficiary: Account,
    facilitator: Option<(Account, FeeRate)>,
    /// Collateral the counterparty is expected to post, in wei.
    pub collateral: u128,
    pub deployer: Account,
    pub deploy_height: u64,
    pub deploy_time: Seconds,
    pub locker: Option<Account>,
    pub locked_height: Option<u64>,
    pub collateral_poster: Option<Account>,
    pub state: InstanceState,
    pub expired: bool,
}

impl SwapInstance {
    pub fn beneficiary(&self) -> &Account {
        &self.beneficiary
    }

    pub fn facilitator(&self) -> Option<&(Account, FeeRate)> {
        self.facilitator.as_ref()
    }

    pub fn amount(&self) -> u128 {
        self.params.amount_wei
    }

    pub fn deadline(&self) -> Seconds {
        self.deploy_time + self.params.timeout_eth
    }

    /// Wei currently held by the instance.
    pub fn escrow(&self) -> u128 {
        match self.state {
            InstanceState::Locked => {
                self.amount()
                    + if self.collateral_poster.is_some() {
                        self.collateral
                    } else {
                        0
                    }
            }
            _ => 0,
        }
    }
}

/// Transactions accepted by the contract chain's mempool.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EthTx<G: Group> {
    Deploy {
        from: Account,
        params: SwapMetadata,
        beneficiary: Account,
        facilitator: Option<(Account, FeeRate)>,
        collateral: u128,
    },
    Lock {
        from: Account,
        swap_id: SwapId,
    },
    PostCollateral {
        from: Account,
        swap_id: SwapId,
    },
    Claim {
        caller: Account,
        swap_id: SwapId,
        secret: AdaptorSecret<G>,
    },
    Refund {
        caller: Account,
        swap_id: SwapId,
    },
}

impl<G: Group> EthTx<G> {
    pub fn label(&self) -> &'static str {
        match self {
            EthTx::Deploy { .. } => "eth_deploy",
            EthTx::Lock { .. } => "eth_lock",
            EthTx::PostCollateral { .. } => "eth_post_collateral",
            EthTx::Claim { .. } => "eth_claim",
            EthTx::Refund { .. } => "eth_refund",
        }
    }

    pub fn sender(&self) -> &Account {
        match self {
            EthTx::Deploy { from, .. }
            | EthTx::Lock { from, .. }
            | EthTx::PostCollateral { from, .. } => from,
            EthTx::Claim { caller, .. } | EthTx::Refund { caller, .. } => caller,
        }
    }

    pub fn swap_id(&self) -> SwapId {
        match self {
            EthTx::Deploy { params, .. } => params.swap_id,
            EthTx::Lock { swap_id, .. }
            | EthTx::PostCollateral { swap_id, .. }
            | EthTx::Claim { swap_id, .. }
            | EthTx::Refund { swap_id, .. } => *swap_id,
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        let w = Writer::new().str(self.label()).raw(&self.swap_id().0);
        match self {
            EthTx::Claim { secret, .. } => w.prefixed(&G::encode_scalar(secret.value())).finish(),
            _ => w.finish(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EthConfig {
    pub block_interval: Seconds,
    /// Gas charged to whoever deploys an instance.
    pub deploy_cost: u128,
    /// Receives deployment gas, so fees move wei rather than destroy it.
    pub gas_sink: Account,
}

impl Default for EthConfig {
    fn default() -> Self {
        EthConfig {
            block_interval: 15,
            deploy_cost: 5_000,
            gas_sink: Account::new("block_producer"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EthChain<G: Group> {
    config: EthConfig,
    height: u64,
    now: Seconds,
    balances: BTreeMap<Account, u128>,
    instances: BTreeMap<SwapId, SwapInstance>,
    mempool: Vec<EthTx<G>>,
    /// Leading mempool entries that were submitted with priority.
    priority: usize,
    next_contract_id: u64,
}

impl<G: Group> EthChain<G> {
    pub fn new(config: EthConfig) -> Self {
        EthChain {
            config,
            height: 0,
            now: 0,
            balances: BTreeMap::new(),
            instances: BTreeMap::new(),
            mempool: Vec::new(),
            priority: 0,
            next_contract_id: 1,
        }
    }

    pub fn config(&self) -> &EthConfig {
        &self.config
    }

    pub fn height(&self) -> u64 {
        self.height
    }

    pub fn now(&self) -> Seconds {
        self.now
    }

    /// Moves the chain's notion of "now" between blocks. Direct operations
    /// execute at this time.
    pub fn set_now(&mut self, t: Seconds) {
        assert!(t >= self.now, "chain time cannot move backwards");
        self.now = t;
    }

    pub fn credit(&mut self, who: &Account, amount: u128) {
        *self.balances.entry(who.clone()).or_default() += amount;
    }

    fn debit(&mut self, who: &Account, amount: u128) -> Result<(), ChainError> {
        let bal = self.balances.entry(who.clone()).or_default();
        if *bal < amount {
            return Err(ChainError::InsufficientFunds {
                account: who.clone(),
                needed: amount,
                available: *bal,
            });
        }
        *bal -= amount;
        Ok(())
    }

    pub fn balance(&self, who: &Account) -> u128 {
        self.balances.get(who).copied().unwrap_or(0)
    }

    pub fn instance(&self, id: &SwapId) -> Option<&SwapInstance> {
        self.instances.get(id)
    }

    pub fn instances(&self) -> impl Iterator<Item = (&SwapId, &SwapInstance)> {
        self.instances.iter()
    }

    pub fn mempool(&self) -> &[EthTx<G>] {
        &self.mempool
    }

    /// Balances plus everything held in escrow.
    pub fn total_supply(&self) -> u128 {
        self.balances.values().sum::<u128>()
            + self
                .instances
                .values()
                .map(SwapInstance::escrow)
                .sum::<u128>()
    }

    pub fn submit(&mut self, tx: EthTx<G>) {
        self.mempool.push(tx);
    }

    /// Queues ahead of every ordinary transaction, as a higher gas price would.
    pub fn submit_priority(&mut self, tx: EthTx<G>) {
        self.mempool.insert(self.priority, tx);
        self.priority += 1;
    }

    fn event(&self, kind: EventKind, id: SwapId, actor: &Account) -> TraceEvent {
        TraceEvent::new(self.now, ChainTag::Eth, kind)
            .swap(id)
            .actor(actor)
    }

    fn instance_mut(&mut self, id: &SwapId) -> Result<&mut SwapInstance, ChainError> {
        self.instances
            .get_mut(id)
            .ok_or(ChainError::UnknownSwap(*id))
    }

    fn expect_state(inst: &SwapInstance, want: InstanceState) -> Result<(), ChainError> {
        if inst.state != want {
            return Err(ChainError::WrongState {
                expected: format!("{want:?}"),
                actual: format!("{:?}", inst.state),
            });
        }
        Ok(())
    }

    /// Creates a new instance. Moves no funds other than deployment gas.
    pub fn factory_deploy(
        &mut self,
        from: &Account,
        params: SwapMetadata,
        beneficiary: Account,
        facilitator: Option<(Account, FeeRate)>,
        collateral: u128,
    ) -> Result<TraceEvent, ChainError> {
        let id = params.swap_id;
        if params.amount_wei == 0 {
            return Err(ChainError::ZeroAmount);
        }
        if self.instances.contains_key(&id) {
            return Err(ChainError::DuplicateSwap(id));
        }
        let cost = self.config.deploy_cost;
        self.debit(from, cost)?;
        let sink = self.config.gas_sink.clone();
        self.credit(&sink, cost);
        let contract_id = self.next_contract_id;
        self.next_contract_id += 1;
        let payload = Writer::new()
            .u64(contract_id)
            .raw(&params.canonical_bytes())
            .str(beneficiary.as_str())
            .str(facilitator.as_ref().map_or("", |(a, _)| a.as_str()))
            .u128(collateral)
            .finish();
        self.instances.insert(
            id,
            SwapInstance {
                contract_id,
                params,
                beneficiary,
                facilitator,
                collateral,
                deployer: from.clone(),
                deploy_height: self.height,
                deploy_time: self.now,
                locker: None,
                locked_height: None,
                collateral_poster: None,
                state: InstanceState::Deployed,
                expired: false,
            },
        );
        Ok(self.event(EventKind::Deployed, id, from).payload(payload))
    }

    /// Moves the swap amount from `from` into the instance.
    pub fn eth_lock(&mut self, id: &SwapId, from: &Account) -> Result<TraceEvent, ChainError> {
        let now = self.now;
        let inst = self.instance_mut(id)?;
        Self::expect_state(inst, InstanceState::Deployed)?;
        if now >= inst.deadline() {
            return Err(ChainError::Expired(*id));
        }
        let amount = inst.amount();
        self.debit(from, amount)?;
        let height = self.height;
        let inst = self.instance_mut(id)?;
        inst.locker = Some(from.clone());
        inst.locked_height = Some(height);
        inst.state = InstanceState::Locked;
        Ok(self
            .event(EventKind::Locked, *id, from)
            .payload(Writer::new().u128(amount).u64(height).finish()))
    }

    /// Posts the instance's collateral from `from`. Only after the lock.
    pub fn eth_post_collateral(
        &mut self,
        id: &SwapId,
        from: &Account,
    ) -> Result<TraceEvent, ChainError> {
        let inst = self.instance_mut(id)?;
        Self::expect_state(inst, InstanceState::Locked)?;
        if inst.collateral_poster.is_some() {
            return Err(ChainError::CollateralAlreadyPosted(*id));
        }
        let amount = inst.collateral;
        self.debit(from, amount)?;
        self.instance_mut(id)?.collateral_poster = Some(from.clone());
        Ok(self
            .event(EventKind::CollateralPosted, *id, from)
            .payload(Writer::new().u128(amount).finish()))
    }

    /// Releases to the fixed beneficiary (minus the facilitator fee) if
    /// `H(secret)` matches. The caller's identity does not affect the payout.
    pub fn eth_claim_with_secret(
        &mut self,
        id: &SwapId,
        secret: &AdaptorSecret<G>,
        caller: &Account,
    ) -> Result<TraceEvent, ChainError> {
        let now = self.now;
        let inst = self.instance_mut(id)?;
        Self::expect_state(inst, InstanceState::Locked)?;
        if now >= inst.deadline() {
            return Err(ChainError::Expired(*id));
        }
        if commit_secret(secret) != inst.params.commitment {
            return Err(ChainError::WrongSecret(*id));
        }
        inst.state = InstanceState::Released;
        let amount = inst.amount();
        let beneficiary = inst.beneficiary.clone();
        let facilitator = inst.facilitator.clone();
        let returned_collateral = inst.collateral_poster.clone().map(|p| (p, inst.collateral));

        let (fee, net) = match &facilitator {
            Some((_, rate)) => compute_fee(amount, *rate),
            None => (0, amount),
        };
        self.credit(&beneficiary, net);
        if let Some((fac, _)) = &facilitator {
            self.credit(fac, fee);
        }
        if let Some((poster, c)) = &returned_collateral {
            self.credit(poster, *c);
        }
        let payload = Writer::new()
            .str(beneficiary.as_str())
            .u128(net)
            .str(facilitator.as_ref().map_or("", |(a, _)| a.as_str()))
            .u128(fee)
            .prefixed(&G::encode_scalar(secret.value()))
            .finish();
        Ok(self
            .event(EventKind::Released, *id, caller)
            .payload(payload))
    }

    /// After the deadline: amount back to the locker. Collateral posted by
    /// anyone other than the locker is forfeited to the locker.
    pub fn eth_refund_after_timeout(
        &mut self,
        id: &SwapId,
        caller: &Account,
    ) -> Result<TraceEvent, ChainError> {
        let now = self.now;
        let inst = self.instance_mut(id)?;
        Self::expect_state(inst, InstanceState::Locked)?;
        if now < inst.deadline() {
            return Err(ChainError::TooEarly {
                at: now,
                opens: inst.deadline(),
            });
        }
        inst.state = InstanceState::Refunded;
        let locker = inst.locker.clone().expect("locked instance has a locker");
        let amount = inst.amount();
        let collateral = inst.collateral_poster.clone().map(|p| (p, inst.collateral));
        self.credit(&locker, amount);
        let forfeited = match collateral {
            Some((poster, c)) if poster != locker => {
                self.credit(&locker, c);
                c
            }
            Some((poster, c)) => {
                self.credit(&poster, c);
                0
            }
            None => 0,
        };
        let payload = Writer::new()
            .str(locker.as_str())
            .u128(amount)
            .u128(forfeited)
            .finish();
        Ok(self
            .event(EventKind::Refunded, *id, caller)
            .payload(payload))
    }

    fn apply(&mut self, tx: EthTx<G>) -> Result<TraceEvent, ChainError> {
        match tx {
            EthTx::Deploy {
                from,
                params,
                beneficiary,
                facilitator,
                collateral,
            } => self.factory_deploy(&from, params, beneficiary, facilitator, collateral),
            EthTx::Lock { from, swap_id } => self.eth_lock(&swap_id, &from),
            EthTx::PostCollateral { from, swap_id } => self.eth_post_collateral(&swap_id, &from),
            EthTx::Claim {
                caller,
                swap_id,
                secret,
            } => self.eth_claim_with_secret(&swap_id, &secret, &caller),
            EthTx::Refund { caller, swap_id } => self.eth_refund_after_timeout(&swap_id, &caller),
        }
    }

    /// Mines one block at time `t`: applies the mempool in FIFO order, then
    /// refunds or expires instances whose deadline has passed.
    pub fn mine_block(&mut self, t: Seconds) -> Vec<TraceEvent> {
        self.set_now(t);
        self.height += 1;
        let mut events = vec![TraceEvent::new(t, ChainTag::Eth, EventKind::BlockMined)
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
        let due: Vec<(SwapId, InstanceState)> = self
            .instances
            .iter()
            .filter(|(_, i)| t >= i.deadline() && !i.expired && !i.state.is_terminal())
            .map(|(id, i)| (*id, i.state))
            .collect();
        for (id, state) in due {
            match state {
                InstanceState::Locked => events.push(
                    self.eth_refund_after_timeout(&id, &keeper)
                        .expect("deadline has passed"),
                ),
                _ => {
                    self.instances.get_mut(&id).expect("listed above").expired = true;
                    events.push(self.event(EventKind::Expired, id, &keeper));
                }
            }
        }
        events
    }
}
