//! Two simulated chains driven by one virtual clock.
//!
//! Blocks are strictly periodic. When both chains are due at the same
//! instant the UTXO chain mines first.

pub mod btc;
pub mod clock;
pub mod eth;
pub mod trace;

use thiserror::Error;

use crate::codec::Writer;
use crate::group::Group;
use crate::ids::{Account, SwapId};
use crate::taproot::TaprootError;

pub use btc::{BtcChain, BtcTx, Consumed, FundedOutput, TaprootOutput};
pub use clock::{Seconds, VirtualClock};
pub use eth::{EthChain, EthConfig, EthTx, InstanceState, SwapInstance};
pub use trace::{diff_jsonl, ChainTag, Divergence, EventKind, Trace, TraceError, TraceEvent};

pub const BTC_BLOCK_INTERVAL: Seconds = 600;
pub const ETH_BLOCK_INTERVAL: Seconds = 15;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChainError {
    #[error("unknown swap {0}")]
    UnknownSwap(SwapId),
    #[error("swap {0} already exists")]
    DuplicateSwap(SwapId),
    #[error("amount must be positive")]
    ZeroAmount,
    #[error("{account} needs {needed} but holds {available}")]
    InsufficientFunds {
        account: Account,
        needed: u128,
        available: u128,
    },
    #[error("instance is {actual}, expected {expected}")]
    WrongState { expected: String, actual: String },
    #[error("swap {0} is past its deadline")]
    Expired(SwapId),
    #[error("collateral for {0} was already posted")]
    CollateralAlreadyPosted(SwapId),
    #[error("secret does not open the commitment of {0}")]
    WrongSecret(SwapId),
    #[error("refund not allowed at t={at}, opens at t={opens}")]
    TooEarly { at: Seconds, opens: Seconds },
    #[error("output {0} was already consumed")]
    AlreadySpent(SwapId),
    #[error("refund not allowed at height {height}, opens at {opens}")]
    RefundTooEarly { height: u64, opens: u64 },
    #[error("spend rejected: {0}")]
    SpendRejected(String),
    #[error(transparent)]
    Taproot(#[from] TaprootError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tick {
    Btc,
    Eth,
}

/// Both chains, the shared clock and the trace of everything that happened.
#[derive(Debug, Clone)]
pub struct Simulation<G: Group> {
    clock: VirtualClock<Tick>,
    pub btc: BtcChain<G>,
    pub eth: EthChain<G>,
    trace: Trace,
}

impl<G: Group> Default for Simulation<G> {
    fn default() -> Self {
        Self::new(EthConfig::default())
    }
}

impl<G: Group> Simulation<G> {
    pub fn new(eth: EthConfig) -> Self {
        let mut clock = VirtualClock::new();
        let btc = BtcChain::new(BTC_BLOCK_INTERVAL);
        let eth = EthChain::new(eth);
        clock.schedule_at(btc.block_interval(), Tick::Btc);
        clock.schedule_at(eth.config().block_interval, Tick::Eth);
        Simulation {
            clock,
            btc,
            eth,
            trace: Trace::new(),
        }
    }

    pub fn now(&self) -> Seconds {
        self.clock.now()
    }

    pub fn next_block_time(&self) -> Seconds {
        self.clock
            .peek_time()
            .expect("block production never stops")
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    pub fn into_trace(self) -> Trace {
        self.trace
    }

    /// Appends an off-chain event stamped with the current time.
    pub fn record(&mut self, event: TraceEvent) {
        debug_assert_eq!(event.time, self.now());
        self.trace.push(event);
    }

    /// Mines the next due block on whichever chain is first.
    pub fn step(&mut self) -> Vec<TraceEvent> {
        let (t, tick) = self.clock.pop().expect("block production never stops");
        let events = match tick {
            Tick::Btc => {
                self.clock
                    .schedule_at(t + self.btc.block_interval(), Tick::Btc);
                self.btc.mine_block(t)
            }
            Tick::Eth => {
                self.clock
                    .schedule_at(t + self.eth.config().block_interval, Tick::Eth);
                self.eth.mine_block(t)
            }
        };
        self.trace.extend(events.iter().cloned());
        events
    }

    /// Mines every block due in `(now, now + dt]` and moves the clock to
    /// `now + dt`.
    pub fn advance_time(&mut self, dt: Seconds) -> Vec<TraceEvent> {
        let target = self.now() + dt;
        let mut events = Vec::new();
        while self.next_block_time() <= target {
            events.extend(self.step());
        }
        self.advance_to(target);
        events
    }

    /// Moves the clock forward to `t` without mining. `t` must not be past
    /// the next block.
    pub fn advance_to(&mut self, t: Seconds) {
        self.clock.advance_to(t);
        self.eth.set_now(t);
    }

    fn submitted(
        &mut self,
        chain: ChainTag,
        sender: &Account,
        id: SwapId,
        payload: Vec<u8>,
    ) -> TraceEvent {
        let e = TraceEvent::new(self.now(), chain, EventKind::TxSubmitted)
            .swap(id)
            .actor(sender)
            .payload(payload);
        self.trace.push(e.clone());
        e
    }

    pub fn submit_eth(&mut self, tx: EthTx<G>) -> TraceEvent {
        let (sender, id) = (tx.sender().clone(), tx.swap_id());
        let payload = tx.encode();
        self.eth.submit(tx);
        self.submitted(ChainTag::Eth, &sender, id, payload)
    }

    pub fn submit_btc(&mut self, tx: BtcTx<G>) -> TraceEvent {
        let (sender, id) = (tx.sender().clone(), tx.swap_id());
        let payload = tx.encode();
        self.btc.submit(tx);
        self.submitted(ChainTag::Btc, &sender, id, payload)
    }

    /// Like [`Self::submit_eth`] but ahead of ordinary transactions.
    pub fn submit_eth_priority(&mut self, tx: EthTx<G>) -> TraceEvent {
        let (sender, id) = (tx.sender().clone(), tx.swap_id());
        let payload = tx.encode();
        self.eth.submit_priority(tx);
        self.submitted(ChainTag::Eth, &sender, id, payload)
    }

    /// Like [`Self::submit_btc`] but ahead of ordinary transactions.
    pub fn submit_btc_priority(&mut self, tx: BtcTx<G>) -> TraceEvent {
        let (sender, id) = (tx.sender().clone(), tx.swap_id());
        let payload = tx.encode();
        self.btc.submit_priority(tx);
        self.submitted(ChainTag::Btc, &sender, id, payload)
    }

    /// `(sat, wei)` in existence, counting outputs and escrows.
    pub fn totals(&self) -> (u64, u128) {
        (self.btc.total_supply(), self.eth.total_supply())
    }
}

/// Label at the start of a `TxSubmitted` or `TxRejected` payload.
pub fn tx_label(payload: &[u8]) -> Option<&str> {
    crate::codec::Reader::new(payload).str()
}

/// Payload carried by off-chain events: a label and raw bytes.
pub fn labelled(label: &str, body: &[u8]) -> Vec<u8> {
    Writer::new().str(label).raw(body).finish()
}
