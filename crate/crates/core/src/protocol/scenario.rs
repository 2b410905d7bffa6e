//! Scenario scripts and the engine that runs actors over the simulator.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adaptor::{commit_secret, AdaptorSecret};
use crate::chainsim::{
    ChainTag, Consumed, EthConfig, EventKind, InstanceState, Seconds, Simulation, Trace,
    TraceEvent, VirtualClock, BTC_BLOCK_INTERVAL,
};
use crate::codec::Writer;
use crate::fee::{FeeError, FeeRate};
use crate::group::{derive_seed, random_scalar, Group, ProfileName, Secp256k1, Toy23};
use crate::ids::{Account, SwapId};
use crate::oracle::{Oracle, OracleIdentity};
use crate::schnorr::{keygen, KeyPair};
use crate::taproot::{tweak_keypair, SwapMetadata};

use super::actors::{
    Action, Actor, Adversary, Conduct, Facilitator, Maker, Message, OracleActor, SwapTerms, Taker,
    World,
};
use super::proposal::derive_swap_id;

pub const TAKER: &str = "taker";
pub const MAKER: &str = "maker";
pub const ORACLE: &str = "oracle";
pub const FACILITATOR: &str = "facilitator";
pub const ADVERSARY: &str = "adversary";

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("invalid fee fraction: {0}")]
    Fee(#[from] FeeError),
    #[error("invalid scenario settings: {0}")]
    Invalid(String),
    #[error("cannot parse scenario config: {0}")]
    Parse(#[from] toml::de::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioName {
    Happy,
    MakerGhost,
    TakerGhost,
    EveReplay,
    Facilitated,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 5] = [
        ScenarioName::Happy,
        ScenarioName::MakerGhost,
        ScenarioName::TakerGhost,
        ScenarioName::EveReplay,
        ScenarioName::Facilitated,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioName::Happy => "happy",
            ScenarioName::MakerGhost => "maker_ghost",
            ScenarioName::TakerGhost => "taker_ghost",
            ScenarioName::EveReplay => "eve_replay",
            ScenarioName::Facilitated => "facilitated",
        }
    }
}

impl FromStr for ScenarioName {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, ScenarioError> {
        ScenarioName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| ScenarioError::UnknownScenario(s.to_string()))
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Fee fraction as written in a config: `"0.01"`, `"1/100"` or `0.01`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FeeSetting {
    Text(String),
    Number(f64),
}

impl FeeSetting {
    pub fn rate(&self) -> Result<FeeRate, FeeError> {
        match self {
            FeeSetting::Text(s) => s.parse(),
            FeeSetting::Number(x) => x.to_string().parse(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    /// Contract instance lifetime in seconds.
    pub timeout_eth: Option<u64>,
    /// Blocks until the BTC refund path opens.
    pub timeout_btc: Option<u64>,
    pub alpha: Option<FeeSetting>,
    /// Collateral in wei.
    pub collateral: Option<u64>,
    pub oracle_confirmations: Option<u64>,
    /// Off-chain message latency in seconds.
    pub latency: Option<u64>,
    pub amount_sat: Option<u64>,
    pub amount_wei: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioScript {
    pub scenario: ScenarioName,
    #[serde(default = "default_profile")]
    pub profile: ProfileName,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub overrides: Overrides,
}

fn default_profile() -> ProfileName {
    ProfileName::Secp256k1
}

pub const DEFAULT_AMOUNT_SAT: u64 = 100_000;
pub const DEFAULT_AMOUNT_WEI: u128 = 2_000_000;
pub const DEFAULT_TIMEOUT_ETH: Seconds = 14_400;
pub const DEFAULT_TIMEOUT_BTC_BLOCKS: u64 = 12;
pub const DEFAULT_COLLATERAL_PERCENT: u128 = 10;
pub const DEFAULT_FEE: &str = "0.01";

/// Fully resolved settings for one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Settings {
    pub terms: SwapTerms,
    pub oracle_confirmations: u64,
    pub latency: Seconds,
}

impl ScenarioScript {
    pub fn new(scenario: ScenarioName, profile: ProfileName, seed: u64) -> Self {
        ScenarioScript {
            scenario,
            profile,
            seed,
            overrides: Overrides::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ScenarioError> {
        Ok(toml::from_str(text)?)
    }

    pub fn settings(&self) -> Result<Settings, ScenarioError> {
        let o = &self.overrides;
        let amount_sat = o.amount_sat.unwrap_or(DEFAULT_AMOUNT_SAT);
        let amount_wei = o.amount_wei.map(u128::from).unwrap_or(DEFAULT_AMOUNT_WEI);
        let timeout_eth = o.timeout_eth.unwrap_or(DEFAULT_TIMEOUT_ETH);
        let timeout_btc_blocks = o.timeout_btc.unwrap_or(DEFAULT_TIMEOUT_BTC_BLOCKS);
        let collateral = o
            .collateral
            .map(u128::from)
            .unwrap_or(amount_wei * DEFAULT_COLLATERAL_PERCENT / 100);
        let alpha = match &o.alpha {
            Some(a) => Some(a.rate()?),
            None => None,
        };
        let fee = match self.scenario {
            ScenarioName::Facilitated => Some(alpha.map_or_else(|| DEFAULT_FEE.parse(), Ok)?),
            _ => None,
        };
        let oracle_confirmations = o.oracle_confirmations.unwrap_or(1);
        let invalid = |m: &str| Err(ScenarioError::Invalid(m.to_string()));
        if amount_sat == 0 || amount_wei == 0 {
            return invalid("amounts must be positive");
        }
        if timeout_btc_blocks == 0 {
            return invalid("timeout_btc must be at least one block");
        }
        if timeout_eth <= timeout_btc_blocks * BTC_BLOCK_INTERVAL {
            return invalid("timeout_eth must exceed the BTC refund window");
        }
        if oracle_confirmations == 0 {
            return invalid("oracle_confirmations must be at least 1");
        }
        Ok(Settings {
            terms: SwapTerms {
                amount_sat,
                amount_wei,
                timeout_btc_blocks,
                timeout_eth,
                collateral,
                fee,
            },
            oracle_confirmations,
            latency: o.latency.unwrap_or(0),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    /// BTC paid to the taker and ETH released to the maker.
    Swapped,
    /// Neither side changed hands; anything locked went back.
    Refunded {
        ghost: Option<Account>,
    },
    Violation(String),
}

impl Outcome {
    pub fn is_atomic(&self) -> bool {
        !matches!(self, Outcome::Violation(_))
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioReport {
    pub script: ScenarioScript,
    pub swap_id: SwapId,
    pub trace: Trace,
    pub outcome: Outcome,
    pub end_time: Seconds,
    pub initial_totals: (u64, u128),
    pub final_totals: (u64, u128),
    /// One entry per block after which either chain's total drifted.
    pub conservation_errors: Vec<String>,
    /// Final `(sat, wei)` per account.
    pub balances: BTreeMap<Account, (u64, u128)>,
}

impl ScenarioReport {
    pub fn is_atomic(&self) -> bool {
        self.outcome.is_atomic() && self.conservation_errors.is_empty()
    }

    pub fn balance(&self, who: &str) -> (u64, u128) {
        self.balances
            .get(&Account::new(who))
            .copied()
            .unwrap_or((0, 0))
    }

    /// Adversary attempts that would have paid someone else, plus anything
    /// the adversary ended up holding.
    pub fn adversary_diversions(&self) -> usize {
        let attempts = self
            .trace
            .iter()
            .filter(|e| e.kind == EventKind::AdversaryAttempt)
            .filter(|e| e.payload.last() == Some(&1))
            .count();
        let (sat, wei) = self.balance(ADVERSARY);
        attempts + usize::from(sat > 0) + usize::from(wei > 0)
    }
}

struct Envelope<G: Group> {
    from: Account,
    to: Account,
    msg: Message<G>,
}

/// Runs the actors and chains until the swap settles or the horizon passes.
struct Engine<G: Group> {
    sim: Simulation<G>,
    bus: VirtualClock<Envelope<G>>,
    latency: Seconds,
    actors: Vec<Box<dyn Actor<G>>>,
    /// Receives a copy of every proposal on the bus.
    eavesdropper: Option<Account>,
    swap_id: SwapId,
    initial: (u64, u128),
    conservation_errors: Vec<String>,
}

/// Upper bound on actor rounds at one instant; exceeding it means an actor
/// keeps emitting without making progress.
const MAX_ROUNDS_PER_INSTANT: usize = 1_000;

impl<G: Group> Engine<G> {
    fn apply(&mut self, who: &Account, actions: Vec<Action<G>>) {
        let now = self.sim.now();
        for action in actions {
            match action {
                Action::Send(to, msg) => self.send(who.clone(), to, msg),
                Action::Eth(tx) => {
                    self.sim.submit_eth(tx);
                }
                Action::Btc(tx) => {
                    self.sim.submit_btc(tx);
                }
                Action::EthPriority(tx) => {
                    self.sim.submit_eth_priority(tx);
                }
                Action::BtcPriority(tx) => {
                    self.sim.submit_btc_priority(tx);
                }
                Action::Record(kind, payload) => self.sim.record(
                    TraceEvent::new(now, ChainTag::Offchain, kind)
                        .swap(self.swap_id)
                        .actor(who)
                        .payload(payload),
                ),
            }
        }
    }

    fn send(&mut self, from: Account, to: Account, msg: Message<G>) {
        let at = self.sim.now() + self.latency;
        if let (Message::Proposal(_), Some(spy)) = (&msg, &self.eavesdropper) {
            if *spy != to && *spy != from {
                self.bus.schedule_at(
                    at,
                    Envelope {
                        from: from.clone(),
                        to: spy.clone(),
                        msg: msg.clone(),
                    },
                );
            }
        }
        self.bus.schedule_at(at, Envelope { from, to, msg });
    }

    /// Delivers due messages and polls every actor until nothing changes.
    fn settle_instant(&mut self) {
        for _ in 0..MAX_ROUNDS_PER_INSTANT {
            let mut acted = false;
            while self.bus.peek_time().is_some_and(|t| t <= self.sim.now()) {
                let (_, env) = self.bus.pop().expect("peeked");
                let Some(i) = self.actors.iter().position(|a| *a.account() == env.to) else {
                    continue;
                };
                let world = World {
                    now: self.sim.now(),
                    eth: &self.sim.eth,
                    btc: &self.sim.btc,
                };
                let actions = self.actors[i].on_message(&env.from, env.msg, &world);
                acted |= !actions.is_empty();
                let who = self.actors[i].account().clone();
                self.apply(&who, actions);
            }
            for i in 0..self.actors.len() {
                let world = World {
                    now: self.sim.now(),
                    eth: &self.sim.eth,
                    btc: &self.sim.btc,
                };
                let actions = self.actors[i].poll(&world);
                acted |= !actions.is_empty();
                let who = self.actors[i].account().clone();
                self.apply(&who, actions);
            }
            if !acted && !self.bus.peek_time().is_some_and(|t| t <= self.sim.now()) {
                return;
            }
        }
        panic!("actors did not quiesce at t={}", self.sim.now());
    }

    fn settled(&self) -> bool {
        let id = &self.swap_id;
        let eth_done = self
            .sim
            .eth
            .instance(id)
            .is_some_and(|i| i.state.is_terminal() || i.expired);
        eth_done
            && self.sim.btc.utxo(id).is_none()
            && self.sim.eth.mempool().is_empty()
            && self.sim.btc.mempool().is_empty()
            && self.bus.is_empty()
    }

    fn horizon(&self, fallback: Seconds) -> Seconds {
        let eth = self
            .sim
            .eth
            .instance(&self.swap_id)
            .map_or(fallback, |i| i.deadline());
        let btc = self
            .sim
            .btc
            .utxo(&self.swap_id)
            .map_or(0, |u| u.output.refund_height * BTC_BLOCK_INTERVAL);
        eth.max(btc) + BTC_BLOCK_INTERVAL + self.sim.eth.config().block_interval
    }

    fn check_conservation(&mut self) {
        let now = self.sim.totals();
        if now != self.initial {
            self.conservation_errors.push(format!(
                "t={}: totals {:?} differ from initial {:?}",
                self.sim.now(),
                now,
                self.initial
            ));
        }
    }

    fn run(&mut self, fallback_horizon: Seconds) {
        loop {
            self.settle_instant();
            if self.settled() || self.sim.now() >= self.horizon(fallback_horizon) {
                return;
            }
            let next_block = self.sim.next_block_time();
            match self.bus.peek_time() {
                Some(t) if t < next_block => self.sim.advance_to(t),
                _ => {
                    self.sim.step();
                    self.check_conservation();
                }
            }
        }
    }

    fn classify(&self) -> Outcome {
        let id = &self.swap_id;
        let eth = self.sim.eth.instance(id);
        let btc = self.sim.btc.consumed(id).map(|(_, c)| c);
        let taker = Account::new(TAKER);
        if self.sim.btc.utxo(id).is_some() {
            return Outcome::Violation("BTC output still unspent".into());
        }
        let eth_state = eth.map(|i| i.state);
        let btc_to_taker = matches!(btc, Some(Consumed::Spent { tx, .. }) if tx.recipient == taker);
        match (eth_state, btc) {
            (Some(InstanceState::Released), Some(Consumed::Spent { .. })) if btc_to_taker => {
                Outcome::Swapped
            }
            (Some(InstanceState::Released), _) => {
                Outcome::Violation("ETH released without BTC paid to taker".into())
            }
            (_, Some(Consumed::Spent { .. })) => {
                Outcome::Violation("BTC spent without ETH released".into())
            }
            (Some(InstanceState::Locked), _) => Outcome::Violation("ETH still locked".into()),
            (state, btc) => {
                let locked = eth.is_some_and(|i| i.locker.is_some());
                let ghost = match (state, btc) {
                    (None, _) => None,
                    _ if !locked => Some(taker),
                    (_, None) => Some(Account::new(MAKER)),
                    _ => Some(taker),
                };
                Outcome::Refunded { ghost }
            }
        }
    }

    fn finish(mut self, script: ScenarioScript) -> ScenarioReport {
        let outcome = if self.conservation_errors.is_empty() {
            self.classify()
        } else {
            Outcome::Violation(self.conservation_errors[0].clone())
        };
        let now = self.sim.now();
        let terminal = match &outcome {
            Outcome::Swapped => TraceEvent::new(now, ChainTag::Offchain, EventKind::SwapCompleted)
                .payload(Writer::new().str(MAKER).str(TAKER).finish()),
            Outcome::Refunded { ghost } => {
                let e = TraceEvent::new(now, ChainTag::Offchain, EventKind::SwapRefunded);
                match ghost {
                    Some(g) => e.actor(g),
                    None => e,
                }
            }
            Outcome::Violation(why) => {
                TraceEvent::new(now, ChainTag::Offchain, EventKind::AtomicityViolation)
                    .payload(why.as_bytes().to_vec())
            }
        };
        self.sim.record(terminal.swap(self.swap_id));
        let mut balances = BTreeMap::new();
        for name in [TAKER, MAKER, ORACLE, FACILITATOR, ADVERSARY] {
            let a = Account::new(name);
            balances.insert(
                a.clone(),
                (self.sim.btc.balance(&a), self.sim.eth.balance(&a)),
            );
        }
        let gas = self.sim.eth.config().gas_sink.clone();
        balances.insert(gas.clone(), (0, self.sim.eth.balance(&gas)));
        let final_totals = self.sim.totals();
        ScenarioReport {
            script,
            swap_id: self.swap_id,
            trace: self.sim.into_trace(),
            outcome,
            end_time: now,
            initial_totals: self.initial,
            final_totals,
            conservation_errors: self.conservation_errors,
            balances,
        }
    }
}

pub const TAKER_ETH_BALANCE: u128 = 5_000_000;
pub const MAKER_ETH_BALANCE: u128 = 1_000_000;
pub const MAKER_BTC_BALANCE: u64 = 1_000_000;
pub const FACILITATOR_ETH_BALANCE: u128 = 1_000_000;

/// Picks metadata whose tweaked signing key is nonzero.
fn swap_metadata<G: Group>(
    terms: &SwapTerms,
    secret: &AdaptorSecret<G>,
    btc_key: &KeyPair<G>,
) -> SwapMetadata {
    let mut md = SwapMetadata {
        amount_sat: terms.amount_sat,
        amount_wei: terms.amount_wei,
        timeout_btc: terms.timeout_btc_blocks,
        timeout_eth: terms.timeout_eth,
        commitment: commit_secret(secret),
        swap_id: SwapId([0; 32]),
    };
    for counter in 0.. {
        md.swap_id = derive_swap_id::<G>(&md, btc_key.public(), counter);
        if tweak_keypair(btc_key, &md).signing_key().is_some() {
            return md;
        }
    }
    unreachable!()
}

fn run_with<G: Group>(script: ScenarioScript) -> Result<ScenarioReport, ScenarioError> {
    let settings = script.settings()?;
    let seed = script.seed;
    let terms = settings.terms.clone();
    let acct = Account::new;

    let identity = keygen::<G>(&derive_seed(seed, "maker/identity"));
    let btc_key = keygen::<G>(&derive_seed(seed, "maker/btc"));
    let secret = AdaptorSecret::new(random_scalar::<G>(&derive_seed(
        seed,
        "maker/adaptor-secret",
    )))
    .expect("random_scalar is nonzero");
    let oracle_kp = keygen::<G>(&derive_seed(seed, "oracle"));
    let md = swap_metadata(&terms, &secret, &btc_key);
    let swap_id = md.swap_id;

    let facilitated = script.scenario == ScenarioName::Facilitated;
    let maker_conduct = if script.scenario == ScenarioName::MakerGhost {
        Conduct::Ghost
    } else {
        Conduct::Honest
    };
    let taker_conduct = if script.scenario == ScenarioName::TakerGhost {
        Conduct::Ghost
    } else {
        Conduct::Honest
    };
    let propose_to = if facilitated {
        acct(FACILITATOR)
    } else {
        acct(TAKER)
    };

    let mut sim = Simulation::<G>::new(EthConfig::default());
    sim.eth.credit(&acct(TAKER), TAKER_ETH_BALANCE);
    sim.eth.credit(&acct(MAKER), MAKER_ETH_BALANCE);
    sim.btc.credit(&acct(MAKER), MAKER_BTC_BALANCE);

    let mut actors: Vec<Box<dyn Actor<G>>> = vec![
        Box::new(Taker::new(
            acct(TAKER),
            *identity.public(),
            *oracle_kp.public(),
            terms.clone(),
            facilitated.then(|| acct(FACILITATOR)),
            taker_conduct,
        )),
        Box::new(Maker::new(
            acct(MAKER),
            identity,
            btc_key,
            secret,
            md,
            acct(TAKER),
            (acct(ORACLE), *oracle_kp.public()),
            propose_to,
            terms.collateral,
            maker_conduct,
        )),
        Box::new(OracleActor::new(
            acct(ORACLE),
            Oracle::new(
                OracleIdentity::new(oracle_kp),
                settings.oracle_confirmations,
            ),
        )),
    ];
    if facilitated {
        sim.eth.credit(&acct(FACILITATOR), FACILITATOR_ETH_BALANCE);
        actors.push(Box::new(Facilitator::new(
            acct(FACILITATOR),
            *identity.public(),
            acct(TAKER),
            terms.clone(),
        )));
    }
    let eavesdropper = (script.scenario == ScenarioName::EveReplay).then(|| acct(ADVERSARY));
    if eavesdropper.is_some() {
        let key = keygen::<G>(&derive_seed(seed, "adversary"));
        actors.push(Box::new(Adversary::new(acct(ADVERSARY), key)));
    }

    let initial = sim.totals();
    let mut engine = Engine {
        sim,
        bus: VirtualClock::new(),
        latency: settings.latency,
        actors,
        eavesdropper,
        swap_id,
        initial,
        conservation_errors: Vec::new(),
    };
    // Nothing was deployed: give the proposal exchange a full timeout.
    let fallback =
        terms.timeout_eth + 8 * settings.latency + terms.timeout_btc_blocks * BTC_BLOCK_INTERVAL;
    engine.run(fallback);
    Ok(engine.finish(script))
}

/// Runs a scenario to completion and classifies its end state.
pub fn run_scenario(script: &ScenarioScript) -> Result<ScenarioReport, ScenarioError> {
    match script.profile {
        ProfileName::Toy => run_with::<Toy23>(script.clone()),
        ProfileName::Secp256k1 => run_with::<Secp256k1>(script.clone()),
    }
}
