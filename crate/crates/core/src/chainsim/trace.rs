//! Trace events and their JSON-lines form.
//!
//! One event per line, fields in the fixed order
//! `time, chain, kind, swap_id, actor, payload`; `payload` is hex.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::clock::Seconds;
use crate::ids::{Account, SwapId};

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        source: serde_json::Error,
    },
    #[error("line {line}: {message}")]
    Field { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChainTag {
    Btc,
    Eth,
    Offchain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    BlockMined,
    TxSubmitted,
    TxRejected,
    Deployed,
    Locked,
    CollateralPosted,
    Released,
    Refunded,
    Expired,
    BtcFunded,
    BtcSpent,
    BtcRefunded,
    EscrowRequested,
    EscrowAccepted,
    EscrowRejected,
    ProposalSent,
    ProposalAccepted,
    ProposalRejected,
    OracleRelease,
    ReleaseAccepted,
    ReleaseRejected,
    SecretExtracted,
    AdversaryAttempt,
    SwapCompleted,
    SwapRefunded,
    AtomicityViolation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEvent {
    pub time: Seconds,
    pub chain: ChainTag,
    pub kind: EventKind,
    pub swap_id: Option<SwapId>,
    pub actor: Option<Account>,
    pub payload: Vec<u8>,
}

impl TraceEvent {
    pub fn new(time: Seconds, chain: ChainTag, kind: EventKind) -> Self {
        TraceEvent {
            time,
            chain,
            kind,
            swap_id: None,
            actor: None,
            payload: Vec::new(),
        }
    }

    pub fn swap(mut self, id: SwapId) -> Self {
        self.swap_id = Some(id);
        self
    }

    pub fn actor(mut self, who: &Account) -> Self {
        self.actor = Some(who.clone());
        self
    }

    pub fn payload(mut self, bytes: Vec<u8>) -> Self {
        self.payload = bytes;
        self
    }

    pub fn is(&self, kind: EventKind) -> bool {
        self.kind == kind
    }

    pub fn by(&self, who: &Account) -> bool {
        self.actor.as_ref() == Some(who)
    }
}

/// Serialized form; field order here is the on-disk field order.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    time: Seconds,
    chain: ChainTag,
    kind: EventKind,
    swap_id: Option<String>,
    actor: Option<String>,
    payload: String,
}

impl From<&TraceEvent> for Record {
    fn from(e: &TraceEvent) -> Self {
        Record {
            time: e.time,
            chain: e.chain,
            kind: e.kind,
            swap_id: e.swap_id.map(|id| id.to_hex()),
            actor: e.actor.as_ref().map(|a| a.as_str().to_string()),
            payload: hex::encode(&e.payload),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
}

impl Trace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, e: TraceEvent) {
        self.events.push(e);
    }

    pub fn extend(&mut self, es: impl IntoIterator<Item = TraceEvent>) {
        self.events.extend(es);
    }

    pub fn iter(&self) -> impl Iterator<Item = &TraceEvent> {
        self.events.iter()
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(&Record::from(e)).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self, TraceError> {
        let mut events = Vec::new();
        for (i, line) in text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
        {
            let line_no = i + 1;
            let rec: Record = serde_json::from_str(line).map_err(|source| TraceError::Json {
                line: line_no,
                source,
            })?;
            let field = |message: &str| TraceError::Field {
                line: line_no,
                message: message.into(),
            };
            let swap_id = match rec.swap_id {
                Some(s) => Some(SwapId::from_hex(&s).ok_or_else(|| field("bad swap_id"))?),
                None => None,
            };
            events.push(TraceEvent {
                time: rec.time,
                chain: rec.chain,
                kind: rec.kind,
                swap_id,
                actor: rec.actor.map(Account::new),
                payload: hex::decode(&rec.payload).map_err(|_| field("bad payload hex"))?,
            });
        }
        Ok(Trace { events })
    }

    /// SHA-256 of the JSON-lines bytes.
    pub fn digest(&self) -> [u8; 32] {
        Sha256::digest(self.to_jsonl().as_bytes()).into()
    }
}

/// First point at which two JSON-lines traces disagree.
#[derive(Debug, Clone, PartialEq)]
pub struct Divergence {
    /// 1-based event index.
    pub index: usize,
    pub left: Option<Value>,
    pub right: Option<Value>,
}

/// Compares two traces event by event, ignoring field order within a line.
/// Returns `None` when they are semantically identical.
pub fn diff_jsonl(left: &str, right: &str) -> Result<Option<Divergence>, TraceError> {
    fn parse(text: &str) -> Result<Vec<Value>, TraceError> {
        text.lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                serde_json::from_str(l).map_err(|source| TraceError::Json {
                    line: i + 1,
                    source,
                })
            })
            .collect()
    }
    let (a, b) = (parse(left)?, parse(right)?);
    for i in 0..a.len().max(b.len()) {
        if a.get(i) != b.get(i) {
            return Ok(Some(Divergence {
                index: i + 1,
                left: a.get(i).cloned(),
                right: b.get(i).cloned(),
            }));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Trace {
        let mut t = Trace::new();
        t.push(TraceEvent::new(15, ChainTag::Eth, EventKind::BlockMined).payload(vec![0, 1]));
        t.push(
            TraceEvent::new(30, ChainTag::Eth, EventKind::Locked)
                .swap(SwapId([0xab; 32]))
                .actor(&Account::new("taker")),
        );
        t
    }

    #[test]
    fn jsonl_has_stable_field_order_and_round_trips() {
        let text = sample().to_jsonl();
        let first = text.lines().next().unwrap();
        assert_eq!(
            first,
            r#"{"time":15,"chain":"eth","kind":"block_mined","swap_id":null,"actor":null,"payload":"0001"}"#
        );
        assert_eq!(Trace::from_jsonl(&text).unwrap(), sample());
    }

    #[test]
    fn diff_ignores_field_order() {
        let a = r#"{"time":1,"chain":"btc","kind":"block_mined","swap_id":null,"actor":null,"payload":""}"#;
        let b = r#"{"payload":"","actor":null,"swap_id":null,"kind":"block_mined","chain":"btc","time":1}"#;
        assert_eq!(diff_jsonl(a, b).unwrap(), None);
    }

    #[test]
    fn diff_reports_first_divergence() {
        let a = sample().to_jsonl();
        let mut other = sample();
        other.events[1].time = 45;
        let d = diff_jsonl(&a, &other.to_jsonl()).unwrap().unwrap();
        assert_eq!(d.index, 2);
        let mut shorter = sample();
        shorter.events.pop();
        let d = diff_jsonl(&a, &shorter.to_jsonl()).unwrap().unwrap();
        assert_eq!((d.index, d.right), (2, None));
    }

    #[test]
    fn malformed_lines_are_reported_with_line_numbers() {
        let err = Trace::from_jsonl("{\"time\":1}\n").unwrap_err();
        assert!(err.to_string().starts_with("line 1"));
    }
}
