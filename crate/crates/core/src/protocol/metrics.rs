//! Timing read back from a finished trace.

use thiserror::Error;

use crate::chainsim::{tx_label, EventKind, Seconds, Trace, TraceEvent};
use crate::ids::Account;

use super::scenario::{MAKER, TAKER};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("trace has no {0}")]
pub struct IncompleteTrace(pub &'static str);

fn position(
    trace: &Trace,
    from: usize,
    what: &'static str,
    f: impl Fn(&TraceEvent) -> bool,
) -> Result<usize, IncompleteTrace> {
    trace.events[from..]
        .iter()
        .position(f)
        .map(|i| i + from)
        .ok_or(IncompleteTrace(what))
}

/// Span from the maker's first action after the taker submits the lock to
/// the oracle's release: the only window in which the maker must be online.
pub fn maker_critical_path(trace: &Trace) -> Result<Seconds, IncompleteTrace> {
    let (maker, taker) = (Account::new(MAKER), Account::new(TAKER));
    let lock = position(trace, 0, "taker lock submission", |e| {
        e.is(EventKind::TxSubmitted) && e.by(&taker) && tx_label(&e.payload) == Some("eth_lock")
    })?;
    let first = position(trace, lock, "maker action after the lock", |e| e.by(&maker))?;
    let release = position(trace, lock, "oracle release", |e| {
        e.is(EventKind::OracleRelease)
    })?;
    Ok(trace.events[release]
        .time
        .saturating_sub(trace.events[first].time))
}

/// From the taker accepting the proposal to the BTC spend confirming.
pub fn taker_end_to_end(trace: &Trace) -> Result<Seconds, IncompleteTrace> {
    let taker = Account::new(TAKER);
    let start = position(trace, 0, "proposal acceptance", |e| {
        e.is(EventKind::ProposalAccepted) && e.by(&taker)
    })?;
    let spent = position(trace, start, "BTC spend", |e| e.is(EventKind::BtcSpent))?;
    Ok(trace.events[spent].time - trace.events[start].time)
}
