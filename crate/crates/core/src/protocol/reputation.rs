use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::chainsim::{EventKind, Trace};
use crate::codec::Reader;
use crate::ids::Account;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReputationError {
    #[error("trace has no terminal swap event")]
    NonTerminal,
    #[error("terminal event payload is malformed")]
    Malformed,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Standing {
    pub completed: u64,
    pub ghosted: u64,
}

/// Per-account counts built from terminal trace events. Feeding the same
/// trace twice changes nothing.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReputationRecord {
    pub accounts: BTreeMap<Account, Standing>,
    seen: BTreeSet<[u8; 32]>,
}

impl ReputationRecord {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn standing(&self, who: &str) -> Standing {
        self.accounts
            .get(&Account::new(who))
            .copied()
            .unwrap_or_default()
    }

    pub fn update(&mut self, trace: &Trace) -> Result<(), ReputationError> {
        let terminal = trace
            .events
            .iter()
            .rev()
            .find(|e| {
                matches!(
                    e.kind,
                    EventKind::SwapCompleted
                        | EventKind::SwapRefunded
                        | EventKind::AtomicityViolation
                )
            })
            .ok_or(ReputationError::NonTerminal)?;
        let (completed, ghosted) = match terminal.kind {
            EventKind::SwapCompleted => {
                let mut r = Reader::new(&terminal.payload);
                let parties = [r.str(), r.str()];
                let parties: Option<Vec<Account>> =
                    parties.into_iter().map(|p| p.map(Account::new)).collect();
                (parties.ok_or(ReputationError::Malformed)?, None)
            }
            EventKind::SwapRefunded => (Vec::new(), terminal.actor.clone()),
            _ => (Vec::new(), None),
        };
        if !self.seen.insert(trace.digest()) {
            return Ok(());
        }
        for who in completed {
            self.accounts.entry(who).or_default().completed += 1;
        }
        if let Some(ghost) = ghosted {
            self.accounts.entry(ghost).or_default().ghosted += 1;
        }
        Ok(())
    }
}

pub fn update_reputation(
    mut record: ReputationRecord,
    trace: &Trace,
) -> Result<ReputationRecord, ReputationError> {
    record.update(trace)?;
    Ok(record)
}
