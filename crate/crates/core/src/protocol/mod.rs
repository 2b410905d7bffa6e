//! Swap choreography: proposal exchange, actor behaviour, scenarios and the
//! measurements taken from their traces.

pub mod actors;
pub mod metrics;
pub mod proposal;
pub mod reputation;
pub mod scenario;

pub use crate::fee::{compute_fee, FeeRate};
pub use actors::ADVERSARY_STRATEGIES;
pub use metrics::{maker_critical_path, taker_end_to_end, IncompleteTrace};
pub use proposal::{
    assemble_proposal, build_and_sign_proposal, derive_swap_id, verify_proposal, EscrowReceipt,
    ProposalError, SwapProposal,
};
pub use reputation::{update_reputation, ReputationError, ReputationRecord, Standing};
pub use scenario::*;
