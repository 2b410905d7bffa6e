//! Point time-locked atomic swaps built from Schnorr adaptor signatures,
//! with a deterministic two-chain simulator to run them on.
//!
//! Everything is generic over [`group::Group`]: [`group::Toy23`] makes every
//! value hand-checkable, [`group::Secp256k1`] is the real curve.

pub mod adaptor;
pub mod chainsim;
pub mod codec;
pub mod fee;
pub mod group;
pub mod ids;
pub mod oracle;
pub mod protocol;
pub mod schnorr;
pub mod taproot;
pub mod vectors;
