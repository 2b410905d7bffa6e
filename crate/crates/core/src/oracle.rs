//! Single simulated oracle. Holds escrowed adaptor secrets and releases one,
//! with a signature over swap-specific parameters, once the matching
//! contract instance is locked and confirmed.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::adaptor::{commit_secret, AdaptorSecret, SecretCommitment};
use crate::chainsim::{EthChain, InstanceState};
use crate::codec::{Reader, Writer};
use crate::group::Group;
use crate::ids::SwapId;
use crate::schnorr::{sign, verify, KeyPair, Signature};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("secret does not match commitment for swap {0}")]
    CommitmentMismatch(SwapId),
    #[error("swap {0} is already escrowed")]
    DuplicateSwap(SwapId),
    #[error("no escrow for swap {0}")]
    UnknownSwap(SwapId),
}

/// Oracle key pair. Deliberately not `Debug` or serializable.
#[derive(Clone)]
pub struct OracleIdentity<G: Group> {
    keypair: KeyPair<G>,
}

impl<G: Group> OracleIdentity<G> {
    pub fn new(keypair: KeyPair<G>) -> Self {
        OracleIdentity { keypair }
    }

    pub fn public(&self) -> &G::Point {
        self.keypair.public()
    }
}

/// What the oracle attests to: this swap, this commitment, and the contract
/// lock it observed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnlockMessage {
    pub swap_id: SwapId,
    pub commitment: SecretCommitment,
    pub lock_height: u64,
    pub contract_id: u64,
}

impl UnlockMessage {
    pub fn to_bytes(&self) -> Vec<u8> {
        Writer::new()
            .str("ptlc/unlock")
            .raw(&self.swap_id.0)
            .prefixed(self.commitment.as_bytes())
            .u64(self.lock_height)
            .u64(self.contract_id)
            .finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Option<Self> {
        let mut r = Reader::new(bytes);
        if r.str()? != "ptlc/unlock" {
            return None;
        }
        let swap_id = SwapId(r.array::<32>()?);
        let commitment = SecretCommitment::from_bytes(r.prefixed()?.to_vec());
        let lock_height = r.u64()?;
        let contract_id = r.u64()?;
        r.finish()?;
        Some(UnlockMessage {
            swap_id,
            commitment,
            lock_height,
            contract_id,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnlockRelease<G: Group> {
    pub unlock_value: AdaptorSecret<G>,
    pub oracle_sig: Signature<G>,
    pub message: UnlockMessage,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReleaseStatus<G: Group> {
    Released(UnlockRelease<G>),
    NotReady,
    /// The instance is settled or expired; the condition can never be met.
    Closed,
}

const RELEASE_NONCE_SEED: &[u8] = b"oracle-release";

#[derive(Clone)]
pub struct Oracle<G: Group> {
    identity: OracleIdentity<G>,
    confirmations: u64,
    escrow: BTreeMap<SwapId, (AdaptorSecret<G>, SecretCommitment)>,
}

impl<G: Group> Oracle<G> {
    /// `confirmations` counts the lock's own block, so 1 means "included".
    pub fn new(identity: OracleIdentity<G>, confirmations: u64) -> Self {
        assert!(confirmations >= 1, "a lock needs at least one confirmation");
        Oracle {
            identity,
            confirmations,
            escrow: BTreeMap::new(),
        }
    }

    pub fn public(&self) -> &G::Point {
        self.identity.public()
    }

    pub fn confirmations(&self) -> u64 {
        self.confirmations
    }

    pub fn escrow_secret(
        &mut self,
        swap_id: SwapId,
        secret: AdaptorSecret<G>,
        commitment: SecretCommitment,
    ) -> Result<(), OracleError> {
        if commit_secret(&secret) != commitment {
            return Err(OracleError::CommitmentMismatch(swap_id));
        }
        if self.escrow.contains_key(&swap_id) {
            return Err(OracleError::DuplicateSwap(swap_id));
        }
        self.escrow.insert(swap_id, (secret, commitment));
        Ok(())
    }

    pub fn is_escrowed(&self, swap_id: &SwapId) -> bool {
        self.escrow.contains_key(swap_id)
    }

    /// Deterministic: the same chain state yields byte-identical releases.
    pub fn observe_and_release(
        &self,
        eth: &EthChain<G>,
        swap_id: &SwapId,
    ) -> Result<ReleaseStatus<G>, OracleError> {
        let (secret, commitment) = self
            .escrow
            .get(swap_id)
            .ok_or(OracleError::UnknownSwap(*swap_id))?;
        let Some(inst) = eth.instance(swap_id) else {
            return Ok(ReleaseStatus::NotReady);
        };
        if inst.state.is_terminal() || inst.expired {
            return Ok(ReleaseStatus::Closed);
        }
        if inst.state != InstanceState::Locked || inst.params.commitment != *commitment {
            return Ok(ReleaseStatus::NotReady);
        }
        let lock_height = inst
            .locked_height
            .expect("locked instance records its height");
        if eth.height() + 1 < lock_height + self.confirmations {
            return Ok(ReleaseStatus::NotReady);
        }
        let message = UnlockMessage {
            swap_id: *swap_id,
            commitment: commitment.clone(),
            lock_height,
            contract_id: inst.contract_id,
        };
        let oracle_sig = sign(
            &self.identity.keypair,
            &message.to_bytes(),
            RELEASE_NONCE_SEED,
        );
        Ok(ReleaseStatus::Released(UnlockRelease {
            unlock_value: *secret,
            oracle_sig,
            message,
        }))
    }
}

pub fn verify_release<G: Group>(
    rel: &UnlockRelease<G>,
    oracle_key: &G::Point,
    expected: &SecretCommitment,
) -> bool {
    verify(&rel.oracle_sig, oracle_key, &rel.message.to_bytes())
        && rel.message.commitment == *expected
        && commit_secret(&rel.unlock_value) == *expected
}
