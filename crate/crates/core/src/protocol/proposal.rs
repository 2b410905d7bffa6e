use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::adaptor::{presign, verify_presignature, AdaptorSecret, PreSignature, SecretCommitment};
use crate::chainsim::BTC_BLOCK_INTERVAL;
use crate::codec::Writer;
use crate::group::Group;
use crate::ids::{Account, SwapId};
use crate::schnorr::{sign, verify, KeyPair, Signature};
use crate::taproot::{tweak_keypair, tweak_public, SpendTx, SwapMetadata, TweakedKeyPair};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProposalError {
    #[error("the oracle has not acknowledged an escrow for this swap")]
    EscrowMissing,
    #[error("escrow receipt is for a different swap or commitment")]
    EscrowMismatch,
    #[error("tweaked signing key is zero; pick another swap id")]
    DegenerateTweak,
}

/// Oracle acknowledgement that the secret behind `commitment` is escrowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EscrowReceipt {
    pub swap_id: SwapId,
    pub commitment: SecretCommitment,
}

/// The maker's signed offer. Everything except the identity signature is
/// covered by that signature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwapProposal<G: Group> {
    pub metadata: SwapMetadata,
    pub presignature: PreSignature<G>,
    pub maker_eth_account: Account,
    /// Untweaked key; the output key is derived from it and `metadata`.
    pub maker_btc_key: G::Point,
    /// The pre-signed spend paying the taker.
    pub spend_tx: SpendTx,
    pub maker_identity_sig: Signature<G>,
}

impl<G: Group> SwapProposal<G> {
    pub fn signed_bytes(&self) -> Vec<u8> {
        proposal_bytes(
            &self.metadata,
            &self.presignature,
            &self.maker_eth_account,
            &self.maker_btc_key,
            &self.spend_tx,
        )
    }

    pub fn output_key(&self) -> G::Point {
        tweak_public::<G>(&self.maker_btc_key, &self.metadata)
    }
}

fn proposal_bytes<G: Group>(
    md: &SwapMetadata,
    ps: &PreSignature<G>,
    eth_account: &Account,
    btc_key: &G::Point,
    spend_tx: &SpendTx,
) -> Vec<u8> {
    Writer::new()
        .str("ptlc/proposal")
        .prefixed(&md.canonical_bytes())
        .prefixed(&ps.to_bytes())
        .str(eth_account.as_str())
        .prefixed(&G::encode_point(btc_key))
        .prefixed(&spend_tx.canonical_bytes())
        .finish()
}

const IDENTITY_NONCE_SEED: &[u8] = b"proposal-identity";

/// Signs an already computed pre-signature into a proposal.
pub fn assemble_proposal<G: Group>(
    identity: &KeyPair<G>,
    metadata: SwapMetadata,
    presignature: PreSignature<G>,
    maker_eth_account: Account,
    maker_btc_key: G::Point,
    spend_tx: SpendTx,
) -> SwapProposal<G> {
    let bytes = proposal_bytes(
        &metadata,
        &presignature,
        &maker_eth_account,
        &maker_btc_key,
        &spend_tx,
    );
    let maker_identity_sig = sign(identity, &bytes, IDENTITY_NONCE_SEED);
    SwapProposal {
        metadata,
        presignature,
        maker_eth_account,
        maker_btc_key,
        spend_tx,
        maker_identity_sig,
    }
}

/// Pre-signs the spend of the swap output to `recipient` under the tweaked
/// key and signs the whole offer with the maker's identity key.
pub fn build_and_sign_proposal<G: Group>(
    identity: &KeyPair<G>,
    btc_key: &KeyPair<G>,
    maker_eth_account: Account,
    metadata: SwapMetadata,
    secret: &AdaptorSecret<G>,
    recipient: Account,
    escrow: Option<&EscrowReceipt>,
) -> Result<(SwapProposal<G>, TweakedKeyPair<G>), ProposalError> {
    let receipt = escrow.ok_or(ProposalError::EscrowMissing)?;
    if receipt.swap_id != metadata.swap_id || receipt.commitment != metadata.commitment {
        return Err(ProposalError::EscrowMismatch);
    }
    let tweaked = tweak_keypair(btc_key, &metadata);
    let signing = tweaked
        .signing_key()
        .ok_or(ProposalError::DegenerateTweak)?;
    let spend_tx = SpendTx {
        swap_id: metadata.swap_id,
        recipient,
        value: metadata.amount_sat,
    };
    let ps = presign(&signing, &spend_tx.sighash(), secret, &metadata.swap_id.0);
    let proposal = assemble_proposal(
        identity,
        metadata,
        ps,
        maker_eth_account,
        *btc_key.public(),
        spend_tx,
    );
    Ok((proposal, tweaked))
}

/// Everything the taker checks before moving funds.
pub fn verify_proposal<G: Group>(p: &SwapProposal<G>, known_maker_key: &G::Point) -> bool {
    let md = &p.metadata;
    verify(&p.maker_identity_sig, known_maker_key, &p.signed_bytes())
        && md.amount_sat > 0
        && md.amount_wei > 0
        && md.timeout_eth > md.timeout_btc.saturating_mul(BTC_BLOCK_INTERVAL)
        && p.presignature.commitment == md.commitment
        && p.spend_tx.swap_id == md.swap_id
        && p.spend_tx.value == md.amount_sat
        && verify_presignature(&p.presignature, &p.output_key(), &p.spend_tx.sighash())
}

/// Swap id as a digest of the other parameters, the maker's key and a
/// counter the maker bumps to avoid a zero tweaked key.
pub fn derive_swap_id<G: Group>(
    md: &SwapMetadata,
    maker_btc_key: &G::Point,
    counter: u32,
) -> SwapId {
    let mut h = Sha256::new();
    h.update(b"ptlc/swap-id");
    h.update(md.amount_sat.to_be_bytes());
    h.update(md.amount_wei.to_be_bytes());
    h.update(md.timeout_btc.to_be_bytes());
    h.update(md.timeout_eth.to_be_bytes());
    h.update(md.commitment.as_bytes());
    h.update(G::encode_point(maker_btc_key));
    h.update(counter.to_be_bytes());
    SwapId(h.finalize().into())
}
