//! Swap-bound key tweaking and the three-part Taproot spend check.
//!
//! The tweak is `t = TagHash("TapTweak", P || m_swap) mod q`; the output key
//! is `P + tG` and only `x + t` can sign for it. Any change to the swap
//! metadata moves `t` and therefore the key.

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::adaptor::{check_commitment, AdaptorSecret, PreSignature, SecretCommitment};
use crate::group::{serialize_inputs, Group, HashInput, Tag};
use crate::ids::{Account, SwapId};
use crate::oracle::UnlockMessage;
use crate::schnorr::{verify, KeyPair, Signature};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TaprootError {
    #[error("final signature nonce point differs from the pre-signature's")]
    NonceMismatch,
    #[error("truncated or malformed swap metadata")]
    MalformedMetadata,
}

/// Swap parameters committed into the output key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwapMetadata {
    pub amount_sat: u64,
    pub amount_wei: u128,
    /// Absolute BTC height at which the refund path opens.
    pub timeout_btc: u64,
    /// ETH instance lifetime in virtual seconds, counted from deployment.
    pub timeout_eth: u64,
    pub commitment: SecretCommitment,
    pub swap_id: SwapId,
}

impl SwapMetadata {
    fn fields(&self) -> [Vec<u8>; 6] {
        [
            self.amount_sat.to_be_bytes().to_vec(),
            self.amount_wei.to_be_bytes().to_vec(),
            self.timeout_btc.to_be_bytes().to_vec(),
            self.timeout_eth.to_be_bytes().to_vec(),
            self.commitment.as_bytes().to_vec(),
            self.swap_id.0.to_vec(),
        ]
    }

    fn inputs<'a>(fields: &'a [Vec<u8>; 6]) -> [HashInput<'a>; 6] {
        [
            HashInput::Fixed(&fields[0]),
            HashInput::Fixed(&fields[1]),
            HashInput::Fixed(&fields[2]),
            HashInput::Fixed(&fields[3]),
            HashInput::Prefixed(&fields[4]),
            HashInput::Fixed(&fields[5]),
        ]
    }

    /// Fixed field order, big-endian integers, length-prefixed commitment.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let fields = self.fields();
        serialize_inputs(&Self::inputs(&fields))
    }

    pub fn from_canonical_bytes(bytes: &[u8]) -> Result<Self, TaprootError> {
        let mut r = crate::codec::Reader::new(bytes);
        let md = (|| {
            let amount_sat = r.u64()?;
            let amount_wei = r.u128()?;
            let timeout_btc = r.u64()?;
            let timeout_eth = r.u64()?;
            let commitment = SecretCommitment::from_bytes(r.prefixed()?.to_vec());
            let swap_id = SwapId(r.array::<32>()?);
            r.finish()?;
            Some(SwapMetadata {
                amount_sat,
                amount_wei,
                timeout_btc,
                timeout_eth,
                commitment,
                swap_id,
            })
        })();
        md.ok_or(TaprootError::MalformedMetadata)
    }
}

pub fn derive_tweak<G: Group>(p: &G::Point, metadata: &SwapMetadata) -> G::Scalar {
    let key = G::encode_point(p);
    let fields = metadata.fields();
    let mut inputs = vec![HashInput::Fixed(&key)];
    inputs.extend(SwapMetadata::inputs(&fields));
    G::hash_to_scalar(Tag::TapTweak, &inputs)
}

/// `P + t*G` for a counterparty that only knows the base public key.
pub fn tweak_public<G: Group>(p: &G::Point, metadata: &SwapMetadata) -> G::Point {
    *p + G::base_mul(&derive_tweak::<G>(p, metadata))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TweakedKeyPair<G: Group> {
    pub base: KeyPair<G>,
    pub tweak: G::Scalar,
    pub tweaked_secret: G::Scalar,
    pub tweaked_public: G::Point,
}

impl<G: Group> TweakedKeyPair<G> {
    /// `None` when `x + t` is zero (only reachable on tiny groups).
    pub fn signing_key(&self) -> Option<KeyPair<G>> {
        (!G::is_zero(&self.tweaked_secret)).then(|| KeyPair::from_secret(self.tweaked_secret))
    }
}

pub fn tweak_keypair_with<G: Group>(kp: &KeyPair<G>, tweak: G::Scalar) -> TweakedKeyPair<G> {
    TweakedKeyPair {
        base: *kp,
        tweak,
        tweaked_secret: *kp.secret() + tweak,
        tweaked_public: *kp.public() + G::base_mul(&tweak),
    }
}

pub fn tweak_keypair<G: Group>(kp: &KeyPair<G>, metadata: &SwapMetadata) -> TweakedKeyPair<G> {
    tweak_keypair_with(kp, derive_tweak::<G>(kp.public(), metadata))
}

/// Body of the BTC transaction spending a swap output. Its digest is the
/// message `m` the maker pre-signs, which is what binds the recipient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpendTx {
    pub swap_id: SwapId,
    pub recipient: Account,
    pub value: u64,
}

impl SpendTx {
    pub fn canonical_bytes(&self) -> Vec<u8> {
        serialize_inputs(&[
            HashInput::Fixed(&self.swap_id.0),
            HashInput::Prefixed(self.recipient.as_str().as_bytes()),
            HashInput::Fixed(&self.value.to_be_bytes()),
        ])
    }

    pub fn sighash(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(b"ptlc/sighash");
        h.update(self.canonical_bytes());
        h.finalize().into()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaprootSpend<G: Group> {
    pub final_sig: Signature<G>,
    pub unlock_value: AdaptorSecret<G>,
    pub oracle_sig: Signature<G>,
    pub oracle_msg: Vec<u8>,
}

/// Outcome of each of the three spend checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpendChecks {
    pub final_signature: bool,
    pub commitment: bool,
    pub oracle_signature: bool,
}

impl SpendChecks {
    pub fn all(&self) -> bool {
        self.final_signature && self.commitment && self.oracle_signature
    }
}

pub fn check_taproot_spend<G: Group>(
    spend: &TaprootSpend<G>,
    ps: &PreSignature<G>,
    p_tweak: &G::Point,
    m: &[u8],
    commitment: &SecretCommitment,
    oracle_key: &G::Point,
) -> Result<SpendChecks, TaprootError> {
    if spend.final_sig.nonce_point != ps.nonce_point {
        return Err(TaprootError::NonceMismatch);
    }
    let final_signature = verify(&spend.final_sig, p_tweak, m);
    let commitment_ok = ps.commitment == *commitment
        && check_commitment(&spend.unlock_value, commitment, &ps.adaptor_point);
    let oracle_signature = verify(&spend.oracle_sig, oracle_key, &spend.oracle_msg)
        && UnlockMessage::from_bytes(&spend.oracle_msg)
            .is_some_and(|msg| msg.commitment == *commitment);
    Ok(SpendChecks {
        final_signature,
        commitment: commitment_ok,
        oracle_signature,
    })
}

/// Accepts only when the final signature verifies under `P_tweak`, the
/// unlock value opens `C` and `Delta`, and the oracle signed an unlock
/// message for `C`.
pub fn verify_taproot_spend<G: Group>(
    spend: &TaprootSpend<G>,
    ps: &PreSignature<G>,
    p_tweak: &G::Point,
    m: &[u8],
    commitment: &SecretCommitment,
    oracle_key: &G::Point,
) -> Result<bool, TaprootError> {
    check_taproot_spend(spend, ps, p_tweak, m, commitment, oracle_key).map(|c| c.all())
}
