//! Adaptor pre-signatures.
//!
//! ```text
//! s*      = s - s_a              (presign, same R as the full signature)
//! s_final = s* + delta           (complete)
//! s_a     = s_final - s*         (extract)
//! s* G   == R + e P - Delta      (verify_presignature, Delta = s_a G)
//! C       = H(s_a)               (commit_secret)
//! ```
//!
//! The adaptor component is the secret itself (`delta = s_a`).

use thiserror::Error;

use crate::group::{Group, GroupError};
use crate::schnorr::{challenge, derive_nonce, KeyPair, Signature};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdaptorError {
    #[error("adaptor secret must be nonzero")]
    ZeroSecret,
    #[error("signature nonce point differs from the pre-signature's")]
    NonceMismatch,
    #[error(transparent)]
    Encoding(#[from] GroupError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdaptorSecret<G: Group>(G::Scalar);

impl<G: Group> AdaptorSecret<G> {
    pub fn new(value: G::Scalar) -> Result<Self, AdaptorError> {
        if G::is_zero(&value) {
            return Err(AdaptorError::ZeroSecret);
        }
        Ok(AdaptorSecret(value))
    }

    pub fn value(&self) -> &G::Scalar {
        &self.0
    }

    pub fn point(&self) -> AdaptorPoint<G> {
        AdaptorPoint(G::base_mul(&self.0))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SecretCommitment(Vec<u8>);

impl SecretCommitment {
    pub fn from_bytes(bytes: Vec<u8>) -> Self {
        SecretCommitment(bytes)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdaptorPoint<G: Group>(pub G::Point);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreSignature<G: Group> {
    pub nonce_point: G::Point,
    pub partial: G::Scalar,
    pub adaptor_point: AdaptorPoint<G>,
    pub commitment: SecretCommitment,
}

impl<G: Group> PreSignature<G> {
    /// Wire form `R || s* || Delta || len(C) || C`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = G::encode_point(&self.nonce_point);
        out.extend(G::encode_scalar(&self.partial));
        out.extend(G::encode_point(&self.adaptor_point.0));
        out.extend((self.commitment.0.len() as u16).to_be_bytes());
        out.extend_from_slice(&self.commitment.0);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, AdaptorError> {
        let (pl, sl) = (G::POINT_LEN, G::SCALAR_LEN);
        let fixed = 2 * pl + sl + 2;
        let short = || {
            AdaptorError::Encoding(GroupError::PointLength {
                profile: G::NAME,
                expected: fixed,
                got: bytes.len(),
            })
        };
        if bytes.len() < fixed {
            return Err(short());
        }
        let nonce_point = G::decode_point(&bytes[..pl])?;
        let partial = G::decode_scalar(&bytes[pl..pl + sl])?;
        let adaptor_point = AdaptorPoint(G::decode_point(&bytes[pl + sl..2 * pl + sl])?);
        let clen = u16::from_be_bytes([bytes[fixed - 2], bytes[fixed - 1]]) as usize;
        if bytes.len() != fixed + clen {
            return Err(short());
        }
        Ok(PreSignature {
            nonce_point,
            partial,
            adaptor_point,
            commitment: SecretCommitment(bytes[fixed..].to_vec()),
        })
    }

    /// Hex tuple `(R, s*, Delta, C)`.
    pub fn hex_tuple(&self) -> [String; 4] {
        [
            G::point_hex(&self.nonce_point),
            G::scalar_hex(&self.partial),
            G::point_hex(&self.adaptor_point.0),
            self.commitment.to_hex(),
        ]
    }
}

pub fn commit_secret<G: Group>(secret: &AdaptorSecret<G>) -> SecretCommitment {
    SecretCommitment(G::commitment_digest(&secret.0))
}

/// Pre-signs with an explicit nonce.
pub fn presign_with_nonce<G: Group>(
    kp: &KeyPair<G>,
    m: &[u8],
    secret: &AdaptorSecret<G>,
    k: &G::Scalar,
) -> PreSignature<G> {
    let full = crate::schnorr::sign_with_nonce(kp, m, k);
    PreSignature {
        nonce_point: full.nonce_point,
        partial: full.scalar - secret.0,
        adaptor_point: secret.point(),
        commitment: commit_secret(secret),
    }
}

/// Pre-signs with the same deterministic nonce `sign` would use, so
/// `complete(presign(..), s_a) == sign(..)`.
pub fn presign<G: Group>(
    kp: &KeyPair<G>,
    m: &[u8],
    secret: &AdaptorSecret<G>,
    nonce_seed: &[u8],
) -> PreSignature<G> {
    let k = derive_nonce::<G>(kp.secret(), m, nonce_seed);
    presign_with_nonce(kp, m, secret, &k)
}

pub fn verify_presignature<G: Group>(ps: &PreSignature<G>, p: &G::Point, m: &[u8]) -> bool {
    let e = challenge::<G>(&ps.nonce_point, p, m);
    G::base_mul(&ps.partial) == ps.nonce_point + *p * e - ps.adaptor_point.0
}

pub fn verify_presignature_encoded<G: Group>(
    ps: &[u8],
    p: &[u8],
    m: &[u8],
) -> Result<bool, AdaptorError> {
    let ps = PreSignature::<G>::from_bytes(ps)?;
    let p = G::decode_point(p)?;
    Ok(verify_presignature(&ps, &p, m))
}

/// Total: a wrong `delta` yields a signature that fails verification.
pub fn complete<G: Group>(ps: &PreSignature<G>, delta: &G::Scalar) -> Signature<G> {
    Signature {
        nonce_point: ps.nonce_point,
        scalar: ps.partial + *delta,
    }
}

pub fn extract_secret<G: Group>(
    final_sig: &Signature<G>,
    ps: &PreSignature<G>,
) -> Result<AdaptorSecret<G>, AdaptorError> {
    if final_sig.nonce_point != ps.nonce_point {
        return Err(AdaptorError::NonceMismatch);
    }
    AdaptorSecret::new(final_sig.scalar - ps.partial)
}

/// `H(s) == C` and `s*G == Delta`.
pub fn check_commitment<G: Group>(
    secret: &AdaptorSecret<G>,
    commitment: &SecretCommitment,
    delta_point: &AdaptorPoint<G>,
) -> bool {
    commit_secret(secret) == *commitment && secret.point() == *delta_point
}
