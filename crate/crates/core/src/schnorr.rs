//! Schnorr signatures over a [`Group`]: `s = k + e*x`, verified as
//! `s*G == R + e*P` with `e = H(R || P || m)`.
//!
//! On secp256k1 the challenge uses the `BIP0340/challenge` tagged hash over the
//! 33-byte compressed encodings of `R` and `P` (full points, no x-only
//! normalization). On the toy profile it is `(1 + R + P + m) mod 23`.

use crate::group::{random_scalar, Group, GroupError, HashInput, Tag};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeyPair<G: Group> {
    secret: G::Scalar,
    public: G::Point,
}

impl<G: Group> KeyPair<G> {
    /// Panics if `secret` is zero.
    pub fn from_secret(secret: G::Scalar) -> Self {
        assert!(!G::is_zero(&secret), "secret key must be nonzero");
        KeyPair {
            secret,
            public: G::base_mul(&secret),
        }
    }

    pub fn secret(&self) -> &G::Scalar {
        &self.secret
    }

    pub fn public(&self) -> &G::Point {
        &self.public
    }
}

/// Key pair with a secret drawn deterministically from `seed`.
pub fn keygen<G: Group>(seed: &[u8]) -> KeyPair<G> {
    KeyPair::from_secret(random_scalar::<G>(seed))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Signature<G: Group> {
    pub nonce_point: G::Point,
    pub scalar: G::Scalar,
}

impl<G: Group> Signature<G> {
    pub const ENCODED_LEN: usize = G::POINT_LEN + G::SCALAR_LEN;

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = G::encode_point(&self.nonce_point);
        out.extend(G::encode_scalar(&self.scalar));
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, GroupError> {
        if bytes.len() != Self::ENCODED_LEN {
            return Err(GroupError::PointLength {
                profile: G::NAME,
                expected: Self::ENCODED_LEN,
                got: bytes.len(),
            });
        }
        let (r, s) = bytes.split_at(G::POINT_LEN);
        Ok(Signature {
            nonce_point: G::decode_point(r)?,
            scalar: G::decode_scalar(s)?,
        })
    }
}

/// `e = H(R || P || m)` reduced mod q.
pub fn challenge<G: Group>(r: &G::Point, p: &G::Point, m: &[u8]) -> G::Scalar {
    let r = G::encode_point(r);
    let p = G::encode_point(p);
    G::hash_to_scalar(
        Tag::Challenge,
        &[
            HashInput::Fixed(&r),
            HashInput::Fixed(&p),
            HashInput::Fixed(m),
        ],
    )
}

/// Nonce from `H(x || m || seed || counter)`, skipping zero.
pub fn derive_nonce<G: Group>(secret: &G::Scalar, m: &[u8], nonce_seed: &[u8]) -> G::Scalar {
    let x = G::encode_scalar(secret);
    (0u32..)
        .map(|counter| {
            let mut msg = crate::group::serialize_inputs(&[
                HashInput::Prefixed(&x),
                HashInput::Prefixed(m),
                HashInput::Prefixed(nonce_seed),
            ]);
            msg.extend_from_slice(&counter.to_be_bytes());
            G::reduce_digest(&crate::group::tagged_sha256(Tag::Nonce.name(), &msg))
        })
        .find(|k| !G::is_zero(k))
        .expect("nonce search is unbounded")
}

/// Signs with an explicit nonce. Panics on a zero nonce.
pub fn sign_with_nonce<G: Group>(kp: &KeyPair<G>, m: &[u8], k: &G::Scalar) -> Signature<G> {
    assert!(!G::is_zero(k), "nonce must be nonzero");
    let r = G::base_mul(k);
    let e = challenge::<G>(&r, kp.public(), m);
    Signature {
        nonce_point: r,
        scalar: *k + e * *kp.secret(),
    }
}

pub fn sign<G: Group>(kp: &KeyPair<G>, m: &[u8], nonce_seed: &[u8]) -> Signature<G> {
    let k = derive_nonce::<G>(kp.secret(), m, nonce_seed);
    sign_with_nonce(kp, m, &k)
}

pub fn verify<G: Group>(sig: &Signature<G>, p: &G::Point, m: &[u8]) -> bool {
    let e = challenge::<G>(&sig.nonce_point, p, m);
    G::base_mul(&sig.scalar) == sig.nonce_point + *p * e
}

/// Verifies encoded inputs. Malformed encodings are an error, not `false`.
pub fn verify_encoded<G: Group>(sig: &[u8], p: &[u8], m: &[u8]) -> Result<bool, GroupError> {
    let sig = Signature::<G>::from_bytes(sig)?;
    let p = G::decode_point(p)?;
    Ok(verify(&sig, &p, m))
}
