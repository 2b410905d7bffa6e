//! Prime-order group abstraction.
//!
//! Everything above this module is written against [`Group`], so the same
//! signing, adaptor and simulation code runs on two profiles:
//!
//! * [`Secp256k1`]: the production curve, backed by `k256`.
//! * [`Toy23`]: the additive group Z/23Z with generator 1. Discrete logs are
//!   trivial and its "hash" is a sum, so every value can be checked by hand.
//!   It is cryptographically void and exists for oracle tests.
//!
//! Nothing here is constant time.

mod secp256k1;
mod toy;

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use self::secp256k1::Secp256k1;
pub use self::toy::Toy23;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("{profile}: scalar encoding must be {expected} bytes, got {got}")]
    ScalarLength {
        profile: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("{profile}: scalar is not reduced modulo the group order")]
    ScalarOutOfRange { profile: &'static str },
    #[error("{profile}: point encoding must be {expected} bytes, got {got}")]
    PointLength {
        profile: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("{profile}: bytes do not encode a group element")]
    InvalidPoint { profile: &'static str },
    #[error("malformed hex: {0}")]
    Hex(String),
}

/// Domain-separation tags used by [`Group::hash_to_scalar`].
///
/// The toy profile maps each tag to a small additive constant; the production
/// profile uses the tag string in a BIP-340 style tagged SHA-256.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tag {
    Challenge,
    TapTweak,
    Nonce,
    Commitment,
}

impl Tag {
    pub fn name(self) -> &'static str {
        match self {
            Tag::Challenge => "BIP0340/challenge",
            Tag::TapTweak => "TapTweak",
            Tag::Nonce => "ptlc/nonce",
            Tag::Commitment => "ptlc/commitment",
        }
    }

    /// Additive constant used by the toy hash.
    pub fn toy_constant(self) -> u64 {
        match self {
            Tag::Challenge => 1,
            Tag::TapTweak => 2,
            Tag::Nonce => 3,
            Tag::Commitment => 4,
        }
    }
}

/// One field of a hash input.
///
/// `Prefixed` fields get a 4-byte big-endian length prefix in the byte
/// serialization. The toy hash ignores prefixes and sums field values.
#[derive(Debug, Clone, Copy)]
pub enum HashInput<'a> {
    Fixed(&'a [u8]),
    Prefixed(&'a [u8]),
}

impl HashInput<'_> {
    pub fn bytes(&self) -> &[u8] {
        match self {
            HashInput::Fixed(b) | HashInput::Prefixed(b) => b,
        }
    }
}

/// Concatenates fields into their canonical byte string.
pub fn serialize_inputs(inputs: &[HashInput<'_>]) -> Vec<u8> {
    let mut out = Vec::new();
    for input in inputs {
        if let HashInput::Prefixed(b) = input {
            out.extend_from_slice(&(b.len() as u32).to_be_bytes());
        }
        out.extend_from_slice(input.bytes());
    }
    out
}

/// BIP-340 style tagged hash: `SHA256(SHA256(tag) || SHA256(tag) || msg)`.
pub fn tagged_sha256(tag: &str, msg: &[u8]) -> [u8; 32] {
    let tag_hash = Sha256::digest(tag.as_bytes());
    let mut h = Sha256::new();
    h.update(tag_hash);
    h.update(tag_hash);
    h.update(msg);
    h.finalize().into()
}

pub trait Group: Copy + Clone + Debug + Default + PartialEq + Eq + Send + Sync + 'static {
    type Scalar: Copy
        + Eq
        + Debug
        + Send
        + Sync
        + Add<Output = Self::Scalar>
        + Sub<Output = Self::Scalar>
        + Mul<Output = Self::Scalar>
        + Neg<Output = Self::Scalar>;
    type Point: Copy
        + Eq
        + Debug
        + Send
        + Sync
        + Add<Output = Self::Point>
        + Sub<Output = Self::Point>
        + Mul<Self::Scalar, Output = Self::Point>;

    const NAME: &'static str;
    const SCALAR_LEN: usize;
    const POINT_LEN: usize;

    fn generator() -> Self::Point;
    fn identity() -> Self::Point;
    fn scalar_from_u64(v: u64) -> Self::Scalar;

    fn encode_scalar(s: &Self::Scalar) -> Vec<u8>;
    fn decode_scalar(bytes: &[u8]) -> Result<Self::Scalar, GroupError>;
    fn encode_point(p: &Self::Point) -> Vec<u8>;
    fn decode_point(bytes: &[u8]) -> Result<Self::Point, GroupError>;

    /// Reduces a 32-byte digest modulo the group order.
    fn reduce_digest(digest: &[u8; 32]) -> Self::Scalar;

    /// Domain-separated hash of structured input, reduced to a scalar.
    fn hash_to_scalar(tag: Tag, inputs: &[HashInput<'_>]) -> Self::Scalar;

    /// Fixed-length commitment digest `H(s)` of a scalar.
    fn commitment_digest(s: &Self::Scalar) -> Vec<u8>;

    /// Uniform draw from `[1, q)`.
    fn sample_nonzero<R: RngCore>(rng: &mut R) -> Self::Scalar;

    fn scalar_zero() -> Self::Scalar {
        Self::scalar_from_u64(0)
    }

    fn scalar_one() -> Self::Scalar {
        Self::scalar_from_u64(1)
    }

    fn is_zero(s: &Self::Scalar) -> bool {
        *s == Self::scalar_zero()
    }

    fn base_mul(k: &Self::Scalar) -> Self::Point {
        Self::generator() * *k
    }

    fn scalar_hex(s: &Self::Scalar) -> String {
        hex::encode(Self::encode_scalar(s))
    }

    fn point_hex(p: &Self::Point) -> String {
        hex::encode(Self::encode_point(p))
    }

    fn scalar_from_hex(s: &str) -> Result<Self::Scalar, GroupError> {
        let bytes = hex::decode(s).map_err(|e| GroupError::Hex(e.to_string()))?;
        Self::decode_scalar(&bytes)
    }

    fn point_from_hex(s: &str) -> Result<Self::Point, GroupError> {
        let bytes = hex::decode(s).map_err(|e| GroupError::Hex(e.to_string()))?;
        Self::decode_point(&bytes)
    }
}

/// Returns `k * p`.
pub fn point_mul<G: Group>(k: &G::Scalar, p: &G::Point) -> G::Point {
    *p * *k
}

pub fn point_add<G: Group>(a: &G::Point, b: &G::Point) -> G::Point {
    *a + *b
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarOp {
    Add,
    Sub,
    Mul,
}

pub fn scalar_arith<G: Group>(a: &G::Scalar, b: &G::Scalar, op: ScalarOp) -> G::Scalar {
    match op {
        ScalarOp::Add => *a + *b,
        ScalarOp::Sub => *a - *b,
        ScalarOp::Mul => *a * *b,
    }
}

/// Deterministic nonzero scalar from a seed. Same seed, same scalar.
pub fn random_scalar<G: Group>(seed: &[u8]) -> G::Scalar {
    let mut rng = ChaCha20Rng::from_seed(Sha256::digest(seed).into());
    G::sample_nonzero(&mut rng)
}

/// Derives a labelled sub-seed from a run seed.
pub fn derive_seed(seed: u64, label: &str) -> Vec<u8> {
    let mut h = Sha256::new();
    h.update(seed.to_be_bytes());
    h.update(label.as_bytes());
    h.finalize().to_vec()
}

/// Names accepted for profile selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ProfileName {
    #[serde(rename = "toy")]
    Toy,
    #[serde(rename = "secp256k1")]
    Secp256k1,
}

impl std::str::FromStr for ProfileName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "toy" => Ok(ProfileName::Toy),
            "secp256k1" => Ok(ProfileName::Secp256k1),
            other => Err(format!(
                "unknown profile `{other}` (expected `toy` or `secp256k1`)"
            )),
        }
    }
}

impl std::fmt::Display for ProfileName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ProfileName::Toy => Toy23::NAME,
            ProfileName::Secp256k1 => Secp256k1::NAME,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_scalar_is_deterministic() {
        assert_eq!(
            random_scalar::<Toy23>(b"seed"),
            random_scalar::<Toy23>(b"seed")
        );
        assert_eq!(
            random_scalar::<Secp256k1>(b"seed"),
            random_scalar::<Secp256k1>(b"seed")
        );
        assert_ne!(
            random_scalar::<Secp256k1>(b"seed"),
            random_scalar::<Secp256k1>(b"other")
        );
    }

    #[test]
    fn toy_draws_cover_every_nonzero_residue() {
        // frequency-count oracle: plain array of counters indexed by value
        let mut counts = [0u32; 23];
        for i in 0..10_000u32 {
            let s = random_scalar::<Toy23>(&i.to_be_bytes());
            let v = Toy23::encode_scalar(&s)[0] as usize;
            assert!((1..23).contains(&v), "draw {v} outside [1, 23)");
            counts[v] += 1;
        }
        assert_eq!(counts[0], 0);
        assert!(
            counts[1..].iter().all(|&c| c > 0),
            "missing residue: {counts:?}"
        );
    }

    #[test]
    fn zero_scalar_times_generator_is_identity() {
        assert_eq!(
            point_mul::<Toy23>(&Toy23::scalar_zero(), &Toy23::generator()),
            Toy23::identity()
        );
        assert_eq!(
            point_mul::<Secp256k1>(&Secp256k1::scalar_zero(), &Secp256k1::generator()),
            Secp256k1::identity()
        );
    }

    #[test]
    fn serialized_inputs_prefix_only_variable_fields() {
        let bytes = serialize_inputs(&[HashInput::Fixed(&[1, 2]), HashInput::Prefixed(&[9])]);
        assert_eq!(bytes, vec![1, 2, 0, 0, 0, 1, 9]);
    }

    #[test]
    fn profile_names_parse() {
        assert_eq!("toy".parse::<ProfileName>().unwrap(), ProfileName::Toy);
        assert_eq!(
            "secp256k1".parse::<ProfileName>().unwrap(),
            ProfileName::Secp256k1
        );
        assert!("ed25519".parse::<ProfileName>().is_err());
    }
}
