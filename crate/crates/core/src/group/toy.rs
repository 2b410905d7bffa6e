use std::ops::{Add, Mul, Neg, Sub};

use rand::{Rng, RngCore};

use super::{Group, GroupError, HashInput, Tag};

const Q: u8 = 23;

/// Z/23Z under addition, generator 1, identity 0.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Toy23;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ToyScalar(u8);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ToyPoint(u8);

impl ToyScalar {
    pub fn new(v: u64) -> Self {
        ToyScalar((v % Q as u64) as u8)
    }

    pub fn value(self) -> u8 {
        self.0
    }
}

impl ToyPoint {
    pub fn new(v: u64) -> Self {
        ToyPoint((v % Q as u64) as u8)
    }

    pub fn value(self) -> u8 {
        self.0
    }
}

fn add_mod(a: u8, b: u8) -> u8 {
    ((a as u16 + b as u16) % Q as u16) as u8
}

fn mul_mod(a: u8, b: u8) -> u8 {
    ((a as u16 * b as u16) % Q as u16) as u8
}

fn neg_mod(a: u8) -> u8 {
    (Q - a) % Q
}

/// Big-endian integer value of `bytes`, reduced mod 23.
pub(crate) fn bytes_mod_q(bytes: &[u8]) -> u8 {
    bytes
        .iter()
        .fold(0u16, |acc, &b| (acc * 256 + b as u16) % Q as u16) as u8
}

impl Add for ToyScalar {
    type Output = ToyScalar;
    fn add(self, rhs: ToyScalar) -> ToyScalar {
        ToyScalar(add_mod(self.0, rhs.0))
    }
}

impl Sub for ToyScalar {
    type Output = ToyScalar;
    fn sub(self, rhs: ToyScalar) -> ToyScalar {
        ToyScalar(add_mod(self.0, neg_mod(rhs.0)))
    }
}

impl Mul for ToyScalar {
    type Output = ToyScalar;
    fn mul(self, rhs: ToyScalar) -> ToyScalar {
        ToyScalar(mul_mod(self.0, rhs.0))
    }
}

impl Neg for ToyScalar {
    type Output = ToyScalar;
    fn neg(self) -> ToyScalar {
        ToyScalar(neg_mod(self.0))
    }
}

impl Add for ToyPoint {
    type Output = ToyPoint;
    fn add(self, rhs: ToyPoint) -> ToyPoint {
        ToyPoint(add_mod(self.0, rhs.0))
    }
}

impl Sub for ToyPoint {
    type Output = ToyPoint;
    fn sub(self, rhs: ToyPoint) -> ToyPoint {
        ToyPoint(add_mod(self.0, neg_mod(rhs.0)))
    }
}

impl Mul<ToyScalar> for ToyPoint {
    type Output = ToyPoint;
    fn mul(self, k: ToyScalar) -> ToyPoint {
        ToyPoint(mul_mod(self.0, k.0))
    }
}

impl Group for Toy23 {
    type Scalar = ToyScalar;
    type Point = ToyPoint;

    const NAME: &'static str = "toy";
    const SCALAR_LEN: usize = 1;
    const POINT_LEN: usize = 1;

    fn generator() -> ToyPoint {
        ToyPoint(1)
    }

    fn identity() -> ToyPoint {
        ToyPoint(0)
    }

    fn scalar_from_u64(v: u64) -> ToyScalar {
        ToyScalar::new(v)
    }

    fn encode_scalar(s: &ToyScalar) -> Vec<u8> {
        vec![s.0]
    }

    fn decode_scalar(bytes: &[u8]) -> Result<ToyScalar, GroupError> {
        match bytes {
            [b] if *b < Q => Ok(ToyScalar(*b)),
            [_] => Err(GroupError::ScalarOutOfRange {
                profile: Self::NAME,
            }),
            _ => Err(GroupError::ScalarLength {
                profile: Self::NAME,
                expected: 1,
                got: bytes.len(),
            }),
        }
    }

    fn encode_point(p: &ToyPoint) -> Vec<u8> {
        vec![p.0]
    }

    fn decode_point(bytes: &[u8]) -> Result<ToyPoint, GroupError> {
        match bytes {
            [b] if *b < Q => Ok(ToyPoint(*b)),
            [_] => Err(GroupError::InvalidPoint {
                profile: Self::NAME,
            }),
            _ => Err(GroupError::PointLength {
                profile: Self::NAME,
                expected: 1,
                got: bytes.len(),
            }),
        }
    }

    fn reduce_digest(digest: &[u8; 32]) -> ToyScalar {
        ToyScalar(bytes_mod_q(digest))
    }

    /// `(tag constant + sum of field values) mod 23`, each field read as a
    /// big-endian integer.
    fn hash_to_scalar(tag: Tag, inputs: &[HashInput<'_>]) -> ToyScalar {
        let sum = inputs
            .iter()
            .fold(tag.toy_constant() % Q as u64, |acc, input| {
                (acc + bytes_mod_q(input.bytes()) as u64) % Q as u64
            });
        ToyScalar(sum as u8)
    }

    fn commitment_digest(s: &ToyScalar) -> Vec<u8> {
        vec![Self::hash_to_scalar(Tag::Commitment, &[HashInput::Fixed(&[s.0])]).0]
    }

    fn sample_nonzero<R: RngCore>(rng: &mut R) -> ToyScalar {
        ToyScalar(rng.gen_range(1..Q))
    }
}
