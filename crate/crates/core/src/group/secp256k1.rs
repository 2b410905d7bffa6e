use k256::elliptic_curve::ops::Reduce;
use k256::elliptic_curve::sec1::{FromEncodedPoint, ToEncodedPoint};
use k256::elliptic_curve::{Field, PrimeField};
use k256::{AffinePoint, EncodedPoint, FieldBytes, ProjectivePoint, Scalar, U256};
use rand::RngCore;
use sha2::{Digest, Sha256};

use super::{serialize_inputs, tagged_sha256, Group, GroupError, HashInput, Tag};

/// secp256k1 via `k256`. Points use 33-byte SEC1 compressed encoding; the
/// identity, which has no SEC1 compressed form, is 33 zero bytes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Secp256k1;

impl Group for Secp256k1 {
    type Scalar = Scalar;
    type Point = ProjectivePoint;

    const NAME: &'static str = "secp256k1";
    const SCALAR_LEN: usize = 32;
    const POINT_LEN: usize = 33;

    fn generator() -> ProjectivePoint {
        ProjectivePoint::GENERATOR
    }

    fn identity() -> ProjectivePoint {
        ProjectivePoint::IDENTITY
    }

    fn scalar_from_u64(v: u64) -> Scalar {
        Scalar::from(v)
    }

    fn encode_scalar(s: &Scalar) -> Vec<u8> {
        s.to_bytes().to_vec()
    }

    fn decode_scalar(bytes: &[u8]) -> Result<Scalar, GroupError> {
        if bytes.len() != Self::SCALAR_LEN {
            return Err(GroupError::ScalarLength {
                profile: Self::NAME,
                expected: Self::SCALAR_LEN,
                got: bytes.len(),
            });
        }
        let repr: [u8; 32] = bytes.try_into().expect("length checked");
        Option::from(Scalar::from_repr(FieldBytes::from(repr))).ok_or(
            GroupError::ScalarOutOfRange {
                profile: Self::NAME,
            },
        )
    }

    fn encode_point(p: &ProjectivePoint) -> Vec<u8> {
        if *p == ProjectivePoint::IDENTITY {
            return vec![0u8; Self::POINT_LEN];
        }
        p.to_affine().to_encoded_point(true).as_bytes().to_vec()
    }

    fn decode_point(bytes: &[u8]) -> Result<ProjectivePoint, GroupError> {
        if bytes.len() != Self::POINT_LEN {
            return Err(GroupError::PointLength {
                profile: Self::NAME,
                expected: Self::POINT_LEN,
                got: bytes.len(),
            });
        }
        if bytes.iter().all(|&b| b == 0) {
            return Ok(ProjectivePoint::IDENTITY);
        }
        let invalid = GroupError::InvalidPoint {
            profile: Self::NAME,
        };
        // only compressed form; SEC1 would also accept 33-byte compact points
        if !matches!(bytes[0], 0x02 | 0x03) {
            return Err(invalid);
        }
        let encoded = EncodedPoint::from_bytes(bytes).map_err(|_| invalid.clone())?;
        let affine: Option<AffinePoint> = AffinePoint::from_encoded_point(&encoded).into();
        affine.map(ProjectivePoint::from).ok_or(invalid)
    }

    fn reduce_digest(digest: &[u8; 32]) -> Scalar {
        <Scalar as Reduce<U256>>::reduce_bytes(&FieldBytes::from(*digest))
    }

    fn hash_to_scalar(tag: Tag, inputs: &[HashInput<'_>]) -> Scalar {
        Self::reduce_digest(&tagged_sha256(tag.name(), &serialize_inputs(inputs)))
    }

    /// Plain `SHA256(s)` over the 32-byte big-endian scalar.
    fn commitment_digest(s: &Scalar) -> Vec<u8> {
        Sha256::digest(s.to_bytes()).to_vec()
    }

    fn sample_nonzero<R: RngCore>(rng: &mut R) -> Scalar {
        loop {
            let s = Scalar::random(&mut *rng);
            if !bool::from(s.is_zero()) {
                return s;
            }
        }
    }
}
