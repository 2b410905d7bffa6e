//! Reference arithmetic for the toy group, written without the library,
//! plus the acceptance checks in `tests/`.
//!
//! Points and scalars are residues mod 23 with generator 1, so `k*G = k`.
//! The hash adds a per-purpose constant to each field read as a big-endian
//! integer, all mod 23.

use ptlc_swap::group::{Group, Toy23};

pub const Q: u64 = 23;

pub const CHALLENGE: u64 = 1;
pub const TAP_TWEAK: u64 = 2;
pub const COMMITMENT: u64 = 4;

pub fn be_mod(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0, |acc, &b| (acc * 256 + b as u64) % Q)
}

pub fn challenge(r: u64, p: u64, m: &[u8]) -> u64 {
    (CHALLENGE + r + p + be_mod(m)) % Q
}

/// `(R, s)` for secret `x` and nonce `k`.
pub fn sign(x: u64, k: u64, m: &[u8]) -> (u64, u64) {
    let r = k % Q;
    (r, (k + challenge(r, x, m) * x) % Q)
}

/// `s*G == R + e*P`.
pub fn verify(r: u64, s: u64, p: u64, m: &[u8]) -> bool {
    s % Q == (r + challenge(r, p, m) * p) % Q
}

pub fn commit(secret: u64) -> u64 {
    (COMMITMENT + secret) % Q
}

/// `(R, s*, Delta, C)`.
pub fn presign(x: u64, k: u64, m: &[u8], secret: u64) -> (u64, u64, u64, u64) {
    let (r, s) = sign(x, k, m);
    (r, (s + Q - secret % Q) % Q, secret % Q, commit(secret))
}

pub fn verify_presignature(r: u64, s_star: u64, delta: u64, p: u64, m: &[u8]) -> bool {
    (s_star + delta) % Q == (r + challenge(r, p, m) * p) % Q
}

pub fn tweak(p: u64, metadata_digest: u64) -> u64 {
    (TAP_TWEAK + p + metadata_digest) % Q
}

pub fn sub(a: u64, b: u64) -> u64 {
    (a % Q + Q - b % Q) % Q
}

// Library conversions.

pub fn ts(v: u64) -> <Toy23 as Group>::Scalar {
    Toy23::scalar_from_u64(v)
}

pub fn tp(v: u64) -> <Toy23 as Group>::Point {
    Toy23::decode_point(&[v as u8]).unwrap()
}

pub fn sv(s: &<Toy23 as Group>::Scalar) -> u64 {
    Toy23::encode_scalar(s)[0] as u64
}

pub fn pv(p: &<Toy23 as Group>::Point) -> u64 {
    Toy23::encode_point(p)[0] as u64
}
