//! Line-oriented test vectors for the signing primitives.
//!
//! Each line is `op key=hex ...` with a `profile=` field. Inputs and
//! expected outputs share one line, so `verify` can replay a line on its own.
//! Blank lines and lines starting with `#` are ignored.
//!
//! | op       | inputs               | outputs             |
//! |----------|----------------------|---------------------|
//! | sign     | x k m                | R s                 |
//! | presign  | x k m sa             | R s_star delta C    |
//! | complete | R s_star sa          | s                   |
//! | extract  | R s s_star           | sa                  |
//! | tweak    | x metadata           | t P_tweak           |

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::adaptor::{complete, extract_secret, presign_with_nonce, AdaptorSecret, PreSignature};
use crate::group::{derive_seed, random_scalar, Group, ProfileName, Secp256k1, Toy23};
use crate::ids::SwapId;
use crate::schnorr::{sign_with_nonce, verify, KeyPair, Signature};
use crate::taproot::{tweak_keypair, SwapMetadata};

/// A line that did not replay, numbered from 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VectorFailure {
    pub line: usize,
    pub reason: String,
}

type Fields<'a> = BTreeMap<&'a str, &'a str>;

/// Number of production-profile cases per operation.
const SECP_CASES: u64 = 4;

/// Toy `(x, k, m, sa)` cases. The first is the hand-checked example.
const TOY_CASES: [(u64, u64, u8, u64); 5] = [
    (5, 7, 3, 4),
    (1, 1, 0, 1),
    (9, 2, 10, 13),
    (22, 22, 22, 22),
    (11, 17, 5, 6),
];

pub fn generate() -> String {
    let mut out = String::from("# op profile=<name> field=hex ...\n");
    for (x, k, m, sa) in TOY_CASES {
        let s = Toy23::scalar_from_u64;
        emit_case::<Toy23>(&mut out, s(x), s(k), &[m], s(sa), toy_metadata(m));
    }
    for i in 0..SECP_CASES {
        let draw = |label: &str| random_scalar::<Secp256k1>(&derive_seed(i, label));
        let m = derive_seed(i, "vector-message");
        let md = secp_metadata(i);
        emit_case::<Secp256k1>(
            &mut out,
            draw("vector-x"),
            draw("vector-k"),
            &m,
            draw("vector-sa"),
            md,
        );
    }
    out
}

fn toy_metadata(m: u8) -> SwapMetadata {
    SwapMetadata {
        amount_sat: 1 + m as u64,
        amount_wei: 2,
        timeout_btc: 3,
        timeout_eth: 4,
        commitment: crate::adaptor::SecretCommitment::from_bytes(vec![m]),
        swap_id: SwapId([m; 32]),
    }
}

fn secp_metadata(i: u64) -> SwapMetadata {
    let id: [u8; 32] = derive_seed(i, "vector-swap-id")
        .try_into()
        .expect("sha256 output");
    SwapMetadata {
        amount_sat: 100_000 + i,
        amount_wei: 2_000_000 + i as u128,
        timeout_btc: 12 + i,
        timeout_eth: 14_400,
        commitment: crate::adaptor::SecretCommitment::from_bytes(derive_seed(
            i,
            "vector-commitment",
        )),
        swap_id: SwapId(id),
    }
}

fn emit_case<G: Group>(
    out: &mut String,
    x: G::Scalar,
    k: G::Scalar,
    m: &[u8],
    sa: G::Scalar,
    md: SwapMetadata,
) {
    let kp = KeyPair::<G>::from_secret(x);
    let secret = AdaptorSecret::<G>::new(sa).expect("vector secrets are nonzero");
    let sig = sign_with_nonce(&kp, m, &k);
    let ps = presign_with_nonce(&kp, m, &secret, &k);
    let done = complete(&ps, &sa);
    let tw = tweak_keypair(&kp, &md);
    let (p, sh, ph) = (G::NAME, G::scalar_hex, G::point_hex);
    let m = hex::encode(m);
    let _ = writeln!(
        out,
        "sign profile={p} x={} k={} m={m} R={} s={}",
        sh(&x),
        sh(&k),
        ph(&sig.nonce_point),
        sh(&sig.scalar)
    );
    let [r, s_star, delta, c] = ps.hex_tuple();
    let _ = writeln!(
        out,
        "presign profile={p} x={} k={} m={m} sa={} R={r} s_star={s_star} delta={delta} C={c}",
        sh(&x),
        sh(&k),
        sh(&sa)
    );
    let _ = writeln!(
        out,
        "complete profile={p} R={r} s_star={s_star} sa={} s={}",
        sh(&sa),
        sh(&done.scalar)
    );
    let _ = writeln!(
        out,
        "extract profile={p} R={r} s={} s_star={s_star} sa={}",
        sh(&done.scalar),
        sh(&sa)
    );
    let _ = writeln!(
        out,
        "tweak profile={p} x={} metadata={} t={} P_tweak={}",
        sh(&x),
        hex::encode(md.canonical_bytes()),
        sh(&tw.tweak),
        ph(&tw.tweaked_public)
    );
}

/// Replays every vector line. An empty result means all lines matched.
pub fn verify_vectors(text: &str) -> Vec<VectorFailure> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .filter_map(|(i, l)| {
            check_line(l).err().map(|reason| VectorFailure {
                line: i + 1,
                reason,
            })
        })
        .collect()
}

fn check_line(line: &str) -> Result<(), String> {
    let mut tokens = line.split_whitespace();
    let op = tokens.next().ok_or("empty line")?;
    let mut fields = Fields::new();
    for t in tokens {
        let (k, v) = t
            .split_once('=')
            .ok_or_else(|| format!("`{t}` is not key=value"))?;
        if fields.insert(k, v).is_some() {
            return Err(format!("duplicate field `{k}`"));
        }
    }
    let profile: ProfileName = field(&fields, "profile")?.parse()?;
    match profile {
        ProfileName::Toy => check_op::<Toy23>(op, &fields),
        ProfileName::Secp256k1 => check_op::<Secp256k1>(op, &fields),
    }
}

fn field<'a>(f: &Fields<'a>, key: &str) -> Result<&'a str, String> {
    f.get(key)
        .copied()
        .ok_or_else(|| format!("missing field `{key}`"))
}

fn scalar<G: Group>(f: &Fields<'_>, key: &str) -> Result<G::Scalar, String> {
    G::scalar_from_hex(field(f, key)?).map_err(|e| format!("{key}: {e}"))
}

fn point<G: Group>(f: &Fields<'_>, key: &str) -> Result<G::Point, String> {
    G::point_from_hex(field(f, key)?).map_err(|e| format!("{key}: {e}"))
}

fn bytes(f: &Fields<'_>, key: &str) -> Result<Vec<u8>, String> {
    hex::decode(field(f, key)?).map_err(|e| format!("{key}: {e}"))
}

fn nonzero<G: Group>(f: &Fields<'_>, key: &str) -> Result<G::Scalar, String> {
    let s = scalar::<G>(f, key)?;
    if G::is_zero(&s) {
        return Err(format!("{key} must be nonzero"));
    }
    Ok(s)
}

fn expect(f: &Fields<'_>, key: &str, actual: String) -> Result<(), String> {
    let want = field(f, key)?;
    if want.eq_ignore_ascii_case(&actual) {
        Ok(())
    } else {
        Err(format!("{key}: expected {want}, computed {actual}"))
    }
}

fn check_op<G: Group>(op: &str, f: &Fields<'_>) -> Result<(), String> {
    let (sh, ph) = (G::scalar_hex, G::point_hex);
    match op {
        "sign" => {
            let kp = KeyPair::<G>::from_secret(nonzero::<G>(f, "x")?);
            let m = bytes(f, "m")?;
            let sig = sign_with_nonce(&kp, &m, &nonzero::<G>(f, "k")?);
            expect(f, "R", ph(&sig.nonce_point))?;
            expect(f, "s", sh(&sig.scalar))?;
            verify(&sig, kp.public(), &m)
                .then_some(())
                .ok_or_else(|| "signature does not verify".into())
        }
        "presign" => {
            let kp = KeyPair::<G>::from_secret(nonzero::<G>(f, "x")?);
            let secret =
                AdaptorSecret::<G>::new(scalar::<G>(f, "sa")?).map_err(|e| e.to_string())?;
            let ps = presign_with_nonce(&kp, &bytes(f, "m")?, &secret, &nonzero::<G>(f, "k")?);
            let [r, s_star, delta, c] = ps.hex_tuple();
            expect(f, "R", r)?;
            expect(f, "s_star", s_star)?;
            expect(f, "delta", delta)?;
            expect(f, "C", c)
        }
        "complete" => {
            let ps = bare_presignature::<G>(f)?;
            let sig = complete(&ps, &scalar::<G>(f, "sa")?);
            expect(f, "s", sh(&sig.scalar))
        }
        "extract" => {
            let ps = bare_presignature::<G>(f)?;
            let sig = Signature {
                nonce_point: ps.nonce_point,
                scalar: scalar::<G>(f, "s")?,
            };
            let secret = extract_secret(&sig, &ps).map_err(|e| e.to_string())?;
            expect(f, "sa", sh(secret.value()))
        }
        "tweak" => {
            let kp = KeyPair::<G>::from_secret(nonzero::<G>(f, "x")?);
            let md = SwapMetadata::from_canonical_bytes(&bytes(f, "metadata")?)
                .map_err(|e| e.to_string())?;
            let tw = tweak_keypair(&kp, &md);
            expect(f, "t", sh(&tw.tweak))?;
            expect(f, "P_tweak", ph(&tw.tweaked_public))
        }
        other => Err(format!("unknown op `{other}`")),
    }
}

/// Pre-signature with only `R` and `s_star` known; the adaptor point and
/// commitment do not enter completion or extraction.
fn bare_presignature<G: Group>(f: &Fields<'_>) -> Result<PreSignature<G>, String> {
    Ok(PreSignature {
        nonce_point: point::<G>(f, "R")?,
        partial: scalar::<G>(f, "s_star")?,
        adaptor_point: crate::adaptor::AdaptorPoint(G::identity()),
        commitment: crate::adaptor::SecretCommitment::from_bytes(Vec::new()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_vectors_verify() {
        let text = generate();
        assert_eq!(verify_vectors(&text), vec![]);
        assert_eq!(
            text.lines().filter(|l| !l.starts_with('#')).count(),
            5 * (TOY_CASES.len() + SECP_CASES as usize)
        );
    }

    #[test]
    fn toy_sign_line_matches_hand_computation() {
        // e = 1 + 7 + 5 + 3 = 16, s = 7 + 16*5 = 87 = 18 (mod 23), hex 12
        let text = generate();
        let line = text
            .lines()
            .find(|l| l.starts_with("sign profile=toy x=05 k=07 m=03"))
            .unwrap();
        assert!(line.ends_with("R=07 s=12"), "{line}");
    }

    #[test]
    fn corrupted_digit_names_its_line() {
        let text = generate().replacen("s=12", "s=13", 1);
        let failures = verify_vectors(&text);
        assert_eq!(failures.len(), 1);
        assert_eq!(failures[0].line, 2);
        assert!(failures[0].reason.contains("expected 13"));
    }

    #[test]
    fn malformed_lines_are_reported() {
        let failures =
            verify_vectors("sign profile=toy x=05\nfrobnicate profile=toy\nsign x=01\n\n# note\n");
        let lines: Vec<usize> = failures.iter().map(|f| f.line).collect();
        assert_eq!(lines, vec![1, 2, 3]);
    }
}
