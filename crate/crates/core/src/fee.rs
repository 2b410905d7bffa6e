//! Facilitator fee: `fee = floor(alpha * A)`, `net = A - fee`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FeeError {
    #[error("fee fraction {0} is outside the open interval (0, 1)")]
    OutOfRange(String),
    #[error("cannot parse fee fraction `{0}`")]
    Malformed(String),
}

/// Fee fraction `num / den`, strictly between 0 and 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeeRate {
    num: u64,
    den: u64,
}

const MAX_DECIMALS: u32 = 18;

impl FeeRate {
    pub fn new(num: u64, den: u64) -> Result<Self, FeeError> {
        if den == 0 || num == 0 || num >= den {
            return Err(FeeError::OutOfRange(format!("{num}/{den}")));
        }
        let g = gcd(num, den);
        Ok(FeeRate {
            num: num / g,
            den: den / g,
        })
    }

    pub fn numerator(&self) -> u64 {
        self.num
    }

    pub fn denominator(&self) -> u64 {
        self.den
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Accepts `"0.01"` or `"1/100"`.
impl FromStr for FeeRate {
    type Err = FeeError;

    fn from_str(s: &str) -> Result<Self, FeeError> {
        let s = s.trim();
        let malformed = || FeeError::Malformed(s.to_string());
        if let Some((n, d)) = s.split_once('/') {
            let n = n.trim().parse().map_err(|_| malformed())?;
            let d = d.trim().parse().map_err(|_| malformed())?;
            return FeeRate::new(n, d).map_err(|_| FeeError::OutOfRange(s.to_string()));
        }
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if int.is_empty() && frac.is_empty()
            || !int.bytes().all(|b| b.is_ascii_digit())
            || !frac.bytes().all(|b| b.is_ascii_digit())
            || frac.len() > MAX_DECIMALS as usize
        {
            return Err(malformed());
        }
        let den = 10u64.pow(frac.len() as u32);
        let int: u64 = if int.is_empty() {
            0
        } else {
            int.parse().map_err(|_| malformed())?
        };
        let frac: u64 = if frac.is_empty() {
            0
        } else {
            frac.parse().map_err(|_| malformed())?
        };
        let num = int
            .checked_mul(den)
            .and_then(|v| v.checked_add(frac))
            .ok_or_else(|| FeeError::OutOfRange(s.to_string()))?;
        FeeRate::new(num, den).map_err(|_| FeeError::OutOfRange(s.to_string()))
    }
}

impl fmt::Display for FeeRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Returns `(fee, net)` with the fee rounded down.
pub fn compute_fee(amount: u128, rate: FeeRate) -> (u128, u128) {
    let (num, den) = (rate.num as u128, rate.den as u128);
    let fee = (amount / den) * num + (amount % den) * num / den;
    (fee, amount - fee)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_examples() {
        let one_pct: FeeRate = "0.01".parse().unwrap();
        assert_eq!(compute_fee(1000, one_pct), (10, 990));
        assert_eq!(compute_fee(0, one_pct), (0, 0));
        assert_eq!(compute_fee(999, one_pct), (9, 990));
    }

    #[test]
    fn parses_decimal_and_ratio_forms() {
        assert_eq!(
            "0.01".parse::<FeeRate>().unwrap(),
            FeeRate::new(1, 100).unwrap()
        );
        assert_eq!(
            ".25".parse::<FeeRate>().unwrap(),
            FeeRate::new(1, 4).unwrap()
        );
        assert_eq!(
            "3/9".parse::<FeeRate>().unwrap(),
            FeeRate::new(1, 3).unwrap()
        );
    }

    #[test]
    fn rejects_out_of_range_and_garbage() {
        for bad in ["1.2", "0", "1", "0.0", "2/2", "5/0"] {
            assert!(
                matches!(bad.parse::<FeeRate>(), Err(FeeError::OutOfRange(_))),
                "{bad}"
            );
        }
        for bad in ["", "abc", "0.1.2", "-0.5", "0.1e3"] {
            assert!(
                matches!(bad.parse::<FeeRate>(), Err(FeeError::Malformed(_))),
                "{bad}"
            );
        }
    }

    #[test]
    fn fee_never_overflows_near_u128_max() {
        let rate = FeeRate::new(999_999, 1_000_000).unwrap();
        let (fee, net) = compute_fee(u128::MAX, rate);
        assert_eq!(fee + net, u128::MAX);
    }
}
