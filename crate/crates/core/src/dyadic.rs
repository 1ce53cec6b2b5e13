//! Exact nonnegative dyadic rationals, used for Kraft masses and program
//! weights 2^{-l(p)}.

use std::fmt;
use std::iter::Sum;
use std::ops::Add;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::QaeError;

/// Finest representable weight is 2^{-MAX_EXP}.
pub const MAX_EXP: u32 = 120;

/// Nonnegative dyadic rational stored as an integer multiple of 2^{-120}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct Dyadic(u128);

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic(0);
    pub const ONE: Dyadic = Dyadic(1u128 << MAX_EXP);

    /// 2^{-k}; `None` when k exceeds [`MAX_EXP`].
    pub fn pow2_neg(k: u32) -> Option<Dyadic> {
        (k <= MAX_EXP).then(|| Dyadic(1u128 << (MAX_EXP - k)))
    }

    /// num / 2^k
    pub fn new(num: u128, k: u32) -> Option<Dyadic> {
        if k > MAX_EXP {
            // allow it when the fraction still lands on the grid
            let shift = k - MAX_EXP;
            if shift >= 128 || num & ((1u128 << shift) - 1) != 0 {
                return None;
            }
            return Some(Dyadic(num >> shift));
        }
        num.checked_mul(1u128 << (MAX_EXP - k)).map(Dyadic)
    }

    pub fn checked_add(self, other: Dyadic) -> Option<Dyadic> {
        self.0.checked_add(other.0).map(Dyadic)
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn to_f64(self) -> f64 {
        // exact for values whose numerator fits in 53 bits; weights always do
        self.0 as f64 * 2f64.powi(-(MAX_EXP as i32))
    }

    /// (numerator, exponent) in lowest terms: value = num / 2^exp.
    pub fn reduced(self) -> (u128, u32) {
        if self.0 == 0 {
            return (0, 0);
        }
        let tz = self.0.trailing_zeros().min(MAX_EXP);
        (self.0 >> tz, MAX_EXP - tz)
    }

    /// −log₂ of the value; +∞ for zero.
    pub fn neg_log2(self) -> f64 {
        if self.0 == 0 {
            return f64::INFINITY;
        }
        -(self.0 as f64).log2() + MAX_EXP as f64
    }
}

impl Add for Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: Dyadic) -> Dyadic {
        self.checked_add(rhs).expect("dyadic overflow")
    }
}

impl Sum for Dyadic {
    fn sum<I: Iterator<Item = Dyadic>>(iter: I) -> Dyadic {
        iter.fold(Dyadic::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (num, exp) = self.reduced();
        write!(f, "{}/{}", num, 1u128 << exp)
    }
}

impl FromStr for Dyadic {
    type Err = QaeError;

    /// Accepts `p/q` with q a power of two, `2^-k`, or a decimal that is
    /// exactly dyadic (e.g. `0.5`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || QaeError::validation(format!("not an exact dyadic rational: {s:?}"));
        let s = s.trim();
        if let Some(k) = s.strip_prefix("2^-") {
            let k: u32 = k.parse().map_err(|_| bad())?;
            return Dyadic::pow2_neg(k).ok_or_else(bad);
        }
        if let Some((p, q)) = s.split_once('/') {
            let p: u128 = p.trim().parse().map_err(|_| bad())?;
            let q: u128 = q.trim().parse().map_err(|_| bad())?;
            if q == 0 || !q.is_power_of_two() {
                return Err(bad());
            }
            return Dyadic::new(p, q.trailing_zeros()).ok_or_else(bad);
        }
        // exact decimal: int.frac = digits / 10^k = digits / (2^k 5^k)
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if int.is_empty() && frac.is_empty()
            || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())
            || frac.len() > 30
        {
            return Err(bad());
        }
        let digits: u128 = format!("{int}{frac}").parse().map_err(|_| bad())?;
        let k = frac.len() as u32;
        let five_k = 5u128.pow(k);
        if !digits.is_multiple_of(five_k) {
            return Err(bad());
        }
        Dyadic::new(digits / five_k, k).ok_or_else(bad)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn powers_and_sums() {
        let a = Dyadic::pow2_neg(5).unwrap();
        let b = Dyadic::pow2_neg(7).unwrap();
        assert_eq!((a + b).to_string(), "5/128");
        assert_eq!(a.neg_log2(), 5.0);
        assert_eq!(Dyadic::ONE.to_string(), "1/1");
        assert_eq!(Dyadic::ZERO.to_string(), "0/1");
        assert!(Dyadic::pow2_neg(MAX_EXP + 1).is_none());
    }

    #[test]
    fn parse_forms() {
        assert_eq!("2^-16".parse::<Dyadic>().unwrap(), Dyadic::pow2_neg(16).unwrap());
        assert_eq!("0.5".parse::<Dyadic>().unwrap(), Dyadic::pow2_neg(1).unwrap());
        assert_eq!("3/8".parse::<Dyadic>().unwrap().to_f64(), 0.375);
        assert!("1/3".parse::<Dyadic>().is_err());
        assert!("0.1".parse::<Dyadic>().is_err());
        assert!("-0.5".parse::<Dyadic>().is_err());
    }

    proptest! {
        #[test]
        fn display_parse_round_trip(num in 0u128..(1u128 << 70), exp in 0u32..=64) {
            if let Some(d) = Dyadic::new(num, exp) {
                let back: Dyadic = d.to_string().parse().unwrap();
                prop_assert_eq!(back, d);
            }
        }
    }
}
