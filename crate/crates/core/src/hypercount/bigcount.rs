use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul};

/// Exact nonnegative integer for lattice point counts.
///
/// Values that fit in a `u128` stay inline; larger ones spill to a
/// [`BigUint`]. The representation is always normalized, so derived
/// equality is value equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BigCount(Repr);

#[derive(Clone, PartialEq, Eq, Hash)]
enum Repr {
    Small(u128),
    Big(BigUint),
}

impl BigCount {
    pub const ZERO: BigCount = BigCount(Repr::Small(0));
    pub const ONE: BigCount = BigCount(Repr::Small(1));

    fn from_big(b: BigUint) -> Self {
        match b.to_u128() {
            Some(v) => BigCount(Repr::Small(v)),
            None => BigCount(Repr::Big(b)),
        }
    }

    pub fn to_biguint(&self) -> BigUint {
        match &self.0 {
            Repr::Small(v) => BigUint::from(*v),
            Repr::Big(b) => b.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small(0))
    }

    pub fn to_u128(&self) -> Option<u128> {
        match self.0 {
            Repr::Small(v) => Some(v),
            Repr::Big(_) => None,
        }
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.to_u128().and_then(|v| u64::try_from(v).ok())
    }

    /// Nearest `f64`; `inf` past the `f64` range.
    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            Repr::Small(v) => *v as f64,
            Repr::Big(b) => b.to_f64().unwrap_or(f64::INFINITY),
        }
    }

    /// Natural logarithm, valid far beyond the `f64` range. `ln(0) = -inf`.
    pub fn ln(&self) -> f64 {
        match &self.0 {
            Repr::Small(0) => f64::NEG_INFINITY,
            Repr::Small(v) => (*v as f64).ln(),
            Repr::Big(b) => {
                let bits = b.bits();
                let shift = bits.saturating_sub(64);
                let top = (b >> shift).to_f64().unwrap_or(f64::MAX);
                top.ln() + shift as f64 * std::f64::consts::LN_2
            }
        }
    }

    pub fn checked_sub(&self, rhs: &BigCount) -> Option<BigCount> {
        match (&self.0, &rhs.0) {
            (Repr::Small(a), Repr::Small(b)) => a.checked_sub(*b).map(BigCount::from),
            _ => {
                let (a, b) = (self.to_biguint(), rhs.to_biguint());
                if a < b {
                    None
                } else {
                    Some(BigCount::from_big(a - b))
                }
            }
        }
    }

    pub fn pow(&self, exp: u32) -> BigCount {
        let mut acc = BigCount::ONE;
        let mut base = self.clone();
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Binomial coefficient `C(n, k)`.
    pub fn binomial(n: u64, k: u64) -> BigCount {
        if k > n {
            return BigCount::ZERO;
        }
        let k = k.min(n - k);
        let mut acc: u128 = 1;
        let mut i = 0u64;
        // acc = C(n, i) after each step; C(n, i+1) = C(n, i) * (n - i) / (i + 1)
        while i < k {
            match acc.checked_mul((n - i) as u128) {
                Some(v) => {
                    acc = v / (i as u128 + 1);
                    i += 1;
                }
                None => break,
            }
        }
        if i == k {
            return BigCount::from(acc);
        }
        let mut big = BigUint::from(acc);
        while i < k {
            big = big * BigUint::from(n - i) / BigUint::from(i + 1);
            i += 1;
        }
        BigCount::from_big(big)
    }

    /// `n!`
    pub fn factorial(n: u64) -> BigCount {
        let mut acc = BigCount::ONE;
        for i in 2..=n {
            acc = &acc * &BigCount::from(i);
        }
        acc
    }
}

impl Default for BigCount {
    fn default() -> Self {
        BigCount::ZERO
    }
}

impl From<u64> for BigCount {
    fn from(v: u64) -> Self {
        BigCount(Repr::Small(v as u128))
    }
}

impl From<u128> for BigCount {
    fn from(v: u128) -> Self {
        BigCount(Repr::Small(v))
    }
}

impl From<usize> for BigCount {
    fn from(v: usize) -> Self {
        BigCount(Repr::Small(v as u128))
    }
}

impl From<BigUint> for BigCount {
    fn from(b: BigUint) -> Self {
        BigCount::from_big(b)
    }
}

impl Zero for BigCount {
    fn zero() -> Self {
        BigCount::ZERO
    }
    fn is_zero(&self) -> bool {
        BigCount::is_zero(self)
    }
}

impl One for BigCount {
    fn one() -> Self {
        BigCount::ONE
    }
}

impl Add<&BigCount> for &BigCount {
    type Output = BigCount;
    fn add(self, rhs: &BigCount) -> BigCount {
        match (&self.0, &rhs.0) {
            (Repr::Small(a), Repr::Small(b)) => match a.checked_add(*b) {
                Some(v) => BigCount(Repr::Small(v)),
                None => BigCount::from_big(BigUint::from(*a) + BigUint::from(*b)),
            },
            _ => BigCount::from_big(self.to_biguint() + rhs.to_biguint()),
        }
    }
}

impl Add for BigCount {
    type Output = BigCount;
    fn add(self, rhs: BigCount) -> BigCount {
        &self + &rhs
    }
}

impl AddAssign<&BigCount> for BigCount {
    fn add_assign(&mut self, rhs: &BigCount) {
        match (&mut self.0, &rhs.0) {
            (Repr::Small(a), Repr::Small(b)) => {
                if let Some(v) = a.checked_add(*b) {
                    *a = v;
                    return;
                }
            }
            (Repr::Big(a), Repr::Small(b)) => {
                *a += BigUint::from(*b);
                return;
            }
            _ => {}
        }
        *self = &*self + rhs;
    }
}

impl AddAssign for BigCount {
    fn add_assign(&mut self, rhs: BigCount) {
        *self += &rhs;
    }
}

impl Mul<&BigCount> for &BigCount {
    type Output = BigCount;
    fn mul(self, rhs: &BigCount) -> BigCount {
        match (&self.0, &rhs.0) {
            (Repr::Small(a), Repr::Small(b)) => match a.checked_mul(*b) {
                Some(v) => BigCount(Repr::Small(v)),
                None => BigCount::from_big(BigUint::from(*a) * BigUint::from(*b)),
            },
            _ => BigCount::from_big(self.to_biguint() * rhs.to_biguint()),
        }
    }
}

impl Mul for BigCount {
    type Output = BigCount;
    fn mul(self, rhs: BigCount) -> BigCount {
        &self * &rhs
    }
}

impl Mul<u64> for &BigCount {
    type Output = BigCount;
    fn mul(self, rhs: u64) -> BigCount {
        self * &BigCount::from(rhs)
    }
}

impl PartialOrd for BigCount {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BigCount {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small(a), Repr::Small(b)) => a.cmp(b),
            (Repr::Small(_), Repr::Big(_)) => Ordering::Less,
            (Repr::Big(_), Repr::Small(_)) => Ordering::Greater,
            (Repr::Big(a), Repr::Big(b)) => a.cmp(b),
        }
    }
}

impl PartialEq<u64> for BigCount {
    fn eq(&self, other: &u64) -> bool {
        matches!(self.0, Repr::Small(v) if v == *other as u128)
    }
}

impl PartialOrd<u64> for BigCount {
    fn partial_cmp(&self, other: &u64) -> Option<Ordering> {
        Some(match self.0 {
            Repr::Small(v) => v.cmp(&(*other as u128)),
            Repr::Big(_) => Ordering::Greater,
        })
    }
}

impl fmt::Display for BigCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small(v) => write!(f, "{v}"),
            Repr::Big(b) => write!(f, "{b}"),
        }
    }
}

impl fmt::Debug for BigCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl std::str::FromStr for BigCount {
    type Err = num_bigint::ParseBigIntError;
    /// Parses a decimal string.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.trim().parse::<BigUint>().map(BigCount::from_big)
    }
}

// Decimal string: counts routinely exceed the 2^53 range of JSON numbers.
impl Serialize for BigCount {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl std::iter::Sum for BigCount {
    fn sum<I: Iterator<Item = BigCount>>(iter: I) -> BigCount {
        iter.fold(BigCount::ZERO, |mut a, b| {
            a += &b;
            a
        })
    }
}
