//! Exact rational scalars. `Rat` is an arbitrary-precision fraction kept in
//! lowest terms with a positive denominator; every operation in this crate is
//! exact (no floating point anywhere).

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

pub use num_rational::BigRational as Rat;

/// `n/d` as an exact rational. Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Integer as a rational.
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// `r^k` for a signed exponent; `r` must be nonzero when `k < 0`.
pub fn rat_pow(r: &Rat, k: i64) -> Rat {
    if k >= 0 {
        num_traits::pow::pow(r.clone(), k as usize)
    } else {
        num_traits::pow::pow(r.recip(), (-k) as usize)
    }
}

/// Renders without a denominator when integral: `3`, `-3`, `5/2`.
pub fn rat_str(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `a`, `-a`, `a/b`, and decimal literals like `2.5`, exactly.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rat::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.trim_start().starts_with('-');
        let int: BigInt = if int.is_empty() || int == "-" { BigInt::zero() } else { int.parse().ok()? };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let num: BigInt = frac.parse().ok()?;
        let den = num_traits::pow::pow(BigInt::from(10), frac.len());
        let frac_part = Rat::new(num, den);
        let int_part = Rat::from_integer(int.abs());
        let mag = int_part + frac_part;
        return Some(if neg { -mag } else { mag });
    }
    let n: BigInt = s.parse().ok()?;
    Some(Rat::from_integer(n))
}

/// Least common multiple of two positive integers.
pub fn lcm_bigint(a: &BigInt, b: &BigInt) -> BigInt {
    num_integer::Integer::lcm(a, b)
}

/// True when `r` is a nonnegative integer.
pub fn is_nonneg_integer(r: &Rat) -> bool {
    r.is_integer() && !r.is_negative()
}

/// `r` as i64 if it is an integer in range.
pub fn to_i64(r: &Rat) -> Option<i64> {
    if !r.is_integer() {
        return None;
    }
    let n = r.numer();
    i64::try_from(n.clone()).ok()
}

pub fn one() -> Rat {
    Rat::one()
}

pub fn zero() -> Rat {
    Rat::zero()
}
