//! Exact rationals, dyadic upper rounding and decimal formatting.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Bits of the dyadic grid used for certified upper rounding.
pub const SLACK_BITS: u32 = 64;

pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn pow2(e: u32) -> BigInt {
    BigInt::one() << e
}

/// `num / 2^e` as a reduced rational.
pub fn dyadic(num: BigInt, e: u32) -> BigRational {
    BigRational::new(num, pow2(e))
}

/// "p/q" in lowest terms; integers print as "p/1".
pub fn fmt_ratio(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// `x` written over the given denominator when that is exact, else reduced.
pub fn fmt_over(x: &BigRational, den: &BigInt) -> String {
    let scaled = x * BigRational::from_integer(den.clone());
    if scaled.is_integer() {
        format!("{}/{}", scaled.to_integer(), den)
    } else {
        fmt_ratio(x)
    }
}

/// Smallest multiple of `2^-bits` that is `>= x`.
pub fn round_up_dyadic(x: &BigRational, bits: u32) -> BigRational {
    let scaled = x * BigRational::from_integer(pow2(bits));
    dyadic(scaled.ceil().to_integer(), bits)
}

/// Largest multiple of `2^-bits` that is `<= x`.
pub fn round_down_dyadic(x: &BigRational, bits: u32) -> BigRational {
    let scaled = x * BigRational::from_integer(pow2(bits));
    dyadic(scaled.floor().to_integer(), bits)
}

/// An upper bound on `sqrt(x)` on the `2^-bits` grid, `x >= 0`.
pub fn sqrt_upper(x: &BigRational, bits: u32) -> BigRational {
    // ceil(sqrt(ceil(x · 4^bits))) / 2^bits
    let scaled = (x * BigRational::from_integer(pow2(2 * bits)))
        .ceil()
        .to_integer();
    let n = scaled.to_biguint().unwrap_or_else(BigUint::zero);
    let mut s = n.sqrt();
    if &s * &s < n {
        s += 1u32;
    }
    dyadic(BigInt::from(s), bits)
}

/// A lower bound on `sqrt(x)` on the `2^-bits` grid, `x >= 0`.
pub fn sqrt_lower(x: &BigRational, bits: u32) -> BigRational {
    let scaled = (x * BigRational::from_integer(pow2(2 * bits)))
        .floor()
        .to_integer();
    let n = scaled.to_biguint().unwrap_or_else(BigUint::zero);
    dyadic(BigInt::from(n.sqrt()), bits)
}

/// Decimal with `places` digits, rounding half to even.
pub fn fmt_decimal(x: &BigRational, places: u32) -> String {
    let scale = BigInt::from(10u32).pow(places);
    let scaled = x * BigRational::from_integer(scale.clone());
    let floor = scaled.floor().to_integer();
    let frac = &scaled - BigRational::from_integer(floor.clone());
    let half = ratio(1, 2);
    let rounded = if frac > half || (frac == half && floor.is_odd()) {
        floor + 1
    } else {
        floor
    };
    let neg = rounded.is_negative();
    let abs = rounded.abs();
    let (int, rem) = abs.div_rem(&scale);
    let sign = if neg { "-" } else { "" };
    if places == 0 {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{:0>width$}", rem, width = places as usize)
    }
}

pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
