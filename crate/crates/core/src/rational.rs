//! Exact rationals used for heights, areas and lengths.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn is_int(x: &Q) -> bool {
    x.denom().is_one()
}

/// Integer value of `x` if it is integral and fits.
pub fn as_i64(x: &Q) -> Option<i64> {
    if is_int(x) {
        x.numer().to_i64()
    } else {
        None
    }
}

/// Parses `-?[0-9]+(/[1-9][0-9]*)?` into a reduced rational.
pub fn parse_q(s: &str) -> Result<Q, String> {
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a, Some(b)),
        None => (s, None),
    };
    let digits = num.strip_prefix('-').unwrap_or(num);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(format!("malformed rational {s:?}"));
    }
    let n: BigInt = num.parse().map_err(|_| format!("malformed rational {s:?}"))?;
    let d: BigInt = match den {
        None => BigInt::one(),
        Some(b) => {
            if b.is_empty() || b.starts_with('0') || !b.bytes().all(|c| c.is_ascii_digit()) {
                return Err(format!("malformed rational {s:?}"));
            }
            b.parse().map_err(|_| format!("malformed rational {s:?}"))?
        }
    };
    Ok(Q::new(n, d))
}

pub fn fmt_q(x: &Q) -> String {
    if is_int(x) {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn gcd(a: i64, b: i64) -> i64 {
    a.gcd(&b)
}

/// Extended gcd: returns (g, x, y) with a*x + b*y = g >= 0.
pub fn egcd(a: i64, b: i64) -> (i64, i64, i64) {
    let e = a.extended_gcd(&b);
    if e.gcd < 0 {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}

pub fn positive(x: &Q) -> bool {
    x.is_positive()
}

pub fn zero() -> Q {
    Q::zero()
}
