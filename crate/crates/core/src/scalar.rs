//! Scalar field abstraction over IEEE doubles and exact rationals.
//!
//! Every numeric routine in the crate is generic over [`Scalar`]. The exact
//! implementation ([`Rational`]) makes degeneracy decisions exact; the `f64`
//! implementation uses relative tolerances.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};

/// Exact rational scalar.
pub type Rational = BigRational;

/// Relative tolerance under which a floating quantity counts as zero.
pub const FLOAT_ZERO_TOL: f64 = 1e-12;

pub trait Scalar:
    Clone + fmt::Debug + fmt::Display + PartialEq + PartialOrd + Send + Sync + 'static + Num + Signed
{
    /// Whether arithmetic in this type is exact.
    const EXACT: bool;

    fn from_i64(v: i64) -> Self;

    fn to_f64_lossy(&self) -> f64;

    /// Parse a scalar from text: integers, decimals, exponent forms and
    /// `p/q` fractions are accepted by both implementations.
    fn parse_text(s: &str) -> Option<Self>;

    /// Convert a JSON number. Rationals use the shortest decimal rendering of
    /// the double, so `0.1` becomes exactly 1/10.
    fn from_json_f64(v: f64) -> Option<Self>;

    fn to_json(&self) -> serde_json::Value;

    /// `true` when the value is zero (exact) or within `FLOAT_ZERO_TOL * scale`
    /// of zero (floating).
    fn is_negligible(&self, scale: f64) -> bool;

    fn is_finite_value(&self) -> bool;
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn to_f64_lossy(&self) -> f64 {
        *self
    }

    fn parse_text(s: &str) -> Option<Self> {
        let s = s.trim();
        if let Some((p, q)) = s.split_once('/') {
            let p: f64 = p.trim().parse().ok()?;
            let q: f64 = q.trim().parse().ok()?;
            if q == 0.0 {
                return None;
            }
            return Some(p / q).filter(|v| v.is_finite());
        }
        s.parse::<f64>().ok().filter(|v| v.is_finite())
    }

    fn from_json_f64(v: f64) -> Option<Self> {
        Some(v).filter(|v| v.is_finite())
    }

    fn to_json(&self) -> serde_json::Value {
        // +0.0 for -0.0 so identical values serialize identically.
        let v = *self + 0.0;
        serde_json::Number::from_f64(v)
            .map(serde_json::Value::Number)
            .unwrap_or(serde_json::Value::Null)
    }

    fn is_negligible(&self, scale: f64) -> bool {
        self.abs() <= FLOAT_ZERO_TOL * scale
    }

    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn parse_text(s: &str) -> Option<Self> {
        parse_rational(s)
    }

    fn from_json_f64(v: f64) -> Option<Self> {
        if !v.is_finite() {
            return None;
        }
        // Display for f64 is the shortest round-trip decimal, never exponent form.
        parse_rational(&format!("{v}"))
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::String(self.to_string())
    }

    fn is_negligible(&self, _scale: f64) -> bool {
        self.is_zero()
    }

    fn is_finite_value(&self) -> bool {
        true
    }
}

/// Parses `p/q`, integers, decimals and decimal exponent forms exactly.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((p, q)) = s.split_once('/') {
        let p = parse_rational(p)?;
        let q = parse_rational(q)?;
        if q.is_zero() {
            return None;
        }
        return Some(p / q);
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first()? {
        b'-' => (true, &mantissa[1..]),
        b'+' => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut numer = BigInt::from_str_radix(&all_digits, 10).ok()?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u8);
    let value = if scale >= 0 {
        Rational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Some(value)
}

/// Convert between scalar types through text. Used to lift integer or
/// decimal test data into either arithmetic.
pub fn convert<S: Scalar, T: Scalar>(v: &S) -> T {
    if S::EXACT {
        T::parse_text(&v.to_string()).expect("rational renders as parseable text")
    } else {
        T::from_json_f64(v.to_f64_lossy()).expect("finite value")
    }
}

pub fn from_ratio<T: Scalar>(p: i64, q: i64) -> T {
    T::from_i64(p) / T::from_i64(q)
}

/// Largest absolute value in a slice, as `f64`.
pub fn max_abs<T: Scalar>(values: &[T]) -> f64 {
    values.iter().map(|v| v.to_f64_lossy().abs()).fold(0.0, f64::max)
}

pub(crate) fn from_usize<T: Scalar>(v: usize) -> T {
    T::from_i64(i64::from_usize(v).expect("small integer"))
}
