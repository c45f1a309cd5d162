//! Exact rational arithmetic and sign decisions for quadratic surds.
//!
//! Lattice membership in a tilted cylinder compares rational quantities against
//! lengths such as `h·|v|`, where `|v|` is the square root of an integer. Every
//! such comparison is reduced here to the sign of `a + b·√p + c·√q` with
//! rational `a, b, c, p, q`, which is decided without any floating point.

use core::cmp::Ordering;
use core::fmt;

use num_rational::Ratio;
use num_traits::{Signed, Zero};

/// Exact rational number used throughout the geometry.
pub type Rational = Ratio<i128>;

/// Error returned when a rational literal cannot be parsed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseRationalError {
    literal: alloc::string::String,
}

impl fmt::Display for ParseRationalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid rational literal `{}`", self.literal)
    }
}

impl core::error::Error for ParseRationalError {}

/// Parses `"p/q"`, a plain integer, or a finite decimal such as `"0.25"`.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError {
        literal: text.into(),
    };
    let s = text.trim();
    if s.is_empty() {
        return Err(err());
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: i128 = num.trim().parse().map_err(|_| err())?;
        let den: i128 = den.trim().parse().map_err(|_| err())?;
        if den == 0 {
            return Err(err());
        }
        return Ok(Rational::new(num, den));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        if frac_part.is_empty() || frac_part.len() > 18 || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let negative = int_part.trim_start().starts_with('-');
        let int_digits = int_part.trim_start_matches(['-', '+']);
        let whole: i128 = if int_digits.is_empty() {
            0
        } else {
            int_digits.parse().map_err(|_| err())?
        };
        let frac: i128 = frac_part.parse().map_err(|_| err())?;
        let scale = 10i128.pow(frac_part.len() as u32);
        let magnitude = Rational::new(whole * scale + frac, scale);
        return Ok(if negative { -magnitude } else { magnitude });
    }
    let whole: i128 = s.parse().map_err(|_| err())?;
    Ok(Rational::from_integer(whole))
}

/// Writes a rational as `p` or `p/q`.
pub fn format_rational(value: &Rational) -> alloc::string::String {
    if *value.denom() == 1 {
        alloc::format!("{}", value.numer())
    } else {
        alloc::format!("{}/{}", value.numer(), value.denom())
    }
}

pub fn to_f64(value: &Rational) -> f64 {
    *value.numer() as f64 / *value.denom() as f64
}

pub fn from_int(value: i64) -> Rational {
    Rational::from_integer(value as i128)
}

fn sign(value: &Rational) -> Ordering {
    if value.is_zero() {
        Ordering::Equal
    } else if value.is_positive() {
        Ordering::Greater
    } else {
        Ordering::Less
    }
}

/// Sign of `a + b·√p` for `p ≥ 0`.
pub fn sign_with_root(a: &Rational, b: &Rational, p: &Rational) -> Ordering {
    debug_assert!(!p.is_negative());
    if b.is_zero() || p.is_zero() {
        return sign(a);
    }
    let sa = sign(a);
    let sb = sign(b);
    if sa == Ordering::Equal || sa == sb {
        return sb;
    }
    // opposite signs: compare magnitudes squared
    match (a * a).cmp(&(b * b * p)) {
        Ordering::Greater => sa,
        Ordering::Less => sb,
        Ordering::Equal => Ordering::Equal,
    }
}

/// Sign of `a + b·√p + c·√q` for `p, q ≥ 0`.
pub fn sign_with_two_roots(
    a: &Rational,
    b: &Rational,
    p: &Rational,
    c: &Rational,
    q: &Rational,
) -> Ordering {
    debug_assert!(!q.is_negative());
    let first = sign_with_root(a, b, p);
    let second = if q.is_zero() { Ordering::Equal } else { sign(c) };
    if second == Ordering::Equal {
        return first;
    }
    if first == Ordering::Equal || first == second {
        return second;
    }
    // (a + b√p)² − c²q = (a² + b²p − c²q) + 2ab√p
    let rational = a * a + b * b * p - c * c * q;
    let radical = Rational::from_integer(2) * a * b;
    match sign_with_root(&rational, &radical, p) {
        Ordering::Greater => first,
        Ordering::Less => second,
        Ordering::Equal => Ordering::Equal,
    }
}

/// A number `rational + coefficient·√radicand`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadraticSurd {
    pub rational: Rational,
    pub coefficient: Rational,
    pub radicand: Rational,
}

impl QuadraticSurd {
    pub fn rational(value: Rational) -> Self {
        Self {
            rational: value,
            coefficient: Rational::zero(),
            radicand: Rational::zero(),
        }
    }

    pub fn new(rational: Rational, coefficient: Rational, radicand: Rational) -> Self {
        Self {
            rational,
            coefficient,
            radicand,
        }
    }

    /// Exact comparison, also across different radicands.
    pub fn compare(&self, other: &Self) -> Ordering {
        sign_with_two_roots(
            &(self.rational - other.rational),
            &self.coefficient,
            &self.radicand,
            &(-other.coefficient),
            &other.radicand,
        )
    }

    pub fn approx(&self) -> f64 {
        to_f64(&self.rational) + to_f64(&self.coefficient) * libm::sqrt(to_f64(&self.radicand))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i128, d: i128) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn parses_fraction_decimal_and_integer() {
        assert_eq!(parse_rational("3/4").unwrap(), r(3, 4));
        assert_eq!(parse_rational("-6/4").unwrap(), r(-3, 2));
        assert_eq!(parse_rational("0.7").unwrap(), r(7, 10));
        assert_eq!(parse_rational("-0.25").unwrap(), r(-1, 4));
        assert_eq!(parse_rational(" 12 ").unwrap(), r(12, 1));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1.").is_err());
    }

    #[test]
    fn root_signs() {
        // 1 - √2 < 0, 3 - √2·2 = 3 - 2.83 > 0, 2 - √4 = 0
        assert_eq!(sign_with_root(&r(1, 1), &r(-1, 1), &r(2, 1)), Ordering::Less);
        assert_eq!(sign_with_root(&r(3, 1), &r(-2, 1), &r(2, 1)), Ordering::Greater);
        assert_eq!(sign_with_root(&r(2, 1), &r(-1, 1), &r(4, 1)), Ordering::Equal);
        // √2 - √3 < 0 and 1 + √2 - √5 > 0
        assert_eq!(
            sign_with_two_roots(&r(0, 1), &r(1, 1), &r(2, 1), &r(-1, 1), &r(3, 1)),
            Ordering::Less
        );
        assert_eq!(
            sign_with_two_roots(&r(1, 1), &r(1, 1), &r(2, 1), &r(-1, 1), &r(5, 1)),
            Ordering::Greater
        );
        // √8 - 2√2 = 0
        assert_eq!(
            sign_with_two_roots(&r(0, 1), &r(1, 1), &r(8, 1), &r(-2, 1), &r(2, 1)),
            Ordering::Equal
        );
    }

    proptest::proptest! {
        #[test]
        fn two_root_sign_matches_floating_point_away_from_zero(
            a in -50i128..50, b in -50i128..50, c in -50i128..50,
            p in 0i128..30, q in 0i128..30,
        ) {
            let exact = sign_with_two_roots(&r(a, 7), &r(b, 3), &r(p, 1), &r(c, 5), &r(q, 1));
            let approx = a as f64 / 7.0 + b as f64 / 3.0 * (p as f64).sqrt() + c as f64 / 5.0 * (q as f64).sqrt();
            if approx.abs() > 1e-9 {
                proptest::prop_assert_eq!(exact, approx.partial_cmp(&0.0).unwrap());
            }
        }
    }
}
