//! Exact rational probabilities.
//!
//! Every transition probability and every derived mass in the engine is a
//! [`Prob`], a reduced big-integer fraction. Nothing is ever rounded; the
//! only lossy conversion is [`Prob::to_f64`], used for display.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Div, Mul, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::ProbError;

/// An exact rational number, normally in `[0, 1]`.
///
/// Values parsed from text are range-checked. Arithmetic is unchecked so
/// intermediate sums (for instance when validating a malformed node whose
/// transitions add up to more than one) stay representable.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Prob(BigRational);

impl Prob {
    pub fn zero() -> Self {
        Prob(BigRational::zero())
    }

    pub fn one() -> Self {
        Prob(BigRational::one())
    }

    /// `num / den`, reduced. Panics if `den` is zero.
    pub fn new(num: i64, den: i64) -> Self {
        Prob(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_ratio(ratio: BigRational) -> Self {
        Prob(ratio)
    }

    pub fn as_ratio(&self) -> &BigRational {
        &self.0
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    /// True when the value lies in the closed unit interval.
    pub fn in_unit_interval(&self) -> bool {
        !self.0.is_negative() && self.0 <= BigRational::one()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Parses `"num/den"`, an integer, or a decimal literal such as `"0.25"`
    /// or `"2.5e-1"`. Decimals are converted exactly (`0.2` is `1/5`).
    /// The result must lie in `[0, 1]`.
    pub fn parse(text: &str) -> Result<Self, ProbError> {
        let text = text.trim();
        let value = if let Some((num, den)) = text.split_once('/') {
            let num: BigInt = num.trim().parse().map_err(|_| ProbError::Malformed(text.to_string()))?;
            let den: BigInt = den.trim().parse().map_err(|_| ProbError::Malformed(text.to_string()))?;
            if den.is_zero() {
                return Err(ProbError::ZeroDenominator(text.to_string()));
            }
            BigRational::new(num, den)
        } else {
            parse_decimal(text).ok_or_else(|| ProbError::Malformed(text.to_string()))?
        };
        let prob = Prob(value);
        if !prob.in_unit_interval() {
            return Err(ProbError::OutOfRange(text.to_string()));
        }
        Ok(prob)
    }
}

fn parse_decimal(text: &str) -> Option<BigRational> {
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(at) => (&text[..at], text[at + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int_part}{frac_part}").parse().ok()?;
    let scale = exponent - i32::try_from(frac_part.len()).ok()?;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, (-scale) as usize))
    };
    Some(if negative { -value } else { value })
}

impl FromStr for Prob {
    type Err = ProbError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Prob::parse(s)
    }
}

/// Always `num/den`, including `0/1` and `1/1`.
impl fmt::Display for Prob {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl fmt::Debug for Prob {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<Prob> for Prob {
            type Output = Prob;
            fn $method(self, rhs: Prob) -> Prob {
                Prob($trait::$method(self.0, rhs.0))
            }
        }
        impl $trait<&Prob> for Prob {
            type Output = Prob;
            fn $method(self, rhs: &Prob) -> Prob {
                Prob($trait::$method(self.0, &rhs.0))
            }
        }
        impl $trait<&Prob> for &Prob {
            type Output = Prob;
            fn $method(self, rhs: &Prob) -> Prob {
                Prob($trait::$method(&self.0, &rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl Sum for Prob {
    fn sum<I: Iterator<Item = Prob>>(iter: I) -> Prob {
        iter.fold(Prob::zero(), |acc, p| acc + p)
    }
}

impl<'a> Sum<&'a Prob> for Prob {
    fn sum<I: Iterator<Item = &'a Prob>>(iter: I) -> Prob {
        iter.fold(Prob::zero(), |acc, p| acc + p)
    }
}
