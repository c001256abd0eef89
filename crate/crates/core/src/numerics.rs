//! Exact decimal numbers with significant-digit tracking.
//!
//! Every quantity that feeds a gold label is an [`ExactDecimal`]:
//! `coefficient × 10^exponent` with an arbitrary-precision coefficient. No
//! binary floating point is involved in parsing, rendering, comparison or
//! sampling, so labels derived from these values are bit-exact.
//!
//! Number grammar (shared with measurement detection in `measure_text`):
//!
//! ```text
//! number     = digits [ "." digits ] [ exponent ] ;
//! exponent   = "E" ( "+" | "-" ) digits ;
//! digits     = digit { digit } ;
//! digit      = "0" | "1" | ... | "9" ;
//! ```

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use once_cell::sync::Lazy;
use rand::Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Regular expression for a number literal, unanchored.
pub const NUMBER_PATTERN: &str = r"[0-9]+(?:\.[0-9]+)?(?:E[+-][0-9]+)?";

static NUMBER_FULL: Lazy<Regex> =
    Lazy::new(|| Regex::new(&format!("^{NUMBER_PATTERN}$")).expect("number pattern"));

/// Maximum number of fractional digits produced by [`sample_number`].
pub const MAX_FRACTION_DIGITS: u32 = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumberError {
    #[error("malformed number literal {0:?}")]
    MalformedNumber(String),
    #[error("exponent {0} does not fit the two-digit scientific format")]
    ExponentOverflow(i64),
    #[error("significant digits {sig} fewer than coefficient digits {digits}")]
    SignificantDigits { sig: u32, digits: u32 },
    #[error("invalid number range [1e{low}, 1e{high})")]
    InvalidRange { low: i32, high: i32 },
}

/// Surface notation of a number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Notation {
    Decimal,
    Scientific,
}

impl Notation {
    pub const ALL: [Notation; 2] = [Notation::Decimal, Notation::Scientific];

    pub fn as_str(self) -> &'static str {
        match self {
            Notation::Decimal => "decimal",
            Notation::Scientific => "scientific",
        }
    }

    /// Notation of a literal that matches the number grammar.
    pub fn of_literal(text: &str) -> Notation {
        if text.contains('E') {
            Notation::Scientific
        } else {
            Notation::Decimal
        }
    }
}

impl fmt::Display for Notation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Notation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "decimal" | "deci" => Ok(Notation::Decimal),
            "scientific" | "sci" => Ok(Notation::Scientific),
            other => Err(format!("unknown notation {other:?}")),
        }
    }
}

/// A non-negative decimal `coefficient × 10^exponent` that remembers how many
/// significant digits its source rendering carried.
///
/// Derived equality is structural. Use [`ExactDecimal::value_eq`] and
/// [`ExactDecimal::cmp_value`] for numeric comparison.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExactDecimal {
    coefficient: BigUint,
    exponent: i64,
    sig_digits: u32,
}

fn digit_count(n: &BigUint) -> u32 {
    if n.is_zero() {
        0
    } else {
        n.to_str_radix(10).len() as u32
    }
}

fn pow10(k: u32) -> BigUint {
    BigUint::from(10u32).pow(k)
}

impl ExactDecimal {
    /// Builds a decimal, checking that `sig_digits` covers every coefficient digit.
    pub fn new(coefficient: BigUint, exponent: i64, sig_digits: u32) -> Result<Self, NumberError> {
        let digits = digit_count(&coefficient);
        if sig_digits == 0 || sig_digits < digits {
            return Err(NumberError::SignificantDigits { sig: sig_digits, digits });
        }
        Ok(Self { coefficient, exponent, sig_digits })
    }

    /// A decimal whose significant digits are exactly the coefficient's digits.
    pub fn from_parts(coefficient: u64, exponent: i64) -> Self {
        let coefficient = BigUint::from(coefficient);
        let sig_digits = digit_count(&coefficient).max(1);
        Self { coefficient, exponent, sig_digits }
    }

    pub fn zero() -> Self {
        Self { coefficient: BigUint::zero(), exponent: 0, sig_digits: 1 }
    }

    /// Exactly `10^exponent`, one significant digit.
    pub fn power_of_ten(exponent: i64) -> Self {
        Self { coefficient: BigUint::one(), exponent, sig_digits: 1 }
    }

    pub fn coefficient(&self) -> &BigUint {
        &self.coefficient
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn sig_digits(&self) -> u32 {
        self.sig_digits
    }

    pub fn is_zero(&self) -> bool {
        self.coefficient.is_zero()
    }

    /// Trailing zeros stripped from the coefficient; zero maps to `0 × 10^0`.
    /// The significant-digit count is carried over unchanged.
    pub fn normalized(&self) -> Self {
        if self.coefficient.is_zero() {
            return Self { coefficient: BigUint::zero(), exponent: 0, sig_digits: self.sig_digits };
        }
        let ten = BigUint::from(10u32);
        let mut c = self.coefficient.clone();
        let mut e = self.exponent;
        while (&c % &ten).is_zero() {
            c /= &ten;
            e += 1;
        }
        Self { coefficient: c, exponent: e, sig_digits: self.sig_digits }
    }

    /// Power of ten of the leading digit, `floor(log10(self))`. `None` for zero.
    pub fn magnitude(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.exponent + digit_count(&self.coefficient) as i64 - 1)
        }
    }

    /// Exact numeric ordering, ignoring significant digits.
    pub fn cmp_value(&self, other: &Self) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        let common = self.exponent.min(other.exponent);
        let a = &self.coefficient * pow10((self.exponent - common) as u32);
        let b = &other.coefficient * pow10((other.exponent - common) as u32);
        a.cmp(&b)
    }

    pub fn value_eq(&self, other: &Self) -> bool {
        self.cmp_value(other) == Ordering::Equal
    }

    /// Multiplies by `10^shift`; coefficient and significant digits unchanged.
    pub fn scale_by_power_of_ten(&self, shift: i64) -> Self {
        Self {
            coefficient: self.coefficient.clone(),
            exponent: self.exponent + shift,
            sig_digits: self.sig_digits,
        }
    }

    fn aligned(&self, other: &Self) -> (BigUint, BigUint, i64) {
        let common = self.exponent.min(other.exponent);
        (
            &self.coefficient * pow10((self.exponent - common) as u32),
            &other.coefficient * pow10((other.exponent - common) as u32),
            common,
        )
    }

    fn from_coefficient(coefficient: BigUint, exponent: i64) -> Self {
        let sig_digits = digit_count(&coefficient).max(1);
        Self { coefficient, exponent, sig_digits }
    }

    /// Exact sum; significant digits are those of the resulting coefficient.
    pub fn add(&self, other: &Self) -> Self {
        let (a, b, e) = self.aligned(other);
        Self::from_coefficient(a + b, e)
    }

    /// Exact difference, `None` if it would be negative.
    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        let (a, b, e) = self.aligned(other);
        (a >= b).then(|| Self::from_coefficient(a - b, e))
    }

    /// `floor(self × 10^places)`.
    pub fn scaled_floor(&self, places: i64) -> BigUint {
        let e = self.exponent + places;
        if e >= 0 {
            &self.coefficient * pow10(e as u32)
        } else {
            &self.coefficient / pow10((-e) as u32)
        }
    }

    /// `ceil(self × 10^places)`.
    pub fn scaled_ceil(&self, places: i64) -> BigUint {
        let e = self.exponent + places;
        if e >= 0 {
            &self.coefficient * pow10(e as u32)
        } else {
            let div = pow10((-e) as u32);
            let q = &self.coefficient / &div;
            if (&self.coefficient % &div).is_zero() {
                q
            } else {
                q + 1u32
            }
        }
    }

    /// `true` iff `10^low <= self < 10^high`.
    pub fn in_range(&self, range: NumberRange) -> bool {
        match self.magnitude() {
            None => false,
            Some(m) => m >= range.low_exponent as i64 && m < range.high_exponent as i64,
        }
    }

    /// Number of digits after the decimal point in the decimal rendering.
    pub fn fraction_digits(&self) -> u32 {
        if self.is_zero() {
            return (-self.exponent).max(0) as u32;
        }
        let lsd = self.magnitude().unwrap() - self.sig_digits as i64 + 1;
        (-lsd).max(0) as u32
    }

    /// Lossy conversion for model features and reporting, never for labels.
    pub fn to_f64(&self) -> f64 {
        let c = self.coefficient.to_f64().unwrap_or(f64::INFINITY);
        c * 10f64.powi(self.exponent as i32)
    }

    /// Significand digits in scientific order: the coefficient's digits padded
    /// with zeros up to `sig_digits`.
    fn significand_digits(&self) -> String {
        if self.is_zero() {
            return "0".repeat(self.sig_digits as usize);
        }
        let mut s = self.coefficient.to_str_radix(10);
        while (s.len() as u32) < self.sig_digits {
            s.push('0');
        }
        s
    }

    fn render_decimal(&self) -> String {
        if self.is_zero() {
            let frac = (-self.exponent).max(0) as usize;
            return if frac == 0 { "0".to_string() } else { format!("0.{}", "0".repeat(frac)) };
        }
        let digits = self.significand_digits();
        // position of the leading digit and the last significant digit
        let lead = self.magnitude().unwrap();
        let last = lead - digits.len() as i64 + 1;
        let mut out = String::new();
        if lead < 0 {
            out.push_str("0.");
            out.push_str(&"0".repeat((-lead - 1) as usize));
            out.push_str(&digits);
        } else {
            let int_len = (lead + 1) as usize;
            if digits.len() <= int_len {
                out.push_str(&digits);
                out.push_str(&"0".repeat(int_len - digits.len()));
            } else {
                out.push_str(&digits[..int_len]);
                out.push('.');
                out.push_str(&digits[int_len..]);
            }
        }
        debug_assert!(last <= 0 || !out.contains('.'));
        out
    }

    fn render_scientific(&self) -> Result<String, NumberError> {
        let digits = self.significand_digits();
        let exp = self.magnitude().unwrap_or(0);
        if exp.abs() > 99 {
            return Err(NumberError::ExponentOverflow(exp));
        }
        let mut out = String::with_capacity(digits.len() + 5);
        out.push_str(&digits[..1]);
        if digits.len() > 1 {
            out.push('.');
            out.push_str(&digits[1..]);
        }
        out.push('E');
        out.push(if exp < 0 { '-' } else { '+' });
        out.push_str(&format!("{:02}", exp.abs()));
        Ok(out)
    }
}

impl fmt::Display for ExactDecimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_decimal())
    }
}

impl FromStr for ExactDecimal {
    type Err = NumberError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_number(s)
    }
}

/// Parses a literal in decimal (`12.34`) or scientific (`1.234E+01`) form.
///
/// All written mantissa digits after leading zeros count as significant;
/// the exponent part never does.
pub fn parse_number(text: &str) -> Result<ExactDecimal, NumberError> {
    if !NUMBER_FULL.is_match(text) {
        return Err(NumberError::MalformedNumber(text.to_string()));
    }
    let (mantissa, exp_part) = match text.split_once('E') {
        Some((m, e)) => {
            let sign = if e.starts_with('-') { -1 } else { 1 };
            let value: i64 = e[1..]
                .parse()
                .map_err(|_| NumberError::MalformedNumber(text.to_string()))?;
            (m, sign * value)
        }
        None => (text, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let all_digits = format!("{int_part}{frac_part}");
    let exponent = exp_part - frac_part.len() as i64;
    let stripped = all_digits.trim_start_matches('0');
    if stripped.is_empty() {
        return Ok(ExactDecimal { coefficient: BigUint::zero(), exponent, sig_digits: 1 });
    }
    let coefficient = BigUint::parse_bytes(stripped.as_bytes(), 10)
        .ok_or_else(|| NumberError::MalformedNumber(text.to_string()))?;
    Ok(ExactDecimal { coefficient, exponent, sig_digits: stripped.len() as u32 })
}

/// Renders `n` in the requested notation.
///
/// Decimal output carries exactly `sig_digits` significant digits whenever the
/// last one falls at or after the units place. Scientific output is a single
/// leading digit, optional fraction, `E`, sign and an exponent of at least two
/// digits.
pub fn render(n: &ExactDecimal, notation: Notation) -> Result<String, NumberError> {
    match notation {
        Notation::Decimal => Ok(n.render_decimal()),
        Notation::Scientific => n.render_scientific(),
    }
}

/// `render(parse_number(text), target)`.
pub fn convert_notation(text: &str, target: Notation) -> Result<String, NumberError> {
    render(&parse_number(text)?, target)
}

/// Half-open decade interval `[10^low_exponent, 10^high_exponent)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NumberRange {
    pub low_exponent: i32,
    pub high_exponent: i32,
}

impl NumberRange {
    /// `[10^-2, 10^2)`, used for training and interpolation evaluation.
    pub const INTERPOLATION: NumberRange = NumberRange { low_exponent: -2, high_exponent: 2 };
    /// `[10^-3, 10^3)`, used for extrapolation evaluation.
    pub const EXTRAPOLATION: NumberRange = NumberRange { low_exponent: -3, high_exponent: 3 };

    pub fn new(low_exponent: i32, high_exponent: i32) -> Result<Self, NumberError> {
        if low_exponent >= high_exponent {
            return Err(NumberError::InvalidRange { low: low_exponent, high: high_exponent });
        }
        Ok(Self { low_exponent, high_exponent })
    }

    pub fn decades(&self) -> std::ops::Range<i32> {
        self.low_exponent..self.high_exponent
    }
}

const MANTISSA_DIGITS: u32 = 15;

/// Draws a number from `range`.
///
/// The fractional-digit count `f` is drawn uniformly from `0..=3` and kept
/// fixed. Then a decade is drawn uniformly, a mantissa uniformly from
/// `[1, 10)` at 15-digit resolution, and the value is rounded half-up to `f`
/// fractional digits. Draws that round out of range (including to zero) are
/// repeated with the same `f`.
pub fn sample_number<R: Rng + ?Sized>(range: NumberRange, rng: &mut R) -> ExactDecimal {
    let fraction = rng.gen_range(0..=MAX_FRACTION_DIGITS);
    sample_number_with_fraction(range, fraction, rng)
}

/// [`sample_number`] with the fractional-digit count fixed by the caller.
pub fn sample_number_with_fraction<R: Rng + ?Sized>(
    range: NumberRange,
    fraction: u32,
    rng: &mut R,
) -> ExactDecimal {
    let lo = 10u64.pow(MANTISSA_DIGITS);
    let hi = 10u64.pow(MANTISSA_DIGITS + 1);
    loop {
        let decade = rng.gen_range(range.decades()) as i64;
        let mantissa = rng.gen_range(lo..hi);
        // value = mantissa × 10^(decade - 15), rounded to 10^-fraction
        let shift = -(fraction as i64) - (decade - MANTISSA_DIGITS as i64);
        let coefficient = if shift <= 0 {
            BigUint::from(mantissa) * pow10((-shift) as u32)
        } else if shift > 19 {
            BigUint::zero()
        } else {
            let div = 10u64.pow(shift as u32);
            let (q, r) = (mantissa / div, mantissa % div);
            BigUint::from(if r * 2 >= div { q + 1 } else { q })
        };
        if coefficient.is_zero() {
            continue;
        }
        let digits = digit_count(&coefficient);
        let value = ExactDecimal { coefficient, exponent: -(fraction as i64), sig_digits: digits };
        if value.in_range(range) {
            return value;
        }
    }
}
