//! Report envelope and exact-value rendering. Everything here must be
//! byte-deterministic: fixed key order, canonical lowest-terms rationals,
//! fixed-width decimal approximations.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Signed;
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

/// Fraction digits in the decimal rendering of a rational.
pub const DECIMAL_DIGITS: usize = 12;

#[derive(Serialize)]
pub struct Report<P: Serialize, R: Serialize> {
    pub schema_version: u32,
    pub command: &'static str,
    pub params: P,
    pub results: R,
    pub provenance: Provenance,
}

#[derive(Serialize)]
pub struct Provenance {
    pub theorems: Vec<String>,
}

impl<P: Serialize, R: Serialize> Report<P, R> {
    pub fn new(command: &'static str, params: P, results: R, theorems: Vec<String>) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            command,
            params,
            results,
            provenance: Provenance { theorems },
        }
    }

    /// Pretty JSON with a trailing newline; the canonical output bytes.
    pub fn render(&self) -> anyhow::Result<String> {
        let mut out = serde_json::to_string_pretty(self)?;
        out.push('\n');
        Ok(out)
    }
}

/// A rational in the report: exact numerator/denominator as decimal strings
/// (no integer-width ambiguity), the "p/q" form, and a fixed-width decimal.
#[derive(Clone, Debug, Serialize)]
pub struct Rat {
    pub num: String,
    pub den: String,
    pub ratio: String,
    pub decimal: String,
}

impl Rat {
    pub fn from_rational(r: &BigRational) -> Rat {
        Rat {
            num: r.numer().to_string(),
            den: r.denom().to_string(),
            ratio: format!("{}/{}", r.numer(), r.denom()),
            decimal: decimal_fixed(r),
        }
    }
}

/// Round-half-up decimal with exactly DECIMAL_DIGITS fraction digits.
pub fn decimal_fixed(r: &BigRational) -> String {
    let sign = if r.is_negative() { "-" } else { "" };
    let num = r.numer().abs().to_biguint().expect("abs is nonnegative");
    let den = r.denom().to_biguint().expect("denominator is positive");
    let scale = BigUint::from(10u32).pow(DECIMAL_DIGITS as u32);
    let scaled = num * scale;
    let rounded = (&scaled + &den / 2u32) / &den;
    let digits = rounded.to_string();
    let (int_part, frac_part) = if digits.len() > DECIMAL_DIGITS {
        let split = digits.len() - DECIMAL_DIGITS;
        (digits[..split].to_string(), digits[split..].to_string())
    } else {
        (
            "0".to_string(),
            format!("{digits:0>width$}", width = DECIMAL_DIGITS),
        )
    };
    format!("{sign}{int_part}.{frac_part}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, Zero};

    fn rat(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn decimal_rendering_is_fixed_width() {
        assert_eq!(decimal_fixed(&rat(4, 5)), "0.800000000000");
        assert_eq!(decimal_fixed(&rat(1, 3)), "0.333333333333");
        assert_eq!(decimal_fixed(&rat(2, 3)), "0.666666666667");
        assert_eq!(decimal_fixed(&BigRational::one()), "1.000000000000");
        assert_eq!(decimal_fixed(&BigRational::zero()), "0.000000000000");
        assert_eq!(decimal_fixed(&rat(-1, 8)), "-0.125000000000");
        assert_eq!(decimal_fixed(&rat(17, 35)), "0.485714285714");
    }

    #[test]
    fn rat_fields_are_lowest_terms() {
        let r = Rat::from_rational(&rat(6, 8));
        assert_eq!(r.num, "3");
        assert_eq!(r.den, "4");
        assert_eq!(r.ratio, "3/4");
        assert_eq!(r.decimal, "0.750000000000");
    }
}
