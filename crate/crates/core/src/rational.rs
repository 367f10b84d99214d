//! Exact rational helpers shared by the region and CLI code.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn from_big(v: &BigInt) -> Rational {
    Rational::from_integer(v.clone())
}

/// `p/q` in lowest terms, or `p` for integers.
pub fn to_exact_string(q: &Rational) -> String {
    q.to_string()
}

pub fn parse_exact(s: &str) -> Option<Rational> {
    s.trim().parse::<Rational>().ok()
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Decimal rendering with 12 significant digits.
pub fn to_decimal(q: &Rational) -> String {
    let x = to_f64(q);
    if x == 0.0 {
        return "0".to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (11 - magnitude).max(0) as usize;
    let s = format!("{:.*}", decimals, x);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Least common multiple of the denominators.
pub fn lcm_of_denominators<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()))
}

pub fn is_nonnegative(q: &Rational) -> bool {
    !q.is_negative()
}

pub fn zero() -> Rational {
    Rational::zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_strings() {
        assert_eq!(to_exact_string(&ratio(8, 6)), "4/3");
        assert_eq!(to_exact_string(&ratio(6, 3)), "2");
        assert_eq!(to_exact_string(&ratio(-1, 2)), "-1/2");
        assert_eq!(parse_exact("5/6"), Some(ratio(5, 6)));
        assert_eq!(parse_exact("3"), Some(int(3)));
    }

    #[test]
    fn decimals() {
        assert_eq!(to_decimal(&ratio(4, 3)), "1.33333333333");
        assert_eq!(to_decimal(&ratio(5, 6)), "0.833333333333");
        assert_eq!(to_decimal(&int(3)), "3");
        assert_eq!(to_decimal(&zero()), "0");
    }

    #[test]
    fn lcm() {
        let v = [ratio(1, 2), ratio(5, 6), int(1), ratio(1, 3)];
        assert_eq!(lcm_of_denominators(v.iter()), BigInt::from(6));
    }

    proptest::proptest! {
        #[test]
        fn exact_string_round_trip(p in -10_000i64..10_000, q in 1i64..10_000) {
            let r = ratio(p, q);
            proptest::prop_assert_eq!(parse_exact(&to_exact_string(&r)), Some(r));
        }
    }
}
