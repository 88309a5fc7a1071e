//! Exact block-coding bounds and rational rendering.

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, Pow, Zero};

pub type Rational = Ratio<i64>;

/// Smallest `m` with `2^m >= n^k`, i.e. `ceil(k * log2 n)` for `n >= 1`.
pub fn ceil_k_log2(n: &BigUint, k: u32) -> u64 {
    assert!(!n.is_zero(), "logarithm of zero");
    let power: BigUint = Pow::pow(n, k);
    (power - BigUint::one()).bits()
}

/// Per-block bound `ceil(k * log2(2^(m-1) + 1)) / k` for a one-shot subset
/// bound of `m` bits. `m = 0` maps to 0.
pub fn block_bound(m: u32, k: u32) -> Rational {
    assert!(k >= 1, "block length must be positive");
    if m == 0 {
        return Rational::zero();
    }
    let base = (BigUint::one() << (m - 1) as usize) + BigUint::one();
    Rational::new(ceil_k_log2(&base, k) as i64, k as i64)
}

/// Limit of [`block_bound`] as `k` grows: `log2(2^(m-1) + 1)`.
pub fn asymptotic_bound(m: u32) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let e = (m - 1) as f64;
    e + (-e).exp2().ln_1p() / std::f64::consts::LN_2
}

/// Integers as-is, terminating fractions as exact decimals, everything else as `p/q`.
pub fn render(r: &Rational) -> String {
    let (num, den) = (*r.numer(), *r.denom());
    if den == 1 {
        return num.to_string();
    }
    let sign = if num < 0 { "-" } else { "" };
    let num = num.unsigned_abs();
    let den = den as u64;
    let mut rest = den;
    let (mut twos, mut fives) = (0u32, 0u32);
    while rest.is_multiple_of(2) {
        rest /= 2;
        twos += 1;
    }
    while rest.is_multiple_of(5) {
        rest /= 5;
        fives += 1;
    }
    if rest != 1 {
        return format!("{sign}{num}/{den}");
    }
    let digits = twos.max(fives);
    let scale = 10u128.pow(digits);
    let scaled = num as u128 * scale / den as u128;
    let int = scaled / scale;
    let frac = scaled % scale;
    let frac = format!("{frac:0width$}", width = digits as usize);
    format!("{sign}{int}.{}", frac.trim_end_matches('0'))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_log_matches_definition() {
        assert_eq!(ceil_k_log2(&BigUint::from(1u32), 5), 0);
        assert_eq!(ceil_k_log2(&BigUint::from(2u32), 3), 3);
        assert_eq!(ceil_k_log2(&BigUint::from(5u32), 2), 5);
        assert_eq!(ceil_k_log2(&BigUint::from(100u32), 1), 7);
        assert_eq!(ceil_k_log2(&BigUint::from(8u32), 2), 6);
    }

    #[test]
    fn block_bound_values() {
        for k in 1..8 {
            assert_eq!(block_bound(1, k), Rational::from_integer(1));
            assert_eq!(block_bound(0, k), Rational::zero());
        }
        assert_eq!(block_bound(3, 2), Rational::new(5, 2));
        assert_eq!(block_bound(3, 1), Rational::from_integer(3));
        assert_eq!(block_bound(2, 1), Rational::from_integer(2));
    }

    #[test]
    fn asymptotic_values() {
        assert_eq!(asymptotic_bound(0), 0.0);
        assert_eq!(asymptotic_bound(1), 1.0);
        assert!((asymptotic_bound(2) - 3f64.log2()).abs() < 1e-14);
        assert!((asymptotic_bound(4) - 9f64.log2()).abs() < 1e-14);
        assert!(asymptotic_bound(20) > 19.0 && asymptotic_bound(20) < 20.0);
        assert!((asymptotic_bound(60) - 59.0).abs() < 1e-12);
    }

    #[test]
    fn rendering() {
        assert_eq!(render(&Rational::new(5, 2)), "2.5");
        assert_eq!(render(&Rational::new(6, 3)), "2");
        assert_eq!(render(&Rational::new(7, 3)), "7/3");
        assert_eq!(render(&Rational::new(1, 8)), "0.125");
        assert_eq!(render(&Rational::new(3, 20)), "0.15");
        assert_eq!(render(&Rational::new(-1, 3)), "-1/3");
        assert_eq!(render(&Rational::new(-1, 2)), "-0.5");
    }
}
