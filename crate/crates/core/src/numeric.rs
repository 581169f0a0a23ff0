//! Small numeric helpers: integer logarithms, rigorous bounds for `e^x` and
//! fixed-point fractional powers, and float formatting for reports.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive};

use crate::rational::Rational;

/// Fractional bits kept by [`frac_pow_floor`].
pub const FRAC_BITS: u32 = 40;

/// `⌈log₂ n⌉`, with `ceil_log2(1) = 0`.
pub fn ceil_log2(n: u64) -> u32 {
    assert!(n > 0, "log of zero");
    if n == 1 {
        0
    } else {
        64 - (n - 1).leading_zeros()
    }
}

/// `⌊log₂ n⌋`.
pub fn floor_log2(n: u64) -> u32 {
    assert!(n > 0, "log of zero");
    63 - n.leading_zeros()
}

/// `⌊c^(p/q) · 2^FRAC_BITS⌋`, exactly.
pub fn frac_pow_floor(c: u64, p: u32, q: u32) -> BigUint {
    let radicand = BigUint::from(c).pow(p) << (FRAC_BITS as usize * q as usize);
    radicand.nth_root(q)
}

/// A rational lower bound for `e^x`, `x ≤ 0`, within `2^-50` of the true
/// value.
pub fn exp_lower(x: &Rational) -> Rational {
    assert!(!x.is_positive(), "exp_lower expects x <= 0");
    let y = -x;
    // e^y <= partial + 2 * next term once consecutive term ratios drop below 1/2
    let mut partial = Rational::ONE;
    let mut term = Rational::ONE;
    let mut k: i64 = 0;
    let eps = Rational::new(1, 1 << 55).expect("nonzero");
    loop {
        k += 1;
        term = &term * &y / Rational::from_integer(k);
        let ratio_small = Rational::from_integer(2) * &y <= Rational::from_integer(k + 1);
        if ratio_small && &term * Rational::from_integer(2) < &eps * &partial {
            let upper = &partial + &term * Rational::from_integer(2);
            let bound = Rational::ONE / upper;
            return round_down(&bound, 50);
        }
        partial = &partial + &term;
    }
}

/// Largest `m / 2^bits` not exceeding `x`.
pub fn round_down(x: &Rational, bits: u32) -> Rational {
    let scale = BigInt::one() << bits as usize;
    let m = (x * Rational::from_bigint(scale.clone())).floor();
    Rational::from_bigints(m, scale).expect("nonzero denominator")
}

/// `2^-bits` as a rational.
pub fn pow2_neg(bits: u32) -> Rational {
    Rational::from_bigints(BigInt::one(), BigInt::one() << bits as usize).expect("nonzero")
}

/// Rounds to 12 significant digits.
pub fn sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// `exp(Σ e_i ln b_i)`, the decimal value of a monomial in positive bases.
pub fn monomial(terms: &[(f64, f64)]) -> f64 {
    terms.iter().map(|(base, e)| e * base.ln()).sum::<f64>().exp()
}

/// Ratio of two positive exact values as a float, robust to huge magnitudes.
pub fn ratio(lhs: &Rational, rhs: &Rational) -> f64 {
    if rhs.is_zero() {
        return f64::INFINITY;
    }
    (lhs / rhs).to_f64()
}

pub fn biguint_to_f64(n: &BigUint) -> f64 {
    n.to_f64().unwrap_or(f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn integer_logs() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(16), 4);
        assert_eq!(ceil_log2(17), 5);
        assert_eq!(floor_log2(1), 0);
        assert_eq!(floor_log2(17), 4);
        assert_eq!(floor_log2(u64::MAX), 63);
    }

    #[test]
    fn exp_lower_is_tight_lower_bound() {
        for x in [q(0, 1), q(-1, 2), q(-1, 1), q(-2, 1), q(-7, 3)] {
            let lo = exp_lower(&x);
            let truth = x.to_f64().exp();
            assert!(lo.to_f64() <= truth + 1e-15, "{x}");
            assert!(truth - lo.to_f64() < 1e-12, "{x}");
        }
        assert_eq!(exp_lower(&Rational::ZERO), Rational::ONE);
    }

    #[test]
    fn fractional_powers_floor_exactly() {
        // 4^(3/2) = 8 exactly
        assert_eq!(frac_pow_floor(4, 3, 2), BigUint::from(8u64) << FRAC_BITS as usize);
        let v = frac_pow_floor(2, 3, 2);
        let approx = biguint_to_f64(&v) / (1u64 << FRAC_BITS) as f64;
        assert!((approx - 2f64.powf(1.5)).abs() < 1e-11);
    }

    #[test]
    fn sig12_rounds() {
        assert_eq!(sig12(1.234567890123456), 1.23456789012);
        assert_eq!(sig12(0.0), 0.0);
    }
}
