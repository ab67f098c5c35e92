//! Sum-of-digits function, 2-adic valuation helpers and the exponent
//! bound `p(n, m)` that certifies exact integer arithmetic.

use crate::arith::DyadicRational;

/// Base-2 digit expansion, least-significant digit first.
///
/// Empty for zero; the leading digit is always 1 otherwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitExpansion {
    bits: Vec<u8>,
}

impl DigitExpansion {
    pub fn new(mut m: u64) -> Self {
        let mut bits = Vec::new();
        while m > 0 {
            bits.push((m & 1) as u8);
            m >>= 1;
        }
        DigitExpansion { bits }
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    /// Reconstructs the integer this expansion was built from.
    pub fn value(&self) -> u64 {
        self.bits
            .iter()
            .rev()
            .fold(0u64, |acc, &d| (acc << 1) | d as u64)
    }

    /// Count of 1-digits at positions >= `n`.
    pub fn sum_from(&self, n: u32) -> u32 {
        self.bits
            .iter()
            .skip(n as usize)
            .map(|&d| d as u32)
            .sum()
    }
}

/// `s(n, m)`: the number of 1-bits of `m` at binary positions >= `n`.
pub fn sum_of_digits(n: u32, m: u64) -> u32 {
    if n >= 64 {
        return 0;
    }
    (m >> n).count_ones()
}

/// `p(n, m) = 2m - 2^{n+2} + 4 - s(n, m)`.
///
/// The value certifies that `2^{p(n,m)} beta_{n,m}` is an integer when
/// `m >= 2^{n+1} - 1`; outside that range it may be negative and carries
/// no certificate meaning. Callers enforce the range.
pub fn p_bound(n: u32, m: u64) -> i64 {
    2 * m as i64 - (1i64 << (n + 2)) + 4 - sum_of_digits(n, m) as i64
}

/// 2-adic valuation of a dyadic rational; `None` stands for +infinity
/// (the valuation of zero).
pub fn two_adic_valuation(x: &DyadicRational) -> Option<i64> {
    if x.is_zero() {
        None
    } else {
        // numerator is odd by normalization, so nu(x) = -exponent
        Some(-x.exponent())
    }
}

/// `nu(k!) = k - s(0, k)`.
pub fn factorial_valuation(k: u64) -> u64 {
    k - sum_of_digits(0, k) as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn digit_expansion_round_trip() {
        for m in [0u64, 1, 2, 5, 6, 255, 256, 12345] {
            let e = DigitExpansion::new(m);
            assert_eq!(e.value(), m);
            if m == 0 {
                assert!(e.bits().is_empty());
            } else {
                assert_eq!(*e.bits().last().unwrap(), 1);
            }
            assert_eq!(e.sum_from(0), sum_of_digits(0, m));
        }
    }

    #[test]
    fn sum_of_digits_examples() {
        assert_eq!(sum_of_digits(0, 0), 0);
        for n in 0..20 {
            assert_eq!(sum_of_digits(n, (1u64 << (n + 1)) - 1), 1);
        }
        assert_eq!(sum_of_digits(0, 5), 2);
        assert_eq!(sum_of_digits(1, 5), 1);
        // n beyond the top bit position
        assert_eq!(sum_of_digits(10, 5), 0);
        assert_eq!(sum_of_digits(63, u64::MAX), 1);
    }

    #[test]
    fn p_bound_examples() {
        assert_eq!(p_bound(0, 1), 1);
        assert_eq!(p_bound(0, 0), 0);
        assert_eq!(p_bound(1, 7), 8);
    }

    #[test]
    fn valuation_examples() {
        let neg_half = DyadicRational::new((-1).into(), 1);
        assert_eq!(two_adic_valuation(&neg_half), Some(-1));
        assert_eq!(two_adic_valuation(&DyadicRational::zero()), None);
        let twelve = DyadicRational::from_integer(12);
        assert_eq!(two_adic_valuation(&twelve), Some(2));
    }

    #[test]
    fn factorial_valuation_examples() {
        assert_eq!(factorial_valuation(4), 3);
        assert_eq!(factorial_valuation(8), 7);
        assert_eq!(factorial_valuation(0), 0);
    }

    fn legendre(k: u64) -> u64 {
        let mut total = 0;
        let mut p = 2u64;
        while p <= k {
            total += k / p;
            if p > k / 2 {
                break;
            }
            p *= 2;
        }
        total
    }

    #[test]
    fn factorial_valuation_matches_legendre() {
        for k in 0..=100_000u64 {
            assert_eq!(factorial_valuation(k), legendre(k), "k={k}");
        }
    }

    // For n >= 1 a carry out of the low n bits can raise s(n, l + m) by one,
    // so plain subadditivity only holds at n = 0; in general the defect is
    // at most 1, which is all the p(n, m) inequalities below need.
    #[test]
    fn subadditivity_exhaustive_small() {
        for l in 0..512u64 {
            for m in 0..512u64 {
                assert!(sum_of_digits(0, l + m) <= sum_of_digits(0, l) + sum_of_digits(0, m));
                for n in 1..=8u32 {
                    assert!(
                        sum_of_digits(n, l + m) <= sum_of_digits(n, l) + sum_of_digits(n, m) + 1
                    );
                }
            }
        }
        // the defect of 1 is attained
        assert!(sum_of_digits(6, 136 + 12600) > sum_of_digits(6, 136) + sum_of_digits(6, 12600));
    }

    #[test]
    fn degree_step_and_even_halving() {
        for m in 0..(1u64 << 16) {
            for n in 0..=8u32 {
                let d = sum_of_digits(n, m) as i64 - sum_of_digits(n + 1, m) as i64;
                assert!((0..=1).contains(&d), "n={n} m={m}");
            }
            if m >= 2 && m % 2 == 0 {
                assert!(sum_of_digits(0, m) as i64 <= 2 * sum_of_digits(0, m / 2) as i64 - 1);
            }
        }
    }

    #[test]
    fn p_bound_inequalities() {
        for n in 0..=6u32 {
            for m in 0..=(1u64 << 12) {
                // (a)
                assert!(p_bound(n, m) - 1 >= p_bound(n + 1, m), "a: n={n} m={m}");
                // (c)
                if n == 0 && m % 2 == 0 && m > 0 {
                    assert!(p_bound(0, m) - 1 >= 2 * p_bound(0, m / 2), "c: m={m}");
                }
                // (d)
                if m >= (1 << (n + 1)) - 1 {
                    assert!(
                        p_bound(n, m) - 1 >= p_bound(0, m + 1 - (1 << (n + 1))),
                        "d: n={n} m={m}"
                    );
                }
            }
        }
        // (b)
        for n in 0..=6u32 {
            for m in 0..=(1u64 << 12) {
                for k in 0..=m {
                    assert!(p_bound(n, m) >= p_bound(n, k) + p_bound(n, m - k));
                }
            }
        }
    }

    proptest! {
        #[test]
        fn subadditivity_random(n in 0u32..=8, l in 0u64..(1 << 16), m in 0u64..(1 << 16)) {
            let slack = u32::from(n > 0);
            prop_assert!(sum_of_digits(n, l + m) <= sum_of_digits(n, l) + sum_of_digits(n, m) + slack);
        }
    }
}
