//! Small numeric helpers: double-double accumulation, signed sums in log
//! space, and exact binomials.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

/// Running sum in double-double precision (error-free `two_sum` steps).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DdSum {
    hi: f64,
    lo: f64,
}

impl DdSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let (s, e) = two_sum(self.hi, x);
        let (hi, lo) = fast_two_sum(s, e + self.lo);
        self.hi = hi;
        self.lo = lo;
    }

    pub fn value(&self) -> f64 {
        self.hi + self.lo
    }
}

impl std::iter::FromIterator<f64> for DdSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = DdSum::new();
        iter.into_iter().for_each(|x| s.add(x));
        s
    }
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn fast_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

/// A term `sign * exp(log_abs)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogTerm {
    pub negative: bool,
    pub log_abs: f64,
}

impl LogTerm {
    pub fn new(value: f64) -> Self {
        Self { negative: value < 0.0, log_abs: value.abs().ln() }
    }
}

/// Result of summing signed log-space terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogSum {
    pub negative: bool,
    /// `ln |sum|`, `-inf` for an exact zero.
    pub log_abs: f64,
    /// `sum |t| / |sum|`; rounding error of the sum is about this times eps.
    pub condition: f64,
}

/// Sums `sign * exp(log_abs)` terms without overflow or underflow by
/// factoring out the largest magnitude.
pub fn log_sum_signed(terms: &[LogTerm]) -> LogSum {
    let max = terms
        .iter()
        .map(|t| t.log_abs)
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return LogSum { negative: false, log_abs: f64::NEG_INFINITY, condition: 1.0 };
    }
    let mut sum = DdSum::new();
    let mut abs = DdSum::new();
    for t in terms {
        let m = (t.log_abs - max).exp();
        sum.add(if t.negative { -m } else { m });
        abs.add(m);
    }
    let s = sum.value();
    LogSum {
        negative: s < 0.0,
        log_abs: s.abs().ln() + max,
        condition: abs.value() / s.abs(),
    }
}

/// `ln(k!)`.
pub fn ln_factorial(k: u64) -> f64 {
    if k < 2 {
        0.0
    } else if k < 32 {
        (2..=k).map(|i| (i as f64).ln()).sum()
    } else {
        libm::lgamma(k as f64 + 1.0)
    }
}

pub fn ln_binomial(n: u64, k: u64) -> f64 {
    assert!(k <= n);
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

pub fn binomial_big(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::ZERO;
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// Exact binomial, `None` on overflow of `u128`.
pub fn binomial_u128(n: u64, k: u64) -> Option<u128> {
    binomial_big(n, k).to_u128()
}
