use std::f64::consts::{LN_2, PI};

use super::{constants, q_func, LogProb};
use crate::error::{Error, Result};

/// Leading term of `ln P(Y_inf <= c'/2^c')`:
/// `N^2 / sqrt(2 pi c') e^c' 2^(-c'(c'+1)/2) Q(c')`.
pub fn asymp_log_cdf(c_prime: f64) -> Result<LogProb> {
    if !(c_prime >= 1.0) {
        return Err(Error::pre(format!("need c' >= 1, got {c_prime}")));
    }
    let n = constants().n;
    let log = 2.0 * n.ln() - 0.5 * (2.0 * PI * c_prime).ln() + c_prime - c_prime * (c_prime + 1.0) / 2.0 * LN_2
        + q_func(c_prime).ln();
    Ok(LogProb::from_log(log))
}

/// Leading term of `ln P(Y_inf <= c'' y / 2^c'')` for `c'' >= 6` and
/// `2^(-c''^(1/4)) <= y <= 2^(c''^(1/4))`.
pub fn asymp_log_cdf2(c2: f64, y: f64) -> Result<LogProb> {
    if !(c2 >= 6.0) {
        return Err(Error::pre(format!("need c'' >= 6, got {c2}")));
    }
    let edge = c2.powf(0.25);
    let log2y = y.log2();
    if !(y > 0.0) || log2y.abs() > edge {
        return Err(Error::pre(format!("y = {y} outside [2^-{edge}, 2^{edge}]")));
    }
    let n = constants().n;
    let log = 2.0 * n.ln() - 0.5 * (2.0 * PI * c2).ln() + c2 * (1.0 + y.ln()) - c2 * (c2 + 1.0) / 2.0 * LN_2
        + (1.0 - log2y) / 2.0 * y.ln()
        + q_func(c2 - log2y).ln();
    Ok(LogProb::from_log(log))
}

/// `P(Y_inf > x) <= min(1, N e^-x)`.
pub fn tail_bound(x: f64) -> f64 {
    (constants().n * (-x).exp()).min(1.0)
}

/// The `c' >= 1/ln 2` solving `c' / 2^c' = x`; exists for
/// `0 < x <= 1/(e ln 2)`.
pub fn c_prime_for(x: f64) -> Option<f64> {
    let peak = 1.0 / LN_2;
    if !(x > 0.0) || x > peak * 2f64.powf(-peak) {
        return None;
    }
    // c - log2 c = -log2 x, increasing for c > 1/ln 2.
    let target = -x.log2();
    let (mut lo, mut hi) = (peak, peak.max(2.0 * target + 4.0));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid - mid.log2() < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let c = 0.5 * (lo + hi);
    Some(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_prime_roundtrip() {
        for c in [1.5, 3.0, 8.0, 16.5, 32.0] {
            let x = c / 2f64.powf(c);
            let back = c_prime_for(x).unwrap();
            assert!((back - c).abs() < 1e-9, "{c} -> {back}");
        }
        assert!(c_prime_for(0.6).is_none());
    }

    #[test]
    fn tail_bound_edges() {
        assert_eq!(tail_bound(constants().n.ln()), 1.0);
        assert!(tail_bound(50.0) < 1e-20);
    }

    #[test]
    fn second_form_reduces_to_first() {
        let a = asymp_log_cdf(9.0).unwrap().log_value;
        let b = asymp_log_cdf2(9.0, 1.0).unwrap().log_value;
        assert!((a - b).abs() < 1e-12);
        let edge = 2f64.powf(16f64.powf(0.25));
        assert!(asymp_log_cdf2(16.0, edge).is_ok());
        assert!(asymp_log_cdf2(16.0, edge * 1.01).is_err());
        assert!(asymp_log_cdf2(5.0, 1.0).is_err());
    }
}
