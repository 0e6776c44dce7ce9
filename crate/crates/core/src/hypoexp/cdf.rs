use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use super::{c_prime_for, constants, LogProb};
use crate::error::{Error, Result};
use crate::numeric::{ln_factorial, log_sum_signed, DdSum, LogTerm};

/// Largest `n` accepted by [`cdf_yn_exact`].
pub const MAX_YN_TERMS: u32 = 30;

/// Rounding error tolerated in an alternating sum, as a condition number.
const MAX_CONDITION: f64 = 1e8;

/// Below this `x` the series order follows `x = c'/2^c'`.
const SMALL_X: f64 = 0.1;

/// `sum_{i<terms} W_{i+1} / 2^i`.
pub fn sample_yinf(rng: &mut impl Rng, terms: u32) -> f64 {
    let mut scale = 1.0;
    let mut acc = 0.0;
    for _ in 0..terms.max(1) {
        let w: f64 = rng.sample(Exp1);
        acc += w * scale;
        scale *= 0.5;
    }
    acc
}

/// `P(Y_n <= x) = sum_i (1 - e^(-2^i x)) R_i(0)` with
/// `R_i(0) = prod_{j != i} 2^j / (2^j - 2^i)`.
pub fn cdf_yn_exact(n: u32, x: f64) -> Result<f64> {
    if n == 0 || n > MAX_YN_TERMS {
        return Err(Error::pre(format!("n = {n} outside 1..={MAX_YN_TERMS}")));
    }
    if !(x > 0.0) {
        return Ok(0.0);
    }
    let mut sum = DdSum::new();
    for i in 0..n as i32 {
        let mut log_r = 0.0;
        for j in 0..n as i32 {
            if j > i {
                log_r -= (-(2f64.powi(i - j))).ln_1p();
            } else if j < i {
                log_r -= (2f64.powi(i - j) - 1.0).ln();
            }
        }
        let r = if i % 2 == 1 { -log_r.exp() } else { log_r.exp() };
        sum.add(-(-(2f64.powi(i) * x)).exp_m1() * r);
    }
    Ok(sum.value().clamp(0.0, 1.0))
}

/// `e_c(y) = e^-y - sum_{k<=c} (-y)^k / k!` for `y >= 0`, as a signed log.
pub fn e_c(c: u32, y: f64) -> LogTerm {
    if y == 0.0 {
        return LogTerm { negative: false, log_abs: f64::NEG_INFINITY };
    }
    if c == 0 {
        return LogTerm::new((-y).exp_m1());
    }
    let cf = c as f64;
    if y <= cf {
        // Tail: (-y)^(c+1)/(c+1)! * sum_m (-y)^m / ((c+2)...(c+1+m)).
        let mut bracket = DdSum::new();
        let mut term = 1.0f64;
        let mut m = 0u32;
        while term.abs() > 1e-18 {
            bracket.add(term);
            m += 1;
            term *= -y / (cf + 1.0 + m as f64);
        }
        LogTerm {
            negative: c % 2 == 0,
            log_abs: (cf + 1.0) * y.ln() - ln_factorial(c as u64 + 1) + bracket.value().ln(),
        }
    } else {
        // Partial sum as (-y)^c/c! * sum_m (-1)^m c(c-1)...(c-m+1) / y^m.
        let mut factor = DdSum::new();
        let mut term = 1.0f64;
        for m in 0..=c {
            factor.add(term);
            term *= -((c - m) as f64) / y;
        }
        let partial = LogTerm {
            negative: c % 2 == 1,
            log_abs: cf * y.ln() - ln_factorial(c as u64) + factor.value().ln(),
        };
        let minus_partial = LogTerm { negative: !partial.negative, ..partial };
        let s = log_sum_signed(&[LogTerm { negative: false, log_abs: -y }, minus_partial]);
        LogTerm { negative: s.negative, log_abs: s.log_abs }
    }
}

/// `F_c(x)` in log space. Fails if the alternating sum loses too many digits
/// or comes out nonpositive.
pub fn cdf_yinf_series(x: f64, c: u32) -> Result<LogProb> {
    if !(x > 0.0) {
        return Ok(LogProb::ZERO);
    }
    let mut terms = Vec::new();
    let mut log_prod = 0.0f64;
    let mut max_log = f64::NEG_INFINITY;
    for i in 0..1000i32 {
        if i > 0 {
            log_prod += (2f64.powi(i) - 1.0).ln();
        }
        let y = 2f64.powi(i) * x;
        let e = e_c(c, y);
        let log_abs = e.log_abs - log_prod;
        // (-1)^(i+1) e_c.
        let negative = e.negative == (i % 2 == 1);
        terms.push(LogTerm { negative, log_abs });
        max_log = max_log.max(log_abs);
        if y > c as f64 + 1.0 && log_abs < max_log - 60.0 {
            break;
        }
    }
    let s = log_sum_signed(&terms);
    if s.negative || s.log_abs == f64::NEG_INFINITY || s.condition > MAX_CONDITION {
        return Err(Error::Accuracy(format!(
            "F_{c}({x}) is ill-conditioned (condition {:.3e})",
            s.condition
        )));
    }
    Ok(LogProb::from_log(constants().n.ln() + s.log_abs))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CdfPath {
    pub c: u32,
}

fn path_for(x: f64) -> CdfPath {
    if x >= SMALL_X {
        return CdfPath { c: 0 };
    }
    let c = c_prime_for(x).map_or(0, |cp| cp.floor().max(0.0) as u32);
    CdfPath { c }
}

/// `ln P(Y_inf <= x)`, choosing the series order for conditioning.
pub fn log_cdf_yinf(x: f64) -> Result<(LogProb, CdfPath)> {
    if !(x > 0.0) {
        return Ok((LogProb::ZERO, CdfPath { c: 0 }));
    }
    let path = path_for(x);
    Ok((cdf_yinf_series(x, path.c)?.clamp_one(), path))
}

pub fn cdf_yinf(x: f64) -> Result<f64> {
    Ok(log_cdf_yinf(x)?.0.value())
}

/// `P(Y_inf > x) = N sum_i (-1)^i e^(-2^i x) / prod_{k<=i}(2^k - 1)`,
/// accurate for `x >= 1`.
pub fn sf_yinf(x: f64) -> Result<f64> {
    if !(x >= 1.0) {
        return Err(Error::Accuracy(format!("survival series needs x >= 1, got {x}")));
    }
    let mut sum = DdSum::new();
    let mut log_prod = 0.0;
    for i in 0..64i32 {
        if i > 0 {
            log_prod += (2f64.powi(i) - 1.0).ln();
        }
        let t = (-(2f64.powi(i) * x) - log_prod).exp();
        sum.add(if i % 2 == 0 { t } else { -t });
        if t < 1e-300 {
            break;
        }
    }
    Ok(constants().n * sum.value())
}

impl LogProb {
    fn clamp_one(self) -> Self {
        Self { log_value: self.log_value.min(0.0) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_term_sum() {
        let expected = 2.0 * (1.0 - (-1f64).exp()) - (1.0 - (-2f64).exp());
        assert!((cdf_yn_exact(2, 1.0).unwrap() - expected).abs() < 1e-14);
        assert!((expected - 0.399_576_4).abs() < 1e-6);
        assert!((cdf_yn_exact(1, 0.7).unwrap() - (1.0 - (-0.7f64).exp())).abs() < 1e-15);
        assert_eq!(cdf_yn_exact(5, 0.0).unwrap(), 0.0);
        assert!(cdf_yn_exact(31, 1.0).is_err());
    }

    #[test]
    fn e_c_matches_direct_where_safe() {
        for c in 0..6u32 {
            for y in [0.05, 0.5, 1.0, 2.5, 4.0, 7.5, 20.0] {
                let mut partial = 0.0;
                let mut t = 1.0;
                for k in 0..=c {
                    if k > 0 {
                        t *= -y / k as f64;
                    }
                    partial += t;
                }
                let direct = (-y).exp() - partial;
                let e = e_c(c, y);
                let v = if e.negative { -e.log_abs.exp() } else { e.log_abs.exp() };
                assert!((v - direct).abs() <= 1e-9 * direct.abs().max(1e-6), "c={c} y={y}: {v} vs {direct}");
            }
        }
    }

    #[test]
    fn orders_agree() {
        let f0 = cdf_yinf_series(1.0, 0).unwrap().value();
        let f3 = cdf_yinf_series(1.0, 3).unwrap().value();
        assert!((f0 - f3).abs() < 1e-10, "{f0} {f3}");
    }
}
