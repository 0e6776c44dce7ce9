use serde::{Deserialize, Serialize};

use super::{cdf_yinf, constants};
use crate::error::{Error, Result};
use crate::mc::{McConfig, Proportion};
use crate::multiset::GeometricParams;

/// Largest scaled bound `r 2^(L-1)` handled by the dynamic program.
pub const DP_STATE_CAP: u64 = 10_000_000;

/// Largest `L` for which scaled sums fit in 128 bits.
const MAX_L: u32 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChiMethod {
    Mc,
    Dp,
}

impl std::str::FromStr for ChiMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mc" => Ok(Self::Mc),
            "dp" => Ok(Self::Dp),
            _ => Err(Error::Parse(format!("unknown method `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiResult {
    pub probability: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub method: ChiMethod,
    pub samples: u64,
}

fn check(l: u32, p: f64, r: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::pre(format!("need 0 < p < 1, got {p}")));
    }
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::pre(format!("need finite r >= 0, got {r}")));
    }
    if l > MAX_L {
        return Err(Error::pre(format!("L = {l} exceeds {MAX_L}")));
    }
    Ok(())
}

/// `ceil(r 2^(L-1))`: the scaled sum `sum Z_i 2^(L-i)` must stay below it.
fn scaled_bound(l: u32, r: f64) -> Result<u128> {
    let scaled = (r * 2f64.powi(l as i32 - 1)).ceil();
    if scaled >= 2f64.powi(127) {
        return Err(Error::pre("r 2^(L-1) too large"));
    }
    Ok(scaled as u128)
}

/// `P(Z_1 + Z_2/2 + ... + Z_L/2^(L-1) < r)` for i.i.d. geometric `Z_i`
/// with parameter `p`, by sampling. Comparisons are exact in integers.
pub fn chi_x_mc(l: u32, p: f64, r: f64, samples: u64, cfg: &McConfig, z: f64) -> Result<ChiResult> {
    check(l, p, r)?;
    if l == 0 {
        let v = if r > 0.0 { 1.0 } else { 0.0 };
        return Ok(ChiResult { probability: v, ci_low: v, ci_high: v, method: ChiMethod::Mc, samples: 0 });
    }
    if samples == 0 {
        return Err(Error::pre("need at least one sample"));
    }
    let bound = scaled_bound(l, r)?;
    let geo = GeometricParams::new(p)?;
    let hits = crate::multiset::count_samples(cfg, 0, samples, 0, |_, rng| {
        let mut s = 0u128;
        for i in 1..=l {
            let zi = geo.sample(rng) as u128;
            s = s.saturating_add(zi.saturating_mul(1u128 << (l - i)));
            if s >= bound {
                return Ok(false);
            }
        }
        Ok(true)
    })?;
    let prop = Proportion::new(hits, samples, z);
    Ok(ChiResult {
        probability: prop.estimate,
        ci_low: prop.ci_low,
        ci_high: prop.ci_high,
        method: ChiMethod::Mc,
        samples,
    })
}

/// The same probability exactly (up to rounding) by dynamic programming
/// over scaled integer sums: `H(s) = p F(s) + (1-p) H(s - w)` adds one
/// geometric term of weight `w` to a sum with distribution function `F`.
pub fn chi_x_dp(l: u32, p: f64, r: f64) -> Result<ChiResult> {
    check(l, p, r)?;
    let exact = |v: f64| ChiResult { probability: v, ci_low: v, ci_high: v, method: ChiMethod::Dp, samples: 0 };
    if l == 0 {
        return Ok(exact(if r > 0.0 { 1.0 } else { 0.0 }));
    }
    let bound = scaled_bound(l, r)?;
    if bound == 0 {
        return Ok(exact(0.0));
    }
    if bound > DP_STATE_CAP as u128 {
        return Err(Error::EnumerationCap { size: bound, cap: DP_STATE_CAP });
    }
    let states = bound as usize;
    let q = 1.0 - p;
    let mut f = vec![1.0f64; states];
    for i in 1..=l {
        let w = 1u128 << (l - i);
        let mut h = vec![0.0f64; states];
        for s in 0..states {
            let carry = if (s as u128) >= w { h[s - w as usize] } else { 0.0 };
            h[s] = p * f[s] + q * carry;
        }
        f = h;
    }
    Ok(exact(f[states - 1].clamp(0.0, 1.0)))
}

pub fn chi_x(l: u32, p: f64, r: f64, method: ChiMethod, samples: u64, cfg: &McConfig) -> Result<ChiResult> {
    match method {
        ChiMethod::Dp => chi_x_dp(l, p, r),
        ChiMethod::Mc => chi_x_mc(l, p, r, samples, cfg, 1.96),
    }
}

/// `P(Y_inf < (r+3) lambda) + N exp(-2^L lambda)` with `lambda = -ln(1-p)`,
/// an upper bound on `X(L, p, r)`.
pub fn lemnew_bound(l: u32, p: f64, r: f64) -> Result<f64> {
    check(l, p, r)?;
    let lambda = -(-p).ln_1p();
    let cdf = cdf_yinf((r + 3.0) * lambda)?;
    Ok(cdf + constants().n * (-(2f64.powi(l as i32)) * lambda).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        assert_eq!(chi_x_dp(0, 0.3, 0.5).unwrap().probability, 1.0);
        assert_eq!(chi_x_dp(0, 0.3, 0.0).unwrap().probability, 0.0);
        assert!((chi_x_dp(1, 0.3, 1.0).unwrap().probability - 0.3).abs() < 1e-15);
        assert!((chi_x_dp(2, 0.5, 1.0).unwrap().probability - 0.375).abs() < 1e-15);
        let mc = chi_x_mc(2, 0.5, 1.0, 200_000, &McConfig::new(5), 3.0).unwrap();
        assert!(mc.ci_low <= 0.375 && 0.375 <= mc.ci_high);
        assert!(matches!(chi_x_dp(30, 0.5, 1.0), Err(Error::EnumerationCap { .. })));
    }
}
