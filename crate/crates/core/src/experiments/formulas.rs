//! Closed-form predictions and bounds. All functions are pure.

use std::f64::consts::{E, LN_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::BouquetSpec;

/// Stand-ins for the unquantified constants of the bouquet and global
/// threshold results. Reports print the values in use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Knobs {
    /// Least arm count for the many-arm prediction.
    pub g0: usize,
    /// Margin keeping arm lengths away from `0` and `log2 n`.
    pub l0: u32,
    /// Factor the spectrum constructor must achieve.
    pub k: f64,
    /// Least `n` for which the global upper bound is asserted.
    pub n0: usize,
    /// Least `n` for which the global lower bound is asserted.
    pub n1: usize,
}

impl Default for Knobs {
    fn default() -> Self {
        Self { g0: 1 << 16, l0: 8, k: 8.0, n0: 3, n1: 1 }
    }
}

/// `Phi(a) = a^2 / (2a + 1)`, the mean of `floor(Z/2)` when `Z` is
/// geometric with mean `a`.
pub fn phi(alpha: f64) -> Result<f64> {
    if !(alpha >= 0.0) {
        return Err(Error::pre(format!("phi needs alpha >= 0, got {alpha}")));
    }
    if alpha.is_infinite() {
        return Ok(f64::INFINITY);
    }
    Ok(alpha * alpha / (2.0 * alpha + 1.0))
}

pub fn phi_inv(y: f64) -> Result<f64> {
    if !(y >= 0.0) {
        return Err(Error::pre(format!("phi_inv needs y >= 0, got {y}")));
    }
    Ok(y + (y * y + y).sqrt())
}

/// Leading term `e 2^sqrt(log2 n) n / sqrt(log2 n)` of the path threshold.
pub fn path_threshold_prediction(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::pre(format!("path prediction needs n >= 2, got {n}")));
    }
    let nf = n as f64;
    let s = nf.log2().sqrt();
    Ok(E * s.exp2() * nf / s)
}

/// `2^sqrt(2 log2 g) e / (2 sqrt(log2 g))`.
pub fn large_g_beta(g: f64) -> Result<f64> {
    if !(g > 1.0) {
        return Err(Error::pre(format!("beta needs g > 1, got {g}")));
    }
    let lg = g.log2();
    Ok((2.0 * lg).sqrt().exp2() * E / (2.0 * lg.sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BouquetRegime {
    /// Many arms longer than `log2 n`.
    LargeG,
    /// Arms shorter than `log2 n`, threshold set by `Phi`.
    Small,
}

/// Predicted geometric pebbling threshold `beta n` of a bouquet with the
/// band the unknown correction factor allows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BouquetPrediction {
    pub regime: BouquetRegime,
    pub n: usize,
    pub g: usize,
    pub arm_len: usize,
    pub beta: f64,
    pub value: f64,
    pub band_low: f64,
    pub band_high: f64,
}

impl BouquetPrediction {
    pub fn in_band(&self, t: f64) -> bool {
        self.band_low <= t && t <= self.band_high
    }
}

fn check_counts(n: usize, g: usize, arm_len: usize) -> Result<()> {
    if n < 2 || g == 0 || arm_len == 0 {
        return Err(Error::pre(format!("need n >= 2, g >= 1, L >= 1; got n={n}, g={g}, L={arm_len}")));
    }
    Ok(())
}

pub fn bouquet_prediction_large_g(n: usize, g: usize, arm_len: usize, knobs: &Knobs) -> Result<BouquetPrediction> {
    check_counts(n, g, arm_len)?;
    if g < knobs.g0.max(2) {
        return Err(Error::pre(format!("g = {g} below the floor g0 = {}", knobs.g0.max(2))));
    }
    if 2 * g * arm_len > n {
        return Err(Error::pre(format!("2gL = {} exceeds n = {n}", 2 * g * arm_len)));
    }
    let lg = (g as f64).log2();
    let excess = arm_len as f64 - (n as f64).log2();
    let (low, high) = ((2.0 * lg).sqrt(), (2.0 * lg).powf(0.25).exp());
    if excess < low {
        return Err(Error::pre(format!("L - log2 n = {excess:.4} below sqrt(2 log2 g) = {low:.4}")));
    }
    if excess > high {
        return Err(Error::pre(format!("L - log2 n = {excess:.4} above exp((2 log2 g)^(1/4)) = {high:.4}")));
    }
    let beta = large_g_beta(g as f64)?;
    let eta = lg.powf(-0.25);
    let value = beta * n as f64;
    let band_high = if eta < 1.0 { value / (1.0 - eta) } else { f64::INFINITY };
    Ok(BouquetPrediction {
        regime: BouquetRegime::LargeG,
        n,
        g,
        arm_len,
        beta,
        value,
        band_low: value / (1.0 + eta),
        band_high,
    })
}

pub fn bouquet_prediction_small(n: usize, g: usize, arm_len: usize, eps: f64, knobs: &Knobs) -> Result<BouquetPrediction> {
    check_counts(n, g, arm_len)?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::pre(format!("need 0 < eps < 1, got {eps}")));
    }
    if (2 * g * arm_len) as f64 > eps * n as f64 {
        return Err(Error::pre(format!("2gL = {} exceeds eps n = {}", 2 * g * arm_len, eps * n as f64)));
    }
    let l0 = knobs.l0 as f64;
    let upper = (n as f64).log2() - l0;
    if (arm_len as f64) < l0 {
        return Err(Error::pre(format!("L = {arm_len} below L0 = {l0}")));
    }
    if arm_len as f64 > upper {
        return Err(Error::pre(format!("L = {arm_len} above log2 n - L0 = {upper:.4}")));
    }
    let beta = phi_inv((arm_len as f64 - 1.0).exp2() / n as f64)?;
    let value = beta * n as f64;
    Ok(BouquetPrediction {
        regime: BouquetRegime::Small,
        n,
        g,
        arm_len,
        beta,
        value,
        band_low: value * (1.0 - eps),
        band_high: value * (1.0 + eps),
    })
}

/// A requested threshold `t` for an `n`-vertex graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumTarget {
    pub n: usize,
    pub t: f64,
    pub beta: f64,
}

impl SpectrumTarget {
    /// Requires `sqrt n <= t <= 2^sqrt(2 log2 n) n / sqrt(log2 n)`.
    pub fn new(n: usize, t: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::pre(format!("spectrum target needs n >= 2, got {n}")));
        }
        let (lo, hi) = Self::range(n);
        if !(t >= lo && t <= hi) {
            return Err(Error::pre(format!("t = {t} outside [{lo}, {hi}]")));
        }
        Ok(Self { n, t, beta: t / n as f64 })
    }

    pub fn range(n: usize) -> (f64, f64) {
        let nf = n as f64;
        let lg = nf.log2();
        (nf.sqrt(), (2.0 * lg).sqrt().exp2() * nf / lg.sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumBranch {
    SingleArm,
    ManyArms,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumChoice {
    pub target: SpectrumTarget,
    pub branch: SpectrumBranch,
    pub spec: BouquetSpec,
    /// Prediction from whichever bouquet result's preconditions hold.
    pub prediction: Option<BouquetPrediction>,
}

impl SpectrumChoice {
    /// Predicted threshold over target, when a prediction applies.
    pub fn factor(&self) -> Option<f64> {
        self.prediction.map(|p| p.value / self.target.t)
    }
}

/// A bouquet whose geometric pebbling threshold should be within a
/// constant factor of `target.t`.
pub fn spectrum_construct(target: SpectrumTarget, knobs: &Knobs) -> Result<SpectrumChoice> {
    let n = target.n;
    let lg = (n as f64).log2();
    let g0 = knobs.g0.max(2);
    let g_max = (n as f64 / (4.0 * lg)).floor() as usize;
    if lg < 2.0 * knobs.l0 as f64 {
        return Err(Error::pre(format!("infeasible: n = {n} below 2^(2 L0) with L0 = {}", knobs.l0)));
    }
    if g_max < g0 {
        return Err(Error::pre(format!("infeasible: n/(4 log2 n) = {g_max} below g0 = {g0}")));
    }
    let beta_c = large_g_beta(g0 as f64)?;
    let l0 = knobs.l0 as usize;
    let (branch, g, arm_len) = if target.beta < beta_c {
        let hat = 1.0 + (phi(target.beta)? * n as f64).log2();
        let arm_len = if hat < l0 as f64 {
            l0
        } else if hat <= lg - l0 as f64 {
            hat.floor() as usize
        } else {
            lg.floor() as usize - l0
        };
        (SpectrumBranch::SingleArm, 1, arm_len)
    } else {
        // large_g_beta is increasing in g, so the admissible g form a prefix.
        let (mut lo, mut hi) = (g0, g_max);
        while lo < hi {
            let mid = lo + (hi - lo).div_ceil(2);
            if large_g_beta(mid as f64)? <= target.beta {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        let arm_len = (lg + (2.0 * (lo as f64).log2()).sqrt()).ceil() as usize;
        (SpectrumBranch::ManyArms, lo, arm_len)
    };
    let spec = BouquetSpec::new(n, g, arm_len).map_err(|e| Error::pre(format!("infeasible: {e}")))?;
    if 2 * g * arm_len > n {
        return Err(Error::pre(format!("infeasible: 2gL = {} exceeds n", 2 * g * arm_len)));
    }
    let prediction = match branch {
        SpectrumBranch::SingleArm => bouquet_prediction_small(n, g, arm_len, 0.5, knobs).ok(),
        SpectrumBranch::ManyArms => bouquet_prediction_large_g(n, g, arm_len, knobs).ok(),
    };
    Ok(SpectrumChoice { target, branch, spec, prediction })
}

/// Bound on the probability that a vertex within distance `d` of every
/// other vertex is unpebblable under geometric counts of mean `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceBound {
    /// `ceil(n^(1/d) - 1)`.
    pub fan: u64,
    /// `2^(d-1) + fan - 1`.
    pub flips: f64,
    /// The closed form, clamped to 1.
    pub bound: f64,
    /// The large-deviation form `exp(-flips * Omega)` it is derived from.
    pub sharper: f64,
}

pub fn distlem_bound(n: u64, d: u32, alpha: f64) -> Result<DistanceBound> {
    if n < 2 {
        return Err(Error::pre(format!("need n >= 2, got {n}")));
    }
    if d < 2 {
        return Err(Error::pre(format!("need d >= 2, got {d}")));
    }
    if !(alpha > 0.0) {
        return Err(Error::pre(format!("need alpha > 0, got {alpha}")));
    }
    // Least m with (m + 1)^d >= n, computed without rounding.
    let reaches = |m: u64| -> bool {
        let mut acc: u128 = 1;
        for _ in 0..d {
            acc = acc.saturating_mul(m as u128 + 1);
            if acc >= n as u128 {
                return true;
            }
        }
        false
    };
    let (mut lo, mut hi) = (0u64, n);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if reaches(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let fan = lo;
    let m = fan as f64;
    let flips = (d as f64 - 1.0).exp2() + m - 1.0;
    let ph = phi(alpha)?;
    if m * (1.0 + ph) <= flips {
        return Ok(DistanceBound { fan, flips, bound: 1.0, sharper: 1.0 });
    }
    let bound = (m * (E * flips / (m * (1.0 + ph))).ln()).exp().min(1.0);
    let p = 1.0 / (1.0 + ph);
    let pp = m / flips;
    let omega = pp * (pp / p).ln() + (1.0 - pp) * ((1.0 - pp) / (1.0 - p)).ln();
    let sharper = (-flips * omega).exp().min(1.0);
    Ok(DistanceBound { fan, flips, bound, sharper })
}

/// `(sqrt(n ln 2), beta(n) (1 - (log2 n)^(-1/4))^(-1) n)`, the range every
/// geometric pebbling threshold falls in for large `n`.
pub fn global_bounds(n: usize) -> Result<(f64, f64)> {
    if n < 3 {
        return Err(Error::pre(format!("global bounds need n >= 3, got {n}")));
    }
    let nf = n as f64;
    let lg = nf.log2();
    let lower = (nf * LN_2).sqrt();
    let shrink = 1.0 - lg.powf(-0.25);
    let upper = large_g_beta(nf)? / shrink * nf;
    Ok((lower, upper))
}

/// Geometric parameter of the lower-bound construction at `n`.
pub fn geolb_p(n: u64) -> f64 {
    1.0 / (1.0 + (LN_2 / n as f64).sqrt())
}

/// `(1 - (1-p)^2)^n - (p(1-p))^n`: probability that no vertex has two
/// pebbles and some vertex has none.
pub fn geolb_q(n: u64, p: f64) -> f64 {
    let q = 1.0 - p;
    let nf = n as f64;
    (nf * (-(q * q)).ln_1p()).exp() - (nf * (p * q).ln()).exp()
}
