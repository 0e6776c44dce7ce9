//! Thresholds of monotone families: the least total `T` with
//! `mu_T(M) >= 1/2` (uniform) and the total mean `x` with `nu_x(M) = 1/2`
//! (geometric).
//!
//! Monte-Carlo searches ask "is the probability at least 1/2?" with a
//! sequential test: samples are drawn in doubling stages until a Wilson
//! interval excludes 1/2 or the per-query cap is reached. A query that stays
//! undecided never moves a proven bound, so the reported interval only
//! widens.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::Graph;
use crate::mc::{z_two_sided, McConfig, McRng, Proportion};
use crate::multiset::{
    count_members, count_samples, fill_geometric, fill_uniform_total, mu_exact, nu_series, GeometricParams,
    MonotoneFamily, Solvability, DEFAULT_ENUMERATION_CAP,
};
use crate::numeric::binomial_u128;
use crate::pebbling::SolveMethod;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimateMethod {
    Exact,
    Series,
    Mc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEstimate {
    pub value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub samples_used: u64,
    pub seed: u64,
    pub method: EstimateMethod,
    /// Queries that hit the per-query cap without excluding 1/2.
    pub undecided_queries: u32,
    /// The global sample budget ran out before the search finished.
    pub budget_exhausted: bool,
}

impl ThresholdEstimate {
    fn exact(value: f64, method: EstimateMethod) -> Self {
        Self {
            value,
            ci_low: value,
            ci_high: value,
            samples_used: 0,
            seed: 0,
            method,
            undecided_queries: 0,
            budget_exhausted: false,
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.ci_low <= v && v <= self.ci_high
    }
}

/// Sample limits for one threshold search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchBudget {
    /// Samples over the whole search.
    pub total: u64,
    /// Samples for one yes/no query before it is declared undecided.
    pub per_query: u64,
    /// Size of the first stage of each query; stages then double.
    pub first_stage: u64,
    /// Error probability of each query.
    pub alpha: f64,
    /// Geometric search stops once `hi/lo - 1` drops below this.
    pub rel_tol: f64,
}

impl SearchBudget {
    pub fn new(total: u64) -> Self {
        Self { total, per_query: (total / 8).max(64), first_stage: 64, alpha: 0.01, rel_tol: 1e-4 }
    }

    pub fn with_per_query(mut self, per_query: u64) -> Self {
        self.per_query = per_query.max(self.first_stage);
        self
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    fn stages(&self) -> u32 {
        let mut stages = 1;
        let mut cum = self.first_stage;
        while cum < self.per_query {
            cum *= 2;
            stages += 1;
        }
        stages
    }
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self::new(1 << 24)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Decision {
    Below,
    Above,
    Undecided,
}

struct Sequential<'a> {
    budget: &'a SearchBudget,
    cfg: &'a McConfig,
    z: f64,
    used: u64,
    next_query: u64,
    undecided: u32,
    exhausted: bool,
}

impl<'a> Sequential<'a> {
    fn new(budget: &'a SearchBudget, cfg: &'a McConfig) -> Result<Self> {
        if budget.first_stage == 0 || budget.total < budget.first_stage {
            return Err(Error::pre("budget smaller than one stage"));
        }
        if !(budget.alpha > 0.0 && budget.alpha < 1.0) {
            return Err(Error::pre("alpha must lie in (0, 1)"));
        }
        let z = z_two_sided(budget.alpha / budget.stages() as f64);
        Ok(Self { budget, cfg, z, used: 0, next_query: 0, undecided: 0, exhausted: false })
    }

    /// Is the event probability at least 1/2?
    fn query<F>(&mut self, n: usize, draw: F) -> Result<(Decision, Proportion)>
    where
        F: Fn(&mut [u64], &mut McRng) -> Result<bool> + Sync + Send,
    {
        let query = self.next_query;
        self.next_query += 1;
        let (mut hits, mut trials) = (0u64, 0u64);
        let mut stage = self.budget.first_stage;
        let mut stage_index = 0u64;
        loop {
            if self.used + stage > self.budget.total {
                self.exhausted = true;
                self.undecided += 1;
                return Ok((Decision::Undecided, Proportion::new(hits, trials, self.z)));
            }
            hits += count_samples(self.cfg, (query << 8) | stage_index, stage, n, &draw)?;
            trials += stage;
            self.used += stage;
            let p = Proportion::new(hits, trials, self.z);
            if p.ci_low > 0.5 {
                return Ok((Decision::Above, p));
            }
            if p.ci_high < 0.5 {
                return Ok((Decision::Below, p));
            }
            if trials >= self.budget.per_query {
                self.undecided += 1;
                return Ok((Decision::Undecided, p));
            }
            stage = trials;
            stage_index += 1;
        }
    }
}

fn check_nonempty(family: &dyn MonotoneFamily) -> Result<()> {
    let big = vec![1u64 << 40; family.base_size()];
    if family.contains(&big)? {
        Ok(())
    } else {
        Err(Error::pre("family appears empty; the threshold is undefined"))
    }
}

/// Least `T` with `mu_T(M) >= 1/2`, by exhaustive enumeration. The search
/// gallops and bisects, relying on `mu_T` being nondecreasing in `T`.
pub fn uniform_threshold_exact(family: &dyn MonotoneFamily) -> Result<u64> {
    uniform_threshold_exact_capped(family, DEFAULT_ENUMERATION_CAP)
}

pub fn uniform_threshold_exact_capped(family: &dyn MonotoneFamily, cap: u64) -> Result<u64> {
    check_nonempty(family)?;
    let above = |t: u64| -> Result<bool> {
        let (hits, size) = count_members(family, t, cap)?;
        Ok(2 * hits >= size)
    };
    integer_search(|t| above(t).map(|a| if a { Decision::Above } else { Decision::Below }.into())).map(|s| s.value)
}

struct IntegerSearch {
    value: u64,
    proven_below: Option<u64>,
    proven_above: Option<u64>,
}

/// A query answer plus the direction to steer in; undecided answers steer
/// by their point estimate but prove nothing.
#[derive(Debug, Clone, Copy)]
struct Answer {
    decision: Decision,
    above: bool,
}

impl From<Decision> for Answer {
    fn from(decision: Decision) -> Self {
        Self { decision, above: decision == Decision::Above }
    }
}

/// Least `t` answered above, assuming answers are monotone in `t`.
fn integer_search(mut ask: impl FnMut(u64) -> Result<Answer>) -> Result<IntegerSearch> {
    let mut proven_below = None;
    let mut proven_above: Option<u64> = None;
    let mut record = |t: u64, a: Answer| {
        match a.decision {
            Decision::Below => proven_below = proven_below.max(Some(t)),
            Decision::Above => proven_above = Some(proven_above.map_or(t, |p| p.min(t))),
            Decision::Undecided => {}
        }
        a.above
    };
    let first = ask(0)?;
    if record(0, first) {
        return Ok(IntegerSearch { value: 0, proven_below, proven_above });
    }
    let (mut lo, mut hi) = (0u64, 1u64);
    loop {
        let a = ask(hi)?;
        if record(hi, a) {
            break;
        }
        lo = hi;
        hi = hi.checked_mul(2).ok_or_else(|| Error::pre("threshold search overflowed"))?;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let a = ask(mid)?;
        if record(mid, a) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(IntegerSearch { value: hi, proven_below, proven_above })
}

/// Monte-Carlo uniform threshold. The interval runs from one past the
/// largest `T` proven below 1/2 to the least `T` proven above it.
pub fn uniform_threshold_mc(family: &dyn MonotoneFamily, budget: &SearchBudget, cfg: &McConfig) -> Result<ThresholdEstimate> {
    check_nonempty(family)?;
    let n = family.base_size();
    let mut seq = Sequential::new(budget, cfg)?;
    let search = integer_search(|t| {
        // A single composition per level: one membership test decides.
        if n == 1 {
            return Ok(if family.contains(&[t])? { Decision::Above } else { Decision::Below }.into());
        }
        if seq.exhausted {
            return Ok(Answer { decision: Decision::Undecided, above: true });
        }
        let (decision, p) = seq.query(n, |buf, rng| {
            fill_uniform_total(buf, t, rng);
            family.contains(buf)
        })?;
        Ok(Answer { decision, above: decision == Decision::Above || (decision == Decision::Undecided && p.estimate >= 0.5) })
    })?;
    let ci_low = search.proven_below.map_or(0, |b| b + 1).min(search.value);
    let ci_high = search.proven_above.unwrap_or(search.value).max(search.value);
    Ok(ThresholdEstimate {
        value: search.value as f64,
        ci_low: ci_low as f64,
        ci_high: ci_high as f64,
        samples_used: seq.used,
        seed: cfg.seed,
        method: EstimateMethod::Mc,
        undecided_queries: seq.undecided,
        budget_exhausted: seq.exhausted,
    })
}

const BRACKET_DOUBLINGS: u32 = 64;

/// Total mean `x` with `nu_x(M) = 1/2`, by stochastic bisection in `log x`
/// from the bracket `[n 2^-20, n 2^20]`, widened by doubling when needed.
/// An undecided query ends the search with its bracket as the interval.
pub fn geometric_threshold(family: &dyn MonotoneFamily, budget: &SearchBudget, cfg: &McConfig) -> Result<ThresholdEstimate> {
    check_nonempty(family)?;
    if !family.excludes_empty()? {
        return Err(Error::pre("family contains the empty multiset; nu_x is 1 for every x"));
    }
    let n = family.base_size();
    let mut seq = Sequential::new(budget, cfg)?;
    let ask = |seq: &mut Sequential<'_>, x: f64| -> Result<Decision> {
        let params = GeometricParams::for_total_mean(n, x)?;
        Ok(seq
            .query(n, |buf, rng| {
                fill_geometric(buf, params, rng);
                family.contains(buf)
            })?
            .0)
    };
    let base = n as f64;
    let (mut lo, mut hi) = (base * 2f64.powi(-20), base * 2f64.powi(20));
    let mut done = None;
    for _ in 0..BRACKET_DOUBLINGS {
        match ask(&mut seq, lo)? {
            Decision::Below => break,
            Decision::Above => {
                hi = hi.min(lo);
                lo /= 2.0;
            }
            Decision::Undecided => {
                done = Some(lo);
                break;
            }
        }
    }
    if done.is_none() {
        for _ in 0..BRACKET_DOUBLINGS {
            match ask(&mut seq, hi)? {
                Decision::Above => break,
                Decision::Below => {
                    lo = lo.max(hi);
                    hi *= 2.0;
                }
                Decision::Undecided => {
                    done = Some(hi);
                    break;
                }
            }
        }
    }
    let value = match done {
        Some(x) => x,
        None => loop {
            let mid = (lo * hi).sqrt();
            if hi / lo - 1.0 < budget.rel_tol {
                break mid;
            }
            match ask(&mut seq, mid)? {
                Decision::Below => lo = mid,
                Decision::Above => hi = mid,
                Decision::Undecided => break mid,
            }
        },
    };
    // Tighten each side of an undecided point until a probe is undecided too.
    if value > lo && value < hi {
        while !seq.exhausted && value / lo - 1.0 >= budget.rel_tol {
            let probe = (lo * value).sqrt();
            match ask(&mut seq, probe)? {
                Decision::Below => lo = probe,
                Decision::Above => hi = hi.min(probe),
                Decision::Undecided => break,
            }
        }
        while !seq.exhausted && hi / value - 1.0 >= budget.rel_tol {
            let probe = (value * hi).sqrt();
            match ask(&mut seq, probe)? {
                Decision::Above => hi = probe,
                Decision::Below => lo = lo.max(probe),
                Decision::Undecided => break,
            }
        }
    }
    let (ci_low, ci_high) = (lo.min(value), hi.max(value));
    Ok(ThresholdEstimate {
        value,
        ci_low,
        ci_high,
        samples_used: seq.used,
        seed: cfg.seed,
        method: EstimateMethod::Mc,
        undecided_queries: seq.undecided,
        budget_exhausted: seq.exhausted,
    })
}

/// Geometric threshold of solvability on `graph`, as a total mean `alpha * n`.
pub fn geometric_pebbling_threshold(graph: &Graph, budget: &SearchBudget, cfg: &McConfig) -> Result<ThresholdEstimate> {
    let family = Solvability::new(graph.clone(), SolveMethod::Auto)?;
    geometric_threshold(&family, budget, cfg)
}

/// Uniform threshold of solvability on `graph`: exact when the enumeration
/// is small, Monte-Carlo otherwise.
pub fn uniform_pebbling_threshold(graph: &Graph, budget: &SearchBudget, cfg: &McConfig) -> Result<ThresholdEstimate> {
    let family = Solvability::new(graph.clone(), SolveMethod::Auto)?;
    uniform_threshold(&family, budget, cfg)
}

pub fn uniform_threshold(family: &dyn MonotoneFamily, budget: &SearchBudget, cfg: &McConfig) -> Result<ThresholdEstimate> {
    match uniform_threshold_exact_capped(family, budget.total.min(DEFAULT_ENUMERATION_CAP)) {
        Ok(t) => Ok(ThresholdEstimate::exact(t as f64, EstimateMethod::Exact)),
        Err(Error::EnumerationCap { .. }) => uniform_threshold_mc(family, budget, cfg),
        Err(e) => Err(e),
    }
}

/// Deterministic geometric threshold from the level series; small base
/// sizes only. Accurate to about `tol` in `nu` and `rel_tol` in `x`.
pub fn geometric_threshold_series(family: &dyn MonotoneFamily, tol: f64, rel_tol: f64) -> Result<f64> {
    check_nonempty(family)?;
    if !family.excludes_empty()? {
        return Err(Error::pre("family contains the empty multiset"));
    }
    let n = family.base_size() as f64;
    let (mut lo, mut hi) = (n * 2f64.powi(-20), n);
    while nu_series(family, hi, tol)? < 0.5 {
        lo = hi;
        hi *= 2.0;
    }
    while hi / lo - 1.0 > rel_tol {
        let mid = (lo * hi).sqrt();
        if nu_series(family, mid, tol)? < 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo * hi).sqrt())
}

/// Two-sided Chebyshev bound on the uniform threshold from the geometric
/// threshold `T'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChebyshevBracket {
    pub geometric: f64,
    pub base_size: usize,
    pub s: f64,
    pub theta: f64,
    pub lower: f64,
    pub upper: f64,
}

impl ChebyshevBracket {
    pub fn contains(&self, t: f64) -> bool {
        self.lower <= t && t <= self.upper
    }
}

pub fn chebyshev_bracket(geometric: f64, base_size: usize, theta: f64) -> Result<ChebyshevBracket> {
    if base_size == 0 || !(geometric > 0.0) {
        return Err(Error::pre("need a positive threshold and base size"));
    }
    let s = (geometric + geometric * geometric / base_size as f64).sqrt();
    if !(theta > std::f64::consts::SQRT_2 && theta < geometric / s) {
        return Err(Error::pre(format!("theta {theta} outside (sqrt 2, {})", geometric / s)));
    }
    let t2 = theta * theta;
    let lower = (geometric - theta * s).ceil() * (1.0 - 2.0 / t2);
    let upper = 1.0 + (geometric + theta * s).floor() * (1.0 + 2.0 / (t2 - 2.0));
    Ok(ChebyshevBracket { geometric, base_size, s, theta, lower, upper })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub index: usize,
    pub base_size: usize,
    pub uniform: ThresholdEstimate,
    pub geometric: ThresholdEstimate,
    pub ratio: f64,
}

/// Uniform and geometric thresholds side by side for a sequence of families.
pub fn threshold_ratio_table(
    families: &[&dyn MonotoneFamily],
    budget: &SearchBudget,
    cfg: &McConfig,
) -> Result<Vec<RatioRow>> {
    families
        .iter()
        .enumerate()
        .map(|(index, family)| {
            let sub = cfg.derive(index as u64);
            let uniform = uniform_threshold(*family, budget, &sub)?;
            let geometric = geometric_threshold(*family, budget, &sub.derive(1))?;
            Ok(RatioRow {
                index,
                base_size: family.base_size(),
                ratio: uniform.value / geometric.value,
                uniform,
                geometric,
            })
        })
        .collect()
}

/// Number of compositions at level `t`, if it fits.
pub fn level_size(n: usize, t: u64) -> Option<u128> {
    binomial_u128(t + n as u64 - 1, n as u64 - 1)
}

/// `mu_T(M) >= 1/2` exactly.
pub fn mu_at_least_half(family: &dyn MonotoneFamily, t: u64) -> Result<bool> {
    Ok(crate::multiset::is_half_or_more(&mu_exact(family, t)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiset::{AtLeast, TotalAtLeast, UpperSet};

    #[test]
    fn exact_uniform_small_families() {
        assert_eq!(uniform_threshold_exact(&AtLeast { n: 2, coord: 0, k: 1 }).unwrap(), 1);
        assert_eq!(uniform_threshold_exact(&UpperSet::everything(3)).unwrap(), 0);
        assert!(uniform_threshold_exact(&UpperSet::nothing(3)).is_err());
        assert_eq!(uniform_threshold_exact(&TotalAtLeast { n: 4, k: 7 }).unwrap(), 7);
    }

    #[test]
    fn chebyshev_arithmetic() {
        let b = chebyshev_bracket(100.0, 100, 2.0).unwrap();
        let s = 200f64.sqrt();
        assert!((b.s - s).abs() < 1e-12);
        assert_eq!(b.lower, (100.0 - 2.0 * s).ceil() * 0.5);
        assert_eq!(b.upper, 1.0 + (100.0 + 2.0 * s).floor() * 2.0);
        assert!(chebyshev_bracket(100.0, 100, 100.0 / s).is_err());
        assert!(chebyshev_bracket(100.0, 100, 1.4).is_err());
    }

    #[test]
    fn mc_uniform_on_exact_tie() {
        let cfg = McConfig::new(3);
        let est = uniform_threshold_mc(&AtLeast { n: 2, coord: 0, k: 1 }, &SearchBudget::new(1 << 20), &cfg).unwrap();
        assert!(est.contains(1.0));
        assert!(est.ci_low >= 1.0 && est.ci_high <= 2.0);
        let all = uniform_threshold_mc(&UpperSet::everything(2), &SearchBudget::new(1 << 16), &cfg).unwrap();
        assert_eq!((all.value, all.ci_low, all.ci_high), (0.0, 0.0, 0.0));
    }

    #[test]
    fn series_threshold_closed_forms() {
        let total = TotalAtLeast { n: 2, k: 1 };
        let x = geometric_threshold_series(&total, 1e-13, 1e-10).unwrap();
        assert!((x - 2.0 * (2f64.sqrt() - 1.0)).abs() < 1e-8);
        let both = UpperSet::dominating(vec![1, 1]);
        let x = geometric_threshold_series(&both, 1e-13, 1e-10).unwrap();
        assert!((x - 2.0 / (2f64.sqrt() - 1.0)).abs() < 1e-7);
    }
}
