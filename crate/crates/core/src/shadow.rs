//! Lower shadows of sets of multisets and exhaustive checks of the
//! shadow-based inequalities between consecutive uniform levels. Everything
//! here is exact integer or rational arithmetic.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mc::McConfig;
use crate::multiset::{enumerate_compositions, mu_sequence, MonotoneFamily};
use crate::numeric::{binomial_big, binomial_u128};

/// A finite set of multisets on a base set of `n` elements.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultisetSet {
    n: usize,
    members: BTreeSet<Vec<u64>>,
}

impl MultisetSet {
    pub fn new(n: usize, members: impl IntoIterator<Item = Vec<u64>>) -> Result<Self> {
        let members: BTreeSet<_> = members.into_iter().collect();
        if let Some(bad) = members.iter().find(|m| m.len() != n) {
            return Err(Error::pre(format!("member {bad:?} does not have {n} coordinates")));
        }
        Ok(Self { n, members })
    }

    /// All compositions of `total`.
    pub fn level(n: usize, total: u64) -> Result<Self> {
        Self::new(n, enumerate_compositions(n, total)?)
    }

    pub fn base_size(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, f: &[u64]) -> bool {
        self.members.contains(f)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Vec<u64>> {
        self.members.iter()
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.members.is_subset(&other.members)
    }

    /// The common total of all members, if there is one.
    pub fn total(&self) -> Option<u64> {
        let mut totals = self.members.iter().map(|m| m.iter().sum::<u64>());
        let first = totals.next()?;
        totals.all(|t| t == first).then_some(first)
    }
}

/// `{ f : f + e_b in S for some b }`.
pub fn lower_shadow(set: &MultisetSet) -> MultisetSet {
    let mut out = BTreeSet::new();
    for g in &set.members {
        for b in 0..set.n {
            if g[b] > 0 {
                let mut f = g.clone();
                f[b] -= 1;
                out.insert(f);
            }
        }
    }
    MultisetSet { n: set.n, members: out }
}

/// `s = sum_{i<r} C(t-i-1+d_i, t-i)` with `d_0 >= ... >= d_{r-1} > 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CascadeRep {
    pub t: u64,
    pub d: Vec<u64>,
    pub value: u128,
}

impl CascadeRep {
    pub fn evaluate(&self) -> Option<u128> {
        self.d.iter().enumerate().try_fold(0u128, |acc, (i, &d)| {
            let level = self.t - i as u64;
            acc.checked_add(binomial_u128(level - 1 + d, level)?)
        })
    }
}

/// Greedy cascade: at level `t - i` take the largest `d` with
/// `C(t-i-1+d, t-i)` at most the remainder.
pub fn cascade_representation(s: u128, t: u64) -> Result<CascadeRep> {
    if s == 0 || t == 0 {
        return Err(Error::pre("cascade needs s > 0 and t > 0"));
    }
    let mut rem = s;
    let mut d = Vec::new();
    let mut level = t;
    while rem > 0 {
        if level == 0 {
            return Err(Error::pre("cascade did not terminate"));
        }
        let fits = |d: u64| binomial_u128(level - 1 + d, level).is_some_and(|c| c <= rem);
        let mut hi = 1u64;
        while fits(hi) {
            hi *= 2;
        }
        let mut lo = hi / 2;
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if fits(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        rem -= binomial_u128(level - 1 + lo, level).expect("fits");
        d.push(lo);
        level -= 1;
    }
    Ok(CascadeRep { t, d, value: s })
}

/// Inputs and verdict of one evaluation of the lemma behind the shadow
/// bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub p_below_one: bool,
    pub reduced_inequality: bool,
}

impl LemmaCheck {
    pub fn holds(&self) -> bool {
        self.p_below_one && self.reduced_inequality
    }
}

/// With `p = sum C(t-i-1+d_i, t-i) / C(t-1+n, t)` and
/// `q = sum C(t-i-2+d_i, t-i-1) / C(t-2+n, t-1)`, checks `0 <= p < 1` and
/// `(t-1+p) q >= p t`.
pub fn verify_lemma1_inequality(t: u64, n: u64, d: &[u64]) -> Result<LemmaCheck> {
    if t == 0 || n == 0 {
        return Err(Error::pre("t and n must be positive"));
    }
    if d.len() as u64 > t {
        return Err(Error::pre("need r <= t"));
    }
    if d.windows(2).any(|w| w[0] < w[1]) || d.iter().any(|&x| x == 0) {
        return Err(Error::pre("d must be positive and nonincreasing"));
    }
    if d.first().is_some_and(|&d0| n <= d0) {
        return Err(Error::pre("need n > d_0"));
    }
    let mut a = BigUint::zero();
    let mut b = BigUint::zero();
    for (i, &di) in d.iter().enumerate() {
        let level = t - i as u64;
        a += binomial_big(level - 1 + di, level);
        b += binomial_big(level + di - 2, level - 1);
    }
    let dp = binomial_big(t - 1 + n, t);
    let dq = binomial_big(t + n - 2, t - 1);
    let lhs = (BigUint::from(t - 1) * &dp + &a) * &b;
    let rhs = &a * BigUint::from(t) * &dq;
    Ok(LemmaCheck { p_below_one: a < dp, reduced_inequality: lhs >= rhs })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifyMode {
    Exhaustive,
    Sampled,
}

impl std::str::FromStr for VerifyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(Self::Exhaustive),
            "sampled" => Ok(Self::Sampled),
            _ => Err(Error::Parse(format!("unknown mode `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShadowReport {
    pub n: usize,
    #[serde(rename = "T")]
    pub t: u64,
    pub mode: VerifyMode,
    pub cases: u64,
    pub violations: u64,
    /// Cases where the bound holds with equality.
    pub tight: u64,
    /// Up to a few violating sets, as lists of members.
    pub examples: Vec<Vec<Vec<u64>>>,
}

/// Largest level size for which all subsets are enumerated.
pub const EXHAUSTIVE_LEVEL_CAP: usize = 20;

/// Precomputed shadows of the single members of level `T+1`, as bitmasks
/// over level `T`.
struct LevelPair {
    upper: Vec<Vec<u64>>,
    shadows: Vec<Vec<u64>>,
    lower_len: usize,
    t: u64,
}

impl LevelPair {
    fn new(n: usize, t: u64) -> Result<Self> {
        let lower: Vec<Vec<u64>> = enumerate_compositions(n, t)?.collect();
        let index: HashMap<&[u64], usize> = lower.iter().enumerate().map(|(i, f)| (f.as_slice(), i)).collect();
        let upper: Vec<Vec<u64>> = enumerate_compositions(n, t + 1)?.collect();
        let words = lower.len().div_ceil(64);
        let shadows = upper
            .iter()
            .map(|g| {
                let mut mask = vec![0u64; words];
                let mut f = g.clone();
                for b in 0..n {
                    if g[b] > 0 {
                        f[b] -= 1;
                        let i = index[f.as_slice()];
                        mask[i / 64] |= 1 << (i % 64);
                        f[b] += 1;
                    }
                }
                mask
            })
            .collect();
        Ok(Self { upper, shadows, lower_len: lower.len(), t })
    }

    /// `Some(tight)` if the bound holds for the subset `chosen` of level
    /// `T+1`, `None` if it is violated.
    fn check(&self, chosen: &[usize], scratch: &mut [u64]) -> Option<bool> {
        let m = self.upper.len() as u128;
        let s = chosen.len() as u128;
        if s == 0 || s == m {
            return Some(false);
        }
        scratch.iter_mut().for_each(|w| *w = 0);
        for &i in chosen {
            for (w, m) in scratch.iter_mut().zip(&self.shadows[i]) {
                *w |= m;
            }
        }
        let shadow = scratch.iter().map(|w| w.count_ones() as u128).sum::<u128>();
        // x* = (T+1) s / (m - s); need |dS| / |level T| >= x* / (T + x*),
        // i.e. |dS| (T (m - s) + (T+1) s) >= (T+1) s |level T|. The empty
        // and full sets are the trivial cases (x* = 0 and x* infinite).
        let t = self.t as u128;
        let denom = t * (m - s) + (t + 1) * s;
        let lhs = shadow * denom;
        let rhs = (t + 1) * s * self.lower_len as u128;
        (lhs >= rhs).then_some(lhs == rhs)
    }
}

/// Exact evaluation of the shadow bound for one set `S` inside level `T+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadowBoundCheck {
    pub t: u64,
    /// `mu_{T+1}(S)`.
    pub mu_set: BigRational,
    /// `mu_T(dS)`.
    pub mu_shadow: BigRational,
    /// `x/(T+x)` at the largest `x` with `mu_{T+1}(S) >= x/(T+1+x)`.
    pub bound: BigRational,
}

impl ShadowBoundCheck {
    pub fn holds(&self) -> bool {
        self.mu_shadow >= self.bound
    }

    pub fn tight(&self) -> bool {
        self.mu_shadow == self.bound && !self.mu_set.is_zero() && !self.mu_set.is_one()
    }
}

/// Computes the shadow bound for `set`, whose members must share a total
/// `T+1 >= 1`. Uses [`lower_shadow`] directly, independently of the bitmask
/// search in [`verify_theorem1`].
pub fn shadow_bound_check(set: &MultisetSet) -> Result<ShadowBoundCheck> {
    let total = set.total().ok_or_else(|| Error::pre("set is empty or mixes totals"))?;
    if total == 0 {
        return Err(Error::pre("members must have total at least 1"));
    }
    let t = total - 1;
    let n = set.base_size() as u64;
    let frac = |a: usize, b: BigUint| BigRational::new(BigUint::from(a).into(), b.into());
    let mu_set = frac(set.len(), binomial_big(total + n - 1, n - 1));
    let mu_shadow = frac(lower_shadow(set).len(), binomial_big(t + n - 1, n - 1));
    let bound = if mu_set.is_one() {
        BigRational::one()
    } else {
        let tr = BigRational::from_integer(t.into());
        let x = (&tr + BigRational::one()) * &mu_set / (BigRational::one() - &mu_set);
        if x.is_zero() {
            BigRational::zero()
        } else {
            &x / (tr + &x)
        }
    };
    Ok(ShadowBoundCheck { t, mu_set, mu_shadow, bound })
}

/// Checks `mu_T(dS) >= x/(T+x)` at the largest `x` with
/// `mu_{T+1}(S) >= x/(T+1+x)`, over subsets `S` of level `T+1`.
pub fn verify_theorem1(n: usize, t: u64, mode: VerifyMode, trials: u64, cfg: &McConfig) -> Result<ShadowReport> {
    if n == 0 {
        return Err(Error::pre("base size must be positive"));
    }
    let pair = LevelPair::new(n, t)?;
    let m = pair.upper.len();
    let mut report = ShadowReport { n, t, mode, cases: 0, violations: 0, tight: 0, examples: Vec::new() };
    let words = pair.lower_len.div_ceil(64);
    let record = |report: &mut ShadowReport, chosen: &[usize], verdict: Option<bool>| {
        report.cases += 1;
        match verdict {
            Some(true) => report.tight += 1,
            Some(false) => {}
            None => {
                report.violations += 1;
                if report.examples.len() < 4 {
                    report.examples.push(chosen.iter().map(|&i| pair.upper[i].clone()).collect());
                }
            }
        }
    };
    match mode {
        VerifyMode::Exhaustive => {
            if m > EXHAUSTIVE_LEVEL_CAP {
                return Err(Error::EnumerationCap { size: 1u128 << m.min(127), cap: 1 << EXHAUSTIVE_LEVEL_CAP });
            }
            let chunk = 1u64 << m.saturating_sub(8);
            let chunks = (1u64 << m).div_ceil(chunk);
            let results = cfg.map_batches(0, 0..chunks, |_, c| {
                let mut scratch = vec![0u64; words];
                let mut chosen = Vec::with_capacity(m);
                let mut out = Vec::new();
                for mask in c * chunk..((c + 1) * chunk).min(1 << m) {
                    chosen.clear();
                    chosen.extend((0..m).filter(|&i| mask >> i & 1 == 1));
                    out.push((mask, pair.check(&chosen, &mut scratch)));
                }
                out
            });
            let mut chosen = Vec::new();
            for (mask, verdict) in results.into_iter().flatten() {
                chosen.clear();
                chosen.extend((0..m).filter(|&i| mask >> i & 1 == 1));
                record(&mut report, &chosen, verdict);
            }
        }
        VerifyMode::Sampled => {
            let results = cfg.map_batches(0, 0..trials, |rng, _| {
                let chosen = random_level_subset(&pair.upper, t + 1, rng);
                let mut scratch = vec![0u64; words];
                let verdict = pair.check(&chosen, &mut scratch);
                (chosen, verdict)
            });
            for (chosen, verdict) in results {
                record(&mut report, &chosen, verdict);
            }
        }
    }
    Ok(report)
}

/// Half the time a uniformly random subset of a random density, otherwise
/// the top-level slice of the upward closure of a few random generators.
fn random_level_subset(level: &[Vec<u64>], total: u64, rng: &mut impl Rng) -> Vec<usize> {
    if rng.random_bool(0.5) {
        let density: f64 = rng.random();
        return (0..level.len()).filter(|_| rng.random_bool(density)).collect();
    }
    let n = level[0].len();
    let generators: Vec<Vec<u64>> = (0..rng.random_range(1..=3))
        .map(|_| {
            let g_total = rng.random_range(0..=total);
            let mut g = vec![0u64; n];
            for _ in 0..g_total {
                g[rng.random_range(0..n)] += 1;
            }
            g
        })
        .collect();
    (0..level.len())
        .filter(|&i| generators.iter().any(|g| g.iter().zip(&level[i]).all(|(a, b)| a <= b)))
        .collect()
}

/// Shape of `mu_0, ..., mu_k` for a monotone family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum MuShape {
    AllZero,
    /// Zero before `rise`, strictly increasing from there, one from `ones` on.
    ZerosRiseOnes { rise: u64, ones: u64 },
    /// Zero before `rise`, strictly increasing and below one afterwards.
    ZerosRise { rise: u64 },
}

pub fn classify_mu_sequence(mu: &[BigRational]) -> Result<MuShape> {
    let zero = BigRational::zero();
    let one = BigRational::one();
    let Some(rise) = mu.iter().position(|m| *m != zero) else {
        return Ok(MuShape::AllZero);
    };
    let ones = mu.iter().position(|m| *m == one);
    let end = ones.unwrap_or(mu.len());
    if ones.is_some_and(|o| o < rise) || mu[end..].iter().any(|m| *m != one) {
        return Err(Error::pre(format!("mu sequence fits no admissible shape: {mu:?}")));
    }
    let strict_end = (end + 1).min(mu.len());
    if mu[rise..strict_end].windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::pre(format!("mu sequence is not strictly increasing: {mu:?}")));
    }
    Ok(match ones {
        Some(o) => MuShape::ZerosRiseOnes { rise: rise as u64, ones: o as u64 },
        None => MuShape::ZerosRise { rise: rise as u64 },
    })
}

pub fn mu_shape_classify(family: &dyn MonotoneFamily, horizon: u64) -> Result<MuShape> {
    classify_mu_sequence(&mu_sequence(family, horizon)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransportReport {
    pub pairs: u64,
    pub violations: u64,
}

/// For all `U <= T <= horizon`: `mu_T(M) <= T/(T+x)` implies
/// `mu_U(M) <= U/(U+x)` (with `0/0 = 1`), and `mu_U(M) >= U/(U+x)` implies
/// `mu_T(M) >= T/(T+x)` for positive `U`. Each is checked at the extremal `x`.
pub fn verify_transport(family: &dyn MonotoneFamily, horizon: u64) -> Result<TransportReport> {
    let mu = mu_sequence(family, horizon)?;
    let mut report = TransportReport { pairs: 0, violations: 0 };
    let one = BigRational::one();
    let zero = BigRational::zero();
    for t in 0..=horizon as usize {
        for u in 0..=t {
            report.pairs += 1;
            let (mt, mu_u) = (&mu[t], &mu[u]);
            let (tr, ur) = (BigRational::from_integer(t.into()), BigRational::from_integer(u.into()));
            // Downward: largest x with mu_T <= T/(T+x) is T(1-mu_T)/mu_T.
            let down_ok = if *mt == zero {
                // Every x qualifies; the limit forces mu_U = 0 unless U = 0.
                u == 0 || *mu_u == zero
            } else if t == 0 {
                // mu_0 <= 0/(0+x) only for x = 0, where 0/0 = 1 allows anything.
                true
            } else {
                let x = &tr * (&one - mt) / mt;
                u == 0 && x == zero || mu_u * (&ur + &x) <= ur
            };
            // Upward: smallest x with mu_U >= U/(U+x) is U(1-mu_U)/mu_U.
            let up_ok = if u == 0 || *mu_u == zero {
                true
            } else {
                let x = &ur * (&one - mu_u) / mu_u;
                mt * (&tr + &x) >= tr
            };
            if !(down_ok && up_ok) {
                report.violations += 1;
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiset::{AtLeast, UpperSet};

    fn set(n: usize, members: &[&[u64]]) -> MultisetSet {
        MultisetSet::new(n, members.iter().map(|m| m.to_vec())).unwrap()
    }

    #[test]
    fn shadows() {
        assert_eq!(lower_shadow(&set(2, &[&[2, 0]])), set(2, &[&[1, 0]]));
        assert_eq!(lower_shadow(&set(2, &[&[1, 1]])), set(2, &[&[0, 1], &[1, 0]]));
        assert_eq!(lower_shadow(&MultisetSet::level(3, 4).unwrap()), MultisetSet::level(3, 3).unwrap());
        assert!(lower_shadow(&set(2, &[&[0, 0]])).is_empty());
    }

    #[test]
    fn cascades() {
        assert_eq!(cascade_representation(5, 3).unwrap().d, vec![2, 1]);
        assert_eq!(cascade_representation(1, 1).unwrap().d, vec![1]);
        assert_eq!(cascade_representation(35, 4).unwrap().d, vec![4]);
        assert!(cascade_representation(0, 3).is_err());
    }

    #[test]
    fn lemma_edge_cases() {
        assert!(verify_lemma1_inequality(3, 4, &[]).unwrap().holds());
        assert!(verify_lemma1_inequality(1, 4, &[2]).unwrap().holds());
        assert!(verify_lemma1_inequality(2, 3, &[3]).is_err());
        assert!(verify_lemma1_inequality(2, 5, &[1, 2]).is_err());
    }

    #[test]
    fn theorem1_hand_case() {
        let pair = LevelPair::new(2, 1).unwrap();
        let i = pair.upper.iter().position(|g| g == &vec![2, 0]).unwrap();
        let mut scratch = vec![0u64; 1];
        assert_eq!(pair.check(&[i], &mut scratch), Some(true));
        assert_eq!(pair.check(&[], &mut scratch), Some(false));
        let direct = shadow_bound_check(&set(2, &[&[2, 0]])).unwrap();
        assert_eq!(direct.bound, BigRational::new(1.into(), 2.into()));
        assert!(direct.holds() && direct.tight());
    }

    #[test]
    fn shapes() {
        assert_eq!(mu_shape_classify(&UpperSet::nothing(2), 5).unwrap(), MuShape::AllZero);
        assert_eq!(
            mu_shape_classify(&UpperSet::everything(2), 5).unwrap(),
            MuShape::ZerosRiseOnes { rise: 0, ones: 0 }
        );
        assert_eq!(mu_shape_classify(&AtLeast { n: 2, coord: 0, k: 2 }, 8).unwrap(), MuShape::ZerosRise { rise: 2 });
        let half = BigRational::new(1.into(), 2.into());
        assert!(classify_mu_sequence(&[BigRational::zero(), half.clone(), half]).is_err());
    }
}
