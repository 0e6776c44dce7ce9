//! Random multisets on a base set of size `n`: uniform over the compositions
//! of a fixed total `T`, and the product of `n` geometric laws with total
//! mean `x`. Monotone families are upward-closed sets of multisets given by a
//! membership oracle.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};
use crate::graphs::Graph;
use crate::mc::{McConfig, McRng, Proportion};
use crate::numeric::{binomial_big, ln_binomial};
use crate::pebbling::{PebbleDistribution, SolveMethod, Solver};

pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

const SERIES_LEVEL_CAP: u64 = 100_000;

/// Geometric law `P(k) = p (1-p)^k` on the nonnegative integers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricParams {
    p: f64,
    /// `ln(1 - p)`.
    log_q: f64,
    /// `-1 / ln(1 - p)`.
    scale: f64,
    /// `-1 / ln p`, the scale of zero runs.
    zero_run_scale: f64,
}

impl GeometricParams {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::pre(format!("geometric parameter {p} not in (0, 1]")));
        }
        let log_q = (-p).ln_1p();
        Ok(Self { p, log_q, scale: -1.0 / log_q, zero_run_scale: -1.0 / p.ln() })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Per-coordinate law when `n` coordinates share the total mean `x`.
    pub fn for_total_mean(n: usize, x: f64) -> Result<Self> {
        if n == 0 || !(x >= 0.0) || !x.is_finite() {
            return Err(Error::pre(format!("need n >= 1 and finite x >= 0, got n={n}, x={x}")));
        }
        Self::new(1.0 / (1.0 + x / n as f64))
    }

    pub fn mean(&self) -> f64 {
        1.0 / self.p - 1.0
    }

    pub fn pmf(&self, k: u64) -> f64 {
        if self.p == 1.0 {
            return if k == 0 { 1.0 } else { 0.0 };
        }
        self.p * (k as f64 * self.log_q).exp()
    }

    /// Inverse-CDF draw from `u` in `(0, 1]`; nondecreasing as `p` falls.
    pub fn quantile(&self, u: f64) -> u64 {
        if self.p >= 1.0 {
            return 0;
        }
        let k = (u.ln() / self.log_q).floor();
        if k >= u64::MAX as f64 {
            u64::MAX
        } else {
            k as u64
        }
    }

    /// Draw from a standard exponential `e`: `floor(e / -ln(1-p))`, which
    /// equals `quantile(exp(-e))`.
    pub fn from_exponential(&self, e: f64) -> u64 {
        if self.p >= 1.0 {
            return 0;
        }
        let k = (e * self.scale).floor();
        if k >= u64::MAX as f64 {
            u64::MAX
        } else {
            k as u64
        }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> u64 {
        self.from_exponential(rng.sample(Exp1))
    }
}

/// An upward-closed family of multisets on a base set of `base_size()`
/// elements.
pub trait MonotoneFamily: Sync {
    fn base_size(&self) -> usize;

    fn contains(&self, f: &[u64]) -> Result<bool>;

    fn excludes_empty(&self) -> Result<bool> {
        Ok(!self.contains(&vec![0; self.base_size()])?)
    }
}

/// Distributions that solve the pebbling problem on a graph.
#[derive(Debug, Clone)]
pub struct Solvability {
    solver: Solver,
}

impl Solvability {
    pub fn new(graph: Graph, method: SolveMethod) -> Result<Self> {
        Ok(Self { solver: Solver::new(graph, method)? })
    }

    pub fn graph(&self) -> &Graph {
        self.solver.graph()
    }
}

impl MonotoneFamily for Solvability {
    fn base_size(&self) -> usize {
        self.solver.graph().vertex_count()
    }

    fn contains(&self, f: &[u64]) -> Result<bool> {
        self.solver.is_solvable(f)
    }
}

/// `f(coord) >= k`.
#[derive(Debug, Clone, Copy)]
pub struct AtLeast {
    pub n: usize,
    pub coord: usize,
    pub k: u64,
}

impl MonotoneFamily for AtLeast {
    fn base_size(&self) -> usize {
        self.n
    }

    fn contains(&self, f: &[u64]) -> Result<bool> {
        Ok(f[self.coord] >= self.k)
    }
}

/// `sum f >= k`.
#[derive(Debug, Clone, Copy)]
pub struct TotalAtLeast {
    pub n: usize,
    pub k: u64,
}

impl MonotoneFamily for TotalAtLeast {
    fn base_size(&self) -> usize {
        self.n
    }

    fn contains(&self, f: &[u64]) -> Result<bool> {
        Ok(f.iter().sum::<u64>() >= self.k)
    }
}

/// Upward closure of a set of generators; empty generators give the empty
/// family.
#[derive(Debug, Clone)]
pub struct UpperSet {
    n: usize,
    generators: Vec<Vec<u64>>,
}

impl UpperSet {
    pub fn new(n: usize, generators: Vec<Vec<u64>>) -> Result<Self> {
        if let Some(bad) = generators.iter().find(|g| g.len() != n) {
            return Err(Error::pre(format!("generator {bad:?} does not have {n} coordinates")));
        }
        Ok(Self { n, generators })
    }

    pub fn everything(n: usize) -> Self {
        Self { n, generators: vec![vec![0; n]] }
    }

    pub fn nothing(n: usize) -> Self {
        Self { n, generators: Vec::new() }
    }

    /// `f >= base` coordinatewise.
    pub fn dominating(base: Vec<u64>) -> Self {
        Self { n: base.len(), generators: vec![base] }
    }

    pub fn generators(&self) -> &[Vec<u64>] {
        &self.generators
    }
}

impl MonotoneFamily for UpperSet {
    fn base_size(&self) -> usize {
        self.n
    }

    fn contains(&self, f: &[u64]) -> Result<bool> {
        Ok(self.generators.iter().any(|g| g.iter().zip(f).all(|(a, b)| a <= b)))
    }
}

/// Fills `out` with a uniform composition of `total` into `out.len()`
/// nonnegative parts: the gaps between `n-1` bars placed uniformly among
/// `total + n - 1` slots.
pub fn fill_uniform_total(out: &mut [u64], total: u64, rng: &mut impl Rng) {
    let n = out.len();
    assert!(n >= 1, "base size must be positive");
    let bars = n - 1;
    if bars == 0 {
        out[0] = total;
        return;
    }
    let slots = usize::try_from(total).ok().and_then(|t| t.checked_add(bars)).expect("total too large");
    let mut gaps = GapWriter { out, part: 0, last: None };
    if bars.saturating_mul(64) >= slots {
        // Dense: mark the rarer of bars/stars in a bitmap, then scan.
        let marked = bars.min(slots - bars);
        let mut bitmap = vec![0u64; slots.div_ceil(64)];
        let mut placed = 0;
        while placed < marked {
            let s = rng.random_range(0..slots);
            let (w, b) = (s / 64, 1u64 << (s % 64));
            if bitmap[w] & b == 0 {
                bitmap[w] |= b;
                placed += 1;
            }
        }
        let marks_are_bars = marked == bars;
        for (w, &word) in bitmap.iter().enumerate() {
            let mut bits = if marks_are_bars { word } else { !word };
            if !marks_are_bars && w == bitmap.len() - 1 && slots % 64 != 0 {
                bits &= (1u64 << (slots % 64)) - 1;
            }
            while bits != 0 {
                gaps.bar(w * 64 + bits.trailing_zeros() as usize);
                bits &= bits - 1;
            }
        }
    } else {
        let mut positions = rand::seq::index::sample(rng, slots, bars).into_vec();
        positions.sort_unstable();
        for s in positions {
            gaps.bar(s);
        }
    }
    gaps.finish(slots);
}

struct GapWriter<'a> {
    out: &'a mut [u64],
    part: usize,
    last: Option<usize>,
}

impl GapWriter<'_> {
    fn bar(&mut self, s: usize) {
        let start = self.last.map_or(0, |l| l + 1);
        self.out[self.part] = (s - start) as u64;
        self.part += 1;
        self.last = Some(s);
    }

    fn finish(self, slots: usize) {
        let start = self.last.map_or(0, |l| l + 1);
        debug_assert_eq!(self.part, self.out.len() - 1);
        self.out[self.part] = (slots - start) as u64;
    }
}

pub fn sample_uniform_total(n: usize, total: u64, rng: &mut impl Rng) -> PebbleDistribution {
    let mut out = vec![0; n];
    fill_uniform_total(&mut out, total, rng);
    PebbleDistribution::new(out)
}

/// Below this `P(count > 0)`, draws jump over runs of zeros.
const SPARSE_LIMIT: f64 = 0.2;

pub fn fill_geometric(out: &mut [u64], params: GeometricParams, rng: &mut impl Rng) {
    if params.p >= 1.0 - SPARSE_LIMIT {
        fill_geometric_sparse(out, params, rng);
        return;
    }
    for c in out.iter_mut() {
        *c = params.sample(rng);
    }
}

/// Same law as coordinatewise draws: the run of zeros before each nonzero
/// count is geometric with ratio `p`, and a nonzero count is `1 + Geom(p)`.
fn fill_geometric_sparse(out: &mut [u64], params: GeometricParams, rng: &mut impl Rng) {
    out.fill(0);
    if params.p >= 1.0 {
        return;
    }
    let mut i = 0usize;
    loop {
        let run = (rng.sample::<f64, _>(Exp1) * params.zero_run_scale).floor();
        if run >= (out.len() - i) as f64 {
            return;
        }
        i += run as usize;
        out[i] = 1 + params.sample(rng);
        i += 1;
        if i == out.len() {
            return;
        }
    }
}

pub fn sample_geometric_product(n: usize, x: f64, rng: &mut impl Rng) -> Result<PebbleDistribution> {
    let params = GeometricParams::for_total_mean(n, x)?;
    let mut out = vec![0; n];
    fill_geometric(&mut out, params, rng);
    Ok(PebbleDistribution::new(out))
}

/// `C(T+n-1, n-1)`, the number of compositions of `T` into `n` parts.
pub fn composition_count(n: usize, total: u64) -> BigUint {
    assert!(n >= 1);
    binomial_big(total + n as u64 - 1, n as u64 - 1)
}

/// Compositions of `total` into `n` parts in decreasing lexicographic order,
/// starting from `(total, 0, ..., 0)`.
#[derive(Debug, Clone)]
pub struct Compositions {
    current: Option<Vec<u64>>,
}

impl Iterator for Compositions {
    type Item = Vec<u64>;

    fn next(&mut self) -> Option<Vec<u64>> {
        let out = self.current.take()?;
        let n = out.len();
        let mut next = out.clone();
        if let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| next[i] > 0) {
            let tail = next[n - 1];
            next[n - 1] = 0;
            next[i] -= 1;
            next[i + 1] = tail + 1;
            self.current = Some(next);
        }
        Some(out)
    }
}

pub fn enumerate_compositions(n: usize, total: u64) -> Result<Compositions> {
    enumerate_compositions_capped(n, total, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_compositions_capped(n: usize, total: u64, cap: u64) -> Result<Compositions> {
    if n == 0 {
        return Err(Error::pre("base size must be positive"));
    }
    let size = composition_count(n, total);
    if size > BigUint::from(cap) {
        return Err(Error::EnumerationCap { size: size.to_u128().unwrap_or(u128::MAX), cap });
    }
    let mut first = vec![0; n];
    first[0] = total;
    Ok(Compositions { current: Some(first) })
}

/// Number of members of `family` with total `total`, and the level size.
pub fn count_members(family: &dyn MonotoneFamily, total: u64, cap: u64) -> Result<(u64, u64)> {
    let mut hits = 0u64;
    let mut size = 0u64;
    for f in enumerate_compositions_capped(family.base_size(), total, cap)? {
        size += 1;
        if family.contains(&f)? {
            hits += 1;
        }
    }
    Ok((hits, size))
}

/// `mu_T(M)` as an exact fraction.
pub fn mu_exact(family: &dyn MonotoneFamily, total: u64) -> Result<BigRational> {
    let (hits, size) = count_members(family, total, DEFAULT_ENUMERATION_CAP)?;
    Ok(BigRational::new(BigInt::from(hits), BigInt::from(size)))
}

/// Monte-Carlo `nu_x(M)` with a Wilson interval at `z`.
pub fn nu_estimate(
    family: &dyn MonotoneFamily,
    x: f64,
    samples: u64,
    cfg: &McConfig,
    query: u64,
    z: f64,
) -> Result<Proportion> {
    if samples == 0 {
        return Err(Error::pre("need at least one sample"));
    }
    let n = family.base_size();
    let params = GeometricParams::for_total_mean(n, x)?;
    let hits = count_samples(cfg, query, samples, n, |buf, rng| {
        fill_geometric(buf, params, rng);
        family.contains(buf)
    })?;
    Ok(Proportion::new(hits, samples, z))
}

/// Monte-Carlo `mu_T(M)` with a Wilson interval at `z`.
pub fn mu_estimate(
    family: &dyn MonotoneFamily,
    total: u64,
    samples: u64,
    cfg: &McConfig,
    query: u64,
    z: f64,
) -> Result<Proportion> {
    if samples == 0 {
        return Err(Error::pre("need at least one sample"));
    }
    let n = family.base_size();
    let hits = count_samples(cfg, query, samples, n, |buf, rng| {
        fill_uniform_total(buf, total, rng);
        family.contains(buf)
    })?;
    Ok(Proportion::new(hits, samples, z))
}

/// Counts hits among exactly `samples` draws; the last batch is truncated.
pub(crate) fn count_samples<F>(cfg: &McConfig, query: u64, samples: u64, n: usize, draw: F) -> Result<u64>
where
    F: Fn(&mut [u64], &mut McRng) -> Result<bool> + Sync + Send,
{
    let size = cfg.batch_size;
    let batches = cfg.batches_for(samples);
    let per_batch = cfg.map_batches(query, 0..batches, |rng, b| {
        let take = size.min(samples - b * size);
        let mut buf = vec![0u64; n];
        let mut hits = 0u64;
        for _ in 0..take {
            if draw(&mut buf, rng)? {
                hits += 1;
            }
        }
        Ok(hits)
    });
    per_batch.into_iter().sum()
}

/// `nu_x(M) = sum_T P(total = T) mu_T(M)`: given its total, a product of
/// geometrics is uniform over compositions. Levels are enumerated until the
/// remaining total mass is below `tol`.
pub fn nu_series(family: &dyn MonotoneFamily, x: f64, tol: f64) -> Result<f64> {
    let n = family.base_size();
    let params = GeometricParams::for_total_mean(n, x)?;
    if params.p() == 1.0 {
        return Ok(if family.contains(&vec![0; n])? { 1.0 } else { 0.0 });
    }
    let (p, log_q) = (params.p, params.log_q);
    let mut mass = 0.0;
    let mut value = 0.0;
    let mut total = 0u64;
    while 1.0 - mass > tol {
        // Negative binomial: C(T+n-1, n-1) p^n q^T.
        let log_w = ln_binomial(total + n as u64 - 1, n as u64 - 1)
            + n as f64 * p.ln()
            + total as f64 * log_q;
        let w = log_w.exp();
        let (hits, size) = count_members(family, total, DEFAULT_ENUMERATION_CAP)?;
        if hits == size {
            // Every higher level dominates this one, so it is full too.
            return Ok(value + (1.0 - mass).max(0.0));
        }
        value += w * hits as f64 / size as f64;
        mass += w;
        total += 1;
        if total > SERIES_LEVEL_CAP {
            return Err(Error::Accuracy(format!("series mass {mass} after {SERIES_LEVEL_CAP} levels")));
        }
    }
    Ok(value)
}

/// Exact `mu_T` for `T = 0..=horizon`.
pub fn mu_sequence(family: &dyn MonotoneFamily, horizon: u64) -> Result<Vec<BigRational>> {
    (0..=horizon).map(|t| mu_exact(family, t)).collect()
}

pub(crate) fn is_half_or_more(r: &BigRational) -> bool {
    let two = BigInt::from(2);
    r.numer() * &two >= *r.denom() && !r.denom().is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn rng(seed: u64) -> McRng {
        McRng::seed_from_u64(seed)
    }

    #[test]
    fn composition_order() {
        let all: Vec<_> = enumerate_compositions(2, 2).unwrap().collect();
        assert_eq!(all, vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(enumerate_compositions(3, 0).unwrap().collect::<Vec<_>>(), vec![vec![0, 0, 0]]);
        assert_eq!(enumerate_compositions(3, 3).unwrap().count(), 10);
        assert_eq!(enumerate_compositions(1, 5).unwrap().collect::<Vec<_>>(), vec![vec![5]]);
        let e = enumerate_compositions_capped(4, 10, 100).unwrap_err();
        assert_eq!(e, Error::EnumerationCap { size: 286, cap: 100 });
    }

    #[test]
    fn mu_of_simple_families() {
        let f = AtLeast { n: 2, coord: 0, k: 1 };
        for t in 0..6u64 {
            assert_eq!(mu_exact(&f, t).unwrap(), BigRational::new(t.into(), (t + 1).into()));
        }
        assert_eq!(mu_exact(&UpperSet::everything(3), 4).unwrap(), BigRational::from_integer(1.into()));
        assert!(mu_exact(&UpperSet::nothing(3), 4).unwrap().is_zero());
    }

    #[test]
    fn uniform_sampler_small_cases() {
        let mut r = rng(1);
        assert_eq!(sample_uniform_total(1, 7, &mut r).counts(), &[7]);
        let mut seen = std::collections::HashMap::new();
        for _ in 0..60_000 {
            *seen.entry(sample_uniform_total(3, 2, &mut r).into_counts()).or_insert(0u32) += 1;
        }
        assert_eq!(seen.len(), 6);
        for (_, c) in seen {
            assert!((c as f64 - 10_000.0).abs() < 5.0 * 91.3, "{c}");
        }
    }

    #[test]
    fn sparse_and_dense_paths_agree_on_totals() {
        let mut r = rng(2);
        for (n, t) in [(5, 1000), (1000, 5), (100, 100), (64, 0), (2, 0)] {
            let d = sample_uniform_total(n, t, &mut r);
            assert_eq!(d.total(), t);
            assert_eq!(d.len(), n);
        }
    }

    #[test]
    fn geometric_basics() {
        let g = GeometricParams::for_total_mean(4, 8.0).unwrap();
        assert!((g.mean() - 2.0).abs() < 1e-12);
        assert_eq!(GeometricParams::for_total_mean(3, 0.0).unwrap().quantile(0.3), 0);
        assert!((GeometricParams::new(0.5).unwrap().pmf(0) - 0.5).abs() < 1e-15);
        assert!(GeometricParams::new(0.0).is_err());
        assert_eq!(GeometricParams::new(0.5).unwrap().quantile(1.0), 0);
        assert_eq!(GeometricParams::new(0.5).unwrap().quantile(0.25), 2);
    }

    #[test]
    fn sparse_geometric_fill_has_geometric_marginals() {
        let params = GeometricParams::for_total_mean(50, 5.0).unwrap();
        let mut r = rng(4);
        let mut buf = vec![7u64; 50];
        let mut freq = [0u64; 4];
        let rounds = 20_000;
        for _ in 0..rounds {
            fill_geometric(&mut buf, params, &mut r);
            for &c in &buf {
                freq[(c as usize).min(3)] += 1;
            }
        }
        let draws = (rounds * 50) as f64;
        for (k, &seen) in freq.iter().enumerate().take(3) {
            let expect = params.pmf(k as u64);
            let sigma = (expect * (1.0 - expect) / draws).sqrt();
            assert!((seen as f64 / draws - expect).abs() < 5.0 * sigma, "k={k}");
        }
        let mut empty: [u64; 0] = [];
        fill_geometric(&mut empty, params, &mut r);
    }

    #[test]
    fn series_matches_closed_form() {
        let k1 = Solvability::new(Graph::path(1).unwrap(), SolveMethod::Auto).unwrap();
        for x in [0.1, 1.0, 3.0] {
            assert!((nu_series(&k1, x, 1e-12).unwrap() - x / (1.0 + x)).abs() < 1e-10);
        }
        let total = TotalAtLeast { n: 2, k: 1 };
        let x = 2.0 * (2f64.sqrt() - 1.0);
        assert!((nu_series(&total, x, 1e-13).unwrap() - 0.5).abs() < 1e-10);
    }
}
