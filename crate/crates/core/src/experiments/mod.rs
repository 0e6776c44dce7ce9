//! Experiment drivers. Each returns an [`ExperimentResult`] whose rows come
//! out in input order whatever order the points finish in; CSV output holds
//! no timing, so equal seeds and budgets give byte-equal files.

mod formulas;
mod output;

use std::time::Instant;

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

pub use formulas::{
    bouquet_prediction_large_g, bouquet_prediction_small, distlem_bound, geolb_p, geolb_q, global_bounds,
    large_g_beta, path_threshold_prediction, phi, phi_inv, spectrum_construct, BouquetPrediction, BouquetRegime,
    DistanceBound, Knobs, SpectrumBranch, SpectrumChoice, SpectrumTarget,
};
pub use output::OutputFormat;

use crate::error::{Error, Result};
use crate::graphs::{BouquetSpec, Graph};
#[cfg(feature = "parallel")]
use crate::mc::Execution;
use crate::mc::{McConfig, Proportion};
use crate::multiset::{count_samples, fill_geometric, GeometricParams, MonotoneFamily, Solvability};
use crate::pebbling::SolveMethod;
use crate::thresholds::{geometric_pebbling_threshold, SearchBudget, ThresholdEstimate};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub value: f64,
}

fn col(name: &str, value: f64) -> Column {
    Column { name: name.to_string(), value }
}

/// One experiment point: its inputs, the measurement, and the prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub inputs: Vec<Column>,
    pub estimate: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub prediction: Option<f64>,
    /// Prediction over estimate.
    pub ratio: Option<f64>,
    /// Further derived values, one CSV column each.
    pub extras: Vec<Column>,
    pub samples: u64,
    pub budget_exhausted: bool,
    pub note: String,
}

impl ExperimentRow {
    fn new(inputs: Vec<Column>) -> Self {
        Self {
            inputs,
            estimate: None,
            ci_low: None,
            ci_high: None,
            prediction: None,
            ratio: None,
            extras: Vec::new(),
            samples: 0,
            budget_exhausted: false,
            note: String::new(),
        }
    }

    fn measured(mut self, est: &ThresholdEstimate) -> Self {
        self.estimate = Some(est.value);
        self.ci_low = Some(est.ci_low);
        self.ci_high = Some(est.ci_high);
        self.samples = est.samples_used;
        self.budget_exhausted = est.budget_exhausted;
        self.fill_ratio();
        self
    }

    fn predicted(mut self, prediction: f64) -> Self {
        self.prediction = Some(prediction);
        self.fill_ratio();
        self
    }

    fn fill_ratio(&mut self) {
        if let (Some(p), Some(e)) = (self.prediction, self.estimate) {
            self.ratio = Some(p / e);
        }
    }

    pub fn input(&self, name: &str) -> Option<f64> {
        self.inputs.iter().chain(&self.extras).find(|c| c.name == name).map(|c| c.value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub name: String,
    pub params: serde_json::Value,
    pub knobs: Option<Knobs>,
    pub seed: u64,
    pub rows: Vec<ExperimentRow>,
    pub wall_time_secs: f64,
}

impl ExperimentResult {
    pub fn budget_exhausted(&self) -> bool {
        self.rows.iter().any(|r| r.budget_exhausted)
    }
}

/// Runs `f` on every point, in parallel when `cfg` asks for it, and returns
/// the results in input order.
fn map_points<I, T, F>(cfg: &McConfig, items: &[I], f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if matches!(cfg.execution, Execution::Parallel) {
        return items.par_iter().map(f).collect();
    }
    let _ = cfg;
    items.iter().map(f).collect()
}

/// Geometric pebbling thresholds of paths against the leading-term
/// prediction.
pub fn run_path_experiment(ns: &[usize], budget: &SearchBudget, cfg: &McConfig) -> Result<ExperimentResult> {
    let start = Instant::now();
    if let Some(&n) = ns.iter().find(|&&n| n < 2) {
        return Err(Error::pre(format!("path experiment needs n >= 2, got {n}")));
    }
    let rows = map_points(cfg, ns, |&n| -> Result<ExperimentRow> {
        let graph = Graph::path(n)?;
        let est = geometric_pebbling_threshold(&graph, budget, &cfg.derive(n as u64))?;
        Ok(ExperimentRow::new(vec![col("n", n as f64)])
            .measured(&est)
            .predicted(path_threshold_prediction(n)?))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentResult {
        name: "path".into(),
        params: json!({ "n": ns, "budget": budget }),
        knobs: None,
        seed: cfg.seed,
        rows,
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

/// A bouquet to measure; `eps` selects the short-arm prediction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BouquetInstance {
    pub n: usize,
    pub g: usize,
    pub arm_len: usize,
    pub eps: Option<f64>,
}

impl BouquetInstance {
    pub fn prediction(&self, knobs: &Knobs) -> Result<BouquetPrediction> {
        match self.eps {
            Some(eps) => bouquet_prediction_small(self.n, self.g, self.arm_len, eps, knobs),
            None => bouquet_prediction_large_g(self.n, self.g, self.arm_len, knobs),
        }
    }
}

/// Measured bouquet thresholds against their predicted bands. Instances
/// whose preconditions fail are still measured; the row notes why no
/// prediction is given.
pub fn run_bouquet_experiment(
    instances: &[BouquetInstance],
    knobs: &Knobs,
    budget: &SearchBudget,
    cfg: &McConfig,
) -> Result<ExperimentResult> {
    let start = Instant::now();
    let rows = map_points(cfg, instances, |inst| -> Result<ExperimentRow> {
        let spec = BouquetSpec::new(inst.n, inst.g, inst.arm_len)?;
        let graph = Graph::bouquet(spec)?;
        let salt = (inst.n as u64) ^ ((inst.g as u64) << 24) ^ ((inst.arm_len as u64) << 48);
        let est = geometric_pebbling_threshold(&graph, budget, &cfg.derive(salt))?;
        let inputs = vec![
            col("n", inst.n as f64),
            col("g", inst.g as f64),
            col("L", inst.arm_len as f64),
            col("eps", inst.eps.unwrap_or(0.0)),
        ];
        let mut row = ExperimentRow::new(inputs).measured(&est);
        match inst.prediction(knobs) {
            Ok(p) => {
                row = row.predicted(p.value);
                row.extras = vec![col("beta", p.beta), col("band_low", p.band_low), col("band_high", p.band_high)];
            }
            Err(e) => {
                row.extras = vec![col("beta", f64::NAN), col("band_low", f64::NAN), col("band_high", f64::NAN)];
                row.note = e.to_string();
            }
        }
        Ok(row)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentResult {
        name: "bouquet".into(),
        params: json!({ "instances": instances, "budget": budget }),
        knobs: Some(*knobs),
        seed: cfg.seed,
        rows,
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

/// `count` targets log-spaced across the admissible range for `n`.
pub fn spectrum_grid(n: usize, count: usize) -> Vec<f64> {
    let (lo, hi) = SpectrumTarget::range(n);
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count)
            .map(|i| {
                let f = i as f64 / (count - 1) as f64;
                (lo.ln() + f * (hi.ln() - lo.ln())).exp().clamp(lo, hi)
            })
            .collect(),
    }
}

/// Constructs a bouquet for each target and compares its predicted (and,
/// with `measure`, its measured) threshold with the target.
pub fn run_spectrum_experiment(
    n: usize,
    targets: &[f64],
    knobs: &Knobs,
    measure: Option<&SearchBudget>,
    cfg: &McConfig,
) -> Result<ExperimentResult> {
    let start = Instant::now();
    let rows = map_points(cfg, targets, |&t| -> Result<ExperimentRow> {
        let target = SpectrumTarget::new(n, t)?;
        let choice = spectrum_construct(target, knobs)?;
        let mut row = ExperimentRow::new(vec![col("n", n as f64), col("t", t)]);
        if let Some(budget) = measure {
            let graph = Graph::bouquet(choice.spec)?;
            let est = geometric_pebbling_threshold(&graph, budget, &cfg.derive(t.to_bits()))?;
            row = row.measured(&est);
        }
        let predicted = choice.prediction.map(|p| p.value);
        if let Some(p) = predicted {
            row = row.predicted(p);
        }
        let factor = choice.factor().unwrap_or(f64::NAN);
        let within = factor.is_finite() && factor <= knobs.k && factor >= 1.0 / knobs.k;
        row.extras = vec![
            col("g", choice.spec.g as f64),
            col("L", choice.spec.arm_len as f64),
            col("beta", target.beta),
            col("factor", factor),
            col("within_k", if within { 1.0 } else { 0.0 }),
        ];
        row.note = match (choice.branch, predicted) {
            (SpectrumBranch::SingleArm, Some(_)) => "single_arm".into(),
            (SpectrumBranch::ManyArms, Some(_)) => "many_arms".into(),
            (b, None) => format!("{b:?}: no prediction applies"),
        };
        Ok(row)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentResult {
        name: "spectrum".into(),
        params: json!({ "n": n, "targets": targets, "measure": measure }),
        knobs: Some(*knobs),
        seed: cfg.seed,
        rows,
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeolbRow {
    pub n: u64,
    pub p: f64,
    pub q: f64,
    pub above_half: bool,
}

/// Direct sampling of the lower-bound event at one `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeolbMc {
    pub n: u64,
    pub q: f64,
    /// No vertex holds two pebbles and some vertex holds none.
    pub event: Proportion,
    /// Solvable distributions on the path with `n` vertices.
    pub path_solvable: Proportion,
    /// `(event - q) / sigma`.
    pub z_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeolbScan {
    pub rows: Vec<GeolbRow>,
    /// Least `n` from which `q > 1/2` holds for every `n` up to `search_limit`.
    pub minimal_n: Option<u64>,
    pub search_limit: u64,
    /// Least-squares slope of `ln(q - 1/2)` against `ln n` over the rows.
    pub slope: Option<f64>,
    pub mc: Option<GeolbMc>,
}

pub const GEOLB_SEARCH_LIMIT: u64 = 1 << 20;

pub fn geolb_scan(ns: &[u64], mc: Option<(u64, u64)>, cfg: &McConfig) -> Result<GeolbScan> {
    if ns.contains(&0) {
        return Err(Error::pre("geolb scan needs n >= 1"));
    }
    let rows: Vec<GeolbRow> = ns
        .iter()
        .map(|&n| {
            let p = geolb_p(n);
            let q = geolb_q(n, p);
            GeolbRow { n, p, q, above_half: q > 0.5 }
        })
        .collect();
    let mut minimal_n = None;
    for n in (1..=GEOLB_SEARCH_LIMIT).rev() {
        if geolb_q(n, geolb_p(n)) > 0.5 {
            minimal_n = Some(n);
        } else {
            break;
        }
    }
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.q > 0.5)
        .map(|r| ((r.n as f64).ln(), (r.q - 0.5).ln()))
        .collect();
    let slope = (points.len() >= 2).then(|| {
        let k = points.len() as f64;
        let (mx, my) = (points.iter().map(|p| p.0).sum::<f64>() / k, points.iter().map(|p| p.1).sum::<f64>() / k);
        let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    });
    let mc = match mc {
        Some((n, samples)) => Some(geolb_mc(n, samples, cfg)?),
        None => None,
    };
    Ok(GeolbScan { rows, minimal_n, search_limit: GEOLB_SEARCH_LIMIT, slope, mc })
}

fn geolb_mc(n: u64, samples: u64, cfg: &McConfig) -> Result<GeolbMc> {
    if samples == 0 {
        return Err(Error::pre("need at least one sample"));
    }
    let p = geolb_p(n);
    let q = geolb_q(n, p);
    let params = GeometricParams::new(p)?;
    let len = usize::try_from(n).map_err(|_| Error::pre("n too large"))?;
    let hits = count_samples(cfg, 0, samples, len, |buf, rng| {
        fill_geometric(buf, params, rng);
        Ok(buf.iter().all(|&c| c < 2) && buf.contains(&0))
    })?;
    let event = Proportion::new(hits, samples, 3.0);
    let path = Solvability::new(Graph::path(len)?, SolveMethod::Path)?;
    let solved = count_samples(cfg, 1, samples, len, |buf, rng| {
        fill_geometric(buf, params, rng);
        path.contains(buf)
    })?;
    let sigma = (q * (1.0 - q) / samples as f64).sqrt();
    Ok(GeolbMc {
        n,
        q,
        event,
        path_solvable: Proportion::new(solved, samples, 3.0),
        z_score: (event.estimate - q) / sigma,
    })
}

pub fn run_geolb_experiment(ns: &[u64], mc: Option<(u64, u64)>, cfg: &McConfig) -> Result<ExperimentResult> {
    let start = Instant::now();
    let scan = geolb_scan(ns, mc, cfg)?;
    let mut rows: Vec<ExperimentRow> = scan
        .rows
        .iter()
        .map(|r| {
            let mut row = ExperimentRow::new(vec![col("n", r.n as f64), col("p", r.p)]).predicted(r.q);
            row.extras = vec![col("q_minus_half", r.q - 0.5), col("above_half", if r.above_half { 1.0 } else { 0.0 })];
            row.note = "formula".into();
            row
        })
        .collect();
    if let Some(m) = &scan.mc {
        let mut row = ExperimentRow::new(vec![col("n", m.n as f64), col("p", geolb_p(m.n))]);
        row.estimate = Some(m.event.estimate);
        row.ci_low = Some(m.event.ci_low);
        row.ci_high = Some(m.event.ci_high);
        row.samples = m.event.trials;
        row = row.predicted(m.q);
        row.extras = vec![col("q_minus_half", m.q - 0.5), col("above_half", if m.q > 0.5 { 1.0 } else { 0.0 })];
        row.note = format!("mc z={:.3} path_solvable={}", m.z_score, m.path_solvable.estimate);
        rows.push(row);
    }
    Ok(ExperimentResult {
        name: "geolb".into(),
        params: json!({
            "n": ns,
            "mc": mc,
            "minimal_n": scan.minimal_n,
            "search_limit": scan.search_limit,
            "slope": scan.slope,
        }),
        knobs: None,
        seed: cfg.seed,
        rows,
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}
