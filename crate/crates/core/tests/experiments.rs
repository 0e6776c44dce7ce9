use std::f64::consts::{E, LN_2};

use pebblex_core::experiments::{
    bouquet_prediction_large_g, bouquet_prediction_small, distlem_bound, geolb_p, geolb_q, geolb_scan,
    global_bounds, large_g_beta, path_threshold_prediction, run_geolb_experiment, run_path_experiment,
    spectrum_construct, Knobs, OutputFormat, SpectrumBranch, SpectrumTarget,
};
use pebblex_core::mc::{McConfig, McRng};
use pebblex_core::multiset::{fill_geometric, GeometricParams};
use pebblex_core::pebbling::{pebblable_vertices, PebbleDistribution, SolveMethod};
use pebblex_core::thresholds::SearchBudget;
use pebblex_core::Graph;
use rand::{Rng, SeedableRng};

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs()
}

#[test]
fn golden_prediction_values() {
    let expected = E * 10f64.sqrt().exp2() * 1024.0 / 10f64.sqrt();
    let path = path_threshold_prediction(1024).unwrap();
    assert!(close(path, expected, 1e-14));
    assert!(close(path, 7880.156975449, 1e-11));
    let beta = large_g_beta(64.0).unwrap();
    assert!(close(beta, 12f64.sqrt().exp2() * E / (2.0 * 6f64.sqrt()), 1e-14));
    assert!(close(beta, 6.123325630019, 1e-11));
    let (lo, hi) = global_bounds(1 << 16).unwrap();
    assert!(close(lo, (65536.0 * LN_2).sqrt(), 1e-14));
    assert!(close(hi, large_g_beta(65536.0).unwrap() * 65536.0 / 0.5, 1e-14));
    assert!(global_bounds(2).is_err());
}

#[test]
fn bouquet_prediction_preconditions() {
    let knobs = Knobs { g0: 3, ..Knobs::default() };
    let p = bouquet_prediction_large_g(4096, 64, 16, &knobs).unwrap();
    assert!(p.band_low < p.value && p.value < p.band_high);
    assert!(close(p.value, p.beta * 4096.0, 1e-14));
    assert!(bouquet_prediction_large_g(4096, 64, 16, &Knobs::default()).is_err());
    assert!(bouquet_prediction_large_g(4096, 64, 40, &knobs).is_err());
    let s = bouquet_prediction_small(1 << 17, 1, 9, 0.5, &Knobs::default()).unwrap();
    assert!(close(s.band_high / s.band_low, 3.0, 1e-12));
    assert!(bouquet_prediction_small(1 << 16, 1, 9, 0.5, &Knobs::default()).is_err());
}

#[test]
fn spectrum_ends_use_each_branch() {
    let knobs = Knobs { g0: 4, l0: 2, ..Knobs::default() };
    let n = 1 << 16;
    let (lo, hi) = SpectrumTarget::range(n);
    let low = spectrum_construct(SpectrumTarget::new(n, lo).unwrap(), &knobs).unwrap();
    assert_eq!(low.branch, SpectrumBranch::SingleArm);
    assert_eq!(low.spec.g, 1);
    let high = spectrum_construct(SpectrumTarget::new(n, hi).unwrap(), &knobs).unwrap();
    assert_eq!(high.branch, SpectrumBranch::ManyArms);
    assert!(high.spec.g >= 4);
    assert!(SpectrumTarget::new(n, hi * 1.01).is_err());
    let default = spectrum_construct(SpectrumTarget::new(n, lo).unwrap(), &Knobs::default());
    assert!(default.is_err());
}

/// A tree in which every vertex is within `d` of vertex 0.
fn shallow_tree(n: usize, d: u32, rng: &mut McRng) -> Graph {
    let mut depth = vec![0u32];
    let mut edges = Vec::new();
    for v in 1..n {
        let parent = loop {
            let u = rng.random_range(0..v);
            if depth[u] < d {
                break u;
            }
        };
        depth.push(depth[parent] + 1);
        edges.push((parent, v));
    }
    Graph::from_edges(n, &edges).unwrap()
}

#[test]
fn distance_bound_covers_unpebblable_frequency() {
    let mut rng = McRng::seed_from_u64(4);
    let samples = 20_000;
    let mut nontrivial = 0;
    for (n, d, alpha) in [(40usize, 2u32, 10.0), (100, 2, 20.0), (30, 2, 6.0), (60, 3, 8.0), (30, 2, 0.5)] {
        let g = shallow_tree(n, d, &mut rng);
        let bound = distlem_bound(n as u64, d, alpha).unwrap();
        assert!(bound.sharper <= bound.bound + 1e-12);
        let params = GeometricParams::new(1.0 / (1.0 + alpha)).unwrap();
        let mut buf = vec![0u64; n];
        let mut misses = 0u64;
        for _ in 0..samples {
            fill_geometric(&mut buf, params, &mut rng);
            let reach = pebblable_vertices(&g, &PebbleDistribution::new(buf.clone()), SolveMethod::Tree).unwrap();
            misses += u64::from(!reach[0]);
        }
        let freq = misses as f64 / samples as f64;
        let b = bound.sharper;
        let slack = 3.0 * (b * (1.0 - b) / samples as f64).sqrt() + 1e-9;
        assert!(freq <= b + slack, "n={n} d={d} a={alpha}: {freq} > {bound:?}");
        if bound.bound < 1.0 {
            nontrivial += 1;
        }
    }
    assert!(nontrivial >= 2);
}

#[test]
fn distance_bound_fan_is_exact() {
    assert_eq!(distlem_bound(1000, 3, 1.0).unwrap().fan, 9);
    assert_eq!(distlem_bound(1001, 3, 1.0).unwrap().fan, 10);
    assert_eq!(distlem_bound(2, 2, 1.0).unwrap().fan, 1);
    assert!(distlem_bound(10, 1, 1.0).is_err());
}

#[test]
fn geolb_formula_and_sampling() {
    for n in [1u64, 10, 1000, 1 << 20] {
        let q = geolb_q(n, geolb_p(n));
        assert!(q > 0.5 && q < 1.0);
    }
    let n = 1_000_000u64;
    let excess = geolb_q(n, geolb_p(n)) - 0.5;
    assert!(close(excess, LN_2.powf(1.5) / (n as f64).sqrt(), 0.1), "{excess}");
    let scan = geolb_scan(&[64, 256, 1024, 4096], Some((100, 50_000)), &McConfig::new(6)).unwrap();
    assert_eq!(scan.minimal_n, Some(1));
    assert!((scan.slope.unwrap() + 0.5).abs() < 0.1);
    let mc = scan.mc.unwrap();
    assert!(mc.z_score.abs() < 4.0);
    // Solvable distributions lie inside the complement of the event.
    assert!(mc.path_solvable.ci_low <= 1.0 - mc.q + 0.02);
}

#[test]
fn path_measurements_fit_global_bounds() {
    let budget = SearchBudget::new(1 << 20).with_per_query(1 << 13).with_rel_tol(0.02);
    let res = run_path_experiment(&[16, 32], &budget, &McConfig::new(12)).unwrap();
    assert_eq!(res.rows.len(), 2);
    let mut last = 0.0;
    for row in &res.rows {
        let n = row.input("n").unwrap() as usize;
        let est = row.estimate.unwrap();
        let (lo, hi) = global_bounds(n).unwrap();
        assert!(lo <= est && est <= hi, "n={n}: {est} outside [{lo}, {hi}]");
        assert!(est > last);
        last = est;
        assert!(close(row.ratio.unwrap(), row.prediction.unwrap() / est, 1e-12));
    }
}

#[test]
fn csv_and_manifest_layout() {
    let res = run_geolb_experiment(&[10, 100, 1000], None, &McConfig::new(2)).unwrap();
    let csv = res.to_csv().unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 1 + res.rows.len());
    assert!(lines[0].starts_with("n,p,estimate,ci_low,ci_high,prediction,ratio"));
    assert!(lines[0].ends_with("samples,budget_exhausted,note"));
    let width = lines[0].split(',').count();
    assert!(lines.iter().all(|l| l.split(',').count() == width));
    let again = run_geolb_experiment(&[10, 100, 1000], None, &McConfig::new(2)).unwrap();
    assert_eq!(csv, again.to_csv().unwrap());
    let manifest = res.manifest();
    assert_eq!(manifest["seed"], 2);
    assert_eq!(manifest["rows"], 3);

    let dir = std::env::temp_dir().join(format!("pebblex-exp-{}", std::process::id()));
    let (c, m) = res.write_to_dir(&dir).unwrap();
    assert_eq!(std::fs::read_to_string(&c).unwrap(), csv);
    let parsed: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&m).unwrap()).unwrap();
    assert_eq!(parsed["experiment"], res.name.as_str());
    std::fs::remove_dir_all(&dir).unwrap();

    assert_eq!("csv".parse::<OutputFormat>().unwrap(), OutputFormat::Csv);
    assert!("xml".parse::<OutputFormat>().is_err());
}
