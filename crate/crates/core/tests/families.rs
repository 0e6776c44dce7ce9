use std::collections::HashMap;

use num_traits::ToPrimitive;
use pebblex_core::mc::McConfig;
use pebblex_core::multiset::{
    enumerate_compositions, mu_exact, nu_estimate, nu_series, sample_uniform_total, AtLeast, MonotoneFamily,
    Solvability, TotalAtLeast, UpperSet,
};
use pebblex_core::pebbling::SolveMethod;
use pebblex_core::shadow::{shadow_bound_check, verify_transport, MultisetSet};
use pebblex_core::thresholds::{
    chebyshev_bracket, geometric_threshold, geometric_threshold_series, uniform_threshold_exact,
    uniform_threshold_mc, SearchBudget,
};
use pebblex_core::Graph;
use rand::{Rng, SeedableRng};

use pebblex_core::mc::McRng;

fn path_family(n: usize) -> Solvability {
    Solvability::new(Graph::path(n).unwrap(), SolveMethod::Path).unwrap()
}

#[test]
fn uniform_sampler_is_uniform_on_small_levels() {
    let mut rng = McRng::seed_from_u64(11);
    for n in 1..=3usize {
        for t in 0..=4u64 {
            let level: Vec<Vec<u64>> = enumerate_compositions(n, t).unwrap().collect();
            let draws = 20_000u64;
            let mut seen: HashMap<Vec<u64>, u64> = HashMap::new();
            for _ in 0..draws {
                *seen.entry(sample_uniform_total(n, t, &mut rng).counts().to_vec()).or_default() += 1;
            }
            assert!(seen.keys().all(|k| level.contains(k)));
            let expected = draws as f64 / level.len() as f64;
            let chi2: f64 = level
                .iter()
                .map(|f| {
                    let o = *seen.get(f).unwrap_or(&0) as f64;
                    (o - expected).powi(2) / expected
                })
                .sum();
            let df = (level.len() - 1) as f64;
            assert!(chi2 <= df + 5.0 * (2.0 * df).sqrt() + 1e-9, "n={n} T={t} chi2={chi2}");
        }
    }
}

#[test]
fn nu_vanishes_at_zero_and_grows() {
    let fams: Vec<Box<dyn MonotoneFamily>> = vec![
        Box::new(path_family(4)),
        Box::new(AtLeast { n: 3, coord: 1, k: 2 }),
        Box::new(UpperSet::dominating(vec![2, 1])),
    ];
    for f in &fams {
        assert!(f.excludes_empty().unwrap());
        assert_eq!(nu_series(f.as_ref(), 0.0, 1e-12).unwrap(), 0.0);
        let mut last = 0.0;
        for i in 1..20 {
            let v = nu_series(f.as_ref(), 0.5 * i as f64, 1e-12).unwrap();
            assert!(v + 1e-12 >= last);
            last = v;
        }
    }
}

#[test]
fn nu_monte_carlo_agrees_with_series() {
    let f = path_family(4);
    let cfg = McConfig::new(3);
    for (q, x) in [1.0, 3.0, 6.0, 10.0].into_iter().enumerate() {
        let exact = nu_series(&f, x, 1e-12).unwrap();
        let est = nu_estimate(&f, x, 100_000, &cfg, q as u64, 4.0).unwrap();
        assert!(est.ci_low <= exact && exact <= est.ci_high, "x={x}: {exact} vs {est:?}");
    }
}

#[test]
fn uniform_mc_interval_covers_exact_threshold() {
    let fams: Vec<Box<dyn MonotoneFamily>> = vec![
        Box::new(path_family(4)),
        Box::new(path_family(6)),
        Box::new(TotalAtLeast { n: 3, k: 7 }),
        Box::new(AtLeast { n: 2, coord: 0, k: 3 }),
    ];
    let budget = SearchBudget::new(1 << 20).with_per_query(1 << 15);
    for (i, f) in fams.iter().enumerate() {
        let exact = uniform_threshold_exact(f.as_ref()).unwrap() as f64;
        let est = uniform_threshold_mc(f.as_ref(), &budget, &McConfig::new(40 + i as u64)).unwrap();
        assert!(est.contains(exact), "family {i}: {exact} vs {est:?}");
    }
}

#[test]
fn geometric_search_brackets_the_series_value() {
    let f = path_family(5);
    let series = geometric_threshold_series(&f, 1e-12, 1e-9).unwrap();
    let nu = nu_series(&f, series, 1e-12).unwrap();
    assert!((nu - 0.5).abs() < 1e-6);
    let budget = SearchBudget::new(1 << 19).with_per_query(1 << 14).with_rel_tol(1e-2);
    let est = geometric_threshold(&f, &budget, &McConfig::new(5)).unwrap();
    let slack = 0.05 * series;
    assert!(est.ci_low - slack <= series && series <= est.ci_high + slack, "{series} vs {est:?}");
}

#[test]
fn chebyshev_bracket_holds_where_defined() {
    let fams: Vec<Box<dyn MonotoneFamily>> = vec![
        Box::new(TotalAtLeast { n: 4, k: 12 }),
        Box::new(TotalAtLeast { n: 3, k: 12 }),
        Box::new(UpperSet::dominating(vec![3, 3, 3])),
        Box::new(path_family(4)),
    ];
    let mut checked = 0;
    for f in &fams {
        let g = geometric_threshold_series(f.as_ref(), 1e-12, 1e-10).unwrap();
        let n = f.base_size();
        let s = (g + g * g / n as f64).sqrt();
        if g / s <= std::f64::consts::SQRT_2 {
            continue;
        }
        let theta = 0.5 * (std::f64::consts::SQRT_2 + g / s);
        let b = chebyshev_bracket(g, n, theta).unwrap();
        let t = uniform_threshold_exact(f.as_ref()).unwrap() as f64;
        assert!(b.contains(t), "{t} not in {b:?}");
        checked += 1;
    }
    assert!(checked >= 2);
}

#[test]
fn transport_holds_on_random_upper_sets() {
    let mut rng = McRng::seed_from_u64(9);
    for _ in 0..60 {
        let n = rng.random_range(1..=3usize);
        let gens: Vec<Vec<u64>> = (0..rng.random_range(0..=3))
            .map(|_| (0..n).map(|_| rng.random_range(0..4)).collect())
            .collect();
        let f = UpperSet::new(n, gens.clone()).unwrap();
        let r = verify_transport(&f, 8).unwrap();
        assert_eq!(r.violations, 0, "{gens:?}");
        assert!(r.pairs > 0);
    }
}

#[test]
fn shadow_bound_on_random_subsets() {
    let mut rng = McRng::seed_from_u64(21);
    for _ in 0..300 {
        let n = rng.random_range(1..=4usize);
        let t = rng.random_range(0..=4u64);
        let level: Vec<Vec<u64>> = enumerate_compositions(n, t + 1).unwrap().collect();
        let keep = rng.random::<f64>();
        let members: Vec<Vec<u64>> = level.into_iter().filter(|_| rng.random::<f64>() < keep).collect();
        if members.is_empty() {
            continue;
        }
        let set = MultisetSet::new(n, members).unwrap();
        let check = shadow_bound_check(&set).unwrap();
        assert!(check.holds(), "{set:?}");
    }
}

#[test]
fn exact_mu_matches_level_counts() {
    let f = path_family(3);
    let mu = mu_exact(&f, 4).unwrap().to_f64().unwrap();
    let level: Vec<Vec<u64>> = enumerate_compositions(3, 4).unwrap().collect();
    let hits = level.iter().filter(|z| f.contains(z).unwrap()).count();
    assert!((mu - hits as f64 / level.len() as f64).abs() < 1e-15);
}
