//! End-to-end acceptance checks. Each criterion prints one PASS or FAIL line;
//! the test fails if any criterion does.

use std::collections::{BTreeMap, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use hypervis::exact::{exact_chi_mu, max_mutual_visibility, SearchMode};
use hypervis::layered::PropertyCheck;
use hypervis::{
    assemble_lambda_union, check_property_are, check_property_era, interval_middle_sets,
    is_mutual_visibility_set, lll_parameters, subcube_layer, three_layer_obstruction, visible,
    Budget, LayerFamily, ObstacleSet, Subcube, VertexSet,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

fn hypervis(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_hypervis"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn v(n: usize, bits: u64) -> VertexSet {
    VertexSet::new(n, bits).unwrap()
}

fn layer_words(n: usize, k: usize) -> Vec<u64> {
    (0..1u64 << n)
        .filter(|w| w.count_ones() as usize == k)
        .collect()
}

fn family_from(n: usize, k: usize, words: impl IntoIterator<Item = u64>) -> LayerFamily {
    LayerFamily::new(n, k, words.into_iter().map(|w| v(n, w))).unwrap()
}

/// Walks every ordering of the differing coordinates; no shared state.
fn brute_force_visible(a: u64, b: u64, obstacles: &HashSet<u64>) -> bool {
    let remaining = a ^ b;
    if remaining == 0 {
        return true;
    }
    (0..64).filter(|i| remaining >> i & 1 == 1).any(|i| {
        let next = a ^ (1 << i);
        (next == b || !obstacles.contains(&next)) && brute_force_visible(next, b, obstacles)
    })
}

fn color_to(dir: &Path, n: usize, seed: u64, jobs: usize) -> Vec<u8> {
    let path = dir.join(format!("c{n}.json"));
    let out = hypervis(&[
        "color",
        "--n",
        &n.to_string(),
        "--g",
        "3",
        "--seed",
        &seed.to_string(),
        "--jobs",
        &jobs.to_string(),
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "color n={n}: {:?}", out);
    std::fs::read(path).unwrap()
}

fn upper_bound_pipeline() -> String {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let mut sizes = Vec::new();
    for n in [6, 8, 10] {
        let bytes = color_to(dir.path(), n, 1, 1);
        let json: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        let classes: HashSet<u64> = json["classes"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| c.as_u64().unwrap())
            .collect();
        assert_eq!(json["classes"].as_array().unwrap().len(), 1 << n);
        assert!(classes.len() <= 6, "n={n}: {} classes", classes.len());
        let path = dir.path().join(format!("c{n}.json"));
        let out = hypervis(&["verify", path.to_str().unwrap()]);
        assert!(out.status.success(), "verify n={n}: {:?}", out);
        sizes.push(format!("n={n}: {} classes", classes.len()));
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(120), "{elapsed:?}");
    format!(
        "{} verified in {:.1}s",
        sizes.join(", "),
        elapsed.as_secs_f64()
    )
}

fn lll_arithmetic() -> String {
    let r = lll_parameters(14, 7, 3).unwrap();
    // C(6,3) = 20, so p = 2^(1-20); d = 20 * C(7,3) * C(7,3) = 20 * 35 * 35.
    assert_eq!(r.p_log2, -19);
    assert_eq!(r.p, 1.0 / 524_288.0);
    assert_eq!(r.d, 20 * 35 * 35);
    assert_eq!(r.d, 24_500);
    let expected = std::f64::consts::E * 24_501.0 / 524_288.0;
    assert!((r.criterion - expected).abs() < 1e-9);
    assert!(r.satisfied);
    let r20 = lll_parameters(20, 10, 3).unwrap();
    // d = 20 * C(10,3)^2 = 288000; e * 288001 / 2^19 > 1.
    assert_eq!(r20.d, 288_000);
    assert!(!r20.satisfied);
    format!(
        "(14,7,3) criterion {:.6}; (20,10,3) criterion {:.6} unsatisfied",
        r.criterion, r20.criterion
    )
}

fn planted_obstructions() -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC1A1);
    let mut found = 0;
    for _ in 0..100 {
        let n = rng.gen_range(2..=8);
        let dim = rng.gen_range(2..=n.min(4));
        let positions = rand::seq::index::sample(&mut rng, n, dim);
        let free: u64 = positions.iter().map(|i| 1u64 << i).sum();
        let base: u64 = (0..n)
            .filter(|&i| free >> i & 1 == 0 && rng.gen_bool(0.5))
            .map(|i| 1u64 << i)
            .sum();
        let sub = Subcube::new(v(n, base), v(n, free)).unwrap();
        let mut layers: Vec<usize> = sub.weight_range().collect();
        while layers.len() > 3 {
            layers.remove(rng.gen_range(0..layers.len()));
        }
        let mut words: Vec<u64> = layers
            .iter()
            .flat_map(|&k| subcube_layer(&sub, k).unwrap().into_members())
            .map(|x| x.bits())
            .collect();
        let inside = |w: u64| w & !free == base;
        words.extend((0..1u64 << n).filter(|&w| !inside(w) && rng.gen_bool(0.2)));
        let m = ObstacleSet::new(n, words.into_iter().map(|w| v(n, w))).unwrap();
        let witness = three_layer_obstruction(&m, &sub).unwrap();
        if witness.is_some() && !is_mutual_visibility_set(&m).unwrap() {
            found += 1;
        }
    }
    assert_eq!(found, 100);
    format!("{found}/100 planted obstructions found and refuted")
}

fn equivalence() -> String {
    let g = 3;
    // n = 6 leaves only k = 3: all 2^20 subfamilies of the middle layer.
    let words = layer_words(6, 3);
    let exhaustive_disagreements: usize = (0u32..1 << words.len())
        .into_par_iter()
        .filter(|mask| {
            let family = family_from(
                6,
                3,
                words
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, &w)| w),
            );
            let era = check_property_era(&family, g, Budget::Standard).unwrap();
            let are = check_property_are(&family, g).unwrap();
            era.holds() != are.holds()
        })
        .count();
    assert_eq!(exhaustive_disagreements, 0);

    let mut summary = vec![format!("n=6 exhaustive {} families", 1u32 << words.len())];
    for n in 7..=10usize {
        let trials = 10_000u64;
        let (disagreements, violated): (usize, usize) = (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(n as u64 * 1_000_003 + t);
                let k = rng.gen_range(g..=n - g);
                // Dense families are where violations live.
                let density = [0.5, 0.9, 0.97, 0.995, 1.0][rng.gen_range(0..5)];
                let family = family_from(
                    n,
                    k,
                    layer_words(n, k)
                        .into_iter()
                        .filter(|_| rng.gen_bool(density)),
                );
                let era = check_property_era(&family, g, Budget::Standard).unwrap();
                let are = check_property_are(&family, g).unwrap();
                (
                    usize::from(era.holds() != are.holds()),
                    usize::from(!are.holds()),
                )
            })
            .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
        assert_eq!(disagreements, 0, "n = {n}");
        assert!(
            violated > 0 && violated < trials as usize,
            "n = {n}: {violated}"
        );
        summary.push(format!("n={n} {trials} random"));
    }
    format!("zero disagreements ({})", summary.join(", "))
}

/// Drops one middle set of a covered block until no block is covered.
fn repair(rng: &mut ChaCha8Rng, mut family: LayerFamily, g: usize) -> LayerFamily {
    while let PropertyCheck::Violated { a, b } = check_property_are(&family, g).unwrap() {
        let middles = interval_middle_sets(a, b, family.k()).unwrap();
        let drop = middles.members()[rng.gen_range(0..middles.len())];
        family = family_from(
            family.n(),
            family.k(),
            family.iter().filter(|&t| t != drop).map(|t| t.bits()),
        );
    }
    family
}

fn residue_unions() -> String {
    let (n, g) = (8, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut passed = [0; 3];
    for lambda in 1..=g {
        for _ in 0..100 {
            let mut families = BTreeMap::new();
            for k in (0..=n).filter(|k| k % g == lambda % g) {
                let density = rng.gen_range(0.3..1.0);
                let raw = family_from(
                    n,
                    k,
                    layer_words(n, k)
                        .into_iter()
                        .filter(|_| rng.gen_bool(density)),
                );
                let family = repair(&mut rng, raw, g);
                assert!(check_property_era(&family, g, Budget::Standard)
                    .unwrap()
                    .holds());
                families.insert(k, family);
            }
            let union = assemble_lambda_union(&families, g, lambda).unwrap();
            let m = ObstacleSet::new(n, union).unwrap();
            if is_mutual_visibility_set(&m).unwrap() {
                passed[lambda - 1] += 1;
            }
        }
    }
    assert_eq!(passed, [100; 3]);
    "100/100 unions mutual-visibility for each residue 1, 2, 3".to_string()
}

fn exact_values() -> String {
    let mu = |n| {
        max_mutual_visibility(n, SearchMode::Exact, Budget::Standard)
            .unwrap()
            .mu
    };
    let chi = |n| exact_chi_mu(n, Budget::Standard).unwrap().chi;
    assert_eq!(mu(1), 2);
    assert_eq!(chi(1), 1);
    assert_eq!(mu(2), 3);
    assert_eq!(chi(2), 2);
    let start = Instant::now();
    let mu4 = mu(4);
    assert!(mu4 > (0.186f64 * 16.0).floor() as usize);
    assert!(start.elapsed() < Duration::from_secs(600));
    format!("mu(Q1)=2 chi(Q1)=1 mu(Q2)=3 chi(Q2)=2 mu(Q4)={mu4}")
}

fn visibility_oracle() -> String {
    let n = 6;
    let checks: usize = (0..1000u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(7_000 + t);
            let density = rng.gen_range(0.05..0.8);
            let words: HashSet<u64> = (0..1u64 << n).filter(|_| rng.gen_bool(density)).collect();
            let obstacles = ObstacleSet::new(n, words.iter().map(|&w| v(n, w))).unwrap();
            let mut checked = 0;
            for a in 0..1u64 << n {
                for b in a..1u64 << n {
                    let dp = visible(v(n, a), v(n, b), &obstacles).unwrap();
                    assert_eq!(dp, brute_force_visible(a, b, &words), "{a:#x} {b:#x}");
                    checked += 1;
                }
            }
            checked
        })
        .sum();
    format!("{checks} pair checks, zero disagreements")
}

fn determinism() -> String {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    for n in [6, 8, 10] {
        let a = color_to(first.path(), n, 1, 1);
        let b = color_to(second.path(), n, 1, 1);
        let c = color_to(second.path(), n, 1, 4);
        assert_eq!(a, b, "n = {n}");
        assert_eq!(a, c, "n = {n} with four workers");
    }
    "coloring files byte-identical across runs and worker counts".to_string()
}

type Criterion = (&'static str, fn() -> String);

#[test]
fn acceptance() {
    let criteria: [Criterion; 8] = [
        ("upper-bound pipeline", upper_bound_pipeline),
        ("local lemma arithmetic", lll_arithmetic),
        ("planted obstructions", planted_obstructions),
        ("escape property equivalence", equivalence),
        ("residue unions", residue_unions),
        ("exact small values", exact_values),
        ("visibility oracle", visibility_oracle),
        ("determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        match catch_unwind(AssertUnwindSafe(check)) {
            Ok(detail) => println!(
                "criterion {}: PASS  {name}: {detail} [{:.1}s]",
                i + 1,
                start.elapsed().as_secs_f64()
            ),
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                println!("criterion {}: FAIL  {name}: {msg}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
