#![allow(dead_code)]

use std::collections::HashSet;

use hypervis::{LayerFamily, VertexSet};
use rand::Rng;

/// Visibility by walking every ordering of the coordinates of `a Δ b`.
/// No memoisation: a blocked internal vertex only cuts that branch.
pub fn brute_force_visible(a: u64, b: u64, obstacles: &HashSet<u64>) -> bool {
    fn walk(cur: u64, target: u64, obstacles: &HashSet<u64>) -> bool {
        let remaining = cur ^ target;
        if remaining == 0 {
            return true;
        }
        (0..64).filter(|i| remaining >> i & 1 == 1).any(|i| {
            let next = cur ^ (1 << i);
            (next == target || !obstacles.contains(&next)) && walk(next, target, obstacles)
        })
    }
    walk(a, b, obstacles)
}

/// Counts shortest paths with multiplicity; a second view of the same oracle.
pub fn count_shortest_paths(a: u64, b: u64) -> u64 {
    (1..=(a ^ b).count_ones() as u64).product()
}

pub fn vertex(n: usize, bits: u64) -> VertexSet {
    VertexSet::new(n, bits).unwrap()
}

pub fn random_subset(rng: &mut impl Rng, n: usize, density: f64) -> Vec<u64> {
    (0..1u64 << n).filter(|_| rng.gen_bool(density)).collect()
}

pub fn layer_words(n: usize, k: usize) -> Vec<u64> {
    (0..1u64 << n)
        .filter(|w| w.count_ones() as usize == k)
        .collect()
}

pub fn random_family(rng: &mut impl Rng, n: usize, k: usize, density: f64) -> LayerFamily {
    let members = layer_words(n, k)
        .into_iter()
        .filter(|_| rng.gen_bool(density))
        .map(|w| vertex(n, w));
    LayerFamily::new(n, k, members).unwrap()
}
