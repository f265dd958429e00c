//! Exact solvers for small cubes and the monochromatic-layer machinery.
//!
//! `μ(Q_n)` is found by branch and bound over vertices ordered by layer then
//! colex; `χ_μ(Q_n)` by iterative deepening on the number of classes. Both
//! rely on mutual visibility being hereditary: removing vertices only removes
//! obstacles, so a partial set that already fails can be pruned. The
//! "exhaustion certificate" is a hash of the search trace, not a proof.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use serde::Serialize;

use crate::cube::{
    binomial, colex_rank, low_mask, spread, subsets_of_size, KSubsets, Subcube, VertexSet,
};
use crate::error::{Error, Result};
use crate::layered::CubeColoring;
use crate::visibility::{
    mutual_visibility_witness, three_layer_obstruction, visible_raw, NonVisibilityWitness,
    ThreeLayerWitness,
};
use crate::Budget;

/// Largest dimension the bitmap-based solvers support (`2^7 = 128` vertices).
const SOLVER_MAX_DIM: usize = 7;

/// A subset of `V(Q_n)` for `n ≤ 7`, bit `w` standing for vertex word `w`.
type VertexMask = u128;

#[inline]
fn has(mask: VertexMask, w: u64) -> bool {
    mask >> w & 1 == 1
}

fn words(mask: VertexMask) -> impl Iterator<Item = u64> {
    let mut rest = mask;
    std::iter::from_fn(move || {
        (rest != 0).then(|| {
            let w = rest.trailing_zeros() as u64;
            rest &= rest - 1;
            w
        })
    })
}

/// Whether `set` (which already contains `v`) is still mutual-visibility,
/// given that `set \ {v}` was. Only pairs involving `v` and pairs whose
/// geodesic interval has `v` strictly inside can change.
fn still_visible_after_adding(set: VertexMask, v: u64) -> bool {
    let blocked = |x: u64| has(set, x);
    let others: Vec<u64> = words(set & !(1u128 << v)).collect();
    for &u in &others {
        if !visible_raw(u, v, &blocked).expect("solver dimensions sit below the cap") {
            return false;
        }
    }
    for (i, &x) in others.iter().enumerate() {
        for &y in &others[i + 1..] {
            let (low, high) = (x & y, x | y);
            if v & !high == 0 && low & !v == 0 && !visible_raw(x, y, &blocked).unwrap() {
                return false;
            }
        }
    }
    true
}

fn solver_order(n: usize) -> Vec<u64> {
    (0..=n).flat_map(|k| KSubsets::new(n, k)).collect()
}

/// How thoroughly [`max_mutual_visibility`] searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    /// Exhaust the search tree; `n ≤ 4` under the standard budget.
    Exact,
    /// Stop after this many nodes and report the incumbent; `n ≤ 7`.
    Bounded { node_limit: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MuResult {
    pub n: usize,
    pub mu: usize,
    pub witness: Vec<VertexSet>,
    /// True when the search tree was exhausted.
    pub certified: bool,
    pub nodes: u64,
    pub trace_hash: u64,
}

struct MuSearch {
    order: Vec<u64>,
    best: VertexMask,
    best_len: usize,
    nodes: u64,
    node_limit: u64,
    exhausted: bool,
    trace: DefaultHasher,
}

impl MuSearch {
    fn run(&mut self, depth: usize, set: VertexMask, len: usize) {
        if self.nodes >= self.node_limit {
            self.exhausted = false;
            return;
        }
        self.nodes += 1;
        (depth, len).hash(&mut self.trace);
        if len > self.best_len {
            self.best = set;
            self.best_len = len;
        }
        if depth == self.order.len() || len + (self.order.len() - depth) <= self.best_len {
            return;
        }
        let v = self.order[depth];
        let with = set | 1u128 << v;
        if still_visible_after_adding(with, v) {
            self.run(depth + 1, with, len + 1);
        }
        self.run(depth + 1, set, len);
    }
}

/// Greedy pass in solver order; seeds the incumbent.
fn greedy_mutual_visibility(order: &[u64]) -> VertexMask {
    let mut set = 0;
    for &v in order {
        let with = set | 1u128 << v;
        if still_visible_after_adding(with, v) {
            set = with;
        }
    }
    set
}

/// The largest mutual-visibility set of `Q_n`.
///
/// `Q_n` is vertex-transitive, so the search pins `∅` into the set.
pub fn max_mutual_visibility(n: usize, mode: SearchMode, budget: Budget) -> Result<MuResult> {
    if n == 0 {
        return Err(Error::InvalidDimension {
            n,
            max: SOLVER_MAX_DIM,
        });
    }
    let node_limit = match mode {
        SearchMode::Exact => {
            budget.check("exact mu dimension n", n, 4)?;
            u64::MAX
        }
        SearchMode::Bounded { node_limit } => {
            budget.check("bounded mu dimension n", n, 7)?;
            node_limit
        }
    };
    if n > SOLVER_MAX_DIM {
        return Err(Error::BudgetExceeded {
            what: "solver dimension n",
            value: n,
            limit: SOLVER_MAX_DIM,
        });
    }
    let order = solver_order(n);
    let greedy = greedy_mutual_visibility(&order);
    let mut search = MuSearch {
        order,
        best: greedy,
        best_len: greedy.count_ones() as usize,
        nodes: 0,
        node_limit,
        exhausted: true,
        trace: DefaultHasher::new(),
    };
    search.run(1, 1, 1);
    let witness: Vec<VertexSet> = words(search.best)
        .map(|w| VertexSet::from_raw(n, w))
        .collect();
    search.best_len.hash(&mut search.trace);
    Ok(MuResult {
        n,
        mu: search.best_len,
        witness,
        certified: search.exhausted,
        nodes: search.nodes,
        trace_hash: search.trace.finish(),
    })
}

/// `⌈2^n / mu⌉`.
pub fn trivial_lower_bound(n: usize, mu: usize) -> Result<u64> {
    if mu == 0 {
        return Err(Error::Precondition("mu must be at least 1".into()));
    }
    if n > 63 {
        return Err(Error::InvalidDimension { n, max: 63 });
    }
    Ok((1u64 << n).div_ceil(mu as u64))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChiMuResult {
    pub n: usize,
    pub chi: usize,
    /// Class ids `0..chi` in first-use order; stored with `g = 1`, `q = chi`.
    pub partition: CubeColoring,
    pub lower_bound: u64,
    pub nodes: u64,
    pub trace_hash: u64,
}

struct ChiSearch {
    order: Vec<u64>,
    classes: Vec<VertexMask>,
    assignment: Vec<u32>,
    nodes: u64,
    trace: DefaultHasher,
}

impl ChiSearch {
    /// Places `order[depth..]` into at most `limit` classes.
    fn run(&mut self, depth: usize, used: usize, limit: usize) -> bool {
        self.nodes += 1;
        (depth, used).hash(&mut self.trace);
        if depth == self.order.len() {
            return true;
        }
        let v = self.order[depth];
        // New classes only in first-use order.
        for c in 0..(used + 1).min(limit) {
            let with = self.classes[c] | 1u128 << v;
            if !still_visible_after_adding(with, v) {
                continue;
            }
            let before = self.classes[c];
            self.classes[c] = with;
            self.assignment[v as usize] = c as u32;
            if self.run(depth + 1, used.max(c + 1), limit) {
                return true;
            }
            self.classes[c] = before;
        }
        false
    }
}

/// `χ_μ(Q_n)`: the fewest mutual-visibility classes partitioning `V(Q_n)`.
///
/// Tries class counts upward from `⌈2^n / μ(Q_n)⌉`. Vertex `∅` is pinned to
/// class 0. Limited to `n ≤ 4` under [`Budget::Standard`].
pub fn exact_chi_mu(n: usize, budget: Budget) -> Result<ChiMuResult> {
    if n == 0 {
        return Err(Error::InvalidDimension {
            n,
            max: SOLVER_MAX_DIM,
        });
    }
    budget.check("exact chi dimension n", n, 4)?;
    if n > SOLVER_MAX_DIM {
        return Err(Error::BudgetExceeded {
            what: "solver dimension n",
            value: n,
            limit: SOLVER_MAX_DIM,
        });
    }
    let mu = max_mutual_visibility(n, SearchMode::Exact, Budget::Unchecked)?;
    let lower_bound = trivial_lower_bound(n, mu.mu)?;
    let order = solver_order(n);
    let size = 1usize << n;
    let mut search = ChiSearch {
        order,
        classes: vec![0; size],
        assignment: vec![0; size],
        nodes: 0,
        trace: DefaultHasher::new(),
    };
    let mut limit = lower_bound as usize;
    loop {
        search.classes.iter_mut().for_each(|c| *c = 0);
        search.classes[0] = 1;
        search.assignment[0] = 0;
        if search.run(1, 1, limit) {
            break;
        }
        limit += 1;
    }
    let partition = CubeColoring::new(n, 1, limit, search.assignment.clone())?;
    limit.hash(&mut search.trace);
    Ok(ChiMuResult {
        n,
        chi: limit,
        partition,
        lower_bound,
        nodes: search.nodes,
        trace_hash: search.trace.finish(),
    })
}

/// A `q`-coloring of the `k`-subsets of `[m]`, stored in colex order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HypergraphColoring {
    pub m: usize,
    pub k: usize,
    pub q: usize,
    pub colors: Vec<u8>,
}

impl HypergraphColoring {
    pub fn new(m: usize, k: usize, q: usize, colors: Vec<u8>) -> Result<Self> {
        if m == 0 || m > 64 || k > m {
            return Err(Error::Precondition(format!(
                "bad uniformity {k} over [{m}]"
            )));
        }
        if colors.len() as u64 != binomial(m, k) {
            return Err(Error::Precondition(format!(
                "expected {} colors, got {}",
                binomial(m, k),
                colors.len()
            )));
        }
        if let Some(&c) = colors.iter().find(|&&c| c as usize >= q) {
            return Err(Error::ColorOutOfRange {
                color: c as usize,
                q,
            });
        }
        Ok(Self { m, k, q, colors })
    }

    /// Colors each `k`-set by a function of its 1-based elements.
    pub fn from_fn(m: usize, k: usize, q: usize, f: impl Fn(&[usize]) -> u8) -> Result<Self> {
        let colors = KSubsets::new(m, k)
            .map(|w| f(&VertexSet::from_raw(m, w).elements()))
            .collect();
        Self::new(m, k, q, colors)
    }

    pub fn color_of(&self, set: u64) -> u8 {
        self.colors[colex_rank(set) as usize]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RamseyWitness {
    pub m: usize,
    pub k: usize,
    pub s: usize,
    pub mono_set: VertexSet,
    pub color: u8,
}

/// The first `s`-subset of `[m]` (colex) whose `k`-subsets all share a color.
pub fn ramsey_witness_search(
    coloring: &HypergraphColoring,
    s: usize,
    budget: Budget,
) -> Result<Option<RamseyWitness>> {
    let (m, k) = (coloring.m, coloring.k);
    budget.check("ramsey ground size m", m, 20)?;
    budget.check("ramsey uniformity k", k, 3)?;
    budget.check("ramsey target s", s, 5)?;
    if s < k || s > m {
        return Err(Error::Precondition(format!(
            "target size {s} must lie in {k}..={m}"
        )));
    }
    for set in KSubsets::new(m, s) {
        let mut subsets = subsets_of_size(set, k);
        let first = coloring.color_of(subsets.next().unwrap());
        if subsets.all(|t| coloring.color_of(t) == first) {
            return Ok(Some(RamseyWitness {
                m,
                k,
                s,
                mono_set: VertexSet::from_raw(m, set),
                color: first,
            }));
        }
    }
    Ok(None)
}

/// The color of every layer of a subcube, or `None` if some layer is mixed.
fn subcube_layer_colors(c: &CubeColoring, base: u64, free: u64) -> Option<Vec<u32>> {
    let dim = free.count_ones() as usize;
    let mut colors = Vec::with_capacity(dim + 1);
    for t in 0..=dim {
        let mut layer = KSubsets::new(dim, t).map(|s| c.classes[(base | spread(s, free)) as usize]);
        let first = layer.next().unwrap();
        if !layer.all(|x| x == first) {
            return None;
        }
        colors.push(first);
    }
    Some(colors)
}

/// First interval subcube of dimension `d` whose every layer is
/// monochromatic, with the class of each layer (local layer order).
///
/// Search order: free coordinates in colex order, then base ascending.
/// Limited to `n ≤ 12`, `d ≤ 6` under [`Budget::Standard`].
pub fn monochromatic_layer_subcube_search(
    c: &CubeColoring,
    d: usize,
    budget: Budget,
) -> Result<Option<(Subcube, Vec<u32>)>> {
    let n = c.n;
    budget.check("layer subcube search dimension n", n, 12)?;
    budget.check("layer subcube dimension d", d, 6)?;
    if d > n {
        return Ok(None);
    }
    let all = low_mask(n);
    for free in KSubsets::new(n, d) {
        let rest = all & !free;
        for b in 0..1u64 << rest.count_ones() {
            let base = spread(b, rest);
            if let Some(colors) = subcube_layer_colors(c, base, free) {
                return Ok(Some((Subcube::from_raw(n, base, free), colors)));
            }
        }
    }
    Ok(None)
}

/// With every layer of `sub` monochromatic, the class that first collects
/// three layers, with their global indices. Always succeeds when `sub` has
/// dimension at least twice the number of classes on its layers.
pub fn pigeonhole_three_layers(
    sub: &Subcube,
    c: &CubeColoring,
) -> Result<Option<ThreeLayerWitness>> {
    if sub.n() != c.n {
        return Err(Error::DimensionMismatch(sub.n(), c.n));
    }
    let colors =
        subcube_layer_colors(c, sub.base().bits(), sub.free().bits()).ok_or_else(|| {
            Error::Precondition(format!("subcube {sub} has a layer with several classes"))
        })?;
    let weight = sub.base().len();
    let mut seen: Vec<(u32, Vec<usize>)> = Vec::new();
    for (t, &class) in colors.iter().enumerate() {
        let entry = match seen.iter_mut().position(|(c, _)| *c == class) {
            Some(i) => &mut seen[i].1,
            None => {
                seen.push((class, Vec::new()));
                &mut seen.last_mut().unwrap().1
            }
        };
        entry.push(weight + t);
        if entry.len() == 3 {
            return Ok(Some(ThreeLayerWitness {
                subcube: *sub,
                layers: [entry[0], entry[1], entry[2]],
                class: Some(class),
            }));
        }
    }
    Ok(None)
}

/// A certificate that a coloring is not proper, built from a subcube with
/// monochromatic layers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ImproperCertificate {
    pub obstruction: ThreeLayerWitness,
    pub blocked: NonVisibilityWitness,
}

/// Runs monochromatic-layer search, pigeonhole and the three-layer
/// obstruction for subcube dimensions `2..=max_dim`, then confirms the
/// offending class is not mutual-visibility.
pub fn lower_bound_certificate(
    c: &CubeColoring,
    max_dim: usize,
    budget: Budget,
) -> Result<Option<ImproperCertificate>> {
    for d in 2..=max_dim.min(c.n) {
        let Some((sub, _)) = monochromatic_layer_subcube_search(c, d, budget)? else {
            continue;
        };
        let Some(hit) = pigeonhole_three_layers(&sub, c)? else {
            continue;
        };
        let class = hit.class.expect("pigeonhole names a class");
        let members = c.class_members(class);
        let mut obstruction = three_layer_obstruction(&members, &sub)?
            .expect("three monochromatic layers lie in their class");
        obstruction.class = Some(class);
        let blocked = mutual_visibility_witness(&members)?
            .expect("a class containing three subcube layers is not mutual-visibility");
        return Ok(Some(ImproperCertificate {
            obstruction,
            blocked,
        }));
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::visibility::{is_mutual_visibility_set, ObstacleSet};

    #[test]
    fn mu_small_values() {
        let r = max_mutual_visibility(1, SearchMode::Exact, Budget::Standard).unwrap();
        assert_eq!(r.mu, 2);
        assert!(r.certified);
        assert_eq!(r.witness.len(), 2);

        let r = max_mutual_visibility(2, SearchMode::Exact, Budget::Standard).unwrap();
        assert_eq!(r.mu, 3);
        let m = ObstacleSet::new(2, r.witness.iter().copied()).unwrap();
        assert!(is_mutual_visibility_set(&m).unwrap());

        assert!(matches!(
            max_mutual_visibility(5, SearchMode::Exact, Budget::Standard),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn chi_small_values() {
        assert_eq!(exact_chi_mu(1, Budget::Standard).unwrap().chi, 1);
        let r = exact_chi_mu(2, Budget::Standard).unwrap();
        assert_eq!(r.chi, 2);
        assert_eq!(r.lower_bound, 2);
    }

    #[test]
    fn lower_bound_examples() {
        assert_eq!(trivial_lower_bound(2, 3).unwrap(), 2);
        assert_eq!(trivial_lower_bound(1, 2).unwrap(), 1);
        assert_eq!(trivial_lower_bound(4, 16).unwrap(), 1);
        assert!(trivial_lower_bound(4, 0).is_err());
    }

    #[test]
    fn ramsey_pentagon_and_trivial_cases() {
        // Edges of the 5-cycle in color 0, diagonals in color 1.
        let pentagon = HypergraphColoring::from_fn(5, 2, 2, |e| {
            let gap = e[1] - e[0];
            u8::from(gap != 1 && gap != 4)
        })
        .unwrap();
        assert_eq!(
            ramsey_witness_search(&pentagon, 3, Budget::Standard).unwrap(),
            None
        );

        let w = ramsey_witness_search(&pentagon, 2, Budget::Standard)
            .unwrap()
            .unwrap();
        assert_eq!(w.mono_set.elements(), vec![1, 2]);

        assert!(ramsey_witness_search(&pentagon, 1, Budget::Standard).is_err());
    }

    #[test]
    fn pigeonhole_examples() {
        let n = 4;
        let sub = Subcube::from_raw(n, 0, 0b111);
        // layer colors (0, 1, 0, 1) on the subcube: classes by parity of weight
        let parity =
            CubeColoring::new(n, 1, 2, (0..16u64).map(|w| w.count_ones() % 2).collect()).unwrap();
        assert_eq!(pigeonhole_three_layers(&sub, &parity).unwrap(), None);

        let one = CubeColoring::new(n, 1, 1, vec![0; 16]).unwrap();
        let q2 = Subcube::from_raw(n, 0, 0b11);
        let w = pigeonhole_three_layers(&q2, &one).unwrap().unwrap();
        assert_eq!(w.layers, [0, 1, 2]);
        assert_eq!(w.class, Some(0));

        let mixed = CubeColoring::new(n, 1, 2, (0..16u32).map(|w| w % 2).collect()).unwrap();
        assert!(pigeonhole_three_layers(&q2, &mixed).is_err());
    }

    #[test]
    fn mono_search_examples() {
        let n = 4;
        let parity =
            CubeColoring::new(n, 1, 2, (0..16u64).map(|w| w.count_ones() % 2).collect()).unwrap();
        let (sub, colors) = monochromatic_layer_subcube_search(&parity, 2, Budget::Standard)
            .unwrap()
            .unwrap();
        assert_eq!(sub, Subcube::from_raw(n, 0, 0b11));
        assert_eq!(colors, vec![0, 1, 0]);

        let (sub, colors) = monochromatic_layer_subcube_search(&parity, 0, Budget::Standard)
            .unwrap()
            .unwrap();
        assert_eq!(sub.dim(), 0);
        assert_eq!(sub.base().bits(), 0);
        assert_eq!(colors, vec![0]);
    }

    #[test]
    fn one_coloring_is_never_proper() {
        for n in 2..=6 {
            let c = CubeColoring::new(n, 1, 1, vec![0; 1 << n]).unwrap();
            let cert = lower_bound_certificate(&c, 2, Budget::Standard)
                .unwrap()
                .unwrap();
            assert_eq!(cert.obstruction.layers, [0, 1, 2]);
            assert!(cert.blocked.recheck(&c.class_members(0)).unwrap());
        }
    }
}
