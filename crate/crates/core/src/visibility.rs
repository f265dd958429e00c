//! Geodesic visibility in `Q_n`.
//!
//! Every shortest `a`-`b` path in `Q_n` stays inside the interval
//! `[a ∩ b, a ∪ b]` and toggles each coordinate of `a Δ b` exactly once, so
//! visibility is decided by reachability over the `2^|a Δ b|` states of that
//! sub-lattice rather than by enumerating the `|a Δ b|!` paths.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::cube::{check_dim, low_mask, spread, KSubsets, Subcube, VertexSet};
use crate::error::{Error, Result};
use crate::Budget;

/// Largest `|a Δ b|` the reachability table will be built for.
pub const DIFFERENCE_CAP: usize = 24;

/// Dimensions up to this use a dense bitmap for membership.
const DENSE_LOOKUP_DIM: usize = 24;

/// Pair checks fan out to the rayon pool above this many members.
const PARALLEL_THRESHOLD: usize = 96;

#[derive(Debug, Clone)]
enum Lookup {
    Dense(Vec<u64>),
    Sparse(HashSet<u64>),
}

/// A set of vertices of `Q_n` with constant-time membership.
#[derive(Debug, Clone)]
pub struct ObstacleSet {
    n: usize,
    members: Vec<u64>,
    lookup: Lookup,
}

impl ObstacleSet {
    pub fn new(n: usize, members: impl IntoIterator<Item = VertexSet>) -> Result<Self> {
        check_dim(n)?;
        let mut bits = Vec::new();
        for v in members {
            if v.dim() != n {
                return Err(Error::DimensionMismatch(v.dim(), n));
            }
            bits.push(v.bits());
        }
        Ok(Self::from_bits(n, bits))
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::new(n, std::iter::empty())
    }

    pub(crate) fn from_bits(n: usize, mut bits: Vec<u64>) -> Self {
        bits.sort_unstable();
        bits.dedup();
        let lookup = if n <= DENSE_LOOKUP_DIM {
            let mut words = vec![0u64; (1usize << n).div_ceil(64)];
            for &b in &bits {
                words[(b >> 6) as usize] |= 1 << (b & 63);
            }
            Lookup::Dense(words)
        } else {
            Lookup::Sparse(bits.iter().copied().collect())
        };
        Self {
            n,
            members: bits,
            lookup,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    #[inline]
    pub fn contains_bits(&self, bits: u64) -> bool {
        match &self.lookup {
            Lookup::Dense(words) => {
                let i = (bits >> 6) as usize;
                i < words.len() && words[i] >> (bits & 63) & 1 == 1
            }
            Lookup::Sparse(set) => set.contains(&bits),
        }
    }

    pub fn contains(&self, v: VertexSet) -> bool {
        v.dim() == self.n && self.contains_bits(v.bits())
    }

    /// Members in ascending (colex within a layer) word order.
    pub fn iter(&self) -> impl Iterator<Item = VertexSet> + '_ {
        self.members.iter().map(|&b| VertexSet::from_raw(self.n, b))
    }

    pub(crate) fn bits(&self) -> &[u64] {
        &self.members
    }
}

/// Reachability table over the interval between `a` and `a ^ diff`.
///
/// State `s` (a subset of the positions of `diff`) stands for the vertex
/// `a ^ spread(s, diff)`. Only internal states consult `blocked`.
fn reach_table(a: u64, diff: u64, blocked: &impl Fn(u64) -> bool) -> Vec<bool> {
    let m = diff.count_ones() as usize;
    let full = (1usize << m) - 1;
    let mut reach = vec![false; full + 1];
    reach[0] = true;
    for s in 1..=full {
        if s != full && blocked(a ^ spread(s as u64, diff)) {
            continue;
        }
        let mut rest = s;
        while rest != 0 {
            let bit = rest & rest.wrapping_neg();
            if reach[s ^ bit] {
                reach[s] = true;
                break;
            }
            rest ^= bit;
        }
    }
    reach
}

/// Visibility on raw words with an arbitrary obstacle predicate.
pub(crate) fn visible_raw(a: u64, b: u64, blocked: &impl Fn(u64) -> bool) -> Result<bool> {
    let diff = a ^ b;
    let m = diff.count_ones() as usize;
    if m > DIFFERENCE_CAP {
        return Err(Error::DifferenceCapExceeded {
            size: m,
            cap: DIFFERENCE_CAP,
        });
    }
    match m {
        0 | 1 => Ok(true),
        2 => {
            let low = diff & diff.wrapping_neg();
            Ok(!blocked(a ^ low) || !blocked(a ^ (diff ^ low)))
        }
        _ => Ok(*reach_table(a, diff, blocked).last().unwrap()),
    }
}

fn check_pair_dims(a: VertexSet, b: VertexSet, obstacles: &ObstacleSet) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    if a.dim() != obstacles.n {
        return Err(Error::DimensionMismatch(a.dim(), obstacles.n));
    }
    Ok(())
}

/// Whether some shortest `a`-`b` path avoids `obstacles` at every internal vertex.
///
/// Endpoints are never treated as obstacles, so callers may pass the whole
/// candidate set.
pub fn visible(a: VertexSet, b: VertexSet, obstacles: &ObstacleSet) -> Result<bool> {
    check_pair_dims(a, b, obstacles)?;
    visible_raw(a.bits(), b.bits(), &|x| obstacles.contains_bits(x))
}

/// Like [`visible`], but returns an unobstructed shortest path from `a` to `b`.
pub fn visible_path(
    a: VertexSet,
    b: VertexSet,
    obstacles: &ObstacleSet,
) -> Result<Option<Vec<VertexSet>>> {
    check_pair_dims(a, b, obstacles)?;
    let diff = a.bits() ^ b.bits();
    let m = diff.count_ones() as usize;
    if m > DIFFERENCE_CAP {
        return Err(Error::DifferenceCapExceeded {
            size: m,
            cap: DIFFERENCE_CAP,
        });
    }
    let reach = reach_table(a.bits(), diff, &|x| obstacles.contains_bits(x));
    let full = (1usize << m) - 1;
    if !reach[full] {
        return Ok(None);
    }
    let mut states = vec![full];
    let mut s = full;
    while s != 0 {
        let mut rest = s;
        loop {
            let bit = rest & rest.wrapping_neg();
            if reach[s ^ bit] {
                s ^= bit;
                break;
            }
            rest ^= bit;
        }
        states.push(s);
    }
    states.reverse();
    let n = a.dim();
    Ok(Some(
        states
            .into_iter()
            .map(|s| VertexSet::from_raw(n, a.bits() ^ spread(s as u64, diff)))
            .collect(),
    ))
}

/// A pair of members with every shortest path blocked by another member.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NonVisibilityWitness {
    pub u: VertexSet,
    pub v: VertexSet,
    /// Size of the obstacle set `M \ {u, v}`.
    pub obstacles: usize,
}

impl NonVisibilityWitness {
    /// Re-runs the predicate; true when the witness is genuine.
    pub fn recheck(&self, m: &ObstacleSet) -> Result<bool> {
        Ok(m.contains(self.u) && m.contains(self.v) && !visible(self.u, self.v, m)?)
    }
}

fn first_blocked_partner(m: &ObstacleSet, i: usize) -> Result<Option<u64>> {
    let members = m.bits();
    let u = members[i];
    let blocked = |x: u64| m.contains_bits(x);
    for &v in &members[i + 1..] {
        if !visible_raw(u, v, &blocked)? {
            return Ok(Some(v));
        }
    }
    Ok(None)
}

/// The first blocked pair `(u, v)`, `u < v`, in lexicographic order of words.
pub fn mutual_visibility_witness(m: &ObstacleSet) -> Result<Option<NonVisibilityWitness>> {
    let count = m.len();
    let found = if count >= PARALLEL_THRESHOLD {
        (0..count)
            .into_par_iter()
            .map(|i| first_blocked_partner(m, i).map(|v| v.map(|v| (i, v))))
            .find_map_first(|r| match r {
                Ok(None) => None,
                other => Some(other),
            })
            .transpose()?
            .flatten()
    } else {
        let mut found = None;
        for i in 0..count {
            if let Some(v) = first_blocked_partner(m, i)? {
                found = Some((i, v));
                break;
            }
        }
        found
    };
    Ok(found.map(|(i, v)| NonVisibilityWitness {
        u: VertexSet::from_raw(m.n, m.bits()[i]),
        v: VertexSet::from_raw(m.n, v),
        obstacles: count - 2,
    }))
}

/// Whether every pair of members sees each other.
pub fn is_mutual_visibility_set(m: &ObstacleSet) -> Result<bool> {
    Ok(mutual_visibility_witness(m)?.is_none())
}

/// Three layers of an interval subcube that all lie inside one set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ThreeLayerWitness {
    pub subcube: Subcube,
    /// Global layer indices `i < j < k`.
    pub layers: [usize; 3],
    /// Color class the layers belong to, when the set came from a coloring.
    pub class: Option<u32>,
}

impl ThreeLayerWitness {
    /// The pair the obstruction argument blocks: the base of layer `i` and
    /// its completion in layer `k`, with every middle set of layer `j` in `m`.
    pub fn blocked_pair(&self) -> (VertexSet, VertexSet) {
        let n = self.subcube.n();
        let base = self.subcube.base().bits();
        let free = self.subcube.free().bits();
        let [i, _, k] = self.layers;
        let lo = base | spread(low_mask(i - self.subcube.base().len()), free);
        let hi = base | spread(low_mask(k - self.subcube.base().len()), free);
        (VertexSet::from_raw(n, lo), VertexSet::from_raw(n, hi))
    }
}

fn full_subcube_layers(m: &ObstacleSet, base: u64, free: u64, need: usize) -> Vec<usize> {
    let dim = free.count_ones() as usize;
    let weight = base.count_ones() as usize;
    let mut full = Vec::with_capacity(need);
    for t in 0..=dim {
        if full.len() + (dim + 1 - t) < need {
            break;
        }
        let complete = KSubsets::new(dim, t).all(|s| m.contains_bits(base | spread(s, free)));
        if complete {
            full.push(weight + t);
            if full.len() == need {
                break;
            }
        }
    }
    full
}

/// The three lowest layers of `sub` fully contained in `m`, if there are three.
pub fn three_layer_obstruction(
    m: &ObstacleSet,
    sub: &Subcube,
) -> Result<Option<ThreeLayerWitness>> {
    if sub.n() != m.n() {
        return Err(Error::DimensionMismatch(sub.n(), m.n()));
    }
    if sub.dim() < 2 {
        return Err(Error::SubcubeTooSmall(sub.dim()));
    }
    let full = full_subcube_layers(m, sub.base().bits(), sub.free().bits(), 3);
    Ok((full.len() == 3).then(|| ThreeLayerWitness {
        subcube: *sub,
        layers: [full[0], full[1], full[2]],
        class: None,
    }))
}

/// Searches every interval subcube of dimension `2..=max_dim`.
///
/// Order: dimension ascending, then free coordinates in colex order, then
/// base in ascending word order.
pub fn find_three_layer_obstruction(
    m: &ObstacleSet,
    max_dim: usize,
    budget: Budget,
) -> Result<Option<ThreeLayerWitness>> {
    let n = m.n();
    budget.check("obstruction search dimension n", n, 14)?;
    budget.check("obstruction search subcube dimension", max_dim, 6)?;
    if n > 62 {
        return Err(Error::BudgetExceeded {
            what: "obstruction search dimension n",
            value: n,
            limit: 62,
        });
    }
    let all = low_mask(n);
    for dim in 2..=max_dim.min(n) {
        for free in KSubsets::new(n, dim) {
            let rest = all & !free;
            for b in 0..1u64 << rest.count_ones() {
                let base = spread(b, rest);
                let full = full_subcube_layers(m, base, free, 3);
                if full.len() == 3 {
                    return Ok(Some(ThreeLayerWitness {
                        subcube: Subcube::from_raw(n, base, free),
                        layers: [full[0], full[1], full[2]],
                        class: None,
                    }));
                }
            }
        }
    }
    Ok(None)
}
