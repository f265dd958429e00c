//! Subset-lattice primitives for the hypercube `Q_n`.
//!
//! A vertex of `Q_n` is a subset of `[n] = {1, ..., n}` stored as an `n`-bit
//! word; element `i` lives at bit `i - 1`. For subsets of equal size,
//! ascending word order is colexicographic order, and every enumeration in
//! this crate yields members in that order.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest dimension for single-vertex operations.
pub const MAX_DIM: usize = 64;

/// Largest dimension for anything that materializes a full layer or `V(Q_n)`.
pub const MAX_MATERIALIZED_DIM: usize = 30;

static BINOMIAL: [[u64; 65]; 65] = {
    let mut table = [[0u64; 65]; 65];
    let mut n = 0;
    while n < 65 {
        table[n][0] = 1;
        let mut k = 1;
        while k <= n {
            // C(64, 32) < 2^63, so nothing in the table overflows.
            table[n][k] = table[n - 1][k - 1].wrapping_add(if k < n { table[n - 1][k] } else { 0 });
            k += 1;
        }
        n += 1;
    }
    table
};

/// `C(n, k)`, zero when `k > n`.
#[inline]
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    BINOMIAL[n][k]
}

#[inline]
pub(crate) fn low_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Deposits the low bits of `bits` into the set positions of `mask`, lowest first.
#[inline]
pub fn spread(mut bits: u64, mut mask: u64) -> u64 {
    let mut out = 0;
    while mask != 0 && bits != 0 {
        let lowest = mask & mask.wrapping_neg();
        if bits & 1 == 1 {
            out |= lowest;
        }
        bits >>= 1;
        mask ^= lowest;
    }
    out
}

/// Rank of a `k`-subset among all `k`-subsets of `[n]` in colex order.
#[inline]
pub fn colex_rank(mut bits: u64) -> u64 {
    let mut rank = 0;
    let mut i = 1;
    while bits != 0 {
        let pos = bits.trailing_zeros() as usize;
        rank += binomial(pos, i);
        bits &= bits - 1;
        i += 1;
    }
    rank
}

/// Iterator over all `k`-subsets of a `width`-bit ground set as words, colex order.
#[derive(Debug, Clone)]
pub struct KSubsets {
    next: Option<u64>,
    limit: u64,
}

impl KSubsets {
    pub fn new(width: usize, k: usize) -> Self {
        assert!(width <= 64);
        let next = if k > width { None } else { Some(low_mask(k)) };
        Self {
            next,
            limit: low_mask(width),
        }
    }
}

impl Iterator for KSubsets {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        let current = self.next?;
        // Gosper's hack; u128 keeps the carry when the top bit is in use.
        self.next = if current == 0 {
            None
        } else {
            let c = current as u128;
            let lowest = c & c.wrapping_neg();
            let ripple = c + lowest;
            let following = (((ripple ^ c) >> 2) / lowest) | ripple;
            if following > self.limit as u128 {
                None
            } else {
                Some(following as u64)
            }
        };
        Some(current)
    }
}

/// All `k`-subsets of the set bits of `mask`, colex order.
pub fn subsets_of_size(mask: u64, k: usize) -> impl Iterator<Item = u64> {
    KSubsets::new(mask.count_ones() as usize, k).map(move |s| spread(s, mask))
}

/// All subsets of `mask` in ascending word order.
pub fn all_subsets(mask: u64) -> impl Iterator<Item = u64> {
    let width = mask.count_ones();
    assert!(width < 64);
    (0..1u64 << width).map(move |s| spread(s, mask))
}

/// A vertex of `Q_n`: a subset of `[n]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexSet {
    n: u8,
    bits: u64,
}

impl VertexSet {
    pub fn new(n: usize, bits: u64) -> Result<Self> {
        check_dim(n)?;
        if bits & !low_mask(n) != 0 {
            let element = 64 - bits.leading_zeros() as usize;
            return Err(Error::ElementOutOfRange { element, n });
        }
        Ok(Self { n: n as u8, bits })
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::new(n, 0)
    }

    pub fn full(n: usize) -> Result<Self> {
        Self::new(n, low_mask(n))
    }

    /// Builds a vertex from 1-based elements.
    pub fn from_elements(n: usize, elements: &[usize]) -> Result<Self> {
        check_dim(n)?;
        let mut bits = 0u64;
        for &e in elements {
            if e == 0 || e > n {
                return Err(Error::ElementOutOfRange { element: e, n });
            }
            bits |= 1 << (e - 1);
        }
        Ok(Self { n: n as u8, bits })
    }

    pub(crate) fn from_raw(n: usize, bits: u64) -> Self {
        debug_assert!(n <= MAX_DIM && bits & !low_mask(n) == 0);
        Self { n: n as u8, bits }
    }

    /// Parses `0xd`, `{1,3,4}`, `1,3,4` or `{}`.
    pub fn parse(n: usize, text: &str) -> Result<Self> {
        let text = text.trim();
        if let Some(hex) = text.strip_prefix("0x").or_else(|| text.strip_prefix("0X")) {
            let bits = u64::from_str_radix(hex, 16)
                .map_err(|e| Error::Parse(format!("bad hex vertex {text:?}: {e}")))?;
            return Self::new(n, bits);
        }
        let inner = text
            .strip_prefix('{')
            .and_then(|t| t.strip_suffix('}'))
            .unwrap_or(text);
        let mut elements = Vec::new();
        for part in inner.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let e = part
                .parse::<usize>()
                .map_err(|e| Error::Parse(format!("bad element {part:?}: {e}")))?;
            elements.push(e);
        }
        Self::from_elements(n, &elements)
    }

    #[inline]
    pub fn bits(self) -> u64 {
        self.bits
    }

    #[inline]
    pub fn dim(self) -> usize {
        self.n as usize
    }

    /// `|A|`, which is also the layer index of the vertex.
    #[inline]
    pub fn len(self) -> usize {
        self.bits.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.bits == 0
    }

    pub fn contains_element(self, element: usize) -> bool {
        element >= 1 && element <= self.dim() && self.bits >> (element - 1) & 1 == 1
    }

    #[inline]
    pub fn is_subset_of(self, other: VertexSet) -> bool {
        self.bits & !other.bits == 0
    }

    /// 1-based elements in increasing order.
    pub fn elements(self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len());
        let mut bits = self.bits;
        while bits != 0 {
            out.push(bits.trailing_zeros() as usize + 1);
            bits &= bits - 1;
        }
        out
    }

    pub fn union(self, other: VertexSet) -> Result<VertexSet> {
        same_dim(self, other)?;
        Ok(Self::from_raw(self.dim(), self.bits | other.bits))
    }

    pub fn intersection(self, other: VertexSet) -> Result<VertexSet> {
        same_dim(self, other)?;
        Ok(Self::from_raw(self.dim(), self.bits & other.bits))
    }

    pub fn symmetric_difference(self, other: VertexSet) -> Result<VertexSet> {
        same_dim(self, other)?;
        Ok(Self::from_raw(self.dim(), self.bits ^ other.bits))
    }

    /// Hex form used in machine output, e.g. `0xd`.
    pub fn to_hex(self) -> String {
        format!("{:#x}", self.bits)
    }
}

impl fmt::Display for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, e) in self.elements().into_iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str("}")
    }
}

impl fmt::LowerHex for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::LowerHex::fmt(&self.bits, f)
    }
}

pub(crate) fn check_dim(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DIM {
        return Err(Error::InvalidDimension { n, max: MAX_DIM });
    }
    Ok(())
}

pub(crate) fn check_materializable(n: usize) -> Result<()> {
    check_dim(n)?;
    if n > MAX_MATERIALIZED_DIM {
        return Err(Error::BudgetExceeded {
            what: "materialized dimension",
            value: n,
            limit: MAX_MATERIALIZED_DIM,
        });
    }
    Ok(())
}

#[inline]
pub(crate) fn same_dim(a: VertexSet, b: VertexSet) -> Result<()> {
    if a.n != b.n {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    Ok(())
}

/// Graph distance in `Q_n`, i.e. `|a Δ b|`.
pub fn distance(a: VertexSet, b: VertexSet) -> Result<usize> {
    same_dim(a, b)?;
    Ok((a.bits ^ b.bits).count_ones() as usize)
}

/// The interval `[low, high] = {C : low ⊆ C ⊆ high}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Interval {
    low: VertexSet,
    high: VertexSet,
}

impl Interval {
    pub fn new(low: VertexSet, high: VertexSet) -> Result<Self> {
        same_dim(low, high)?;
        if !low.is_subset_of(high) {
            return Err(Error::NotContained {
                low: low.bits,
                high: high.bits,
            });
        }
        Ok(Self { low, high })
    }

    /// The geodesic interval between two arbitrary vertices: `[a ∩ b, a ∪ b]`.
    pub fn spanned_by(a: VertexSet, b: VertexSet) -> Result<Self> {
        Self::new(a.intersection(b)?, a.union(b)?)
    }

    pub fn low(&self) -> VertexSet {
        self.low
    }

    pub fn high(&self) -> VertexSet {
        self.high
    }

    /// Number of free coordinates, `|high \ low|`.
    pub fn width(&self) -> usize {
        (self.high.bits & !self.low.bits).count_ones() as usize
    }

    pub fn contains(&self, v: VertexSet) -> bool {
        v.n == self.low.n && self.low.is_subset_of(v) && v.is_subset_of(self.high)
    }

    pub fn as_subcube(&self) -> Subcube {
        Subcube {
            base: self.low,
            free: VertexSet::from_raw(self.low.dim(), self.high.bits & !self.low.bits),
        }
    }
}

/// The interval copy `{base ∪ S : S ⊆ free}` of `Q_|free|` inside `Q_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Subcube {
    base: VertexSet,
    free: VertexSet,
}

impl Subcube {
    pub fn new(base: VertexSet, free: VertexSet) -> Result<Self> {
        same_dim(base, free)?;
        if base.bits & free.bits != 0 {
            return Err(Error::OverlappingSubcube {
                base: base.bits,
                free: free.bits,
            });
        }
        Ok(Self { base, free })
    }

    pub(crate) fn from_raw(n: usize, base: u64, free: u64) -> Self {
        debug_assert_eq!(base & free, 0);
        Self {
            base: VertexSet::from_raw(n, base),
            free: VertexSet::from_raw(n, free),
        }
    }

    /// The whole cube `Q_n`.
    pub fn full(n: usize) -> Result<Self> {
        Self::new(VertexSet::empty(n)?, VertexSet::full(n)?)
    }

    pub fn base(&self) -> VertexSet {
        self.base
    }

    pub fn free(&self) -> VertexSet {
        self.free
    }

    pub fn n(&self) -> usize {
        self.base.dim()
    }

    /// Dimension `n'` of the copy.
    pub fn dim(&self) -> usize {
        self.free.len()
    }

    /// Global layer indices spanned by the subcube.
    pub fn weight_range(&self) -> std::ops::RangeInclusive<usize> {
        self.base.len()..=self.base.len() + self.free.len()
    }

    pub fn contains(&self, v: VertexSet) -> bool {
        v.n == self.base.n && v.bits & !self.free.bits == self.base.bits
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexSet> + '_ {
        let n = self.n();
        let base = self.base.bits;
        all_subsets(self.free.bits).map(move |s| VertexSet::from_raw(n, base | s))
    }
}

impl fmt::Display for Subcube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + 2^{}", self.base, self.free)
    }
}

/// A set of `k`-subsets of `[n]`, kept sorted in colex order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LayerFamily {
    n: usize,
    k: usize,
    members: Vec<VertexSet>,
}

impl LayerFamily {
    pub fn new(n: usize, k: usize, members: impl IntoIterator<Item = VertexSet>) -> Result<Self> {
        check_dim(n)?;
        if k > n {
            return Err(Error::LayerOutOfRange { k, lo: 0, hi: n });
        }
        let mut members: Vec<VertexSet> = members.into_iter().collect();
        for m in &members {
            if m.dim() != n {
                return Err(Error::DimensionMismatch(m.dim(), n));
            }
            if m.len() != k {
                return Err(Error::LayerOutOfRange {
                    k: m.len(),
                    lo: k,
                    hi: k,
                });
            }
        }
        members.sort_unstable();
        members.dedup();
        Ok(Self { n, k, members })
    }

    /// Builds a family from raw words that are already valid `k`-sets.
    pub(crate) fn from_sorted_bits(n: usize, k: usize, bits: Vec<u64>) -> Self {
        debug_assert!(bits.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(bits.iter().all(|b| b.count_ones() as usize == k));
        Self {
            n,
            k,
            members: bits
                .into_iter()
                .map(|b| VertexSet::from_raw(n, b))
                .collect(),
        }
    }

    pub fn empty(n: usize, k: usize) -> Result<Self> {
        Self::new(n, k, std::iter::empty())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[VertexSet] {
        &self.members
    }

    pub fn iter(&self) -> impl Iterator<Item = VertexSet> + '_ {
        self.members.iter().copied()
    }

    pub fn contains(&self, v: VertexSet) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    pub fn into_members(self) -> Vec<VertexSet> {
        self.members
    }
}

/// All `C(n, k)` vertices of layer `k`, colex order.
pub fn enumerate_layer(n: usize, k: usize) -> Result<LayerFamily> {
    check_materializable(n)?;
    if k > n {
        return Err(Error::LayerOutOfRange { k, lo: 0, hi: n });
    }
    Ok(LayerFamily::from_sorted_bits(
        n,
        k,
        KSubsets::new(n, k).collect(),
    ))
}

/// All `T` with `a ⊆ T ⊆ b` and `|T| = k`.
pub fn interval_middle_sets(a: VertexSet, b: VertexSet, k: usize) -> Result<LayerFamily> {
    let interval = Interval::new(a, b)?;
    subcube_layer(&interval.as_subcube(), k)
}

/// `V(Q) ∩ C([n], k)` for an interval subcube `Q`.
pub fn subcube_layer(q: &Subcube, k: usize) -> Result<LayerFamily> {
    let range = q.weight_range();
    if !range.contains(&k) {
        return Err(Error::LayerOutOfRange {
            k,
            lo: *range.start(),
            hi: *range.end(),
        });
    }
    let base = q.base.bits;
    let words: Vec<u64> = subsets_of_size(q.free.bits, k - q.base.len())
        .map(|s| base | s)
        .collect();
    Ok(LayerFamily::from_sorted_bits(q.n(), k, words))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: usize, e: &[usize]) -> VertexSet {
        VertexSet::from_elements(n, e).unwrap()
    }

    #[test]
    fn distance_examples() {
        let n = 4;
        assert_eq!(distance(v(n, &[]), v(n, &[])).unwrap(), 0);
        assert_eq!(distance(v(n, &[1]), v(n, &[2])).unwrap(), 2);
        assert_eq!(distance(v(n, &[1, 2]), v(n, &[2, 3])).unwrap(), 2);
        assert_eq!(
            distance(v(3, &[1]), v(4, &[1])),
            Err(Error::DimensionMismatch(3, 4))
        );
    }

    #[test]
    fn distance_is_a_metric_on_q6() {
        let n = 6;
        let all: Vec<_> = (0..64).map(|b| VertexSet::new(n, b).unwrap()).collect();
        for &a in &all {
            for &b in &all {
                let dab = distance(a, b).unwrap();
                assert_eq!(dab, distance(b, a).unwrap());
                assert_eq!(dab == 0, a == b);
                for &c in &all {
                    assert!(distance(a, c).unwrap() <= dab + distance(b, c).unwrap());
                }
            }
        }
    }

    #[test]
    fn layer_examples() {
        let l = enumerate_layer(3, 0).unwrap();
        assert_eq!(l.members(), &[v(3, &[])]);
        let l = enumerate_layer(3, 2).unwrap();
        assert_eq!(l.members(), &[v(3, &[1, 2]), v(3, &[1, 3]), v(3, &[2, 3])]);
        assert_eq!(enumerate_layer(4, 2).unwrap().len(), 6);
        assert!(matches!(
            enumerate_layer(3, 4),
            Err(Error::LayerOutOfRange { .. })
        ));
        assert!(matches!(
            enumerate_layer(31, 1),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn layer_is_colex_and_ranked() {
        for n in 1..=8 {
            for k in 0..=n {
                let layer = enumerate_layer(n, k).unwrap();
                assert_eq!(layer.len() as u64, binomial(n, k));
                for (i, m) in layer.iter().enumerate() {
                    assert_eq!(colex_rank(m.bits()), i as u64);
                }
            }
        }
    }

    #[test]
    fn top_bit_enumeration_terminates() {
        assert_eq!(KSubsets::new(64, 63).count(), 64);
        assert_eq!(KSubsets::new(64, 64).count(), 1);
        assert_eq!(KSubsets::new(5, 0).collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn middle_set_examples() {
        let n = 6;
        let m = interval_middle_sets(v(n, &[]), v(n, &[1, 2]), 1).unwrap();
        assert_eq!(m.members(), &[v(n, &[1]), v(n, &[2])]);
        let m = interval_middle_sets(v(n, &[]), v(n, &[1, 2, 3, 4, 5, 6]), 3).unwrap();
        assert_eq!(m.len(), 20);
        let m = interval_middle_sets(v(n, &[1]), v(n, &[1, 2, 3]), 2).unwrap();
        assert_eq!(m.members(), &[v(n, &[1, 2]), v(n, &[1, 3])]);
        assert!(matches!(
            interval_middle_sets(v(n, &[4]), v(n, &[1, 2]), 1),
            Err(Error::NotContained { .. })
        ));
        assert!(matches!(
            interval_middle_sets(v(n, &[1]), v(n, &[1, 2]), 0),
            Err(Error::LayerOutOfRange { .. })
        ));
    }

    #[test]
    fn subcube_layer_examples() {
        let n = 4;
        let q = Subcube::new(v(n, &[]), v(n, &[1, 2])).unwrap();
        assert_eq!(
            subcube_layer(&q, 1).unwrap().members(),
            &[v(n, &[1]), v(n, &[2])]
        );
        let q = Subcube::new(v(n, &[3]), v(n, &[1, 2])).unwrap();
        assert_eq!(
            subcube_layer(&q, 2).unwrap().members(),
            &[v(n, &[1, 3]), v(n, &[2, 3])]
        );
        let q = Subcube::new(v(n, &[]), v(n, &[1, 2, 3, 4])).unwrap();
        assert_eq!(subcube_layer(&q, 2).unwrap().len(), 6);
        assert!(matches!(
            Subcube::new(v(n, &[1]), v(n, &[1, 2])),
            Err(Error::OverlappingSubcube { .. })
        ));
    }

    #[test]
    fn middle_set_counts_exhaustive_n8() {
        let n = 8;
        for a in 0..1u64 << n {
            // every superset b of a
            for extra in all_subsets(!a & low_mask(n)) {
                let b = a | extra;
                let (va, vb) = (VertexSet::new(n, a).unwrap(), VertexSet::new(n, b).unwrap());
                for k in va.len()..=vb.len() {
                    let count = interval_middle_sets(va, vb, k).unwrap().len() as u64;
                    assert_eq!(count, binomial(vb.len() - va.len(), k - va.len()));
                }
            }
        }
    }

    #[test]
    fn subcube_layers_partition_subcube() {
        let n = 6;
        for free in 0..1u64 << n {
            for base in all_subsets(!free & low_mask(n)).step_by(3) {
                let q = Subcube::from_raw(n, base, free);
                let mut total = 0;
                for k in q.weight_range() {
                    let layer = subcube_layer(&q, k).unwrap();
                    let global = enumerate_layer(n, k).unwrap();
                    assert!(layer.iter().all(|m| global.contains(m) && q.contains(m)));
                    total += layer.len();
                }
                assert_eq!(total, 1 << q.dim());
            }
        }
    }

    #[test]
    fn text_forms() {
        let x = v(4, &[1, 3, 4]);
        assert_eq!(x.to_string(), "{1,3,4}");
        assert_eq!(x.to_hex(), "0xd");
        assert_eq!(VertexSet::parse(4, "0xd").unwrap(), x);
        assert_eq!(VertexSet::parse(4, "{1,3,4}").unwrap(), x);
        assert_eq!(VertexSet::parse(4, " {} ").unwrap(), v(4, &[]));
        assert!(VertexSet::parse(4, "0x10").is_err());
        assert!(VertexSet::parse(4, "{5}").is_err());
    }
}
