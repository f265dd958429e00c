//! Layer-by-layer construction of mutual-visibility colorings.
//!
//! A family `F` of `k`-sets has the *wide escape property* for gap `g` when
//! every pair `A, B ⊆ [n]` with `|A| + g ≤ k ≤ |B| - g` admits a `k`-set
//! `T ∉ F` with `A ∩ B ⊆ T ⊆ A ∪ B`. The *block escape property* asks the
//! same only for `A ⊆ B` with `|A| = k - g` and `|B| = k + g`. The two are
//! equivalent, and unions of wide-escape families over layers congruent
//! modulo `g` are mutual-visibility sets. Coloring each layer with `q` such
//! classes therefore yields a coloring of `Q_n` with at most `g * q` classes.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cube::{
    binomial, check_materializable, colex_rank, low_mask, spread, subsets_of_size, KSubsets,
    LayerFamily, VertexSet,
};
use crate::error::{Error, Result};
use crate::visibility::{mutual_visibility_witness, NonVisibilityWitness, ObstacleSet};
use crate::Budget;

/// Outcome of an escape-property check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PropertyCheck {
    Holds,
    /// The first pair in canonical order with no escape set outside the family.
    Violated {
        a: VertexSet,
        b: VertexSet,
    },
}

impl PropertyCheck {
    pub fn holds(&self) -> bool {
        matches!(self, PropertyCheck::Holds)
    }
}

fn check_gap(g: usize) -> Result<()> {
    if g < 3 {
        return Err(Error::GapTooSmall(g));
    }
    Ok(())
}

fn family_lookup(family: &LayerFamily) -> ObstacleSet {
    ObstacleSet::from_bits(family.n(), family.iter().map(VertexSet::bits).collect())
}

/// The `C(2g, g)` ways to pick `g` of `2g` positions, as `2g`-bit words.
pub(crate) fn middle_patterns(g: usize) -> Vec<u64> {
    KSubsets::new(2 * g, g).collect()
}

/// Block escape property: every `A ⊆ B` with `|A| = k - g`, `|B| = k + g`
/// has some `k`-set `T ∉ family` between them.
///
/// Holds vacuously on boundary layers `k < g` or `k > n - g`. Pairs are
/// scanned with `A` in colex order, then `B \ A` in colex order.
pub fn check_property_are(family: &LayerFamily, g: usize) -> Result<PropertyCheck> {
    check_gap(g)?;
    let (n, k) = (family.n(), family.k());
    if k < g || k + g > n {
        return Ok(PropertyCheck::Holds);
    }
    // A block holds C(2g, g) middle sets; a smaller family cannot cover one.
    if (family.len() as u64) < binomial(2 * g, g) {
        return Ok(PropertyCheck::Holds);
    }
    let lookup = family_lookup(family);
    let patterns = middle_patterns(g);
    let lows: Vec<u64> = KSubsets::new(n, k - g).collect();
    let all = low_mask(n);
    let violation = lows.par_iter().find_map_first(|&a| {
        subsets_of_size(all & !a, 2 * g).find_map(|d| {
            let covered = patterns
                .iter()
                .all(|&p| lookup.contains_bits(a | spread(p, d)));
            covered.then_some((a, a | d))
        })
    });
    Ok(match violation {
        None => PropertyCheck::Holds,
        Some((a, b)) => PropertyCheck::Violated {
            a: VertexSet::from_raw(n, a),
            b: VertexSet::from_raw(n, b),
        },
    })
}

/// Wide escape property, quantified literally over all `A, B ∈ 2^[n]` with
/// `|A| + g ≤ k ≤ |B| - g`; `A` and `B` each scanned in ascending word order.
///
/// Verdicts are memoised on `(A ∩ B, A ∪ B)`, the only data the condition
/// reads. Limited to `n ≤ 14` under [`Budget::Standard`].
pub fn check_property_era(family: &LayerFamily, g: usize, budget: Budget) -> Result<PropertyCheck> {
    check_gap(g)?;
    let (n, k) = (family.n(), family.k());
    budget.check("wide escape check dimension n", n, 14)?;
    if n > 30 {
        return Err(Error::BudgetExceeded {
            what: "wide escape check dimension n",
            value: n,
            limit: 30,
        });
    }
    if k < g || k + g > n {
        return Ok(PropertyCheck::Holds);
    }
    let lookup = family_lookup(family);
    let mut small: Vec<u64> = (0..=k - g).flat_map(|s| KSubsets::new(n, s)).collect();
    let mut large: Vec<u64> = (k + g..=n).flat_map(|s| KSubsets::new(n, s)).collect();
    small.sort_unstable();
    large.sort_unstable();

    let mut memo: HashMap<(u64, u64), bool> = HashMap::new();
    for &a in &small {
        for &b in &large {
            let key = (a & b, a | b);
            let escapes = *memo
                .entry(key)
                .or_insert_with(|| has_escape(&lookup, family.len(), key.0, key.1, k));
            if !escapes {
                return Ok(PropertyCheck::Violated {
                    a: VertexSet::from_raw(n, a),
                    b: VertexSet::from_raw(n, b),
                });
            }
        }
    }
    Ok(PropertyCheck::Holds)
}

fn has_escape(lookup: &ObstacleSet, family_len: usize, low: u64, high: u64, k: usize) -> bool {
    let free = high & !low;
    let need = k - low.count_ones() as usize;
    if binomial(free.count_ones() as usize, need) > family_len as u64 {
        return true;
    }
    subsets_of_size(free, need).any(|s| !lookup.contains_bits(low | s))
}

/// The wide escape property through the block form; the two are equivalent
/// and a block violation is itself a wide violation.
pub fn check_property_era_fast(family: &LayerFamily, g: usize) -> Result<PropertyCheck> {
    check_property_are(family, g)
}

/// `M = ⋃_{k ≡ λ (mod g)} F_k` for wide-escape families `F_k`.
///
/// `lambda` ranges over `1..=g`; `lambda = g` stands for residue 0.
pub fn assemble_lambda_union(
    families: &BTreeMap<usize, LayerFamily>,
    g: usize,
    lambda: usize,
) -> Result<Vec<VertexSet>> {
    check_gap(g)?;
    if lambda == 0 || lambda > g {
        return Err(Error::Precondition(format!(
            "residue label {lambda} outside 1..={g}"
        )));
    }
    let mut n = None;
    let mut union = Vec::new();
    for (&k, family) in families {
        if family.k() != k {
            return Err(Error::Precondition(format!(
                "family keyed by layer {k} holds {}-sets",
                family.k()
            )));
        }
        if k % g != lambda % g {
            return Err(Error::ResidueMismatch { k, lambda, g });
        }
        match n {
            None => n = Some(family.n()),
            Some(n) if n != family.n() => return Err(Error::DimensionMismatch(n, family.n())),
            _ => {}
        }
        if let PropertyCheck::Violated { a, b } = check_property_era_fast(family, g)? {
            return Err(Error::PropertyViolated {
                k,
                a: a.bits(),
                b: b.bits(),
            });
        }
        union.extend(family.iter());
    }
    union.sort_unstable();
    Ok(union)
}

/// A `q`-coloring of layer `k` of `Q_n`. Colors are `0..q`, stored in colex
/// order of the layer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerColoring {
    n: usize,
    k: usize,
    q: usize,
    colors: Vec<u8>,
}

impl LayerColoring {
    pub fn new(n: usize, k: usize, q: usize, colors: Vec<u8>) -> Result<Self> {
        check_materializable(n)?;
        if k > n {
            return Err(Error::LayerOutOfRange { k, lo: 0, hi: n });
        }
        if q == 0 || q > 256 {
            return Err(Error::Precondition(format!(
                "color count {q} outside 1..=256"
            )));
        }
        let expected = binomial(n, k);
        if colors.len() as u64 != expected {
            return Err(Error::Precondition(format!(
                "layer {k} of Q_{n} has {expected} sets, got {} colors",
                colors.len()
            )));
        }
        if let Some(&c) = colors.iter().find(|&&c| c as usize >= q) {
            return Err(Error::ColorOutOfRange {
                color: c as usize,
                q,
            });
        }
        Ok(Self { n, k, q, colors })
    }

    /// Every set of the layer in color 0.
    pub fn uniform(n: usize, k: usize, q: usize) -> Result<Self> {
        check_materializable(n)?;
        Self::new(n, k, q, vec![0; binomial(n, k) as usize])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn colors(&self) -> &[u8] {
        &self.colors
    }

    pub fn color_of(&self, v: VertexSet) -> Option<u8> {
        if v.dim() != self.n || v.len() != self.k {
            return None;
        }
        self.colors.get(colex_rank(v.bits()) as usize).copied()
    }

    /// Color class `color` as a family.
    pub fn class(&self, color: usize) -> LayerFamily {
        let words = KSubsets::new(self.n, self.k)
            .zip(&self.colors)
            .filter(|(_, &c)| c as usize == color)
            .map(|(w, _)| w)
            .collect();
        LayerFamily::from_sorted_bits(self.n, self.k, words)
    }
}

/// A coloring of all of `V(Q_n)`, indexed by vertex word.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CubeColoring {
    pub n: usize,
    pub g: usize,
    pub q: usize,
    pub classes: Vec<u32>,
}

impl CubeColoring {
    pub fn new(n: usize, g: usize, q: usize, classes: Vec<u32>) -> Result<Self> {
        check_materializable(n)?;
        if g == 0 || q == 0 {
            return Err(Error::Precondition("g and q must be positive".into()));
        }
        if classes.len() != 1usize << n {
            return Err(Error::Precondition(format!(
                "Q_{n} has {} vertices, got {} class ids",
                1usize << n,
                classes.len()
            )));
        }
        let limit = g * q;
        if let Some(&c) = classes.iter().find(|&&c| c as usize >= limit) {
            return Err(Error::ColorOutOfRange {
                color: c as usize,
                q: limit,
            });
        }
        Ok(Self { n, g, q, classes })
    }

    pub fn class_of(&self, v: VertexSet) -> u32 {
        self.classes[v.bits() as usize]
    }

    /// Distinct class ids in use, ascending.
    pub fn used_classes(&self) -> Vec<u32> {
        let mut ids = self.classes.clone();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    pub fn class_members(&self, class: u32) -> ObstacleSet {
        let words = (0..self.classes.len() as u64)
            .filter(|&w| self.classes[w as usize] == class)
            .collect();
        ObstacleSet::from_bits(self.n, words)
    }

    /// Residue label `λ ∈ 1..=g` of a class id from the layered construction.
    pub fn residue_label(&self, class: u32) -> usize {
        match class as usize / self.q {
            0 => self.g,
            r => r,
        }
    }
}

/// Class id of a vertex at layer `k` with in-layer color `color`.
pub fn class_id(k: usize, color: usize, g: usize, q: usize) -> u32 {
    ((k % g) * q + color) as u32
}

/// Combines per-layer colorings into a coloring of `Q_n` with at most `g * q`
/// classes; class `(k mod g) * q + i` collects color `i` of every layer `k`
/// in that residue class.
pub fn assemble_cube_coloring(
    layer_colorings: &BTreeMap<usize, LayerColoring>,
    g: usize,
) -> Result<CubeColoring> {
    check_gap(g)?;
    let first = layer_colorings
        .values()
        .next()
        .ok_or(Error::MissingLayer(0))?;
    let (n, q) = (first.n, first.q);
    check_materializable(n)?;
    for k in 0..=n {
        let layer = layer_colorings.get(&k).ok_or(Error::MissingLayer(k))?;
        if layer.n != n || layer.k != k {
            return Err(Error::Precondition(format!(
                "entry {k} holds layer {} of Q_{}",
                layer.k, layer.n
            )));
        }
        if layer.q != q {
            return Err(Error::Precondition(format!(
                "layer {k} uses {} colors, expected {q}",
                layer.q
            )));
        }
    }
    if let Some(&extra) = layer_colorings.keys().find(|&&k| k > n) {
        return Err(Error::LayerOutOfRange {
            k: extra,
            lo: 0,
            hi: n,
        });
    }
    for (&k, layer) in layer_colorings {
        for color in 0..q {
            if let PropertyCheck::Violated { a, b } = check_property_are(&layer.class(color), g)? {
                return Err(Error::PropertyViolated {
                    k,
                    a: a.bits(),
                    b: b.bits(),
                });
            }
        }
    }

    let mut classes = vec![0u32; 1usize << n];
    for (k, layer) in layer_colorings {
        for (word, &color) in KSubsets::new(n, *k).zip(&layer.colors) {
            classes[word as usize] = class_id(*k, color as usize, g, q);
        }
    }
    let coloring = CubeColoring { n, g, q, classes };
    assert!(coloring.used_classes().len() <= g * q);
    Ok(coloring)
}

/// Verdict for one class of a coloring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassVerdict {
    pub class: u32,
    pub size: usize,
    pub witness: Option<NonVisibilityWitness>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CubeVerdict {
    pub classes: Vec<ClassVerdict>,
}

impl CubeVerdict {
    pub fn passed(&self) -> bool {
        self.classes.iter().all(|c| c.witness.is_none())
    }

    pub fn first_failure(&self) -> Option<&ClassVerdict> {
        self.classes.iter().find(|c| c.witness.is_some())
    }
}

/// Checks every class of `c` for mutual visibility. Limited to `n ≤ 10`
/// under [`Budget::Standard`].
pub fn verify_cube_coloring(c: &CubeColoring, budget: Budget) -> Result<CubeVerdict> {
    budget.check("verification dimension n", c.n, 10)?;
    let mut classes = Vec::new();
    for class in c.used_classes() {
        let members = c.class_members(class);
        classes.push(ClassVerdict {
            class,
            size: members.len(),
            witness: mutual_visibility_witness(&members)?,
        });
    }
    Ok(CubeVerdict { classes })
}
