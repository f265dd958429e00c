//! Bad-event blocks and resampling two-colorings of a single layer.
//!
//! For layer `k` and gap `g`, a block is a pair `A ⊆ B` with `|A| = k - g`
//! and `|B| = k + g`. Its bad event is that all `C(2g, g)` middle `k`-sets
//! share a color. A two-coloring of the layer without bad events makes both
//! color classes satisfy the block escape property.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cube::{
    binomial, check_materializable, colex_rank, low_mask, spread, subsets_of_size, KSubsets,
    VertexSet,
};
use crate::error::{Error, Result};
use crate::layered::{check_property_are, middle_patterns, LayerColoring};

/// A pair `A ⊆ B` with `|B \ A| = 2g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Block {
    pub a: VertexSet,
    pub b: VertexSet,
}

impl Block {
    pub fn gap(&self) -> usize {
        (self.b.len() - self.a.len()) / 2
    }

    /// The middle `k`-sets `A ⊆ T ⊆ B`, colex order.
    pub fn middle_sets(&self) -> Vec<VertexSet> {
        let (a, d) = (self.a.bits(), self.b.bits() & !self.a.bits());
        let n = self.a.dim();
        subsets_of_size(d, self.gap())
            .map(|s| VertexSet::from_raw(n, a | s))
            .collect()
    }
}

fn is_middle_layer(n: usize, k: usize, g: usize) -> bool {
    k >= g && k + g <= n
}

/// Number of blocks at layer `k`: `C(n, k-g) * C(n-k+g, 2g)`.
pub fn block_count(n: usize, k: usize, g: usize) -> u64 {
    if !is_middle_layer(n, k, g) {
        return 0;
    }
    binomial(n, k - g) * binomial(n - (k - g), 2 * g)
}

/// All blocks of layer `k`: `A` in colex order, then `B \ A` in colex order.
///
/// Boundary layers (`k < g` or `k > n - g`) have no blocks and yield an
/// empty list.
pub fn enumerate_blocks(n: usize, k: usize, g: usize) -> Result<Vec<Block>> {
    check_materializable(n)?;
    if g == 0 {
        return Err(Error::GapTooSmall(g));
    }
    if k > n {
        return Err(Error::LayerOutOfRange { k, lo: 0, hi: n });
    }
    if !is_middle_layer(n, k, g) {
        return Ok(Vec::new());
    }
    let all = low_mask(n);
    let mut blocks = Vec::with_capacity(block_count(n, k, g) as usize);
    for a in KSubsets::new(n, k - g) {
        for d in subsets_of_size(all & !a, 2 * g) {
            blocks.push(Block {
                a: VertexSet::from_raw(n, a),
                b: VertexSet::from_raw(n, a | d),
            });
        }
    }
    Ok(blocks)
}

/// Symmetric local lemma arithmetic for one layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LllReport {
    pub n: usize,
    pub k: usize,
    pub g: usize,
    /// `p = 2^p_log2` bounds the probability of one bad event.
    pub p_log2: i64,
    pub p: f64,
    /// Dependency bound `C(2g, g) * C(k, g) * C(n-k, g)`.
    pub d: u128,
    /// `e * p * (d + 1)`.
    pub criterion: f64,
    pub satisfied: bool,
}

/// Evaluates `p = 2^(1 - C(2g, g))`, `d = C(2g, g) C(k, g) C(n - k, g)` and
/// `e p (d + 1)` for layer `k` of `Q_n`.
pub fn lll_parameters(n: usize, k: usize, g: usize) -> Result<LllReport> {
    if g < 3 {
        return Err(Error::GapTooSmall(g));
    }
    if n > 64 {
        return Err(Error::InvalidDimension { n, max: 64 });
    }
    if !is_middle_layer(n, k, g) {
        return Err(Error::LayerOutOfRange {
            k,
            lo: g,
            hi: n.saturating_sub(g),
        });
    }
    let block = binomial(2 * g, g);
    let d = block as u128 * binomial(k, g) as u128 * binomial(n - k, g) as u128;
    let p_log2 = 1 - block as i64;
    // Work in logs so large g does not underflow before the product.
    let ln_criterion = 1.0 + p_log2 as f64 * std::f64::consts::LN_2 + ((d + 1) as f64).ln();
    let criterion = if p_log2 >= -1000 {
        std::f64::consts::E * 2f64.powi(p_log2 as i32) * (d + 1) as f64
    } else {
        ln_criterion.exp()
    };
    Ok(LllReport {
        n,
        k,
        g,
        p_log2,
        p: 2f64.powi(p_log2.max(i32::MIN as i64) as i32),
        d,
        criterion,
        satisfied: criterion <= 1.0,
    })
}

/// Default resampling cap: `1000` rounds per block.
pub fn default_max_rounds(n: usize, k: usize, g: usize) -> u64 {
    1000 * block_count(n, k, g).max(1)
}

/// Seed of the stream that colors layer `k` under master seed `seed`.
pub fn layer_seed(seed: u64, k: usize) -> u64 {
    // splitmix64 finaliser over (seed, k)
    let mut z = seed
        ^ (k as u64)
            .wrapping_add(1)
            .wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Statistics of one resampling run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ResampleStats {
    pub blocks: u64,
    pub resamplings: u64,
}

struct BlockScan<'a> {
    n: usize,
    k: usize,
    g: usize,
    patterns: &'a [u64],
}

impl BlockScan<'_> {
    /// The canonically first block whose middle sets share a color.
    fn first_monochromatic(&self, colors: &[u8]) -> Option<(u64, u64)> {
        let all = low_mask(self.n);
        for a in KSubsets::new(self.n, self.k - self.g) {
            for d in subsets_of_size(all & !a, 2 * self.g) {
                let mut iter = self
                    .patterns
                    .iter()
                    .map(|&p| colors[colex_rank(a | spread(p, d)) as usize]);
                let first = iter.next().unwrap();
                if iter.all(|c| c == first) {
                    return Some((a, d));
                }
            }
        }
        None
    }
}

/// Two-colors layer `k` of `Q_n` so that no block is monochromatic.
///
/// Colors start uniformly random; while some block is monochromatic, the
/// canonically first one has its middle sets re-randomised. Boundary layers
/// get the single color 0. The run is a pure function of `(n, k, g, seed)`.
pub fn moser_tardos_layer_coloring(
    n: usize,
    k: usize,
    g: usize,
    seed: u64,
    max_rounds: Option<u64>,
) -> Result<(LayerColoring, ResampleStats)> {
    if g < 3 {
        return Err(Error::GapTooSmall(g));
    }
    check_materializable(n)?;
    if k > n {
        return Err(Error::LayerOutOfRange { k, lo: 0, hi: n });
    }
    if !is_middle_layer(n, k, g) {
        let coloring = LayerColoring::uniform(n, k, 2)?;
        return Ok((
            coloring,
            ResampleStats {
                blocks: 0,
                resamplings: 0,
            },
        ));
    }
    let max_rounds = max_rounds.unwrap_or_else(|| default_max_rounds(n, k, g));
    let mut rng = ChaCha8Rng::seed_from_u64(layer_seed(seed, k));
    let size = binomial(n, k) as usize;
    let mut colors: Vec<u8> = (0..size).map(|_| rng.gen_range(0..2u8)).collect();

    let patterns = middle_patterns(g);
    let scan = BlockScan {
        n,
        k,
        g,
        patterns: &patterns,
    };
    let mut resamplings = 0u64;
    while let Some((a, d)) = scan.first_monochromatic(&colors) {
        if resamplings >= max_rounds {
            return Err(Error::NotConverged {
                n,
                k,
                g,
                rounds: resamplings,
            });
        }
        for &p in &patterns {
            colors[colex_rank(a | spread(p, d)) as usize] = rng.gen_range(0..2u8);
        }
        resamplings += 1;
    }
    let coloring = LayerColoring::new(n, k, 2, colors)?;
    for color in 0..2 {
        assert!(check_property_are(&coloring.class(color), g)?.holds());
    }
    Ok((
        coloring,
        ResampleStats {
            blocks: block_count(n, k, g),
            resamplings,
        },
    ))
}
