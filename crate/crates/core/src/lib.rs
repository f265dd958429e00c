//! Mutual-visibility sets and mutual-visibility colorings of hypercubes.
//!
//! The crate is organised bottom-up:
//!
//! - [`cube`]: vertices of `Q_n` as bit words, layers, intervals and interval subcubes.
//! - [`visibility`]: the exact geodesic visibility predicate, mutual-visibility
//!   verification and the three-layer obstruction.
//! - [`layered`]: the per-layer escape properties and assembly of a full
//!   coloring of `Q_n` with at most `g * q` mutual-visibility classes.
//! - [`lll`]: bad-event blocks, local lemma arithmetic and the resampling
//!   construction of per-layer two-colorings.
//! - [`exact`]: exact solvers for small cubes and the monochromatic-layer
//!   machinery behind the lower bound.

pub mod cube;
pub mod error;
pub mod exact;
pub mod layered;
pub mod lll;
pub mod visibility;

pub use cube::{
    binomial, colex_rank, distance, enumerate_layer, interval_middle_sets, subcube_layer, Interval,
    LayerFamily, Subcube, VertexSet,
};
pub use error::{Error, Result};
pub use layered::{
    assemble_cube_coloring, assemble_lambda_union, check_property_are, check_property_era,
    verify_cube_coloring, CubeColoring, LayerColoring,
};
pub use lll::{enumerate_blocks, lll_parameters, moser_tardos_layer_coloring, Block, LllReport};
pub use visibility::{
    find_three_layer_obstruction, is_mutual_visibility_set, three_layer_obstruction, visible,
    NonVisibilityWitness, ObstacleSet, ThreeLayerWitness,
};

/// Whether desk-scale size limits are enforced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Budget {
    #[default]
    Standard,
    /// Skip the soft limits. Hard limits (word width, DP cap) still apply.
    Unchecked,
}

impl Budget {
    pub(crate) fn check(self, what: &'static str, value: usize, limit: usize) -> Result<()> {
        if self == Budget::Standard && value > limit {
            return Err(Error::BudgetExceeded { what, value, limit });
        }
        Ok(())
    }
}
