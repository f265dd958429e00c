use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("dimension {n} outside supported range 1..={max}")]
    InvalidDimension { n: usize, max: usize },

    #[error("element {element} is outside the ground set [{n}]")]
    ElementOutOfRange { element: usize, n: usize },

    #[error("layer {k} outside range {lo}..={hi}")]
    LayerOutOfRange { k: usize, lo: usize, hi: usize },

    #[error("{low:#x} is not contained in {high:#x}")]
    NotContained { low: u64, high: u64 },

    #[error("subcube base {base:#x} and free part {free:#x} overlap")]
    OverlappingSubcube { base: u64, free: u64 },

    #[error("symmetric difference of size {size} exceeds the visibility cap {cap}")]
    DifferenceCapExceeded { size: usize, cap: usize },

    #[error("budget exceeded for {what}: {value} > {limit}")]
    BudgetExceeded {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("gap g = {0} must be at least 3")]
    GapTooSmall(usize),

    #[error("layer {k} is not congruent to residue {lambda} modulo {g}")]
    ResidueMismatch { k: usize, lambda: usize, g: usize },

    #[error("family on layer {k} violates the escape property at ({a:#x}, {b:#x})")]
    PropertyViolated { k: usize, a: u64, b: u64 },

    #[error("layer {0} has no coloring")]
    MissingLayer(usize),

    #[error("color {color} outside 0..{q}")]
    ColorOutOfRange { color: usize, q: usize },

    #[error("resampling did not converge within {rounds} rounds (n={n}, k={k}, g={g})")]
    NotConverged {
        n: usize,
        k: usize,
        g: usize,
        rounds: u64,
    },

    #[error("subcube dimension {0} is below 2")]
    SubcubeTooSmall(usize),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error: {0}")]
    Parse(String),
}
