//! Truncated Harrison chains/cochains and the Poisson cochain double
//! complex: shuffle-quotient bases, the boundary `∂` and coboundary `d`,
//! the shuffle bracket `[ , ]`, the coboundary `δ`, and total-complex
//! HP¹/HP² on weight-truncated slices of possibly singular algebras.

mod chains;
mod cochain;
mod total;

pub use chains::{
    harrison_boundary, shuffle_image, ChainBases, ChainElem, TensorElem, TruncationError,
};
pub use cochain::{
    apply_diff_terms, canonicalize, chain_bracket, expand_d, expand_delta, Cochain, DiffTerm, Key,
    Spot, SpotKeys,
};
pub use total::{
    coboundary_d, coboundary_delta, rank_of_rows, total_coboundary, total_hp, SpotCoords,
    TotalHp, TotalSlice, Truncation,
};
