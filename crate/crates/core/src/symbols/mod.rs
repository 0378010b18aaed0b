//! Pseudodifferential symbol calculus.
//!
//! Symbols are finite sums `Σ c · ξ^α · |ξ|_G^{2q}` graded by homogeneity
//! `|α| + 2q`, where `G` is the inverse metric frozen at the base point.
//! Each symbol carries a floor: all degrees at or above it are complete.
//! Composition, parametrices and normal-coordinate jets are built on that
//! bookkeeping.

mod jet;
mod laplace;
mod normal;
mod parametrix;
mod symbol;

pub use jet::{compose_jet, compose_jets, SymbolJet};
pub use laplace::{
    contracted_christoffel_jet, laplace_jet_from_metric_jet, laplace_symbol, product_inverse, warped_laplace_symbol,
    warped_symbol_from_parts, ConstantSymbolField, FactorPoint, LaplaceSymbolField, SymbolField,
};
pub use normal::{normal_jet, NormalJet};
pub use parametrix::{parametrix, parametrix_jet, parametrix_pieces, q3_closed_form, ParametrixField};
pub use symbol::{FullSymbol, SymbolTerm, EXACT};

use crate::error::Result;
use crate::geometry::Point;

/// `σ(A ∘ B)` at `x`, complete down to degree `floor`.
pub fn compose(a: &dyn SymbolField, b: &dyn SymbolField, x: &Point, floor: i32) -> Result<FullSymbol> {
    compose_jets(&a.jet(x, 0)?, &b.jet(x, 2)?, floor)
}

/// Composite power `σ(B^k)` as a jet, by repeated composition.
pub fn compose_power(b: &SymbolJet, k: usize) -> Result<SymbolJet> {
    assert!(k >= 1, "power must be positive");
    let mut acc = b.clone();
    for _ in 1..k {
        acc = compose_jet(&acc, b)?;
    }
    Ok(acc)
}
