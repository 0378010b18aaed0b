use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::jet::SymbolJet;
use super::symbol::{FullSymbol, SymbolTerm};
use crate::geometry::CurvatureTensor;
use crate::moments::MultiIndex;

/// Symbol jet of `Δ^{−m̄}` at the center `x₀` of normal coordinates, in an
/// orthonormal frame.
#[derive(Debug, Clone)]
pub struct NormalJet {
    pub mbar: usize,
    /// `σ_{−2m̄}(x₀)`
    pub s0: FullSymbol,
    /// `σ_{−2m̄−1}(x₀)`, zero
    pub s1: FullSymbol,
    /// `σ_{−2m̄−2}(x₀)`
    pub s2: FullSymbol,
    /// `∂_{x_λ} σ_{−2m̄}(x₀)`, zero
    pub d_s0: Vec<FullSymbol>,
    /// `∂_{x_λ} σ_{−2m̄−1}(x₀)`
    pub d_s1: Vec<FullSymbol>,
    /// `∂_{x_λ}∂_{x_ν} σ_{−2m̄}(x₀)`
    pub dd_s0: Vec<Vec<FullSymbol>>,
}

/// Normal-coordinate jet of `Δ^{−m̄}` from the curvature at `x₀`.
///
/// With `Ric_jl = Σ_γ R_γjγl`:
///
/// * `σ_{−2m̄} = |ξ|^{−2m̄}`, `σ_{−2m̄−1} = 0`, `∂σ_{−2m̄} = 0`
/// * `σ_{−2m̄−2} = m̄(m̄+1)/3 |ξ|^{−2m̄−4} Σ Ric_jl ξ_j ξ_l`
/// * `∂_λ σ_{−2m̄−1} = −(2m̄ i/3) |ξ|^{−2m̄−2} Σ_t Ric_λt ξ_t`
/// * `∂_λ∂_ν σ_{−2m̄} = −(2m̄/3) |ξ|^{−2m̄−2} Σ R_αλβν ξ_α ξ_β`
pub fn normal_jet(curv: &CurvatureTensor, mbar: usize) -> NormalJet {
    assert!(mbar >= 1, "m̄ must be positive");
    let d = curv.dim();
    let norm = Arc::new(DMatrix::identity(d, d));
    let mb = mbar as i32;
    let mf = mbar as f64;
    let ric = curv.ricci();
    let pair = |a: usize, b: usize| MultiIndex::unit(d, a).with_incremented(b, 1);
    let build = |terms: Vec<SymbolTerm>| FullSymbol::from_terms(norm.clone(), terms).expect("indices in range");

    let s0 = FullSymbol::norm_power(norm.clone(), -mb, 1.0);
    let zero = FullSymbol::zero(norm.clone());

    let c2 = mf * (mf + 1.0) / 3.0;
    let s2 = build(
        (0..d)
            .flat_map(|j| (0..d).map(move |l| (j, l)))
            .map(|(j, l)| SymbolTerm::new(c2 * ric[(j, l)], pair(j, l), -mb - 2))
            .collect(),
    );

    let c1 = Complex64::new(0.0, -2.0 * mf / 3.0);
    let d_s1 = (0..d)
        .map(|lam| build((0..d).map(|t| SymbolTerm::new(c1 * ric[(lam, t)], MultiIndex::unit(d, t), -mb - 1)).collect()))
        .collect();

    let c0 = -2.0 * mf / 3.0;
    let dd_s0 = (0..d)
        .map(|lam| {
            (0..d)
                .map(|nu| {
                    let mut terms = Vec::with_capacity(d * d);
                    for a in 0..d {
                        for b in 0..d {
                            terms.push(SymbolTerm::new(c0 * curv.get(a, lam, b, nu), pair(a, b), -mb - 1));
                        }
                    }
                    build(terms)
                })
                .collect()
        })
        .collect();

    NormalJet { mbar, s0, s1: zero.clone(), s2, d_s0: vec![zero; d], d_s1, dd_s0 }
}

impl NormalJet {
    pub fn dim(&self) -> usize {
        self.s0.dim()
    }

    /// As a [`SymbolJet`]: value through degree `−2m̄−2`, first derivatives
    /// through `−2m̄−1`, second derivatives through `−2m̄`.
    pub fn as_symbol_jet(&self) -> SymbolJet {
        let mb = self.mbar as i32;
        let d = self.dim();
        let value = self.s0.add(&self.s1).and_then(|s| s.add(&self.s2)).expect("shared frame");
        let mut jet = SymbolJet::value_only(value.truncate(-2 * mb - 2), -2 * mb);
        for l in 0..d {
            jet.d1[l] = self.d_s0[l].add(&self.d_s1[l]).expect("shared frame").truncate(-2 * mb - 1);
            for n in 0..d {
                jet.d2[l][n] = self.dd_s0[l][n].truncate(-2 * mb);
            }
        }
        jet
    }
}
