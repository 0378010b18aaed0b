use num_complex::Complex64;

use super::jet::SymbolJet;
use super::laplace::{contracted_christoffel_jet, SymbolField};
use super::symbol::FullSymbol;
use crate::error::{Error, Result};
use crate::geometry::{inverse_metric, MetricField, Point};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `Σ_k ∂_{ξ_k} a · D_k b`, the first-order correction without its `−i`.
fn first_order(a: &SymbolJet, b: &SymbolJet) -> Result<SymbolJet> {
    let mut acc = SymbolJet::zero(a.value.norm_arc(), a.top + b.top - 1);
    for k in 0..a.dim() {
        acc = acc.add(&a.d_xi(k).mul(&b.shift(k))?)?;
    }
    Ok(acc)
}

/// `Σ_{k,l} ∂_{ξ_k}∂_{ξ_l} a · D_k D_l b`.
fn second_order(a: &SymbolJet, b: &SymbolJet) -> Result<SymbolJet> {
    let mut acc = SymbolJet::zero(a.value.norm_arc(), a.top + b.top - 2);
    for k in 0..a.dim() {
        let ak = a.d_xi(k);
        let bk = b.shift(k);
        for l in 0..a.dim() {
            acc = acc.add(&ak.d_xi(l).mul(&bk.shift(l))?)?;
        }
    }
    Ok(acc)
}

/// Jet of `q_{−2} = 1/p₂` for a leading symbol proportional to the norm
/// form: `r' = −r² p'`, `r'' = 2r³ p'p' − r² p''`.
fn reciprocal(p2: &SymbolJet) -> Result<SymbolJet> {
    let norm = p2.value.norm_arc();
    if norm.clone_owned().cholesky().is_none() {
        return Err(Error::NotElliptic);
    }
    let expanded = p2.value.expand_norm_powers();
    let unit = FullSymbol::quadratic(norm.clone(), &norm)?;
    // p₂ = c |ξ|², read c off a diagonal coefficient and verify
    let c = (0..p2.dim())
        .map(|k| {
            let probe: Vec<f64> = (0..p2.dim()).map(|j| if j == k { 1.0 } else { 0.0 }).collect();
            expanded.eval(&probe).re / norm[(k, k)]
        })
        .next()
        .unwrap_or(1.0);
    if !(c > 0.0) || expanded.sub(&unit.scale(c))?.max_abs_coeff() > 1e-12 * c.max(1.0) {
        return Err(Error::NotElliptic);
    }
    let r = FullSymbol::norm_power(norm.clone(), -1, 1.0 / c);
    let r2 = r.mul(&r)?;
    let r3 = r2.mul(&r)?;
    let d = p2.dim();
    let mut out = SymbolJet::value_only(r, -2);
    for k in 0..d {
        out.d1[k] = r2.mul(&p2.d1[k])?.scale(-1.0);
    }
    for k in 0..d {
        for l in 0..d {
            out.d2[k][l] = r3.mul(&p2.d1[k])?.mul(&p2.d1[l])?.scale(2.0).sub(&r2.mul(&p2.d2[k][l])?)?;
        }
    }
    Ok(out)
}

/// Homogeneous parametrix pieces `(q_{−2}, q_{−3}, q_{−4})` as jets, from
/// the recursion
///
/// * `q_{−2} = p₂^{-1}`
/// * `q_{−3} = −q_{−2}(p₁ q_{−2} − i Σ ∂_{ξ_k}p₂ ∂_{x_k}q_{−2})`
/// * `q_{−4} = −q_{−2}(p₀ q_{−2} + p₁ q_{−3} − i Σ ∂_{ξ_k}p₂ ∂_{x_k}q_{−3}
///   − i Σ ∂_{ξ_k}p₁ ∂_{x_k}q_{−2} − ½ Σ ∂_{ξ_k}∂_{ξ_l}p₂ ∂_{x_k}∂_{x_l}q_{−2})`
pub fn parametrix_pieces(p: &SymbolJet) -> Result<[SymbolJet; 3]> {
    let (p2, p1, p0) = (p.component(2), p.component(1), p.component(0));
    let q2 = reciprocal(&p2)?;
    let neg_q2 = q2.scale(-1.0);

    let inner3 = p1.mul(&q2)?.sub(&first_order(&p2, &q2)?.scale(I))?;
    let q3 = neg_q2.mul(&inner3)?;

    let inner4 = p0
        .mul(&q2)?
        .add(&p1.mul(&q3)?)?
        .sub(&first_order(&p2, &q3)?.scale(I))?
        .sub(&first_order(&p1, &q2)?.scale(I))?
        .sub(&second_order(&p2, &q2)?.scale(0.5))?;
    let q4 = neg_q2.mul(&inner4)?;
    Ok([q2, q3, q4])
}

/// Parametrix jet `q_{−2} + q_{−3} + q_{−4}`, complete to degree −4 in value,
/// −3 in first and −2 in second x-derivatives.
pub fn parametrix_jet(p: &SymbolJet) -> Result<SymbolJet> {
    let [q2, q3, q4] = parametrix_pieces(p)?;
    Ok(q2.add(&q3)?.add(&q4)?.truncate(-4, -3, -2))
}

/// Parametrix of `field` at `x` through degree `−depth`, `depth ∈ {2, 3, 4}`.
pub fn parametrix(field: &dyn SymbolField, x: &Point, depth: u32) -> Result<FullSymbol> {
    if !(2..=4).contains(&depth) {
        return Err(Error::TruncationTooDeep { requested: -(depth as i32), supported: -4 });
    }
    let [q2, q3, q4] = parametrix_pieces(&field.jet(x, 2)?)?;
    let mut s = q2.value;
    if depth >= 3 {
        s = s.add(&q3.value)?;
    }
    if depth >= 4 {
        s = s.add(&q4.value)?;
    }
    Ok(s.truncate(-(depth as i32)))
}

/// Parametrix of a symbol field as a field, for composition.
pub struct ParametrixField<F: SymbolField> {
    pub base: F,
}

impl<F: SymbolField> SymbolField for ParametrixField<F> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn jet(&self, x: &Point, _order: usize) -> Result<SymbolJet> {
        parametrix_jet(&self.base.jet(x, 2)?)
    }
}

/// Closed form of `q_{−3}` for the Laplacian of `metric`:
/// `−i|ξ|^{-4} Γ^k ξ_k − 2i|ξ|^{-6} ξ^k ξ_α ξ_β ∂_k g^{αβ}` with `ξ^k = g^{kl}ξ_l`.
pub fn q3_closed_form(metric: &MetricField, x: &Point) -> Result<FullSymbol> {
    let jet = metric.jet(x, 1)?;
    let ginv = inverse_metric(&jet.g)?;
    let (gamma, _) = contracted_christoffel_jet(&jet, &ginv);
    let (dginv, _) = jet.inverse_derivatives(&ginv);
    let norm = std::sync::Arc::new(ginv.clone());
    let d = metric.dim();
    let lin: Vec<Complex64> = gamma.iter().map(|g| Complex64::new(0.0, -g)).collect();
    let first = FullSymbol::linear(norm.clone(), &lin)?.mul(&FullSymbol::norm_power(norm.clone(), -2, 1.0))?;
    let mut second = FullSymbol::zero(norm.clone());
    for k in 0..d {
        let raised: Vec<Complex64> = (0..d).map(|l| Complex64::new(ginv[(k, l)], 0.0)).collect();
        let xi_up = FullSymbol::linear(norm.clone(), &raised)?;
        second = second.add(&xi_up.mul(&FullSymbol::quadratic(norm.clone(), &dginv[k])?)?)?;
    }
    let second = second.mul(&FullSymbol::norm_power(norm.clone(), -3, Complex64::new(0.0, -2.0)))?;
    first.add(&second)
}
