use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::symbol::FullSymbol;
use crate::error::{Error, Result};

/// A symbol and its first and second x-derivatives at one point, all with the
/// norm form frozen at that point. Entries that were not computed are
/// unknown components (empty, floor `top + 1`).
#[derive(Debug, Clone)]
pub struct SymbolJet {
    pub value: FullSymbol,
    /// `d1[k] = ∂_{x_k} σ`
    pub d1: Vec<FullSymbol>,
    /// `d2[k][l] = ∂_{x_k} ∂_{x_l} σ`
    pub d2: Vec<Vec<FullSymbol>>,
    /// Upper bound on the homogeneity degree of every entry.
    pub top: i32,
}

impl SymbolJet {
    /// Jet whose derivatives are all unknown.
    pub fn value_only(value: FullSymbol, top: i32) -> Self {
        let d = value.dim();
        let norm = value.norm_arc();
        let unk = FullSymbol::unknown(norm, top);
        SymbolJet { d1: vec![unk.clone(); d], d2: vec![vec![unk; d]; d], value, top }
    }

    /// Jet of an x-independent symbol.
    pub fn constant(value: FullSymbol, top: i32) -> Self {
        let d = value.dim();
        let z = FullSymbol::zero(value.norm_arc());
        SymbolJet { d1: vec![z.clone(); d], d2: vec![vec![z; d]; d], value, top }
    }

    pub fn zero(norm: Arc<DMatrix<f64>>, top: i32) -> Self {
        Self::constant(FullSymbol::zero(norm), top)
    }

    pub fn dim(&self) -> usize {
        self.value.dim()
    }

    fn map2(&self, other: &SymbolJet, f: impl Fn(&FullSymbol, &FullSymbol) -> Result<FullSymbol>) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::FrameMismatch(format!("jet dimensions {} and {}", self.dim(), other.dim())));
        }
        let d = self.dim();
        Ok(SymbolJet {
            value: f(&self.value, &other.value)?,
            d1: (0..d).map(|k| f(&self.d1[k], &other.d1[k])).collect::<Result<_>>()?,
            d2: (0..d).map(|k| (0..d).map(|l| f(&self.d2[k][l], &other.d2[k][l])).collect()).collect::<Result<_>>()?,
            top: self.top.max(other.top),
        })
    }

    fn map(&self, f: impl Fn(&FullSymbol) -> FullSymbol) -> Self {
        SymbolJet {
            value: f(&self.value),
            d1: self.d1.iter().map(&f).collect(),
            d2: self.d2.iter().map(|row| row.iter().map(&f).collect()).collect(),
            top: self.top,
        }
    }

    pub fn add(&self, other: &SymbolJet) -> Result<Self> {
        self.map2(other, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &SymbolJet) -> Result<Self> {
        self.map2(other, |a, b| a.sub(b))
    }

    pub fn scale(&self, c: impl Into<Complex64>) -> Self {
        let c = c.into();
        self.map(|s| s.scale(c))
    }

    /// Leibniz rule through second order.
    pub fn mul(&self, other: &SymbolJet) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::FrameMismatch(format!("jet dimensions {} and {}", self.dim(), other.dim())));
        }
        let d = self.dim();
        let value = self.value.mul(&other.value)?;
        let mut d1 = Vec::with_capacity(d);
        for k in 0..d {
            d1.push(self.d1[k].mul(&other.value)?.add(&self.value.mul(&other.d1[k])?)?);
        }
        let mut d2 = Vec::with_capacity(d);
        for k in 0..d {
            let mut row = Vec::with_capacity(d);
            for l in 0..d {
                let s = self.d2[k][l]
                    .mul(&other.value)?
                    .add(&self.d1[k].mul(&other.d1[l])?)?
                    .add(&self.d1[l].mul(&other.d1[k])?)?
                    .add(&self.value.mul(&other.d2[k][l])?)?;
                row.push(s);
            }
            d2.push(row);
        }
        Ok(SymbolJet { value, d1, d2, top: self.top + other.top })
    }

    /// ∂/∂ξ_k entrywise.
    pub fn d_xi(&self, k: usize) -> Self {
        let mut j = self.map(|s| s.d_xi(k));
        j.top -= 1;
        j
    }

    /// The jet of `∂_{x_k} σ`; its second derivatives are unknown.
    pub fn shift(&self, k: usize) -> Self {
        let d = self.dim();
        let unk = FullSymbol::unknown(self.value.norm_arc(), self.top);
        SymbolJet {
            value: self.d1[k].clone(),
            d1: (0..d).map(|l| self.d2[k][l].clone()).collect(),
            d2: vec![vec![unk; d]; d],
            top: self.top,
        }
    }

    /// Homogeneous part of degree `deg` of every entry.
    pub fn component(&self, deg: i32) -> Self {
        let mut j = self.map(|s| s.component(deg));
        j.top = deg;
        j
    }

    /// Truncates value, first and second derivatives at the given floors.
    pub fn truncate(&self, value: i32, first: i32, second: i32) -> Self {
        SymbolJet {
            value: self.value.truncate(value),
            d1: self.d1.iter().map(|s| s.truncate(first)).collect(),
            d2: self.d2.iter().map(|r| r.iter().map(|s| s.truncate(second)).collect()).collect(),
            top: self.top,
        }
    }

    /// Floors of (value, first, second derivatives): the worst entry of each.
    pub fn floors(&self) -> (i32, i32, i32) {
        let f1 = self.d1.iter().map(|s| s.floor()).max().unwrap_or(self.value.floor());
        let f2 = self.d2.iter().flatten().map(|s| s.floor()).max().unwrap_or(f1);
        (self.value.floor(), f1, f2)
    }

    /// Substitutes `ξ = T ξ̂` entrywise.
    pub fn to_frame(&self, t: &DMatrix<f64>) -> Result<Self> {
        Ok(SymbolJet {
            value: self.value.to_frame(t)?,
            d1: self.d1.iter().map(|s| s.to_frame(t)).collect::<Result<_>>()?,
            d2: self.d2.iter().map(|r| r.iter().map(|s| s.to_frame(t)).collect()).collect::<Result<_>>()?,
            top: self.top,
        })
    }

    /// Largest canonical coefficient difference over all entries, comparing
    /// only degrees at or above each entry's floor in both jets.
    pub fn max_canonical_diff(&self, other: &SymbolJet) -> Result<f64> {
        let cmp = |a: &FullSymbol, b: &FullSymbol| -> Result<f64> {
            let f = a.floor().max(b.floor());
            Ok(a.truncate(f).canonical()?.max_coeff_diff(&b.truncate(f).canonical()?))
        };
        let mut worst = cmp(&self.value, &other.value)?;
        for k in 0..self.dim() {
            worst = worst.max(cmp(&self.d1[k], &other.d1[k])?);
            for l in 0..self.dim() {
                worst = worst.max(cmp(&self.d2[k][l], &other.d2[k][l])?);
            }
        }
        Ok(worst)
    }
}

/// Symbol of the composition `A ∘ B` as a jet:
/// `Σ_{|α|≤2} (1/α!) ∂_ξ^α a · D_x^α b` with `D_x = −i ∂_x`.
///
/// The value is complete down to its floor; that floor never extends past
/// what the `|α| ≤ 2` expansion resolves, `top_a + top_b − 2`.
pub fn compose_jet(a: &SymbolJet, b: &SymbolJet) -> Result<SymbolJet> {
    let mut parts = compose_parts(a, b)?.into_iter().map(|(_, j)| j);
    let mut acc = parts.next().expect("zeroth-order term always present");
    for p in parts {
        acc = acc.add(&p)?;
    }
    // |α| = 3 terms, absent here, reach degree top_a + top_b − 3
    let s = a.top + b.top - 2;
    Ok(acc.truncate(s, s, s))
}

/// Contributions grouped by `|α|`.
fn compose_parts(a: &SymbolJet, b: &SymbolJet) -> Result<Vec<(usize, SymbolJet)>> {
    if a.dim() != b.dim() {
        return Err(Error::FrameMismatch(format!("composing symbols of dimension {} and {}", a.dim(), b.dim())));
    }
    let d = a.dim();
    let mi = Complex64::new(0.0, -1.0);
    let zeroth = a.mul(b)?;
    let mut first: Option<SymbolJet> = None;
    let mut second: Option<SymbolJet> = None;
    for k in 0..d {
        let ak = a.d_xi(k);
        let bk = b.shift(k);
        let t = ak.mul(&bk)?.scale(mi);
        first = Some(match first {
            None => t,
            Some(s) => s.add(&t)?,
        });
        for l in 0..d {
            let t = ak.d_xi(l).mul(&bk.shift(l))?.scale(-0.5);
            second = Some(match second {
                None => t,
                Some(s) => s.add(&t)?,
            });
        }
    }
    let mut parts = vec![(0, zeroth)];
    parts.extend(first.map(|j| (1, j)));
    parts.extend(second.map(|j| (2, j)));
    Ok(parts)
}

/// Value of `σ(A ∘ B)` complete down to `floor`.
///
/// Fails with `TruncationTooDeep` when `|α| = 3` terms would reach `floor`,
/// and with `DerivativeUnavailable` when `b`'s jet lacks the x-derivatives
/// some `|α| ≤ 2` term needs at that depth.
pub fn compose_jets(a: &SymbolJet, b: &SymbolJet, floor: i32) -> Result<FullSymbol> {
    if a.dim() != b.dim() {
        return Err(Error::FrameMismatch(format!("composing symbols of dimension {} and {}", a.dim(), b.dim())));
    }
    let supported = a.top + b.top - 2;
    if floor < supported {
        return Err(Error::TruncationTooDeep { requested: floor, supported });
    }
    let d = a.dim();
    let zero = FullSymbol::zero(a.value.norm_arc());
    let mut parts = [a.value.mul(&b.value)?, zero.clone(), zero];
    for k in 0..d {
        let ak = a.value.d_xi(k);
        parts[1] = parts[1].add(&ak.mul(&b.d1[k])?.scale(Complex64::new(0.0, -1.0)))?;
        for l in 0..d {
            parts[2] = parts[2].add(&ak.d_xi(l).mul(&b.d2[k][l])?.scale(-0.5))?;
        }
    }
    let mut acc = FullSymbol::zero(a.value.norm_arc());
    for (order, part) in parts.iter().enumerate() {
        if part.floor() > floor {
            return Err(Error::DerivativeUnavailable { order });
        }
        acc = acc.add(&part.truncate(floor))?;
    }
    Ok(acc.truncate(floor))
}
