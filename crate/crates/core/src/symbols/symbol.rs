use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::moments::{ratio_to_f64, sphere_area, MomentTable, MultiIndex};

/// Floor of a symbol known at every degree.
pub const EXACT: i32 = i32::MIN / 8;

const NORM_TOL: f64 = 1e-12;

/// `coeff · ξ^mono · |ξ|_G^{2q}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolTerm {
    pub coeff: Complex64,
    pub mono: MultiIndex,
    pub q: i32,
}

impl SymbolTerm {
    pub fn new(coeff: impl Into<Complex64>, mono: MultiIndex, q: i32) -> Self {
        SymbolTerm { coeff: coeff.into(), mono, q }
    }

    /// Homogeneity degree `|mono| + 2q`.
    pub fn degree(&self) -> i32 {
        self.mono.degree() as i32 + 2 * self.q
    }
}

type Key = (i32, i32, MultiIndex);

/// A finite sum of [`SymbolTerm`]s graded by homogeneity, together with the
/// quadratic form `G` defining `|ξ|_G² = ξᵀGξ` and a truncation floor.
///
/// Every degree `>= floor` is complete; nothing below the floor is stored.
#[derive(Clone)]
pub struct FullSymbol {
    norm: Arc<DMatrix<f64>>,
    terms: BTreeMap<Key, Complex64>,
    floor: i32,
}

impl fmt::Debug for FullSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FullSymbol[floor={}] {}", floor_label(self.floor), self)
    }
}

fn floor_label(f: i32) -> String {
    if f <= EXACT {
        "exact".into()
    } else {
        f.to_string()
    }
}

impl fmt::Display for FullSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, ((_, q, mono), c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({:.6}{:+.6}i)*{}", c.re, c.im, mono)?;
            if *q != 0 {
                write!(f, "*|xi|^{}", 2 * q)?;
            }
        }
        Ok(())
    }
}

fn key(mono: MultiIndex, q: i32) -> Key {
    (mono.degree() as i32 + 2 * q, q, mono)
}

fn clamp_floor(f: i64) -> i32 {
    f.clamp(EXACT as i64, i32::MAX as i64 / 8) as i32
}

impl FullSymbol {
    /// The exact zero symbol.
    pub fn zero(norm: Arc<DMatrix<f64>>) -> Self {
        assert!(norm.is_square(), "norm form must be square");
        FullSymbol { norm, terms: BTreeMap::new(), floor: EXACT }
    }

    /// Zero symbol with the Euclidean norm on ℝ^dim.
    pub fn euclidean_zero(dim: usize) -> Self {
        Self::zero(Arc::new(DMatrix::identity(dim, dim)))
    }

    /// A homogeneous component of degree `degree` whose value is not known.
    pub fn unknown(norm: Arc<DMatrix<f64>>, degree: i32) -> Self {
        FullSymbol { norm, terms: BTreeMap::new(), floor: degree.saturating_add(1) }
    }

    pub fn from_terms(norm: Arc<DMatrix<f64>>, terms: impl IntoIterator<Item = SymbolTerm>) -> Result<Self> {
        let mut s = Self::zero(norm);
        for t in terms {
            s.push(t)?;
        }
        Ok(s)
    }

    /// `c · |ξ|^{2q}`.
    pub fn norm_power(norm: Arc<DMatrix<f64>>, q: i32, c: impl Into<Complex64>) -> Self {
        let dim = norm.nrows();
        let mut s = Self::zero(norm);
        s.insert(MultiIndex::zero(dim), q, c.into());
        s
    }

    pub fn constant(norm: Arc<DMatrix<f64>>, c: impl Into<Complex64>) -> Self {
        Self::norm_power(norm, 0, c)
    }

    /// `Σ_k c_k ξ_k`.
    pub fn linear(norm: Arc<DMatrix<f64>>, c: &[Complex64]) -> Result<Self> {
        let dim = norm.nrows();
        check_len(dim, c.len())?;
        let mut s = Self::zero(norm);
        for (k, ck) in c.iter().enumerate() {
            s.insert(MultiIndex::unit(dim, k), 0, *ck);
        }
        Ok(s)
    }

    /// `Σ_{j,l} a_jl ξ_j ξ_l` as a polynomial.
    pub fn quadratic(norm: Arc<DMatrix<f64>>, a: &DMatrix<f64>) -> Result<Self> {
        let dim = norm.nrows();
        check_len(dim, a.nrows())?;
        check_len(dim, a.ncols())?;
        let mut s = Self::zero(norm);
        for j in 0..dim {
            for l in 0..dim {
                if a[(j, l)] != 0.0 {
                    let m = MultiIndex::unit(dim, j).with_incremented(l, 1);
                    s.insert(m, 0, Complex64::new(a[(j, l)], 0.0));
                }
            }
        }
        Ok(s)
    }

    /// Adds one term, validating its length.
    pub fn push(&mut self, t: SymbolTerm) -> Result<()> {
        check_len(self.dim(), t.mono.len())?;
        if !t.coeff.is_finite() {
            return Err(Error::Config(format!("non-finite symbol coefficient {}", t.coeff)));
        }
        if t.degree() >= self.floor {
            self.insert(t.mono, t.q, t.coeff);
        }
        Ok(())
    }

    fn insert(&mut self, mono: MultiIndex, q: i32, c: Complex64) {
        if c == Complex64::new(0.0, 0.0) {
            return;
        }
        let k = key(mono, q);
        if k.0 < self.floor {
            return;
        }
        let zero = Complex64::new(0.0, 0.0);
        match self.terms.entry(k) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if *o.get() == zero {
                    o.remove();
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.norm.nrows()
    }

    pub fn norm(&self) -> &DMatrix<f64> {
        &self.norm
    }

    pub fn norm_arc(&self) -> Arc<DMatrix<f64>> {
        self.norm.clone()
    }

    pub fn floor(&self) -> i32 {
        self.floor
    }

    pub fn is_exact(&self) -> bool {
        self.floor <= EXACT
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// Highest degree carried, if any term is present.
    pub fn top(&self) -> Option<i32> {
        self.terms.keys().next_back().map(|k| k.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = SymbolTerm> + '_ {
        self.terms.iter().map(|((_, q, m), c)| SymbolTerm { coeff: *c, mono: m.clone(), q: *q })
    }

    /// Distinct degrees present, ascending.
    pub fn degrees(&self) -> Vec<i32> {
        let mut d: Vec<i32> = self.terms.keys().map(|k| k.0).collect();
        d.dedup();
        d
    }

    /// Homogeneous part of degree `d`; unknown when `d` is below the floor.
    pub fn component(&self, d: i32) -> FullSymbol {
        if d < self.floor {
            return Self::unknown(self.norm.clone(), d);
        }
        let terms = self.terms.iter().filter(|(k, _)| k.0 == d).map(|(k, c)| (k.clone(), *c)).collect();
        FullSymbol { norm: self.norm.clone(), terms, floor: EXACT }
    }

    /// Drops everything below `floor`.
    pub fn truncate(&self, floor: i32) -> FullSymbol {
        let floor = self.floor.max(floor);
        let terms = self.terms.iter().filter(|(k, _)| k.0 >= floor).map(|(k, c)| (k.clone(), *c)).collect();
        FullSymbol { norm: self.norm.clone(), terms, floor }
    }

    fn check_compatible(&self, other: &FullSymbol) -> Result<()> {
        if Arc::ptr_eq(&self.norm, &other.norm) {
            return Ok(());
        }
        if self.dim() != other.dim() {
            return Err(Error::FrameMismatch(format!("dimensions {} and {}", self.dim(), other.dim())));
        }
        let scale = self.norm.amax().max(1.0);
        let diff = (&*self.norm - &*other.norm).amax();
        if diff > NORM_TOL * scale {
            return Err(Error::FrameMismatch(format!("norm forms differ by {diff:.3e}")));
        }
        Ok(())
    }

    pub fn add(&self, other: &FullSymbol) -> Result<FullSymbol> {
        self.check_compatible(other)?;
        let floor = self.floor.max(other.floor);
        let mut out = FullSymbol { norm: self.norm.clone(), terms: BTreeMap::new(), floor };
        for (k, c) in self.terms.iter().chain(other.terms.iter()) {
            out.insert(k.2.clone(), k.1, *c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &FullSymbol) -> Result<FullSymbol> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: impl Into<Complex64>) -> FullSymbol {
        let c = c.into();
        let mut out = FullSymbol { norm: self.norm.clone(), terms: BTreeMap::new(), floor: self.floor };
        for (k, v) in &self.terms {
            out.insert(k.2.clone(), k.1, v * c);
        }
        out
    }

    /// Graded product. The result is complete down to
    /// `max(top_A + floor_B, floor_A + top_B, floor_A + floor_B − 1)`.
    pub fn mul(&self, other: &FullSymbol) -> Result<FullSymbol> {
        self.check_compatible(other)?;
        let (fa, fb) = (self.floor as i64, other.floor as i64);
        let mut floor = fa + fb - 1;
        if let Some(ta) = self.top() {
            floor = floor.max(ta as i64 + fb);
        }
        if let Some(tb) = other.top() {
            floor = floor.max(fa + tb as i64);
        }
        let floor = clamp_floor(floor);
        let mut out = FullSymbol { norm: self.norm.clone(), terms: BTreeMap::new(), floor };
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                if ka.0 + kb.0 < floor {
                    continue;
                }
                out.insert(ka.2.add(&kb.2), ka.1 + kb.1, ca * cb);
            }
        }
        Ok(out)
    }

    /// ∂/∂ξ_k, using ∂_k |ξ|^{2q} = 2q (Gξ)_k |ξ|^{2q−2}.
    pub fn d_xi(&self, k: usize) -> FullSymbol {
        let dim = self.dim();
        assert!(k < dim, "xi index {k} out of range");
        let floor = if self.is_exact() { EXACT } else { self.floor - 1 };
        let mut out = FullSymbol { norm: self.norm.clone(), terms: BTreeMap::new(), floor };
        for ((_, q, m), c) in &self.terms {
            if let Some(lower) = m.with_decremented(k) {
                out.insert(lower, *q, c * m.exponents()[k] as f64);
            }
            if *q != 0 {
                for l in 0..dim {
                    let g = self.norm[(k, l)];
                    if g != 0.0 {
                        out.insert(m.with_incremented(l, 1), q - 1, c * (2.0 * *q as f64 * g));
                    }
                }
            }
        }
        out
    }

    /// Value at a covector `ξ`.
    pub fn eval(&self, xi: &[f64]) -> Complex64 {
        let v = nalgebra::DVector::from_column_slice(xi);
        let n2 = (v.transpose() * &*self.norm * &v)[(0, 0)];
        self.terms.iter().map(|((_, q, m), c)| c * m.eval(xi) * n2.powi(*q)).sum()
    }

    /// Substitutes `ξ = T ξ̂`; the new norm form is `Tᵀ G T`.
    pub fn to_frame(&self, t: &DMatrix<f64>) -> Result<FullSymbol> {
        let dim = self.dim();
        check_len(dim, t.nrows())?;
        check_len(dim, t.ncols())?;
        let mut g = t.transpose() * &*self.norm * t;
        g = (&g + g.transpose()) * 0.5;
        let norm = Arc::new(g);
        // ξ_k as polynomials in ξ̂
        let rows: Vec<Vec<(MultiIndex, f64)>> = (0..dim)
            .map(|k| (0..dim).filter(|&j| t[(k, j)] != 0.0).map(|j| (MultiIndex::unit(dim, j), t[(k, j)])).collect())
            .collect();
        let mut out = FullSymbol { norm, terms: BTreeMap::new(), floor: self.floor };
        for ((_, q, m), c) in &self.terms {
            let mut poly: BTreeMap<MultiIndex, f64> = BTreeMap::new();
            poly.insert(MultiIndex::zero(dim), 1.0);
            for (k, &e) in m.exponents().iter().enumerate() {
                for _ in 0..e {
                    let mut next = BTreeMap::new();
                    for (pm, pc) in &poly {
                        for (rm, rc) in &rows[k] {
                            *next.entry(pm.add(rm)).or_insert(0.0) += pc * rc;
                        }
                    }
                    poly = next;
                }
            }
            for (pm, pc) in poly {
                out.insert(pm, *q, c * pc);
            }
        }
        Ok(out)
    }

    /// Whether the norm form is the identity to `tol`.
    pub fn is_euclidean(&self, tol: f64) -> bool {
        (&*self.norm - DMatrix::identity(self.dim(), self.dim())).amax() <= tol
    }

    /// Replaces a norm form that is the identity up to roundoff by the exact
    /// identity, so that products with exact-frame symbols line up.
    pub fn snap_euclidean(&self) -> Result<FullSymbol> {
        self.require_euclidean()?;
        let dim = self.dim();
        Ok(FullSymbol { norm: Arc::new(DMatrix::identity(dim, dim)), terms: self.terms.clone(), floor: self.floor })
    }

    fn require_euclidean(&self) -> Result<()> {
        if self.is_euclidean(1e-9) {
            Ok(())
        } else {
            Err(Error::FrameMismatch("operation needs an orthonormal frame (identity norm form)".into()))
        }
    }

    /// Unique representative under `ξ_1² = |ξ|² − Σ_{i≥2} ξ_i²`: afterwards
    /// every monomial has `ξ_1`-exponent at most 1. Needs the identity norm.
    pub fn canonical(&self) -> Result<FullSymbol> {
        self.require_euclidean()?;
        let dim = self.dim();
        let mut out = FullSymbol { norm: self.norm.clone(), terms: BTreeMap::new(), floor: self.floor };
        let mut stack: Vec<(MultiIndex, i32, Complex64)> =
            self.terms.iter().map(|((_, q, m), c)| (m.clone(), *q, *c)).collect();
        while let Some((m, q, c)) = stack.pop() {
            if m.exponents()[0] < 2 {
                out.insert(m, q, c);
                continue;
            }
            let mut base = m.clone();
            base.0[0] -= 2;
            stack.push((base.clone(), q + 1, c));
            for i in 1..dim {
                stack.push((base.with_incremented(i, 2), q, -c));
            }
        }
        Ok(out)
    }

    /// Rewrites every `|ξ|^{2q}` with `q > 0` as the polynomial `(ξᵀGξ)^q`.
    pub fn expand_norm_powers(&self) -> FullSymbol {
        let dim = self.dim();
        let mut out = FullSymbol { norm: self.norm.clone(), terms: BTreeMap::new(), floor: self.floor };
        let quad = Self::quadratic(self.norm.clone(), &self.norm).expect("norm is square");
        for ((_, q, m), c) in &self.terms {
            if *q <= 0 {
                out.insert(m.clone(), *q, *c);
                continue;
            }
            let mut poly = Self::constant(self.norm.clone(), *c);
            for _ in 0..*q {
                poly = poly.mul(&quad).expect("same norm");
            }
            for ((_, pq, pm), pc) in &poly.terms {
                out.insert(pm.add(m), *pq, *pc);
            }
        }
        debug_assert_eq!(out.dim(), dim);
        out
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |a, c| a.max(c.norm()))
    }

    /// Largest coefficient difference, comparing term by term regardless of
    /// norm forms. Meaningful for canonical or fully expanded symbols.
    pub fn max_coeff_diff(&self, other: &FullSymbol) -> f64 {
        let mut worst: f64 = 0.0;
        for (k, c) in &self.terms {
            let o = other.terms.get(k).copied().unwrap_or_default();
            worst = worst.max((c - o).norm());
        }
        for (k, c) in &other.terms {
            if !self.terms.contains_key(k) {
                worst = worst.max(c.norm());
            }
        }
        worst
    }

    /// `∫_{|ξ|=1} σ(ξ) dξ` over the unit sphere. Needs the identity norm.
    pub fn integrate_sphere(&self) -> Result<Complex64> {
        self.require_euclidean()?;
        let dim = self.dim();
        let table = MomentTable::shared(dim);
        let mut acc = Complex64::new(0.0, 0.0);
        for ((_, _, m), c) in &self.terms {
            acc += c * ratio_to_f64(table.moment(m)?);
        }
        Ok(acc * sphere_area(dim))
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}
