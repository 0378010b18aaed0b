//! Exact monomial integrals over the unit sphere S^{n-1} ⊂ ℝ^n.
//!
//! Moments are stored as rational multiples of `area(S_n) = 2π^{n/2}/Γ(n/2)`
//! and computed from the pairing recursion
//! `I(α) = (α_i − 1)/(|α| − 2 + n) · I(α − 2e_i)`, `I(0) = 1`.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64;
use num_rational::Ratio;

use crate::error::{Error, Result};

pub type Rational = Ratio<i64>;

/// Exponent vector of a ξ-monomial.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    /// e_i.
    pub fn unit(n: usize, i: usize) -> Self {
        let mut m = Self::zero(n);
        m.0[i] = 1;
        m
    }

    pub fn from_slice(e: &[u32]) -> Self {
        MultiIndex(e.to_vec())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn is_even(&self) -> bool {
        self.0.iter().all(|e| e % 2 == 0)
    }

    /// Componentwise sum; both indices must have equal length.
    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        debug_assert_eq!(self.len(), other.len());
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn with_incremented(&self, i: usize, by: u32) -> MultiIndex {
        let mut m = self.clone();
        m.0[i] += by;
        m
    }

    /// `None` when the exponent at `i` is already 0.
    pub fn with_decremented(&self, i: usize) -> Option<MultiIndex> {
        let mut m = self.clone();
        m.0[i] = m.0[i].checked_sub(1)?;
        Some(m)
    }

    /// Evaluates ξ^α.
    pub fn eval(&self, xi: &[f64]) -> f64 {
        self.0.iter().zip(xi).map(|(&e, &x)| x.powi(e as i32)).product()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            write!(f, "xi{}", i + 1)?;
            if e > 1 {
                write!(f, "^{e}")?;
            }
        }
        if first {
            write!(f, "1")?;
        }
        Ok(())
    }
}

/// `area(S_n) = 2π^{n/2}/Γ(n/2)`, the volume of the unit sphere in ℝ^n.
pub fn sphere_area(n: usize) -> f64 {
    assert!(n >= 1, "sphere_area needs n >= 1");
    // area(n + 2) = 2π/n · area(n), from area(1) = 2 and area(2) = 2π
    let mut k = if n % 2 == 1 { 1 } else { 2 };
    let mut a = if k == 1 { 2.0 } else { 2.0 * PI };
    while k < n {
        a *= 2.0 * PI / k as f64;
        k += 2;
    }
    a
}

/// Memoized exact moments in a fixed ambient dimension `n`.
#[derive(Debug)]
pub struct MomentTable {
    n: usize,
    cache: RwLock<HashMap<MultiIndex, Rational>>,
}

impl MomentTable {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "moment table needs n >= 1");
        MomentTable { n, cache: RwLock::new(HashMap::new()) }
    }

    /// Process-wide table for dimension `n`.
    pub fn shared(n: usize) -> Arc<MomentTable> {
        static TABLES: OnceLock<RwLock<HashMap<usize, Arc<MomentTable>>>> = OnceLock::new();
        let tables = TABLES.get_or_init(Default::default);
        if let Some(t) = tables.read().expect("moment registry poisoned").get(&n) {
            return t.clone();
        }
        tables.write().expect("moment registry poisoned").entry(n).or_insert_with(|| Arc::new(MomentTable::new(n))).clone()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// ∫_{S^{n-1}} ξ^α / area(S_n), exactly.
    pub fn moment(&self, alpha: &MultiIndex) -> Result<Rational> {
        if alpha.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: alpha.len() });
        }
        Ok(self.moment_unchecked(alpha))
    }

    fn moment_unchecked(&self, alpha: &MultiIndex) -> Rational {
        if !alpha.is_even() {
            return Rational::from_integer(0);
        }
        let Some(i) = alpha.0.iter().position(|&e| e > 0) else {
            return Rational::from_integer(1);
        };
        if let Some(v) = self.cache.read().expect("moment cache poisoned").get(alpha) {
            return *v;
        }
        let mut lower = alpha.clone();
        lower.0[i] -= 2;
        let num = alpha.0[i] as i64 - 1;
        let den = alpha.degree() as i64 - 2 + self.n as i64;
        let v = Rational::new(num, den) * self.moment_unchecked(&lower);
        self.cache.write().expect("moment cache poisoned").insert(alpha.clone(), v);
        v
    }

    /// Number of cached entries.
    pub fn cached(&self) -> usize {
        self.cache.read().expect("moment cache poisoned").len()
    }
}

/// Exact moment of ξ^α over S^{n-1}, in units of `area(S_n)`.
pub fn monomial_moment(alpha: &MultiIndex, n: usize) -> Result<Rational> {
    MomentTable::shared(n).moment(alpha)
}

/// Complex polynomial in ξ_1..ξ_n.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct XiPolynomial {
    n: usize,
    terms: BTreeMap<MultiIndex, Complex64>,
}

impl XiPolynomial {
    pub fn zero(n: usize) -> Self {
        XiPolynomial { n, terms: BTreeMap::new() }
    }

    /// `|ξ|^{2k} = (Σ ξ_i²)^k` expanded.
    pub fn norm_power(n: usize, k: u32) -> Self {
        let mut p = Self::zero(n);
        p.add_term(Complex64::new(1.0, 0.0), MultiIndex::zero(n)).expect("dimension matches");
        for _ in 0..k {
            let mut next = Self::zero(n);
            for (m, c) in &p.terms {
                for i in 0..n {
                    next.add_term(*c, m.with_incremented(i, 2)).expect("dimension matches");
                }
            }
            p = next;
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn add_term(&mut self, coeff: Complex64, mono: MultiIndex) -> Result<()> {
        if mono.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: mono.len() });
        }
        *self.terms.entry(mono).or_insert(Complex64::new(0.0, 0.0)) += coeff;
        Ok(())
    }

    pub fn with_term(mut self, coeff: impl Into<Complex64>, exponents: &[u32]) -> Result<Self> {
        self.add_term(coeff.into(), MultiIndex::from_slice(exponents))?;
        Ok(self)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.terms.iter()
    }

    pub fn eval(&self, xi: &[f64]) -> Complex64 {
        self.terms.iter().map(|(m, c)| c * m.eval(xi)).sum()
    }
}

/// `Σ coeff(α) · monomial_moment(α, n) · area(S_n)`. Integer parts of the
/// coefficients are summed as exact rationals, so `|ξ|^{2k}` integrates to
/// exactly `area(S_n)`.
pub fn integrate_polynomial_over_sphere(p: &XiPolynomial, n: usize) -> Result<Complex64> {
    if p.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: p.dim() });
    }
    let table = MomentTable::shared(n);
    let (mut exact_re, mut exact_im) = (Rational::from_integer(0), Rational::from_integer(0));
    let mut rest = Complex64::new(0.0, 0.0);
    for (m, c) in p.terms() {
        let moment = table.moment(m)?;
        if *moment.numer() == 0 {
            continue;
        }
        for (part, exact, unit) in [(c.re, &mut exact_re, Complex64::new(1.0, 0.0)), (c.im, &mut exact_im, Complex64::i())] {
            match small_integer(part) {
                Some(k) => *exact += moment * k,
                None => rest += unit * part * ratio_to_f64(moment),
            }
        }
    }
    let exact = Complex64::new(ratio_to_f64(exact_re), ratio_to_f64(exact_im));
    Ok((exact + rest) * sphere_area(n))
}

/// `v` as an integer when it is one and small enough that rational sums
/// cannot overflow.
fn small_integer(v: f64) -> Option<i64> {
    (v.fract() == 0.0 && v.abs() < 1e9).then_some(v as i64)
}

pub fn ratio_to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(a: i64, b: i64) -> Rational {
        Rational::new(a, b)
    }

    #[test]
    fn areas() {
        assert_eq!(sphere_area(1), 2.0);
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-15);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((sphere_area(5) - 8.0 * PI * PI / 3.0).abs() < 1e-13);
    }

    #[test]
    fn four_dimensional_moments() {
        let m = |e: [u32; 4]| monomial_moment(&MultiIndex::from_slice(&e), 4).unwrap();
        assert_eq!(m([0, 0, 0, 0]), r(1, 1));
        assert_eq!(m([2, 0, 0, 0]), r(1, 4));
        assert_eq!(m([2, 2, 0, 0]), r(1, 24));
        assert_eq!(m([4, 0, 0, 0]), r(1, 8));
        assert_eq!(m([1, 1, 0, 0]), r(0, 1));
        assert_eq!(m([3, 1, 0, 0]), r(0, 1));
    }

    #[test]
    fn wrong_length_rejected() {
        assert!(matches!(
            monomial_moment(&MultiIndex::from_slice(&[2, 0]), 4),
            Err(Error::DimensionMismatch { expected: 4, found: 2 })
        ));
    }

    #[test]
    fn polynomial_examples() {
        let norm = XiPolynomial::norm_power(4, 1);
        let v = integrate_polynomial_over_sphere(&norm, 4).unwrap();
        assert!((v.re - 2.0 * PI * PI).abs() < 1e-12 && v.im == 0.0);
        let p = XiPolynomial::zero(4).with_term(1.0, &[1, 1, 0, 0]).unwrap();
        assert_eq!(integrate_polynomial_over_sphere(&p, 4).unwrap(), Complex64::new(0.0, 0.0));
        let p = XiPolynomial::zero(4).with_term(1.0, &[2, 2, 0, 0]).unwrap();
        let v = integrate_polynomial_over_sphere(&p, 4).unwrap();
        assert!((v.re - PI * PI / 12.0).abs() < 1e-13);
    }

    #[test]
    fn cache_fills() {
        let t = MomentTable::new(3);
        t.moment(&MultiIndex::from_slice(&[4, 2, 2])).unwrap();
        assert!(t.cached() >= 3);
    }
}
