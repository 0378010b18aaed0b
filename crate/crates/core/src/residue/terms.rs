use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{riemann_orthonormal, CurvatureTensor, MetricField, Point, WarpedConfig};
use crate::moments::sphere_area;
use crate::symbols::{normal_jet, warped_symbol_from_parts, FactorPoint, FullSymbol, NormalJet};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Imaginary parts above this (relative to `max(1, |Re|)`) are rejected.
pub const IMAG_TOL: f64 = 1e-9;

/// Fiber integrals of the six summands of `σ_{−2m̄}(W ∘ Δ^{−m̄})`:
///
/// 1. `σ₀(W) σ_{−2m̄}`
/// 2. `σ₁(W) σ_{−2m̄−1}`
/// 3. `σ₂(W) σ_{−2m̄−2}`
/// 4. `−i Σ ∂_{ξ_λ}σ₂(W) ∂_{x_λ}σ_{−2m̄−1}`
/// 5. `−i Σ ∂_{ξ_λ}σ₁(W) ∂_{x_λ}σ_{−2m̄}`
/// 6. `−½ Σ ∂_{ξ_λ}∂_{ξ_ν}σ₂(W) ∂_{x_λ}∂_{x_ν}σ_{−2m̄}`
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SixTerms {
    pub t: [Complex64; 6],
}

impl SixTerms {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Term `k` in `1..=6`.
    pub fn term(&self, k: usize) -> Complex64 {
        assert!((1..=6).contains(&k), "terms are numbered 1 to 6");
        self.t[k - 1]
    }

    pub fn real(&self) -> [f64; 6] {
        self.t.map(|c| c.re)
    }

    pub fn max_imag(&self) -> f64 {
        self.t.iter().fold(0.0, |a, c| a.max(c.im.abs()))
    }

    pub fn sum(&self) -> Complex64 {
        self.t.iter().sum()
    }

    /// `max(|t1|, |t2|, |t5|)`, the terms that vanish identically.
    pub fn max_vanishing(&self) -> f64 {
        [0, 1, 4].iter().fold(0.0, |a, &k| a.max(self.t[k].norm()))
    }

    pub fn add_scaled(&mut self, c: Complex64, other: &SixTerms) {
        for (a, b) in self.t.iter_mut().zip(other.t.iter()) {
            *a += c * b;
        }
    }

    pub fn scaled(&self, c: Complex64) -> SixTerms {
        SixTerms { t: self.t.map(|v| v * c) }
    }
}

/// Real view of [`SixTerms`] for reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TermValues {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub t4: f64,
    pub t5: f64,
    pub t6: f64,
    pub max_imag: f64,
}

impl From<&SixTerms> for TermValues {
    fn from(s: &SixTerms) -> Self {
        let [t1, t2, t3, t4, t5, t6] = s.real();
        TermValues { t1, t2, t3, t4, t5, t6, max_imag: s.max_imag() }
    }
}

/// The six terms for a left symbol and a normal jet sharing an orthonormal
/// frame. Bilinear in `(left, jet − jet(R = 0))` plus the `R`-independent
/// first term.
pub(crate) fn terms_from_jet(left: &FullSymbol, jet: &NormalJet) -> Result<SixTerms> {
    let d = jet.dim();
    let target = -2 * jet.mbar as i32;
    let (p2, p1, p0) = (left.component(2), left.component(1), left.component(0));
    let fiber = |s: FullSymbol| s.component(target).integrate_sphere();

    let t1 = fiber(p0.mul(&jet.s0)?)?;
    let t2 = fiber(p1.mul(&jet.s1)?)?;
    let t3 = fiber(p2.mul(&jet.s2)?)?;

    let mut s4 = FullSymbol::zero(p2.norm_arc());
    let mut s5 = FullSymbol::zero(p2.norm_arc());
    let mut s6 = FullSymbol::zero(p2.norm_arc());
    for lam in 0..d {
        let p2l = p2.d_xi(lam);
        s4 = s4.add(&p2l.mul(&jet.d_s1[lam])?)?;
        s5 = s5.add(&p1.d_xi(lam).mul(&jet.d_s0[lam])?)?;
        for nu in 0..d {
            s6 = s6.add(&p2l.d_xi(nu).mul(&jet.dd_s0[lam][nu])?)?;
        }
    }
    let t4 = -I * fiber(s4)?;
    let t5 = -I * fiber(s5)?;
    let t6 = -0.5 * fiber(s6)?;
    Ok(SixTerms { t: [t1, t2, t3, t4, t5, t6] })
}

/// Six-term density at one point from the product curvature `curv`, the
/// symbol of `W = Δ^{εM×fN}` at the center of normal coordinates and the
/// normal jet of `Δ^{−m̄}`, all in one orthonormal frame.
pub fn density_terms(
    curv: &CurvatureTensor,
    warped_symbol: &FullSymbol,
    jet: &NormalJet,
    m: usize,
    n: usize,
) -> Result<SixTerms> {
    let d = m + n;
    if curv.dim() != d || warped_symbol.dim() != d || jet.dim() != d {
        return Err(Error::FrameMismatch(format!(
            "m + n = {d}, curvature dim {}, symbol dim {}, jet dim {}",
            curv.dim(),
            warped_symbol.dim(),
            jet.dim()
        )));
    }
    if d % 2 == 1 {
        return Err(Error::OddTotalDimension(d));
    }
    if 2 * jet.mbar != d {
        return Err(Error::FrameMismatch(format!("jet built for m̄ = {} in dimension {d}", jet.mbar)));
    }
    let left = warped_symbol.snap_euclidean()?;
    terms_from_jet(&left, jet)
}

/// `t1 + … + t6`, realized.
pub fn assembled_density(terms: &SixTerms) -> Result<f64> {
    let s = terms.sum();
    let imag = terms.max_imag().max(s.im.abs());
    if imag > IMAG_TOL * s.re.abs().max(1.0) {
        return Err(Error::ImaginaryResidue { imag });
    }
    Ok(s.re)
}

/// `(2π^{m̄}/Γ(m̄)) [((m−2)/(12ε) + n/(12f²)) S_M + (m/(12ε) + (n−2)/(12f²)) S_N]`.
pub fn closed_form_density(s_m: f64, s_n: f64, epsilon: f64, f_val: f64, m: usize, n: usize) -> Result<f64> {
    if m == 0 || n == 0 {
        return Err(Error::Config("factor dimensions must be positive".into()));
    }
    if (m + n) % 2 == 1 {
        return Err(Error::OddTotalDimension(m + n));
    }
    if epsilon == 0.0 {
        return Err(Error::ZeroEpsilon);
    }
    if !(f_val > 0.0) {
        return Err(Error::NonPositiveWarp { value: f_val, at: Vec::new() });
    }
    let (mf, nf) = (m as f64, n as f64);
    let (a, b) = (1.0 / (12.0 * epsilon), 1.0 / (12.0 * f_val * f_val));
    let coef_m = (mf - 2.0) * a + nf * b;
    let coef_n = mf * a + (nf - 2.0) * b;
    Ok(sphere_area(m + n) * (coef_m * s_m + coef_n * s_n))
}

/// A magnitude for the closed-form density's summands, used to judge gaps
/// where the density itself cancels to zero.
pub(crate) fn density_scale(s_m: f64, s_n: f64, epsilon: f64, f_val: f64, m: usize, n: usize) -> f64 {
    let w = 1.0 / epsilon.abs() + 1.0 / (f_val * f_val);
    sphere_area(m + n) * (s_m.abs() + s_n.abs()) * w * (m.max(n) as f64) / 12.0
}

/// `|a − c|` relative to `|c|`, or to `scale` when `c` has cancelled.
pub(crate) fn relative_gap(assembled: f64, closed: f64, scale: f64) -> f64 {
    let abs = (assembled - closed).abs();
    if closed.abs() >= 1e-8 * scale && closed != 0.0 {
        abs / closed.abs()
    } else if scale > 0.0 {
        abs / scale
    } else {
        abs
    }
}

/// Cholesky factor `L` of `g = LLᵀ`; `ξ = Lξ̂` is the orthonormal coframe.
pub(crate) fn frame_factor(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    g.clone().cholesky().map(|c| c.l()).ok_or(Error::NotPositiveDefinite)
}

pub(crate) fn block_diag(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (m, n) = (a.nrows(), b.nrows());
    let mut out = DMatrix::zeros(m + n, m + n);
    out.view_mut((0, 0), (m, m)).copy_from(a);
    out.view_mut((m, m), (n, n)).copy_from(b);
    out
}

/// Everything the density needs at one point of M × N.
#[derive(Debug, Clone)]
pub struct PointDensity {
    pub terms: SixTerms,
    pub assembled: f64,
    pub closed: f64,
    pub s_m: f64,
    pub s_n: f64,
    pub warp: f64,
}

impl PointDensity {
    pub fn abs_gap(&self) -> f64 {
        (self.assembled - self.closed).abs()
    }
}

/// Symbol of `W` at the center of normal coordinates of the product metric,
/// in the orthonormal coframe `ξ = Lξ̂` with `L = L_M ⊕ L_N`.
pub(crate) fn center_symbol_in_frame(
    gm: &MetricField,
    gn: &MetricField,
    cfg: &WarpedConfig,
    xm: &Point,
    xn: &Point,
) -> Result<FullSymbol> {
    let f = cfg.warp_value(xm.coords())?;
    let grad = cfg.warp_gradient(xm.coords())?;
    let m_pt = FactorPoint::at_normal_center(gm, xm)?;
    let n_pt = FactorPoint::at_normal_center(gn, xn)?;
    let norm = Arc::new(block_diag(&m_pt.ginv, &n_pt.ginv));
    let sym = warped_symbol_from_parts(norm, &m_pt, &n_pt, cfg.epsilon(), f, &grad)?;
    let frame = block_diag(&frame_factor(&gm.eval(xm)?)?, &frame_factor(&gn.eval(xn)?)?);
    sym.to_frame(&frame)?.snap_euclidean()
}

/// Six-term and closed-form densities at `x = (x_M, x_N)` without any
/// factorization: the reference path for [`wres`](super::wres).
pub fn point_density(gm: &MetricField, gn: &MetricField, cfg: &WarpedConfig, x: &Point) -> Result<PointDensity> {
    let (m, n) = (gm.dim(), gn.dim());
    if cfg.m_dim() != m || cfg.n_dim() != n {
        return Err(Error::DimensionMismatch { expected: cfg.m_dim() + cfg.n_dim(), found: m + n });
    }
    x.check_dim(m + n)?;
    if (m + n) % 2 == 1 {
        return Err(Error::OddTotalDimension(m + n));
    }
    let xm = Point(x.coords()[..m].to_vec());
    let xn = Point(x.coords()[m..].to_vec());
    let curv = CurvatureTensor::direct_sum(&riemann_orthonormal(gm, &xm)?, &riemann_orthonormal(gn, &xn)?);
    let left = center_symbol_in_frame(gm, gn, cfg, &xm, &xn)?;
    let jet = normal_jet(&curv, (m + n) / 2);
    let terms = density_terms(&curv, &left, &jet, m, n)?;
    let assembled = assembled_density(&terms)?;
    let (s_m, s_n) = (curv.block_trace(0..m), curv.block_trace(m..m + n));
    let warp = cfg.warp_value(xm.coords())?;
    let closed = closed_form_density(s_m, s_n, cfg.epsilon(), warp, m, n)?;
    Ok(PointDensity { terms, assembled, closed, s_m, s_n, warp })
}

/// `4π⁴`, the prefactor quoted in the literature for `∫_{S¹×S³}` with unit
/// factors; the engine's own closed form gives `2π⁴`.
pub const QUOTED_S1_S3_PREFACTOR: f64 = 4.0 * PI * PI * PI * PI;
