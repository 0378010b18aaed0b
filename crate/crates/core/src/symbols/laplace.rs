use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::jet::SymbolJet;
use super::symbol::FullSymbol;
use crate::error::{Error, Result};
use crate::geometry::{christoffel, inverse_metric, MetricField, MetricJet, Point, WarpedConfig};

/// A symbol depending on the base point, with x-derivative access.
pub trait SymbolField: Send + Sync {
    fn dim(&self) -> usize;

    /// Value and x-derivatives up to `order` (at most 2) at `x`; derivatives
    /// beyond `order` are unknown components.
    fn jet(&self, x: &Point, order: usize) -> Result<SymbolJet>;

    fn at(&self, x: &Point) -> Result<FullSymbol> {
        Ok(self.jet(x, 0)?.value)
    }
}

/// Contracted Christoffel symbols `Γ^t = g^{jl} Γ^t_jl` and, when the jet has
/// second derivatives, `∂_k Γ^t` as `d[k][t]`.
pub fn contracted_christoffel_jet(jet: &MetricJet, ginv: &DMatrix<f64>) -> (Vec<f64>, Option<Vec<Vec<f64>>>) {
    let d = jet.dim();
    let (dginv, _) = jet.inverse_derivatives(ginv);
    // A_s = Σ_jl g^{jl} (∂_j g_ls − ½ ∂_s g_jl), so Γ^t = Σ_s g^{ts} A_s
    let inner = |j: usize, l: usize, s: usize| jet.dg[j][(l, s)] - 0.5 * jet.dg[s][(j, l)];
    let mut a = vec![0.0; d];
    for (s, a_s) in a.iter_mut().enumerate() {
        for j in 0..d {
            for l in 0..d {
                *a_s += ginv[(j, l)] * inner(j, l, s);
            }
        }
    }
    let gamma: Vec<f64> = (0..d).map(|t| (0..d).map(|s| ginv[(t, s)] * a[s]).sum()).collect();
    if jet.ddg.len() != d {
        return (gamma, None);
    }
    let mut dgamma = vec![vec![0.0; d]; d];
    for k in 0..d {
        let mut da = vec![0.0; d];
        for (s, da_s) in da.iter_mut().enumerate() {
            for j in 0..d {
                for l in 0..d {
                    let dinner = jet.ddg[k][j][(l, s)] - 0.5 * jet.ddg[k][s][(j, l)];
                    *da_s += dginv[k][(j, l)] * inner(j, l, s) + ginv[(j, l)] * dinner;
                }
            }
        }
        for t in 0..d {
            dgamma[k][t] = (0..d).map(|s| dginv[k][(t, s)] * a[s] + ginv[(t, s)] * da[s]).sum();
        }
    }
    (gamma, Some(dgamma))
}

fn imag_linear(norm: &Arc<DMatrix<f64>>, c: &[f64]) -> Result<FullSymbol> {
    let ci: Vec<Complex64> = c.iter().map(|v| Complex64::new(0.0, *v)).collect();
    FullSymbol::linear(norm.clone(), &ci)
}

/// Symbol jet of the Laplace-Beltrami operator `Δ = −g^{jl}(∂_j∂_l − Γ^α_jl ∂_α)`:
/// `σ₂ = |ξ|²_g`, `σ₁ = i Γ^α ξ_α`, `σ₀ = 0`.
///
/// The second x-derivative of `σ₁` would need third metric derivatives and
/// is left unknown.
pub fn laplace_jet_from_metric_jet(jet: &MetricJet, order: usize) -> Result<SymbolJet> {
    let d = jet.dim();
    let ginv = inverse_metric(&jet.g)?;
    let norm = Arc::new(ginv.clone());
    let (gamma, dgamma) = contracted_christoffel_jet(jet, &ginv);
    let value = FullSymbol::norm_power(norm.clone(), 1, 1.0).add(&imag_linear(&norm, &gamma)?)?;
    if order == 0 {
        return Ok(SymbolJet::value_only(value, 2));
    }
    let dgamma = dgamma.ok_or(Error::DerivativeUnavailable { order: 2 })?;
    let (dginv, ddginv) = jet.inverse_derivatives(&ginv);
    let mut out = SymbolJet::value_only(value, 2);
    for k in 0..d {
        out.d1[k] = FullSymbol::quadratic(norm.clone(), &dginv[k])?.add(&imag_linear(&norm, &dgamma[k])?)?;
    }
    if order >= 2 {
        for k in 0..d {
            for l in 0..d {
                out.d2[k][l] = FullSymbol::quadratic(norm.clone(), &ddginv[k][l])?.truncate(2);
            }
        }
    }
    Ok(out)
}

/// The Laplacian of a metric as a symbol field.
#[derive(Debug, Clone)]
pub struct LaplaceSymbolField {
    metric: MetricField,
}

impl LaplaceSymbolField {
    pub fn new(metric: MetricField) -> Self {
        LaplaceSymbolField { metric }
    }

    pub fn metric(&self) -> &MetricField {
        &self.metric
    }
}

impl SymbolField for LaplaceSymbolField {
    fn dim(&self) -> usize {
        self.metric.dim()
    }

    fn jet(&self, x: &Point, order: usize) -> Result<SymbolJet> {
        let mjet = self.metric.jet(x, if order == 0 { 1 } else { 2 })?;
        laplace_jet_from_metric_jet(&mjet, order)
    }
}

/// A fixed symbol, constant in x.
#[derive(Debug, Clone)]
pub struct ConstantSymbolField {
    pub symbol: FullSymbol,
    pub top: i32,
}

impl SymbolField for ConstantSymbolField {
    fn dim(&self) -> usize {
        self.symbol.dim()
    }

    fn jet(&self, _x: &Point, _order: usize) -> Result<SymbolJet> {
        Ok(SymbolJet::constant(self.symbol.clone(), self.top))
    }
}

/// `σ(Δ_g)` at `x`: `|ξ|²_g + i Σ_α g^{jl}Γ^α_jl ξ_α`, with norm form `g^{-1}(x)`.
pub fn laplace_symbol(metric: &MetricField, x: &Point) -> Result<FullSymbol> {
    let mjet = metric.jet(x, 1)?;
    Ok(laplace_jet_from_metric_jet(&mjet, 0)?.value)
}

/// Per-factor data at one point of M or N.
#[derive(Debug, Clone)]
pub struct FactorPoint {
    /// inverse factor metric
    pub ginv: DMatrix<f64>,
    /// contracted Christoffel symbols of the factor
    pub gamma: Vec<f64>,
}

impl FactorPoint {
    pub fn new(metric: &MetricField, x: &Point) -> Result<Self> {
        let ginv = inverse_metric(&metric.eval(x)?)?;
        let gamma = christoffel(metric, x)?.contracted().to_vec();
        Ok(FactorPoint { ginv, gamma })
    }

    /// Data at the center of normal coordinates, where the contracted
    /// Christoffel symbols vanish.
    pub fn at_normal_center(metric: &MetricField, x: &Point) -> Result<Self> {
        let ginv = inverse_metric(&metric.eval(x)?)?;
        let gamma = vec![0.0; metric.dim()];
        Ok(FactorPoint { ginv, gamma })
    }
}

/// Symbol of the Laplacian of `ε g^M ⊕ f² g^N` assembled blockwise from the
/// factors and the warp (norm form `norm`, which is `(g^M ⊕ g^N)^{-1}` in the
/// residue pipeline):
///
/// * `σ₂ = (1/ε)|ξ^M|²_{g^M} + (1/f²)|ξ^N|²_{g^N}`
/// * `σ₁ = i[(1/ε)Γ_M^k ξ_k + (1/f²)Γ_N^γ ξ_γ − (n/(εf)) ∂_j f g_M^{jk} ξ_k]`
/// * `σ₀ = 0`
pub fn warped_symbol_from_parts(
    norm: Arc<DMatrix<f64>>,
    m_pt: &FactorPoint,
    n_pt: &FactorPoint,
    epsilon: f64,
    f: f64,
    grad_f: &[f64],
) -> Result<FullSymbol> {
    let (m, n) = (m_pt.ginv.nrows(), n_pt.ginv.nrows());
    if norm.nrows() != m + n {
        return Err(Error::DimensionMismatch { expected: m + n, found: norm.nrows() });
    }
    let mut q = DMatrix::zeros(m + n, m + n);
    q.view_mut((0, 0), (m, m)).copy_from(&(&m_pt.ginv / epsilon));
    q.view_mut((m, m), (n, n)).copy_from(&(&n_pt.ginv / (f * f)));
    let mut lin = vec![0.0; m + n];
    for k in 0..m {
        let warp: f64 = (0..m).map(|j| grad_f[j] * m_pt.ginv[(j, k)]).sum();
        lin[k] = m_pt.gamma[k] / epsilon - (n as f64 / (epsilon * f)) * warp;
    }
    for c in 0..n {
        lin[m + c] = n_pt.gamma[c] / (f * f);
    }
    FullSymbol::quadratic(norm.clone(), &q)?.add(&imag_linear(&norm, &lin)?)
}

/// Block inverse `(g^M ⊕ g^N)^{-1}`.
pub fn product_inverse(m_pt: &FactorPoint, n_pt: &FactorPoint) -> DMatrix<f64> {
    let (m, n) = (m_pt.ginv.nrows(), n_pt.ginv.nrows());
    let mut g = DMatrix::zeros(m + n, m + n);
    g.view_mut((0, 0), (m, m)).copy_from(&m_pt.ginv);
    g.view_mut((m, m), (n, n)).copy_from(&n_pt.ginv);
    g
}

/// Symbol of `Δ^{εM×fN}` at `x`, with the norm form of the product metric.
pub fn warped_laplace_symbol(gm: &MetricField, gn: &MetricField, cfg: &WarpedConfig, x: &Point) -> Result<FullSymbol> {
    let (m, n) = (gm.dim(), gn.dim());
    if cfg.m_dim() != m || cfg.n_dim() != n {
        return Err(Error::DimensionMismatch { expected: cfg.m_dim() + cfg.n_dim(), found: m + n });
    }
    x.check_dim(m + n)?;
    let xm = Point(x.coords()[..m].to_vec());
    let xn = Point(x.coords()[m..].to_vec());
    let f = cfg.warp_value(xm.coords())?;
    let grad = cfg.warp_gradient(xm.coords())?;
    let m_pt = FactorPoint::new(gm, &xm)?;
    let n_pt = FactorPoint::new(gn, &xn)?;
    let norm = Arc::new(product_inverse(&m_pt, &n_pt));
    warped_symbol_from_parts(norm, &m_pt, &n_pt, cfg.epsilon(), f, &grad)
}
