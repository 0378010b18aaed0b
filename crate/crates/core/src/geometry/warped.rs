use std::fmt;

use nalgebra::DMatrix;

use super::curvature::{christoffel, inverse_metric, ChristoffelTable};
use super::metric::{DerivMode, MetricField, Point, Signature};
use crate::error::{Error, Result};
use crate::exprlang::{coordinate_names, parse, Ast, Compiled};

/// Data of the warped product εM ×_f N: metric ε g^M ⊕ f(x_M)² g^N.
#[derive(Clone)]
pub struct WarpedConfig {
    epsilon: f64,
    warp: Ast,
    m_dim: usize,
    n_dim: usize,
    value: Compiled,
    gradient: Vec<Compiled>,
    hessian: Vec<Vec<Compiled>>,
}

impl fmt::Debug for WarpedConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WarpedConfig")
            .field("epsilon", &self.epsilon)
            .field("warp", &self.warp.to_string())
            .field("m_dim", &self.m_dim)
            .field("n_dim", &self.n_dim)
            .finish()
    }
}

impl WarpedConfig {
    /// `warp` is an expression in the M coordinates `x1..x<m_dim>`.
    pub fn new(epsilon: f64, warp: Ast, m_dim: usize, n_dim: usize) -> Result<Self> {
        if epsilon == 0.0 || !epsilon.is_finite() {
            return Err(Error::ZeroEpsilon);
        }
        if m_dim == 0 || n_dim == 0 {
            return Err(Error::Config("factor dimensions must be positive".into()));
        }
        let names = coordinate_names(m_dim);
        let value = Compiled::new(&warp, &names)?;
        let first: Vec<Ast> = names.iter().map(|v| warp.differentiate(v)).collect();
        let gradient = first.iter().map(|a| Compiled::new(a, &names)).collect::<Result<Vec<_>, _>>()?;
        let hessian = first
            .iter()
            .map(|a| {
                names
                    .iter()
                    .map(|v| Compiled::new(&a.differentiate(v), &names))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(WarpedConfig { epsilon, warp, m_dim, n_dim, value, gradient, hessian })
    }

    pub fn parse(epsilon: f64, warp: &str, m_dim: usize, n_dim: usize) -> Result<Self> {
        Self::new(epsilon, parse(warp)?, m_dim, n_dim)
    }

    /// ε = 1, f ≡ 1: the plain product metric.
    pub fn product(m_dim: usize, n_dim: usize) -> Self {
        Self::new(1.0, Ast::Const(1.0), m_dim, n_dim).expect("constant warp is always valid")
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn warp(&self) -> &Ast {
        &self.warp
    }

    pub fn m_dim(&self) -> usize {
        self.m_dim
    }

    pub fn n_dim(&self) -> usize {
        self.n_dim
    }

    pub fn signature(&self) -> Signature {
        if self.epsilon < 0.0 {
            Signature::Indefinite
        } else {
            Signature::Riemannian
        }
    }

    /// f(x_M), rejecting nonpositive values.
    pub fn warp_value(&self, xm: &[f64]) -> Result<f64> {
        let v = self.value.eval(xm)?;
        if v <= 0.0 {
            return Err(Error::NonPositiveWarp { value: v, at: xm.to_vec() });
        }
        Ok(v)
    }

    pub fn warp_gradient(&self, xm: &[f64]) -> Result<Vec<f64>> {
        Ok(self.gradient.iter().map(|c| c.eval(xm)).collect::<Result<Vec<_>, _>>()?)
    }

    pub fn warp_hessian(&self, xm: &[f64]) -> Result<DMatrix<f64>> {
        let mut h = DMatrix::zeros(self.m_dim, self.m_dim);
        for i in 0..self.m_dim {
            for j in 0..self.m_dim {
                h[(i, j)] = self.hessian[i][j].eval(xm)?;
            }
        }
        Ok(h)
    }

    fn check_factors(&self, gm: &MetricField, gn: &MetricField) -> Result<()> {
        if gm.dim() != self.m_dim {
            return Err(Error::DimensionMismatch { expected: self.m_dim, found: gm.dim() });
        }
        if gn.dim() != self.n_dim {
            return Err(Error::DimensionMismatch { expected: self.n_dim, found: gn.dim() });
        }
        Ok(())
    }

    /// Checks f > 0 on a coarse lattice of the M chart.
    fn check_positive_on(&self, gm: &MetricField) -> Result<()> {
        const PER_AXIS: usize = 7;
        let dom = gm.domain();
        let total = PER_AXIS.pow(dom.len().min(4) as u32);
        for idx in 0..total {
            let mut rem = idx;
            let x: Vec<f64> = dom
                .iter()
                .enumerate()
                .map(|(axis, r)| {
                    if axis >= 4 {
                        return 0.5 * (r.lo + r.hi);
                    }
                    let k = rem % PER_AXIS;
                    rem /= PER_AXIS;
                    r.lo + (r.hi - r.lo) * (k as f64 + 0.5) / PER_AXIS as f64
                })
                .collect();
            self.warp_value(&x)?;
        }
        Ok(())
    }
}

/// Block metric ε g^M ⊕ f² g^N on the product chart (M coordinates first).
pub fn build_warped_product(gm: &MetricField, gn: &MetricField, cfg: &WarpedConfig) -> Result<MetricField> {
    cfg.check_factors(gm, gn)?;
    cfg.check_positive_on(gm)?;
    let (m, n) = (gm.dim(), gn.dim());
    let mut domain = gm.domain().to_vec();
    domain.extend_from_slice(gn.domain());
    let label = if cfg.epsilon == 1.0 && cfg.warp.as_const() == Some(1.0) {
        format!("{} x {}", gm.label(), gn.label())
    } else {
        format!("{}{} x_({}) {}", cfg.epsilon, gm.label(), cfg.warp, gn.label())
    };
    let metric = match (gm.expressions(), gn.expressions()) {
        (Some(em), Some(en)) => {
            let f2 = Ast::pow(cfg.warp.clone(), 2.0);
            let mut entries = vec![vec![Ast::Const(0.0); m + n]; m + n];
            for i in 0..m {
                for j in 0..m {
                    entries[i][j] = Ast::mul(Ast::Const(cfg.epsilon), em[i][j].clone());
                }
            }
            for a in 0..n {
                for b in 0..n {
                    entries[m + a][m + b] = Ast::mul(f2.clone(), en[a][b].shift_coordinates(m));
                }
            }
            let mode = match (gm.deriv_mode(), gn.deriv_mode()) {
                (DerivMode::Analytic, DerivMode::Analytic) => DerivMode::Analytic,
                (DerivMode::Analytic, fd) | (fd, _) => fd,
            };
            MetricField::from_expressions(entries, domain, label)?.with_deriv_mode(mode)
        }
        _ => {
            let (fm, fnn) = (factor_eval(gm), factor_eval(gn));
            let cfg2 = cfg.clone();
            let eps = cfg.epsilon;
            let eval = move |x: &[f64]| {
                let mut g = DMatrix::zeros(m + n, m + n);
                let a = fm(&x[..m]);
                let b = fnn(&x[m..]);
                // positivity is enforced at evaluation sites by warp_value
                let f = cfg2.value.eval(&x[..m]).unwrap_or(f64::NAN);
                g.view_mut((0, 0), (m, m)).copy_from(&(a * eps));
                g.view_mut((m, m), (n, n)).copy_from(&(b * (f * f)));
                g
            };
            let mode = match (gm.deriv_mode(), gn.deriv_mode()) {
                (DerivMode::FiniteDifference { .. }, _) => gm.deriv_mode(),
                (_, DerivMode::FiniteDifference { .. }) => gn.deriv_mode(),
                _ => DerivMode::DEFAULT_FD,
            };
            MetricField::from_fn(m + n, eval, domain, label)?.with_deriv_mode(mode)
        }
    };
    Ok(metric.with_signature(cfg.signature()))
}

/// The Riemannian product g^M ⊕ g^N.
pub fn product_metric(gm: &MetricField, gn: &MetricField) -> Result<MetricField> {
    build_warped_product(gm, gn, &WarpedConfig::product(gm.dim(), gn.dim()))
}

fn factor_eval(g: &MetricField) -> impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static {
    let g = g.clone();
    move |x: &[f64]| {
        g.eval(&Point(x.to_vec())).unwrap_or_else(|_| DMatrix::from_element(g.dim(), g.dim(), f64::NAN))
    }
}

/// Christoffel symbols of ε g^M ⊕ f² g^N assembled from the factor
/// connections and the warp function:
///
/// * Γ^k_ij = Γ^k_ij(M), Γ^γ_αβ = Γ^γ_αβ(N)
/// * Γ^γ_jβ = Γ^γ_βj = (∂_j f / f) δ^γ_β
/// * Γ^k_αβ = −(f/ε) (grad_M f)^k g^N_αβ
///
/// All other components vanish.
pub fn warped_christoffel_closed_form(
    gm: &MetricField,
    gn: &MetricField,
    cfg: &WarpedConfig,
    x: &Point,
) -> Result<ChristoffelTable> {
    cfg.check_factors(gm, gn)?;
    let (m, n) = (gm.dim(), gn.dim());
    x.check_dim(m + n)?;
    let xm = Point(x.coords()[..m].to_vec());
    let xn = Point(x.coords()[m..].to_vec());
    let f = cfg.warp_value(xm.coords())?;
    let df = cfg.warp_gradient(xm.coords())?;
    let cm = christoffel(gm, &xm)?;
    let cn = christoffel(gn, &xn)?;
    let gm_inv = inverse_metric(&gm.eval(&xm)?)?;
    let gn_val = gn.eval(&xn)?;
    let grad: Vec<f64> = (0..m).map(|k| (0..m).map(|l| gm_inv[(k, l)] * df[l]).sum()).collect();

    let d = m + n;
    let mut gamma = vec![0.0; d * d * d];
    let at = |k: usize, i: usize, j: usize| (k * d + i) * d + j;
    for k in 0..m {
        for i in 0..m {
            for j in 0..m {
                gamma[at(k, i, j)] = cm.get(k, i, j);
            }
        }
        for a in 0..n {
            for b in 0..n {
                gamma[at(k, m + a, m + b)] = -(f / cfg.epsilon) * grad[k] * gn_val[(a, b)];
            }
        }
    }
    for c in 0..n {
        for a in 0..n {
            for b in 0..n {
                gamma[at(m + c, m + a, m + b)] = cn.get(c, a, b);
            }
        }
        for j in 0..m {
            let v = df[j] / f;
            gamma[at(m + c, j, m + c)] = v;
            gamma[at(m + c, m + c, j)] = v;
        }
    }

    // inverse of the warped metric, block by block
    let mut ginv = DMatrix::zeros(d, d);
    ginv.view_mut((0, 0), (m, m)).copy_from(&(&gm_inv / cfg.epsilon));
    let gn_inv = inverse_metric(&gn_val)?;
    ginv.view_mut((m, m), (n, n)).copy_from(&(gn_inv / (f * f)));
    Ok(ChristoffelTable::from_parts(d, gamma, &ginv))
}
