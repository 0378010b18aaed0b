use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::quadrature::QuadratureGrid;
use super::report::{NodeRecord, PrefactorCheck, ReportMetadata, ReportTotals, ResidueReport};
use super::terms::{
    assembled_density, center_symbol_in_frame, closed_form_density, density_scale, relative_gap, terms_from_jet,
    SixTerms, TermValues, QUOTED_S1_S3_PREFACTOR,
};
use crate::error::{Error, Result};
use crate::geometry::{riemann_orthonormal, CurvatureTensor, DerivMode, MetricField, Signature, WarpedConfig};
use crate::moments::MultiIndex;
use crate::symbols::{normal_jet, FullSymbol, SymbolTerm};

/// Which density `wres` integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// six-term symbol calculus
    Assembled,
    /// closed form in the scalar curvatures
    Closed,
    /// both, with per-node gaps
    Verify,
}

impl Mode {
    fn assembled(self) -> bool {
        self != Mode::Closed
    }

    fn closed(self) -> bool {
        self != Mode::Assembled
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "assembled" => Ok(Mode::Assembled),
            "closed" => Ok(Mode::Closed),
            "verify" => Ok(Mode::Verify),
            other => Err(Error::Config(format!("unknown mode '{other}' (assembled, closed, verify)"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Assembled => "assembled",
            Mode::Closed => "closed",
            Mode::Verify => "verify",
        })
    }
}

/// Tolerances and output switches for [`wres`].
#[derive(Debug, Clone, PartialEq)]
pub struct WresOptions {
    /// per-node relative gap allowed in verify mode
    pub gap_tolerance: f64,
    /// allowed change of the closed-form total under node doubling,
    /// relative to `max(1, |total|)`
    pub quadrature_tolerance: f64,
    pub check_convergence: bool,
    pub per_node: bool,
}

impl WresOptions {
    pub const ANALYTIC_GAP: f64 = 1e-6;
    pub const FD_GAP: f64 = 1e-3;
    pub const QUADRATURE: f64 = 1e-8;
    /// finite-difference curvature noise does not cancel under doubling
    pub const FD_QUADRATURE: f64 = 1e-5;

    /// Defaults matched to the derivative mode of the factors.
    pub fn for_deriv_mode(mode: DerivMode) -> Self {
        WresOptions {
            gap_tolerance: if mode.is_analytic() { Self::ANALYTIC_GAP } else { Self::FD_GAP },
            quadrature_tolerance: if mode.is_analytic() { Self::QUADRATURE } else { Self::FD_QUADRATURE },
            check_convergence: true,
            per_node: false,
        }
    }
}

impl Default for WresOptions {
    fn default() -> Self {
        Self::for_deriv_mode(DerivMode::Analytic)
    }
}

struct MNode {
    s_m: f64,
    warp: f64,
    /// coefficients of the left symbol on the shared monomial support
    coeffs: Vec<Complex64>,
    /// `Σ_α c_α [D(ξ^α, R_M ⊕ 0) − D(ξ^α, 0)]`
    offset: SixTerms,
}

struct NNode {
    s_n: f64,
    /// `D(ξ^α, 0 ⊕ R_N)` per support monomial
    pieces: Vec<SixTerms>,
}

#[derive(Default)]
struct Partial {
    assembled: f64,
    closed: f64,
    max_abs_gap: f64,
    max_rel_gap: f64,
    max_imag: f64,
    max_vanishing: f64,
    records: Vec<NodeRecord>,
}

fn check_inputs(gm: &MetricField, gn: &MetricField, cfg: &WarpedConfig) -> Result<(usize, usize)> {
    let (m, n) = (gm.dim(), gn.dim());
    if cfg.m_dim() != m {
        return Err(Error::DimensionMismatch { expected: cfg.m_dim(), found: m });
    }
    if cfg.n_dim() != n {
        return Err(Error::DimensionMismatch { expected: cfg.n_dim(), found: n });
    }
    if (m + n) % 2 == 1 {
        return Err(Error::OddTotalDimension(m + n));
    }
    if gm.signature() == Signature::Indefinite || gn.signature() == Signature::Indefinite {
        return Err(Error::NotElliptic);
    }
    Ok((m, n))
}

fn monomial(d: usize, alpha: &MultiIndex) -> FullSymbol {
    let norm = Arc::new(DMatrix::identity(d, d));
    FullSymbol::from_terms(norm, [SymbolTerm::new(1.0, alpha.clone(), 0)]).expect("length checked")
}

/// Polynomial coefficients of a frame symbol of order ≤ 2.
fn decompose(left: &FullSymbol) -> Result<BTreeMap<MultiIndex, Complex64>> {
    let mut out = BTreeMap::new();
    for t in left.expand_norm_powers().terms() {
        if t.q != 0 {
            return Err(Error::FrameMismatch("left symbol is not polynomial in the frame".into()));
        }
        *out.entry(t.mono.clone()).or_insert(Complex64::new(0.0, 0.0)) += t.coeff;
    }
    Ok(out)
}

/// Noncommutative residue `∫_{M×N} ∫_{|ξ|=1} σ_{−2m̄}(W ∘ Δ^{−m̄})` of the
/// warped Laplacian `W` against the product Laplacian, by product
/// quadrature. No `(2π)^{−2m̄}` normalization.
///
/// The symbol of `W` at the center of normal coordinates depends on `x_M`
/// only and the normal jet is affine in `R = R_M ⊕ R_N`, so the six terms
/// of a pair of nodes split into an M part and a sum of precomputed N parts.
pub fn wres(
    gm: &MetricField,
    gn: &MetricField,
    cfg: &WarpedConfig,
    grid: &QuadratureGrid,
    mode: Mode,
    options: &WresOptions,
) -> Result<ResidueReport> {
    let (m, n) = check_inputs(gm, gn, cfg)?;
    let d = m + n;
    let mbar = d / 2;
    let eps = cfg.epsilon();
    let xn_ref = &grid.n.points[0];

    let m_raw: Vec<(CurvatureTensor, f64, BTreeMap<MultiIndex, Complex64>)> = grid
        .m
        .points
        .par_iter()
        .map(|xm| {
            let curv = riemann_orthonormal(gm, xm)?;
            let warp = cfg.warp_value(xm.coords())?;
            let coeffs = if mode.assembled() {
                decompose(&center_symbol_in_frame(gm, gn, cfg, xm, xn_ref)?)?
            } else {
                BTreeMap::new()
            };
            Ok((curv, warp, coeffs))
        })
        .collect::<Result<_>>()?;

    let support: Vec<MultiIndex> = {
        let mut keys: Vec<MultiIndex> = m_raw.iter().flat_map(|(_, _, c)| c.keys().cloned()).collect();
        keys.sort();
        keys.dedup();
        keys
    };
    let basis: Vec<FullSymbol> = support.iter().map(|a| monomial(d, a)).collect();
    let flat_jet = normal_jet(&CurvatureTensor::zeros(d), mbar);
    let base: Vec<SixTerms> = basis.iter().map(|b| terms_from_jet(b, &flat_jet)).collect::<Result<_>>()?;

    let m_nodes: Vec<MNode> = m_raw
        .into_par_iter()
        .map(|(curv, warp, map)| {
            let coeffs: Vec<Complex64> =
                support.iter().map(|a| map.get(a).copied().unwrap_or_default()).collect();
            let mut offset = SixTerms::zero();
            if mode.assembled() {
                let jet = normal_jet(&CurvatureTensor::direct_sum(&curv, &CurvatureTensor::zeros(n)), mbar);
                for ((c, b), b0) in coeffs.iter().zip(&basis).zip(&base) {
                    if *c != Complex64::default() {
                        offset.add_scaled(*c, &terms_from_jet(b, &jet)?);
                        offset.add_scaled(-*c, b0);
                    }
                }
            }
            Ok(MNode { s_m: curv.scalar(), warp, coeffs, offset })
        })
        .collect::<Result<_>>()?;

    let n_nodes: Vec<NNode> = grid
        .n
        .points
        .par_iter()
        .map(|xn| {
            let curv = riemann_orthonormal(gn, xn)?;
            let pieces = if mode.assembled() {
                let jet = normal_jet(&CurvatureTensor::direct_sum(&CurvatureTensor::zeros(m), &curv), mbar);
                basis.iter().map(|b| terms_from_jet(b, &jet)).collect::<Result<Vec<_>>>()?
            } else {
                Vec::new()
            };
            Ok(NNode { s_n: curv.scalar(), pieces })
        })
        .collect::<Result<_>>()?;

    let partials: Vec<Partial> = m_nodes
        .par_iter()
        .enumerate()
        .map(|(i, mn)| {
            let mut p = Partial::default();
            for (j, nn) in n_nodes.iter().enumerate() {
                let wn = grid.n.weights[j];
                let mut terms = None;
                let mut a = None;
                if mode.assembled() {
                    let mut t = mn.offset;
                    for (c, piece) in mn.coeffs.iter().zip(&nn.pieces) {
                        t.add_scaled(*c, piece);
                    }
                    let v = assembled_density(&t)?;
                    p.assembled += wn * v;
                    p.max_imag = p.max_imag.max(t.max_imag());
                    p.max_vanishing = p.max_vanishing.max(t.max_vanishing());
                    terms = Some(t);
                    a = Some(v);
                }
                let mut c = None;
                if mode.closed() {
                    let v = closed_form_density(mn.s_m, nn.s_n, eps, mn.warp, m, n)?;
                    p.closed += wn * v;
                    c = Some(v);
                }
                let (mut abs_gap, mut rel_gap) = (None, None);
                if let (Some(a), Some(c)) = (a, c) {
                    let scale = density_scale(mn.s_m, nn.s_n, eps, mn.warp, m, n);
                    let (ag, rg) = ((a - c).abs(), relative_gap(a, c, scale));
                    p.max_abs_gap = p.max_abs_gap.max(ag);
                    p.max_rel_gap = p.max_rel_gap.max(rg);
                    abs_gap = Some(ag);
                    rel_gap = Some(rg);
                }
                if options.per_node {
                    let x = grid.m.points[i].join(&grid.n.points[j]);
                    p.records.push(NodeRecord {
                        x: x.0,
                        weight: grid.m.weights[i] * wn,
                        s_m: mn.s_m,
                        s_n: nn.s_n,
                        warp: mn.warp,
                        terms: terms.as_ref().map(TermValues::from),
                        assembled: a,
                        closed: c,
                        abs_gap,
                        rel_gap,
                    });
                }
            }
            Ok(p)
        })
        .collect::<Result<_>>()?;

    // ordered reduction
    let mut total = Partial::default();
    for (p, wm) in partials.into_iter().zip(&grid.m.weights) {
        total.assembled += wm * p.assembled;
        total.closed += wm * p.closed;
        total.max_abs_gap = total.max_abs_gap.max(p.max_abs_gap);
        total.max_rel_gap = total.max_rel_gap.max(p.max_rel_gap);
        total.max_imag = total.max_imag.max(p.max_imag);
        total.max_vanishing = total.max_vanishing.max(p.max_vanishing);
        total.records.extend(p.records);
    }

    let quadrature_shift = if options.check_convergence {
        let coarse = if mode.closed() { total.closed } else { closed_total(gm, gn, cfg, grid)? };
        let fine = closed_total(gm, gn, cfg, &grid.doubled(gm, gn)?)?;
        let shift = (fine - coarse).abs();
        if shift > options.quadrature_tolerance * fine.abs().max(1.0) {
            return Err(Error::QuadratureUnconverged { coarse, fine });
        }
        Some(shift)
    } else {
        None
    };

    let (total_abs_gap, total_rel_gap) = if mode == Mode::Verify {
        let g = (total.assembled - total.closed).abs();
        let denom = total.closed.abs();
        (Some(g), Some(if denom > 0.0 { g / denom } else { g }))
    } else {
        (None, None)
    };

    let totals = ReportTotals {
        wres_assembled: mode.assembled().then_some(total.assembled),
        wres_closed: mode.closed().then_some(total.closed),
        volume: grid.volume(),
        abs_gap: total_abs_gap,
        rel_gap: total_rel_gap,
        max_node_abs_gap: (mode == Mode::Verify).then_some(total.max_abs_gap),
        max_node_rel_gap: (mode == Mode::Verify).then_some(total.max_rel_gap),
        gap_tolerance: options.gap_tolerance,
        within_tolerance: (mode == Mode::Verify).then_some(total.max_rel_gap <= options.gap_tolerance),
        max_vanishing_term: mode.assembled().then_some(total.max_vanishing),
        max_imag: mode.assembled().then_some(total.max_imag),
        quadrature_shift,
        quadrature_tolerance: options.quadrature_tolerance,
    };
    let metadata = ReportMetadata {
        m,
        n,
        mbar,
        epsilon: eps,
        warp: cfg.warp().to_string(),
        factor_m: gm.label().to_string(),
        factor_n: gn.label().to_string(),
        grid_m: grid.m.per_axis,
        grid_n: grid.n.per_axis,
        nodes: grid.len(),
        deriv_mode: deriv_label(gm.deriv_mode()),
        mode,
        normalization: "Wres = integral over M x N of the unit-cosphere integral of the order -2mbar symbol; no (2 pi)^(-2mbar) factor".into(),
        trace: "identity (scalar operator)".into(),
    };
    Ok(ResidueReport {
        metadata,
        totals,
        quoted_prefactor: None,
        nodes: options.per_node.then_some(total.records),
    })
}

fn deriv_label(mode: DerivMode) -> String {
    match mode {
        DerivMode::Analytic => "analytic".into(),
        DerivMode::FiniteDifference { first, second } => format!("fd(first={first:e}, second={second:e})"),
    }
}

/// Closed-form total on `grid`.
pub fn closed_total(gm: &MetricField, gn: &MetricField, cfg: &WarpedConfig, grid: &QuadratureGrid) -> Result<f64> {
    let (m, n) = check_inputs(gm, gn, cfg)?;
    let m_data: Vec<(f64, f64)> = grid
        .m
        .points
        .par_iter()
        .map(|x| Ok((riemann_orthonormal(gm, x)?.scalar(), cfg.warp_value(x.coords())?)))
        .collect::<Result<_>>()?;
    let s_n: Vec<f64> = grid.n.points.par_iter().map(|x| Ok(riemann_orthonormal(gn, x)?.scalar())).collect::<Result<_>>()?;
    let mut total = 0.0;
    for ((s_m, f), wm) in m_data.iter().zip(&grid.m.weights) {
        let mut inner = 0.0;
        for (sn, wn) in s_n.iter().zip(&grid.n.weights) {
            inner += wn * closed_form_density(*s_m, *sn, cfg.epsilon(), *f, m, n)?;
        }
        total += wm * inner;
    }
    Ok(total)
}

/// Bimetric spectral Einstein-Hilbert action `Wres(Δ^{g₁} ∘ (Δ^{g₂})^{−m̄})`
/// with `g₂ = g_M ⊕ g_N` and `g₁ = ε g_M ⊕ f² g_N`, from the six-term
/// assembly.
pub fn bimetric_eh(gm: &MetricField, gn: &MetricField, g1: &WarpedConfig, grid: &QuadratureGrid) -> Result<f64> {
    check_inputs(gm, gn, g1)?;
    for (g, x) in [(gm, &grid.m.points[0]), (gn, &grid.n.points[0])] {
        if g.eval(x)?.cholesky().is_none() {
            return Err(Error::NotElliptic);
        }
    }
    let options = WresOptions { check_convergence: false, ..WresOptions::for_deriv_mode(gm.deriv_mode()) };
    let report = wres(gm, gn, g1, grid, Mode::Assembled, &options)?;
    Ok(report.totals.wres_assembled.expect("assembled mode"))
}

/// Compares a total on `S¹ × S³` with the quoted `4π⁴ ∫_{S¹}(1/ε + 1/f²)`.
/// `engine_total` is the computed residue on the same grid.
pub fn quoted_prefactor_check(grid: &QuadratureGrid, cfg: &WarpedConfig, engine_total: f64) -> Result<PrefactorCheck> {
    let eps = cfg.epsilon();
    let base_integral = grid.m.integrate(|x| Ok(1.0 / eps + cfg.warp_value(x.coords())?.powi(-2)))?;
    let quoted_total = QUOTED_S1_S3_PREFACTOR * base_integral;
    let significant = base_integral.abs() > 1e-12;
    Ok(PrefactorCheck {
        quoted_prefactor: QUOTED_S1_S3_PREFACTOR,
        engine_prefactor: significant.then(|| engine_total / base_integral),
        base_integral,
        quoted_total,
        engine_total,
        ratio: (engine_total.abs() > 1e-12).then(|| quoted_total / engine_total),
    })
}
