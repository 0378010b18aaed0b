use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::exprlang::{coordinate_names, Ast, Compiled};

/// A point of a coordinate chart.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinitePoint(coords));
        }
        Ok(Point(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    /// Concatenates a point of M with a point of N.
    pub fn join(&self, other: &Point) -> Point {
        let mut c = self.0.clone();
        c.extend_from_slice(&other.0);
        Point(c)
    }

    pub(crate) fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: self.dim() });
        }
        if self.0.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinitePoint(self.0.clone()));
        }
        Ok(())
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

/// How x-derivatives of the metric are obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DerivMode {
    Analytic,
    /// Central differences: `first` step for first derivatives, `second` for second.
    FiniteDifference { first: f64, second: f64 },
}

impl DerivMode {
    pub const DEFAULT_FD: DerivMode = DerivMode::FiniteDifference { first: 1e-4, second: 1e-3 };

    pub fn finite_difference(step: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::Config(format!("finite-difference step must be positive, got {step}")));
        }
        Ok(DerivMode::FiniteDifference { first: step, second: step * 10.0 })
    }

    pub fn is_analytic(&self) -> bool {
        matches!(self, DerivMode::Analytic)
    }
}

impl fmt::Display for DerivMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DerivMode::Analytic => write!(f, "analytic"),
            DerivMode::FiniteDifference { first, second } => write!(f, "fd(h1={first:e}, h2={second:e})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signature {
    Riemannian,
    Indefinite,
}

/// Coordinate range of a chart; periodic coordinates identify `lo` with `hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordRange {
    pub lo: f64,
    pub hi: f64,
    pub periodic: bool,
}

impl CoordRange {
    pub fn periodic(lo: f64, hi: f64) -> Self {
        CoordRange { lo, hi, periodic: true }
    }

    pub fn open(lo: f64, hi: f64) -> Self {
        CoordRange { lo, hi, periodic: false }
    }
}

type EvalFn = dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync;
type FirstFn = dyn Fn(&[f64]) -> Vec<DMatrix<f64>> + Send + Sync;
type SecondFn = dyn Fn(&[f64]) -> Vec<Vec<DMatrix<f64>>> + Send + Sync;

/// Upper-triangular compiled entries of a symmetric matrix of expressions.
struct ExprEntries {
    entries: Vec<Ast>,
    value: Vec<Compiled>,
    first: Vec<Vec<Compiled>>,
    second: Vec<Vec<Vec<Compiled>>>,
}

enum Source {
    Expr(ExprEntries),
    Func {
        eval: Arc<EvalFn>,
        first: Option<Arc<FirstFn>>,
        second: Option<Arc<SecondFn>>,
    },
}

/// Metric tensor g_ij(x) on a single coordinate chart.
#[derive(Clone)]
pub struct MetricField {
    dim: usize,
    source: Arc<Source>,
    deriv_mode: DerivMode,
    signature: Signature,
    domain: Vec<CoordRange>,
    label: String,
}

impl fmt::Debug for MetricField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricField")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("deriv_mode", &self.deriv_mode)
            .field("signature", &self.signature)
            .finish()
    }
}

fn upper_pairs(dim: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..dim).flat_map(move |i| (i..dim).map(move |j| (i, j)))
}

fn fill_symmetric(dim: usize, vals: &[f64]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(dim, dim);
    for ((i, j), v) in upper_pairs(dim).zip(vals) {
        m[(i, j)] = *v;
        m[(j, i)] = *v;
    }
    m
}

impl MetricField {
    /// Metric from a full `dim x dim` matrix of expressions in `x1..x<dim>`.
    /// Only the upper triangle is read; the lower triangle must match it.
    pub fn from_expressions(entries: Vec<Vec<Ast>>, domain: Vec<CoordRange>, label: impl Into<String>) -> Result<Self> {
        let dim = entries.len();
        if dim == 0 {
            return Err(Error::Config("metric must have positive dimension".into()));
        }
        for row in &entries {
            if row.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: row.len() });
            }
        }
        if domain.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: domain.len() });
        }
        for (i, j) in upper_pairs(dim) {
            if i != j && entries[i][j] != entries[j][i] {
                return Err(Error::Config(format!(
                    "metric entries ({},{}) and ({},{}) differ: `{}` vs `{}`",
                    i + 1,
                    j + 1,
                    j + 1,
                    i + 1,
                    entries[i][j],
                    entries[j][i]
                )));
            }
        }
        let upper: Vec<Ast> = upper_pairs(dim).map(|(i, j)| entries[i][j].clone()).collect();
        let source = ExprEntries::compile(dim, upper)?;
        Ok(MetricField {
            dim,
            source: Arc::new(Source::Expr(source)),
            deriv_mode: DerivMode::Analytic,
            signature: Signature::Riemannian,
            domain,
            label: label.into(),
        })
    }

    /// Metric from a closure. Derivatives default to finite differences unless
    /// exact evaluators are attached with [`MetricField::with_exact_derivatives`].
    pub fn from_fn(
        dim: usize,
        eval: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
        domain: Vec<CoordRange>,
        label: impl Into<String>,
    ) -> Result<Self> {
        if domain.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: domain.len() });
        }
        Ok(MetricField {
            dim,
            source: Arc::new(Source::Func { eval: Arc::new(eval), first: None, second: None }),
            deriv_mode: DerivMode::DEFAULT_FD,
            signature: Signature::Riemannian,
            domain,
            label: label.into(),
        })
    }

    /// Attaches exact first and second derivative evaluators and switches to
    /// analytic mode. Has no effect on expression-backed metrics.
    pub fn with_exact_derivatives(
        mut self,
        first: impl Fn(&[f64]) -> Vec<DMatrix<f64>> + Send + Sync + 'static,
        second: impl Fn(&[f64]) -> Vec<Vec<DMatrix<f64>>> + Send + Sync + 'static,
    ) -> Self {
        let eval = match self.source.as_ref() {
            Source::Func { eval, .. } => eval.clone(),
            Source::Expr(_) => return self,
        };
        self.source = Arc::new(Source::Func {
            eval,
            first: Some(Arc::new(first)),
            second: Some(Arc::new(second)),
        });
        self.deriv_mode = DerivMode::Analytic;
        self
    }

    pub fn with_deriv_mode(mut self, mode: DerivMode) -> Self {
        self.deriv_mode = mode;
        self
    }

    pub fn with_signature(mut self, signature: Signature) -> Self {
        self.signature = signature;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn deriv_mode(&self) -> DerivMode {
        self.deriv_mode
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    pub fn domain(&self) -> &[CoordRange] {
        &self.domain
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Full entry expressions, when the metric is expression-backed.
    pub fn expressions(&self) -> Option<Vec<Vec<Ast>>> {
        match self.source.as_ref() {
            Source::Expr(e) => {
                let mut out = vec![vec![Ast::Const(0.0); self.dim]; self.dim];
                for ((i, j), a) in upper_pairs(self.dim).zip(&e.entries) {
                    out[i][j] = a.clone();
                    out[j][i] = a.clone();
                }
                Some(out)
            }
            Source::Func { .. } => None,
        }
    }

    /// g_ij(x).
    pub fn eval(&self, x: &Point) -> Result<DMatrix<f64>> {
        x.check_dim(self.dim)?;
        self.eval_raw(x.coords())
    }

    fn eval_raw(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        match self.source.as_ref() {
            Source::Expr(e) => {
                let vals = e.value.iter().map(|c| c.eval(x)).collect::<std::result::Result<Vec<_>, _>>()?;
                Ok(fill_symmetric(self.dim, &vals))
            }
            Source::Func { eval, .. } => {
                let m = eval(x);
                if m.nrows() != self.dim || m.ncols() != self.dim {
                    return Err(Error::DimensionMismatch { expected: self.dim, found: m.nrows() });
                }
                Ok(m)
            }
        }
    }

    /// Value and x-derivatives up to `order` (at most 2) at `x`.
    pub fn jet(&self, x: &Point, order: usize) -> Result<MetricJet> {
        x.check_dim(self.dim)?;
        let g = self.eval_raw(x.coords())?;
        let mut jet = MetricJet { g, dg: Vec::new(), ddg: Vec::new() };
        if order == 0 {
            return Ok(jet);
        }
        match self.deriv_mode {
            DerivMode::Analytic => self.analytic_derivatives(x.coords(), order, &mut jet)?,
            DerivMode::FiniteDifference { first, second } => {
                self.fd_derivatives(x.coords(), order, first, second, &mut jet)?
            }
        }
        Ok(jet)
    }

    fn analytic_derivatives(&self, x: &[f64], order: usize, jet: &mut MetricJet) -> Result<()> {
        let d = self.dim;
        match self.source.as_ref() {
            Source::Expr(e) => {
                for k in 0..d {
                    let vals = e.first[k].iter().map(|c| c.eval(x)).collect::<std::result::Result<Vec<_>, _>>()?;
                    jet.dg.push(fill_symmetric(d, &vals));
                }
                if order >= 2 {
                    for k in 0..d {
                        let mut row = Vec::with_capacity(d);
                        for l in 0..d {
                            let (a, b) = if k <= l { (k, l - k) } else { (l, k - l) };
                            let vals = e.second[a][b]
                                .iter()
                                .map(|c| c.eval(x))
                                .collect::<std::result::Result<Vec<_>, _>>()?;
                            row.push(fill_symmetric(d, &vals));
                        }
                        jet.ddg.push(row);
                    }
                }
                Ok(())
            }
            Source::Func { first, second, .. } => {
                let first = first.as_ref().ok_or(Error::DerivativeUnavailable { order: 1 })?;
                jet.dg = first(x);
                if order >= 2 {
                    let second = second.as_ref().ok_or(Error::DerivativeUnavailable { order: 2 })?;
                    jet.ddg = second(x);
                }
                Ok(())
            }
        }
    }

    fn fd_derivatives(&self, x: &[f64], order: usize, h1: f64, h2: f64, jet: &mut MetricJet) -> Result<()> {
        let d = self.dim;
        let shifted = |steps: &[(usize, f64)]| {
            let mut y = x.to_vec();
            for (k, s) in steps {
                y[*k] += s;
            }
            self.eval_raw(&y)
        };
        for k in 0..d {
            let plus = shifted(&[(k, h1)])?;
            let minus = shifted(&[(k, -h1)])?;
            jet.dg.push((plus - minus) / (2.0 * h1));
        }
        if order >= 2 {
            jet.ddg = vec![vec![DMatrix::zeros(d, d); d]; d];
            for k in 0..d {
                let plus = shifted(&[(k, h2)])?;
                let minus = shifted(&[(k, -h2)])?;
                jet.ddg[k][k] = (plus - &jet.g * 2.0 + minus) / (h2 * h2);
                for l in (k + 1)..d {
                    let pp = shifted(&[(k, h2), (l, h2)])?;
                    let pm = shifted(&[(k, h2), (l, -h2)])?;
                    let mp = shifted(&[(k, -h2), (l, h2)])?;
                    let mm = shifted(&[(k, -h2), (l, -h2)])?;
                    let v = (pp - pm - mp + mm) / (4.0 * h2 * h2);
                    jet.ddg[k][l] = v.clone();
                    jet.ddg[l][k] = v;
                }
            }
        }
        Ok(())
    }
}

impl ExprEntries {
    fn compile(dim: usize, entries: Vec<Ast>) -> Result<Self> {
        let names = coordinate_names(dim);
        let comp = |a: &Ast| Compiled::new(a, &names).map_err(Error::from);
        let value = entries.iter().map(comp).collect::<Result<Vec<_>>>()?;
        let mut first_ast = Vec::with_capacity(dim);
        let mut first = Vec::with_capacity(dim);
        for name in &names {
            let row: Vec<Ast> = entries.iter().map(|a| a.differentiate(name)).collect();
            first.push(row.iter().map(comp).collect::<Result<Vec<_>>>()?);
            first_ast.push(row);
        }
        // second[k][l - k] holds d^2/dx_k dx_l for k <= l
        let mut second = Vec::with_capacity(dim);
        for k in 0..dim {
            let mut per_l = Vec::with_capacity(dim - k);
            for name in &names[k..] {
                let row = first_ast[k].iter().map(|a| comp(&a.differentiate(name))).collect::<Result<Vec<_>>>()?;
                per_l.push(row);
            }
            second.push(per_l);
        }
        Ok(ExprEntries { entries, value, first, second })
    }
}

/// Metric value and coordinate derivatives at one point.
#[derive(Debug, Clone)]
pub struct MetricJet {
    pub g: DMatrix<f64>,
    /// `dg[k]` = d g / d x_k
    pub dg: Vec<DMatrix<f64>>,
    /// `ddg[k][l]` = d^2 g / d x_k d x_l
    pub ddg: Vec<Vec<DMatrix<f64>>>,
}

impl MetricJet {
    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn order(&self) -> usize {
        if !self.ddg.is_empty() {
            2
        } else if !self.dg.is_empty() {
            1
        } else {
            0
        }
    }

    /// Derivatives of the inverse metric: (d g^-1 / dx_k, d^2 g^-1 / dx_k dx_l).
    pub fn inverse_derivatives(&self, ginv: &DMatrix<f64>) -> (Vec<DMatrix<f64>>, Vec<Vec<DMatrix<f64>>>) {
        let d = self.dim();
        let dginv: Vec<DMatrix<f64>> = self.dg.iter().map(|dg| -(ginv * dg * ginv)).collect();
        let mut ddginv = Vec::new();
        if !self.ddg.is_empty() {
            for k in 0..d {
                let mut row = Vec::with_capacity(d);
                for l in 0..d {
                    let a = &self.dg[k] * ginv * &self.dg[l];
                    let b = &self.dg[l] * ginv * &self.dg[k];
                    row.push(ginv * (a + b - &self.ddg[k][l]) * ginv);
                }
                ddginv.push(row);
            }
        }
        (dginv, ddginv)
    }
}
