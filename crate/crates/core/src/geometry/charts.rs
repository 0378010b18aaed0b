//! Standard charts: circle, flat torus, round sphere, and custom metrics.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::metric::{CoordRange, MetricField};
use crate::error::{Error, Result};
use crate::exprlang::{parse, Ast};

/// Circle of radius `r`, angle coordinate on `[0, 2π)`.
pub fn circle(r: f64) -> Result<MetricField> {
    check_radius(r)?;
    MetricField::from_expressions(
        vec![vec![Ast::Const(r * r)]],
        vec![CoordRange::periodic(0.0, 2.0 * PI)],
        format!("circle({r})"),
    )
}

/// Flat torus `T^k = (ℝ/2πℤ)^k` with the Euclidean metric.
pub fn torus(k: usize) -> Result<MetricField> {
    if k == 0 {
        return Err(Error::Config("torus dimension must be positive".into()));
    }
    let entries = (0..k)
        .map(|i| (0..k).map(|j| Ast::Const(if i == j { 1.0 } else { 0.0 })).collect())
        .collect();
    MetricField::from_expressions(entries, vec![CoordRange::periodic(0.0, 2.0 * PI); k], format!("torus({k})"))
}

/// Round sphere S^n of radius `r` in hyperspherical coordinates
/// `x1..x(n-1) ∈ (0, π)`, `xn ∈ [0, 2π)`:
/// g = r² diag(1, sin²x1, sin²x1 sin²x2, ...).
pub fn sphere(n: usize, r: f64) -> Result<MetricField> {
    check_radius(r)?;
    if n == 0 {
        return Err(Error::Config("sphere dimension must be positive".into()));
    }
    if n == 1 {
        return circle(r).map(|g| g.with_label(format!("sphere(1, {r})")));
    }
    let mut diag = Vec::with_capacity(n);
    let mut acc = Ast::Const(r * r);
    diag.push(acc.clone());
    for k in 1..n {
        let s2 = Ast::pow(Ast::unary(crate::exprlang::UnaryOp::Sin, Ast::var(format!("x{k}"))), 2.0);
        acc = Ast::mul(acc, s2);
        diag.push(acc.clone());
    }
    let entries = (0..n)
        .map(|i| (0..n).map(|j| if i == j { diag[i].clone() } else { Ast::Const(0.0) }).collect())
        .collect();
    let mut domain = vec![CoordRange::open(0.0, PI); n - 1];
    domain.push(CoordRange::periodic(0.0, 2.0 * PI));
    MetricField::from_expressions(entries, domain, format!("sphere({n}, {r})"))
}

/// Metric with user-supplied entry expressions in `x1..x<dim>`.
pub fn custom(entries: &[Vec<String>], domain: Vec<CoordRange>) -> Result<MetricField> {
    let asts = entries
        .iter()
        .map(|row| row.iter().map(|s| parse(s).map_err(Error::from)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    MetricField::from_expressions(asts, domain, "custom")
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("radius must be positive, got {r}")))
    }
}

/// Serializable description of a chart, as used in run configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Chart {
    Circle {
        #[serde(default = "one")]
        radius: f64,
    },
    Torus {
        dim: usize,
    },
    Sphere {
        dim: usize,
        #[serde(default = "one")]
        radius: f64,
    },
    Custom {
        dim: usize,
        metric: Vec<Vec<String>>,
        /// `[lo, hi]` per coordinate
        domain: Vec<[f64; 2]>,
        #[serde(default)]
        periodic: Vec<bool>,
    },
}

fn one() -> f64 {
    1.0
}

impl Chart {
    pub fn dim(&self) -> usize {
        match self {
            Chart::Circle { .. } => 1,
            Chart::Torus { dim } | Chart::Sphere { dim, .. } | Chart::Custom { dim, .. } => *dim,
        }
    }

    pub fn build(&self) -> Result<MetricField> {
        match self {
            Chart::Circle { radius } => circle(*radius),
            Chart::Torus { dim } => torus(*dim),
            Chart::Sphere { dim, radius } => sphere(*dim, *radius),
            Chart::Custom { dim, metric, domain, periodic } => {
                if metric.len() != *dim || domain.len() != *dim {
                    return Err(Error::Config(format!(
                        "custom chart of dim {dim} needs a {dim}x{dim} metric and {dim} domain ranges"
                    )));
                }
                if !periodic.is_empty() && periodic.len() != *dim {
                    return Err(Error::Config("`periodic` must list one flag per coordinate".into()));
                }
                let ranges = domain
                    .iter()
                    .enumerate()
                    .map(|(i, [lo, hi])| {
                        if !(lo < hi) {
                            return Err(Error::Config(format!("empty domain [{lo}, {hi}] for x{}", i + 1)));
                        }
                        Ok(CoordRange { lo: *lo, hi: *hi, periodic: periodic.get(i).copied().unwrap_or(false) })
                    })
                    .collect::<Result<Vec<_>>>()?;
                custom(metric, ranges)
            }
        }
    }

    /// Known constant scalar curvature, if the chart has one.
    pub fn known_scalar_curvature(&self) -> Option<f64> {
        match self {
            Chart::Circle { .. } | Chart::Torus { .. } => Some(0.0),
            Chart::Sphere { dim, radius } => Some((*dim * (*dim - 1)) as f64 / (radius * radius)),
            Chart::Custom { .. } => None,
        }
    }

    /// Total Riemannian volume, if known in closed form.
    pub fn known_volume(&self) -> Option<f64> {
        match self {
            Chart::Circle { radius } => Some(2.0 * PI * radius),
            Chart::Torus { dim } => Some((2.0 * PI).powi(*dim as i32)),
            Chart::Sphere { dim, radius } => {
                Some(crate::moments::sphere_area(dim + 1) * radius.powi(*dim as i32))
            }
            Chart::Custom { .. } => None,
        }
    }
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Chart::Circle { radius } => write!(f, "circle({radius})"),
            Chart::Torus { dim } => write!(f, "torus({dim})"),
            Chart::Sphere { dim, radius } => write!(f, "sphere({dim}, {radius})"),
            Chart::Custom { dim, .. } => write!(f, "custom({dim})"),
        }
    }
}
