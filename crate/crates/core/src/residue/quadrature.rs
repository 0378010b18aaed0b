use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};
use crate::geometry::{CoordRange, MetricField, Point};

/// Default nodes per coordinate axis.
pub const DEFAULT_NODES: usize = 48;

/// 1D rule on one coordinate range: midpoint-offset trapezoid when periodic,
/// Gauss-Legendre otherwise. Nodes never touch the range ends.
pub fn axis_rule(range: &CoordRange, nodes: usize) -> Result<Vec<(f64, f64)>> {
    if nodes < 2 {
        return Err(Error::Config(format!("need at least 2 nodes per axis, got {nodes}")));
    }
    let (lo, hi) = (range.lo, range.hi);
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(Error::Config(format!("coordinate range [{lo}, {hi}] is not a finite interval")));
    }
    let h = hi - lo;
    if range.periodic {
        let step = h / nodes as f64;
        return Ok((0..nodes).map(|k| (lo + (k as f64 + 0.5) * step, step)).collect());
    }
    let rule = GaussLegendre::new(nodes).map_err(|e| Error::Config(format!("Gauss-Legendre rule: {e}")))?;
    let mut out: Vec<(f64, f64)> =
        rule.as_node_weight_pairs().iter().map(|&(t, w)| (lo + 0.5 * h * (t + 1.0), 0.5 * h * w)).collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(out)
}

/// Tensor-product rule on one factor chart with `√det g` folded into the
/// weights.
#[derive(Debug, Clone)]
pub struct FactorGrid {
    pub per_axis: usize,
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
}

impl FactorGrid {
    pub fn new(metric: &MetricField, per_axis: usize) -> Result<Self> {
        let rules = metric.domain().iter().map(|r| axis_rule(r, per_axis)).collect::<Result<Vec<_>>>()?;
        let total: usize = rules.iter().map(Vec::len).product();
        let mut points = Vec::with_capacity(total);
        let mut weights = Vec::with_capacity(total);
        let mut idx = vec![0usize; rules.len()];
        for _ in 0..total {
            let x: Vec<f64> = idx.iter().zip(&rules).map(|(&i, r)| r[i].0).collect();
            let w: f64 = idx.iter().zip(&rules).map(|(&i, r)| r[i].1).product();
            let p = Point::new(x)?;
            let det = metric.eval(&p)?.determinant();
            if !(det > 0.0) {
                return Err(Error::NotPositiveDefinite);
            }
            points.push(p);
            weights.push(w * det.sqrt());
            // last axis fastest
            for a in (0..idx.len()).rev() {
                idx[a] += 1;
                if idx[a] < rules[a].len() {
                    break;
                }
                idx[a] = 0;
            }
        }
        Ok(FactorGrid { per_axis, points, weights })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn volume(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `Σ w_i h(x_i)`.
    pub fn integrate(&self, mut h: impl FnMut(&Point) -> Result<f64>) -> Result<f64> {
        let mut acc = 0.0;
        for (p, w) in self.points.iter().zip(&self.weights) {
            acc += w * h(p)?;
        }
        Ok(acc)
    }
}

/// Product rule on M × N with weights of the Riemannian product metric.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    pub m: FactorGrid,
    pub n: FactorGrid,
}

impl QuadratureGrid {
    pub fn new(gm: &MetricField, gn: &MetricField, m_nodes: usize, n_nodes: usize) -> Result<Self> {
        Ok(QuadratureGrid { m: FactorGrid::new(gm, m_nodes)?, n: FactorGrid::new(gn, n_nodes)? })
    }

    /// The same rule with twice the nodes per axis.
    pub fn doubled(&self, gm: &MetricField, gn: &MetricField) -> Result<Self> {
        Self::new(gm, gn, 2 * self.m.per_axis, 2 * self.n.per_axis)
    }

    /// Number of product nodes.
    pub fn len(&self) -> usize {
        self.m.len() * self.n.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn volume(&self) -> f64 {
        self.m.volume() * self.n.volume()
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::geometry::{circle, sphere, torus};

    #[test]
    fn volumes_of_standard_charts() {
        let s1 = FactorGrid::new(&circle(1.0).unwrap(), 8).unwrap();
        assert!((s1.volume() - 2.0 * PI).abs() < 1e-13);
        let s3 = FactorGrid::new(&sphere(3, 1.0).unwrap(), 10).unwrap();
        assert!((s3.volume() - 2.0 * PI * PI).abs() < 1e-12);
        let s2 = FactorGrid::new(&sphere(2, 2.0).unwrap(), 10).unwrap();
        assert!((s2.volume() - 16.0 * PI).abs() < 1e-11);
        let t2 = FactorGrid::new(&torus(2).unwrap(), 8).unwrap();
        assert!((t2.volume() - 4.0 * PI * PI).abs() < 1e-12);
        assert!(s3.weights.iter().all(|w| *w > 0.0));
    }

    #[test]
    fn nodes_avoid_chart_boundaries() {
        let g = FactorGrid::new(&sphere(2, 1.0).unwrap(), 9).unwrap();
        for p in &g.points {
            let x = p.coords();
            assert!(x[0] > 0.0 && x[0] < PI && x[1] > 0.0 && x[1] < 2.0 * PI);
        }
    }

    #[test]
    fn gauss_legendre_is_exact_on_polynomials() {
        let rule = axis_rule(&CoordRange::open(-1.0, 2.0), 4).unwrap();
        // ∫_{-1}^{2} x^7 dx = (2^8 − 1)/8
        let got: f64 = rule.iter().map(|(x, w)| w * x.powi(7)).sum();
        assert!((got - 255.0 / 8.0).abs() < 1e-12);
    }

    #[test]
    fn trapezoid_is_spectral_on_periodic_functions() {
        let rule = axis_rule(&CoordRange::periodic(0.0, 2.0 * PI), 16).unwrap();
        let got: f64 = rule.iter().map(|(x, w)| w * (x.sin() + 2.0).recip()).sum();
        // ∫_0^{2π} dx/(2 + sin x) = 2π/√3
        assert!((got - 2.0 * PI / 3f64.sqrt()).abs() < 1e-8);
    }

    #[test]
    fn too_few_nodes_rejected() {
        assert!(axis_rule(&CoordRange::open(0.0, 1.0), 1).is_err());
    }
}
