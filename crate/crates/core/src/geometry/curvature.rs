use nalgebra::{DMatrix, SymmetricEigen};

use super::metric::{MetricField, MetricJet, Point, Signature};
use crate::error::{Error, Result};

/// Largest accepted condition number of a metric after symmetric diagonal
/// equilibration.
pub const MAX_CONDITION: f64 = 1e12;

const SYMMETRY_TOL: f64 = 1e-10;

/// Condition number of `g` after scaling rows and columns by `|g_ii|^-1/2`.
/// Coordinate charts near polar axes have tiny diagonal entries, which the
/// scaling removes; genuine degeneracy survives it.
pub fn equilibrated_condition(g: &DMatrix<f64>) -> f64 {
    let n = g.nrows();
    let mut scaled = g.clone();
    for i in 0..n {
        let di = g[(i, i)].abs();
        if di == 0.0 {
            return f64::INFINITY;
        }
        for j in 0..n {
            scaled[(i, j)] /= di.sqrt() * g[(j, j)].abs().sqrt();
        }
    }
    let eig = SymmetricEigen::new(scaled).eigenvalues;
    let max = eig.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let min = eig.iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
    if min == 0.0 || !min.is_finite() {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Inverse of a symmetric metric matrix.
pub fn inverse_metric(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !g.is_square() {
        return Err(Error::DimensionMismatch { expected: g.nrows(), found: g.ncols() });
    }
    let scale = g.amax().max(f64::MIN_POSITIVE);
    let asym = (g - g.transpose()).amax();
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    let condition = equilibrated_condition(g);
    if condition > MAX_CONDITION {
        return Err(Error::SingularMetric { condition });
    }
    let inv = g.clone().try_inverse().ok_or(Error::SingularMetric { condition: f64::INFINITY })?;
    Ok((&inv + inv.transpose()) * 0.5)
}

/// Orthonormal frame `E` (columns are vectors) with `E^T g E = I`, from the
/// Cholesky factor `g = L L^T` as `E = L^{-T}`. Block-diagonal metrics give
/// block-diagonal frames.
pub fn orthonormal_frame(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let chol = g.clone().cholesky().ok_or(Error::NotPositiveDefinite)?;
    let l = chol.l();
    let linv = l.try_inverse().ok_or(Error::NotPositiveDefinite)?;
    Ok(linv.transpose())
}

/// Christoffel symbols of the Levi-Civita connection at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct ChristoffelTable {
    dim: usize,
    /// `gamma[(k * dim + i) * dim + j]` = Γ^k_ij
    gamma: Vec<f64>,
    /// Γ^k = Σ_ij g^ij Γ^k_ij
    contracted: Vec<f64>,
}

impl ChristoffelTable {
    pub(crate) fn from_parts(dim: usize, gamma: Vec<f64>, ginv: &DMatrix<f64>) -> Self {
        let mut contracted = vec![0.0; dim];
        for (k, c) in contracted.iter_mut().enumerate() {
            for i in 0..dim {
                for j in 0..dim {
                    *c += ginv[(i, j)] * gamma[(k * dim + i) * dim + j];
                }
            }
        }
        ChristoffelTable { dim, gamma, contracted }
    }

    pub fn from_jet(jet: &MetricJet, ginv: &DMatrix<f64>) -> Result<Self> {
        let d = jet.dim();
        if jet.dg.len() != d {
            return Err(Error::DerivativeUnavailable { order: 1 });
        }
        let lower = lowered_christoffel(jet);
        let mut gamma = vec![0.0; d * d * d];
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    gamma[(k * d + i) * d + j] = (0..d).map(|l| ginv[(k, l)] * lower[(l * d + i) * d + j]).sum();
                }
            }
        }
        Ok(Self::from_parts(d, gamma, ginv))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Γ^k_ij
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.gamma[(k * self.dim + i) * self.dim + j]
    }

    pub fn contracted(&self) -> &[f64] {
        &self.contracted
    }

    pub fn max_abs_diff(&self, other: &ChristoffelTable) -> f64 {
        self.gamma.iter().zip(&other.gamma).fold(0.0, |a, (x, y)| a.max((x - y).abs()))
    }

    /// max |Γ^k_ij - Γ^k_ji|
    pub fn asymmetry(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    worst = worst.max((self.get(k, i, j) - self.get(k, j, i)).abs());
                }
            }
        }
        worst
    }
}

/// Γ_{l,ij} = ½(∂_i g_jl + ∂_j g_il − ∂_l g_ij), indexed `(l * d + i) * d + j`.
fn lowered_christoffel(jet: &MetricJet) -> Vec<f64> {
    let d = jet.dim();
    let mut out = vec![0.0; d * d * d];
    for l in 0..d {
        for i in 0..d {
            for j in 0..d {
                out[(l * d + i) * d + j] =
                    0.5 * (jet.dg[i][(j, l)] + jet.dg[j][(i, l)] - jet.dg[l][(i, j)]);
            }
        }
    }
    out
}

pub fn christoffel(metric: &MetricField, x: &Point) -> Result<ChristoffelTable> {
    let jet = metric.jet(x, 1)?;
    let ginv = inverse_metric(&jet.g)?;
    ChristoffelTable::from_jet(&jet, &ginv)
}

/// Riemann tensor components R_ijkl in an orthonormal frame.
///
/// Convention: R_ijkl = g_im R^m_jkl with
/// R^m_jkl = ∂_k Γ^m_lj − ∂_l Γ^m_kj + Γ^m_kp Γ^p_lj − Γ^m_lp Γ^p_kj,
/// so that sectional curvature is K(e_i, e_j) = R_ijij and the unit round
/// S^n has Σ_ij R_ijij = n(n−1). Ricci is R_jl = Σ_i R_ijil.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureTensor {
    dim: usize,
    r: Vec<f64>,
}

impl CurvatureTensor {
    pub fn zeros(dim: usize) -> Self {
        CurvatureTensor { dim, r: vec![0.0; dim.pow(4)] }
    }

    /// Builds the tensor from a closure over `(i, j, k, l)`.
    pub fn from_fn(dim: usize, f: impl Fn(usize, usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    for l in 0..dim {
                        let idx = t.index(i, j, k, l);
                        t.r[idx] = f(i, j, k, l);
                    }
                }
            }
        }
        t
    }

    /// Constant sectional curvature `kappa`: R_ijkl = κ(δ_ik δ_jl − δ_il δ_jk).
    pub fn constant_curvature(dim: usize, kappa: f64) -> Self {
        let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        Self::from_fn(dim, |i, j, k, l| kappa * (delta(i, k) * delta(j, l) - delta(i, l) * delta(j, k)))
    }

    #[inline]
    fn index(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.dim + j) * self.dim + k) * self.dim + l
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.r[self.index(i, j, k, l)]
    }

    pub fn components(&self) -> &[f64] {
        &self.r
    }

    /// R_jl = Σ_γ R_γjγl
    pub fn ricci(&self) -> DMatrix<f64> {
        let d = self.dim;
        DMatrix::from_fn(d, d, |j, l| (0..d).map(|g| self.get(g, j, g, l)).sum())
    }

    pub fn scalar(&self) -> f64 {
        self.ricci().trace()
    }

    /// Σ_γ Σ_{a in block} R_γaγa
    pub fn block_trace(&self, block: std::ops::Range<usize>) -> f64 {
        let mut s = 0.0;
        for g in 0..self.dim {
            for a in block.clone() {
                s += self.get(g, a, g, a);
            }
        }
        s
    }

    pub fn scaled(&self, c: f64) -> Self {
        CurvatureTensor { dim: self.dim, r: self.r.iter().map(|v| v * c).collect() }
    }

    /// Curvature of a Riemannian product from the curvatures of its factors
    /// (both in orthonormal frames); mixed components vanish.
    pub fn direct_sum(a: &CurvatureTensor, b: &CurvatureTensor) -> Self {
        let (m, n) = (a.dim, b.dim);
        let mut t = Self::zeros(m + n);
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    for l in 0..m {
                        let idx = t.index(i, j, k, l);
                        t.r[idx] = a.get(i, j, k, l);
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let idx = t.index(m + i, m + j, m + k, m + l);
                        t.r[idx] = b.get(i, j, k, l);
                    }
                }
            }
        }
        t
    }

    /// Largest violation among antisymmetry in (ij) and (kl), pair symmetry
    /// and the first Bianchi identity.
    pub fn symmetry_violation(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        let v = self.get(i, j, k, l);
                        worst = worst
                            .max((v + self.get(j, i, k, l)).abs())
                            .max((v + self.get(i, j, l, k)).abs())
                            .max((v - self.get(k, l, i, j)).abs())
                            .max((v + self.get(i, k, l, j) + self.get(i, l, j, k)).abs());
                    }
                }
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.r.iter().fold(0.0, |a, v| a.max(v.abs()))
    }
}

/// Coordinate components R_ijkl (all indices down) from a 2-jet of the metric.
pub fn riemann_coordinate(jet: &MetricJet, ginv: &DMatrix<f64>) -> Result<Vec<f64>> {
    let d = jet.dim();
    if jet.ddg.len() != d {
        return Err(Error::DerivativeUnavailable { order: 2 });
    }
    let lower = lowered_christoffel(jet);
    // upper[(k * d + i) * d + j] = Γ^k_ij
    let mut upper = vec![0.0; d * d * d];
    for k in 0..d {
        for i in 0..d {
            for j in 0..d {
                upper[(k * d + i) * d + j] = (0..d).map(|l| ginv[(k, l)] * lower[(l * d + i) * d + j]).sum();
            }
        }
    }
    let dd = |a: usize, b: usize, i: usize, j: usize| jet.ddg[a][b][(i, j)];
    let mut r = vec![0.0; d.pow(4)];
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                for e in 0..d {
                    let second = 0.5 * (dd(b, c, a, e) + dd(a, e, b, c) - dd(b, e, a, c) - dd(a, c, b, e));
                    // g_kl (Γ^k_bc Γ^l_ae − Γ^k_be Γ^l_ac) = Γ_{l,bc} Γ^l_ae − Γ_{l,be} Γ^l_ac
                    let mut quad = 0.0;
                    for l in 0..d {
                        quad += lower[(l * d + b) * d + c] * upper[(l * d + a) * d + e]
                            - lower[(l * d + b) * d + e] * upper[(l * d + a) * d + c];
                    }
                    r[((a * d + b) * d + c) * d + e] = second + quad;
                }
            }
        }
    }
    Ok(r)
}

/// Transforms all-lower coordinate components into the frame `E` (columns).
pub fn to_frame(dim: usize, coord: &[f64], e: &DMatrix<f64>) -> CurvatureTensor {
    let d = dim;
    // contract one index at a time
    let mut cur = coord.to_vec();
    for slot in 0..4 {
        let mut next = vec![0.0; d.pow(4)];
        for idx in 0..d.pow(4) {
            let mut digits = [idx / (d * d * d), (idx / (d * d)) % d, (idx / d) % d, idx % d];
            let target = digits[slot];
            let mut s = 0.0;
            for p in 0..d {
                digits[slot] = p;
                let src = ((digits[0] * d + digits[1]) * d + digits[2]) * d + digits[3];
                s += cur[src] * e[(p, target)];
            }
            next[idx] = s;
        }
        cur = next;
    }
    CurvatureTensor { dim: d, r: cur }
}

pub fn riemann_orthonormal(metric: &MetricField, x: &Point) -> Result<CurvatureTensor> {
    if metric.signature() == Signature::Indefinite {
        return Err(Error::NotPositiveDefinite);
    }
    let jet = metric.jet(x, 2)?;
    riemann_orthonormal_from_jet(&jet)
}

pub fn riemann_orthonormal_from_jet(jet: &MetricJet) -> Result<CurvatureTensor> {
    let ginv = inverse_metric(&jet.g)?;
    let e = orthonormal_frame(&jet.g)?;
    let coord = riemann_coordinate(jet, &ginv)?;
    Ok(to_frame(jet.dim(), &coord, &e))
}

/// Kulkarni-Nomizu product `(h ⊙ k)_ijkl = h_ik k_jl + h_jl k_ik − h_il k_jk − h_jk k_il`
/// of symmetric matrices; an algebraic curvature tensor. `δ ⊙ δ / 2` is the
/// unit-sphere tensor.
pub fn kulkarni_nomizu(h: &DMatrix<f64>, k: &DMatrix<f64>) -> CurvatureTensor {
    CurvatureTensor::from_fn(h.nrows(), |i, j, a, b| {
        h[(i, a)] * k[(j, b)] + h[(j, b)] * k[(i, a)] - h[(i, b)] * k[(j, a)] - h[(j, a)] * k[(i, b)]
    })
}

/// Metric `g_ij = δ_ij − ⅓ R_ikjl x^k x^l` on a small box, whose origin is
/// the center of normal coordinates with curvature `curv` there.
pub fn normal_coordinate_metric(curv: &CurvatureTensor, half_width: f64) -> Result<MetricField> {
    let d = curv.dim();
    let r = curv.clone();
    // c[(k, l)][(i, j)] = −⅓ (R_ikjl + R_iljk), the constant ∂_k∂_l g_ij
    let c: Vec<Vec<DMatrix<f64>>> = (0..d)
        .map(|k| {
            (0..d)
                .map(|l| DMatrix::from_fn(d, d, |i, j| -(r.get(i, k, j, l) + r.get(i, l, j, k)) / 3.0))
                .collect()
        })
        .collect();
    let c1 = c.clone();
    let c2 = c.clone();
    let eval = move |x: &[f64]| {
        let mut g = DMatrix::identity(d, d);
        for k in 0..d {
            for l in 0..d {
                g += &c[k][l] * (0.5 * x[k] * x[l]);
            }
        }
        g
    };
    let first = move |x: &[f64]| {
        (0..d)
            .map(|k| (0..d).fold(DMatrix::zeros(d, d), |acc, l| acc + &c1[k][l] * x[l]))
            .collect()
    };
    let second = move |_: &[f64]| c2.clone();
    let domain = vec![super::metric::CoordRange::open(-half_width, half_width); d];
    Ok(MetricField::from_fn(d, eval, domain, "normal-coordinates")?.with_exact_derivatives(first, second))
}

pub fn scalar_curvature(metric: &MetricField, x: &Point) -> Result<f64> {
    Ok(riemann_orthonormal(metric, x)?.scalar())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn inverse_examples() {
        let id = DMatrix::<f64>::identity(4, 4);
        assert_eq!(inverse_metric(&id).unwrap(), id);
        let (eps, f) = (2.0, 3.0);
        let g = DMatrix::from_diagonal(&nalgebra::dvector![eps, f * f, f * f, f * f]);
        let inv = inverse_metric(&g).unwrap();
        let expect = DMatrix::from_diagonal(&nalgebra::dvector![1.0 / eps, 1.0 / 9.0, 1.0 / 9.0, 1.0 / 9.0]);
        assert!((inv - expect).amax() < 1e-15);
        let g = dmatrix![2.0, 1.0; 1.0, 1.0];
        let inv = inverse_metric(&g).unwrap();
        assert!((&inv - dmatrix![1.0, -1.0; -1.0, 2.0]).amax() < 1e-14);
        assert!((&g * &inv - DMatrix::identity(2, 2)).amax() < 1e-12);
    }

    #[test]
    fn singular_and_asymmetric_rejected() {
        assert!(matches!(inverse_metric(&dmatrix![1.0, 1.0; 1.0, 1.0]), Err(Error::SingularMetric { .. })));
        assert!(matches!(
            inverse_metric(&dmatrix![1.0, 1.0; 1.0, 1.0 + 1e-14]),
            Err(Error::SingularMetric { .. })
        ));
        assert!(matches!(inverse_metric(&dmatrix![1.0, 0.5; 0.0, 1.0]), Err(Error::NotSymmetric { .. })));
        // tiny but well-separated diagonal entries are a chart effect, not degeneracy
        assert!(inverse_metric(&dmatrix![1.0, 0.0; 0.0, 1e-14]).is_ok());
    }

    #[test]
    fn frame_is_orthonormal() {
        let g = dmatrix![2.0, 0.3, 0.0; 0.3, 1.5, 0.1; 0.0, 0.1, 0.7];
        let e = orthonormal_frame(&g).unwrap();
        assert!((e.transpose() * &g * &e - DMatrix::identity(3, 3)).amax() < 1e-13);
        assert!(matches!(orthonormal_frame(&dmatrix![-1.0, 0.0; 0.0, 1.0]), Err(Error::NotPositiveDefinite)));
    }

    #[test]
    fn constant_curvature_contractions() {
        let r = CurvatureTensor::constant_curvature(4, 1.0);
        assert_eq!(r.scalar(), 12.0);
        assert!(r.symmetry_violation() < 1e-15);
        let sum = CurvatureTensor::direct_sum(&CurvatureTensor::zeros(1), &CurvatureTensor::constant_curvature(3, 1.0));
        assert_eq!(sum.scalar(), 6.0);
        assert_eq!(sum.block_trace(0..1), 0.0);
        assert_eq!(sum.block_trace(1..4), 6.0);
    }
}
