//! Metrics on coordinate charts, warped products, and their curvature.
//!
//! Riemann convention: `R_ijkl = ⟨R(e_i, e_j) e_k, e_l⟩`-style lowered tensor
//! with `R_abab = +K` for sectional curvature `K`, so that
//! `Σ_{γ,j} R_γjγj` is the scalar curvature and the unit round S^n gives
//! `n(n−1)`. Ricci is `Ric_jl = Σ_γ R_γjγl`.

pub mod charts;
pub mod curvature;
pub mod metric;
pub mod warped;

pub use charts::{circle, custom, sphere, torus, Chart};
pub use curvature::{
    christoffel, equilibrated_condition, inverse_metric, kulkarni_nomizu, normal_coordinate_metric, orthonormal_frame, riemann_orthonormal,
    riemann_orthonormal_from_jet, scalar_curvature, ChristoffelTable, CurvatureTensor, MAX_CONDITION,
};
pub use metric::{CoordRange, DerivMode, MetricField, MetricJet, Point, Signature};
pub use warped::{build_warped_product, product_metric, warped_christoffel_closed_form, WarpedConfig};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn p(v: &[f64]) -> Point {
        Point::new(v.to_vec()).unwrap()
    }

    #[test]
    fn flat_torus_is_flat() {
        let g = torus(3).unwrap();
        let x = p(&[0.3, 1.0, 2.0]);
        let c = christoffel(&g, &x).unwrap();
        assert!(c.contracted().iter().all(|v| *v == 0.0));
        let r = riemann_orthonormal(&g, &x).unwrap();
        assert_eq!(r.max_abs(), 0.0);
        assert_eq!(r.scalar(), 0.0);
    }

    #[test]
    fn two_sphere_christoffel_against_difference_quotient() {
        let g = sphere(2, 1.0).unwrap();
        for &th in &[0.3, 0.9, 1.4, 2.5] {
            let x = p(&[th, 0.7]);
            let c = christoffel(&g, &x).unwrap();
            // Γ^θ_φφ = −½ ∂_θ g_φφ with g_θθ = 1, by a central difference of g
            let h = 1e-6;
            let gp = g.eval(&p(&[th + h, 0.7])).unwrap()[(1, 1)];
            let gm = g.eval(&p(&[th - h, 0.7])).unwrap()[(1, 1)];
            let oracle = -0.5 * (gp - gm) / (2.0 * h);
            assert!((c.get(0, 1, 1) - oracle).abs() < 1e-8);
            assert!((c.get(0, 1, 1) + th.sin() * th.cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn sphere_scalar_curvatures() {
        for n in 2..=5usize {
            let g = sphere(n, 1.0).unwrap();
            let x: Vec<f64> = (0..n).map(|k| 0.4 + 0.3 * k as f64).collect();
            let s = scalar_curvature(&g, &p(&x)).unwrap();
            assert!((s - (n * (n - 1)) as f64).abs() < 1e-6, "S^{n}: {s}");
        }
        let s = scalar_curvature(&circle(1.0).unwrap(), &p(&[1.0])).unwrap();
        assert_eq!(s, 0.0);
        let s = scalar_curvature(&sphere(3, 2.0).unwrap(), &p(&[0.5, 1.0, 0.2])).unwrap();
        assert!((s - 1.5).abs() < 1e-9);
    }

    #[test]
    fn two_sphere_curvature_by_finite_differences() {
        let g = sphere(2, 1.0).unwrap().with_deriv_mode(DerivMode::DEFAULT_FD);
        let s = scalar_curvature(&g, &p(&[1.1, 0.2])).unwrap();
        assert!((s - 2.0).abs() < 1e-5, "{s}");
    }

    #[test]
    fn product_mixed_components_vanish() {
        let g = product_metric(&circle(1.0).unwrap(), &sphere(3, 1.0).unwrap()).unwrap();
        let r = riemann_orthonormal(&g, &p(&[0.1, 0.8, 1.2, 2.0])).unwrap();
        let mut mixed = 0.0_f64;
        for a in 0..1 {
            for i in 0..4 {
                for j in 0..4 {
                    for k in 0..4 {
                        for l in 0..4 {
                            let in_m = [i, j, k, l].iter().filter(|&&t| t == a).count();
                            if in_m > 0 && in_m < 4 {
                                mixed = mixed.max(r.get(i, j, k, l).abs());
                            }
                        }
                    }
                }
            }
        }
        assert!(mixed < 1e-8);
        assert!((r.scalar() - 6.0).abs() < 1e-9);
        assert!(r.symmetry_violation() < 1e-8);
    }

    #[test]
    fn warped_builder_examples() {
        let (gm, gn) = (torus(1).unwrap(), torus(3).unwrap());
        let cfg = WarpedConfig::parse(2.0, "3", 1, 3).unwrap();
        let g = build_warped_product(&gm, &gn, &cfg).unwrap();
        let v = g.eval(&p(&[0.0, 1.0, 2.0, 3.0])).unwrap();
        let want = nalgebra::DMatrix::from_diagonal(&nalgebra::dvector![2.0, 9.0, 9.0, 9.0]);
        assert_eq!(v, want);
        assert_eq!(g.signature(), Signature::Riemannian);

        let lorentz = WarpedConfig::parse(-1.0, "1", 1, 3).unwrap();
        let g = build_warped_product(&gm, &gn, &lorentz).unwrap();
        assert_eq!(g.signature(), Signature::Indefinite);
        assert!(matches!(riemann_orthonormal(&g, &p(&[0.0; 4])), Err(Error::NotPositiveDefinite)));

        assert!(matches!(WarpedConfig::parse(0.0, "1", 1, 3), Err(Error::ZeroEpsilon)));
        let bad = WarpedConfig::parse(1.0, "sin(x1)", 1, 3).unwrap();
        assert!(matches!(build_warped_product(&gm, &gn, &bad), Err(Error::NonPositiveWarp { .. })));
    }

    #[test]
    fn closed_form_christoffels_match_direct() {
        let gm = sphere(2, 1.0).unwrap();
        let gn = sphere(2, 1.5).unwrap();
        let cfg = WarpedConfig::parse(0.7, "2 + cos(x1)*sin(x2)", 2, 2).unwrap();
        let g = build_warped_product(&gm, &gn, &cfg).unwrap();
        let x = p(&[0.9, 0.4, 1.3, 2.2]);
        let direct = christoffel(&g, &x).unwrap();
        let closed = warped_christoffel_closed_form(&gm, &gn, &cfg, &x).unwrap();
        assert!(direct.max_abs_diff(&closed) < 1e-12);
        // cross block Γ^γ_jβ = (∂_j f / f) δ^γ_β
        let f = 2.0 + 0.9f64.cos() * 0.4f64.sin();
        let d1f = -(0.9f64.sin()) * 0.4f64.sin();
        assert!((closed.get(2, 0, 2) - d1f / f).abs() < 1e-12);
        assert_eq!(closed.get(3, 0, 2), 0.0);
    }
}
