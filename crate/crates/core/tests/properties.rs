//! Property tests over randomly generated curvature, moments, warps and
//! expressions.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use warped_residue::exprlang::{parse, Ast, BinaryOp, UnaryOp};
use warped_residue::geometry::{kulkarni_nomizu, CurvatureTensor};
use warped_residue::moments::{monomial_moment, MomentTable, MultiIndex, Rational};
use warped_residue::residue::{assembled_density, closed_form_density, density_terms};
use warped_residue::symbols::{normal_jet, FullSymbol};

fn symmetric(dim: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-1.0..1.0f64, dim * dim).prop_map(move |v| {
        let a = DMatrix::from_vec(dim, dim, v);
        (&a + a.transpose()) * 0.5
    })
}

/// Generic algebraic curvature tensor: a sum of Kulkarni-Nomizu products.
fn curvature(dim: usize) -> impl Strategy<Value = CurvatureTensor> {
    (symmetric(dim), symmetric(dim), symmetric(dim)).prop_map(|(a, b, c)| {
        let ab = kulkarni_nomizu(&a, &b);
        let cc = kulkarni_nomizu(&c, &c);
        CurvatureTensor::from_fn(ab.dim(), |i, j, k, l| ab.get(i, j, k, l) + cc.get(i, j, k, l))
    })
}

fn split_dims() -> impl Strategy<Value = (usize, usize)> {
    prop::sample::select(vec![(1, 1), (1, 3), (2, 2), (3, 1), (2, 4), (3, 3)])
}

/// Product-frame curvature with independent blocks on M and N.
fn product_curvature() -> impl Strategy<Value = (usize, usize, CurvatureTensor)> {
    split_dims().prop_flat_map(|(m, n)| {
        (curvature(m), curvature(n)).prop_map(move |(a, b)| (m, n, CurvatureTensor::direct_sum(&a, &b)))
    })
}

/// Symbol of the warped Laplacian at a normal center, in the orthonormal
/// coframe: `σ₂ = |ξ^M|²/ε + |ξ^N|²/f²`, `σ₁ = −i (n/(εf)) ∇f · ξ^M`.
fn warped_symbol(m: usize, n: usize, eps: f64, f: f64, grad: &[f64]) -> FullSymbol {
    let d = m + n;
    let norm = Arc::new(DMatrix::identity(d, d));
    let a = DMatrix::from_fn(d, d, |i, j| match (i == j, i < m) {
        (false, _) => 0.0,
        (true, true) => 1.0 / eps,
        (true, false) => 1.0 / (f * f),
    });
    let c: Vec<Complex64> =
        (0..d).map(|k| if k < m { Complex64::new(0.0, -(n as f64) / (eps * f) * grad[k]) } else { 0.0.into() }).collect();
    FullSymbol::quadratic(norm.clone(), &a).unwrap().add(&FullSymbol::linear(norm, &c).unwrap()).unwrap()
}

fn density(m: usize, n: usize, curv: &CurvatureTensor, sym: &FullSymbol) -> f64 {
    let jet = normal_jet(curv, (m + n) / 2);
    assembled_density(&density_terms(curv, sym, &jet, m, n).unwrap()).unwrap()
}

fn nonzero_epsilon() -> impl Strategy<Value = f64> {
    prop_oneof![-3.0..-0.3f64, 0.3..3.0f64]
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kulkarni_nomizu_has_riemann_symmetries(r in (2usize..6).prop_flat_map(curvature)) {
        prop_assert!(r.symmetry_violation() <= 1e-12 * r.max_abs().max(1.0));
    }

    #[test]
    fn direct_sum_traces_split(r in product_curvature()) {
        let (m, n, r) = r;
        let total = r.scalar();
        prop_assert!(close(total, r.block_trace(0..m) + r.block_trace(m..m + n), 1e-12));
    }

    #[test]
    fn moments_are_permutation_invariant(
        exps in prop::collection::vec(0u32..5, 2..6).prop_shuffle(),
        seed in any::<u64>(),
    ) {
        let n = exps.len();
        let mut permuted = exps.clone();
        permuted.rotate_left((seed % n as u64) as usize);
        let a = monomial_moment(&MultiIndex::from_slice(&exps), n).unwrap();
        let b = monomial_moment(&MultiIndex::from_slice(&permuted), n).unwrap();
        prop_assert_eq!(a, b);
        if exps.iter().any(|e| e % 2 == 1) {
            prop_assert_eq!(a, Rational::from_integer(0));
        } else {
            prop_assert!(a > Rational::from_integer(0));
        }
    }

    #[test]
    fn moment_table_is_order_independent(
        batch in prop::collection::vec(prop::collection::vec(0u32..4, 4), 1..12),
    ) {
        let forward = MomentTable::new(4);
        let backward = MomentTable::new(4);
        let a: Vec<_> = batch.iter().map(|e| forward.moment(&MultiIndex::from_slice(e)).unwrap()).collect();
        let mut b: Vec<_> = batch.iter().rev().map(|e| backward.moment(&MultiIndex::from_slice(e)).unwrap()).collect();
        b.reverse();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn six_terms_match_closed_form_for_algebraic_curvature(
        r in product_curvature(),
        eps in nonzero_epsilon(),
        f in 0.3..3.0f64,
        grad in prop::collection::vec(-2.0..2.0f64, 3),
    ) {
        let (m, n, r) = r;
        let got = density(m, n, &r, &warped_symbol(m, n, eps, f, &grad));
        let want = closed_form_density(r.block_trace(0..m), r.block_trace(m..m + n), eps, f, m, n).unwrap();
        prop_assert!(close(got, want, 1e-9), "{} vs {}", got, want);
    }

    #[test]
    fn density_is_linear_in_curvature(
        r1 in product_curvature(),
        seed in any::<u64>(),
        (a, b) in (-2.0..2.0f64, -2.0..2.0f64),
        eps in nonzero_epsilon(),
        grad in prop::collection::vec(-2.0..2.0f64, 3),
    ) {
        let (m, n, r1) = r1;
        // a second tensor of the same shape: r1 with its blocks permuted
        let shift = (seed % m as u64) as usize;
        let perm = |i: usize| if i < m { (i + shift) % m } else { i };
        let r2 = CurvatureTensor::from_fn(m + n, |i, j, k, l| r1.get(perm(i), perm(j), perm(k), perm(l)) * 0.5);
        let sym = warped_symbol(m, n, eps, 1.4, &grad);
        let mix = CurvatureTensor::from_fn(m + n, |i, j, k, l| a * r1.get(i, j, k, l) + b * r2.get(i, j, k, l));
        let lhs = density(m, n, &mix, &sym);
        let rhs = a * density(m, n, &r1, &sym) + b * density(m, n, &r2, &sym);
        prop_assert!(close(lhs, rhs, 1e-9), "{} vs {}", lhs, rhs);
    }

    #[test]
    fn density_scales_inversely_with_the_metric(
        r in product_curvature(),
        eps in nonzero_epsilon(),
        f in 0.3..3.0f64,
        lambda in 0.2..5.0f64,
        grad in prop::collection::vec(-2.0..2.0f64, 3),
    ) {
        // ε → λε, f → √λ f with ∇f scaled alike multiplies the symbol by 1/λ
        let (m, n, r) = r;
        let s = lambda.sqrt();
        let base = density(m, n, &r, &warped_symbol(m, n, eps, f, &grad));
        let scaled_grad: Vec<f64> = grad.iter().map(|g| g * s).collect();
        let scaled = density(m, n, &r, &warped_symbol(m, n, lambda * eps, s * f, &scaled_grad));
        prop_assert!(close(scaled, base / lambda, 1e-9), "{} vs {}", scaled, base / lambda);
    }
}

fn expression() -> impl Strategy<Value = Ast> {
    let leaf = prop_oneof![
        (0u32..1000, 0u32..3).prop_map(|(v, s)| Ast::Const(v as f64 / 10f64.powi(s as i32))),
        (1usize..4).prop_map(|k| Ast::var(format!("x{k}"))),
    ];
    leaf.prop_recursive(4, 32, 2, |inner| {
        prop_oneof![
            (prop::sample::select(vec![UnaryOp::Neg, UnaryOp::Sin, UnaryOp::Cos, UnaryOp::Exp, UnaryOp::Log, UnaryOp::Sqrt]), inner.clone())
                .prop_map(|(op, a)| Ast::Unary(op, Box::new(a))),
            (prop::sample::select(vec![BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::Div]), inner.clone(), inner.clone())
                .prop_map(|(op, a, b)| Ast::Binary(op, Box::new(a), Box::new(b))),
            (inner, prop::sample::select(vec![2.0, 3.0, 0.5, -1.0, -1.5]))
                .prop_map(|(a, e)| Ast::Binary(BinaryOp::Pow, Box::new(a), Box::new(Ast::Const(e)))),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn printing_then_parsing_is_the_identity(a in expression()) {
        let printed = a.to_string();
        let back = parse(&printed).map_err(|e| TestCaseError::fail(format!("{printed}: {e}")))?;
        prop_assert_eq!(back, a, "printed as {}", printed);
    }
}
