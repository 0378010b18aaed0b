//! Orthonormal-frame curvature of the round spheres, analytic and by finite
//! differences.

use warped_residue::geometry::{riemann_orthonormal, sphere, DerivMode, Point};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for (n, r) in [(2, 1.0), (3, 1.0), (3, 2.0), (4, 0.5)] {
        let g = sphere(n, r)?;
        let x = Point::new((0..n).map(|k| 0.6 + 0.3 * k as f64).collect())?;
        let exact = n as f64 * (n as f64 - 1.0) / (r * r);
        let analytic = riemann_orthonormal(&g, &x)?;
        let fd = riemann_orthonormal(&g.clone().with_deriv_mode(DerivMode::DEFAULT_FD), &x)?;
        println!(
            "S^{n}(r = {r}): scalar {:.12} analytic, {:.8} fd, {exact} exact; symmetry violation {:.1e}",
            analytic.scalar(),
            fd.scalar(),
            analytic.symmetry_violation()
        );
        println!("  Ric = {:?}", analytic.ricci().diagonal().iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>());
    }
    Ok(())
}
