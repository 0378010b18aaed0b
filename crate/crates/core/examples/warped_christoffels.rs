//! Christoffel symbols of a warped product: the closed form against the
//! generic computation on the assembled metric.

use warped_residue::geometry::{
    build_warped_product, christoffel, circle, sphere, warped_christoffel_closed_form, Point, WarpedConfig,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (gm, gn) = (circle(1.0)?, sphere(3, 1.0)?);
    for (eps, warp) in [(1.0, "1"), (2.0, "3"), (-1.0, "2"), (1.0, "2 + 0.3*sin(x1)")] {
        let cfg = WarpedConfig::parse(eps, warp, 1, 3)?;
        let g = build_warped_product(&gm, &gn, &cfg)?;
        let mut worst = 0.0f64;
        for k in 0..10 {
            let t = k as f64 / 10.0;
            let x = Point::new(vec![6.0 * t, 0.4 + 2.0 * t, 0.3 + 2.5 * t, 5.0 * t])?;
            let closed = warped_christoffel_closed_form(&gm, &gn, &cfg, &x)?;
            worst = worst.max(christoffel(&g, &x)?.max_abs_diff(&closed));
        }
        println!("eps = {eps:>4}, f = {warp:<16} max |closed - generic| = {worst:.2e}");
    }
    Ok(())
}
