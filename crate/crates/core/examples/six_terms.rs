//! The six contributions to the residue density at single points, against
//! the closed form in the factor scalar curvatures.

use warped_residue::geometry::{circle, sphere, Point, WarpedConfig};
use warped_residue::residue::point_density;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (gm, gn) = (circle(1.0)?, sphere(3, 1.0)?);
    let x = Point::new(vec![1.1, 0.8, 1.9, 4.0])?;
    for (eps, warp) in [(1.0, "1"), (2.0, "3"), (-1.0, "2"), (0.5, "2 + 0.3*sin(x1)")] {
        let cfg = WarpedConfig::parse(eps, warp, 1, 3)?;
        let d = point_density(&gm, &gn, &cfg, &x)?;
        let t: Vec<String> = (1..=6).map(|k| format!("{:+.6}", d.terms.term(k).re)).collect();
        println!("eps = {eps:>4}, f = {warp:<16} t1..t6 = [{}]", t.join(", "));
        println!(
            "    assembled {:.12}  closed {:.12}  gap {:.1e}  max imag {:.1e}",
            d.assembled,
            d.closed,
            d.abs_gap(),
            d.terms.max_imag()
        );
    }
    Ok(())
}
