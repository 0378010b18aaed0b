//! Integrated residue on S¹ ×_f S³ with the normalization check against the
//! quoted prefactor.

use warped_residue::geometry::{circle, sphere, WarpedConfig};
use warped_residue::residue::{quoted_prefactor_check, wres, Mode, QuadratureGrid, WresOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (gm, gn) = (circle(1.0)?, sphere(3, 1.0)?);
    let grid = QuadratureGrid::new(&gm, &gn, 12, 12)?;
    for (eps, warp) in [(1.0, "1"), (2.0, "3"), (1.0, "1.5 + 0.5*cos(x1)")] {
        let cfg = WarpedConfig::parse(eps, warp, 1, 3)?;
        let report = wres(&gm, &gn, &cfg, &grid, Mode::Verify, &WresOptions::default())?;
        let total = report.totals.wres_assembled.expect("verify computes the assembled total");
        let check = quoted_prefactor_check(&grid, &cfg, total)?;
        println!("eps = {eps}, f = {warp}");
        println!("  Wres = {total:.10} (closed {:.10})", report.totals.wres_closed.unwrap_or(f64::NAN));
        match (check.engine_prefactor, check.ratio) {
            (Some(p), Some(r)) => {
                println!("  engine prefactor {p:.6}, quoted {:.6}, ratio {r:.6}", check.quoted_prefactor)
            }
            _ => println!("  base integral vanishes; prefactor undefined"),
        }
    }
    Ok(())
}
