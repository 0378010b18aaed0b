//! The bimetric functional with a Lorentzian numerator, ε < 0.

use std::f64::consts::PI;

use warped_residue::geometry::{circle, sphere, WarpedConfig};
use warped_residue::residue::{bimetric_eh, QuadratureGrid};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (gm, gn) = (circle(1.0)?, sphere(3, 1.0)?);
    let grid = QuadratureGrid::new(&gm, &gn, 8, 10)?;
    for f in [1.0, 2.0, 0.5] {
        let cfg = WarpedConfig::parse(-1.0, &f.to_string(), 1, 3)?;
        let total = bimetric_eh(&gm, &gn, &cfg, &grid)?;
        // π²(1/ε + 1/f²) times vol(S¹ × S³) = 4π³
        let want = PI * PI * (-1.0 + 1.0 / (f * f)) * 4.0 * PI.powi(3);
        println!("f = {f}: {total:.10} (closed form {want:.10})");
    }
    Ok(())
}
