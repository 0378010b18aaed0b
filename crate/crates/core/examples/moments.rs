//! Exact monomial moments over the unit sphere.

use warped_residue::moments::{
    integrate_polynomial_over_sphere, monomial_moment, ratio_to_f64, sphere_area, MultiIndex, XiPolynomial,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 4;
    println!("area of S^{} = {:.12}", n - 1, sphere_area(n));
    for e in [[0, 0, 0, 0], [2, 0, 0, 0], [4, 0, 0, 0], [2, 2, 0, 0], [2, 2, 2, 2], [6, 2, 0, 0], [1, 1, 0, 0]] {
        let alpha = MultiIndex::from_slice(&e);
        let m = monomial_moment(&alpha, n)?;
        println!("<{alpha}> = {m} ({:.12})", ratio_to_f64(m));
    }
    // ∫ |ξ|^4 over the sphere is the area
    let p = XiPolynomial::norm_power(n, 2);
    println!("integral of |xi|^4 = {:.12}", integrate_polynomial_over_sphere(&p, n)?.re);
    let q = XiPolynomial::zero(n).with_term(3.0, &[2, 0, 0, 0])?.with_term(-1.0, &[0, 0, 0, 2])?;
    println!("integral of 3 xi1^2 - xi4^2 = {:.12} (= area / 2)", integrate_polynomial_over_sphere(&q, n)?.re);
    Ok(())
}
