//! Parametrix of the Laplacian on a curved chart, and the identity
//! `σ(Δ ∘ Q) = 1` down to degree −2.

use std::sync::Arc;

use nalgebra::DMatrix;
use warped_residue::geometry::{sphere, Point};
use warped_residue::symbols::{compose, laplace_symbol, parametrix, q3_closed_form, FullSymbol, LaplaceSymbolField, ParametrixField};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = sphere(2, 1.0)?;
    let x = Point::new(vec![0.9, 1.3])?;
    let lap = LaplaceSymbolField::new(g.clone());
    println!("sigma(Laplacian) = {}", laplace_symbol(&g, &x)?);

    let q = parametrix(&lap, &x, 4)?;
    for d in [-2, -3, -4] {
        println!("q_{d} has {} terms", q.component(d).len());
    }
    // canonical forms are taken in the orthonormal coframe ξ = L ξ̂, g = L Lᵀ
    let l = g.eval(&x)?.cholesky().ok_or("metric not positive")?.l();
    let q3 = q.component(-3).sub(&q3_closed_form(&g, &x)?)?;
    println!("|q_-3 - closed form| = {:.2e}", q3.to_frame(&l)?.canonical()?.max_abs_coeff());

    let par = ParametrixField { base: LaplaceSymbolField::new(g.clone()) };
    let c = compose(&lap, &par, &x, -2)?;
    let one = FullSymbol::constant(Arc::new(DMatrix::identity(2, 2)), 1.0);
    let err = c.to_frame(&l)?.canonical()?.snap_euclidean()?.max_coeff_diff(&one);
    println!("|sigma(Laplacian o Q) - 1| = {err:.2e}");
    Ok(())
}
