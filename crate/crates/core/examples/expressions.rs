//! Parse, print, differentiate and evaluate warp expressions.

use std::collections::HashMap;

use warped_residue::exprlang::{eval, parse, Compiled};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let f = parse("2 + 0.3*sin(x1)^2 - exp(-x1)/3")?;
    println!("f       = {f}");
    let df = f.differentiate("x1");
    println!("df/dx1  = {df}");
    println!("d2f     = {}", df.differentiate("x1"));

    let env = HashMap::from([("x1".to_string(), 0.7)]);
    println!("f(0.7)  = {:.12}", eval(&f, &env)?);

    let compiled = Compiled::new(&df, &["x1".to_string()])?;
    let h = 1e-6;
    let fd = (eval(&f, &HashMap::from([("x1".into(), 0.7 + h)]))? - eval(&f, &HashMap::from([("x1".into(), 0.7 - h)]))?)
        / (2.0 * h);
    println!("f'(0.7) = {:.12} (central difference {fd:.12})", compiled.eval(&[0.7])?);

    // round trip through the printer
    assert_eq!(parse(&f.to_string())?, f);

    // unary minus binds tighter than ^
    let sq = parse("-x1^2")?;
    println!("-x1^2 at x1 = 3 -> {} (printed {sq})", eval(&sq, &HashMap::from([("x1".into(), 3.0)]))?);

    for bad in ["2 +", "sinh(x1)", "x1^x2"] {
        println!("{bad:<10} -> {}", parse(bad).unwrap_err());
    }
    Ok(())
}
