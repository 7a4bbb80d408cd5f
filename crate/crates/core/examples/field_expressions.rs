//! Parses coefficient expressions and evaluates them on the boundary.

use dtn_toolkit::field::{parse_field, EvalContext};
use dtn_toolkit::Result;

fn main() -> Result<()> {
    let expr = parse_field("1 + 0.5*cos(3*theta) + s^2")?;
    for k in 0..4 {
        let theta = k as f64 * std::f64::consts::FRAC_PI_2;
        let ctx = EvalContext::boundary(theta.cos(), theta.sin(), theta, theta);
        println!("θ = {theta:.4}: {:.6}", expr.eval(&ctx)?);
    }
    match parse_field("sin(x") {
        Ok(_) => println!("unexpectedly parsed"),
        Err(e) => println!("error report: {e}"),
    }
    Ok(())
}
