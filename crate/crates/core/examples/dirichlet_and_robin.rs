//! Harmonic extension of cos 3θ on the disk and a Robin solve at λ = 1 + 2i.

use dtn_toolkit::elliptic::{dirichlet_extend, max_principle_check, robin_max_principle, robin_solve};
use dtn_toolkit::{assemble, builtin_mesh, parse_field, BuiltinKind, CoefficientSet, Complex64, Result};

fn main() -> Result<()> {
    let asm = assemble(&builtin_mesh(BuiltinKind::Disk, 3)?, &CoefficientSet::laplace())?;
    let phi = asm.sample_boundary(&parse_field("cos(3*theta)")?)?;

    let ext = dirichlet_extend(&asm, &phi)?;
    let err = asm
        .mesh
        .vertices()
        .iter()
        .zip(&ext.u)
        .map(|(p, u)| {
            let (r, t) = (p[0].hypot(p[1]), p[1].atan2(p[0]));
            (u - r.powi(3) * (3.0 * t).cos()).abs()
        })
        .fold(0.0, f64::max);
    println!("Dirichlet: max error against r³cos 3θ = {err:.3e}, max-principle ratio = {:.6}", max_principle_check(&asm, &ext));

    let lambda = Complex64::new(1.0, 2.0);
    let phi_c: Vec<Complex64> = phi.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let robin = robin_solve(&asm, lambda, &phi_c)?;
    println!("Robin λ = {lambda}: residual {:.2e}, |Re λ|·‖u‖/‖φ‖ = {:.4}", robin.residual, robin_max_principle(&robin));
    Ok(())
}
