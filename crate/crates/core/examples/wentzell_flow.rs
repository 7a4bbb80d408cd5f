//! Wentzell generator on the disk: spectrum, a heat-type evolution and one
//! elliptic solve.

use dtn_toolkit::wentzell::{analyticity_surrogate, assemble_wentzell};
use dtn_toolkit::{assemble, builtin_mesh, BuiltinKind, CoefficientSet, Complex64, Result};

fn main() -> Result<()> {
    let asm = assemble(&builtin_mesh(BuiltinKind::Disk, 2)?, &CoefficientSet::laplace())?;
    let g = assemble_wentzell(&asm)?;
    let spec = g.spectrum()?;
    println!("leading eigenvalues: {:?}", spec.real_parts().iter().take(4).map(|v| format!("{v:.4}")).collect::<Vec<_>>());

    let u0: Vec<f64> = asm.mesh.vertices().iter().map(|p| p[0] + 0.5).collect();
    let traj = g.evolve(&u0, &[0.0, 0.01, 0.1, 1.0])?;
    for (t, n) in traj.times.iter().zip(&traj.sup_norms) {
        println!("t = {t:<5} ‖u‖_sup = {n:.6}");
    }
    println!("contraction: {:?}", traj.contraction);

    let sol = g.solve_elliptic(Complex64::new(1.0, 0.0), &vec![-1.0; g.dim()], None)?;
    println!("(G − 1)u = −1 gives u ≈ {:.6}, residual {:.1e}", sol.u[0].re, sol.residual);

    let rep = analyticity_surrogate(&g.semigroup()?)?;
    println!("max t·‖G e^(tG)‖_sup = {:.4}", rep.max_sup);
    Ok(())
}
