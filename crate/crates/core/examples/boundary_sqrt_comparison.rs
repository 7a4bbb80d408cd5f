//! Compares the DtN matrix with −(−Δ_Γ)^{1/2} on the circle, across all
//! modes and for the low modes only.

use dtn_toolkit::dtn::{assemble_dtn, boundary_sqrt_operator, perturbation_report};
use dtn_toolkit::{assemble, builtin_mesh, BuiltinKind, CoefficientSet, Result};

fn main() -> Result<()> {
    for refinement in [2, 3] {
        let asm = assemble(&builtin_mesh(BuiltinKind::Disk, refinement)?, &CoefficientSet::laplace())?;
        let rep = perturbation_report(&assemble_dtn(&asm)?, &boundary_sqrt_operator(&asm)?, 8.0)?;
        println!(
            "refinement {refinement}: ‖N − W‖ = {:.4}, low modes {:.5}, relative bound at ε = 0.1: {:.3}",
            rep.l2_norm,
            rep.low_mode_l2_norm,
            rep.relative_bound.iter().find(|p| p.epsilon == 0.1).map_or(f64::NAN, |p| p.c)
        );
    }
    Ok(())
}
