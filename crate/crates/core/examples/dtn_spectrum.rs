//! Dirichlet-to-Neumann spectrum on the unit disk; the exact eigenvalues are
//! 0, −1, −1, −2, −2, …

use dtn_toolkit::dtn::assemble_dtn;
use dtn_toolkit::{assemble, builtin_mesh, BuiltinKind, CoefficientSet, Result};

fn main() -> Result<()> {
    let asm = assemble(&builtin_mesh(BuiltinKind::Disk, 3)?, &CoefficientSet::laplace())?;
    let dtn = assemble_dtn(&asm)?;
    let spec = dtn.spectrum()?;
    for (k, z) in spec.eigenvalues.iter().take(9).enumerate() {
        println!("λ_{k} = {:+.6}   (exact {})", z.re, -(((k + 1) / 2) as f64));
    }
    let (top, norm) = dtn.dissipativity()?;
    println!("max eig sym(M N) / ‖M N‖ = {:.2e}", top / norm);
    println!("max |Im λ| / ρ = {:.2e}", spec.max_imag_ratio);
    Ok(())
}
