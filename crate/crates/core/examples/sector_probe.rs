//! Resolvent bounds |λ|·‖R(λ, N)‖ along rays of the sector, writing an SVG
//! with one curve per angle.

use dtn_toolkit::dtn::assemble_dtn;
use dtn_toolkit::spectral::{NormKind, DEFAULT_ANGLES};
use dtn_toolkit::suite::sector_plot;
use dtn_toolkit::{assemble, builtin_mesh, BuiltinKind, CoefficientSet, Result};

fn main() -> Result<()> {
    let asm = assemble(&builtin_mesh(BuiltinKind::Disk, 2)?, &CoefficientSet::laplace())?;
    let dtn = assemble_dtn(&asm)?;
    for kind in [NormKind::L2, NormKind::Sup] {
        let rep = dtn.sector_probe(&DEFAULT_ANGLES, None, kind)?;
        for a in &rep.per_angle {
            let exact = 1.0 / a.theta_deg.to_radians().sin().min(1.0);
            println!("{kind:?} θ = {:>3}°: sup = {:.5} (1/sin θ = {exact:.5})", a.theta_deg, a.sup.unwrap_or(f64::NAN));
        }
        if kind == NormKind::L2 {
            let path = std::env::temp_dir().join("sector_l2.svg");
            std::fs::write(&path, sector_plot(&rep)?)?;
            println!("plot written to {}", path.display());
        }
    }
    Ok(())
}
