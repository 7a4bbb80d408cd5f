//! Checks ellipticity of a graded scalar coefficient and the determinant identity
//! of the transformed metric on the spherical cap.

use dtn_toolkit::metric::{build_transformed_metric, ellipticity_report};
use dtn_toolkit::{builtin_mesh, BuiltinKind, CoefficientSet, Result};

fn main() -> Result<()> {
    let mesh = builtin_mesh(BuiltinKind::SphericalCap { angle: 1.0 }, 2)?;
    let coeffs = CoefficientSet::laplace().with_a("1 + 0.5*x, 0, 0, 1 + 0.5*x")?;
    let report = ellipticity_report(&mesh, &coeffs)?;
    println!("min eigenvalue of a·g⁻¹: {:.4} at {:?}", report.min_eigenvalue, report.location);
    let tm = build_transformed_metric(&mesh, &coeffs)?;
    println!("max |det g − det a · det g̃| / det g: {:.2e}", tm.determinant_identity_residual());

    let bad = CoefficientSet::laplace().with_a("x, 0, 0, 1")?;
    println!("a = diag(x, 1) elliptic: {}", ellipticity_report(&mesh, &bad)?.elliptic);
    Ok(())
}
