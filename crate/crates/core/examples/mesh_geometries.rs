//! Builds the three built-in geometries and prints their boundary structure.

use dtn_toolkit::{builtin_mesh, extract_boundary, BuiltinKind, Result};

fn main() -> Result<()> {
    for kind in [BuiltinKind::Disk, BuiltinKind::Annulus { inner: 0.5 }, BuiltinKind::SphericalCap { angle: 1.0 }] {
        let mesh = builtin_mesh(kind, 2)?;
        let b = extract_boundary(&mesh)?;
        println!(
            "{kind:?}: {} vertices, {} triangles, χ = {}, loops of length {:?}",
            mesh.num_vertices(),
            mesh.num_triangles(),
            mesh.euler_characteristic(),
            b.loop_lengths
        );
    }
    let doc = builtin_mesh(BuiltinKind::Disk, 0)?.to_document();
    println!("first line of the disk mesh file: {}", doc.lines().next().unwrap_or(""));
    Ok(())
}
