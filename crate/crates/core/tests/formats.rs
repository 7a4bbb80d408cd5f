use dtn_toolkit::config::ExperimentConfig;
use dtn_toolkit::fem::{from_coo, to_coo};
use dtn_toolkit::plot::{render_svg, PlotKind, Series};
use dtn_toolkit::suite::{run_suite, spectrum_csv, EntryStatus};
use dtn_toolkit::{assemble, builtin_mesh, BuiltinKind, CoefficientSet, Mesh};

#[test]
fn mesh_document_roundtrip_is_exact() {
    for kind in [BuiltinKind::Disk, BuiltinKind::Annulus { inner: 0.3 }, BuiltinKind::SphericalCap { angle: 0.8 }] {
        let mesh = builtin_mesh(kind, 1).unwrap();
        let doc = mesh.to_document();
        let back = Mesh::from_document(&doc).unwrap();
        assert_eq!(back.to_document(), doc);
        assert_eq!(back.content_hash(), mesh.content_hash());
    }
}

#[test]
fn coo_roundtrip() {
    let asm = assemble(&builtin_mesh(BuiltinKind::Disk, 1).unwrap(), &CoefficientSet::laplace()).unwrap();
    let k = asm.matrix("S").unwrap();
    let back = from_coo(&to_coo(&k), k.nrows, k.ncols).unwrap();
    assert_eq!(back.to_dense(), k.to_dense());
}

#[test]
fn disk_spectrum_plots_on_the_real_axis() {
    let asm = assemble(&builtin_mesh(BuiltinKind::Disk, 1).unwrap(), &CoefficientSet::laplace()).unwrap();
    let dtn = dtn_toolkit::dtn::assemble_dtn(&asm).unwrap();
    let spec = dtn.spectrum().unwrap();
    assert!(spectrum_csv(spec).lines().skip(1).all(|l| l.ends_with(",0.00000000000000000e0")));
    let pts: Vec<[f64; 2]> = spec.eigenvalues.iter().map(|z| [z.re, z.im]).collect();
    let svg = render_svg(&[Series::new("σ(N)", pts.clone())], PlotKind::SpectrumScatter).unwrap();
    assert_eq!(svg.matches("<circle").count(), pts.len());
    let cy: std::collections::BTreeSet<&str> = svg.lines().filter(|l| l.starts_with("<circle")).map(|l| l.split("cy=\"").nth(1).unwrap().split('"').next().unwrap()).collect();
    assert_eq!(cy.len(), 1, "all markers share one height");
}

#[test]
fn suite_outputs_are_reproducible() {
    let text = "seed = 99\n[geometry]\nkind = \"cap\"\nrefinement = 0\n[coefficients]\nd = \"0.1\"\n[experiments]\nlist = [\"dtn-spectrum\", \"sector\", \"wentzell-evolve\", \"robin-sweep\"]\n";
    let cfg = ExperimentConfig::parse(text).unwrap();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ra = run_suite(&cfg, a.path()).unwrap();
    run_suite(&cfg, b.path()).unwrap();
    assert!(ra.entries.iter().all(|e| e.status != EntryStatus::Error), "{:#?}", ra.entries);
    for path in &ra.files {
        let name = path.file_name().unwrap();
        if name != "metadata.json" {
            assert_eq!(std::fs::read(path).unwrap(), std::fs::read(b.path().join(name)).unwrap(), "{name:?}");
        }
    }
    assert!(ra.entries.iter().all(|e| e.measured.is_some()));
}
