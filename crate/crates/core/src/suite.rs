//! Experiment suites: run the configured experiments, collect pass/fail
//! entries and write every artifact.

use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;

use crate::acceptance::{self, Check, Relation};
use crate::config::{Experiment, ExperimentConfig};
use crate::dense::sup_norm;
use crate::dtn::{assemble_dtn, boundary_sqrt_operator, perturbation_report, verify_resolvent_identity_with};
use crate::elliptic::{robin_max_principle, DirichletSolver, RobinSolver};
use crate::error::Result;
use crate::fem::{assemble, Assembly};
use crate::plot::{render_svg, PlotKind, Series};
use crate::rng::XorShift64Star;
use crate::spectral::{NormKind, SectorReport, SpectrumReport, DEFAULT_ANGLES};
use crate::wentzell::assemble_wentzell;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntryStatus {
    Pass,
    Fail,
    Reported,
    Error,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportEntry {
    pub experiment: String,
    pub name: String,
    pub status: EntryStatus,
    pub measured: Option<f64>,
    pub tolerance: Option<f64>,
    pub detail: Option<String>,
}

impl ReportEntry {
    fn from_check(experiment: &str, c: &Check) -> Self {
        let status = match c.passed {
            Some(true) => EntryStatus::Pass,
            Some(false) => EntryStatus::Fail,
            None => EntryStatus::Reported,
        };
        ReportEntry {
            experiment: experiment.into(),
            name: c.name.clone(),
            status,
            measured: Some(c.measured),
            tolerance: c.tolerance,
            detail: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunProvenance {
    pub config_hash: String,
    pub mesh_hash: Option<String>,
    pub coefficient_hash: Option<String>,
    pub code_version: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub entries: Vec<ReportEntry>,
    pub provenance: RunProvenance,
    /// Wall time per experiment; written to the metadata file only.
    #[serde(skip)]
    pub wall_times: Vec<(String, f64)>,
    #[serde(skip)]
    pub files: Vec<PathBuf>,
}

impl RunReport {
    pub fn failed(&self) -> bool {
        self.entries.iter().any(|e| matches!(e.status, EntryStatus::Fail | EntryStatus::Error))
    }

    /// Process exit status: nonzero iff an entry failed.
    pub fn exit_code(&self) -> i32 {
        i32::from(self.failed())
    }

    pub fn entries_for<'a>(&'a self, experiment: &'a str) -> impl Iterator<Item = &'a ReportEntry> + 'a {
        self.entries.iter().filter(move |e| e.experiment == experiment)
    }
}

/// Output of one experiment before it is written.
#[derive(Clone, Debug, Default)]
pub struct ExperimentOutput {
    pub checks: Vec<Check>,
    pub entries: Vec<ReportEntry>,
    pub files: Vec<(String, String)>,
}

pub fn spectrum_csv(spec: &SpectrumReport) -> String {
    let mut out = String::from("index,re_lambda,im_lambda\n");
    for (i, z) in spec.eigenvalues.iter().enumerate() {
        out.push_str(&format!("{i},{:.17e},{:.17e}\n", z.re, z.im));
    }
    out
}

pub fn spectrum_plot(spec: &SpectrumReport, label: &str) -> Result<String> {
    render_svg(&[Series::new(label, spec.eigenvalues.iter().map(|z| [z.re, z.im]).collect())], PlotKind::SpectrumScatter)
}

pub fn sector_plot(report: &SectorReport) -> Result<String> {
    let mut series = Vec::new();
    for a in &report.per_angle {
        let theta = a.theta_deg.to_radians();
        let pts: Vec<[f64; 2]> = report.grid.iter().filter(|p| (p.theta - theta).abs() < 1e-12).map(|p| [p.r, p.bound]).collect();
        if !pts.is_empty() {
            series.push(Series::new(format!("{}°", a.theta_deg), pts));
        }
    }
    render_svg(&series, PlotKind::SectorCurves)
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

pub fn dtn_spectrum_experiment(asm: &Assembly) -> Result<ExperimentOutput> {
    let dtn = assemble_dtn(asm)?;
    let spec = dtn.spectrum()?;
    let mut checks = vec![Check::reported("dimension", dtn.dim() as f64), Check::reported("spectral-radius", spec.spectral_radius)];
    if dtn.symmetric {
        checks.push(Check::at_most("max-imag-ratio", spec.max_imag_ratio, 1e-8));
    } else {
        checks.push(Check::reported("max-imag-ratio", spec.max_imag_ratio));
    }
    if asm.d_bnd.iter().all(|&d| d == 0.0) {
        let ones = dtn.apply(&vec![1.0; dtn.dim()]);
        let scale = sup_norm(&dtn.n);
        checks.push(Check::at_most("constants-in-kernel-relative", ones.iter().fold(0.0f64, |m, v| m.max(v.abs())) / scale, 1e-10));
    }
    if asm.pure_principal && asm.d_bnd.iter().all(|&d| d == 0.0) {
        let (top, norm) = dtn.dissipativity()?;
        checks.push(Check::at_most("dissipativity", top / norm, 1e-10));
    }
    let leading: Vec<Check> = spec.eigenvalues.iter().take(8).enumerate().map(|(i, z)| Check::reported(&format!("eigenvalue-{i}"), z.re)).collect();
    checks.extend(leading);
    Ok(ExperimentOutput {
        checks,
        entries: Vec::new(),
        files: vec![("dtn_spectrum.csv".into(), spectrum_csv(spec)), ("dtn_spectrum.svg".into(), spectrum_plot(spec, "σ(N)")?)],
    })
}

pub fn sector_experiment(asm: &Assembly, angles: &[f64]) -> Result<ExperimentOutput> {
    let dtn = assemble_dtn(asm)?;
    let l2 = dtn.sector_probe(angles, None, NormKind::L2)?;
    let sup = dtn.sector_probe(angles, None, NormKind::Sup)?;
    let mut checks = Vec::new();
    for (rep, label) in [(&l2, "l2"), (&sup, "sup")] {
        for a in &rep.per_angle {
            checks.push(Check::reported(&format!("{label}-{}deg", a.theta_deg), a.sup.unwrap_or(f64::NAN)));
        }
    }
    Ok(ExperimentOutput {
        checks,
        entries: Vec::new(),
        files: vec![
            ("sector_l2.json".into(), json(&l2)?),
            ("sector_sup.json".into(), json(&sup)?),
            ("sector_l2.svg".into(), sector_plot(&l2)?),
        ],
    })
}

pub fn compare_sqrt_experiment(asm: &Assembly) -> Result<ExperimentOutput> {
    let dtn = assemble_dtn(asm)?;
    let w = boundary_sqrt_operator(asm)?;
    let rep = perturbation_report(&dtn, &w, 8.0)?;
    Ok(ExperimentOutput {
        checks: vec![
            Check::reported("sup-norm", rep.sup_norm),
            Check::reported("l2-norm", rep.l2_norm),
            Check::reported("low-mode-l2-norm", rep.low_mode_l2_norm),
        ],
        entries: Vec::new(),
        files: vec![("perturbation.json".into(), json(&rep)?)],
    })
}

pub fn robin_sweep_experiment(asm: &Assembly, seed: u64, tolerance: f64) -> Result<ExperimentOutput> {
    let dtn = assemble_dtn(asm)?;
    let spec = dtn.spectrum()?;
    let solver = DirichletSolver::new(asm)?;
    let mut rng = XorShift64Star::new(seed);
    let mut csv = String::from("re_lambda,im_lambda,identity_residual,max_principle_ratio\n");
    let (mut worst_identity, mut worst_ratio, mut skipped) = (0.0f64, 0.0f64, 0usize);
    for k in 0..10 {
        let x = 10f64.powf(-1.0 + 2.0 * k as f64 / 9.0);
        for im in [0.0, 2.0 * x] {
            let lambda = Complex64::new(x, im);
            let phi: Vec<Complex64> = rng.unit_sup_vector(asm.num_boundary()).into_iter().map(|v| Complex64::new(v, 0.0)).collect();
            // With d > 0 the spectrum can reach into the right half plane.
            if spec.distance(lambda) <= 1e-6 * spec.spectral_radius.max(1.0) {
                skipped += 1;
                continue;
            }
            let identity = verify_resolvent_identity_with(asm, &dtn, &solver, lambda, &phi)?;
            let ratio = robin_max_principle(&RobinSolver::new(asm, lambda, Some(&spec.eigenvalues))?.solve(asm, &phi)?);
            worst_identity = worst_identity.max(identity);
            worst_ratio = worst_ratio.max(ratio);
            csv.push_str(&format!("{:.17e},{:.17e},{:.17e},{:.17e}\n", lambda.re, lambda.im, identity, ratio));
        }
    }
    Ok(ExperimentOutput {
        checks: vec![
            Check::at_most("resolvent-identity-residual", worst_identity, tolerance),
            Check::reported("robin-max-principle-ratio", worst_ratio),
            Check::reported("skipped-near-spectrum", skipped as f64),
        ],
        entries: Vec::new(),
        files: vec![("robin_sweep.csv".into(), csv)],
    })
}

pub fn wentzell_evolve_experiment(asm: &Assembly, times: &[f64]) -> Result<ExperimentOutput> {
    let g = assemble_wentzell(asm)?;
    let sg = g.semigroup()?;
    let u0: Vec<f64> = asm.mesh.vertices().iter().map(|p| p[0]).collect();
    let traj = g.evolve_with(&sg, &u0, times)?;
    let mut checks = vec![Check::at_most("semigroup-defect", sg.semigroup_defect(0.5, 0.5)?, 1e-9)];
    if let Some(ok) = traj.contraction {
        checks.push(Check::at_least("sup-norm-nonincreasing", if ok { 1.0 } else { 0.0 }, 1.0));
    }
    for (t, n) in traj.times.iter().zip(&traj.sup_norms) {
        checks.push(Check::reported(&format!("sup-norm-t{t}"), *n));
    }
    let trace: Vec<[f64; 2]> = traj.times.iter().zip(&traj.sup_norms).map(|(&t, &n)| [t, n]).collect();
    Ok(ExperimentOutput {
        checks,
        entries: Vec::new(),
        files: vec![
            ("wentzell_trajectory.csv".into(), traj.to_csv()),
            ("wentzell_decay.svg".into(), render_svg(&[Series::new("‖u(t)‖_sup", trace)], PlotKind::DecayTraces)?),
        ],
    })
}

pub fn full_acceptance_experiment(seed: u64) -> Result<ExperimentOutput> {
    let results = acceptance::run_all(seed)?;
    let entries = results
        .iter()
        .map(|r| {
            let head = r.checks.iter().find(|c| c.relation != Relation::Reported).or(r.checks.first());
            ReportEntry {
                experiment: Experiment::FullAcceptance.name().into(),
                name: format!("criterion-{}-{}", r.id, r.name),
                status: if r.passed { EntryStatus::Pass } else { EntryStatus::Fail },
                measured: head.map(|c| c.measured),
                tolerance: head.and_then(|c| c.tolerance),
                detail: Some(r.line()),
            }
        })
        .collect();
    Ok(ExperimentOutput { checks: Vec::new(), entries, files: acceptance::render(&results)? })
}

fn run_experiment(cfg: &ExperimentConfig, exp: Experiment, asm: &mut Option<Assembly>) -> Result<ExperimentOutput> {
    if exp == Experiment::FullAcceptance {
        return full_acceptance_experiment(cfg.seed);
    }
    if asm.is_none() {
        *asm = Some(assemble(&cfg.mesh()?, &cfg.coefficients.build()?)?);
    }
    let asm = asm.as_ref().expect("assembled");
    match exp {
        Experiment::DtnSpectrum => dtn_spectrum_experiment(asm),
        Experiment::Sector => sector_experiment(asm, &DEFAULT_ANGLES),
        Experiment::CompareSqrt => compare_sqrt_experiment(asm),
        Experiment::RobinSweep => robin_sweep_experiment(asm, cfg.seed, cfg.tolerance("resolvent-identity-residual", 1e-9)),
        Experiment::WentzellEvolve => wentzell_evolve_experiment(asm, &[0.0, 0.1, 0.5, 1.0]),
        Experiment::FullAcceptance => unreachable!(),
    }
}

/// Runs the experiments in order and writes `report.json`, the artifacts
/// and `metadata.json` (wall times) into `out_dir`.
pub fn run_suite(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunReport> {
    std::fs::create_dir_all(out_dir)?;
    let mut assembly = None;
    let mut entries = Vec::new();
    let mut wall_times = Vec::new();
    let mut files = Vec::new();
    for &exp in &cfg.experiments.list {
        let start = Instant::now();
        match run_experiment(cfg, exp, &mut assembly) {
            Ok(out) => {
                for c in &out.checks {
                    let c = match (c.relation, cfg.tolerances.get(&c.name)) {
                        (Relation::AtMost, Some(&t)) => Check::at_most(&c.name, c.measured, t),
                        (Relation::AtLeast, Some(&t)) => Check::at_least(&c.name, c.measured, t),
                        _ => c.clone(),
                    };
                    entries.push(ReportEntry::from_check(exp.name(), &c));
                }
                entries.extend(out.entries);
                for (name, contents) in out.files {
                    let path = out_dir.join(format!("{}__{}", exp.name(), name));
                    std::fs::write(&path, contents)?;
                    files.push(path);
                }
            }
            Err(e) => entries.push(ReportEntry {
                experiment: exp.name().into(),
                name: "error".into(),
                status: EntryStatus::Error,
                measured: None,
                tolerance: None,
                detail: Some(e.to_string()),
            }),
        }
        wall_times.push((exp.name().to_string(), start.elapsed().as_secs_f64()));
    }
    let provenance = RunProvenance {
        config_hash: cfg.content_hash(),
        mesh_hash: assembly.as_ref().map(|a| a.mesh_hash.clone()),
        coefficient_hash: assembly.as_ref().map(|a| a.coefficient_hash.clone()),
        code_version: crate::VERSION.to_string(),
    };
    let report = RunReport { entries, provenance, wall_times, files };
    let report_path = out_dir.join("report.json");
    std::fs::write(&report_path, json(&report)?)?;
    let metadata = serde_json::json!({
        "wall_times_seconds": report.wall_times.iter().map(|(k, v)| serde_json::json!({"experiment": k, "seconds": v})).collect::<Vec<_>>(),
        "finished_unix_seconds": std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
    });
    std::fs::write(out_dir.join("metadata.json"), json(&metadata)?)?;
    let mut report = report;
    report.files.push(report_path);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(text: &str) -> ExperimentConfig {
        ExperimentConfig::parse(text).unwrap()
    }

    #[test]
    fn empty_suite() {
        let dir = tempfile::tempdir().unwrap();
        let rep = run_suite(&config(""), dir.path()).unwrap();
        assert!(rep.entries.is_empty());
        assert_eq!(rep.exit_code(), 0);
        assert!(dir.path().join("report.json").exists());
    }

    #[test]
    fn small_suite_is_deterministic() {
        let text = "seed = 3\n[geometry]\nkind = \"disk\"\nrefinement = 1\n[experiments]\nlist = [\"dtn-spectrum\", \"sector\", \"compare-sqrt\", \"robin-sweep\", \"wentzell-evolve\"]\n";
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let ra = run_suite(&config(text), a.path()).unwrap();
        run_suite(&config(text), b.path()).unwrap();
        assert_eq!(ra.exit_code(), 0, "{:#?}", ra.entries);
        let mut names: Vec<_> = std::fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        for n in names {
            let s = n.to_string_lossy();
            if s.ends_with(".csv") || s.ends_with(".json") && s != "metadata.json" {
                assert_eq!(std::fs::read(a.path().join(&n)).unwrap(), std::fs::read(b.path().join(&n)).unwrap(), "{s}");
            }
        }
    }

    #[test]
    fn errors_are_recorded_without_aborting() {
        let text = "[geometry]\nkind = \"file\"\npath = \"/nonexistent/mesh.m2\"\n[experiments]\nlist = [\"dtn-spectrum\", \"sector\"]\n";
        let dir = tempfile::tempdir().unwrap();
        let rep = run_suite(&config(text), dir.path()).unwrap();
        assert_eq!(rep.entries.len(), 2);
        assert!(rep.entries.iter().all(|e| e.status == EntryStatus::Error));
        assert_eq!(rep.exit_code(), 1);
    }
}
