//! Command-line front end. The binary only forwards to [`main`].

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use crate::coefficients::parse_complex;
use crate::config::{ExperimentConfig, GeometrySpec};
use crate::dtn::{assemble_dtn, Provenance};
use crate::elliptic::{dirichlet_extend, robin_solve};
use crate::error::Result;
use crate::fem::{assemble, to_coo, Assembly};
use crate::field::{parse_field, EvalContext};
use crate::mesh::{extract_boundary, BuiltinKind, Mesh};
use crate::metric::{build_transformed_metric, ellipticity_report};
use crate::spectral::{NormKind, DEFAULT_ANGLES};
use crate::suite::{self, run_suite};
use crate::wentzell::assemble_wentzell;

#[derive(Parser, Debug)]
#[command(name = "dtn-toolkit", version = crate::VERSION_STRING, about = "Dirichlet-to-Neumann, Robin and Wentzell operators on triangulated surfaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate or inspect meshes.
    #[command(subcommand)]
    Mesh(MeshCmd),
    /// Coefficient transform diagnostics.
    #[command(subcommand)]
    Transform(TransformCmd),
    /// Export assembled matrices.
    #[command(subcommand)]
    Assemble(AssembleCmd),
    /// Dirichlet and Robin solves.
    #[command(subcommand)]
    Solve(SolveCmd),
    /// Dirichlet-to-Neumann operator diagnostics.
    #[command(subcommand)]
    Dtn(DtnCmd),
    /// Wentzell generator diagnostics.
    #[command(subcommand)]
    Wentzell(WentzellCmd),
    /// Run the experiments listed in a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum KindArg {
    Disk,
    Annulus,
    Cap,
}

#[derive(Subcommand, Debug)]
pub enum MeshCmd {
    Make {
        #[arg(long, value_enum, default_value = "disk")]
        kind: KindArg,
        #[arg(long, default_value_t = 2)]
        refine: u32,
        /// Annulus inner radius.
        #[arg(long, default_value_t = 0.5)]
        inner: f64,
        /// Cap opening angle (radians).
        #[arg(long, default_value_t = 1.0)]
        angle: f64,
        #[arg(long)]
        out: PathBuf,
    },
    Info { file: PathBuf },
}

/// Mesh and coefficient selection shared by most commands.
#[derive(Args, Debug, Clone)]
pub struct Problem {
    /// Mesh file; defaults to the geometry in `--config`.
    #[arg(long)]
    pub mesh: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the principal coefficient, e.g. "1+0.5*x, 0, 0, 1".
    #[arg(long)]
    pub coef_a: Option<String>,
}

impl Problem {
    fn load(&self) -> Result<(Mesh, ExperimentConfig)> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(a) = &self.coef_a {
            cfg.coefficients.a = a.clone();
            cfg.validate()?;
        }
        let mesh = match &self.mesh {
            Some(p) => Mesh::load(p)?,
            None => cfg.mesh()?,
        };
        Ok((mesh, cfg))
    }

    fn assembly(&self) -> Result<Assembly> {
        let (mesh, cfg) = self.load()?;
        assemble(&mesh, &cfg.coefficients.build()?)
    }
}

#[derive(Subcommand, Debug)]
pub enum TransformCmd {
    /// Ellipticity and determinant-identity report as JSON.
    Check {
        #[command(flatten)]
        problem: Problem,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum AssembleCmd {
    /// Write one matrix as `row col value` triplets.
    Dump {
        #[command(flatten)]
        problem: Problem,
        /// K, K1, K0, M_vol, S, M_bnd, K_bnd, D_bnd, Beta_bnd or trace.
        #[arg(long, default_value = "K")]
        matrix: String,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
pub enum SolveCmd {
    Dirichlet {
        #[command(flatten)]
        problem: Problem,
        #[arg(long, default_value = "cos(theta)", allow_hyphen_values = true)]
        boundary_data: String,
        #[arg(long)]
        out: PathBuf,
    },
    Robin {
        #[command(flatten)]
        problem: Problem,
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        lambda: String,
        #[arg(long, default_value = "cos(theta)", allow_hyphen_values = true)]
        boundary_data: String,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum NormArg {
    L2,
    Sup,
}

#[derive(Subcommand, Debug)]
pub enum DtnCmd {
    /// Eigenvalues as `index,re_lambda,im_lambda`.
    Spectrum {
        #[command(flatten)]
        problem: Problem,
        #[arg(long)]
        out: PathBuf,
        /// Also write a scatter plot.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Resolvent bounds along rays.
    Sector {
        #[command(flatten)]
        problem: Problem,
        #[arg(long, value_delimiter = ',')]
        angles: Option<Vec<f64>>,
        #[arg(long, value_enum, default_value = "l2")]
        norm: NormArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare with the boundary square root operator.
    CompareSqrt {
        #[command(flatten)]
        problem: Problem,
        #[arg(long, default_value_t = 8.0)]
        low_mode_cutoff: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
pub enum WentzellCmd {
    Spectrum {
        #[command(flatten)]
        problem: Problem,
        #[arg(long)]
        out: PathBuf,
    },
    Evolve {
        #[command(flatten)]
        problem: Problem,
        #[arg(long, default_value = "x", allow_hyphen_values = true)]
        initial: String,
        #[arg(long, value_delimiter = ',', default_value = "0,0.1,0.5,1")]
        times: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solves `(G − λ)u = h`.
    Solve {
        #[command(flatten)]
        problem: Problem,
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        lambda: String,
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        rhs: String,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Serialize)]
struct WithProvenance<'a, T: Serialize> {
    provenance: Provenance,
    code_version: &'static str,
    report: &'a T,
}

fn write_json<T: Serialize>(asm: &Assembly, report: &T, out: &Path) -> Result<()> {
    let doc = WithProvenance {
        provenance: Provenance { mesh_hash: asm.mesh_hash.clone(), coefficient_hash: asm.coefficient_hash.clone() },
        code_version: crate::VERSION,
        report,
    };
    std::fs::write(out, serde_json::to_string_pretty(&doc)? + "\n")?;
    Ok(())
}

fn solution_csv(asm: &Assembly, u: &[Complex64]) -> String {
    let mut out = String::from("vertex,x,y,re_u,im_u\n");
    for (v, (p, z)) in asm.mesh.vertices().iter().zip(u).enumerate() {
        out.push_str(&format!("{v},{:.17e},{:.17e},{:.17e},{:.17e}\n", p[0], p[1], z.re, z.im));
    }
    out
}

fn boundary_data(asm: &Assembly, text: &str) -> Result<Vec<f64>> {
    asm.sample_boundary(&parse_field(text)?)
}

#[derive(Serialize)]
struct MeshInfo {
    vertices: usize,
    triangles: usize,
    boundary_loops: usize,
    boundary_vertices: usize,
    loop_lengths: Vec<f64>,
    euler_characteristic: i64,
    max_edge_length: f64,
    chart: String,
    hash: String,
}

#[derive(Serialize)]
struct TransformCheck {
    ellipticity: crate::metric::EllipticityReport,
    determinant_identity_residual: f64,
}

/// Runs one parsed command; returns the process exit code.
pub fn execute(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Mesh(MeshCmd::Make { kind, refine, inner, angle, out }) => {
            let kind = match kind {
                KindArg::Disk => BuiltinKind::Disk,
                KindArg::Annulus => BuiltinKind::Annulus { inner },
                KindArg::Cap => BuiltinKind::SphericalCap { angle },
            };
            GeometrySpec::builtin(kind, refine).mesh(None)?.save(out)?;
        }
        Command::Mesh(MeshCmd::Info { file }) => {
            let mesh = Mesh::load(file)?;
            let b = extract_boundary(&mesh)?;
            let info = MeshInfo {
                vertices: mesh.num_vertices(),
                triangles: mesh.num_triangles(),
                boundary_loops: b.loops.len(),
                boundary_vertices: b.len(),
                loop_lengths: b.loop_lengths.clone(),
                euler_characteristic: mesh.euler_characteristic(),
                max_edge_length: mesh.max_edge_length(),
                chart: format!("{:?}", mesh.chart()),
                hash: mesh.content_hash(),
            };
            println!("{}", serde_json::to_string_pretty(&info)?);
        }
        Command::Transform(TransformCmd::Check { problem, out }) => {
            let (mesh, cfg) = problem.load()?;
            let coeffs = cfg.coefficients.build()?;
            let ellipticity = ellipticity_report(&mesh, &coeffs)?;
            let determinant_identity_residual = if ellipticity.elliptic {
                build_transformed_metric(&mesh, &coeffs)?.determinant_identity_residual()
            } else {
                f64::NAN
            };
            let doc = serde_json::to_string_pretty(&TransformCheck { ellipticity, determinant_identity_residual })? + "\n";
            match out {
                Some(p) => std::fs::write(p, doc)?,
                None => print!("{doc}"),
            }
        }
        Command::Assemble(AssembleCmd::Dump { problem, matrix, out }) => {
            std::fs::write(out, to_coo(&problem.assembly()?.matrix(&matrix)?))?;
        }
        Command::Solve(SolveCmd::Dirichlet { problem, boundary_data: data, out }) => {
            let asm = problem.assembly()?;
            let sol = dirichlet_extend(&asm, &boundary_data(&asm, &data)?)?;
            let u: Vec<Complex64> = sol.u.iter().map(|&x| Complex64::new(x, 0.0)).collect();
            std::fs::write(out, solution_csv(&asm, &u))?;
        }
        Command::Solve(SolveCmd::Robin { problem, lambda, boundary_data: data, out }) => {
            let asm = problem.assembly()?;
            let phi: Vec<Complex64> = boundary_data(&asm, &data)?.into_iter().map(|x| Complex64::new(x, 0.0)).collect();
            let sol = robin_solve(&asm, parse_complex(&lambda)?, &phi)?;
            std::fs::write(out, solution_csv(&asm, &sol.u))?;
        }
        Command::Dtn(DtnCmd::Spectrum { problem, out, plot }) => {
            let asm = problem.assembly()?;
            let dtn = assemble_dtn(&asm)?;
            let spec = dtn.spectrum()?;
            std::fs::write(&out, suite::spectrum_csv(spec))?;
            write_json(&asm, spec, &out.with_extension("json"))?;
            if let Some(p) = plot {
                std::fs::write(p, suite::spectrum_plot(spec, "σ(N)")?)?;
            }
        }
        Command::Dtn(DtnCmd::Sector { problem, angles, norm, out }) => {
            let asm = problem.assembly()?;
            let angles = angles.unwrap_or_else(|| DEFAULT_ANGLES.to_vec());
            let kind = match norm {
                NormArg::L2 => NormKind::L2,
                NormArg::Sup => NormKind::Sup,
            };
            let rep = assemble_dtn(&asm)?.sector_probe(&angles, None, kind)?;
            write_json(&asm, &rep, &out)?;
        }
        Command::Dtn(DtnCmd::CompareSqrt { problem, low_mode_cutoff, out }) => {
            let asm = problem.assembly()?;
            let dtn = assemble_dtn(&asm)?;
            let w = crate::dtn::boundary_sqrt_operator(&asm)?;
            write_json(&asm, &crate::dtn::perturbation_report(&dtn, &w, low_mode_cutoff)?, &out)?;
        }
        Command::Wentzell(WentzellCmd::Spectrum { problem, out }) => {
            let asm = problem.assembly()?;
            let spec = assemble_wentzell(&asm)?.spectrum()?;
            std::fs::write(&out, suite::spectrum_csv(&spec))?;
            write_json(&asm, &spec, &out.with_extension("json"))?;
        }
        Command::Wentzell(WentzellCmd::Evolve { problem, initial, times, out }) => {
            let asm = problem.assembly()?;
            let expr = parse_field(&initial)?;
            let u0 = asm.sample_vertices(&expr)?;
            let traj = assemble_wentzell(&asm)?.evolve(&u0, &times)?;
            std::fs::write(out, traj.to_csv())?;
        }
        Command::Wentzell(WentzellCmd::Solve { problem, lambda, rhs, out }) => {
            let asm = problem.assembly()?;
            let expr = parse_field(&rhs)?;
            let h: Vec<f64> = asm
                .mesh
                .vertices()
                .iter()
                .map(|p| expr.eval(&EvalContext::interior(p[0], p[1])))
                .collect::<std::result::Result<_, _>>()?;
            let sol = assemble_wentzell(&asm)?.solve_elliptic(parse_complex(&lambda)?, &h, None)?;
            std::fs::write(out, solution_csv(&asm, &sol.u))?;
        }
        Command::Run { config, out_dir } => {
            let cfg = ExperimentConfig::load(&config)?;
            let dir = out_dir.unwrap_or_else(|| cfg.output_dir());
            let report = run_suite(&cfg, &dir)?;
            for e in &report.entries {
                let line = e.detail.clone().unwrap_or_else(|| {
                    format!(
                        "{:?} {} measured={} tolerance={}",
                        e.status,
                        e.name,
                        e.measured.map_or("-".into(), |v| format!("{v:.6e}")),
                        e.tolerance.map_or("-".into(), |v| format!("{v:.1e}"))
                    )
                });
                println!("[{}] {line}", e.experiment);
            }
            return Ok(report.exit_code());
        }
    }
    Ok(0)
}

/// Re-executes the process with a known-good OpenBLAS core type when the
/// LAPACK self check fails and the user has not chosen one.
fn ensure_working_blas() -> Option<i32> {
    if crate::dense::blas_self_check() || std::env::var_os("OPENBLAS_CORETYPE").is_some() {
        return None;
    }
    let exe = std::env::current_exe().ok()?;
    let status = std::process::Command::new(exe)
        .args(std::env::args_os().skip(1))
        .env("OPENBLAS_CORETYPE", "SkylakeX")
        .status()
        .ok()?;
    Some(status.code().unwrap_or(1))
}

pub fn main() -> i32 {
    let cli = Cli::parse();
    if let Some(code) = ensure_working_blas() {
        return code;
    }
    if !crate::dense::blas_self_check() {
        eprintln!("warning: LAPACK self check failed; results may be wrong (try OPENBLAS_CORETYPE)");
    }
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
