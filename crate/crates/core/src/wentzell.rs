//! Generator of the heat flow with dynamic (Wentzell) boundary conditions.
//!
//! With `D = blockdiag(M_II, diag(m/β))` and `S_w = S − diag_Γ(m d/β)`,
//! `G = −D⁻¹ S_w`. Interior rows are the mass-inverted interior operator;
//! boundary rows are `β t + d u` with `t` the variational conormal flux.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use serde::Serialize;

use crate::coefficients::format_complex;
use crate::dense::{sup_norm, to_complex};
use crate::elliptic::DirichletSolver;
use crate::error::{Error, Result};
use crate::fem::{Assembly, Dof};
use crate::sparse::{inverse_norm1_estimate, norm1, CsrMatrix, SkylineLu, TripletBuilder};
use crate::spectral::{self, Semigroup, SpectrumReport};

#[derive(Clone, Debug)]
pub struct WentzellGenerator {
    pub dofs: Vec<Dof>,
    pub interior: Vec<usize>,
    pub trace_map: Vec<usize>,
    pub s_w: CsrMatrix<f64>,
    pub mass: CsrMatrix<f64>,
    /// `S_w` symmetric, so `G` is self-adjoint in the `D` inner product.
    pub symmetric: bool,
    /// `c ≤ 0` and `d ≤ 0`, under which the flow contracts the sup norm.
    pub dissipative_data: bool,
    mass_lu: SkylineLu<f64>,
}

pub fn assemble_wentzell(asm: &Assembly) -> Result<WentzellGenerator> {
    let n = asm.num_dofs();
    let trace = asm.trace_map();
    let shift: Vec<f64> = (0..asm.num_boundary()).map(|k| -asm.m_bnd[k] * asm.d_bnd[k] / asm.beta_bnd[k]).collect();
    let s_w = asm.system.add_diagonal_at(trace, &shift);
    let mut b = TripletBuilder::new(n, n);
    for &v in &asm.interior {
        for (j, val) in asm.m_vol.row(v) {
            if matches!(asm.dofs[j], Dof::Interior(_)) {
                b.push(v, j, val);
            }
        }
    }
    for (k, &v) in trace.iter().enumerate() {
        b.push(v, v, asm.m_bnd[k] / asm.beta_bnd[k]);
    }
    let mass = b.build();
    let mass_lu = SkylineLu::factorize(&mass)?;
    let scale = s_w.max_abs().max(f64::MIN_POSITIVE);
    Ok(WentzellGenerator {
        dofs: asm.dofs.clone(),
        interior: asm.interior.clone(),
        trace_map: trace.to_vec(),
        symmetric: s_w.asymmetry() <= 1e-12 * scale,
        dissipative_data: asm.c_max <= 0.0 && asm.d_bnd.iter().all(|&d| d <= 0.0),
        s_w,
        mass,
        mass_lu,
    })
}

impl WentzellGenerator {
    pub fn dim(&self) -> usize {
        self.dofs.len()
    }

    /// `G u`.
    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: u.len() });
        }
        let r: Vec<f64> = self.s_w.matvec(u).into_iter().map(|v| -v).collect();
        Ok(self.mass_lu.solve(&r))
    }

    /// Boundary rows of `G u`, in boundary dof order.
    pub fn boundary_rows(&self, u: &[f64]) -> Result<Vec<f64>> {
        let gu = self.apply(u)?;
        Ok(self.trace_map.iter().map(|&v| gu[v]).collect())
    }

    /// Dense `G`.
    pub fn dense(&self) -> Array2<f64> {
        let s = self.s_w.to_dense().mapv(|v| -v);
        self.mass_lu.solve_columns(&s)
    }

    /// `(−S_w, D)` densified, with `−S_w` symmetrized.
    pub fn pencil(&self) -> (Array2<f64>, Array2<f64>) {
        let a = self.s_w.to_dense();
        let a = (&a + &a.t()) * -0.5;
        (a, self.mass.to_dense())
    }

    /// Dense nonsymmetric eigensolve of `G`.
    pub fn spectrum(&self) -> Result<SpectrumReport> {
        spectral::spectrum(&self.dense())
    }

    /// Eigenvalues through the symmetric pencil (requires `b = 0`).
    pub fn pencil_spectrum(&self) -> Result<SpectrumReport> {
        self.require_symmetric()?;
        let (a, m) = self.pencil();
        spectral::pencil_spectrum(&a, &m)
    }

    fn require_symmetric(&self) -> Result<()> {
        if self.symmetric {
            Ok(())
        } else {
            Err(Error::InvalidParameter("Wentzell generator has a first-order term; no symmetric pencil".into()))
        }
    }

    pub fn semigroup(&self) -> Result<Semigroup> {
        if self.symmetric {
            let a = self.s_w.to_dense();
            let a = (&a + &a.t()) * -0.5;
            Semigroup::from_pencil(self.dense(), &a, &self.mass, self.mass_condition())
        } else {
            Ok(Semigroup::pade(self.dense()))
        }
    }

    /// Estimate of `κ₁(D)`, an upper bound for `κ₂(D)` up to estimator
    /// accuracy.
    pub fn mass_condition(&self) -> f64 {
        norm1(&self.mass) * inverse_norm1_estimate(&self.mass_lu)
    }

    /// `u(t) = e^{tG} u₀` at ascending nonnegative times.
    pub fn evolve(&self, u0: &[f64], times: &[f64]) -> Result<Trajectory> {
        self.evolve_with(&self.semigroup()?, u0, times)
    }

    pub fn evolve_with(&self, sg: &Semigroup, u0: &[f64], times: &[f64]) -> Result<Trajectory> {
        if u0.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: u0.len() });
        }
        if times.iter().any(|&t| !(t >= 0.0)) || times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidParameter("times must be nonnegative and ascending".into()));
        }
        let mut states = Vec::with_capacity(times.len());
        for &t in times {
            states.push(sg.apply(t, u0)?);
        }
        let sup_norms: Vec<f64> = states.iter().map(|u| u.iter().fold(0.0, |m: f64, v| m.max(v.abs()))).collect();
        let contraction = if self.dissipative_data {
            Some(sup_norms.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-8) + 1e-8))
        } else {
            None
        };
        Ok(Trajectory { times: times.to_vec(), states, sup_norms, contraction, method: sg.method })
    }

    /// Solves `(G − λ) u = h`, i.e. `(S_w + λ D) u = −D h`.
    pub fn solve_elliptic(&self, lambda: Complex64, h: &[f64], spectrum: Option<&SpectrumReport>) -> Result<EllipticWentzellSolution> {
        let n = self.dim();
        if h.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: h.len() });
        }
        if let Some(spec) = spectrum {
            let dist = spec.distance(lambda);
            if dist < 1e-8 * spec.spectral_radius.max(1.0) {
                return Err(Error::NearSpectrum { lambda: format_complex(lambda), distance: dist });
            }
        }
        let a = CsrMatrix::linear_combination(&[
            (Complex64::new(1.0, 0.0), &self.s_w.to_complex()),
            (lambda, &self.mass.to_complex()),
        ]);
        let lu = SkylineLu::factorize(&a).map_err(|e| match e {
            Error::Singular { magnitude, .. } => Error::NearSpectrum { lambda: format_complex(lambda), distance: magnitude },
            other => other,
        })?;
        let rhs: Vec<Complex64> = self.mass.matvec(h).into_iter().map(|v| Complex64::new(-v, 0.0)).collect();
        let u = lu.solve(&rhs);
        let re: Vec<f64> = u.iter().map(|z| z.re).collect();
        let im: Vec<f64> = u.iter().map(|z| z.im).collect();
        let (gr, gi) = (self.apply(&re)?, self.apply(&im)?);
        let residual = (0..n)
            .map(|i| (Complex64::new(gr[i], gi[i]) - lambda * u[i] - h[i]).norm())
            .fold(0.0, f64::max);
        let hn = h.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        let un = u.iter().fold(0.0, |m: f64, v| m.max(v.norm()));
        let ratio = if hn > 0.0 { lambda.norm() * un / hn } else { 0.0 };
        Ok(EllipticWentzellSolution { u, lambda, residual, ratio })
    }

    /// `max |(G L₀φ)_Γ − N φ|` for the given boundary data.
    pub fn dtn_consistency(&self, asm: &Assembly, solver: &DirichletSolver, n: &Array2<f64>, phi: &[f64]) -> Result<f64> {
        let u = solver.extend(asm, phi)?.u;
        let rows = self.boundary_rows(&u)?;
        let nphi = n.dot(&Array1::from(phi.to_vec()));
        Ok(rows.iter().zip(nphi.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub sup_norms: Vec<f64>,
    /// Whether `‖u(t)‖_sup` is nonincreasing; only checked for dissipative data.
    pub contraction: Option<bool>,
    pub method: spectral::SemigroupMethod,
}

impl Trajectory {
    /// `t,vertex,re_u,im_u` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,vertex,re_u,im_u\n");
        for (t, u) in self.times.iter().zip(&self.states) {
            for (v, x) in u.iter().enumerate() {
                out.push_str(&format!("{t:.17e},{v},{x:.17e},{:.17e}\n", 0.0));
            }
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct EllipticWentzellSolution {
    pub u: Vec<Complex64>,
    pub lambda: Complex64,
    /// `‖(G − λ)u − h‖_sup`.
    pub residual: f64,
    /// `|λ| ‖u‖_sup / ‖h‖_sup`.
    pub ratio: f64,
}

/// `t·‖G e^{tG}‖_sup` over the standard times.
pub fn analyticity_surrogate(sg: &Semigroup) -> Result<spectral::AnalyticityReport> {
    sg.analyticity(&spectral::ANALYTICITY_TIMES, None)
}

/// Dense `G` as complex, for resolvent probes.
pub fn dense_complex(gen: &WentzellGenerator) -> Array2<Complex64> {
    to_complex(&gen.dense())
}

/// `‖G‖_sup`.
pub fn generator_sup_norm(gen: &WentzellGenerator) -> f64 {
    sup_norm(&gen.dense())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::CoefficientSet;
    use crate::dtn::assemble_dtn;
    use crate::fem::assemble;
    use crate::mesh::{builtin_mesh, BuiltinKind, ChartTag, Mesh};
    use crate::rng::XorShift64Star;

    fn disk(refinement: u32, coeffs: &CoefficientSet) -> Assembly {
        assemble(&builtin_mesh(BuiltinKind::Disk, refinement).unwrap(), coeffs).unwrap()
    }

    fn max_abs(v: &[f64]) -> f64 {
        v.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    #[test]
    fn constants_are_stationary() {
        let asm = disk(1, &CoefficientSet::laplace());
        let g = assemble_wentzell(&asm).unwrap();
        assert!(max_abs(&g.apply(&vec![1.0; g.dim()]).unwrap()) < 1e-10);
        let traj = g.evolve(&vec![1.0; g.dim()], &[0.0, 0.5, 2.0]).unwrap();
        for u in &traj.states {
            assert!(u.iter().all(|v| (v - 1.0).abs() < 1e-10));
        }
    }

    #[test]
    fn harmonic_mode_rows() {
        let asm = disk(3, &CoefficientSet::laplace());
        let g = assemble_wentzell(&asm).unwrap();
        let k = 2.0;
        let u: Vec<f64> = asm.mesh.vertices().iter().map(|p| {
            let (r, t) = (p[0].hypot(p[1]), p[1].atan2(p[0]));
            r.powf(k) * (k * t).cos()
        }).collect();
        let gu = g.boundary_rows(&u).unwrap();
        let err = asm.boundary_points().iter().zip(&gu).map(|(p, v)| (v + k * (k * p[1].atan2(p[0])).cos()).abs()).fold(0.0, f64::max);
        assert!(err < 0.05, "{err}");
    }

    #[test]
    fn single_triangle_has_only_boundary_rows() {
        let mesh = Mesh::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]], None, ChartTag::Flat).unwrap();
        let asm = assemble(&mesh, &CoefficientSet::laplace()).unwrap();
        let g = assemble_wentzell(&asm).unwrap();
        assert_eq!(g.dim(), 3);
        assert!(g.interior.is_empty());
        assert_eq!(g.dense().dim(), (3, 3));
    }

    #[test]
    fn consistent_with_dtn() {
        let coeffs = CoefficientSet::laplace().with_a("1+0.3*x, 0, 0, 1").unwrap().with_d("-0.2").unwrap().with_beta("2").unwrap();
        let asm = disk(2, &coeffs);
        let g = assemble_wentzell(&asm).unwrap();
        let dtn = assemble_dtn(&asm).unwrap();
        let solver = DirichletSolver::new(&asm).unwrap();
        let mut rng = XorShift64Star::new(3);
        let phi = rng.unit_sup_vector(asm.num_boundary());
        let scale = sup_norm(&dtn.n);
        assert!(g.dtn_consistency(&asm, &solver, &dtn.n, &phi).unwrap() <= 1e-10 * scale);
    }

    #[test]
    fn real_spectrum_with_zero_mode() {
        let asm = disk(1, &CoefficientSet::laplace());
        let g = assemble_wentzell(&asm).unwrap();
        let s = g.spectrum().unwrap();
        assert!(s.max_imag_ratio <= 1e-6);
        assert!(s.eigenvalues[0].norm() < 1e-8 * s.spectral_radius);
        let p = g.pencil_spectrum().unwrap();
        assert!((p.eigenvalues[1].re - s.eigenvalues[1].re).abs() < 1e-8 * s.spectral_radius);
    }

    #[test]
    fn absorption_shifts_left() {
        let base = assemble_wentzell(&disk(1, &CoefficientSet::laplace())).unwrap().pencil_spectrum().unwrap();
        let shifted = assemble_wentzell(&disk(1, &CoefficientSet::laplace().with_c("-1").unwrap())).unwrap().pencil_spectrum().unwrap();
        let shift = shifted.eigenvalues[0].re - base.eigenvalues[0].re;
        assert!(shift < -0.3 && shift > -1.0 - 1e-9, "{shift}");
        let small = assemble_wentzell(&disk(1, &CoefficientSet::laplace().with_c("-0.1").unwrap())).unwrap().pencil_spectrum().unwrap();
        assert!((small.eigenvalues[0].re - base.eigenvalues[0].re).abs() <= 0.1 + 1e-9);
    }

    #[test]
    fn evolution_contracts_and_is_a_semigroup() {
        let asm = disk(1, &CoefficientSet::laplace());
        let g = assemble_wentzell(&asm).unwrap();
        let u0: Vec<f64> = asm.mesh.vertices().iter().map(|p| p[0]).collect();
        let traj = g.evolve(&u0, &[0.0, 0.1, 1.0]).unwrap();
        assert_eq!(traj.contraction, Some(true));
        let sg = g.semigroup().unwrap();
        let e1 = sg.matrix(1.0).unwrap();
        let e5 = sg.matrix(0.5).unwrap();
        assert!(sup_norm(&(e1 - e5.dot(&e5))) < 1e-9);
        assert!(traj.to_csv().starts_with("t,vertex,re_u,im_u\n"));
    }

    #[test]
    fn elliptic_wentzell_examples() {
        let asm = disk(1, &CoefficientSet::laplace());
        let g = assemble_wentzell(&asm).unwrap();
        let n = g.dim();
        let sol = g.solve_elliptic(Complex64::new(1.0, 0.0), &vec![-1.0; n], None).unwrap();
        assert!(sol.u.iter().all(|z| (z - 1.0).norm() < 1e-10));
        assert!((sol.ratio - 1.0).abs() < 1e-10);
        let mut rng = XorShift64Star::new(11);
        let h: Vec<f64> = (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let sol = g.solve_elliptic(Complex64::new(1.0, 1.0), &h, None).unwrap();
        assert!(sol.residual <= 1e-9 * max_abs(&h), "{}", sol.residual);
        let sol = g.solve_elliptic(Complex64::new(10.0, 0.0), &h, None).unwrap();
        assert!(sol.ratio <= 1.5, "{}", sol.ratio);
    }
}
