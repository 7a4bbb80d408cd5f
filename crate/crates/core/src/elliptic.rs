//! Dirichlet and Robin boundary value problems for the assembled operator.

use ndarray::Array2;
use num_complex::Complex64;
use serde::Serialize;

use crate::coefficients::format_complex;
use crate::error::{Error, Result};
use crate::fem::{Assembly, Dof};
use crate::sparse::{inverse_norm1_estimate, norm1, CsrMatrix, SkylineLu, TripletBuilder};

fn sup<T: crate::sparse::Scalar>(v: &[T]) -> f64 {
    v.iter().map(|x| x.modulus()).fold(0.0, f64::max)
}

/// Harmonic extension `L₀φ`: interior equations with Dirichlet data
/// imposed strongly.
#[derive(Clone, Debug)]
pub struct DirichletSolution {
    pub u: Vec<f64>,
    pub boundary_data: Vec<f64>,
    /// Sup norm of the interior equation residual.
    pub residual: f64,
}

/// Factorization of the interior block `S_II`, reused for every boundary
/// data vector.
#[derive(Clone, Debug)]
pub struct DirichletSolver {
    lu: SkylineLu<f64>,
    s_ib: CsrMatrix<f64>,
}

impl DirichletSolver {
    pub fn new(asm: &Assembly) -> Result<Self> {
        let [s_ii, s_ib, _, _] = asm.system_blocks();
        let lu = SkylineLu::factorize(&s_ii).map_err(|e| match e {
            Error::Singular { pivot, .. } => Error::DirichletSpectrum { pivot: asm.interior[pivot] },
            other => other,
        })?;
        Ok(DirichletSolver { lu, s_ib })
    }

    /// Interior values `−S_II⁻¹ S_IΓ φ`.
    fn interior_values(&self, phi: &[f64]) -> Vec<f64> {
        let rhs: Vec<f64> = self.s_ib.matvec(phi).into_iter().map(|v| -v).collect();
        self.lu.solve(&rhs)
    }

    pub fn extend(&self, asm: &Assembly, phi: &[f64]) -> Result<DirichletSolution> {
        let nb = asm.num_boundary();
        if phi.len() != nb {
            return Err(Error::DimensionMismatch { expected: nb, found: phi.len() });
        }
        let ui = self.interior_values(phi);
        let mut u = vec![0.0; asm.num_dofs()];
        for (k, &v) in asm.interior.iter().enumerate() {
            u[v] = ui[k];
        }
        for (k, &v) in asm.trace_map().iter().enumerate() {
            u[v] = phi[k];
        }
        let su = asm.system.matvec(&u);
        let residual = asm.interior.iter().map(|&v| su[v].abs()).fold(0.0, f64::max);
        Ok(DirichletSolution { u, boundary_data: phi.to_vec(), residual })
    }

    /// Complex data, extended by real and imaginary parts.
    pub fn extend_complex(&self, asm: &Assembly, phi: &[Complex64]) -> Result<Vec<Complex64>> {
        let re: Vec<f64> = phi.iter().map(|z| z.re).collect();
        let im: Vec<f64> = phi.iter().map(|z| z.im).collect();
        let (ur, ui) = (self.extend(asm, &re)?.u, self.extend(asm, &im)?.u);
        Ok(ur.into_iter().zip(ui).map(|(a, b)| Complex64::new(a, b)).collect())
    }

    /// Dense `n_I × n_Γ` interior block of `L₀`, one column per boundary dof.
    pub fn extension_matrix(&self) -> Array2<f64> {
        let rhs = self.s_ib.to_dense().mapv(|v| -v);
        self.lu.solve_columns(&rhs)
    }
}

/// One-shot harmonic extension.
pub fn dirichlet_extend(asm: &Assembly, phi: &[f64]) -> Result<DirichletSolution> {
    DirichletSolver::new(asm)?.extend(asm, phi)
}

/// `max_interior |u| / max |φ|`.
pub fn max_principle_check(asm: &Assembly, sol: &DirichletSolution) -> f64 {
    let inner = asm.interior.iter().map(|&v| sol.u[v].abs()).fold(0.0, f64::max);
    let outer = sup(&sol.boundary_data);
    if outer == 0.0 {
        if inner == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        inner / outer
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `Re λ > 0`, where the weak problem is coercive.
    Standard,
    /// `Re λ ≤ 0` away from the Dirichlet-to-Neumann spectrum.
    Extended,
}

#[derive(Clone, Debug)]
pub struct RobinSolution {
    pub u: Vec<Complex64>,
    pub lambda: Complex64,
    pub phi: Vec<Complex64>,
    /// `B̃u` on the boundary dofs.
    pub flux: Vec<Complex64>,
    /// `‖B̃u − λ u|_Γ − φ‖_sup`.
    pub residual: f64,
    pub regime: Regime,
}

/// Factorized Robin system for one `λ`:
/// interior rows `(S u)_I = 0`, boundary rows
/// `(S u)_Γ + (m/β)(λ − d) u_Γ = −(m/β) φ`.
#[derive(Clone, Debug)]
pub struct RobinSolver {
    pub lambda: Complex64,
    pub regime: Regime,
    lu: SkylineLu<Complex64>,
    matrix: CsrMatrix<Complex64>,
}

impl RobinSolver {
    /// `spectrum` (of the Dirichlet-to-Neumann matrix) is consulted in the
    /// extended regime; probes within `1e-8·ρ` of it are refused.
    pub fn new(asm: &Assembly, lambda: Complex64, spectrum: Option<&[Complex64]>) -> Result<Self> {
        let regime = if lambda.re > 0.0 { Regime::Standard } else { Regime::Extended };
        if let (Regime::Extended, Some(spec)) = (regime, spectrum) {
            let rho = spec.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
            let dist = spec.iter().map(|z| (z - lambda).norm()).fold(f64::INFINITY, f64::min);
            if dist < 1e-8 * rho {
                return Err(Error::NearSpectrum { lambda: format_complex(lambda), distance: dist });
            }
        }
        let n = asm.num_dofs();
        let mut b = TripletBuilder::new(n, n);
        for i in 0..n {
            for (j, v) in asm.system.row(i) {
                b.push(i, j, Complex64::new(v, 0.0));
            }
        }
        for (k, &v) in asm.trace_map().iter().enumerate() {
            let w = asm.m_bnd[k] / asm.beta_bnd[k];
            b.push(v, v, (lambda - asm.d_bnd[k]) * w);
        }
        let matrix = b.build();
        let lu = SkylineLu::factorize(&matrix).map_err(|e| match e {
            Error::Singular { magnitude, .. } => Error::NearSpectrum { lambda: format_complex(lambda), distance: magnitude },
            other => other,
        })?;
        Ok(RobinSolver { lambda, regime, lu, matrix })
    }

    pub fn solve(&self, asm: &Assembly, phi: &[Complex64]) -> Result<RobinSolution> {
        let nb = asm.num_boundary();
        if phi.len() != nb {
            return Err(Error::DimensionMismatch { expected: nb, found: phi.len() });
        }
        let mut rhs = vec![Complex64::new(0.0, 0.0); asm.num_dofs()];
        for (k, &v) in asm.trace_map().iter().enumerate() {
            rhs[v] = -phi[k] * (asm.m_bnd[k] / asm.beta_bnd[k]);
        }
        let u = self.lu.solve(&rhs);
        let flux = asm.conormal_map(&u, None)?;
        let residual = asm
            .trace_map()
            .iter()
            .enumerate()
            .map(|(k, &v)| (flux[k] - self.lambda * u[v] - phi[k]).norm())
            .fold(0.0, f64::max);
        Ok(RobinSolution { u, lambda: self.lambda, phi: phi.to_vec(), flux, residual, regime: self.regime })
    }

    /// Estimate of the 1-norm condition number of the system matrix.
    pub fn condition_estimate(&self) -> f64 {
        norm1(&self.matrix) * inverse_norm1_estimate(&self.lu)
    }

    pub fn matrix(&self) -> &CsrMatrix<Complex64> {
        &self.matrix
    }
}

/// One-shot Robin solve.
pub fn robin_solve(asm: &Assembly, lambda: Complex64, phi: &[Complex64]) -> Result<RobinSolution> {
    RobinSolver::new(asm, lambda, None)?.solve(asm, phi)
}

/// `|Re λ| · ‖u‖_sup / ‖φ‖_sup`.
pub fn robin_max_principle(sol: &RobinSolution) -> f64 {
    sol.lambda.re.abs() * sup(&sol.u) / sup(&sol.phi)
}

/// Whether a vertex is on the boundary.
pub fn is_boundary(asm: &Assembly, v: usize) -> bool {
    matches!(asm.dofs[v], Dof::Boundary(_))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::CoefficientSet;
    use crate::fem::assemble;
    use crate::mesh::{builtin_mesh, BuiltinKind};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn disk_asm(r: u32) -> Assembly {
        assemble(&builtin_mesh(BuiltinKind::Disk, r).unwrap(), &CoefficientSet::laplace()).unwrap()
    }

    #[test]
    fn constants_extend_to_constants() {
        let asm = disk_asm(1);
        let sol = dirichlet_extend(&asm, &vec![1.0; asm.num_boundary()]).unwrap();
        assert!(sol.u.iter().all(|v| (v - 1.0).abs() < 1e-12));
        assert!((max_principle_check(&asm, &sol) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn harmonic_extension_of_cos_k_theta() {
        let asm = disk_asm(2);
        let solver = DirichletSolver::new(&asm).unwrap();
        for k in 1..4 {
            let phi: Vec<f64> = asm.boundary_points().iter().map(|p| (k as f64 * p[1].atan2(p[0])).cos()).collect();
            let sol = solver.extend(&asm, &phi).unwrap();
            let err = asm
                .mesh
                .vertices()
                .iter()
                .zip(&sol.u)
                .map(|(p, u)| {
                    let (r, t) = ((p[0] * p[0] + p[1] * p[1]).sqrt(), p[1].atan2(p[0]));
                    (u - r.powi(k) * (k as f64 * t).cos()).abs()
                })
                .fold(0.0, f64::max);
            assert!(err < 0.02 * k as f64, "k = {k}: {err}");
            assert!(max_principle_check(&asm, &sol) <= 1.0 + 1e-10);
        }
    }

    #[test]
    fn dirichlet_is_linear() {
        let asm = disk_asm(1);
        let s = DirichletSolver::new(&asm).unwrap();
        let mut rng = crate::rng::XorShift64Star::new(3);
        let p1 = rng.unit_sup_vector(asm.num_boundary());
        let p2 = rng.unit_sup_vector(asm.num_boundary());
        let comb: Vec<f64> = p1.iter().zip(&p2).map(|(a, b)| 2.5 * a + b).collect();
        let (u1, u2, u) = (s.extend(&asm, &p1).unwrap().u, s.extend(&asm, &p2).unwrap().u, s.extend(&asm, &comb).unwrap().u);
        for i in 0..u.len() {
            assert!((u[i] - 2.5 * u1[i] - u2[i]).abs() <= 1e-13);
        }
    }

    #[test]
    fn annulus_random_data_obeys_max_principle() {
        let asm = assemble(&builtin_mesh(BuiltinKind::Annulus { inner: 0.5 }, 2).unwrap(), &CoefficientSet::laplace()).unwrap();
        let phi = crate::rng::XorShift64Star::new(11).unit_sup_vector(asm.num_boundary());
        let sol = dirichlet_extend(&asm, &phi).unwrap();
        assert!(max_principle_check(&asm, &sol) <= 1.0 + 1e-10);
    }

    #[test]
    fn robin_constant_balance() {
        let asm = disk_asm(1);
        for (lam, val) in [(1.0, -1.0), (2.0, -2.0)] {
            let phi = vec![c(val, 0.0); asm.num_boundary()];
            let sol = robin_solve(&asm, c(lam, 0.0), &phi).unwrap();
            assert!(sol.u.iter().all(|u| (u - c(1.0, 0.0)).norm() < 1e-12));
            assert!((robin_max_principle(&sol) - 1.0).abs() < 1e-12);
            assert_eq!(sol.regime, Regime::Standard);
        }
    }

    #[test]
    fn robin_separable_mode() {
        let asm = disk_asm(3);
        let lam = c(1.0, 0.0);
        let k = 2.0;
        let phi: Vec<Complex64> = asm.boundary_points().iter().map(|p| (-k - lam) * (k * p[1].atan2(p[0])).cos()).collect();
        let sol = robin_solve(&asm, lam, &phi).unwrap();
        let err = asm
            .mesh
            .vertices()
            .iter()
            .zip(&sol.u)
            .map(|(p, u)| {
                let (r, t) = ((p[0] * p[0] + p[1] * p[1]).sqrt(), p[1].atan2(p[0]));
                (u - r.powf(k) * (k * t).cos()).norm()
            })
            .fold(0.0, f64::max);
        assert!(err < 0.02, "{err}");
    }

    #[test]
    fn robin_residual_and_max_principle_complex_lambda() {
        let asm = disk_asm(2);
        let phi: Vec<Complex64> = crate::rng::XorShift64Star::new(5).unit_sup_vector(asm.num_boundary()).into_iter().map(|v| c(v, 0.0)).collect();
        let solver = RobinSolver::new(&asm, c(1.0, 5.0), None).unwrap();
        let sol = solver.solve(&asm, &phi).unwrap();
        assert!(sol.residual <= 1e-8);
        assert!(solver.condition_estimate().is_finite());
        let cos3: Vec<Complex64> = asm.boundary_points().iter().map(|p| c((3.0 * p[1].atan2(p[0])).cos(), 0.0)).collect();
        let sol = robin_solve(&asm, c(1.0, 10.0), &cos3).unwrap();
        assert!(robin_max_principle(&sol) <= 1.05);
    }

    #[test]
    fn robin_hermitian_part_is_positive_definite() {
        let asm = disk_asm(0);
        let solver = RobinSolver::new(&asm, c(0.5, 0.0), None).unwrap();
        let a = solver.matrix().to_dense().mapv(|z| z.re);
        let h = (&a + &a.t()) * 0.5;
        let (w, _) = crate::dense::sym_eigh(&h).unwrap();
        assert!(w[0] > 0.0);
    }

    #[test]
    fn extended_regime_near_spectrum_refused() {
        let asm = disk_asm(0);
        let spec = [c(0.0, 0.0), c(-1.0, 0.0)];
        assert!(matches!(RobinSolver::new(&asm, c(-1.0, 0.0), Some(&spec)), Err(Error::NearSpectrum { .. })));
        let s = RobinSolver::new(&asm, c(-0.5, 0.0), Some(&spec)).unwrap();
        assert_eq!(s.regime, Regime::Extended);
    }
}
