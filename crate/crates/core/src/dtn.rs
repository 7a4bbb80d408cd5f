//! The Dirichlet-to-Neumann matrix, its resolvent, the boundary square-root
//! comparison operator and the perturbation between them.

use std::sync::OnceLock;

use ndarray::{Array1, Array2, Axis};
use num_complex::Complex64;
use serde::Serialize;

use crate::coefficients::format_complex;
use crate::dense::{self, spectral_norm, sup_norm, sym_gen_eigh, weighted_l2_norm};
use crate::elliptic::{DirichletSolver, RobinSolver};
use crate::error::{Error, Result};
use crate::fem::Assembly;
use crate::sparse::CsrMatrix;
use crate::spectral::{self, NormKind, SectorReport, Semigroup, SpectrumReport};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub mesh_hash: String,
    pub coefficient_hash: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DtnPath {
    /// Column `j` is the conormal map of the harmonic extension of `e_j`.
    Columns,
    /// Mass-weighted Schur complement of the interior block.
    Schur,
}

/// Dense Dirichlet-to-Neumann matrix `N = β M_bnd⁻¹ (−Σ) + d` where
/// `Σ = S_ΓΓ − S_ΓI S_II⁻¹ S_IΓ`.
#[derive(Debug)]
pub struct DtnOperator {
    pub n: Array2<f64>,
    pub m_bnd: Vec<f64>,
    pub beta: Vec<f64>,
    pub d: Vec<f64>,
    pub provenance: Provenance,
    pub path: DtnPath,
    /// Whether the Schur complement is symmetric, making `N` self-adjoint in
    /// the `diag(m/β)` inner product.
    pub symmetric: bool,
    schur: Array2<f64>,
    spectrum: OnceLock<SpectrumReport>,
}

impl Clone for DtnOperator {
    fn clone(&self) -> Self {
        let spectrum = OnceLock::new();
        if let Some(s) = self.spectrum.get() {
            let _ = spectrum.set(s.clone());
        }
        DtnOperator {
            n: self.n.clone(),
            m_bnd: self.m_bnd.clone(),
            beta: self.beta.clone(),
            d: self.d.clone(),
            provenance: self.provenance.clone(),
            path: self.path,
            symmetric: self.symmetric,
            schur: self.schur.clone(),
            spectrum,
        }
    }
}

fn relative_asymmetry(a: &Array2<f64>) -> f64 {
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let mut worst = 0.0f64;
    for i in 0..a.nrows() {
        for j in 0..i {
            worst = worst.max((a[[i, j]] - a[[j, i]]).abs());
        }
    }
    worst / scale
}

/// Schur-complement construction.
pub fn assemble_dtn(asm: &Assembly) -> Result<DtnOperator> {
    assemble_dtn_with(asm, DtnPath::Schur)
}

pub fn assemble_dtn_with(asm: &Assembly, path: DtnPath) -> Result<DtnOperator> {
    let nb = asm.num_boundary();
    let solver = DirichletSolver::new(asm)?;
    let (schur, n) = match path {
        DtnPath::Schur => {
            let [_, _, s_bi, s_bb] = asm.system_blocks();
            // −S_II⁻¹ S_IΓ
            let ext = solver.extension_matrix();
            let schur = s_bb.to_dense() + s_bi.dense_product(&ext);
            let mut n = Array2::zeros((nb, nb));
            for i in 0..nb {
                let w = asm.beta_bnd[i] / asm.m_bnd[i];
                for j in 0..nb {
                    n[[i, j]] = w * -schur[[i, j]];
                }
                n[[i, i]] += asm.d_bnd[i];
            }
            (schur, n)
        }
        DtnPath::Columns => {
            let mut n = Array2::zeros((nb, nb));
            let mut schur = Array2::zeros((nb, nb));
            let mut e = vec![0.0; nb];
            for j in 0..nb {
                e[j] = 1.0;
                let u = solver.extend(asm, &e)?.u;
                let col = asm.conormal_map(&u, None)?;
                let t = asm.flux(&u, None)?;
                for i in 0..nb {
                    n[[i, j]] = col[i];
                    schur[[i, j]] = -t[i] * asm.m_bnd[i];
                }
                e[j] = 0.0;
            }
            (schur, n)
        }
    };
    let symmetric = relative_asymmetry(&schur) < 1e-12;
    Ok(DtnOperator {
        n,
        m_bnd: asm.m_bnd.clone(),
        beta: asm.beta_bnd.clone(),
        d: asm.d_bnd.clone(),
        provenance: Provenance { mesh_hash: asm.mesh_hash.clone(), coefficient_hash: asm.coefficient_hash.clone() },
        path,
        symmetric,
        schur,
        spectrum: OnceLock::new(),
    })
}

impl DtnOperator {
    pub fn dim(&self) -> usize {
        self.n.nrows()
    }

    /// `Σ = S_ΓΓ − S_ΓI S_II⁻¹ S_IΓ`.
    pub fn schur_complement(&self) -> &Array2<f64> {
        &self.schur
    }

    /// `N·x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.n.dot(&Array1::from(x.to_vec())).to_vec()
    }

    /// `(A, M)` with `N = M⁻¹ A`, `A = −Σ + diag(m d/β)` symmetrized and
    /// `M = diag(m/β)`. Only meaningful when [`Self::symmetric`] holds.
    pub fn pencil(&self) -> (Array2<f64>, Array2<f64>) {
        let nb = self.dim();
        let mut a = self.schur.mapv(|v| -v);
        a = (&a + &a.t()) * 0.5;
        let mut mass = Array2::zeros((nb, nb));
        for i in 0..nb {
            let w = self.m_bnd[i] / self.beta[i];
            a[[i, i]] += w * self.d[i];
            mass[[i, i]] = w;
        }
        (a, mass)
    }

    /// Symmetric part of `M_bnd N`.
    pub fn symmetrized_mass_form(&self) -> Array2<f64> {
        let mut mn = self.n.clone();
        for (mut row, &m) in mn.axis_iter_mut(Axis(0)).zip(&self.m_bnd) {
            row *= m;
        }
        (&mn + &mn.t()) * 0.5
    }

    /// Largest eigenvalue of `sym(M_bnd N)` and `‖M_bnd N‖₂`.
    pub fn dissipativity(&self) -> Result<(f64, f64)> {
        let mut mn = self.n.clone();
        for (mut row, &m) in mn.axis_iter_mut(Axis(0)).zip(&self.m_bnd) {
            row *= m;
        }
        let norm = spectral_norm(&mn)?;
        let (w, _) = dense::sym_eigh(&self.symmetrized_mass_form())?;
        Ok((w.iter().copied().fold(f64::NEG_INFINITY, f64::max), norm))
    }

    /// Spectrum from the nonsymmetric eigensolver, computed once.
    pub fn spectrum(&self) -> Result<&SpectrumReport> {
        if let Some(s) = self.spectrum.get() {
            return Ok(s);
        }
        let s = spectral::spectrum(&self.n)?;
        Ok(self.spectrum.get_or_init(|| s))
    }

    /// Spectrum through the symmetric pencil (requires `b = 0`).
    pub fn pencil_spectrum(&self) -> Result<SpectrumReport> {
        if !self.symmetric {
            return Err(Error::InvalidParameter("DtN matrix is not symmetric in any diagonal inner product".into()));
        }
        let (a, m) = self.pencil();
        spectral::pencil_spectrum(&a, &m)
    }

    /// `R(λ, N) = (λ − N)⁻¹`, refused within `1e-8 ρ` of the spectrum.
    pub fn resolvent(&self, lambda: Complex64) -> Result<Array2<Complex64>> {
        let spec = self.spectrum()?;
        let dist = spec.distance(lambda);
        if dist < 1e-8 * spec.spectral_radius.max(f64::MIN_POSITIVE) {
            return Err(Error::NearSpectrum { lambda: format_complex(lambda), distance: dist });
        }
        spectral::resolvent(&self.n, lambda)
    }

    /// `(λ − N) R − I` in the max-entry norm.
    pub fn resolvent_residual(&self, lambda: Complex64, r: &Array2<Complex64>) -> f64 {
        let mut a = dense::to_complex(&self.n).mapv(|v| -v);
        for i in 0..self.dim() {
            a[[i, i]] += lambda;
        }
        let mut p = a.dot(r);
        for i in 0..self.dim() {
            p[[i, i]] -= Complex64::new(1.0, 0.0);
        }
        p.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn sector_probe(&self, angles_deg: &[f64], radii: Option<&[f64]>, kind: NormKind) -> Result<SectorReport> {
        let spec = self.spectrum()?;
        let default;
        let radii = match radii {
            Some(r) => r,
            None => {
                default = spectral::default_radii(spec.spectral_radius, 24);
                &default
            }
        };
        spectral::sector_probe(&self.n, &self.m_bnd, spec, angles_deg, radii, kind)
    }

    /// `t ↦ e^{tN}`, by eigendecomposition when symmetric.
    pub fn semigroup(&self) -> Result<Semigroup> {
        if self.symmetric {
            let (a, m) = self.pencil();
            let w: Vec<f64> = (0..self.dim()).map(|i| m[[i, i]]).collect();
            let cond = w.iter().copied().fold(0.0, f64::max) / w.iter().copied().fold(f64::INFINITY, f64::min);
            Semigroup::from_pencil(self.n.clone(), &a, &CsrMatrix::from_diagonal(&w), cond)
        } else {
            Ok(Semigroup::pade(self.n.clone()))
        }
    }
}

/// Dense resolvent of the DtN matrix.
pub fn dtn_resolvent(dtn: &DtnOperator, lambda: Complex64) -> Result<Array2<Complex64>> {
    dtn.resolvent(lambda)
}

/// `‖u_R + L₀ R(λ, N) φ‖_sup` where `u_R` solves the Robin problem.
pub fn verify_resolvent_identity(asm: &Assembly, dtn: &DtnOperator, lambda: Complex64, phi: &[Complex64]) -> Result<f64> {
    let solver = DirichletSolver::new(asm)?;
    verify_resolvent_identity_with(asm, dtn, &solver, lambda, phi)
}

/// As [`verify_resolvent_identity`] with a reusable Dirichlet factorization.
pub fn verify_resolvent_identity_with(
    asm: &Assembly,
    dtn: &DtnOperator,
    solver: &DirichletSolver,
    lambda: Complex64,
    phi: &[Complex64],
) -> Result<f64> {
    let spec = dtn.spectrum()?;
    let robin = RobinSolver::new(asm, lambda, Some(&spec.eigenvalues))?.solve(asm, phi)?;
    let r = dtn.resolvent(lambda)?;
    let psi = r.dot(&Array1::from(phi.to_vec())).to_vec();
    let ext = solver.extend_complex(asm, &psi)?;
    Ok(robin.u.iter().zip(&ext).map(|(a, b)| (a + b).norm()).fold(0.0, f64::max))
}

/// `W = −√(−Δ_Γ)` from `K_bnd V = M_bnd V diag(μ)`.
#[derive(Clone, Debug)]
pub struct SqrtOperator {
    pub w: Array2<f64>,
    /// `√μ`, ascending.
    pub sqrt_mu: Array1<f64>,
    /// `M_bnd`-orthonormal eigenvectors.
    pub v: Array2<f64>,
    pub m_bnd: Vec<f64>,
}

pub fn boundary_sqrt_operator(asm: &Assembly) -> Result<SqrtOperator> {
    let nb = asm.num_boundary();
    if let Some((k, &m)) = asm.m_bnd.iter().enumerate().find(|(_, &m)| !(m > 0.0)) {
        return Err(Error::InvalidParameter(format!("boundary mass {m} at boundary dof {k} is not positive")));
    }
    let k = asm.k_bnd.to_dense();
    let mass = Array2::from_diag(&Array1::from(asm.m_bnd.clone()));
    let (mu, v) = sym_gen_eigh(&k, &mass)?;
    let sqrt_mu = mu.mapv(|x| x.max(0.0).sqrt());
    let mut vs = v.clone();
    for (mut col, &s) in vs.columns_mut().into_iter().zip(sqrt_mu.iter()) {
        col *= -s;
    }
    let mut vt_m = v.t().to_owned();
    for (mut col, &m) in vt_m.columns_mut().into_iter().zip(&asm.m_bnd) {
        col *= m;
    }
    let w = vs.dot(&vt_m);
    debug_assert_eq!(w.nrows(), nb);
    Ok(SqrtOperator { w, sqrt_mu, v, m_bnd: asm.m_bnd.clone() })
}

#[derive(Clone, Debug, Serialize)]
pub struct RelativeBoundPoint {
    pub epsilon: f64,
    pub c: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PerturbationReport {
    pub sup_norm: f64,
    pub l2_norm: f64,
    /// `ε ↦ max_k (‖P v_k‖ − ε ‖W v_k‖)⁺` over the `M_bnd`-normalized
    /// eigenbasis of `W`.
    pub relative_bound: Vec<RelativeBoundPoint>,
    /// Weighted norm of `P` restricted to modes with `√μ ≤ low_mode_cutoff`.
    pub low_mode_l2_norm: f64,
    pub low_mode_cutoff: f64,
    /// `‖P v_k‖` per eigenvector, ascending in `√μ`.
    pub mode_norms: Vec<f64>,
}

pub const RELATIVE_BOUND_EPSILONS: [f64; 5] = [1.0, 0.5, 0.1, 0.05, 0.01];

/// Norms of `P = N − W`.
pub fn perturbation_report(dtn: &DtnOperator, w: &SqrtOperator, low_mode_cutoff: f64) -> Result<PerturbationReport> {
    let nb = dtn.dim();
    if w.w.nrows() != nb {
        return Err(Error::DimensionMismatch { expected: nb, found: w.w.nrows() });
    }
    let p = &dtn.n - &w.w;
    let sqrt_m: Vec<f64> = w.m_bnd.iter().map(|m| m.sqrt()).collect();
    // Columns of P V in the M-weighted norm.
    let pv = p.dot(&w.v);
    let mode_norms: Vec<f64> = pv
        .columns()
        .into_iter()
        .map(|c| c.iter().zip(&sqrt_m).map(|(x, s)| (x * s).powi(2)).sum::<f64>().sqrt())
        .collect();
    let relative_bound = RELATIVE_BOUND_EPSILONS
        .iter()
        .map(|&epsilon| RelativeBoundPoint {
            epsilon,
            c: mode_norms.iter().zip(w.sqrt_mu.iter()).map(|(&pn, &s)| (pn - epsilon * s).max(0.0)).fold(0.0, f64::max),
        })
        .collect();
    let low: Vec<usize> = (0..nb).filter(|&k| w.sqrt_mu[k] <= low_mode_cutoff).collect();
    let low_mode_l2_norm = if low.is_empty() {
        0.0
    } else {
        let mut block = pv.select(Axis(1), &low);
        for (mut row, &s) in block.axis_iter_mut(Axis(0)).zip(&sqrt_m) {
            row *= s;
        }
        spectral_norm(&block)?
    };
    Ok(PerturbationReport {
        sup_norm: sup_norm(&p),
        l2_norm: weighted_l2_norm(&p, &w.m_bnd)?,
        relative_bound,
        low_mode_l2_norm,
        low_mode_cutoff,
        mode_norms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::CoefficientSet;
    use crate::elliptic::dirichlet_extend;
    use crate::fem::assemble;
    use crate::mesh::{builtin_mesh, BuiltinKind};
    use crate::rng::XorShift64Star;

    fn disk(refinement: u32, coeffs: &CoefficientSet) -> Assembly {
        assemble(&builtin_mesh(BuiltinKind::Disk, refinement).unwrap(), coeffs).unwrap()
    }

    fn cos_mode(asm: &Assembly, k: f64) -> Vec<f64> {
        asm.boundary_points().iter().map(|p| (k * p[1].atan2(p[0])).cos()).collect()
    }

    fn max_abs(v: &[f64]) -> f64 {
        v.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    #[test]
    fn both_paths_agree() {
        for coeffs in [
            CoefficientSet::laplace(),
            CoefficientSet::laplace().with_a("1+0.5*x, 0.2*y, 0.2*y, 1").unwrap().with_d("0.3").unwrap().with_beta("1.5+0.5*cos(theta)").unwrap(),
        ] {
            let asm = disk(2, &coeffs);
            let a = assemble_dtn_with(&asm, DtnPath::Schur).unwrap();
            let b = assemble_dtn_with(&asm, DtnPath::Columns).unwrap();
            let scale = a.n.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let diff = (&a.n - &b.n).iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(diff <= 1e-11 * scale, "{diff}");
            assert!(a.symmetric);
        }
    }

    #[test]
    fn constants_in_kernel() {
        let asm = disk(2, &CoefficientSet::laplace());
        let dtn = assemble_dtn(&asm).unwrap();
        assert!(max_abs(&dtn.apply(&vec![1.0; dtn.dim()])) < 1e-10);
        let (top, norm) = dtn.dissipativity().unwrap();
        assert!(top <= 1e-10 * norm);
    }

    #[test]
    fn disk_eigenvalues() {
        let asm = disk(2, &CoefficientSet::laplace());
        let dtn = assemble_dtn(&asm).unwrap();
        let spec = dtn.spectrum().unwrap();
        let expected = [0.0, -1.0, -1.0, -2.0, -2.0, -3.0, -3.0, -4.0];
        for (z, e) in spec.eigenvalues.iter().zip(expected) {
            assert!((z.re - e).abs() <= 0.03 * e.abs().max(1.0), "{z} vs {e}");
        }
        assert!(spec.max_imag_ratio <= 1e-8);
        let pencil = dtn.pencil_spectrum().unwrap();
        for (a, b) in spec.eigenvalues.iter().zip(&pencil.eigenvalues) {
            assert!((a.re - b.re).abs() < 1e-9 * spec.spectral_radius);
        }
    }

    #[test]
    fn constant_d_shifts_spectrum() {
        let base = assemble_dtn(&disk(1, &CoefficientSet::laplace())).unwrap();
        let shifted = assemble_dtn(&disk(1, &CoefficientSet::laplace().with_d("0.3").unwrap())).unwrap();
        let (a, b) = (base.spectrum().unwrap(), shifted.spectrum().unwrap());
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            assert!((y.re - x.re - 0.3).abs() < 1e-10);
        }
    }

    #[test]
    fn beta_scales_exactly() {
        let one = assemble_dtn(&disk(1, &CoefficientSet::laplace())).unwrap();
        let two = assemble_dtn(&disk(1, &CoefficientSet::laplace().with_beta("2").unwrap())).unwrap();
        assert_eq!(two.n, &one.n * 2.0);
    }

    #[test]
    fn resolvent_examples() {
        let asm = disk(2, &CoefficientSet::laplace());
        let dtn = assemble_dtn(&asm).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let r = dtn.resolvent(one).unwrap();
        assert!(dtn.resolvent_residual(one, &r) < 1e-10);
        let r1: Vec<f64> = r.rows().into_iter().map(|row| row.iter().map(|z| z.re).sum()).collect();
        assert!(r1.iter().all(|v| (v - 1.0).abs() < 1e-10));
        assert!((sup_norm(&r) - 1.0).abs() < 1e-6);

        let phi = cos_mode(&asm, 3.0);
        let r2 = dtn.resolvent(Complex64::new(2.0, 0.0)).unwrap();
        let y = r2.dot(&Array1::from(phi.iter().map(|&v| Complex64::new(v, 0.0)).collect::<Vec<_>>()));
        let err = y.iter().zip(&phi).map(|(a, b)| (a.re - b / 5.0).abs()).fold(0.0, f64::max);
        assert!(err < 0.01, "{err}");

        let lam0 = dtn.spectrum().unwrap().eigenvalues[1];
        assert!(matches!(dtn.resolvent(lam0), Err(Error::NearSpectrum { .. })));
    }

    #[test]
    fn contraction_on_real_axis() {
        let dtn = assemble_dtn(&disk(2, &CoefficientSet::laplace())).unwrap();
        for k in 0..10 {
            let lambda = 10f64.powf(-2.0 + 4.0 * k as f64 / 9.0);
            let r = dtn.resolvent(Complex64::new(lambda, 0.0)).unwrap();
            assert!(sup_norm(&r) <= (1.0 + 1e-6) / lambda);
        }
    }

    #[test]
    fn resolvent_identity_examples() {
        let asm = disk(2, &CoefficientSet::laplace());
        let dtn = assemble_dtn(&asm).unwrap();
        let minus_one = vec![Complex64::new(-1.0, 0.0); asm.num_boundary()];
        assert!(verify_resolvent_identity(&asm, &dtn, Complex64::new(1.0, 0.0), &minus_one).unwrap() <= 1e-12);
        let mut rng = XorShift64Star::new(7);
        let phi: Vec<Complex64> = (0..asm.num_boundary()).map(|_| Complex64::new(rng.uniform(-1.0, 1.0), 0.0)).collect();
        let sup = phi.iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(verify_resolvent_identity(&asm, &dtn, Complex64::new(1.0, 3.0), &phi).unwrap() <= 1e-9 * sup);
        let c2: Vec<Complex64> = cos_mode(&asm, 2.0).into_iter().map(|v| Complex64::new(v, 0.0)).collect();
        assert!(verify_resolvent_identity(&asm, &dtn, Complex64::new(5.0, 0.0), &c2).unwrap() <= 1e-9);
    }

    #[test]
    fn sqrt_operator_on_the_circle() {
        let asm = disk(2, &CoefficientSet::laplace());
        let w = boundary_sqrt_operator(&asm).unwrap();
        assert!(max_abs(&w.w.dot(&Array1::ones(asm.num_boundary())).to_vec()) < 1e-10);
        let expected = [0.0, 1.0, 1.0, 2.0, 2.0];
        for (s, e) in w.sqrt_mu.iter().zip(expected) {
            assert!((s - e).abs() < 0.01, "{s}");
        }
        let len: f64 = asm.m_bnd.iter().sum();
        assert!((w.sqrt_mu[1] - 2.0 * std::f64::consts::PI / len).abs() < 1e-3);
    }

    #[test]
    fn perturbation_low_modes_are_small_on_the_disk() {
        let asm = disk(2, &CoefficientSet::laplace());
        let dtn = assemble_dtn(&asm).unwrap();
        let w = boundary_sqrt_operator(&asm).unwrap();
        let rep = perturbation_report(&dtn, &w, 4.0).unwrap();
        assert!(rep.low_mode_l2_norm < 0.1, "{}", rep.low_mode_l2_norm);
        assert!(rep.l2_norm >= rep.low_mode_l2_norm);
        assert!(rep.relative_bound.windows(2).all(|p| p[0].c <= p[1].c + 1e-12));
    }

    #[test]
    fn sector_on_the_disk() {
        let dtn = assemble_dtn(&disk(1, &CoefficientSet::laplace())).unwrap();
        let rep = dtn.sector_probe(&[90.0, 170.0], None, NormKind::L2).unwrap();
        assert!((rep.sup_at(90.0).unwrap() - 1.0).abs() < 1e-6);
        let edge = 1.0 / 10f64.to_radians().sin();
        assert!((rep.sup_at(170.0).unwrap() - edge).abs() < 0.01 * edge, "{:?}", rep.per_angle);
        let sup = dtn.sector_probe(&[90.0], None, NormKind::Sup).unwrap();
        let s = sup.sup_at(90.0).unwrap();
        assert!(s.is_finite() && s >= 1.0, "{s}");
    }

    #[test]
    fn semigroup_decays_modes() {
        let asm = disk(2, &CoefficientSet::laplace());
        let dtn = assemble_dtn(&asm).unwrap();
        let sg = dtn.semigroup().unwrap();
        let phi = cos_mode(&asm, 2.0);
        let out = sg.apply(1.0, &phi).unwrap();
        let err = out.iter().zip(&phi).map(|(a, b)| (a - (-2.0f64).exp() * b).abs()).fold(0.0, f64::max);
        assert!(err < 5e-3, "{err}");
        let rep = sg.analyticity(&spectral::ANALYTICITY_TIMES, Some(&dtn.m_bnd)).unwrap();
        assert!(rep.max_l2.unwrap() <= 0.5);
        assert!(sg.semigroup_defect(0.5, 0.5).unwrap() < 1e-9);
    }

    #[test]
    fn harmonic_extension_matches_columns() {
        let asm = disk(1, &CoefficientSet::laplace());
        let dtn = assemble_dtn(&asm).unwrap();
        let phi = cos_mode(&asm, 1.0);
        let u = dirichlet_extend(&asm, &phi).unwrap().u;
        let direct = asm.conormal_map(&u, None).unwrap();
        let via_n = dtn.apply(&phi);
        assert!(direct.iter().zip(&via_n).all(|(a, b)| (a - b).abs() < 1e-11));
    }
}
