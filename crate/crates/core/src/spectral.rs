//! Spectra, resolvent sector probes and semigroups of dense generators.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::dense::{self, cond2, general_eig, sup_norm, sym_gen_eigh, weighted_l2_norm};
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

pub(crate) fn serialize_complex_vec<S: Serializer>(v: &[Complex64], s: S) -> std::result::Result<S::Ok, S::Error> {
    let pairs: Vec<[f64; 2]> = v.iter().map(|z| [z.re, z.im]).collect();
    pairs.serialize(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumMethod {
    /// Nonsymmetric QR algorithm on the matrix itself.
    General,
    /// Symmetric-definite pencil `A v = μ M v`.
    SymmetricPencil,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumReport {
    /// Sorted by real part descending, then imaginary part ascending.
    #[serde(serialize_with = "serialize_complex_vec")]
    pub eigenvalues: Vec<Complex64>,
    pub spectral_radius: f64,
    /// `max |Im λ| / ρ`.
    pub max_imag_ratio: f64,
    /// 2-norm condition number of the eigenvector matrix (unit columns),
    /// when computed.
    pub eigenvector_condition: Option<f64>,
    pub method: SpectrumMethod,
}

impl SpectrumReport {
    fn from_values(mut eigenvalues: Vec<Complex64>, eigenvector_condition: Option<f64>, method: SpectrumMethod) -> Self {
        eigenvalues.sort_by(|a, b| b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im)));
        let spectral_radius = eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let max_imag = eigenvalues.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        let max_imag_ratio = if spectral_radius > 0.0 { max_imag / spectral_radius } else { 0.0 };
        SpectrumReport { eigenvalues, spectral_radius, max_imag_ratio, eigenvector_condition, method }
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Real parts, in report order.
    pub fn real_parts(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|z| z.re).collect()
    }

    /// Distance from `z` to the nearest eigenvalue.
    pub fn distance(&self, z: Complex64) -> f64 {
        self.eigenvalues.iter().map(|e| (e - z).norm()).fold(f64::INFINITY, f64::min)
    }
}

/// Eigenvector condition numbers are computed up to this dimension.
const CONDITION_LIMIT: usize = 1500;

/// Dense eigensolve of a general real matrix.
pub fn spectrum(matrix: &Array2<f64>) -> Result<SpectrumReport> {
    let n = matrix.nrows();
    if matrix.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: matrix.ncols() });
    }
    let (w, mut v) = general_eig(matrix)?;
    let condition = if n <= CONDITION_LIMIT && n > 0 {
        for mut col in v.columns_mut() {
            let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            col.mapv_inplace(|z| z / norm);
        }
        Some(cond2(&v)?)
    } else {
        None
    };
    Ok(SpectrumReport::from_values(w, condition, SpectrumMethod::General))
}

/// Spectrum of `M⁻¹ A` for symmetric `A` and symmetric positive definite
/// `M`. The eigenvector condition is `√κ(M)`.
pub fn pencil_spectrum(a: &Array2<f64>, mass: &Array2<f64>) -> Result<SpectrumReport> {
    let (mu, _) = sym_gen_eigh(a, mass)?;
    let (m, _) = dense::sym_eigh(mass)?;
    let cond = if m.is_empty() { 1.0 } else { (m[m.len() - 1] / m[0]).sqrt() };
    Ok(SpectrumReport::from_values(
        mu.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        Some(cond),
        SpectrumMethod::SymmetricPencil,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormKind {
    /// Maximum absolute row sum (operator norm on nodal sup norm).
    Sup,
    /// Operator norm on `ℓ²` weighted by the diagonal mass.
    L2,
}

#[derive(Clone, Debug, Serialize)]
pub struct SectorPoint {
    pub theta: f64,
    pub r: f64,
    /// `|λ| · ‖R(λ, A)‖`.
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AngleSupremum {
    pub theta_deg: f64,
    /// `None` when every probe on the ray was excluded.
    pub sup: Option<f64>,
    pub probes: usize,
    pub excluded: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SectorReport {
    pub norm_kind: NormKind,
    pub spectral_radius: f64,
    pub grid: Vec<SectorPoint>,
    pub per_angle: Vec<AngleSupremum>,
}

impl SectorReport {
    pub fn sup_at(&self, theta_deg: f64) -> Option<f64> {
        self.per_angle.iter().find(|a| (a.theta_deg - theta_deg).abs() < 1e-9).and_then(|a| a.sup)
    }
}

pub const DEFAULT_ANGLES: [f64; 7] = [30.0, 60.0, 85.0, 90.0, 120.0, 150.0, 170.0];

/// `count` radii log-spaced in `[1e-2 ρ, 1e2 ρ]`.
pub fn default_radii(rho: f64, count: usize) -> Vec<f64> {
    let rho = if rho > 0.0 { rho } else { 1.0 };
    (0..count)
        .map(|k| {
            let s = if count > 1 { k as f64 / (count - 1) as f64 } else { 0.5 };
            rho * 10f64.powf(-2.0 + 4.0 * s)
        })
        .collect()
}

/// Norm of `R(λ, A) = (λ − A)⁻¹`.
pub fn resolvent_norm(a: &Array2<f64>, lambda: Complex64, kind: NormKind, weight: &[f64]) -> Result<f64> {
    let r = resolvent(a, lambda)?;
    match kind {
        NormKind::Sup => Ok(sup_norm(&r)),
        NormKind::L2 => weighted_l2_norm(&r, weight),
    }
}

pub fn resolvent(a: &Array2<f64>, lambda: Complex64) -> Result<Array2<Complex64>> {
    let n = a.nrows();
    let mut m = a.mapv(|v| Complex64::new(-v, 0.0));
    for i in 0..n {
        m[[i, i]] += lambda;
    }
    dense::inverse_complex(&m)
}

/// Samples `|λ|·‖R(λ, A)‖` along rays `arg λ = θ`. Probes within `1e-8 ρ`
/// of the spectrum are skipped.
pub fn sector_probe(
    a: &Array2<f64>,
    weight: &[f64],
    spec: &SpectrumReport,
    angles_deg: &[f64],
    radii: &[f64],
    kind: NormKind,
) -> Result<SectorReport> {
    for &t in angles_deg {
        if !(t >= 0.0 && t <= 179.0) {
            return Err(Error::InvalidParameter(format!("sector angle {t} not in [0, 179] degrees")));
        }
    }
    let rho = spec.spectral_radius;
    let mut grid = Vec::new();
    let mut per_angle = Vec::new();
    for &deg in angles_deg {
        let theta = deg.to_radians();
        let (mut sup, mut probes, mut excluded) = (None::<f64>, 0, 0);
        for &r in radii {
            let lambda = Complex64::from_polar(r, theta);
            if spec.distance(lambda) < 1e-8 * rho.max(f64::MIN_POSITIVE) {
                excluded += 1;
                continue;
            }
            let bound = r * resolvent_norm(a, lambda, kind, weight)?;
            probes += 1;
            sup = Some(sup.map_or(bound, |s| s.max(bound)));
            grid.push(SectorPoint { theta, r, bound });
        }
        per_angle.push(AngleSupremum { theta_deg: deg, sup, probes, excluded });
    }
    Ok(SectorReport { norm_kind: kind, spectral_radius: rho, grid, per_angle })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SemigroupMethod {
    Eigen,
    Pade,
}

/// `t ↦ e^{tA}` for a dense generator.
#[derive(Clone, Debug)]
pub struct Semigroup {
    pub method: SemigroupMethod,
    /// Eigenvector condition estimate used to choose the method.
    pub condition: f64,
    generator: Array2<f64>,
    eigen: Option<EigenData>,
}

#[derive(Clone, Debug)]
struct EigenData {
    mu: Array1<f64>,
    /// `M`-orthonormal, so `V⁻¹ = Vᵀ M`.
    v: Array2<f64>,
    mass: CsrMatrix<f64>,
}

/// Eigendecomposition is used when the eigenvector condition is below this.
pub const EIGEN_CONDITION_LIMIT: f64 = 1e6;

impl Semigroup {
    /// `pencil = Some((A_sym, M))` with `generator = M⁻¹ A_sym` enables the
    /// eigendecomposition path; otherwise Padé scaling and squaring is used.
    pub fn new(generator: Array2<f64>, pencil: Option<(&Array2<f64>, &Array2<f64>)>) -> Result<Self> {
        match pencil {
            Some((a, m)) => {
                let (mvals, _) = dense::sym_eigh(m)?;
                let condition = if mvals.is_empty() { 1.0 } else { mvals[mvals.len() - 1] / mvals[0] };
                Self::from_pencil(generator, a, &CsrMatrix::from_dense(m), condition)
            }
            None => Ok(Self::pade(generator)),
        }
    }

    /// Padé scaling and squaring only.
    pub fn pade(generator: Array2<f64>) -> Self {
        Semigroup { method: SemigroupMethod::Pade, condition: f64::NAN, generator, eigen: None }
    }

    /// As [`Self::new`] with a known (or upper-bounded) condition number of
    /// `M`; the eigenvector matrix then has condition `√κ(M)`.
    pub fn from_pencil(generator: Array2<f64>, a: &Array2<f64>, mass: &CsrMatrix<f64>, mass_condition: f64) -> Result<Self> {
        let condition = mass_condition.sqrt();
        if !(condition < EIGEN_CONDITION_LIMIT) {
            return Ok(Self::pade(generator));
        }
        let (mu, v) = sym_gen_eigh(a, &mass.to_dense())?;
        Ok(Semigroup {
            method: SemigroupMethod::Eigen,
            condition,
            generator,
            eigen: Some(EigenData { mu, v, mass: mass.clone() }),
        })
    }

    pub fn dim(&self) -> usize {
        self.generator.nrows()
    }

    pub fn generator(&self) -> &Array2<f64> {
        &self.generator
    }

    /// Eigenvalues of the pencil, ascending (eigen path only).
    pub fn eigenvalues(&self) -> Option<&Array1<f64>> {
        self.eigen.as_ref().map(|e| &e.mu)
    }

    /// `V diag(f(μ)) Vᵀ M`, using the symmetry of `V diag Vᵀ` and `M`.
    fn spectral_function(&self, e: &EigenData, f: impl Fn(f64) -> f64) -> Result<Array2<f64>> {
        let fv: Vec<f64> = e.mu.iter().map(|&m| f(m)).collect();
        let y = dense::signed_gram(&e.v, &fv)?;
        Ok(e.mass.dense_product(&y).reversed_axes().as_standard_layout().to_owned())
    }

    /// `e^{tA}`; exactly the identity at `t = 0`.
    pub fn matrix(&self, t: f64) -> Result<Array2<f64>> {
        if t < 0.0 {
            return Err(Error::InvalidParameter(format!("negative time {t}")));
        }
        if t == 0.0 {
            return Ok(Array2::eye(self.dim()));
        }
        match &self.eigen {
            Some(e) => self.spectral_function(e, |m| (t * m).exp()),
            None => dense::expm(&(&self.generator * t)),
        }
    }

    /// `A e^{tA}`.
    pub fn derivative(&self, t: f64) -> Result<Array2<f64>> {
        match &self.eigen {
            Some(e) => self.spectral_function(e, |m| m * (t * m).exp()),
            None => Ok(self.generator.dot(&self.matrix(t)?)),
        }
    }

    /// `e^{tA} x`.
    pub fn apply(&self, t: f64, x: &[f64]) -> Result<Vec<f64>> {
        if t == 0.0 {
            return Ok(x.to_vec());
        }
        match &self.eigen {
            Some(e) => {
                let c = e.v.t().dot(&Array1::from(e.mass.matvec(x)));
                let scaled = &c * &e.mu.mapv(|m| (t * m).exp());
                Ok(e.v.dot(&scaled).to_vec())
            }
            None => Ok(self.matrix(t)?.dot(&Array1::from(x.to_vec())).to_vec()),
        }
    }

    /// `‖e^{(s+t)A} − e^{sA} e^{tA}‖_sup`.
    pub fn semigroup_defect(&self, s: f64, t: f64) -> Result<f64> {
        let lhs = self.matrix(s + t)?;
        let rhs = self.matrix(s)?.dot(&self.matrix(t)?);
        Ok(sup_norm(&(lhs - rhs)))
    }

    /// `t·‖A e^{tA}‖` over the given times, in the sup norm and, when a
    /// diagonal weight is supplied, the weighted `ℓ²` norm.
    pub fn analyticity(&self, times: &[f64], weight: Option<&[f64]>) -> Result<AnalyticityReport> {
        let mut samples = Vec::new();
        for &t in times {
            let d = self.derivative(t)?;
            let l2 = match weight {
                Some(w) => Some(t * weighted_l2_norm(&d, w)?),
                None => None,
            };
            samples.push(AnalyticitySample { t, sup: t * sup_norm(&d), l2 });
        }
        let max_sup = samples.iter().map(|s| s.sup).fold(0.0, f64::max);
        let max_l2 = samples.iter().filter_map(|s| s.l2).reduce(f64::max);
        Ok(AnalyticityReport { method: self.method, samples, max_sup, max_l2 })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalyticitySample {
    pub t: f64,
    pub sup: f64,
    pub l2: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalyticityReport {
    pub method: SemigroupMethod,
    pub samples: Vec<AnalyticitySample>,
    pub max_sup: f64,
    pub max_l2: Option<f64>,
}

/// `{1e-3, 1e-2, 1e-1, 1}`.
pub const ANALYTICITY_TIMES: [f64; 4] = [1e-3, 1e-2, 1e-1, 1.0];

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn one_by_one() {
        let s = spectrum(&array![[-2.0]]).unwrap();
        assert_eq!(s.eigenvalues, vec![Complex64::new(-2.0, 0.0)]);
        assert_eq!(s.max_imag_ratio, 0.0);
    }

    #[test]
    fn sorted_and_realness() {
        let s = spectrum(&array![[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 3.0]]).unwrap();
        assert_eq!(s.eigenvalues[0], Complex64::new(3.0, 0.0));
        assert!((s.max_imag_ratio - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn normal_matrix_sector_bounds() {
        // Diagonal generator with spectrum {0, -1, ..., -9}: at θ = 90° the
        // bound is exactly 1; at θ = 170° it approaches 1/sin 10°.
        let a = Array2::from_diag(&Array1::from_iter((0..10).map(|k| -(k as f64))));
        let spec = spectrum(&a).unwrap();
        let w = vec![1.0; 10];
        let radii = default_radii(spec.spectral_radius, 24);
        let r = sector_probe(&a, &w, &spec, &[90.0, 170.0], &radii, NormKind::L2).unwrap();
        assert!((r.sup_at(90.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(r.sup_at(170.0).unwrap() <= 1.0 / 10f64.to_radians().sin() + 1e-9);
    }

    #[test]
    fn excluded_probes_are_counted() {
        let a = array![[-1.0]];
        let spec = spectrum(&a).unwrap();
        let r = sector_probe(&a, &[1.0], &spec, &[179.0], &[1.0], NormKind::Sup).unwrap();
        assert_eq!(r.per_angle[0].probes, 1);
        let r = sector_probe(&a, &[1.0], &spec, &[0.0], &[1.0], NormKind::Sup).unwrap();
        assert_eq!(r.per_angle[0].sup.unwrap(), 0.5);
        assert!(sector_probe(&a, &[1.0], &spec, &[180.0], &[1.0], NormKind::Sup).is_err());
    }

    #[test]
    fn eigen_and_pade_paths_agree() {
        let m = array![[2.0, 0.5, 0.0], [0.5, 1.0, 0.2], [0.0, 0.2, 1.5]];
        let s = array![[-3.0, 1.0, 0.0], [1.0, -2.0, 1.0], [0.0, 1.0, -1.0]];
        let g = dense::solve(&m, &s).unwrap();
        let eig = Semigroup::new(g.clone(), Some((&s, &m))).unwrap();
        let pade = Semigroup::new(g, None).unwrap();
        assert_eq!(eig.method, SemigroupMethod::Eigen);
        assert_eq!(pade.method, SemigroupMethod::Pade);
        for t in [0.0, 0.01, 0.5, 3.0] {
            let d = sup_norm(&(eig.matrix(t).unwrap() - pade.matrix(t).unwrap()));
            assert!(d < 1e-12, "t = {t}: {d}");
        }
        assert_eq!(eig.matrix(0.0).unwrap(), Array2::<f64>::eye(3));
        assert!(eig.semigroup_defect(0.3, 0.7).unwrap() < 1e-12);
        assert!(pade.semigroup_defect(0.5, 0.5).unwrap() < 1e-12);
    }

    #[test]
    fn scalar_analyticity_bound() {
        // A = -1 on a weighted space: t e^{-t} peaks at 1/e.
        let a = array![[-1.0]];
        let sg = Semigroup::new(a.clone(), Some((&a, &array![[1.0]]))).unwrap();
        let rep = sg.analyticity(&[0.5, 1.0, 2.0], Some(&[1.0])).unwrap();
        assert!((rep.max_sup - (-1.0f64).exp()).abs() < 1e-14);
        assert!((rep.max_l2.unwrap() - (-1.0f64).exp()).abs() < 1e-14);
    }
}
