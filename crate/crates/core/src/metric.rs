//! The transformed metric `g̃` with inverse `g̃^{kl} = a^k_i g^{il}`.
//!
//! The divergence-form principal part with coefficient `a` is the
//! Laplace–Beltrami operator of `g̃`; the determinants satisfy
//! `|g| = |a| · |g̃|`.

use serde::Serialize;

use crate::coefficients::CoefficientSet;
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::tensor::{Mat2, Sym2};

/// Transformed metric data at a single point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointMetric {
    /// `a · g⁻¹`, symmetrized.
    pub g_tilde_inv: Sym2,
    pub g_tilde: Sym2,
    pub det_g: f64,
    pub det_a: f64,
    pub det_g_tilde: f64,
}

/// Builds `g̃` from `a` and `g` at one point. Returns the smaller eigenvalue
/// of `a·g⁻¹` as the error payload when it is not positive definite.
pub fn transform_point(a: &Mat2, g: &Sym2) -> std::result::Result<PointMetric, f64> {
    let product = a.mul(&g.inverse().as_mat());
    let g_tilde_inv = product.symmetric_part();
    if !g_tilde_inv.is_positive_definite() {
        return Err(product.eigenvalues().0.min(g_tilde_inv.eigenvalues().0));
    }
    let g_tilde = g_tilde_inv.inverse();
    Ok(PointMetric { g_tilde_inv, g_tilde, det_g: g.det(), det_a: a.det(), det_g_tilde: g_tilde.det() })
}

#[derive(Clone, Debug)]
pub struct TransformedMetric {
    pub vertices: Vec<PointMetric>,
}

impl TransformedMetric {
    /// Largest `|det g − det a · det g̃| / |det g|` over vertices.
    pub fn determinant_identity_residual(&self) -> f64 {
        self.vertices
            .iter()
            .map(|p| (p.det_g - p.det_a * p.det_g_tilde).abs() / p.det_g.abs())
            .fold(0.0, f64::max)
    }
}

/// Per-vertex transformed metric. Ellipticity is checked at vertices and at
/// triangle barycenters.
pub fn build_transformed_metric(mesh: &Mesh, coeffs: &CoefficientSet) -> Result<TransformedMetric> {
    let mut vertices = Vec::with_capacity(mesh.num_vertices());
    for (i, (p, g)) in mesh.vertices().iter().zip(mesh.metric()).enumerate() {
        let a = coeffs.a_at(*p)?;
        let pm = transform_point(&a, g)
            .map_err(|eigenvalue| Error::Ellipticity { location: format!("vertex {i}"), eigenvalue })?;
        vertices.push(pm);
    }
    for t in 0..mesh.num_triangles() {
        let a = coeffs.a_at(mesh.barycenter(t))?;
        transform_point(&a, &mesh.barycenter_metric(t))
            .map_err(|eigenvalue| Error::Ellipticity { location: format!("barycenter of triangle {t}"), eigenvalue })?;
    }
    Ok(TransformedMetric { vertices })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "index", rename_all = "kebab-case")]
pub enum SampleLocation {
    Vertex(usize),
    Barycenter(usize),
}

#[derive(Clone, Debug, Serialize)]
pub struct EllipticityReport {
    pub min_eigenvalue: f64,
    pub location: SampleLocation,
    pub point: [f64; 2],
    pub samples: usize,
    pub elliptic: bool,
}

/// Minimum eigenvalue of `a·g⁻¹` over vertices and barycenters. A negative
/// value is reported, not raised.
pub fn ellipticity_report(mesh: &Mesh, coeffs: &CoefficientSet) -> Result<EllipticityReport> {
    let mut best = (f64::INFINITY, SampleLocation::Vertex(0), [0.0, 0.0]);
    let mut visit = |loc: SampleLocation, p: [f64; 2], g: Sym2| -> Result<()> {
        let ev = coeffs.a_at(p)?.mul(&g.inverse().as_mat()).eigenvalues().0;
        if ev < best.0 {
            best = (ev, loc, p);
        }
        Ok(())
    };
    for (i, (p, g)) in mesh.vertices().iter().zip(mesh.metric()).enumerate() {
        visit(SampleLocation::Vertex(i), *p, *g)?;
    }
    for t in 0..mesh.num_triangles() {
        visit(SampleLocation::Barycenter(t), mesh.barycenter(t), mesh.barycenter_metric(t))?;
    }
    Ok(EllipticityReport {
        min_eigenvalue: best.0,
        location: best.1,
        point: best.2,
        samples: mesh.num_vertices() + mesh.num_triangles(),
        elliptic: best.0 > 0.0,
    })
}
