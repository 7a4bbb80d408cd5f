//! P1 finite element assembly.
//!
//! Sign table used throughout the crate:
//!
//! * `S = K − K1 − K0` is the weak form of `−A_m`, so interior equations
//!   read `(S u)_I = f_I`.
//! * The conormal flux `t` solves `M_bnd t = −(S u − f)_Γ`; it
//!   approximates `−∂u/∂ν` (positive = inward), so the boundary operator is
//!   `B̃u = β t + d u|_Γ`.
//!
//! Volume integrals use the measure of the transformed metric `g̃`, frozen
//! at triangle barycenters. The boundary mass is lumped (trapezoidal) with
//! edge lengths measured by `g̃` at edge midpoints.

use std::fmt::Write as _;

use serde::Serialize;

use crate::coefficients::CoefficientSet;
use crate::error::{Error, Result};
use crate::field::EvalContext;
use crate::mesh::{extract_boundary, BoundaryMesh, Mesh};
use crate::metric::{build_transformed_metric, transform_point, PointMetric};
use crate::sparse::{CsrMatrix, Scalar, TripletBuilder};
use crate::tensor::Sym2;

/// Role of a mesh vertex in the interior/boundary partition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dof {
    Interior(usize),
    Boundary(usize),
}

#[derive(Clone, Debug, Serialize)]
pub struct QuadratureInfo {
    pub triangle_rule: &'static str,
    pub boundary_rule: &'static str,
    pub boundary_mass: &'static str,
}

impl Default for QuadratureInfo {
    fn default() -> Self {
        QuadratureInfo {
            triangle_rule: "one-point barycenter, metric and coefficients frozen per element",
            boundary_rule: "edge midpoint metric",
            boundary_mass: "lumped",
        }
    }
}

/// All discrete operators for one mesh and coefficient set.
#[derive(Clone, Debug)]
pub struct Assembly {
    pub mesh: Mesh,
    pub boundary: BoundaryMesh,
    /// Interior vertex indices in ascending order.
    pub interior: Vec<usize>,
    pub dofs: Vec<Dof>,
    /// Stiffness of the principal part (Laplace-Beltrami of `g̃`).
    pub k: CsrMatrix<f64>,
    /// `∫ ⟨b, ∇u⟩ v`.
    pub k1: CsrMatrix<f64>,
    /// `∫ c u v`.
    pub k0: CsrMatrix<f64>,
    pub m_vol: CsrMatrix<f64>,
    /// `K − K1 − K0`.
    pub system: CsrMatrix<f64>,
    /// Lumped boundary mass per boundary dof.
    pub m_bnd: Vec<f64>,
    /// Length of each boundary edge, in `BoundaryMesh::edges` order.
    pub edge_lengths: Vec<f64>,
    /// Periodic 1D stiffness of each boundary loop.
    pub k_bnd: CsrMatrix<f64>,
    pub d_bnd: Vec<f64>,
    pub beta_bnd: Vec<f64>,
    pub quadrature: QuadratureInfo,
    pub mesh_hash: String,
    pub coefficient_hash: String,
    pub pure_principal: bool,
    /// Largest value of `c` at the quadrature points.
    pub c_max: f64,
}

/// Chart gradients of the three barycentric basis functions and the chart
/// area of triangle `t`.
pub fn basis_gradients(mesh: &Mesh, t: usize) -> ([[f64; 2]; 3], f64) {
    let [i, j, k] = mesh.triangles()[t];
    let v = mesh.vertices();
    let (p0, p1, p2) = (v[i], v[j], v[k]);
    let twice = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
    let g = [
        [(p1[1] - p2[1]) / twice, (p2[0] - p1[0]) / twice],
        [(p2[1] - p0[1]) / twice, (p0[0] - p2[0]) / twice],
        [(p0[1] - p1[1]) / twice, (p1[0] - p0[0]) / twice],
    ];
    (g, 0.5 * twice)
}

fn barycenter_metric(mesh: &Mesh, coeffs: &CoefficientSet, t: usize) -> Result<PointMetric> {
    let p = mesh.barycenter(t);
    let a = coeffs.a_at(p)?;
    transform_point(&a, &mesh.barycenter_metric(t))
        .map_err(|eigenvalue| Error::Ellipticity { location: format!("barycenter of triangle {t}"), eigenvalue })
}

/// Element stiffness via the transformed metric:
/// `area · √det g̃ · g̃⁻¹(∇φ_a, ∇φ_b)`.
pub fn element_stiffness_transformed(mesh: &Mesh, coeffs: &CoefficientSet, t: usize) -> Result<[[f64; 3]; 3]> {
    let (grad, area) = basis_gradients(mesh, t);
    let pm = barycenter_metric(mesh, coeffs, t)?;
    let w = area * pm.det_g_tilde.sqrt();
    if !(w >= 1e-14) {
        return Err(Error::DegenerateElement { triangle: t, area: w });
    }
    let mut ke = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            ke[a][b] = w * pm.g_tilde_inv.bilinear(grad[a], grad[b]);
        }
    }
    Ok(ke)
}

/// Element stiffness of the divergence form taken literally: coefficient
/// `a·g⁻¹ / √det a` against the measure `√det g`.
pub fn element_stiffness_direct(mesh: &Mesh, coeffs: &CoefficientSet, t: usize) -> Result<[[f64; 3]; 3]> {
    let (grad, area) = basis_gradients(mesh, t);
    let p = mesh.barycenter(t);
    let a = coeffs.a_at(p)?;
    let g = mesh.barycenter_metric(t);
    let x = a.mul(&g.inverse().as_mat()).0;
    let w = area * g.det().sqrt() / a.det().sqrt();
    let mut ke = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (gv, gu) = (grad[i], grad[j]);
            let mut s = 0.0;
            for r in 0..2 {
                for c in 0..2 {
                    s += gv[r] * x[r][c] * gu[c];
                }
            }
            ke[i][j] = w * s;
        }
    }
    Ok(ke)
}

/// Assembles the principal stiffness along the direct divergence-form path.
pub fn assemble_stiffness_direct(mesh: &Mesh, coeffs: &CoefficientSet) -> Result<CsrMatrix<f64>> {
    let n = mesh.num_vertices();
    let mut b = TripletBuilder::new(n, n);
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let ke = element_stiffness_direct(mesh, coeffs, t)?;
        scatter(&mut b, tri, &ke);
    }
    Ok(b.build())
}

fn scatter(b: &mut TripletBuilder<f64>, tri: &[usize; 3], ke: &[[f64; 3]; 3]) {
    for a in 0..3 {
        for c in 0..3 {
            b.push(tri[a], tri[c], ke[a][c]);
        }
    }
}

/// Polar angle of a chart point, used as `theta` in boundary expressions.
pub fn polar_angle(p: [f64; 2]) -> f64 {
    p[1].atan2(p[0])
}

/// Assembles every operator. Fails on ellipticity violations, degenerate
/// elements and non-positive `β`.
pub fn assemble(mesh: &Mesh, coeffs: &CoefficientSet) -> Result<Assembly> {
    build_transformed_metric(mesh, coeffs)?;
    let boundary = extract_boundary(mesh)?;
    let n = mesh.num_vertices();
    let mut dofs = vec![Dof::Interior(usize::MAX); n];
    for (k, &v) in boundary.trace_map.iter().enumerate() {
        dofs[v] = Dof::Boundary(k);
    }
    let mut interior = Vec::new();
    for (v, d) in dofs.iter_mut().enumerate() {
        if let Dof::Interior(_) = d {
            *d = Dof::Interior(interior.len());
            interior.push(v);
        }
    }

    let mut kb = TripletBuilder::new(n, n);
    let mut k1b = TripletBuilder::new(n, n);
    let mut k0b = TripletBuilder::new(n, n);
    let mut mb = TripletBuilder::new(n, n);
    let mut c_max = f64::NEG_INFINITY;
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let ke = element_stiffness_transformed(mesh, coeffs, t)?;
        scatter(&mut kb, tri, &ke);
        let (grad, area) = basis_gradients(mesh, t);
        let pm = barycenter_metric(mesh, coeffs, t)?;
        let vol = area * pm.det_g_tilde.sqrt();
        let p = mesh.barycenter(t);
        let mut me = [[0.0; 3]; 3];
        for (a, row) in me.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = vol / 12.0 * if a == c { 2.0 } else { 1.0 };
            }
        }
        scatter(&mut mb, tri, &me);
        let c = coeffs.c_at(p)?;
        c_max = c_max.max(c);
        if c != 0.0 {
            let ce = me.map(|row| row.map(|v| c * v));
            scatter(&mut k0b, tri, &ce);
        }
        let bvec = coeffs.b_at(p)?;
        if bvec != [0.0, 0.0] {
            let ginv: Sym2 = mesh.barycenter_metric(t).inverse();
            let bg = ginv.apply(bvec);
            let mut be = [[0.0; 3]; 3];
            for row in be.iter_mut() {
                for (c, v) in row.iter_mut().enumerate() {
                    *v = vol / 3.0 * (bg[0] * grad[c][0] + bg[1] * grad[c][1]);
                }
            }
            scatter(&mut k1b, tri, &be);
        }
    }
    let k = kb.build();
    let k1 = k1b.build();
    let k0 = k0b.build();
    let m_vol = mb.build();
    let system = CsrMatrix::linear_combination(&[(1.0, &k), (-1.0, &k1), (-1.0, &k0)]);

    let nb = boundary.len();
    let mut m_bnd = vec![0.0; nb];
    let mut edge_lengths = Vec::with_capacity(nb);
    let mut kbb = TripletBuilder::new(nb, nb);
    let verts = mesh.vertices();
    for (i, j) in boundary.edges() {
        let (vi, vj) = (boundary.trace_map[i], boundary.trace_map[j]);
        let (pi, pj) = (verts[vi], verts[vj]);
        let mid = [0.5 * (pi[0] + pj[0]), 0.5 * (pi[1] + pj[1])];
        let g = Sym2::mean(&[mesh.metric()[vi], mesh.metric()[vj]]);
        let pm = transform_point(&coeffs.a_at(mid)?, &g)
            .map_err(|eigenvalue| Error::Ellipticity { location: format!("boundary edge ({vi}, {vj})"), eigenvalue })?;
        let len = pm.g_tilde.quad([pj[0] - pi[0], pj[1] - pi[1]]).sqrt();
        edge_lengths.push(len);
        m_bnd[i] += 0.5 * len;
        m_bnd[j] += 0.5 * len;
        kbb.push(i, i, 1.0 / len);
        kbb.push(j, j, 1.0 / len);
        kbb.push(i, j, -1.0 / len);
        kbb.push(j, i, -1.0 / len);
    }
    let k_bnd = kbb.build();

    let mut d_bnd = Vec::with_capacity(nb);
    let mut beta_bnd = Vec::with_capacity(nb);
    for k in 0..nb {
        let v = boundary.trace_map[k];
        let p = verts[v];
        let ctx = EvalContext::boundary(p[0], p[1], polar_angle(p), boundary.arc_coords[k]);
        let beta = coeffs.beta_at(&ctx)?;
        if !(beta > 0.0) {
            return Err(Error::NonPositiveBeta { vertex: v, value: beta });
        }
        beta_bnd.push(beta);
        d_bnd.push(coeffs.d_at(&ctx)?);
    }

    Ok(Assembly {
        mesh: mesh.clone(),
        boundary,
        interior,
        dofs,
        k,
        k1,
        k0,
        m_vol,
        system,
        m_bnd,
        edge_lengths,
        k_bnd,
        d_bnd,
        beta_bnd,
        quadrature: QuadratureInfo::default(),
        mesh_hash: mesh.content_hash(),
        coefficient_hash: coeffs.content_hash(),
        pure_principal: coeffs.is_pure_principal(),
        c_max,
    })
}

impl Assembly {
    pub fn num_dofs(&self) -> usize {
        self.dofs.len()
    }

    pub fn num_boundary(&self) -> usize {
        self.boundary.len()
    }

    pub fn num_interior(&self) -> usize {
        self.interior.len()
    }

    /// Boundary dof -> mesh vertex.
    pub fn trace_map(&self) -> &[usize] {
        &self.boundary.trace_map
    }

    pub fn trace<T: Scalar>(&self, u: &[T]) -> Vec<T> {
        self.boundary.trace_map.iter().map(|&v| u[v]).collect()
    }

    /// Chart coordinates of boundary dofs.
    pub fn boundary_points(&self) -> Vec<[f64; 2]> {
        self.boundary.trace_map.iter().map(|&v| self.mesh.vertices()[v]).collect()
    }

    /// Evaluation context for boundary dof `k`.
    pub fn boundary_context(&self, k: usize) -> EvalContext {
        let p = self.mesh.vertices()[self.boundary.trace_map[k]];
        EvalContext::boundary(p[0], p[1], polar_angle(p), self.boundary.arc_coords[k])
    }

    /// Samples a boundary expression at the boundary dofs.
    pub fn sample_boundary(&self, expr: &crate::field::FieldExpr) -> Result<Vec<f64>> {
        (0..self.num_boundary()).map(|k| Ok(expr.eval(&self.boundary_context(k))?)).collect()
    }

    /// Samples an interior expression at all vertices.
    pub fn sample_vertices(&self, expr: &crate::field::FieldExpr) -> Result<Vec<f64>> {
        self.mesh.vertices().iter().map(|p| Ok(expr.eval(&EvalContext::interior(p[0], p[1]))?)).collect()
    }

    /// Conormal flux `t` with `M_bnd t = −(S u − f)_Γ`, before `β` and `d`.
    pub fn flux<T: Scalar>(&self, u: &[T], rhs: Option<&[T]>) -> Result<Vec<T>> {
        let n = self.num_dofs();
        if u.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: u.len() });
        }
        if let Some(f) = rhs {
            if f.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: f.len() });
            }
        }
        Ok(self
            .boundary
            .trace_map
            .iter()
            .enumerate()
            .map(|(k, &v)| {
                let mut r = T::zero();
                for (j, a) in self.system.row(v) {
                    r += T::from_real(a) * u[j];
                }
                if let Some(f) = rhs {
                    r -= f[v];
                }
                -r / T::from_real(self.m_bnd[k])
            })
            .collect())
    }

    /// Discrete `B̃u = β t + d·u|_Γ` where `t` is the variational conormal
    /// flux of `u` for the load `rhs` (zero if `None`).
    pub fn conormal_map<T: Scalar>(&self, u: &[T], rhs: Option<&[T]>) -> Result<Vec<T>> {
        let t = self.flux(u, rhs)?;
        Ok(t.into_iter()
            .enumerate()
            .map(|(k, tk)| T::from_real(self.beta_bnd[k]) * tk + T::from_real(self.d_bnd[k]) * u[self.boundary.trace_map[k]])
            .collect())
    }

    /// Interior and boundary blocks `(S_II, S_IΓ, S_ΓI, S_ΓΓ)` of the system
    /// matrix, in interior / boundary dof numbering.
    pub fn system_blocks(&self) -> [CsrMatrix<f64>; 4] {
        let (i, b) = (&self.interior, &self.boundary.trace_map);
        [
            self.system.submatrix(i, i),
            self.system.submatrix(i, b),
            self.system.submatrix(b, i),
            self.system.submatrix(b, b),
        ]
    }

    /// Looks up an assembled matrix by name.
    pub fn matrix(&self, name: &str) -> Result<CsrMatrix<f64>> {
        let nb = self.num_boundary();
        Ok(match name {
            "K" => self.k.clone(),
            "K1" => self.k1.clone(),
            "K0" => self.k0.clone(),
            "M_vol" | "M" => self.m_vol.clone(),
            "S" | "system" => self.system.clone(),
            "M_bnd" => CsrMatrix::from_diagonal(&self.m_bnd),
            "K_bnd" => self.k_bnd.clone(),
            "D_bnd" => CsrMatrix::from_diagonal(&self.d_bnd),
            "Beta_bnd" => CsrMatrix::from_diagonal(&self.beta_bnd),
            "trace" => {
                let mut b = TripletBuilder::new(nb, self.num_dofs());
                for (k, &v) in self.boundary.trace_map.iter().enumerate() {
                    b.push(k, v, 1.0);
                }
                b.build()
            }
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown matrix `{other}` (expected K, K1, K0, M_vol, S, M_bnd, K_bnd, D_bnd, Beta_bnd, trace)"
                )))
            }
        })
    }
}

/// Coordinate-format text: one `row col value` line per stored entry,
/// 0-based, values in round-trip precision.
pub fn to_coo(m: &CsrMatrix<f64>) -> String {
    let mut out = String::new();
    for i in 0..m.nrows {
        for (j, v) in m.row(i) {
            writeln!(out, "{i} {j} {v:.17e}").unwrap();
        }
    }
    out
}

/// Parses coordinate-format text produced by [`to_coo`].
pub fn from_coo(text: &str, nrows: usize, ncols: usize) -> Result<CsrMatrix<f64>> {
    let mut b = TripletBuilder::new(nrows, ncols);
    for (ln, line) in text.lines().enumerate() {
        let f: Vec<&str> = line.split_whitespace().collect();
        let bad = || Error::InvalidParameter(format!("COO line {}: expected `row col value`", ln + 1));
        if f.len() != 3 {
            return Err(bad());
        }
        let (i, j, v): (usize, usize, f64) =
            (f[0].parse().map_err(|_| bad())?, f[1].parse().map_err(|_| bad())?, f[2].parse().map_err(|_| bad())?);
        if i >= nrows || j >= ncols {
            return Err(bad());
        }
        b.push(i, j, v);
    }
    Ok(b.build())
}
