//! Triangulated 2-manifolds with boundary: validation, built-in geometries,
//! boundary extraction and the `MESH2` text format.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::tensor::Sym2;

/// Coordinate chart convention of a mesh.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChartTag {
    Flat,
    /// Azimuthal-equidistant chart of a geodesic cap on the unit sphere.
    PolarCap,
    Custom,
}

/// Triangulated compact orientable surface with a per-vertex metric.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    metric: Vec<Sym2>,
    chart: ChartTag,
}

impl Mesh {
    /// Builds and validates a mesh. A missing metric defaults to the identity.
    pub fn new(
        vertices: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        metric: Option<Vec<Sym2>>,
        chart: ChartTag,
    ) -> Result<Mesh> {
        let nv = vertices.len();
        let metric = match metric {
            Some(m) => {
                if m.len() != nv {
                    return Err(Error::DimensionMismatch { expected: nv, found: m.len() });
                }
                m
            }
            None => vec![Sym2::IDENTITY; nv],
        };
        let mesh = Mesh { vertices, triangles, metric, chart };
        mesh.validate()?;
        Ok(mesh)
    }

    fn validate(&self) -> Result<()> {
        let nv = self.vertices.len();
        if self.triangles.is_empty() {
            return Err(Error::MalformedMesh { line: 0, msg: "mesh has no triangles".into() });
        }
        for (t, tri) in self.triangles.iter().enumerate() {
            for &i in tri {
                if i >= nv {
                    return Err(Error::IndexOutOfRange { triangle: t, index: i });
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::DegenerateTriangle { triangle: t });
            }
            let area = self.chart_area(t);
            if area == 0.0 || !area.is_finite() {
                return Err(Error::DegenerateTriangle { triangle: t });
            }
            if area < 0.0 {
                return Err(Error::InvertedTriangle { triangle: t });
            }
        }
        for (v, g) in self.metric.iter().enumerate() {
            if !g.is_positive_definite() {
                return Err(Error::MetricNotPositive { vertex: v });
            }
        }
        // Directed edges: each at most once (orientability), each undirected
        // edge in at most two triangles.
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        let mut undirected: HashMap<(usize, usize), usize> = HashMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let count = undirected.entry((a.min(b), a.max(b))).or_insert(0);
                *count += 1;
                if *count > 2 {
                    return Err(Error::NonManifoldEdge { triangle: t, a, b });
                }
                if directed.insert((a, b), t).is_some() {
                    return Err(Error::InconsistentOrientation { triangle: t, a, b });
                }
            }
        }
        // Connectivity through shared edges.
        let adjacency = self.triangle_adjacency();
        let mut seen = vec![false; self.triangles.len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(t) = queue.pop_front() {
            for &n in &adjacency[t] {
                if !seen[n] {
                    seen[n] = true;
                    queue.push_back(n);
                }
            }
        }
        if let Some(t) = seen.iter().position(|s| !s) {
            return Err(Error::Disconnected { triangle: t });
        }
        Ok(())
    }

    fn triangle_adjacency(&self) -> Vec<Vec<usize>> {
        let mut by_edge: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                by_edge.entry((a.min(b), a.max(b))).or_default().push(t);
            }
        }
        let mut adj = vec![Vec::new(); self.triangles.len()];
        for ts in by_edge.values() {
            if ts.len() == 2 {
                adj[ts[0]].push(ts[1]);
                adj[ts[1]].push(ts[0]);
            }
        }
        adj
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn metric(&self) -> &[Sym2] {
        &self.metric
    }

    pub fn chart(&self) -> ChartTag {
        self.chart
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// Signed chart area of triangle `t`.
    pub fn chart_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        let (p, q, r) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]))
    }

    pub fn barycenter(&self, t: usize) -> [f64; 2] {
        let [a, b, c] = self.triangles[t];
        let (p, q, r) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        [(p[0] + q[0] + r[0]) / 3.0, (p[1] + q[1] + r[1]) / 3.0]
    }

    /// Vertex metric averaged over the triangle's corners (linear
    /// interpolation evaluated at the barycenter).
    pub fn barycenter_metric(&self, t: usize) -> Sym2 {
        let [a, b, c] = self.triangles[t];
        Sym2::mean(&[self.metric[a], self.metric[b], self.metric[c]])
    }

    /// Sorted list of undirected edges.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut edges: Vec<(usize, usize)> = self
            .triangles
            .iter()
            .flat_map(|tri| (0..3).map(move |k| (tri[k].min(tri[(k + 1) % 3]), tri[k].max(tri[(k + 1) % 3]))))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        edges
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices() as i64 - self.edges().len() as i64 + self.num_triangles() as i64
    }

    /// Longest edge measured in chart coordinates.
    pub fn max_edge_length(&self) -> f64 {
        self.edges()
            .iter()
            .map(|&(a, b)| {
                let (p, q) = (self.vertices[a], self.vertices[b]);
                ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// Length of the chart segment `a -> b` measured in the average of the
    /// endpoint metric tensors.
    pub fn edge_length(&self, a: usize, b: usize) -> f64 {
        let (p, q) = (self.vertices[a], self.vertices[b]);
        let e = [q[0] - p[0], q[1] - p[1]];
        Sym2::mean(&[self.metric[a], self.metric[b]]).quad(e).sqrt()
    }

    /// Stable content hash over coordinates, triangles and metric.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.to_document().as_bytes());
        hex::encode(&hasher.finalize()[..8])
    }

    /// Serializes to the `MESH2` text format. The metric block is written
    /// only when some vertex carries a non-identity tensor.
    pub fn to_document(&self) -> String {
        let with_metric = self.metric.iter().any(|g| *g != Sym2::IDENTITY);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "MESH2 {} {}{}",
            self.vertices.len(),
            self.triangles.len(),
            if with_metric { " METRIC" } else { "" }
        );
        for (v, g) in self.vertices.iter().zip(&self.metric) {
            if with_metric {
                let _ = writeln!(out, "{:.16e} {:.16e} {:.16e} {:.16e} {:.16e}", v[0], v[1], g.xx, g.xy, g.yy);
            } else {
                let _ = writeln!(out, "{:.16e} {:.16e}", v[0], v[1]);
            }
        }
        for t in &self.triangles {
            let _ = writeln!(out, "{} {} {}", t[0], t[1], t[2]);
        }
        out
    }

    /// Parses a `MESH2` document.
    pub fn from_document(doc: &str) -> Result<Mesh> {
        let mut lines = doc
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines.next().ok_or(Error::MalformedMesh { line: 0, msg: "empty document".into() })?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let bad = |line: usize, msg: &str| Error::MalformedMesh { line, msg: msg.to_string() };
        if fields.len() < 3 || fields[0] != "MESH2" {
            return Err(bad(hline, "expected header `MESH2 <nv> <nt> [METRIC]`"));
        }
        let nv: usize = fields[1].parse().map_err(|_| bad(hline, "vertex count"))?;
        let nt: usize = fields[2].parse().map_err(|_| bad(hline, "triangle count"))?;
        let with_metric = match fields.get(3) {
            None => false,
            Some(&"METRIC") => true,
            Some(_) => return Err(bad(hline, "unknown header flag")),
        };
        let mut vertices = Vec::with_capacity(nv);
        let mut metric = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (ln, l) = lines.next().ok_or(bad(0, "truncated vertex block"))?;
            let nums: Vec<f64> = l
                .split_whitespace()
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad(ln, "invalid number"))?;
            let expected = if with_metric { 5 } else { 2 };
            if nums.len() != expected {
                return Err(bad(ln, &format!("expected {expected} numbers per vertex")));
            }
            if nums.iter().any(|x| !x.is_finite()) {
                return Err(bad(ln, "non-finite number"));
            }
            vertices.push([nums[0], nums[1]]);
            if with_metric {
                metric.push(Sym2::new(nums[2], nums[3], nums[4]));
            }
        }
        let mut triangles = Vec::with_capacity(nt);
        for _ in 0..nt {
            let (ln, l) = lines.next().ok_or(bad(0, "truncated triangle block"))?;
            let idx: Vec<usize> = l
                .split_whitespace()
                .map(|s| s.parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad(ln, "invalid vertex index"))?;
            if idx.len() != 3 {
                return Err(bad(ln, "expected 3 indices per triangle"));
            }
            triangles.push([idx[0], idx[1], idx[2]]);
        }
        if let Some((ln, _)) = lines.next() {
            return Err(bad(ln, "trailing content"));
        }
        let chart = if with_metric { ChartTag::Custom } else { ChartTag::Flat };
        Mesh::new(vertices, triangles, with_metric.then_some(metric), chart)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Mesh> {
        Mesh::from_document(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_document())?;
        Ok(())
    }
}

/// Parses a mesh document (see [`Mesh::from_document`]).
pub fn load_mesh(document: &str) -> Result<Mesh> {
    Mesh::from_document(document)
}

/// Ordered boundary loops of a mesh with arc-length coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryMesh {
    /// Each loop lists mesh-vertex indices with the domain on the left.
    pub loops: Vec<Vec<usize>>,
    /// Cumulative arc length per boundary dof (concatenated loop order).
    pub arc_coords: Vec<f64>,
    /// Total length of each loop.
    pub loop_lengths: Vec<f64>,
    /// Boundary dof -> mesh vertex.
    pub trace_map: Vec<usize>,
}

impl BoundaryMesh {
    pub fn len(&self) -> usize {
        self.trace_map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trace_map.is_empty()
    }

    /// Boundary dof ranges of each loop in concatenated numbering.
    pub fn loop_ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut start = 0;
        self.loops
            .iter()
            .map(|l| {
                let r = start..start + l.len();
                start += l.len();
                r
            })
            .collect()
    }

    /// Boundary edges as pairs of boundary dofs `(b, next(b))`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.len());
        for r in self.loop_ranges() {
            let n = r.len();
            for k in 0..n {
                out.push((r.start + k, r.start + (k + 1) % n));
            }
        }
        out
    }
}

/// Extracts the boundary loops. Each loop starts at its lowest vertex index
/// and runs with the domain on the left; loops are ordered by starting vertex.
pub fn extract_boundary(mesh: &Mesh) -> Result<BoundaryMesh> {
    let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
    for tri in mesh.triangles() {
        for k in 0..3 {
            *directed.entry((tri[k], tri[(k + 1) % 3])).or_insert(0) += 1;
        }
    }
    let mut next: BTreeMap<usize, usize> = BTreeMap::new();
    for &(a, b) in directed.keys() {
        if !directed.contains_key(&(b, a)) && next.insert(a, b).is_some() {
            return Err(Error::NonSimpleBoundary { vertex: a });
        }
    }
    if next.is_empty() {
        return Err(Error::EmptyBoundary);
    }
    let mut visited: BTreeMap<usize, bool> = next.keys().map(|&k| (k, false)).collect();
    let mut loops = Vec::new();
    while let Some((&start, _)) = visited.iter().find(|(_, &v)| !v) {
        let mut lp = vec![start];
        visited.insert(start, true);
        let mut cur = next[&start];
        while cur != start {
            match visited.get_mut(&cur) {
                Some(v) if !*v => *v = true,
                _ => return Err(Error::NonSimpleBoundary { vertex: cur }),
            }
            lp.push(cur);
            cur = *next.get(&cur).ok_or(Error::NonSimpleBoundary { vertex: cur })?;
        }
        loops.push(lp);
    }
    let mut arc_coords = Vec::new();
    let mut loop_lengths = Vec::new();
    let mut trace_map = Vec::new();
    for lp in &loops {
        let mut s = 0.0;
        for (k, &v) in lp.iter().enumerate() {
            arc_coords.push(s);
            trace_map.push(v);
            s += mesh.edge_length(v, lp[(k + 1) % lp.len()]);
        }
        loop_lengths.push(s);
    }
    Ok(BoundaryMesh { loops, arc_coords, loop_lengths, trace_map })
}

/// Built-in test geometries.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BuiltinKind {
    /// Unit disk, flat metric.
    Disk,
    /// Annulus `inner < r < 1`, flat metric.
    Annulus { inner: f64 },
    /// Geodesic cap of the unit sphere with the given opening angle.
    SphericalCap { angle: f64 },
}

/// Number of rings of the base (refinement 0) disk mesh.
const BASE_RINGS: usize = 5;

/// Generates a built-in mesh. Mesh size halves with every refinement level;
/// refinement 3 of the disk has 4921 vertices.
pub fn builtin_mesh(kind: BuiltinKind, refinement: u32) -> Result<Mesh> {
    if refinement > 10 {
        return Err(Error::InvalidParameter(format!("refinement {refinement} too large")));
    }
    let n = BASE_RINGS << refinement;
    match kind {
        BuiltinKind::Disk => {
            let (v, t) = disk_rings(n, 1.0);
            Mesh::new(v, t, None, ChartTag::Flat)
        }
        BuiltinKind::Annulus { inner } => {
            if !(inner > 0.0 && inner < 1.0) {
                return Err(Error::InvalidParameter(format!("annulus inner radius {inner} not in (0, 1)")));
            }
            let layers = (((1.0 - inner) * n as f64).round() as usize).max(1);
            let radii: Vec<f64> = (0..=layers).map(|i| inner + (1.0 - inner) * i as f64 / layers as f64).collect();
            let counts: Vec<usize> = radii
                .iter()
                .map(|r| ((2.0 * std::f64::consts::PI * r * n as f64).round() as usize).max(6))
                .collect();
            let (v, t) = ring_mesh(None, &radii, &counts);
            Mesh::new(v, t, None, ChartTag::Flat)
        }
        BuiltinKind::SphericalCap { angle } => {
            if !(angle > 0.0 && angle < std::f64::consts::PI) {
                return Err(Error::InvalidParameter(format!("cap opening angle {angle} not in (0, pi)")));
            }
            let (v, t) = disk_rings(n, angle);
            let metric = v.iter().map(|p| sphere_metric(*p)).collect();
            Mesh::new(v, t, Some(metric), ChartTag::PolarCap)
        }
    }
}

/// Round-sphere metric in the azimuthal-equidistant chart: the chart radius
/// is the polar angle, `g = e_r e_r^T + (sin r / r)^2 e_t e_t^T`. The factor
/// `sin r / r` extends smoothly to the pole where `g = I`.
pub fn sphere_metric(p: [f64; 2]) -> Sym2 {
    let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
    if r < 1e-12 {
        return Sym2::IDENTITY;
    }
    let s2 = (r.sin() / r).powi(2);
    let (c, s) = (p[0] / r, p[1] / r);
    Sym2::new(c * c + s2 * s * s, (1.0 - s2) * c * s, s * s + s2 * c * c)
}

fn disk_rings(n: usize, radius: f64) -> (Vec<[f64; 2]>, Vec<[usize; 3]>) {
    let radii: Vec<f64> = (1..=n).map(|i| radius * i as f64 / n as f64).collect();
    let counts: Vec<usize> = (1..=n).map(|i| 6 * i).collect();
    ring_mesh(Some([0.0, 0.0]), &radii, &counts)
}

/// Triangulates concentric rings by zipping neighbouring rings together,
/// then applies Delaunay edge flips in the chart.
fn ring_mesh(center: Option<[f64; 2]>, radii: &[f64], counts: &[usize]) -> (Vec<[f64; 2]>, Vec<[usize; 3]>) {
    let mut vertices = Vec::new();
    let mut rings: Vec<Vec<usize>> = Vec::new();
    if let Some(c) = center {
        vertices.push(c);
        rings.push(vec![0]);
    }
    for (&r, &m) in radii.iter().zip(counts) {
        let ring = (0..m)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
                vertices.push([r * t.cos(), r * t.sin()]);
                vertices.len() - 1
            })
            .collect();
        rings.push(ring);
    }
    let dist = |a: usize, b: usize| {
        let (p, q): ([f64; 2], [f64; 2]) = (vertices[a], vertices[b]);
        ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
    };
    let mut triangles = Vec::new();
    for w in rings.windows(2) {
        let (inner, outer) = (&w[0], &w[1]);
        let (ni, no) = (inner.len(), outer.len());
        if ni == 1 {
            for k in 0..no {
                triangles.push([inner[0], outer[k], outer[(k + 1) % no]]);
            }
            continue;
        }
        let (mut a, mut b) = (0, 0);
        while a < ni || b < no {
            let (ia, ib) = (inner[a % ni], outer[b % no]);
            let advance_outer = if a >= ni {
                true
            } else if b >= no {
                false
            } else {
                dist(ia, outer[(b + 1) % no]) <= dist(inner[(a + 1) % ni], ib)
            };
            if advance_outer {
                triangles.push([ia, ib, outer[(b + 1) % no]]);
                b += 1;
            } else {
                triangles.push([ia, ib, inner[(a + 1) % ni]]);
                a += 1;
            }
        }
    }
    for t in triangles.iter_mut() {
        if signed_area(&vertices, *t) < 0.0 {
            t.swap(1, 2);
        }
    }
    delaunay_flips(&vertices, &mut triangles);
    (vertices, triangles)
}

fn signed_area(v: &[[f64; 2]], t: [usize; 3]) -> f64 {
    let (p, q, r) = (v[t[0]], v[t[1]], v[t[2]]);
    0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]))
}

fn angle_at(v: &[[f64; 2]], apex: usize, a: usize, b: usize) -> f64 {
    let (o, p, q) = (v[apex], v[a], v[b]);
    let (u, w) = ([p[0] - o[0], p[1] - o[1]], [q[0] - o[0], q[1] - o[1]]);
    let cross = u[0] * w[1] - u[1] * w[0];
    let dot = u[0] * w[0] + u[1] * w[1];
    cross.abs().atan2(dot)
}

/// Lawson flips until every interior edge is locally Delaunay.
fn delaunay_flips(v: &[[f64; 2]], tris: &mut [[usize; 3]]) {
    const SLACK: f64 = 1e-10;
    for _ in 0..100 {
        let mut by_edge: BTreeMap<(usize, usize), Vec<(usize, usize)>> = BTreeMap::new();
        for (t, tri) in tris.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                by_edge.entry((a.min(b), a.max(b))).or_default().push((t, (k + 2) % 3));
            }
        }
        let mut touched = vec![false; tris.len()];
        let mut flipped = false;
        for (&(a, b), owners) in &by_edge {
            if owners.len() != 2 {
                continue;
            }
            let ((t1, k1), (t2, k2)) = (owners[0], owners[1]);
            if touched[t1] || touched[t2] {
                continue;
            }
            let (c, d) = (tris[t1][k1], tris[t2][k2]);
            if angle_at(v, c, a, b) + angle_at(v, d, a, b) <= std::f64::consts::PI + SLACK {
                continue;
            }
            let n1 = [c, d, a];
            let n2 = [d, c, b];
            let (mut n1, mut n2) = (n1, n2);
            if signed_area(v, n1) < 0.0 {
                n1.swap(1, 2);
            }
            if signed_area(v, n2) < 0.0 {
                n2.swap(1, 2);
            }
            if signed_area(v, n1) <= 0.0 || signed_area(v, n2) <= 0.0 {
                continue;
            }
            tris[t1] = n1;
            tris[t2] = n2;
            touched[t1] = true;
            touched[t2] = true;
            flipped = true;
        }
        if !flipped {
            break;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn single_triangle() -> Mesh {
        Mesh::from_document("MESH2 3 1\n0 0\n1 0\n0 1\n0 1 2\n").unwrap()
    }

    #[test]
    fn single_triangle_defaults_to_identity_metric() {
        let m = single_triangle();
        assert!(m.metric().iter().all(|g| *g == Sym2::IDENTITY));
        let b = extract_boundary(&m).unwrap();
        assert_eq!(b.loops, vec![vec![0, 1, 2]]);
        assert_eq!(b.edges().len(), 3);
        assert_eq!(m.chart(), ChartTag::Flat);
    }

    #[test]
    fn degenerate_triangle_rejected() {
        let err = Mesh::from_document("MESH2 3 1\n0 0\n1 0\n0 1\n0 1 1\n").unwrap_err();
        assert!(matches!(err, Error::DegenerateTriangle { triangle: 0 }));
    }

    #[test]
    fn inverted_triangle_rejected() {
        let err = Mesh::from_document("MESH2 3 1\n0 0\n0 1\n1 0\n0 1 2\n").unwrap_err();
        assert!(matches!(err, Error::InvertedTriangle { triangle: 0 }));
    }

    #[test]
    fn non_manifold_edge_rejected() {
        let doc = "MESH2 5 3\n0 0\n1 0\n0 1\n0 -1\n1 1\n0 1 2\n1 0 3\n0 1 4\n";
        let err = Mesh::from_document(doc).unwrap_err();
        assert!(matches!(err, Error::NonManifoldEdge { .. } | Error::InconsistentOrientation { .. }), "{err}");
        let doc = "MESH2 6 3\n0 0\n1 0\n0 1\n0.5 -1\n0.3 0.2\n0.6 -0.3\n0 1 2\n1 0 3\n1 0 5\n";
        let err = Mesh::from_document(doc).unwrap_err();
        assert!(matches!(err, Error::NonManifoldEdge { triangle: 2, .. }), "{err}");
    }

    #[test]
    fn non_positive_metric_rejected() {
        let doc = "MESH2 3 1 METRIC\n0 0 1 0 1\n1 0 1 2 1\n0 1 1 0 1\n0 1 2\n";
        let err = Mesh::from_document(doc).unwrap_err();
        assert!(matches!(err, Error::MetricNotPositive { vertex: 1 }));
    }

    #[test]
    fn malformed_documents() {
        assert!(matches!(Mesh::from_document("MESH3 3 1"), Err(Error::MalformedMesh { .. })));
        assert!(matches!(Mesh::from_document("MESH2 3 1\n0 0\n1 0\n"), Err(Error::MalformedMesh { .. })));
        assert!(matches!(Mesh::from_document("MESH2 3 1\n0 0\n1 x\n0 1\n0 1 2\n"), Err(Error::MalformedMesh { line: 3, .. })));
        assert!(matches!(Mesh::from_document("MESH2 3 1\n0 0\n1 0\n0 1\n0 1 7\n"), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn disconnected_mesh_rejected() {
        let doc = "MESH2 6 2\n0 0\n1 0\n0 1\n5 5\n6 5\n5 6\n0 1 2\n3 4 5\n";
        assert!(matches!(Mesh::from_document(doc), Err(Error::Disconnected { triangle: 1 })));
    }

    #[test]
    fn builtin_topology_and_counts() {
        let disk = builtin_mesh(BuiltinKind::Disk, 0).unwrap();
        assert_eq!(disk.euler_characteristic(), 1);
        assert_eq!(extract_boundary(&disk).unwrap().loops.len(), 1);
        assert_eq!(builtin_mesh(BuiltinKind::Disk, 3).unwrap().num_vertices(), 4921);
        let ann = builtin_mesh(BuiltinKind::Annulus { inner: 0.5 }, 1).unwrap();
        assert_eq!(ann.euler_characteristic(), 0);
        let cap = builtin_mesh(BuiltinKind::SphericalCap { angle: PI / 2.0 }, 1).unwrap();
        assert_eq!(cap.euler_characteristic(), 1);
        assert_eq!(cap.chart(), ChartTag::PolarCap);
    }

    #[test]
    fn annulus_loop_lengths() {
        let ann = builtin_mesh(BuiltinKind::Annulus { inner: 0.5 }, 1).unwrap();
        let b = extract_boundary(&ann).unwrap();
        assert_eq!(b.loops.len(), 2);
        let mut lengths = b.loop_lengths.clone();
        lengths.sort_by(f64::total_cmp);
        let h = ann.max_edge_length();
        assert!((lengths[1] - 2.0 * PI).abs() < 2.0 * h * h, "{lengths:?}");
        assert!((lengths[0] - PI).abs() < 2.0 * h * h, "{lengths:?}");
    }

    #[test]
    fn cap_boundary_is_geodesic_circle() {
        let cap = builtin_mesh(BuiltinKind::SphericalCap { angle: PI / 2.0 }, 2).unwrap();
        let b = extract_boundary(&cap).unwrap();
        let h = cap.max_edge_length();
        assert!((b.loop_lengths[0] - 2.0 * PI).abs() < h * h, "{}", b.loop_lengths[0]);
    }

    #[test]
    fn disk_perimeter_refinement_3() {
        let disk = builtin_mesh(BuiltinKind::Disk, 3).unwrap();
        let b = extract_boundary(&disk).unwrap();
        assert!((b.loop_lengths[0] / (2.0 * PI) - 1.0).abs() < 0.005);
    }

    #[test]
    fn boundary_orientation_and_start() {
        let disk = builtin_mesh(BuiltinKind::Disk, 1).unwrap();
        let b = extract_boundary(&disk).unwrap();
        let lp = &b.loops[0];
        assert_eq!(lp[0], *lp.iter().min().unwrap());
        // Domain on the left means counter-clockwise traversal of the outer circle.
        let (p, q) = (disk.vertices()[lp[0]], disk.vertices()[lp[1]]);
        assert!(p[0] * q[1] - p[1] * q[0] > 0.0);
        assert!(b.arc_coords.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(extract_boundary(&disk).unwrap(), b);
    }

    #[test]
    fn refinement_shrinks_edges() {
        for kind in [BuiltinKind::Disk, BuiltinKind::Annulus { inner: 0.5 }, BuiltinKind::SphericalCap { angle: 1.0 }] {
            for r in 0..3 {
                let h0 = builtin_mesh(kind, r).unwrap().max_edge_length();
                let h1 = builtin_mesh(kind, r + 1).unwrap().max_edge_length();
                assert!(h1 <= 0.6 * h0, "{kind:?} r={r}: {h0} -> {h1}");
            }
        }
    }

    #[test]
    fn invalid_shape_parameters() {
        assert!(builtin_mesh(BuiltinKind::Annulus { inner: 1.5 }, 0).is_err());
        assert!(builtin_mesh(BuiltinKind::SphericalCap { angle: 4.0 }, 0).is_err());
    }

    #[test]
    fn document_round_trip() {
        let cap = builtin_mesh(BuiltinKind::SphericalCap { angle: 1.2 }, 1).unwrap();
        let back = Mesh::from_document(&cap.to_document()).unwrap();
        assert_eq!(back.triangles(), cap.triangles());
        for (a, b) in back.vertices().iter().zip(cap.vertices()) {
            assert!((a[0] - b[0]).abs() <= 1e-15 && (a[1] - b[1]).abs() <= 1e-15);
        }
        assert_eq!(back.metric(), cap.metric());
    }

    #[test]
    fn sphere_metric_limits() {
        assert_eq!(sphere_metric([0.0, 0.0]), Sym2::IDENTITY);
        let g = sphere_metric([PI / 2.0, 0.0]);
        assert!((g.xx - 1.0).abs() < 1e-15);
        assert!((g.yy - (2.0 / PI).powi(2)).abs() < 1e-15);
    }
}
