//! Conforming triangular meshes of the computational cross-section.
//!
//! A [`Mesh`] covers the whole domain: air, inductor cross-sections and the
//! workpiece. Every triangle carries a [`Region`] label and every edge on the
//! domain boundary or on the workpiece surface carries exactly one
//! [`EdgeTag`]. The electromagnetic potential lives on the full mesh; the
//! temperature and austenite fraction live on the workpiece [`submesh`].

mod build;
mod format;
pub mod polygon;
mod refine;
mod submesh;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use build::{build_domain, BoxExtent, BoxSide, DomainSpec};
pub use format::{mesh2d_string, parse_mesh2d, read_mesh2d, write_mesh2d};
pub use refine::{levels_for_target, refine_boundary_layer};
pub use submesh::{submesh, Submesh};

pub type Point = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Region {
    Air,
    Coil,
    Workpiece,
}

impl Region {
    pub fn label(self) -> &'static str {
        match self {
            Region::Air => "AIR",
            Region::Coil => "COIL",
            Region::Workpiece => "WORKPIECE",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s {
            "AIR" => Some(Region::Air),
            "COIL" => Some(Region::Coil),
            "WORKPIECE" => Some(Region::Workpiece),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EdgeTag {
    /// Outer boundary of the computational box.
    Outer,
    /// Interface between the workpiece and its surroundings.
    WorkpieceSurface,
    /// Symmetry cut.
    Symmetry,
}

impl EdgeTag {
    pub fn label(self) -> &'static str {
        match self {
            EdgeTag::Outer => "OUTER",
            EdgeTag::WorkpieceSurface => "WORKPIECE_SURFACE",
            EdgeTag::Symmetry => "SYMMETRY",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s {
            "OUTER" => Some(EdgeTag::Outer),
            "WORKPIECE_SURFACE" => Some(EdgeTag::WorkpieceSurface),
            "SYMMETRY" => Some(EdgeTag::Symmetry),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryEdge {
    pub nodes: [usize; 2],
    pub tag: EdgeTag,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<Point>,
    /// Counter-clockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    pub regions: Vec<Region>,
    pub boundary_edges: Vec<BoundaryEdge>,
}

pub(crate) fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Mesh {
    /// Builds a mesh and checks every structural invariant.
    pub fn new(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        regions: Vec<Region>,
        boundary_edges: Vec<BoundaryEdge>,
    ) -> Result<Self> {
        let mesh = Mesh {
            vertices,
            triangles,
            regions,
            boundary_edges,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    /// Structured `nx` × `ny` grid of right triangles on a rectangle. All
    /// triangles get `region`; every boundary edge is tagged `Outer`.
    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64, nx: usize, ny: usize, region: Region) -> Result<Self> {
        if nx == 0 || ny == 0 || !(x1 > x0) || !(y1 > y0) {
            return Err(Error::InvalidArgument("rectangle needs positive extents and cell counts".into()));
        }
        let idx = |i: usize, j: usize| j * (nx + 1) + i;
        let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                vertices.push([
                    x0 + (x1 - x0) * i as f64 / nx as f64,
                    y0 + (y1 - y0) * j as f64 / ny as f64,
                ]);
            }
        }
        let mut triangles = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            }
        }
        let mut boundary_edges = Vec::new();
        for i in 0..nx {
            boundary_edges.push(BoundaryEdge { nodes: [idx(i, 0), idx(i + 1, 0)], tag: EdgeTag::Outer });
            boundary_edges.push(BoundaryEdge { nodes: [idx(i + 1, ny), idx(i, ny)], tag: EdgeTag::Outer });
        }
        for j in 0..ny {
            boundary_edges.push(BoundaryEdge { nodes: [idx(nx, j), idx(nx, j + 1)], tag: EdgeTag::Outer });
            boundary_edges.push(BoundaryEdge { nodes: [idx(0, j + 1), idx(0, j)], tag: EdgeTag::Outer });
        }
        let regions = vec![region; triangles.len()];
        Mesh::new(vertices, triangles, regions, boundary_edges)
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn signed_area(&self, t: usize) -> f64 {
        let [p0, p1, p2] = self.triangle_points(t);
        0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]))
    }

    pub fn area(&self, t: usize) -> f64 {
        self.signed_area(t).abs()
    }

    pub fn centroid(&self, t: usize) -> Point {
        let [p0, p1, p2] = self.triangle_points(t);
        [(p0[0] + p1[0] + p2[0]) / 3.0, (p0[1] + p1[1] + p2[1]) / 3.0]
    }

    /// Gradients of the three P1 hat functions on triangle `t` (constant per triangle).
    pub fn hat_gradients(&self, t: usize) -> [[f64; 2]; 3] {
        let [p0, p1, p2] = self.triangle_points(t);
        let twice = 2.0 * self.signed_area(t);
        [
            [(p1[1] - p2[1]) / twice, (p2[0] - p1[0]) / twice],
            [(p2[1] - p0[1]) / twice, (p0[0] - p2[0]) / twice],
            [(p0[1] - p1[1]) / twice, (p1[0] - p0[0]) / twice],
        ]
    }

    /// Gradient of a nodal P1 field on triangle `t`.
    pub fn field_gradient(&self, t: usize, field: &[f64]) -> [f64; 2] {
        let g = self.hat_gradients(t);
        let tri = self.triangles[t];
        let mut out = [0.0; 2];
        for k in 0..3 {
            out[0] += field[tri[k]] * g[k][0];
            out[1] += field[tri[k]] * g[k][1];
        }
        out
    }

    pub fn region_area(&self, region: Region) -> f64 {
        (0..self.num_triangles())
            .filter(|&t| self.regions[t] == region)
            .map(|t| self.area(t))
            .sum()
    }

    pub fn total_area(&self) -> f64 {
        (0..self.num_triangles()).map(|t| self.area(t)).sum()
    }

    pub fn count_region(&self, region: Region) -> usize {
        self.regions.iter().filter(|&&r| r == region).count()
    }

    pub fn edge_length(&self, a: usize, b: usize) -> f64 {
        let (p, q) = (self.vertices[a], self.vertices[b]);
        ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
    }

    /// Map from undirected edge to the triangles that contain it, in triangle order.
    pub fn edge_triangles(&self) -> BTreeMap<(usize, usize), Vec<usize>> {
        let mut map: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                map.entry(edge_key(tri[k], tri[(k + 1) % 3])).or_default().push(t);
            }
        }
        map
    }

    pub fn edges_with_tag(&self, tag: EdgeTag) -> impl Iterator<Item = &BoundaryEdge> + '_ {
        self.boundary_edges.iter().filter(move |e| e.tag == tag)
    }

    pub fn has_tag(&self, tag: EdgeTag) -> bool {
        self.edges_with_tag(tag).next().is_some()
    }

    /// Sorted, deduplicated vertex indices lying on edges with `tag`.
    pub fn nodes_with_tag(&self, tag: EdgeTag) -> Vec<usize> {
        let mut nodes: Vec<usize> = self.edges_with_tag(tag).flat_map(|e| e.nodes).collect();
        nodes.sort_unstable();
        nodes.dedup();
        nodes
    }

    /// Smallest interior angle over all triangles, in radians.
    pub fn min_angle(&self) -> f64 {
        (0..self.num_triangles())
            .map(|t| triangle_min_angle(self.triangle_points(t)))
            .fold(f64::INFINITY, f64::min)
    }

    /// Longest edge over triangles having at least one edge tagged `tag`.
    pub fn max_edge_near(&self, tag: EdgeTag) -> f64 {
        let tagged: std::collections::BTreeSet<(usize, usize)> =
            self.edges_with_tag(tag).map(|e| edge_key(e.nodes[0], e.nodes[1])).collect();
        let mut h: f64 = 0.0;
        for tri in &self.triangles {
            let touches = (0..3).any(|k| tagged.contains(&edge_key(tri[k], tri[(k + 1) % 3])));
            if touches {
                for k in 0..3 {
                    h = h.max(self.edge_length(tri[k], tri[(k + 1) % 3]));
                }
            }
        }
        h
    }

    pub fn max_edge(&self) -> f64 {
        let mut h: f64 = 0.0;
        for tri in &self.triangles {
            for k in 0..3 {
                h = h.max(self.edge_length(tri[k], tri[(k + 1) % 3]));
            }
        }
        h
    }

    /// Lumped (row-summed) P1 mass of each vertex: one third of the adjacent triangle areas.
    pub fn lumped_areas(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.num_vertices()];
        for t in 0..self.num_triangles() {
            let a = self.area(t) / 3.0;
            for &v in &self.triangles[t] {
                m[v] += a;
            }
        }
        m
    }

    /// Locates the triangle containing `p` and returns its barycentric weights.
    pub fn locate(&self, p: Point) -> Option<(usize, [f64; 3])> {
        const SLACK: f64 = 1e-12;
        for t in 0..self.num_triangles() {
            let [a, b, c] = self.triangle_points(t);
            let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
            let l1 = ((p[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (p[1] - a[1])) / det;
            let l2 = ((b[0] - a[0]) * (p[1] - a[1]) - (p[0] - a[0]) * (b[1] - a[1])) / det;
            let l0 = 1.0 - l1 - l2;
            if l0 >= -SLACK && l1 >= -SLACK && l2 >= -SLACK {
                return Some((t, [l0, l1, l2]));
            }
        }
        None
    }

    /// Checks conformity, orientation, region separation and boundary tagging.
    pub fn validate(&self) -> Result<()> {
        let nv = self.num_vertices();
        if self.regions.len() != self.triangles.len() {
            return Err(Error::MeshInvariant(format!(
                "{} region labels for {} triangles",
                self.regions.len(),
                self.triangles.len()
            )));
        }
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= nv) {
                return Err(Error::MeshInvariant(format!("triangle {t} references a missing vertex")));
            }
            if !(self.signed_area(t) > 0.0) {
                return Err(Error::MeshInvariant(format!("triangle {t} has nonpositive signed area")));
            }
        }
        let edges = self.edge_triangles();
        let mut tagged: BTreeMap<(usize, usize), EdgeTag> = BTreeMap::new();
        for e in &self.boundary_edges {
            let key = edge_key(e.nodes[0], e.nodes[1]);
            if !edges.contains_key(&key) {
                return Err(Error::MeshInvariant(format!("tagged edge {key:?} is not a mesh edge")));
            }
            if tagged.insert(key, e.tag).is_some() {
                return Err(Error::MeshInvariant(format!("edge {key:?} carries more than one tag")));
            }
        }
        for (key, tris) in &edges {
            match tris.len() {
                1 => {
                    if !tagged.contains_key(key) {
                        return Err(Error::MeshInvariant(format!("boundary edge {key:?} has no tag")));
                    }
                }
                2 => {
                    let (r0, r1) = (self.regions[tris[0]], self.regions[tris[1]]);
                    if (r0 == Region::Coil && r1 == Region::Workpiece) || (r0 == Region::Workpiece && r1 == Region::Coil) {
                        return Err(Error::MeshInvariant(format!("coil and workpiece share edge {key:?}")));
                    }
                }
                n => {
                    return Err(Error::MeshInvariant(format!("edge {key:?} shared by {n} triangles")));
                }
            }
        }
        Ok(())
    }
}

pub(crate) fn triangle_min_angle(p: [Point; 3]) -> f64 {
    let mut min = f64::INFINITY;
    for k in 0..3 {
        let (a, b, c) = (p[k], p[(k + 1) % 3], p[(k + 2) % 3]);
        let u = [b[0] - a[0], b[1] - a[1]];
        let v = [c[0] - a[0], c[1] - a[1]];
        let cos = (u[0] * v[0] + u[1] * v[1]) / ((u[0].hypot(u[1])) * (v[0].hypot(v[1])));
        min = min.min(cos.clamp(-1.0, 1.0).acos());
    }
    min
}
