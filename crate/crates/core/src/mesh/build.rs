//! Domain meshing: constrained Delaunay triangulation of the outer box with
//! the workpiece and coil outlines as constraint edges, refined to a target
//! element size.

use std::collections::BTreeMap;

use spade::{AngleLimit, ConstrainedDelaunayTriangulation, Point2, RefinementParameters, Triangulation};

use super::polygon;
use super::{edge_key, BoundaryEdge, EdgeTag, Mesh, Point, Region};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxExtent {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl BoxExtent {
    pub fn corners(&self) -> [Point; 4] {
        [[self.x0, self.y0], [self.x1, self.y0], [self.x1, self.y1], [self.x0, self.y1]]
    }

    fn side_of(&self, p: Point) -> Option<BoxSide> {
        if p[0] == self.x0 {
            Some(BoxSide::Left)
        } else if p[0] == self.x1 {
            Some(BoxSide::Right)
        } else if p[1] == self.y0 {
            Some(BoxSide::Bottom)
        } else if p[1] == self.y1 {
            Some(BoxSide::Top)
        } else {
            None
        }
    }

    fn sides_of(&self, p: Point) -> Vec<BoxSide> {
        let mut s = Vec::new();
        if p[0] == self.x0 {
            s.push(BoxSide::Left);
        }
        if p[0] == self.x1 {
            s.push(BoxSide::Right);
        }
        if p[1] == self.y0 {
            s.push(BoxSide::Bottom);
        }
        if p[1] == self.y1 {
            s.push(BoxSide::Top);
        }
        s
    }

    /// Boundary-edge vertices of `mesh` lying exactly on `side`, sorted.
    pub fn side_nodes(&self, mesh: &Mesh, side: BoxSide) -> Vec<usize> {
        let on = |p: Point| match side {
            BoxSide::Left => p[0] == self.x0,
            BoxSide::Right => p[0] == self.x1,
            BoxSide::Bottom => p[1] == self.y0,
            BoxSide::Top => p[1] == self.y1,
        };
        let mut nodes: Vec<usize> = mesh
            .boundary_edges
            .iter()
            .flat_map(|e| e.nodes)
            .filter(|&i| on(mesh.vertices[i]))
            .collect();
        nodes.sort_unstable();
        nodes.dedup();
        nodes
    }

    fn contains_closed(&self, p: Point) -> bool {
        p[0] >= self.x0 && p[0] <= self.x1 && p[1] >= self.y0 && p[1] <= self.y1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoxSide {
    Left,
    Right,
    Bottom,
    Top,
}

impl BoxSide {
    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "left" => Some(BoxSide::Left),
            "right" => Some(BoxSide::Right),
            "bottom" => Some(BoxSide::Bottom),
            "top" => Some(BoxSide::Top),
            _ => None,
        }
    }
}

/// Geometry of the cross-section to be meshed.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    pub outer: BoxExtent,
    pub workpiece: Vec<Point>,
    pub coils: Vec<Vec<Point>>,
    /// Target element edge length in meters.
    pub h: f64,
    /// Box sides that are symmetry cuts. Polygons may touch these sides.
    pub symmetry: Vec<BoxSide>,
}

impl DomainSpec {
    pub fn validate(&self) -> Result<()> {
        let b = &self.outer;
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(Error::Geometry(format!("mesh size h must be positive, got {}", self.h)));
        }
        if !(b.x1 > b.x0 && b.y1 > b.y0) {
            return Err(Error::Geometry("outer box has nonpositive extent".into()));
        }
        let mut polys: Vec<(&str, &[Point])> = vec![("workpiece", &self.workpiece)];
        for c in &self.coils {
            polys.push(("coil", c));
        }
        for (name, poly) in &polys {
            if poly.len() < 3 {
                return Err(Error::Geometry(format!("{name} polygon needs at least three vertices")));
            }
            if poly.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
                return Err(Error::Geometry(format!("{name} polygon has non-finite coordinates")));
            }
            if polygon::area(poly) <= 0.0 {
                return Err(Error::Geometry(format!("{name} polygon has zero area")));
            }
            if polygon::is_self_intersecting(poly) {
                return Err(Error::Geometry(format!("{name} polygon is self-intersecting")));
            }
            for &p in poly.iter() {
                if !b.contains_closed(p) {
                    return Err(Error::Geometry(format!("{name} vertex {p:?} lies outside the outer box")));
                }
                for side in b.sides_of(p) {
                    if !self.symmetry.contains(&side) {
                        return Err(Error::Geometry(format!(
                            "{name} vertex {p:?} touches the {side:?} box side, which is not a symmetry cut"
                        )));
                    }
                }
            }
        }
        for i in 0..polys.len() {
            for j in (i + 1)..polys.len() {
                if polygon::polygons_overlap(polys[i].1, polys[j].1) {
                    return Err(Error::Geometry(format!("{} and {} polygons overlap", polys[i].0, polys[j].0)));
                }
            }
        }
        Ok(())
    }
}

#[derive(Default)]
struct PointPool {
    points: Vec<Point>,
    index: BTreeMap<(u64, u64), usize>,
}

impl PointPool {
    fn insert(&mut self, p: Point) -> usize {
        let key = (p[0].to_bits(), p[1].to_bits());
        if let Some(&i) = self.index.get(&key) {
            return i;
        }
        self.points.push(p);
        self.index.insert(key, self.points.len() - 1);
        self.points.len() - 1
    }
}

/// Splits `[a, b]` into pieces of length at most `h` and records the chain.
fn push_split_segment(pool: &mut PointPool, edges: &mut Vec<[usize; 2]>, a: Point, b: Point, h: f64) {
    // Canonical direction so a segment shared by two outlines splits identically.
    let (a, b) = if (a[0], a[1]) <= (b[0], b[1]) { (a, b) } else { (b, a) };
    let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
    let n = ((len / h).ceil() as usize).max(1);
    let mut prev = pool.insert(a);
    for k in 1..=n {
        let p = if k == n {
            b
        } else {
            let s = k as f64 / n as f64;
            [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]
        };
        let cur = pool.insert(p);
        edges.push([prev, cur]);
        prev = cur;
    }
}

/// Meshes the domain described by `spec`.
///
/// Polygon outlines become mesh edges, so every triangle lies in exactly one
/// region and region areas equal the polygon areas up to rounding.
pub fn build_domain(spec: &DomainSpec) -> Result<Mesh> {
    spec.validate()?;
    let b = spec.outer;
    let h = spec.h;
    let mut pool = PointPool::default();
    let mut edges: Vec<[usize; 2]> = Vec::new();

    let all_polys: Vec<&[Point]> =
        std::iter::once(spec.workpiece.as_slice()).chain(spec.coils.iter().map(|c| c.as_slice())).collect();

    // Box sides, broken at every polygon vertex lying on them so that shared
    // segments coincide with the polygon edges.
    let corners = b.corners();
    for k in 0..4 {
        let (a, c) = (corners[k], corners[(k + 1) % 4]);
        let horizontal = a[1] == c[1];
        let mut stops: Vec<Point> = vec![a, c];
        for poly in &all_polys {
            for &p in poly.iter() {
                let on = if horizontal {
                    p[1] == a[1] && p[0] > a[0].min(c[0]) && p[0] < a[0].max(c[0])
                } else {
                    p[0] == a[0] && p[1] > a[1].min(c[1]) && p[1] < a[1].max(c[1])
                };
                if on {
                    stops.push(p);
                }
            }
        }
        let dist = |p: &Point| (p[0] - a[0]).abs() + (p[1] - a[1]).abs();
        stops.sort_by(|p, q| dist(p).total_cmp(&dist(q)));
        stops.dedup();
        for w in stops.windows(2) {
            push_split_segment(&mut pool, &mut edges, w[0], w[1], h);
        }
    }
    for poly in &all_polys {
        for i in 0..poly.len() {
            push_split_segment(&mut pool, &mut edges, poly[i], poly[(i + 1) % poly.len()], h);
        }
    }
    for e in edges.iter_mut() {
        if e[0] > e[1] {
            e.swap(0, 1);
        }
    }
    edges.sort_unstable();
    edges.dedup();

    let vertices: Vec<Point2<f64>> = pool.points.iter().map(|p| Point2::new(p[0], p[1])).collect();
    let mut cdt = ConstrainedDelaunayTriangulation::<Point2<f64>>::bulk_load_cdt(vertices, edges)
        .map_err(|e| Error::Geometry(format!("triangulation failed: {e:?}")))?;
    let max_area = 3f64.sqrt() / 4.0 * h * h;
    let params = RefinementParameters::<f64>::new()
        .with_angle_limit(AngleLimit::from_deg(25.0))
        .with_max_allowed_area(max_area)
        .with_min_required_area(max_area * 1e-4)
        .with_max_additional_vertices(2_000_000);
    let outcome = cdt.refine(params);
    if !outcome.refinement_complete {
        return Err(Error::Geometry("mesh refinement did not complete".into()));
    }

    let mut points = vec![[0.0; 2]; cdt.num_vertices()];
    for v in cdt.vertices() {
        let p = v.position();
        points[v.fix().index()] = [p.x, p.y];
    }
    let mut triangles = Vec::with_capacity(cdt.num_inner_faces());
    for f in cdt.inner_faces() {
        let [a, bb, c] = f.vertices();
        triangles.push([a.fix().index(), bb.fix().index(), c.fix().index()]);
    }
    finish_mesh(points, triangles, spec)
}

/// Labels triangles by polygon membership and tags boundary/interface edges.
fn finish_mesh(points: Vec<Point>, mut triangles: Vec<[usize; 3]>, spec: &DomainSpec) -> Result<Mesh> {
    // Drop zero-area slivers spade may report on collinear hull points.
    triangles.retain(|t| {
        let (p0, p1, p2) = (points[t[0]], points[t[1]], points[t[2]]);
        (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]) > 0.0
    });
    let regions: Vec<Region> = triangles
        .iter()
        .map(|t| {
            let c = [
                (points[t[0]][0] + points[t[1]][0] + points[t[2]][0]) / 3.0,
                (points[t[0]][1] + points[t[1]][1] + points[t[2]][1]) / 3.0,
            ];
            if polygon::contains(&spec.workpiece, c) {
                Region::Workpiece
            } else if spec.coils.iter().any(|coil| polygon::contains(coil, c)) {
                Region::Coil
            } else {
                Region::Air
            }
        })
        .collect();

    let mut mesh = Mesh {
        vertices: points,
        triangles,
        regions,
        boundary_edges: Vec::new(),
    };
    let edge_tris = mesh.edge_triangles();
    let mut boundary_edges = Vec::new();
    for (&(a, b), tris) in &edge_tris {
        // Orient each tagged edge as it appears in its first triangle.
        let t0 = tris[0];
        let tri = mesh.triangles[t0];
        let oriented = (0..3)
            .map(|k| [tri[k], tri[(k + 1) % 3]])
            .find(|e| edge_key(e[0], e[1]) == (a, b))
            .unwrap_or([a, b]);
        match tris.len() {
            1 => {
                let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
                let side = spec
                    .outer
                    .sides_of(pa)
                    .into_iter()
                    .find(|s| spec.outer.sides_of(pb).contains(s))
                    .or_else(|| spec.outer.side_of(pa))
                    .ok_or_else(|| Error::MeshInvariant(format!("hull edge {:?} is not on the outer box", (a, b))))?;
                let tag = if spec.symmetry.contains(&side) {
                    EdgeTag::Symmetry
                } else {
                    EdgeTag::Outer
                };
                boundary_edges.push(BoundaryEdge { nodes: oriented, tag });
            }
            2 => {
                let w0 = mesh.regions[tris[0]] == Region::Workpiece;
                let w1 = mesh.regions[tris[1]] == Region::Workpiece;
                if w0 != w1 {
                    // Orient along the workpiece triangle.
                    let wt = if w0 { tris[0] } else { tris[1] };
                    let tri = mesh.triangles[wt];
                    let nodes = (0..3)
                        .map(|k| [tri[k], tri[(k + 1) % 3]])
                        .find(|e| edge_key(e[0], e[1]) == (a, b))
                        .unwrap_or([a, b]);
                    boundary_edges.push(BoundaryEdge { nodes, tag: EdgeTag::WorkpieceSurface });
                }
            }
            _ => {}
        }
    }
    mesh.boundary_edges = boundary_edges;
    mesh.validate()?;
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_box_spec(workpiece: Vec<Point>, coils: Vec<Vec<Point>>, h: f64) -> DomainSpec {
        DomainSpec {
            outer: BoxExtent { x0: 0.0, y0: 0.0, x1: 1.0, y1: 1.0 },
            workpiece,
            coils,
            h,
            symmetry: vec![],
        }
    }

    fn centered_square() -> Vec<Point> {
        vec![[0.4, 0.4], [0.6, 0.4], [0.6, 0.6], [0.4, 0.6]]
    }

    #[test]
    fn centered_square_area_is_resolved() {
        let mesh = build_domain(&unit_box_spec(centered_square(), vec![], 0.1)).unwrap();
        assert!((mesh.region_area(Region::Workpiece) - 0.04).abs() < 1e-12);
        assert!((mesh.total_area() - 1.0).abs() < 1e-12);
        assert_eq!(mesh.count_region(Region::Coil), 0);
        assert!(mesh.has_tag(EdgeTag::WorkpieceSurface));
        assert!(mesh.has_tag(EdgeTag::Outer));
    }

    #[test]
    fn tooth_polygon_matches_shoelace_area() {
        // Trapezoidal tooth sitting on a polygonal root arc centred below the box.
        let (cx, cy, r) = (0.5, -1.0, 1.3);
        let arc = |x0: f64, x1: f64, n: usize| -> Vec<Point> {
            (0..=n)
                .map(|k| {
                    let x = x0 + (x1 - x0) * k as f64 / n as f64;
                    [x, cy + (r * r - (x - cx) * (x - cx)).sqrt()]
                })
                .collect()
        };
        let mut wp: Vec<Point> = vec![[0.1, 0.1], [0.9, 0.1]];
        wp.extend(arc(0.9, 0.62, 6));
        wp.push([0.56, 0.6]);
        wp.push([0.44, 0.6]);
        wp.extend(arc(0.38, 0.1, 6));
        let oracle = polygon::area(&wp);
        let mesh = build_domain(&unit_box_spec(wp, vec![], 0.05)).unwrap();
        assert!((mesh.region_area(Region::Workpiece) - oracle).abs() < 1e-10);
    }

    #[test]
    fn coil_region_is_labelled() {
        let coil = vec![[0.4, 0.75], [0.6, 0.75], [0.6, 0.85], [0.4, 0.85]];
        let mesh = build_domain(&unit_box_spec(centered_square(), vec![coil], 0.08)).unwrap();
        assert!((mesh.region_area(Region::Coil) - 0.02).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(build_domain(&unit_box_spec(centered_square(), vec![], 0.0)).is_err());
        let bow = vec![[0.2, 0.2], [0.6, 0.6], [0.6, 0.2], [0.2, 0.6]];
        assert!(matches!(build_domain(&unit_box_spec(bow, vec![], 0.1)), Err(Error::Geometry(_))));
        let coil = vec![[0.5, 0.5], [0.7, 0.5], [0.7, 0.7], [0.5, 0.7]];
        assert!(build_domain(&unit_box_spec(centered_square(), vec![coil], 0.1)).is_err());
        let outside = vec![[0.5, 0.5], [1.5, 0.5], [1.5, 0.7]];
        assert!(build_domain(&unit_box_spec(outside, vec![], 0.1)).is_err());
    }

    #[test]
    fn polygon_on_symmetry_side() {
        let mut spec = unit_box_spec(vec![[0.0, 0.2], [0.5, 0.2], [0.5, 0.5], [0.0, 0.5]], vec![], 0.1);
        assert!(build_domain(&spec).is_err());
        spec.symmetry = vec![BoxSide::Left];
        let mesh = build_domain(&spec).unwrap();
        assert!((mesh.region_area(Region::Workpiece) - 0.15).abs() < 1e-12);
        assert!(mesh.has_tag(EdgeTag::Symmetry));
    }

    #[test]
    fn meshing_is_deterministic() {
        let spec = unit_box_spec(centered_square(), vec![], 0.07);
        assert_eq!(build_domain(&spec).unwrap(), build_domain(&spec).unwrap());
    }
}
