//! Red-green refinement of a band of triangles along tagged edges.
//!
//! Each level quadrisects (red) every triangle whose centroid lies within the
//! band, closes conformity by red-refining any triangle with two or more split
//! edges, and bisects (green) triangles left with a single split edge. Green
//! pairs are merged back into their parent before the next level is marked, so
//! green triangles are never subdivided further.

use std::collections::BTreeMap;

use super::polygon::point_segment_distance;
use super::{edge_key, triangle_min_angle, BoundaryEdge, EdgeTag, Mesh, Point, Region};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
struct Tri {
    v: [usize; 3],
    region: Region,
    green: Option<usize>,
}

struct Work {
    vertices: Vec<Point>,
    tris: Vec<Tri>,
    midpoints: BTreeMap<(usize, usize), usize>,
    /// Parent vertex triples of green pairs.
    green_parents: Vec<[usize; 3]>,
}

impl Work {
    fn midpoint(&mut self, a: usize, b: usize) -> usize {
        let key = edge_key(a, b);
        if let Some(&m) = self.midpoints.get(&key) {
            return m;
        }
        let (p, q) = (self.vertices[a], self.vertices[b]);
        self.vertices.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
        let m = self.vertices.len() - 1;
        self.midpoints.insert(key, m);
        m
    }

    fn centroid(&self, t: &Tri) -> Point {
        let [a, b, c] = t.v.map(|i| self.vertices[i]);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    fn split_of(&self, t: &Tri) -> [Option<usize>; 3] {
        [0, 1, 2].map(|k| self.midpoints.get(&edge_key(t.v[k], t.v[(k + 1) % 3])).copied())
    }

    fn needs_red(&self, t: &Tri) -> bool {
        let splits = self.split_of(t);
        match splits.iter().filter(|s| s.is_some()).count() {
            0 => false,
            1 => {
                let k = splits.iter().position(|s| s.is_some()).unwrap();
                let m = splits[k].unwrap();
                let (p, q, r) = (t.v[k], t.v[(k + 1) % 3], t.v[(k + 2) % 3]);
                if self.midpoints.contains_key(&edge_key(p, m)) || self.midpoints.contains_key(&edge_key(m, q)) {
                    return true;
                }
                // Bisecting would cut the shape regularity by more than half.
                let pts = |v: [usize; 3]| v.map(|i| self.vertices[i]);
                let parent = triangle_min_angle(pts(t.v));
                triangle_min_angle(pts([p, m, r])).min(triangle_min_angle(pts([m, q, r]))) < 0.5 * parent
            }
            _ => true,
        }
    }

    fn red_pass(&mut self, flags: &[bool]) {
        let old = std::mem::take(&mut self.tris);
        let mut out = Vec::with_capacity(old.len() + 3 * flags.iter().filter(|&&f| f).count());
        for (t, &flag) in old.into_iter().zip(flags) {
            if !flag {
                out.push(t);
                continue;
            }
            let [a, b, c] = t.v;
            let mab = self.midpoint(a, b);
            let mbc = self.midpoint(b, c);
            let mca = self.midpoint(c, a);
            for v in [[a, mab, mca], [mab, b, mbc], [mca, mbc, c], [mab, mbc, mca]] {
                out.push(Tri { v, region: t.region, green: None });
            }
        }
        self.tris = out;
    }

    fn green_pass(&mut self) {
        let old = std::mem::take(&mut self.tris);
        let mut out = Vec::with_capacity(old.len());
        for t in old {
            let splits = self.split_of(&t);
            match splits.iter().position(|s| s.is_some()) {
                Some(k) => {
                    let m = splits[k].unwrap();
                    let (p, q, r) = (t.v[k], t.v[(k + 1) % 3], t.v[(k + 2) % 3]);
                    let g = self.green_parents.len();
                    self.green_parents.push(t.v);
                    out.push(Tri { v: [p, m, r], region: t.region, green: Some(g) });
                    out.push(Tri { v: [m, q, r], region: t.region, green: Some(g) });
                }
                None => out.push(t),
            }
        }
        self.tris = out;
    }

    fn merge_greens(&mut self) {
        let mut out = Vec::with_capacity(self.tris.len());
        let mut emitted = vec![false; self.green_parents.len()];
        for t in &self.tris {
            match t.green {
                Some(g) => {
                    if !emitted[g] {
                        emitted[g] = true;
                        out.push(Tri { v: self.green_parents[g], region: t.region, green: None });
                    }
                }
                None => out.push(*t),
            }
        }
        self.tris = out;
        self.green_parents.clear();
    }
}

/// Number of uniform halvings needed to bring an edge length `h0` down to `target`.
pub fn levels_for_target(h0: f64, target: f64) -> usize {
    if h0 <= target {
        0
    } else {
        (h0 / target).log2().ceil() as usize
    }
}

/// Refines every triangle whose centroid lies within `depth` of an edge tagged
/// `tag`, `levels` times. Region labels and tags are inherited by children.
pub fn refine_boundary_layer(mesh: &Mesh, tag: EdgeTag, depth: f64, levels: usize) -> Result<Mesh> {
    if !(depth > 0.0) {
        return Err(Error::InvalidArgument(format!("refinement depth must be positive, got {depth}")));
    }
    let segments: Vec<(Point, Point)> = mesh
        .edges_with_tag(tag)
        .map(|e| (mesh.vertices[e.nodes[0]], mesh.vertices[e.nodes[1]]))
        .collect();
    if segments.is_empty() {
        return Err(Error::UnknownTag(tag));
    }
    if levels == 0 {
        return Ok(mesh.clone());
    }

    let mut w = Work {
        vertices: mesh.vertices.clone(),
        tris: mesh
            .triangles
            .iter()
            .zip(&mesh.regions)
            .map(|(&v, &region)| Tri { v, region, green: None })
            .collect(),
        midpoints: BTreeMap::new(),
        green_parents: Vec::new(),
    };

    for _ in 0..levels {
        w.merge_greens();
        let marked: Vec<bool> = w
            .tris
            .iter()
            .map(|t| {
                let c = w.centroid(t);
                segments.iter().any(|&(a, b)| point_segment_distance(c, a, b) < depth)
            })
            .collect();
        w.red_pass(&marked);

        // Conformity closure: a triangle needs red refinement if two or more
        // of its edges are split, if its single split edge is split again, or
        // if green bisection would produce a badly shaped pair.
        loop {
            let needs_red: Vec<bool> = w.tris.iter().map(|t| w.needs_red(t)).collect();
            if !needs_red.iter().any(|&r| r) {
                break;
            }
            w.red_pass(&needs_red);
        }
        w.green_pass();
    }

    let mut boundary_edges = Vec::new();
    for e in &mesh.boundary_edges {
        split_boundary(&w.midpoints, e.nodes[0], e.nodes[1], e.tag, &mut boundary_edges);
    }
    Mesh::new(
        w.vertices,
        w.tris.iter().map(|t| t.v).collect(),
        w.tris.iter().map(|t| t.region).collect(),
        boundary_edges,
    )
}

fn split_boundary(
    midpoints: &BTreeMap<(usize, usize), usize>,
    a: usize,
    b: usize,
    tag: EdgeTag,
    out: &mut Vec<BoundaryEdge>,
) {
    match midpoints.get(&edge_key(a, b)) {
        Some(&m) => {
            split_boundary(midpoints, a, m, tag, out);
            split_boundary(midpoints, m, b, tag, out);
        }
        None => out.push(BoundaryEdge { nodes: [a, b], tag }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_domain, BoxExtent, DomainSpec};

    fn box_with_square(h: f64) -> Mesh {
        build_domain(&DomainSpec {
            outer: BoxExtent { x0: 0.0, y0: 0.0, x1: 1.0, y1: 1.0 },
            workpiece: vec![[0.3, 0.3], [0.7, 0.3], [0.7, 0.7], [0.3, 0.7]],
            coils: vec![],
            h,
            symmetry: vec![],
        })
        .unwrap()
    }

    #[test]
    fn zero_levels_is_identity() {
        let m = box_with_square(0.2);
        let r = refine_boundary_layer(&m, EdgeTag::WorkpieceSurface, 0.1, 0).unwrap();
        assert_eq!(r, m);
    }

    #[test]
    fn single_flagged_triangle_quadrisects() {
        // Two triangles; only the first lies near the bottom edge band.
        let vertices = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];
        let triangles = vec![[0, 1, 2], [1, 3, 2]];
        let boundary_edges = vec![
            BoundaryEdge { nodes: [0, 1], tag: EdgeTag::WorkpieceSurface },
            BoundaryEdge { nodes: [1, 3], tag: EdgeTag::Outer },
            BoundaryEdge { nodes: [3, 2], tag: EdgeTag::Outer },
            BoundaryEdge { nodes: [2, 0], tag: EdgeTag::Outer },
        ];
        let m = Mesh::new(vertices, triangles, vec![Region::Workpiece; 2], boundary_edges).unwrap();
        let r = refine_boundary_layer(&m, EdgeTag::WorkpieceSurface, 0.4, 1).unwrap();
        // 4 red children plus a green pair for the neighbour.
        assert_eq!(r.num_triangles(), 6);
        for t in 0..4 {
            assert!((r.area(t) - 0.125).abs() < 1e-15);
        }
        assert!((r.total_area() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unknown_tag_errors() {
        let m = box_with_square(0.2);
        assert!(matches!(
            refine_boundary_layer(&m, EdgeTag::Symmetry, 0.1, 1),
            Err(Error::UnknownTag(EdgeTag::Symmetry))
        ));
        assert!(refine_boundary_layer(&m, EdgeTag::Outer, -1.0, 1).is_err());
    }

    #[test]
    fn multi_level_preserves_areas_and_quality() {
        let m = box_with_square(0.1);
        let r = refine_boundary_layer(&m, EdgeTag::WorkpieceSurface, 0.06, 3).unwrap();
        assert!((r.region_area(Region::Workpiece) - m.region_area(Region::Workpiece)).abs() < 1e-12);
        assert!((r.region_area(Region::Air) - m.region_area(Region::Air)).abs() < 1e-12);
        assert!(r.min_angle() >= 0.5 * m.min_angle());
        assert!(r.max_edge_near(EdgeTag::WorkpieceSurface) <= m.max_edge_near(EdgeTag::WorkpieceSurface) / 4.0);
    }

    #[test]
    fn levels_for_target_halves() {
        assert_eq!(levels_for_target(1.0, 0.3), 2);
        assert_eq!(levels_for_target(0.2, 0.3), 0);
        assert_eq!(levels_for_target(1.0, 0.25), 2);
    }
}
