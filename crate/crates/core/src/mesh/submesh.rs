use std::collections::BTreeMap;

use super::{edge_key, BoundaryEdge, EdgeTag, Mesh, Region};
use crate::error::{Error, Result};

/// A region extracted from a parent mesh together with the index maps back to it.
#[derive(Debug, Clone, PartialEq)]
pub struct Submesh {
    pub mesh: Mesh,
    /// `node_map[child] = parent` vertex index; strictly increasing.
    pub node_map: Vec<usize>,
    /// `triangle_map[child] = parent` triangle index.
    pub triangle_map: Vec<usize>,
}

impl Submesh {
    /// Restricts a parent nodal field to the submesh vertices.
    pub fn restrict(&self, parent_field: &[f64]) -> Vec<f64> {
        self.node_map.iter().map(|&p| parent_field[p]).collect()
    }

    /// Writes a submesh nodal field into the matching parent entries.
    pub fn extend_into(&self, child_field: &[f64], parent_field: &mut [f64]) {
        for (c, &p) in self.node_map.iter().enumerate() {
            parent_field[p] = child_field[c];
        }
    }

    /// Parent-length field equal to `fill` off the submesh.
    pub fn extend(&self, child_field: &[f64], parent_len: usize, fill: f64) -> Vec<f64> {
        let mut out = vec![fill; parent_len];
        self.extend_into(child_field, &mut out);
        out
    }

    pub fn restrict_cells(&self, parent_cells: &[f64]) -> Vec<f64> {
        self.triangle_map.iter().map(|&p| parent_cells[p]).collect()
    }
}

/// Extracts the triangles labelled `region`.
///
/// Workpiece-surface edges become outer edges of the submesh; symmetry edges
/// stay symmetry edges; any other new boundary edge is tagged outer.
pub fn submesh(mesh: &Mesh, region: Region) -> Result<Submesh> {
    let triangle_map: Vec<usize> = (0..mesh.num_triangles()).filter(|&t| mesh.regions[t] == region).collect();
    if triangle_map.is_empty() {
        return Err(Error::EmptyRegion(region));
    }
    let mut used = vec![false; mesh.num_vertices()];
    for &t in &triangle_map {
        for &v in &mesh.triangles[t] {
            used[v] = true;
        }
    }
    let node_map: Vec<usize> = (0..mesh.num_vertices()).filter(|&v| used[v]).collect();
    let mut child_of = vec![usize::MAX; mesh.num_vertices()];
    for (c, &p) in node_map.iter().enumerate() {
        child_of[p] = c;
    }
    let vertices = node_map.iter().map(|&p| mesh.vertices[p]).collect();
    let triangles: Vec<[usize; 3]> = triangle_map
        .iter()
        .map(|&t| {
            let [a, b, c] = mesh.triangles[t];
            [child_of[a], child_of[b], child_of[c]]
        })
        .collect();
    let regions = vec![region; triangles.len()];

    let parent_tags: BTreeMap<(usize, usize), EdgeTag> = mesh
        .boundary_edges
        .iter()
        .map(|e| (edge_key(e.nodes[0], e.nodes[1]), e.tag))
        .collect();

    let mut sub = Mesh {
        vertices,
        triangles,
        regions,
        boundary_edges: Vec::new(),
    };
    let mut boundary_edges = Vec::new();
    for tri in &sub.triangles {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            boundary_edges.push((edge_key(a, b), [a, b]));
        }
    }
    let counts = sub.edge_triangles();
    let mut tagged = Vec::new();
    for (key, nodes) in boundary_edges {
        if counts[&key].len() != 1 {
            continue;
        }
        let parent_key = edge_key(node_map[key.0], node_map[key.1]);
        let tag = match parent_tags.get(&parent_key) {
            Some(EdgeTag::Symmetry) => EdgeTag::Symmetry,
            _ => EdgeTag::Outer,
        };
        tagged.push(BoundaryEdge { nodes, tag });
    }
    sub.boundary_edges = tagged;
    sub.validate()?;
    Ok(Submesh {
        mesh: sub,
        node_map,
        triangle_map,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn whole_mesh_is_identity() {
        let m = Mesh::rectangle(0.0, 0.0, 1.0, 1.0, 3, 2, Region::Workpiece).unwrap();
        let s = submesh(&m, Region::Workpiece).unwrap();
        assert_eq!(s.node_map, (0..m.num_vertices()).collect::<Vec<_>>());
        assert_eq!(s.mesh.num_triangles(), m.num_triangles());
        assert_eq!(s.mesh.boundary_edges.len(), m.boundary_edges.len());
    }

    #[test]
    fn empty_region_errors() {
        let m = Mesh::rectangle(0.0, 0.0, 1.0, 1.0, 2, 2, Region::Air).unwrap();
        assert!(matches!(submesh(&m, Region::Coil), Err(Error::EmptyRegion(Region::Coil))));
    }

    #[test]
    fn restrict_then_extend_round_trips() {
        let mut m = Mesh::rectangle(0.0, 0.0, 1.0, 1.0, 4, 4, Region::Air).unwrap();
        for t in 0..m.num_triangles() {
            if m.centroid(t)[0] < 0.5 {
                m.regions[t] = Region::Workpiece;
            }
        }
        let s = submesh(&m, Region::Workpiece).unwrap();
        let field: Vec<f64> = (0..m.num_vertices()).map(|i| i as f64 * 0.5).collect();
        let child = s.restrict(&field);
        let mut back = vec![-1.0; m.num_vertices()];
        s.extend_into(&child, &mut back);
        for &p in &s.node_map {
            assert_eq!(back[p], field[p]);
        }
        assert!((s.mesh.total_area() - 0.5).abs() < 1e-14);
    }
}
