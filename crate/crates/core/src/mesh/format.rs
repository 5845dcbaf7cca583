//! Plain-text `MESH2D v1` import and export.
//!
//! ```text
//! MESH2D v1
//! <vertex count>
//! x y                  (one line per vertex)
//! <triangle count>
//! i j k LABEL          (LABEL in AIR | COIL | WORKPIECE)
//! <boundary edge count>
//! i j TAG              (TAG in OUTER | WORKPIECE_SURFACE | SYMMETRY)
//! ```
//!
//! Coordinates are written in shortest round-trip form, so a write/read
//! cycle reproduces the mesh bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use super::{BoundaryEdge, EdgeTag, Mesh, Region};
use crate::error::{Error, Result};

const HEADER: &str = "MESH2D v1";

pub fn mesh2d_string(mesh: &Mesh) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{HEADER}");
    let _ = writeln!(s, "{}", mesh.num_vertices());
    for p in &mesh.vertices {
        let _ = writeln!(s, "{} {}", p[0], p[1]);
    }
    let _ = writeln!(s, "{}", mesh.num_triangles());
    for (t, r) in mesh.triangles.iter().zip(&mesh.regions) {
        let _ = writeln!(s, "{} {} {} {}", t[0], t[1], t[2], r.label());
    }
    let _ = writeln!(s, "{}", mesh.boundary_edges.len());
    for e in &mesh.boundary_edges {
        let _ = writeln!(s, "{} {} {}", e.nodes[0], e.nodes[1], e.tag.label());
    }
    s
}

pub fn write_mesh2d(mesh: &Mesh, path: &Path) -> Result<()> {
    std::fs::write(path, mesh2d_string(mesh)).map_err(|e| Error::io(path, e))
}

pub fn read_mesh2d(path: &Path) -> Result<Mesh> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_mesh2d(&text)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next_fields(&mut self) -> Result<Vec<&'a str>> {
        for (i, l) in self.inner.by_ref() {
            self.line = i + 1;
            let fields: Vec<&str> = l.split_whitespace().collect();
            if !fields.is_empty() {
                return Ok(fields);
            }
        }
        Err(self.err("unexpected end of file"))
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse { line: self.line, message: message.into() }
    }

    fn count(&mut self) -> Result<usize> {
        let f = self.next_fields()?;
        if f.len() != 1 {
            return Err(self.err("expected a single count"));
        }
        f[0].parse().map_err(|_| self.err(format!("bad count {:?}", f[0])))
    }

    fn parse<T: std::str::FromStr>(&self, s: &str) -> Result<T> {
        s.parse().map_err(|_| self.err(format!("cannot parse {s:?}")))
    }
}

pub fn parse_mesh2d(text: &str) -> Result<Mesh> {
    let mut lines = Lines { inner: text.lines().enumerate(), line: 0 };
    let header = lines.next_fields()?;
    if header.join(" ") != HEADER {
        return Err(lines.err(format!("expected header {HEADER:?}")));
    }

    let nv = lines.count()?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let f = lines.next_fields()?;
        if f.len() != 2 {
            return Err(lines.err("vertex record needs 2 fields"));
        }
        vertices.push([lines.parse(f[0])?, lines.parse(f[1])?]);
    }

    let nt = lines.count()?;
    let mut triangles = Vec::with_capacity(nt);
    let mut regions = Vec::with_capacity(nt);
    for _ in 0..nt {
        let f = lines.next_fields()?;
        if f.len() != 4 {
            return Err(lines.err("triangle record needs 4 fields"));
        }
        triangles.push([lines.parse(f[0])?, lines.parse(f[1])?, lines.parse(f[2])?]);
        regions.push(Region::from_label(f[3]).ok_or_else(|| lines.err(format!("unknown region {:?}", f[3])))?);
    }

    let ne = lines.count()?;
    let mut boundary_edges = Vec::with_capacity(ne);
    for _ in 0..ne {
        let f = lines.next_fields()?;
        if f.len() != 3 {
            return Err(lines.err("edge record needs 3 fields"));
        }
        let tag = EdgeTag::from_label(f[2]).ok_or_else(|| lines.err(format!("unknown tag {:?}", f[2])))?;
        boundary_edges.push(BoundaryEdge { nodes: [lines.parse(f[0])?, lines.parse(f[1])?], tag });
    }
    if lines.next_fields().is_ok() {
        return Err(lines.err("trailing data after boundary edges"));
    }
    Mesh::new(vertices, triangles, regions, boundary_edges)
}
