//! P1 assembly of mass, stiffness, load and Robin boundary terms.
//!
//! All element loops run in triangle order, so assembly is bit-reproducible.

use super::sparse::SparseMatrix;
use crate::error::{Error, Result};
use crate::mesh::{EdgeTag, Mesh, Point};

/// Piecewise-constant coefficient on a mesh.
#[derive(Debug, Clone, PartialEq)]
pub enum CoefficientField {
    Constant(f64),
    PerTriangle(Vec<f64>),
}

impl CoefficientField {
    pub fn value(&self, t: usize) -> f64 {
        match self {
            CoefficientField::Constant(c) => *c,
            CoefficientField::PerTriangle(v) => v[t],
        }
    }

    /// Checks length and finiteness against `mesh`.
    pub fn check(&self, mesh: &Mesh) -> Result<()> {
        match self {
            CoefficientField::Constant(c) if !c.is_finite() => {
                Err(Error::Coefficient(format!("constant coefficient {c} is not finite")))
            }
            CoefficientField::Constant(_) => Ok(()),
            CoefficientField::PerTriangle(v) => {
                if v.len() != mesh.num_triangles() {
                    return Err(Error::LengthMismatch { expected: mesh.num_triangles(), got: v.len() });
                }
                match v.iter().position(|c| !c.is_finite()) {
                    Some(t) => Err(Error::Coefficient(format!("coefficient on triangle {t} is not finite"))),
                    None => Ok(()),
                }
            }
        }
    }

    pub fn min(&self) -> f64 {
        match self {
            CoefficientField::Constant(c) => *c,
            CoefficientField::PerTriangle(v) => v.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }

    pub fn max(&self) -> f64 {
        match self {
            CoefficientField::Constant(c) => *c,
            CoefficientField::PerTriangle(v) => v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Per-triangle values expanded to `n` entries.
    pub fn to_vec(&self, n: usize) -> Vec<f64> {
        match self {
            CoefficientField::Constant(c) => vec![*c; n],
            CoefficientField::PerTriangle(v) => v.clone(),
        }
    }
}

/// Boundary datum for Robin terms.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryValue {
    Constant(f64),
    /// One value per mesh vertex, interpolated linearly along edges.
    Nodal(Vec<f64>),
}

/// Consistent mass `M_ij = Σ_T c_T ∫_T φ_i φ_j`.
pub fn assemble_mass(mesh: &Mesh, c: &CoefficientField) -> Result<SparseMatrix> {
    c.check(mesh)?;
    let mut m = SparseMatrix::mesh_pattern(mesh);
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let s = c.value(t) * mesh.area(t) / 12.0;
        for a in 0..3 {
            for b in 0..3 {
                m.add_to(tri[a], tri[b], if a == b { 2.0 * s } else { s });
            }
        }
    }
    Ok(m)
}

/// Row-summed (lumped) mass: `c_T·|T|/3` from each adjacent triangle.
pub fn assemble_lumped_mass(mesh: &Mesh, c: &CoefficientField) -> Result<Vec<f64>> {
    c.check(mesh)?;
    let mut m = vec![0.0; mesh.num_vertices()];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let s = c.value(t) * mesh.area(t) / 3.0;
        for &v in tri {
            m[v] += s;
        }
    }
    Ok(m)
}

/// Stiffness `K_ij = Σ_T c_T ∫_T ∇φ_i·∇φ_j`; requires `c > 0`.
pub fn assemble_stiffness(mesh: &Mesh, c: &CoefficientField) -> Result<SparseMatrix> {
    c.check(mesh)?;
    if !(c.min() > 0.0) {
        return Err(Error::Coefficient(format!("stiffness coefficient must be positive, min is {}", c.min())));
    }
    let mut k = SparseMatrix::mesh_pattern(mesh);
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let g = mesh.hat_gradients(t);
        let s = c.value(t) * mesh.area(t);
        for a in 0..3 {
            for b in 0..3 {
                k.add_to(tri[a], tri[b], s * (g[a][0] * g[b][0] + g[a][1] * g[b][1]));
            }
        }
    }
    Ok(k)
}

/// Load `∫ f φ_i` for a piecewise-constant `f` (exact).
pub fn assemble_load(mesh: &Mesh, f: &CoefficientField) -> Result<Vec<f64>> {
    assemble_lumped_mass(mesh, f)
}

// Degree-4 symmetric rule on the reference triangle (Dunavant, 6 points).
const QUAD6: [([f64; 3], f64); 6] = [
    ([0.108103018168070, 0.445948490915965, 0.445948490915965], 0.223381589678011),
    ([0.445948490915965, 0.108103018168070, 0.445948490915965], 0.223381589678011),
    ([0.445948490915965, 0.445948490915965, 0.108103018168070], 0.223381589678011),
    ([0.816847572980459, 0.091576213509771, 0.091576213509771], 0.109951743655322),
    ([0.091576213509771, 0.816847572980459, 0.091576213509771], 0.109951743655322),
    ([0.091576213509771, 0.091576213509771, 0.816847572980459], 0.109951743655322),
];

/// Load `∫ f φ_i` for a smooth function, by a degree-4 rule on each triangle.
pub fn assemble_load_fn(mesh: &Mesh, f: impl Fn(Point) -> f64) -> Vec<f64> {
    let mut out = vec![0.0; mesh.num_vertices()];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let p = mesh.triangle_points(t);
        let area = mesh.area(t);
        for (l, w) in QUAD6 {
            let x = [
                l[0] * p[0][0] + l[1] * p[1][0] + l[2] * p[2][0],
                l[0] * p[0][1] + l[1] * p[1][1] + l[2] * p[2][1],
            ];
            let fx = f(x) * w * area;
            for k in 0..3 {
                out[tri[k]] += fx * l[k];
            }
        }
    }
    out
}

/// `‖u_h − u‖_{L²}` for a nodal P1 field against a smooth function, degree-4 rule.
pub fn l2_error(mesh: &Mesh, u_h: &[f64], u: impl Fn(Point) -> f64) -> f64 {
    let mut acc = 0.0;
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let p = mesh.triangle_points(t);
        let area = mesh.area(t);
        for (l, w) in QUAD6 {
            let x = [
                l[0] * p[0][0] + l[1] * p[1][0] + l[2] * p[2][0],
                l[0] * p[0][1] + l[1] * p[1][1] + l[2] * p[2][1],
            ];
            let uh = l[0] * u_h[tri[0]] + l[1] * u_h[tri[1]] + l[2] * u_h[tri[2]];
            acc += w * area * (uh - u(x)).powi(2);
        }
    }
    acc.sqrt()
}

/// Robin terms on edges tagged `tag`: `η ∫ φ_i φ_j` and `∫ g φ_i`.
pub fn assemble_robin(mesh: &Mesh, tag: EdgeTag, eta: f64, g: &BoundaryValue) -> Result<(SparseMatrix, Vec<f64>)> {
    if !(eta >= 0.0) || !eta.is_finite() {
        return Err(Error::Coefficient(format!("Robin coefficient must be finite and nonnegative, got {eta}")));
    }
    if let BoundaryValue::Nodal(v) = g {
        if v.len() != mesh.num_vertices() {
            return Err(Error::LengthMismatch { expected: mesh.num_vertices(), got: v.len() });
        }
    }
    if !mesh.has_tag(tag) {
        return Err(Error::UnknownTag(tag));
    }
    let mut r = SparseMatrix::mesh_pattern(mesh);
    let mut load = vec![0.0; mesh.num_vertices()];
    for e in mesh.edges_with_tag(tag) {
        let [a, b] = e.nodes;
        let len = mesh.edge_length(a, b);
        let s = eta * len / 6.0;
        r.add_to(a, a, 2.0 * s);
        r.add_to(b, b, 2.0 * s);
        r.add_to(a, b, s);
        r.add_to(b, a, s);
        match g {
            BoundaryValue::Constant(c) => {
                load[a] += c * len / 2.0;
                load[b] += c * len / 2.0;
            }
            BoundaryValue::Nodal(v) => {
                load[a] += len / 6.0 * (2.0 * v[a] + v[b]);
                load[b] += len / 6.0 * (v[a] + 2.0 * v[b]);
            }
        }
    }
    Ok((r, load))
}

/// Dirichlet constraints `u_i = g_i`, validated and sorted by node.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletBc {
    nodes: Vec<usize>,
    values: Vec<f64>,
    mask: Vec<bool>,
}

impl DirichletBc {
    /// Duplicate nodes are allowed when their values agree exactly.
    pub fn new(n: usize, constraints: impl IntoIterator<Item = (usize, f64)>) -> Result<Self> {
        let mut pairs: Vec<(usize, f64)> = constraints.into_iter().collect();
        for &(node, v) in &pairs {
            if node >= n {
                return Err(Error::IndexOutOfRange { index: node, dim: n });
            }
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("Dirichlet value at node {node}")));
            }
        }
        pairs.sort_by_key(|p| p.0);
        let mut nodes: Vec<usize> = Vec::with_capacity(pairs.len());
        let mut values: Vec<f64> = Vec::with_capacity(pairs.len());
        for (node, v) in pairs {
            if nodes.last() == Some(&node) {
                let first = *values.last().unwrap();
                if first != v {
                    return Err(Error::ConflictingDirichlet { node, first, second: v });
                }
                continue;
            }
            nodes.push(node);
            values.push(v);
        }
        let mut mask = vec![false; n];
        for &i in &nodes {
            mask[i] = true;
        }
        Ok(DirichletBc { nodes, values, mask })
    }

    pub fn homogeneous(n: usize, nodes: &[usize]) -> Result<Self> {
        Self::new(n, nodes.iter().map(|&i| (i, 0.0)))
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_constrained(&self, i: usize) -> bool {
        self.mask[i]
    }

    /// Zeroes constrained rows and columns (keeping them in the pattern) and puts 1 on their diagonal.
    pub fn eliminate_matrix(&self, a: &SparseMatrix) -> Result<SparseMatrix> {
        if a.dim() != self.mask.len() {
            return Err(Error::LengthMismatch { expected: self.mask.len(), got: a.dim() });
        }
        let mut out = a.clone();
        let cols: Vec<usize> = a.col_idx().to_vec();
        for i in 0..a.dim() {
            let range = out.row_range(i);
            let vals = out.values_mut();
            for k in range {
                let j = cols[k];
                if self.mask[i] || self.mask[j] {
                    vals[k] = if i == j { 1.0 } else { 0.0 };
                }
            }
        }
        Ok(out)
    }

    /// Moves the known columns of the original matrix `a` to the right-hand side
    /// and writes the prescribed values into the constrained rows.
    pub fn lift_rhs(&self, a: &SparseMatrix, rhs: &mut [f64]) {
        if self.values.iter().any(|&v| v != 0.0) {
            let mut g = vec![0.0; rhs.len()];
            for (&i, &v) in self.nodes.iter().zip(&self.values) {
                g[i] = v;
            }
            for (i, r) in rhs.iter_mut().enumerate() {
                if !self.mask[i] {
                    *r -= a.row(i).filter(|&(j, _)| self.mask[j]).map(|(j, v)| v * g[j]).sum::<f64>();
                }
            }
        }
        for (&i, &v) in self.nodes.iter().zip(&self.values) {
            rhs[i] = v;
        }
    }

    /// Symmetric elimination of the constraints from `a·u = rhs`, in place.
    pub fn apply(&self, a: &mut SparseMatrix, rhs: &mut [f64]) -> Result<()> {
        if rhs.len() != a.dim() {
            return Err(Error::LengthMismatch { expected: a.dim(), got: rhs.len() });
        }
        let reduced = self.eliminate_matrix(a)?;
        self.lift_rhs(a, rhs);
        *a = reduced;
        Ok(())
    }
}

/// Convenience wrapper around [`DirichletBc::apply`].
pub fn apply_dirichlet(a: &mut SparseMatrix, rhs: &mut [f64], nodes: &[usize], values: &[f64]) -> Result<()> {
    if nodes.len() != values.len() {
        return Err(Error::LengthMismatch { expected: nodes.len(), got: values.len() });
    }
    let bc = DirichletBc::new(a.dim(), nodes.iter().copied().zip(values.iter().copied()))?;
    bc.apply(a, rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{BoundaryEdge, Region};

    fn unit_right_triangle() -> Mesh {
        let e = |a, b| BoundaryEdge { nodes: [a, b], tag: EdgeTag::Outer };
        Mesh::new(
            vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            vec![[0, 1, 2]],
            vec![Region::Air],
            vec![e(0, 1), e(1, 2), e(2, 0)],
        )
        .unwrap()
    }

    #[test]
    fn reference_element_matrices() {
        let m = unit_right_triangle();
        let mass = assemble_mass(&m, &CoefficientField::Constant(1.0)).unwrap().to_dense();
        let s = 0.5 / 12.0;
        assert_eq!(mass, vec![vec![2.0 * s, s, s], vec![s, 2.0 * s, s], vec![s, s, 2.0 * s]]);
        let k = assemble_stiffness(&m, &CoefficientField::Constant(1.0)).unwrap().to_dense();
        let expect = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((k[i][j] - expect[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn stiffness_rejects_nonpositive() {
        let m = unit_right_triangle();
        assert!(assemble_stiffness(&m, &CoefficientField::Constant(0.0)).is_err());
        assert!(assemble_stiffness(&m, &CoefficientField::PerTriangle(vec![1.0, 2.0])).is_err());
    }

    #[test]
    fn robin_single_edge() {
        let mut m = unit_right_triangle();
        m.boundary_edges[1].tag = EdgeTag::WorkpieceSurface;
        let (r, load) = assemble_robin(&m, EdgeTag::WorkpieceSurface, 1.0, &BoundaryValue::Constant(0.0)).unwrap();
        let len = 2f64.sqrt();
        let d = r.to_dense();
        assert!((d[1][1] - len / 3.0).abs() < 1e-15 && (d[1][2] - len / 6.0).abs() < 1e-15);
        assert_eq!(d[0], vec![0.0; 3]);
        assert_eq!(load, vec![0.0; 3]);
        assert!(assemble_robin(&m, EdgeTag::Symmetry, 1.0, &BoundaryValue::Constant(0.0)).is_err());
    }

    #[test]
    fn dirichlet_chain_midpoint() {
        let mut a = SparseMatrix::from_triplets(
            3,
            &[(0, 0, 1.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, 2.0), (1, 2, -1.0), (2, 1, -1.0), (2, 2, 1.0)],
        )
        .unwrap();
        let mut rhs = vec![0.0; 3];
        apply_dirichlet(&mut a, &mut rhs, &[0, 2], &[0.0, 1.0]).unwrap();
        assert_eq!(a.max_asymmetry(), 0.0);
        assert_eq!(rhs[1] / a.get(1, 1), 0.5);
        assert_eq!(rhs[2], 1.0);
    }

    #[test]
    fn conflicting_dirichlet_errors() {
        assert!(matches!(
            DirichletBc::new(3, [(1, 0.0), (1, 2.0)]),
            Err(Error::ConflictingDirichlet { node: 1, .. })
        ));
        assert!(DirichletBc::new(3, [(1, 2.0), (1, 2.0)]).is_ok());
        assert!(DirichletBc::new(3, [(3, 0.0)]).is_err());
    }
}
