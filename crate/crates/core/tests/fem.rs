use induction_core::fem::*;
use induction_core::mesh::{build_domain, BoxExtent, DomainSpec, EdgeTag, Mesh, Region};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn graded_mesh() -> Mesh {
    build_domain(&DomainSpec {
        outer: BoxExtent { x0: 0.0, y0: 0.0, x1: 1.0, y1: 0.8 },
        workpiece: vec![[0.2, 0.2], [0.7, 0.25], [0.6, 0.6], [0.25, 0.5]],
        coils: vec![],
        h: 0.15,
        symmetry: vec![],
    })
    .unwrap()
}

fn per_triangle(mesh: &Mesh, seed: u64) -> CoefficientField {
    // Deterministic positive pattern, no RNG needed.
    CoefficientField::PerTriangle(
        (0..mesh.num_triangles()).map(|t| 1.0 + ((t as u64 * 2654435761 + seed) % 97) as f64 / 50.0).collect(),
    )
}

#[test]
fn mass_sum_equals_integral_and_zero_coefficient() {
    let mesh = graded_mesh();
    let c = per_triangle(&mesh, 3);
    let m = assemble_mass(&mesh, &c).unwrap();
    let total: f64 = m.values().iter().sum();
    let exact: f64 = (0..mesh.num_triangles()).map(|t| c.value(t) * mesh.area(t)).sum();
    assert!((total - exact).abs() < 1e-12 * exact.max(1.0));
    let zero = assemble_mass(&mesh, &CoefficientField::Constant(0.0)).unwrap();
    assert!(zero.values().iter().all(|&v| v == 0.0));
    assert_eq!(m.max_asymmetry(), 0.0);
}

#[test]
fn lumped_rows_equal_consistent_rows() {
    let mesh = graded_mesh();
    let c = per_triangle(&mesh, 11);
    let rows = assemble_mass(&mesh, &c).unwrap().row_sums();
    let lumped = assemble_lumped_mass(&mesh, &c).unwrap();
    for (a, b) in rows.iter().zip(&lumped) {
        assert!((a - b).abs() <= 1e-15 * b.abs().max(1e-3));
    }
}

#[test]
fn stiffness_kernel_and_linearity() {
    let mesh = graded_mesh();
    let c = per_triangle(&mesh, 5);
    let k = assemble_stiffness(&mesh, &c).unwrap();
    let ones = vec![1.0; mesh.num_vertices()];
    assert!(k.matvec(&ones).iter().all(|v| v.abs() < 1e-12));
    let doubled = match &c {
        CoefficientField::PerTriangle(v) => CoefficientField::PerTriangle(v.iter().map(|x| 2.0 * x).collect()),
        _ => unreachable!(),
    };
    let k2 = assemble_stiffness(&mesh, &doubled).unwrap();
    assert_eq!(k2, k.scaled(2.0));
}

#[test]
fn assembly_is_bit_reproducible() {
    let mesh = graded_mesh();
    let c = per_triangle(&mesh, 7);
    assert_eq!(assemble_stiffness(&mesh, &c).unwrap(), assemble_stiffness(&mesh, &c).unwrap());
    assert_eq!(assemble_mass(&mesh, &c).unwrap(), assemble_mass(&mesh, &c).unwrap());
}

#[test]
fn robin_load_sums_to_boundary_length() {
    let mesh = graded_mesh();
    let (_, load) = assemble_robin(&mesh, EdgeTag::WorkpieceSurface, 2.0, &BoundaryValue::Constant(3.0)).unwrap();
    let perimeter: f64 = mesh.edges_with_tag(EdgeTag::WorkpieceSurface).map(|e| mesh.edge_length(e.nodes[0], e.nodes[1])).sum();
    assert!((load.iter().sum::<f64>() - 3.0 * perimeter).abs() < 1e-12);
}

#[test]
fn dirichlet_everywhere_gives_zero_solution() {
    let mesh = Mesh::rectangle(0.0, 0.0, 1.0, 1.0, 3, 3, Region::Air).unwrap();
    let mut k = assemble_stiffness(&mesh, &CoefficientField::Constant(1.0)).unwrap();
    let mut rhs = vec![0.0; mesh.num_vertices()];
    let all: Vec<usize> = (0..mesh.num_vertices()).collect();
    apply_dirichlet(&mut k, &mut rhs, &all, &vec![0.0; all.len()]).unwrap();
    let out = solve_spd(&k, &rhs, None, CgOptions::default()).unwrap();
    assert!(out.x.iter().all(|&v| v == 0.0));
}

#[test]
fn poisson_with_lifted_dirichlet_matches_dense_oracle() {
    let mesh = graded_mesh();
    let k = assemble_stiffness(&mesh, &per_triangle(&mesh, 1)).unwrap();
    let f = assemble_load_fn(&mesh, |p| 1.0 + p[0]);
    let outer = mesh.nodes_with_tag(EdgeTag::Outer);
    let vals: Vec<f64> = outer.iter().map(|&i| mesh.vertices[i][1]).collect();
    let (mut a, mut rhs) = (k.clone(), f.clone());
    apply_dirichlet(&mut a, &mut rhs, &outer, &vals).unwrap();
    assert!(a.max_asymmetry() <= 1e-14);
    let x = solve_spd(&a, &rhs, None, CgOptions { tol: 1e-13, max_iter: 5000 }).unwrap().x;

    // Oracle: dense solve of the interior block with the boundary values moved over.
    let n = mesh.num_vertices();
    let mut fixed = vec![None; n];
    for (&i, &v) in outer.iter().zip(&vals) {
        fixed[i] = Some(v);
    }
    let free: Vec<usize> = (0..n).filter(|&i| fixed[i].is_none()).collect();
    let dense = k.to_dense();
    let kk = DMatrix::from_fn(free.len(), free.len(), |r, c| dense[free[r]][free[c]]);
    let bb = DVector::from_fn(free.len(), |r, _| {
        let i = free[r];
        f[i] - (0..n).filter_map(|j| fixed[j].map(|v| dense[i][j] * v)).sum::<f64>()
    });
    let sol = kk.lu().solve(&bb).unwrap();
    for (r, &i) in free.iter().enumerate() {
        assert!((x[i] - sol[r]).abs() < 1e-10, "node {i}: {} vs {}", x[i], sol[r]);
    }
    for (&i, &v) in outer.iter().zip(&vals) {
        assert_eq!(x[i], v);
    }
}

fn spd_matrix(n: usize, seed: &[f64]) -> (SparseMatrix, DMatrix<f64>) {
    // B·Bᵀ + n·I from a seed-filled B.
    let b = DMatrix::from_fn(n, n, |i, j| seed[(i * n + j) % seed.len()]);
    let a = &b * b.transpose() + DMatrix::identity(n, n) * n as f64;
    let trip: Vec<(usize, usize, f64)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| (i, j, a[(i, j)])).collect();
    (SparseMatrix::from_triplets(n, &trip).unwrap(), a)
}

proptest! {
    #[test]
    fn cg_matches_dense_lu(n in 2usize..=10, seed in prop::collection::vec(-1.0f64..1.0, 8..40), rhs in prop::collection::vec(-5.0f64..5.0, 10)) {
        let (a, dense) = spd_matrix(n, &seed);
        let b = &rhs[..n];
        let out = solve_spd(&a, b, None, CgOptions { tol: 1e-14, max_iter: 200 }).unwrap();
        let oracle = dense.lu().solve(&DVector::from_column_slice(b)).unwrap();
        for i in 0..n {
            prop_assert!((out.x[i] - oracle[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn galerkin_consistency_for_linears(a0 in -2.0f64..2.0, a1 in -2.0f64..2.0, b0 in -2.0f64..2.0, b1 in -2.0f64..2.0, c in 0.1f64..10.0) {
        let mesh = Mesh::rectangle(0.0, 0.0, 1.3, 0.7, 5, 4, Region::Air).unwrap();
        let k = assemble_stiffness(&mesh, &CoefficientField::Constant(c)).unwrap();
        let u: Vec<f64> = mesh.vertices.iter().map(|p| a0 * p[0] + a1 * p[1] + 0.3).collect();
        let v: Vec<f64> = mesh.vertices.iter().map(|p| b0 * p[0] + b1 * p[1] - 1.0).collect();
        let vku: f64 = v.iter().zip(k.matvec(&u)).map(|(x, y)| x * y).sum();
        let exact = c * (a0 * b0 + a1 * b1) * 1.3 * 0.7;
        prop_assert!((vku - exact).abs() < 1e-12 * exact.abs().max(1.0));
    }
}
