//! P1 finite elements on triangles: sparse storage, assembly, constraints and CG.

mod assembly;
mod cg;
mod sparse;

pub use assembly::{
    apply_dirichlet, assemble_load, assemble_load_fn, assemble_lumped_mass, assemble_mass, assemble_robin,
    assemble_stiffness, l2_error, BoundaryValue, CoefficientField, DirichletBc,
};
pub use cg::{solve_spd, CgOptions, CgOutcome};
pub use sparse::SparseMatrix;

/// Nodal values, one per mesh vertex.
pub type NodalField = Vec<f64>;
