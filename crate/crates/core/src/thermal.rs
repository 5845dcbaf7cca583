//! Coarse-scale heat equation on the workpiece:
//! `c_v θ_t − κ Δθ = Q̄ − f(θ, z) z_t`, with `κ ∂θ/∂ν + η θ = g` on the
//! exposed surface and homogeneous Neumann on symmetry cuts. Implicit Euler
//! with a lumped capacity matrix.

use crate::assumptions::{finite_positive, Clause, Violation};
use crate::error::{Error, Result};
use crate::fem::{
    assemble_lumped_mass, assemble_robin, assemble_stiffness, solve_spd, BoundaryValue, CgOptions, CoefficientField,
    SparseMatrix,
};
use crate::mesh::{EdgeTag, Mesh};
use crate::phase::PhaseKinetics;

/// Nodes at or below this temperature (K) are skipped by the `1/θ` term.
pub const THETA_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalParams {
    /// Volumetric heat capacity, J/(m³·K).
    pub c_v: f64,
    /// Conductivity, W/(m·K).
    pub kappa: f64,
    /// Surface heat transfer coefficient, W/(m²·K).
    pub eta: f64,
    /// Boundary source, W/m². Usually `η θ_ambient`.
    pub g: f64,
    pub theta0: f64,
}

impl Default for ThermalParams {
    fn default() -> Self {
        ThermalParams { c_v: 3.8e6, kappa: 40.0, eta: 20.0, g: 20.0 * 293.15, theta0: 293.15 }
    }
}

impl ThermalParams {
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (key, v) in [("c_v", self.c_v), ("kappa", self.kappa)] {
            if !finite_positive(v) {
                out.push(Violation::structural(key, format!("must be finite and positive, got {v}")));
            }
        }
        if !(self.eta.is_finite() && self.eta >= 0.0) {
            out.push(Violation::new("eta", Clause::V, format!("heat transfer coefficient {} must be finite and nonnegative", self.eta)));
        }
        if !(self.g.is_finite() && self.g >= 0.0) {
            out.push(Violation::new("g_ambient", Clause::V, format!("boundary source {} must be finite and nonnegative", self.g)));
        }
        if !(self.theta0.is_finite() && self.theta0 >= 0.0) {
            out.push(Violation::new("theta0", Clause::VI, format!("initial temperature {} must be finite and nonnegative", self.theta0)));
        }
        out
    }
}

/// Assembled implicit-Euler operator for a fixed coarse step.
#[derive(Debug, Clone)]
pub struct HeatOperator {
    pub params: ThermalParams,
    pub dt: f64,
    /// Lumped area of each node.
    pub lumped: Vec<f64>,
    /// `∫ g φ_i` over the exposed surface.
    pub boundary_load: Vec<f64>,
    lhs: SparseMatrix,
    pub cg: CgOptions,
}

impl HeatOperator {
    /// `mesh` is the workpiece submesh; its `Outer` edges carry the Robin condition.
    pub fn new(mesh: &Mesh, params: ThermalParams, dt: f64, cg: CgOptions) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("coarse step must be positive, got {dt}")));
        }
        if let Some(v) = params.violations().first() {
            return Err(Error::InvalidArgument(v.to_string()));
        }
        let lumped = assemble_lumped_mass(mesh, &CoefficientField::Constant(1.0))?;
        let stiff = assemble_stiffness(mesh, &CoefficientField::Constant(params.kappa))?;
        let (robin, boundary_load) = if mesh.has_tag(EdgeTag::Outer) {
            assemble_robin(mesh, EdgeTag::Outer, params.eta, &BoundaryValue::Constant(params.g))?
        } else {
            (SparseMatrix::mesh_pattern(mesh), vec![0.0; mesh.num_vertices()])
        };
        let mut lhs = SparseMatrix::lin_comb(1.0, &stiff, 1.0, &robin)?;
        for (i, &m) in lumped.iter().enumerate() {
            lhs.add_to(i, i, params.c_v * m / dt);
        }
        Ok(HeatOperator { params, dt, lumped, boundary_load, lhs, cg })
    }

    pub fn dim(&self) -> usize {
        self.lumped.len()
    }

    /// Advances `θ_n` by one coarse step.
    ///
    /// `q_bar` is the averaged Joule heat per submesh triangle; the latent sink
    /// uses `f(θ_n, z_n)` with the increment `z_next − z_n`.
    pub fn step(
        &self,
        mesh: &Mesh,
        theta: &[f64],
        q_bar: &[f64],
        z: &[f64],
        z_next: &[f64],
        kinetics: &PhaseKinetics,
    ) -> Result<Vec<f64>> {
        let n = self.dim();
        for len in [theta.len(), z.len(), z_next.len()] {
            if len != n {
                return Err(Error::LengthMismatch { expected: n, got: len });
            }
        }
        if q_bar.len() != mesh.num_triangles() {
            return Err(Error::LengthMismatch { expected: mesh.num_triangles(), got: q_bar.len() });
        }
        if let Some(t) = q_bar.iter().position(|&q| !(q >= 0.0)) {
            return Err(Error::InvalidArgument(format!("Joule source must be nonnegative, triangle {t} has {}", q_bar[t])));
        }
        let mut load = assemble_lumped_mass(mesh, &CoefficientField::PerTriangle(q_bar.to_vec()))?;
        for i in 0..n {
            let latent = kinetics.latent_coeff(theta[i], z[i]) * (z_next[i] - z[i]) / self.dt;
            load[i] -= self.lumped[i] * latent;
        }
        self.solve_step(theta, &load)
    }

    /// Implicit Euler step with an arbitrary volume load vector `∫ f φ_i`;
    /// the boundary load is added here.
    pub fn solve_step(&self, theta: &[f64], load: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        if theta.len() != n || load.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: theta.len().min(load.len()) });
        }
        let c = self.params.c_v / self.dt;
        let rhs: Vec<f64> = (0..n).map(|i| c * self.lumped[i] * theta[i] + load[i] + self.boundary_load[i]).collect();
        let out = solve_spd(&self.lhs, &rhs, Some(theta), self.cg)?;
        if !out.converged {
            return Err(Error::SolverDiverged { iterations: out.iterations, residual: out.residual });
        }
        Ok(out.x)
    }
}

/// Nodal entropy-production terms of one coarse step.
#[derive(Debug, Clone, PartialEq)]
pub struct DissipationTerms {
    /// `σ|A_t|²`, from the averaged Joule heat.
    pub joule: Vec<f64>,
    /// `κ|∇θ|²/θ`; zero at skipped nodes.
    pub fourier: Vec<f64>,
    /// `L (z_eq − z)⁺ z_t`.
    pub phase: Vec<f64>,
    /// Nodes with `θ ≤ THETA_FLOOR`, excluded from `fourier`.
    pub skipped: usize,
}

impl DissipationTerms {
    /// Smallest value of each term over all nodes.
    pub fn minima(&self) -> [f64; 3] {
        let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
        [min(&self.joule), min(&self.fourier), min(&self.phase)]
    }
}

/// Evaluates the three terms at the nodes of the workpiece submesh for the
/// step `(θ_n, z_n) → (θ_{n+1}, z_{n+1})`.
///
/// The phase term uses the frozen `θ_n` that drove the phase update and the
/// Fourier term uses `θ_{n+1}`. Per-triangle quantities (`Q̄`, `|∇θ|²`) are
/// carried to the nodes by area-weighted averaging.
#[allow(clippy::too_many_arguments)]
pub fn dissipation_terms(
    mesh: &Mesh,
    q_bar: &[f64],
    theta_frozen: &[f64],
    theta: &[f64],
    z: &[f64],
    z_next: &[f64],
    dt: f64,
    kappa: f64,
    kinetics: &PhaseKinetics,
) -> Result<DissipationTerms> {
    let n = mesh.num_vertices();
    for len in [theta_frozen.len(), theta.len(), z.len(), z_next.len()] {
        if len != n {
            return Err(Error::LengthMismatch { expected: n, got: len });
        }
    }
    if q_bar.len() != mesh.num_triangles() {
        return Err(Error::LengthMismatch { expected: mesh.num_triangles(), got: q_bar.len() });
    }
    let mut weight = vec![0.0; n];
    let mut joule = vec![0.0; n];
    let mut grad2 = vec![0.0; n];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let a = mesh.area(t);
        let g = mesh.field_gradient(t, theta);
        let g2 = g[0] * g[0] + g[1] * g[1];
        for &v in tri {
            weight[v] += a;
            joule[v] += a * q_bar[t];
            grad2[v] += a * g2;
        }
    }
    let mut fourier = vec![0.0; n];
    let mut phase = vec![0.0; n];
    let mut skipped = 0;
    for i in 0..n {
        joule[i] /= weight[i];
        if theta[i] > THETA_FLOOR {
            fourier[i] = kappa * grad2[i] / weight[i] / theta[i];
        } else {
            skipped += 1;
        }
        phase[i] = kinetics.phase_dissipation(theta_frozen[i], z[i], (z_next[i] - z[i]) / dt);
    }
    Ok(DissipationTerms { joule, fourier, phase, skipped })
}
