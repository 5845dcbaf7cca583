//! Time-domain eddy currents in the planar scalar-potential reduction:
//! `σ A_t − div(ν ∇A) = u(t) J₀`, `ν = 1/μ`, stepped by Crank-Nicolson to a
//! time-periodic state, plus the period-averaged Joule heat.

use std::f64::consts::PI;

use crate::assumptions::{Clause, Violation};
use crate::error::{Error, Result};
use crate::fem::{
    assemble_load, assemble_mass, assemble_stiffness, solve_spd, CgOptions, CoefficientField, DirichletBc,
    SparseMatrix,
};
use crate::mesh::{Mesh, Region};

/// Coil excitation `J_source(x, t) = u(t) J₀(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceWaveform {
    /// Current density per triangle (A/m²); nonzero only on coil triangles.
    pub j0: Vec<f64>,
    pub a_mf: f64,
    pub a_hf: f64,
    pub f_mf: f64,
    pub f_hf: f64,
}

/// `a_MF sin(2π f_MF t) + a_HF sin(2π f_HF t)`.
pub fn u_eval(w: &SourceWaveform, t: f64) -> f64 {
    w.a_mf * (2.0 * PI * w.f_mf * t).sin() + w.a_hf * (2.0 * PI * w.f_hf * t).sin()
}

impl SourceWaveform {
    /// Uniform density `density` on every coil triangle, unit amplitudes.
    pub fn uniform(mesh: &Mesh, density: f64, f_mf: f64, f_hf: f64) -> Self {
        let j0 = mesh.regions.iter().map(|&r| if r == Region::Coil { density } else { 0.0 }).collect();
        SourceWaveform { j0, a_mf: 1.0, a_hf: 0.0, f_mf, f_hf }
    }

    pub fn u(&self, t: f64) -> f64 {
        u_eval(self, t)
    }

    pub fn with_amplitudes(&self, a_mf: f64, a_hf: f64) -> Self {
        SourceWaveform { a_mf, a_hf, ..self.clone() }
    }

    /// Ratio `f_HF / f_MF` when it is an integer ≥ 1.
    pub fn harmonic(&self) -> Option<u64> {
        let r = self.f_hf / self.f_mf;
        let k = r.round();
        ((r - k).abs() <= 1e-9 * r.max(1.0) && k >= 1.0).then_some(k as u64)
    }

    /// Averaging window: one medium-frequency period.
    pub fn window(&self) -> f64 {
        1.0 / self.f_mf
    }

    /// Amplitude, frequency and harmonic checks.
    pub fn violations_without_mesh(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (key, v) in [("a_mf", self.a_mf), ("a_hf", self.a_hf)] {
            if !v.is_finite() {
                out.push(Violation::new(key, Clause::III, format!("amplitude {v} is not finite")));
            }
        }
        for (key, v) in [("f_mf", self.f_mf), ("f_hf", self.f_hf)] {
            if !(v.is_finite() && v > 0.0) {
                out.push(Violation::new(key, Clause::III, format!("frequency {v} must be finite and positive")));
            }
        }
        if out.is_empty() && self.harmonic().is_none() {
            out.push(Violation::structural(
                "f_hf",
                format!("f_hf = {} must be an integer multiple of f_mf = {}", self.f_hf, self.f_mf),
            ));
        }
        out
    }

    /// All checks, including the support of `J₀` on `mesh`.
    pub fn violations(&self, mesh: &Mesh) -> Vec<Violation> {
        let mut out = self.violations_without_mesh();
        if self.j0.len() != mesh.num_triangles() {
            out.push(Violation::structural("J0", "current density needs one value per triangle"));
        } else {
            for (t, &j) in self.j0.iter().enumerate() {
                if !j.is_finite() {
                    out.push(Violation::new("J0", Clause::III, format!("current density on triangle {t} is not finite")));
                    break;
                }
                if j != 0.0 && mesh.regions[t] != Region::Coil {
                    out.push(Violation::structural("J0", format!("current density on non-coil triangle {t}")));
                    break;
                }
            }
        }
        out
    }
}

/// `(M_σ, K)` for the given coefficient fields.
pub fn assemble_eddy(mesh: &Mesh, sigma: &CoefficientField, inv_mu: &CoefficientField) -> Result<(SparseMatrix, SparseMatrix)> {
    if sigma.min() < 0.0 {
        return Err(Error::Coefficient(format!("conductivity must be nonnegative, min is {}", sigma.min())));
    }
    Ok((assemble_mass(mesh, sigma)?, assemble_stiffness(mesh, inv_mu)?))
}

/// Frozen-coefficient operators for Crank-Nicolson with a fixed step.
#[derive(Debug, Clone)]
pub struct EddyOperators {
    pub mass: SparseMatrix,
    pub stiffness: SparseMatrix,
    /// `∫ J₀ φ_i` for unit amplitude.
    pub unit_load: Vec<f64>,
    pub bc: DirichletBc,
    pub dt: f64,
    lhs: SparseMatrix,
    explicit: SparseMatrix,
    pub cg: CgOptions,
}

impl EddyOperators {
    pub fn new(
        mesh: &Mesh,
        sigma: &CoefficientField,
        inv_mu: &CoefficientField,
        j0: &[f64],
        dirichlet_nodes: &[usize],
        dt: f64,
        cg: CgOptions,
    ) -> Result<Self> {
        let unit_load = assemble_load(mesh, &CoefficientField::PerTriangle(j0.to_vec()))?;
        Self::with_load(mesh, sigma, inv_mu, unit_load, dirichlet_nodes, dt, cg)
    }

    /// Like [`Self::new`] with an arbitrary unit-amplitude load vector.
    pub fn with_load(
        mesh: &Mesh,
        sigma: &CoefficientField,
        inv_mu: &CoefficientField,
        unit_load: Vec<f64>,
        dirichlet_nodes: &[usize],
        dt: f64,
        cg: CgOptions,
    ) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("fine step must be positive, got {dt}")));
        }
        if unit_load.len() != mesh.num_vertices() {
            return Err(Error::LengthMismatch { expected: mesh.num_vertices(), got: unit_load.len() });
        }
        let (mass, stiffness) = assemble_eddy(mesh, sigma, inv_mu)?;
        let bc = DirichletBc::homogeneous(mesh.num_vertices(), dirichlet_nodes)?;
        let lhs = bc.eliminate_matrix(&SparseMatrix::lin_comb(1.0 / dt, &mass, 0.5, &stiffness)?)?;
        let explicit = SparseMatrix::lin_comb(1.0 / dt, &mass, -0.5, &stiffness)?;
        Ok(EddyOperators { mass, stiffness, unit_load, bc, dt, lhs, explicit, cg })
    }

    pub fn dim(&self) -> usize {
        self.mass.dim()
    }

    /// One Crank-Nicolson step from `t_n`; `guess` seeds the CG iteration.
    pub fn step_cn(&self, a_n: &[f64], t_n: f64, src: &SourceWaveform, guess: Option<&[f64]>) -> Result<StepOutcome> {
        let mut rhs = self.explicit.matvec(a_n);
        let u_mean = 0.5 * (src.u(t_n) + src.u(t_n + self.dt));
        if u_mean != 0.0 {
            for (r, l) in rhs.iter_mut().zip(&self.unit_load) {
                *r += u_mean * l;
            }
        }
        self.bc.lift_rhs(&self.lhs, &mut rhs);
        let out = solve_spd(&self.lhs, &rhs, guess, self.cg)?;
        if !out.converged {
            return Err(Error::SolverDiverged { iterations: out.iterations, residual: out.residual });
        }
        Ok(StepOutcome { a: out.x, iterations: out.iterations })
    }
}

#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub a: Vec<f64>,
    pub iterations: usize,
}

/// Controls for [`run_to_periodic`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicOptions {
    /// Fine steps per averaging window.
    pub steps_per_window: usize,
    pub tol: f64,
    pub max_windows: usize,
    /// For this many leading windows, the window's time mean is removed from
    /// the next start. The periodic state has zero mean, so this only strips
    /// the slowly decaying offset of a cold start.
    pub mean_correction: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicSolveResult {
    /// `A` at the `steps_per_window + 1` fine instants of the last window.
    pub samples: Vec<Vec<f64>>,
    pub dt: f64,
    pub windows: usize,
    /// Relative window-to-window change at exit.
    pub change: f64,
    pub converged: bool,
    pub cg_iterations: usize,
}

impl PeriodicSolveResult {
    pub fn window(&self) -> f64 {
        self.dt * (self.samples.len() - 1) as f64
    }

    /// Midpoint time derivative `(A_{j+1} − A_j)/δt`.
    pub fn a_t(&self, j: usize) -> Vec<f64> {
        self.samples[j + 1].iter().zip(&self.samples[j]).map(|(b, a)| (b - a) / self.dt).collect()
    }

    /// Window mean of `A_t²` per node: `(1/window) Σ δt (A_t)²`.
    pub fn mean_at_squared(&self) -> Vec<f64> {
        let n = self.samples[0].len();
        let steps = self.samples.len() - 1;
        let mut acc = vec![0.0; n];
        for j in 0..steps {
            for (i, a) in acc.iter_mut().enumerate() {
                let d = (self.samples[j + 1][i] - self.samples[j][i]) / self.dt;
                *a += d * d;
            }
        }
        for a in &mut acc {
            *a /= steps as f64;
        }
        acc
    }

    pub fn last(&self) -> &[f64] {
        self.samples.last().unwrap()
    }
}

fn weighted_sq(weights: &[f64], a: &[f64], b: Option<&[f64]>) -> f64 {
    match b {
        Some(b) => weights.iter().zip(a).zip(b).map(|((w, x), y)| w * (x - y) * (x - y)).sum(),
        None => weights.iter().zip(a).map(|(w, x)| w * x * x).sum(),
    }
}

/// Relative `L²(window; L²(D))` distance between two sample windows, with the
/// spatial norm taken in the lumped-mass inner product.
pub fn window_change(lumped: &[f64], new: &[Vec<f64>], old: &[Vec<f64>]) -> f64 {
    let mut diff = 0.0;
    let mut norm = 0.0;
    for (a, b) in new.iter().zip(old) {
        diff += weighted_sq(lumped, a, Some(b));
        norm += weighted_sq(lumped, a, None);
    }
    if diff == 0.0 {
        0.0
    } else if norm == 0.0 {
        f64::INFINITY
    } else {
        (diff / norm).sqrt()
    }
}

/// Steps whole windows from `a_init` until consecutive windows agree to `tol`.
///
/// The first window is accepted immediately when it is identically zero, or
/// when it matches `reference` (typically the previous coarse step's window)
/// to `tol`. Otherwise at least two windows are run. Running out of windows
/// is reported through `converged`, not as an error.
pub fn run_to_periodic(
    ops: &EddyOperators,
    src: &SourceWaveform,
    a_init: &[f64],
    lumped: &[f64],
    opts: PeriodicOptions,
    reference: Option<&[Vec<f64>]>,
) -> Result<PeriodicSolveResult> {
    if a_init.len() != ops.dim() {
        return Err(Error::LengthMismatch { expected: ops.dim(), got: a_init.len() });
    }
    if opts.steps_per_window == 0 || opts.max_windows == 0 {
        return Err(Error::InvalidArgument("need at least one step and one window".into()));
    }
    let mut start = a_init.to_vec();
    for &i in ops.bc.nodes() {
        start[i] = 0.0;
    }
    let mut previous: Option<Vec<Vec<f64>>> = reference.map(|r| r.to_vec());
    let mut cg_iterations = 0;
    let mut change = f64::INFINITY;
    for w in 1..=opts.max_windows {
        let mut samples = Vec::with_capacity(opts.steps_per_window + 1);
        samples.push(start.clone());
        for j in 0..opts.steps_per_window {
            let t = j as f64 * ops.dt;
            let cur = &samples[j];
            let guess: Vec<f64> = if j >= 1 {
                cur.iter().zip(&samples[j - 1]).map(|(c, p)| 2.0 * c - p).collect()
            } else {
                cur.clone()
            };
            let step = ops.step_cn(cur, t, src, Some(&guess))?;
            cg_iterations += step.iterations;
            samples.push(step.a);
        }
        let all_zero = samples.iter().all(|s| s.iter().all(|&v| v == 0.0));
        if all_zero {
            return Ok(PeriodicSolveResult { samples, dt: ops.dt, windows: w, change: 0.0, converged: true, cg_iterations });
        }
        if let Some(prev) = &previous {
            if prev.len() == samples.len() && prev[0].len() == samples[0].len() {
                change = window_change(lumped, &samples, prev);
                if change <= opts.tol {
                    return Ok(PeriodicSolveResult { samples, dt: ops.dt, windows: w, change, converged: true, cg_iterations });
                }
            }
        }
        start = samples.last().unwrap().clone();
        if w <= opts.mean_correction {
            let inv = 1.0 / opts.steps_per_window as f64;
            for s in &samples[1..] {
                for (a, v) in start.iter_mut().zip(s) {
                    *a -= v * inv;
                }
            }
            for &i in ops.bc.nodes() {
                start[i] = 0.0;
            }
        }
        if w == opts.max_windows {
            return Ok(PeriodicSolveResult { samples, dt: ops.dt, windows: w, change, converged: false, cg_iterations });
        }
        previous = Some(samples);
    }
    unreachable!("loop returns on its last window")
}

/// Per-triangle period-averaged Joule heat `σ_T · mean_T(mean_t A_t²)` (W/m³).
pub fn averaged_joule(mesh: &Mesh, result: &PeriodicSolveResult, sigma: &CoefficientField) -> Result<Vec<f64>> {
    if result.samples.len() < 2 {
        return Err(Error::InvalidArgument("periodic result holds no steps".into()));
    }
    let at2 = result.mean_at_squared();
    if at2.len() != mesh.num_vertices() {
        return Err(Error::LengthMismatch { expected: mesh.num_vertices(), got: at2.len() });
    }
    Ok(mesh
        .triangles
        .iter()
        .enumerate()
        .map(|(t, tri)| {
            let s = sigma.value(t);
            if s == 0.0 {
                0.0
            } else {
                s * (at2[tri[0]] + at2[tri[1]] + at2[tri[2]]) / 3.0
            }
        })
        .collect())
}

/// Heating power `∫ Q̄` over the triangles of `region` (W per metre of depth).
pub fn region_power(mesh: &Mesh, q: &[f64], region: Region) -> f64 {
    (0..mesh.num_triangles()).filter(|&t| mesh.regions[t] == region).map(|t| q[t] * mesh.area(t)).sum()
}

/// Flux density `B = (∂A/∂y, −∂A/∂x)` per triangle.
pub fn compute_b(mesh: &Mesh, a: &[f64]) -> Vec<[f64; 2]> {
    (0..mesh.num_triangles())
        .map(|t| {
            let g = mesh.field_gradient(t, a);
            [g[1], -g[0]]
        })
        .collect()
}

/// Skin depth `sqrt(2 / (ω μ σ))`.
pub fn skin_depth(f: f64, mu: f64, sigma: f64) -> f64 {
    (2.0 / (2.0 * PI * f * mu * sigma)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::EdgeTag;

    #[test]
    fn waveform_values() {
        let w = SourceWaveform { j0: vec![], a_mf: 1.0, a_hf: 0.5, f_mf: 100.0, f_hf: 1000.0 };
        assert_eq!(w.u(0.0), 0.0);
        let peak = w.with_amplitudes(1.0, 0.0).u(1.0 / 400.0);
        assert!((peak - 1.0).abs() < 1e-15);
        // 1 + 0.5·sin(5π)
        assert!((w.u(1.0 / 400.0) - 1.0).abs() < 1e-12);
        assert_eq!(w.harmonic(), Some(10));
        assert_eq!(SourceWaveform { f_hf: 250.0, ..w }.harmonic(), None);
    }

    #[test]
    fn one_dof_amplification_factor() {
        // Single free node: σ a' + k a = 0 reduces to the scalar CN factor.
        let (sigma, k, dt) = (2.0, 3.0, 0.1);
        let m = SparseMatrix::identity(1).scaled(sigma);
        let kk = SparseMatrix::identity(1).scaled(k);
        let lhs = SparseMatrix::lin_comb(1.0 / dt, &m, 0.5, &kk).unwrap();
        let explicit = SparseMatrix::lin_comb(1.0 / dt, &m, -0.5, &kk).unwrap();
        let ops = EddyOperators {
            mass: m,
            stiffness: kk,
            unit_load: vec![0.0],
            bc: DirichletBc::homogeneous(1, &[]).unwrap(),
            dt,
            lhs,
            explicit,
            cg: CgOptions { tol: 1e-15, max_iter: 10 },
        };
        let src = SourceWaveform { j0: vec![], a_mf: 0.0, a_hf: 0.0, f_mf: 1.0, f_hf: 1.0 };
        let a1 = ops.step_cn(&[1.0], 0.0, &src, None).unwrap().a[0];
        let r = k * dt / (2.0 * sigma);
        assert!((a1 - (1.0 - r) / (1.0 + r)).abs() < 1e-14);
    }

    #[test]
    fn zero_source_converges_in_one_window() {
        let mesh = Mesh::rectangle(0.0, 0.0, 1.0, 1.0, 4, 4, Region::Coil).unwrap();
        let src = SourceWaveform::uniform(&mesh, 1.0, 50.0, 100.0).with_amplitudes(0.0, 0.0);
        let z = vec![0.0; mesh.num_vertices()];
        let model = crate::materials::MaterialModel::default();
        let ops = EddyOperators::new(
            &mesh,
            &model.sigma_field(&mesh, &z).unwrap(),
            &model.inv_mu_field(&mesh, &z).unwrap(),
            &src.j0,
            &mesh.nodes_with_tag(EdgeTag::Outer),
            1e-4,
            CgOptions::default(),
        )
        .unwrap();
        let opts = PeriodicOptions { steps_per_window: 200, tol: 1e-3, max_windows: 5, mean_correction: 0 };
        let r = run_to_periodic(&ops, &src, &z, &mesh.lumped_areas(), opts, None).unwrap();
        assert_eq!(r.windows, 1);
        assert!(r.converged);
        assert_eq!(r.samples.len(), 201);
        assert!(r.samples.iter().all(|s| s.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn b_of_linear_field() {
        let mesh = Mesh::rectangle(0.0, 0.0, 1.0, 1.0, 3, 3, Region::Air).unwrap();
        let a: Vec<f64> = mesh.vertices.iter().map(|p| p[0]).collect();
        for b in compute_b(&mesh, &a) {
            assert!(b[0].abs() < 1e-14 && (b[1] + 1.0).abs() < 1e-14);
        }
        assert!(compute_b(&mesh, &vec![2.0; mesh.num_vertices()]).iter().all(|b| b[0] == 0.0 && b[1] == 0.0));
    }

    #[test]
    fn skin_depth_reference_value() {
        let d = skin_depth(1e4, 4e-7 * PI, 1e6);
        assert!((d - 5.0329e-3).abs() < 1e-6);
        assert!((skin_depth(4e4, 4e-7 * PI, 1e6) - d / 2.0).abs() < 1e-15);
    }
}
