//! Two-time-scale driver. Each coarse step freezes `(θ, z)`, rebuilds the
//! material coefficients, solves the eddy-current problem to its periodic
//! state on the fine scale, averages the Joule heat over the window and then
//! advances the phase fraction and the temperature by one coarse step.

use crate::eddy::{averaged_joule, run_to_periodic, EddyOperators, PeriodicOptions, PeriodicSolveResult, SourceWaveform};
use crate::error::{Error, Result};
use crate::fem::{CgOptions, CoefficientField};
use crate::geometry::Probe;
use crate::materials::MaterialModel;
use crate::mesh::{submesh, Mesh, Point, Region, Submesh};
use crate::phase::PhaseKinetics;
use crate::thermal::{dissipation_terms, HeatOperator, ThermalParams};

/// Smallest admissible ratio `Δt / δt`.
pub const MIN_SCALE_RATIO: f64 = 100.0;
/// Leading windows of each periodic solve that get the zero-mean correction.
pub const MEAN_CORRECTION_WINDOWS: usize = usize::MAX;
/// Smallest admissible number of fine steps per high-frequency period.
pub const MIN_STEPS_PER_HF_PERIOD: f64 = 20.0;

/// Geometry, data and boundary conditions of one model.
#[derive(Debug, Clone)]
pub struct Problem {
    /// Full mesh: air, coil and workpiece.
    pub mesh: Mesh,
    pub materials: MaterialModel,
    pub kinetics: PhaseKinetics,
    pub thermal: ThermalParams,
    pub source: SourceWaveform,
    /// Nodes where `A = 0`.
    pub em_dirichlet: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedPoint {
    pub name: String,
    pub at: Point,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedBox {
    pub name: String,
    pub area: Probe,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: Problem,
    /// Heating time `T` (s).
    pub total_time: f64,
    /// Coarse step `Δt` (s).
    pub coarse_dt: f64,
    /// Fine steps per averaging window; `δt = window / steps_per_window`.
    pub steps_per_window: usize,
    pub periodic_tol: f64,
    pub max_windows: usize,
    pub em_cg: CgOptions,
    pub heat_cg: CgOptions,
    pub probes: Vec<NamedPoint>,
    pub boxes: Vec<NamedBox>,
    /// Keep a field snapshot every this many coarse steps (0 keeps only the
    /// initial and final states).
    pub snapshot_every: usize,
}

impl RunConfig {
    pub fn fine_dt(&self) -> f64 {
        self.problem.source.window() / self.steps_per_window as f64
    }

    /// Number of coarse steps; `T` must be a whole number of steps.
    pub fn coarse_steps(&self) -> Result<usize> {
        let n = self.total_time / self.coarse_dt;
        let r = n.round();
        if !(n.is_finite() && r >= 0.0 && (n - r).abs() <= 1e-9 * r.max(1.0)) {
            return Err(Error::InvalidArgument(format!(
                "heating time {} is not a whole number of coarse steps {}",
                self.total_time, self.coarse_dt
            )));
        }
        Ok(r as usize)
    }

    /// Scale-separation and resolution guards.
    pub fn check_steps(&self) -> Result<()> {
        if !(self.coarse_dt > 0.0 && self.total_time >= 0.0) {
            return Err(Error::InvalidArgument("need coarse_dt > 0 and total_time >= 0".into()));
        }
        if self.steps_per_window == 0 {
            return Err(Error::InvalidArgument("steps_per_window must be positive".into()));
        }
        let dt = self.fine_dt();
        if self.coarse_dt / dt < MIN_SCALE_RATIO * (1.0 - 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "coarse step {} must be at least {MIN_SCALE_RATIO} fine steps of {dt}",
                self.coarse_dt
            )));
        }
        let hf_period = 1.0 / self.problem.source.f_hf;
        if hf_period / dt < MIN_STEPS_PER_HF_PERIOD * (1.0 - 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "fine step {dt} resolves the high-frequency period with fewer than {MIN_STEPS_PER_HF_PERIOD} steps"
            )));
        }
        if self.problem.source.harmonic().is_none() {
            return Err(Error::InvalidArgument("f_hf must be an integer multiple of f_mf".into()));
        }
        self.coarse_steps()?;
        Ok(())
    }
}

/// Per-step record of the solver and of the admissibility checks.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepDiagnostics {
    pub em_windows: usize,
    pub em_change: f64,
    pub em_converged: bool,
    /// The periodic state was carried over because the coefficients did not change.
    pub em_reused: bool,
    pub em_cg_iterations: usize,
    /// Joule power into the workpiece, W per metre of depth.
    pub power: f64,
    /// Minima of the Joule, Fourier and phase dissipation terms.
    pub dissipation_min: [f64; 3],
    pub fourier_skipped: usize,
    pub min_theta: f64,
    pub max_theta: f64,
    pub min_z: f64,
    pub max_z: f64,
    /// Smallest nodal increment `z_{n+1} − z_n`.
    pub min_dz: f64,
}

#[derive(Debug, Clone)]
pub struct SimulationState {
    pub step: usize,
    pub t: f64,
    /// Last fine sample of the potential on the full mesh.
    pub a: Vec<f64>,
    /// Temperature on the workpiece submesh.
    pub theta: Vec<f64>,
    /// Austenite fraction on the workpiece submesh.
    pub z: Vec<f64>,
    /// Averaged Joule heat per submesh triangle used by the last step.
    pub q_bar: Vec<f64>,
    pub em: Option<PeriodicSolveResult>,
    pub diagnostics: StepDiagnostics,
}

/// Field snapshot on the workpiece submesh.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    pub theta: Vec<f64>,
    pub z: Vec<f64>,
    pub q_bar: Vec<f64>,
}

/// Column-named table, one row per coarse step plus the initial row.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimeSeries {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl TimeSeries {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn last(&self, name: &str) -> Option<f64> {
        self.column(name)?.last().copied()
    }
}

/// Prepared operators and lookups shared by every coarse step of a run.
pub struct Simulation {
    pub cfg: RunConfig,
    pub sub: Submesh,
    pub heat: HeatOperator,
    lumped_full: Vec<f64>,
    probe_at: Vec<(usize, [f64; 3])>,
    box_triangles: Vec<Vec<usize>>,
    coefficients: Option<(CoefficientField, CoefficientField)>,
}

impl Simulation {
    pub fn new(cfg: RunConfig) -> Result<Self> {
        cfg.check_steps()?;
        let p = &cfg.problem;
        p.materials.validate()?;
        if let Some(v) = p.kinetics.violations().first() {
            return Err(Error::InvalidArgument(v.to_string()));
        }
        if let Some(v) = p.source.violations(&p.mesh).first() {
            return Err(Error::InvalidArgument(v.to_string()));
        }
        let sub = submesh(&p.mesh, Region::Workpiece)?;
        let heat = HeatOperator::new(&sub.mesh, p.thermal, cfg.coarse_dt, cfg.heat_cg)?;
        let lumped_full = p.mesh.lumped_areas();
        let probe_at = cfg
            .probes
            .iter()
            .map(|pr| {
                sub.mesh
                    .locate(pr.at)
                    .ok_or_else(|| Error::InvalidArgument(format!("probe {} at {:?} is outside the workpiece", pr.name, pr.at)))
            })
            .collect::<Result<Vec<_>>>()?;
        let box_triangles = cfg
            .boxes
            .iter()
            .map(|b| (0..sub.mesh.num_triangles()).filter(|&t| b.area.contains(sub.mesh.centroid(t))).collect())
            .collect();
        Ok(Simulation { cfg, sub, heat, lumped_full, probe_at, box_triangles, coefficients: None })
    }

    pub fn initial_state(&self) -> SimulationState {
        let n = self.sub.mesh.num_vertices();
        let theta0 = self.cfg.problem.thermal.theta0;
        let diagnostics = StepDiagnostics {
            min_theta: theta0,
            max_theta: theta0,
            em_converged: true,
            ..StepDiagnostics::default()
        };
        SimulationState {
            step: 0,
            t: 0.0,
            a: vec![0.0; self.cfg.problem.mesh.num_vertices()],
            theta: vec![theta0; n],
            z: vec![0.0; n],
            q_bar: vec![0.0; self.sub.mesh.num_triangles()],
            em: None,
            diagnostics,
        }
    }

    fn periodic_options(&self) -> PeriodicOptions {
        PeriodicOptions {
            steps_per_window: self.cfg.steps_per_window,
            tol: self.cfg.periodic_tol,
            max_windows: self.cfg.max_windows,
            mean_correction: MEAN_CORRECTION_WINDOWS,
        }
    }

    /// Coefficient fields for a workpiece fraction `z`.
    pub fn coefficients_for(&self, z: &[f64]) -> Result<(CoefficientField, CoefficientField)> {
        let p = &self.cfg.problem;
        let z_full = self.sub.extend(z, p.mesh.num_vertices(), 0.0);
        Ok((p.materials.sigma_field(&p.mesh, &z_full)?, p.materials.inv_mu_field(&p.mesh, &z_full)?))
    }

    /// Periodic eddy-current state for frozen coefficients, warm-started
    /// from `a_init` and compared against `reference` on the first window.
    pub fn periodic_em(
        &self,
        sigma: &CoefficientField,
        inv_mu: &CoefficientField,
        a_init: &[f64],
        reference: Option<&[Vec<f64>]>,
    ) -> Result<PeriodicSolveResult> {
        let p = &self.cfg.problem;
        let ops = EddyOperators::new(&p.mesh, sigma, inv_mu, &p.source.j0, &p.em_dirichlet, self.cfg.fine_dt(), self.cfg.em_cg)?;
        run_to_periodic(&ops, &p.source, a_init, &self.lumped_full, self.periodic_options(), reference)
    }

    /// One coarse step: EM, averaging, phase, heat.
    pub fn coarse_step(&mut self, state: &SimulationState) -> Result<SimulationState> {
        let p = &self.cfg.problem;
        let dt = self.cfg.coarse_dt;

        let (sigma, inv_mu) = self.coefficients_for(&state.z)?;
        let reuse = match (&self.coefficients, &state.em) {
            (Some((s, m)), Some(prev)) => prev.converged && *s == sigma && *m == inv_mu,
            _ => false,
        };
        let (em, cg_iterations) = if reuse {
            (state.em.clone().unwrap(), 0)
        } else {
            let reference = state.em.as_ref().map(|r| r.samples.as_slice());
            let r = self.periodic_em(&sigma, &inv_mu, &state.a, reference)?;
            let it = r.cg_iterations;
            (r, it)
        };

        let q_full = averaged_joule(&p.mesh, &em, &sigma)?;
        let q_bar = self.sub.restrict_cells(&q_full);
        let z_next = p.kinetics.step_phase(&state.z, &state.theta, dt)?;
        let theta_next = self.heat.step(&self.sub.mesh, &state.theta, &q_bar, &state.z, &z_next, &p.kinetics)?;
        let terms = dissipation_terms(
            &self.sub.mesh,
            &q_bar,
            &state.theta,
            &theta_next,
            &state.z,
            &z_next,
            dt,
            p.thermal.kappa,
            &p.kinetics,
        )?;

        let fold = |v: &[f64], f: fn(f64, f64) -> f64, init: f64| v.iter().copied().fold(init, f);
        let power = (0..self.sub.mesh.num_triangles()).map(|t| q_bar[t] * self.sub.mesh.area(t)).sum();
        let diagnostics = StepDiagnostics {
            em_windows: if reuse { 0 } else { em.windows },
            em_change: em.change,
            em_converged: em.converged,
            em_reused: reuse,
            em_cg_iterations: cg_iterations,
            power,
            dissipation_min: terms.minima(),
            fourier_skipped: terms.skipped,
            min_theta: fold(&theta_next, f64::min, f64::INFINITY),
            max_theta: fold(&theta_next, f64::max, f64::NEG_INFINITY),
            min_z: fold(&z_next, f64::min, f64::INFINITY),
            max_z: fold(&z_next, f64::max, f64::NEG_INFINITY),
            min_dz: z_next.iter().zip(&state.z).map(|(b, a)| b - a).fold(f64::INFINITY, f64::min),
        };
        self.coefficients = Some((sigma, inv_mu));
        Ok(SimulationState {
            step: state.step + 1,
            t: (state.step + 1) as f64 * dt,
            a: em.last().to_vec(),
            theta: theta_next,
            z: z_next,
            q_bar,
            em: Some(em),
            diagnostics,
        })
    }

    /// Point value of a submesh nodal field at probe `k`.
    fn probe_value(&self, k: usize, field: &[f64]) -> f64 {
        let (t, w) = self.probe_at[k];
        let tri = self.sub.mesh.triangles[t];
        w[0] * field[tri[0]] + w[1] * field[tri[1]] + w[2] * field[tri[2]]
    }

    /// `∫ z` over the submesh triangles whose centroids lie in box `k`.
    pub fn box_integral(&self, k: usize, z: &[f64]) -> f64 {
        self.box_triangles[k]
            .iter()
            .map(|&t| {
                let tri = self.sub.mesh.triangles[t];
                self.sub.mesh.area(t) * (z[tri[0]] + z[tri[1]] + z[tri[2]]) / 3.0
            })
            .sum()
    }

    pub fn series_columns(&self) -> Vec<String> {
        let mut c = vec!["t".to_string()];
        for p in &self.cfg.probes {
            c.push(format!("theta_{}", p.name));
            c.push(format!("z_{}", p.name));
        }
        for b in &self.cfg.boxes {
            c.push(format!("zint_{}", b.name));
        }
        for name in [
            "min_theta",
            "max_theta",
            "min_z",
            "max_z",
            "min_dz",
            "min_d_joule",
            "min_d_fourier",
            "min_d_phase",
            "fourier_skipped",
            "power",
            "em_windows",
            "em_change",
            "em_converged",
            "em_cg_iterations",
        ] {
            c.push(name.to_string());
        }
        c
    }

    pub fn series_row(&self, s: &SimulationState) -> Vec<f64> {
        let d = &s.diagnostics;
        let mut row = vec![s.t];
        for k in 0..self.cfg.probes.len() {
            row.push(self.probe_value(k, &s.theta));
            row.push(self.probe_value(k, &s.z));
        }
        for k in 0..self.cfg.boxes.len() {
            row.push(self.box_integral(k, &s.z));
        }
        let dz = if s.step == 0 { 0.0 } else { d.min_dz };
        let (min_z, max_z) = if s.step == 0 { (0.0, 0.0) } else { (d.min_z, d.max_z) };
        row.extend([
            d.min_theta,
            d.max_theta,
            min_z,
            max_z,
            dz,
            d.dissipation_min[0],
            d.dissipation_min[1],
            d.dissipation_min[2],
            d.fourier_skipped as f64,
            d.power,
            d.em_windows as f64,
            if d.em_change.is_finite() { d.em_change } else { -1.0 },
            if d.em_converged { 1.0 } else { 0.0 },
            d.em_cg_iterations as f64,
        ]);
        row
    }

    fn snapshot(s: &SimulationState) -> Snapshot {
        Snapshot { step: s.step, t: s.t, theta: s.theta.clone(), z: s.z.clone(), q_bar: s.q_bar.clone() }
    }
}

/// Outputs of a completed run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub final_state: SimulationState,
    pub series: TimeSeries,
    pub snapshots: Vec<Snapshot>,
    /// Number of coarse steps whose periodic solve hit `max_windows`.
    pub unconverged_em_steps: usize,
}

/// Runs `cfg` from the initial state to `T`. `on_step` sees every state
/// after it is recorded, including the initial one.
pub fn run_simulation_with(cfg: RunConfig, mut on_step: impl FnMut(&Simulation, &SimulationState)) -> Result<(Simulation, RunOutput)> {
    let mut sim = Simulation::new(cfg)?;
    let steps = sim.cfg.coarse_steps()?;
    let mut state = sim.initial_state();
    let mut series = TimeSeries { columns: sim.series_columns(), rows: vec![sim.series_row(&state)] };
    let mut snapshots = vec![Simulation::snapshot(&state)];
    let mut unconverged = 0;
    on_step(&sim, &state);
    for n in 1..=steps {
        state = sim.coarse_step(&state)?;
        if !state.diagnostics.em_converged {
            unconverged += 1;
        }
        series.rows.push(sim.series_row(&state));
        let every = sim.cfg.snapshot_every;
        if n == steps || (every > 0 && n % every == 0) {
            snapshots.push(Simulation::snapshot(&state));
        }
        on_step(&sim, &state);
    }
    Ok((sim, RunOutput { final_state: state, series, snapshots, unconverged_em_steps: unconverged }))
}

pub fn run_simulation(cfg: RunConfig) -> Result<(Simulation, RunOutput)> {
    run_simulation_with(cfg, |_, _| {})
}

/// Workpiece Joule power of unit-amplitude medium- and high-frequency
/// excitation for the initial coefficients.
pub fn unit_powers(cfg: &RunConfig) -> Result<(f64, f64)> {
    let mut out = [0.0; 2];
    for (k, (a_mf, a_hf)) in [(1.0, 0.0), (0.0, 1.0)].into_iter().enumerate() {
        let mut c = cfg.clone();
        c.problem.source = c.problem.source.with_amplitudes(a_mf, a_hf);
        let sim = Simulation::new(c)?;
        let z = vec![0.0; sim.sub.mesh.num_vertices()];
        let (sigma, inv_mu) = sim.coefficients_for(&z)?;
        let em = sim.periodic_em(&sigma, &inv_mu, &vec![0.0; sim.cfg.problem.mesh.num_vertices()], None)?;
        let q = averaged_joule(&sim.cfg.problem.mesh, &em, &sigma)?;
        out[k] = (0..q.len()).filter(|&t| sim.cfg.problem.mesh.regions[t] == Region::Workpiece).map(|t| q[t] * sim.cfg.problem.mesh.area(t)).sum();
    }
    Ok((out[0], out[1]))
}

/// Amplitudes delivering `power` W/m into the initial workpiece, a fraction
/// `hf_share` of it at the high frequency. Powers of the two tones add
/// because their cross term averages out over the common window.
pub fn amplitudes_for_power(units: (f64, f64), power: f64, hf_share: f64) -> Result<(f64, f64)> {
    if !(power >= 0.0 && (0.0..=1.0).contains(&hf_share)) {
        return Err(Error::InvalidArgument(format!("need power >= 0 and hf_share in [0, 1], got {power}, {hf_share}")));
    }
    let amp = |p: f64, unit: f64| -> Result<f64> {
        if p == 0.0 {
            Ok(0.0)
        } else if unit > 0.0 {
            Ok((p / unit).sqrt())
        } else {
            Err(Error::InvalidArgument("unit excitation deposits no power in the workpiece".into()))
        }
    };
    Ok((amp(power * (1.0 - hf_share), units.0)?, amp(power * hf_share, units.1)?))
}

/// How the data are perturbed in [`stability_probe`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Perturbation {
    /// Scale both source amplitudes by `1 + ε`.
    Source,
    /// Raise the initial temperature by `ε` times its value.
    InitialTemperature,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub eps: f64,
    /// `D(ε)` and `D(ε/2)`.
    pub d_eps: f64,
    pub d_half: f64,
    pub ratio: f64,
    pub pass: bool,
}

/// Distance between two final states: `‖Δθ‖_{L²} + ‖ΔA_t‖_{L²} + ‖Δz‖_{H¹}`.
pub fn state_distance(sim: &Simulation, a: &SimulationState, b: &SimulationState) -> f64 {
    let m = &sim.sub.mesh;
    let lumped = &sim.heat.lumped;
    let l2 = |w: &[f64], x: &[f64], y: &[f64]| -> f64 { w.iter().zip(x).zip(y).map(|((w, x), y)| w * (x - y) * (x - y)).sum::<f64>().sqrt() };
    let d_theta = l2(lumped, &a.theta, &b.theta);
    let dz_l2 = l2(lumped, &a.z, &b.z);
    let dz: Vec<f64> = a.z.iter().zip(&b.z).map(|(x, y)| x - y).collect();
    let grad: f64 = (0..m.num_triangles())
        .map(|t| {
            let g = m.field_gradient(t, &dz);
            m.area(t) * (g[0] * g[0] + g[1] * g[1])
        })
        .sum();
    let d_z = (dz_l2 * dz_l2 + grad).sqrt();
    let d_at = match (&a.em, &b.em) {
        (Some(ea), Some(eb)) => {
            let j = ea.samples.len() - 2;
            l2(&sim.lumped_full, &ea.a_t(j), &eb.a_t(j))
        }
        _ => 0.0,
    };
    d_theta + d_at + d_z
}

fn perturbed(cfg: &RunConfig, how: Perturbation, eps: f64) -> RunConfig {
    let mut c = cfg.clone();
    match how {
        Perturbation::Source => {
            let s = &c.problem.source;
            c.problem.source = s.with_amplitudes(s.a_mf * (1.0 + eps), s.a_hf * (1.0 + eps));
        }
        Perturbation::InitialTemperature => c.problem.thermal.theta0 *= 1.0 + eps,
    }
    c
}

/// Data-to-solution sensitivity `D(ε)` at the final time, for each `ε` in
/// `eps`, compared against `D(ε/2)`.
pub fn stability_probe(cfg: &RunConfig, how: Perturbation, eps: &[f64]) -> Result<Vec<StabilityReport>> {
    let (sim, base) = run_simulation(cfg.clone())?;
    let d = |e: f64| -> Result<f64> {
        if e == 0.0 {
            return Ok(0.0);
        }
        let (_, other) = run_simulation(perturbed(cfg, how, e))?;
        Ok(state_distance(&sim, &base.final_state, &other.final_state) / e)
    };
    let mut out = Vec::new();
    for &e in eps {
        let d_eps = d(e)?;
        let d_half = d(e / 2.0)?;
        let ratio = d_half / d_eps;
        out.push(StabilityReport { eps: e, d_eps, d_half, ratio, pass: (0.5..=2.0).contains(&ratio) });
    }
    Ok(out)
}
