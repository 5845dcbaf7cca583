//! Self-contained verification battery: analytic skin depth, period-averaged
//! Joule heat, manufactured-solution convergence orders, phase-integrator
//! exactness and the dissipation auditor. Every oracle is closed-form or
//! brute force; no external data are read.

use std::f64::consts::PI;

use serde::Serialize;

use crate::coupling::{RunOutput, TimeSeries};
use crate::eddy::{averaged_joule, run_to_periodic, skin_depth, EddyOperators, PeriodicOptions, PeriodicSolveResult, SourceWaveform};
use crate::error::{Error, Result};
use crate::fem::{assemble_load_fn, l2_error, CgOptions, CoefficientField};
use crate::geometry::StripGeometry;
use crate::mesh::{build_domain, refine_boundary_layer, submesh, EdgeTag, Mesh, Region};
use crate::phase::{PhaseKinetics, TauModel, Z_CEILING};
use crate::thermal::{DissipationTerms, HeatOperator, ThermalParams};

/// Violation tolerance for sign and bound checks.
pub const SIGN_TOL: f64 = 1e-12;

/// One machine-readable battery entry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub metric: String,
    pub value: f64,
    pub threshold: String,
    pub pass: bool,
}

impl CheckRecord {
    pub fn at_most(name: &str, metric: &str, value: f64, limit: f64) -> Self {
        CheckRecord { name: name.into(), metric: metric.into(), value, threshold: format!("<= {limit:e}"), pass: value <= limit }
    }

    pub fn at_least(name: &str, metric: &str, value: f64, limit: f64) -> Self {
        CheckRecord { name: name.into(), metric: metric.into(), value, threshold: format!(">= {limit:e}"), pass: value >= limit }
    }

    pub fn within(name: &str, metric: &str, value: f64, lo: f64, hi: f64) -> Self {
        CheckRecord { name: name.into(), metric: metric.into(), value, threshold: format!("in [{lo}, {hi}]"), pass: value >= lo && value <= hi }
    }

    pub fn json(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderReport {
    /// Mesh or step sizes, coarse to fine.
    pub sizes: Vec<f64>,
    pub errors: Vec<f64>,
    /// Least-squares slope of `ln error` against `ln size`.
    pub order: f64,
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn order_report(sizes: Vec<f64>, errors: Vec<f64>) -> Result<OrderReport> {
    if sizes.len() < 3 {
        return Err(Error::InvalidArgument("an order estimate needs at least three levels".into()));
    }
    if let Some(e) = errors.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
        return Err(Error::FitFailure(format!("error {e} is not positive")));
    }
    let lx: Vec<f64> = sizes.iter().map(|s| s.ln()).collect();
    let ly: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    Ok(OrderReport { order: ls_slope(&lx, &ly), sizes, errors })
}

// ---------------------------------------------------------------- skin depth

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkinDepthResult {
    pub frequency: f64,
    pub analytic: f64,
    pub fitted: f64,
    pub rel_error: f64,
    pub samples: usize,
    pub nodes: usize,
    pub windows: usize,
}

/// Strip of width and fit band proportional to a length unit, by default
/// the analytic depth `δ` of the run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkinStrip {
    /// Length unit for every other field; `None` uses the analytic `δ`.
    pub unit: Option<f64>,
    /// Width in units of `δ`.
    pub width: f64,
    /// Conductor depth in units of `δ`.
    pub depth: f64,
    /// Refined surface band in units of `δ`; the fit uses its inner 80%.
    pub band: f64,
    /// Initial mesh size in units of `δ`.
    pub h: f64,
    pub levels: usize,
    pub steps_per_period: usize,
    pub periodic_tol: f64,
}

impl Default for SkinStrip {
    fn default() -> Self {
        SkinStrip { unit: None, width: 5.0, depth: 8.0, band: 4.0, h: 0.5, levels: 2, steps_per_period: 64, periodic_tol: 1e-5 }
    }
}

/// First-harmonic amplitude of `A_t` at every node over the last window.
pub fn first_harmonic_amplitude(result: &PeriodicSolveResult, omega: f64) -> Vec<f64> {
    let steps = result.samples.len() - 1;
    let n = result.samples[0].len();
    let (mut re, mut im) = (vec![0.0; n], vec![0.0; n]);
    for j in 0..steps {
        let t = (j as f64 + 0.5) * result.dt;
        let (s, c) = (omega * t).sin_cos();
        for (i, v) in result.a_t(j).into_iter().enumerate() {
            re[i] += v * c;
            im[i] += v * s;
        }
    }
    (0..n).map(|i| 2.0 / steps as f64 * re[i].hypot(im[i])).collect()
}

/// Runs a conductor strip under a coil sheet to periodicity at frequency `f`
/// and fits the exponential decay of the `A_t` amplitude against depth.
pub fn skin_depth_case(f: f64, sigma: f64, mu: f64, strip: SkinStrip) -> Result<SkinDepthResult> {
    let delta = skin_depth(f, mu, sigma);
    let u = strip.unit.unwrap_or(delta);
    let g = StripGeometry {
        width: strip.width * u,
        depth: strip.depth * u,
        gap: 0.5 * u,
        coil_thickness: 0.5 * u,
        top_air: 2.0 * u,
        h: strip.h * u,
    };
    let mesh0 = build_domain(&g.domain())?;
    let mesh = refine_boundary_layer(&mesh0, EdgeTag::WorkpieceSurface, strip.band * u, strip.levels)?;
    let sig: Vec<f64> = mesh.regions.iter().map(|&r| if r == Region::Air { 0.0 } else { sigma }).collect();
    let sig = CoefficientField::PerTriangle(sig);
    let nu = CoefficientField::Constant(1.0 / mu);
    let src = SourceWaveform::uniform(&mesh, 1.0, f, f);
    let dt = 1.0 / f / strip.steps_per_period as f64;
    let dir = mesh.nodes_with_tag(EdgeTag::Outer);
    let ops = EddyOperators::new(&mesh, &sig, &nu, &src.j0, &dir, dt, CgOptions { tol: 1e-11, max_iter: 20_000 })?;
    let opts = PeriodicOptions { steps_per_window: strip.steps_per_period, tol: strip.periodic_tol, max_windows: 1000, mean_correction: 3 };
    let result = run_to_periodic(&ops, &src, &vec![0.0; mesh.num_vertices()], &mesh.lumped_areas(), opts, None)?;
    let amp = first_harmonic_amplitude(&result, 2.0 * PI * f);

    let sub = submesh(&mesh, Region::Workpiece)?;
    let band = strip.band * u;
    let (mut depth, mut log_amp) = (Vec::new(), Vec::new());
    for &p in &sub.node_map {
        let d = -mesh.vertices[p][1];
        if d >= 0.1 * band && d <= 0.9 * band {
            if !(amp[p] > 0.0) {
                return Err(Error::FitFailure(format!("zero amplitude at depth {d}")));
            }
            depth.push(d);
            log_amp.push(amp[p].ln());
        }
    }
    if depth.len() < 3 {
        return Err(Error::FitFailure("fewer than three samples in the fit window".into()));
    }
    let slope = ls_slope(&depth, &log_amp);
    if !(slope < 0.0) {
        return Err(Error::FitFailure(format!("amplitude does not decay with depth (slope {slope})")));
    }
    let fitted = -1.0 / slope;
    Ok(SkinDepthResult {
        frequency: f,
        analytic: delta,
        fitted,
        rel_error: (fitted - delta).abs() / delta,
        samples: depth.len(),
        nodes: mesh.num_vertices(),
        windows: result.windows,
    })
}

/// The same strip and mesh (sized by the depth at `f`, two refinement
/// levels) run at `f` and at `4f`.
pub fn skin_depth_pair(f: f64, sigma: f64, mu: f64) -> Result<(SkinDepthResult, SkinDepthResult)> {
    let strip = SkinStrip { unit: Some(skin_depth(f, mu, sigma)), levels: 2, ..SkinStrip::default() };
    Ok((skin_depth_case(f, sigma, mu, strip)?, skin_depth_case(4.0 * f, sigma, mu, strip)?))
}

/// Relative deviation of `δ(4f)/δ(f)` from one half.
pub fn depth_halving_error(at_f: &SkinDepthResult, at_4f: &SkinDepthResult) -> f64 {
    (at_4f.fitted / at_f.fitted - 0.5).abs() / 0.5
}

// ------------------------------------------------------------- averaged Joule

fn sampled_window(mesh: &Mesh, steps: usize, window: f64, a: impl Fn(f64) -> f64) -> PeriodicSolveResult {
    let dt = window / steps as f64;
    let samples = (0..=steps).map(|j| vec![a(j as f64 * dt); mesh.num_vertices()]).collect();
    PeriodicSolveResult { samples, dt, windows: 1, change: 0.0, converged: true, cg_iterations: 0 }
}

/// Composite Simpson rule of `g` over `[0, window]` with `n` (even) panels.
fn simpson(g: impl Fn(f64) -> f64, window: f64, n: usize) -> f64 {
    let h = window / n as f64;
    let mut s = g(0.0) + g(window);
    for k in 1..n {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * g(k as f64 * h);
    }
    s * h / 3.0
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JouleCheck {
    pub computed: f64,
    pub closed_form: f64,
    pub quadrature: f64,
    /// Relative deviation of `computed` from the closed form.
    pub rel_error: f64,
    /// Relative deviation of the quadrature oracle from the closed form.
    pub oracle_gap: f64,
}

/// Averaged Joule heat of a uniform field `A(t) = A₀ sin ω₁t + B₀ sin ω₂t`
/// sampled at `steps` fine instants over one `ω₁` period.
pub fn joule_two_tone(sigma: f64, a0: f64, f1: f64, b0: f64, f2: f64, steps: usize) -> Result<JouleCheck> {
    let mesh = Mesh::rectangle(0.0, 0.0, 1.0, 1.0, 1, 1, Region::Workpiece)?;
    let (w1, w2) = (2.0 * PI * f1, 2.0 * PI * f2);
    let window = 1.0 / f1;
    let result = sampled_window(&mesh, steps, window, |t| a0 * (w1 * t).sin() + b0 * (w2 * t).sin());
    let q = averaged_joule(&mesh, &result, &CoefficientField::Constant(sigma))?;
    let closed_form = 0.5 * sigma * (a0 * a0 * w1 * w1 + b0 * b0 * w2 * w2);
    let quadrature = sigma
        * simpson(
            |t| {
                let at = a0 * w1 * (w1 * t).cos() + b0 * w2 * (w2 * t).cos();
                at * at
            },
            window,
            200_000,
        )
        / window;
    Ok(JouleCheck {
        computed: q[0],
        closed_form,
        quadrature,
        rel_error: (q[0] - closed_form).abs() / closed_form,
        oracle_gap: (quadrature - closed_form).abs() / closed_form,
    })
}

// ------------------------------------------------------- manufactured orders

/// Heat equation on the unit square with `θ = e^{−t} cos πx cos πy`
/// (homogeneous Neumann), `Δt = h²`, errors in L² at `t_end`.
pub fn manufactured_heat_order(levels: usize) -> Result<OrderReport> {
    let (c_v, kappa, t_end) = (1.0, 0.1, 0.25);
    let exact = |p: [f64; 2], t: f64| (-t).exp() * (PI * p[0]).cos() * (PI * p[1]).cos();
    let mut sizes = Vec::new();
    let mut errors = Vec::new();
    for l in 0..levels {
        let n = 4usize << l;
        let h = 1.0 / n as f64;
        let mesh = Mesh::rectangle(0.0, 0.0, 1.0, 1.0, n, n, Region::Workpiece)?;
        let params = ThermalParams { c_v, kappa, eta: 0.0, g: 0.0, theta0: 0.0 };
        let steps = (t_end / (h * h)).round() as usize;
        let dt = t_end / steps as f64;
        let op = HeatOperator::new(&mesh, params, dt, CgOptions { tol: 1e-13, max_iter: 10_000 })?;
        let mut theta: Vec<f64> = mesh.vertices.iter().map(|&p| exact(p, 0.0)).collect();
        for k in 1..=steps {
            let t = k as f64 * dt;
            let load = assemble_load_fn(&mesh, |p| (2.0 * PI * PI * kappa - c_v) * exact(p, t));
            theta = op.solve_step(&theta, &load)?;
        }
        sizes.push(h);
        errors.push(l2_error(&mesh, &theta, |p| exact(p, t_end)));
    }
    order_report(sizes, errors)
}

/// Temporal order of the implicit Euler heat step on a fixed mesh, against a
/// same-mesh reference with a 32 times smaller step.
pub fn heat_temporal_order(levels: usize) -> Result<OrderReport> {
    let (c_v, kappa, t_end) = (1.0, 0.1, 0.5);
    let exact = |p: [f64; 2], t: f64| (-t).exp() * (PI * p[0]).cos() * (PI * p[1]).cos();
    let mesh = Mesh::rectangle(0.0, 0.0, 1.0, 1.0, 8, 8, Region::Workpiece)?;
    let run = |steps: usize| -> Result<Vec<f64>> {
        let dt = t_end / steps as f64;
        let params = ThermalParams { c_v, kappa, eta: 0.0, g: 0.0, theta0: 0.0 };
        let op = HeatOperator::new(&mesh, params, dt, CgOptions { tol: 1e-13, max_iter: 10_000 })?;
        let mut theta: Vec<f64> = mesh.vertices.iter().map(|&p| exact(p, 0.0)).collect();
        for k in 1..=steps {
            let load = assemble_load_fn(&mesh, |p| (2.0 * PI * PI * kappa - c_v) * exact(p, k as f64 * dt));
            theta = op.solve_step(&theta, &load)?;
        }
        Ok(theta)
    };
    let base = 5usize;
    let reference = run(base << (levels + 4))?;
    let lumped = mesh.lumped_areas();
    let mut sizes = Vec::new();
    let mut errors = Vec::new();
    for l in 0..levels {
        let steps = base << l;
        let theta = run(steps)?;
        sizes.push(t_end / steps as f64);
        errors.push(lumped.iter().zip(&theta).zip(&reference).map(|((w, a), b)| w * (a - b) * (a - b)).sum::<f64>().sqrt());
    }
    order_report(sizes, errors)
}

/// Periodic profile `s(t)` solving `σ s′ + λ s = sin ωt`.
fn periodic_profile(sigma: f64, lambda: f64, omega: f64, t: f64) -> f64 {
    (lambda * (omega * t).sin() - sigma * omega * (omega * t).cos()) / (lambda * lambda + sigma * sigma * omega * omega)
}

/// Eddy-current equation on the unit square with `A = sin πx sin πy · s(t)`,
/// `A = 0` on the boundary, one period from the exact initial state. The
/// fine step is small enough that the spatial error dominates.
pub fn manufactured_em_order(levels: usize) -> Result<OrderReport> {
    let (sigma, nu, f) = (1.0, 1.0, 1.0);
    let omega = 2.0 * PI * f;
    let lambda = 2.0 * PI * PI * nu;
    let phi = |p: [f64; 2]| (PI * p[0]).sin() * (PI * p[1]).sin();
    let steps = 2000;
    let mut sizes = Vec::new();
    let mut errors = Vec::new();
    for l in 0..levels {
        let n = 4usize << l;
        let mesh = Mesh::rectangle(0.0, 0.0, 1.0, 1.0, n, n, Region::Workpiece)?;
        let load = assemble_load_fn(&mesh, phi);
        let src = SourceWaveform { j0: vec![0.0; mesh.num_triangles()], a_mf: 1.0, a_hf: 0.0, f_mf: f, f_hf: f };
        let dir = mesh.nodes_with_tag(EdgeTag::Outer);
        let ops = EddyOperators::with_load(
            &mesh,
            &CoefficientField::Constant(sigma),
            &CoefficientField::Constant(nu),
            load,
            &dir,
            1.0 / f / steps as f64,
            CgOptions { tol: 1e-13, max_iter: 10_000 },
        )?;
        let mut a: Vec<f64> = mesh.vertices.iter().map(|&p| phi(p) * periodic_profile(sigma, lambda, omega, 0.0)).collect();
        for j in 0..steps {
            a = ops.step_cn(&a, j as f64 * ops.dt, &src, Some(&a))?.a;
        }
        let s_end = periodic_profile(sigma, lambda, omega, 1.0 / f);
        sizes.push(1.0 / n as f64);
        errors.push(l2_error(&mesh, &a, |p| phi(p) * s_end));
    }
    order_report(sizes, errors)
}

/// Crank-Nicolson on a single free node (2×2 grid, all boundary nodes
/// clamped): the semi-discrete system is the scalar ODE `m a′ + k a = l sin ωt`,
/// solved exactly and compared at one period for halving steps.
pub fn cn_temporal_order(levels: usize) -> Result<OrderReport> {
    let (sigma, nu, f) = (10.0, 1.0, 1.0);
    let omega = 2.0 * PI * f;
    let mesh = Mesh::rectangle(0.0, 0.0, 1.0, 1.0, 2, 2, Region::Workpiece)?;
    let centre = mesh.vertices.iter().position(|p| p[0] == 0.5 && p[1] == 0.5).expect("2×2 grid has a centre node");
    let j0 = vec![1.0; mesh.num_triangles()];
    let src = SourceWaveform { j0: j0.clone(), a_mf: 1.0, a_hf: 0.0, f_mf: f, f_hf: f };
    let dir: Vec<usize> = (0..mesh.num_vertices()).filter(|&i| i != centre).collect();
    let probe = EddyOperators::new(&mesh, &CoefficientField::Constant(sigma), &CoefficientField::Constant(nu), &j0, &dir, 1.0, CgOptions::default())?;
    let (m, k, l) = (probe.mass.get(centre, centre), probe.stiffness.get(centre, centre), probe.unit_load[centre]);
    // a(t) = l·[periodic part − its value at 0 decaying], a(0) = 0.
    let exact = |t: f64| l * (periodic_profile(m, k, omega, t) - periodic_profile(m, k, omega, 0.0) * (-k * t / m).exp());
    let mut sizes = Vec::new();
    let mut errors = Vec::new();
    for lv in 0..levels {
        let steps = 16usize << lv;
        let dt = 1.0 / f / steps as f64;
        let ops = EddyOperators::new(&mesh, &CoefficientField::Constant(sigma), &CoefficientField::Constant(nu), &j0, &dir, dt, CgOptions { tol: 1e-14, max_iter: 100 })?;
        let mut a = vec![0.0; mesh.num_vertices()];
        for j in 0..steps {
            a = ops.step_cn(&a, j as f64 * dt, &src, None)?.a;
        }
        sizes.push(dt);
        errors.push((a[centre] - exact(1.0 / f)).abs());
    }
    order_report(sizes, errors)
}

/// A spatially linear temperature is a fixed point of the heat step when the
/// load carries exactly its boundary flux. Returns the max nodal deviation.
pub fn heat_linear_exactness() -> Result<f64> {
    let mesh = Mesh::rectangle(0.0, 0.0, 2.0, 1.0, 6, 3, Region::Workpiece)?;
    let (gx, gy, kappa) = (3.0, -2.0, 1.7);
    let lin = |p: [f64; 2]| 5.0 + gx * p[0] + gy * p[1];
    let params = ThermalParams { c_v: 2.0, kappa, eta: 0.0, g: 0.0, theta0: 0.0 };
    let op = HeatOperator::new(&mesh, params, 0.1, CgOptions { tol: 1e-14, max_iter: 1000 })?;
    // ∮ κ ∂θ/∂ν φ_i, exact for a linear θ since the flux is constant per edge.
    let mut load = vec![0.0; mesh.num_vertices()];
    let (x0, x1, y0, y1) = (0.0, 2.0, 0.0, 1.0);
    for e in &mesh.boundary_edges {
        let [a, b] = e.nodes;
        let (p, q) = (mesh.vertices[a], mesh.vertices[b]);
        let mid = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
        let normal = if mid[0] == x0 {
            [-1.0, 0.0]
        } else if mid[0] == x1 {
            [1.0, 0.0]
        } else if mid[1] == y0 {
            [0.0, -1.0]
        } else {
            debug_assert_eq!(mid[1], y1);
            [0.0, 1.0]
        };
        let flux = kappa * (gx * normal[0] + gy * normal[1]) * mesh.edge_length(a, b) / 2.0;
        load[a] += flux;
        load[b] += flux;
    }
    let theta: Vec<f64> = mesh.vertices.iter().map(|&p| lin(p)).collect();
    let next = op.solve_step(&theta, &load)?;
    Ok(next.iter().zip(&theta).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

// --------------------------------------------------------------- phase law

/// Classical RK4 on `z′ = (z_eq(θ) − z)⁺/τ(θ)` with θ held at `theta` for `dt`.
pub fn rk4_phase(k: &PhaseKinetics, z: f64, theta: f64, dt: f64, substeps: usize) -> f64 {
    let h = dt / substeps as f64;
    let rate = |z: f64| k.phase_rate(z.clamp(0.0, 1.0), theta);
    let mut z = z;
    for _ in 0..substeps {
        let k1 = rate(z);
        let k2 = rate(z + 0.5 * h * k1);
        let k3 = rate(z + 0.5 * h * k2);
        let k4 = rate(z + h * k3);
        z += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    z
}

/// Largest relative deviation of the exponential integrator from the closed
/// form `z_eq − (z_eq − z₀) e^{−Δt/τ}` over a grid of constant-θ cases.
pub fn phase_closed_form_error() -> f64 {
    let k = PhaseKinetics { a_s: 1000.0, a_f: 1100.0, tau: TauModel::Constant(0.05), latent: 0.0 };
    let mut worst: f64 = 0.0;
    for &theta in &[1010.0, 1040.0, 1075.0, 1099.0, 1200.0] {
        for &z0 in &[0.0, 0.1, 0.3] {
            for &dt in &[1e-4, 1e-2, 0.05, 0.3] {
                let ze = k.z_eq(theta);
                if z0 >= ze {
                    continue;
                }
                let closed = ze - (ze - z0) * (-dt / 0.05f64).exp();
                let got = k.step_node(z0, theta, dt);
                worst = worst.max((got - closed).abs() / closed);
            }
        }
    }
    worst
}

/// Four substeps of piecewise-constant θ, each `τ_*/10` long, against RK4
/// with 1000 steps per substep. Returns the max absolute deviation.
pub fn phase_rk4_deviation() -> f64 {
    let k = PhaseKinetics {
        a_s: 1000.0,
        a_f: 1100.0,
        tau: TauModel::Ramp { cold: 0.04, hot: 0.01, theta_lo: 1000.0, theta_hi: 1100.0 },
        latent: 0.0,
    };
    let (tau_lo, _) = k.tau.bounds();
    let dt = tau_lo / 10.0;
    let thetas = [1020.0, 1055.0, 1090.0, 1130.0];
    let (mut ze, mut zr) = (0.0, 0.0);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        for &th in &thetas {
            ze = k.step_node(ze, th, dt);
            zr = rk4_phase(&k, zr, th, dt, 1000);
            worst = worst.max((ze - zr).abs());
        }
    }
    worst
}

// ----------------------------------------------------------------- auditors

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AuditReport {
    /// Minima of the Joule, Fourier and phase terms.
    pub minima: [f64; 3],
    pub pass: bool,
}

pub fn audit_terms(terms: &DissipationTerms) -> AuditReport {
    let minima = terms.minima();
    AuditReport { minima, pass: minima.iter().all(|&m| m >= -SIGN_TOL) }
}

/// Audit over every recorded step of a run's time series.
pub fn dissipation_audit(ts: &TimeSeries) -> Result<AuditReport> {
    let col = |name: &str| ts.column(name).ok_or_else(|| Error::InvalidArgument(format!("series has no `{name}` column")));
    let min = |v: Vec<f64>| v.into_iter().fold(f64::INFINITY, f64::min);
    let minima = [min(col("min_d_joule")?), min(col("min_d_fourier")?), min(col("min_d_phase")?)];
    Ok(AuditReport { minima, pass: minima.iter().all(|&m| m >= -SIGN_TOL) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundsReport {
    pub min_z: f64,
    pub max_z: f64,
    pub min_dz: f64,
    pub min_theta: f64,
    pub pass: bool,
}

/// `0 ≤ z < 1`, `z` nondecreasing and `θ ≥ 0` over a run's time series.
pub fn bounds_audit(ts: &TimeSeries) -> Result<BoundsReport> {
    let col = |name: &str| ts.column(name).ok_or_else(|| Error::InvalidArgument(format!("series has no `{name}` column")));
    let min = |v: Vec<f64>| v.into_iter().fold(f64::INFINITY, f64::min);
    let max = |v: Vec<f64>| v.into_iter().fold(f64::NEG_INFINITY, f64::max);
    let r = BoundsReport {
        min_z: min(col("min_z")?),
        max_z: max(col("max_z")?),
        min_dz: min(col("min_dz")?),
        min_theta: min(col("min_theta")?),
        pass: false,
    };
    let pass = r.min_z >= -SIGN_TOL && r.max_z < 1.0 && r.min_dz >= -SIGN_TOL && r.min_theta >= -SIGN_TOL;
    Ok(BoundsReport { pass, ..r })
}

/// Feeds the auditor a state whose phase fraction decreases; it must fail.
pub fn auditor_self_test() -> Result<bool> {
    let mesh = Mesh::rectangle(0.0, 0.0, 1.0, 1.0, 2, 2, Region::Workpiece)?;
    let n = mesh.num_vertices();
    let k = PhaseKinetics::default();
    let theta = vec![1050.0; n];
    let z = vec![0.2; n];
    let z_next = vec![0.1; n];
    let terms = crate::thermal::dissipation_terms(&mesh, &vec![0.0; mesh.num_triangles()], &theta, &theta, &z, &z_next, 1.0, 1.0, &k)?;
    Ok(!audit_terms(&terms).pass)
}

/// Bound, monotonicity, dissipation and periodic-convergence checks of a run.
pub fn run_checks(out: &RunOutput) -> Result<Vec<CheckRecord>> {
    let b = bounds_audit(&out.series)?;
    let d = dissipation_audit(&out.series)?;
    Ok(vec![
        CheckRecord::at_least("bounds_min_z", "min z", b.min_z, -SIGN_TOL),
        CheckRecord::at_most("bounds_max_z", "max z (below 1)", b.max_z, Z_CEILING),
        CheckRecord::at_least("monotone_z", "min z increment", b.min_dz, -SIGN_TOL),
        CheckRecord::at_least("bounds_theta", "min theta", b.min_theta, -SIGN_TOL),
        CheckRecord::at_least("dissipation_joule", "min term", d.minima[0], -SIGN_TOL),
        CheckRecord::at_least("dissipation_fourier", "min term", d.minima[1], -SIGN_TOL),
        CheckRecord::at_least("dissipation_phase", "min term", d.minima[2], -SIGN_TOL),
        CheckRecord::at_most("em_periodic_unconverged", "coarse steps", out.unconverged_em_steps as f64, 0.0),
    ])
}

// -------------------------------------------------------------- selectivity

/// Artifact factor: the dominant region must exceed the other by this much.
pub const SELECTIVITY_RATIO: f64 = 2.0;
/// Artifact factor: the mixed run must reach this share of the best single tone.
pub const MIXED_SHARE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionPair {
    pub root: f64,
    pub tip: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelectivityReport {
    pub mf: RegionPair,
    pub hf: RegionPair,
    pub mixed: RegionPair,
    pub mf_root_dominant: bool,
    pub hf_tip_dominant: bool,
    pub mixed_covers_both: bool,
}

impl SelectivityReport {
    pub fn pass(&self) -> bool {
        self.mf_root_dominant && self.hf_tip_dominant && self.mixed_covers_both
    }
}

fn region_pair(ts: &TimeSeries) -> Result<RegionPair> {
    let get = |name: &str| ts.last(name).ok_or_else(|| Error::InvalidArgument(format!("series has no `{name}` column")));
    Ok(RegionPair { root: get("zint_root")?, tip: get("zint_tip")? })
}

/// Compares the final root and tip phase integrals of an MF-only, an
/// HF-only and a mixed run (series need `zint_root` and `zint_tip`).
pub fn selectivity_report(mf: &TimeSeries, hf: &TimeSeries, mixed: &TimeSeries) -> Result<SelectivityReport> {
    let (mf, hf, mixed) = (region_pair(mf)?, region_pair(hf)?, region_pair(mixed)?);
    let best_root = mf.root.max(hf.root);
    let best_tip = mf.tip.max(hf.tip);
    Ok(SelectivityReport {
        mf,
        hf,
        mixed,
        mf_root_dominant: mf.root > SELECTIVITY_RATIO * mf.tip,
        hf_tip_dominant: hf.tip > SELECTIVITY_RATIO * hf.root,
        mixed_covers_both: mixed.root > MIXED_SHARE * best_root && mixed.tip > MIXED_SHARE * best_tip,
    })
}

// ------------------------------------------------------------------ battery

/// Runs every hermetic case and returns one record per check.
pub fn run_battery() -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    out.push(CheckRecord::at_most("phase_closed_form", "max relative error", phase_closed_form_error(), 1e-10));
    out.push(CheckRecord::at_most("phase_rk4", "max abs deviation", phase_rk4_deviation(), 1e-6));

    let (s1, s4) = skin_depth_pair(1e4, 1e6, crate::materials::MU_0)?;
    out.push(CheckRecord::at_most("skin_depth", "relative error of fitted depth", s1.rel_error, 0.05));
    out.push(CheckRecord::at_most("skin_depth_4f", "relative deviation of depth ratio from 1/2", depth_halving_error(&s1, &s4), 0.10));

    let one = joule_two_tone(1e6, 1e-5, 3000.0, 0.0, 3000.0, 64)?;
    out.push(CheckRecord::at_most("joule_one_tone", "relative error", one.rel_error, 0.01));
    let two = joule_two_tone(1e6, 1e-5, 3000.0, 4e-6, 30_000.0, 400)?;
    out.push(CheckRecord::at_most("joule_two_tone", "relative error", two.rel_error, 0.01));

    out.push(CheckRecord::at_most("heat_linear_exact", "max nodal error", heat_linear_exactness()?, 1e-10));
    let h = manufactured_heat_order(4)?;
    out.push(CheckRecord::within("heat_spatial_order", "L2 order", h.order, 1.8, 2.2));
    let ht = heat_temporal_order(4)?;
    out.push(CheckRecord::at_least("heat_temporal_order", "order", ht.order, 0.9));
    let e = manufactured_em_order(4)?;
    out.push(CheckRecord::within("em_spatial_order", "L2 order", e.order, 1.8, 2.2));
    let c = cn_temporal_order(4)?;
    out.push(CheckRecord::within("em_temporal_order", "order", c.order, 1.9, 2.1));

    let flagged = auditor_self_test()?;
    out.push(CheckRecord::at_least("dissipation_self_test", "violation flagged", if flagged { 1.0 } else { 0.0 }, 1.0));
    Ok(out)
}
