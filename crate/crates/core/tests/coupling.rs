use induction_core::coupling::*;
use induction_core::eddy::{averaged_joule, SourceWaveform};
use induction_core::fem::CgOptions;
use induction_core::geometry::StripGeometry;
use induction_core::materials::MaterialModel;
use induction_core::mesh::{build_domain, EdgeTag, Mesh, Region};
use induction_core::phase::PhaseKinetics;
use induction_core::thermal::{HeatOperator, ThermalParams};

fn small(a_mf: f64, a_hf: f64, theta0: f64) -> RunConfig {
    let g = StripGeometry { width: 1e-3, depth: 3e-3, gap: 0.5e-3, coil_thickness: 0.5e-3, top_air: 2e-3, h: 0.5e-3 };
    let mesh = build_domain(&g.domain()).unwrap();
    let source = SourceWaveform::uniform(&mesh, 1e6, 1e4, 2e4).with_amplitudes(a_mf, a_hf);
    let em_dirichlet = mesh.nodes_with_tag(EdgeTag::Outer);
    RunConfig {
        problem: Problem {
            mesh,
            materials: MaterialModel::default(),
            kinetics: PhaseKinetics::default(),
            thermal: ThermalParams { theta0, ..ThermalParams::default() },
            source,
            em_dirichlet,
        },
        total_time: 4e-3,
        coarse_dt: 2e-3,
        steps_per_window: 40,
        periodic_tol: 1e-8,
        max_windows: 200,
        em_cg: CgOptions { tol: 1e-12, max_iter: 10_000 },
        heat_cg: CgOptions { tol: 1e-12, max_iter: 10_000 },
        probes: vec![],
        boxes: vec![],
        snapshot_every: 0,
    }
}

#[test]
fn driver_matches_manual_composition() {
    let cfg = small(1e3, 0.0, 1050.0);
    let kin = cfg.problem.kinetics;
    let dt = cfg.coarse_dt;
    let mut driver = Simulation::new(cfg.clone()).unwrap();
    let manual = Simulation::new(cfg.clone()).unwrap();
    let mut state = driver.initial_state();
    let (mut a, mut theta, mut z) = (state.a.clone(), state.theta.clone(), state.z.clone());
    let mut reference: Option<Vec<Vec<f64>>> = None;
    for _ in 0..2 {
        let next = driver.coarse_step(&state).unwrap();

        let (sigma, inv_mu) = manual.coefficients_for(&z).unwrap();
        let em = manual.periodic_em(&sigma, &inv_mu, &a, reference.as_deref()).unwrap();
        let q = manual.sub.restrict_cells(&averaged_joule(&cfg.problem.mesh, &em, &sigma).unwrap());
        let z_next = kin.step_phase(&z, &theta, dt).unwrap();
        let theta_next = manual.heat.step(&manual.sub.mesh, &theta, &q, &z, &z_next, &kin).unwrap();

        assert_eq!(next.q_bar, q);
        assert_eq!(next.z, z_next);
        assert_eq!(next.theta, theta_next);
        a = em.last().to_vec();
        reference = Some(em.samples.clone());
        theta = theta_next;
        z = z_next;
        state = next;
    }
    assert!(state.z.iter().any(|&v| v > 0.0), "the fixture must exercise the phase path");
}

#[test]
fn zero_heating_time_returns_initial_state() {
    let mut cfg = small(1.0, 0.0, 293.15);
    cfg.total_time = 0.0;
    let (sim, out) = run_simulation(cfg).unwrap();
    assert_eq!(out.series.rows.len(), 1);
    assert_eq!(out.final_state.theta, sim.initial_state().theta);
    assert_eq!(out.snapshots.len(), 1);
}

#[test]
fn series_has_one_row_per_step_plus_initial() {
    let (_, out) = run_simulation(small(1.0, 0.0, 293.15)).unwrap();
    assert_eq!(out.series.rows.len(), 3);
    let t = out.series.column("t").unwrap();
    assert!(t.windows(2).all(|w| w[1] > w[0]));
    assert!(out.series.rows.iter().all(|r| r.len() == out.series.columns.len()));
}

#[test]
fn unpowered_part_at_ambient_stays_put() {
    let cfg = small(0.0, 0.0, 293.15);
    let (_, out) = run_simulation(cfg).unwrap();
    let s = &out.final_state;
    assert!(s.theta.iter().all(|&v| (v - 293.15).abs() < 1e-9));
    assert!(s.z.iter().all(|&v| v == 0.0));
    assert!(s.q_bar.iter().all(|&v| v == 0.0));
    assert_eq!(out.series.column("em_windows").unwrap(), vec![0.0, 1.0, 0.0], "zero window accepted, then reused");
}

#[test]
fn periodic_state_forgets_its_warm_start() {
    let cfg = small(1.0, 0.0, 293.15);
    let sim = Simulation::new(cfg.clone()).unwrap();
    let z = vec![0.0; sim.sub.mesh.num_vertices()];
    let (sigma, inv_mu) = sim.coefficients_for(&z).unwrap();
    let n = cfg.problem.mesh.num_vertices();
    let cold = sim.periodic_em(&sigma, &inv_mu, &vec![0.0; n], None).unwrap();
    let noise: Vec<f64> = (0..n).map(|i| 1e-9 * (i as f64 * 0.7).sin()).collect();
    let warm = sim.periodic_em(&sigma, &inv_mu, &noise, None).unwrap();
    let q0 = averaged_joule(&cfg.problem.mesh, &cold, &sigma).unwrap();
    let q1 = averaged_joule(&cfg.problem.mesh, &warm, &sigma).unwrap();
    let total = |q: &[f64]| q.iter().sum::<f64>();
    assert!((total(&q0) - total(&q1)).abs() <= 1e-5 * total(&q0));
}

#[test]
fn calibrated_two_tone_drive_delivers_the_budget() {
    let mut cfg = small(0.0, 0.0, 293.15);
    let units = unit_powers(&cfg).unwrap();
    let (a_mf, a_hf) = amplitudes_for_power(units, 500.0, 0.3).unwrap();
    cfg.problem.source = cfg.problem.source.with_amplitudes(a_mf, a_hf);
    cfg.total_time = cfg.coarse_dt;
    let (_, out) = run_simulation(cfg).unwrap();
    let p = out.series.last("power").unwrap();
    assert!((p - 500.0).abs() <= 1e-4 * 500.0, "delivered {p}");
}

#[test]
fn insulated_heat_step_conserves_energy() {
    let mesh = Mesh::rectangle(0.0, 0.0, 2e-3, 1e-3, 8, 4, Region::Workpiece).unwrap();
    let params = ThermalParams { eta: 0.0, g: 0.0, ..ThermalParams::default() };
    let kin = PhaseKinetics { latent: 0.0, ..PhaseKinetics::default() };
    let dt = 0.01;
    let op = HeatOperator::new(&mesh, params, dt, CgOptions { tol: 1e-14, max_iter: 1000 }).unwrap();
    let theta: Vec<f64> = mesh.vertices.iter().map(|p| 300.0 + 1e5 * p[0]).collect();
    let q: Vec<f64> = (0..mesh.num_triangles()).map(|t| 1e8 * (1.0 + (t % 5) as f64)).collect();
    let z = vec![0.0; mesh.num_vertices()];
    let next = op.step(&mesh, &theta, &q, &z, &z, &kin).unwrap();
    let lumped = mesh.lumped_areas();
    let gained: f64 = lumped.iter().zip(next.iter().zip(&theta)).map(|(w, (b, a))| params.c_v * w * (b - a)).sum();
    let supplied: f64 = (0..mesh.num_triangles()).map(|t| dt * q[t] * mesh.area(t)).sum();
    assert!((gained - supplied).abs() <= 1e-9 * supplied, "{gained} vs {supplied}");
}

#[test]
fn scale_guards_reject_unresolved_steps() {
    let mut cfg = small(1.0, 0.0, 293.15);
    cfg.steps_per_window = 20;
    assert!(Simulation::new(cfg.clone()).is_err(), "10 steps per HF period must be rejected");
    cfg.steps_per_window = 40;
    cfg.coarse_dt = 1e-5;
    cfg.total_time = 2e-5;
    assert!(Simulation::new(cfg).is_err(), "coarse/fine ratio below 100 must be rejected");
}
