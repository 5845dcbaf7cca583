//! Acceptance report: one PASS/FAIL line per criterion. Runs the shipped
//! scenarios, so it takes several minutes in the optimized test profile.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use induction_core::coupling::{run_simulation, stability_probe, Perturbation, RunOutput};
use induction_core::io::{write_run_outputs, Config};
use induction_core::materials::MU_0;
use induction_core::verification::*;

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, name: &str, pass: bool, detail: String) {
        if !pass {
            self.failures += 1;
        }
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    }

    fn error(&mut self, name: &str, e: impl std::fmt::Display) {
        self.line(name, false, format!("error: {e}"));
    }
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn run_scenario(name: &str, hf_share: Option<f64>) -> induction_core::Result<RunOutput> {
    let cfg = Config::load(&scenario(name)).map_err(induction_core::Error::from)?;
    let (rc, _) = cfg.resolved_run_config(hf_share)?;
    Ok(run_simulation(rc)?.1)
}

fn phase_ode(r: &mut Report) {
    let closed = phase_closed_form_error();
    let rk4 = phase_rk4_deviation();
    r.line(
        "phase_ode",
        closed <= 1e-10 && rk4 <= 1e-6,
        format!("closed-form rel err {closed:.2e} (<= 1e-10), RK4 deviation {rk4:.2e} (<= 1e-6)"),
    );
}

fn skin(r: &mut Report) {
    let (s1, s4) = match skin_depth_pair(1e4, 1e6, MU_0) {
        Ok(p) => p,
        Err(e) => return r.error("skin_depth", e),
    };
    let halving = depth_halving_error(&s1, &s4);
    r.line(
        "skin_depth",
        s1.rel_error <= 0.05 && halving <= 0.10,
        format!(
            "fitted {:.4e} m vs analytic {:.4e} m, rel err {:.2e} (<= 0.05); same mesh at 4f: ratio {:.4}, deviation from 1/2 {:.2e} (<= 0.10)",
            s1.fitted,
            s1.analytic,
            s1.rel_error,
            s4.fitted / s1.fitted,
            halving
        ),
    );
}

fn joule(r: &mut Report) {
    let (one, two) = match (joule_two_tone(1e6, 1e-5, 3000.0, 0.0, 3000.0, 64), joule_two_tone(1e6, 1e-5, 3000.0, 4e-6, 30_000.0, 400)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return r.error("averaged_joule", e),
    };
    let vs_quad = (two.computed - two.quadrature).abs() / two.quadrature;
    r.line(
        "averaged_joule",
        one.rel_error <= 0.01 && two.rel_error <= 0.01 && vs_quad <= 0.01,
        format!(
            "one tone rel err {:.2e}; two tone rel err {:.2e} vs closed form, {:.2e} vs quadrature (all <= 1e-2)",
            one.rel_error, two.rel_error, vs_quad
        ),
    );
}

fn orders(r: &mut Report) {
    let res = (|| -> induction_core::Result<_> { Ok((manufactured_heat_order(4)?, manufactured_em_order(4)?, cn_temporal_order(4)?)) })();
    match res {
        Ok((h, e, c)) => {
            let ok = (1.8..=2.2).contains(&h.order) && (1.8..=2.2).contains(&e.order) && (1.9..=2.1).contains(&c.order);
            r.line(
                "convergence_orders",
                ok,
                format!(
                    "heat spatial {:.3}, EM spatial {:.3} (in [1.8, 2.2]); CN temporal {:.3} (in [1.9, 2.1])",
                    h.order, e.order, c.order
                ),
            );
        }
        Err(e) => r.error("convergence_orders", e),
    }
}

fn scenario_audits(r: &mut Report, runs: &[(&str, &RunOutput)]) {
    let mut bounds_ok = true;
    let mut bounds_detail = Vec::new();
    let mut diss_ok = true;
    let mut diss_detail = Vec::new();
    for (name, out) in runs {
        match (bounds_audit(&out.series), dissipation_audit(&out.series)) {
            (Ok(b), Ok(d)) => {
                bounds_ok &= b.pass;
                diss_ok &= d.pass;
                bounds_detail.push(format!("{name}: z in [{:.3e}, {:.6}], min dz {:.3e}, min theta {:.2}", b.min_z, b.max_z, b.min_dz, b.min_theta));
                diss_detail.push(format!("{name}: {:.3e} / {:.3e} / {:.3e}", d.minima[0], d.minima[1], d.minima[2]));
            }
            (Err(e), _) | (_, Err(e)) => return r.error("bounds_monotonicity", e),
        }
    }
    r.line("bounds_monotonicity", bounds_ok, bounds_detail.join("; "));
    r.line("clausius_duhem", diss_ok, format!("min joule / fourier / phase (>= -1e-12): {}", diss_detail.join("; ")));
}

fn selectivity(r: &mut Report, mf: &RunOutput, hf: &RunOutput, mixed: &RunOutput, elapsed: Duration) {
    match selectivity_report(&mf.series, &hf.series, &mixed.series) {
        Ok(s) => {
            let limit = Duration::from_secs(30 * 60);
            let best_root = s.mf.root.max(s.hf.root);
            let best_tip = s.mf.tip.max(s.hf.tip);
            r.line(
                "selectivity",
                s.pass() && elapsed <= limit,
                format!(
                    "MF root/tip {:.3e}/{:.3e}; HF root/tip {:.3e}/{:.3e}; mixed root {:.0}% and tip {:.0}% of best; \
                     artifact thresholds 2x and 50%; triple took {:.0} s (<= 1800 s)",
                    s.mf.root,
                    s.mf.tip,
                    s.hf.root,
                    s.hf.tip,
                    100.0 * s.mixed.root / best_root,
                    100.0 * s.mixed.tip / best_tip,
                    elapsed.as_secs_f64()
                ),
            );
        }
        Err(e) => r.error("selectivity", e),
    }
}

fn stability(r: &mut Report) {
    let res = (|| -> induction_core::Result<_> {
        let cfg = Config::load(&scenario("strip.ini")).map_err(induction_core::Error::from)?;
        let (rc, _) = cfg.resolved_run_config(None)?;
        stability_probe(&rc, Perturbation::Source, &[1e-2, 1e-3])
    })();
    match res {
        Ok(reports) => {
            let ok = reports.iter().all(|s| s.pass);
            let detail: Vec<String> = reports.iter().map(|s| format!("eps {:e}: D(eps/2)/D(eps) = {:.4}", s.eps, s.ratio)).collect();
            r.line("stability", ok, format!("{} (in [0.5, 2])", detail.join(", ")));
        }
        Err(e) => r.error("stability", e),
    }
}

fn determinism(r: &mut Report) {
    let res = (|| -> induction_core::Result<(usize, Vec<String>)> {
        let base = std::env::temp_dir().join(format!("induction-acceptance-{}", std::process::id()));
        let mut listings = Vec::new();
        for k in 0..2 {
            let cfg = Config::load(&scenario("strip.ini")).map_err(induction_core::Error::from)?;
            let (mut rc, _) = cfg.resolved_run_config(None)?;
            rc.snapshot_every = 5;
            let (sim, out) = run_simulation(rc)?;
            let dir = base.join(k.to_string());
            let files = write_run_outputs(&dir, &sim, &out, true)?;
            listings.push(files);
        }
        let mut differing = Vec::new();
        for (a, b) in listings[0].iter().zip(&listings[1]) {
            if std::fs::read(a).ok() != std::fs::read(b).ok() {
                differing.push(a.file_name().unwrap().to_string_lossy().into_owned());
            }
        }
        if listings[0].len() != listings[1].len() {
            differing.push("file count".into());
        }
        let n = listings[0].len();
        let _ = std::fs::remove_dir_all(&base);
        Ok((n, differing))
    })();
    match res {
        Ok((n, diff)) => r.line(
            "determinism",
            diff.is_empty(),
            if diff.is_empty() { format!("{n} output files byte-identical across two runs") } else { format!("differing: {}", diff.join(", ")) },
        ),
        Err(e) => r.error("determinism", e),
    }
}

fn main() -> ExitCode {
    let mut r = Report { failures: 0 };
    phase_ode(&mut r);
    skin(&mut r);
    joule(&mut r);
    orders(&mut r);

    let strip = run_scenario("strip.ini", None);
    let start = Instant::now();
    let tooth: Vec<_> = [Some(0.0), Some(1.0), None].into_iter().map(|s| run_scenario("tooth.ini", s)).collect();
    let elapsed = start.elapsed();
    match (&strip, &tooth[0], &tooth[1], &tooth[2]) {
        (Ok(s), Ok(mf), Ok(hf), Ok(mixed)) => {
            scenario_audits(&mut r, &[("strip", s), ("tooth MF", mf), ("tooth HF", hf), ("tooth mixed", mixed)]);
            selectivity(&mut r, mf, hf, mixed, elapsed);
        }
        _ => {
            let e = [&strip, &tooth[0], &tooth[1], &tooth[2]].into_iter().find_map(|x| x.as_ref().err()).unwrap().to_string();
            r.error("bounds_monotonicity", &e);
            r.error("clausius_duhem", &e);
            r.error("selectivity", &e);
        }
    }

    stability(&mut r);
    determinism(&mut r);

    if r.failures == 0 {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} criteria fail", r.failures);
        ExitCode::FAILURE
    }
}
