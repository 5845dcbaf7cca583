use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use induction_core::coupling::{run_simulation_with, stability_probe, unit_powers, Perturbation, RunConfig, RunOutput, Simulation};
use induction_core::io::{write_run_outputs, Config, Drive};
use induction_core::materials::MU_0;
use induction_core::verification::{run_battery, run_checks, selectivity_report, skin_depth_case, CheckRecord, SkinStrip};

#[derive(Parser)]
#[command(name = "induction", version, about = "Multifrequency induction hardening on 2D cross-sections")]
struct Cli {
    /// Print only the final report.
    #[arg(long, global = true)]
    quiet: bool,
    /// Accepted for compatibility; nothing in the simulator draws random numbers.
    #[arg(long, global = true)]
    seedless: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write series.csv plus VTK snapshots.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the self-contained verification battery.
    Verify {
        /// Also write the records to DIR/verify.jsonl.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the skin depth on a refined strip and compare with the analytic value.
    SkinDepth {
        #[arg(long, default_value_t = 1e4)]
        frequency: f64,
        #[arg(long, default_value_t = 1e6)]
        sigma: f64,
        #[arg(long, default_value_t = 1.0)]
        mu_r: f64,
        /// Acceptable relative error.
        #[arg(long, default_value_t = 0.05)]
        tol: f64,
    },
    /// Data-to-solution sensitivity D(eps/2)/D(eps) for a scenario.
    StabilityProbe {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = [1e-2, 1e-3])]
        eps: Vec<f64>,
        #[arg(long, value_enum, default_value_t = PerturbArg::Source)]
        perturb: PerturbArg,
    },
    /// Run MF-only, HF-only and mixed drives at the configured power and compare
    /// the root and tip phase integrals.
    CompareFreq {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PerturbArg {
    Source,
    Theta0,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Run { config, out } => cmd_run(config, out, cli.quiet),
        Command::Verify { out } => cmd_verify(out.as_deref()),
        Command::SkinDepth { frequency, sigma, mu_r, tol } => {
            let r = skin_depth_case(*frequency, *sigma, mu_r * MU_0, SkinStrip::default())?;
            let rec = CheckRecord::at_most("skin_depth", "relative error of fitted depth", r.rel_error, *tol);
            println!("{}", serde_json::to_string(&r)?);
            println!("{}", rec.json());
            Ok(rec.pass)
        }
        Command::StabilityProbe { config, eps, perturb } => {
            let cfg = load(config)?;
            let rc = resolved(&cfg, None, cli.quiet)?;
            let how = match perturb {
                PerturbArg::Source => Perturbation::Source,
                PerturbArg::Theta0 => Perturbation::InitialTemperature,
            };
            let mut ok = true;
            for r in stability_probe(&rc, how, eps)? {
                let rec = CheckRecord::within(&format!("stability_eps_{:e}", r.eps), "D(eps/2)/D(eps)", r.ratio, 0.5, 2.0);
                ok &= rec.pass;
                println!("{}", rec.json());
            }
            Ok(ok)
        }
        Command::CompareFreq { config, out } => cmd_compare(config, out, cli.quiet),
    }
}

fn load(path: &Path) -> Result<Config> {
    Config::load(path).with_context(|| format!("loading {}", path.display()))
}

/// Run configuration with the coil amplitudes filled in.
fn resolved(cfg: &Config, hf_share: Option<f64>, quiet: bool) -> Result<RunConfig> {
    let (rc, units) = cfg.resolved_run_config(hf_share)?;
    if let (Some(u), false) = (units, quiet) {
        eprintln!("unit-amplitude powers: MF {:.6e} W/m, HF {:.6e} W/m", u.0, u.1);
    }
    Ok(rc)
}

fn simulate(rc: RunConfig, quiet: bool) -> Result<(Simulation, RunOutput)> {
    Ok(run_simulation_with(rc, |_, s| {
        if !quiet {
            let d = &s.diagnostics;
            eprintln!(
                "step {:4} t {:.4} max_theta {:.2} max_z {:.4} em_windows {}{}",
                s.step,
                s.t,
                d.max_theta,
                d.max_z,
                d.em_windows,
                if d.em_reused { " (reused)" } else { "" }
            );
        }
    })?)
}

fn write_records(path: &Path, records: &[CheckRecord]) -> Result<()> {
    let text: String = records.iter().map(|r| r.json() + "\n").collect();
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn run_into(rc: RunConfig, dir: &Path, vtk: bool, quiet: bool) -> Result<(RunOutput, bool)> {
    let (sim, out) = simulate(rc, quiet)?;
    write_run_outputs(dir, &sim, &out, vtk)?;
    let checks = run_checks(&out)?;
    write_records(&dir.join("checks.jsonl"), &checks)?;
    let mut ok = true;
    for c in &checks {
        ok &= c.pass;
        if !quiet || !c.pass {
            println!("{}", c.json());
        }
    }
    Ok((out, ok))
}

fn cmd_run(config: &Path, out: &Path, quiet: bool) -> Result<bool> {
    let cfg = load(config)?;
    let rc = resolved(&cfg, None, quiet)?;
    Ok(run_into(rc, out, cfg.write_vtk, quiet)?.1)
}

fn cmd_verify(out: Option<&Path>) -> Result<bool> {
    let records = run_battery()?;
    for r in &records {
        println!("{}", r.json());
    }
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        write_records(&dir.join("verify.jsonl"), &records)?;
    }
    Ok(records.iter().all(|r| r.pass))
}

#[derive(Serialize)]
struct CompareReport {
    power: f64,
    hf_share: f64,
    #[serde(flatten)]
    report: induction_core::verification::SelectivityReport,
    pass: bool,
}

fn cmd_compare(config: &Path, out: &Path, quiet: bool) -> Result<bool> {
    let cfg = load(config)?;
    let Drive::Power { power, hf_share } = cfg.drive else {
        bail!("compare-freq needs a power budget (`power` in [source])");
    };
    let mut base = cfg.run_config()?;
    let units = unit_powers(&base)?;
    if !quiet {
        eprintln!("unit-amplitude powers: MF {:.6e} W/m, HF {:.6e} W/m", units.0, units.1);
    }
    let mut ok = true;
    let mut series = Vec::new();
    for (name, share) in [("mf", 0.0), ("hf", 1.0), ("mixed", hf_share)] {
        let (a_mf, a_hf) = cfg.amplitudes(Some(units), Some(share))?;
        base.problem.source = base.problem.source.with_amplitudes(a_mf, a_hf);
        if !quiet {
            eprintln!("-- {name}: hf_share {share}");
        }
        let (o, pass) = run_into(base.clone(), &out.join(name), cfg.write_vtk, quiet)?;
        ok &= pass;
        series.push(o.series);
    }
    let report = selectivity_report(&series[0], &series[1], &series[2])?;
    let summary = CompareReport { power, hf_share, report, pass: report.pass() };
    let text = serde_json::to_string_pretty(&summary)?;
    println!("{text}");
    std::fs::write(out.join("selectivity.json"), text + "\n")?;
    Ok(ok && report.pass())
}
