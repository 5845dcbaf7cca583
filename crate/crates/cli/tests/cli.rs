use std::path::Path;
use std::process::{Command, Output};

const TINY: &str = "\
[domain]
preset = strip
depth = 3e-3
top_air = 2e-3
refine_levels = 1
probe.surface = 0.5e-3, 0

[source]
f_mf = 10000
f_hf = 10000
a_mf = 20

[thermal]
theta0 = 1050

[time]
total_time = 0.006
coarse_dt = 0.002
periodic_tol = 1e-6

[output]
snapshot_every = 1
";

fn induction(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_induction")).args(args).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("c.ini");
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let outs: Vec<_> = ["a", "b"].iter().map(|n| dir.path().join(n)).collect();
    for o in &outs {
        let r = induction(&["--quiet", "--seedless", "run", "--config", &cfg, "--out", o.to_str().unwrap()]);
        assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    }
    let mut names: Vec<_> = std::fs::read_dir(&outs[0]).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 6, "series, checks and four snapshots");
    for n in &names {
        assert_eq!(std::fs::read(outs[0].join(n)).unwrap(), std::fs::read(outs[1].join(n)).unwrap(), "{n:?}");
    }
    let checks = std::fs::read_to_string(outs[0].join("checks.jsonl")).unwrap();
    assert!(checks.lines().all(|l| l.ends_with("\"pass\":true}")));
    let series = std::fs::read_to_string(outs[0].join("series.csv")).unwrap();
    assert!(series.starts_with("t,theta_surface,z_surface,"));
}

#[test]
fn invalid_config_exits_with_the_violated_clause() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{TINY}\n[materials]\nsigma_workpiece_z0 = -1\n"));
    let r = induction(&["run", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(2));
    let err = String::from_utf8_lossy(&r.stderr);
    assert!(err.contains("sigma_workpiece_z0") && err.contains("(i)"), "{err}");
}

#[test]
fn compare_freq_needs_a_power_budget() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let r = induction(&["compare-freq", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("power"));
}

#[test]
fn stability_probe_reports_each_eps() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let r = induction(&["--quiet", "stability-probe", "--config", &cfg, "--eps", "0.01"]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let out = String::from_utf8_lossy(&r.stdout);
    assert_eq!(out.lines().count(), 1);
    assert!(out.contains("stability_eps_1e-2"));
}

#[test]
fn help_lists_every_subcommand() {
    let r = induction(&["--help"]);
    let text = String::from_utf8_lossy(&r.stdout);
    for sub in ["run", "verify", "skin-depth", "stability-probe", "compare-freq"] {
        assert!(text.contains(sub), "{sub} missing from help");
    }
}
