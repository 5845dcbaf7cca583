//! Flat INI scenario files.
//!
//! ```text
//! [domain]
//! preset = tooth          # or strip
//! box.root = 0.0025, -0.0015, 0.005, 0
//!
//! [source]
//! power = 3e5
//! ```
//!
//! Sections are `[domain] [materials] [phase] [thermal] [source] [time]
//! [output]`. Keys are case-sensitive; unknown sections or keys are parse
//! errors so that typos never fall back to defaults silently. All lengths are
//! in metres, temperatures in kelvin.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use crate::assumptions::{Clause, Violation};
use crate::coupling::{NamedBox, NamedPoint, Problem, RunConfig};
use crate::eddy::SourceWaveform;
use crate::fem::CgOptions;
use crate::geometry::{Probe, StripGeometry, ToothGeometry};
use crate::materials::{MaterialModel, ZLinearLaw, MU_0};
use crate::mesh::{build_domain, refine_boundary_layer, BoxExtent, BoxSide, DomainSpec, EdgeTag, Mesh};
use crate::phase::{PhaseKinetics, TauModel};
use crate::thermal::ThermalParams;

const SECTIONS: [&str; 7] = ["domain", "materials", "phase", "thermal", "source", "time", "output"];

#[derive(Debug)]
pub enum ConfigError {
    Parse { line: usize, message: String },
    Invalid(Vec<Violation>),
    Io { path: String, source: std::io::Error },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Parse { line, message } => write!(f, "config line {line}: {message}"),
            ConfigError::Invalid(v) => {
                write!(f, "config is not admissible:")?;
                for x in v {
                    write!(f, "\n  {x}")?;
                }
                Ok(())
            }
            ConfigError::Io { path, source } => write!(f, "cannot read {path}: {source}"),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Strip,
    Tooth,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Geometry {
    Strip(StripGeometry),
    Tooth(ToothGeometry),
}

impl Geometry {
    pub fn domain(&self) -> DomainSpec {
        match self {
            Geometry::Strip(g) => g.domain(),
            Geometry::Tooth(g) => g.domain(),
        }
    }

    pub fn extent(&self) -> BoxExtent {
        match self {
            Geometry::Strip(g) => g.extent(),
            Geometry::Tooth(g) => g.extent(),
        }
    }
}

/// How the source amplitudes are fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Drive {
    Amplitudes { a_mf: f64, a_hf: f64 },
    /// Joule power per metre of depth into the initial workpiece, and the HF fraction of it.
    Power { power: f64, hf_share: f64 },
}

/// A parsed and validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub geometry: Geometry,
    pub refine_depth: f64,
    pub refine_levels: usize,
    /// Box sides where `A = 0` besides the outer boundary.
    pub em_dirichlet_sides: Vec<BoxSide>,
    pub probes: Vec<NamedPoint>,
    pub boxes: Vec<NamedBox>,
    pub materials: MaterialModel,
    pub kinetics: PhaseKinetics,
    pub thermal: ThermalParams,
    pub j0: f64,
    pub f_mf: f64,
    pub f_hf: f64,
    pub drive: Drive,
    pub total_time: f64,
    pub coarse_dt: f64,
    pub steps_per_hf_period: usize,
    pub periodic_tol: f64,
    pub max_windows: usize,
    pub cg_tol: f64,
    pub cg_max_iter: usize,
    pub snapshot_every: usize,
    pub write_vtk: bool,
}

struct Entry {
    value: String,
    line: usize,
}

/// Raw `section → key → value` map with line numbers.
struct Ini {
    sections: BTreeMap<String, BTreeMap<String, Entry>>,
}

fn parse_error(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError::Parse { line, message: message.into() }
}

impl Ini {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut sections: BTreeMap<String, BTreeMap<String, Entry>> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let s = raw.split('#').next().unwrap().trim();
            if s.is_empty() {
                continue;
            }
            if let Some(rest) = s.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| parse_error(line, "unterminated section header"))?
                    .trim();
                if !SECTIONS.contains(&name) {
                    return Err(parse_error(line, format!("unknown section [{name}]")));
                }
                sections.entry(name.to_string()).or_default();
                current = Some(name.to_string());
                continue;
            }
            let (key, value) = s.split_once('=').ok_or_else(|| parse_error(line, "expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(parse_error(line, "empty key"));
            }
            let sec = current.as_ref().ok_or_else(|| parse_error(line, "key outside of any section"))?;
            let map = sections.get_mut(sec).unwrap();
            if map.contains_key(key) {
                return Err(parse_error(line, format!("duplicate key `{key}` in [{sec}]")));
            }
            map.insert(key.to_string(), Entry { value: value.to_string(), line });
        }
        Ok(Ini { sections })
    }

    fn take(&mut self, section: &str, key: &str) -> Option<Entry> {
        self.sections.get_mut(section)?.remove(key)
    }

    fn take_prefixed(&mut self, section: &str, prefix: &str) -> Vec<(String, Entry)> {
        let Some(map) = self.sections.get_mut(section) else { return Vec::new() };
        let keys: Vec<String> = map.keys().filter(|k| k.starts_with(prefix)).cloned().collect();
        keys.into_iter().map(|k| {
            let e = map.remove(&k).unwrap();
            (k[prefix.len()..].to_string(), e)
        }).collect()
    }

    fn f64_or(&mut self, section: &str, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.take(section, key) {
            None => Ok(default),
            Some(e) => e.value.parse::<f64>().map_err(|_| parse_error(e.line, format!("`{key}` expects a number, got `{}`", e.value))),
        }
    }

    fn opt_f64(&mut self, section: &str, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.take(section, key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<f64>()
                .map(Some)
                .map_err(|_| parse_error(e.line, format!("`{key}` expects a number, got `{}`", e.value))),
        }
    }

    fn usize_or(&mut self, section: &str, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.take(section, key) {
            None => Ok(default),
            Some(e) => e
                .value
                .parse::<usize>()
                .map_err(|_| parse_error(e.line, format!("`{key}` expects a nonnegative integer, got `{}`", e.value))),
        }
    }

    fn bool_or(&mut self, section: &str, key: &str, default: bool) -> Result<bool, ConfigError> {
        match self.take(section, key) {
            None => Ok(default),
            Some(e) => match e.value.as_str() {
                "true" => Ok(true),
                "false" => Ok(false),
                v => Err(parse_error(e.line, format!("`{key}` expects true or false, got `{v}`"))),
            },
        }
    }

    /// Errors on the first key nobody consumed.
    fn finish(self) -> Result<(), ConfigError> {
        let leftover = self
            .sections
            .iter()
            .flat_map(|(s, m)| m.iter().map(move |(k, e)| (e.line, s.clone(), k.clone())))
            .min();
        match leftover {
            Some((line, s, k)) => Err(parse_error(line, format!("unknown key `{k}` in [{s}]"))),
            None => Ok(()),
        }
    }
}

fn numbers(e: &Entry, n: usize, what: &str) -> Result<Vec<f64>, ConfigError> {
    let v: Vec<f64> = e
        .value
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| parse_error(e.line, format!("{what} expects {n} comma-separated numbers")))?;
    if v.len() != n {
        return Err(parse_error(e.line, format!("{what} expects {n} comma-separated numbers, got {}", v.len())));
    }
    Ok(v)
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    /// Parses and validates. Unset optional keys take their defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut ini = Ini::parse(text)?;
        let d = "domain";
        let preset = match ini.take(d, "preset") {
            None => return Err(parse_error(0, "[domain] needs `preset = strip` or `preset = tooth`")),
            Some(e) => match e.value.as_str() {
                "strip" => Preset::Strip,
                "tooth" => Preset::Tooth,
                v => return Err(parse_error(e.line, format!("unknown preset `{v}`"))),
            },
        };
        let mm = 1e-3;
        let (geometry, refine_default, sides_default) = match preset {
            Preset::Strip => {
                let g = StripGeometry {
                    width: ini.f64_or(d, "width", 1.0 * mm)?,
                    depth: ini.f64_or(d, "depth", 10.0 * mm)?,
                    gap: ini.f64_or(d, "gap", 1.0 * mm)?,
                    coil_thickness: ini.f64_or(d, "coil_thickness", 1.0 * mm)?,
                    top_air: ini.f64_or(d, "top_air", 4.0 * mm)?,
                    h: ini.f64_or(d, "h", 0.5 * mm)?,
                };
                (Geometry::Strip(g), (2.0 * mm, 2), Vec::new())
            }
            Preset::Tooth => {
                let g = ToothGeometry {
                    half_pitch: ini.f64_or(d, "half_pitch", 5.0 * mm)?,
                    root_half_width: ini.f64_or(d, "root_half_width", 2.5 * mm)?,
                    tip_half_width: ini.f64_or(d, "tip_half_width", 1.5 * mm)?,
                    tooth_height: ini.f64_or(d, "tooth_height", 5.0 * mm)?,
                    body_depth: ini.f64_or(d, "body_depth", 8.0 * mm)?,
                    coil_half_width: ini.f64_or(d, "coil_half_width", 1.5 * mm)?,
                    coil_bottom: ini.f64_or(d, "coil_bottom", 6.0 * mm)?,
                    coil_height: ini.f64_or(d, "coil_height", 2.0 * mm)?,
                    top: ini.f64_or(d, "top", 20.0 * mm)?,
                    h: ini.f64_or(d, "h", 0.5 * mm)?,
                };
                (Geometry::Tooth(g), (1.0 * mm, 2), vec![BoxSide::Left])
            }
        };
        let refine_depth = ini.f64_or(d, "refine_depth", refine_default.0)?;
        let refine_levels = ini.usize_or(d, "refine_levels", refine_default.1)?;
        let em_dirichlet_sides = match ini.take(d, "em_dirichlet_sides") {
            None => sides_default,
            Some(e) if e.value == "none" => Vec::new(),
            Some(e) => e
                .value
                .split(',')
                .map(|s| BoxSide::from_name(s.trim()).ok_or_else(|| parse_error(e.line, format!("unknown box side `{}`", s.trim()))))
                .collect::<Result<_, _>>()?,
        };
        let mut probes = Vec::new();
        for (name, e) in ini.take_prefixed(d, "probe.") {
            let v = numbers(&e, 2, "probe")?;
            probes.push(NamedPoint { name, at: [v[0], v[1]] });
        }
        let mut boxes = Vec::new();
        for (name, e) in ini.take_prefixed(d, "box.") {
            let v = numbers(&e, 4, "box")?;
            if !(v[2] > v[0] && v[3] > v[1]) {
                return Err(parse_error(e.line, "box needs x0 < x1 and y0 < y1"));
            }
            boxes.push(NamedBox { name, area: Probe { x0: v[0], y0: v[1], x1: v[2], y1: v[3] } });
        }

        let m = "materials";
        let def = MaterialModel::default();
        let sigma_coil = ini.f64_or(m, "sigma_coil", def.sigma_coil)?;
        let sigma_w = ZLinearLaw {
            at0: ini.f64_or(m, "sigma_workpiece_z0", def.sigma_workpiece.at0)?,
            at1: ini.f64_or(m, "sigma_workpiece_z1", def.sigma_workpiece.at1)?,
        };
        let mu_coil = ini.f64_or(m, "mu_r_coil", def.mu_coil / MU_0)? * MU_0;
        let mu_w = ZLinearLaw {
            at0: ini.f64_or(m, "mu_r_workpiece_z0", def.mu_workpiece.at0 / MU_0)? * MU_0,
            at1: ini.f64_or(m, "mu_r_workpiece_z1", def.mu_workpiece.at1 / MU_0)? * MU_0,
        };
        let mut materials = MaterialModel::with_tight_bounds(sigma_coil, sigma_w, MU_0, mu_coil, mu_w);
        if let Some(v) = ini.opt_f64(m, "sigma_min")? {
            materials.sigma_bounds.0 = v;
        }
        if let Some(v) = ini.opt_f64(m, "sigma_max")? {
            materials.sigma_bounds.1 = v;
        }
        if let Some(v) = ini.opt_f64(m, "mu_r_min")? {
            materials.mu_bounds.0 = v * MU_0;
        }
        if let Some(v) = ini.opt_f64(m, "mu_r_max")? {
            materials.mu_bounds.1 = v * MU_0;
        }

        let p = "phase";
        let kdef = PhaseKinetics::default();
        let tau0 = ini.f64_or(p, "tau0", kdef.tau.bounds().0)?;
        let tau = match ini.opt_f64(p, "tau_hot")? {
            None => TauModel::Constant(tau0),
            Some(hot) => TauModel::Ramp {
                cold: tau0,
                hot,
                theta_lo: ini.f64_or(p, "tau_theta_lo", kdef.a_s)?,
                theta_hi: ini.f64_or(p, "tau_theta_hi", kdef.a_f)?,
            },
        };
        let kinetics = PhaseKinetics {
            a_s: ini.f64_or(p, "A_s", kdef.a_s)?,
            a_f: ini.f64_or(p, "A_f", kdef.a_f)?,
            tau,
            latent: ini.f64_or(p, "latent_L", kdef.latent)?,
        };

        let t = "thermal";
        let tdef = ThermalParams::default();
        let eta = ini.f64_or(t, "eta", tdef.eta)?;
        let theta_ambient = ini.f64_or(t, "theta_ambient", 293.15)?;
        let thermal = ThermalParams {
            c_v: ini.f64_or(t, "c_v", tdef.c_v)?,
            kappa: ini.f64_or(t, "kappa", tdef.kappa)?,
            eta,
            g: ini.f64_or(t, "g_ambient", eta * theta_ambient)?,
            theta0: ini.f64_or(t, "theta0", tdef.theta0)?,
        };

        let s = "source";
        let j0 = ini.f64_or(s, "j0", 1e6)?;
        let f_mf = ini.f64_or(s, "f_mf", 3000.0)?;
        let f_hf = ini.f64_or(s, "f_hf", 10.0 * f_mf)?;
        let power = ini.opt_f64(s, "power")?;
        let hf_share = ini.opt_f64(s, "hf_share")?;
        let a_mf = ini.opt_f64(s, "a_mf")?;
        let a_hf = ini.opt_f64(s, "a_hf")?;
        let drive = match power {
            Some(power) => {
                if a_mf.is_some() || a_hf.is_some() {
                    return Err(parse_error(0, "[source] sets both `power` and explicit amplitudes"));
                }
                Drive::Power { power, hf_share: hf_share.unwrap_or(0.5) }
            }
            None => {
                if hf_share.is_some() {
                    return Err(parse_error(0, "[source] `hf_share` needs `power`"));
                }
                Drive::Amplitudes { a_mf: a_mf.unwrap_or(1.0), a_hf: a_hf.unwrap_or(0.0) }
            }
        };

        let tm = "time";
        let total_time = ini.f64_or(tm, "total_time", 0.2)?;
        let coarse_dt = ini.f64_or(tm, "coarse_dt", 0.01)?;
        let steps_per_hf_period = ini.usize_or(tm, "steps_per_hf_period", 20)?;
        let periodic_tol = ini.f64_or(tm, "periodic_tol", 1e-3)?;
        let max_windows = ini.usize_or(tm, "max_windows", 40)?;
        let cg_tol = ini.f64_or(tm, "cg_tol", 1e-9)?;
        let cg_max_iter = ini.usize_or(tm, "cg_max_iter", 20_000)?;

        let o = "output";
        let snapshot_every = ini.usize_or(o, "snapshot_every", 0)?;
        let write_vtk = ini.bool_or(o, "write_vtk", true)?;
        ini.finish()?;

        let cfg = Config {
            geometry,
            refine_depth,
            refine_levels,
            em_dirichlet_sides,
            probes,
            boxes,
            materials,
            kinetics,
            thermal,
            j0,
            f_mf,
            f_hf,
            drive,
            total_time,
            coarse_dt,
            steps_per_hf_period,
            periodic_tol,
            max_windows,
            cg_tol,
            cg_max_iter,
            snapshot_every,
            write_vtk,
        };
        let v = cfg.violations();
        if v.is_empty() {
            Ok(cfg)
        } else {
            Err(ConfigError::Invalid(v))
        }
    }

    /// Every admissibility and structural check that does not need the mesh.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = self.materials.violations();
        out.extend(self.kinetics.violations());
        out.extend(self.thermal.violations());
        let src = SourceWaveform { j0: Vec::new(), a_mf: 0.0, a_hf: 0.0, f_mf: self.f_mf, f_hf: self.f_hf };
        let (a_mf, a_hf) = match self.drive {
            Drive::Amplitudes { a_mf, a_hf } => (a_mf, a_hf),
            Drive::Power { power, hf_share } => {
                if !(power.is_finite() && power >= 0.0) {
                    out.push(Violation::new("power", Clause::III, format!("power {power} must be finite and nonnegative")));
                }
                if !(0.0..=1.0).contains(&hf_share) {
                    out.push(Violation::structural("hf_share", format!("{hf_share} is outside [0, 1]")));
                }
                (0.0, 0.0)
            }
        };
        let src = src.with_amplitudes(a_mf, a_hf);
        out.extend(src.violations_without_mesh());
        if !self.j0.is_finite() {
            out.push(Violation::new("j0", Clause::III, format!("current density {} is not finite", self.j0)));
        }
        for (key, v) in [("total_time", self.total_time), ("coarse_dt", self.coarse_dt), ("periodic_tol", self.periodic_tol), ("cg_tol", self.cg_tol)] {
            if !(v.is_finite() && v >= 0.0) || (key != "total_time" && v == 0.0) {
                out.push(Violation::structural(key, format!("{v} must be finite and positive")));
            }
        }
        for (key, v) in [("steps_per_hf_period", self.steps_per_hf_period), ("max_windows", self.max_windows), ("cg_max_iter", self.cg_max_iter)] {
            if v == 0 {
                out.push(Violation::structural(key, "must be at least 1"));
            }
        }
        if out.is_empty() {
            if let Err(e) = self.run_config_for(empty_problem(self)).check_steps() {
                out.push(Violation::structural("coarse_dt", e.to_string()));
            }
        }
        out
    }

    /// Ratio `f_hf / f_mf`; valid after validation.
    pub fn harmonic(&self) -> usize {
        (self.f_hf / self.f_mf).round() as usize
    }

    /// Builds and refines the mesh.
    pub fn build_mesh(&self) -> crate::Result<Mesh> {
        let mesh = build_domain(&self.geometry.domain())?;
        refine_boundary_layer(&mesh, EdgeTag::WorkpieceSurface, self.refine_depth, self.refine_levels)
    }

    /// Nodes with `A = 0`: the outer boundary plus the configured box sides.
    pub fn dirichlet_nodes(&self, mesh: &Mesh) -> Vec<usize> {
        let mut nodes = mesh.nodes_with_tag(EdgeTag::Outer);
        for &side in &self.em_dirichlet_sides {
            nodes.extend(self.geometry.extent().side_nodes(mesh, side));
        }
        nodes.sort_unstable();
        nodes.dedup();
        nodes
    }

    fn run_config_for(&self, problem: Problem) -> RunConfig {
        RunConfig {
            problem,
            total_time: self.total_time,
            coarse_dt: self.coarse_dt,
            steps_per_window: self.steps_per_hf_period * self.harmonic().max(1),
            periodic_tol: self.periodic_tol,
            max_windows: self.max_windows,
            em_cg: CgOptions { tol: self.cg_tol, max_iter: self.cg_max_iter },
            heat_cg: CgOptions { tol: 1e-12, max_iter: self.cg_max_iter },
            probes: self.probes.clone(),
            boxes: self.boxes.clone(),
            snapshot_every: self.snapshot_every,
        }
    }

    /// Run configuration with the mesh built. Under a power budget the
    /// amplitudes are left at zero; see [`crate::coupling::amplitudes_for_power`].
    pub fn run_config(&self) -> crate::Result<RunConfig> {
        let mesh = self.build_mesh()?;
        let em_dirichlet = self.dirichlet_nodes(&mesh);
        let (a_mf, a_hf) = match self.drive {
            Drive::Amplitudes { a_mf, a_hf } => (a_mf, a_hf),
            Drive::Power { .. } => (0.0, 0.0),
        };
        let source = SourceWaveform::uniform(&mesh, self.j0, self.f_mf, self.f_hf).with_amplitudes(a_mf, a_hf);
        Ok(self.run_config_for(Problem {
            mesh,
            materials: self.materials.clone(),
            kinetics: self.kinetics,
            thermal: self.thermal,
            source,
            em_dirichlet,
        }))
    }
}

impl Config {
    /// Coil amplitudes for the configured drive. A power budget needs the
    /// unit-amplitude powers from [`crate::coupling::unit_powers`];
    /// `hf_share` overrides the configured split.
    pub fn amplitudes(&self, units: Option<(f64, f64)>, hf_share: Option<f64>) -> crate::Result<(f64, f64)> {
        match self.drive {
            Drive::Amplitudes { a_mf, a_hf } => Ok((a_mf, a_hf)),
            Drive::Power { power, hf_share: configured } => {
                let units = units.ok_or_else(|| crate::Error::InvalidArgument("a power budget needs the unit powers".into()))?;
                crate::coupling::amplitudes_for_power(units, power, hf_share.unwrap_or(configured))
            }
        }
    }

    /// [`Config::run_config`] with the amplitudes filled in. Under a power
    /// budget this runs the unit-amplitude calibration and also returns its
    /// powers.
    pub fn resolved_run_config(&self, hf_share: Option<f64>) -> crate::Result<(RunConfig, Option<(f64, f64)>)> {
        let mut rc = self.run_config()?;
        let units = match self.drive {
            Drive::Power { .. } => Some(crate::coupling::unit_powers(&rc)?),
            Drive::Amplitudes { .. } => None,
        };
        let (a_mf, a_hf) = self.amplitudes(units, hf_share)?;
        rc.problem.source = rc.problem.source.with_amplitudes(a_mf, a_hf);
        Ok((rc, units))
    }
}

fn empty_problem(cfg: &Config) -> Problem {
    Problem {
        mesh: Mesh { vertices: Vec::new(), triangles: Vec::new(), regions: Vec::new(), boundary_edges: Vec::new() },
        materials: cfg.materials.clone(),
        kinetics: cfg.kinetics,
        thermal: cfg.thermal,
        source: SourceWaveform { j0: Vec::new(), a_mf: 0.0, a_hf: 0.0, f_mf: cfg.f_mf, f_hf: cfg.f_hf },
        em_dirichlet: Vec::new(),
    }
}
