//! Scenario files and output writers.

pub mod config;
pub mod csv;
mod format;
pub mod vtk;

pub use config::{Config, ConfigError, Drive, Geometry, Preset};
pub use csv::{parse_timeseries_csv, timeseries_csv_string, write_timeseries_csv};
pub use format::fmt_sig;
pub use vtk::{vtk_string, write_vtk, VtkField};

use std::path::{Path, PathBuf};

use crate::coupling::{RunOutput, Simulation};
use crate::error::{Error, Result};

/// Writes `series.csv` and, if asked, one `snapshot_NNNN.vtk` per recorded
/// snapshot (workpiece submesh: nodal `theta` and `z`, cell `q_bar`).
/// Returns the written paths in order.
pub fn write_run_outputs(dir: &Path, sim: &Simulation, out: &RunOutput, vtk: bool) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let csv_path = dir.join("series.csv");
    write_timeseries_csv(&out.series, &csv_path)?;
    written.push(csv_path);
    if vtk {
        for s in &out.snapshots {
            let path = dir.join(format!("snapshot_{:04}.vtk", s.step));
            let title = format!("step {} t = {}", s.step, fmt_sig(s.t, 12));
            let fields = [VtkField::Point("theta", &s.theta), VtkField::Point("z", &s.z), VtkField::Cell("q_bar", &s.q_bar)];
            write_vtk(&sim.sub.mesh, &title, &fields, &path)?;
            written.push(path);
        }
    }
    Ok(written)
}
