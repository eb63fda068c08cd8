//! Configuration files, history CSV and legacy VTK output.

mod config;
mod history;
mod vtk;

use std::path::{Path, PathBuf};

pub use config::{
    parse_config, Disk, HeatCaseConfig, LameConfig, MeshConfig, ModelConfig, OutputConfig, Problem, RunConfig, SourceConfig, TagConfig,
    VerifyConfig,
};
pub use history::{csv_header, csv_row, history_csv, HistoryWriter};
pub use vtk::{parse_vtk, vtk_string, write_vtk, VtkData};

use crate::driver::{IterationRecord, RunObserver};
use crate::error::Result;
use crate::fem::FemField;
use crate::mesh::RectMesh;
use crate::scalar::Real;

/// Writes `history.csv` row by row and `phi_NNNN.vtk` snapshots into a
/// directory.
pub struct OutputWriter<'m, T> {
    dir: PathBuf,
    mesh: &'m RectMesh<T>,
    history: HistoryWriter,
    snapshot_every: usize,
}

impl<'m, T: Real> OutputWriter<'m, T> {
    pub fn create(dir: impl AsRef<Path>, mesh: &'m RectMesh<T>, nc: usize, output: &OutputConfig) -> Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        std::fs::create_dir_all(&dir)?;
        let history = HistoryWriter::create(dir.join("history.csv"), nc, output.include_timing)?;
        Ok(Self { dir, mesh, history, snapshot_every: output.snapshot_every })
    }

    pub fn snapshot(&self, name: &str, phi: &FemField<T>, theta: Option<&FemField<T>>) -> Result<PathBuf> {
        let path = self.dir.join(format!("{name}.vtk"));
        let mut fields = vec![("phi", phi)];
        if let Some(t) = theta {
            fields.push(("theta", t));
        }
        write_vtk(self.mesh, &fields, &path)?;
        Ok(path)
    }
}

impl<T: Real> RunObserver<T> for OutputWriter<'_, T> {
    fn on_iteration(&mut self, record: &IterationRecord, phi: &FemField<T>, theta: Option<&FemField<T>>) -> Result<()> {
        self.history.append(record)?;
        if self.snapshot_every > 0 && record.iter % self.snapshot_every == 0 {
            self.snapshot(&format!("phi_{:04}", record.iter), phi, theta)?;
        }
        Ok(())
    }
}
