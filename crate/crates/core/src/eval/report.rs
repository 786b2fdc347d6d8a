//! Experiment report and plot-data serialization.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::eval::protocol::ExperimentResult;

impl ExperimentResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// CSV bodies for the three plots an experiment feeds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlotFiles {
    pub ma_vs_epsilon: String,
    pub focal_point_frequency: String,
    pub parent_size_frequency: String,
}

impl PlotFiles {
    pub const MA_VS_EPSILON: &'static str = "ma_vs_epsilon.csv";
    pub const FOCAL_POINT_FREQUENCY: &'static str = "focal_point_frequency.csv";
    pub const PARENT_SIZE_FREQUENCY: &'static str = "parent_size_frequency.csv";

    pub fn from_result(result: &ExperimentResult) -> Self {
        let mut ma = String::from("generator,epsilon,mean_ma,mean_auc,trials\n");
        let mut focal = String::from("generator,epsilon,focal_point,frequency\n");
        let mut parents = String::from("generator,epsilon,parent_size,frequency\n");
        for c in &result.cells {
            let g = c.generator.name();
            let _ = writeln!(ma, "{g},{},{},{},{}", c.epsilon, c.mean_ma, c.mean_auc, c.ma.len());
            for (t, f) in &c.focal_points {
                let _ = writeln!(focal, "{g},{},\"{t}\",{f}", c.epsilon);
            }
            for (s, f) in &c.parent_sizes {
                let _ = writeln!(parents, "{g},{},{s},{f}", c.epsilon);
            }
        }
        Self {
            ma_vs_epsilon: ma,
            focal_point_frequency: focal,
            parent_size_frequency: parents,
        }
    }

    /// Writes the three files into `dir` and returns their paths.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let files = [
            (Self::MA_VS_EPSILON, &self.ma_vs_epsilon),
            (Self::FOCAL_POINT_FREQUENCY, &self.focal_point_frequency),
            (Self::PARENT_SIZE_FREQUENCY, &self.parent_size_frequency),
        ];
        let mut paths = Vec::with_capacity(files.len());
        for (name, body) in files {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
            paths.push(path);
        }
        Ok(paths)
    }
}

pub fn write_plot_data(result: &ExperimentResult, dir: &Path) -> Result<Vec<PathBuf>> {
    PlotFiles::from_result(result).write_to(dir)
}
