//! Run configuration file and run manifests.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::TrackFormat;
use crate::metrics::MetricParams;
use crate::pipeline::{TrainConfig, BUNDLE_FORMAT_VERSION};

/// Input locations used when the matching flag is absent.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataPaths {
    pub train: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub gt: Option<PathBuf>,
    pub format: TrackFormat,
}

/// Contents of a `--config` TOML file. Every section is optional.
///
/// ```toml
/// seed = 42
///
/// [data]
/// train = "data/train.jsonl"
/// test = "data/test.jsonl"
/// gt = "data/gt.jsonl"
///
/// [model]
/// cell_sizes = [20, 40]
/// kind = "spatiotemporal"
/// box_mode = "bottom"
/// slice = 3
///
/// [metrics]
/// iou = 0.1
/// ```
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub data: DataPaths,
    pub model: TrainConfig,
    pub metrics: MetricParams,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<RunConfig> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<RunConfig> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        RunConfig::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        let m = &self.metrics;
        if !(m.iou > 0.0 && m.iou <= 1.0) {
            return Err(Error::Config("metrics.iou must be in (0, 1]".into()));
        }
        if !(m.track_coverage > 0.0 && m.track_coverage <= 1.0) {
            return Err(Error::Config("metrics.track_coverage must be in (0, 1]".into()));
        }
        if !(m.max_fp_rate > 0.0 && m.max_fp_rate.is_finite()) {
            return Err(Error::Config("metrics.max_fp_rate must be positive".into()));
        }
        Ok(())
    }
}

/// Side file written next to every artifact. Unlike the artifacts it
/// contains wall-clock timings, so it differs between runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub versions: BTreeMap<String, String>,
    pub config: serde_json::Value,
    pub inputs: BTreeMap<String, PathBuf>,
    pub outputs: BTreeMap<String, PathBuf>,
    /// Seconds.
    pub timings: BTreeMap<String, f64>,
    pub stats: BTreeMap<String, serde_json::Value>,
}

impl Manifest {
    pub fn new(command: &str, config: &impl Serialize) -> Result<Manifest> {
        let versions = [
            ("gridvad", env!("CARGO_PKG_VERSION").to_string()),
            ("bundle_format", BUNDLE_FORMAT_VERSION.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        Ok(Manifest {
            command: command.to_string(),
            versions,
            config: serde_json::to_value(config)?,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            timings: BTreeMap::new(),
            stats: BTreeMap::new(),
        })
    }

    pub fn input(&mut self, name: &str, path: &Path) -> &mut Self {
        self.inputs.insert(name.to_string(), path.to_path_buf());
        self
    }

    pub fn output(&mut self, name: &str, path: &Path) -> &mut Self {
        self.outputs.insert(name.to_string(), path.to_path_buf());
        self
    }

    pub fn timing(&mut self, name: &str, seconds: f64) -> &mut Self {
        self.timings.insert(name.to_string(), seconds);
        self
    }

    pub fn stat(&mut self, name: &str, value: impl Serialize) -> Result<&mut Self> {
        self.stats.insert(name.to_string(), serde_json::to_value(value)?);
        Ok(self)
    }

    /// `model.bundle` → `model.bundle.manifest.json`; a directory gets
    /// `manifest.json` inside it.
    pub fn path_for(artifact: &Path) -> PathBuf {
        if artifact.is_dir() {
            return artifact.join("manifest.json");
        }
        let mut name = artifact.file_name().unwrap_or_default().to_os_string();
        name.push(".manifest.json");
        artifact.with_file_name(name)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        serde_json::to_writer_pretty(&mut out, self)?;
        out.write_all(b"\n")
            .and_then(|_| out.flush())
            .map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::featurize::{BoxMode, ModelKind};

    #[test]
    fn partial_file_keeps_defaults() {
        let c = RunConfig::from_toml(
            "seed = 7\n[model]\ncell_sizes = [40, 80]\nkind = \"spatial\"\nbox_mode = \"whole\"\n",
        )
        .unwrap();
        assert_eq!(c.seed, Some(7));
        assert_eq!(c.model.cell_sizes, vec![40, 80]);
        assert_eq!(c.model.kind, ModelKind::Spatial);
        assert_eq!(c.model.box_mode, BoxMode::Whole);
        assert_eq!(c.model.slice, 1);
        assert_eq!(c.metrics, MetricParams::default());
        c.validate().unwrap();
    }

    #[test]
    fn unknown_keys_and_bad_values_are_config_errors() {
        assert!(matches!(RunConfig::from_toml("[model]\ncells = [1]\n"), Err(Error::Config(_))));
        let c = RunConfig::from_toml("[model]\ncell_sizes = [0]\n").unwrap();
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        let c = RunConfig::from_toml("[metrics]\niou = 0.0\n").unwrap();
        assert!(matches!(c.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn config_round_trips_through_toml() {
        let mut c = RunConfig::default();
        c.seed = Some(3);
        c.data.train = Some("a/train.jsonl".into());
        c.model.slice = 3;
        let text = toml::to_string(&c).unwrap();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), c);
    }

    #[test]
    fn manifest_paths() {
        assert_eq!(
            Manifest::path_for(Path::new("out/model.bundle")),
            PathBuf::from("out/model.bundle.manifest.json")
        );
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(Manifest::path_for(dir.path()), dir.path().join("manifest.json"));
    }
}
