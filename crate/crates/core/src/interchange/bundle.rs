//! Dataset manifests (`bundle.json`) and the validated [`DatasetBundle`].

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::labels::LabelTable;
use super::matrix::{read_matrix, write_matrix, MatrixF32};
use crate::error::{Error, Result};

pub const MANIFEST_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "bundle.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub name: String,
    pub file: PathBuf,
    pub pixels: usize,
    pub height: usize,
    pub width: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub name: String,
    pub file: PathBuf,
    pub neurons: usize,
    pub depth_index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelsRef {
    pub file: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub version: u32,
    pub num_examples: usize,
    #[serde(default)]
    pub channels: Vec<ChannelSpec>,
    pub layers: Vec<LayerSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<LabelsRef>,
}

impl Manifest {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let manifest: Manifest = serde_json::from_str(&text).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            detail: format!("manifest: {e}"),
        })?;
        manifest.validate(path)?;
        Ok(manifest)
    }

    /// Structural checks that need no matrix data.
    pub fn validate(&self, path: &Path) -> Result<()> {
        if self.version != MANIFEST_VERSION {
            return Err(Error::Format {
                path: path.to_path_buf(),
                detail: format!("unsupported manifest version {}", self.version),
            });
        }
        if self.num_examples == 0 {
            return Err(Error::Format {
                path: path.to_path_buf(),
                detail: "num_examples must be positive".into(),
            });
        }
        if self.layers.is_empty() {
            return Err(Error::Format {
                path: path.to_path_buf(),
                detail: "at least one layer is required".into(),
            });
        }
        for c in &self.channels {
            if c.pixels != c.height * c.width {
                return Err(Error::shape(
                    format!("channel `{}` ({})", c.name, c.file.display()),
                    format!("pixels = {}x{} = {}", c.height, c.width, c.height * c.width),
                    format!("pixels = {}", c.pixels),
                ));
            }
            if c.pixels == 0 {
                return Err(Error::shape(
                    format!("channel `{}`", c.name),
                    "pixels > 0",
                    "0",
                ));
            }
        }
        for l in &self.layers {
            if l.neurons == 0 {
                return Err(Error::shape(
                    format!("layer `{}`", l.name),
                    "neurons > 0",
                    "0",
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Channel {
    pub spec: ChannelSpec,
    /// `pixels x N`, entries in `[0, 1]`.
    pub data: Array2<f64>,
}

#[derive(Debug, Clone)]
pub struct Layer {
    pub spec: LayerSpec,
    /// `neurons x N` post-nonlinearity activations.
    pub data: Array2<f64>,
}

/// Pixel channels, layer activations and optional labels for `N` examples.
#[derive(Debug, Clone)]
pub struct DatasetBundle {
    num_examples: usize,
    channels: Vec<Channel>,
    layers: Vec<Layer>,
    labels: Option<LabelTable>,
}

fn check_array(file: &str, data: &Array2<f64>, rows: usize, cols: usize) -> Result<()> {
    if data.dim() != (rows, cols) {
        return Err(Error::shape(
            file,
            format!("{rows}x{cols}"),
            format!("{}x{}", data.nrows(), data.ncols()),
        ));
    }
    for ((row, col), &v) in data.indexed_iter() {
        if !v.is_finite() {
            return Err(Error::NonFiniteEntry {
                file: file.to_string(),
                row,
                col,
            });
        }
        if v < 0.0 {
            return Err(Error::NegativeEntry {
                file: file.to_string(),
                row,
                col,
                value: v as f32,
            });
        }
    }
    Ok(())
}

impl DatasetBundle {
    /// Builds a bundle from in-memory matrices, enforcing every invariant
    /// `load_bundle` enforces.
    pub fn new(
        num_examples: usize,
        channels: Vec<Channel>,
        layers: Vec<Layer>,
        labels: Option<LabelTable>,
    ) -> Result<Self> {
        let manifest = Manifest {
            version: MANIFEST_VERSION,
            num_examples,
            channels: channels.iter().map(|c| c.spec.clone()).collect(),
            layers: layers.iter().map(|l| l.spec.clone()).collect(),
            labels: None,
        };
        manifest.validate(Path::new("<memory>"))?;
        for c in &channels {
            check_array(
                &c.spec.file.display().to_string(),
                &c.data,
                c.spec.pixels,
                num_examples,
            )?;
        }
        for l in &layers {
            check_array(
                &l.spec.file.display().to_string(),
                &l.data,
                l.spec.neurons,
                num_examples,
            )?;
        }
        if let Some(t) = &labels {
            if t.len() != num_examples {
                return Err(Error::shape(
                    "labels",
                    format!("{num_examples} rows"),
                    format!("{} rows", t.len()),
                ));
            }
        }
        Ok(Self {
            num_examples,
            channels,
            layers,
            labels,
        })
    }

    /// Convenience constructor naming blocks `channel{i}` / `layer{j}`.
    /// Channels are given as `(height, width, data)`.
    pub fn from_arrays(
        channels: Vec<(usize, usize, Array2<f64>)>,
        layers: Vec<Array2<f64>>,
        labels: Option<LabelTable>,
    ) -> Result<Self> {
        let num_examples = layers
            .first()
            .map(|a| a.ncols())
            .ok_or_else(|| Error::InvalidConfig("at least one layer is required".into()))?;
        let channels = channels
            .into_iter()
            .enumerate()
            .map(|(i, (height, width, data))| Channel {
                spec: ChannelSpec {
                    name: format!("channel{i}"),
                    file: PathBuf::from(format!("channel{i}.cnmf")),
                    pixels: data.nrows(),
                    height,
                    width,
                },
                data,
            })
            .collect();
        let layers = layers
            .into_iter()
            .enumerate()
            .map(|(j, data)| Layer {
                spec: LayerSpec {
                    name: format!("layer{j}"),
                    file: PathBuf::from(format!("layer{j}.cnmf")),
                    neurons: data.nrows(),
                    depth_index: j,
                },
                data,
            })
            .collect();
        Self::new(num_examples, channels, layers, labels)
    }

    pub fn num_examples(&self) -> usize {
        self.num_examples
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn labels(&self) -> Option<&LabelTable> {
        self.labels.as_ref()
    }

    pub fn is_activations_only(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn with_labels(mut self, labels: Option<LabelTable>) -> Result<Self> {
        if let Some(t) = &labels {
            if t.len() != self.num_examples {
                return Err(Error::shape(
                    "labels",
                    format!("{} rows", self.num_examples),
                    format!("{} rows", t.len()),
                ));
            }
        }
        self.labels = labels;
        Ok(self)
    }

    /// Returns a copy with every pixel and activation entry multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        for ch in &mut out.channels {
            ch.data.mapv_inplace(|v| v * c);
        }
        for l in &mut out.layers {
            l.data.mapv_inplace(|v| v * c);
        }
        out
    }

    pub fn manifest(&self) -> Manifest {
        Manifest {
            version: MANIFEST_VERSION,
            num_examples: self.num_examples,
            channels: self.channels.iter().map(|c| c.spec.clone()).collect(),
            layers: self.layers.iter().map(|l| l.spec.clone()).collect(),
            labels: self.labels.as_ref().map(|_| LabelsRef {
                file: PathBuf::from("labels.csv"),
            }),
        }
    }

    /// Writes every matrix, the labels CSV and `bundle.json` into `dir`.
    /// Entries are stored as f32. Returns the manifest path.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<PathBuf> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let manifest = self.manifest();
        for c in &self.channels {
            let path = dir.join(&c.spec.file);
            ensure_parent(&path)?;
            write_matrix(&MatrixF32::from_array(&c.data), &path)?;
        }
        for l in &self.layers {
            let path = dir.join(&l.spec.file);
            ensure_parent(&path)?;
            write_matrix(&MatrixF32::from_array(&l.data), &path)?;
        }
        if let (Some(t), Some(r)) = (&self.labels, &manifest.labels) {
            t.write(dir.join(&r.file))?;
        }
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    Ok(())
}

fn load_block(base: &Path, file: &Path, rows: usize, cols: usize) -> Result<Array2<f64>> {
    let path = base.join(file);
    let m = read_matrix(&path)?;
    let name = path.display().to_string();
    if m.shape() != (rows, cols) {
        return Err(Error::shape(
            name,
            format!("{rows}x{cols}"),
            format!("{}x{}", m.rows(), m.cols()),
        ));
    }
    m.check_nonneg(&name)?;
    Ok(m.to_array())
}

/// Reads a manifest and every matrix and label table it references.
/// Relative paths resolve against the manifest's directory.
pub fn load_bundle(manifest_path: impl AsRef<Path>) -> Result<DatasetBundle> {
    let manifest_path = manifest_path.as_ref();
    let manifest = Manifest::read(manifest_path)?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let n = manifest.num_examples;

    let channels = manifest
        .channels
        .iter()
        .map(|spec| {
            Ok(Channel {
                data: load_block(base, &spec.file, spec.pixels, n)?,
                spec: spec.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let layers = manifest
        .layers
        .iter()
        .map(|spec| {
            Ok(Layer {
                data: load_block(base, &spec.file, spec.neurons, n)?,
                spec: spec.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let labels = manifest
        .labels
        .as_ref()
        .map(|r| LabelTable::read(base.join(&r.file), n))
        .transpose()?;
    DatasetBundle::new(n, channels, layers, labels)
}
