use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{FitConfig, NormMode};
use super::updates::normalize_columns;
use crate::error::{Error, Result};
use crate::interchange::{read_matrix, write_matrix, DatasetBundle, MatrixF32};

pub const MODEL_FILE: &str = "model.json";
const MODEL_FORMAT: u32 = 1;

/// Identifies one pixel (`P_i`) or neuron (`O_j`) factor block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Block {
    Pixel(usize),
    Neuron(usize),
}

impl std::fmt::Display for Block {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Block::Pixel(i) => write!(f, "P_{i}"),
            Block::Neuron(j) => write!(f, "O_{j}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZeroColumn {
    pub block: Block,
    pub column: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub warnings: Vec<String>,
    /// All-zero P/O columns the unit-column projection had to skip.
    pub zero_columns: Vec<ZeroColumn>,
}

/// Fitted factors of the coupled model.
///
/// `pixel[i]` is `S_i x d` (rows embed pixels), `neuron[j]` is `N_j x d`
/// (rows embed neurons), `examples` is `d x N` (columns embed examples).
#[derive(Debug, Clone, PartialEq)]
pub struct FactorModel {
    pub pixel: Vec<Array2<f64>>,
    pub neuron: Vec<Array2<f64>>,
    pub examples: Array2<f64>,
    pub channel_names: Vec<String>,
    pub layer_names: Vec<String>,
    pub config: FitConfig,
    pub objective_trace: Vec<f64>,
    pub iters_run: usize,
    pub converged: bool,
    pub diagnostics: Diagnostics,
}

impl FactorModel {
    pub fn rank(&self) -> usize {
        self.examples.nrows()
    }

    pub fn num_examples(&self) -> usize {
        self.examples.ncols()
    }

    pub fn block(&self, block: Block) -> &Array2<f64> {
        match block {
            Block::Pixel(i) => &self.pixel[i],
            Block::Neuron(j) => &self.neuron[j],
        }
    }

    /// Assembles a model from explicit factors, e.g. for analysis of
    /// externally produced factorizations.
    pub fn from_factors(
        pixel: Vec<Array2<f64>>,
        neuron: Vec<Array2<f64>>,
        examples: Array2<f64>,
        config: FitConfig,
    ) -> Result<Self> {
        let d = examples.nrows();
        for (name, m) in pixel
            .iter()
            .enumerate()
            .map(|(i, m)| (format!("P_{i}"), m))
            .chain(
                neuron
                    .iter()
                    .enumerate()
                    .map(|(j, m)| (format!("O_{j}"), m)),
            )
        {
            if m.ncols() != d {
                return Err(Error::shape(name, format!("{d} columns"), m.ncols()));
            }
        }
        let channel_names = (0..pixel.len()).map(|i| format!("channel{i}")).collect();
        let layer_names = (0..neuron.len()).map(|j| format!("layer{j}")).collect();
        Ok(Self {
            pixel,
            neuron,
            examples,
            channel_names,
            layer_names,
            config,
            objective_trace: Vec::new(),
            iters_run: 0,
            converged: false,
            diagnostics: Diagnostics::default(),
        })
    }

    /// Checks that the factor shapes line up with `bundle`.
    pub fn check_compatible(&self, bundle: &DatasetBundle) -> Result<()> {
        let d = self.rank();
        if self.pixel.len() != bundle.channels().len() {
            return Err(Error::shape(
                "model",
                format!("{} pixel factors", bundle.channels().len()),
                self.pixel.len(),
            ));
        }
        if self.neuron.len() != bundle.layers().len() {
            return Err(Error::shape(
                "model",
                format!("{} neuron factors", bundle.layers().len()),
                self.neuron.len(),
            ));
        }
        if self.num_examples() != bundle.num_examples() {
            return Err(Error::shape(
                "F",
                format!("{} columns", bundle.num_examples()),
                self.num_examples(),
            ));
        }
        for (i, (p, c)) in self.pixel.iter().zip(bundle.channels()).enumerate() {
            if p.dim() != (c.spec.pixels, d) {
                return Err(Error::shape(
                    format!("P_{i}"),
                    format!("{}x{d}", c.spec.pixels),
                    format!("{}x{}", p.nrows(), p.ncols()),
                ));
            }
        }
        for (j, (o, l)) in self.neuron.iter().zip(bundle.layers()).enumerate() {
            if o.dim() != (l.spec.neurons, d) {
                return Err(Error::shape(
                    format!("O_{j}"),
                    format!("{}x{d}", l.spec.neurons),
                    format!("{}x{}", o.nrows(), o.ncols()),
                ));
            }
        }
        Ok(())
    }

    /// First non-finite factor, if any.
    pub(crate) fn find_non_finite(&self) -> Option<String> {
        let bad = |m: &Array2<f64>| m.iter().any(|v| !v.is_finite());
        if bad(&self.examples) {
            return Some("F".into());
        }
        for (i, p) in self.pixel.iter().enumerate() {
            if bad(p) {
                return Some(format!("P_{i}"));
            }
        }
        for (j, o) in self.neuron.iter().enumerate() {
            if bad(o) {
                return Some(format!("O_{j}"));
            }
        }
        None
    }
}

fn uniform_block(rng: &mut ChaCha8Rng, rows: usize, cols: usize, epsilon: f64) -> Array2<f64> {
    // u in [0, 1) maps onto (epsilon, 1].
    Array2::from_shape_simple_fn((rows, cols), || {
        let u: f64 = rng.random();
        1.0 - u * (1.0 - epsilon)
    })
}

/// Seeded i.i.d. uniform `(epsilon, 1]` initialization. Draw order is F,
/// then every P_i, then every O_j.
pub fn init_factors(bundle: &DatasetBundle, config: &FitConfig) -> Result<FactorModel> {
    config.validate_for(bundle)?;
    let d = config.rank;
    let n = bundle.num_examples();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let examples = uniform_block(&mut rng, d, n, config.epsilon);
    let pixel = bundle
        .channels()
        .iter()
        .map(|c| uniform_block(&mut rng, c.spec.pixels, d, config.epsilon))
        .collect();
    let neuron = bundle
        .layers()
        .iter()
        .map(|l| uniform_block(&mut rng, l.spec.neurons, d, config.epsilon))
        .collect();

    let mut diagnostics = Diagnostics::default();
    let min_dim = bundle
        .channels()
        .iter()
        .map(|c| c.spec.pixels)
        .chain(bundle.layers().iter().map(|l| l.spec.neurons))
        .chain(std::iter::once(n))
        .min()
        .unwrap_or(n);
    if d > min_dim {
        diagnostics.warnings.push(format!(
            "rank {d} exceeds the smallest matrix dimension {min_dim}; factorization is over-complete"
        ));
    }

    let mut model = FactorModel {
        pixel,
        neuron,
        examples,
        channel_names: bundle
            .channels()
            .iter()
            .map(|c| c.spec.name.clone())
            .collect(),
        layer_names: bundle
            .layers()
            .iter()
            .map(|l| l.spec.name.clone())
            .collect(),
        config: config.clone(),
        objective_trace: Vec::new(),
        iters_run: 0,
        converged: false,
        diagnostics,
    };
    if config.norm_mode == NormMode::UnitColumns {
        model.diagnostics.zero_columns = normalize_columns(&mut model);
    }
    Ok(model)
}

#[derive(Debug, Serialize, Deserialize)]
struct BlockEntry {
    name: String,
    file: PathBuf,
    rows: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelManifest {
    format: u32,
    rank: usize,
    num_examples: usize,
    config: FitConfig,
    channels: Vec<BlockEntry>,
    layers: Vec<BlockEntry>,
    examples_file: PathBuf,
    objective_trace: Vec<f64>,
    iters_run: usize,
    converged: bool,
    diagnostics: Diagnostics,
}

impl FactorModel {
    /// Writes `P_i.cnmf`, `O_j.cnmf`, `F.cnmf` and `model.json` into `dir`.
    /// Fails if `dir` already holds a model unless `force` is set.
    pub fn save(&self, dir: impl AsRef<Path>, force: bool) -> Result<()> {
        let dir = dir.as_ref();
        let manifest_path = dir.join(MODEL_FILE);
        if manifest_path.exists() && !force {
            return Err(Error::OutputExists {
                path: dir.to_path_buf(),
            });
        }
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

        let mut channels = Vec::new();
        for (i, p) in self.pixel.iter().enumerate() {
            let file = PathBuf::from(format!("P_{i}.cnmf"));
            write_matrix(&MatrixF32::from_array(p), dir.join(&file))?;
            channels.push(BlockEntry {
                name: self.channel_names[i].clone(),
                file,
                rows: p.nrows(),
            });
        }
        let mut layers = Vec::new();
        for (j, o) in self.neuron.iter().enumerate() {
            let file = PathBuf::from(format!("O_{j}.cnmf"));
            write_matrix(&MatrixF32::from_array(o), dir.join(&file))?;
            layers.push(BlockEntry {
                name: self.layer_names[j].clone(),
                file,
                rows: o.nrows(),
            });
        }
        let examples_file = PathBuf::from("F.cnmf");
        write_matrix(
            &MatrixF32::from_array(&self.examples),
            dir.join(&examples_file),
        )?;

        let manifest = ModelManifest {
            format: MODEL_FORMAT,
            rank: self.rank(),
            num_examples: self.num_examples(),
            config: self.config.clone(),
            channels,
            layers,
            examples_file,
            objective_trace: self.objective_trace.clone(),
            iters_run: self.iters_run,
            converged: self.converged,
            diagnostics: self.diagnostics.clone(),
        };
        let text = serde_json::to_string_pretty(&manifest).expect("model manifest serializes");
        fs::write(&manifest_path, text + "\n").map_err(|e| Error::io(&manifest_path, e))
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let manifest_path = dir.join(MODEL_FILE);
        let text = fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
        let m: ModelManifest = serde_json::from_str(&text).map_err(|e| Error::Format {
            path: manifest_path.clone(),
            detail: format!("model manifest: {e}"),
        })?;
        if m.format != MODEL_FORMAT {
            return Err(Error::Format {
                path: manifest_path,
                detail: format!("unsupported model format {}", m.format),
            });
        }
        let load = |file: &Path, rows: usize, cols: usize| -> Result<Array2<f64>> {
            let path = dir.join(file);
            let mat = read_matrix(&path)?;
            let name = path.display().to_string();
            if mat.shape() != (rows, cols) {
                return Err(Error::shape(
                    name,
                    format!("{rows}x{cols}"),
                    format!("{}x{}", mat.rows(), mat.cols()),
                ));
            }
            mat.check_nonneg(&name)?;
            Ok(mat.to_array())
        };
        let pixel = m
            .channels
            .iter()
            .map(|b| load(&b.file, b.rows, m.rank))
            .collect::<Result<Vec<_>>>()?;
        let neuron = m
            .layers
            .iter()
            .map(|b| load(&b.file, b.rows, m.rank))
            .collect::<Result<Vec<_>>>()?;
        let examples = load(&m.examples_file, m.rank, m.num_examples)?;
        Ok(Self {
            pixel,
            neuron,
            examples,
            channel_names: m.channels.into_iter().map(|b| b.name).collect(),
            layer_names: m.layers.into_iter().map(|b| b.name).collect(),
            config: m.config,
            objective_trace: m.objective_trace,
            iters_run: m.iters_run,
            converged: m.converged,
            diagnostics: m.diagnostics,
        })
    }
}
