//! Report artifacts: CSV tables, `.cnmf` matrices, PGM previews and the
//! top-level `index.txt`.

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;

use super::knn::ConceptNeighborhood;
use super::pixels::{apply_mask, example_image, latent_pixel_image, median_masks, write_pgm};
use super::report::{factor_report, top_examples, FactorReport};
use super::similarity::{cosine_similarity, eigen_summary, EigenSummary, SimilarityMatrix};
use crate::error::{Error, Result};
use crate::factor::FactorModel;
use crate::interchange::{write_matrix, DatasetBundle, MatrixF32};

pub const INDEX_FILE: &str = "index.txt";

#[derive(Debug, Clone, PartialEq)]
pub struct ReportConfig {
    pub top_m_classes: usize,
    pub top_m_examples: usize,
    /// Defaults to the rank when unset.
    pub top_k_eigen: Option<usize>,
    pub pixel_images: bool,
    pub pgm: bool,
    /// Fail with `LabelsRequired` instead of skipping class rankings.
    pub require_labels: bool,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self {
            top_m_classes: 5,
            top_m_examples: 10,
            top_k_eigen: None,
            pixel_images: true,
            pgm: true,
            require_labels: false,
        }
    }
}

/// Everything written by [`full_report`], paths relative to the report root.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReportIndex {
    pub artifacts: Vec<(PathBuf, String)>,
    pub factor_reports: Vec<FactorReport>,
    pub similarities: Vec<SimilarityMatrix>,
    pub eigen: Vec<EigenSummary>,
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::Format {
        path: path.to_path_buf(),
        detail: e.to_string(),
    }
}

fn write_csv<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let err = csv_err(path);
    let mut w = csv::Writer::from_path(path).map_err(&err)?;
    w.write_record(header).map_err(&err)?;
    for r in rows {
        w.write_record(r.into_iter().collect::<Vec<_>>())
            .map_err(&err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_ranking_csv(
    path: impl AsRef<Path>,
    label_column: &str,
    ranking: &[(String, f64)],
) -> Result<()> {
    write_csv(
        path.as_ref(),
        &["rank", label_column, "score"],
        ranking
            .iter()
            .enumerate()
            .map(|(r, (l, s))| [(r + 1).to_string(), l.clone(), s.to_string()]),
    )
}

pub fn write_examples_csv(path: impl AsRef<Path>, ranking: &[(usize, f64)]) -> Result<()> {
    write_csv(
        path.as_ref(),
        &["rank", "example_index", "weight"],
        ranking
            .iter()
            .enumerate()
            .map(|(r, (k, w))| [(r + 1).to_string(), k.to_string(), w.to_string()]),
    )
}

pub fn write_matrix_csv(path: impl AsRef<Path>, m: &Array2<f64>) -> Result<()> {
    let header: Vec<String> = (0..m.ncols()).map(|j| format!("f{j}")).collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv(
        path.as_ref(),
        &header,
        m.rows()
            .into_iter()
            .map(|r| r.iter().map(|v| v.to_string()).collect::<Vec<_>>()),
    )
}

pub fn write_eigen_csv(path: impl AsRef<Path>, summaries: &[EigenSummary]) -> Result<()> {
    write_csv(
        path.as_ref(),
        &["layer", "k", "eigenvalue"],
        summaries.iter().flat_map(|s| {
            s.eigenvalues
                .iter()
                .enumerate()
                .map(move |(k, v)| [s.layer_name.clone(), (k + 1).to_string(), v.to_string()])
        }),
    )
}

pub fn write_eigen_summary_csv(path: impl AsRef<Path>, summaries: &[EigenSummary]) -> Result<()> {
    write_csv(
        path.as_ref(),
        &["layer", "top_k", "top_k_mean"],
        summaries.iter().map(|s| {
            [
                s.layer_name.clone(),
                s.top_k.to_string(),
                s.top_k_mean.to_string(),
            ]
        }),
    )
}

pub fn write_knn_csv(path: impl AsRef<Path>, nb: &ConceptNeighborhood) -> Result<()> {
    let path = path.as_ref();
    write_csv(
        path,
        &["rank", "example_index", "distance"],
        nb.neighbors
            .iter()
            .enumerate()
            .map(|(r, (k, d))| [(r + 1).to_string(), k.to_string(), d.to_string()]),
    )
}

pub fn write_histogram_csv(path: impl AsRef<Path>, nb: &ConceptNeighborhood) -> Result<()> {
    write_csv(
        path.as_ref(),
        &["factor", "count"],
        nb.concept_histogram
            .iter()
            .enumerate()
            .map(|(c, n)| [c.to_string(), n.to_string()]),
    )
}

pub fn write_f64_matrix(path: impl AsRef<Path>, m: &Array2<f64>) -> Result<()> {
    write_matrix(&MatrixF32::from_array(m), path)
}

/// File-name-safe form of a layer or channel name.
pub fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

struct Writer<'a> {
    root: &'a Path,
    index: ReportIndex,
}

impl Writer<'_> {
    fn path(&self, rel: &Path) -> Result<PathBuf> {
        let p = self.root.join(rel);
        if let Some(parent) = p.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        Ok(p)
    }

    fn record(&mut self, rel: PathBuf, what: String) {
        self.index.artifacts.push((rel, what));
    }
}

/// Writes factor rankings, per-layer similarity and eigen summaries, and
/// (when the model has pixel factors) latent pixel images with their median
/// masks into `out`.
pub fn full_report(
    model: &FactorModel,
    bundle: &DatasetBundle,
    config: &ReportConfig,
    out: impl AsRef<Path>,
) -> Result<ReportIndex> {
    let root = out.as_ref();
    model.check_compatible(bundle)?;
    let labels = bundle.labels();
    if config.require_labels && labels.is_none() {
        return Err(Error::LabelsRequired);
    }
    fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
    let mut w = Writer {
        root,
        index: ReportIndex::default(),
    };
    let d = model.rank();

    for i in 0..d {
        let examples_rel = PathBuf::from(format!("factors/factor_{i:03}_examples.csv"));
        if let Some(labels) = labels {
            let r = factor_report(
                model,
                Some(labels),
                i,
                config.top_m_classes,
                config.top_m_examples,
            )?;
            let rel = PathBuf::from(format!("factors/factor_{i:03}_classes.csv"));
            write_ranking_csv(w.path(&rel)?, "class", &r.class_scores)?;
            w.record(rel, format!("factor {i}: class scores"));
            if labels.has_superclasses() {
                let rel = PathBuf::from(format!("factors/factor_{i:03}_superclasses.csv"));
                write_ranking_csv(w.path(&rel)?, "superclass", &r.top_superclass)?;
                w.record(rel, format!("factor {i}: superclass scores"));
            }
            write_examples_csv(w.path(&examples_rel)?, &r.top_examples)?;
            w.index.factor_reports.push(r);
        } else {
            write_examples_csv(
                w.path(&examples_rel)?,
                &top_examples(model, i, config.top_m_examples)?,
            )?;
        }
        w.record(examples_rel, format!("factor {i}: top examples"));
    }

    let top_k = config.top_k_eigen.unwrap_or(d);
    let mut order: Vec<usize> = (0..model.neuron.len()).collect();
    order.sort_by_key(|&j| bundle.layers()[j].spec.depth_index);
    for j in order {
        let sim = cosine_similarity(model, j)?;
        let stem = format!("layer{j}_{}", sanitize(&sim.layer_name));
        let rel = PathBuf::from(format!("similarity/{stem}.cnmf"));
        write_f64_matrix(w.path(&rel)?, &sim.values)?;
        w.record(
            rel,
            format!(
                "layer {}: cosine similarity of factor columns",
                sim.layer_name
            ),
        );
        let rel = PathBuf::from(format!("similarity/{stem}.csv"));
        write_matrix_csv(w.path(&rel)?, &sim.values)?;
        w.record(
            rel,
            format!("layer {}: cosine similarity (csv)", sim.layer_name),
        );
        w.index.eigen.push(eigen_summary(&sim, top_k)?);
        w.index.similarities.push(sim);
    }
    let rel = PathBuf::from("eigen.csv");
    write_eigen_csv(w.path(&rel)?, &w.index.eigen)?;
    w.record(rel, "similarity spectra per layer".into());
    let rel = PathBuf::from("eigen_summary.csv");
    write_eigen_summary_csv(w.path(&rel)?, &w.index.eigen)?;
    w.record(
        rel,
        format!("mean of the top {top_k} eigenvalues per layer"),
    );

    if config.pixel_images && !bundle.is_activations_only() {
        for i in 0..d {
            let latent = latent_pixel_image(model, bundle, i)?;
            let masks = median_masks(&latent);
            let top = top_examples(model, i, 1)?[0].0;
            let overlay = apply_mask(&masks, &example_image(bundle, top)?)?;
            for ((c, m), o) in latent.channels.iter().zip(&masks).zip(&overlay) {
                let stem = format!("pixels/factor_{i:03}_{}", sanitize(&c.name));
                let mask_f = m.mapv(f64::from);
                let items = [
                    (
                        "latent",
                        &c.values,
                        format!("factor {i}: latent pixels, channel {}", c.name),
                    ),
                    (
                        "mask",
                        &mask_f,
                        format!("factor {i}: median mask, channel {}", c.name),
                    ),
                    (
                        "overlay",
                        &o.values,
                        format!(
                            "factor {i}: mask over top example {top}, channel {}",
                            c.name
                        ),
                    ),
                ];
                for (kind, values, what) in items {
                    let rel = PathBuf::from(format!("{stem}_{kind}.cnmf"));
                    write_f64_matrix(w.path(&rel)?, values)?;
                    w.record(rel, what.clone());
                    if config.pgm {
                        let rel = PathBuf::from(format!("{stem}_{kind}.pgm"));
                        write_pgm(values, w.path(&rel)?)?;
                        w.record(rel, format!("{what} (pgm)"));
                    }
                }
            }
        }
    }

    let mut text = String::new();
    for (p, what) in &w.index.artifacts {
        text.push_str(&format!("{}\t{}\n", p.display(), what));
    }
    let index_path = root.join(INDEX_FILE);
    fs::write(&index_path, text).map_err(|e| Error::io(&index_path, e))?;
    Ok(w.index)
}
