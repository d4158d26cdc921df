//! `cnmf` command-line surface.
//!
//! Exit codes: 0 success, 2 usage, 3 I/O or format, 4 validation,
//! 5 numerical failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{
    cosine_similarity, eigen_summary, full_report, knn_latent, latent_pixel_image, median_masks,
    sanitize, write_eigen_csv, write_eigen_summary_csv, write_f64_matrix, write_histogram_csv,
    write_knn_csv, write_matrix_csv, write_pgm, ReportConfig,
};
use crate::error::{Error, Result};
use crate::factor::{fit, objective_terms, FactorModel, FitConfig, NormMode};
use crate::interchange::load_bundle;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_VALIDATION: i32 = 4;
pub const EXIT_NUMERICAL: i32 = 5;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidConfig(_) | Error::OutputExists { .. } => EXIT_USAGE,
        Error::Io { .. }
        | Error::MissingFile { .. }
        | Error::BadMagic { .. }
        | Error::UnsupportedVersion { .. }
        | Error::UnsupportedDtype { .. }
        | Error::TruncatedPayload { .. }
        | Error::Format { .. }
        | Error::EmptyMatrix { .. }
        | Error::Labels { .. } => EXIT_IO,
        Error::ShapeMismatch { .. }
        | Error::NegativeEntry { .. }
        | Error::NonFiniteEntry { .. }
        | Error::OutOfRange { .. }
        | Error::ModeViolation(_)
        | Error::LabelsRequired
        | Error::NoPixelFactors
        | Error::DegenerateQuery { .. }
        | Error::IndexOutOfRange { .. } => EXIT_VALIDATION,
        Error::NonFinite { .. } => EXIT_NUMERICAL,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "cnmf",
    version,
    about = "Coupled NMF of CNN pixels, neurons and examples"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the coupled factorization and write a model directory.
    Factorize(FactorizeArgs),
    /// Write every report artifact for a fitted model.
    Report(ReportArgs),
    /// Cosine similarity of one layer's factor columns and its spectrum.
    Similarity(SimilarityArgs),
    /// Latent pixel images and median masks of one factor.
    PixelImage(PixelImageArgs),
    /// Nearest neighbours of an example in the latent space of F.
    Knn(KnnArgs),
    /// Evaluate the objective of a model on a bundle.
    Objective(ObjectiveArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum NormModeArg {
    L2reg,
    UnitColumns,
}

impl From<NormModeArg> for NormMode {
    fn from(m: NormModeArg) -> Self {
        match m {
            NormModeArg::L2reg => NormMode::L2reg,
            NormModeArg::UnitColumns => NormMode::UnitColumns,
        }
    }
}

#[derive(Debug, Args)]
pub struct FactorizeArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub rank: usize,
    #[arg(long, default_value_t = 0.0)]
    pub lambda_p: f64,
    #[arg(long, default_value_t = 0.0)]
    pub lambda_o: f64,
    #[arg(long, default_value_t = 0.0)]
    pub lambda_f: f64,
    #[arg(long, value_enum, default_value = "l2reg")]
    pub norm_mode: NormModeArg,
    #[arg(long)]
    pub group_sparse: bool,
    #[arg(long, default_value_t = 500)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub force: bool,
    /// Print the objective after every sweep to stderr.
    #[arg(long)]
    pub trace: bool,
}

impl FactorizeArgs {
    pub fn fit_config(&self) -> FitConfig {
        FitConfig {
            rank: self.rank,
            lambda_p: self.lambda_p,
            lambda_o: self.lambda_o,
            lambda_f: self.lambda_f,
            norm_mode: self.norm_mode.into(),
            group_sparse_f: self.group_sparse,
            max_iters: self.max_iters,
            tol: self.tol,
            epsilon: self.epsilon,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub top_m: usize,
    #[arg(long, default_value_t = 10)]
    pub top_examples: usize,
    #[arg(long)]
    pub top_k_eigen: Option<usize>,
    /// Require class labels; fail instead of skipping class rankings.
    #[arg(long)]
    pub classes: bool,
    #[arg(long)]
    pub no_pixels: bool,
    #[arg(long)]
    pub no_pgm: bool,
}

#[derive(Debug, Args)]
pub struct SimilarityArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub layer: usize,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub top_k_eigen: Option<usize>,
}

#[derive(Debug, Args)]
pub struct PixelImageArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub factor: usize,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub no_pgm: bool,
}

#[derive(Debug, Args)]
pub struct KnnArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub query: usize,
    #[arg(long, default_value_t = 30)]
    pub k: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ObjectiveArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
}

fn create_dir(path: &PathBuf) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::Io {
        path: path.clone(),
        source: e,
    })
}

pub fn cmd_factorize(
    args: &FactorizeArgs,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32> {
    let bundle = load_bundle(&args.manifest)?;
    let config = args.fit_config();
    config.validate_for(&bundle)?;
    if args.out.join(crate::factor::MODEL_FILE).exists() && !args.force {
        return Err(Error::OutputExists {
            path: args.out.clone(),
        });
    }
    let model = fit(&bundle, &config)?;
    for w in &model.diagnostics.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    if args.trace {
        for (t, j) in model.objective_trace.iter().enumerate() {
            let _ = writeln!(err, "sweep {t}: objective {j:.12e}");
        }
    }
    model.save(&args.out, args.force)?;
    let final_j = model.objective_trace.last().copied().unwrap_or(f64::NAN);
    if model.converged {
        let _ = writeln!(
            out,
            "converged after {} sweeps, objective {final_j:.12e}, model written to {}",
            model.iters_run,
            args.out.display()
        );
    } else {
        let _ = writeln!(
            err,
            "warning: reached max-iters ({}) without converging",
            model.iters_run
        );
        let _ = writeln!(
            out,
            "stopped after {} sweeps, objective {final_j:.12e}, model written to {}",
            model.iters_run,
            args.out.display()
        );
    }
    Ok(EXIT_OK)
}

pub fn cmd_report(args: &ReportArgs, out: &mut dyn Write) -> Result<i32> {
    let bundle = load_bundle(&args.manifest)?;
    let model = FactorModel::load(&args.model)?;
    let cfg = ReportConfig {
        top_m_classes: args.top_m,
        top_m_examples: args.top_examples,
        top_k_eigen: args.top_k_eigen,
        pixel_images: !args.no_pixels,
        pgm: !args.no_pgm,
        require_labels: args.classes,
    };
    let index = full_report(&model, &bundle, &cfg, &args.out)?;
    let _ = writeln!(
        out,
        "wrote {} artifacts to {}",
        index.artifacts.len(),
        args.out.display()
    );
    Ok(EXIT_OK)
}

pub fn cmd_similarity(args: &SimilarityArgs, out: &mut dyn Write) -> Result<i32> {
    let model = FactorModel::load(&args.model)?;
    let sim = cosine_similarity(&model, args.layer)?;
    let eig = eigen_summary(&sim, args.top_k_eigen.unwrap_or(model.rank()))?;
    create_dir(&args.out)?;
    let stem = format!("layer{}_{}", args.layer, sanitize(&sim.layer_name));
    write_f64_matrix(
        args.out.join(format!("{stem}_similarity.cnmf")),
        &sim.values,
    )?;
    write_matrix_csv(args.out.join(format!("{stem}_similarity.csv")), &sim.values)?;
    write_eigen_csv(
        args.out.join(format!("{stem}_eigen.csv")),
        std::slice::from_ref(&eig),
    )?;
    write_eigen_summary_csv(
        args.out.join(format!("{stem}_eigen_summary.csv")),
        std::slice::from_ref(&eig),
    )?;
    let _ = writeln!(
        out,
        "layer {} ({}): top-{} eigenvalue mean {:.9}, {} zero columns",
        args.layer,
        sim.layer_name,
        eig.top_k,
        eig.top_k_mean,
        sim.zero_columns.len()
    );
    Ok(EXIT_OK)
}

pub fn cmd_pixel_image(args: &PixelImageArgs, out: &mut dyn Write) -> Result<i32> {
    let bundle = load_bundle(&args.manifest)?;
    let model = FactorModel::load(&args.model)?;
    let img = latent_pixel_image(&model, &bundle, args.factor)?;
    let masks = median_masks(&img);
    create_dir(&args.out)?;
    for (c, m) in img.channels.iter().zip(&masks) {
        let stem = format!("factor_{:03}_{}", args.factor, sanitize(&c.name));
        let mask = m.mapv(f64::from);
        write_f64_matrix(args.out.join(format!("{stem}_latent.cnmf")), &c.values)?;
        write_f64_matrix(args.out.join(format!("{stem}_mask.cnmf")), &mask)?;
        if !args.no_pgm {
            write_pgm(&c.values, args.out.join(format!("{stem}_latent.pgm")))?;
            write_pgm(&mask, args.out.join(format!("{stem}_mask.pgm")))?;
        }
    }
    let _ = writeln!(
        out,
        "factor {}: {} channel images written to {}",
        args.factor,
        img.channels.len(),
        args.out.display()
    );
    Ok(EXIT_OK)
}

pub fn cmd_knn(args: &KnnArgs, out: &mut dyn Write) -> Result<i32> {
    let model = FactorModel::load(&args.model)?;
    let nb = knn_latent(&model, args.query, args.k)?;
    create_dir(&args.out)?;
    write_knn_csv(args.out.join(format!("knn_{}.csv", args.query)), &nb)?;
    write_histogram_csv(
        args.out.join(format!("knn_{}_concepts.csv", args.query)),
        &nb,
    )?;
    let (nearest, dist) = nb.neighbors[0];
    let _ = writeln!(
        out,
        "query {}: nearest {} at distance {:.9}, concepts {:?}",
        args.query, nearest, dist, nb.concept_histogram
    );
    Ok(EXIT_OK)
}

pub fn cmd_objective(args: &ObjectiveArgs, out: &mut dyn Write) -> Result<i32> {
    let bundle = load_bundle(&args.manifest)?;
    let model = FactorModel::load(&args.model)?;
    let t = objective_terms(&bundle, &model)?;
    let _ = writeln!(
        out,
        "objective {:.12e} (residual {:.12e}, penalty {:.12e})",
        t.total(),
        t.residual(),
        t.total() - t.residual()
    );
    Ok(EXIT_OK)
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Factorize(a) => cmd_factorize(a, out, err),
        Command::Report(a) => cmd_report(a, out),
        Command::Similarity(a) => cmd_similarity(a, out),
        Command::PixelImage(a) => cmd_pixel_image(a, out),
        Command::Knn(a) => cmd_knn(a, out),
        Command::Objective(a) => cmd_objective(a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}
