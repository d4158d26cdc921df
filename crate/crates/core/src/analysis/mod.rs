//! Interpretability analyses of a fitted [`FactorModel`](crate::factor::FactorModel).

mod export;
mod knn;
mod pixels;
mod report;
mod similarity;

pub use export::{
    full_report, sanitize, write_eigen_csv, write_eigen_summary_csv, write_examples_csv,
    write_f64_matrix, write_histogram_csv, write_knn_csv, write_matrix_csv, write_ranking_csv,
    ReportConfig, ReportIndex, INDEX_FILE,
};
pub use knn::{argmax, concept_assignment, cosine_distance, knn_latent, ConceptNeighborhood};
pub use pixels::{
    apply_mask, example_image, latent_pixel_image, median, median_mask, median_mask_plane,
    median_masks, pgm_bytes, write_pgm, ChannelImage, LatentPixelImage, Mask,
};
pub use report::{factor_report, top_examples, FactorReport};
pub use similarity::{
    column_cosine_similarity, cosine_similarity, eigen_summary, symmetric_eigenvalues,
    EigenSummary, SimilarityMatrix,
};
