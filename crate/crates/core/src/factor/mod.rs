//! Coupled non-negative factorization: every pixel block `D_i ~ P_i F` and
//! activation block `A_j ~ O_j F` shares the example factor `F`.

mod config;
mod fit;
mod model;
mod objective;
mod updates;

pub use config::{FitConfig, NormMode};
pub use fit::{fit, fit_from, sweep};
pub use model::{init_factors, Block, Diagnostics, FactorModel, ZeroColumn, MODEL_FILE};
pub use objective::{objective, objective_terms, relative_residual, ObjectiveTerms};
pub use updates::{
    normalize_columns, normalize_matrix_columns, update_f, update_f_group_sparse, update_o,
    update_p,
};
