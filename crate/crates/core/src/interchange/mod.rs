//! On-disk formats: `.cnmf` matrices, bundle manifests and label tables.

mod bundle;
mod labels;
mod matrix;

pub use bundle::{
    load_bundle, Channel, ChannelSpec, DatasetBundle, LabelsRef, Layer, LayerSpec, Manifest,
    MANIFEST_FILE, MANIFEST_VERSION,
};
pub use labels::{LabelTable, LABELS_HEADER};
pub use matrix::{
    read_matrix, scale_pixels_unit, write_matrix, MatrixF32, DTYPE_F32, FORMAT_VERSION, HEADER_LEN,
    MAGIC,
};
