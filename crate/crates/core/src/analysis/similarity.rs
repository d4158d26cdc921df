use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::Array2;

use crate::error::{Error, Result};
use crate::factor::FactorModel;

/// Cosine similarity between the latent columns of one layer's neuron factor.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    pub layer_name: String,
    pub values: Array2<f64>,
    /// Factors whose column is all zero; their rows and columns are 0.
    pub zero_columns: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenSummary {
    pub layer_name: String,
    /// Descending.
    pub eigenvalues: Vec<f64>,
    pub top_k: usize,
    pub top_k_mean: f64,
}

/// Pairwise cosine similarity of the columns of `m`, clamped to `[0, 1]`.
/// Zero columns get 0 everywhere, including the diagonal.
pub fn column_cosine_similarity(m: &Array2<f64>) -> (Array2<f64>, Vec<usize>) {
    let d = m.ncols();
    let sq: Vec<f64> = m.columns().into_iter().map(|c| c.dot(&c)).collect();
    let zero: Vec<usize> = (0..d).filter(|&a| sq[a] == 0.0).collect();
    let mut out = Array2::<f64>::zeros((d, d));
    for a in 0..d {
        if sq[a] == 0.0 {
            continue;
        }
        out[[a, a]] = 1.0;
        for b in a + 1..d {
            if sq[b] == 0.0 {
                continue;
            }
            let cos = m.column(a).dot(&m.column(b)) / (sq[a] * sq[b]).sqrt();
            let cos = cos.clamp(0.0, 1.0);
            out[[a, b]] = cos;
            out[[b, a]] = cos;
        }
    }
    (out, zero)
}

pub fn cosine_similarity(model: &FactorModel, layer: usize) -> Result<SimilarityMatrix> {
    let o = model.neuron.get(layer).ok_or(Error::IndexOutOfRange {
        what: "layer",
        index: layer,
        limit: model.neuron.len(),
    })?;
    let (values, zero_columns) = column_cosine_similarity(o);
    Ok(SimilarityMatrix {
        layer_name: model.layer_names[layer].clone(),
        values,
        zero_columns,
    })
}

/// Eigenvalues of a symmetric matrix, descending.
pub fn symmetric_eigenvalues(m: &Array2<f64>) -> Vec<f64> {
    let n = m.nrows();
    let dm = DMatrix::from_fn(n, n, |i, j| m[[i, j]]);
    let mut vals: Vec<f64> = SymmetricEigen::new(dm)
        .eigenvalues
        .iter()
        .copied()
        .collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    vals
}

/// Spectrum of the similarity matrix and the mean of its `k` largest
/// eigenvalues. A matrix near the identity has a top-k mean near 1.
pub fn eigen_summary(sim: &SimilarityMatrix, k: usize) -> Result<EigenSummary> {
    let d = sim.values.nrows();
    if k == 0 || k > d {
        return Err(Error::InvalidConfig(format!(
            "top-k eigen count must be in 1..={d}, got {k}"
        )));
    }
    let eigenvalues = symmetric_eigenvalues(&sim.values);
    let top_k_mean = eigenvalues[..k].iter().sum::<f64>() / k as f64;
    Ok(EigenSummary {
        layer_name: sim.layer_name.clone(),
        eigenvalues,
        top_k: k,
        top_k_mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn sim(values: Array2<f64>) -> SimilarityMatrix {
        SimilarityMatrix {
            layer_name: "l".into(),
            values,
            zero_columns: vec![],
        }
    }

    #[test]
    fn identity_columns() {
        let (s, z) = column_cosine_similarity(&Array2::<f64>::eye(2));
        assert_eq!(s, Array2::<f64>::eye(2));
        assert!(z.is_empty());
    }

    #[test]
    fn equal_columns_are_all_ones() {
        let (s, _) = column_cosine_similarity(&array![[0.3, 0.3], [1.7, 1.7], [0.1, 0.1]]);
        assert_eq!(s, Array2::<f64>::ones((2, 2)));
    }

    #[test]
    fn half_diagonal_pair() {
        let (s, _) = column_cosine_similarity(&array![[1.0, 1.0], [0.0, 1.0]]);
        assert!((s[[0, 1]] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(s[[0, 1]], s[[1, 0]]);
    }

    #[test]
    fn zero_column_convention() {
        let (s, z) = column_cosine_similarity(&array![[1.0, 0.0, 2.0], [1.0, 0.0, 0.0]]);
        assert_eq!(z, vec![1]);
        assert_eq!(s.row(1).to_vec(), vec![0.0, 0.0, 0.0]);
        assert_eq!(s.column(1).to_vec(), vec![0.0, 0.0, 0.0]);
        assert_eq!(s[[0, 0]], 1.0);
    }

    #[test]
    fn identity_spectrum() {
        for k in 1..=4 {
            assert_eq!(
                eigen_summary(&sim(Array2::eye(4)), k).unwrap().top_k_mean,
                1.0
            );
        }
    }

    #[test]
    fn all_ones_spectrum() {
        let e = eigen_summary(&sim(Array2::ones((5, 5))), 5).unwrap();
        assert!((e.eigenvalues[0] - 5.0).abs() < 1e-9);
        assert!(e.eigenvalues[1..].iter().all(|v| v.abs() < 1e-9));
        assert!((e.top_k_mean - 1.0).abs() < 1e-12);
    }

    #[test]
    fn k_out_of_range() {
        assert!(eigen_summary(&sim(Array2::eye(3)), 0).is_err());
        assert!(eigen_summary(&sim(Array2::eye(3)), 4).is_err());
    }
}
