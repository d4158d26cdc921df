use ndarray::ArrayView1;

use crate::error::{Error, Result};
use crate::factor::FactorModel;

#[derive(Debug, Clone, PartialEq)]
pub struct ConceptNeighborhood {
    pub query_example: usize,
    /// `(example index, cosine distance)`, nearest first.
    pub neighbors: Vec<(usize, f64)>,
    /// `concept_histogram[c]` counts neighbors whose strongest factor is `c`.
    pub concept_histogram: Vec<usize>,
}

/// Index of the largest entry; the lowest index wins ties.
pub fn argmax(v: ArrayView1<'_, f64>) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Strongest latent factor of every example (argmax over each column of F).
pub fn concept_assignment(model: &FactorModel) -> Vec<usize> {
    model.examples.columns().into_iter().map(argmax).collect()
}

/// `1 - cos(a, b)`; an all-zero side counts as orthogonal.
pub fn cosine_distance(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    let (saa, sbb) = (a.dot(&a), b.dot(&b));
    if saa == 0.0 || sbb == 0.0 {
        return 1.0;
    }
    let cos = (a.dot(&b) / (saa * sbb).sqrt()).clamp(-1.0, 1.0);
    (1.0 - cos).max(0.0)
}

/// The `k` examples closest to `query` in the latent space of F, by cosine
/// distance (ties to the lower index), with the distribution of their
/// strongest factors.
pub fn knn_latent(model: &FactorModel, query: usize, k: usize) -> Result<ConceptNeighborhood> {
    let f = &model.examples;
    let n = f.ncols();
    if query >= n {
        return Err(Error::IndexOutOfRange {
            what: "query example",
            index: query,
            limit: n,
        });
    }
    if k >= n {
        return Err(Error::InvalidConfig(format!(
            "k = {k} must be smaller than the number of examples ({n})"
        )));
    }
    let q = f.column(query);
    if q.iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateQuery { query });
    }
    let mut dists: Vec<(usize, f64)> = (0..n)
        .filter(|&j| j != query)
        .map(|j| (j, cosine_distance(q, f.column(j))))
        .collect();
    dists.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    dists.truncate(k);

    let mut concept_histogram = vec![0; model.rank()];
    for &(j, _) in &dists {
        concept_histogram[argmax(f.column(j))] += 1;
    }
    Ok(ConceptNeighborhood {
        query_example: query,
        neighbors: dists,
        concept_histogram,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor::FitConfig;
    use ndarray::{array, Array2};

    fn model(f: Array2<f64>) -> FactorModel {
        let d = f.nrows();
        FactorModel::from_factors(
            vec![],
            vec![Array2::ones((1, d))],
            f,
            FitConfig::with_rank(d),
        )
        .unwrap()
    }

    #[test]
    fn identity_neighbors() {
        let r = knn_latent(&model(Array2::eye(3)), 0, 2).unwrap();
        assert_eq!(r.neighbors, vec![(1, 1.0), (2, 1.0)]);
        assert_eq!(r.concept_histogram, vec![0, 1, 1]);
    }

    #[test]
    fn duplicate_column_at_zero_distance() {
        let mut f = Array2::from_shape_fn((3, 12), |(i, k)| ((i * 5 + k * 7) % 11) as f64 + 0.5);
        let c = f.column(5).to_owned();
        f.column_mut(9).assign(&c);
        let r = knn_latent(&model(f), 5, 1).unwrap();
        assert_eq!(r.neighbors, vec![(9, 0.0)]);
    }

    #[test]
    fn argmax_ties_to_lowest() {
        assert_eq!(argmax(array![1.0, 3.0, 3.0].view()), 1);
        assert_eq!(argmax(array![0.0, 0.0].view()), 0);
    }

    #[test]
    fn errors() {
        let m = model(array![[0.0, 1.0, 1.0], [0.0, 0.0, 1.0]]);
        assert!(matches!(
            knn_latent(&m, 0, 1),
            Err(Error::DegenerateQuery { query: 0 })
        ));
        assert!(matches!(knn_latent(&m, 1, 3), Err(Error::InvalidConfig(_))));
        assert!(matches!(
            knn_latent(&m, 3, 1),
            Err(Error::IndexOutOfRange { .. })
        ));
    }
}
