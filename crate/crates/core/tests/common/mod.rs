#![allow(dead_code)]

use cnmf::interchange::{DatasetBundle, LabelTable};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform `[lo, hi)` entries.
pub fn uniform(rng: &mut ChaCha8Rng, rows: usize, cols: usize, lo: f64, hi: f64) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || lo + (hi - lo) * rng.random::<f64>())
}

pub struct Planted {
    pub bundle: DatasetBundle,
    pub pixel: Vec<Array2<f64>>,
    pub neuron: Vec<Array2<f64>>,
    pub examples: Array2<f64>,
}

/// `D_i = P* F*`, `A_j = O* F*` with strictly positive random factors.
/// Channels are square `side x side` images.
pub fn planted(
    seed: u64,
    rank: usize,
    channel_sides: &[usize],
    layer_sizes: &[usize],
    n: usize,
) -> Planted {
    let mut r = rng(seed);
    let examples = uniform(&mut r, rank, n, 0.1, 1.0);
    let pixel: Vec<Array2<f64>> = channel_sides
        .iter()
        .map(|&s| uniform(&mut r, s * s, rank, 0.1, 1.0))
        .collect();
    let neuron: Vec<Array2<f64>> = layer_sizes
        .iter()
        .map(|&s| uniform(&mut r, s, rank, 0.1, 1.0))
        .collect();
    // Scale pixel data into [0, 1].
    let channels = channel_sides
        .iter()
        .zip(&pixel)
        .map(|(&s, p)| (s, s, p.dot(&examples) / rank as f64))
        .collect();
    let pixel = pixel.into_iter().map(|p| p / rank as f64).collect();
    let layers = neuron.iter().map(|o| o.dot(&examples)).collect();
    Planted {
        bundle: DatasetBundle::from_arrays(channels, layers, None).unwrap(),
        pixel,
        neuron,
        examples,
    }
}

/// Random non-negative bundle of the given block sizes.
pub fn random_bundle(
    seed: u64,
    channel_sides: &[usize],
    layer_sizes: &[usize],
    n: usize,
) -> DatasetBundle {
    let mut r = rng(seed);
    let channels = channel_sides
        .iter()
        .map(|&s| (s, s, uniform(&mut r, s * s, n, 0.0, 1.0)))
        .collect();
    let layers = layer_sizes
        .iter()
        .map(|&s| uniform(&mut r, s, n, 0.0, 2.0))
        .collect();
    DatasetBundle::from_arrays(channels, layers, None).unwrap()
}

pub struct Clustered {
    pub bundle: DatasetBundle,
    /// Planted cluster of each example.
    pub cluster: Vec<usize>,
}

/// `clusters` groups of `per_cluster` examples whose planted F column is the
/// one-hot vector of its cluster plus `noise`-scaled uniform noise. Labels
/// are `class{c}`.
pub fn clustered(seed: u64, clusters: usize, per_cluster: usize, noise: f64) -> Clustered {
    let mut r = rng(seed);
    let n = clusters * per_cluster;
    let cluster: Vec<usize> = (0..n).map(|k| k % clusters).collect();
    let mut f = uniform(&mut r, clusters, n, 0.0, noise);
    for (k, &c) in cluster.iter().enumerate() {
        f[[c, k]] += 1.0;
    }
    let p: Vec<Array2<f64>> = (0..2)
        .map(|_| uniform(&mut r, 16, clusters, 0.0, 0.5))
        .collect();
    let o: Vec<Array2<f64>> = [20, 12]
        .iter()
        .map(|&s| uniform(&mut r, s, clusters, 0.0, 1.0))
        .collect();
    let channels = p.iter().map(|p| (4, 4, p.dot(&f))).collect();
    let layers = o.iter().map(|o| o.dot(&f)).collect();
    let labels = LabelTable::from_classes(cluster.iter().map(|c| format!("class{c}")));
    Clustered {
        bundle: DatasetBundle::from_arrays(channels, layers, Some(labels)).unwrap(),
        cluster,
    }
}

/// Best agreement between `assigned` and `truth` over all bijections of
/// `k` labels, by enumeration. Returns `(fraction, mapping)` where
/// `mapping[assigned] = truth`.
pub fn best_matching(assigned: &[usize], truth: &[usize], k: usize) -> (f64, Vec<usize>) {
    fn perms(k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in perms(k - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, k - 1);
                out.push(q);
            }
        }
        out
    }
    let mut best = (0.0, Vec::new());
    for p in perms(k) {
        let hit = assigned
            .iter()
            .zip(truth)
            .filter(|(a, t)| p[**a] == **t)
            .count();
        let frac = hit as f64 / truth.len() as f64;
        if frac > best.0 {
            best = (frac, p);
        }
    }
    best
}

/// Cyclic Jacobi eigenvalue iteration for symmetric matrices. Independent of
/// the library's eigensolver; returns eigenvalues in descending order.
pub fn jacobi_eigenvalues(m: &Array2<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut a = m.clone();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[[i, j]] * a[[i, j]])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[[p, q]].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (2.0 * a[[p, q]]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = c * akp - s * akq;
                    a[[k, q]] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[[p, k]];
                    let aqk = a[[q, k]];
                    a[[p, k]] = c * apk - s * aqk;
                    a[[q, k]] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut v: Vec<f64> = (0..n).map(|i| a[[i, i]]).collect();
    v.sort_by(|x, y| y.total_cmp(x));
    v
}

/// Brute-force cosine: explicit loops, no shared code with the library.
pub fn brute_cosine(a: &[f64], b: &[f64]) -> f64 {
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for i in 0..a.len() {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    dot / (na.sqrt() * nb.sqrt())
}

pub fn max_rel_change(before: &Array2<f64>, after: &Array2<f64>) -> f64 {
    let diff = before
        .iter()
        .zip(after.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let scale = before.iter().map(|v| v.abs()).fold(0.0, f64::max);
    diff / scale
}
