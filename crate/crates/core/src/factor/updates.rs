//! Multiplicative update rules for the coupled model.
//!
//! Every rule has the form `X <- X * numer / (denom + epsilon)` with
//! element-wise product and quotient. Numerators and denominators are built
//! from non-negative quantities only, so non-negative factors stay
//! non-negative and zero entries stay zero.

use ndarray::{Array2, Zip};

use super::model::{Block, FactorModel, ZeroColumn};
use crate::error::{Error, Result};
use crate::interchange::DatasetBundle;

fn multiplicative(
    base: &Array2<f64>,
    numer: &Array2<f64>,
    denom: &Array2<f64>,
    eps: f64,
) -> Array2<f64> {
    let mut out = base.clone();
    Zip::from(&mut out)
        .and(numer)
        .and(denom)
        .for_each(|x, &n, &d| *x *= n / (d + eps));
    out
}

/// `(sum_i P_i^T D_i + sum_j O_j^T A_j, sum_i P_i^T P_i + sum_j O_j^T O_j)`.
fn examples_terms(
    bundle: &DatasetBundle,
    model: &FactorModel,
) -> Result<(Array2<f64>, Array2<f64>)> {
    model.check_compatible(bundle)?;
    let d = model.rank();
    let mut numer = Array2::<f64>::zeros((d, bundle.num_examples()));
    let mut gram = Array2::<f64>::zeros((d, d));
    for (c, p) in bundle.channels().iter().zip(&model.pixel) {
        numer += &p.t().dot(&c.data);
        gram += &p.t().dot(p);
    }
    for (l, o) in bundle.layers().iter().zip(&model.neuron) {
        numer += &o.t().dot(&l.data);
        gram += &o.t().dot(o);
    }
    Ok((numer, gram))
}

/// New F under the squared Frobenius penalty `lambda_f ||F||^2`.
pub fn update_f(bundle: &DatasetBundle, model: &FactorModel) -> Result<Array2<f64>> {
    let (numer, gram) = examples_terms(bundle, model)?;
    let f = &model.examples;
    let mut denom = gram.dot(f);
    denom.scaled_add(model.config.lambda_f, f);
    Ok(multiplicative(f, &numer, &denom, model.config.epsilon))
}

/// New F under the row-group penalty `lambda_f sum_k ||F[k,:]||_2`.
///
/// The penalty's subgradient `F[k,:] / max(||F[k,:]||, epsilon)` takes the
/// place of `F` in the denominator.
pub fn update_f_group_sparse(bundle: &DatasetBundle, model: &FactorModel) -> Result<Array2<f64>> {
    if !bundle.is_activations_only() {
        return Err(Error::ModeViolation(format!(
            "group-sparse F update requires an activations-only bundle, found {} pixel channels",
            bundle.channels().len()
        )));
    }
    let (numer, gram) = examples_terms(bundle, model)?;
    let f = &model.examples;
    let eps = model.config.epsilon;
    let mut denom = gram.dot(f);
    for (mut drow, frow) in denom.rows_mut().into_iter().zip(f.rows()) {
        let norm = frow.dot(&frow).sqrt().max(eps);
        drow.scaled_add(model.config.lambda_f / norm, &frow);
    }
    Ok(multiplicative(f, &numer, &denom, eps))
}

fn update_block(
    data: &Array2<f64>,
    factor: &Array2<f64>,
    examples: &Array2<f64>,
    lambda: f64,
    eps: f64,
) -> Array2<f64> {
    let numer = data.dot(&examples.t());
    let gram = examples.dot(&examples.t());
    let mut denom = factor.dot(&gram);
    denom.scaled_add(lambda, factor);
    multiplicative(factor, &numer, &denom, eps)
}

/// New P_i: `P_i * (D_i F^T) / (P_i F F^T + lambda_p P_i)`.
pub fn update_p(
    bundle: &DatasetBundle,
    model: &FactorModel,
    channel: usize,
) -> Result<Array2<f64>> {
    model.check_compatible(bundle)?;
    let c = bundle
        .channels()
        .get(channel)
        .ok_or(Error::IndexOutOfRange {
            what: "channel",
            index: channel,
            limit: bundle.channels().len(),
        })?;
    Ok(update_block(
        &c.data,
        &model.pixel[channel],
        &model.examples,
        model.config.effective_lambda_p(),
        model.config.epsilon,
    ))
}

/// New O_j: `O_j * (A_j F^T) / (O_j F F^T + lambda_o O_j)`.
pub fn update_o(bundle: &DatasetBundle, model: &FactorModel, layer: usize) -> Result<Array2<f64>> {
    model.check_compatible(bundle)?;
    let l = bundle.layers().get(layer).ok_or(Error::IndexOutOfRange {
        what: "layer",
        index: layer,
        limit: bundle.layers().len(),
    })?;
    Ok(update_block(
        &l.data,
        &model.neuron[layer],
        &model.examples,
        model.config.effective_lambda_o(),
        model.config.epsilon,
    ))
}

/// Scales every non-zero column of `m` to unit L2 norm; returns the indices
/// of all-zero columns, which are left as they are.
pub fn normalize_matrix_columns(m: &mut Array2<f64>) -> Vec<usize> {
    let mut zero = Vec::new();
    for (k, mut col) in m.columns_mut().into_iter().enumerate() {
        let norm = col.dot(&col).sqrt();
        if norm > 0.0 {
            col.mapv_inplace(|v| v / norm);
        } else {
            zero.push(k);
        }
    }
    zero
}

/// Projects every column of every P_i and O_j onto the unit sphere. F is not
/// rescaled. Returns the all-zero columns that could not be projected.
pub fn normalize_columns(model: &mut FactorModel) -> Vec<ZeroColumn> {
    let mut zero = Vec::new();
    for (i, p) in model.pixel.iter_mut().enumerate() {
        zero.extend(
            normalize_matrix_columns(p)
                .into_iter()
                .map(|column| ZeroColumn {
                    block: Block::Pixel(i),
                    column,
                }),
        );
    }
    for (j, o) in model.neuron.iter_mut().enumerate() {
        zero.extend(
            normalize_matrix_columns(o)
                .into_iter()
                .map(|column| ZeroColumn {
                    block: Block::Neuron(j),
                    column,
                }),
        );
    }
    zero
}
