use ndarray::Array2;

use super::model::FactorModel;
use crate::error::Result;
use crate::interchange::DatasetBundle;

fn frob2(m: &Array2<f64>) -> f64 {
    m.iter().map(|v| v * v).sum()
}

fn residual2(data: &Array2<f64>, factor: &Array2<f64>, examples: &Array2<f64>) -> f64 {
    let mut approx = factor.dot(examples);
    approx.zip_mut_with(data, |a, &d| *a = d - *a);
    frob2(&approx)
}

/// Per-term breakdown of the coupled objective.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ObjectiveTerms {
    pub pixel_residual: f64,
    pub neuron_residual: f64,
    pub pixel_penalty: f64,
    pub neuron_penalty: f64,
    pub examples_penalty: f64,
}

impl ObjectiveTerms {
    pub fn residual(&self) -> f64 {
        self.pixel_residual + self.neuron_residual
    }

    pub fn total(&self) -> f64 {
        self.residual() + self.pixel_penalty + self.neuron_penalty + self.examples_penalty
    }
}

pub fn objective_terms(bundle: &DatasetBundle, model: &FactorModel) -> Result<ObjectiveTerms> {
    model.check_compatible(bundle)?;
    let cfg = &model.config;
    let f = &model.examples;
    let pixel_residual = bundle
        .channels()
        .iter()
        .zip(&model.pixel)
        .map(|(c, p)| residual2(&c.data, p, f))
        .sum();
    let neuron_residual = bundle
        .layers()
        .iter()
        .zip(&model.neuron)
        .map(|(l, o)| residual2(&l.data, o, f))
        .sum();
    let pixel_penalty = cfg.effective_lambda_p() * model.pixel.iter().map(frob2).sum::<f64>();
    let neuron_penalty = cfg.effective_lambda_o() * model.neuron.iter().map(frob2).sum::<f64>();
    let examples_penalty = if cfg.group_sparse_f {
        cfg.lambda_f * f.rows().into_iter().map(|r| r.dot(&r).sqrt()).sum::<f64>()
    } else {
        cfg.lambda_f * frob2(f)
    };
    Ok(ObjectiveTerms {
        pixel_residual,
        neuron_residual,
        pixel_penalty,
        neuron_penalty,
        examples_penalty,
    })
}

/// Coupled objective: reconstruction error of every pixel and activation
/// block plus the configured penalties.
pub fn objective(bundle: &DatasetBundle, model: &FactorModel) -> Result<f64> {
    objective_terms(bundle, model).map(|t| t.total())
}

/// Reconstruction error relative to the total data energy.
pub fn relative_residual(bundle: &DatasetBundle, model: &FactorModel) -> Result<f64> {
    let terms = objective_terms(bundle, model)?;
    let energy: f64 = bundle
        .channels()
        .iter()
        .map(|c| frob2(&c.data))
        .chain(bundle.layers().iter().map(|l| frob2(&l.data)))
        .sum();
    Ok(if energy > 0.0 {
        terms.residual() / energy
    } else {
        terms.residual()
    })
}
