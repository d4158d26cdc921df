use super::config::{FitConfig, NormMode};
use super::model::{init_factors, FactorModel};
use super::objective::objective;
use super::updates::{normalize_columns, update_f, update_f_group_sparse, update_o, update_p};
use crate::error::{Error, Result};
use crate::interchange::DatasetBundle;

/// One full sweep: F, then every P_i, then every O_j, then the unit-column
/// projection when enabled.
pub fn sweep(bundle: &DatasetBundle, model: &mut FactorModel) -> Result<()> {
    model.examples = if model.config.group_sparse_f {
        update_f_group_sparse(bundle, model)?
    } else {
        update_f(bundle, model)?
    };
    for i in 0..model.pixel.len() {
        model.pixel[i] = update_p(bundle, model, i)?;
    }
    for j in 0..model.neuron.len() {
        model.neuron[j] = update_o(bundle, model, j)?;
    }
    if model.config.norm_mode == NormMode::UnitColumns {
        model.diagnostics.zero_columns = normalize_columns(model);
    }
    Ok(())
}

/// Runs sweeps until the objective change relative to the initial objective
/// drops below `tol`, or `max_iters` sweeps have run.
pub fn fit(bundle: &DatasetBundle, config: &FitConfig) -> Result<FactorModel> {
    let model = init_factors(bundle, config)?;
    fit_from(bundle, model)
}

/// Like [`fit`] but starts from the given factors.
pub fn fit_from(bundle: &DatasetBundle, mut model: FactorModel) -> Result<FactorModel> {
    model.config.validate_for(bundle)?;
    model.check_compatible(bundle)?;
    let (tol, eps, max_iters) = (
        model.config.tol,
        model.config.epsilon,
        model.config.max_iters,
    );

    let j0 = objective(bundle, &model)?;
    if !j0.is_finite() {
        return Err(Error::NonFinite {
            factor: "objective".into(),
            sweep: 0,
        });
    }
    model.objective_trace = vec![j0];
    model.iters_run = 0;
    model.converged = false;
    let scale = j0.max(eps);

    let mut prev = j0;
    for t in 1..=max_iters {
        sweep(bundle, &mut model)?;
        if let Some(factor) = model.find_non_finite() {
            return Err(Error::NonFinite { factor, sweep: t });
        }
        let j = objective(bundle, &model)?;
        if !j.is_finite() {
            return Err(Error::NonFinite {
                factor: "objective".into(),
                sweep: t,
            });
        }
        model.objective_trace.push(j);
        model.iters_run = t;
        if (prev - j).abs() / scale < tol {
            model.converged = true;
            break;
        }
        prev = j;
    }
    Ok(model)
}
