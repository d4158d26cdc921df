use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::factor::FactorModel;
use crate::interchange::LabelTable;

/// Class, superclass and example rankings along one latent factor.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorReport {
    pub factor_index: usize,
    pub class_scores: Vec<(String, f64)>,
    pub top_examples: Vec<(usize, f64)>,
    pub top_superclass: Vec<(String, f64)>,
}

fn by_score_then_label(a: &(String, f64), b: &(String, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0))
}

// Sorting before summing makes each score independent of example order.
fn ranked_sums(groups: BTreeMap<&str, Vec<f64>>) -> Vec<(String, f64)> {
    let mut out: Vec<(String, f64)> = groups
        .into_iter()
        .map(|(label, mut vals)| {
            vals.sort_by(f64::total_cmp);
            (label.to_string(), vals.iter().sum())
        })
        .collect();
    out.sort_by(by_score_then_label);
    out
}

fn check_factor(model: &FactorModel, factor: usize) -> Result<()> {
    if factor >= model.rank() {
        return Err(Error::IndexOutOfRange {
            what: "factor",
            index: factor,
            limit: model.rank(),
        });
    }
    Ok(())
}

/// Examples ranked by their weight on `factor`, descending; ties go to the
/// lower example index.
pub fn top_examples(model: &FactorModel, factor: usize, top_m: usize) -> Result<Vec<(usize, f64)>> {
    check_factor(model, factor)?;
    let mut ranked: Vec<(usize, f64)> = model
        .examples
        .row(factor)
        .iter()
        .copied()
        .enumerate()
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked.truncate(top_m);
    Ok(ranked)
}

/// Sums `F[factor, k]` over the examples of each class (and superclass) and
/// ranks them. Examples without a superclass are left out of
/// `top_superclass`.
pub fn factor_report(
    model: &FactorModel,
    labels: Option<&LabelTable>,
    factor: usize,
    top_m_classes: usize,
    top_m_examples: usize,
) -> Result<FactorReport> {
    let labels = labels.ok_or(Error::LabelsRequired)?;
    check_factor(model, factor)?;
    if labels.len() != model.num_examples() {
        return Err(Error::shape(
            "labels",
            format!("{} rows", model.num_examples()),
            format!("{} rows", labels.len()),
        ));
    }
    let row = model.examples.row(factor);
    let mut classes: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    let mut supers: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for (k, &w) in row.iter().enumerate() {
        classes.entry(labels.class(k)).or_default().push(w);
        if let Some(s) = labels.superclass(k) {
            supers.entry(s).or_default().push(w);
        }
    }
    let mut class_scores = ranked_sums(classes);
    class_scores.truncate(top_m_classes);
    let mut top_superclass = ranked_sums(supers);
    top_superclass.truncate(top_m_classes);
    Ok(FactorReport {
        factor_index: factor,
        class_scores,
        top_examples: top_examples(model, factor, top_m_examples)?,
        top_superclass,
    })
}
