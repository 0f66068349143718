use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, DatasetError};
use crate::translator::AlignmentTable;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl EvalReport {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> EvalReport {
        let ratio = |num: usize, den: usize| if den == 0 { 1.0 } else { num as f64 / den as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
        EvalReport { true_positives: tp, false_positives: fp, false_negatives: fn_, precision, recall, f1 }
    }
}

/// Scores predictions row by row against a gold standard.
///
/// Row i of `testbed` holds the (possibly perturbed) label of gold row i in
/// column `label_attr`; predictions are looked up by that exact string. A
/// gold row is a true positive when the predicted IRI set contains the gold
/// IRI, a false positive when it does not, and a false negative when there
/// is no prediction. Rows in `exclude` are ignored.
pub fn score(
    predicted: &AlignmentTable,
    testbed: &Dataset,
    gold: &Dataset,
    label_attr: &str,
    iri_attr: &str,
    exclude: &BTreeSet<usize>,
) -> Result<EvalReport, DatasetError> {
    let mut by_input: HashMap<&str, Vec<&str>> = HashMap::new();
    for (a, b) in &predicted.rows {
        by_input.entry(a.as_str()).or_default().push(b.as_str());
    }
    let labels: Vec<&str> = testbed.values(label_attr)?.collect();
    let iris: Vec<&str> = gold.values(iri_attr)?.collect();
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for (i, gold_iri) in iris.iter().enumerate() {
        if exclude.contains(&i) {
            continue;
        }
        match labels.get(i).and_then(|l| by_input.get(l)) {
            None => fn_ += 1,
            Some(found) if found.contains(gold_iri) => tp += 1,
            Some(_) => fp += 1,
        }
    }
    Ok(EvalReport::from_counts(tp, fp, fn_))
}
