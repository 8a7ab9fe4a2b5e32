use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

/// Instances of a dataset and how many of them co-occur with at least one path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coverage {
    pub instances: usize,
    pub with_paths: usize,
}

impl Coverage {
    pub fn proportion(&self) -> f64 {
        if self.instances == 0 {
            0.0
        } else {
            self.with_paths as f64 / self.instances as f64
        }
    }
}

/// `instances / with_paths / proportion%`, the proportion to one decimal.
impl fmt::Display for Coverage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} / {} / {:.1}%",
            self.instances,
            self.with_paths,
            100.0 * self.proportion()
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub classes: Vec<ClassScores>,
    pub weighted_f1: f64,
    pub accuracy: f64,
    pub instances: usize,
    pub coverage: Option<Coverage>,
}

impl EvalReport {
    /// Tab-separated per-class table followed by the summary lines.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("label\tprecision\trecall\tf1\tsupport\n");
        for c in &self.classes {
            out.push_str(&format!(
                "{}\t{:.6}\t{:.6}\t{:.6}\t{}\n",
                c.label, c.precision, c.recall, c.f1, c.support
            ));
        }
        out.push_str(&format!("weighted_f1\t{:.6}\n", self.weighted_f1));
        out.push_str(&format!("accuracy\t{:.6}\n", self.accuracy));
        if let Some(cov) = &self.coverage {
            out.push_str(&format!("coverage\t{cov}\n"));
        }
        out
    }
}

/// Index of the largest value; the lowest index wins ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Per-class precision, recall and F1, averaged with weights proportional
/// to gold support. Every label participates; undefined ratios are 0.
pub fn weighted_f1(gold: &[usize], pred: &[usize], labels: &[String]) -> Result<EvalReport> {
    if gold.len() != pred.len() {
        return Err(Error::InvalidArgument(format!(
            "{} gold labels but {} predictions",
            gold.len(),
            pred.len()
        )));
    }
    if gold.is_empty() {
        return Err(Error::InvalidArgument("no instances to score".into()));
    }
    let n = labels.len();
    if let Some(&bad) = gold.iter().chain(pred).find(|&&c| c >= n) {
        return Err(Error::InvalidArgument(format!(
            "class index {bad} outside {n} labels"
        )));
    }
    let mut tp = vec![0usize; n];
    let mut predicted = vec![0usize; n];
    let mut support = vec![0usize; n];
    for (&g, &p) in gold.iter().zip(pred) {
        support[g] += 1;
        predicted[p] += 1;
        if g == p {
            tp[g] += 1;
        }
    }
    let classes: Vec<ClassScores> = (0..n)
        .map(|c| {
            let precision = ratio(tp[c], predicted[c]);
            let recall = ratio(tp[c], support[c]);
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            ClassScores {
                label: labels[c].clone(),
                precision,
                recall,
                f1,
                support: support[c],
            }
        })
        .collect();
    let total = gold.len() as f64;
    let weighted = classes
        .iter()
        .map(|c| c.f1 * c.support as f64)
        .sum::<f64>()
        / total;
    Ok(EvalReport {
        classes,
        weighted_f1: weighted,
        accuracy: tp.iter().sum::<usize>() as f64 / total,
        instances: gold.len(),
        coverage: None,
    })
}
