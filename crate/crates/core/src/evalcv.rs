//! Confusion metrics, k-fold cross-validation, and summary tables.

use std::collections::BTreeMap;
use std::fmt::Write;

use rayon::prelude::*;

use crate::dataset::{make_folds, Dataset, Example, Label};
use crate::error::DataError;
use crate::hypothesis::Hypothesis;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Metrics {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub accuracy: f64,
    pub f1: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl Metrics {
    pub fn from_counts(tp: usize, fp: usize, tn: usize, fn_: usize) -> Self {
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
        Self { tp, fp, tn, fn_, precision, recall, accuracy: ratio(tp + tn, tp + fp + tn + fn_), f1 }
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Tally predictions against labels.
pub fn confusion_metrics(hyp: &Hypothesis, test: &[&Example]) -> Metrics {
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for e in test {
        match (hyp.classify(e), e.label) {
            (Label::Positive, Label::Positive) => tp += 1,
            (Label::Positive, Label::Negative) => fp += 1,
            (Label::Negative, Label::Negative) => tn += 1,
            (Label::Negative, Label::Positive) => fn_ += 1,
        }
    }
    Metrics::from_counts(tp, fp, tn, fn_)
}

/// Unweighted means of per-fold scores.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MeanMetrics {
    pub precision: f64,
    pub recall: f64,
    pub accuracy: f64,
    pub f1: f64,
    pub rule_count: f64,
    pub literal_count: f64,
}

impl MeanMetrics {
    pub fn of<'a>(rows: impl IntoIterator<Item = (&'a Metrics, usize, usize)>) -> Self {
        let mut m = MeanMetrics::default();
        let mut n = 0usize;
        for (x, rules, literals) in rows {
            m.precision += x.precision;
            m.recall += x.recall;
            m.accuracy += x.accuracy;
            m.f1 += x.f1;
            m.rule_count += rules as f64;
            m.literal_count += literals as f64;
            n += 1;
        }
        if n > 0 {
            let n = n as f64;
            m.precision /= n;
            m.recall /= n;
            m.accuracy /= n;
            m.f1 /= n;
            m.rule_count /= n;
            m.literal_count /= n;
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldResult {
    pub fold: usize,
    pub metrics: Metrics,
    pub rule_count: usize,
    pub literal_count: usize,
    /// The training split had no positives; excluded from the means.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    pub folds: Vec<FoldResult>,
    pub mean: MeanMetrics,
}

impl CvReport {
    pub fn from_folds(folds: Vec<FoldResult>) -> Self {
        let mean = MeanMetrics::of(
            folds.iter().filter(|f| !f.degenerate).map(|f| (&f.metrics, f.rule_count, f.literal_count)),
        );
        Self { folds, mean }
    }

    pub fn degenerate_folds(&self) -> usize {
        self.folds.iter().filter(|f| f.degenerate).count()
    }
}

/// Train on every training split, score on its test split.
///
/// `learner` gets the fold index and the training positives and negatives.
pub fn cross_validate<L>(dataset: &Dataset, learner: L, k_folds: usize, seed: u64) -> Result<CvReport, DataError>
where
    L: Fn(usize, &[&Example], &[&Example]) -> Hypothesis + Sync,
{
    let split = make_folds(&dataset.labels(), k_folds, seed)?;
    let folds = split
        .folds
        .par_iter()
        .enumerate()
        .map(|(i, fold)| {
            let train = dataset.select(&fold.train);
            let test = dataset.select(&fold.test);
            let (pos, neg): (Vec<&Example>, Vec<&Example>) = train.into_iter().partition(|e| e.is_positive());
            if pos.is_empty() {
                return FoldResult { fold: i, metrics: Metrics::default(), rule_count: 0, literal_count: 0, degenerate: true };
            }
            let hyp = learner(i, &pos, &neg);
            FoldResult {
                fold: i,
                metrics: confusion_metrics(&hyp, &test),
                rule_count: hyp.rule_count(),
                literal_count: hyp.literal_count(),
                degenerate: false,
            }
        })
        .collect();
    Ok(CvReport::from_folds(folds))
}

/// Datasets by algorithms, each cell a mean over folds.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SummaryTable {
    pub datasets: Vec<String>,
    pub algorithms: Vec<String>,
    pub cells: BTreeMap<(String, String), MeanMetrics>,
}

impl SummaryTable {
    pub fn insert(&mut self, dataset: &str, algorithm: &str, cell: MeanMetrics) {
        if !self.datasets.iter().any(|d| d == dataset) {
            self.datasets.push(dataset.to_string());
        }
        if !self.algorithms.iter().any(|a| a == algorithm) {
            self.algorithms.push(algorithm.to_string());
        }
        self.cells.insert((dataset.to_string(), algorithm.to_string()), cell);
    }

    pub fn get(&self, dataset: &str, algorithm: &str) -> Option<&MeanMetrics> {
        self.cells.get(&(dataset.to_string(), algorithm.to_string()))
    }

    /// Mean F1 of one algorithm over the datasets it was run on.
    pub fn average_f1(&self, algorithm: &str) -> f64 {
        let scores: Vec<f64> =
            self.datasets.iter().filter_map(|d| self.get(d, algorithm)).map(|m| m.f1).collect();
        if scores.is_empty() {
            0.0
        } else {
            scores.iter().sum::<f64>() / scores.len() as f64
        }
    }

    /// Precision, recall, accuracy and F1 per algorithm, two decimals.
    pub fn quality_markdown(&self) -> String {
        let mut out = String::from("| dataset |");
        for a in &self.algorithms {
            let _ = write!(out, " {a} prec. | {a} recall | {a} acc. | {a} F1 |");
        }
        out.push_str("\n|---|");
        out.push_str(&"---|".repeat(4 * self.algorithms.len()));
        out.push('\n');
        for d in &self.datasets {
            let _ = write!(out, "| {d} |");
            for a in &self.algorithms {
                match self.get(d, a) {
                    Some(m) => {
                        let _ = write!(out, " {:.2} | {:.2} | {:.2} | {:.2} |", m.precision, m.recall, m.accuracy, m.f1);
                    }
                    None => out.push_str(" - | - | - | - |"),
                }
            }
            out.push('\n');
        }
        out
    }

    /// Mean rule counts per algorithm, one decimal.
    pub fn rule_count_markdown(&self) -> String {
        let mut out = String::from("| dataset |");
        for a in &self.algorithms {
            let _ = write!(out, " {a} |");
        }
        out.push_str("\n|---|");
        out.push_str(&"---|".repeat(self.algorithms.len()));
        out.push('\n');
        for d in &self.datasets {
            let _ = write!(out, "| {d} |");
            for a in &self.algorithms {
                match self.get(d, a) {
                    Some(m) => {
                        let _ = write!(out, " {:.1} |", m.rule_count);
                    }
                    None => out.push_str(" - |"),
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("dataset,algorithm,precision,recall,accuracy,f1,rule_count,literal_count\n");
        for d in &self.datasets {
            for a in &self.algorithms {
                if let Some(m) = self.get(d, a) {
                    let _ = writeln!(
                        out,
                        "{d},{a},{:.4},{:.4},{:.4},{:.4},{:.1},{:.1}",
                        m.precision, m.recall, m.accuracy, m.f1, m.rule_count, m.literal_count
                    );
                }
            }
        }
        out
    }
}
