//! Kmeans-FOLD: cluster the positives, learn each cluster against all
//! negatives with the other clusters demoted, merge, prune. Also the
//! cross-validated sweep over cluster counts.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write;
use std::ops::RangeInclusive;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;

use crate::clustering::{kmeans_cluster, ClusterModel, DEFAULT_MAX_ITERS};
use crate::dataset::{encode_mixed, make_folds, normalize_for_clustering, Dataset, Example, FeatureSchema};
use crate::error::{ClusterError, DataError};
use crate::evalcv::{confusion_metrics, FoldResult, MeanMetrics, Metrics};
use crate::fold::{d_fold, fold, prune_hypothesis, InductionConfig};
use crate::hypothesis::Hypothesis;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Fold,
    FoldR,
    KmeansFold,
    KmeansFoldR,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Fold, Algorithm::FoldR, Algorithm::KmeansFold, Algorithm::KmeansFoldR];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Fold => "fold",
            Algorithm::FoldR => "foldr",
            Algorithm::KmeansFold => "kmeans-fold",
            Algorithm::KmeansFoldR => "kmeans-foldr",
        }
    }

    pub fn numeric_mode(self) -> bool {
        matches!(self, Algorithm::FoldR | Algorithm::KmeansFoldR)
    }

    pub fn uses_clustering(self) -> bool {
        matches!(self, Algorithm::KmeansFold | Algorithm::KmeansFoldR)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown algorithm `{s}`"))
    }
}

/// Cluster positives on the one-hot plus min-max scaled numeric matrix,
/// fit on these examples only.
pub fn cluster_positives(
    schema: &FeatureSchema,
    positives: &[&Example],
    k: usize,
    seed: u64,
) -> Result<ClusterModel, ClusterError> {
    let matrix = normalize_for_clustering(&encode_mixed(schema, positives));
    kmeans_cluster(&matrix.rows, k, seed, DEFAULT_MAX_ITERS)
}

/// Learn one theory per cluster of `pos` and merge them. `k` is capped at
/// the number of positives; `cfg.seed` drives the clustering.
pub fn kmeans_fold(
    schema: Arc<FeatureSchema>,
    pos: &[&Example],
    neg: &[&Example],
    k: usize,
    f: f64,
    cfg: &InductionConfig,
) -> Hypothesis {
    if pos.is_empty() {
        return fold(schema, pos, neg, &Default::default(), cfg);
    }
    let k = k.clamp(1, pos.len());
    let model = cluster_positives(&schema, pos, k, cfg.seed).expect("k and points checked above");
    let mut merged = Hypothesis::empty(schema.clone());
    for c in 0..k {
        let mut inside = Vec::new();
        let mut outside = Vec::new();
        for (&e, &a) in pos.iter().zip(&model.assignment) {
            if a == c {
                inside.push(e);
            } else {
                outside.push(e);
            }
        }
        if inside.is_empty() {
            continue;
        }
        merged.absorb(d_fold(schema.clone(), &inside, neg, f, &outside, &[], cfg));
    }
    prune_hypothesis(&merged, pos, neg)
}

/// Train one algorithm. `k` is ignored by the non-clustering algorithms.
pub fn learn(
    algorithm: Algorithm,
    schema: Arc<FeatureSchema>,
    pos: &[&Example],
    neg: &[&Example],
    k: usize,
    cfg: &InductionConfig,
) -> Hypothesis {
    let cfg = InductionConfig { numeric_mode: algorithm.numeric_mode(), ..cfg.clone() };
    if algorithm.uses_clustering() {
        kmeans_fold(schema, pos, neg, k, cfg.f, &cfg)
    } else {
        fold(schema, pos, neg, &Default::default(), &cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    F1,
    /// Fewest rules among configurations within 0.01 of the best accuracy.
    RuleCountAtMatchedAccuracy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub k_range: RangeInclusive<usize>,
    pub repeats: usize,
    pub f: f64,
    pub folds: usize,
    pub seed: u64,
    pub selection: Selection,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { k_range: 1..=10, repeats: 2, f: 0.5, folds: 5, seed: 0, selection: Selection::F1 }
    }
}

/// One line of a sweep report. `k` is `None` for algorithms without
/// clustering, `fold` is `None` for the mean over folds.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub k: Option<usize>,
    pub repeat: usize,
    pub fold: Option<usize>,
    pub precision: f64,
    pub recall: f64,
    pub accuracy: f64,
    pub f1: f64,
    pub rule_count: f64,
    pub literal_count: f64,
}

impl ReportRow {
    fn of_mean(k: Option<usize>, repeat: usize, m: &MeanMetrics) -> Self {
        Self {
            k,
            repeat,
            fold: None,
            precision: m.precision,
            recall: m.recall,
            accuracy: m.accuracy,
            f1: m.f1,
            rule_count: m.rule_count,
            literal_count: m.literal_count,
        }
    }

    fn of_fold(k: Option<usize>, repeat: usize, r: &FoldResult) -> Self {
        let m: &Metrics = &r.metrics;
        Self {
            k,
            repeat,
            fold: Some(r.fold),
            precision: m.precision,
            recall: m.recall,
            accuracy: m.accuracy,
            f1: m.f1,
            rule_count: r.rule_count as f64,
            literal_count: r.literal_count as f64,
        }
    }

    pub fn mean(&self) -> MeanMetrics {
        MeanMetrics {
            precision: self.precision,
            recall: self.recall,
            accuracy: self.accuracy,
            f1: self.f1,
            rule_count: self.rule_count,
            literal_count: self.literal_count,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub dataset: String,
    pub algorithm: Algorithm,
    pub f: f64,
    /// One row per (k, repeat), in k then repeat order.
    pub rows: Vec<ReportRow>,
    /// Per-fold rows for the same configurations.
    pub fold_rows: Vec<ReportRow>,
    /// Index into `rows` of the selected configuration.
    pub best: usize,
    pub degenerate_folds: usize,
}

impl SweepReport {
    pub fn best_row(&self) -> &ReportRow {
        &self.rows[self.best]
    }

    pub const CSV_HEADER: &'static str =
        "dataset,algorithm,k,f,repeat,fold,precision,recall,accuracy,f1,rule_count,literal_count";

    /// Header plus the configuration means, and the per-fold rows if asked.
    pub fn to_csv(&self, with_folds: bool) -> String {
        let mut out = format!("{}\n", Self::CSV_HEADER);
        let folds: &[ReportRow] = if with_folds { &self.fold_rows } else { &[] };
        for row in self.rows.iter().chain(folds) {
            let k = row.k.map_or("-".to_string(), |k| k.to_string());
            let fold = row.fold.map_or("mean".to_string(), |f| f.to_string());
            let _ = writeln!(
                out,
                "{},{},{k},{},{},{fold},{:.4},{:.4},{:.4},{:.4},{:.1},{:.1}",
                self.dataset,
                self.algorithm,
                self.f,
                row.repeat,
                row.precision,
                row.recall,
                row.accuracy,
                row.f1,
                row.rule_count,
                row.literal_count
            );
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    /// The selected configuration retrained on the whole dataset.
    pub hypothesis: Hypothesis,
    pub report: SweepReport,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Clustering seed of one sweep configuration.
pub fn config_seed(seed: u64, k: usize, repeat: usize) -> u64 {
    splitmix(splitmix(seed ^ (k as u64) << 32) ^ repeat as u64)
}

fn better(selection: Selection, a: &ReportRow, b: &ReportRow, best_accuracy: f64) -> bool {
    let k = |r: &ReportRow| (r.k.unwrap_or(0), r.repeat);
    match selection {
        Selection::F1 => {
            if a.f1 != b.f1 {
                return a.f1 > b.f1;
            }
            if a.rule_count != b.rule_count {
                return a.rule_count < b.rule_count;
            }
            k(a) < k(b)
        }
        Selection::RuleCountAtMatchedAccuracy => {
            let ok = |r: &ReportRow| r.accuracy >= best_accuracy - 0.01;
            if ok(a) != ok(b) {
                return ok(a);
            }
            if a.rule_count != b.rule_count {
                return a.rule_count < b.rule_count;
            }
            if a.f1 != b.f1 {
                return a.f1 > b.f1;
            }
            k(a) < k(b)
        }
    }
}

/// Index of the preferred row under `selection`.
pub fn select_best(rows: &[ReportRow], selection: Selection) -> Option<usize> {
    let best_accuracy = rows.iter().map(|r| r.accuracy).fold(f64::NEG_INFINITY, f64::max);
    let mut best: Option<usize> = None;
    for (i, row) in rows.iter().enumerate() {
        if best.is_none_or(|b| better(selection, row, &rows[b], best_accuracy)) {
            best = Some(i);
        }
    }
    best
}

/// Cross-validate every (k, repeat) configuration on one shared fold split,
/// pick the best by `sweep.selection`, and retrain it on all the data.
/// Algorithms without clustering have a single configuration.
pub fn sweep_select(
    dataset: &Dataset,
    dataset_name: &str,
    algorithm: Algorithm,
    sweep: &SweepConfig,
    cfg: &InductionConfig,
) -> Result<SweepOutcome, DataError> {
    let (npos, nneg) = (dataset.positives().len(), dataset.negatives().len());
    if npos == 0 || nneg == 0 {
        return Err(DataError::Degenerate { positives: npos, negatives: nneg });
    }
    let split = make_folds(&dataset.labels(), sweep.folds, sweep.seed)?;
    let configs: Vec<(Option<usize>, usize)> = if algorithm.uses_clustering() {
        sweep.k_range.clone().flat_map(|k| (0..sweep.repeats.max(1)).map(move |r| (Some(k), r))).collect()
    } else {
        vec![(None, 0)]
    };
    let cfg = InductionConfig { f: sweep.f, ..cfg.clone() };
    let train = |k: Option<usize>, repeat: usize, pos: &[&Example], neg: &[&Example]| {
        let seed = config_seed(sweep.seed, k.unwrap_or(0), repeat);
        let cfg = InductionConfig { seed, ..cfg.clone() };
        learn(algorithm, dataset.schema.clone(), pos, neg, k.unwrap_or(1), &cfg)
    };

    let cells: Vec<(usize, usize)> =
        (0..configs.len()).flat_map(|c| (0..split.folds.len()).map(move |f| (c, f))).collect();
    let results: BTreeMap<(usize, usize), FoldResult> = cells
        .par_iter()
        .map(|&(c, fi)| {
            let (k, repeat) = configs[c];
            let fold = &split.folds[fi];
            let (pos, neg): (Vec<&Example>, Vec<&Example>) =
                dataset.select(&fold.train).into_iter().partition(|e| e.is_positive());
            let result = if pos.is_empty() {
                FoldResult { fold: fi, metrics: Metrics::default(), rule_count: 0, literal_count: 0, degenerate: true }
            } else {
                let hyp = train(k, repeat, &pos, &neg);
                FoldResult {
                    fold: fi,
                    metrics: confusion_metrics(&hyp, &dataset.select(&fold.test)),
                    rule_count: hyp.rule_count(),
                    literal_count: hyp.literal_count(),
                    degenerate: false,
                }
            };
            ((c, fi), result)
        })
        .collect();

    let mut rows = Vec::new();
    let mut fold_rows = Vec::new();
    let mut degenerate_folds = 0;
    for (c, &(k, repeat)) in configs.iter().enumerate() {
        let folds: Vec<&FoldResult> = results.range((c, 0)..(c + 1, 0)).map(|(_, r)| r).collect();
        degenerate_folds += folds.iter().filter(|r| r.degenerate).count();
        let mean = MeanMetrics::of(
            folds.iter().filter(|r| !r.degenerate).map(|r| (&r.metrics, r.rule_count, r.literal_count)),
        );
        rows.push(ReportRow::of_mean(k, repeat, &mean));
        fold_rows.extend(folds.iter().map(|r| ReportRow::of_fold(k, repeat, r)));
    }
    let best = select_best(&rows, sweep.selection).expect("at least one configuration");
    let (k, repeat) = configs[best];
    let hypothesis = train(k, repeat, &dataset.positives(), &dataset.negatives());
    let report = SweepReport {
        dataset: dataset_name.to_string(),
        algorithm,
        f: sweep.f,
        rows,
        fold_rows,
        best,
        degenerate_folds,
    };
    Ok(SweepOutcome { hypothesis, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Feature, Label, Value};
    use crate::hypothesis::tests::{penguin_examples, penguin_schema};
    use crate::hypothesis::{render_asp, Literal};

    fn split(ex: &[Example]) -> (Vec<&Example>, Vec<&Example>) {
        ex.iter().partition(|e| e.is_positive())
    }

    /// Cluster A sits at high x0, cluster B at high x1; negatives are low on both.
    fn planted() -> (Arc<FeatureSchema>, Vec<Example>) {
        let schema = Arc::new(
            FeatureSchema::new(vec![Feature::numeric("x0"), Feature::numeric("x1")], "y", "p").unwrap(),
        );
        let mut ex = Vec::new();
        for i in 0..6 {
            let jitter = i as f64 * 0.1;
            ex.push(Example::new(format!("a{i}"), vec![Value::Number(9.0 + jitter), Value::Number(1.0 + jitter)], Label::Positive));
            ex.push(Example::new(format!("b{i}"), vec![Value::Number(1.0 + jitter), Value::Number(9.0 + jitter)], Label::Positive));
            ex.push(Example::new(format!("n{i}"), vec![Value::Number(1.0 + jitter), Value::Number(1.2 + jitter)], Label::Negative));
        }
        (schema, ex)
    }

    #[test]
    fn names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("aleph".parse::<Algorithm>().is_err());
    }

    #[test]
    fn single_cluster_without_demotion_is_fold() {
        let ex = penguin_examples();
        let (pos, neg) = split(&ex);
        let cfg = InductionConfig::default();
        let plain = fold(penguin_schema(), &pos, &neg, &Default::default(), &cfg);
        let clustered = kmeans_fold(penguin_schema(), &pos, &neg, 1, 0.0, &cfg);
        assert_eq!(clustered, plain);
        assert_eq!(render_asp(&clustered), "fly(X) :- bird(X), not ab0(X).\nab0(X) :- penguin(X).\n");
    }

    #[test]
    fn planted_clusters_get_one_rule_each() {
        let (schema, ex) = planted();
        let (pos, neg) = split(&ex);
        let cfg = InductionConfig { numeric_mode: true, ..InductionConfig::default() };
        let h = kmeans_fold(schema, &pos, &neg, 2, 0.5, &cfg);
        assert_eq!(h.target_rules.len(), 2, "{}", render_asp(&h));
        let features: Vec<Option<usize>> = h.target_rules.iter().map(|r| r.body[0].feature()).collect();
        assert!(features.contains(&Some(0)) && features.contains(&Some(1)));
        for r in &h.target_rules {
            assert_eq!(r.body.len(), 1);
            assert!(matches!(r.body[0], Literal::NumericGt { .. }));
        }
    }

    #[test]
    fn k_is_capped_by_positive_count() {
        let ex = penguin_examples();
        let (pos, neg) = split(&ex);
        let h = kmeans_fold(penguin_schema(), &pos, &neg, 50, 0.5, &InductionConfig::default());
        assert!(pos.iter().all(|e| h.covers(e)));
        assert!(neg.iter().all(|e| !h.covers(e)));
    }

    #[test]
    fn merged_indices_are_unique() {
        let (schema, ex) = planted();
        let (pos, neg) = split(&ex);
        for k in 1..=4 {
            let h = kmeans_fold(schema.clone(), &pos, &neg, k, 0.5, &InductionConfig::default());
            assert!(h.validate().is_ok());
        }
    }

    fn dataset() -> Dataset {
        let (schema, ex) = planted();
        Dataset { schema, examples: ex }
    }

    #[test]
    fn one_configuration_one_row() {
        let sweep = SweepConfig { k_range: 1..=1, repeats: 1, ..SweepConfig::default() };
        let out = sweep_select(&dataset(), "planted", Algorithm::KmeansFoldR, &sweep, &InductionConfig::default()).unwrap();
        assert_eq!(out.report.rows.len(), 1);
        assert_eq!(out.report.fold_rows.len(), 5);
        assert_eq!(out.report.to_csv(false).lines().count(), 2);
    }

    #[test]
    fn sweep_rows_cover_the_grid_and_repeat_exactly() {
        let sweep = SweepConfig { k_range: 1..=3, repeats: 2, folds: 3, ..SweepConfig::default() };
        let a = sweep_select(&dataset(), "planted", Algorithm::KmeansFold, &sweep, &InductionConfig::default()).unwrap();
        let b = sweep_select(&dataset(), "planted", Algorithm::KmeansFold, &sweep, &InductionConfig::default()).unwrap();
        assert_eq!(a.report.rows.len(), 6);
        assert_eq!(a.report, b.report);
        assert_eq!(render_asp(&a.hypothesis), render_asp(&b.hypothesis));
        let plain = sweep_select(&dataset(), "planted", Algorithm::Fold, &sweep, &InductionConfig::default()).unwrap();
        assert_eq!(plain.report.rows.len(), 1);
        assert_eq!(plain.report.rows[0].k, None);
    }

    fn row(k: usize, f1: f64, rules: f64, accuracy: f64) -> ReportRow {
        ReportRow {
            k: Some(k),
            repeat: 0,
            fold: None,
            precision: 0.0,
            recall: 0.0,
            accuracy,
            f1,
            rule_count: rules,
            literal_count: 0.0,
        }
    }

    #[test]
    fn ties_prefer_fewer_rules_then_smaller_k() {
        let rows = vec![row(1, 0.8, 5.0, 0.9), row(2, 0.9, 5.0, 0.9), row(3, 0.9, 3.0, 0.9), row(4, 0.9, 3.0, 0.9)];
        assert_eq!(select_best(&rows, Selection::F1), Some(2));
        let rows = vec![row(1, 0.95, 8.0, 0.95), row(2, 0.90, 3.0, 0.945), row(3, 0.99, 1.0, 0.80)];
        assert_eq!(select_best(&rows, Selection::RuleCountAtMatchedAccuracy), Some(1));
    }

    #[test]
    fn one_class_dataset_is_rejected() {
        let mut ds = dataset();
        ds.examples.retain(|e| e.is_positive());
        let err = sweep_select(&ds, "x", Algorithm::Fold, &SweepConfig::default(), &InductionConfig::default());
        assert!(matches!(err, Err(DataError::Degenerate { .. })));
    }
}
