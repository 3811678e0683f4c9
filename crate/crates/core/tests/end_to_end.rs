mod common;

use kmfold::evalcv::{confusion_metrics, cross_validate};
use kmfold::fold::InductionConfig;
use kmfold::hypothesis::{parse_asp, render_asp};
use kmfold::pipeline::{learn, sweep_select, Algorithm, SweepConfig};

#[test]
fn every_algorithm_round_trips_on_wine() {
    let Some(data) = common::load(common::benchmark("wine")) else {
        eprintln!("wine.csv missing, skipped");
        return;
    };
    let (pos, neg) = (data.positives(), data.negatives());
    for algo in Algorithm::ALL {
        let h = learn(algo, data.schema.clone(), &pos, &neg, 3, &InductionConfig::default());
        assert!(h.validate().is_ok(), "{algo}");
        let text = render_asp(&h);
        let back = parse_asp(&text, Some(&data.schema)).unwrap();
        assert_eq!(render_asp(&back), text, "{algo}");
        let all: Vec<_> = data.examples.iter().collect();
        assert_eq!(confusion_metrics(&back, &all), confusion_metrics(&h, &all), "{algo}");
    }
}

#[test]
fn cross_validation_counts_every_example_once() {
    let Some(data) = common::load(common::benchmark("breast-w")) else {
        return;
    };
    let cfg = InductionConfig::default();
    let report = cross_validate(&data, |_, p, n| learn(Algorithm::FoldR, data.schema.clone(), p, n, 1, &cfg), 5, 3)
        .unwrap();
    assert_eq!(report.folds.len(), 5);
    assert_eq!(report.degenerate_folds(), 0);
    let tested: usize = report.folds.iter().map(|f| f.metrics.total()).sum();
    assert_eq!(tested, data.len());
    assert!(report.mean.accuracy > 0.85, "{}", report.mean.accuracy);
}

#[test]
fn sweep_is_reproducible() {
    let Some(data) = common::load(common::benchmark("wine")) else {
        return;
    };
    let sweep = SweepConfig { k_range: 1..=3, folds: 3, ..SweepConfig::default() };
    let cfg = InductionConfig::default();
    let a = sweep_select(&data, "wine", Algorithm::KmeansFoldR, &sweep, &cfg).unwrap();
    let b = sweep_select(&data, "wine", Algorithm::KmeansFoldR, &sweep, &cfg).unwrap();
    assert_eq!(a.report.to_csv(true), b.report.to_csv(true));
    assert_eq!(render_asp(&a.hypothesis), render_asp(&b.hypothesis));
    assert_eq!(a.report.rows.len(), 3 * sweep.repeats);
}
