#![allow(dead_code)]

use std::path::PathBuf;

use kmfold::dataset::LoadOptions;
use kmfold::Dataset;

pub struct Benchmark {
    pub name: &'static str,
    pub file: &'static str,
    pub target: &'static str,
    pub positive: &'static str,
}

/// The nine benchmark sets in table order.
pub const BENCHMARKS: [Benchmark; 9] = [
    Benchmark { name: "breast-w", file: "breast-w.csv", target: "y", positive: "4" },
    Benchmark { name: "ecoli", file: "ecoli.csv", target: "localization site", positive: "cp" },
    Benchmark { name: "kidney", file: "kidney.csv", target: "class", positive: "ckd" },
    Benchmark { name: "voting", file: "voting.csv", target: "party", positive: "republican" },
    Benchmark { name: "autism", file: "autism.csv", target: "Class/ASD", positive: "YES" },
    Benchmark { name: "ionosphere", file: "ionosphere.csv", target: "y", positive: "g" },
    Benchmark { name: "sonar", file: "sonar.csv", target: "class", positive: "M" },
    Benchmark { name: "heart", file: "heart.csv", target: "diameter narrowing", positive: "1" },
    Benchmark { name: "wine", file: "wine.csv", target: "Wine", positive: "1" },
];

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub fn benchmark(name: &str) -> &'static Benchmark {
    BENCHMARKS.iter().find(|b| b.name == name).expect("known benchmark")
}

/// `None` when the file is not present.
pub fn load(b: &Benchmark) -> Option<Dataset> {
    let path = data_dir().join(b.file);
    if !path.exists() {
        return None;
    }
    Some(Dataset::from_csv(&path, &LoadOptions::new(b.target, b.positive)).expect("benchmark file loads"))
}

pub fn available() -> Vec<(&'static Benchmark, Dataset)> {
    BENCHMARKS.iter().filter_map(|b| load(b).map(|d| (b, d))).collect()
}
