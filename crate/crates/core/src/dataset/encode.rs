use super::{Example, FeatureKind, FeatureSchema, Value};
use crate::error::DataError;

pub const DEFAULT_BINS: usize = 10;
pub const DEFAULT_MERGE_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncodeOptions {
    /// Upper bound on equal-frequency bins per numeric feature.
    pub bins: usize,
    /// Adjacent bins whose positive ratios differ by less than this are merged.
    pub merge_tolerance: f64,
}

impl Default for EncodeOptions {
    fn default() -> Self {
        Self { bins: DEFAULT_BINS, merge_tolerance: DEFAULT_MERGE_TOLERANCE }
    }
}

/// Where an encoded column came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ColumnSource {
    Category { feature: usize, category: u32 },
    /// Half-open interval `(lower, upper]`; the outermost ranges are unbounded.
    Range { feature: usize, lower: f64, upper: f64 },
    Numeric { feature: usize },
}

impl ColumnSource {
    pub fn feature(&self) -> usize {
        match *self {
            ColumnSource::Category { feature, .. }
            | ColumnSource::Range { feature, .. }
            | ColumnSource::Numeric { feature } => feature,
        }
    }

    fn value(&self, ex: &Example) -> f64 {
        match (*self, ex.values[self.feature()]) {
            (ColumnSource::Category { category, .. }, Value::Category(c)) => f64::from(c == category),
            (ColumnSource::Range { lower, upper, .. }, Value::Number(v)) => {
                f64::from(v > lower && v <= upper)
            }
            (ColumnSource::Numeric { .. }, Value::Number(v)) => v,
            (ColumnSource::Numeric { .. }, _) => f64::NAN,
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodedMatrix {
    pub rows: Vec<Vec<f64>>,
    pub column_map: Vec<ColumnSource>,
}

impl EncodedMatrix {
    pub fn width(&self) -> usize {
        self.column_map.len()
    }

    /// Encode further examples with the columns fitted here.
    pub fn transform(&self, examples: &[&Example]) -> Vec<Vec<f64>> {
        examples.iter().map(|e| self.column_map.iter().map(|c| c.value(e)).collect()).collect()
    }
}

/// One-hot encode categorical features and range-encode numeric ones.
///
/// Numeric features are cut into at most `bins` equal-frequency ranges,
/// adjacent ranges with similar positive ratios are merged, and each surviving
/// range becomes one indicator column.
pub fn encode_binary(
    schema: &FeatureSchema,
    examples: &[&Example],
    options: &EncodeOptions,
) -> Result<EncodedMatrix, DataError> {
    if options.bins < 1 {
        return Err(DataError::InvalidBins);
    }
    let mut column_map = Vec::new();
    for (fi, feature) in schema.features.iter().enumerate() {
        match feature.kind {
            FeatureKind::Categorical => {
                let mut seen = vec![false; feature.categories.len()];
                for e in examples {
                    if let Value::Category(c) = e.values[fi] {
                        seen[c as usize] = true;
                    }
                }
                column_map.extend(
                    seen.iter()
                        .enumerate()
                        .filter(|(_, s)| **s)
                        .map(|(c, _)| ColumnSource::Category { feature: fi, category: c as u32 }),
                );
            }
            FeatureKind::Numeric => {
                let mut labelled: Vec<(f64, bool)> = examples
                    .iter()
                    .filter_map(|e| e.values[fi].as_number().map(|v| (v, e.is_positive())))
                    .collect();
                if labelled.is_empty() {
                    continue;
                }
                labelled.sort_by(|a, b| a.0.total_cmp(&b.0));
                let sorted: Vec<f64> = labelled.iter().map(|p| p.0).collect();
                let cuts = equal_frequency_cuts(&sorted, options.bins);
                let cuts = merge_ranges(&labelled, &cuts, options.merge_tolerance);
                let mut lower = f64::NEG_INFINITY;
                for upper in cuts.into_iter().chain(std::iter::once(f64::INFINITY)) {
                    column_map.push(ColumnSource::Range { feature: fi, lower, upper });
                    lower = upper;
                }
            }
        }
    }
    let mut matrix = EncodedMatrix { rows: Vec::new(), column_map };
    matrix.rows = matrix.transform(examples);
    Ok(matrix)
}

/// One-hot categorical columns plus raw numeric columns (missing as NaN),
/// the input to [`normalize_for_clustering`].
pub fn encode_mixed(schema: &FeatureSchema, examples: &[&Example]) -> EncodedMatrix {
    let mut column_map = Vec::new();
    for (fi, feature) in schema.features.iter().enumerate() {
        match feature.kind {
            FeatureKind::Categorical => column_map.extend(
                (0..feature.categories.len() as u32)
                    .map(|category| ColumnSource::Category { feature: fi, category }),
            ),
            FeatureKind::Numeric => column_map.push(ColumnSource::Numeric { feature: fi }),
        }
    }
    let mut matrix = EncodedMatrix { rows: Vec::new(), column_map };
    matrix.rows = matrix.transform(examples);
    matrix
}

/// Min-max scale numeric columns into [0, 1]. Constant columns become 0 and
/// missing numeric cells take the column mean after scaling.
pub fn normalize_for_clustering(matrix: &EncodedMatrix) -> EncodedMatrix {
    let mut rows = matrix.rows.clone();
    for (c, source) in matrix.column_map.iter().enumerate() {
        if !matches!(source, ColumnSource::Numeric { .. }) {
            continue;
        }
        let present = || rows.iter().map(|r| r[c]).filter(|v| !v.is_nan());
        let min = present().fold(f64::INFINITY, f64::min);
        let max = present().fold(f64::NEG_INFINITY, f64::max);
        let span = max - min;
        let mut sum = 0.0;
        let mut count = 0usize;
        for row in rows.iter_mut() {
            if row[c].is_nan() {
                continue;
            }
            row[c] = if span > 0.0 { (row[c] - min) / span } else { 0.0 };
            sum += row[c];
            count += 1;
        }
        let mean = if count > 0 { sum / count as f64 } else { 0.0 };
        for row in rows.iter_mut().filter(|r| r[c].is_nan()) {
            row[c] = mean;
        }
    }
    EncodedMatrix { rows, column_map: matrix.column_map.clone() }
}

/// Cut points for at most `bins` equal-frequency ranges over sorted values.
///
/// Each cut is the largest value of the range below it, so ranges read as
/// `(previous cut, cut]`. A cut that would separate equal values is pushed
/// forward to the next change of value.
pub fn equal_frequency_cuts(sorted: &[f64], bins: usize) -> Vec<f64> {
    let n = sorted.len();
    let mut cuts: Vec<f64> = Vec::new();
    for j in 1..bins {
        let mut idx = (j * n).div_ceil(bins);
        if idx == 0 {
            continue;
        }
        while idx < n && sorted[idx - 1] == sorted[idx] {
            idx += 1;
        }
        if idx >= n {
            break;
        }
        let cut = sorted[idx - 1];
        if cuts.last().is_none_or(|&last| cut > last) {
            cuts.push(cut);
        }
    }
    cuts
}

/// Drop cuts between adjacent ranges whose positive ratios differ by less
/// than `tolerance`. Ranges are merged left to right, comparing the running
/// merged range with its right neighbour.
pub fn merge_ranges(labelled: &[(f64, bool)], cuts: &[f64], tolerance: f64) -> Vec<f64> {
    let mut counts = vec![(0usize, 0usize); cuts.len() + 1];
    for &(v, positive) in labelled {
        let slot = cuts.partition_point(|&c| c < v);
        if positive {
            counts[slot].0 += 1;
        } else {
            counts[slot].1 += 1;
        }
    }
    let ratio = |(p, n): (usize, usize)| p as f64 / (p + n).max(1) as f64;

    let mut kept = Vec::new();
    let mut current = counts[0];
    for (i, &next) in counts.iter().enumerate().skip(1) {
        if (ratio(current) - ratio(next)).abs() < tolerance {
            current = (current.0 + next.0, current.1 + next.1);
        } else {
            kept.push(cuts[i - 1]);
            current = next;
        }
    }
    kept
}
