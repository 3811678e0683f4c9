//! Candidate literals, the demotion-weighted information gain, and the
//! description-length test that arbitrates exceptions against enumeration.

use std::collections::BTreeSet;

use crate::dataset::{ColumnSource, Example, FeatureKind, FeatureSchema, Value};
use crate::hypothesis::{Hypothesis, Literal};

/// Coverage tallies for scoring one literal `L` added to a rule `R`.
///
/// `p0, n0` are active positives/negatives covered by `R`, `p1, n1` those
/// covered by `R + L`; `p2, n2, p3, n3` are the demoted counterparts. `t` and
/// `t_prime` count positives covered by both `R` and `R + L`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GainCounts {
    pub p0: f64,
    pub n0: f64,
    pub p1: f64,
    pub n1: f64,
    pub p2: f64,
    pub n2: f64,
    pub p3: f64,
    pub n3: f64,
    pub t: f64,
    pub t_prime: f64,
    pub f: f64,
}

impl GainCounts {
    /// Counts with no demoted examples.
    pub fn active(p0: f64, n0: f64, p1: f64, n1: f64) -> Self {
        Self { p0, n0, p1, n1, t: p1, ..Self::default() }
    }
}

/// Demotion-weighted information gain.
///
/// `t (log2(p1/(p1+n1)) - log2(p0/(p0+n0)))
///   + t' f (log2(p3 f/(p3+n3)) - log2(p2 f/(p2+n2)))`
///
/// A term whose multiplier is zero contributes 0. A literal that keeps no
/// active positive while some were covered scores negative infinity.
pub fn information_gain(c: &GainCounts) -> f64 {
    if c.p1 == 0.0 && c.p0 > 0.0 {
        return f64::NEG_INFINITY;
    }
    let active = if c.t == 0.0 {
        0.0
    } else {
        c.t * ((c.p1 / (c.p1 + c.n1)).log2() - (c.p0 / (c.p0 + c.n0)).log2())
    };
    let weight = c.t_prime * c.f;
    let demoted = if weight == 0.0 {
        0.0
    } else {
        // ratio first, then f: equal ratios must cancel exactly
        weight * ((c.p3 / (c.p3 + c.n3) * c.f).log2() - (c.p2 / (c.p2 + c.n2) * c.f).log2())
    };
    active + demoted
}

/// Classic FOIL gain, the reference the weighted gain reduces to.
pub fn foil_gain(p0: f64, n0: f64, p1: f64, n1: f64) -> f64 {
    if p1 == 0.0 {
        return if p0 > 0.0 { f64::NEG_INFINITY } else { 0.0 };
    }
    p1 * ((p1 / (p1 + n1)).log2() - (p0 / (p0 + n0)).log2())
}

/// One or two literals added together. Interior ranges of the binary
/// encoding contribute a lower and an upper bound at once.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub literals: Vec<Literal>,
}

impl Candidate {
    pub fn single(lit: Literal) -> Self {
        Self { literals: vec![lit] }
    }

    pub fn holds(&self, ex: &Example) -> bool {
        self.literals.iter().all(|l| l.test(ex).unwrap_or(false))
    }
}

/// How candidates are generated.
#[derive(Debug, Clone, PartialEq)]
pub enum CandidateMode {
    /// One candidate per column of a fitted binary encoding.
    Binary(Vec<ColumnSource>),
    /// Categorical equalities plus numeric thresholds at label changes.
    Numeric,
}

/// Candidates over features not in `used`, drawn from the examples of the
/// current call. Positive and negative here are roles, which are swapped
/// when exceptions are learned, not the examples' own labels.
pub fn candidate_literals(
    schema: &FeatureSchema,
    positives: &[&Example],
    negatives: &[&Example],
    used: &BTreeSet<usize>,
    mode: &CandidateMode,
) -> Vec<Candidate> {
    let examples = || positives.iter().chain(negatives);
    let mut out = Vec::new();
    match mode {
        CandidateMode::Binary(columns) => {
            for col in columns.iter().filter(|c| !used.contains(&c.feature())) {
                match *col {
                    ColumnSource::Category { feature, category } => {
                        let observed =
                            examples().any(|e| e.values[feature] == Value::Category(category));
                        if observed {
                            out.push(Candidate::single(Literal::CategoricalEq { feature, category }));
                        }
                    }
                    ColumnSource::Range { feature, lower, upper } => {
                        let mut literals = Vec::new();
                        if lower.is_finite() {
                            literals.push(Literal::NumericGt { feature, threshold: lower });
                        }
                        if upper.is_finite() {
                            literals.push(Literal::NumericLe { feature, threshold: upper });
                        }
                        if !literals.is_empty() {
                            out.push(Candidate { literals });
                        }
                    }
                    ColumnSource::Numeric { .. } => {}
                }
            }
        }
        CandidateMode::Numeric => {
            for (fi, feature) in schema.features.iter().enumerate() {
                if used.contains(&fi) {
                    continue;
                }
                match feature.kind {
                    FeatureKind::Categorical => {
                        let mut seen = vec![false; feature.categories.len()];
                        for e in examples() {
                            if let Value::Category(c) = e.values[fi] {
                                seen[c as usize] = true;
                            }
                        }
                        out.extend(seen.iter().enumerate().filter(|(_, s)| **s).map(|(c, _)| {
                            Candidate::single(Literal::CategoricalEq { feature: fi, category: c as u32 })
                        }));
                    }
                    FeatureKind::Numeric => {
                        for threshold in label_change_midpoints(positives, negatives, fi) {
                            out.push(Candidate::single(Literal::NumericGt { feature: fi, threshold }));
                            out.push(Candidate::single(Literal::NumericLe { feature: fi, threshold }));
                        }
                    }
                }
            }
        }
    }
    out
}

/// Midpoints between consecutive distinct values whose label sets differ or
/// are mixed.
fn label_change_midpoints(positives: &[&Example], negatives: &[&Example], feature: usize) -> Vec<f64> {
    let tagged = positives.iter().map(|e| (e, true)).chain(negatives.iter().map(|e| (e, false)));
    let mut pairs: Vec<(f64, bool)> =
        tagged.filter_map(|(e, pos)| e.values[feature].as_number().map(|v| (v, pos))).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // (value, has positive, has negative) per distinct value
    let mut groups: Vec<(f64, bool, bool)> = Vec::new();
    for (v, pos) in pairs {
        match groups.last_mut() {
            Some(g) if g.0 == v => {
                g.1 |= pos;
                g.2 |= !pos;
            }
            _ => groups.push((v, pos, !pos)),
        }
    }
    groups
        .windows(2)
        .filter(|w| {
            let pure_same = w[0].1 != w[0].2 && w[1].1 != w[1].2 && w[0].1 == w[1].1;
            !pure_same
        })
        .map(|w| w[0].0 + (w[1].0 - w[0].0) / 2.0)
        .collect()
}

/// Example sets seen by the learner while specializing one rule. All sets
/// hold only examples covered by the rule so far.
#[derive(Debug, Clone, Copy)]
pub struct ScoringSets<'s, 'a> {
    pub active_pos: &'s [&'a Example],
    pub active_neg: &'s [&'a Example],
    pub demoted_pos: &'s [&'a Example],
    pub demoted_neg: &'s [&'a Example],
    pub f: f64,
}

impl ScoringSets<'_, '_> {
    pub fn counts(&self, candidate: &Candidate) -> GainCounts {
        let count = |set: &[&Example]| set.iter().filter(|e| candidate.holds(e)).count() as f64;
        let p1 = count(self.active_pos);
        let p3 = count(self.demoted_pos);
        GainCounts {
            p0: self.active_pos.len() as f64,
            n0: self.active_neg.len() as f64,
            p1,
            n1: count(self.active_neg),
            p2: self.demoted_pos.len() as f64,
            n2: self.demoted_neg.len() as f64,
            p3,
            n3: count(self.demoted_neg),
            t: p1,
            t_prime: p3,
            f: self.f,
        }
    }
}

/// Index and gain of the best candidate with strictly positive gain. Ties go
/// to the earliest candidate.
pub fn best_literal(candidates: &[Candidate], sets: &ScoringSets) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, c) in candidates.iter().enumerate() {
        let gain = information_gain(&sets.counts(c));
        if gain > 0.0 && best.is_none_or(|(_, g)| gain > g) {
            best = Some((i, gain));
        }
    }
    best
}

/// Size of a theory: one per rule head plus one per body literal, and two
/// per enumerated fact (head and constant).
pub fn description_length(h: &Hypothesis) -> usize {
    let rules: usize = h.all_rules().map(|r| 1 + r.body.len()).sum();
    let facts = h.noise_facts.len() + h.abnormal_facts.values().map(Vec::len).sum::<usize>();
    rules + 2 * facts
}

/// Whether enumerating `remaining_neg` examples as ground facts is preferred
/// to the learned exception theory.
pub fn enumeration_wins(exception_hyp: &Hypothesis, remaining_neg: usize) -> bool {
    exception_hyp.target_rules.is_empty() || description_length(exception_hyp) > 2 * remaining_neg
}
