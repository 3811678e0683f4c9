//! Sequential covering with exceptions.
//!
//! `fold` learns one rule at a time, removing the positives each rule covers.
//! When a rule still covers negatives and no literal helps, the learner is
//! called again with positives and negatives swapped; the rules it returns
//! define a new `abI` predicate and the rule gets `not abI(X)`. `d_fold` keeps
//! covered positives around as demoted examples instead of removing them.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::dataset::{encode_binary, EncodeOptions, Example, FeatureSchema};
use crate::hypothesis::{Head, Hypothesis, Literal, Rule};
use crate::scoring::{best_literal, candidate_literals, enumeration_wins, CandidateMode, ScoringSets};

#[derive(Debug, Clone, PartialEq)]
pub struct InductionConfig {
    /// Specialization steps per rule.
    pub max_clause_length: usize,
    /// Demotion factor.
    pub f: f64,
    /// Seed for the clustering stage; induction itself is deterministic.
    pub seed: u64,
    /// FOLD-R candidates (numeric thresholds) instead of the binary encoding.
    pub numeric_mode: bool,
    /// Nesting bound for exceptions to exceptions.
    pub max_exception_depth: usize,
    pub encoding: EncodeOptions,
}

impl Default for InductionConfig {
    fn default() -> Self {
        Self {
            max_clause_length: 8,
            f: 0.5,
            seed: 0,
            numeric_mode: false,
            max_exception_depth: 2,
            encoding: EncodeOptions::default(),
        }
    }
}

#[derive(Default)]
struct Theory {
    bodies: Vec<Vec<Literal>>,
    facts: Vec<String>,
}

struct Learner<'c> {
    /// Holds the abnormality definitions learned so far.
    hyp: Hypothesis,
    mode: CandidateMode,
    cfg: &'c InductionConfig,
    f: f64,
    demote: bool,
    next_ab: usize,
}

type Set<'a> = Vec<&'a Example>;

fn ids(set: &[&Example]) -> Vec<String> {
    set.iter().map(|e| e.id.clone()).collect()
}

impl Learner<'_> {
    fn fold_rec<'a>(
        &mut self,
        mut pos: Set<'a>,
        neg: Set<'a>,
        mut dpos: Set<'a>,
        dneg: Set<'a>,
        used: &BTreeSet<usize>,
        depth: usize,
    ) -> Theory {
        let mut theory = Theory::default();
        while !pos.is_empty() {
            let checkpoint = self.next_ab;
            let Some(body) = self.learn_rule(&pos, &neg, &dpos, &dneg, used, depth) else {
                theory.facts.extend(ids(&pos));
                break;
            };
            let rule = Rule::new(Head::Target, body);
            let (covered, rest): (Set<'a>, Set<'a>) = pos.iter().partition(|e| self.hyp.rule_holds(&rule, e));
            if covered.is_empty() {
                self.rollback(checkpoint);
                theory.facts.extend(ids(&pos));
                break;
            }
            debug_assert!(rest.len() < pos.len());
            theory.bodies.push(rule.body);
            if self.demote {
                dpos.extend(covered);
            }
            pos = rest;
        }
        theory
    }

    fn learn_rule<'a>(
        &mut self,
        pos: &[&'a Example],
        neg: &[&'a Example],
        dpos: &[&'a Example],
        dneg: &[&'a Example],
        used: &BTreeSet<usize>,
        depth: usize,
    ) -> Option<Vec<Literal>> {
        let (mut p, mut n, mut dp, mut dn) = (pos.to_vec(), neg.to_vec(), dpos.to_vec(), dneg.to_vec());
        let mut body: Vec<Literal> = Vec::new();
        let mut steps = 0;
        while !n.is_empty() && steps < self.cfg.max_clause_length {
            let candidates = candidate_literals(&self.hyp.schema, &p, &n, used, &self.mode);
            let sets = ScoringSets { active_pos: &p, active_neg: &n, demoted_pos: &dp, demoted_neg: &dn, f: self.f };
            let Some((best, _)) = best_literal(&candidates, &sets) else { break };
            let chosen = &candidates[best];
            p.retain(|e| chosen.holds(e));
            n.retain(|e| chosen.holds(e));
            dp.retain(|e| chosen.holds(e));
            dn.retain(|e| chosen.holds(e));
            body.extend(chosen.literals.iter().copied());
            steps += 1;
        }
        if n.is_empty() {
            return Some(body);
        }
        if body.is_empty() {
            return None;
        }

        let ab = self.next_ab;
        self.next_ab += 1;
        if depth >= self.cfg.max_exception_depth {
            self.hyp.abnormal_facts.insert(ab, ids(&n));
        } else {
            let mut inner_used = used.clone();
            inner_used.extend(body.iter().filter_map(Literal::feature));
            let theory = self.fold_rec(n.clone(), p, dn, dp, &inner_used, depth + 1);
            let exception = self.exception_theory(ab, &theory);
            if enumeration_wins(&exception, n.len()) {
                self.rollback(ab + 1);
                self.hyp.abnormal_facts.insert(ab, ids(&n));
            } else {
                let rules = theory.bodies.into_iter().map(|b| Rule::new(Head::Abnormal(ab), b)).collect();
                self.hyp.abnormal_rules.insert(ab, rules);
                if !theory.facts.is_empty() {
                    self.hyp.abnormal_facts.insert(ab, theory.facts);
                }
            }
        }
        body.push(Literal::NotAbnormal(ab));
        Some(body)
    }

    /// The candidate definition of `abI` with everything nested under it.
    fn exception_theory(&self, ab: usize, theory: &Theory) -> Hypothesis {
        let mut h = Hypothesis::empty(self.hyp.schema.clone());
        h.target_rules = theory.bodies.iter().map(|b| Rule::new(Head::Target, b.clone())).collect();
        h.noise_facts = theory.facts.clone();
        h.abnormal_rules = self.hyp.abnormal_rules.range(ab + 1..).map(|(k, v)| (*k, v.clone())).collect();
        h.abnormal_facts = self.hyp.abnormal_facts.range(ab + 1..).map(|(k, v)| (*k, v.clone())).collect();
        h
    }

    /// Forget abnormality definitions numbered `from` and above.
    fn rollback(&mut self, from: usize) {
        self.hyp.abnormal_rules.retain(|k, _| *k < from);
        self.hyp.abnormal_facts.retain(|k, _| *k < from);
        self.next_ab = from;
    }
}

#[allow(clippy::too_many_arguments)]
fn induce(
    schema: Arc<FeatureSchema>,
    pos: &[&Example],
    neg: &[&Example],
    dpos: &[&Example],
    dneg: &[&Example],
    used: &BTreeSet<usize>,
    cfg: &InductionConfig,
    f: f64,
    demote: bool,
) -> Hypothesis {
    let mode = if cfg.numeric_mode {
        CandidateMode::Numeric
    } else {
        let all: Vec<&Example> = pos.iter().chain(neg).chain(dpos).chain(dneg).copied().collect();
        let options = EncodeOptions { bins: cfg.encoding.bins.max(1), ..cfg.encoding };
        let matrix = encode_binary(&schema, &all, &options).expect("bin count is at least one");
        CandidateMode::Binary(matrix.column_map)
    };
    let mut learner = Learner { hyp: Hypothesis::empty(schema), mode, cfg, f, demote, next_ab: 0 };
    let theory = learner.fold_rec(pos.to_vec(), neg.to_vec(), dpos.to_vec(), dneg.to_vec(), used, 0);
    let mut hyp = learner.hyp;
    hyp.target_rules = theory.bodies.into_iter().map(|b| Rule::new(Head::Target, b)).collect();
    hyp.noise_facts = theory.facts;
    prune_hypothesis(&hyp, pos, neg)
}

/// Learn a default theory for `pos` against `neg`, never using features in `used`.
pub fn fold(
    schema: Arc<FeatureSchema>,
    pos: &[&Example],
    neg: &[&Example],
    used: &BTreeSet<usize>,
    cfg: &InductionConfig,
) -> Hypothesis {
    induce(schema, pos, neg, &[], &[], used, cfg, cfg.f, false)
}

/// `fold` with demotion: scoring also sees the demoted sets, weighted by `f`,
/// and positives covered by an accepted rule join the demoted positives.
pub fn d_fold(
    schema: Arc<FeatureSchema>,
    pos: &[&Example],
    neg: &[&Example],
    f: f64,
    demoted_pos: &[&Example],
    demoted_neg: &[&Example],
    cfg: &InductionConfig,
) -> Hypothesis {
    induce(schema, pos, neg, demoted_pos, demoted_neg, &BTreeSet::new(), cfg, f, true)
}

/// Drop body literals whose removal lets a target rule cover no extra
/// negatives, then drop target rules (fewest covered positives first) whose
/// removal keeps the covered positives unchanged. Unreferenced abnormality
/// definitions are discarded and the rest renumbered.
pub fn prune_hypothesis(hyp: &Hypothesis, pos: &[&Example], neg: &[&Example]) -> Hypothesis {
    let mut h = hyp.clone();
    let false_positives = |h: &Hypothesis, rule: &Rule| neg.iter().filter(|e| h.rule_holds(rule, e)).count();

    for r in 0..h.target_rules.len() {
        let mut rule = h.target_rules[r].clone();
        let baseline = false_positives(&h, &rule);
        let mut j = 0;
        while j < rule.body.len() {
            let mut trial = rule.clone();
            trial.body.remove(j);
            if false_positives(&h, &trial) <= baseline {
                rule = trial;
            } else {
                j += 1;
            }
        }
        h.target_rules[r] = rule;
    }

    let covered = |h: &Hypothesis| pos.iter().filter(|e| h.covers(e)).count();
    let mut order: Vec<(usize, usize)> = h
        .target_rules
        .iter()
        .enumerate()
        .map(|(i, r)| (pos.iter().filter(|e| h.rule_holds(r, e)).count(), i))
        .collect();
    order.sort();
    let mut keep = vec![true; h.target_rules.len()];
    let total = covered(&h);
    for (_, i) in order {
        keep[i] = false;
        let mut trial = h.clone();
        trial.target_rules = h.target_rules.iter().zip(&keep).filter(|(_, k)| **k).map(|(r, _)| r.clone()).collect();
        if covered(&trial) < total {
            keep[i] = true;
        }
    }
    h.target_rules = h.target_rules.iter().zip(&keep).filter(|(_, k)| **k).map(|(r, _)| r.clone()).collect();
    h.canonicalize();
    h
}
