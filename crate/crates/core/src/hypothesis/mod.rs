//! Default theories: target rules with `not abI(X)` exceptions, the rules and
//! facts defining each abnormality, and positives enumerated as ground facts.

mod asp;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

pub use asp::{parse_asp, render_asp};

use crate::dataset::{Example, FeatureKind, FeatureSchema, Label, Value};
use crate::error::HypothesisError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Literal {
    CategoricalEq { feature: usize, category: u32 },
    NumericGt { feature: usize, threshold: f64 },
    NumericLe { feature: usize, threshold: f64 },
    NotAbnormal(usize),
}

impl Literal {
    pub fn feature(&self) -> Option<usize> {
        match *self {
            Literal::CategoricalEq { feature, .. }
            | Literal::NumericGt { feature, .. }
            | Literal::NumericLe { feature, .. } => Some(feature),
            Literal::NotAbnormal(_) => None,
        }
    }

    /// Truth of a feature test on one example. `None` for `NotAbnormal`.
    pub fn test(&self, ex: &Example) -> Option<bool> {
        Some(match (*self, ex.values[self.feature()?]) {
            (Literal::CategoricalEq { category, .. }, Value::Category(c)) => c == category,
            (Literal::NumericGt { threshold, .. }, Value::Number(v)) => v > threshold,
            (Literal::NumericLe { threshold, .. }, Value::Number(v)) => v <= threshold,
            _ => false,
        })
    }

    fn check_schema(&self, schema: &FeatureSchema) -> Result<(), HypothesisError> {
        let Some(f) = self.feature() else { return Ok(()) };
        let feature = schema
            .features
            .get(f)
            .ok_or_else(|| HypothesisError::UnknownFeature(format!("#{f}")))?;
        match (*self, feature.kind) {
            (Literal::CategoricalEq { category, .. }, FeatureKind::Categorical)
                if (category as usize) < feature.categories.len() =>
            {
                Ok(())
            }
            (Literal::CategoricalEq { category, .. }, FeatureKind::Categorical) => {
                Err(HypothesisError::UnknownCategory {
                    feature: feature.name.clone(),
                    category: format!("#{category}"),
                })
            }
            (Literal::NumericGt { .. } | Literal::NumericLe { .. }, FeatureKind::Numeric) => Ok(()),
            _ => Err(HypothesisError::UnknownFeature(feature.name.clone())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Head {
    Target,
    Abnormal(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub head: Head,
    pub body: Vec<Literal>,
}

impl Rule {
    pub fn new(head: Head, body: Vec<Literal>) -> Self {
        Self { head, body }
    }

    pub fn abnormal_refs(&self) -> impl Iterator<Item = usize> + '_ {
        self.body.iter().filter_map(|l| match l {
            Literal::NotAbnormal(i) => Some(*i),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    pub schema: Arc<FeatureSchema>,
    pub pred_name: String,
    pub target_rules: Vec<Rule>,
    pub abnormal_rules: BTreeMap<usize, Vec<Rule>>,
    /// Ids of positives enumerated as ground target facts.
    pub noise_facts: Vec<String>,
    /// Ids of examples enumerated as ground `abI` facts.
    pub abnormal_facts: BTreeMap<usize, Vec<String>>,
}

impl Hypothesis {
    pub fn empty(schema: Arc<FeatureSchema>) -> Self {
        let pred_name = schema.target.clone();
        Self {
            schema,
            pred_name,
            target_rules: Vec::new(),
            abnormal_rules: BTreeMap::new(),
            noise_facts: Vec::new(),
            abnormal_facts: BTreeMap::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.target_rules.is_empty() && self.noise_facts.is_empty()
    }

    /// Target rules plus abnormality rules.
    pub fn rule_count(&self) -> usize {
        self.target_rules.len() + self.abnormal_rules.values().map(Vec::len).sum::<usize>()
    }

    pub fn literal_count(&self) -> usize {
        self.all_rules().map(|r| r.body.len()).sum()
    }

    pub fn all_rules(&self) -> impl Iterator<Item = &Rule> {
        self.target_rules.iter().chain(self.abnormal_rules.values().flatten())
    }

    /// Indices with at least one defining rule or fact.
    pub fn defined_abnormals(&self) -> BTreeSet<usize> {
        self.abnormal_rules
            .iter()
            .filter(|(_, r)| !r.is_empty())
            .map(|(i, _)| *i)
            .chain(self.abnormal_facts.iter().filter(|(_, f)| !f.is_empty()).map(|(i, _)| *i))
            .collect()
    }

    /// Every referenced abnormality is defined, literals match the schema,
    /// and the dependency graph through `not` is acyclic.
    pub fn validate(&self) -> Result<(), HypothesisError> {
        let defined = self.defined_abnormals();
        for rule in self.all_rules() {
            if let Head::Abnormal(i) = rule.head {
                if !defined.contains(&i) {
                    return Err(HypothesisError::DanglingAbnormal(i));
                }
            }
            for lit in &rule.body {
                lit.check_schema(&self.schema)?;
                if let Literal::NotAbnormal(i) = lit {
                    if !defined.contains(i) {
                        return Err(HypothesisError::DanglingAbnormal(*i));
                    }
                }
            }
        }
        // Depth-first search with colours: 1 on stack, 2 finished.
        let mut colour: BTreeMap<usize, u8> = BTreeMap::new();
        for &start in &defined {
            self.visit(start, &mut colour)?;
        }
        Ok(())
    }

    fn visit(&self, node: usize, colour: &mut BTreeMap<usize, u8>) -> Result<(), HypothesisError> {
        match colour.get(&node) {
            Some(1) => return Err(HypothesisError::Cyclic(node)),
            Some(_) => return Ok(()),
            None => {}
        }
        colour.insert(node, 1);
        for rule in self.abnormal_rules.get(&node).into_iter().flatten() {
            for dep in rule.abnormal_refs() {
                self.visit(dep, colour)?;
            }
        }
        colour.insert(node, 2);
        Ok(())
    }

    /// Longest chain of abnormalities below a target rule (0 without exceptions).
    pub fn exception_depth(&self) -> usize {
        fn depth(h: &Hypothesis, i: usize) -> usize {
            1 + h.abnormal_rules
                .get(&i)
                .into_iter()
                .flatten()
                .flat_map(Rule::abnormal_refs)
                .map(|j| depth(h, j))
                .max()
                .unwrap_or(0)
        }
        self.target_rules.iter().flat_map(Rule::abnormal_refs).map(|i| depth(self, i)).max().unwrap_or(0)
    }

    /// Checked evaluation of a single literal.
    pub fn literal_holds(&self, lit: &Literal, ex: &Example) -> Result<bool, HypothesisError> {
        self.validate()?;
        Ok(self.holds(lit, ex))
    }

    /// Whether `abI` is derivable for the example.
    pub fn abnormal(&self, i: usize, ex: &Example) -> bool {
        self.abnormal_facts.get(&i).is_some_and(|ids| ids.contains(&ex.id))
            || self.abnormal_rules.get(&i).into_iter().flatten().any(|r| self.rule_holds(r, ex))
    }

    pub(crate) fn holds(&self, lit: &Literal, ex: &Example) -> bool {
        match lit {
            Literal::NotAbnormal(i) => !self.abnormal(*i, ex),
            _ => lit.test(ex).unwrap_or(false),
        }
    }

    pub fn rule_holds(&self, rule: &Rule, ex: &Example) -> bool {
        rule.body.iter().all(|l| self.holds(l, ex))
    }

    /// The examples whose every body literal holds.
    pub fn rule_covers<'a>(&self, rule: &Rule, examples: &[&'a Example]) -> Vec<&'a Example> {
        examples.iter().copied().filter(|e| self.rule_holds(rule, e)).collect()
    }

    pub fn classify(&self, ex: &Example) -> Label {
        if self.noise_facts.contains(&ex.id) || self.target_rules.iter().any(|r| self.rule_holds(r, ex)) {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    pub fn covers(&self, ex: &Example) -> bool {
        self.classify(ex) == Label::Positive
    }

    /// Renumber abnormalities 0, 1, ... in depth-first order of first
    /// reference from the target rules and drop unreferenced definitions.
    pub fn canonicalize(&mut self) {
        let mut order: Vec<usize> = Vec::new();
        fn walk(h: &Hypothesis, i: usize, order: &mut Vec<usize>) {
            if order.contains(&i) {
                return;
            }
            order.push(i);
            for rule in h.abnormal_rules.get(&i).into_iter().flatten() {
                for j in rule.abnormal_refs() {
                    walk(h, j, order);
                }
            }
        }
        for rule in &self.target_rules {
            for i in rule.abnormal_refs() {
                walk(self, i, &mut order);
            }
        }
        let map: BTreeMap<usize, usize> = order.iter().enumerate().map(|(new, &old)| (old, new)).collect();
        let remap_rule = |r: &Rule| Rule {
            head: match r.head {
                Head::Abnormal(i) => Head::Abnormal(map[&i]),
                Head::Target => Head::Target,
            },
            body: r
                .body
                .iter()
                .map(|l| match l {
                    Literal::NotAbnormal(i) => Literal::NotAbnormal(map[i]),
                    other => *other,
                })
                .collect(),
        };
        self.target_rules = self.target_rules.iter().map(remap_rule).collect();
        let mut rules = BTreeMap::new();
        let mut facts = BTreeMap::new();
        for (&old, &new) in &map {
            if let Some(rs) = self.abnormal_rules.get(&old).filter(|rs| !rs.is_empty()) {
                rules.insert(new, rs.iter().map(remap_rule).collect());
            }
            if let Some(fs) = self.abnormal_facts.get(&old).filter(|fs| !fs.is_empty()) {
                facts.insert(new, fs.clone());
            }
        }
        self.abnormal_rules = rules;
        self.abnormal_facts = facts;
    }

    /// Add another hypothesis over the same schema, shifting its abnormality
    /// indices past ours.
    pub fn absorb(&mut self, other: Hypothesis) {
        let offset = self.defined_abnormals().last().map_or(0, |m| m + 1);
        let shift = |r: Rule| Rule {
            head: match r.head {
                Head::Abnormal(i) => Head::Abnormal(i + offset),
                Head::Target => Head::Target,
            },
            body: r
                .body
                .into_iter()
                .map(|l| match l {
                    Literal::NotAbnormal(i) => Literal::NotAbnormal(i + offset),
                    other => other,
                })
                .collect(),
        };
        self.target_rules.extend(other.target_rules.into_iter().map(shift));
        for (i, rules) in other.abnormal_rules {
            self.abnormal_rules.insert(i + offset, rules.into_iter().map(shift).collect());
        }
        for (i, facts) in other.abnormal_facts {
            self.abnormal_facts.insert(i + offset, facts);
        }
        for id in other.noise_facts {
            if !self.noise_facts.contains(&id) {
                self.noise_facts.push(id);
            }
        }
    }
}
