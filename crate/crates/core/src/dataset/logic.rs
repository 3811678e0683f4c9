//! Small propositional-per-constant logic programs: unary facts, unary Horn
//! rules, and positive/negative target atoms in `B:`, `E+:`, `E-:` sections.

use std::collections::{BTreeSet, HashMap};

use super::{check_both_classes, Dataset, Example, Feature, FeatureSchema, Label, Value, TRUE_TOKEN};
use crate::error::DataError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub predicate: String,
    pub arg: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HornRule {
    pub head: String,
    pub body: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LogicProgram {
    pub facts: Vec<Atom>,
    pub rules: Vec<HornRule>,
    pub positives: Vec<Atom>,
    pub negatives: Vec<Atom>,
    /// Background predicates in order of first mention.
    pub predicates: Vec<String>,
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Background,
    Positive,
    Negative,
}

pub fn parse_program(text: &str) -> Result<LogicProgram, DataError> {
    let mut program = LogicProgram::default();
    let mut section = Section::None;
    let mut buffer = String::new();
    let mut start_line = 1;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let mut line = raw.split('%').next().unwrap_or("").trim();
        for (marker, s) in [("B:", Section::Background), ("E+:", Section::Positive), ("E-:", Section::Negative)] {
            if let Some(rest) = line.strip_prefix(marker) {
                if !buffer.trim().is_empty() {
                    return Err(err(start_line, "clause not terminated with '.'"));
                }
                section = s;
                line = rest.trim();
            }
        }
        for ch in line.chars() {
            if buffer.trim().is_empty() {
                start_line = line_no;
            }
            if ch == '.' {
                program.add_clause(buffer.trim(), section, start_line)?;
                buffer.clear();
            } else {
                buffer.push(ch);
            }
        }
        buffer.push(' ');
    }
    if !buffer.trim().is_empty() {
        return Err(err(start_line, "clause not terminated with '.'"));
    }
    Ok(program)
}

fn err(line: usize, message: impl Into<String>) -> DataError {
    DataError::Program { line, message: message.into() }
}

impl LogicProgram {
    fn add_clause(&mut self, clause: &str, section: Section, line: usize) -> Result<(), DataError> {
        if section == Section::None {
            return Err(err(line, "clause before any B:, E+: or E-: section"));
        }
        if let Some((head, body)) = clause.split_once(":-") {
            if section != Section::Background {
                return Err(err(line, "rules are only allowed in the B: section"));
            }
            let head = parse_atom(head, line)?;
            let body: Vec<Atom> =
                body.split("),").map(|a| parse_atom(a, line)).collect::<Result<_, _>>()?;
            if !is_variable(&head.arg) || body.iter().any(|a| a.arg != head.arg) {
                return Err(err(line, "rules must be unary over a single variable"));
            }
            self.mention(&head.predicate);
            for a in &body {
                self.mention(&a.predicate);
            }
            self.rules.push(HornRule {
                head: head.predicate,
                body: body.into_iter().map(|a| a.predicate).collect(),
            });
            return Ok(());
        }
        let atom = parse_atom(clause, line)?;
        if is_variable(&atom.arg) {
            return Err(err(line, "facts must be ground"));
        }
        match section {
            Section::Background => {
                self.mention(&atom.predicate);
                self.facts.push(atom);
            }
            Section::Positive => self.positives.push(atom),
            Section::Negative => self.negatives.push(atom),
            Section::None => unreachable!(),
        }
        Ok(())
    }

    fn mention(&mut self, predicate: &str) {
        if !self.predicates.iter().any(|p| p == predicate) {
            self.predicates.push(predicate.to_string());
        }
    }

    /// Background facts closed under the Horn rules.
    pub fn closure(&self) -> HashMap<&str, BTreeSet<&str>> {
        let mut holds: HashMap<&str, BTreeSet<&str>> = HashMap::new();
        for f in &self.facts {
            holds.entry(f.predicate.as_str()).or_default().insert(f.arg.as_str());
        }
        loop {
            let mut changed = false;
            for rule in &self.rules {
                let derived: Vec<&str> = match rule.body.split_first() {
                    Some((first, rest)) => holds
                        .get(first.as_str())
                        .into_iter()
                        .flatten()
                        .copied()
                        .filter(|c| rest.iter().all(|p| holds.get(p.as_str()).is_some_and(|s| s.contains(c))))
                        .collect(),
                    None => Vec::new(),
                };
                let entry = holds.entry(rule.head.as_str()).or_default();
                for c in derived {
                    changed |= entry.insert(c);
                }
            }
            if !changed {
                return holds;
            }
        }
    }

    /// Tabulate the program: one boolean feature per background predicate.
    pub fn to_dataset(&self) -> Result<Dataset, DataError> {
        let target = self
            .positives
            .iter()
            .chain(&self.negatives)
            .map(|a| a.predicate.as_str())
            .next()
            .ok_or(DataError::Degenerate { positives: 0, negatives: 0 })?;
        if let Some(a) = self.positives.iter().chain(&self.negatives).find(|a| a.predicate != target) {
            return Err(err(0, format!("examples mix target predicates `{target}` and `{}`", a.predicate)));
        }
        let holds = self.closure();
        let features: Vec<Feature> = self
            .predicates
            .iter()
            .filter(|p| p.as_str() != target)
            .map(|p| Feature::categorical(p.clone(), [TRUE_TOKEN]))
            .collect();
        let examples: Vec<Example> = self
            .positives
            .iter()
            .map(|a| (a, Label::Positive))
            .chain(self.negatives.iter().map(|a| (a, Label::Negative)))
            .map(|(atom, label)| {
                let values = features
                    .iter()
                    .map(|f| {
                        if holds.get(f.name.as_str()).is_some_and(|s| s.contains(atom.arg.as_str())) {
                            Value::Category(0)
                        } else {
                            Value::Missing
                        }
                    })
                    .collect();
                Example::new(atom.arg.clone(), values, label)
            })
            .collect();
        check_both_classes(&examples)?;
        let schema = FeatureSchema::new(features, target, TRUE_TOKEN)?;
        Ok(Dataset::new(schema, examples))
    }
}

fn is_variable(s: &str) -> bool {
    s.starts_with(|c: char| c.is_ascii_uppercase() || c == '_')
}

fn parse_atom(text: &str, line: usize) -> Result<Atom, DataError> {
    let text = text.trim().trim_end_matches(')');
    let (name, arg) = text
        .split_once('(')
        .ok_or_else(|| err(line, format!("expected an atom like p(a), found `{text}`")))?;
    let (name, arg) = (name.trim(), arg.trim());
    let valid_name = name.starts_with(|c: char| c.is_ascii_lowercase())
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if !valid_name || arg.is_empty() || arg.contains([',', '(', ')']) {
        return Err(err(line, format!("malformed atom `{text})`")));
    }
    Ok(Atom { predicate: name.to_string(), arg: arg.to_string() })
}
