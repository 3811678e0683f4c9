//! English rendering of hypotheses from `#pred` directives.
//!
//! ```text
//! #pred mt(X): Tumor @X is malignant
//! #pred clump_thickness(X, N): the clump thickness of @X is @N
//! ```
//!
//! Abnormality predicates need no directive; `abI` reads "abnormal condition
//! I applies to <entity> X", the entity taken from the target directive.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::dataset::TRUE_TOKEN;
use crate::error::TranslateError;
use crate::hypothesis::{Head, Hypothesis, Literal, Rule};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredDirective {
    pub predicate: String,
    pub args: Vec<String>,
    pub template: String,
}

impl PredDirective {
    pub fn arity(&self) -> usize {
        self.args.len()
    }

    /// Fill placeholders positionally: the first argument with `subject`,
    /// the second with `value`.
    pub fn fill(&self, subject: &str, value: &str) -> String {
        let mut out = String::new();
        let mut rest = self.template.as_str();
        while let Some(at) = rest.find('@') {
            out.push_str(&rest[..at]);
            let name_len = placeholder_len(&rest[at + 1..]);
            let name = &rest[at + 1..at + 1 + name_len];
            match self.args.iter().position(|a| a == name) {
                Some(0) if name_len > 0 => out.push_str(subject),
                Some(_) if name_len > 0 => out.push_str(value),
                _ => out.push('@'),
            }
            rest = &rest[at + 1 + name_len..];
        }
        out.push_str(rest);
        out
    }
}

fn placeholder_len(s: &str) -> usize {
    s.find(|c: char| !(c.is_ascii_alphanumeric() || c == '_')).unwrap_or(s.len())
}

/// Directives keyed by predicate name.
pub type Directives = BTreeMap<String, PredDirective>;

/// Read every `#pred name(A, B): template` line; anything else is ignored.
pub fn parse_pred_file(text: &str) -> Result<Directives, TranslateError> {
    let mut out = Directives::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let Some(rest) = raw.trim().strip_prefix("#pred") else { continue };
        let err = |message: &str| TranslateError::Parse { line, message: message.to_string() };
        let (signature, template) = rest.split_once(':').ok_or_else(|| err("missing `:`"))?;
        let signature = signature.trim();
        let open = signature.find('(').ok_or_else(|| err("missing argument list"))?;
        let inner = signature[open + 1..].strip_suffix(')').ok_or_else(|| err("missing `)`"))?;
        let predicate = signature[..open].trim().to_string();
        if predicate.is_empty() {
            return Err(err("missing predicate name"));
        }
        let args: Vec<String> = inner.split(',').map(|a| a.trim().to_string()).collect();
        if args.iter().any(|a| a.is_empty()) {
            return Err(err("empty argument name"));
        }
        let template = template.trim().to_string();
        let mut rest = template.as_str();
        while let Some(at) = rest.find('@') {
            let len = placeholder_len(&rest[at + 1..]);
            let name = &rest[at + 1..at + 1 + len];
            if !args.iter().any(|a| a == name) {
                return Err(err(&format!("unknown placeholder `@{name}`")));
            }
            rest = &rest[at + 1 + len..];
        }
        if out.contains_key(&predicate) {
            return Err(TranslateError::Duplicate { line, predicate });
        }
        out.insert(predicate.clone(), PredDirective { predicate, args, template });
    }
    Ok(out)
}

fn lower_first(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(first) => first.to_lowercase().chain(c).collect(),
        None => String::new(),
    }
}

/// The word before the subject placeholder of the target directive.
fn entity(d: &PredDirective) -> String {
    let marker = format!("@{}", d.args[0]);
    let before = d.template.split(&marker).next().unwrap_or("");
    before.split_whitespace().last().map(|w| w.to_lowercase()).unwrap_or_default()
}

struct Renderer<'a> {
    hyp: &'a Hypothesis,
    dirs: &'a Directives,
    target: &'a PredDirective,
    entity: String,
}

impl Renderer<'_> {
    fn directive(&self, feature: usize, arity: usize) -> Result<&PredDirective, TranslateError> {
        let name = &self.hyp.schema.features[feature].name;
        self.dirs
            .get(name)
            .filter(|d| d.arity() == arity)
            .ok_or_else(|| TranslateError::MissingDirective(format!("{name}/{arity}")))
    }

    fn head(&self, head: Head, id: &str) -> String {
        match head {
            Head::Target => PredDirective { template: lower_first(&self.target.template), ..self.target.clone() }.fill(id, ""),
            Head::Abnormal(i) if self.entity.is_empty() => format!("abnormal condition {i} applies to {id}"),
            Head::Abnormal(i) => format!("abnormal condition {i} applies to {} {id}", self.entity),
        }
    }

    fn conditions(&self, rule: &Rule) -> Result<Vec<String>, TranslateError> {
        let mut lines = Vec::new();
        let mut j = 0;
        while j < rule.body.len() {
            match rule.body[j] {
                Literal::CategoricalEq { feature, category } => {
                    let token = self.hyp.schema.category_name(feature, category);
                    let line = if token == TRUE_TOKEN {
                        self.directive(feature, 1)?.fill("X", "")
                    } else {
                        self.directive(feature, 2)?.fill("X", token)
                    };
                    lines.push(line);
                }
                Literal::NumericGt { feature, threshold } => {
                    let d = self.directive(feature, 2)?;
                    let phrase = match rule.body.get(j + 1) {
                        Some(&Literal::NumericLe { feature: g, threshold: upper }) if g == feature => {
                            j += 1;
                            format!("larger than {threshold} and less than or equal to {upper}")
                        }
                        _ => format!("larger than {threshold}"),
                    };
                    lines.push(d.fill("X", &phrase));
                }
                Literal::NumericLe { feature, threshold } => {
                    let phrase = format!("less than or equal to {threshold}");
                    lines.push(self.directive(feature, 2)?.fill("X", &phrase));
                }
                Literal::NotAbnormal(_) => {}
            }
            j += 1;
        }
        Ok(lines)
    }

    fn rule(&self, rule: &Rule, out: &mut String) -> Result<(), TranslateError> {
        let _ = writeln!(out, "{} if:", self.head(rule.head, "X"));
        let lines = self.conditions(rule)?;
        let unless: Vec<String> = rule
            .body
            .iter()
            .filter_map(|l| match l {
                Literal::NotAbnormal(i) => Some(format!("abnormal condition {i} applies")),
                _ => None,
            })
            .collect();
        if lines.is_empty() && unless.is_empty() {
            out.push_str("    always.\n");
            return Ok(());
        }
        for (n, line) in lines.iter().enumerate() {
            let last = n + 1 == lines.len();
            let end = if !last { "," } else if unless.is_empty() { "." } else { "" };
            let _ = writeln!(out, "    {line}{end}");
        }
        if !unless.is_empty() {
            let _ = writeln!(out, "    unless {}.", unless.join(" and "));
        }
        Ok(())
    }
}

/// Render target rules, noise facts, then abnormality definitions in index
/// order. An empty hypothesis renders as empty text.
pub fn translate_hypothesis(hyp: &Hypothesis, directives: &Directives) -> Result<String, TranslateError> {
    if hyp.is_empty() {
        return Ok(String::new());
    }
    let target = directives
        .get(&hyp.pred_name)
        .filter(|d| d.arity() == 1)
        .ok_or_else(|| TranslateError::MissingDirective(format!("{}/1", hyp.pred_name)))?;
    let r = Renderer { hyp, dirs: directives, target, entity: entity(target) };
    let mut out = String::new();
    for rule in &hyp.target_rules {
        r.rule(rule, &mut out)?;
    }
    for id in &hyp.noise_facts {
        let _ = writeln!(out, "{} (recorded as an exceptional case).", r.head(Head::Target, id));
    }
    for i in hyp.defined_abnormals() {
        for rule in hyp.abnormal_rules.get(&i).into_iter().flatten() {
            r.rule(rule, &mut out)?;
        }
        for id in hyp.abnormal_facts.get(&i).into_iter().flatten() {
            let _ = writeln!(out, "{} (recorded as an exceptional case).", r.head(Head::Abnormal(i), id));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypothesis::parse_asp;
    use crate::hypothesis::tests::penguin_theory;

    const BREAST: &str = "\
mt(X) :- clump_thickness(X, N1), N1 > 3, N1 =< 4, not ab1(X), not ab2(X).
ab1(X) :- cell_shape_uniformity(X, N2), N2 > 1, N2 =< 2, normal_nucleoli(X, N3), N3 > 1, N3 =< 2.
ab2(X) :- cell_shape_uniformity(X, N2), N2 > 1, N2 =< 2, marginal_adhesion(X, N4), N4 =< 1.
";

    const PREDS: &str = "\
#pred mt(X): Tumor @X is malignant
#pred clump_thickness(X, N): the clump thickness of @X is @N
#pred cell_shape_uniformity(X, N): cell shape uniformity of @X is @N
#pred normal_nucleoli(X, N): normal nucleoli level of @X is @N
#pred marginal_adhesion(X, N): marginal adhesion level of @X is @N
";

    #[test]
    fn directive_lines() {
        let d = parse_pred_file("% comment\n\n#pred mt(X): Tumor @X is malignant\n").unwrap();
        let mt = &d["mt"];
        assert_eq!(mt.args, vec!["X"]);
        assert_eq!(mt.template, "Tumor @X is malignant");
        assert!(parse_pred_file("").unwrap().is_empty());
    }

    #[test]
    fn directive_errors() {
        let dup = parse_pred_file("#pred mt(X): a @X\n#pred mt(X): b @X\n");
        assert_eq!(dup, Err(TranslateError::Duplicate { line: 2, predicate: "mt".into() }));
        assert!(matches!(parse_pred_file("\n#pred mt(X) Tumor"), Err(TranslateError::Parse { line: 2, .. })));
        assert!(matches!(parse_pred_file("#pred mt(X): Tumor @Y"), Err(TranslateError::Parse { line: 1, .. })));
    }

    #[test]
    fn exception_block() {
        let hyp = parse_asp(BREAST, None).unwrap();
        let text = translate_hypothesis(&hyp, &parse_pred_file(PREDS).unwrap()).unwrap();
        let expected = "\
tumor X is malignant if:
    the clump thickness of X is larger than 3 and less than or equal to 4
    unless abnormal condition 1 applies and abnormal condition 2 applies.
abnormal condition 1 applies to tumor X if:
    cell shape uniformity of X is larger than 1 and less than or equal to 2,
    normal nucleoli level of X is larger than 1 and less than or equal to 2.
abnormal condition 2 applies to tumor X if:
    cell shape uniformity of X is larger than 1 and less than or equal to 2,
    marginal adhesion level of X is less than or equal to 1.
";
        assert_eq!(text, expected);
        assert_eq!(text.matches(" if:").count(), hyp.rule_count());
    }

    #[test]
    fn one_literal_rule_is_two_lines() {
        let hyp = parse_asp("mt(X) :- clump_thickness(X, N1), N1 > 9.\n", None).unwrap();
        let text = translate_hypothesis(&hyp, &parse_pred_file(PREDS).unwrap()).unwrap();
        assert_eq!(text, "tumor X is malignant if:\n    the clump thickness of X is larger than 9.\n");
    }

    #[test]
    fn empty_hypothesis_is_empty_text() {
        let hyp = parse_asp("", None).unwrap();
        assert_eq!(translate_hypothesis(&hyp, &Directives::new()).unwrap(), "");
    }

    #[test]
    fn missing_directive_names_predicate() {
        let hyp = parse_asp("mt(X) :- clump_thickness(X, N1), N1 > 9.\n", None).unwrap();
        let only_feature = parse_pred_file("#pred clump_thickness(X, N): ct of @X is @N\n").unwrap();
        assert_eq!(translate_hypothesis(&hyp, &only_feature), Err(TranslateError::MissingDirective("mt/1".into())));
        let only_head = parse_pred_file("#pred mt(X): Tumor @X is malignant\n").unwrap();
        assert_eq!(
            translate_hypothesis(&hyp, &only_head),
            Err(TranslateError::MissingDirective("clump_thickness/2".into()))
        );
    }

    #[test]
    fn boolean_features_facts_and_empty_bodies() {
        let preds = "#pred fly(X): @X flies\n#pred bird(X): @X is a bird\n#pred penguin(X): @X is a penguin\n";
        let d = parse_pred_file(preds).unwrap();
        let text = translate_hypothesis(&penguin_theory(), &d).unwrap();
        assert_eq!(
            text,
            "X flies if:\n    X is a bird\n    unless abnormal condition 0 applies.\n\
             abnormal condition 0 applies to X if:\n    X is a penguin.\n"
        );
        let mut h = penguin_theory();
        h.noise_facts.push("sam".into());
        h.abnormal_facts.insert(0, vec!["polly".into()]);
        let text = translate_hypothesis(&h, &d).unwrap();
        assert!(text.contains("sam flies (recorded as an exceptional case).\n"));
        assert!(text.contains("abnormal condition 0 applies to polly (recorded as an exceptional case).\n"));
        let always = parse_asp("fly(X).\n", None).unwrap();
        assert_eq!(translate_hypothesis(&always, &d).unwrap(), "X flies if:\n    always.\n");
    }
}
