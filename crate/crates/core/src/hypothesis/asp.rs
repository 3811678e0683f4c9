//! Answer-set-program text for hypotheses.
//!
//! ```text
//! fly(X) :- bird(X), not ab0(X).
//! mt(X) :- clump_thickness(X, N1), N1 > 3, N1 =< 4.
//! ab0(X) :- penguin(X).
//! fly(tweety).
//! ```

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write;
use std::sync::Arc;

use super::{Head, Hypothesis, Literal, Rule};
use crate::dataset::{Feature, FeatureKind, FeatureSchema, TRUE_TOKEN};
use crate::error::HypothesisError;

/// One clause per line, target rules and facts first, then abnormality
/// definitions in index order. Numeric variables are numbered per feature in
/// order of first use.
pub fn render_asp(hyp: &Hypothesis) -> String {
    let mut vars: HashMap<usize, usize> = HashMap::new();
    let mut out = String::new();
    for rule in &hyp.target_rules {
        render_rule(hyp, rule, &mut vars, &mut out);
    }
    for id in &hyp.noise_facts {
        let _ = writeln!(out, "{}({}).", hyp.pred_name, quote(id));
    }
    for i in hyp.defined_abnormals() {
        for rule in hyp.abnormal_rules.get(&i).into_iter().flatten() {
            render_rule(hyp, rule, &mut vars, &mut out);
        }
        for id in hyp.abnormal_facts.get(&i).into_iter().flatten() {
            let _ = writeln!(out, "ab{i}({}).", quote(id));
        }
    }
    out
}

fn render_rule(hyp: &Hypothesis, rule: &Rule, vars: &mut HashMap<usize, usize>, out: &mut String) {
    match rule.head {
        Head::Target => out.push_str(&hyp.pred_name),
        Head::Abnormal(i) => {
            let _ = write!(out, "ab{i}");
        }
    }
    out.push_str("(X)");
    let mut parts: Vec<String> = Vec::new();
    let mut bound: Vec<usize> = Vec::new();
    for lit in &rule.body {
        match *lit {
            Literal::CategoricalEq { feature, category } => {
                let name = &hyp.schema.features[feature].name;
                let token = hyp.schema.category_name(feature, category);
                if token == TRUE_TOKEN {
                    parts.push(format!("{name}(X)"));
                } else {
                    parts.push(format!("{name}(X, {})", quote(token)));
                }
            }
            Literal::NumericGt { feature, threshold } | Literal::NumericLe { feature, threshold } => {
                let next = vars.len() + 1;
                let k = *vars.entry(feature).or_insert(next);
                if !bound.contains(&feature) {
                    bound.push(feature);
                    parts.push(format!("{}(X, N{k})", hyp.schema.features[feature].name));
                }
                let op = if matches!(lit, Literal::NumericGt { .. }) { ">" } else { "=<" };
                parts.push(format!("N{k} {op} {threshold}"));
            }
            Literal::NotAbnormal(i) => parts.push(format!("not ab{i}(X)")),
        }
    }
    if !parts.is_empty() {
        out.push_str(" :- ");
        out.push_str(&parts.join(", "));
    }
    out.push_str(".\n");
}

fn is_bare(token: &str) -> bool {
    let lower_ident = token.starts_with(|c: char| c.is_ascii_lowercase())
        && token.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    let digits = !token.is_empty() && token.chars().all(|c| c.is_ascii_digit());
    lower_ident || digits
}

fn quote(token: &str) -> String {
    if is_bare(token) {
        token.to_string()
    } else {
        format!("'{}'", token.replace('\\', "\\\\").replace('\'', "\\'"))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Var(String),
    Number(String),
    Quoted(String),
    LParen,
    RParen,
    Comma,
    Dot,
    If,
    Gt,
    Le,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, HypothesisError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut line = 1;
    let mut i = 0;
    let perr = |line: usize, message: String| HypothesisError::Parse { line, message };
    while i < chars.len() {
        let c = chars[i];
        let next = chars.get(i + 1).copied();
        match c {
            '\n' => {
                line += 1;
                i += 1;
            }
            c if c.is_whitespace() => i += 1,
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' | ')' | ',' | '.' | '>' => {
                toks.push((
                    match c {
                        '(' => Tok::LParen,
                        ')' => Tok::RParen,
                        ',' => Tok::Comma,
                        '.' => Tok::Dot,
                        _ => Tok::Gt,
                    },
                    line,
                ));
                i += 1;
            }
            ':' if next == Some('-') => {
                toks.push((Tok::If, line));
                i += 2;
            }
            '=' if next == Some('<') => {
                toks.push((Tok::Le, line));
                i += 2;
            }
            '<' if next == Some('=') => {
                toks.push((Tok::Le, line));
                i += 2;
            }
            '\'' => {
                let mut s = String::new();
                i += 1;
                loop {
                    match chars.get(i) {
                        None => return Err(perr(line, "unterminated quoted constant".into())),
                        Some('\'') => break,
                        Some('\\') => {
                            s.extend(chars.get(i + 1));
                            i += 2;
                        }
                        Some(&ch) => {
                            if ch == '\n' {
                                line += 1;
                            }
                            s.push(ch);
                            i += 1;
                        }
                    }
                }
                i += 1;
                toks.push((Tok::Quoted(s), line));
            }
            c if c.is_ascii_digit() || (c == '-' && next.is_some_and(|n| n.is_ascii_digit())) => {
                let start = i;
                i += 1;
                while i < chars.len() {
                    let d = chars[i];
                    let digit_after = chars.get(i + 1).is_some_and(|n| n.is_ascii_digit());
                    if d.is_ascii_digit() || (d == '.' && digit_after) {
                        i += 1;
                    } else {
                        break;
                    }
                }
                toks.push((Tok::Number(chars[start..i].iter().collect()), line));
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                let tok = if c.is_uppercase() || c == '_' { Tok::Var(word) } else { Tok::Ident(word) };
                toks.push((tok, line));
            }
            other => return Err(perr(line, format!("unexpected character `{other}`"))),
        }
    }
    Ok(toks)
}

fn abnormal_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix("ab")?;
    if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

/// Feature table either fixed by a schema or grown while parsing.
struct Features {
    fixed: bool,
    features: Vec<Feature>,
}

impl Features {
    fn lookup(&mut self, name: &str, kind: FeatureKind) -> Result<usize, HypothesisError> {
        if let Some(i) = self.features.iter().position(|f| f.name == name) {
            if self.features[i].kind != kind {
                return Err(HypothesisError::UnknownFeature(name.to_string()));
            }
            return Ok(i);
        }
        if self.fixed {
            return Err(HypothesisError::UnknownFeature(name.to_string()));
        }
        self.features.push(match kind {
            FeatureKind::Numeric => Feature::numeric(name),
            FeatureKind::Categorical => Feature::categorical(name, Vec::<String>::new()),
        });
        Ok(self.features.len() - 1)
    }

    fn category(&mut self, feature: usize, token: &str) -> Result<u32, HypothesisError> {
        let f = &mut self.features[feature];
        if let Some(c) = f.category_index(token) {
            return Ok(c);
        }
        if self.fixed {
            return Err(HypothesisError::UnknownCategory { feature: f.name.clone(), category: token.into() });
        }
        f.categories.push(token.to_string());
        Ok(f.categories.len() as u32 - 1)
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn line(&self) -> usize {
        self.toks.get(self.pos).or(self.toks.last()).map_or(1, |t| t.1)
    }

    fn err(&self, message: impl Into<String>) -> HypothesisError {
        HypothesisError::Parse { line: self.line(), message: message.into() }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.pos + 1).map(|t| &t.0)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.0.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), HypothesisError> {
        match self.bump() {
            Some(t) if t == want => Ok(()),
            other => Err(self.err_at(format!("expected {want:?}, found {other:?}"))),
        }
    }

    fn err_at(&self, message: String) -> HypothesisError {
        let line = self.toks.get(self.pos.saturating_sub(1)).map_or(1, |t| t.1);
        HypothesisError::Parse { line, message }
    }

    fn ident(&mut self) -> Result<String, HypothesisError> {
        match self.bump() {
            Some(Tok::Ident(s)) => Ok(s),
            other => Err(self.err_at(format!("expected a predicate name, found {other:?}"))),
        }
    }

    fn constant(&mut self) -> Result<String, HypothesisError> {
        match self.bump() {
            Some(Tok::Ident(s) | Tok::Number(s) | Tok::Quoted(s)) => Ok(s),
            other => Err(self.err_at(format!("expected a constant, found {other:?}"))),
        }
    }
}

/// Parse rendered text back into a hypothesis. Without a schema, one is
/// inferred from the predicates used: `p(X)` and `p(X, c)` make categorical
/// features, `p(X, N)` numeric ones.
pub fn parse_asp(text: &str, schema: Option<&FeatureSchema>) -> Result<Hypothesis, HypothesisError> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let mut features = match schema {
        Some(s) => Features { fixed: true, features: s.features.clone() },
        None => Features { fixed: false, features: Vec::new() },
    };
    let mut pred_name: Option<String> = None;
    let mut target_rules = Vec::new();
    let mut noise_facts = Vec::new();
    let mut abnormal_rules: BTreeMap<usize, Vec<Rule>> = BTreeMap::new();
    let mut abnormal_facts: BTreeMap<usize, Vec<String>> = BTreeMap::new();

    while p.peek().is_some() {
        let name = p.ident()?;
        let head = match abnormal_index(&name) {
            Some(i) => Head::Abnormal(i),
            None => {
                match &pred_name {
                    Some(existing) if *existing != name => {
                        return Err(p.err_at(format!("head `{name}` differs from target `{existing}`")))
                    }
                    Some(_) => {}
                    None => pred_name = Some(name.clone()),
                }
                Head::Target
            }
        };
        p.expect(Tok::LParen)?;
        let arg = p.bump();
        p.expect(Tok::RParen)?;
        match arg {
            Some(Tok::Var(_)) => {}
            Some(Tok::Ident(s) | Tok::Number(s) | Tok::Quoted(s)) => {
                p.expect(Tok::Dot)?;
                match head {
                    Head::Target => noise_facts.push(s),
                    Head::Abnormal(i) => abnormal_facts.entry(i).or_default().push(s),
                }
                continue;
            }
            other => return Err(p.err_at(format!("expected a variable or constant, found {other:?}"))),
        }
        let mut body = Vec::new();
        if p.peek() == Some(&Tok::If) {
            p.bump();
            let mut vars: HashMap<String, usize> = HashMap::new();
            loop {
                parse_literal(&mut p, &mut features, &mut vars, &mut body)?;
                match p.bump() {
                    Some(Tok::Comma) => continue,
                    Some(Tok::Dot) => break,
                    other => return Err(p.err_at(format!("expected `,` or `.`, found {other:?}"))),
                }
            }
        } else {
            p.expect(Tok::Dot)?;
        }
        let rule = Rule::new(head, body);
        match head {
            Head::Target => target_rules.push(rule),
            Head::Abnormal(i) => abnormal_rules.entry(i).or_default().push(rule),
        }
    }

    let schema = match schema {
        Some(s) => Arc::new(s.clone()),
        None => {
            let target = pred_name.clone().unwrap_or_else(|| "target".into());
            let mut fs = features.features;
            for f in fs.iter_mut().filter(|f| f.kind == FeatureKind::Categorical && f.categories.is_empty()) {
                f.categories.push(TRUE_TOKEN.into());
            }
            Arc::new(FeatureSchema::new(fs, target, TRUE_TOKEN).map_err(|e| HypothesisError::Parse {
                line: 1,
                message: e.to_string(),
            })?)
        }
    };
    let hyp = Hypothesis {
        pred_name: pred_name.unwrap_or_else(|| schema.target.clone()),
        schema,
        target_rules,
        abnormal_rules,
        noise_facts,
        abnormal_facts,
    };
    hyp.validate()?;
    Ok(hyp)
}

fn parse_literal(
    p: &mut Parser,
    features: &mut Features,
    vars: &mut HashMap<String, usize>,
    body: &mut Vec<Literal>,
) -> Result<(), HypothesisError> {
    match (p.peek().cloned(), p.peek2().cloned()) {
        (Some(Tok::Ident(word)), Some(Tok::Ident(_))) if word == "not" => {
            p.bump();
            let name = p.ident()?;
            let i = abnormal_index(&name).ok_or_else(|| p.err_at(format!("`not` applies only to abI, found `{name}`")))?;
            p.expect(Tok::LParen)?;
            match p.bump() {
                Some(Tok::Var(_)) => {}
                other => return Err(p.err_at(format!("expected a variable, found {other:?}"))),
            }
            p.expect(Tok::RParen)?;
            body.push(Literal::NotAbnormal(i));
        }
        (Some(Tok::Var(v)), _) => {
            p.bump();
            let feature = *vars.get(&v).ok_or_else(|| p.err_at(format!("variable {v} is not bound")))?;
            let gt = match p.bump() {
                Some(Tok::Gt) => true,
                Some(Tok::Le) => false,
                other => return Err(p.err_at(format!("expected `>` or `=<`, found {other:?}"))),
            };
            let threshold = match p.bump() {
                Some(Tok::Number(n)) => n.parse::<f64>().map_err(|e| p.err_at(e.to_string()))?,
                other => return Err(p.err_at(format!("expected a number, found {other:?}"))),
            };
            body.push(if gt {
                Literal::NumericGt { feature, threshold }
            } else {
                Literal::NumericLe { feature, threshold }
            });
        }
        (Some(Tok::Ident(_)), _) => {
            let name = p.ident()?;
            p.expect(Tok::LParen)?;
            match p.bump() {
                Some(Tok::Var(_)) => {}
                other => return Err(p.err_at(format!("expected a variable, found {other:?}"))),
            }
            if p.peek() == Some(&Tok::RParen) {
                p.bump();
                let feature = features.lookup(&name, FeatureKind::Categorical)?;
                let category = features.category(feature, TRUE_TOKEN)?;
                body.push(Literal::CategoricalEq { feature, category });
                return Ok(());
            }
            p.expect(Tok::Comma)?;
            if let Some(Tok::Var(v)) = p.peek().cloned() {
                p.bump();
                p.expect(Tok::RParen)?;
                let feature = features.lookup(&name, FeatureKind::Numeric)?;
                vars.insert(v, feature);
                return Ok(());
            }
            let token = p.constant()?;
            p.expect(Tok::RParen)?;
            let feature = features.lookup(&name, FeatureKind::Categorical)?;
            let category = features.category(feature, &token)?;
            body.push(Literal::CategoricalEq { feature, category });
        }
        (other, _) => return Err(p.err(format!("expected a body literal, found {other:?}"))),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypothesis::tests::{penguin_schema, penguin_theory};
    use proptest::prelude::*;

    const PENGUIN: &str = "fly(X) :- bird(X), not ab0(X).\nab0(X) :- penguin(X).\n";

    #[test]
    fn penguin_text() {
        assert_eq!(render_asp(&penguin_theory()), PENGUIN);
        let parsed = parse_asp(PENGUIN, Some(&penguin_schema())).unwrap();
        assert_eq!(parsed, penguin_theory());
    }

    #[test]
    fn empty_hypothesis_is_empty_text() {
        assert_eq!(render_asp(&Hypothesis::empty(penguin_schema())), "");
        let parsed = parse_asp("", Some(&penguin_schema())).unwrap();
        assert!(parsed.is_empty());
    }

    const BREAST: &str = "\
mt(X) :- clump_thickness(X, N1), N1 > 3, N1 =< 4, not ab1(X), not ab2(X).
ab1(X) :- cell_shape_uniformity(X, N2), N2 > 1, N2 =< 2, normal_nucleoli(X, N3), N3 > 1, N3 =< 2.
ab2(X) :- cell_shape_uniformity(X, N2), N2 > 1, N2 =< 2, marginal_adhesion(X, N4), N4 =< 1, bare_nuclei(X, N5), N5 =< 1, bland_chromatin(X, N6), N6 > 2, N6 =< 3.
";

    #[test]
    fn numeric_variables_are_shared_per_feature() {
        let h = parse_asp(BREAST, None).unwrap();
        assert_eq!(h.pred_name, "mt");
        assert_eq!(h.rule_count(), 3);
        assert_eq!(h.schema.features[0].name, "clump_thickness");
        assert!(h.schema.features.iter().all(|f| f.kind == FeatureKind::Numeric));
        assert_eq!(render_asp(&h), BREAST);
    }

    #[test]
    fn loose_spacing_and_le_spelling() {
        let text = "mt(X) :-bare_nuclei(X, N1), N1 > 9, N1 <= 10.\n";
        let h = parse_asp(text, None).unwrap();
        assert_eq!(render_asp(&h), "mt(X) :- bare_nuclei(X, N1), N1 > 9, N1 =< 10.\n");
    }

    #[test]
    fn facts_and_quoted_constants() {
        let text = "heart(X) :- chest_pain(X, 'typical ang'), not ab0(X).\nheart(17).\nheart('it\\'s').\nab0(kitty).\n";
        let h = parse_asp(text, None).unwrap();
        assert_eq!(h.noise_facts, ["17", "it's"]);
        assert_eq!(render_asp(&h), text);
    }

    #[test]
    fn parse_errors_carry_lines() {
        let e = parse_asp("fly(X) :- bird(X).\nfly(X) :- N1 > 3.\n", None).unwrap_err();
        assert!(matches!(e, HypothesisError::Parse { line: 2, .. }));
        let e = parse_asp("fly(X) :- bird(X)\n", None).unwrap_err();
        assert!(matches!(e, HypothesisError::Parse { line: 1, .. }));
        let e = parse_asp("fly(X) :- bird(X), not ab3(X).\n", None).unwrap_err();
        assert_eq!(e, HypothesisError::DanglingAbnormal(3));
        let e = parse_asp("fly(X) :- dog(X).\n", Some(&penguin_schema())).unwrap_err();
        assert_eq!(e, HypothesisError::UnknownFeature("dog".into()));
        let e = parse_asp("fly(X) :- bird(X).\nswim(X) :- cat(X).\n", None).unwrap_err();
        assert!(matches!(e, HypothesisError::Parse { line: 2, .. }));
    }

    fn schema() -> FeatureSchema {
        FeatureSchema::new(
            vec![
                Feature::categorical("color", ["true", "red", "dark blue", "7"]),
                Feature::numeric("size"),
                Feature::numeric("weight"),
                Feature::categorical("flag", ["true"]),
            ],
            "target",
            "yes",
        )
        .unwrap()
    }

    fn literal(ab_limit: usize) -> impl Strategy<Value = Literal> {
        let threshold = prop_oneof![(-1000i32..1000).prop_map(|v| v as f64 / 8.0), -1e6f64..1e6];
        let mut options = vec![
            (0u32..4).prop_map(|c| Literal::CategoricalEq { feature: 0, category: c }).boxed(),
            Just(Literal::CategoricalEq { feature: 3, category: 0 }).boxed(),
            (1usize..3, threshold.clone()).prop_map(|(f, t)| Literal::NumericGt { feature: f, threshold: t }).boxed(),
            (1usize..3, threshold).prop_map(|(f, t)| Literal::NumericLe { feature: f, threshold: t }).boxed(),
        ];
        if ab_limit > 0 {
            options.push((0..ab_limit).prop_map(Literal::NotAbnormal).boxed());
        }
        proptest::strategy::Union::new(options)
    }

    prop_compose! {
        fn hypothesis()(
            target in prop::collection::vec(prop::collection::vec(literal(3), 0..5), 0..4),
            ab in prop::collection::vec(
                (prop::collection::vec(prop::collection::vec(literal(0), 1..4), 0..3),
                 prop::collection::vec("[a-z0-9 ']{1,6}", 0..3)),
                3),
            noise in prop::collection::vec("[A-Za-z0-9_ ]{1,6}", 0..3),
        ) -> Hypothesis {
            let mut h = Hypothesis::empty(Arc::new(schema()));
            h.target_rules = target.into_iter().map(|b| Rule::new(Head::Target, b)).collect();
            for (i, (rules, facts)) in ab.into_iter().enumerate() {
                let (rules, mut facts) = (rules, facts);
                if rules.is_empty() && facts.is_empty() {
                    facts.push(format!("e{i}"));
                }
                if !rules.is_empty() {
                    h.abnormal_rules.insert(i, rules.into_iter().map(|b| Rule::new(Head::Abnormal(i), b)).collect());
                }
                if !facts.is_empty() {
                    h.abnormal_facts.insert(i, facts);
                }
            }
            h.noise_facts = noise;
            h
        }
    }

    proptest! {
        #[test]
        fn render_parse_render(h in hypothesis()) {
            let text = render_asp(&h);
            let parsed = parse_asp(&text, Some(&h.schema)).unwrap();
            prop_assert_eq!(&parsed, &h);
            prop_assert_eq!(render_asp(&parsed), text);
        }
    }
}
