//! Sequents with a classical body and an intuitionistic stoup, rule-labeled
//! derivation trees, and a checker enforcing every structural and policy
//! side condition.
//!
//! A sequent `Γ |- Δ ; Π` has an antecedent Γ, a body Δ restricted to
//! policy members, and a stoup Π holding at most one formula. Rules whose
//! schema displays a stoup formula (`and1_l`, `or1_l`, `imp1_l`) require an
//! occupied stoup; rules displaying Π accept either. Context splitting in
//! two-premise rules is read off the premises, and the checker verifies the
//! conclusion equals the schema-prescribed recombination, searching over
//! principal-occurrence choices where the multiset matching is ambiguous.
//! An optional `:principal` annotation short-circuits that search.

use std::fmt;

use crate::formula::{parse_formula, parse_formula_list, Formula, ParseError, Policy};
use crate::multiset::Multiset;
use crate::sexpr::{self, Sexpr};

/// The `Γ ⊢ Δ ; Π` judgment. The stoup holds at most one formula by
/// representation.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct PSequent {
    pub antecedent: Multiset<Formula>,
    pub body: Multiset<Formula>,
    pub stoup: Option<Formula>,
}

impl PSequent {
    pub fn new(
        antecedent: impl IntoIterator<Item = Formula>,
        body: impl IntoIterator<Item = Formula>,
        stoup: Option<Formula>,
    ) -> Self {
        PSequent {
            antecedent: antecedent.into_iter().collect(),
            body: body.into_iter().collect(),
            stoup,
        }
    }

    /// First body member outside the policy, if any.
    pub fn body_violation(&self, policy: &Policy) -> Option<&Formula> {
        self.body.distinct().find(|f| !policy.contains(f))
    }

    /// Parses `G |- D ; S`; empty segments are allowed.
    pub fn parse(input: &str) -> Result<PSequent, ParseError> {
        let turnstile = input.find("|-").ok_or_else(|| ParseError {
            pos: input.len(),
            msg: "expected `|-`".to_string(),
        })?;
        let left = &input[..turnstile];
        let right = &input[turnstile + 2..];
        let semi = right.find(';').ok_or_else(|| ParseError {
            pos: input.len(),
            msg: "expected `;` separating body and stoup".to_string(),
        })?;
        let body_text = &right[..semi];
        let stoup_text = right[semi + 1..].trim();
        let antecedent = parse_formula_list(left)?.into_iter().collect();
        let body = parse_formula_list(body_text)?.into_iter().collect();
        let stoup = if stoup_text.is_empty() {
            None
        } else {
            Some(parse_formula(stoup_text)?)
        };
        Ok(PSequent {
            antecedent,
            body,
            stoup,
        })
    }
}

impl fmt::Display for PSequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.antecedent.is_empty() {
            write!(f, "{} ", self.antecedent)?;
        }
        write!(f, "|-")?;
        if !self.body.is_empty() {
            write!(f, " {}", self.body)?;
        }
        write!(f, " ;")?;
        if let Some(s) = &self.stoup {
            write!(f, " {s}")?;
        }
        Ok(())
    }
}

/// The 27 rules of the calculus.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Rule {
    Ax,
    Cut1,
    Cut2,
    Der,
    CL,
    CR,
    WL,
    WR,
    Zero,
    Bot,
    And1L,
    And2L,
    And1R,
    And2R,
    And3R,
    And4R,
    Or1L,
    Or2L,
    Or1R,
    Or2R,
    Or3R,
    Or4R,
    Imp1L,
    Imp2L,
    Imp3L,
    Imp1R,
    Imp2R,
}

pub const ALL_RULES: [Rule; 27] = [
    Rule::Ax,
    Rule::Cut1,
    Rule::Cut2,
    Rule::Der,
    Rule::CL,
    Rule::CR,
    Rule::WL,
    Rule::WR,
    Rule::Zero,
    Rule::Bot,
    Rule::And1L,
    Rule::And2L,
    Rule::And1R,
    Rule::And2R,
    Rule::And3R,
    Rule::And4R,
    Rule::Or1L,
    Rule::Or2L,
    Rule::Or1R,
    Rule::Or2R,
    Rule::Or3R,
    Rule::Or4R,
    Rule::Imp1L,
    Rule::Imp2L,
    Rule::Imp3L,
    Rule::Imp1R,
    Rule::Imp2R,
];

impl Rule {
    pub fn tag(self) -> &'static str {
        match self {
            Rule::Ax => "ax",
            Rule::Cut1 => "cut1",
            Rule::Cut2 => "cut2",
            Rule::Der => "der",
            Rule::CL => "c_l",
            Rule::CR => "c_r",
            Rule::WL => "w_l",
            Rule::WR => "w_r",
            Rule::Zero => "zero",
            Rule::Bot => "bot",
            Rule::And1L => "and1_l",
            Rule::And2L => "and2_l",
            Rule::And1R => "and1_r",
            Rule::And2R => "and2_r",
            Rule::And3R => "and3_r",
            Rule::And4R => "and4_r",
            Rule::Or1L => "or1_l",
            Rule::Or2L => "or2_l",
            Rule::Or1R => "or1_r",
            Rule::Or2R => "or2_r",
            Rule::Or3R => "or3_r",
            Rule::Or4R => "or4_r",
            Rule::Imp1L => "imp1_l",
            Rule::Imp2L => "imp2_l",
            Rule::Imp3L => "imp3_l",
            Rule::Imp1R => "imp1_r",
            Rule::Imp2R => "imp2_r",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Rule> {
        ALL_RULES.iter().copied().find(|r| r.tag() == tag)
    }

    pub fn arity(self) -> usize {
        match self {
            Rule::Ax | Rule::Zero | Rule::Bot => 0,
            Rule::Der
            | Rule::CL
            | Rule::CR
            | Rule::WL
            | Rule::WR
            | Rule::And1L
            | Rule::And2L
            | Rule::Or1R
            | Rule::Or2R
            | Rule::Or3R
            | Rule::Or4R
            | Rule::Imp1R
            | Rule::Imp2R => 1,
            Rule::Cut1
            | Rule::Cut2
            | Rule::And1R
            | Rule::And2R
            | Rule::And3R
            | Rule::And4R
            | Rule::Or1L
            | Rule::Or2L
            | Rule::Imp1L
            | Rule::Imp2L
            | Rule::Imp3L => 2,
        }
    }

    pub fn is_cut(self) -> bool {
        matches!(self, Rule::Cut1 | Rule::Cut2)
    }

    /// Right logical rules: these introduce the conclusion's stoup formula.
    pub fn is_right_logical(self) -> bool {
        matches!(
            self,
            Rule::And1R
                | Rule::And2R
                | Rule::And3R
                | Rule::And4R
                | Rule::Or1R
                | Rule::Or2R
                | Rule::Or3R
                | Rule::Or4R
                | Rule::Imp1R
                | Rule::Imp2R
        )
    }

    /// Left logical rules: these decompose an antecedent formula.
    pub fn is_left_logical(self) -> bool {
        matches!(
            self,
            Rule::And1L
                | Rule::And2L
                | Rule::Or1L
                | Rule::Or2L
                | Rule::Imp1L
                | Rule::Imp2L
                | Rule::Imp3L
        )
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.tag())
    }
}

/// A rule-labeled proof tree. The optional `principal` annotation names the
/// formula occurrence the rule acts on, short-circuiting the checker's
/// search when the multiset matching is ambiguous.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Derivation {
    pub conclusion: PSequent,
    pub rule: Rule,
    pub principal: Option<Formula>,
    pub premises: Vec<Derivation>,
}

impl Derivation {
    pub fn conclusion(&self) -> &PSequent {
        &self.conclusion
    }

    pub fn is_cut_free(&self) -> bool {
        !self.rule.is_cut() && self.premises.iter().all(Derivation::is_cut_free)
    }

    pub fn node_at(&self, path: &[usize]) -> Option<&Derivation> {
        let mut node = self;
        for &i in path {
            node = node.premises.get(i)?;
        }
        Some(node)
    }

    pub fn count_nodes(&self) -> usize {
        1 + self.premises.iter().map(Derivation::count_nodes).sum::<usize>()
    }

    /// Calls `f` on every node with its path from the root.
    pub fn visit<F: FnMut(&[usize], &Derivation)>(&self, f: &mut F) {
        fn go<F: FnMut(&[usize], &Derivation)>(
            d: &Derivation,
            path: &mut Vec<usize>,
            f: &mut F,
        ) {
            f(path, d);
            for (i, p) in d.premises.iter().enumerate() {
                path.push(i);
                go(p, path, f);
                path.pop();
            }
        }
        go(self, &mut Vec::new(), f);
    }

    /// Every distinct formula occurring in any sequent of the tree.
    pub fn all_formulas(&self) -> crate::formula::FormulaSet {
        let mut out = crate::formula::FormulaSet::new();
        self.visit(&mut |_, d| {
            let c = &d.conclusion;
            out.extend(c.antecedent.distinct().cloned());
            out.extend(c.body.distinct().cloned());
            if let Some(s) = &c.stoup {
                out.insert(s.clone());
            }
        });
        out
    }
}

/// Path of premise indices from the root; empty for the root itself.
pub fn path_display(path: &[usize]) -> String {
    if path.is_empty() {
        "root".to_string()
    } else {
        path.iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join(".")
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CheckFailure {
    pub path: Vec<usize>,
    pub message: String,
}

impl fmt::Display for CheckFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", path_display(&self.path), self.message)
    }
}

/// Result of checking a derivation; ok iff no failures.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct CheckReport {
    pub failures: Vec<CheckFailure>,
}

impl CheckReport {
    pub fn is_ok(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            write!(f, "ok")
        } else {
            for (i, fail) in self.failures.iter().enumerate() {
                if i > 0 {
                    writeln!(f)?;
                }
                write!(f, "{fail}")?;
            }
            Ok(())
        }
    }
}

/// Checks every node of the derivation against its rule schema and the
/// policy side conditions, collecting all failures.
pub fn check_derivation(d: &Derivation, policy: &Policy) -> CheckReport {
    let mut report = CheckReport::default();
    let mut path = Vec::new();
    check_node(d, policy, &mut path, &mut report);
    report
}

fn check_node(
    d: &Derivation,
    policy: &Policy,
    path: &mut Vec<usize>,
    report: &mut CheckReport,
) {
    if let Some(f) = d.conclusion.body_violation(policy) {
        report.failures.push(CheckFailure {
            path: path.clone(),
            message: format!("body formula `{f}` is not in P"),
        });
    }
    if d.premises.len() != d.rule.arity() {
        report.failures.push(CheckFailure {
            path: path.clone(),
            message: format!(
                "rule {} expects {} premise(s), found {}",
                d.rule,
                d.rule.arity(),
                d.premises.len()
            ),
        });
    } else if let Err(msg) = validate_node(d, policy) {
        report.failures.push(CheckFailure {
            path: path.clone(),
            message: msg,
        });
    }
    for (i, p) in d.premises.iter().enumerate() {
        path.push(i);
        check_node(p, policy, path, report);
        path.pop();
    }
}

/// Identifies the principal formula of a correct node: the formula the last
/// rule introduces, decomposes, cuts, or moves. None for `zero` and `bot`.
pub fn node_principal(d: &Derivation, policy: &Policy) -> Option<Formula> {
    validate_node(d, policy).ok().flatten()
}

/// Validates one node (premise conclusions against the rule schema) and
/// returns the identified principal formula.
pub fn validate_node(d: &Derivation, policy: &Policy) -> Result<Option<Formula>, String> {
    let c = &d.conclusion;
    let prem = &d.premises;
    let eq = |name: &str, got: &PSequent, want: &PSequent| -> Result<(), String> {
        if got == want {
            Ok(())
        } else {
            Err(format!(
                "{name}: conclusion `{got}` does not match schema recombination `{want}`"
            ))
        }
    };
    match d.rule {
        Rule::Ax => {
            let a = c.stoup.as_ref().ok_or("ax: stoup must be occupied")?;
            let want = PSequent::new([a.clone()], [], Some(a.clone()));
            eq("ax", c, &want)?;
            Ok(Some(a.clone()))
        }
        Rule::Cut1 => {
            let (p, q) = (&prem[0].conclusion, &prem[1].conclusion);
            let a = p
                .stoup
                .as_ref()
                .ok_or("cut1: left premise stoup must carry the cut formula")?;
            let q_ant = q
                .antecedent
                .minus_one(a)
                .ok_or_else(|| format!("cut1: cut formula `{a}` not in right antecedent"))?;
            let want = PSequent {
                antecedent: p.antecedent.union(&q_ant),
                body: p.body.union(&q.body),
                stoup: q.stoup.clone(),
            };
            eq("cut1", c, &want)?;
            Ok(Some(a.clone()))
        }
        Rule::Cut2 => {
            let (p, q) = (&prem[0].conclusion, &prem[1].conclusion);
            if q.stoup.is_some() {
                return Err("cut2: right premise stoup must be empty".to_string());
            }
            let candidates: Vec<Formula> = match &d.principal {
                Some(a) => vec![a.clone()],
                None => p
                    .body
                    .distinct()
                    .filter(|a| q.antecedent.contains(a))
                    .cloned()
                    .collect(),
            };
            let mut last = "cut2: no cut-formula candidate".to_string();
            for a in candidates {
                let (p_body, q_ant) = match (p.body.minus_one(&a), q.antecedent.minus_one(&a)) {
                    (Some(x), Some(y)) => (x, y),
                    _ => {
                        last = format!(
                            "cut2: `{a}` must occur in left body and right antecedent"
                        );
                        continue;
                    }
                };
                let want = PSequent {
                    antecedent: p.antecedent.union(&q_ant),
                    body: p_body.union(&q.body),
                    stoup: p.stoup.clone(),
                };
                match eq("cut2", c, &want) {
                    Ok(()) => return Ok(Some(a)),
                    Err(e) => last = e,
                }
            }
            Err(last)
        }
        Rule::Der => {
            let p = &prem[0].conclusion;
            let a = p
                .stoup
                .as_ref()
                .ok_or("der: premise stoup must be occupied")?;
            if !policy.contains(a) {
                return Err(format!("der: `{a}` is not in P"));
            }
            let mut body = p.body.clone();
            body.insert(a.clone());
            let want = PSequent {
                antecedent: p.antecedent.clone(),
                body,
                stoup: None,
            };
            eq("der", c, &want)?;
            Ok(Some(a.clone()))
        }
        Rule::CL => {
            let p = &prem[0].conclusion;
            if p.body != c.body || p.stoup != c.stoup {
                return Err("c_l: body and stoup must be unchanged".to_string());
            }
            let diff = p
                .antecedent
                .minus(&c.antecedent)
                .filter(|m| m.len() == 1)
                .ok_or("c_l: premise antecedent must extend the conclusion by one copy")?;
            let a = diff.iter().next().unwrap().clone();
            if !c.antecedent.contains(&a) {
                return Err(format!("c_l: contracted formula `{a}` must remain present"));
            }
            Ok(Some(a))
        }
        Rule::CR => {
            let p = &prem[0].conclusion;
            if p.antecedent != c.antecedent || p.stoup != c.stoup {
                return Err("c_r: antecedent and stoup must be unchanged".to_string());
            }
            let diff = p
                .body
                .minus(&c.body)
                .filter(|m| m.len() == 1)
                .ok_or("c_r: premise body must extend the conclusion by one copy")?;
            let a = diff.iter().next().unwrap().clone();
            if !c.body.contains(&a) {
                return Err(format!("c_r: contracted formula `{a}` must remain present"));
            }
            Ok(Some(a))
        }
        Rule::WL => {
            let p = &prem[0].conclusion;
            if p.body != c.body || p.stoup != c.stoup {
                return Err("w_l: body and stoup must be unchanged".to_string());
            }
            let diff = c
                .antecedent
                .minus(&p.antecedent)
                .filter(|m| m.len() == 1)
                .ok_or("w_l: conclusion antecedent must extend the premise by one formula")?;
            let a = diff.iter().next().unwrap().clone();
            Ok(Some(a))
        }
        Rule::WR => {
            let p = &prem[0].conclusion;
            if p.antecedent != c.antecedent || p.stoup != c.stoup {
                return Err("w_r: antecedent and stoup must be unchanged".to_string());
            }
            let diff = c
                .body
                .minus(&p.body)
                .filter(|m| m.len() == 1)
                .ok_or("w_r: conclusion body must extend the premise by one formula")?;
            let a = diff.iter().next().unwrap().clone();
            if !policy.contains(&a) {
                return Err(format!("w_r: `{a}` is not in P"));
            }
            Ok(Some(a))
        }
        Rule::Zero => {
            if !c.antecedent.contains(&Formula::Zero) {
                return Err("zero: antecedent must contain 0".to_string());
            }
            Ok(Some(Formula::Zero))
        }
        Rule::Bot => {
            let want = PSequent::new([Formula::Bot], [], None);
            eq("bot", c, &want)?;
            Ok(Some(Formula::Bot))
        }
        Rule::And1L | Rule::And2L => {
            let name = d.rule.tag();
            let p = &prem[0].conclusion;
            if d.rule == Rule::And1L {
                if c.stoup.is_none() {
                    return Err(format!("{name}: stoup must be occupied"));
                }
            } else if c.stoup.is_some() {
                return Err(format!("{name}: stoup must be empty"));
            }
            if p.stoup != c.stoup || p.body != c.body {
                return Err(format!("{name}: body and stoup must be unchanged"));
            }
            try_candidates(d, c.antecedent.distinct(), |f| {
                let (a, b) = match f {
                    Formula::And(a, b) => (a.as_ref(), b.as_ref()),
                    _ => return Err(format!("{name}: principal `{f}` is not a conjunction")),
                };
                if d.rule == Rule::And1L {
                    if policy.contains(a) {
                        return Err(format!("{name}: side condition `{a} not in P` violated"));
                    }
                    if policy.contains(b) {
                        return Err(format!("{name}: side condition `{b} not in P` violated"));
                    }
                }
                let mut want_ant = c
                    .antecedent
                    .minus_one(f)
                    .ok_or_else(|| format!("{name}: `{f}` not in conclusion antecedent"))?;
                want_ant.insert(a.clone());
                want_ant.insert(b.clone());
                if p.antecedent != want_ant {
                    return Err(format!(
                        "{name}: premise antecedent does not match decomposition of `{f}`"
                    ));
                }
                Ok(())
            })
        }
        Rule::And1R | Rule::And2R | Rule::And3R | Rule::And4R => {
            let name = d.rule.tag();
            let (p, q) = (&prem[0].conclusion, &prem[1].conclusion);
            let (a, b) = match &c.stoup {
                Some(Formula::And(a, b)) => (a.as_ref().clone(), b.as_ref().clone()),
                _ => return Err(format!("{name}: conclusion stoup must be a conjunction")),
            };
            // Where each component must sit in its premise.
            let (p_body, q_body) = match d.rule {
                Rule::And1R => {
                    if p.stoup.as_ref() != Some(&a) || q.stoup.as_ref() != Some(&b) {
                        return Err(format!(
                            "{name}: premise stoups must carry the components"
                        ));
                    }
                    (p.body.clone(), q.body.clone())
                }
                Rule::And2R => {
                    if p.stoup.is_some() || q.stoup.is_some() {
                        return Err(format!("{name}: premise stoups must be empty"));
                    }
                    let pb = p.body.minus_one(&a).ok_or_else(|| {
                        format!("{name}: `{a}` not in left premise body")
                    })?;
                    let qb = q.body.minus_one(&b).ok_or_else(|| {
                        format!("{name}: `{b}` not in right premise body")
                    })?;
                    (pb, qb)
                }
                Rule::And3R => {
                    if p.stoup.as_ref() != Some(&a) {
                        return Err(format!("{name}: left premise stoup must carry `{a}`"));
                    }
                    if q.stoup.is_some() {
                        return Err(format!("{name}: right premise stoup must be empty"));
                    }
                    let qb = q.body.minus_one(&b).ok_or_else(|| {
                        format!("{name}: `{b}` not in right premise body")
                    })?;
                    (p.body.clone(), qb)
                }
                Rule::And4R => {
                    if p.stoup.is_some() {
                        return Err(format!("{name}: left premise stoup must be empty"));
                    }
                    if q.stoup.as_ref() != Some(&b) {
                        return Err(format!("{name}: right premise stoup must carry `{b}`"));
                    }
                    let pb = p.body.minus_one(&a).ok_or_else(|| {
                        format!("{name}: `{a}` not in left premise body")
                    })?;
                    (pb, q.body.clone())
                }
                _ => unreachable!(),
            };
            let want = PSequent {
                antecedent: p.antecedent.union(&q.antecedent),
                body: p_body.union(&q_body),
                stoup: c.stoup.clone(),
            };
            eq(name, c, &want)?;
            Ok(c.stoup.clone())
        }
        Rule::Or1L | Rule::Or2L => {
            let name = d.rule.tag();
            let (p, q) = (&prem[0].conclusion, &prem[1].conclusion);
            if d.rule == Rule::Or1L {
                if c.stoup.is_none() {
                    return Err(format!("{name}: stoup must be occupied"));
                }
            } else if c.stoup.is_some() {
                return Err(format!("{name}: stoup must be empty"));
            }
            if p.stoup != c.stoup || q.stoup != c.stoup {
                return Err(format!("{name}: premise stoups must match the conclusion"));
            }
            if p.body != c.body || q.body != c.body {
                return Err(format!("{name}: bodies must be shared"));
            }
            try_candidates(d, c.antecedent.distinct(), |f| {
                let (a, b) = match f {
                    Formula::Or(a, b) => (a.as_ref(), b.as_ref()),
                    _ => return Err(format!("{name}: principal `{f}` is not a disjunction")),
                };
                if d.rule == Rule::Or1L {
                    if policy.contains(a) {
                        return Err(format!("{name}: side condition `{a} not in P` violated"));
                    }
                    if policy.contains(b) {
                        return Err(format!("{name}: side condition `{b} not in P` violated"));
                    }
                }
                let shared = c
                    .antecedent
                    .minus_one(f)
                    .ok_or_else(|| format!("{name}: `{f}` not in conclusion antecedent"))?;
                let mut want_p = shared.clone();
                want_p.insert(a.clone());
                let mut want_q = shared;
                want_q.insert(b.clone());
                if p.antecedent != want_p || q.antecedent != want_q {
                    return Err(format!(
                        "{name}: premise antecedents do not match case split on `{f}`"
                    ));
                }
                Ok(())
            })
        }
        Rule::Or1R | Rule::Or2R => {
            let name = d.rule.tag();
            let p = &prem[0].conclusion;
            let (a, b) = match &c.stoup {
                Some(Formula::Or(a, b)) => (a.as_ref(), b.as_ref()),
                _ => return Err(format!("{name}: conclusion stoup must be a disjunction")),
            };
            let component = if d.rule == Rule::Or1R { a } else { b };
            let want = PSequent {
                antecedent: c.antecedent.clone(),
                body: c.body.clone(),
                stoup: Some(component.clone()),
            };
            eq(name, p, &want).map_err(|_| {
                format!("{name}: premise must be the conclusion with stoup `{component}`")
            })?;
            Ok(c.stoup.clone())
        }
        Rule::Or3R | Rule::Or4R => {
            let name = d.rule.tag();
            let p = &prem[0].conclusion;
            let (a, b) = match &c.stoup {
                Some(Formula::Or(a, b)) => (a.as_ref(), b.as_ref()),
                _ => return Err(format!("{name}: conclusion stoup must be a disjunction")),
            };
            let component = if d.rule == Rule::Or3R { a } else { b };
            let mut want_body = c.body.clone();
            want_body.insert(component.clone());
            let want = PSequent {
                antecedent: c.antecedent.clone(),
                body: want_body,
                stoup: None,
            };
            eq(name, p, &want).map_err(|_| {
                format!("{name}: premise must carry `{component}` in the body, stoup empty")
            })?;
            Ok(c.stoup.clone())
        }
        Rule::Imp1L | Rule::Imp2L => {
            let name = d.rule.tag();
            let (p, q) = (&prem[0].conclusion, &prem[1].conclusion);
            if d.rule == Rule::Imp1L {
                if c.stoup.is_none() {
                    return Err(format!("{name}: stoup must be occupied"));
                }
            } else if c.stoup.is_some() {
                return Err(format!("{name}: stoup must be empty"));
            }
            if p.stoup != c.stoup {
                return Err(format!("{name}: left premise stoup must match the conclusion"));
            }
            let a = q
                .stoup
                .as_ref()
                .ok_or_else(|| format!("{name}: right premise stoup must carry the argument"))?;
            try_candidates(d, c.antecedent.distinct(), |f| {
                let b = match f {
                    Formula::Imp(fa, fb) if fa.as_ref() == a => fb.as_ref(),
                    _ => {
                        return Err(format!(
                            "{name}: principal `{f}` is not an implication with argument `{a}`"
                        ))
                    }
                };
                if d.rule == Rule::Imp1L && policy.contains(b) {
                    return Err(format!("{name}: side condition `{b} not in P` violated"));
                }
                let p_ant = p
                    .antecedent
                    .minus_one(b)
                    .ok_or_else(|| format!("{name}: `{b}` not in left premise antecedent"))?;
                let mut want_ant = p_ant.union(&q.antecedent);
                want_ant.insert(f.clone());
                let want = PSequent {
                    antecedent: want_ant,
                    body: p.body.union(&q.body),
                    stoup: c.stoup.clone(),
                };
                if c != &want {
                    return Err(format!(
                        "{name}: conclusion does not match schema recombination for `{f}`"
                    ));
                }
                Ok(())
            })
        }
        Rule::Imp3L => {
            let (p, q) = (&prem[0].conclusion, &prem[1].conclusion);
            if p.stoup.is_some() {
                return Err("imp3_l: left premise stoup must be empty".to_string());
            }
            if c.stoup != q.stoup {
                return Err("imp3_l: conclusion stoup must come from the right premise".to_string());
            }
            try_candidates(d, c.antecedent.distinct(), |f| {
                let (a, b) = match f {
                    Formula::Imp(a, b) => (a.as_ref(), b.as_ref()),
                    _ => return Err(format!("imp3_l: principal `{f}` is not an implication")),
                };
                let p_ant = p
                    .antecedent
                    .minus_one(b)
                    .ok_or_else(|| format!("imp3_l: `{b}` not in left premise antecedent"))?;
                let q_body = q
                    .body
                    .minus_one(a)
                    .ok_or_else(|| format!("imp3_l: `{a}` not in right premise body"))?;
                let mut want_ant = p_ant.union(&q.antecedent);
                want_ant.insert(f.clone());
                let want = PSequent {
                    antecedent: want_ant,
                    body: p.body.union(&q_body),
                    stoup: c.stoup.clone(),
                };
                if c != &want {
                    return Err(format!(
                        "imp3_l: conclusion does not match schema recombination for `{f}`"
                    ));
                }
                Ok(())
            })
        }
        Rule::Imp1R | Rule::Imp2R => {
            let name = d.rule.tag();
            let p = &prem[0].conclusion;
            let (a, b) = match &c.stoup {
                Some(Formula::Imp(a, b)) => (a.as_ref(), b.as_ref()),
                _ => return Err(format!("{name}: conclusion stoup must be an implication")),
            };
            let mut want_ant = c.antecedent.clone();
            want_ant.insert(a.clone());
            let want = if d.rule == Rule::Imp1R {
                PSequent {
                    antecedent: want_ant,
                    body: c.body.clone(),
                    stoup: Some(b.clone()),
                }
            } else {
                let mut want_body = c.body.clone();
                want_body.insert(b.clone());
                PSequent {
                    antecedent: want_ant,
                    body: want_body,
                    stoup: None,
                }
            };
            eq(name, p, &want).map_err(|_| {
                format!("{name}: premise does not match schema for `{}`", c.stoup.as_ref().unwrap())
            })?;
            Ok(c.stoup.clone())
        }
    }
}

/// Tries candidate principal formulas (the annotation if present, otherwise
/// all supplied candidates) until one satisfies `validate`.
fn try_candidates<'a>(
    d: &Derivation,
    candidates: impl Iterator<Item = &'a Formula>,
    validate: impl Fn(&Formula) -> Result<(), String>,
) -> Result<Option<Formula>, String> {
    let pool: Vec<Formula> = match &d.principal {
        Some(f) => vec![f.clone()],
        None => candidates.cloned().collect(),
    };
    let mut last = format!("{}: no principal formula candidate", d.rule);
    for f in pool {
        match validate(&f) {
            Ok(()) => return Ok(Some(f)),
            Err(e) => last = e,
        }
    }
    Err(last)
}

/// Forward constructors computing each rule's conclusion from its premises.
///
/// These panic on shape violations: they are used by the normalization and
/// translation algorithms on inputs that already passed the checker, so a
/// panic indicates a kernel bug, not bad user input.
pub mod build {
    use super::*;

    fn node(
        rule: Rule,
        conclusion: PSequent,
        principal: Option<Formula>,
        premises: Vec<Derivation>,
    ) -> Derivation {
        Derivation {
            conclusion,
            rule,
            principal,
            premises,
        }
    }

    pub fn ax(a: Formula) -> Derivation {
        let c = PSequent::new([a.clone()], [], Some(a.clone()));
        node(Rule::Ax, c, Some(a), vec![])
    }

    pub fn cut1(p: Derivation, q: Derivation) -> Derivation {
        let a = p
            .conclusion
            .stoup
            .clone()
            .expect("cut1: left premise must have a stoup formula");
        let q_ant = q
            .conclusion
            .antecedent
            .minus_one(&a)
            .expect("cut1: cut formula must occur in the right antecedent");
        let c = PSequent {
            antecedent: p.conclusion.antecedent.union(&q_ant),
            body: p.conclusion.body.union(&q.conclusion.body),
            stoup: q.conclusion.stoup.clone(),
        };
        node(Rule::Cut1, c, Some(a), vec![p, q])
    }

    pub fn cut2(p: Derivation, q: Derivation, a: &Formula) -> Derivation {
        assert!(
            q.conclusion.stoup.is_none(),
            "cut2: right premise stoup must be empty"
        );
        let p_body = p
            .conclusion
            .body
            .minus_one(a)
            .expect("cut2: cut formula must occur in the left body");
        let q_ant = q
            .conclusion
            .antecedent
            .minus_one(a)
            .expect("cut2: cut formula must occur in the right antecedent");
        let c = PSequent {
            antecedent: p.conclusion.antecedent.union(&q_ant),
            body: p_body.union(&q.conclusion.body),
            stoup: p.conclusion.stoup.clone(),
        };
        node(Rule::Cut2, c, Some(a.clone()), vec![p, q])
    }

    pub fn der(p: Derivation) -> Derivation {
        let a = p
            .conclusion
            .stoup
            .clone()
            .expect("der: premise must have a stoup formula");
        let mut body = p.conclusion.body.clone();
        body.insert(a.clone());
        let c = PSequent {
            antecedent: p.conclusion.antecedent.clone(),
            body,
            stoup: None,
        };
        node(Rule::Der, c, Some(a), vec![p])
    }

    pub fn c_l(p: Derivation, a: &Formula) -> Derivation {
        let ant = p
            .conclusion
            .antecedent
            .minus_one(a)
            .expect("c_l: formula must occur in the antecedent");
        assert!(ant.contains(a), "c_l: needs two copies to contract");
        let c = PSequent {
            antecedent: ant,
            body: p.conclusion.body.clone(),
            stoup: p.conclusion.stoup.clone(),
        };
        node(Rule::CL, c, Some(a.clone()), vec![p])
    }

    pub fn c_r(p: Derivation, a: &Formula) -> Derivation {
        let body = p
            .conclusion
            .body
            .minus_one(a)
            .expect("c_r: formula must occur in the body");
        assert!(body.contains(a), "c_r: needs two copies to contract");
        let c = PSequent {
            antecedent: p.conclusion.antecedent.clone(),
            body,
            stoup: p.conclusion.stoup.clone(),
        };
        node(Rule::CR, c, Some(a.clone()), vec![p])
    }

    pub fn w_l(p: Derivation, a: Formula) -> Derivation {
        let mut ant = p.conclusion.antecedent.clone();
        ant.insert(a.clone());
        let c = PSequent {
            antecedent: ant,
            body: p.conclusion.body.clone(),
            stoup: p.conclusion.stoup.clone(),
        };
        node(Rule::WL, c, Some(a), vec![p])
    }

    pub fn w_r(p: Derivation, a: Formula) -> Derivation {
        let mut body = p.conclusion.body.clone();
        body.insert(a.clone());
        let c = PSequent {
            antecedent: p.conclusion.antecedent.clone(),
            body,
            stoup: p.conclusion.stoup.clone(),
        };
        node(Rule::WR, c, Some(a), vec![p])
    }

    pub fn zero(conclusion: PSequent) -> Derivation {
        assert!(
            conclusion.antecedent.contains(&Formula::Zero),
            "zero: antecedent must contain 0"
        );
        node(Rule::Zero, conclusion, Some(Formula::Zero), vec![])
    }

    pub fn bot() -> Derivation {
        let c = PSequent::new([Formula::Bot], [], None);
        node(Rule::Bot, c, Some(Formula::Bot), vec![])
    }

    fn and_left(rule: Rule, p: Derivation, f: &Formula) -> Derivation {
        let (a, b) = match f {
            Formula::And(a, b) => (a.as_ref(), b.as_ref()),
            _ => panic!("and-left: principal must be a conjunction"),
        };
        let ant = p
            .conclusion
            .antecedent
            .minus_one(a)
            .and_then(|m| m.minus_one(b))
            .expect("and-left: components must occur in the premise antecedent");
        let mut ant = ant;
        ant.insert(f.clone());
        let c = PSequent {
            antecedent: ant,
            body: p.conclusion.body.clone(),
            stoup: p.conclusion.stoup.clone(),
        };
        node(rule, c, Some(f.clone()), vec![p])
    }

    pub fn and1_l(p: Derivation, f: &Formula) -> Derivation {
        assert!(p.conclusion.stoup.is_some(), "and1_l: stoup must be occupied");
        and_left(Rule::And1L, p, f)
    }

    pub fn and2_l(p: Derivation, f: &Formula) -> Derivation {
        assert!(p.conclusion.stoup.is_none(), "and2_l: stoup must be empty");
        and_left(Rule::And2L, p, f)
    }

    pub fn and1_r(p: Derivation, q: Derivation) -> Derivation {
        let a = p.conclusion.stoup.clone().expect("and1_r: left stoup");
        let b = q.conclusion.stoup.clone().expect("and1_r: right stoup");
        let f = Formula::and(a, b);
        let c = PSequent {
            antecedent: p.conclusion.antecedent.union(&q.conclusion.antecedent),
            body: p.conclusion.body.union(&q.conclusion.body),
            stoup: Some(f.clone()),
        };
        node(Rule::And1R, c, Some(f), vec![p, q])
    }

    pub fn and2_r(p: Derivation, a: &Formula, q: Derivation, b: &Formula) -> Derivation {
        assert!(p.conclusion.stoup.is_none() && q.conclusion.stoup.is_none());
        let p_body = p.conclusion.body.minus_one(a).expect("and2_r: left body");
        let q_body = q.conclusion.body.minus_one(b).expect("and2_r: right body");
        let f = Formula::and(a.clone(), b.clone());
        let c = PSequent {
            antecedent: p.conclusion.antecedent.union(&q.conclusion.antecedent),
            body: p_body.union(&q_body),
            stoup: Some(f.clone()),
        };
        node(Rule::And2R, c, Some(f), vec![p, q])
    }

    pub fn and3_r(p: Derivation, q: Derivation, b: &Formula) -> Derivation {
        let a = p.conclusion.stoup.clone().expect("and3_r: left stoup");
        assert!(q.conclusion.stoup.is_none());
        let q_body = q.conclusion.body.minus_one(b).expect("and3_r: right body");
        let f = Formula::and(a, b.clone());
        let c = PSequent {
            antecedent: p.conclusion.antecedent.union(&q.conclusion.antecedent),
            body: p.conclusion.body.union(&q_body),
            stoup: Some(f.clone()),
        };
        node(Rule::And3R, c, Some(f), vec![p, q])
    }

    pub fn and4_r(p: Derivation, a: &Formula, q: Derivation) -> Derivation {
        assert!(p.conclusion.stoup.is_none());
        let b = q.conclusion.stoup.clone().expect("and4_r: right stoup");
        let p_body = p.conclusion.body.minus_one(a).expect("and4_r: left body");
        let f = Formula::and(a.clone(), b);
        let c = PSequent {
            antecedent: p.conclusion.antecedent.union(&q.conclusion.antecedent),
            body: p_body.union(&q.conclusion.body),
            stoup: Some(f.clone()),
        };
        node(Rule::And4R, c, Some(f), vec![p, q])
    }

    fn or_left(rule: Rule, p: Derivation, q: Derivation, f: &Formula) -> Derivation {
        let (a, b) = match f {
            Formula::Or(a, b) => (a.as_ref(), b.as_ref()),
            _ => panic!("or-left: principal must be a disjunction"),
        };
        let shared = p
            .conclusion
            .antecedent
            .minus_one(a)
            .expect("or-left: left branch must carry the first component");
        let shared_q = q
            .conclusion
            .antecedent
            .minus_one(b)
            .expect("or-left: right branch must carry the second component");
        assert!(
            shared == shared_q
                && p.conclusion.body == q.conclusion.body
                && p.conclusion.stoup == q.conclusion.stoup,
            "or-left: branch contexts must be shared"
        );
        let mut ant = shared;
        ant.insert(f.clone());
        let c = PSequent {
            antecedent: ant,
            body: p.conclusion.body.clone(),
            stoup: p.conclusion.stoup.clone(),
        };
        node(rule, c, Some(f.clone()), vec![p, q])
    }

    pub fn or1_l(p: Derivation, q: Derivation, f: &Formula) -> Derivation {
        assert!(p.conclusion.stoup.is_some(), "or1_l: stoup must be occupied");
        or_left(Rule::Or1L, p, q, f)
    }

    pub fn or2_l(p: Derivation, q: Derivation, f: &Formula) -> Derivation {
        assert!(p.conclusion.stoup.is_none(), "or2_l: stoup must be empty");
        or_left(Rule::Or2L, p, q, f)
    }

    pub fn or1_r(p: Derivation, b: Formula) -> Derivation {
        let a = p.conclusion.stoup.clone().expect("or1_r: premise stoup");
        let f = Formula::or(a, b);
        let c = PSequent {
            antecedent: p.conclusion.antecedent.clone(),
            body: p.conclusion.body.clone(),
            stoup: Some(f.clone()),
        };
        node(Rule::Or1R, c, Some(f), vec![p])
    }

    pub fn or2_r(p: Derivation, a: Formula) -> Derivation {
        let b = p.conclusion.stoup.clone().expect("or2_r: premise stoup");
        let f = Formula::or(a, b);
        let c = PSequent {
            antecedent: p.conclusion.antecedent.clone(),
            body: p.conclusion.body.clone(),
            stoup: Some(f.clone()),
        };
        node(Rule::Or2R, c, Some(f), vec![p])
    }

    pub fn or3_r(p: Derivation, a: &Formula, b: Formula) -> Derivation {
        assert!(p.conclusion.stoup.is_none(), "or3_r: premise stoup must be empty");
        let body = p.conclusion.body.minus_one(a).expect("or3_r: body component");
        let f = Formula::or(a.clone(), b);
        let c = PSequent {
            antecedent: p.conclusion.antecedent.clone(),
            body,
            stoup: Some(f.clone()),
        };
        node(Rule::Or3R, c, Some(f), vec![p])
    }

    pub fn or4_r(p: Derivation, a: Formula, b: &Formula) -> Derivation {
        assert!(p.conclusion.stoup.is_none(), "or4_r: premise stoup must be empty");
        let body = p.conclusion.body.minus_one(b).expect("or4_r: body component");
        let f = Formula::or(a, b.clone());
        let c = PSequent {
            antecedent: p.conclusion.antecedent.clone(),
            body,
            stoup: Some(f.clone()),
        };
        node(Rule::Or4R, c, Some(f), vec![p])
    }

    fn imp_left(rule: Rule, p: Derivation, b: &Formula, q: Derivation) -> Derivation {
        let a = q
            .conclusion
            .stoup
            .clone()
            .expect("imp-left: right premise must prove the argument in its stoup");
        let p_ant = p
            .conclusion
            .antecedent
            .minus_one(b)
            .expect("imp-left: left premise must carry the conclusion component");
        let f = Formula::imp(a, b.clone());
        let mut ant = p_ant.union(&q.conclusion.antecedent);
        ant.insert(f.clone());
        let c = PSequent {
            antecedent: ant,
            body: p.conclusion.body.union(&q.conclusion.body),
            stoup: p.conclusion.stoup.clone(),
        };
        node(rule, c, Some(f), vec![p, q])
    }

    pub fn imp1_l(p: Derivation, b: &Formula, q: Derivation) -> Derivation {
        assert!(p.conclusion.stoup.is_some(), "imp1_l: stoup must be occupied");
        imp_left(Rule::Imp1L, p, b, q)
    }

    pub fn imp2_l(p: Derivation, b: &Formula, q: Derivation) -> Derivation {
        assert!(p.conclusion.stoup.is_none(), "imp2_l: stoup must be empty");
        imp_left(Rule::Imp2L, p, b, q)
    }

    pub fn imp3_l(p: Derivation, b: &Formula, q: Derivation, a: &Formula) -> Derivation {
        assert!(p.conclusion.stoup.is_none(), "imp3_l: left premise stoup must be empty");
        let p_ant = p
            .conclusion
            .antecedent
            .minus_one(b)
            .expect("imp3_l: left premise must carry the conclusion component");
        let q_body = q
            .conclusion
            .body
            .minus_one(a)
            .expect("imp3_l: right premise body must carry the argument");
        let f = Formula::imp(a.clone(), b.clone());
        let mut ant = p_ant.union(&q.conclusion.antecedent);
        ant.insert(f.clone());
        let c = PSequent {
            antecedent: ant,
            body: p.conclusion.body.union(&q_body),
            stoup: q.conclusion.stoup.clone(),
        };
        node(Rule::Imp3L, c, Some(f), vec![p, q])
    }

    pub fn imp1_r(p: Derivation, a: &Formula) -> Derivation {
        let b = p.conclusion.stoup.clone().expect("imp1_r: premise stoup");
        let ant = p
            .conclusion
            .antecedent
            .minus_one(a)
            .expect("imp1_r: argument must occur in the premise antecedent");
        let f = Formula::imp(a.clone(), b);
        let c = PSequent {
            antecedent: ant,
            body: p.conclusion.body.clone(),
            stoup: Some(f.clone()),
        };
        node(Rule::Imp1R, c, Some(f), vec![p])
    }

    pub fn imp2_r(p: Derivation, a: &Formula, b: &Formula) -> Derivation {
        assert!(p.conclusion.stoup.is_none(), "imp2_r: premise stoup must be empty");
        let ant = p
            .conclusion
            .antecedent
            .minus_one(a)
            .expect("imp2_r: argument must occur in the premise antecedent");
        let body = p
            .conclusion
            .body
            .minus_one(b)
            .expect("imp2_r: result must occur in the premise body");
        let f = Formula::imp(a.clone(), b.clone());
        let c = PSequent {
            antecedent: ant,
            body,
            stoup: Some(f.clone()),
        };
        node(Rule::Imp2R, c, Some(f), vec![p])
    }

    /// Adds weakenings until the extra antecedent and body contexts appear.
    pub fn weaken_to(
        mut d: Derivation,
        extra_ant: &Multiset<Formula>,
        extra_body: &Multiset<Formula>,
    ) -> Derivation {
        for f in extra_ant.iter() {
            d = w_l(d, f.clone());
        }
        for f in extra_body.iter() {
            d = w_r(d, f.clone());
        }
        d
    }

    /// Adds contractions until the conclusion equals `target` (which must
    /// differ only by surplus copies in the antecedent and body).
    pub fn contract_to(mut d: Derivation, target: &PSequent) -> Derivation {
        assert_eq!(d.conclusion.stoup, target.stoup, "contract_to: stoup mismatch");
        loop {
            let surplus_ant: Vec<Formula> = d
                .conclusion
                .antecedent
                .counts()
                .filter(|(f, n)| *n > target.antecedent.count(f))
                .map(|(f, _)| f.clone())
                .collect();
            let surplus_body: Vec<Formula> = d
                .conclusion
                .body
                .counts()
                .filter(|(f, n)| *n > target.body.count(f))
                .map(|(f, _)| f.clone())
                .collect();
            if surplus_ant.is_empty() && surplus_body.is_empty() {
                break;
            }
            for f in surplus_ant {
                d = c_l(d, &f);
            }
            for f in surplus_body {
                d = c_r(d, &f);
            }
        }
        assert_eq!(&d.conclusion, target, "contract_to: targets must differ only by copies");
        d
    }
}

// ---------------------------------------------------------------------------
// Proof file encoding
// ---------------------------------------------------------------------------

impl Derivation {
    pub fn to_sexpr(&self) -> Sexpr {
        sexpr::encode_node(
            self.rule.tag(),
            self.conclusion.to_string(),
            self.principal.as_ref().map(|f| f.to_string()),
            self.premises.iter().map(Derivation::to_sexpr).collect(),
        )
    }

    pub fn to_proof_text(&self) -> String {
        self.to_sexpr().pretty()
    }

    pub fn from_sexpr(sx: &Sexpr) -> Result<Derivation, String> {
        let node = sexpr::decode_node(sx).map_err(|e| e.to_string())?;
        let rule = Rule::from_tag(node.tag)
            .ok_or_else(|| format!("unknown rule tag `{}`", node.tag))?;
        let conclusion = PSequent::parse(node.sequent)
            .map_err(|e| format!("rule {}: bad sequent `{}`: {e}", node.tag, node.sequent))?;
        let principal = match node.principal {
            Some(p) => Some(
                parse_formula(p)
                    .map_err(|e| format!("rule {}: bad principal `{p}`: {e}", node.tag))?,
            ),
            None => None,
        };
        if node.premises.len() != rule.arity() {
            return Err(format!(
                "rule {} expects {} premise(s), found {}",
                node.tag,
                rule.arity(),
                node.premises.len()
            ));
        }
        let premises = node
            .premises
            .iter()
            .map(|p| Derivation::from_sexpr(p))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Derivation {
            conclusion,
            rule,
            principal,
            premises,
        })
    }

    pub fn from_proof_text(text: &str) -> Result<Derivation, String> {
        let sx = sexpr::parse(text).map_err(|e| e.to_string())?;
        Derivation::from_sexpr(&sx)
    }
}
