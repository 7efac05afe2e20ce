//! Translation of the mixed calculus into a linear-logic fragment.
//!
//! The formula translations `t` and `b`:
//!
//! - `t(0) = t(bot) = 0`, `t(X) = !X`,
//! - `t(A & B) = !b(A) * !b(B)`, `t(A | B) = !b(A) + !b(B)`,
//! - `t(A -> B) = !(t(A) -o b(B))`,
//! - `b(A) = t(A)` when `A` is outside P, `b(A) = ?t(A)` when `A` is in P.
//!
//! Every image `t(A)` is `0`, `!`-prefixed, or a `*`/`+` of `!`-prefixed
//! formulas, which is what makes contraction, weakening, and promotion
//! admissible for it: the transformers below invert the `*`/`+` structure
//! down to `!`-formulas, apply the primitive exponential rule, and rebuild.
//! A `0` anywhere in the context short-circuits through the `0`-left rule.
//!
//! The fragment is two-sided, with multiset contexts, the connectives in
//! the image of `t`, and axioms on arbitrary formulas. A derivation of
//! `Γ |- Δ ; Π` translates to one of `t(Γ) |- ?t(Δ), t(Π)`.

use std::fmt;

use thiserror::Error;

use crate::calculus::{check_derivation, node_principal, CheckFailure, CheckReport, Derivation, PSequent, Rule};
use crate::formula::{Formula, ParseError, Policy};
use crate::multiset::Multiset;
use crate::sexpr::{self, Sexpr};

// ---------------------------------------------------------------------------
// Formulas
// ---------------------------------------------------------------------------

/// Linear-logic formula in the fragment: atoms, additive zero, tensor,
/// plus, linear implication, and the two exponentials.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum LlFormula {
    Atom(String),
    Zero,
    Tensor(Box<LlFormula>, Box<LlFormula>),
    Plus(Box<LlFormula>, Box<LlFormula>),
    Lolli(Box<LlFormula>, Box<LlFormula>),
    OfCourse(Box<LlFormula>),
    WhyNot(Box<LlFormula>),
}

impl LlFormula {
    pub fn atom(name: impl Into<String>) -> LlFormula {
        LlFormula::Atom(name.into())
    }

    pub fn tensor(a: LlFormula, b: LlFormula) -> LlFormula {
        LlFormula::Tensor(Box::new(a), Box::new(b))
    }

    pub fn plus(a: LlFormula, b: LlFormula) -> LlFormula {
        LlFormula::Plus(Box::new(a), Box::new(b))
    }

    pub fn lolli(a: LlFormula, b: LlFormula) -> LlFormula {
        LlFormula::Lolli(Box::new(a), Box::new(b))
    }

    pub fn of_course(a: LlFormula) -> LlFormula {
        LlFormula::OfCourse(Box::new(a))
    }

    pub fn why_not(a: LlFormula) -> LlFormula {
        LlFormula::WhyNot(Box::new(a))
    }

    pub fn is_of_course(&self) -> bool {
        matches!(self, LlFormula::OfCourse(_))
    }

    pub fn is_why_not(&self) -> bool {
        matches!(self, LlFormula::WhyNot(_))
    }
}

// Printing precedence: -o is 1 (right-assoc), + is 2, * is 3, prefixes 4.
fn fmt_ll(f: &LlFormula, prec: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    match f {
        LlFormula::Atom(name) => write!(out, "{name}"),
        LlFormula::Zero => write!(out, "0"),
        LlFormula::Tensor(a, b) => {
            let parens = prec > 3;
            if parens {
                write!(out, "(")?;
            }
            fmt_ll(a, 3, out)?;
            write!(out, " * ")?;
            fmt_ll(b, 4, out)?;
            if parens {
                write!(out, ")")?;
            }
            Ok(())
        }
        LlFormula::Plus(a, b) => {
            let parens = prec > 2;
            if parens {
                write!(out, "(")?;
            }
            fmt_ll(a, 2, out)?;
            write!(out, " + ")?;
            fmt_ll(b, 3, out)?;
            if parens {
                write!(out, ")")?;
            }
            Ok(())
        }
        LlFormula::Lolli(a, b) => {
            let parens = prec > 1;
            if parens {
                write!(out, "(")?;
            }
            fmt_ll(a, 2, out)?;
            write!(out, " -o ")?;
            fmt_ll(b, 1, out)?;
            if parens {
                write!(out, ")")?;
            }
            Ok(())
        }
        LlFormula::OfCourse(a) => {
            write!(out, "!")?;
            fmt_ll(a, 4, out)
        }
        LlFormula::WhyNot(a) => {
            write!(out, "?")?;
            fmt_ll(a, 4, out)
        }
    }
}

impl fmt::Display for LlFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_ll(self, 1, f)
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
enum LlTok {
    LParen,
    RParen,
    Star,
    PlusSign,
    LolliArrow,
    Bang,
    Quest,
    Zero,
    Ident(String),
}

fn lex_ll(input: &str) -> Result<Vec<(usize, LlTok)>, ParseError> {
    let bytes = input.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '(' => {
                toks.push((i, LlTok::LParen));
                i += 1;
            }
            ')' => {
                toks.push((i, LlTok::RParen));
                i += 1;
            }
            '*' => {
                toks.push((i, LlTok::Star));
                i += 1;
            }
            '+' => {
                toks.push((i, LlTok::PlusSign));
                i += 1;
            }
            '!' => {
                toks.push((i, LlTok::Bang));
                i += 1;
            }
            '?' => {
                toks.push((i, LlTok::Quest));
                i += 1;
            }
            '0' => {
                toks.push((i, LlTok::Zero));
                i += 1;
            }
            '-' => {
                if bytes.get(i + 1) == Some(&b'o') {
                    toks.push((i, LlTok::LolliArrow));
                    i += 2;
                } else {
                    return Err(ParseError {
                        pos: i,
                        msg: "expected `-o`".to_string(),
                    });
                }
            }
            'a'..='z' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                toks.push((start, LlTok::Ident(input[start..i].to_string())));
            }
            _ => {
                return Err(ParseError {
                    pos: i,
                    msg: format!("unexpected character `{c}`"),
                })
            }
        }
    }
    Ok(toks)
}

struct LlParser {
    toks: Vec<(usize, LlTok)>,
    at: usize,
    end: usize,
}

impl LlParser {
    fn peek(&self) -> Option<&LlTok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<LlTok> {
        let t = self.toks.get(self.at).map(|(_, t)| t.clone());
        self.at += 1;
        t
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError {
            pos: self.pos(),
            msg: msg.into(),
        }
    }

    fn lolli(&mut self) -> Result<LlFormula, ParseError> {
        let lhs = self.plus()?;
        if self.peek() == Some(&LlTok::LolliArrow) {
            self.bump();
            let rhs = self.lolli()?;
            Ok(LlFormula::lolli(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn plus(&mut self) -> Result<LlFormula, ParseError> {
        let mut lhs = self.tensor()?;
        while self.peek() == Some(&LlTok::PlusSign) {
            self.bump();
            let rhs = self.tensor()?;
            lhs = LlFormula::plus(lhs, rhs);
        }
        Ok(lhs)
    }

    fn tensor(&mut self) -> Result<LlFormula, ParseError> {
        let mut lhs = self.prefix()?;
        while self.peek() == Some(&LlTok::Star) {
            self.bump();
            let rhs = self.prefix()?;
            lhs = LlFormula::tensor(lhs, rhs);
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<LlFormula, ParseError> {
        match self.peek() {
            Some(LlTok::Bang) => {
                self.bump();
                Ok(LlFormula::of_course(self.prefix()?))
            }
            Some(LlTok::Quest) => {
                self.bump();
                Ok(LlFormula::why_not(self.prefix()?))
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<LlFormula, ParseError> {
        match self.bump() {
            Some(LlTok::Zero) => Ok(LlFormula::Zero),
            Some(LlTok::Ident(name)) => Ok(LlFormula::Atom(name)),
            Some(LlTok::LParen) => {
                let f = self.lolli()?;
                match self.bump() {
                    Some(LlTok::RParen) => Ok(f),
                    _ => {
                        self.at -= 1;
                        Err(self.err("expected `)`"))
                    }
                }
            }
            Some(_) => {
                self.at -= 1;
                Err(self.err("expected a formula"))
            }
            None => Err(self.err("unexpected end of input")),
        }
    }
}

pub fn parse_ll_formula(input: &str) -> Result<LlFormula, ParseError> {
    let toks = lex_ll(input)?;
    let mut p = LlParser {
        toks,
        at: 0,
        end: input.len(),
    };
    let f = p.lolli()?;
    if p.peek().is_some() {
        return Err(p.err("trailing input after formula"));
    }
    Ok(f)
}

fn parse_ll_list(input: &str) -> Result<Vec<LlFormula>, ParseError> {
    if input.trim().is_empty() {
        return Ok(Vec::new());
    }
    input.split(',').map(parse_ll_formula).collect()
}

// ---------------------------------------------------------------------------
// Sequents and derivations
// ---------------------------------------------------------------------------

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct LlSequent {
    pub left: Multiset<LlFormula>,
    pub right: Multiset<LlFormula>,
}

impl LlSequent {
    pub fn new(
        left: impl IntoIterator<Item = LlFormula>,
        right: impl IntoIterator<Item = LlFormula>,
    ) -> Self {
        LlSequent {
            left: left.into_iter().collect(),
            right: right.into_iter().collect(),
        }
    }

    pub fn parse(input: &str) -> Result<LlSequent, ParseError> {
        let turnstile = input.find("|-").ok_or_else(|| ParseError {
            pos: input.len(),
            msg: "expected `|-`".to_string(),
        })?;
        Ok(LlSequent {
            left: parse_ll_list(&input[..turnstile])?.into_iter().collect(),
            right: parse_ll_list(&input[turnstile + 2..])?.into_iter().collect(),
        })
    }
}

impl fmt::Display for LlSequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.left.is_empty() {
            write!(f, "{} ", self.left)?;
        }
        write!(f, "|-")?;
        if !self.right.is_empty() {
            write!(f, " {}", self.right)?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum LlRule {
    Ax,
    Cut,
    ZeroL,
    TensorL,
    TensorR,
    PlusL,
    PlusR1,
    PlusR2,
    LolliL,
    LolliR,
    BangL,
    BangR,
    BangC,
    BangW,
    QuestR,
    QuestL,
    QuestC,
    QuestW,
}

pub const ALL_LL_RULES: [LlRule; 18] = [
    LlRule::Ax,
    LlRule::Cut,
    LlRule::ZeroL,
    LlRule::TensorL,
    LlRule::TensorR,
    LlRule::PlusL,
    LlRule::PlusR1,
    LlRule::PlusR2,
    LlRule::LolliL,
    LlRule::LolliR,
    LlRule::BangL,
    LlRule::BangR,
    LlRule::BangC,
    LlRule::BangW,
    LlRule::QuestR,
    LlRule::QuestL,
    LlRule::QuestC,
    LlRule::QuestW,
];

impl LlRule {
    pub fn tag(self) -> &'static str {
        match self {
            LlRule::Ax => "ll_ax",
            LlRule::Cut => "ll_cut",
            LlRule::ZeroL => "zero_l",
            LlRule::TensorL => "tensor_l",
            LlRule::TensorR => "tensor_r",
            LlRule::PlusL => "plus_l",
            LlRule::PlusR1 => "plus_r1",
            LlRule::PlusR2 => "plus_r2",
            LlRule::LolliL => "lolli_l",
            LlRule::LolliR => "lolli_r",
            LlRule::BangL => "bang_l",
            LlRule::BangR => "bang_r",
            LlRule::BangC => "bang_c",
            LlRule::BangW => "bang_w",
            LlRule::QuestR => "quest_r",
            LlRule::QuestL => "quest_l",
            LlRule::QuestC => "quest_c",
            LlRule::QuestW => "quest_w",
        }
    }

    pub fn from_tag(tag: &str) -> Option<LlRule> {
        ALL_LL_RULES.iter().copied().find(|r| r.tag() == tag)
    }

    pub fn arity(self) -> usize {
        match self {
            LlRule::Ax | LlRule::ZeroL => 0,
            LlRule::Cut | LlRule::TensorR | LlRule::PlusL | LlRule::LolliL => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for LlRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.tag())
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LlDerivation {
    pub conclusion: LlSequent,
    pub rule: LlRule,
    pub principal: Option<LlFormula>,
    pub premises: Vec<LlDerivation>,
}

impl LlDerivation {
    pub fn visit<F: FnMut(&[usize], &LlDerivation)>(&self, f: &mut F) {
        fn go<F: FnMut(&[usize], &LlDerivation)>(
            d: &LlDerivation,
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

    pub fn count_nodes(&self) -> usize {
        1 + self.premises.iter().map(LlDerivation::count_nodes).sum::<usize>()
    }
}

// ---------------------------------------------------------------------------
// Checker
// ---------------------------------------------------------------------------

/// Checks every node of a linear derivation, including the promotion
/// context discipline and multiset recombination.
pub fn check_ll(d: &LlDerivation) -> CheckReport {
    let mut report = CheckReport::default();
    let mut path = Vec::new();
    check_ll_node(d, &mut path, &mut report);
    report
}

fn check_ll_node(d: &LlDerivation, path: &mut Vec<usize>, report: &mut CheckReport) {
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
    } else if let Err(msg) = validate_ll(d) {
        report.failures.push(CheckFailure {
            path: path.clone(),
            message: msg,
        });
    }
    for (i, p) in d.premises.iter().enumerate() {
        path.push(i);
        check_ll_node(p, path, report);
        path.pop();
    }
}

fn ll_candidates<'a>(
    d: &LlDerivation,
    pool: impl Iterator<Item = &'a LlFormula>,
    ok: impl Fn(&LlFormula) -> bool,
) -> Result<(), String> {
    let candidates: Vec<LlFormula> = match &d.principal {
        Some(f) => vec![f.clone()],
        None => pool.cloned().collect(),
    };
    if candidates.iter().any(|f| ok(f)) {
        Ok(())
    } else {
        Err(format!("{}: no principal formula candidate validates", d.rule))
    }
}

fn validate_ll(d: &LlDerivation) -> Result<(), String> {
    let c = &d.conclusion;
    let prem = &d.premises;
    match d.rule {
        LlRule::Ax => {
            if c.left.len() == 1 && c.right == c.left {
                Ok(())
            } else {
                Err("ll_ax: conclusion must be `A |- A`".to_string())
            }
        }
        LlRule::ZeroL => {
            if c.left.contains(&LlFormula::Zero) {
                Ok(())
            } else {
                Err("zero_l: left side must contain 0".to_string())
            }
        }
        LlRule::Cut => {
            let (p, q) = (&prem[0].conclusion, &prem[1].conclusion);
            let candidates: Vec<LlFormula> = match &d.principal {
                Some(a) => vec![a.clone()],
                None => p
                    .right
                    .distinct()
                    .filter(|a| q.left.contains(a))
                    .cloned()
                    .collect(),
            };
            for a in candidates {
                let (pr, ql) = match (p.right.minus_one(&a), q.left.minus_one(&a)) {
                    (Some(x), Some(y)) => (x, y),
                    _ => continue,
                };
                if c.left == p.left.union(&ql) && c.right == pr.union(&q.right) {
                    return Ok(());
                }
            }
            Err("ll_cut: no cut formula matches the recombination".to_string())
        }
        LlRule::TensorL => {
            let p = &prem[0].conclusion;
            if p.right != c.right {
                return Err("tensor_l: right side must be unchanged".to_string());
            }
            ll_candidates(d, c.left.distinct(), |f| {
                let (a, b) = match f {
                    LlFormula::Tensor(a, b) => (a.as_ref(), b.as_ref()),
                    _ => return false,
                };
                let mut want = match c.left.minus_one(f) {
                    Some(m) => m,
                    None => return false,
                };
                want.insert(a.clone());
                want.insert(b.clone());
                p.left == want
            })
        }
        LlRule::TensorR => {
            let (p, q) = (&prem[0].conclusion, &prem[1].conclusion);
            ll_candidates(d, c.right.distinct(), |f| {
                let (a, b) = match f {
                    LlFormula::Tensor(a, b) => (a.as_ref(), b.as_ref()),
                    _ => return false,
                };
                let (pr, qr) = match (p.right.minus_one(a), q.right.minus_one(b)) {
                    (Some(x), Some(y)) => (x, y),
                    _ => return false,
                };
                let mut want = pr.union(&qr);
                want.insert(f.clone());
                c.left == p.left.union(&q.left) && c.right == want
            })
        }
        LlRule::PlusL => {
            let (p, q) = (&prem[0].conclusion, &prem[1].conclusion);
            if p.right != c.right || q.right != c.right {
                return Err("plus_l: right sides must be shared".to_string());
            }
            ll_candidates(d, c.left.distinct(), |f| {
                let (a, b) = match f {
                    LlFormula::Plus(a, b) => (a.as_ref(), b.as_ref()),
                    _ => return false,
                };
                let shared = match c.left.minus_one(f) {
                    Some(m) => m,
                    None => return false,
                };
                let mut want_p = shared.clone();
                want_p.insert(a.clone());
                let mut want_q = shared;
                want_q.insert(b.clone());
                p.left == want_p && q.left == want_q
            })
        }
        LlRule::PlusR1 | LlRule::PlusR2 => {
            let p = &prem[0].conclusion;
            if p.left != c.left {
                return Err(format!("{}: left side must be unchanged", d.rule));
            }
            let first = d.rule == LlRule::PlusR1;
            ll_candidates(d, c.right.distinct(), |f| {
                let (a, b) = match f {
                    LlFormula::Plus(a, b) => (a.as_ref(), b.as_ref()),
                    _ => return false,
                };
                let component = if first { a } else { b };
                let mut want = match c.right.minus_one(f) {
                    Some(m) => m,
                    None => return false,
                };
                want.insert(component.clone());
                p.right == want
            })
        }
        LlRule::LolliL => {
            let (p, q) = (&prem[0].conclusion, &prem[1].conclusion);
            ll_candidates(d, c.left.distinct(), |f| {
                let (a, b) = match f {
                    LlFormula::Lolli(a, b) => (a.as_ref(), b.as_ref()),
                    _ => return false,
                };
                let (pr, ql) = match (p.right.minus_one(a), q.left.minus_one(b)) {
                    (Some(x), Some(y)) => (x, y),
                    _ => return false,
                };
                let mut want_left = p.left.union(&ql);
                want_left.insert(f.clone());
                c.left == want_left && c.right == pr.union(&q.right)
            })
        }
        LlRule::LolliR => {
            let p = &prem[0].conclusion;
            ll_candidates(d, c.right.distinct(), |f| {
                let (a, b) = match f {
                    LlFormula::Lolli(a, b) => (a.as_ref(), b.as_ref()),
                    _ => return false,
                };
                let mut want_left = c.left.clone();
                want_left.insert(a.clone());
                let mut want_right = match c.right.minus_one(f) {
                    Some(m) => m,
                    None => return false,
                };
                want_right.insert(b.clone());
                p.left == want_left && p.right == want_right
            })
        }
        LlRule::BangL => {
            let p = &prem[0].conclusion;
            if p.right != c.right {
                return Err("bang_l: right side must be unchanged".to_string());
            }
            ll_candidates(d, c.left.distinct(), |f| {
                let a = match f {
                    LlFormula::OfCourse(a) => a.as_ref(),
                    _ => return false,
                };
                let mut want = match c.left.minus_one(f) {
                    Some(m) => m,
                    None => return false,
                };
                want.insert(a.clone());
                p.left == want
            })
        }
        LlRule::BangR => {
            let p = &prem[0].conclusion;
            if p.left != c.left {
                return Err("bang_r: left side must be unchanged".to_string());
            }
            if let Some(g) = c.left.distinct().find(|g| !g.is_of_course()) {
                return Err(format!("bang_r: promotion context violated by `{g}` on the left"));
            }
            ll_candidates(d, c.right.distinct(), |f| {
                let a = match f {
                    LlFormula::OfCourse(a) => a.as_ref(),
                    _ => return false,
                };
                let rest = match c.right.minus_one(f) {
                    Some(m) => m,
                    None => return false,
                };
                if rest.distinct().any(|g| !g.is_why_not()) {
                    return false;
                }
                let mut want = rest;
                want.insert(a.clone());
                p.right == want
            })
        }
        LlRule::BangC => {
            let p = &prem[0].conclusion;
            if p.right != c.right {
                return Err("bang_c: right side must be unchanged".to_string());
            }
            let extra = p
                .left
                .minus(&c.left)
                .filter(|m| m.len() == 1)
                .and_then(|m| m.iter().next().cloned())
                .ok_or("bang_c: premise must extend the conclusion by one copy")?;
            if !extra.is_of_course() {
                return Err("bang_c: only !-formulas contract".to_string());
            }
            if c.left.contains(&extra) {
                Ok(())
            } else {
                Err("bang_c: contracted formula must remain present".to_string())
            }
        }
        LlRule::BangW => {
            let p = &prem[0].conclusion;
            if p.right != c.right {
                return Err("bang_w: right side must be unchanged".to_string());
            }
            let extra = c
                .left
                .minus(&p.left)
                .filter(|m| m.len() == 1)
                .and_then(|m| m.iter().next().cloned())
                .ok_or("bang_w: conclusion must extend the premise by one formula")?;
            if extra.is_of_course() {
                Ok(())
            } else {
                Err("bang_w: only !-formulas weaken".to_string())
            }
        }
        LlRule::QuestR => {
            let p = &prem[0].conclusion;
            if p.left != c.left {
                return Err("quest_r: left side must be unchanged".to_string());
            }
            ll_candidates(d, c.right.distinct(), |f| {
                let a = match f {
                    LlFormula::WhyNot(a) => a.as_ref(),
                    _ => return false,
                };
                let mut want = match c.right.minus_one(f) {
                    Some(m) => m,
                    None => return false,
                };
                want.insert(a.clone());
                p.right == want
            })
        }
        LlRule::QuestL => {
            let p = &prem[0].conclusion;
            if p.right != c.right {
                return Err("quest_l: right side must be unchanged".to_string());
            }
            if let Some(g) = c.right.distinct().find(|g| !g.is_why_not()) {
                return Err(format!("quest_l: promotion context violated by `{g}` on the right"));
            }
            ll_candidates(d, c.left.distinct(), |f| {
                let a = match f {
                    LlFormula::WhyNot(a) => a.as_ref(),
                    _ => return false,
                };
                let rest = match c.left.minus_one(f) {
                    Some(m) => m,
                    None => return false,
                };
                if rest.distinct().any(|g| !g.is_of_course()) {
                    return false;
                }
                let mut want = rest;
                want.insert(a.clone());
                p.left == want
            })
        }
        LlRule::QuestC => {
            let p = &prem[0].conclusion;
            if p.left != c.left {
                return Err("quest_c: left side must be unchanged".to_string());
            }
            let extra = p
                .right
                .minus(&c.right)
                .filter(|m| m.len() == 1)
                .and_then(|m| m.iter().next().cloned())
                .ok_or("quest_c: premise must extend the conclusion by one copy")?;
            if !extra.is_why_not() {
                return Err("quest_c: only ?-formulas contract".to_string());
            }
            if c.right.contains(&extra) {
                Ok(())
            } else {
                Err("quest_c: contracted formula must remain present".to_string())
            }
        }
        LlRule::QuestW => {
            let p = &prem[0].conclusion;
            if p.left != c.left {
                return Err("quest_w: left side must be unchanged".to_string());
            }
            let extra = c
                .right
                .minus(&p.right)
                .filter(|m| m.len() == 1)
                .and_then(|m| m.iter().next().cloned())
                .ok_or("quest_w: conclusion must extend the premise by one formula")?;
            if extra.is_why_not() {
                Ok(())
            } else {
                Err("quest_w: only ?-formulas weaken".to_string())
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Forward constructors
// ---------------------------------------------------------------------------

/// Forward constructors computing conclusions from premises; panic on shape
/// violations (kernel bugs, not user input).
pub mod build {
    use super::*;

    fn node(
        rule: LlRule,
        conclusion: LlSequent,
        principal: Option<LlFormula>,
        premises: Vec<LlDerivation>,
    ) -> LlDerivation {
        LlDerivation {
            conclusion,
            rule,
            principal,
            premises,
        }
    }

    pub fn ax(a: LlFormula) -> LlDerivation {
        let c = LlSequent::new([a.clone()], [a.clone()]);
        node(LlRule::Ax, c, Some(a), vec![])
    }

    pub fn zero_l(conclusion: LlSequent) -> LlDerivation {
        assert!(
            conclusion.left.contains(&LlFormula::Zero),
            "zero_l: left side must contain 0"
        );
        node(LlRule::ZeroL, conclusion, Some(LlFormula::Zero), vec![])
    }

    pub fn cut(p: LlDerivation, q: LlDerivation, a: &LlFormula) -> LlDerivation {
        let pr = p.conclusion.right.minus_one(a).expect("ll cut: right of left premise");
        let ql = q.conclusion.left.minus_one(a).expect("ll cut: left of right premise");
        let c = LlSequent {
            left: p.conclusion.left.union(&ql),
            right: pr.union(&q.conclusion.right),
        };
        node(LlRule::Cut, c, Some(a.clone()), vec![p, q])
    }

    pub fn tensor_l(p: LlDerivation, f: &LlFormula) -> LlDerivation {
        let (a, b) = match f {
            LlFormula::Tensor(a, b) => (a.as_ref(), b.as_ref()),
            _ => panic!("tensor_l: principal must be a tensor"),
        };
        let mut left = p
            .conclusion
            .left
            .minus_one(a)
            .and_then(|m| m.minus_one(b))
            .expect("tensor_l: components");
        left.insert(f.clone());
        let c = LlSequent {
            left,
            right: p.conclusion.right.clone(),
        };
        node(LlRule::TensorL, c, Some(f.clone()), vec![p])
    }

    pub fn tensor_r(p: LlDerivation, q: LlDerivation, f: &LlFormula) -> LlDerivation {
        let (a, b) = match f {
            LlFormula::Tensor(a, b) => (a.as_ref(), b.as_ref()),
            _ => panic!("tensor_r: principal must be a tensor"),
        };
        let pr = p.conclusion.right.minus_one(a).expect("tensor_r: left premise");
        let qr = q.conclusion.right.minus_one(b).expect("tensor_r: right premise");
        let mut right = pr.union(&qr);
        right.insert(f.clone());
        let c = LlSequent {
            left: p.conclusion.left.union(&q.conclusion.left),
            right,
        };
        node(LlRule::TensorR, c, Some(f.clone()), vec![p, q])
    }

    pub fn plus_l(p: LlDerivation, q: LlDerivation, f: &LlFormula) -> LlDerivation {
        let (a, b) = match f {
            LlFormula::Plus(a, b) => (a.as_ref(), b.as_ref()),
            _ => panic!("plus_l: principal must be a plus"),
        };
        let shared = p.conclusion.left.minus_one(a).expect("plus_l: left branch");
        let shared_q = q.conclusion.left.minus_one(b).expect("plus_l: right branch");
        assert!(
            shared == shared_q && p.conclusion.right == q.conclusion.right,
            "plus_l: branch contexts must be shared"
        );
        let mut left = shared;
        left.insert(f.clone());
        let c = LlSequent {
            left,
            right: p.conclusion.right.clone(),
        };
        node(LlRule::PlusL, c, Some(f.clone()), vec![p, q])
    }

    pub fn plus_r1(p: LlDerivation, f: &LlFormula) -> LlDerivation {
        let a = match f {
            LlFormula::Plus(a, _) => a.as_ref(),
            _ => panic!("plus_r1: principal must be a plus"),
        };
        let mut right = p.conclusion.right.minus_one(a).expect("plus_r1: component");
        right.insert(f.clone());
        let c = LlSequent {
            left: p.conclusion.left.clone(),
            right,
        };
        node(LlRule::PlusR1, c, Some(f.clone()), vec![p])
    }

    pub fn plus_r2(p: LlDerivation, f: &LlFormula) -> LlDerivation {
        let b = match f {
            LlFormula::Plus(_, b) => b.as_ref(),
            _ => panic!("plus_r2: principal must be a plus"),
        };
        let mut right = p.conclusion.right.minus_one(b).expect("plus_r2: component");
        right.insert(f.clone());
        let c = LlSequent {
            left: p.conclusion.left.clone(),
            right,
        };
        node(LlRule::PlusR2, c, Some(f.clone()), vec![p])
    }

    pub fn lolli_l(p: LlDerivation, q: LlDerivation, f: &LlFormula) -> LlDerivation {
        let (a, b) = match f {
            LlFormula::Lolli(a, b) => (a.as_ref(), b.as_ref()),
            _ => panic!("lolli_l: principal must be a lolli"),
        };
        let pr = p.conclusion.right.minus_one(a).expect("lolli_l: argument");
        let ql = q.conclusion.left.minus_one(b).expect("lolli_l: result");
        let mut left = p.conclusion.left.union(&ql);
        left.insert(f.clone());
        let c = LlSequent {
            left,
            right: pr.union(&q.conclusion.right),
        };
        node(LlRule::LolliL, c, Some(f.clone()), vec![p, q])
    }

    pub fn lolli_r(p: LlDerivation, f: &LlFormula) -> LlDerivation {
        let (a, b) = match f {
            LlFormula::Lolli(a, b) => (a.as_ref(), b.as_ref()),
            _ => panic!("lolli_r: principal must be a lolli"),
        };
        let left = p.conclusion.left.minus_one(a).expect("lolli_r: argument");
        let mut right = p.conclusion.right.minus_one(b).expect("lolli_r: result");
        right.insert(f.clone());
        let c = LlSequent { left, right };
        node(LlRule::LolliR, c, Some(f.clone()), vec![p])
    }

    fn bang_arg(f: &LlFormula) -> &LlFormula {
        match f {
            LlFormula::OfCourse(a) => a.as_ref(),
            _ => panic!("expected a !-formula"),
        }
    }

    fn quest_arg(f: &LlFormula) -> &LlFormula {
        match f {
            LlFormula::WhyNot(a) => a.as_ref(),
            _ => panic!("expected a ?-formula"),
        }
    }

    pub fn bang_l(p: LlDerivation, f: &LlFormula) -> LlDerivation {
        let a = bang_arg(f);
        let mut left = p.conclusion.left.minus_one(a).expect("bang_l: argument");
        left.insert(f.clone());
        let c = LlSequent {
            left,
            right: p.conclusion.right.clone(),
        };
        node(LlRule::BangL, c, Some(f.clone()), vec![p])
    }

    pub fn bang_r(p: LlDerivation, f: &LlFormula) -> LlDerivation {
        let a = bang_arg(f);
        let mut right = p.conclusion.right.minus_one(a).expect("bang_r: argument");
        right.insert(f.clone());
        let c = LlSequent {
            left: p.conclusion.left.clone(),
            right,
        };
        node(LlRule::BangR, c, Some(f.clone()), vec![p])
    }

    pub fn bang_c(p: LlDerivation, f: &LlFormula) -> LlDerivation {
        assert!(f.is_of_course());
        let left = p.conclusion.left.minus_one(f).expect("bang_c: copy");
        assert!(left.contains(f), "bang_c: needs two copies");
        let c = LlSequent {
            left,
            right: p.conclusion.right.clone(),
        };
        node(LlRule::BangC, c, Some(f.clone()), vec![p])
    }

    pub fn bang_w(p: LlDerivation, f: &LlFormula) -> LlDerivation {
        assert!(f.is_of_course());
        let mut left = p.conclusion.left.clone();
        left.insert(f.clone());
        let c = LlSequent {
            left,
            right: p.conclusion.right.clone(),
        };
        node(LlRule::BangW, c, Some(f.clone()), vec![p])
    }

    pub fn quest_r(p: LlDerivation, f: &LlFormula) -> LlDerivation {
        let a = quest_arg(f);
        let mut right = p.conclusion.right.minus_one(a).expect("quest_r: argument");
        right.insert(f.clone());
        let c = LlSequent {
            left: p.conclusion.left.clone(),
            right,
        };
        node(LlRule::QuestR, c, Some(f.clone()), vec![p])
    }

    pub fn quest_l(p: LlDerivation, f: &LlFormula) -> LlDerivation {
        let a = quest_arg(f);
        let mut left = p.conclusion.left.minus_one(a).expect("quest_l: argument");
        left.insert(f.clone());
        let c = LlSequent {
            left,
            right: p.conclusion.right.clone(),
        };
        node(LlRule::QuestL, c, Some(f.clone()), vec![p])
    }

    pub fn quest_c(p: LlDerivation, f: &LlFormula) -> LlDerivation {
        assert!(f.is_why_not());
        let right = p.conclusion.right.minus_one(f).expect("quest_c: copy");
        assert!(right.contains(f), "quest_c: needs two copies");
        let c = LlSequent {
            left: p.conclusion.left.clone(),
            right,
        };
        node(LlRule::QuestC, c, Some(f.clone()), vec![p])
    }

    pub fn quest_w(p: LlDerivation, f: &LlFormula) -> LlDerivation {
        assert!(f.is_why_not());
        let mut right = p.conclusion.right.clone();
        right.insert(f.clone());
        let c = LlSequent {
            left: p.conclusion.left.clone(),
            right,
        };
        node(LlRule::QuestW, c, Some(f.clone()), vec![p])
    }
}

// ---------------------------------------------------------------------------
// Formula translations
// ---------------------------------------------------------------------------

/// The `t` translation.
pub fn t_translate(a: &Formula, policy: &Policy) -> LlFormula {
    match a {
        Formula::Zero | Formula::Bot => LlFormula::Zero,
        Formula::Var(name) => LlFormula::of_course(LlFormula::atom(name.clone())),
        Formula::And(x, y) => LlFormula::tensor(
            LlFormula::of_course(b_translate(x, policy)),
            LlFormula::of_course(b_translate(y, policy)),
        ),
        Formula::Or(x, y) => LlFormula::plus(
            LlFormula::of_course(b_translate(x, policy)),
            LlFormula::of_course(b_translate(y, policy)),
        ),
        Formula::Imp(x, y) => LlFormula::of_course(LlFormula::lolli(
            t_translate(x, policy),
            b_translate(y, policy),
        )),
    }
}

/// The `b` translation: `t` outside P, `?t` inside.
pub fn b_translate(a: &Formula, policy: &Policy) -> LlFormula {
    let t = t_translate(a, policy);
    if policy.contains(a) {
        LlFormula::why_not(t)
    } else {
        t
    }
}

/// Image of a sequent: `t(Γ) |- ?t(Δ), t(Π)`.
pub fn sequent_image(s: &PSequent, policy: &Policy) -> LlSequent {
    let left = s.antecedent.iter().map(|f| t_translate(f, policy)).collect();
    let mut right: Multiset<LlFormula> = s
        .body
        .iter()
        .map(|f| LlFormula::why_not(t_translate(f, policy)))
        .collect();
    if let Some(f) = &s.stoup {
        right.insert(t_translate(f, policy));
    }
    LlSequent { left, right }
}

// ---------------------------------------------------------------------------
// Inversion
// ---------------------------------------------------------------------------

#[derive(Debug, Error)]
pub enum LinearError {
    #[error("input derivation does not check: {0}")]
    InvalidInput(String),
    #[error("{0}")]
    Shape(String),
}

fn ll_principal_of(d: &LlDerivation) -> Option<LlFormula> {
    if d.principal.is_some() {
        return d.principal.clone();
    }
    // Recover by probing candidates against the schema.
    let pool: Vec<LlFormula> = d
        .conclusion
        .left
        .distinct()
        .chain(d.conclusion.right.distinct())
        .chain(d.premises.iter().flat_map(|p| {
            p.conclusion
                .left
                .distinct()
                .chain(p.conclusion.right.distinct())
        }))
        .cloned()
        .collect();
    pool.into_iter().find(|f| {
        let mut probe = d.clone();
        probe.principal = Some(f.clone());
        validate_ll(&probe).is_ok()
    })
}

/// Inverts one left occurrence of `f = A * B`: from a checker-valid proof of
/// `Γ, A*B |- Δ` builds one of `Γ, A, B |- Δ`.
pub fn invert_tensor(d: &LlDerivation, f: &LlFormula) -> LlDerivation {
    let (fa, fb) = match f {
        LlFormula::Tensor(a, b) => (a.as_ref(), b.as_ref()),
        _ => panic!("invert_tensor: not a tensor"),
    };
    debug_assert!(d.conclusion.left.contains(f));
    let principal = ll_principal_of(d);
    match d.rule {
        LlRule::Ax => build::tensor_r(build::ax(fa.clone()), build::ax(fb.clone()), f),
        LlRule::ZeroL => {
            let mut left = d.conclusion.left.minus_one(f).unwrap();
            left.insert(fa.clone());
            left.insert(fb.clone());
            build::zero_l(LlSequent {
                left,
                right: d.conclusion.right.clone(),
            })
        }
        LlRule::TensorL if principal.as_ref() == Some(f) => d.premises[0].clone(),
        LlRule::BangR | LlRule::QuestL => {
            unreachable!("a bare tensor cannot sit in a promotion context")
        }
        _ => invert_pass(d, f, &|sub| invert_tensor(sub, f)),
    }
}

/// Inverts one left occurrence of `f = A + B` into the two branch proofs
/// `Γ, A |- Δ` and `Γ, B |- Δ`.
pub fn invert_plus(d: &LlDerivation, f: &LlFormula) -> (LlDerivation, LlDerivation) {
    let (fa, fb) = match f {
        LlFormula::Plus(a, b) => (a.as_ref(), b.as_ref()),
        _ => panic!("invert_plus: not a plus"),
    };
    debug_assert!(d.conclusion.left.contains(f));
    let principal = ll_principal_of(d);
    match d.rule {
        LlRule::Ax => (
            build::plus_r1(build::ax(fa.clone()), f),
            build::plus_r2(build::ax(fb.clone()), f),
        ),
        LlRule::ZeroL => {
            let base = d.conclusion.left.minus_one(f).unwrap();
            let mut la = base.clone();
            la.insert(fa.clone());
            let mut lb = base;
            lb.insert(fb.clone());
            (
                build::zero_l(LlSequent {
                    left: la,
                    right: d.conclusion.right.clone(),
                }),
                build::zero_l(LlSequent {
                    left: lb,
                    right: d.conclusion.right.clone(),
                }),
            )
        }
        LlRule::PlusL if principal.as_ref() == Some(f) => {
            (d.premises[0].clone(), d.premises[1].clone())
        }
        LlRule::BangR | LlRule::QuestL => {
            unreachable!("a bare plus cannot sit in a promotion context")
        }
        _ => (
            invert_pass(d, f, &|sub| invert_plus(sub, f).0),
            invert_pass(d, f, &|sub| invert_plus(sub, f).1),
        ),
    }
}

/// Rebuilds `d`'s last rule after applying `inv` to the premise(s) carrying
/// the traced left occurrence of `f`. When the occurrence could come from
/// either premise, the left one is preferred; the right premise then still
/// holds enough copies beyond the one its rule consumes.
fn invert_pass(
    d: &LlDerivation,
    f: &LlFormula,
    inv: &dyn Fn(&LlDerivation) -> LlDerivation,
) -> LlDerivation {
    let principal = ll_principal_of(d).expect("valid node has a principal");
    let prem = &d.premises;
    match d.rule {
        LlRule::TensorL => build::tensor_l(inv(&prem[0]), &principal),
        LlRule::BangL => build::bang_l(inv(&prem[0]), &principal),
        LlRule::BangC => build::bang_c(inv(&prem[0]), &principal),
        LlRule::BangW => build::bang_w(inv(&prem[0]), &principal),
        LlRule::QuestR => build::quest_r(inv(&prem[0]), &principal),
        LlRule::QuestC => build::quest_c(inv(&prem[0]), &principal),
        LlRule::QuestW => build::quest_w(inv(&prem[0]), &principal),
        LlRule::PlusR1 => build::plus_r1(inv(&prem[0]), &principal),
        LlRule::PlusR2 => build::plus_r2(inv(&prem[0]), &principal),
        LlRule::LolliR => build::lolli_r(inv(&prem[0]), &principal),
        LlRule::PlusL => build::plus_l(inv(&prem[0]), inv(&prem[1]), &principal),
        LlRule::TensorR => {
            if prem[0].conclusion.left.contains(f) {
                build::tensor_r(inv(&prem[0]), prem[1].clone(), &principal)
            } else {
                build::tensor_r(prem[0].clone(), inv(&prem[1]), &principal)
            }
        }
        LlRule::LolliL => {
            if prem[0].conclusion.left.contains(f) {
                build::lolli_l(inv(&prem[0]), prem[1].clone(), &principal)
            } else {
                build::lolli_l(prem[0].clone(), inv(&prem[1]), &principal)
            }
        }
        LlRule::Cut => {
            if prem[0].conclusion.left.contains(f) {
                build::cut(inv(&prem[0]), prem[1].clone(), &principal)
            } else {
                build::cut(prem[0].clone(), inv(&prem[1]), &principal)
            }
        }
        LlRule::Ax | LlRule::ZeroL | LlRule::BangR | LlRule::QuestL => {
            unreachable!("handled before commuting")
        }
    }
}

// ---------------------------------------------------------------------------
// Admissible transformers
// ---------------------------------------------------------------------------

/// Contracts two left copies of `t(a)` into one, by case analysis on the
/// shape of the image.
pub fn contract_t(
    d: &LlDerivation,
    a: &Formula,
    policy: &Policy,
) -> Result<LlDerivation, LinearError> {
    let ta = t_translate(a, policy);
    if d.conclusion.left.count(&ta) < 2 {
        return Err(LinearError::Shape(format!(
            "conclusion `{}` does not carry two copies of `{ta}`",
            d.conclusion
        )));
    }
    Ok(contract_ll(d, &ta))
}

fn contract_ll(d: &LlDerivation, f: &LlFormula) -> LlDerivation {
    match f {
        LlFormula::Zero => {
            let left = d.conclusion.left.minus_one(f).unwrap();
            build::zero_l(LlSequent {
                left,
                right: d.conclusion.right.clone(),
            })
        }
        LlFormula::OfCourse(_) => build::bang_c(d.clone(), f),
        LlFormula::Tensor(g1, g2) => {
            let inv = invert_tensor(&invert_tensor(d, f), f);
            let c1 = contract_ll(&inv, g1);
            let c2 = contract_ll(&c1, g2);
            build::tensor_l(c2, f)
        }
        LlFormula::Plus(g1, g2) => {
            let (da, db) = invert_plus(d, f);
            let (daa, _) = invert_plus(&da, f);
            let (_, dbb) = invert_plus(&db, f);
            build::plus_l(contract_ll(&daa, g1), contract_ll(&dbb, g2), f)
        }
        other => panic!("contract_ll: `{other}` is not an image shape"),
    }
}

/// Weakens `t(a)` into the left context.
pub fn weaken_t(d: &LlDerivation, a: &Formula, policy: &Policy) -> LlDerivation {
    weaken_ll(d, &t_translate(a, policy))
}

fn weaken_ll(d: &LlDerivation, f: &LlFormula) -> LlDerivation {
    match f {
        LlFormula::Zero => {
            let mut left = d.conclusion.left.clone();
            left.insert(LlFormula::Zero);
            build::zero_l(LlSequent {
                left,
                right: d.conclusion.right.clone(),
            })
        }
        LlFormula::OfCourse(_) => build::bang_w(d.clone(), f),
        LlFormula::Tensor(g1, g2) => {
            build::tensor_l(weaken_ll(&weaken_ll(d, g1), g2), f)
        }
        LlFormula::Plus(g1, g2) => {
            build::plus_l(weaken_ll(d, g1), weaken_ll(d, g2), f)
        }
        other => panic!("weaken_ll: `{other}` is not an image shape"),
    }
}

/// Promotes a left occurrence: from `Γ, a |- Δ` with `Γ` made of image
/// shapes and `Δ` all `?`-prefixed, derives `Γ, ?a |- Δ`.
pub fn quest_left_t(d: &LlDerivation, a: &LlFormula) -> Result<LlDerivation, LinearError> {
    if !d.conclusion.left.contains(a) {
        return Err(LinearError::Shape(format!(
            "conclusion `{}` does not carry `{a}` on the left",
            d.conclusion
        )));
    }
    if let Some(g) = d.conclusion.right.distinct().find(|g| !g.is_why_not()) {
        return Err(LinearError::Shape(format!(
            "right side not all ?-prefixed: `{g}`"
        )));
    }
    promote_left(d, a)
}

fn promote_left(d: &LlDerivation, a: &LlFormula) -> Result<LlDerivation, LinearError> {
    let others = d.conclusion.left.minus_one(a).unwrap();
    if others.contains(&LlFormula::Zero) {
        let mut left = others;
        left.insert(LlFormula::why_not(a.clone()));
        return Ok(build::zero_l(LlSequent {
            left,
            right: d.conclusion.right.clone(),
        }));
    }
    let blocking = others.distinct().find(|g| !g.is_of_course()).cloned();
    match blocking {
        None => Ok(build::quest_l(d.clone(), &LlFormula::why_not(a.clone()))),
        Some(g) => match &g {
            LlFormula::Tensor(_, _) => {
                let inv = invert_tensor(d, &g);
                Ok(build::tensor_l(promote_left(&inv, a)?, &g))
            }
            LlFormula::Plus(_, _) => {
                let (da, db) = invert_plus(d, &g);
                Ok(build::plus_l(promote_left(&da, a)?, promote_left(&db, a)?, &g))
            }
            other => Err(LinearError::Shape(format!(
                "promotion context: `{other}` is not an image shape"
            ))),
        },
    }
}

/// Promotes a right occurrence: from `Γ |- Δ, a` with `Γ` made of image
/// shapes and `Δ` all `?`-prefixed, derives `Γ |- Δ, !a`.
pub fn bang_right_t(d: &LlDerivation, a: &LlFormula) -> Result<LlDerivation, LinearError> {
    if !d.conclusion.right.contains(a) {
        return Err(LinearError::Shape(format!(
            "conclusion `{}` does not carry `{a}` on the right",
            d.conclusion
        )));
    }
    let rest = d.conclusion.right.minus_one(a).unwrap();
    if let Some(g) = rest.distinct().find(|g| !g.is_why_not()) {
        return Err(LinearError::Shape(format!(
            "right side not all ?-prefixed beside the promoted formula: `{g}`"
        )));
    }
    promote_right(d, a)
}

fn promote_right(d: &LlDerivation, a: &LlFormula) -> Result<LlDerivation, LinearError> {
    if d.conclusion.left.contains(&LlFormula::Zero) {
        let mut right = d.conclusion.right.minus_one(a).unwrap();
        right.insert(LlFormula::of_course(a.clone()));
        return Ok(build::zero_l(LlSequent {
            left: d.conclusion.left.clone(),
            right,
        }));
    }
    match d
        .conclusion
        .left
        .distinct()
        .find(|g| !g.is_of_course())
        .cloned()
    {
        None => Ok(build::bang_r(d.clone(), &LlFormula::of_course(a.clone()))),
        Some(g) => match &g {
            LlFormula::Tensor(_, _) => {
                let inv = invert_tensor(d, &g);
                Ok(build::tensor_l(promote_right(&inv, a)?, &g))
            }
            LlFormula::Plus(_, _) => {
                let (da, db) = invert_plus(d, &g);
                Ok(build::plus_l(
                    promote_right(&da, a)?,
                    promote_right(&db, a)?,
                    &g,
                ))
            }
            other => Err(LinearError::Shape(format!(
                "promotion context: `{other}` is not an image shape"
            ))),
        },
    }
}

// ---------------------------------------------------------------------------
// Derivation translation
// ---------------------------------------------------------------------------

/// Translates a checked derivation of `Γ |- Δ ; Π` into a checker-valid
/// linear derivation of `t(Γ) |- ?t(Δ), t(Π)`.
pub fn translate_derivation(
    d: &Derivation,
    policy: &Policy,
) -> Result<LlDerivation, LinearError> {
    let report = check_derivation(d, policy);
    if !report.is_ok() {
        return Err(LinearError::InvalidInput(report.to_string()));
    }
    Ok(tr(d, policy))
}

fn principal_of(d: &Derivation, policy: &Policy) -> Formula {
    d.principal
        .clone()
        .or_else(|| node_principal(d, policy))
        .expect("checked node has a principal")
}

/// Promotes the component image on the right to `!b(x)`: derelicts first
/// when `x` is in P and the image still shows `t(x)`.
fn bang_component(
    di: LlDerivation,
    x: &Formula,
    from_body: bool,
    policy: &Policy,
) -> LlDerivation {
    let bx = b_translate(x, policy);
    let di = if policy.contains(x) && !from_body {
        build::quest_r(di, &bx)
    } else {
        di
    };
    bang_right_t(&di, &bx).expect("component promotion on a translated image")
}

fn tr(d: &Derivation, policy: &Policy) -> LlDerivation {
    let prem = &d.premises;
    match d.rule {
        Rule::Ax => {
            let a = d.conclusion.stoup.as_ref().unwrap();
            build::ax(t_translate(a, policy))
        }
        Rule::Cut1 => {
            let a = principal_of(d, policy);
            build::cut(tr(&prem[0], policy), tr(&prem[1], policy), &t_translate(&a, policy))
        }
        Rule::Cut2 => {
            let a = principal_of(d, policy);
            let ta = t_translate(&a, policy);
            let q = quest_left_t(&tr(&prem[1], policy), &ta)
                .expect("cut2 right premise image promotes");
            build::cut(tr(&prem[0], policy), q, &LlFormula::why_not(ta))
        }
        Rule::Der => {
            let a = principal_of(d, policy);
            build::quest_r(
                tr(&prem[0], policy),
                &LlFormula::why_not(t_translate(&a, policy)),
            )
        }
        Rule::CR => {
            let a = principal_of(d, policy);
            build::quest_c(
                tr(&prem[0], policy),
                &LlFormula::why_not(t_translate(&a, policy)),
            )
        }
        Rule::WR => {
            let a = principal_of(d, policy);
            build::quest_w(
                tr(&prem[0], policy),
                &LlFormula::why_not(t_translate(&a, policy)),
            )
        }
        Rule::CL => {
            let a = principal_of(d, policy);
            contract_t(&tr(&prem[0], policy), &a, policy)
                .expect("left contraction on a translated image")
        }
        Rule::WL => {
            let a = principal_of(d, policy);
            weaken_t(&tr(&prem[0], policy), &a, policy)
        }
        Rule::Zero | Rule::Bot => build::zero_l(sequent_image(&d.conclusion, policy)),
        Rule::And1L => {
            // Components are outside P, so their images are already t-shapes.
            let f = principal_of(d, policy);
            let (x, y) = and_parts(&f);
            let d1 = build::bang_l(
                tr(&prem[0], policy),
                &LlFormula::of_course(b_translate(x, policy)),
            );
            let d2 = build::bang_l(d1, &LlFormula::of_course(b_translate(y, policy)));
            build::tensor_l(d2, &t_translate(&f, policy))
        }
        Rule::And2L => {
            let f = principal_of(d, policy);
            let (x, y) = and_parts(&f);
            let mut cur = tr(&prem[0], policy);
            for comp in [x, y] {
                let tc = t_translate(comp, policy);
                if policy.contains(comp) {
                    cur = quest_left_t(&cur, &tc).expect("component image promotes");
                }
                cur = build::bang_l(cur, &LlFormula::of_course(b_translate(comp, policy)));
            }
            build::tensor_l(cur, &t_translate(&f, policy))
        }
        Rule::And1R | Rule::And2R | Rule::And3R | Rule::And4R => {
            let f = principal_of(d, policy);
            let (x, y) = and_parts(&f);
            let (x_from_body, y_from_body) = match d.rule {
                Rule::And1R => (false, false),
                Rule::And2R => (true, true),
                Rule::And3R => (false, true),
                Rule::And4R => (true, false),
                _ => unreachable!(),
            };
            let left = bang_component(tr(&prem[0], policy), x, x_from_body, policy);
            let right = bang_component(tr(&prem[1], policy), y, y_from_body, policy);
            build::tensor_r(left, right, &t_translate(&f, policy))
        }
        Rule::Or1L => {
            let f = principal_of(d, policy);
            let (x, y) = or_parts(&f);
            let da = build::bang_l(
                tr(&prem[0], policy),
                &LlFormula::of_course(b_translate(x, policy)),
            );
            let db = build::bang_l(
                tr(&prem[1], policy),
                &LlFormula::of_course(b_translate(y, policy)),
            );
            build::plus_l(da, db, &t_translate(&f, policy))
        }
        Rule::Or2L => {
            let f = principal_of(d, policy);
            let (x, y) = or_parts(&f);
            let branch = |i: usize, comp: &Formula| {
                let mut cur = tr(&prem[i], policy);
                let tc = t_translate(comp, policy);
                if policy.contains(comp) {
                    cur = quest_left_t(&cur, &tc).expect("component image promotes");
                }
                build::bang_l(cur, &LlFormula::of_course(b_translate(comp, policy)))
            };
            let da = branch(0, x);
            let db = branch(1, y);
            build::plus_l(da, db, &t_translate(&f, policy))
        }
        Rule::Or1R | Rule::Or2R | Rule::Or3R | Rule::Or4R => {
            let f = principal_of(d, policy);
            let (x, y) = or_parts(&f);
            let (comp, from_body, first) = match d.rule {
                Rule::Or1R => (x, false, true),
                Rule::Or2R => (y, false, false),
                Rule::Or3R => (x, true, true),
                Rule::Or4R => (y, true, false),
                _ => unreachable!(),
            };
            let side = bang_component(tr(&prem[0], policy), comp, from_body, policy);
            let tf = t_translate(&f, policy);
            if first {
                build::plus_r1(side, &tf)
            } else {
                build::plus_r2(side, &tf)
            }
        }
        Rule::Imp1R | Rule::Imp2R => {
            let f = principal_of(d, policy);
            let (x, y) = imp_parts(&f);
            let from_body = d.rule == Rule::Imp2R;
            let by = b_translate(y, policy);
            let mut cur = tr(&prem[0], policy);
            if policy.contains(y) && !from_body {
                cur = build::quest_r(cur, &by);
            }
            let lolli = LlFormula::lolli(t_translate(x, policy), by);
            cur = build::lolli_r(cur, &lolli);
            bang_right_t(&cur, &lolli).expect("implication image promotes")
        }
        Rule::Imp1L | Rule::Imp2L => {
            let f = principal_of(d, policy);
            let (x, y) = imp_parts(&f);
            let by = b_translate(y, policy);
            let mut left_part = tr(&prem[0], policy);
            if policy.contains(y) {
                left_part = quest_left_t(&left_part, &t_translate(y, policy))
                    .expect("result image promotes");
            }
            let lolli = LlFormula::lolli(t_translate(x, policy), by);
            let step = build::lolli_l(tr(&prem[1], policy), left_part, &lolli);
            build::bang_l(step, &t_translate(&f, policy))
        }
        Rule::Imp3L => {
            let f = principal_of(d, policy);
            let (x, y) = imp_parts(&f);
            let tx = t_translate(x, policy);
            let by = b_translate(y, policy);
            let mut left_part = tr(&prem[0], policy);
            if policy.contains(y) {
                left_part = quest_left_t(&left_part, &t_translate(y, policy))
                    .expect("result image promotes");
            }
            let lolli = LlFormula::lolli(tx.clone(), by);
            let step = build::lolli_l(build::ax(tx.clone()), left_part, &lolli);
            let step = build::bang_l(step, &t_translate(&f, policy));
            let step = quest_left_t(&step, &tx).expect("argument image promotes");
            build::cut(tr(&prem[1], policy), step, &LlFormula::why_not(tx))
        }
    }
}

fn and_parts(f: &Formula) -> (&Formula, &Formula) {
    match f {
        Formula::And(a, b) => (a, b),
        _ => unreachable!(),
    }
}

fn or_parts(f: &Formula) -> (&Formula, &Formula) {
    match f {
        Formula::Or(a, b) => (a, b),
        _ => unreachable!(),
    }
}

fn imp_parts(f: &Formula) -> (&Formula, &Formula) {
    match f {
        Formula::Imp(a, b) => (a, b),
        _ => unreachable!(),
    }
}

// ---------------------------------------------------------------------------
// Proof file encoding
// ---------------------------------------------------------------------------

impl LlDerivation {
    pub fn to_sexpr(&self) -> Sexpr {
        sexpr::encode_node(
            self.rule.tag(),
            self.conclusion.to_string(),
            self.principal.as_ref().map(|f| f.to_string()),
            self.premises.iter().map(LlDerivation::to_sexpr).collect(),
        )
    }

    pub fn to_proof_text(&self) -> String {
        self.to_sexpr().pretty()
    }

    pub fn from_sexpr(sx: &Sexpr) -> Result<LlDerivation, String> {
        let node = sexpr::decode_node(sx).map_err(|e| e.to_string())?;
        let rule = LlRule::from_tag(node.tag)
            .ok_or_else(|| format!("unknown linear rule tag `{}`", node.tag))?;
        let conclusion = LlSequent::parse(node.sequent)
            .map_err(|e| format!("rule {}: bad sequent `{}`: {e}", node.tag, node.sequent))?;
        let principal = node
            .principal
            .map(|p| parse_ll_formula(p).map_err(|e| format!("bad principal `{p}`: {e}")))
            .transpose()?;
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
            .map(|p| LlDerivation::from_sexpr(p))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(LlDerivation {
            conclusion,
            rule,
            principal,
            premises,
        })
    }

    pub fn from_proof_text(text: &str) -> Result<LlDerivation, String> {
        LlDerivation::from_sexpr(&sexpr::parse(text).map_err(|e| e.to_string())?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::build as mlp;
    use crate::formula::{parse_formula, Formula as F};

    fn v(name: &str) -> F {
        F::var(name)
    }

    fn ll_ok(d: &LlDerivation) {
        let report = check_ll(d);
        assert!(report.is_ok(), "{report}\n{}", d.to_proof_text());
    }

    #[test]
    fn translation_equations() {
        let bot_only = Policy::BotOnly;
        assert_eq!(t_translate(&v("x_c"), &bot_only).to_string(), "!x_c");
        assert_eq!(t_translate(&F::Bot, &bot_only).to_string(), "0");
        assert_eq!(t_translate(&F::Zero, &bot_only).to_string(), "0");
        let conj = parse_formula("p & q").unwrap();
        assert_eq!(t_translate(&conj, &bot_only).to_string(), "!!p * !!q");
        assert_eq!(b_translate(&v("p"), &bot_only).to_string(), "!p");
        assert_eq!(
            b_translate(&v("x_c"), &Policy::ClassicalVars).to_string(),
            "?!x_c"
        );
        assert_eq!(b_translate(&F::Bot, &bot_only).to_string(), "?0");
        let imp = parse_formula("p -> q").unwrap();
        assert_eq!(t_translate(&imp, &bot_only).to_string(), "!(!p -o !q)");
    }

    #[test]
    fn ll_formula_roundtrip() {
        for text in ["!x_c", "0", "!!p * !!q", "!(!p -o !q)", "?0 + !p", "!p -o ?q -o 0"] {
            let f = parse_ll_formula(text).unwrap();
            assert_eq!(f.to_string(), text);
        }
    }

    #[test]
    fn checker_accepts_ax_and_rejects_bad_promotion() {
        ll_ok(&build::ax(parse_ll_formula("!p").unwrap()));
        // Promotion with a bare tensor in the left context must fail.
        let tensor = parse_ll_formula("!p * !q").unwrap();
        let premise = LlDerivation {
            conclusion: LlSequent::new([tensor.clone()], [LlFormula::atom("x")]),
            rule: LlRule::Ax,
            principal: None,
            premises: vec![],
        };
        let bad = LlDerivation {
            conclusion: LlSequent::new([tensor], [parse_ll_formula("!x").unwrap()]),
            rule: LlRule::BangR,
            principal: None,
            premises: vec![premise],
        };
        let report = check_ll(&bad);
        assert!(report
            .failures
            .iter()
            .any(|f| f.message.contains("promotion context")));
    }

    #[test]
    fn inversion_preserves_validity() {
        // Build Γ, !p * !q |- ... then invert.
        let f = parse_ll_formula("!p * !q").unwrap();
        let d = build::ax(f.clone());
        ll_ok(&d);
        let inv = invert_tensor(&d, &f);
        ll_ok(&inv);
        assert_eq!(inv.conclusion.to_string(), "!p, !q |- !p * !q");

        let g = parse_ll_formula("!p + !q").unwrap();
        let d = build::ax(g.clone());
        let (da, db) = invert_plus(&d, &g);
        ll_ok(&da);
        ll_ok(&db);
        assert_eq!(da.conclusion.to_string(), "!p |- !p + !q");
        assert_eq!(db.conclusion.to_string(), "!q |- !p + !q");
    }

    #[test]
    fn contract_primitive_shape() {
        // one bang_c when the image is !-prefixed
        let policy = Policy::BotOnly;
        let ta = t_translate(&v("p"), &policy);
        let base = build::ax(ta.clone());
        let two = build::bang_w(base, &ta);
        let out = contract_t(&two, &v("p"), &policy).unwrap();
        ll_ok(&out);
        assert_eq!(out.rule, LlRule::BangC);
    }

    #[test]
    fn contract_tensor_shape() {
        let policy = Policy::BotOnly;
        let a = parse_formula("p & q").unwrap();
        let ta = t_translate(&a, &policy);
        let base = build::ax(ta.clone());
        let two = weaken_t(&base, &a, &policy);
        assert_eq!(two.conclusion.left.count(&ta), 2);
        let out = contract_t(&two, &a, &policy).unwrap();
        ll_ok(&out);
        assert_eq!(out.conclusion.left.count(&ta), 1);
        assert_eq!(out.conclusion.right, two.conclusion.right);
    }

    #[test]
    fn weaken_shapes() {
        let policy = Policy::BotOnly;
        let base = build::ax(t_translate(&v("p"), &policy));
        for text in ["q", "bot", "q & r", "q | r", "q -> r"] {
            let a = parse_formula(text).unwrap();
            let out = weaken_t(&base, &a, &policy);
            ll_ok(&out);
            assert!(out.conclusion.left.contains(&t_translate(&a, &policy)));
        }
    }

    #[test]
    fn promotion_transformers() {
        let policy = Policy::BotOnly;
        // context {!p}, a = !q: single quest_l
        let tq = t_translate(&v("q"), &policy);
        let base = build::quest_r(
            build::ax(tq.clone()),
            &LlFormula::why_not(tq.clone()),
        );
        let with_ctx = weaken_t(&base, &v("p"), &policy);
        let out = quest_left_t(&with_ctx, &tq).unwrap();
        ll_ok(&out);
        assert!(out.conclusion.left.contains(&LlFormula::why_not(tq.clone())));

        // bang_right_t on a bare axiom
        let base = build::ax(tq.clone());
        let err = bang_right_t(&base, &tq);
        // right side beside the promoted formula is empty: fine
        let out = err.unwrap();
        ll_ok(&out);
        assert!(out.conclusion.right.contains(&LlFormula::of_course(tq)));

        // zero in the context short-circuits
        let with_zero = weaken_t(&with_ctx, &F::Bot, &policy);
        let tp = t_translate(&v("p"), &policy);
        let out = quest_left_t(&with_zero, &tp).unwrap();
        ll_ok(&out);
        assert_eq!(out.rule, LlRule::ZeroL);
    }

    #[test]
    fn translate_axiom_and_der() {
        let policy = Policy::ClassicalVars;
        let d = mlp::ax(v("p"));
        let ll = translate_derivation(&d, &policy).unwrap();
        ll_ok(&ll);
        assert_eq!(ll.conclusion.to_string(), "!p |- !p");

        let d = mlp::der(mlp::ax(v("x_c")));
        let ll = translate_derivation(&d, &policy).unwrap();
        ll_ok(&ll);
        assert_eq!(ll.conclusion, sequent_image(&d.conclusion, &policy));
        assert_eq!(ll.conclusion.to_string(), "!x_c |- ?!x_c");
    }

    #[test]
    fn translate_imp3_l_has_display_shape() {
        let policy = Policy::ClassicalVars;
        // left premise: y_c, q |- ; via der? needs empty stoup: use der of ax(q)… q not in P.
        // Use: b, y_c |- y_c ;  :  w_l(der(ax(y_c)), b) with b = q (outside P keeps it honest).
        let left = mlp::w_l(mlp::der(mlp::ax(v("y_c"))), v("q"));
        // right premise: x_c |- x_c ; via der(ax), giving the argument in the body.
        let right = mlp::der(mlp::ax(v("x_c")));
        let d = mlp::imp3_l(left, &v("q"), right, &v("x_c"));
        let report = check_derivation(&d, &policy);
        assert!(report.is_ok(), "{report}");
        let ll = translate_derivation(&d, &policy).unwrap();
        ll_ok(&ll);
        assert_eq!(ll.conclusion, sequent_image(&d.conclusion, &policy));
        // Root of the image is the final cut on ?t(x_c).
        assert_eq!(ll.rule, LlRule::Cut);
        assert_eq!(
            ll.principal.as_ref().map(|f| f.to_string()),
            Some("?!x_c".to_string())
        );
    }
}
