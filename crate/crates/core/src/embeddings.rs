//! Self-contained LK and LJ proof trees and checkers, plus the four
//! translations between them and the mixed calculus.
//!
//! The LK and LJ rule sets are fixed to exactly the images used by the
//! translations: multiplicative cut, context-splitting right conjunction and
//! left implication, additive left disjunction, and a bare `bot |-`
//! (resp. `0` in any left context) for absurdity. LK formulas use `bot` as
//! absurdity, LJ formulas use `0`, and LJ sequents have exactly one
//! succedent formula.
//!
//! Embedding LK needs a stable set K of classically usable formulas
//! (`K ⊆ P`, `0 ∉ K`) covering the proof; left rules map to the empty-stoup
//! rules of the mixed calculus and right rules pass through the stoup and
//! are immediately discharged by `der`. Embedding LJ needs a stable set I
//! disjoint from P with `bot ∉ I`; its rules map to the stoup-only rules.
//! Extraction goes the other way: LK by fusing body and stoup (`der`
//! becomes a no-op), LJ by normalizing first — the normal form of a
//! stoup-only sequent over I can only use the intuitionistic rule images.

use std::fmt;

use thiserror::Error;

use crate::calculus::{build, CheckFailure, CheckReport, Derivation, PSequent, Rule};
use crate::cutelim::{self, CutElimError};
use crate::formula::{
    is_stable, parse_formula, parse_formula_list, Formula, FormulaSet, ParseError, Policy,
};
use crate::multiset::Multiset;
use crate::sexpr::{self, Sexpr};

// ---------------------------------------------------------------------------
// LK
// ---------------------------------------------------------------------------

/// Two-sided classical sequent `Γ |- Δ`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct LkSequent {
    pub left: Multiset<Formula>,
    pub right: Multiset<Formula>,
}

impl LkSequent {
    pub fn new(
        left: impl IntoIterator<Item = Formula>,
        right: impl IntoIterator<Item = Formula>,
    ) -> Self {
        LkSequent {
            left: left.into_iter().collect(),
            right: right.into_iter().collect(),
        }
    }

    pub fn parse(input: &str) -> Result<LkSequent, ParseError> {
        let turnstile = input.find("|-").ok_or_else(|| ParseError {
            pos: input.len(),
            msg: "expected `|-`".to_string(),
        })?;
        Ok(LkSequent {
            left: parse_formula_list(&input[..turnstile])?.into_iter().collect(),
            right: parse_formula_list(&input[turnstile + 2..])?.into_iter().collect(),
        })
    }
}

impl fmt::Display for LkSequent {
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
pub enum LkRule {
    Ax,
    Cut,
    CL,
    CR,
    WL,
    WR,
    BotL,
    AndL,
    AndR,
    OrL,
    OrR1,
    OrR2,
    ImpL,
    ImpR,
}

pub const ALL_LK_RULES: [LkRule; 14] = [
    LkRule::Ax,
    LkRule::Cut,
    LkRule::CL,
    LkRule::CR,
    LkRule::WL,
    LkRule::WR,
    LkRule::BotL,
    LkRule::AndL,
    LkRule::AndR,
    LkRule::OrL,
    LkRule::OrR1,
    LkRule::OrR2,
    LkRule::ImpL,
    LkRule::ImpR,
];

impl LkRule {
    pub fn tag(self) -> &'static str {
        match self {
            LkRule::Ax => "lk.ax",
            LkRule::Cut => "lk.cut",
            LkRule::CL => "lk.c_l",
            LkRule::CR => "lk.c_r",
            LkRule::WL => "lk.w_l",
            LkRule::WR => "lk.w_r",
            LkRule::BotL => "lk.bot_l",
            LkRule::AndL => "lk.and_l",
            LkRule::AndR => "lk.and_r",
            LkRule::OrL => "lk.or_l",
            LkRule::OrR1 => "lk.or_r1",
            LkRule::OrR2 => "lk.or_r2",
            LkRule::ImpL => "lk.imp_l",
            LkRule::ImpR => "lk.imp_r",
        }
    }

    pub fn from_tag(tag: &str) -> Option<LkRule> {
        ALL_LK_RULES.iter().copied().find(|r| r.tag() == tag)
    }

    pub fn arity(self) -> usize {
        match self {
            LkRule::Ax | LkRule::BotL => 0,
            LkRule::CL
            | LkRule::CR
            | LkRule::WL
            | LkRule::WR
            | LkRule::AndL
            | LkRule::OrR1
            | LkRule::OrR2
            | LkRule::ImpR => 1,
            LkRule::Cut | LkRule::AndR | LkRule::OrL | LkRule::ImpL => 2,
        }
    }
}

impl fmt::Display for LkRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.tag())
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LkDerivation {
    pub conclusion: LkSequent,
    pub rule: LkRule,
    pub principal: Option<Formula>,
    pub premises: Vec<LkDerivation>,
}

impl LkDerivation {
    pub fn all_formulas(&self) -> FormulaSet {
        let mut out = FormulaSet::new();
        self.visit(&mut |_, d| {
            out.extend(d.conclusion.left.distinct().cloned());
            out.extend(d.conclusion.right.distinct().cloned());
        });
        out
    }

    pub fn visit<F: FnMut(&[usize], &LkDerivation)>(&self, f: &mut F) {
        fn go<F: FnMut(&[usize], &LkDerivation)>(
            d: &LkDerivation,
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
}

/// Checks every node of an LK derivation against its rule schema.
pub fn check_lk(d: &LkDerivation) -> CheckReport {
    let mut report = CheckReport::default();
    let mut path = Vec::new();
    check_lk_node(d, &mut path, &mut report);
    report
}

fn check_lk_node(d: &LkDerivation, path: &mut Vec<usize>, report: &mut CheckReport) {
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
    } else if let Err(msg) = validate_lk(d) {
        report.failures.push(CheckFailure {
            path: path.clone(),
            message: msg,
        });
    }
    for (i, p) in d.premises.iter().enumerate() {
        path.push(i);
        check_lk_node(p, path, report);
        path.pop();
    }
}

fn single_extension(big: &Multiset<Formula>, small: &Multiset<Formula>) -> Option<Formula> {
    let diff = big.minus(small)?;
    if diff.len() == 1 {
        diff.iter().next().cloned()
    } else {
        None
    }
}

fn validate_lk(d: &LkDerivation) -> Result<(), String> {
    let c = &d.conclusion;
    let prem = &d.premises;
    match d.rule {
        LkRule::Ax => {
            if c.left.len() == 1 && c.right == c.left {
                Ok(())
            } else {
                Err("lk.ax: conclusion must be `A |- A`".to_string())
            }
        }
        LkRule::BotL => {
            if c.left == Multiset::singleton(Formula::Bot) && c.right.is_empty() {
                Ok(())
            } else {
                Err("lk.bot_l: conclusion must be `bot |-`".to_string())
            }
        }
        LkRule::Cut => {
            let (p, q) = (&prem[0].conclusion, &prem[1].conclusion);
            let candidates: Vec<Formula> = match &d.principal {
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
            Err("lk.cut: no cut formula matches the recombination".to_string())
        }
        LkRule::CL => {
            let p = &prem[0].conclusion;
            if p.right != c.right {
                return Err("lk.c_l: succedent must be unchanged".to_string());
            }
            let a = single_extension(&p.left, &c.left)
                .ok_or("lk.c_l: premise must extend the conclusion by one copy")?;
            if c.left.contains(&a) {
                Ok(())
            } else {
                Err("lk.c_l: contracted formula must remain present".to_string())
            }
        }
        LkRule::CR => {
            let p = &prem[0].conclusion;
            if p.left != c.left {
                return Err("lk.c_r: antecedent must be unchanged".to_string());
            }
            let a = single_extension(&p.right, &c.right)
                .ok_or("lk.c_r: premise must extend the conclusion by one copy")?;
            if c.right.contains(&a) {
                Ok(())
            } else {
                Err("lk.c_r: contracted formula must remain present".to_string())
            }
        }
        LkRule::WL => {
            let p = &prem[0].conclusion;
            if p.right != c.right {
                return Err("lk.w_l: succedent must be unchanged".to_string());
            }
            single_extension(&c.left, &p.left)
                .map(|_| ())
                .ok_or_else(|| "lk.w_l: conclusion must extend the premise by one formula".to_string())
        }
        LkRule::WR => {
            let p = &prem[0].conclusion;
            if p.left != c.left {
                return Err("lk.w_r: antecedent must be unchanged".to_string());
            }
            single_extension(&c.right, &p.right)
                .map(|_| ())
                .ok_or_else(|| "lk.w_r: conclusion must extend the premise by one formula".to_string())
        }
        LkRule::AndL => {
            let p = &prem[0].conclusion;
            if p.right != c.right {
                return Err("lk.and_l: succedent must be unchanged".to_string());
            }
            lk_candidates(d, c.left.distinct(), |f| {
                let (a, b) = match f {
                    Formula::And(a, b) => (a.as_ref(), b.as_ref()),
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
        LkRule::AndR => {
            let (p, q) = (&prem[0].conclusion, &prem[1].conclusion);
            lk_candidates(d, c.right.distinct(), |f| {
                let (a, b) = match f {
                    Formula::And(a, b) => (a.as_ref(), b.as_ref()),
                    _ => return false,
                };
                let (pr, qr) = match (p.right.minus_one(a), q.right.minus_one(b)) {
                    (Some(x), Some(y)) => (x, y),
                    _ => return false,
                };
                let mut want_right = pr.union(&qr);
                want_right.insert(f.clone());
                c.left == p.left.union(&q.left) && c.right == want_right
            })
        }
        LkRule::OrL => {
            let (p, q) = (&prem[0].conclusion, &prem[1].conclusion);
            if p.right != c.right || q.right != c.right {
                return Err("lk.or_l: succedents must be shared".to_string());
            }
            lk_candidates(d, c.left.distinct(), |f| {
                let (a, b) = match f {
                    Formula::Or(a, b) => (a.as_ref(), b.as_ref()),
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
        LkRule::OrR1 | LkRule::OrR2 => {
            let p = &prem[0].conclusion;
            if p.left != c.left {
                return Err(format!("{}: antecedent must be unchanged", d.rule));
            }
            let pick_first = d.rule == LkRule::OrR1;
            lk_candidates(d, c.right.distinct(), |f| {
                let (a, b) = match f {
                    Formula::Or(a, b) => (a.as_ref(), b.as_ref()),
                    _ => return false,
                };
                let component = if pick_first { a } else { b };
                let mut want = match c.right.minus_one(f) {
                    Some(m) => m,
                    None => return false,
                };
                want.insert(component.clone());
                p.right == want
            })
        }
        LkRule::ImpL => {
            let (p, q) = (&prem[0].conclusion, &prem[1].conclusion);
            lk_candidates(d, c.left.distinct(), |f| {
                let (a, b) = match f {
                    Formula::Imp(a, b) => (a.as_ref(), b.as_ref()),
                    _ => return false,
                };
                let (pl, qr) = match (p.left.minus_one(b), q.right.minus_one(a)) {
                    (Some(x), Some(y)) => (x, y),
                    _ => return false,
                };
                let mut want_left = pl.union(&q.left);
                want_left.insert(f.clone());
                c.left == want_left && c.right == p.right.union(&qr)
            })
        }
        LkRule::ImpR => {
            let p = &prem[0].conclusion;
            lk_candidates(d, c.right.distinct(), |f| {
                let (a, b) = match f {
                    Formula::Imp(a, b) => (a.as_ref(), b.as_ref()),
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
    }
}

fn lk_candidates<'a>(
    d: &LkDerivation,
    pool: impl Iterator<Item = &'a Formula>,
    ok: impl Fn(&Formula) -> bool,
) -> Result<(), String> {
    let candidates: Vec<Formula> = match &d.principal {
        Some(f) => vec![f.clone()],
        None => pool.cloned().collect(),
    };
    if candidates.iter().any(|f| ok(f)) {
        Ok(())
    } else {
        Err(format!("{}: no principal formula candidate validates", d.rule))
    }
}

// ---------------------------------------------------------------------------
// LJ
// ---------------------------------------------------------------------------

/// Intuitionistic sequent `Γ |- A` with exactly one succedent formula.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct LjSequent {
    pub left: Multiset<Formula>,
    pub right: Formula,
}

impl LjSequent {
    pub fn new(left: impl IntoIterator<Item = Formula>, right: Formula) -> Self {
        LjSequent {
            left: left.into_iter().collect(),
            right,
        }
    }

    pub fn parse(input: &str) -> Result<LjSequent, ParseError> {
        let turnstile = input.find("|-").ok_or_else(|| ParseError {
            pos: input.len(),
            msg: "expected `|-`".to_string(),
        })?;
        Ok(LjSequent {
            left: parse_formula_list(&input[..turnstile])?.into_iter().collect(),
            right: parse_formula(&input[turnstile + 2..])?,
        })
    }
}

impl fmt::Display for LjSequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.left.is_empty() {
            write!(f, "{} ", self.left)?;
        }
        write!(f, "|- {}", self.right)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum LjRule {
    Ax,
    Cut,
    CL,
    WL,
    ZeroL,
    AndL,
    AndR,
    OrL,
    OrR1,
    OrR2,
    ImpL,
    ImpR,
}

pub const ALL_LJ_RULES: [LjRule; 12] = [
    LjRule::Ax,
    LjRule::Cut,
    LjRule::CL,
    LjRule::WL,
    LjRule::ZeroL,
    LjRule::AndL,
    LjRule::AndR,
    LjRule::OrL,
    LjRule::OrR1,
    LjRule::OrR2,
    LjRule::ImpL,
    LjRule::ImpR,
];

impl LjRule {
    pub fn tag(self) -> &'static str {
        match self {
            LjRule::Ax => "lj.ax",
            LjRule::Cut => "lj.cut",
            LjRule::CL => "lj.c_l",
            LjRule::WL => "lj.w_l",
            LjRule::ZeroL => "lj.zero_l",
            LjRule::AndL => "lj.and_l",
            LjRule::AndR => "lj.and_r",
            LjRule::OrL => "lj.or_l",
            LjRule::OrR1 => "lj.or_r1",
            LjRule::OrR2 => "lj.or_r2",
            LjRule::ImpL => "lj.imp_l",
            LjRule::ImpR => "lj.imp_r",
        }
    }

    pub fn from_tag(tag: &str) -> Option<LjRule> {
        ALL_LJ_RULES.iter().copied().find(|r| r.tag() == tag)
    }

    pub fn arity(self) -> usize {
        match self {
            LjRule::Ax | LjRule::ZeroL => 0,
            LjRule::CL | LjRule::WL | LjRule::AndL | LjRule::OrR1 | LjRule::OrR2
            | LjRule::ImpR => 1,
            LjRule::Cut | LjRule::AndR | LjRule::OrL | LjRule::ImpL => 2,
        }
    }
}

impl fmt::Display for LjRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.tag())
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LjDerivation {
    pub conclusion: LjSequent,
    pub rule: LjRule,
    pub principal: Option<Formula>,
    pub premises: Vec<LjDerivation>,
}

impl LjDerivation {
    pub fn all_formulas(&self) -> FormulaSet {
        let mut out = FormulaSet::new();
        self.visit(&mut |_, d| {
            out.extend(d.conclusion.left.distinct().cloned());
            out.insert(d.conclusion.right.clone());
        });
        out
    }

    pub fn visit<F: FnMut(&[usize], &LjDerivation)>(&self, f: &mut F) {
        fn go<F: FnMut(&[usize], &LjDerivation)>(
            d: &LjDerivation,
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
}

/// Checks every node of an LJ derivation against its rule schema.
pub fn check_lj(d: &LjDerivation) -> CheckReport {
    let mut report = CheckReport::default();
    let mut path = Vec::new();
    check_lj_node(d, &mut path, &mut report);
    report
}

fn check_lj_node(d: &LjDerivation, path: &mut Vec<usize>, report: &mut CheckReport) {
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
    } else if let Err(msg) = validate_lj(d) {
        report.failures.push(CheckFailure {
            path: path.clone(),
            message: msg,
        });
    }
    for (i, p) in d.premises.iter().enumerate() {
        path.push(i);
        check_lj_node(p, path, report);
        path.pop();
    }
}

fn validate_lj(d: &LjDerivation) -> Result<(), String> {
    let c = &d.conclusion;
    let prem = &d.premises;
    match d.rule {
        LjRule::Ax => {
            if c.left == Multiset::singleton(c.right.clone()) {
                Ok(())
            } else {
                Err("lj.ax: conclusion must be `A |- A`".to_string())
            }
        }
        LjRule::ZeroL => {
            if c.left.contains(&Formula::Zero) {
                Ok(())
            } else {
                Err("lj.zero_l: antecedent must contain 0".to_string())
            }
        }
        LjRule::Cut => {
            let (p, q) = (&prem[0].conclusion, &prem[1].conclusion);
            let a = &p.right;
            if q.right != c.right {
                return Err("lj.cut: succedent must come from the right premise".to_string());
            }
            let ql = q
                .left
                .minus_one(a)
                .ok_or("lj.cut: cut formula must occur in the right antecedent")?;
            if c.left == p.left.union(&ql) {
                Ok(())
            } else {
                Err("lj.cut: antecedents do not recombine".to_string())
            }
        }
        LjRule::CL => {
            let p = &prem[0].conclusion;
            if p.right != c.right {
                return Err("lj.c_l: succedent must be unchanged".to_string());
            }
            let a = single_extension(&p.left, &c.left)
                .ok_or("lj.c_l: premise must extend the conclusion by one copy")?;
            if c.left.contains(&a) {
                Ok(())
            } else {
                Err("lj.c_l: contracted formula must remain present".to_string())
            }
        }
        LjRule::WL => {
            let p = &prem[0].conclusion;
            if p.right != c.right {
                return Err("lj.w_l: succedent must be unchanged".to_string());
            }
            single_extension(&c.left, &p.left)
                .map(|_| ())
                .ok_or_else(|| "lj.w_l: conclusion must extend the premise by one formula".to_string())
        }
        LjRule::AndL => {
            let p = &prem[0].conclusion;
            if p.right != c.right {
                return Err("lj.and_l: succedent must be unchanged".to_string());
            }
            lj_candidates(d, c.left.distinct(), |f| {
                let (a, b) = match f {
                    Formula::And(a, b) => (a.as_ref(), b.as_ref()),
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
        LjRule::AndR => {
            let (p, q) = (&prem[0].conclusion, &prem[1].conclusion);
            match &c.right {
                Formula::And(a, b) if p.right == **a && q.right == **b => {
                    if c.left == p.left.union(&q.left) {
                        Ok(())
                    } else {
                        Err("lj.and_r: antecedents do not recombine".to_string())
                    }
                }
                _ => Err("lj.and_r: succedent must combine the premise succedents".to_string()),
            }
        }
        LjRule::OrL => {
            let (p, q) = (&prem[0].conclusion, &prem[1].conclusion);
            if p.right != c.right || q.right != c.right {
                return Err("lj.or_l: succedents must be shared".to_string());
            }
            lj_candidates(d, c.left.distinct(), |f| {
                let (a, b) = match f {
                    Formula::Or(a, b) => (a.as_ref(), b.as_ref()),
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
        LjRule::OrR1 | LjRule::OrR2 => {
            let p = &prem[0].conclusion;
            if p.left != c.left {
                return Err(format!("{}: antecedent must be unchanged", d.rule));
            }
            match &c.right {
                Formula::Or(a, b) => {
                    let want = if d.rule == LjRule::OrR1 { a } else { b };
                    if p.right == **want {
                        Ok(())
                    } else {
                        Err(format!("{}: premise proves the wrong disjunct", d.rule))
                    }
                }
                _ => Err(format!("{}: succedent must be a disjunction", d.rule)),
            }
        }
        LjRule::ImpL => {
            let (p, q) = (&prem[0].conclusion, &prem[1].conclusion);
            if p.right != c.right {
                return Err("lj.imp_l: succedent must come from the left premise".to_string());
            }
            lj_candidates(d, c.left.distinct(), |f| {
                let (a, b) = match f {
                    Formula::Imp(a, b) => (a.as_ref(), b.as_ref()),
                    _ => return false,
                };
                if q.right != *a {
                    return false;
                }
                let pl = match p.left.minus_one(b) {
                    Some(m) => m,
                    None => return false,
                };
                let mut want = pl.union(&q.left);
                want.insert(f.clone());
                c.left == want
            })
        }
        LjRule::ImpR => match &c.right {
            Formula::Imp(a, b) => {
                let p = &prem[0].conclusion;
                let mut want_left = c.left.clone();
                want_left.insert(a.as_ref().clone());
                if p.left == want_left && p.right == **b {
                    Ok(())
                } else {
                    Err("lj.imp_r: premise does not match the schema".to_string())
                }
            }
            _ => Err("lj.imp_r: succedent must be an implication".to_string()),
        },
    }
}

fn lj_candidates<'a>(
    d: &LjDerivation,
    pool: impl Iterator<Item = &'a Formula>,
    ok: impl Fn(&Formula) -> bool,
) -> Result<(), String> {
    let candidates: Vec<Formula> = match &d.principal {
        Some(f) => vec![f.clone()],
        None => pool.cloned().collect(),
    };
    if candidates.iter().any(|f| ok(f)) {
        Ok(())
    } else {
        Err(format!("{}: no principal formula candidate validates", d.rule))
    }
}

// ---------------------------------------------------------------------------
// Translation errors
// ---------------------------------------------------------------------------

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("input derivation does not check: {0}")]
    InvalidInput(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("normalization failed: {0}")]
    Normalization(#[from] CutElimError),
    #[error("normal form uses a rule outside the intuitionistic images: {0}")]
    Internal(String),
}

fn stable_hypothesis(set: &FormulaSet, name: &str) -> Result<(), EmbedError> {
    if is_stable(set) {
        Ok(())
    } else {
        Err(EmbedError::Hypothesis(format!("{name} is not stable")))
    }
}

// ---------------------------------------------------------------------------
// LK <-> mixed
// ---------------------------------------------------------------------------

/// Embeds an LK derivation as a mixed derivation of `Γ |- Δ ;` with an
/// empty stoup throughout, under the hypotheses: `k_set` stable, contained
/// in P, free of `0`, and covering every formula of the proof.
pub fn lk_to_mlp(
    d: &LkDerivation,
    policy: &Policy,
    k_set: &FormulaSet,
) -> Result<Derivation, EmbedError> {
    let report = check_lk(d);
    if !report.is_ok() {
        return Err(EmbedError::InvalidInput(report.to_string()));
    }
    stable_hypothesis(k_set, "K")?;
    if k_set.contains(&Formula::Zero) {
        return Err(EmbedError::Hypothesis("0 in K".to_string()));
    }
    if let Some(f) = k_set.iter().find(|f| !policy.contains(f)) {
        return Err(EmbedError::Hypothesis(format!(
            "K not within P: `{f}` is not in P"
        )));
    }
    if let Some(f) = d.all_formulas().iter().find(|f| !k_set.contains(*f)) {
        return Err(EmbedError::Hypothesis(format!(
            "formula `{f}` of the derivation is not in K"
        )));
    }
    Ok(lk_node_to_mlp(d))
}

fn lk_node_to_mlp(d: &LkDerivation) -> Derivation {
    let prem = &d.premises;
    match d.rule {
        LkRule::Ax => {
            let a = d.conclusion.left.iter().next().unwrap().clone();
            build::der(build::ax(a))
        }
        LkRule::BotL => build::bot(),
        LkRule::Cut => {
            let a = lk_cut_formula(d);
            build::cut2(lk_node_to_mlp(&prem[0]), lk_node_to_mlp(&prem[1]), &a)
        }
        LkRule::CL => {
            let a = single_extension(&prem[0].conclusion.left, &d.conclusion.left).unwrap();
            build::c_l(lk_node_to_mlp(&prem[0]), &a)
        }
        LkRule::CR => {
            let a = single_extension(&prem[0].conclusion.right, &d.conclusion.right).unwrap();
            build::c_r(lk_node_to_mlp(&prem[0]), &a)
        }
        LkRule::WL => {
            let a = single_extension(&d.conclusion.left, &prem[0].conclusion.left).unwrap();
            build::w_l(lk_node_to_mlp(&prem[0]), a)
        }
        LkRule::WR => {
            let a = single_extension(&d.conclusion.right, &prem[0].conclusion.right).unwrap();
            build::w_r(lk_node_to_mlp(&prem[0]), a)
        }
        LkRule::AndL => build::and2_l(lk_node_to_mlp(&prem[0]), &lk_principal(d)),
        LkRule::AndR => {
            let f = lk_principal(d);
            let (a, b) = match &f {
                Formula::And(a, b) => (a.as_ref(), b.as_ref()),
                _ => unreachable!(),
            };
            build::der(build::and2_r(
                lk_node_to_mlp(&prem[0]),
                a,
                lk_node_to_mlp(&prem[1]),
                b,
            ))
        }
        LkRule::OrL => build::or2_l(
            lk_node_to_mlp(&prem[0]),
            lk_node_to_mlp(&prem[1]),
            &lk_principal(d),
        ),
        LkRule::OrR1 => {
            let f = lk_principal(d);
            let (a, b) = match &f {
                Formula::Or(a, b) => (a.as_ref(), b.as_ref().clone()),
                _ => unreachable!(),
            };
            build::der(build::or3_r(lk_node_to_mlp(&prem[0]), a, b))
        }
        LkRule::OrR2 => {
            let f = lk_principal(d);
            let (a, b) = match &f {
                Formula::Or(a, b) => (a.as_ref().clone(), b.as_ref()),
                _ => unreachable!(),
            };
            build::der(build::or4_r(lk_node_to_mlp(&prem[0]), a, b))
        }
        LkRule::ImpL => {
            let f = lk_principal(d);
            let (a, b) = match &f {
                Formula::Imp(a, b) => (a.as_ref(), b.as_ref()),
                _ => unreachable!(),
            };
            build::imp3_l(lk_node_to_mlp(&prem[0]), b, lk_node_to_mlp(&prem[1]), a)
        }
        LkRule::ImpR => {
            let f = lk_principal(d);
            let (a, b) = match &f {
                Formula::Imp(a, b) => (a.as_ref(), b.as_ref()),
                _ => unreachable!(),
            };
            build::der(build::imp2_r(lk_node_to_mlp(&prem[0]), a, b))
        }
    }
}

/// Identifies the principal formula of a checked LK logical node by retrying
/// the schema match.
fn lk_principal(d: &LkDerivation) -> Formula {
    if let Some(f) = &d.principal {
        return f.clone();
    }
    let pool: Vec<Formula> = match d.rule {
        LkRule::AndL | LkRule::OrL | LkRule::ImpL => {
            d.conclusion.left.distinct().cloned().collect()
        }
        _ => d.conclusion.right.distinct().cloned().collect(),
    };
    pool.into_iter()
        .find(|f| {
            let mut probe = d.clone();
            probe.principal = Some(f.clone());
            validate_lk(&probe).is_ok()
        })
        .expect("checked LK node has a principal")
}

fn lk_cut_formula(d: &LkDerivation) -> Formula {
    if let Some(f) = &d.principal {
        return f.clone();
    }
    let p = &d.premises[0].conclusion;
    let q = &d.premises[1].conclusion;
    p.right
        .distinct()
        .filter(|a| q.left.contains(a))
        .find(|a| {
            let mut probe = d.clone();
            probe.principal = Some((*a).clone());
            validate_lk(&probe).is_ok()
        })
        .cloned()
        .expect("checked lk.cut identifies its cut formula")
}

/// Extracts an LK derivation from a mixed one by fusing body and stoup at
/// every node (`der` becomes a no-op). Requires every formula of the
/// derivation to lie in `k_set` satisfying the embedding hypotheses.
pub fn mlp_to_lk(
    d: &Derivation,
    policy: &Policy,
    k_set: &FormulaSet,
) -> Result<LkDerivation, EmbedError> {
    let report = crate::calculus::check_derivation(d, policy);
    if !report.is_ok() {
        return Err(EmbedError::InvalidInput(report.to_string()));
    }
    stable_hypothesis(k_set, "K")?;
    if k_set.contains(&Formula::Zero) {
        return Err(EmbedError::Hypothesis("0 in K".to_string()));
    }
    if let Some(f) = k_set.iter().find(|f| !policy.contains(f)) {
        return Err(EmbedError::Hypothesis(format!(
            "K not within P: `{f}` is not in P"
        )));
    }
    if let Some(f) = d.all_formulas().iter().find(|f| !k_set.contains(*f)) {
        return Err(EmbedError::Hypothesis(format!(
            "formula `{f}` of the derivation is not in K"
        )));
    }
    Ok(mlp_node_to_lk(d, policy))
}

fn fuse(s: &PSequent) -> LkSequent {
    let mut right = s.body.clone();
    if let Some(f) = &s.stoup {
        right.insert(f.clone());
    }
    LkSequent {
        left: s.antecedent.clone(),
        right,
    }
}

fn mlp_node_to_lk(d: &Derivation, policy: &Policy) -> LkDerivation {
    let c = fuse(&d.conclusion);
    let principal = d
        .principal
        .clone()
        .or_else(|| crate::calculus::node_principal(d, policy));
    let prem: Vec<LkDerivation> = d
        .premises
        .iter()
        .map(|p| mlp_node_to_lk(p, policy))
        .collect();
    let rule = match d.rule {
        // Fusing `;` into `,` makes the der premise and conclusion identical.
        Rule::Der => return prem.into_iter().next().unwrap(),
        Rule::Ax => LkRule::Ax,
        Rule::Cut1 | Rule::Cut2 => LkRule::Cut,
        Rule::CL => LkRule::CL,
        Rule::CR => LkRule::CR,
        Rule::WL => LkRule::WL,
        Rule::WR => LkRule::WR,
        Rule::Bot => LkRule::BotL,
        Rule::And1L | Rule::And2L => LkRule::AndL,
        Rule::And1R | Rule::And2R | Rule::And3R | Rule::And4R => LkRule::AndR,
        Rule::Or1L | Rule::Or2L => LkRule::OrL,
        Rule::Or1R | Rule::Or3R => LkRule::OrR1,
        Rule::Or2R | Rule::Or4R => LkRule::OrR2,
        Rule::Imp1L | Rule::Imp2L | Rule::Imp3L => LkRule::ImpL,
        Rule::Imp1R | Rule::Imp2R => LkRule::ImpR,
        Rule::Zero => unreachable!("0 is excluded from K, so no zero node can appear"),
    };
    LkDerivation {
        conclusion: c,
        rule,
        principal,
        premises: prem,
    }
}

// ---------------------------------------------------------------------------
// LJ <-> mixed
// ---------------------------------------------------------------------------

/// Embeds an LJ derivation as a stoup-only mixed derivation of `Γ |- ; A`.
/// The required stable set I is taken as the subformula closure of the
/// proof's formulas; the hypotheses `I ∩ P = ∅` and `bot ∉ I` are checked
/// against the given policy.
pub fn lj_to_mlp(d: &LjDerivation, policy: &Policy) -> Result<Derivation, EmbedError> {
    let report = check_lj(d);
    if !report.is_ok() {
        return Err(EmbedError::InvalidInput(report.to_string()));
    }
    let mut i_set = FormulaSet::new();
    for f in d.all_formulas() {
        i_set.extend(f.subformulas());
    }
    if i_set.contains(&Formula::Bot) {
        return Err(EmbedError::Hypothesis("bot in I".to_string()));
    }
    if let Some(f) = i_set.iter().find(|f| policy.contains(f)) {
        return Err(EmbedError::Hypothesis(format!("I ∩ P ≠ ∅: `{f}` is in P")));
    }
    Ok(lj_node_to_mlp(d))
}

fn lj_node_to_mlp(d: &LjDerivation) -> Derivation {
    let prem = &d.premises;
    match d.rule {
        LjRule::Ax => build::ax(d.conclusion.right.clone()),
        LjRule::ZeroL => build::zero(PSequent {
            antecedent: d.conclusion.left.clone(),
            body: Multiset::new(),
            stoup: Some(d.conclusion.right.clone()),
        }),
        LjRule::Cut => build::cut1(lj_node_to_mlp(&prem[0]), lj_node_to_mlp(&prem[1])),
        LjRule::CL => {
            let a = single_extension(&prem[0].conclusion.left, &d.conclusion.left).unwrap();
            build::c_l(lj_node_to_mlp(&prem[0]), &a)
        }
        LjRule::WL => {
            let a = single_extension(&d.conclusion.left, &prem[0].conclusion.left).unwrap();
            build::w_l(lj_node_to_mlp(&prem[0]), a)
        }
        LjRule::AndL => build::and1_l(lj_node_to_mlp(&prem[0]), &lj_principal(d)),
        LjRule::AndR => build::and1_r(lj_node_to_mlp(&prem[0]), lj_node_to_mlp(&prem[1])),
        LjRule::OrL => build::or1_l(
            lj_node_to_mlp(&prem[0]),
            lj_node_to_mlp(&prem[1]),
            &lj_principal(d),
        ),
        LjRule::OrR1 => match &d.conclusion.right {
            Formula::Or(_, b) => build::or1_r(lj_node_to_mlp(&prem[0]), b.as_ref().clone()),
            _ => unreachable!(),
        },
        LjRule::OrR2 => match &d.conclusion.right {
            Formula::Or(a, _) => build::or2_r(lj_node_to_mlp(&prem[0]), a.as_ref().clone()),
            _ => unreachable!(),
        },
        LjRule::ImpL => {
            let f = lj_principal(d);
            let b = match &f {
                Formula::Imp(_, b) => b.as_ref(),
                _ => unreachable!(),
            };
            build::imp1_l(lj_node_to_mlp(&prem[0]), b, lj_node_to_mlp(&prem[1]))
        }
        LjRule::ImpR => match &d.conclusion.right {
            Formula::Imp(a, _) => build::imp1_r(lj_node_to_mlp(&prem[0]), a),
            _ => unreachable!(),
        },
    }
}

fn lj_principal(d: &LjDerivation) -> Formula {
    if let Some(f) = &d.principal {
        return f.clone();
    }
    d.conclusion
        .left
        .distinct()
        .find(|f| {
            let mut probe = d.clone();
            probe.principal = Some((*f).clone());
            validate_lj(&probe).is_ok()
        })
        .cloned()
        .expect("checked LJ node has a principal")
}

/// Extracts an LJ derivation from a mixed proof of `Γ |- ; A` over an
/// intuitionistic stable set. The input is normalized first; the normal
/// form can only use the intuitionistic rule images (bodies stay empty),
/// which map one-to-one onto LJ rules.
pub fn mlp_to_lj(
    d: &Derivation,
    policy: &Policy,
    i_set: &FormulaSet,
) -> Result<LjDerivation, EmbedError> {
    let c = &d.conclusion;
    if c.stoup.is_none() || !c.body.is_empty() {
        return Err(EmbedError::Hypothesis(format!(
            "conclusion `{c}` is not of the form `Γ |- ; A`"
        )));
    }
    stable_hypothesis(i_set, "I")?;
    if i_set.contains(&Formula::Bot) {
        return Err(EmbedError::Hypothesis("bot in I".to_string()));
    }
    if let Some(f) = i_set.iter().find(|f| policy.contains(f)) {
        return Err(EmbedError::Hypothesis(format!("I ∩ P ≠ ∅: `{f}` is in P")));
    }
    if let Some(f) = c
        .antecedent
        .distinct()
        .chain(c.stoup.iter())
        .find(|f| !i_set.contains(*f))
    {
        return Err(EmbedError::Hypothesis(format!(
            "conclusion formula `{f}` is not in I"
        )));
    }
    let normal = cutelim::normalize(d, policy)?;
    mlp_node_to_lj(&normal, policy)
}

fn mlp_node_to_lj(d: &Derivation, policy: &Policy) -> Result<LjDerivation, EmbedError> {
    let c = &d.conclusion;
    if !c.body.is_empty() {
        return Err(EmbedError::Internal(format!("node `{c}` has a nonempty body")));
    }
    let right = match &c.stoup {
        Some(f) => f.clone(),
        None => {
            return Err(EmbedError::Internal(format!("node `{c}` has an empty stoup")));
        }
    };
    let conclusion = LjSequent {
        left: c.antecedent.clone(),
        right,
    };
    let principal = d
        .principal
        .clone()
        .or_else(|| crate::calculus::node_principal(d, policy));
    let rule = match d.rule {
        Rule::Ax => LjRule::Ax,
        Rule::Zero => LjRule::ZeroL,
        Rule::CL => LjRule::CL,
        Rule::WL => LjRule::WL,
        Rule::And1L => LjRule::AndL,
        Rule::And1R => LjRule::AndR,
        Rule::Or1L => LjRule::OrL,
        Rule::Or1R => LjRule::OrR1,
        Rule::Or2R => LjRule::OrR2,
        Rule::Imp1L => LjRule::ImpL,
        Rule::Imp1R => LjRule::ImpR,
        other => {
            return Err(EmbedError::Internal(format!(
                "rule {other} at `{c}` is outside the intuitionistic images"
            )));
        }
    };
    let premises = d
        .premises
        .iter()
        .map(|p| mlp_node_to_lj(p, policy))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(LjDerivation {
        conclusion,
        rule,
        principal,
        premises,
    })
}

// ---------------------------------------------------------------------------
// Proof file encoding
// ---------------------------------------------------------------------------

impl LkDerivation {
    pub fn to_sexpr(&self) -> Sexpr {
        sexpr::encode_node(
            self.rule.tag(),
            self.conclusion.to_string(),
            self.principal.as_ref().map(|f| f.to_string()),
            self.premises.iter().map(LkDerivation::to_sexpr).collect(),
        )
    }

    pub fn to_proof_text(&self) -> String {
        self.to_sexpr().pretty()
    }

    pub fn from_sexpr(sx: &Sexpr) -> Result<LkDerivation, String> {
        let node = sexpr::decode_node(sx).map_err(|e| e.to_string())?;
        let rule = LkRule::from_tag(node.tag)
            .ok_or_else(|| format!("unknown LK rule tag `{}`", node.tag))?;
        let conclusion = LkSequent::parse(node.sequent)
            .map_err(|e| format!("rule {}: bad sequent `{}`: {e}", node.tag, node.sequent))?;
        let principal = node
            .principal
            .map(|p| parse_formula(p).map_err(|e| format!("bad principal `{p}`: {e}")))
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
            .map(|p| LkDerivation::from_sexpr(p))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(LkDerivation {
            conclusion,
            rule,
            principal,
            premises,
        })
    }

    pub fn from_proof_text(text: &str) -> Result<LkDerivation, String> {
        LkDerivation::from_sexpr(&sexpr::parse(text).map_err(|e| e.to_string())?)
    }
}

impl LjDerivation {
    pub fn to_sexpr(&self) -> Sexpr {
        sexpr::encode_node(
            self.rule.tag(),
            self.conclusion.to_string(),
            self.principal.as_ref().map(|f| f.to_string()),
            self.premises.iter().map(LjDerivation::to_sexpr).collect(),
        )
    }

    pub fn to_proof_text(&self) -> String {
        self.to_sexpr().pretty()
    }

    pub fn from_sexpr(sx: &Sexpr) -> Result<LjDerivation, String> {
        let node = sexpr::decode_node(sx).map_err(|e| e.to_string())?;
        let rule = LjRule::from_tag(node.tag)
            .ok_or_else(|| format!("unknown LJ rule tag `{}`", node.tag))?;
        let conclusion = LjSequent::parse(node.sequent)
            .map_err(|e| format!("rule {}: bad sequent `{}`: {e}", node.tag, node.sequent))?;
        let principal = node
            .principal
            .map(|p| parse_formula(p).map_err(|e| format!("bad principal `{p}`: {e}")))
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
            .map(|p| LjDerivation::from_sexpr(p))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(LjDerivation {
            conclusion,
            rule,
            principal,
            premises,
        })
    }

    pub fn from_proof_text(text: &str) -> Result<LjDerivation, String> {
        LjDerivation::from_sexpr(&sexpr::parse(text).map_err(|e| e.to_string())?)
    }
}

// ---------------------------------------------------------------------------
// Forward constructors (used by the generators, tests, and benches)
// ---------------------------------------------------------------------------

pub mod lk_build {
    use super::*;

    fn node(
        rule: LkRule,
        conclusion: LkSequent,
        principal: Option<Formula>,
        premises: Vec<LkDerivation>,
    ) -> LkDerivation {
        LkDerivation {
            conclusion,
            rule,
            principal,
            premises,
        }
    }

    pub fn ax(a: Formula) -> LkDerivation {
        let c = LkSequent::new([a.clone()], [a.clone()]);
        node(LkRule::Ax, c, Some(a), vec![])
    }

    pub fn bot_l() -> LkDerivation {
        node(LkRule::BotL, LkSequent::new([Formula::Bot], []), None, vec![])
    }

    pub fn cut(p: LkDerivation, q: LkDerivation, a: &Formula) -> LkDerivation {
        let pr = p.conclusion.right.minus_one(a).expect("lk cut: right side");
        let ql = q.conclusion.left.minus_one(a).expect("lk cut: left side");
        let c = LkSequent {
            left: p.conclusion.left.union(&ql),
            right: pr.union(&q.conclusion.right),
        };
        node(LkRule::Cut, c, Some(a.clone()), vec![p, q])
    }

    pub fn c_l(p: LkDerivation, a: &Formula) -> LkDerivation {
        let left = p.conclusion.left.minus_one(a).expect("lk c_l");
        assert!(left.contains(a));
        let c = LkSequent {
            left,
            right: p.conclusion.right.clone(),
        };
        node(LkRule::CL, c, Some(a.clone()), vec![p])
    }

    pub fn c_r(p: LkDerivation, a: &Formula) -> LkDerivation {
        let right = p.conclusion.right.minus_one(a).expect("lk c_r");
        assert!(right.contains(a));
        let c = LkSequent {
            left: p.conclusion.left.clone(),
            right,
        };
        node(LkRule::CR, c, Some(a.clone()), vec![p])
    }

    pub fn w_l(p: LkDerivation, a: Formula) -> LkDerivation {
        let mut left = p.conclusion.left.clone();
        left.insert(a.clone());
        let c = LkSequent {
            left,
            right: p.conclusion.right.clone(),
        };
        node(LkRule::WL, c, Some(a), vec![p])
    }

    pub fn w_r(p: LkDerivation, a: Formula) -> LkDerivation {
        let mut right = p.conclusion.right.clone();
        right.insert(a.clone());
        let c = LkSequent {
            left: p.conclusion.left.clone(),
            right,
        };
        node(LkRule::WR, c, Some(a), vec![p])
    }

    pub fn and_l(p: LkDerivation, f: &Formula) -> LkDerivation {
        let (a, b) = match f {
            Formula::And(a, b) => (a.as_ref(), b.as_ref()),
            _ => panic!("lk and_l: principal must be a conjunction"),
        };
        let mut left = p
            .conclusion
            .left
            .minus_one(a)
            .and_then(|m| m.minus_one(b))
            .expect("lk and_l: components");
        left.insert(f.clone());
        let c = LkSequent {
            left,
            right: p.conclusion.right.clone(),
        };
        node(LkRule::AndL, c, Some(f.clone()), vec![p])
    }

    pub fn and_r(p: LkDerivation, a: &Formula, q: LkDerivation, b: &Formula) -> LkDerivation {
        let pr = p.conclusion.right.minus_one(a).expect("lk and_r: left");
        let qr = q.conclusion.right.minus_one(b).expect("lk and_r: right");
        let f = Formula::and(a.clone(), b.clone());
        let mut right = pr.union(&qr);
        right.insert(f.clone());
        let c = LkSequent {
            left: p.conclusion.left.union(&q.conclusion.left),
            right,
        };
        node(LkRule::AndR, c, Some(f), vec![p, q])
    }

    pub fn or_l(p: LkDerivation, q: LkDerivation, f: &Formula) -> LkDerivation {
        let (a, b) = match f {
            Formula::Or(a, b) => (a.as_ref(), b.as_ref()),
            _ => panic!("lk or_l: principal must be a disjunction"),
        };
        let shared = p.conclusion.left.minus_one(a).expect("lk or_l: left branch");
        let shared_q = q.conclusion.left.minus_one(b).expect("lk or_l: right branch");
        assert!(shared == shared_q && p.conclusion.right == q.conclusion.right);
        let mut left = shared;
        left.insert(f.clone());
        let c = LkSequent {
            left,
            right: p.conclusion.right.clone(),
        };
        node(LkRule::OrL, c, Some(f.clone()), vec![p, q])
    }

    pub fn or_r1(p: LkDerivation, a: &Formula, b: Formula) -> LkDerivation {
        let mut right = p.conclusion.right.minus_one(a).expect("lk or_r1");
        let f = Formula::or(a.clone(), b);
        right.insert(f.clone());
        let c = LkSequent {
            left: p.conclusion.left.clone(),
            right,
        };
        node(LkRule::OrR1, c, Some(f), vec![p])
    }

    pub fn or_r2(p: LkDerivation, a: Formula, b: &Formula) -> LkDerivation {
        let mut right = p.conclusion.right.minus_one(b).expect("lk or_r2");
        let f = Formula::or(a, b.clone());
        right.insert(f.clone());
        let c = LkSequent {
            left: p.conclusion.left.clone(),
            right,
        };
        node(LkRule::OrR2, c, Some(f), vec![p])
    }

    pub fn imp_l(p: LkDerivation, b: &Formula, q: LkDerivation, a: &Formula) -> LkDerivation {
        let pl = p.conclusion.left.minus_one(b).expect("lk imp_l: left premise");
        let qr = q.conclusion.right.minus_one(a).expect("lk imp_l: right premise");
        let f = Formula::imp(a.clone(), b.clone());
        let mut left = pl.union(&q.conclusion.left);
        left.insert(f.clone());
        let c = LkSequent {
            left,
            right: p.conclusion.right.union(&qr),
        };
        node(LkRule::ImpL, c, Some(f), vec![p, q])
    }

    pub fn imp_r(p: LkDerivation, a: &Formula, b: &Formula) -> LkDerivation {
        let left = p.conclusion.left.minus_one(a).expect("lk imp_r: antecedent");
        let mut right = p.conclusion.right.minus_one(b).expect("lk imp_r: succedent");
        let f = Formula::imp(a.clone(), b.clone());
        right.insert(f.clone());
        let c = LkSequent { left, right };
        node(LkRule::ImpR, c, Some(f), vec![p])
    }
}

pub mod lj_build {
    use super::*;

    fn node(
        rule: LjRule,
        conclusion: LjSequent,
        principal: Option<Formula>,
        premises: Vec<LjDerivation>,
    ) -> LjDerivation {
        LjDerivation {
            conclusion,
            rule,
            principal,
            premises,
        }
    }

    pub fn ax(a: Formula) -> LjDerivation {
        let c = LjSequent::new([a.clone()], a.clone());
        node(LjRule::Ax, c, Some(a), vec![])
    }

    pub fn zero_l(left: impl IntoIterator<Item = Formula>, right: Formula) -> LjDerivation {
        let c = LjSequent::new(left, right);
        assert!(c.left.contains(&Formula::Zero), "lj zero_l: needs 0 on the left");
        node(LjRule::ZeroL, c, Some(Formula::Zero), vec![])
    }

    pub fn cut(p: LjDerivation, q: LjDerivation) -> LjDerivation {
        let a = p.conclusion.right.clone();
        let ql = q.conclusion.left.minus_one(&a).expect("lj cut");
        let c = LjSequent {
            left: p.conclusion.left.union(&ql),
            right: q.conclusion.right.clone(),
        };
        node(LjRule::Cut, c, Some(a), vec![p, q])
    }

    pub fn c_l(p: LjDerivation, a: &Formula) -> LjDerivation {
        let left = p.conclusion.left.minus_one(a).expect("lj c_l");
        assert!(left.contains(a));
        let c = LjSequent {
            left,
            right: p.conclusion.right.clone(),
        };
        node(LjRule::CL, c, Some(a.clone()), vec![p])
    }

    pub fn w_l(p: LjDerivation, a: Formula) -> LjDerivation {
        let mut left = p.conclusion.left.clone();
        left.insert(a.clone());
        let c = LjSequent {
            left,
            right: p.conclusion.right.clone(),
        };
        node(LjRule::WL, c, Some(a), vec![p])
    }

    pub fn and_l(p: LjDerivation, f: &Formula) -> LjDerivation {
        let (a, b) = match f {
            Formula::And(a, b) => (a.as_ref(), b.as_ref()),
            _ => panic!("lj and_l: principal must be a conjunction"),
        };
        let mut left = p
            .conclusion
            .left
            .minus_one(a)
            .and_then(|m| m.minus_one(b))
            .expect("lj and_l: components");
        left.insert(f.clone());
        let c = LjSequent {
            left,
            right: p.conclusion.right.clone(),
        };
        node(LjRule::AndL, c, Some(f.clone()), vec![p])
    }

    pub fn and_r(p: LjDerivation, q: LjDerivation) -> LjDerivation {
        let f = Formula::and(p.conclusion.right.clone(), q.conclusion.right.clone());
        let c = LjSequent {
            left: p.conclusion.left.union(&q.conclusion.left),
            right: f.clone(),
        };
        node(LjRule::AndR, c, Some(f), vec![p, q])
    }

    pub fn or_l(p: LjDerivation, q: LjDerivation, f: &Formula) -> LjDerivation {
        let (a, b) = match f {
            Formula::Or(a, b) => (a.as_ref(), b.as_ref()),
            _ => panic!("lj or_l: principal must be a disjunction"),
        };
        let shared = p.conclusion.left.minus_one(a).expect("lj or_l: left branch");
        let shared_q = q.conclusion.left.minus_one(b).expect("lj or_l: right branch");
        assert!(shared == shared_q && p.conclusion.right == q.conclusion.right);
        let mut left = shared;
        left.insert(f.clone());
        let c = LjSequent {
            left,
            right: p.conclusion.right.clone(),
        };
        node(LjRule::OrL, c, Some(f.clone()), vec![p, q])
    }

    pub fn or_r1(p: LjDerivation, b: Formula) -> LjDerivation {
        let f = Formula::or(p.conclusion.right.clone(), b);
        let c = LjSequent {
            left: p.conclusion.left.clone(),
            right: f.clone(),
        };
        node(LjRule::OrR1, c, Some(f), vec![p])
    }

    pub fn or_r2(p: LjDerivation, a: Formula) -> LjDerivation {
        let f = Formula::or(a, p.conclusion.right.clone());
        let c = LjSequent {
            left: p.conclusion.left.clone(),
            right: f.clone(),
        };
        node(LjRule::OrR2, c, Some(f), vec![p])
    }

    pub fn imp_l(p: LjDerivation, b: &Formula, q: LjDerivation) -> LjDerivation {
        let a = q.conclusion.right.clone();
        let pl = p.conclusion.left.minus_one(b).expect("lj imp_l: left premise");
        let f = Formula::imp(a, b.clone());
        let mut left = pl.union(&q.conclusion.left);
        left.insert(f.clone());
        let c = LjSequent {
            left,
            right: p.conclusion.right.clone(),
        };
        node(LjRule::ImpL, c, Some(f), vec![p, q])
    }

    pub fn imp_r(p: LjDerivation, a: &Formula) -> LjDerivation {
        let left = p.conclusion.left.minus_one(a).expect("lj imp_r: antecedent");
        let f = Formula::imp(a.clone(), p.conclusion.right.clone());
        let c = LjSequent {
            left,
            right: f.clone(),
        };
        node(LjRule::ImpR, c, Some(f), vec![p])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Formula as F;

    fn v(name: &str) -> F {
        F::var(name)
    }

    fn closure_of(fs: &FormulaSet) -> FormulaSet {
        let mut out = FormulaSet::new();
        for f in fs {
            out.extend(f.subformulas());
        }
        out
    }

    #[test]
    fn lk_checker_examples() {
        let d = lk_build::ax(v("x_c"));
        assert!(check_lk(&d).is_ok());
        // Mismatched contexts in a two-premise right conjunction must fail.
        let p = lk_build::ax(v("x_c"));
        let q = lk_build::ax(v("y_c"));
        let mut bad = lk_build::and_r(p, &v("x_c"), q, &v("y_c"));
        bad.conclusion.left.insert(v("z_c"));
        assert!(!check_lk(&bad).is_ok());
    }

    #[test]
    fn lj_checker_examples() {
        assert!(check_lj(&lj_build::ax(v("p"))).is_ok());
        let d = lj_build::imp_r(
            lj_build::imp_r(lj_build::w_l(lj_build::ax(v("p")), v("q")), &v("q")),
            &v("p"),
        );
        assert_eq!(d.conclusion.to_string(), "|- p -> q -> p");
        assert!(check_lj(&d).is_ok());
    }

    #[test]
    fn lk_roundtrip_through_text() {
        let d = lk_build::imp_r(
            lk_build::w_r(lk_build::ax(v("x_c")), F::Bot),
            &v("x_c"),
            &F::Bot,
        );
        let text = d.to_proof_text();
        let back = LkDerivation::from_proof_text(&text).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn lk_axiom_embeds_via_der() {
        let d = lk_build::ax(v("x_c"));
        let k = closure_of(&d.all_formulas());
        let m = lk_to_mlp(&d, &Policy::ClassicalVars, &k).unwrap();
        assert_eq!(m.rule, Rule::Der);
        assert_eq!(m.conclusion.to_string(), "x_c |- x_c ;");
        assert!(crate::calculus::check_derivation(&m, &Policy::ClassicalVars).is_ok());
    }

    #[test]
    fn excluded_middle_embeds() {
        // |- x_c | (x_c -> bot) in LK, then into the mixed system.
        let f = F::or(v("x_c"), F::imp(v("x_c"), F::Bot));
        let step = lk_build::or_r1(lk_build::ax(v("x_c")), &v("x_c"), F::imp(v("x_c"), F::Bot));
        let step = lk_build::w_r(step, F::Bot);
        let step = lk_build::imp_r(step, &v("x_c"), &F::Bot);
        let step = lk_build::or_r2(step, v("x_c"), &F::imp(v("x_c"), F::Bot));
        let d = lk_build::c_r(step, &f);
        assert_eq!(d.conclusion.to_string(), "|- x_c | (x_c -> bot)");
        assert!(check_lk(&d).is_ok(), "{}", check_lk(&d));
        let k = closure_of(&d.all_formulas());
        let m = lk_to_mlp(&d, &Policy::ClassicalVars, &k).unwrap();
        let report = crate::calculus::check_derivation(&m, &Policy::ClassicalVars);
        assert!(report.is_ok(), "{report}");
        assert_eq!(m.conclusion.stoup, None);
        assert_eq!(m.conclusion.to_string(), "|- x_c | (x_c -> bot) ;");
    }

    #[test]
    fn lk_hypothesis_violations_are_named() {
        let d = lk_build::ax(v("p"));
        let mut k = closure_of(&d.all_formulas());
        let err = lk_to_mlp(&d, &Policy::ClassicalVars, &k).unwrap_err();
        assert!(err.to_string().contains("not in P"), "{err}");
        k.insert(F::Zero);
        let err = lk_to_mlp(&d, &Policy::All, &k).unwrap_err();
        assert!(err.to_string().contains("0 in K"), "{err}");
    }

    #[test]
    fn lk_roundtrip_recovers_sequent() {
        let d = lk_build::imp_r(
            lk_build::w_r(lk_build::ax(v("x_c")), v("y_c")),
            &v("x_c"),
            &v("y_c"),
        );
        let k = closure_of(&d.all_formulas());
        let m = lk_to_mlp(&d, &Policy::ClassicalVars, &k).unwrap();
        let back = mlp_to_lk(&m, &Policy::ClassicalVars, &k).unwrap();
        assert!(check_lk(&back).is_ok());
        assert_eq!(back.conclusion, d.conclusion);
    }

    #[test]
    fn lj_embedding_is_stoup_only() {
        let d = lj_build::imp_r(
            lj_build::imp_r(lj_build::w_l(lj_build::ax(v("p")), v("q")), &v("q")),
            &v("p"),
        );
        let m = lj_to_mlp(&d, &Policy::BotOnly).unwrap();
        assert!(crate::calculus::check_derivation(&m, &Policy::BotOnly).is_ok());
        assert!(crate::calculus::check_derivation(&m, &Policy::ClassicalVars).is_ok());
        m.visit(&mut |_, node| {
            assert!(node.conclusion.body.is_empty());
        });
        assert_eq!(m.conclusion.to_string(), "|- ; p -> q -> p");
    }

    #[test]
    fn lj_embedding_rejects_policy_overlap() {
        let d = lj_build::ax(v("x_c"));
        let err = lj_to_mlp(&d, &Policy::ClassicalVars).unwrap_err();
        assert!(err.to_string().contains("I ∩ P"), "{err}");
    }

    #[test]
    fn lj_roundtrip_with_cut() {
        let d = lj_build::cut(
            lj_build::ax(v("p")),
            lj_build::or_r1(lj_build::ax(v("p")), v("q")),
        );
        assert!(check_lj(&d).is_ok());
        let m = lj_to_mlp(&d, &Policy::BotOnly).unwrap();
        assert!(!m.is_cut_free());
        let i = closure_of(&m.all_formulas());
        let back = mlp_to_lj(&m, &Policy::BotOnly, &i).unwrap();
        assert!(check_lj(&back).is_ok(), "{}", check_lj(&back));
        assert_eq!(back.conclusion, d.conclusion);
    }

    #[test]
    fn mlp_to_lj_requires_stoup_conclusion() {
        let m = build::der(build::ax(v("x_c")));
        let i = FormulaSet::new();
        let err = mlp_to_lj(&m, &Policy::ClassicalVars, &i).unwrap_err();
        assert!(err.to_string().contains("|- ; A"), "{err}");
    }
}
