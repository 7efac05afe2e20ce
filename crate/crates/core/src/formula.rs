//! Formula syntax, parsing and printing, variable classification, subformula
//! machinery, and the policy deciding which formulas may be used classically.
//!
//! Variables are classed by a naming convention: an identifier ending in `_c`
//! is a classical variable, anything else is intuitionistic. The convention
//! makes every example reproducible from plain text with no side files.
//!
//! Concrete syntax: `0`, `bot`, identifiers, `&`, `|`, `->`, parentheses.
//! Precedence `&` > `|` > `->`; `&` and `|` associate left, `->` right.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use thiserror::Error;

/// Classification of a propositional variable, derived from its name.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum VarClass {
    Intuitionistic,
    Classical,
}

/// Returns the class of a variable name: `_c` suffix means classical.
pub fn var_class(name: &str) -> VarClass {
    if name.ends_with("_c") {
        VarClass::Classical
    } else {
        VarClass::Intuitionistic
    }
}

/// A propositional formula over two absurdity constants and classed variables.
///
/// `Zero` is the intuitionistic absurdity written `0`, `Bot` the classical one
/// written `bot`. Equality is structural; nothing is normalized.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Formula {
    Zero,
    Bot,
    Var(String),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Imp(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn var(name: impl Into<String>) -> Formula {
        Formula::Var(name.into())
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn imp(a: Formula, b: Formula) -> Formula {
        Formula::Imp(Box::new(a), Box::new(b))
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, Formula::Zero | Formula::Bot | Formula::Var(_))
    }

    /// Symbol count: one per connective and one per atom or constant.
    pub fn length(&self) -> usize {
        match self {
            Formula::Zero | Formula::Bot | Formula::Var(_) => 1,
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                1 + a.length() + b.length()
            }
        }
    }

    /// The set of variables and constants occurring in the formula.
    pub fn vars(&self) -> BTreeSet<Formula> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Formula>) {
        match self {
            Formula::Zero | Formula::Bot | Formula::Var(_) => {
                out.insert(self.clone());
            }
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// The formula together with all its transitive subformulas.
    pub fn subformulas(&self) -> BTreeSet<Formula> {
        let mut out = BTreeSet::new();
        self.collect_subformulas(&mut out);
        out
    }

    fn collect_subformulas(&self, out: &mut BTreeSet<Formula>) {
        out.insert(self.clone());
        match self {
            Formula::Zero | Formula::Bot | Formula::Var(_) => {}
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                a.collect_subformulas(out);
                b.collect_subformulas(out);
            }
        }
    }

    /// True if some variable or constant of the formula is classical
    /// (a `_c` variable or `bot`). Recursive-descent form, used both by the
    /// classical-variables policy oracle in tests and by callers that do not
    /// want to materialize the variable set.
    pub fn mentions_classical_symbol(&self) -> bool {
        match self {
            Formula::Zero => false,
            Formula::Bot => true,
            Formula::Var(name) => var_class(name) == VarClass::Classical,
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                a.mentions_classical_symbol() || b.mentions_classical_symbol()
            }
        }
    }
}

/// Duplicate-free set of formulas (structural equality).
pub type FormulaSet = BTreeSet<Formula>;

/// True iff the set is closed under immediate subformulas of its
/// compound members.
pub fn is_stable(set: &FormulaSet) -> bool {
    set.iter().all(|f| match f {
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
            set.contains(a) && set.contains(b)
        }
        _ => true,
    })
}

/// Decidable membership test for the set of classically usable formulas.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Policy {
    /// Every formula.
    All,
    /// Exactly the formula `bot`.
    BotOnly,
    /// Formulas mentioning a classical variable or `bot`.
    ClassicalVars,
    /// Syntactic membership in a finite set.
    Explicit(FormulaSet),
}

impl Policy {
    pub fn contains(&self, f: &Formula) -> bool {
        match self {
            Policy::All => true,
            Policy::BotOnly => matches!(f, Formula::Bot),
            Policy::ClassicalVars => f.mentions_classical_symbol(),
            Policy::Explicit(set) => set.contains(f),
        }
    }

    /// Parses a policy specification: `all`, `bot`, `cvars`, or `file:<path>`
    /// where the file lists one formula per line (blank lines ignored).
    pub fn from_spec(spec: &str) -> Result<Policy, PolicyError> {
        match spec {
            "all" => Ok(Policy::All),
            "bot" => Ok(Policy::BotOnly),
            "cvars" => Ok(Policy::ClassicalVars),
            _ => {
                if let Some(path) = spec.strip_prefix("file:") {
                    Policy::load_explicit(Path::new(path))
                } else {
                    Err(PolicyError::UnknownSpec(spec.to_string()))
                }
            }
        }
    }

    /// Loads an explicit policy from a file with one formula per line.
    /// The set is taken literally; it is not closed under subformulas.
    pub fn load_explicit(path: &Path) -> Result<Policy, PolicyError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PolicyError::Io(path.display().to_string(), e.to_string()))?;
        let mut set = FormulaSet::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let f = parse_formula(line).map_err(|e| PolicyError::Line(lineno + 1, e))?;
            set.insert(f);
        }
        Ok(Policy::Explicit(set))
    }
}

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("unknown policy spec `{0}` (expected all, bot, cvars, or file:<path>)")]
    UnknownSpec(String),
    #[error("cannot read policy file {0}: {1}")]
    Io(String, String),
    #[error("policy file line {0}: {1}")]
    Line(usize, ParseError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at byte {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

// ---------------------------------------------------------------------------
// Lexing and parsing
// ---------------------------------------------------------------------------

#[derive(Clone, PartialEq, Eq, Debug)]
enum Tok {
    LParen,
    RParen,
    Amp,
    Pipe,
    Arrow,
    Zero,
    Bot,
    Ident(String),
}

fn lex(input: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = input.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '(' => {
                toks.push((i, Tok::LParen));
                i += 1;
            }
            ')' => {
                toks.push((i, Tok::RParen));
                i += 1;
            }
            '&' => {
                toks.push((i, Tok::Amp));
                i += 1;
            }
            '|' => {
                toks.push((i, Tok::Pipe));
                i += 1;
            }
            '-' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    toks.push((i, Tok::Arrow));
                    i += 2;
                } else {
                    return Err(ParseError {
                        pos: i,
                        msg: "expected `->`".to_string(),
                    });
                }
            }
            '0' => {
                toks.push((i, Tok::Zero));
                i += 1;
            }
            'a'..='z' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                let word = &input[start..i];
                if word == "bot" {
                    toks.push((start, Tok::Bot));
                } else {
                    toks.push((start, Tok::Ident(word.to_string())));
                }
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

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
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

    // imp := or ("->" imp)?     right-associative
    fn imp(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.bump();
            let rhs = self.imp()?;
            Ok(Formula::imp(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    // or := and ("|" and)*      left-associative
    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.and()?;
        while self.peek() == Some(&Tok::Pipe) {
            self.bump();
            let rhs = self.and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    // and := atom ("&" atom)*   left-associative
    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.atom()?;
        while self.peek() == Some(&Tok::Amp) {
            self.bump();
            let rhs = self.atom()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        match self.bump() {
            Some(Tok::Zero) => Ok(Formula::Zero),
            Some(Tok::Bot) => Ok(Formula::Bot),
            Some(Tok::Ident(name)) => Ok(Formula::Var(name)),
            Some(Tok::LParen) => {
                let f = self.imp()?;
                match self.bump() {
                    Some(Tok::RParen) => Ok(f),
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

/// Parses a formula from its concrete syntax.
pub fn parse_formula(input: &str) -> Result<Formula, ParseError> {
    let toks = lex(input)?;
    let mut p = Parser {
        toks,
        at: 0,
        end: input.len(),
    };
    let f = p.imp()?;
    if p.peek().is_some() {
        return Err(p.err("trailing input after formula"));
    }
    Ok(f)
}

/// Parses a comma-separated list of formulas; an all-whitespace input is the
/// empty list.
pub fn parse_formula_list(input: &str) -> Result<Vec<Formula>, ParseError> {
    if input.trim().is_empty() {
        return Ok(Vec::new());
    }
    input.split(',').map(parse_formula).collect()
}

// Precedence levels for printing: -> is 1, | is 2, & is 3, atoms 4.
fn fmt_prec(f: &Formula, prec: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    match f {
        Formula::Zero => write!(out, "0"),
        Formula::Bot => write!(out, "bot"),
        Formula::Var(name) => write!(out, "{name}"),
        Formula::And(a, b) => {
            let parens = prec > 3;
            if parens {
                write!(out, "(")?;
            }
            fmt_prec(a, 3, out)?;
            write!(out, " & ")?;
            fmt_prec(b, 4, out)?;
            if parens {
                write!(out, ")")?;
            }
            Ok(())
        }
        Formula::Or(a, b) => {
            let parens = prec > 2;
            if parens {
                write!(out, "(")?;
            }
            fmt_prec(a, 2, out)?;
            write!(out, " | ")?;
            fmt_prec(b, 3, out)?;
            if parens {
                write!(out, ")")?;
            }
            Ok(())
        }
        Formula::Imp(a, b) => {
            let parens = prec > 1;
            if parens {
                write!(out, "(")?;
            }
            fmt_prec(a, 2, out)?;
            write!(out, " -> ")?;
            fmt_prec(b, 1, out)?;
            if parens {
                write!(out, ")")?;
            }
            Ok(())
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_prec(self, 1, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(name: &str) -> Formula {
        Formula::var(name)
    }

    #[test]
    fn parse_examples() {
        assert_eq!(
            parse_formula("bot -> 0").unwrap(),
            Formula::imp(Formula::Bot, Formula::Zero)
        );
        assert_eq!(
            parse_formula("x_c & p -> p").unwrap(),
            Formula::imp(Formula::and(v("x_c"), v("p")), v("p"))
        );
        assert_eq!(
            parse_formula("p -> q -> p").unwrap(),
            Formula::imp(v("p"), Formula::imp(v("q"), v("p")))
        );
        assert_eq!(
            parse_formula("p & q & r").unwrap(),
            Formula::and(Formula::and(v("p"), v("q")), v("r"))
        );
        assert_eq!(
            parse_formula("p | q & r").unwrap(),
            Formula::or(v("p"), Formula::and(v("q"), v("r")))
        );
    }

    #[test]
    fn parse_error_has_position() {
        let err = parse_formula("p -> $").unwrap_err();
        assert_eq!(err.pos, 5);
        let err = parse_formula("p q").unwrap_err();
        assert_eq!(err.pos, 2);
    }

    #[test]
    fn vars_examples() {
        let f = Formula::and(v("x_c"), v("p"));
        let vs: Vec<_> = f.vars().into_iter().collect();
        assert_eq!(vs, vec![v("p"), v("x_c")]);
        assert_eq!(
            Formula::Bot.vars().into_iter().collect::<Vec<_>>(),
            vec![Formula::Bot]
        );
        let g = Formula::imp(v("p"), Formula::imp(v("q"), v("p")));
        assert_eq!(g.vars().len(), 2);
    }

    #[test]
    fn subformula_examples() {
        let f = Formula::and(v("p"), v("q"));
        assert_eq!(f.subformulas().len(), 3);
        // ((p -> q) -> p) -> p
        let peirce = Formula::imp(
            Formula::imp(Formula::imp(v("p"), v("q")), v("p")),
            v("p"),
        );
        assert_eq!(peirce.subformulas().len(), 5);
        assert_eq!(Formula::Bot.subformulas().len(), 1);
    }

    #[test]
    fn stability_examples() {
        let mut s = FormulaSet::new();
        s.insert(Formula::and(v("p"), v("q")));
        s.insert(v("p"));
        assert!(!is_stable(&s));
        s.insert(v("q"));
        assert!(is_stable(&s));
    }

    #[test]
    fn policy_membership() {
        let f = Formula::or(v("x_c"), v("p"));
        assert!(Policy::ClassicalVars.contains(&f));
        assert!(!Policy::ClassicalVars.contains(&v("p")));
        assert!(Policy::BotOnly.contains(&Formula::Bot));
        assert!(!Policy::BotOnly.contains(&Formula::imp(Formula::Bot, Formula::Bot)));
        assert!(Policy::All.contains(&Formula::Zero));
        let s: FormulaSet = [v("p")].into_iter().collect();
        assert!(Policy::Explicit(s.clone()).contains(&v("p")));
        assert!(!Policy::Explicit(s).contains(&v("q")));
    }

    #[test]
    fn classical_vars_matches_var_set_reading() {
        // Membership in the classical-variables policy must agree with
        // "the variable set meets the classical symbols".
        let samples = [
            "p", "x_c", "bot", "0", "p & x_c", "p -> 0", "bot -> p",
            "(p | q) -> (q | p)", "x_c | (x_c -> bot)",
        ];
        for s in samples {
            let f = parse_formula(s).unwrap();
            let by_set = f.vars().iter().any(|a| match a {
                Formula::Bot => true,
                Formula::Var(n) => var_class(n) == VarClass::Classical,
                _ => false,
            });
            assert_eq!(Policy::ClassicalVars.contains(&f), by_set, "{s}");
        }
    }

    #[test]
    fn length_counts_symbols() {
        assert_eq!(v("x_c").length(), 1);
        assert_eq!(Formula::imp(v("x_c"), v("x_c")).length(), 3);
        assert_eq!(parse_formula("(p -> q) -> p").unwrap().length(), 5);
    }

    fn arb_formula() -> impl Strategy<Value = Formula> {
        let leaf = prop_oneof![
            Just(Formula::Zero),
            Just(Formula::Bot),
            Just(v("p")),
            Just(v("q")),
            Just(v("x_c")),
            Just(v("y_c")),
            Just(v("aB9_z")),
        ];
        leaf.prop_recursive(5, 64, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
                (inner.clone(), inner).prop_map(|(a, b)| Formula::imp(a, b)),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_roundtrip(f in arb_formula()) {
            let printed = f.to_string();
            let reparsed = parse_formula(&printed).unwrap();
            prop_assert_eq!(reparsed, f);
        }

        #[test]
        fn subformula_sets_are_stable(f in arb_formula()) {
            prop_assert!(is_stable(&f.subformulas()));
        }

        #[test]
        fn all_policy_is_total(f in arb_formula()) {
            prop_assert!(Policy::All.contains(&f));
        }
    }
}
