//! S-expression reader/writer for proof files.
//!
//! A proof file holds one top-level form per derivation node:
//! `(<rule-tag> "<sequent>" [:principal "<formula>"] <premise>*)`.
//! This module only handles the generic tree shape; each proof format
//! interprets tags and sequent strings itself.

use std::fmt;

use thiserror::Error;

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Sexpr {
    /// Bare word: a rule tag or the `:principal` keyword.
    Atom(String),
    /// Double-quoted string: a sequent or formula.
    Str(String),
    List(Vec<Sexpr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("s-expression error at byte {pos}: {msg}")]
pub struct SexprError {
    pub pos: usize,
    pub msg: String,
}

fn err(pos: usize, msg: impl Into<String>) -> SexprError {
    SexprError {
        pos,
        msg: msg.into(),
    }
}

/// Parses a single s-expression; trailing whitespace is allowed.
pub fn parse(input: &str) -> Result<Sexpr, SexprError> {
    let bytes = input.as_bytes();
    let (node, rest) = parse_at(bytes, skip_ws(bytes, 0))?;
    let rest = skip_ws(bytes, rest);
    if rest != bytes.len() {
        return Err(err(rest, "trailing input after s-expression"));
    }
    Ok(node)
}

fn skip_ws(bytes: &[u8], mut i: usize) -> usize {
    while i < bytes.len() && (bytes[i] as char).is_whitespace() {
        i += 1;
    }
    i
}

fn parse_at(bytes: &[u8], i: usize) -> Result<(Sexpr, usize), SexprError> {
    if i >= bytes.len() {
        return Err(err(i, "unexpected end of input"));
    }
    match bytes[i] {
        b'(' => {
            let mut items = Vec::new();
            let mut j = skip_ws(bytes, i + 1);
            loop {
                if j >= bytes.len() {
                    return Err(err(j, "unclosed `(`"));
                }
                if bytes[j] == b')' {
                    return Ok((Sexpr::List(items), j + 1));
                }
                let (node, next) = parse_at(bytes, j)?;
                items.push(node);
                j = skip_ws(bytes, next);
            }
        }
        b')' => Err(err(i, "unexpected `)`")),
        b'"' => {
            let mut j = i + 1;
            while j < bytes.len() && bytes[j] != b'"' {
                j += 1;
            }
            if j >= bytes.len() {
                return Err(err(i, "unterminated string"));
            }
            let s = std::str::from_utf8(&bytes[i + 1..j])
                .map_err(|_| err(i, "invalid UTF-8 in string"))?;
            Ok((Sexpr::Str(s.to_string()), j + 1))
        }
        _ => {
            let start = i;
            let mut j = i;
            while j < bytes.len()
                && !(bytes[j] as char).is_whitespace()
                && bytes[j] != b'('
                && bytes[j] != b')'
                && bytes[j] != b'"'
            {
                j += 1;
            }
            let s = std::str::from_utf8(&bytes[start..j])
                .map_err(|_| err(start, "invalid UTF-8 in atom"))?;
            Ok((Sexpr::Atom(s.to_string()), j))
        }
    }
}

impl Sexpr {
    /// Renders with one node per line, premises indented under their parent.
    pub fn pretty(&self) -> String {
        let mut out = String::new();
        self.pretty_into(&mut out, 0);
        out.push('\n');
        out
    }

    fn pretty_into(&self, out: &mut String, indent: usize) {
        match self {
            Sexpr::Atom(a) => out.push_str(a),
            Sexpr::Str(s) => {
                out.push('"');
                out.push_str(s);
                out.push('"');
            }
            Sexpr::List(items) => {
                out.push('(');
                let mut at_head = true;
                for item in items {
                    if at_head {
                        at_head = false;
                    } else if matches!(item, Sexpr::List(_)) {
                        out.push('\n');
                        out.push_str(&"  ".repeat(indent + 1));
                    } else {
                        out.push(' ');
                    }
                    item.pretty_into(out, indent + 1);
                }
                out.push(')');
            }
        }
    }
}

impl fmt::Display for Sexpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexpr::Atom(a) => write!(f, "{a}"),
            Sexpr::Str(s) => write!(f, "\"{s}\""),
            Sexpr::List(items) => {
                write!(f, "(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{item}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Decoded head of a proof node: tag, sequent text, optional principal text,
/// and premise subtrees.
pub struct ProofNode<'a> {
    pub tag: &'a str,
    pub sequent: &'a str,
    pub principal: Option<&'a str>,
    pub premises: Vec<&'a Sexpr>,
}

/// Splits a proof-node list into its parts.
pub fn decode_node(sx: &Sexpr) -> Result<ProofNode<'_>, SexprError> {
    let items = match sx {
        Sexpr::List(items) => items,
        _ => return Err(err(0, "proof node must be a list")),
    };
    let tag = match items.first() {
        Some(Sexpr::Atom(t)) => t.as_str(),
        _ => return Err(err(0, "proof node must start with a rule tag")),
    };
    let sequent = match items.get(1) {
        Some(Sexpr::Str(s)) => s.as_str(),
        _ => return Err(err(0, format!("rule `{tag}`: expected a quoted sequent"))),
    };
    let mut principal = None;
    let mut rest = 2;
    if let Some(Sexpr::Atom(kw)) = items.get(2) {
        if kw == ":principal" {
            match items.get(3) {
                Some(Sexpr::Str(p)) => {
                    principal = Some(p.as_str());
                    rest = 4;
                }
                _ => {
                    return Err(err(0, "expected a quoted formula after :principal"));
                }
            }
        }
    }
    let mut premises = Vec::new();
    for item in &items[rest..] {
        match item {
            Sexpr::List(_) => premises.push(item),
            _ => return Err(err(0, format!("rule `{tag}`: premises must be lists"))),
        }
    }
    Ok(ProofNode {
        tag,
        sequent,
        principal,
        premises,
    })
}

/// Builds a proof-node list from its parts.
pub fn encode_node(
    tag: &str,
    sequent: String,
    principal: Option<String>,
    premises: Vec<Sexpr>,
) -> Sexpr {
    let mut items = vec![Sexpr::Atom(tag.to_string()), Sexpr::Str(sequent)];
    if let Some(p) = principal {
        items.push(Sexpr::Atom(":principal".to_string()));
        items.push(Sexpr::Str(p));
    }
    items.extend(premises);
    Sexpr::List(items)
}
