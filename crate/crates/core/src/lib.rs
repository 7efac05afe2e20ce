//! Proof kernel for a parametric mixed sequent calculus.
//!
//! The calculus hosts classical and intuitionistic logic as fragments of one
//! system, selected by a policy P of classically usable formulas: sequents
//! `Γ |- Δ ; Π` carry a classical body Δ (restricted to P) and an
//! intuitionistic stoup Π of at most one formula. This crate provides:
//!
//! - [`formula`]: formula syntax, parsing, variable classes, and policies;
//! - [`calculus`]: derivation trees for the 27 rules and a checker enforcing
//!   every structural and policy side condition;
//! - [`cutelim`]: cut elimination by the `(l, k)` degree measure, plus the
//!   subformula-property check and disjunction-witness extraction;
//! - [`embeddings`]: standalone LK and LJ checkers and the four proof
//!   translations into and out of the mixed system;
//! - [`linear`]: the `b`/`t` formula translations into a linear-logic
//!   fragment, a two-sided checker for it, admissible proof transformers,
//!   and the derivation-level translation;
//! - [`oracle`]: bounded backward proof search and a truth-table oracle,
//!   used to cross-check the metatheory at desk scale;
//! - [`batch`]: data-parallel sweep helpers (rayon behind the `parallel`
//!   feature, with a sequential fallback).

pub mod batch;
pub mod calculus;
pub mod cutelim;
pub mod embeddings;
pub mod formula;
pub mod linear;
pub mod multiset;
pub mod oracle;
pub mod sexpr;

pub use calculus::{check_derivation, CheckReport, Derivation, PSequent, Rule};
pub use formula::{is_stable, parse_formula, Formula, FormulaSet, Policy};
pub use multiset::Multiset;
