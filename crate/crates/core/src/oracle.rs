//! Independent desk-scale decision procedures: bounded backward proof search
//! for the cut-free mixed calculus, a truth-table oracle for classical
//! validity, and bounded backward LJ search. These are used to cross-check
//! the checkers, the normalizer, and the embedding theorems; found proofs
//! always pass the corresponding checker, and absence at a bound is never a
//! non-derivability proof.
//!
//! Search strategy: two-premise rules are explored with shared contexts (the
//! assembled derivation re-splits them using explicit contractions), each
//! antecedent and body formula is capped at a fixed multiplicity for
//! backward contraction, and branches repeating a sequent are pruned.
//! Memoization keeps a per-prover table; a failure is recorded only when it
//! did not depend on a loop check against an ancestor outside the failed
//! subtree, so cached failures stay valid in any context.

use std::collections::HashMap;

use thiserror::Error;

use crate::calculus::{build, Derivation, PSequent};
use crate::embeddings::{lj_build, LjDerivation, LjSequent};
use crate::formula::{Formula, Policy, VarClass};
use crate::multiset::Multiset;

/// Bounds for backward search.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct SearchConfig {
    /// Maximum number of backward rule applications along a branch.
    pub depth: usize,
    /// Maximum multiplicity per formula in a goal's antecedent or body.
    pub mult_cap: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            depth: 12,
            mult_cap: 2,
        }
    }
}

impl SearchConfig {
    pub fn new(depth: usize, mult_cap: usize) -> Self {
        assert!(depth > 0 && mult_cap > 0, "search bounds must be positive");
        SearchConfig { depth, mult_cap }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("classical validity is defined over classical variables and bot only; found `{0}`")]
    NotClassical(Formula),
}

// ---------------------------------------------------------------------------
// Truth tables
// ---------------------------------------------------------------------------

/// True iff the formula holds under every boolean assignment. `bot` is
/// valued false; intuitionistic variables and `0` are rejected.
pub fn classical_valid(f: &Formula) -> Result<bool, OracleError> {
    let mut vars: Vec<String> = Vec::new();
    for atom in f.vars() {
        match atom {
            Formula::Bot => {}
            Formula::Var(name) if crate::formula::var_class(&name) == VarClass::Classical => {
                vars.push(name)
            }
            other => return Err(OracleError::NotClassical(other)),
        }
    }
    let n = vars.len();
    for bits in 0..(1u32 << n) {
        let assign = |name: &str| -> bool {
            let i = vars.iter().position(|v| v == name).unwrap();
            bits & (1 << i) != 0
        };
        if !eval_bool(f, &assign) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn eval_bool(f: &Formula, assign: &dyn Fn(&str) -> bool) -> bool {
    match f {
        Formula::Bot | Formula::Zero => false,
        Formula::Var(name) => assign(name),
        Formula::And(a, b) => eval_bool(a, assign) && eval_bool(b, assign),
        Formula::Or(a, b) => eval_bool(a, assign) || eval_bool(b, assign),
        Formula::Imp(a, b) => !eval_bool(a, assign) || eval_bool(b, assign),
    }
}

// ---------------------------------------------------------------------------
// Formula enumeration for the exhaustive suites
// ---------------------------------------------------------------------------

/// All formulas over the given leaves with symbol count at most `max_len`,
/// in a deterministic order.
pub fn enumerate_formulas(leaves: &[Formula], max_len: usize) -> Vec<Formula> {
    let mut by_len: Vec<Vec<Formula>> = vec![Vec::new(); max_len + 1];
    if max_len >= 1 {
        by_len[1] = leaves.to_vec();
    }
    for n in 2..=max_len {
        let mut level = Vec::new();
        for i in 1..n - 1 {
            let j = n - 1 - i;
            for a in &by_len[i] {
                for b in &by_len[j] {
                    level.push(Formula::and(a.clone(), b.clone()));
                    level.push(Formula::or(a.clone(), b.clone()));
                    level.push(Formula::imp(a.clone(), b.clone()));
                }
            }
        }
        by_len[n] = level;
    }
    by_len.into_iter().flatten().collect()
}

// ---------------------------------------------------------------------------
// Backward search for the mixed calculus
// ---------------------------------------------------------------------------

enum Memo<D> {
    Proved(D),
    /// Exhausted cleanly with this much remaining depth.
    Failed(usize),
}

const NO_TOUCH: usize = usize::MAX;

/// Reusable bounded prover for one policy and configuration. The memo table
/// persists across queries, so exhaustive sweeps share subgoal results.
pub struct Prover {
    policy: Policy,
    cfg: SearchConfig,
    memo: HashMap<PSequent, Memo<Derivation>>,
}

impl Prover {
    pub fn new(policy: Policy, cfg: SearchConfig) -> Self {
        Prover {
            policy,
            cfg,
            memo: HashMap::new(),
        }
    }

    pub fn prove(&mut self, goal: &PSequent) -> Option<Derivation> {
        if goal.body_violation(&self.policy).is_some() {
            return None;
        }
        let mut branch = Vec::new();
        self.search(goal, self.cfg.depth, &mut branch).0
    }

    /// Returns the proof if found, plus the smallest branch index any loop
    /// check touched (NO_TOUCH if none relevant to ancestors).
    fn search(
        &mut self,
        goal: &PSequent,
        remaining: usize,
        branch: &mut Vec<PSequent>,
    ) -> (Option<Derivation>, usize) {
        if let Some(i) = branch.iter().position(|s| s == goal) {
            return (None, i);
        }
        match self.memo.get(goal) {
            Some(Memo::Proved(d)) => return (Some(d.clone()), NO_TOUCH),
            Some(Memo::Failed(r)) if remaining <= *r => return (None, NO_TOUCH),
            _ => {}
        }
        if let Some(d) = self.close(goal) {
            self.memo.insert(goal.clone(), Memo::Proved(d.clone()));
            return (Some(d), NO_TOUCH);
        }
        if remaining == 0 {
            return (None, NO_TOUCH);
        }
        let my_index = branch.len();
        branch.push(goal.clone());
        let mut min_touch = NO_TOUCH;
        let moves = self.moves(goal);
        let mut found = None;
        'moves: for mv in moves {
            let mut proofs = Vec::with_capacity(mv.subgoals.len());
            for sub in &mv.subgoals {
                let (res, touch) = self.search(sub, remaining - 1, branch);
                match res {
                    Some(d) => proofs.push(d),
                    None => {
                        min_touch = min_touch.min(touch);
                        continue 'moves;
                    }
                }
            }
            found = Some(assemble(goal, &mv, proofs));
            break;
        }
        branch.pop();
        match found {
            Some(d) => {
                debug_assert_eq!(&d.conclusion, goal);
                self.memo.insert(goal.clone(), Memo::Proved(d.clone()));
                (Some(d), NO_TOUCH)
            }
            None => {
                if min_touch >= my_index {
                    // Only loops within the failed subtree: cache is sound.
                    let entry = self.memo.entry(goal.clone());
                    let keep = match entry {
                        std::collections::hash_map::Entry::Occupied(ref o) => match o.get() {
                            Memo::Failed(r) => *r < remaining,
                            Memo::Proved(_) => false,
                        },
                        std::collections::hash_map::Entry::Vacant(_) => true,
                    };
                    if keep {
                        self.memo.insert(goal.clone(), Memo::Failed(remaining));
                    }
                }
                let up = if min_touch >= my_index { NO_TOUCH } else { min_touch };
                (None, up)
            }
        }
    }

    /// Zero-premise endings: axiom, bot, zero, and the body axiom, each
    /// padded out with weakenings.
    fn close(&self, goal: &PSequent) -> Option<Derivation> {
        if goal.antecedent.contains(&Formula::Zero) {
            return Some(build::zero(goal.clone()));
        }
        if let Some(a) = &goal.stoup {
            if goal.antecedent.contains(a) {
                let rest = goal.antecedent.minus_one(a).unwrap();
                return Some(build::weaken_to(build::ax(a.clone()), &rest, &goal.body));
            }
            return None;
        }
        // Empty stoup: close through bot or through ax + der.
        if goal.antecedent.contains(&Formula::Bot) {
            let rest = goal.antecedent.minus_one(&Formula::Bot).unwrap();
            return Some(build::weaken_to(build::bot(), &rest, &goal.body));
        }
        for a in goal.antecedent.distinct() {
            if goal.body.contains(a) && self.policy.contains(a) {
                let rest_ant = goal.antecedent.minus_one(a).unwrap();
                let rest_body = goal.body.minus_one(a).unwrap();
                return Some(build::weaken_to(
                    build::der(build::ax(a.clone())),
                    &rest_ant,
                    &rest_body,
                ));
            }
        }
        None
    }

    /// Ordered backward moves: stoup implication introductions first, then
    /// left conjunction/disjunction decompositions, the remaining right
    /// rules, left implications, contractions, and dereliction last.
    fn moves(&self, goal: &PSequent) -> Vec<Move> {
        let p = &self.policy;
        let mut out = Vec::new();
        let ant = &goal.antecedent;
        let body = &goal.body;

        if let Some(Formula::Imp(a, b)) = &goal.stoup {
            let mut s = goal.clone();
            s.antecedent.insert(a.as_ref().clone());
            s.stoup = Some(b.as_ref().clone());
            out.push(Move::unary(MoveKind::Imp1R, s));
            if p.contains(b) {
                let mut s = goal.clone();
                s.antecedent.insert(a.as_ref().clone());
                s.body.insert(b.as_ref().clone());
                s.stoup = None;
                out.push(Move::unary(MoveKind::Imp2R, s));
            }
        }

        for f in ant.distinct() {
            if let Formula::And(a, b) = f {
                let ok = if goal.stoup.is_some() {
                    !p.contains(a) && !p.contains(b)
                } else {
                    true
                };
                if ok {
                    let mut s = goal.clone();
                    s.antecedent.remove_one(f);
                    s.antecedent.insert(a.as_ref().clone());
                    s.antecedent.insert(b.as_ref().clone());
                    out.push(Move::unary(MoveKind::AndL(f.clone()), s));
                }
            }
        }

        for f in ant.distinct() {
            if let Formula::Or(a, b) = f {
                let ok = if goal.stoup.is_some() {
                    !p.contains(a) && !p.contains(b)
                } else {
                    true
                };
                if ok {
                    let shared = goal.antecedent.minus_one(f).unwrap();
                    let mut s1 = goal.clone();
                    s1.antecedent = shared.clone();
                    s1.antecedent.insert(a.as_ref().clone());
                    let mut s2 = goal.clone();
                    s2.antecedent = shared;
                    s2.antecedent.insert(b.as_ref().clone());
                    out.push(Move::binary(MoveKind::OrL(f.clone()), s1, s2));
                }
            }
        }

        match &goal.stoup {
            Some(Formula::And(a, b)) => {
                let (a, b) = (a.as_ref(), b.as_ref());
                let with_stoup = |x: &Formula| {
                    let mut s = goal.clone();
                    s.stoup = Some(x.clone());
                    s
                };
                let with_body = |x: &Formula| {
                    let mut s = goal.clone();
                    s.stoup = None;
                    s.body.insert(x.clone());
                    s
                };
                out.push(Move::binary(MoveKind::AndR(1), with_stoup(a), with_stoup(b)));
                if p.contains(a) && p.contains(b) {
                    out.push(Move::binary(MoveKind::AndR(2), with_body(a), with_body(b)));
                }
                if p.contains(b) {
                    out.push(Move::binary(MoveKind::AndR(3), with_stoup(a), with_body(b)));
                }
                if p.contains(a) {
                    out.push(Move::binary(MoveKind::AndR(4), with_body(a), with_stoup(b)));
                }
            }
            Some(Formula::Or(a, b)) => {
                let (a, b) = (a.as_ref(), b.as_ref());
                let mut s = goal.clone();
                s.stoup = Some(a.clone());
                out.push(Move::unary(MoveKind::OrR(1), s));
                let mut s = goal.clone();
                s.stoup = Some(b.clone());
                out.push(Move::unary(MoveKind::OrR(2), s));
                if p.contains(a) {
                    let mut s = goal.clone();
                    s.stoup = None;
                    s.body.insert(a.clone());
                    out.push(Move::unary(MoveKind::OrR(3), s));
                }
                if p.contains(b) {
                    let mut s = goal.clone();
                    s.stoup = None;
                    s.body.insert(b.clone());
                    out.push(Move::unary(MoveKind::OrR(4), s));
                }
            }
            _ => {}
        }

        for f in ant.distinct() {
            if let Formula::Imp(a, b) = f {
                let rest = goal.antecedent.minus_one(f).unwrap();
                let arg_goal = |stoup: Option<Formula>, extra_body: Option<Formula>| {
                    let mut s = PSequent {
                        antecedent: rest.clone(),
                        body: body.clone(),
                        stoup,
                    };
                    if let Some(x) = extra_body {
                        s.body.insert(x);
                    }
                    s
                };
                if goal.stoup.is_some() && !p.contains(b) {
                    let mut s1 = arg_goal(goal.stoup.clone(), None);
                    s1.antecedent.insert(b.as_ref().clone());
                    let s2 = arg_goal(Some(a.as_ref().clone()), None);
                    out.push(Move::binary(MoveKind::ImpL(f.clone(), 1), s1, s2));
                }
                if goal.stoup.is_none() {
                    let mut s1 = arg_goal(None, None);
                    s1.antecedent.insert(b.as_ref().clone());
                    let s2 = arg_goal(Some(a.as_ref().clone()), None);
                    out.push(Move::binary(MoveKind::ImpL(f.clone(), 2), s1, s2));
                }
                if p.contains(a) {
                    let mut s1 = arg_goal(None, None);
                    s1.antecedent.insert(b.as_ref().clone());
                    let s2 = arg_goal(goal.stoup.clone(), Some(a.as_ref().clone()));
                    out.push(Move::binary(MoveKind::ImpL(f.clone(), 3), s1, s2));
                }
            }
        }

        for f in ant.distinct() {
            if ant.count(f) < self.cfg.mult_cap {
                let mut s = goal.clone();
                s.antecedent.insert(f.clone());
                out.push(Move::unary(MoveKind::CL(f.clone()), s));
            }
        }
        for f in body.distinct() {
            if body.count(f) < self.cfg.mult_cap {
                let mut s = goal.clone();
                s.body.insert(f.clone());
                out.push(Move::unary(MoveKind::CR(f.clone()), s));
            }
        }

        if goal.stoup.is_none() {
            for f in body.distinct() {
                let mut s = goal.clone();
                s.body.remove_one(f);
                s.stoup = Some(f.clone());
                out.push(Move::unary(MoveKind::Der, s));
            }
        }

        out
    }
}

enum MoveKind {
    Imp1R,
    Imp2R,
    AndL(Formula),
    OrL(Formula),
    AndR(u8),
    OrR(u8),
    ImpL(Formula, u8),
    CL(Formula),
    CR(Formula),
    Der,
}

struct Move {
    kind: MoveKind,
    subgoals: Vec<PSequent>,
}

impl Move {
    fn unary(kind: MoveKind, s: PSequent) -> Move {
        Move {
            kind,
            subgoals: vec![s],
        }
    }

    fn binary(kind: MoveKind, s1: PSequent, s2: PSequent) -> Move {
        Move {
            kind,
            subgoals: vec![s1, s2],
        }
    }
}

/// Rebuilds the derivation for a move; shared-context branching is followed
/// by contractions down to the goal.
fn assemble(goal: &PSequent, mv: &Move, mut proofs: Vec<Derivation>) -> Derivation {
    let one = |proofs: &mut Vec<Derivation>| proofs.remove(0);
    let d = match &mv.kind {
        MoveKind::Imp1R => {
            let (a, _) = imp_parts(goal.stoup.as_ref().unwrap());
            build::imp1_r(one(&mut proofs), a)
        }
        MoveKind::Imp2R => {
            let (a, b) = imp_parts(goal.stoup.as_ref().unwrap());
            build::imp2_r(one(&mut proofs), a, b)
        }
        MoveKind::AndL(f) => {
            let d = one(&mut proofs);
            if goal.stoup.is_some() {
                build::and1_l(d, f)
            } else {
                build::and2_l(d, f)
            }
        }
        MoveKind::OrL(f) => {
            let q = proofs.pop().unwrap();
            let p = proofs.pop().unwrap();
            if goal.stoup.is_some() {
                build::or1_l(p, q, f)
            } else {
                build::or2_l(p, q, f)
            }
        }
        MoveKind::AndR(variant) => {
            let q = proofs.pop().unwrap();
            let p = proofs.pop().unwrap();
            let (a, b) = and_parts(goal.stoup.as_ref().unwrap());
            match variant {
                1 => build::and1_r(p, q),
                2 => build::and2_r(p, a, q, b),
                3 => build::and3_r(p, q, b),
                4 => build::and4_r(p, a, q),
                _ => unreachable!(),
            }
        }
        MoveKind::OrR(variant) => {
            let d = one(&mut proofs);
            let (a, b) = or_parts(goal.stoup.as_ref().unwrap());
            match variant {
                1 => build::or1_r(d, b.clone()),
                2 => build::or2_r(d, a.clone()),
                3 => build::or3_r(d, a, b.clone()),
                4 => build::or4_r(d, a.clone(), b),
                _ => unreachable!(),
            }
        }
        MoveKind::ImpL(f, variant) => {
            let q = proofs.pop().unwrap();
            let p = proofs.pop().unwrap();
            let (a, b) = imp_parts(f);
            match variant {
                1 => build::imp1_l(p, b, q),
                2 => build::imp2_l(p, b, q),
                3 => build::imp3_l(p, b, q, a),
                _ => unreachable!(),
            }
        }
        MoveKind::CL(f) => build::c_l(one(&mut proofs), f),
        MoveKind::CR(f) => build::c_r(one(&mut proofs), f),
        MoveKind::Der => build::der(one(&mut proofs)),
    };
    build::contract_to(d, goal)
}

fn imp_parts(f: &Formula) -> (&Formula, &Formula) {
    match f {
        Formula::Imp(a, b) => (a, b),
        _ => unreachable!(),
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

/// One-shot bounded search for a cut-free derivation of the sequent.
pub fn prove_bounded(s: &PSequent, policy: &Policy, cfg: SearchConfig) -> Option<Derivation> {
    Prover::new(policy.clone(), cfg).prove(s)
}

// ---------------------------------------------------------------------------
// Backward search for LJ
// ---------------------------------------------------------------------------

/// Reusable bounded prover for cut-free LJ.
pub struct LjProver {
    cfg: SearchConfig,
    memo: HashMap<LjSequent, Memo<LjDerivation>>,
}

impl LjProver {
    pub fn new(cfg: SearchConfig) -> Self {
        LjProver {
            cfg,
            memo: HashMap::new(),
        }
    }

    pub fn prove(&mut self, goal: &LjSequent) -> Option<LjDerivation> {
        let mut branch = Vec::new();
        self.search(goal, self.cfg.depth, &mut branch).0
    }

    fn search(
        &mut self,
        goal: &LjSequent,
        remaining: usize,
        branch: &mut Vec<LjSequent>,
    ) -> (Option<LjDerivation>, usize) {
        if let Some(i) = branch.iter().position(|s| s == goal) {
            return (None, i);
        }
        match self.memo.get(goal) {
            Some(Memo::Proved(d)) => return (Some(d.clone()), NO_TOUCH),
            Some(Memo::Failed(r)) if remaining <= *r => return (None, NO_TOUCH),
            _ => {}
        }
        if let Some(d) = close_lj(goal) {
            self.memo.insert(goal.clone(), Memo::Proved(d.clone()));
            return (Some(d), NO_TOUCH);
        }
        if remaining == 0 {
            return (None, NO_TOUCH);
        }
        let my_index = branch.len();
        branch.push(goal.clone());
        let mut min_touch = NO_TOUCH;
        let mut found = None;
        'moves: for mv in lj_moves(goal, self.cfg.mult_cap) {
            let mut proofs = Vec::with_capacity(mv.subgoals.len());
            for sub in &mv.subgoals {
                let (res, touch) = self.search(sub, remaining - 1, branch);
                match res {
                    Some(d) => proofs.push(d),
                    None => {
                        min_touch = min_touch.min(touch);
                        continue 'moves;
                    }
                }
            }
            found = Some(assemble_lj(goal, &mv, proofs));
            break;
        }
        branch.pop();
        match found {
            Some(d) => {
                debug_assert_eq!(&d.conclusion, goal);
                self.memo.insert(goal.clone(), Memo::Proved(d.clone()));
                (Some(d), NO_TOUCH)
            }
            None => {
                if min_touch >= my_index {
                    let stale = matches!(self.memo.get(goal), Some(Memo::Failed(r)) if *r >= remaining);
                    if !stale {
                        self.memo.insert(goal.clone(), Memo::Failed(remaining));
                    }
                }
                let up = if min_touch >= my_index { NO_TOUCH } else { min_touch };
                (None, up)
            }
        }
    }
}

fn close_lj(goal: &LjSequent) -> Option<LjDerivation> {
    if goal.left.contains(&Formula::Zero) {
        return Some(lj_build::zero_l(
            goal.left.iter().cloned().collect::<Vec<_>>(),
            goal.right.clone(),
        ));
    }
    if goal.left.contains(&goal.right) {
        let rest = goal.left.minus_one(&goal.right).unwrap();
        let mut d = lj_build::ax(goal.right.clone());
        for f in rest.iter() {
            d = lj_build::w_l(d, f.clone());
        }
        return Some(d);
    }
    None
}

struct LjMove {
    kind: LjMoveKind,
    subgoals: Vec<LjSequent>,
}

enum LjMoveKind {
    ImpR,
    AndL(Formula),
    OrL(Formula),
    AndR,
    OrR1,
    OrR2,
    ImpL(Formula),
    CL(Formula),
}

fn lj_moves(goal: &LjSequent, cap: usize) -> Vec<LjMove> {
    let mut out = Vec::new();

    if let Formula::Imp(a, b) = &goal.right {
        let mut s = goal.clone();
        s.left.insert(a.as_ref().clone());
        s.right = b.as_ref().clone();
        out.push(LjMove {
            kind: LjMoveKind::ImpR,
            subgoals: vec![s],
        });
    }

    for f in goal.left.distinct() {
        if let Formula::And(a, b) = f {
            let mut s = goal.clone();
            s.left.remove_one(f);
            s.left.insert(a.as_ref().clone());
            s.left.insert(b.as_ref().clone());
            out.push(LjMove {
                kind: LjMoveKind::AndL(f.clone()),
                subgoals: vec![s],
            });
        }
    }

    for f in goal.left.distinct() {
        if let Formula::Or(a, b) = f {
            let shared = goal.left.minus_one(f).unwrap();
            let mut s1 = goal.clone();
            s1.left = shared.clone();
            s1.left.insert(a.as_ref().clone());
            let mut s2 = goal.clone();
            s2.left = shared;
            s2.left.insert(b.as_ref().clone());
            out.push(LjMove {
                kind: LjMoveKind::OrL(f.clone()),
                subgoals: vec![s1, s2],
            });
        }
    }

    match &goal.right {
        Formula::And(a, b) => {
            let s1 = LjSequent {
                left: goal.left.clone(),
                right: a.as_ref().clone(),
            };
            let s2 = LjSequent {
                left: goal.left.clone(),
                right: b.as_ref().clone(),
            };
            out.push(LjMove {
                kind: LjMoveKind::AndR,
                subgoals: vec![s1, s2],
            });
        }
        Formula::Or(a, b) => {
            out.push(LjMove {
                kind: LjMoveKind::OrR1,
                subgoals: vec![LjSequent {
                    left: goal.left.clone(),
                    right: a.as_ref().clone(),
                }],
            });
            out.push(LjMove {
                kind: LjMoveKind::OrR2,
                subgoals: vec![LjSequent {
                    left: goal.left.clone(),
                    right: b.as_ref().clone(),
                }],
            });
        }
        _ => {}
    }

    for f in goal.left.distinct() {
        if let Formula::Imp(a, b) = f {
            let rest = goal.left.minus_one(f).unwrap();
            let mut s1 = LjSequent {
                left: rest.clone(),
                right: goal.right.clone(),
            };
            s1.left.insert(b.as_ref().clone());
            let s2 = LjSequent {
                left: rest,
                right: a.as_ref().clone(),
            };
            out.push(LjMove {
                kind: LjMoveKind::ImpL(f.clone()),
                subgoals: vec![s1, s2],
            });
        }
    }

    for f in goal.left.distinct() {
        if goal.left.count(f) < cap {
            let mut s = goal.clone();
            s.left.insert(f.clone());
            out.push(LjMove {
                kind: LjMoveKind::CL(f.clone()),
                subgoals: vec![s],
            });
        }
    }

    out
}

fn assemble_lj(goal: &LjSequent, mv: &LjMove, mut proofs: Vec<LjDerivation>) -> LjDerivation {
    let one = |proofs: &mut Vec<LjDerivation>| proofs.remove(0);
    let d = match &mv.kind {
        LjMoveKind::ImpR => {
            let (a, _) = imp_parts(&goal.right);
            lj_build::imp_r(one(&mut proofs), a)
        }
        LjMoveKind::AndL(f) => lj_build::and_l(one(&mut proofs), f),
        LjMoveKind::OrL(f) => {
            let q = proofs.pop().unwrap();
            let p = proofs.pop().unwrap();
            lj_build::or_l(p, q, f)
        }
        LjMoveKind::AndR => {
            let q = proofs.pop().unwrap();
            let p = proofs.pop().unwrap();
            lj_build::and_r(p, q)
        }
        LjMoveKind::OrR1 => {
            let (_, b) = or_parts(&goal.right);
            lj_build::or_r1(one(&mut proofs), b.clone())
        }
        LjMoveKind::OrR2 => {
            let (a, _) = or_parts(&goal.right);
            lj_build::or_r2(one(&mut proofs), a.clone())
        }
        LjMoveKind::ImpL(f) => {
            let q = proofs.pop().unwrap();
            let p = proofs.pop().unwrap();
            let (_, b) = imp_parts(f);
            lj_build::imp_l(p, b, q)
        }
        LjMoveKind::CL(f) => lj_build::c_l(one(&mut proofs), f),
    };
    contract_lj_to(d, goal)
}

fn contract_lj_to(mut d: LjDerivation, goal: &LjSequent) -> LjDerivation {
    loop {
        let surplus: Vec<Formula> = d
            .conclusion
            .left
            .counts()
            .filter(|(f, n)| *n > goal.left.count(f))
            .map(|(f, _)| f.clone())
            .collect();
        if surplus.is_empty() {
            break;
        }
        for f in surplus {
            d = lj_build::c_l(d, &f);
        }
    }
    assert_eq!(&d.conclusion, goal, "assemble_lj: contraction mismatch");
    d
}

/// One-shot bounded search for a cut-free LJ derivation of `Γ |- a`.
pub fn lj_prove_bounded(
    antecedent: &Multiset<Formula>,
    a: &Formula,
    cfg: SearchConfig,
) -> Option<LjDerivation> {
    let goal = LjSequent {
        left: antecedent.clone(),
        right: a.clone(),
    };
    LjProver::new(cfg).prove(&goal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::check_derivation;
    use crate::embeddings::check_lj;
    use crate::formula::{parse_formula, Formula as F};

    fn v(name: &str) -> F {
        F::var(name)
    }

    fn stoup_goal(f: &F) -> PSequent {
        PSequent::new([], [], Some(f.clone()))
    }

    fn body_goal(f: &F) -> PSequent {
        PSequent::new([], [f.clone()], None)
    }

    #[test]
    fn classical_validity_examples() {
        let em = parse_formula("x_c | (x_c -> bot)").unwrap();
        assert!(classical_valid(&em).unwrap());
        assert!(!classical_valid(&v("x_c")).unwrap());
        let peirce = parse_formula("((x_c -> y_c) -> x_c) -> x_c").unwrap();
        assert!(classical_valid(&peirce).unwrap());
        assert!(classical_valid(&v("p")).is_err());
        assert!(classical_valid(&F::Zero).is_err());
    }

    #[test]
    fn enumerate_counts() {
        let leaves = [v("p"), v("q"), F::Zero];
        assert_eq!(enumerate_formulas(&leaves, 1).len(), 3);
        assert_eq!(enumerate_formulas(&leaves, 3).len(), 3 + 27);
        assert_eq!(enumerate_formulas(&leaves, 5).len(), 3 + 27 + 486);
        assert_eq!(enumerate_formulas(&leaves, 7).len(), 3 + 27 + 486 + 10935);
    }

    #[test]
    fn prove_identity() {
        let f = F::imp(v("p"), v("p"));
        let cfg = SearchConfig::new(3, 2);
        let d = prove_bounded(&stoup_goal(&f), &Policy::BotOnly, cfg).expect("found");
        assert!(check_derivation(&d, &Policy::BotOnly).is_ok());
    }

    #[test]
    fn peirce_is_classical_only() {
        let cfg = SearchConfig::new(12, 2);
        let peirce_i = parse_formula("((p -> q) -> p) -> p").unwrap();
        assert!(prove_bounded(&stoup_goal(&peirce_i), &Policy::BotOnly, cfg).is_none());
        assert!(lj_prove_bounded(&Multiset::new(), &peirce_i, cfg).is_none());

        let peirce_c = parse_formula("((x_c -> y_c) -> x_c) -> x_c").unwrap();
        assert!(classical_valid(&peirce_c).unwrap());
        let d = prove_bounded(&body_goal(&peirce_c), &Policy::ClassicalVars, cfg)
            .expect("classical proof found");
        let report = check_derivation(&d, &Policy::ClassicalVars);
        assert!(report.is_ok(), "{report}");
    }

    #[test]
    fn excluded_middle_in_body_position() {
        let cfg = SearchConfig::new(12, 2);
        let em = parse_formula("x_c | (x_c -> bot)").unwrap();
        let d = prove_bounded(&body_goal(&em), &Policy::ClassicalVars, cfg).expect("found");
        assert!(check_derivation(&d, &Policy::ClassicalVars).is_ok());
        // Not provable in the stoup under the bot-only policy over
        // intuitionistic atoms.
        let em_i = parse_formula("p | (p -> 0)").unwrap();
        assert!(prove_bounded(&stoup_goal(&em_i), &Policy::BotOnly, cfg).is_none());
    }

    #[test]
    fn lj_search_examples() {
        let cfg = SearchConfig::new(8, 2);
        let d = lj_prove_bounded(
            &Multiset::new(),
            &parse_formula("p -> (q -> p)").unwrap(),
            cfg,
        )
        .expect("found");
        assert!(check_lj(&d).is_ok());

        let and_comm = lj_prove_bounded(
            &Multiset::singleton(parse_formula("p & q").unwrap()),
            &parse_formula("q & p").unwrap(),
            cfg,
        )
        .expect("found");
        assert!(check_lj(&and_comm).is_ok());

        assert!(lj_prove_bounded(
            &Multiset::new(),
            &parse_formula("p | (p -> 0)").unwrap(),
            SearchConfig::new(12, 2),
        )
        .is_none());
    }

    #[test]
    fn monotone_in_depth() {
        let f = parse_formula("p -> (q -> p & q)").unwrap();
        let shallow = prove_bounded(&stoup_goal(&f), &Policy::BotOnly, SearchConfig::new(4, 2));
        assert!(shallow.is_some());
        for depth in 5..9 {
            assert!(
                prove_bounded(&stoup_goal(&f), &Policy::BotOnly, SearchConfig::new(depth, 2))
                    .is_some()
            );
        }
    }

    #[test]
    fn found_proofs_check_under_their_policy() {
        let cfg = SearchConfig::new(9, 2);
        let samples = [
            ("|- ; p -> p", Policy::BotOnly),
            ("|- ; p -> (q -> p)", Policy::BotOnly),
            ("p & q |- ; q & p", Policy::BotOnly),
            ("|- x_c -> x_c ;", Policy::ClassicalVars),
            ("0 |- ; p", Policy::BotOnly),
            ("bot |- x_c ;", Policy::ClassicalVars),
        ];
        for (text, policy) in samples {
            let goal = PSequent::parse(text).unwrap();
            let d = prove_bounded(&goal, &policy, cfg).unwrap_or_else(|| panic!("{text}"));
            let report = check_derivation(&d, &policy);
            assert!(report.is_ok(), "{text}: {report}");
            assert!(d.is_cut_free());
            assert_eq!(d.conclusion, goal);
        }
    }
}
