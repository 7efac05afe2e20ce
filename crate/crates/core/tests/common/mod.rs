//! Shared corpus builders for the integration suites: one fixture proof per
//! rule, a cut corpus covering every reduction class, and seeded random
//! generators for LK/LJ proofs and transformer instances.

#![allow(dead_code)]

use mixed_core::calculus::build;
use mixed_core::embeddings::{lj_build, lk_build, LjDerivation, LkDerivation};
use mixed_core::formula::Formula;
use mixed_core::{Derivation, PSequent, Rule};

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

pub fn v(name: &str) -> Formula {
    Formula::var(name)
}

pub fn imp(a: Formula, b: Formula) -> Formula {
    Formula::imp(a, b)
}

/// `|- ; a -> a` by imp1_r over ax.
pub fn imp_id(a: Formula) -> Derivation {
    build::imp1_r(build::ax(a.clone()), &a)
}

/// `a |- a ;` by der over ax (for `a` in P).
pub fn der_ax(a: Formula) -> Derivation {
    build::der(build::ax(a))
}

/// One fixture proof per rule, rooted at that rule, all valid under the
/// classical-variables policy.
pub fn rule_corpus() -> Vec<(Rule, Derivation)> {
    let p = || v("p");
    let q = || v("q");
    let r = || v("r");
    let xc = || v("x_c");
    let yc = || v("y_c");
    let mut out = Vec::new();

    out.push((Rule::Ax, build::ax(p())));
    out.push((
        Rule::Cut1,
        build::cut1(imp_id(p()), build::ax(imp(p(), p()))),
    ));
    out.push((
        Rule::Cut2,
        build::cut2(build::w_r(build::ax(p()), xc()), der_ax(xc()), &xc()),
    ));
    out.push((Rule::Der, der_ax(xc())));
    out.push((
        Rule::CL,
        build::c_l(build::w_l(build::w_l(build::ax(p()), p()), q()), &p()),
    ));
    out.push((
        Rule::CR,
        build::c_r(build::w_r(der_ax(xc()), xc()), &xc()),
    ));
    out.push((Rule::WL, build::w_l(build::ax(p()), q())));
    out.push((Rule::WR, build::w_r(build::ax(p()), xc())));
    out.push((
        Rule::Zero,
        build::zero(PSequent::new(
            [Formula::Zero, p()],
            [xc()],
            Some(q()),
        )),
    ));
    out.push((Rule::Bot, build::bot()));
    out.push((
        Rule::And1L,
        build::and1_l(build::w_l(build::ax(p()), q()), &Formula::and(p(), q())),
    ));
    out.push((
        Rule::And2L,
        build::and2_l(
            build::w_l(der_ax(xc()), yc()),
            &Formula::and(xc(), yc()),
        ),
    ));
    out.push((Rule::And1R, build::and1_r(build::ax(p()), build::ax(q()))));
    out.push((
        Rule::And2R,
        build::and2_r(der_ax(xc()), &xc(), der_ax(yc()), &yc()),
    ));
    out.push((
        Rule::And3R,
        build::and3_r(build::ax(p()), der_ax(yc()), &yc()),
    ));
    out.push((
        Rule::And4R,
        build::and4_r(der_ax(xc()), &xc(), build::ax(q())),
    ));
    out.push((
        Rule::Or1L,
        build::or1_l(
            build::w_l(build::ax(r()), p()),
            build::w_l(build::ax(r()), q()),
            &Formula::or(p(), q()),
        ),
    ));
    out.push((
        Rule::Or2L,
        build::or2_l(
            build::w_l(der_ax(xc()), p()),
            build::w_l(der_ax(xc()), q()),
            &Formula::or(p(), q()),
        ),
    ));
    out.push((Rule::Or1R, build::or1_r(build::ax(p()), q())));
    out.push((Rule::Or2R, build::or2_r(build::ax(q()), p())));
    out.push((Rule::Or3R, build::or3_r(der_ax(xc()), &xc(), q())));
    out.push((Rule::Or4R, build::or4_r(der_ax(xc()), q(), &xc())));
    out.push((
        Rule::Imp1L,
        build::imp1_l(build::ax(q()), &q(), build::ax(p())),
    ));
    out.push((
        Rule::Imp2L,
        build::imp2_l(der_ax(xc()), &xc(), build::ax(p())),
    ));
    out.push((
        Rule::Imp3L,
        build::imp3_l(
            build::w_l(der_ax(yc()), q()),
            &q(),
            der_ax(xc()),
            &xc(),
        ),
    ));
    out.push((Rule::Imp1R, imp_id(p())));
    out.push((
        Rule::Imp2R,
        build::imp2_r(der_ax(xc()), &xc(), &xc()),
    ));
    assert_eq!(out.len(), 27);
    let covered: Vec<Rule> = out.iter().map(|(r, _)| *r).collect();
    for rule in mixed_core::calculus::ALL_RULES {
        assert!(covered.contains(&rule), "rule corpus is missing {rule}");
    }
    out
}

/// Mutates the root conclusion by one formula occurrence so that checking
/// must fail: adds a fresh variable to the antecedent, except for zero
/// roots (which accept any antecedent), where the mandatory `0` is replaced.
pub fn mutate_root(d: &Derivation) -> Derivation {
    let mut bad = d.clone();
    if bad.rule == Rule::Zero {
        bad.conclusion.antecedent.remove_one(&Formula::Zero);
        bad.conclusion.antecedent.insert(v("zz"));
    } else {
        bad.conclusion.antecedent.insert(v("zz"));
    }
    bad
}

/// Cut corpus: one key case per compatible introduction pair, commutation
/// cases for every k, and mechanical cut wrappers around the rule corpus.
pub fn cut_corpus() -> Vec<Derivation> {
    let p = || v("p");
    let q = || v("q");
    let r = || v("r");
    let s = || v("s");
    let a_ = || v("a");
    let b_ = || v("b");
    let xc = || v("x_c");
    let yc = || v("y_c");
    let zc = || v("z_c");
    let mut out = Vec::new();

    // --- key cases (k = 0), one per compatible pair ---

    // conjunction
    let and1r = |x: Formula, y: Formula| build::and1_r(build::ax(x), build::ax(y));
    let and_pq = Formula::and(p(), q());
    let r1 = build::and1_l(
        build::w_l(build::w_l(build::ax(r()), p()), q()),
        &and_pq,
    );
    out.push(build::cut1(and1r(p(), q()), r1)); // (and1_r, and1_l)

    let r2 = build::and2_l(
        build::w_l(build::w_l(der_ax(xc()), p()), q()),
        &and_pq,
    );
    out.push(build::cut1(and1r(p(), q()), r2.clone())); // (and1_r, and2_l)

    let and_cc = Formula::and(xc(), yc());
    let l_and2r = build::and2_r(der_ax(xc()), &xc(), der_ax(yc()), &yc());
    let r_cc = build::and2_l(
        build::w_l(build::w_l(der_ax(zc()), xc()), yc()),
        &and_cc,
    );
    out.push(build::cut1(l_and2r, r_cc.clone())); // (and2_r, and2_l)

    let and_pyc = Formula::and(p(), yc());
    let l_and3r = build::and3_r(build::ax(p()), der_ax(yc()), &yc());
    let r_pyc = build::and2_l(
        build::w_l(build::w_l(der_ax(xc()), p()), yc()),
        &and_pyc,
    );
    out.push(build::cut1(l_and3r, r_pyc)); // (and3_r, and2_l)

    let and_xq = Formula::and(xc(), q());
    let l_and4r = build::and4_r(der_ax(xc()), &xc(), build::ax(q()));
    let r_xq = build::and2_l(
        build::w_l(build::w_l(der_ax(yc()), xc()), q()),
        &and_xq,
    );
    out.push(build::cut1(l_and4r, r_xq)); // (and4_r, and2_l)

    // disjunction
    let or_pq = Formula::or(p(), q());
    let or1l_user = build::or1_l(
        build::w_l(build::ax(r()), p()),
        build::w_l(build::ax(r()), q()),
        &or_pq,
    );
    let or2l_user = build::or2_l(
        build::w_l(der_ax(xc()), p()),
        build::w_l(der_ax(xc()), q()),
        &or_pq,
    );
    out.push(build::cut1(build::or1_r(build::ax(p()), q()), or1l_user.clone())); // (or1_r, or1_l)
    out.push(build::cut1(build::or1_r(build::ax(p()), q()), or2l_user.clone())); // (or1_r, or2_l)
    out.push(build::cut1(build::or2_r(build::ax(q()), p()), or1l_user.clone())); // (or2_r, or1_l)
    out.push(build::cut1(build::or2_r(build::ax(q()), p()), or2l_user.clone())); // (or2_r, or2_l)

    let or_xq = Formula::or(xc(), q());
    let or2l_xq = build::or2_l(
        build::w_l(der_ax(yc()), xc()),
        build::w_l(der_ax(yc()), q()),
        &or_xq,
    );
    out.push(build::cut1(
        build::or3_r(der_ax(xc()), &xc(), q()),
        or2l_xq,
    )); // (or3_r, or2_l)

    let or_qx = Formula::or(q(), xc());
    let or2l_qx = build::or2_l(
        build::w_l(der_ax(yc()), q()),
        build::w_l(der_ax(yc()), xc()),
        &or_qx,
    );
    out.push(build::cut1(
        build::or4_r(der_ax(xc()), q(), &xc()),
        or2l_qx,
    )); // (or4_r, or2_l)

    // implication
    let l_ipq = build::imp1_r(build::w_l(build::ax(q()), p()), &p()); // q |- ; p -> q
    let r_ipq = build::imp1_l(build::ax(q()), &q(), build::ax(p()));
    out.push(build::cut1(l_ipq, r_ipq)); // (imp1_r, imp1_l)

    let l_ipx = build::imp1_r(build::w_l(build::ax(xc()), p()), &p()); // x_c |- ; p -> x_c
    let r_ipx = build::imp2_l(der_ax(xc()), &xc(), build::ax(p()));
    out.push(build::cut1(l_ipx, r_ipx)); // (imp1_r, imp2_l)

    let l_ixq = build::imp1_r(build::w_l(build::ax(q()), xc()), &xc()); // q |- ; x_c -> q
    let r_ixq = build::imp3_l(
        build::w_l(der_ax(yc()), q()),
        &q(),
        der_ax(xc()),
        &xc(),
    );
    out.push(build::cut1(l_ixq, r_ixq.clone())); // (imp1_r, imp3_l)

    let l_ixx = build::imp2_r(der_ax(xc()), &xc(), &xc()); // |- ; x_c -> x_c
    let r_ixx = build::imp2_l(der_ax(xc()), &xc(), build::ax(xc()));
    out.push(build::cut1(l_ixx.clone(), r_ixx)); // (imp2_r, imp2_l)

    let l_ixy = build::imp2_r(
        build::w_r(build::w_l(build::bot(), xc()), yc()),
        &xc(),
        &yc(),
    ); // bot |- ; x_c -> y_c
    let r_ixy = build::imp3_l(
        build::w_l(der_ax(zc()), yc()),
        &yc(),
        der_ax(xc()),
        &xc(),
    );
    out.push(build::cut1(l_ixy, r_ixy)); // (imp2_r, imp3_l)

    // --- k = 1: left principal, right structural or passing through ---
    let ipp = imp(p(), p());
    out.push(build::cut1(imp_id(p()), build::w_l(build::ax(q()), ipp.clone())));
    out.push(build::cut1(
        imp_id(p()),
        build::c_l(
            build::w_l(build::w_l(build::ax(q()), ipp.clone()), ipp.clone()),
            &ipp,
        ),
    ));
    out.push(build::cut1(
        imp_id(p()),
        build::and2_l(
            build::w_l(
                build::w_l(build::w_l(der_ax(xc()), a_()), b_()),
                ipp.clone(),
            ),
            &Formula::and(a_(), b_()),
        ),
    ));
    out.push(build::cut1(
        imp_id(p()),
        build::or2_l(
            build::w_l(build::w_l(der_ax(xc()), a_()), ipp.clone()),
            build::w_l(build::w_l(der_ax(xc()), b_()), ipp.clone()),
            &Formula::or(a_(), b_()),
        ),
    ));
    out.push(build::cut1(imp_id(p()), build::ax(ipp.clone())));

    // --- k = 2: left premise does not end with the stoup principal ---
    out.push(build::cut1(
        build::w_l(imp_id(p()), q()),
        build::w_l(build::ax(r()), ipp.clone()),
    ));
    out.push(build::cut1(
        build::c_r(build::w_r(build::w_r(imp_id(p()), xc()), xc()), &xc()),
        build::w_l(build::ax(r()), ipp.clone()),
    ));
    out.push(build::cut1(
        build::zero(PSequent::new([Formula::Zero], [], Some(ipp.clone()))),
        build::w_l(build::ax(r()), ipp.clone()),
    ));
    out.push(build::cut1(
        build::ax(and_pq.clone()),
        build::and1_l(build::w_l(build::w_l(build::ax(r()), p()), q()), &and_pq),
    ));
    out.push(build::cut1(
        build::imp1_l(build::ax(q()), &q(), build::ax(p())),
        build::w_l(build::ax(r()), q()),
    ));
    out.push(build::cut1(
        build::or1_l(
            build::w_l(build::ax(r()), p()),
            build::w_l(build::ax(r()), q()),
            &or_pq,
        ),
        build::w_l(build::ax(s()), r()),
    ));

    // --- k = 3: body occurrence created by der, w_r, c_r, zero, or passing
    // through a body-consuming right rule ---
    out.push(build::cut2(
        build::w_r(build::ax(p()), xc()),
        der_ax(xc()),
        &xc(),
    ));
    out.push(build::cut2(der_ax(xc()), build::w_l(der_ax(yc()), xc()), &xc()));
    out.push(build::cut2(
        build::c_r(build::w_r(build::w_r(build::ax(p()), xc()), xc()), &xc()),
        der_ax(xc()),
        &xc(),
    ));
    out.push(build::cut2(
        build::zero(PSequent::new([Formula::Zero], [xc()], Some(q()))),
        der_ax(xc()),
        &xc(),
    ));
    out.push(build::cut2(
        build::or3_r(build::w_r(der_ax(xc()), xc()), &xc(), q()),
        der_ax(xc()),
        &xc(),
    ));

    // --- mechanical wrappers around every rule fixture ---
    for (_, d) in rule_corpus() {
        let c = d.conclusion.clone();
        if let Some(stoup) = &c.stoup {
            out.push(build::cut1(d.clone(), build::ax(stoup.clone())));
        }
        let first_body = c.body.distinct().next().cloned();
        if let Some(body_f) = first_body {
            out.push(build::cut2(d.clone(), der_ax(body_f.clone()), &body_f));
        }
        let first_ant = c.antecedent.distinct().next().cloned();
        if let Some(ant_f) = first_ant {
            out.push(build::cut1(build::ax(ant_f), d.clone()));
        }
    }

    out
}

// ---------------------------------------------------------------------------
// Random generators
// ---------------------------------------------------------------------------

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

fn random_formula(rng: &mut StdRng, leaves: &[Formula], depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.4) {
        leaves.choose(rng).unwrap().clone()
    } else {
        let a = random_formula(rng, leaves, depth - 1);
        let b = random_formula(rng, leaves, depth - 1);
        match rng.gen_range(0..3) {
            0 => Formula::and(a, b),
            1 => Formula::or(a, b),
            _ => Formula::imp(a, b),
        }
    }
}

pub fn random_classical_formula(rng: &mut StdRng, depth: usize) -> Formula {
    random_formula(rng, &[v("x_c"), v("y_c"), Formula::Bot], depth)
}

pub fn random_intuitionistic_formula(rng: &mut StdRng, depth: usize) -> Formula {
    random_formula(rng, &[v("p"), v("q"), Formula::Zero], depth)
}

/// Grows a random LK proof over the classical alphabet by applying a fixed
/// number of random rule applications to a pool of axioms.
pub fn random_lk(rng: &mut StdRng, steps: usize) -> LkDerivation {
    let mut d = if rng.gen_bool(0.1) {
        lk_build::bot_l()
    } else {
        lk_build::ax(random_classical_formula(rng, 1))
    };
    for _ in 0..steps {
        d = grow_lk(rng, d);
    }
    d
}

fn grow_lk(rng: &mut StdRng, d: LkDerivation) -> LkDerivation {
    let c = d.conclusion.clone();
    let fresh = |rng: &mut StdRng| random_classical_formula(rng, 1);
    match rng.gen_range(0..10) {
        0 => lk_build::w_l(d, fresh(rng)),
        1 => lk_build::w_r(d, fresh(rng)),
        2 => {
            // contract if a duplicate exists, otherwise weaken one in
            match c.left.counts().find(|(_, n)| *n >= 2).map(|(f, _)| f.clone()) {
                Some(f) => lk_build::c_l(d, &f),
                None => {
                    let f = fresh(rng);
                    lk_build::c_l(lk_build::w_l(lk_build::w_l(d, f.clone()), f.clone()), &f)
                }
            }
        }
        3 => match c.right.counts().find(|(_, n)| *n >= 2).map(|(f, _)| f.clone()) {
            Some(f) => lk_build::c_r(d, &f),
            None => {
                let f = fresh(rng);
                lk_build::c_r(lk_build::w_r(lk_build::w_r(d, f.clone()), f.clone()), &f)
            }
        },
        4 => {
            // and_l needs two antecedent formulas
            let mut left: Vec<Formula> = c.left.iter().cloned().collect();
            if left.len() < 2 {
                let f = fresh(rng);
                return lk_build::and_l(
                    lk_build::w_l(lk_build::w_l(d, f.clone()), f.clone()),
                    &Formula::and(f.clone(), f),
                );
            }
            left.shuffle(rng);
            let (a, b) = (left[0].clone(), left[1].clone());
            lk_build::and_l(d, &Formula::and(a, b))
        }
        5 => {
            let other = lk_build::ax(fresh(rng));
            let a = c.right.iter().next().cloned();
            match a {
                Some(a) => {
                    let b = other.conclusion.right.iter().next().unwrap().clone();
                    lk_build::and_r(d, &a, other, &b)
                }
                None => lk_build::w_r(d, fresh(rng)),
            }
        }
        6 => match c.right.iter().next().cloned() {
            Some(a) => {
                if rng.gen_bool(0.5) {
                    lk_build::or_r1(d, &a, fresh(rng))
                } else {
                    lk_build::or_r2(d, fresh(rng), &a)
                }
            }
            None => lk_build::w_r(d, fresh(rng)),
        },
        7 => {
            // or_l via weakened branches
            let a = fresh(rng);
            let b = fresh(rng);
            let left = lk_build::w_l(d.clone(), a.clone());
            let right = lk_build::w_l(d, b.clone());
            lk_build::or_l(left, right, &Formula::or(a, b))
        }
        8 => match (c.left.iter().next().cloned(), c.right.iter().next().cloned()) {
            (Some(a), Some(b)) => lk_build::imp_r(d, &a, &b),
            _ => lk_build::w_l(d, fresh(rng)),
        },
        _ => {
            // cut against a weakened axiom
            match c.right.iter().next().cloned() {
                Some(a) => {
                    let other = lk_build::w_l(lk_build::ax(fresh(rng)), a.clone());
                    lk_build::cut(d, other, &a)
                }
                None => lk_build::w_r(d, fresh(rng)),
            }
        }
    }
}

/// Grows a random LJ proof over the intuitionistic alphabet.
pub fn random_lj(rng: &mut StdRng, steps: usize) -> LjDerivation {
    let mut d = if rng.gen_bool(0.1) {
        lj_build::zero_l(
            [Formula::Zero],
            random_intuitionistic_formula(rng, 1),
        )
    } else {
        lj_build::ax(random_intuitionistic_formula(rng, 1))
    };
    for _ in 0..steps {
        d = grow_lj(rng, d);
    }
    d
}

fn grow_lj(rng: &mut StdRng, d: LjDerivation) -> LjDerivation {
    let c = d.conclusion.clone();
    let fresh = |rng: &mut StdRng| random_intuitionistic_formula(rng, 1);
    match rng.gen_range(0..9) {
        0 => lj_build::w_l(d, fresh(rng)),
        1 => match c.left.counts().find(|(_, n)| *n >= 2).map(|(f, _)| f.clone()) {
            Some(f) => lj_build::c_l(d, &f),
            None => {
                let f = fresh(rng);
                lj_build::c_l(lj_build::w_l(lj_build::w_l(d, f.clone()), f.clone()), &f)
            }
        },
        2 => {
            let mut left: Vec<Formula> = c.left.iter().cloned().collect();
            if left.len() < 2 {
                let f = fresh(rng);
                return lj_build::and_l(
                    lj_build::w_l(lj_build::w_l(d, f.clone()), f.clone()),
                    &Formula::and(f.clone(), f),
                );
            }
            left.shuffle(rng);
            let (a, b) = (left[0].clone(), left[1].clone());
            lj_build::and_l(d, &Formula::and(a, b))
        }
        3 => lj_build::and_r(d, lj_build::ax(fresh(rng))),
        4 => {
            if rng.gen_bool(0.5) {
                lj_build::or_r1(d, fresh(rng))
            } else {
                lj_build::or_r2(d, fresh(rng))
            }
        }
        5 => {
            let a = fresh(rng);
            let b = fresh(rng);
            let left = lj_build::w_l(d.clone(), a.clone());
            let right = lj_build::w_l(d, b.clone());
            lj_build::or_l(left, right, &Formula::or(a, b))
        }
        6 => match c.left.iter().next().cloned() {
            Some(a) => lj_build::imp_r(d, &a),
            None => lj_build::w_l(d, fresh(rng)),
        },
        7 => {
            // imp_l with this proof as the result branch
            match c.left.iter().next().cloned() {
                Some(b) => {
                    let arg = lj_build::ax(fresh(rng));
                    lj_build::imp_l(d, &b, arg)
                }
                None => lj_build::w_l(d, fresh(rng)),
            }
        }
        _ => {
            // cut against a weakened axiom
            let a = c.right.clone();
            let other = lj_build::w_l(lj_build::ax(fresh(rng)), a);
            lj_build::cut(d, other)
        }
    }
}
