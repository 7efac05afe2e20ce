//! Data-parallel sweep helpers.
//!
//! The exhaustive agreement suites check every formula up to a symbol bound.
//! Queries are independent, so the sweeps parallelize over chunks of
//! formulas; each chunk runs one prover whose memo table is shared by every
//! query in the chunk, which is where most of the speedup comes from
//! (neighboring formulas share almost all their subgoals). With the
//! `parallel` feature (default) chunks run on rayon; without it the same
//! API runs sequentially over a single chunk. `*_seq` variants are always
//! sequential, for baseline comparisons.

use crate::embeddings::LjSequent;
use crate::formula::{Formula, Policy};
use crate::multiset::Multiset;
use crate::oracle::{self, LjProver, Prover, SearchConfig};
use crate::{Derivation, PSequent};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Applies `f` to every item, in parallel when the `parallel` feature is on.
pub fn map_collect<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Sequential twin of [`map_collect`].
pub fn map_collect_seq<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

/// Splits the items into chunks, runs `per_chunk` on each (in parallel when
/// enabled), and concatenates the results in order. `per_chunk` typically
/// builds one prover and reuses its memo across the chunk.
pub fn chunked_flat_map<T, R, F>(items: &[T], per_chunk: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&[T]) -> Vec<R> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        let chunks = rayon::current_num_threads().max(1) * 4;
        let chunk_size = items.len().div_ceil(chunks).max(1);
        items
            .par_chunks(chunk_size)
            .flat_map_iter(|c| per_chunk(c))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        per_chunk(items)
    }
}

/// Outcome of an agreement sweep between two decision procedures.
#[derive(Clone, Debug, Default)]
pub struct AgreementReport {
    pub total: usize,
    pub provable: usize,
    pub disagreements: Vec<Formula>,
}

impl AgreementReport {
    pub fn agrees(&self) -> bool {
        self.disagreements.is_empty()
    }

    fn from_outcomes(formulas: Vec<Formula>, outcomes: Vec<(bool, bool)>) -> Self {
        let mut report = AgreementReport {
            total: formulas.len(),
            ..Default::default()
        };
        for (f, (a, b)) in formulas.into_iter().zip(outcomes) {
            if a {
                report.provable += 1;
            }
            if a != b {
                report.disagreements.push(f);
            }
        }
        report
    }
}

fn classical_outcomes(chunk: &[Formula], cfg: SearchConfig) -> Vec<(bool, bool)> {
    let mut prover = Prover::new(Policy::ClassicalVars, cfg);
    chunk
        .iter()
        .map(|f| {
            let goal = PSequent::new([], [f.clone()], None);
            let found = prover.prove(&goal).is_some();
            let valid = oracle::classical_valid(f).expect("classical alphabet");
            (found, valid)
        })
        .collect()
}

fn lj_outcomes(chunk: &[Formula], cfg: SearchConfig) -> Vec<(bool, bool)> {
    let mut prover = Prover::new(Policy::BotOnly, cfg);
    let mut lj = LjProver::new(cfg);
    chunk
        .iter()
        .map(|f| {
            let goal = PSequent::new([], [], Some(f.clone()));
            let mixed = prover.prove(&goal).is_some();
            let in_lj = lj
                .prove(&LjSequent {
                    left: Multiset::new(),
                    right: f.clone(),
                })
                .is_some();
            (mixed, in_lj)
        })
        .collect()
}

fn classical_alphabet() -> [Formula; 3] {
    [Formula::var("x_c"), Formula::var("y_c"), Formula::Bot]
}

fn intuitionistic_alphabet() -> [Formula; 3] {
    [Formula::var("p"), Formula::var("q"), Formula::Zero]
}

/// Sweeps all formulas over `x_c`, `y_c`, `bot` up to `max_len` symbols,
/// comparing bounded derivability of `|- F ;` under the classical-variables
/// policy against truth-table validity.
pub fn classical_agreement(max_len: usize, cfg: SearchConfig) -> AgreementReport {
    let formulas = oracle::enumerate_formulas(&classical_alphabet(), max_len);
    let outcomes = chunked_flat_map(&formulas, |c| classical_outcomes(c, cfg));
    AgreementReport::from_outcomes(formulas, outcomes)
}

/// Sequential twin of [`classical_agreement`].
pub fn classical_agreement_seq(max_len: usize, cfg: SearchConfig) -> AgreementReport {
    let formulas = oracle::enumerate_formulas(&classical_alphabet(), max_len);
    let outcomes = classical_outcomes(&formulas, cfg);
    AgreementReport::from_outcomes(formulas, outcomes)
}

/// Sweeps all formulas over `p`, `q`, `0` up to `max_len` symbols, comparing
/// bounded stoup derivability under the bot-only policy against bounded LJ
/// derivability.
pub fn lj_agreement(max_len: usize, cfg: SearchConfig) -> AgreementReport {
    let formulas = oracle::enumerate_formulas(&intuitionistic_alphabet(), max_len);
    let outcomes = chunked_flat_map(&formulas, |c| lj_outcomes(c, cfg));
    AgreementReport::from_outcomes(formulas, outcomes)
}

/// Sequential twin of [`lj_agreement`].
pub fn lj_agreement_seq(max_len: usize, cfg: SearchConfig) -> AgreementReport {
    let formulas = oracle::enumerate_formulas(&intuitionistic_alphabet(), max_len);
    let outcomes = lj_outcomes(&formulas, cfg);
    AgreementReport::from_outcomes(formulas, outcomes)
}

/// Checks a batch of derivations under one policy, in parallel when enabled.
pub fn check_all(proofs: &[Derivation], policy: &Policy) -> Vec<crate::CheckReport> {
    map_collect(proofs, |d| crate::check_derivation(d, policy))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sweeps_agree() {
        let cfg = SearchConfig::new(9, 2);
        let classical = classical_agreement(3, cfg);
        assert!(classical.agrees(), "{:?}", classical.disagreements);
        assert_eq!(classical.total, 30);
        let lj = lj_agreement(3, cfg);
        assert!(lj.agrees(), "{:?}", lj.disagreements);
        assert_eq!(lj.total, 30);
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let cfg = SearchConfig::new(8, 2);
        let a = classical_agreement(3, cfg);
        let b = classical_agreement_seq(3, cfg);
        assert_eq!(a.provable, b.provable);
        assert_eq!(a.disagreements, b.disagreements);
    }
}
