//! Cross-checks against independent brute-force computations and
//! statistical tests of the random primitives.

use std::collections::HashMap;

use bmn_core::chain::{expected_moves_with, SolverChoice};
use bmn_core::deck::{split_count, SplitIndexer};
use bmn_core::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// A self-contained model of the classical payment rules over card ids,
/// sharing nothing with the library except the per-card penalties.
struct Brute {
    penalty: Vec<u32>,
}

enum BruteTrick {
    Over { moves: usize },
    Taken { winner: usize, rest: [Vec<usize>; 2], table: Vec<usize> },
}

impl Brute {
    fn trick(&self, decks: &[Vec<usize>; 2], starter: usize) -> BruteTrick {
        let mut rest = decks.clone();
        let mut table = Vec::new();
        let (mut cur, mut debt, mut last_court) = (starter, 0u32, starter);
        loop {
            if rest[cur].is_empty() {
                return BruteTrick::Over { moves: table.len() };
            }
            let card = rest[cur].remove(0);
            table.push(card);
            let k = self.penalty[card];
            if k > 0 {
                debt = k;
                last_court = cur;
                cur = 1 - cur;
            } else if debt > 0 {
                debt -= 1;
                if debt == 0 {
                    return BruteTrick::Taken { winner: last_court, rest, table };
                }
            } else {
                cur = 1 - cur;
            }
        }
    }

    /// Expected moves for every split, by value iteration over a hash map.
    fn expectations(&self, n: usize, p: f64) -> HashMap<[Vec<usize>; 2], f64> {
        let mut states = Vec::new();
        for perm in permutations(&(0..n).collect::<Vec<_>>()) {
            for cut in 1..n {
                states.push([perm[..cut].to_vec(), perm[cut..].to_vec()]);
            }
        }
        let mut value: HashMap<[Vec<usize>; 2], f64> = states.iter().map(|s| (s.clone(), 0.0)).collect();
        for _ in 0..1_000_000 {
            let mut delta: f64 = 0.0;
            let mut next = value.clone();
            for s in &states {
                let mut v = 0.0;
                for (starter, w) in [(0, p), (1, 1.0 - p)] {
                    match self.trick(s, starter) {
                        BruteTrick::Over { moves } => v += w * moves as f64,
                        BruteTrick::Taken { winner, rest, table } => {
                            let perms = permutations(&table);
                            let mut acc = 0.0;
                            for order in &perms {
                                let mut d = rest.clone();
                                d[winner].extend(order);
                                acc += if d[1 - winner].is_empty() { 0.0 } else { value[&d] };
                            }
                            v += w * (table.len() as f64 + acc / perms.len() as f64);
                        }
                    }
                }
                delta = delta.max((v - value[s]).abs());
                next.insert(s.clone(), v);
            }
            value = next;
            if delta < 1e-12 {
                return value;
            }
        }
        panic!("value iteration did not converge");
    }
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, x);
            out.push(tail);
        }
    }
    out
}

#[test]
fn exact_solver_matches_value_iteration() {
    for rules in [fixtures::pn(), fixtures::mini1(), fixtures::two_court4(), fixtures::jacks5()] {
        let deck = rules.deck();
        let cards = deck.cards();
        let brute = Brute { penalty: cards.iter().map(|&c| deck.penalty(c)).collect() };
        for p in [0.3, 0.5, 0.7] {
            let oracle = brute.expectations(cards.len(), p);
            let table = expected_moves(&rules, p).unwrap();
            assert!(table.diagnostics.relative_residual <= 1e-9);
            for (ids, expect) in &oracle {
                let split = Split::new(
                    ids[0].iter().map(|&i| cards[i]).collect::<Vec<_>>(),
                    ids[1].iter().map(|&i| cards[i]).collect::<Vec<_>>(),
                );
                let got = table.value(&split);
                assert!((got - expect).abs() <= 1e-9 * expect.max(1.0), "{split:?}: {got} vs {expect}");
            }
        }
    }
}

#[test]
fn dense_and_iterative_solvers_agree() {
    let rules = fixtures::courts6();
    let it = expected_moves_with(&rules, 0.4, SolverChoice::Iterative).unwrap();
    assert!(it.diagnostics.relative_residual <= 1e-9);
    let rules = fixtures::two_court4();
    let dense = expected_moves_with(&rules, 0.4, SolverChoice::Dense).unwrap();
    let iter = expected_moves_with(&rules, 0.4, SolverChoice::Iterative).unwrap();
    for ((s, a), (_, b)) in dense.iter().zip(iter.iter()) {
        assert!((a - b).abs() < 1e-8, "{s:?}");
    }
}

#[test]
fn split_counts_are_factorials() {
    for n in 1..=6 {
        let rules = fixtures::court_free(n);
        let splits = enumerate_splits(rules.deck()).unwrap();
        let expect: u128 = (1..=n as u128 + 1).product();
        assert_eq!(splits.len() as u128, expect);
        assert_eq!(split_count(n as usize), Some(expect));
        assert_eq!(SplitIndexer::new(rules.deck()).unwrap().len() as u128, expect);
    }
}

fn chi_square_uniform(counts: &HashMap<Vec<Card>, u64>, categories: usize, draws: u64) {
    assert_eq!(counts.len(), categories);
    let expect = draws as f64 / categories as f64;
    let stat: f64 = counts.values().map(|&c| (c as f64 - expect).powi(2) / expect).sum();
    let critical = ChiSquared::new((categories - 1) as f64).unwrap().inverse_cdf(0.999);
    assert!(stat < critical, "chi-square {stat} above {critical}");
}

#[test]
fn shuffle_is_uniform() {
    let deck = fixtures::jacks5().deck().clone();
    let pile: OrderedPile = deck.cards().into_iter().take(3).collect();
    let mut counts = HashMap::new();
    for i in 0..60_000 {
        let out = shuffle_pile(&pile, SeedSpec::new(99, i));
        *counts.entry(out.into_vec()).or_insert(0u64) += 1;
    }
    chi_square_uniform(&counts, 6, 60_000);
}

#[test]
fn deal_is_uniform() {
    for (rules, left, categories) in
        [(fixtures::pn(), 1, 2), (fixtures::mini1(), 1, 6), (fixtures::two_court4(), 2, 24)]
    {
        let mut counts = HashMap::new();
        let draws = 24_000;
        for i in 0..draws {
            let s = deal(rules.deck(), left, SeedSpec::new(5, i)).unwrap();
            assert_eq!(s.left.len(), left);
            let key: Vec<Card> = s.left.iter().chain(s.right.iter()).copied().collect();
            *counts.entry(key).or_insert(0u64) += 1;
        }
        chi_square_uniform(&counts, categories, draws);
    }
}

#[test]
fn monte_carlo_brackets_the_exact_value() {
    for rules in [fixtures::mini1(), fixtures::jacks5()] {
        let left = rules.deck().len() / 2;
        let exact = deal_expectation(&rules, 0.5, left).unwrap();
        let mc = monte_carlo(&rules, left, 0.5, 20_000, 8, 1_000_000).unwrap();
        assert!((mc.mean_moves - exact).abs() <= 3.0 * mc.stderr_moves, "{} vs {exact}", mc.mean_moves);
    }
}

#[test]
fn published_infinite_deal_cycles_only_with_played_pickup() {
    // The first known non-terminating deal under the standard rules; '-' is a
    // non-court card, and which ones is irrelevant to the play.
    let rules = fixtures::classical();
    let mut copies = HashMap::<u8, u8>::new();
    let mut plain = 0u8;
    let mut cards = |s: &str| -> Vec<Card> {
        s.chars()
            .map(|c| {
                let rank = match c {
                    'J' => 9,
                    'Q' => 10,
                    'K' => 11,
                    'A' => 12,
                    _ => {
                        plain += 1;
                        (plain - 1) / 4
                    }
                };
                let copy = copies.entry(rank).or_insert(0);
                *copy += 1;
                Card { rank, copy: *copy - 1 }
            })
            .collect()
    };
    let deal = Split::new(cards("---K---Q-KQAJ-----AAJ--J--"), cards("----------Q----KQ-J-----KA"));
    assert!(deal.is_partition_of(rules.deck()));

    let out = play_deterministic(&rules, &deal, DeterministicConfig::with_pickup(PickupOrder::Played)).unwrap();
    assert_eq!(out.kind, cycles::OutcomeKind::Cycle);
    assert_eq!(out.preperiod, Some(4));
    let period = out.period.unwrap();
    let witness = out.witness_state.unwrap();
    assert_eq!(cycles::verify_witness(&rules, &witness, period, PickupOrder::Played).unwrap(), out.period_moves);

    let out = play_deterministic(&rules, &deal, DeterministicConfig::with_pickup(PickupOrder::ReversePlayed)).unwrap();
    assert_eq!(out.kind, cycles::OutcomeKind::Terminated);
}
