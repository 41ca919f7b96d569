//! Ready-made decks and rule specs: the classical 52-card game, the small
//! decks used for exhaustive analysis, and a deliberately degenerate fixture.

use crate::deck::{Card, DeckSpec, OrderedPile, RankSpec};
use crate::rules::{FixtureTable, RelativePlayer, RuleDecision, RuleSpec};

/// Standard 52-card deck: four copies of 2..10, J, Q, K, A with
/// J, Q, K, A charging 1, 2, 3, 4 cards.
pub fn classical_deck() -> DeckSpec {
    let mut ranks: Vec<RankSpec> = (2..=10).map(|v| RankSpec::new(v.to_string(), 4, 0)).collect();
    for (name, penalty) in [("J", 1), ("Q", 2), ("K", 3), ("A", 4)] {
        ranks.push(RankSpec::new(name, 4, penalty));
    }
    DeckSpec::new(ranks)
}

pub fn classical() -> RuleSpec {
    RuleSpec::relative(classical_deck())
}

/// Two cards: `P` (penalty 1) and an ordinary `N`.
pub fn pn() -> RuleSpec {
    RuleSpec::relative(DeckSpec::new(vec![RankSpec::new("P", 1, 1), RankSpec::new("N", 1, 0)]))
}

/// Three cards: `P` (penalty 1) and two ordinary cards `N0`, `N1`.
pub fn mini1() -> RuleSpec {
    RuleSpec::relative(DeckSpec::new(vec![RankSpec::new("P", 1, 1), RankSpec::new("N", 2, 0)]))
}

/// Four cards with two court ranks: `J` (1), `Q` (2) and two ordinary cards.
pub fn two_court4() -> RuleSpec {
    RuleSpec::relative(DeckSpec::new(vec![
        RankSpec::new("J", 1, 1),
        RankSpec::new("Q", 1, 2),
        RankSpec::new("N", 2, 0),
    ]))
}

/// Five cards: two jacks and three ordinary cards.
pub fn jacks5() -> RuleSpec {
    RuleSpec::relative(DeckSpec::new(vec![RankSpec::new("J", 2, 1), RankSpec::new("N", 3, 0)]))
}

/// Six cards with the classical J/Q/K penalties and three ordinary cards.
pub fn courts6() -> RuleSpec {
    RuleSpec::relative(DeckSpec::new(vec![
        RankSpec::new("J", 1, 1),
        RankSpec::new("Q", 1, 2),
        RankSpec::new("K", 1, 3),
        RankSpec::new("N", 3, 0),
    ]))
}

/// Six cards: one ace (4) and a jack (1) among four ordinary cards.
pub fn ace6() -> RuleSpec {
    RuleSpec::relative(DeckSpec::new(vec![
        RankSpec::new("A", 1, 4),
        RankSpec::new("J", 1, 1),
        RankSpec::new("N", 4, 0),
    ]))
}

/// `n` ordinary cards and no penalties: tricks never finish.
pub fn court_free(n: i64) -> RuleSpec {
    RuleSpec::court_free(DeckSpec::new(vec![RankSpec::new("N", n, 0)]))
}

/// Two cards `X`, `Y` and a table in which every one-card pile finishes
/// the trick in the starter's favour. Under either starter the state
/// `([X],[Y])` maps to itself, which violates nondegeneracy.
pub fn stuck() -> RuleSpec {
    let deck = DeckSpec::new(vec![RankSpec::new("X", 1, 0), RankSpec::new("Y", 1, 0)]);
    let mut table = FixtureTable::new();
    for card in [Card::new(0, 0), Card::new(1, 0)] {
        table.insert(&OrderedPile::new(vec![card]), RuleDecision::finish(RelativePlayer::Starter));
    }
    RuleSpec::fixture(deck, table)
}

/// Symmetric rule fixtures on decks of 2 to 6 cards, by name.
pub fn symmetric_suite() -> Vec<(&'static str, RuleSpec)> {
    vec![
        ("pn", pn()),
        ("mini1", mini1()),
        ("two_court4", two_court4()),
        ("jacks5", jacks5()),
        ("courts6", courts6()),
        ("ace6", ace6()),
        ("court_free3", court_free(3)),
    ]
}
