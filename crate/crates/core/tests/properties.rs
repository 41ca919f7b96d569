use bmn_core::deck::SplitIndexer;
use bmn_core::engine::step_with;
use bmn_core::graph::{support_successors, Node};
use bmn_core::rules::Tracker;
use bmn_core::*;
use proptest::prelude::*;

fn rule_sets() -> Vec<RuleSpec> {
    vec![fixtures::mini1(), fixtures::two_court4(), fixtures::jacks5(), fixtures::courts6(), fixtures::ace6()]
}

/// A rule preset together with a non-absorbing split of its deck.
fn rules_and_split() -> impl Strategy<Value = (RuleSpec, Split)> {
    (0..rule_sets().len()).prop_flat_map(|i| {
        let rules = rule_sets().swap_remove(i);
        let cards = rules.deck().cards();
        let n = cards.len();
        (Just(rules), Just(cards).prop_shuffle(), 1..n).prop_map(|(rules, cards, cut)| {
            let split = Split::new(cards[..cut].to_vec(), cards[cut..].to_vec());
            (rules, split)
        })
    })
}

fn player() -> impl Strategy<Value = Player> {
    prop_oneof![Just(Player::One), Just(Player::Two)]
}

fn mirror(s: &Split) -> Split {
    Split::new(s.right.clone(), s.left.clone())
}

fn mirror_target(t: &Target) -> Target {
    match t {
        Target::State(s) => Target::State(mirror(s)),
        Target::Sink(SinkId { loser }) => Target::Sink(SinkId { loser: loser.other() }),
    }
}

proptest! {
    #[test]
    fn trick_conserves_cards((rules, split) in rules_and_split(), starter in player()) {
        let r = rollout(&rules, &split, starter).unwrap();
        let mut all: Vec<Card> = r.left_rem.iter().chain(r.right_rem.iter()).chain(r.table.iter()).copied().collect();
        all.sort();
        let mut deck = rules.deck().cards();
        deck.sort();
        prop_assert_eq!(all, deck);
        prop_assert_eq!(r.moves, r.table.len());
    }

    #[test]
    fn rules_are_symmetric_under_relabelling((rules, split) in rules_and_split(), starter in player()) {
        let a = canonical_successor(&rules, &split, starter).unwrap();
        let b = canonical_successor(&rules, &mirror(&split), starter.other()).unwrap();
        prop_assert_eq!(mirror_target(&a), b);
    }

    #[test]
    fn identity_reordering_is_the_canonical_successor((rules, split) in rules_and_split(), starter in player()) {
        let (t, moves) = step_with(&rules, &split, starter, |_| {}).unwrap();
        prop_assert_eq!(&t, &canonical_successor(&rules, &split, starter).unwrap());
        prop_assert_eq!(moves, rollout(&rules, &split, starter).unwrap().moves);
    }

    #[test]
    fn predecessor_inverts_the_successor((rules, split) in rules_and_split(), starter in player()) {
        let r = rollout(&rules, &split, starter).unwrap();
        if let Target::State(next) = canonical_successor(&rules, &split, starter).unwrap() {
            prop_assume!(!next.is_absorbing());
            let pred = reconstruct_predecessor(&rules, &next, r.player).unwrap();
            prop_assert_eq!(pred.split, split);
            prop_assert_eq!(pred.starter, starter);
            prop_assert_eq!(pred.trick_length, r.moves);
        }
    }

    #[test]
    fn canonical_edges_lie_in_the_support((rules, split) in rules_and_split(), starter in player()) {
        let indexer = SplitIndexer::new(rules.deck()).unwrap();
        let support = support_successors(&rules, &indexer, &split).unwrap();
        let node = match canonical_successor(&rules, &split, starter).unwrap() {
            Target::State(s) => Node::State(indexer.index(&s)),
            Target::Sink(SinkId { loser }) => Node::Sink(loser),
        };
        prop_assert!(support.contains(&node));
    }

    #[test]
    fn stochastic_steps_stay_in_the_support((rules, split) in rules_and_split(), seed in any::<u64>()) {
        let indexer = SplitIndexer::new(rules.deck()).unwrap();
        let support = support_successors(&rules, &indexer, &split).unwrap();
        let (t, _) = step_stochastic(&rules, &split, 0.5, SeedSpec::new(seed, 0)).unwrap();
        let node = match t {
            Target::State(s) => Node::State(indexer.index(&s)),
            Target::Sink(SinkId { loser }) => Node::Sink(loser),
        };
        prop_assert!(support.contains(&node));
    }

    #[test]
    fn evaluate_agrees_with_every_prefix(cards in Just(fixtures::classical_deck().cards()).prop_shuffle()) {
        let rules = fixtures::classical();
        let mut tracker: Tracker = rules.tracker();
        for k in 1..=cards.len() {
            let decision = tracker.push(cards[k - 1]).unwrap();
            let pile = OrderedPile::new(cards[..k].iter().rev().copied().collect());
            prop_assert_eq!(evaluate(&rules, &pile).unwrap(), decision);
            let owners = annotate(&rules, &pile).unwrap().owners;
            prop_assert_eq!(owners.len(), k);
            if decision.is_finish() {
                break;
            }
        }
    }

    #[test]
    fn games_are_reproducible((rules, split) in rules_and_split(), seed in any::<u64>(), p in 0.05f64..0.95) {
        let a = play_game(&rules, &split, p, SeedSpec::new(seed, 3), 1_000_000).unwrap();
        let b = play_game(&rules, &split, p, SeedSpec::new(seed, 3), 1_000_000).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn split_encoding_round_trips((rules, split) in rules_and_split()) {
        let text = split.encode(rules.deck());
        prop_assert_eq!(Split::decode(rules.deck(), &text).unwrap(), split);
    }

    #[test]
    fn shuffle_keeps_the_cards(cards in Just(fixtures::classical_deck().cards()).prop_shuffle(), seed in any::<u64>()) {
        let pile = OrderedPile::new(cards.clone());
        let mut out = shuffle_pile(&pile, SeedSpec::new(seed, 0)).into_vec();
        let mut sorted = cards;
        out.sort();
        sorted.sort();
        prop_assert_eq!(out, sorted);
    }
}
