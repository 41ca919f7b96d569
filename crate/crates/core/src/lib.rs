//! Generalized Beggar-my-neighbour games.
//!
//! The crate models two-player games in which players lay cards from the top
//! of their decks onto a shared pile and a rule function decides, from the
//! pile alone, who lays the next card or who takes the pile. On top of the
//! rule machine and trick engine it builds the finite state graph of a small
//! deck, verifies that the randomized game (random starter, shuffled pile)
//! is absorbing, computes exact expected game lengths, runs Monte-Carlo
//! replicas, and searches for non-terminating deals of the deterministic
//! classical game.
//!
//! Modules, bottom-up:
//! - [`deck`]: cards, piles, splits and their enumeration.
//! - [`random`]: seeded streams, shuffles and deals.
//! - [`rules`]: the rule function and its payment machine.
//! - [`engine`]: tricks, successors and full games.
//! - [`graph`]: the canonical subgraph, predecessor reconstruction and
//!   absorption checks.
//! - [`chain`]: transition rows and expected moves to absorption.
//! - [`simulate`]: Monte-Carlo statistics.
//! - [`cycles`]: the deterministic game and cycle search.

pub mod chain;
pub mod cycles;
pub mod deck;
pub mod engine;
pub mod fixtures;
pub mod graph;
pub mod random;
pub mod rules;
pub mod simulate;

pub use chain::{deal_expectation, expected_moves, transitions, ExpectationTable, TransitionRow};
pub use cycles::{play_deterministic, search_cycles, CycleOutcome, DeterministicConfig, PickupOrder};
pub use deck::{enumerate_splits, Card, DeckSpec, OrderedPile, Player, RankSpec, Split};
pub use engine::{canonical_successor, play_game, rollout, step_stochastic, GameRecord, SinkId, Target, TrickResult};
pub use graph::{build_g0, check_absorbing, check_nondegeneracy, reconstruct_predecessor, verify_lemma, StateGraph};
pub use random::{deal, shuffle_pile, SeedSpec};
pub use rules::{annotate, evaluate, validate, RelativePlayer, RuleDecision, RuleSpec};
pub use simulate::{histogram, monte_carlo, monte_carlo_from, McStats};
