//! Trick rollout and game play.
//!
//! A trick starts with the starter's top card; afterwards the rule function
//! names the next player until it finishes the trick or the player it names
//! has no card left, which ends the game on the spot.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::deck::{is_partition, Card, OrderedPile, Player, Split};
use crate::random::SeedSpec;
use crate::rules::{RelativePlayer, RuleError, RuleSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("state is absorbing: one player has no cards")]
    Absorbing,
    #[error("p must lie strictly inside (0,1), got {0}")]
    InvalidProbability(f64),
    #[error("move cap must be positive")]
    InvalidMoveCap,
    #[error(transparent)]
    Rule(#[from] RuleError),
}

/// Terminal vertex reached when `loser` cannot play mid-trick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SinkId {
    pub loser: Player,
}

/// Where a trick leads: another split or a sink.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Target {
    State(Split),
    Sink(SinkId),
}

impl Target {
    /// Sinks and splits with an empty side end the game.
    pub fn is_absorbing(&self) -> bool {
        match self {
            Target::State(s) => s.is_absorbing(),
            Target::Sink(_) => true,
        }
    }

    pub fn as_state(&self) -> Option<&Split> {
        match self {
            Target::State(s) => Some(s),
            Target::Sink(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TrickKind {
    Taken,
    GameOver,
}

/// One trick played out. `player` is the taker for `Taken` and the player
/// who could not play for `GameOver`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrickResult {
    pub kind: TrickKind,
    pub player: Player,
    pub left_rem: OrderedPile,
    pub right_rem: OrderedPile,
    /// Most recent card first.
    pub table: OrderedPile,
    pub moves: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GameRecord {
    /// `None` when the game hit the move cap.
    pub winner: Option<Player>,
    pub moves: u64,
    pub tricks: u64,
    pub capped: bool,
}

pub(crate) fn absolute(starter: Player, who: RelativePlayer) -> Player {
    match who {
        RelativePlayer::Starter => starter,
        RelativePlayer::Opponent => starter.other(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum TrickEnd {
    Taken(Player),
    GameOver { loser: Player },
}

/// Plays one trick in place. `table` receives the cards in play order
/// (oldest first).
pub(crate) fn play_trick(
    rules: &RuleSpec,
    decks: &mut [VecDeque<Card>; 2],
    starter: Player,
    table: &mut Vec<Card>,
) -> Result<TrickEnd, RuleError> {
    table.clear();
    let mut tracker = rules.tracker();
    let mut next = starter;
    loop {
        let Some(card) = decks[next.index()].pop_front() else {
            return Ok(TrickEnd::GameOver { loser: next });
        };
        table.push(card);
        let decision = tracker.push(card)?;
        let who = absolute(starter, decision.who);
        if decision.is_finish() {
            return Ok(TrickEnd::Taken(who));
        }
        next = who;
    }
}

pub(crate) fn decks_of(state: &Split) -> [VecDeque<Card>; 2] {
    [state.left.iter().copied().collect(), state.right.iter().copied().collect()]
}

pub(crate) fn split_of(decks: &[VecDeque<Card>; 2]) -> Split {
    Split::new(decks[0].iter().copied().collect::<OrderedPile>(), decks[1].iter().copied().collect::<OrderedPile>())
}

pub(crate) fn check_probability(p: f64) -> Result<(), EngineError> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(EngineError::InvalidProbability(p))
    }
}

/// Plays the trick started by `starter` from a non-absorbing state.
pub fn rollout(rules: &RuleSpec, state: &Split, starter: Player) -> Result<TrickResult, EngineError> {
    if state.is_absorbing() {
        return Err(EngineError::Absorbing);
    }
    let mut decks = decks_of(state);
    let mut table = Vec::new();
    let end = play_trick(rules, &mut decks, starter, &mut table)?;
    let (kind, player) = match end {
        TrickEnd::Taken(w) => (TrickKind::Taken, w),
        TrickEnd::GameOver { loser } => (TrickKind::GameOver, loser),
    };
    let result = TrickResult {
        kind,
        player,
        left_rem: decks[0].iter().copied().collect(),
        right_rem: decks[1].iter().copied().collect(),
        moves: table.len(),
        table: OrderedPile::new(table).reversed(),
    };
    debug_assert!(is_partition(rules.deck(), &[&result.left_rem, &result.right_rem, &result.table]));
    Ok(result)
}

/// Applies a trick with a chosen reordering of the taken pile. `permute`
/// receives the pile top-first; leaving it untouched gives the canonical
/// successor.
pub fn step_with(
    rules: &RuleSpec,
    state: &Split,
    starter: Player,
    permute: impl FnOnce(&mut [Card]),
) -> Result<(Target, usize), EngineError> {
    let trick = rollout(rules, state, starter)?;
    let moves = trick.moves;
    let target = match trick.kind {
        TrickKind::GameOver => Target::Sink(SinkId { loser: trick.player }),
        TrickKind::Taken => {
            let mut pile = trick.table.into_vec();
            permute(&mut pile);
            let pile = OrderedPile::new(pile);
            let (left, right) = match trick.player {
                Player::One => (trick.left_rem.concat(&pile), trick.right_rem),
                Player::Two => (trick.left_rem, trick.right_rem.concat(&pile)),
            };
            let next = Split::new(left, right);
            debug_assert!(next.is_partition_of(rules.deck()));
            Target::State(next)
        }
    };
    Ok((target, moves))
}

/// `(L_0, R_0)^i`: the taken pile goes under the winner's deck unshuffled,
/// most recent card first, so the first card played ends up at the bottom.
pub fn canonical_successor(rules: &RuleSpec, state: &Split, starter: Player) -> Result<Target, EngineError> {
    step_with(rules, state, starter, |_| {}).map(|(t, _)| t)
}

/// One step of the randomized game: player one starts with probability `p`
/// and the taken pile is shuffled before it goes under the winner's deck.
pub fn step_stochastic(
    rules: &RuleSpec,
    state: &Split,
    p: f64,
    seed: SeedSpec,
) -> Result<(Target, usize), EngineError> {
    step_stochastic_with(rules, state, p, &mut seed.rng())
}

pub fn step_stochastic_with<R: Rng + ?Sized>(
    rules: &RuleSpec,
    state: &Split,
    p: f64,
    rng: &mut R,
) -> Result<(Target, usize), EngineError> {
    check_probability(p)?;
    let starter = if rng.random_bool(p) { Player::One } else { Player::Two };
    step_with(rules, state, starter, |pile| pile.shuffle(rng))
}

/// Plays the randomized game from `deal` until someone loses or `move_cap`
/// cards have been placed.
pub fn play_game(
    rules: &RuleSpec,
    deal: &Split,
    p: f64,
    seed: SeedSpec,
    move_cap: u64,
) -> Result<GameRecord, EngineError> {
    play_game_with(rules, deal, p, &mut seed.rng(), move_cap)
}

pub fn play_game_with<R: Rng + ?Sized>(
    rules: &RuleSpec,
    deal: &Split,
    p: f64,
    rng: &mut R,
    move_cap: u64,
) -> Result<GameRecord, EngineError> {
    check_probability(p)?;
    if move_cap == 0 {
        return Err(EngineError::InvalidMoveCap);
    }
    let total = deal.left.len() + deal.right.len();
    let mut decks = decks_of(deal);
    let mut table = Vec::with_capacity(total);
    let mut moves = 0u64;
    let mut tricks = 0u64;
    loop {
        if decks[0].is_empty() {
            return Ok(GameRecord { winner: Some(Player::Two), moves, tricks, capped: false });
        }
        if decks[1].is_empty() {
            return Ok(GameRecord { winner: Some(Player::One), moves, tricks, capped: false });
        }
        if moves >= move_cap {
            return Ok(GameRecord { winner: None, moves: move_cap, tricks, capped: true });
        }
        let starter = if rng.random_bool(p) { Player::One } else { Player::Two };
        let end = play_trick(rules, &mut decks, starter, &mut table)?;
        moves += table.len() as u64;
        tricks += 1;
        match end {
            TrickEnd::Taken(winner) => {
                table.shuffle(rng);
                decks[winner.index()].extend(table.iter().copied());
            }
            TrickEnd::GameOver { loser } => {
                return Ok(GameRecord { winner: Some(loser.other()), moves, tricks, capped: false });
            }
        }
        debug_assert_eq!(decks[0].len() + decks[1].len(), total);
    }
}
