//! Monte-Carlo replicas of the randomized game.
//!
//! Replica `i` draws its deal and its game from stream `i` of the master
//! seed. Per-replica results are folded into integer sums, so the reduction
//! is exact and the statistics do not depend on how rayon schedules work.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::deck::{DeckError, Player, Split};
use crate::engine::{check_probability, play_game_with, EngineError, GameRecord};
use crate::random::{deal_with, SeedSpec};
use crate::rules::RuleSpec;

/// Default move cap for randomized games.
pub const DEFAULT_MOVE_CAP: u64 = 10_000_000;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum SimulateError {
    #[error("at least one game is required")]
    NoGames,
    #[error("bucket width must be positive")]
    BucketWidth,
    #[error(transparent)]
    Deck(#[from] DeckError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McStats {
    pub games: u64,
    pub terminated: u64,
    pub capped: u64,
    pub mean_moves: f64,
    pub stderr_moves: f64,
    pub max_moves: u64,
    pub mean_tricks: f64,
    /// Wins of player one and player two.
    pub wins: [u64; 2],
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    games: u64,
    capped: u64,
    sum: u128,
    sum_sq: u128,
    max: u64,
    tricks: u128,
    wins: [u64; 2],
}

impl Moments {
    fn of(record: &GameRecord) -> Self {
        let m = record.moves as u128;
        let mut wins = [0, 0];
        if let Some(w) = record.winner {
            wins[w.index()] = 1;
        }
        Moments {
            games: 1,
            capped: record.capped as u64,
            sum: m,
            sum_sq: m * m,
            max: record.moves,
            tricks: record.tricks as u128,
            wins,
        }
    }

    fn merge(self, o: Moments) -> Moments {
        Moments {
            games: self.games + o.games,
            capped: self.capped + o.capped,
            sum: self.sum + o.sum,
            sum_sq: self.sum_sq + o.sum_sq,
            max: self.max.max(o.max),
            tricks: self.tricks + o.tricks,
            wins: [self.wins[0] + o.wins[0], self.wins[1] + o.wins[1]],
        }
    }

    fn stats(&self) -> McStats {
        let g = self.games as f64;
        // g * Σx² - (Σx)² is exact in integers.
        let spread = self.games as u128 * self.sum_sq - self.sum * self.sum;
        let variance = if self.games > 1 { spread as f64 / (g * (g - 1.0)) } else { 0.0 };
        McStats {
            games: self.games,
            terminated: self.games - self.capped,
            capped: self.capped,
            mean_moves: self.sum as f64 / g,
            stderr_moves: (variance / g).sqrt(),
            max_moves: self.max,
            mean_tricks: self.tricks as f64 / g,
            wins: self.wins,
        }
    }
}

/// Plays replica `index`: a fresh uniform deal and one randomized game, both
/// drawn from stream `index` of `master_seed`.
pub fn replica(
    rules: &RuleSpec,
    left_size: usize,
    p: f64,
    master_seed: u64,
    index: u64,
    move_cap: u64,
) -> Result<GameRecord, SimulateError> {
    let mut rng = SeedSpec::new(master_seed, index).rng();
    let deal = deal_with(rules.deck(), left_size, &mut rng)?;
    Ok(play_game_with(rules, &deal, p, &mut rng, move_cap)?)
}

fn check_inputs(rules: &RuleSpec, left_size: usize, p: f64, games: u64) -> Result<(), SimulateError> {
    if games == 0 {
        return Err(SimulateError::NoGames);
    }
    check_probability(p)?;
    let n = rules.deck().len();
    if left_size > n {
        return Err(DeckError::LeftSizeOutOfRange { left_size, cards: n }.into());
    }
    Ok(())
}

/// Runs `games` independent replicas and summarizes game lengths.
pub fn monte_carlo(
    rules: &RuleSpec,
    left_size: usize,
    p: f64,
    games: u64,
    master_seed: u64,
    move_cap: u64,
) -> Result<McStats, SimulateError> {
    check_inputs(rules, left_size, p, games)?;
    reduce(games, |i| replica(rules, left_size, p, master_seed, i, move_cap))
}

/// Like [`monte_carlo`], but every replica starts from `start` instead of a
/// random deal.
pub fn monte_carlo_from(
    rules: &RuleSpec,
    start: &Split,
    p: f64,
    games: u64,
    master_seed: u64,
    move_cap: u64,
) -> Result<McStats, SimulateError> {
    check_inputs(rules, start.left.len(), p, games)?;
    if !start.is_partition_of(rules.deck()) {
        return Err(DeckError::NotAPartition(start.encode(rules.deck())).into());
    }
    reduce(games, |i| {
        let mut rng = SeedSpec::new(master_seed, i).rng();
        Ok(play_game_with(rules, start, p, &mut rng, move_cap)?)
    })
}

fn reduce<F>(games: u64, play: F) -> Result<McStats, SimulateError>
where
    F: Fn(u64) -> Result<GameRecord, SimulateError> + Sync,
{
    let total = (0..games)
        .into_par_iter()
        .map(|i| play(i).map(|r| Moments::of(&r)))
        .try_reduce(Moments::default, |a, b| Ok(a.merge(b)))?;
    Ok(total.stats())
}

/// Game-length histogram: `(bucket start, count)` pairs with buckets of
/// `bucket_width` moves, in increasing order.
pub fn histogram(
    rules: &RuleSpec,
    left_size: usize,
    p: f64,
    games: u64,
    master_seed: u64,
    bucket_width: u64,
    move_cap: u64,
) -> Result<Vec<(u64, u64)>, SimulateError> {
    check_inputs(rules, left_size, p, games)?;
    if bucket_width == 0 {
        return Err(SimulateError::BucketWidth);
    }
    let counts = (0..games)
        .into_par_iter()
        .map(|i| {
            let r = replica(rules, left_size, p, master_seed, i, move_cap)?;
            Ok::<_, SimulateError>(BTreeMap::from([(r.moves / bucket_width * bucket_width, 1u64)]))
        })
        .try_reduce(BTreeMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            Ok(a)
        })?;
    Ok(counts.into_iter().collect())
}

/// Win share of `player` in a stats block.
pub fn win_rate(stats: &McStats, player: Player) -> f64 {
    stats.wins[player.index()] as f64 / stats.games as f64
}
