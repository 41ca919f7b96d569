//! The classical deterministic game: no shuffling, the trick winner leads
//! the next trick. Non-terminating deals are found with Brent's cycle
//! detection over trick-boundary positions.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::deck::{Card, DeckError, Player, Split};
use crate::engine::{decks_of, play_trick, rollout, split_of, EngineError, TrickEnd, TrickKind};
use crate::random::{deal_with, SeedSpec};
use crate::rules::RuleSpec;

/// How a taken trick goes under the winner's deck.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PickupOrder {
    /// The first card played ends up highest in the collected packet.
    #[default]
    Played,
    /// The most recent card ends up highest.
    ReversePlayed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeaderRule {
    #[default]
    TrickWinner,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeterministicConfig {
    pub pickup_order: PickupOrder,
    pub leader_rule: LeaderRule,
    pub first_leader: Player,
}

impl Default for DeterministicConfig {
    fn default() -> Self {
        DeterministicConfig {
            pickup_order: PickupOrder::Played,
            leader_rule: LeaderRule::TrickWinner,
            first_leader: Player::One,
        }
    }
}

impl DeterministicConfig {
    pub fn with_pickup(pickup_order: PickupOrder) -> Self {
        DeterministicConfig { pickup_order, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeKind {
    Terminated,
    Cycle,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CycleOutcome {
    pub kind: OutcomeKind,
    pub winner: Option<Player>,
    /// Moves until the game ends, or until the trajectory first returns to
    /// the witness position.
    pub moves: u64,
    pub tricks: u64,
    pub preperiod: Option<u64>,
    pub period: Option<u64>,
    pub period_moves: Option<u64>,
    /// `"<split encoding>@<leader>"` at cycle entry.
    pub witness_state: Option<String>,
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum CycleError {
    #[error("at least one deal is required")]
    NoDeals,
    #[error("bad witness encoding {0:?}")]
    BadWitness(String),
    #[error("cycle witness {witness} failed replay verification")]
    Unverified { witness: String },
    #[error(transparent)]
    Deck(#[from] DeckError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

impl From<crate::rules::RuleError> for CycleError {
    fn from(e: crate::rules::RuleError) -> Self {
        CycleError::Engine(e.into())
    }
}

/// Decks plus the player who leads the next trick.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Position {
    decks: [VecDeque<Card>; 2],
    leader: Player,
}

enum Advance {
    Trick(u64),
    Over { winner: Player, moves: u64 },
}

struct Walker<'a> {
    rules: &'a RuleSpec,
    order: PickupOrder,
    table: Vec<Card>,
}

impl Walker<'_> {
    fn advance(&mut self, pos: &mut Position) -> Result<Advance, CycleError> {
        for p in Player::BOTH {
            if pos.decks[p.index()].is_empty() {
                return Ok(Advance::Over { winner: p.other(), moves: 0 });
            }
        }
        match play_trick(self.rules, &mut pos.decks, pos.leader, &mut self.table)? {
            TrickEnd::GameOver { loser } => Ok(Advance::Over { winner: loser.other(), moves: self.table.len() as u64 }),
            TrickEnd::Taken(w) => {
                let deck = &mut pos.decks[w.index()];
                match self.order {
                    PickupOrder::Played => deck.extend(self.table.iter().copied()),
                    PickupOrder::ReversePlayed => deck.extend(self.table.iter().rev().copied()),
                }
                pos.leader = w;
                Ok(Advance::Trick(self.table.len() as u64))
            }
        }
    }
}

pub fn encode_witness(rules: &RuleSpec, state: &Split, leader: Player) -> String {
    format!("{}@{}", state.encode(rules.deck()), leader.number())
}

pub fn decode_witness(rules: &RuleSpec, text: &str) -> Result<(Split, Player), CycleError> {
    let bad = || CycleError::BadWitness(text.to_string());
    let (split, leader) = text.rsplit_once('@').ok_or_else(bad)?;
    let leader = leader.parse::<u8>().ok().and_then(Player::from_number).ok_or_else(bad)?;
    Ok((Split::decode(rules.deck(), split)?, leader))
}

/// Replays `period` tricks from the witness with the public trick engine and
/// reports whether the trajectory comes back to it. Returns the moves played.
pub fn verify_witness(
    rules: &RuleSpec,
    witness: &str,
    period: u64,
    order: PickupOrder,
) -> Result<Option<u64>, CycleError> {
    let (start, leader) = decode_witness(rules, witness)?;
    let (mut state, mut lead) = (start.clone(), leader);
    let mut moves = 0;
    for _ in 0..period {
        if state.is_absorbing() {
            return Ok(None);
        }
        let r = rollout(rules, &state, lead)?;
        if r.kind == TrickKind::GameOver {
            return Ok(None);
        }
        moves += r.moves as u64;
        // `table` is top-first: most recent card first.
        let packet = match order {
            PickupOrder::Played => r.table.reversed(),
            PickupOrder::ReversePlayed => r.table.clone(),
        };
        state = match r.player {
            Player::One => Split::new(r.left_rem.concat(&packet), r.right_rem),
            Player::Two => Split::new(r.left_rem, r.right_rem.concat(&packet)),
        };
        lead = r.player;
    }
    Ok((state == start && lead == leader).then_some(moves))
}

/// Plays `deal` to the end, or until a trick-boundary position repeats.
pub fn play_deterministic(
    rules: &RuleSpec,
    deal: &Split,
    config: DeterministicConfig,
) -> Result<CycleOutcome, CycleError> {
    let mut walker = Walker { rules, order: config.pickup_order, table: Vec::new() };
    let start = Position { decks: decks_of(deal), leader: config.first_leader };

    // Brent: the hare walks the trajectory once; the tortoise parks at powers of two.
    let mut hare = start.clone();
    let mut tortoise = start.clone();
    let (mut power, mut lam) = (1u64, 0u64);
    let (mut moves, mut tricks) = (0u64, 0u64);
    loop {
        match walker.advance(&mut hare)? {
            Advance::Over { winner, moves: m } => {
                return Ok(CycleOutcome {
                    kind: OutcomeKind::Terminated,
                    winner: Some(winner),
                    moves: moves + m,
                    tricks,
                    preperiod: None,
                    period: None,
                    period_moves: None,
                    witness_state: None,
                });
            }
            Advance::Trick(m) => {
                moves += m;
                tricks += 1;
                lam += 1;
            }
        }
        if hare == tortoise {
            break;
        }
        if lam == power {
            tortoise = hare.clone();
            power *= 2;
            lam = 0;
        }
    }

    // Preperiod: a lead of `lam` tricks, then walk both until they meet.
    let mut lead = start.clone();
    let mut trail = start;
    for _ in 0..lam {
        walker.advance(&mut lead)?;
    }
    let mut mu = 0u64;
    let mut moves_to_entry = 0u64;
    while lead != trail {
        walker.advance(&mut lead)?;
        if let Advance::Trick(m) = walker.advance(&mut trail)? {
            moves_to_entry += m;
        }
        mu += 1;
    }

    let witness = encode_witness(rules, &split_of(&trail.decks), trail.leader);
    let period_moves = verify_witness(rules, &witness, lam, config.pickup_order)?
        .ok_or_else(|| CycleError::Unverified { witness: witness.clone() })?;
    Ok(CycleOutcome {
        kind: OutcomeKind::Cycle,
        winner: None,
        moves: moves_to_entry + period_moves,
        tricks: mu + lam,
        preperiod: Some(mu),
        period: Some(lam),
        period_moves: Some(period_moves),
        witness_state: Some(witness),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleExample {
    pub deal_index: u64,
    pub deal: String,
    pub preperiod: u64,
    pub period: u64,
    pub period_moves: u64,
    pub witness_state: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MoveSummary {
    pub min: u64,
    pub max: u64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleReport {
    pub deals: u64,
    pub config: DeterministicConfig,
    pub terminated: u64,
    pub cycles: u64,
    pub frequency: f64,
    pub wins: [u64; 2],
    /// Move counts of the terminated games.
    pub moves: Option<MoveSummary>,
    /// Every cycle when there are few, otherwise the first by deal index.
    pub examples: Vec<CycleExample>,
}

/// Cap on the examples carried in a report.
pub const MAX_EXAMPLES: usize = 16;

#[derive(Debug, Clone, Default)]
struct Tally {
    terminated: u64,
    wins: [u64; 2],
    min: u64,
    max: u64,
    sum: u128,
    cycles: Vec<CycleExample>,
    cycle_count: u64,
}

impl Tally {
    fn merge(mut self, o: Tally) -> Tally {
        self.min = match (self.terminated, o.terminated) {
            (0, _) => o.min,
            (_, 0) => self.min,
            _ => self.min.min(o.min),
        };
        self.terminated += o.terminated;
        self.wins = [self.wins[0] + o.wins[0], self.wins[1] + o.wins[1]];
        self.max = self.max.max(o.max);
        self.sum += o.sum;
        self.cycle_count += o.cycle_count;
        self.cycles.extend(o.cycles);
        self.cycles.sort_by_key(|c| c.deal_index);
        self.cycles.truncate(MAX_EXAMPLES);
        self
    }
}

/// Plays `deals` uniformly random equal deals (left gets the smaller half
/// when the deck is odd). Deal `i` uses stream `i` of `master_seed`.
pub fn search_cycles(
    rules: &RuleSpec,
    deals: u64,
    master_seed: u64,
    config: DeterministicConfig,
) -> Result<CycleReport, CycleError> {
    if deals == 0 {
        return Err(CycleError::NoDeals);
    }
    let deck = rules.deck();
    let half = deck.len() / 2;
    let tally = (0..deals)
        .into_par_iter()
        .map(|i| {
            let deal = deal_with(deck, half, &mut SeedSpec::new(master_seed, i).rng())?;
            let out = play_deterministic(rules, &deal, config)?;
            let mut t = Tally::default();
            match out.kind {
                OutcomeKind::Terminated => {
                    t.terminated = 1;
                    if let Some(w) = out.winner {
                        t.wins[w.index()] = 1;
                    }
                    (t.min, t.max, t.sum) = (out.moves, out.moves, out.moves as u128);
                }
                OutcomeKind::Cycle => {
                    t.cycle_count = 1;
                    t.cycles.push(CycleExample {
                        deal_index: i,
                        deal: deal.encode(deck),
                        preperiod: out.preperiod.unwrap_or(0),
                        period: out.period.unwrap_or(0),
                        period_moves: out.period_moves.unwrap_or(0),
                        witness_state: out.witness_state.unwrap_or_default(),
                    });
                }
            }
            Ok::<_, CycleError>(t)
        })
        .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))?;
    Ok(CycleReport {
        deals,
        config,
        terminated: tally.terminated,
        cycles: tally.cycle_count,
        frequency: tally.cycle_count as f64 / deals as f64,
        wins: tally.wins,
        moves: (tally.terminated > 0).then(|| MoveSummary {
            min: tally.min,
            max: tally.max,
            mean: tally.sum as f64 / tally.terminated as f64,
        }),
        examples: tally.cycles,
    })
}
