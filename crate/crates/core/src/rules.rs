//! The rule function: given the cards on the table, decide whether the trick
//! continues (and who plays next) or finishes (and who takes it).
//!
//! Decisions name players relative to the trick's starter, so a decision is a
//! function of the card sequence alone. The engine maps relative players to
//! absolute ones through the starter of the trick in progress.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::deck::{Card, DeckSpec, OrderedPile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelativePlayer {
    Starter,
    Opponent,
}

impl RelativePlayer {
    pub fn other(self) -> RelativePlayer {
        match self {
            RelativePlayer::Starter => RelativePlayer::Opponent,
            RelativePlayer::Opponent => RelativePlayer::Starter,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Continue,
    Finish,
}

/// Output of the rule function. `who` plays next on `Continue` and takes the
/// trick on `Finish`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RuleDecision {
    pub verdict: Verdict,
    pub who: RelativePlayer,
}

impl RuleDecision {
    pub const fn cont(who: RelativePlayer) -> Self {
        RuleDecision { verdict: Verdict::Continue, who }
    }

    pub const fn finish(who: RelativePlayer) -> Self {
        RuleDecision { verdict: Verdict::Finish, who }
    }

    pub fn is_finish(&self) -> bool {
        self.verdict == Verdict::Finish
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Indexing {
    Relative,
    AbsoluteFixture,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RuleError {
    #[error("empty pile")]
    EmptyPile,
    #[error("card (rank {}, copy {}) is not in the deck", .0.rank, .0.copy)]
    UnknownCard(Card),
    #[error("card (rank {}, copy {}) appears twice", .0.rank, .0.copy)]
    DuplicateCard(Card),
    #[error("inconsistent pile: the trick already finished after {at} card(s)")]
    PrematureFinish { at: usize },
    #[error("fixture table has no entry for a pile of {len} card(s)")]
    MissingFixtureEntry { len: usize },
    #[error("fixture rules require a fixture table")]
    MissingFixtureTable,
}

/// Explicit decision table keyed by table pile.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FixtureTable {
    // Keyed by play order (oldest card first) so the tracker can look up
    // without reversing on every card.
    entries: HashMap<Vec<Card>, RuleDecision>,
}

impl FixtureTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a decision for `pile` (top-first, as everywhere else).
    pub fn insert(&mut self, pile: &OrderedPile, decision: RuleDecision) {
        self.entries.insert(pile.reversed().into_vec(), decision);
    }

    pub fn get(&self, pile: &OrderedPile) -> Option<RuleDecision> {
        self.entries.get(&*pile.reversed().into_vec()).copied()
    }

    fn get_played(&self, played: &[Card]) -> Option<RuleDecision> {
        self.entries.get(played).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries as (top-first pile, decision), sorted for stable output.
    pub fn entries(&self) -> Vec<(OrderedPile, RuleDecision)> {
        let mut out: Vec<_> =
            self.entries.iter().map(|(played, d)| (OrderedPile::new(played.clone()).reversed(), *d)).collect();
        out.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0)));
        out
    }
}

/// A member of the rule family: the deck with its penalty table, or an
/// explicit fixture table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSpec {
    deck: DeckSpec,
    indexing: Indexing,
    fixture: Option<FixtureTable>,
    court_free: bool,
    penalties: Vec<u32>,
}

impl RuleSpec {
    /// Penalty-family rules read from the deck's rank table.
    pub fn relative(deck: DeckSpec) -> Self {
        let penalties = deck.penalties();
        RuleSpec { deck, indexing: Indexing::Relative, fixture: None, court_free: false, penalties }
    }

    /// Pure alternation: no rank carries a penalty and tricks never finish.
    pub fn court_free(deck: DeckSpec) -> Self {
        let mut spec = Self::relative(deck);
        spec.court_free = true;
        spec
    }

    pub fn fixture(deck: DeckSpec, table: FixtureTable) -> Self {
        let penalties = deck.penalties();
        RuleSpec { deck, indexing: Indexing::AbsoluteFixture, fixture: Some(table), court_free: false, penalties }
    }

    /// Generic constructor used by config loaders.
    pub fn from_parts(deck: DeckSpec, indexing: Indexing, fixture: Option<FixtureTable>, court_free: bool) -> Self {
        let penalties = deck.penalties();
        RuleSpec { deck, indexing, fixture, court_free, penalties }
    }

    pub fn deck(&self) -> &DeckSpec {
        &self.deck
    }

    pub fn indexing(&self) -> Indexing {
        self.indexing
    }

    pub fn fixture_table(&self) -> Option<&FixtureTable> {
        self.fixture.as_ref()
    }

    pub fn is_court_free(&self) -> bool {
        self.court_free
    }

    /// Fresh incremental evaluator for a trick.
    pub fn tracker(&self) -> Tracker<'_> {
        let state = match self.indexing {
            Indexing::Relative => TrackerState::Payment,
            Indexing::AbsoluteFixture => TrackerState::Fixture(Vec::new()),
        };
        Tracker { rules: self, to_move: RelativePlayer::Starter, phase: PaymentPhase::Alternating, state, played: 0 }
    }
}

/// Where the payment machine stands after a card.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "phase")]
pub enum PaymentPhase {
    /// No obligation; players alternate.
    Alternating,
    /// `payer` still owes `remaining` cards.
    Paying {
        payer: RelativePlayer,
        remaining: u32,
    },
    Finished {
        winner: RelativePlayer,
    },
}

#[derive(Debug, Clone)]
enum TrackerState {
    Payment,
    Fixture(Vec<Card>),
}

/// Incremental form of the rule function: feed cards oldest first and get
/// the decision for the pile built so far. Feeding the whole pile gives the
/// same answer as [`evaluate`].
#[derive(Debug, Clone)]
pub struct Tracker<'a> {
    rules: &'a RuleSpec,
    to_move: RelativePlayer,
    phase: PaymentPhase,
    state: TrackerState,
    played: usize,
}

impl Tracker<'_> {
    /// Player who must lay the next card.
    pub fn to_move(&self) -> RelativePlayer {
        self.to_move
    }

    pub fn phase(&self) -> PaymentPhase {
        self.phase
    }

    pub fn played(&self) -> usize {
        self.played
    }

    pub fn push(&mut self, card: Card) -> Result<RuleDecision, RuleError> {
        if !self.rules.deck.contains(card) {
            return Err(RuleError::UnknownCard(card));
        }
        if matches!(self.phase, PaymentPhase::Finished { .. }) {
            return Err(RuleError::PrematureFinish { at: self.played });
        }
        self.played += 1;
        let decision = match &mut self.state {
            TrackerState::Payment => {
                let mover = self.to_move;
                let penalty = self.rules.penalties[card.rank as usize];
                if penalty > 0 && !self.rules.court_free {
                    // A court card cancels any running obligation and charges the other player.
                    self.phase = PaymentPhase::Paying { payer: mover.other(), remaining: penalty };
                    RuleDecision::cont(mover.other())
                } else {
                    match self.phase {
                        PaymentPhase::Paying { payer, remaining } if remaining > 1 => {
                            self.phase = PaymentPhase::Paying { payer, remaining: remaining - 1 };
                            RuleDecision::cont(payer)
                        }
                        PaymentPhase::Paying { payer, .. } => {
                            self.phase = PaymentPhase::Finished { winner: payer.other() };
                            RuleDecision::finish(payer.other())
                        }
                        _ => RuleDecision::cont(mover.other()),
                    }
                }
            }
            TrackerState::Fixture(played) => {
                played.push(card);
                let table = self.rules.fixture.as_ref().ok_or(RuleError::MissingFixtureTable)?;
                let decision = table.get_played(played).ok_or(RuleError::MissingFixtureEntry { len: played.len() })?;
                if decision.is_finish() {
                    self.phase = PaymentPhase::Finished { winner: decision.who };
                }
                decision
            }
        };
        if !decision.is_finish() {
            self.to_move = decision.who;
        }
        Ok(decision)
    }
}

fn check_cards(rules: &RuleSpec, pile: &OrderedPile) -> Result<(), RuleError> {
    if pile.is_empty() {
        return Err(RuleError::EmptyPile);
    }
    let deck = rules.deck();
    let mut seen = vec![false; deck.len()];
    for &card in pile.iter() {
        if !deck.contains(card) {
            return Err(RuleError::UnknownCard(card));
        }
        let i = deck.card_index(card);
        if std::mem::replace(&mut seen[i], true) {
            return Err(RuleError::DuplicateCard(card));
        }
    }
    Ok(())
}

/// The rule function on a top-first table pile.
///
/// The pile is replayed oldest card first; a pile whose proper prefix already
/// finished the trick is not reachable in play and is rejected.
pub fn evaluate(rules: &RuleSpec, pile: &OrderedPile) -> Result<RuleDecision, RuleError> {
    check_cards(rules, pile)?;
    let mut tracker = rules.tracker();
    let mut last = None;
    for &card in pile.iter().rev() {
        last = Some(tracker.push(card)?);
    }
    Ok(last.expect("non-empty pile"))
}

/// Who laid each card of a pile, relative to the starter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PileAnnotation {
    /// One entry per card, in play order (oldest first).
    pub owners: Vec<RelativePlayer>,
    /// Machine phase after each card, in play order.
    pub mode_trace: Vec<PaymentPhase>,
}

/// Replays a pile and records the player that laid each card.
pub fn annotate(rules: &RuleSpec, pile: &OrderedPile) -> Result<PileAnnotation, RuleError> {
    check_cards(rules, pile)?;
    let mut tracker = rules.tracker();
    let mut owners = Vec::with_capacity(pile.len());
    let mut mode_trace = Vec::with_capacity(pile.len());
    for &card in pile.iter().rev() {
        owners.push(tracker.to_move());
        tracker.push(card)?;
        mode_trace.push(tracker.phase());
    }
    Ok(PileAnnotation { owners, mode_trace })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Diagnostic {
    EmptyDeck,
    NonPositiveCount { rank: String },
    NegativePenalty { rank: String },
    DuplicateRankName { rank: String },
    TooManyCopies { rank: String },
    TooManyRanks,
    NoPenaltyRank,
    MissingFixtureTable,
    PartialFixtureTable { pile: Vec<String> },
    FixtureTooLargeToCheck { cards: usize },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::EmptyDeck => write!(f, "empty deck"),
            Diagnostic::NonPositiveCount { rank } => write!(f, "rank `{rank}`: count must be positive"),
            Diagnostic::NegativePenalty { rank } => write!(f, "rank `{rank}`: negative penalty"),
            Diagnostic::DuplicateRankName { rank } => write!(f, "duplicate rank name `{rank}`"),
            Diagnostic::TooManyCopies { rank } => write!(f, "rank `{rank}`: more than 255 copies"),
            Diagnostic::TooManyRanks => write!(f, "more than 255 ranks"),
            Diagnostic::NoPenaltyRank => {
                write!(f, "no rank carries a penalty and the rules are not flagged court-free")
            }
            Diagnostic::MissingFixtureTable => write!(f, "absolute_fixture indexing without a fixture table"),
            Diagnostic::PartialFixtureTable { pile } => {
                write!(f, "partial fixture table: no entry for pile [{}]", pile.join(","))
            }
            Diagnostic::FixtureTooLargeToCheck { cards } => {
                write!(f, "fixture table totality not checked for a {cards}-card deck")
            }
        }
    }
}

/// Largest deck whose fixture table is checked for totality.
const FIXTURE_CHECK_CAP: usize = 8;

/// Structural problems with a rule spec. An empty list means well-formed.
pub fn validate(rules: &RuleSpec) -> Vec<Diagnostic> {
    let deck = rules.deck();
    let mut out = Vec::new();
    if deck.ranks.len() > 255 {
        out.push(Diagnostic::TooManyRanks);
    }
    let mut names = std::collections::HashSet::new();
    for r in &deck.ranks {
        if !names.insert(r.name.as_str()) {
            out.push(Diagnostic::DuplicateRankName { rank: r.name.clone() });
        }
        if r.count <= 0 {
            out.push(Diagnostic::NonPositiveCount { rank: r.name.clone() });
        }
        if r.count > 255 {
            out.push(Diagnostic::TooManyCopies { rank: r.name.clone() });
        }
        if r.penalty < 0 {
            out.push(Diagnostic::NegativePenalty { rank: r.name.clone() });
        }
    }
    if deck.is_empty() {
        out.push(Diagnostic::EmptyDeck);
    }
    match rules.indexing() {
        Indexing::Relative => {
            if !rules.is_court_free() && deck.ranks.iter().all(|r| r.penalty <= 0) {
                out.push(Diagnostic::NoPenaltyRank);
            }
        }
        Indexing::AbsoluteFixture => match rules.fixture_table() {
            None => out.push(Diagnostic::MissingFixtureTable),
            Some(_) if deck.len() > FIXTURE_CHECK_CAP => {
                out.push(Diagnostic::FixtureTooLargeToCheck { cards: deck.len() })
            }
            Some(_) if out.is_empty() => {
                if let Some(pile) = first_missing_fixture_entry(rules) {
                    out.push(Diagnostic::PartialFixtureTable { pile: deck.pile_names(&pile) });
                }
            }
            Some(_) => {}
        },
    }
    out
}

/// Depth-first walk over every pile reachable in play; returns the first one
/// (top-first) that the fixture table cannot decide.
fn first_missing_fixture_entry(rules: &RuleSpec) -> Option<OrderedPile> {
    fn walk(rules: &RuleSpec, cards: &[Card], played: &mut Vec<Card>, used: &mut [bool]) -> Option<Vec<Card>> {
        for (i, &card) in cards.iter().enumerate() {
            if used[i] {
                continue;
            }
            played.push(card);
            used[i] = true;
            let found = match rules.fixture_table().and_then(|t| t.get_played(played)) {
                None => Some(played.clone()),
                Some(d) if d.is_finish() => None,
                Some(_) => walk(rules, cards, played, used),
            };
            used[i] = false;
            played.pop();
            if found.is_some() {
                return found;
            }
        }
        None
    }
    let cards = rules.deck().cards();
    let mut used = vec![false; cards.len()];
    walk(rules, &cards, &mut Vec::new(), &mut used).map(|played| OrderedPile::new(played).reversed())
}
