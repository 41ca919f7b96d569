//! The state graph of a small deck and the absorption argument run on it.
//!
//! Vertices are all splits of the deck plus one sink per losing player. The
//! canonical subgraph keeps, for every non-absorbing split, the two edges to
//! its unshuffled successors (one per starter). The full support graph adds
//! every reordering of each taken pile.
//!
//! Predecessors in the canonical subgraph are recovered from the bottom of
//! the taker's deck: the bottom card was played first, the next one second,
//! and so on until the rule function finishes the trick. The relative winner
//! of that finish pins the starter, so each side yields at most one
//! predecessor.

use std::collections::{BTreeMap, HashSet, VecDeque};

use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::deck::{Card, DeckError, OrderedPile, Player, Split, SplitIndexer};
use crate::engine::{self, absolute, canonical_successor, EngineError, Target, TrickEnd};
use crate::rules::{annotate, RelativePlayer, RuleSpec};

/// Largest taken pile whose reorderings are enumerated.
pub const PERMUTATION_GUARD: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error(transparent)]
    Deck(#[from] DeckError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("taken pile of {len} cards exceeds the permutation guard of {PERMUTATION_GUARD}")]
    PermutationGuard { len: usize },
}

/// A vertex: a split by index, or the sink of a losing player.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    State(usize),
    Sink(Player),
}

/// The canonical subgraph G0 over every split of a deck.
#[derive(Debug, Clone)]
pub struct StateGraph {
    rules: RuleSpec,
    indexer: SplitIndexer,
    /// Per split index: the successors under starter 1 and starter 2, or
    /// `None` for absorbing splits.
    edges: Vec<Option<[Node; 2]>>,
}

impl StateGraph {
    pub fn rules(&self) -> &RuleSpec {
        &self.rules
    }

    pub fn indexer(&self) -> &SplitIndexer {
        &self.indexer
    }

    /// Number of split vertices (the two sinks come on top).
    pub fn split_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.edges.len() + 2
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().flatten().count() * 2
    }

    pub fn split(&self, index: usize) -> Split {
        self.indexer.split(index)
    }

    pub fn out_edges(&self, index: usize) -> Option<[Node; 2]> {
        self.edges[index]
    }

    pub fn is_absorbing(&self, node: Node) -> bool {
        match node {
            Node::State(i) => self.indexer.is_absorbing(i),
            Node::Sink(_) => true,
        }
    }

    pub fn node_of(&self, target: &Target) -> Node {
        node_of(&self.indexer, target)
    }

    /// In-degree of every split vertex, counted edge by edge (parallel edges
    /// count twice).
    pub fn in_degrees(&self) -> Vec<u32> {
        let mut deg = vec![0u32; self.edges.len()];
        for targets in self.edges.iter().flatten() {
            for t in targets {
                if let Node::State(j) = *t {
                    deg[j] += 1;
                }
            }
        }
        deg
    }

    /// Non-absorbing splits whose two canonical successors coincide on a
    /// non-absorbing vertex.
    pub fn nondegeneracy_violations(&self) -> Vec<Split> {
        self.edges
            .iter()
            .enumerate()
            .filter_map(|(i, e)| match e {
                Some([a, b]) if a == b && !self.is_absorbing(*a) => Some(self.split(i)),
                _ => None,
            })
            .collect()
    }
}

fn node_of(indexer: &SplitIndexer, target: &Target) -> Node {
    match target {
        Target::State(s) => Node::State(indexer.index(s)),
        Target::Sink(sink) => Node::Sink(sink.loser),
    }
}

/// Builds G0: both canonical successors of every non-absorbing split.
pub fn build_g0(rules: &RuleSpec) -> Result<StateGraph, GraphError> {
    let indexer = SplitIndexer::new(rules.deck())?;
    let edges = (0..indexer.len())
        .into_par_iter()
        .map(|i| {
            if indexer.is_absorbing(i) {
                return Ok(None);
            }
            let state = indexer.split(i);
            let a = canonical_successor(rules, &state, Player::One)?;
            let b = canonical_successor(rules, &state, Player::Two)?;
            Ok(Some([node_of(&indexer, &a), node_of(&indexer, &b)]))
        })
        .collect::<Result<Vec<_>, GraphError>>()?;
    Ok(StateGraph { rules: rules.clone(), indexer, edges })
}

/// The unique split that reaches `state` by a trick taken by `side`, with the
/// starter of that trick and the trick's length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Predecessor {
    pub split: Split,
    pub starter: Player,
    pub trick_length: usize,
}

/// Recovers the `side` predecessor of `state` in G0, if there is one.
///
/// Returns `None` when the taker's deck runs out before the rule function
/// finishes a trick, or when the candidate does not replay forward to `state`
/// (for instance because it would be absorbing).
pub fn reconstruct_predecessor(rules: &RuleSpec, state: &Split, side: Player) -> Option<Predecessor> {
    let winner_deck = state.side(side);
    let mut tracker = rules.tracker();
    let mut played: Vec<Card> = Vec::new();
    for &card in winner_deck.iter().rev() {
        played.push(card);
        let decision = tracker.push(card).ok()?;
        if !decision.is_finish() {
            continue;
        }
        let starter = match decision.who {
            RelativePlayer::Starter => side,
            RelativePlayer::Opponent => side.other(),
        };
        let pile = OrderedPile::new(played.clone()).reversed();
        let owners = annotate(rules, &pile).ok()?.owners;
        let mut laid: [Vec<Card>; 2] = [Vec::new(), Vec::new()];
        for (&c, owner) in played.iter().zip(owners) {
            laid[absolute(starter, owner).index()].push(c);
        }
        let kept = &winner_deck[..winner_deck.len() - played.len()];
        let winner_pred: OrderedPile = laid[side.index()].iter().chain(kept).copied().collect();
        let loser_pred: OrderedPile =
            laid[side.other().index()].iter().chain(state.side(side.other()).iter()).copied().collect();
        let split = match side {
            Player::One => Split::new(winner_pred, loser_pred),
            Player::Two => Split::new(loser_pred, winner_pred),
        };
        return match canonical_successor(rules, &split, starter) {
            Ok(Target::State(s)) if &s == state => Some(Predecessor { split, starter, trick_length: played.len() }),
            _ => None,
        };
    }
    None
}

/// Builds G0 and lists the splits that violate nondegeneracy.
pub fn check_nondegeneracy(rules: &RuleSpec) -> Result<Vec<Split>, GraphError> {
    Ok(build_g0(rules)?.nondegeneracy_violations())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum LemmaCondition {
    /// A non-absorbing vertex without exactly two out-edges.
    OutDegree { found: usize },
    /// More than two in-edges.
    InDegree { counted: u32 },
    /// Edge counting and reconstruction disagree.
    InDegreeMismatch { counted: u32, reconstructed: u32 },
    /// An in-degree-2 vertex whose left-predecessor chain never reaches a
    /// vertex of in-degree below 2.
    NoEscapeAncestor { reason: EscapeFailure },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EscapeFailure {
    MissingLeftPredecessor,
    NonDecreasingLeft,
    Revisited,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LemmaViolation {
    pub state: Split,
    pub condition: LemmaCondition,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LemmaReport {
    pub out_degree_ok: bool,
    pub in_degree_ok: bool,
    pub escape_ancestor_ok: bool,
    pub violations: Vec<LemmaViolation>,
    /// In-degree (by counting) to number of non-absorbing vertices.
    pub in_degree_histogram: BTreeMap<u32, usize>,
}

impl LemmaReport {
    pub fn all_ok(&self) -> bool {
        self.out_degree_ok && self.in_degree_ok && self.escape_ancestor_ok
    }
}

/// In-degree of a split obtained by reconstructing both predecessors.
pub fn reconstructed_in_degree(rules: &RuleSpec, state: &Split) -> u32 {
    Player::BOTH.iter().filter(|&&side| reconstruct_predecessor(rules, state, side).is_some()).count() as u32
}

/// Checks the three conditions of the absorption lemma on G0.
pub fn verify_lemma(graph: &StateGraph) -> LemmaReport {
    let rules = graph.rules();
    let n = graph.split_count();
    let counted = graph.in_degrees();
    let reconstructed: Vec<u32> =
        (0..n).into_par_iter().map(|i| reconstructed_in_degree(rules, &graph.split(i))).collect();

    let mut violations = Vec::new();
    let mut histogram = BTreeMap::new();
    let (mut out_ok, mut in_ok) = (true, true);
    for i in 0..n {
        let absorbing = graph.indexer.is_absorbing(i);
        if counted[i] != reconstructed[i] {
            in_ok = false;
            violations.push(LemmaViolation {
                state: graph.split(i),
                condition: LemmaCondition::InDegreeMismatch { counted: counted[i], reconstructed: reconstructed[i] },
            });
        }
        if absorbing {
            continue;
        }
        *histogram.entry(counted[i]).or_insert(0) += 1;
        let found = graph.edges[i].map_or(0, |e| e.len());
        if found != 2 {
            out_ok = false;
            violations.push(LemmaViolation { state: graph.split(i), condition: LemmaCondition::OutDegree { found } });
        }
        if counted[i] > 2 {
            in_ok = false;
            violations.push(LemmaViolation {
                state: graph.split(i),
                condition: LemmaCondition::InDegree { counted: counted[i] },
            });
        }
    }

    let escape: Vec<(usize, EscapeFailure)> = (0..n)
        .into_par_iter()
        .filter(|&i| !graph.indexer.is_absorbing(i) && counted[i] == 2)
        .filter_map(|i| escape_failure(graph, &counted, i).map(|f| (i, f)))
        .collect();
    let escape_ok = escape.is_empty();
    violations.extend(escape.into_iter().map(|(i, reason)| LemmaViolation {
        state: graph.split(i),
        condition: LemmaCondition::NoEscapeAncestor { reason },
    }));

    LemmaReport {
        out_degree_ok: out_ok,
        in_degree_ok: in_ok,
        escape_ancestor_ok: escape_ok,
        violations,
        in_degree_histogram: histogram,
    }
}

/// Follows left predecessors from vertex `start` until one has in-degree
/// below 2. Player one's deck must shrink at every step.
fn escape_failure(graph: &StateGraph, counted: &[u32], start: usize) -> Option<EscapeFailure> {
    let rules = graph.rules();
    let mut visited = HashSet::from([start]);
    let mut current = graph.split(start);
    loop {
        let Some(pred) = reconstruct_predecessor(rules, &current, Player::One) else {
            return Some(EscapeFailure::MissingLeftPredecessor);
        };
        if pred.split.left.len() >= current.left.len() {
            return Some(EscapeFailure::NonDecreasingLeft);
        }
        let j = graph.indexer.index(&pred.split);
        if !visited.insert(j) {
            return Some(EscapeFailure::Revisited);
        }
        if counted[j] < 2 {
            return None;
        }
        current = pred.split;
    }
}

/// A trick played from a split, before the taken pile is reordered.
pub(crate) enum Outcome {
    Sink { loser: Player, moves: usize },
    Taken { winner: Player, remaining: [Vec<Card>; 2], pile: Vec<Card> },
}

pub(crate) fn outcome(rules: &RuleSpec, state: &Split, starter: Player) -> Result<Outcome, EngineError> {
    if state.is_absorbing() {
        return Err(EngineError::Absorbing);
    }
    let mut decks = engine::decks_of(state);
    let mut pile = Vec::new();
    Ok(match engine::play_trick(rules, &mut decks, starter, &mut pile)? {
        TrickEnd::GameOver { loser } => Outcome::Sink { loser, moves: pile.len() },
        TrickEnd::Taken(winner) => {
            let [l, r] = decks;
            Outcome::Taken { winner, remaining: [l.into(), r.into()], pile }
        }
    })
}

impl Outcome {
    pub(crate) fn moves(&self) -> usize {
        match self {
            Outcome::Sink { moves, .. } => *moves,
            Outcome::Taken { pile, .. } => pile.len(),
        }
    }

    /// Calls `f` with every place the trick can lead: the sink, or the split
    /// reached by each of the `|pile|!` orderings of the taken pile.
    pub(crate) fn for_each_arrangement(&self, mut f: impl FnMut(Reached<'_>)) -> Result<(), GraphError> {
        match self {
            Outcome::Sink { loser, .. } => f(Reached::Sink(*loser)),
            Outcome::Taken { winner, remaining, pile } => {
                if pile.len() > PERMUTATION_GUARD {
                    return Err(GraphError::PermutationGuard { len: pile.len() });
                }
                let w = winner.index();
                let other = &remaining[1 - w];
                let mut deck = remaining[w].clone();
                let base = deck.len();
                for order in pile.iter().copied().permutations(pile.len()) {
                    deck.truncate(base);
                    deck.extend_from_slice(&order);
                    f(match winner {
                        Player::One => Reached::Split(&deck, other),
                        Player::Two => Reached::Split(other, &deck),
                    });
                }
            }
        }
        Ok(())
    }

    pub(crate) fn for_each_target(&self, indexer: &SplitIndexer, mut f: impl FnMut(Node)) -> Result<(), GraphError> {
        self.for_each_arrangement(|reached| match reached {
            Reached::Sink(loser) => f(Node::Sink(loser)),
            Reached::Split(l, r) => f(Node::State(indexer.index_of(l, r))),
        })
    }
}

pub(crate) enum Reached<'a> {
    Sink(Player),
    Split(&'a [Card], &'a [Card]),
}

/// Every vertex reachable in one step of the randomized game, either starter
/// and every reordering of the taken pile.
pub fn support_successors(rules: &RuleSpec, indexer: &SplitIndexer, state: &Split) -> Result<Vec<Node>, GraphError> {
    let mut out = Vec::new();
    for starter in Player::BOTH {
        outcome(rules, state, starter)?.for_each_target(indexer, |n| out.push(n))?;
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Splits from which no absorbing vertex can be reached in the full
/// randomized chain. Empty exactly when the chain is absorbing.
pub fn check_absorbing(rules: &RuleSpec) -> Result<Vec<Split>, GraphError> {
    let indexer = SplitIndexer::new(rules.deck())?;
    let n = indexer.len();
    let forward: Vec<Vec<Node>> = (0..n)
        .into_par_iter()
        .map(|i| {
            if indexer.is_absorbing(i) {
                Ok(Vec::new())
            } else {
                support_successors(rules, &indexer, &indexer.split(i))
            }
        })
        .collect::<Result<_, GraphError>>()?;

    // Reverse adjacency in CSR form; sinks are ids n and n + 1.
    let id = |node: Node| match node {
        Node::State(j) => j,
        Node::Sink(p) => n + p.index(),
    };
    let mut start = vec![0usize; n + 3];
    for targets in &forward {
        for &t in targets {
            start[id(t) + 1] += 1;
        }
    }
    for k in 0..n + 2 {
        start[k + 1] += start[k];
    }
    let mut fill = start.clone();
    let mut sources = vec![0usize; start[n + 2]];
    for (i, targets) in forward.iter().enumerate() {
        for &t in targets {
            let slot = &mut fill[id(t)];
            sources[*slot] = i;
            *slot += 1;
        }
    }

    let mut reaches: Vec<bool> = (0..n + 2).map(|v| v >= n || indexer.is_absorbing(v)).collect();
    let mut queue: VecDeque<usize> = (0..n + 2).filter(|&v| reaches[v]).collect();
    while let Some(v) = queue.pop_front() {
        for &u in &sources[start[v]..start[v + 1]] {
            if !reaches[u] {
                reaches[u] = true;
                queue.push_back(u);
            }
        }
    }
    Ok((0..n).filter(|&i| !reaches[i]).map(|i| indexer.split(i)).collect())
}
